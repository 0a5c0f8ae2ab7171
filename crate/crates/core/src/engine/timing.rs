//! Timing functions: for every message, the round its receiver was at when it
//! got delivered.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{BoundedCollection, LocalState, SenderSet, Shape};
use crate::strategy::Strategy;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DeliveryTime {
    /// The message is lost.
    Never,
    /// Delivered while the receiver is at this round.
    At(usize),
    /// Delivered, but only once the receiver is past the horizon.
    AfterHorizon,
}

impl DeliveryTime {
    fn at_or_before(self, round: usize) -> bool {
        matches!(self, DeliveryTime::At(t) if t <= round)
    }
}

impl fmt::Display for DeliveryTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeliveryTime::Never => write!(f, "never"),
            DeliveryTime::At(r) => write!(f, "{r}"),
            DeliveryTime::AfterHorizon => write!(f, "after"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TimingFunction {
    shape: Shape,
    // indexed by ((send_round - 1) * n + sender) * n + receiver
    times: Vec<DeliveryTime>,
}

impl TimingFunction {
    /// Builds `time(send_round, sender, receiver)` for every message and checks it.
    pub fn new(shape: Shape, mut time: impl FnMut(usize, usize, usize) -> DeliveryTime) -> Result<Self> {
        let mut times = Vec::with_capacity(shape.horizon * shape.n * shape.n);
        for r in 1..=shape.horizon {
            for k in 0..shape.n {
                for j in 0..shape.n {
                    times.push(time(r, k, j));
                }
            }
        }
        let t = TimingFunction { shape, times };
        t.validate()?;
        Ok(t)
    }

    /// Every message of `c` delivered in the round it was sent for.
    pub fn immediate(c: &BoundedCollection) -> Self {
        let times = Self::index_order(c.shape())
            .map(|(r, k, j)| if c.in_set(r, j).contains(k) { DeliveryTime::At(r) } else { DeliveryTime::Never })
            .collect();
        TimingFunction { shape: c.shape(), times }
    }

    fn index_order(shape: Shape) -> impl Iterator<Item = (usize, usize, usize)> {
        (1..=shape.horizon).flat_map(move |r| (0..shape.n).flat_map(move |k| (0..shape.n).map(move |j| (r, k, j))))
    }

    fn index(&self, round: usize, sender: usize, receiver: usize) -> usize {
        ((round - 1) * self.shape.n + sender) * self.shape.n + receiver
    }

    fn validate(&self) -> Result<()> {
        for (r, k, j) in Self::index_order(self.shape) {
            if let DeliveryTime::At(t) = self.get(r, k, j) {
                if t < r || t > self.shape.horizon {
                    return Err(Error::InvalidTiming(format!(
                        "message ({r},{k}) to {j} delivered at round {t}, outside {r}..={}",
                        self.shape.horizon
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn get(&self, round: usize, sender: usize, receiver: usize) -> DeliveryTime {
        self.times[self.index(round, sender, receiver)]
    }

    /// The delivered collection this timing executes: every message not lost.
    pub fn collection(&self) -> BoundedCollection {
        BoundedCollection::from_fn(self.shape, |r, j| {
            (0..self.shape.n).filter(|k| self.get(r, *k, j) != DeliveryTime::Never).collect()
        })
        .expect("shape already checked")
    }

    /// State of `receiver` when it takes its `round`-th `next`.
    pub fn state_at_next(&self, receiver: usize, round: usize) -> LocalState {
        let mes = (1..=self.shape.horizon)
            .flat_map(|r| (0..self.shape.n).map(move |k| (r, k)))
            .filter(|(r, k)| self.get(*r, *k, receiver).at_or_before(round));
        LocalState::new(round, mes).expect("rounds are positive")
    }

    /// Does every process's state at each of its `next`s satisfy `f`?
    pub fn is_execution_of(&self, f: &Strategy) -> bool {
        (0..self.shape.n).all(|j| (1..=self.shape.horizon).all(|rho| f.accepts_state(&self.state_at_next(j, rho))))
    }

    /// `h(r, p)`: senders whose round-`r` message reached `p` by its round `r`.
    pub fn heard_of(&self) -> BoundedCollection {
        BoundedCollection::from_fn(self.shape, |r, j| {
            (0..self.shape.n).filter(|k| self.get(r, *k, j).at_or_before(r)).collect::<SenderSet>()
        })
        .expect("shape already checked")
    }

    /// Every timing function executing `c`: each delivered message at any
    /// round from its send round on, or after the horizon.
    pub fn all_for(c: &BoundedCollection) -> impl Iterator<Item = TimingFunction> + '_ {
        let shape = c.shape();
        let choices: Vec<Vec<DeliveryTime>> = Self::index_order(shape)
            .map(|(r, k, j)| {
                if c.in_set(r, j).contains(k) {
                    (r..=shape.horizon).map(DeliveryTime::At).chain([DeliveryTime::AfterHorizon]).collect()
                } else {
                    vec![DeliveryTime::Never]
                }
            })
            .collect();
        itertools::Itertools::multi_cartesian_product(choices.into_iter().map(|v| v.into_iter()))
            .map(move |times| TimingFunction { shape, times })
    }
}

pub fn state_at_next(time: &TimingFunction, receiver: usize, round: usize) -> LocalState {
    time.state_at_next(receiver, round)
}

pub fn is_execution_of_strategy(time: &TimingFunction, f: &Strategy) -> bool {
    time.is_execution_of(f)
}

pub fn heard_of_of_timing(time: &TimingFunction) -> BoundedCollection {
    time.heard_of()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predicate::DeliveredPredicate;
    use crate::strategy::{minimal_oblivious, wait_for};

    fn set(ids: &[usize]) -> SenderSet {
        ids.iter().copied().collect()
    }

    #[test]
    fn rejects_early_or_late_times() {
        let shape = Shape::new(2, 2).unwrap();
        assert!(TimingFunction::new(shape, |_, _, _| DeliveryTime::At(1)).is_err());
        assert!(TimingFunction::new(shape, |_, _, _| DeliveryTime::At(3)).is_err());
        assert!(TimingFunction::new(shape, |r, _, _| DeliveryTime::At(r)).is_ok());
    }

    #[test]
    fn state_at_next_examples() {
        let shape = Shape::new(2, 2).unwrap();
        let full = TimingFunction::new(shape, |r, _, _| DeliveryTime::At(r)).unwrap();
        assert_eq!(full.state_at_next(0, 1), LocalState::new(1, [(1, 0), (1, 1)]).unwrap());

        let after = TimingFunction::new(shape, |_, _, _| DeliveryTime::AfterHorizon).unwrap();
        assert!((1..=2).all(|rho| after.state_at_next(1, rho).messages().is_empty()));

        let late =
            TimingFunction::new(
                shape,
                |r, k, j| {
                    if (r, k, j) == (1, 0, 1) {
                        DeliveryTime::At(2)
                    } else {
                        DeliveryTime::At(r)
                    }
                },
            )
            .unwrap();
        assert_eq!(late.state_at_next(1, 1).senders_at(1), set(&[1]));
        assert_eq!(late.state_at_next(1, 2).senders_at(1), set(&[0, 1]));
        assert!(!late.heard_of().in_set(1, 1).contains(0));
    }

    #[test]
    fn heard_of_examples() {
        let c = DeliveredPredicate::crash1_at(1, 2, 2).unwrap().iter().nth(3).unwrap();
        assert_eq!(TimingFunction::immediate(&c).heard_of(), c);
        assert_eq!(TimingFunction::immediate(&c).collection(), c);
        let after = TimingFunction::new(c.shape(), |_, _, _| DeliveryTime::AfterHorizon).unwrap();
        assert!(after.heard_of().rounds().iter().all(|g| g.in_sets().iter().all(|s| s.is_empty())));
    }

    #[test]
    fn acceptance_examples() {
        let p = DeliveredPredicate::crash1_at(1, 3, 2).unwrap();
        let f = Strategy::Oblivious(minimal_oblivious(&p).unwrap());
        assert!(p.iter().all(|c| TimingFunction::immediate(&c).is_execution_of(&f)));

        let shape = Shape::new(2, 2).unwrap();
        let late = TimingFunction::new(
            shape,
            |r, k, _| if (r, k) == (1, 1) { DeliveryTime::At(2) } else { DeliveryTime::At(r) },
        )
        .unwrap();
        assert!(!late.is_execution_of(&Strategy::Oblivious(wait_for(2, 0).unwrap())));

        let shape = Shape::new(3, 1).unwrap();
        let one =
            TimingFunction::new(shape, |_, k, _| if k == 0 { DeliveryTime::At(1) } else { DeliveryTime::AfterHorizon })
                .unwrap();
        assert!(!one.is_execution_of(&Strategy::Oblivious(wait_for(3, 1).unwrap())));
        assert!(one.is_execution_of(&Strategy::Oblivious(wait_for(3, 2).unwrap())));
    }

    #[test]
    fn enumerates_every_timing_of_a_collection() {
        let c = BoundedCollection::total(1, 2).unwrap();
        // round-1 message: times 1, 2, after; round-2 message: 2, after
        assert_eq!(TimingFunction::all_for(&c).count(), 6);
    }
}
