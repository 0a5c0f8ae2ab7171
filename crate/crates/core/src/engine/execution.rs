//! Executions as explicit transition sequences, the rules every execution
//! must follow, and the standard execution of a timing function.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::engine::timing::{DeliveryTime, TimingFunction};
use crate::error::{Error, Result};
use crate::model::{BoundedCollection, LocalState, SenderSet, Shape};
use crate::strategy::Strategy;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Transition {
    /// `receiver` gets the message `sender` sent for `round`.
    Deliver {
        round: usize,
        sender: usize,
        receiver: usize,
    },
    /// `process` moves to its next round.
    Next(usize),
    Stop,
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transition::Deliver { round, sender, receiver } => write!(f, "deliver {round} {sender} {receiver}"),
            Transition::Next(j) => write!(f, "next {j}"),
            Transition::Stop => write!(f, "stop"),
        }
    }
}

impl FromStr for Transition {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let words: Vec<&str> = line.split_whitespace().collect();
        let num = |w: &str| w.parse::<usize>().map_err(|_| Error::Malformed(format!("bad number '{w}' in '{line}'")));
        match words.as_slice() {
            ["deliver", r, k, j] => Ok(Transition::Deliver { round: num(r)?, sender: num(k)?, receiver: num(j)? }),
            ["next", j] => Ok(Transition::Next(num(j)?)),
            ["stop"] => Ok(Transition::Stop),
            _ => Err(Error::Malformed(format!("unknown transition '{line}'"))),
        }
    }
}

/// Which execution rule a sequence breaks, and where.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleViolation {
    /// A process id or round number is out of range.
    OutOfRange { index: usize },
    /// A message is delivered before its sender reached the round.
    DeliveryBeforeSending { index: usize },
    /// A message is delivered twice.
    DuplicateDelivery { index: usize },
    /// Something other than `stop` follows a `stop`.
    ResumedAfterStop { index: usize },
}

impl fmt::Display for RuleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleViolation::OutOfRange { index } => write!(f, "transition {index}: process or round out of range"),
            RuleViolation::DeliveryBeforeSending { index } => {
                write!(f, "transition {index}: message delivered before its sender reached the round")
            }
            RuleViolation::DuplicateDelivery { index } => write!(f, "transition {index}: message delivered twice"),
            RuleViolation::ResumedAfterStop { index } => write!(f, "transition {index}: activity after stop"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Execution {
    shape: Shape,
    transitions: Vec<Transition>,
}

impl Execution {
    pub fn new(shape: Shape, transitions: Vec<Transition>) -> Self {
        Execution { shape, transitions }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Checks the three rules: delivery after sending, unique delivery, and
    /// once stopped, forever stopped.
    pub fn check_rules(&self) -> std::result::Result<(), RuleViolation> {
        let n = self.shape.n;
        let mut nexts = vec![0usize; n];
        let mut delivered = BTreeSet::new();
        let mut stopped = false;
        for (index, t) in self.transitions.iter().enumerate() {
            if stopped && *t != Transition::Stop {
                return Err(RuleViolation::ResumedAfterStop { index });
            }
            match *t {
                Transition::Stop => stopped = true,
                Transition::Next(j) => {
                    if j >= n {
                        return Err(RuleViolation::OutOfRange { index });
                    }
                    nexts[j] += 1;
                }
                Transition::Deliver { round, sender, receiver } => {
                    if round == 0 || sender >= n || receiver >= n {
                        return Err(RuleViolation::OutOfRange { index });
                    }
                    if nexts[sender] + 1 < round {
                        return Err(RuleViolation::DeliveryBeforeSending { index });
                    }
                    if !delivered.insert((round, sender, receiver)) {
                        return Err(RuleViolation::DuplicateDelivery { index });
                    }
                }
            }
        }
        Ok(())
    }

    /// States of `process` at each of its `next` transitions, up to the horizon.
    pub fn states_at_next(&self, process: usize) -> Vec<LocalState> {
        let mut mes = Vec::new();
        let mut round = 1;
        let mut out = Vec::new();
        for t in &self.transitions {
            match *t {
                Transition::Deliver { round: r, sender, receiver } if receiver == process => mes.push((r, sender)),
                Transition::Next(j) if j == process => {
                    if round <= self.shape.horizon {
                        out.push(LocalState::new(round, mes.iter().copied()).expect("positive rounds"));
                    }
                    round += 1;
                }
                _ => {}
            }
        }
        out
    }

    /// Does every process take `R` nexts, each from a state `f` accepts?
    pub fn is_execution_of(&self, f: &Strategy) -> bool {
        (0..self.shape.n).all(|p| {
            let states = self.states_at_next(p);
            states.len() == self.shape.horizon && states.iter().all(|q| f.accepts_state(q))
        })
    }

    /// Round of the receiver at each delivery, as a timing function.
    pub fn timing(&self) -> Result<TimingFunction> {
        let n = self.shape.n;
        let horizon = self.shape.horizon;
        let mut nexts = vec![0usize; n];
        let mut times = std::collections::BTreeMap::new();
        for t in &self.transitions {
            match *t {
                Transition::Next(j) => nexts[j] += 1,
                Transition::Deliver { round, sender, receiver } if round <= horizon => {
                    let at = nexts[receiver] + 1;
                    let time = if at > horizon { DeliveryTime::AfterHorizon } else { DeliveryTime::At(at) };
                    times.insert((round, sender, receiver), time);
                }
                _ => {}
            }
        }
        TimingFunction::new(self.shape, |r, k, j| times.get(&(r, k, j)).copied().unwrap_or(DeliveryTime::Never))
    }

    /// `h(r, p)`: senders of round-`r` messages `p` got before leaving round `r`.
    pub fn heard_of(&self) -> Result<BoundedCollection> {
        Ok(self.timing()?.heard_of())
    }

    /// One transition per line.
    pub fn to_text(&self) -> String {
        self.transitions.iter().map(|t| format!("{t}\n")).collect()
    }

    pub fn parse(shape: Shape, text: &str) -> Result<Self> {
        let transitions = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        Ok(Execution { shape, transitions })
    }
}

/// Rounds `1..=R`: the deliveries timed at that round in ascending
/// `(round, sender, receiver)` order, then every process's `next`. Messages
/// delivered after the horizon come last.
pub fn standard_execution(time: &TimingFunction) -> Execution {
    let shape = time.shape();
    let messages: Vec<(usize, usize, usize)> = (1..=shape.horizon)
        .flat_map(|r| (0..shape.n).flat_map(move |k| (0..shape.n).map(move |j| (r, k, j))))
        .collect();
    let deliver = |(round, sender, receiver): (usize, usize, usize)| Transition::Deliver { round, sender, receiver };
    let mut transitions = Vec::new();
    for rho in 1..=shape.horizon {
        transitions.extend(
            messages.iter().copied().filter(|(r, k, j)| time.get(*r, *k, *j) == DeliveryTime::At(rho)).map(deliver),
        );
        transitions.extend((0..shape.n).map(Transition::Next));
    }
    transitions.extend(
        messages.iter().copied().filter(|(r, k, j)| time.get(*r, *k, *j) == DeliveryTime::AfterHorizon).map(deliver),
    );
    Execution { shape, transitions }
}

/// Senders heard by `process` for `round` in `exec`, for quick inspection.
pub fn heard_at(exec: &Execution, round: usize, process: usize) -> Result<SenderSet> {
    Ok(exec.heard_of()?.in_set(round, process))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deliver(round: usize, sender: usize, receiver: usize) -> Transition {
        Transition::Deliver { round, sender, receiver }
    }

    #[test]
    fn standard_execution_examples() {
        let shape = Shape::new(1, 1).unwrap();
        let t = TimingFunction::new(shape, |_, _, _| DeliveryTime::At(1)).unwrap();
        assert_eq!(standard_execution(&t).transitions(), &[deliver(1, 0, 0), Transition::Next(0)]);

        let shape = Shape::new(2, 1).unwrap();
        let t = TimingFunction::new(shape, |_, _, _| DeliveryTime::Never).unwrap();
        assert_eq!(standard_execution(&t).transitions(), &[Transition::Next(0), Transition::Next(1)]);
    }

    #[test]
    fn standard_execution_reproduces_its_timing() {
        let shape = Shape::new(2, 2).unwrap();
        let t = TimingFunction::new(shape, |r, k, j| match (r, k, j) {
            (1, 0, 1) => DeliveryTime::At(2),
            (2, 1, 0) => DeliveryTime::AfterHorizon,
            (2, 1, 1) => DeliveryTime::Never,
            _ => DeliveryTime::At(r),
        })
        .unwrap();
        let exec = standard_execution(&t);
        assert_eq!(exec.check_rules(), Ok(()));
        assert_eq!(exec.timing().unwrap(), t);
        assert_eq!(exec.heard_of().unwrap(), t.heard_of());
        assert_eq!(exec.states_at_next(1)[1], t.state_at_next(1, 2));
    }

    #[test]
    fn rule_violations() {
        let shape = Shape::new(2, 2).unwrap();
        let early = Execution::new(shape, vec![deliver(2, 0, 1)]);
        assert_eq!(early.check_rules(), Err(RuleViolation::DeliveryBeforeSending { index: 0 }));
        let twice = Execution::new(shape, vec![deliver(1, 0, 1), deliver(1, 0, 1)]);
        assert_eq!(twice.check_rules(), Err(RuleViolation::DuplicateDelivery { index: 1 }));
        let resumed = Execution::new(shape, vec![Transition::Stop, Transition::Next(0)]);
        assert_eq!(resumed.check_rules(), Err(RuleViolation::ResumedAfterStop { index: 1 }));
        let ok = Execution::new(shape, vec![Transition::Next(0), deliver(2, 0, 1), Transition::Stop, Transition::Stop]);
        assert_eq!(ok.check_rules(), Ok(()));
        assert_eq!(
            Execution::new(shape, vec![Transition::Next(2)]).check_rules(),
            Err(RuleViolation::OutOfRange { index: 0 })
        );
    }

    #[test]
    fn text_round_trip() {
        let shape = Shape::new(2, 1).unwrap();
        let exec =
            Execution::new(shape, vec![deliver(1, 1, 0), Transition::Next(0), Transition::Next(1), Transition::Stop]);
        let text = exec.to_text();
        assert_eq!(text, "deliver 1 1 0\nnext 0\nnext 1\nstop\n");
        assert_eq!(Execution::parse(shape, &text).unwrap(), exec);
        assert!(Execution::parse(shape, "jump 1").is_err());
        assert_eq!(heard_at(&exec, 1, 0).unwrap(), SenderSet::singleton(1));
    }
}
