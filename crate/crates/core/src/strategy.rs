//! Oblivious and conservative strategies, represented by the projections of
//! the local states they accept (`Nexts` and `Nexts^R`).

use std::collections::BTreeSet;

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{pack_prefix, ConservativeState, LocalState, ObliviousState, SenderSet, Shape};
use crate::predicate::DeliveredPredicate;

/// A strategy that only looks at the senders heard for the current round.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawOblivious")]
pub struct ObliviousStrategy {
    n: usize,
    nexts: BTreeSet<SenderSet>,
}

#[derive(Deserialize)]
struct RawOblivious {
    n: usize,
    nexts: BTreeSet<SenderSet>,
}

impl TryFrom<RawOblivious> for ObliviousStrategy {
    type Error = Error;

    fn try_from(raw: RawOblivious) -> Result<Self> {
        ObliviousStrategy::new(raw.n, raw.nexts)
    }
}

impl ObliviousStrategy {
    pub fn new(n: usize, nexts: impl IntoIterator<Item = SenderSet>) -> Result<Self> {
        if n == 0 {
            return Err(Error::NoProcesses);
        }
        let nexts: BTreeSet<SenderSet> = nexts.into_iter().collect();
        if let Some(bad) = nexts.iter().find(|s| s.bound() > n) {
            return Err(Error::ProcessOutOfRange { process: bad.bound() - 1, n });
        }
        Ok(ObliviousStrategy { n, nexts })
    }

    /// `f^{n,F}`: advance once at least `n - F` messages of the round are in.
    pub fn wait_for(n: usize, faults: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::NoProcesses);
        }
        if faults > n {
            return Err(Error::TooManyFaults { faults, n });
        }
        Self::new(n, SenderSet::all_subsets(n).filter(|s| s.len() + faults >= n))
    }

    /// Every in-set occurring in `pred`.
    pub fn minimal(pred: &DeliveredPredicate) -> Result<Self> {
        if pred.is_empty() {
            return Err(Error::EmptyPredicate);
        }
        Self::new(pred.n(), pred.occurring_sets())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nexts(&self) -> &BTreeSet<SenderSet> {
        &self.nexts
    }

    pub fn accepts(&self, q: ObliviousState) -> bool {
        self.nexts.contains(&q.0)
    }

    pub fn accepts_state(&self, q: &LocalState) -> bool {
        self.accepts(q.obliv())
    }

    fn check_n(&self, other: &ObliviousStrategy) -> Result<()> {
        if self.n != other.n {
            return Err(Error::ProcessCountMismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    pub fn union(&self, other: &ObliviousStrategy) -> Result<Self> {
        self.check_n(other)?;
        Ok(ObliviousStrategy { n: self.n, nexts: self.nexts.union(&other.nexts).copied().collect() })
    }

    pub fn combine(&self, other: &ObliviousStrategy) -> Result<Self> {
        self.check_n(other)?;
        let nexts = self.nexts.iter().flat_map(|a| other.nexts.iter().map(|b| a.intersection(*b))).collect();
        Ok(ObliviousStrategy { n: self.n, nexts })
    }

    pub fn is_subset(&self, other: &ObliviousStrategy) -> bool {
        self.n == other.n && self.nexts.is_subset(&other.nexts)
    }

    pub fn is_valid_for(&self, pred: &DeliveredPredicate) -> bool {
        self.n == pred.n() && pred.occurring_sets().iter().all(|s| self.nexts.contains(s))
    }

    /// The same strategy seen as a conservative one up to `horizon`: every
    /// state whose current-round set is in `Nexts`, whatever came before.
    pub fn as_conservative(&self, horizon: usize) -> Result<ConservativeStrategy> {
        let shape = Shape::new(self.n, horizon)?;
        let mut by_round = vec![FxHashSet::default(); horizon];
        for (i, level) in by_round.iter_mut().enumerate() {
            let round = i + 1;
            let earlier = 1u128 << (self.n * (round - 1));
            for history in 0..earlier {
                for last in &self.nexts {
                    level.insert(history | (last.bits() as u128) << (self.n * (round - 1)));
                }
            }
        }
        Ok(ConservativeStrategy { shape, by_round })
    }
}

/// A strategy that looks at the round number and every message of rounds up to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConservativeStrategy {
    shape: Shape,
    // packed per-round prefixes of the accepted states, indexed by round - 1
    by_round: Vec<FxHashSet<u128>>,
}

impl ConservativeStrategy {
    pub fn new(n: usize, horizon: usize, nexts: impl IntoIterator<Item = ConservativeState>) -> Result<Self> {
        let shape = Shape::new(n, horizon)?;
        let mut by_round = vec![FxHashSet::default(); horizon];
        for q in nexts {
            if q.round() > horizon {
                return Err(Error::Malformed(format!("state at round {} beyond horizon {horizon}", q.round())));
            }
            for set in q.per_round() {
                shape.check_set(*set)?;
            }
            by_round[q.round() - 1].insert(q.pack(n));
        }
        Ok(ConservativeStrategy { shape, by_round })
    }

    /// Every per-receiver prefix of every member of `pred`.
    pub fn minimal(pred: &DeliveredPredicate) -> Result<Self> {
        if pred.is_empty() {
            return Err(Error::EmptyPredicate);
        }
        let shape = pred.shape();
        let mut by_round = vec![FxHashSet::default(); shape.horizon];
        for p in 0..shape.n {
            for column in pred.columns_of(p) {
                for (i, level) in by_round.iter_mut().enumerate() {
                    level.insert(column & crate::model::mask((i + 1) * shape.n));
                }
            }
        }
        Ok(ConservativeStrategy { shape, by_round })
    }

    pub fn n(&self) -> usize {
        self.shape.n
    }

    pub fn horizon(&self) -> usize {
        self.shape.horizon
    }

    pub fn len(&self) -> usize {
        self.by_round.iter().map(|l| l.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Accepted states in canonical order: by round, then by per-round sets.
    pub fn nexts(&self) -> Vec<ConservativeState> {
        let mut out: Vec<ConservativeState> = self
            .by_round
            .iter()
            .enumerate()
            .flat_map(|(i, level)| level.iter().map(move |bits| ConservativeState::unpack(i + 1, *bits, self.shape.n)))
            .collect();
        out.sort_by(|a, b| (a.round(), a.per_round()).cmp(&(b.round(), b.per_round())));
        out
    }

    pub fn accepts(&self, q: &ConservativeState) -> bool {
        q.round() <= self.shape.horizon && self.by_round[q.round() - 1].contains(&q.pack(self.shape.n))
    }

    pub fn accepts_state(&self, q: &LocalState) -> bool {
        self.accepts(&q.cons())
    }

    /// `prefix` packed `n` bits per round, rounds `1..=round`.
    pub(crate) fn accepts_packed(&self, round: usize, prefix: u128) -> bool {
        round <= self.shape.horizon && self.by_round[round - 1].contains(&prefix)
    }

    fn check_shape(&self, other: &ConservativeStrategy) -> Result<()> {
        self.shape.ensure_same(other.shape)
    }

    pub fn union(&self, other: &ConservativeStrategy) -> Result<Self> {
        self.check_shape(other)?;
        let by_round = self.by_round.iter().zip(&other.by_round).map(|(a, b)| a.union(b).copied().collect()).collect();
        Ok(ConservativeStrategy { shape: self.shape, by_round })
    }

    /// States at equal rounds, intersected round by round.
    pub fn combine(&self, other: &ConservativeStrategy) -> Result<Self> {
        self.check_shape(other)?;
        let by_round = self
            .by_round
            .iter()
            .zip(&other.by_round)
            .map(|(a, b)| a.iter().flat_map(|x| b.iter().map(move |y| x & y)).collect())
            .collect();
        Ok(ConservativeStrategy { shape: self.shape, by_round })
    }

    /// `f1 ∪ f2 ∪ {q1 ↝ q2}`, keeping states up to the horizon.
    pub fn succeed(&self, other: &ConservativeStrategy) -> Result<Self> {
        self.check_shape(other)?;
        let mut out = self.union(other)?;
        let n = self.shape.n;
        for (i, heads) in self.by_round.iter().enumerate() {
            let head_round = i + 1;
            for (j, tails) in other.by_round.iter().enumerate() {
                let round = head_round + j + 1;
                if round > self.shape.horizon {
                    break;
                }
                let level = &mut out.by_round[round - 1];
                for h in heads {
                    level.extend(tails.iter().map(|t| h | (t << (head_round * n))));
                }
            }
        }
        Ok(out)
    }

    /// All successions `q1 ↝ .. ↝ qk`, `k >= 1`, up to the horizon.
    pub fn repeat(&self) -> Self {
        let n = self.shape.n;
        let mut levels: Vec<FxHashSet<u128>> = Vec::with_capacity(self.shape.horizon);
        for round in 1..=self.shape.horizon {
            let mut level = self.by_round[round - 1].clone();
            for head_round in 1..round {
                let tails = &self.by_round[round - head_round - 1];
                for h in &levels[head_round - 1] {
                    level.extend(tails.iter().map(|t| h | (t << (head_round * n))));
                }
            }
            levels.push(level);
        }
        ConservativeStrategy { shape: self.shape, by_round: levels }
    }

    pub fn is_subset(&self, other: &ConservativeStrategy) -> bool {
        self.shape == other.shape && self.by_round.iter().zip(&other.by_round).all(|(a, b)| a.is_subset(b))
    }

    pub fn is_valid_for(&self, pred: &DeliveredPredicate) -> bool {
        match ConservativeStrategy::minimal(pred) {
            Ok(min) => min.is_subset(self),
            Err(_) => self.shape == pred.shape(),
        }
    }

    /// Current-round sets of the accepted states, i.e. the oblivious strategy
    /// this one would be if it ignored its past.
    pub fn current_sets(&self) -> BTreeSet<SenderSet> {
        let n = self.shape.n;
        self.by_round
            .iter()
            .enumerate()
            .flat_map(|(i, level)| {
                level.iter().map(move |bits| SenderSet::from_bits(((bits >> (i * n)) & crate::model::mask(n)) as u32))
            })
            .collect()
    }
}

impl std::hash::Hash for ConservativeStrategy {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.shape.hash(state);
        self.nexts().hash(state);
    }
}

#[derive(Serialize, Deserialize)]
struct RawConservative {
    n: usize,
    horizon: usize,
    nexts_r: Vec<ConservativeState>,
}

impl Serialize for ConservativeStrategy {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RawConservative { n: self.shape.n, horizon: self.shape.horizon, nexts_r: self.nexts() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ConservativeStrategy {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawConservative::deserialize(deserializer)?;
        ConservativeStrategy::new(raw.n, raw.horizon, raw.nexts_r).map_err(serde::de::Error::custom)
    }
}

/// Which family of minimal strategy to extract.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StrategyFamily {
    Oblivious,
    Conservative,
}

/// A strategy from either family.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Strategy {
    Oblivious(ObliviousStrategy),
    Conservative(ConservativeStrategy),
}

impl Strategy {
    pub fn minimal(family: StrategyFamily, pred: &DeliveredPredicate) -> Result<Self> {
        Ok(match family {
            StrategyFamily::Oblivious => Strategy::Oblivious(ObliviousStrategy::minimal(pred)?),
            StrategyFamily::Conservative => Strategy::Conservative(ConservativeStrategy::minimal(pred)?),
        })
    }

    pub fn n(&self) -> usize {
        match self {
            Strategy::Oblivious(f) => f.n(),
            Strategy::Conservative(f) => f.n(),
        }
    }

    pub fn accepts_state(&self, q: &LocalState) -> bool {
        match self {
            Strategy::Oblivious(f) => f.accepts_state(q),
            Strategy::Conservative(f) => f.accepts_state(q),
        }
    }

    /// Would a process at `per_round.len()` having heard `per_round` move on?
    pub fn accepts_prefix(&self, per_round: &[SenderSet]) -> bool {
        match self {
            Strategy::Oblivious(f) => per_round.last().is_some_and(|s| f.nexts.contains(s)),
            Strategy::Conservative(f) => f.accepts_packed(per_round.len(), pack_prefix(per_round, f.n())),
        }
    }

    pub fn is_valid_for(&self, pred: &DeliveredPredicate) -> bool {
        match self {
            Strategy::Oblivious(f) => f.is_valid_for(pred),
            Strategy::Conservative(f) => f.is_valid_for(pred),
        }
    }

    /// Fails with a diagnosis naming one state the strategy should accept.
    pub fn ensure_valid_for(&self, pred: &DeliveredPredicate) -> Result<()> {
        if self.n() != pred.n() {
            return Err(Error::ProcessCountMismatch { left: self.n(), right: pred.n() });
        }
        match self {
            Strategy::Oblivious(f) => {
                if let Some(missing) = pred.occurring_sets().into_iter().find(|s| !f.nexts.contains(s)) {
                    return Err(Error::InvalidStrategy(format!(
                        "a process can be stuck having heard exactly {missing} for its round"
                    )));
                }
            }
            Strategy::Conservative(f) => {
                if f.horizon() != pred.horizon() {
                    return Err(Error::ShapeMismatch { left: f.shape, right: pred.shape() });
                }
                let min = ConservativeStrategy::minimal(pred)?;
                if let Some(missing) = min.nexts().into_iter().find(|q| !f.accepts(q)) {
                    return Err(Error::InvalidStrategy(format!("a process can be stuck in state {missing}")));
                }
            }
        }
        Ok(())
    }
}

pub fn wait_for(n: usize, faults: usize) -> Result<ObliviousStrategy> {
    ObliviousStrategy::wait_for(n, faults)
}

pub fn minimal_oblivious(pred: &DeliveredPredicate) -> Result<ObliviousStrategy> {
    ObliviousStrategy::minimal(pred)
}

pub fn minimal_conservative(pred: &DeliveredPredicate) -> Result<ConservativeStrategy> {
    ConservativeStrategy::minimal(pred)
}

pub fn is_valid_oblivious(f: &ObliviousStrategy, pred: &DeliveredPredicate) -> bool {
    f.is_valid_for(pred)
}

pub fn is_valid_conservative(f: &ConservativeStrategy, pred: &DeliveredPredicate) -> bool {
    f.is_valid_for(pred)
}

pub fn oblivious_as_conservative(f: &ObliviousStrategy, horizon: usize) -> Result<ConservativeStrategy> {
    f.as_conservative(horizon)
}
