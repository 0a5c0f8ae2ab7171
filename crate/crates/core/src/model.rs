//! Value types shared by every other module: sender sets, round graphs,
//! horizon-bounded collections and local states with their projections.
//!
//! A [`BoundedCollection`] is stored packed into a single `u128`: the slot for
//! `(round, receiver)` holds an `n`-bit mask of the senders delivered to that
//! receiver for that round. This caps `n * n * horizon` at 128 bits, which
//! covers every size the exhaustive computations can handle anyway.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of bits available to encode one collection.
pub const ENCODING_BITS: usize = 128;

/// A subset of the process set `0..n`, as a bitmask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SenderSet(u32);

impl SenderSet {
    pub const EMPTY: SenderSet = SenderSet(0);

    /// The whole process set `0..n`.
    pub fn full(n: usize) -> Self {
        SenderSet(mask(n) as u32)
    }

    pub fn from_bits(bits: u32) -> Self {
        SenderSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn singleton(p: usize) -> Self {
        SenderSet(1 << p)
    }

    pub fn contains(self, p: usize) -> bool {
        p < 32 && self.0 & (1 << p) != 0
    }

    pub fn insert(&mut self, p: usize) {
        self.0 |= 1 << p;
    }

    pub fn remove(&mut self, p: usize) {
        self.0 &= !(1 << p);
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: SenderSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersection(self, other: SenderSet) -> Self {
        SenderSet(self.0 & other.0)
    }

    pub fn union(self, other: SenderSet) -> Self {
        SenderSet(self.0 | other.0)
    }

    /// Largest process id plus one, or 0 for the empty set.
    pub fn bound(self) -> usize {
        32 - self.0.leading_zeros() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |p| self.contains(*p))
    }

    /// Every subset of `0..n`, in ascending bitmask order.
    pub fn all_subsets(n: usize) -> impl Iterator<Item = SenderSet> {
        (0..(1u32 << n)).map(SenderSet)
    }
}

impl FromIterator<usize> for SenderSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = SenderSet::EMPTY;
        for p in iter {
            set.insert(p);
        }
        set
    }
}

impl fmt::Display for SenderSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for SenderSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for SenderSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let ids = Vec::<usize>::deserialize(deserializer)?;
        if let Some(bad) = ids.iter().find(|p| **p >= 32) {
            return Err(serde::de::Error::custom(format!("process id {bad} out of range")));
        }
        Ok(ids.into_iter().collect())
    }
}

pub(crate) fn mask(bits: usize) -> u128 {
    if bits >= 128 {
        u128::MAX
    } else {
        (1u128 << bits) - 1
    }
}

/// Process count and horizon shared by a predicate and all of its collections.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Shape {
    pub n: usize,
    pub horizon: usize,
}

impl Shape {
    pub fn new(n: usize, horizon: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::NoProcesses);
        }
        if horizon == 0 {
            return Err(Error::ZeroHorizon);
        }
        if n * n * horizon > ENCODING_BITS {
            return Err(Error::EncodingOverflow { n, horizon });
        }
        Ok(Shape { n, horizon })
    }

    pub fn full(self) -> SenderSet {
        SenderSet::full(self.n)
    }

    pub(crate) fn check_set(self, set: SenderSet) -> Result<()> {
        if set.bound() > self.n {
            return Err(Error::ProcessOutOfRange { process: set.bound() - 1, n: self.n });
        }
        Ok(())
    }

    pub(crate) fn ensure_same(self, other: Shape) -> Result<()> {
        if self != other {
            return Err(Error::ShapeMismatch { left: self, right: other });
        }
        Ok(())
    }

    /// Bits used by one round graph.
    pub(crate) fn round_bits(self) -> usize {
        self.n * self.n
    }

    pub(crate) fn slot_offset(self, round: usize, receiver: usize) -> usize {
        ((round - 1) * self.n + receiver) * self.n
    }

    /// Mask selecting rounds `1..=len` of a packed collection.
    pub(crate) fn prefix_mask(self, len: usize) -> u128 {
        mask(len * self.round_bits())
    }

    /// Packed collection where every slot is the full process set.
    pub(crate) fn total_bits(self) -> u128 {
        mask(self.horizon * self.round_bits())
    }

    pub(crate) fn slot(self, bits: u128, round: usize, receiver: usize) -> SenderSet {
        SenderSet(((bits >> self.slot_offset(round, receiver)) & mask(self.n)) as u32)
    }

    /// Packed column of `receiver`: round `r` occupies bits `(r-1)*n .. r*n`.
    pub(crate) fn column_bits(self, bits: u128, receiver: usize) -> u128 {
        let mut column = 0u128;
        for round in 1..=self.horizon {
            let set = self.slot(bits, round, receiver).0 as u128;
            column |= set << ((round - 1) * self.n);
        }
        column
    }

    pub(crate) fn column_slot(self, column: u128, round: usize) -> SenderSet {
        SenderSet(((column >> ((round - 1) * self.n)) & mask(self.n)) as u32)
    }

    /// Rebuilds a packed collection from one packed column per receiver.
    pub(crate) fn pack_columns(self, columns: &[u128]) -> u128 {
        let mut bits = 0u128;
        for (receiver, column) in columns.iter().enumerate() {
            for round in 1..=self.horizon {
                let set = self.column_slot(*column, round).0 as u128;
                bits |= set << self.slot_offset(round, receiver);
            }
        }
        bits
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}, horizon={}", self.n, self.horizon)
    }
}

/// The delivered (or heard-of) digraph of one round: the in-set of every receiver.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RoundGraph {
    in_sets: Vec<SenderSet>,
}

impl RoundGraph {
    pub fn new(n: usize, in_sets: Vec<SenderSet>) -> Result<Self> {
        if in_sets.len() != n {
            return Err(Error::Malformed(format!("round graph has {} receivers, expected {n}", in_sets.len())));
        }
        if let Some(bad) = in_sets.iter().find(|s| s.bound() > n) {
            return Err(Error::ProcessOutOfRange { process: bad.bound() - 1, n });
        }
        Ok(RoundGraph { in_sets })
    }

    pub fn complete(n: usize) -> Self {
        RoundGraph { in_sets: vec![SenderSet::full(n); n] }
    }

    pub fn n(&self) -> usize {
        self.in_sets.len()
    }

    pub fn in_set(&self, receiver: usize) -> SenderSet {
        self.in_sets[receiver]
    }

    pub fn in_sets(&self) -> &[SenderSet] {
        &self.in_sets
    }
}

/// A collection truncated at its horizon: one [`RoundGraph`] per round `1..=horizon`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BoundedCollection {
    shape: Shape,
    bits: u128,
}

/// Heard-of collections share the representation of delivered ones.
pub type HeardOfCollection = BoundedCollection;

impl BoundedCollection {
    pub fn new(n: usize, rounds: &[RoundGraph]) -> Result<Self> {
        let shape = Shape::new(n, rounds.len())?;
        let mut bits = 0u128;
        for (i, graph) in rounds.iter().enumerate() {
            if graph.n() != n {
                return Err(Error::Malformed(format!("round {} has {} receivers, expected {n}", i + 1, graph.n())));
            }
            for (receiver, set) in graph.in_sets().iter().enumerate() {
                shape.check_set(*set)?;
                bits |= (set.bits() as u128) << shape.slot_offset(i + 1, receiver);
            }
        }
        Ok(BoundedCollection { shape, bits })
    }

    /// Builds a collection from `in_set(round, receiver)` for every slot.
    pub fn from_fn(shape: Shape, mut in_set: impl FnMut(usize, usize) -> SenderSet) -> Result<Self> {
        let mut bits = 0u128;
        for round in 1..=shape.horizon {
            for receiver in 0..shape.n {
                let set = in_set(round, receiver);
                shape.check_set(set)?;
                bits |= (set.bits() as u128) << shape.slot_offset(round, receiver);
            }
        }
        Ok(BoundedCollection { shape, bits })
    }

    /// The collection delivering every message of every round.
    pub fn total(n: usize, horizon: usize) -> Result<Self> {
        let shape = Shape::new(n, horizon)?;
        Ok(BoundedCollection { shape, bits: shape.total_bits() })
    }

    pub(crate) fn from_raw(shape: Shape, bits: u128) -> Self {
        BoundedCollection { shape, bits }
    }

    pub(crate) fn raw(&self) -> u128 {
        self.bits
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn n(&self) -> usize {
        self.shape.n
    }

    pub fn horizon(&self) -> usize {
        self.shape.horizon
    }

    /// `c(round, receiver)`, with `round` in `1..=horizon`.
    pub fn in_set(&self, round: usize, receiver: usize) -> SenderSet {
        assert!(round >= 1 && round <= self.shape.horizon, "round {round} outside horizon");
        assert!(receiver < self.shape.n, "receiver {receiver} out of range");
        self.shape.slot(self.bits, round, receiver)
    }

    pub fn round(&self, round: usize) -> RoundGraph {
        RoundGraph { in_sets: (0..self.shape.n).map(|p| self.in_set(round, p)).collect() }
    }

    fn round_in_sets(&self, round: usize) -> Vec<SenderSet> {
        (0..self.shape.n).map(|p| self.in_set(round, p)).collect()
    }

    pub fn rounds(&self) -> Vec<RoundGraph> {
        (1..=self.shape.horizon).map(|r| self.round(r)).collect()
    }

    /// The sequence `c(1, receiver), .., c(horizon, receiver)`.
    pub fn column(&self, receiver: usize) -> Vec<SenderSet> {
        (1..=self.shape.horizon).map(|r| self.in_set(r, receiver)).collect()
    }

    pub fn is_total(&self) -> bool {
        self.bits == self.shape.total_bits()
    }

    /// Round-wise intersection of two collections of the same shape.
    pub fn combine(&self, other: &BoundedCollection) -> Result<Self> {
        self.shape.ensure_same(other.shape)?;
        Ok(BoundedCollection { shape: self.shape, bits: self.bits & other.bits })
    }

    /// Is `other` included slot-wise in `self`?
    pub fn includes(&self, other: &BoundedCollection) -> bool {
        self.shape == other.shape && other.bits & !self.bits == 0
    }

    /// Canonical ordering used by every textual and JSON output: slot by slot,
    /// round-major then receiver, comparing sender masks.
    pub fn canonical_cmp(&self, other: &BoundedCollection) -> std::cmp::Ordering {
        let key = |c: &BoundedCollection| {
            (1..=c.shape.horizon)
                .flat_map(move |r| (0..c.shape.n).map(move |p| c.in_set(r, p).bits()))
                .collect::<Vec<_>>()
        };
        (self.shape.n, self.shape.horizon, key(self)).cmp(&(other.shape.n, other.shape.horizon, key(other)))
    }
}

impl fmt::Display for BoundedCollection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 1..=self.shape.horizon {
            if r > 1 {
                write!(f, " ")?;
            }
            write!(f, "r{r}:")?;
            for p in 0..self.shape.n {
                if p > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.in_set(r, p))?;
            }
        }
        write!(f, "]")
    }
}

impl Serialize for BoundedCollection {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rounds: Vec<Vec<SenderSet>> = (1..=self.shape.horizon).map(|r| self.round_in_sets(r)).collect();
        rounds.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BoundedCollection {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rounds = Vec::<Vec<SenderSet>>::deserialize(deserializer)?;
        let n = rounds.first().map_or(0, Vec::len);
        let graphs = rounds
            .into_iter()
            .map(|in_sets| RoundGraph::new(n, in_sets))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        BoundedCollection::new(n, &graphs).map_err(serde::de::Error::custom)
    }
}

/// The total collection `c_tot` truncated at `horizon`.
pub fn total_collection(n: usize, horizon: usize) -> Result<BoundedCollection> {
    BoundedCollection::total(n, horizon)
}

/// A message, identified by the round it was sent for and its sender.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Message {
    pub round: usize,
    pub sender: usize,
}

/// A process's round together with every message it has received.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "RawLocalState", try_from = "RawLocalState")]
pub struct LocalState {
    round: usize,
    mes: BTreeSet<Message>,
}

#[derive(Serialize, Deserialize)]
struct RawLocalState {
    round: usize,
    mes: Vec<(usize, usize)>,
}

impl From<LocalState> for RawLocalState {
    fn from(q: LocalState) -> Self {
        RawLocalState { round: q.round, mes: q.mes.iter().map(|m| (m.round, m.sender)).collect() }
    }
}

impl TryFrom<RawLocalState> for LocalState {
    type Error = Error;

    fn try_from(raw: RawLocalState) -> Result<Self> {
        LocalState::new(raw.round, raw.mes)
    }
}

impl LocalState {
    pub fn new(round: usize, mes: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if round == 0 {
            return Err(Error::Malformed("local state round must be positive".into()));
        }
        let mes: BTreeSet<Message> = mes.into_iter().map(|(round, sender)| Message { round, sender }).collect();
        if mes.iter().any(|m| m.round == 0) {
            return Err(Error::Malformed("message round must be positive".into()));
        }
        if mes.iter().any(|m| m.sender >= 32) {
            return Err(Error::Malformed("message sender out of range".into()));
        }
        Ok(LocalState { round, mes })
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn messages(&self) -> &BTreeSet<Message> {
        &self.mes
    }

    /// `q(i)`: the senders of received messages for round `i`.
    pub fn senders_at(&self, round: usize) -> SenderSet {
        self.mes.iter().filter(|m| m.round == round).map(|m| m.sender).collect()
    }

    fn max_message_round(&self) -> usize {
        self.mes.iter().map(|m| m.round).max().unwrap_or(0)
    }

    /// Only the messages of the current round.
    pub fn obliv(&self) -> ObliviousState {
        ObliviousState(self.senders_at(self.round))
    }

    /// The round number and every message from rounds up to it.
    pub fn cons(&self) -> ConservativeState {
        ConservativeState { per_round: (1..=self.round).map(|r| self.senders_at(r)).collect() }
    }

    /// Round-wise intersection of two states at the same round.
    pub fn combine(&self, other: &LocalState) -> Result<LocalState> {
        if self.round != other.round {
            return Err(Error::RoundMismatch { left: self.round, right: other.round });
        }
        let mes = self.mes.intersection(&other.mes).copied().collect();
        Ok(LocalState { round: self.round, mes })
    }

    /// `self` for rounds up to `self.round`, then `other` shifted by `self.round`.
    pub fn succeed(&self, other: &LocalState) -> LocalState {
        let shift = self.round;
        let mut mes: BTreeSet<Message> = self.mes.iter().filter(|m| m.round <= shift).copied().collect();
        mes.extend(other.mes.iter().map(|m| Message { round: m.round + shift, sender: m.sender }));
        LocalState { round: self.round + other.round, mes }
    }

    /// Per-round sender sets for rounds `1..=max(round, last message round)`.
    pub fn per_round(&self) -> Vec<SenderSet> {
        let last = self.round.max(self.max_message_round());
        (1..=last).map(|r| self.senders_at(r)).collect()
    }
}

impl fmt::Display for LocalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {{", self.round)?;
        for (i, m) in self.mes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "({},{})", m.round, m.sender)?;
        }
        write!(f, "}}>")
    }
}

pub fn obliv_projection(q: &LocalState) -> ObliviousState {
    q.obliv()
}

pub fn cons_projection(q: &LocalState) -> ConservativeState {
    q.cons()
}

pub fn state_combine(q1: &LocalState, q2: &LocalState) -> Result<LocalState> {
    q1.combine(q2)
}

pub fn state_succeed(q1: &LocalState, q2: &LocalState) -> LocalState {
    q1.succeed(q2)
}

/// Projection of a local state on the messages of its current round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObliviousState(pub SenderSet);

impl ObliviousState {
    pub fn senders(self) -> SenderSet {
        self.0
    }
}

/// Projection of a local state on its round and the messages of rounds up to it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "RawConservativeState", try_from = "RawConservativeState")]
pub struct ConservativeState {
    per_round: Vec<SenderSet>,
}

#[derive(Serialize, Deserialize)]
struct RawConservativeState {
    round: usize,
    per_round: Vec<SenderSet>,
}

impl From<ConservativeState> for RawConservativeState {
    fn from(q: ConservativeState) -> Self {
        RawConservativeState { round: q.round(), per_round: q.per_round }
    }
}

impl TryFrom<RawConservativeState> for ConservativeState {
    type Error = Error;

    fn try_from(raw: RawConservativeState) -> Result<Self> {
        if raw.per_round.len() != raw.round {
            return Err(Error::Malformed(format!(
                "conservative state at round {} lists {} rounds",
                raw.round,
                raw.per_round.len()
            )));
        }
        ConservativeState::new(raw.per_round)
    }
}

impl ConservativeState {
    pub fn new(per_round: Vec<SenderSet>) -> Result<Self> {
        if per_round.is_empty() {
            return Err(Error::Malformed("conservative state needs at least one round".into()));
        }
        Ok(ConservativeState { per_round })
    }

    pub fn round(&self) -> usize {
        self.per_round.len()
    }

    pub fn per_round(&self) -> &[SenderSet] {
        &self.per_round
    }

    /// Sender set of `round`, 1-based.
    pub fn at(&self, round: usize) -> SenderSet {
        self.per_round[round - 1]
    }

    pub fn current(&self) -> SenderSet {
        *self.per_round.last().expect("non-empty")
    }

    /// Concatenation: the state-level succession restricted to past and present rounds.
    pub fn succeed(&self, other: &ConservativeState) -> ConservativeState {
        let mut per_round = self.per_round.clone();
        per_round.extend_from_slice(&other.per_round);
        ConservativeState { per_round }
    }

    pub fn combine(&self, other: &ConservativeState) -> Result<ConservativeState> {
        if self.round() != other.round() {
            return Err(Error::RoundMismatch { left: self.round(), right: other.round() });
        }
        let per_round = self.per_round.iter().zip(&other.per_round).map(|(a, b)| a.intersection(*b)).collect();
        Ok(ConservativeState { per_round })
    }

    /// Any local state with this projection.
    pub fn to_local_state(&self) -> LocalState {
        let mes = self
            .per_round
            .iter()
            .enumerate()
            .flat_map(|(i, set)| set.iter().map(move |k| Message { round: i + 1, sender: k }))
            .collect();
        LocalState { round: self.round(), mes }
    }

    pub(crate) fn pack(&self, n: usize) -> u128 {
        pack_prefix(&self.per_round, n)
    }

    pub(crate) fn unpack(round: usize, bits: u128, n: usize) -> Self {
        let per_round = (0..round).map(|i| SenderSet(((bits >> (i * n)) & mask(n)) as u32)).collect();
        ConservativeState { per_round }
    }
}

pub(crate) fn pack_prefix(sets: &[SenderSet], n: usize) -> u128 {
    sets.iter().enumerate().fold(0u128, |acc, (i, s)| acc | (s.bits() as u128) << (i * n))
}

impl fmt::Display for ConservativeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, [", self.round())?;
        for (i, s) in self.per_round.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "]>")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[usize]) -> SenderSet {
        ids.iter().copied().collect()
    }

    fn state(round: usize, mes: &[(usize, usize)]) -> LocalState {
        LocalState::new(round, mes.iter().copied()).unwrap()
    }

    #[test]
    fn total_collection_is_complete() {
        let c = total_collection(2, 1).unwrap();
        assert_eq!(c.rounds(), vec![RoundGraph::new(2, vec![set(&[0, 1]), set(&[0, 1])]).unwrap()]);

        let c = total_collection(1, 3).unwrap();
        assert!((1..=3).all(|r| c.in_set(r, 0) == set(&[0])));

        let c = total_collection(3, 2).unwrap();
        assert!(c.rounds().iter().all(|g| *g == RoundGraph::complete(3)));
        assert!(c.is_total());
    }

    #[test]
    fn total_collection_rejects_empty_shapes() {
        assert!(matches!(total_collection(0, 2), Err(Error::NoProcesses)));
        assert!(matches!(total_collection(2, 0), Err(Error::ZeroHorizon)));
        assert!(matches!(total_collection(5, 6), Err(Error::EncodingOverflow { .. })));
    }

    #[test]
    fn obliv_keeps_current_round_only() {
        assert_eq!(state(2, &[(1, 0), (2, 1)]).obliv(), ObliviousState(set(&[1])));
        assert_eq!(state(1, &[]).obliv(), ObliviousState(SenderSet::EMPTY));
        assert_eq!(state(3, &[(3, 0), (3, 2), (1, 1)]).obliv(), ObliviousState(set(&[0, 2])));
    }

    #[test]
    fn cons_drops_future_rounds() {
        assert_eq!(state(2, &[(1, 0), (3, 1)]).cons().per_round(), &[set(&[0]), SenderSet::EMPTY]);
        assert_eq!(state(1, &[]).cons().per_round(), &[SenderSet::EMPTY]);
        assert_eq!(state(2, &[(1, 0), (1, 1), (2, 1)]).cons().per_round(), &[set(&[0, 1]), set(&[1])]);
    }

    #[test]
    fn combine_intersects_per_round() {
        let q1 = state(1, &[(1, 0), (1, 1)]);
        let q2 = state(1, &[(1, 1)]);
        assert_eq!(q1.combine(&q2).unwrap(), state(1, &[(1, 1)]));
        assert_eq!(q1.combine(&q1).unwrap(), q1);
        assert_eq!(state(2, &[(1, 0)]).combine(&state(2, &[(2, 0)])).unwrap(), state(2, &[]));
        assert!(matches!(q1.combine(&state(2, &[])), Err(Error::RoundMismatch { left: 1, right: 2 })));
    }

    #[test]
    fn succeed_concatenates() {
        assert_eq!(state(1, &[(1, 0)]).succeed(&state(1, &[(1, 1)])), state(2, &[(1, 0), (2, 1)]));
        assert_eq!(state(1, &[]).succeed(&state(1, &[(1, 0)])), state(2, &[(2, 0)]));
        assert_eq!(state(2, &[(1, 0), (2, 1)]).succeed(&state(1, &[(1, 0)])), state(3, &[(1, 0), (2, 1), (3, 0)]));
        // messages of q1 from beyond its round are replaced by q2's
        assert_eq!(state(1, &[(2, 0)]).succeed(&state(1, &[])), state(2, &[]));
    }

    #[test]
    fn collection_round_trips_through_graphs() {
        let g1 = RoundGraph::new(3, vec![set(&[0]), set(&[0, 1, 2]), SenderSet::EMPTY]).unwrap();
        let g2 = RoundGraph::new(3, vec![set(&[2]), set(&[1]), set(&[0, 2])]).unwrap();
        let c = BoundedCollection::new(3, &[g1.clone(), g2.clone()]).unwrap();
        assert_eq!(c.rounds(), vec![g1, g2]);
        assert_eq!(c.column(2), vec![SenderSet::EMPTY, set(&[0, 2])]);
        let shape = c.shape();
        let columns: Vec<u128> = (0..3).map(|p| shape.column_bits(c.raw(), p)).collect();
        assert_eq!(shape.pack_columns(&columns), c.raw());
    }

    #[test]
    fn round_graph_rejects_bad_sender() {
        assert!(RoundGraph::new(2, vec![set(&[2]), SenderSet::EMPTY]).is_err());
        assert!(RoundGraph::new(2, vec![SenderSet::EMPTY]).is_err());
    }
}
