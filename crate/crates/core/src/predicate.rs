//! Delivered predicates as explicit finite sets of bounded collections, the
//! two base builders and the four composition operators.
//!
//! Every operator is evaluated at the common horizon `R` of its operands:
//! succession cuts range over `0..=R`, and repetition concatenates member
//! prefixes whose last segment may be cut short by the horizon.

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BoundedCollection, SenderSet, Shape};

/// A finite set of collections sharing one process count and horizon.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DeliveredPredicate {
    shape: Shape,
    // sorted and deduplicated packed collections
    members: Vec<u128>,
}

impl DeliveredPredicate {
    pub fn from_collections(shape: Shape, collections: impl IntoIterator<Item = BoundedCollection>) -> Result<Self> {
        let mut members = Vec::new();
        for c in collections {
            shape.ensure_same(c.shape())?;
            members.push(c.raw());
        }
        Ok(Self::from_raw(shape, members))
    }

    pub(crate) fn from_raw(shape: Shape, mut members: Vec<u128>) -> Self {
        members.sort_unstable();
        members.dedup();
        DeliveredPredicate { shape, members }
    }

    fn from_set(shape: Shape, set: FxHashSet<u128>) -> Self {
        Self::from_raw(shape, set.into_iter().collect())
    }

    /// `{c_tot}`.
    pub fn total(n: usize, horizon: usize) -> Result<Self> {
        let shape = Shape::new(n, horizon)?;
        Ok(DeliveredPredicate { shape, members: vec![shape.total_bits()] })
    }

    /// At most one crash, happening at `round`.
    ///
    /// Some set `Σ` of at least `n - 1` processes survives: rounds before
    /// `round` are total, at `round` every receiver gets a superset of `Σ`,
    /// and every later round delivers exactly `Σ` to everyone.
    pub fn crash1_at(round: usize, n: usize, horizon: usize) -> Result<Self> {
        let shape = Shape::new(n, horizon)?;
        if round == 0 || round > horizon {
            return Err(Error::CrashRoundOutOfRange { round, horizon });
        }
        let full = shape.full();
        let mut members = vec![shape.total_bits()];
        for crashed in 0..n {
            let mut survivors = full;
            survivors.remove(crashed);
            // receivers in `lucky` still get the crashed process's last message
            for lucky in SenderSet::all_subsets(n) {
                let c = BoundedCollection::from_fn(shape, |r, j| {
                    if r < round || (r == round && lucky.contains(j)) {
                        full
                    } else {
                        survivors
                    }
                })?;
                members.push(c.raw());
            }
        }
        Ok(Self::from_raw(shape, members))
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

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, c: &BoundedCollection) -> bool {
        c.shape() == self.shape && self.members.binary_search(&c.raw()).is_ok()
    }

    pub fn contains_total(&self) -> bool {
        self.members.binary_search(&self.shape.total_bits()).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = BoundedCollection> + '_ {
        self.members.iter().map(move |bits| BoundedCollection::from_raw(self.shape, *bits))
    }

    pub(crate) fn raw(&self) -> &[u128] {
        &self.members
    }

    pub fn is_subset(&self, other: &DeliveredPredicate) -> bool {
        self.shape == other.shape && self.members.iter().all(|m| other.members.binary_search(m).is_ok())
    }

    pub fn union(&self, other: &DeliveredPredicate) -> Result<Self> {
        self.shape.ensure_same(other.shape)?;
        let mut members = self.members.clone();
        members.extend_from_slice(&other.members);
        Ok(Self::from_raw(self.shape, members))
    }

    /// All pairwise round-wise intersections.
    pub fn combine(&self, other: &DeliveredPredicate) -> Result<Self> {
        self.shape.ensure_same(other.shape)?;
        let mut out = FxHashSet::default();
        for a in &self.members {
            out.extend(other.members.iter().map(|b| a & b));
        }
        Ok(Self::from_set(self.shape, out))
    }

    /// `c1[1, r] . c2` for every cut `r` in `0..=R`, truncated at the horizon.
    pub fn succession(&self, other: &DeliveredPredicate) -> Result<Self> {
        self.shape.ensure_same(other.shape)?;
        let horizon = self.shape.horizon;
        let mut out = FxHashSet::default();
        for cut in 0..=horizon {
            let heads = self.prefixes(cut);
            let tails = other.prefixes(horizon - cut);
            let shift = cut * self.shape.round_bits();
            for head in &heads {
                out.extend(tails.iter().map(|tail| head | (tail << shift)));
            }
        }
        Ok(Self::from_set(self.shape, out))
    }

    /// Concatenations of member prefixes filling rounds `1..=R`; the last
    /// segment stands for a member cut by the horizon.
    pub fn repetition(&self) -> Self {
        let horizon = self.shape.horizon;
        let round_bits = self.shape.round_bits();
        let prefixes: Vec<Vec<u128>> = (0..=horizon).map(|len| self.prefixes(len)).collect();
        let mut reach: Vec<Vec<u128>> = vec![vec![0]];
        for len in 1..=horizon {
            let mut level = FxHashSet::default();
            for segment in 1..=len {
                let shift = (len - segment) * round_bits;
                for head in &reach[len - segment] {
                    level.extend(prefixes[segment].iter().map(|tail| head | (tail << shift)));
                }
            }
            reach.push(level.into_iter().collect());
        }
        let members = reach.pop().expect("horizon >= 1");
        Self::from_raw(self.shape, members)
    }

    /// Distinct packed prefixes of length `len` (rounds `1..=len`).
    fn prefixes(&self, len: usize) -> Vec<u128> {
        let mask = self.shape.prefix_mask(len);
        let mut out: Vec<u128> = self.members.iter().map(|m| m & mask).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Packed columns of `receiver` over all members.
    pub(crate) fn columns_of(&self, receiver: usize) -> FxHashSet<u128> {
        self.members.iter().map(|m| self.shape.column_bits(*m, receiver)).collect()
    }

    /// Every in-set `c(r, p)` occurring anywhere in the predicate.
    pub fn occurring_sets(&self) -> Vec<SenderSet> {
        let mut table = SubsetTable::new(self.shape.n);
        for m in &self.members {
            for r in 1..=self.shape.horizon {
                for p in 0..self.shape.n {
                    table.insert(self.shape.slot(*m, r, p));
                }
            }
        }
        table.iter().collect()
    }

    /// Any in-set seen at some `(r, p)` is seen at every `(r', q)`.
    pub fn is_totally_symmetric(&self) -> bool {
        let n = self.shape.n;
        let mut tables = vec![SubsetTable::new(n); n * self.shape.horizon];
        for m in &self.members {
            for r in 1..=self.shape.horizon {
                for p in 0..n {
                    tables[(r - 1) * n + p].insert(self.shape.slot(*m, r, p));
                }
            }
        }
        tables.windows(2).all(|w| w[0] == w[1])
    }

    /// Any per-process history (column) of some process is also the history
    /// of every other process in some member. Checking full columns covers
    /// every prefix length.
    pub fn is_symmetric(&self) -> bool {
        let first = self.columns_of(0);
        (1..self.shape.n).all(|p| self.columns_of(p) == first)
    }

    /// Contains `c_tot`, and every in-set occurring anywhere can be delivered
    /// to all receivers at any round `r'` after total rounds `1..r'`.
    pub fn is_symmetric_up_to_round(&self) -> bool {
        if !self.contains_total() {
            return false;
        }
        let shape = self.shape;
        let occurring = SubsetTable::from_iter(shape.n, self.occurring_sets());
        (1..=shape.horizon).all(|at| {
            let before = shape.prefix_mask(at - 1);
            let total_before = shape.total_bits() & before;
            let mut uniform = SubsetTable::new(shape.n);
            for m in &self.members {
                if m & before != total_before {
                    continue;
                }
                let first = shape.slot(*m, at, 0);
                if (1..shape.n).all(|q| shape.slot(*m, at, q) == first) {
                    uniform.insert(first);
                }
            }
            occurring.is_subset(&uniform)
        })
    }
}

#[derive(Serialize, Deserialize)]
struct RawPredicate {
    n: usize,
    horizon: usize,
    collections: Vec<BoundedCollection>,
}

impl Serialize for DeliveredPredicate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut collections: Vec<BoundedCollection> = self.iter().collect();
        collections.sort_by(|a, b| a.canonical_cmp(b));
        RawPredicate { n: self.shape.n, horizon: self.shape.horizon, collections }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DeliveredPredicate {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawPredicate::deserialize(deserializer)?;
        let shape = Shape::new(raw.n, raw.horizon).map_err(serde::de::Error::custom)?;
        DeliveredPredicate::from_collections(shape, raw.collections).map_err(serde::de::Error::custom)
    }
}

/// Membership table over the `2^n` subsets of `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct SubsetTable {
    words: Vec<u64>,
}

impl SubsetTable {
    pub(crate) fn new(n: usize) -> Self {
        SubsetTable { words: vec![0; (1usize << n).div_ceil(64)] }
    }

    pub(crate) fn from_iter(n: usize, sets: impl IntoIterator<Item = SenderSet>) -> Self {
        let mut table = Self::new(n);
        for s in sets {
            table.insert(s);
        }
        table
    }

    pub(crate) fn insert(&mut self, set: SenderSet) {
        let i = set.bits() as usize;
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub(crate) fn is_subset(&self, other: &SubsetTable) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = SenderSet> + '_ {
        (0..self.words.len() * 64)
            .filter(|i| self.words[i / 64] & (1 << (i % 64)) != 0)
            .map(|i| SenderSet::from_bits(i as u32))
    }
}

pub fn make_total(n: usize, horizon: usize) -> Result<DeliveredPredicate> {
    DeliveredPredicate::total(n, horizon)
}

pub fn make_crash1_at(round: usize, n: usize, horizon: usize) -> Result<DeliveredPredicate> {
    DeliveredPredicate::crash1_at(round, n, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RoundGraph;

    fn set(ids: &[usize]) -> SenderSet {
        ids.iter().copied().collect()
    }

    fn collection(n: usize, rounds: &[&[&[usize]]]) -> BoundedCollection {
        let graphs: Vec<RoundGraph> =
            rounds.iter().map(|g| RoundGraph::new(n, g.iter().map(|s| set(s)).collect()).unwrap()).collect();
        BoundedCollection::new(n, &graphs).unwrap()
    }

    /// Straight from the definition: choose Σ, then per-receiver supersets at
    /// the crash round, nothing else free.
    fn crash1_oracle(round: usize, n: usize, horizon: usize) -> Vec<Vec<Vec<SenderSet>>> {
        let full = SenderSet::full(n);
        let mut out = Vec::new();
        for sigma in SenderSet::all_subsets(n).filter(|s| s.len() + 1 >= n) {
            let supersets: Vec<SenderSet> = SenderSet::all_subsets(n).filter(|s| sigma.is_subset(*s)).collect();
            let choices = itertools::Itertools::multi_cartesian_product((0..n).map(|_| supersets.iter().copied()));
            for at_crash in choices {
                let graphs: Vec<Vec<SenderSet>> = (1..=horizon)
                    .map(|r| {
                        (0..n)
                            .map(|j| match r.cmp(&round) {
                                std::cmp::Ordering::Less => full,
                                std::cmp::Ordering::Equal => at_crash[j],
                                std::cmp::Ordering::Greater => sigma,
                            })
                            .collect()
                    })
                    .collect();
                out.push(graphs);
            }
        }
        out.sort();
        out.dedup();
        out
    }

    #[test]
    fn total_has_one_member() {
        for (n, h) in [(1, 1), (2, 2), (3, 3), (4, 2)] {
            let p = make_total(n, h).unwrap();
            assert_eq!(p.len(), 1);
            assert!(p.contains_total());
        }
    }

    #[test]
    fn crash1_matches_enumeration() {
        assert_eq!(make_crash1_at(1, 2, 2).unwrap().len(), 9);
        for (r, n, h) in [(1, 2, 2), (2, 2, 2), (1, 3, 2), (2, 3, 3), (3, 3, 3), (1, 1, 2)] {
            let built = make_crash1_at(r, n, h).unwrap();
            let mut got: Vec<Vec<Vec<SenderSet>>> =
                built.iter().map(|c| c.rounds().iter().map(|g| g.in_sets().to_vec()).collect()).collect();
            got.sort();
            assert_eq!(got, crash1_oracle(r, n, h), "crash1@{r} n={n} R={h}");
            assert!(built.contains_total());
        }
    }

    #[test]
    fn crash1_rejects_round_outside_horizon() {
        assert!(matches!(make_crash1_at(2, 2, 1), Err(Error::CrashRoundOutOfRange { round: 2, horizon: 1 })));
        assert!(make_crash1_at(0, 2, 1).is_err());
    }

    #[test]
    fn union_laws() {
        let t = make_total(2, 2).unwrap();
        let c = make_crash1_at(1, 2, 2).unwrap();
        assert_eq!(c.union(&c).unwrap(), c);
        assert_eq!(t.union(&c).unwrap(), c);
        assert!(c.union(&make_crash1_at(2, 2, 2).unwrap()).unwrap().len() <= 9 + c.len());
        assert!(matches!(t.union(&make_total(2, 3).unwrap()), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn combine_with_total_is_identity() {
        let c = make_crash1_at(1, 3, 2).unwrap();
        assert_eq!(c.combine(&make_total(3, 2).unwrap()).unwrap(), c);
    }

    #[test]
    fn combining_two_single_crashes_silences_two_processes() {
        let c = make_crash1_at(1, 3, 2).unwrap();
        let both = c.combine(&c).unwrap();
        assert!(both.len() <= c.len() * c.len());
        // processes 0 and 1 both silent from round 2 on
        let witness = collection(3, &[&[&[2], &[2], &[2]], &[&[2], &[2], &[2]]]);
        assert!(both.contains(&witness));
        assert!(!c.contains(&witness));
    }

    #[test]
    fn succession_examples() {
        let t = make_total(2, 2).unwrap();
        let c = make_crash1_at(1, 2, 2).unwrap();
        assert_eq!(t.succession(&t).unwrap(), t);
        assert!(c.is_subset(&c.succession(&c).unwrap()));
        // crash-degraded round 1, then total again from round 2
        let recovered = collection(2, &[&[&[0], &[0, 1]], &[&[0, 1], &[0, 1]]]);
        let s = c.succession(&t).unwrap();
        assert!(s.contains(&recovered));
        assert!(!c.contains(&recovered));
    }

    #[test]
    fn repetition_examples() {
        let t = make_total(2, 2).unwrap();
        assert_eq!(t.repetition(), t);
        let c = make_crash1_at(1, 2, 2).unwrap();
        let rep = c.repetition();
        assert!(c.is_subset(&rep));
        // 1 crashes at round 1, recovers, then 0 crashes at round 2
        let crash_recover_crash = collection(2, &[&[&[0], &[0]], &[&[1], &[1]]]);
        assert!(rep.contains(&crash_recover_crash));
        assert!(!c.contains(&crash_recover_crash));
    }

    #[test]
    fn symmetry_checks() {
        let t = make_total(2, 2).unwrap();
        assert!(t.is_totally_symmetric());
        assert!(t.is_symmetric());
        assert!(t.is_symmetric_up_to_round());

        for (r, n, h) in [(1, 3, 3), (2, 3, 3), (3, 3, 3), (1, 2, 2)] {
            assert!(make_crash1_at(r, n, h).unwrap().is_symmetric(), "crash1@{r}");
        }
        // round 1 of crash1@2 is forced total, so Σ never shows up there
        assert!(!make_crash1_at(2, 3, 2).unwrap().is_totally_symmetric());
        assert!(!make_crash1_at(2, 3, 2).unwrap().is_symmetric_up_to_round());

        let any_round = make_crash1_at(1, 3, 2).unwrap().union(&make_crash1_at(2, 3, 2).unwrap()).unwrap();
        assert!(any_round.is_totally_symmetric());
        assert!(any_round.is_symmetric_up_to_round());
        assert_eq!(any_round.union(&any_round).unwrap().is_totally_symmetric(), any_round.is_totally_symmetric());

        let no_total =
            DeliveredPredicate::from_collections(t.shape(), [collection(2, &[&[&[0], &[0]], &[&[0], &[0]]])]).unwrap();
        assert!(!no_total.is_symmetric_up_to_round());
    }
}
