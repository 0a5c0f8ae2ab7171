//! Heard-of predicate generated by a strategy on a delivered predicate.
//!
//! Receivers never influence each other: a receiver's acceptance of its own
//! states and its heard-of column depend only on when its own incoming
//! messages arrive. So the heard-of set of one delivered collection `c` is
//! the product over receivers `j` of the columns reachable from `c`'s column
//! for `j`, and the columns reachable from a given delivered column are
//! computed once and shared across collections.

use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::engine::timing::TimingFunction;
use crate::error::{Error, Result};
use crate::heard_of::HeardOfPredicate;
use crate::model::{mask, Shape};
use crate::predicate::DeliveredPredicate;
use crate::strategy::Strategy;

/// `PHO_f(P)`. The strategy must be valid for the predicate.
pub fn compute_pho(f: &Strategy, pred: &DeliveredPredicate) -> Result<HeardOfPredicate> {
    f.ensure_valid_for(pred)?;
    let shape = pred.shape();
    let mut set_ids: FxHashMap<Arc<Vec<u128>>, u32> = FxHashMap::default();
    let mut sets: Vec<Arc<Vec<u128>>> = Vec::new();
    let mut by_column: FxHashMap<u128, u32> = FxHashMap::default();
    let mut keys: FxHashSet<Vec<u32>> = FxHashSet::default();
    for member in pred.raw() {
        let mut key = Vec::with_capacity(shape.n);
        for p in 0..shape.n {
            let column = shape.column_bits(*member, p);
            let id = *by_column.entry(column).or_insert_with(|| {
                let heard = Arc::new(heard_columns(f, shape, column));
                let next = sets.len() as u32;
                *set_ids.entry(heard.clone()).or_insert_with(|| {
                    sets.push(heard);
                    next
                })
            });
            key.push(id);
        }
        keys.insert(key);
    }
    // larger products first so that absorption removes as much as possible
    let mut keys: Vec<Vec<u32>> = keys.into_iter().collect();
    let size = |k: &Vec<u32>| k.iter().map(|id| sets[*id as usize].len() as u128).product::<u128>();
    keys.sort_by(|a, b| size(b).cmp(&size(a)).then_with(|| a.cmp(b)));
    let mut out = HeardOfPredicate::empty(shape);
    for key in keys {
        out.add_product(key.iter().map(|id| sets[*id as usize].clone()).collect());
    }
    Ok(out)
}

/// Heard-of columns a receiver can end up with when its delivered column is
/// `column` and it only advances from states `f` accepts.
///
/// Walks rounds `ρ = 1..=R`. Before its `ρ`-th `next` the receiver gets some
/// batch of the pending messages of rounds `≤ ρ`; the state after the batch
/// must be accepted, and the round-`ρ` part of it is `h(ρ)`. Oblivious
/// strategies never look back, so their walk forgets past rounds.
pub(crate) fn heard_columns(f: &Strategy, shape: Shape, column: u128) -> Vec<u128> {
    let n = shape.n;
    let oblivious = matches!(f, Strategy::Oblivious(_));
    // (delivered so far, heard-of prefix)
    let mut level: FxHashSet<(u128, u128)> = FxHashSet::default();
    level.insert((0, 0));
    for rho in 1..=shape.horizon {
        let round_mask = mask(n) << ((rho - 1) * n);
        let reachable = if oblivious { column & round_mask } else { column & mask(rho * n) };
        let mut next = FxHashSet::default();
        for (delivered, heard) in &level {
            let pending = reachable & !delivered;
            let mut batch = pending;
            loop {
                let now = delivered | batch;
                if accepts(f, rho, now, n) {
                    let heard = heard | (now & round_mask);
                    next.insert((if oblivious { 0 } else { now }, heard));
                }
                if batch == 0 {
                    break;
                }
                batch = (batch - 1) & pending;
            }
        }
        level = next;
    }
    let mut out: Vec<u128> = level.into_iter().map(|(_, h)| h).collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn accepts(f: &Strategy, round: usize, delivered: u128, n: usize) -> bool {
    match f {
        Strategy::Oblivious(g) => {
            let current = ((delivered >> ((round - 1) * n)) & mask(n)) as u32;
            g.nexts().contains(&crate::model::SenderSet::from_bits(current))
        }
        Strategy::Conservative(g) => g.accepts_packed(round, delivered & mask(round * n)),
    }
}

/// Largest collection count accepted by [`pho_by_timings`].
pub const TIMING_ENUMERATION_LIMIT: u128 = 2_000_000;

/// `PHO_f(P)` by listing every timing function of every member and keeping
/// the heard-of collections of those `f` accepts. Exponential; for cross-checks.
pub fn pho_by_timings(f: &Strategy, pred: &DeliveredPredicate) -> Result<HeardOfPredicate> {
    f.ensure_valid_for(pred)?;
    let shape = pred.shape();
    let mut work: u128 = 0;
    for c in pred.iter() {
        let mut timings: u128 = 1;
        for r in 1..=shape.horizon {
            for j in 0..shape.n {
                timings = timings
                    .saturating_mul(((shape.horizon - r + 2) as u128).saturating_pow(c.in_set(r, j).len() as u32));
            }
        }
        work = work.saturating_add(timings);
    }
    if work > TIMING_ENUMERATION_LIMIT {
        return Err(Error::SizeGuard(format!("{work} timing functions exceed the enumeration limit")));
    }
    let mut heard = FxHashSet::default();
    for c in pred.iter() {
        for t in TimingFunction::all_for(&c) {
            if t.is_execution_of(f) {
                heard.insert(t.heard_of());
            }
        }
    }
    HeardOfPredicate::from_collections(shape, heard)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::heard_of::ho_product;
    use crate::model::{BoundedCollection, SenderSet};
    use crate::strategy::{minimal_conservative, minimal_oblivious, wait_for, ObliviousStrategy};

    fn eval(text: &str, n: usize, horizon: usize) -> DeliveredPredicate {
        parse_expr(text).unwrap().eval(n, horizon).unwrap()
    }

    fn at_least(n: usize, size: usize) -> Vec<SenderSet> {
        SenderSet::all_subsets(n).filter(|s| s.len() >= size).collect()
    }

    #[test]
    fn total_with_full_wait_gives_total() {
        for n in 1..=3 {
            let p = DeliveredPredicate::total(n, 2).unwrap();
            let h = compute_pho(&Strategy::Oblivious(wait_for(n, 0).unwrap()), &p).unwrap();
            assert_eq!(h.len(), 1);
            assert!(h.contains(&BoundedCollection::total(n, 2).unwrap()));
        }
    }

    #[test]
    fn single_crash_gives_product() {
        let p = eval("crash(1)", 2, 2);
        let h = compute_pho(&Strategy::Oblivious(wait_for(2, 1).unwrap()), &p).unwrap();
        assert_eq!(h, ho_product(at_least(2, 1), 2, 2).unwrap());
    }

    #[test]
    fn invalid_strategy_is_reported() {
        let p = eval("crash(1)", 3, 2);
        let err = compute_pho(&Strategy::Oblivious(wait_for(3, 0).unwrap()), &p).unwrap_err();
        assert!(matches!(err, Error::InvalidStrategy(_)), "{err}");
    }

    #[test]
    fn matches_timing_enumeration() {
        for (text, n, horizon) in [
            ("crash(1)", 2, 2),
            ("crash1@1 ~> total", 2, 2),
            ("crash1@2 & crash1@1", 2, 2),
            ("crash1@1^w", 2, 2),
            ("crash1@1", 3, 1),
            ("total ~> crash1@2", 2, 3),
        ] {
            let p = eval(text, n, horizon);
            let obliv = Strategy::Oblivious(minimal_oblivious(&p).unwrap());
            let cons = Strategy::Conservative(minimal_conservative(&p).unwrap());
            for f in [obliv, cons] {
                assert_eq!(compute_pho(&f, &p).unwrap(), pho_by_timings(&f, &p).unwrap(), "{text}");
            }
        }
    }

    #[test]
    fn monotone_in_strategy() {
        let p = eval("crash1@1 | crash1@2", 3, 2);
        let small = compute_pho(&Strategy::Oblivious(minimal_oblivious(&p).unwrap()), &p).unwrap();
        let big = compute_pho(&Strategy::Oblivious(wait_for(3, 2).unwrap()), &p).unwrap();
        assert!(small.is_subset(&big));
        assert!(!big.is_subset(&small));
        let odd = ObliviousStrategy::new(
            3,
            minimal_oblivious(&p).unwrap().nexts().iter().copied().chain([SenderSet::singleton(0)]),
        )
        .unwrap();
        let mid = compute_pho(&Strategy::Oblivious(odd), &p).unwrap();
        assert!(small.is_subset(&mid) && mid.is_subset(&big));
    }

    #[test]
    fn conservative_is_at_least_as_strong() {
        let p = eval("crash1@1 ~> total", 3, 2);
        let obliv = compute_pho(&Strategy::Oblivious(minimal_oblivious(&p).unwrap()), &p).unwrap();
        let cons = compute_pho(&Strategy::Conservative(minimal_conservative(&p).unwrap()), &p).unwrap();
        assert!(cons.is_subset(&obliv));
    }
}
