mod common;

use heardof::analysis::dominates;
use heardof::engine::{compute_pho, standard_execution, DeliveryTime, TimingFunction};
use heardof::strategy::{minimal_conservative, minimal_oblivious};
use heardof::{
    ho_product, BoundedCollection, DeliveredPredicate, HeardOfPredicate, LocalState, ObliviousStrategy, SenderSet,
    Shape, Strategy,
};
use proptest::prelude::*;
use proptest::strategy::Strategy as _;

fn shape() -> impl proptest::strategy::Strategy<Value = Shape> {
    (1usize..=3, 1usize..=2).prop_map(|(n, horizon)| Shape::new(n, horizon).unwrap())
}

fn collection(shape: Shape) -> impl proptest::strategy::Strategy<Value = BoundedCollection> {
    proptest::collection::vec(0u32..(1 << shape.n), shape.n * shape.horizon).prop_map(move |sets| {
        BoundedCollection::from_fn(shape, |r, j| SenderSet::from_bits(sets[(r - 1) * shape.n + j])).unwrap()
    })
}

fn predicate_in(shape: Shape) -> impl proptest::strategy::Strategy<Value = DeliveredPredicate> {
    proptest::collection::vec(collection(shape), 1..6)
        .prop_map(move |cs| DeliveredPredicate::from_collections(shape, cs).unwrap())
}

fn predicate() -> impl proptest::strategy::Strategy<Value = DeliveredPredicate> {
    shape().prop_flat_map(predicate_in)
}

fn predicate_triple(
) -> impl proptest::strategy::Strategy<Value = (DeliveredPredicate, DeliveredPredicate, DeliveredPredicate)> {
    shape().prop_flat_map(|s| (predicate_in(s), predicate_in(s), predicate_in(s)))
}

fn local_state(n: usize, round: usize) -> impl proptest::strategy::Strategy<Value = LocalState> {
    proptest::collection::vec(any::<bool>(), n * (round + 1)).prop_map(move |bits| {
        let mes = bits.into_iter().enumerate().filter(|(_, b)| *b).map(|(i, _)| (i / n + 1, i % n));
        LocalState::new(round, mes).unwrap()
    })
}

fn timing() -> impl proptest::strategy::Strategy<Value = TimingFunction> {
    (shape(), 1usize..=3)
        .prop_map(|(s, horizon)| Shape::new(s.n, horizon).unwrap())
        .prop_flat_map(|s| (Just(s), proptest::collection::vec(any::<u8>(), s.n * s.n * s.horizon)))
        .prop_map(|(s, choices)| {
            TimingFunction::new(s, |r, k, j| {
                let choice = choices[((r - 1) * s.n + k) * s.n + j] as usize % (s.horizon - r + 3);
                match choice {
                    0 => DeliveryTime::Never,
                    c if c == s.horizon - r + 2 => DeliveryTime::AfterHorizon,
                    c => DeliveryTime::At(r + c - 1),
                }
            })
            .unwrap()
        })
}

/// A valid oblivious strategy for `p`: the minimal one plus the sets in `extra`.
fn widened(p: &DeliveredPredicate, extra: u32) -> ObliviousStrategy {
    let n = p.n();
    let min = minimal_oblivious(p).unwrap();
    let added = SenderSet::all_subsets(n).filter(|s| extra & (1 << s.bits()) != 0);
    ObliviousStrategy::new(n, min.nexts().iter().copied().chain(added)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn state_combination_laws(q in (1usize..=3, 1usize..=3).prop_flat_map(|(n, r)| (local_state(n, r), local_state(n, r), local_state(n, r)))) {
        let (a, b, c) = q;
        prop_assert_eq!(a.combine(&b).unwrap(), b.combine(&a).unwrap());
        prop_assert_eq!(a.combine(&a).unwrap(), a.clone());
        prop_assert_eq!(a.combine(&b).unwrap().combine(&c).unwrap(), a.combine(&b.combine(&c).unwrap()).unwrap());
        let ab = a.combine(&b).unwrap();
        prop_assert_eq!(ab.cons(), a.cons().combine(&b.cons()).unwrap());
        prop_assert_eq!(ab.obliv().senders(), a.obliv().senders().intersection(b.obliv().senders()));
    }

    #[test]
    fn state_succession_laws(q in (1usize..=3, 1usize..=3, 1usize..=3).prop_flat_map(|(n, r1, r2)| (local_state(n, r1), local_state(n, r2)))) {
        let (a, b) = q;
        let ab = a.succeed(&b);
        prop_assert_eq!(ab.round(), a.round() + b.round());
        prop_assert_eq!(ab.cons(), a.cons().succeed(&b.cons()));
        prop_assert_eq!(ab.obliv(), b.obliv());
    }

    #[test]
    fn projections_round_trip(q in (1usize..=3, 1usize..=3).prop_flat_map(|(n, r)| local_state(n, r))) {
        let cons = q.cons();
        prop_assert_eq!(cons.round(), q.round());
        prop_assert_eq!(cons.current(), q.obliv().senders());
        prop_assert_eq!(cons.to_local_state().cons(), cons);
    }

    #[test]
    fn union_and_combination_laws((a, b, c) in predicate_triple()) {
        prop_assert_eq!(a.union(&b).unwrap(), b.union(&a).unwrap());
        prop_assert_eq!(a.union(&a).unwrap(), a.clone());
        prop_assert_eq!(a.union(&b).unwrap().union(&c).unwrap(), a.union(&b.union(&c).unwrap()).unwrap());
        prop_assert_eq!(a.combine(&b).unwrap(), b.combine(&a).unwrap());
        prop_assert_eq!(a.combine(&b).unwrap().combine(&c).unwrap(), a.combine(&b.combine(&c).unwrap()).unwrap());
        let total = DeliveredPredicate::total(a.n(), a.horizon()).unwrap();
        prop_assert_eq!(a.combine(&total).unwrap(), a.clone());
        prop_assert!(a.is_subset(&a.union(&b).unwrap()));
    }

    #[test]
    fn succession_and_repetition_laws((a, b, _) in predicate_triple()) {
        let rep = a.repetition();
        prop_assert!(a.is_subset(&rep));
        prop_assert_eq!(rep.repetition(), rep.clone());
        prop_assert!(a.succession(&a).unwrap().is_subset(&rep));
        // the horizon cut at R keeps the whole left operand
        prop_assert!(a.is_subset(&a.succession(&b).unwrap()));
        prop_assert!(b.is_subset(&a.succession(&b).unwrap()));
    }

    #[test]
    fn minimal_strategies_are_valid_and_least(p in predicate(), extra in any::<u32>()) {
        let obliv = minimal_oblivious(&p).unwrap();
        prop_assert!(obliv.is_valid_for(&p));
        prop_assert!(obliv.is_subset(&widened(&p, extra)));
        let cons = minimal_conservative(&p).unwrap();
        prop_assert!(cons.is_valid_for(&p));
        prop_assert!(cons.is_subset(&obliv.as_conservative(p.horizon()).unwrap()));
    }

    #[test]
    fn heard_of_is_monotone_in_the_strategy(p in predicate(), small in any::<u32>(), more in any::<u32>()) {
        let f = Strategy::Oblivious(widened(&p, small));
        let g = Strategy::Oblivious(widened(&p, small | more));
        let min = Strategy::Oblivious(minimal_oblivious(&p).unwrap());
        prop_assert!(dominates(&f, &g, &p).unwrap());
        prop_assert!(dominates(&min, &f, &p).unwrap());
        prop_assert!(dominates(&f, &f, &p).unwrap());
        let cons = Strategy::Conservative(minimal_conservative(&p).unwrap());
        prop_assert!(dominates(&cons, &min, &p).unwrap());
    }

    #[test]
    fn heard_of_stays_within_strategy_product(p in predicate()) {
        let f = minimal_oblivious(&p).unwrap();
        let bound = ho_product(f.nexts().iter().copied(), p.n(), p.horizon()).unwrap();
        let pho = compute_pho(&Strategy::Oblivious(f), &p).unwrap();
        prop_assert!(pho.is_subset(&bound));
        if p.contains_total() {
            prop_assert_eq!(pho, bound);
        }
    }

    #[test]
    fn product_counts_and_union(s in shape(), g1 in 1u32..256, g2 in 1u32..256) {
        let sets = |g: u32| -> Vec<SenderSet> {
            SenderSet::all_subsets(s.n).filter(|t| g & (1 << t.bits()) != 0).collect()
        };
        let (s1, s2) = (sets(g1), sets(g2));
        prop_assume!(!s1.is_empty() && !s2.is_empty());
        let h1 = ho_product(s1.clone(), s.n, s.horizon).unwrap();
        let h2 = ho_product(s2.clone(), s.n, s.horizon).unwrap();
        prop_assert_eq!(h1.len(), (s1.len() as u128).pow((s.n * s.horizon) as u32));
        let both = ho_product(s1.iter().chain(&s2).copied(), s.n, s.horizon).unwrap();
        prop_assert!(h1.union(&h2).unwrap().is_subset(&both));
        prop_assert_eq!(h1.iter().count() as u128, h1.len());
    }

    #[test]
    fn heard_of_collections_listed_match_len(p in predicate()) {
        let h = compute_pho(&Strategy::Conservative(minimal_conservative(&p).unwrap()), &p).unwrap();
        let listed: Vec<BoundedCollection> = h.iter().collect();
        prop_assert_eq!(listed.len() as u128, h.len());
        let rebuilt = HeardOfPredicate::from_collections(p.shape(), listed).unwrap();
        prop_assert_eq!(rebuilt, h);
    }

    #[test]
    fn json_round_trips(p in predicate()) {
        let text = serde_json::to_string(&p).unwrap();
        prop_assert_eq!(serde_json::from_str::<DeliveredPredicate>(&text).unwrap(), p.clone());
        let obliv = minimal_oblivious(&p).unwrap();
        let text = serde_json::to_string(&Strategy::Oblivious(obliv.clone())).unwrap();
        prop_assert_eq!(serde_json::from_str::<Strategy>(&text).unwrap(), Strategy::Oblivious(obliv));
        let cons = Strategy::Conservative(minimal_conservative(&p).unwrap());
        let text = serde_json::to_string(&cons).unwrap();
        prop_assert_eq!(serde_json::from_str::<Strategy>(&text).unwrap(), cons.clone());
        let h = compute_pho(&cons, &p).unwrap();
        let text = serde_json::to_string(&h).unwrap();
        prop_assert_eq!(serde_json::from_str::<HeardOfPredicate>(&text).unwrap(), h);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn standard_executions_follow_the_rules(t in timing()) {
        let exec = standard_execution(&t);
        prop_assert_eq!(exec.check_rules(), Ok(()));
        prop_assert_eq!(exec.timing().unwrap(), t.clone());
        let heard = t.heard_of();
        prop_assert!(t.collection().includes(&heard));
        prop_assert_eq!(exec.heard_of().unwrap(), heard);
    }
}

#[test]
fn corpus_is_large_enough() {
    assert!(common::corpus().len() >= 20);
    // 3 atoms, 30 with one operator, 570 with two
    assert_eq!(common::expressions(2, 2).len(), 603);
}
