use heardof::analysis::{table1_row, Row};
use heardof::{
    ho_product, BoundedCollection, ConservativeState, DeliveredPredicate, LocalState, SenderSet, Shape, Strategy,
    StrategyFamily,
};
use serde_json::{json, to_value};

#[test]
fn sender_sets_and_states() {
    let s: SenderSet = [2, 0].into_iter().collect();
    assert_eq!(to_value(s).unwrap(), json!([0, 2]));
    let q = LocalState::new(2, [(1, 1), (2, 0), (1, 0)]).unwrap();
    assert_eq!(to_value(&q).unwrap(), json!({"round": 2, "mes": [[1, 0], [1, 1], [2, 0]]}));
    let c = ConservativeState::new(vec![SenderSet::full(2), SenderSet::singleton(1)]).unwrap();
    assert_eq!(to_value(&c).unwrap(), json!({"round": 2, "per_round": [[0, 1], [1]]}));
    assert!(serde_json::from_value::<ConservativeState>(json!({"round": 3, "per_round": [[0]]})).is_err());
}

#[test]
fn collections_and_predicates() {
    let shape = Shape::new(2, 1).unwrap();
    let c = BoundedCollection::from_fn(shape, |_, j| SenderSet::singleton(j)).unwrap();
    assert_eq!(to_value(c).unwrap(), json!([[[0], [1]]]));
    let p = DeliveredPredicate::from_collections(shape, [c, BoundedCollection::total(2, 1).unwrap()]).unwrap();
    let v = to_value(&p).unwrap();
    assert_eq!(v["n"], 2);
    assert_eq!(v["collections"].as_array().unwrap().len(), 2);
    let back: DeliveredPredicate = serde_json::from_value(v).unwrap();
    assert_eq!(back, p);
}

#[test]
fn strategies() {
    let p = DeliveredPredicate::crash1_at(1, 2, 1).unwrap();
    let obliv = Strategy::minimal(StrategyFamily::Oblivious, &p).unwrap();
    assert_eq!(to_value(&obliv).unwrap(), json!({"family": "oblivious", "n": 2, "nexts": [[0], [1], [0, 1]]}));
    let cons = Strategy::minimal(StrategyFamily::Conservative, &p).unwrap();
    assert_eq!(
        to_value(&cons).unwrap(),
        json!({"family": "conservative", "n": 2, "horizon": 1, "nexts_r": [
            {"round": 1, "per_round": [[0]]},
            {"round": 1, "per_round": [[1]]},
            {"round": 1, "per_round": [[0, 1]]},
        ]})
    );
}

#[test]
fn heard_of_predicates() {
    let h = ho_product([SenderSet::full(2)], 2, 1).unwrap();
    assert_eq!(
        to_value(&h).unwrap(),
        json!({
            "n": 2, "horizon": 1, "count": 1,
            "products": [{"receivers": [[[[0, 1]]], [[[0, 1]]]]}],
            "collections": [[[[0, 1], [0, 1]]]],
        })
    );
}

#[test]
fn reports() {
    let r = table1_row(Row::Crash1, 2, 1, 1, 1).unwrap();
    let v = to_value(&r).unwrap();
    assert_eq!(v["claim"], "row crash1");
    assert_eq!(v["instance"], json!({"n": 2, "horizon": 1, "operands": ["crash(1)"]}));
    assert_eq!(v["verdict"], "pass");
    assert!(v.get("witness").is_none());
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["verdict"] == "pass"));
}
