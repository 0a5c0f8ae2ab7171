#![allow(dead_code)]

use heardof::{parse_expr, PredicateExpr};

/// `total` and `crash1@r` for every round up to the horizon.
pub fn atoms(horizon: usize) -> Vec<PredicateExpr> {
    let mut out = vec![PredicateExpr::Total];
    out.extend((1..=horizon).map(PredicateExpr::Crash1At));
    out
}

/// Every expression over [`atoms`] with at most `max_ops` operator applications.
pub fn expressions(horizon: usize, max_ops: usize) -> Vec<PredicateExpr> {
    let mut by_ops: Vec<Vec<PredicateExpr>> = vec![atoms(horizon)];
    for ops in 1..=max_ops {
        let mut level: Vec<PredicateExpr> = by_ops[ops - 1].iter().map(|e| e.clone().repeated()).collect();
        for left_ops in 0..ops {
            let right_ops = ops - 1 - left_ops;
            for a in &by_ops[left_ops] {
                for b in &by_ops[right_ops] {
                    level.push(a.clone().or(b.clone()));
                    level.push(a.clone().combine(b.clone()));
                    level.push(a.clone().then(b.clone()));
                }
            }
        }
        by_ops.push(level);
    }
    by_ops.concat()
}

/// Operand pairs for the operator claims, written with the horizon as `R`.
const PAIRS: [(&str, &str); 9] = [
    ("crash(1)", "crash(1)"),
    ("crash(1)", "total"),
    ("crash1@1", "crash1@R"),
    ("crash1@1 ~> total", "crash1@1"),
    ("crash1@1 | crash1@2", "total"),
    ("total", "crash1@1^w"),
    ("crash(1)", "crash1@1 ~> total"),
    ("crash1@R", "(crash1@1 ~> total) | crash1@1"),
    ("crash1@2 ~> crash1@1", "crash1@R^w"),
];

pub struct CorpusEntry {
    pub n: usize,
    pub horizon: usize,
    pub left: PredicateExpr,
    pub right: PredicateExpr,
}

/// Operand pairs at every `n` in `{2, 3}` and horizon in `{2, 3}`.
pub fn corpus() -> Vec<CorpusEntry> {
    let mut out = Vec::new();
    for n in [2, 3] {
        for horizon in [2, 3] {
            for (left, right) in PAIRS {
                let expr = |text: &str| parse_expr(&text.replace('R', &horizon.to_string())).unwrap();
                out.push(CorpusEntry { n, horizon, left: expr(left), right: expr(right) });
            }
        }
    }
    out
}
