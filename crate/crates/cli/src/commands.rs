use std::error::Error as StdError;
use std::fmt::Write as _;
use std::fs;
use std::process::ExitCode;

use heardof::analysis::{table1_row, verify_theorem, Report, Row, Theorem, TheoremInstance, Verdict};
use heardof::engine::{brute_force_pho, compute_pho, standard_execution, Execution, TimingFunction};
use heardof::heard_of::JSON_LISTING_LIMIT;
use heardof::{
    parse_expr, BoundedCollection, DeliveredPredicate, HeardOfPredicate, PredicateExpr, SenderSet, Shape, Strategy,
};
use serde::Serialize;

use crate::{BuildArgs, CheckArgs, Common, HeardOfArgs, StrategyArgs, TableArgs, TraceArgs};

type Outcome = Result<ExitCode, Box<dyn StdError>>;

pub const MAX_N: usize = 4;
pub const MAX_HORIZON: usize = 4;

fn guard(c: &Common) -> Result<(), Box<dyn StdError>> {
    if c.force {
        return Ok(());
    }
    if c.n > MAX_N {
        return Err(format!("n = {} exceeds the default limit {MAX_N}; pass --force to go on anyway", c.n).into());
    }
    if c.horizon > MAX_HORIZON {
        return Err(format!(
            "horizon {} exceeds the default limit {MAX_HORIZON}; pass --force to go on anyway",
            c.horizon
        )
        .into());
    }
    Ok(())
}

fn parse(text: &str) -> Result<PredicateExpr, Box<dyn StdError>> {
    parse_expr(text).map_err(|e| format!("in '{text}': {e}").into())
}

fn evaluate(c: &Common, text: &str) -> Result<(PredicateExpr, DeliveredPredicate), Box<dyn StdError>> {
    guard(c)?;
    let expr = parse(text)?;
    let pred = expr.eval(c.n, c.horizon)?;
    Ok((expr, pred))
}

fn emit(c: &Common, text: String) -> Result<(), Box<dyn StdError>> {
    match &c.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_json(c: &Common, value: &impl Serialize) -> Result<(), Box<dyn StdError>> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(c, text)
}

fn listing_limit(force: bool) -> u128 {
    if force {
        u128::MAX
    } else {
        JSON_LISTING_LIMIT
    }
}

#[derive(Serialize)]
struct PredicateSummary<'a> {
    expr: String,
    n: usize,
    horizon: usize,
    count: usize,
    contains_total: bool,
    totally_symmetric: bool,
    symmetric: bool,
    symmetric_up_to_round: bool,
    occurring_sets: Vec<SenderSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    predicate: Option<&'a DeliveredPredicate>,
}

pub fn build(a: &BuildArgs) -> Outcome {
    let (expr, pred) = evaluate(&a.common, &a.expr)?;
    let listed = a.explicit || pred.len() as u128 <= JSON_LISTING_LIMIT;
    let summary = PredicateSummary {
        expr: expr.to_string(),
        n: pred.n(),
        horizon: pred.horizon(),
        count: pred.len(),
        contains_total: pred.contains_total(),
        totally_symmetric: pred.is_totally_symmetric(),
        symmetric: pred.is_symmetric(),
        symmetric_up_to_round: pred.is_symmetric_up_to_round(),
        occurring_sets: pred.occurring_sets(),
        predicate: listed.then_some(&pred),
    };
    if a.common.json {
        emit_json(&a.common, &summary)?;
        return Ok(ExitCode::SUCCESS);
    }
    let mut out = String::new();
    writeln!(out, "{} at n={} horizon={}", summary.expr, summary.n, summary.horizon)?;
    writeln!(out, "collections: {}", summary.count)?;
    writeln!(out, "contains the total collection: {}", summary.contains_total)?;
    writeln!(out, "totally symmetric: {}", summary.totally_symmetric)?;
    writeln!(out, "symmetric: {}", summary.symmetric)?;
    writeln!(out, "symmetric up to a round: {}", summary.symmetric_up_to_round)?;
    writeln!(out, "occurring sets: {}", join(&summary.occurring_sets))?;
    if a.explicit {
        for c in pred.iter() {
            writeln!(out, "{c}")?;
        }
    }
    emit(&a.common, out)?;
    Ok(ExitCode::SUCCESS)
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

fn describe_strategy(f: &Strategy) -> String {
    let mut out = String::new();
    match f {
        Strategy::Oblivious(g) => {
            let sets: Vec<SenderSet> = g.nexts().iter().copied().collect();
            let _ = writeln!(out, "oblivious strategy, {} accepted sets: {}", sets.len(), join(&sets));
        }
        Strategy::Conservative(g) => {
            let _ = writeln!(out, "conservative strategy, {} accepted states:", g.len());
            for q in g.nexts() {
                let _ = writeln!(out, "  {q}");
            }
        }
    }
    out
}

#[derive(Serialize)]
struct StrategyOutput<'a> {
    expr: String,
    n: usize,
    horizon: usize,
    strategy: &'a Strategy,
}

pub fn min_strategy(a: &StrategyArgs) -> Outcome {
    let (expr, pred) = evaluate(&a.common, &a.expr)?;
    let f = Strategy::minimal(a.family.into(), &pred)?;
    if a.common.json {
        emit_json(
            &a.common,
            &StrategyOutput { expr: expr.to_string(), n: pred.n(), horizon: pred.horizon(), strategy: &f },
        )?;
    } else {
        emit(&a.common, describe_strategy(&f))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn strategy_for(a: &HeardOfArgs, pred: &DeliveredPredicate) -> Result<Strategy, Box<dyn StdError>> {
    match (&a.strategy, a.family) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
            let f: Strategy =
                serde_json::from_str(&text).map_err(|e| format!("strategy file {}: {e}", path.display()))?;
            Ok(f)
        }
        (None, Some(family)) => Ok(Strategy::minimal(family.into(), pred)?),
        (None, None) => Err("give either --family or --strategy".into()),
    }
}

#[derive(Serialize)]
struct HeardOfOutput<'a> {
    expr: String,
    strategy: &'a Strategy,
    heard_of: &'a HeardOfPredicate,
}

pub fn compute_ho(a: &HeardOfArgs) -> Outcome {
    let (expr, pred) = evaluate(&a.common, &a.expr)?;
    let f = strategy_for(a, &pred)?;
    let h = compute_pho(&f, &pred)?;
    if a.common.json {
        emit_json(&a.common, &HeardOfOutput { expr: expr.to_string(), strategy: &f, heard_of: &h })?;
        return Ok(ExitCode::SUCCESS);
    }
    let mut out = String::new();
    writeln!(out, "{expr} at n={} horizon={}", pred.n(), pred.horizon())?;
    out.push_str(&describe_strategy(&f));
    writeln!(out, "heard-of collections: {} in {} products", h.len(), h.product_count())?;
    if a.explicit {
        for c in h.to_sorted_vec(listing_limit(a.common.force))? {
            writeln!(out, "{c}")?;
        }
    }
    emit(&a.common, out)?;
    Ok(ExitCode::SUCCESS)
}

fn report_exit(r: &Report) -> ExitCode {
    if r.verdict == Verdict::Fail {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn emit_report(c: &Common, r: &Report) -> Outcome {
    if c.json {
        emit_json(c, r)?;
    } else {
        emit(c, r.to_string())?;
    }
    Ok(report_exit(r))
}

pub fn check(a: &CheckArgs) -> Outcome {
    guard(&a.common)?;
    let theorem: Theorem = a.theorem.parse()?;
    let inst = TheoremInstance {
        n: a.common.n,
        horizon: a.common.horizon,
        left: parse(&a.expr)?,
        right: a.expr2.as_deref().map(parse).transpose()?,
    };
    emit_report(&a.common, &verify_theorem(theorem, &inst)?)
}

pub fn table1(a: &TableArgs) -> Outcome {
    guard(&a.common)?;
    let row: Row = a.row.parse()?;
    emit_report(&a.common, &table1_row(row, a.common.n, a.common.horizon, a.faults, a.round)?)
}

#[derive(Serialize)]
struct OracleOutput<'a> {
    expr: String,
    strategy: &'a Strategy,
    agree: bool,
    oracle_count: u128,
    computed_count: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<BoundedCollection>,
}

pub fn oracle(a: &HeardOfArgs) -> Outcome {
    let (expr, pred) = evaluate(&a.common, &a.expr)?;
    let f = strategy_for(a, &pred)?;
    let slow = brute_force_pho(&f, &pred)?;
    let fast = compute_pho(&f, &pred)?;
    let witness = slow.difference_witness(&fast);
    let out = OracleOutput {
        expr: expr.to_string(),
        strategy: &f,
        agree: witness.is_none(),
        oracle_count: slow.len(),
        computed_count: fast.len(),
        witness,
    };
    if a.common.json {
        emit_json(&a.common, &out)?;
    } else {
        let mut text = format!("oracle: {} collections, computed: {}\n", out.oracle_count, out.computed_count);
        match &out.witness {
            None => text.push_str("agree\n"),
            Some(w) => writeln!(text, "DISAGREE on {w}")?,
        }
        emit(&a.common, text)?;
    }
    Ok(if out.agree { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[derive(Serialize)]
struct TraceOutput {
    transitions: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    violation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    heard_of: Option<BoundedCollection>,
}

pub fn trace(a: &TraceArgs) -> Outcome {
    guard(&a.common)?;
    let exec = match (&a.expr, &a.file) {
        (Some(text), _) => {
            let (_, pred) = evaluate(&a.common, text)?;
            let c = pred
                .iter()
                .nth(a.member)
                .ok_or_else(|| format!("member {} requested, the predicate has {}", a.member, pred.len()))?;
            standard_execution(&TimingFunction::immediate(&c))
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
            Execution::parse(Shape::new(a.common.n, a.common.horizon)?, &text)?
        }
        (None, None) => return Err("give either --expr or --file".into()),
    };
    let violation = exec.check_rules().err();
    let heard_of = if violation.is_none() { Some(exec.heard_of()?) } else { None };
    let out = TraceOutput {
        transitions: exec.transitions().iter().map(|t| t.to_string()).collect(),
        violation: violation.as_ref().map(|v| v.to_string()),
        heard_of,
    };
    if a.common.json {
        emit_json(&a.common, &out)?;
    } else {
        let mut text = exec.to_text();
        match (&out.violation, &out.heard_of) {
            (Some(v), _) => writeln!(text, "# rule broken: {v}")?,
            (None, Some(h)) => writeln!(text, "# heard-of: {h}")?,
            (None, None) => {}
        }
        emit(&a.common, text)?;
    }
    Ok(if violation.is_some() { ExitCode::from(1) } else { ExitCode::SUCCESS })
}
