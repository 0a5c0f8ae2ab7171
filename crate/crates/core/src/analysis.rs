//! Executable checks of the characterization results on finite instances,
//! and of the crash/recovery rows, with structured reports.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::engine::compute_pho;
use crate::error::{Error, Result};
use crate::expr::{Family, PredicateExpr};
use crate::heard_of::{ho_product, HeardOfPredicate};
use crate::model::{BoundedCollection, ConservativeState, SenderSet};
use crate::predicate::DeliveredPredicate;
use crate::strategy::{ConservativeStrategy, ObliviousStrategy, Strategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

/// A counterexample attached to a failed check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Witness {
    Collection(BoundedCollection),
    SenderSet(SenderSet),
    State(ConservativeState),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Collection(c) => write!(f, "{c}"),
            Witness::SenderSet(s) => write!(f, "{s}"),
            Witness::State(q) => write!(f, "{q}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl Check {
    fn pass(name: impl Into<String>) -> Self {
        Check { name: name.into(), verdict: Verdict::Pass, detail: None, witness: None }
    }

    fn fail(name: impl Into<String>, detail: impl Into<String>, witness: Option<Witness>) -> Self {
        Check { name: name.into(), verdict: Verdict::Fail, detail: Some(detail.into()), witness }
    }

    fn skipped(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Check { name: name.into(), verdict: Verdict::NotApplicable, detail: Some(reason.into()), witness: None }
    }

    fn from_witness(name: impl Into<String>, what: &str, witness: Option<Witness>) -> Self {
        match witness {
            None => Check::pass(name),
            Some(w) => Check::fail(name, format!("{what}: {w}"), Some(w)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Instance {
    pub n: usize,
    pub horizon: usize,
    pub operands: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub claim: String,
    pub instance: Instance,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub checks: Vec<Check>,
}

impl Report {
    /// Fails if any check fails; not applicable if no check applied.
    fn new(claim: impl Into<String>, instance: Instance, checks: Vec<Check>) -> Self {
        let failed = checks.iter().find(|c| c.verdict == Verdict::Fail);
        let verdict = if failed.is_some() {
            Verdict::Fail
        } else if checks.iter().all(|c| c.verdict == Verdict::NotApplicable) {
            Verdict::NotApplicable
        } else {
            Verdict::Pass
        };
        let witness = failed.and_then(|c| c.witness.clone());
        Report { claim: claim.into(), instance, verdict, witness, checks }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = match self.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::NotApplicable => "not applicable",
        };
        writeln!(f, "{}: {verdict}", self.claim)?;
        writeln!(
            f,
            "  n={} horizon={} operands: {}",
            self.instance.n,
            self.instance.horizon,
            self.instance.operands.join(" ; ")
        )?;
        for c in &self.checks {
            let mark = match c.verdict {
                Verdict::Pass => "ok  ",
                Verdict::Fail => "FAIL",
                Verdict::NotApplicable => "n/a ",
            };
            write!(f, "  [{mark}] {}", c.name)?;
            if let Some(d) = &c.detail {
                write!(f, " ({d})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// `f` dominates `g` on `pred` when `f` generates fewer heard-of collections.
pub fn dominates(f: &Strategy, g: &Strategy, pred: &DeliveredPredicate) -> Result<bool> {
    Ok(compute_pho(f, pred)?.is_subset(&compute_pho(g, pred)?))
}

fn set_difference_witness(a: &ObliviousStrategy, b: &ObliviousStrategy) -> Option<Witness> {
    a.nexts().symmetric_difference(b.nexts()).next().map(|s| Witness::SenderSet(*s))
}

fn state_difference_witness(a: &ConservativeStrategy, b: &ConservativeStrategy) -> Option<Witness> {
    let only_a = a.nexts().into_iter().find(|q| !b.accepts(q));
    only_a.or_else(|| b.nexts().into_iter().find(|q| !a.accepts(q))).map(Witness::State)
}

fn same_strategy(name: &str, a: &ObliviousStrategy, b: &ObliviousStrategy) -> Check {
    Check::from_witness(name, "state accepted by only one side", set_difference_witness(a, b))
}

fn same_conservative(name: &str, a: &ConservativeStrategy, b: &ConservativeStrategy) -> Check {
    Check::from_witness(name, "state accepted by only one side", state_difference_witness(a, b))
}

fn same_ho(name: &str, a: &HeardOfPredicate, b: &HeardOfPredicate) -> Check {
    Check::from_witness(name, "collection in only one side", a.difference_witness(b).map(Witness::Collection))
}

fn included_ho(name: &str, a: &HeardOfPredicate, b: &HeardOfPredicate) -> Check {
    Check::from_witness(name, "collection outside the bound", a.missing_from(b).map(Witness::Collection))
}

/// Runs `check` on `PHO_f(pred)`, turning an invalid strategy into a failure.
fn with_pho(
    name: &str,
    f: &Strategy,
    pred: &DeliveredPredicate,
    check: impl FnOnce(HeardOfPredicate) -> Check,
) -> Result<Check> {
    match compute_pho(f, pred) {
        Ok(h) => Ok(check(h)),
        Err(Error::InvalidStrategy(why)) => Ok(Check::fail(name, format!("strategy not valid: {why}"), None)),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Theorem {
    /// `PHO_f(P) = HOProd(Nexts_f)` for valid oblivious `f` when `c_tot ∈ P`.
    ObliviousHoProduct,
    /// Minimal oblivious strategy of a union or succession is the union of the minimal ones.
    ObliviousUnionSuccession,
    /// Repetition keeps the minimal oblivious strategy.
    ObliviousRepetition,
    /// Minimal oblivious strategy of a combination of totally symmetric predicates.
    ObliviousCombination,
    /// Heard-of predicates of the combined minimal oblivious strategies.
    ObliviousHeardOf,
    /// Total collection plus symmetry up to a round survive all operators.
    SymmetryClosure,
    ConservativeUnion,
    ConservativeCombination,
    ConservativeSuccession,
    ConservativeRepetition,
    /// Heard-of predicates of combined minimal conservative strategies are
    /// bounded by products of the oblivious ones.
    ConservativeUpperBounds,
    /// Minimal strategies dominate the other valid strategies of their family.
    MinimalDomination,
}

impl Theorem {
    pub const ALL: [Theorem; 12] = [
        Theorem::ObliviousHoProduct,
        Theorem::ObliviousUnionSuccession,
        Theorem::ObliviousRepetition,
        Theorem::ObliviousCombination,
        Theorem::ObliviousHeardOf,
        Theorem::SymmetryClosure,
        Theorem::ConservativeUnion,
        Theorem::ConservativeCombination,
        Theorem::ConservativeSuccession,
        Theorem::ConservativeRepetition,
        Theorem::ConservativeUpperBounds,
        Theorem::MinimalDomination,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::ObliviousHoProduct => "oblivious-ho-product",
            Theorem::ObliviousUnionSuccession => "oblivious-union-succession",
            Theorem::ObliviousRepetition => "oblivious-repetition",
            Theorem::ObliviousCombination => "oblivious-combination",
            Theorem::ObliviousHeardOf => "oblivious-heard-of",
            Theorem::SymmetryClosure => "symmetry-closure",
            Theorem::ConservativeUnion => "conservative-union",
            Theorem::ConservativeCombination => "conservative-combination",
            Theorem::ConservativeSuccession => "conservative-succession",
            Theorem::ConservativeRepetition => "conservative-repetition",
            Theorem::ConservativeUpperBounds => "conservative-upper-bounds",
            Theorem::MinimalDomination => "minimal-domination",
        }
    }

    /// Does the claim talk about two operands?
    pub fn is_binary(self) -> bool {
        !matches!(
            self,
            Theorem::ObliviousHoProduct
                | Theorem::ObliviousRepetition
                | Theorem::ConservativeRepetition
                | Theorem::MinimalDomination
        )
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Theorem::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Theorem::ALL.iter().map(|t| t.name()).collect();
            Error::Malformed(format!("unknown claim '{s}', expected one of: {}", names.join(", ")))
        })
    }
}

/// Operands of a claim, evaluated at `n` processes and horizon `horizon`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoremInstance {
    pub n: usize,
    pub horizon: usize,
    pub left: PredicateExpr,
    pub right: Option<PredicateExpr>,
}

struct Operands {
    p1: DeliveredPredicate,
    p2: DeliveredPredicate,
}

impl Operands {
    fn load(theorem: Theorem, inst: &TheoremInstance) -> Result<Self> {
        let p1 = inst.left.eval(inst.n, inst.horizon)?;
        let p2 = match (&inst.right, theorem.is_binary()) {
            (Some(e), _) => e.eval(inst.n, inst.horizon)?,
            (None, false) => p1.clone(),
            (None, true) => return Err(Error::Malformed(format!("{theorem} needs two operands"))),
        };
        if p1.is_empty() || p2.is_empty() {
            return Err(Error::EmptyPredicate);
        }
        Ok(Operands { p1, p2 })
    }
}

fn instance_of(theorem: Theorem, inst: &TheoremInstance) -> Instance {
    let mut operands = vec![inst.left.to_string()];
    if theorem.is_binary() {
        operands.extend(inst.right.as_ref().map(|e| e.to_string()));
    }
    Instance { n: inst.n, horizon: inst.horizon, operands }
}

pub fn verify_theorem(theorem: Theorem, inst: &TheoremInstance) -> Result<Report> {
    let Operands { p1, p2 } = Operands::load(theorem, inst)?;
    let checks = match theorem {
        Theorem::ObliviousHoProduct => oblivious_ho_product(&p1)?,
        Theorem::ObliviousUnionSuccession => {
            let joined = ObliviousStrategy::minimal(&p1)?.union(&ObliviousStrategy::minimal(&p2)?)?;
            vec![
                same_strategy("union", &ObliviousStrategy::minimal(&p1.union(&p2)?)?, &joined),
                same_strategy("succession", &ObliviousStrategy::minimal(&p1.succession(&p2)?)?, &joined),
            ]
        }
        Theorem::ObliviousRepetition => {
            vec![same_strategy(
                "repetition",
                &ObliviousStrategy::minimal(&p1.repetition())?,
                &ObliviousStrategy::minimal(&p1)?,
            )]
        }
        Theorem::ObliviousCombination => {
            let combined = ObliviousStrategy::minimal(&p1)?.combine(&ObliviousStrategy::minimal(&p2)?)?;
            let actual = ObliviousStrategy::minimal(&p1.combine(&p2)?)?;
            let validity = Check::from_witness(
                "combined strategy is valid",
                "state missing from the combined strategy",
                actual.nexts().iter().find(|s| !combined.nexts().contains(s)).map(|s| Witness::SenderSet(*s)),
            );
            let equality = if p1.is_totally_symmetric() && p2.is_totally_symmetric() {
                same_strategy("combination", &actual, &combined)
            } else {
                Check::skipped("combination", "an operand is not totally symmetric")
            };
            vec![validity, equality]
        }
        Theorem::ObliviousHeardOf => oblivious_heard_of(&p1, &p2)?,
        Theorem::SymmetryClosure => symmetry_closure(&p1, &p2)?,
        Theorem::ConservativeUnion => {
            let joined = ConservativeStrategy::minimal(&p1)?.union(&ConservativeStrategy::minimal(&p2)?)?;
            vec![same_conservative("union", &ConservativeStrategy::minimal(&p1.union(&p2)?)?, &joined)]
        }
        Theorem::ConservativeCombination => {
            let (f1, f2) = (ConservativeStrategy::minimal(&p1)?, ConservativeStrategy::minimal(&p2)?);
            conservative_operator(
                "combination",
                &p1.combine(&p2)?,
                &f1.combine(&f2)?,
                p1.is_symmetric() && p2.is_symmetric(),
            )?
        }
        Theorem::ConservativeSuccession => {
            let (f1, f2) = (ConservativeStrategy::minimal(&p1)?, ConservativeStrategy::minimal(&p2)?);
            conservative_operator(
                "succession",
                &p1.succession(&p2)?,
                &f1.succeed(&f2)?,
                p1.is_symmetric() && p2.is_symmetric(),
            )?
        }
        Theorem::ConservativeRepetition => {
            let f = ConservativeStrategy::minimal(&p1)?;
            conservative_operator("repetition", &p1.repetition(), &f.repeat(), p1.is_symmetric())?
        }
        Theorem::ConservativeUpperBounds => conservative_upper_bounds(&p1, &p2)?,
        Theorem::MinimalDomination => minimal_domination(&p1)?,
    };
    Ok(Report::new(theorem.name(), instance_of(theorem, inst), checks))
}

fn oblivious_ho_product(p: &DeliveredPredicate) -> Result<Vec<Check>> {
    if !p.contains_total() {
        return Ok(vec![Check::skipped("minimal strategy", "predicate lacks the total collection")]);
    }
    let min = ObliviousStrategy::minimal(p)?;
    let everything = ObliviousStrategy::new(p.n(), SenderSet::all_subsets(p.n()))?;
    let mut checks = Vec::new();
    for (name, f) in [("minimal strategy", min), ("accept-all strategy", everything)] {
        let product = ho_product(f.nexts().iter().copied(), p.n(), p.horizon())?;
        checks.push(with_pho(name, &Strategy::Oblivious(f), p, |h| same_ho(name, &h, &product))?);
    }
    Ok(checks)
}

fn oblivious_heard_of(p1: &DeliveredPredicate, p2: &DeliveredPredicate) -> Result<Vec<Check>> {
    if !p1.contains_total() || !p2.contains_total() {
        return Ok(vec![Check::skipped("all bullets", "an operand lacks the total collection")]);
    }
    let (n, horizon) = (p1.n(), p1.horizon());
    let (f1, f2) = (ObliviousStrategy::minimal(p1)?, ObliviousStrategy::minimal(p2)?);
    let joined = f1.union(&f2)?;
    let joined_product = ho_product(joined.nexts().iter().copied(), n, horizon)?;
    let joined = Strategy::Oblivious(joined);
    let mut checks = vec![
        with_pho("union", &joined, &p1.union(p2)?, |h| same_ho("union", &h, &joined_product))?,
        with_pho("succession", &joined, &p1.succession(p2)?, |h| same_ho("succession", &h, &joined_product))?,
    ];
    if p1.is_totally_symmetric() || p2.is_totally_symmetric() {
        let combined = f1.combine(&f2)?;
        let product = ho_product(combined.nexts().iter().copied(), n, horizon)?;
        checks.push(with_pho("combination", &Strategy::Oblivious(combined), &p1.combine(p2)?, |h| {
            same_ho("combination", &h, &product)
        })?);
    } else {
        checks.push(Check::skipped("combination", "neither operand is totally symmetric"));
    }
    let f1 = Strategy::Oblivious(f1);
    let plain = compute_pho(&f1, p1)?;
    checks.push(with_pho("repetition", &f1, &p1.repetition(), |h| same_ho("repetition", &h, &plain))?);
    Ok(checks)
}

fn satisfies_closure_conditions(p: &DeliveredPredicate) -> bool {
    p.contains_total() && p.is_symmetric_up_to_round()
}

fn symmetry_closure(p1: &DeliveredPredicate, p2: &DeliveredPredicate) -> Result<Vec<Check>> {
    if !satisfies_closure_conditions(p1) || !satisfies_closure_conditions(p2) {
        return Ok(vec![Check::skipped(
            "all operators",
            "an operand lacks the total collection or symmetry up to a round",
        )]);
    }
    let results = [
        ("union", p1.union(p2)?),
        ("combination", p1.combine(p2)?),
        ("succession", p1.succession(p2)?),
        ("repetition of the first operand", p1.repetition()),
        ("repetition of the second operand", p2.repetition()),
    ];
    let mut checks = Vec::new();
    for (name, p) in &results {
        checks.push(if satisfies_closure_conditions(p) {
            Check::pass(*name)
        } else {
            Check::fail(*name, "result lost the total collection or symmetry up to a round", None)
        });
    }
    for (name, p) in &results {
        let obliv = compute_pho(&Strategy::minimal(crate::strategy::StrategyFamily::Oblivious, p)?, p)?;
        let cons = compute_pho(&Strategy::minimal(crate::strategy::StrategyFamily::Conservative, p)?, p)?;
        let check_name = format!("{name}: minimal oblivious strategy dominates minimal conservative one");
        checks.push(included_ho(&check_name, &obliv, &cons));
    }
    Ok(checks)
}

/// Equality of the minimal conservative strategy of `result` with the
/// combined strategy when `symmetric`; validity of the latter always.
fn conservative_operator(
    name: &str,
    result: &DeliveredPredicate,
    combined: &ConservativeStrategy,
    symmetric: bool,
) -> Result<Vec<Check>> {
    let actual = ConservativeStrategy::minimal(result)?;
    let validity = Check::from_witness(
        format!("{name}: combined strategy is valid"),
        "state missing from the combined strategy",
        actual.nexts().into_iter().find(|q| !combined.accepts(q)).map(Witness::State),
    );
    let equality = if symmetric {
        same_conservative(name, &actual, combined)
    } else {
        Check::skipped(name, "an operand is not symmetric")
    };
    Ok(vec![validity, equality])
}

fn conservative_upper_bounds(p1: &DeliveredPredicate, p2: &DeliveredPredicate) -> Result<Vec<Check>> {
    if !p1.contains_total() || !p2.contains_total() {
        return Ok(vec![Check::skipped("all bullets", "an operand lacks the total collection")]);
    }
    let (n, horizon) = (p1.n(), p1.horizon());
    let (o1, o2) = (ObliviousStrategy::minimal(p1)?, ObliviousStrategy::minimal(p2)?);
    let (c1, c2) = (ConservativeStrategy::minimal(p1)?, ConservativeStrategy::minimal(p2)?);
    let joined = ho_product(o1.union(&o2)?.nexts().iter().copied(), n, horizon)?;
    let combined = ho_product(o1.combine(&o2)?.nexts().iter().copied(), n, horizon)?;
    let single = ho_product(o1.nexts().iter().copied(), n, horizon)?;
    let cases = [
        ("union", Strategy::Conservative(c1.union(&c2)?), p1.union(p2)?, &joined),
        ("succession", Strategy::Conservative(c1.succeed(&c2)?), p1.succession(p2)?, &joined),
        ("combination", Strategy::Conservative(c1.combine(&c2)?), p1.combine(p2)?, &combined),
        ("repetition", Strategy::Conservative(c1.repeat()), p1.repetition(), &single),
    ];
    cases.iter().map(|(name, f, p, bound)| with_pho(name, f, p, |h| included_ho(name, &h, bound))).collect()
}

fn minimal_domination(p: &DeliveredPredicate) -> Result<Vec<Check>> {
    let n = p.n();
    let min = ObliviousStrategy::minimal(p)?;
    let min_pho = compute_pho(&Strategy::Oblivious(min.clone()), p)?;
    let mut checks = Vec::new();
    // every oblivious strategy adding one set to the minimal one, plus accept-all
    let mut others: Vec<ObliviousStrategy> = SenderSet::all_subsets(n)
        .filter(|s| !min.nexts().contains(s))
        .map(|s| ObliviousStrategy::new(n, min.nexts().iter().copied().chain([s])))
        .collect::<Result<_>>()?;
    others.push(ObliviousStrategy::new(n, SenderSet::all_subsets(n))?);
    for f in others {
        let h = compute_pho(&Strategy::Oblivious(f.clone()), p)?;
        let name = format!("minimal oblivious dominates {} oblivious sets", f.nexts().len());
        checks.push(included_ho(&name, &min_pho, &h));
    }
    let cons = ConservativeStrategy::minimal(p)?;
    let cons_pho = compute_pho(&Strategy::Conservative(cons), p)?;
    let lifted = min.as_conservative(p.horizon())?;
    let lifted_pho = compute_pho(&Strategy::Conservative(lifted), p)?;
    checks.push(same_ho("lifted minimal oblivious behaves like it", &lifted_pho, &min_pho));
    checks.push(included_ho("minimal conservative dominates lifted minimal oblivious", &cons_pho, &lifted_pho));
    Ok(checks)
}

/// Rows of the crash/recovery table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Row {
    Crash1,
    CrashF,
    Recover1,
    RecoverF,
    CanRecover1,
    CanRecoverF,
    Recovery1,
    RecoveryF,
    Crash1After,
    CrashFAfter,
    CrashFDistinct,
}

impl Row {
    pub const ALL: [Row; 11] = [
        Row::Crash1,
        Row::CrashF,
        Row::Recover1,
        Row::RecoverF,
        Row::CanRecover1,
        Row::CanRecoverF,
        Row::Recovery1,
        Row::RecoveryF,
        Row::Crash1After,
        Row::CrashFAfter,
        Row::CrashFDistinct,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Row::Crash1 => "crash1",
            Row::CrashF => "crashF",
            Row::Recover1 => "recover1",
            Row::RecoverF => "recoverF",
            Row::CanRecover1 => "canrecover1",
            Row::CanRecoverF => "canrecoverF",
            Row::Recovery1 => "recovery1",
            Row::RecoveryF => "recoveryF",
            Row::Crash1After => "crash1-after",
            Row::CrashFAfter => "crashF-after",
            Row::CrashFDistinct => "crashF-distinct",
        }
    }

    /// Rows whose heard-of predicate is only bounded from above.
    pub fn is_inclusion(self) -> bool {
        matches!(self, Row::Crash1After | Row::CrashFAfter | Row::CrashFDistinct)
    }

    /// Number of crashes the row tolerates given the `faults` parameter.
    pub fn crashes(self, faults: usize) -> usize {
        match self {
            Row::Crash1 | Row::Recover1 | Row::CanRecover1 | Row::Recovery1 | Row::Crash1After => 1,
            _ => faults,
        }
    }

    pub fn expr(self, faults: usize, round: usize) -> PredicateExpr {
        let faults = self.crashes(faults);
        PredicateExpr::Family(match self {
            Row::Crash1 | Row::CrashF => Family::Crash { faults },
            Row::Recover1 | Row::RecoverF => Family::Recover { faults },
            Row::CanRecover1 | Row::CanRecoverF => Family::CanRecover { faults },
            Row::Recovery1 | Row::RecoveryF => Family::Recovery { faults },
            Row::Crash1After | Row::CrashFAfter => Family::CrashAfter { faults, round },
            Row::CrashFDistinct => Family::CrashDistinct { faults },
        })
    }
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Row {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Row::ALL.into_iter().find(|r| r.id() == s).ok_or_else(|| {
            let ids: Vec<&str> = Row::ALL.iter().map(|r| r.id()).collect();
            Error::Malformed(format!("unknown row '{s}', expected one of: {}", ids.join(", ")))
        })
    }
}

/// Builds the row's predicate and compares the generated heard-of predicate
/// with `HOProd({T : |T| >= n - F})`: equality for the oblivious rows,
/// inclusion for the others.
pub fn table1_row(row: Row, n: usize, horizon: usize, faults: usize, round: usize) -> Result<Report> {
    let crashes = row.crashes(faults);
    if crashes >= n {
        return Err(Error::TooManyFaults { faults: crashes, n });
    }
    let expr = row.expr(faults, round);
    let p = expr.eval(n, horizon)?;
    let bound = ho_product(SenderSet::all_subsets(n).filter(|s| s.len() + crashes >= n), n, horizon)?;
    let cons = Strategy::minimal(crate::strategy::StrategyFamily::Conservative, &p)?;
    let mut checks = Vec::new();
    if row.is_inclusion() {
        checks.push(with_pho("minimal conservative strategy within bound", &cons, &p, |h| {
            included_ho("minimal conservative strategy within bound", &h, &bound)
        })?);
    } else {
        let min = ObliviousStrategy::minimal(&p)?;
        checks.push(same_strategy(
            "minimal oblivious strategy waits for n - F",
            &min,
            &ObliviousStrategy::wait_for(n, crashes)?,
        ));
        let min = Strategy::Oblivious(min);
        checks.push(with_pho("minimal oblivious strategy", &min, &p, |h| {
            same_ho("minimal oblivious strategy", &h, &bound)
        })?);
        checks.push(with_pho("minimal conservative strategy", &cons, &p, |h| {
            same_ho("minimal conservative strategy", &h, &bound)
        })?);
    }
    let claim = format!("row {}", row.id());
    Ok(Report::new(claim, Instance { n, horizon, operands: vec![expr.to_string()] }, checks))
}
