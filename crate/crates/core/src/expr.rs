//! Predicate expressions: a small infix language over the two atoms and the
//! four operators, plus named families that expand at evaluation time.
//!
//! ```text
//! expr    := succ ('|' succ)*
//! succ    := comb ('~>' comb)*
//! comb    := post ('&' post)*
//! post    := primary ('^w')*
//! primary := 'total' | 'crash1' '@' NUM | family '(' NUM (',' NUM)? ')' | '(' expr ')'
//! ```

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::error::{Error, Result};
use crate::predicate::DeliveredPredicate;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("parse error at offset {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

/// Named families standing for the crash/recovery rows. `faults` is the
/// number of combined single-crash components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// `crash(F)`: up to F crashes at any round.
    Crash { faults: usize },
    /// `recover(F)`: crashes that later restart.
    Recover { faults: usize },
    /// `canrecover(F)`: crashes that may or may not restart.
    CanRecover { faults: usize },
    /// `recovery(F)`: crashes and restarts repeating forever.
    Recovery { faults: usize },
    /// `crash_after(F, r)`: F crashes, all at one round no earlier than `r`.
    CrashAfter { faults: usize, round: usize },
    /// `crash_distinct(F)`: F crashes at pairwise distinct rounds.
    CrashDistinct { faults: usize },
}

impl Family {
    fn name(&self) -> &'static str {
        match self {
            Family::Crash { .. } => "crash",
            Family::Recover { .. } => "recover",
            Family::CanRecover { .. } => "canrecover",
            Family::Recovery { .. } => "recovery",
            Family::CrashAfter { .. } => "crash_after",
            Family::CrashDistinct { .. } => "crash_distinct",
        }
    }

    fn faults(&self) -> usize {
        match *self {
            Family::Crash { faults }
            | Family::Recover { faults }
            | Family::CanRecover { faults }
            | Family::Recovery { faults }
            | Family::CrashAfter { faults, .. }
            | Family::CrashDistinct { faults } => faults,
        }
    }

    fn check_faults(&self) -> Result<()> {
        if self.faults() == 0 {
            return Err(Error::Malformed(format!("{}: fault count must be at least 1", self.name())));
        }
        Ok(())
    }

    /// The family as a core expression at horizon `horizon`.
    pub fn expand(&self, horizon: usize) -> Result<PredicateExpr> {
        self.check_faults()?;
        let faults = self.faults();
        let crash1 = || any_round(1..=horizon);
        let combined = |e: PredicateExpr| fold(vec![e; faults], PredicateExpr::combine);
        Ok(match *self {
            Family::Crash { .. } => combined(crash1()),
            Family::Recover { .. } => combined(crash1().then(PredicateExpr::Total)),
            Family::CanRecover { .. } => combined(crash1().then(PredicateExpr::Total).or(crash1())),
            Family::Recovery { .. } => combined(crash1().repeated()),
            Family::CrashAfter { round, .. } => {
                if round == 0 || round > horizon {
                    return Err(Error::CrashRoundOutOfRange { round, horizon });
                }
                fold((round..=horizon).map(|i| combined(PredicateExpr::Crash1At(i))).collect(), PredicateExpr::or)
            }
            Family::CrashDistinct { .. } => {
                if faults > horizon {
                    return Err(Error::Malformed(format!(
                        "crash_distinct({faults}) needs at least {faults} rounds, horizon is {horizon}"
                    )));
                }
                let tuples = distinct_tuples(faults, horizon);
                fold(
                    tuples
                        .into_iter()
                        .map(|t| fold(t.into_iter().map(PredicateExpr::Crash1At).collect(), PredicateExpr::combine))
                        .collect(),
                    PredicateExpr::or,
                )
            }
        })
    }
}

fn any_round(rounds: std::ops::RangeInclusive<usize>) -> PredicateExpr {
    fold(rounds.map(PredicateExpr::Crash1At).collect(), PredicateExpr::or)
}

fn fold(items: Vec<PredicateExpr>, op: impl Fn(PredicateExpr, PredicateExpr) -> PredicateExpr) -> PredicateExpr {
    let mut items = items.into_iter();
    let first = items.next().expect("at least one operand");
    items.fold(first, op)
}

/// Tuples of `len` pairwise distinct rounds in `1..=horizon`.
fn distinct_tuples(len: usize, horizon: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    (1..=horizon).permutations(len).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PredicateExpr {
    Total,
    Crash1At(usize),
    Union(Box<PredicateExpr>, Box<PredicateExpr>),
    Combine(Box<PredicateExpr>, Box<PredicateExpr>),
    Succession(Box<PredicateExpr>, Box<PredicateExpr>),
    Repetition(Box<PredicateExpr>),
    Family(Family),
}

impl PredicateExpr {
    pub fn or(self, other: PredicateExpr) -> Self {
        PredicateExpr::Union(Box::new(self), Box::new(other))
    }

    pub fn combine(self, other: PredicateExpr) -> Self {
        PredicateExpr::Combine(Box::new(self), Box::new(other))
    }

    pub fn then(self, other: PredicateExpr) -> Self {
        PredicateExpr::Succession(Box::new(self), Box::new(other))
    }

    pub fn repeated(self) -> Self {
        PredicateExpr::Repetition(Box::new(self))
    }

    /// Number of operator nodes written in the expression; families count as atoms.
    pub fn operator_count(&self) -> usize {
        match self {
            PredicateExpr::Total | PredicateExpr::Crash1At(_) | PredicateExpr::Family(_) => 0,
            PredicateExpr::Repetition(e) => 1 + e.operator_count(),
            PredicateExpr::Union(a, b) | PredicateExpr::Combine(a, b) | PredicateExpr::Succession(a, b) => {
                1 + a.operator_count() + b.operator_count()
            }
        }
    }

    pub fn eval(&self, n: usize, horizon: usize) -> Result<DeliveredPredicate> {
        match self {
            PredicateExpr::Total => DeliveredPredicate::total(n, horizon),
            PredicateExpr::Crash1At(r) => DeliveredPredicate::crash1_at(*r, n, horizon),
            PredicateExpr::Union(a, b) => a.eval(n, horizon)?.union(&b.eval(n, horizon)?),
            PredicateExpr::Combine(a, b) => a.eval(n, horizon)?.combine(&b.eval(n, horizon)?),
            PredicateExpr::Succession(a, b) => a.eval(n, horizon)?.succession(&b.eval(n, horizon)?),
            PredicateExpr::Repetition(a) => Ok(a.eval(n, horizon)?.repetition()),
            PredicateExpr::Family(family) => eval_family(*family, n, horizon),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            PredicateExpr::Union(..) => 1,
            PredicateExpr::Succession(..) => 2,
            PredicateExpr::Combine(..) => 3,
            PredicateExpr::Repetition(..) => 4,
            _ => 5,
        }
    }

    fn fmt_operand(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

/// Evaluates a family sharing the repeated operand instead of rebuilding it
/// for every combined copy.
fn eval_family(family: Family, n: usize, horizon: usize) -> Result<DeliveredPredicate> {
    family.check_faults()?;
    let faults = family.faults();
    let base = match family {
        Family::Crash { .. } => any_round(1..=horizon),
        Family::Recover { .. } => any_round(1..=horizon).then(PredicateExpr::Total),
        Family::CanRecover { .. } => any_round(1..=horizon).then(PredicateExpr::Total).or(any_round(1..=horizon)),
        Family::Recovery { .. } => any_round(1..=horizon).repeated(),
        Family::CrashAfter { .. } | Family::CrashDistinct { .. } => return family.expand(horizon)?.eval(n, horizon),
    };
    let one = base.eval(n, horizon)?;
    let mut acc = one.clone();
    for _ in 1..faults {
        acc = acc.combine(&one)?;
    }
    Ok(acc)
}

impl fmt::Display for PredicateExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredicateExpr::Total => write!(f, "total"),
            PredicateExpr::Crash1At(r) => write!(f, "crash1@{r}"),
            PredicateExpr::Family(Family::CrashAfter { faults, round }) => write!(f, "crash_after({faults},{round})"),
            PredicateExpr::Family(family) => write!(f, "{}({})", family.name(), family.faults()),
            PredicateExpr::Repetition(e) => {
                e.fmt_operand(f, 4)?;
                write!(f, "^w")
            }
            PredicateExpr::Union(a, b) => binary(f, a, "|", b, 1),
            PredicateExpr::Succession(a, b) => binary(f, a, "~>", b, 2),
            PredicateExpr::Combine(a, b) => binary(f, a, "&", b, 3),
        }
    }
}

fn binary(f: &mut fmt::Formatter<'_>, a: &PredicateExpr, op: &str, b: &PredicateExpr, prec: u8) -> fmt::Result {
    a.fmt_operand(f, prec)?;
    write!(f, " {op} ")?;
    // left-associative: an equal-precedence right operand needs parentheses
    b.fmt_operand(f, prec + 1)
}

impl FromStr for PredicateExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        parse_expr(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Ident(String),
    Number(usize),
    At,
    Bar,
    Amp,
    Arrow,
    Omega,
    LParen,
    RParen,
    Comma,
    End,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "'{s}'"),
            Token::Number(v) => write!(f, "'{v}'"),
            Token::At => write!(f, "'@'"),
            Token::Bar => write!(f, "'|'"),
            Token::Amp => write!(f, "'&'"),
            Token::Arrow => write!(f, "'~>'"),
            Token::Omega => write!(f, "'^w'"),
            Token::LParen => write!(f, "'('"),
            Token::RParen => write!(f, "')'"),
            Token::Comma => write!(f, "','"),
            Token::End => write!(f, "end of input"),
        }
    }
}

fn tokenize(text: &str) -> std::result::Result<Vec<(usize, Token)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |position: usize, message: String| ParseError { position, message };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let token = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'@' => Token::At,
            b'|' => Token::Bar,
            b'&' => Token::Amp,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b',' => Token::Comma,
            b'~' => {
                if bytes.get(i + 1) != Some(&b'>') {
                    return Err(err(i, "expected '>' after '~'".into()));
                }
                i += 1;
                Token::Arrow
            }
            b'^' => {
                let next = bytes.get(i + 1);
                if next != Some(&b'w') || bytes.get(i + 2).is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_') {
                    return Err(err(i, "expected '^w'".into()));
                }
                i += 1;
                Token::Omega
            }
            b'0'..=b'9' => {
                while i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                }
                let digits = &text[start..=i];
                let value = digits.parse().map_err(|_| err(start, format!("number '{digits}' too large")))?;
                Token::Number(value)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i + 1 < bytes.len() && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_') {
                    i += 1;
                }
                Token::Ident(text[start..=i].to_string())
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(err(i, format!("unexpected character '{ch}'")));
            }
        };
        out.push((start, token));
        i += 1;
    }
    out.push((text.len(), Token::End));
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].1
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].0
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].1.clone();
        if t != Token::End {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: String) -> std::result::Result<T, ParseError> {
        Err(ParseError { position: self.offset(), message })
    }

    fn expect(&mut self, want: Token) -> std::result::Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {want}, found {}", self.peek()))
        }
    }

    fn number(&mut self) -> std::result::Result<usize, ParseError> {
        match self.peek().clone() {
            Token::Number(v) => {
                self.bump();
                Ok(v)
            }
            other => self.error(format!("expected a number, found {other}")),
        }
    }

    fn union(&mut self) -> std::result::Result<PredicateExpr, ParseError> {
        let mut left = self.succession()?;
        while *self.peek() == Token::Bar {
            self.bump();
            left = left.or(self.succession()?);
        }
        Ok(left)
    }

    fn succession(&mut self) -> std::result::Result<PredicateExpr, ParseError> {
        let mut left = self.combination()?;
        while *self.peek() == Token::Arrow {
            self.bump();
            left = left.then(self.combination()?);
        }
        Ok(left)
    }

    fn combination(&mut self) -> std::result::Result<PredicateExpr, ParseError> {
        let mut left = self.postfix()?;
        while *self.peek() == Token::Amp {
            self.bump();
            left = left.combine(self.postfix()?);
        }
        Ok(left)
    }

    fn postfix(&mut self) -> std::result::Result<PredicateExpr, ParseError> {
        let mut e = self.primary()?;
        while *self.peek() == Token::Omega {
            self.bump();
            e = e.repeated();
        }
        Ok(e)
    }

    fn primary(&mut self) -> std::result::Result<PredicateExpr, ParseError> {
        let start = self.offset();
        match self.bump() {
            Token::LParen => {
                let e = self.union()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            Token::Ident(name) => match name.as_str() {
                "total" => Ok(PredicateExpr::Total),
                "crash1" => {
                    self.expect(Token::At)?;
                    Ok(PredicateExpr::Crash1At(self.number()?))
                }
                "crash" | "recover" | "canrecover" | "recovery" | "crash_after" | "crash_distinct" => {
                    self.expect(Token::LParen)?;
                    let faults = self.number()?;
                    let family = if name == "crash_after" {
                        self.expect(Token::Comma)?;
                        Family::CrashAfter { faults, round: self.number()? }
                    } else {
                        match name.as_str() {
                            "crash" => Family::Crash { faults },
                            "recover" => Family::Recover { faults },
                            "canrecover" => Family::CanRecover { faults },
                            "recovery" => Family::Recovery { faults },
                            _ => Family::CrashDistinct { faults },
                        }
                    };
                    self.expect(Token::RParen)?;
                    Ok(PredicateExpr::Family(family))
                }
                _ => Err(ParseError { position: start, message: format!("unknown name '{name}'") }),
            },
            other => Err(ParseError { position: start, message: format!("expected an operand, found {other}") }),
        }
    }
}

pub fn parse_expr(text: &str) -> std::result::Result<PredicateExpr, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    if *parser.peek() == Token::End {
        return parser.error("empty expression".into());
    }
    let e = parser.union()?;
    if *parser.peek() != Token::End {
        return parser.error(format!("unexpected {}", parser.peek()));
    }
    Ok(e)
}

pub fn eval_expr(expr: &PredicateExpr, n: usize, horizon: usize) -> Result<DeliveredPredicate> {
    expr.eval(n, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use PredicateExpr::*;

    fn p(s: &str) -> PredicateExpr {
        parse_expr(s).unwrap()
    }

    #[test]
    fn atoms_and_precedence() {
        assert_eq!(p("crash1@1 ~> total"), Crash1At(1).then(Total));
        assert_eq!(p("(crash1@1 ~> total) | crash1@1"), Crash1At(1).then(Total).or(Crash1At(1)));
        assert_eq!(
            p("crash1@1 & ((crash1@1 ~> total) | crash1@1)"),
            Crash1At(1).combine(Crash1At(1).then(Total).or(Crash1At(1)))
        );
        assert_eq!(
            p("total | crash1@1 ~> crash1@2 & total^w"),
            Total.or(Crash1At(1).then(Crash1At(2).combine(Total.repeated())))
        );
        assert_eq!(p("total | total | crash1@1"), Total.or(Total).or(Crash1At(1)));
        assert_eq!(p("total ~> total ~> total"), Total.then(Total).then(Total));
        assert_eq!(p("crash1@2^w^w"), Crash1At(2).repeated().repeated());
        assert_eq!(p("crash_after(2, 3)"), Family(super::Family::CrashAfter { faults: 2, round: 3 }));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let cases = [
            ("", 0),
            ("total |", 7),
            ("crash1 1", 7),
            ("(total", 6),
            ("total $", 6),
            ("total ~ total", 6),
            ("crash1@1 total", 9),
            ("bogus", 0),
            ("total^x", 5),
        ];
        for (text, position) in cases {
            let e = parse_expr(text).unwrap_err();
            assert_eq!(e.position, position, "{text:?}: {e}");
        }
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "total",
            "crash1@1 ~> total",
            "(crash1@1 ~> total) | crash1@1",
            "crash1@1 & ((crash1@1 ~> total) | crash1@1)",
            "total | (crash1@1 | crash1@2)",
            "(total ~> total)^w",
            "crash1@1 ~> (total ~> crash1@2)",
            "recover(2) & crash_after(1,2)",
        ] {
            let e = p(text);
            assert_eq!(p(&e.to_string()), e, "{text}");
        }
    }

    #[test]
    fn crash_family_is_union_over_rounds() {
        let direct = DeliveredPredicate::crash1_at(1, 2, 2)
            .unwrap()
            .union(&DeliveredPredicate::crash1_at(2, 2, 2).unwrap())
            .unwrap();
        assert_eq!(p("crash(1)").eval(2, 2).unwrap(), direct);
        assert_eq!(p("total").eval(2, 2).unwrap(), DeliveredPredicate::total(2, 2).unwrap());
        let recover = p("crash(1) ~> total").eval(2, 2).unwrap();
        assert_eq!(recover, direct.succession(&DeliveredPredicate::total(2, 2).unwrap()).unwrap());
        assert_eq!(p("recover(1)").eval(2, 2).unwrap(), recover);
    }

    #[test]
    fn families_match_their_expansion() {
        for text in ["crash(2)", "recover(2)", "canrecover(1)", "recovery(1)", "crash_after(2,2)", "crash_distinct(2)"]
        {
            let e = p(text);
            let PredicateExpr::Family(family) = e else { unreachable!() };
            let expanded = family.expand(2).unwrap();
            assert_eq!(e.eval(2, 2).unwrap(), expanded.eval(2, 2).unwrap(), "{text}");
        }
        assert!(p("crash(0)").eval(2, 2).is_err());
        assert!(p("crash_after(1,3)").eval(2, 2).is_err());
        assert!(p("crash_distinct(3)").eval(2, 2).is_err());
    }
}
