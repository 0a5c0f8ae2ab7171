//! A small-scope laboratory for the Heard-Of model of round-based
//! distributed computing.
//!
//! Delivered predicates are built from the total predicate and single-crash
//! predicates with union, combination, succession and repetition. From a
//! predicate one extracts minimal oblivious or conservative strategies,
//! computes the heard-of predicate a strategy generates by exhausting its
//! executions, and checks the known characterizations on finite instances.
//!
//! Everything is relative to a finite horizon `R`: collections are truncated
//! to rounds `1..=R`.

pub mod analysis;
pub mod engine;
pub mod error;
pub mod expr;
pub mod heard_of;
pub mod model;
pub mod predicate;
pub mod strategy;

pub use error::{Error, Result};
pub use expr::{parse_expr, Family, ParseError, PredicateExpr};
pub use heard_of::{ho_product, HeardOfPredicate};
pub use model::{
    BoundedCollection, ConservativeState, HeardOfCollection, LocalState, Message, ObliviousState, RoundGraph,
    SenderSet, Shape,
};
pub use predicate::DeliveredPredicate;
pub use strategy::{ConservativeStrategy, ObliviousStrategy, Strategy, StrategyFamily};
