//! Executions of strategies on delivered predicates and the heard-of
//! predicates they generate.

pub mod execution;
pub mod oracle;
pub mod pho;
pub mod timing;

pub use execution::{standard_execution, Execution, RuleViolation, Transition};
pub use oracle::brute_force_pho;
pub use pho::{compute_pho, pho_by_timings};
pub use timing::{heard_of_of_timing, is_execution_of_strategy, state_at_next, DeliveryTime, TimingFunction};
