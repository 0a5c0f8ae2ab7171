//! Independent reference for `PHO_f(P)`: explores global configurations of
//! all processes together, with any round skew between them, instead of
//! reasoning per receiver with timing functions.
//!
//! Deliveries to a process only matter at its next `next`, and postponing a
//! delivery keeps an execution legal, so every delivery is moved to just
//! before the receiver's next `next`. A move is then "process `j` receives a
//! batch of the messages already sent to it, and advances".

use rustc_hash::FxHashSet;

use crate::error::{Error, Result};
use crate::heard_of::HeardOfPredicate;
use crate::model::{mask, BoundedCollection, LocalState, Shape};
use crate::predicate::DeliveredPredicate;
use crate::strategy::Strategy;

pub const ORACLE_MAX_N: usize = 3;
pub const ORACLE_MAX_HORIZON: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Process {
    // 1-based; horizon + 1 once done
    round: usize,
    // packed like a column: n bits per message round
    delivered: u128,
    heard: u128,
}

pub fn brute_force_pho(f: &Strategy, pred: &DeliveredPredicate) -> Result<HeardOfPredicate> {
    let shape = pred.shape();
    if shape.n > ORACLE_MAX_N || shape.horizon > ORACLE_MAX_HORIZON {
        return Err(Error::SizeGuard(format!(
            "the interleaving oracle handles n <= {ORACLE_MAX_N} and horizon <= {ORACLE_MAX_HORIZON}, got {shape}"
        )));
    }
    f.ensure_valid_for(pred)?;
    let mut heard = FxHashSet::default();
    for c in pred.iter() {
        explore(f, &c, &mut heard)?;
    }
    HeardOfPredicate::from_collections(shape, heard)
}

fn explore(f: &Strategy, c: &BoundedCollection, out: &mut FxHashSet<BoundedCollection>) -> Result<()> {
    let shape = c.shape();
    let n = shape.n;
    let columns: Vec<u128> = (0..n).map(|p| shape.column_bits(c.raw(), p)).collect();
    let start = vec![Process { round: 1, delivered: 0, heard: 0 }; n];
    let mut seen: FxHashSet<Vec<Process>> = FxHashSet::default();
    let mut stack = vec![start.clone()];
    seen.insert(start);
    while let Some(config) = stack.pop() {
        if config.iter().all(|p| p.round > shape.horizon) {
            let heard: Vec<u128> = config.iter().map(|p| p.heard).collect();
            out.insert(BoundedCollection::from_raw(shape, shape.pack_columns(&heard)));
            continue;
        }
        let mut moved = false;
        for j in 0..n {
            let me = config[j];
            if me.round > shape.horizon {
                continue;
            }
            let available = sent_to(shape, &config, columns[j]) & !me.delivered;
            let mut batch = available;
            loop {
                let delivered = me.delivered | batch;
                if f.accepts_state(&local_state(shape, me.round, delivered)) {
                    moved = true;
                    let round_bits = delivered & (mask(n) << ((me.round - 1) * n));
                    let mut next = config.clone();
                    let done = me.round == shape.horizon;
                    next[j] = Process {
                        round: me.round + 1,
                        delivered: if done { 0 } else { delivered },
                        heard: me.heard | round_bits,
                    };
                    if seen.insert(next.clone()) {
                        stack.push(next);
                    }
                }
                if batch == 0 {
                    break;
                }
                batch = (batch - 1) & available;
            }
        }
        if !moved {
            return Err(Error::InvalidStrategy(format!("every process is stuck while executing {c}")));
        }
    }
    Ok(())
}

/// Messages of `column` whose sender has reached their round.
fn sent_to(shape: Shape, config: &[Process], column: u128) -> u128 {
    let n = shape.n;
    let mut out = 0;
    for r in 1..=shape.horizon {
        for (k, sender) in config.iter().enumerate() {
            if sender.round >= r {
                out |= 1u128 << ((r - 1) * n + k);
            }
        }
    }
    column & out
}

fn local_state(shape: Shape, round: usize, delivered: u128) -> LocalState {
    let n = shape.n;
    let mes = (1..=shape.horizon)
        .flat_map(|r| (0..n).map(move |k| (r, k)))
        .filter(|(r, k)| delivered & (1u128 << ((r - 1) * n + k)) != 0);
    LocalState::new(round, mes).expect("positive rounds")
}
