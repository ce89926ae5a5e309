//! Empirical `(t, p)` pairs read off bounded verdict tables.

use serde::{Deserialize, Serialize};

use super::eval::{eval_tables, Caps, OracleError, Tables, Truth};
use crate::arith;
use crate::exec::Exec;
use crate::formula::Formula;
use crate::oca::Oca;

/// Sampling range and oracle caps for mining.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MineCaps {
    /// Largest counter value sampled.
    pub v_cap: u64,
    pub counter_cap: u64,
    pub level_cap: u64,
}

impl MineCaps {
    pub fn caps(&self) -> Caps {
        Caps { counter_cap: self.counter_cap, level_cap: self.level_cap }
    }
}

impl Default for MineCaps {
    fn default() -> Self {
        MineCaps { v_cap: 30, counter_cap: 60, level_cap: 200 }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MineError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("no (t, p) with t + 2p <= {v_cap} fits the verdicts of {formula} at state {state}")]
    NoPair { formula: Formula, state: String, v_cap: u64 },
    #[error("uniform period of {0} overflows")]
    Overflow(Formula),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MinedPeriod {
    pub t: Option<u64>,
    pub p: Option<u64>,
    /// Verdicts at `v = 0..=vCap` as a string over `T`, `F`, `U`.
    pub table: String,
}

/// Lexicographically least `(t, p)` with `t + 2p <= row.len() - 1` such that
/// no verdict at or above `t` is unknown and `row[v] = row[v + p]` for
/// `t <= v`.
pub fn mine_row(row: &[Truth]) -> Option<(u64, u64)> {
    let v_cap = row.len().checked_sub(1)? as u64;
    let first_known_tail = (0..row.len()).rev().find(|&v| row[v] == Truth::Unknown).map_or(0, |v| v as u64 + 1);
    (first_known_tail..=v_cap).find_map(|t| {
        (1..=(v_cap - t) / 2).find_map(|p| {
            let ok = (t..=v_cap - p).all(|v| row[v as usize] == row[(v + p) as usize]);
            ok.then_some((t, p))
        })
    })
}

/// Verdict table of `f` at `state` for `v <= vCap`, with its least pair.
pub fn mine_period(oca: &Oca, f: &Formula, state: usize, mcaps: &MineCaps) -> Result<MinedPeriod, MineError> {
    let tables = eval_tables(oca, f, mcaps.caps(), Exec::default())?;
    Ok(mine_from_tables(&tables, tables.dag.root(), state, mcaps.v_cap))
}

pub fn mine_from_tables(tables: &Tables, node: usize, state: usize, v_cap: u64) -> MinedPeriod {
    let row = tables.row(node, state, v_cap);
    let pair = mine_row(&row);
    MinedPeriod { t: pair.map(|x| x.0), p: pair.map(|x| x.1), table: row.iter().map(|t| t.letter()).collect() }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MinedSubformula {
    pub formula: Formula,
    /// Largest mined threshold and least common period over all states.
    pub t: u64,
    pub p: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MinedTotal {
    pub t: u64,
    pub p: u64,
    pub per_subformula: Vec<MinedSubformula>,
}

/// Uniform pair for one DAG node over all states.
pub fn mine_node(tables: &Tables, oca: &Oca, node: usize, v_cap: u64) -> Result<(u64, u64), MineError> {
    let formula = &tables.dag.nodes[node].formula;
    let (mut t, mut p) = (0u64, 1u64);
    for s in 0..oca.num_states() {
        let (ts, ps) = mine_row(&tables.row(node, s, v_cap)).ok_or_else(|| MineError::NoPair {
            formula: formula.clone(),
            state: oca.state_name(s).to_string(),
            v_cap,
        })?;
        t = t.max(ts);
        p = arith::lcm(p, ps).ok_or_else(|| MineError::Overflow(formula.clone()))?;
    }
    Ok((t, p))
}

/// Uniform pair for every subformula of `f` at once.
pub fn mine_total_pair(oca: &Oca, f: &Formula, mcaps: &MineCaps, exec: Exec) -> Result<MinedTotal, MineError> {
    let tables = eval_tables(oca, f, mcaps.caps(), exec)?;
    let mut per_subformula = Vec::with_capacity(tables.dag.len());
    let (mut t, mut p) = (0u64, 1u64);
    for (i, node) in tables.dag.nodes.iter().enumerate() {
        let (ti, pi) = mine_node(&tables, oca, i, mcaps.v_cap)?;
        per_subformula.push(MinedSubformula { formula: node.formula.clone(), t: ti, p: pi });
        t = t.max(ti);
        p = arith::lcm(p, pi).ok_or_else(|| MineError::Overflow(f.clone()))?;
    }
    Ok(MinedTotal { t, p, per_subformula })
}
