//! End-to-end decision for one formula and one initial configuration.

use std::collections::BTreeMap;

use serde::Serialize;

use super::kripke::{class_of, node_of, unfold_kripke, Kripke, NodeSet};
use super::{label_dag, root_sync_outcome, LabelError, LabelOptions};
use crate::exec::Exec;
use crate::formula::{Dag, Formula, UnknownAtom};
use crate::oca::{Configuration, Oca, OcaError};
use crate::oracle::mine::{mine_total_pair, MineCaps, MineError};
use crate::periodicity::{formula_constants, PeriodicityError};
use crate::quantity::{Quantity, QuantityError};
use crate::upset::UpSet;

pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Environment variable overriding [`DEFAULT_BUDGET`].
pub const BUDGET_ENV: &str = "OCASYNC_BUDGET";

/// Where the uniform `(t, p)` comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mode {
    /// The exact recursion over subformulas, optionally with a fixed `b`.
    PaperConstants {
        b: Option<u64>,
    },
    Supplied {
        t: u64,
        p: u64,
    },
    /// Pairs mined from the bounded oracle.
    Empirical(MineCaps),
}

impl Mode {
    fn name(&self) -> &'static str {
        match self {
            Mode::PaperConstants { .. } => "paper",
            Mode::Supplied { .. } => "supplied",
            Mode::Empirical(_) => "empirical",
        }
    }
}

/// Deliberate defects for mutation testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// `UA` accepts a level meeting the target instead of one inside it.
    FlipUaInclusion,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOptions {
    /// Largest Kripke structure, in nodes, that will be built.
    pub budget: u64,
    pub ua_step_cap: Option<u64>,
    pub ue_step_cap: u64,
    /// Extra periods added to the threshold before unfolding.
    pub headroom: u64,
    pub exec: Exec,
    #[doc(hidden)]
    pub fault: Option<Fault>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            budget: DEFAULT_BUDGET,
            ua_step_cap: None,
            ue_step_cap: super::sync::DEFAULT_UE_STEP_CAP,
            headroom: 0,
            exec: Exec::default(),
            fault: None,
        }
    }
}

impl CheckOptions {
    /// Defaults, with the budget taken from [`BUDGET_ENV`] when it is set to
    /// a number.
    pub fn from_env() -> Self {
        let budget = std::env::var(BUDGET_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_BUDGET);
        CheckOptions { budget, ..Default::default() }
    }

    fn label_options(&self) -> LabelOptions {
        LabelOptions {
            ua_step_cap: self.ua_step_cap,
            ue_step_cap: self.ue_step_cap,
            exec: self.exec,
            flip_ua: self.fault == Some(Fault::FlipUaInclusion),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CheckError {
    #[error(transparent)]
    Oca(#[from] OcaError),
    #[error(transparent)]
    UnknownAtom(#[from] UnknownAtom),
    #[error(transparent)]
    Periodicity(#[from] PeriodicityError),
    #[error(transparent)]
    Quantity(#[from] QuantityError),
    #[error(transparent)]
    Mining(#[from] MineError),
    #[error("Kripke structure needs {required} nodes, over the budget of {budget}")]
    Budget { required: Quantity, budget: u64 },
    #[error(transparent)]
    Sync(#[from] LabelError),
    #[error("period must be positive")]
    ZeroPeriod,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubformulaPair {
    pub formula: Formula,
    pub t: Quantity,
    pub p: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstantsUsed {
    pub mode: String,
    /// Threshold the structure was unfolded at, headroom included.
    pub t: u64,
    pub p: u64,
    pub headroom: u64,
    pub per_subformula: Vec<SubformulaPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Verdict {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_k: Option<u64>,
    pub per_state: BTreeMap<String, UpSet>,
    pub constants_used: ConstantsUsed,
    pub caveats: Vec<String>,
}

/// Satisfaction sets of every subformula.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SatSets {
    pub subformulas: Vec<SubformulaSat>,
    pub constants_used: ConstantsUsed,
    pub caveats: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SubformulaSat {
    pub formula: Formula,
    pub per_state: BTreeMap<String, UpSet>,
}

struct Labeled {
    kripke: Kripke,
    dag: Dag,
    sats: Vec<NodeSet>,
    constants: ConstantsUsed,
    caveats: Vec<String>,
}

impl Labeled {
    fn per_state(&self, oca: &Oca, idx: usize) -> BTreeMap<String, UpSet> {
        let (t, p) = (self.constants.t, self.constants.p);
        (0..oca.num_states())
            .map(|s| {
                let sat = &self.sats[idx];
                let set = UpSet::from_fn(t, p, |v| sat.contains(node_of(s, class_of(v, t, p), t + p)));
                (oca.state_name(s).to_string(), set)
            })
            .collect()
    }
}

/// Uniform constants for `f` under `mode`, before headroom.
fn resolve(
    oca: &Oca,
    f: &Formula,
    mode: &Mode,
    exec: Exec,
) -> Result<(Quantity, Quantity, Vec<SubformulaPair>, Vec<String>), CheckError> {
    match mode {
        Mode::PaperConstants { b } => {
            let table = formula_constants(f, oca.num_states() as u64, *b)?;
            let (mut t, mut p) = (Quantity::zero(), Quantity::one());
            for row in &table {
                t = t.try_max(&row.t)?;
                p = p.try_lcm(&row.p)?;
            }
            let per = table.into_iter().map(|r| SubformulaPair { formula: r.formula, t: r.t, p: r.p }).collect();
            Ok((t, p, per, Vec::new()))
        }
        Mode::Supplied { t, p } => {
            if *p == 0 {
                return Err(CheckError::ZeroPeriod);
            }
            let per = f
                .dag()
                .nodes
                .into_iter()
                .map(|n| SubformulaPair { formula: n.formula, t: Quantity::from(*t), p: Quantity::from(*p) })
                .collect();
            let caveat = format!(
                "constants ({t}, {p}) supplied by the caller; the result is sound only if every subformula is totally ({t}, {p})-periodic"
            );
            Ok((Quantity::from(*t), Quantity::from(*p), per, vec![caveat]))
        }
        Mode::Empirical(caps) => {
            let mined = mine_total_pair(oca, f, caps, exec)?;
            let per = mined
                .per_subformula
                .into_iter()
                .map(|m| SubformulaPair { formula: m.formula, t: Quantity::from(m.t), p: Quantity::from(m.p) })
                .collect();
            let caveat = format!(
                "constants mined from the bounded oracle on v in [0..{}] (counter cap {}, level cap {}); soundness holds only relative to that sample",
                caps.v_cap, caps.counter_cap, caps.level_cap
            );
            Ok((Quantity::from(mined.t), Quantity::from(mined.p), per, vec![caveat]))
        }
    }
}

fn label(oca: &Oca, f: &Formula, mode: &Mode, opts: &CheckOptions) -> Result<Labeled, CheckError> {
    oca.ensure_valid()?;
    f.bind(oca)?;
    let (t, p, per_subformula, mut caveats) = resolve(oca, f, mode, opts.exec)?;
    let t = t.try_add(&p.mul_u64(opts.headroom))?;
    // class 0 must stand for the zero counter alone, or positive counters
    // folded onto it would lose their `>0` moves
    let t = t.try_max(&Quantity::one())?;
    let required = t.try_add(&p)?.mul_u64(oca.num_states() as u64);
    let within = required.to_u64().filter(|&r| r <= opts.budget);
    let (Some(_), Some(t), Some(p)) = (within, t.to_u64(), p.to_u64()) else {
        return Err(CheckError::Budget { required, budget: opts.budget });
    };
    if opts.headroom > 0 {
        caveats.push(format!("threshold raised by {} periods before unfolding", opts.headroom));
    }
    let kripke = unfold_kripke(oca, t, p);
    let dag = f.dag();
    let sats = label_dag(&kripke, &dag, &opts.label_options())?;
    let constants = ConstantsUsed { mode: mode.name().to_string(), t, p, headroom: opts.headroom, per_subformula };
    Ok(Labeled { kripke, dag, sats, constants, caveats })
}

/// Decides `init ⊨ f` by unfolding at the uniform constants of `mode`.
pub fn check_oca(
    oca: &Oca,
    f: &Formula,
    init: Configuration,
    mode: &Mode,
    opts: &CheckOptions,
) -> Result<Verdict, CheckError> {
    if init.state >= oca.num_states() {
        return Err(OcaError::StateOutOfRange(init.state).into());
    }
    let lab = label(oca, f, mode, opts)?;
    let (t, p) = (lab.constants.t, lab.constants.p);
    let root = lab.dag.root();
    let init_node = node_of(init.state, class_of(init.counter, t, p), t + p);
    let holds = lab.sats[root].contains(init_node);
    let mut caveats = lab.caveats.clone();
    let witness_k = if !lab.dag.nodes[root].formula.contains_sync() || init.counter < t + p {
        root_sync_outcome(&lab.kripke, &lab.dag, &lab.sats, init_node, &opts.label_options())?.and_then(|o| o.witness_k)
    } else {
        // the class of a large counter stands for smaller values too, so the
        // level count is taken where the counter has a node of its own
        let raised = t + p * ((init.counter - t - p) / p + 1);
        let nodes = (raised + p).checked_mul(oca.num_states() as u64).filter(|&n| n <= opts.budget);
        match nodes {
            Some(_) => {
                let k = unfold_kripke(oca, raised, p);
                let sats = label_dag(&k, &lab.dag, &opts.label_options())?;
                let node = node_of(init.state, init.counter, raised + p);
                root_sync_outcome(&k, &lab.dag, &sats, node, &opts.label_options())?.and_then(|o| o.witness_k)
            }
            None => {
                caveats
                    .push("witness level omitted: the counter lies beyond what the budget can unfold exactly".into());
                None
            }
        }
    };
    Ok(Verdict { holds, witness_k, per_state: lab.per_state(oca, root), constants_used: lab.constants, caveats })
}

/// Per-state satisfaction sets of every subformula of `f`.
pub fn sat_sets(oca: &Oca, f: &Formula, mode: &Mode, opts: &CheckOptions) -> Result<SatSets, CheckError> {
    let lab = label(oca, f, mode, opts)?;
    let subformulas = lab
        .dag
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| SubformulaSat { formula: n.formula.clone(), per_state: lab.per_state(oca, i) })
        .collect();
    Ok(SatSets { subformulas, constants_used: lab.constants, caveats: lab.caveats })
}
