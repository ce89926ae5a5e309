//! Finite-state model checking: fold an automaton into a Kripke structure at
//! a uniform `(t, p)`, label every subformula, and read back per-state
//! satisfaction sets.

pub mod check;
pub mod ctl;
pub mod fixtures;
pub mod kripke;
pub mod sync;

pub use check::{check_oca, sat_sets, CheckError, CheckOptions, Fault, Mode, SatSets, Verdict};
pub use kripke::{class_of, node_of, unfold_kripke, Kripke, NodeSet};
pub use sync::{check_ua_on_kripke, check_ue_on_kripke, SyncError, SyncOutcome};

use crate::exec::Exec;
use crate::formula::{Dag, Formula, NodeKind};

/// Knobs for [`label_dag`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelOptions {
    pub ua_step_cap: Option<u64>,
    pub ue_step_cap: u64,
    pub exec: Exec,
    pub(crate) flip_ua: bool,
}

impl Default for LabelOptions {
    fn default() -> Self {
        LabelOptions {
            ua_step_cap: None,
            ue_step_cap: sync::DEFAULT_UE_STEP_CAP,
            exec: Exec::default(),
            flip_ua: false,
        }
    }
}

/// A failed synchronized check, located at a DAG node and Kripke node.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{formula} at node {node}: {source}")]
pub struct LabelError {
    pub formula: Formula,
    pub node: usize,
    #[source]
    pub source: SyncError,
}

/// Satisfaction set of every node of `dag`, in DAG order. Synchronized
/// operators are decided separately from each node as the initial one.
pub fn label_dag(k: &Kripke, dag: &Dag, opts: &LabelOptions) -> Result<Vec<NodeSet>, LabelError> {
    let mut sats: Vec<NodeSet> = Vec::with_capacity(dag.len());
    for node in &dag.nodes {
        let sat = match node.kind {
            NodeKind::True => k.full_set(),
            NodeKind::Atom => match &node.formula {
                Formula::Atom(a) => k.sat_atom(a),
                _ => unreachable!("atom node holds an atom"),
            },
            NodeKind::Not(a) => ctl::sat_not(k, &sats[a]),
            NodeKind::And(a, b) => ctl::sat_and(&sats[a], &sats[b]),
            NodeKind::Ex(a) => ctl::sat_ex(k, &sats[a]),
            NodeKind::Eu(a, b) => ctl::sat_eu(k, &sats[a], &sats[b]),
            NodeKind::Au(a, b) => ctl::sat_au(k, &sats[a], &sats[b]),
            NodeKind::Ua(a, b) | NodeKind::Ue(a, b) => {
                let ua = matches!(node.kind, NodeKind::Ua(..));
                let (s1, s2) = (&sats[a], &sats[b]);
                let results = opts.exec.map_range(k.len(), |u| {
                    if ua {
                        sync::ua_levels(k, u, s1, s2, opts.ua_step_cap, opts.flip_ua)
                    } else {
                        check_ue_on_kripke(k, u, s1, s2, opts.ue_step_cap)
                    }
                });
                let mut out = k.empty_set();
                for (u, r) in results.into_iter().enumerate() {
                    let r = r.map_err(|source| LabelError { formula: node.formula.clone(), node: u, source })?;
                    if r.holds {
                        out.insert(u);
                    }
                }
                out
            }
        };
        sats.push(sat);
    }
    Ok(sats)
}

/// Satisfaction set of `f` on `k`.
pub fn label_formula(k: &Kripke, f: &Formula, opts: &LabelOptions) -> Result<NodeSet, LabelError> {
    let mut sats = label_dag(k, &f.dag(), opts)?;
    Ok(sats.pop().expect("nonempty dag"))
}

/// Outcome of the root synchronized operator of `f` at `init`, or `None` when
/// the root is not synchronized.
pub fn root_sync_outcome(
    k: &Kripke,
    dag: &Dag,
    sats: &[NodeSet],
    init: usize,
    opts: &LabelOptions,
) -> Result<Option<SyncOutcome>, LabelError> {
    let root = &dag.nodes[dag.root()];
    let wrap = |source| LabelError { formula: root.formula.clone(), node: init, source };
    match root.kind {
        NodeKind::Ua(a, b) => {
            sync::ua_levels(k, init, &sats[a], &sats[b], opts.ua_step_cap, opts.flip_ua).map(Some).map_err(wrap)
        }
        NodeKind::Ue(a, b) => check_ue_on_kripke(k, init, &sats[a], &sats[b], opts.ue_step_cap).map(Some).map_err(wrap),
        _ => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    #[test]
    fn figure_separations_through_the_labeler() {
        let opts = LabelOptions::default();
        let (a, b) = (fixtures::tree_a(), fixtures::tree_b());
        let holds = |k: &Kripke, f: &str| label_formula(k, &parse(f).unwrap(), &opts).unwrap().contains(0);
        assert!(holds(&a, "A true U black") && holds(&b, "A true U black"));
        assert!(holds(&a, "FA black") && !holds(&b, "FA black"));
        assert!(holds(&a, "E white U stripes") && !holds(&b, "E white U stripes"));
        assert!(holds(&a, "white UE stripes") && holds(&b, "white UE stripes"));
    }

    #[test]
    fn exec_modes_agree() {
        let k = fixtures::tree_b();
        let f = parse("(white UE stripes) & !(FA black) | EX (true UA black)").unwrap();
        let seq = LabelOptions { exec: Exec::Sequential, ..Default::default() };
        let par = LabelOptions { exec: Exec::Parallel, ..Default::default() };
        assert_eq!(label_formula(&k, &f, &seq).unwrap(), label_formula(&k, &f, &par).unwrap());
    }
}
