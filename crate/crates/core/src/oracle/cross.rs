//! Differential comparison of the model checker against the bounded oracle.

use serde::Serialize;

use super::eval::{eval_tables, Caps, Truth};
use crate::exec::Exec;
use crate::formula::Formula;
use crate::mc::{check_oca, CheckOptions, Mode};
use crate::oca::{Configuration, Oca};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CrossStatus {
    Agree,
    Disagree,
    OracleUnknown,
    McError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CrossEntry {
    pub init: String,
    pub oracle: Truth,
    pub mc: Option<bool>,
    pub status: CrossStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CrossReport {
    pub formula: Formula,
    pub caps: Caps,
    /// Constants the checker unfolded at, when it ran.
    pub constants: Option<(u64, u64)>,
    pub mc_error: Option<String>,
    pub entries: Vec<CrossEntry>,
    pub agree: usize,
    pub disagree: usize,
    pub oracle_unknown: usize,
    pub mc_errors: usize,
}

impl CrossReport {
    pub fn is_clean(&self) -> bool {
        self.disagree == 0
    }
}

/// Runs the checker once and the oracle once, then compares at every init.
pub fn cross_check(
    oca: &Oca,
    f: &Formula,
    inits: &[Configuration],
    mode: &Mode,
    opts: &CheckOptions,
    caps: Caps,
) -> CrossReport {
    let tables = eval_tables(oca, f, caps, opts.exec);
    let first = inits.first().copied().unwrap_or(Configuration::new(0, 0));
    let verdict = check_oca(oca, f, first, mode, opts);
    let (constants, mc_error) = match &verdict {
        Ok(v) => (Some((v.constants_used.t, v.constants_used.p)), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let entries: Vec<CrossEntry> = inits
        .iter()
        .map(|&c| {
            let oracle = tables.as_ref().map_or(Truth::Unknown, |t| t.root(c));
            let mc = verdict.as_ref().ok().and_then(|v| {
                let name = oca.state_name(c.state);
                v.per_state.get(name).map(|u| u.member(c.counter))
            });
            let status = match (mc, oracle.as_bool()) {
                (None, _) => CrossStatus::McError,
                (Some(_), None) => CrossStatus::OracleUnknown,
                (Some(m), Some(o)) if m == o => CrossStatus::Agree,
                _ => CrossStatus::Disagree,
            };
            CrossEntry { init: oca.show_configuration(c), oracle, mc, status }
        })
        .collect();
    let count = |s: CrossStatus| entries.iter().filter(|e| e.status == s).count();
    CrossReport {
        formula: f.clone(),
        caps,
        constants,
        mc_error,
        agree: count(CrossStatus::Agree),
        disagree: count(CrossStatus::Disagree),
        oracle_unknown: count(CrossStatus::OracleUnknown),
        mc_errors: count(CrossStatus::McError),
        entries,
    }
}

/// Inits `(s, v)` for every state and `v <= v_max`.
pub fn all_inits(oca: &Oca, v_max: u64) -> Vec<Configuration> {
    (0..oca.num_states()).flat_map(|s| (0..=v_max).map(move |v| Configuration::new(s, v))).collect()
}

/// Checks many formulas, fanning out over `exec`.
pub fn cross_check_many(
    oca: &Oca,
    formulas: &[Formula],
    inits: &[Configuration],
    mode: &Mode,
    opts: &CheckOptions,
    caps: Caps,
    exec: Exec,
) -> Vec<CrossReport> {
    let inner = CheckOptions { exec: Exec::Sequential, ..opts.clone() };
    exec.map(formulas.iter().collect(), |f| cross_check(oca, f, inits, mode, &inner, caps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::mc::Fault;
    use crate::oracle::mine::MineCaps;

    fn fork() -> Oca {
        Oca::from_dsl(include_str!("../../../../corpus/asymmetric-fork.oca")).unwrap()
    }

    #[test]
    fn true_agrees_everywhere() {
        let oca = fork();
        let r = cross_check(
            &oca,
            &Formula::True,
            &all_inits(&oca, 5),
            &Mode::Supplied { t: 0, p: 1 },
            &CheckOptions::default(),
            Caps::default(),
        );
        assert_eq!(r.agree, r.entries.len());
    }

    #[test]
    fn flipped_inclusion_is_caught() {
        let oca = fork();
        let f = parse("FA p").unwrap();
        let mode = Mode::Empirical(MineCaps::default());
        let inits = all_inits(&oca, 10);
        let good = cross_check(&oca, &f, &inits, &mode, &CheckOptions::default(), Caps::default());
        assert!(good.is_clean(), "{good:?}");
        let bad_opts = CheckOptions { fault: Some(Fault::FlipUaInclusion), ..Default::default() };
        let bad = cross_check(&oca, &f, &inits, &mode, &bad_opts, Caps::default());
        assert!(bad.disagree > 0);
    }
}
