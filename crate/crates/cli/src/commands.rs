//! One function per subcommand, each returning the JSON document and the
//! exit code for a completed run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ocasync::exec::Exec;
use ocasync::formula::{parse, Formula};
use ocasync::lps::{analyze_cycle_repetitions, find_shaped_witnesses};
use ocasync::mc::{CheckOptions, Mode};
use ocasync::oracle::lemma11::LemmaSamples;
use ocasync::oracle::mine::{mine_from_tables, mine_node};
use ocasync::oracle::{all_inits, eval_tables, Caps, MineCaps};
use ocasync::periodicity::{default_b, formula_constants, ua_constants};
use ocasync::{Oca, Quantity};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::failure;
use crate::{
    CapArgs, CheckArgs, ConstantsArgs, CrossCheckArgs, Lemma11Args, LpsArgs, MinePeriodArgs, ModeArgs, OracleArgs,
    SatSetsArgs, ValidateArgs,
};

type Outcome = Result<(Value, u8)>;

fn load(path: &Path) -> Result<Oca> {
    Oca::load(path).with_context(|| format!("loading {}", path.display()))
}

fn load_valid(path: &Path) -> Result<Oca> {
    let oca = load(path)?;
    oca.ensure_valid().with_context(|| format!("validating {}", path.display()))?;
    Ok(oca)
}

fn formula(text: &str, oca: &Oca) -> Result<Formula> {
    let f = parse(text).with_context(|| format!("parsing formula `{text}`"))?;
    f.bind(oca)?;
    Ok(f)
}

fn exec(sequential: bool) -> Exec {
    if sequential {
        Exec::Sequential
    } else {
        Exec::default()
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| failure::internal(format!("report does not serialize: {e}")))
}

impl CapArgs {
    fn oracle(&self) -> Caps {
        Caps { counter_cap: self.counter_cap, level_cap: self.level_cap }
    }

    fn mine(&self) -> MineCaps {
        MineCaps { v_cap: self.v_cap, counter_cap: self.counter_cap, level_cap: self.level_cap }
    }
}

fn parse_mode(text: &str, b: Option<u64>, caps: &CapArgs) -> Result<Mode> {
    let bad = || failure::input(format!("unknown mode `{text}`, expected paper, supplied:T,P or empirical"));
    match text {
        "paper" => Ok(Mode::PaperConstants { b }),
        "empirical" => Ok(Mode::Empirical(caps.mine())),
        _ => {
            let rest = text.strip_prefix("supplied:").ok_or_else(bad)?;
            let (t, p) = rest.split_once(',').ok_or_else(bad)?;
            let t = t.trim().parse().map_err(|_| bad())?;
            let p = p.trim().parse().map_err(|_| bad())?;
            Ok(Mode::Supplied { t, p })
        }
    }
}

impl ModeArgs {
    fn options(&self) -> CheckOptions {
        let mut o = CheckOptions::from_env();
        if let Some(b) = self.budget {
            o.budget = b;
        }
        o.headroom = self.headroom;
        o.ua_step_cap = self.ua_step_cap;
        if let Some(c) = self.ue_step_cap {
            o.ue_step_cap = c;
        }
        o.exec = exec(self.sequential);
        o
    }

    fn resolve(&self, caps: &CapArgs) -> Result<Mode> {
        parse_mode(self.mode.as_deref().unwrap_or("paper"), self.b, caps)
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct Job {
    oca: Option<PathBuf>,
    formula: Option<String>,
    init: Option<String>,
    mode: Option<String>,
    b: Option<u64>,
    budget: Option<u64>,
}

fn read_job(path: &Path) -> Result<Job> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut job: Job = serde_json::from_str(&text).with_context(|| format!("parsing job {}", path.display()))?;
    if let (Some(oca), Some(dir)) = (&job.oca, path.parent()) {
        if oca.is_relative() {
            job.oca = Some(dir.join(oca));
        }
    }
    Ok(job)
}

pub fn check(a: CheckArgs) -> Outcome {
    let job = match &a.job {
        Some(p) => read_job(p)?,
        None => Job::default(),
    };
    let missing = |what: &str| failure::input(format!("missing --{what}"));
    let oca_path = a.oca.or(job.oca).ok_or_else(|| missing("oca"))?;
    let text = a.formula.or(job.formula).ok_or_else(|| missing("formula"))?;
    let init = a.init.or(job.init).ok_or_else(|| missing("init"))?;
    let mut mode_args = a.mode;
    mode_args.mode = mode_args.mode.or(job.mode);
    mode_args.b = mode_args.b.or(job.b);
    mode_args.budget = mode_args.budget.or(job.budget);

    let oca = load_valid(&oca_path)?;
    let f = formula(&text, &oca)?;
    let init = oca.parse_configuration(&init)?;
    let mode = mode_args.resolve(&a.caps)?;
    let verdict = ocasync::mc::check_oca(&oca, &f, init, &mode, &mode_args.options())?;
    Ok((to_json(&verdict)?, 0))
}

pub fn constants(a: ConstantsArgs) -> Outcome {
    let oca = load_valid(&a.oca)?;
    let f = formula(&a.formula, &oca)?;
    let n = oca.num_states() as u64;
    let table = formula_constants(&f, n, a.b)?;
    let (mut t, mut p) = (Quantity::zero(), Quantity::one());
    for row in &table {
        t = t.try_max(&row.t)?;
        p = p.try_lcm(&row.p)?;
    }
    Ok((
        json!({
            "formula": f,
            "n": n,
            "b": a.b.unwrap_or_else(|| default_b(n)),
            "table": to_json(&table)?,
            "uniform": { "t": t, "p": p },
        }),
        0,
    ))
}

pub fn sat_sets(a: SatSetsArgs) -> Outcome {
    let oca = load_valid(&a.oca)?;
    let f = formula(&a.formula, &oca)?;
    let mode = a.mode.resolve(&a.caps)?;
    let sets = ocasync::mc::sat_sets(&oca, &f, &mode, &a.mode.options())?;
    Ok((to_json(&sets)?, 0))
}

pub fn oracle(a: OracleArgs) -> Outcome {
    let oca = load_valid(&a.oca)?;
    let f = formula(&a.formula, &oca)?;
    let init = a.init.as_deref().map(|s| oca.parse_configuration(s)).transpose()?;
    let caps = a.caps.oracle();
    let tables = eval_tables(&oca, &f, caps, exec(a.sequential))?;
    let root = tables.dag.root();
    let table: BTreeMap<&str, String> = (0..oca.num_states())
        .map(|s| (oca.state_name(s), tables.row(root, s, a.v_max).iter().map(|t| t.letter()).collect()))
        .collect();
    let mut doc = json!({ "formula": f, "caps": caps, "vMax": a.v_max, "table": table });
    if let Some(c) = init {
        doc["init"] = json!(oca.show_configuration(c));
        doc["verdict"] = to_json(&tables.root(c))?;
    }
    Ok((doc, 0))
}

pub fn mine_period(a: MinePeriodArgs) -> Outcome {
    let oca = load_valid(&a.oca)?;
    let f = formula(&a.formula, &oca)?;
    if a.caps.v_cap < 2 {
        return Err(failure::input("--v-cap must be at least 2"));
    }
    let states: Vec<usize> = match &a.state {
        Some(name) => vec![oca.state_id(name).ok_or_else(|| failure::input(format!("unknown state `{name}`")))?],
        None => (0..oca.num_states()).collect(),
    };
    let mcaps = a.caps.mine();
    let tables = eval_tables(&oca, &f, mcaps.caps(), exec(a.sequential))?;
    let root = tables.dag.root();
    let per_state: BTreeMap<&str, Value> = states
        .iter()
        .map(|&s| Ok((oca.state_name(s), to_json(&mine_from_tables(&tables, root, s, mcaps.v_cap))?)))
        .collect::<Result<_>>()?;
    let uniform = match a.state {
        Some(_) => Value::Null,
        None => {
            mine_node(&tables, &oca, root, mcaps.v_cap).ok().map_or(Value::Null, |(t, p)| json!({ "t": t, "p": p }))
        }
    };
    Ok((
        json!({
            "formula": f,
            "mineCaps": mcaps,
            "perState": per_state,
            "uniform": uniform,
            "caveat": format!(
                "pairs fit the sampled verdicts on v in [0..{}] only; they are not proven periods",
                mcaps.v_cap
            ),
        }),
        0,
    ))
}

pub fn cross_check(a: CrossCheckArgs) -> Outcome {
    let oca = load_valid(&a.oca)?;
    let formulas = a.formula.iter().map(|t| formula(t, &oca)).collect::<Result<Vec<_>>>()?;
    let mode = a.mode.resolve(&a.caps)?;
    let opts = a.mode.options();
    let inits = all_inits(&oca, a.v_max);
    let reports =
        ocasync::oracle::cross::cross_check_many(&oca, &formulas, &inits, &mode, &opts, a.caps.oracle(), opts.exec);
    let sum = |g: fn(&ocasync::oracle::CrossReport) -> usize| reports.iter().map(g).sum::<usize>();
    let disagree = sum(|r| r.disagree);
    let doc = json!({
        "agree": sum(|r| r.agree),
        "disagree": disagree,
        "oracleUnknown": sum(|r| r.oracle_unknown),
        "mcErrors": sum(|r| r.mc_errors),
        "clean": disagree == 0,
        "reports": to_json(&reports)?,
    });
    Ok((doc, if disagree == 0 { 0 } else { failure::Kind::Internal.code() as u8 }))
}

pub fn lemma11(a: Lemma11Args) -> Outcome {
    let oca = load_valid(&a.oca)?;
    if a.prev_p == 0 {
        return Err(failure::input("--prev-p must be positive"));
    }
    let bundle = ua_constants(oca.num_states() as u64, &a.prev_t.into(), &a.prev_p.into(), Some(a.b))?;
    let mut samples = LemmaSamples { max_level: a.max_level, max_details: a.max_details, ..Default::default() };
    if let Some(v) = a.v_offsets {
        samples.v_offsets = v;
    }
    let report = ocasync::oracle::check_lemma11(&oca, &bundle, &samples)?;
    Ok((to_json(&report)?, 0))
}

pub fn lps(a: LpsArgs) -> Outcome {
    let oca = load_valid(&a.oca)?;
    let from = oca.parse_configuration(&a.from)?;
    let to = oca.parse_configuration(&a.to)?;
    let cap = from.counter + a.length as u64 + 1;
    let trace = oca.level_sets(from, a.length, cap);
    let reachable = trace.levels.get(a.length).is_some_and(|l| l.contains(&to));
    let found = find_shaped_witnesses(&oca, from, to, a.length, (a.flat_bound, a.size_bound), a.limit, a.max_paths);
    let mut witnesses = Vec::new();
    for (scheme, exps) in &found {
        let reps = analyze_cycle_repetitions(&oca, scheme, exps)?;
        let reps: Vec<Value> = reps.iter().map(|(s, n)| json!({ "slope": s.to_string(), "repetitions": n })).collect();
        witnesses.push(json!({
            "scheme": to_json(&scheme.describe(&oca))?,
            "exponents": exps,
            "slopeRepetitions": reps,
        }));
    }
    Ok((
        json!({
            "from": oca.show_configuration(from),
            "to": oca.show_configuration(to),
            "length": a.length,
            "flatBound": a.flat_bound,
            "sizeBound": a.size_bound,
            "reachable": reachable,
            "witnesses": witnesses,
        }),
        0,
    ))
}

pub fn validate(a: ValidateArgs) -> Outcome {
    let oca = load(&a.oca)?;
    let diagnostics = oca.validate();
    let doc = json!({
        "valid": diagnostics.is_empty(),
        "states": oca.num_states(),
        "atoms": oca.atoms().len(),
        "transitions": oca.transitions().len(),
        "diagnostics": diagnostics,
        "messages": diagnostics.iter().map(ToString::to_string).collect::<Vec<_>>(),
    });
    Ok((doc, if diagnostics.is_empty() { 0 } else { failure::Kind::Input.code() as u8 }))
}
