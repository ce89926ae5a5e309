//! One-counter automata and their configuration graphs.

mod dsl;
pub mod random;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use dsl::DslError;

pub type StateId = usize;
pub type AtomId = usize;

/// Counter test attached to a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Guard {
    /// Enabled only when the counter is zero.
    #[serde(rename = "=0")]
    Zero,
    /// Enabled only when the counter is positive.
    #[serde(rename = ">0")]
    Pos,
}

impl Guard {
    pub fn of(counter: u64) -> Guard {
        if counter == 0 {
            Guard::Zero
        } else {
            Guard::Pos
        }
    }

    fn index(self) -> usize {
        match self {
            Guard::Zero => 0,
            Guard::Pos => 1,
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Guard::Zero => "=0",
            Guard::Pos => ">0",
        })
    }
}

/// Counter update attached to a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Effect {
    Dec,
    Keep,
    Inc,
}

impl Effect {
    pub fn delta(self) -> i64 {
        match self {
            Effect::Dec => -1,
            Effect::Keep => 0,
            Effect::Inc => 1,
        }
    }

    pub fn from_delta(d: i64) -> Option<Effect> {
        match d {
            -1 => Some(Effect::Dec),
            0 => Some(Effect::Keep),
            1 => Some(Effect::Inc),
            _ => None,
        }
    }

    /// Counter after the update. Decrementing zero yields `None`.
    pub fn apply(self, v: u64) -> Option<u64> {
        match self {
            Effect::Dec => v.checked_sub(1),
            Effect::Keep => Some(v),
            Effect::Inc => Some(v.checked_add(1).expect("counter overflow")),
        }
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Effect::Dec => "-1",
            Effect::Keep => "0",
            Effect::Inc => "+1",
        })
    }
}

impl Serialize for Effect {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i64(self.delta())
    }
}

impl<'de> Deserialize<'de> for Effect {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        Effect::from_delta(v).ok_or_else(|| serde::de::Error::custom(format!("effect must be -1, 0 or 1, got {v}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub src: StateId,
    pub guard: Guard,
    pub effect: Effect,
    pub dst: StateId,
}

/// A state paired with a counter value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration {
    pub state: StateId,
    pub counter: u64,
}

impl Configuration {
    pub fn new(state: StateId, counter: u64) -> Self {
        Configuration { state, counter }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum OcaError {
    #[error("duplicate state name `{0}`")]
    DuplicateState(String),
    #[error("duplicate atom name `{0}`")]
    DuplicateAtom(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("state index {0} out of range")]
    StateOutOfRange(usize),
    #[error("atom index {0} out of range")]
    AtomOutOfRange(usize),
    #[error("automaton has no states")]
    Empty,
    #[error("invalid automaton: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error("malformed JSON automaton: {0}")]
    Json(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("bad configuration `{0}`, expected `state,counter`")]
    BadConfiguration(String),
}

/// A violated well-formedness condition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    /// No transition of the given guard leaves the state, so some
    /// configurations would have no successor.
    MissingSuccessor { state: String, guard: Guard },
    /// A zero-guarded transition decrements the counter.
    IllegalZeroDecrement { src: String, dst: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::MissingSuccessor { state, guard } => {
                write!(f, "state `{state}` has no transition with guard {guard}")
            }
            Diagnostic::IllegalZeroDecrement { src, dst } => {
                write!(f, "transition {src} -[=0,-1]-> {dst} decrements a zero counter")
            }
        }
    }
}

/// A one-counter automaton with labelled states.
///
/// Transitions are kept sorted and duplicate-free; `out[s][g]` lists the
/// indices of transitions leaving `s` under guard `g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Oca {
    state_names: Vec<String>,
    atom_names: Vec<String>,
    labels: Vec<BTreeSet<AtomId>>,
    transitions: Vec<Transition>,
    out: Vec<[Vec<usize>; 2]>,
}

impl Oca {
    /// Builds an automaton from raw parts. Indices are checked and duplicate
    /// transitions are dropped; well-formedness is left to [`Oca::validate`].
    pub fn new(
        state_names: Vec<String>,
        atom_names: Vec<String>,
        labels: Vec<BTreeSet<AtomId>>,
        transitions: Vec<Transition>,
    ) -> Result<Oca, OcaError> {
        if state_names.is_empty() {
            return Err(OcaError::Empty);
        }
        let mut seen = BTreeSet::new();
        for s in &state_names {
            if !seen.insert(s) {
                return Err(OcaError::DuplicateState(s.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for a in &atom_names {
            if !seen.insert(a) {
                return Err(OcaError::DuplicateAtom(a.clone()));
            }
        }
        let n = state_names.len();
        let mut labels = labels;
        if labels.len() > n {
            return Err(OcaError::StateOutOfRange(labels.len() - 1));
        }
        labels.resize(n, BTreeSet::new());
        for l in &labels {
            if let Some(&a) = l.iter().find(|&&a| a >= atom_names.len()) {
                return Err(OcaError::AtomOutOfRange(a));
            }
        }
        let mut transitions = transitions;
        for t in &transitions {
            for s in [t.src, t.dst] {
                if s >= n {
                    return Err(OcaError::StateOutOfRange(s));
                }
            }
        }
        transitions.sort();
        transitions.dedup();
        let mut out = vec![[Vec::new(), Vec::new()]; n];
        for (i, t) in transitions.iter().enumerate() {
            out[t.src][t.guard.index()].push(i);
        }
        Ok(Oca { state_names, atom_names, labels, transitions, out })
    }

    /// Starts a builder that refers to states and atoms by name.
    pub fn builder() -> OcaBuilder {
        OcaBuilder::default()
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.state_names[s]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|n| n == name)
    }

    pub fn atoms(&self) -> &[String] {
        &self.atom_names
    }

    pub fn atom_id(&self, name: &str) -> Option<AtomId> {
        self.atom_names.iter().position(|n| n == name)
    }

    pub fn labels(&self, s: StateId) -> &BTreeSet<AtomId> {
        &self.labels[s]
    }

    pub fn has_label(&self, s: StateId, a: AtomId) -> bool {
        self.labels[s].contains(&a)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Transitions leaving `s` under guard `g`.
    pub fn outgoing(&self, s: StateId, g: Guard) -> impl Iterator<Item = &Transition> + '_ {
        self.out[s][g.index()].iter().map(move |&i| &self.transitions[i])
    }

    /// Distinct control successors of `s`, ignoring guards.
    pub fn control_successors(&self, s: StateId) -> BTreeSet<StateId> {
        self.out[s].iter().flatten().map(|&i| self.transitions[i].dst).collect()
    }

    /// Checks totality and the zero-decrement rule, sorted by state.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        for s in 0..self.num_states() {
            for g in [Guard::Zero, Guard::Pos] {
                if self.out[s][g.index()].is_empty() {
                    diags.push(Diagnostic::MissingSuccessor { state: self.state_names[s].clone(), guard: g });
                }
            }
        }
        for t in &self.transitions {
            if t.guard == Guard::Zero && t.effect == Effect::Dec {
                diags.push(Diagnostic::IllegalZeroDecrement {
                    src: self.state_names[t.src].clone(),
                    dst: self.state_names[t.dst].clone(),
                });
            }
        }
        diags.sort();
        diags
    }

    /// `Ok` iff [`Oca::validate`] reports nothing.
    pub fn ensure_valid(&self) -> Result<(), OcaError> {
        let d = self.validate();
        if d.is_empty() {
            Ok(())
        } else {
            Err(OcaError::Invalid(d))
        }
    }

    /// Calls `f` on every successor of `c`, possibly with repeats.
    pub fn for_each_successor(&self, c: Configuration, mut f: impl FnMut(Configuration)) {
        for t in self.outgoing(c.state, Guard::of(c.counter)) {
            if let Some(v) = t.effect.apply(c.counter) {
                f(Configuration::new(t.dst, v));
            }
        }
    }

    /// The set of one-step successors of `c`.
    pub fn successors(&self, c: Configuration) -> BTreeSet<Configuration> {
        let mut out = BTreeSet::new();
        self.for_each_successor(c, |d| {
            out.insert(d);
        });
        out
    }

    /// Breadth-first level sets from `origin`, stopping after `level_cap` steps
    /// or at the first empty level. Successors with counter above
    /// `counter_cap` are dropped and the level is marked truncated.
    pub fn level_sets(&self, origin: Configuration, level_cap: usize, counter_cap: u64) -> LevelTrace {
        let mut levels = vec![BTreeSet::from([origin])];
        let mut truncated = vec![origin.counter > counter_cap];
        if origin.counter > counter_cap {
            levels[0].clear();
        }
        for _ in 0..level_cap {
            let prev = levels.last().unwrap();
            if prev.is_empty() {
                break;
            }
            let mut next = BTreeSet::new();
            let mut cut = false;
            for &c in prev {
                self.for_each_successor(c, |d| {
                    if d.counter > counter_cap {
                        cut = true;
                    } else {
                        next.insert(d);
                    }
                });
            }
            levels.push(next);
            truncated.push(cut);
        }
        LevelTrace { origin, counter_cap, levels, truncated }
    }

    /// Parses a `state,counter` pair such as `s,3`.
    pub fn parse_configuration(&self, text: &str) -> Result<Configuration, OcaError> {
        let bad = || OcaError::BadConfiguration(text.to_string());
        let (s, v) = text.split_once(',').ok_or_else(bad)?;
        let state = self.state_id(s.trim()).ok_or_else(|| OcaError::UnknownState(s.trim().to_string()))?;
        let counter = v.trim().parse::<u64>().map_err(|_| bad())?;
        Ok(Configuration::new(state, counter))
    }

    /// Renders a configuration as `state,counter`.
    pub fn show_configuration(&self, c: Configuration) -> String {
        format!("{},{}", self.state_names[c.state], c.counter)
    }

    /// Parses the line-oriented text format.
    pub fn from_dsl(text: &str) -> Result<Oca, OcaError> {
        dsl::parse(text)
    }

    /// Renders the text format; `from_dsl(to_dsl())` is the identity.
    pub fn to_dsl(&self) -> String {
        dsl::render(self)
    }

    pub fn from_json(text: &str) -> Result<Oca, OcaError> {
        let doc: OcaDoc = serde_json::from_str(text).map_err(|e| OcaError::Json(e.to_string()))?;
        doc.into_oca()
    }

    pub fn to_doc(&self) -> OcaDoc {
        OcaDoc::from_oca(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("serializable")
    }

    /// Parses either format; JSON is recognised by a leading `{`.
    pub fn parse_any(text: &str) -> Result<Oca, OcaError> {
        if text.trim_start().starts_with('{') {
            Oca::from_json(text)
        } else {
            Oca::from_dsl(text)
        }
    }

    pub fn load(path: &Path) -> Result<Oca, OcaError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| OcaError::Io { path: path.display().to_string(), msg: e.to_string() })?;
        Oca::parse_any(&text)
    }
}

/// Result of [`Oca::level_sets`]. `truncated[j]` records whether some
/// successor of level `j - 1` was dropped by the counter cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelTrace {
    pub origin: Configuration,
    pub counter_cap: u64,
    pub levels: Vec<BTreeSet<Configuration>>,
    pub truncated: Vec<bool>,
}

/// JSON mirror of the text format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OcaDoc {
    pub states: Vec<String>,
    #[serde(default)]
    pub atoms: Vec<String>,
    #[serde(default)]
    pub labels: BTreeMap<String, Vec<String>>,
    pub transitions: Vec<TransitionDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDoc {
    pub src: String,
    pub guard: Guard,
    pub effect: Effect,
    pub dst: String,
}

impl OcaDoc {
    pub fn from_oca(oca: &Oca) -> Self {
        let labels = (0..oca.num_states())
            .filter(|&s| !oca.labels[s].is_empty())
            .map(|s| {
                let atoms = oca.labels[s].iter().map(|&a| oca.atom_names[a].clone()).collect();
                (oca.state_names[s].clone(), atoms)
            })
            .collect();
        let transitions = oca
            .transitions
            .iter()
            .map(|t| TransitionDoc {
                src: oca.state_names[t.src].clone(),
                guard: t.guard,
                effect: t.effect,
                dst: oca.state_names[t.dst].clone(),
            })
            .collect();
        OcaDoc { states: oca.state_names.clone(), atoms: oca.atom_names.clone(), labels, transitions }
    }

    pub fn into_oca(self) -> Result<Oca, OcaError> {
        let mut b = Oca::builder();
        for s in &self.states {
            b.state(s)?;
        }
        for a in &self.atoms {
            b.atom(a)?;
        }
        for (s, atoms) in &self.labels {
            for a in atoms {
                b.label(s, a)?;
            }
        }
        for t in &self.transitions {
            b.transition(&t.src, t.guard, t.effect, &t.dst)?;
        }
        b.build()
    }
}

/// Name-based incremental construction of an [`Oca`].
#[derive(Debug, Default, Clone)]
pub struct OcaBuilder {
    states: Vec<String>,
    atoms: Vec<String>,
    labels: Vec<BTreeSet<AtomId>>,
    transitions: Vec<Transition>,
}

impl OcaBuilder {
    pub fn state(&mut self, name: &str) -> Result<StateId, OcaError> {
        if self.states.iter().any(|s| s == name) {
            return Err(OcaError::DuplicateState(name.to_string()));
        }
        self.states.push(name.to_string());
        self.labels.push(BTreeSet::new());
        Ok(self.states.len() - 1)
    }

    pub fn atom(&mut self, name: &str) -> Result<AtomId, OcaError> {
        if self.atoms.iter().any(|a| a == name) {
            return Err(OcaError::DuplicateAtom(name.to_string()));
        }
        self.atoms.push(name.to_string());
        Ok(self.atoms.len() - 1)
    }

    fn sid(&self, name: &str) -> Result<StateId, OcaError> {
        self.states.iter().position(|s| s == name).ok_or_else(|| OcaError::UnknownState(name.to_string()))
    }

    pub fn label(&mut self, state: &str, atom: &str) -> Result<&mut Self, OcaError> {
        let s = self.sid(state)?;
        let a = self.atoms.iter().position(|x| x == atom).ok_or_else(|| OcaError::UnknownAtom(atom.to_string()))?;
        self.labels[s].insert(a);
        Ok(self)
    }

    pub fn transition(&mut self, src: &str, guard: Guard, effect: Effect, dst: &str) -> Result<&mut Self, OcaError> {
        let src = self.sid(src)?;
        let dst = self.sid(dst)?;
        self.transitions.push(Transition { src, guard, effect, dst });
        Ok(self)
    }

    pub fn build(self) -> Result<Oca, OcaError> {
        Oca::new(self.states, self.atoms, self.labels, self.transitions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn countdown() -> Oca {
        Oca::from_dsl(
            "states: s, t\natoms: p, q\nlabel s = {q}\nlabel t = {p}\n\
             s -[>0,-1]-> s\ns -[=0,0]-> t\nt -[>0,0]-> t\nt -[=0,0]-> t\n",
        )
        .unwrap()
    }

    #[test]
    fn successors_follow_guards() {
        let oca = countdown();
        let s = oca.state_id("s").unwrap();
        let t = oca.state_id("t").unwrap();
        assert_eq!(oca.successors(Configuration::new(s, 3)), BTreeSet::from([Configuration::new(s, 2)]));
        assert_eq!(oca.successors(Configuration::new(s, 0)), BTreeSet::from([Configuration::new(t, 0)]));
        assert!(oca.validate().is_empty());
    }

    #[test]
    fn validation_reports_missing_guards_and_zero_decrement() {
        let mut b = Oca::builder();
        b.state("s").unwrap();
        b.transition("s", Guard::Zero, Effect::Dec, "s").unwrap();
        let oca = b.build().unwrap();
        let d = oca.validate();
        assert_eq!(
            d,
            vec![
                Diagnostic::MissingSuccessor { state: "s".into(), guard: Guard::Pos },
                Diagnostic::IllegalZeroDecrement { src: "s".into(), dst: "s".into() },
            ]
        );
        assert!(oca.ensure_valid().is_err());
    }

    #[test]
    fn duplicate_transitions_collapse() {
        let mut b = Oca::builder();
        b.state("s").unwrap();
        for _ in 0..3 {
            b.transition("s", Guard::Pos, Effect::Keep, "s").unwrap();
        }
        b.transition("s", Guard::Zero, Effect::Keep, "s").unwrap();
        let oca = b.build().unwrap();
        assert_eq!(oca.transitions().len(), 2);
    }

    #[test]
    fn level_sets_of_increment_loop_truncate() {
        let oca = Oca::from_dsl("states: s\ns -[=0,+1]-> s\ns -[>0,+1]-> s\n").unwrap();
        let tr = oca.level_sets(Configuration::new(0, 0), 5, 3);
        assert_eq!(tr.levels.len(), 5);
        assert_eq!(tr.levels[3], BTreeSet::from([Configuration::new(0, 3)]));
        assert!(tr.levels[4].is_empty());
        assert_eq!(tr.truncated, vec![false, false, false, false, true]);
    }

    #[test]
    fn json_roundtrip() {
        let oca = countdown();
        let back = Oca::from_json(&oca.to_json()).unwrap();
        assert_eq!(back, oca);
        assert_eq!(Oca::parse_any(&oca.to_json()).unwrap(), oca);
    }

    #[test]
    fn configuration_text() {
        let oca = countdown();
        let c = oca.parse_configuration("t, 7").unwrap();
        assert_eq!(oca.show_configuration(c), "t,7");
        assert!(oca.parse_configuration("x,1").is_err());
        assert!(oca.parse_configuration("s").is_err());
    }
}
