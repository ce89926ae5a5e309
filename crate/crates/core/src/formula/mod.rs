//! CTL+Sync syntax.
//!
//! Only nine node kinds exist; the usual derived operators are expanded by
//! the constructors below and by the parser.

mod parser;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::Rng;
use serde::{Serialize, Serializer};

pub use parser::{parse, ParseError};

use crate::oca::Oca;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Ex(Box<Formula>),
    /// `E φ U ψ`
    Eu(Box<Formula>, Box<Formula>),
    /// `A φ U ψ`
    Au(Box<Formula>, Box<Formula>),
    /// `φ UA ψ`: all paths reach ψ at one common level, with φ before it.
    Ua(Box<Formula>, Box<Formula>),
    /// `φ UE ψ`: some level k such that every earlier level has a φ-state
    /// that reaches ψ exactly at level k.
    Ue(Box<Formula>, Box<Formula>),
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("formula uses atom `{0}` which the automaton does not declare")]
pub struct UnknownAtom(pub String);

impl Formula {
    pub fn atom(name: &str) -> Formula {
        Formula::Atom(name.to_string())
    }

    pub fn falsum() -> Formula {
        Formula::negate(Formula::True)
    }

    pub fn negate(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::negate(Formula::and(Formula::negate(a), Formula::negate(b)))
    }

    pub fn ex(f: Formula) -> Formula {
        Formula::Ex(Box::new(f))
    }

    pub fn ax(f: Formula) -> Formula {
        Formula::negate(Formula::ex(Formula::negate(f)))
    }

    pub fn eu(a: Formula, b: Formula) -> Formula {
        Formula::Eu(Box::new(a), Box::new(b))
    }

    pub fn au(a: Formula, b: Formula) -> Formula {
        Formula::Au(Box::new(a), Box::new(b))
    }

    pub fn ef(f: Formula) -> Formula {
        Formula::eu(Formula::True, f)
    }

    pub fn af(f: Formula) -> Formula {
        Formula::au(Formula::True, f)
    }

    pub fn eg(f: Formula) -> Formula {
        Formula::negate(Formula::af(Formula::negate(f)))
    }

    pub fn ag(f: Formula) -> Formula {
        Formula::negate(Formula::ef(Formula::negate(f)))
    }

    pub fn ua(a: Formula, b: Formula) -> Formula {
        Formula::Ua(Box::new(a), Box::new(b))
    }

    pub fn ue(a: Formula, b: Formula) -> Formula {
        Formula::Ue(Box::new(a), Box::new(b))
    }

    pub fn fa(f: Formula) -> Formula {
        Formula::ua(Formula::True, f)
    }

    pub fn fe(f: Formula) -> Formula {
        Formula::ue(Formula::True, f)
    }

    pub fn ga(f: Formula) -> Formula {
        Formula::negate(Formula::fe(Formula::negate(f)))
    }

    pub fn ge(f: Formula) -> Formula {
        Formula::negate(Formula::fa(Formula::negate(f)))
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::True | Formula::Atom(_) => vec![],
            Formula::Not(a) | Formula::Ex(a) => vec![a],
            Formula::And(a, b) | Formula::Eu(a, b) | Formula::Au(a, b) | Formula::Ua(a, b) | Formula::Ue(a, b) => {
                vec![a, b]
            }
        }
    }

    /// Temporal and synchronization operators count, boolean ones do not.
    pub fn nesting_depth(&self) -> usize {
        let inner = self.children().iter().map(|c| c.nesting_depth()).max().unwrap_or(0);
        match self {
            Formula::True | Formula::Atom(_) => 0,
            Formula::Not(_) | Formula::And(..) => inner,
            _ => inner + 1,
        }
    }

    /// True when no temporal or synchronization operator occurs, so truth
    /// depends only on the control state.
    pub fn is_static(&self) -> bool {
        self.nesting_depth() == 0
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        if let Formula::Atom(a) = self {
            out.insert(a);
        }
        for c in self.children() {
            c.collect_atoms(out);
        }
    }

    /// Checks that every atom is declared by `oca`.
    pub fn bind(&self, oca: &Oca) -> Result<(), UnknownAtom> {
        match self.atoms().into_iter().find(|a| oca.atom_id(a).is_none()) {
            Some(a) => Err(UnknownAtom(a.to_string())),
            None => Ok(()),
        }
    }

    pub fn contains_sync(&self) -> bool {
        matches!(self, Formula::Ua(..) | Formula::Ue(..)) || self.children().iter().any(|c| c.contains_sync())
    }

    pub fn contains_ue(&self) -> bool {
        matches!(self, Formula::Ue(..)) || self.children().iter().any(|c| c.contains_ue())
    }

    /// Distinct subformulas, children before parents; the root is last.
    pub fn dag(&self) -> Dag {
        let mut dag = Dag { nodes: Vec::new() };
        let mut index = HashMap::new();
        dag.insert(self, &mut index);
        dag
    }

    /// Random formula over `atoms` with at most `depth` temporal nesting.
    pub fn random(rng: &mut impl Rng, atoms: &[&str], depth: usize) -> Formula {
        let leaf = |rng: &mut dyn rand::RngCore| {
            if atoms.is_empty() || rng.gen_bool(0.15) {
                Formula::True
            } else {
                Formula::atom(atoms[rng.gen_range(0..atoms.len())])
            }
        };
        if rng.gen_bool(if depth == 0 { 0.6 } else { 0.25 }) {
            return leaf(rng);
        }
        let kinds = if depth == 0 { 2 } else { 7 };
        match rng.gen_range(0..kinds) {
            0 => Formula::negate(Formula::random(rng, atoms, depth)),
            1 => Formula::and(Formula::random(rng, atoms, depth), Formula::random(rng, atoms, depth)),
            2 => Formula::ex(Formula::random(rng, atoms, depth - 1)),
            3 => Formula::eu(Formula::random(rng, atoms, depth - 1), Formula::random(rng, atoms, depth - 1)),
            4 => Formula::au(Formula::random(rng, atoms, depth - 1), Formula::random(rng, atoms, depth - 1)),
            5 => Formula::ua(Formula::random(rng, atoms, depth - 1), Formula::random(rng, atoms, depth - 1)),
            _ => Formula::ue(Formula::random(rng, atoms, depth - 1), Formula::random(rng, atoms, depth - 1)),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::Atom(a) => f.write_str(a),
            Formula::Not(a) => write!(f, "!{a}"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Ex(a) => write!(f, "EX {a}"),
            Formula::Eu(a, b) => write!(f, "(E {a} U {b})"),
            Formula::Au(a, b) => write!(f, "(A {a} U {b})"),
            Formula::Ua(a, b) => write!(f, "({a} UA {b})"),
            Formula::Ue(a, b) => write!(f, "({a} UE {b})"),
        }
    }
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Node of a [`Dag`], with children given as indices into the node list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    True,
    Atom,
    Not(usize),
    And(usize, usize),
    Ex(usize),
    Eu(usize, usize),
    Au(usize, usize),
    Ua(usize, usize),
    Ue(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DagNode {
    pub formula: Formula,
    pub kind: NodeKind,
}

/// The distinct subformulas of a formula in topological order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    pub nodes: Vec<DagNode>,
}

impl Dag {
    fn insert(&mut self, f: &Formula, index: &mut HashMap<Formula, usize>) -> usize {
        if let Some(&i) = index.get(f) {
            return i;
        }
        let mut child = |c: &Formula| self.insert(c, index);
        let kind = match f {
            Formula::True => NodeKind::True,
            Formula::Atom(_) => NodeKind::Atom,
            Formula::Not(a) => NodeKind::Not(child(a)),
            Formula::Ex(a) => NodeKind::Ex(child(a)),
            Formula::And(a, b) => {
                let a = child(a);
                NodeKind::And(a, child(b))
            }
            Formula::Eu(a, b) => {
                let a = child(a);
                NodeKind::Eu(a, child(b))
            }
            Formula::Au(a, b) => {
                let a = child(a);
                NodeKind::Au(a, child(b))
            }
            Formula::Ua(a, b) => {
                let a = child(a);
                NodeKind::Ua(a, child(b))
            }
            Formula::Ue(a, b) => {
                let a = child(a);
                NodeKind::Ue(a, child(b))
            }
        };
        self.nodes.push(DagNode { formula: f.clone(), kind });
        index.insert(f.clone(), self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }
}
