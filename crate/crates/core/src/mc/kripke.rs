//! Finite Kripke structures and the folding of an automaton into one.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use fixedbitset::FixedBitSet;

use crate::oca::{Configuration, Oca, StateId};

pub type NodeSet = FixedBitSet;

/// Finite directed graph with atom labels. Nodes folded from an automaton
/// also record the `(state, counter)` they stand for.
#[derive(Debug, Clone, Default)]
pub struct Kripke {
    atoms: Vec<String>,
    labels: Vec<BTreeSet<usize>>,
    succ: Vec<Vec<usize>>,
    provenance: Vec<Option<Configuration>>,
    pred: OnceLock<Vec<Vec<usize>>>,
}

impl Kripke {
    pub fn new(atoms: &[&str]) -> Kripke {
        Kripke { atoms: atoms.iter().map(|s| s.to_string()).collect(), ..Default::default() }
    }

    /// Adds a node labelled with the given atoms, which must be declared.
    pub fn add_node(&mut self, labels: &[&str]) -> usize {
        let set = labels
            .iter()
            .map(|l| self.atoms.iter().position(|a| a == l).unwrap_or_else(|| panic!("undeclared atom {l}")))
            .collect();
        self.labels.push(set);
        self.succ.push(Vec::new());
        self.provenance.push(None);
        self.pred = OnceLock::new();
        self.labels.len() - 1
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        let s = &mut self.succ[from];
        if let Err(pos) = s.binary_search(&to) {
            s.insert(pos, to);
        }
        self.pred = OnceLock::new();
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn successors(&self, u: usize) -> &[usize] {
        &self.succ[u]
    }

    pub fn predecessors(&self, u: usize) -> &[usize] {
        &self.preds()[u]
    }

    fn preds(&self) -> &Vec<Vec<usize>> {
        self.pred.get_or_init(|| {
            let mut p = vec![Vec::new(); self.len()];
            for (u, ss) in self.succ.iter().enumerate() {
                for &v in ss {
                    p[v].push(u);
                }
            }
            p
        })
    }

    pub fn provenance(&self, u: usize) -> Option<Configuration> {
        self.provenance[u]
    }

    /// Every node has a successor.
    pub fn is_total(&self) -> bool {
        self.succ.iter().all(|s| !s.is_empty())
    }

    pub fn empty_set(&self) -> NodeSet {
        FixedBitSet::with_capacity(self.len())
    }

    pub fn full_set(&self) -> NodeSet {
        let mut s = self.empty_set();
        s.insert_range(..);
        s
    }

    /// Nodes labelled with `atom`; empty if the atom is unknown.
    pub fn sat_atom(&self, atom: &str) -> NodeSet {
        let mut s = self.empty_set();
        if let Some(a) = self.atoms.iter().position(|x| x == atom) {
            for (u, l) in self.labels.iter().enumerate() {
                if l.contains(&a) {
                    s.insert(u);
                }
            }
        }
        s
    }

    /// Image of a node set under the edge relation.
    pub fn post(&self, set: &NodeSet) -> NodeSet {
        let mut out = self.empty_set();
        for u in set.ones() {
            for &v in &self.succ[u] {
                out.insert(v);
            }
        }
        out
    }

    /// Nodes with at least one successor in `set`.
    pub fn pre_exists(&self, set: &NodeSet) -> NodeSet {
        let mut out = self.empty_set();
        for v in set.ones() {
            for &u in self.predecessors(v) {
                out.insert(u);
            }
        }
        out
    }
}

/// Folds `oca` into nodes `states × [0, t + p)`. Node `(s, c)` stands for
/// counter value `c`; its edges are the automaton's moves from `(s, c)`, with
/// target counters `w >= t + p` identified with `t + ((w − t) mod p)`, the
/// unique class in `[t, t + p)` congruent to `w`.
pub fn unfold_kripke(oca: &Oca, t: u64, p: u64) -> Kripke {
    assert!(p >= 1, "period must be positive");
    let width = t + p;
    let n = oca.num_states();
    let atoms: Vec<&str> = oca.atoms().iter().map(String::as_str).collect();
    let mut k = Kripke::new(&atoms);
    let total = n * width as usize;
    k.labels = Vec::with_capacity(total);
    for s in 0..n {
        for c in 0..width {
            k.labels.push(oca.labels(s).clone());
            k.provenance.push(Some(Configuration::new(s, c)));
            let mut out: Vec<usize> = Vec::new();
            oca.for_each_successor(Configuration::new(s, c), |d| {
                out.push(node_of(d.state, class_of(d.counter, t, p), width));
            });
            out.sort_unstable();
            out.dedup();
            k.succ.push(out);
        }
    }
    k
}

/// The class in `[0, t + p)` representing counter `v`.
pub fn class_of(v: u64, t: u64, p: u64) -> u64 {
    if v < t + p {
        v
    } else {
        t + (v - t) % p
    }
}

/// Node index of `(state, class)` in an unfolded structure of the given width.
pub fn node_of(state: StateId, class: u64, width: u64) -> usize {
    state * width as usize + class as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn countdown() -> Oca {
        Oca::from_dsl(
            "states: s, t\natoms: p\nlabel t = {p}\ns -[>0,-1]-> s\ns -[=0,0]-> t\nt -[>0,0]-> t\nt -[=0,0]-> t\n",
        )
        .unwrap()
    }

    #[test]
    fn size_is_states_times_width() {
        let k = unfold_kripke(&countdown(), 1, 1);
        assert_eq!(k.len(), 4);
        assert!(k.is_total());
    }

    #[test]
    fn single_class_uses_the_zero_moves() {
        let oca = countdown();
        let k = unfold_kripke(&oca, 0, 1);
        assert_eq!(k.len(), 2);
        // class 0 stands for counter 0, so only the zero-guarded move of s
        assert_eq!(k.successors(0), &[1]);
        assert_eq!(k.successors(1), &[1]);
    }

    #[test]
    fn increment_loop_wraps_congruently() {
        let oca = Oca::from_dsl("states: s\ns -[=0,+1]-> s\ns -[>0,+1]-> s\n").unwrap();
        let k = unfold_kripke(&oca, 2, 3);
        assert_eq!(k.len(), 5);
        // 4 -> 5, and 5 ≡ 2 (mod 3) lands in class 2
        assert_eq!(k.successors(4), &[2]);
        assert_eq!(k.successors(1), &[2]);
    }

    #[test]
    fn edges_project_the_automaton() {
        // exhaustive: the class of every successor of v is a successor of the
        // class of v, for v up to t + 3p
        let oca = Oca::from_dsl(
            "states: a, b\natoms: p\nlabel b = {p}\n\
             a -[>0,-1]-> b\na -[>0,+1]-> a\na -[=0,+1]-> b\nb -[>0,-1]-> a\nb -[=0,0]-> b\n",
        )
        .unwrap();
        for (t, p) in [(0, 1), (1, 2), (3, 2), (2, 5)] {
            let k = unfold_kripke(&oca, t, p);
            for s in 0..2 {
                for v in 0..=t + 3 * p {
                    let here = node_of(s, class_of(v, t, p), t + p);
                    if v >= t + p {
                        continue;
                    }
                    let want: BTreeSet<usize> = oca
                        .successors(Configuration::new(s, v))
                        .into_iter()
                        .map(|d| node_of(d.state, class_of(d.counter, t, p), t + p))
                        .collect();
                    let got: BTreeSet<usize> = k.successors(here).iter().copied().collect();
                    assert_eq!(got, want);
                }
            }
        }
    }

    #[test]
    fn fixpoint_helpers() {
        let mut k = Kripke::new(&["x"]);
        let a = k.add_node(&["x"]);
        let b = k.add_node(&[]);
        k.add_edge(a, b);
        k.add_edge(b, b);
        k.add_edge(a, b);
        assert_eq!(k.successors(a), &[b]);
        let x = k.sat_atom("x");
        assert_eq!(k.post(&x).ones().collect::<Vec<_>>(), vec![b]);
        let mut bs = k.empty_set();
        bs.insert(b);
        assert_eq!(k.pre_exists(&bs).ones().collect::<Vec<_>>(), vec![a, b]);
    }
}
