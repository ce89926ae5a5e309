//! Three-valued evaluation of CTL+Sync over the configurations with counter
//! at most a cap.
//!
//! Configurations above the cap are not explored. Their influence is tracked
//! conservatively: for the fixpoint operators by computing an under- and an
//! over-approximation, for the synchronized operators by a mask of control
//! states that untracked configurations may occupy. A definite answer is
//! always the true one; anything the cap might change is `Unknown`.

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::exec::Exec;
use crate::formula::{Dag, Formula, NodeKind, UnknownAtom};
use crate::oca::{Configuration, Oca, OcaError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl std::ops::Not for Truth {
    type Output = Truth;

    fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }
}

impl Truth {
    pub fn from_bool(b: bool) -> Truth {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }

    pub fn is_definite(self) -> bool {
        self != Truth::Unknown
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Truth::True => Some(true),
            Truth::False => Some(false),
            Truth::Unknown => None,
        }
    }

    pub fn and(self, o: Truth) -> Truth {
        match (self, o) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::True, Truth::True) => Truth::True,
            _ => Truth::Unknown,
        }
    }

    pub fn or(self, o: Truth) -> Truth {
        !(!self).and(!o)
    }

    /// Short letter used in verdict tables.
    pub fn letter(self) -> char {
        match self {
            Truth::True => 'T',
            Truth::False => 'F',
            Truth::Unknown => 'U',
        }
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truth::True => "TRUE",
            Truth::False => "FALSE",
            Truth::Unknown => "UNKNOWN",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Caps {
    /// Largest counter value explored.
    pub counter_cap: u64,
    /// Largest level examined by `UA` and `UE`.
    pub level_cap: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { counter_cap: 60, level_cap: 200 }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    Oca(#[from] OcaError),
    #[error(transparent)]
    UnknownAtom(#[from] UnknownAtom),
    #[error("counter cap {0} does not fit in memory")]
    CapTooLarge(u64),
}

/// Configuration graph restricted to counters `<= cap`.
struct Graph {
    n: usize,
    width: usize,
    succ: Vec<Vec<usize>>,
    /// States of successors above the cap.
    escape: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    ctrl: Vec<Vec<usize>>,
}

impl Graph {
    fn new(oca: &Oca, cap: u64) -> Graph {
        let n = oca.num_states();
        let width = cap as usize + 1;
        let size = n * width;
        let mut succ = vec![Vec::new(); size];
        let mut escape = vec![Vec::new(); size];
        let mut pred = vec![Vec::new(); size];
        for s in 0..n {
            for v in 0..=cap {
                let x = s * width + v as usize;
                oca.for_each_successor(Configuration::new(s, v), |d| {
                    if d.counter > cap {
                        escape[x].push(d.state);
                    } else {
                        let y = d.state * width + d.counter as usize;
                        succ[x].push(y);
                        pred[y].push(x);
                    }
                });
                succ[x].sort_unstable();
                succ[x].dedup();
                escape[x].sort_unstable();
                escape[x].dedup();
            }
        }
        for p in &mut pred {
            p.sort_unstable();
            p.dedup();
        }
        let ctrl = (0..n).map(|s| oca.control_successors(s).into_iter().collect()).collect();
        Graph { n, width, succ, escape, pred, ctrl }
    }

    fn size(&self) -> usize {
        self.n * self.width
    }

    fn state(&self, x: usize) -> usize {
        x / self.width
    }

    fn empty(&self) -> FixedBitSet {
        FixedBitSet::with_capacity(self.size())
    }

    fn pre(&self, set: &FixedBitSet) -> FixedBitSet {
        let mut out = self.empty();
        for y in set.ones() {
            for &x in &self.pred[y] {
                out.insert(x);
            }
        }
        out
    }
}

/// Truth tables of every subformula over `states × [0, counterCap]`.
#[derive(Debug, Clone)]
pub struct Tables {
    pub caps: Caps,
    pub dag: Dag,
    width: usize,
    values: Vec<Vec<Truth>>,
}

impl Tables {
    /// Value of DAG node `node` at `c`. Above the cap this is `Unknown`
    /// unless the subformula does not depend on the counter.
    pub fn get(&self, node: usize, c: Configuration) -> Truth {
        if c.counter <= self.caps.counter_cap {
            self.values[node][c.state * self.width + c.counter as usize]
        } else if self.dag.nodes[node].formula.is_static() {
            self.values[node][c.state * self.width]
        } else {
            Truth::Unknown
        }
    }

    /// Value of the whole formula at `c`.
    pub fn root(&self, c: Configuration) -> Truth {
        self.get(self.dag.root(), c)
    }

    /// Row `v = 0..=up_to` of node `node` at `state`, clamped to the cap.
    pub fn row(&self, node: usize, state: usize, up_to: u64) -> Vec<Truth> {
        (0..=up_to).map(|v| self.get(node, Configuration::new(state, v))).collect()
    }
}

/// Evaluates `f` at one configuration.
pub fn eval_bounded(oca: &Oca, c: Configuration, f: &Formula, caps: Caps) -> Result<Truth, OracleError> {
    Ok(eval_tables(oca, f, caps, Exec::default())?.root(c))
}

/// Evaluates every subformula of `f` at every configuration within the cap.
pub fn eval_tables(oca: &Oca, f: &Formula, caps: Caps, exec: Exec) -> Result<Tables, OracleError> {
    oca.ensure_valid()?;
    f.bind(oca)?;
    if caps.counter_cap > (1 << 24) {
        return Err(OracleError::CapTooLarge(caps.counter_cap));
    }
    let g = Graph::new(oca, caps.counter_cap);
    let dag = f.dag();
    let mut values: Vec<Vec<Truth>> = Vec::with_capacity(dag.len());
    for node in &dag.nodes {
        let row = match node.kind {
            NodeKind::True => vec![Truth::True; g.size()],
            NodeKind::Atom => {
                let a = match &node.formula {
                    Formula::Atom(a) => oca.atom_id(a).expect("bound atom"),
                    _ => unreachable!("atom node holds an atom"),
                };
                (0..g.size()).map(|x| Truth::from_bool(oca.has_label(g.state(x), a))).collect()
            }
            NodeKind::Not(a) => values[a].iter().map(|&t| !t).collect(),
            NodeKind::And(a, b) => values[a].iter().zip(&values[b]).map(|(x, y)| x.and(*y)).collect(),
            NodeKind::Ex(a) => {
                let child = Child::new(&dag, &values, a, &g);
                (0..g.size())
                    .map(|x| {
                        let inside = g.succ[x].iter().fold(Truth::False, |acc, &y| acc.or(values[a][y]));
                        g.escape[x].iter().fold(inside, |acc, &s| acc.or(child.outside(s)))
                    })
                    .collect()
            }
            NodeKind::Eu(a, b) => until(&g, &values[a], &values[b], false),
            NodeKind::Au(a, b) => until(&g, &values[a], &values[b], true),
            NodeKind::Ua(a, b) => {
                let ca = Child::new(&dag, &values, a, &g);
                let cb = Child::new(&dag, &values, b, &g);
                exec.map_range(g.size(), |x| ua_at(&g, x, &ca, &cb, caps.level_cap))
            }
            NodeKind::Ue(a, b) => {
                let ca = Child::new(&dag, &values, a, &g);
                let back = BackOrbit::new(&g, &values[b], caps.level_cap);
                exec.map_range(g.size(), |x| ue_at(&g, x, &ca, &values[b], &back, caps.level_cap))
            }
        };
        values.push(row);
    }
    Ok(Tables { caps, dag, width: g.width, values })
}

/// Three-valued lfp of `X = b ∪ (a ∩ pre(X))` with an existential or
/// universal predecessor: `True` where the under-approximation holds,
/// `False` outside the over-approximation.
fn until(g: &Graph, a: &[Truth], b: &[Truth], universal: bool) -> Vec<Truth> {
    let definite = lfp(g, |x| a[x] == Truth::True, |x| b[x] == Truth::True, universal, false);
    let possible = lfp(g, |x| a[x] != Truth::False, |x| b[x] != Truth::False, universal, true);
    (0..g.size())
        .map(|x| {
            if definite.contains(x) {
                Truth::True
            } else if possible.contains(x) {
                Truth::Unknown
            } else {
                Truth::False
            }
        })
        .collect()
}

/// Least fixpoint on the capped graph where successors above the cap count
/// as members iff `escapes_help`.
fn lfp(
    g: &Graph,
    a: impl Fn(usize) -> bool,
    b: impl Fn(usize) -> bool,
    universal: bool,
    escapes_help: bool,
) -> FixedBitSet {
    let mut pending: Vec<usize> =
        (0..g.size()).map(|x| g.succ[x].len() + if escapes_help { 0 } else { g.escape[x].len() }).collect();
    let mut inn = g.empty();
    let mut queue = Vec::new();
    for (x, &left) in pending.iter().enumerate() {
        let via_escape = escapes_help && a(x) && !g.escape[x].is_empty() && (!universal || left == 0);
        if b(x) || via_escape {
            inn.insert(x);
            queue.push(x);
        }
    }
    while let Some(y) = queue.pop() {
        for &x in &g.pred[y] {
            if universal {
                pending[x] -= 1;
            }
            if inn.contains(x) || !a(x) || (universal && pending[x] > 0) {
                continue;
            }
            inn.insert(x);
            queue.push(x);
        }
    }
    inn
}

/// A child subformula's values, with its behaviour above the cap.
struct Child<'a> {
    values: &'a [Truth],
    /// Per-state value when the subformula ignores the counter.
    by_state: Option<Vec<Truth>>,
}

impl<'a> Child<'a> {
    fn new(dag: &Dag, values: &'a [Vec<Truth>], idx: usize, g: &Graph) -> Child<'a> {
        let by_state = dag.nodes[idx].formula.is_static().then(|| (0..g.n).map(|s| values[idx][s * g.width]).collect());
        Child { values: &values[idx], by_state }
    }

    fn outside(&self, state: usize) -> Truth {
        self.by_state.as_ref().map_or(Truth::Unknown, |v| v[state])
    }

    /// What untracked configurations with states in `mask` contribute to the
    /// claim "every configuration satisfies the child".
    fn phantom_all(&self, mask: &FixedBitSet) -> Truth {
        if mask.is_clear() {
            return Truth::True;
        }
        match &self.by_state {
            Some(v) => {
                let mut it = mask.ones().map(|s| v[s]);
                let first = it.next().expect("nonempty mask");
                if it.all(|t| t == first) {
                    first
                } else {
                    Truth::Unknown
                }
            }
            None => Truth::Unknown,
        }
    }

    fn all(&self, level: &FixedBitSet, mask: &FixedBitSet) -> Truth {
        level.ones().fold(self.phantom_all(mask), |acc, x| acc.and(self.values[x]))
    }
}

/// Tracked part of a level together with the states of untracked ones.
#[derive(Clone, PartialEq, Eq, Hash)]
struct Level {
    inside: FixedBitSet,
    mask: FixedBitSet,
}

impl Level {
    fn start(g: &Graph, x: usize) -> Level {
        let mut inside = g.empty();
        inside.insert(x);
        Level { inside, mask: FixedBitSet::with_capacity(g.n) }
    }

    fn step(&self, g: &Graph) -> Level {
        let mut inside = g.empty();
        let mut mask = FixedBitSet::with_capacity(g.n);
        for x in self.inside.ones() {
            for &y in &g.succ[x] {
                inside.insert(y);
            }
            for &s in &g.escape[x] {
                mask.insert(s);
            }
        }
        for s in self.mask.ones() {
            for &d in &g.ctrl[s] {
                mask.insert(d);
            }
        }
        Level { inside, mask }
    }
}

fn ua_at(g: &Graph, x: usize, a: &Child, b: &Child, level_cap: u64) -> Truth {
    let mut level = Level::start(g, x);
    let mut seen: std::collections::HashSet<Level> = std::collections::HashSet::new();
    let mut acc = Truth::False;
    let mut prefix = Truth::True;
    for _ in 0..=level_cap {
        if !seen.insert(level.clone()) {
            return acc;
        }
        acc = acc.or(prefix.and(b.all(&level.inside, &level.mask)));
        if acc == Truth::True {
            return acc;
        }
        prefix = prefix.and(a.all(&level.inside, &level.mask));
        if prefix == Truth::False {
            return acc;
        }
        level = level.step(g);
    }
    acc.or(Truth::Unknown)
}

/// `(Def_m, Poss_m)`: configurations with a path of exactly `m` steps to a
/// definite, respectively possible, target.
struct BackOrbit {
    items: Vec<(FixedBitSet, FixedBitSet)>,
    /// `(mu, lambda)` once the orbit has closed.
    shape: Option<(u64, u64)>,
}

impl BackOrbit {
    fn new(g: &Graph, b: &[Truth], level_cap: u64) -> BackOrbit {
        let mut def = g.empty();
        let mut poss = g.empty();
        for (x, &t) in b.iter().enumerate() {
            def.set(x, t == Truth::True);
            poss.set(x, t != Truth::False);
        }
        let mut escapes = g.empty();
        for x in 0..g.size() {
            escapes.set(x, !g.escape[x].is_empty());
        }
        let (items, shape) = orbit(
            (def, poss),
            |(d, p)| {
                let mut np = g.pre(p);
                np.union_with(&escapes);
                (g.pre(d), np)
            },
            level_cap,
        );
        BackOrbit { items, shape }
    }
}

/// Orbit of `step` from `start`, stopping at the first repetition or after
/// `cap + 1` items.
fn orbit<T: Clone + Eq + std::hash::Hash>(start: T, step: impl Fn(&T) -> T, cap: u64) -> (Vec<T>, Option<(u64, u64)>) {
    let mut index: HashMap<T, u64> = HashMap::new();
    let mut items = Vec::new();
    let mut cur = start;
    while items.len() as u64 <= cap {
        if let Some(&first) = index.get(&cur) {
            let len = items.len() as u64;
            return (items, Some((first, len - first)));
        }
        index.insert(cur.clone(), items.len() as u64);
        let next = step(&cur);
        items.push(cur);
        cur = next;
    }
    (items, None)
}

fn class(shape: Option<(u64, u64)>, i: u64) -> u64 {
    match shape {
        Some((mu, lam)) if i >= mu => mu + (i - mu) % lam,
        _ => i,
    }
}

fn ue_at(g: &Graph, x: usize, a: &Child, b: &[Truth], back: &BackOrbit, level_cap: u64) -> Truth {
    let start = b[x];
    if start == Truth::True {
        return Truth::True;
    }
    let (fwd, fshape) = orbit(Level::start(g, x), |l| l.step(g), level_cap);
    // levels below this are decided by the periodicity of both orbits
    let horizon = match (fshape, back.shape) {
        (Some((m1, l1)), Some((m2, l2))) => crate::arith::lcm(l1, l2).map(|lam| m1 + m2 + 2 * lam),
        _ => None,
    };
    let (last, complete) = match horizon {
        Some(h) if h <= level_cap + 1 => (h, true),
        _ => (level_cap + 1, false),
    };
    let level = |j: u64| &fwd[class(fshape, j) as usize];
    let target = |m: u64| &back.items[class(back.shape, m) as usize];
    let mut memo: HashMap<(u64, u64), Truth> = HashMap::new();
    let mut acc = start;
    for k in 1..last {
        let mut conj = Truth::True;
        for j in 0..k {
            if j as usize >= fwd.len() && fshape.is_none()
                || (k - j) as usize >= back.items.len() && back.shape.is_none()
            {
                conj = conj.and(Truth::Unknown);
                continue;
            }
            let key = (class(fshape, j), class(back.shape, k - j));
            let e = *memo.entry(key).or_insert_with(|| {
                let l = level(j);
                let (def, poss) = target(k - j);
                let mut t = Truth::False;
                for y in l.inside.ones() {
                    let av = a.values[y];
                    if av == Truth::True && def.contains(y) {
                        t = Truth::True;
                        break;
                    }
                    if av != Truth::False && poss.contains(y) {
                        t = Truth::Unknown;
                    }
                }
                if t == Truth::False && !(l.mask.is_clear() || a.phantom_all(&l.mask) == Truth::False) {
                    t = Truth::Unknown;
                }
                t
            });
            conj = conj.and(e);
            if conj == Truth::False {
                break;
            }
        }
        acc = acc.or(conj);
        if acc == Truth::True {
            return acc;
        }
    }
    if complete {
        acc
    } else {
        acc.or(Truth::Unknown)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn countdown() -> Oca {
        Oca::from_dsl(include_str!("../../../../corpus/countdown.oca")).unwrap()
    }

    fn increment_loop() -> Oca {
        Oca::from_dsl(include_str!("../../../../corpus/increment-loop.oca")).unwrap()
    }

    fn asym_fork() -> Oca {
        Oca::from_dsl(include_str!("../../../../corpus/asymmetric-fork.oca")).unwrap()
    }

    fn caps(c: u64, l: u64) -> Caps {
        Caps { counter_cap: c, level_cap: l }
    }

    #[test]
    fn kleene_tables() {
        use Truth::*;
        assert_eq!(Unknown.and(False), False);
        assert_eq!(Unknown.or(True), True);
        assert_eq!(Unknown.and(True), Unknown);
        assert_eq!(!Unknown, Unknown);
    }

    #[test]
    fn countdown_fa_p() {
        let f = parse("FA p").unwrap();
        assert_eq!(eval_bounded(&countdown(), Configuration::new(0, 2), &f, caps(10, 10)).unwrap(), Truth::True);
    }

    #[test]
    fn increment_loop_never_reaches_p() {
        let f = parse("FA p").unwrap();
        // the level cap must leave room for the run to leave the counter cap
        // and for the untracked part to repeat
        for c in [1, 5, 20] {
            let got = eval_bounded(&increment_loop(), Configuration::new(0, 0), &f, caps(c, c + 3)).unwrap();
            assert_eq!(got, Truth::False);
        }
    }

    #[test]
    fn asymmetric_fork_is_unknown_at_small_caps() {
        let f = parse("FA p").unwrap();
        let got = eval_bounded(&asym_fork(), Configuration::new(0, 3), &f, caps(10, 3)).unwrap();
        assert_eq!(got, Truth::Unknown);
        let got = eval_bounded(&asym_fork(), Configuration::new(0, 3), &f, caps(50, 50)).unwrap();
        assert_eq!(got, Truth::False);
        let au = parse("A true U p").unwrap();
        assert_eq!(eval_bounded(&asym_fork(), Configuration::new(0, 3), &au, caps(50, 50)).unwrap(), Truth::True);
    }

    #[test]
    fn cap_boundary_behaviour() {
        // from s the counter may climb forever or descend to the zero test
        let oca = Oca::from_dsl(
            "states: s, z\natoms: p\nlabel z = {p}\ns -[>0,+1]-> s\ns -[>0,-1]-> s\ns -[=0,0]-> z\nz -[=0,0]-> z\nz -[>0,0]-> z\n",
        )
        .unwrap();
        let at = |f: &str| {
            eval_tables(&oca, &parse(f).unwrap(), caps(5, 5), Exec::Sequential).unwrap().root(Configuration::new(0, 5))
        };
        assert_eq!(at("EF p"), Truth::True);
        assert_eq!(at("AG !p"), Truth::False);
        // the climbing path is never decided inside the cap, but no path of
        // the capped graph can reach p from everywhere either
        assert_eq!(at("EG !p"), Truth::True);
        let up = increment_loop();
        let t = eval_tables(&up, &parse("AF p").unwrap(), caps(5, 5), Exec::Sequential).unwrap();
        assert_eq!(t.root(Configuration::new(0, 2)), Truth::Unknown);
    }

    #[test]
    fn ue_on_countdown_is_definite() {
        let f = parse("true UE p").unwrap();
        let t = eval_tables(&countdown(), &f, caps(20, 100), Exec::Sequential).unwrap();
        for v in 0..=20 {
            assert_eq!(t.root(Configuration::new(0, v)), Truth::True, "v = {v}");
        }
    }

    #[test]
    fn exec_modes_agree() {
        let f = parse("(p UE !p) | FA p & AG EX true").unwrap();
        let a = eval_tables(&asym_fork(), &f, caps(12, 30), Exec::Sequential).unwrap();
        let b = eval_tables(&asym_fork(), &f, caps(12, 30), Exec::Parallel).unwrap();
        assert_eq!(a.values, b.values);
    }
}
