//! The synchronized operators `UA` and `UE` on a finite Kripke structure,
//! decided by iterating level sets from a single initial node.

use std::collections::HashMap;

use serde::Serialize;

use super::kripke::{Kripke, NodeSet};
use crate::arith;

/// Default bound on the `UE` horizon.
pub const DEFAULT_UE_STEP_CAP: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SyncOutcome {
    pub holds: bool,
    /// Least synchronization level, when the operator holds.
    pub witness_k: Option<u64>,
    /// Level sets examined.
    pub iterations: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SyncError {
    #[error("step cap {cap} exceeded after {reached} levels without a decision")]
    StepCap { cap: u64, reached: u64 },
}

/// Decides `init ⊨ sat1 UA sat2`: some level `k` lies inside `sat2` while
/// every earlier level lies inside `sat1`.
///
/// The level sequence is an orbit in the powerset of nodes, so without a cap
/// the loop stops after at most `2^n + 1` levels.
pub fn check_ua_on_kripke(
    k: &Kripke,
    init: usize,
    sat1: &NodeSet,
    sat2: &NodeSet,
    step_cap: Option<u64>,
) -> Result<SyncOutcome, SyncError> {
    ua_levels(k, init, sat1, sat2, step_cap, false)
}

/// `flip` replaces the `L_k ⊆ sat2` test by `L_k ∩ sat2 ≠ ∅`. It exists only
/// to seed a wrong checker for mutation tests.
pub(crate) fn ua_levels(
    k: &Kripke,
    init: usize,
    sat1: &NodeSet,
    sat2: &NodeSet,
    step_cap: Option<u64>,
    flip: bool,
) -> Result<SyncOutcome, SyncError> {
    let mut level = k.empty_set();
    level.insert(init);
    let mut seen: std::collections::HashSet<NodeSet> = std::collections::HashSet::new();
    let mut j = 0u64;
    loop {
        let reached = if flip { !level.is_disjoint(sat2) } else { level.is_subset(sat2) };
        if reached {
            return Ok(SyncOutcome { holds: true, witness_k: Some(j), iterations: j + 1 });
        }
        if !level.is_subset(sat1) || !seen.insert(level.clone()) {
            return Ok(SyncOutcome { holds: false, witness_k: None, iterations: j + 1 });
        }
        if let Some(cap) = step_cap {
            if j + 1 >= cap {
                return Err(SyncError::StepCap { cap, reached: j + 1 });
            }
        }
        level = k.post(&level);
        j += 1;
    }
}

/// Ultimately periodic orbit `x_0, x_1 = f(x_0), …` with prefix `mu` and
/// cycle length `lambda`.
struct Orbit {
    items: Vec<NodeSet>,
    mu: u64,
    lambda: u64,
}

impl Orbit {
    fn build(start: NodeSet, step: impl Fn(&NodeSet) -> NodeSet, cap: u64) -> Result<Orbit, SyncError> {
        let mut index: HashMap<NodeSet, u64> = HashMap::new();
        let mut items = Vec::new();
        let mut cur = start;
        loop {
            if let Some(&first) = index.get(&cur) {
                let len = items.len() as u64;
                return Ok(Orbit { items, mu: first, lambda: len - first });
            }
            if items.len() as u64 >= cap {
                return Err(SyncError::StepCap { cap, reached: items.len() as u64 });
            }
            index.insert(cur.clone(), items.len() as u64);
            let next = step(&cur);
            items.push(cur);
            cur = next;
        }
    }

    fn get(&self, i: u64) -> &NodeSet {
        let idx = if i < self.mu { i } else { self.mu + (i - self.mu) % self.lambda };
        &self.items[idx as usize]
    }
}

/// Decides `init ⊨ sat1 UE sat2`: for some `k`, every level `j < k` holds a
/// `sat1` node from which a `sat2` node is reachable in exactly `k − j` steps
/// (and `init ∈ sat2` when `k = 0`).
///
/// With `(μ1, λ1)` the shape of the forward level orbit and `(μ2, λ2)` that of
/// the backward orbit `pre^m(sat2)`, the truth of the condition at `k` depends
/// only on `k mod lcm(λ1, λ2)` once `k ≥ μ1 + μ2 + lcm(λ1, λ2)`, so levels
/// below `μ1 + μ2 + 2·lcm(λ1, λ2)` decide it. `step_cap` bounds that horizon.
pub fn check_ue_on_kripke(
    k: &Kripke,
    init: usize,
    sat1: &NodeSet,
    sat2: &NodeSet,
    step_cap: u64,
) -> Result<SyncOutcome, SyncError> {
    if sat2.contains(init) {
        return Ok(SyncOutcome { holds: true, witness_k: Some(0), iterations: 1 });
    }
    if !sat1.contains(init) {
        return Ok(SyncOutcome { holds: false, witness_k: None, iterations: 1 });
    }
    let mut start = k.empty_set();
    start.insert(init);
    let fwd = Orbit::build(start, |l| k.post(l), step_cap)?;
    let bwd = Orbit::build(sat2.clone(), |r| k.pre_exists(r), step_cap)?;
    let lam = arith::lcm(fwd.lambda, bwd.lambda).filter(|&l| l <= step_cap);
    let horizon = lam
        .and_then(|l| fwd.mu.checked_add(bwd.mu)?.checked_add(l.checked_mul(2)?))
        .filter(|&h| h <= step_cap)
        .ok_or(SyncError::StepCap { cap: step_cap, reached: (fwd.items.len() + bwd.items.len()) as u64 })?;

    // hit[(i1, i2)] memoizes L_{i1} ∩ sat1 ∩ R_{i2} ≠ ∅ over orbit indices
    let mut hit: HashMap<(u64, u64), bool> = HashMap::new();
    let class = |o: &Orbit, i: u64| if i < o.mu { i } else { o.mu + (i - o.mu) % o.lambda };
    for kk in 1..horizon {
        let ok = (0..kk).all(|j| {
            let key = (class(&fwd, j), class(&bwd, kk - j));
            *hit.entry(key).or_insert_with(|| {
                let mut s = fwd.get(j).clone();
                s.intersect_with(sat1);
                !s.is_disjoint(bwd.get(kk - j))
            })
        });
        if ok {
            return Ok(SyncOutcome { holds: true, witness_k: Some(kk), iterations: kk + 1 });
        }
    }
    Ok(SyncOutcome { holds: false, witness_k: None, iterations: horizon })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn chain(edges: &[(usize, usize)], n: usize) -> Kripke {
        let mut k = Kripke::new(&[]);
        for _ in 0..n {
            k.add_node(&[]);
        }
        for &(u, v) in edges {
            k.add_edge(u, v);
        }
        k
    }

    fn set(k: &Kripke, xs: &[usize]) -> NodeSet {
        let mut s = k.empty_set();
        for &x in xs {
            s.insert(x);
        }
        s
    }

    #[test]
    fn init_in_target_gives_zero() {
        let k = chain(&[(0, 0)], 1);
        let all = k.full_set();
        assert_eq!(check_ua_on_kripke(&k, 0, &k.empty_set(), &all, None).unwrap().witness_k, Some(0));
        assert_eq!(check_ue_on_kripke(&k, 0, &k.empty_set(), &all, 10).unwrap().witness_k, Some(0));
    }

    #[test]
    fn empty_target_is_false() {
        let k = chain(&[(0, 1), (1, 0)], 2);
        let all = k.full_set();
        assert!(!check_ua_on_kripke(&k, 0, &all, &k.empty_set(), None).unwrap().holds);
        assert!(!check_ue_on_kripke(&k, 0, &all, &k.empty_set(), 100).unwrap().holds);
    }

    #[test]
    fn ua_needs_a_synchronized_level() {
        // 0 branches to paths of lengths 2 and 3 to node 3
        let k = chain(&[(0, 1), (0, 2), (1, 3), (2, 4), (4, 3), (3, 5), (5, 5)], 6);
        let all = k.full_set();
        let target = set(&k, &[3]);
        assert!(!check_ua_on_kripke(&k, 0, &all, &target, None).unwrap().holds);
        // once the target absorbs, level 3 is {3, 5} and level 4 is {5}
        let sticky = set(&k, &[3, 5]);
        let r = check_ua_on_kripke(&k, 0, &all, &sticky, None).unwrap();
        assert_eq!(r.witness_k, Some(3));
    }

    #[test]
    fn step_cap_is_distinct_from_false() {
        let k = chain(&[(0, 1), (1, 2), (2, 3), (3, 0)], 4);
        let all = k.full_set();
        let none = k.empty_set();
        assert_eq!(check_ua_on_kripke(&k, 0, &all, &none, Some(2)), Err(SyncError::StepCap { cap: 2, reached: 2 }));
        assert!(!check_ua_on_kripke(&k, 0, &all, &none, None).unwrap().holds);
    }

    #[test]
    fn ue_on_a_ring() {
        // ring of length 3, target at node 2: every level has a path of the
        // right remaining length iff k ≡ 2 (mod 3)
        let k = chain(&[(0, 1), (1, 2), (2, 0)], 3);
        let all = k.full_set();
        let r = check_ue_on_kripke(&k, 0, &all, &set(&k, &[2]), 100).unwrap();
        assert_eq!(r.witness_k, Some(2));
        let r = check_ue_on_kripke(&k, 0, &set(&k, &[0, 1]), &set(&k, &[2]), 100).unwrap();
        assert_eq!(r.witness_k, Some(2));
        let r = check_ue_on_kripke(&k, 0, &set(&k, &[0]), &set(&k, &[2]), 100).unwrap();
        assert!(!r.holds);
    }

    /// Direct evaluation of the `UE` condition at each `k` up to `bound`.
    fn ue_brute(k: &Kripke, init: usize, a: &NodeSet, b: &NodeSet, bound: u64) -> Option<u64> {
        if b.contains(init) {
            return Some(0);
        }
        let mut levels = vec![set(k, &[init])];
        let mut back = vec![b.clone()];
        for _ in 0..bound {
            let l = k.post(levels.last().unwrap());
            levels.push(l);
            let r = k.pre_exists(back.last().unwrap());
            back.push(r);
        }
        (1..bound).find(|&kk| {
            (0..kk).all(|j| {
                let mut s = levels[j as usize].clone();
                s.intersect_with(a);
                !s.is_disjoint(&back[(kk - j) as usize])
            })
        })
    }

    fn ua_brute(k: &Kripke, init: usize, a: &NodeSet, b: &NodeSet, bound: u64) -> Option<u64> {
        let mut l = set(k, &[init]);
        for j in 0..bound {
            if l.is_subset(b) {
                return Some(j);
            }
            if !l.is_subset(a) {
                return None;
            }
            l = k.post(&l);
        }
        None
    }

    fn arb() -> impl Strategy<Value = (Kripke, NodeSet, NodeSet)> {
        (1usize..7).prop_flat_map(|n| {
            (
                proptest::collection::vec(proptest::collection::vec(0..n, 1..3), n),
                proptest::collection::vec(any::<bool>(), n),
                proptest::collection::vec(prop::bool::weighted(0.3), n),
            )
                .prop_map(move |(edges, a, b)| {
                    let mut k = chain(&[], n);
                    for (u, vs) in edges.iter().enumerate() {
                        for &v in vs {
                            k.add_edge(u, v);
                        }
                    }
                    let sa = set(&k, &a.iter().enumerate().filter(|x| *x.1).map(|x| x.0).collect::<Vec<_>>());
                    let sb = set(&k, &b.iter().enumerate().filter(|x| *x.1).map(|x| x.0).collect::<Vec<_>>());
                    (k, sa, sb)
                })
        })
    }

    proptest! {
        #[test]
        fn ue_matches_brute_force((k, a, b) in arb()) {
            // orbits over ≤ 6 nodes are short; 400 levels is well past any horizon
            let got = check_ue_on_kripke(&k, 0, &a, &b, 10_000).unwrap();
            prop_assert_eq!(got.witness_k, ue_brute(&k, 0, &a, &b, 400));
        }

        #[test]
        fn ua_matches_brute_force((k, a, b) in arb()) {
            let got = check_ua_on_kripke(&k, 0, &a, &b, None).unwrap();
            prop_assert_eq!(got.witness_k, ua_brute(&k, 0, &a, &b, 200));
            prop_assert!(got.iterations <= (1u64 << k.len()) + 1);
        }

        #[test]
        fn ua_implies_ue((k, a, b) in arb()) {
            let ua = check_ua_on_kripke(&k, 0, &a, &b, None).unwrap();
            let ue = check_ue_on_kripke(&k, 0, &a, &b, 10_000).unwrap();
            prop_assert!(!ua.holds || ue.holds);
        }
    }
}
