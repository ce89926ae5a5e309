//! Fixpoint labeling of the CTL operators on a total Kripke structure.

use std::collections::VecDeque;

use super::kripke::{Kripke, NodeSet};

/// Nodes with some successor in `sat`.
pub fn sat_ex(k: &Kripke, sat: &NodeSet) -> NodeSet {
    k.pre_exists(sat)
}

/// Least fixpoint of `X = sat2 ∪ (sat1 ∩ pre∃(X))`.
pub fn sat_eu(k: &Kripke, sat1: &NodeSet, sat2: &NodeSet) -> NodeSet {
    let mut out = sat2.clone();
    let mut queue: VecDeque<usize> = sat2.ones().collect();
    while let Some(v) = queue.pop_front() {
        for &u in k.predecessors(v) {
            if sat1.contains(u) && !out.contains(u) {
                out.insert(u);
                queue.push_back(u);
            }
        }
    }
    out
}

/// Least fixpoint of `X = sat2 ∪ (sat1 ∩ pre∀(X))`, by counting the
/// successors of each node not yet known to be in `X`.
pub fn sat_au(k: &Kripke, sat1: &NodeSet, sat2: &NodeSet) -> NodeSet {
    let mut pending: Vec<usize> = (0..k.len()).map(|u| k.successors(u).len()).collect();
    let mut out = sat2.clone();
    let mut queue: VecDeque<usize> = sat2.ones().collect();
    while let Some(v) = queue.pop_front() {
        for &u in k.predecessors(v) {
            pending[u] -= 1;
            if pending[u] == 0 && sat1.contains(u) && !out.contains(u) {
                out.insert(u);
                queue.push_back(u);
            }
        }
    }
    out
}

pub fn sat_not(k: &Kripke, sat: &NodeSet) -> NodeSet {
    let mut out = k.full_set();
    out.difference_with(sat);
    out
}

pub fn sat_and(a: &NodeSet, b: &NodeSet) -> NodeSet {
    let mut out = a.clone();
    out.intersect_with(b);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Reference semantics by Kleene iteration of the defining equations.
    fn naive(k: &Kripke, a: &NodeSet, b: &NodeSet, universal: bool) -> NodeSet {
        let mut x = k.empty_set();
        loop {
            let mut next = b.clone();
            for u in a.ones() {
                let s = k.successors(u);
                let ok = if universal { s.iter().all(|&v| x.contains(v)) } else { s.iter().any(|&v| x.contains(v)) };
                if ok {
                    next.insert(u);
                }
            }
            if next == x {
                return x;
            }
            x = next;
        }
    }

    fn arb_kripke() -> impl Strategy<Value = (Kripke, Vec<bool>, Vec<bool>)> {
        (1usize..9).prop_flat_map(|n| {
            (
                proptest::collection::vec(proptest::collection::vec(0..n, 1..4), n),
                proptest::collection::vec(any::<bool>(), n),
                proptest::collection::vec(any::<bool>(), n),
            )
                .prop_map(move |(edges, a, b)| {
                    let mut k = Kripke::new(&[]);
                    for _ in 0..n {
                        k.add_node(&[]);
                    }
                    for (u, vs) in edges.iter().enumerate() {
                        for &v in vs {
                            k.add_edge(u, v);
                        }
                    }
                    (k, a, b)
                })
        })
    }

    fn set(k: &Kripke, bits: &[bool]) -> NodeSet {
        let mut s = k.empty_set();
        for (i, &b) in bits.iter().enumerate() {
            if b {
                s.insert(i);
            }
        }
        s
    }

    proptest! {
        #[test]
        fn until_matches_kleene_iteration((k, a, b) in arb_kripke()) {
            let (a, b) = (set(&k, &a), set(&k, &b));
            prop_assert_eq!(sat_eu(&k, &a, &b), naive(&k, &a, &b, false));
            prop_assert_eq!(sat_au(&k, &a, &b), naive(&k, &a, &b, true));
        }

        #[test]
        fn au_implies_eu((k, a, b) in arb_kripke()) {
            let (a, b) = (set(&k, &a), set(&k, &b));
            prop_assert!(sat_au(&k, &a, &b).is_subset(&sat_eu(&k, &a, &b)));
        }
    }

    #[test]
    fn ex_true_is_everything() {
        let mut k = Kripke::new(&[]);
        let a = k.add_node(&[]);
        let b = k.add_node(&[]);
        k.add_edge(a, b);
        k.add_edge(b, a);
        assert_eq!(sat_ex(&k, &k.full_set()), k.full_set());
        assert_eq!(sat_not(&k, &k.full_set()), k.empty_set());
    }
}
