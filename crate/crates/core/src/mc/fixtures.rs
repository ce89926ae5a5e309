//! The two computation trees separating `AU` from `UA` and `EU` from `UE`,
//! encoded as Kripke structures over the atoms `white`, `stripes`, `black`.
//!
//! In tree (a) every path turns black at level 3, and the white prefix
//! continues to stripes along one branch. In tree (b) the two branches turn
//! black at levels 7 and 8, and each level up to 5 has a white node on a path
//! meeting stripes at level 6.

use super::kripke::Kripke;

pub const ATOMS: [&str; 3] = ["white", "stripes", "black"];

/// Builds a structure from `(labels, successors)` rows indexed by node.
fn build(rows: &[(&[&str], &[usize])]) -> Kripke {
    let mut k = Kripke::new(&ATOMS);
    for (labels, _) in rows {
        k.add_node(labels);
    }
    for (u, (_, succ)) in rows.iter().enumerate() {
        for &v in *succ {
            k.add_edge(u, v);
        }
    }
    k
}

/// Tree (a). Node 0 is the root.
pub fn tree_a() -> Kripke {
    build(&[
        (&["white"], &[1, 2]), // 0 r
        (&["white"], &[3]),    // 1 x1
        (&[], &[4]),           // 2 x2
        (&["stripes"], &[5]),  // 3 y1
        (&[], &[6]),           // 4 y2
        (&["black"], &[5]),    // 5 z1
        (&["black"], &[6]),    // 6 z2
    ])
}

/// Tree (b). Node 0 is the root.
pub fn tree_b() -> Kripke {
    build(&[
        (&["white"], &[1, 9]), // 0 r
        (&["white"], &[2]),    // 1 a1
        (&["white"], &[3]),    // 2 a2
        (&[], &[4]),           // 3 a3
        (&[], &[5]),           // 4 a4
        (&[], &[6]),           // 5 a5
        (&["stripes"], &[7]),  // 6 a6
        (&["black"], &[8]),    // 7 a7
        (&[], &[8]),           // 8 d1
        (&[], &[10]),          // 9 b1
        (&[], &[11]),          // 10 b2
        (&["white"], &[12]),   // 11 b3
        (&["white"], &[13]),   // 12 b4
        (&["white"], &[14]),   // 13 b5
        (&["stripes"], &[15]), // 14 b6
        (&[], &[16]),          // 15 b7
        (&["black"], &[17]),   // 16 b8
        (&[], &[17]),          // 17 d2
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::ctl::{sat_au, sat_eu};
    use crate::mc::sync::{check_ua_on_kripke, check_ue_on_kripke};

    #[test]
    fn trees_are_total() {
        assert!(tree_a().is_total());
        assert!(tree_b().is_total());
    }

    #[test]
    fn tree_a_verdicts() {
        let k = tree_a();
        let all = k.full_set();
        let (w, s, b) = (k.sat_atom("white"), k.sat_atom("stripes"), k.sat_atom("black"));
        assert!(sat_au(&k, &all, &b).contains(0));
        assert_eq!(check_ua_on_kripke(&k, 0, &all, &b, None).unwrap().witness_k, Some(3));
        assert!(sat_eu(&k, &w, &s).contains(0));
        assert_eq!(check_ue_on_kripke(&k, 0, &w, &s, 1000).unwrap().witness_k, Some(2));
    }

    #[test]
    fn tree_b_verdicts() {
        let k = tree_b();
        let all = k.full_set();
        let (w, s, b) = (k.sat_atom("white"), k.sat_atom("stripes"), k.sat_atom("black"));
        assert!(sat_au(&k, &all, &b).contains(0));
        assert!(!check_ua_on_kripke(&k, 0, &all, &b, None).unwrap().holds);
        assert!(!sat_eu(&k, &w, &s).contains(0));
        assert_eq!(check_ue_on_kripke(&k, 0, &w, &s, 1000).unwrap().witness_k, Some(6));
    }
}
