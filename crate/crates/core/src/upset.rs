//! Ultimately periodic subsets of ℕ.
//!
//! `UpSet { t, p, base, residues }` contains `v < t` iff `v ∈ base` and
//! `v >= t` iff `v mod p ∈ residues`. The value `t` itself already belongs
//! to the periodic region.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum UpSetError {
    #[error("period must be positive")]
    ZeroPeriod,
    #[error("base element {0} is not below the threshold {1}")]
    BaseOutOfRange(u64, u64),
    #[error("residue {0} is not below the period {1}")]
    ResidueOutOfRange(u64, u64),
    #[error("period overflow while combining sets")]
    Overflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolOp {
    Union,
    Intersect,
    Complement,
}

/// Ultimately periodic subset of ℕ, always kept in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "UpSetDoc", into = "UpSetDoc")]
pub struct UpSet {
    t: u64,
    p: u64,
    base: Vec<bool>,
    residues: Vec<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct UpSetDoc {
    t: u64,
    p: u64,
    base: Vec<u64>,
    residues: Vec<u64>,
}

impl TryFrom<UpSetDoc> for UpSet {
    type Error = UpSetError;
    fn try_from(d: UpSetDoc) -> Result<Self, UpSetError> {
        UpSet::new(d.t, d.p, d.base, d.residues)
    }
}

impl From<UpSet> for UpSetDoc {
    fn from(u: UpSet) -> Self {
        UpSetDoc { t: u.t, p: u.p, base: u.base_elements(), residues: u.residue_elements() }
    }
}

impl UpSet {
    /// Builds and normalizes.
    pub fn new(
        t: u64,
        p: u64,
        base: impl IntoIterator<Item = u64>,
        residues: impl IntoIterator<Item = u64>,
    ) -> Result<UpSet, UpSetError> {
        if p == 0 {
            return Err(UpSetError::ZeroPeriod);
        }
        let mut b = vec![false; t as usize];
        for v in base {
            if v >= t {
                return Err(UpSetError::BaseOutOfRange(v, t));
            }
            b[v as usize] = true;
        }
        let mut r = vec![false; p as usize];
        for v in residues {
            if v >= p {
                return Err(UpSetError::ResidueOutOfRange(v, p));
            }
            r[v as usize] = true;
        }
        Ok(UpSet::from_bits(b, r))
    }

    /// Builds from membership vectors of lengths `t` and `p`, then normalizes.
    pub fn from_bits(base: Vec<bool>, residues: Vec<bool>) -> UpSet {
        assert!(!residues.is_empty(), "period must be positive");
        let mut u = UpSet { t: base.len() as u64, p: residues.len() as u64, base, residues };
        u.normalize();
        u
    }

    /// Set whose membership at `v` is `f(v)`, assuming `f` is `(t,p)`-periodic
    /// from `t` on.
    pub fn from_fn(t: u64, p: u64, f: impl Fn(u64) -> bool) -> UpSet {
        let base = (0..t).map(&f).collect();
        let residues = (0..p)
            .map(|r| {
                // smallest value >= t with residue r
                let v = t + (r + p - t % p) % p;
                f(v)
            })
            .collect();
        UpSet::from_bits(base, residues)
    }

    pub fn empty() -> UpSet {
        UpSet::from_bits(vec![], vec![false])
    }

    pub fn full() -> UpSet {
        UpSet::from_bits(vec![], vec![true])
    }

    pub fn threshold(&self) -> u64 {
        self.t
    }

    pub fn period(&self) -> u64 {
        self.p
    }

    pub fn base_elements(&self) -> Vec<u64> {
        (0..self.t).filter(|&v| self.base[v as usize]).collect()
    }

    pub fn residue_elements(&self) -> Vec<u64> {
        (0..self.p).filter(|&r| self.residues[r as usize]).collect()
    }

    pub fn member(&self, v: u64) -> bool {
        if v < self.t {
            self.base[v as usize]
        } else {
            self.residues[(v % self.p) as usize]
        }
    }

    /// Minimal period dividing the current one, then minimal threshold.
    fn normalize(&mut self) {
        let p = self.p as usize;
        let t = self.t as usize;
        // residues are indexed by v mod p, so compare by value classes
        let at = |r: &[bool], v: usize| r[v % p];
        let mut best = p;
        for d in (1..p).filter(|d| p % d == 0) {
            if (0..p).all(|v| at(&self.residues, t + v) == at(&self.residues, t + v + d)) {
                best = d;
                break;
            }
        }
        if best != p {
            self.residues = (0..best)
                .map(|r| {
                    let v = t + (r + best - t % best) % best;
                    self.residues[v % p]
                })
                .collect();
            self.p = best as u64;
        }
        while self.t > 0 {
            let v = self.t - 1;
            if self.base[v as usize] != self.residues[(v % self.p) as usize] {
                break;
            }
            self.base.pop();
            self.t -= 1;
        }
    }

    pub fn complement(&self) -> UpSet {
        UpSet::from_bits(self.base.iter().map(|b| !b).collect(), self.residues.iter().map(|b| !b).collect())
    }

    /// Binary set operation on common parameters `(max t, lcm p)`.
    pub fn combine(&self, other: &UpSet, f: impl Fn(bool, bool) -> bool) -> Result<UpSet, UpSetError> {
        let t = self.t.max(other.t);
        let p = arith::lcm(self.p, other.p).ok_or(UpSetError::Overflow)?;
        Ok(UpSet::from_fn(t, p, |v| f(self.member(v), other.member(v))))
    }

    pub fn bool_op(kind: BoolOp, a: &UpSet, b: Option<&UpSet>) -> Result<UpSet, UpSetError> {
        match (kind, b) {
            (BoolOp::Complement, None) => Ok(a.complement()),
            (BoolOp::Union, Some(b)) => a.combine(b, |x, y| x || y),
            (BoolOp::Intersect, Some(b)) => a.combine(b, |x, y| x && y),
            _ => panic!("operand count does not match {kind:?}"),
        }
    }

    /// Union of progressions `{offset + k·stride}`; stride zero is a singleton.
    pub fn from_progressions(progs: &[(u64, u64)]) -> Result<UpSet, UpSetError> {
        progs.iter().try_fold(UpSet::empty(), |acc, &(o, s)| {
            let one = if s == 0 { UpSet::new(o + 1, 1, [o], [])? } else { UpSet::new(o, s, [], [o % s])? };
            acc.combine(&one, |x, y| x || y)
        })
    }

    /// Singletons below `t`, then one progression of stride `p` per residue,
    /// starting at its first value `>= t`.
    pub fn to_progressions(&self) -> Vec<(u64, u64)> {
        let mut out: Vec<(u64, u64)> = self.base_elements().into_iter().map(|v| (v, 0)).collect();
        for r in self.residue_elements() {
            let o = self.t + (r + self.p - self.t % self.p) % self.p;
            out.push((o, self.p));
        }
        out
    }

    /// Whether membership is `(t,p)`-periodic from `t` on for the given pair.
    pub fn is_tp_periodic(&self, t: u64, p: u64) -> bool {
        // every v >= t has v + p with the same membership iff this holds on
        // a window covering our own threshold plus one common period
        let common = match arith::lcm(p, self.p) {
            Some(c) => c,
            None => return false,
        };
        let hi = t.max(self.t) + common;
        (t..=hi).all(|v| self.member(v) == self.member(v + p))
    }
}

/// `u` and `v` are `(T,P)`-equivalent: equal below `T`, or both at least `T`
/// and congruent modulo `P`.
pub fn tp_equivalent(u: u64, v: u64, t: u64, p: u64) -> bool {
    assert!(p >= 1);
    if u >= t && v >= t {
        u.abs_diff(v) % p == 0
    } else {
        u == v
    }
}

impl fmt::Display for UpSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base: BTreeSet<u64> = self.base_elements().into_iter().collect();
        let res: BTreeSet<u64> = self.residue_elements().into_iter().collect();
        write!(f, "t={} base={:?} p={} residues={:?}", self.t, base, self.p, res)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn members(u: &UpSet, n: u64) -> Vec<bool> {
        (0..n).map(|v| u.member(v)).collect()
    }

    #[test]
    fn complement_of_full_is_empty() {
        let full = UpSet::new(0, 1, [], [0]).unwrap();
        let e = UpSet::bool_op(BoolOp::Complement, &full, None).unwrap();
        assert_eq!(e, UpSet::new(0, 1, [], []).unwrap());
    }

    #[test]
    fn evens_union_odds_is_full() {
        let evens = UpSet::new(0, 2, [], [0]).unwrap();
        let odds = UpSet::new(0, 2, [], [1]).unwrap();
        assert_eq!(UpSet::bool_op(BoolOp::Union, &evens, Some(&odds)).unwrap(), UpSet::full());
    }

    #[test]
    fn at_least_two_intersect_multiples_of_three() {
        let ge2 = UpSet::new(2, 1, [], [0]).unwrap();
        let m3 = UpSet::new(0, 3, [], [0]).unwrap();
        let r = UpSet::bool_op(BoolOp::Intersect, &ge2, Some(&m3)).unwrap();
        // independent oracle: direct membership
        for v in 0..20 {
            assert_eq!(r.member(v), v >= 2 && v % 3 == 0, "v={v}");
        }
        let probe: Vec<bool> = [0, 2, 3, 4, 6].iter().map(|&v| r.member(v)).collect();
        assert_eq!(probe, vec![false, false, true, false, true]);
        assert_eq!(r.period(), 3);
    }

    #[test]
    fn progression_examples() {
        assert_eq!(UpSet::from_progressions(&[(1, 0)]).unwrap(), UpSet::new(2, 1, [1], []).unwrap());
        assert_eq!(UpSet::from_progressions(&[(0, 2)]).unwrap(), UpSet::new(0, 2, [], [0]).unwrap());
        let u = UpSet::new(3, 4, [0, 2], [1, 2]).unwrap();
        let back = UpSet::from_progressions(&u.to_progressions()).unwrap();
        assert_eq!(members(&u, 51), members(&back, 51));
        for (o, s) in u.to_progressions() {
            assert!(o < u.threshold() + u.period());
            assert!(s == 0 || s == u.period());
        }
    }

    #[test]
    fn tp_equivalence_examples() {
        assert!(tp_equivalent(7, 13, 5, 3));
        assert!(tp_equivalent(2, 2, 5, 3));
        assert!(!tp_equivalent(2, 3, 5, 3));
        assert!(!tp_equivalent(4, 7, 5, 3));
    }

    #[test]
    fn normalization_finds_canonical_form() {
        let u = UpSet::new(5, 6, [0, 2, 4], [0, 2, 4]).unwrap();
        assert_eq!((u.threshold(), u.period()), (0, 2));
        assert_eq!(u.residue_elements(), vec![0]);
        // threshold itself is periodic: {0} ∪ {v >= 2} needs t = 1
        let v = UpSet::from_fn(10, 1, |x| x == 0 || x >= 2);
        assert_eq!((v.threshold(), v.period()), (2, 1));
        assert_eq!(v.base_elements(), vec![0]);
    }

    #[test]
    fn json_shape() {
        let u = UpSet::new(3, 4, [0], [1, 2]).unwrap();
        let j = serde_json::to_value(&u).unwrap();
        assert_eq!(j, serde_json::json!({"t": 3, "p": 4, "base": [0], "residues": [1, 2]}));
        let back: UpSet = serde_json::from_value(j).unwrap();
        assert_eq!(back, u);
        assert!(serde_json::from_value::<UpSet>(serde_json::json!({"t":1,"p":0,"base":[],"residues":[]})).is_err());
    }

    fn arb_upset() -> impl Strategy<Value = (u64, u64, Vec<bool>, Vec<bool>)> {
        (0u64..8, 1u64..7).prop_flat_map(|(t, p)| {
            (
                Just(t),
                Just(p),
                proptest::collection::vec(any::<bool>(), t as usize),
                proptest::collection::vec(any::<bool>(), p as usize),
            )
        })
    }

    fn raw_member(t: u64, p: u64, b: &[bool], r: &[bool], v: u64) -> bool {
        if v < t {
            b[v as usize]
        } else {
            r[(v % p) as usize]
        }
    }

    proptest! {
        #[test]
        fn normalize_preserves_extension_and_is_idempotent((t, p, b, r) in arb_upset()) {
            let u = UpSet::from_bits(b.clone(), r.clone());
            for v in 0..t + 3 * p {
                prop_assert_eq!(u.member(v), raw_member(t, p, &b, &r, v));
            }
            let again = UpSet::from_bits(u.base.clone(), u.residues.clone());
            prop_assert_eq!(&again, &u);
            prop_assert!(u.threshold() <= t);
            prop_assert_eq!(p % u.period(), 0);
        }

        #[test]
        fn bool_ops_are_pointwise(a in arb_upset(), b in arb_upset()) {
            let ua = UpSet::from_bits(a.2.clone(), a.3.clone());
            let ub = UpSet::from_bits(b.2.clone(), b.3.clone());
            let un = UpSet::bool_op(BoolOp::Union, &ua, Some(&ub)).unwrap();
            let it = UpSet::bool_op(BoolOp::Intersect, &ua, Some(&ub)).unwrap();
            let bound = a.0 + b.0 + 3 * arith::lcm(a.1, b.1).unwrap();
            for v in 0..bound {
                let (x, y) = (raw_member(a.0, a.1, &a.2, &a.3, v), raw_member(b.0, b.1, &b.2, &b.3, v));
                prop_assert_eq!(un.member(v), x || y);
                prop_assert_eq!(it.member(v), x && y);
            }
            // De Morgan
            let dm = ua.complement().combine(&ub.complement(), |x, y| x || y).unwrap().complement();
            prop_assert_eq!(dm, it);
        }

        #[test]
        fn parameters_are_periodic((_t, _p, b, r) in arb_upset()) {
            let u = UpSet::from_bits(b, r);
            let (t, p) = (u.threshold(), u.period());
            for v in t..t + 4 * p {
                prop_assert_eq!(u.member(v), u.member(v + p));
            }
            prop_assert!(u.is_tp_periodic(t, p));
        }

        #[test]
        fn progressions_roundtrip((_t, _p, b, r) in arb_upset()) {
            let u = UpSet::from_bits(b, r);
            prop_assert_eq!(UpSet::from_progressions(&u.to_progressions()).unwrap(), u);
        }
    }
}
