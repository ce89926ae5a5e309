//! Threshold/period constants.
//!
//! CTL operators follow the classical recursion on `(t, p)` pairs with
//! `K = lcm[1..k]` for `k` control states. A `UA` operator gets a
//! [`ConstantBundle`] built from `b`, `B = lcm[1..2b³]` and the children's
//! constants, together with the segment/core/shift machinery that relates
//! computation trees started at `v` and at `v + P`.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::formula::{Formula, NodeKind};
use crate::lps::{basic_slopes, Slope};
use crate::quantity::{Quantity, QuantityError};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum PeriodicityError {
    #[error("operator {op} expects {want} child pairs, got {got}")]
    Arity { op: &'static str, want: usize, got: usize },
    #[error("synchronization operators have no CTL recursion; use the UA bundle")]
    NotCtl,
    #[error("period must be positive")]
    ZeroPeriod,
    #[error("number of states must be positive")]
    NoStates,
    #[error("period P = {p} does not exceed the inherited threshold {t}")]
    PeriodNotAboveThreshold { p: String, t: String },
    #[error("segment index {i} out of range 0..={max}")]
    SegmentIndex { i: usize, max: usize },
    #[error("counter value must exceed the counter threshold {0}")]
    BelowCounterThreshold(String),
    #[error("level {0} is not in the core")]
    NotInCore(String),
    #[error("no constants are known for UE subformula {0}")]
    UeUnsupported(String),
    #[error(transparent)]
    Quantity(#[from] QuantityError),
}

/// Operator kinds accepted by [`ctl_constants`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtlOp {
    True,
    Atom,
    Not,
    And,
    Ex,
    Eu,
    Au,
}

impl CtlOp {
    fn arity(self) -> usize {
        match self {
            CtlOp::True | CtlOp::Atom => 0,
            CtlOp::Not | CtlOp::Ex => 1,
            CtlOp::And | CtlOp::Eu | CtlOp::Au => 2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            CtlOp::True => "true",
            CtlOp::Atom => "atom",
            CtlOp::Not => "not",
            CtlOp::And => "and",
            CtlOp::Ex => "EX",
            CtlOp::Eu => "EU",
            CtlOp::Au => "AU",
        }
    }
}

/// A threshold/period pair. Membership is periodic for values `>= t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TpPair {
    pub t: Quantity,
    pub p: Quantity,
}

impl TpPair {
    pub fn small(t: u64, p: u64) -> TpPair {
        TpPair { t: t.into(), p: p.into() }
    }

    /// Both components as machine integers, if they fit.
    pub fn as_u64(&self) -> Option<(u64, u64)> {
        Some((self.t.to_u64()?, self.p.to_u64()?))
    }

    /// Common pair for two pairs: maximum threshold, lcm of periods.
    pub fn uniformize(&self, other: &TpPair) -> Result<TpPair, PeriodicityError> {
        Ok(TpPair { t: self.t.try_max(&other.t)?, p: self.p.try_lcm(&other.p)? })
    }
}

/// `lcm[1..k]` as a quantity.
fn k_lcm(k: u64) -> Quantity {
    Quantity::lcm_upto(k)
}

/// One step of the CTL recursion for a formula with `k` control states.
pub fn ctl_constants(op: CtlOp, children: &[TpPair], k: u64) -> Result<TpPair, PeriodicityError> {
    if k == 0 {
        return Err(PeriodicityError::NoStates);
    }
    if children.len() != op.arity() {
        return Err(PeriodicityError::Arity { op: op.name(), want: op.arity(), got: children.len() });
    }
    if children.iter().any(|c| c.p == Quantity::zero()) {
        return Err(PeriodicityError::ZeroPeriod);
    }
    let kq = k_lcm(k);
    Ok(match op {
        CtlOp::True | CtlOp::Atom => TpPair::small(0, 1),
        CtlOp::Not => children[0].clone(),
        CtlOp::And => children[0].uniformize(&children[1])?,
        CtlOp::Ex => {
            let c = &children[0];
            TpPair { t: c.t.try_add(&c.p)?, p: kq.try_mul(&c.p)? }
        }
        CtlOp::Eu | CtlOp::Au => {
            let (a, b) = (&children[0], &children[1]);
            let l = kq.try_mul(&a.p)?.try_lcm(&b.p)?;
            let t = a.t.try_max(&b.t)?.try_add(&l.mul_u64(2 * k * k))?;
            TpPair { t, p: l }
        }
    })
}

/// Default polynomial bound on basic paths for `n` control states.
pub fn default_b(n: u64) -> u64 {
    8 * n.max(3).pow(3)
}

/// Constants attached to one `UA` subformula.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstantBundle {
    pub n: u64,
    pub b: u64,
    /// `B = lcm[1..2b³]`.
    pub lcm_base: Quantity,
    /// Inherited period `P̆`.
    pub prev_p: Quantity,
    /// Inherited threshold `T̆`.
    pub prev_t: Quantity,
    /// `P = B·P̆`.
    pub p: Quantity,
    /// Segment threshold `sT = b⁹·P`.
    pub seg_threshold: Quantity,
    /// Counter threshold `cT = b¹¹·P`.
    pub counter_threshold: Quantity,
    /// Negative basic slopes `ε₁ < … < ε_m`.
    #[serde(serialize_with = "ser_slopes")]
    pub negative_slopes: Vec<Slope>,
    /// Number of basic slopes of either sign.
    pub total_slopes: usize,
    pub m: usize,
    /// `m + 1 < b²` holds.
    pub segment_count_ok: bool,
    /// `b` is below the regime `b >= 3` the constants are designed for.
    pub degenerate: bool,
}

fn ser_slopes<S: serde::Serializer>(v: &[Slope], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.to_string()))
}

/// Builds the bundle for a `UA` subformula over `n` states whose children
/// have combined threshold `prev_t` and period `prev_p`.
pub fn ua_constants(
    n: u64,
    prev_t: &Quantity,
    prev_p: &Quantity,
    b_override: Option<u64>,
) -> Result<ConstantBundle, PeriodicityError> {
    if *prev_p == Quantity::zero() {
        return Err(PeriodicityError::ZeroPeriod);
    }
    let b = b_override.unwrap_or_else(|| default_b(n));
    let b_big = BigUint::from(b);
    let lcm_base = Quantity::lcm_upto(2 * b * b * b);
    let p = lcm_base.try_mul(prev_p)?;
    let seg_threshold = Quantity::from(b_big.pow(9)).try_mul(&p)?;
    let counter_threshold = Quantity::from(b_big.pow(11)).try_mul(&p)?;
    if p.try_cmp(prev_t)? != Ordering::Greater {
        return Err(PeriodicityError::PeriodNotAboveThreshold { p: p.to_string(), t: prev_t.to_string() });
    }
    let all = basic_slopes(b);
    let negative_slopes: Vec<Slope> = all.iter().copied().filter(|s| *s < Slope::from(0)).collect();
    let m = negative_slopes.len();
    Ok(ConstantBundle {
        n,
        b,
        lcm_base,
        prev_p: prev_p.clone(),
        prev_t: prev_t.clone(),
        p,
        seg_threshold,
        counter_threshold,
        total_slopes: all.len(),
        m,
        segment_count_ok: ((m + 1) as u128) < (b as u128) * (b as u128),
        degenerate: b < 3,
        negative_slopes,
    })
}

/// A level, or the sentinel for the open-ended last segment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    Finite(BigUint),
    Infinite,
}

/// Exact values of the bundle, required by the segment functions.
struct Exact {
    prev_t: BigUint,
    st: BigUint,
    ct: BigUint,
    b8p: BigUint,
}

impl ConstantBundle {
    fn exact(&self) -> Result<Exact, PeriodicityError> {
        let p = self.p.to_biguint()?;
        Ok(Exact {
            prev_t: self.prev_t.to_biguint()?,
            st: self.seg_threshold.to_biguint()?,
            ct: self.counter_threshold.to_biguint()?,
            b8p: BigUint::from(self.b).pow(8) * &p,
        })
    }

    /// `§ᵢ(v)`: `0` for `i = 0`, `floor((v − T̆)·(−1/εᵢ)) − b⁸P` for
    /// `1 <= i <= m`, and infinity for `i = m + 1`. Requires `v > cT`.
    pub fn segment_start(&self, i: usize, v: &BigUint) -> Result<Level, PeriodicityError> {
        let e = self.exact()?;
        if i > self.m + 1 {
            return Err(PeriodicityError::SegmentIndex { i, max: self.m + 1 });
        }
        if *v <= e.ct {
            return Err(PeriodicityError::BelowCounterThreshold(e.ct.to_string()));
        }
        Ok(self.segment_start_exact(&e, i, v))
    }

    fn segment_start_exact(&self, e: &Exact, i: usize, v: &BigUint) -> Level {
        if i == 0 {
            return Level::Finite(BigUint::zero());
        }
        if i == self.m + 1 {
            return Level::Infinite;
        }
        let eps = self.negative_slopes[i - 1];
        // ε = −x/y with x, y > 0, so −1/ε = y/x
        let x = BigUint::from((-*eps.numer()) as u64);
        let y = BigUint::from(*eps.denom() as u64);
        let scaled = ((v - &e.prev_t) * y).div_floor(&x);
        Level::Finite(scaled - &e.b8p)
    }

    /// The core of the tree rooted at counter `v > cT`.
    pub fn core_levels(&self, v: &BigUint) -> Result<Core, PeriodicityError> {
        let e = self.exact()?;
        if *v <= e.ct {
            return Err(PeriodicityError::BelowCounterThreshold(e.ct.to_string()));
        }
        let starts = (0..=self.m)
            .map(|i| match self.segment_start_exact(&e, i, v) {
                Level::Finite(s) => s,
                Level::Infinite => unreachable!(),
            })
            .collect();
        Ok(Core { starts, seg_len: e.st })
    }

    /// Maps the `j`-th core level of the tree at `v` to the `j`-th core level
    /// of the tree at `v + P`.
    pub fn shift_map(&self, level: &BigUint, v: &BigUint) -> Result<BigUint, PeriodicityError> {
        let here = self.core_levels(v)?;
        let idx = here.index_of(level).ok_or_else(|| PeriodicityError::NotInCore(level.to_string()))?;
        let p = self.p.to_biguint()?;
        Ok(self.core_levels(&(v + p))?.nth(&idx))
    }

    /// `ℓ` in segment 0 and `ℓ + P/(−εᵢ)` in segment `i >= 1`, for the
    /// segment of first occurrence.
    pub fn shift_closed_form(&self, level: &BigUint, v: &BigUint) -> Result<BigUint, PeriodicityError> {
        let core = self.core_levels(v)?;
        let i = core.segment_of(level).ok_or_else(|| PeriodicityError::NotInCore(level.to_string()))?;
        if i == 0 {
            return Ok(level.clone());
        }
        let eps = self.negative_slopes[i - 1];
        let p = self.p.to_biguint()?;
        let x = BigUint::from((-*eps.numer()) as u64);
        let y = BigUint::from(*eps.denom() as u64);
        Ok(level + p * y / x)
    }

    /// Segment starts `§₁(v) < §₂(v) < …` are strictly increasing.
    pub fn starts_increasing(&self, v: &BigUint) -> Result<bool, PeriodicityError> {
        let core = self.core_levels(v)?;
        Ok(core.starts.windows(2).skip(1).all(|w| w[0] < w[1]))
    }
}

/// Concatenation of the `m + 1` level intervals `[§ᵢ(v), §ᵢ(v) + sT)`.
/// Intervals may overlap for degenerate bundles; positions then refer to the
/// first occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Core {
    pub starts: Vec<BigUint>,
    pub seg_len: BigUint,
}

impl Core {
    /// `(m + 1)·sT`.
    pub fn len(&self) -> BigUint {
        &self.seg_len * BigUint::from(self.starts.len())
    }

    pub fn is_empty(&self) -> bool {
        self.seg_len.is_zero() || self.starts.is_empty()
    }

    pub fn nth(&self, j: &BigUint) -> BigUint {
        let (seg, off) = j.div_rem(&self.seg_len);
        let seg: usize = seg.try_into().expect("core index out of range");
        &self.starts[seg] + off
    }

    /// First segment containing `level`.
    pub fn segment_of(&self, level: &BigUint) -> Option<usize> {
        self.starts.iter().position(|s| level >= s && *level < s + &self.seg_len)
    }

    pub fn index_of(&self, level: &BigUint) -> Option<BigUint> {
        let i = self.segment_of(level)?;
        Some(&self.seg_len * BigUint::from(i) + (level - &self.starts[i]))
    }

    pub fn contains(&self, level: &BigUint) -> bool {
        self.segment_of(level).is_some()
    }

    /// Levels in order; only sensible for small cores.
    pub fn iter(&self) -> impl Iterator<Item = BigUint> + '_ {
        self.starts.iter().flat_map(move |s| {
            let mut cur = s.clone();
            let end = s + &self.seg_len;
            std::iter::from_fn(move || {
                if cur < end {
                    let out = cur.clone();
                    cur += BigUint::one();
                    Some(out)
                } else {
                    None
                }
            })
        })
    }
}

/// Constants for one subformula, in bottom-up order.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SubformulaConstants {
    pub formula: Formula,
    pub t: Quantity,
    pub p: Quantity,
    pub bundle: Option<ConstantBundle>,
}

/// Recursion table for every subformula of `f` over `n` states. For a `UA`
/// node the threshold is `cT + 1`, the first value of the periodic region
/// under the `>= t` convention.
pub fn formula_constants(
    f: &Formula,
    n: u64,
    b_override: Option<u64>,
) -> Result<Vec<SubformulaConstants>, PeriodicityError> {
    let dag = f.dag();
    let mut pairs: Vec<TpPair> = Vec::with_capacity(dag.len());
    let mut out = Vec::with_capacity(dag.len());
    for node in &dag.nodes {
        let kids = |idx: &[usize]| idx.iter().map(|&i| pairs[i].clone()).collect::<Vec<_>>();
        let (pair, bundle) = match node.kind {
            NodeKind::True => (ctl_constants(CtlOp::True, &[], n)?, None),
            NodeKind::Atom => (ctl_constants(CtlOp::Atom, &[], n)?, None),
            NodeKind::Not(a) => (ctl_constants(CtlOp::Not, &kids(&[a]), n)?, None),
            NodeKind::And(a, b) => (ctl_constants(CtlOp::And, &kids(&[a, b]), n)?, None),
            NodeKind::Ex(a) => (ctl_constants(CtlOp::Ex, &kids(&[a]), n)?, None),
            NodeKind::Eu(a, b) => (ctl_constants(CtlOp::Eu, &kids(&[a, b]), n)?, None),
            NodeKind::Au(a, b) => (ctl_constants(CtlOp::Au, &kids(&[a, b]), n)?, None),
            NodeKind::Ua(a, b) => {
                let u = pairs[a].uniformize(&pairs[b])?;
                let bundle = ua_constants(n, &u.t, &u.p, b_override)?;
                let pair = TpPair { t: bundle.counter_threshold.add_u64(1), p: bundle.p.clone() };
                (pair, Some(bundle))
            }
            NodeKind::Ue(..) => {
                return Err(PeriodicityError::UeUnsupported(node.formula.to_string()));
            }
        };
        out.push(SubformulaConstants { formula: node.formula.clone(), t: pair.t.clone(), p: pair.p.clone(), bundle });
        pairs.push(pair);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith;
    use crate::formula::parse;
    use proptest::prelude::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn ctl_examples() {
        assert_eq!(ctl_constants(CtlOp::Atom, &[], 3).unwrap(), TpPair::small(0, 1));
        assert_eq!(ctl_constants(CtlOp::Ex, &[TpPair::small(0, 1)], 3).unwrap(), TpPair::small(1, 6));
        let au = ctl_constants(CtlOp::Au, &[TpPair::small(0, 1), TpPair::small(0, 1)], 2).unwrap();
        assert_eq!(au, TpPair::small(16, 2));
        assert!(matches!(ctl_constants(CtlOp::And, &[TpPair::small(0, 1)], 2), Err(PeriodicityError::Arity { .. })));
    }

    #[test]
    fn ua_bundle_b3() {
        let c = ua_constants(3, &Quantity::zero(), &Quantity::one(), Some(3)).unwrap();
        let b54 = arith::lcm_upto(54);
        assert_eq!(c.lcm_base.to_biguint().unwrap(), b54);
        assert_eq!(c.p.to_biguint().unwrap(), b54);
        assert_eq!(c.seg_threshold.to_biguint().unwrap(), &b54 * big(3).pow(9));
        assert_eq!(c.counter_threshold.to_biguint().unwrap(), &b54 * big(3).pow(11));
        assert_eq!(c.m, 4);
        assert!(c.segment_count_ok && !c.degenerate);
    }

    #[test]
    fn ua_bundle_b1_is_degenerate() {
        let c = ua_constants(3, &Quantity::zero(), &Quantity::one(), Some(1)).unwrap();
        assert_eq!(c.p.to_u64(), Some(2));
        assert_eq!(c.seg_threshold.to_u64(), Some(2));
        assert_eq!(c.counter_threshold.to_u64(), Some(2));
        assert!(c.degenerate);
        assert!(!c.segment_count_ok);
    }

    #[test]
    fn period_must_exceed_inherited_threshold() {
        let r = ua_constants(3, &Quantity::from(2), &Quantity::one(), Some(1));
        assert!(matches!(r, Err(PeriodicityError::PeriodNotAboveThreshold { .. })));
    }

    #[test]
    fn segment_examples() {
        let c = ua_constants(3, &Quantity::from(5), &Quantity::from(2), Some(3)).unwrap();
        let e = c.exact().unwrap();
        let v = &e.ct + &e.prev_t + &e.b8p + big(17);
        assert_eq!(c.segment_start(0, &v).unwrap(), Level::Finite(big(0)));
        assert_eq!(c.segment_start(c.m + 1, &v).unwrap(), Level::Infinite);
        assert_eq!(c.segment_start(1, &v).unwrap(), Level::Finite(&e.ct + big(17)));
        assert!(c.segment_start(c.m + 2, &v).is_err());
        assert!(c.segment_start(1, &e.ct).is_err());
        assert!(c.starts_increasing(&v).unwrap());
        let core = c.core_levels(&v).unwrap();
        assert_eq!(core.len(), &e.st * big(c.m as u64 + 1));
        assert_eq!(c.shift_map(&big(5), &v).unwrap(), big(5));
        let s1 = core.starts[1].clone();
        assert_eq!(c.shift_map(&(&s1 + big(3)), &v).unwrap(), &s1 + c.p.to_biguint().unwrap() + big(3));
    }

    #[test]
    fn shift_agrees_with_closed_form_and_is_bijective() {
        let c = ua_constants(3, &Quantity::from(1), &Quantity::from(2), Some(2)).unwrap();
        let e = c.exact().unwrap();
        let v = &e.ct + big(1234);
        let core = c.core_levels(&v).unwrap();
        let next = c.core_levels(&(&v + c.p.to_biguint().unwrap())).unwrap();
        for i in 0..=c.m {
            for off in [0u64, 1, 999] {
                let l = &core.starts[i] + big(off);
                let s = c.shift_map(&l, &v).unwrap();
                assert_eq!(s, c.shift_closed_form(&l, &v).unwrap());
                assert!(next.contains(&s));
                assert_eq!(next.index_of(&s), core.index_of(&l));
            }
        }
    }

    #[test]
    fn symbolic_defaults_for_large_n() {
        for n in [3u64, 4, 5] {
            let c = ua_constants(n, &Quantity::zero(), &Quantity::one(), None).unwrap();
            assert_eq!(c.b, 8 * n * n * n);
            assert!(!c.p.is_exact());
            assert!(c.segment_count_ok);
            assert!(c.segment_start(1, &big(1)).is_err());
        }
    }

    #[test]
    fn formula_table_bottom_up() {
        let f = parse("EX (p UA q)").unwrap();
        let rows = formula_constants(&f, 3, Some(1)).unwrap();
        assert_eq!(rows.len(), 4);
        let ua = &rows[2];
        assert_eq!(ua.t.to_u64(), Some(3));
        assert_eq!(ua.p.to_u64(), Some(2));
        assert_eq!(rows[3].t.to_u64(), Some(5));
        assert_eq!(rows[3].p.to_u64(), Some(12));
        assert!(formula_constants(&parse("p UE q").unwrap(), 3, None).is_err());
    }

    fn arb_pair() -> impl Strategy<Value = (u64, u64)> {
        (0u64..50, 1u64..12)
    }

    proptest! {
        #[test]
        fn parents_dominate_children(a in arb_pair(), b in arb_pair(), k in 1u64..5, which in 0usize..5) {
            let (pa, pb) = (TpPair::small(a.0, a.1), TpPair::small(b.0, b.1));
            let (op, kids) = match which {
                0 => (CtlOp::Not, vec![pa]),
                1 => (CtlOp::And, vec![pa, pb]),
                2 => (CtlOp::Ex, vec![pa]),
                3 => (CtlOp::Eu, vec![pa, pb]),
                _ => (CtlOp::Au, vec![pa, pb]),
            };
            let r = ctl_constants(op, &kids, k).unwrap();
            let (t, p) = r.as_u64().unwrap();
            for c in &kids {
                let (ct, cp) = c.as_u64().unwrap();
                prop_assert!(t >= ct);
                prop_assert_eq!(p % cp, 0);
            }
        }
    }
}
