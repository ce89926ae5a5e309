//! Non-negative integers that may be too large to materialize.
//!
//! A [`Quantity`] is either an exact [`BigUint`] or a polynomial
//! `c_0 + c_1·L + c_2·L² + …` in `L = lcm[1..n]` with small coefficients.
//! Periods of the CTL+Sync constants are monomials `c·L^d` and thresholds are
//! polynomials, so sums, products, maxima and least common multiples of such
//! values stay in this shape.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith;

/// `lcm[1..n]` is materialized exactly up to this `n` (about 144k bits).
pub const EXACT_LCM_LIMIT: u64 = 100_000;

/// Trial-division bound used when factoring monomial coefficients.
const FACTOR_BOUND: u64 = 1_000_000;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum QuantityError {
    #[error("lcm of non-monomial symbolic quantities is not representable")]
    NotMonomial,
    #[error("coefficient {0} has a prime factor above the factoring bound")]
    Unfactorable(String),
    #[error("quantities over lcm[1..{0}] and lcm[1..{1}] cannot be combined")]
    BaseMismatch(u64, u64),
    #[error("quantity {0} is symbolic and cannot be materialized")]
    Symbolic(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Repr {
    Exact(BigUint),
    /// Coefficients from degree 0 upward; the top one is nonzero and the
    /// degree is at least one.
    Poly {
        n: u64,
        coeffs: Vec<BigUint>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Quantity(Repr);

impl Quantity {
    pub fn zero() -> Self {
        Quantity(Repr::Exact(BigUint::zero()))
    }

    pub fn one() -> Self {
        Quantity(Repr::Exact(BigUint::one()))
    }

    /// `lcm[1..n]`, exact when `n <= EXACT_LCM_LIMIT`.
    pub fn lcm_upto(n: u64) -> Self {
        if n <= EXACT_LCM_LIMIT {
            Quantity(Repr::Exact(arith::lcm_upto(n)))
        } else {
            Quantity(Repr::Poly { n, coeffs: vec![BigUint::zero(), BigUint::one()] })
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.0, Repr::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&BigUint> {
        match &self.0 {
            Repr::Exact(v) => Some(v),
            Repr::Poly { .. } => None,
        }
    }

    pub fn to_biguint(&self) -> Result<BigUint, QuantityError> {
        self.as_exact().cloned().ok_or_else(|| QuantityError::Symbolic(self.to_string()))
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.as_exact().and_then(ToPrimitive::to_u64)
    }

    /// The `n` of the symbolic base `lcm[1..n]`, if any.
    pub fn symbolic_base(&self) -> Option<u64> {
        match &self.0 {
            Repr::Exact(_) => None,
            Repr::Poly { n, .. } => Some(*n),
        }
    }

    fn coeffs(&self) -> (Option<u64>, Vec<BigUint>) {
        match &self.0 {
            Repr::Exact(v) => (None, vec![v.clone()]),
            Repr::Poly { n, coeffs } => (Some(*n), coeffs.clone()),
        }
    }

    fn join_base(a: Option<u64>, b: Option<u64>) -> Result<Option<u64>, QuantityError> {
        match (a, b) {
            (Some(x), Some(y)) if x != y => Err(QuantityError::BaseMismatch(x, y)),
            (Some(x), _) | (_, Some(x)) => Ok(Some(x)),
            (None, None) => Ok(None),
        }
    }

    fn from_coeffs(n: Option<u64>, mut coeffs: Vec<BigUint>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        match n {
            Some(n) if coeffs.len() > 1 => Quantity(Repr::Poly { n, coeffs }),
            _ => Quantity(Repr::Exact(coeffs.into_iter().next().unwrap_or_default())),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, QuantityError> {
        let (na, a) = self.coeffs();
        let (nb, b) = other.coeffs();
        let n = Self::join_base(na, nb)?;
        let len = a.len().max(b.len());
        let sum =
            (0..len).map(|i| a.get(i).cloned().unwrap_or_default() + b.get(i).cloned().unwrap_or_default()).collect();
        Ok(Self::from_coeffs(n, sum))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, QuantityError> {
        let (na, a) = self.coeffs();
        let (nb, b) = other.coeffs();
        let n = Self::join_base(na, nb)?;
        let mut prod = vec![BigUint::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        Ok(Self::from_coeffs(n, prod))
    }

    pub fn mul_u64(&self, k: u64) -> Self {
        let (n, c) = self.coeffs();
        Self::from_coeffs(n, c.into_iter().map(|x| x * k).collect())
    }

    pub fn add_u64(&self, k: u64) -> Self {
        let (n, mut c) = self.coeffs();
        c[0] += k;
        Self::from_coeffs(n, c)
    }

    /// Total order. Symbolic comparison is by degree, then coefficients from
    /// the top, which is exact because `lcm[1..n] >= 2^n` for `n >= 7` and every
    /// coefficient is checked to have fewer than `n` bits.
    pub fn try_cmp(&self, other: &Self) -> Result<Ordering, QuantityError> {
        let (na, a) = self.coeffs();
        let (nb, b) = other.coeffs();
        let n = Self::join_base(na, nb)?;
        if let Some(n) = n {
            for c in a.iter().chain(b.iter()) {
                assert!(c.bits() < n, "coefficient too large for symbolic comparison over lcm[1..{n}]");
            }
        } else {
            return Ok(a[0].cmp(&b[0]));
        }
        if a.len() != b.len() {
            return Ok(a.len().cmp(&b.len()));
        }
        for i in (0..a.len()).rev() {
            match a[i].cmp(&b[i]) {
                Ordering::Equal => continue,
                o => return Ok(o),
            }
        }
        Ok(Ordering::Equal)
    }

    pub fn try_max(&self, other: &Self) -> Result<Self, QuantityError> {
        Ok(match self.try_cmp(other)? {
            Ordering::Less => other.clone(),
            _ => self.clone(),
        })
    }

    /// `(degree, coefficient)` when the value is a monomial `c·L^d`.
    fn as_monomial(&self) -> Option<(usize, &BigUint)> {
        match &self.0 {
            Repr::Exact(v) => Some((0, v)),
            Repr::Poly { coeffs, .. } => {
                let nz: Vec<usize> = (0..coeffs.len()).filter(|&i| !coeffs[i].is_zero()).collect();
                (nz.len() == 1).then(|| (nz[0], &coeffs[nz[0]]))
            }
        }
    }

    /// Least common multiple. Exact values combine directly; symbolic ones
    /// must be monomials, whose lcm is computed prime by prime.
    pub fn try_lcm(&self, other: &Self) -> Result<Self, QuantityError> {
        let n = Self::join_base(self.symbolic_base(), other.symbolic_base())?;
        let Some(n) = n else {
            let (a, b) = (self.as_exact().unwrap(), other.as_exact().unwrap());
            return Ok(Quantity(Repr::Exact(a.lcm(b))));
        };
        let (d1, c1) = self.as_monomial().ok_or(QuantityError::NotMonomial)?;
        let (d2, c2) = other.as_monomial().ok_or(QuantityError::NotMonomial)?;
        if c1.is_zero() || c2.is_zero() {
            return Ok(Quantity::zero());
        }
        let f1 = arith::factor_small(c1, FACTOR_BOUND).ok_or_else(|| QuantityError::Unfactorable(c1.to_string()))?;
        let f2 = arith::factor_small(c2, FACTOR_BOUND).ok_or_else(|| QuantityError::Unfactorable(c2.to_string()))?;
        let d = d1.max(d2);
        let mut primes: Vec<u64> = f1.iter().chain(f2.iter()).map(|&(p, _)| p).collect();
        primes.sort_unstable();
        primes.dedup();
        let exp_of = |f: &[(u64, u32)], p: u64| f.iter().find(|&&(q, _)| q == p).map_or(0u64, |&(_, e)| e as u64);
        let mut coeff = BigUint::one();
        for p in primes {
            let a = arith::prime_exponent_in_lcm(p, n) as u64;
            let e1 = d1 as u64 * a + exp_of(&f1, p);
            let e2 = d2 as u64 * a + exp_of(&f2, p);
            let e = e1.max(e2) - d as u64 * a;
            coeff *= BigUint::from(p).pow(e as u32);
        }
        let mut coeffs = vec![BigUint::zero(); d + 1];
        coeffs[d] = coeff;
        Ok(Self::from_coeffs(Some(n), coeffs))
    }

    /// `log2` of the value; exact for materialized values up to float
    /// precision, and for symbolic ones uses the sieved `log2 lcm[1..n]`.
    pub fn log2(&self) -> f64 {
        match &self.0 {
            Repr::Exact(v) => arith::log2_big(v),
            Repr::Poly { n, coeffs } => {
                let d = coeffs.len() - 1;
                let lead = arith::log2_big(&coeffs[d]);
                lead + d as f64 * arith::log2_lcm_upto(*n)
            }
        }
    }

    /// Serializable summary of the value.
    pub fn report(&self) -> QuantityReport {
        let decimal = match &self.0 {
            Repr::Exact(v) if v.bits() <= 4096 => Some(v.to_string()),
            _ => None,
        };
        QuantityReport { exact: self.is_exact(), decimal, expr: self.to_string(), log2: self.log2() }
    }
}

impl From<u64> for Quantity {
    fn from(v: u64) -> Self {
        Quantity(Repr::Exact(BigUint::from(v)))
    }
}

impl From<BigUint> for Quantity {
    fn from(v: BigUint) -> Self {
        Quantity(Repr::Exact(v))
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Exact(v) if v.bits() <= 256 => write!(f, "{v}"),
            Repr::Exact(v) => write!(f, "~2^{:.3}", arith::log2_big(v)),
            Repr::Poly { n, coeffs } => {
                let mut terms = Vec::new();
                for (i, c) in coeffs.iter().enumerate().rev() {
                    if c.is_zero() {
                        continue;
                    }
                    let term = match (i, c.is_one()) {
                        (0, _) => c.to_string(),
                        (1, true) => "L".to_string(),
                        (1, false) => format!("{c}*L"),
                        (_, true) => format!("L^{i}"),
                        (_, false) => format!("{c}*L^{i}"),
                    };
                    terms.push(term);
                }
                write!(f, "{} where L = lcm[1..{n}]", terms.join(" + "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantityReport {
    pub exact: bool,
    /// Decimal digits, present for exact values of at most 4096 bits.
    pub decimal: Option<String>,
    pub expr: String,
    pub log2: f64,
}

impl Serialize for Quantity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.report().serialize(s)
    }
}
