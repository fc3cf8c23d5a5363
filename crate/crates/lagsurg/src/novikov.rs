//! Truncated-series arithmetic in the Novikov field with complex
//! coefficients and exact rational exponents.
//!
//! An element is a finite sum `sum_i a_i q^{d_i}` with `a_i` complex,
//! `d_i` rational and strictly increasing, together with a truncation
//! order: exponents at or above the truncation are unknown and never
//! stored.  All valuation bookkeeping (the q-valuation, gap conditions,
//! cancellation of q-powers) is exact because exponents are exact; only
//! the complex coefficients are floating point, cleaned against a small
//! zero tolerance after every operation.

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Exact rational exponent of the formal variable `q`.
pub type Exp = Rational64;

/// Coefficients with magnitude at or below this threshold are treated as
/// exact zeros and dropped.  Exponent arithmetic is exact, so this only
/// cleans floating-point residue in the complex coefficients.
pub const ZERO_TOL: f64 = 1e-12;

/// Errors from the partial operations (inverse, log, exp).
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NovikovError {
    /// Inversion of the zero element.
    #[error("division by zero in the Novikov field")]
    ZeroDivision,
    /// `log_unit` on an element of nonzero valuation (or zero).
    #[error("not a unit: q-valuation must be zero and leading coefficient nonzero")]
    NotAUnit,
    /// `exp_series` on an element of negative valuation.
    #[error("exp of an element with negative q-valuation")]
    NegativeValuation,
    /// A series operation on an untruncated element would not terminate.
    #[error("operation requires a finite truncation order")]
    UnboundedTruncation,
}

/// A truncated Novikov series.
///
/// Invariants maintained by every constructor and operation: stored
/// exponents are strictly increasing (guaranteed by the map), every stored
/// coefficient has magnitude above [`ZERO_TOL`], every stored exponent is
/// strictly below the truncation, and the zero element has an empty term
/// list.  `trunc == None` means no truncation (`+infinity`).
#[derive(Clone, Debug, PartialEq)]
pub struct NovikovElement {
    terms: BTreeMap<Exp, Complex64>,
    trunc: Option<Exp>,
}

/// `min` on truncation orders where `None` is `+infinity`.
pub fn trunc_min(a: Option<Exp>, b: Option<Exp>) -> Option<Exp> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

fn opt_add(a: Option<Exp>, b: Option<Exp>) -> Option<Exp> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x + y),
        _ => None,
    }
}

impl NovikovElement {
    /// The zero element (no terms, no truncation).
    pub fn zero() -> Self {
        NovikovElement { terms: BTreeMap::new(), trunc: None }
    }

    /// The multiplicative unit `1 = q^0`.
    pub fn one() -> Self {
        Self::monomial(Exp::zero(), Complex64::new(1.0, 0.0))
    }

    /// A single term `c q^e`.
    pub fn monomial(e: Exp, c: Complex64) -> Self {
        let mut terms = BTreeMap::new();
        if c.norm() > ZERO_TOL {
            terms.insert(e, c);
        }
        NovikovElement { terms, trunc: None }
    }

    /// The constant `c q^0`.
    pub fn constant(c: Complex64) -> Self {
        Self::monomial(Exp::zero(), c)
    }

    /// `q^e` with coefficient one.
    pub fn q_pow(e: Exp) -> Self {
        Self::monomial(e, Complex64::new(1.0, 0.0))
    }

    /// Build from raw `(exponent, coefficient)` pairs and a truncation.
    pub fn from_terms<I>(iter: I, trunc: Option<Exp>) -> Self
    where
        I: IntoIterator<Item = (Exp, Complex64)>,
    {
        let mut out = NovikovElement { terms: BTreeMap::new(), trunc };
        for (e, c) in iter {
            out.add_term(e, c);
        }
        out
    }

    /// Accumulate `c q^e`, respecting truncation and the zero tolerance.
    pub fn add_term(&mut self, e: Exp, c: Complex64) {
        if let Some(t) = self.trunc {
            if e >= t {
                return;
            }
        }
        let entry = self.terms.entry(e).or_insert_with(Complex64::zero);
        *entry += c;
        if entry.norm() <= ZERO_TOL {
            self.terms.remove(&e);
        }
    }

    /// The truncation order; `None` means untruncated.
    pub fn trunc(&self) -> Option<Exp> {
        self.trunc
    }

    /// Iterate over `(exponent, coefficient)` pairs in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = (&Exp, &Complex64)> {
        self.terms.iter()
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True iff no terms are stored (zero up to the truncation order).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The q-valuation: minimal exponent with nonzero coefficient,
    /// `None` (`+infinity`) for the zero element.
    pub fn val_q(&self) -> Option<Exp> {
        self.terms.keys().next().copied()
    }

    /// Leading `(exponent, coefficient)` pair, if any.
    pub fn leading(&self) -> Option<(Exp, Complex64)> {
        self.terms.iter().next().map(|(e, c)| (*e, *c))
    }

    /// Coefficient of `q^e` (zero if absent).
    pub fn coeff(&self, e: Exp) -> Complex64 {
        self.terms.get(&e).copied().unwrap_or_else(Complex64::zero)
    }

    /// A lower bound for the true valuation: `min(val_q, trunc)`.
    fn val_floor(&self) -> Option<Exp> {
        trunc_min(self.val_q(), self.trunc)
    }

    /// Drop terms with exponent `>= t` and lower the truncation to `t`.
    pub fn truncate(&self, t: Exp) -> Self {
        let mut out = self.clone();
        out.truncate_in_place(t);
        out
    }

    fn truncate_in_place(&mut self, t: Exp) {
        self.trunc = trunc_min(self.trunc, Some(t));
        let t = self.trunc.unwrap();
        self.terms.retain(|e, _| *e < t);
    }

    /// Multiply by a complex scalar.
    pub fn scale(&self, c: Complex64) -> Self {
        if c.norm() <= ZERO_TOL {
            // An exact scalar zero annihilates regardless of truncation.
            return NovikovElement::zero();
        }
        let mut out = NovikovElement { terms: BTreeMap::new(), trunc: self.trunc };
        for (e, a) in &self.terms {
            out.add_term(*e, a * c);
        }
        out
    }

    /// Multiply by `q^e`, shifting exponents and truncation.
    pub fn shift(&self, e: Exp) -> Self {
        NovikovElement {
            terms: self.terms.iter().map(|(d, c)| (*d + e, *c)).collect(),
            trunc: self.trunc.map(|t| t + e),
        }
    }

    /// Multiplicative inverse up to truncation.
    ///
    /// Factors `a = c q^v (1 + eps)` with `val_q(eps) > 0` and sums the
    /// geometric series in `eps`.  Fails on zero, and on untruncated
    /// elements with more than one term (the series would not terminate).
    pub fn invert(&self) -> Result<Self, NovikovError> {
        let (v, c) = self.leading().ok_or(NovikovError::ZeroDivision)?;
        // eps = a / (c q^v) - 1, val(eps) > 0
        let unit = self.shift(-v).scale(c.inv());
        let mut eps = unit;
        eps.add_term(Exp::zero(), Complex64::new(-1.0, 0.0));
        // a^{-1} = c^{-1} q^{-v} sum_k (-eps)^k, valid below trunc(a) - 2v
        let rel = self.trunc.map(|t| t - v);
        let mut sum = NovikovElement::one();
        if let Some(r) = rel {
            sum.truncate_in_place(r);
        }
        if !eps.is_zero() {
            let r = rel.ok_or(NovikovError::UnboundedTruncation)?;
            let step = eps.val_q().expect("eps nonzero");
            let mut pow = NovikovElement::one().truncate(r);
            let mut k = step;
            while k < r {
                pow = (&pow * &eps).scale(Complex64::new(-1.0, 0.0));
                sum += pow.clone();
                k += step;
            }
        }
        Ok(sum.shift(-v).scale(c.inv()))
    }

    /// Logarithm of a unit: principal `Log` of the leading coefficient
    /// (shifted by `2 pi i k` for branch `k`) plus the Mercator series in
    /// the positive-valuation part.
    pub fn log_unit(&self, branch: i64) -> Result<Self, NovikovError> {
        let (v, c) = self.leading().ok_or(NovikovError::NotAUnit)?;
        if !v.is_zero() {
            return Err(NovikovError::NotAUnit);
        }
        let mut eps = self.scale(c.inv());
        eps.add_term(Exp::zero(), Complex64::new(-1.0, 0.0));
        let lead = c.ln() + Complex64::new(0.0, 2.0 * std::f64::consts::PI * branch as f64);
        let mut sum = NovikovElement::constant(lead);
        sum.trunc = self.trunc;
        if !eps.is_zero() {
            let t = self.trunc.ok_or(NovikovError::UnboundedTruncation)?;
            let step = eps.val_q().expect("eps nonzero");
            let mut pow = NovikovElement::one().truncate(t);
            let mut k = step;
            let mut j = 1i64;
            while k < t {
                pow = &pow * &eps;
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                sum += pow.scale(Complex64::new(sign / j as f64, 0.0));
                k += step;
                j += 1;
            }
        }
        Ok(sum)
    }

    /// Exponential: complex `exp` of the constant term times the power
    /// series of `exp` in the positive-valuation part.
    pub fn exp_series(&self) -> Result<Self, NovikovError> {
        if let Some(v) = self.val_q() {
            if v.is_negative() {
                return Err(NovikovError::NegativeValuation);
            }
        }
        let c0 = self.coeff(Exp::zero());
        let mut pos = self.clone();
        pos.terms.remove(&Exp::zero());
        let mut sum = NovikovElement::one();
        sum.trunc = self.trunc;
        if !pos.is_zero() {
            let t = self.trunc.ok_or(NovikovError::UnboundedTruncation)?;
            let step = pos.val_q().expect("pos nonzero");
            let mut pow = NovikovElement::one().truncate(t);
            let mut k = step;
            let mut fact = 1.0f64;
            let mut j = 1u64;
            while k < t {
                pow = &pow * &pos;
                fact *= j as f64;
                sum += pow.scale(Complex64::new(1.0 / fact, 0.0));
                k += step;
                j += 1;
            }
        }
        Ok(sum.scale(c0.exp()))
    }

    /// Term-exact equality below the common truncation, with coefficient
    /// differences measured against `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let bound = trunc_min(self.trunc, other.trunc);
        let below = |e: &Exp| bound.map_or(true, |t| *e < t);
        for (e, c) in self.terms.iter().filter(|(e, _)| below(e)) {
            if (c - other.coeff(*e)).norm() > tol {
                return false;
            }
        }
        for (e, c) in other.terms.iter().filter(|(e, _)| below(e)) {
            if (c - self.coeff(*e)).norm() > tol {
                return false;
            }
        }
        true
    }

    /// Largest coefficient magnitude (zero for the zero element).
    pub fn max_coeff_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl Default for NovikovElement {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Display for NovikovElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c.im.abs() <= ZERO_TOL {
                write!(f, "({})", c.re)?;
            } else {
                write!(f, "({}{:+}i)", c.re, c.im)?;
            }
            if !e.is_zero() {
                write!(f, "*q^({})", e)?;
            }
        }
        if let Some(t) = self.trunc {
            write!(f, " [trunc {}]", t)?;
        }
        Ok(())
    }
}

impl Add for &NovikovElement {
    type Output = NovikovElement;
    fn add(self, rhs: &NovikovElement) -> NovikovElement {
        let mut out = NovikovElement {
            terms: BTreeMap::new(),
            trunc: trunc_min(self.trunc, rhs.trunc),
        };
        for (e, c) in self.terms.iter().chain(rhs.terms.iter()) {
            out.add_term(*e, *c);
        }
        out
    }
}

impl Add for NovikovElement {
    type Output = NovikovElement;
    fn add(self, rhs: NovikovElement) -> NovikovElement {
        &self + &rhs
    }
}

impl AddAssign for NovikovElement {
    fn add_assign(&mut self, rhs: NovikovElement) {
        *self = &*self + &rhs;
    }
}

impl Sub for &NovikovElement {
    type Output = NovikovElement;
    fn sub(self, rhs: &NovikovElement) -> NovikovElement {
        self + &(-rhs)
    }
}

impl Sub for NovikovElement {
    type Output = NovikovElement;
    fn sub(self, rhs: NovikovElement) -> NovikovElement {
        &self - &rhs
    }
}

impl Neg for &NovikovElement {
    type Output = NovikovElement;
    fn neg(self) -> NovikovElement {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Neg for NovikovElement {
    type Output = NovikovElement;
    fn neg(self) -> NovikovElement {
        -&self
    }
}

impl Mul for &NovikovElement {
    type Output = NovikovElement;
    fn mul(self, rhs: &NovikovElement) -> NovikovElement {
        // trunc(ab) = min(trunc(a) + val(b), trunc(b) + val(a)), where the
        // valuation is bounded below by the truncation for zero-so-far
        // operands.  An exact zero (no terms, no truncation) annihilates.
        let trunc = trunc_min(
            opt_add(self.trunc, rhs.val_floor()),
            opt_add(rhs.trunc, self.val_floor()),
        );
        let mut out = NovikovElement { terms: BTreeMap::new(), trunc };
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }
}

impl Mul for NovikovElement {
    type Output = NovikovElement;
    fn mul(self, rhs: NovikovElement) -> NovikovElement {
        &self * &rhs
    }
}

/// Parse a rational written as `p/q` or `p`.
pub fn ratio_from_str(s: &str) -> Result<Exp, String> {
    let s = s.trim();
    let parts: Vec<&str> = s.split('/').collect();
    match parts.as_slice() {
        [p] => p
            .parse::<i64>()
            .map(Exp::from_integer)
            .map_err(|e| format!("bad rational {s:?}: {e}")),
        [p, q] => {
            let num: i64 = p.parse().map_err(|e| format!("bad rational {s:?}: {e}"))?;
            let den: i64 = q.parse().map_err(|e| format!("bad rational {s:?}: {e}"))?;
            if den == 0 {
                return Err(format!("bad rational {s:?}: zero denominator"));
            }
            Ok(Exp::new(num, den))
        }
        _ => Err(format!("bad rational {s:?}")),
    }
}

/// Render a rational as `p/q` (or `p` when integral).
pub fn ratio_to_string(r: Exp) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Serialize, Deserialize)]
struct TermDto {
    exp: String,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct NovikovDto {
    terms: Vec<TermDto>,
    trunc: String,
}

impl Serialize for NovikovElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let dto = NovikovDto {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| TermDto { exp: ratio_to_string(*e), re: c.re, im: c.im })
                .collect(),
            trunc: match self.trunc {
                Some(t) => ratio_to_string(t),
                None => "inf".to_string(),
            },
        };
        dto.serialize(s)
    }
}

impl<'de> Deserialize<'de> for NovikovElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let dto = NovikovDto::deserialize(d)?;
        let trunc = if dto.trunc == "inf" {
            None
        } else {
            Some(ratio_from_str(&dto.trunc).map_err(D::Error::custom)?)
        };
        let mut out = NovikovElement { terms: BTreeMap::new(), trunc };
        for t in dto.terms {
            let e = ratio_from_str(&t.exp).map_err(D::Error::custom)?;
            out.add_term(e, Complex64::new(t.re, t.im));
        }
        Ok(out)
    }
}

/// Shorthand for a rational from a numerator/denominator pair.
pub fn r(n: i64, d: i64) -> Exp {
    Exp::new(n, d)
}

/// Shorthand for an integral rational.
pub fn ri(n: i64) -> Exp {
    Exp::from_integer(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn val_q_examples() {
        // 3 q^{1/2} + q^2 -> 1/2
        let a = NovikovElement::from_terms(
            [(r(1, 2), c(3.0, 0.0)), (ri(2), c(1.0, 0.0))],
            None,
        );
        assert_eq!(a.val_q(), Some(r(1, 2)));
        // 0 -> +infinity
        assert_eq!(NovikovElement::zero().val_q(), None);
        // i q^{-1/2} -> -1/2  (the coefficient b_0(x) of the running example)
        let b = NovikovElement::monomial(r(-1, 2), c(0.0, 1.0));
        assert_eq!(b.val_q(), Some(r(-1, 2)));
    }

    #[test]
    fn mul_examples() {
        let one = NovikovElement::one();
        let q = NovikovElement::q_pow(ri(1));
        // (1+q)(1-q) = 1 - q^2
        let lhs = &(&one + &q) * &(&one - &q);
        let expect = &one - &NovikovElement::q_pow(ri(2));
        assert!(lhs.approx_eq(&expect, 1e-14));
        // q^{1/2} q^{1/2} = q
        let h = NovikovElement::q_pow(r(1, 2));
        assert!((&h * &h).approx_eq(&q, 1e-14));
        // (i q^{1/2})^2 = -q: the cancellation exponent in the running example
        let iq = NovikovElement::monomial(r(1, 2), c(0.0, 1.0));
        assert!((&iq * &iq).approx_eq(&(-&q), 1e-14));
    }

    #[test]
    fn valuation_additive_under_mul() {
        let a = NovikovElement::from_terms([(r(-1, 2), c(0.0, 1.0)), (ri(1), c(2.0, 0.0))], Some(ri(4)));
        let b = NovikovElement::from_terms([(r(1, 3), c(1.0, -1.0))], Some(ri(5)));
        let ab = &a * &b;
        assert_eq!(ab.val_q(), Some(r(-1, 2) + r(1, 3)));
    }

    #[test]
    fn invert_geometric_series() {
        // (1 - q) at truncation 3 -> 1 + q + q^2
        let a = (&NovikovElement::one() - &NovikovElement::q_pow(ri(1))).truncate(ri(3));
        let inv = a.invert().unwrap();
        let expect = NovikovElement::from_terms(
            [(ri(0), c(1.0, 0.0)), (ri(1), c(1.0, 0.0)), (ri(2), c(1.0, 0.0))],
            Some(ri(3)),
        );
        assert!(inv.approx_eq(&expect, 1e-12));
        assert!((&a * &inv).approx_eq(&NovikovElement::one(), 1e-12));
    }

    #[test]
    fn invert_monomials() {
        // (i q^{1/2})^{-1} = -i q^{-1/2}
        let a = NovikovElement::monomial(r(1, 2), c(0.0, 1.0));
        let inv = a.invert().unwrap();
        assert!(inv.approx_eq(&NovikovElement::monomial(r(-1, 2), c(0.0, -1.0)), 1e-12));
        // (b_0(x) q^{A(eps)})^{-1} with b_0(x) = i q^{-1/2}, A(eps) = 1/2 -> -i
        let b0x = NovikovElement::monomial(r(-1, 2), c(0.0, 1.0));
        let lhs = (&b0x * &NovikovElement::q_pow(r(1, 2))).invert().unwrap();
        assert!(lhs.approx_eq(&NovikovElement::constant(c(0.0, -1.0)), 1e-12));
    }

    #[test]
    fn invert_zero_fails() {
        assert_eq!(NovikovElement::zero().invert(), Err(NovikovError::ZeroDivision));
    }

    #[test]
    fn log_unit_examples() {
        use std::f64::consts::PI;
        // log(i) = i pi / 2 on the principal branch
        let i = NovikovElement::constant(c(0.0, 1.0));
        let l = i.log_unit(0).unwrap();
        assert!(l.approx_eq(&NovikovElement::constant(c(0.0, PI / 2.0)), 1e-12));
        // branch k shifts by 2 pi i k
        let l1 = i.log_unit(1).unwrap();
        assert!(l1.approx_eq(&NovikovElement::constant(c(0.0, PI / 2.0 + 2.0 * PI)), 1e-12));
        // i (1 + q) at truncation 3 -> i pi/2 + q - q^2/2
        let a = NovikovElement::from_terms(
            [(ri(0), c(0.0, 1.0)), (ri(1), c(0.0, 1.0))],
            Some(ri(3)),
        );
        let l = a.log_unit(0).unwrap();
        let expect = NovikovElement::from_terms(
            [(ri(0), c(0.0, PI / 2.0)), (ri(1), c(1.0, 0.0)), (ri(2), c(-0.5, 0.0))],
            Some(ri(3)),
        );
        assert!(l.approx_eq(&expect, 1e-12));
        // b_0(x) q^{A(eps)} = i in the running example -> i pi / 2
        let b0x = NovikovElement::monomial(r(-1, 2), c(0.0, 1.0));
        let u = &b0x * &NovikovElement::q_pow(r(1, 2));
        assert!(u.log_unit(0).unwrap().approx_eq(&NovikovElement::constant(c(0.0, PI / 2.0)), 1e-12));
    }

    #[test]
    fn log_unit_rejects_nonunits() {
        let q = NovikovElement::q_pow(ri(1));
        assert_eq!(q.log_unit(0), Err(NovikovError::NotAUnit));
        assert_eq!(NovikovElement::zero().log_unit(0), Err(NovikovError::NotAUnit));
    }

    #[test]
    fn exp_series_examples() {
        // exp(q) at truncation 3 -> 1 + q + q^2/2
        let q = NovikovElement::q_pow(ri(1)).truncate(ri(3));
        let e = q.exp_series().unwrap();
        let expect = NovikovElement::from_terms(
            [(ri(0), c(1.0, 0.0)), (ri(1), c(1.0, 0.0)), (ri(2), c(0.5, 0.0))],
            Some(ri(3)),
        );
        assert!(e.approx_eq(&expect, 1e-12));
        // exp(0) = 1
        assert!(NovikovElement::zero().exp_series().unwrap().approx_eq(&NovikovElement::one(), 1e-12));
        // exp(i pi / 2) = i
        let a = NovikovElement::constant(c(0.0, std::f64::consts::PI / 2.0));
        assert!(a.exp_series().unwrap().approx_eq(&NovikovElement::constant(c(0.0, 1.0)), 1e-12));
        // negative valuation rejected
        let bad = NovikovElement::q_pow(r(-1, 2));
        assert_eq!(bad.exp_series(), Err(NovikovError::NegativeValuation));
    }

    #[test]
    fn truncate_examples() {
        let a = NovikovElement::from_terms(
            [(ri(0), c(1.0, 0.0)), (ri(1), c(1.0, 0.0)), (ri(2), c(1.0, 0.0))],
            Some(ri(3)),
        );
        let t = a.truncate(ri(2));
        assert_eq!(t.len(), 2);
        assert_eq!(t.trunc(), Some(ri(2)));
        assert!(NovikovElement::zero().truncate(ri(5)).is_zero());
        // exp_series(q) at truncation 1 is just 1
        let e = NovikovElement::q_pow(ri(1)).truncate(ri(1)).exp_series().unwrap();
        assert!(e.approx_eq(&NovikovElement::one(), 1e-12));
        assert_eq!(e.len(), 1);
    }

    #[test]
    fn product_truncation_rule() {
        // trunc(ab) = min(trunc a + val b, trunc b + val a)
        let a = NovikovElement::from_terms([(ri(1), c(1.0, 0.0))], Some(ri(4)));
        let b = NovikovElement::from_terms([(ri(2), c(1.0, 0.0))], Some(ri(3)));
        let ab = &a * &b;
        assert_eq!(ab.trunc(), Some(ri(4)));
        // no term at or above the truncation survives
        assert!(ab.iter().all(|(e, _)| *e < ri(4)));
    }

    #[test]
    fn json_round_trip() {
        let a = NovikovElement::from_terms(
            [(r(-1, 2), c(0.0, 1.0)), (r(3, 2), c(2.5, -0.5))],
            Some(ri(6)),
        );
        let s = serde_json::to_string(&a).unwrap();
        let back: NovikovElement = serde_json::from_str(&s).unwrap();
        assert_eq!(a, back);
        let z = serde_json::to_string(&NovikovElement::zero()).unwrap();
        assert!(z.contains("inf"));
    }
}
