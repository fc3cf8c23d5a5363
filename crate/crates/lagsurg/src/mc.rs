//! Maurer-Cartan theory: residuals, disk potentials, and gauge equivalence.
//!
//! A weakly bounding cochain is an odd cochain `b` whose Maurer-Cartan
//! residual `Σ_d m_d(b, …, b)` is a multiple of the strict unit; the
//! multiple is the disk potential `W(b)`.  Because self-intersection
//! coefficients are allowed slightly negative valuation, admissibility is
//! phrased through a shifted valuation `val_q^δ` that adds `δ` on
//! self-intersection generators; the area gap of the atlas (`δ_gap > δ`)
//! is what keeps every insertion sum convergent.
//!
//! Gauge equivalence is implemented as in the translation of infinitesimal
//! equivalences into genuine ones: `b_1 ∼_h b_0` when
//! `b_1 − b_0 = m_1^{b_0, b_1}(h)`, and [`gauge_integrate`] produces `b_1`
//! from `(b_0, h)` by the fixed-point iteration
//! `b_{k+1} = b_0 + m_1^{b_0, b_k}(h)`, whose agreement order grows by at
//! least `ζ` per step.  [`gauge_away`] uses this to remove the coefficient
//! of the ball cell `σ_{n−1}` from a candidate, the normalization step that
//! precedes surgery.

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ainfty::{AinftyError, Cochain, CurvedAInftyAlgebra, GenKind};
use crate::cellular::StandardBall;
use crate::novikov::{ratio_to_string, Exp, NovikovElement, ZERO_TOL};

/// Errors raised by Maurer-Cartan operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum McError {
    /// The candidate fails an admissibility requirement.
    #[error("not admissible: {0}")]
    NotAdmissible(String),
    /// A fixed-point iteration failed to raise the agreement order.
    #[error("no progress: {0}")]
    NoProgress(String),
    #[error(transparent)]
    Ainfty(#[from] AinftyError),
}

/// A candidate weakly bounding cochain together with its valuation shift.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MCCandidate {
    pub b: Cochain,
    #[serde(with = "crate::ainfty::ratio_str")]
    pub delta: Rational64,
}

impl MCCandidate {
    pub fn new(b: Cochain, delta: Rational64) -> Self {
        MCCandidate { b, delta }
    }

    /// Checks the defining bounds: `val_q > 0` on cells and `1^grey`,
    /// `val_q > −δ` on self-intersection generators, and `δ < δ_gap`.
    pub fn check(&self, alg: &CurvedAInftyAlgebra) -> Result<(), McError> {
        if self.delta <= Rational64::zero() || self.delta >= alg.delta_gap() {
            return Err(McError::NotAdmissible(format!(
                "delta {} must lie in (0, delta_gap = {})",
                ratio_to_string(self.delta),
                ratio_to_string(alg.delta_gap())
            )));
        }
        for (name, v) in self.b.iter() {
            let g = alg
                .generator(name)
                .ok_or_else(|| McError::NotAdmissible(format!("unknown generator {name}")))?;
            let val = match v.val_q() {
                Some(val) => val,
                None => continue,
            };
            let (bound, what) = match g.kind {
                GenKind::Si { .. } => (-self.delta, "si"),
                _ if alg.gap_exempt().contains(name) => (-self.delta, "handle"),
                _ => (Rational64::zero(), "cell"),
            };
            if val <= bound {
                return Err(McError::NotAdmissible(format!(
                    "{what} coefficient of {name} has valuation {} <= {}",
                    ratio_to_string(val),
                    ratio_to_string(bound)
                )));
            }
        }
        Ok(())
    }
}

/// The shifted valuation `val_q^δ`: the minimum over the support of
/// `val_q(coefficient)`, raised by `δ` on self-intersection generators.
/// `None` encodes `+∞` (the zero cochain).
pub fn shifted_valuation(alg: &CurvedAInftyAlgebra, b: &Cochain, delta: Rational64) -> Option<Exp> {
    b.iter()
        .filter_map(|(name, v)| {
            let val = v.val_q()?;
            let shift = match alg.generator(name).map(|g| &g.kind) {
                Some(GenKind::Si { .. }) => delta,
                _ => Rational64::zero(),
            };
            Some(val + shift)
        })
        .min()
}

/// Admissibility of a candidate for surgery at the ordered pair `(x, x̄)`:
/// `val_q(b(x)) ∈ (−δ, 0)`, `val_q(b(x)·b(x̄) − 1) = 0`, and ambient
/// dimension at least 2.  The dimension-1 regime of the worked example is
/// only reachable with `example_mode`.
pub fn admissible_for_surgery(
    alg: &CurvedAInftyAlgebra,
    cand: &MCCandidate,
    x: &str,
    xbar: &str,
    example_mode: bool,
) -> Result<(), McError> {
    cand.check(alg)?;
    if alg.complex().dim() < 2 && !example_mode {
        return Err(McError::NotAdmissible(format!(
            "ambient dimension {} < 2 (enable example mode for the dim-1 harness)",
            alg.complex().dim()
        )));
    }
    let bx = cand.b.coeff(x);
    let val = bx
        .val_q()
        .ok_or_else(|| McError::NotAdmissible(format!("coefficient of {x} vanishes")))?;
    if !(val > -cand.delta && val < Rational64::zero()) {
        return Err(McError::NotAdmissible(format!(
            "val_q(b({x})) = {} not in (-delta, 0)",
            ratio_to_string(val)
        )));
    }
    let product = bx * cand.b.coeff(xbar) - NovikovElement::one();
    if product.val_q() != Some(Rational64::zero()) {
        return Err(McError::NotAdmissible(format!(
            "val_q(b({x}) b({xbar}) - 1) != 0"
        )));
    }
    Ok(())
}

/// The Maurer-Cartan residual `Σ_d m_d(b, …, b)`.
pub fn mc_residual(alg: &CurvedAInftyAlgebra, cand: &MCCandidate) -> Result<Cochain, McError> {
    cand.check(alg)?;
    Ok(alg.m_multi(std::slice::from_ref(&cand.b), &[])?)
}

/// The disk potential: the `1^white` coefficient of the residual, together
/// with the projective-flatness flag (whether the residual is exactly
/// `W · 1^white` below truncation).
pub fn potential(
    alg: &CurvedAInftyAlgebra,
    cand: &MCCandidate,
) -> Result<(NovikovElement, bool), McError> {
    let residual = mc_residual(alg, cand)?;
    let white = match alg.unit_white() {
        Some(white) => white.to_string(),
        None => return Ok((NovikovElement::zero(), residual.is_zero())),
    };
    let w = residual.coeff(&white);
    let mut rest = residual;
    rest.add_term(&white, &-w.clone());
    let flat = rest.approx_eq(&Cochain::zero(), ZERO_TOL);
    Ok((w, flat))
}

/// `m_1^{b_0, b_1}(h)` for a cochain argument, by linearity.
pub fn m1_deformed(
    alg: &CurvedAInftyAlgebra,
    b0: &Cochain,
    b1: &Cochain,
    h: &Cochain,
) -> Result<Cochain, McError> {
    let mut out = Cochain::zero();
    for (name, v) in h.iter() {
        let term = alg.m_multi(&[b0.clone(), b1.clone()], &[name])?;
        out = out + term.scaled(v);
    }
    Ok(out)
}

/// One gauge comparison: returns `b_0 + m_1^{b_0, b_1}(h)` and the defect
/// `b_1` minus that value.  The pair is gauge equivalent through `h` iff
/// the defect vanishes below truncation.
pub fn gauge_step(
    alg: &CurvedAInftyAlgebra,
    b0: &Cochain,
    b1: &Cochain,
    h: &Cochain,
) -> Result<(Cochain, Cochain), McError> {
    if h.parity(alg) == Some(1) {
        return Err(McError::NotAdmissible(
            "gauge cochain h must be even".to_string(),
        ));
    }
    let value = b0.clone() + m1_deformed(alg, b0, b1, h)?;
    let defect = b1.clone() - value.clone();
    Ok((value, defect))
}

/// The default step size for [`gauge_integrate`]: half the smallest
/// valuation surplus `area − s·δ_gap` over the atlas (the amount by which
/// every disk clears its corner-gap bound), or 1/2 on a classical atlas.
pub fn default_zeta(alg: &CurvedAInftyAlgebra) -> Rational64 {
    alg.atlas()
        .iter()
        .filter_map(|disk| {
            let s = disk.si_corner_count(alg) as i64;
            let surplus = disk.area - alg.delta_gap() * Rational64::from(s);
            (surplus > Rational64::zero()).then_some(surplus)
        })
        .min()
        .unwrap_or_else(|| Rational64::new(1, 1))
        / 2
}

/// Integrates an infinitesimal gauge transformation: solves
/// `b_∞ = b_0 + m_1^{b_0, b_∞}(h)` by fixed-point iteration, the agreement
/// order growing by at least `ζ` per step.  Requires
/// `val_q^δ(h) > ζ > 0`; stops once the agreement order passes the
/// truncation (or the iterates agree exactly).
pub fn gauge_integrate(
    alg: &CurvedAInftyAlgebra,
    b0: &Cochain,
    h: &Cochain,
    zeta: Rational64,
) -> Result<Cochain, McError> {
    if zeta <= Rational64::zero() {
        return Err(McError::NotAdmissible("zeta must be positive".to_string()));
    }
    if h.parity(alg) == Some(1) {
        return Err(McError::NotAdmissible(
            "gauge cochain h must be even".to_string(),
        ));
    }
    let target = alg.trunc();
    let mut b = b0.clone();
    let max_steps = match target {
        Some(t) => {
            let steps = (t / zeta).ceil().to_integer();
            steps.max(1) as usize + 2
        }
        None => 64,
    };
    for _ in 0..max_steps {
        let next = b0.clone() + m1_deformed(alg, b0, &b, h)?;
        if next.approx_eq(&b, ZERO_TOL) {
            return Ok(next);
        }
        let gap = (next.clone() - b.clone())
            .val_q()
            .expect("non-equal iterates differ somewhere");
        b = next;
        if let Some(t) = target {
            if gap >= t {
                return Ok(b);
            }
        }
    }
    Err(McError::NoProgress(
        "gauge iteration did not stabilize; val_q^delta(h) > zeta probably fails".to_string(),
    ))
}

/// Gauges away the `σ_{n−1}` coefficient of a candidate over a standard
/// ball: repeatedly integrates `h = ∓ b(σ_{n−1}) σ_n` (the sign chosen
/// against the boundary orientation `∂σ_n = ±σ_{n−1}`) until the
/// coefficient vanishes below truncation.  The output is gauge equivalent
/// to the input and has the same potential.
pub fn gauge_away(
    alg: &CurvedAInftyAlgebra,
    cand: &MCCandidate,
    ball: &StandardBall,
) -> Result<MCCandidate, McError> {
    cand.check(alg)?;
    for name in [&ball.top, &ball.sphere] {
        if alg.generator(name).is_none() {
            return Err(McError::NotAdmissible(format!(
                "ball cell {name} is not in the basis"
            )));
        }
    }
    let lead = alg.complex().boundary_coeff(&ball.top, &ball.sphere);
    if lead.abs() != 1 {
        return Err(McError::NoProgress(format!(
            "boundary of {} has no leading {} term",
            ball.top, ball.sphere
        )));
    }
    let zeta = default_zeta(alg);
    let mut b = cand.b.clone();
    for _ in 0..64 {
        let coeff = b.coeff(&ball.sphere);
        if coeff.is_zero() {
            return Ok(MCCandidate::new(b, cand.delta));
        }
        let h = Cochain::from_terms([(
            ball.top.clone(),
            -coeff.scale(num_complex::Complex64::new(lead as f64, 0.0)),
        )]);
        let next = gauge_integrate(alg, &b, &h, zeta)?;
        let old_val = b.coeff(&ball.sphere).val_q();
        let new_val = next.coeff(&ball.sphere).val_q();
        match (old_val, new_val) {
            (_, None) => return Ok(MCCandidate::new(next, cand.delta)),
            (Some(old), Some(new)) if new > old => b = next,
            _ => {
                return Err(McError::NoProgress(format!(
                    "coefficient of {} did not improve",
                    ball.sphere
                )))
            }
        }
    }
    Err(McError::NoProgress(format!(
        "coefficient of {} persists below truncation",
        ball.sphere
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ainfty::{Disk, Generator};
    use crate::cellular::CellComplex;
    use crate::novikov::r;
    use num_complex::Complex64;

    fn i_times(e: Exp) -> NovikovElement {
        NovikovElement::monomial(e, Complex64::new(0.0, 1.0))
    }

    /// A 2-disk: cells v (0), a (1), f (2) with d(f) = a; classical algebra.
    fn ball_algebra() -> CurvedAInftyAlgebra {
        let mut c = CellComplex::new(2);
        c.add_cell("v", 0).unwrap();
        c.add_cell("a", 1).unwrap();
        c.add_cell("f", 2).unwrap();
        c.set_boundary("f", "a", 1).unwrap();
        c.mirror_dual();
        CurvedAInftyAlgebra::classical(c, Some(r(6, 1)))
    }

    /// Circle-based algebra with an si pair and one two-cornered disk
    /// ([x, x] -> p), p emitting e through the diagonal.
    fn si_algebra() -> CurvedAInftyAlgebra {
        let mut c = CellComplex::new(1);
        c.add_cell("p", 0).unwrap();
        c.add_cell("e", 1).unwrap();
        c.mirror_dual();
        c.set_diagonal("p", "e", 1).unwrap();
        c.set_diagonal("e", "p", 1).unwrap();
        let alg = CurvedAInftyAlgebra::classical(c, Some(r(6, 1)));
        let mut basis = alg.basis().to_vec();
        basis.push(Generator {
            name: "x".to_string(),
            kind: GenKind::Si {
                conjugate: "xbar".to_string(),
            },
            parity: 1,
        });
        basis.push(Generator {
            name: "xbar".to_string(),
            kind: GenKind::Si {
                conjugate: "x".to_string(),
            },
            parity: 1,
        });
        let disks = vec![Disk {
            inputs: vec!["x".to_string(), "x".to_string()],
            output: "p".to_string(),
            area: r(2, 1),
            sign: 1,
            sym: Rational64::new(1, 1),
            holonomy: vec![],
            constant_on_handle: false,
        }];
        CurvedAInftyAlgebra::new(
            basis,
            disks,
            alg.complex().clone(),
            Default::default(),
            r(1, 2),
            Some(r(6, 1)),
        )
    }

    #[test]
    fn shifted_valuation_examples() {
        let alg = si_algebra();
        let b = Cochain::from_terms([("x".to_string(), i_times(r(-1, 2)))]);
        assert_eq!(shifted_valuation(&alg, &b, r(3, 5)), Some(r(1, 10)));
        let b = Cochain::from_terms([("p".to_string(), NovikovElement::q_pow(r(1, 1)))]);
        assert_eq!(shifted_valuation(&alg, &b, r(3, 5)), Some(r(1, 1)));
        assert_eq!(shifted_valuation(&alg, &Cochain::zero(), r(3, 5)), None);
    }

    #[test]
    fn residual_counts_insertions() {
        let alg = si_algebra();
        // b = i q^{-1/4} x: the (x, x) disk picks up b(x)^2 with
        // heart(1,1) = 1, output p emits e.
        let bx = i_times(r(-1, 4));
        let cand = MCCandidate::new(
            Cochain::from_terms([("x".to_string(), bx.clone())]),
            r(1, 3),
        );
        let residual = mc_residual(&alg, &cand).unwrap();
        let expected = Cochain::from_terms([(
            "e".to_string(),
            -(bx.clone() * bx * NovikovElement::q_pow(r(2, 1))),
        )]);
        assert!(residual.approx_eq(&expected, ZERO_TOL));
        // Not projectively flat: the residual misses 1^white.
        let (w, flat) = potential(&alg, &cand).unwrap();
        assert!(w.is_zero());
        assert!(!flat);
    }

    #[test]
    fn zero_candidate_reduces_to_m0() {
        let alg = si_algebra();
        let cand = MCCandidate::new(Cochain::zero(), r(1, 3));
        let residual = mc_residual(&alg, &cand).unwrap();
        assert!(residual.approx_eq(&alg.m_d(&[]).unwrap(), ZERO_TOL));
    }

    #[test]
    fn admissibility_bounds() {
        let alg = si_algebra();
        let good = MCCandidate::new(
            Cochain::from_terms([
                ("x".to_string(), i_times(r(-1, 4))),
                ("xbar".to_string(), i_times(r(1, 4)).scale(Complex64::new(-1.0, 0.0))),
            ]),
            r(1, 3),
        );
        // b(x) b(xbar) = i q^{-1/4} * -i q^{1/4} = 1... which has
        // val_q(1 - 1) != 0, so this pair is degenerate:
        assert!(admissible_for_surgery(&alg, &good, "x", "xbar", true).is_err());

        // Scale so that b(x) b(xbar) - 1 is a unit.
        let good = MCCandidate::new(
            Cochain::from_terms([
                ("x".to_string(), i_times(r(-1, 4))),
                ("xbar".to_string(), i_times(r(1, 4))),
            ]),
            r(1, 3),
        );
        // dim 1 requires example mode.
        assert!(matches!(
            admissible_for_surgery(&alg, &good, "x", "xbar", false),
            Err(McError::NotAdmissible(_))
        ));
        assert!(admissible_for_surgery(&alg, &good, "x", "xbar", true).is_ok());

        // Valuation of b(x) must be negative.
        let bad = MCCandidate::new(
            Cochain::from_terms([("x".to_string(), i_times(r(1, 4)))]),
            r(1, 3),
        );
        assert!(admissible_for_surgery(&alg, &bad, "x", "xbar", true).is_err());
    }

    #[test]
    fn gauge_step_and_integrate_classical() {
        let alg = ball_algebra();
        let b0 = Cochain::from_terms([("a".to_string(), NovikovElement::q_pow(r(1, 1)))]);

        // h = 0 leaves b0 alone.
        let (value, defect) = gauge_step(&alg, &b0, &b0, &Cochain::zero()).unwrap();
        assert!(value.approx_eq(&b0, ZERO_TOL));
        assert!(defect.is_zero());

        // h = c q f moves b0 by c q * d(f) = c q a, in one step.
        let h = Cochain::from_terms([(
            "f".to_string(),
            NovikovElement::monomial(r(1, 1), Complex64::new(2.0, 0.0)),
        )]);
        let b1 = gauge_integrate(&alg, &b0, &h, r(1, 2)).unwrap();
        let expected = Cochain::from_terms([(
            "a".to_string(),
            NovikovElement::monomial(r(1, 1), Complex64::new(3.0, 0.0)),
        )]);
        assert!(b1.approx_eq(&expected, ZERO_TOL));

        // The constructed pair is gauge equivalent: defect vanishes.
        let (_, defect) = gauge_step(&alg, &b0, &b1, &h).unwrap();
        assert!(defect.is_zero());
    }

    #[test]
    fn gauge_away_kills_sphere_coefficient() {
        let alg = ball_algebra();
        let ball = StandardBall {
            top: "f".to_string(),
            sphere: "a".to_string(),
            point: "v".to_string(),
        };
        let cand = MCCandidate::new(
            Cochain::from_terms([("a".to_string(), NovikovElement::q_pow(r(1, 1)))]),
            r(1, 2),
        );
        let out = gauge_away(&alg, &cand, &ball).unwrap();
        assert!(out.b.coeff("a").is_zero());

        // Already-clean candidates come back unchanged.
        let clean = MCCandidate::new(Cochain::zero(), r(1, 2));
        let out = gauge_away(&alg, &clean, &ball).unwrap();
        assert!(out.b.is_zero());
    }
}
