//! Floer differentials and cohomology ranks over the Novikov field.
//!
//! The differential of a weakly bounding cochain `b` is the matrix of
//! `m_1^b = Σ m_{1+r+s}(b, …, b, ·, b, …, b)` on the non-unit generators.
//! Over the Novikov field every nonzero element is invertible, so cohomology
//! dimensions reduce to a rank computation; what needs care is truncation.
//! [`hf_dimension`] eliminates with pivots of minimal q-valuation (ties by
//! smallest index), the order under which the computed rank is stable
//! against deepening the truncation, and reports a certificate with the
//! pivot valuations and the margin left below the truncation order.  Ranks
//! are statements about the truncated matrix; the certificate is part of
//! the output contract.
//!
//! [`ess_quotient`] splits off an acyclic local subcomplex (the cells of the
//! surgery region) and returns the induced differential on the quotient,
//! which has the same cohomology.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ainfty::{AinftyError, Cochain, CurvedAInftyAlgebra, GenKind};
use crate::mc::{m1_deformed, potential, McError, MCCandidate};
use crate::novikov::{ratio_to_string, Exp, NovikovElement, NovikovError, ZERO_TOL};

/// Errors raised by Floer-theoretic operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FloerError {
    /// The candidate's residual is not a multiple of the strict unit.
    #[error("candidate is not projectively flat")]
    NotProjectivelyFlat,
    /// The differential does not square to zero below truncation.
    #[error("differential does not square to zero at ({0}, {1})")]
    SquareNotZero(String, String),
    /// A pivot decision depends on terms at the truncation boundary.
    #[error("rank unstable: {0}")]
    RankUnstable(String),
    /// The proposed local span is not closed under the differential.
    #[error("not a subcomplex: {0}")]
    NotSubcomplex(String),
    /// The local subcomplex is not acyclic.
    #[error("local subcomplex is not acyclic: {0}")]
    NotAcyclic(String),
    #[error(transparent)]
    Mc(#[from] McError),
    #[error(transparent)]
    Ainfty(#[from] AinftyError),
    #[error(transparent)]
    Novikov(#[from] NovikovError),
}

/// A square matrix over the Novikov field, indexed by generator names.
/// Column `j` is the image of generator `j`; entry `(i, j)` its coefficient
/// on generator `i`.
#[derive(Debug, Clone)]
pub struct NovikovMatrix {
    basis: Vec<String>,
    entries: Vec<Vec<NovikovElement>>,
}

impl NovikovMatrix {
    pub fn zero(basis: Vec<String>) -> Self {
        let n = basis.len();
        NovikovMatrix {
            basis,
            entries: vec![vec![NovikovElement::zero(); n]; n],
        }
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }

    pub fn size(&self) -> usize {
        self.basis.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &NovikovElement {
        &self.entries[i][j]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, v: NovikovElement) {
        self.entries[i][j] = v;
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.basis.iter().position(|b| b == name)
    }

    /// Applies the matrix to a cochain supported on the basis.
    pub fn apply(&self, c: &Cochain) -> Cochain {
        let mut out = Cochain::zero();
        for (name, v) in c.iter() {
            let Some(j) = self.index(name) else { continue };
            for (i, row) in self.entries.iter().enumerate() {
                out.add_term(&self.basis[i], &(row[j].clone() * v.clone()));
            }
        }
        out
    }

    /// The matrix product `self · other`.
    pub fn matmul(&self, other: &NovikovMatrix) -> NovikovMatrix {
        let n = self.size();
        let mut out = NovikovMatrix::zero(self.basis.clone());
        for i in 0..n {
            for j in 0..n {
                let mut acc = NovikovElement::zero();
                for k in 0..n {
                    acc = acc + self.entries[i][k].clone() * other.entries[k][j].clone();
                }
                out.entries[i][j] = acc;
            }
        }
        out
    }

    pub fn transpose(&self) -> NovikovMatrix {
        let n = self.size();
        let mut out = NovikovMatrix::zero(self.basis.clone());
        for i in 0..n {
            for j in 0..n {
                out.entries[i][j] = self.entries[j][i].clone();
            }
        }
        out
    }

    /// Coefficient-wise zero test within `tol`.
    pub fn is_zero(&self, tol: f64) -> bool {
        self.entries
            .iter()
            .flatten()
            .all(|e| e.max_coeff_norm() <= tol)
    }
}

/// One pivot of the elimination, for the stability certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Pivot {
    pub row: String,
    pub col: String,
    pub val: String,
}

/// The rank certificate: pivot valuations and the margin between the
/// deepest pivot and the truncation order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HfReport {
    pub dim: usize,
    pub rank: usize,
    pub pivots: Vec<Pivot>,
    /// `T − max pivot valuation` as an exact rational string, or `None`
    /// when the matrix is untruncated.
    pub margin: Option<String>,
}

/// The non-unit generator names of an algebra, in basis order.
pub fn floer_basis(alg: &CurvedAInftyAlgebra) -> Vec<String> {
    alg.basis()
        .iter()
        .filter(|g| !matches!(g.kind, GenKind::UnitWhite | GenKind::UnitGrey))
        .map(|g| g.name.clone())
        .collect()
}

/// The matrix of `m_1^b` on the non-unit generators.  Fails when `b` is
/// not projectively flat (the square-zero property has no meaning then).
pub fn floer_differential(
    alg: &CurvedAInftyAlgebra,
    cand: &MCCandidate,
) -> Result<NovikovMatrix, FloerError> {
    let (_, flat) = potential(alg, cand)?;
    if !flat {
        return Err(FloerError::NotProjectivelyFlat);
    }
    let basis = floer_basis(alg);
    let mut m = NovikovMatrix::zero(basis.clone());
    for (j, name) in basis.iter().enumerate() {
        let image = m1_deformed(
            alg,
            &cand.b,
            &cand.b,
            &Cochain::generator(name),
        )?;
        for (out_name, v) in image.iter() {
            if let Some(i) = m.index(out_name) {
                m.entries[i][j] = v.clone();
            }
        }
    }
    Ok(m)
}

/// Gaussian elimination with minimal-valuation pivoting.  Returns the rank
/// and the pivot list; fails with [`FloerError::RankUnstable`] when a pivot
/// would sit at or beyond its entry's truncation order.
fn rank_with_pivots(
    m: &NovikovMatrix,
    trunc: Option<Exp>,
) -> Result<(usize, Vec<Pivot>), FloerError> {
    let n = m.size();
    let mut work = m.entries.clone();
    let mut row_free = vec![true; n];
    let mut col_free = vec![true; n];
    let mut pivots = Vec::new();
    loop {
        let mut best: Option<(Exp, usize, usize)> = None;
        for i in (0..n).filter(|&i| row_free[i]) {
            for j in (0..n).filter(|&j| col_free[j]) {
                if let Some(v) = work[i][j].val_q() {
                    if best.map_or(true, |(bv, _, _)| v < bv) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((val, pi, pj)) = best else { break };
        if let Some(t) = trunc {
            if val >= t {
                return Err(FloerError::RankUnstable(format!(
                    "pivot at ({}, {}) has valuation {} >= truncation {}",
                    m.basis[pi],
                    m.basis[pj],
                    ratio_to_string(val),
                    ratio_to_string(t)
                )));
            }
        }
        let inv = work[pi][pj].invert()?;
        for i in (0..n).filter(|&i| row_free[i] && i != pi) {
            if work[i][pj].is_zero() {
                continue;
            }
            let factor = work[i][pj].clone() * inv.clone();
            for j in (0..n).filter(|&j| col_free[j]) {
                let delta = factor.clone() * work[pi][j].clone();
                work[i][j] = work[i][j].clone() - delta;
            }
        }
        row_free[pi] = false;
        col_free[pj] = false;
        pivots.push(Pivot {
            row: m.basis[pi].clone(),
            col: m.basis[pj].clone(),
            val: ratio_to_string(val),
        });
    }
    Ok((pivots.len(), pivots))
}

/// The Floer cohomology dimension of `(alg, b)` at the algebra's
/// truncation: `dim = #basis − 2·rank(m_1^b)`, with the stability
/// certificate.  Requires `(m_1^b)² = 0` below truncation.
pub fn hf_dimension(
    alg: &CurvedAInftyAlgebra,
    cand: &MCCandidate,
) -> Result<HfReport, FloerError> {
    let m = floer_differential(alg, cand)?;
    check_square_zero(&m)?;
    rank_report(&m, alg.trunc())
}

/// The rank certificate of an arbitrary differential matrix.
pub fn rank_report(m: &NovikovMatrix, trunc: Option<Exp>) -> Result<HfReport, FloerError> {
    let (rank, pivots) = rank_with_pivots(m, trunc)?;
    let margin = match trunc {
        Some(t) => {
            let deepest = pivots
                .iter()
                .map(|p| crate::novikov::ratio_from_str(&p.val).expect("pivot valuation"))
                .max()
                .unwrap_or_else(|| Rational64::from(0));
            Some(ratio_to_string(t - deepest))
        }
        None => None,
    };
    Ok(HfReport {
        dim: m.size() - 2 * rank,
        rank,
        pivots,
        margin,
    })
}

/// Checks `M² ≈ 0` coefficient-wise.
pub fn check_square_zero(m: &NovikovMatrix) -> Result<(), FloerError> {
    let sq = m.matmul(m);
    for i in 0..sq.size() {
        for j in 0..sq.size() {
            if sq.entry(i, j).max_coeff_norm() > ZERO_TOL {
                return Err(FloerError::SquareNotZero(
                    sq.basis[i].clone(),
                    sq.basis[j].clone(),
                ));
            }
        }
    }
    Ok(())
}

/// The quotient of the Floer complex by an acyclic local subcomplex.
#[derive(Debug, Clone)]
pub struct EssQuotient {
    /// The generators spanning the quotient (non-unit basis minus the
    /// leading generators of the local span).
    pub basis: Vec<String>,
    /// The induced differential on the quotient basis.
    pub differential: NovikovMatrix,
}

/// Splits off the local subcomplex spanned by `loc` (a list of cochains)
/// and returns the induced differential on the quotient.
///
/// Validates that the span is closed under `m_1^b` and acyclic; the
/// quotient then has the same cohomology as the total complex.
pub fn ess_quotient(
    alg: &CurvedAInftyAlgebra,
    cand: &MCCandidate,
    loc: &[Cochain],
) -> Result<EssQuotient, FloerError> {
    let m = floer_differential(alg, cand)?;
    check_square_zero(&m)?;

    // Triangularize the local span: give each vector a distinct leading
    // generator with invertible coefficient, reducing the others against it.
    let mut vectors: Vec<Cochain> = loc.to_vec();
    let mut leads: Vec<String> = Vec::new();
    for i in 0..vectors.len() {
        let lead = vectors[i]
            .iter()
            .filter(|(name, _)| !leads.contains(&name.to_string()))
            .filter_map(|(name, v)| v.val_q().map(|val| (val, name.to_string())))
            .min()
            .map(|(_, name)| name)
            .ok_or_else(|| {
                FloerError::NotSubcomplex("local span is linearly dependent".to_string())
            })?;
        let inv = vectors[i].coeff(&lead).invert()?;
        for j in 0..vectors.len() {
            if j == i {
                continue;
            }
            let c = vectors[j].coeff(&lead);
            if !c.is_zero() {
                vectors[j] = vectors[j].clone() - vectors[i].scaled(&(c * inv.clone()));
            }
        }
        leads.push(lead);
    }

    // Reduction modulo the span: clear the leading coordinates.
    let reduce = |mut w: Cochain| -> (Cochain, Vec<NovikovElement>) {
        let mut coords = Vec::with_capacity(vectors.len());
        for (v, lead) in vectors.iter().zip(&leads) {
            let c = w.coeff(lead);
            let coeff = if c.is_zero() {
                NovikovElement::zero()
            } else {
                let coeff = c * v.coeff(lead).invert().expect("triangular lead");
                w = w - v.scaled(&coeff);
                coeff
            };
            coords.push(coeff);
        }
        (w, coords)
    };

    // Closure and acyclicity of the local span.
    let k = vectors.len();
    let mut local = NovikovMatrix::zero(leads.clone());
    for (j, v) in vectors.iter().enumerate() {
        let (rem, coords) = reduce(m.apply(v));
        if !rem.approx_eq(&Cochain::zero(), ZERO_TOL) {
            return Err(FloerError::NotSubcomplex(format!(
                "image of local vector {j} leaves the span"
            )));
        }
        for (i, c) in coords.into_iter().enumerate() {
            local.entries[i][j] = c;
        }
    }
    let local_report = rank_report(&local, alg.trunc())?;
    if local_report.dim != 0 {
        return Err(FloerError::NotAcyclic(format!(
            "local complex has rank {} on {} generators",
            local_report.rank, k
        )));
    }

    // Induced differential on the complementary generators.
    let basis: Vec<String> = m
        .basis()
        .iter()
        .filter(|name| !leads.contains(name))
        .cloned()
        .collect();
    let mut differential = NovikovMatrix::zero(basis.clone());
    for (j, name) in basis.iter().enumerate() {
        let (rem, _) = reduce(m.apply(&Cochain::generator(name)));
        for (out_name, v) in rem.iter() {
            if let Some(i) = differential.index(out_name) {
                differential.entries[i][j] = v.clone();
            }
        }
    }
    Ok(EssQuotient {
        basis,
        differential,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ainfty::CurvedAInftyAlgebra;
    use crate::cellular::CellComplex;
    use crate::novikov::r;

    fn candidate() -> MCCandidate {
        MCCandidate::new(Cochain::zero(), r(1, 2))
    }

    /// Circle: zero classical differential on two generators.
    fn circle_algebra() -> CurvedAInftyAlgebra {
        let mut c = CellComplex::new(1);
        c.add_cell("p", 0).unwrap();
        c.add_cell("e", 1).unwrap();
        c.mirror_dual();
        CurvedAInftyAlgebra::classical(c, Some(r(6, 1)))
    }

    /// Two standard balls: sigma_{n,pm} (2-cells) with boundary
    /// sigma_{n-1,pm} (1-cells), plus two spectator cells.
    fn ball_pair_algebra() -> CurvedAInftyAlgebra {
        let mut c = CellComplex::new(2);
        for s in ["snm1_p", "snm1_m"] {
            c.add_cell(s, 1).unwrap();
        }
        for s in ["sn_p", "sn_m"] {
            c.add_cell(s, 2).unwrap();
        }
        c.add_cell("spec0", 0).unwrap();
        c.add_cell("spec2", 2).unwrap();
        c.set_boundary("sn_p", "snm1_p", 1).unwrap();
        c.set_boundary("sn_m", "snm1_m", 1).unwrap();
        c.mirror_dual();
        CurvedAInftyAlgebra::classical(c, Some(r(6, 1)))
    }

    #[test]
    fn zero_differential_full_dimension() {
        let report = hf_dimension(&circle_algebra(), &candidate()).unwrap();
        assert_eq!(report.rank, 0);
        assert_eq!(report.dim, 2);
        assert!(report.pivots.is_empty());
    }

    #[test]
    fn acyclic_pair_has_dimension_zero() {
        let mut c = CellComplex::new(1);
        c.add_cell("w", 0).unwrap();
        c.add_cell("u", 1).unwrap();
        c.set_boundary("u", "w", 1).unwrap();
        c.mirror_dual();
        let alg = CurvedAInftyAlgebra::classical(c, Some(r(6, 1)));
        let report = hf_dimension(&alg, &candidate()).unwrap();
        assert_eq!(report.rank, 1);
        assert_eq!(report.dim, 0);
        assert_eq!(report.pivots[0].val, "0");
        // Margin: truncation 6 minus pivot valuation 0.
        assert_eq!(report.margin.as_deref(), Some("6"));
    }

    #[test]
    fn square_not_zero_is_caught() {
        let mut c = CellComplex::new(2);
        c.add_cell("v", 0).unwrap();
        c.add_cell("e", 1).unwrap();
        c.add_cell("f", 2).unwrap();
        c.set_boundary("f", "e", 1).unwrap();
        c.set_boundary("e", "v", 1).unwrap();
        c.mirror_dual();
        let alg = CurvedAInftyAlgebra::classical(c, Some(r(6, 1)));
        assert!(matches!(
            hf_dimension(&alg, &candidate()),
            Err(FloerError::SquareNotZero(_, _))
        ));
    }

    #[test]
    fn ess_quotient_drops_acyclic_balls() {
        let alg = ball_pair_algebra();
        let cand = candidate();
        let total = hf_dimension(&alg, &cand).unwrap();
        assert_eq!(total.dim, 2); // spec0, spec2 survive

        let loc: Vec<Cochain> = ["sn_p", "sn_m", "snm1_p", "snm1_m"]
            .iter()
            .map(|s| Cochain::generator(s))
            .collect();
        let q = ess_quotient(&alg, &cand, &loc).unwrap();
        assert_eq!(q.basis, vec!["spec0".to_string(), "spec2".to_string()]);
        let report = rank_report(&q.differential, alg.trunc()).unwrap();
        assert_eq!(report.dim, total.dim);

        // The surgered-side span {sigma_n, sigma_{n-1,+} - sigma_{n-1,-}}
        // pattern: a difference vector is handled fine.
        let loc2 = vec![
            Cochain::generator("sn_p"),
            Cochain::generator("snm1_p"),
        ];
        assert!(ess_quotient(&alg, &cand, &loc2).is_ok());

        // A non-closed span is rejected.
        let bad = vec![Cochain::generator("sn_p")];
        assert!(matches!(
            ess_quotient(&alg, &cand, &bad),
            Err(FloerError::NotSubcomplex(_))
        ));

        // A closed but non-acyclic span is rejected.
        let nonacyclic = vec![Cochain::generator("spec0")];
        assert!(matches!(
            ess_quotient(&alg, &cand, &nonacyclic),
            Err(FloerError::NotAcyclic(_))
        ));
    }

    #[test]
    fn differential_requires_flatness() {
        // An atlas whose m_0 lands on a cell: b = 0 is not projectively
        // flat there.
        let mut alg = circle_algebra();
        let mut disks = alg.atlas().to_vec();
        disks.push(crate::ainfty::Disk {
            inputs: vec![],
            output: "p".to_string(),
            area: r(1, 1),
            sign: 1,
            sym: Rational64::new(1, 1),
            holonomy: vec![],
            constant_on_handle: false,
        });
        let mut c = alg.complex().clone();
        c.set_diagonal("p", "e", 1).unwrap();
        alg = CurvedAInftyAlgebra::new(
            alg.basis().to_vec(),
            disks,
            c,
            Default::default(),
            alg.delta_gap(),
            alg.trunc(),
        );
        assert!(matches!(
            floer_differential(&alg, &candidate()),
            Err(FloerError::NotProjectivelyFlat)
        ));
    }

    #[test]
    fn report_serializes() {
        let report = hf_dimension(&circle_algebra(), &candidate()).unwrap();
        let text = serde_json::to_string(&report).unwrap();
        assert!(text.contains("\"dim\":2"));
    }
}
