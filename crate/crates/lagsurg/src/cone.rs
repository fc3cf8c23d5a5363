//! Mapping cones of cocycles between embedded Lagrangian algebras, and
//! their comparison with surgery.
//!
//! When the immersion splits as a disjoint union of two embeddings, the
//! Floer space splits into four sectors
//!
//! ```text
//! CF(φ_0) = CF(L_−) ⊕ CF(L_+) ⊕ CF(L_−, L_+) ⊕ CF(L_+, L_−)
//! ```
//!
//! with the diagonal sectors A-infinity subalgebras and the off-diagonal
//! sectors bimodules over them.  Given a cocycle `b ∈ CF(L_−, L_+)`, the
//! mapping cone `Cone(b) = CF(L_−)[1] ⊕ CF(L_+)` carries composition maps
//! obtained by allowing `b` as an insertion at every `CF(L_−, L_+)` slot;
//! [`cone`] realizes this by contracting those slots out of the disk
//! atlas.  The degree shift is a parity flip on the `L_−` block, and the
//! position-dependent part of the orientation sign is compensated so that
//! every contracted disk contributes exactly what the uncontracted disk
//! contributed with `b` inserted.
//!
//! For a single odd intersection point `x` with `b = q^{−A(ε)} x`,
//! [`compare_cone_surgery`] builds the `ε`-surgery at `x` and compares
//! the structure maps of the two algebras on the generators away from the
//! handle.  Both sides shift areas by `A(ε)` per pass through `x` (the
//! cone by contracting the `q^{−A(ε)}` coefficient, the surgery through
//! its corner bookkeeping with the trivial handle unit), so on embedded
//! pairs the discrepancy vanishes term-exactly below truncation.

use std::collections::BTreeMap;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ainfty::{
    heartsuit_sign, AinftyError, Cochain, CurvedAInftyAlgebra, Disk, GenKind, Generator,
};
use crate::mc::{McError, MCCandidate};
use crate::novikov::NovikovElement;
use crate::surgery::{
    psi, transform_atlas, SurgeryData, SurgeryError, TransformOptions,
};

/// Errors raised by the cone constructions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConeError {
    /// The cocycle is not closed under the deformed coboundary.
    #[error("not closed: {0}")]
    NotClosed(String),
    #[error("not admissible: {0}")]
    NotAdmissible(String),
    /// A disk passes through the intersection point the wrong way.
    #[error("wrong-way corner: {0}")]
    WrongWayCorner(String),
    /// The sector typing of the atlas is inconsistent.
    #[error("sector error: {0}")]
    Sector(String),
    #[error(transparent)]
    Ainfty(#[from] AinftyError),
    #[error(transparent)]
    Mc(#[from] McError),
    #[error(transparent)]
    Surgery(#[from] SurgeryError),
}

/// The four sectors of the split Floer space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    /// `CF(L_−)`.
    Minus,
    /// `CF(L_+)`.
    Plus,
    /// `CF(L_−, L_+)`.
    Mp,
    /// `CF(L_+, L_−)`.
    Pm,
}

impl Sector {
    /// The boundary components an element of this sector connects, read
    /// along the disk boundary.
    fn sides(self) -> (u8, u8) {
        match self {
            Sector::Minus => (0, 0),
            Sector::Plus => (1, 1),
            Sector::Mp => (0, 1),
            Sector::Pm => (1, 0),
        }
    }
}

/// A Fukaya algebra of a disjoint pair of embedded Lagrangians, with
/// every non-unit generator tagged by its sector.
#[derive(Debug, Clone)]
pub struct BimoduleAtlas {
    algebra: CurvedAInftyAlgebra,
    sector: BTreeMap<String, Sector>,
}

impl BimoduleAtlas {
    /// Wraps an algebra with a sector assignment, checking that every
    /// non-unit generator is tagged, that conjugate pairs sit in opposite
    /// off-diagonal sectors, and that every disk's corner word is a
    /// composable string.
    pub fn new(
        algebra: CurvedAInftyAlgebra,
        sector: BTreeMap<String, Sector>,
    ) -> Result<Self, ConeError> {
        for g in algebra.basis() {
            match &g.kind {
                GenKind::UnitWhite | GenKind::UnitGrey => continue,
                GenKind::Cell { .. } => match sector.get(&g.name) {
                    Some(Sector::Minus) | Some(Sector::Plus) => {}
                    Some(_) => {
                        return Err(ConeError::Sector(format!(
                            "cell {} tagged with an off-diagonal sector",
                            g.name
                        )))
                    }
                    None => {
                        return Err(ConeError::Sector(format!("{} has no sector tag", g.name)))
                    }
                },
                GenKind::Si { conjugate } => {
                    match (sector.get(&g.name), sector.get(conjugate)) {
                        (Some(Sector::Mp), Some(Sector::Pm))
                        | (Some(Sector::Pm), Some(Sector::Mp)) => {}
                        _ => {
                            return Err(ConeError::Sector(format!(
                                "intersection pair {}/{} is not tagged mp/pm",
                                g.name, conjugate
                            )))
                        }
                    }
                }
            }
        }
        let atlas = Self { algebra, sector };
        for (i, disk) in atlas.algebra.atlas().iter().enumerate() {
            atlas
                .check_composable(disk)
                .map_err(|e| ConeError::Sector(format!("disk {i}: {e}")))?;
        }
        Ok(atlas)
    }

    pub fn algebra(&self) -> &CurvedAInftyAlgebra {
        &self.algebra
    }

    pub fn sector(&self, name: &str) -> Option<Sector> {
        self.sector.get(name).copied()
    }

    /// Units compose with everything; other generators must chain their
    /// boundary sides, and the output closes the cycle.
    fn check_composable(&self, disk: &Disk) -> Result<(), String> {
        let side_of = |name: &str| self.sector(name).map(Sector::sides);
        let mut current: Option<u8> = None;
        let mut first: Option<u8> = None;
        for name in &disk.inputs {
            let Some((l, r)) = side_of(name) else { continue };
            if let Some(c) = current {
                if c != l {
                    return Err(format!("corner {name} continues side {c} with side {l}"));
                }
            }
            first.get_or_insert(l);
            current = Some(r);
        }
        if let Some((l, r)) = side_of(&disk.output) {
            // The output seen as a corner runs against the orientation.
            if let Some(c) = current {
                if c != r {
                    return Err(format!(
                        "output {} continues side {c} with side {r}",
                        disk.output
                    ));
                }
            }
            if let Some(f) = first {
                if f != l {
                    return Err(format!(
                        "output {} closes side {l} against side {f}",
                        disk.output
                    ));
                }
            }
        } else if let (Some(f), Some(c)) = (first, current) {
            if f != c {
                return Err(format!("corner word ends on side {c} but started on {f}"));
            }
        }
        Ok(())
    }
}

/// Conventions for the cone construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeOptions {
    /// Implement the degree shift `CF(L_−)[1]` as a parity flip on the
    /// `L_−` block.
    pub flip_minus_parity: bool,
    pub tol: f64,
}

impl Default for ConeOptions {
    fn default() -> Self {
        ConeOptions {
            flip_minus_parity: true,
            tol: 1e-9,
        }
    }
}

/// Extracts the single Novikov monomial of a cone insertion coefficient
/// as `(area shift, rational scale, sign)`.
fn monomial_weight(v: &NovikovElement) -> Result<(Rational64, Rational64, i8), ConeError> {
    if v.len() != 1 {
        return Err(ConeError::NotAdmissible(
            "cone insertions need monomial coefficients".to_string(),
        ));
    }
    let (e, c) = v.leading().expect("nonempty");
    if c.im.abs() > 1e-12 {
        return Err(ConeError::NotAdmissible(
            "cone insertions need real coefficients".to_string(),
        ));
    }
    let r = Rational64::approximate_float(c.re.abs()).ok_or_else(|| {
        ConeError::NotAdmissible("cone insertion coefficient is not rational".to_string())
    })?;
    let sign = if c.re < 0.0 { -1 } else { 1 };
    Ok((e, r, sign))
}

/// The mapping cone `Cone(b) = CF(L_−)[1] ⊕ CF(L_+)`.
///
/// The cocycle `b` must be supported in `CF(L_−, L_+)` and closed under
/// the coboundary deformed by `b_±`; the returned algebra has every
/// `CF(L_−, L_+)` corner contracted with `b` (areas and weights absorbed)
/// and the `L_−` block parity-flipped.  The `b_±` deformations are not
/// baked in: deform the returned algebra with `b_− + b_+` to obtain the
/// full cone maps, e.g. its Maurer-Cartan residual is a multiple of the
/// unit when `b_±` are weakly bounding.
pub fn cone(
    atlas: &BimoduleAtlas,
    b: &Cochain,
    b_minus: &MCCandidate,
    b_plus: &MCCandidate,
    opts: &ConeOptions,
) -> Result<CurvedAInftyAlgebra, ConeError> {
    let alg = atlas.algebra();
    let supported = |c: &Cochain, label: &str, want: Sector| -> Result<(), ConeError> {
        for (g, _) in c.iter() {
            if atlas.sector(g) != Some(want) {
                return Err(ConeError::NotAdmissible(format!(
                    "{label} has support at {g} outside its sector"
                )));
            }
        }
        Ok(())
    };
    supported(b, "the cocycle", Sector::Mp)?;
    supported(&b_minus.b, "b_minus", Sector::Minus)?;
    supported(&b_plus.b, "b_plus", Sector::Plus)?;
    b_minus.check(alg)?;
    b_plus.check(alg)?;

    // Closedness below truncation: m_1 deformed by b_- + b_+.
    let bpm = b_minus.b.clone() + b_plus.b.clone();
    let mut image = Cochain::zero();
    for (g, v) in b.iter() {
        image = image + alg.m_multi(&[bpm.clone(), bpm.clone()], &[g])?.scaled(v);
    }
    if !image.approx_eq(&Cochain::zero(), opts.tol) {
        return Err(ConeError::NotClosed(format!(
            "m_1 of the cocycle has residual support {:?}",
            image.iter().map(|(g, _)| g).collect::<Vec<_>>()
        )));
    }

    // The cone basis: diagonal sectors and units, with the minus block
    // parity-flipped.
    let basis: Vec<Generator> = alg
        .basis()
        .iter()
        .filter(|g| {
            matches!(g.kind, GenKind::UnitWhite | GenKind::UnitGrey)
                || matches!(
                    atlas.sector(&g.name),
                    Some(Sector::Minus) | Some(Sector::Plus)
                )
        })
        .map(|g| {
            let mut g = g.clone();
            if opts.flip_minus_parity && atlas.sector(&g.name) == Some(Sector::Minus) {
                g.parity ^= 1;
            }
            g
        })
        .collect();
    let parity_cone = |name: &str| -> Option<u8> {
        basis.iter().find(|g| g.name == name).map(|g| g.parity)
    };

    // Contract every CF(L_-, L_+) slot with b.  Disks meeting the other
    // off-diagonal sector, or outputting an intersection point, carry
    // bimodule information only and drop out of the cone algebra.
    let mut disks: Vec<Disk> = Vec::new();
    'disks: for disk in alg.atlas() {
        // Disks meeting CF(L_+, L_-) carry bimodule information only.
        // Disks with a CF(L_-, L_+) output are kept with their inputs
        // contracted: the output constraint is not an insertion, and the
        // raw-output correlator form still sees the block coupling.
        if atlas.sector(&disk.output) == Some(Sector::Pm)
            || disk
                .inputs
                .iter()
                .any(|g| atlas.sector(g) == Some(Sector::Pm))
        {
            continue;
        }
        let mut inputs: Vec<String> = Vec::new();
        let mut area = disk.area;
        let mut sym = disk.sym;
        let mut sign = disk.sign;
        for g in &disk.inputs {
            if atlas.sector(g) == Some(Sector::Mp) {
                let v = b.coeff(g);
                if v.is_zero() {
                    continue 'disks;
                }
                let (e, r, s) = monomial_weight(&v)?;
                area += e;
                sym *= r;
                sign *= s;
            } else {
                inputs.push(g.clone());
            }
        }
        if inputs.len() == disk.inputs.len() {
            disks.push(disk.clone());
            continue;
        }
        // Compensate the position-dependent orientation sign so the
        // contracted disk reproduces the uncontracted weight with b
        // inserted.
        let parities0: Vec<u8> = disk
            .inputs
            .iter()
            .map(|g| alg.generator(g).map(|g| g.parity).unwrap_or(0))
            .collect();
        let parities1: Vec<u8> = inputs
            .iter()
            .map(|g| parity_cone(g).unwrap_or(0))
            .collect();
        let flips = (heartsuit_sign(&parities0) + heartsuit_sign(&parities1)) % 2;
        if flips == 1 {
            sign = -sign;
        }
        disks.push(Disk {
            inputs,
            output: disk.output.clone(),
            area,
            sign,
            sym,
            holonomy: disk.holonomy.clone(),
            constant_on_handle: false,
        });
    }

    let mut out = CurvedAInftyAlgebra::new(
        basis,
        disks,
        alg.complex().clone(),
        alg.local_system().clone(),
        alg.delta_gap(),
        alg.trunc(),
    );
    out.set_gap_exempt(alg.gap_exempt().iter().cloned());
    Ok(out)
}

/// One structure-map comparison line of [`compare_cone_surgery`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeLine {
    /// The input word of the compared structure map.
    pub word: Vec<String>,
    /// Sup-norm difference of the two outputs over the shared keys.
    pub diff: f64,
}

/// The comparison report of [`compare_cone_surgery`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeComparison {
    pub lines: Vec<ConeLine>,
    pub max_discrepancy: f64,
    pub shared: Vec<String>,
    pub passed: bool,
}

/// Compares the surgered algebra at `x` with the mapping cone on
/// `b = b(x)·x`, structure map by structure map.
///
/// Preconditions from the embedded-pair setting: no disk passes through
/// the conjugate point `x̄` ([`ConeError::WrongWayCorner`]), and the
/// cocycle is supported at intersection points.  The surgered side is
/// built by [`transform_atlas`] with the cochain `b_− + b_+ + b`; the two
/// algebras are compared, deformed by their bounding cochains, on all
/// words of length up to two in the generators shared by the
/// identification (everything outside the surgery balls), with outputs
/// restricted to shared keys and the units.
pub fn compare_cone_surgery(
    atlas: &BimoduleAtlas,
    data: &SurgeryData,
    b: &Cochain,
    b_minus: &MCCandidate,
    b_plus: &MCCandidate,
    topts: &TransformOptions,
    copts: &ConeOptions,
) -> Result<ConeComparison, ConeError> {
    let alg = atlas.algebra();
    if atlas.sector(&data.x) != Some(Sector::Mp) {
        return Err(ConeError::NotAdmissible(format!(
            "{} is not a CF(L_-, L_+) generator",
            data.x
        )));
    }
    for (i, disk) in alg.atlas().iter().enumerate() {
        if disk.constant_on_handle {
            continue;
        }
        for name in disk.inputs.iter().chain(std::iter::once(&disk.output)) {
            if *name == data.xbar {
                return Err(ConeError::WrongWayCorner(format!(
                    "disk {i} has a corner at {}",
                    data.xbar
                )));
            }
        }
    }
    if b.coeff(&data.x).is_zero() {
        return Err(ConeError::NotAdmissible(format!(
            "the cocycle has no support at {}",
            data.x
        )));
    }

    let cone_alg = cone(atlas, b, b_minus, b_plus, copts)?;
    let bpm = b_minus.b.clone() + b_plus.b.clone();
    let delta = b_minus.delta.min(b_plus.delta);
    let cand = MCCandidate::new(bpm.clone() + b.clone(), delta);
    let b_eps = psi(alg, &cand, data, topts)?;
    let (alg_eps, _) = transform_atlas(alg, &cand, data, topts)?;

    // Generators shared by the identification away from the handle: the
    // cone basis minus the surgery-ball cells, which are re-celled on the
    // surgered side.
    let balls = [
        &data.ball_plus.top,
        &data.ball_plus.sphere,
        &data.ball_plus.point,
        &data.ball_minus.top,
        &data.ball_minus.sphere,
        &data.ball_minus.point,
    ];
    let shared: Vec<String> = cone_alg
        .basis()
        .iter()
        .filter(|g| {
            matches!(g.kind, GenKind::Cell { .. } | GenKind::Si { .. })
                && !balls.contains(&&g.name)
        })
        .map(|g| g.name.clone())
        .collect();
    let mut keep: Vec<String> = shared.clone();
    keep.extend(
        cone_alg
            .basis()
            .iter()
            .filter(|g| matches!(g.kind, GenKind::UnitWhite | GenKind::UnitGrey))
            .map(|g| g.name.clone()),
    );

    let mut words: Vec<Vec<String>> = vec![Vec::new()];
    for g in &shared {
        words.push(vec![g.clone()]);
    }
    for g in &shared {
        for h in &shared {
            words.push(vec![g.clone(), h.clone()]);
        }
    }

    let restrict = |c: &Cochain| {
        Cochain::from_terms(
            c.iter()
                .filter(|(g, _)| keep.iter().any(|k| k == g))
                .map(|(g, v)| (g.to_string(), v.clone())),
        )
    };
    let sup = |c: Cochain| {
        c.iter()
            .map(|(_, v)| v.max_coeff_norm())
            .fold(0.0, f64::max)
    };
    let mut report = ConeComparison {
        lines: Vec::new(),
        max_discrepancy: 0.0,
        shared,
        passed: true,
    };
    for word in words {
        let args: Vec<&str> = word.iter().map(String::as_str).collect();
        let cone_bs = vec![bpm.clone(); args.len() + 1];
        let full_bs = vec![cand.b.clone(); args.len() + 1];
        let eps_bs = vec![b_eps.clone(); args.len() + 1];
        let lhs = restrict(&cone_alg.m_multi(&cone_bs, &args)?);
        let full = alg.m_multi(&full_bs, &args)?;
        let rhs_all = alg_eps.m_multi(&eps_bs, &args)?;
        let rhs = restrict(&rhs_all);
        // Shared structure constants must agree between the contracted
        // cone atlas and the surgered atlas.
        let mut diff = sup(lhs - rhs);
        // The block coupling: outputs of the full algebra at the
        // conjugate point correspond, under the identification, to
        // surgered outputs at the longitude.
        let coupling = full.coeff(&data.xbar) - rhs_all.coeff(&data.lambda);
        diff = diff.max(coupling.max_coeff_norm());
        report.max_discrepancy = report.max_discrepancy.max(diff);
        report.lines.push(ConeLine { word, diff });
    }
    report.passed = report.max_discrepancy <= copts.tol;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cellular::{CellComplex, StandardBall};
    use crate::novikov::r;
    use crate::surgery::SignFlags;
    use num_complex::Complex64;
    use num_rational::Rational64;

    /// A dimension-2 disjoint pair: each side has its surgery ball
    /// (vertex, sphere, top) and one 1-cell and 2-cell away from it.
    fn pair_complex() -> CellComplex {
        let mut c = CellComplex::new(2);
        for (name, dim) in [
            ("v_m", 0),
            ("s_m", 1),
            ("f_m", 2),
            ("a_m", 1),
            ("u_m", 2),
            ("v_p", 0),
            ("s_p", 1),
            ("f_p", 2),
            ("a_p", 1),
            ("u_p", 2),
        ] {
            c.add_cell(name, dim).unwrap();
        }
        c.set_boundary("f_m", "s_m", 1).unwrap();
        c.set_boundary("f_p", "s_p", 1).unwrap();
        c.mirror_dual();
        c.set_diagonal("f_m", "v_m", 1).unwrap();
        c.set_diagonal("f_p", "v_p", 1).unwrap();
        c
    }

    fn pair_atlas(disks: Vec<Disk>) -> BimoduleAtlas {
        let complex = pair_complex();
        let mut basis = CurvedAInftyAlgebra::classical(complex.clone(), None)
            .basis()
            .to_vec();
        for (name, conj) in [("x", "xbar"), ("xbar", "x")] {
            basis.push(Generator {
                name: name.to_string(),
                kind: GenKind::Si {
                    conjugate: conj.to_string(),
                },
                parity: 1,
            });
        }
        let alg = CurvedAInftyAlgebra::new(
            basis,
            disks,
            complex,
            Default::default(),
            r(3, 4),
            Some(r(6, 1)),
        );
        let sector = [
            ("v_m", Sector::Minus),
            ("s_m", Sector::Minus),
            ("f_m", Sector::Minus),
            ("a_m", Sector::Minus),
            ("u_m", Sector::Minus),
            ("v_p", Sector::Plus),
            ("s_p", Sector::Plus),
            ("f_p", Sector::Plus),
            ("a_p", Sector::Plus),
            ("u_p", Sector::Plus),
            ("x", Sector::Mp),
            ("xbar", Sector::Pm),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        BimoduleAtlas::new(alg, sector).unwrap()
    }

    fn disk(inputs: &[&str], output: &str, area: crate::novikov::Exp, sign: i8) -> Disk {
        Disk {
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            output: output.to_string(),
            area,
            sign,
            sym: Rational64::from_integer(1),
            holonomy: Vec::new(),
            constant_on_handle: false,
        }
    }

    fn strip_disks() -> Vec<Disk> {
        vec![
            disk(&["a_p"], "u_p", r(1, 1), 1),
            disk(&["a_m"], "u_m", r(1, 1), 1),
            disk(&["a_m", "x"], "x", r(1, 1), 1),
        ]
    }

    fn strip_cocycle() -> Cochain {
        Cochain::from_terms([(
            "x".to_string(),
            NovikovElement::monomial(r(-1, 2), Complex64::new(1.0, 0.0)),
        )])
    }

    fn zero_mc() -> MCCandidate {
        MCCandidate::new(Cochain::zero(), r(3, 5))
    }

    fn pair_data() -> SurgeryData {
        SurgeryData::standard(
            "x",
            "xbar",
            r(1, 2),
            2,
            StandardBall {
                top: "f_p".to_string(),
                sphere: "s_p".to_string(),
                point: "v_p".to_string(),
            },
            StandardBall {
                top: "f_m".to_string(),
                sphere: "s_m".to_string(),
                point: "v_m".to_string(),
            },
            SignFlags::default(),
        )
    }

    #[test]
    fn incomposable_words_are_rejected() {
        let complex = pair_complex();
        let alg = CurvedAInftyAlgebra::classical(complex, Some(r(6, 1)));
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
        let bad = CurvedAInftyAlgebra::new(
            basis,
            vec![disk(&["a_m", "a_p"], "u_p", r(1, 1), 1)],
            pair_complex(),
            Default::default(),
            r(3, 4),
            Some(r(6, 1)),
        );
        let sector = pair_atlas(Vec::new());
        let err = BimoduleAtlas::new(bad, sector.sector.clone()).unwrap_err();
        assert!(matches!(err, ConeError::Sector(_)));
    }

    #[test]
    fn zero_cocycle_gives_the_direct_sum() {
        let atlas = pair_atlas(strip_disks());
        let alg = cone(
            &atlas,
            &Cochain::zero(),
            &zero_mc(),
            &zero_mc(),
            &ConeOptions::default(),
        )
        .unwrap();
        // The strip vanishes; only the two block disks remain.
        assert_eq!(alg.atlas().len(), 2);
        // The minus block is parity-flipped, the plus block untouched.
        assert_eq!(alg.generator("a_m").unwrap().parity, 0);
        assert_eq!(alg.generator("a_p").unwrap().parity, 1);
        assert!(alg.generator("x").is_none());
    }

    #[test]
    fn strip_weight_couples_the_blocks() {
        let atlas = pair_atlas(strip_disks());
        let alg = cone(
            &atlas,
            &strip_cocycle(),
            &zero_mc(),
            &zero_mc(),
            &ConeOptions::default(),
        )
        .unwrap();
        // The strip [a_m, x] -> x is contracted to [a_m] -> x with the
        // area of the cocycle coefficient absorbed: q^{1 - 1/2}.
        let coupled = alg
            .atlas()
            .iter()
            .find(|d| d.output == "x")
            .expect("contracted strip");
        assert_eq!(coupled.inputs, vec!["a_m".to_string()]);
        assert_eq!(coupled.area, r(1, 2));
    }

    #[test]
    fn cone_surgery_discrepancy_vanishes() {
        let atlas = pair_atlas(strip_disks());
        let report = compare_cone_surgery(
            &atlas,
            &pair_data(),
            &strip_cocycle(),
            &zero_mc(),
            &zero_mc(),
            &TransformOptions::default(),
            &ConeOptions::default(),
        )
        .unwrap();
        assert!(report.passed, "{report:#?}");
        assert!(report.max_discrepancy <= 1e-12, "{report:#?}");
        // The coupling line is nontrivial: the strip couples a_m to the
        // conjugate point on one side and the longitude on the other.
        let line = report
            .lines
            .iter()
            .find(|l| l.word == vec!["a_m".to_string()])
            .unwrap();
        assert!(line.diff <= 1e-12);
    }

    #[test]
    fn wrong_way_corners_are_detected() {
        let mut disks = strip_disks();
        disks.push(disk(&["a_p", "xbar"], "xbar", r(1, 1), 1));
        let atlas = pair_atlas(disks);
        let err = compare_cone_surgery(
            &atlas,
            &pair_data(),
            &strip_cocycle(),
            &zero_mc(),
            &zero_mc(),
            &TransformOptions::default(),
            &ConeOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, ConeError::WrongWayCorner(_)));
    }
}
