//! Bundled scenarios: small, fully explicit instances used by the CLI and
//! the acceptance tests.
//!
//! Three scenarios are shipped:
//!
//! * `immersed-circle`: the figure-eight-with-three-loops immersed circle,
//!   with central area `A_0 = 2` and lobe areas `A_1 = 1`.  Its bounding
//!   cochain has potential `W_0 = i q^{1/2}`, and the surgery at one
//!   self-intersection point (neck area `A(ε) = 1/2`, local system
//!   `y_ε = i`) preserves it.  The surgered side is hand-written because
//!   the ambient dimension is 1; the scenario runs in example mode.
//! * `embedded-pair-cone`: two disjoint embedded surfaces joined by a
//!   single strip through one intersection point, packaged as a bimodule
//!   atlas with a degree-one cocycle.  The mapping cone of the cocycle
//!   matches the surgered algebra with zero discrepancy.
//! * `dim3-synthetic`: a dimension-3 handle complex with one positive
//!   pass, one negative pass, an output pass and one far disk, exercising
//!   every branch of the atlas transform with full numeric checks.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::Rational64;
use thiserror::Error;

use crate::ainfty::{Cochain, CurvedAInftyAlgebra, Disk, GenKind, Generator};
use crate::cellular::{CellComplex, StandardBall};
use crate::cone::Sector;
use crate::mc::MCCandidate;
use crate::novikov::{r, NovikovElement};
use crate::surgery::{SignFlags, SurgeryData};

/// Errors raised when requesting a bundled scenario.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExampleError {
    #[error("unknown example {0}; available: immersed-circle, embedded-pair-cone, dim3-synthetic")]
    Unknown(String),
}

/// The names of the bundled scenarios, in the order the CLI lists them.
pub const NAMES: [&str; 3] = ["immersed-circle", "embedded-pair-cone", "dim3-synthetic"];

/// A bundled scenario: the algebra, its bounding cochain, and whatever
/// surgery or cone data the scenario demonstrates.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub name: &'static str,
    pub algebra: CurvedAInftyAlgebra,
    pub candidate: MCCandidate,
    /// The surgery datum, when the scenario carries one.
    pub surgery: Option<SurgeryData>,
    /// A hand-written surgered side (the dimension-1 scenario, where the
    /// atlas transform does not apply and the surgered atlas is explicit).
    pub surgered: Option<(CurvedAInftyAlgebra, MCCandidate)>,
    /// Sector tags for the cone scenario.
    pub sectors: Option<BTreeMap<String, Sector>>,
    /// The cocycle for the cone scenario.
    pub cocycle: Option<Cochain>,
    /// Whether the scenario needs the dimension-1 example mode.
    pub example_mode: bool,
}

/// Looks up a bundled scenario by name.
pub fn bundle(name: &str) -> Result<Bundle, ExampleError> {
    match name {
        "immersed-circle" => Ok(immersed_circle()),
        "embedded-pair-cone" => Ok(embedded_pair_cone()),
        "dim3-synthetic" => Ok(dim3_synthetic()),
        other => Err(ExampleError::Unknown(other.to_string())),
    }
}

fn i_q(e: Rational64) -> NovikovElement {
    NovikovElement::monomial(e, Complex64::new(0.0, 1.0))
}

fn disk(inputs: &[&str], output: &str, area: Rational64, sign: i8) -> Disk {
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

fn disk_hol(
    inputs: &[&str],
    output: &str,
    area: Rational64,
    sign: i8,
    holonomy: &[(&str, i64)],
) -> Disk {
    let mut d = disk(inputs, output, area, sign);
    d.holonomy = holonomy
        .iter()
        .map(|(label, e)| (label.to_string(), *e))
        .collect();
    d
}

fn si_pair(basis: &mut Vec<Generator>, a: &str, b: &str) {
    for (name, conj) in [(a, b), (b, a)] {
        basis.push(Generator {
            name: name.to_string(),
            kind: GenKind::Si {
                conjugate: conj.to_string(),
            },
            parity: 1,
        });
    }
}

/// The immersed circle with three self-intersection points `x, xp, xpp`,
/// central area 2 and lobe areas 1.  The atlas lists the three lobes, the
/// three central-region disks (two inputs, one output each) and the strip
/// through the 0-cell; the bounding cochain is
/// `b_0 = i q^{1/2} 1_grey + i q^{-1/2} (x + xp + xpp)`.
pub fn immersed_circle() -> Bundle {
    let mut complex = CellComplex::new(1);
    complex.add_cell("sigma_0", 0).unwrap();
    complex.add_cell("sigma_1", 1).unwrap();
    complex.mirror_dual();
    complex.set_diagonal("sigma_1", "sigma_0", 1).unwrap();
    complex.set_diagonal("sigma_0", "sigma_1", 1).unwrap();

    let mut basis = CurvedAInftyAlgebra::classical(complex.clone(), None)
        .basis()
        .to_vec();
    si_pair(&mut basis, "x", "xbar");
    si_pair(&mut basis, "xp", "xbarp");
    si_pair(&mut basis, "xpp", "xbarpp");

    let atlas = vec![
        // The three lobes, oriented positively.
        disk(&[], "x", r(1, 1), 1),
        disk(&[], "xp", r(1, 1), 1),
        disk(&[], "xpp", r(1, 1), 1),
        // The central region, read at each of its three corners.
        disk(&["xp", "xpp"], "x", r(2, 1), -1),
        disk(&["xpp", "x"], "xp", r(2, 1), -1),
        disk(&["x", "xp"], "xpp", r(2, 1), -1),
        // The strip through the 0-cell on the lobe containing x.
        disk(&["x"], "sigma_0", r(1, 1), -1),
    ];
    let algebra = CurvedAInftyAlgebra::new(
        basis,
        atlas,
        complex,
        BTreeMap::new(),
        r(2, 3),
        Some(r(6, 1)),
    );

    let candidate = MCCandidate::new(
        Cochain::from_terms([
            ("1_grey".to_string(), i_q(r(1, 2))),
            ("x".to_string(), i_q(r(-1, 2))),
            ("xp".to_string(), i_q(r(-1, 2))),
            ("xpp".to_string(), i_q(r(-1, 2))),
        ]),
        r(7, 12),
    );

    // The surgered side: two embedded circles with top cells sigma_1p and
    // sigma_1pp, both carrying local-system weight i.  Every disk that
    // passed through x now crosses the neck, trading area A(eps) = 1/2 for
    // a holonomy factor; projective flatness forces the central region to
    // cross against the orientation at its output corner (exponent -1).
    let mut ceps = CellComplex::new(1);
    for (name, dim) in [
        ("sigma_0p", 0),
        ("sigma_1p", 1),
        ("sigma_0pp", 0),
        ("sigma_1pp", 1),
    ] {
        ceps.add_cell(name, dim).unwrap();
    }
    ceps.mirror_dual();
    for (cell, dual) in [
        ("sigma_1p", "sigma_0p"),
        ("sigma_0p", "sigma_1p"),
        ("sigma_1pp", "sigma_0pp"),
        ("sigma_0pp", "sigma_1pp"),
    ] {
        ceps.set_diagonal(cell, dual, 1).unwrap();
    }
    let mut basis_eps = CurvedAInftyAlgebra::classical(ceps.clone(), None)
        .basis()
        .to_vec();
    si_pair(&mut basis_eps, "xp", "xbarp");
    si_pair(&mut basis_eps, "xpp", "xbarpp");
    let atlas_eps = vec![
        // The surgered x-lobe, now a strip through the 0-cell of the
        // first component.
        disk_hol(&[], "sigma_0p", r(1, 2), 1, &[("sigma_1p", 1)]),
        // The two untouched lobes.
        disk(&[], "xp", r(1, 1), 1),
        disk(&[], "xpp", r(1, 1), 1),
        // The central region with its x-corner smoothed: read at the
        // second component's 0-cell, crossing the neck backwards there.
        disk_hol(&["xp", "xpp"], "sigma_0pp", r(3, 2), -1, &[("sigma_1pp", -1)]),
        // The central region read at its surviving corners, crossing the
        // neck forwards at the smoothed input.
        disk_hol(&["xpp"], "xp", r(3, 2), -1, &[("sigma_1p", 1)]),
        disk_hol(&["xp"], "xpp", r(3, 2), -1, &[("sigma_1pp", 1)]),
    ];
    let local_system = BTreeMap::from([
        ("sigma_1p".to_string(), i_q(r(0, 1))),
        ("sigma_1pp".to_string(), i_q(r(0, 1))),
    ]);
    let algebra_eps = CurvedAInftyAlgebra::new(
        basis_eps,
        atlas_eps,
        ceps,
        local_system,
        r(2, 3),
        Some(r(6, 1)),
    );
    let candidate_eps = MCCandidate::new(
        Cochain::from_terms([
            ("1_grey".to_string(), i_q(r(1, 2))),
            ("xp".to_string(), i_q(r(-1, 2))),
            ("xpp".to_string(), i_q(r(-1, 2))),
        ]),
        r(7, 12),
    );

    // A nominal surgery datum for the dimension-1 regime: the cochain
    // transform only uses the names of the pair, the neck area and the
    // example-mode flag.
    let ball = StandardBall {
        top: "sigma_1".to_string(),
        sphere: "sigma_0".to_string(),
        point: "sigma_0".to_string(),
    };
    let surgery = SurgeryData {
        x: "x".to_string(),
        xbar: "xbar".to_string(),
        a_eps: r(1, 2),
        n: 1,
        mu: "sigma_0".to_string(),
        lambda: "lambda".to_string(),
        sigma_n: "sigma_n".to_string(),
        ball_plus: ball.clone(),
        ball_minus: ball,
        sign_flags: SignFlags::default(),
        caps: Default::default(),
    };

    Bundle {
        name: "immersed-circle",
        algebra,
        candidate,
        surgery: Some(surgery),
        surgered: Some((algebra_eps, candidate_eps)),
        sectors: None,
        cocycle: None,
        example_mode: true,
    }
}

/// Two disjoint embedded surfaces, each with a surgery ball (vertex,
/// sphere, top) and one 1-cell and 2-cell away from it, joined by a strip
/// through the single intersection point `x`.  The cocycle `q^{-1/2} x`
/// couples the blocks; its cone matches the surgered algebra.
pub fn embedded_pair_cone() -> Bundle {
    let mut complex = CellComplex::new(2);
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
        complex.add_cell(name, dim).unwrap();
    }
    complex.set_boundary("f_m", "s_m", 1).unwrap();
    complex.set_boundary("f_p", "s_p", 1).unwrap();
    complex.mirror_dual();
    complex.set_diagonal("f_m", "v_m", 1).unwrap();
    complex.set_diagonal("f_p", "v_p", 1).unwrap();

    let mut basis = CurvedAInftyAlgebra::classical(complex.clone(), None)
        .basis()
        .to_vec();
    si_pair(&mut basis, "x", "xbar");
    let atlas = vec![
        disk(&["a_p"], "u_p", r(1, 1), 1),
        disk(&["a_m"], "u_m", r(1, 1), 1),
        disk(&["a_m", "x"], "x", r(3, 2), 1),
    ];
    let algebra = CurvedAInftyAlgebra::new(
        basis,
        atlas,
        complex,
        BTreeMap::new(),
        r(3, 4),
        Some(r(6, 1)),
    );

    let sectors = [
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

    let cocycle = Cochain::from_terms([(
        "x".to_string(),
        NovikovElement::monomial(r(-1, 2), Complex64::new(1.0, 0.0)),
    )]);

    let surgery = SurgeryData::standard(
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
    );

    Bundle {
        name: "embedded-pair-cone",
        algebra,
        candidate: MCCandidate::new(Cochain::zero(), r(3, 5)),
        surgery: Some(surgery),
        surgered: None,
        sectors: Some(sectors),
        cocycle: Some(cocycle),
        example_mode: false,
    }
}

/// A dimension-3 handle complex (two standard balls with diagonal
/// pairings to the opposite vertices, one ambient top cell `t`) with one
/// disk of each kind: a positive pass `[x] → t`, a negative pass
/// `[x̄] → t`, an output pass `[] → x`, and a far disk `[t] → t`.  The
/// bounding cochain is `b_0 = i q^{-1/2} x`; in odd dimensions the
/// conjugate coefficient must vanish.
pub fn dim3_synthetic() -> Bundle {
    let mut complex = CellComplex::new(3);
    for (name, dim) in [
        ("v_p", 0),
        ("v_m", 0),
        ("s_p", 2),
        ("s_m", 2),
        ("f_p", 3),
        ("f_m", 3),
        ("t", 3),
    ] {
        complex.add_cell(name, dim).unwrap();
    }
    complex.set_boundary("f_p", "s_p", 1).unwrap();
    complex.set_boundary("f_m", "s_m", 1).unwrap();
    complex.mirror_dual();
    complex.set_diagonal("f_p", "v_p", 1).unwrap();
    complex.set_diagonal("f_m", "v_m", 1).unwrap();

    let mut basis = CurvedAInftyAlgebra::classical(complex.clone(), None)
        .basis()
        .to_vec();
    si_pair(&mut basis, "x", "xbar");
    let atlas = vec![
        disk(&["x"], "t", r(1, 1), 1),
        disk(&["xbar"], "t", r(1, 1), 1),
        disk(&[], "x", r(1, 1), 1),
        disk(&["t"], "t", r(1, 1), 1),
    ];
    let algebra = CurvedAInftyAlgebra::new(
        basis,
        atlas,
        complex,
        BTreeMap::new(),
        r(3, 4),
        Some(r(6, 1)),
    );

    let candidate = MCCandidate::new(
        Cochain::from_terms([("x".to_string(), i_q(r(-1, 2)))]),
        r(3, 5),
    );

    let surgery = SurgeryData::standard(
        "x",
        "xbar",
        r(1, 2),
        3,
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
    );

    Bundle {
        name: "dim3-synthetic",
        algebra,
        candidate,
        surgery: Some(surgery),
        surgered: None,
        sectors: None,
        cocycle: None,
        example_mode: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc;
    use crate::novikov::ZERO_TOL;

    #[test]
    fn all_bundles_validate() {
        for name in NAMES {
            let b = bundle(name).unwrap();
            let findings = b.algebra.validate();
            assert!(findings.is_empty(), "{name}: {findings:?}");
            b.candidate.check(&b.algebra).unwrap();
            if let Some((alg_eps, cand_eps)) = &b.surgered {
                let findings = alg_eps.validate();
                assert!(findings.is_empty(), "{name} surgered: {findings:?}");
                cand_eps.check(alg_eps).unwrap();
            }
        }
    }

    #[test]
    fn immersed_circle_is_weakly_bounding() {
        let b = immersed_circle();
        let residual = mc::mc_residual(&b.algebra, &b.candidate).unwrap();
        let expected = Cochain::from_terms([("1_white".to_string(), i_q(r(1, 2)))]);
        assert!(residual.approx_eq(&expected, ZERO_TOL), "{residual:?}");
        let (w, flat) = mc::potential(&b.algebra, &b.candidate).unwrap();
        assert!(flat);
        assert!(w.approx_eq(&i_q(r(1, 2)), ZERO_TOL));
    }

    #[test]
    fn immersed_circle_surgery_preserves_the_potential() {
        let b = immersed_circle();
        let (alg_eps, cand_eps) = b.surgered.as_ref().unwrap();
        let residual = mc::mc_residual(alg_eps, cand_eps).unwrap();
        let expected = Cochain::from_terms([("1_white".to_string(), i_q(r(1, 2)))]);
        assert!(residual.approx_eq(&expected, ZERO_TOL), "{residual:?}");
        let (w, flat) = mc::potential(alg_eps, cand_eps).unwrap();
        assert!(flat);
        assert!(w.approx_eq(&i_q(r(1, 2)), ZERO_TOL));
        // The local-system weight of both neck circles is i.
        for label in ["sigma_1p", "sigma_1pp"] {
            assert!(alg_eps.local_system()[label].approx_eq(&i_q(r(0, 1)), ZERO_TOL));
        }
    }

    #[test]
    fn example_mode_transform_reaches_the_bundled_cochain() {
        let b = immersed_circle();
        let data = b.surgery.as_ref().unwrap();
        let mut opts = crate::surgery::TransformOptions::default();
        opts.example_mode = true;
        let b_eps = crate::surgery::psi(&b.algebra, &b.candidate, data, &opts).unwrap();
        let (_, cand_eps) = b.surgered.as_ref().unwrap();
        assert!(b_eps.approx_eq(&cand_eps.b, ZERO_TOL), "{b_eps:?}");
    }

    #[test]
    fn dim3_synthetic_passes_the_curve_identity() {
        let b = dim3_synthetic();
        let report = crate::surgery::verify_curve_identity(
            &b.algebra,
            &b.candidate,
            b.surgery.as_ref().unwrap(),
            None,
            &crate::surgery::TransformOptions::default(),
        )
        .unwrap();
        assert!(report.passed, "{report:#?}");
    }

    #[test]
    fn embedded_pair_cone_matches_surgery() {
        let b = embedded_pair_cone();
        let atlas =
            crate::cone::BimoduleAtlas::new(b.algebra.clone(), b.sectors.clone().unwrap())
                .unwrap();
        let report = crate::cone::compare_cone_surgery(
            &atlas,
            b.surgery.as_ref().unwrap(),
            b.cocycle.as_ref().unwrap(),
            &b.candidate,
            &b.candidate,
            &crate::surgery::TransformOptions::default(),
            &crate::cone::ConeOptions::default(),
        )
        .unwrap();
        assert!(report.passed, "{report:#?}");
    }
}
