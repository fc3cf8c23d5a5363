//! The Lagrangian-surgery transform on bounding cochains and disk atlases.
//!
//! Surgery at an ordered self-intersection pair `(x, x̄)` replaces the two
//! points with a handle carrying a meridian sphere cell `μ` and a
//! longitudinal 1-cell `λ`.  On cochains the transform is
//!
//! ```text
//! Ψ(b_0) = b_0 − b_0(x)x − b_0(x̄)x̄ + c(μ)μ + c(λ)λ
//! ```
//!
//! with `c(μ) = ln(b_0(x) q^{A(ε)})` and `c(λ) = b_0(x)b_0(x̄)` (dimension
//! above two) or a logarithm of `b_0(x)b_0(x̄) − 1` (dimension two); its
//! derivative [`dpsi`] is the identity off the handle.  On atlases,
//! [`transform_atlas`] expands every disk passing through the handle into
//! the family of disks carrying repeated `μ` and `λ` insertions whose
//! resummation reproduces the original corner weights: each positive pass
//! (a corner at `x`) contributes `Σ_r c(μ)^r/r! = exp(c(μ))`, each negative
//! pass contributes `exp(−c(μ))` against a `λ` insertion, and output
//! corners on the handle are rerouted to the meridian or longitude.  The
//! per-corner closed forms are the oracle against which the truncated
//! families are tested, and [`verify_curve_identity`] checks the resulting
//! correlator identity
//!
//! ```text
//! Σ_d p_{d+1}(DΨ(σ), b_ε, …, b_ε)  =  Σ_r p_r(σ, b_0, …, b_0)
//! ```
//!
//! generator by generator, up to truncation and the recorded exponential
//! tail of the multiplicity caps.
//!
//! Orientation conventions on the handle are not canonical; the ambient
//! choices are exposed as [`SignFlags`], with defaults fixed by the bundled
//! examples.  Two bookkeepings for `c(λ)` in dimension two are provided
//! (see [`LambdaBookkeeping`]); they differ by a branch constant of the
//! logarithm and are deliberately not reconciled.

use std::collections::BTreeSet;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ainfty::{
    ratio_str, AinftyError, Cochain, CurvedAInftyAlgebra, Disk, GenKind,
};
use crate::cellular::{CellError, StandardBall};
use crate::floer::NovikovMatrix;
use crate::mc::{admissible_for_surgery, McError, MCCandidate};
use crate::novikov::{ratio_to_string, Exp, NovikovElement, NovikovError};

/// Errors raised by surgery operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurgeryError {
    /// The surgery data or candidate fails a structural precondition.
    #[error("not admissible: {0}")]
    NotAdmissible(String),
    /// A disk touches the handle region without a recognized pass pattern.
    #[error("unannotated corner: {0}")]
    UnannotatedCorner(String),
    /// The multiplicity caps leave an exponential tail above tolerance.
    #[error("caps too small: tail bound {tail:.3e} exceeds tolerance {tol:.3e}")]
    CapTooSmall { tail: f64, tol: f64 },
    /// The meridian local-system shift needs a bounding 1-chain.
    #[error("missing 1-chain: {0}")]
    MissingOneChain(String),
    #[error(transparent)]
    Mc(#[from] McError),
    #[error(transparent)]
    Ainfty(#[from] AinftyError),
    #[error(transparent)]
    Cell(#[from] CellError),
    #[error(transparent)]
    Novikov(#[from] NovikovError),
}

/// Orientation conventions on the handle, fixed by choices of orientations
/// of the meridianal and longitudinal cells.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignFlags {
    /// Use the meridian sphere on the minus side for insertions.
    #[serde(default)]
    pub meridian_minus: bool,
    /// Flip the boundary orientation of the new handle cells.
    #[serde(default)]
    pub flip_orientation: bool,
}

/// Caps on the multiplicity expansion: at most `R` meridian and `S`
/// longitude insertions per corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    #[serde(rename = "R")]
    pub r: usize,
    #[serde(rename = "S")]
    pub s: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { r: 12, s: 6 }
    }
}

/// The data of a surgery at an ordered self-intersection pair.
///
/// `a_eps` is the area `A(ε)` of the small triangle between the surgered
/// and unsurgered Lagrangians.  The handle cells are named explicitly:
/// `mu` must be one of the two boundary spheres (insertions are placed on
/// it; outputs land on the opposite sphere), `lambda` and `sigma_n` are
/// fresh names for the new 1-cell and n-cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurgeryData {
    pub x: String,
    pub xbar: String,
    #[serde(rename = "A_eps", with = "ratio_str")]
    pub a_eps: Exp,
    pub n: u32,
    pub mu: String,
    pub lambda: String,
    pub sigma_n: String,
    pub ball_plus: StandardBall,
    pub ball_minus: StandardBall,
    #[serde(default)]
    pub sign_flags: SignFlags,
    #[serde(default)]
    pub caps: Caps,
}

impl SurgeryData {
    /// Surgery data with the standard handle names: `mu` is the sphere
    /// selected by the sign flags, the new cells are `lambda` and
    /// `sigma_n`.
    pub fn standard(
        x: &str,
        xbar: &str,
        a_eps: Exp,
        n: u32,
        ball_plus: StandardBall,
        ball_minus: StandardBall,
        sign_flags: SignFlags,
    ) -> Self {
        let mu = if sign_flags.meridian_minus {
            ball_minus.sphere.clone()
        } else {
            ball_plus.sphere.clone()
        };
        SurgeryData {
            x: x.to_string(),
            xbar: xbar.to_string(),
            a_eps,
            n,
            mu,
            lambda: "lambda".to_string(),
            sigma_n: "sigma_n".to_string(),
            ball_plus,
            ball_minus,
            sign_flags,
            caps: Caps::default(),
        }
    }

    /// The sphere on which outputs through the handle land: the boundary
    /// sphere opposite to the insertion meridian, so that the standard
    /// surgered diagonal pairs meridian outputs with longitude constraints
    /// and vice versa, mirroring `c(x, x̄) = c(x̄, x) = 1`.
    pub fn output_meridian(&self) -> &str {
        if self.mu == self.ball_plus.sphere {
            &self.ball_minus.sphere
        } else {
            &self.ball_plus.sphere
        }
    }

    /// The cells of the two standard balls.
    fn ball_cells(&self) -> [&str; 6] {
        [
            &self.ball_plus.top,
            &self.ball_plus.sphere,
            &self.ball_plus.point,
            &self.ball_minus.top,
            &self.ball_minus.sphere,
            &self.ball_minus.point,
        ]
    }

    /// Structural checks against an algebra: the pair is a conjugate
    /// self-intersection pair, the area is positive, the dimension
    /// matches, the meridian is one of the boundary spheres, and the new
    /// names are fresh.
    pub fn validate_against(&self, alg: &CurvedAInftyAlgebra) -> Result<(), SurgeryError> {
        if self.a_eps <= Rational64::zero() {
            return Err(SurgeryError::NotAdmissible(format!(
                "A_eps = {} must be positive",
                ratio_to_string(self.a_eps)
            )));
        }
        match alg.generator(&self.x).map(|g| &g.kind) {
            Some(GenKind::Si { conjugate }) if conjugate == &self.xbar => {}
            _ => {
                return Err(SurgeryError::NotAdmissible(format!(
                    "{} and {} are not a conjugate self-intersection pair",
                    self.x, self.xbar
                )))
            }
        }
        if self.n != alg.complex().dim() {
            return Err(SurgeryError::NotAdmissible(format!(
                "surgery dimension {} does not match the complex dimension {}",
                self.n,
                alg.complex().dim()
            )));
        }
        if self.mu != self.ball_plus.sphere && self.mu != self.ball_minus.sphere {
            return Err(SurgeryError::NotAdmissible(format!(
                "mu = {} is not one of the boundary spheres",
                self.mu
            )));
        }
        for name in [&self.lambda, &self.sigma_n] {
            if alg.generator(name).is_some() {
                return Err(SurgeryError::NotAdmissible(format!(
                    "handle cell name {name} already names a generator"
                )));
            }
        }
        for name in self.ball_cells() {
            if alg.generator(name).is_none() {
                return Err(SurgeryError::NotAdmissible(format!(
                    "ball cell {name} is not in the basis"
                )));
            }
        }
        Ok(())
    }
}

/// The two bookkeepings for `c(λ)` in dimension two.  They differ by the
/// branch constant `ln(−1)`: the exponential-logarithm convention satisfies
/// `exp(c(λ)) = b_0(x)b_0(x̄) − 1` and is what the correlator identity
/// needs; the rotation-family convention resums the rotation-invariant
/// constant disks to `−ln(1 − b_0(x)b_0(x̄))`.  The discrepancy is
/// reported, not reconciled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LambdaBookkeeping {
    #[default]
    ExpLog,
    RotationFamily,
}

/// The local-system shift variants of the surgered cochain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftMode {
    /// Drop the `μ`-term and push `𝓛_ε = b_0(x) q^{A(ε)}` into the
    /// longitudinal holonomy.
    Lshift,
    /// Dimension two only: set the cochain to zero on the handle and push
    /// `𝓜_ε = b_0(x)b_0(x̄) − 1` into the meridian holonomy.
    Mshift,
}

/// Shared options for the surgery transforms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformOptions {
    pub caps: Caps,
    /// Tolerance against which the exponential tail of the caps is
    /// checked.
    pub tol: f64,
    /// Branch of the logarithm for the handle coefficients.
    pub branch: i64,
    pub bookkeeping: LambdaBookkeeping,
    /// Allows the dimension-one worked-example regime, where the surgered
    /// cochain simply drops the `x`-term.
    pub example_mode: bool,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions {
            caps: Caps::default(),
            tol: 1e-9,
            branch: 0,
            bookkeeping: LambdaBookkeeping::ExpLog,
            example_mode: false,
        }
    }
}

/// The pass pattern of one disk through the handle region: corners at `x`
/// are positive passes, corners at `x̄` negative, and the output corner is
/// recorded separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PassAnnotation {
    /// `κ`: input corners at `x`.
    pub positive: usize,
    /// `κ̄`: input corners at `x̄`.
    pub negative: usize,
    pub output: HandleCrossing,
}

/// How a disk's output marked point meets the handle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HandleCrossing {
    None,
    /// Output at `x`: a positive crossing at the outgoing node.
    Positive,
    /// Output at `x̄`: a negative crossing at the outgoing node.
    Negative,
}

impl PassAnnotation {
    /// Reads the pass pattern off a disk's corner labels.  Disks touching
    /// the ball cells directly (rather than the self-intersection pair)
    /// have no well-defined pass structure and are rejected.
    pub fn annotate(disk: &Disk, data: &SurgeryData) -> Result<PassAnnotation, SurgeryError> {
        let balls = data.ball_cells();
        for name in disk.inputs.iter().chain(std::iter::once(&disk.output)) {
            if balls.contains(&name.as_str()) && !disk.constant_on_handle {
                return Err(SurgeryError::UnannotatedCorner(format!(
                    "disk corner at ball cell {name}"
                )));
            }
        }
        let positive = disk.inputs.iter().filter(|g| **g == data.x).count();
        let negative = disk.inputs.iter().filter(|g| **g == data.xbar).count();
        let output = if disk.output == data.x {
            HandleCrossing::Positive
        } else if disk.output == data.xbar {
            HandleCrossing::Negative
        } else {
            HandleCrossing::None
        };
        Ok(PassAnnotation {
            positive,
            negative,
            output,
        })
    }

    /// Whether the disk meets the handle at all.
    pub fn touches_handle(&self) -> bool {
        self.positive + self.negative > 0 || self.output != HandleCrossing::None
    }
}

/// The handle coefficients `(c(μ), c(λ))` of the surgered cochain.
pub fn handle_coefficients(
    cand: &MCCandidate,
    data: &SurgeryData,
    opts: &TransformOptions,
) -> Result<(NovikovElement, NovikovElement), SurgeryError> {
    let bx = cand.b.coeff(&data.x);
    let bxbar = cand.b.coeff(&data.xbar);
    let c_mu = (bx.clone() * NovikovElement::q_pow(data.a_eps)).log_unit(opts.branch)?;
    let product = bx * bxbar;
    let c_lambda = if data.n == 2 {
        match opts.bookkeeping {
            LambdaBookkeeping::ExpLog => {
                (product - NovikovElement::one()).log_unit(opts.branch)?
            }
            LambdaBookkeeping::RotationFamily => {
                -(NovikovElement::one() - product).log_unit(opts.branch)?
            }
        }
    } else {
        product
    };
    Ok((c_mu, c_lambda))
}

fn check_vanishes_on_handle(cand: &MCCandidate, data: &SurgeryData) -> Result<(), SurgeryError> {
    for name in [
        &data.ball_plus.top,
        &data.ball_plus.sphere,
        &data.ball_minus.top,
        &data.ball_minus.sphere,
    ] {
        if !cand.b.coeff(name).is_zero() {
            return Err(SurgeryError::NotAdmissible(format!(
                "candidate does not vanish on the handle cell {name}"
            )));
        }
    }
    Ok(())
}

/// The surgered cochain `Ψ(b_0)`.
///
/// In example mode (dimension one) the transform only removes the `x`- and
/// `x̄`-terms; otherwise it adds `c(μ)μ + c(λ)λ` on the handle.  The
/// precondition that `b_0(x) q^{A(ε)}` is a unit pins
/// `A(ε) = −val_q(b_0(x))`.
pub fn psi(
    alg: &CurvedAInftyAlgebra,
    cand: &MCCandidate,
    data: &SurgeryData,
    opts: &TransformOptions,
) -> Result<Cochain, SurgeryError> {
    admissible_for_surgery(alg, cand, &data.x, &data.xbar, opts.example_mode)?;
    let mut b = cand.b.clone();
    b.add_term(&data.x, &-cand.b.coeff(&data.x));
    b.add_term(&data.xbar, &-cand.b.coeff(&data.xbar));
    if opts.example_mode {
        return Ok(b);
    }
    data.validate_against(alg)?;
    check_vanishes_on_handle(cand, data)?;
    let (c_mu, c_lambda) = handle_coefficients(cand, data, opts)?;
    b.add_term(&data.mu, &c_mu);
    b.add_term(&data.lambda, &c_lambda);
    Ok(b)
}

/// The local-system shift variants of `Ψ`.
///
/// Returns the shifted cochain together with the local-system update (the
/// labels and values to multiply into the local system).  `Lshift` moves
/// `exp(c(μ)) = b_0(x) q^{A(ε)}` onto the longitudinal label (named after
/// the longitude cell); `Mshift` additionally needs a 1-chain `κ` with
/// `m_1(κ) = σ_{0,+} − σ_{0,−}` and moves `b_0(x)b_0(x̄) − 1` onto the
/// meridian label.
pub fn psi_local_system_variant(
    alg: &CurvedAInftyAlgebra,
    cand: &MCCandidate,
    data: &SurgeryData,
    mode: ShiftMode,
    kappa: Option<&Cochain>,
    opts: &TransformOptions,
) -> Result<(Cochain, Vec<(String, NovikovElement)>), SurgeryError> {
    admissible_for_surgery(alg, cand, &data.x, &data.xbar, opts.example_mode)?;
    let bx = cand.b.coeff(&data.x);
    let bxbar = cand.b.coeff(&data.xbar);
    let mut b = cand.b.clone();
    b.add_term(&data.x, &-bx.clone());
    b.add_term(&data.xbar, &-bxbar.clone());
    match mode {
        ShiftMode::Lshift => {
            let l_eps = bx * NovikovElement::q_pow(data.a_eps);
            if l_eps.val_q() != Some(Rational64::zero()) {
                return Err(SurgeryError::Novikov(NovikovError::NotAUnit));
            }
            if !opts.example_mode {
                data.validate_against(alg)?;
                check_vanishes_on_handle(cand, data)?;
                let (_, c_lambda) = handle_coefficients(cand, data, opts)?;
                b.add_term(&data.lambda, &c_lambda);
            }
            Ok((b, vec![(data.lambda.clone(), l_eps)]))
        }
        ShiftMode::Mshift => {
            if data.n != 2 {
                return Err(SurgeryError::NotAdmissible(
                    "the meridian shift needs dimension two".to_string(),
                ));
            }
            let kappa = kappa.ok_or_else(|| {
                SurgeryError::MissingOneChain(
                    "the meridian shift needs a 1-chain with m_1(kappa) = \
                     sigma_{0,+} - sigma_{0,-}"
                        .to_string(),
                )
            })?;
            let zero = Cochain::zero();
            let mut boundary = Cochain::zero();
            for (name, v) in kappa.iter() {
                boundary = boundary + alg.m_multi(&[zero.clone(), zero.clone()], &[name])?.scaled(v);
            }
            let target = Cochain::generator(&data.ball_plus.point)
                - Cochain::generator(&data.ball_minus.point);
            if !boundary.approx_eq(&target, opts.tol) {
                return Err(SurgeryError::MissingOneChain(format!(
                    "m_1(kappa) is not {} - {}",
                    data.ball_plus.point, data.ball_minus.point
                )));
            }
            let m_eps = bx * bxbar - NovikovElement::one();
            if m_eps.val_q() != Some(Rational64::zero()) {
                return Err(SurgeryError::Novikov(NovikovError::NotAUnit));
            }
            Ok((b, vec![(data.mu.clone(), m_eps)]))
        }
    }
}

/// The coefficients of `DΨ` on the handle slots: `x ↦ a μ + b λ`,
/// `x̄ ↦ c λ`.
fn dpsi_coefficients(
    cand: &MCCandidate,
    data: &SurgeryData,
    _opts: &TransformOptions,
) -> Result<(NovikovElement, NovikovElement, NovikovElement), SurgeryError> {
    let bx = cand.b.coeff(&data.x);
    let bxbar = cand.b.coeff(&data.xbar);
    let mu_of_x = (bx.clone() * NovikovElement::q_pow(data.a_eps)).invert()?;
    let (lambda_of_x, lambda_of_xbar) = if data.n == 2 {
        let denom = (bx.clone() * bxbar.clone() - NovikovElement::one()).invert()?;
        (bxbar * denom.clone(), bx * denom)
    } else {
        (bxbar, bx)
    };
    Ok((mu_of_x, lambda_of_x, lambda_of_xbar))
}

/// The image of one generator under `DΨ`, written in the surgered names.
pub fn dpsi_image(
    cand: &MCCandidate,
    data: &SurgeryData,
    opts: &TransformOptions,
    sigma: &str,
) -> Result<Cochain, SurgeryError> {
    let (mu_of_x, lambda_of_x, lambda_of_xbar) = dpsi_coefficients(cand, data, opts)?;
    if sigma == data.x {
        Ok(Cochain::from_terms([
            (data.mu.clone(), mu_of_x),
            (data.lambda.clone(), lambda_of_x),
        ]))
    } else if sigma == data.xbar {
        Ok(Cochain::from_terms([(data.lambda.clone(), lambda_of_xbar)]))
    } else {
        Ok(Cochain::generator(sigma))
    }
}

/// The derivative `DΨ` of the surgery transform as a matrix.
///
/// The matrix acts on the essential generators of the unsurgered algebra
/// (every non-unit generator away from the ball tops and spheres).  It is
/// the identity on all slots except `x` and `x̄`; by the slot
/// identification `x ↔ μ`, `x̄ ↔ λ` of the essential quotients, those two
/// columns carry the handle coefficients.  The matrix is invertible: the
/// handle block is triangular with unit determinant times
/// `q^{−A(ε)}`.
pub fn dpsi(
    alg: &CurvedAInftyAlgebra,
    cand: &MCCandidate,
    data: &SurgeryData,
    opts: &TransformOptions,
) -> Result<NovikovMatrix, SurgeryError> {
    admissible_for_surgery(alg, cand, &data.x, &data.xbar, opts.example_mode)?;
    data.validate_against(alg)?;
    let skip: BTreeSet<&str> = [
        data.ball_plus.top.as_str(),
        data.ball_plus.sphere.as_str(),
        data.ball_minus.top.as_str(),
        data.ball_minus.sphere.as_str(),
    ]
    .into();
    let basis: Vec<String> = alg
        .basis()
        .iter()
        .filter(|g| {
            matches!(g.kind, GenKind::Cell { .. } | GenKind::Si { .. })
                && !skip.contains(g.name.as_str())
        })
        .map(|g| g.name.clone())
        .collect();
    let (mu_of_x, lambda_of_x, lambda_of_xbar) = dpsi_coefficients(cand, data, opts)?;
    let ix = basis.iter().position(|b| *b == data.x).ok_or_else(|| {
        SurgeryError::NotAdmissible(format!("{} is not an essential generator", data.x))
    })?;
    let ixbar = basis.iter().position(|b| *b == data.xbar).ok_or_else(|| {
        SurgeryError::NotAdmissible(format!("{} is not an essential generator", data.xbar))
    })?;
    let mut m = NovikovMatrix::zero(basis.clone());
    for j in 0..basis.len() {
        if j == ix {
            m.set_entry(ix, j, mu_of_x.clone());
            m.set_entry(ixbar, j, lambda_of_x.clone());
        } else if j == ixbar {
            m.set_entry(ixbar, j, lambda_of_xbar.clone());
        } else {
            m.set_entry(j, j, NovikovElement::one());
        }
    }
    Ok(m)
}

/// Factorials up to the largest cap that fits comfortably in `i64`
/// products.
const MAX_CAP: usize = 20;

fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

fn checked_factor(fact: i64, k: usize) -> Result<i64, SurgeryError> {
    fact.checked_mul(factorial(k)).ok_or_else(|| {
        SurgeryError::NotAdmissible(
            "symmetry denominators overflow; reduce the multiplicity caps".to_string(),
        )
    })
}

/// One branch of the multiplicity expansion of a disk through the handle.
#[derive(Debug, Clone)]
struct Partial {
    inputs: Vec<String>,
    shift: Exp,
    /// Product of the `r! s! l!` denominators.
    fact: i64,
    /// Mod-2 count of explicit `(−1)` factors from the expansion rules.
    parity: u8,
}

impl Partial {
    fn root() -> Self {
        Partial {
            inputs: Vec::new(),
            shift: Rational64::zero(),
            fact: 1,
            parity: 0,
        }
    }

    fn with_mus(&self, mu: &str, r: usize, signed: bool, shift: Exp) -> Result<Self, SurgeryError> {
        let mut next = self.clone();
        next.inputs.extend(std::iter::repeat(mu.to_string()).take(r));
        next.fact = checked_factor(next.fact, r)?;
        if signed {
            next.parity ^= (r % 2) as u8;
        }
        next.shift += shift;
        Ok(next)
    }

    fn with_lambdas(&self, lambda: &str, s: usize) -> Result<Self, SurgeryError> {
        let mut next = self.clone();
        next.inputs
            .extend(std::iter::repeat(lambda.to_string()).take(s));
        next.fact = checked_factor(next.fact, s)?;
        Ok(next)
    }
}

/// What [`transform_atlas`] did, for reports and loud failure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransformReport {
    /// Disks generated by the handle expansion.
    pub families: usize,
    /// Constant handle disks removed (their role is taken over by the
    /// cellular boundary of the longitude).
    pub removed_constant: usize,
    /// Disks away from the handle, copied verbatim.
    pub copied: usize,
    /// Heuristic bound, at unit coefficient scale, on the exponential
    /// tails cut off by the multiplicity caps.
    pub tail: f64,
    /// The corner gap of the transformed algebra, re-derived from the
    /// shifted areas.
    #[serde(with = "ratio_str")]
    pub delta_gap: Exp,
}

fn exp_tail(x: f64, cap: usize) -> f64 {
    let mut partial = 0.0;
    let mut term = 1.0;
    for k in 0..=cap {
        partial += term;
        term *= x / (k as f64 + 1.0);
    }
    (x.exp() - partial).max(0.0)
}

/// The Lagrangian-surgery transform of a disk atlas.
///
/// Every disk passing through `x` or `x̄` is expanded into the family of
/// disks with up to `R` meridian and `S` longitude insertions per corner;
/// disks away from the handle are copied; constant disks on the handle are
/// removed.  The returned algebra lives on the surgered cell complex, with
/// the meridian spheres and the longitude exempt from the positive-
/// valuation insertion gap, and with the corner gap re-derived from the
/// shifted areas.  Truncating the insertion sums leaves an exponential
/// tail; its bound is recorded in the report and, when it exceeds the
/// square root of the tolerance (so that tolerance inflation in the
/// verifier would dominate), the transform fails loudly with
/// [`SurgeryError::CapTooSmall`] instead of silently resumming.
pub fn transform_atlas(
    alg0: &CurvedAInftyAlgebra,
    cand: &MCCandidate,
    data: &SurgeryData,
    opts: &TransformOptions,
) -> Result<(CurvedAInftyAlgebra, TransformReport), SurgeryError> {
    admissible_for_surgery(alg0, cand, &data.x, &data.xbar, false)?;
    data.validate_against(alg0)?;
    check_vanishes_on_handle(cand, data)?;
    if opts.caps.r > MAX_CAP || opts.caps.s > MAX_CAP {
        return Err(SurgeryError::NotAdmissible(format!(
            "multiplicity caps beyond {MAX_CAP} overflow the symmetry denominators"
        )));
    }
    let (c_mu, c_lambda) = handle_coefficients(cand, data, opts)?;
    let n = data.n;
    let a = data.a_eps;
    let mu_out = data.output_meridian().to_string();
    let cap_r = opts.caps.r;
    let cap_s = opts.caps.s;

    // The surgered cell structure and basis.
    let complex_eps = alg0.complex().surger_cells(
        &data.ball_plus,
        &data.ball_minus,
        &crate::cellular::SurgerOptions {
            cell_1: data.lambda.clone(),
            cell_n: data.sigma_n.clone(),
            flip_orientation: data.sign_flags.flip_orientation,
            handle_diagonal: None,
        },
    )?;
    let dropped: BTreeSet<&str> = [
        data.x.as_str(),
        data.xbar.as_str(),
        data.ball_plus.top.as_str(),
        data.ball_minus.top.as_str(),
    ]
    .into();
    let mut basis_eps: Vec<crate::ainfty::Generator> = alg0
        .basis()
        .iter()
        .filter(|g| !dropped.contains(g.name.as_str()))
        .cloned()
        .collect();
    basis_eps.push(crate::ainfty::Generator {
        name: data.lambda.clone(),
        kind: GenKind::Cell { dim: 1 },
        parity: ((n - 1) % 2) as u8,
    });
    basis_eps.push(crate::ainfty::Generator {
        name: data.sigma_n.clone(),
        kind: GenKind::Cell { dim: n },
        parity: 0,
    });
    let parity0 = |name: &str| -> Result<u8, SurgeryError> {
        alg0.generator(name)
            .map(|g| g.parity)
            .ok_or_else(|| SurgeryError::NotAdmissible(format!("unknown generator {name}")))
    };
    let parity_eps = |name: &str| -> Result<u8, SurgeryError> {
        if name == data.lambda {
            Ok(((n - 1) % 2) as u8)
        } else {
            parity0(name)
        }
    };
    let is_si_eps = |name: &str| {
        basis_eps
            .iter()
            .any(|g| g.name == name && matches!(g.kind, GenKind::Si { .. }))
    };

    let cmu_norm = c_mu.max_coeff_norm();
    let clam_norm = c_lambda.max_coeff_norm();
    let mut disks_eps: Vec<Disk> = Vec::new();
    let mut report = TransformReport {
        families: 0,
        removed_constant: 0,
        copied: 0,
        tail: 0.0,
        delta_gap: alg0.delta_gap(),
    };

    for disk in alg0.atlas() {
        if disk.constant_on_handle {
            let pair_ok = disk.inputs.len() == 2
                && ((disk.inputs[0] == data.x && disk.inputs[1] == data.xbar)
                    || (disk.inputs[0] == data.xbar && disk.inputs[1] == data.x));
            if !pair_ok {
                return Err(SurgeryError::UnannotatedCorner(format!(
                    "constant handle disk with corner word {:?}",
                    disk.inputs
                )));
            }
            report.removed_constant += 1;
            continue;
        }
        let pass = PassAnnotation::annotate(disk, data)?;
        if !pass.touches_handle() {
            disks_eps.push(disk.clone());
            report.copied += 1;
            continue;
        }

        // Tail bound for this disk: each capped exponential sum leaves the
        // remainder of e^x, amplified by the full factors of the other
        // handle corners (coefficient magnitudes at unit scale).
        let mut sums: Vec<(usize, f64)> = Vec::new();
        for _ in 0..pass.positive {
            sums.push((cap_r, cmu_norm));
        }
        for _ in 0..pass.negative {
            sums.push((cap_r, cmu_norm));
            if n == 2 {
                sums.push((cap_s, clam_norm));
            }
        }
        match pass.output {
            HandleCrossing::None => {}
            HandleCrossing::Positive => sums.push((cap_r, cmu_norm)),
            HandleCrossing::Negative => {
                sums.push((cap_r, cmu_norm));
                sums.push((cap_r, cmu_norm));
                if n == 2 {
                    sums.push((cap_s, clam_norm));
                    sums.push((cap_s, clam_norm));
                }
            }
        }
        let sym0 = disk.sym.to_f64().expect("finite symmetry weight");
        for (i, (cap, xval)) in sums.iter().enumerate() {
            let mut bound = exp_tail(*xval, *cap) * sym0;
            for (j, (_, other)) in sums.iter().enumerate() {
                if j != i {
                    bound *= other.exp();
                }
            }
            report.tail += bound;
        }

        // Expand the input word corner by corner.
        let mut partials = vec![Partial::root()];
        for input in &disk.inputs {
            let mut next: Vec<Partial> = Vec::new();
            if input == &data.x {
                for p in &partials {
                    for r in 0..=cap_r {
                        next.push(p.with_mus(&data.mu, r, false, -a)?);
                    }
                }
            } else if input == &data.xbar {
                for p in &partials {
                    for r in 0..=cap_r {
                        let base = p.with_mus(&data.mu, r, true, a)?;
                        if n > 2 {
                            next.push(base.with_lambdas(&data.lambda, 1)?);
                        } else {
                            // Sheet without the longitude family, then the
                            // longitude family including its constant term.
                            next.push(base.clone());
                            for s in 0..=cap_s {
                                next.push(base.with_lambdas(&data.lambda, s)?);
                            }
                        }
                    }
                }
            } else {
                for p in &partials {
                    let mut q = p.clone();
                    q.inputs.push(input.clone());
                    next.push(q);
                }
            }
            partials = next;
        }

        // The output rule: possibly several `(output, decorated partial)`
        // families.
        let mut finals: Vec<(String, Partial)> = Vec::new();
        match pass.output {
            HandleCrossing::None => {
                for p in partials {
                    finals.push((disk.output.clone(), p));
                }
            }
            HandleCrossing::Positive => {
                for p in &partials {
                    for l in 0..=cap_r {
                        finals.push((mu_out.clone(), p.with_mus(&data.mu, l, false, Rational64::zero())?));
                    }
                }
            }
            HandleCrossing::Negative => {
                for p in &partials {
                    // Longitude-output family.
                    for l in 0..=cap_r {
                        let base = p.with_mus(&data.mu, l, true, a)?;
                        if n > 2 {
                            finals.push((data.lambda.clone(), base));
                        } else {
                            for s in 0..=cap_s {
                                finals.push((data.lambda.clone(), base.with_lambdas(&data.lambda, s)?));
                            }
                        }
                    }
                    // Negative meridian-output family.
                    for l in 0..=cap_r {
                        let mut base = p.with_mus(&data.mu, l, true, a + a)?;
                        base.parity ^= 1;
                        if n > 2 {
                            finals.push((mu_out.clone(), base.with_lambdas(&data.lambda, 1)?));
                        } else {
                            finals.push((mu_out.clone(), base.clone()));
                            for s in 0..=cap_s {
                                finals.push((mu_out.clone(), base.with_lambdas(&data.lambda, s)?));
                            }
                        }
                    }
                }
            }
        }

        // Emit the family, compensating the position-dependent heart sign
        // so that the aggregate weight matches the closed form: the net
        // sign of every member equals the net sign of the original disk
        // times the explicit rule signs.
        let parities0: Vec<u8> = disk
            .inputs
            .iter()
            .map(|g| parity0(g))
            .collect::<Result<_, _>>()?;
        let heart0 = crate::ainfty::heartsuit_sign(&parities0);
        for (output, p) in finals {
            let parities_f: Vec<u8> = p
                .inputs
                .iter()
                .map(|g| parity_eps(g))
                .collect::<Result<_, _>>()?;
            let heart_f = crate::ainfty::heartsuit_sign(&parities_f);
            let flips = (p.parity + heart0 + heart_f) % 2;
            let sign = if flips == 1 { -disk.sign } else { disk.sign };
            let denom = disk
                .sym
                .denom()
                .checked_mul(p.fact)
                .ok_or_else(|| {
                    SurgeryError::NotAdmissible(
                        "symmetry denominators overflow; reduce the multiplicity caps"
                            .to_string(),
                    )
                })?;
            let area = disk.area + p.shift;
            if p.inputs.is_empty() && area <= Rational64::zero() {
                return Err(SurgeryError::NotAdmissible(format!(
                    "shifted area {} of an input-free family member is not positive; \
                     the neck is too wide for this atlas",
                    ratio_to_string(area)
                )));
            }
            disks_eps.push(Disk {
                inputs: p.inputs,
                output,
                area,
                sign,
                sym: Rational64::new(*disk.sym.numer(), denom),
                holonomy: disk.holonomy.clone(),
                constant_on_handle: false,
            });
            report.families += 1;
        }
    }

    if !report.tail.is_finite() || report.tail > opts.tol.sqrt() {
        return Err(SurgeryError::CapTooSmall {
            tail: report.tail,
            tol: opts.tol,
        });
    }

    // Re-derive the corner gap from the shifted areas.
    let mut gap = alg0.delta_gap();
    for disk in &disks_eps {
        let s = disk.inputs.iter().filter(|g| is_si_eps(g)).count() as i64;
        if s > 0 {
            let per_corner = disk.area / Rational64::from_integer(s);
            if per_corner < gap {
                gap = per_corner;
            }
        }
    }
    if gap <= Rational64::zero() {
        return Err(SurgeryError::NotAdmissible(
            "the shifted areas leave no positive corner gap".to_string(),
        ));
    }
    report.delta_gap = gap;

    let mut alg_eps = CurvedAInftyAlgebra::new(
        basis_eps,
        disks_eps,
        complex_eps,
        alg0.local_system().clone(),
        gap,
        alg0.trunc(),
    );
    let mut exempt: BTreeSet<String> = alg0.gap_exempt().clone();
    exempt.insert(data.ball_plus.sphere.clone());
    exempt.insert(data.ball_minus.sphere.clone());
    exempt.insert(data.lambda.clone());
    alg_eps.set_gap_exempt(exempt);
    Ok((alg_eps, report))
}

/// One generator's line in the curve-identity check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveLine {
    pub sigma: String,
    pub lhs: NovikovElement,
    pub rhs: NovikovElement,
    pub diff: f64,
    pub passed: bool,
}

/// The outcome of [`verify_curve_identity`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveReport {
    pub lines: Vec<CurveLine>,
    /// The cap tail recorded by the transform; it inflates the tolerance.
    pub tail: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Verifies the correlator identity between the surgered and unsurgered
/// atlases, generator by generator.
///
/// Both curvature correlators `p(b, …, b)` are computed once with raw
/// output constraints; for a generator `σ` away from the handle the check
/// is `p_ε[σ] = p_0[σ]`, while at the self-intersection points the left
/// side is paired through `DΨ` (the meridian slot is read at the output
/// sphere opposite the insertion meridian).  `sigma = None` checks every
/// generator outside the ball tops and spheres; comparisons are relative,
/// with tolerance `tol` inflated by the recorded cap tail.
pub fn verify_curve_identity(
    alg0: &CurvedAInftyAlgebra,
    cand: &MCCandidate,
    data: &SurgeryData,
    sigma: Option<&str>,
    opts: &TransformOptions,
) -> Result<CurveReport, SurgeryError> {
    let b_eps = psi(alg0, cand, data, opts)?;
    let (alg_eps, transform) = transform_atlas(alg0, cand, data, opts)?;
    let corr0 = alg0.correlator(&[cand.b.clone()], &[])?;
    let corr_eps = alg_eps.correlator(&[b_eps], &[])?;
    let skip: BTreeSet<&str> = data
        .ball_cells()
        .into_iter()
        .filter(|c| *c != data.ball_plus.point.as_str() && *c != data.ball_minus.point.as_str())
        .collect();
    let check: Vec<String> = match sigma {
        Some(name) => vec![name.to_string()],
        None => alg0
            .basis()
            .iter()
            .filter(|g| {
                matches!(g.kind, GenKind::Cell { .. } | GenKind::Si { .. })
                    && !skip.contains(g.name.as_str())
            })
            .map(|g| g.name.clone())
            .collect(),
    };
    let tol = opts.tol + transform.tail;
    let mut report = CurveReport {
        lines: Vec::new(),
        tail: transform.tail,
        tol: opts.tol,
        passed: true,
    };
    for name in check {
        let rhs = corr0.coeff(&name);
        let lhs = if name == data.x || name == data.xbar {
            let image = dpsi_image(cand, data, opts, &name)?;
            let mut acc = NovikovElement::zero();
            for (slot, coef) in image.iter() {
                let key = if slot == data.mu {
                    data.output_meridian()
                } else {
                    slot
                };
                acc = acc + coef.clone() * corr_eps.coeff(key);
            }
            acc
        } else {
            corr_eps.coeff(&name)
        };
        let diff = (lhs.clone() - rhs.clone()).max_coeff_norm();
        let scale = 1.0 + lhs.max_coeff_norm().max(rhs.max_coeff_norm());
        let passed = diff <= tol * scale;
        report.passed &= passed;
        report.lines.push(CurveLine {
            sigma: name,
            lhs,
            rhs,
            diff,
            passed,
        });
    }
    Ok(report)
}
