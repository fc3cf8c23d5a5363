//! Curved A-infinity algebras assembled from a finite disk atlas.
//!
//! The algebra's data is combinatorial: a basis of generators (cells of a
//! [`CellComplex`], ordered self-intersection points, and two formal units),
//! a finite list of rigid disks with areas, orientation signs, rational
//! symmetry weights and holonomy words, and a flat local system assigning a
//! Novikov unit to each loop label.  The composition map on a tuple of
//! generators is a weighted count over the disks whose input word matches
//! the tuple exactly:
//!
//! ```text
//! m_d(σ_1, …, σ_d) = Σ_u (−1)^♥ · (1/θ(u)!) · y(∂u) · q^{A(u)} · o(u) · Σ_γ c(out(u), γ) γ
//! ```
//!
//! with `♥ = Σ_i i·|σ_i|` over the input parities.  Outputs are routed
//! through the diagonal coefficients `c`, extended over self-intersection
//! generators by pairing each with its conjugate.  On top of the atlas sum
//! the module hard-codes the classical parts that the disk count does not
//! see: the strict-unit relations for `1^white`, the cellular boundary as
//! the classical part of `m_1` on cells, and
//! `m_1(1^grey) = 1^white − 1^black` where `1^black` is the geometric unit
//! (the sum of the codimension-zero cells).
//!
//! [`CurvedAInftyAlgebra::m_multi`] evaluates the compositions with a
//! bounding-cochain insertion in every slot, which is how Maurer-Cartan
//! residuals, disk potentials and the Floer differential are produced
//! downstream.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cellular::CellComplex;
use crate::novikov::{ratio_from_str, ratio_to_string, Exp, NovikovElement};

#[cfg(test)]
use crate::novikov::ZERO_TOL;

/// Errors raised while assembling or evaluating an algebra.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AinftyError {
    /// A name does not refer to a basis generator.
    #[error("unknown generator: {0}")]
    UnknownGenerator(String),
    /// A bounding cochain has support of even parity.
    #[error("cochain is not odd: supported on {0}")]
    NotOdd(String),
    /// Input data fails a structural precondition.
    #[error("not admissible: {0}")]
    NotAdmissible(String),
    /// A cochain insertion fails the valuation-increase certificate, so the
    /// truncated sum could not be certified complete.
    #[error("insertion sum not convergent: {0}")]
    NonConvergent(String),
    /// A local-system value or inserted coefficient is not invertible.
    #[error(transparent)]
    Novikov(#[from] crate::novikov::NovikovError),
}

/// What a generator is: a cell of the decomposition, an ordered
/// self-intersection point with its conjugate, or one of the two formal
/// units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenKind {
    Cell { dim: u32 },
    Si { conjugate: String },
    UnitWhite,
    UnitGrey,
}

/// A basis generator of the Floer cochain space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub kind: GenKind,
    /// Mod-2 degree.  Cells carry their codimension mod 2; `1^white` is
    /// even, `1^grey` odd.
    pub parity: u8,
}

/// One rigid disk of the atlas.
///
/// `sym` is the rational weight the disk contributes with (it houses the
/// `1/θ(u)!` symmetry factor as well as any `1/r!` family weights folded in
/// by the surgery transform).  `holonomy` is a word in loop labels with
/// integer exponents, evaluated in the local system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub inputs: Vec<String>,
    pub output: String,
    #[serde(with = "ratio_str")]
    pub area: Exp,
    pub sign: i8,
    #[serde(with = "ratio_str")]
    pub sym: Rational64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub holonomy: Vec<(String, i64)>,
    /// Constant disks on a surgery handle are exempt from the corner-gap
    /// area bound.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub constant_on_handle: bool,
}

impl Disk {
    /// The number of self-intersection corners (inputs and output).
    pub fn si_corner_count(&self, alg: &CurvedAInftyAlgebra) -> usize {
        self.inputs
            .iter()
            .chain(std::iter::once(&self.output))
            .filter(|name| {
                matches!(
                    alg.generator(name).map(|g| &g.kind),
                    Some(GenKind::Si { .. })
                )
            })
            .count()
    }
}

/// A Floer cochain: a finite Novikov-linear combination of generators.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cochain {
    terms: BTreeMap<String, NovikovElement>,
}

impl Cochain {
    pub fn zero() -> Self {
        Cochain::default()
    }

    /// A single generator with coefficient 1.
    pub fn generator(name: &str) -> Self {
        Cochain::from_terms([(name.to_string(), NovikovElement::one())])
    }

    pub fn from_terms<I>(iter: I) -> Self
    where
        I: IntoIterator<Item = (String, NovikovElement)>,
    {
        let mut c = Cochain::zero();
        for (name, v) in iter {
            c.add_term(&name, &v);
        }
        c
    }

    /// Adds `v · name`, dropping the entry if it cancels to zero.
    pub fn add_term(&mut self, name: &str, v: &NovikovElement) {
        if v.is_zero() {
            return;
        }
        let slot = self
            .terms
            .entry(name.to_string())
            .or_insert_with(NovikovElement::zero);
        *slot = slot.clone() + v.clone();
        if slot.is_zero() {
            self.terms.remove(name);
        }
    }

    /// The coefficient of a generator (zero when absent).
    pub fn coeff(&self, name: &str) -> NovikovElement {
        self.terms.get(name).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(NovikovElement::is_zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &NovikovElement)> {
        self.terms.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn support(&self) -> impl Iterator<Item = &str> {
        self.terms.keys().map(String::as_str)
    }

    /// Minimal q-valuation over the support; `None` for the zero cochain.
    pub fn val_q(&self) -> Option<Exp> {
        self.terms.values().filter_map(NovikovElement::val_q).min()
    }

    /// Scales every coefficient by a Novikov element.
    pub fn scaled(&self, v: &NovikovElement) -> Self {
        Cochain::from_terms(
            self.terms
                .iter()
                .map(|(k, x)| (k.clone(), v.clone() * x.clone())),
        )
    }

    /// Truncates every coefficient at order `t`.
    pub fn truncate(&self, t: Exp) -> Self {
        Cochain::from_terms(self.terms.iter().map(|(k, x)| (k.clone(), x.truncate(t))))
    }

    /// Coefficient-wise comparison within `tol`, over the union of supports.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.terms
            .keys()
            .chain(other.terms.keys())
            .all(|k| self.coeff(k).approx_eq(&other.coeff(k), tol))
    }

    /// The common parity of the support in `alg`, or `None` when mixed or
    /// unknown.  The zero cochain is reported as even.
    pub fn parity(&self, alg: &CurvedAInftyAlgebra) -> Option<u8> {
        let mut parity = None;
        for name in self.support() {
            let p = alg.generator(name)?.parity;
            match parity {
                None => parity = Some(p),
                Some(q) if q == p => {}
                Some(_) => return None,
            }
        }
        Some(parity.unwrap_or(0))
    }
}

impl std::ops::Add for Cochain {
    type Output = Cochain;
    fn add(mut self, rhs: Cochain) -> Cochain {
        for (k, v) in &rhs.terms {
            self.add_term(k, v);
        }
        self
    }
}

impl std::ops::Sub for Cochain {
    type Output = Cochain;
    fn sub(mut self, rhs: Cochain) -> Cochain {
        for (k, v) in &rhs.terms {
            self.add_term(k, &-v.clone());
        }
        self
    }
}

impl std::ops::Neg for Cochain {
    type Output = Cochain;
    fn neg(self) -> Cochain {
        Cochain::from_terms(self.terms.into_iter().map(|(k, v)| (k, -v)))
    }
}

/// The sign exponent `♥ = Σ_i i·|σ_i| mod 2` over the input parities,
/// with positions counted from 1.
pub fn heartsuit_sign(degrees: &[u8]) -> u8 {
    (degrees
        .iter()
        .enumerate()
        .map(|(i, &p)| (i as u64 + 1) * p as u64)
        .sum::<u64>()
        % 2) as u8
}

/// Checks the mod-2 congruence between the gluing signs of the
/// associativity proof and the target `Σ_k (k+1)|σ_k|`.
///
/// The four contributions are, for `d` inputs with the inner composition
/// consuming `m` of them after the first `n`:
///
/// ```text
/// sign_a = mn + m + n
/// sign_b = Σ_{k≤n} k|σ_k| + (n+1)|α| + Σ_{k>n+m} (k−m+1)|σ_k| + Σ_{n<k≤n+m} (k−n)|σ_k|
/// sign_c = m · Σ_{k>n+m} |σ_k|
/// sign_d = n + Σ_{k≤n} |σ_k|
/// ```
///
/// where `|α| = m + Σ_{n<k≤n+m} |σ_k|` is the parity of the inner output.
/// The congruence holds for every admissible `(n, m)`, which is what makes
/// the A-infinity relations sign-consistent.
pub fn verify_gluing_sign_congruence(d: usize, n: usize, m: usize, degrees: &[u8]) -> bool {
    assert!(n + m <= d && degrees.len() == d);
    let deg = |k: usize| degrees[k - 1] as u64; // 1-based, matching the formulas
    let alpha = (m as u64 + (n + 1..=n + m).map(deg).sum::<u64>()) % 2;
    let sign_a = (m * n + m + n) as u64;
    let sign_b = (1..=n).map(|k| k as u64 * deg(k)).sum::<u64>()
        + (n as u64 + 1) * alpha
        + (n + m + 1..=d)
            .map(|k| (k - m + 1) as u64 * deg(k))
            .sum::<u64>()
        + (n + 1..=n + m).map(|k| (k - n) as u64 * deg(k)).sum::<u64>();
    let sign_c = m as u64 * (n + m + 1..=d).map(deg).sum::<u64>();
    let sign_d = n as u64 + (1..=n).map(deg).sum::<u64>();
    let target = (1..=d).map(|k| (k as u64 + 1) * deg(k)).sum::<u64>();
    (sign_a + sign_b + sign_c + sign_d) % 2 == target % 2
}

/// A curved A-infinity algebra over the Novikov field.
#[derive(Debug, Clone)]
pub struct CurvedAInftyAlgebra {
    basis: Vec<Generator>,
    atlas: Vec<Disk>,
    complex: CellComplex,
    local_system: BTreeMap<String, NovikovElement>,
    delta_gap: Rational64,
    trunc: Option<Exp>,
    /// Cell generators whose insertion coefficients are exempt from the
    /// positive-valuation requirement (surgery handle cells: their
    /// coefficients are logarithms of units and can sit at valuation zero).
    gap_exempt: BTreeSet<String>,
}

impl CurvedAInftyAlgebra {
    pub fn new(
        basis: Vec<Generator>,
        atlas: Vec<Disk>,
        complex: CellComplex,
        local_system: BTreeMap<String, NovikovElement>,
        delta_gap: Rational64,
        trunc: Option<Exp>,
    ) -> Self {
        CurvedAInftyAlgebra {
            basis,
            atlas,
            complex,
            local_system,
            delta_gap,
            trunc,
            gap_exempt: BTreeSet::new(),
        }
    }

    /// The classical algebra of a validated complex: cells plus the two
    /// units, no disks, with the cellular boundary as `m_1`.
    pub fn classical(complex: CellComplex, trunc: Option<Exp>) -> Self {
        let n = complex.dim();
        let mut basis: Vec<Generator> = complex
            .cells()
            .iter()
            .map(|c| Generator {
                name: c.name.clone(),
                kind: GenKind::Cell { dim: c.dim },
                parity: ((n - c.dim) % 2) as u8,
            })
            .collect();
        basis.push(Generator {
            name: "1_white".to_string(),
            kind: GenKind::UnitWhite,
            parity: 0,
        });
        basis.push(Generator {
            name: "1_grey".to_string(),
            kind: GenKind::UnitGrey,
            parity: 1,
        });
        CurvedAInftyAlgebra::new(
            basis,
            Vec::new(),
            complex,
            BTreeMap::new(),
            Rational64::new(1, 1),
            trunc,
        )
    }

    pub fn basis(&self) -> &[Generator] {
        &self.basis
    }

    pub fn atlas(&self) -> &[Disk] {
        &self.atlas
    }

    pub fn complex(&self) -> &CellComplex {
        &self.complex
    }

    pub fn local_system(&self) -> &BTreeMap<String, NovikovElement> {
        &self.local_system
    }

    pub fn delta_gap(&self) -> Rational64 {
        self.delta_gap
    }

    pub fn trunc(&self) -> Option<Exp> {
        self.trunc
    }

    pub fn gap_exempt(&self) -> &BTreeSet<String> {
        &self.gap_exempt
    }

    /// Marks generators as exempt from the positive-valuation insertion
    /// certificate (they are held to the weaker self-intersection bound).
    pub fn set_gap_exempt<I, S>(&mut self, names: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.gap_exempt = names.into_iter().map(Into::into).collect();
    }

    pub fn generator(&self, name: &str) -> Option<&Generator> {
        self.basis.iter().find(|g| g.name == name)
    }

    fn parity_of(&self, name: &str) -> Result<u8, AinftyError> {
        self.generator(name)
            .map(|g| g.parity)
            .ok_or_else(|| AinftyError::UnknownGenerator(name.to_string()))
    }

    /// The name of the strict unit `1^white`, if present in the basis.
    pub fn unit_white(&self) -> Option<&str> {
        self.basis
            .iter()
            .find(|g| g.kind == GenKind::UnitWhite)
            .map(|g| g.name.as_str())
    }

    /// The geometric unit `1^black`: the sum of the codimension-zero cells.
    pub fn geometric_unit(&self) -> Cochain {
        let n = self.complex.dim();
        Cochain::from_terms(self.basis.iter().filter_map(|g| match g.kind {
            GenKind::Cell { dim } if dim == n => {
                Some((g.name.clone(), NovikovElement::one()))
            }
            _ => None,
        }))
    }

    /// Structural validation: generator invariants, disk gap conditions,
    /// and local-system units.  Returns human-readable findings; empty
    /// means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.complex.dim();
        let mut seen = BTreeMap::new();
        for g in &self.basis {
            if seen.insert(g.name.clone(), ()).is_some() {
                out.push(format!("duplicate generator {}", g.name));
            }
            match &g.kind {
                GenKind::Cell { dim } => {
                    if self.complex.cell_dim(&g.name) != Some(*dim) {
                        out.push(format!("cell generator {} not in the complex", g.name));
                    }
                    if g.parity != ((n - dim) % 2) as u8 {
                        out.push(format!("cell generator {} has parity != codim mod 2", g.name));
                    }
                }
                GenKind::Si { conjugate } => {
                    match self.generator(conjugate).map(|c| &c.kind) {
                        Some(GenKind::Si { conjugate: back }) if back == &g.name => {}
                        _ => out.push(format!(
                            "si generator {} lacks a matching conjugate {}",
                            g.name, conjugate
                        )),
                    }
                    if conjugate == &g.name {
                        out.push(format!("si generator {} is its own conjugate", g.name));
                    }
                }
                GenKind::UnitWhite if g.parity != 0 => {
                    out.push(format!("unit {} must be even", g.name))
                }
                GenKind::UnitGrey if g.parity != 1 => {
                    out.push(format!("unit {} must be odd", g.name))
                }
                _ => {}
            }
        }
        for (i, disk) in self.atlas.iter().enumerate() {
            for name in disk.inputs.iter().chain(std::iter::once(&disk.output)) {
                if self.generator(name).is_none() {
                    out.push(format!("disk {i} uses unknown generator {name}"));
                }
            }
            if disk.sign.abs() != 1 {
                out.push(format!("disk {i} has sign {} (want +-1)", disk.sign));
            }
            if disk.sym <= Rational64::zero() {
                out.push(format!("disk {i} has non-positive symmetry weight"));
            }
            if disk.inputs.is_empty() && disk.area <= Rational64::zero() {
                out.push(format!("disk {i} is input-free with area <= 0"));
            }
            let s = disk.si_corner_count(self) as i64;
            if !disk.constant_on_handle && disk.area < self.delta_gap * Rational64::from(s) {
                out.push(format!(
                    "disk {i} violates the corner gap: area {} < {} corners * delta {}",
                    ratio_to_string(disk.area),
                    s,
                    ratio_to_string(self.delta_gap)
                ));
            }
            for (label, _) in &disk.holonomy {
                if !self.local_system.contains_key(label) {
                    out.push(format!("disk {i} uses unknown holonomy label {label}"));
                }
            }
        }
        for (label, y) in &self.local_system {
            if y.val_q() != Some(Rational64::zero()) {
                out.push(format!("local-system value at {label} is not a unit"));
            }
        }
        out
    }

    /// Evaluates the holonomy word of a disk in the local system.
    fn holonomy_value(&self, disk: &Disk) -> Result<NovikovElement, AinftyError> {
        let mut y = NovikovElement::one();
        for (label, k) in &disk.holonomy {
            let base = self
                .local_system
                .get(label)
                .ok_or_else(|| AinftyError::UnknownGenerator(format!("holonomy label {label}")))?;
            let factor = if *k < 0 { base.invert()? } else { base.clone() };
            for _ in 0..k.unsigned_abs() {
                y = y * factor.clone();
            }
        }
        Ok(y)
    }

    /// The scalar weight of one disk evaluated on a concrete input word:
    /// `(−1)^♥ · sym · y(∂u) · q^A · o(u)`.
    fn disk_weight(&self, disk: &Disk, word_parities: &[u8]) -> Result<NovikovElement, AinftyError> {
        let heart = heartsuit_sign(word_parities);
        let mut c = disk.sym.to_f64().expect("finite rational weight");
        if heart == 1 {
            c = -c;
        }
        if disk.sign < 0 {
            c = -c;
        }
        let scalar = NovikovElement::monomial(disk.area, Complex64::new(c, 0.0));
        Ok(scalar * self.holonomy_value(disk)?)
    }

    /// Routes a disk output through the extended diagonal: cells expand as
    /// `Σ_γ c(out, γ) γ`, a self-intersection point emits its conjugate,
    /// and units emit themselves.
    fn expand_output(&self, out: &mut Cochain, output: &str, v: &NovikovElement) {
        match self.generator(output).map(|g| g.kind.clone()) {
            Some(GenKind::Cell { .. }) => {
                for (cell, dual, coef) in self.complex.diagonal_entries() {
                    if cell == output {
                        out.add_term(
                            dual,
                            &v.scale(Complex64::new(coef as f64, 0.0)),
                        );
                    }
                }
            }
            Some(GenKind::Si { conjugate }) => out.add_term(&conjugate, v),
            Some(GenKind::UnitWhite) | Some(GenKind::UnitGrey) => out.add_term(output, v),
            None => {}
        }
    }

    /// The classical part of `m_1`: the cellular boundary on cells and
    /// `1^white − 1^black` on `1^grey`.
    fn classical_m1(&self, name: &str) -> Cochain {
        match self.generator(name).map(|g| g.kind.clone()) {
            Some(GenKind::Cell { .. }) => Cochain::from_terms(
                self.complex
                    .boundary_of(name)
                    .map(|(to, c)| {
                        (
                            to.to_string(),
                            NovikovElement::constant(Complex64::new(c as f64, 0.0)),
                        )
                    }),
            ),
            Some(GenKind::UnitGrey) => {
                let mut out = Cochain::zero();
                if let Some(white) = self.unit_white() {
                    out.add_term(white, &NovikovElement::one());
                }
                out - self.geometric_unit()
            }
            _ => Cochain::zero(),
        }
    }

    /// The composition map on a tuple of generators.
    ///
    /// Strict-unit inputs are resolved first (any composition with a
    /// `1^white` input vanishes except `m_2`, which is the identity on the
    /// other slot, with no sign); then the classical part of `m_1`; then the
    /// atlas sum over disks whose input word equals `inputs`.
    pub fn m_d(&self, inputs: &[&str]) -> Result<Cochain, AinftyError> {
        for name in inputs {
            self.parity_of(name)?;
        }
        if let Some(result) = self.strict_unit_rule(inputs)? {
            return Ok(self.apply_trunc(result));
        }
        let mut out = Cochain::zero();
        if inputs.len() == 1 {
            out = out + self.classical_m1(inputs[0]);
        }
        let parities: Vec<u8> = inputs
            .iter()
            .map(|name| self.parity_of(name))
            .collect::<Result<_, _>>()?;
        for disk in &self.atlas {
            if disk.inputs.len() == inputs.len()
                && disk.inputs.iter().zip(inputs).all(|(a, b)| a == b)
            {
                let w = self.disk_weight(disk, &parities)?;
                self.expand_output(&mut out, &disk.output, &w);
            }
        }
        Ok(self.apply_trunc(out))
    }

    /// `Some(result)` when a strict-unit input decides the composition.
    fn strict_unit_rule(&self, inputs: &[&str]) -> Result<Option<Cochain>, AinftyError> {
        let is_white = |name: &str| {
            matches!(
                self.generator(name).map(|g| &g.kind),
                Some(GenKind::UnitWhite)
            )
        };
        if !inputs.iter().any(|name| is_white(name)) {
            return Ok(None);
        }
        if inputs.len() == 2 {
            let other = if is_white(inputs[0]) { inputs[1] } else { inputs[0] };
            return Ok(Some(Cochain::generator(other)));
        }
        Ok(Some(Cochain::zero()))
    }

    fn apply_trunc(&self, c: Cochain) -> Cochain {
        match self.trunc {
            Some(t) => c.truncate(t),
            None => c,
        }
    }

    /// The composition with bounding-cochain insertions,
    /// `m_d^{b_0, …, b_d}(a_1, …, a_d)`: the sum over all ways of inserting
    /// entries of `b_i` between `a_i` and `a_{i+1}` (`b_0` before `a_1`,
    /// `b_d` after `a_d`).
    ///
    /// Each `b_i` must be odd.  The sum is finite because the atlas is a
    /// finite list of disks with fixed input words; the valuation
    /// certificate additionally requires cell (and `1^grey`) coefficients to
    /// have positive valuation and self-intersection coefficients valuation
    /// above `−δ_gap`, so that every insertion raises the effective
    /// valuation and truncation is faithful.
    pub fn m_multi(&self, b_list: &[Cochain], args: &[&str]) -> Result<Cochain, AinftyError> {
        self.m_multi_impl(b_list, args, true)
    }

    /// The correlator form of [`m_multi`]: the same weighted disk count, but
    /// with every disk output kept raw (as the output-marked-point
    /// constraint) instead of being routed through the extended diagonal.
    /// The classical boundary terms are keyed by cells already and are kept
    /// as they are; constant handle disks count as classical and stay
    /// routed.
    pub fn correlator(&self, b_list: &[Cochain], args: &[&str]) -> Result<Cochain, AinftyError> {
        self.m_multi_impl(b_list, args, false)
    }

    fn m_multi_impl(
        &self,
        b_list: &[Cochain],
        args: &[&str],
        route: bool,
    ) -> Result<Cochain, AinftyError> {
        let d = args.len();
        if b_list.len() != d + 1 {
            return Err(AinftyError::NotAdmissible(format!(
                "need {} insertion cochains for {} arguments, got {}",
                d + 1,
                d,
                b_list.len()
            )));
        }
        for name in args {
            self.parity_of(name)?;
        }
        for b in b_list {
            self.certify_insertion(b)?;
        }

        let mut out = Cochain::zero();

        // Classical m_1: the word has length one, so it is either the lone
        // argument or a single insertion from b_0 when there are no
        // arguments at all.
        if d == 1 {
            out = out + self.classical_m1(args[0]);
        }
        if d == 0 {
            for (name, v) in b_list[0].iter() {
                out = out + self.classical_m1(name).scaled(v);
            }
        }

        // Strict units: 1^white never occurs in an odd cochain, so the only
        // unit contributions come from a 1^white argument in an m_2 word.
        if d == 2 {
            if let Some(unit) = self.strict_unit_rule(args)? {
                return Ok(self.apply_trunc(unit));
            }
        }
        if d == 1 && self.is_unit_white(args[0]) {
            // m_2(b_0-entry, 1^white) + m_2(1^white, b_1-entry).
            out = out + b_list[0].clone() + b_list[1].clone();
            return Ok(self.apply_trunc(out));
        }

        for disk in &self.atlas {
            let factor = self.match_word(&disk.inputs, args, b_list);
            if factor.is_zero() {
                continue;
            }
            let parities: Vec<u8> = disk
                .inputs
                .iter()
                .map(|name| self.parity_of(name))
                .collect::<Result<_, _>>()?;
            let w = self.disk_weight(disk, &parities)? * factor;
            // Constant handle disks are classical contributions; even in the
            // correlator form their outputs are paired through the diagonal,
            // like the classical boundary terms.
            if route || disk.constant_on_handle {
                self.expand_output(&mut out, &disk.output, &w);
            } else {
                out.add_term(&disk.output, &w);
            }
        }
        Ok(self.apply_trunc(out))
    }

    fn is_unit_white(&self, name: &str) -> bool {
        matches!(
            self.generator(name).map(|g| &g.kind),
            Some(GenKind::UnitWhite)
        )
    }

    /// The total coefficient with which a disk's input word arises from the
    /// argument list with insertions: the sum over all ways of matching
    /// `args` as an ordered subsequence of `word`, weighting every
    /// unmatched position in region `i` by its coefficient in `b_i`.
    fn match_word(&self, word: &[String], args: &[&str], b_list: &[Cochain]) -> NovikovElement {
        fn go(
            word: &[String],
            pos: usize,
            args: &[&str],
            next: usize,
            b_list: &[Cochain],
            acc: &NovikovElement,
            total: &mut NovikovElement,
        ) {
            if pos == word.len() {
                if next == args.len() {
                    *total = total.clone() + acc.clone();
                }
                return;
            }
            if next < args.len() && word[pos] == args[next] {
                go(word, pos + 1, args, next + 1, b_list, acc, total);
            }
            let ins = b_list[next].coeff(&word[pos]);
            if !ins.is_zero() {
                let acc2 = acc.clone() * ins;
                go(word, pos + 1, args, next, b_list, &acc2, total);
            }
        }
        let mut total = NovikovElement::zero();
        go(word, 0, args, 0, b_list, &NovikovElement::one(), &mut total);
        total
    }

    /// Valuation certificate for one insertion cochain.
    fn certify_insertion(&self, b: &Cochain) -> Result<(), AinftyError> {
        for (name, v) in b.iter() {
            let g = self
                .generator(name)
                .ok_or_else(|| AinftyError::UnknownGenerator(name.to_string()))?;
            if g.parity != 1 {
                return Err(AinftyError::NotOdd(name.to_string()));
            }
            let val = match v.val_q() {
                Some(val) => val,
                None => continue,
            };
            let ok = match g.kind {
                GenKind::Si { .. } => val > -self.delta_gap,
                _ if self.gap_exempt.contains(name) => val > -self.delta_gap,
                _ => val > Rational64::zero(),
            };
            if !ok {
                return Err(AinftyError::NonConvergent(format!(
                    "coefficient of {name} has valuation {}",
                    ratio_to_string(val)
                )));
            }
        }
        Ok(())
    }

    /// The A-infinity associativity residual on a tuple of generators:
    ///
    /// ```text
    /// Σ_{n,m} (−1)^{n + Σ_{i≤n} |σ_i|}
    ///     m_{d−m+1}(σ_1, …, σ_n, m_m(σ_{n+1}, …, σ_{n+m}), σ_{n+m+1}, …, σ_d)
    /// ```
    ///
    /// Zero (below truncation) exactly when the atlas satisfies the
    /// A-infinity axioms.
    pub fn ainfty_residual(&self, inputs: &[&str]) -> Result<Cochain, AinftyError> {
        let d = inputs.len();
        let mut out = Cochain::zero();
        for n in 0..=d {
            for m in 0..=(d - n) {
                let inner = self.m_d(&inputs[n..n + m])?;
                if inner.is_zero() {
                    continue;
                }
                let mut sign = n as u64;
                for name in &inputs[..n] {
                    sign += self.parity_of(name)? as u64;
                }
                for (g, v) in inner.iter() {
                    let mut word: Vec<&str> = Vec::with_capacity(d - m + 1);
                    word.extend_from_slice(&inputs[..n]);
                    word.push(g);
                    word.extend_from_slice(&inputs[n + m..]);
                    let outer = self.m_d(&word)?.scaled(v);
                    out = out + if sign % 2 == 1 { -outer } else { outer };
                }
            }
        }
        Ok(self.apply_trunc(out))
    }
}

pub(crate) mod ratio_str {
    use super::{ratio_from_str, ratio_to_string, Rational64};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
        ratio_to_string(*r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational64, D::Error> {
        let text = String::deserialize(d)?;
        ratio_from_str(&text).map_err(serde::de::Error::custom)
    }
}

/// The atlas half of an algebra, as exchanged on disk: generators, disks,
/// the corner gap, and the local system.  Pairing it with a cell complex
/// and a truncation yields a [`CurvedAInftyAlgebra`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtlasData {
    pub generators: Vec<GeneratorDto>,
    pub disks: Vec<Disk>,
    #[serde(with = "ratio_str")]
    pub delta_gap: Rational64,
    #[serde(default)]
    pub local_system: BTreeMap<String, NovikovElement>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub gap_exempt: BTreeSet<String>,
}

/// Serialized form of a generator.  `parity` may be omitted, in which case
/// cells get their codimension, self-intersection points are odd, and the
/// units get their fixed parities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorDto {
    pub name: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parity: Option<u8>,
}

impl AtlasData {
    /// Assembles the algebra over a complex.
    pub fn assemble(
        &self,
        complex: CellComplex,
        trunc: Option<Exp>,
    ) -> Result<CurvedAInftyAlgebra, AinftyError> {
        let n = complex.dim();
        let mut basis = Vec::with_capacity(self.generators.len());
        for g in &self.generators {
            let (kind, default_parity) = match g.kind.as_str() {
                "cell" => {
                    let dim = g.dim.ok_or_else(|| {
                        AinftyError::NotAdmissible(format!("cell generator {} lacks dim", g.name))
                    })?;
                    (GenKind::Cell { dim }, ((n - dim) % 2) as u8)
                }
                "si" => {
                    let conjugate = g.conjugate.clone().ok_or_else(|| {
                        AinftyError::NotAdmissible(format!(
                            "si generator {} lacks a conjugate",
                            g.name
                        ))
                    })?;
                    (GenKind::Si { conjugate }, 1)
                }
                "unit_white" => (GenKind::UnitWhite, 0),
                "unit_grey" => (GenKind::UnitGrey, 1),
                other => {
                    return Err(AinftyError::NotAdmissible(format!(
                        "unknown generator kind {other}"
                    )))
                }
            };
            basis.push(Generator {
                name: g.name.clone(),
                kind,
                parity: g.parity.unwrap_or(default_parity),
            });
        }
        let mut alg = CurvedAInftyAlgebra::new(
            basis,
            self.disks.clone(),
            complex,
            self.local_system.clone(),
            self.delta_gap,
            trunc,
        );
        alg.set_gap_exempt(self.gap_exempt.iter().cloned());
        Ok(alg)
    }

    /// The serializable view of an algebra's atlas half.
    pub fn from_algebra(alg: &CurvedAInftyAlgebra) -> Self {
        AtlasData {
            generators: alg
                .basis()
                .iter()
                .map(|g| {
                    let (kind, dim, conjugate) = match &g.kind {
                        GenKind::Cell { dim } => ("cell", Some(*dim), None),
                        GenKind::Si { conjugate } => ("si", None, Some(conjugate.clone())),
                        GenKind::UnitWhite => ("unit_white", None, None),
                        GenKind::UnitGrey => ("unit_grey", None, None),
                    };
                    GeneratorDto {
                        name: g.name.clone(),
                        kind: kind.to_string(),
                        dim,
                        conjugate,
                        parity: Some(g.parity),
                    }
                })
                .collect(),
            disks: alg.atlas().to_vec(),
            delta_gap: alg.delta_gap(),
            local_system: alg.local_system().clone(),
            gap_exempt: alg.gap_exempt().clone(),
        }
    }
}
