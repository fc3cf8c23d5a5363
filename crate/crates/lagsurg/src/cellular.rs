//! Finite cell complexes with boundary operators and a diagonal approximation.
//!
//! A [`CellComplex`] carries two cell decompositions of the same closed
//! n-manifold: a primal one with boundary operator `∂` and a second
//! (dual-like) one with boundary operator `∂∨`.  The diagonal approximation
//! is recorded only through its homology class, as an integer matrix
//! `c(σ, τ)` over pairs of a primal and a dual cell with complementary
//! dimensions.  Being a cycle in the product complex, the diagonal class
//! satisfies
//!
//! ```text
//! Σ_β ∂(α, β) c(β, γ) = −Σ_β c(α, β) ∂∨(β, γ)
//! ```
//!
//! where `∂(α, β)` is the coefficient of `β` in `∂α` and `∂∨(β, γ)` the
//! coefficient of `β` in `∂∨γ` (the dual operator is read with `γ` as the
//! source; this is the only reading under which the cell dimensions in both
//! sums match).  [`CellComplex::validate`] checks `∂² = 0`, `(∂∨)² = 0` and
//! this cycle identity exactly over the integers and reports each failure as
//! a [`Violation`].
//!
//! The module also implements the cell-level part of Lagrangian surgery:
//! [`CellComplex::surger_cells`] removes the two top cells of a pair of
//! [`StandardBall`]s around the preimages of a self-intersection point and
//! glues in a single 1-cell and a single n-cell, with
//! `∂σ_1 = σ_{0,+} − σ_{0,−}` and `∂σ_n = σ_{n−1,+} − σ_{n−1,−}`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::novikov::{NovikovElement, ZERO_TOL};

/// Errors raised by cell-complex constructors and operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CellError {
    /// A cell name was added twice to the same decomposition.
    #[error("duplicate cell name: {0}")]
    DuplicateCell(String),
    /// A name does not refer to any known cell or registered generator.
    #[error("unknown generator: {0}")]
    UnknownGenerator(String),
    /// Cochain or matrix-entry dimensions do not fit together.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// A standard ball's cells are absent from the complex.
    #[error("missing standard ball cell: {0}")]
    MissingBall(String),
    /// A standard ball's data is present but does not form a ball.
    #[error("invalid standard ball: {0}")]
    InvalidBall(String),
    /// Surgery requires ambient dimension at least two.
    #[error("ambient dimension {0} is too low for surgery (need n >= 2)")]
    DimensionTooLow(u32),
}

/// A single cell: an opaque name together with its dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub name: String,
    pub dim: u32,
}

/// One invariant failure found by [`CellComplex::validate`].
///
/// Violations are data, not errors: a complex that fails validation can
/// still be inspected, and the list localizes every failure to the cells
/// involved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `∂∘∂` (or `∂∨∘∂∨` when `dual` is set) has a nonzero entry.
    BoundarySquare {
        dual: bool,
        from: String,
        to: String,
        value: i64,
    },
    /// A boundary entry connects cells whose dimensions do not drop by one,
    /// or refers to a cell that does not exist.
    BadBoundaryEntry {
        dual: bool,
        from: String,
        to: String,
        reason: String,
    },
    /// A diagonal entry does not pair complementary dimensions, or refers
    /// to a cell that does not exist.
    BadDiagonalEntry {
        cell: String,
        dual: String,
        reason: String,
    },
    /// The cycle identity fails at the pair `(cell, dual)`.
    CycleIdentity {
        cell: String,
        dual: String,
        lhs: i64,
        rhs: i64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BoundarySquare {
                dual,
                from,
                to,
                value,
            } => {
                let op = if *dual { "dual boundary" } else { "boundary" };
                write!(f, "{op} does not square to zero: ({from}, {to}) = {value}")
            }
            Violation::BadBoundaryEntry {
                dual,
                from,
                to,
                reason,
            } => {
                let op = if *dual { "dual boundary" } else { "boundary" };
                write!(f, "bad {op} entry ({from}, {to}): {reason}")
            }
            Violation::BadDiagonalEntry { cell, dual, reason } => {
                write!(f, "bad diagonal entry ({cell}, {dual}): {reason}")
            }
            Violation::CycleIdentity {
                cell,
                dual,
                lhs,
                rhs,
            } => write!(
                f,
                "cycle identity fails at ({cell}, {dual}): sum d(a,b)c(b,g) = {lhs} \
                 but -sum c(a,b)dv(b,g) = {rhs}"
            ),
        }
    }
}

/// A cellular cochain with Novikov coefficients, keyed by cell name.
pub type CellCochain = BTreeMap<String, NovikovElement>;

/// The names of the cells of a standard ball around one preimage of a
/// self-intersection point: the top cell `σ_n`, its boundary sphere
/// `σ_{n−1}`, and a 0-cell `σ_0` on that sphere.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandardBall {
    pub top: String,
    pub sphere: String,
    pub point: String,
}

/// Options for [`CellComplex::surger_cells`].
#[derive(Debug, Clone)]
pub struct SurgerOptions {
    /// Name of the new longitudinal 1-cell.
    pub cell_1: String,
    /// Name of the new meridianal n-cell.
    pub cell_n: String,
    /// Negate the boundary orientations of both new cells.  The displayed
    /// formulas fix one choice; the opposite one is equally consistent and
    /// depends on orientation conventions.
    pub flip_orientation: bool,
    /// Replacement for the default diagonal entries on the handle, as
    /// `(primal, dual, coefficient)` triples.  `None` uses the default
    /// pattern described on [`CellComplex::surger_cells`].
    pub handle_diagonal: Option<Vec<(String, String, i64)>>,
}

impl Default for SurgerOptions {
    fn default() -> Self {
        SurgerOptions {
            cell_1: "sigma_1".to_string(),
            cell_n: "sigma_n".to_string(),
            flip_orientation: false,
            handle_diagonal: None,
        }
    }
}

type BoundaryMap = BTreeMap<String, BTreeMap<String, i64>>;

/// A finite cell complex with a dual-like second decomposition and
/// diagonal-approximation coefficients.
///
/// Boundary operators are stored sparsely as `source → (target → coefficient)`
/// maps; the diagonal as `(primal cell, dual cell) → coefficient`.  The
/// structure is a plain container: all consistency checking lives in
/// [`CellComplex::validate`] (for the chain-level invariants) and in the
/// setters (for referential integrity).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ComplexDto", into = "ComplexDto")]
pub struct CellComplex {
    cells: Vec<Cell>,
    dual_cells: Vec<Cell>,
    boundary: BoundaryMap,
    dual_boundary: BoundaryMap,
    diagonal: BTreeMap<(String, String), i64>,
    dim: u32,
}

impl CellComplex {
    /// An empty complex of ambient dimension `dim`.
    pub fn new(dim: u32) -> Self {
        CellComplex {
            cells: Vec::new(),
            dual_cells: Vec::new(),
            boundary: BTreeMap::new(),
            dual_boundary: BTreeMap::new(),
            diagonal: BTreeMap::new(),
            dim,
        }
    }

    /// Ambient dimension n.
    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// The primal cells, in insertion order.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// The dual-decomposition cells, in insertion order.
    pub fn dual_cells(&self) -> &[Cell] {
        &self.dual_cells
    }

    /// Dimension of the primal cell `name`, if present.
    pub fn cell_dim(&self, name: &str) -> Option<u32> {
        self.cells.iter().find(|c| c.name == name).map(|c| c.dim)
    }

    /// Dimension of the dual cell `name`, if present.
    pub fn dual_cell_dim(&self, name: &str) -> Option<u32> {
        self.dual_cells
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.dim)
    }

    /// Adds a primal cell.
    pub fn add_cell(&mut self, name: &str, dim: u32) -> Result<(), CellError> {
        if self.cell_dim(name).is_some() {
            return Err(CellError::DuplicateCell(name.to_string()));
        }
        self.cells.push(Cell {
            name: name.to_string(),
            dim,
        });
        Ok(())
    }

    /// Adds a dual cell.
    pub fn add_dual_cell(&mut self, name: &str, dim: u32) -> Result<(), CellError> {
        if self.dual_cell_dim(name).is_some() {
            return Err(CellError::DuplicateCell(name.to_string()));
        }
        self.dual_cells.push(Cell {
            name: name.to_string(),
            dim,
        });
        Ok(())
    }

    /// Sets the coefficient of `to` in `∂ from`.  A zero coefficient removes
    /// the entry.
    pub fn set_boundary(&mut self, from: &str, to: &str, coef: i64) -> Result<(), CellError> {
        let df = self
            .cell_dim(from)
            .ok_or_else(|| CellError::UnknownGenerator(from.to_string()))?;
        let dt = self
            .cell_dim(to)
            .ok_or_else(|| CellError::UnknownGenerator(to.to_string()))?;
        if df != dt + 1 {
            return Err(CellError::DimensionMismatch(format!(
                "boundary entry ({from}, {to}) connects dimensions {df} and {dt}"
            )));
        }
        set_sparse(&mut self.boundary, from, to, coef);
        Ok(())
    }

    /// Sets the coefficient of `to` in `∂∨ from` on the dual decomposition.
    pub fn set_dual_boundary(&mut self, from: &str, to: &str, coef: i64) -> Result<(), CellError> {
        let df = self
            .dual_cell_dim(from)
            .ok_or_else(|| CellError::UnknownGenerator(from.to_string()))?;
        let dt = self
            .dual_cell_dim(to)
            .ok_or_else(|| CellError::UnknownGenerator(to.to_string()))?;
        if df != dt + 1 {
            return Err(CellError::DimensionMismatch(format!(
                "dual boundary entry ({from}, {to}) connects dimensions {df} and {dt}"
            )));
        }
        set_sparse(&mut self.dual_boundary, from, to, coef);
        Ok(())
    }

    /// Sets the diagonal coefficient `c(cell, dual)`.  The dimensions must be
    /// complementary: `dim(cell) + dim(dual) = n`.
    pub fn set_diagonal(&mut self, cell: &str, dual: &str, coef: i64) -> Result<(), CellError> {
        let dc = self
            .cell_dim(cell)
            .ok_or_else(|| CellError::UnknownGenerator(cell.to_string()))?;
        let dd = self
            .dual_cell_dim(dual)
            .ok_or_else(|| CellError::UnknownGenerator(dual.to_string()))?;
        if dc + dd != self.dim {
            return Err(CellError::DimensionMismatch(format!(
                "diagonal entry ({cell}, {dual}) pairs dimensions {dc} + {dd} != {}",
                self.dim
            )));
        }
        let key = (cell.to_string(), dual.to_string());
        if coef == 0 {
            self.diagonal.remove(&key);
        } else {
            self.diagonal.insert(key, coef);
        }
        Ok(())
    }

    /// The coefficient of `to` in `∂ from` (zero when absent).
    pub fn boundary_coeff(&self, from: &str, to: &str) -> i64 {
        sparse_get(&self.boundary, from, to)
    }

    /// The coefficient of `to` in `∂∨ from` (zero when absent).
    pub fn dual_boundary_coeff(&self, from: &str, to: &str) -> i64 {
        sparse_get(&self.dual_boundary, from, to)
    }

    /// The diagonal coefficient `c(cell, dual)` (zero when absent).
    pub fn diagonal_coeff(&self, cell: &str, dual: &str) -> i64 {
        *self
            .diagonal
            .get(&(cell.to_string(), dual.to_string()))
            .unwrap_or(&0)
    }

    /// The boundary of a primal cell as a sparse row.
    pub fn boundary_of(&self, from: &str) -> impl Iterator<Item = (&str, i64)> {
        self.boundary
            .get(from)
            .into_iter()
            .flat_map(|row| row.iter().map(|(k, &v)| (k.as_str(), v)))
    }

    /// All nonzero diagonal entries.
    pub fn diagonal_entries(&self) -> impl Iterator<Item = (&str, &str, i64)> {
        self.diagonal
            .iter()
            .map(|((a, b), &v)| (a.as_str(), b.as_str(), v))
    }

    /// Copies the primal cells and boundary onto the dual side, making the
    /// complex self-dual as a decomposition.  The diagonal is left alone.
    pub fn mirror_dual(&mut self) {
        self.dual_cells = self.cells.clone();
        self.dual_boundary = self.boundary.clone();
    }

    /// The Euler characteristic of the primal decomposition.
    pub fn euler_characteristic(&self) -> i64 {
        self.cells
            .iter()
            .map(|c| if c.dim % 2 == 0 { 1 } else { -1 })
            .sum()
    }

    /// Checks `∂² = 0`, `(∂∨)² = 0`, and the cycle identity of the diagonal
    /// class, exactly over the integers.  Returns the empty list iff all
    /// three hold; each failure is reported at the pair of cells where it
    /// occurs.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        self.check_boundary(&self.cells, &self.boundary, false, &mut out);
        self.check_boundary(&self.dual_cells, &self.dual_boundary, true, &mut out);
        self.check_diagonal_entries(&mut out);
        self.check_cycle_identity(&mut out);
        out
    }

    fn check_boundary(
        &self,
        cells: &[Cell],
        boundary: &BoundaryMap,
        dual: bool,
        out: &mut Vec<Violation>,
    ) {
        let dims: BTreeMap<&str, u32> = cells.iter().map(|c| (c.name.as_str(), c.dim)).collect();
        for (from, row) in boundary {
            let df = dims.get(from.as_str()).copied();
            for to in row.keys() {
                let dt = dims.get(to.as_str()).copied();
                let ok = match (df, dt) {
                    (Some(df), Some(dt)) => df == dt + 1,
                    _ => false,
                };
                if !ok {
                    out.push(Violation::BadBoundaryEntry {
                        dual,
                        from: from.clone(),
                        to: to.clone(),
                        reason: "cells missing or dimensions do not drop by one".to_string(),
                    });
                }
            }
        }
        // d(d(from)) collected per final target.
        for from in boundary.keys() {
            let mut square: BTreeMap<&str, i64> = BTreeMap::new();
            if let Some(row) = boundary.get(from) {
                for (mid, &a) in row {
                    if let Some(row2) = boundary.get(mid) {
                        for (to, &b) in row2 {
                            *square.entry(to.as_str()).or_insert(0) += a * b;
                        }
                    }
                }
            }
            for (to, value) in square {
                if value != 0 {
                    out.push(Violation::BoundarySquare {
                        dual,
                        from: from.clone(),
                        to: to.to_string(),
                        value,
                    });
                }
            }
        }
    }

    fn check_diagonal_entries(&self, out: &mut Vec<Violation>) {
        for ((cell, dual), _) in &self.diagonal {
            let dc = self.cell_dim(cell);
            let dd = self.dual_cell_dim(dual);
            let ok = match (dc, dd) {
                (Some(dc), Some(dd)) => dc + dd == self.dim,
                _ => false,
            };
            if !ok {
                out.push(Violation::BadDiagonalEntry {
                    cell: cell.clone(),
                    dual: dual.clone(),
                    reason: "cells missing or dimensions not complementary".to_string(),
                });
            }
        }
    }

    fn check_cycle_identity(&self, out: &mut Vec<Violation>) {
        // For every primal alpha and dual gamma with
        // dim(alpha) + dim(gamma) = n + 1:
        //   sum_beta d(alpha, beta) c(beta, gamma)
        //     = -sum_beta c(alpha, beta) dv(beta, gamma),
        // where dv(beta, gamma) is the coefficient of beta in dv(gamma).
        for alpha in &self.cells {
            for gamma in &self.dual_cells {
                if alpha.dim + gamma.dim != self.dim + 1 {
                    continue;
                }
                let mut lhs = 0i64;
                if let Some(row) = self.boundary.get(&alpha.name) {
                    for (beta, &a) in row {
                        lhs += a * self.diagonal_coeff(beta, &gamma.name);
                    }
                }
                let mut rhs = 0i64;
                if let Some(row) = self.dual_boundary.get(&gamma.name) {
                    for (beta, &b) in row {
                        rhs -= self.diagonal_coeff(&alpha.name, beta) * b;
                    }
                }
                if lhs != rhs {
                    out.push(Violation::CycleIdentity {
                        cell: alpha.name.clone(),
                        dual: gamma.name.clone(),
                        lhs,
                        rhs,
                    });
                }
            }
        }
    }

    /// Extends the diagonal coefficients over ordered self-intersection
    /// generators: `c(σ, x) = c(x, σ) = 1` iff `σ = x̄`, else 0.
    ///
    /// `si_points` lists ordered pairs `(x, x̄)`; both orderings of each
    /// self-intersection point should be listed, so that the conjugation is
    /// total on the generators involved.  Fails with
    /// [`CellError::UnknownGenerator`] if a generator name collides with a
    /// cell or appears twice with different conjugates.
    pub fn extend_diagonal(
        &self,
        si_points: &[(String, String)],
    ) -> Result<ExtendedDiagonal<'_>, CellError> {
        let mut conj = BTreeMap::new();
        for (x, xbar) in si_points {
            for name in [x, xbar] {
                if self.cell_dim(name).is_some() || self.dual_cell_dim(name).is_some() {
                    return Err(CellError::UnknownGenerator(format!(
                        "{name} is a cell, not a self-intersection generator"
                    )));
                }
            }
            for (a, b) in [(x, xbar), (xbar, x)] {
                if let Some(prev) = conj.insert(a.clone(), b.clone()) {
                    if &prev != b {
                        return Err(CellError::UnknownGenerator(format!(
                            "{a} listed with two different conjugates"
                        )));
                    }
                }
            }
        }
        Ok(ExtendedDiagonal {
            complex: self,
            conj,
        })
    }

    /// The cup product of two cellular cochains through the diagonal class.
    ///
    /// The complex only records the homology class of the diagonal, so the
    /// product is the induced one in cohomology: degrees beyond the ambient
    /// dimension multiply to zero; a degree-0 factor that is constant on the
    /// 0-cells acts by scaling; cochains of complementary degree pair
    /// against the diagonal class, giving a scalar multiple of the
    /// top-degree class.  Products in intermediate degrees are not
    /// determined by the class alone and are rejected.
    pub fn cup_product(&self, a: &CellCochain, b: &CellCochain) -> Result<CellCochain, CellError> {
        let pa = self.cochain_degree(a)?;
        let pb = self.cochain_degree(b)?;
        let (p, q) = match (pa, pb) {
            (Some(p), Some(q)) => (p, q),
            _ => return Ok(CellCochain::new()),
        };
        if p + q > self.dim {
            return Ok(CellCochain::new());
        }
        if p == 0 {
            if let Some(v) = self.constant_on_points(a) {
                return Ok(scale_cochain(b, &v));
            }
        }
        if q == 0 {
            if let Some(v) = self.constant_on_points(b) {
                return Ok(scale_cochain(a, &v));
            }
        }
        if p + q == self.dim {
            let mut s = NovikovElement::zero();
            for ((sigma, tau), &coef) in &self.diagonal {
                if self.cell_dim(sigma) != Some(p) {
                    continue;
                }
                let (Some(av), Some(bv)) = (a.get(sigma), b.get(tau)) else {
                    continue;
                };
                s = s + (av.clone() * bv.clone()).scale(Complex64::new(coef as f64, 0.0));
            }
            let mut out = CellCochain::new();
            if !s.is_zero() {
                for cell in self.cells.iter().filter(|c| c.dim == self.dim) {
                    out.insert(cell.name.clone(), s.clone());
                }
            }
            return Ok(out);
        }
        Err(CellError::DimensionMismatch(format!(
            "cup product in degrees ({p}, {q}) is not determined by the diagonal class"
        )))
    }

    /// The common dimension of the cells supporting `a`, or `None` for the
    /// zero cochain.  Mixed-degree or off-complex support is an error.
    fn cochain_degree(&self, a: &CellCochain) -> Result<Option<u32>, CellError> {
        let mut deg = None;
        for (name, v) in a {
            if v.is_zero() {
                continue;
            }
            let d = self
                .cell_dim(name)
                .ok_or_else(|| CellError::UnknownGenerator(name.clone()))?;
            match deg {
                None => deg = Some(d),
                Some(prev) if prev == d => {}
                Some(prev) => {
                    return Err(CellError::DimensionMismatch(format!(
                        "cochain mixes degrees {prev} and {d}"
                    )))
                }
            }
        }
        Ok(deg)
    }

    /// If `a` takes one common value on every 0-cell, that value.
    fn constant_on_points(&self, a: &CellCochain) -> Option<NovikovElement> {
        let mut value: Option<&NovikovElement> = None;
        for cell in self.cells.iter().filter(|c| c.dim == 0) {
            let v = a.get(&cell.name)?;
            match value {
                None => value = Some(v),
                Some(prev) if prev.approx_eq(v, ZERO_TOL) => {}
                Some(_) => return None,
            }
        }
        value.cloned()
    }

    /// Performs the cell-level surgery at a self-intersection point.
    ///
    /// Removes the top cells of the two standard balls and glues in a
    /// 1-cell and an n-cell with
    /// `∂σ_1 = σ_{0,+} − σ_{0,−}` and `∂σ_n = σ_{n−1,+} − σ_{n−1,−}`; all
    /// other cells, boundary entries and diagonal entries are preserved.
    /// The same modification is applied to the dual decomposition, which
    /// must contain the ball cells under the same names.
    ///
    /// Unless overridden, the diagonal is extended over the handle by the
    /// pattern
    ///
    /// ```text
    /// c(σ_{n−1,−}, σ_1) = c(σ_1, σ_{n−1,+}) = c(σ_n, σ_{0,+}) = c(σ_{0,−}, σ_n) = 1
    /// ```
    ///
    /// with all other coefficients involving the neck cells zero.  The first
    /// two entries pair the new 1-cell with the boundary spheres; the last
    /// two are forced, with the same chirality, by closing the cycle
    /// identity against the new boundaries.  Whether the result validates
    /// still depends on how the diagonal of the input complex treats the
    /// cells that survive near the balls; the extension is validated, not
    /// solved for.
    pub fn surger_cells(
        &self,
        plus: &StandardBall,
        minus: &StandardBall,
        opts: &SurgerOptions,
    ) -> Result<CellComplex, CellError> {
        let n = self.dim;
        if n < 2 {
            return Err(CellError::DimensionTooLow(n));
        }
        for ball in [plus, minus] {
            self.check_ball(ball)?;
        }
        let overlap = [&plus.top, &plus.sphere, &plus.point]
            .iter()
            .any(|name| [&minus.top, &minus.sphere, &minus.point].contains(name));
        if overlap {
            return Err(CellError::InvalidBall(
                "the two standard balls share a cell".to_string(),
            ));
        }

        let removed: BTreeSet<&str> = [plus.top.as_str(), minus.top.as_str()].into();
        let mut out = self.clone();
        out.cells.retain(|c| !removed.contains(c.name.as_str()));
        out.dual_cells
            .retain(|c| !removed.contains(c.name.as_str()));
        for boundary in [&mut out.boundary, &mut out.dual_boundary] {
            boundary.retain(|from, _| !removed.contains(from.as_str()));
            for row in boundary.values_mut() {
                row.retain(|to, _| !removed.contains(to.as_str()));
            }
        }
        out.diagonal
            .retain(|(a, b), _| !removed.contains(a.as_str()) && !removed.contains(b.as_str()));

        out.add_cell(&opts.cell_1, 1)?;
        out.add_cell(&opts.cell_n, n)?;
        out.add_dual_cell(&opts.cell_1, 1)?;
        out.add_dual_cell(&opts.cell_n, n)?;
        let sgn = if opts.flip_orientation { -1 } else { 1 };
        out.set_boundary(&opts.cell_1, &plus.point, sgn)?;
        out.set_boundary(&opts.cell_1, &minus.point, -sgn)?;
        out.set_boundary(&opts.cell_n, &plus.sphere, sgn)?;
        out.set_boundary(&opts.cell_n, &minus.sphere, -sgn)?;
        out.set_dual_boundary(&opts.cell_1, &plus.point, sgn)?;
        out.set_dual_boundary(&opts.cell_1, &minus.point, -sgn)?;
        out.set_dual_boundary(&opts.cell_n, &plus.sphere, sgn)?;
        out.set_dual_boundary(&opts.cell_n, &minus.sphere, -sgn)?;

        match &opts.handle_diagonal {
            Some(entries) => {
                for (cell, dual, coef) in entries {
                    out.set_diagonal(cell, dual, *coef)?;
                }
            }
            None => {
                out.set_diagonal(&minus.sphere, &opts.cell_1, 1)?;
                out.set_diagonal(&opts.cell_1, &plus.sphere, 1)?;
                out.set_diagonal(&opts.cell_n, &plus.point, 1)?;
                out.set_diagonal(&minus.point, &opts.cell_n, 1)?;
            }
        }
        Ok(out)
    }

    fn check_ball(&self, ball: &StandardBall) -> Result<(), CellError> {
        let n = self.dim;
        for (name, want) in [
            (&ball.top, n),
            (&ball.sphere, n - 1),
            (&ball.point, 0u32),
        ] {
            for dim in [self.cell_dim(name), self.dual_cell_dim(name)] {
                match dim {
                    None => return Err(CellError::MissingBall(name.clone())),
                    Some(d) if d != want => {
                        return Err(CellError::InvalidBall(format!(
                            "{name} has dimension {d}, expected {want}"
                        )))
                    }
                    Some(_) => {}
                }
            }
        }
        // The top cell must be a ball: d(top) = +-sphere and nothing else.
        let row: Vec<(&str, i64)> = self.boundary_of(&ball.top).collect();
        let ok = matches!(row.as_slice(), [(to, c)] if *to == ball.sphere && c.abs() == 1);
        if !ok {
            return Err(CellError::InvalidBall(format!(
                "boundary of {} is not +-{}",
                ball.top, ball.sphere
            )));
        }
        Ok(())
    }
}

/// The diagonal coefficients extended over ordered self-intersection
/// generators, as returned by [`CellComplex::extend_diagonal`].
pub struct ExtendedDiagonal<'a> {
    complex: &'a CellComplex,
    conj: BTreeMap<String, String>,
}

impl ExtendedDiagonal<'_> {
    /// The extended coefficient `c(a, b)`.
    ///
    /// Cell pairs use the complex's diagonal; an ordered self-intersection
    /// generator pairs only with its conjugate, with coefficient 1.  Mixed
    /// cell/generator pairs vanish.  Names that are neither cells nor
    /// registered generators are rejected.
    pub fn c(&self, a: &str, b: &str) -> Result<i64, CellError> {
        let kind = |name: &str| -> Result<bool, CellError> {
            if self.conj.contains_key(name) {
                Ok(true)
            } else if self.complex.cell_dim(name).is_some()
                || self.complex.dual_cell_dim(name).is_some()
            {
                Ok(false)
            } else {
                Err(CellError::UnknownGenerator(name.to_string()))
            }
        };
        match (kind(a)?, kind(b)?) {
            (true, true) => Ok((self.conj[a] == b) as i64),
            (false, false) => Ok(self.complex.diagonal_coeff(a, b)),
            _ => Ok(0),
        }
    }

    /// The conjugate of an ordered self-intersection generator.
    pub fn conjugate(&self, name: &str) -> Option<&str> {
        self.conj.get(name).map(String::as_str)
    }
}

fn set_sparse(map: &mut BoundaryMap, from: &str, to: &str, coef: i64) {
    if coef == 0 {
        if let Some(row) = map.get_mut(from) {
            row.remove(to);
            if row.is_empty() {
                map.remove(from);
            }
        }
    } else {
        map.entry(from.to_string())
            .or_default()
            .insert(to.to_string(), coef);
    }
}

fn sparse_get(map: &BoundaryMap, from: &str, to: &str) -> i64 {
    map.get(from).and_then(|row| row.get(to)).copied().unwrap_or(0)
}

fn scale_cochain(a: &CellCochain, v: &NovikovElement) -> CellCochain {
    a.iter()
        .filter(|(_, x)| !x.is_zero())
        .map(|(k, x)| (k.clone(), v.clone() * x.clone()))
        .filter(|(_, x)| !x.is_zero())
        .collect()
}

#[derive(Serialize, Deserialize)]
struct BoundaryDto {
    from: String,
    to: String,
    coef: i64,
}

#[derive(Serialize, Deserialize)]
struct DiagonalDto {
    cell: String,
    dual: String,
    coef: i64,
}

#[derive(Serialize, Deserialize)]
struct ComplexDto {
    cells: Vec<Cell>,
    boundary: Vec<BoundaryDto>,
    dual_cells: Vec<Cell>,
    dual_boundary: Vec<BoundaryDto>,
    diagonal: Vec<DiagonalDto>,
    dim: u32,
}

impl From<CellComplex> for ComplexDto {
    fn from(c: CellComplex) -> Self {
        let rows = |map: &BoundaryMap| -> Vec<BoundaryDto> {
            map.iter()
                .flat_map(|(from, row)| {
                    row.iter().map(move |(to, &coef)| BoundaryDto {
                        from: from.clone(),
                        to: to.clone(),
                        coef,
                    })
                })
                .collect()
        };
        ComplexDto {
            boundary: rows(&c.boundary),
            dual_boundary: rows(&c.dual_boundary),
            diagonal: c
                .diagonal
                .iter()
                .map(|((cell, dual), &coef)| DiagonalDto {
                    cell: cell.clone(),
                    dual: dual.clone(),
                    coef,
                })
                .collect(),
            cells: c.cells,
            dual_cells: c.dual_cells,
            dim: c.dim,
        }
    }
}

impl TryFrom<ComplexDto> for CellComplex {
    type Error = CellError;

    fn try_from(dto: ComplexDto) -> Result<Self, CellError> {
        let mut c = CellComplex::new(dto.dim);
        for cell in &dto.cells {
            c.add_cell(&cell.name, cell.dim)?;
        }
        for cell in &dto.dual_cells {
            c.add_dual_cell(&cell.name, cell.dim)?;
        }
        for e in &dto.boundary {
            c.set_boundary(&e.from, &e.to, e.coef)?;
        }
        for e in &dto.dual_boundary {
            c.set_dual_boundary(&e.from, &e.to, e.coef)?;
        }
        for e in &dto.diagonal {
            c.set_diagonal(&e.cell, &e.dual, e.coef)?;
        }
        Ok(c)
    }
}
