//! Cellular Fukaya algebras over the Novikov field, at desk scale.
//!
//! This crate represents immersed-Lagrangian Floer theory through finite
//! combinatorial data: a cell complex with a diagonal approximation, a
//! finite "disk atlas" listing rigid disks with areas, signs and holonomy,
//! and Maurer-Cartan cochains with Novikov coefficients.  On top of that
//! it implements the Lagrangian-surgery transform of weakly bounding
//! cochains and verifies, term-exactly up to series truncation, that the
//! transform preserves disk potentials and Floer cohomology.
//!
//! The modules build on each other in order:
//!
//! * [`novikov`]: truncated series with exact rational exponents.
//! * [`cellular`]: cell complexes, boundary/diagonal coefficients, and the
//!   handle-attachment surgery on cell structures.
//! * [`ainfty`]: curved A-infinity algebras assembled from a disk atlas.
//! * [`mc`]: Maurer-Cartan residuals, disk potentials, gauge equivalence.
//! * [`floer`]: the Floer differential and cohomology ranks over the
//!   Novikov field, with truncation-stability certificates.
//! * [`surgery`]: the surgery transform on cochains and atlases, and the
//!   correlator-identity verifier.
//! * [`cone`]: mapping cones of cocycles between embedded Lagrangians and
//!   their comparison with surgery.
//! * [`examples`]: small bundled scenarios used by the CLI and tests.

pub mod ainfty;
pub mod cellular;
pub mod cone;
pub mod examples;
pub mod floer;
pub mod mc;
pub mod novikov;
pub mod surgery;

pub use ainfty::{AinftyError, Cochain, CurvedAInftyAlgebra, Disk, GenKind, Generator};
pub use cellular::{CellCochain, CellComplex, CellError, StandardBall, Violation};
pub use novikov::{NovikovElement, NovikovError};
