//! Numerical laboratory for the equidistribution of eigenfunctions of
//! `−Δ + V` on rectangular 2-tori.
//!
//! * [`lattice`]: exact dual-lattice arithmetic, Laplace spectrum, annuli.
//! * [`goodset`]: bad vectors, bad values and the good eigenvalue sets.
//! * [`potentials`]: Fourier-space potentials, scatterer and disorder models.
//! * [`solver`]: plane-wave Galerkin eigensolver and per-eigenpair bounds.
//! * [`diagnostics`]: discrepancies, rates and localization-length bounds.
//! * [`io`]: CSV, JSON and binary output formats.

pub mod diagnostics;
pub mod error;
pub mod goodset;
pub mod io;
pub mod lattice;
pub mod potentials;
pub mod seeding;
pub mod solver;

pub use error::{DiagnosticsError, GoodSetError, LatticeError, PotentialError, SolverError};
pub use lattice::{AspectRatio, DualVector, QValue};
