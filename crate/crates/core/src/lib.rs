//! Quadrature measures on data-defined spaces.
//!
//! A data-defined space is a quasi-metric probability-measure space carrying
//! an orthonormal eigensystem `{(λ_k, φ_k)}` with `λ_0 = 0`, `φ_0 ≡ 1`.
//! This crate builds model spaces (circle, 2-torus, sphere) with analytic
//! spectra, ingests point-cloud spectra from graph Laplacians, evaluates
//! localized spectral kernels, and constructs exact and approximate
//! quadrature weights by moment matching or by minimizing a type-β kernel
//! discrepancy over the probability simplex. Verification tooling covers
//! exactness residuals, regularity constants, worst-case integration error
//! over smoothness balls, and covering statistics.
//!
//! The scalar-agnostic pieces (mask profiles, the smooth cutoff, simplex
//! projection and the QP solvers) are generic over [`num_traits::Float`];
//! concrete `f64` aliases live at the crate root. Everything bound to a
//! space (eigensystems, reference rules, reports) is `f64`.

pub mod error;
pub mod gauss;
pub mod kernels;
pub mod mask;
pub mod measures;
pub mod operators;
pub mod opt;
pub mod quadrature;
pub mod report;
pub mod run;
pub mod scalar;
pub mod spaces;

pub use error::{Error, Result};
pub use measures::PointMeasure;
pub use operators::{Norm, SpectralFunction};
pub use spaces::{EigenData, Point, Space};

/// Mask profile over `f64`, the only instantiation the space layer uses.
pub type Mask = mask::MaskProfile<f64>;
/// Simplex-constrained QP settings over `f64`.
pub type QpSettings = opt::QpSettings<f64>;
/// Simplex-constrained QP outcome over `f64`.
pub type QpOutcome = opt::QpOutcome<f64>;
