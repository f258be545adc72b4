//! Heavy-tailed random Toeplitz matrices and their limiting spectral operator.
//!
//! The crate is organised along the objects it simulates:
//!
//! * [`sampler`] draws Pareto-tailed entry sequences and realizations of the
//!   Poisson environment `(Γ_j, ζ_j, U_j, ε_j)`.
//! * [`matrices`] builds the finite matrices: the Toeplitz matrix `T_N`, its
//!   circulant embedding `G_2N`, the projection `P_2N` and the truncated
//!   `H` family.
//! * [`operator`] realizes finite windows of the kernel `Π`, the random
//!   diagonal `Λ` and the operator `Δ = ΠΛΠ` on `ℓ²(ℤ)`.
//! * [`spectra`] holds eigendecompositions, empirical spectral distributions,
//!   spectral measures at a vector and the Monte Carlo limit measure.
//! * [`metrics`] implements Lévy and Kolmogorov–Smirnov distances, moment
//!   generating functions and the environment bounds on the limit.
//! * [`io`] and [`histogram`] cover the file formats used by the experiment
//!   harness.

pub mod error;
pub mod histogram;
pub mod io;
pub mod matrices;
pub mod metrics;
pub mod operator;
mod parallel;
pub mod rng;
pub mod sampler;
pub mod spectra;

pub use error::{Error, Result};
pub use matrices::{
    DiagonalSpectrum, HermitianWindow, MiddleEntry, SymmetricMatrix, TruncationLevels,
};
pub use metrics::{ks_distance, levy_distance};
pub use operator::{OperatorWindow, RhoSeries};
pub use rng::RngSeed;
pub use sampler::{AlphaParams, EntrySequence, Environment};
pub use spectra::{EigenSystem, LimitMeasure, PointMeasure};

pub use num_complex::Complex64;
