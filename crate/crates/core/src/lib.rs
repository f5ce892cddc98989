//! Exact Heisenberg-picture dynamics for a bosonic mode with a squeezing
//! drive, linearly coupled to a discretized oscillator bath.
//!
//! Every quadratic exponent `(1/2) Λᵀ R Λ` over the operator vector
//! `Λ = (a†, b₁†..b_N†, a, b₁..b_N)` conjugates `Λᵀ` into `Λᵀ e^{-RS}`, so the
//! whole evolution, including instantaneous parity kicks on the system mode,
//! reduces to products of dense `2M x 2M` transfer matrices.
//!
//! Modules, bottom up:
//! - [`matexp`]: complex matrices and the matrix exponential.
//! - [`model`]: mode layout, spectral densities and the `R` generator.
//! - [`propagator`]: transfer matrices, parity kicks and kick cycles.
//! - [`observables`]: quadrature variance and excited-state survival.
//! - [`reference`]: exact Lorentzian amplitude and the Markovian master equation.

pub mod error;
pub mod matexp;
pub mod model;
pub mod observables;
pub mod propagator;
pub mod reference;

pub use error::{Error, Result};
pub use matexp::{expm, mat_mul, one_norm, ComplexMatrix, LinalgError};
pub use model::{
    assemble_r, coupling_from_spectrum, symplectic_form, BathGrid, HamiltonianSpec, InteractionSign, ModeLayout,
    RMatrix, SpectrumSpec,
};
pub use observables::{quadrature_variance, survival_probability, InitialMoments, TimeSeries};
pub use propagator::{kick_cycle, parity_matrix, stroboscopic, transfer, KickSchedule, TransferMatrix};

/// Default tolerance handed to [`expm`].
pub const DEFAULT_EXPM_TOL: f64 = 1e-12;
