//! Reference solutions the transfer-matrix engine is checked against.
//!
//! - The exact amplitude of a mode coupled to a continuum with Lorentzian
//!   couplings `g(ω) = ηΓ/√((ω − ω₀)² + Γ²)` and mode density D.
//! - The zero-temperature Markovian master equation with decay rate
//!   `λ = 2πD g(ω)²`, integrated on a truncated Fock space.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matexp::ComplexMatrix;
use crate::observables::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzianExactParams {
    pub width_gamma_per_s: f64,
    pub strength_eta_per_s: f64,
    pub mode_density_s: f64,
    /// Only sets a global phase of the amplitude.
    pub system_frequency_rad_per_s: f64,
}

impl LorentzianExactParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("width", self.width_gamma_per_s),
            ("strength", self.strength_eta_per_s),
            ("mode density", self.mode_density_s),
            ("system frequency", self.system_frequency_rad_per_s),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Squared oscillation frequency `Θ² = 4πη²DΓ − Γ²`.
    ///
    /// The memory kernel of the Lorentzian continuum is `πDη²Γ e^{−Γ|τ|}`, so
    /// the amplitude obeys `u'' + Γu' + πDη²Γ u = 0`. Negative `Θ²` is the
    /// overdamped regime.
    pub fn theta_squared(&self) -> f64 {
        let (g, eta, d) = (self.width_gamma_per_s, self.strength_eta_per_s, self.mode_density_s);
        4.0 * PI * eta * eta * d * g - g * g
    }

    pub fn theta(&self) -> Complex64 {
        Complex64::new(self.theta_squared(), 0.0).sqrt()
    }

    /// Markovian rate `2πDη²` for the same bath.
    pub fn markov_rate(&self) -> f64 {
        markov_decay_rate(self.mode_density_s, self.strength_eta_per_s)
    }
}

/// `|u(t)|²` with `u = e^{−Γt/2}[cos(Θt/2) + (Γ/Θ) sin(Θt/2)]`.
pub fn lorentzian_exact_survival(p: &LorentzianExactParams, t: f64) -> f64 {
    lorentzian_exact_amplitude(p, t).norm_sqr()
}

/// The amplitude `u(t)e^{−Γt/2}` without the `e^{−iωt}` phase.
pub fn lorentzian_exact_amplitude(p: &LorentzianExactParams, t: f64) -> Complex64 {
    let gamma = p.width_gamma_per_s;
    let theta = p.theta();
    let half = theta * (t / 2.0);
    // sin(Θt/2)/Θ, removable singularity at Θ = 0
    let sinc = if (theta * t).norm() < 1e-4 {
        (t / 2.0) * (1.0 - half * half / 6.0)
    } else {
        half.sin() / theta
    };
    (half.cos() + gamma * sinc) * (-gamma * t / 2.0).exp()
}

/// `λ = 2πD g²`.
pub fn markov_decay_rate(mode_density: f64, coupling_at_resonance: f64) -> f64 {
    2.0 * PI * mode_density * coupling_at_resonance * coupling_at_resonance
}

/// Density matrix on the Fock space `|0⟩..|n_max⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    rho: ComplexMatrix,
}

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;

/// Default truncation: single excitations never climb above |1⟩ at zero temperature.
pub const DEFAULT_FOCK_CUTOFF: usize = 5;

impl FockState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::InvalidState(format!("density matrix shape {:?}", rho.shape())));
        }
        let herm = rho.max_abs_diff(&rho.adjoint());
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (residual {herm:e})")));
        }
        let tr = rho.trace();
        if (tr - 1.0).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let min_eig = min_eigenvalue(&rho);
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { rho })
    }

    /// `|n⟩⟨n|` truncated at `n_max`.
    pub fn number_state(n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(Error::InvalidState(format!("|{n}⟩ outside truncation {n_max}")));
        }
        let mut rho = ComplexMatrix::zeros(n_max + 1, n_max + 1);
        rho[(n, n)] = Complex64::new(1.0, 0.0);
        Ok(Self { rho })
    }

    pub fn n_max(&self) -> usize {
        self.rho.rows() - 1
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn population(&self, n: usize) -> f64 {
        self.rho[(n, n)].re
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }
}

fn min_eigenvalue(rho: &ComplexMatrix) -> f64 {
    let n = rho.rows();
    // Hermitian part, so the symmetric solver sees exact symmetry
    let m = DMatrix::from_fn(n, n, |i, j| (rho[(i, j)] + rho[(j, i)].conj()) * 0.5);
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Zero-temperature master equation
/// `dρ/dt = −iω[a†a, ρ] + (λ/2)(2aρa† − a†aρ − ρa†a)`,
/// integrated with fixed-step classical RK4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladSolver {
    pub decay_rate: f64,
    /// Oscillator frequency; zero in the rotating frame. Populations do not depend on it.
    pub frequency: f64,
}

/// Largest `λh` (and `ωh`) per RK4 step; local error then sits near `1e-12`.
const MAX_RATE_STEP: f64 = 1e-2;
const TRACE_DRIFT_LIMIT: f64 = 1e-8;

impl LindbladSolver {
    pub fn new(decay_rate: f64) -> Self {
        Self {
            decay_rate,
            frequency: 0.0,
        }
    }

    pub fn with_frequency(self, frequency: f64) -> Self {
        Self { frequency, ..self }
    }

    fn max_step(&self) -> f64 {
        let fastest = self.decay_rate.abs().max(self.frequency.abs());
        if fastest == 0.0 {
            f64::INFINITY
        } else {
            MAX_RATE_STEP / fastest
        }
    }

    /// Elementwise right-hand side: with `a|n⟩ = √n |n−1⟩`,
    /// `(aρa†)_ij = √((i+1)(j+1)) ρ_{i+1,j+1}`.
    fn rhs(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let d = rho.rows();
        let lambda = self.decay_rate;
        let omega = self.frequency;
        ComplexMatrix::from_fn(d, d, |i, j| {
            let r = rho[(i, j)];
            let rotation = Complex64::new(0.0, -omega * (i as f64 - j as f64)) * r;
            let feed = if i + 1 < d && j + 1 < d {
                rho[(i + 1, j + 1)] * (((i + 1) * (j + 1)) as f64).sqrt()
            } else {
                Complex64::new(0.0, 0.0)
            };
            rotation + (feed - r * ((i + j) as f64 / 2.0)) * lambda
        })
    }

    fn rk4_step(&self, rho: &ComplexMatrix, h: f64) -> ComplexMatrix {
        let k1 = self.rhs(rho);
        let mut y = rho.clone();
        y.axpy(h / 2.0, &k1);
        let k2 = self.rhs(&y);
        let mut y = rho.clone();
        y.axpy(h / 2.0, &k2);
        let k3 = self.rhs(&y);
        let mut y = rho.clone();
        y.axpy(h, &k3);
        let k4 = self.rhs(&y);
        let mut out = rho.clone();
        out.axpy(h / 6.0, &k1);
        out.axpy(h / 3.0, &k2);
        out.axpy(h / 3.0, &k3);
        out.axpy(h / 6.0, &k4);
        out
    }

    /// States at each requested time, starting from `rho0` at `t = 0`.
    pub fn evolve(&self, rho0: &FockState, times: &[f64]) -> Result<Vec<FockState>> {
        if !(self.decay_rate >= 0.0 && self.decay_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "decay rate must be >= 0, got {}",
                self.decay_rate
            )));
        }
        if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "times must be >= 0 and strictly increasing".into(),
            ));
        }
        let h_max = self.max_step();
        let mut rho = rho0.rho.clone();
        let mut now = 0.0;
        let mut out = Vec::with_capacity(times.len());
        for &target in times {
            let span = target - now;
            if span > 0.0 {
                let steps = (span / h_max).ceil().max(1.0) as usize;
                let h = span / steps as f64;
                for _ in 0..steps {
                    rho = self.rk4_step(&rho, h);
                    let drift = (rho.trace() - 1.0).norm();
                    if drift > TRACE_DRIFT_LIMIT {
                        return Err(Error::Integrator(format!("trace drift {drift:e} at t = {now:e}")));
                    }
                }
            }
            now = target;
            out.push(FockState { rho: rho.clone() });
        }
        Ok(out)
    }
}

/// `P(t) = ⟨1|ρ(t)|1⟩` in the rotating frame.
pub fn lindblad_evolve(decay_rate: f64, rho0: &FockState, times: &[f64]) -> Result<TimeSeries> {
    if rho0.n_max() < 1 {
        return Err(Error::InvalidState("truncation must include |1⟩".into()));
    }
    let states = LindbladSolver::new(decay_rate).evolve(rho0, times)?;
    TimeSeries::new(
        "markov",
        times.to_vec(),
        states.iter().map(|s| s.population(1)).collect(),
    )
}
