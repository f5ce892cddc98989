//! Hamiltonian description and the symmetric `R` matrix of the quadratic
//! exponent.
//!
//! All dynamics live in the frame rotating at the system frequency ω: the
//! system mode has detuning δ₀ (zero in that frame), bath mode j has detuning
//! ω_j − ω, the squeezing drive is time independent, and the couplings γ_j are
//! real. Rates are angular frequencies in s⁻¹ and enter `iHt/ħ` directly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matexp::ComplexMatrix;

/// Index map for `Λ = (a†, b₁†..b_N†, a, b₁..b_N)`.
///
/// Mode 0 is the system; modes 1..=N are the bath. With `M = N + 1`, the
/// creation operator of mode k sits at index k and its annihilation operator
/// at index `M + k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeLayout {
    n_bath: usize,
}

impl ModeLayout {
    pub const SYSTEM: usize = 0;

    pub fn new(n_bath: usize) -> Self {
        Self { n_bath }
    }

    pub fn n_bath(&self) -> usize {
        self.n_bath
    }

    /// Number of modes `M = N + 1`.
    pub fn modes(&self) -> usize {
        self.n_bath + 1
    }

    /// Length of Λ, `2M`.
    pub fn dim(&self) -> usize {
        2 * self.modes()
    }

    #[inline]
    pub fn creation(&self, mode: usize) -> usize {
        debug_assert!(mode < self.modes());
        mode
    }

    #[inline]
    pub fn annihilation(&self, mode: usize) -> usize {
        debug_assert!(mode < self.modes());
        self.modes() + mode
    }
}

/// Coupling profile g(ω_j) of the discretized bath.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectrumSpec {
    /// g = ηΓ / √((ω_j − ω_center)² + Γ²). The center defaults to the system
    /// frequency.
    Lorentzian {
        #[serde(rename = "width_gamma_per_s")]
        width: f64,
        #[serde(rename = "strength_eta_per_s")]
        strength: f64,
        #[serde(rename = "center_rad_per_s", default, skip_serializing_if = "Option::is_none")]
        center: Option<f64>,
    },
    /// g = √(ξ ω_j) e^{−ω_j/ω_c}.
    Ohmic {
        #[serde(rename = "xi_per_s")]
        xi: f64,
        #[serde(rename = "cutoff_rad_per_s")]
        cutoff: f64,
    },
    Flat {
        #[serde(rename = "coupling_per_s")]
        coupling: f64,
    },
    Explicit {
        #[serde(rename = "couplings_per_s")]
        couplings: Vec<f64>,
    },
}

impl SpectrumSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        match self {
            Self::Lorentzian {
                width,
                strength,
                center,
            } => {
                positive("lorentzian width", *width)?;
                positive("lorentzian strength", *strength)?;
                if let Some(c) = center {
                    if !c.is_finite() {
                        return Err(Error::InvalidParameter("lorentzian center not finite".into()));
                    }
                }
                Ok(())
            }
            Self::Ohmic { xi, cutoff } => {
                positive("ohmic xi", *xi)?;
                positive("ohmic cutoff", *cutoff)
            }
            Self::Flat { coupling } => positive("flat coupling", *coupling),
            Self::Explicit { couplings } => match couplings.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
                Some(g) => Err(Error::InvalidParameter(format!(
                    "explicit couplings must be finite and >= 0, got {g}"
                ))),
                None => Ok(()),
            },
        }
    }

    /// Coupling at a single frequency. `Explicit` has no closed form and
    /// returns `None`.
    pub fn evaluate(&self, freq: f64, system_frequency: f64) -> Option<f64> {
        match *self {
            Self::Lorentzian {
                width,
                strength,
                center,
            } => {
                let detuning = freq - center.unwrap_or(system_frequency);
                Some(strength * width / detuning.hypot(width))
            }
            Self::Ohmic { xi, cutoff } => Some((xi * freq).sqrt() * (-freq / cutoff).exp()),
            Self::Flat { coupling } => Some(coupling),
            Self::Explicit { .. } => None,
        }
    }
}

/// Uniform grid of bath frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct BathGrid {
    frequencies: Vec<f64>,
    spacing: f64,
}

/// Relative tolerance on the uniformity of an explicit frequency list.
const GRID_UNIFORMITY: f64 = 1e-9;

impl BathGrid {
    /// `first + j * spacing` for `j = 0..n_modes`.
    pub fn uniform(first: f64, spacing: f64, n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidParameter("bath grid needs at least one mode".into()));
        }
        if !(spacing > 0.0 && spacing.is_finite()) || !first.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bath grid spacing must be positive and finite, got {spacing}"
            )));
        }
        let frequencies = (0..n_modes).map(|j| first + j as f64 * spacing).collect();
        Ok(Self { frequencies, spacing })
    }

    pub fn from_frequencies(frequencies: Vec<f64>) -> Result<Self> {
        match frequencies.len() {
            0 => return Err(Error::InvalidParameter("bath grid needs at least one mode".into())),
            1 => {
                return Err(Error::InvalidParameter(
                    "a single frequency does not define a spacing; use BathGrid::uniform".into(),
                ))
            }
            _ => {}
        }
        let n = frequencies.len();
        let spacing = (frequencies[n - 1] - frequencies[0]) / (n - 1) as f64;
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidParameter("bath frequencies must increase".into()));
        }
        for w in frequencies.windows(2) {
            let step = w[1] - w[0];
            if step <= 0.0 || ((step - spacing) / spacing).abs() > GRID_UNIFORMITY {
                return Err(Error::InvalidParameter(format!(
                    "bath frequencies not uniform: step {step:e} vs mean spacing {spacing:e}"
                )));
            }
        }
        Ok(Self { frequencies, spacing })
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Mode density `D = 1/Δω`.
    pub fn density(&self) -> f64 {
        1.0 / self.spacing
    }

    pub fn detunings(&self, system_frequency: f64) -> Vec<f64> {
        self.frequencies.iter().map(|w| w - system_frequency).collect()
    }
}

/// Serialized form of a uniform [`BathGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathGridConfig {
    pub first_rad_per_s: f64,
    pub spacing_rad_per_s: f64,
    pub n_modes: usize,
}

impl BathGridConfig {
    pub fn build(&self) -> Result<BathGrid> {
        BathGrid::uniform(self.first_rad_per_s, self.spacing_rad_per_s, self.n_modes)
    }
}

/// γ_j = g(ω_j) on every grid frequency.
pub fn coupling_from_spectrum(spec: &SpectrumSpec, grid: &BathGrid, system_frequency: f64) -> Result<Vec<f64>> {
    spec.validate()?;
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty bath grid".into()));
    }
    match spec {
        SpectrumSpec::Explicit { couplings } => {
            if couplings.len() != grid.len() {
                return Err(Error::Dimension(format!(
                    "{} explicit couplings for {} bath modes",
                    couplings.len(),
                    grid.len()
                )));
            }
            Ok(couplings.clone())
        }
        SpectrumSpec::Ohmic { .. } => {
            if let Some(w) = grid.frequencies().iter().find(|w| **w <= 0.0) {
                return Err(Error::Domain(format!(
                    "ohmic spectrum needs positive frequencies, got {w}"
                )));
            }
            Ok(eval_all(spec, grid, system_frequency))
        }
        _ => Ok(eval_all(spec, grid, system_frequency)),
    }
}

fn eval_all(spec: &SpectrumSpec, grid: &BathGrid, system_frequency: f64) -> Vec<f64> {
    grid.frequencies()
        .iter()
        .map(|&w| spec.evaluate(w, system_frequency).expect("closed-form spectrum"))
        .collect()
}

/// Sign of the system-bath interaction term; parity kicks flip it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionSign {
    Plus,
    Minus,
}

impl InteractionSign {
    pub fn value(self) -> f64 {
        match self {
            Self::Plus => 1.0,
            Self::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Self::Plus => Self::Minus,
            Self::Minus => Self::Plus,
        }
    }
}

/// Quadratic Hamiltonian `H/ħ = δ₀ a†a − (iε/2)(a†² − a²) + Σ Δ_j b_j†b_j
/// ± Σ γ_j (a† b_j + b_j† a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub system_detuning_rad_per_s: f64,
    pub squeezing_rate_per_s: f64,
    pub bath_detunings_rad_per_s: Vec<f64>,
    pub couplings_per_s: Vec<f64>,
    pub interaction_sign: InteractionSign,
}

impl HamiltonianSpec {
    /// Rotating-frame Hamiltonian for a bath grid around the system frequency.
    pub fn rotating_frame(squeezing_rate: f64, grid: &BathGrid, couplings: Vec<f64>, system_frequency: f64) -> Self {
        Self {
            system_detuning_rad_per_s: 0.0,
            squeezing_rate_per_s: squeezing_rate,
            bath_detunings_rad_per_s: grid.detunings(system_frequency),
            couplings_per_s: couplings,
            interaction_sign: InteractionSign::Plus,
        }
    }

    pub fn with_sign(&self, sign: InteractionSign) -> Self {
        Self {
            interaction_sign: sign,
            ..self.clone()
        }
    }

    pub fn n_bath(&self) -> usize {
        self.bath_detunings_rad_per_s.len()
    }

    pub fn layout(&self) -> ModeLayout {
        ModeLayout::new(self.n_bath())
    }

    pub fn is_excitation_conserving(&self) -> bool {
        self.squeezing_rate_per_s == 0.0
    }
}

/// Symmetric `2M x 2M` matrix of the exponent `(1/2) Λᵀ R Λ`, laid out as
/// `[[E, P], [Pᵀ, C]]`: E pairs creation operators, C annihilation
/// operators, P the mixed terms.
#[derive(Debug, Clone, PartialEq)]
pub struct RMatrix {
    layout: ModeLayout,
    data: ComplexMatrix,
}

/// Largest deviations from the structural identities of a physical `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RResiduals {
    pub symmetry: f64,
    pub p_anti_hermitian: f64,
    pub c_minus_conj_e: f64,
}

impl RResiduals {
    pub fn max(&self) -> f64 {
        self.symmetry.max(self.p_anti_hermitian).max(self.c_minus_conj_e)
    }
}

impl RMatrix {
    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    pub fn data(&self) -> &ComplexMatrix {
        &self.data
    }

    pub fn into_data(self) -> ComplexMatrix {
        self.data
    }

    fn block(&self, row: usize, col: usize) -> ComplexMatrix {
        let m = self.layout.modes();
        ComplexMatrix::from_fn(m, m, |i, j| self.data[(row * m + i, col * m + j)])
    }

    pub fn e_block(&self) -> ComplexMatrix {
        self.block(0, 0)
    }

    pub fn p_block(&self) -> ComplexMatrix {
        self.block(0, 1)
    }

    pub fn c_block(&self) -> ComplexMatrix {
        self.block(1, 1)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            layout: self.layout,
            data: self.data.scale_real(s),
        }
    }

    pub fn residuals(&self) -> RResiduals {
        let p = self.p_block();
        let e = self.e_block();
        let c = self.c_block();
        RResiduals {
            symmetry: self.data.max_abs_diff(&self.data.transpose()),
            p_anti_hermitian: p.adjoint().max_abs_diff(&p.scale_real(-1.0)),
            c_minus_conj_e: c.max_abs_diff(&e.conj().scale_real(-1.0)),
        }
    }
}

/// `R` such that `(1/2) Λᵀ R Λ = i H t / ħ`.
pub fn assemble_r(h: &HamiltonianSpec, layout: ModeLayout, t: f64) -> Result<RMatrix> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    let n = layout.n_bath();
    if h.bath_detunings_rad_per_s.len() != n || h.couplings_per_s.len() != n {
        return Err(Error::Dimension(format!(
            "layout has {n} bath modes, hamiltonian has {} detunings and {} couplings",
            h.bath_detunings_rad_per_s.len(),
            h.couplings_per_s.len()
        )));
    }
    let rates = std::iter::once(h.system_detuning_rad_per_s)
        .chain(std::iter::once(h.squeezing_rate_per_s))
        .chain(h.bath_detunings_rad_per_s.iter().copied())
        .chain(h.couplings_per_s.iter().copied());
    if let Some(bad) = rates.into_iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite rate {bad}")));
    }

    let i_t = Complex64::new(0.0, t);
    let mut data = ComplexMatrix::zeros(layout.dim(), layout.dim());
    let mut set_p = |mode_a: usize, mode_b: usize, v: Complex64| {
        // P block and its transpose
        data[(layout.creation(mode_a), layout.annihilation(mode_b))] = v;
        data[(layout.annihilation(mode_b), layout.creation(mode_a))] = v;
    };

    let sys = ModeLayout::SYSTEM;
    set_p(sys, sys, i_t * h.system_detuning_rad_per_s);
    for j in 0..n {
        let mode = j + 1;
        set_p(mode, mode, i_t * h.bath_detunings_rad_per_s[j]);
        let g = i_t * (h.interaction_sign.value() * h.couplings_per_s[j]);
        set_p(sys, mode, g);
        set_p(mode, sys, g);
    }

    let squeeze = Complex64::new(h.squeezing_rate_per_s * t, 0.0);
    data[(layout.creation(sys), layout.creation(sys))] = squeeze;
    data[(layout.annihilation(sys), layout.annihilation(sys))] = -squeeze.conj();

    Ok(RMatrix { layout, data })
}

/// `S = [[0, I], [−I, 0]]`.
pub fn symplectic_form(layout: ModeLayout) -> ComplexMatrix {
    let m = layout.modes();
    let mut s = ComplexMatrix::zeros(layout.dim(), layout.dim());
    for k in 0..m {
        s[(k, m + k)] = Complex64::new(1.0, 0.0);
        s[(m + k, k)] = Complex64::new(-1.0, 0.0);
    }
    s
}
