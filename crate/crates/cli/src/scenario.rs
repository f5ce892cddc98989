//! Scenario description: one JSON file per experiment.

use std::path::{Path, PathBuf};

use eqo_core::model::{BathGrid, BathGridConfig};
use eqo_core::observables::InitialMoments;
use eqo_core::propagator::KickSchedule;
use eqo_core::reference::{LorentzianExactParams, DEFAULT_FOCK_CUTOFF};
use eqo_core::{coupling_from_spectrum, HamiltonianSpec, SpectrumSpec};
use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// `⟨(Δ(a + a†))²⟩` from the ground state.
    Variance,
    /// Population of |1⟩ from |1⟩ ⊗ vacuum; requires zero squeezing.
    Survival,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_max_s: f64,
    pub n_samples: usize,
    /// Sample `t = 0` as well; otherwise the grid is `t_max·k/n`, `k = 1..=n`.
    #[serde(default)]
    pub include_zero: bool,
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        let n = self.n_samples;
        if self.include_zero {
            if n == 1 {
                return vec![0.0];
            }
            (0..n).map(|k| self.t_max_s * k as f64 / (n - 1) as f64).collect()
        } else {
            (1..=n).map(|k| self.t_max_s * k as f64 / n as f64).collect()
        }
    }

    /// Spacing between consecutive samples.
    pub fn step(&self) -> f64 {
        if self.include_zero {
            self.t_max_s / (self.n_samples.max(2) - 1) as f64
        } else {
            self.t_max_s / self.n_samples as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KickConfig {
    pub period_s: f64,
    /// Defaults to as many whole cycles as fit in the time grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_cycles: Option<u64>,
    #[serde(default = "enabled_default")]
    pub enabled: bool,
}

fn enabled_default() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    /// Coupling used for the Markovian rate; defaults to the spectrum at the system frequency.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub markov_coupling_per_s: Option<f64>,
    /// Parameters of the exact Lorentzian amplitude; inferred from a
    /// Lorentzian spectrum and the grid density when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lorentzian_exact: Option<LorentzianExactParams>,
    #[serde(default = "fock_cutoff_default")]
    pub fock_cutoff: usize,
}

fn fock_cutoff_default() -> usize {
    DEFAULT_FOCK_CUTOFF
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        Self {
            markov_coupling_per_s: None,
            lorentzian_exact: None,
            fock_cutoff: DEFAULT_FOCK_CUTOFF,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub system_frequency_rad_per_s: f64,
    #[serde(default)]
    pub squeezing_rate_per_s: f64,
    pub spectrum: SpectrumSpec,
    pub bath_grid: BathGridConfig,
    pub observable: Observable,
    pub time_grid: TimeGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kicks: Option<KickConfig>,
    /// Initial thermal occupations; zero is the ground state.
    #[serde(default)]
    pub system_occupation: f64,
    #[serde(default)]
    pub bath_occupation: f64,
    #[serde(default)]
    pub reference: ReferenceConfig,
    #[serde(default, skip_serializing_if = "is_default_output")]
    pub output: OutputPaths,
}

fn is_default_output(o: &OutputPaths) -> bool {
    o.csv.is_none() && o.json.is_none()
}

/// Everything the engine needs, built and validated from a [`Scenario`].
#[derive(Debug, Clone)]
pub struct Prepared {
    pub grid: BathGrid,
    pub hamiltonian: HamiltonianSpec,
    pub moments: InitialMoments,
    pub kicks: Option<KickSchedule>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|err| {
            let path = err.path().to_string();
            let inner = err.into_inner();
            ScenarioError::Parse {
                line: inner.line(),
                column: inner.column(),
                field: path,
                message: inner.to_string(),
            }
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    fn invalid(&self, msg: impl Into<String>) -> ScenarioError {
        ScenarioError::Invalid {
            scenario: self.name.clone(),
            message: msg.into(),
        }
    }

    /// Dimensionless-time rate: ε for variance runs, λ for survival runs.
    pub fn time_scale(&self, prepared: &Prepared) -> Result<f64, ScenarioError> {
        match self.observable {
            Observable::Variance => Ok(self.squeezing_rate_per_s),
            Observable::Survival => self.markov_rate(prepared),
        }
    }

    pub fn markov_rate(&self, prepared: &Prepared) -> Result<f64, ScenarioError> {
        let g = match self.reference.markov_coupling_per_s {
            Some(g) => g,
            None => self
                .spectrum
                .evaluate(self.system_frequency_rad_per_s, self.system_frequency_rad_per_s)
                .ok_or_else(|| self.invalid("explicit spectrum needs reference.markov_coupling_per_s"))?,
        };
        Ok(eqo_core::reference::markov_decay_rate(prepared.grid.density(), g))
    }

    /// Exact Lorentzian parameters, explicit or inferred (Γ, η from the
    /// spectrum, D from the grid spacing).
    pub fn lorentzian_exact(&self, prepared: &Prepared) -> Option<LorentzianExactParams> {
        if let Some(p) = self.reference.lorentzian_exact {
            return Some(p);
        }
        match self.spectrum {
            SpectrumSpec::Lorentzian { width, strength, .. } => Some(LorentzianExactParams {
                width_gamma_per_s: width,
                strength_eta_per_s: strength,
                mode_density_s: prepared.grid.density(),
                system_frequency_rad_per_s: self.system_frequency_rad_per_s,
            }),
            _ => None,
        }
    }

    pub fn prepare(&self) -> Result<Prepared, ScenarioError> {
        let engine = |source| ScenarioError::Engine {
            scenario: self.name.clone(),
            source,
        };
        if self.name.is_empty() {
            return Err(self.invalid("name must not be empty"));
        }
        let tg = &self.time_grid;
        if !(tg.t_max_s > 0.0 && tg.t_max_s.is_finite()) {
            return Err(self.invalid(format!("time_grid.t_max_s must be positive, got {}", tg.t_max_s)));
        }
        if tg.n_samples == 0 {
            return Err(self.invalid("time_grid.n_samples must be >= 1"));
        }
        if !self.system_frequency_rad_per_s.is_finite() || !self.squeezing_rate_per_s.is_finite() {
            return Err(self.invalid("frequencies must be finite"));
        }
        if self.squeezing_rate_per_s < 0.0 {
            return Err(self.invalid("squeezing_rate_per_s must be >= 0"));
        }
        if self.observable == Observable::Survival && self.squeezing_rate_per_s != 0.0 {
            return Err(self.invalid("survival needs squeezing_rate_per_s = 0"));
        }
        if self.observable == Observable::Variance && self.squeezing_rate_per_s == 0.0 {
            return Err(self.invalid("variance runs are scaled by ε and need squeezing_rate_per_s > 0"));
        }
        if self.observable == Observable::Survival && self.reference.fock_cutoff < 1 {
            return Err(self.invalid("reference.fock_cutoff must be >= 1"));
        }

        let grid = self.bath_grid.build().map_err(engine)?;
        let couplings =
            coupling_from_spectrum(&self.spectrum, &grid, self.system_frequency_rad_per_s).map_err(engine)?;
        let hamiltonian = HamiltonianSpec::rotating_frame(
            self.squeezing_rate_per_s,
            &grid,
            couplings,
            self.system_frequency_rad_per_s,
        );

        let occupations: Vec<f64> = std::iter::once(self.system_occupation)
            .chain(std::iter::repeat_n(self.bath_occupation, grid.len()))
            .collect();
        let moments = InitialMoments::new(occupations).map_err(engine)?;

        let kicks = match &self.kicks {
            Some(k) if k.enabled => Some(self.kick_schedule(k)?),
            _ => None,
        };
        if kicks.is_some() && self.observable == Observable::Survival {
            return Err(self.invalid("kicked survival runs are not supported; kicks apply to variance runs"));
        }

        Ok(Prepared {
            grid,
            hamiltonian,
            moments,
            kicks,
        })
    }

    fn kick_schedule(&self, k: &KickConfig) -> Result<KickSchedule, ScenarioError> {
        if !(k.period_s > 0.0 && k.period_s.is_finite()) {
            return Err(self.invalid(format!("kicks.period_s must be positive, got {}", k.period_s)));
        }
        let cycle = 2.0 * k.period_s;
        let t_max = self.time_grid.t_max_s;
        let fitting = (t_max / cycle * (1.0 + 1e-12)).floor() as u64;
        let n_cycles = match k.n_cycles {
            Some(n) if n as f64 * cycle > t_max * (1.0 + 1e-9) => {
                return Err(self.invalid(format!(
                    "{n} kick cycles of {cycle:e} s overrun time_grid.t_max_s = {t_max:e}"
                )))
            }
            Some(n) => n,
            None => fitting,
        };
        if n_cycles == 0 {
            return Err(self.invalid(format!(
                "no complete kick cycle ({cycle:e} s) fits in time_grid.t_max_s = {t_max:e}"
            )));
        }
        KickSchedule::new(k.period_s, n_cycles, true).map_err(|source| ScenarioError::Engine {
            scenario: self.name.clone(),
            source,
        })
    }
}
