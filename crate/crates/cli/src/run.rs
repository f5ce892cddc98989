//! Runs a scenario end to end and collects its time series.

use eqo_core::model::{InteractionSign, ModeLayout};
use eqo_core::observables::ModeExpansion;
use eqo_core::propagator::{column_orbit, evolve, DRIFT_LIMIT};
use eqo_core::reference::{lindblad_evolve, lorentzian_exact_survival, FockState};
use eqo_core::{Error, TimeSeries, TransferMatrix};
use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;
use crate::scenario::{Observable, Prepared, Scenario};

/// A series plus the rate that turns its times into dimensionless time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledSeries {
    pub series: TimeSeries,
    pub time_scale_per_s: f64,
}

impl LabeledSeries {
    pub fn label(&self) -> &str {
        self.series.label()
    }
}

/// Worst invariant residuals seen during a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `|[a(t), a(t)†] − 1|` over every sample, relative to coefficient weight.
    pub max_commutator_residual: f64,
    /// `‖T S Tᵀ − S‖` over every propagator matrix built.
    pub max_symplectic_residual: f64,
    pub max_conjugation_residual: f64,
    pub n_samples: usize,
}

impl Diagnostics {
    fn absorb_matrix(&mut self, t: &TransferMatrix) {
        self.max_symplectic_residual = self.max_symplectic_residual.max(t.symplectic_residual());
        self.max_conjugation_residual = self.max_conjugation_residual.max(t.conjugation_residual());
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutput {
    pub scenario: Scenario,
    pub series: Vec<LabeledSeries>,
    pub diagnostics: Diagnostics,
}

impl RunOutput {
    pub fn get(&self, label: &str) -> Option<&TimeSeries> {
        self.series.iter().find(|s| s.label() == label).map(|s| &s.series)
    }
}

struct Runner<'a> {
    scenario: &'a Scenario,
    prepared: Prepared,
    layout: ModeLayout,
    diagnostics: Diagnostics,
}

pub fn run_scenario(scenario: &Scenario) -> Result<RunOutput, ScenarioError> {
    let prepared = scenario.prepare()?;
    let layout = prepared.hamiltonian.layout();
    let mut runner = Runner {
        scenario,
        prepared,
        layout,
        diagnostics: Diagnostics::default(),
    };
    let series = match scenario.observable {
        Observable::Variance => runner.variance()?,
        Observable::Survival => runner.survival()?,
    };
    Ok(RunOutput {
        scenario: scenario.clone(),
        series,
        diagnostics: runner.diagnostics,
    })
}

impl Runner<'_> {
    fn engine(&self, source: Error) -> ScenarioError {
        ScenarioError::Engine {
            scenario: self.scenario.name.clone(),
            source,
        }
    }

    fn checked(&mut self, t: TransferMatrix, what: &str) -> Result<TransferMatrix, ScenarioError> {
        self.diagnostics.absorb_matrix(&t);
        t.ensure_symplectic(what).map_err(|e| self.engine(e))?;
        Ok(t)
    }

    fn evolve(&mut self, sign: InteractionSign, t: f64, what: &str) -> Result<TransferMatrix, ScenarioError> {
        let h = self.prepared.hamiltonian.with_sign(sign);
        let m = evolve(&h, self.layout, t).map_err(|e| self.engine(e))?;
        self.checked(m, what)
    }

    /// Expansions of `a(t)` at `k·Δt` for `k = 1..=n` (and k = 0 if asked).
    fn orbit(
        &mut self,
        step: &TransferMatrix,
        n: usize,
        include_zero: bool,
    ) -> Result<Vec<ModeExpansion>, ScenarioError> {
        let start = TransferMatrix::identity(self.layout).system_annihilation_column();
        let mut columns = Vec::with_capacity(n);
        let propagated = if include_zero {
            columns.push(start.clone());
            n.saturating_sub(1)
        } else {
            n
        };
        columns.extend(column_orbit(step, start, propagated).map_err(|e| self.engine(e))?);

        let mut out = Vec::with_capacity(columns.len());
        for (k, col) in columns.iter().enumerate() {
            let e = ModeExpansion::from_column(self.layout, col).map_err(|e| self.engine(e))?;
            let residual = e.commutator_residual();
            self.diagnostics.max_commutator_residual = self.diagnostics.max_commutator_residual.max(residual);
            if residual > DRIFT_LIMIT {
                return Err(self.engine(Error::NumericDrift {
                    what: format!("commutator of a(t) at sample {k}"),
                    residual,
                    limit: DRIFT_LIMIT,
                }));
            }
            out.push(e);
        }
        self.diagnostics.n_samples += out.len();
        Ok(out)
    }

    fn series(
        &self,
        label: &str,
        times: Vec<f64>,
        values: Vec<f64>,
        scale: f64,
    ) -> Result<LabeledSeries, ScenarioError> {
        Ok(LabeledSeries {
            series: TimeSeries::new(label, times, values).map_err(|e| self.engine(e))?,
            time_scale_per_s: scale,
        })
    }

    fn variances(&self, expansions: &[ModeExpansion]) -> Result<Vec<f64>, ScenarioError> {
        expansions
            .iter()
            .map(|e| e.x_variance(&self.prepared.moments).map_err(|err| self.engine(err)))
            .collect()
    }

    fn variance(&mut self) -> Result<Vec<LabeledSeries>, ScenarioError> {
        let grid = self.scenario.time_grid.clone();
        let eps = self.scenario.squeezing_rate_per_s;
        let mut out = Vec::new();

        let step = self.evolve(InteractionSign::Plus, grid.step(), "unkicked step")?;
        let free = self.orbit(&step, grid.n_samples, grid.include_zero)?;
        out.push(self.series("unkicked", grid.times(), self.variances(&free)?, eps)?);

        if let Some(kicks) = self.prepared.kicks {
            let tau0 = kicks.period_s;
            let plus = self.evolve(InteractionSign::Plus, tau0, "+H_int period")?;
            let minus = self.evolve(InteractionSign::Minus, tau0, "-H_int period")?;
            let cycle = self.checked(plus.then(&minus), "kick cycle")?;
            let plain = self.checked(plus.then(&plus), "unkicked cycle")?;
            let n = kicks.n_cycles as usize;

            let kicked = self.orbit(&cycle, n, false)?;
            out.push(self.series("kicked", kicks.boundaries(), self.variances(&kicked)?, eps)?);
            let reference = self.orbit(&plain, n, false)?;
            out.push(self.series(
                "unkicked_at_kicks",
                kicks.boundaries(),
                self.variances(&reference)?,
                eps,
            )?);
        }
        Ok(out)
    }

    fn survival(&mut self) -> Result<Vec<LabeledSeries>, ScenarioError> {
        let grid = self.scenario.time_grid.clone();
        let times = grid.times();
        let lambda = self.scenario.markov_rate(&self.prepared)?;
        let mut out = Vec::new();

        let step = self.evolve(InteractionSign::Plus, grid.step(), "survival step")?;
        let expansions = self.orbit(&step, grid.n_samples, grid.include_zero)?;
        let eqo = expansions
            .iter()
            .map(|e| e.survival().map_err(|err| self.engine(err)))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(self.series("eqo", times.clone(), eqo, lambda)?);

        if let Some(params) = self.scenario.lorentzian_exact(&self.prepared) {
            params.validate().map_err(|e| self.engine(e))?;
            let exact = times.iter().map(|&t| lorentzian_exact_survival(&params, t)).collect();
            out.push(self.series("exact", times.clone(), exact, lambda)?);
        }

        let rho0 = FockState::number_state(1, self.scenario.reference.fock_cutoff).map_err(|e| self.engine(e))?;
        let markov = lindblad_evolve(lambda, &rho0, &times).map_err(|e| self.engine(e))?;
        out.push(self.series("markov", times, markov.values().to_vec(), lambda)?);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{KickConfig, TimeGrid};

    fn small_variance() -> Scenario {
        Scenario::from_json(
            r#"{
            "name": "small",
            "system_frequency_rad_per_s": 10.0,
            "squeezing_rate_per_s": 0.5,
            "spectrum": { "kind": "lorentzian", "width_gamma_per_s": 2.0, "strength_eta_per_s": 0.4 },
            "bath_grid": { "first_rad_per_s": 5.0, "spacing_rad_per_s": 0.5, "n_modes": 20 },
            "observable": "variance",
            "time_grid": { "t_max_s": 4.0, "n_samples": 40 },
            "kicks": { "period_s": 0.1 }
        }"#,
        )
        .unwrap()
    }

    #[test]
    fn variance_series_shapes() {
        let out = run_scenario(&small_variance()).unwrap();
        assert_eq!(out.get("unkicked").unwrap().len(), 40);
        assert_eq!(out.get("kicked").unwrap().len(), 20);
        assert_eq!(
            out.get("unkicked_at_kicks").unwrap().times(),
            out.get("kicked").unwrap().times()
        );
        assert!(out.diagnostics.max_commutator_residual < 1e-12);
        // grid point 2 (t = 0.2) coincides with the end of the first cycle
        let free = out.get("unkicked").unwrap().values()[1];
        let strobe = out.get("unkicked_at_kicks").unwrap().values()[0];
        assert!((free - strobe).abs() < 1e-12);
    }

    #[test]
    fn uncoupled_variance_is_ideal() {
        let mut s = small_variance();
        s.spectrum = eqo_core::SpectrumSpec::Explicit {
            couplings: vec![0.0; 20],
        };
        s.reference.markov_coupling_per_s = Some(0.0);
        let out = run_scenario(&s).unwrap();
        for series in &out.series {
            for (t, v) in series.series.iter() {
                assert!((v - (-2.0 * 0.5 * t).exp()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unkicked_only() {
        let mut s = small_variance();
        s.kicks = Some(KickConfig {
            period_s: 0.1,
            n_cycles: None,
            enabled: false,
        });
        let out = run_scenario(&s).unwrap();
        assert_eq!(out.series.len(), 1);
    }

    #[test]
    fn survival_emits_reference_series() {
        let mut s = small_variance();
        s.squeezing_rate_per_s = 0.0;
        s.observable = Observable::Survival;
        s.kicks = None;
        s.time_grid = TimeGrid {
            t_max_s: 2.0,
            n_samples: 11,
            include_zero: true,
        };
        let out = run_scenario(&s).unwrap();
        let labels: Vec<_> = out.series.iter().map(|s| s.label().to_string()).collect();
        assert_eq!(labels, ["eqo", "exact", "markov"]);
        for series in &out.series {
            assert_eq!(series.series.values()[0], 1.0);
            assert!(series.series.values().iter().all(|p| (0.0..=1.0 + 1e-12).contains(p)));
        }
    }

    #[test]
    fn deterministic() {
        let a = run_scenario(&small_variance()).unwrap();
        let b = run_scenario(&small_variance()).unwrap();
        assert_eq!(a, b);
    }
}
