//! Invariant suite run against a scenario's own Hamiltonian.

use eqo_core::model::InteractionSign;
use eqo_core::observables::{quadrature_variance, ModeExpansion};
use eqo_core::propagator::{evolve, kick_cycle, DRIFT_LIMIT};
use eqo_core::reference::{lindblad_evolve, FockState};
use eqo_core::{assemble_r, Error, HamiltonianSpec};

use crate::error::ScenarioError;
use crate::scenario::{Observable, Scenario};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub residual: f64,
    pub limit: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.residual <= self.limit
    }
}

impl std::fmt::Display for CheckResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed() { "ok  " } else { "FAIL" };
        write!(
            f,
            "{tag} {:<34} residual {:.3e} (limit {:.0e})",
            self.name, self.residual, self.limit
        )
    }
}

pub fn run_checks(scenario: &Scenario) -> Result<Vec<CheckResult>, ScenarioError> {
    let engine = |source: Error| ScenarioError::Engine {
        scenario: scenario.name.clone(),
        source,
    };
    let prepared = scenario.prepare()?;
    let h = &prepared.hamiltonian;
    let layout = h.layout();
    let t_max = scenario.time_grid.t_max_s;
    let mut out = Vec::new();
    let mut push = |name, residual, limit| out.push(CheckResult { name, residual, limit });

    let r = assemble_r(h, layout, t_max).map_err(engine)?;
    let scale = r.data().inf_norm().max(1.0);
    push("R symmetric and physical", r.residuals().max() / scale, 1e-14);

    let full = evolve(h, layout, t_max).map_err(engine)?;
    push("transfer symplectic (t_max)", full.symplectic_residual(), DRIFT_LIMIT);
    push("transfer conjugation (t_max)", full.conjugation_residual(), DRIFT_LIMIT);
    let a = ModeExpansion::of_system(&full);
    push("commutator [a, a†] (t_max)", a.commutator_residual(), DRIFT_LIMIT);

    let conserving = HamiltonianSpec {
        squeezing_rate_per_s: 0.0,
        ..h.clone()
    };
    let plain = evolve(&conserving, layout, t_max).map_err(engine)?;
    let vacuum = eqo_core::InitialMoments::vacuum(layout);
    let var = quadrature_variance(&plain, &vacuum).map_err(engine)?;
    push("ε = 0 vacuum variance", (var - 1.0).abs(), 1e-10);
    let weight: f64 = ModeExpansion::of_system(&plain)
        .annihilation
        .iter()
        .map(|c| c.norm_sqr())
        .sum();
    push("ε = 0 excitation unitarity", (weight - 1.0).abs(), 1e-10);

    if let Some(kicks) = prepared.kicks {
        let tau0 = kicks.period_s;
        let cycle = kick_cycle(h, layout, tau0).map_err(engine)?;
        push("kick cycle symplectic", cycle.symplectic_residual(), DRIFT_LIMIT);

        let decoupled = HamiltonianSpec {
            couplings_per_s: vec![0.0; h.n_bath()],
            ..h.with_sign(InteractionSign::Plus)
        };
        let kicked = kick_cycle(&decoupled, layout, tau0).map_err(engine)?;
        let free = evolve(&decoupled, layout, 2.0 * tau0).map_err(engine)?;
        push(
            "γ = 0 cycle equals free evolution",
            kicked.data().max_abs_diff(free.data()),
            1e-10,
        );
    }

    if scenario.observable == Observable::Survival {
        let lambda = scenario.markov_rate(&prepared)?;
        let rho0 = FockState::number_state(1, scenario.reference.fock_cutoff).map_err(engine)?;
        let times = scenario.time_grid.times();
        let markov = lindblad_evolve(lambda, &rho0, &times).map_err(engine)?;
        let dev = markov
            .iter()
            .map(|(t, p)| (p - (-lambda * t).exp()).abs())
            .fold(0.0, f64::max);
        push("Lindblad P(t) = e^{-λt}", dev, 1e-6);
    }
    Ok(out)
}
