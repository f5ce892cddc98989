//! Built-in scenarios: squeezing with and without parity kicks (`fig1a`,
//! `fig1b`) and single-excitation decay (`fig2a`, `fig2b`).
//!
//! Time windows: variance runs cover εt ∈ (0, 2] when at least one
//! kick cycle fits, otherwise two full cycles; survival runs start at t = 0.

use eqo_core::model::BathGridConfig;
use eqo_core::SpectrumSpec;

use crate::scenario::{KickConfig, Observable, OutputPaths, ReferenceConfig, Scenario, TimeGrid};

pub const PRESET_NAMES: [&str; 4] = ["fig1a", "fig1b", "fig2a", "fig2b"];

const SYSTEM_FREQUENCY: f64 = 1e9;

/// ω_j = j × 10⁷, j = 1..200.
fn coarse_grid() -> BathGridConfig {
    BathGridConfig {
        first_rad_per_s: 1e7,
        spacing_rad_per_s: 1e7,
        n_modes: 200,
    }
}

fn variance_preset(name: &str, description: &str, eps: f64, spectrum: SpectrumSpec, tau0: f64, t_max: f64) -> Scenario {
    Scenario {
        name: name.into(),
        description: description.into(),
        system_frequency_rad_per_s: SYSTEM_FREQUENCY,
        squeezing_rate_per_s: eps,
        spectrum,
        bath_grid: coarse_grid(),
        observable: Observable::Variance,
        time_grid: TimeGrid {
            t_max_s: t_max,
            n_samples: 200,
            include_zero: false,
        },
        kicks: Some(KickConfig {
            period_s: tau0,
            n_cycles: None,
            enabled: true,
        }),
        system_occupation: 0.0,
        bath_occupation: 0.0,
        reference: ReferenceConfig::default(),
        output: OutputPaths::default(),
    }
}

fn survival_preset(
    name: &str,
    description: &str,
    spectrum: SpectrumSpec,
    grid: BathGridConfig,
    t_max: f64,
) -> Scenario {
    Scenario {
        name: name.into(),
        description: description.into(),
        system_frequency_rad_per_s: SYSTEM_FREQUENCY,
        squeezing_rate_per_s: 0.0,
        spectrum,
        bath_grid: grid,
        observable: Observable::Survival,
        time_grid: TimeGrid {
            t_max_s: t_max,
            n_samples: 201,
            include_zero: true,
        },
        kicks: None,
        system_occupation: 0.0,
        bath_occupation: 0.0,
        reference: ReferenceConfig::default(),
        output: OutputPaths::default(),
    }
}

pub fn fig1a() -> Scenario {
    variance_preset(
        "fig1a",
        "Squeezing with a Lorentzian bath, parity kicks on and off",
        1e8,
        SpectrumSpec::Lorentzian {
            width: 2e9,
            strength: 5e7,
            center: None,
        },
        1.67e-9,
        2.0 / 1e8,
    )
}

/// The first cycle boundary lands at εt = 3.5, so the window spans two cycles.
pub fn fig1b() -> Scenario {
    variance_preset(
        "fig1b",
        "Squeezing with an Ohmic bath, parity kicks on and off",
        7e8,
        SpectrumSpec::Ohmic { xi: 1e6, cutoff: 1e9 },
        2.5e-9,
        2.0 * 2.0 * 2.5e-9,
    )
}

/// γ_j = 2.8209×10¹² / √((ω_j − ω)² + 10¹²) on ω_j = (50 + j/2) × 10⁷.
pub fn fig2a() -> Scenario {
    survival_preset(
        "fig2a",
        "Decay of |1> into a narrow Lorentzian bath: transfer matrices vs exact amplitude vs master equation",
        SpectrumSpec::Lorentzian {
            width: 1e6,
            strength: 2.8209e6,
            center: None,
        },
        BathGridConfig {
            first_rad_per_s: 50.5e7,
            spacing_rad_per_s: 0.5e7,
            n_modes: 200,
        },
        1e-6,
    )
}

pub fn fig2b() -> Scenario {
    survival_preset(
        "fig2b",
        "Decay of |1> into a flat bath: transfer matrices vs master equation",
        SpectrumSpec::Flat { coupling: 5.6419e6 },
        coarse_grid(),
        2e-7,
    )
}

pub fn preset(name: &str) -> Option<Scenario> {
    match name {
        "fig1a" => Some(fig1a()),
        "fig1b" => Some(fig1b()),
        "fig2a" => Some(fig2a()),
        "fig2b" => Some(fig2b()),
        _ => None,
    }
}
