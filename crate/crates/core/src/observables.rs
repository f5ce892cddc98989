//! System-mode observables read off a transfer matrix.
//!
//! Writing the evolved system operator as `a(t) = Σ_k (A_k a_k + B_k a_k†)`,
//! a zero-mean Gaussian product state with occupations n̄_k gives
//! `⟨X²⟩ = Σ_k |A_k + B_k*|² (2n̄_k + 1)` for `X = a + a†`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModeLayout;
use crate::propagator::TransferMatrix;

/// Off-diagonal block magnitude above which a map is treated as squeezing.
pub const EXCITATION_CONSERVING_TOL: f64 = 1e-10;

/// Mean occupations of a zero-mean Gaussian product state, one per mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialMoments {
    occupations: Vec<f64>,
}

impl InitialMoments {
    pub fn new(occupations: Vec<f64>) -> Result<Self> {
        if let Some(n) = occupations.iter().find(|n| !(**n >= 0.0 && n.is_finite())) {
            return Err(Error::InvalidParameter(format!("occupation must be >= 0, got {n}")));
        }
        Ok(Self { occupations })
    }

    pub fn vacuum(layout: ModeLayout) -> Self {
        Self {
            occupations: vec![0.0; layout.modes()],
        }
    }

    /// Bose-Einstein occupations `1/(e^{ω/T} − 1)` with `temperature` in the
    /// same angular-frequency units as the mode frequencies.
    pub fn thermal(frequencies: &[f64], temperature: f64) -> Result<Self> {
        if temperature == 0.0 {
            return Self::new(vec![0.0; frequencies.len()]);
        }
        if !(temperature > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be >= 0, got {temperature}"
            )));
        }
        Self::new(frequencies.iter().map(|w| 1.0 / (w / temperature).exp_m1()).collect())
    }

    pub fn occupations(&self) -> &[f64] {
        &self.occupations
    }

    pub fn len(&self) -> usize {
        self.occupations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupations.is_empty()
    }
}

/// The expansion of `a(t)`: `annihilation[k] = A_k`, `creation[k] = B_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeExpansion {
    pub annihilation: Vec<Complex64>,
    pub creation: Vec<Complex64>,
}

impl ModeExpansion {
    /// Splits a transfer-matrix column (a† half first) into its two halves.
    pub fn from_column(layout: ModeLayout, column: &[Complex64]) -> Result<Self> {
        if column.len() != layout.dim() {
            return Err(Error::Dimension(format!(
                "column of length {} for layout of dimension {}",
                column.len(),
                layout.dim()
            )));
        }
        let m = layout.modes();
        Ok(Self {
            creation: column[..m].to_vec(),
            annihilation: column[m..].to_vec(),
        })
    }

    pub fn of_system(t: &TransferMatrix) -> Self {
        Self::from_column(t.layout(), &t.system_annihilation_column()).expect("column fits layout")
    }

    /// `[a(t), a(t)†]`, which stays 1 for a physical map.
    pub fn commutator(&self) -> f64 {
        norm_sqr_sum(&self.annihilation) - norm_sqr_sum(&self.creation)
    }

    /// `|[a, a†] − 1|` relative to the coefficient weight.
    pub fn commutator_residual(&self) -> f64 {
        let weight = norm_sqr_sum(&self.annihilation) + norm_sqr_sum(&self.creation);
        (self.commutator() - 1.0).abs() / weight.max(1.0)
    }

    pub fn max_creation_weight(&self) -> f64 {
        self.creation.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Variance of `X = a + a†`.
    pub fn x_variance(&self, moments: &InitialMoments) -> Result<f64> {
        self.weighted_variance(moments, |a, b| a + b.conj())
    }

    /// Variance of `Y = i(a† − a)`.
    pub fn p_variance(&self, moments: &InitialMoments) -> Result<f64> {
        self.weighted_variance(moments, |a, b| Complex64::i() * (b.conj() - a))
    }

    fn weighted_variance(
        &self,
        moments: &InitialMoments,
        coeff: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<f64> {
        if moments.len() != self.annihilation.len() {
            return Err(Error::Dimension(format!(
                "{} occupations for {} modes",
                moments.len(),
                self.annihilation.len()
            )));
        }
        Ok(self
            .annihilation
            .iter()
            .zip(&self.creation)
            .zip(moments.occupations())
            .map(|((&a, &b), &n)| coeff(a, b).norm_sqr() * (2.0 * n + 1.0))
            .sum())
    }

    /// `|u|²` with u the system a-coefficient.
    pub fn survival(&self) -> Result<f64> {
        let w = self.max_creation_weight();
        if w > EXCITATION_CONSERVING_TOL {
            return Err(Error::InvalidObservable(format!(
                "survival probability needs an excitation-conserving map; creation weight {w:e}"
            )));
        }
        Ok(self.annihilation[ModeLayout::SYSTEM].norm_sqr())
    }
}

fn norm_sqr_sum(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `⟨(Δ(a + a†))²⟩` after evolving by `t` from `moments`.
pub fn quadrature_variance(t: &TransferMatrix, moments: &InitialMoments) -> Result<f64> {
    ModeExpansion::of_system(t).x_variance(moments)
}

/// `⟨(Δ i(a† − a))²⟩`.
pub fn p_quadrature_variance(t: &TransferMatrix, moments: &InitialMoments) -> Result<f64> {
    ModeExpansion::of_system(t).p_variance(moments)
}

/// Population of |1⟩ on the system for the initial state |1⟩ ⊗ vacuum.
///
/// Only meaningful for excitation-conserving maps, whose a†/a mixing blocks
/// vanish; anything else is rejected.
pub fn survival_probability(t: &TransferMatrix) -> Result<f64> {
    let m = t.layout().modes();
    let d = t.data();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            worst = worst.max(d[(i, m + j)].norm()).max(d[(m + i, j)].norm());
        }
    }
    if worst > EXCITATION_CONSERVING_TOL {
        return Err(Error::InvalidObservable(format!(
            "survival probability needs an excitation-conserving map; off-diagonal block {worst:e}"
        )));
    }
    let ann = t.layout().annihilation(ModeLayout::SYSTEM);
    Ok(d[(ann, ann)].norm_sqr())
}

/// A sampled observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    label: String,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(label: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Dimension(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("times must be strictly increasing".into()));
        }
        if let Some(v) = values.iter().chain(&times).find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite sample {v}")));
        }
        Ok(Self {
            label: label.into(),
            times,
            values,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{coupling_from_spectrum, BathGrid, HamiltonianSpec, InteractionSign, SpectrumSpec};
    use crate::propagator::evolve;
    use proptest::prelude::*;

    fn spec(eps: f64, detunings: Vec<f64>, couplings: Vec<f64>) -> HamiltonianSpec {
        HamiltonianSpec {
            system_detuning_rad_per_s: 0.0,
            squeezing_rate_per_s: eps,
            bath_detunings_rad_per_s: detunings,
            couplings_per_s: couplings,
            interaction_sign: InteractionSign::Plus,
        }
    }

    #[test]
    fn identity_vacuum_variance_is_one() {
        let layout = ModeLayout::new(4);
        let id = TransferMatrix::identity(layout);
        let v = quadrature_variance(&id, &InitialMoments::vacuum(layout)).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(survival_probability(&id).unwrap(), 1.0);
    }

    #[test]
    fn ideal_squeezing_variance() {
        let h = spec(1e8, vec![], vec![]);
        let m = evolve(&h, h.layout(), 1e-8).unwrap();
        let v = quadrature_variance(&m, &InitialMoments::vacuum(h.layout())).unwrap();
        assert!((v - (-2.0f64).exp()).abs() < 1e-13, "{v}");
        let vp = p_quadrature_variance(&m, &InitialMoments::vacuum(h.layout())).unwrap();
        assert!((vp - 2f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn thermal_weights() {
        let h = spec(0.5, vec![], vec![]);
        let t = 0.7;
        let m = evolve(&h, h.layout(), t).unwrap();
        let moments = InitialMoments::new(vec![1.5]).unwrap();
        let v = quadrature_variance(&m, &moments).unwrap();
        assert!((v - 4.0 * (-2.0 * 0.5 * t).exp()).abs() < 1e-13);
    }

    #[test]
    fn survival_rejects_squeezing() {
        let h = spec(0.5, vec![1.0], vec![0.2]);
        let m = evolve(&h, h.layout(), 1.0).unwrap();
        assert!(matches!(survival_probability(&m), Err(Error::InvalidObservable(_))));
        assert!(ModeExpansion::of_system(&m).survival().is_err());
    }

    #[test]
    fn decoupled_system_survives() {
        let h = spec(0.0, vec![1.0, 2.0], vec![0.0, 0.0]);
        for &t in &[0.0, 0.3, 10.0] {
            let m = evolve(&h, h.layout(), t).unwrap();
            assert!((survival_probability(&m).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn flat_spectrum_decays_at_golden_rule_rate() {
        let grid = BathGrid::uniform(1e7, 1e7, 200).unwrap();
        let g = coupling_from_spectrum(&SpectrumSpec::Flat { coupling: 5.6419e6 }, &grid, 1e9).unwrap();
        let h = HamiltonianSpec::rotating_frame(0.0, &grid, g, 1e9);
        let m = evolve(&h, h.layout(), 5e-8).unwrap();
        let p = survival_probability(&m).unwrap();
        let lambda = 2.0 * std::f64::consts::PI * grid.density() * 5.6419e6f64.powi(2);
        assert!((lambda - 2.0e7).abs() < 1e4);
        assert!((p - (-lambda * 5e-8).exp()).abs() < 0.05, "{p}");
    }

    #[test]
    fn moments_validation() {
        assert!(InitialMoments::new(vec![0.0, -1.0]).is_err());
        let layout = ModeLayout::new(1);
        let id = TransferMatrix::identity(layout);
        let wrong = InitialMoments::new(vec![0.0]).unwrap();
        assert!(matches!(quadrature_variance(&id, &wrong), Err(Error::Dimension(_))));
        let th = InitialMoments::thermal(&[1.0, 2.0], 1.0).unwrap();
        assert!((th.occupations()[0] - 1.0 / (1f64.exp() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn time_series_validation() {
        assert!(TimeSeries::new("x", vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(TimeSeries::new("x", vec![1.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(TimeSeries::new("x", vec![0.0], vec![f64::NAN]).is_err());
        let ts = TimeSeries::new("x", vec![], vec![]).unwrap();
        assert!(ts.is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn number_conserving_invariants(
            det in prop::collection::vec(-3.0..3.0f64, 4),
            g in prop::collection::vec(0.0..1.5f64, 4),
            t in 0.0..5.0f64,
        ) {
            let h = spec(0.0, det, g);
            let layout = h.layout();
            let m = evolve(&h, layout, t).unwrap();
            let vac = InitialMoments::vacuum(layout);
            prop_assert!((quadrature_variance(&m, &vac).unwrap() - 1.0).abs() < 1e-10);
            let e = ModeExpansion::of_system(&m);
            let row_norm: f64 = e.annihilation.iter().map(|z| z.norm_sqr()).sum();
            prop_assert!((row_norm - 1.0).abs() < 1e-10);
            let p = survival_probability(&m).unwrap();
            prop_assert!((-1e-10..=1.0 + 1e-10).contains(&p));
        }

        #[test]
        fn uncertainty_floor(
            det in prop::collection::vec(-3.0..3.0f64, 3),
            g in prop::collection::vec(0.0..1.5f64, 3),
            eps in 0.0..1.0f64,
            t in 0.0..3.0f64,
        ) {
            let h = spec(eps, det, g);
            let layout = h.layout();
            let m = evolve(&h, layout, t).unwrap();
            let vac = InitialMoments::vacuum(layout);
            let vx = quadrature_variance(&m, &vac).unwrap();
            let vp = p_quadrature_variance(&m, &vac).unwrap();
            prop_assert!(vx > 0.0);
            prop_assert!(vx * vp >= 1.0 - 1e-10);
        }
    }
}
