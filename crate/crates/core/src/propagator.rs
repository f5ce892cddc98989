//! Transfer matrices `e^{-RS}` and parity-kick sequences.
//!
//! A transfer matrix `T` acts on the operator row vector: `Λᵀ(t) = Λᵀ T`, so
//! column c of `T` holds the expansion of the evolved operator `Λ_c(t)` in the
//! initial operators. Heisenberg composition runs left to right in time:
//! evolving with `T₁` and then `T₂` gives `T₁ T₂`.
//!
//! Kicks are instantaneous parities `P = e^{-iπa†a}` applied at the end of each
//! period τ₀. Since `P H P` flips only the interaction sign, one kick cycle
//! `P U P U` equals an evolution with `+H_int` for τ₀ followed by `−H_int` for τ₀.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matexp::{expm, mul_unchecked, one_norm, ComplexMatrix};
use crate::model::{assemble_r, symplectic_form, HamiltonianSpec, InteractionSign, ModeLayout, RMatrix};
use crate::DEFAULT_EXPM_TOL;

/// Relative commutator residual beyond which a run is aborted.
pub const DRIFT_LIMIT: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    layout: ModeLayout,
    data: ComplexMatrix,
}

impl TransferMatrix {
    pub fn new(layout: ModeLayout, data: ComplexMatrix) -> Result<Self> {
        if data.shape() != (layout.dim(), layout.dim()) {
            return Err(Error::Dimension(format!(
                "transfer matrix {:?} does not fit layout of dimension {}",
                data.shape(),
                layout.dim()
            )));
        }
        Ok(Self { layout, data })
    }

    pub fn identity(layout: ModeLayout) -> Self {
        Self {
            layout,
            data: ComplexMatrix::identity(layout.dim()),
        }
    }

    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    pub fn data(&self) -> &ComplexMatrix {
        &self.data
    }

    /// Evolution by `self` followed by `later`.
    pub fn then(&self, later: &TransferMatrix) -> TransferMatrix {
        debug_assert_eq!(self.layout, later.layout);
        Self {
            layout: self.layout,
            data: mul_unchecked(&self.data, &later.data),
        }
    }

    /// Coefficients of the evolved system annihilation operator `a(t)`.
    pub fn system_annihilation_column(&self) -> Vec<Complex64> {
        self.data.column(self.layout.annihilation(ModeLayout::SYSTEM))
    }

    /// `‖T S Tᵀ − S‖₁ / max(1, ‖T‖₁‖T‖_∞)`.
    pub fn symplectic_residual(&self) -> f64 {
        let s = symplectic_form(self.layout);
        let tst = mul_unchecked(&mul_unchecked(&self.data, &s), &self.data.transpose());
        let scale = (one_norm(&self.data) * self.data.inf_norm()).max(1.0);
        one_norm(&tst.sub(&s).expect("same shape")) / scale
    }

    /// Mismatch between the a†-half and the conjugate of the a-half:
    /// `T = [[A, B], [B', A']]` must have `A' = conj(A)` and `B' = conj(B)`.
    pub fn conjugation_residual(&self) -> f64 {
        let m = self.layout.modes();
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 1.0;
        for i in 0..m {
            for j in 0..m {
                let a = self.data[(i, j)];
                let b = self.data[(i, m + j)];
                let b_prime = self.data[(m + i, j)];
                let a_prime = self.data[(m + i, m + j)];
                worst = worst.max((a_prime - a.conj()).norm()).max((b_prime - b.conj()).norm());
                scale = scale.max(a.norm()).max(b.norm());
            }
        }
        worst / scale
    }

    /// Aborts with [`Error::NumericDrift`] when commutators are no longer preserved.
    pub fn ensure_symplectic(&self, what: &str) -> Result<()> {
        let residual = self.symplectic_residual();
        if residual > DRIFT_LIMIT {
            return Err(Error::NumericDrift {
                what: what.to_string(),
                residual,
                limit: DRIFT_LIMIT,
            });
        }
        Ok(())
    }
}

/// `X · S` without a dense product: `(XS)[:, M+k] = X[:, k]`, `(XS)[:, k] = −X[:, M+k]`.
fn right_mul_symplectic(x: &ComplexMatrix, layout: ModeLayout) -> ComplexMatrix {
    let m = layout.modes();
    ComplexMatrix::from_fn(
        x.rows(),
        x.cols(),
        |i, j| {
            if j < m {
                -x[(i, j + m)]
            } else {
                x[(i, j - m)]
            }
        },
    )
}

/// `e^{-t R₁ S}` for the per-unit-time generator `R₁`.
pub fn transfer(r1: &RMatrix, t: f64) -> Result<TransferMatrix> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    let layout = r1.layout();
    let generator = right_mul_symplectic(r1.data(), layout).scale_real(-t);
    Ok(TransferMatrix {
        layout,
        data: expm(&generator, DEFAULT_EXPM_TOL)?,
    })
}

/// Transfer matrix of `h` over a duration `t`.
pub fn evolve(h: &HamiltonianSpec, layout: ModeLayout, t: f64) -> Result<TransferMatrix> {
    transfer(&assemble_r(h, layout, 1.0)?, t)
}

/// Parity kick on the system mode: `a → −a`, `a† → −a†`.
pub fn parity_matrix(layout: ModeLayout) -> TransferMatrix {
    let mut diag = vec![Complex64::new(1.0, 0.0); layout.dim()];
    diag[layout.creation(ModeLayout::SYSTEM)] = Complex64::new(-1.0, 0.0);
    diag[layout.annihilation(ModeLayout::SYSTEM)] = Complex64::new(-1.0, 0.0);
    TransferMatrix {
        layout,
        data: ComplexMatrix::from_diagonal(&diag),
    }
}

/// Two periods of length τ₀ with the given interaction signs, first period first.
pub fn two_period_cycle(
    h: &HamiltonianSpec,
    layout: ModeLayout,
    tau0: f64,
    first: InteractionSign,
    second: InteractionSign,
) -> Result<TransferMatrix> {
    let t1 = evolve(&h.with_sign(first), layout, tau0)?;
    if first == second {
        return Ok(t1.then(&t1));
    }
    let t2 = evolve(&h.with_sign(second), layout, tau0)?;
    Ok(t1.then(&t2))
}

/// One full kick cycle of length 2τ₀: `+H_int` for τ₀, then `−H_int` for τ₀.
pub fn kick_cycle(h: &HamiltonianSpec, layout: ModeLayout, tau0: f64) -> Result<TransferMatrix> {
    if !(tau0 > 0.0 && tau0.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "kick period must be positive, got {tau0}"
        )));
    }
    let sign = h.interaction_sign;
    two_period_cycle(h, layout, tau0, sign, sign.flipped())
}

/// `mᵖ` by binary powering; `p = 0` gives the identity.
pub fn stroboscopic(m: &TransferMatrix, n: u64) -> TransferMatrix {
    let mut result: Option<ComplexMatrix> = None;
    let mut base = m.data.clone();
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => mul_unchecked(&r, &base),
            });
        }
        k >>= 1;
        if k > 0 {
            base = mul_unchecked(&base, &base);
        }
    }
    TransferMatrix {
        layout: m.layout,
        data: result.unwrap_or_else(|| ComplexMatrix::identity(m.layout.dim())),
    }
}

/// Equally spaced instantaneous parity kicks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickSchedule {
    /// Time between consecutive kicks.
    pub period_s: f64,
    /// Number of 2τ₀ cycles.
    pub n_cycles: u64,
    pub enabled: bool,
}

impl KickSchedule {
    pub fn new(period_s: f64, n_cycles: u64, enabled: bool) -> Result<Self> {
        let s = Self {
            period_s,
            n_cycles,
            enabled,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period_s > 0.0 && self.period_s.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kick period must be positive, got {}",
                self.period_s
            )));
        }
        if self.n_cycles == 0 {
            return Err(Error::InvalidParameter("kick schedule needs at least one cycle".into()));
        }
        Ok(())
    }

    pub fn cycle_duration(&self) -> f64 {
        2.0 * self.period_s
    }

    /// Cycle boundaries `2kτ₀`, `k = 1..=n_cycles`.
    pub fn boundaries(&self) -> Vec<f64> {
        (1..=self.n_cycles).map(|k| k as f64 * self.cycle_duration()).collect()
    }
}

/// Kicked evolution up to an arbitrary time: whole cycles, then the partial
/// cycle. A parity kick lands at every multiple of τ₀ up to and including `t`.
pub fn kicked_transfer_at(h: &HamiltonianSpec, layout: ModeLayout, tau0: f64, t: f64) -> Result<TransferMatrix> {
    let cycle = kick_cycle(h, layout, tau0)?;
    let whole = (t / (2.0 * tau0)).floor();
    let rest = t - whole * 2.0 * tau0;
    let mut out = stroboscopic(&cycle, whole as u64);
    let parity = parity_matrix(layout);
    if rest >= tau0 {
        out = out.then(&evolve(h, layout, tau0)?).then(&parity);
        out = out.then(&evolve(h, layout, rest - tau0)?);
    } else {
        out = out.then(&evolve(h, layout, rest)?);
    }
    Ok(out)
}

/// Repeatedly applies `step` to one column: entry k of the result is column
/// `c` of `stepᵏ`, given column `c` of the identity as `start`. Since
/// `stepᵏ⁺¹[:, c] = step · stepᵏ[:, c]`, each sample costs one matrix-vector
/// product.
pub fn column_orbit(step: &TransferMatrix, start: Vec<Complex64>, n: usize) -> Result<Vec<Vec<Complex64>>> {
    let mut out = Vec::with_capacity(n);
    let mut v = start;
    for _ in 0..n {
        v = step.data.mul_vec(&v)?;
        out.push(v.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BathGrid;
    use crate::model::{coupling_from_spectrum, SpectrumSpec};
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
    fn zero_time_is_identity() {
        let h = spec(0.7, vec![1.0, -2.0], vec![0.3, 0.1]);
        let t = evolve(&h, h.layout(), 0.0).unwrap();
        assert_eq!(t, TransferMatrix::identity(h.layout()));
    }

    #[test]
    fn free_bath_is_phase_diagonal() {
        let det = [0.0, 1.5, -4.0, 7.0];
        let mut h = spec(0.0, det[1..].to_vec(), vec![0.0; 3]);
        h.system_detuning_rad_per_s = det[0];
        let layout = h.layout();
        let t = 0.8;
        let m = evolve(&h, layout, t).unwrap();
        for (k, &d) in det.iter().enumerate() {
            let cre = layout.creation(k);
            let ann = layout.annihilation(k);
            assert!((m.data()[(cre, cre)] - Complex64::new(0.0, d * t).exp()).norm() < 1e-14);
            assert!((m.data()[(ann, ann)] - Complex64::new(0.0, -d * t).exp()).norm() < 1e-14);
        }
        let off: f64 = (0..layout.dim())
            .flat_map(|i| (0..layout.dim()).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| m.data()[(i, j)].norm())
            .fold(0.0, f64::max);
        assert!(off < 1e-15);
    }

    #[test]
    fn pure_squeezing_contracts_x() {
        // da/dt = −ε a†, da†/dt = −ε a  ⇒  a + a† → e^{−εt}(a + a†)
        let eps = 1e8;
        let h = spec(eps, vec![], vec![]);
        let layout = h.layout();
        for &t in &[1e-9, 1e-8, 2.5e-8] {
            let m = evolve(&h, layout, t).unwrap();
            let d = m.data();
            let col_sum = |row: usize| d[(row, 0)] + d[(row, 1)];
            let expected = (-eps * t).exp();
            assert!((col_sum(0) - expected).norm() < 1e-12 * expected.max(1.0));
            assert!((col_sum(1) - expected).norm() < 1e-12 * expected.max(1.0));
            // closed form: a(t) = cosh(εt) a − sinh(εt) a†
            assert!((d[(1, 1)] - (eps * t).cosh()).norm() < 1e-12 * (eps * t).cosh());
            assert!((d[(0, 1)] + (eps * t).sinh()).norm() < 1e-12 * (eps * t).cosh());
        }
    }

    #[test]
    fn parity_properties() {
        let layout = ModeLayout::new(3);
        let p = parity_matrix(layout);
        assert_eq!(p.then(&p), TransferMatrix::identity(layout));

        let h = spec(0.4, vec![1.0, 2.0, 3.0], vec![0.5, 0.6, 0.7]);
        let r = assemble_r(&h, layout, 1.0).unwrap();
        let conj = mul_unchecked(&mul_unchecked(p.data(), r.data()), p.data());
        let flipped = assemble_r(&h.with_sign(InteractionSign::Minus), layout, 1.0).unwrap();
        assert_eq!(&conj, flipped.data());

        let bath_only = spec(0.0, vec![1.0, 2.0, 3.0], vec![0.0; 3]);
        let rb = assemble_r(&bath_only, layout, 1.0).unwrap();
        let conj_b = mul_unchecked(&mul_unchecked(p.data(), rb.data()), p.data());
        assert_eq!(&conj_b, rb.data());
    }

    #[test]
    fn cycle_equals_explicit_parity_sandwich() {
        let h = spec(0.3, vec![0.5, -1.0], vec![0.8, 0.4]);
        let layout = h.layout();
        let tau = 0.37;
        let u = evolve(&h, layout, tau).unwrap();
        let p = parity_matrix(layout);
        // Q = U† P U† P  ⇒  T = T_U D T_U D
        let sandwich = u.then(&p).then(&u).then(&p);
        let cycle = kick_cycle(&h, layout, tau).unwrap();
        assert!(cycle.data().max_abs_diff(sandwich.data()) < 1e-13);
    }

    #[test]
    fn cycle_without_coupling_is_plain_evolution() {
        let h = spec(0.9, vec![0.5, -1.0, 2.0], vec![0.0; 3]);
        let layout = h.layout();
        let cycle = kick_cycle(&h, layout, 0.21).unwrap();
        let plain = evolve(&h, layout, 0.42).unwrap();
        assert!(cycle.data().max_abs_diff(plain.data()) < 1e-10);
    }

    #[test]
    fn same_sign_both_periods_is_plain_evolution() {
        let h = spec(0.9, vec![0.5, -1.0], vec![0.3, 0.6]);
        let layout = h.layout();
        let both_plus = two_period_cycle(&h, layout, 0.3, InteractionSign::Plus, InteractionSign::Plus).unwrap();
        let plain = evolve(&h, layout, 0.6).unwrap();
        assert!(both_plus.data().max_abs_diff(plain.data()) < 1e-12);
    }

    /// Brute-force single-particle check: for ε = 0 the a-coefficient of a(t)
    /// is `[e^{-iht}]₀₀` with h the 2x2 one-body matrix.
    fn single_mode_amplitude(gamma: f64, delta: f64, t: f64) -> Complex64 {
        let omega = (delta * delta / 4.0 + gamma * gamma).sqrt();
        let phase = Complex64::new(0.0, -delta * t / 2.0).exp();
        phase * ((omega * t).cos() + Complex64::new(0.0, delta / (2.0 * omega)) * (omega * t).sin())
    }

    #[test]
    fn kicks_protect_excitation_on_resonance() {
        let (gamma, tau) = (1.0, 0.05);
        let h = spec(0.0, vec![0.0], vec![gamma]);
        let layout = h.layout();
        let ann = layout.annihilation(0);
        let cycle = kick_cycle(&h, layout, tau).unwrap();
        let plain = evolve(&h, layout, 2.0 * tau).unwrap();
        let kicked_survival = cycle.data()[(ann, ann)].norm_sqr();
        let plain_survival = plain.data()[(ann, ann)].norm_sqr();
        let oracle = single_mode_amplitude(gamma, 0.0, 2.0 * tau).norm_sqr();
        assert!((plain_survival - oracle).abs() < 1e-13);
        assert!(
            kicked_survival > plain_survival,
            "{kicked_survival} vs {plain_survival}"
        );
        // the two half-periods cancel exactly on resonance
        assert!((kicked_survival - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detuned_single_mode_matches_oracle() {
        let (gamma, delta, t) = (0.7, 1.3, 2.2);
        let h = spec(0.0, vec![delta], vec![gamma]);
        let layout = h.layout();
        let m = evolve(&h, layout, t).unwrap();
        let ann = layout.annihilation(0);
        // Heisenberg a(t) carries e^{-iht}; its conjugate sits in the a† block
        let amp = single_mode_amplitude(gamma, delta, t);
        assert!((m.data()[(ann, ann)] - amp).norm() < 1e-13);
        assert!((m.data()[(0, 0)] - amp.conj()).norm() < 1e-13);
    }

    #[test]
    fn fig1a_cycle_preserves_commutators() {
        let grid = BathGrid::uniform(1e7, 1e7, 200).unwrap();
        let lorentz = SpectrumSpec::Lorentzian {
            width: 2e9,
            strength: 5e7,
            center: None,
        };
        let g = coupling_from_spectrum(&lorentz, &grid, 1e9).unwrap();
        let h = HamiltonianSpec::rotating_frame(1e8, &grid, g, 1e9);
        let cycle = kick_cycle(&h, h.layout(), 1.67e-9).unwrap();
        assert!(cycle.symplectic_residual() < 1e-10);
        assert!(cycle.conjugation_residual() < 1e-10);
    }

    #[test]
    fn stroboscopic_powers() {
        let h = spec(0.2, vec![0.5, -1.0], vec![0.3, 0.6]);
        let layout = h.layout();
        let cycle = kick_cycle(&h, layout, 0.1).unwrap();
        assert_eq!(stroboscopic(&cycle, 0), TransferMatrix::identity(layout));
        assert_eq!(stroboscopic(&cycle, 1), cycle);
        let mut naive = TransferMatrix::identity(layout);
        for _ in 0..8 {
            naive = naive.then(&cycle);
        }
        let fast = stroboscopic(&cycle, 8);
        let sq = cycle.then(&cycle);
        let sq = sq.then(&sq);
        let sq = sq.then(&sq);
        assert!(fast.data().max_abs_diff(naive.data()) < 1e-12);
        assert!(fast.data().max_abs_diff(sq.data()) < 1e-12);
    }

    #[test]
    fn long_stroboscopic_run_stays_symplectic() {
        let grid = BathGrid::uniform(1e7, 1e7, 200).unwrap();
        let lorentz = SpectrumSpec::Lorentzian {
            width: 2e9,
            strength: 5e7,
            center: None,
        };
        let g = coupling_from_spectrum(&lorentz, &grid, 1e9).unwrap();
        // weak squeezing keeps 10³ cycles inside double range
        let h = HamiltonianSpec::rotating_frame(1e6, &grid, g, 1e9);
        let cycle = kick_cycle(&h, h.layout(), 1.67e-9).unwrap();
        let power = stroboscopic(&cycle, 1000);
        assert!(power.symplectic_residual() < 1e-9, "{}", power.symplectic_residual());
        power.ensure_symplectic("1000 cycles").unwrap();
    }

    #[test]
    fn drift_is_reported() {
        let layout = ModeLayout::new(0);
        let mut data = ComplexMatrix::identity(2);
        data[(0, 0)] = Complex64::new(1.0 + 1e-6, 0.0);
        let bad = TransferMatrix::new(layout, data).unwrap();
        assert!(matches!(bad.ensure_symplectic("test"), Err(Error::NumericDrift { .. })));
    }

    #[test]
    fn orbit_matches_powers() {
        let h = spec(0.2, vec![0.5, -1.0], vec![0.3, 0.6]);
        let layout = h.layout();
        let cycle = kick_cycle(&h, layout, 0.1).unwrap();
        let start = TransferMatrix::identity(layout).system_annihilation_column();
        let orbit = column_orbit(&cycle, start, 5).unwrap();
        for (k, col) in orbit.iter().enumerate() {
            let expected = stroboscopic(&cycle, k as u64 + 1).system_annihilation_column();
            let diff = col
                .iter()
                .zip(&expected)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(diff < 1e-13);
        }
    }

    #[test]
    fn kicked_transfer_at_boundaries_and_inside() {
        let h = spec(0.2, vec![0.5, -1.0], vec![0.3, 0.6]);
        let layout = h.layout();
        let tau = 0.1;
        let cycle = kick_cycle(&h, layout, tau).unwrap();
        let at3 = kicked_transfer_at(&h, layout, tau, 6.0 * tau).unwrap();
        assert!(at3.data().max_abs_diff(stroboscopic(&cycle, 3).data()) < 1e-12);
        let inside = kicked_transfer_at(&h, layout, tau, 0.5 * tau).unwrap();
        assert!(
            inside
                .data()
                .max_abs_diff(evolve(&h, layout, 0.5 * tau).unwrap().data())
                < 1e-14
        );
        assert!(inside.symplectic_residual() < 1e-12);
    }

    #[test]
    fn kick_schedule_validation() {
        assert!(KickSchedule::new(0.0, 1, true).is_err());
        assert!(KickSchedule::new(1e-9, 0, true).is_err());
        let s = KickSchedule::new(1e-9, 3, true).unwrap();
        let b = s.boundaries();
        assert_eq!(b.len(), 3);
        for (got, want) in b.iter().zip([2e-9, 4e-9, 6e-9]) {
            assert!((got - want).abs() < 1e-24);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn semigroup(
            det in prop::collection::vec(-3.0..3.0f64, 3),
            g in prop::collection::vec(0.0..1.0f64, 3),
            eps in 0.0..1.0f64,
            t1 in 0.0..1.5f64,
            t2 in 0.0..1.5f64,
        ) {
            let h = spec(eps, det, g);
            let layout = h.layout();
            let r1 = assemble_r(&h, layout, 1.0).unwrap();
            let whole = transfer(&r1, t1 + t2).unwrap();
            let split = transfer(&r1, t2).unwrap().then(&transfer(&r1, t1).unwrap());
            let scale = one_norm(whole.data()).max(1.0);
            prop_assert!(whole.data().max_abs_diff(split.data()) < 1e-10 * scale);
        }

        #[test]
        fn transfer_invariants(
            det in prop::collection::vec(-3.0..3.0f64, 4),
            g in prop::collection::vec(0.0..1.0f64, 4),
            eps in 0.0..1.0f64,
            t in 0.0..2.0f64,
        ) {
            let h = spec(eps, det, g);
            let m = evolve(&h, h.layout(), t).unwrap();
            prop_assert!(m.symplectic_residual() < 1e-10);
            prop_assert!(m.conjugation_residual() < 1e-10);
        }
    }
}
