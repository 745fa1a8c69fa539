use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::{wrap_centered, TorusAction};

/// Finite Hilbert space of a torus of area `S` with `N` position states
/// `q_j = j/N` and `2πħ = S/N`.
///
/// Momentum eigenvalues are `p_m = S·m/N`; the forward DFT coefficient `m`
/// of a position vector is its amplitude on `p_m`.
#[derive(Clone)]
pub struct TorusQuantization {
    n: usize,
    action: TorusAction,
    hbar: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TorusQuantization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusQuantization")
            .field("n", &self.n)
            .field("action", &self.action)
            .field("hbar", &self.hbar)
            .finish()
    }
}

impl PartialEq for TorusQuantization {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.action == other.action
    }
}

impl TorusQuantization {
    /// `N` must be even: the kinetic phase `exp(−iπm²/N)` is periodic in `m`
    /// only then.
    pub fn new(n: usize, action: TorusAction) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "Hilbert-space dimension must be even and >= 2, got {n}"
            )));
        }
        let hbar = action.area() / (2.0 * PI * n as f64);
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            action,
            hbar,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn doubled(n: usize) -> Result<Self> {
        Self::new(n, TorusAction::Doubled)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn action(&self) -> TorusAction {
        self.action
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Planck's cell `h = 2πħ = S/N`.
    pub fn planck_cell(&self) -> f64 {
        2.0 * PI * self.hbar
    }

    pub fn position(&self, j: usize) -> f64 {
        j as f64 / self.n as f64
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.position(j)).collect()
    }

    /// `p_m` for DFT index `m`, in `[0, S)`.
    pub fn momentum(&self, m: usize) -> f64 {
        self.action.area() * m as f64 / self.n as f64
    }

    /// Momentum of DFT index `m` taken as the representative nearest `center`.
    pub fn momentum_near(&self, m: usize, center: f64) -> f64 {
        center + wrap_centered(self.momentum(m) - center, self.action.area())
    }

    /// Position of grid point `j` taken as the representative nearest `center`.
    pub fn position_near(&self, j: usize, center: f64) -> f64 {
        center + wrap_centered(self.position(j) - center, 1.0)
    }

    pub(crate) fn fft(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Unnormalized inverse transform.
    pub(crate) fn ifft(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
    }

    /// Multiplies by `phases[m]` in the momentum basis.
    pub(crate) fn apply_momentum_diagonal(&self, psi: &mut [Complex64], phases: &[Complex64]) {
        self.fft(psi);
        let scale = 1.0 / self.n as f64;
        for (a, ph) in psi.iter_mut().zip(phases) {
            *a *= ph * scale;
        }
        self.ifft(psi);
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: len,
            });
        }
        Ok(())
    }
}

/// Position-basis amplitudes on a torus grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumState {
    pub amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &QuantumState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.overlap(self).re
    }

    pub fn normalize(&mut self) {
        let s = self.norm_sqr().sqrt().recip();
        for a in &mut self.amplitudes {
            *a *= s;
        }
    }

    /// `|⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩)`, insensitive to global phase and norm.
    pub fn fidelity(&self, other: &QuantumState) -> f64 {
        self.overlap(other).norm_sqr() / (self.norm_sqr() * other.norm_sqr())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Probabilities of the momentum eigenstates `p_m`.
    pub fn momentum_probabilities(&self, tq: &TorusQuantization) -> Vec<f64> {
        let mut phi = self.amplitudes.clone();
        tq.fft(&mut phi);
        let scale = 1.0 / tq.n() as f64;
        phi.iter().map(|a| a.norm_sqr() * scale).collect()
    }

    /// `(⟨q⟩, ⟨p⟩)` with coordinates taken as the images nearest `reference`.
    pub fn centroid(&self, tq: &TorusQuantization, reference: (f64, f64)) -> (f64, f64) {
        let norm = self.norm_sqr();
        let q = self
            .probabilities()
            .iter()
            .enumerate()
            .map(|(j, w)| w * tq.position_near(j, reference.0))
            .sum::<f64>()
            / norm;
        let p = self
            .momentum_probabilities(tq)
            .iter()
            .enumerate()
            .map(|(m, w)| w * tq.momentum_near(m, reference.1))
            .sum::<f64>()
            / norm;
        (q, p)
    }

    /// Centroid by circular mean, without a reference point.
    pub fn circular_centroid(&self, tq: &TorusQuantization) -> (f64, f64) {
        let circ = |weights: Vec<f64>, period: f64| {
            let (mut s, mut c) = (0.0, 0.0);
            for (k, w) in weights.iter().enumerate() {
                let angle = 2.0 * PI * k as f64 / weights.len() as f64;
                s += w * angle.sin();
                c += w * angle.cos();
            }
            (s.atan2(c) / (2.0 * PI)).rem_euclid(1.0) * period
        };
        (
            circ(self.probabilities(), 1.0),
            circ(self.momentum_probabilities(tq), tq.action().area()),
        )
    }

    /// Symmetrized covariance `(var q, var p, cov qp)` about the centroid
    /// nearest `reference`.
    pub fn covariance(&self, tq: &TorusQuantization, reference: (f64, f64)) -> (f64, f64, f64) {
        let norm = self.norm_sqr();
        let (qc, pc) = self.centroid(tq, reference);
        let dq: Vec<f64> = (0..tq.n()).map(|j| tq.position_near(j, qc) - qc).collect();
        let dp: Vec<f64> = (0..tq.n()).map(|m| tq.momentum_near(m, pc) - pc).collect();
        let var_q = self
            .probabilities()
            .iter()
            .zip(&dq)
            .map(|(w, x)| w * x * x)
            .sum::<f64>()
            / norm;
        let var_p = self
            .momentum_probabilities(tq)
            .iter()
            .zip(&dp)
            .map(|(w, x)| w * x * x)
            .sum::<f64>()
            / norm;
        let mut dp_psi = self.amplitudes.clone();
        let dp_phases: Vec<Complex64> = dp.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        tq.apply_momentum_diagonal(&mut dp_psi, &dp_phases);
        let cov = self
            .amplitudes
            .iter()
            .zip(&dp_psi)
            .zip(&dq)
            .map(|((a, b), x)| (a.conj() * b * x).re)
            .sum::<f64>()
            / norm;
        (var_q, var_p, cov)
    }
}

/// Minimum-uncertainty packet centered at `(q_c, p_c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePacketSpec {
    pub q_c: f64,
    pub p_c: f64,
}

impl WavePacketSpec {
    pub fn new(q_c: f64, p_c: f64) -> Self {
        Self { q_c, p_c }
    }
}

/// Largest tail weight `exp(−1/(8ħ))` accepted by [`build_gaussian`].
pub const TAIL_LIMIT: f64 = 1e-6;

/// `ψ_j ∝ exp(−d²/2ħ + i p_c d/ħ)` with `d = q_j − q_c` the nearest image,
/// normalized on the grid.
pub fn build_gaussian(spec: WavePacketSpec, tq: &TorusQuantization) -> Result<QuantumState> {
    if !(spec.q_c.is_finite() && spec.p_c.is_finite()) {
        return Err(Error::InvalidParameter("packet centroid must be finite".into()));
    }
    let hbar = tq.hbar();
    let tail = (-1.0 / (8.0 * hbar)).exp();
    if tail >= TAIL_LIMIT {
        return Err(Error::TailCondition { tail });
    }
    let amplitudes = (0..tq.n())
        .map(|j| {
            let d = wrap_centered(tq.position(j) - spec.q_c, 1.0);
            Complex64::from_polar((-d * d / (2.0 * hbar)).exp(), spec.p_c * d / hbar)
        })
        .collect();
    let mut state = QuantumState::new(amplitudes);
    state.normalize();
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_or_tiny_dimensions() {
        assert!(TorusQuantization::doubled(1).is_err());
        assert!(TorusQuantization::doubled(51).is_err());
        assert!(TorusQuantization::new(50, TorusAction::Unit).is_ok());
    }

    #[test]
    fn hbar_relation() {
        for n in [50, 200, 1400] {
            let tq = TorusQuantization::doubled(n).unwrap();
            assert!((tq.hbar() * n as f64 * PI - 1.0).abs() < 1e-15);
            assert!((tq.planck_cell() - 2.0 / n as f64).abs() < 1e-15);
            let unit = TorusQuantization::new(n, TorusAction::Unit).unwrap();
            assert!((unit.hbar() * n as f64 * 2.0 * PI - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn tail_condition_is_enforced() {
        let tq = TorusQuantization::doubled(20).unwrap();
        assert!(matches!(
            build_gaussian(WavePacketSpec::new(0.5, 0.0), &tq),
            Err(Error::TailCondition { .. })
        ));
    }

    #[test]
    fn gaussian_moments() {
        let tq = TorusQuantization::doubled(200).unwrap();
        let psi = build_gaussian(WavePacketSpec::new(0.5, 0.0), &tq).unwrap();
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
        let (q, p) = psi.centroid(&tq, (0.5, 0.0));
        assert!((q - 0.5).abs() < 1e-8);
        assert!(p.abs() < 1e-8);
        let (vq, vp, c) = psi.covariance(&tq, (0.5, 0.0));
        let h2 = tq.hbar() / 2.0;
        assert!((vq / h2 - 1.0).abs() < 1e-6 && (vp / h2 - 1.0).abs() < 1e-6);
        assert!(c.abs() < 1e-12);
    }

    #[test]
    fn moving_packet_centroid() {
        let tq = TorusQuantization::doubled(50).unwrap();
        let psi = build_gaussian(WavePacketSpec::new(0.13, 1.7), &tq).unwrap();
        let (q, p) = psi.centroid(&tq, (0.13, 1.7));
        assert!((q - 0.13).abs() < 1e-6, "q = {q}");
        assert!((p - 1.7).abs() < 1e-6, "p = {p}");
        let (cq, cp) = psi.circular_centroid(&tq);
        assert!((cq - 0.13).abs() < 1e-2 && (cp - 1.7).abs() < 1e-2);
    }

    #[test]
    fn origin_packet_is_even() {
        let tq = TorusQuantization::doubled(200).unwrap();
        let psi = build_gaussian(WavePacketSpec::new(0.0, 0.0), &tq).unwrap();
        for j in 1..tq.n() {
            assert!((psi.amplitudes[j] - psi.amplitudes[tq.n() - j]).norm() < 1e-12);
        }
    }

    #[test]
    fn distant_packets_are_orthogonal() {
        let tq = TorusQuantization::doubled(200).unwrap();
        let a = build_gaussian(WavePacketSpec::new(0.5, 0.0), &tq).unwrap();
        let b = build_gaussian(WavePacketSpec::new(0.0, 0.0), &tq).unwrap();
        assert!(a.fidelity(&b) < 1e-10);
        assert_eq!(a.fidelity(&a), 1.0);
    }
}
