//! Wigner densities of torus states, level contours and figure export.
//!
//! The state is interpolated with its band-limited trigonometric
//! polynomial, taking each momentum at the representative nearest the
//! packet's momentum, and treated as a line segment over one position
//! period centred on the packet. Then
//! `W(x, p) = (1/πħ) ∫ ψ*(x + y) ψ(x − y) e^{2ipy/ħ} dy`
//! on a grid of `n_q × n_p` points spanning `[q_c − ½, q_c + ½) × [p_c − 1, p_c + 1)`.

pub mod contour;
pub mod export;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{QuantumState, TorusQuantization};
use crate::torus::TorusAction;

pub use contour::{circularity, extract_contours, polygon_area, Contour, ContourLevel, ContourSet};

/// Requested grid size; both must be multiples of `2N` (and at least `2N`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub n_q: usize,
    pub n_p: usize,
}

impl Resolution {
    /// `2N·factor` points in each direction.
    pub fn oversampled(n: usize, factor: usize) -> Self {
        Self {
            n_q: 2 * n * factor,
            n_p: 2 * n * factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceDensity {
    /// Row-major values, `values[iq * n_p + ip]`.
    pub values: Vec<f64>,
    pub resolution: Resolution,
    pub q0: f64,
    pub p0: f64,
    pub dq: f64,
    pub dp: f64,
    pub hbar: f64,
    /// Packet centre used to place the window.
    pub center: (f64, f64),
}

impl PhaseSpaceDensity {
    pub fn at(&self, iq: usize, ip: usize) -> f64 {
        self.values[iq * self.resolution.n_p + ip]
    }

    pub fn q(&self, iq: usize) -> f64 {
        self.q0 + iq as f64 * self.dq
    }

    pub fn p(&self, ip: usize) -> f64 {
        self.p0 + ip as f64 * self.dp
    }

    pub fn cell_area(&self) -> f64 {
        self.dq * self.dp
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    /// `∫ W dp` on each position row.
    pub fn q_marginal(&self) -> Vec<f64> {
        self.values
            .chunks(self.resolution.n_p)
            .map(|row| row.iter().sum::<f64>() * self.dp)
            .collect()
    }

    /// `∫ W dq` on each momentum column.
    pub fn p_marginal(&self) -> Vec<f64> {
        let n_p = self.resolution.n_p;
        let mut out = vec![0.0; n_p];
        for row in self.values.chunks(n_p) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v * self.dq;
            }
        }
        out
    }

    /// Peak of a minimum-uncertainty packet, `1/πħ`.
    pub fn peak_level(&self) -> f64 {
        1.0 / (PI * self.hbar)
    }

    /// Grid location of the maximum value.
    pub fn argmax(&self) -> (f64, f64) {
        let (k, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
        let n_p = self.resolution.n_p;
        (self.q(k / n_p), self.p(k % n_p))
    }

    /// Bilinear interpolation; `None` outside the grid.
    pub fn sample(&self, q: f64, p: f64) -> Option<f64> {
        let x = (q - self.q0) / self.dq;
        let y = (p - self.p0) / self.dp;
        if x < 0.0 || y < 0.0 {
            return None;
        }
        let (i, j) = (x.floor() as usize, y.floor() as usize);
        if i + 1 >= self.resolution.n_q || j + 1 >= self.resolution.n_p {
            return None;
        }
        let (fx, fy) = (x - i as f64, y - j as f64);
        Some(
            self.at(i, j) * (1.0 - fx) * (1.0 - fy)
                + self.at(i + 1, j) * fx * (1.0 - fy)
                + self.at(i, j + 1) * (1.0 - fx) * fy
                + self.at(i + 1, j + 1) * fx * fy,
        )
    }
}

/// Band-limited interpolation of `state` on `n_q` points starting at `q0`,
/// normalized so that `∫|ψ|² dq = 1` for a unit state.
pub fn interpolate(
    state: &QuantumState,
    tq: &TorusQuantization,
    n_q: usize,
    q0: f64,
    p_center: f64,
) -> Vec<Complex64> {
    let n = tq.n();
    let mut phi = state.amplitudes.clone();
    tq.fft(&mut phi);
    let mut buf = vec![Complex64::new(0.0, 0.0); n_q];
    let scale = 1.0 / (n as f64).sqrt();
    let area = tq.action().area();
    for (m, c) in phi.iter().enumerate() {
        let p = tq.momentum_near(m, p_center);
        let wave = (p * n as f64 / area).round() as i64;
        let slot = wave.rem_euclid(n_q as i64) as usize;
        let phase = Complex64::from_polar(scale, 2.0 * PI * wave as f64 * q0);
        buf[slot] += c * phase;
    }
    FftPlanner::new().plan_fft_inverse(n_q).process(&mut buf);
    buf
}

/// Wigner density of `state` around `center` (or its circular centroid).
pub fn wigner_transform(
    state: &QuantumState,
    tq: &TorusQuantization,
    resolution: Resolution,
    center: Option<(f64, f64)>,
) -> Result<PhaseSpaceDensity> {
    tq.check_len(state.len())?;
    if tq.action() != TorusAction::Doubled {
        return Err(Error::InvalidParameter(
            "Wigner densities are defined here for the doubled torus".into(),
        ));
    }
    let n = tq.n();
    let Resolution { n_q, n_p } = resolution;
    if n_q < 2 * n || n_p < 2 * n || n_q % (2 * n) != 0 || n_p % (2 * n) != 0 {
        return Err(Error::ResolutionTooCoarse { n_q, n_p, n });
    }
    let reference = center.unwrap_or_else(|| state.circular_centroid(tq));
    let (qc, pc) = state.centroid(tq, reference);
    let mut unit = state.clone();
    unit.normalize();

    let q0 = qc - 0.5;
    let p0 = pc - 1.0;
    let psi = interpolate(&unit, tq, n_q, q0, pc);
    let hbar = tq.hbar();
    let r = n_q / (2 * n);
    let lags = r * n_p;
    let dq = 1.0 / n_q as f64;
    let dp = 2.0 / n_p as f64;
    // p_k = k·dp, so the window starts at DFT index k0 and wraps modulo `lags`.
    let k0 = (p0 / dp).round() as i64;
    let p0 = k0 as f64 * dp;
    let pref = 1.0 / (PI * hbar) * dq;

    let fft = FftPlanner::new().plan_fft_forward(lags);
    let mut values = vec![0.0; n_q * n_p];
    let mut buf = vec![Complex64::new(0.0, 0.0); lags];
    for iq in 0..n_q {
        buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
        let reach = iq.min(n_q - 1 - iq);
        for s in 0..=reach {
            let term = psi[iq + s].conj() * psi[iq - s];
            buf[s] += term;
            if s > 0 {
                buf[lags - s] += psi[iq - s].conj() * psi[iq + s];
            }
        }
        // Σ_s f(s) e^{+2πiks/L} is the forward transform read at −k.
        fft.process(&mut buf);
        let row = &mut values[iq * n_p..(iq + 1) * n_p];
        for (ip, v) in row.iter_mut().enumerate() {
            let k = (k0 + ip as i64).rem_euclid(lags as i64) as usize;
            let idx = (lags - k) % lags;
            *v = pref * buf[idx].re;
        }
    }
    Ok(PhaseSpaceDensity {
        values,
        resolution,
        q0,
        p0,
        dq,
        dp,
        hbar,
        center: (qc, pc),
    })
}

/// Densities of every state in `trace`, each placed around its own centre, in parallel.
pub fn trace_densities(
    trace: &[QuantumState],
    centers: &[(f64, f64)],
    tq: &TorusQuantization,
    resolution: Resolution,
) -> Result<Vec<PhaseSpaceDensity>> {
    if centers.len() != trace.len() {
        return Err(Error::DimensionMismatch {
            expected: trace.len(),
            found: centers.len(),
        });
    }
    trace
        .par_iter()
        .zip(centers.par_iter())
        .map(|(state, &c)| wigner_transform(state, tq, resolution, Some(c)))
        .collect()
}
