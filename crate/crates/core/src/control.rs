//! Closed-form control kick potentials.
//!
//! Every potential is written in terms of the offset angle
//! `x = 2π (q − center)`, where `center` is the control orbit position at the
//! kick time. Full-step kicks carry the original kick impulse at the center
//! (`V′ = (K/2π) sin 2π q_γ(n)`); half-step kicks carry no impulse at their
//! center and only shape the local stability.
//!
//! Curvature targets at the centers, `(V″, 𝒱″)`:
//!
//! | scheme                     | `V″` | `𝒱″` | one-step stability     |
//! |----------------------------|------|-------|------------------------|
//! | `SolA`, `SolAImproved`     | 0    | 4/5   | rotation by acos(3/5)  |
//! | `SolB`, `SolBImproved`     | 4    | 4     | rotation by π          |
//!
//! The improved variants replace `sin x` in the impulse-carrying term by
//! `(4/3)[sin x − sin(2x)/8]`. That keeps `V′` and `V″` at the center and
//! cancels the term of `V″` linear in `q − center`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::heteroclinic::ControlOrbit;
use crate::scheme::ControlScheme;
use crate::torus::KickedRotorParams;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KickTiming {
    /// Kick at integer time `n`.
    Full,
    /// Kick at half-integer time `n + ½`.
    Half,
}

/// A single control kick potential, centered on one orbit position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickPotential {
    scheme: ControlScheme,
    timing: KickTiming,
    center: f64,
    params: KickedRotorParams,
}

/// Value and analytic derivatives of a potential at one position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialJet {
    pub value: f64,
    pub first: f64,
    pub second: f64,
    pub third: f64,
}

impl KickPotential {
    pub fn new(
        scheme: ControlScheme,
        timing: KickTiming,
        center: f64,
        params: KickedRotorParams,
    ) -> Result<Self> {
        if !scheme.has_potentials() {
            return Err(Error::SchemeUsage {
                scheme,
                what: "designed kick potential",
            });
        }
        if !center.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "potential center must be finite, got {center}"
            )));
        }
        Ok(Self {
            scheme,
            timing,
            center,
            params,
        })
    }

    pub fn full(scheme: ControlScheme, center: f64, params: KickedRotorParams) -> Result<Self> {
        Self::new(scheme, KickTiming::Full, center, params)
    }

    pub fn half(scheme: ControlScheme, center: f64, params: KickedRotorParams) -> Result<Self> {
        Self::new(scheme, KickTiming::Half, center, params)
    }

    pub fn scheme(&self) -> ControlScheme {
        self.scheme
    }

    pub fn timing(&self) -> KickTiming {
        self.timing
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn value(&self, q: f64) -> f64 {
        self.jet(q).value
    }

    /// `(V′, V″)` at `q`.
    pub fn derivatives(&self, q: f64) -> (f64, f64) {
        let jet = self.jet(q);
        (jet.first, jet.second)
    }

    pub fn jet(&self, q: f64) -> PotentialJet {
        let x = TWO_PI * (q - self.center);
        let k = self.params.k;
        match (self.timing, self.scheme) {
            (KickTiming::Half, ControlScheme::SolA | ControlScheme::SolAImproved) => {
                cosine_well(x, 1.0 / (5.0 * PI * PI))
            }
            (KickTiming::Half, _) => cosine_well(x, 1.0 / (PI * PI)),
            (KickTiming::Full, scheme) => {
                let s = (TWO_PI * self.center).sin();
                let impulse = impulse_term(x, k * s / (4.0 * PI * PI), is_improved(scheme));
                match scheme {
                    ControlScheme::SolB | ControlScheme::SolBImproved => {
                        let well = cosine_well(x, 1.0 / (PI * PI));
                        PotentialJet {
                            value: well.value + impulse.value,
                            first: well.first + impulse.first,
                            second: well.second + impulse.second,
                            third: well.third + impulse.third,
                        }
                    }
                    _ => impulse,
                }
            }
        }
    }

    /// Required `(V′, V″)` at the center for this scheme and timing.
    pub fn center_targets(&self) -> (f64, f64) {
        let k = self.params.k;
        match self.timing {
            KickTiming::Full => {
                let impulse = k / TWO_PI * (TWO_PI * self.center).sin();
                match self.scheme {
                    ControlScheme::SolB | ControlScheme::SolBImproved => (impulse, 4.0),
                    _ => (impulse, 0.0),
                }
            }
            KickTiming::Half => match self.scheme {
                ControlScheme::SolB | ControlScheme::SolBImproved => (0.0, 4.0),
                _ => (0.0, 0.8),
            },
        }
    }
}

fn is_improved(scheme: ControlScheme) -> bool {
    matches!(
        scheme,
        ControlScheme::SolAImproved | ControlScheme::SolBImproved
    )
}

/// `−a cos x` and its q-derivatives.
fn cosine_well(x: f64, a: f64) -> PotentialJet {
    let (sin, cos) = x.sin_cos();
    PotentialJet {
        value: -a * cos,
        first: a * TWO_PI * sin,
        second: a * TWO_PI * TWO_PI * cos,
        third: -a * TWO_PI * TWO_PI * TWO_PI * sin,
    }
}

/// `b sin x`, or `b (4/3)[sin x − sin(2x)/8]` when improved.
fn impulse_term(x: f64, b: f64, improved: bool) -> PotentialJet {
    let (sin, cos) = x.sin_cos();
    let w = TWO_PI;
    if improved {
        let (sin2, cos2) = (2.0 * x).sin_cos();
        let c = b * 4.0 / 3.0;
        PotentialJet {
            value: c * (sin - sin2 / 8.0),
            first: c * w * (cos - cos2 / 4.0),
            second: c * w * w * (-sin + sin2 / 2.0),
            third: c * w * w * w * (-cos + cos2),
        }
    } else {
        PotentialJet {
            value: b * sin,
            first: b * w * cos,
            second: -b * w * w * sin,
            third: -b * w * w * w * cos,
        }
    }
}

/// Amplitude `K(n)` and phase `φ(n)` of the single phase-shifted cosine
/// form of the scheme-ℬ full-step potential,
/// `V = −K(n)/(4π²) cos(2π[q − q_γ(n)] + φ(n))`.
///
/// The phase uses `atan2`, so it stays correct when `sin 2π q_γ(n) < 0`.
pub fn sol_b_amplitude_phase(center: f64, k: f64) -> (f64, f64) {
    let s = (TWO_PI * center).sin();
    let amplitude = k * (16.0 / (k * k) + s * s).sqrt();
    let phase = s.atan2(4.0 / k);
    (amplitude, phase)
}

/// Scheme-ℬ full-step potential evaluated through its compact form.
pub fn sol_b_compact_value(q: f64, center: f64, k: f64) -> f64 {
    let (amplitude, phase) = sol_b_amplitude_phase(center, k);
    -amplitude / (4.0 * PI * PI) * (TWO_PI * (q - center) + phase).cos()
}

/// The original kick potential `−K/(4π²) cos 2πq` with its first two derivatives.
pub fn original_kick(q: f64, params: &KickedRotorParams) -> (f64, f64, f64) {
    let jet = cosine_well(TWO_PI * q, params.k / (4.0 * PI * PI));
    (jet.value, jet.first, jet.second)
}

/// Per-step deviations of a scheme's potentials from the constraints that
/// make it follow `orbit` with rotational one-step stability.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    pub scheme: ControlScheme,
    /// `|V′(q_γ(n)) − (p_n − p_{n+½})|`.
    pub impulse: Vec<f64>,
    /// `|𝒱′(q_γ(n+½)) − (p_{n+½} − p_{n+1})|`.
    pub half_impulse: Vec<f64>,
    /// `|V′(q_γ(n)) − (K/2π) sin 2π q_γ(n)|`.
    pub kick_match: Vec<f64>,
    /// `|V″(q_γ(n)) − target|`.
    pub curvature: Vec<f64>,
    /// `|𝒱″(q_γ(n+½)) − target|`.
    pub half_curvature: Vec<f64>,
}

impl ConstraintReport {
    pub fn max_deviation(&self) -> f64 {
        [
            &self.impulse,
            &self.half_impulse,
            &self.kick_match,
            &self.curvature,
            &self.half_curvature,
        ]
        .into_iter()
        .flatten()
        .fold(0.0, |acc: f64, &d| acc.max(d))
    }
}

/// Checks the impulse and curvature constraints of `scheme` along `orbit`.
pub fn verify_constraints(orbit: &ControlOrbit, scheme: ControlScheme) -> Result<ConstraintReport> {
    let params = orbit.params();
    let mut report = ConstraintReport {
        scheme,
        impulse: Vec::with_capacity(orbit.tau),
        half_impulse: Vec::with_capacity(orbit.tau),
        kick_match: Vec::with_capacity(orbit.tau),
        curvature: Vec::with_capacity(orbit.tau),
        half_curvature: Vec::with_capacity(orbit.tau),
    };
    for n in 0..orbit.tau {
        let (q_n, p_n) = orbit.points_full[n].unwrapped();
        let (q_h, p_h) = orbit.points_half[n].unwrapped();
        let (_, p_next) = orbit.points_full[n + 1].unwrapped();

        let full = KickPotential::full(scheme, q_n, params)?;
        let half = KickPotential::half(scheme, q_h, params)?;
        let (v1, v2) = full.derivatives(q_n);
        let (w1, w2) = half.derivatives(q_h);
        let (v1_target, v2_target) = full.center_targets();
        let (w1_target, w2_target) = half.center_targets();

        report.impulse.push((v1 - (p_n - p_h)).abs());
        report.half_impulse.push((w1 - (p_h - p_next)).abs());
        report.kick_match.push((v1 - v1_target).abs().max((w1 - w1_target).abs()));
        report.curvature.push((v2 - v2_target).abs());
        report.half_curvature.push((w2 - w2_target).abs());
    }
    Ok(report)
}
