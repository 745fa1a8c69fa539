//! Heteroclinic orbits of the standard map between two hyperbolic fixed points.
//!
//! Candidates start on the linear unstable eigenline of `α`,
//! `x(0) = α + s·u`, and are found by scanning `s` while tracking the
//! image `x(τ)` near `β`. Each bracketed candidate is polished by a
//! variational Newton solve on the discrete Euler–Lagrange equations
//! `q_{n+1} − 2q_n + q_{n−1} + (K/2π) sin 2πq_n = 0`.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::{
    stability_step_uncontrolled, standard_map_unwrapped, wrap_centered, KickedRotorParams,
    PhasePoint, StabilityMatrix, TorusAction,
};

const TWO_PI: f64 = 2.0 * PI;
const TABLE_ONE: &str = include_str!("../data/table1.json");

/// A finite heteroclinic segment with its half-step points.
///
/// `points_full` and `points_half` are stored unreduced. `points_half[n]`
/// is the point reached from `points_full[n]` after the full kick and half
/// a free flight.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlOrbit {
    pub k: f64,
    pub tau: usize,
    pub points_full: Vec<PhasePoint>,
    pub points_half: Vec<PhasePoint>,
    pub shift_in: f64,
    pub shift_out: f64,
    pub alpha: PhasePoint,
    pub beta: PhasePoint,
}

impl ControlOrbit {
    /// Builds an orbit from unwrapped full-step points, deriving half points
    /// and shift distances.
    pub fn from_full_points(
        k: f64,
        full: &[(f64, f64)],
        alpha: (f64, f64),
        beta: (f64, f64),
    ) -> Result<Self> {
        let params = KickedRotorParams::new(k, TorusAction::Doubled)?;
        if full.is_empty() {
            return Err(Error::OrbitFormat("orbit has no points".into()));
        }
        if full.iter().any(|(q, p)| !q.is_finite() || !p.is_finite()) {
            return Err(Error::OrbitFormat("orbit contains non-finite coordinates".into()));
        }
        let action = params.action;
        let tau = full.len() - 1;
        let points_full: Vec<PhasePoint> = full
            .iter()
            .map(|&(q, p)| PhasePoint::from_unwrapped(q, p, action))
            .collect();
        let points_half = full[..tau]
            .iter()
            .map(|&(q, p)| {
                let p_half = p - params.impulse() * (TWO_PI * q).sin();
                PhasePoint::from_unwrapped(q + 0.5 * p_half, p_half, action)
            })
            .collect();
        let alpha = PhasePoint::from_unwrapped(alpha.0, alpha.1, action);
        let beta = PhasePoint::from_unwrapped(beta.0, beta.1, action);
        let shift_in = points_full[0].distance_on_torus(&alpha);
        let shift_out = points_full[tau].distance_on_torus(&beta);
        Ok(Self {
            k,
            tau,
            points_full,
            points_half,
            shift_in,
            shift_out,
            alpha,
            beta,
        })
    }

    pub fn params(&self) -> KickedRotorParams {
        KickedRotorParams {
            k: self.k,
            action: TorusAction::Doubled,
        }
    }

    pub fn full_unwrapped(&self) -> Vec<(f64, f64)> {
        self.points_full.iter().map(PhasePoint::unwrapped).collect()
    }

    pub fn half_unwrapped(&self) -> Vec<(f64, f64)> {
        self.points_half.iter().map(PhasePoint::unwrapped).collect()
    }

    pub fn shift_sum(&self) -> f64 {
        self.shift_in + self.shift_out
    }

    /// Displacement `x(0) − α` taken to the nearest image.
    pub fn entry_shift(&self) -> (f64, f64) {
        torus_offset(&self.points_full[0], &self.alpha)
    }

    /// Displacement `β − x(τ)` taken to the nearest image.
    pub fn exit_shift(&self) -> (f64, f64) {
        torus_offset(&self.beta, &self.points_full[self.tau])
    }

    /// Largest coordinate difference against another orbit of the same length.
    pub fn max_coordinate_difference(&self, other: &ControlOrbit) -> f64 {
        if self.tau != other.tau {
            return f64::INFINITY;
        }
        self.full_unwrapped()
            .into_iter()
            .zip(other.full_unwrapped())
            .fold(0.0, |acc, (a, b)| acc.max((a.0 - b.0).abs()).max((a.1 - b.1).abs()))
    }

    pub fn to_file(&self) -> OrbitFile {
        let pair = |x: &PhasePoint| {
            let (q, p) = x.unwrapped();
            [q, p]
        };
        OrbitFile {
            k: self.k,
            tau: self.tau,
            alpha: Some(pair(&self.alpha)),
            beta: Some(pair(&self.beta)),
            points_full: self.points_full.iter().map(pair).collect(),
            points_half: self.points_half.iter().map(pair).collect(),
            shift_in: Some(self.shift_in),
            shift_out: Some(self.shift_out),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<OrbitFile>(text)?.into_orbit()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

fn torus_offset(to: &PhasePoint, from: &PhasePoint) -> (f64, f64) {
    (
        wrap_centered(to.q - from.q, 1.0),
        wrap_centered(to.p - from.p, to.action.momentum_period()),
    )
}

/// On-disk orbit representation with unwrapped `[q, p]` pairs.
///
/// Half points and shift distances are recomputed on load; missing
/// endpoints default to `α = (0.5, 0)` and `β = (0, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitFile {
    #[serde(rename = "K")]
    pub k: f64,
    pub tau: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<[f64; 2]>,
    pub points_full: Vec<[f64; 2]>,
    #[serde(default)]
    pub points_half: Vec<[f64; 2]>,
    #[serde(default)]
    pub shift_in: Option<f64>,
    #[serde(default)]
    pub shift_out: Option<f64>,
}

impl OrbitFile {
    pub fn into_orbit(self) -> Result<ControlOrbit> {
        if self.points_full.len() != self.tau + 1 {
            return Err(Error::OrbitFormat(format!(
                "tau = {} needs {} full points, found {}",
                self.tau,
                self.tau + 1,
                self.points_full.len()
            )));
        }
        if !self.points_half.is_empty() && self.points_half.len() != self.tau {
            return Err(Error::OrbitFormat(format!(
                "tau = {} needs {} half points, found {}",
                self.tau,
                self.tau,
                self.points_half.len()
            )));
        }
        let full: Vec<(f64, f64)> = self.points_full.iter().map(|x| (x[0], x[1])).collect();
        let alpha = self.alpha.unwrap_or([0.5, 0.0]);
        let beta = self.beta.unwrap_or([0.0, 0.0]);
        ControlOrbit::from_full_points(self.k, &full, (alpha[0], alpha[1]), (beta[0], beta[1]))
    }
}

/// The bundled reference orbit (K = 8, τ = 6, (0.5, 0) → (0, 0)).
pub fn table_one() -> ControlOrbit {
    ControlOrbit::from_json(TABLE_ONE).expect("bundled orbit file is valid")
}

/// How the final point of a candidate is tied to `β`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EndCondition {
    /// `x(τ)` is the closest approach of the evolved eigenline to `β`.
    #[default]
    ClosestApproach,
    /// `x(τ)` lies on the linear stable eigenline of `β`.
    StableEigenline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub tau: usize,
    pub alpha: (f64, f64),
    pub beta: (f64, f64),
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Allowed `(wind_q, wind_p)` of the `β` image reached at `x(τ)`; empty allows all.
    pub candidate_windings: Vec<(i64, i64)>,
    pub capture_radius: f64,
    pub end_condition: EndCondition,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            tau: 6,
            alpha: (0.5, 0.0),
            beta: (0.0, 0.0),
            newton_tol: 1e-11,
            max_iter: 50,
            candidate_windings: Vec::new(),
            capture_radius: 0.05,
            end_condition: EndCondition::ClosestApproach,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.newton_tol > 0.0) {
            return Err(Error::InvalidParameter("newton_tol must be positive".into()));
        }
        if !(self.capture_radius > 0.0 && self.capture_radius < 0.5) {
            return Err(Error::InvalidParameter(
                "capture_radius must lie in (0, 0.5)".into(),
            ));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchDiagnostics {
    pub shots: usize,
    pub brackets: usize,
    pub converged: usize,
    pub duplicates: usize,
    pub dropped: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub orbits: Vec<ControlOrbit>,
    pub diagnostics: SearchDiagnostics,
}

impl SearchOutcome {
    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }
}

struct Geometry {
    params: KickedRotorParams,
    alpha: (f64, f64),
    beta: (f64, f64),
    /// Unit unstable direction at `α`, `(δp, δq)`.
    unstable: [f64; 2],
    /// Unit stable direction at `β`, `(δp, δq)`.
    stable: [f64; 2],
    lambda_u: f64,
    tau: usize,
}

#[derive(Clone, Copy)]
struct Shot {
    /// Unwrapped `(q, p)` at time τ.
    end: (f64, f64),
    /// `d x(τ) / d s` as `(δp, δq)`.
    tangent: [f64; 2],
}

impl Geometry {
    fn start(&self, s: f64) -> (f64, f64) {
        (
            self.alpha.0 + s * self.unstable[1],
            self.alpha.1 + s * self.unstable[0],
        )
    }

    fn shoot(&self, s: f64) -> Shot {
        let (mut q, mut p) = self.start(s);
        let mut t = self.unstable;
        for _ in 0..self.tau {
            t = stability_step_uncontrolled(q, &self.params).apply(t);
            (q, p) = standard_map_unwrapped(q, p, self.params.k);
        }
        Shot {
            end: (q, p),
            tangent: t,
        }
    }

    /// Nearest `β` image to `x` and its winding.
    fn beta_image(&self, x: (f64, f64)) -> ((f64, f64), (i64, i64)) {
        let period = self.params.action.momentum_period();
        let wq = (x.0 - self.beta.0).round();
        let wp = ((x.1 - self.beta.1) / period).round();
        (
            (self.beta.0 + wq, self.beta.1 + period * wp),
            (wq as i64, wp as i64),
        )
    }

    fn end_residual(&self, end: EndCondition, x: (f64, f64), t: [f64; 2], image: (f64, f64)) -> f64 {
        let dq = x.0 - image.0;
        let dp = x.1 - image.1;
        match end {
            EndCondition::ClosestApproach => {
                let norm = t[0].hypot(t[1]);
                (dp * t[0] + dq * t[1]) / norm
            }
            EndCondition::StableEigenline => dp * self.stable[1] - dq * self.stable[0],
        }
    }
}

fn fixed_point_geometry(config: &SearchConfig, params: &KickedRotorParams) -> Result<Geometry> {
    let check = |name: &str, x: (f64, f64)| -> Result<StabilityMatrix> {
        let (q1, p1) = standard_map_unwrapped(x.0, x.1, params.k);
        let period = params.action.momentum_period();
        let err = wrap_centered(q1 - x.0, 1.0)
            .abs()
            .max(wrap_centered(p1 - x.1, period).abs());
        if err > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "endpoint {name} = ({}, {}) is not a fixed point (residual {err:e})",
                x.0, x.1
            )));
        }
        Ok(stability_step_uncontrolled(x.0, params))
    };
    let m_alpha = check("alpha", config.alpha)?;
    let m_beta = check("beta", config.beta)?;
    let not_hyperbolic =
        |name: &str| Error::InvalidParameter(format!("endpoint {name} is not hyperbolic"));
    let [(lambda_u, unstable), _] = m_alpha
        .real_eigenpairs()
        .filter(|pairs| pairs[0].0.abs() > 1.0 + 1e-9)
        .ok_or_else(|| not_hyperbolic("alpha"))?;
    let [_, (_, stable)] = m_beta
        .real_eigenpairs()
        .filter(|pairs| pairs[0].0.abs() > 1.0 + 1e-9)
        .ok_or_else(|| not_hyperbolic("beta"))?;
    Ok(Geometry {
        params: *params,
        alpha: config.alpha,
        beta: config.beta,
        unstable,
        stable,
        lambda_u: lambda_u.abs(),
        tau: config.tau,
    })
}

struct Bracket {
    lo: f64,
    hi: f64,
    image: (f64, f64),
    winding: (i64, i64),
}

/// Walks `s` outward along one branch of the unstable eigenline and
/// brackets sign changes of the end residual near `β`.
fn scan_branch(geo: &Geometry, config: &SearchConfig, sign: f64, shots: &mut usize) -> Vec<Bracket> {
    let rc = config.capture_radius;
    let s_min = 1e-3 * geo.lambda_u.powi(-(geo.tau as i32));
    let s_max = rc;
    let mut brackets = Vec::new();
    let mut s = s_min;
    let mut prev = geo.shoot(sign * s);
    *shots += 1;
    while s < s_max {
        let (image, _) = geo.beta_image(prev.end);
        let d = (prev.end.0 - image.0).hypot(prev.end.1 - image.1);
        let arc = if d > 2.0 * rc {
            0.5 * (d - rc)
        } else {
            (0.25 * d).clamp(1e-9, 1e-3)
        };
        let speed = prev.tangent[0].hypot(prev.tangent[1]);
        let mut ds = (arc / speed).min(s);
        let (s_next, next) = loop {
            let s_next = (s + ds).min(s_max);
            let next = geo.shoot(sign * s_next);
            *shots += 1;
            let chord = (next.end.0 - prev.end.0).hypot(next.end.1 - prev.end.1);
            if chord <= 2.0 * arc || ds < 1e-3 * s * f64::EPSILON {
                break (s_next, next);
            }
            ds *= 0.5;
        };
        let (image_next, winding) = geo.beta_image(next.end);
        let d_next = (next.end.0 - image_next.0).hypot(next.end.1 - image_next.1);
        if d.min(d_next) < 2.0 * rc {
            let g0 = sign * geo.end_residual(config.end_condition, prev.end, prev.tangent, image_next);
            let g1 = sign * geo.end_residual(config.end_condition, next.end, next.tangent, image_next);
            let crosses = match config.end_condition {
                EndCondition::ClosestApproach => g0 < 0.0 && g1 >= 0.0,
                EndCondition::StableEigenline => g0.signum() != g1.signum(),
            };
            if crosses {
                brackets.push(Bracket {
                    lo: sign * s,
                    hi: sign * s_next,
                    image: image_next,
                    winding,
                });
            }
        }
        s = s_next;
        prev = next;
    }
    brackets
}

/// Bisection on the end residual inside a bracket.
fn bisect(geo: &Geometry, config: &SearchConfig, bracket: &Bracket) -> f64 {
    let residual = |s: f64| {
        let shot = geo.shoot(s);
        geo.end_residual(config.end_condition, shot.end, shot.tangent, bracket.image)
    };
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let mut g_lo = residual(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let g_mid = residual(mid);
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Residuals of the variational system in unknowns `z = (s, q_1, …, q_τ)`.
fn variational_residuals(
    geo: &Geometry,
    end: EndCondition,
    image: (f64, f64),
    z: &[f64],
) -> Vec<f64> {
    let tau = geo.tau;
    let kk = geo.params.impulse();
    let (q0, p0) = geo.start(z[0]);
    let q = |n: usize| if n == 0 { q0 } else { z[n] };
    let mut r = Vec::with_capacity(tau + 1);
    r.push(q(1) - q0 - p0 + kk * (TWO_PI * q0).sin());
    for n in 1..tau {
        r.push(q(n + 1) - 2.0 * q(n) + q(n - 1) + kk * (TWO_PI * q(n)).sin());
    }
    let x_end = (q(tau), q(tau) - q(tau - 1));
    let tangent = (0..tau).fold(geo.unstable, |t, n| {
        stability_step_uncontrolled(q(n), &geo.params).apply(t)
    });
    r.push(geo.end_residual(end, x_end, tangent, image));
    r
}

fn variational_newton(
    geo: &Geometry,
    config: &SearchConfig,
    s_seed: f64,
    image: (f64, f64),
) -> std::result::Result<(f64, Vec<f64>), String> {
    let tau = geo.tau;
    let mut z = Vec::with_capacity(tau + 1);
    z.push(s_seed);
    let (mut q, mut p) = geo.start(s_seed);
    for _ in 0..tau {
        (q, p) = standard_map_unwrapped(q, p, geo.params.k);
        z.push(q);
    }
    let dim = tau + 1;
    let max_abs = |r: &[f64]| r.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let mut r = variational_residuals(geo, config.end_condition, image, &z);
    for _ in 0..config.max_iter {
        if max_abs(&r) < 0.1 * config.newton_tol {
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(dim, dim);
        let (q0, _) = geo.start(z[0]);
        let kc = geo.params.k * (TWO_PI * q0).cos();
        jac[(0, 0)] = -geo.unstable[1] - geo.unstable[0] + kc * geo.unstable[1];
        jac[(0, 1)] = 1.0;
        for n in 1..tau {
            let kc = geo.params.k * (TWO_PI * z[n]).cos();
            jac[(n, n)] = -2.0 + kc;
            jac[(n, n + 1)] = 1.0;
            if n == 1 {
                jac[(n, 0)] = geo.unstable[1];
            } else {
                jac[(n, n - 1)] = 1.0;
            }
        }
        for j in 0..dim {
            let h = 1e-7 * z[j].abs().max(if j == 0 { 1e-6 } else { 1.0 });
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[j] += h;
            zm[j] -= h;
            let rp = variational_residuals(geo, config.end_condition, image, &zp)[tau];
            let rm = variational_residuals(geo, config.end_condition, image, &zm)[tau];
            jac[(tau, j)] = (rp - rm) / (2.0 * h);
        }
        let rhs = DVector::from_vec(r.clone());
        let step = jac
            .lu()
            .solve(&rhs)
            .ok_or_else(|| format!("singular Jacobian at s = {s_seed:e}"))?;
        for (zi, di) in z.iter_mut().zip(step.iter()) {
            *zi -= di;
        }
        let r_new = variational_residuals(geo, config.end_condition, image, &z);
        let stalled = max_abs(&r_new) >= max_abs(&r);
        r = r_new;
        if stalled {
            break;
        }
    }
    let res = max_abs(&r);
    if !(res < config.newton_tol) {
        return Err(format!(
            "no convergence from s = {s_seed:e}: residual {res:e}"
        ));
    }
    Ok((z[0], z))
}

fn orbit_from_solution(geo: &Geometry, s: f64, z: &[f64]) -> Result<ControlOrbit> {
    let start = geo.start(s);
    let mut full = Vec::with_capacity(geo.tau + 1);
    full.push(start);
    for n in 1..=geo.tau {
        let prev = if n == 1 { start.0 } else { z[n - 1] };
        full.push((z[n], z[n] - prev));
    }
    ControlOrbit::from_full_points(geo.params.k, &full, geo.alpha, geo.beta)
}

/// Finds all distinct τ-step segments from the unstable eigenline of `α`
/// whose endpoint satisfies the end condition within the capture radius of `β`.
pub fn find_orbits(config: &SearchConfig, params: &KickedRotorParams) -> Result<SearchOutcome> {
    config.validate()?;
    let mut diagnostics = SearchDiagnostics::default();
    if config.tau < 2 {
        diagnostics
            .notes
            .push(format!("tau = {} is too short to connect two fixed points", config.tau));
        return Ok(SearchOutcome {
            orbits: Vec::new(),
            diagnostics,
        });
    }
    let geo = fixed_point_geometry(config, params)?;

    let scans: Vec<(Vec<Bracket>, usize)> = [1.0, -1.0]
        .par_iter()
        .map(|&sign| {
            let mut shots = 0;
            let brackets = scan_branch(&geo, config, sign, &mut shots);
            (brackets, shots)
        })
        .collect();
    let mut brackets = Vec::new();
    for (b, shots) in scans {
        diagnostics.shots += shots;
        brackets.extend(b);
    }
    brackets.retain(|b| {
        config.candidate_windings.is_empty() || config.candidate_windings.contains(&b.winding)
    });
    diagnostics.brackets = brackets.len();

    let refined: Vec<std::result::Result<ControlOrbit, String>> = brackets
        .par_iter()
        .map(|bracket| {
            let seed = bisect(&geo, config, bracket);
            let (s, z) = variational_newton(&geo, config, seed, bracket.image)?;
            let orbit = orbit_from_solution(&geo, s, &z).map_err(|e| e.to_string())?;
            if orbit.shift_in > config.capture_radius || orbit.shift_out > config.capture_radius {
                return Err(format!(
                    "candidate at s = {s:e} outside capture radius (in {:e}, out {:e})",
                    orbit.shift_in, orbit.shift_out
                ));
            }
            Ok(orbit)
        })
        .collect();

    let mut orbits: Vec<ControlOrbit> = Vec::new();
    for result in refined {
        match result {
            Ok(orbit) => {
                diagnostics.converged += 1;
                if orbits
                    .iter()
                    .any(|o| o.max_coordinate_difference(&orbit) < 1e-9)
                {
                    diagnostics.duplicates += 1;
                } else {
                    orbits.push(orbit);
                }
            }
            Err(reason) => diagnostics.dropped.push(reason),
        }
    }
    orbits.sort_by(selection_order);
    Ok(SearchOutcome {
        orbits,
        diagnostics,
    })
}

/// Shift distances compared on a 1e-14 grid so mirror-symmetric orbits tie.
fn quantized(x: f64) -> i64 {
    (x * 1e14).round() as i64
}

fn selection_order(a: &ControlOrbit, b: &ControlOrbit) -> Ordering {
    quantized(a.shift_sum())
        .cmp(&quantized(b.shift_sum()))
        .then(quantized(a.shift_in).cmp(&quantized(b.shift_in)))
        .then_with(|| {
            a.full_unwrapped()
                .iter()
                .zip(b.full_unwrapped().iter())
                .map(|(x, y)| y.0.total_cmp(&x.0).then(y.1.total_cmp(&x.1)))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
}

/// The orbit minimizing `shift_in + shift_out`; ties (to 1e-14) go to the
/// smaller `shift_in`, then to descending lexicographic order of the
/// unwrapped coordinates.
pub fn select_optimal(orbits: &[ControlOrbit]) -> Result<ControlOrbit> {
    orbits
        .iter()
        .min_by(|a, b| selection_order(a, b))
        .cloned()
        .ok_or(Error::EmptyOrbitList)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitReport {
    /// Max coordinate mismatch of `f(x_n)` against `x_{n+1}`, per step.
    pub step_residuals: Vec<f64>,
    /// Max coordinate mismatch of each stored half point against the half image.
    pub half_residuals: Vec<f64>,
    pub max_residual: f64,
    pub max_half_residual: f64,
    pub shift_in: f64,
    pub shift_out: f64,
}

pub fn verify_orbit(orbit: &ControlOrbit, params: &KickedRotorParams) -> OrbitReport {
    let full = orbit.full_unwrapped();
    let half = orbit.half_unwrapped();
    let step_residuals: Vec<f64> = full
        .windows(2)
        .map(|w| {
            let (q1, p1) = standard_map_unwrapped(w[0].0, w[0].1, params.k);
            (q1 - w[1].0).abs().max((p1 - w[1].1).abs())
        })
        .collect();
    let half_residuals: Vec<f64> = full
        .iter()
        .zip(half.iter())
        .map(|(&(q, p), &(qh, ph))| {
            let p_half = p - params.impulse() * (TWO_PI * q).sin();
            (q + 0.5 * p_half - qh).abs().max((p_half - ph).abs())
        })
        .collect();
    let max = |v: &[f64]| v.iter().fold(0.0_f64, |a, &x| a.max(x));
    OrbitReport {
        max_residual: max(&step_residuals),
        max_half_residual: max(&half_residuals),
        step_residuals,
        half_residuals,
        shift_in: orbit.shift_in,
        shift_out: orbit.shift_out,
    }
}
