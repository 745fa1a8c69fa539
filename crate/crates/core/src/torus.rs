//! Classical kicked-rotor dynamics on the unit or doubled-momentum torus.
//!
//! Tangent vectors are ordered **momentum first**, `(δp, δq)`. Every
//! [`StabilityMatrix`] in this crate acts on that ordering; the unwinding
//! operator formulas depend on it.

use std::f64::consts::PI;
use std::ops::Mul;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::control::KickPotential;
use crate::error::{Error, Result};
use crate::scheme::ControlScheme;

const TWO_PI: f64 = 2.0 * PI;

/// Phase-space area of the fundamental torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TorusAction {
    /// Unit square: `p mod 1`.
    Unit,
    /// Doubled momentum range used with half-step control kicks: `p mod 2`.
    Doubled,
}

impl TorusAction {
    pub fn area(self) -> f64 {
        match self {
            TorusAction::Unit => 1.0,
            TorusAction::Doubled => 2.0,
        }
    }

    /// Momentum period; position period is always 1.
    pub fn momentum_period(self) -> f64 {
        self.area()
    }

    pub fn from_area(area: u32) -> Result<Self> {
        match area {
            1 => Ok(TorusAction::Unit),
            2 => Ok(TorusAction::Doubled),
            other => Err(Error::InvalidParameter(format!(
                "torus action must be 1 or 2, got {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickedRotorParams {
    /// Kick strength `K`.
    pub k: f64,
    pub action: TorusAction,
}

impl KickedRotorParams {
    pub fn new(k: f64, action: TorusAction) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kick strength must be positive, got {k}"
            )));
        }
        Ok(Self { k, action })
    }

    /// `K / 2π`, the kick impulse amplitude.
    pub fn impulse(&self) -> f64 {
        self.k / TWO_PI
    }
}

/// A phase-space point reduced to the fundamental domain
/// `q ∈ [0,1)`, `p ∈ [0, S)` with integer windings kept.
///
/// The unreduced coordinates are `q + wind_q` and `p + S·wind_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
    pub wind_q: i64,
    pub wind_p: i64,
    pub action: TorusAction,
}

impl PhasePoint {
    pub fn from_unwrapped(q: f64, p: f64, action: TorusAction) -> Self {
        let period = action.momentum_period();
        let wind_q = q.floor();
        let wind_p = (p / period).floor();
        let mut rq = q - wind_q;
        let mut rp = p - period * wind_p;
        // q − floor(q) can round up to exactly 1 for tiny negative q.
        if rq >= 1.0 {
            rq -= 1.0;
        }
        if rp >= period {
            rp -= period;
        }
        Self {
            q: rq,
            p: rp,
            wind_q: wind_q as i64,
            wind_p: wind_p as i64,
            action,
        }
    }

    pub fn unwrapped(&self) -> (f64, f64) {
        (
            self.q + self.wind_q as f64,
            self.p + self.action.momentum_period() * self.wind_p as f64,
        )
    }

    /// The same torus point with windings cleared.
    pub fn reduced(&self) -> Self {
        Self {
            wind_q: 0,
            wind_p: 0,
            ..*self
        }
    }

    /// Euclidean distance in unwrapped `(q, p)`.
    pub fn distance_unwrapped(&self, other: &PhasePoint) -> f64 {
        let (q1, p1) = self.unwrapped();
        let (q2, p2) = other.unwrapped();
        (q1 - q2).hypot(p1 - p2)
    }

    /// Euclidean distance to the nearest torus image of `other`.
    pub fn distance_on_torus(&self, other: &PhasePoint) -> f64 {
        let dq = wrap_centered(self.q - other.q, 1.0);
        let dp = wrap_centered(self.p - other.p, self.action.momentum_period());
        dq.hypot(dp)
    }
}

/// Maps `x` to `[−period/2, period/2)`.
pub fn wrap_centered(x: f64, period: f64) -> f64 {
    x - period * (x / period + 0.5).floor()
}

/// One step of the standard map, `p′ = p − (K/2π) sin 2πq`, `q′ = q + p′`,
/// evaluated on unwrapped coordinates and reduced with windings carried along.
pub fn standard_map_step(x: &PhasePoint, params: &KickedRotorParams) -> PhasePoint {
    let (q, p) = x.unwrapped();
    let (q1, p1) = standard_map_unwrapped(q, p, params.k);
    PhasePoint::from_unwrapped(q1, p1, x.action)
}

/// Standard map on plain unwrapped coordinates.
#[inline]
pub fn standard_map_unwrapped(q: f64, p: f64, k: f64) -> (f64, f64) {
    let p1 = p - k / TWO_PI * (TWO_PI * q).sin();
    (q + p1, p1)
}

/// Algebraic inverse of [`standard_map_step`], `q = q′ − p′`, `p = p′ + (K/2π) sin 2πq`.
pub fn inverse_standard_map_step(x: &PhasePoint, params: &KickedRotorParams) -> PhasePoint {
    let (q1, p1) = x.unwrapped();
    let q = q1 - p1;
    let p = p1 + params.impulse() * (TWO_PI * q).sin();
    PhasePoint::from_unwrapped(q, p, x.action)
}

/// Spacing of the dyadic lattice used by [`reversible_map_step`].
pub const LATTICE: f64 = 1.0 / 281_474_976_710_656.0; // 2^-48

#[inline]
fn snap(x: f64) -> f64 {
    (x / LATTICE).round() * LATTICE
}

fn reduce(x: f64, period: f64) -> (f64, i64) {
    let w = (x / period).floor();
    let mut r = x - period * w;
    let mut w = w as i64;
    if r >= period {
        r -= period;
        w += 1;
    }
    (r, w)
}

fn snapped(x: &PhasePoint) -> (f64, f64, i64, i64) {
    let period = x.action.momentum_period();
    let (q, dq) = reduce(snap(x.q), 1.0);
    let (p, dp) = reduce(snap(x.p), period);
    (q, p, x.wind_q + dq, x.wind_p + dp)
}

/// Standard map step on the [`LATTICE`]: coordinates are snapped to it and
/// the impulse is rounded to it, so every addition is exact and the step is
/// undone bit for bit by [`reversible_inverse_step`] (for `K/2π < 30`).
/// Each step perturbs the plain map by at most `LATTICE/2`.
pub fn reversible_map_step(x: &PhasePoint, params: &KickedRotorParams) -> PhasePoint {
    let action = x.action;
    let period = action.momentum_period();
    let s = period as i64;
    let (q, p, wind_q, wind_p) = snapped(x);
    let impulse = snap(params.impulse() * (TWO_PI * q).sin());
    let (p1, wp) = reduce(p - impulse, period);
    let (q1, wq) = reduce(q + p1, 1.0);
    let wind_p = wind_p + wp;
    PhasePoint {
        q: q1,
        p: p1,
        wind_q: wind_q + wq + s * wind_p,
        wind_p,
        action,
    }
}

/// Exact inverse of [`reversible_map_step`] on lattice points.
pub fn reversible_inverse_step(x: &PhasePoint, params: &KickedRotorParams) -> PhasePoint {
    let action = x.action;
    let period = action.momentum_period();
    let s = period as i64;
    let (q1, p1, wind_q1, wind_p1) = snapped(x);
    let (q, wq) = reduce(q1 - p1, 1.0);
    let impulse = snap(params.impulse() * (TWO_PI * q).sin());
    let (p, wp) = reduce(p1 + impulse, period);
    PhasePoint {
        q,
        p,
        wind_q: wind_q1 + wq - s * wind_p1,
        wind_p: wind_p1 + wp,
        action,
    }
}

/// One step of a controlled map: full-step kick, half free flight,
/// half-step kick, half free flight. Returns the `n+½` and `n+1` points.
pub fn controlled_map_step(
    x: &PhasePoint,
    orbit_full: &PhasePoint,
    orbit_half: &PhasePoint,
    scheme: ControlScheme,
    params: &KickedRotorParams,
) -> Result<(PhasePoint, PhasePoint)> {
    let full = KickPotential::full(scheme, orbit_full.unwrapped().0, *params)?;
    let half = KickPotential::half(scheme, orbit_half.unwrapped().0, *params)?;
    let (q, p) = x.unwrapped();
    let p_half = p - full.derivatives(q).0;
    let q_half = q + 0.5 * p_half;
    let p_next = p_half - half.derivatives(q_half).0;
    let q_next = q_half + 0.5 * p_next;
    Ok((
        PhasePoint::from_unwrapped(q_half, p_half, params.action),
        PhasePoint::from_unwrapped(q_next, p_next, params.action),
    ))
}

/// Real 2×2 tangent map acting on `(δp, δq)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityMatrix {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl StabilityMatrix {
    pub const IDENTITY: StabilityMatrix = StabilityMatrix::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    /// Kick shear `δp ← δp − curvature·δq`.
    pub const fn kick(curvature: f64) -> Self {
        Self::new(1.0, -curvature, 0.0, 1.0)
    }

    /// Free flight for time `dt`: `δq ← δq + dt·δp`.
    pub const fn free_flight(dt: f64) -> Self {
        Self::new(1.0, 0.0, dt, 1.0)
    }

    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c, -s, s, c)
    }

    /// `m11·m22 − m12·m21` with a compensated difference of products.
    pub fn det(&self) -> f64 {
        let w = self.m12 * self.m21;
        let err = (-self.m12).mul_add(self.m21, w);
        self.m11.mul_add(self.m22, -w) + err
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn inverse(&self) -> Self {
        let det = self.det();
        Self::new(
            self.m22 / det,
            -self.m12 / det,
            -self.m21 / det,
            self.m11 / det,
        )
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.m11, self.m21, self.m12, self.m22)
    }

    /// Rescales to unit determinant, projecting rounding drift back onto Sp(2).
    pub fn symplectified(&self) -> Self {
        let det = self.det();
        if det <= 0.0 {
            return *self;
        }
        let s = det.sqrt().recip();
        Self::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    /// `next · self`, re-projected onto unit determinant.
    pub fn then(&self, next: &StabilityMatrix) -> Self {
        (*next * *self).symplectified()
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.m11 * v[0] + self.m12 * v[1],
            self.m21 * v[0] + self.m22 * v[1],
        ]
    }

    pub fn max_abs_diff(&self, other: &StabilityMatrix) -> f64 {
        [
            self.m11 - other.m11,
            self.m12 - other.m12,
            self.m21 - other.m21,
            self.m22 - other.m22,
        ]
        .into_iter()
        .fold(0.0, |acc: f64, d| acc.max(d.abs()))
    }

    /// Spectral radius (largest eigenvalue modulus).
    pub fn spectral_radius(&self) -> f64 {
        let t = self.trace();
        let d = self.det();
        let disc = t * t - 4.0 * d;
        if disc >= 0.0 {
            let r = disc.sqrt();
            ((t + r) / 2.0).abs().max(((t - r) / 2.0).abs())
        } else {
            d.abs().sqrt()
        }
    }

    /// Real eigenpairs `(λ, (δp, δq))`, sorted by decreasing `|λ|`, or `None`
    /// for elliptic matrices.
    pub fn real_eigenpairs(&self) -> Option<[(f64, [f64; 2]); 2]> {
        let t = self.trace();
        let disc = t * t - 4.0 * self.det();
        if disc < 0.0 {
            return None;
        }
        let r = disc.sqrt();
        let mut lambdas = [(t + r) / 2.0, (t - r) / 2.0];
        lambdas.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
        Some(lambdas.map(|lambda| (lambda, self.eigenvector(lambda))))
    }

    fn eigenvector(&self, lambda: f64) -> [f64; 2] {
        // Pick the better-conditioned row of (M − λ) to build the null vector.
        let row1 = [self.m11 - lambda, self.m12];
        let row2 = [self.m21, self.m22 - lambda];
        let row = if row1[0].hypot(row1[1]) >= row2[0].hypot(row2[1]) {
            row1
        } else {
            row2
        };
        let v = [-row[1], row[0]];
        let norm = v[0].hypot(v[1]);
        let mut v = [v[0] / norm, v[1] / norm];
        // Orient toward positive δq.
        if v[1] < 0.0 || (v[1] == 0.0 && v[0] < 0.0) {
            v = [-v[0], -v[1]];
        }
        v
    }
}

impl Mul for StabilityMatrix {
    type Output = StabilityMatrix;

    fn mul(self, rhs: StabilityMatrix) -> StabilityMatrix {
        StabilityMatrix::new(
            self.m11 * rhs.m11 + self.m12 * rhs.m21,
            self.m11 * rhs.m12 + self.m12 * rhs.m22,
            self.m21 * rhs.m11 + self.m22 * rhs.m21,
            self.m21 * rhs.m12 + self.m22 * rhs.m22,
        )
    }
}

/// One-step tangent map of the standard map at position `q`:
/// `[[1, −K cos 2πq], [1, 1 − K cos 2πq]]`.
pub fn stability_step_uncontrolled(q: f64, params: &KickedRotorParams) -> StabilityMatrix {
    let c = params.k * (TWO_PI * q).cos();
    StabilityMatrix::new(1.0, -c, 1.0, 1.0 - c)
}

/// One-step tangent map of a controlled map, `𝓜½(2)·𝓜½(1)` with
/// `𝓜½(i) = free(½)·kick(curvature_i)`.
pub fn stability_step_controlled(
    x_n: &PhasePoint,
    x_half: &PhasePoint,
    orbit_full: &PhasePoint,
    orbit_half: &PhasePoint,
    scheme: ControlScheme,
    params: &KickedRotorParams,
) -> Result<StabilityMatrix> {
    let full = KickPotential::full(scheme, orbit_full.unwrapped().0, *params)?;
    let half = KickPotential::half(scheme, orbit_half.unwrapped().0, *params)?;
    let first = StabilityMatrix::free_flight(0.5) * StabilityMatrix::kick(full.derivatives(x_n.unwrapped().0).1);
    let second =
        StabilityMatrix::free_flight(0.5) * StabilityMatrix::kick(half.derivatives(x_half.unwrapped().0).1);
    Ok(second * first)
}

/// Double-double number `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Self { hi: s, lo: err }
    }

    fn quick(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        Self {
            hi: s,
            lo: lo - (s - hi),
        }
    }

    fn add(self, other: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, other.hi);
        let t = Dd::two_sum(self.lo, other.lo);
        let u = Dd::quick(s.hi, s.lo + t.hi);
        Dd::quick(u.hi, u.lo + t.lo)
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn mul(self, other: Dd) -> Dd {
        let p = self.hi * other.hi;
        let err = self.hi.mul_add(other.hi, -p);
        let cross = self.hi * other.lo + self.lo * other.hi;
        Dd::quick(p, err + cross)
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// Tangent map accumulated in double-double precision from exact kick and
/// free-flight factors, so its determinant stays at 1 far beyond what
/// rounded `f64` products allow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccumulatedStability {
    m: [Dd; 4],
}

impl Default for AccumulatedStability {
    fn default() -> Self {
        Self::identity()
    }
}

impl AccumulatedStability {
    pub fn identity() -> Self {
        Self {
            m: [Dd::from(1.0), Dd::from(0.0), Dd::from(0.0), Dd::from(1.0)],
        }
    }

    /// Left-multiplies by `kick(curvature)`.
    pub fn push_kick(&mut self, curvature: f64) {
        let c = Dd::from(curvature);
        let [m11, m12, m21, m22] = self.m;
        self.m = [
            m11.add(c.mul(m21).neg()),
            m12.add(c.mul(m22).neg()),
            m21,
            m22,
        ];
    }

    /// Left-multiplies by `free_flight(dt)`.
    pub fn push_free(&mut self, dt: f64) {
        let t = Dd::from(dt);
        let [m11, m12, m21, m22] = self.m;
        self.m = [m11, m12, m21.add(t.mul(m11)), m22.add(t.mul(m12))];
    }

    /// Appends one uncontrolled step at position `q`.
    pub fn push_uncontrolled(&mut self, q: f64, params: &KickedRotorParams) {
        self.push_kick(params.k * (TWO_PI * q).cos());
        self.push_free(1.0);
    }

    /// Appends one controlled step with the given full- and half-step curvatures.
    pub fn push_controlled(&mut self, curvature_full: f64, curvature_half: f64) {
        self.push_kick(curvature_full);
        self.push_free(0.5);
        self.push_kick(curvature_half);
        self.push_free(0.5);
    }

    pub fn det(&self) -> f64 {
        let [m11, m12, m21, m22] = self.m;
        m11.mul(m22).add(m12.mul(m21).neg()).value()
    }

    pub fn matrix(&self) -> StabilityMatrix {
        let [m11, m12, m21, m22] = self.m.map(Dd::value);
        StabilityMatrix::new(m11, m12, m21, m22)
    }
}

/// Accumulated uncontrolled tangent map along consecutive positions.
pub fn accumulate_uncontrolled<'a, I>(positions: I, params: &KickedRotorParams) -> AccumulatedStability
where
    I: IntoIterator<Item = &'a f64>,
{
    let mut acc = AccumulatedStability::identity();
    for &q in positions {
        acc.push_uncontrolled(q, params);
    }
    acc
}

/// Mean largest Lyapunov exponent over `n_samples` random initial conditions,
/// each iterated `n_steps` times with the tangent vector renormalized every step.
pub fn lyapunov_estimate(
    params: &KickedRotorParams,
    n_steps: usize,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    if n_steps < 1000 || n_samples < 10 {
        return Err(Error::InvalidParameter(format!(
            "Lyapunov estimate needs n_steps >= 1000 and n_samples >= 10, got {n_steps} and {n_samples}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let period = params.action.momentum_period();
    let mut total = 0.0;
    for _ in 0..n_samples {
        let mut q: f64 = rng.random();
        let mut p: f64 = rng.random::<f64>() * period;
        let mut v = [1.0, 0.0];
        let mut log_growth = 0.0;
        for _ in 0..n_steps {
            v = stability_step_uncontrolled(q, params).apply(v);
            let norm = v[0].hypot(v[1]);
            log_growth += norm.ln();
            v = [v[0] / norm, v[1] / norm];
            let (q1, p1) = standard_map_unwrapped(q, p, params.k);
            q = q1.rem_euclid(1.0);
            p = p1.rem_euclid(period);
        }
        total += log_growth / n_steps as f64;
    }
    Ok(total / n_samples as f64)
}
