use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::control::{original_kick, KickPotential};
use crate::error::{Error, Result};
use crate::heteroclinic::ControlOrbit;
use crate::quantum::space::{QuantumState, TorusQuantization};
use crate::scheme::ControlScheme;
use crate::torus::{wrap_centered, KickedRotorParams, StabilityMatrix, TorusAction};

/// One diagonal factor of a split-operator product.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    /// Multiplies amplitude `j` in the position basis.
    Position(Vec<Complex64>),
    /// Multiplies DFT coefficient `m` (momentum `p_m`).
    Momentum(Vec<Complex64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum UnitaryOperator {
    Dense(DMatrix<Complex64>),
    /// Diagonal factors applied in order, first element first.
    Factored(Vec<Factor>),
}

impl UnitaryOperator {
    pub fn identity() -> Self {
        UnitaryOperator::Factored(Vec::new())
    }

    pub fn apply_in_place(&self, tq: &TorusQuantization, psi: &mut [Complex64]) -> Result<()> {
        tq.check_len(psi.len())?;
        match self {
            UnitaryOperator::Dense(u) => {
                let out: Vec<Complex64> = (0..u.nrows())
                    .map(|j| u.row(j).iter().zip(psi.iter()).map(|(a, b)| a * b).sum())
                    .collect();
                psi.copy_from_slice(&out);
            }
            UnitaryOperator::Factored(factors) => {
                for factor in factors {
                    match factor {
                        Factor::Position(d) => {
                            tq.check_len(d.len())?;
                            for (a, ph) in psi.iter_mut().zip(d) {
                                *a *= ph;
                            }
                        }
                        Factor::Momentum(d) => {
                            tq.check_len(d.len())?;
                            tq.apply_momentum_diagonal(psi, d);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, tq: &TorusQuantization, state: &QuantumState) -> Result<QuantumState> {
        let mut amplitudes = state.amplitudes.clone();
        self.apply_in_place(tq, &mut amplitudes)?;
        Ok(QuantumState::new(amplitudes))
    }

    pub fn to_dense(&self, tq: &TorusQuantization) -> Result<DMatrix<Complex64>> {
        if let UnitaryOperator::Dense(u) = self {
            return Ok(u.clone());
        }
        let n = tq.n();
        let mut u = DMatrix::zeros(n, n);
        let mut column = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            column.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            column[k] = Complex64::new(1.0, 0.0);
            self.apply_in_place(tq, &mut column)?;
            u.set_column(k, &nalgebra::DVector::from_column_slice(&column));
        }
        Ok(u)
    }

    /// `max_k ‖(U†U − I) e_k‖`.
    pub fn unitarity_defect(&self, tq: &TorusQuantization) -> Result<f64> {
        Ok(unitarity_defect(&self.to_dense(tq)?))
    }

    /// `self` followed by `next`.
    pub fn then(self, next: UnitaryOperator, tq: &TorusQuantization) -> Result<UnitaryOperator> {
        match (self, next) {
            (UnitaryOperator::Factored(mut a), UnitaryOperator::Factored(b)) => {
                a.extend(b);
                Ok(UnitaryOperator::Factored(a))
            }
            (a, b) => Ok(UnitaryOperator::Dense(b.to_dense(tq)? * a.to_dense(tq)?)),
        }
    }
}

pub fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let mut g = u.adjoint() * u;
    for k in 0..g.nrows() {
        g[(k, k)] -= Complex64::new(1.0, 0.0);
    }
    g.column_iter()
        .map(|c| c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// Largest entrywise difference after removing the best global phase.
pub fn max_diff_up_to_phase(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let inner: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if inner.norm() > 0.0 {
        inner / inner.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x * phase - y).norm())
        .fold(0.0, f64::max)
}

fn phases(values: impl Iterator<Item = f64>) -> Vec<Complex64> {
    values.map(|theta| Complex64::from_polar(1.0, theta)).collect()
}

/// `exp(−iπm²/N)`: a half step of free flight on the doubled torus, or a
/// full step on the unit torus.
fn kinetic_phases(tq: &TorusQuantization) -> Vec<Complex64> {
    let n = tq.n() as f64;
    // m² mod 2N keeps the argument small and exact.
    let two_n = 2 * tq.n() as u64;
    phases((0..tq.n() as u64).map(|m| -PI * ((m * m) % two_n) as f64 / n))
}

fn kick_phases(tq: &TorusQuantization, potential: impl Fn(f64) -> f64) -> Vec<Complex64> {
    let hbar = tq.hbar();
    phases((0..tq.n()).map(|j| -potential(tq.position(j)) / hbar))
}

/// Dense kernel `(1/√(iN)) e^{iπ(j−k)²/N} · e^{iθ_k}`.
fn dense_kinetic_after_kick(tq: &TorusQuantization, kick: &[Complex64]) -> DMatrix<Complex64> {
    let n = tq.n();
    let pref = Complex64::from_polar(1.0 / (n as f64).sqrt(), -PI / 4.0);
    let two_n = 2 * n as i64;
    DMatrix::from_fn(n, n, |j, k| {
        let d = j as i64 - k as i64;
        let arg = PI * ((d * d) % two_n) as f64 / n as f64;
        pref * Complex64::from_polar(1.0, arg) * kick[k]
    })
}

/// Floquet operator of the plain kicked rotor, kick first.
///
/// On the unit torus this is the single-kernel form with
/// `exp[(iNK/2π) cos 2πq_k]`; on the doubled torus the free flight is two
/// half steps.
pub fn floquet_uncontrolled(tq: &TorusQuantization, params: &KickedRotorParams) -> UnitaryOperator {
    let kick = kick_phases(tq, |q| original_kick(q, params).0);
    let mut kinetic = kinetic_phases(tq);
    if tq.action() == TorusAction::Doubled {
        kinetic.iter_mut().for_each(|t| *t = *t * *t);
    }
    UnitaryOperator::Factored(vec![Factor::Position(kick), Factor::Momentum(kinetic)])
}

/// Dense form of [`floquet_uncontrolled`].
pub fn floquet_uncontrolled_dense(
    tq: &TorusQuantization,
    params: &KickedRotorParams,
) -> UnitaryOperator {
    let kick = kick_phases(tq, |q| original_kick(q, params).0);
    let dense = dense_kinetic_after_kick(tq, &kick);
    match tq.action() {
        TorusAction::Unit => UnitaryOperator::Dense(dense),
        TorusAction::Doubled => {
            let free = dense_kinetic_after_kick(tq, &vec![Complex64::new(1.0, 0.0); tq.n()]);
            UnitaryOperator::Dense(free * dense)
        }
    }
}

/// How to represent constructed operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Representation {
    #[default]
    Factored,
    Dense,
}

/// The two half-step unitaries of controlled step `n`: each applies its
/// kick `exp(−iV(q)/ħ)` and then half a step of free flight.
pub fn controlled_half_steps(
    tq: &TorusQuantization,
    orbit: &ControlOrbit,
    scheme: ControlScheme,
    n: usize,
    repr: Representation,
) -> Result<(UnitaryOperator, UnitaryOperator)> {
    if !scheme.has_potentials() {
        return Err(Error::SchemeUsage {
            scheme,
            what: "half-step kick potentials",
        });
    }
    if tq.action() != TorusAction::Doubled {
        return Err(Error::InvalidParameter(
            "controlled half steps live on the doubled torus".into(),
        ));
    }
    if n >= orbit.tau {
        return Err(Error::InvalidParameter(format!(
            "step {n} is past the orbit length {}",
            orbit.tau
        )));
    }
    let params = orbit.params();
    let full = KickPotential::full(scheme, orbit.points_full[n].unwrapped().0, params)?;
    let half = KickPotential::half(scheme, orbit.points_half[n].unwrapped().0, params)?;
    let kick1 = kick_phases(tq, |q| full.value(q));
    let kick2 = kick_phases(tq, |q| half.value(q));
    Ok(match repr {
        Representation::Factored => {
            let kinetic = kinetic_phases(tq);
            (
                UnitaryOperator::Factored(vec![Factor::Position(kick1), Factor::Momentum(kinetic.clone())]),
                UnitaryOperator::Factored(vec![Factor::Position(kick2), Factor::Momentum(kinetic)]),
            )
        }
        Representation::Dense => (
            UnitaryOperator::Dense(dense_kinetic_after_kick(tq, &kick1)),
            UnitaryOperator::Dense(dense_kinetic_after_kick(tq, &kick2)),
        ),
    })
}

/// Phase-space translation `exp[i(Δp q̂ − p̂ Δq)/ħ]` in the symmetric split
/// `e^{iΔp q̂/2ħ} e^{−ip̂Δq/ħ} e^{iΔp q̂/2ħ}`.
///
/// Positions and momenta are taken as the images nearest `around`, so the
/// seams sit opposite the packet being moved.
pub fn shift_operator(
    tq: &TorusQuantization,
    dq: f64,
    dp: f64,
    around: (f64, f64),
) -> UnitaryOperator {
    if dq == 0.0 && dp == 0.0 {
        return UnitaryOperator::identity();
    }
    let hbar = tq.hbar();
    let half_kick = phases((0..tq.n()).map(|j| {
        dp * (tq.position_near(j, around.0) - around.0) / (2.0 * hbar)
    }));
    let translate = phases((0..tq.n()).map(|m| -tq.momentum_near(m, around.1) * dq / hbar));
    UnitaryOperator::Factored(vec![
        Factor::Position(half_kick.clone()),
        Factor::Momentum(translate),
        Factor::Position(half_kick),
    ])
}

fn check_symplectic(m: &StabilityMatrix) -> Result<()> {
    let scale = [m.m11, m.m12, m.m21, m.m22]
        .iter()
        .fold(1.0_f64, |a, x| a.max(x.abs()));
    let det = m.det();
    if !det.is_finite() || (det - 1.0).abs() > 1e-9 * scale * scale {
        return Err(Error::NotSymplectic { det });
    }
    Ok(())
}

/// Metaplectic operator of `M⁻¹` about `(center_q, center_p)`.
///
/// `R = M⁻¹` is factored exactly into kick–free–kick shears,
/// `R = kick(c₁)·free(b)·kick(c₂)` with `b = r21`, `c₁ = (1 − r11)/b`,
/// `c₂ = (1 − r22)/b`, and each shear is a diagonal quadratic phase.
pub fn unwind_operator(
    tq: &TorusQuantization,
    m: &StabilityMatrix,
    center_q: f64,
    center_p: f64,
) -> Result<UnitaryOperator> {
    check_symplectic(m)?;
    if m.m21.abs() < 1e-8 {
        return Err(Error::SingularBlock { m21: m.m21 });
    }
    let r = m.inverse();
    let b = r.m21;
    let c1 = (1.0 - r.m11) / b;
    let c2 = (1.0 - r.m22) / b;
    let hbar = tq.hbar();
    let chirp = |c: f64| {
        phases((0..tq.n()).map(move |j| {
            let x = tq.position_near(j, center_q) - center_q;
            -c * x * x / (2.0 * hbar)
        }))
    };
    let free = phases((0..tq.n()).map(|k| {
        let y = tq.momentum_near(k, center_p) - center_p;
        -b * y * y / (2.0 * hbar)
    }));
    Ok(UnitaryOperator::Factored(vec![
        Factor::Position(chirp(c2)),
        Factor::Momentum(free),
        Factor::Position(chirp(c1)),
    ]))
}

/// Directly sampled quadratic-generating-function kernel of `M⁻¹`, with
/// the momentum-centering phase `exp[i p_t (q − q′)/ħ]`. Diagnostic only: on
/// a finite torus the sampled chirps alias and the matrix is far from
/// unitary for the stretched `M` met along chaotic orbits.
pub fn sampled_unwind_kernel(
    tq: &TorusQuantization,
    m: &StabilityMatrix,
    center_q: f64,
    center_p: f64,
) -> Result<DMatrix<Complex64>> {
    check_symplectic(m)?;
    if m.m21.abs() < 1e-8 {
        return Err(Error::SingularBlock { m21: m.m21 });
    }
    let hbar = tq.hbar();
    let n = tq.n();
    let x: Vec<f64> = (0..n)
        .map(|j| wrap_centered(tq.position(j) - center_q, 1.0))
        .collect();
    let pref = Complex64::from_polar(
        (m.m21.abs().recip() / (2.0 * PI * hbar)).sqrt() / n as f64,
        -PI / 4.0 * m.m21.signum(),
    );
    Ok(DMatrix::from_fn(n, n, |j, k| {
        let (xj, xk) = (x[j], x[k]);
        let s = 0.5 * (-(m.m22 / m.m21) * xj * xj + (2.0 / m.m21) * xj * xk - (m.m11 / m.m21) * xk * xk);
        pref * Complex64::from_polar(1.0, (s + center_p * (xj - xk)) / hbar)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heteroclinic::table_one;
    use crate::quantum::space::{build_gaussian, WavePacketSpec};

    #[test]
    fn unit_torus_floquet_matches_single_kernel() {
        let tq = TorusQuantization::new(50, TorusAction::Unit).unwrap();
        let params = KickedRotorParams::new(8.0, TorusAction::Unit).unwrap();
        let dense = floquet_uncontrolled_dense(&tq, &params).to_dense(&tq).unwrap();
        let n: f64 = 50.0;
        let direct = DMatrix::from_fn(50, 50, |j, k| {
            let d = (j as f64 - k as f64).powi(2);
            Complex64::from_polar(1.0 / n.sqrt(), -PI / 4.0 + PI * d / n)
                * Complex64::from_polar(1.0, n * 8.0 / (2.0 * PI) * (2.0 * PI * k as f64 / n).cos())
        });
        assert!(max_diff_up_to_phase(&dense, &direct) < 1e-10);
        let factored = floquet_uncontrolled(&tq, &params).to_dense(&tq).unwrap();
        assert!((factored - dense).iter().map(|x| x.norm()).fold(0.0, f64::max) < 1e-10);
    }

    #[test]
    fn free_rotor_preserves_momentum_states() {
        let tq = TorusQuantization::new(50, TorusAction::Unit).unwrap();
        let params = KickedRotorParams { k: 0.0, action: TorusAction::Unit };
        let u = floquet_uncontrolled_dense(&tq, &params);
        let m0 = 7.0;
        let state = QuantumState::new(
            (0..50)
                .map(|j| Complex64::from_polar(50f64.sqrt().recip(), 2.0 * PI * m0 * j as f64 / 50.0))
                .collect(),
        );
        let out = u.apply(&tq, &state).unwrap();
        assert!((out.fidelity(&state) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn controlled_half_steps_reject_plain_schemes() {
        let tq = TorusQuantization::doubled(50).unwrap();
        let orbit = table_one();
        for scheme in [ControlScheme::Uncontrolled, ControlScheme::UnwindM] {
            assert!(matches!(
                controlled_half_steps(&tq, &orbit, scheme, 0, Representation::Factored),
                Err(Error::SchemeUsage { .. })
            ));
        }
    }

    #[test]
    fn zero_shift_is_exact_identity() {
        let tq = TorusQuantization::doubled(50).unwrap();
        let psi = build_gaussian(WavePacketSpec::new(0.3, 0.2), &tq).unwrap();
        let out = shift_operator(&tq, 0.0, 0.0, (0.3, 0.2)).apply(&tq, &psi).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn shift_pair_cancels() {
        let tq = TorusQuantization::doubled(100).unwrap();
        let fwd = shift_operator(&tq, 3e-3, -2e-3, (0.5, 0.0));
        let back = shift_operator(&tq, -3e-3, 2e-3, (0.5, 0.0));
        let prod = fwd.then(back, &tq).unwrap().to_dense(&tq).unwrap();
        let eye = DMatrix::<Complex64>::identity(100, 100);
        assert!(max_diff_up_to_phase(&prod, &eye) < 1e-9);
    }

    #[test]
    fn unwind_rejects_bad_matrices() {
        let tq = TorusQuantization::doubled(50).unwrap();
        let not_symplectic = StabilityMatrix::new(2.0, 0.0, 1.0, 1.0);
        assert!(matches!(
            unwind_operator(&tq, &not_symplectic, 0.0, 0.0),
            Err(Error::NotSymplectic { .. })
        ));
        assert!(matches!(
            unwind_operator(&tq, &StabilityMatrix::IDENTITY, 0.0, 0.0),
            Err(Error::SingularBlock { .. })
        ));
    }

    #[test]
    fn quarter_rotation_keeps_centered_packet() {
        let tq = TorusQuantization::doubled(200).unwrap();
        let psi = build_gaussian(WavePacketSpec::new(0.0, 0.0), &tq).unwrap();
        let m = StabilityMatrix::new(0.0, -1.0, 1.0, 0.0);
        let out = unwind_operator(&tq, &m, 0.0, 0.0).unwrap().apply(&tq, &psi).unwrap();
        assert!(1.0 - out.fidelity(&psi) < 1e-6);
    }

    #[test]
    fn sampled_kernel_is_only_approximately_unitary() {
        let tq = TorusQuantization::doubled(50).unwrap();
        let m = StabilityMatrix::new(1.0, -8.0, 1.0, -7.0);
        let kernel = sampled_unwind_kernel(&tq, &m, 0.0, 0.0).unwrap();
        assert!(unitarity_defect(&kernel) > 1e-3);
    }
}
