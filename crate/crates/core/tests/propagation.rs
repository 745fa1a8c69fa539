use std::f64::consts::PI;

use ctarget::heteroclinic::{table_one, ControlOrbit};
use ctarget::quantum::{
    build_gaussian, controlled_half_steps, floquet_uncontrolled, floquet_uncontrolled_dense,
    full_kick_phase, max_diff_up_to_phase, propagate, shift_operator, sweep_dimension,
    unwind_operator, Factor, PropagationPlan, QuantumState, Representation, TorusQuantization,
    UnitaryOperator, WavePacketSpec,
};
use ctarget::torus::{AccumulatedStability, KickedRotorParams, StabilityMatrix, TorusAction};
use ctarget::{ControlScheme, Error};
use num_complex::Complex64;

fn params() -> KickedRotorParams {
    KickedRotorParams::new(8.0, TorusAction::Doubled).unwrap()
}

fn gaussian(tq: &TorusQuantization, q: f64, p: f64) -> QuantumState {
    build_gaussian(WavePacketSpec::new(q, p), tq).unwrap()
}

#[test]
fn gaussian_packets() {
    let tq = TorusQuantization::doubled(200).unwrap();
    let a = gaussian(&tq, 0.5, 0.0);
    assert!((a.norm_sqr() - 1.0).abs() < 1e-10);
    let (q, p) = a.centroid(&tq, (0.5, 0.0));
    assert!((q - 0.5).abs() < 1e-8 && p.abs() < 1e-8);
    let b = gaussian(&tq, 0.0, 0.0);
    for j in 1..200 {
        assert!((b.amplitudes[j] - b.amplitudes[200 - j]).norm() < 1e-12);
    }
    assert!(a.fidelity(&b) < 1e-10);
    let c = gaussian(&tq, 0.23, 1.41);
    let (q, p) = c.centroid(&tq, (0.23, 1.41));
    assert!((q - 0.23).abs() < 1e-6 && (p - 1.41).abs() < 1e-6);
    assert!(matches!(
        build_gaussian(WavePacketSpec::new(0.5, 0.0), &TorusQuantization::doubled(20).unwrap()),
        Err(Error::TailCondition { .. })
    ));
}

#[test]
fn quantization_constants() {
    let tq = TorusQuantization::doubled(200).unwrap();
    assert!((tq.hbar() * 200.0 * PI - 1.0).abs() < 1e-15);
    assert!((tq.planck_cell() - 0.01).abs() < 1e-17);
    assert!(TorusQuantization::doubled(51).is_err());
}

#[test]
fn floquet_operator() {
    let tq = TorusQuantization::doubled(50).unwrap();
    let factored = floquet_uncontrolled(&tq, &params()).to_dense(&tq).unwrap();
    assert!(ctarget::quantum::unitarity_defect(&factored) < 1e-10);
    let dense = floquet_uncontrolled_dense(&tq, &params()).to_dense(&tq).unwrap();
    assert!(max_diff_up_to_phase(&factored, &dense) < 1e-10);

    let free = KickedRotorParams { k: 0.0, action: TorusAction::Doubled };
    let u = floquet_uncontrolled(&tq, &free);
    let plane: Vec<Complex64> = (0..50)
        .map(|j| Complex64::from_polar(1.0 / 50f64.sqrt(), 2.0 * PI * 7.0 * j as f64 / 50.0))
        .collect();
    let state = QuantumState::new(plane);
    assert!((u.apply(&tq, &state).unwrap().fidelity(&state) - 1.0).abs() < 1e-12);
}

#[test]
fn controlled_kick_phases() {
    let tq = TorusQuantization::doubled(200).unwrap();
    let orbit = table_one();
    for n in 0..orbit.tau {
        let qg = orbit.points_full[n].unwrapped().0;
        let (u1, _) = controlled_half_steps(&tq, &orbit, ControlScheme::SolA, n, Representation::Factored).unwrap();
        let UnitaryOperator::Factored(factors) = u1 else { panic!("factored") };
        let Factor::Position(kick) = &factors[0] else { panic!("kick first") };
        for (j, z) in kick.iter().enumerate() {
            let q = tq.position(j);
            let expected = -(200.0 * 8.0 / (4.0 * PI)) * (2.0 * PI * qg).sin() * (2.0 * PI * (q - qg)).sin();
            assert!((z - Complex64::from_polar(1.0, expected)).norm() < 1e-12);
            let phase = full_kick_phase(&tq, &orbit, ControlScheme::SolA, n, q).unwrap();
            assert!((phase - expected).abs() < 1e-12 * expected.abs().max(1.0));
        }
    }
    let flat = ControlOrbit::from_full_points(8.0, &[(0.5, 0.0), (0.5, 0.0)], (0.5, 0.0), (0.5, 0.0)).unwrap();
    let (u1, _) = controlled_half_steps(&tq, &flat, ControlScheme::SolA, 0, Representation::Factored).unwrap();
    let UnitaryOperator::Factored(factors) = u1 else { panic!("factored") };
    let Factor::Position(kick) = &factors[0] else { panic!("kick first") };
    assert!(kick.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-12));
}

#[test]
fn shift_operators() {
    let tq = TorusQuantization::doubled(200).unwrap();
    let zero = shift_operator(&tq, 0.0, 0.0, (0.5, 0.0)).to_dense(&tq).unwrap();
    assert_eq!(zero, nalgebra::DMatrix::identity(200, 200));
    let orbit = table_one();
    let (dq, dp) = orbit.entry_shift();
    let psi = shift_operator(&tq, dq, dp, (0.5, 0.0)).apply(&tq, &gaussian(&tq, 0.5, 0.0)).unwrap();
    let (q, p) = psi.centroid(&tq, (0.5, 0.0));
    let (q0, p0) = orbit.points_full[0].unwrapped();
    assert!((q - q0).abs() < 1e-6 && (p - p0).abs() < 1e-6);
    let there = shift_operator(&tq, 0.013, -0.02, (0.5, 0.0)).to_dense(&tq).unwrap();
    let back = shift_operator(&tq, -0.013, 0.02, (0.5, 0.0)).to_dense(&tq).unwrap();
    assert!(max_diff_up_to_phase(&(back * there), &nalgebra::DMatrix::identity(200, 200)) < 1e-9);
}

#[test]
fn unwinding_operator() {
    let tq = TorusQuantization::doubled(200).unwrap();
    let quarter = StabilityMatrix::new(0.0, -1.0, 1.0, 0.0);
    let centred = gaussian(&tq, 0.0, 0.0);
    let turned = unwind_operator(&tq, &quarter, 0.0, 0.0).unwrap().apply(&tq, &centred).unwrap();
    assert!((turned.fidelity(&centred) - 1.0).abs() < 1e-6);

    let orbit = table_one();
    let (q0, p0) = orbit.points_full[0].unwrapped();
    let mut psi = gaussian(&tq, q0, p0);
    floquet_uncontrolled(&tq, &params()).apply_in_place(&tq, &mut psi.amplitudes).unwrap();
    let mut acc = AccumulatedStability::identity();
    acc.push_uncontrolled(q0, &params());
    let (q1, p1) = orbit.points_full[1].unwrapped();
    let psi = unwind_operator(&tq, &acc.matrix(), q1, p1).unwrap().apply(&tq, &psi).unwrap();
    let (vq, vp, c) = psi.covariance(&tq, (q1, p1));
    let hbar = tq.hbar();
    assert!(((vq * vp - c * c) / (hbar * hbar / 4.0) - 1.0).abs() < 0.1);

    assert!(matches!(
        unwind_operator(&tq, &StabilityMatrix::new(2.0, 0.0, 1.0, 2.0), 0.0, 0.0),
        Err(Error::NotSymplectic { .. })
    ));
    assert!(matches!(
        unwind_operator(&tq, &StabilityMatrix::new(2.0, 0.0, 0.0, 0.5), 0.0, 0.0),
        Err(Error::SingularBlock { .. })
    ));
}

#[test]
fn controlled_propagation_targets() {
    let tq = TorusQuantization::doubled(200).unwrap();
    let orbit = table_one();
    let initial = gaussian(&tq, 0.5, 0.0);
    let target = gaussian(&tq, 0.0, 0.0);
    let run = propagate(&PropagationPlan::along(orbit.clone(), ControlScheme::SolA), &tq, &initial, &target).unwrap();
    assert!((run.final_state.norm_sqr() - 1.0).abs() < 1e-9);
    assert!(run.delta < 0.5);
    assert_eq!(run.trace.len(), 7);
    for (t, state) in run.trace.iter().enumerate() {
        let expected = orbit.points_full[t].unwrapped();
        let (q, p) = state.centroid(&tq, expected);
        assert!((q - expected.0).abs() < 0.02 && (p - expected.1).abs() < 0.02, "t = {t}");
    }
    let free = propagate(&PropagationPlan::along(orbit, ControlScheme::Uncontrolled), &tq, &initial, &target).unwrap();
    assert!(free.delta >= 0.9);
}

#[test]
fn centroid_tracks_the_orbit_at_large_dimension() {
    let tq = TorusQuantization::doubled(1400).unwrap();
    let orbit = table_one();
    let run = propagate(
        &PropagationPlan::along(orbit.clone(), ControlScheme::SolAImproved),
        &tq,
        &gaussian(&tq, 0.5, 0.0),
        &gaussian(&tq, 0.0, 0.0),
    )
    .unwrap();
    for (t, state) in run.trace.iter().enumerate() {
        let expected = orbit.points_full[t].unwrapped();
        let (q, p) = state.centroid(&tq, expected);
        assert!((q - expected.0).abs() < 2e-3 && (p - expected.1).abs() < 2e-3, "t = {t}");
    }
}

#[test]
fn identity_plan_has_zero_error() {
    let tq = TorusQuantization::doubled(100).unwrap();
    let still = ControlOrbit::from_full_points(8.0, &[(0.5, 0.0)], (0.5, 0.0), (0.5, 0.0)).unwrap();
    let psi = gaussian(&tq, 0.5, 0.0);
    let run = propagate(&PropagationPlan::along(still, ControlScheme::SolA), &tq, &psi, &psi).unwrap();
    assert_eq!(run.delta, 0.0);
}

#[test]
fn sweep_rows() {
    let orbit = table_one();
    let rows = sweep_dimension(&[50, 100, 200], &[ControlScheme::SolA, ControlScheme::UnwindM], &orbit, 1).unwrap();
    assert_eq!(rows.len(), 6);
    let a: Vec<f64> = rows.iter().filter(|r| r.scheme == ControlScheme::SolA).map(|r| r.delta.unwrap()).collect();
    assert!(a.windows(2).all(|w| w[1] < w[0]));
    for r in &rows {
        assert!((r.h - 2.0 / r.n as f64).abs() < 1e-17);
        assert_eq!(r.status, "ok");
    }
    assert_eq!(sweep_dimension(&[200], &[ControlScheme::SolA], &orbit, 1).unwrap().len(), 1);
}
