use std::f64::consts::{PI, TAU};

use ctarget::heteroclinic::table_one;
use ctarget::quantum::{build_gaussian, propagate, PropagationPlan, TorusQuantization, WavePacketSpec};
use ctarget::wigner::{
    extract_contours, interpolate, trace_densities, wigner_transform, ContourLevel, Resolution,
};
use ctarget::torus::TorusAction;
use ctarget::{ControlScheme, Error};

#[test]
fn gaussian_density_is_centred_and_round() {
    let n = 200;
    let tq = TorusQuantization::doubled(n).unwrap();
    let psi = build_gaussian(WavePacketSpec::new(0.5, 0.0), &tq).unwrap();
    let w = wigner_transform(&psi, &tq, Resolution::oversampled(n, 2), None).unwrap();
    let (q, p) = w.argmax();
    let p = p - 2.0 * (p / 2.0).round();
    assert!((q - 0.5).abs() <= w.dq && p.abs() <= w.dp);

    let (qc, pc) = (0.5, w.center.1);
    let two_sigma = (tq.planck_cell() / PI).sqrt();
    for frac in [0.25, 0.5, 0.75, 1.0] {
        let r = frac * two_sigma;
        let values: Vec<f64> = (0..36)
            .map(|k| {
                let t = TAU * k as f64 / 36.0;
                w.sample(qc + r * t.cos(), pc + r * t.sin()).unwrap()
            })
            .collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        assert!(values.iter().all(|v| (v / mean - 1.0).abs() < 0.05), "r = {r}");
    }

    let two = extract_contours(&w, ContourLevel::TwoSigma);
    assert!(!two.is_fragmented());
    assert!((two.area() / 0.01 - 1.0).abs() < 0.03);
    assert!(two.circularity() < 1.05);
}

#[test]
fn marginals_and_normalization() {
    let n = 100;
    let tq = TorusQuantization::doubled(n).unwrap();
    let psi = build_gaussian(WavePacketSpec::new(0.77, 1.3), &tq).unwrap();
    let res = Resolution::oversampled(n, 2);
    let w = wigner_transform(&psi, &tq, res, None).unwrap();
    assert!((w.total() - 1.0).abs() < 1e-6);
    let interp = interpolate(&psi, &tq, res.n_q, w.q0, w.center.1);
    for (m, a) in w.q_marginal().iter().zip(&interp) {
        assert!((m - a.norm_sqr()).abs() * w.dq < 1e-6);
    }
    let p_total: f64 = w.p_marginal().iter().sum::<f64>() * w.dp;
    assert!((p_total - 1.0).abs() < 1e-6);
}

#[test]
fn coarse_grids_and_unit_torus_are_rejected() {
    let tq = TorusQuantization::doubled(50).unwrap();
    let psi = build_gaussian(WavePacketSpec::new(0.5, 0.0), &tq).unwrap();
    assert!(matches!(
        wigner_transform(&psi, &tq, Resolution { n_q: 60, n_p: 100 }, None),
        Err(Error::ResolutionTooCoarse { .. })
    ));
    let unit = TorusQuantization::new(100, TorusAction::Unit).unwrap();
    let psi = build_gaussian(WavePacketSpec::new(0.5, 0.5), &unit).unwrap();
    assert!(matches!(
        wigner_transform(&psi, &unit, Resolution::oversampled(100, 1), None),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn contour_distortion_ordering_along_the_reference_run() {
    let n = 200;
    let tq = TorusQuantization::doubled(n).unwrap();
    let orbit = table_one();
    let initial = build_gaussian(WavePacketSpec::new(0.5, 0.0), &tq).unwrap();
    let target = build_gaussian(WavePacketSpec::new(0.0, 0.0), &tq).unwrap();
    let centers = orbit.full_unwrapped();
    let res = Resolution::oversampled(n, 2);
    let mut finals = Vec::new();
    for scheme in [ControlScheme::SolA, ControlScheme::SolAImproved] {
        let run = propagate(&PropagationPlan::along(orbit.clone(), scheme), &tq, &initial, &target).unwrap();
        let densities = trace_densities(&run.trace, &centers, &tq, res).unwrap();
        for (t, w) in densities.iter().enumerate() {
            let two = extract_contours(w, ContourLevel::TwoSigma);
            let half = extract_contours(w, ContourLevel::HalfSigma);
            assert!(!two.is_fragmented() && !half.is_fragmented(), "{scheme} t = {t}");
            if scheme == ControlScheme::SolA && t > 0 {
                assert!(half.circularity() < two.circularity(), "t = {t}");
            }
        }
        finals.push(extract_contours(densities.last().unwrap(), ContourLevel::TwoSigma).circularity());
    }
    assert!(finals[0] > finals[1]);
}
