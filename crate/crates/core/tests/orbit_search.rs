use ctarget::heteroclinic::{
    find_orbits, select_optimal, table_one, verify_orbit, ControlOrbit, SearchConfig,
};
use ctarget::torus::{KickedRotorParams, TorusAction};

fn params() -> KickedRotorParams {
    KickedRotorParams::new(8.0, TorusAction::Doubled).unwrap()
}

#[test]
fn reference_orbit_is_among_the_optimal_candidates() {
    let outcome = find_orbits(&SearchConfig::default(), &params()).unwrap();
    let reference = table_one();
    let closest = outcome
        .orbits
        .iter()
        .min_by(|a, b| {
            a.max_coordinate_difference(&reference)
                .total_cmp(&b.max_coordinate_difference(&reference))
        })
        .unwrap();
    assert!(closest.max_coordinate_difference(&reference) < 1e-6);
    let best = select_optimal(&outcome.orbits).unwrap();
    assert!((best.shift_sum() - closest.shift_sum()).abs() < 1e-14);
    assert!((best.shift_in - 8.198e-4).abs() < 1e-6);
    assert!((best.shift_out - 1.4889e-3).abs() < 1e-6);
}

#[test]
fn zero_steps_give_no_orbits() {
    let config = SearchConfig { tau: 0, ..SearchConfig::default() };
    assert!(find_orbits(&config, &params()).unwrap().is_empty());
}

#[test]
fn longer_orbits_converge() {
    let config = SearchConfig { tau: 7, ..SearchConfig::default() };
    let outcome = find_orbits(&config, &params()).unwrap();
    assert!(!outcome.is_empty());
    for orbit in &outcome.orbits {
        assert!(verify_orbit(orbit, &params()).max_residual < config.newton_tol);
    }
}

#[test]
fn selection_ignores_order() {
    let mut orbits = find_orbits(&SearchConfig::default(), &params()).unwrap().orbits;
    let first = select_optimal(&orbits).unwrap();
    orbits.reverse();
    assert_eq!(select_optimal(&orbits).unwrap(), first);
    orbits.rotate_left(17);
    assert_eq!(select_optimal(&orbits).unwrap(), first);
    assert_eq!(select_optimal(&orbits[3..4]).unwrap(), orbits[3]);
    assert!(select_optimal(&[]).is_err());
}

#[test]
fn verification_of_reference_and_perturbed_orbits() {
    let reference = table_one();
    assert!(verify_orbit(&reference, &params()).max_residual < 1e-10);
    let mut full = reference.full_unwrapped();
    full[3].0 += 1e-3;
    let bent = ControlOrbit::from_full_points(8.0, &full, (0.5, 0.0), (0.0, 0.0)).unwrap();
    assert!(verify_orbit(&bent, &params()).max_residual > 1e-3 * 8.0 / std::f64::consts::TAU);
    let still = ControlOrbit::from_full_points(8.0, &[(0.0, 0.0); 7], (0.0, 0.0), (0.0, 0.0)).unwrap();
    assert_eq!(verify_orbit(&still, &params()).max_residual, 0.0);
}

#[test]
fn orbit_files_round_trip() {
    let dir = std::env::temp_dir().join(format!("ctarget-orbit-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("orbit.json");
    let orbit = table_one();
    orbit.save(&path).unwrap();
    let back = ControlOrbit::load(&path).unwrap();
    assert!(back.max_coordinate_difference(&orbit) == 0.0);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn search_is_deterministic() {
    let a = find_orbits(&SearchConfig::default(), &params()).unwrap().orbits;
    let b = find_orbits(&SearchConfig::default(), &params()).unwrap().orbits;
    assert_eq!(a, b);
}

#[test]
fn optimal_orbit_is_the_reference_rather_than_its_mirror() {
    let outcome = find_orbits(&SearchConfig::default(), &params()).unwrap();
    let best = select_optimal(&outcome.orbits).unwrap();
    assert!(best.max_coordinate_difference(&table_one()) < 1e-6);
    let mirrored: Vec<(f64, f64)> = best.full_unwrapped().iter().map(|&(q, p)| (1.0 - q, -p)).collect();
    let twin = outcome
        .orbits
        .iter()
        .find(|o| {
            o.full_unwrapped()
                .iter()
                .zip(&mirrored)
                .all(|(a, b)| (a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9)
        })
        .expect("mirror image is found too");
    assert!((twin.shift_sum() - best.shift_sum()).abs() < 1e-15);
}
