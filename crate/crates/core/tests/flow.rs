//! Properties of the truncated flow checked across module boundaries.

mod common;

use qnls_core::flow::{
    check_factorization, evolve_ungauged, growth_monitor, jacobian_det, picard_local_time, picard_solve,
};
use qnls_core::spectral::{conserved_c_truncated, mass, GridSpec};
use qnls_core::{evolve, evolve_trajectory, Complex64, FlowParams, FourierState};

use common::draw;

fn scaled(u: &FourierState, a: f64) -> FourierState {
    FourierState::from_coeffs(u.m_ambient(), u.coeffs().iter().map(|c| c * a).collect()).unwrap()
}

#[test]
fn backward_flow_inverts_forward_flow() {
    for (n, seed) in [(4usize, 1u64), (8, 2), (16, 3)] {
        let u0 = scaled(&draw(2.0, 16, seed, 0), 0.5);
        let p = FlowParams::new(n, 1e-3).unwrap();
        let back = evolve(&evolve(&u0, 1.0, &p).unwrap(), -1.0, &p).unwrap();
        let err = back.sobolev_distance(&u0, 1.0);
        assert!(err <= 1e-7, "N = {n}: round trip error {err:e}");
    }
}

#[test]
fn gauged_and_ungauged_integrators_agree() {
    let u0 = scaled(&draw(2.0, 6, 11, 0), 0.6);
    let p = FlowParams::new(4, 1e-4).unwrap();
    let a = evolve(&u0, 0.5, &p).unwrap();
    let b = evolve_ungauged(&u0, 0.5, &p).unwrap();
    let gap = a.max_abs_diff(&b);
    assert!(gap <= 1e-10, "gauge paths differ by {gap:e}");
}

#[test]
fn flow_is_a_group_in_time() {
    let u0 = scaled(&draw(2.0, 8, 12, 0), 0.5);
    let p = FlowParams::new(8, 1e-3).unwrap();
    let once = evolve(&u0, 0.6, &p).unwrap();
    let twice = evolve(&evolve(&u0, 0.25, &p).unwrap(), 0.35, &p).unwrap();
    assert!(once.max_abs_diff(&twice) <= 1e-9);
}

#[test]
fn symmetries_commute_with_the_flow() {
    let u0 = scaled(&draw(2.0, 8, 13, 0), 0.5);
    let p = FlowParams::new(6, 1e-3).unwrap();
    let direct = evolve(&u0, 0.4, &p).unwrap();
    let rotated = evolve(&u0.rotate_phase(0.7), 0.4, &p).unwrap().rotate_phase(-0.7);
    let shifted = evolve(&u0.translate(1.3), 0.4, &p).unwrap().translate(-1.3);
    assert!(direct.max_abs_diff(&rotated) <= 1e-12);
    assert!(direct.max_abs_diff(&shifted) <= 1e-12);
}

#[test]
fn jacobian_determinant_composes() {
    let u0 = draw(2.0, 2, 14, 0);
    let p = FlowParams::new(2, 1e-3).unwrap();
    let d1 = jacobian_det(&u0, 0.3, &p).unwrap();
    let d2 = jacobian_det(&evolve(&u0, 0.3, &p).unwrap(), 0.4, &p).unwrap();
    let d12 = jacobian_det(&u0, 0.7, &p).unwrap();
    assert!((d12 - d1 * d2).abs() <= 1e-9);
    assert!((d12 - 1.0).abs() <= 1e-6);
}

#[test]
fn larger_truncations_approach_the_reference_flow() {
    let u0 = draw(2.0, 64, 15, 0);
    let t = 0.1;
    let reference = evolve(&u0, t, &FlowParams::new(64, 1e-3).unwrap()).unwrap();
    let dist: Vec<f64> = [4usize, 8, 16, 32]
        .iter()
        .map(|&n| evolve(&u0, t, &FlowParams::new(n, 1e-3).unwrap()).unwrap().sobolev_distance(&reference, 0.5))
        .collect();
    assert!(dist.windows(2).all(|w| w[1] < w[0]), "distances {dist:?}");
}

#[test]
fn picard_contracts_and_matches_the_integrator() {
    let u0 = scaled(&draw(2.0, 8, 16, 0), 0.3);
    let p = FlowParams::new(8, 1e-4).unwrap();
    let t = 0.5 * picard_local_time(&u0);
    let r = picard_solve(&u0, t, &p, 8).unwrap();
    for w in r.increments.windows(2).filter(|w| w[0] > 1e-13) {
        assert!(w[1] <= 2.0 / 3.0 * w[0], "increments {:?}", r.increments);
    }
    let gap = r.state.max_abs_diff(&evolve(&u0, t, &p).unwrap());
    assert!(gap <= 1e-10, "Picard vs RK4 gap {gap:e}");
}

#[test]
fn factorization_holds_on_random_states() {
    let p = FlowParams::new(6, 1e-3).unwrap();
    for i in 0..3 {
        let u0 = scaled(&draw(2.0, 12, 17, i), 0.5);
        assert!(check_factorization(&u0, 0.7, &p).unwrap() <= 1e-12);
    }
    let high = FourierState::from_fn(12, |k| if k.abs() > 6 { Complex64::new(0.1, 0.2) } else { Complex64::new(0.0, 0.0) })
        .unwrap();
    assert_eq!(check_factorization(&high, 0.7, &p).unwrap(), 0.0);
}

#[test]
fn monitor_accepts_a_long_trajectory() {
    let u0 = scaled(&draw(2.0, 16, 18, 0), 0.5);
    let p = FlowParams::new(16, 1e-3).unwrap();
    let tr = evolve_trajectory(&u0, 1.0, &p, 11).unwrap();
    let rep = growth_monitor(&tr, 1.0, &p, 1e-8).unwrap();
    assert!(rep.max_bound_ratio <= 1.0);
    assert!(rep.mass_rel_drift <= 1e-8 && rep.c_rel_drift <= 1e-8);
    let grid = GridSpec::for_quintic(16);
    let last = tr.states.last().unwrap();
    assert!((mass(last) - mass(&u0)).abs() <= 1e-8 * mass(&u0));
    let c0 = conserved_c_truncated(&u0, 16, &grid).unwrap();
    assert!((conserved_c_truncated(last, 16, &grid).unwrap() - c0).abs() <= 1e-8 * c0);
}

#[test]
fn trajectory_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let u0 = scaled(&draw(2.0, 4, 19, 0), 0.5);
    let p = FlowParams::new(4, 1e-3).unwrap();
    let tr = evolve_trajectory(&u0, 0.2, &p, 3).unwrap();
    tr.write_dir(dir.path(), &serde_json::json!({ "n_cut": 4 }), Some(19)).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["schema_version"], 1);
    assert_eq!(manifest["seed"], 19);
    let files = manifest["files"].as_array().unwrap();
    assert_eq!(files.len(), 3);
    let last = FourierState::read_snapshot(dir.path().join(files[2].as_str().unwrap())).unwrap();
    assert_eq!(&last, tr.states.last().unwrap());
}
