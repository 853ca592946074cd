use std::f64::consts::PI;

use wgqed_core::experiments::{
    decay_experiment, run_scattering, run_scattering_with, sweep, SweepSpec, SweepVariable,
};
use wgqed_core::model::{build_grid, BareParams, FrequencyWindow, SimulationConfig};
use wgqed_core::observables::lorentzian_reflection;
use wgqed_core::oracle::{build_hamiltonian, exact_propagate, to_interaction_picture};
use wgqed_core::propagator::{
    propagate, rk4_step, PropagateOptions, Rk4Integrator, RkScheme, TimeGrid,
};
use wgqed_core::renorm::renormalize;
use wgqed_core::state::{atom_excited_state, init_gaussian, WavepacketSpec};

fn config(length: f64, ir: f64, uv: f64, omega_0: f64, gamma: f64) -> SimulationConfig {
    SimulationConfig::new(
        length,
        FrequencyWindow::new(ir, uv).unwrap(),
        BareParams::new(omega_0, gamma).unwrap(),
    )
    .unwrap()
}

fn baseline(ir: f64, uv: f64) -> SimulationConfig {
    config(100.0, ir, uv, 10.0 * PI, PI)
}

fn packet(k_p: f64) -> WavepacketSpec {
    WavepacketSpec::new(k_p, 0.05 * PI, -25.0)
}

#[test]
fn single_step_on_toy_grid_matches_exact() {
    // k = 1, 2, 3
    let c = config(2.0 * PI, 0.5, 3.5, 2.0, 0.8);
    let g = build_grid(&c).unwrap();
    let psi0 = atom_excited_state(&g);
    let rk = rk4_step(&psi0, 0.0, 0.01, &c, &g).unwrap();
    let exact = exact_propagate(&psi0, 0.01, &build_hamiltonian(&c, &g).unwrap()).unwrap();
    let exact = to_interaction_picture(&exact, 0.01, &c, &g).unwrap();
    assert!(rk.distance(&exact).unwrap() < 1e-10);
}

#[test]
fn atomic_population_tracks_exact_pointwise() {
    // n = 11..=26: 16 modes per channel
    let s = 2.0 * PI / 16.0;
    let c = config(16.0, 10.5 * s, 26.5 * s, 18.2 * s, 1.3);
    let g = build_grid(&c).unwrap();
    assert_eq!(g.len(), 16);
    let eig = build_hamiltonian(&c, &g).unwrap().eigen().unwrap();
    let psi0 = atom_excited_state(&g);
    let tgrid = TimeGrid::with_step(3.0, 0.001).unwrap();
    let traj = propagate(
        &psi0,
        &tgrid,
        &c,
        &g,
        &PropagateOptions {
            record_every: Some(100),
            ..Default::default()
        },
    )
    .unwrap();
    for p in &traj.points {
        let b = eig.propagate(&psi0, p.t).unwrap().atom();
        assert!((p.probs.atomic - b.norm_sqr()).abs() < 1e-8, "t = {}", p.t);
    }
}

#[test]
fn interaction_picture_amplitudes_agree_in_phase() {
    let c = config(20.0, 3.0, 9.0, 6.0, 0.9);
    let g = build_grid(&c).unwrap();
    let psi0 = init_gaussian(&g, &WavepacketSpec::new(6.2, 0.4, -2.0)).unwrap();
    let t = 4.0;
    let rk = propagate(
        &psi0,
        &TimeGrid::new(t, 4000).unwrap(),
        &c,
        &g,
        &PropagateOptions::default(),
    )
    .unwrap()
    .final_state;
    let exact = exact_propagate(&psi0, t, &build_hamiltonian(&c, &g).unwrap()).unwrap();
    let exact = to_interaction_picture(&exact, t, &c, &g).unwrap();
    let overlap = rk.inner(&exact).unwrap();
    assert!((overlap.re - 1.0).abs() < 1e-9);
    assert!(overlap.im.abs() < 1e-9);
}

#[test]
fn forward_then_backward_returns_initial_state() {
    let c = config(20.0, 3.0, 9.0, 6.0, 0.9);
    let g = build_grid(&c).unwrap();
    let psi0 = init_gaussian(&g, &WavepacketSpec::new(6.0, 0.5, -3.0)).unwrap();
    let (n, dt) = (3000, 0.002);
    let mut rk = Rk4Integrator::new(&c, &g, RkScheme::Classical);
    let mut psi = psi0.clone();
    for i in 0..n {
        rk.step(psi.amplitudes_mut(), i as f64 * dt, dt);
    }
    assert!(psi.distance(&psi0).unwrap() > 0.1);
    for i in (1..=n).rev() {
        rk.step(psi.amplitudes_mut(), i as f64 * dt, -dt);
    }
    assert!(psi.distance(&psi0).unwrap() < 1e-7);
}

#[test]
fn baseline_run_norm_and_trajectory_shape() {
    let c = baseline(0.0, 20.0 * PI);
    let tgrid = TimeGrid::with_step(50.0, 0.01).unwrap();
    let rec = run_scattering(&c, &packet(10.0 * PI), &tgrid).unwrap();
    let traj = &rec.trajectory;
    assert_eq!(traj.points.len(), tgrid.n_steps() + 1);
    for (n, p) in traj.points.iter().enumerate() {
        assert_eq!(p.t, tgrid.time(n));
        assert!((p.probs.total() - p.norm_sqr).abs() < 1e-12);
    }
    // RK4 is not unitary; drift at dt = 0.01 on this window is a few 1e-7
    let drift = traj
        .points
        .iter()
        .map(|p| (p.norm_sqr.sqrt() - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(drift < 1e-6, "drift {drift:e}");
    assert!(rec.final_a < 1e-3);
}

#[test]
fn decay_fit_is_exponential_for_the_centered_baseline() {
    let fit = decay_experiment(
        &baseline(0.0, 20.0 * PI),
        &TimeGrid::new(2.5, 500).unwrap(),
        None,
    )
    .unwrap();
    assert!(fit.exponential, "residual {}", fit.residual);
    assert!(fit.gamma_fit > 0.0);
    assert!((fit.omega_a_fit - 10.0 * PI).abs() < 0.005 * 10.0 * PI);
    assert!((fit.gamma_fit - 3.2448804048237389).abs() < 0.05 * 3.2448804048237389);
}

#[test]
fn weak_coupling_decay_is_not_renormalized() {
    let gamma = 0.01 * PI;
    let c = config(100.0, 0.0, 20.0 * PI, 10.0 * PI, gamma);
    let fit = decay_experiment(&c, &TimeGrid::new(49.0, 4900).unwrap(), None).unwrap();
    assert!((fit.gamma_fit / gamma - 1.0).abs() < 0.01);
}

#[test]
fn single_value_sweep_equals_direct_run() {
    let c = baseline(8.0 * PI, 12.0 * PI);
    let tgrid = TimeGrid::new(50.0, 2000).unwrap();
    let k_p = 10.0 * PI + 0.4;
    let spec = SweepSpec::new(
        SweepVariable::OmegaP,
        vec![k_p],
        c,
        packet(10.0 * PI),
        tgrid,
    )
    .unwrap();
    let row = &sweep(&spec).rows[0];
    let direct = run_scattering_with(&c, &packet(k_p), &tgrid, &spec.options).unwrap();
    assert_eq!(row.r_sim, direct.final_r);
    assert_eq!(row.t_sim, direct.final_t);
    assert_eq!(row.r_th_bare, lorentzian_reflection(k_p, &c.bare()));
}

#[test]
fn sweeps_are_bit_reproducible() {
    let c = baseline(8.0 * PI, 12.0 * PI);
    let values: Vec<f64> = (0..5)
        .map(|i| 10.0 * PI - PI + i as f64 * PI / 2.0)
        .collect();
    let spec = SweepSpec::new(
        SweepVariable::OmegaP,
        values,
        c,
        packet(10.0 * PI),
        TimeGrid::new(50.0, 1000).unwrap(),
    )
    .unwrap();
    let a = sweep(&spec);
    let b = sweep(&spec);
    let bits = |t: &wgqed_core::experiments::SweepTable| -> Vec<u64> {
        t.rows.iter().map(|r| r.r_sim.to_bits()).collect()
    };
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn narrowing_centered_windows_broaden_the_resonance() {
    let values: Vec<f64> = (0..9)
        .map(|i| 10.0 * PI - PI + i as f64 * PI / 4.0)
        .collect();
    let spacing = PI / 4.0;
    let mut wing = Vec::new();
    for (ir, uv) in [(6.0, 14.0), (7.0, 13.0), (8.0, 12.0)] {
        let c = baseline(ir * PI, uv * PI);
        let spec = SweepSpec::new(
            SweepVariable::OmegaP,
            values.clone(),
            c,
            packet(10.0 * PI),
            TimeGrid::with_step(50.0, 0.01).unwrap(),
        )
        .unwrap();
        let table = sweep(&spec);
        let peak = table
            .rows
            .iter()
            .max_by(|a, b| a.r_sim.total_cmp(&b.r_sim))
            .unwrap();
        assert!((peak.omega_p - 10.0 * PI).abs() <= spacing);
        // off-resonant reflection grows with the effective width
        wing.push(table.rows[0].r_sim);
        let rep = renormalize(&c.bare(), &c.window()).unwrap();
        assert!(rep.physical.gamma_phys > PI);
    }
    assert!(wing[0] < wing[1] && wing[1] < wing[2], "{wing:?}");
}
