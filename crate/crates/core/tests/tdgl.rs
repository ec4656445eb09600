use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use wire_tdgl::config::{InitKind, RunConfig};
use wire_tdgl::tdgl::{self, SimConfig, Stepper, WireState};
use wire_tdgl::{bifurcation, spectral};
use wire_tdgl::{BoundaryCondition, Grid, GridFunction};

fn max_dev(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn random_state(grid: &Arc<Grid>, seed: u64, amp: f64, pt: bool, current: f64, gamma: f64) -> WireState {
    let cfg = SimConfig {
        init: if pt { InitKind::RandomPt } else { InitKind::Random },
        init_amp: amp,
        seed,
        current,
        ..Default::default()
    };
    let v = tdgl::initial_data(&cfg, grid).unwrap();
    WireState::new(GridFunction::new(Arc::clone(grid), v).unwrap(), current, gamma)
}

fn evolve(mut s: WireState, dt: f64, steps: usize) -> WireState {
    let mut st = Stepper::new(s.grid(), s.current, s.gamma, dt).unwrap();
    for _ in 0..steps {
        s = st.step(&s).unwrap();
    }
    s
}

#[test]
fn pt_symmetry_is_preserved() {
    let cfg = SimConfig {
        n: 48,
        current: 20.0,
        eps: 0.05,
        dt: 5e-3,
        t_end: 50.0,
        init: InitKind::RandomPt,
        init_amp: 0.3,
        seed: 7,
        stride: 200,
        ..Default::default()
    };
    let r = tdgl::simulate(&cfg).unwrap();
    assert!(r.summary.aborted.is_none());
    let worst = r
        .trajectory
        .snapshots
        .iter()
        .map(|s| max_dev(&s.psi, &s.psi.pt_conjugate()))
        .fold(0.0, f64::max);
    assert!(worst <= 1e-8, "{worst:e}");
}

#[test]
fn evolution_commutes_with_phase_rotation() {
    let g = Grid::chebyshev(48, BoundaryCondition::Dirichlet).unwrap();
    let s = random_state(&g, 3, 0.5, false, 15.0, 8.0);
    let r = Complex64::from_polar(1.0, 1.1);
    let rotated = WireState::new(s.psi.scale(r), s.current, s.gamma);
    let a = evolve(s, 1e-2, 300);
    let b = evolve(rotated, 1e-2, 300);
    assert!(max_dev(&a.psi.scale(r), &b.psi) <= 1e-8);
}

#[test]
fn second_order_in_time() {
    let g = Grid::chebyshev(40, BoundaryCondition::Dirichlet).unwrap();
    // at larger amplitude or dt the explicit nonlinear term is still pre-asymptotic
    let s = random_state(&g, 11, 0.3, false, 6.0, 4.0);
    let runs: Vec<WireState> = [1.25e-3, 6.25e-4, 3.125e-4]
        .iter()
        .map(|&dt| evolve(s.clone(), dt, (1.0 / dt).round() as usize))
        .collect();
    let e1 = max_dev(&runs[0].psi, &runs[1].psi);
    let e2 = max_dev(&runs[1].psi, &runs[2].psi);
    let ratio = e1 / e2;
    assert!((ratio / 4.0 - 1.0).abs() < 0.2, "ratio {ratio}, {e1:e} {e2:e}");
    assert!((runs[2].t - 1.0).abs() < 1e-12);
}

#[test]
fn linear_evolution_of_the_leading_mode() {
    let g = Grid::chebyshev(48, BoundaryCondition::Dirichlet).unwrap();
    for current in [5.0, 20.0] {
        let p = spectral::eigenpairs(&g, current, 1).unwrap().remove(0);
        let gamma = p.lambda.re + 0.3;
        let s = WireState::new(p.u.clone(), current, gamma);
        let mut st = Stepper::new(&g, current, gamma, 1e-3).unwrap().linear_only();
        let mut x = s;
        for _ in 0..1000 {
            x = st.step(&x).unwrap();
        }
        let mu = -(p.lambda - gamma);
        let exact = p.u.scale((mu * x.t).exp());
        // Crank-Nicolson amplification factor, exact for the discrete mode
        let h = 0.5e-3 * mu;
        let discrete = p.u.scale(((1.0 + h) / (1.0 - h)).powi(1000));
        assert!(max_dev(&x.psi, &discrete) < 1e-9 * exact.max_abs(), "I = {current}");
        assert!(max_dev(&x.psi, &exact) < 5e-5 * exact.max_abs(), "I = {current}");
    }
}

#[test]
fn total_current_is_uniform() {
    let g = Grid::chebyshev(48, BoundaryCondition::Dirichlet).unwrap();
    for seed in 0..5 {
        let s = random_state(&g, seed, 1.0, seed % 2 == 0, 9.0, 3.0);
        assert!(tdgl::total_current_deviation(&s) <= 1e-6);
        let s = evolve(s, 1e-2, 50);
        assert!(tdgl::total_current_deviation(&s) <= 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn nonlinearity_is_cubic(seed in 0u64..1000, s in 0.01f64..10.0) {
        let g = Grid::chebyshev(48, BoundaryCondition::Dirichlet).unwrap();
        let a = random_state(&g, seed, 1.0, false, 0.0, 0.0);
        let b = WireState::new(a.psi.scale(Complex64::new(s, 0.0)), 0.0, 0.0);
        let (na, nb) = (tdgl::nonlinearity(&a), tdgl::nonlinearity(&b));
        prop_assert!(max_dev(&na.scale(Complex64::new(s.powi(3), 0.0)), &nb) <= 1e-12 * nb.max_abs().max(1.0));
    }
}

#[test]
fn cubic_h1_bound_with_one_constant() {
    let g = Grid::chebyshev(64, BoundaryCondition::Dirichlet).unwrap();
    let mut worst = 0.0f64;
    for seed in 0..50 {
        let amp = 10f64.powf(-2.0 + 3.0 * (seed as f64) / 49.0);
        let s = random_state(&g, seed, amp, seed % 3 == 0, 0.0, 0.0);
        let ratio = tdgl::nonlinearity(&s).norm_l2() / s.psi.norm_h1().powi(3);
        worst = worst.max(ratio);
    }
    // |ψ|_∞² ≤ 2|ψ|_{L²}|ψ_x|_{L²} on [-1, 1] with ψ(±1) = 0 gives C = 2
    assert!(worst <= 2.0, "{worst}");
}

#[test]
fn subcritical_branch_is_a_threshold() {
    let g = Grid::chebyshev(48, BoundaryCondition::Dirichlet).unwrap();
    let c = bifurcation::chi_coefficients(&g, 11.5).unwrap();
    assert!(c.chi11.re > 0.0);
    let eps: f64 = -0.02;
    let a_star = (eps.abs() / c.chi11.re).sqrt();
    let u1 = spectral::eigenpairs(&g, 11.5, 1).unwrap().remove(0);
    let run = |factor: f64| {
        let gamma = u1.lambda.re + eps;
        let s = WireState::new(u1.u.scale(Complex64::new(factor * a_star, 0.0)), 11.5, gamma);
        let cfg = SimConfig { dt: 1e-2, t_end: 150.0, stride: 500, ..Default::default() };
        tdgl::simulate_from(s, &cfg, u1.lambda).unwrap()
    };
    let outside = run(1.5);
    let inside = run(0.5);
    let at0 = |r: &tdgl::SimResult| r.trajectory.observables.iter().map(|o| o.psi_at_0.norm()).collect::<Vec<_>>();
    let (o, i) = (at0(&outside), at0(&inside));
    assert!(o.last().unwrap() > &(2.0 * o[0]), "{o:?}");
    assert!(i.last().unwrap() < &(0.2 * i[0]), "{i:?}");
}

#[test]
fn simulate_is_deterministic_and_round_trips_through_disk() {
    let cfg = RunConfig::parse("n = 32\nI = 14\ndt = 0.01\nt_end = 3\nstride = 50\ninit = random_pt\ninit_amp = 0.2\nseed = 5\n").unwrap();
    let sim = SimConfig::from_run(&cfg);
    let a = tdgl::simulate(&sim).unwrap();
    let b = tdgl::simulate(&sim).unwrap();
    assert_eq!(a.summary, b.summary);
    let dir = tempfile::tempdir().unwrap();
    tdgl::write_run(dir.path(), &a, &cfg).unwrap();
    let (manifest, traj) = tdgl::read_run(dir.path()).unwrap();
    assert_eq!(manifest.summary, a.summary);
    assert_eq!(traj.snapshots.len(), a.trajectory.snapshots.len());
    for (x, y) in traj.snapshots.iter().zip(&a.trajectory.snapshots) {
        assert!(max_dev(&x.psi, &y.psi) < 1e-14 && x.t == y.t);
    }
    let mut from_file = sim.clone();
    from_file.init = InitKind::File(dir.path().join("snapshot_000000.csv"));
    let start = tdgl::initial_data(&from_file, traj.grid()).unwrap();
    let first = a.trajectory.snapshots[0].psi.values();
    assert!(start.iter().zip(first).all(|(x, y)| (x - y).norm() < 1e-14));
}

#[test]
fn stepper_rejects_mismatched_state() {
    let g = Grid::chebyshev(24, BoundaryCondition::Dirichlet).unwrap();
    let s = WireState::new(GridFunction::zeros(Arc::clone(&g)), 1.0, 1.0);
    let mut st = Stepper::new(&g, 2.0, 1.0, 0.1).unwrap();
    assert!(st.step(&s).is_err());
    assert!(Stepper::new(&g, 2.0, 1.0, 0.0).is_err());
}
