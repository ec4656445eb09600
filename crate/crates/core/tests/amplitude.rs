use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;
use wire_tdgl::amplitude::{self, EquilibriumKind, RGState, System};
use wire_tdgl::bifurcation::{self, BifCoeffs};
use wire_tdgl::{BoundaryCondition, Grid};

fn coeffs(current: f64) -> BifCoeffs {
    static C20: OnceLock<BifCoeffs> = OnceLock::new();
    assert_eq!(current, 20.0);
    *C20.get_or_init(|| {
        let g = Grid::chebyshev(64, BoundaryCondition::Dirichlet).unwrap();
        bifurcation::chi_coefficients(&g, current).unwrap()
    })
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-12 * (1.0 + a.norm().max(b.norm()))
}

fn cplx() -> impl Strategy<Value = Complex64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| Complex64::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn right_hand_sides_are_rotation_equivariant(
        a in cplx(),
        b in cplx(),
        k in 0usize..3,
        eps in -0.1f64..0.1,
    ) {
        let c = coeffs(20.0);
        let theta = [0.3, PI / 2.0, 2.0][k];
        let r = Complex64::from_polar(1.0, theta);

        let s = amplitude::AlphaState { alpha1: a, alpha2: b, tau: 0.0 };
        let sr = amplitude::AlphaState { alpha1: r * a, alpha2: r * b, tau: 0.0 };
        let (f1, f2) = amplitude::alpha_rhs(&s, c.chi11, c.chi12);
        let (g1, g2) = amplitude::alpha_rhs(&sr, c.chi11, c.chi12);
        prop_assert!(close(r * f1, g1) && close(r * f2, g2));

        let (f1, f2) = amplitude::omega_rhs(a, b, eps, c.lambda1.im, c.chi11, c.chi12);
        let (g1, g2) = amplitude::omega_rhs(r * a, r * b, eps, c.lambda1.im, c.chi11, c.chi12);
        prop_assert!(close(r * f1, g1) && close(r * f2, g2));

        let (f1, f2) = amplitude::beta_rhs(a, b, eps, c.lambda1.im, c.chi11, c.chi12);
        let (g1, g2) = amplitude::beta_rhs(r * a, r * b, eps, c.lambda1.im, c.chi11, c.chi12);
        prop_assert!(close(r * f1, g1) && close(r * f2, g2));

        let (ra, rg) = amplitude::beta_to_rg(a, b);
        let (sa, sg) = amplitude::beta_to_rg(r * a, r * b);
        prop_assert!((ra - sa).abs() < 1e-12 && (rg - sg).abs() < 1e-12);
    }

    #[test]
    fn gamma_zero_is_invariant(a in 0.0f64..3.0, eps in -0.1f64..0.1) {
        let c = coeffs(20.0);
        let (_, dg) = amplitude::rg_rhs(&RGState::new(a, 0.0), eps, c.chi_tilde, c.chi_hat, c.chi11);
        prop_assert_eq!(dg, 0.0);
    }

    #[test]
    fn triangle_is_invariant(a0 in 1e-4f64..0.02, frac in -1.0f64..=1.0) {
        let c = coeffs(20.0);
        let sys = System::rg(&c, 0.01);
        let traj = amplitude::integrate(&sys, &[a0, frac * a0], 200.0, 0.05, 1).unwrap();
        for y in &traj.states {
            prop_assert!(y[1].abs() <= y[0] + 1e-10, "{y:?}");
        }
    }

    #[test]
    fn gamma_matches_its_bound(a in cplx(), b in cplx()) {
        let (aa, g) = amplitude::beta_to_rg(a, b);
        prop_assert!(g.abs() <= 2.0 * a.norm() * b.norm() + 1e-12);
        prop_assert!(2.0 * a.norm() * b.norm() <= aa + 1e-12);
    }
}

#[test]
fn beta_system_reproduces_rg_trajectory() {
    let c = coeffs(20.0);
    let eps = 0.01;
    let b0 = [Complex64::new(0.02, 0.01), Complex64::new(-0.005, 0.015)];
    let y0 = [b0[0].re, b0[0].im, b0[1].re, b0[1].im];
    let t_end = 10.0 / eps;
    let beta = amplitude::integrate(&System::beta(&c, eps), &y0, t_end, 2e-3, 500).unwrap();
    let (a0, g0) = amplitude::beta_to_rg(b0[0], b0[1]);
    let rg = amplitude::integrate(&System::rg(&c, eps), &[a0, g0], t_end, 2e-3, 500).unwrap();
    assert_eq!(beta.times.len(), rg.times.len());
    let mut worst = 0.0f64;
    for (yb, yr) in beta.states.iter().zip(&rg.states) {
        let (a, g) = amplitude::beta_to_rg(Complex64::new(yb[0], yb[1]), Complex64::new(yb[2], yb[3]));
        worst = worst.max((a - yr[0]).abs()).max((g - yr[1]).abs());
    }
    assert!(worst < 1e-6, "{worst:e}");
}

#[test]
fn single_mode_phase_drift() {
    let c = coeffs(20.0);
    let traj = amplitude::integrate(&System::alpha(&c), &[0.3, 0.0, 0.0, 0.0], 60.0, 1e-3, 100).unwrap();
    let phase = |y: &[f64]| y[1].atan2(y[0]);
    let n = traj.states.len();
    let (i0, i1) = (n - 101, n - 1);
    let mut total = 0.0;
    for k in i0..i1 {
        let d = phase(&traj.states[k + 1]) - phase(&traj.states[k]);
        total += (d + PI).rem_euclid(2.0 * PI) - PI;
    }
    let rate = total / (traj.times[i1] - traj.times[i0]);
    let expected = c.chi11.im / c.chi11.re.abs();
    assert!((rate - expected).abs() < 1e-3, "{rate} vs {expected}");
    assert!(traj.last()[2] == 0.0 && traj.last()[3] == 0.0);
}

#[test]
fn alpha_system_settles_on_equal_moduli() {
    let c = coeffs(20.0);
    let traj = amplitude::integrate(&System::alpha(&c), &[0.2, 0.1, 0.05, -0.02], 80.0, 1e-3, 1000).unwrap();
    let y = traj.last();
    let (m1, m2) = (y[0].hypot(y[1]), y[2].hypot(y[3]));
    let target = (1.0 / c.chi_tilde.re).sqrt();
    assert!((m1 / m2 - 1.0).abs() < 1e-6, "{m1} {m2}");
    assert!((m1 - target).abs() < 1e-6);
    assert!(traj.halving_error.unwrap() < 1e-8);
}

#[test]
fn riccati_fixed_point_is_attracting() {
    let c = coeffs(20.0);
    assert_eq!(amplitude::riccati_rhs(1.0, 0.7, c.chi_hat), 0.0);
    assert!(amplitude::riccati_rhs(1.2, 0.7, c.chi_hat) < 0.0);
    assert!(amplitude::riccati_rhs(0.8, 0.7, c.chi_hat) > 0.0);
}

#[test]
fn equilibria_of_the_rg_system() {
    let c = coeffs(20.0);
    let eq = amplitude::equilibria(0.01, &c).unwrap();
    assert_eq!(eq.len(), 4);
    assert_eq!(eq[0].kind, EquilibriumKind::UnstableNode);
    assert_eq!(eq[1].kind, EquilibriumKind::StableNode);
    assert!(eq[2..].iter().all(|e| e.kind == EquilibriumKind::Saddle));
    let sys = System::rg(&c, 0.01);
    let mut dy = [0.0; 2];
    for e in &eq {
        sys.rhs(&[e.state.a, e.state.gamma], &mut dy);
        assert!(dy[0].abs() < 1e-15 && dy[1].abs() < 1e-15);
    }
    let mut sub = c;
    sub.chi_hat.re = -0.1;
    assert!(amplitude::equilibria(0.01, &sub).is_err());
}

#[test]
fn return_map_jacobian_matches_multipliers() {
    let c = coeffs(20.0);
    let eps = 0.01;
    let r = amplitude::poincare_return_eigs(eps, &c).unwrap();
    assert!(r.max_deviation() < 5.0 * eps * eps, "{}", r.max_deviation());
    assert!(amplitude::return_map_fixed_point_residual(eps, &c).unwrap() < 1e-9);
    let q = amplitude::poincare_return_eigs(eps, &c.positive_labeling()).unwrap();
    assert!(q.max_deviation() < 5.0 * eps * eps);
    assert!((q.mu - r.mu).abs() < 1e-9);
}

#[test]
fn integrate_rejects_bad_input_and_flags_blow_up() {
    let sys = System::Scalar { chi11: 0.5 };
    assert!(amplitude::integrate(&sys, &[0.1, 0.2], 1.0, 0.1, 1).is_err());
    assert!(amplitude::integrate(&sys, &[0.1], 1.0, 0.0, 1).is_err());
    let t = amplitude::integrate(&sys, &[1.0], 10.0, 1e-3, 10).unwrap();
    assert!(t.blown_up && t.halving_error.is_none());
    let t = amplitude::integrate(&System::Scalar { chi11: -0.5 }, &[0.01], 40.0, 1e-2, 100).unwrap();
    assert!((t.last()[0] - 2f64.sqrt()).abs() < 1e-8);
}
