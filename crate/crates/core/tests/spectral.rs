use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use wire_tdgl::spectral;
use wire_tdgl::{BoundaryCondition, Grid};

fn closed_under_conjugation(set: &[Complex64], pool: &[Complex64], tol: f64) -> bool {
    set.iter().all(|l| pool.iter().any(|m| (l.conj() - m).norm() <= tol * (1.0 + l.norm())))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectrum_is_closed_under_conjugation(current in 0.0f64..40.0, k in 1usize..8, neumann in any::<bool>()) {
        let bc = if neumann { BoundaryCondition::Neumann } else { BoundaryCondition::Dirichlet };
        let g = Grid::chebyshev(64, bc).unwrap();
        // one extra value so a pair split by the cut still finds its partner
        let pool = spectral::eigenvalues(&g, current, k + 1).unwrap();
        prop_assert!(closed_under_conjugation(&pool[..k], &pool, 1e-7), "I = {current}: {pool:?}");
    }

    #[test]
    fn eigenvalues_are_sorted_by_real_part(current in 0.0f64..40.0) {
        let g = Grid::chebyshev(48, BoundaryCondition::Dirichlet).unwrap();
        let l = spectral::eigenvalues(&g, current, 6).unwrap();
        for w in l.windows(2) {
            prop_assert!(w[0].re <= w[1].re + 1e-6 * (1.0 + w[1].re.abs()));
        }
    }
}

#[test]
fn positivity_and_imaginary_bound() {
    let g = Grid::chebyshev(96, BoundaryCondition::Dirichlet).unwrap();
    for current in [0.0, 5.0, 12.31, 20.0] {
        let l = spectral::eigenvalues(&g, current, 10).unwrap();
        assert!(l.iter().all(|z| z.re > 0.0), "I = {current}");
        assert!(l.iter().all(|z| z.im.abs() < current + 1e-6), "I = {current}");
    }
}

#[test]
fn leading_eigenvalue_is_converged_at_128_nodes() {
    let coarse = Grid::chebyshev(128, BoundaryCondition::Dirichlet).unwrap();
    let fine = Grid::chebyshev(256, BoundaryCondition::Dirichlet).unwrap();
    for current in [0.0, 7.0, 15.0, 30.0] {
        let a = spectral::eigenvalues(&coarse, current, 1).unwrap()[0];
        let b = spectral::eigenvalues(&fine, current, 1).unwrap()[0];
        assert!((a - b).norm() <= 1e-8, "I = {current}: {a} vs {b}");
    }
}

#[test]
fn agrees_with_finite_difference_oracle() {
    let g = Grid::chebyshev(96, BoundaryCondition::Dirichlet).unwrap();
    for current in [5.0, 12.31, 20.0] {
        let l = spectral::eigenvalues(&g, current, 1).unwrap()[0];
        let fd = spectral::fd_leading_eigenvalue_extrapolated(2001, current, BoundaryCondition::Dirichlet, l).unwrap();
        assert!((l - fd).norm() < 1e-4, "I = {current}: {l} vs {fd}");
    }
}

#[test]
fn real_modes_are_pt_symmetric() {
    let g = Grid::chebyshev(64, BoundaryCondition::Dirichlet).unwrap();
    for current in [3.0, 8.0, 12.0] {
        for p in spectral::eigenpairs(&g, current, 2).unwrap() {
            assert!(p.lambda.im.abs() < spectral::COMPLEX_TOL);
            let d = p.u.pt_conjugate();
            let dev = p.u.values().iter().zip(d.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(dev < 1e-6, "I = {current}, λ = {}: {dev:e}", p.lambda);
        }
    }
}

#[test]
fn zero_current_spectra() {
    let g = Grid::chebyshev(64, BoundaryCondition::Dirichlet).unwrap();
    let l = spectral::eigenvalues(&g, 0.0, 5).unwrap();
    for (k, z) in l.iter().enumerate() {
        let exact = (PI * (k + 1) as f64 / 2.0).powi(2);
        assert!((z.re - exact).abs() < 1e-8 && z.im.abs() < 1e-10);
    }
    let g = Grid::chebyshev(64, BoundaryCondition::Neumann).unwrap();
    let l = spectral::eigenvalues(&g, 0.0, 4).unwrap();
    for (k, z) in l.iter().enumerate() {
        let exact = (PI * k as f64 / 2.0).powi(2);
        assert!((z.re - exact).abs() < 1e-8, "{k}: {z}");
    }
}

#[test]
fn collisions_in_both_boundary_conditions() {
    let g = Grid::chebyshev(96, BoundaryCondition::Dirichlet).unwrap();
    let ic = spectral::find_collision(&g, 1, 10.0, 14.0).unwrap();
    assert!((ic - 12.31).abs() < 0.05);
    let below = spectral::eigenvalues(&g, ic - 1e-3, 2).unwrap();
    let above = spectral::eigenvalues(&g, ic + 1e-3, 2).unwrap();
    assert!(below.iter().all(|z| z.im.abs() < 1e-7));
    assert!(above.iter().all(|z| z.im.abs() > 1e-3));
    assert!(spectral::find_collision(&g, 1, 13.0, 14.0).is_err());

    let g = Grid::chebyshev(96, BoundaryCondition::Neumann).unwrap();
    let ic = spectral::find_collision(&g, 1, 1.0, 4.0).unwrap();
    assert!((ic - 2.27).abs() < 0.05, "{ic}");
}

#[test]
fn real_below_the_reality_bounds() {
    for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
        let g = Grid::chebyshev(96, bc).unwrap();
        let bound = spectral::reality_bound(bc);
        for j in 0..=8 {
            let current = bound * j as f64 / 8.0;
            let l = spectral::eigenvalues(&g, current, 6).unwrap();
            assert!(l.iter().all(|z| z.im.abs() <= 1e-7), "{bc} I = {current}: {l:?}");
        }
    }
}

#[test]
fn invalid_inputs() {
    let g = Grid::chebyshev(32, BoundaryCondition::Dirichlet).unwrap();
    assert!(spectral::eigenvalues(&g, -1.0, 2).is_err());
    assert!(spectral::eigenvalues(&g, f64::NAN, 2).is_err());
    assert!(spectral::eigenvalues(&g, 1.0, 40).is_err());
}
