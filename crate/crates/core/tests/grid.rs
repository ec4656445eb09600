use num_complex::Complex64;
use proptest::prelude::*;
use wire_tdgl::{BoundaryCondition, Grid, GridFunction};

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

fn derivative_coeffs(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, a)| k as f64 * a).collect()
}

fn poly_case() -> impl Strategy<Value = (usize, Vec<f64>)> {
    prop_oneof![Just(16usize), Just(24), Just(33), Just(48)].prop_flat_map(|n| {
        (Just(n), prop::collection::vec(-1.0f64..1.0, 1..=n - 1))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn d1_is_exact_on_polynomials((n, c) in poly_case()) {
        let g = Grid::chebyshev(n, BoundaryCondition::Dirichlet).unwrap();
        let v = g.sample_real(|x| horner(&c, x));
        let dv = g.diff(&v);
        let dc = derivative_coeffs(&c);
        for (x, d) in g.nodes().iter().zip(&dv) {
            prop_assert!((d.re - horner(&dc, *x)).abs() < 1e-8, "n = {n}, x = {x}");
            prop_assert!(d.im == 0.0);
        }
    }

    #[test]
    fn d2_is_exact_on_polynomials((n, c) in poly_case()) {
        let g = Grid::chebyshev(n, BoundaryCondition::Neumann).unwrap();
        let v = g.sample_real(|x| horner(&c, x));
        let d2c = derivative_coeffs(&derivative_coeffs(&c));
        let scale = 1.0 + d2c.iter().map(|a| a.abs()).sum::<f64>();
        for (x, d) in g.nodes().iter().zip(g.diff2(&v)) {
            prop_assert!((d.re - horner(&d2c, *x)).abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn antiderivative_then_d1_recovers_input(
        n in 32usize..72,
        a in -2.0f64..2.0,
        b in -3.0f64..3.0,
        w in 0.5f64..4.0,
    ) {
        let g = Grid::chebyshev(n, BoundaryCondition::Dirichlet).unwrap();
        let f = GridFunction::from_fn(g, |x| Complex64::new(a * (w * x).cos(), b * (-x * x).exp()));
        let back = f.antiderivative_from_zero().derivative();
        for (u, v) in f.values().iter().zip(back.values()) {
            prop_assert!((u - v).norm() < 1e-8);
        }
        prop_assert!(f.antiderivative_from_zero().interpolate_at(0.0).unwrap().norm() < 1e-12);
    }

    #[test]
    fn quadrature_matches_antiderivative_difference(
        n in 16usize..90,
        c in prop::collection::vec(-1.0f64..1.0, 1..12),
        phase in 0.0f64..6.0,
    ) {
        let g = Grid::chebyshev(n, BoundaryCondition::Neumann).unwrap();
        let f = GridFunction::from_fn(g.clone(), |x| Complex64::from_polar(horner(&c, x), phase * x));
        let prim = f.antiderivative_from_zero();
        let at = |x: f64| prim.interpolate_at(x).unwrap();
        prop_assert!((f.quadrature() - (at(1.0) - at(-1.0))).norm() < 1e-10);
    }
}

#[test]
fn odd_grids_contain_the_origin() {
    let g = Grid::chebyshev(33, BoundaryCondition::Dirichlet).unwrap();
    assert!(g.nodes().iter().any(|x| *x == 0.0));
    let g = Grid::chebyshev(32, BoundaryCondition::Dirichlet).unwrap();
    assert!(g.nodes().iter().all(|x| *x != 0.0));
}

#[test]
fn rejects_tiny_grids_and_outside_points() {
    assert!(Grid::chebyshev(4, BoundaryCondition::Dirichlet).is_err());
    let g = Grid::chebyshev(16, BoundaryCondition::Dirichlet).unwrap();
    let v = g.sample_real(|x| x);
    assert!(g.interp(&v, 1.5).is_err());
    assert!((g.interp(&v, 0.3).unwrap().re - 0.3).abs() < 1e-13);
}

#[test]
fn pt_conjugate_is_an_involution() {
    let g = Grid::chebyshev(41, BoundaryCondition::Dirichlet).unwrap();
    let f = GridFunction::from_fn(g, |x| Complex64::new(x.sin() + x * x, (2.0 * x).cos() - x));
    let back = f.pt_conjugate().pt_conjugate();
    for (u, v) in f.values().iter().zip(back.values()) {
        assert!((u - v).norm() < 1e-15);
    }
    let p = f.pt_conjugate();
    for (&x, z) in p.grid().nodes().iter().zip(p.values()) {
        assert!((z - Complex64::new((-x).sin() + x * x, (-2.0 * x).cos() + x).conj()).norm() < 1e-13);
    }
}
