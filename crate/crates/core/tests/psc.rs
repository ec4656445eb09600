use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use wire_tdgl::psc::{self, Field, PscEvent};
use wire_tdgl::tdgl::{Observables, Trajectory, WireState};
use wire_tdgl::{BoundaryCondition, Grid, GridFunction};

fn synthetic(f: impl Fn(f64, f64) -> Complex64) -> Trajectory {
    let g = Grid::chebyshev(41, BoundaryCondition::Neumann).unwrap();
    let snapshots: Vec<WireState> = (0..=80)
        .map(|k| {
            let t = 0.025 * k as f64;
            let psi = GridFunction::from_fn(Arc::clone(&g), |x| f(x, t));
            let mut s = WireState::new(psi, 0.0, 0.0);
            s.t = t;
            s
        })
        .collect();
    let observables = snapshots.iter().map(Observables::of).collect();
    Trajectory { snapshots, observables }
}

fn z(x: f64, t: f64, x0: f64, t0: f64) -> Complex64 {
    Complex64::new(x - x0, t - t0)
}

fn inside(e: &PscEvent, r: (f64, f64, f64, f64)) -> bool {
    e.x > r.0 && e.x < r.1 && e.t > r.2 && e.t < r.3
}

fn check_degree(traj: &Trajectory, events: &[PscEvent], rects: &[(f64, f64, f64, f64)]) {
    let field = Field::new(traj).unwrap();
    for &r in rects {
        let w = field.winding(r.0, r.1, r.2, r.3, 400).unwrap();
        let count: i32 = events.iter().filter(|e| inside(e, r)).map(|e| e.winding).sum();
        assert_eq!(w, count, "rectangle {r:?}");
    }
}

#[test]
fn degree_consistency_with_two_zeros() {
    let traj = synthetic(|x, t| z(x, t, 0.3, 0.6) * z(x, t, -0.4, 1.3));
    let ev = psc::detect_pscs(&traj, Some(0.2)).unwrap();
    assert_eq!(ev.len(), 2, "{ev:?}");
    assert!(ev.iter().all(|e| e.winding == 1));
    assert!((ev[0].x - 0.3).abs() < 1e-8 && (ev[0].t - 0.6).abs() < 1e-8);
    check_degree(
        &traj,
        &ev,
        &[(-0.9, 0.9, 0.1, 1.9), (0.0, 0.8, 0.2, 1.0), (-0.8, 0.0, 0.2, 1.0), (-0.8, -0.1, 0.9, 1.8)],
    );
}

#[test]
fn degree_consistency_with_three_zeros_of_mixed_sign() {
    let traj = synthetic(|x, t| z(x, t, 0.5, 0.5) * z(x, t, -0.5, 0.7) * z(x, t, 0.0, 1.5).conj());
    let ev = psc::detect_pscs(&traj, Some(0.15)).unwrap();
    assert_eq!(ev.len(), 3, "{ev:?}");
    let total: i32 = ev.iter().map(|e| e.winding).sum();
    assert_eq!(total, 1);
    let neg = ev.iter().find(|e| e.winding == -1).unwrap();
    assert!(neg.x.abs() < 1e-8 && (neg.t - 1.5).abs() < 1e-8);
    check_degree(
        &traj,
        &ev,
        &[(-0.9, 0.9, 0.1, 1.9), (-0.9, 0.9, 0.1, 1.0), (-0.3, 0.3, 1.0, 1.9), (0.1, 0.9, 0.1, 1.9)],
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn detection_is_rotation_invariant(theta in 0.0f64..6.28, x0 in -0.6f64..0.6, t0 in 0.4f64..1.6) {
        let f = move |x: f64, t: f64| z(x, t, x0, t0) * Complex64::new(1.0 + 0.3 * x, 0.2 * t);
        let r = Complex64::from_polar(1.0, theta);
        let a = psc::detect_pscs(&synthetic(f), Some(0.2)).unwrap();
        let b = psc::detect_pscs(&synthetic(move |x, t| r * f(x, t)), Some(0.2)).unwrap();
        prop_assert_eq!(a.len(), 1);
        prop_assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p.x - q.x).abs() < 1e-8 && (p.t - q.t).abs() < 1e-8);
            prop_assert_eq!(p.winding, q.winding);
        }
    }
}

#[test]
fn no_events_without_zeros() {
    let traj = synthetic(|x, t| Complex64::from_polar(1.0 + 0.1 * x, 3.0 * t + x));
    assert!(psc::detect_pscs(&traj, None).unwrap().is_empty());
    let th = psc::default_threshold(&traj);
    assert_eq!(th.len(), traj.snapshots.len());
    assert!(th.iter().all(|v| (*v - 0.25 * 1.1).abs() < 1e-12));
}

#[test]
fn events_csv_layout() {
    let traj = synthetic(|x, t| z(x, t, 0.1, 1.0));
    let ev = psc::detect_pscs(&traj, Some(0.3)).unwrap();
    let mut buf = Vec::new();
    psc::write_events_csv(&ev, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,winding,min_abs_psi"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 4);
    assert_eq!(row[2], "1");
}

#[test]
fn too_few_snapshots() {
    let mut traj = synthetic(|x, t| z(x, t, 0.0, 0.0));
    traj.snapshots.truncate(3);
    traj.observables.truncate(3);
    assert!(psc::detect_pscs(&traj, None).is_err());
}
