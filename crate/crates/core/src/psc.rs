//! Phase slip centers: isolated zeros of `ψ(x, t)`.
//!
//! Candidates are local minima of `|ψ|` on the (node, snapshot) lattice below
//! a threshold. Each is refined by Newton's method on `(Re ψ, Im ψ)` using
//! barycentric interpolation in `x` and cubic Lagrange interpolation in `t`,
//! and certified by the winding number of `ψ` around a small rectangle.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::spectral;
use crate::tdgl::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PscEvent {
    pub x: f64,
    pub t: f64,
    pub winding: i32,
    pub min_abs_psi: f64,
}

/// Space-time interpolant of a trajectory.
pub struct Field<'a> {
    traj: &'a Trajectory,
    times: Vec<f64>,
}

impl<'a> Field<'a> {
    pub fn new(traj: &'a Trajectory) -> Result<Self> {
        let times = traj.times();
        if times.len() < 4 {
            return Err(Error::InvalidArgument("need at least four snapshots".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("snapshot times must increase".into()));
        }
        Ok(Self { traj, times })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.traj.grid()
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<Complex64> {
        let m = self.times.len();
        let k = self.times.partition_point(|&s| s <= t).clamp(2, m - 2) - 2;
        let idx = [k, k + 1, k + 2, k + 3].map(|i| i.min(m - 1));
        let grid = self.grid();
        let mut acc = Complex64::default();
        for (a, &i) in idx.iter().enumerate() {
            let mut w = 1.0;
            for (b, &j) in idx.iter().enumerate() {
                if a != b {
                    w *= (t - self.times[j]) / (self.times[i] - self.times[j]);
                }
            }
            acc += w * grid.interp(self.traj.snapshots[i].psi.values(), x)?;
        }
        Ok(acc)
    }

    /// Winding number of `ψ` around the rectangle `[x0, x1] × [t0, t1]`,
    /// traversed counterclockwise with `x` horizontal and `t` vertical.
    pub fn winding(&self, x0: f64, x1: f64, t0: f64, t1: f64, per_side: usize) -> Result<i32> {
        let corners = [(x0, t0), (x1, t0), (x1, t1), (x0, t1), (x0, t0)];
        let mut prev = self.eval(x0, t0)?;
        let mut total = 0.0;
        for c in corners.windows(2) {
            for s in 1..=per_side {
                let w = s as f64 / per_side as f64;
                let z = self.eval(c[0].0 + w * (c[1].0 - c[0].0), c[0].1 + w * (c[1].1 - c[0].1))?;
                if z.norm() == 0.0 || prev.norm() == 0.0 {
                    return Err(Error::NumericalFailure("ψ vanishes on the winding contour".into()));
                }
                total += (z / prev).arg();
                prev = z;
            }
        }
        Ok((total / (2.0 * std::f64::consts::PI)).round() as i32)
    }

    fn newton(&self, x: f64, t: f64, dt_scale: f64) -> Option<(f64, f64)> {
        let (mut x, mut t) = (x, t);
        let (ta, tb) = self.t_range();
        let (hx, ht) = (1e-7, 1e-7 * dt_scale);
        let scale = self.traj.observables.iter().map(|o| o.max_abs).fold(0.0, f64::max).max(1e-300);
        for _ in 0..40 {
            let f = self.eval(x, t).ok()?;
            if f.norm() < 1e-12 * scale {
                return Some((x, t));
            }
            let fx = (self.eval(x + hx, t).ok()? - self.eval(x - hx, t).ok()?) / (2.0 * hx);
            let ft = (self.eval(x, t + ht).ok()? - self.eval(x, t - ht).ok()?) / (2.0 * ht);
            let det = fx.re * ft.im - ft.re * fx.im;
            if det.abs() < 1e-300 {
                return None;
            }
            let dx = (ft.im * f.re - ft.re * f.im) / det;
            let dtt = (-fx.im * f.re + fx.re * f.im) / det;
            x -= dx;
            t -= dtt;
            if !(x > -1.0 && x < 1.0 && t >= ta && t <= tb) {
                return None;
            }
        }
        let f = self.eval(x, t).ok()?;
        (f.norm() < 1e-8 * scale).then_some((x, t))
    }
}

/// `0.25 ×` the running median (window of 51 snapshots) of `max_x |ψ|`.
pub fn default_threshold(traj: &Trajectory) -> Vec<f64> {
    let m: Vec<f64> = traj.observables.iter().map(|o| o.max_abs).collect();
    (0..m.len())
        .map(|k| {
            let lo = k.saturating_sub(25);
            let hi = (k + 26).min(m.len());
            let mut w = m[lo..hi].to_vec();
            w.sort_by(f64::total_cmp);
            0.25 * w[w.len() / 2]
        })
        .collect()
}

/// Zeros of `ψ` in the trajectory. With `threshold = None` the running
/// default of [`default_threshold`] is used.
pub fn detect_pscs(traj: &Trajectory, threshold: Option<f64>) -> Result<Vec<PscEvent>> {
    let field = Field::new(traj)?;
    let grid = Arc::clone(field.grid());
    let n = grid.n();
    let snaps = &traj.snapshots;
    let thr = match threshold {
        Some(t) => vec![t; snaps.len()],
        None => default_threshold(traj),
    };
    let absv: Vec<Vec<f64>> = snaps.iter().map(|s| s.psi.values().iter().map(|z| z.norm()).collect()).collect();
    let nodes = grid.nodes();
    let mut events: Vec<PscEvent> = Vec::new();
    for k in 0..snaps.len() {
        for j in 1..n - 1 {
            let v = absv[k][j];
            if !(v < thr[k]) {
                continue;
            }
            let mut is_min = true;
            for kk in k.saturating_sub(1)..=(k + 1).min(snaps.len() - 1) {
                for jj in j - 1..=j + 1 {
                    if (kk, jj) != (k, j) && absv[kk][jj] < v {
                        is_min = false;
                    }
                }
            }
            if !is_min {
                continue;
            }
            let dt_local = if k + 1 < snaps.len() { snaps[k + 1].t - snaps[k].t } else { snaps[k].t - snaps[k - 1].t };
            let Some((x, t)) = field.newton(nodes[j], snaps[k].t, dt_local) else {
                log::debug!("dropped candidate near x = {:.4}, t = {:.4}: Newton did not converge", nodes[j], snaps[k].t);
                continue;
            };
            if events.iter().any(|e| (e.x - x).abs() < 1e-6 && (e.t - t).abs() < 1e-6 * dt_local.max(1.0)) {
                continue;
            }
            let dx = 0.25 * (nodes[j - 1] - nodes[j + 1]).abs().min(0.05);
            let dtw = 0.5 * dt_local;
            let (ta, tb) = field.t_range();
            if t - dtw < ta || t + dtw > tb {
                log::debug!("dropped zero at x = {x:.4}, t = {t:.4}: too close to the time window edge");
                continue;
            }
            let winding = match field.winding(x - dx, x + dx, t - dtw, t + dtw, 32) {
                Ok(w) => w,
                Err(e) => {
                    log::debug!("dropped zero at x = {x:.4}, t = {t:.4}: {e}");
                    continue;
                }
            };
            if winding == 0 {
                log::debug!("dropped zero at x = {x:.4}, t = {t:.4}: winding number 0");
                continue;
            }
            events.push(PscEvent { x, t, winding, min_abs_psi: v });
        }
    }
    events.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.x.total_cmp(&b.x)));
    Ok(events)
}

pub fn write_events_csv<W: Write>(events: &[PscEvent], mut w: W) -> Result<()> {
    writeln!(w, "t,x,winding,min_abs_psi")?;
    for e in events {
        writeln!(w, "{:.16e},{:.16e},{},{:.16e}", e.t, e.x, e.winding, e.min_abs_psi)?;
    }
    Ok(())
}

/// `Re u₁'(0)` of the leading mode with `Im λ₁ > 0`, normalized by `u₁(0) = 1`.
pub fn leading_mode_slope_at_zero(grid: &Arc<Grid>, current: f64) -> Result<f64> {
    let p = spectral::upper_mode(grid, current, 1)?;
    if p.lambda.im.abs() <= spectral::COMPLEX_TOL {
        return Err(Error::InvalidRegime(format!("I = {current} is below the first collision")));
    }
    Ok(p.u.grid().interp_derivative(p.u.values(), 0.0)?.re)
}
