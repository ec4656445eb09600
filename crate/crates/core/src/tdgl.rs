//! Evolution of the nonlocal equation
//! `ψ_t = ψ_xx + i x I ψ + Γ ψ + N[ψ]` on `[-1, 1]`.
//!
//! The linear part is advanced by Crank–Nicolson on the interior unknowns
//! (boundary values eliminated as in the eigenvalue problem), the nonlinear
//! term by second-order Adams–Bashforth. The first step uses a
//! Crank–Nicolson predictor/corrector with the trapezoidal rule for `N`.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::{DVector, Dyn, LU};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{InitKind, RunConfig};
use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, Grid, GridFunction};
use crate::linalg::CMatrix;
use crate::spectral::{self, ReducedOperator};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone)]
pub struct WireState {
    pub psi: GridFunction,
    pub t: f64,
    pub current: f64,
    pub gamma: f64,
}

impl WireState {
    pub fn new(psi: GridFunction, current: f64, gamma: f64) -> Self {
        Self { psi, t: 0.0, current, gamma }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.psi.grid()
    }
}

/// `∫₀ˣ (ψ ψ_x* - ψ* ψ_x) dx'`, purely imaginary.
fn current_integral(grid: &Grid, psi: &[Complex64]) -> Vec<Complex64> {
    let dpsi = grid.diff(psi);
    let integrand: Vec<Complex64> = psi
        .iter()
        .zip(&dpsi)
        .map(|(p, d)| Complex64::new(0.0, 2.0 * (p * d.conj()).im))
        .collect();
    grid.antiderivative(&integrand)
}

/// `N[ψ] = -|ψ|²ψ + ½ ψ ∫₀ˣ (ψ ψ_x* - ψ* ψ_x)`.
pub fn nonlinear_term(grid: &Grid, psi: &[Complex64]) -> Vec<Complex64> {
    let theta = current_integral(grid, psi);
    psi.iter()
        .zip(&theta)
        .map(|(p, th)| -p.norm_sqr() * p + 0.5 * p * th)
        .collect()
}

pub fn nonlinearity(s: &WireState) -> GridFunction {
    let grid = s.grid();
    GridFunction::new(Arc::clone(grid), nonlinear_term(grid, s.psi.values())).expect("same grid")
}

/// `φ(x) = -I x + (i/2) ∫₀ˣ (ψ ψ_x* - ψ* ψ_x)`, real and zero at the origin.
pub fn electric_potential(s: &WireState) -> GridFunction {
    let grid = s.grid();
    let theta = current_integral(grid, s.psi.values());
    let phi = grid
        .nodes()
        .iter()
        .zip(&theta)
        .map(|(&x, th)| Complex64::new(-s.current * x + (0.5 * I * th).re, 0.0))
        .collect();
    GridFunction::new(Arc::clone(grid), phi).expect("same grid")
}

/// `max_x |(i/2)(ψ ψ_x* - ψ_x ψ*) - φ_x - I|`.
pub fn total_current_deviation(s: &WireState) -> f64 {
    let grid = s.grid();
    let psi = s.psi.values();
    let dpsi = grid.diff(psi);
    let phi = electric_potential(s);
    let dphi = grid.diff(phi.values());
    (0..grid.n())
        .map(|j| {
            let sup = (0.5 * I * (psi[j] * dpsi[j].conj() - dpsi[j] * psi[j].conj())).re;
            (sup - dphi[j].re - s.current).abs()
        })
        .fold(0.0, f64::max)
}

/// Fixed-step IMEX integrator for one `(I, Γ, dt)`.
pub struct Stepper {
    grid: Arc<Grid>,
    current: f64,
    gamma: f64,
    dt: f64,
    op: ReducedOperator,
    implicit: LU<Complex64, Dyn, Dyn>,
    explicit: CMatrix,
    nonlinear: bool,
    previous: Option<DVector<Complex64>>,
}

impl Stepper {
    pub fn new(grid: &Arc<Grid>, current: f64, gamma: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument("dt must be positive".into()));
        }
        let op = ReducedOperator::new(grid, current, gamma);
        let m = op.matrix.nrows();
        let id = CMatrix::identity(m, m);
        let half = Complex64::new(0.5 * dt, 0.0);
        let implicit = (&id - &op.matrix * half).lu();
        if implicit.u().diagonal().iter().any(|d| d.norm() < 1e-300) {
            return Err(Error::NumericalFailure("Crank-Nicolson matrix is singular".into()));
        }
        let explicit = &id + &op.matrix * half;
        Ok(Self {
            grid: Arc::clone(grid),
            current,
            gamma,
            dt,
            op,
            implicit,
            explicit,
            nonlinear: true,
            previous: None,
        })
    }

    /// Drops the nonlinear term (linear evolution only).
    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Forgets the Adams–Bashforth history, e.g. after the state was edited.
    pub fn reset(&mut self) {
        self.previous = None;
    }

    fn interior_n(&self, full: &[Complex64]) -> DVector<Complex64> {
        let m = full.len() - 2;
        if !self.nonlinear {
            return DVector::zeros(m);
        }
        let nl = nonlinear_term(&self.grid, full);
        DVector::from_iterator(m, nl[1..=m].iter().copied())
    }

    fn solve(&self, rhs: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        self.implicit
            .solve(rhs)
            .ok_or_else(|| Error::NumericalFailure("Crank-Nicolson solve failed".into()))
    }

    pub fn step(&mut self, s: &WireState) -> Result<WireState> {
        if s.grid().id() != self.grid.id() || s.current != self.current || s.gamma != self.gamma {
            return Err(Error::InvalidArgument("state does not match the stepper".into()));
        }
        let full = s.psi.values();
        let n = full.len();
        let u = DVector::from_iterator(n - 2, full[1..n - 1].iter().copied());
        let base = &self.explicit * &u;
        let dt = Complex64::new(self.dt, 0.0);
        let n_now = self.interior_n(full);
        let next = match &self.previous {
            Some(n_prev) => self.solve(&(base + (&n_now * Complex64::new(1.5, 0.0) - n_prev * Complex64::new(0.5, 0.0)) * dt))?,
            None => {
                let pred = self.solve(&(&base + &n_now * dt))?;
                let pred_full = self.op.extend(pred.as_slice());
                let n_pred = self.interior_n(&pred_full);
                self.solve(&(base + (&n_now + n_pred) * (0.5 * dt)))?
            }
        };
        self.previous = Some(n_now);
        let psi = GridFunction::new(Arc::clone(&self.grid), self.op.extend(next.as_slice()))?;
        Ok(WireState { psi, t: s.t + self.dt, current: s.current, gamma: s.gamma })
    }
}

/// One step from a state without history (the bootstrap step).
pub fn step(s: &WireState, dt: f64) -> Result<WireState> {
    Stepper::new(s.grid(), s.current, s.gamma, dt)?.step(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub t: f64,
    pub l2_norm: f64,
    pub h1_norm: f64,
    pub psi_at_0: Complex64,
    pub max_abs: f64,
    pub total_current_max_deviation: f64,
}

impl Observables {
    pub fn of(s: &WireState) -> Self {
        Self {
            t: s.t,
            l2_norm: s.psi.norm_l2(),
            h1_norm: s.psi.norm_h1(),
            psi_at_0: s.psi.interpolate_at(0.0).unwrap_or_default(),
            max_abs: s.psi.max_abs(),
            total_current_max_deviation: total_current_deviation(s),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<WireState>,
    pub observables: Vec<Observables>,
}

impl Trajectory {
    pub fn grid(&self) -> &Arc<Grid> {
        self.snapshots[0].grid()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    #[serde(rename = "I")]
    pub current: f64,
    pub gamma: f64,
    pub eps: f64,
    pub lambda1: Complex64,
    /// `max_x |ψ|` at the final time.
    pub amplitude: f64,
    /// `|ψ(0)|` at the final time.
    pub psi0_amplitude: f64,
    /// Mean spacing of upward zero crossings of `Re ψ(0, t)` after the transient.
    pub period: Option<f64>,
    pub crossings: usize,
    pub current_deviation: f64,
    pub final_time: f64,
    /// Set when the run stopped on a non-finite value.
    pub aborted: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub trajectory: Trajectory,
    pub summary: SimSummary,
}

/// Settings of one simulation, resolved from a [`RunConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub bc: BoundaryCondition,
    pub current: f64,
    pub eps: f64,
    pub dt: f64,
    pub t_end: f64,
    pub init: InitKind,
    pub init_amp: f64,
    pub seed: u64,
    pub stride: usize,
    pub transient: f64,
}

impl SimConfig {
    pub fn from_run(c: &RunConfig) -> Self {
        Self {
            n: c.n,
            bc: c.bc,
            current: c.current,
            eps: c.gamma_offset,
            dt: c.dt,
            t_end: c.t_end,
            init: c.init.clone(),
            init_amp: c.init_amp,
            seed: c.seed,
            stride: c.stride,
            transient: c.transient,
        }
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        Self::from_run(&RunConfig::default())
    }
}

fn random_field(grid: &Grid, seed: u64, pt: bool) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = 8;
    let coef: Vec<(Complex64, Complex64)> = (1..=modes)
        .map(|k| {
            let s = 1.0 / k as f64;
            let mut c = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * s;
            (c(), c())
        })
        .collect();
    let bc = grid.bc();
    let f = |x: f64| -> Complex64 {
        let y = 0.5 * std::f64::consts::PI * (x + 1.0);
        let mut v = Complex64::default();
        for (k, (a, b)) in coef.iter().enumerate() {
            let kf = (k + 1) as f64;
            v += match bc {
                BoundaryCondition::Dirichlet => a * (kf * y).sin() + b * ((kf + 1.0) * y).sin(),
                BoundaryCondition::Neumann => a * (kf * y).cos() + b * ((kf - 1.0) * y).cos(),
            };
        }
        v
    };
    grid.nodes()
        .iter()
        .map(|&x| if pt { f(x) + f(-x).conj() } else { f(x) })
        .collect()
}

/// Reads the `x, re_psi, im_psi` columns of a snapshot CSV and interpolates
/// them linearly onto the grid.
pub fn load_snapshot(path: &Path, grid: &Grid) -> Result<Vec<Complex64>> {
    let file = fs::File::open(path).map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
    let mut pts: Vec<(f64, Complex64)> = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if k == 0 || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let num = |i: usize| -> Result<f64> {
            cols.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("{}: bad row {}", path.display(), k + 1)))
        };
        pts.push((num(0)?, Complex64::new(num(1)?, num(2)?)));
    }
    if pts.len() < 2 {
        return Err(Error::Config(format!("{}: need at least two rows", path.display())));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(grid
        .nodes()
        .iter()
        .map(|&x| {
            let k = pts.partition_point(|p| p.0 < x).clamp(1, pts.len() - 1);
            let (x0, y0) = pts[k - 1];
            let (x1, y1) = pts[k];
            let w = if x1 > x0 { ((x - x0) / (x1 - x0)).clamp(0.0, 1.0) } else { 0.0 };
            y0 * (1.0 - w) + y1 * w
        })
        .collect())
}

/// Initial data scaled so that `max_x |ψ₀| = init_amp` (for the modes,
/// `|ψ₀(0)| = init_amp` through `u1(0) = 1`).
pub fn initial_data(cfg: &SimConfig, grid: &Arc<Grid>) -> Result<Vec<Complex64>> {
    let scale_max = |mut v: Vec<Complex64>| {
        let m = v.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        if m > 0.0 {
            v.iter_mut().for_each(|z| *z *= cfg.init_amp / m);
        }
        v
    };
    let mut v = match &cfg.init {
        InitKind::U1 => {
            let p = spectral::eigenpairs(grid, cfg.current, 1)?.remove(0);
            p.u.values().iter().map(|z| z * cfg.init_amp).collect()
        }
        InitKind::V1V2 => {
            let p = spectral::eigenpairs(grid, cfg.current, 1)?.remove(0);
            if p.lambda.im.abs() > spectral::COMPLEX_TOL {
                let u2 = p.u.pt_conjugate();
                let s = cfg.init_amp / 2f64.sqrt();
                p.u.values()
                    .iter()
                    .zip(u2.values())
                    .map(|(a, b)| s * ((a + b) + I * (a - b)))
                    .collect()
            } else {
                p.u.values().iter().map(|z| z * cfg.init_amp).collect()
            }
        }
        InitKind::RandomPt => scale_max(random_field(grid, cfg.seed, true)),
        InitKind::Random => scale_max(random_field(grid, cfg.seed, false)),
        InitKind::File(path) => load_snapshot(path, grid)?,
    };
    if grid.bc() == BoundaryCondition::Dirichlet {
        let n = v.len();
        v[0] = Complex64::default();
        v[n - 1] = Complex64::default();
    }
    Ok(v)
}

/// Upward zero crossings of a sampled signal, by linear interpolation.
pub fn upward_crossings(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 1..values.len() {
        let (a, b) = (values[k - 1], values[k]);
        if a < 0.0 && b >= 0.0 {
            let w = a / (a - b);
            out.push(times[k - 1] + w * (times[k] - times[k - 1]));
        }
    }
    out
}

/// Runs one simulation at `Γ = Re λ₁(I) + eps`.
pub fn simulate(cfg: &SimConfig) -> Result<SimResult> {
    let grid = Grid::chebyshev(cfg.n, cfg.bc)?;
    let lambda1 = spectral::eigenvalues(&grid, cfg.current, 1)?[0];
    let gamma = lambda1.re + cfg.eps;
    let psi0 = GridFunction::new(Arc::clone(&grid), initial_data(cfg, &grid)?)?;
    simulate_from(WireState::new(psi0, cfg.current, gamma), cfg, lambda1)
}

/// Runs from a given state; `cfg` supplies `dt`, `t_end`, `stride` and
/// `transient`.
pub fn simulate_from(start: WireState, cfg: &SimConfig, lambda1: Complex64) -> Result<SimResult> {
    if !(cfg.dt > 0.0 && cfg.t_end > 0.0) || cfg.stride == 0 {
        return Err(Error::InvalidArgument("dt, t_end and stride must be positive".into()));
    }
    let grid = Arc::clone(start.grid());
    let steps = (cfg.t_end / cfg.dt).round().max(1.0) as usize;
    let dt = cfg.t_end / steps as f64;
    let mut stepper = Stepper::new(&grid, start.current, start.gamma, dt)?;
    let w0 = grid.interpolation_weights(0.0)?;
    let re_at_0 = |s: &WireState| s.psi.values().iter().zip(&w0).map(|(z, w)| z.re * w).sum::<f64>();

    let t_transient = cfg.transient * cfg.t_end;
    let (mut ts, mut rs) = (Vec::new(), Vec::new());
    let mut state = start;
    let mut observables = vec![Observables::of(&state)];
    let mut snapshots = vec![state.clone()];
    let mut aborted = None;
    for k in 1..=steps {
        let next = stepper.step(&state)?;
        if next.psi.values().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            aborted = Some(format!("non-finite value at t = {:.6e}", next.t));
            log::error!("simulation aborted: non-finite value at t = {:.6e}", next.t);
            break;
        }
        state = next;
        if state.t >= t_transient {
            ts.push(state.t);
            rs.push(re_at_0(&state));
        }
        if k % cfg.stride == 0 || k == steps {
            observables.push(Observables::of(&state));
            snapshots.push(state.clone());
        }
    }
    if snapshots.last().map(|s| s.t) != Some(state.t) {
        observables.push(Observables::of(&state));
        snapshots.push(state.clone());
    }
    let ups = upward_crossings(&ts, &rs);
    let period = (ups.len() >= 2).then(|| (ups[ups.len() - 1] - ups[0]) / (ups.len() - 1) as f64);
    let current_deviation = observables.iter().map(|o| o.total_current_max_deviation).fold(0.0, f64::max);
    let summary = SimSummary {
        current: state.current,
        gamma: state.gamma,
        eps: state.gamma - lambda1.re,
        lambda1,
        amplitude: state.psi.max_abs(),
        psi0_amplitude: state.psi.interpolate_at(0.0)?.norm(),
        period,
        crossings: ups.len(),
        current_deviation,
        final_time: state.t,
        aborted,
    };
    Ok(SimResult { trajectory: Trajectory { snapshots, observables }, summary })
}

pub fn write_snapshot_csv<W: Write>(s: &WireState, mut w: W) -> Result<()> {
    let phi = electric_potential(s);
    writeln!(w, "x,re_psi,im_psi,re_phi,im_phi")?;
    for ((x, p), f) in s.grid().nodes().iter().zip(s.psi.values()).zip(phi.values()) {
        writeln!(w, "{x:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", p.re, p.im, f.re, f.im)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub file: String,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: std::collections::BTreeMap<String, String>,
    pub summary: SimSummary,
    pub snapshots: Vec<SnapshotEntry>,
    pub observables: Vec<Observables>,
}

/// Writes `snapshot_NNNNNN.csv` files and `manifest.json` into `dir`.
pub fn write_run(dir: &Path, result: &SimResult, config: &RunConfig) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(result.trajectory.snapshots.len());
    for (k, s) in result.trajectory.snapshots.iter().enumerate() {
        let name = format!("snapshot_{k:06}.csv");
        let f = fs::File::create(dir.join(&name))?;
        write_snapshot_csv(s, std::io::BufWriter::new(f))?;
        entries.push(SnapshotEntry { file: name, t: s.t });
    }
    let manifest = Manifest {
        version: crate::VERSION.to_string(),
        config: config.pairs().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        summary: result.summary.clone(),
        snapshots: entries,
        observables: result.trajectory.observables.clone(),
    };
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(path)
}

/// Reads a run directory written by [`write_run`].
pub fn read_run(dir: &Path) -> Result<(Manifest, Trajectory)> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    let mut cfg = RunConfig::default();
    for (k, v) in &manifest.config {
        cfg.set(k, v)?;
    }
    let grid = Grid::chebyshev(cfg.n, cfg.bc)?;
    let mut snapshots = Vec::with_capacity(manifest.snapshots.len());
    for e in &manifest.snapshots {
        let vals = load_snapshot(&dir.join(&e.file), &grid)?;
        let psi = GridFunction::new(Arc::clone(&grid), vals)?;
        let mut s = WireState::new(psi, manifest.summary.current, manifest.summary.gamma);
        s.t = e.t;
        snapshots.push(s);
    }
    let observables = snapshots.iter().map(Observables::of).collect();
    Ok((manifest, Trajectory { snapshots, observables }))
}
