//! Spectrum of the wire operator `M u = u_xx + i x I u` on [-1, 1].
//!
//! Eigenvalues follow the convention `M u = -λ u`, so the normal state is
//! stable while every `Re λ` exceeds the temperature parameter Γ. The
//! operator is PT-symmetric: conjugating and reflecting `x -> -x` maps it to
//! itself, so the spectrum is closed under conjugation and real eigenvalues
//! pair up and collide as `I` grows.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, Grid, GridFunction};
use crate::linalg::{self, CMatrix};
use crate::parallel::{self, Execution};

const I_UNIT: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Threshold on `|Im λ|` above which an eigenvalue counts as complex.
pub const COMPLEX_TOL: f64 = 1e-5;

/// Relative `Re λ` gap below which two eigenvalues are treated as a
/// conjugate pair when ordering.
const TIE_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: Complex64,
    pub u: GridFunction,
    pub residual: f64,
}

/// Full `n x n` matrix of `u -> u_xx + i x I u + shift u` with the grid's
/// boundary condition imposed by row replacement.
pub fn assemble_operator(grid: &Grid, current: f64, shift: f64) -> CMatrix {
    let n = grid.n();
    let mut a = CMatrix::from_fn(n, n, |i, j| Complex64::new(grid.d2()[(i, j)], 0.0));
    for (i, &x) in grid.nodes().iter().enumerate() {
        a[(i, i)] += Complex64::new(shift, x * current);
    }
    for row in [0, n - 1] {
        for j in 0..n {
            a[(row, j)] = match grid.bc() {
                BoundaryCondition::Dirichlet => Complex64::new((row == j) as u8 as f64, 0.0),
                BoundaryCondition::Neumann => Complex64::new(grid.d1()[(row, j)], 0.0),
            };
        }
    }
    a
}

/// Applies `u_xx + i x I u + shift u` at every node, ignoring boundary conditions.
pub fn apply_operator(grid: &Grid, current: f64, shift: f64, u: &[Complex64]) -> Vec<Complex64> {
    let mut out = grid.diff2(u);
    for ((o, &x), &v) in out.iter_mut().zip(grid.nodes()).zip(u) {
        *o += Complex64::new(shift, x * current) * v;
    }
    out
}

/// The operator acting on interior unknowns after the boundary values have
/// been eliminated.
#[derive(Debug, Clone)]
pub struct ReducedOperator {
    pub matrix: CMatrix,
    /// Boundary values as a linear map of interior values, 2 x (n-2).
    extension: DMatrix<f64>,
}

impl ReducedOperator {
    pub fn new(grid: &Grid, current: f64, shift: f64) -> Self {
        let n = grid.n();
        let m = n - 2;
        let d2 = grid.d2();
        let extension = match grid.bc() {
            BoundaryCondition::Dirichlet => DMatrix::<f64>::zeros(2, m),
            BoundaryCondition::Neumann => {
                // D1_BB u_B + D1_BI u_I = 0
                let d1 = grid.d1();
                let bb = nalgebra::Matrix2::new(d1[(0, 0)], d1[(0, n - 1)], d1[(n - 1, 0)], d1[(n - 1, n - 1)]);
                let inv = bb.try_inverse().expect("Neumann boundary block is invertible");
                DMatrix::from_fn(2, m, |r, j| {
                    -(inv[(r, 0)] * d1[(0, j + 1)] + inv[(r, 1)] * d1[(n - 1, j + 1)])
                })
            }
        };
        let nodes = grid.nodes();
        let matrix = CMatrix::from_fn(m, m, |i, j| {
            let v = d2[(i + 1, j + 1)] + d2[(i + 1, 0)] * extension[(0, j)] + d2[(i + 1, n - 1)] * extension[(1, j)];
            let mut z = Complex64::new(v, 0.0);
            if i == j {
                z += Complex64::new(shift, nodes[i + 1] * current);
            }
            z
        });
        Self { matrix, extension }
    }

    /// Interior weights `g` with `g · u_I = w · u` for every full vector `u`
    /// obtained from [`Self::extend`].
    pub fn pull_back(&self, full_weights: &[Complex64]) -> Vec<Complex64> {
        let n = full_weights.len();
        let m = n - 2;
        (0..m)
            .map(|j| {
                full_weights[j + 1]
                    + full_weights[0] * self.extension[(0, j)]
                    + full_weights[n - 1] * self.extension[(1, j)]
            })
            .collect()
    }

    /// Rebuilds the full node vector from interior values.
    pub fn extend(&self, interior: &[Complex64]) -> Vec<Complex64> {
        let m = interior.len();
        let mut ub = [Complex64::new(0.0, 0.0); 2];
        for (r, b) in ub.iter_mut().enumerate() {
            for j in 0..m {
                *b += interior[j] * self.extension[(r, j)];
            }
        }
        let mut full = Vec::with_capacity(m + 2);
        full.push(ub[0]);
        full.extend_from_slice(interior);
        full.push(ub[1]);
        full
    }
}

fn check_current(current: f64) -> Result<()> {
    if !current.is_finite() || current < 0.0 {
        return Err(Error::InvalidArgument("I must be nonnegative".into()));
    }
    Ok(())
}

/// Sorts ascending by `Re λ`; within a conjugate pair the member with
/// negative imaginary part comes first.
pub fn sort_spectrum(v: &mut [Complex64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re));
    for i in 0..v.len().saturating_sub(1) {
        let (a, b) = (v[i], v[i + 1]);
        if (a.re - b.re).abs() <= TIE_TOL * (1.0 + a.re.abs()) && a.im > b.im {
            v.swap(i, i + 1);
        }
    }
}

/// The `k` eigenvalues of smallest real part, without eigenvectors.
pub fn eigenvalues(grid: &Grid, current: f64, k: usize) -> Result<Vec<Complex64>> {
    check_current(current)?;
    let m = grid.n() - 2;
    if k > m {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds n - 2 = {m}")));
    }
    let red = ReducedOperator::new(grid, current, 0.0);
    let mut lams: Vec<Complex64> = linalg::eigenvalues(&red.matrix)?.into_iter().map(|mu| -mu).collect();
    sort_spectrum(&mut lams);
    lams.truncate(k);
    Ok(lams)
}

/// Normalizes to `u(0) = 1`, falling back to unit maximum entry when the
/// function vanishes at the origin.
pub fn normalize_at_origin(grid: &Grid, u: &mut [Complex64]) {
    let at0 = grid.interp(u, 0.0).unwrap_or(Complex64::new(0.0, 0.0));
    let umax = u
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, z| if z.norm() > acc.norm() { *z } else { acc });
    let scale = if at0.norm() > 1e-8 * umax.norm() { at0 } else { umax };
    if scale.norm() > 0.0 {
        for z in u.iter_mut() {
            *z /= scale;
        }
    }
}

/// The `k` eigenpairs of smallest `Re λ`, each normalized to `u(0) = 1`.
pub fn eigenpairs(grid: &Arc<Grid>, current: f64, k: usize) -> Result<Vec<EigenPair>> {
    let lams = eigenvalues(grid, current, k)?;
    let red = ReducedOperator::new(grid, current, 0.0);
    let mut out = Vec::with_capacity(k);
    for lam in lams {
        let it = linalg::inverse_iteration(&red.matrix, -lam, 2)?;
        let refined = -it.value;
        // near a collision inverse iteration may slide to the partner; keep the QR value then
        let lambda = if (refined - lam).norm() <= 1e-6 * (1.0 + lam.norm()) { refined } else { lam };
        let mut u = red.extend(&it.vector);
        normalize_at_origin(grid, &mut u);
        let interior = &u[1..u.len() - 1];
        let residual = linalg::residual_norm(&red.matrix, -lambda, interior);
        out.push(EigenPair {
            lambda,
            u: GridFunction::new(Arc::clone(grid), u)?,
            residual,
        });
    }
    let mut lams: Vec<Complex64> = out.iter().map(|p| p.lambda).collect();
    sort_spectrum(&mut lams);
    let mut sorted = Vec::with_capacity(out.len());
    for l in lams {
        let pos = out.iter().position(|p| p.lambda == l).expect("eigenvalue present");
        sorted.push(out.swap_remove(pos));
    }
    Ok(sorted)
}

/// Member of the `ell`-th pair with `Im λ >= 0` (the lower-`Re` member while
/// the pair is still real).
pub fn upper_mode(grid: &Arc<Grid>, current: f64, ell: usize) -> Result<EigenPair> {
    if ell == 0 {
        return Err(Error::InvalidArgument("pair index starts at 1".into()));
    }
    let mut pairs = eigenpairs(grid, current, 2 * ell)?;
    let b = pairs.pop().expect("two members");
    let a = pairs.pop().expect("two members");
    if a.lambda.im.abs() < COMPLEX_TOL && b.lambda.im.abs() < COMPLEX_TOL {
        Ok(a)
    } else if a.lambda.im >= b.lambda.im {
        Ok(a)
    } else {
        Ok(b)
    }
}

/// Γ₁(I) = Re λ₁(I).
pub fn transition_curve(grid: &Grid, current: f64) -> Result<f64> {
    Ok(eigenvalues(grid, current, 1)?[0].re)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumScan {
    pub currents: Vec<f64>,
    /// `tracks[j][i]` is λ_{j+1} at `currents[i]`.
    pub tracks: Vec<Vec<Complex64>>,
    pub residuals: Vec<Vec<f64>>,
    /// (ℓ, I_ℓ) for every pair seen turning complex inside the scan.
    pub collisions: Vec<(usize, f64)>,
}

impl SpectrumScan {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "I,j,re_lambda,im_lambda,residual")?;
        for (i, current) in self.currents.iter().enumerate() {
            for (j, track) in self.tracks.iter().enumerate() {
                writeln!(
                    w,
                    "{:.16e},{},{:.16e},{:.16e},{:.16e}",
                    current,
                    j + 1,
                    track[i].re,
                    track[i].im,
                    self.residuals[j][i]
                )?;
            }
        }
        Ok(())
    }
}

fn scan_point(grid: &Arc<Grid>, current: f64, k: usize) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let pairs = eigenpairs(grid, current, k)?;
    Ok((pairs.iter().map(|p| p.lambda).collect(), pairs.iter().map(|p| p.residual).collect()))
}

/// Eigenvalues over a list of currents. Adjacent samples whose eigenvalues
/// move by more than `step_tol` get midpoints inserted (up to six halvings),
/// and every pair that turns complex between samples is located with
/// [`find_collision`].
pub fn spectrum_scan(
    grid: &Arc<Grid>,
    currents: &[f64],
    k: usize,
    step_tol: f64,
    exec: Execution,
) -> Result<SpectrumScan> {
    let mut currents: Vec<f64> = currents.to_vec();
    currents.sort_by(f64::total_cmp);
    currents.dedup();
    for &c in &currents {
        check_current(c)?;
    }
    let results = parallel::map(&currents, exec, |&c| scan_point(grid, c, k));
    let mut pts: Vec<(f64, Vec<Complex64>, Vec<f64>)> = Vec::with_capacity(currents.len());
    for (c, r) in currents.iter().zip(results) {
        let (l, res) = r?;
        pts.push((*c, l, res));
    }

    let jump = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let mut i = 0;
    while i + 1 < pts.len() {
        let (c0, c1) = (pts[i].0, pts[i + 1].0);
        if jump(&pts[i].1, &pts[i + 1].1) > step_tol && (c1 - c0) > (pts.last().unwrap().0 - pts[0].0).max(1.0) / 64.0 / 64.0 {
            let mid = 0.5 * (c0 + c1);
            let (l, res) = scan_point(grid, mid, k)?;
            pts.insert(i + 1, (mid, l, res));
            continue;
        }
        i += 1;
    }

    let mut collisions = Vec::new();
    for ell in 1..=k / 2 {
        for w in pts.windows(2) {
            let left = w[0].1[2 * ell - 2].im.abs() <= COMPLEX_TOL;
            let right = w[1].1[2 * ell - 2].im.abs() > COMPLEX_TOL;
            if left && right {
                match find_collision(grid, ell, w[0].0, w[1].0) {
                    Ok(ic) => collisions.push((ell, ic)),
                    Err(e) => log::warn!("collision {ell} in [{}, {}] not located: {e}", w[0].0, w[1].0),
                }
            }
        }
    }

    let n_pts = pts.len();
    let mut tracks = vec![Vec::with_capacity(n_pts); k];
    let mut residuals = vec![Vec::with_capacity(n_pts); k];
    let mut out_currents = Vec::with_capacity(n_pts);
    for (c, l, r) in pts {
        out_currents.push(c);
        for j in 0..k {
            tracks[j].push(l[j]);
            residuals[j].push(r[j]);
        }
    }
    Ok(SpectrumScan {
        currents: out_currents,
        tracks,
        residuals,
        collisions,
    })
}

fn pair_is_complex(grid: &Grid, current: f64, ell: usize) -> Result<bool> {
    let l = eigenvalues(grid, current, 2 * ell)?;
    Ok(l[2 * ell - 2].im.abs() > COMPLEX_TOL)
}

fn discriminant(grid: &Grid, current: f64, ell: usize) -> Result<f64> {
    let l = eigenvalues(grid, current, 2 * ell)?;
    let d = l[2 * ell - 1] - l[2 * ell - 2];
    Ok((d * d).re)
}

/// Current at which λ_{2ℓ-1} and λ_{2ℓ} meet. Bisection on the reality of
/// the pair down to width 1e-4, then a safeguarded secant on the
/// discriminant `(λ_{2ℓ} - λ_{2ℓ-1})²`, which is smooth and changes sign
/// linearly through the collision.
pub fn find_collision(grid: &Grid, ell: usize, lo: f64, hi: f64) -> Result<f64> {
    if ell == 0 || !(lo < hi) {
        return Err(Error::BracketInvalid {
            lo,
            hi,
            reason: "need ell >= 1 and lo < hi".into(),
        });
    }
    check_current(lo)?;
    let (mut a, mut b) = (lo, hi);
    let ca = pair_is_complex(grid, a, ell)?;
    let cb = pair_is_complex(grid, b, ell)?;
    if ca == cb || ca {
        return Err(Error::BracketInvalid {
            lo,
            hi,
            reason: format!("pair {ell} must be real at the left end and complex at the right end"),
        });
    }
    while b - a > 1e-4 {
        let mid = 0.5 * (a + b);
        if pair_is_complex(grid, mid, ell)? {
            b = mid;
        } else {
            a = mid;
        }
    }
    // Illinois-modified regula falsi on the discriminant
    let (mut fa, mut fb) = (discriminant(grid, a, ell)?, discriminant(grid, b, ell)?);
    if !(fa > 0.0 && fb < 0.0) {
        return Ok(0.5 * (a + b));
    }
    let mut side = 0;
    let mut c = 0.5 * (a + b);
    for _ in 0..40 {
        c = (a * fb - b * fa) / (fb - fa);
        let fc = discriminant(grid, c, ell)?;
        if fc == 0.0 || (b - a) < 1e-13 {
            break;
        }
        if fc > 0.0 {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        } else {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        }
        if fc.abs() < 1e-14 {
            break;
        }
    }
    Ok(c)
}

/// Current below which the whole spectrum is known to be real.
pub fn reality_bound(bc: BoundaryCondition) -> f64 {
    match bc {
        BoundaryCondition::Neumann => PI * PI / 8.0,
        BoundaryCondition::Dirichlet => 3.0 * PI * PI / 8.0,
    }
}

/// Leading eigenvalue for large `I`, from the boundary-layer balance.
pub fn large_i_asymptotic(current: f64) -> Complex64 {
    let s = current.powf(2.0 / 3.0);
    Complex64::new(1.17 * s, current - 2.02 * s)
}

/// Boundary-layer width exponent: the layer has thickness `I^{-1/3}`.
pub const LAYER_EXPONENT: f64 = 2.0 / 3.0;
/// Order of the eigenvalue correction relative to `I`: `I^{2/3}`.
pub const CORRECTION_EXPONENT: f64 = 4.0 / 3.0;

fn airy_on(y_max: f64, n: usize) -> Result<Complex64> {
    let grid = Grid::chebyshev(n, BoundaryCondition::Dirichlet)?;
    let m = n - 2;
    let scale = (2.0 / y_max).powi(2);
    let nodes = grid.nodes();
    let a = CMatrix::from_fn(m, m, |i, j| {
        let mut z = Complex64::new(scale * grid.d2()[(i + 1, j + 1)], 0.0);
        if i == j {
            z += I_UNIT * (0.5 * (1.0 + nodes[i + 1]) * y_max);
        }
        z
    });
    let lams = linalg::eigenvalues(&a)?;
    let best = lams
        .into_iter()
        .map(|mu| -mu)
        .filter(|l| l.im > -0.5 * y_max)
        .min_by(|a, b| a.re.total_cmp(&b.re))
        .ok_or_else(|| Error::NumericalFailure("no admissible half-line eigenvalue".into()))?;
    // polish on the same matrix
    let it = linalg::inverse_iteration(&a, -best, 2)?;
    Ok(-it.value)
}

/// Leading eigenvalue of `u_yy + i y u + λ u = 0` on `[0, Y]` with Dirichlet
/// ends.
///
/// The truncated problem has a mirror eigenvalue `conj(λ) - iY` with the
/// same real part, coming from the layer at `y = Y`; the selection keeps
/// the branch attached to `y = 0`.
pub fn airy_halfline_leading(y_max: f64, n: usize) -> Result<Complex64> {
    if y_max < 10.0 || n < 64 {
        return Err(Error::InvalidArgument(format!("need Y >= 10 and n >= 64, got Y = {y_max}, n = {n}")));
    }
    let base = airy_on(y_max, n)?;
    let doubled = airy_on(2.0 * y_max, n)?;
    let diff = (base - doubled).norm();
    if diff >= 1e-4 {
        return Err(Error::TruncationInsufficient(format!(
            "Y = {y_max} and Y = {} disagree by {diff:.3e}",
            2.0 * y_max
        )));
    }
    Ok(base)
}

/// Left-hand side of the real-branch quantization condition as a function of α.
///
/// The modulus factor is `ρ^{3/2} = (1 + α²)^{3/4}`; with it the condition
/// reduces to `2 √α = ε n π` for large α, i.e. to the `(nπ/2)²` spectrum.
pub fn jbkw_lhs(alpha: f64) -> f64 {
    let gamma = 1.5 * alpha.atan();
    (2.0 * 2f64.sqrt() / 3.0) * (1.0 + alpha * alpha).powf(0.75) * (gamma.cos() + gamma.sin())
}

/// Real eigenvalue estimates `I α_n` for every `n` in `n_lo..=n_hi` with a
/// solvable quantization condition.
pub fn jbkw_real_branch(current: f64, n_lo: usize, n_hi: usize) -> Result<Vec<f64>> {
    if current <= 0.0 {
        return Err(Error::InvalidArgument("I must be positive".into()));
    }
    let eps = current.powf(-0.5);
    let floor = 2.0 * 2f64.sqrt() / 3.0;
    let mut out = Vec::new();
    for n in n_lo..=n_hi {
        let target = eps * n as f64 * PI;
        if target <= floor {
            continue;
        }
        let f = |a: f64| jbkw_lhs(a) - target;
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut found = false;
        for _ in 0..60 {
            if f(hi) > 0.0 {
                found = true;
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
        if !found {
            log::warn!("no root of the quantization condition for n = {n}");
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-14 * hi.max(1.0) {
                break;
            }
        }
        out.push(current * 0.5 * (lo + hi));
    }
    Ok(out)
}

/// Leading eigenvalue near `guess` from a second-order finite-difference
/// discretization with `n` nodes, by inverse iteration with tridiagonal
/// solves. Independent of the collocation machinery.
pub fn fd_leading_eigenvalue(n: usize, current: f64, bc: BoundaryCondition, guess: Complex64) -> Result<Complex64> {
    check_current(current)?;
    if n < 8 {
        return Err(Error::InvalidArgument("need n >= 8".into()));
    }
    let h = 2.0 / (n - 1) as f64;
    let h2 = h * h;
    let (first, last) = match bc {
        BoundaryCondition::Dirichlet => (1, n - 2),
        BoundaryCondition::Neumann => (0, n - 1),
    };
    let m = last - first + 1;
    let x = |j: usize| 1.0 - (first + j) as f64 * h;
    // tridiagonal (sub, diag, sup) of M
    let mut sub = vec![Complex64::new(1.0 / h2, 0.0); m];
    let mut sup = vec![Complex64::new(1.0 / h2, 0.0); m];
    let diag: Vec<Complex64> = (0..m).map(|j| Complex64::new(-2.0 / h2, x(j) * current)).collect();
    if bc == BoundaryCondition::Neumann {
        // mirrored ghost points
        sup[0] = Complex64::new(2.0 / h2, 0.0);
        sub[m - 1] = Complex64::new(2.0 / h2, 0.0);
    }
    let solve = |mu: Complex64, rhs: &[Complex64]| -> Result<Vec<Complex64>> {
        let mut c = vec![Complex64::new(0.0, 0.0); m];
        let mut d = vec![Complex64::new(0.0, 0.0); m];
        let mut piv = diag[0] - mu;
        c[0] = sup[0] / piv;
        d[0] = rhs[0] / piv;
        for j in 1..m {
            piv = diag[j] - mu - sub[j] * c[j - 1];
            if piv.norm() == 0.0 {
                return Err(Error::NumericalFailure("zero pivot in tridiagonal solve".into()));
            }
            c[j] = sup[j] / piv;
            d[j] = (rhs[j] - sub[j] * d[j - 1]) / piv;
        }
        let mut y = vec![Complex64::new(0.0, 0.0); m];
        y[m - 1] = d[m - 1];
        for j in (0..m - 1).rev() {
            y[j] = d[j] - c[j] * y[j + 1];
        }
        Ok(y)
    };
    let mut mu = -guess;
    let mut v: Vec<Complex64> = (0..m).map(|j| Complex64::new(1.0 + 0.1 * x(j), 0.0)).collect();
    let nrm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let s = nrm(&v);
    v.iter_mut().for_each(|z| *z /= s);
    for _ in 0..60 {
        let y = solve(mu, &v)?;
        let yy: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        let yx: Complex64 = y.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
        let next = mu + yx / yy;
        let s = yy.sqrt();
        v = y.into_iter().map(|z| z / s).collect();
        let done = (next - mu).norm() < 1e-13 * (1.0 + mu.norm());
        mu = next;
        if done {
            break;
        }
    }
    Ok(-mu)
}

/// Richardson combination of [`fd_leading_eigenvalue`] on `n` and
/// `(n - 1) / 2 + 1` nodes, cancelling the `h²` error term.
pub fn fd_leading_eigenvalue_extrapolated(
    n: usize,
    current: f64,
    bc: BoundaryCondition,
    guess: Complex64,
) -> Result<Complex64> {
    if n % 2 == 0 {
        return Err(Error::InvalidArgument("extrapolation needs an odd node count".into()));
    }
    let fine = fd_leading_eigenvalue(n, current, bc, guess)?;
    let coarse = fd_leading_eigenvalue((n - 1) / 2 + 1, current, bc, fine)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(n: usize) -> Arc<Grid> {
        Grid::chebyshev(n, BoundaryCondition::Dirichlet).unwrap()
    }

    #[test]
    fn zero_current_spectrum() {
        let g = grid(64);
        let pairs = eigenpairs(&g, 0.0, 3).unwrap();
        for (k, p) in pairs.iter().enumerate() {
            let exact = (PI * (k + 1) as f64 / 2.0).powi(2);
            assert!((p.lambda - exact).norm() < 1e-8, "k={k} {}", p.lambda);
            assert!(p.residual < 1e-7);
        }
    }

    #[test]
    fn shift_moves_eigenvalues() {
        let g = grid(32);
        let a = ReducedOperator::new(&g, 0.0, 0.0);
        let b = ReducedOperator::new(&g, 0.0, 5.0);
        let mut la: Vec<Complex64> = linalg::eigenvalues(&a.matrix).unwrap();
        let mut lb: Vec<Complex64> = linalg::eigenvalues(&b.matrix).unwrap();
        sort_spectrum(&mut la);
        sort_spectrum(&mut lb);
        for (x, y) in la.iter().zip(&lb).rev().take(5) {
            assert!((y - x - 5.0).norm() < 1e-7);
        }
    }

    #[test]
    fn operator_is_pt_symmetric() {
        let g = grid(24);
        let a = assemble_operator(&g, 7.5, 0.3);
        let n = g.n();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(a[(n - 1 - i, n - 1 - j)].conj(), a[(i, j)]);
            }
        }
    }

    #[test]
    fn neumann_reduction_imposes_zero_slope() {
        let g = Grid::chebyshev(32, BoundaryCondition::Neumann).unwrap();
        let pairs = eigenpairs(&g, 0.0, 3).unwrap();
        // Neumann spectrum at I = 0: (πk/2)², k = 0, 1, 2
        for (k, p) in pairs.iter().enumerate() {
            assert!((p.lambda.re - (PI * k as f64 / 2.0).powi(2)).abs() < 1e-8);
            let du = g.diff(p.u.values());
            assert!(du[0].norm() < 1e-8 && du[g.n() - 1].norm() < 1e-8);
        }
    }

    #[test]
    fn large_current_pair() {
        let g = grid(96);
        let l = eigenvalues(&g, 20.0, 2).unwrap();
        assert!((l[0].re - 8.64).abs() < 0.01 && (l[0].im + 5.25).abs() < 0.01, "{:?}", l);
        assert!((l[1] - l[0].conj()).norm() < 1e-7);
    }

    #[test]
    fn asymptotic_formula_values() {
        let z = large_i_asymptotic(100.0);
        assert_abs_diff_eq!(z.re, 25.20, epsilon = 0.01);
        assert_abs_diff_eq!(z.im, 56.49, epsilon = 0.01);
        let z = large_i_asymptotic(20.0);
        assert_abs_diff_eq!(z.re, 8.62, epsilon = 0.01);
        assert_abs_diff_eq!(z.im, 5.12, epsilon = 0.01);
    }

    #[test]
    fn jbkw_lhs_at_zero_and_growth() {
        assert_abs_diff_eq!(jbkw_lhs(0.0), 2.0 * 2f64.sqrt() / 3.0, epsilon = 1e-15);
        // large α: lhs → 2√α
        assert!((jbkw_lhs(1e6) / 2e3 - 1.0).abs() < 1e-3);
        let roots = jbkw_real_branch(60.0, 1, 12).unwrap();
        assert!(!roots.is_empty());
        assert!(roots.windows(2).all(|w| w[1] > w[0]));
        // large n approaches the free spectrum (nπ/2)²
        let far = jbkw_real_branch(1e4, 400, 400).unwrap()[0];
        assert!((far / (200.0 * PI).powi(2) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn reality_bounds() {
        assert_abs_diff_eq!(reality_bound(BoundaryCondition::Neumann), 1.2337, epsilon = 1e-4);
        assert_abs_diff_eq!(reality_bound(BoundaryCondition::Dirichlet), 3.7011, epsilon = 1e-4);
    }

    #[test]
    fn finite_difference_oracle_converges_to_collocation() {
        let g = grid(96);
        let cheb = eigenvalues(&g, 5.0, 1).unwrap()[0];
        let guess = Complex64::new((cheb.re * 10.0).round() / 10.0, 0.0);
        let fd = fd_leading_eigenvalue(2000, 5.0, BoundaryCondition::Dirichlet, guess).unwrap();
        assert!((fd - cheb).norm() < 1e-4, "{fd} vs {cheb}");
    }

    #[test]
    fn sort_puts_negative_imaginary_first() {
        let mut v = vec![Complex64::new(2.0, 1.0), Complex64::new(1.0, 0.0), Complex64::new(2.0, -1.0)];
        sort_spectrum(&mut v);
        assert_eq!(v[1], Complex64::new(2.0, -1.0));
    }

    #[test]
    fn negative_current_is_rejected() {
        let g = grid(16);
        assert!(matches!(eigenvalues(&g, -1.0, 2), Err(Error::InvalidArgument(m)) if m == "I must be nonnegative"));
    }
}
