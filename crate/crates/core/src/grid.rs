//! Collocation grids on [-1, 1].
//!
//! The production grid is Chebyshev–Gauss–Lobatto with spectral
//! differentiation matrices and Clenshaw–Curtis weights. A second-order
//! uniform finite-difference grid implements the same contract and is used
//! as an independent cross-check.
//!
//! Nodes are stored in descending order: `nodes[0] = 1`, `nodes[n-1] = -1`.
//! Every grid is symmetric about the origin, so reversing the node order is
//! the reflection `x -> -x`.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

static NEXT_GRID_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    #[default]
    Dirichlet,
    Neumann,
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" => Ok(Self::Dirichlet),
            "neumann" => Ok(Self::Neumann),
            other => Err(Error::InvalidArgument(format!("unknown boundary condition '{other}'"))),
        }
    }
}

impl std::fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Dirichlet => f.write_str("dirichlet"),
            Self::Neumann => f.write_str("neumann"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Chebyshev,
    FiniteDifference,
}

#[derive(Debug)]
pub struct Grid {
    id: u64,
    kind: GridKind,
    n: usize,
    nodes: Vec<f64>,
    d1: DMatrix<f64>,
    d2: DMatrix<f64>,
    qweights: Vec<f64>,
    bary: Vec<f64>,
    /// Maps node samples to samples of the primitive vanishing at x = 0.
    antideriv: DMatrix<f64>,
    bc: BoundaryCondition,
}

impl Grid {
    /// Chebyshev–Gauss–Lobatto grid with `n` nodes.
    pub fn chebyshev(n: usize, bc: BoundaryCondition) -> Result<Arc<Grid>> {
        if n < 8 {
            return Err(Error::InvalidArgument(format!("grid needs n >= 8 nodes, got {n}")));
        }
        let big_n = n - 1;
        let nf = big_n as f64;
        let nodes: Vec<f64> = (0..n)
            .map(|j| (PI * (nf - 2.0 * j as f64) / (2.0 * nf)).sin())
            .collect();

        let c = |j: usize| -> f64 {
            let base = if j == 0 || j == big_n { 2.0 } else { 1.0 };
            if j % 2 == 0 {
                base
            } else {
                -base
            }
        };
        let mut d1 = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let mut row_sum = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                // x_i - x_j through the product formula keeps small differences accurate
                let dx = 2.0
                    * ((i + j) as f64 * PI / (2.0 * nf)).sin()
                    * ((j as f64 - i as f64) * PI / (2.0 * nf)).sin();
                let v = c(i) / c(j) / dx;
                d1[(i, j)] = v;
                row_sum += v;
            }
            d1[(i, i)] = -row_sum;
        }
        let d2 = &d1 * &d1;
        let d1 = symmetrize_reflection(&d1, -1.0);
        let d2 = symmetrize_reflection(&d2, 1.0);

        let qweights = clenshaw_curtis(big_n);
        let bary: Vec<f64> = (0..n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == big_n {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        let antideriv = symmetrize_reflection(&chebyshev_antiderivative(big_n), -1.0);

        Ok(Arc::new(Grid {
            id: NEXT_GRID_ID.fetch_add(1, Ordering::Relaxed),
            kind: GridKind::Chebyshev,
            n,
            nodes,
            d1,
            d2,
            qweights,
            bary,
            antideriv,
            bc,
        }))
    }

    /// Uniform second-order finite-difference grid with `n` nodes.
    pub fn finite_difference(n: usize, bc: BoundaryCondition) -> Result<Arc<Grid>> {
        if n < 8 {
            return Err(Error::InvalidArgument(format!("grid needs n >= 8 nodes, got {n}")));
        }
        let big_n = n - 1;
        let h = 2.0 / big_n as f64;
        let nodes: Vec<f64> = (0..n)
            .map(|j| {
                // symmetric construction so that nodes[j] == -nodes[n-1-j] exactly
                let k = big_n as f64 - 2.0 * j as f64;
                k / big_n as f64
            })
            .collect();
        // nodes descend, so x_{j-1} = x_j + h
        let mut d1 = DMatrix::<f64>::zeros(n, n);
        let mut d2 = DMatrix::<f64>::zeros(n, n);
        for j in 1..big_n {
            d1[(j, j - 1)] = 1.0 / (2.0 * h);
            d1[(j, j + 1)] = -1.0 / (2.0 * h);
            d2[(j, j - 1)] = 1.0 / (h * h);
            d2[(j, j)] = -2.0 / (h * h);
            d2[(j, j + 1)] = 1.0 / (h * h);
        }
        d1[(0, 0)] = 3.0 / (2.0 * h);
        d1[(0, 1)] = -4.0 / (2.0 * h);
        d1[(0, 2)] = 1.0 / (2.0 * h);
        d1[(big_n, big_n)] = -3.0 / (2.0 * h);
        d1[(big_n, big_n - 1)] = 4.0 / (2.0 * h);
        d1[(big_n, big_n - 2)] = -1.0 / (2.0 * h);
        for (row, dir) in [(0usize, 1isize), (big_n, -1isize)] {
            let coeffs = [2.0, -5.0, 4.0, -1.0];
            for (k, c) in coeffs.iter().enumerate() {
                let col = (row as isize + dir * k as isize) as usize;
                d2[(row, col)] = c / (h * h);
            }
        }
        let mut qweights = vec![h; n];
        qweights[0] = h / 2.0;
        qweights[big_n] = h / 2.0;

        // cumulative trapezoid from x = 1, then shift so the value at 0 vanishes
        let mut cum = DMatrix::<f64>::zeros(n, n);
        for j in 1..n {
            for k in 0..n {
                cum[(j, k)] = cum[(j - 1, k)];
            }
            // integral from x_j up to x_{j-1} is subtracted (we integrate from 1 downward)
            cum[(j, j - 1)] -= h / 2.0;
            cum[(j, j)] -= h / 2.0;
        }
        let (lo, hi, t) = fd_bracket(&nodes, 0.0);
        let mut antideriv = cum.clone();
        for j in 0..n {
            for k in 0..n {
                let at0 = (1.0 - t) * cum[(lo, k)] + t * cum[(hi, k)];
                antideriv[(j, k)] = cum[(j, k)] - at0;
            }
        }
        // linear interpolation of the trapezoid primitive is only first order
        // at 0 when 0 is not a node; exact when n is odd (0 is a node).

        Ok(Arc::new(Grid {
            id: NEXT_GRID_ID.fetch_add(1, Ordering::Relaxed),
            kind: GridKind::FiniteDifference,
            n,
            nodes,
            d1,
            d2,
            qweights,
            bary: Vec::new(),
            antideriv,
            bc,
        }))
    }

    pub fn id(&self) -> u64 {
        self.id
    }
    pub fn kind(&self) -> GridKind {
        self.kind
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn d1(&self) -> &DMatrix<f64> {
        &self.d1
    }
    pub fn d2(&self) -> &DMatrix<f64> {
        &self.d2
    }
    pub fn qweights(&self) -> &[f64] {
        &self.qweights
    }
    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn diff(&self, v: &[Complex64]) -> Vec<Complex64> {
        real_matvec(&self.d1, v)
    }

    pub fn diff2(&self, v: &[Complex64]) -> Vec<Complex64> {
        real_matvec(&self.d2, v)
    }

    pub fn quad(&self, v: &[Complex64]) -> Complex64 {
        self.qweights.iter().zip(v).map(|(w, z)| z * *w).sum()
    }

    pub fn quad_real(&self, v: &[f64]) -> f64 {
        self.qweights.iter().zip(v).map(|(w, z)| w * z).sum()
    }

    pub fn antiderivative(&self, v: &[Complex64]) -> Vec<Complex64> {
        real_matvec(&self.antideriv, v)
    }

    pub fn antiderivative_real(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for (k, &vk) in v.iter().enumerate() {
            if vk == 0.0 {
                continue;
            }
            let col = self.antideriv.column(k);
            for j in 0..n {
                out[j] += col[j] * vk;
            }
        }
        out
    }

    /// Interpolation weights `c` with `f(x) = sum_j c_j f_j`.
    pub fn interpolation_weights(&self, x: f64) -> Result<Vec<f64>> {
        if !(x.abs() <= 1.0) {
            return Err(Error::OutOfDomain { x });
        }
        let n = self.n;
        let mut c = vec![0.0; n];
        match self.kind {
            GridKind::Chebyshev => {
                if let Some(j) = self.nodes.iter().position(|&xj| xj == x) {
                    c[j] = 1.0;
                    return Ok(c);
                }
                let mut denom = 0.0;
                for j in 0..n {
                    let t = self.bary[j] / (x - self.nodes[j]);
                    c[j] = t;
                    denom += t;
                }
                for cj in c.iter_mut() {
                    *cj /= denom;
                }
            }
            GridKind::FiniteDifference => {
                // local cubic Lagrange on the four nearest nodes
                let (lo, _, _) = fd_bracket(&self.nodes, x);
                let start = lo.saturating_sub(1).min(n - 4);
                let idx: Vec<usize> = (start..start + 4).collect();
                for &j in &idx {
                    let mut l = 1.0;
                    for &m in &idx {
                        if m != j {
                            l *= (x - self.nodes[m]) / (self.nodes[j] - self.nodes[m]);
                        }
                    }
                    c[j] = l;
                }
            }
        }
        Ok(c)
    }

    pub fn interp(&self, v: &[Complex64], x: f64) -> Result<Complex64> {
        let c = self.interpolation_weights(x)?;
        Ok(c.iter().zip(v).map(|(w, z)| z * *w).sum())
    }

    /// Interpolation of the derivative at `x`.
    pub fn interp_derivative(&self, v: &[Complex64], x: f64) -> Result<Complex64> {
        let dv = self.diff(v);
        self.interp(&dv, x)
    }

    /// `u†(x) = conj(u(-x))`, i.e. reversed and conjugated samples.
    pub fn pt_conjugate(&self, v: &[Complex64]) -> Vec<Complex64> {
        v.iter().rev().map(|z| z.conj()).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    pub fn sample_real(&self, f: impl Fn(f64) -> f64) -> Vec<Complex64> {
        self.nodes.iter().map(|&x| Complex64::new(f(x), 0.0)).collect()
    }

    pub fn l2_norm(&self, v: &[Complex64]) -> f64 {
        self.qweights
            .iter()
            .zip(v)
            .map(|(w, z)| w * z.norm_sqr())
            .sum::<f64>()
            .max(0.0)
            .sqrt()
    }

    pub fn h1_norm(&self, v: &[Complex64]) -> f64 {
        let dv = self.diff(v);
        (self.l2_norm(v).powi(2) + self.l2_norm(&dv).powi(2)).sqrt()
    }
}

/// Grid samples of a complex function tied to the grid that produced them.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::InvalidArgument(format!(
                "grid function has {} samples but grid has {} nodes",
                values.len(),
                grid.n()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.sample(f);
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.n()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    fn with_values(&self, values: Vec<Complex64>) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values,
        }
    }

    pub fn quadrature(&self) -> Complex64 {
        self.grid.quad(&self.values)
    }

    pub fn antiderivative_from_zero(&self) -> GridFunction {
        self.with_values(self.grid.antiderivative(&self.values))
    }

    pub fn derivative(&self) -> GridFunction {
        self.with_values(self.grid.diff(&self.values))
    }

    pub fn interpolate_at(&self, x: f64) -> Result<Complex64> {
        self.grid.interp(&self.values, x)
    }

    pub fn norm_h1(&self) -> f64 {
        self.grid.h1_norm(&self.values)
    }

    pub fn norm_l2(&self) -> f64 {
        self.grid.l2_norm(&self.values)
    }

    pub fn pt_conjugate(&self) -> GridFunction {
        self.with_values(self.grid.pt_conjugate(&self.values))
    }

    pub fn scale(&self, c: Complex64) -> GridFunction {
        self.with_values(self.values.iter().map(|z| z * c).collect())
    }

    /// Bilinear pairing `∫ f g dx` (no conjugation).
    pub fn pair(&self, other: &GridFunction) -> Complex64 {
        let prod: Vec<Complex64> = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        self.grid.quad(&prod)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// Averages `a` with its reflection so that `a[n-1-i][n-1-j] = parity * a[i][j]`
/// holds exactly; the discrete operators then commute with PT to the last bit.
fn symmetrize_reflection(a: &DMatrix<f64>, parity: f64) -> DMatrix<f64> {
    let n = a.nrows();
    DMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + parity * a[(n - 1 - i, n - 1 - j)]))
}

fn real_matvec(a: &DMatrix<f64>, v: &[Complex64]) -> Vec<Complex64> {
    let n = a.nrows();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (k, &vk) in v.iter().enumerate() {
        if vk.re == 0.0 && vk.im == 0.0 {
            continue;
        }
        let col = a.column(k);
        for j in 0..n {
            out[j] += vk * col[j];
        }
    }
    out
}

/// Clenshaw–Curtis weights on `N + 1` Chebyshev points.
fn clenshaw_curtis(big_n: usize) -> Vec<f64> {
    let nf = big_n as f64;
    let mut w = vec![0.0; big_n + 1];
    let theta: Vec<f64> = (0..=big_n).map(|j| PI * j as f64 / nf).collect();
    let mut v = vec![1.0; big_n.saturating_sub(1)];
    if big_n % 2 == 0 {
        w[0] = 1.0 / (nf * nf - 1.0);
        w[big_n] = w[0];
        for k in 1..big_n / 2 {
            let kf = k as f64;
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * kf * theta[i + 1]).cos() / (4.0 * kf * kf - 1.0);
            }
        }
        for (i, vi) in v.iter_mut().enumerate() {
            *vi -= (nf * theta[i + 1]).cos() / (nf * nf - 1.0);
        }
    } else {
        w[0] = 1.0 / (nf * nf);
        w[big_n] = w[0];
        for k in 1..=(big_n - 1) / 2 {
            let kf = k as f64;
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * kf * theta[i + 1]).cos() / (4.0 * kf * kf - 1.0);
            }
        }
    }
    for (i, vi) in v.iter().enumerate() {
        w[i + 1] = 2.0 * vi / nf;
    }
    w
}

/// Spectral integration through the Chebyshev coefficient expansion.
fn chebyshev_antiderivative(big_n: usize) -> DMatrix<f64> {
    let n = big_n + 1;
    let nf = big_n as f64;
    // values -> coefficients
    let mut to_coef = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        for j in 0..n {
            let mut v = (2.0 / nf) * (PI * (k * j) as f64 / nf).cos();
            if j == 0 || j == big_n {
                v *= 0.5;
            }
            if k == 0 || k == big_n {
                v *= 0.5;
            }
            to_coef[(k, j)] = v;
        }
    }
    // coefficients a_0..a_N -> primitive coefficients b_0..b_{N+1}, b_0 = 0
    let mut integ = DMatrix::<f64>::zeros(n + 1, n);
    for k in 1..=n {
        let kf = k as f64;
        if k == 1 {
            integ[(1, 0)] += 1.0;
            if n > 2 {
                integ[(1, 2)] -= 0.5;
            }
        } else {
            integ[(k, k - 1)] += 1.0 / (2.0 * kf);
            if k + 1 < n {
                integ[(k, k + 1)] -= 1.0 / (2.0 * kf);
            }
        }
    }
    // evaluate T_k at the nodes minus T_k(0)
    let mut eval = DMatrix::<f64>::zeros(n, n + 1);
    for j in 0..n {
        for k in 0..=n {
            let at_node = (PI * (k * j) as f64 / nf).cos();
            let at_zero = (PI * k as f64 / 2.0).cos();
            // cos(k pi / 2) is exactly 0, ±1; round away the 6e-17 residue
            let at_zero = at_zero.round() * (at_zero.abs() > 0.5) as i32 as f64;
            eval[(j, k)] = at_node - at_zero;
        }
    }
    eval * integ * to_coef
}

/// Returns (lo, hi, t) with x = (1-t) nodes[lo] + t nodes[hi] on a descending grid.
fn fd_bracket(nodes: &[f64], x: f64) -> (usize, usize, f64) {
    let n = nodes.len();
    let mut lo = 0;
    while lo + 2 < n && nodes[lo + 1] > x {
        lo += 1;
    }
    let hi = lo + 1;
    let t = (nodes[lo] - x) / (nodes[lo] - nodes[hi]);
    (lo, hi, t)
}
