//! Perturbation expansion of the eigenvalue pair at a collision current.
//!
//! At `I_c` the operator `L = M + λ⁽⁰⁾` has a Jordan block: one eigenfunction
//! `u0` with `∫ u0² = 0`. Writing `I = I_c + εa`, the colliding pair splits as
//! `λ⁽⁰⁾ + ε^{1/2} λ⁽¹⁾ + ε λ⁽²⁾`, with coefficients built from the canonical
//! solutions `K`, `ζ`, `w` of singular problems for `L`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::linalg::CMatrix;
use crate::spectral::{self, ReducedOperator};

const I_UNIT: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Largest eigenvalue gap accepted as "at the collision".
pub const COLLISION_GAP_TOL: f64 = 1e-3;

/// How the kernel direction `u0` is removed from singular solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gauge {
    /// `Σ w_j conj(u0_j) y_j = 0`: the minimum-norm solution.
    #[default]
    Hermitian,
    /// `y(0) = 0`.
    PointAtZero,
}

/// Jordan eigenvalue and mode at a collision current, normalized so that
/// `u0(0) = 1`, which for a PT-symmetric mode makes `Re u0` even and `Im u0` odd.
pub fn jordan_mode(grid: &Arc<Grid>, i_c: f64) -> Result<(Complex64, GridFunction)> {
    jordan_mode_of_pair(grid, i_c, 1)
}

pub fn jordan_mode_of_pair(grid: &Arc<Grid>, i_c: f64, ell: usize) -> Result<(Complex64, GridFunction)> {
    let lams = spectral::eigenvalues(grid, i_c, 2 * ell)?;
    let (l1, l2) = (lams[2 * ell - 2], lams[2 * ell - 1]);
    let gap = (l2 - l1).norm();
    if gap > COLLISION_GAP_TOL {
        return Err(Error::NotAtCollision {
            gap,
            tol: COLLISION_GAP_TOL,
        });
    }
    // the mean of a perturbed Jordan pair is accurate to first order in the perturbation
    let lambda0 = Complex64::new(0.5 * (l1 + l2).re, 0.0);
    // Just below I_c both members are real with PT-symmetric eigenvectors
    // u0 ± c√h g + O(h); their mean is u0 + O(h), and two offsets remove the
    // O(h) term. Inverse iteration at the collision itself only alternates
    // between u0 and the generalized eigenvector.
    let h = 1e-5;
    let near = mean_mode(grid, i_c - h, ell)?;
    let far = mean_mode(grid, i_c - 4.0 * h, ell)?;
    let mut u: Vec<Complex64> = near.iter().zip(&far).map(|(a, b)| (4.0 * a - b) / 3.0).collect();
    let pt = grid.pt_conjugate(&u);
    for (z, p) in u.iter_mut().zip(pt) {
        *z = 0.5 * (*z + p);
    }
    spectral::normalize_at_origin(grid, &mut u);
    Ok((lambda0, GridFunction::new(Arc::clone(grid), u)?))
}

fn mean_mode(grid: &Arc<Grid>, current: f64, ell: usize) -> Result<Vec<Complex64>> {
    let pairs = spectral::eigenpairs(grid, current, 2 * ell)?;
    let (a, b) = (&pairs[2 * ell - 2], &pairs[2 * ell - 1]);
    if a.lambda.im.abs() > spectral::COMPLEX_TOL || b.lambda.im.abs() > spectral::COMPLEX_TOL {
        return Err(Error::NotAtCollision {
            gap: (a.lambda - b.lambda).norm(),
            tol: COLLISION_GAP_TOL,
        });
    }
    Ok(a.u.values().iter().zip(b.u.values()).map(|(x, y)| 0.5 * (x + y)).collect())
}

/// Bordered solver for `L y = rhs` with `L = M + λ⁽⁰⁾` singular.
///
/// The system `[[L, c], [gᵀ, 0]] [y; s] = [rhs; 0]` is regular; `g` fixes the
/// gauge and the extra unknown `s` absorbs any component of `rhs` outside
/// the range of `L`.
pub struct ConstrainedSolver {
    grid: Arc<Grid>,
    u0: GridFunction,
    reduced: ReducedOperator,
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    current: f64,
    lambda0: Complex64,
}

impl ConstrainedSolver {
    pub fn new(grid: &Arc<Grid>, current: f64, lambda0: Complex64, u0: &GridFunction, gauge: Gauge) -> Result<Self> {
        let reduced = ReducedOperator::new(grid, current, 0.0);
        let m = reduced.matrix.nrows();
        let full_gauge: Vec<Complex64> = match gauge {
            Gauge::Hermitian => grid
                .qweights()
                .iter()
                .zip(u0.values())
                .map(|(w, z)| z.conj() * *w)
                .collect(),
            Gauge::PointAtZero => grid
                .interpolation_weights(0.0)?
                .into_iter()
                .map(|c| Complex64::new(c, 0.0))
                .collect(),
        };
        let g = reduced.pull_back(&full_gauge);
        let u0i = &u0.values()[1..grid.n() - 1];
        let mut a = CMatrix::zeros(m + 1, m + 1);
        for i in 0..m {
            for j in 0..m {
                a[(i, j)] = reduced.matrix[(i, j)];
            }
            a[(i, i)] += lambda0;
            a[(i, m)] = u0i[i].conj();
            a[(m, i)] = g[i];
        }
        Ok(Self {
            grid: Arc::clone(grid),
            u0: u0.clone(),
            reduced,
            lu: a.lu(),
            current,
            lambda0,
        })
    }

    /// Solves `L y = rhs` in the configured gauge; `rhs` must satisfy
    /// `|∫ rhs u0| ≤ 1e-5 ‖rhs‖`.
    pub fn solve(&self, rhs: &GridFunction) -> Result<GridFunction> {
        let norm = rhs.norm_l2();
        let pairing = rhs.pair(&self.u0).norm();
        if pairing > 1e-5 * norm.max(f64::MIN_POSITIVE) && norm > 0.0 {
            return Err(Error::InconsistentRhs { residual: pairing / norm });
        }
        let n = self.grid.n();
        let m = n - 2;
        let mut b = nalgebra::DVector::<Complex64>::zeros(m + 1);
        for i in 0..m {
            b[i] = rhs.values()[i + 1];
        }
        let sol = self
            .lu
            .solve(&b)
            .ok_or_else(|| Error::NumericalFailure("bordered collision system is singular".into()))?;
        let interior: Vec<Complex64> = (0..m).map(|i| sol[i]).collect();
        GridFunction::new(Arc::clone(&self.grid), self.reduced.extend(&interior))
    }

    /// `L y` evaluated on interior collocation rows (boundary entries zero).
    pub fn apply(&self, y: &GridFunction) -> Vec<Complex64> {
        let n = self.grid.n();
        let mut out = spectral::apply_operator(&self.grid, self.current, self.lambda0.re, y.values());
        out[0] = Complex64::new(0.0, 0.0);
        out[n - 1] = Complex64::new(0.0, 0.0);
        out
    }
}

#[derive(Debug, Clone)]
pub struct CollisionExpansion {
    pub i_c: f64,
    pub lambda0: Complex64,
    pub u0: GridFunction,
    pub k: GridFunction,
    pub zeta: GridFunction,
    pub w: GridFunction,
    pub a1: Complex64,
    pub b: Complex64,
    pub theta1: Complex64,
    pub theta2: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
    pub d3: Complex64,
}

/// Scalar part of an expansion, as exported to JSON.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExpansionReport {
    #[serde(rename = "I_c")]
    pub i_c: f64,
    pub lambda0: Complex64,
    pub a1: Complex64,
    pub b: Complex64,
    pub theta1: Complex64,
    pub theta2: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
    pub d3: Complex64,
}

impl CollisionExpansion {
    pub fn report(&self) -> ExpansionReport {
        ExpansionReport {
            i_c: self.i_c,
            lambda0: self.lambda0,
            a1: self.a1,
            b: self.b,
            theta1: self.theta1,
            theta2: self.theta2,
            d1: self.d1,
            d2: self.d2,
            d3: self.d3,
        }
    }

    /// Second-order coefficient of the split for `I = I_c + εa`:
    /// `λ⁽²⁾ = ((λ⁽¹⁾)² d1 + a (d2 - d3)) / (2b)`.
    pub fn lambda2(&self, a: f64) -> Result<Complex64> {
        self.check_b()?;
        let l1sq = self.lambda1_squared(a)?;
        Ok((l1sq * self.d1 + a * (self.d2 - self.d3)) / (2.0 * self.b))
    }

    /// `(λ⁽¹⁾)² = -a a1 / b`.
    pub fn lambda1_squared(&self, a: f64) -> Result<Complex64> {
        self.check_b()?;
        Ok(-a * self.a1 / self.b)
    }

    fn check_b(&self) -> Result<()> {
        if self.b.norm() < 1e-12 {
            return Err(Error::DegenerateExpansion(format!("|b| = {:.3e}", self.b.norm())));
        }
        Ok(())
    }
}

fn x_times(u: &GridFunction) -> GridFunction {
    let vals: Vec<Complex64> = u.grid().nodes().iter().zip(u.values()).map(|(x, z)| z * *x).collect();
    GridFunction::new(Arc::clone(u.grid()), vals).expect("same grid")
}

fn shifted(u: &GridFunction, c: Complex64) -> GridFunction {
    let vals: Vec<Complex64> = u.values().iter().map(|z| z - c).collect();
    GridFunction::new(Arc::clone(u.grid()), vals).expect("same grid")
}

/// Full expansion at the collision current `i_c` in the default gauge.
pub fn expansion_coefficients(grid: &Arc<Grid>, i_c: f64) -> Result<CollisionExpansion> {
    expansion_coefficients_with_gauge(grid, i_c, Gauge::Hermitian)
}

pub fn expansion_coefficients_with_gauge(grid: &Arc<Grid>, i_c: f64, gauge: Gauge) -> Result<CollisionExpansion> {
    let (lambda0, u0) = jordan_mode(grid, i_c)?;
    let solver = ConstrainedSolver::new(grid, i_c, lambda0, &u0, gauge)?;
    let xu0 = x_times(&u0);
    let a1 = -I_UNIT * xu0.pair(&u0);
    let k = solver.solve(&u0)?;
    let b = k.pair(&u0);
    let int_u0 = u0.quadrature();
    if int_u0.norm() < 1e-12 {
        return Err(Error::DegenerateExpansion("∫ u0 vanishes".into()));
    }
    let theta1 = b / int_u0;
    let zeta = solver.solve(&shifted(&k, theta1))?;
    let theta2 = -I_UNIT * xu0.pair(&u0) / int_u0;
    let rhs_w = shifted(&xu0.scale(-I_UNIT), theta2);
    let w = solver.solve(&rhs_w)?;
    let d1 = zeta.pair(&u0);
    let d2 = w.pair(&u0);
    let d3 = I_UNIT * x_times(&k).pair(&u0);
    Ok(CollisionExpansion {
        i_c,
        lambda0,
        u0,
        k,
        zeta,
        w,
        a1,
        b,
        theta1,
        theta2,
        d1,
        d2,
        d3,
    })
}

/// Predicted pair at `I = I_c + eps a`: `λ⁽⁰⁾ ± ε^{1/2} λ⁽¹⁾ + ε λ⁽²⁾`.
pub fn lambda_split(exp: &CollisionExpansion, a: f64, eps: f64) -> Result<(Complex64, Complex64)> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let l1 = exp.lambda1_squared(a)?.sqrt();
    let l2 = exp.lambda2(a)?;
    let base = exp.lambda0 + eps * l2;
    let r = eps.sqrt() * l1;
    Ok((base + r, base - r))
}

/// Residual `‖L y - rhs‖₂` on interior rows, relative to `‖rhs‖₂`.
pub fn solve_residual(solver: &ConstrainedSolver, y: &GridFunction, rhs: &GridFunction) -> f64 {
    let ly = solver.apply(y);
    let n = ly.len();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 1..n - 1 {
        num += (ly[i] - rhs.values()[i]).norm_sqr();
        den += rhs.values()[i].norm_sqr();
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}
