//! Dense complex eigensolver: diagonal balancing, Householder reduction to
//! upper Hessenberg form, and single-shift QR with Wilkinson shifts and
//! exceptional shifts. Eigenvectors are recovered afterwards by inverse
//! iteration on the original (unbalanced) matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const C1: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[inline]
fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Diagonal similarity scaling by powers of two so that row and column
/// norms are comparable. Eigenvalues are unchanged.
pub fn balance(a: &mut CMatrix) {
    let n = a.nrows();
    const RADIX: f64 = 2.0;
    let mut converged = false;
    let mut sweeps = 0;
    while !converged && sweeps < 100 {
        converged = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += abs1(a[(j, i)]);
                    r += abs1(a[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let rr = r;
            while cc < rr / RADIX {
                f *= RADIX;
                cc *= RADIX * RADIX;
            }
            while cc >= rr * RADIX {
                f /= RADIX;
                cc /= RADIX * RADIX;
            }
            if (c * f + r / f) < 0.95 * s {
                converged = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form.
pub fn hessenberg(a: &mut CMatrix) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    let mut v = vec![C0; n];
    for k in 0..n - 2 {
        let mut alpha2 = 0.0;
        for i in k + 1..n {
            alpha2 += a[(i, k)].norm_sqr();
        }
        let alpha = alpha2.sqrt();
        if alpha == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { C1 } else { x0 / x0.norm() };
        // v = x + phase*alpha*e1, H = I - 2 v v^H / (v^H v)
        for i in k + 1..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] += phase * alpha;
        let mut vnorm2 = 0.0;
        for vi in v.iter().take(n).skip(k + 1) {
            vnorm2 += vi.norm_sqr();
        }
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;
        // left: A <- H A on rows k+1..n
        for j in k..n {
            let mut s = C0;
            for i in k + 1..n {
                s += v[i].conj() * a[(i, j)];
            }
            s *= tau;
            for i in k + 1..n {
                let vi = v[i];
                a[(i, j)] -= vi * s;
            }
        }
        // right: A <- A H on columns k+1..n
        for i in 0..n {
            let mut s = C0;
            for j in k + 1..n {
                s += a[(i, j)] * v[j];
            }
            s *= tau;
            for j in k + 1..n {
                let vj = v[j].conj();
                a[(i, j)] -= s * vj;
            }
        }
        for i in k + 2..n {
            a[(i, k)] = C0;
        }
    }
}

/// Eigenvalue of the 2x2 block `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let l1 = tr + root;
    let l2 = tr - root;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift QR.
pub fn hessenberg_eigenvalues(mut h: CMatrix) -> Result<Vec<Complex64>> {
    let n = h.nrows();
    let mut eig = vec![C0; n];
    if n == 0 {
        return Ok(eig);
    }
    let eps = f64::EPSILON;
    let small = f64::MIN_POSITIVE / eps;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let max_total = 60 * n.max(10);
    let mut total = 0usize;
    while hi > 0 {
        // search for a negligible subdiagonal entry
        let mut l = hi;
        while l > 0 {
            let s = abs1(h[(l - 1, l - 1)]) + abs1(h[(l, l)]);
            let sub = abs1(h[(l, l - 1)]);
            if sub <= small || sub <= eps * s {
                h[(l, l - 1)] = C0;
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        if l + 1 == hi {
            let (a, b, c, d) = (h[(l, l)], h[(l, hi)], h[(hi, l)], h[(hi, hi)]);
            let tr = (a + d) * 0.5;
            let root = (((a - d) * 0.5).powi(2) + b * c).sqrt();
            eig[l] = tr + root;
            eig[hi] = tr - root;
            if l == 0 {
                break;
            }
            hi = l - 1;
            iter = 0;
            continue;
        }
        total += 1;
        iter += 1;
        if total > max_total {
            return Err(Error::NumericalFailure(format!(
                "QR iteration did not converge (active block {l}..={hi}, n={n})"
            )));
        }
        let sigma = if iter % 10 == 0 {
            // exceptional shift
            h[(hi, hi)] + Complex64::new(0.75 * abs1(h[(hi, hi - 1)]), 0.0)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_sweep(&mut h, l, hi, sigma);
    }
    if hi == 0 {
        eig[0] = h[(0, 0)];
    }
    Ok(eig)
}

/// One implicit single-shift QR sweep on the active block `l..=hi`.
fn qr_sweep(h: &mut CMatrix, l: usize, hi: usize, sigma: Complex64) {
    for k in l..hi {
        let (x, y) = if k == l {
            (h[(l, l)] - sigma, h[(l + 1, l)])
        } else {
            (h[(k, k - 1)], h[(k + 1, k - 1)])
        };
        let (c, s) = givens(x, y);
        let col0 = if k == l { l } else { k - 1 };
        for j in col0..=hi {
            let a = h[(k, j)];
            let b = h[(k + 1, j)];
            h[(k, j)] = a * c + s * b;
            h[(k + 1, j)] = -s.conj() * a + b * c;
        }
        if k > l {
            h[(k + 1, k - 1)] = C0;
        }
        let row1 = (k + 2).min(hi);
        for i in l..=row1 {
            let a = h[(i, k)];
            let b = h[(i, k + 1)];
            h[(i, k)] = a * c + b * s.conj();
            h[(i, k + 1)] = -a * s + b * c;
        }
    }
}

/// Rotation `[[c, s], [-conj(s), c]]` mapping `(x, y)` to `(r, 0)`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, C0);
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    let c = ax / r;
    let s = (x / ax) * y.conj() / r;
    (c, s)
}

/// All eigenvalues of a general complex matrix.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);
    hessenberg_eigenvalues(h)
}

/// Result of inverse iteration about a shift.
#[derive(Debug, Clone)]
pub struct InverseIteration {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
    pub residual: f64,
}

fn max_abs_norm(a: &CMatrix) -> f64 {
    a.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// Inverse iteration for the eigenpair of `a` closest to `shift`.
///
/// The shift is refined once from the first pass, which recovers close to
/// full accuracy even when the QR eigenvalue carries the roundoff of a
/// badly scaled matrix.
pub fn inverse_iteration(a: &CMatrix, shift: Complex64, passes: usize) -> Result<InverseIteration> {
    let n = a.nrows();
    let scale = max_abs_norm(a).max(1.0);
    let mut mu = shift;
    let mut x: Vec<Complex64> = (0..n)
        .map(|j| Complex64::new(1.0 + 0.37 * ((j * 7919) % 13) as f64 / 13.0, 0.05 * (j % 5) as f64))
        .collect();
    normalize(&mut x);
    let mut value = mu;
    for pass in 0..passes.max(1) {
        let mut m = a.clone();
        let bump = if pass == 0 { 1e-14 * scale } else { 0.0 };
        for i in 0..n {
            m[(i, i)] -= mu + Complex64::new(bump, 0.0);
        }
        let mu_eff = mu + Complex64::new(bump, 0.0);
        let lu = m.lu();
        for _ in 0..3 {
            let rhs = nalgebra::DVector::from_vec(x.clone());
            let y = match lu.solve(&rhs) {
                Some(y) => y,
                None => {
                    return Err(Error::NumericalFailure(format!(
                        "singular shifted matrix at shift {mu_eff}"
                    )))
                }
            };
            let yy: f64 = y.iter().map(|z| z.norm_sqr()).sum();
            if !yy.is_finite() || yy == 0.0 {
                return Err(Error::NumericalFailure(format!(
                    "inverse iteration diverged at shift {mu_eff}"
                )));
            }
            let mut yx = C0;
            for i in 0..n {
                yx += y[i].conj() * x[i];
            }
            value = mu_eff + yx / yy;
            x = y.iter().copied().collect();
            normalize(&mut x);
        }
        mu = value;
    }
    let residual = residual_norm(a, value, &x);
    Ok(InverseIteration {
        value,
        vector: x,
        residual,
    })
}

pub fn residual_norm(a: &CMatrix, lambda: Complex64, x: &[Complex64]) -> f64 {
    let n = a.nrows();
    let mut r2 = 0.0;
    let mut x2 = 0.0;
    for i in 0..n {
        let mut s = C0;
        for j in 0..n {
            s += a[(i, j)] * x[j];
        }
        r2 += (s - lambda * x[i]).norm_sqr();
        x2 += x[i].norm_sqr();
    }
    (r2 / x2).sqrt()
}

fn normalize(x: &mut [Complex64]) {
    let nrm: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if nrm > 0.0 {
        for z in x.iter_mut() {
            *z /= nrm;
        }
    }
}

/// Solves `a x = b` by partial-pivoting LU.
pub fn solve(a: &CMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let lu = a.clone().lu();
    let rhs = nalgebra::DVector::from_column_slice(b);
    lu.solve(&rhs)
        .map(|x| x.iter().copied().collect())
        .ok_or_else(|| Error::NumericalFailure("singular linear system".into()))
}

pub fn matvec(a: &CMatrix, x: &[Complex64]) -> Vec<Complex64> {
    let n = a.nrows();
    let m = a.ncols();
    debug_assert_eq!(m, x.len());
    let mut y = vec![C0; n];
    for j in 0..m {
        let xj = x[j];
        if xj == C0 {
            continue;
        }
        let col = a.column(j);
        for i in 0..n {
            y[i] += col[i] * xj;
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn hessenberg_preserves_trace_and_shape() {
        let a = random_matrix(12, 3);
        let mut h = a.clone();
        hessenberg(&mut h);
        for i in 2..12 {
            for j in 0..i - 1 {
                assert_eq!(h[(i, j)], C0);
            }
        }
        assert!((a.trace() - h.trace()).norm() < 1e-12);
    }

    #[test]
    fn triangular_eigenvalues_are_diagonal() {
        let mut a = random_matrix(8, 1);
        for i in 0..8 {
            for j in 0..i {
                a[(i, j)] = C0;
            }
        }
        let mut ev = eigenvalues(&a).unwrap();
        let mut diag: Vec<Complex64> = (0..8).map(|i| a[(i, i)]).collect();
        let key = |z: &Complex64| (z.re * 1e6).round() as i64;
        ev.sort_by_key(key);
        diag.sort_by_key(key);
        for (x, y) in ev.iter().zip(&diag) {
            assert!((x - y).norm() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn random_matrix_eigenpairs_have_small_residuals() {
        let a = random_matrix(40, 7);
        let ev = eigenvalues(&a).unwrap();
        let sum: Complex64 = ev.iter().sum();
        assert!((sum - a.trace()).norm() < 1e-9);
        for &lam in ev.iter().take(5) {
            let r = residual_norm(&a, lam, &inverse_iteration(&a, lam, 1).unwrap().vector);
            assert!(r < 1e-9, "residual {r}");
        }
    }

    #[test]
    fn jordan_block_is_handled() {
        // 2x2 Jordan block embedded in a diagonal matrix
        let mut a = CMatrix::zeros(4, 4);
        a[(0, 0)] = Complex64::new(2.0, 0.0);
        a[(1, 1)] = Complex64::new(2.0, 0.0);
        a[(0, 1)] = C1;
        a[(2, 2)] = Complex64::new(5.0, 0.0);
        a[(3, 3)] = Complex64::new(-1.0, 0.5);
        let ev = eigenvalues(&a).unwrap();
        let near2 = ev.iter().filter(|z| (**z - 2.0).norm() < 1e-6).count();
        assert_eq!(near2, 2);
    }

    #[test]
    fn solve_recovers_vector() {
        let a = random_matrix(10, 11);
        let x: Vec<Complex64> = (0..10).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let b = matvec(&a, &x);
        let y = solve(&a, &b).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).norm() < 1e-10);
        }
    }
}
