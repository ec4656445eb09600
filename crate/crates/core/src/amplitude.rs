//! Reduced amplitude dynamics near the first instability of the normal state.
//!
//! All systems are the truncated (remainder-free) forms. The coefficients are
//! used in whatever pair labeling they were computed in: `im_lambda1` is the
//! signed `Im λ₁` of the mode `u1`, and `χ₁₁`, `χ₁₂` belong to the same `u1`.
//! Writing `ψ ≈ ω₁ u₁ + ω₂ u₂` in physical time gives
//!
//! ```text
//! ω₁' = (ε - i Im λ₁ + χ₁₁|ω₁|² + χ₁₂|ω₂|²) ω₁
//! ω₂' = (ε + i Im λ₁ + χ₁₁*|ω₂|² + χ₁₂*|ω₁|²) ω₂
//! ```
//!
//! and `ω_j = √ε e^{∓i Im λ₁ t} α_j(ε t)` recovers the slow `α` system. The
//! PT-symmetric basis `v₁ = u₁ + u₂`, `v₂ = i(u₁ - u₂)` has coordinates
//! `β₁ = (ω₁ + ω₂)/2`, `β₂ = (ω₁ - ω₂)/2i`, and
//! `A = |β₁|² + |β₂|² = (|ω₁|² + |ω₂|²)/2`,
//! `γ = i(β₁*β₂ - β₁β₂*) = (|ω₁|² - |ω₂|²)/2`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bifurcation::BifCoeffs;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// State norm treated as blow-up.
pub const BLOW_UP: f64 = 1e6;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaState {
    pub alpha1: Complex64,
    pub alpha2: Complex64,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RGState {
    #[serde(rename = "A")]
    pub a: f64,
    pub gamma: f64,
    pub t: f64,
}

impl RGState {
    pub fn new(a: f64, gamma: f64) -> Self {
        Self { a, gamma, t: 0.0 }
    }

    /// `s = γ/A`, zero at the origin.
    pub fn ratio(&self) -> f64 {
        if self.a == 0.0 {
            0.0
        } else {
            self.gamma / self.a
        }
    }
}

/// Slow-time rhs of the coupled `α` system.
pub fn alpha_rhs(s: &AlphaState, chi11: Complex64, chi12: Complex64) -> (Complex64, Complex64) {
    let (p1, p2) = (s.alpha1.norm_sqr(), s.alpha2.norm_sqr());
    (
        s.alpha1 + (chi11 * p1 + chi12 * p2) * s.alpha1,
        s.alpha2 + (chi11.conj() * p2 + chi12.conj() * p1) * s.alpha2,
    )
}

/// Rhs of the ratio `r = |α₁|/|α₂|`.
pub fn riccati_rhs(r: f64, a2sq: f64, chi_hat: Complex64) -> f64 {
    -chi_hat.re * a2sq * r * (r * r - 1.0)
}

/// Rhs of the `(A, γ)` system.
pub fn rg_rhs(s: &RGState, eps: f64, chi_tilde: Complex64, chi_hat: Complex64, chi11: Complex64) -> (f64, f64) {
    let _ = chi11;
    let (a, g) = (s.a, s.gamma);
    (
        2.0 * ((eps - chi_tilde.re * a) * a - chi_hat.re * g * g),
        2.0 * (eps - (chi_tilde + chi_hat).re * a) * g,
    )
}

/// Rhs of the `ω` system in physical time.
pub fn omega_rhs(
    w1: Complex64,
    w2: Complex64,
    eps: f64,
    im_lambda1: f64,
    chi11: Complex64,
    chi12: Complex64,
) -> (Complex64, Complex64) {
    let (p1, p2) = (w1.norm_sqr(), w2.norm_sqr());
    (
        (eps - I * im_lambda1 + chi11 * p1 + chi12 * p2) * w1,
        (eps + I * im_lambda1 + chi11.conj() * p2 + chi12.conj() * p1) * w2,
    )
}

/// Rhs of the `(β₁, β₂)` system, obtained from the `ω` system.
pub fn beta_rhs(
    b1: Complex64,
    b2: Complex64,
    eps: f64,
    im_lambda1: f64,
    chi11: Complex64,
    chi12: Complex64,
) -> (Complex64, Complex64) {
    let (d1, d2) = omega_rhs(b1 + I * b2, b1 - I * b2, eps, im_lambda1, chi11, chi12);
    (0.5 * (d1 + d2), (d1 - d2) / (2.0 * I))
}

/// `(A, γ)` of a `β` pair.
pub fn beta_to_rg(b1: Complex64, b2: Complex64) -> (f64, f64) {
    let a = b1.norm_sqr() + b2.norm_sqr();
    let g = (I * (b1.conj() * b2 - b1 * b2.conj())).re;
    (a, g)
}

/// Rhs of the polar form on the PT-symmetric manifold, `R` and
/// `θ = arg(β₁ + iβ₂)`.
pub fn polar_rhs(r: f64, eps: f64, im_lambda1: f64, chi_tilde: Complex64) -> (f64, f64) {
    (eps * r - chi_tilde.re * r * r * r, -im_lambda1 - chi_tilde.im * r * r)
}

/// The reduced systems with their parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "lowercase")]
pub enum System {
    /// Real stationary amplitude `a' = a + χ₁₁ a³` on the slow time.
    Scalar { chi11: f64 },
    Alpha { chi11: Complex64, chi12: Complex64 },
    Omega { eps: f64, im_lambda1: f64, chi11: Complex64, chi12: Complex64 },
    Beta { eps: f64, im_lambda1: f64, chi11: Complex64, chi12: Complex64 },
    Rg { eps: f64, chi_tilde: Complex64, chi_hat: Complex64 },
    Polar { eps: f64, im_lambda1: f64, chi_tilde: Complex64 },
}

impl System {
    pub fn alpha(c: &BifCoeffs) -> Self {
        System::Alpha { chi11: c.chi11, chi12: c.chi12 }
    }

    pub fn omega(c: &BifCoeffs, eps: f64) -> Self {
        System::Omega { eps, im_lambda1: c.lambda1.im, chi11: c.chi11, chi12: c.chi12 }
    }

    pub fn beta(c: &BifCoeffs, eps: f64) -> Self {
        System::Beta { eps, im_lambda1: c.lambda1.im, chi11: c.chi11, chi12: c.chi12 }
    }

    pub fn rg(c: &BifCoeffs, eps: f64) -> Self {
        System::Rg { eps, chi_tilde: c.chi_tilde, chi_hat: c.chi_hat }
    }

    pub fn polar(c: &BifCoeffs, eps: f64) -> Self {
        System::Polar { eps, im_lambda1: c.lambda1.im, chi_tilde: c.chi_tilde }
    }

    pub fn name(&self) -> &'static str {
        match self {
            System::Scalar { .. } => "scalar",
            System::Alpha { .. } => "alpha",
            System::Omega { .. } => "omega",
            System::Beta { .. } => "beta",
            System::Rg { .. } => "rg",
            System::Polar { .. } => "polar",
        }
    }

    pub fn dim(&self) -> usize {
        self.components().len()
    }

    /// CSV column names of the real state components.
    pub fn components(&self) -> &'static [&'static str] {
        match self {
            System::Scalar { .. } => &["a"],
            System::Alpha { .. } => &["re_alpha1", "im_alpha1", "re_alpha2", "im_alpha2"],
            System::Omega { .. } => &["re_omega1", "im_omega1", "re_omega2", "im_omega2"],
            System::Beta { .. } => &["re_beta1", "im_beta1", "re_beta2", "im_beta2"],
            System::Rg { .. } => &["A", "gamma"],
            System::Polar { .. } => &["R", "theta"],
        }
    }

    pub fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let c = |k: usize| Complex64::new(y[k], y[k + 1]);
        let put = |dy: &mut [f64], a: Complex64, b: Complex64| {
            dy[0] = a.re;
            dy[1] = a.im;
            dy[2] = b.re;
            dy[3] = b.im;
        };
        match *self {
            System::Scalar { chi11 } => dy[0] = y[0] + chi11 * y[0].powi(3),
            System::Alpha { chi11, chi12 } => {
                let s = AlphaState { alpha1: c(0), alpha2: c(2), tau: 0.0 };
                let (a, b) = alpha_rhs(&s, chi11, chi12);
                put(dy, a, b);
            }
            System::Omega { eps, im_lambda1, chi11, chi12 } => {
                let (a, b) = omega_rhs(c(0), c(2), eps, im_lambda1, chi11, chi12);
                put(dy, a, b);
            }
            System::Beta { eps, im_lambda1, chi11, chi12 } => {
                let (a, b) = beta_rhs(c(0), c(2), eps, im_lambda1, chi11, chi12);
                put(dy, a, b);
            }
            System::Rg { eps, chi_tilde, chi_hat } => {
                let (a, g) = rg_rhs(&RGState::new(y[0], y[1]), eps, chi_tilde, chi_hat, Complex64::default());
                dy[0] = a;
                dy[1] = g;
            }
            System::Polar { eps, im_lambda1, chi_tilde } => {
                let (r, th) = polar_rhs(y[0], eps, im_lambda1, chi_tilde);
                dy[0] = r;
                dy[1] = th;
            }
        }
    }
}

fn rk4_step(sys: &System, y: &mut [f64], h: f64, work: &mut [Vec<f64>; 5]) {
    let n = y.len();
    let [k1, k2, k3, k4, tmp] = work;
    sys.rhs(y, k1);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    sys.rhs(tmp, k2);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    sys.rhs(tmp, k3);
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    sys.rhs(tmp, k4);
    for i in 0..n {
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

fn work_for(n: usize) -> [Vec<f64>; 5] {
    std::array::from_fn(|_| vec![0.0; n])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub system: System,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Set when the state norm exceeded [`BLOW_UP`]; the run stops there.
    pub blown_up: bool,
    /// Max-norm difference of the final states at `dt` and `dt/2`.
    pub halving_error: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory has the initial state")
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,{}", self.system.components().join(","))?;
        for (t, y) in self.times.iter().zip(&self.states) {
            write!(w, "{t:.16e}")?;
            for v in y {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn run(sys: &System, y0: &[f64], t_end: f64, dt: f64, stride: usize) -> (Vec<f64>, Vec<Vec<f64>>, bool) {
    let steps = (t_end / dt).ceil() as usize;
    let h = t_end / steps as f64;
    let mut y = y0.to_vec();
    let mut work = work_for(y.len());
    let (mut times, mut states) = (vec![0.0], vec![y.clone()]);
    for k in 1..=steps {
        rk4_step(sys, &mut y, h, &mut work);
        let norm = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(norm <= BLOW_UP) {
            times.push(k as f64 * h);
            states.push(y);
            return (times, states, true);
        }
        if k % stride == 0 || k == steps {
            times.push(k as f64 * h);
            states.push(y.clone());
        }
    }
    (times, states, false)
}

/// Classical RK4 with a fixed step, sampled every `stride` steps and at the
/// end. The run is repeated with `dt/2` to report the step-halving error.
pub fn integrate(sys: &System, y0: &[f64], t_end: f64, dt: f64, stride: usize) -> Result<Trajectory> {
    if !(dt > 0.0) || !(t_end > 0.0) {
        return Err(Error::InvalidArgument("dt and t_end must be positive".into()));
    }
    if y0.len() != sys.dim() {
        return Err(Error::InvalidArgument(format!(
            "{} system needs {} components, got {}",
            sys.name(),
            sys.dim(),
            y0.len()
        )));
    }
    let stride = stride.max(1);
    let (times, states, blown_up) = run(sys, y0, t_end, dt, stride);
    let halving_error = if blown_up {
        None
    } else {
        let (_, fine, fine_blown) = run(sys, y0, t_end, 0.5 * dt, usize::MAX);
        (!fine_blown).then(|| {
            let (a, b) = (states.last().unwrap(), fine.last().unwrap());
            a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        })
    };
    if blown_up {
        log::warn!("{} trajectory left the ball of radius {BLOW_UP:e}", sys.name());
    }
    Ok(Trajectory { system: *sys, times, states, blown_up, halving_error })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    StableNode,
    UnstableNode,
    Saddle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub state: RGState,
    pub kind: EquilibriumKind,
    /// Linearization eigenvalues, ascending.
    pub eigenvalues: [f64; 2],
    /// Unit eigenvectors in `(A, γ)` order, matching `eigenvalues`.
    pub eigenvectors: [[f64; 2]; 2],
}

fn rg_jacobian(a: f64, g: f64, eps: f64, chi_tilde: Complex64, chi_hat: Complex64) -> [[f64; 2]; 2] {
    let s = (chi_tilde + chi_hat).re;
    [
        [2.0 * eps - 4.0 * chi_tilde.re * a, -4.0 * chi_hat.re * g],
        [-2.0 * s * g, 2.0 * (eps - s * a)],
    ]
}

fn sym2_eigen(j: [[f64; 2]; 2]) -> Result<([f64; 2], [[f64; 2]; 2])> {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = tr * tr / 4.0 - det;
    if disc < 0.0 {
        return Err(Error::NumericalFailure("complex linearization eigenvalues".into()));
    }
    let r = disc.sqrt();
    let vals = [tr / 2.0 - r, tr / 2.0 + r];
    let scale = j.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let vec_for = |mu: f64, fallback: [f64; 2]| {
        let cands = [[j[0][1], mu - j[0][0]], [mu - j[1][1], j[1][0]]];
        let best = if cands[0][0].hypot(cands[0][1]) >= cands[1][0].hypot(cands[1][1]) {
            cands[0]
        } else {
            cands[1]
        };
        let n = best[0].hypot(best[1]);
        if n <= 1e-12 * scale {
            fallback
        } else {
            let s = if best[1] < 0.0 || (best[1] == 0.0 && best[0] < 0.0) { -1.0 } else { 1.0 };
            [s * best[0] / n, s * best[1] / n]
        }
    };
    let v0 = vec_for(vals[0], [1.0, 0.0]);
    let v1 = vec_for(vals[1], [0.0, 1.0]);
    Ok((vals, [v0, v1]))
}

/// The four equilibria of the truncated `(A, γ)` system with their
/// linearizations: the normal state, the stable periodic orbit at
/// `A = ε/Re χ̃`, and the two saddles `A = ±γ = ε/(2|Re χ₁₁|)`.
pub fn equilibria(eps: f64, coeffs: &BifCoeffs) -> Result<Vec<Equilibrium>> {
    let (ct, ch) = (coeffs.chi_tilde, coeffs.chi_hat);
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    if !(ct.re > 0.0 && ch.re > 0.0) {
        return Err(Error::InvalidRegime(format!(
            "need Re χ̃ > 0 and Re χ̂ > 0, got {:.4} and {:.4}",
            ct.re, ch.re
        )));
    }
    let saddle = eps / (2.0 * coeffs.chi11.re.abs());
    let points = [(0.0, 0.0), (eps / ct.re, 0.0), (saddle, saddle), (saddle, -saddle)];
    points
        .iter()
        .map(|&(a, g)| {
            let (vals, vecs) = sym2_eigen(rg_jacobian(a, g, eps, ct, ch))?;
            let tol = 1e-12 * eps;
            let kind = if vals[1] < -tol {
                EquilibriumKind::StableNode
            } else if vals[0] > tol {
                EquilibriumKind::UnstableNode
            } else {
                EquilibriumKind::Saddle
            };
            Ok(Equilibrium { state: RGState::new(a, g), kind, eigenvalues: vals, eigenvectors: vecs })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnMapEigs {
    /// Period of the degenerate orbit `ω₂ = 0`.
    pub period: f64,
    pub mu: f64,
    pub a: f64,
    pub b: f64,
    /// `{μ, e^{a+ib}, e^{a-ib}}`.
    pub analytic: [Complex64; 3],
    /// Eigenvalues of the finite-difference Jacobian of the return map,
    /// ordered to match `analytic`.
    pub numeric: [Complex64; 3],
    pub jacobian: [[f64; 3]; 3],
    /// Leading-order eigenvalues of `DF - Id`.
    pub leading_order: [Complex64; 3],
}

impl ReturnMapEigs {
    pub fn max_deviation(&self) -> f64 {
        self.analytic
            .iter()
            .zip(&self.numeric)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
    }
}

/// `Im λ₁ + ε Im χ₁₁/Re χ₁₁`, the signed rotation rate of the orbit `ω₂ = 0`.
fn degenerate_rate(eps: f64, c: &BifCoeffs) -> f64 {
    c.lambda1.im + eps * c.chi11.im / c.chi11.re
}

struct ReturnMap {
    sys: System,
    period: f64,
    steps_per_period: usize,
}

impl ReturnMap {
    /// Integrates from `(Re ω₁, Re ω₂, Im ω₂)` on the section until the phase
    /// of `ω₁` has advanced by one full turn, then locates the crossing of
    /// `Im ω₁ = 0` inside the last step.
    fn apply(&self, x: [f64; 3]) -> Result<[f64; 3]> {
        let h = self.period / self.steps_per_period as f64;
        let mut y = vec![x[0], 0.0, x[1], x[2]];
        let mut work = work_for(4);
        let mut turned = 0.0;
        for _ in 0..3 * self.steps_per_period {
            let prev = y.clone();
            rk4_step(&self.sys, &mut y, h, &mut work);
            let dphi = (Complex64::new(y[0], y[1]) / Complex64::new(prev[0], prev[1])).arg();
            turned += dphi;
            if turned.abs() >= 2.0 * PI {
                let excess = turned.abs() - 2.0 * PI;
                let f = |s: f64, work: &mut [Vec<f64>; 5]| {
                    let mut z = prev.clone();
                    rk4_step(&self.sys, &mut z, s, work);
                    (z[1], z)
                };
                // secant on Im ω₁ over the sub-step length
                let mut s1 = h * (1.0 - excess / dphi.abs());
                let mut s0 = h;
                let (mut f0, _) = f(s0, &mut work);
                let (mut f1, mut z) = f(s1, &mut work);
                for _ in 0..30 {
                    if f1.abs() < 1e-15 * x[0].abs().max(1e-300) || f1 == f0 {
                        break;
                    }
                    let s2 = s1 - f1 * (s1 - s0) / (f1 - f0);
                    s0 = s1;
                    f0 = f1;
                    s1 = s2;
                    let r = f(s1, &mut work);
                    f1 = r.0;
                    z = r.1;
                }
                return Ok([z[0], z[2], z[3]]);
            }
        }
        Err(Error::ReturnFailure("section not re-crossed within 3 nominal periods".into()))
    }
}

fn order_like(reference: &[Complex64; 3], mut found: Vec<Complex64>) -> [Complex64; 3] {
    let mut out = [Complex64::default(); 3];
    for (slot, r) in out.iter_mut().zip(reference) {
        let k = (0..found.len())
            .min_by(|&i, &j| (found[i] - r).norm().total_cmp(&(found[j] - r).norm()))
            .expect("three eigenvalues");
        *slot = found.swap_remove(k);
    }
    out
}

/// Return-map eigenvalues at the degenerate periodic orbit `ω₂ = 0`,
/// `|ω₁|² = -ε/Re χ₁₁`, on the section `Im ω₁ = 0`.
///
/// The analytic multipliers are `μ = e^{-2εp}` for the modulus of `ω₁` and
/// `e^{a ± ib}` for `ω₂`, with `p = 2π/|Im λ₁ + ε Im χ₁₁/Re χ₁₁|`,
/// `a = ε p Re χ̂/(-Re χ₁₁)` and `b = (Im λ₁ + ε Im χ₁₂/Re χ₁₁) p`. They are
/// checked against central finite differences of the integrated map.
pub fn poincare_return_eigs(eps: f64, coeffs: &BifCoeffs) -> Result<ReturnMapEigs> {
    let c = coeffs;
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    if !(c.chi11.re < 0.0) {
        return Err(Error::InvalidRegime(format!("need Re χ11 < 0, got {:.4}", c.chi11.re)));
    }
    let rate = degenerate_rate(eps, c);
    if rate.abs() < 1e-8 {
        return Err(Error::InvalidRegime("degenerate orbit does not rotate".into()));
    }
    let period = 2.0 * PI / rate.abs();
    let mu = (-2.0 * eps * period).exp();
    let a = eps * c.chi_hat.re / (-c.chi11.re) * period;
    let b = (c.lambda1.im + eps * c.chi12.im / c.chi11.re) * period;
    let ea = a.exp();
    let analytic = [
        Complex64::new(mu, 0.0),
        Complex64::from_polar(ea, b),
        Complex64::from_polar(ea, -b),
    ];
    let scale = 2.0 * PI * eps / (c.lambda1.im.abs() * (-c.chi11.re));
    let leading_order = [
        Complex64::new(-4.0 * PI * eps / c.lambda1.im.abs(), 0.0),
        scale * c.chi_hat,
        scale * c.chi_hat.conj(),
    ];

    let map = ReturnMap { sys: System::omega(c, eps), period, steps_per_period: 4000 };
    let x0 = [(-eps / c.chi11.re).sqrt(), 0.0, 0.0];
    let h = 1e-5 * x0[0];
    let mut jac = [[0.0; 3]; 3];
    for k in 0..3 {
        let (mut xp, mut xm) = (x0, x0);
        xp[k] += h;
        xm[k] -= h;
        let (fp, fm) = (map.apply(xp)?, map.apply(xm)?);
        for i in 0..3 {
            jac[i][k] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    let m = CMatrix::from_fn(3, 3, |i, k| Complex64::new(jac[i][k], 0.0));
    let numeric = order_like(&analytic, linalg::eigenvalues(&m)?);
    Ok(ReturnMapEigs { period, mu, a, b, analytic, numeric, jacobian: jac, leading_order })
}

/// Fixed point residual of the return map at the degenerate orbit.
pub fn return_map_fixed_point_residual(eps: f64, coeffs: &BifCoeffs) -> Result<f64> {
    let rate = degenerate_rate(eps, coeffs);
    let map = ReturnMap { sys: System::omega(coeffs, eps), period: 2.0 * PI / rate.abs(), steps_per_period: 4000 };
    let x0 = [(-eps / coeffs.chi11.re).sqrt(), 0.0, 0.0];
    let y = map.apply(x0)?;
    Ok((0..3).fold(0.0f64, |m, i| m.max((y[i] - x0[i]).abs())))
}
