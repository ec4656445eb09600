//! Cubic coefficients of the amplitude equations at the loss of stability
//! of the normal state, and the branch predictions built from them.
//!
//! Below the collision current the critical mode `u1` is PT-symmetric with a
//! real eigenvalue and the bifurcation is stationary. Above it the critical
//! modes are the conjugate pair `u1`, `u2 = u1†` and the bifurcating state is
//! time-periodic.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::parallel::{self, Execution};
use crate::spectral;

/// Smallest eigenvalue gap of the critical pair accepted away from the
/// collision; at the first Dirichlet collision it corresponds to
/// `|I - I_c| ≈ 1e-3`.
pub const NEAR_COLLISION_GAP: f64 = 0.09;

/// `|Re χ₁₁|` below which the stationary expansion is refused.
pub const DEGENERATE_CHI: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifCoeffs {
    #[serde(rename = "I")]
    pub current: f64,
    pub lambda1: Complex64,
    pub beta: Complex64,
    pub gamma11: Complex64,
    pub gamma21: Complex64,
    pub c1111: Complex64,
    pub c1122: Complex64,
    pub c1212: Complex64,
    pub chi11: Complex64,
    pub chi12: Complex64,
    pub chi_hat: Complex64,
    pub chi_tilde: Complex64,
    pub omega: f64,
}

impl BifCoeffs {
    pub fn is_periodic(&self) -> bool {
        self.lambda1.im.abs() > spectral::COMPLEX_TOL
    }

    /// `-1` when `u1` is the pair member with `Im λ₁ < 0`, otherwise `+1`.
    pub fn label_sign(&self) -> f64 {
        if self.lambda1.im < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    /// The same coefficients with the roles of `u1` and `u2 = u1†` swapped.
    /// Every integral is conjugated, so `ω` changes sign.
    pub fn conjugate_labeling(&self) -> Self {
        Self {
            current: self.current,
            lambda1: self.lambda1.conj(),
            beta: self.beta.conj(),
            gamma11: self.gamma11.conj(),
            gamma21: self.gamma21.conj(),
            c1111: self.c1111.conj(),
            c1122: self.c1122.conj(),
            c1212: self.c1212.conj(),
            chi11: self.chi11.conj(),
            chi12: self.chi12.conj(),
            chi_hat: self.chi_hat.conj(),
            chi_tilde: self.chi_tilde.conj(),
            omega: -self.omega,
        }
    }

    /// Labeling with `Im λ₁ ≥ 0`, in which `u1` carries `e^{-i Im λ₁ t}`.
    pub fn positive_labeling(&self) -> Self {
        if self.label_sign() < 0.0 {
            self.conjugate_labeling()
        } else {
            *self
        }
    }
}

/// `θ_kl(x) = ∫₀ˣ (u_k (u_l)_x* - u_l* (u_k)_x) dx'`.
pub fn theta(uk: &GridFunction, ul: &GridFunction) -> GridFunction {
    let grid = uk.grid();
    let dk = grid.diff(uk.values());
    let dl = grid.diff(ul.values());
    let integrand: Vec<Complex64> = (0..grid.n())
        .map(|j| uk.values()[j] * dl[j].conj() - ul.values()[j].conj() * dk[j])
        .collect();
    GridFunction::new(Arc::clone(grid), grid.antiderivative(&integrand)).expect("same grid")
}

fn integrate(grid: &Grid, f: impl Fn(usize) -> Complex64) -> Complex64 {
    let vals: Vec<Complex64> = (0..grid.n()).map(f).collect();
    grid.quad(&vals)
}

/// Coefficients for a given critical mode. `u2` is taken as `u1†`.
pub fn coefficients_from_mode(current: f64, lambda1: Complex64, u1: &GridFunction) -> Result<BifCoeffs> {
    let grid = u1.grid();
    let u2 = u1.pt_conjugate();
    let (a, b) = (u1.values(), u2.values());
    let beta = integrate(grid, |j| a[j] * a[j]);
    if beta.norm() < 1e-8 {
        return Err(Error::DegenerateNormalization { beta: beta.norm() });
    }
    let t11 = theta(u1, u1);
    let t22 = theta(&u2, &u2);
    let t12 = theta(u1, &u2);
    let gamma11 = integrate(grid, |j| a[j].norm_sqr() * a[j] * a[j]);
    let gamma21 = integrate(grid, |j| b[j].norm_sqr() * a[j] * a[j]);
    let c1111 = integrate(grid, |j| a[j] * a[j] * t11.values()[j]);
    let c1122 = integrate(grid, |j| a[j] * a[j] * t22.values()[j]);
    let c1212 = integrate(grid, |j| a[j] * b[j] * t12.values()[j]);
    let chi11 = (0.5 * c1111 - gamma11) / beta;
    let chi12 = (0.5 * c1122 + 0.5 * c1212 - 2.0 * gamma21) / beta;
    let chi_hat = chi12 - chi11;
    let chi_tilde = -(chi11 + chi12);
    Ok(BifCoeffs {
        current,
        lambda1,
        beta,
        gamma11,
        gamma21,
        c1111,
        c1122,
        c1212,
        chi11,
        chi12,
        chi_hat,
        chi_tilde,
        omega: -chi_tilde.im / chi_tilde.re,
    })
}

/// Coefficients at current `I` from the leading mode, normalized by
/// `u1(0) = 1`. Above the collision `u1` is the first member of the sorted
/// pair, the one with `Im λ₁ < 0`; see [`BifCoeffs::positive_labeling`].
pub fn chi_coefficients(grid: &Arc<Grid>, current: f64) -> Result<BifCoeffs> {
    let pairs = spectral::eigenpairs(grid, current, 2)?;
    let gap = (pairs[1].lambda - pairs[0].lambda).norm();
    if gap < NEAR_COLLISION_GAP {
        return Err(Error::DegenerateNormalization {
            beta: pairs[0].u.pair(&pairs[0].u).norm(),
        });
    }
    coefficients_from_mode(current, pairs[0].lambda, &pairs[0].u)
}

/// Coefficients over a list of currents, returned in input order.
pub fn chi_scan(grid: &Arc<Grid>, currents: &[f64], exec: Execution) -> Vec<Result<BifCoeffs>> {
    parallel::map(currents, exec, |&c| chi_coefficients(grid, c))
}

pub fn write_chi_csv<W: Write>(rows: &[BifCoeffs], mut w: W) -> Result<()> {
    writeln!(w, "I,re_chi11,im_chi11,re_chi12,im_chi12,re_chi_hat,re_chi_tilde,omega")?;
    for c in rows {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            c.current, c.chi11.re, c.chi11.im, c.chi12.re, c.chi12.im, c.chi_hat.re, c.chi_tilde.re, c.omega
        )?;
    }
    Ok(())
}

/// Leading-order `max_{x,t} |ψ|` on the stable periodic branch. With
/// `ψ ≈ √ε (α₁ e^{iΩt} u₁ + α₂ e^{-iΩt} u₂)` and `|α₁| = |α₂| = 1/√Re χ̃`, the
/// envelope of `cos θ v₁ + sin θ v₂` is `|u₁| + |u₂|`.
pub fn periodic_peak_amplitude(grid: &Arc<Grid>, current: f64, eps: f64) -> Result<f64> {
    let coeffs = chi_coefficients(grid, current)?;
    if !coeffs.is_periodic() || coeffs.chi_tilde.re <= 0.0 {
        return Err(Error::InvalidRegime("needs the stable periodic regime".into()));
    }
    let u1 = spectral::eigenpairs(grid, current, 1)?.remove(0).u;
    let u2 = u1.pt_conjugate();
    let envelope = u1
        .values()
        .iter()
        .zip(u2.values())
        .map(|(a, b)| a.norm() + b.norm())
        .fold(0.0, f64::max);
    Ok((eps / coeffs.chi_tilde.re).sqrt() * envelope)
}

/// Root of `I -> Re χ₁₁(I)` in `[lo, hi]`: bisection to width 1e-3, then
/// linear interpolation inside the final bracket.
pub fn find_ik(grid: &Arc<Grid>, lo: f64, hi: f64) -> Result<f64> {
    let f = |i: f64| chi_coefficients(grid, i).map(|c| c.chi11.re);
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a)?, f(b)?);
    if fa.signum() == fb.signum() {
        return Err(Error::BracketInvalid {
            lo,
            hi,
            reason: "Re χ11 has the same sign at both ends".into(),
        });
    }
    let mut fb = fb;
    while b - a > 1e-3 {
        let mid = 0.5 * (a + b);
        let fm = f(mid)?;
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    Ok(a - fa * (b - a) / (fb - fa))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "N_to_S_stable")]
    NToSStable,
    #[serde(rename = "N_to_S_unstable")]
    NToSUnstable,
    #[serde(rename = "N_to_P_stable")]
    NToPStable,
    #[serde(rename = "N_to_P_unstable")]
    NToPUnstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPrediction {
    pub regime: Regime,
    pub eps: f64,
    pub amplitude: f64,
    pub frequency: f64,
    /// `f64::INFINITY` for stationary branches.
    pub period: f64,
    pub stability: Stability,
}

/// Which branch the normal state loses stability to at `coeffs.current`.
pub fn classify(coeffs: &BifCoeffs) -> Regime {
    match (coeffs.is_periodic(), coeffs.is_periodic() && coeffs.chi_tilde.re > 0.0, coeffs.chi11.re < 0.0) {
        (true, true, _) => Regime::NToPStable,
        (true, false, _) => Regime::NToPUnstable,
        (false, _, true) => Regime::NToSStable,
        (false, _, false) => Regime::NToSUnstable,
    }
}

/// Angular frequency of the bifurcating periodic state.
///
/// The phase of `α₁` advances at rate `ω` on the slow time while the linear
/// factor of `u1` is `e^{-λ₁ t}`. With `Im λ₁ < 0` (the default labeling)
/// both rotate the same way and the frequency is `|Im λ₁| + ω ε`; with
/// `Im λ₁ > 0` it is `Im λ₁ - ω ε`.
pub fn periodic_frequency(coeffs: &BifCoeffs, eps: f64) -> f64 {
    coeffs.lambda1.im.abs() - coeffs.label_sign() * coeffs.omega * eps
}

/// Amplitude and frequency of the branch selected by the regime at
/// `coeffs.current`.
pub fn predict_branch(coeffs: &BifCoeffs, eps: f64) -> Result<BranchPrediction> {
    if coeffs.is_periodic() {
        if eps < 0.0 {
            return Err(Error::InvalidRegime("the periodic branch needs eps >= 0".into()));
        }
        if coeffs.chi_tilde.re <= 0.0 {
            return Err(Error::InvalidRegime("Re χ̃ must be positive".into()));
        }
        let frequency = periodic_frequency(coeffs, eps);
        return Ok(BranchPrediction {
            regime: Regime::NToPStable,
            eps,
            amplitude: (eps / coeffs.chi_tilde.re).sqrt(),
            frequency,
            period: 2.0 * PI / frequency,
            stability: Stability::Stable,
        });
    }
    let re = coeffs.chi11.re;
    if re.abs() < DEGENERATE_CHI {
        return Err(Error::InvalidRegime(format!(
            "Re χ11 = {re:.3e} is too close to zero for the cubic expansion"
        )));
    }
    let (regime, stability) = if re < 0.0 {
        if eps < 0.0 {
            return Err(Error::InvalidRegime("supercritical branch needs eps >= 0".into()));
        }
        (Regime::NToSStable, Stability::Stable)
    } else {
        if eps > 0.0 {
            return Err(Error::InvalidRegime("subcritical branch needs eps <= 0".into()));
        }
        (Regime::NToSUnstable, Stability::Unstable)
    };
    Ok(BranchPrediction {
        regime,
        eps,
        amplitude: (eps.abs() / re.abs()).sqrt(),
        frequency: 0.0,
        period: f64::INFINITY,
        stability,
    })
}

/// The unstable periodic state carried by one mode only (`β₂ = ±i β₁`).
pub fn unstable_periodic_prediction(coeffs: &BifCoeffs, eps: f64) -> Result<BranchPrediction> {
    if !(eps > 0.0) {
        return Err(Error::InvalidRegime("eps must be positive".into()));
    }
    if !coeffs.is_periodic() {
        return Err(Error::InvalidRegime("needs I above the collision current".into()));
    }
    let re = coeffs.chi11.re;
    if re >= 0.0 {
        return Err(Error::InvalidRegime("Re χ11 must be negative".into()));
    }
    // phase of α₁ advances at -Im χ11 / Re χ11 on the slow time
    let frequency = coeffs.lambda1.im.abs() + coeffs.label_sign() * eps * coeffs.chi11.im / re;
    Ok(BranchPrediction {
        regime: Regime::NToPUnstable,
        eps,
        amplitude: eps.sqrt() / (2.0 * (-re).sqrt()),
        frequency,
        period: 2.0 * PI / frequency,
        stability: Stability::Unstable,
    })
}
