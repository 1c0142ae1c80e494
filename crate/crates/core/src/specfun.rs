//! Gamma-function ratios and the closed-form energies of Euclidean balls.
//!
//! The central constant is
//!
//! ```text
//! b_p(n) = √π Γ((n+p)/2) / (Γ((p+1)/2) Γ(n/2))
//! ```
//!
//! which is simultaneously `π_p(I_n)^p`, the reciprocal of the `p`-th absolute
//! moment of a coordinate on `S^{n-1}`, and the factor relating `M_p(B_2^n, d_2)`
//! to the one-dimensional maximal energy.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LN_SQRT_PI: f64 = 0.572_364_942_924_700_1;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Below this distance from 1 (or 2) the Taylor series of `ln Γ(1+z)` is used,
/// which keeps relative accuracy near the two zeros of `ln Γ`.
const ROOT_SERIES_RADIUS: f64 = 0.2;
const ROOT_SERIES_TERMS: usize = 40;

/// Natural logarithm of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma requires a finite x > 0, got {x}")));
    }
    Ok(ln_gamma_positive(x))
}

fn ln_gamma_positive(x: f64) -> f64 {
    if (x - 1.0).abs() < ROOT_SERIES_RADIUS {
        return ln_gamma_1p_series(x - 1.0);
    }
    if (x - 2.0).abs() < ROOT_SERIES_RADIUS {
        // Γ(2+z) = (1+z) Γ(1+z)
        let z = x - 2.0;
        return z.ln_1p() + ln_gamma_1p_series(z);
    }
    if x < 0.5 {
        return ln_gamma_lanczos(x + 1.0) - x.ln();
    }
    ln_gamma_lanczos(x)
}

fn ln_gamma_lanczos(x: f64) -> f64 {
    let x = x - 1.0;
    let mut sum = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (x + 0.5) * t.ln() - t + sum.ln()
}

/// `ln Γ(1+z) = -γ z + Σ_{k≥2} (-1)^k ζ(k) z^k / k`, valid for `|z| < 1`.
fn ln_gamma_1p_series(z: f64) -> f64 {
    let zeta = zeta_table();
    let mut acc = 0.0;
    // Horner from the highest term down.
    for k in (2..ROOT_SERIES_TERMS).rev() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc = acc * z + sign * zeta[k] / k as f64;
    }
    z * (acc * z - EULER_GAMMA)
}

/// ζ(k) for k < ROOT_SERIES_TERMS, by a partial sum plus an Euler–Maclaurin tail.
fn zeta_table() -> &'static [f64; ROOT_SERIES_TERMS] {
    static TABLE: OnceLock<[f64; ROOT_SERIES_TERMS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; ROOT_SERIES_TERMS];
        for (k, slot) in t.iter_mut().enumerate().skip(2) {
            *slot = zeta_euler_maclaurin(k as f64);
        }
        t
    })
}

fn zeta_euler_maclaurin(s: f64) -> f64 {
    const N: f64 = 64.0;
    let mut sum = 0.0;
    // small terms first
    for n in (1..64).rev() {
        sum += (n as f64).powf(-s);
    }
    let tail = N.powf(1.0 - s) / (s - 1.0) + 0.5 * N.powf(-s) + s * N.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * N.powf(-s - 3.0) / 720.0
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * N.powf(-s - 5.0) / 30_240.0;
    sum + tail
}

/// `√π Γ((n+p)/2) / (Γ((p+1)/2) Γ(n/2))` for any `p > 0`.
///
/// Odd `n` use the exact recursion `b(n+2) = b(n) (n+p)/n` from `b(1) = 1`; even
/// `n` start the same recursion from `b(2)`. Dimensions above 200 go straight to
/// log space.
fn gamma_ratio(n: usize, p: f64) -> f64 {
    const RECURSION_LIMIT: usize = 200;
    if n > RECURSION_LIMIT {
        let ln = LN_SQRT_PI + ln_gamma_positive(0.5 * (n as f64 + p))
            - ln_gamma_positive(0.5 * (p + 1.0))
            - ln_gamma_positive(0.5 * n as f64);
        return ln.exp();
    }
    let (mut b, mut m) = if n % 2 == 1 {
        (1.0, 1usize)
    } else {
        let ln = LN_SQRT_PI + ln_gamma_positive(1.0 + 0.5 * p) - ln_gamma_positive(0.5 * (p + 1.0));
        (ln.exp(), 2usize)
    };
    while m < n {
        b *= (m as f64 + p) / m as f64;
        m += 2;
    }
    b
}

fn check_dimension(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("dimension n must be at least 1"));
    }
    Ok(())
}

pub(crate) fn check_energy_exponent(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 2.0) {
        return Err(Error::domain(format!(
            "energy exponent p must lie in (0, 2), got {p}; for p >= 2 the maximal energy is +infinity"
        )));
    }
    Ok(())
}

fn check_moment_exponent(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::domain(format!("moment exponent p must be positive and finite, got {p}")));
    }
    Ok(())
}

/// `b_p^{(n)}`, the factor with `‖x‖_2^p = b_p^{(n)} ∫ |⟨x,t⟩|^p dλ(t)`. Requires `0 < p < 2`.
pub fn b_coeff(n: usize, p: f64) -> Result<f64> {
    check_dimension(n)?;
    check_energy_exponent(p)?;
    Ok(gamma_ratio(n, p))
}

/// `∫_{S^{n-1}} |t_1|^p dλ(t)`, i.e. `(c_p^{(n)})^p`.
pub fn sphere_abs_moment(n: usize, p: f64) -> Result<f64> {
    check_dimension(n)?;
    check_moment_exponent(p)?;
    Ok(1.0 / gamma_ratio(n, p))
}

/// `(E|W|^p)^{1/p}` for `W` centred Gaussian with variance 2, i.e. the 2-stable law
/// with characteristic function `exp(-t²)`.
pub fn gaussian_moment(p: f64) -> Result<f64> {
    check_moment_exponent(p)?;
    let ln_ratio = ln_gamma_positive(0.5 * (1.0 + p)) - LN_SQRT_PI;
    Ok(2.0 * (ln_ratio / p).exp())
}

/// `M_p(B_2^n, d_2) = 𝔪_p · b_p^{(n)}` given an estimate `mp` of the one-dimensional constant.
pub fn closed_form_m_ball(n: usize, p: f64, mp: f64) -> Result<f64> {
    if !(mp > 0.0) || !mp.is_finite() {
        return Err(Error::domain(format!("m_p estimate must be positive and finite, got {mp}")));
    }
    Ok(mp * b_coeff(n, p)?)
}

/// Moment constants attached to a dimension and exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentConstants {
    pub n: usize,
    pub p: f64,
    /// `b_p^{(n)}`
    pub b: f64,
    /// `(c_p^{(n)})^p`
    pub c_sphere_p: f64,
    /// `c_{2,p}`
    pub c_gauss: f64,
}

impl MomentConstants {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        Ok(MomentConstants {
            n,
            p,
            b: b_coeff(n, p)?,
            c_sphere_p: sphere_abs_moment(n, p)?,
            c_gauss: gaussian_moment(p)?,
        })
    }
}
