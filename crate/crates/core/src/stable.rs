//! Symmetric `r`-stable laws with characteristic function `exp(−|t|^r)`.
//!
//! Draws use the Chambers–Mallows–Stuck transform. Moments `E|W|^p` with `p`
//! close to `r` have heavy-tailed integrands; the estimators here sample the
//! CMS angle from a defensive mixture that over-weights the endpoint
//! singularity and correct with likelihood ratios, which keeps the estimators
//! unbiased with bounded weighted integrands.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bodies::{dual_norm, BodySpec};
use crate::error::{Error, Result};
use crate::mc::{batch_means, McEstimate};
use crate::points::lr_norm;
use crate::rng::{Generator, RngStream};

/// Mixture weight of the singular component for a scalar draw.
pub const TILT_MIXTURE: f64 = 0.3;

/// Sampler configuration for `m_r^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableConfig {
    pub r: f64,
    pub n: usize,
    pub rng: RngStream,
}

impl StableConfig {
    pub fn new(r: f64, n: usize, rng: RngStream) -> Result<Self> {
        check_index(r)?;
        if n == 0 {
            return Err(Error::domain("dimension must be at least 1"));
        }
        Ok(StableConfig { r, n, rng })
    }
}

fn check_index(r: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&r) {
        return Err(Error::domain(format!("stability index r must lie in [1, 2], got {r}")));
    }
    Ok(())
}

fn check_moment(r: f64, p: f64) -> Result<()> {
    check_index(r)?;
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain(format!("p must be positive, got {p}")));
    }
    if r < 2.0 && p >= r {
        return Err(Error::domain(format!(
            "E|W|^p is infinite for an {r}-stable W when p >= r, got p = {p}"
        )));
    }
    Ok(())
}

/// CMS transform with the angle written as `V = ±(π/2)(1 − w)`, `w ∈ (0, 1]`,
/// so that `cos V = sin(πw/2)` stays accurate near the endpoints.
fn cms(alpha: f64, w: f64, negative: bool, e: f64) -> f64 {
    let half = FRAC_PI_2 * (1.0 - w);
    let v = if negative { -half } else { half };
    let cos_v = (FRAC_PI_2 * w).sin();
    if alpha == 1.0 {
        return v.sin() / cos_v;
    }
    (alpha * v).sin() / cos_v.powf(1.0 / alpha) * (((1.0 - alpha) * v).cos() / e).powf((1.0 - alpha) / alpha)
}

fn unit_open_closed(gen: &mut Generator) -> f64 {
    1.0 - gen.random::<f64>()
}

/// One draw from the symmetric `alpha`-stable law.
pub fn draw_stable(alpha: f64, gen: &mut Generator) -> f64 {
    let w = unit_open_closed(gen);
    let negative = gen.random::<bool>();
    let e = -unit_open_closed(gen).ln();
    cms(alpha, w, negative, e)
}

/// A draw from the symmetric `r`-stable law of `cfg`.
pub fn sample_stable_scalar(cfg: &StableConfig) -> Result<f64> {
    check_index(cfg.r)?;
    Ok(draw_stable(cfg.r, &mut cfg.rng.generator()))
}

/// `n` i.i.d. draws.
pub fn sample_stable_vector(cfg: &StableConfig) -> Result<Vec<f64>> {
    check_index(cfg.r)?;
    let mut gen = cfg.rng.generator();
    Ok((0..cfg.n).map(|_| draw_stable(cfg.r, &mut gen)).collect())
}

/// Importance sampler for integrands growing like `|W|^p`.
///
/// With probability `eps` the angle parameter is drawn from density
/// `(1 − γ) w^{−γ}`, `γ = p/α`, otherwise uniformly; the returned weight is
/// the reciprocal of the mixture density.
#[derive(Debug, Clone, Copy)]
struct Tilted {
    alpha: f64,
    inv_shape: f64,
    gamma: f64,
    eps: f64,
}

impl Tilted {
    fn new(alpha: f64, p: f64, eps: f64) -> Self {
        // The Gaussian case has no singular angle.
        let eps = if alpha == 2.0 { 0.0 } else { eps };
        let gamma = p / alpha;
        Tilted {
            alpha,
            inv_shape: 1.0 / (1.0 - gamma),
            gamma,
            eps,
        }
    }

    fn draw(&self, gen: &mut Generator) -> (f64, f64) {
        let u = unit_open_closed(gen);
        let singular = gen.random::<f64>() < self.eps;
        let negative = gen.random::<bool>();
        let e = -unit_open_closed(gen).ln();
        if self.eps == 0.0 {
            return (cms(self.alpha, u, negative, e), 1.0);
        }
        let w = if singular { u.powf(self.inv_shape) } else { u };
        let density = (1.0 - self.eps) + self.eps * (1.0 - self.gamma) * w.powf(-self.gamma);
        (cms(self.alpha, w, negative, e), 1.0 / density)
    }
}

/// `c_{r,p} = (E|W|^p)^{1/p}` for `W` symmetric `r`-stable.
pub fn c_rp(r: f64, p: f64, samples: usize, rng: RngStream) -> Result<McEstimate> {
    check_moment(r, p)?;
    let tilt = Tilted::new(r, p, TILT_MIXTURE);
    let bm = batch_means(samples, 1, rng, |gen, out| {
        let (w, weight) = tilt.draw(gen);
        out[0] = w.abs().powf(p) * weight;
    })?;
    Ok(bm.mean(0).powf(1.0 / p))
}

/// Result of [`verify_stability_identity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    /// Estimate of `c_{r,p}^{−p} E|⟨x, W⟩|^p`.
    pub estimate: McEstimate,
    /// `‖x‖_r^p`
    pub exact: f64,
    pub relative_error: f64,
}

/// Ratio `E[f(W) Π weights] / E[|W_0|^p weight_0]` over joint draws of an
/// `n`-vector `W` and an independent scalar `W_0`, times `scale`.
fn stable_ratio<F>(r: f64, p: f64, n: usize, samples: usize, rng: RngStream, f: F) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let vector_tilt = Tilted::new(r, p, TILT_MIXTURE / n as f64);
    let scalar_tilt = Tilted::new(r, p, TILT_MIXTURE);
    let bm = batch_means(samples, 2, rng, |gen, out| {
        let mut w = vec![0.0; n];
        let mut weight = 1.0;
        for v in w.iter_mut() {
            let (x, wt) = vector_tilt.draw(gen);
            *v = x;
            weight *= wt;
        }
        out[0] = f(&w) * weight;
        let (w0, wt0) = scalar_tilt.draw(gen);
        out[1] = w0.abs().powf(p) * wt0;
    })?;
    Ok(bm.ratio(0, 1))
}

/// Checks `‖x‖_r^p = c_{r,p}^{−p} ∫ |⟨x, w⟩|^p dm_r^n(w)` by Monte Carlo.
pub fn verify_stability_identity(x: &[f64], r: f64, p: f64, samples: usize, rng: RngStream) -> Result<IdentityCheck> {
    check_moment(r, p)?;
    if x.is_empty() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("x must be a non-empty finite vector"));
    }
    let exact = lr_norm(x, r).powf(p);
    if !(exact > 0.0) {
        return Err(Error::domain("x must be non-zero"));
    }
    let estimate = stable_ratio(r, p, x.len(), samples, rng, |w| {
        w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().abs().powf(p)
    })?;
    Ok(IdentityCheck {
        estimate,
        exact,
        relative_error: (estimate.estimate - exact).abs() / exact,
    })
}

/// `𝔪_p c_{r,p}^{−p} ∫ ‖t‖_{K°}^p dm_r^n(t)`, an upper bound for `M_p(K, d_r)`.
pub fn gub_upper_bound(body: &BodySpec, r: f64, p: f64, mp: f64, samples: usize, rng: RngStream) -> Result<McEstimate> {
    check_moment(r, p)?;
    crate::specfun::check_energy_exponent(p)?;
    if !(mp > 0.0 && mp.is_finite()) {
        return Err(Error::domain(format!("m_p estimate must be positive and finite, got {mp}")));
    }
    let n = body.dim();
    let est = stable_ratio(r, p, n, samples, rng, |w| {
        dual_norm(w, body).expect("matching dimension").powf(p)
    })?;
    Ok(est.scaled(mp))
}
