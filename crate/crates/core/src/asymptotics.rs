//! Growth of maximal energies with the dimension.
//!
//! Two sweeps are supported:
//!
//! * `q`-sweep: `M_p(B_q^n, d_2)`, predicted to grow like `n^{p/q′}`;
//! * `r`-sweep: `M_p(B_2^n, d_r)`, predicted to grow like `n^{p/r}`.
//!
//! Each row carries a lower bound and a Monte-Carlo upper bound. Lower bounds
//! take the best of a direct discrete maximization and an analytic floor:
//! for the `q`-sweep the floor is `c^p · L(B_2^n)` with `c B_2^n ⊂ B_q^n`; for
//! the `r`-sweep it is `𝔪̂_p b_p^{(n)} ∫‖t‖_r^p dλ`, with the sphere integral
//! lowered by three standard errors.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::bodies::{dual_exponent, mean_width_power, sphere_lr_moment, BodySpec};
use crate::discrete_energy::{check_exponents, estimate_mp, max_energy_in_body, GridKind};
use crate::error::{Error, Result};
use crate::mc::McEstimate;
use crate::rng::RngStream;
use crate::specfun::b_coeff;
use crate::stable::gub_upper_bound;

/// Resource limits for one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepBudget {
    /// Points per discrete lower-bound solve.
    pub points: usize,
    /// Monte-Carlo samples per upper bound.
    pub samples: usize,
    /// Grid sizes for the `𝔪_p` estimate.
    pub mp_grids: Vec<usize>,
}

impl Default for SweepBudget {
    fn default() -> Self {
        SweepBudget {
            points: 401,
            samples: 1_000_000,
            mp_grids: vec![41, 101, 401],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "sweep", rename_all = "snake_case")]
pub enum Sweep {
    /// `B_q^n` with the Euclidean distance.
    Q {
        #[serde(with = "extended_f64")]
        q: f64,
    },
    /// `B_2^n` with the `ℓ_r` distance.
    R { r: f64 },
}

/// Serializes `∞` as the string `"inf"`.
pub(crate) mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            Repr::Text("inf".into()).serialize(s)
        } else {
            Repr::Number(*v).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(v),
            Repr::Text(t) if t.eq_ignore_ascii_case("inf") => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got \"{t}\""))),
        }
    }
}

/// One dimension of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    /// Best certified lower bound, `max(lower_direct, lower_floor)`.
    pub lower: f64,
    pub lower_direct: f64,
    pub lower_floor: f64,
    pub upper: McEstimate,
}

/// Least-squares line through `(ln n, ln value)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    /// 95% confidence interval for the slope.
    pub ci_low: f64,
    pub ci_high: f64,
}

impl SlopeFit {
    /// `|slope − target| ≤ tol · |target|`
    pub fn within_relative(&self, target: f64, tol: f64) -> bool {
        (self.slope - target).abs() <= tol * target.abs()
    }
}

/// Ordinary least squares for `ln y = a + s ln n`.
pub fn fit_loglog(ns: &[usize], values: &[f64]) -> Result<SlopeFit> {
    if ns.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: ns.len(),
            actual: values.len(),
        });
    }
    if ns.len() < 3 {
        return Err(Error::domain("a slope fit needs at least three dimensions"));
    }
    if values.iter().any(|v| !(*v > 0.0)) || ns.contains(&0) {
        return Err(Error::domain("log-log fit needs positive values"));
    }
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::domain("a slope fit needs at least two distinct dimensions"));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let dof = k - 2.0;
    let stderr = (rss / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::domain(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(SlopeFit {
        slope,
        intercept,
        stderr,
        ci_low: slope - t * stderr,
        ci_high: slope + t * stderr,
    })
}

/// A full sweep with fitted slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    #[serde(flatten)]
    pub sweep: Sweep,
    pub p: f64,
    /// Grid estimate of `𝔪_p`, a lower estimate.
    pub mp_estimate: f64,
    /// Value of `𝔪_p` used in the upper bounds (exactly 1 at `p = 1`).
    pub mp_upper: f64,
    /// Predicted growth exponent.
    pub predicted_slope: f64,
    pub rows: Vec<SweepRow>,
    pub upper_slope: SlopeFit,
    pub lower_slope: SlopeFit,
}

fn check_dims(n_list: &[usize]) -> Result<()> {
    if n_list.len() < 3 {
        return Err(Error::domain("a sweep needs at least three dimensions"));
    }
    if n_list[0] < 2 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("dimensions must be strictly increasing and at least 2"));
    }
    Ok(())
}

fn mp_pair(p: f64, budget: &SweepBudget) -> Result<(f64, f64)> {
    let (_, rep) = estimate_mp(p, &budget.mp_grids, GridKind::Chebyshev)?;
    let upper = if p == 1.0 { 1.0 } else { rep.value };
    Ok((rep.value, upper))
}

fn finish(sweep: Sweep, p: f64, mp: (f64, f64), predicted: f64, n_list: &[usize], rows: Vec<SweepRow>) -> Result<SweepReport> {
    let uppers: Vec<f64> = rows.iter().map(|r| r.upper.estimate).collect();
    let lowers: Vec<f64> = rows.iter().map(|r| r.lower).collect();
    Ok(SweepReport {
        sweep,
        p,
        mp_estimate: mp.0,
        mp_upper: mp.1,
        predicted_slope: predicted,
        upper_slope: fit_loglog(n_list, &uppers)?,
        lower_slope: fit_loglog(n_list, &lowers)?,
        rows,
    })
}

/// Largest `c ≤ 1` with `c B_2^n ⊂ B_q^n`.
pub fn inscribed_ball_radius(n: usize, q: f64) -> f64 {
    if q >= 2.0 {
        1.0
    } else {
        (n as f64).powf(0.5 - 1.0 / q)
    }
}

/// `M_p(B_q^n, d_2)` bounds over `n_list`.
pub fn q_sweep(q: f64, p: f64, n_list: &[usize], budget: &SweepBudget, rng: RngStream) -> Result<SweepReport> {
    check_exponents(2.0, p)?;
    check_dims(n_list)?;
    if !(q >= 1.0) {
        return Err(Error::domain(format!("q must lie in [1, inf], got {q}")));
    }
    let mp = mp_pair(p, budget)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for (k, &n) in n_list.iter().enumerate() {
        let stream = rng.substream(k as u64);
        let body = BodySpec::lq_ball(n, q)?;
        let b = b_coeff(n, p)?;
        let width = mean_width_power(&body, p, budget.samples, stream.substream(0))?;
        let upper = width.scaled(mp.1 * b);
        let (_, direct) = max_energy_in_body(&body, 2.0, p, &[budget.points], stream.substream(1))?;
        let ball_direct = if q == 2.0 {
            direct.value
        } else {
            let ball = BodySpec::euclidean_ball(n)?;
            max_energy_in_body(&ball, 2.0, p, &[budget.points], stream.substream(1))?.1.value
        };
        let ball_lower = ball_direct.max(mp.0 * b);
        let floor = inscribed_ball_radius(n, q).powf(p) * ball_lower;
        rows.push(SweepRow {
            n,
            lower: direct.value.max(floor),
            lower_direct: direct.value,
            lower_floor: floor,
            upper,
        });
    }
    finish(Sweep::Q { q }, p, mp, p / dual_exponent(q), n_list, rows)
}

/// `M_p(B_2^n, d_r)` bounds over `n_list`.
pub fn r_sweep(r: f64, p: f64, n_list: &[usize], budget: &SweepBudget, rng: RngStream) -> Result<SweepReport> {
    check_exponents(r, p)?;
    check_dims(n_list)?;
    let mp = mp_pair(p, budget)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for (k, &n) in n_list.iter().enumerate() {
        let stream = rng.substream(k as u64);
        let ball = BodySpec::euclidean_ball(n)?;
        let upper = gub_upper_bound(&ball, r, p, mp.1, budget.samples, stream.substream(0))?;
        let (_, direct) = max_energy_in_body(&ball, r, p, &[budget.points], stream.substream(1))?;
        let moment = sphere_lr_moment(n, r, p, budget.samples, stream.substream(2))?;
        let floor = mp.0 * b_coeff(n, p)? * (moment.estimate - 3.0 * moment.stderr).max(0.0);
        rows.push(SweepRow {
            n,
            lower: direct.value.max(floor),
            lower_direct: direct.value,
            lower_floor: floor,
            upper,
        });
    }
    finish(Sweep::R { r }, p, mp, p / r, n_list, rows)
}
