//! Symmetric convex bodies: intervals, `ℓ_q` balls and ellipsoids.
//!
//! Besides dual norms and widths this module holds the sphere-integral
//! estimators behind the upper bounds, and [`BodyDesign`], the nested point sets
//! used for discrete lower bounds.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::mc::{batch_means, McEstimate};
use crate::points::{lr_norm, PointSet};
use crate::rng::{Generator, RngStream};
use crate::specfun::{b_coeff, check_energy_exponent};

/// Tolerance on `‖t‖_2 = 1` for directions passed to [`width`].
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// An ellipsoid `T(B_2^n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    operator: DMatrix<f64>,
    semi_axes: Option<Vec<f64>>,
}

impl Ellipsoid {
    /// Axis-aligned, `T = diag(a)`.
    pub fn from_semi_axes(semi_axes: Vec<f64>) -> Result<Self> {
        if semi_axes.is_empty() {
            return Err(Error::domain("ellipsoid needs at least one semi-axis"));
        }
        if let Some(a) = semi_axes.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(Error::domain(format!("semi-axes must be positive and finite, got {a}")));
        }
        Ok(Ellipsoid {
            operator: DMatrix::from_diagonal(&DVector::from_column_slice(&semi_axes)),
            semi_axes: Some(semi_axes),
        })
    }

    /// General `T`; rejected unless square and of full rank.
    pub fn from_matrix(operator: DMatrix<f64>) -> Result<Self> {
        check_operator(&operator)?;
        Ok(Ellipsoid {
            operator,
            semi_axes: None,
        })
    }

    pub fn operator(&self) -> &DMatrix<f64> {
        &self.operator
    }

    pub fn semi_axes(&self) -> Option<&[f64]> {
        self.semi_axes.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.operator.nrows()
    }
}

pub(crate) fn check_operator(t: &DMatrix<f64>) -> Result<()> {
    if !t.is_square() || t.nrows() == 0 {
        return Err(Error::domain(format!("operator must be a non-empty square matrix, got {}x{}", t.nrows(), t.ncols())));
    }
    if t.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("operator has non-finite entries"));
    }
    let sv = t.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if !(max > 0.0) || min <= 1e-12 * max {
        return Err(Error::domain(format!("operator is degenerate (singular values {min:e} .. {max:e})")));
    }
    Ok(())
}

/// A symmetric convex body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BodyJson", into = "BodyJson")]
pub enum BodySpec {
    /// `[−1, 1]`
    Interval,
    /// Unit ball of `ℓ_q^n`, `q ∈ [1, ∞]`.
    LqBall { n: usize, q: f64 },
    Ellipsoid(Ellipsoid),
}

impl BodySpec {
    pub fn lq_ball(n: usize, q: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("ball dimension must be at least 1"));
        }
        if !(q >= 1.0) {
            return Err(Error::domain(format!("q must lie in [1, inf], got {q}")));
        }
        Ok(BodySpec::LqBall { n, q })
    }

    pub fn euclidean_ball(n: usize) -> Result<Self> {
        BodySpec::lq_ball(n, 2.0)
    }

    pub fn ellipsoid_semi_axes(semi_axes: Vec<f64>) -> Result<Self> {
        Ok(BodySpec::Ellipsoid(Ellipsoid::from_semi_axes(semi_axes)?))
    }

    pub fn ellipsoid_matrix(t: DMatrix<f64>) -> Result<Self> {
        Ok(BodySpec::Ellipsoid(Ellipsoid::from_matrix(t)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            BodySpec::Interval => 1,
            BodySpec::LqBall { n, .. } => *n,
            BodySpec::Ellipsoid(e) => e.dim(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Gauge `‖x‖_K`, so that `K = {‖x‖_K ≤ 1}`.
    pub fn gauge(&self, x: &[f64]) -> Result<f64> {
        check_dim(self, x)?;
        Ok(match self {
            BodySpec::Interval => x[0].abs(),
            BodySpec::LqBall { q, .. } => lr_norm(x, *q),
            BodySpec::Ellipsoid(e) => {
                let y = e
                    .operator
                    .clone()
                    .lu()
                    .solve(&DVector::from_column_slice(x))
                    .ok_or_else(|| Error::domain("degenerate ellipsoid"))?;
                y.norm()
            }
        })
    }
}

/// `q` in JSON: a number, or `"inf"` for `q = ∞`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum JsonExponent {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BodyJson {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<JsonExponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    semi_axes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<f64>>>,
}

impl TryFrom<BodyJson> for BodySpec {
    type Error = Error;

    fn try_from(b: BodyJson) -> Result<Self> {
        let unexpected = |field: &str| Err(Error::Parse(format!("field '{field}' is not valid for kind '{}'", b.kind)));
        match b.kind.as_str() {
            "interval" => {
                if b.n.is_some_and(|n| n != 1) {
                    return Err(Error::Parse("an interval has n = 1".into()));
                }
                if b.q.is_some() {
                    return unexpected("q");
                }
                if b.semi_axes.is_some() {
                    return unexpected("semi_axes");
                }
                if b.matrix.is_some() {
                    return unexpected("matrix");
                }
                Ok(BodySpec::Interval)
            }
            "lq_ball" => {
                if b.semi_axes.is_some() {
                    return unexpected("semi_axes");
                }
                if b.matrix.is_some() {
                    return unexpected("matrix");
                }
                let n = b.n.ok_or_else(|| Error::Parse("lq_ball needs 'n'".into()))?;
                let q = match b.q.as_ref().ok_or_else(|| Error::Parse("lq_ball needs 'q'".into()))? {
                    JsonExponent::Number(q) => *q,
                    JsonExponent::Text(s) => match s.to_ascii_lowercase().as_str() {
                        "inf" | "infinity" => f64::INFINITY,
                        other => return Err(Error::Parse(format!("q must be a number or \"inf\", got \"{other}\""))),
                    },
                };
                BodySpec::lq_ball(n, q)
            }
            "ellipsoid" => {
                if b.q.is_some() {
                    return unexpected("q");
                }
                let body = match (b.semi_axes, b.matrix) {
                    (Some(a), None) => BodySpec::ellipsoid_semi_axes(a)?,
                    (None, Some(rows)) => {
                        let n = rows.len();
                        if rows.iter().any(|r| r.len() != n) {
                            return Err(Error::Parse("ellipsoid matrix must be square".into()));
                        }
                        BodySpec::ellipsoid_matrix(DMatrix::from_row_iterator(n, n, rows.into_iter().flatten()))?
                    }
                    _ => return Err(Error::Parse("ellipsoid needs exactly one of 'semi_axes' or 'matrix'".into())),
                };
                if let Some(n) = b.n {
                    if n != body.dim() {
                        return Err(Error::DimensionMismatch {
                            expected: n,
                            actual: body.dim(),
                        });
                    }
                }
                Ok(body)
            }
            other => Err(Error::Parse(format!(
                "unknown body kind '{other}', expected interval, lq_ball or ellipsoid"
            ))),
        }
    }
}

impl From<BodySpec> for BodyJson {
    fn from(b: BodySpec) -> Self {
        let empty = BodyJson {
            kind: String::new(),
            n: None,
            q: None,
            semi_axes: None,
            matrix: None,
        };
        match b {
            BodySpec::Interval => BodyJson {
                kind: "interval".into(),
                n: Some(1),
                ..empty
            },
            BodySpec::LqBall { n, q } => BodyJson {
                kind: "lq_ball".into(),
                n: Some(n),
                q: Some(if q.is_infinite() {
                    JsonExponent::Text("inf".into())
                } else {
                    JsonExponent::Number(q)
                }),
                ..empty
            },
            BodySpec::Ellipsoid(e) => {
                let n = e.dim();
                match e.semi_axes {
                    Some(a) => BodyJson {
                        kind: "ellipsoid".into(),
                        n: Some(n),
                        semi_axes: Some(a),
                        ..empty
                    },
                    None => BodyJson {
                        kind: "ellipsoid".into(),
                        n: Some(n),
                        matrix: Some(e.operator.row_iter().map(|r| r.iter().copied().collect()).collect()),
                        ..empty
                    },
                }
            }
        }
    }
}

fn check_dim(body: &BodySpec, t: &[f64]) -> Result<()> {
    if t.len() != body.dim() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            actual: t.len(),
        });
    }
    Ok(())
}

/// `q′` with `1/q + 1/q′ = 1`, exact at `q = 1` and `q = ∞`.
pub fn dual_exponent(q: f64) -> f64 {
    if q == 1.0 {
        f64::INFINITY
    } else if q.is_infinite() {
        1.0
    } else {
        q / (q - 1.0)
    }
}

/// Support function of the body, `sup_{x ∈ K} ⟨x, t⟩`.
pub fn dual_norm(t: &[f64], body: &BodySpec) -> Result<f64> {
    check_dim(body, t)?;
    Ok(dual_norm_unchecked(t, body))
}

fn dual_norm_unchecked(t: &[f64], body: &BodySpec) -> f64 {
    match body {
        BodySpec::Interval => t[0].abs(),
        BodySpec::LqBall { q, .. } => lr_norm(t, dual_exponent(*q)),
        BodySpec::Ellipsoid(e) => {
            let t = DVector::from_column_slice(t);
            e.operator.tr_mul(&t).norm()
        }
    }
}

/// Distance between the two supporting hyperplanes orthogonal to the unit vector `t`.
pub fn width(t: &[f64], body: &BodySpec) -> Result<f64> {
    check_dim(body, t)?;
    let norm = lr_norm(t, 2.0);
    if (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::domain(format!("width needs a unit direction, got norm {norm}")));
    }
    Ok(2.0 * dual_norm_unchecked(t, body))
}

fn gaussian_vector(gen: &mut Generator, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = gen.sample(StandardNormal);
    }
}

/// A uniform point on `S^{n−1}` (normalized Gaussian vector).
pub fn sample_sphere(n: usize, rng: RngStream) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("sphere dimension must be at least 1"));
    }
    let mut gen = rng.generator();
    Ok(sphere_point(n, &mut gen))
}

/// Draws a uniform point on `S^{n−1}` from an existing generator.
pub fn sphere_point(n: usize, gen: &mut Generator) -> Vec<f64> {
    let mut g = vec![0.0; n];
    loop {
        gaussian_vector(gen, &mut g);
        let norm = lr_norm(&g, 2.0);
        if norm > 0.0 {
            return g.into_iter().map(|v| v / norm).collect();
        }
    }
}

/// Monte-Carlo mean of `f(g) / ‖g‖_2^p` over Gaussian `g`, where `f` is
/// `p`-homogeneous. This is the sphere average of `f`.
fn sphere_mean<F>(n: usize, p: f64, samples: usize, rng: RngStream, f: F) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let bm = batch_means(samples, 1, rng, |gen, out| {
        let mut g = vec![0.0; n];
        let norm = loop {
            gaussian_vector(gen, &mut g);
            let norm = lr_norm(&g, 2.0);
            if norm > 0.0 {
                break norm;
            }
        };
        out[0] = (f(&g) / norm).powf(p);
    })?;
    Ok(bm.mean(0))
}

/// `∫_{S^{n−1}} ‖t‖_{K°}^p dλ(t)`, the `p`-th moment of the half-width.
pub fn mean_width_power(body: &BodySpec, p: f64, samples: usize, rng: RngStream) -> Result<McEstimate> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain(format!("p must be positive, got {p}")));
    }
    sphere_mean(body.dim(), p, samples, rng, |g| dual_norm_unchecked(g, body))
}

/// `∫_{S^{n−1}} ‖t‖_r^p dλ(t)` for `r ∈ [1, ∞)`.
pub fn sphere_lr_moment(n: usize, r: f64, p: f64, samples: usize, rng: RngStream) -> Result<McEstimate> {
    if n == 0 {
        return Err(Error::domain("sphere dimension must be at least 1"));
    }
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::domain(format!("r must lie in [1, inf), got {r}")));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain(format!("p must be positive, got {p}")));
    }
    sphere_mean(n, p, samples, rng, |g| lr_norm(g, r))
}

/// `π_p(T)^p = b_p^{(n)} ∫_{S^{n−1}} ‖Tt‖_2^p dλ(t)`.
pub fn pi_p_ellipsoid(t: &DMatrix<f64>, p: f64, samples: usize, rng: RngStream) -> Result<McEstimate> {
    check_operator(t)?;
    check_energy_exponent(p)?;
    let n = t.nrows();
    let b = b_coeff(n, p)?;
    let est = sphere_mean(n, p, samples, rng, |g| {
        let g = DVector::from_column_slice(g);
        lr_norm((t * g).as_slice(), 2.0)
    })?;
    Ok(est.scaled(b))
}

/// Nested point sets inside a body.
///
/// For `n ≥ 2` the points are the boundary images of `D` antipodal directions,
/// a second copy of them pulled inward by a fixed relative gap, and the centre.
/// Directions start with `±e_1, …, ±e_n` and continue with antipodal pairs
/// from a scrambled Sobol sequence pushed through the normal quantile. Smaller
/// resolutions use a prefix of the same directions, so the point sets are nested.
/// One-dimensional bodies use symmetric Chebyshev grids.
#[derive(Debug, Clone)]
pub struct BodyDesign {
    body: BodySpec,
    directions: Vec<Vec<f64>>,
    gap: f64,
}

/// Bounds for the relative gap between the two shells.
const GAP_RANGE: (f64, f64) = (0.05, 0.1);

impl BodyDesign {
    /// A design able to produce up to `max_points` points.
    pub fn new(body: &BodySpec, max_points: usize, rng: RngStream) -> Result<Self> {
        if max_points < 2 {
            return Err(Error::domain("a point design needs at least two points"));
        }
        let n = body.dim();
        if n == 1 {
            return Ok(BodyDesign {
                body: body.clone(),
                directions: Vec::new(),
                gap: 0.0,
            });
        }
        let pairs = ((max_points - 1) / 2).max(1);
        let mut directions = Vec::with_capacity(2 * pairs);
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[i] = s;
                directions.push(e);
            }
        }
        let sobol_pairs = pairs.saturating_sub(n);
        let seed = (rng.seed ^ rng.stream.rotate_left(17)) as u32 ^ (rng.seed >> 32) as u32;
        let normal = Normal::standard();
        for k in 0..sobol_pairs {
            let mut g: Vec<f64> = (0..n)
                .map(|d| {
                    let dim = (d % sobol_burley::NUM_DIMENSIONS as usize) as u32;
                    let block = (d / sobol_burley::NUM_DIMENSIONS as usize) as u32;
                    let u = sobol_burley::sample(k as u32, dim, seed.wrapping_add(block.wrapping_mul(0x9E37_79B9))) as f64;
                    normal.inverse_cdf(u.clamp(1e-9, 1.0 - 1e-9))
                })
                .collect();
            let norm = lr_norm(&g, 2.0);
            g.iter_mut().for_each(|v| *v /= norm);
            let minus: Vec<f64> = g.iter().map(|v| -v).collect();
            directions.push(g);
            directions.push(minus);
        }
        let gap = (1.6 * (pairs as f64).powf(-1.0 / (n as f64 - 1.0))).clamp(GAP_RANGE.0, GAP_RANGE.1);
        Ok(BodyDesign {
            body: body.clone(),
            directions,
            gap,
        })
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// Boundary point of the body in the direction `u` (unit Euclidean).
    fn boundary(&self, u: &[f64], out: &mut [f64]) {
        match &self.body {
            BodySpec::Ellipsoid(e) => {
                let y = &e.operator * DVector::from_column_slice(u);
                out.copy_from_slice(y.as_slice());
            }
            body => {
                let g = body.gauge(u).expect("matching dimension");
                for (o, v) in out.iter_mut().zip(u) {
                    *o = v / g;
                }
            }
        }
    }

    /// About `resolution` points; the exact count is `2D + 1` for `D` directions,
    /// or the next odd number for one-dimensional bodies.
    pub fn points(&self, resolution: usize) -> PointSet {
        let n = self.body.dim();
        if n == 1 {
            let size = (resolution.max(3)) | 1;
            let scale = match &self.body {
                BodySpec::Ellipsoid(e) => e.operator[(0, 0)].abs(),
                _ => 1.0,
            };
            let grid = crate::discrete_energy::SymmetricGrid::new(crate::discrete_energy::GridKind::Chebyshev, size)
                .expect("odd size at least 3");
            return grid.to_point_set().scaled(scale);
        }
        let count = ((resolution.saturating_sub(1)) / 2).clamp(1, self.directions.len());
        let mut outer = PointSet::empty(n);
        let mut buf = vec![0.0; n];
        for u in &self.directions[..count] {
            self.boundary(u, &mut buf);
            outer.push(&buf);
        }
        let mut pts = outer.clone();
        pts.extend(&outer.scaled(1.0 - self.gap));
        pts.push(&vec![0.0; n]);
        pts
    }

    /// Pulls every point toward the centre by an independent factor in `[1 − δ, 1]`.
    pub fn jitter(&self, points: &PointSet, delta: f64, rng: RngStream) -> PointSet {
        let mut gen = rng.generator();
        points.map_points(points.dim(), |x, out| {
            let f = 1.0 - delta * gen.random::<f64>();
            for (o, v) in out.iter_mut().zip(x) {
                *o = v * f;
            }
        })
    }
}
