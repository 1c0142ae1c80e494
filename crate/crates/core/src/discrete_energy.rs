//! Maximal energy of signed atomic measures of total mass one.
//!
//! For a finite set `x_1, …, x_N` and the kernel `D[i][j] = ‖x_i − x_j‖_r^p`, the
//! quadratic form `λᵀDλ` restricted to `Σλ = 1` has a unique stationary point
//! `λ = D⁻¹𝟙 / (𝟙ᵀD⁻¹𝟙)` with value `1 / (𝟙ᵀD⁻¹𝟙)`. For `r ∈ [1, 2]` and `p`
//! in the admissible range this is the absolute maximum.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::{BodyDesign, BodySpec};
use crate::error::{Error, Result};
use crate::linalg::SymmetricLu;
use crate::points::{lr_distance, PointSet};
use crate::rng::RngStream;
use crate::specfun::check_energy_exponent;

/// Points closer than this (in `d_r`) are treated as duplicates.
pub const MIN_SEPARATION: f64 = 1e-9;
/// Allowed deviation of the total mass from one.
pub const MASS_TOLERANCE: f64 = 1e-10;
/// Condition estimates above this are reported as singular.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Relative agreement required between `1/(𝟙ᵀD⁻¹𝟙)` and `λᵀDλ`.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-9;
/// Mirror-symmetry tolerance for optimal weights on symmetric grids.
pub const BALANCE_TOLERANCE: f64 = 1e-8;
/// Relative size of the inward radial jitter applied after a singular solve.
pub const JITTER: f64 = 1e-6;

/// Validates `r ∈ [1, 2]` and `p` in the range where `d_r^p` is of negative type.
pub fn check_exponents(r: f64, p: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&r) {
        return Err(Error::domain(format!(
            "r must lie in [1, 2], got {r}; d_r is not quasihypermetric for r > 2"
        )));
    }
    check_energy_exponent(p)?;
    if r < 2.0 && p >= r {
        return Err(Error::domain(format!("p must be below r for r < 2, got p = {p}, r = {r}")));
    }
    Ok(())
}

/// A finitely supported signed measure of total mass one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignedAtomicMeasure {
    dimension: usize,
    points: PointSet,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMeasure {
    dimension: Option<usize>,
    points: PointSet,
    weights: Vec<f64>,
}

impl<'de> Deserialize<'de> for SignedAtomicMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawMeasure::deserialize(d)?;
        if let Some(n) = raw.dimension {
            if n != raw.points.dim() {
                return Err(serde::de::Error::custom(Error::DimensionMismatch {
                    expected: n,
                    actual: raw.points.dim(),
                }));
            }
        }
        SignedAtomicMeasure::new(raw.points, raw.weights).map_err(serde::de::Error::custom)
    }
}

impl SignedAtomicMeasure {
    pub fn new(points: PointSet, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                actual: weights.len(),
            });
        }
        if points.is_empty() {
            return Err(Error::domain("a measure needs at least one atom"));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::domain(format!("non-finite weight {w}")));
        }
        let mass: f64 = weights.iter().sum();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::domain(format!("total mass must be 1, got {mass}")));
        }
        if let Some((i, j, d)) = points.closest_pair() {
            if d < MIN_SEPARATION {
                return Err(Error::DuplicatePoints {
                    first: i,
                    second: j,
                    distance: d,
                });
            }
        }
        Ok(SignedAtomicMeasure {
            dimension: points.dim(),
            points,
            weights,
        })
    }

    /// Unit mass at one point.
    pub fn dirac(point: &[f64]) -> Result<Self> {
        SignedAtomicMeasure::new(PointSet::new(point.len(), point.to_vec())?, vec![1.0])
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// CSV with a mandatory `weight` column.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let (points, weights) = PointSet::from_csv_str(text)?;
        let weights = weights.ok_or_else(|| Error::Parse("measure CSV needs a 'weight' column".into()))?;
        SignedAtomicMeasure::new(points, weights)
    }

    pub fn to_csv(&self) -> String {
        self.points.to_csv(Some(&self.weights))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Symmetric support `p_1 < … < p_N` in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricGrid {
    points: Vec<f64>,
    symmetric: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    /// `−cos(πk/(N−1))`, clustered toward the endpoints.
    #[default]
    Chebyshev,
    Uniform,
}

impl SymmetricGrid {
    /// An odd-sized grid containing `0` and `±1`.
    pub fn new(kind: GridKind, n: usize) -> Result<Self> {
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::domain(format!("grid size must be odd and at least 3, got {n}")));
        }
        let last = (n - 1) as f64;
        let raw: Vec<f64> = (0..n)
            .map(|k| match kind {
                GridKind::Chebyshev => -(std::f64::consts::PI * k as f64 / last).cos(),
                GridKind::Uniform => -1.0 + 2.0 * k as f64 / last,
            })
            .collect();
        // exact mirror symmetry, with an exact zero in the middle
        let points = (0..n).map(|k| 0.5 * (raw[k] - raw[n - 1 - k])).collect();
        Ok(SymmetricGrid { points, symmetric: true })
    }

    /// Checks ordering and the range; the symmetry flag is computed.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("grid is empty"));
        }
        if points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("grid points must be strictly increasing"));
        }
        if points.iter().any(|x| !(-1.0..=1.0).contains(x)) {
            return Err(Error::domain("grid points must lie in [-1, 1]"));
        }
        let n = points.len();
        let symmetric = (0..n).all(|j| points[j] == -points[n - 1 - j]);
        Ok(SymmetricGrid { points, symmetric })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_point_set(&self) -> PointSet {
        PointSet::from_scalars(&self.points).expect("finite grid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    LinearSystem,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// Number of support points (or samples).
    pub resolution: usize,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<f64>,
}

/// An energy value with the method that produced it and its convergence trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub value: f64,
    pub method: Method,
    pub stderr: Option<f64>,
    pub trace: Vec<TracePoint>,
}

impl EnergyReport {
    pub fn closed_form(value: f64) -> Self {
        EnergyReport {
            value,
            method: Method::ClosedForm,
            stderr: None,
            trace: Vec::new(),
        }
    }

    /// Trace values never decrease by more than `tol`.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.trace.windows(2).all(|w| w[1].value >= w[0].value - tol)
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.trace.windows(2).all(|w| w[1].value > w[0].value)
    }
}

/// `D[i][j] = ‖x_i − x_j‖_r^p`.
pub fn distance_power_matrix(points: &PointSet, r: f64, p: f64) -> Result<DMatrix<f64>> {
    check_exponents(r, p)?;
    let m = points.len();
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..m)
                .map(|j| lr_distance(points.point(i), points.point(j), r))
                .collect()
        })
        .collect();
    let mut d = DMatrix::zeros(m, m);
    for (i, row) in rows.iter().enumerate() {
        for (k, &dist) in row.iter().enumerate() {
            let j = i + 1 + k;
            if dist < MIN_SEPARATION {
                return Err(Error::DuplicatePoints {
                    first: i,
                    second: j,
                    distance: dist,
                });
            }
            let v = if p == 1.0 { dist } else { dist.powf(p) };
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    Ok(d)
}

/// `λᵀDλ`
pub fn quadratic_energy(d: &DMatrix<f64>, weights: &[f64]) -> f64 {
    let w = DVector::from_column_slice(weights);
    w.dot(&(d * &w))
}

/// The stationary point of `λᵀDλ` on `Σλ = 1`.
#[derive(Debug, Clone)]
pub(crate) struct Stationary {
    pub weights: Vec<f64>,
    pub energy: f64,
    pub condition: f64,
}

pub(crate) fn solve_mass_one(d: DMatrix<f64>) -> Result<Stationary> {
    let m = d.nrows();
    if m == 1 {
        return Ok(Stationary {
            weights: vec![1.0],
            energy: 0.0,
            condition: 1.0,
        });
    }
    let lu = SymmetricLu::new(d);
    let condition = lu.condition();
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::Singular { condition });
    }
    let x = lu.solve(&DVector::from_element(m, 1.0));
    let s = x.sum();
    if !(s > 0.0) {
        return Err(Error::NotMaximum { denominator: s });
    }
    let weights: Vec<f64> = x.iter().map(|v| v / s).collect();
    let energy = 1.0 / s;
    let recomputed = quadratic_energy(lu.matrix(), &weights);
    if (recomputed - energy).abs() > CONSISTENCY_TOLERANCE * energy.abs() {
        return Err(Error::Inaccurate { energy, recomputed });
    }
    Ok(Stationary {
        weights,
        energy,
        condition,
    })
}

fn linear_report(energy: f64, resolution: usize, condition: f64) -> EnergyReport {
    EnergyReport {
        value: energy,
        method: Method::LinearSystem,
        stderr: None,
        trace: vec![TracePoint {
            resolution,
            value: energy,
            condition: Some(condition),
        }],
    }
}

/// Maximal `d_r^p` energy among mass-one signed measures supported on `points`.
pub fn max_energy_on_points(points: &PointSet, r: f64, p: f64) -> Result<(SignedAtomicMeasure, EnergyReport)> {
    let d = distance_power_matrix(points, r, p)?;
    let st = solve_mass_one(d)?;
    let report = linear_report(st.energy, points.len(), st.condition);
    let measure = SignedAtomicMeasure::new(points.clone(), st.weights)?;
    Ok((measure, report))
}

/// `Σ_{i,j} λ_i λ_j ‖x_i − x_j‖_r^p`
pub fn energy_of_measure(mu: &SignedAtomicMeasure, r: f64, p: f64) -> Result<f64> {
    check_exponents(r, p)?;
    let pts = mu.points();
    let w = mu.weights();
    let sum: f64 = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for (pj, wj) in pts.iter().zip(w).skip(i + 1) {
                acc += wj * lr_distance(pts.point(i), pj, r).powf(p);
            }
            w[i] * acc
        })
        .sum();
    Ok(2.0 * sum)
}

fn check_resolutions(sizes: &[usize]) -> Result<()> {
    if sizes.is_empty() {
        return Err(Error::domain("at least one resolution is required"));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("resolutions must be strictly increasing"));
    }
    Ok(())
}

/// Estimates `𝔪_p = M_p([−1, 1], d_2)` on a sequence of symmetric grids.
///
/// The optimal weights on a symmetric grid are mirror symmetric; the returned
/// measure is averaged with its mirror image, which leaves the energy unchanged
/// up to rounding and makes the balance exact.
pub fn estimate_mp(p: f64, grid_sizes: &[usize], kind: GridKind) -> Result<(SignedAtomicMeasure, EnergyReport)> {
    check_energy_exponent(p)?;
    check_resolutions(grid_sizes)?;
    for &n in grid_sizes {
        SymmetricGrid::new(kind, n)?;
    }
    let mut trace = Vec::with_capacity(grid_sizes.len());
    let mut last = None;
    for &n in grid_sizes {
        let grid = SymmetricGrid::new(kind, n)?;
        let points = grid.to_point_set();
        let d = distance_power_matrix(&points, 2.0, p)?;
        let st = solve_mass_one(d.clone())?;
        let w = &st.weights;
        let balanced: Vec<f64> = (0..n).map(|j| 0.5 * (w[j] + w[n - 1 - j])).collect();
        let recomputed = quadratic_energy(&d, &balanced);
        if (recomputed - st.energy).abs() > CONSISTENCY_TOLERANCE * st.energy {
            return Err(Error::Inaccurate {
                energy: st.energy,
                recomputed,
            });
        }
        trace.push(TracePoint {
            resolution: n,
            value: st.energy,
            condition: Some(st.condition),
        });
        last = Some((points, balanced, st.energy));
    }
    let (points, weights, value) = last.expect("non-empty grid list");
    let measure = SignedAtomicMeasure::new(points, weights)?;
    let report = EnergyReport {
        value,
        method: Method::LinearSystem,
        stderr: None,
        trace,
    };
    Ok((measure, report))
}

/// Largest mirror asymmetry `max_j |λ_j − λ_{N+1−j}|`.
pub fn balance_defect(weights: &[f64]) -> f64 {
    let n = weights.len();
    (0..n).map(|j| (weights[j] - weights[n - 1 - j]).abs()).fold(0.0, f64::max)
}

/// Discrete lower bounds for `M_p(K, d_r)` on nested point sets inside `K`.
///
/// `resolutions` are point counts. Each value in the trace is the exact maximal
/// energy of a finite subset of `K`, so all of them are lower bounds. If a solve
/// is singular the points are pulled inward by a relative factor up to
/// [`JITTER`] and the solve is retried once.
pub fn max_energy_in_body(
    body: &BodySpec,
    r: f64,
    p: f64,
    resolutions: &[usize],
    rng: RngStream,
) -> Result<(SignedAtomicMeasure, EnergyReport)> {
    check_exponents(r, p)?;
    check_resolutions(resolutions)?;
    let design = BodyDesign::new(body, *resolutions.last().expect("non-empty"), rng)?;
    let mut trace = Vec::with_capacity(resolutions.len());
    let mut best: Option<(SignedAtomicMeasure, f64)> = None;
    for (k, &res) in resolutions.iter().enumerate() {
        let points = design.points(res);
        let (measure, report) = match max_energy_on_points(&points, r, p) {
            Err(e) if e.is_solver_failure() => {
                let jittered = design.jitter(&points, JITTER, rng.substream(1_000 + k as u64));
                max_energy_on_points(&jittered, r, p)?
            }
            other => other?,
        };
        trace.push(report.trace[0]);
        if best.as_ref().is_none_or(|b| report.value > b.1) {
            best = Some((measure, report.value));
        }
    }
    let (measure, value) = best.expect("non-empty resolutions");
    Ok((
        measure,
        EnergyReport {
            value,
            method: Method::LinearSystem,
            stderr: None,
            trace,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::b_coeff;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn line(xs: &[f64]) -> PointSet {
        PointSet::from_scalars(xs).unwrap()
    }

    #[test]
    fn distance_matrix_examples() {
        let d = distance_power_matrix(&line(&[-1.0, 1.0]), 2.0, 1.0).unwrap();
        assert_eq!(d, DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 2.0, 0.0]));
        let d = distance_power_matrix(&line(&[-1.0, 0.0, 1.0]), 2.0, 1.0).unwrap();
        assert_eq!(
            d,
            DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0])
        );
        let pts = PointSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let d = distance_power_matrix(&pts, 1.0, 0.5).unwrap();
        assert_relative_eq!(d[(0, 1)], 2f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn duplicate_points_are_named() {
        let err = distance_power_matrix(&line(&[0.0, 1.0, 1.0 + 1e-12]), 2.0, 1.0).unwrap_err();
        match err {
            Error::DuplicatePoints { first, second, .. } => assert_eq!((first, second), (1, 2)),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn exponent_ranges() {
        assert!(check_exponents(2.0, 1.99).is_ok());
        assert!(check_exponents(2.0, 2.0).is_err());
        assert!(check_exponents(1.5, 1.5).is_err());
        assert!(check_exponents(1.0, 0.9).is_ok());
        assert!(check_exponents(2.5, 1.0).is_err());
        assert!(check_exponents(0.5, 0.1).is_err());
        assert!(check_exponents(2.0, 0.0).is_err());
    }

    #[test]
    fn two_endpoints() {
        let (mu, rep) = max_energy_on_points(&line(&[-1.0, 1.0]), 2.0, 1.0).unwrap();
        assert_relative_eq!(mu.weights()[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(mu.weights()[1], 0.5, epsilon = 1e-15);
        assert_relative_eq!(rep.value, 1.0, epsilon = 1e-14);
        assert_eq!(rep.method, Method::LinearSystem);
        assert!(rep.stderr.is_none());
    }

    #[test]
    fn three_points_p1() {
        // D x = 1 by hand: x = (1/2, 0, 1/2)
        let (mu, rep) = max_energy_on_points(&line(&[-1.0, 0.0, 1.0]), 2.0, 1.0).unwrap();
        let w = mu.weights();
        assert!((w[0] - 0.5).abs() < 1e-14 && w[1].abs() < 1e-14 && (w[2] - 0.5).abs() < 1e-14);
        assert_relative_eq!(rep.value, 1.0, epsilon = 1e-14);
    }

    /// Dense scan of `φ` over `(λ_1, λ_3)` with `λ_2 = 1 − λ_1 − λ_3`.
    fn scan_three_points(p: f64, step: f64) -> f64 {
        let d12 = 1.0;
        let d13 = 2f64.powf(p);
        let steps = (2.0 / step) as i64;
        let mut best = f64::NEG_INFINITY;
        for i in 0..=steps {
            let a = -0.5 + i as f64 * step;
            for j in 0..=steps {
                let c = -0.5 + j as f64 * step;
                let b = 1.0 - a - c;
                let phi = 2.0 * (a * b * d12 + b * c * d12 + a * c * d13);
                best = best.max(phi);
            }
        }
        best
    }

    #[test]
    fn three_points_p15_matches_scan() {
        let scanned = scan_three_points(1.5, 2e-3);
        assert!(scanned > 1.0);
        let (_, rep) = max_energy_on_points(&line(&[-1.0, 0.0, 1.0]), 2.0, 1.5).unwrap();
        assert!(rep.value > 1.0);
        // the scan sits on a 2e-3 lattice, so it can only undershoot by O(step²)
        assert!(rep.value >= scanned - 1e-12);
        assert!(rep.value - scanned < 1e-4, "{} vs {scanned}", rep.value);
    }

    #[test]
    fn single_atom_has_zero_energy() {
        let mu = SignedAtomicMeasure::dirac(&[0.3, 0.1]).unwrap();
        assert_eq!(energy_of_measure(&mu, 2.0, 1.3).unwrap(), 0.0);
        let (m, rep) = max_energy_on_points(&line(&[0.25]), 2.0, 1.0).unwrap();
        assert_eq!(m.weights(), &[1.0]);
        assert_eq!(rep.value, 0.0);
    }

    #[test]
    fn energy_of_measure_examples() {
        let mu = SignedAtomicMeasure::new(line(&[-1.0, 1.0]), vec![0.5, 0.5]).unwrap();
        assert_relative_eq!(energy_of_measure(&mu, 2.0, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        for c in [0.5, 3.0] {
            let mc = SignedAtomicMeasure::new(line(&[-c, c]), vec![0.5, 0.5]).unwrap();
            let base = energy_of_measure(&mu, 2.0, 0.7).unwrap();
            assert_relative_eq!(energy_of_measure(&mc, 2.0, 0.7).unwrap(), c.powf(0.7) * base, max_relative = 1e-14);
        }
    }

    #[test]
    fn measure_validation() {
        assert!(SignedAtomicMeasure::new(line(&[0.0, 1.0]), vec![0.5, 0.6]).is_err());
        assert!(SignedAtomicMeasure::new(line(&[0.0, 0.0]), vec![0.5, 0.5]).is_err());
        assert!(SignedAtomicMeasure::new(line(&[0.0, 1.0]), vec![1.0]).is_err());
        assert!(SignedAtomicMeasure::new(line(&[0.0, 1.0]), vec![2.0, -1.0]).is_ok());
    }

    #[test]
    fn measure_csv_and_json_roundtrip() {
        let mu = SignedAtomicMeasure::new(
            PointSet::from_rows(&[vec![0.0, 1.0], vec![2.0, -1.0]]).unwrap(),
            vec![1.5, -0.5],
        )
        .unwrap();
        assert_eq!(SignedAtomicMeasure::from_csv_str(&mu.to_csv()).unwrap(), mu);
        let json = serde_json::to_string(&mu).unwrap();
        assert_eq!(SignedAtomicMeasure::from_json_str(&json).unwrap(), mu);
        assert!(SignedAtomicMeasure::from_csv_str("x1\n0\n").is_err());
        assert!(SignedAtomicMeasure::from_json_str(r#"{"dimension":3,"points":[[0,1]],"weights":[1]}"#).is_err());
    }

    #[test]
    fn grids_are_symmetric_and_contain_zero() {
        for kind in [GridKind::Chebyshev, GridKind::Uniform] {
            let g = SymmetricGrid::new(kind, 41).unwrap();
            assert!(g.is_symmetric());
            assert_eq!(g.points()[20], 0.0);
            assert_eq!(g.points()[0], -1.0);
            assert_eq!(g.points()[40], 1.0);
            assert!(SymmetricGrid::from_points(g.points().to_vec()).unwrap().is_symmetric());
        }
        assert!(SymmetricGrid::new(GridKind::Chebyshev, 4).is_err());
        assert!(SymmetricGrid::new(GridKind::Chebyshev, 1).is_err());
        assert!(!SymmetricGrid::from_points(vec![-1.0, 0.5]).unwrap().is_symmetric());
    }

    #[test]
    fn mp_at_one_is_one() {
        let (mu, rep) = estimate_mp(1.0, &[3, 41, 401], GridKind::Chebyshev).unwrap();
        assert!((rep.value - 1.0).abs() < 1e-3, "{}", rep.value);
        assert_eq!(rep.trace.len(), 3);
        assert!(balance_defect(mu.weights()) < BALANCE_TOLERANCE);
    }

    #[test]
    fn mp_trace_increases_at_p15() {
        let (_, rep) = estimate_mp(1.5, &[41, 101, 401], GridKind::Chebyshev).unwrap();
        assert!(rep.is_strictly_increasing(), "{:?}", rep.trace);
        assert!(rep.value > 1.0);
    }

    /// Two-atom family `{−1, 1}` with weights `(1/2, 1/2)` has energy `2^p / 2`, and
    /// the energy `Σ_{i≠j} λ_iλ_j |x_i−x_j|^p` tends to `1 − Σλ_i²` as `p → 0`.
    #[test]
    fn mp_small_p_sits_just_below_one() {
        let p = 0.01;
        let two_atoms = 2f64.powf(p) / 2.0;
        let (_, rep) = estimate_mp(p, &[41, 101, 401], GridKind::Chebyshev).unwrap();
        assert!(rep.value > two_atoms);
        assert!(rep.is_strictly_increasing());
        // grid values climb toward 1 − p ln 2 + O(p²) from below
        assert!(rep.value < 1.0 && rep.value > 0.98, "{}", rep.value);
    }

    #[test]
    fn mp_rejects_p_two() {
        let e = estimate_mp(2.0, &[41], GridKind::Chebyshev).unwrap_err();
        assert!(e.to_string().contains("infinity"));
        assert!(estimate_mp(1.0, &[41, 40], GridKind::Chebyshev).is_err());
        assert!(estimate_mp(1.0, &[40], GridKind::Chebyshev).is_err());
    }

    #[test]
    fn uniform_grid_underestimates_chebyshev() {
        let (_, u) = estimate_mp(0.5, &[101], GridKind::Uniform).unwrap();
        let (_, c) = estimate_mp(0.5, &[101], GridKind::Chebyshev).unwrap();
        assert!(u.value > 0.8 && c.value > 0.8);
        assert!((u.value - c.value).abs() < 0.05);
    }

    fn random_points(n: usize, m: usize, seed: u64) -> PointSet {
        use rand::Rng;
        let mut g = RngStream::from_seed(seed).generator();
        let coords: Vec<f64> = (0..n * m).map(|_| g.random_range(-1.0..1.0)).collect();
        PointSet::new(n, coords).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn mass_and_consistency(seed in 0u64..1000, m in 2usize..30, n in 1usize..4, p in 0.1f64..1.9) {
            let pts = random_points(n, m, seed);
            if let Ok((mu, rep)) = max_energy_on_points(&pts, 2.0, p) {
                prop_assert!((mu.total_mass() - 1.0).abs() < MASS_TOLERANCE);
                let direct = energy_of_measure(&mu, 2.0, p).unwrap();
                prop_assert!((direct - rep.value).abs() <= 1e-9 * rep.value);
            }
        }

        #[test]
        fn balanced_on_symmetric_grids(p in 0.05f64..1.8, half in 1usize..40, uniform in any::<bool>()) {
            let kind = if uniform { GridKind::Uniform } else { GridKind::Chebyshev };
            let (mu, _) = estimate_mp(p, &[2 * half + 1], kind).unwrap();
            prop_assert!(balance_defect(mu.weights()) < BALANCE_TOLERANCE);
            prop_assert!((mu.total_mass() - 1.0).abs() < MASS_TOLERANCE);
        }

        #[test]
        fn adding_points_never_lowers_energy(seed in 0u64..1000, m in 2usize..25, p in 0.2f64..1.8, r in 1.0f64..2.0) {
            let p = p.min(0.95 * r);
            let pts = random_points(2, m + 1, seed);
            let sub = PointSet::new(2, pts.to_rows()[..m].concat()).unwrap();
            if let (Ok((_, a)), Ok((_, b))) = (max_energy_on_points(&sub, r, p), max_energy_on_points(&pts, r, p)) {
                prop_assert!(b.value >= a.value - 1e-10);
            }
        }

        #[test]
        fn scaling(seed in 0u64..1000, m in 2usize..20, p in 0.2f64..1.8) {
            let pts = random_points(3, m, seed);
            if let Ok((_, base)) = max_energy_on_points(&pts, 2.0, p) {
                for c in [0.5, 2.0, 10.0] {
                    let (_, s) = max_energy_on_points(&pts.scaled(c), 2.0, p).unwrap();
                    prop_assert!((s.value - c.powf(p) * base.value).abs() <= 1e-9 * s.value);
                }
            }
        }

        #[test]
        fn rotation_invariance(seed in 0u64..1000, m in 2usize..20, p in 0.2f64..1.8) {
            let pts = random_points(3, m, seed);
            let a = DMatrix::from_row_slice(3, 3, &random_points(3, 3, seed + 7).to_rows().concat());
            let q = a.qr().q();
            let rotated = pts.map_points(3, |x, out| {
                let y = &q * nalgebra::Vector3::new(x[0], x[1], x[2]);
                out.copy_from_slice(y.as_slice());
            });
            if let Ok((_, base)) = max_energy_on_points(&pts, 2.0, p) {
                let (_, rot) = max_energy_on_points(&rotated, 2.0, p).unwrap();
                prop_assert!((rot.value - base.value).abs() <= 1e-9 * base.value);
            }
        }

        #[test]
        fn p1_energies_inside_ball_respect_closed_form(seed in 0u64..1000, m in 2usize..40, n in 1usize..5) {
            let pts = random_points(n, m, seed);
            let inside = pts.map_points(n, |x, out| {
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
                for (o, v) in out.iter_mut().zip(x) {
                    *o = v / norm;
                }
            });
            if let Ok((_, rep)) = max_energy_on_points(&inside, 2.0, 1.0) {
                prop_assert!(rep.value <= b_coeff(n, 1.0).unwrap() + 1e-9);
            }
        }
    }
}
