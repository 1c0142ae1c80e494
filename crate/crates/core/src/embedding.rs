//! Isometric embeddings of `(X, d_2^α)` into Euclidean spheres.
//!
//! A finite `X` embeds on the sphere of radius `R` exactly when the Gram
//! matrix `G = R² − d^{2α}/2` (diagonal `R²`) is positive semidefinite. The
//! smallest such radius is `√(M_{2α}(X, d_2)/2)`, the maximal energy of `X`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::asymptotics::{fit_loglog, q_sweep, SlopeFit, SweepBudget};
use crate::discrete_energy::{distance_power_matrix, max_energy_on_points, SignedAtomicMeasure};
use crate::error::{Error, Result};
use crate::points::{lr_distance, PointSet};
use crate::rng::RngStream;
use crate::specfun::b_coeff;

/// Negative Gram eigenvalues down to `−PSD_TOLERANCE · R²` are clipped to zero.
pub const PSD_TOLERANCE: f64 = 1e-8;

/// Points on the sphere of radius `radius` in `R^m`, one row per input point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalEmbedding {
    pub radius: f64,
    pub alpha: f64,
    pub coordinates: Vec<Vec<f64>>,
    /// Gram eigenvalues in increasing order.
    pub gram_spectrum: Vec<f64>,
    pub gram_min_eigenvalue: f64,
    pub max_distance_residual: f64,
    pub max_norm_residual: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Smallest radius of a sphere carrying an isometric copy of `(X, d_2^α)`,
/// together with the energy-maximizing measure.
pub fn schoenberg_radius_points(points: &PointSet, alpha: f64) -> Result<(f64, SignedAtomicMeasure)> {
    check_alpha(alpha)?;
    let (measure, report) = max_energy_on_points(points, 2.0, 2.0 * alpha)?;
    Ok(((report.value / 2.0).sqrt(), measure))
}

/// Embeds `(X, d_2^α)` on the sphere of radius `radius` via the spectral
/// factorization of its Gram matrix.
pub fn embed_snowflake(points: &PointSet, alpha: f64, radius: f64) -> Result<SphericalEmbedding> {
    check_alpha(alpha)?;
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::domain(format!("radius must be non-negative and finite, got {radius}")));
    }
    let m = points.len();
    if m == 0 {
        return Err(Error::domain("no points to embed"));
    }
    let d = distance_power_matrix(points, 2.0, 2.0 * alpha)?;
    let r2 = radius * radius;
    let gram = DMatrix::from_fn(m, m, |i, j| r2 - 0.5 * d[(i, j)]);
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let spectrum: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let min_eigenvalue = spectrum[0];
    if min_eigenvalue < -PSD_TOLERANCE * r2 {
        return Err(Error::RadiusBelowSchoenberg {
            radius,
            min_eigenvalue,
        });
    }
    let scale: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k].max(0.0).sqrt()).collect();
    // columns ordered by decreasing eigenvalue so the leading coordinates carry the mass
    let coordinates: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..m)
                .rev()
                .map(|c| eig.eigenvectors[(i, order[c])] * scale[c])
                .collect()
        })
        .collect();
    let mut max_distance_residual = 0.0f64;
    let mut max_norm_residual = 0.0f64;
    for i in 0..m {
        let norm = lr_distance(&coordinates[i], &vec![0.0; m], 2.0);
        max_norm_residual = max_norm_residual.max((norm - radius).abs());
        for j in (i + 1)..m {
            let got = lr_distance(&coordinates[i], &coordinates[j], 2.0);
            let want = lr_distance(points.point(i), points.point(j), 2.0).powf(alpha);
            max_distance_residual = max_distance_residual.max((got - want).abs());
        }
    }
    Ok(SphericalEmbedding {
        radius,
        alpha,
        coordinates,
        gram_spectrum: spectrum,
        gram_min_eigenvalue: min_eigenvalue,
        max_distance_residual,
        max_norm_residual,
    })
}

/// `√(𝔪_{2α} b_{2α}^{(n)} / 2)`, the Schoenberg radius of `(B_2^n, d_2^α)` given `𝔪_{2α}`.
pub fn radius_closed_form_ball(n: usize, alpha: f64, mp: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(mp > 0.0 && mp.is_finite()) {
        return Err(Error::domain(format!("m_p estimate must be positive and finite, got {mp}")));
    }
    Ok((mp * b_coeff(n, 2.0 * alpha)? / 2.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusRow {
    pub n: usize,
    pub r_lower: f64,
    pub r_upper: f64,
    pub r_upper_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusGrowthReport {
    pub q: f64,
    pub alpha: f64,
    pub predicted_slope: f64,
    pub rows: Vec<RadiusRow>,
    pub lower_slope: SlopeFit,
    pub upper_slope: SlopeFit,
}

/// Bounds for the Schoenberg radius of `(B_q^n, d_2^α)` over `n_list`.
pub fn radius_growth_report(
    q: f64,
    alpha: f64,
    n_list: &[usize],
    budget: &SweepBudget,
    rng: RngStream,
) -> Result<RadiusGrowthReport> {
    check_alpha(alpha)?;
    if !(q > 1.0 && q <= 2.0) {
        return Err(Error::domain(format!("q must lie in (1, 2], got {q}")));
    }
    let sweep = q_sweep(q, 2.0 * alpha, n_list, budget, rng)?;
    let rows: Vec<RadiusRow> = sweep
        .rows
        .iter()
        .map(|row| {
            let upper = row.upper.powf(0.5).scaled(std::f64::consts::FRAC_1_SQRT_2);
            RadiusRow {
                n: row.n,
                r_lower: (row.lower / 2.0).sqrt(),
                r_upper: upper.estimate,
                r_upper_stderr: upper.stderr,
            }
        })
        .collect();
    let lowers: Vec<f64> = rows.iter().map(|r| r.r_lower).collect();
    let uppers: Vec<f64> = rows.iter().map(|r| r.r_upper).collect();
    Ok(RadiusGrowthReport {
        q,
        alpha,
        predicted_slope: sweep.predicted_slope / 2.0,
        lower_slope: fit_loglog(n_list, &lowers)?,
        upper_slope: fit_loglog(n_list, &uppers)?,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_points(n: usize, m: usize, seed: u64) -> PointSet {
        let mut g = RngStream::from_seed(seed).generator();
        PointSet::new(n, (0..n * m).map(|_| g.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn two_points() {
        let pts = PointSet::from_scalars(&[-1.0, 1.0]).unwrap();
        let (r, mu) = schoenberg_radius_points(&pts, 0.5).unwrap();
        assert_relative_eq!(r, 0.5f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(mu.weights()[0], 0.5, epsilon = 1e-15);
        let d = 3.0f64;
        let pts = PointSet::from_rows(&[vec![0.0, 0.0], vec![d, 0.0]]).unwrap();
        for alpha in [0.2, 0.5, 0.9] {
            let (r, _) = schoenberg_radius_points(&pts, alpha).unwrap();
            assert_relative_eq!(r, d.powf(alpha) / 2.0, max_relative = 1e-14);
            let e = embed_snowflake(&pts, alpha, r).unwrap();
            assert!(e.max_distance_residual < 1e-10 && e.max_norm_residual < 1e-10);
            // antipodal
            let sum: f64 = e.coordinates[0].iter().zip(&e.coordinates[1]).map(|(a, b)| (a + b).abs()).sum();
            assert!(sum < 1e-10);
        }
    }

    #[test]
    fn twelve_random_points() {
        let pts = random_points(4, 12, 3);
        let (r, _) = schoenberg_radius_points(&pts, 0.5).unwrap();
        let e = embed_snowflake(&pts, 0.5, r).unwrap();
        assert!(e.gram_min_eigenvalue >= -PSD_TOLERANCE * r * r);
        assert!(e.max_distance_residual < 1e-7, "{}", e.max_distance_residual);
        assert_eq!(e.coordinates.len(), 12);
        assert_eq!(e.coordinates[0].len(), 12);
        // direct check: Gram of 0.9 R has a negative eigenvalue
        let err = embed_snowflake(&pts, 0.5, 0.9 * r).unwrap_err();
        match err {
            Error::RadiusBelowSchoenberg { min_eigenvalue, .. } => assert!(min_eigenvalue < 0.0),
            e => panic!("unexpected {e}"),
        }
        assert!(embed_snowflake(&pts, 0.5, 1.5 * r).is_ok());
    }

    #[test]
    fn closed_form_radius() {
        assert_relative_eq!(radius_closed_form_ball(3, 0.5, 1.0).unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(radius_closed_form_ball(1, 0.3, 0.9).unwrap(), 0.45f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(radius_closed_form_ball(2, 0.5, 1.0).unwrap(), (std::f64::consts::PI / 4.0).sqrt(), epsilon = 1e-14);
        assert!(radius_closed_form_ball(2, 1.0, 1.0).is_err());
    }

    #[test]
    fn validation() {
        let pts = random_points(2, 4, 1);
        assert!(schoenberg_radius_points(&pts, 1.0).is_err());
        assert!(schoenberg_radius_points(&pts, 0.0).is_err());
        assert!(embed_snowflake(&pts, 0.5, -1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn critical_radius_is_sharp(seed in 0u64..10_000, m in 2usize..30, n in 1usize..6, alpha in 0.1f64..0.9) {
            let pts = random_points(n, m, seed);
            if let Ok((r, _)) = schoenberg_radius_points(&pts, alpha) {
                let e = embed_snowflake(&pts, alpha, r).unwrap();
                prop_assert!(e.gram_min_eigenvalue >= -PSD_TOLERANCE * r * r);
                prop_assert!(e.max_distance_residual < 1e-7);
                prop_assert!(e.max_norm_residual < 1e-7);
                prop_assert!(embed_snowflake(&pts, alpha, 0.95 * r).is_err());
            }
        }

        #[test]
        fn adding_a_point_never_shrinks_radius(seed in 0u64..10_000, m in 2usize..20, alpha in 0.1f64..0.9) {
            let pts = random_points(3, m + 1, seed);
            let sub = PointSet::new(3, pts.to_rows()[..m].concat()).unwrap();
            if let (Ok((a, _)), Ok((b, _))) = (schoenberg_radius_points(&sub, alpha), schoenberg_radius_points(&pts, alpha)) {
                prop_assert!(b >= a * (1.0 - 1e-10));
            }
        }

        #[test]
        fn radius_scales_like_c_alpha(seed in 0u64..10_000, m in 2usize..20, alpha in 0.1f64..0.9, c in prop_oneof![Just(0.5), Just(2.0), Just(10.0)]) {
            let pts = random_points(2, m, seed);
            if let Ok((r, _)) = schoenberg_radius_points(&pts, alpha) {
                let (rc, _) = schoenberg_radius_points(&pts.scaled(c), alpha).unwrap();
                prop_assert!((rc - c.powf(alpha) * r).abs() <= 1e-9 * rc);
            }
        }
    }
}
