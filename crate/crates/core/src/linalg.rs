//! Dense LU solves with a 1-norm condition estimate.

use nalgebra::{DMatrix, DVector, Dyn, LU};

/// An LU factorisation (partial pivoting) of a symmetric matrix, kept together
/// with the original matrix for iterative refinement.
pub struct SymmetricLu {
    matrix: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
    condition: f64,
}

impl SymmetricLu {
    /// Factor `matrix`. The condition estimate is infinite when a pivot is exactly zero.
    pub fn new(matrix: DMatrix<f64>) -> Self {
        debug_assert!(matrix.is_square());
        let lu = matrix.clone().lu();
        let mut f = SymmetricLu {
            matrix,
            lu,
            condition: f64::INFINITY,
        };
        if f.lu.is_invertible() {
            let inv_norm = f.estimate_inverse_norm1();
            f.condition = norm1(&f.matrix) * inv_norm;
            if !f.condition.is_finite() {
                f.condition = f64::INFINITY;
            }
        }
        f
    }

    /// Estimated 1-norm condition number `‖A‖₁ ‖A⁻¹‖₁`.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn raw_solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.lu
            .solve(b)
            .unwrap_or_else(|| DVector::from_element(b.len(), f64::NAN))
    }

    /// Solve `A x = b` followed by two rounds of iterative refinement.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = self.raw_solve(b);
        for _ in 0..2 {
            let r = b - &self.matrix * &x;
            x += self.raw_solve(&r);
        }
        x
    }

    /// Hager–Higham estimate of `‖A⁻¹‖₁`; `A` is symmetric so `A⁻ᵀ = A⁻¹`.
    fn estimate_inverse_norm1(&self) -> f64 {
        let n = self.dim();
        if n == 0 {
            return 0.0;
        }
        let mut x = DVector::from_element(n, 1.0 / n as f64);
        let mut est = 0.0;
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            let y = self.raw_solve(&x);
            est = y.iter().map(|v| v.abs()).sum::<f64>();
            let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
            let z = self.raw_solve(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .fold((0, 0.0f64), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
            if zmax <= z.dot(&x) || j == last_j {
                break;
            }
            x.fill(0.0);
            x[j] = 1.0;
            last_j = j;
        }
        // Higham's alternating test vector guards against the worst cases of the power iteration.
        let alt = if n > 1 {
            DVector::from_fn(n, |i, _| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                s * (1.0 + i as f64 / (n - 1) as f64)
            })
        } else {
            DVector::from_element(1, 1.0)
        };
        let alt_est = 2.0 * self.raw_solve(&alt).iter().map(|v| v.abs()).sum::<f64>() / (3.0 * n as f64);
        est.max(alt_est)
    }
}

pub fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
