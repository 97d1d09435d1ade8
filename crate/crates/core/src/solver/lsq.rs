//! Complex least squares `min ||b + A c||` with a truncated SVD.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{MrcError, Result};

/// Design matrix and right-hand side, with the discrete boundary norm
/// `||a||^2 = (1/N) sum_i w_i |a_i|^2` (unit weights unless arclength
/// weighting is requested).
#[derive(Debug, Clone)]
pub struct LeastSquaresSystem {
    matrix: DMatrix<Complex64>,
    rhs: DVector<Complex64>,
    weights: Option<Vec<f64>>,
}

impl LeastSquaresSystem {
    pub fn new(matrix: DMatrix<Complex64>, rhs: DVector<Complex64>) -> Result<Self> {
        if matrix.nrows() != rhs.len() {
            return Err(MrcError::InvalidParameter(format!(
                "matrix has {} rows but right-hand side has {} entries",
                matrix.nrows(),
                rhs.len()
            )));
        }
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(MrcError::InvalidParameter("empty least-squares system".into()));
        }
        Ok(Self {
            matrix,
            rhs,
            weights: None,
        })
    }

    /// Attaches per-row norm weights (positive, typically of mean one).
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.rhs.len() || weights.iter().any(|w| !(*w > 0.0)) {
            return Err(MrcError::InvalidParameter(
                "weights must be positive, one per row".into(),
            ));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn rhs(&self) -> &DVector<Complex64> {
        &self.rhs
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    /// Discrete boundary norm of a length-`N` vector.
    pub fn norm(&self, v: &DVector<Complex64>) -> f64 {
        let sum: f64 = match &self.weights {
            Some(w) => v.iter().zip(w).map(|(a, w)| w * a.norm_sqr()).sum(),
            None => v.iter().map(|a| a.norm_sqr()).sum(),
        };
        (sum / v.len() as f64).sqrt()
    }

    /// `||b + A c||`, by direct matrix-vector product.
    pub fn residual_norm(&self, coefficients: &DVector<Complex64>) -> f64 {
        let r = &self.rhs + &self.matrix * coefficients;
        self.norm(&r)
    }

    fn row_scales(&self) -> Option<Vec<f64>> {
        self.weights
            .as_ref()
            .map(|w| w.iter().map(|w| w.sqrt()).collect())
    }
}

#[derive(Debug, Clone)]
pub struct TsvdSolution {
    pub coefficients: DVector<Complex64>,
    pub r_min: f64,
    pub singular_values: Vec<f64>,
    /// Singular values dropped by the cutoff.
    pub discarded: usize,
}

impl TsvdSolution {
    pub fn rank(&self) -> usize {
        self.singular_values.len() - self.discarded
    }
}

/// Solves `min ||b + A c||` keeping only singular values `sigma >= w_min *
/// sigma_max`, so `c = -A_trunc^+ b`. The residual is formed from the
/// projection of `b` onto the retained left singular vectors.
pub fn solve_tsvd(system: &LeastSquaresSystem, w_min: f64) -> Result<TsvdSolution> {
    if !(w_min > 0.0) {
        return Err(MrcError::InvalidParameter(format!(
            "w_min must be > 0, got {w_min}"
        )));
    }
    let rhs_norm = system.norm(&system.rhs);

    let (matrix, rhs) = match system.row_scales() {
        Some(s) => {
            let mut a = system.matrix.clone();
            let mut b = system.rhs.clone();
            for (i, s) in s.iter().enumerate() {
                a.row_mut(i).scale_mut(*s);
                b[i] *= s;
            }
            (a, b)
        }
        None => (system.matrix.clone(), system.rhs.clone()),
    };

    let svd = matrix.svd(true, true);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);

    let cols = system.cols();
    let zero = || TsvdSolution {
        coefficients: DVector::zeros(cols),
        r_min: 0.0,
        singular_values: sigma.clone(),
        discarded: 0,
    };
    if rhs_norm == 0.0 {
        return Ok(zero());
    }
    if !(sigma_max > 0.0) || !sigma_max.is_finite() {
        return Err(MrcError::DegenerateMatrix { sigma_max });
    }

    let cutoff = w_min * sigma_max;
    let mut coefficients = DVector::<Complex64>::zeros(cols);
    let mut projection = DVector::<Complex64>::zeros(rhs.len());
    let mut discarded = 0;
    for (k, &s) in sigma.iter().enumerate() {
        if s < cutoff {
            discarded += 1;
            continue;
        }
        let uk = u.column(k);
        let beta = uk.dotc(&rhs);
        projection.axpy(beta, &uk, Complex64::new(1.0, 0.0));
        // v_k is the conjugate of row k of V^H.
        let scale = -beta / s;
        for (c, vk) in coefficients.iter_mut().zip(v_t.row(k).iter()) {
            *c += scale * vk.conj();
        }
    }
    if discarded == sigma.len() {
        return Err(MrcError::DegenerateMatrix { sigma_max });
    }

    // Residual in the scaled space equals the weighted residual.
    let residual = &rhs - &projection;
    let r_min = (residual.iter().map(|a| a.norm_sqr()).sum::<f64>() / rhs.len() as f64).sqrt();

    Ok(TsvdSolution {
        coefficients,
        r_min,
        singular_values: sigma,
        discarded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_rhs_gives_zero_solution() {
        let a = DMatrix::from_fn(4, 2, |i, j| c((i + j) as f64, 1.0));
        let sys = LeastSquaresSystem::new(a, DVector::zeros(4)).unwrap();
        let sol = solve_tsvd(&sys, 1e-8).unwrap();
        assert_eq!(sol.r_min, 0.0);
        assert!(sol.coefficients.iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn identity_system_is_solved_exactly() {
        let b = DVector::from_fn(5, |i, _| Complex64::cis(i as f64));
        let sys = LeastSquaresSystem::new(DMatrix::identity(5, 5), b.clone()).unwrap();
        let sol = solve_tsvd(&sys, 1e-14).unwrap();
        assert!(sol.r_min < 1e-15);
        assert!((sol.coefficients + b).norm() < 1e-14);
        assert_eq!(sol.discarded, 0);
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        let b = DVector::from_element(3, c(1.0, 0.0));
        let sys = LeastSquaresSystem::new(DMatrix::zeros(3, 2), b).unwrap();
        assert!(matches!(
            solve_tsvd(&sys, 1e-8),
            Err(MrcError::DegenerateMatrix { .. })
        ));
    }

    #[test]
    fn cutoff_discards_small_directions() {
        let mut a = DMatrix::<Complex64>::zeros(4, 2);
        a[(0, 0)] = c(1.0, 0.0);
        a[(1, 1)] = c(1e-10, 0.0);
        let b = DVector::from_element(4, c(1.0, 0.0));
        let sys = LeastSquaresSystem::new(a, b).unwrap();
        let sol = solve_tsvd(&sys, 1e-8).unwrap();
        assert_eq!(sol.discarded, 1);
        assert_eq!(sol.rank(), 1);
        assert!((sol.r_min - (3.0f64 / 4.0).sqrt()).abs() < 1e-14);
        let full = solve_tsvd(&sys, 1e-12).unwrap();
        assert!((full.r_min - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn weights_change_the_norm() {
        let a = DMatrix::from_column_slice(2, 1, &[c(1.0, 0.0), c(1.0, 0.0)]);
        let b = DVector::from_column_slice(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let sys = LeastSquaresSystem::new(a.clone(), b.clone()).unwrap();
        assert!(solve_tsvd(&sys, 1e-8).unwrap().coefficients[0].norm() < 1e-15);
        let sys = LeastSquaresSystem::new(a, b).unwrap().with_weights(vec![3.0, 1.0]).unwrap();
        let sol = solve_tsvd(&sys, 1e-8).unwrap();
        // Weighted minimizer of 3|1+c|^2 + |c-1|^2 is c = -1/2.
        assert!((sol.coefficients[0] - c(-0.5, 0.0)).norm() < 1e-14);
        assert!((sol.r_min - sys.residual_norm(&sol.coefficients)).abs() < 1e-14);
    }

    #[test]
    fn rejects_mismatched_shapes() {
        assert!(LeastSquaresSystem::new(DMatrix::zeros(3, 2), DVector::zeros(2)).is_err());
        let sys = LeastSquaresSystem::new(DMatrix::identity(2, 2), DVector::zeros(2)).unwrap();
        assert!(sys.clone().with_weights(vec![1.0]).is_err());
        assert!(solve_tsvd(&sys, 0.0).is_err());
    }
}
