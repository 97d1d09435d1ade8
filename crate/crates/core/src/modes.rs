//! Quasiperiodic spectral data: Bloch wavenumbers `lambda_j`, vertical
//! wavenumbers `mu_j`, normalized horizontal eigenfunctions and the incident
//! plane wave.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{MrcError, Result};

/// Default half-width of the mode index range, `[-120, 120]`.
pub const DEFAULT_J_RANGE: usize = 120;

/// Relative Wood-anomaly tolerance; the absolute tolerance is this times `k^2`.
pub const DEFAULT_WOOD_TOL_REL: f64 = 1e-10;

/// A point `(x, y)` in the plane.
pub type Point = (f64, f64);

/// Physical parameters of one scattering problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterParams {
    k: f64,
    period: f64,
    theta: f64,
}

impl ScatterParams {
    /// `k > 0`, `period > 0`, `0 < theta <= pi/2`.
    pub fn new(k: f64, period: f64, theta: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(MrcError::InvalidParameter(format!("k must be > 0, got {k}")));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(MrcError::InvalidParameter(format!(
                "period must be > 0, got {period}"
            )));
        }
        // theta = pi/2 is normal incidence and is admitted.
        if !(theta.is_finite() && theta > 0.0 && theta <= FRAC_PI_2 + 4.0 * f64::EPSILON) {
            return Err(MrcError::InvalidParameter(format!(
                "theta must lie in (0, pi/2], got {theta}"
            )));
        }
        Ok(Self {
            k,
            period,
            theta: theta.min(FRAC_PI_2),
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Default absolute Wood tolerance on `|k^2 - lambda_j^2|`.
    pub fn default_wood_tol(&self) -> f64 {
        DEFAULT_WOOD_TOL_REL * self.k * self.k
    }
}

/// `nu = exp(i k L cos(theta))`.
pub fn quasiperiodicity_factor(params: &ScatterParams) -> Complex64 {
    Complex64::cis(params.k * params.period * params.theta.cos())
}

/// `lambda_j = k cos(theta) + 2 pi j / L`.
pub fn lambda_j(params: &ScatterParams, j: i64) -> f64 {
    params.k * params.theta.cos() + 2.0 * PI * j as f64 / params.period
}

/// Vertical wavenumber on the outgoing branch: positive real for propagating
/// orders, positive imaginary for evanescent ones.
pub fn mu_j(params: &ScatterParams, j: i64, wood_tol: f64) -> Result<Complex64> {
    let lambda = lambda_j(params, j);
    let gap = params.k * params.k - lambda * lambda;
    if gap.abs() <= wood_tol {
        return Err(MrcError::WoodAnomaly {
            j,
            gap: gap.abs(),
            tol: wood_tol,
        });
    }
    // (k - lambda)(k + lambda) avoids cancellation near the cutoff.
    let gap = (params.k - lambda) * (params.k + lambda);
    Ok(if gap > 0.0 {
        Complex64::new(gap.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-gap).sqrt())
    })
}

/// Orders `j` in `[-j_half, j_half]` with `lambda_j^2 < k^2`.
pub fn propagating_set(params: &ScatterParams, j_half: usize) -> Vec<i64> {
    let j_half = j_half as i64;
    (-j_half..=j_half)
        .filter(|&j| {
            let lambda = lambda_j(params, j);
            lambda * lambda < params.k * params.k
        })
        .collect()
}

/// `phi_j(x) = exp(i lambda_j x) / sqrt(L)`.
pub fn basis_phi(params: &ScatterParams, j: i64, x: f64) -> Complex64 {
    Complex64::cis(lambda_j(params, j) * x) / params.period.sqrt()
}

/// `u_0(x, y) = exp(i k (x cos(theta) - y sin(theta)))`.
pub fn incident_field(params: &ScatterParams, point: Point) -> Complex64 {
    let (x, y) = point;
    Complex64::cis(params.k * (x * params.theta.cos() - y * params.theta.sin()))
}

/// Cached mode data over the index range `[-j_half, j_half]`.
#[derive(Debug, Clone)]
pub struct ModeSystem {
    params: ScatterParams,
    j_half: usize,
    lambdas: Vec<f64>,
    mus: Vec<Complex64>,
    propagating: Vec<i64>,
    nu: Complex64,
    wood_tol: f64,
}

impl ModeSystem {
    /// Builds mode data for `|j| <= j_half` with the default Wood tolerance.
    pub fn new(params: ScatterParams, j_half: usize) -> Result<Self> {
        Self::with_wood_tol(params, j_half, params.default_wood_tol())
    }

    pub fn with_wood_tol(params: ScatterParams, j_half: usize, wood_tol: f64) -> Result<Self> {
        if !(wood_tol >= 0.0) {
            return Err(MrcError::InvalidParameter(format!(
                "wood_tol must be >= 0, got {wood_tol}"
            )));
        }
        let jh = j_half as i64;
        let lambdas: Vec<f64> = (-jh..=jh).map(|j| lambda_j(&params, j)).collect();
        let mus = (-jh..=jh)
            .map(|j| mu_j(&params, j, wood_tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params,
            j_half,
            lambdas,
            mus,
            propagating: propagating_set(&params, j_half),
            nu: quasiperiodicity_factor(&params),
            wood_tol,
        })
    }

    pub fn params(&self) -> &ScatterParams {
        &self.params
    }

    pub fn j_half(&self) -> usize {
        self.j_half
    }

    pub fn wood_tol(&self) -> f64 {
        self.wood_tol
    }

    pub fn nu(&self) -> Complex64 {
        self.nu
    }

    pub fn propagating(&self) -> &[i64] {
        &self.propagating
    }

    pub fn is_propagating(&self, j: i64) -> bool {
        self.propagating.contains(&j)
    }

    pub fn contains(&self, j: i64) -> bool {
        j.unsigned_abs() as usize <= self.j_half
    }

    /// Iterates the orders `-j_half..=j_half`.
    pub fn orders(&self) -> impl Iterator<Item = i64> + Clone {
        let jh = self.j_half as i64;
        -jh..=jh
    }

    fn slot(&self, j: i64) -> usize {
        assert!(self.contains(j), "order {j} outside mode range ±{}", self.j_half);
        (j + self.j_half as i64) as usize
    }

    pub fn lambda(&self, j: i64) -> f64 {
        self.lambdas[self.slot(j)]
    }

    pub fn mu(&self, j: i64) -> Complex64 {
        self.mus[self.slot(j)]
    }

    pub fn phi(&self, j: i64, x: f64) -> Complex64 {
        Complex64::cis(self.lambda(j) * x) / self.params.period.sqrt()
    }

    /// `phi_j(x) exp(i mu_j y)`: the outgoing Rayleigh mode of order `j`.
    pub fn radiating_mode(&self, j: i64, point: Point) -> Complex64 {
        let (x, y) = point;
        let mu = self.mu(j);
        self.phi(j, x) * (Complex64::i() * mu * y).exp()
    }

    pub fn incident(&self, point: Point) -> Complex64 {
        incident_field(&self.params, point)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn params(k: f64, theta: f64) -> ScatterParams {
        ScatterParams::new(k, PI, theta).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ScatterParams::new(0.0, PI, 1.0).is_err());
        assert!(ScatterParams::new(1.0, -1.0, 1.0).is_err());
        assert!(ScatterParams::new(1.0, PI, 0.0).is_err());
        assert!(ScatterParams::new(1.0, PI, 1.6).is_err());
        assert!(ScatterParams::new(1.0, PI, FRAC_PI_2).is_ok());
    }

    #[test]
    fn quasiperiodicity_factor_values() {
        assert!(close(
            quasiperiodicity_factor(&params(1.0, FRAC_PI_2)),
            Complex64::new(1.0, 0.0),
            1e-15
        ));
        // mpmath: exp(i pi cos(pi/4))
        assert!(close(
            quasiperiodicity_factor(&params(1.0, FRAC_PI_4)),
            Complex64::new(-0.605_699_867_078_813_4, 0.795_693_201_567_480_9),
            1e-14
        ));
        assert!(close(
            quasiperiodicity_factor(&params(2.0, PI / 3.0)),
            Complex64::new(-1.0, 0.0),
            1e-14
        ));
    }

    #[test]
    fn lambda_values() {
        assert!(lambda_j(&params(1.0, FRAC_PI_2), 0).abs() < 1e-15);
        assert!((lambda_j(&params(1.0, FRAC_PI_2), 1) - 2.0).abs() < 1e-14);
        assert!((lambda_j(&params(1.0, FRAC_PI_4), 0) - 0.707_106_78).abs() < 1e-8);
    }

    #[test]
    fn mu_values_and_branches() {
        let p = params(1.0, FRAC_PI_2);
        assert!(close(mu_j(&p, 0, 1e-10).unwrap(), Complex64::new(1.0, 0.0), 1e-15));
        assert!(close(
            mu_j(&p, 1, 1e-10).unwrap(),
            Complex64::new(0.0, 3f64.sqrt()),
            1e-14
        ));
        let p = params(1.0, FRAC_PI_4);
        assert!(close(
            mu_j(&p, 0, 1e-10).unwrap(),
            Complex64::new(FRAC_PI_4.sin(), 0.0),
            1e-14
        ));
    }

    #[test]
    fn wood_anomaly_is_detected() {
        // k = 2 at normal incidence with L = pi: lambda_1 = 2 = k.
        let p = params(2.0, FRAC_PI_2);
        match mu_j(&p, 1, p.default_wood_tol()) {
            Err(MrcError::WoodAnomaly { j: 1, .. }) => {}
            other => panic!("expected WoodAnomaly, got {other:?}"),
        }
        assert!(ModeSystem::new(p, 4).is_err());
    }

    #[test]
    fn propagating_sets() {
        assert_eq!(propagating_set(&params(1.0, FRAC_PI_2), 120), vec![0]);
        assert_eq!(propagating_set(&params(1.0, FRAC_PI_4), 120), vec![0]);
        assert_eq!(propagating_set(&params(0.1, FRAC_PI_2), 120), vec![0]);
        // k = 3 at normal incidence: lambda_j = 2j, so j = -1, 0, 1 propagate.
        assert_eq!(propagating_set(&params(3.0, FRAC_PI_2), 10), vec![-1, 0, 1]);
    }

    #[test]
    fn basis_phi_values() {
        let inv_sqrt_pi = 1.0 / PI.sqrt();
        assert!(close(
            basis_phi(&params(1.0, FRAC_PI_4), 0, 0.0),
            Complex64::new(inv_sqrt_pi, 0.0),
            1e-15
        ));
        assert!(close(
            basis_phi(&params(1.0, FRAC_PI_2), 1, FRAC_PI_2),
            Complex64::new(-inv_sqrt_pi, 0.0),
            1e-14
        ));
    }

    #[test]
    fn basis_is_discretely_orthonormal() {
        let p = params(1.0, FRAC_PI_4);
        let nq = 4096;
        let h = PI / nq as f64;
        let inner = |j: i64, m: i64| -> Complex64 {
            (0..nq)
                .map(|q| {
                    let x = q as f64 * h;
                    basis_phi(&p, j, x) * basis_phi(&p, m, x).conj()
                })
                .sum::<Complex64>()
                * h
        };
        assert!(inner(1, 2).norm() < 1e-10);
        assert!((inner(3, 3) - 1.0).norm() < 1e-12);
    }

    #[test]
    fn incident_field_values() {
        let p = params(1.0, FRAC_PI_4);
        assert!(close(incident_field(&p, (0.0, 0.0)), Complex64::new(1.0, 0.0), 1e-15));
        let p = params(1.0, FRAC_PI_2);
        assert!(close(
            incident_field(&p, (3.7, 1.0)),
            Complex64::new(0.540_302_305_868_139_7, -0.841_470_984_807_896_5),
            1e-14
        ));
    }

    #[test]
    fn radiating_mode_values() {
        let ms = ModeSystem::new(params(1.0, FRAC_PI_2), 120).unwrap();
        assert!(close(
            ms.radiating_mode(0, (0.0, 0.0)),
            Complex64::new(1.0 / PI.sqrt(), 0.0),
            1e-15
        ));
        // mpmath: exp(-2 sqrt 3) / sqrt(pi)
        assert!(close(
            ms.radiating_mode(1, (0.0, 2.0)),
            Complex64::new(0.017_659_762_046_239_845, 0.0),
            1e-15
        ));
    }

    #[test]
    fn evanescent_modes_decay_in_y() {
        let ms = ModeSystem::new(params(1.0, FRAC_PI_4), 10).unwrap();
        for j in ms.orders().filter(|&j| !ms.is_propagating(j)) {
            let mut prev = f64::INFINITY;
            for step in 0..20 {
                let m = ms.radiating_mode(j, (0.3, step as f64 * 0.25)).norm();
                assert!(m < prev);
                prev = m;
            }
        }
    }

    #[test]
    fn mode_system_invariants() {
        for theta in [FRAC_PI_4, PI / 3.0, FRAC_PI_2, 0.1] {
            let p = params(1.0, theta);
            let ms = ModeSystem::new(p, 120).unwrap();
            assert!((ms.nu().norm() - 1.0).abs() <= 1e-14);
            let mut count = 0;
            for j in ms.orders() {
                let (lambda, mu) = (ms.lambda(j), ms.mu(j));
                assert_eq!(lambda, lambda_j(&p, j));
                let lhs = mu * mu + lambda * lambda;
                assert!((lhs - 1.0).norm() <= 1e-12 * (lambda * lambda).max(1.0));
                assert!(mu.re >= 0.0 && mu.im >= 0.0);
                assert!((mu.re == 0.0) != (mu.im == 0.0));
                if lambda * lambda < 1.0 {
                    count += 1;
                    assert!(ms.is_propagating(j) && mu.re > 0.0);
                }
            }
            assert_eq!(count, ms.propagating().len());
        }
    }
}
