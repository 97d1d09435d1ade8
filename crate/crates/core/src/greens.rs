//! Quasiperiodic Green's function of the half-plane `y > -b` with a Dirichlet
//! condition on `y = -b` and outgoing behaviour as `y -> +inf`, evaluated as a
//! truncated sum over Bloch orders.
//!
//! Each order contributes `phi_j(x1) conj(phi_j(xi1)) g_j(x2, xi2)` where the
//! vertical kernel `g_j = v_j(max) psi_j(min)` is built from the outgoing
//! solution `v_j(t) = exp(i mu_j t)` and the solution `psi_j` vanishing at
//! `-b`, normalized so that their Wronskian is one.

use num_complex::Complex64;

use crate::error::{MrcError, Result};
use crate::modes::{ModeSystem, Point, ScatterParams};

/// Default truncation order of the mode sum.
pub const DEFAULT_J_MAX: usize = 120;

/// Default depth of the artificial Dirichlet line.
pub const DEFAULT_DEPTH: f64 = 1.2;

/// Default minimal source/target separation, as a fraction of the period.
pub const DEFAULT_MIN_SEPARATION_REL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct GreensConfig {
    modes: ModeSystem,
    depth: f64,
    j_max: usize,
    min_separation: f64,
}

impl GreensConfig {
    pub fn new(params: ScatterParams, depth: f64, j_max: usize) -> Result<Self> {
        let modes = ModeSystem::new(params, j_max)?;
        Self::from_modes(modes, depth, j_max)
    }

    /// Uses an existing mode system; its index range must cover `j_max`.
    pub fn from_modes(modes: ModeSystem, depth: f64, j_max: usize) -> Result<Self> {
        if !(depth.is_finite() && depth > 0.0) {
            return Err(MrcError::InvalidParameter(format!(
                "depth b must be > 0, got {depth}"
            )));
        }
        if j_max < 1 {
            return Err(MrcError::InvalidParameter("j_max must be >= 1".into()));
        }
        if modes.j_half() < j_max {
            return Err(MrcError::InvalidParameter(format!(
                "mode range ±{} does not cover j_max {j_max}",
                modes.j_half()
            )));
        }
        let min_separation = DEFAULT_MIN_SEPARATION_REL * modes.params().period();
        Ok(Self {
            modes,
            depth,
            j_max,
            min_separation,
        })
    }

    pub fn with_min_separation(mut self, min_separation: f64) -> Self {
        self.min_separation = min_separation;
        self
    }

    pub fn modes(&self) -> &ModeSystem {
        &self.modes
    }

    pub fn params(&self) -> &ScatterParams {
        self.modes.params()
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    /// `psi_j(y) = mu_j^{-1} exp(i mu_j b) sin(mu_j (y + b))`.
    pub fn psi(&self, j: i64, y: f64) -> Complex64 {
        let mu = self.modes.mu(j);
        let b = self.depth;
        if mu.im == 0.0 {
            let m = mu.re;
            Complex64::cis(m * b) * ((m * (y + b)).sin() / m)
        } else {
            // mu = i kappa: exp(-kappa b) sinh(kappa (y + b)) / kappa, written
            // without the overflowing sinh.
            let kappa = mu.im;
            Complex64::new(
                ((kappa * y).exp() - (-kappa * (y + 2.0 * b)).exp()) / (2.0 * kappa),
                0.0,
            )
        }
    }

    /// `v_j(t) = exp(i mu_j t)`.
    pub fn outgoing(&self, j: i64, t: f64) -> Complex64 {
        (Complex64::i() * self.modes.mu(j) * t).exp()
    }

    /// Vertical kernel `g_j(y, eta) = v_j(max(y, eta)) psi_j(min(y, eta))`.
    pub fn mode_kernel(&self, j: i64, y: f64, eta: f64) -> Complex64 {
        let (hi, lo) = if y >= eta { (y, eta) } else { (eta, y) };
        vertical_kernel(self.modes.mu(j), hi, lo, self.depth)
    }

    /// Evaluates `g(x, xi)` summed over `|j| <= j_max`.
    pub fn greens_g(&self, x: Point, xi: Point) -> Result<Complex64> {
        self.check_pair(x, xi)?;
        Ok(self.sum_unchecked(x, xi, self.j_max))
    }

    /// Same as [`greens_g`](Self::greens_g) with an explicit truncation order,
    /// which must not exceed the cached mode range.
    pub fn greens_g_truncated(&self, x: Point, xi: Point, j_max: usize) -> Result<Complex64> {
        if j_max > self.modes.j_half() {
            return Err(MrcError::InvalidParameter(format!(
                "truncation {j_max} exceeds mode range ±{}",
                self.modes.j_half()
            )));
        }
        self.check_pair(x, xi)?;
        Ok(self.sum_unchecked(x, xi, j_max))
    }

    fn check_pair(&self, x: Point, xi: Point) -> Result<()> {
        let b = self.depth;
        // Points on the Dirichlet line itself are admissible.
        let floor = -b - 1e-12 * b.max(1.0);
        if x.1 < floor || xi.1 < floor {
            return Err(MrcError::InvalidParameter(format!(
                "points must satisfy y >= -b = {}: got y = {} and eta = {}",
                -b, x.1, xi.1
            )));
        }
        let period = self.params().period();
        let dx = (x.0 - xi.0).rem_euclid(period);
        let dx = dx.min(period - dx);
        let dy = x.1 - xi.1;
        if dx.hypot(dy) < self.min_separation {
            return Err(MrcError::CoincidentPoints {
                x1: x.0,
                x2: x.1,
                xi1: xi.0,
                xi2: xi.1,
                min_sep: self.min_separation,
            });
        }
        Ok(())
    }

    fn sum_unchecked(&self, x: Point, xi: Point, j_max: usize) -> Complex64 {
        let dx = x.0 - xi.0;
        let (hi, lo) = if x.1 >= xi.1 { (x.1, xi.1) } else { (xi.1, x.1) };
        let term = |j: i64| {
            Complex64::cis(self.modes.lambda(j) * dx)
                * vertical_kernel(self.modes.mu(j), hi, lo, self.depth)
        };
        let mut acc = term(0);
        for j in 1..=j_max as i64 {
            acc += term(j) + term(-j);
        }
        acc / self.params().period()
    }
}

/// `exp(i mu hi) psi(lo)` with `hi >= lo >= -b`, combined so that only
/// non-positive real exponents appear for evanescent orders:
/// `(i / 2 mu) [exp(i mu (hi - lo)) - exp(i mu (hi + lo + 2b))]`.
fn vertical_kernel(mu: Complex64, hi: f64, lo: f64, depth: f64) -> Complex64 {
    let t = lo + depth;
    if mu.im == 0.0 {
        let m = mu.re;
        Complex64::cis(m * (hi + depth)) * ((m * t).sin() / m)
    } else {
        let kappa = mu.im;
        // exp(-kappa (hi - lo)) * (1 - exp(-2 kappa t)) / (2 kappa)
        let value = -(-kappa * (hi - lo)).exp() * (-2.0 * kappa * t).exp_m1() / (2.0 * kappa);
        Complex64::new(value, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn config(theta: f64) -> GreensConfig {
        GreensConfig::new(ScatterParams::new(1.0, PI, theta).unwrap(), 1.2, 120).unwrap()
    }

    /// Textbook form of the kernel, evaluated with complex sin; used only where
    /// it does not overflow.
    fn naive_kernel(mu: Complex64, y: f64, eta: f64, b: f64) -> Complex64 {
        let i = Complex64::i();
        let psi = |t: f64| (i * mu * b).exp() * (mu * (t + b)).sin() / mu;
        let v = |t: f64| (i * mu * t).exp();
        if y > eta {
            v(y) * psi(eta)
        } else {
            v(eta) * psi(y)
        }
    }

    #[test]
    fn psi_vanishes_on_dirichlet_line() {
        let g = config(FRAC_PI_4);
        for j in -120..=120 {
            assert_eq!(g.psi(j, -1.2), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn psi_reference_value() {
        let g = config(FRAC_PI_2);
        // mpmath: exp(1.2 i) sin(1.2)
        let want = Complex64::new(0.337_731_590_275_575_5, 0.868_696_857_770_622_7);
        assert!((g.psi(0, 0.0) - want).norm() < 1e-14);
    }

    #[test]
    fn psi_solves_its_ode() {
        let g = config(FRAC_PI_4);
        for j in [-3, -1, 0, 1, 2, 5] {
            let lambda = g.modes().lambda(j);
            let residual = |h: f64| {
                let y = 0.37;
                let d2 = (g.psi(j, y + h) - 2.0 * g.psi(j, y) + g.psi(j, y - h)) / (h * h);
                (d2 + (1.0 - lambda * lambda) * g.psi(j, y)).norm()
            };
            let (r1, r2) = (residual(1e-2), residual(5e-3));
            assert!(r2 < r1 / 3.5, "j={j}: {r1:e} -> {r2:e}");
        }
    }

    #[test]
    fn kernel_matches_naive_form_at_moderate_orders() {
        let g = config(PI / 3.0);
        for j in -6..=6 {
            for (y, eta) in [(0.3, -0.5), (-0.9, 0.1), (1.4, 1.1), (0.0, 0.0)] {
                let a = g.mode_kernel(j, y, eta);
                let b = naive_kernel(g.modes().mu(j), y, eta, 1.2);
                assert!((a - b).norm() <= 1e-13 * (1.0 + b.norm()), "j={j}");
            }
        }
    }

    #[test]
    fn kernel_is_symmetric_and_finite_at_high_orders() {
        let g = config(FRAC_PI_4);
        for j in [-120, -60, 0, 60, 120] {
            assert_eq!(g.mode_kernel(j, 0.3, -0.5), g.mode_kernel(j, -0.5, 0.3));
            assert!(g.mode_kernel(j, 3.0, 2.9).norm().is_finite());
        }
    }

    #[test]
    fn kernel_reference_value() {
        let g = config(FRAC_PI_2);
        // mpmath: exp(2i) exp(1.2i) sin(1.2)
        let want = Complex64::new(-0.930_449_750_357_598_8, -0.054_406_983_284_361_31);
        assert!((g.mode_kernel(0, 2.0, 0.0) - want).norm() < 1e-14);
    }

    #[test]
    fn rejects_coincident_and_subsurface_points() {
        let g = config(FRAC_PI_4);
        assert!(matches!(
            g.greens_g((0.5, 0.2), (0.5, 0.2)),
            Err(MrcError::CoincidentPoints { .. })
        ));
        // Periodic image of the source.
        assert!(matches!(
            g.greens_g((0.5 + PI, 0.2), (0.5, 0.2)),
            Err(MrcError::CoincidentPoints { .. })
        ));
        assert!(g.greens_g((0.5, -1.3), (0.1, 0.2)).is_err());
        assert!(g.greens_g((0.5, -1.2), (0.1, 0.2)).is_ok());
    }

    #[test]
    fn rejects_bad_config() {
        let p = ScatterParams::new(1.0, PI, FRAC_PI_4).unwrap();
        assert!(GreensConfig::new(p, 0.0, 120).is_err());
        assert!(GreensConfig::new(p, 1.2, 0).is_err());
        let modes = ModeSystem::new(p, 10).unwrap();
        assert!(GreensConfig::from_modes(modes, 1.2, 20).is_err());
    }
}
