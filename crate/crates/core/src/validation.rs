//! Self-check suite run by `grating-mrc validate`, plus the finite-difference
//! probes it is built from.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::geometry::{Profile, ProfileKind};
use crate::greens::GreensConfig;
use crate::modes::{ModeSystem, Point, ScatterParams};
use crate::solver::{
    assemble, assemble_rayleigh, coefficient_vector, energy_balance, mrc_solve, solve_tsvd,
    MrcSolution, ScatterConfig,
};
use crate::MrcError;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

/// The three incidence angles of the table runs.
pub const TABLE_ANGLES: [f64; 3] = [FRAC_PI_4, PI / 3.0, FRAC_PI_2];

pub fn table_params(theta: f64) -> ScatterParams {
    ScatterParams::new(1.0, PI, theta).expect("table parameters are valid")
}

/// `|(Delta_h + k^2) f|` with the centered 5-point Laplacian.
pub fn helmholtz_residual<F>(f: F, point: Point, h: f64, k: f64) -> f64
where
    F: Fn(Point) -> Complex64,
{
    let (x, y) = point;
    let lap = (f((x + h, y)) + f((x - h, y)) + f((x, y + h)) + f((x, y - h)) - 4.0 * f(point))
        / (h * h);
    (lap + k * k * f(point)).norm()
}

/// Derivative jump `d/dy g_j(eta+) - d/dy g_j(eta-)` from second-order
/// one-sided differences at step `h`.
pub fn derivative_jump(greens: &GreensConfig, j: i64, eta: f64, h: f64) -> Complex64 {
    let g = |y: f64| greens.mode_kernel(j, y, eta);
    let above = (-3.0 * g(eta) + 4.0 * g(eta + h) - g(eta + 2.0 * h)) / (2.0 * h);
    let below = (3.0 * g(eta) - 4.0 * g(eta - h) + g(eta - 2.0 * h)) / (2.0 * h);
    above - below
}

/// Rate check: halving `h` reduces the error at least `ratio`-fold, unless the
/// finer error is already at the rounding floor.
pub fn converges(coarse: f64, fine: f64, ratio: f64, floor: f64) -> bool {
    fine <= floor || fine * ratio <= coarse
}

/// Deterministic pseudo-random sequence in `[0, 1)` (SplitMix64).
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

fn greens_for(theta: f64) -> GreensConfig {
    GreensConfig::new(table_params(theta), 1.2, 120).expect("table Green's config is valid")
}

fn check_wronskian() -> Check {
    let mut worst = 0.0f64;
    let mut ok = true;
    for theta in TABLE_ANGLES {
        let g = greens_for(theta);
        for j in -5..=5 {
            for eta in [-0.4, 0.3] {
                let e1 = (derivative_jump(&g, j, eta, 1e-3) + 1.0).norm();
                let e2 = (derivative_jump(&g, j, eta, 5e-4) + 1.0).norm();
                worst = worst.max(e1);
                ok &= e1 <= 1e-4 && converges(e1, e2, 3.5, 1e-10);
            }
        }
    }
    Check::new(
        "wronskian_jump",
        ok,
        format!("max |jump + 1| at h=1e-3: {worst:.3e}"),
    )
}

fn check_dirichlet_line() -> Check {
    let mut rng = SplitMix64::new(7);
    let mut worst = 0.0f64;
    for theta in TABLE_ANGLES {
        let g = greens_for(theta);
        for _ in 0..20 {
            let x = (rng.range(0.0, PI), -1.2);
            let xi = (rng.range(0.0, PI), rng.range(-1.1, 1.0));
            worst = worst.max(g.greens_g(x, xi).map(|v| v.norm()).unwrap_or(f64::INFINITY));
        }
    }
    Check::new(
        "dirichlet_line",
        worst <= 1e-12,
        format!("max |g| on y=-b: {worst:.3e}"),
    )
}

fn check_quasiperiodicity() -> Check {
    let mut rng = SplitMix64::new(11);
    let mut worst = 0.0f64;
    for theta in TABLE_ANGLES {
        let g = greens_for(theta);
        let nu = g.modes().nu();
        for _ in 0..20 {
            let x = (rng.range(0.0, PI), rng.range(-1.0, 2.0));
            let xi = (rng.range(0.0, PI), rng.range(-1.0, 1.0));
            if (x.1 - xi.1).abs() < 0.05 {
                continue;
            }
            let base = g.greens_g(x, xi).unwrap();
            let shifted_x = g.greens_g((x.0 + PI, x.1), xi).unwrap();
            let shifted_xi = g.greens_g(x, (xi.0 + PI, xi.1)).unwrap();
            let scale = base.norm().max(1e-300);
            worst = worst
                .max((shifted_x - nu * base).norm() / scale)
                .max((shifted_xi - nu.conj() * base).norm() / scale);
        }
    }
    Check::new(
        "quasiperiodicity",
        worst <= 1e-10,
        format!("max relative deviation: {worst:.3e}"),
    )
}

fn check_helmholtz() -> Check {
    let mut rng = SplitMix64::new(13);
    let mut ok = true;
    let mut worst_ratio = f64::INFINITY;
    let (h1, h2) = (1e-2, 5e-3);
    let mut record = |coarse: f64, fine: f64| {
        let pass = converges(coarse, fine, 3.5, 1e-9);
        ok &= pass;
        if fine > 1e-9 {
            worst_ratio = worst_ratio.min(coarse / fine);
        }
    };
    for theta in TABLE_ANGLES {
        let g = greens_for(theta);
        let modes = g.modes().clone();
        for _ in 0..6 {
            let xi = (rng.range(0.0, PI), rng.range(-1.0, 0.5));
            let x = (rng.range(0.0, PI), xi.1 + rng.range(0.3, 1.5));
            let f = |p: Point| g.greens_g(p, xi).unwrap();
            record(
                helmholtz_residual(f, x, h1, 1.0),
                helmholtz_residual(f, x, h2, 1.0),
            );
        }
        for j in [-3, -1, 0, 2] {
            let p = (rng.range(0.0, PI), rng.range(0.0, 2.0));
            let f = |q: Point| modes.radiating_mode(j, q);
            record(
                helmholtz_residual(f, p, h1, 1.0),
                helmholtz_residual(f, p, h2, 1.0),
            );
        }
        let p = (rng.range(0.0, PI), rng.range(-1.0, 2.0));
        let f = |q: Point| modes.incident(q);
        record(
            helmholtz_residual(f, p, h1, 1.0),
            helmholtz_residual(f, p, h2, 1.0),
        );
    }
    Check::new(
        "helmholtz_fd",
        ok,
        format!("min residual reduction on halving h: {worst_ratio:.2}x"),
    )
}

fn flat_solution(theta: f64) -> crate::Result<MrcSolution> {
    let profile = Profile::new(ProfileKind::Flat(0.0), PI)?;
    let mut cfg = ScatterConfig::new(profile, table_params(theta));
    cfg.nodes = 128;
    cfg.poles = 32;
    cfg.epsilon = 1e-3;
    cfg.max_refinements = 1;
    mrc_solve(&cfg)
}

fn check_flat_oracle() -> Check {
    let mut ok = true;
    let mut details = Vec::new();
    for theta in TABLE_ANGLES {
        let sol = match flat_solution(theta) {
            Ok(s) => s,
            Err(e) => {
                ok = false;
                details.push(format!("theta={theta:.4}: {e}"));
                continue;
            }
        };
        let r = sol.r_min;
        let b = sol
            .rayleigh_coefficients(sol.default_matching_height(), &[-1, 0, 1], 1024)
            .unwrap();
        let b0_err = (b[&0] + 1.0).norm();
        let side = b[&-1].norm().max(b[&1].norm());
        let balance = energy_balance(&b, sol.modes());
        let modes = sol.modes().clone();
        let rayleigh = assemble_rayleigh(&sol.nodes, 0, &modes)
            .and_then(|sys| solve_tsvd(&sys, 1e-8))
            .map(|s| s.r_min)
            .unwrap_or(f64::INFINITY);
        let pass = r <= 1e-3
            && b0_err <= 10.0 * r
            && side <= 10.0 * r
            && (balance - 1.0).abs() <= 20.0 * r
            && rayleigh <= 1e-10;
        ok &= pass;
        details.push(format!(
            "theta={theta:.4}: r_min={r:.2e} |B0+1|={b0_err:.1e} |B±1|={side:.1e} E={balance:.6} m(0)={rayleigh:.1e}"
        ));
    }
    Check::new("flat_profile_oracle", ok, details.join("; "))
}

fn rayleigh_residuals(profile: ProfileKind, orders: std::ops::RangeInclusive<usize>) -> Vec<f64> {
    let profile = Profile::new(profile, PI).unwrap();
    let nodes = profile.nodes(256).unwrap();
    let modes = ModeSystem::new(table_params(FRAC_PI_4), 120).unwrap();
    orders
        .map(|p| {
            let sys = assemble_rayleigh(&nodes, p, &modes).unwrap();
            solve_tsvd(&sys, f64::MIN_POSITIVE).unwrap().r_min
        })
        .collect()
}

fn check_tsvd_monotonicity() -> Check {
    let mut ok = true;
    let mut detail = Vec::new();
    for kind in [ProfileKind::Flat(0.0), ProfileKind::Sine2] {
        let label = kind.label();
        let m = rayleigh_residuals(kind, 0..=7);
        ok &= m.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        detail.push(format!(
            "{label}: m(0)={:.2e} m(7)={:.2e}",
            m[0],
            m[m.len() - 1]
        ));
    }
    Check::new("tsvd_monotonicity", ok, detail.join("; "))
}

fn reference_solutions() -> Vec<(ProfileKind, f64, crate::Result<MrcSolution>)> {
    let jobs: Vec<(ProfileKind, f64)> = [
        ProfileKind::Sine2,
        ProfileKind::Sine02,
        ProfileKind::Triangle,
        ProfileKind::Sawtooth,
    ]
    .into_iter()
    .flat_map(|k| TABLE_ANGLES.map(|t| (k.clone(), t)))
    .collect();
    jobs.into_par_iter()
        .map(|(kind, theta)| {
            let profile = Profile::new(kind.clone(), PI).unwrap();
            let mut cfg = ScatterConfig::new(profile, table_params(theta));
            cfg.max_refinements = 1;
            let sol = match mrc_solve(&cfg) {
                Err(MrcError::NotConverged { best, .. }) => Ok(*best),
                other => other,
            };
            (kind, theta, sol)
        })
        .collect()
}

fn check_reference_profiles() -> Vec<Check> {
    let mut consistency_ok = true;
    let mut worst_consistency = 0.0f64;
    let mut balance_ok = true;
    let mut balances = Vec::new();
    for (kind, theta, sol) in reference_solutions() {
        let Ok(sol) = sol else {
            consistency_ok = false;
            balance_ok = false;
            continue;
        };
        let sys = assemble(&sol.nodes, &sol.dictionary, &sol.params).unwrap();
        let direct = sys.residual_norm(&coefficient_vector(&sol));
        let dev = (direct - sol.r_min).abs();
        worst_consistency = worst_consistency.max(dev);
        consistency_ok &= dev <= 1e-10;
        let e = sol
            .propagating_amplitudes()
            .map(|b| energy_balance(&b, sol.modes()))
            .unwrap_or(f64::NAN);
        balance_ok &= (0.0..=1.05).contains(&e);
        balances.push(format!("{}@{:.3}={e:.4}", kind.label(), theta));
    }
    vec![
        Check::new(
            "tsvd_residual_consistency",
            consistency_ok,
            format!("max |r_min - ||b+Ac|||: {worst_consistency:.2e}"),
        ),
        Check::new("energy_balance", balance_ok, balances.join(" ")),
    ]
}

/// Runs every check; order is fixed.
pub fn run_suite() -> Vec<Check> {
    let mut checks = vec![
        check_wronskian(),
        check_dirichlet_line(),
        check_quasiperiodicity(),
        check_helmholtz(),
        check_flat_oracle(),
        check_tsvd_monotonicity(),
    ];
    checks.extend(check_reference_profiles());
    checks
}
