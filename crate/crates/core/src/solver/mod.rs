//! Least-squares fitting of the incident trace by outgoing solutions,
//! refinement, field reconstruction and Rayleigh amplitudes.

mod dictionary;
mod lsq;

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

pub use dictionary::{assemble, assemble_rayleigh, Dictionary};
pub use lsq::{solve_tsvd, LeastSquaresSystem, TsvdSolution};

use crate::error::{MrcError, Result};
use crate::geometry::{arclength_weights, boundary_nodes, Discretization, Profile};
use crate::greens::{GreensConfig, DEFAULT_DEPTH, DEFAULT_J_MAX};
use crate::modes::{ModeSystem, Point, ScatterParams};

pub const DEFAULT_NODES: usize = 256;
pub const DEFAULT_POLES: usize = 64;
pub const DEFAULT_W_MIN: f64 = 1e-8;
pub const DEFAULT_EPSILON: f64 = 0.05;
pub const DEFAULT_MAX_REFINEMENTS: usize = 3;
pub const DEFAULT_QUADRATURE_POINTS: usize = 1024;
/// Matching height above the highest boundary node for Rayleigh amplitudes.
pub const DEFAULT_MATCH_CLEARANCE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DictionaryKind {
    Poles,
    Rayleigh,
}

/// Everything needed for one solve.
#[derive(Debug, Clone)]
pub struct ScatterConfig {
    pub profile: Profile,
    pub params: ScatterParams,
    pub nodes: usize,
    pub poles: usize,
    pub depth: f64,
    pub j_max: usize,
    pub w_min: f64,
    pub epsilon: f64,
    /// Total number of passes, each doubling `N` and `M` (or `p`).
    pub max_refinements: usize,
    /// Overrides the profile's pole offset.
    pub pole_offset: Option<(f64, f64)>,
    pub dictionary: DictionaryKind,
    /// Rayleigh order `p` when `dictionary` is `Rayleigh`.
    pub order: usize,
    pub arclength_weights: bool,
    pub wood_tol: Option<f64>,
    pub min_separation: Option<f64>,
}

impl ScatterConfig {
    /// Pole dictionary with `N = 256`, `M = 64`, `w_min = 1e-8`, `b = 1.2`,
    /// `|j| <= 120`.
    pub fn new(profile: Profile, params: ScatterParams) -> Self {
        Self {
            profile,
            params,
            nodes: DEFAULT_NODES,
            poles: DEFAULT_POLES,
            depth: DEFAULT_DEPTH,
            j_max: DEFAULT_J_MAX,
            w_min: DEFAULT_W_MIN,
            epsilon: DEFAULT_EPSILON,
            max_refinements: DEFAULT_MAX_REFINEMENTS,
            pole_offset: None,
            dictionary: DictionaryKind::Poles,
            order: 0,
            arclength_weights: false,
            wood_tol: None,
            min_separation: None,
        }
    }

    fn mode_system(&self, j_half: usize) -> Result<ModeSystem> {
        let tol = self.wood_tol.unwrap_or_else(|| self.params.default_wood_tol());
        ModeSystem::with_wood_tol(self.params, j_half, tol)
    }
}

/// One pass of the refinement loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassRecord {
    pub nodes: usize,
    pub columns: usize,
    pub r_min: f64,
    pub discarded: usize,
}

#[derive(Debug, Clone)]
pub struct MrcSolution {
    pub dictionary: Dictionary,
    pub coefficients: Vec<Complex64>,
    pub r_min: f64,
    pub history: Vec<PassRecord>,
    pub params: ScatterParams,
    /// Boundary nodes of the pass this solution came from.
    pub nodes: Vec<Point>,
    pub discarded: usize,
    pub singular_values: Vec<f64>,
    pub flagged_poles: Vec<usize>,
}

impl MrcSolution {
    /// Scattered field `v(point) = sum_m c_m column_m(point)`.
    pub fn evaluate_field(&self, point: Point) -> Result<Complex64> {
        self.dictionary.expand(&self.coefficients, point)
    }

    /// Total field `u_0 + v`.
    pub fn total_field(&self, point: Point) -> Result<Complex64> {
        Ok(self.dictionary.modes().incident(point) + self.evaluate_field(point)?)
    }

    pub fn modes(&self) -> &ModeSystem {
        self.dictionary.modes()
    }

    /// Height used by default for Rayleigh amplitude extraction.
    pub fn default_matching_height(&self) -> f64 {
        let top = self
            .nodes
            .iter()
            .map(|p| p.1)
            .fold(f64::NEG_INFINITY, f64::max);
        top + DEFAULT_MATCH_CLEARANCE
    }

    /// Plane-wave amplitudes `B_j` of `exp(i lambda_j x) exp(i mu_j y)` in the
    /// outgoing expansion of `v`, from a `quadrature`-point trapezoid rule on
    /// the line `y = height`.
    pub fn rayleigh_coefficients(
        &self,
        height: f64,
        orders: &[i64],
        quadrature: usize,
    ) -> Result<BTreeMap<i64, Complex64>> {
        let modes = self.modes();
        if let Some(&j) = orders.iter().find(|&&j| !modes.contains(j)) {
            return Err(MrcError::InvalidParameter(format!(
                "order {j} outside mode range ±{}",
                modes.j_half()
            )));
        }
        if quadrature == 0 {
            return Err(MrcError::InvalidParameter("quadrature needs points".into()));
        }
        let top = self.default_matching_height() - DEFAULT_MATCH_CLEARANCE;
        if !(height > top) {
            return Err(MrcError::InvalidParameter(format!(
                "matching height {height} must exceed the boundary maximum {top}"
            )));
        }
        let period = self.params.period();
        let h = period / quadrature as f64;
        let samples: Vec<(f64, Complex64)> = (0..quadrature)
            .into_par_iter()
            .map(|q| {
                let x = q as f64 * h;
                self.evaluate_field((x, height)).map(|v| (x, v))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(orders
            .iter()
            .map(|&j| {
                let lambda = modes.lambda(j);
                let sum: Complex64 = samples
                    .iter()
                    .map(|&(x, v)| v * Complex64::cis(-lambda * x))
                    .sum();
                let phase = (-Complex64::i() * modes.mu(j) * height).exp();
                (j, phase * sum / quadrature as f64)
            })
            .collect())
    }

    /// Amplitudes of all propagating orders at the default height.
    pub fn propagating_amplitudes(&self) -> Result<BTreeMap<i64, Complex64>> {
        let orders = self.modes().propagating().to_vec();
        self.rayleigh_coefficients(
            self.default_matching_height(),
            &orders,
            DEFAULT_QUADRATURE_POINTS,
        )
    }
}

/// Efficiency of one propagating order: `mu_j |B_j|^2 / (k sin theta)`.
pub fn efficiency(amplitude: Complex64, j: i64, modes: &ModeSystem) -> f64 {
    let p = modes.params();
    modes.mu(j).re * amplitude.norm_sqr() / (p.k() * p.theta().sin())
}

/// Sum of efficiencies over the propagating orders present in `amplitudes`;
/// one for an exact solution of the lossless problem.
pub fn energy_balance(amplitudes: &BTreeMap<i64, Complex64>, modes: &ModeSystem) -> f64 {
    modes
        .propagating()
        .iter()
        .filter_map(|j| amplitudes.get(j).map(|b| efficiency(*b, *j, modes)))
        .sum()
}

/// Assembles and solves one pass for the given discretization sizes.
fn solve_pass(config: &ScatterConfig, nodes: usize, columns: usize) -> Result<MrcSolution> {
    let (dictionary, node_points, flagged) = match config.dictionary {
        DictionaryKind::Poles => {
            let disc = Discretization::generate(
                &config.profile,
                nodes,
                columns,
                config.depth,
                config.pole_offset,
            )?;
            let mut greens =
                GreensConfig::from_modes(config.mode_system(config.j_max)?, config.depth, config.j_max)?;
            if let Some(sep) = config.min_separation {
                greens = greens.with_min_separation(sep);
            }
            (Dictionary::poles(disc.poles, greens), disc.nodes, disc.flagged_poles)
        }
        DictionaryKind::Rayleigh => {
            let node_points = boundary_nodes(&config.profile, nodes, config.depth)?;
            let modes = config.mode_system(columns.max(config.j_max))?;
            (Dictionary::rayleigh(columns, modes)?, node_points, Vec::new())
        }
    };
    let mut system = assemble(&node_points, &dictionary, &config.params)?;
    if config.arclength_weights {
        system = system.with_weights(arclength_weights(&node_points))?;
    }
    let tsvd = solve_tsvd(&system, config.w_min)?;
    Ok(MrcSolution {
        dictionary,
        coefficients: tsvd.coefficients.iter().copied().collect(),
        r_min: tsvd.r_min,
        history: Vec::new(),
        params: config.params,
        nodes: node_points,
        discarded: tsvd.discarded,
        singular_values: tsvd.singular_values,
        flagged_poles: flagged,
    })
}

/// Runs the fit, doubling the discretization until `r_min <= epsilon` or the
/// pass budget is spent. On failure the best pass is returned inside
/// [`MrcError::NotConverged`].
pub fn mrc_solve(config: &ScatterConfig) -> Result<MrcSolution> {
    if config.max_refinements == 0 {
        return Err(MrcError::InvalidParameter(
            "max_refinements must be >= 1".into(),
        ));
    }
    if !(config.epsilon >= 0.0) {
        return Err(MrcError::InvalidParameter(format!(
            "epsilon must be >= 0, got {}",
            config.epsilon
        )));
    }
    let mut nodes = config.nodes;
    let mut columns = match config.dictionary {
        DictionaryKind::Poles => config.poles,
        DictionaryKind::Rayleigh => config.order,
    };
    let mut history = Vec::new();
    let mut best: Option<MrcSolution> = None;
    for pass in 1..=config.max_refinements {
        let solution = solve_pass(config, nodes, columns)?;
        history.push(PassRecord {
            nodes,
            columns: solution.dictionary.column_count(),
            r_min: solution.r_min,
            discarded: solution.discarded,
        });
        let converged = solution.r_min <= config.epsilon;
        if best.as_ref().is_none_or(|b| solution.r_min < b.r_min) {
            best = Some(solution);
        }
        if converged {
            break;
        }
        if pass < config.max_refinements {
            nodes *= 2;
            columns = match config.dictionary {
                DictionaryKind::Poles => columns * 2,
                DictionaryKind::Rayleigh => (columns * 2).max(1),
            };
        }
    }
    let mut best = best.expect("at least one pass");
    best.history = history;
    if best.r_min <= config.epsilon {
        Ok(best)
    } else {
        Err(MrcError::NotConverged {
            r_min: best.r_min,
            epsilon: config.epsilon,
            passes: best.history.len(),
            best: Box::new(best),
        })
    }
}

/// Convenience: coefficients as an nalgebra vector.
pub fn coefficient_vector(solution: &MrcSolution) -> DVector<Complex64> {
    DVector::from_column_slice(&solution.coefficients)
}
