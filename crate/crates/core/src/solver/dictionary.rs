use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::lsq::LeastSquaresSystem;
use crate::error::{MrcError, Result};
use crate::greens::GreensConfig;
use crate::modes::{incident_field, ModeSystem, Point, ScatterParams};

/// Outgoing quasiperiodic functions used as least-squares columns.
#[derive(Debug, Clone)]
pub enum Dictionary {
    /// Columns `g(., xi_m)` for poles `xi_m` below the boundary.
    PoleGreens {
        poles: Vec<Point>,
        greens: GreensConfig,
    },
    /// Columns `phi_j(x) exp(i mu_j y)` for `j = -order..=order`.
    RayleighModes { order: usize, modes: ModeSystem },
}

impl Dictionary {
    pub fn poles(poles: Vec<Point>, greens: GreensConfig) -> Self {
        Dictionary::PoleGreens { poles, greens }
    }

    pub fn rayleigh(order: usize, modes: ModeSystem) -> Result<Self> {
        if order > modes.j_half() {
            return Err(MrcError::InvalidParameter(format!(
                "Rayleigh order {order} exceeds mode range ±{}",
                modes.j_half()
            )));
        }
        Ok(Dictionary::RayleighModes { order, modes })
    }

    pub fn column_count(&self) -> usize {
        match self {
            Dictionary::PoleGreens { poles, .. } => poles.len(),
            Dictionary::RayleighModes { order, .. } => 2 * order + 1,
        }
    }

    pub fn params(&self) -> &ScatterParams {
        match self {
            Dictionary::PoleGreens { greens, .. } => greens.params(),
            Dictionary::RayleighModes { modes, .. } => modes.params(),
        }
    }

    pub fn modes(&self) -> &ModeSystem {
        match self {
            Dictionary::PoleGreens { greens, .. } => greens.modes(),
            Dictionary::RayleighModes { modes, .. } => modes,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Dictionary::PoleGreens { poles, greens } => format!(
                "poles (M={}, b={}, j_max={})",
                poles.len(),
                greens.depth(),
                greens.j_max()
            ),
            Dictionary::RayleighModes { order, .. } => format!("rayleigh (p={order})"),
        }
    }

    /// Value of column `m` at `point`.
    pub fn column(&self, m: usize, point: Point) -> Result<Complex64> {
        match self {
            Dictionary::PoleGreens { poles, greens } => greens.greens_g(point, poles[m]),
            Dictionary::RayleighModes { order, modes } => {
                let j = m as i64 - *order as i64;
                Ok(modes.radiating_mode(j, point))
            }
        }
    }

    /// `sum_m c_m column_m(point)`.
    pub fn expand(&self, coefficients: &[Complex64], point: Point) -> Result<Complex64> {
        if coefficients.len() != self.column_count() {
            return Err(MrcError::InvalidParameter(format!(
                "{} coefficients for {} columns",
                coefficients.len(),
                self.column_count()
            )));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in coefficients.iter().enumerate() {
            if *c != Complex64::new(0.0, 0.0) {
                acc += c * self.column(m, point)?;
            }
        }
        Ok(acc)
    }
}

/// `A[i][m] = column_m(x_i)`, `b[i] = u_0(x_i)`.
pub fn assemble(
    nodes: &[Point],
    dictionary: &Dictionary,
    params: &ScatterParams,
) -> Result<LeastSquaresSystem> {
    let cols = dictionary.column_count();
    let rows: Vec<Vec<Complex64>> = nodes
        .par_iter()
        .map(|&node| {
            (0..cols)
                .map(|m| dictionary.column(m, node))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let matrix = DMatrix::from_fn(nodes.len(), cols, |i, m| rows[i][m]);
    let rhs = DVector::from_iterator(nodes.len(), nodes.iter().map(|&p| incident_field(params, p)));
    LeastSquaresSystem::new(matrix, rhs)
}

/// Rayleigh-mode system with columns ordered `j = -order..=order`.
pub fn assemble_rayleigh(
    nodes: &[Point],
    order: usize,
    modes: &ModeSystem,
) -> Result<LeastSquaresSystem> {
    let dictionary = Dictionary::rayleigh(order, modes.clone())?;
    assemble(nodes, &dictionary, modes.params())
}
