//! `grating-mrc` command-line interface.
//!
//! Exit codes: 0 success, 1 usage/config error (or a failed validation
//! check), 2 non-convergence.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::{ProfileSelector, RunConfig};
use crate::error::{MrcError, Result};
use crate::format::{angle, num};
use crate::solver::{efficiency, energy_balance, mrc_solve, MrcSolution};
use crate::validation;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

/// Residuals reported for the twelve reference runs (`L = pi`, `k = 1`).
pub const REFERENCE_RESIDUALS: [(&str, &str, f64); 12] = [
    ("I", "pi/4", 0.000424),
    ("I", "pi/3", 0.000407),
    ("I", "pi/2", 0.000371),
    ("II", "pi/4", 0.001491),
    ("II", "pi/3", 0.001815),
    ("II", "pi/2", 0.002089),
    ("III", "pi/4", 0.009623),
    ("III", "pi/3", 0.011903),
    ("III", "pi/2", 0.013828),
    ("IV", "pi/4", 0.014398),
    ("IV", "pi/3", 0.017648),
    ("IV", "pi/2", 0.020451),
];

#[derive(Debug, Parser)]
#[command(
    name = "grating-mrc",
    version,
    about = "Plane-wave scattering by Dirichlet periodic gratings"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one configuration and print a report
    Solve(RunArgs),
    /// Rerun the twelve reference configurations and print a CSV table
    Table(RunArgs),
    /// Sample the scattered and total field on a grid as CSV
    Field {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Rayleigh amplitudes and efficiencies of the propagating orders
    Efficiencies {
        #[command(flatten)]
        run: RunArgs,
        /// Matching height (default: highest node + 0.5)
        #[arg(long)]
        height: Option<f64>,
    },
    /// Run the invariant suite
    Validate {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// key = value configuration file; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// I, II, III, IV, flat or file:PATH (CSV with header x,y)
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long = "flat-height")]
    pub flat_height: Option<String>,
    /// Incidence angle in radians; pi/4, pi/3, pi/2 accepted
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub period: Option<String>,
    /// Boundary node count N
    #[arg(long)]
    pub nodes: Option<String>,
    /// Pole count M
    #[arg(long)]
    pub poles: Option<String>,
    /// Depth b of the Dirichlet line y = -b
    #[arg(long)]
    pub depth: Option<String>,
    /// Relative singular-value cutoff
    #[arg(long)]
    pub wmin: Option<String>,
    #[arg(long)]
    pub jmax: Option<String>,
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long = "max-refinements")]
    pub max_refinements: Option<String>,
    /// Pole offset `dy` or `dx,dy`
    #[arg(long = "pole-offset", allow_hyphen_values = true)]
    pub pole_offset: Option<String>,
    /// poles | rayleigh
    #[arg(long)]
    pub dictionary: Option<String>,
    /// Rayleigh order p
    #[arg(long)]
    pub order: Option<String>,
    #[arg(long = "arclength-weights")]
    pub arclength_weights: bool,
    #[arg(long)]
    pub quadrature: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        let flags = [
            ("profile", &self.profile),
            ("flat_height", &self.flat_height),
            ("theta", &self.theta),
            ("k", &self.k),
            ("period", &self.period),
            ("nodes", &self.nodes),
            ("poles", &self.poles),
            ("depth", &self.depth),
            ("wmin", &self.wmin),
            ("jmax", &self.jmax),
            ("epsilon", &self.epsilon),
            ("max_refinements", &self.max_refinements),
            ("pole_offset", &self.pole_offset),
            ("dictionary", &self.dictionary),
            ("order", &self.order),
            ("quadrature", &self.quadrature),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if self.arclength_weights {
            cfg.arclength_weights = true;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 41)]
    pub nx: usize,
    #[arg(long, default_value_t = 41)]
    pub ny: usize,
    #[arg(long = "x-min", allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long = "x-max", allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    #[arg(long = "y-min", allow_hyphen_values = true)]
    pub y_min: Option<f64>,
    #[arg(long = "y-max", allow_hyphen_values = true)]
    pub y_max: Option<f64>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = write!(stderr, "{e}");
            return code;
        }
    };
    match dispatch(&cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn open_out<'a>(
    out: &Option<PathBuf>,
    stdout: &'a mut dyn Write,
) -> Result<Box<dyn Write + 'a>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(stdout),
    })
}

fn dispatch(command: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Solve(args) => {
            let cfg = args.resolve()?;
            let (solution, converged) = solve_accepting_best(&cfg)?;
            let mut out = open_out(&args.out, stdout)?;
            write_report(&mut out, &cfg, &solution, converged)?;
            out.flush()?;
            if converged {
                Ok(EXIT_OK)
            } else {
                writeln!(
                    stderr,
                    "warning: r_min {} above epsilon {}",
                    num(solution.r_min),
                    num(cfg.epsilon)
                )?;
                Ok(EXIT_NOT_CONVERGED)
            }
        }
        Command::Table(args) => {
            let cfg = args.resolve()?;
            let rows = reference_table(&cfg);
            let mut out = open_out(&args.out, stdout)?;
            write_table(&mut out, &rows)?;
            out.flush()?;
            Ok(EXIT_OK)
        }
        Command::Field { run, grid } => {
            let cfg = run.resolve()?;
            let (solution, converged) = solve_accepting_best(&cfg)?;
            if !converged {
                writeln!(
                    stderr,
                    "warning: not converged (r_min {}); sampling best solution",
                    num(solution.r_min)
                )?;
            }
            let samples = sample_field(&cfg, &solution, grid)?;
            let mut out = open_out(&run.out, stdout)?;
            write_field(&mut out, &samples)?;
            out.flush()?;
            Ok(EXIT_OK)
        }
        Command::Efficiencies { run, height } => {
            let cfg = run.resolve()?;
            let (solution, converged) = solve_accepting_best(&cfg)?;
            if !converged {
                writeln!(
                    stderr,
                    "warning: not converged (r_min {})",
                    num(solution.r_min)
                )?;
            }
            let height = height.unwrap_or_else(|| solution.default_matching_height());
            let orders = solution.modes().propagating().to_vec();
            let amplitudes = solution.rayleigh_coefficients(height, &orders, cfg.quadrature)?;
            let mut out = open_out(&run.out, stdout)?;
            write_efficiencies(&mut out, &solution, &amplitudes)?;
            out.flush()?;
            Ok(EXIT_OK)
        }
        Command::Validate { out } => {
            let checks = validation::run_suite();
            let mut w = open_out(out, stdout)?;
            let passed = checks.iter().filter(|c| c.passed).count();
            for c in &checks {
                writeln!(
                    w,
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                )?;
            }
            writeln!(w, "{passed}/{} checks passed", checks.len())?;
            w.flush()?;
            Ok(if passed == checks.len() {
                EXIT_OK
            } else {
                EXIT_USAGE
            })
        }
    }
}

/// Runs the solve, returning the best solution even when the tolerance was
/// not met.
pub fn solve_accepting_best(cfg: &RunConfig) -> Result<(MrcSolution, bool)> {
    match mrc_solve(&cfg.scatter_config()?) {
        Ok(s) => Ok((s, true)),
        Err(MrcError::NotConverged { best, .. }) => Ok((*best, false)),
        Err(e) => Err(e),
    }
}

pub fn write_report(
    w: &mut dyn Write,
    cfg: &RunConfig,
    solution: &MrcSolution,
    converged: bool,
) -> io::Result<()> {
    let p = &solution.params;
    writeln!(w, "profile: {}", profile_label(cfg))?;
    writeln!(w, "k: {}", num(p.k()))?;
    writeln!(w, "period: {}", num(p.period()))?;
    writeln!(w, "theta: {}", num(p.theta()))?;
    writeln!(w, "dictionary: {}", solution.dictionary.describe())?;
    writeln!(w, "nodes: {}", solution.nodes.len())?;
    writeln!(w, "columns: {}", solution.coefficients.len())?;
    writeln!(w, "w_min: {}", num(cfg.w_min))?;
    writeln!(w, "epsilon: {}", num(cfg.epsilon))?;
    writeln!(w, "r_min: {}", num(solution.r_min))?;
    writeln!(w, "converged: {converged}")?;
    writeln!(w, "discarded_singular_values: {}", solution.discarded)?;
    writeln!(w, "flagged_poles: {}", solution.flagged_poles.len())?;
    writeln!(w, "history:")?;
    writeln!(w, "pass,nodes,columns,r_min,discarded")?;
    for (i, rec) in solution.history.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{}",
            i + 1,
            rec.nodes,
            rec.columns,
            num(rec.r_min),
            rec.discarded
        )?;
    }
    writeln!(w, "coefficients:")?;
    writeln!(w, "index,re,im")?;
    for (i, c) in solution.coefficients.iter().enumerate() {
        writeln!(w, "{},{},{}", i + 1, num(c.re), num(c.im))?;
    }
    Ok(())
}

fn profile_label(cfg: &RunConfig) -> String {
    match &cfg.profile {
        ProfileSelector::I => "I".into(),
        ProfileSelector::II => "II".into(),
        ProfileSelector::III => "III".into(),
        ProfileSelector::IV => "IV".into(),
        ProfileSelector::Flat => format!("flat({})", num(cfg.flat_height)),
        ProfileSelector::File(p) => format!("file:{}", p.display()),
    }
}

#[derive(Debug, Clone)]
pub struct TableRow {
    pub profile: &'static str,
    pub theta: &'static str,
    pub reference: f64,
    pub r_min: std::result::Result<f64, String>,
}

/// Runs the twelve reference configurations concurrently, one pass each, with
/// the knobs of `base` (profile and angle are overridden per row).
pub fn reference_table(base: &RunConfig) -> Vec<TableRow> {
    REFERENCE_RESIDUALS
        .par_iter()
        .map(|&(profile, theta, reference)| {
            let r_min = (|| -> Result<f64> {
                let mut cfg = base.clone();
                cfg.set("profile", profile)?;
                cfg.set("theta", theta)?;
                cfg.max_refinements = 1;
                Ok(solve_accepting_best(&cfg)?.0.r_min)
            })()
            .map_err(|e| e.to_string());
            TableRow {
                profile,
                theta,
                reference,
                r_min,
            }
        })
        .collect()
}

pub fn write_table(w: &mut dyn Write, rows: &[TableRow]) -> io::Result<()> {
    writeln!(w, "profile,theta,r_min,paper_r_min,ratio")?;
    for row in rows {
        match &row.r_min {
            Ok(r) => writeln!(
                w,
                "{},{},{},{},{}",
                row.profile,
                row.theta,
                num(*r),
                row.reference,
                num(r / row.reference)
            )?,
            Err(e) => writeln!(
                w,
                "{},{},error: {},{},",
                row.profile,
                row.theta,
                e.replace([',', '\n'], ";"),
                row.reference
            )?,
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct FieldSample {
    pub x: f64,
    pub y: f64,
    pub scattered: Complex64,
    pub total: Complex64,
}

/// Samples on a rectangular grid, dropping points below the boundary.
pub fn sample_field(
    cfg: &RunConfig,
    solution: &MrcSolution,
    grid: &GridArgs,
) -> Result<Vec<FieldSample>> {
    let profile = cfg.build_profile()?;
    let period = profile.period();
    let top = solution
        .nodes
        .iter()
        .map(|p| p.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let bottom = solution.nodes.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let x_min = grid.x_min.unwrap_or(0.0);
    let x_max = grid.x_max.unwrap_or(period);
    let y_min = grid.y_min.unwrap_or(bottom);
    let y_max = grid.y_max.unwrap_or(top + 2.0);
    if y_min < -cfg.depth {
        return Err(MrcError::InvalidParameter(format!(
            "grid y_min {y_min} is below the Dirichlet line y = -b = {}",
            -cfg.depth
        )));
    }
    if grid.nx == 0 || grid.ny == 0 {
        return Err(MrcError::InvalidParameter("grid needs nx, ny >= 1".into()));
    }
    let axis = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        if n == 1 {
            vec![lo]
        } else {
            (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect()
        }
    };
    let xs = axis(x_min, x_max, grid.nx);
    let ys = axis(y_min, y_max, grid.ny);
    let points: Vec<(f64, f64)> = ys
        .iter()
        .flat_map(|&y| xs.iter().map(move |&x| (x, y)))
        .filter(|&(x, y)| y >= profile.periodic_height(x))
        .collect();
    points
        .par_iter()
        .map(|&(x, y)| {
            let scattered = solution.evaluate_field((x, y))?;
            let total = solution.modes().incident((x, y)) + scattered;
            Ok(FieldSample {
                x,
                y,
                scattered,
                total,
            })
        })
        .collect()
}

pub fn write_field(w: &mut dyn Write, samples: &[FieldSample]) -> io::Result<()> {
    writeln!(w, "x,y,re_v,im_v,abs_v,re_u,im_u")?;
    for s in samples {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            num(s.x),
            num(s.y),
            num(s.scattered.re),
            num(s.scattered.im),
            num(s.scattered.norm()),
            num(s.total.re),
            num(s.total.im)
        )?;
    }
    Ok(())
}

pub fn write_efficiencies(
    w: &mut dyn Write,
    solution: &MrcSolution,
    amplitudes: &BTreeMap<i64, Complex64>,
) -> io::Result<()> {
    let modes = solution.modes();
    writeln!(w, "order,mu,re_b,im_b,abs_b,efficiency")?;
    for (&j, b) in amplitudes {
        writeln!(
            w,
            "{j},{},{},{},{},{}",
            num(modes.mu(j).re),
            num(b.re),
            num(b.im),
            num(b.norm()),
            num(efficiency(*b, j, modes))
        )?;
    }
    writeln!(w, "total,,,,,{}", num(energy_balance(amplitudes, modes)))?;
    writeln!(w, "# r_min={} theta={}", num(solution.r_min), angle(solution.params.theta()))?;
    Ok(())
}
