//! Run configuration: `key = value` files with `#` comments, overridden by
//! command-line flags.

use std::f64::consts::{FRAC_PI_4, PI};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{MrcError, Result};
use crate::geometry::{Profile, ProfileKind, TabulatedProfile};
use crate::greens::{DEFAULT_DEPTH, DEFAULT_J_MAX};
use crate::modes::ScatterParams;
use crate::solver::{
    DictionaryKind, ScatterConfig, DEFAULT_EPSILON, DEFAULT_MAX_REFINEMENTS, DEFAULT_NODES,
    DEFAULT_POLES, DEFAULT_QUADRATURE_POINTS, DEFAULT_W_MIN,
};

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSelector {
    I,
    II,
    III,
    IV,
    Flat,
    File(PathBuf),
}

impl FromStr for ProfileSelector {
    type Err = MrcError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(ProfileSelector::File(PathBuf::from(path)));
        }
        match s.to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(ProfileSelector::I),
            "II" | "2" => Ok(ProfileSelector::II),
            "III" | "3" => Ok(ProfileSelector::III),
            "IV" | "4" => Ok(ProfileSelector::IV),
            "FLAT" => Ok(ProfileSelector::Flat),
            _ => Err(MrcError::Config(format!(
                "unknown profile `{s}` (expected I, II, III, IV, flat or file:PATH)"
            ))),
        }
    }
}

impl FromStr for DictionaryKind {
    type Err = MrcError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "poles" | "pole" => Ok(DictionaryKind::Poles),
            "rayleigh" => Ok(DictionaryKind::Rayleigh),
            other => Err(MrcError::Config(format!(
                "unknown dictionary `{other}` (expected poles or rayleigh)"
            ))),
        }
    }
}

/// Parses radians, accepting `pi`, `pi/4`, `pi/3`, `pi/2` and in general `pi/<number>`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let t = s.trim().to_ascii_lowercase();
    if t == "pi" {
        return Ok(PI);
    }
    if let Some(den) = t.strip_prefix("pi/") {
        let den: f64 = den
            .parse()
            .map_err(|_| MrcError::Config(format!("bad angle `{s}`")))?;
        if den == 0.0 {
            return Err(MrcError::Config(format!("bad angle `{s}`")));
        }
        return Ok(PI / den);
    }
    t.parse()
        .map_err(|_| MrcError::Config(format!("bad angle `{s}`")))
}

/// Parses `dy` or `dx,dy`.
pub fn parse_offset(s: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| {
        p.parse::<f64>()
            .map_err(|_| MrcError::Config(format!("bad pole offset `{s}`")))
    };
    match parts.as_slice() {
        [dy] => Ok((0.0, num(dy)?)),
        [dx, dy] => Ok((num(dx)?, num(dy)?)),
        _ => Err(MrcError::Config(format!("bad pole offset `{s}`"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub profile: ProfileSelector,
    pub flat_height: f64,
    pub k: f64,
    pub period: f64,
    pub theta: f64,
    pub nodes: usize,
    pub poles: usize,
    pub depth: f64,
    pub j_max: usize,
    pub w_min: f64,
    pub epsilon: f64,
    pub max_refinements: usize,
    pub pole_offset: Option<(f64, f64)>,
    pub dictionary: DictionaryKind,
    pub order: usize,
    pub arclength_weights: bool,
    pub quadrature: usize,
    pub match_height: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            profile: ProfileSelector::I,
            flat_height: 0.0,
            k: 1.0,
            period: PI,
            theta: FRAC_PI_4,
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
            quadrature: DEFAULT_QUADRATURE_POINTS,
            match_height: None,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| MrcError::Config(format!("bad value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(MrcError::Config(format!("bad value `{value}` for `{key}`"))),
    }
}

impl RunConfig {
    /// Sets one key; hyphens and underscores are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let norm = key.trim().replace('-', "_");
        match norm.as_str() {
            "profile" => self.profile = value.parse()?,
            "flat_height" => self.flat_height = parse_value(key, value)?,
            "k" => self.k = parse_value(key, value)?,
            "period" | "L" => self.period = parse_value(key, value)?,
            "theta" => self.theta = parse_angle(value)?,
            "nodes" | "N" => self.nodes = parse_value(key, value)?,
            "poles" | "M" => self.poles = parse_value(key, value)?,
            "depth" | "b" => self.depth = parse_value(key, value)?,
            "jmax" | "j_max" => self.j_max = parse_value(key, value)?,
            "wmin" | "w_min" => self.w_min = parse_value(key, value)?,
            "epsilon" => self.epsilon = parse_value(key, value)?,
            "max_refinements" => self.max_refinements = parse_value(key, value)?,
            "pole_offset" => self.pole_offset = Some(parse_offset(value)?),
            "dictionary" => self.dictionary = value.parse()?,
            "order" | "p" => self.order = parse_value(key, value)?,
            "arclength_weights" => self.arclength_weights = parse_bool(key, value)?,
            "quadrature" => self.quadrature = parse_value(key, value)?,
            "match_height" => self.match_height = Some(parse_value(key, value)?),
            _ => return Err(MrcError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                MrcError::Config(format!("line {}: expected key = value", n + 1))
            })?;
            self.set(key, value)
                .map_err(|e| MrcError::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn params(&self) -> Result<ScatterParams> {
        ScatterParams::new(self.k, self.period, self.theta)
    }

    pub fn build_profile(&self) -> Result<Profile> {
        let kind = match &self.profile {
            ProfileSelector::I => ProfileKind::Sine2,
            ProfileSelector::II => ProfileKind::Sine02,
            ProfileSelector::III => ProfileKind::Triangle,
            ProfileSelector::IV => ProfileKind::Sawtooth,
            ProfileSelector::Flat => ProfileKind::Flat(self.flat_height),
            ProfileSelector::File(path) => {
                ProfileKind::Tabulated(TabulatedProfile::from_file(path, self.period)?)
            }
        };
        Profile::new(kind, self.period)
    }

    pub fn scatter_config(&self) -> Result<ScatterConfig> {
        let mut cfg = ScatterConfig::new(self.build_profile()?, self.params()?);
        cfg.nodes = self.nodes;
        cfg.poles = self.poles;
        cfg.depth = self.depth;
        cfg.j_max = self.j_max;
        cfg.w_min = self.w_min;
        cfg.epsilon = self.epsilon;
        cfg.max_refinements = self.max_refinements;
        cfg.pole_offset = self.pole_offset;
        cfg.dictionary = self.dictionary;
        cfg.order = self.order;
        cfg.arclength_weights = self.arclength_weights;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn defaults_follow_the_table_runs() {
        let c = RunConfig::default();
        assert_eq!((c.k, c.period, c.nodes, c.poles), (1.0, PI, 256, 64));
        assert_eq!((c.w_min, c.depth, c.j_max), (1e-8, 1.2, 120));
    }

    #[test]
    fn parses_key_value_text() {
        let mut c = RunConfig::default();
        c.apply_text(
            "# comment\nprofile = III\ntheta = pi/2   # normal incidence\n\nN=128\npoles = 32\npole-offset = -0.02,-0.08\ndictionary=rayleigh\np = 5\n",
        )
        .unwrap();
        assert_eq!(c.profile, ProfileSelector::III);
        assert_eq!(c.theta, FRAC_PI_2);
        assert_eq!((c.nodes, c.poles, c.order), (128, 32, 5));
        assert_eq!(c.pole_offset, Some((-0.02, -0.08)));
        assert_eq!(c.dictionary, DictionaryKind::Rayleigh);
    }

    #[test]
    fn reports_bad_lines() {
        let mut c = RunConfig::default();
        assert!(c.apply_text("profile I").is_err());
        assert!(c.apply_text("colour = blue").is_err());
        assert!(c.apply_text("nodes = many").is_err());
        assert!(c.apply_text("profile = V").is_err());
    }

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi/4").unwrap(), FRAC_PI_4);
        assert_eq!(parse_angle("PI/3").unwrap(), PI / 3.0);
        assert_eq!(parse_angle("0.7853981634").unwrap(), 0.7853981634);
        assert!(parse_angle("pi/0").is_err());
        assert!(parse_angle("quarter").is_err());
    }

    #[test]
    fn profile_selectors() {
        assert_eq!("iv".parse::<ProfileSelector>().unwrap(), ProfileSelector::IV);
        assert_eq!(
            "file:/tmp/g.csv".parse::<ProfileSelector>().unwrap(),
            ProfileSelector::File("/tmp/g.csv".into())
        );
        assert_eq!(parse_offset("-0.1").unwrap(), (0.0, -0.1));
    }

    #[test]
    fn invalid_theta_is_rejected_when_building() {
        let c = RunConfig {
            theta: 0.0,
            ..RunConfig::default()
        };
        assert!(c.scatter_config().is_err());
    }
}
