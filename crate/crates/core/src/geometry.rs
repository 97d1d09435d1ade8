//! Periodic boundary profiles, boundary nodes and interior poles.

use std::fmt;
use std::path::Path;

use crate::error::{MrcError, Result};
use crate::modes::Point;

/// Vertical pole offset used for the graph profiles.
pub const GRAPH_POLE_OFFSET: (f64, f64) = (0.0, -0.1);

/// Pole offset used for the slant/vertical sawtooth profile.
pub const SAWTOOTH_POLE_OFFSET: (f64, f64) = (-0.03, -0.05);

/// Poles closer than this to the vertical wall of the sawtooth are flagged.
pub const WALL_FLAG_DISTANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    /// `f(x) = sin(2x)`
    Sine2,
    /// `f(x) = sin(0.2x)`
    Sine02,
    /// Triangle: `f(x) = x` up to `L/2`, then `L - x`.
    Triangle,
    /// Sawtooth: slant `f(x) = x` plus a vertical wall at `x = L`.
    Sawtooth,
    Flat(f64),
    Tabulated(TabulatedProfile),
}

impl ProfileKind {
    pub fn label(&self) -> String {
        match self {
            ProfileKind::Sine2 => "I".into(),
            ProfileKind::Sine02 => "II".into(),
            ProfileKind::Triangle => "III".into(),
            ProfileKind::Sawtooth => "IV".into(),
            ProfileKind::Flat(c) => format!("flat({c})"),
            ProfileKind::Tabulated(_) => "tabulated".into(),
        }
    }
}

/// Piecewise-linear profile through `(x, y)` samples sorted by `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProfile {
    points: Vec<Point>,
}

impl TabulatedProfile {
    pub fn new(points: Vec<Point>, period: f64) -> Result<Self> {
        if points.len() < 2 {
            return Err(MrcError::Tabulated("need at least two rows".into()));
        }
        for (i, &(x, y)) in points.iter().enumerate() {
            if !(x.is_finite() && y.is_finite()) {
                return Err(MrcError::Tabulated(format!("row {} is not finite", i + 1)));
            }
            if x < 0.0 || x > period {
                return Err(MrcError::Tabulated(format!(
                    "row {}: x = {x} outside [0, {period}]",
                    i + 1
                )));
            }
        }
        if points.windows(2).any(|w| w[1].0 < w[0].0) {
            return Err(MrcError::Tabulated("rows are not sorted by x".into()));
        }
        Ok(Self { points })
    }

    /// Parses CSV text with header `x,y`.
    pub fn parse_csv(text: &str, period: f64) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| MrcError::Tabulated("empty file".into()))?;
        let header: Vec<_> = header.split(',').map(str::trim).collect();
        if header != ["x", "y"] {
            return Err(MrcError::Tabulated(format!(
                "expected header `x,y`, found `{}`",
                header.join(",")
            )));
        }
        let mut points = Vec::new();
        for (n, line) in lines.enumerate() {
            let fields: Vec<_> = line.split(',').map(str::trim).collect();
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| MrcError::Tabulated(format!("row {}: {e}", n + 1)))
            };
            match fields.as_slice() {
                [x, y] => points.push((parse(x)?, parse(y)?)),
                _ => {
                    return Err(MrcError::Tabulated(format!(
                        "row {}: expected two fields",
                        n + 1
                    )))
                }
            }
        }
        Self::new(points, period)
    }

    pub fn from_file(path: &Path, period: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_csv(&text, period)
    }

    /// Linear interpolation; held constant outside the tabulated range.
    pub fn height(&self, x: f64) -> f64 {
        let pts = &self.points;
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if x <= first.0 {
            return first.1;
        }
        if x >= last.0 {
            return last.1;
        }
        let idx = pts.partition_point(|p| p.0 <= x);
        let (x0, y0) = pts[idx - 1];
        let (x1, y1) = pts[idx];
        if x1 == x0 {
            return y1;
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }
}

/// An `L`-periodic boundary profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    kind: ProfileKind,
    period: f64,
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.kind.label())
    }
}

impl Profile {
    pub fn new(kind: ProfileKind, period: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(MrcError::InvalidParameter(format!(
                "period must be > 0, got {period}"
            )));
        }
        Ok(Self { kind, period })
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn is_graph(&self) -> bool {
        !matches!(self.kind, ProfileKind::Sawtooth)
    }

    /// Height `f(x)` for graph profiles, `0 <= x <= L`.
    pub fn height(&self, x: f64) -> Result<f64> {
        if matches!(self.kind, ProfileKind::Sawtooth) {
            return Err(MrcError::NotAGraph(self.kind.label()));
        }
        Ok(self.raw_height(x))
    }

    /// Height of the slant part for the sawtooth, `f` otherwise.
    fn raw_height(&self, x: f64) -> f64 {
        let l = self.period;
        match &self.kind {
            ProfileKind::Sine2 => (2.0 * x).sin(),
            ProfileKind::Sine02 => (0.2 * x).sin(),
            ProfileKind::Triangle => {
                if x <= l / 2.0 {
                    x
                } else {
                    l - x
                }
            }
            ProfileKind::Sawtooth => x,
            ProfileKind::Flat(c) => *c,
            ProfileKind::Tabulated(t) => t.height(x),
        }
    }

    /// Height of the periodic extension; for the sawtooth this is the slant
    /// part, the wall sitting at multiples of `L`. Points of the closed
    /// interval `[0, L]` use the defining formula directly.
    pub fn periodic_height(&self, x: f64) -> f64 {
        if (0.0..=self.period).contains(&x) {
            self.raw_height(x)
        } else {
            self.raw_height(x.rem_euclid(self.period))
        }
    }

    /// Boundary nodes. Graph profiles use `t_i = iL/N`, `i = 1..=N`; the
    /// sawtooth puts `N/2` nodes on the slant and `N/2` on the wall.
    pub fn nodes(&self, count: usize) -> Result<Vec<Point>> {
        let bad = |reason: &str| MrcError::BadCount {
            profile: self.kind.label(),
            count,
            reason: reason.into(),
        };
        if count < 2 {
            return Err(bad("need at least two nodes"));
        }
        let l = self.period;
        let n = count as f64;
        match self.kind {
            ProfileKind::Sawtooth => {
                if count % 2 != 0 {
                    return Err(bad("sawtooth needs an even node count"));
                }
                let half = count / 2;
                let slant = (1..=half).map(|i| {
                    let t = 2.0 * i as f64 * l / n;
                    (t, self.raw_height(t))
                });
                let wall = (half + 1..=count).map(|i| {
                    let t = 2.0 * (i - half) as f64 * l / n;
                    (l, self.raw_height(t))
                });
                Ok(slant.chain(wall).collect())
            }
            _ => Ok((1..=count)
                .map(|i| {
                    let t = i as f64 * l / n;
                    (t, self.raw_height(t))
                })
                .collect()),
        }
    }

    pub fn default_pole_offset(&self) -> (f64, f64) {
        match self.kind {
            ProfileKind::Sawtooth => SAWTOOTH_POLE_OFFSET,
            _ => GRAPH_POLE_OFFSET,
        }
    }

    /// Pole `m` (1-based) is node `4m` shifted by `offset`; `4M <= N`.
    pub fn poles(
        &self,
        nodes: &[Point],
        count: usize,
        depth: f64,
        offset: (f64, f64),
    ) -> Result<PolePlacement> {
        if count == 0 || 4 * count > nodes.len() {
            return Err(MrcError::BadCount {
                profile: self.kind.label(),
                count,
                reason: format!("pole count must satisfy 1 <= 4M <= N = {}", nodes.len()),
            });
        }
        let mut poles = Vec::with_capacity(count);
        let mut flagged = Vec::new();
        for m in 1..=count {
            let (x, y) = nodes[4 * m - 1];
            let pole = (x + offset.0, y + offset.1);
            self.check_pole(m - 1, pole, depth)?;
            if matches!(self.kind, ProfileKind::Sawtooth) {
                let r = pole.0.rem_euclid(self.period);
                if r.min(self.period - r) < WALL_FLAG_DISTANCE {
                    flagged.push(m - 1);
                }
            }
            poles.push(pole);
        }
        Ok(PolePlacement { poles, flagged })
    }

    fn check_pole(&self, index: usize, (x, y): Point, depth: f64) -> Result<()> {
        let fail = |reason: String| MrcError::PoleOutsideRegion { index, x, y, reason };
        if !(y > -depth) {
            return Err(fail(format!("not above the Dirichlet line y = {}", -depth)));
        }
        let surface = self.periodic_height(x);
        if !(y < surface) {
            return Err(fail(format!("not below the boundary height {surface}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolePlacement {
    pub poles: Vec<Point>,
    /// Indices of poles lying within [`WALL_FLAG_DISTANCE`] of the sawtooth wall.
    pub flagged: Vec<usize>,
}

/// Nodes and poles for one least-squares solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub nodes: Vec<Point>,
    pub poles: Vec<Point>,
    pub flagged_poles: Vec<usize>,
}

impl Discretization {
    /// Generates nodes and poles with the built-in rules. `offset` overrides
    /// the profile's default pole offset.
    pub fn generate(
        profile: &Profile,
        node_count: usize,
        pole_count: usize,
        depth: f64,
        offset: Option<(f64, f64)>,
    ) -> Result<Self> {
        if pole_count >= node_count {
            return Err(MrcError::BadCount {
                profile: profile.kind.label(),
                count: pole_count,
                reason: format!("need M < N = {node_count}"),
            });
        }
        let nodes = boundary_nodes(profile, node_count, depth)?;
        let offset = offset.unwrap_or_else(|| profile.default_pole_offset());
        let placement = profile.poles(&nodes, pole_count, depth, offset)?;
        Ok(Self {
            nodes,
            poles: placement.poles,
            flagged_poles: placement.flagged,
        })
    }
}

/// Nodes checked to lie strictly above `y = -b`.
pub fn boundary_nodes(profile: &Profile, count: usize, depth: f64) -> Result<Vec<Point>> {
    let nodes = profile.nodes(count)?;
    if let Some(&(x, y)) = nodes.iter().find(|p| !(p.1 > -depth)) {
        return Err(MrcError::InvalidParameter(format!(
            "boundary node ({x}, {y}) is not above y = -b = {}",
            -depth
        )));
    }
    Ok(nodes)
}

/// Normalized arclength quadrature weights for a node sequence (mean one).
pub fn arclength_weights(nodes: &[Point]) -> Vec<f64> {
    let n = nodes.len();
    if n < 2 {
        return vec![1.0; n];
    }
    let dist = |a: Point, b: Point| (b.0 - a.0).hypot(b.1 - a.1);
    let mut w: Vec<f64> = (0..n)
        .map(|i| {
            let left = if i > 0 { dist(nodes[i - 1], nodes[i]) } else { 0.0 };
            let right = if i + 1 < n { dist(nodes[i], nodes[i + 1]) } else { 0.0 };
            match (i, i + 1 == n) {
                (0, _) => right,
                (_, true) => left,
                _ => 0.5 * (left + right),
            }
        })
        .collect();
    let mean = w.iter().sum::<f64>() / n as f64;
    if mean > 0.0 {
        w.iter_mut().for_each(|v| *v /= mean);
    } else {
        w.iter_mut().for_each(|v| *v = 1.0);
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn profile(kind: ProfileKind) -> Profile {
        Profile::new(kind, PI).unwrap()
    }

    #[test]
    fn sine_nodes() {
        let nodes = profile(ProfileKind::Sine2).nodes(4).unwrap();
        let want = [
            (PI / 4.0, 1.0),
            (PI / 2.0, 0.0),
            (3.0 * PI / 4.0, -1.0),
            (PI, 0.0),
        ];
        for (got, want) in nodes.iter().zip(want) {
            assert!((got.0 - want.0).abs() < 1e-15);
            assert!((got.1 - want.1).abs() < 1e-15);
        }
    }

    #[test]
    fn flat_nodes() {
        let nodes = profile(ProfileKind::Flat(0.0)).nodes(3).unwrap();
        assert_eq!(nodes.len(), 3);
        assert!(nodes.iter().all(|p| p.1 == 0.0));
    }

    #[test]
    fn sawtooth_nodes() {
        let nodes = profile(ProfileKind::Sawtooth).nodes(8).unwrap();
        for i in 1..=4 {
            let t = 2.0 * i as f64 * PI / 8.0;
            assert_eq!(nodes[i - 1], (t, t));
        }
        for i in 5..=8 {
            let t = 2.0 * (i - 4) as f64 * PI / 8.0;
            assert_eq!(nodes[i - 1], (PI, t));
        }
        assert!(matches!(
            profile(ProfileKind::Sawtooth).nodes(7),
            Err(MrcError::BadCount { .. })
        ));
        assert!(profile(ProfileKind::Sine2).nodes(1).is_err());
    }

    #[test]
    fn heights() {
        let h = profile(ProfileKind::Sine02).height(PI).unwrap();
        assert!((h - 0.587_785_252_292_473_1).abs() < 1e-15);
        assert_eq!(profile(ProfileKind::Triangle).height(PI / 2.0).unwrap(), PI / 2.0);
        assert_eq!(profile(ProfileKind::Flat(0.3)).height(1.7).unwrap(), 0.3);
        assert!(matches!(
            profile(ProfileKind::Sawtooth).height(1.0),
            Err(MrcError::NotAGraph(_))
        ));
    }

    #[test]
    fn graph_pole_rule() {
        let p = profile(ProfileKind::Sine2);
        let d = Discretization::generate(&p, 256, 64, 1.2, None).unwrap();
        assert_eq!(d.poles.len(), 64);
        for m in 1..=64 {
            let node = d.nodes[4 * m - 1];
            assert_eq!(d.poles[m - 1], (node.0, node.1 - 0.1));
        }
    }

    #[test]
    fn flat_pole_rule() {
        let p = profile(ProfileKind::Flat(0.0));
        let d = Discretization::generate(&p, 16, 4, 1.2, None).unwrap();
        for (m, pole) in d.poles.iter().enumerate() {
            assert_eq!(pole.0, d.nodes[4 * m + 3].0);
            assert!((pole.1 + 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn shallow_depth_rejects_poles() {
        let p = profile(ProfileKind::Sine2);
        let nodes = p.nodes(256).unwrap();
        assert!(matches!(
            p.poles(&nodes, 64, 0.05, GRAPH_POLE_OFFSET),
            Err(MrcError::PoleOutsideRegion { .. })
        ));
    }

    #[test]
    fn pole_count_limits() {
        let p = profile(ProfileKind::Flat(0.0));
        assert!(Discretization::generate(&p, 16, 5, 1.2, None).is_err());
        assert!(Discretization::generate(&p, 16, 0, 1.2, None).is_err());
        assert!(Discretization::generate(&p, 4, 4, 1.2, None).is_err());
    }

    #[test]
    fn sawtooth_poles_stay_inside() {
        let p = profile(ProfileKind::Sawtooth);
        let d = Discretization::generate(&p, 256, 64, 1.2, None).unwrap();
        for &(x, y) in &d.poles {
            assert!(y > -1.2 && y < p.periodic_height(x));
        }
        // The default offset keeps every pole 0.03 away from the wall.
        assert!(d.flagged_poles.is_empty());
        let d = Discretization::generate(&p, 256, 64, 1.2, Some((-0.005, -0.05))).unwrap();
        // 32 wall poles plus the pole under the top corner.
        assert_eq!(d.flagged_poles.len(), 33);
    }

    #[test]
    fn tabulated_parse_and_interpolate() {
        let t = TabulatedProfile::parse_csv("x,y\n0,0\n1,1\n3,0\n", PI).unwrap();
        assert_eq!(t.height(0.5), 0.5);
        assert_eq!(t.height(2.0), 0.5);
        assert_eq!(t.height(3.1), 0.0);
        assert!(TabulatedProfile::parse_csv("x,y\n1,0\n0,1\n", PI).is_err());
        assert!(TabulatedProfile::parse_csv("x,y\n0,0\n4,1\n", PI).is_err());
        assert!(TabulatedProfile::parse_csv("a,b\n0,0\n1,1\n", PI).is_err());
        assert!(TabulatedProfile::parse_csv("x,y\n0,0\n", PI).is_err());
    }

    #[test]
    fn arclength_weights_have_unit_mean() {
        let nodes = profile(ProfileKind::Sine2).nodes(64).unwrap();
        let w = arclength_weights(&nodes);
        assert!((w.iter().sum::<f64>() / 64.0 - 1.0).abs() < 1e-14);
        let flat = profile(ProfileKind::Flat(0.0)).nodes(8).unwrap();
        let w = arclength_weights(&flat);
        assert!((w[3] - w[4]).abs() < 1e-14);
    }
}
