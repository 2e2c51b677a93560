//! Run configuration, loadable from JSON and overridable by flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shellspec::shapes::{parse_ladder, ShapeSpec};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Verify,
    Spectrum,
    Lambda,
    Capacity,
    Iso,
    Split,
    Curves,
}

/// Equally spaced grid `min, …, max` with `points` entries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        (0..self.points)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.points - 1) as f64)
            .collect()
    }

    /// Parses `min:max:points`.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || CliError::Validation(format!("grid `{s}` must be min:max:points"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let min: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let max: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let points: usize = parts[2].trim().parse().map_err(|_| bad())?;
        Ok(Self { min, max, points })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Residual tolerance of iterative eigensolves.
    pub krylov: Option<f64>,
    /// Eigenvector overlap needed to continue an eigencurve.
    pub overlap: Option<f64>,
    /// Finite-difference step for eigencurve slopes, relative to `m`.
    pub fd_step: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Shape in the `kind:params:subdiv` language; `{1,2,3}` gives a ladder.
    pub shape: Option<String>,
    /// Shapes for sweeps.
    pub shapes: Vec<String>,
    pub m: f64,
    /// Spectral parameters for `verify` and `spectrum`.
    pub a: Vec<f64>,
    /// Grid of spectral parameters for `curves`.
    pub a_grid: Option<GridSpec>,
    /// Subdivision ladder replacing the one in `shape`.
    pub ladder: Option<Vec<u32>>,
    /// Experiments run per shape by `sweep`.
    pub experiments: Vec<Experiment>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            shape: None,
            shapes: Vec::new(),
            m: 1.0,
            a: Vec::new(),
            a_grid: None,
            ladder: None,
            experiments: vec![Experiment::Iso],
            output: None,
            threads: None,
            tolerances: Tolerances::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.m > 0.0) || !self.m.is_finite() {
            return Err(CliError::Validation(format!("m must be positive, got {}", self.m)));
        }
        if let Some(l) = &self.ladder {
            if l.is_empty() || l.windows(2).any(|w| w[1] <= w[0]) {
                return Err(CliError::Validation("ladder must be nonempty and strictly increasing".into()));
            }
        }
        if let Some(g) = &self.a_grid {
            if g.points == 0 || !(g.min < g.max || g.points == 1) {
                return Err(CliError::Validation("a grid must have min < max and at least one point".into()));
            }
            if g.min <= -self.m || g.max >= self.m {
                return Err(CliError::Validation(format!("a grid must lie inside (−m, m) = (−{0}, {0})", self.m)));
            }
        }
        if let Some(a) = self.a.iter().find(|a| a.abs() > self.m) {
            return Err(CliError::Validation(format!("a = {a} outside [−m, m]")));
        }
        if self.threads == Some(0) {
            return Err(CliError::Validation("thread count must be positive".into()));
        }
        Ok(())
    }

    /// The shape (or ladder of shapes) to run on.
    pub fn shape_ladder(&self) -> Result<Vec<ShapeSpec>, CliError> {
        let spec = self.shape.as_deref().ok_or_else(|| CliError::Validation("no shape given (use --shape)".into()))?;
        let mut shapes = parse_ladder(spec).map_err(shellspec::Error::from)?;
        if let Some(ladder) = &self.ladder {
            let base = shapes.pop().expect("parse_ladder returns at least one shape");
            shapes = ladder.iter().map(|&s| with_subdivisions(&base, s)).collect::<Result<_, _>>()?;
        }
        Ok(shapes)
    }

    pub fn single_shape(&self) -> Result<ShapeSpec, CliError> {
        let mut l = self.shape_ladder()?;
        if l.len() != 1 {
            return Err(CliError::Validation("this command takes a single shape, not a ladder".into()));
        }
        Ok(l.pop().expect("one shape"))
    }
}

fn with_subdivisions(s: &ShapeSpec, level: u32) -> Result<ShapeSpec, CliError> {
    Ok(match s.clone() {
        ShapeSpec::Icosphere { radius, .. } => ShapeSpec::Icosphere { radius, subdivisions: level },
        ShapeSpec::Ellipsoid { axes, .. } => ShapeSpec::Ellipsoid { axes, subdivisions: level },
        ShapeSpec::Spheroid { a, b, .. } => ShapeSpec::Spheroid { a, b, subdivisions: level },
        ShapeSpec::TwoCopy { t, z, inner } => {
            ShapeSpec::TwoCopy { t, z, inner: Box::new(with_subdivisions(&inner, level)?) }
        }
        ShapeSpec::Off { .. } => return Err(CliError::Validation("a subdivision ladder cannot apply to an OFF mesh".into())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_unknown_fields() {
        let c: RunConfig = serde_json::from_str(r#"{"shape": "icosphere:1:1"}"#).unwrap();
        assert_eq!(c.m, 1.0);
        assert!(serde_json::from_str::<RunConfig>(r#"{"shapez": 1}"#).is_err());
    }

    #[test]
    fn ladder_override() {
        let c = RunConfig { shape: Some("ellipsoid:2,1,1:1".into()), ladder: Some(vec![1, 2]), ..Default::default() };
        let l = c.shape_ladder().unwrap();
        assert_eq!(l[1].to_string(), "ellipsoid:2,1,1:2");
    }

    #[test]
    fn validation() {
        let mut c = RunConfig { m: -1.0, ..Default::default() };
        assert!(c.validate().is_err());
        c.m = 1.0;
        c.a_grid = Some(GridSpec { min: -1.0, max: 0.5, points: 3 });
        assert!(c.validate().is_err());
        c.a_grid = Some(GridSpec::parse("-0.8:0.8:9").unwrap());
        assert!(c.validate().is_ok());
        assert_eq!(c.a_grid.unwrap().values().len(), 9);
    }
}
