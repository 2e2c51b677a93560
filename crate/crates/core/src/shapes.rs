//! Compact shape descriptions: `kind:params:subdiv`.
//!
//! ```text
//! icosphere:R:S          sphere of radius R
//! ellipsoid:a,b,c:S      semi-axes a, b, c
//! spheroid:a,b:S         semi-axes a, b, b
//! off:PATH               mesh file
//! twocopy:t:zx,zy,zz:SPEC  t·Ω ∪ (t·Ω + z)
//! ```
//!
//! A subdivision written as `{1,2,3}` expands into a ladder of shapes.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{generate_ellipsoid, generate_icosphere, load_off, two_copy, MeshError, SurfaceMesh};

#[derive(Debug, Error, PartialEq)]
pub enum ShapeError {
    #[error("invalid shape `{spec}`: {reason}")]
    Invalid { spec: String, reason: String },
}

fn invalid(spec: &str, reason: impl Into<String>) -> ShapeError {
    ShapeError::Invalid { spec: spec.to_string(), reason: reason.into() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ShapeSpec {
    Icosphere { radius: f64, subdivisions: u32 },
    Ellipsoid { axes: [f64; 3], subdivisions: u32 },
    Spheroid { a: f64, b: f64, subdivisions: u32 },
    Off { path: PathBuf },
    TwoCopy { t: f64, z: [f64; 3], inner: Box<ShapeSpec> },
}

fn number(spec: &str, s: &str) -> Result<f64, ShapeError> {
    let v: f64 = s.trim().parse().map_err(|_| invalid(spec, format!("`{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(invalid(spec, format!("`{s}` is not finite")));
    }
    Ok(v)
}

fn numbers<const N: usize>(spec: &str, s: &str) -> Result<[f64; N], ShapeError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != N {
        return Err(invalid(spec, format!("expected {N} comma-separated values, got `{s}`")));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = number(spec, p)?;
    }
    Ok(out)
}

fn subdivisions(spec: &str, s: &str) -> Result<u32, ShapeError> {
    let v: u32 = s.trim().parse().map_err(|_| invalid(spec, format!("subdivision `{s}` is not a nonnegative integer")))?;
    if v > 6 {
        return Err(invalid(spec, "subdivision above 6 is not supported"));
    }
    Ok(v)
}

fn positive(spec: &str, v: &[f64]) -> Result<(), ShapeError> {
    if v.iter().any(|x| *x <= 0.0) {
        return Err(invalid(spec, "sizes must be positive"));
    }
    Ok(())
}

impl FromStr for ShapeSpec {
    type Err = ShapeError;

    fn from_str(spec: &str) -> Result<Self, ShapeError> {
        let (kind, rest) = spec.split_once(':').ok_or_else(|| invalid(spec, "expected `kind:params`"))?;
        match kind {
            "icosphere" | "sphere" => {
                let (r, s) = rest.split_once(':').ok_or_else(|| invalid(spec, "expected icosphere:R:S"))?;
                let radius = number(spec, r)?;
                positive(spec, &[radius])?;
                Ok(Self::Icosphere { radius, subdivisions: subdivisions(spec, s)? })
            }
            "ellipsoid" => {
                let (a, s) = rest.split_once(':').ok_or_else(|| invalid(spec, "expected ellipsoid:a,b,c:S"))?;
                let axes = numbers::<3>(spec, a)?;
                positive(spec, &axes)?;
                Ok(Self::Ellipsoid { axes, subdivisions: subdivisions(spec, s)? })
            }
            "spheroid" => {
                let (a, s) = rest.split_once(':').ok_or_else(|| invalid(spec, "expected spheroid:a,b:S"))?;
                let [a, b] = numbers::<2>(spec, a)?;
                positive(spec, &[a, b])?;
                Ok(Self::Spheroid { a, b, subdivisions: subdivisions(spec, s)? })
            }
            "off" => {
                if rest.is_empty() {
                    return Err(invalid(spec, "missing path"));
                }
                Ok(Self::Off { path: PathBuf::from(rest) })
            }
            "twocopy" => {
                let mut it = rest.splitn(3, ':');
                let (t, z, inner) = match (it.next(), it.next(), it.next()) {
                    (Some(t), Some(z), Some(inner)) => (t, z, inner),
                    _ => return Err(invalid(spec, "expected twocopy:t:zx,zy,zz:SPEC")),
                };
                let t = number(spec, t)?;
                positive(spec, &[t])?;
                Ok(Self::TwoCopy { t, z: numbers::<3>(spec, z)?, inner: Box::new(inner.parse()?) })
            }
            other => Err(invalid(spec, format!("unknown kind `{other}`"))),
        }
    }
}

impl fmt::Display for ShapeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Icosphere { radius, subdivisions } => write!(f, "icosphere:{radius}:{subdivisions}"),
            Self::Ellipsoid { axes, subdivisions } => {
                write!(f, "ellipsoid:{},{},{}:{subdivisions}", axes[0], axes[1], axes[2])
            }
            Self::Spheroid { a, b, subdivisions } => write!(f, "spheroid:{a},{b}:{subdivisions}"),
            Self::Off { path } => write!(f, "off:{}", path.display()),
            Self::TwoCopy { t, z, inner } => write!(f, "twocopy:{t}:{},{},{}:{inner}", z[0], z[1], z[2]),
        }
    }
}

impl TryFrom<String> for ShapeSpec {
    type Error = ShapeError;

    fn try_from(s: String) -> Result<Self, ShapeError> {
        s.parse()
    }
}

impl From<ShapeSpec> for String {
    fn from(s: ShapeSpec) -> String {
        s.to_string()
    }
}

impl ShapeSpec {
    pub fn build(&self) -> Result<SurfaceMesh<f64>, MeshError> {
        match self {
            Self::Icosphere { radius, subdivisions } => generate_icosphere(*radius, *subdivisions),
            Self::Ellipsoid { axes, subdivisions } => generate_ellipsoid(*axes, *subdivisions),
            Self::Spheroid { a, b, subdivisions } => generate_ellipsoid([*a, *b, *b], *subdivisions),
            Self::Off { path } => load_off(path),
            Self::TwoCopy { t, z, inner } => two_copy(&inner.build()?, *t, *z),
        }
    }

    /// Closed-form capacity, where one is known.
    pub fn capacity_oracle(&self) -> Option<f64> {
        match self {
            Self::Icosphere { radius, .. } => Some(4.0 * std::f64::consts::PI * radius),
            Self::Spheroid { a, b, .. } if a >= b => Some(crate::capacity::spheroid_capacity_oracle(*a, *b)),
            Self::Ellipsoid { axes, .. } if axes[1] == axes[2] && axes[0] >= axes[1] => {
                Some(crate::capacity::spheroid_capacity_oracle(axes[0], axes[1]))
            }
            _ => None,
        }
    }

    /// Largest over smallest semi-axis for analytic shapes.
    pub fn aspect(&self) -> Option<f64> {
        match self {
            Self::Icosphere { .. } => Some(1.0),
            Self::Ellipsoid { axes, .. } => {
                let max = axes.iter().copied().fold(0.0, f64::max);
                let min = axes.iter().copied().fold(f64::INFINITY, f64::min);
                Some(max / min)
            }
            Self::Spheroid { a, b, .. } => Some(a.max(*b) / a.min(*b)),
            _ => None,
        }
    }
}

/// Parses a shape whose subdivision may be a ladder `{s1,s2,...}`, returning
/// one shape per level. Ladders must be strictly increasing.
pub fn parse_ladder(spec: &str) -> Result<Vec<ShapeSpec>, ShapeError> {
    let Some(open) = spec.find('{') else {
        return Ok(vec![spec.parse()?]);
    };
    let close = spec[open..].find('}').map(|c| open + c).ok_or_else(|| invalid(spec, "unclosed `{`"))?;
    let levels: Vec<u32> = spec[open + 1..close]
        .split(',')
        .map(|s| subdivisions(spec, s))
        .collect::<Result<_, _>>()?;
    if levels.is_empty() || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid(spec, "ladder must be nonempty and strictly increasing"));
    }
    levels
        .iter()
        .map(|l| format!("{}{}{}", &spec[..open], l, &spec[close + 1..]).parse())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for s in ["icosphere:1:2", "ellipsoid:2,1,1:3", "spheroid:2,1:1", "off:/tmp/x.off", "twocopy:0.5:8,0,0:icosphere:1:1"] {
            let p: ShapeSpec = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
    }

    #[test]
    fn ladder_expands() {
        let l = parse_ladder("icosphere:1.0:{1,2,3}").unwrap();
        assert_eq!(l.len(), 3);
        assert_eq!(l[2], ShapeSpec::Icosphere { radius: 1.0, subdivisions: 3 });
        assert!(parse_ladder("icosphere:1:{2,1}").is_err());
        assert!(parse_ladder("icosphere:1:{}").is_err());
    }

    #[test]
    fn rejects_bad_input() {
        for s in ["", "cube:1:2", "icosphere:-1:2", "icosphere:1:x", "ellipsoid:1,2:3", "icosphere:nan:1", "twocopy:1:0,0:icosphere:1:1"] {
            assert!(s.parse::<ShapeSpec>().is_err(), "{s}");
        }
    }

    #[test]
    fn oracle_for_spheroids() {
        let s: ShapeSpec = "ellipsoid:2,1,1:3".parse().unwrap();
        let c = s.capacity_oracle().unwrap();
        assert!((c - 4.0 * std::f64::consts::PI * 3f64.sqrt() / (2.0 + 3f64.sqrt()).ln()).abs() < 1e-12);
    }
}
