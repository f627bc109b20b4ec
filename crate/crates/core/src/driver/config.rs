use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::coupling::{CouplingParams, Method, Variant};
use crate::error::{Error, Result};
use crate::linalg::{DEFAULT_INDEFINITE_TOL, DEFAULT_SPD_TOL};
use crate::mesh::{build_lshape, build_two_rectangles, SubdomainMesh};

use super::manufactured::{Manufactured, ManufacturedKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    /// Ω₁ = (0,1)² with `nx1 × ny1` cells, Ω₂ = (1,2)×(0,1) with `nx2 × ny2`.
    TwoRectangles {
        nx1: usize,
        ny1: usize,
        nx2: usize,
        ny2: usize,
    },
    /// Ω₁ = (0,1)² with `n × n` cells, Ω₂ = (1,2)×(0,2) with `n × 2n`.
    LShape { n: usize },
}

impl Geometry {
    pub fn build(&self) -> Result<[SubdomainMesh; 2]> {
        let (m1, m2) = match *self {
            Geometry::TwoRectangles { nx1, ny1, nx2, ny2 } => {
                build_two_rectangles(nx1, ny1, nx2, ny2)?
            }
            Geometry::LShape { n } => build_lshape(n)?,
        };
        Ok([m1, m2])
    }
}

fn parse_call<'a>(s: &'a str, what: &str) -> Result<(&'a str, Vec<&'a str>)> {
    let s = s.trim();
    let open = s
        .find('(')
        .ok_or_else(|| Error::Config(format!("malformed {what} `{s}`")))?;
    let args = s[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| Error::Config(format!("malformed {what} `{s}`")))?;
    Ok((s[..open].trim(), args.split(',').map(str::trim).collect()))
}

fn parse_counts(args: &[&str], expected: usize, s: &str) -> Result<Vec<usize>> {
    if args.len() != expected {
        return Err(Error::Config(format!("`{s}` takes {expected} cell counts")));
    }
    args.iter()
        .map(|a| {
            a.parse::<usize>()
                .map_err(|_| Error::Config(format!("bad cell count `{a}` in `{s}`")))
        })
        .collect()
}

impl FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = parse_call(s, "geometry")?;
        match name {
            "two_rectangles" => {
                let c = parse_counts(&args, 4, s)?;
                Ok(Geometry::TwoRectangles {
                    nx1: c[0],
                    ny1: c[1],
                    nx2: c[2],
                    ny2: c[3],
                })
            }
            "lshape" => Ok(Geometry::LShape {
                n: parse_counts(&args, 1, s)?[0],
            }),
            _ => Err(Error::Config(format!(
                "unknown geometry `{name}`; expected two_rectangles or lshape"
            ))),
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::TwoRectangles { nx1, ny1, nx2, ny2 } => {
                write!(f, "two_rectangles({nx1},{ny1},{nx2},{ny2})")
            }
            Geometry::LShape { n } => write!(f, "lshape({n})"),
        }
    }
}

/// Right-hand side specification.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SourceSpec {
    Constant(f64),
    Manufactured(ManufacturedKind),
}

impl FromStr for SourceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = parse_call(s, "source")?;
        match (name, args.as_slice()) {
            ("constant", [c]) => c
                .parse::<f64>()
                .ok()
                .filter(|c| c.is_finite())
                .map(SourceSpec::Constant)
                .ok_or_else(|| Error::Config(format!("bad constant in `{s}`"))),
            ("manufactured", [tag]) => Ok(SourceSpec::Manufactured(tag.parse()?)),
            _ => Err(Error::Config(format!(
                "unknown source `{s}`; expected constant(c) or manufactured(tag)"
            ))),
        }
    }
}

impl fmt::Display for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceSpec::Constant(c) => write!(f, "constant({c})"),
            SourceSpec::Manufactured(kind) => write!(f, "manufactured({kind})"),
        }
    }
}

/// Factorization tolerances for the two solver paths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub spd: f64,
    pub indefinite: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            spd: DEFAULT_SPD_TOL,
            indefinite: DEFAULT_INDEFINITE_TOL,
        }
    }
}

/// Validated problem description.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemConfig {
    pub geometry: Geometry,
    pub k1: f64,
    pub k2: f64,
    pub alpha: f64,
    pub method: Method,
    /// Marking threshold in (0, 1].
    pub theta: f64,
    pub source: SourceSpec,
    /// Adaptive runs stop once the system size exceeds this.
    pub max_dofs: usize,
    /// Upper bound on solves in an adaptive run.
    pub max_steps: usize,
    /// Red refinements in a uniform run.
    pub uniform_steps: usize,
    pub tolerances: Tolerances,
    /// Run the master-slave variant with the subdomains swapped when
    /// `k1 < k2`.
    pub relabel_master: bool,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            geometry: Geometry::TwoRectangles {
                nx1: 4,
                ny1: 4,
                nx2: 4,
                ny2: 4,
            },
            k1: 1.0,
            k2: 1.0,
            alpha: 1e-2,
            method: Method::NitscheI,
            theta: std::f64::consts::FRAC_1_SQRT_2,
            source: SourceSpec::Constant(1.0),
            max_dofs: 10_000,
            max_steps: 30,
            uniform_steps: 4,
            tolerances: Tolerances::default(),
            relabel_master: false,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    geometry: Option<String>,
    k1: Option<f64>,
    k2: Option<f64>,
    alpha: Option<f64>,
    method: Option<String>,
    theta: Option<f64>,
    f: Option<String>,
    max_dofs: Option<usize>,
    max_steps: Option<usize>,
    uniform_steps: Option<usize>,
    spd_tolerance: Option<f64>,
    indefinite_tolerance: Option<f64>,
    relabel_master: Option<bool>,
}

impl ProblemConfig {
    /// Parses the flat TOML configuration format; absent keys keep their
    /// defaults and unknown keys are rejected.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut c = Self::default();
        if let Some(g) = raw.geometry {
            c.geometry = g.parse()?;
        }
        if let Some(m) = raw.method {
            c.method = m.parse()?;
        }
        if let Some(f) = raw.f {
            c.source = f.parse()?;
        }
        c.k1 = raw.k1.unwrap_or(c.k1);
        c.k2 = raw.k2.unwrap_or(c.k2);
        c.alpha = raw.alpha.unwrap_or(c.alpha);
        c.theta = raw.theta.unwrap_or(c.theta);
        c.max_dofs = raw.max_dofs.unwrap_or(c.max_dofs);
        c.max_steps = raw.max_steps.unwrap_or(c.max_steps);
        c.uniform_steps = raw.uniform_steps.unwrap_or(c.uniform_steps);
        c.tolerances.spd = raw.spd_tolerance.unwrap_or(c.tolerances.spd);
        c.tolerances.indefinite = raw.indefinite_tolerance.unwrap_or(c.tolerances.indefinite);
        c.relabel_master = raw.relabel_master.unwrap_or(c.relabel_master);
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| e.context(format!("reading {}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::Config(format!(
                "theta must lie in (0, 1], got {}",
                self.theta
            )));
        }
        for (name, v) in [
            ("spd_tolerance", self.tolerances.spd),
            ("indefinite_tolerance", self.tolerances.indefinite),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        self.coupling().map(|_| ())
    }

    /// Whether the subdomains are swapped so that side 0 is the stiffer,
    /// master side of the master-slave variant.
    pub fn swapped(&self) -> bool {
        self.relabel_master && self.method.variant() == Variant::II && self.k1 < self.k2
    }

    /// Coupling parameters in side order (see [`ProblemConfig::swapped`]).
    pub fn coupling(&self) -> Result<CouplingParams> {
        if self.swapped() {
            CouplingParams::new(self.k2, self.k1, self.alpha, self.method)
        } else {
            CouplingParams::new(self.k1, self.k2, self.alpha, self.method)
        }
    }

    /// Initial meshes in side order.
    pub fn initial_meshes(&self) -> Result<[SubdomainMesh; 2]> {
        let [m1, m2] = self.geometry.build()?;
        Ok(if self.swapped() { [m2, m1] } else { [m1, m2] })
    }

    pub fn manufactured(&self) -> Option<Manufactured> {
        match self.source {
            SourceSpec::Manufactured(kind) => Some(Manufactured::new(kind, self.k1, self.k2)),
            SourceSpec::Constant(_) => None,
        }
    }
}
