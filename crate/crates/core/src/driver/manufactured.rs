use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::{Point2, SubdomainId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ManufacturedKind {
    /// `u₁ = x`, `u₂ = 1 + (k₁/k₂)(x - 1)`, `f = 0`; reproduced exactly by P1.
    LinearPatch,
    /// `u_i = X_i(x) sin(πy)` with unit interface flux `sin(πy)`.
    SmoothTransmission,
}

impl FromStr for ManufacturedKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "linear_patch" => Ok(ManufacturedKind::LinearPatch),
            "smooth_transmission" => Ok(ManufacturedKind::SmoothTransmission),
            other => Err(Error::Config(format!(
                "unknown manufactured solution `{other}`; expected linear_patch or smooth_transmission"
            ))),
        }
    }
}

impl fmt::Display for ManufacturedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ManufacturedKind::LinearPatch => "linear_patch",
            ManufacturedKind::SmoothTransmission => "smooth_transmission",
        })
    }
}

/// Exact solution of the transmission problem with `k₁`, `k₂` attached to the
/// physical subdomains Ω₁ (x < 1) and Ω₂ (x > 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Manufactured {
    pub kind: ManufacturedKind,
    pub k1: f64,
    pub k2: f64,
}

impl Manufactured {
    pub fn new(kind: ManufacturedKind, k1: f64, k2: f64) -> Self {
        Self { kind, k1, k2 }
    }

    pub fn k(&self, id: SubdomainId) -> f64 {
        match id {
            SubdomainId::One => self.k1,
            SubdomainId::Two => self.k2,
        }
    }

    /// `X₂` and its first two derivatives at `x`.
    fn profile_two(&self, x: f64) -> [f64; 3] {
        let c = 1.0 / self.k1 + 1.0 / self.k2;
        let d = x - 1.0;
        [
            1.0 / self.k1 + d / self.k2 - c * d * d,
            1.0 / self.k2 - 2.0 * c * d,
            -2.0 * c,
        ]
    }

    pub fn value(&self, id: SubdomainId, p: Point2) -> f64 {
        match (self.kind, id) {
            (ManufacturedKind::LinearPatch, SubdomainId::One) => p.x,
            (ManufacturedKind::LinearPatch, SubdomainId::Two) => {
                1.0 + self.k1 / self.k2 * (p.x - 1.0)
            }
            (ManufacturedKind::SmoothTransmission, SubdomainId::One) => {
                p.x / self.k1 * (PI * p.y).sin()
            }
            (ManufacturedKind::SmoothTransmission, SubdomainId::Two) => {
                self.profile_two(p.x)[0] * (PI * p.y).sin()
            }
        }
    }

    pub fn gradient(&self, id: SubdomainId, p: Point2) -> Point2 {
        match (self.kind, id) {
            (ManufacturedKind::LinearPatch, SubdomainId::One) => Point2::new(1.0, 0.0),
            (ManufacturedKind::LinearPatch, SubdomainId::Two) => {
                Point2::new(self.k1 / self.k2, 0.0)
            }
            (ManufacturedKind::SmoothTransmission, id) => {
                let (s, c) = (PI * p.y).sin_cos();
                let [x, dx] = match id {
                    SubdomainId::One => [p.x / self.k1, 1.0 / self.k1],
                    SubdomainId::Two => {
                        let q = self.profile_two(p.x);
                        [q[0], q[1]]
                    }
                };
                Point2::new(dx * s, PI * x * c)
            }
        }
    }

    /// `f = -k Δu` on subdomain `id`.
    pub fn load(&self, id: SubdomainId, p: Point2) -> f64 {
        match (self.kind, id) {
            (ManufacturedKind::LinearPatch, _) => 0.0,
            (ManufacturedKind::SmoothTransmission, SubdomainId::One) => {
                PI * PI * p.x * (PI * p.y).sin()
            }
            (ManufacturedKind::SmoothTransmission, SubdomainId::Two) => {
                let [x, _, dxx] = self.profile_two(p.x);
                -self.k2 * (dxx - PI * PI * x) * (PI * p.y).sin()
            }
        }
    }

    /// Interface flux `k ∇u · n` for the unit normal `n`, evaluated from
    /// subdomain `id`.
    pub fn flux(&self, id: SubdomainId, p: Point2, n: Point2) -> f64 {
        self.k(id) * self.gradient(id, p).dot(n)
    }
}
