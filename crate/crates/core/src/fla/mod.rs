//! Fitness landscape analysis: neighbourhood manipulators, random and
//! adaptive walks, and trajectory-based landscape measures.

mod battery;
mod landscape;
mod measures;
mod walk;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use battery::{fla_battery, FlaOutcome, FlaReport, FlaSettings, MEASURE_LABELS};
pub use landscape::{FnLandscape, Landscape, SmoothLandscape};
pub use measures::{auto_correlation, correlation_length, information_analysis, AutoCorrelation, InformationAnalysis};
pub use walk::{adaptive_walk, random_start, random_walk, walk_rng, WalkKind, WalkTrace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManipulatorKind {
    PolynomialOnePosition,
    PolynomialAllPosition,
    UniformOnePosition,
}

/// A neighbourhood operator on real vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manipulator {
    pub kind: ManipulatorKind,
    /// Distribution index of the polynomial step; larger means smaller steps.
    pub contiguity: f64,
    /// Scale of a polynomial step, whose raw value lies in `[-1, 1]`.
    pub max_manipulation: f64,
    /// Range a uniform manipulator draws replacement values from.
    pub uniform_bounds: (f64, f64),
}

/// What a mutation changed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Move {
    /// Only `index` changed; it held `old` before.
    One { index: usize, old: f64 },
    /// Every coordinate may have changed.
    All,
}

impl Manipulator {
    const DEFAULT_MAX_MANIPULATION: f64 = 1.0;
    const DEFAULT_UNIFORM_BOUNDS: (f64, f64) = (-3.0, 3.0);

    fn with_kind(kind: ManipulatorKind, contiguity: f64) -> Self {
        Self {
            kind,
            contiguity,
            max_manipulation: Self::DEFAULT_MAX_MANIPULATION,
            uniform_bounds: Self::DEFAULT_UNIFORM_BOUNDS,
        }
    }

    pub fn polynomial_one_position(contiguity: f64) -> Self {
        Self::with_kind(ManipulatorKind::PolynomialOnePosition, contiguity)
    }

    pub fn polynomial_all_position(contiguity: f64) -> Self {
        Self::with_kind(ManipulatorKind::PolynomialAllPosition, contiguity)
    }

    pub fn uniform_one_position() -> Self {
        Self::with_kind(ManipulatorKind::UniformOnePosition, 0.0)
    }

    /// Short name such as `poly-1-15`, `poly-all-2` or `uni-1`.
    pub fn name(&self) -> String {
        match self.kind {
            ManipulatorKind::PolynomialOnePosition => format!("poly-1-{}", self.contiguity),
            ManipulatorKind::PolynomialAllPosition => format!("poly-all-{}", self.contiguity),
            ManipulatorKind::UniformOnePosition => "uni-1".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.max_manipulation > 0.0 && self.max_manipulation.is_finite()) {
            return Err(Error::Config(format!("max manipulation must be positive, got {}", self.max_manipulation)));
        }
        match self.kind {
            ManipulatorKind::UniformOnePosition => {
                let (lo, hi) = self.uniform_bounds;
                if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                    return Err(Error::Config(format!("invalid uniform bounds [{lo}, {hi}]")));
                }
            }
            _ => {
                if !(self.contiguity >= 0.0 && self.contiguity.is_finite()) {
                    return Err(Error::Config(format!("contiguity must be >= 0, got {}", self.contiguity)));
                }
            }
        }
        Ok(())
    }

    /// Mutates `x` in place and reports what changed.
    pub fn mutate<R: Rng + ?Sized>(&self, x: &mut [f64], rng: &mut R) -> Move {
        match self.kind {
            ManipulatorKind::PolynomialOnePosition => {
                let index = rng.random_range(0..x.len());
                let old = x[index];
                x[index] += polynomial_delta(rng.random(), self.contiguity) * self.max_manipulation;
                Move::One { index, old }
            }
            ManipulatorKind::PolynomialAllPosition => {
                for v in x.iter_mut() {
                    *v += polynomial_delta(rng.random(), self.contiguity) * self.max_manipulation;
                }
                Move::All
            }
            ManipulatorKind::UniformOnePosition => {
                let index = rng.random_range(0..x.len());
                let old = x[index];
                let (lo, hi) = self.uniform_bounds;
                x[index] = lo + (hi - lo) * rng.random::<f64>();
                Move::One { index, old }
            }
        }
    }
}

impl fmt::Display for Manipulator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Manipulator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let invalid = || {
            Error::Config(format!(
                "unknown manipulator `{s}`; valid names are poly-1-<contiguity>, poly-all-<contiguity> and uni-1"
            ))
        };
        let contiguity = |c: &str| -> Result<f64> {
            let c: f64 = c.parse().map_err(|_| invalid())?;
            if c >= 0.0 && c.is_finite() {
                Ok(c)
            } else {
                Err(invalid())
            }
        };
        if s == "uni-1" {
            Ok(Self::uniform_one_position())
        } else if let Some(c) = s.strip_prefix("poly-1-") {
            Ok(Self::polynomial_one_position(contiguity(c)?))
        } else if let Some(c) = s.strip_prefix("poly-all-") {
            Ok(Self::polynomial_all_position(contiguity(c)?))
        } else {
            Err(invalid())
        }
    }
}

/// Polynomial mutation step for a uniform draw `u` in `[0, 1)`, in `[-1, 1]`.
pub fn polynomial_delta(u: f64, contiguity: f64) -> f64 {
    let e = 1.0 / (contiguity + 1.0);
    if u < 0.5 {
        (2.0 * u).powf(e) - 1.0
    } else {
        1.0 - (2.0 * (1.0 - u)).powf(e)
    }
}
