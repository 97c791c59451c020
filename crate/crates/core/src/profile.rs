//! Named radial profiles used for the multiplication function `b`, test
//! sequence envelopes and H-measure weights.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileShape {
    /// `exp(1 - 1/(1 - rho^2))`, smooth with peak value 1.
    Bump,
    /// `cos^2(pi rho / 2)`, continuously differentiable but not C^2.
    CosineBump,
    /// The constant `amplitude` on the whole box.
    Constant,
}

/// `amplitude * shape(|x - center| / width)`, vanishing for `|x - center| >= width`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    pub shape: ProfileShape,
    #[serde(default)]
    pub center: Vec<f64>,
    #[serde(default = "one")]
    pub width: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

fn smooth_bump(rho: f64) -> f64 {
    if rho >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - rho * rho)).exp()
    }
}

/// `max |d/drho exp(1 - 1/(1 - rho^2))|`, found by a fine scan.
fn smooth_bump_slope() -> f64 {
    static SLOPE: OnceLock<f64> = OnceLock::new();
    *SLOPE.get_or_init(|| {
        let m = 200_000;
        (1..m)
            .map(|i| {
                let r = i as f64 / m as f64;
                let q = 1.0 - r * r;
                smooth_bump(r) * 2.0 * r / (q * q)
            })
            .fold(0.0, f64::max)
    })
}

impl Profile {
    pub fn new(shape: ProfileShape, center: Vec<f64>, width: f64) -> Self {
        Self { shape, center, width, amplitude: 1.0 }
    }

    pub fn bump(center: Vec<f64>, width: f64) -> Self {
        Self::new(ProfileShape::Bump, center, width)
    }

    pub fn cosine_bump(center: Vec<f64>, width: f64) -> Self {
        Self::new(ProfileShape::CosineBump, center, width)
    }

    pub fn constant(d: usize, value: f64) -> Self {
        Self { shape: ProfileShape::Constant, center: vec![0.0; d], width: 1.0, amplitude: value }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let rho = || {
            let r2: f64 = x
                .iter()
                .enumerate()
                .map(|(i, &xi)| {
                    let c = self.center.get(i).copied().unwrap_or(0.0);
                    (xi - c) * (xi - c)
                })
                .sum();
            r2.sqrt() / self.width
        };
        let v = match self.shape {
            ProfileShape::Constant => 1.0,
            ProfileShape::Bump => smooth_bump(rho()),
            ProfileShape::CosineBump => {
                let r = rho();
                if r >= 1.0 {
                    0.0
                } else {
                    (std::f64::consts::FRAC_PI_2 * r).cos().powi(2)
                }
            }
        };
        self.amplitude * v
    }

    /// Lipschitz constant of the profile.
    pub fn lipschitz(&self) -> f64 {
        let slope = match self.shape {
            ProfileShape::Constant => return 0.0,
            ProfileShape::Bump => smooth_bump_slope(),
            ProfileShape::CosineBump => std::f64::consts::FRAC_PI_2,
        };
        self.amplitude.abs() * slope / self.width
    }

    pub fn sup_norm(&self) -> f64 {
        self.amplitude.abs()
    }

    /// Radius of the support around the center; `None` for the constant profile.
    pub fn support_radius(&self) -> Option<f64> {
        match self.shape {
            ProfileShape::Constant => None,
            _ => Some(self.width),
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.shape != ProfileShape::Constant && self.center.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: self.center.len() });
        }
        if !(self.width.is_finite() && self.width > 0.0) || !self.amplitude.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "profile width {} and amplitude {} must be finite, width positive",
                self.width, self.amplitude
            )));
        }
        Ok(())
    }

    /// Require the support to stay at least `L/4` away from the box boundary.
    pub fn check_margin(&self, grid: &Grid) -> Result<()> {
        self.validate(grid.dim())?;
        let Some(w) = self.support_radius() else {
            return Ok(());
        };
        let limit = 0.75 * grid.half_width();
        let reach = self.center.iter().fold(0.0f64, |m, c| m.max(c.abs())) + w;
        if reach > limit {
            return Err(Error::Support(format!("profile reaches {reach} from the origin, the margin allows {limit}")));
        }
        Ok(())
    }

    pub fn sample(&self, grid: &Grid) -> Result<SampledField> {
        self.validate(grid.dim())?;
        Ok(grid.sample_spatial(|x| Complex64::new(self.eval(x), 0.0)))
    }
}
