//! Littlewood-Paley bump and the dyadic partition of unity built from it.

use crate::error::{Error, Result};
use crate::symbols::cutoff::bump;

/// Annular bump `Theta(xi) = exp(-1/(1 - log2(|xi|)^2))`, supported in `1/2 < |xi| < 2`.
pub fn big_theta(xi: &[f64]) -> f64 {
    let r = norm(xi);
    if r == 0.0 {
        return 0.0;
    }
    bump(r.log2())
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `theta = Theta / sum_j Theta(2^-j .)`, with `theta(0) = 0`.
///
/// In the log-radius `t = log2|xi|` the two-sided sum is `sum_j b(t - j)`,
/// which only has the terms `j = floor(t)` and `floor(t) + 1`.
pub fn theta(xi: &[f64]) -> f64 {
    let r = norm(xi);
    if r == 0.0 {
        return 0.0;
    }
    theta_at_log_radius(r.log2())
}

fn theta_at_log_radius(t: f64) -> f64 {
    let num = bump(t);
    if num == 0.0 {
        return 0.0;
    }
    let j0 = t.floor();
    let den = bump(t - j0) + bump(t - j0 - 1.0);
    num / den
}

/// `theta(2^-j xi)`.
pub fn theta_scaled(xi: &[f64], j: i32) -> f64 {
    let r = norm(xi);
    if r == 0.0 {
        return 0.0;
    }
    theta_at_log_radius(r.log2() - j as f64)
}

/// Dyadic partition restricted to scales `j_min ..= j_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LPPartition {
    pub j_min: i32,
    pub j_max: i32,
}

impl LPPartition {
    pub fn new(j_min: i32, j_max: i32) -> Result<Self> {
        if j_min > j_max {
            return Err(Error::InvalidParameter(format!("empty scale range [{j_min}, {j_max}]")));
        }
        if j_min > 0 || j_max < 0 {
            return Err(Error::InvalidParameter(format!("scale range [{j_min}, {j_max}] must contain 0")));
        }
        Ok(Self { j_min, j_max })
    }

    pub fn big_theta(&self, xi: &[f64]) -> f64 {
        big_theta(xi)
    }

    pub fn theta(&self, xi: &[f64]) -> f64 {
        theta(xi)
    }

    /// `sum_{j = j_min}^{j_max} theta(2^-j xi)`.
    pub fn sum(&self, xi: &[f64]) -> f64 {
        (self.j_min..=self.j_max).map(|j| theta_scaled(xi, j)).sum()
    }

    /// Radii `[2^{j_min+1}, 2^{j_max-1}]` on which the truncated sum is exactly one.
    pub fn validity_shell(&self) -> (f64, f64) {
        (2f64.powi(self.j_min + 1), 2f64.powi(self.j_max - 1))
    }
}
