//! Dyadic-annulus derivative bounds for multiplier symbols.
//!
//! For a symbol `a`, every multi-index with `n(alpha) <= kappa` and every
//! radius `r = 2^j` in a finite range, [`mikhlin_constant`] computes
//!
//! ```text
//! ratio(alpha, j) = sqrt( int_{r/2 <= |xi| <= r} |D^alpha a|^2 dxi / r^{d - 2 n(alpha)} )
//! ```
//!
//! and reports `k_hat = max ratio`, the smallest constant for which the
//! annulus bound holds over the tested scales. [`dyadic_scaling_check`] does
//! the same for the dyadic pieces `a_j` over their whole support.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::report::{fmt_num, Table};
use crate::symbols::{dyadic_piece, CutoffChi, LPPartition, MultiIndex, SymbolSpec};

pub const MIN_RESOLUTION: usize = 32;

/// `kappa = floor(d/2) + 1`.
pub fn default_kappa(d: usize) -> usize {
    d / 2 + 1
}

/// Midpoint rule over the cube `[-half, half]^d` split into `resolution^d` cells,
/// keeping cells whose centers satisfy `keep(|center|)`.
///
/// Rows along the first axis are summed independently and then combined in
/// index order, so the result does not depend on the thread count.
fn cell_quadrature<K, F>(d: usize, half: f64, resolution: usize, keep: K, f: F) -> Result<(f64, usize)>
where
    K: Fn(f64) -> bool + Sync,
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let h = 2.0 * half / resolution as f64;
    let center = |i: usize| -half + (i as f64 + 0.5) * h;
    let inner = resolution.pow((d - 1) as u32);
    let rows: Vec<Result<(f64, usize)>> = (0..resolution)
        .into_par_iter()
        .map(|i0| {
            let mut acc = 0.0;
            let mut count = 0;
            let mut p = [0.0; 3];
            p[0] = center(i0);
            for rest in 0..inner {
                let mut r = rest;
                for axis in (1..d).rev() {
                    p[axis] = center(r % resolution);
                    r /= resolution;
                }
                let norm = p[..d].iter().map(|x| x * x).sum::<f64>().sqrt();
                if !keep(norm) {
                    continue;
                }
                count += 1;
                acc += f(&p[..d])?;
            }
            Ok((acc, count))
        })
        .collect();
    let mut total = 0.0;
    let mut cells = 0;
    for r in rows {
        let (a, c) = r?;
        total += a;
        cells += c;
    }
    Ok((total * h.powi(d as i32), cells))
}

/// `int_{r/2 <= |xi| <= r} |D^alpha a(xi)|^2 dxi` on a `resolution^d` lattice over `[-r, r]^d`.
pub fn annulus_integral(a: &SymbolSpec, alpha: &MultiIndex, r: f64, resolution: usize) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius {r} must be positive")));
    }
    if resolution < MIN_RESOLUTION {
        return Err(Error::InvalidParameter(format!("resolution {resolution} below the minimum {MIN_RESOLUTION}")));
    }
    if alpha.order() > a.kappa_max() {
        return Err(Error::DerivativeOrder { order: alpha.order(), max: a.kappa_max() });
    }
    let (value, cells) = cell_quadrature(
        a.dim(),
        r,
        resolution,
        |n| n >= r / 2.0 && n <= r,
        |xi| Ok(a.derivative(xi, alpha)?.norm_sqr()),
    )?;
    if cells == 0 {
        return Err(Error::Quadrature {
            alpha: alpha.components().to_vec(),
            r,
            reason: format!("no cell centers inside the annulus at resolution {resolution}"),
        });
    }
    Ok(value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MikhlinEntry {
    pub alpha: MultiIndex,
    pub j: i32,
    pub r: f64,
    pub integral: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MikhlinReport {
    pub kappa: usize,
    pub entries: Vec<MikhlinEntry>,
    pub k_hat: f64,
}

impl MikhlinReport {
    /// Ratios for one multi-index, in increasing `j`.
    pub fn ratios(&self, alpha: &MultiIndex) -> Vec<f64> {
        self.entries.iter().filter(|e| &e.alpha == alpha).map(|e| e.ratio).collect()
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["alpha", "j", "r", "integral", "ratio"]);
        for e in &self.entries {
            t.push(vec![e.alpha.to_string(), e.j.to_string(), fmt_num(e.r), fmt_num(e.integral), fmt_num(e.ratio)]);
        }
        t.push(vec!["k_hat".into(), String::new(), String::new(), String::new(), fmt_num(self.k_hat)]);
        t
    }
}

/// Largest annulus ratio over `n(alpha) <= kappa` and `r = 2^j`, `j` in `j_range`.
pub fn mikhlin_constant(a: &SymbolSpec, kappa: usize, j_range: (i32, i32), resolution: usize) -> Result<MikhlinReport> {
    if kappa > a.kappa_max() {
        return Err(Error::DerivativeOrder { order: kappa, max: a.kappa_max() });
    }
    let (j_min, j_max) = j_range;
    if j_min > j_max {
        return Err(Error::InvalidParameter(format!("empty scale range [{j_min}, {j_max}]")));
    }
    let d = a.dim() as i32;
    let mut entries = Vec::new();
    for alpha in MultiIndex::up_to_order(a.dim(), kappa) {
        for j in j_min..=j_max {
            let r = 2f64.powi(j);
            let integral = annulus_integral(a, &alpha, r, resolution)?;
            let scale = r.powi(d - 2 * alpha.order() as i32);
            entries.push(MikhlinEntry { alpha, j, r, integral, ratio: (integral / scale).sqrt() });
        }
    }
    let k_hat = entries.iter().fold(0.0, |m: f64, e| m.max(e.ratio));
    Ok(MikhlinReport { kappa, entries, k_hat })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DyadicScalingRow {
    pub j: i32,
    pub alpha: MultiIndex,
    pub lhs: f64,
    pub bound_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DyadicScalingTable {
    pub rows: Vec<DyadicScalingRow>,
    /// `sup_j bound_ratio` over all rows.
    pub sup_ratio: f64,
}

impl DyadicScalingTable {
    pub fn bound_ratios(&self, alpha: &MultiIndex) -> Vec<f64> {
        self.rows.iter().filter(|r| &r.alpha == alpha).map(|r| r.bound_ratio).collect()
    }

    /// `max / min` of the bound ratios for one multi-index.
    pub fn spread(&self, alpha: &MultiIndex) -> f64 {
        let v = self.bound_ratios(alpha);
        let max = v.iter().cloned().fold(f64::MIN, f64::max);
        let min = v.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["j", "alpha", "lhs", "bound_ratio"]);
        for r in &self.rows {
            t.push(vec![r.j.to_string(), r.alpha.to_string(), fmt_num(r.lhs), fmt_num(r.bound_ratio)]);
        }
        t.push(vec!["sup".into(), String::new(), String::new(), fmt_num(self.sup_ratio)]);
        t
    }
}

/// `int |D^alpha a_j|^2` over the support annulus of `a_j`, normalized by `2^{j(d - 2 n(alpha))}`.
pub fn dyadic_scaling_check(
    a: &SymbolSpec,
    chi: &Arc<CutoffChi>,
    part: &LPPartition,
    j_range: (i32, i32),
    kappa: usize,
    resolution: usize,
) -> Result<DyadicScalingTable> {
    let (j_min, j_max) = j_range;
    if j_min < 0 || j_min > j_max {
        return Err(Error::InvalidParameter(format!("invalid dyadic range [{j_min}, {j_max}]")));
    }
    if resolution < MIN_RESOLUTION {
        return Err(Error::InvalidParameter(format!("resolution {resolution} below the minimum {MIN_RESOLUTION}")));
    }
    if kappa > a.kappa_max() {
        return Err(Error::DerivativeOrder { order: kappa, max: a.kappa_max() });
    }
    let d = a.dim() as i32;
    let mut rows = Vec::new();
    for j in j_min..=j_max {
        let piece = dyadic_piece(a, chi, part, j)?;
        let outer = 2f64.powi(j + 1);
        let inner = 2f64.powi(j - 1);
        for alpha in MultiIndex::up_to_order(a.dim(), kappa) {
            let (lhs, cells) = cell_quadrature(
                a.dim(),
                outer,
                resolution,
                |n| n >= inner && n <= outer,
                |xi| Ok(piece.derivative(xi, &alpha)?.norm_sqr()),
            )?;
            if cells == 0 {
                return Err(Error::Quadrature {
                    alpha: alpha.components().to_vec(),
                    r: outer,
                    reason: "dyadic annulus contains no cell centers".into(),
                });
            }
            let scale = 2f64.powi(j * (d - 2 * alpha.order() as i32));
            rows.push(DyadicScalingRow { j, alpha, lhs, bound_ratio: lhs / scale });
        }
    }
    let sup_ratio = rows.iter().fold(0.0, |m: f64, r| m.max(r.bound_ratio));
    Ok(DyadicScalingTable { rows, sup_ratio })
}
