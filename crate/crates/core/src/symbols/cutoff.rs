//! The mollified ball indicator `chi = 1_{B(0,2)} * omega_eps`.
//!
//! `omega_eps(t) = eps^-d prod_i omega(t_i / eps)` with `omega` the unit-mass
//! bump `exp(-1/(1-t^2))` on `(-1, 1)`. Integrating the last mollifier axis in
//! closed form against the ball turns `chi` into an `(d-1)`-fold product
//! quadrature of differences of the mollifier CDF.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const CDF_CELLS: usize = 4096;
const SIMPSON_SUB: usize = 8;
/// Midpoint nodes per mollifier axis in `d >= 2`.
pub const QUADRATURE_NODES: usize = 256;

/// Unnormalized bump `exp(-1/(1-t^2))` on `(-1, 1)`.
pub fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

struct CdfTable {
    values: Vec<f64>,
    mass: f64,
}

fn cdf_table() -> &'static CdfTable {
    static TABLE: OnceLock<CdfTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let h = 2.0 / CDF_CELLS as f64;
        let sub = h / SIMPSON_SUB as f64;
        let mut values = Vec::with_capacity(CDF_CELLS + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for cell in 0..CDF_CELLS {
            let a = -1.0 + cell as f64 * h;
            let mut s = 0.0;
            for q in 0..SIMPSON_SUB {
                let x0 = a + q as f64 * sub;
                s += (bump(x0) + 4.0 * bump(x0 + sub / 2.0) + bump(x0 + sub)) * sub / 6.0;
            }
            acc += s;
            values.push(acc);
        }
        let mass = acc;
        for v in &mut values {
            *v /= mass;
        }
        CdfTable { values, mass }
    })
}

/// Unit-mass mollifier density `omega`.
pub fn mollifier(t: f64) -> f64 {
    bump(t) / cdf_table().mass
}

/// `int_{-inf}^{s} omega`, by cubic Hermite interpolation of a tabulated CDF.
pub fn mollifier_cdf(s: f64) -> f64 {
    if s <= -1.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let table = cdf_table();
    let h = 2.0 / CDF_CELLS as f64;
    let pos = (s + 1.0) / h;
    let i = (pos.floor() as usize).min(CDF_CELLS - 1);
    let t = pos - i as f64;
    let x0 = -1.0 + i as f64 * h;
    let (f0, f1) = (table.values[i], table.values[i + 1]);
    let (m0, m1) = (mollifier(x0) * h, mollifier(x0 + h) * h);
    let t2 = t * t;
    let t3 = t2 * t;
    let v = (2.0 * t3 - 3.0 * t2 + 1.0) * f0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * f1 + (t3 - t2) * m1;
    v.clamp(0.0, 1.0)
}

/// Smooth cutoff equal to 1 on `B(0,1)` and 0 outside `B(0,3)`.
#[derive(Debug, Clone)]
pub struct CutoffChi {
    eps: f64,
    d: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl CutoffChi {
    pub fn new(eps: f64, d: usize) -> Result<Self> {
        if !(eps > 0.0 && eps <= 0.5) {
            return Err(Error::InvalidParameter(format!("mollifier width {eps} outside (0, 1/2]")));
        }
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidParameter(format!("dimension {d} outside 1..=3")));
        }
        let step = 2.0 * eps / QUADRATURE_NODES as f64;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for q in 0..QUADRATURE_NODES {
            let t = -eps + (q as f64 + 0.5) * step;
            let w = mollifier(t / eps);
            if w > 0.0 {
                nodes.push(t);
                weights.push(w);
            }
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Ok(Self { eps, d, nodes, weights })
    }

    /// The default width `eps = 1/4`.
    pub fn standard(d: usize) -> Result<Self> {
        Self::new(0.25, d)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    fn cdf_eps(&self, y: f64) -> f64 {
        mollifier_cdf(y / self.eps)
    }

    /// Mollifier mass of the chord `|xi_last - t_last| < sqrt(4 - rest^2)`.
    fn chord(&self, last: f64, rest_sq: f64) -> f64 {
        let c2 = 4.0 - rest_sq;
        if c2 <= 0.0 {
            return 0.0;
        }
        let c = c2.sqrt();
        self.cdf_eps(last + c) - self.cdf_eps(last - c)
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        debug_assert_eq!(xi.len(), self.d);
        let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        let reach = self.eps * (self.d as f64).sqrt();
        if r + reach < 2.0 {
            return 1.0;
        }
        if r - reach >= 2.0 {
            return 0.0;
        }
        // The chord is taken along the largest coordinate of xi. Its length then
        // never reaches zero where the mollifier density is nonzero, so the
        // remaining quadrature sees a smooth integrand.
        let mut p = [0.0; 3];
        p[..self.d].copy_from_slice(xi);
        let lead = (0..self.d).max_by(|&a, &b| p[a].abs().total_cmp(&p[b].abs())).unwrap_or(0);
        p.swap(lead, self.d - 1);
        let v = match self.d {
            1 => self.chord(p[0], 0.0),
            2 => {
                let mut acc = 0.0;
                for (t, w) in self.nodes.iter().zip(&self.weights) {
                    let a = p[0] - t;
                    acc += w * self.chord(p[1], a * a);
                }
                acc
            }
            _ => {
                let mut acc = 0.0;
                for (t0, w0) in self.nodes.iter().zip(&self.weights) {
                    let a = p[0] - t0;
                    let a2 = a * a;
                    if a2 >= 4.0 {
                        continue;
                    }
                    let mut inner = 0.0;
                    for (t1, w1) in self.nodes.iter().zip(&self.weights) {
                        let b = p[1] - t1;
                        inner += w1 * self.chord(p[2], a2 + b * b);
                    }
                    acc += w0 * inner;
                }
                acc
            }
        };
        v.clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_is_symmetric_and_normalized() {
        assert!((mollifier_cdf(0.0) - 0.5).abs() < 1e-14);
        assert_eq!(mollifier_cdf(-1.5), 0.0);
        assert_eq!(mollifier_cdf(1.0), 1.0);
        for s in [0.1, 0.37, 0.9] {
            assert!((mollifier_cdf(s) + mollifier_cdf(-s) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn cdf_matches_fine_quadrature() {
        // independent trapezoid quadrature of the bump at 2e5 panels
        let panels = 200_000;
        let total = {
            let h = 2.0 / panels as f64;
            (0..panels).map(|i| bump(-1.0 + (i as f64 + 0.5) * h) * h).sum::<f64>()
        };
        for s in [-0.8, -0.3, 0.25, 0.6] {
            let m = ((s + 1.0) / 2.0 * panels as f64) as usize;
            let h = (s + 1.0) / m as f64;
            let part: f64 = (0..m).map(|i| bump(-1.0 + (i as f64 + 0.5) * h) * h).sum();
            assert!((mollifier_cdf(s) - part / total).abs() < 1e-9, "s={s}");
        }
    }

    #[test]
    fn width_is_validated() {
        assert!(CutoffChi::new(0.0, 1).is_err());
        assert!(CutoffChi::new(0.6, 1).is_err());
        assert!(CutoffChi::new(0.5, 1).is_ok());
    }

    #[test]
    fn edge_value_in_one_dimension() {
        let chi = CutoffChi::standard(1).unwrap();
        assert!((chi.eval(&[2.0]) - 0.5).abs() < 1e-12);
        assert!((chi.eval(&[-2.0]) - 0.5).abs() < 1e-12);
        assert!((chi.eval(&[0.5]) - 1.0).abs() < 1e-10);
        assert_eq!(chi.eval(&[5.0]), 0.0);
    }

    #[test]
    fn plateau_and_support_in_higher_dimensions() {
        for d in 2..=3 {
            let chi = CutoffChi::standard(d).unwrap();
            let mut p = vec![0.0; d];
            p[0] = 0.5;
            assert!((chi.eval(&p) - 1.0).abs() < 1e-10);
            p[0] = 5.0;
            assert_eq!(chi.eval(&p), 0.0);
            // on the sphere of radius 2 the value lies strictly inside (0, 1)
            p[0] = 2.0;
            let v = chi.eval(&p);
            assert!(v > 0.0 && v < 1.0);
        }
    }
}
