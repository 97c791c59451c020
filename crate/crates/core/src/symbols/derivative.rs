//! Multi-indices and derivative evaluation for symbols.

use std::fmt;

use num_complex::Complex64;

use crate::grid::MAX_DIM;

/// `alpha = (alpha_1, ..., alpha_d)` with order `n(alpha) = sum alpha_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    d: usize,
    c: [usize; MAX_DIM],
}

impl MultiIndex {
    pub fn new(components: &[usize]) -> Self {
        assert!((1..=MAX_DIM).contains(&components.len()), "multi-index dimension must be 1..=3");
        let mut c = [0; MAX_DIM];
        c[..components.len()].copy_from_slice(components);
        Self { d: components.len(), c }
    }

    pub fn zero(d: usize) -> Self {
        Self::new(&vec![0; d])
    }

    /// `alpha_axis = order`, all other components zero.
    pub fn axis(d: usize, axis: usize, order: usize) -> Self {
        let mut c = vec![0; d];
        c[axis] = order;
        Self::new(&c)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn components(&self) -> &[usize] {
        &self.c[..self.d]
    }

    pub fn order(&self) -> usize {
        self.components().iter().sum()
    }

    /// `alpha - e_axis`, or `None` when that component is already zero.
    pub fn lowered(&self, axis: usize) -> Option<Self> {
        if self.c[axis] == 0 {
            return None;
        }
        let mut out = *self;
        out.c[axis] -= 1;
        Some(out)
    }

    /// Every multi-index of dimension `d` with order at most `max_order`,
    /// sorted by order and then lexicographically (descending first component).
    pub fn up_to_order(d: usize, max_order: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for order in 0..=max_order {
            let mut comps = vec![0; d];
            collect_with_order(d, order, 0, &mut comps, &mut out);
        }
        out
    }
}

fn collect_with_order(d: usize, remaining: usize, axis: usize, comps: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
    if axis == d - 1 {
        comps[axis] = remaining;
        out.push(MultiIndex::new(comps));
        return;
    }
    for take in (0..=remaining).rev() {
        comps[axis] = take;
        collect_with_order(d, remaining - take, axis + 1, comps, out);
    }
}

impl fmt::Display for MultiIndex {
    /// Dash-joined components, e.g. `1-0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components().iter().map(|a| a.to_string()).collect();
        write!(f, "{}", parts.join("-"))
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Tensor-product central difference of order `alpha` with step `h`.
///
/// Along an axis of order `n` the stencil is
/// `h^-n sum_k (-1)^k C(n,k) f(xi + (n/2 - k) h)`.
pub fn central_difference<F>(f: &F, xi: &[f64], alpha: &MultiIndex, h: f64) -> Complex64
where
    F: Fn(&[f64]) -> Complex64 + ?Sized,
{
    let d = xi.len();
    let orders = alpha.components();
    let mut point = [0.0; MAX_DIM];
    let mut k = [0usize; MAX_DIM];
    let mut acc = Complex64::new(0.0, 0.0);
    loop {
        let mut weight = 1.0;
        for axis in 0..d {
            let n = orders[axis];
            let ki = k[axis];
            point[axis] = xi[axis] + (n as f64 / 2.0 - ki as f64) * h;
            weight *= binomial(n, ki) * if ki % 2 == 0 { 1.0 } else { -1.0 };
        }
        acc += f(&point[..d]) * weight;

        // advance the odometer over stencil offsets
        let mut axis = 0;
        loop {
            if axis == d {
                return acc / h.powi(alpha.order() as i32);
            }
            if k[axis] < orders[axis] {
                k[axis] += 1;
                break;
            }
            k[axis] = 0;
            axis += 1;
        }
    }
}

/// Central differences at steps `h` and `h/2` combined by one Richardson step.
///
/// The base step is `max(|xi|, 1) * 1e-3`. The second element of the result is
/// the difference between the two raw estimates, a cheap consistency gauge.
pub fn richardson_derivative<F>(f: &F, xi: &[f64], alpha: &MultiIndex) -> (Complex64, f64)
where
    F: Fn(&[f64]) -> Complex64 + ?Sized,
{
    let norm = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    let h = norm.max(1.0) * 1e-3;
    let coarse = central_difference(f, xi, alpha, h);
    let fine = central_difference(f, xi, alpha, h / 2.0);
    ((fine * 4.0 - coarse) / 3.0, (fine - coarse).norm())
}
