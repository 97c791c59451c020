//! Periodic box discretization of R^d and its matched frequency lattice.
//!
//! The box `[-L, L)^d` carries `N` samples per axis at `x_m = -L + m dx`, and
//! the frequency lattice is `xi_k = k dxi` with `k` in `-N/2 .. N/2 - 1`. Both
//! sides are stored in lexicographic order with the last axis fastest; the
//! frequency side is centered, so position `i` on an axis holds `k = i - N/2`.
//!
//! The transform is `F(u)(xi) = int u(x) exp(-2 pi i x.xi) dx`, discretized as
//! `dx^d sum_m u(x_m) exp(-2 pi i x_m.xi_k)`. With this scaling the discrete
//! Plancherel identity reads `dx^d sum |u|^2 = dxi^d sum |F u|^2`.

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Coordinates of a lattice point, zero-padded past the grid dimension.
pub type Point = [f64; 3];

pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    d: usize,
    n: usize,
    l: f64,
}

impl Grid {
    pub fn new(d: usize, n: usize, l: f64) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&d) {
            return Err(Error::InvalidGrid(format!("dimension {d} outside 1..=3")));
        }
        if n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("N={n} must be even")));
        }
        if n < 8 {
            return Err(Error::InvalidGrid(format!("N={n} must be at least 8")));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidGrid(format!("half-width L={l} must be positive")));
        }
        Ok(Self { d, n, l })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.l
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.l / self.n as f64
    }

    pub fn dxi(&self) -> f64 {
        1.0 / (2.0 * self.l)
    }

    /// Number of lattice points, `N^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight of one spatial cell.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.d as i32)
    }

    /// Quadrature weight of one frequency cell.
    pub fn frequency_cell_volume(&self) -> f64 {
        self.dxi().powi(self.d as i32)
    }

    /// Largest `|xi|` along an axis that the lattice resolves, `N dxi / 2`.
    pub fn frequency_extent(&self) -> f64 {
        self.n as f64 * self.dxi() / 2.0
    }

    /// Per-axis lattice indices of the flat index `idx`.
    pub fn multi_index(&self, mut idx: usize) -> [usize; MAX_DIM] {
        let mut m = [0usize; MAX_DIM];
        for axis in (0..self.d).rev() {
            m[axis] = idx % self.n;
            idx /= self.n;
        }
        m
    }

    pub fn flat_index(&self, m: &[usize]) -> usize {
        m.iter().take(self.d).fold(0, |acc, &mi| acc * self.n + mi)
    }

    pub fn spatial_point(&self, idx: usize) -> Point {
        let m = self.multi_index(idx);
        let dx = self.dx();
        let mut p = [0.0; MAX_DIM];
        for axis in 0..self.d {
            p[axis] = -self.l + m[axis] as f64 * dx;
        }
        p
    }

    pub fn frequency_point(&self, idx: usize) -> Point {
        let m = self.multi_index(idx);
        let dxi = self.dxi();
        let half = (self.n / 2) as f64;
        let mut p = [0.0; MAX_DIM];
        for axis in 0..self.d {
            p[axis] = (m[axis] as f64 - half) * dxi;
        }
        p
    }

    /// Flat index of the frequency lattice point with integer coordinates `k`.
    pub fn frequency_index(&self, k: &[i64]) -> Option<usize> {
        let half = (self.n / 2) as i64;
        let mut m = [0usize; MAX_DIM];
        for axis in 0..self.d {
            let i = k[axis] + half;
            if i < 0 || i >= self.n as i64 {
                return None;
            }
            m[axis] = i as usize;
        }
        Some(self.flat_index(&m))
    }

    /// Shortest displacement between two spatial lattice points on the torus.
    pub fn cyclic_offset(&self, from: usize, to: usize) -> Point {
        let a = self.multi_index(from);
        let b = self.multi_index(to);
        let n = self.n as i64;
        let dx = self.dx();
        let mut p = [0.0; MAX_DIM];
        for axis in 0..self.d {
            let mut delta = (b[axis] as i64 - a[axis] as i64).rem_euclid(n);
            if delta >= n / 2 {
                delta -= n;
            }
            p[axis] = delta as f64 * dx;
        }
        p
    }

    pub fn sample_spatial<F>(&self, f: F) -> SampledField
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let values = (0..self.len()).map(|i| f(&self.spatial_point(i)[..self.d])).collect();
        SampledField { grid: *self, side: Side::Spatial, values }
    }

    pub fn sample_frequency<F>(&self, f: F) -> SampledField
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let values = (0..self.len()).map(|i| f(&self.frequency_point(i)[..self.d])).collect();
        SampledField { grid: *self, side: Side::Frequency, values }
    }

    pub fn zeros(&self, side: Side) -> SampledField {
        SampledField { grid: *self, side, values: vec![Complex64::new(0.0, 0.0); self.len()] }
    }

    /// Complex field with independent uniform entries in the unit square, reproducible by seed.
    pub fn random_field(&self, side: Side, seed: u64) -> SampledField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values =
            (0..self.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        SampledField { grid: *self, side, values }
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self == other
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Spatial,
    Frequency,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub grid: Grid,
    pub side: Side,
    pub values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(grid: Grid, side: Side, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, side, values })
    }

    pub fn expect_side(&self, side: Side) -> Result<()> {
        if self.side != side {
            return Err(Error::SideMismatch { expected: side, found: self.side });
        }
        Ok(())
    }

    pub fn check_compatible(&self, other: &SampledField) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        if self.side != other.side {
            return Err(Error::SideMismatch { expected: self.side, found: other.side });
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn scale(&self, c: Complex64) -> SampledField {
        self.map(|v| v * c)
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> SampledField {
        SampledField { grid: self.grid, side: self.side, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn conj(&self) -> SampledField {
        self.map(|v| v.conj())
    }

    pub fn add(&self, other: &SampledField) -> Result<SampledField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SampledField) -> Result<SampledField> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with<F>(&self, other: &SampledField, f: F) -> Result<SampledField>
    where
        F: Fn(Complex64, Complex64) -> Complex64,
    {
        self.check_compatible(other)?;
        Ok(SampledField {
            grid: self.grid,
            side: self.side,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Largest entrywise difference, `max |u - w|`.
    pub fn max_diff(&self, other: &SampledField) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }

    /// Sum of squared magnitudes in lattice order, without quadrature weight.
    pub fn sum_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }
}

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut p = planner().lock().unwrap_or_else(|e| e.into_inner());
    if inverse {
        p.plan_fft_inverse(n)
    } else {
        p.plan_fft_forward(n)
    }
}

#[inline]
fn parity_sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Apply `line_op` to every line of `values` along every axis.
fn for_each_line<F>(grid: &Grid, values: &mut [Complex64], mut line_op: F)
where
    F: FnMut(&mut [Complex64]),
{
    let n = grid.n;
    let d = grid.d;
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let outer = n.pow(axis as u32);
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * n * stride + inner;
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = values[base + i * stride];
                }
                line_op(&mut line);
                for (i, v) in line.iter().enumerate() {
                    values[base + i * stride] = *v;
                }
            }
        }
    }
}

/// Continuum-normalized forward transform onto the centered frequency lattice.
pub fn forward_ft(u: &SampledField) -> Result<SampledField> {
    u.expect_side(Side::Spatial)?;
    let grid = u.grid;
    let n = grid.n;
    let half = n / 2;
    let dx = grid.dx();
    let fft = plan(n, false);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut values = u.values.clone();
    for_each_line(&grid, &mut values, |line| {
        fft.process_with_scratch(line, &mut scratch);
        buf.copy_from_slice(line);
        for (i, slot) in line.iter_mut().enumerate() {
            let k = i as i64 - half as i64;
            *slot = buf[(i + half) % n] * (dx * parity_sign(k));
        }
    });
    Ok(SampledField { grid, side: Side::Frequency, values })
}

/// Inverse of [`forward_ft`]: `u(x_m) = dxi^d sum_k v(xi_k) exp(2 pi i x_m.xi_k)`.
pub fn inverse_ft(v: &SampledField) -> Result<SampledField> {
    v.expect_side(Side::Frequency)?;
    let grid = v.grid;
    let n = grid.n;
    let half = n / 2;
    let dxi = grid.dxi();
    let fft = plan(n, true);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut values = v.values.clone();
    for_each_line(&grid, &mut values, |line| {
        buf.copy_from_slice(line);
        for (q, slot) in line.iter_mut().enumerate() {
            let i = (q + half) % n;
            let k = i as i64 - half as i64;
            *slot = buf[i] * (dxi * parity_sign(k));
        }
        fft.process_with_scratch(line, &mut scratch);
    });
    Ok(SampledField { grid, side: Side::Spatial, values })
}

/// Axis-aligned measurement region for quadrature norms.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    All,
    /// Half-open box `[lo, hi)` per axis.
    Box(Vec<(f64, f64)>),
}

impl Region {
    /// The central box `[-L/2, L/2)^d`.
    pub fn central(grid: &Grid) -> Self {
        let h = grid.half_width() / 2.0;
        Region::Box(vec![(-h, h); grid.dim()])
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        match self {
            Region::All => true,
            Region::Box(bounds) => p.iter().zip(bounds).all(|(&x, &(lo, hi))| x >= lo && x < hi),
        }
    }

    /// Lebesgue measure of the region inside the grid's box.
    pub fn volume(&self, grid: &Grid) -> f64 {
        match self {
            Region::All => (2.0 * grid.half_width()).powi(grid.dim() as i32),
            Region::Box(b) => b.iter().map(|(lo, hi)| (hi - lo).max(0.0)).product(),
        }
    }
}

/// Midpoint-rule `L^p(V)` norm; `p = f64::INFINITY` gives the lattice maximum over `V`.
pub fn lp_norm(u: &SampledField, p: f64, region: &Region) -> Result<f64> {
    u.expect_side(Side::Spatial)?;
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("exponent p={p} must be >= 1")));
    }
    let grid = u.grid;
    if let Region::Box(b) = region {
        if b.len() != grid.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), found: b.len() });
        }
    }
    let d = grid.dim();
    let mut count = 0usize;
    let mut acc = 0.0;
    for (i, v) in u.values.iter().enumerate() {
        if !region.contains(&grid.spatial_point(i)[..d]) {
            continue;
        }
        count += 1;
        let a = v.norm();
        if p.is_infinite() {
            acc = f64::max(acc, a);
        } else {
            acc += a.powf(p);
        }
    }
    if count == 0 {
        return Err(Error::EmptyRegion);
    }
    if p.is_infinite() {
        Ok(acc)
    } else {
        Ok((grid.cell_volume() * acc).powf(1.0 / p))
    }
}

pub fn pointwise_mul(u: &SampledField, w: &SampledField) -> Result<SampledField> {
    u.zip_with(w, |a, b| a * b)
}

/// Quadrature of the product `dx^d sum u conj(w)` on the spatial side.
pub fn inner_product(u: &SampledField, w: &SampledField) -> Result<Complex64> {
    u.check_compatible(w)?;
    u.expect_side(Side::Spatial)?;
    let s: Complex64 = u.values.iter().zip(&w.values).map(|(a, b)| a * b.conj()).sum();
    Ok(s * u.grid.cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn make_grid_examples() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        assert_eq!(g.dx(), 0.25);
        assert_eq!(g.dxi(), 0.5);
        let g = Grid::new(2, 16, 4.0).unwrap();
        assert_eq!(g.dx(), 0.5);
        assert_eq!(g.dxi(), 0.125);
        assert!(Grid::new(1, 7, 1.0).is_err());
        assert!(Grid::new(1, 6, 1.0).is_err());
        assert!(Grid::new(0, 8, 1.0).is_err());
        assert!(Grid::new(4, 8, 1.0).is_err());
        assert!(Grid::new(1, 8, 0.0).is_err());
        assert!(Grid::new(1, 8, -1.0).is_err());
    }

    #[test]
    fn lattice_points() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        assert_eq!(g.spatial_point(0), [-1.0, -1.0, 0.0]);
        assert_eq!(g.spatial_point(1), [-1.0, -0.75, 0.0]);
        assert_eq!(g.frequency_point(0), [-2.0, -2.0, 0.0]);
        assert_eq!(g.frequency_index(&[0, 0]), Some(4 * 8 + 4));
        assert_eq!(g.frequency_index(&[4, 0]), None);
        assert!((g.dx() * g.dxi() * g.n() as f64 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn forward_of_constant() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let u = g.sample_spatial(|_| c(1.0));
        let f = forward_ft(&u).unwrap();
        for i in 0..g.len() {
            let k = g.frequency_point(i)[0];
            let expect = if k == 0.0 { 2.0 } else { 0.0 };
            assert!((f.values[i] - c(expect)).norm() < 1e-14);
        }
    }

    #[test]
    fn forward_of_lattice_mode() {
        let g = Grid::new(2, 16, 2.0).unwrap();
        let k = [3i64, -5];
        let xi = [k[0] as f64 * g.dxi(), k[1] as f64 * g.dxi()];
        let u = g.sample_spatial(|x| Complex64::from_polar(1.0, 2.0 * PI * (x[0] * xi[0] + x[1] * xi[1])));
        let f = forward_ft(&u).unwrap();
        let at = g.frequency_index(&k).unwrap();
        for (i, v) in f.values.iter().enumerate() {
            let expect = if i == at { 16.0 } else { 0.0 };
            assert!((v - c(expect)).norm() < 1e-12, "i={i} v={v}");
        }
    }

    #[test]
    fn forward_of_gaussian_matches_analytic_transform() {
        let g = Grid::new(1, 128, 8.0).unwrap();
        let u = g.sample_spatial(|x| c((-PI * x[0] * x[0]).exp()));
        let f = forward_ft(&u).unwrap();
        for i in 0..g.len() {
            let xi = g.frequency_point(i)[0];
            assert!((f.values[i] - c((-PI * xi * xi).exp())).norm() < 1e-8);
        }
    }

    #[test]
    fn inverse_examples() {
        let g = Grid::new(2, 8, 1.5).unwrap();
        let mut v = g.zeros(Side::Frequency);
        let zero = g.frequency_index(&[0, 0]).unwrap();
        v.values[zero] = c(3.0f64.powi(2));
        let u = inverse_ft(&v).unwrap();
        assert!(u.values.iter().all(|z| (z - c(1.0)).norm() < 1e-13));

        let mut v = g.zeros(Side::Frequency);
        let k = [1i64, -2];
        v.values[g.frequency_index(&k).unwrap()] = c(1.0);
        let u = inverse_ft(&v).unwrap();
        let dxi = g.dxi();
        for i in 0..g.len() {
            let x = g.spatial_point(i);
            let phase = 2.0 * PI * (x[0] * k[0] as f64 * dxi + x[1] * k[1] as f64 * dxi);
            let expect = Complex64::from_polar(dxi * dxi, phase);
            assert!((u.values[i] - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn side_mismatch_is_rejected() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let u = g.zeros(Side::Frequency);
        assert!(matches!(forward_ft(&u), Err(Error::SideMismatch { .. })));
        let s = g.zeros(Side::Spatial);
        assert!(inverse_ft(&s).is_err());
        assert!(pointwise_mul(&u, &s).is_err());
    }

    #[test]
    fn lp_norm_examples() {
        for d in 1..=3 {
            let g = Grid::new(d, 16, 2.0).unwrap();
            let u = g.sample_spatial(|_| c(1.0));
            let v = Region::Box(vec![(-1.0, 1.0); d]);
            let n2 = lp_norm(&u, 2.0, &v).unwrap();
            assert!((n2 - 2f64.powf(d as f64 / 2.0)).abs() < 1e-12);
            let w = g.sample_spatial(|_| Complex64::new(-3.0, 4.0));
            assert_eq!(lp_norm(&w, f64::INFINITY, &v).unwrap(), 5.0);
        }
        let g = Grid::new(1, 256, 1.0).unwrap();
        let u = g.sample_spatial(|x| c(x[0]));
        let n = lp_norm(&u, 2.0, &Region::All).unwrap();
        assert!((n - (2.0f64 / 3.0).sqrt()).abs() < 1e-3);

        let empty = Region::Box(vec![(0.001, 0.002)]);
        assert!(matches!(lp_norm(&u, 2.0, &empty), Err(Error::EmptyRegion)));
        assert!(lp_norm(&u, 0.5, &Region::All).is_err());
    }

    #[test]
    fn pointwise_examples() {
        let g = Grid::new(1, 16, 1.0).unwrap();
        let u = g.random_field(Side::Spatial, 3);
        let one = g.sample_spatial(|_| c(1.0));
        assert_eq!(pointwise_mul(&u, &one).unwrap(), u);
        let zero = g.zeros(Side::Spatial);
        assert!(pointwise_mul(&zero, &u).unwrap().values.iter().all(|v| v.norm() == 0.0));
        let xi = 2.0 * g.dxi();
        let mode = g.sample_spatial(|x| Complex64::from_polar(1.0, 2.0 * PI * xi * x[0]));
        let sq = pointwise_mul(&mode, &mode).unwrap();
        let doubled = g.sample_spatial(|x| Complex64::from_polar(1.0, 4.0 * PI * xi * x[0]));
        assert!(sq.max_diff(&doubled).unwrap() < 1e-13);
    }

    #[test]
    fn translation_is_modulation() {
        let g = Grid::new(2, 16, 2.0).unwrap();
        let u = g.random_field(Side::Spatial, 11);
        let shift = [3usize, 5usize];
        let mut shifted = g.zeros(Side::Spatial);
        for i in 0..g.len() {
            let m = g.multi_index(i);
            let src = [(m[0] + g.n() - shift[0]) % g.n(), (m[1] + g.n() - shift[1]) % g.n()];
            shifted.values[i] = u.values[g.flat_index(&src)];
        }
        let fu = forward_ft(&u).unwrap();
        let fs = forward_ft(&shifted).unwrap();
        let h = [shift[0] as f64 * g.dx(), shift[1] as f64 * g.dx()];
        for i in 0..g.len() {
            let xi = g.frequency_point(i);
            let ph = Complex64::from_polar(1.0, -2.0 * PI * (h[0] * xi[0] + h[1] * xi[1]));
            assert!((fs.values[i] - ph * fu.values[i]).norm() < 1e-12);
        }
    }
}
