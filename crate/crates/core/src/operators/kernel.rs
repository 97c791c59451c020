//! Spatial convolution kernels of compactly supported symbols, and the
//! quadratures and truncated operators built from them.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{forward_ft, inverse_ft, pointwise_mul, Grid, SampledField, Side, MAX_DIM};
use crate::report::{fmt_num, Table};
use crate::symbols::{dyadic_piece, CutoffChi, LPPartition, SymbolSpec};

/// A kernel sampled on the spatial lattice, centered at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelField {
    field: SampledField,
}

impl KernelField {
    pub fn new(field: SampledField) -> Result<Self> {
        field.expect_side(Side::Spatial)?;
        if field.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidParameter("kernel has non-finite samples".into()));
        }
        Ok(Self { field })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self { field: grid.zeros(Side::Spatial) }
    }

    pub fn grid(&self) -> &Grid {
        &self.field.grid
    }

    pub fn field(&self) -> &SampledField {
        &self.field
    }

    pub fn values(&self) -> &[Complex64] {
        &self.field.values
    }

    pub fn add(&self, other: &KernelField) -> Result<KernelField> {
        Ok(KernelField { field: self.field.add(&other.field)? })
    }

    pub fn sub(&self, other: &KernelField) -> Result<KernelField> {
        Ok(KernelField { field: self.field.sub(&other.field)? })
    }

    /// Columns `x1..xd, re, im`.
    pub fn to_table(&self) -> Table {
        let grid = self.grid();
        let d = grid.dim();
        let mut cols: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
        cols.push("re".into());
        cols.push("im".into());
        let mut t = Table::new(&cols);
        for (i, v) in self.values().iter().enumerate() {
            let p = grid.spatial_point(i);
            let mut row: Vec<String> = p[..d].iter().map(|&x| fmt_num(x)).collect();
            row.push(fmt_num(v.re));
            row.push(fmt_num(v.im));
            t.push(row);
        }
        t
    }
}

/// Require the lattice to reach `|xi| = needed`; the error names the `N` (at
/// this `L`) or the `L` (at this `N`) that would.
pub fn check_frequency_range(needed: f64, grid: &Grid) -> Result<()> {
    let available = grid.frequency_extent();
    if needed > available {
        let l = grid.half_width();
        let mut required_n = (4.0 * l * needed).ceil() as usize;
        required_n += required_n % 2;
        return Err(Error::FrequencyRange {
            needed,
            available,
            required_n,
            l,
            required_l: grid.n() as f64 / (4.0 * needed),
            n: grid.n(),
        });
    }
    Ok(())
}

/// `F^-1(a)` on the lattice, for a symbol with declared compact support.
pub fn symbol_kernel(a: &SymbolSpec, grid: &Grid) -> Result<KernelField> {
    let needed = a
        .support_radius()
        .ok_or_else(|| Error::InvalidParameter(format!("symbol `{}` has no declared compact support", a.name())))?;
    check_frequency_range(needed, grid)?;
    let samples = super::symbol_samples(a, false, grid)?;
    let v = SampledField::new(*grid, Side::Frequency, samples)?;
    KernelField::new(inverse_ft(&v)?)
}

/// `psi = F^-1(a chi)`, the kernel of the low-frequency part of `A`.
pub fn compact_part_kernel(a: &SymbolSpec, chi: &Arc<CutoffChi>, grid: &Grid) -> Result<KernelField> {
    symbol_kernel(&a.times_cutoff(chi, false), grid)
}

/// `F^-1(a_j)` for a dyadic piece supported in `|xi| <= 2^{j+1}`.
pub fn dyadic_kernel(a_j: &SymbolSpec, grid: &Grid) -> Result<KernelField> {
    symbol_kernel(a_j, grid)
}

/// `sum_{j=0}^{n} F^-1(a_j)`.
pub fn partial_kernel_sum(
    a: &SymbolSpec,
    chi: &Arc<CutoffChi>,
    part: &LPPartition,
    grid: &Grid,
    n: i32,
) -> Result<KernelField> {
    if n < 0 {
        return Err(Error::InvalidParameter(format!("partial sum index {n} must be >= 0")));
    }
    let mut acc = KernelField::zeros(grid);
    for j in 0..=n {
        let piece = dyadic_piece(a, chi, part, j)?;
        acc = acc.add(&dyadic_kernel(&piece, grid)?)?;
    }
    Ok(acc)
}

fn radius(p: &[f64]) -> f64 {
    p.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `int_{|x| > s} |k(x)| dx` by the lattice rule.
pub fn kernel_tail_mass(k: &KernelField, s: f64) -> Result<f64> {
    let grid = k.grid();
    let l = grid.half_width();
    if !(s > 0.0 && s < l) {
        return Err(Error::InvalidParameter(format!("tail radius {s} outside (0, L={l})")));
    }
    let d = grid.dim();
    let sum: f64 = k
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| radius(&grid.spatial_point(*i)[..d]) > s)
        .map(|(_, v)| v.norm())
        .sum();
    Ok(sum * grid.cell_volume())
}

/// `int_{|x| <= s} |x| |k(x)| dx` by the lattice rule.
///
/// The closed ball matches the near zone left out by [`truncated_kernel_apply`].
pub fn small_ball_moment(k: &KernelField, s: f64) -> Result<f64> {
    let grid = k.grid();
    let l = grid.half_width();
    if !(s > 0.0 && s <= l) {
        return Err(Error::InvalidParameter(format!("ball radius {s} outside (0, L={l}]")));
    }
    let d = grid.dim();
    let sum: f64 = k
        .values()
        .iter()
        .enumerate()
        .filter_map(|(i, v)| {
            let r = radius(&grid.spatial_point(i)[..d]);
            (r <= s).then(|| r * v.norm())
        })
        .sum();
    Ok(sum * grid.cell_volume())
}

/// Cyclic convolution `(k * u)(x) = dx^d sum_y k(x - y) u(y)`, via the transform.
pub fn convolve(k: &KernelField, u: &SampledField) -> Result<SampledField> {
    let kh = forward_ft(k.field())?;
    let mut uh = forward_ft(u)?;
    uh.check_compatible(&kh)?;
    for (x, m) in uh.values.iter_mut().zip(&kh.values) {
        *x *= m;
    }
    inverse_ft(&uh)
}

/// `dx^d sum_y k(x - y) (b(x) - b(y)) u(y)` over all `y`, i.e. `(B K - K B) u`.
///
/// This is the negative of the commutator `K B - B K` used elsewhere.
pub fn kernel_commutator_apply(k: &KernelField, b: &SampledField, u: &SampledField) -> Result<SampledField> {
    let ku = convolve(k, u)?;
    let kbu = convolve(k, &pointwise_mul(b, u)?)?;
    pointwise_mul(b, &ku)?.sub(&kbu)
}

/// `dx^d sum_{|x - y| > s} k(x - y) (b(x) - b(y)) u(y)` with cyclic distance.
///
/// With `s -> 0` this tends to [`kernel_commutator_apply`], which is
/// `-(K B - B K) u`. Radii beyond the largest cyclic distance give zero.
pub fn truncated_kernel_apply(k: &KernelField, b: &SampledField, s: f64, u: &SampledField) -> Result<SampledField> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("truncation radius {s} must be positive")));
    }
    truncated_sum(k, b, s, u, false)
}

/// Offsets from `x` to `y` as kernel positions plus the cyclic distance.
struct CyclicLookup {
    grid: Grid,
}

impl CyclicLookup {
    /// Kernel index of `x - y` and the squared cyclic distance.
    fn offset(&self, x: &[usize; MAX_DIM], y: &[usize; MAX_DIM]) -> (usize, f64) {
        let n = self.grid.n();
        let half = n / 2;
        let dx = self.grid.dx();
        let mut idx = 0;
        let mut r2 = 0.0;
        for axis in 0..self.grid.dim() {
            let delta = (x[axis] + n - y[axis]) % n;
            let q = (delta + half) % n;
            idx = idx * n + q;
            let signed = q as f64 - half as f64;
            r2 += (signed * dx).powi(2);
        }
        (idx, r2)
    }
}

/// Shared body of the truncated kernel operator and its adjoint.
pub(super) fn truncated_sum(
    k: &KernelField,
    b: &SampledField,
    s: f64,
    u: &SampledField,
    adjoint: bool,
) -> Result<SampledField> {
    b.check_compatible(u)?;
    u.expect_side(Side::Spatial)?;
    if !k.grid().same_as(&u.grid) {
        return Err(Error::GridMismatch);
    }
    let grid = u.grid;
    let look = CyclicLookup { grid };
    let s2 = s * s;
    let kv = k.values();
    let bv = &b.values;
    let uv = &u.values;
    let multi: Vec<[usize; MAX_DIM]> = (0..grid.len()).map(|i| grid.multi_index(i)).collect();
    let w = grid.cell_volume();
    let values = (0..grid.len())
        .into_par_iter()
        .map(|x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for y in 0..grid.len() {
                // forward: sum over y of K(x, y) u(y); adjoint: sum over y of conj(K(y, x)) u(y)
                let (from, to) = if adjoint { (y, x) } else { (x, y) };
                let (q, r2) = look.offset(&multi[from], &multi[to]);
                if r2 <= s2 {
                    continue;
                }
                let entry = kv[q] * (bv[from] - bv[to]);
                acc += if adjoint { entry.conj() } else { entry } * uv[y];
            }
            acc * w
        })
        .collect();
    SampledField::new(grid, Side::Spatial, values)
}

/// Dense matrix entry `K(x, y)` of the truncated kernel operator.
pub(super) fn truncated_entry<'a>(
    k: &'a KernelField,
    b: &'a SampledField,
    s: f64,
) -> impl Fn(usize, usize) -> Complex64 + Sync + 'a {
    let grid = *k.grid();
    let multi: Vec<[usize; MAX_DIM]> = (0..grid.len()).map(|i| grid.multi_index(i)).collect();
    let w = grid.cell_volume();
    move |x, y| {
        let look = CyclicLookup { grid };
        let (q, r2) = look.offset(&multi[x], &multi[y]);
        if r2 <= s * s {
            Complex64::new(0.0, 0.0)
        } else {
            k.values()[q] * (b.values[x] - b.values[y]) * w
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::lp_norm;
    use crate::grid::Region;
    use crate::profile::Profile;
    use crate::symbols::{builtin, Builtin};

    fn chi(d: usize) -> Arc<CutoffChi> {
        Arc::new(CutoffChi::standard(d).unwrap())
    }

    #[test]
    fn zero_symbol_gives_zero_kernels() {
        let g = Grid::new(1, 128, 2.0).unwrap();
        let z = builtin(Builtin::Zero, 1).unwrap();
        assert_eq!(compact_part_kernel(&z, &chi(1), &g).unwrap().field().max_abs(), 0.0);
        let part = LPPartition::new(-4, 4).unwrap();
        assert_eq!(partial_kernel_sum(&z, &chi(1), &part, &g, 2).unwrap().field().max_abs(), 0.0);
        let k = KernelField::zeros(&g);
        assert_eq!(kernel_tail_mass(&k, 1.0).unwrap(), 0.0);
        assert_eq!(small_ball_moment(&k, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn kernel_of_constant_has_unit_integral() {
        let g = Grid::new(1, 128, 8.0).unwrap();
        let one = builtin(Builtin::Constant(Complex64::new(1.0, 0.0)), 1).unwrap();
        let psi = compact_part_kernel(&one, &chi(1), &g).unwrap();
        let integral: Complex64 = psi.values().iter().sum::<Complex64>() * g.cell_volume();
        assert!((integral - 1.0).norm() < 1e-8, "{integral}");
    }

    #[test]
    fn kernel_plancherel() {
        for (d, n, l) in [(1, 128, 8.0), (2, 32, 2.0)] {
            let g = Grid::new(d, n, l).unwrap();
            let a = builtin(Builtin::Gaussian, d).unwrap();
            let c = chi(d);
            let psi = compact_part_kernel(&a, &c, &g).unwrap();
            let lhs = lp_norm(psi.field(), 2.0, &Region::All).unwrap().powi(2);
            let ac = a.times_cutoff(&c, false);
            let rhs: f64 = g.frequency_cell_volume()
                * (0..g.len()).map(|i| ac.eval(&g.frequency_point(i)[..d]).norm_sqr()).sum::<f64>();
            assert!((lhs - rhs).abs() < 1e-10 * rhs, "{lhs} {rhs}");
        }
    }

    #[test]
    fn coarse_frequency_lattice_is_rejected() {
        let g = Grid::new(1, 16, 4.0).unwrap();
        let a = builtin(Builtin::Gaussian, 1).unwrap();
        match compact_part_kernel(&a, &chi(1), &g) {
            Err(Error::FrequencyRange { required_n, required_l, .. }) => {
                assert_eq!(required_n, 48);
                assert!((required_l - 16.0 / 12.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let part = LPPartition::new(-2, 6).unwrap();
        let piece = dyadic_piece(&a, &chi(1), &part, 4).unwrap();
        assert!(matches!(dyadic_kernel(&piece, &g), Err(Error::FrequencyRange { .. })));
    }

    #[test]
    fn even_real_pieces_have_real_kernels() {
        let g = Grid::new(1, 512, 8.0).unwrap();
        let part = LPPartition::new(-2, 6).unwrap();
        let a = builtin(Builtin::Gaussian, 1).unwrap();
        for j in 0..4 {
            let piece = dyadic_piece(&a, &chi(1), &part, j).unwrap();
            let k = dyadic_kernel(&piece, &g).unwrap();
            let im = k.values().iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
            assert!(im < 1e-12, "j={j} im={im}");
        }
    }

    #[test]
    fn convolution_realizes_the_low_frequency_multiplier() {
        let g = Grid::new(1, 128, 8.0).unwrap();
        let a = builtin(Builtin::Sign, 1).unwrap();
        let c = chi(1);
        let psi = compact_part_kernel(&a, &c, &g).unwrap();
        let u = g.random_field(Side::Spatial, 9);
        let via_symbol = super::super::apply_multiplier(&a.times_cutoff(&c, false), false, &u).unwrap();
        // direct cyclic sum, independent of the transform
        let n = g.n();
        let direct: Vec<Complex64> = (0..n)
            .map(|x| (0..n).map(|y| psi.values()[(x + n - y + n / 2) % n] * u.values[y]).sum::<Complex64>() * g.dx())
            .collect();
        let direct = SampledField::new(g, Side::Spatial, direct).unwrap();
        assert!(via_symbol.max_diff(&direct).unwrap() < 1e-10);
        assert!(convolve(&psi, &u).unwrap().max_diff(&direct).unwrap() < 1e-10);
    }

    #[test]
    fn moments_are_monotone() {
        let g = Grid::new(1, 1024, 8.0).unwrap();
        let part = LPPartition::new(-2, 6).unwrap();
        let a = builtin(Builtin::Gaussian, 1).unwrap();
        let k = partial_kernel_sum(&a, &chi(1), &part, &g, 3).unwrap();
        let m: Vec<f64> = [0.1, 0.2, 0.4, 1.0].iter().map(|&s| small_ball_moment(&k, s).unwrap()).collect();
        assert!(m.windows(2).all(|w| w[0] < w[1]), "{m:?}");
        let t: Vec<f64> = [0.25, 0.5, 1.0].iter().map(|&s| kernel_tail_mass(&k, s).unwrap()).collect();
        assert!(t.windows(2).all(|w| w[0] >= w[1]), "{t:?}");
        assert!(kernel_tail_mass(&k, 8.0).is_err());
        assert!(small_ball_moment(&k, 0.0).is_err());
    }

    #[test]
    fn truncation_limits() {
        let g = Grid::new(1, 128, 4.0).unwrap();
        let a = builtin(Builtin::Sign, 1).unwrap();
        let psi = compact_part_kernel(&a, &chi(1), &g).unwrap();
        let u = g.random_field(Side::Spatial, 10);
        let five = g.sample_spatial(|_| Complex64::new(5.0, 0.0));
        assert!(truncated_kernel_apply(&psi, &five, 0.3, &u).unwrap().max_abs() < 1e-12);
        let b = Profile::bump(vec![0.0], 1.5).sample(&g).unwrap();
        assert_eq!(truncated_kernel_apply(&psi, &b, 2.0 * 4.0, &u).unwrap().max_abs(), 0.0);

        let full = kernel_commutator_apply(&psi, &b, &u).unwrap();
        let lip = Profile::bump(vec![0.0], 1.5).lipschitz();
        let sup_u = u.max_abs();
        for s in [0.5, 0.2, 0.05, 0.01] {
            let trunc = truncated_kernel_apply(&psi, &b, s, &u).unwrap();
            let bound = lip * small_ball_moment(&psi, s).unwrap() * sup_u;
            let gap = full.max_diff(&trunc).unwrap();
            assert!(gap <= bound * (1.0 + 1e-9) + 1e-13, "s={s}: {gap} > {bound}");
        }
        // below one lattice spacing only the diagonal is dropped, where b(x) - b(y) = 0
        let trunc = truncated_kernel_apply(&psi, &b, 0.5 * g.dx(), &u).unwrap();
        assert!(full.max_diff(&trunc).unwrap() < 1e-12);
    }
}
