//! Quadratic forms `int (phi1 u) conj(A_psi(phi2 u))` along oscillating
//! sequences, and their limits for pure modulations of a fixed profile.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::compactness::{gen_sequence, SequenceKind, TestSequenceSpec};
use crate::error::{Error, Result};
use crate::grid::{lp_norm, pointwise_mul, Grid, Region, SampledField, Side};
use crate::operators::apply_multiplier;
use crate::report::{fmt_num, Table};
use crate::symbols::SymbolSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HFormVariant {
    /// `int (phi1 u)(x) conj(A_psi(phi2 u)(x)) dx`.
    Hermitian,
    /// `int (phi1 u)(x) A_psi(phi2 v)(x) dx`.
    Bilinear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HFormSample {
    pub n: usize,
    pub value: Complex64,
    pub variant: HFormVariant,
}

fn require_homogeneous(psi: &SymbolSpec) -> Result<()> {
    if !psi.is_degree_zero() {
        return Err(Error::InvalidParameter(format!("symbol `{}` is not homogeneous of degree zero", psi.name())));
    }
    Ok(())
}

/// Lattice quadrature of the form; `second` is `u` itself for the hermitian variant.
///
/// `psi` is applied as sampled: homogeneous symbols vanish at the origin, constants
/// keep their value there so that `psi = 1` is the identity.
pub fn hform(
    variant: HFormVariant,
    u: &SampledField,
    second: &SampledField,
    phi1: &SampledField,
    phi2: &SampledField,
    psi: &SymbolSpec,
) -> Result<Complex64> {
    require_homogeneous(psi)?;
    u.expect_side(Side::Spatial)?;
    for f in [second, phi1, phi2] {
        u.check_compatible(f)?;
    }
    let left = pointwise_mul(phi1, u)?;
    let right = apply_multiplier(psi, false, &pointwise_mul(phi2, second)?)?;
    let sum: Complex64 = match variant {
        HFormVariant::Hermitian => left.values.iter().zip(&right.values).map(|(a, b)| a * b.conj()).sum(),
        HFormVariant::Bilinear => left.values.iter().zip(&right.values).map(|(a, b)| a * b).sum(),
    };
    Ok(sum * u.grid.cell_volume())
}

/// Limit of the hermitian form along `phi exp(2 pi i lambda xi0.x)` as `lambda -> inf`:
/// `conj(psi(xi0/|xi0|)) int phi1 conj(phi2) |phi|^2`.
///
/// For real-valued `psi` the conjugate is immaterial.
pub fn oscillation_oracle(
    phi: &SampledField,
    xi0: &[f64],
    phi1: &SampledField,
    phi2: &SampledField,
    psi: &SymbolSpec,
) -> Result<Complex64> {
    require_homogeneous(psi)?;
    let d = phi.grid.dim();
    if xi0.len() != d || psi.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: xi0.len().max(psi.dim()) });
    }
    let r = xi0.iter().map(|x| x * x).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(Error::InvalidParameter("direction xi0 must be nonzero".into()));
    }
    phi.check_compatible(phi1)?;
    phi.check_compatible(phi2)?;
    let dir: Vec<f64> = xi0.iter().map(|x| x / r).collect();
    let factor = psi.eval(&dir).conj();
    let integral: Complex64 =
        phi.values.iter().zip(&phi1.values).zip(&phi2.values).map(|((p, a), b)| a * b.conj() * p.norm_sqr()).sum();
    Ok(factor * integral * phi.grid.cell_volume())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HFormRow {
    pub n: usize,
    pub value: Complex64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HFormStudy {
    pub oracle: Complex64,
    /// `|phi|_2^2` of the sequence profile, the scale for a zero oracle.
    pub profile_energy: f64,
    pub rows: Vec<HFormRow>,
}

impl HFormStudy {
    /// 1% of `|oracle|`, or `1e-3 |phi|_2^2` when the oracle vanishes.
    pub fn tolerance(&self) -> f64 {
        if self.oracle.norm() > 0.0 {
            1e-2 * self.oracle.norm()
        } else {
            1e-3 * self.profile_energy
        }
    }

    pub fn final_error(&self) -> Option<f64> {
        self.rows.last().map(|r| r.error)
    }

    pub fn converged(&self) -> bool {
        self.final_error().is_some_and(|e| e < self.tolerance())
    }

    /// Columns `n, re, im, err`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["n", "re", "im", "err"]);
        for r in &self.rows {
            t.push(vec![r.n.to_string(), fmt_num(r.value.re), fmt_num(r.value.im), fmt_num(r.error)]);
        }
        t
    }
}

/// Hermitian form along an oscillation sequence against its analytic limit.
pub fn hform_convergence_study(
    spec: &TestSequenceSpec,
    phi1: &SampledField,
    phi2: &SampledField,
    psi: &SymbolSpec,
    n_list: &[usize],
) -> Result<HFormStudy> {
    let SequenceKind::Oscillation { direction, .. } = &spec.kind else {
        return Err(Error::InvalidParameter("the convergence study needs an oscillation sequence".into()));
    };
    let grid = phi1.grid;
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    for &n in &ns {
        spec.validate(n, &grid)?;
    }
    let phi = spec.profile.sample(&grid)?;
    let oracle = oscillation_oracle(&phi, direction, phi1, phi2, psi)?;
    let rows = ns
        .par_iter()
        .map(|&n| {
            let u = gen_sequence(spec, n, &grid)?;
            let value = hform(HFormVariant::Hermitian, &u, &u, phi1, phi2, psi)?;
            Ok(HFormRow { n, value, error: (value - oracle).norm() })
        })
        .collect::<Result<Vec<_>>>()?;
    let profile_energy = lp_norm(&phi, 2.0, &Region::All)?.powi(2);
    Ok(HFormStudy { oracle, profile_energy, rows })
}

/// The `r x r` matrix `M_ij = hform(u_i, u_j)` of the hermitian form for the
/// component sequences `u_1..u_r`.
pub fn hform_matrix(
    components: &[SampledField],
    phi1: &SampledField,
    phi2: &SampledField,
    psi: &SymbolSpec,
) -> Result<DMatrix<Complex64>> {
    require_homogeneous(psi)?;
    let r = components.len();
    let mut m = DMatrix::zeros(r, r);
    for i in 0..r {
        let left = pointwise_mul(phi1, &components[i])?;
        for j in 0..r {
            let right = apply_multiplier(psi, false, &pointwise_mul(phi2, &components[j])?)?;
            let s: Complex64 = left.values.iter().zip(&right.values).map(|(a, b)| a * b.conj()).sum();
            m[(i, j)] = s * phi1.grid.cell_volume();
        }
    }
    Ok(m)
}

/// Whether `m` is Hermitian and positive semidefinite up to `tol`.
pub fn is_hermitian_psd(m: &DMatrix<Complex64>, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let skew = (m - m.adjoint()).iter().fold(0.0f64, |a, v| a.max(v.norm()));
    if skew > tol {
        return false;
    }
    let herm = (m + m.adjoint()).scale(0.5);
    herm.symmetric_eigenvalues().iter().all(|&l| l >= -tol)
}

/// Sequences on one grid built from several oscillation specs, one per component.
pub fn component_sequences(specs: &[TestSequenceSpec], n: usize, grid: &Grid) -> Result<Vec<SampledField>> {
    specs.iter().map(|s| gen_sequence(s, n, grid)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::inner_product;
    use crate::profile::Profile;
    use crate::symbols::{builtin, Builtin};

    fn one(d: usize) -> SymbolSpec {
        builtin(Builtin::Constant(Complex64::new(1.0, 0.0)), d).unwrap()
    }

    #[test]
    fn trivial_cases() {
        let g = Grid::new(1, 256, 4.0).unwrap();
        let phi1 = Profile::bump(vec![0.0], 2.0).sample(&g).unwrap();
        let phi2 = Profile::cosine_bump(vec![0.2], 2.0).sample(&g).unwrap();
        let sign = builtin(Builtin::Sign, 1).unwrap();
        let z = g.zeros(Side::Spatial);
        assert_eq!(hform(HFormVariant::Hermitian, &z, &z, &phi1, &phi2, &sign).unwrap().norm(), 0.0);

        let u = g.random_field(Side::Spatial, 3);
        let v = hform(HFormVariant::Hermitian, &u, &u, &phi1, &phi2, &one(1)).unwrap();
        let plain = inner_product(&pointwise_mul(&phi1, &u).unwrap(), &pointwise_mul(&phi2, &u).unwrap()).unwrap();
        assert!((v - plain).norm() < 1e-12);

        let gauss = builtin(Builtin::Gaussian, 1).unwrap();
        assert!(hform(HFormVariant::Hermitian, &u, &u, &phi1, &phi2, &gauss).is_err());
    }

    #[test]
    fn sesquilinear_in_the_weights() {
        let g = Grid::new(1, 128, 4.0).unwrap();
        let u = g.random_field(Side::Spatial, 1);
        let sign = builtin(Builtin::Sign, 1).unwrap();
        let f = g.random_field(Side::Spatial, 2);
        let h = g.random_field(Side::Spatial, 3);
        let c = Complex64::new(0.3, -1.2);
        let w = Profile::bump(vec![0.0], 2.0).sample(&g).unwrap();
        let form = |a: &SampledField, b: &SampledField| hform(HFormVariant::Hermitian, &u, &u, a, b, &sign).unwrap();
        let lin = form(&f.scale(c).add(&h).unwrap(), &w);
        assert!((lin - (c * form(&f, &w) + form(&h, &w))).norm() < 1e-12);
        let anti = form(&w, &f.scale(c).add(&h).unwrap());
        assert!((anti - (c.conj() * form(&w, &f) + form(&w, &h))).norm() < 1e-12);
    }

    #[test]
    fn bilinear_with_conjugate_matches_hermitian_for_real_even_symbols() {
        let g = Grid::new(2, 32, 4.0).unwrap();
        let u = g.random_field(Side::Spatial, 5);
        let phi1 = Profile::bump(vec![0.0, 0.0], 2.0).sample(&g).unwrap();
        let phi2 = Profile::cosine_bump(vec![0.3, 0.0], 2.0).sample(&g).unwrap();
        for psi in [one(2), builtin(Builtin::SphereHarmonic(2), 2).unwrap()] {
            let h = hform(HFormVariant::Hermitian, &u, &u, &phi1, &phi2, &psi).unwrap();
            let b = hform(HFormVariant::Bilinear, &u, &u.conj(), &phi1, &phi2, &psi).unwrap();
            assert!((h - b).norm() < 1e-12, "{}", psi.name());
        }
    }

    #[test]
    fn oracle_examples() {
        let g = Grid::new(2, 32, 4.0).unwrap();
        let phi = Profile::bump(vec![0.0, 0.0], 1.5).sample(&g).unwrap();
        let phi1 = Profile::cosine_bump(vec![0.5, 0.0], 2.0).sample(&g).unwrap();
        let r1 = builtin(Builtin::Riesz(0), 2).unwrap();
        let base = oscillation_oracle(&phi, &[1.0, 0.0], &phi1, &phi, &one(2)).unwrap();
        let direct: Complex64 =
            phi.values.iter().zip(&phi1.values).map(|(p, a)| a * p.conj() * p.norm_sqr()).sum::<Complex64>()
                * g.cell_volume();
        assert!((base - direct).norm() < 1e-14);
        let along = oscillation_oracle(&phi, &[1.0, 0.0], &phi1, &phi, &r1).unwrap();
        assert!((along - base).norm() < 1e-14);
        let across = oscillation_oracle(&phi, &[0.0, 1.0], &phi1, &phi, &r1).unwrap();
        assert_eq!(across.norm(), 0.0);
        assert!(oscillation_oracle(&phi, &[0.0, 0.0], &phi1, &phi, &r1).is_err());
    }

    #[test]
    fn zero_weight_gives_zero_errors_only_when_the_oracle_vanishes() {
        let g = Grid::new(1, 256, 4.0).unwrap();
        let spec = TestSequenceSpec::oscillation(Profile::bump(vec![0.0], 1.5), vec![1.0], 0.5);
        let phi1 = Profile::bump(vec![0.0], 2.0).sample(&g).unwrap();
        let z = g.zeros(Side::Spatial);
        let sign = builtin(Builtin::Sign, 1).unwrap();
        let s = hform_convergence_study(&spec, &phi1, &z, &sign, &[1, 4, 8]).unwrap();
        assert!(s.rows.iter().all(|r| r.error == 0.0));
    }

    #[test]
    fn psd_check() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0), Complex64::new(1.0, 0.0)],
        );
        assert!(is_hermitian_psd(&m, 1e-12));
        let mut bad = m.clone();
        bad[(1, 1)] = Complex64::new(0.2, 0.0);
        assert!(!is_hermitian_psd(&bad, 1e-3));
        bad = m.clone();
        bad[(0, 1)] = Complex64::new(0.5, 1.0);
        assert!(!is_hermitian_psd(&bad, 1e-3));
    }
}
