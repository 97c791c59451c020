//! Dense materialization, singular values and power-iteration norms.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{OperatorHandle, OperatorKind};
use crate::error::{Error, Result};
use crate::grid::{Grid, SampledField, Side};
use crate::report::{fmt_num, Table};

/// Largest matrix side `N^d` that will be materialized.
pub const MAX_MATERIALIZE: usize = 4096;

const FROBENIUS_TOL: f64 = 1e-8;

/// Dense matrix of an operator in lattice order, with its provenance.
#[derive(Debug, Clone)]
pub struct Materialized {
    pub matrix: DMatrix<Complex64>,
    pub grid: Grid,
    pub descriptor: String,
}

impl Materialized {
    pub fn apply(&self, u: &SampledField) -> Result<SampledField> {
        u.expect_side(Side::Spatial)?;
        if !self.grid.same_as(&u.grid) {
            return Err(Error::GridMismatch);
        }
        let v = &self.matrix * nalgebra::DVector::from_column_slice(&u.values);
        SampledField::new(self.grid, Side::Spatial, v.as_slice().to_vec())
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.matrix.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

/// Column `i` of the matrix is the operator applied to the `i`-th unit field.
pub fn materialize(op: &OperatorHandle) -> Result<Materialized> {
    let grid = *op.grid();
    let side = grid.len();
    if side > MAX_MATERIALIZE {
        return Err(Error::SizeGuard { side, max: MAX_MATERIALIZE });
    }
    let matrix = if let OperatorKind::TruncatedKernel { kernel, b, s } = op.kind() {
        let entry = super::kernel::truncated_entry(kernel, b, *s);
        let cols: Vec<Vec<Complex64>> =
            (0..side).into_par_iter().map(|y| (0..side).map(|x| entry(x, y)).collect()).collect();
        DMatrix::from_iterator(side, side, cols.into_iter().flatten())
    } else {
        let cols: Vec<Vec<Complex64>> = (0..side)
            .into_par_iter()
            .map(|i| {
                let mut e = grid.zeros(Side::Spatial);
                e.values[i] = Complex64::new(1.0, 0.0);
                op.apply(&e).map(|c| c.values)
            })
            .collect::<Result<_>>()?;
        DMatrix::from_iterator(side, side, cols.into_iter().flatten())
    };
    Ok(Materialized { matrix, grid, descriptor: op.descriptor() })
}

/// Singular values in nonincreasing order, with the grid they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    pub values: Vec<f64>,
    pub d: usize,
    pub n: usize,
    pub l: f64,
    pub descriptor: String,
}

impl SingularSpectrum {
    pub fn sigma_max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `sigma_K` with 1-based `K`; zero past the end.
    pub fn sigma(&self, k: usize) -> f64 {
        if k == 0 {
            return self.sigma_max();
        }
        self.values.get(k - 1).copied().unwrap_or(0.0)
    }

    /// `sum_{k > K} sigma_k^2 / sum_k sigma_k^2`, zero for the zero operator.
    pub fn tail_energy(&self, k: usize) -> f64 {
        let total: f64 = self.values.iter().map(|s| s * s).sum();
        if total == 0.0 {
            return 0.0;
        }
        let tail: f64 = self.values.iter().skip(k).map(|s| s * s).sum();
        tail / total
    }

    /// Columns `k, sigma`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["k", "sigma"]);
        for (i, s) in self.values.iter().enumerate() {
            t.push(vec![(i + 1).to_string(), fmt_num(*s)]);
        }
        t
    }
}

pub fn singular_values(m: &Materialized) -> Result<SingularSpectrum> {
    let frob: f64 = m.matrix.iter().map(|v| v.norm_sqr()).sum();
    if !frob.is_finite() {
        return Err(Error::Svd("matrix has non-finite entries".into()));
    }
    let side = m.matrix.nrows();
    let mut values = if frob == 0.0 {
        vec![0.0; side]
    } else {
        m.matrix
            .clone()
            .try_svd_unordered(false, false, f64::EPSILON, 0)
            .ok_or_else(|| Error::Svd("iteration did not converge".into()))?
            .singular_values
            .as_slice()
            .to_vec()
    };
    values.sort_by(|a, b| b.total_cmp(a));
    let energy: f64 = values.iter().map(|s| s * s).sum();
    if (energy - frob).abs() > FROBENIUS_TOL * frob {
        return Err(Error::Svd(format!("Frobenius check failed: sum sigma^2 = {energy}, sum |M|^2 = {frob}")));
    }
    Ok(SingularSpectrum {
        values,
        d: m.grid.dim(),
        n: m.grid.n(),
        l: m.grid.half_width(),
        descriptor: m.descriptor.clone(),
    })
}

/// Power-iteration estimate of the largest singular value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl NormEstimate {
    pub fn require_converged(self) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::NotConverged { estimate: self.value, iterations: self.iterations })
        }
    }
}

const POWER_TOL: f64 = 1e-10;
const POWER_SEED: u64 = 0x5eed;

fn euclid(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value of `op` by power iteration on `op^* op`.
///
/// Each estimate `|op v|` with `|v| = 1` is a lower bound. The run stops once
/// successive estimates agree to a relative `1e-10`; otherwise the result is
/// flagged as not converged after `iterations` steps.
pub fn operator_norm_l2(op: &OperatorHandle, iterations: usize) -> Result<NormEstimate> {
    if iterations < 20 {
        return Err(Error::InvalidParameter(format!("iterations {iterations} must be >= 20")));
    }
    let grid = *op.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut v = grid.zeros(Side::Spatial);
    for x in &mut v.values {
        *x = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let mut prev = 0.0;
    for it in 1..=iterations {
        let norm = euclid(&v.values);
        if norm == 0.0 {
            return Ok(NormEstimate { value: 0.0, iterations: it, converged: true });
        }
        v = v.scale(Complex64::new(1.0 / norm, 0.0));
        let av = op.apply(&v)?;
        let est = euclid(&av.values);
        if est == 0.0 || (it > 1 && (est - prev).abs() <= POWER_TOL * est) {
            return Ok(NormEstimate { value: est, iterations: it, converged: true });
        }
        prev = est;
        v = op.apply_adjoint(&av)?;
    }
    Ok(NormEstimate { value: prev, iterations, converged: false })
}
