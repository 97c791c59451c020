//! Multiplier, multiplication and commutator operators on the periodic grid.
//!
//! Every operator acts on spatial fields. Multipliers are applied exactly on
//! the frequency lattice: `A u = inverse_ft(a(xi_k) forward_ft(u))`, so the
//! discrete `L^2` norm of `A` is the lattice maximum of `|a|`.

mod kernel;
mod spectrum;

use num_complex::Complex64;
use rayon::prelude::*;

pub use kernel::{
    check_frequency_range, compact_part_kernel, convolve, dyadic_kernel, kernel_commutator_apply, kernel_tail_mass,
    partial_kernel_sum, small_ball_moment, symbol_kernel, truncated_kernel_apply, KernelField,
};
pub use spectrum::{
    materialize, operator_norm_l2, singular_values, Materialized, NormEstimate, SingularSpectrum, MAX_MATERIALIZE,
};

use crate::error::{Error, Result};
use crate::grid::{forward_ft, inverse_ft, Grid, SampledField, Side};
use crate::symbols::SymbolSpec;

/// Symbol values on the frequency lattice; the sphere form is `a(xi/|xi|)` with 0 at the origin.
pub fn symbol_samples(a: &SymbolSpec, sphere: bool, grid: &Grid) -> Result<Vec<Complex64>> {
    if a.dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), found: a.dim() });
    }
    let d = grid.dim();
    Ok((0..grid.len())
        .into_par_iter()
        .map(|i| {
            let p = grid.frequency_point(i);
            let xi = &p[..d];
            if sphere {
                let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
                if r == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let mut w = [0.0; 3];
                for (o, x) in w.iter_mut().zip(xi) {
                    *o = x / r;
                }
                a.eval(&w[..d])
            } else {
                a.eval(xi)
            }
        })
        .collect())
}

fn multiply_in_frequency(samples: &[Complex64], u: &SampledField) -> Result<SampledField> {
    let mut v = forward_ft(u)?;
    for (x, m) in v.values.iter_mut().zip(samples) {
        *x *= m;
    }
    inverse_ft(&v)
}

fn check_spatial(grid: &Grid, u: &SampledField) -> Result<()> {
    u.expect_side(Side::Spatial)?;
    if !grid.same_as(&u.grid) {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `A u` for the multiplier with symbol `a` (or its sphere form).
pub fn apply_multiplier(a: &SymbolSpec, sphere: bool, u: &SampledField) -> Result<SampledField> {
    u.expect_side(Side::Spatial)?;
    let samples = symbol_samples(a, sphere, &u.grid)?;
    multiply_in_frequency(&samples, u)
}

/// `C u = A(b u) - b A(u)`.
pub fn apply_commutator(a: &SymbolSpec, sphere: bool, b: &SampledField, u: &SampledField) -> Result<SampledField> {
    OperatorHandle::commutator(a.clone(), sphere, b.clone())?.apply(u)
}

#[derive(Debug, Clone)]
pub enum OperatorKind {
    Multiplier {
        symbol: SymbolSpec,
        sphere: bool,
    },
    Multiplication {
        b: SampledField,
    },
    Commutator {
        symbol: SymbolSpec,
        sphere: bool,
        b: SampledField,
    },
    /// `A_n B - B A_n` with `A_n` the cyclic convolution by `kernel`.
    TruncatedCommutator {
        kernel: KernelField,
        b: SampledField,
    },
    /// See [`truncated_kernel_apply`].
    TruncatedKernel {
        kernel: KernelField,
        b: SampledField,
        s: f64,
    },
}

/// An operator on spatial fields of one grid, with its frequency samples cached.
#[derive(Debug, Clone)]
pub struct OperatorHandle {
    kind: OperatorKind,
    grid: Grid,
    freq: Option<Vec<Complex64>>,
}

fn spatial_b(b: &SampledField) -> Result<()> {
    b.expect_side(Side::Spatial)
}

impl OperatorHandle {
    pub fn multiplier(symbol: SymbolSpec, sphere: bool, grid: Grid) -> Result<Self> {
        let freq = symbol_samples(&symbol, sphere, &grid)?;
        Ok(Self { kind: OperatorKind::Multiplier { symbol, sphere }, grid, freq: Some(freq) })
    }

    pub fn multiplication(b: SampledField) -> Result<Self> {
        spatial_b(&b)?;
        Ok(Self { grid: b.grid, kind: OperatorKind::Multiplication { b }, freq: None })
    }

    pub fn commutator(symbol: SymbolSpec, sphere: bool, b: SampledField) -> Result<Self> {
        spatial_b(&b)?;
        let grid = b.grid;
        let freq = symbol_samples(&symbol, sphere, &grid)?;
        Ok(Self { kind: OperatorKind::Commutator { symbol, sphere, b }, grid, freq: Some(freq) })
    }

    pub fn truncated_commutator(kernel: KernelField, b: SampledField) -> Result<Self> {
        spatial_b(&b)?;
        if !kernel.grid().same_as(&b.grid) {
            return Err(Error::GridMismatch);
        }
        let freq = forward_ft(kernel.field())?.values;
        Ok(Self { grid: b.grid, kind: OperatorKind::TruncatedCommutator { kernel, b }, freq: Some(freq) })
    }

    pub fn truncated_kernel(kernel: KernelField, b: SampledField, s: f64) -> Result<Self> {
        spatial_b(&b)?;
        if !kernel.grid().same_as(&b.grid) {
            return Err(Error::GridMismatch);
        }
        if !(s > 0.0) {
            return Err(Error::InvalidParameter(format!("truncation radius {s} must be positive")));
        }
        Ok(Self { grid: b.grid, kind: OperatorKind::TruncatedKernel { kernel, b, s }, freq: None })
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Short human-readable label.
    pub fn descriptor(&self) -> String {
        match &self.kind {
            OperatorKind::Multiplier { symbol, sphere } => {
                format!("multiplier[{}{}]", symbol.name(), if *sphere { ",sphere" } else { "" })
            }
            OperatorKind::Multiplication { .. } => "multiplication".into(),
            OperatorKind::Commutator { symbol, sphere, .. } => {
                format!("commutator[{}{}]", symbol.name(), if *sphere { ",sphere" } else { "" })
            }
            OperatorKind::TruncatedCommutator { .. } => "truncated-commutator".into(),
            OperatorKind::TruncatedKernel { s, .. } => format!("truncated-kernel[s={s}]"),
        }
    }

    /// Conjugated frequency samples, for the adjoint.
    fn freq_conj(&self) -> Vec<Complex64> {
        self.freq.as_deref().unwrap_or_default().iter().map(|m| m.conj()).collect()
    }

    fn freq(&self) -> &[Complex64] {
        self.freq.as_deref().unwrap_or_default()
    }

    pub fn apply(&self, u: &SampledField) -> Result<SampledField> {
        check_spatial(&self.grid, u)?;
        match &self.kind {
            OperatorKind::Multiplier { .. } => multiply_in_frequency(self.freq(), u),
            OperatorKind::Multiplication { b } => crate::grid::pointwise_mul(b, u),
            OperatorKind::Commutator { b, .. } | OperatorKind::TruncatedCommutator { b, .. } => {
                commutator_with(self.freq(), b, u)
            }
            OperatorKind::TruncatedKernel { kernel, b, s } => kernel::truncated_sum(kernel, b, *s, u, false),
        }
    }

    /// Apply the adjoint with respect to the quadrature inner product `dx^d sum u conj(v)`.
    pub fn apply_adjoint(&self, u: &SampledField) -> Result<SampledField> {
        check_spatial(&self.grid, u)?;
        match &self.kind {
            OperatorKind::Multiplier { .. } => multiply_in_frequency(&self.freq_conj(), u),
            OperatorKind::Multiplication { b } => crate::grid::pointwise_mul(&b.conj(), u),
            OperatorKind::Commutator { b, .. } | OperatorKind::TruncatedCommutator { b, .. } => {
                // (AB - BA)^* = -(A^* B^* - B^* A^*)
                let c = commutator_with(&self.freq_conj(), &b.conj(), u)?;
                Ok(c.scale(Complex64::new(-1.0, 0.0)))
            }
            OperatorKind::TruncatedKernel { kernel, b, s } => kernel::truncated_sum(kernel, b, *s, u, true),
        }
    }
}

fn commutator_with(freq: &[Complex64], b: &SampledField, u: &SampledField) -> Result<SampledField> {
    let bu = crate::grid::pointwise_mul(b, u)?;
    let a_bu = multiply_in_frequency(freq, &bu)?;
    let a_u = multiply_in_frequency(freq, u)?;
    let b_au = crate::grid::pointwise_mul(b, &a_u)?;
    a_bu.sub(&b_au)
}
