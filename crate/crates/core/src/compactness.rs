//! Weak-null test sequences and the two compactness diagnostics: decay of
//! `|C u_n|` along such sequences, and singular-value tails under refinement.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{lp_norm, Grid, Region, SampledField};
use crate::operators::{materialize, singular_values, OperatorHandle, MAX_MATERIALIZE};
use crate::profile::Profile;
use crate::report::{fmt_num, Table};
use crate::symbols::SymbolSpec;

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceKind {
    /// `phi(x) exp(2 pi i lambda_n xi0.x)` with `lambda_n = base n`.
    Oscillation { direction: Vec<f64>, base: f64 },
    /// `n^{d/p} phi(c + n (x - c))` around the profile center `c`.
    Concentration { exponent: f64 },
    /// `phi(x - n dx e)` for the unit vector along `direction`.
    Translation { direction: Vec<f64> },
}

/// Serialized as one flat table: `kind` plus the fields of that kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSequence", into = "RawSequence")]
pub struct TestSequenceSpec {
    pub kind: SequenceKind,
    pub profile: Profile,
    /// Pointwise magnitude cap applied after generation.
    pub bound: f64,
}

fn no_cap() -> f64 {
    f64::INFINITY
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum RawKind {
    Oscillation,
    Concentration,
    Translation,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSequence {
    kind: RawKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    direction: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exponent: Option<f64>,
    profile: Profile,
    #[serde(default = "no_cap")]
    bound: f64,
}

impl TryFrom<RawSequence> for TestSequenceSpec {
    type Error = String;

    fn try_from(r: RawSequence) -> std::result::Result<Self, String> {
        let need = |field: &str| format!("sequence kind {:?} requires `{field}`", r.kind);
        let reject = |field: &str| format!("`{field}` does not apply to sequence kind {:?}", r.kind);
        let kind = match r.kind {
            RawKind::Oscillation => {
                if r.exponent.is_some() {
                    return Err(reject("exponent"));
                }
                SequenceKind::Oscillation {
                    direction: r.direction.clone().ok_or_else(|| need("direction"))?,
                    base: r.base.ok_or_else(|| need("base"))?,
                }
            }
            RawKind::Concentration => {
                if r.direction.is_some() || r.base.is_some() {
                    return Err(reject(if r.base.is_some() { "base" } else { "direction" }));
                }
                SequenceKind::Concentration { exponent: r.exponent.ok_or_else(|| need("exponent"))? }
            }
            RawKind::Translation => {
                if r.exponent.is_some() || r.base.is_some() {
                    return Err(reject(if r.base.is_some() { "base" } else { "exponent" }));
                }
                SequenceKind::Translation { direction: r.direction.clone().ok_or_else(|| need("direction"))? }
            }
        };
        Ok(Self { kind, profile: r.profile, bound: r.bound })
    }
}

impl From<TestSequenceSpec> for RawSequence {
    fn from(s: TestSequenceSpec) -> Self {
        let (kind, direction, base, exponent) = match s.kind {
            SequenceKind::Oscillation { direction, base } => (RawKind::Oscillation, Some(direction), Some(base), None),
            SequenceKind::Concentration { exponent } => (RawKind::Concentration, None, None, Some(exponent)),
            SequenceKind::Translation { direction } => (RawKind::Translation, Some(direction), None, None),
        };
        Self { kind, direction, base, exponent, profile: s.profile, bound: s.bound }
    }
}

impl TestSequenceSpec {
    pub fn oscillation(profile: Profile, direction: Vec<f64>, base: f64) -> Self {
        Self { kind: SequenceKind::Oscillation { direction, base }, profile, bound: no_cap() }
    }

    /// The frequency, rate or shift attached to index `n`.
    pub fn parameter(&self, n: usize, grid: &Grid) -> f64 {
        match &self.kind {
            SequenceKind::Oscillation { base, .. } => base * n as f64,
            SequenceKind::Concentration { .. } => n as f64,
            SequenceKind::Translation { .. } => n as f64 * grid.dx(),
        }
    }

    /// Check that index `n` can be generated on `grid`.
    pub fn validate(&self, n: usize, grid: &Grid) -> Result<()> {
        let d = grid.dim();
        self.profile.validate(d)?;
        if !(self.bound > 0.0) {
            return Err(Error::InvalidParameter(format!("sup-norm cap {} must be positive", self.bound)));
        }
        match &self.kind {
            SequenceKind::Oscillation { direction, base } => {
                check_len(direction, d)?;
                let lambda = base * n as f64 * norm(direction);
                let limit = grid.frequency_extent();
                if !(lambda < limit) {
                    return Err(Error::Nyquist { lambda, limit });
                }
                self.profile.check_margin(grid)
            }
            SequenceKind::Concentration { exponent } => {
                if !(*exponent >= 1.0) {
                    return Err(Error::InvalidParameter(format!("exponent {exponent} must be >= 1")));
                }
                if n == 0 {
                    return Err(Error::InvalidParameter("concentration rate must be >= 1".into()));
                }
                if let Some(w) = self.profile.support_radius() {
                    if w / (n as f64) < grid.dx() {
                        return Err(Error::Nyquist { lambda: n as f64 / w, limit: 1.0 / grid.dx() });
                    }
                }
                self.profile.check_margin(grid)
            }
            SequenceKind::Translation { direction } => {
                check_len(direction, d)?;
                if norm(direction) == 0.0 {
                    return Err(Error::InvalidParameter("translation direction is zero".into()));
                }
                self.shifted_profile(n, grid).check_margin(grid)
            }
        }
    }

    fn shifted_profile(&self, n: usize, grid: &Grid) -> Profile {
        let mut p = self.profile.clone();
        if let SequenceKind::Translation { direction } = &self.kind {
            let r = norm(direction);
            let step = n as f64 * grid.dx();
            for (c, e) in p.center.iter_mut().zip(direction) {
                *c += step * e / r;
            }
        }
        p
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_len(v: &[f64], d: usize) -> Result<()> {
    if v.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: v.len() });
    }
    Ok(())
}

/// The `n`-th member of the sequence on `grid`.
pub fn gen_sequence(spec: &TestSequenceSpec, n: usize, grid: &Grid) -> Result<SampledField> {
    spec.validate(n, grid)?;
    let d = grid.dim();
    let raw = match &spec.kind {
        SequenceKind::Oscillation { direction, base } => {
            let lambda = base * n as f64;
            grid.sample_spatial(|x| {
                let phase: f64 = x.iter().zip(direction).map(|(a, b)| a * b).sum();
                Complex64::from_polar(spec.profile.eval(x), 2.0 * std::f64::consts::PI * lambda * phase)
            })
        }
        SequenceKind::Concentration { exponent } => {
            let nf = n as f64;
            let amp = nf.powf(d as f64 / exponent);
            let c = &spec.profile.center;
            grid.sample_spatial(|x| {
                let mut y = [0.0; 3];
                for i in 0..d {
                    let ci = c.get(i).copied().unwrap_or(0.0);
                    y[i] = ci + nf * (x[i] - ci);
                }
                Complex64::new(amp * spec.profile.eval(&y[..d]), 0.0)
            })
        }
        SequenceKind::Translation { .. } => spec.shifted_profile(n, grid).sample(grid)?,
    };
    let cap = spec.bound;
    Ok(raw.map(|v| {
        let m = v.norm();
        if m > cap {
            v * (cap / m)
        } else {
            v
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayPoint {
    pub n: usize,
    pub parameter: f64,
    pub norm: f64,
}

/// `|C u_n|_{L^p0(V)}` against `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayCurve {
    pub points: Vec<DecayPoint>,
    pub p0: f64,
    pub region: Region,
}

impl DecayCurve {
    /// Value at the `n` closest to a quarter of the largest `n`.
    fn quarter_point(&self) -> Option<&DecayPoint> {
        let last = self.points.last()?;
        let target = last.n as f64 / 4.0;
        self.points.iter().min_by(|a, b| (a.n as f64 - target).abs().total_cmp(&(b.n as f64 - target).abs()))
    }

    /// Last value at most half the value at a quarter of the largest `n`.
    pub fn is_eventually_decreasing(&self) -> bool {
        match (self.points.last(), self.quarter_point()) {
            (Some(last), Some(q)) => last.norm <= 0.5 * q.norm,
            _ => false,
        }
    }

    pub fn value_at(&self, n: usize) -> Option<f64> {
        self.points.iter().find(|p| p.n == n).map(|p| p.norm)
    }

    /// Columns `n, lambda, norm`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["n", "lambda", "norm"]);
        for p in &self.points {
            t.push(vec![p.n.to_string(), fmt_num(p.parameter), fmt_num(p.norm)]);
        }
        t
    }
}

/// Norms of `C u_n` on `region` (the central box when `None`) for each `n`.
pub fn commutator_decay_experiment(
    a: &SymbolSpec,
    sphere: bool,
    b: &SampledField,
    spec: &TestSequenceSpec,
    n_list: &[usize],
    p0: f64,
    region: Option<Region>,
) -> Result<DecayCurve> {
    let grid = b.grid;
    let region = region.unwrap_or_else(|| Region::central(&grid));
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    for &n in &ns {
        spec.validate(n, &grid)?;
    }
    let op = OperatorHandle::commutator(a.clone(), sphere, b.clone())?;
    let points = ns
        .par_iter()
        .map(|&n| {
            let u = gen_sequence(spec, n, &grid)?;
            let cu = op.apply(&u)?;
            Ok(DecayPoint { n, parameter: spec.parameter(n, &grid), norm: lp_norm(&cu, p0, &region)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecayCurve { points, p0, region })
}

/// Operator whose singular-value tail is measured.
#[derive(Debug, Clone)]
pub enum TailOperator {
    Commutator { a: SymbolSpec, sphere: bool, b: Profile },
    Multiplier { a: SymbolSpec, sphere: bool },
    Multiplication { b: Profile },
}

impl TailOperator {
    fn build(&self, grid: Grid) -> Result<OperatorHandle> {
        match self {
            TailOperator::Commutator { a, sphere, b } => {
                OperatorHandle::commutator(a.clone(), *sphere, b.sample(&grid)?)
            }
            TailOperator::Multiplier { a, sphere } => OperatorHandle::multiplier(a.clone(), *sphere, grid),
            TailOperator::Multiplication { b } => OperatorHandle::multiplication(b.sample(&grid)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvdTailRow {
    pub n: usize,
    pub l: f64,
    pub sigma_k: f64,
    pub tail_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvdTailTable {
    pub k: usize,
    pub rows: Vec<SvdTailRow>,
}

impl SvdTailTable {
    pub fn tail_energies(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.tail_energy).collect()
    }

    /// Columns `N, L, sigma_K, tail_energy`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["N", "L", "sigma_K", "tail_energy"]);
        for r in &self.rows {
            t.push(vec![r.n.to_string(), fmt_num(r.l), fmt_num(r.sigma_k), fmt_num(r.tail_energy)]);
        }
        t
    }
}

/// `sigma_K` and `sum_{k>K} sigma_k^2 / sum sigma_k^2` of the dense operator on each `(N, L)` grid.
pub fn svd_tail_experiment(op: &TailOperator, d: usize, grids: &[(usize, f64)], k: usize) -> Result<SvdTailTable> {
    let grids: Vec<Grid> = grids.iter().map(|&(n, l)| Grid::new(d, n, l)).collect::<Result<_>>()?;
    if let Some(g) = grids.iter().find(|g| g.len() > MAX_MATERIALIZE) {
        return Err(Error::SizeGuard { side: g.len(), max: MAX_MATERIALIZE });
    }
    let mut rows = Vec::with_capacity(grids.len());
    for g in grids {
        let spectrum = singular_values(&materialize(&op.build(g)?)?)?;
        rows.push(SvdTailRow {
            n: g.n(),
            l: g.half_width(),
            sigma_k: spectrum.sigma(k),
            tail_energy: spectrum.tail_energy(k),
        });
    }
    Ok(SvdTailTable { k, rows })
}
