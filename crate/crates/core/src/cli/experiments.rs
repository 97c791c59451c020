//! One function per experiment kind, each turning a validated config into a table.

use std::sync::Arc;

use super::config::{ExperimentConfig, ExperimentKind, GridConfig};
use crate::compactness::{commutator_decay_experiment, svd_tail_experiment, TailOperator};
use crate::error::{Error, Result};
use crate::grid::{forward_ft, inverse_ft, Grid, Side};
use crate::hmeasure::hform_convergence_study;
use crate::mikhlin::{default_kappa, dyadic_scaling_check, mikhlin_constant};
use crate::operators::{check_frequency_range, dyadic_kernel, kernel_tail_mass, partial_kernel_sum, small_ball_moment};
use crate::report::{fmt_num, Table};
use crate::symbols::{dyadic_piece, CutoffChi, LPPartition, SymbolSpec};

/// Output of one run: the data table plus extra header comment lines.
pub struct Outcome {
    pub table: Table,
    pub notes: Vec<String>,
}

fn missing(field: &str) -> Error {
    Error::InvalidParameter(format!("missing required field `{field}`"))
}

fn grid_config(cfg: &ExperimentConfig) -> Result<GridConfig> {
    cfg.grid.ok_or_else(|| missing("grid"))
}

fn full_grid(cfg: &ExperimentConfig) -> Result<Grid> {
    let g = grid_config(cfg)?;
    let n = g.n.ok_or_else(|| missing("grid.n"))?;
    let l = g.l.ok_or_else(|| missing("grid.l"))?;
    Grid::new(g.d, n, l)
}

fn symbol(cfg: &ExperimentConfig, d: usize) -> Result<SymbolSpec> {
    let expr = cfg.symbol.as_deref().ok_or_else(|| missing("symbol"))?;
    SymbolSpec::parse(expr, d)
}

fn j_range(cfg: &ExperimentConfig, default: [i32; 2]) -> Result<(i32, i32)> {
    let [a, b] = cfg.params.j_range.unwrap_or(default);
    if a > b {
        return Err(Error::InvalidParameter(format!("empty j_range [{a}, {b}]")));
    }
    Ok((a, b))
}

fn cutoff(cfg: &ExperimentConfig, d: usize) -> Result<Arc<CutoffChi>> {
    Ok(Arc::new(CutoffChi::new(cfg.params.eps.unwrap_or(0.25), d)?))
}

fn partition_for(j_max: i32) -> Result<LPPartition> {
    LPPartition::new(-8, j_max.max(8))
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.experiment {
        ExperimentKind::MikhlinCheck => mikhlin_check(cfg),
        ExperimentKind::DyadicScaling => dyadic_scaling(cfg),
        ExperimentKind::KernelTails => kernel_tails(cfg),
        ExperimentKind::KernelSums => kernel_sums(cfg),
        ExperimentKind::CommutatorSvd => commutator_svd(cfg),
        ExperimentKind::OscillationDecay => oscillation_decay(cfg),
        ExperimentKind::Hmeasure => hmeasure(cfg),
        ExperimentKind::RoundtripSelftest => roundtrip(cfg),
    }
}

fn plain(table: Table) -> Outcome {
    Outcome { table, notes: Vec::new() }
}

fn mikhlin_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let d = grid_config(cfg)?.d;
    let a = symbol(cfg, d)?;
    let kappa = cfg.params.kappa.unwrap_or(default_kappa(d));
    let range = j_range(cfg, [-4, 8])?;
    let res = cfg.params.resolution.unwrap_or(64);
    Ok(plain(mikhlin_constant(&a, kappa, range, res)?.to_table()))
}

fn dyadic_scaling(cfg: &ExperimentConfig) -> Result<Outcome> {
    let d = grid_config(cfg)?.d;
    let a = symbol(cfg, d)?;
    let kappa = cfg.params.kappa.unwrap_or(default_kappa(d));
    let range = j_range(cfg, [0, 6])?;
    let res = cfg.params.resolution.unwrap_or(64);
    let chi = cutoff(cfg, d)?;
    let part = partition_for(range.1)?;
    Ok(plain(dyadic_scaling_check(&a, &chi, &part, range, kappa, res)?.to_table()))
}

fn kernel_tails(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grid = full_grid(cfg)?;
    let d = grid.dim();
    let a = symbol(cfg, d)?;
    let kappa = cfg.params.kappa.unwrap_or(default_kappa(d));
    let (j0, j1) = j_range(cfg, [0, 5])?;
    if j0 < 0 {
        return Err(Error::InvalidParameter(format!("dyadic index {j0} must be >= 0")));
    }
    let s = cfg.params.s.unwrap_or(0.5);
    if !(s > 0.0 && s < grid.half_width()) {
        return Err(Error::InvalidParameter(format!("tail radius {s} outside (0, L)")));
    }
    check_frequency_range(2f64.powi(j1 + 1), &grid)?;
    let chi = cutoff(cfg, d)?;
    let part = partition_for(j1)?;
    let exponent = kappa as f64 - d as f64 / 2.0;
    let mut t = Table::new(&["j", "tail_mass", "scaled"]);
    for j in j0..=j1 {
        let k = dyadic_kernel(&dyadic_piece(&a, &chi, &part, j)?, &grid)?;
        let tail = kernel_tail_mass(&k, s)?;
        let scaled = tail * (2f64.powi(j) * s).powf(exponent);
        t.push(vec![j.to_string(), fmt_num(tail), fmt_num(scaled)]);
    }
    Ok(plain(t))
}

fn kernel_sums(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grid = full_grid(cfg)?;
    let d = grid.dim();
    let a = symbol(cfg, d)?;
    let (_, n_max) = j_range(cfg, [0, 5])?;
    if n_max < 0 {
        return Err(Error::InvalidParameter(format!("partial sum index {n_max} must be >= 0")));
    }
    let s = cfg.params.s.unwrap_or(0.5);
    let s_list = cfg.params.s_list.clone().unwrap_or_else(|| vec![0.4, 0.2, 0.1]);
    let l = grid.half_width();
    if let Some(bad) = std::iter::once(s).chain(s_list.iter().copied()).find(|&r| !(r > 0.0 && r < l)) {
        return Err(Error::InvalidParameter(format!("radius {bad} outside (0, L)")));
    }
    check_frequency_range(2f64.powi(n_max + 1), &grid)?;
    let chi = cutoff(cfg, d)?;
    let part = partition_for(n_max)?;
    let mut cols = vec!["n".to_string(), "increment".into(), "ratio".into()];
    cols.extend(s_list.iter().map(|r| format!("moment_{}", fmt_num(*r))));
    let mut t = Table::new(&cols);
    let mut prev: Option<f64> = None;
    for n in 0..=n_max {
        // the increment of A_n over A_{n-1} is the n-th dyadic kernel
        let inc = kernel_tail_mass(&dyadic_kernel(&dyadic_piece(&a, &chi, &part, n)?, &grid)?, s)?;
        let sum = partial_kernel_sum(&a, &chi, &part, &grid, n)?;
        let mut row = vec![n.to_string(), fmt_num(inc), prev.map(|p| fmt_num(inc / p)).unwrap_or_default()];
        for r in &s_list {
            row.push(fmt_num(small_ball_moment(&sum, *r)?));
        }
        t.push(row);
        prev = Some(inc);
    }
    Ok(plain(t))
}

fn commutator_svd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let d = grid_config(cfg)?.d;
    let a = symbol(cfg, d)?;
    let b = cfg.b.clone().ok_or_else(|| missing("b"))?;
    b.validate(d)?;
    let grids = cfg.params.grids.clone().ok_or_else(|| missing("params.grids"))?;
    let k = cfg.params.k.unwrap_or(32);
    let op = TailOperator::Commutator { a, sphere: cfg.sphere, b };
    Ok(plain(svd_tail_experiment(&op, d, &grids, k)?.to_table()))
}

fn oscillation_decay(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grid = full_grid(cfg)?;
    let a = symbol(cfg, grid.dim())?;
    let b = cfg.b.clone().ok_or_else(|| missing("b"))?.sample(&grid)?;
    let spec = cfg.sequence.clone().ok_or_else(|| missing("sequence"))?;
    let n_list = cfg.params.n_list.clone().ok_or_else(|| missing("params.n_list"))?;
    let p0 = cfg.params.p0.unwrap_or(2.0);
    let curve = commutator_decay_experiment(&a, cfg.sphere, &b, &spec, &n_list, p0, None)?;
    let note = format!("eventually_decreasing: {}", curve.is_eventually_decreasing());
    Ok(Outcome { table: curve.to_table(), notes: vec![note] })
}

fn hmeasure(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grid = full_grid(cfg)?;
    let psi = symbol(cfg, grid.dim())?;
    let spec = cfg.sequence.clone().ok_or_else(|| missing("sequence"))?;
    let w = cfg.weights.clone().ok_or_else(|| missing("weights"))?;
    let n_list = cfg.params.n_list.clone().ok_or_else(|| missing("params.n_list"))?;
    let phi1 = w.phi1.sample(&grid)?;
    let phi2 = w.phi2.sample(&grid)?;
    let study = hform_convergence_study(&spec, &phi1, &phi2, &psi, &n_list)?;
    let notes = vec![
        format!("oracle: {} {}", fmt_num(study.oracle.re), fmt_num(study.oracle.im)),
        format!("tolerance: {}", fmt_num(study.tolerance())),
        format!("converged: {}", study.converged()),
    ];
    Ok(Outcome { table: study.to_table(), notes })
}

fn roundtrip(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grid = full_grid(cfg)?;
    let seeds = cfg.params.seeds.clone().unwrap_or_else(|| vec![1, 2, 3]);
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("seeds must not be empty".into()));
    }
    let mut t = Table::new(&["seed", "roundtrip_error", "plancherel_error"]);
    let (mut worst_rt, mut worst_pl) = (0.0f64, 0.0f64);
    for seed in seeds {
        let u = grid.random_field(Side::Spatial, seed);
        let uh = forward_ft(&u)?;
        let back = inverse_ft(&uh)?;
        let rt = back.max_diff(&u)? / u.max_abs();
        let lhs = grid.cell_volume() * u.sum_sq();
        let rhs = grid.frequency_cell_volume() * uh.sum_sq();
        let pl = (lhs - rhs).abs() / lhs;
        worst_rt = worst_rt.max(rt);
        worst_pl = worst_pl.max(pl);
        t.push(vec![seed.to_string(), fmt_num(rt), fmt_num(pl)]);
    }
    t.push(vec!["max".into(), fmt_num(worst_rt), fmt_num(worst_pl)]);
    Ok(plain(t))
}
