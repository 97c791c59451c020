//! Multiplier symbols and the auxiliary functions used to split them.
//!
//! A [`SymbolSpec`] is an evaluable map `xi -> a(xi)` together with its kind,
//! its claimed smoothness order and (for some builtins) closed-form
//! derivatives. Symbols compose: [`SymbolSpec::sphere_form`] turns any symbol
//! into `a(xi/|xi|)`, [`SymbolSpec::times_cutoff`] forms `a chi` and
//! `a (1 - chi)`, and [`dyadic_piece`] forms `a (1 - chi) theta(2^-j .)`.

pub mod cutoff;
pub mod derivative;
pub mod partition;
mod tabulated;

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

pub use cutoff::CutoffChi;
pub use derivative::MultiIndex;
pub use partition::LPPartition;
pub use tabulated::TabulatedSymbol;

use crate::error::{Error, Result};

/// Highest derivative order any symbol advertises.
pub const KAPPA_MAX: usize = 4;

/// Below this radius a homogeneous symbol is treated as evaluated at the origin.
const ORIGIN_RADIUS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    HomogeneousDegreeZero,
    General,
    Tabulated,
}

/// The evaluation side of a symbol.
pub trait SymbolFn: Send + Sync + fmt::Debug {
    fn eval(&self, xi: &[f64]) -> Complex64;

    /// Closed-form `D^alpha a(xi)` when one exists.
    fn analytic_derivative(&self, _xi: &[f64], _alpha: &MultiIndex) -> Option<Complex64> {
        None
    }

    /// The value of a constant symbol.
    fn constant_value(&self) -> Option<Complex64> {
        None
    }
}

#[derive(Clone)]
pub struct SymbolSpec {
    d: usize,
    kind: SymbolKind,
    kappa_max: usize,
    name: String,
    support: Option<f64>,
    f: Arc<dyn SymbolFn>,
}

impl fmt::Debug for SymbolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymbolSpec")
            .field("name", &self.name)
            .field("d", &self.d)
            .field("kind", &self.kind)
            .field("kappa_max", &self.kappa_max)
            .field("support", &self.support)
            .finish()
    }
}

impl SymbolSpec {
    pub fn new(name: impl Into<String>, d: usize, kind: SymbolKind, kappa_max: usize, f: Arc<dyn SymbolFn>) -> Self {
        Self { d, kind, kappa_max, name: name.into(), support: None, f }
    }

    /// Declare that the symbol vanishes for `|xi| >= radius`.
    pub fn with_support(mut self, radius: f64) -> Self {
        self.support = Some(radius);
        self
    }

    /// Radius outside which the symbol is known to vanish.
    pub fn support_radius(&self) -> Option<f64> {
        self.support
    }

    /// Wrap a closure as a general symbol without analytic derivatives.
    pub fn from_fn<F>(name: impl Into<String>, d: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        Self::new(name, d, SymbolKind::General, KAPPA_MAX, Arc::new(FnSymbol(f)))
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }

    pub fn kappa_max(&self) -> usize {
        self.kappa_max
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_homogeneous(&self) -> bool {
        self.kind == SymbolKind::HomogeneousDegreeZero
    }

    /// Homogeneous of degree zero, counting constants, which stay defined at the origin.
    pub fn is_degree_zero(&self) -> bool {
        self.is_homogeneous() || self.f.constant_value().is_some()
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        if self.is_homogeneous() && norm(xi) < ORIGIN_RADIUS {
            return Complex64::new(0.0, 0.0);
        }
        self.f.eval(xi)
    }

    /// `D^alpha a(xi)`: closed form when available, otherwise Richardson-extrapolated
    /// central differences with base step `max(|xi|, 1) * 1e-3`.
    pub fn derivative(&self, xi: &[f64], alpha: &MultiIndex) -> Result<Complex64> {
        symbol_derivative(self, xi, alpha)
    }

    /// `xi -> a(xi / |xi|)`, zero at the origin.
    pub fn sphere_form(&self) -> SymbolSpec {
        if self.is_homogeneous() {
            return self.clone();
        }
        SymbolSpec::new(
            format!("sphere({})", self.name),
            self.d,
            SymbolKind::HomogeneousDegreeZero,
            self.kappa_max,
            Arc::new(SphereForm(self.clone())),
        )
    }

    /// `a chi`, or `a (1 - chi)` when `complement` is set.
    pub fn times_cutoff(&self, chi: &Arc<CutoffChi>, complement: bool) -> SymbolSpec {
        let tag = if complement { "(1-chi)" } else { "chi" };
        let out = SymbolSpec::new(
            format!("{}*{}", self.name, tag),
            self.d,
            SymbolKind::General,
            self.kappa_max,
            Arc::new(CutoffProduct { a: self.clone(), chi: chi.clone(), complement }),
        );
        if complement {
            out
        } else {
            out.with_support(3.0)
        }
    }

    /// Parse the symbol sub-language used by experiment configs.
    ///
    /// Accepted forms: `zero`, `constant(c)`, `constant(re, im)`, `riesz(i)`
    /// (1-based axis), `sphere-harmonic(l)`, `gaussian`, `sign`,
    /// `tabulated(path)`, and `sphere(<expr>)` for the sphere form of another
    /// expression.
    pub fn parse(expr: &str, d: usize) -> Result<SymbolSpec> {
        let expr = expr.trim();
        let (head, args) = match expr.find('(') {
            Some(open) => {
                let close = expr
                    .rfind(')')
                    .filter(|&c| c > open && c == expr.len() - 1)
                    .ok_or_else(|| Error::UnknownSymbol(expr.to_string()))?;
                (expr[..open].trim(), Some(expr[open + 1..close].trim()))
            }
            None => (expr, None),
        };
        let numbers = |s: &str| -> Result<Vec<f64>> {
            s.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidParameter(format!("`{t}` is not a number in `{expr}`")))
                })
                .collect()
        };
        let integer = |s: &str| -> Result<usize> {
            s.trim().parse::<usize>().map_err(|_| Error::InvalidParameter(format!("`{s}` is not an index in `{expr}`")))
        };
        match (head, args) {
            ("zero", None) => builtin(Builtin::Zero, d),
            ("constant", Some(a)) => {
                let v = numbers(a)?;
                match v.as_slice() {
                    [re] => builtin(Builtin::Constant(Complex64::new(*re, 0.0)), d),
                    [re, im] => builtin(Builtin::Constant(Complex64::new(*re, *im)), d),
                    _ => Err(Error::InvalidParameter(format!("`{expr}` takes one or two numbers"))),
                }
            }
            ("riesz", Some(a)) => {
                let i = integer(a)?;
                if i == 0 || i > d {
                    return Err(Error::InvalidParameter(format!("riesz index {i} outside 1..={d}")));
                }
                builtin(Builtin::Riesz(i - 1), d)
            }
            ("sphere-harmonic", Some(a)) => builtin(Builtin::SphereHarmonic(integer(a)?), d),
            ("gaussian", None) => builtin(Builtin::Gaussian, d),
            ("sign", None) | ("sign-1d", None) => builtin(Builtin::Sign, d),
            ("tabulated", Some(path)) => Ok(TabulatedSymbol::load(Path::new(path), d)?.into_spec()),
            ("sphere", Some(inner)) => Ok(SymbolSpec::parse(inner, d)?.sphere_form()),
            _ => Err(Error::UnknownSymbol(expr.to_string())),
        }
    }
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `D^alpha a(xi)` with order and singularity checks.
pub fn symbol_derivative(a: &SymbolSpec, xi: &[f64], alpha: &MultiIndex) -> Result<Complex64> {
    if alpha.dim() != a.d || xi.len() != a.d {
        return Err(Error::DimensionMismatch { expected: a.d, found: alpha.dim().min(xi.len()) });
    }
    let order = alpha.order();
    if order > a.kappa_max {
        return Err(Error::DerivativeOrder { order, max: a.kappa_max });
    }
    if a.is_homogeneous() && norm(xi) < ORIGIN_RADIUS {
        return Err(Error::SingularPoint(xi.to_vec()));
    }
    if order == 0 {
        return Ok(a.eval(xi));
    }
    if let Some(v) = a.f.analytic_derivative(xi, alpha) {
        return Ok(v);
    }
    let f = |p: &[f64]| a.eval(p);
    Ok(derivative::richardson_derivative(&f, xi, alpha).0)
}

/// Named symbols with fixed formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    Zero,
    Constant(Complex64),
    /// `xi_i / |xi|` for the 0-based axis `i`.
    Riesz(usize),
    /// `Re((xi_1 + i xi_2)^l) / |xi|^l`.
    SphereHarmonic(usize),
    /// `exp(-pi |xi|^2)`.
    Gaussian,
    /// `sign(xi)` in one dimension.
    Sign,
}

pub fn builtin(b: Builtin, d: usize) -> Result<SymbolSpec> {
    if !(1..=3).contains(&d) {
        return Err(Error::InvalidParameter(format!("dimension {d} outside 1..=3")));
    }
    let (name, kind) = match b {
        Builtin::Zero => ("zero".to_string(), SymbolKind::General),
        Builtin::Constant(c) => (format!("constant({})", fmt_complex(c)), SymbolKind::General),
        Builtin::Riesz(i) => {
            if i >= d {
                return Err(Error::InvalidParameter(format!("riesz index {} outside 1..={d}", i + 1)));
            }
            (format!("riesz({})", i + 1), SymbolKind::HomogeneousDegreeZero)
        }
        Builtin::SphereHarmonic(l) => {
            if d < 2 {
                return Err(Error::InvalidParameter("sphere-harmonic needs d >= 2".into()));
            }
            (format!("sphere-harmonic({l})"), SymbolKind::HomogeneousDegreeZero)
        }
        Builtin::Gaussian => ("gaussian".to_string(), SymbolKind::General),
        Builtin::Sign => {
            if d != 1 {
                return Err(Error::InvalidParameter("sign symbol is one-dimensional".into()));
            }
            ("sign".to_string(), SymbolKind::HomogeneousDegreeZero)
        }
    };
    let spec = SymbolSpec::new(name, d, kind, KAPPA_MAX, Arc::new(b));
    Ok(match b {
        Builtin::Zero => spec.with_support(0.0),
        _ => spec,
    })
}

fn fmt_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("{},{}", c.re, c.im)
    }
}

impl SymbolFn for Builtin {
    fn constant_value(&self) -> Option<Complex64> {
        match *self {
            Builtin::Zero => Some(Complex64::new(0.0, 0.0)),
            Builtin::Constant(c) => Some(c),
            _ => None,
        }
    }

    fn eval(&self, xi: &[f64]) -> Complex64 {
        let re = match *self {
            Builtin::Zero => 0.0,
            Builtin::Constant(c) => return c,
            Builtin::Riesz(i) => xi[i] / norm(xi),
            Builtin::SphereHarmonic(l) => {
                let z = Complex64::new(xi[0], xi[1]).powu(l as u32);
                z.re / norm(xi).powi(l as i32)
            }
            Builtin::Gaussian => (-PI * xi.iter().map(|x| x * x).sum::<f64>()).exp(),
            Builtin::Sign => {
                if xi[0] > 0.0 {
                    1.0
                } else if xi[0] < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        };
        Complex64::new(re, 0.0)
    }

    fn analytic_derivative(&self, xi: &[f64], alpha: &MultiIndex) -> Option<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        match *self {
            Builtin::Zero | Builtin::Constant(_) | Builtin::Sign => Some(zero),
            Builtin::Gaussian => {
                let v: f64 = xi.iter().zip(alpha.components()).map(|(&x, &n)| gaussian_derivative_1d(x, n)).product();
                Some(Complex64::new(v, 0.0))
            }
            Builtin::Riesz(i) => Some(Complex64::new(riesz_derivative(xi, i, alpha), 0.0)),
            Builtin::SphereHarmonic(_) => None,
        }
    }
}

/// `d^n/dx^n exp(-pi x^2) = (-1)^n pi^{n/2} H_n(sqrt(pi) x) exp(-pi x^2)`, `H_n` physicists' Hermite.
fn gaussian_derivative_1d(x: f64, n: usize) -> f64 {
    let y = PI.sqrt() * x;
    let (mut h_prev, mut h) = (1.0, 2.0 * y);
    let hn = match n {
        0 => 1.0,
        _ => {
            for k in 1..n {
                let next = 2.0 * y * h - 2.0 * k as f64 * h_prev;
                h_prev = h;
                h = next;
            }
            h
        }
    };
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    sign * PI.powf(n as f64 / 2.0) * hn * (-PI * x * x).exp()
}

/// `D^beta |xi|^{-1}` via the expansion of derivatives of `g(|xi|^2)`:
/// `sum_k prod_i beta_i!/(k_i!(beta_i - 2k_i)!) (2 xi_i)^{beta_i - 2k_i} g^{(|beta| - |k|)}(q)`,
/// with `g(q) = q^{-1/2}`.
fn inverse_norm_derivative(xi: &[f64], beta: &MultiIndex) -> f64 {
    let q: f64 = xi.iter().map(|x| x * x).sum();
    let comps = beta.components();
    let d = comps.len();
    let total = beta.order();
    let mut k = [0usize; 3];
    let mut acc = 0.0;
    loop {
        let mut coeff = 1.0;
        let mut ksum = 0;
        for i in 0..d {
            let b = comps[i];
            let ki = k[i];
            coeff *= factorial(b) / (factorial(ki) * factorial(b - 2 * ki));
            coeff *= (2.0 * xi[i]).powi((b - 2 * ki) as i32);
            ksum += ki;
        }
        let m = total - ksum;
        let gm = (0..m).fold(1.0, |c, t| c * (-0.5 - t as f64)) * q.powf(-0.5 - m as f64);
        acc += coeff * gm;

        let mut axis = 0;
        loop {
            if axis == d {
                return acc;
            }
            if 2 * (k[axis] + 1) <= comps[axis] {
                k[axis] += 1;
                break;
            }
            k[axis] = 0;
            axis += 1;
        }
    }
}

/// `D^alpha (xi_i / |xi|) = xi_i D^alpha f + alpha_i D^{alpha - e_i} f` with `f = |xi|^{-1}`.
fn riesz_derivative(xi: &[f64], i: usize, alpha: &MultiIndex) -> f64 {
    let mut v = xi[i] * inverse_norm_derivative(xi, alpha);
    if let Some(lower) = alpha.lowered(i) {
        v += alpha.components()[i] as f64 * inverse_norm_derivative(xi, &lower);
    }
    v
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

struct FnSymbol<F>(F);

impl<F> fmt::Debug for FnSymbol<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnSymbol")
    }
}

impl<F> SymbolFn for FnSymbol<F>
where
    F: Fn(&[f64]) -> Complex64 + Send + Sync,
{
    fn eval(&self, xi: &[f64]) -> Complex64 {
        (self.0)(xi)
    }
}

#[derive(Debug)]
struct SphereForm(SymbolSpec);

impl SymbolFn for SphereForm {
    fn eval(&self, xi: &[f64]) -> Complex64 {
        let r = norm(xi);
        let mut unit = [0.0; 3];
        for (u, x) in unit.iter_mut().zip(xi) {
            *u = x / r;
        }
        self.0.eval(&unit[..xi.len()])
    }
}

#[derive(Debug)]
struct CutoffProduct {
    a: SymbolSpec,
    chi: Arc<CutoffChi>,
    complement: bool,
}

impl SymbolFn for CutoffProduct {
    fn eval(&self, xi: &[f64]) -> Complex64 {
        let c = self.chi.eval(xi);
        let w = if self.complement { 1.0 - c } else { c };
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.a.eval(xi) * w
    }
}

#[derive(Debug)]
struct DyadicPiece {
    a: SymbolSpec,
    chi: Arc<CutoffChi>,
    j: i32,
}

impl SymbolFn for DyadicPiece {
    fn eval(&self, xi: &[f64]) -> Complex64 {
        let t = partition::theta_scaled(xi, self.j);
        if t == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let w = (1.0 - self.chi.eval(xi)) * t;
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.a.eval(xi) * w
    }
}

/// `a_j(xi) = a(xi) (1 - chi(xi)) theta(2^-j xi)`, supported in `2^{j-1} <= |xi| <= 2^{j+1}`.
pub fn dyadic_piece(a: &SymbolSpec, chi: &Arc<CutoffChi>, part: &LPPartition, j: i32) -> Result<SymbolSpec> {
    if j < 0 {
        return Err(Error::InvalidParameter(format!("dyadic index j={j} must be >= 0")));
    }
    if chi.dim() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: chi.dim() });
    }
    if j > part.j_max {
        return Err(Error::InvalidParameter(format!(
            "dyadic index j={j} exceeds the partition range [{}, {}]",
            part.j_min, part.j_max
        )));
    }
    Ok(SymbolSpec::new(
        format!("{}_j{}", a.name(), j),
        a.dim(),
        SymbolKind::General,
        a.kappa_max(),
        Arc::new(DyadicPiece { a: a.clone(), chi: chi.clone(), j }),
    )
    .with_support(2f64.powi(j + 1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn re(v: Complex64) -> f64 {
        assert!(v.im.abs() < 1e-15);
        v.re
    }

    #[test]
    fn builtin_examples() {
        let one = SymbolSpec::parse("constant(1)", 2).unwrap();
        assert_eq!(re(one.eval(&[0.3, 4.0])), 1.0);
        for alpha in MultiIndex::up_to_order(2, 3).into_iter().filter(|a| a.order() >= 1) {
            assert_eq!(one.derivative(&[0.3, 4.0], &alpha).unwrap().norm(), 0.0);
        }
        let r1 = SymbolSpec::parse("riesz(1)", 2).unwrap();
        assert!((re(r1.eval(&[3.0, 4.0])) - 0.6).abs() < 1e-15);
        assert!(r1.is_homogeneous());
        assert_eq!(r1.eval(&[0.0, 0.0]).norm(), 0.0);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(SymbolSpec::parse("wavelet", 1), Err(Error::UnknownSymbol(_))));
        assert!(SymbolSpec::parse("riesz(3)", 2).is_err());
        assert!(SymbolSpec::parse("riesz(0)", 2).is_err());
        assert!(SymbolSpec::parse("constant(x)", 1).is_err());
        assert!(SymbolSpec::parse("sign", 2).is_err());
        assert!(SymbolSpec::parse("sphere-harmonic(2)", 1).is_err());
        assert!(SymbolSpec::parse("riesz(1", 2).is_err());
    }

    #[test]
    fn riesz_homogeneity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = SymbolSpec::parse("riesz(1)", 2).unwrap();
        for _ in 0..100 {
            let xi = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            let scaled = [2.0 * xi[0], 2.0 * xi[1]];
            assert!((a.eval(&xi) - a.eval(&scaled)).norm() < 1e-12);
        }
    }

    #[test]
    fn derivative_examples() {
        let r1 = SymbolSpec::parse("riesz(1)", 2).unwrap();
        let v = r1.derivative(&[1.0, 0.0], &MultiIndex::new(&[0, 1])).unwrap();
        assert!(v.norm() < 1e-15);
        // closed form d/dxi_2 (xi_1/|xi|) = -xi_1 xi_2 / |xi|^3
        let xi = [1.2, -0.7];
        let v = r1.derivative(&xi, &MultiIndex::new(&[0, 1])).unwrap();
        let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        assert!((v.re - (-xi[0] * xi[1] / r.powi(3))).abs() < 1e-14);

        let g = SymbolSpec::parse("gaussian", 3).unwrap();
        let v = g.derivative(&[0.0, 0.0, 0.0], &MultiIndex::new(&[2, 0, 0])).unwrap();
        assert!((v.re + 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn derivative_errors() {
        let r1 = SymbolSpec::parse("riesz(1)", 2).unwrap();
        assert!(matches!(r1.derivative(&[1.0, 1.0], &MultiIndex::new(&[5, 0])), Err(Error::DerivativeOrder { .. })));
        assert!(matches!(r1.derivative(&[0.0, 0.0], &MultiIndex::new(&[1, 0])), Err(Error::SingularPoint(_))));
    }

    #[test]
    fn analytic_derivatives_agree_with_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let specs = [
            SymbolSpec::parse("riesz(1)", 2).unwrap(),
            SymbolSpec::parse("riesz(2)", 3).unwrap(),
            SymbolSpec::parse("gaussian", 2).unwrap(),
            SymbolSpec::parse("gaussian", 1).unwrap(),
        ];
        for a in &specs {
            let d = a.dim();
            let f = |p: &[f64]| a.eval(p);
            for _ in 0..100 {
                let r = rng.gen_range(0.5..8.0);
                let mut xi: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let n = norm(&xi);
                xi.iter_mut().for_each(|x| *x *= r / n);
                for alpha in MultiIndex::up_to_order(d, 2) {
                    let exact = a.derivative(&xi, &alpha).unwrap();
                    let (fd, _) = derivative::richardson_derivative(&f, &xi, &alpha);
                    let scale = exact.norm().max(1e-6);
                    // gaussian values are tiny far out; compare absolutely there
                    let err = (exact - fd).norm();
                    assert!(err <= 1e-4 * scale || err < 1e-9, "{} alpha={alpha} xi={xi:?}: {exact} vs {fd}", a.name());
                }
            }
        }
    }

    #[test]
    fn sphere_form_is_homogeneous() {
        let g = SymbolSpec::parse("gaussian", 2).unwrap().sphere_form();
        assert!(g.is_homogeneous());
        for t in [0.5, 2.0, 10.0] {
            let xi = [0.3, -1.1];
            assert!((g.eval(&xi) - g.eval(&[t * xi[0], t * xi[1]])).norm() < 1e-12);
        }
        assert_eq!(g.eval(&[0.0, 0.0]).norm(), 0.0);
    }

    #[test]
    fn dyadic_piece_examples() {
        let chi = Arc::new(CutoffChi::standard(1).unwrap());
        let part = LPPartition::new(-8, 8).unwrap();
        let zero = SymbolSpec::parse("zero", 1).unwrap();
        let z = dyadic_piece(&zero, &chi, &part, 2).unwrap();
        assert_eq!(z.eval(&[5.0]).norm(), 0.0);
        let one = SymbolSpec::parse("constant(1)", 1).unwrap();
        let p0 = dyadic_piece(&one, &chi, &part, 0).unwrap();
        assert_eq!(p0.eval(&[4.0]).norm(), 0.0);
        assert!(dyadic_piece(&one, &chi, &part, -1).is_err());
    }

    #[test]
    fn dyadic_pieces_reconstruct_the_high_part() {
        let d = 2;
        let chi = Arc::new(CutoffChi::standard(d).unwrap());
        let part = LPPartition::new(-8, 8).unwrap();
        let a = SymbolSpec::parse("riesz(2)", d).unwrap();
        let big_j = 5;
        let pieces: Vec<SymbolSpec> = (0..=big_j).map(|j| dyadic_piece(&a, &chi, &part, j).unwrap()).collect();
        let high = a.times_cutoff(&chi, true);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let r = rng.gen_range(0.0..2f64.powi(big_j - 1));
            let th = rng.gen_range(0.0..2.0 * PI);
            let xi = [r * th.cos(), r * th.sin()];
            let sum: Complex64 = pieces.iter().map(|p| p.eval(&xi)).sum();
            assert!((sum - high.eval(&xi)).norm() < 1e-10, "xi={xi:?}");
        }
    }

    #[test]
    fn gaussian_hermite_recurrence() {
        // third derivative of exp(-pi x^2) is (-8 pi^3 x^3 + 12 pi^2 x) exp(-pi x^2)
        let x: f64 = 0.37;
        let expect = (-8.0 * PI.powi(3) * x.powi(3) + 12.0 * PI * PI * x) * (-PI * x * x).exp();
        assert!((gaussian_derivative_1d(x, 3) - expect).abs() < 1e-12);
    }
}
