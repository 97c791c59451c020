use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use super::{SymbolFn, SymbolKind, SymbolSpec, KAPPA_MAX};
use crate::error::{Error, Result};

/// Symbol given by samples on a rectangular lattice, looked up at the nearest node.
///
/// Points farther than half a spacing outside the tabulated range evaluate to zero,
/// as do lattice nodes missing from the table.
#[derive(Debug, Clone)]
pub struct TabulatedSymbol {
    d: usize,
    axes: Vec<Vec<f64>>,
    values: Vec<Option<Complex64>>,
}

impl TabulatedSymbol {
    /// Read rows `xi_1, ..., xi_d, re, im`; `#` lines and a non-numeric header row are skipped.
    pub fn load(path: &Path, d: usize) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Table(format!("{}: {e}", path.display())))?;
        let mut rows = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Table(e.to_string()))?;
            let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(|f| f.parse::<f64>()).collect();
            match parsed {
                Ok(v) => rows.push(v),
                Err(_) if line == 0 => continue,
                Err(e) => return Err(Error::Table(format!("row {}: {e}", line + 1))),
            }
        }
        Self::from_rows(&rows, d)
    }

    pub fn from_rows(rows: &[Vec<f64>], d: usize) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Table("table has no rows".into()));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != d + 2) {
            return Err(Error::Table(format!("row {} has {} columns, expected {}", bad + 1, rows[bad].len(), d + 2)));
        }
        let mut axes: Vec<Vec<f64>> = (0..d)
            .map(|axis| {
                let mut c: Vec<f64> = rows.iter().map(|r| r[axis]).collect();
                c.sort_by(|a, b| a.total_cmp(b));
                c.dedup();
                c
            })
            .collect();
        for a in &mut axes {
            a.shrink_to_fit();
        }
        let size: usize = axes.iter().map(Vec::len).product();
        let mut values = vec![None; size];
        let mut table = Self { d, axes, values: Vec::new() };
        for r in rows {
            let idx = table.exact_index(&r[..d]);
            values[idx] = Some(Complex64::new(r[d], r[d + 1]));
        }
        table.values = values;
        Ok(table)
    }

    fn exact_index(&self, xi: &[f64]) -> usize {
        self.axes.iter().zip(xi).fold(0, |acc, (axis, x)| {
            let i = axis.binary_search_by(|c| c.total_cmp(x)).unwrap_or(0);
            acc * axis.len() + i
        })
    }

    fn nearest(axis: &[f64], x: f64) -> Option<usize> {
        let n = axis.len();
        let half_gap = if n > 1 { (axis[1] - axis[0]) / 2.0 } else { 0.5 };
        let half_gap_hi = if n > 1 { (axis[n - 1] - axis[n - 2]) / 2.0 } else { 0.5 };
        if x < axis[0] - half_gap || x > axis[n - 1] + half_gap_hi {
            return None;
        }
        let pos = axis.partition_point(|&c| c < x);
        Some(match pos {
            0 => 0,
            p if p == n => n - 1,
            p => {
                if x - axis[p - 1] <= axis[p] - x {
                    p - 1
                } else {
                    p
                }
            }
        })
    }

    pub fn lookup(&self, xi: &[f64]) -> Complex64 {
        let mut idx = 0;
        for (axis, &x) in self.axes.iter().zip(xi) {
            match Self::nearest(axis, x) {
                Some(i) => idx = idx * axis.len() + i,
                None => return Complex64::new(0.0, 0.0),
            }
        }
        self.values[idx].unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn into_spec(self) -> SymbolSpec {
        let d = self.d;
        SymbolSpec::new("tabulated", d, SymbolKind::Tabulated, KAPPA_MAX, Arc::new(self))
    }
}

impl SymbolFn for TabulatedSymbol {
    fn eval(&self, xi: &[f64]) -> Complex64 {
        self.lookup(xi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn nearest_lookup() {
        let rows: Vec<Vec<f64>> = (0..4)
            .flat_map(|i| (0..3).map(move |j| vec![i as f64, j as f64 * 0.5, (i * 10 + j) as f64, 0.0]))
            .collect();
        let t = TabulatedSymbol::from_rows(&rows, 2).unwrap();
        assert_eq!(t.lookup(&[1.1, 0.6]).re, 11.0);
        assert_eq!(t.lookup(&[2.9, 0.0]).re, 30.0);
        assert_eq!(t.lookup(&[9.0, 0.0]).re, 0.0);
    }

    #[test]
    fn load_from_csv() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "xi1,re,im").unwrap();
        writeln!(f, "-1.0,2.0,0.5").unwrap();
        writeln!(f, "0.0,3.0,0.0").unwrap();
        writeln!(f, "1.0,4.0,-1.0").unwrap();
        let spec = SymbolSpec::parse(&format!("tabulated({})", f.path().display()), 1).unwrap();
        assert_eq!(spec.kind(), SymbolKind::Tabulated);
        assert_eq!(spec.eval(&[0.8]), Complex64::new(4.0, -1.0));
        assert_eq!(spec.eval(&[-0.9]), Complex64::new(2.0, 0.5));
    }

    #[test]
    fn bad_tables() {
        assert!(TabulatedSymbol::from_rows(&[], 1).is_err());
        assert!(TabulatedSymbol::from_rows(&[vec![1.0, 2.0]], 1).is_err());
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "0.0,1.0,0.0").unwrap();
        writeln!(f, "x,1.0,0.0").unwrap();
        assert!(TabulatedSymbol::load(f.path(), 1).is_err());
    }
}
