//! Uniaxial stress-strain datasets.

use crate::error::{Error, Result};
use crate::path::branch_ids;
use std::io::{Read, Write};
use std::path::Path;

/// Ordered `(ε11, σ11)` samples split into monotone loading branches.
#[derive(Clone, Debug, PartialEq)]
pub struct UniaxialDataset {
    pub eps: Vec<f64>,
    pub sig: Vec<f64>,
    /// Branch label of every sample; the first sample belongs to branch 0.
    pub branch: Vec<usize>,
}

impl UniaxialDataset {
    pub fn new(eps: Vec<f64>, sig: Vec<f64>) -> Result<Self> {
        if eps.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if eps.len() != sig.len() {
            return Err(Error::Invalid("strain and stress columns differ in length".into()));
        }
        for (i, (e, s)) in eps.iter().zip(&sig).enumerate() {
            if !e.is_finite() || !s.is_finite() {
                return Err(Error::NonFiniteValue(i + 1));
            }
        }
        let mut branch = vec![0];
        branch.extend(branch_ids(&eps[1..], eps[0]));
        Ok(UniaxialDataset { eps, sig, branch })
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    pub fn n_branches(&self) -> usize {
        self.branch.last().map_or(0, |b| b + 1)
    }

    /// Sample indices of branch `k`, including the reversal point that
    /// closes the previous branch.
    pub fn branch_range(&self, k: usize) -> std::ops::Range<usize> {
        let start = self.branch.iter().position(|&b| b == k).unwrap_or(self.len());
        let end = self.branch.iter().rposition(|&b| b == k).map_or(start, |e| e + 1);
        start.saturating_sub(usize::from(k > 0))..end
    }

    /// Piecewise-linear stress at strain `e` on branch `k`.
    pub fn interpolate(&self, k: usize, e: f64) -> Option<f64> {
        let r = self.branch_range(k);
        if r.is_empty() {
            return None;
        }
        let xs = &self.eps[r.clone()];
        let ys = &self.sig[r];
        let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let tol = 1e-12 * (hi - lo).abs().max(1e-12);
        if e < lo - tol || e > hi + tol {
            return None;
        }
        if xs.len() == 1 {
            return Some(ys[0]);
        }
        for i in 0..xs.len() - 1 {
            let (a, b) = (xs[i], xs[i + 1]);
            let (mn, mx) = (a.min(b), a.max(b));
            if e >= mn - tol && e <= mx + tol {
                if a == b {
                    return Some(ys[i + 1]);
                }
                let t = ((e - a) / (b - a)).clamp(0.0, 1.0);
                return Some(ys[i] + t * (ys[i + 1] - ys[i]));
            }
        }
        None
    }

    /// CSV with header `step,eps11,sig11`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        let io = |e: csv::Error| Error::Io(e.to_string());
        wr.write_record(["step", "eps11", "sig11"]).map_err(io)?;
        for (i, (e, s)) in self.eps.iter().zip(&self.sig).enumerate() {
            wr.write_record([i.to_string(), format!("{e:?}"), format!("{s:?}")]).map_err(io)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Read a CSV with `eps11` and `sig11` columns (others ignored).
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let header = rd.headers().map_err(|e| Error::ParseError { line: 1, msg: e.to_string() })?.clone();
        let col = |name: &str| {
            header.iter().position(|h| h == name).ok_or_else(|| Error::ParseError {
                line: 1,
                msg: format!("missing column `{name}`"),
            })
        };
        let (ie, is) = (col("eps11")?, col("sig11")?);
        let (mut eps, mut sig) = (Vec::new(), Vec::new());
        for (i, rec) in rd.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::ParseError { line, msg: e.to_string() })?;
            let field = |k: usize| -> Result<f64> {
                let s = rec.get(k).ok_or_else(|| Error::ParseError { line, msg: "missing field".into() })?;
                let v: f64 = s.parse().map_err(|_| Error::ParseError { line, msg: format!("not a number: `{s}`") })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFiniteValue(i + 1))
                }
            };
            eps.push(field(ie)?);
            sig.push(field(is)?);
        }
        Self::new(eps, sig)
    }
}

pub fn load_dataset(path: &Path) -> Result<UniaxialDataset> {
    UniaxialDataset::read_csv(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<UniaxialDataset> {
        UniaxialDataset::read_csv(s.as_bytes())
    }

    #[test]
    fn branch_detection() {
        assert_eq!(parse("eps11,sig11\n0,0\n0.1,1\n0.2,2\n").unwrap().n_branches(), 1);
        let d = parse("eps11,sig11\n0,0\n0.2,2\n-0.1,-1\n0.3,2\n").unwrap();
        assert_eq!(d.n_branches(), 3);
        assert_eq!(d.branch_range(1), 1..3);
    }

    #[test]
    fn error_paths() {
        assert_eq!(parse("eps11,sig11\n"), Err(Error::EmptyDataset));
        assert_eq!(parse("eps11,sig11\n0,0\n0.1,NaN\n"), Err(Error::NonFiniteValue(2)));
        assert!(matches!(parse("eps11,sig11\n0,abc\n"), Err(Error::ParseError { line: 2, .. })));
    }

    #[test]
    fn interpolation_stays_on_branch() {
        let d = parse("eps11,sig11\n0,0\n1,10\n0,5\n").unwrap();
        assert_eq!(d.interpolate(0, 0.5), Some(5.0));
        assert_eq!(d.interpolate(1, 0.5), Some(7.5));
        assert_eq!(d.interpolate(1, 1.5), None);
    }
}
