//! Uniaxial loading programs.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Piecewise-linear axial strain program starting from zero. Each segment
/// moves to `target` in `increments` equal steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadingPath {
    pub segments: Vec<(f64, usize)>,
}

impl LoadingPath {
    pub fn new(segments: Vec<(f64, usize)>) -> Result<Self> {
        if segments.iter().map(|s| s.1).sum::<usize>() == 0 {
            return Err(Error::Invalid("loading path without increments".into()));
        }
        if segments.iter().any(|s| !s.0.is_finite()) {
            return Err(Error::Invalid("non-finite strain target".into()));
        }
        Ok(LoadingPath { segments })
    }

    /// Three pulls to `amp` with two reversals in between.
    pub fn cyclic_training(amp: f64, n: usize) -> Self {
        LoadingPath {
            segments: vec![(amp, n), (-amp, 2 * n), (amp, 2 * n), (-amp, 2 * n), (amp, 2 * n)],
        }
    }

    /// Training program continued by two more reversals.
    pub fn cyclic_testing(amp: f64, n: usize) -> Self {
        let mut p = Self::cyclic_training(amp, n);
        p.segments.extend([(-amp, 2 * n), (amp, 2 * n)]);
        p
    }

    /// Fully reversed cycles with growing amplitude.
    pub fn ascending(amps: &[f64], per_unit: f64) -> Self {
        let mut segments = Vec::new();
        let mut prev = 0.0;
        for &a in amps {
            for t in [a, -a] {
                let n = (((t - prev) as f64).abs() * per_unit).round().max(1.0) as usize;
                segments.push((t, n));
                prev = t;
            }
        }
        let n = (prev.abs() * per_unit).round().max(1.0) as usize;
        segments.push((0.0, n));
        LoadingPath { segments }
    }

    /// One increment per sample after the first, following a measured
    /// strain sequence.
    pub fn from_strains(eps: &[f64]) -> Result<Self> {
        Self::new(eps.iter().skip(1).map(|&e| (e, 1)).collect())
    }

    /// The first `n` segments.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        Self::new(self.segments[..n.min(self.segments.len())].to_vec())
    }

    pub fn n_increments(&self) -> usize {
        self.segments.iter().map(|s| s.1).sum()
    }

    /// Axial strain after each increment.
    pub fn targets(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_increments());
        let mut prev = 0.0;
        for &(t, n) in &self.segments {
            for i in 1..=n {
                out.push(prev + (t - prev) * i as f64 / n as f64);
            }
            prev = t;
        }
        out
    }

    /// Branch index of each increment; a new branch starts whenever the
    /// loading direction reverses.
    pub fn branches(&self) -> Vec<usize> {
        branch_ids(&self.targets(), 0.0)
    }
}

/// Branch labels for a strain sequence preceded by `start`.
pub fn branch_ids(eps: &[f64], start: f64) -> Vec<usize> {
    let mut ids = Vec::with_capacity(eps.len());
    let mut branch = 0;
    let mut dir = 0.0;
    let mut prev = start;
    for &e in eps {
        let d = e - prev;
        if d != 0.0 {
            let s = d.signum();
            if dir != 0.0 && s != dir {
                branch += 1;
            }
            dir = s;
        }
        ids.push(branch);
        prev = e;
    }
    ids
}
