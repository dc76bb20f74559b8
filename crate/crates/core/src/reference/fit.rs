use super::{ParamBounds, SingleNlk, SingleNlkParams};
use crate::data::UniaxialDataset;
use crate::error::{Error, Result};
use crate::path::LoadingPath;
use crate::trainer::{path_loss_grad, AdamW};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub iterations: usize,
    /// Step size in coordinates normalized by the bound widths.
    pub lr: f64,
    pub bounds: ParamBounds,
    /// Known elastic constants and initial yield stress.
    pub base: SingleNlkParams,
    /// Fixed starting point instead of a uniform draw within the bounds.
    pub init: Option<[f64; 6]>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            iterations: 600,
            lr: 1e-2,
            bounds: ParamBounds::default(),
            base: SingleNlkParams::table(),
            init: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: SingleNlkParams,
    /// Loss of the iterate at the start of every iteration.
    pub loss: Vec<f64>,
}

/// Gradient-based fit of `(C, γ, m, H1, H2, H3)` through the reference
/// integrator, with the trainer's loss and optimizer. Iterates are kept
/// inside the bounds.
pub fn fit_phenomenological(data: &UniaxialDataset, path: &LoadingPath, cfg: &FitConfig, seed: u64) -> Result<FitResult> {
    let b = &cfg.bounds;
    let width: Vec<f64> = (0..6).map(|i| b.upper[i] - b.lower[i]).collect();
    if width.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::Invalid("empty parameter bounds".into()));
    }
    let start = match cfg.init {
        Some(p) => p,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            std::array::from_fn(|i| rng.gen_range(b.lower[i]..=b.upper[i]))
        }
    };
    let mut u: Vec<f64> = (0..6).map(|i| (start[i] - b.lower[i]) / width[i]).collect();
    let to_params = |u: &[f64]| -> [f64; 6] {
        let mut p: [f64; 6] = std::array::from_fn(|i| b.lower[i] + u[i] * width[i]);
        b.clamp(&mut p);
        p
    };
    let lr = vec![cfg.lr; 6];
    let half = vec![0.5 * cfg.lr; 6];
    let wd = vec![0.0; 6];
    let mut opt = AdamW::new(6);
    let mut loss = Vec::with_capacity(cfg.iterations + 1);
    let mut last: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut failures = 0;
    while loss.len() <= cfg.iterations {
        let model = SingleNlk { p: cfg.base.with_fitted(&to_params(&u)) };
        match path_loss_grad(&model, path, data) {
            Ok((l, g)) => {
                failures = 0;
                loss.push(l);
                if loss.len() > cfg.iterations {
                    break;
                }
                let gu: Vec<f64> = g.iter().zip(&width).map(|(g, w)| g * w).collect();
                last = Some((u.clone(), gu.clone()));
                opt.step(&mut u, &gu, &lr, &wd);
                u.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
            }
            Err(e @ (Error::NoConvergence { .. } | Error::NegativeMultiplier(_) | Error::SingularSystem | Error::NonFinite)) => {
                failures += 1;
                let Some((u0, g0)) = &last else { return Err(e) };
                if failures >= 3 {
                    return Err(e);
                }
                u = u0.clone();
                opt.step(&mut u, g0, &half, &wd);
                u.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(FitResult { params: cfg.base.with_fitted(&to_params(&u)), loss })
}

/// Element-wise mean of equally long loss traces.
pub fn mean_trace(traces: &[Vec<f64>]) -> Vec<f64> {
    let n = traces.iter().map(Vec::len).min().unwrap_or(0);
    (0..n).map(|i| traces.iter().map(|t| t[i]).sum::<f64>() / traces.len() as f64).collect()
}
