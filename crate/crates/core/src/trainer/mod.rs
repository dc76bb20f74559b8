//! Path-integrated loss, its adjoint gradient and the training loop.

mod adamw;

pub use adamw::AdamW;
pub use crate::path::LoadingPath;

use crate::data::UniaxialDataset;
use crate::diff::{Tape, Var};
use crate::error::{Error, Result};
use crate::nets::ParamKind;
use crate::reference::simulate_uniaxial;
use crate::return_map::{step_jacobian, Group, step_system, Constitutive, Control, Integrator, MaterialState, SurrogateModel};
use crate::scalar::Real;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// Model that can be trained with [`optimize`].
pub trait Trainable: Constitutive + Clone {
    fn groups(&self) -> Vec<Group>;
    /// Map a parameter vector back onto the admissible set.
    fn project_params(&self, p: &mut [f64]);
    /// Kinematic modulus reported in the training record.
    fn material_c(&self) -> f64;
}

impl Trainable for SurrogateModel {
    fn groups(&self) -> Vec<Group> {
        SurrogateModel::groups(self)
    }

    fn project_params(&self, p: &mut [f64]) {
        SurrogateModel::project_params(self, p)
    }

    fn material_c(&self) -> f64 {
        self.c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub iterations: usize,
    pub lr_net: f64,
    pub lr_material: f64,
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: 300,
            lr_net: 1e-2,
            lr_material: 5e-2,
            weight_decay: 1e-2,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainRecord {
    /// Loss of the iterate at the start of every iteration.
    pub loss: Vec<f64>,
    pub c: Vec<f64>,
    pub best_iter: usize,
    pub best_loss: f64,
    pub best_params: Vec<f64>,
    /// Iterations whose forward solve failed.
    pub failures: Vec<usize>,
}

impl TrainRecord {
    pub fn normalized_loss(&self) -> Vec<f64> {
        let l0 = self.loss.first().copied().unwrap_or(1.0);
        self.loss.iter().map(|l| l / l0).collect()
    }

    /// CSV with header `iter,loss,C`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "iter,loss,C")?;
        for (i, (l, c)) in self.loss.iter().zip(&self.c).enumerate() {
            writeln!(w, "{i},{l:?},{c:?}")?;
        }
        Ok(())
    }
}

/// Forward record of one increment, enough to replay it on a tape.
struct StepRecord {
    s_prev: Vec<f64>,
    x: Vec<f64>,
    target: f64,
    plastic: bool,
    data: f64,
}

/// Reference stress of every increment of `path`, interpolated on the
/// matching branch of `data`.
pub fn path_targets(path: &LoadingPath, data: &UniaxialDataset) -> Result<Vec<f64>> {
    path.targets()
        .iter()
        .zip(path.branches())
        .enumerate()
        .map(|(step, (&e, b))| data.interpolate(b, e).ok_or(Error::PathOutsideData { step, branch: b, eps: e }))
        .collect()
}

fn forward<M: Constitutive>(m: &M, path: &LoadingPath, data: &[f64]) -> Result<(f64, Vec<StepRecord>)> {
    let integ = Integrator::new(m);
    let mut state = MaterialState::virgin(m);
    let mut loss = 0.0;
    let mut steps = Vec::with_capacity(data.len());
    for (&t, &d) in path.targets().iter().zip(data) {
        let r = integ.step(&state, &Control::Uniaxial(t))?;
        loss += (r.sigma[0] - d).powi(2);
        steps.push(StepRecord { s_prev: state.flat(), x: r.x, target: t, plastic: r.plastic, data: d });
        state = r.state;
    }
    Ok((loss, steps))
}

/// Sum of squared axial stress errors along the path.
pub fn path_loss<M: Constitutive>(m: &M, path: &LoadingPath, data: &UniaxialDataset) -> Result<f64> {
    let d = path_targets(path, data)?;
    forward(m, path, &d).map(|r| r.0)
}

/// Loss and its gradient with respect to [`Constitutive::params`].
///
/// Each converged step satisfies `G(x, s_prev, θ) = 0` and produces
/// `s = Φ(x, s_prev)`. Sweeping the path backwards, the adjoint of `x` is
/// `x̄ = ∂ℓ/∂x + Φ_xᵀ s̄`, the multiplier solves `G_xᵀ w = x̄`, and the
/// previous state and parameters receive `Φ_sᵀ s̄ − G_sᵀ w` and `−G_θᵀ w`.
pub fn path_loss_grad<M: Constitutive>(m: &M, path: &LoadingPath, data: &UniaxialDataset) -> Result<(f64, Vec<f64>)> {
    let d = path_targets(path, data)?;
    let (loss, steps) = forward(m, path, &d)?;
    let theta = m.params();
    let mut th_bar = vec![0.0; theta.len()];
    let mut s_bar = vec![0.0; 12 + m.n_internal()];
    for st in steps.iter().rev() {
        let ctrl = Control::Uniaxial(st.target);
        let tape = Tape::with_capacity(4096);
        let th = tape.vars(&theta);
        let s = tape.vars(&st.s_prev);
        let x = tape.vars(&st.x);
        let (rows, s_new, sigma) = step_system(m, &th, &s, &x, &ctrl, st.plastic);
        let e = sigma[0] - Var::cst(st.data);
        let l = e * e;
        let mut seeds: Vec<(Var, f64)> = vec![(l, 1.0)];
        seeds.extend(s_new.iter().zip(&s_bar).filter(|(_, w)| **w != 0.0).map(|(v, w)| (*v, *w)));
        let adj = tape.backward(&seeds);
        let x_bar = DVector::from_iterator(x.len(), x.iter().map(|v| adj.wrt(v)));
        let direct: Vec<f64> = s.iter().map(|v| adj.wrt(v)).collect();

        let (_, jac) = step_jacobian(m, &theta, &st.s_prev, &st.x, &ctrl, st.plastic)?;
        let w = jac.transpose().lu().solve(&x_bar).ok_or(Error::SingularSystem)?;
        let seeds: Vec<(Var, f64)> = rows.iter().zip(w.iter()).map(|(v, wi)| (*v, *wi)).collect();
        let adj = tape.backward(&seeds);
        for (i, v) in s.iter().enumerate() {
            s_bar[i] = direct[i] - adj.wrt(v);
        }
        for (i, v) in th.iter().enumerate() {
            th_bar[i] -= adj.wrt(v);
        }
    }
    if th_bar.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok((loss, th_bar))
}

/// Projected AdamW on the path loss.
pub fn optimize<M: Trainable>(model: &M, path: &LoadingPath, data: &UniaxialDataset, cfg: &TrainConfig) -> Result<(M, TrainRecord)> {
    let mut m = model.clone();
    let groups = m.groups();
    let lr: Vec<f64> = groups
        .iter()
        .map(|g| match g {
            Group::Net(_) => cfg.lr_net,
            Group::Material => cfg.lr_material,
        })
        .collect();
    let wd: Vec<f64> = groups
        .iter()
        .map(|g| match g {
            Group::Net(ParamKind::Weight | ParamKind::Bias) => cfg.weight_decay,
            _ => 0.0,
        })
        .collect();
    let half_lr: Vec<f64> = lr.iter().map(|l| 0.5 * l).collect();

    let mut opt = AdamW::new(groups.len());
    let mut rec = TrainRecord { best_loss: f64::INFINITY, ..Default::default() };
    let mut params = m.params();
    let mut last_good: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut consecutive = 0;
    let mut iter = 0;
    while iter <= cfg.iterations {
        m.set_params(&params);
        match path_loss_grad(&m, path, data) {
            Ok((loss, grad)) => {
                consecutive = 0;
                rec.loss.push(loss);
                rec.c.push(m.material_c());
                if loss < rec.best_loss {
                    rec.best_loss = loss;
                    rec.best_iter = iter;
                    rec.best_params = params.clone();
                }
                if iter == cfg.iterations {
                    break;
                }
                last_good = Some((params.clone(), grad.clone()));
                opt.step(&mut params, &grad, &lr, &wd);
                m.project_params(&mut params);
                iter += 1;
            }
            Err(e @ (Error::NoConvergence { .. } | Error::NegativeMultiplier(_) | Error::SingularSystem | Error::NonFinite)) => {
                rec.failures.push(iter);
                consecutive += 1;
                if consecutive >= 3 {
                    return Err(e);
                }
                let Some((p, g)) = &last_good else { return Err(e) };
                // retry the previous update at half the step
                params = p.clone();
                opt.step(&mut params, g, &half_lr, &wd);
                m.project_params(&mut params);
            }
            Err(e) => return Err(e),
        }
    }
    m.set_params(&rec.best_params);
    Ok((m, rec))
}

/// Train a surrogate; returns the best-loss snapshot.
pub fn train(model: &SurrogateModel, path: &LoadingPath, data: &UniaxialDataset, cfg: &TrainConfig) -> Result<(SurrogateModel, TrainRecord)> {
    optimize(model, path, data, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// Relative L2 axial-stress error over the training increments.
    pub interpolation: f64,
    /// Relative L2 axial-stress error over the remaining increments.
    pub extrapolation: f64,
}

fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Compare a model with a reference along `test_path`, whose leading
/// increments must coincide with `train_path`.
pub fn evaluate_extrapolation<M: Constitutive, R: Constitutive>(
    model: &M,
    train_path: &LoadingPath,
    test_path: &LoadingPath,
    reference: &R,
) -> Result<ErrorReport> {
    let n_train = train_path.n_increments();
    let a = simulate_uniaxial(test_path, model)?;
    let b = simulate_uniaxial(test_path, reference)?;
    let split = (n_train + 1).min(a.sig.len());
    Ok(ErrorReport {
        interpolation: rel_l2(&a.sig[1..split], &b.sig[1..split]),
        extrapolation: rel_l2(&a.sig[split..], &b.sig[split..]),
    })
}

/// Sampled violations of the hardening-function constraints on
/// `[0, r_max]` and `[0, x_max]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstraintViolations {
    pub r_not_decreasing: usize,
    pub r_not_positive: usize,
    pub phi_not_increasing: usize,
    pub phi_not_convex: usize,
}

impl ConstraintViolations {
    pub fn total(&self) -> usize {
        self.r_not_decreasing + self.r_not_positive + self.phi_not_increasing + self.phi_not_convex
    }
}

pub fn count_violations(m: &SurrogateModel, r_max: f64, x_max: f64, samples: usize) -> ConstraintViolations {
    let mut v = ConstraintViolations::default();
    for i in 0..=samples {
        let t = i as f64 / samples as f64;
        let r = t * r_max;
        if m.iso.dr_dr(r) > 1e-10 {
            v.r_not_decreasing += 1;
        }
        if m.iso.r_of_r(r) <= 0.0 {
            v.r_not_positive += 1;
        }
        let (_, d1, d2) = m.kin.net.forward_derivs(t * x_max * m.kin.input_scale);
        if d1 < -1e-10 {
            v.phi_not_increasing += 1;
        }
        if d2 < -1e-8 {
            v.phi_not_convex += 1;
        }
    }
    v
}

/// Largest accumulated variable and backstress norm seen along a path.
pub fn internal_extent<M: Constitutive>(m: &M, path: &LoadingPath) -> Result<(f64, f64)> {
    let integ = Integrator::new(m);
    let mut state = MaterialState::virgin(m);
    let (mut r_max, mut x_max) = (0.0f64, 0.0f64);
    for t in path.targets() {
        state = integ.step(&state, &Control::Uniaxial(t))?.state;
        r_max = r_max.max(m.accumulated(&state.internal));
        x_max = x_max.max(m.backstress(&state.internal).frobenius_sq());
    }
    Ok((r_max, x_max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationArm {
    pub final_loss: f64,
    pub relative_loss: f64,
    pub errors: ErrorReport,
    pub violations: ConstraintViolations,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub constrained: AblationArm,
    pub unconstrained: AblationArm,
}

/// Train the constrained surrogate and its unconstrained twin (same
/// initialization, corrections kept, sign constraints dropped) on the same
/// data and compare them.
pub fn ablate_constraints<R: Constitutive>(
    base: &SurrogateModel,
    train_path: &LoadingPath,
    test_path: &LoadingPath,
    data: &UniaxialDataset,
    reference: &R,
    cfg: &TrainConfig,
) -> Result<(AblationReport, [TrainRecord; 2])> {
    let mut free = base.clone();
    free.iso.net = free.iso.net.unconstrained();
    free.kin.net = free.kin.net.unconstrained();
    let (r_ref, x_ref) = internal_extent(reference, test_path)?;
    let arm = |m: &SurrogateModel| -> Result<(AblationArm, TrainRecord)> {
        let (trained, rec) = train(m, train_path, data, cfg)?;
        let errors = evaluate_extrapolation(&trained, train_path, test_path, reference)?;
        let (r_seen, x_seen) = internal_extent(&trained, test_path)?;
        let violations = count_violations(&trained, 5.0 * r_seen.max(r_ref).max(1e-6), 5.0 * x_seen.max(x_ref).max(1e-6), 400);
        Ok((
            AblationArm {
                final_loss: rec.best_loss,
                relative_loss: rec.best_loss / rec.loss[0],
                errors,
                violations,
            },
            rec,
        ))
    };
    let (constrained, rc) = arm(base)?;
    let (unconstrained, ru) = arm(&free)?;
    Ok((AblationReport { constrained, unconstrained }, [rc, ru]))
}
