//! Implicit return mapping for one strain increment.
//!
//! A model implements [`Constitutive`] by supplying its plastic residual
//! rows; the elastic-trial split, the Newton solve, the uniaxial stress
//! constraints and the consistent tangent are shared by every model.
//!
//! Newton unknowns are `[εᵉ (6), z (k), Δλ]`, followed in uniaxial mode by
//! the five lateral total-strain components. `z` is the internal-variable
//! vector divided by [`Constitutive::internal_scales`]. The flat state
//! vector is `[εᵉ (6), εᵖ (6), internals (k)]` in physical units.

mod surrogate;

pub use surrogate::{Group, SurrogateModel};

use crate::constitutive::{ElasticLaw, ElasticParams, LinearElastic};
use crate::diff::{value_and_jacobian, VectorFn};
use crate::error::{Error, Result};
use crate::scalar::{c, lift, Real};
use crate::tensor::{SymTensor3, WEIGHT};
use nalgebra::{DMatrix, DVector, Matrix6};

pub const MAX_ITER: usize = 50;
/// Largest accepted max-norm of the nondimensional residual.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Trial states with `f ≤ ELASTIC_TOL·σ_y` are treated as elastic.
pub const ELASTIC_TOL: f64 = 1e-12;

/// Material law driven by the shared return-mapping machinery.
pub trait Constitutive {
    fn elastic(&self) -> ElasticParams;
    fn sigma_y(&self) -> f64;
    fn n_internal(&self) -> usize;
    /// Characteristic magnitude of each internal variable.
    fn internal_scales(&self) -> Vec<f64>;
    fn initial_internal(&self) -> Vec<f64> {
        vec![0.0; self.n_internal()]
    }

    /// Trainable parameters as a flat vector.
    fn params(&self) -> Vec<f64>;
    fn set_params(&mut self, p: &[f64]);

    /// Yield function at frozen internal variables.
    fn yield_value<T: Real>(&self, th: &[T], sigma: &SymTensor3<T>, int: &[T]) -> T;

    /// Plastic residual rows, nondimensional, `n_internal + 1` entries with
    /// the yield condition last. Returns the flow direction `n` with
    /// `Δεᵖ = Δλ n`.
    fn plastic_rows<T: Real>(
        &self,
        th: &[T],
        int_n: &[T],
        sigma: &SymTensor3<T>,
        int: &[T],
        dlam: T,
        rows: &mut [T],
    ) -> SymTensor3<T>;

    fn backstress(&self, int: &[f64]) -> SymTensor3<f64>;
    fn accumulated(&self, int: &[f64]) -> f64;
    /// Isotropic hardening force: the scaling factor for homothetic
    /// models, the additive yield-radius increase otherwise.
    fn iso_force(&self, int: &[f64]) -> f64;

    /// Dissipated energy density over one converged step.
    fn dissipation(&self, int_n: &[f64], int: &[f64], sigma: &SymTensor3<f64>, d_eps_p: &SymTensor3<f64>) -> f64;
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaterialState {
    pub eps_e: SymTensor3<f64>,
    pub eps_p: SymTensor3<f64>,
    pub internal: Vec<f64>,
}

impl MaterialState {
    pub fn virgin<M: Constitutive>(m: &M) -> Self {
        MaterialState {
            eps_e: SymTensor3::zero(),
            eps_p: SymTensor3::zero(),
            internal: m.initial_internal(),
        }
    }

    pub fn strain(&self) -> SymTensor3<f64> {
        self.eps_e + self.eps_p
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(12 + self.internal.len());
        v.extend(self.eps_e.c);
        v.extend(self.eps_p.c);
        v.extend(&self.internal);
        v
    }

    pub fn from_flat(v: &[f64]) -> Self {
        MaterialState {
            eps_e: SymTensor3::from_slice(&v[0..6]),
            eps_p: SymTensor3::from_slice(&v[6..12]),
            internal: v[12..].to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlasticIncrement {
    pub dlam: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Prescribed kinematics for one increment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Control {
    /// Full strain increment.
    Strain(SymTensor3<f64>),
    /// Target axial strain with zero lateral and shear stress.
    Uniaxial(f64),
}

impl Control {
    fn extra(&self) -> usize {
        match self {
            Control::Strain(_) => 0,
            Control::Uniaxial(_) => 5,
        }
    }
}

/// Outcome of one increment.
#[derive(Clone, Debug)]
pub struct StepResult {
    pub state: MaterialState,
    pub sigma: SymTensor3<f64>,
    pub increment: PlasticIncrement,
    pub plastic: bool,
    /// Converged Newton unknowns.
    pub x: Vec<f64>,
    /// Max-norm of the residual at each Newton iteration.
    pub residuals: Vec<f64>,
}

/// Residual, post-step state and stress of one increment, generic in the
/// scalar so it can be differentiated in `x`, the previous state and `θ`.
pub fn step_system<M: Constitutive, T: Real>(
    m: &M,
    th: &[T],
    s_prev: &[T],
    x: &[T],
    ctrl: &Control,
    plastic: bool,
) -> (Vec<T>, Vec<T>, SymTensor3<T>) {
    let k = m.n_internal();
    let sy = m.sigma_y();
    let eps_e_n = SymTensor3::from_slice(&s_prev[0..6]);
    let eps_p_n = SymTensor3::from_slice(&s_prev[6..12]);
    let int_n = &s_prev[12..12 + k];
    let eps_n1 = match ctrl {
        Control::Strain(de) => eps_e_n + eps_p_n + de.lift(),
        Control::Uniaxial(t) => {
            let o = &x[7 + k..12 + k];
            SymTensor3::new([c(*t), o[0], o[1], o[2], o[3], o[4]])
        }
    };
    let eps_tr = eps_n1 - eps_p_n;
    let eps_e = SymTensor3::from_slice(&x[0..6]);
    let scales = m.internal_scales();
    let int: Vec<T> = (0..k).map(|i| x[6 + i] * c(scales[i])).collect();
    let dlam = x[6 + k];
    let sigma = LinearElastic::new(m.elastic()).stress(&eps_e);

    let mut rows = vec![T::zero(); 7 + k + ctrl.extra()];
    if plastic {
        let n = m.plastic_rows(th, int_n, &sigma, &int, dlam, &mut rows[6..7 + k]);
        for a in 0..6 {
            rows[a] = eps_e[a] - eps_tr[a] + dlam * n[a];
        }
    } else {
        for a in 0..6 {
            rows[a] = eps_e[a] - eps_tr[a];
        }
        for i in 0..k {
            rows[6 + i] = x[6 + i] - int_n[i] / c(scales[i]);
        }
        rows[6 + k] = dlam;
    }
    if let Control::Uniaxial(_) = ctrl {
        for a in 1..6 {
            rows[6 + k + a] = sigma[a] / c(sy);
        }
    }

    let mut s_new = Vec::with_capacity(12 + k);
    s_new.extend(eps_e.c);
    s_new.extend((eps_n1 - eps_e).c);
    s_new.extend(int);
    (rows, s_new, sigma)
}

struct StepFn<'a, M> {
    model: &'a M,
    theta: &'a [f64],
    s_prev: &'a [f64],
    ctrl: Control,
    plastic: bool,
}

impl<M: Constitutive> VectorFn for StepFn<'_, M> {
    fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        let th: Vec<T> = lift(self.theta);
        let s: Vec<T> = lift(self.s_prev);
        step_system(self.model, &th, &s, x, &self.ctrl, self.plastic).0
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Residual Jacobian `∂G/∂x` at `x`.
pub fn step_jacobian<M: Constitutive>(
    m: &M,
    theta: &[f64],
    s_prev: &[f64],
    x: &[f64],
    ctrl: &Control,
    plastic: bool,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let f = StepFn { model: m, theta, s_prev, ctrl: *ctrl, plastic };
    value_and_jacobian(&f, x)
}

fn newton<M: Constitutive>(
    m: &M,
    theta: &[f64],
    s_prev: &[f64],
    ctrl: &Control,
    plastic: bool,
    mut x: Vec<f64>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut hist = Vec::new();
    for _ in 0..MAX_ITER {
        let (g, jac) = step_jacobian(m, theta, s_prev, &x, ctrl, plastic)?;
        let norm = max_abs(&g);
        hist.push(norm);
        if norm <= 1e-15 {
            return Ok((x, hist));
        }
        let n = hist.len();
        if n >= 2 && norm <= 1e-12 && norm > 0.25 * hist[n - 2] {
            // roundoff floor reached
            return Ok((x, hist));
        }
        let dx = jac.lu().solve(&DVector::from_vec(g)).ok_or(Error::SingularSystem)?;
        for (xi, di) in x.iter_mut().zip(dx.iter()) {
            *xi -= di;
        }
        if dx.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
    }
    let g = StepFn { model: m, theta, s_prev, ctrl: *ctrl, plastic }.eval(&x);
    let norm = max_abs(&g);
    hist.push(norm);
    if norm <= RESIDUAL_TOL {
        Ok((x, hist))
    } else {
        Err(Error::NoConvergence { iters: MAX_ITER, residual: norm })
    }
}

/// Return-mapping integrator bound to a model and a parameter vector.
pub struct Integrator<'a, M> {
    pub model: &'a M,
    pub theta: Vec<f64>,
}

impl<'a, M: Constitutive> Integrator<'a, M> {
    pub fn new(model: &'a M) -> Self {
        Integrator { model, theta: model.params() }
    }

    fn initial_guess(&self, state: &MaterialState, ctrl: &Control) -> Vec<f64> {
        let k = self.model.n_internal();
        let scales = self.model.internal_scales();
        let mut x = Vec::with_capacity(12 + k);
        match ctrl {
            Control::Strain(de) => x.extend((state.eps_e + *de).c),
            Control::Uniaxial(_) => x.extend(state.eps_e.c),
        }
        x.extend(state.internal.iter().zip(&scales).map(|(v, s)| v / s));
        x.push(0.0);
        if let Control::Uniaxial(_) = ctrl {
            x.extend(&state.strain().c[1..6]);
        }
        x
    }

    /// Integrate one increment from a converged state.
    pub fn step(&self, state: &MaterialState, ctrl: &Control) -> Result<StepResult> {
        let m = self.model;
        let finite = match ctrl {
            Control::Strain(de) => de.is_finite(),
            Control::Uniaxial(t) => t.is_finite(),
        };
        if !finite {
            return Err(Error::NonFinite);
        }
        let s_prev = state.flat();
        let x0 = self.initial_guess(state, ctrl);
        let (x_el, mut hist) = match ctrl {
            Control::Strain(_) => (x0, vec![0.0]),
            Control::Uniaxial(_) => newton(m, &self.theta, &s_prev, ctrl, false, x0)?,
        };
        let sigma_tr = LinearElastic::new(m.elastic()).stress(&SymTensor3::from_slice(&x_el[0..6]));
        let f_tr = m.yield_value(&self.theta, &sigma_tr, &state.internal);
        let plastic = f_tr > ELASTIC_TOL * m.sigma_y();
        let x = if plastic {
            let (x, h) = newton(m, &self.theta, &s_prev, ctrl, true, x_el)?;
            hist = h;
            x
        } else {
            x_el
        };
        let th = &self.theta;
        let (_, s_new, sigma) = step_system(m, th, &s_prev, &x, ctrl, plastic);
        if !sigma.is_finite() {
            return Err(Error::NonFinite);
        }
        let dlam = x[6 + m.n_internal()];
        if plastic && dlam < -1e-12 {
            return Err(Error::NegativeMultiplier(dlam));
        }
        Ok(StepResult {
            state: MaterialState::from_flat(&s_new),
            sigma,
            increment: PlasticIncrement {
                dlam: if plastic { dlam } else { 0.0 },
                iterations: hist.len(),
                converged: true,
            },
            plastic,
            x,
            residuals: hist,
        })
    }

    /// `∂σ/∂ε` in engineering-shear Voigt form for a converged
    /// strain-controlled step.
    pub fn consistent_tangent(&self, prev: &MaterialState, res: &StepResult, de: &SymTensor3<f64>) -> Result<Matrix6<f64>> {
        let d = LinearElastic::new(self.model.elastic()).modulus();
        if !res.plastic {
            return Ok(d);
        }
        let ctrl = Control::Strain(*de);
        let (_, jac) = step_jacobian(self.model, &self.theta, &prev.flat(), &res.x, &ctrl, true)?;
        let lu = jac.lu();
        let n = res.x.len();
        let mut rhs = DMatrix::zeros(n, 6);
        for a in 0..6 {
            rhs[(a, a)] = 1.0;
        }
        let sol = lu.solve(&rhs).ok_or(Error::SingularSystem)?;
        // dσ_a/dε_b = Σ_c D_ac w_c M_cb with M = dεᵉ/dε, then divide by w_b.
        let mut t = Matrix6::zeros();
        for a in 0..6 {
            for b in 0..6 {
                let mut s = 0.0;
                for cc in 0..6 {
                    s += d[(a, cc)] * WEIGHT[cc] * sol[(cc, b)];
                }
                t[(a, b)] = s / WEIGHT[b];
            }
        }
        Ok(t)
    }
}

/// Elastic trial quantities: `(εᵉ_trial, σ_trial, f_trial)` at frozen internals.
pub fn trial_step<M: Constitutive>(
    state: &MaterialState,
    de: &SymTensor3<f64>,
    m: &M,
) -> (SymTensor3<f64>, SymTensor3<f64>, f64) {
    let eps_tr = state.eps_e + *de;
    let sigma = LinearElastic::new(m.elastic()).stress(&eps_tr);
    let f = m.yield_value(&m.params(), &sigma, &state.internal);
    (eps_tr, sigma, f)
}

pub fn integrate_strain_controlled<M: Constitutive>(
    state: &MaterialState,
    de: &SymTensor3<f64>,
    m: &M,
) -> Result<(MaterialState, SymTensor3<f64>, PlasticIncrement)> {
    let r = Integrator::new(m).step(state, &Control::Strain(*de))?;
    Ok((r.state, r.sigma, r.increment))
}

pub fn integrate_uniaxial<M: Constitutive>(
    state: &MaterialState,
    eps11_target: f64,
    m: &M,
) -> Result<(MaterialState, f64, PlasticIncrement)> {
    let r = Integrator::new(m).step(state, &Control::Uniaxial(eps11_target))?;
    Ok((r.state, r.sigma[0], r.increment))
}

pub fn consistent_tangent<M: Constitutive>(
    m: &M,
    prev: &MaterialState,
    res: &StepResult,
    de: &SymTensor3<f64>,
) -> Result<Matrix6<f64>> {
    Integrator::new(m).consistent_tangent(prev, res, de)
}

pub fn dissipation_increment<M: Constitutive>(
    state_n: &MaterialState,
    state_out: &MaterialState,
    sigma: &SymTensor3<f64>,
    m: &M,
) -> f64 {
    let d_eps_p = state_out.eps_p - state_n.eps_p;
    if d_eps_p.max_abs() == 0.0 {
        return 0.0;
    }
    m.dissipation(&state_n.internal, &state_out.internal, sigma, &d_eps_p)
}
