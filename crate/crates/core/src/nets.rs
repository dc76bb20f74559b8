//! Feedforward networks whose output is positive, monotone or convex in a
//! scalar input by construction, and the hardening functions built on them.

use crate::diff::{Dual, Hyper};
use crate::error::{Error, Result};
use crate::scalar::{c, log1p_exp, sigmoid, Real};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Lower bound for activation parameters after projection.
pub const ACT_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    Positive,
    PositiveMonotone,
    PositiveMonotoneConvex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    /// `(1/β) ln(1 + β eˣ)`, one β per hidden layer.
    Softplus,
    /// `1 / (1 + exp(-β1 (x - β2)))`, two parameters per hidden layer.
    Logistic,
}

impl Activation {
    pub fn n_params(self) -> usize {
        match self {
            Activation::Softplus => 1,
            Activation::Logistic => 2,
        }
    }
}

/// Role of each entry of the flat parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    Weight,
    Bias,
    Activation,
}

pub fn softplus_param<T: Real>(x: T, beta: T) -> T {
    // (1/β) ln(1 + β eˣ) = (1/β) log1p_exp(x + ln β)
    log1p_exp(x + beta.ln()) / beta
}

pub fn logistic_param<T: Real>(x: T, beta1: T, beta2: T) -> T {
    sigmoid(beta1 * (x - beta2))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    #[serde(rename = "W")]
    pub w: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub activation_params: Vec<f64>,
}

/// Dense scalar-to-scalar network. Hidden layers use `activation`; the
/// output layer is affine.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstrainedNet {
    pub flavor: Flavor,
    pub activation: Activation,
    /// When false the net is the unconstrained ablation variant: weights
    /// may take any sign and only activation parameters are floored.
    pub constrained: bool,
    pub hidden: Vec<usize>,
    params: Vec<f64>,
}

impl ConstrainedNet {
    pub fn default_activation(flavor: Flavor) -> Activation {
        match flavor {
            Flavor::PositiveMonotone => Activation::Logistic,
            Flavor::Positive | Flavor::PositiveMonotoneConvex => Activation::Softplus,
        }
    }

    /// Layer widths including the scalar input and output.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![1];
        w.extend(&self.hidden);
        w.push(1);
        w
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.params.len());
        self.params.copy_from_slice(p);
    }

    pub fn param_kinds(&self) -> Vec<ParamKind> {
        let widths = self.widths();
        let mut kinds = Vec::with_capacity(self.params.len());
        for l in 0..widths.len() - 1 {
            let (fan_in, fan_out) = (widths[l], widths[l + 1]);
            kinds.extend(std::iter::repeat(ParamKind::Weight).take(fan_in * fan_out));
            kinds.extend(std::iter::repeat(ParamKind::Bias).take(fan_out));
            if l + 2 < widths.len() {
                kinds.extend(std::iter::repeat(ParamKind::Activation).take(self.activation.n_params()));
            }
        }
        kinds
    }

    /// Kaiming-uniform weights and biases (bound `1/√fan_in`), mapped to
    /// their absolute values. Activation parameters start at 1.
    pub fn init(flavor: Flavor, hidden: &[usize], seed: u64) -> Self {
        let activation = Self::default_activation(flavor);
        let mut net = ConstrainedNet {
            flavor,
            activation,
            constrained: true,
            hidden: hidden.to_vec(),
            params: Vec::new(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let widths = net.widths();
        for l in 0..widths.len() - 1 {
            let (fan_in, fan_out) = (widths[l], widths[l + 1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            for _ in 0..fan_in * fan_out + fan_out {
                net.params.push(rng.gen_range(-bound..bound).abs());
            }
            if l + 2 < widths.len() {
                net.params.extend(std::iter::repeat(1.0).take(activation.n_params()));
            }
        }
        net
    }

    pub fn unconstrained(mut self) -> Self {
        self.constrained = false;
        self
    }

    /// Clamp weights and biases to be non-negative (constrained nets only)
    /// and activation parameters to [`ACT_FLOOR`].
    pub fn project(&mut self) {
        let kinds = self.param_kinds();
        project_slice(&mut self.params, &kinds, self.constrained);
    }

    pub fn check_constraints(&self) -> Result<()> {
        for (k, (v, kind)) in self.params.iter().zip(self.param_kinds()).enumerate() {
            let bad = match kind {
                ParamKind::Activation => !(*v > 0.0),
                _ => self.constrained && *v < 0.0,
            };
            if bad || !v.is_finite() {
                return Err(Error::ConstraintViolation(format!("parameter {k} ({kind:?}) = {v}")));
            }
        }
        Ok(())
    }

    /// Forward pass with an external parameter vector laid out like
    /// [`Self::params`].
    pub fn forward_with<T: Real>(&self, p: &[T], x: T) -> T {
        let widths = self.widths();
        let mut h = vec![x];
        let mut k = 0;
        for l in 0..widths.len() - 1 {
            let (fan_in, fan_out) = (widths[l], widths[l + 1]);
            let w = &p[k..k + fan_in * fan_out];
            k += fan_in * fan_out;
            let b = &p[k..k + fan_out];
            k += fan_out;
            let mut z: Vec<T> = (0..fan_out)
                .map(|i| {
                    let mut s = b[i];
                    for j in 0..fan_in {
                        s += w[i * fan_in + j] * h[j];
                    }
                    s
                })
                .collect();
            if l + 2 < widths.len() {
                let np = self.activation.n_params();
                let a = &p[k..k + np];
                k += np;
                for zi in z.iter_mut() {
                    *zi = match self.activation {
                        Activation::Softplus => softplus_param(*zi, a[0]),
                        Activation::Logistic => logistic_param(*zi, a[0], a[1]),
                    };
                }
            }
            h = z;
        }
        h[0]
    }

    pub fn forward(&self, x: f64) -> f64 {
        self.forward_with(&self.params, x)
    }

    /// Value and first two input derivatives.
    pub fn forward_derivs(&self, x: f64) -> (f64, f64, f64) {
        let p: Vec<Hyper> = self.params.iter().map(|&v| Hyper::cst(v)).collect();
        let xh = Hyper {
            re: Dual { re: x, eps: [1.0] },
            eps: [Dual { re: 1.0, eps: [0.0] }],
        };
        let y = self.forward_with(&p, xh);
        (y.re.re, y.re.eps[0], y.eps[0].eps[0])
    }

    pub fn to_layers(&self) -> Vec<Layer> {
        let widths = self.widths();
        let np = self.activation.n_params();
        let mut out = Vec::new();
        let mut k = 0;
        for l in 0..widths.len() - 1 {
            let (fan_in, fan_out) = (widths[l], widths[l + 1]);
            let w = (0..fan_out).map(|i| self.params[k + i * fan_in..k + (i + 1) * fan_in].to_vec()).collect();
            k += fan_in * fan_out;
            let b = self.params[k..k + fan_out].to_vec();
            k += fan_out;
            let mut act = Vec::new();
            if l + 2 < widths.len() {
                act = self.params[k..k + np].to_vec();
                k += np;
            }
            out.push(Layer { w, b, activation_params: act });
        }
        out
    }

    pub fn from_layers(flavor: Flavor, activation: Activation, constrained: bool, layers: &[Layer]) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Invalid("network without layers".into()));
        }
        let hidden: Vec<usize> = layers[..layers.len() - 1].iter().map(|l| l.b.len()).collect();
        let mut params = Vec::new();
        for l in layers {
            for row in &l.w {
                params.extend(row);
            }
            params.extend(&l.b);
            params.extend(&l.activation_params);
        }
        let net = ConstrainedNet { flavor, activation, constrained, hidden, params };
        let expected = param_count(&net.widths(), activation);
        if net.params.len() != expected {
            return Err(Error::Invalid(format!("expected {expected} parameters, found {}", net.params.len())));
        }
        Ok(net)
    }
}

fn param_count(widths: &[usize], activation: Activation) -> usize {
    let mut n = 0;
    for l in 0..widths.len() - 1 {
        n += widths[l] * widths[l + 1] + widths[l + 1];
        if l + 2 < widths.len() {
            n += activation.n_params();
        }
    }
    n
}

pub(crate) fn project_slice(p: &mut [f64], kinds: &[ParamKind], constrained: bool) {
    for (v, kind) in p.iter_mut().zip(kinds) {
        match kind {
            ParamKind::Activation => *v = v.max(ACT_FLOOR),
            _ if constrained => *v = v.max(0.0),
            _ => {}
        }
    }
}

/// Checked forward pass; rejects negative weights in debug builds.
pub fn net_forward(net: &ConstrainedNet, x: f64) -> Result<f64> {
    if cfg!(debug_assertions) {
        net.check_constraints()?;
    }
    Ok(net.forward(x))
}

pub fn init_net(flavor: Flavor, seed: u64) -> ConstrainedNet {
    ConstrainedNet::init(flavor, &[10], seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct NetJson {
    flavor: Flavor,
    activation: Activation,
    constrained: bool,
    layers: Vec<Layer>,
    input_scale: f64,
}

/// Isotropic scaling `R(r) = N(0) / N(s·r)` for a positive, increasing net
/// `N`, so `R(0) = 1`, `R` decreases and stays in `(0, 1]`. The
/// unconstrained variant keeps the same map, so only `R(0) = 1` survives.
#[derive(Clone, Debug, PartialEq)]
pub struct IsotropicHardeningNet {
    pub net: ConstrainedNet,
    pub input_scale: f64,
}

impl IsotropicHardeningNet {
    pub fn new(seed: u64) -> Self {
        IsotropicHardeningNet {
            net: init_net(Flavor::PositiveMonotone, seed),
            input_scale: 100.0,
        }
    }

    pub fn eval_with<T: Real>(&self, p: &[T], r: T) -> T {
        let n0 = self.net.forward_with(p, T::zero());
        let nr = self.net.forward_with(p, r * c(self.input_scale));
        n0 / nr
    }

    pub fn r_of_r(&self, r: f64) -> f64 {
        self.eval_with(self.net.params(), r)
    }

    pub fn dr_dr(&self, r: f64) -> f64 {
        let p: Vec<Dual<f64, 1>> = self.net.params().iter().map(|&v| Dual::cst(v)).collect();
        self.eval_with(&p, Dual::variable(r, 0)).eps[0]
    }

    pub fn to_json(&self) -> serde_json::Value {
        net_json(&self.net, self.input_scale)
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let (net, input_scale) = net_from_json(v)?;
        Ok(IsotropicHardeningNet { net, input_scale })
    }
}

/// Kinematic potential `φ(x) = N(s·x) − N(s·0)` for a positive, increasing,
/// convex net `N`, with `x = ‖X‖²`.
#[derive(Clone, Debug, PartialEq)]
pub struct KinematicHardeningNet {
    pub net: ConstrainedNet,
    pub input_scale: f64,
}

impl KinematicHardeningNet {
    pub fn new(seed: u64) -> Self {
        KinematicHardeningNet {
            net: init_net(Flavor::PositiveMonotoneConvex, seed),
            input_scale: 1.0,
        }
    }

    pub fn with_input_scale(mut self, s: f64) -> Self {
        self.input_scale = s;
        self
    }

    pub fn eval_with<T: Real>(&self, p: &[T], xn2: T) -> T {
        self.net.forward_with(p, xn2 * c(self.input_scale)) - self.net.forward_with(p, T::zero())
    }

    /// `dφ/dx` with a generic parameter vector.
    pub fn deriv_with<T: Real>(&self, p: &[T], xn2: T) -> T {
        let pd: Vec<Dual<T, 1>> = p.iter().map(|&v| Dual::constant(v)).collect();
        let x = Dual { re: xn2, eps: [T::one()] };
        self.eval_with(&pd, x).eps[0]
    }

    pub fn phi(&self, xn2: f64) -> f64 {
        self.eval_with(self.net.params(), xn2)
    }

    pub fn dphi(&self, xn2: f64) -> f64 {
        self.deriv_with(self.net.params(), xn2)
    }

    pub fn to_json(&self) -> serde_json::Value {
        net_json(&self.net, self.input_scale)
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let (net, input_scale) = net_from_json(v)?;
        Ok(KinematicHardeningNet { net, input_scale })
    }
}

pub fn r_of_r(h: &IsotropicHardeningNet, r: f64) -> f64 {
    h.r_of_r(r)
}

pub fn dr_dr(h: &IsotropicHardeningNet, r: f64) -> f64 {
    h.dr_dr(r)
}

pub fn phi_of_xn(k: &KinematicHardeningNet, xn2: f64) -> f64 {
    k.phi(xn2)
}

pub fn dphi(k: &KinematicHardeningNet, xn2: f64) -> f64 {
    k.dphi(xn2)
}

fn net_json(net: &ConstrainedNet, input_scale: f64) -> serde_json::Value {
    serde_json::to_value(NetJson {
        flavor: net.flavor,
        activation: net.activation,
        constrained: net.constrained,
        layers: net.to_layers(),
        input_scale,
    })
    .expect("network serializes")
}

fn net_from_json(v: &serde_json::Value) -> Result<(ConstrainedNet, f64)> {
    let j: NetJson = serde_json::from_value(v.clone()).map_err(|e| Error::Invalid(e.to_string()))?;
    Ok((ConstrainedNet::from_layers(j.flavor, j.activation, j.constrained, &j.layers)?, j.input_scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn activation_values() {
        assert!((softplus_param(0.0, 1.0) - 2f64.ln()).abs() < 1e-15);
        assert!((softplus_param(0.0, 2.0) - 0.5 * 3f64.ln()).abs() < 1e-15);
        assert!((softplus_param(800.0, 3.0) - (800.0 + 3f64.ln()) / 3.0).abs() < 1e-9);
        assert_eq!(logistic_param(0.7, 2.0, 0.7), 0.5);
        assert!((logistic_param(1.0, 1.0, 0.0) - 0.731058578630005).abs() < 1e-12);
        assert_eq!(logistic_param(1e6, 1.0, 1.0), 1.0);
    }

    #[test]
    fn zero_weight_net_returns_output_bias() {
        let mut net = init_net(Flavor::Positive, 1);
        let kinds = net.param_kinds();
        let mut p = net.params().to_vec();
        for (v, k) in p.iter_mut().zip(&kinds) {
            if *k != ParamKind::Activation {
                *v = 0.0;
            }
        }
        *p.iter_mut().rev().find(|_| true).unwrap() = 0.37;
        net.set_params(&p);
        assert_eq!(net.forward(2.0), 0.37);
    }

    #[test]
    fn single_unit_composition() {
        let net = ConstrainedNet::from_layers(
            Flavor::PositiveMonotoneConvex,
            Activation::Softplus,
            true,
            &[
                Layer { w: vec![vec![1.0]], b: vec![0.0], activation_params: vec![1.0] },
                Layer { w: vec![vec![1.0]], b: vec![0.0], activation_params: vec![] },
            ],
        )
        .unwrap();
        assert!((net.forward(0.0) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn corrections_are_exact() {
        for seed in 0..20 {
            assert_eq!(IsotropicHardeningNet::new(seed).r_of_r(0.0), 1.0);
            assert_eq!(KinematicHardeningNet::new(seed).phi(0.0), 0.0);
        }
    }

    #[test]
    fn init_is_deterministic_and_non_negative() {
        let a = init_net(Flavor::PositiveMonotone, 5);
        assert_eq!(a, init_net(Flavor::PositiveMonotone, 5));
        assert_ne!(a.params(), init_net(Flavor::PositiveMonotone, 6).params());
        assert!(a.params().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn negative_weight_is_rejected() {
        let mut net = init_net(Flavor::Positive, 3);
        let mut p = net.params().to_vec();
        p[0] = -0.1;
        net.set_params(&p);
        if cfg!(debug_assertions) {
            assert!(matches!(net_forward(&net, 1.0), Err(Error::ConstraintViolation(_))));
        }
        net.project();
        assert!(net_forward(&net, 1.0).is_ok());
    }
}
