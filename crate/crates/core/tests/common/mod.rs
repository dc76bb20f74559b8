#![allow(dead_code)]

pub mod five_block;

use plastokit::constitutive::ElasticParams;
use plastokit::nets::{Activation, ConstrainedNet, Flavor, Layer};
use plastokit::reference::{chaboche_q, voce_r, MultiNlkParams, SingleNlkParams};
use plastokit::return_map::SurrogateModel;

fn single_unit(flavor: Flavor, activation: Activation, w1: f64, b1: f64, w2: f64, b2: f64) -> ConstrainedNet {
    let act = match activation {
        Activation::Softplus => vec![1.0],
        Activation::Logistic => vec![1.0, 0.0],
    };
    let layers = [
        Layer { w: vec![vec![w1]], b: vec![b1], activation_params: act },
        Layer { w: vec![vec![w2]], b: vec![b2], activation_params: vec![] },
    ];
    ConstrainedNet::from_layers(flavor, activation, true, &layers).unwrap()
}

/// Surrogate with `R ≡ 1` and `φ(y) = k·y` to roundoff (a softplus unit
/// biased far into its linear range); `k = 0` gives linear kinematic
/// hardening.
pub fn surrogate_linear_phi(e: f64, nu: f64, sy: f64, c: f64, k: f64) -> SurrogateModel {
    let mut m = SurrogateModel::new(ElasticParams { e, nu }, sy, c, 0);
    m.iso.net = single_unit(Flavor::PositiveMonotone, Activation::Logistic, 1.0, 0.0, 0.0, 1.0);
    m.kin.net = single_unit(Flavor::PositiveMonotoneConvex, Activation::Softplus, 1.0, 40.0, k, 0.0);
    m.kin.input_scale = 1.0;
    m
}

/// Uniaxial-stress law reduced to one dimension. `x` is the axial
/// backstress difference `X11 − X22`, so the yield condition reads
/// `|σ − x| = radius`.
pub trait Law1d {
    fn initial(&self) -> Vec<f64>;
    fn back(&self, q: &[f64]) -> f64;
    fn radius(&self, q: &[f64]) -> f64;
    /// State after an axial plastic strain increment `s·dp`, rates frozen
    /// at `q`.
    fn advance(&self, q: &[f64], s: f64, dp: f64) -> Vec<f64>;
}

/// Sub-stepped explicit integration of a 1D law; axial stress after each
/// target strain.
pub fn uniaxial_oracle(law: &dyn Law1d, e: f64, targets: &[f64], sub: usize) -> Vec<f64> {
    let mut q = law.initial();
    let (mut eps, mut ep) = (0.0, 0.0);
    let mut out = Vec::with_capacity(targets.len());
    for &t in targets {
        let de = (t - eps) / sub as f64;
        for _ in 0..sub {
            eps += de;
            let tr = e * (eps - ep);
            let rel = tr - law.back(&q);
            if rel.abs() <= law.radius(&q) {
                continue;
            }
            let s = rel.signum();
            let h = |dp: f64| {
                let qn = law.advance(&q, s, dp);
                (tr - e * s * dp - law.back(&qn)).abs() - law.radius(&qn)
            };
            let mut hi = (rel.abs() - law.radius(&q)) / e;
            while h(hi) > 0.0 {
                hi *= 2.0;
            }
            let mut lo = 0.0;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if h(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let dp = 0.5 * (lo + hi);
            q = law.advance(&q, s, dp);
            ep += s * dp;
        }
        eps = t;
        out.push(e * (eps - ep));
    }
    out
}

pub struct SurrogateLaw<'a>(pub &'a SurrogateModel);

impl Law1d for SurrogateLaw<'_> {
    fn initial(&self) -> Vec<f64> {
        vec![0.0, 0.0]
    }
    fn back(&self, q: &[f64]) -> f64 {
        q[0]
    }
    fn radius(&self, q: &[f64]) -> f64 {
        self.0.yield_params.sigma_y / self.0.iso.r_of_r(q[1])
    }
    fn advance(&self, q: &[f64], s: f64, dp: f64) -> Vec<f64> {
        let m = self.0;
        let big_r = m.iso.r_of_r(q[1]);
        let dlam = dp / big_r;
        let y = 2.0 / 3.0 * q[0] * q[0];
        let dx = m.c * dlam * (big_r * s - 4.0 / 3.0 * m.kin.dphi(y) * q[0]);
        vec![q[0] + dx, q[1] + dlam / big_r]
    }
}

pub struct SingleLaw(pub SingleNlkParams);

impl Law1d for SingleLaw {
    fn initial(&self) -> Vec<f64> {
        vec![0.0, 0.0]
    }
    fn back(&self, q: &[f64]) -> f64 {
        q[0]
    }
    fn radius(&self, q: &[f64]) -> f64 {
        self.0.sigma_y + voce_r(q[1], &self.0)
    }
    fn advance(&self, q: &[f64], s: f64, dp: f64) -> Vec<f64> {
        let p = &self.0;
        let y = 2.0 / 3.0 * q[0] * q[0];
        let recall = if y > 0.0 { p.gamma * y.powf(p.m) } else { 0.0 };
        vec![q[0] + p.c * s * dp - recall * q[0] * dp, q[1] + dp]
    }
}

pub struct MultiLaw(pub MultiNlkParams);

impl Law1d for MultiLaw {
    fn initial(&self) -> Vec<f64> {
        vec![0.0; 5]
    }
    fn back(&self, q: &[f64]) -> f64 {
        q[0] + q[1] + q[2]
    }
    fn radius(&self, q: &[f64]) -> f64 {
        self.0.k + q[4]
    }
    fn advance(&self, q: &[f64], s: f64, dp: f64) -> Vec<f64> {
        let p = &self.0;
        let tau = 1.0 + q[4] / p.k;
        let mut out = q.to_vec();
        for i in 0..3 {
            if p.c[i] > 0.0 {
                let g = p.gamma[i] / tau;
                let recall = if q[i] != 0.0 { g * g / p.c[i] * q[i].abs().powf(p.m - 1.0) } else { 0.0 };
                out[i] += p.c[i] * s * dp - recall * q[i] * dp;
            }
        }
        out[3] += dp;
        out[4] += p.b * (chaboche_q(q[3], p.q_m, p.q_0, p.mu) - q[4]) * dp;
        out
    }
}

/// Relative L2 distance of `a` from `b`.
pub fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Piecewise-linear strain targets through `points`, `per_leg` increments each.
pub fn legs(points: &[f64], per_leg: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut prev = 0.0;
    for &p in points {
        for i in 1..=per_leg {
            out.push(prev + (p - prev) * i as f64 / per_leg as f64);
        }
        prev = p;
    }
    out
}
