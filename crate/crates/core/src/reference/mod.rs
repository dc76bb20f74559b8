//! Phenomenological reference laws used to synthesize data.
//!
//! Both use the additive convention `f = J(σ − X) − σ_y − R` and the
//! shared return-mapping solver.

mod fit;

pub use fit::{fit_phenomenological, mean_trace, FitConfig, FitResult};

use crate::constitutive::ElasticParams;
use crate::data::UniaxialDataset;
use crate::error::Result;
use crate::path::LoadingPath;
use crate::return_map::{Constitutive, Control, Integrator, MaterialState};
use crate::scalar::{c, Real};
use crate::tensor::SymTensor3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleNlkParams {
    pub e: f64,
    pub nu: f64,
    pub c: f64,
    pub gamma: f64,
    pub m: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub sigma_y: f64,
}

impl SingleNlkParams {
    /// Mixed isotropic and kinematic hardening.
    pub fn table() -> Self {
        SingleNlkParams {
            e: 200e3,
            nu: 0.3,
            c: 15.0,
            gamma: 550.0,
            m: 0.9,
            h1: 0.1875,
            h2: 0.25,
            h3: 2.0,
            sigma_y: 207.0,
        }
    }

    pub fn isotropic_only() -> Self {
        SingleNlkParams { c: 0.0, gamma: 0.0, ..Self::table() }
    }

    pub fn kinematic_only() -> Self {
        SingleNlkParams { h1: 0.0, h2: 0.0, ..Self::table() }
    }

    pub fn fitted(&self) -> [f64; 6] {
        [self.c, self.gamma, self.m, self.h1, self.h2, self.h3]
    }

    pub fn with_fitted(&self, p: &[f64]) -> Self {
        SingleNlkParams { c: p[0], gamma: p[1], m: p[2], h1: p[3], h2: p[4], h3: p[5], ..*self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiNlkParams {
    pub e: f64,
    pub nu: f64,
    pub c: [f64; 3],
    pub gamma: [f64; 3],
    pub b: f64,
    pub q_m: f64,
    pub q_0: f64,
    pub mu: f64,
    /// Initial yield stress.
    pub k: f64,
    pub m: f64,
}

impl MultiNlkParams {
    /// Tabulated Chaboche constants with the elastic constants of the
    /// single-backstress study.
    pub fn table() -> Self {
        MultiNlkParams {
            e: 200e3,
            nu: 0.3,
            c: [80_000.0, 300_000.0, 1_000.0],
            gamma: [800.0, 10_000.0, 7.0],
            b: 8.0,
            q_m: 300.0,
            q_0: 14.0,
            mu: 10.0,
            k: 100.0,
            m: 2.0,
        }
    }
}

/// Bounds for the phenomenological fit of `(C, γ, m, H1, H2, H3)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds {
    pub lower: [f64; 6],
    pub upper: [f64; 6],
}

impl Default for ParamBounds {
    fn default() -> Self {
        ParamBounds {
            lower: [1.0, 1.0, 0.5, 0.01, 0.01, 0.01],
            upper: [100.0, 2000.0, 1.5, 5.0, 5.0, 5.0],
        }
    }
}

impl ParamBounds {
    pub fn clamp(&self, p: &mut [f64]) {
        for i in 0..6 {
            p[i] = p[i].clamp(self.lower[i], self.upper[i]);
        }
    }
}

/// Voce law `H1 r + H2 (1 − exp(−H3 r))`.
pub fn voce_r(r: f64, p: &SingleNlkParams) -> f64 {
    voce(r, p.h1, p.h2, p.h3)
}

fn voce<T: Real>(r: T, h1: T, h2: T, h3: T) -> T {
    h1 * r + h2 * (T::one() - (-h3 * r).exp())
}

/// `x^p` with the value and slope at `x = 0` taken as zero.
fn pow_guard<T: Real>(x: T, p: T) -> T {
    if x.value() > 0.0 {
        x.pow_real(p)
    } else {
        T::zero()
    }
}

/// Single backstress `Ẋ = (2/3) C ε̇ᵖ − γ (X:X)^m X ṙ`, Voce isotropic
/// hardening, `ṙ = λ̇`. Parameters `θ = (C, γ, m, H1, H2, H3)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleNlk {
    pub p: SingleNlkParams,
}

impl Constitutive for SingleNlk {
    fn elastic(&self) -> ElasticParams {
        ElasticParams { e: self.p.e, nu: self.p.nu }
    }

    fn sigma_y(&self) -> f64 {
        self.p.sigma_y
    }

    fn n_internal(&self) -> usize {
        7
    }

    fn internal_scales(&self) -> Vec<f64> {
        let sy = self.p.sigma_y;
        vec![sy, sy, sy, sy, sy, sy, 1.0]
    }

    fn params(&self) -> Vec<f64> {
        self.p.fitted().to_vec()
    }

    fn set_params(&mut self, p: &[f64]) {
        self.p = self.p.with_fitted(p);
    }

    fn yield_value<T: Real>(&self, th: &[T], sigma: &SymTensor3<T>, int: &[T]) -> T {
        let x = SymTensor3::from_slice(&int[0..6]);
        (*sigma - x).vm_equivalent() - c(self.p.sigma_y) - voce(int[6], th[3], th[4], th[5])
    }

    fn plastic_rows<T: Real>(
        &self,
        th: &[T],
        int_n: &[T],
        sigma: &SymTensor3<T>,
        int: &[T],
        dlam: T,
        rows: &mut [T],
    ) -> SymTensor3<T> {
        let sy = c::<T>(self.p.sigma_y);
        let (cm, gamma, m) = (th[0], th[1], th[2]);
        let x = SymTensor3::from_slice(&int[0..6]);
        let x_n = SymTensor3::from_slice(&int_n[0..6]);
        let rel = *sigma - x;
        let j = rel.vm_equivalent();
        let n = rel.deviator().scale(c::<T>(1.5) / j);
        let recall = gamma * pow_guard(x.frobenius_sq(), m);
        for a in 0..6 {
            let rate = c::<T>(2.0 / 3.0) * cm * n[a] - recall * x[a];
            rows[a] = (x[a] - x_n[a] - dlam * rate) / sy;
        }
        rows[6] = int[6] - int_n[6] - dlam;
        rows[7] = (j - sy - voce(int[6], th[3], th[4], th[5])) / sy;
        n
    }

    fn backstress(&self, int: &[f64]) -> SymTensor3<f64> {
        SymTensor3::from_slice(&int[0..6])
    }

    fn accumulated(&self, int: &[f64]) -> f64 {
        int[6]
    }

    fn iso_force(&self, int: &[f64]) -> f64 {
        voce_r(int[6], &self.p)
    }

    /// `σ:Δεᵖ − R Δr − X:Δα` with `X = (2/3) C α`.
    fn dissipation(&self, int_n: &[f64], int: &[f64], sigma: &SymTensor3<f64>, d_eps_p: &SymTensor3<f64>) -> f64 {
        let x = SymTensor3::from_slice(&int[0..6]);
        let dx = x - SymTensor3::from_slice(&int_n[0..6]);
        let kin = if self.p.c > 0.0 { 1.5 * x.ddot(&dx) / self.p.c } else { 0.0 };
        sigma.ddot(d_eps_p) - voce_r(int[6], &self.p) * (int[6] - int_n[6]) - kin
    }
}

/// Three superposed backstresses
/// `Ẋᵢ = (2/3) Cᵢ ε̇ᵖ − (γᵢ'²/Cᵢ) J(Xᵢ)^{m−1} Xᵢ ṙ` with
/// `γᵢ' = γᵢ / (1 + R/k)`, and `Ṙ = b (Q(r) − R) ṙ`,
/// `Q(r) = Q_M + (Q_0 − Q_M) exp(−μ r)`.
///
/// Internal variables are `[X₁, X₂, X₃, r, R]`. Parameters
/// `θ = (C₁, C₂, C₃, γ₁, γ₂, γ₃, b, Q_M, Q_0, μ, m)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiNlk {
    pub p: MultiNlkParams,
}

/// Saturation target of the isotropic force at accumulated variable `r`.
pub fn chaboche_q<T: Real>(r: T, q_m: T, q_0: T, mu: T) -> T {
    q_m + (q_0 - q_m) * (-mu * r).exp()
}

impl Constitutive for MultiNlk {
    fn elastic(&self) -> ElasticParams {
        ElasticParams { e: self.p.e, nu: self.p.nu }
    }

    fn sigma_y(&self) -> f64 {
        self.p.k
    }

    fn n_internal(&self) -> usize {
        20
    }

    fn internal_scales(&self) -> Vec<f64> {
        let mut s = vec![self.p.k; 18];
        s.push(1.0);
        s.push(self.p.k);
        s
    }

    fn params(&self) -> Vec<f64> {
        let p = &self.p;
        let mut v = p.c.to_vec();
        v.extend(p.gamma);
        v.extend([p.b, p.q_m, p.q_0, p.mu, p.m]);
        v
    }

    fn set_params(&mut self, v: &[f64]) {
        self.p.c.copy_from_slice(&v[0..3]);
        self.p.gamma.copy_from_slice(&v[3..6]);
        self.p.b = v[6];
        self.p.q_m = v[7];
        self.p.q_0 = v[8];
        self.p.mu = v[9];
        self.p.m = v[10];
    }

    fn yield_value<T: Real>(&self, _th: &[T], sigma: &SymTensor3<T>, int: &[T]) -> T {
        let x = sum_backstress(int);
        (*sigma - x).vm_equivalent() - c(self.p.k) - int[19]
    }

    fn plastic_rows<T: Real>(
        &self,
        th: &[T],
        int_n: &[T],
        sigma: &SymTensor3<T>,
        int: &[T],
        dlam: T,
        rows: &mut [T],
    ) -> SymTensor3<T> {
        let k = c::<T>(self.p.k);
        let x = sum_backstress(int);
        let rel = *sigma - x;
        let j = rel.vm_equivalent();
        let n = rel.deviator().scale(c::<T>(1.5) / j);
        let (r, big_r) = (int[18], int[19]);
        let tau = T::one() + big_r / k;
        let half_m1 = (th[10] - T::one()) * c(0.5);
        for i in 0..3 {
            let xi = SymTensor3::from_slice(&int[6 * i..6 * i + 6]);
            let ci = th[i];
            let gi = th[3 + i] / tau;
            let recall = if ci.value() > 0.0 {
                gi * gi / ci * pow_guard(c::<T>(1.5) * xi.frobenius_sq(), half_m1)
            } else {
                T::zero()
            };
            for a in 0..6 {
                let rate = c::<T>(2.0 / 3.0) * ci * n[a] - recall * xi[a];
                rows[6 * i + a] = (xi[a] - int_n[6 * i + a] - dlam * rate) / k;
            }
        }
        rows[18] = r - int_n[18] - dlam;
        let q = chaboche_q(r, th[7], th[8], th[9]);
        rows[19] = (big_r - int_n[19] - dlam * th[6] * (q - big_r)) / k;
        rows[20] = (j - k - big_r) / k;
        n
    }

    fn backstress(&self, int: &[f64]) -> SymTensor3<f64> {
        sum_backstress(int)
    }

    fn accumulated(&self, int: &[f64]) -> f64 {
        int[18]
    }

    fn iso_force(&self, int: &[f64]) -> f64 {
        int[19]
    }

    fn dissipation(&self, int_n: &[f64], int: &[f64], sigma: &SymTensor3<f64>, d_eps_p: &SymTensor3<f64>) -> f64 {
        let mut kin = 0.0;
        for i in 0..3 {
            if self.p.c[i] > 0.0 {
                let xi = SymTensor3::from_slice(&int[6 * i..6 * i + 6]);
                let dxi = xi - SymTensor3::from_slice(&int_n[6 * i..6 * i + 6]);
                kin += 1.5 * xi.ddot(&dxi) / self.p.c[i];
            }
        }
        sigma.ddot(d_eps_p) - int[19] * (int[18] - int_n[18]) - kin
    }
}

fn sum_backstress<T: Real>(int: &[T]) -> SymTensor3<T> {
    SymTensor3::from_slice(&int[0..6]) + SymTensor3::from_slice(&int[6..12]) + SymTensor3::from_slice(&int[12..18])
}

/// One reference increment; `ctrl` selects strain or uniaxial control.
pub fn single_nlk_step(state: &MaterialState, ctrl: &Control, p: &SingleNlkParams) -> Result<(MaterialState, SymTensor3<f64>)> {
    let m = SingleNlk { p: *p };
    let r = Integrator::new(&m).step(state, ctrl)?;
    Ok((r.state, r.sigma))
}

pub fn multi_nlk_step(state: &MaterialState, ctrl: &Control, p: &MultiNlkParams) -> Result<(MaterialState, SymTensor3<f64>)> {
    let m = MultiNlk { p: *p };
    let r = Integrator::new(&m).step(state, ctrl)?;
    Ok((r.state, r.sigma))
}

/// Axial stress response along a loading path, starting from the virgin
/// state. Row 0 is the unloaded origin.
pub fn simulate_uniaxial<M: Constitutive>(path: &LoadingPath, model: &M) -> Result<UniaxialDataset> {
    let integ = Integrator::new(model);
    let mut state = MaterialState::virgin(model);
    let mut eps = vec![0.0];
    let mut sig = vec![0.0];
    for t in path.targets() {
        let r = integ.step(&state, &Control::Uniaxial(t))?;
        eps.push(t);
        sig.push(r.sigma[0]);
        state = r.state;
    }
    UniaxialDataset::new(eps, sig)
}

/// Axial stress samples along `path` with optional Gaussian noise of
/// standard deviation `noise·σ_y` on the stress.
pub fn generate_uniaxial_dataset<M: Constitutive>(path: &LoadingPath, model: &M, noise: f64, seed: u64) -> Result<UniaxialDataset> {
    let mut d = simulate_uniaxial(path, model)?;
    if noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Normal::new(0.0, noise * model.sigma_y()).map_err(|e| crate::Error::Invalid(e.to_string()))?;
        for s in d.sig.iter_mut().skip(1) {
            *s += dist.sample(&mut rng);
        }
    }
    Ok(d)
}
