use super::Constitutive;
use crate::constitutive::{ElasticParams, YieldParams};
use crate::error::{Error, Result};
use crate::nets::{project_slice, IsotropicHardeningNet, KinematicHardeningNet, ParamKind};
use crate::scalar::{c, Real};
use crate::tensor::SymTensor3;

/// Parameter group of each trainable entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Group {
    Net(ParamKind),
    Material,
}

/// Trainable model: linear elasticity, von Mises yield scaled by
/// `R(r)`, and kinematic hardening `Ẋ = λ̇ (2/3) C (n − 2 φ'(X:X) X)`.
///
/// Internal variables are `[X (6), r]`. The accumulated variable evolves as
/// `ṙ = λ̇ J(σ − X) / σ_y`, which equals the equivalent plastic strain rate
/// divided by `R²`.
#[derive(Clone, Debug, PartialEq)]
pub struct SurrogateModel {
    pub elastic: ElasticParams,
    pub yield_params: YieldParams,
    pub iso: IsotropicHardeningNet,
    pub kin: KinematicHardeningNet,
    pub c: f64,
    /// `C` is trained as `C / c_scale`.
    pub c_scale: f64,
}

impl SurrogateModel {
    pub fn new(elastic: ElasticParams, sigma_y: f64, c0: f64, seed: u64) -> Self {
        SurrogateModel {
            elastic,
            yield_params: YieldParams { sigma_y },
            iso: IsotropicHardeningNet::new(seed),
            kin: KinematicHardeningNet::new(seed.wrapping_add(0x9e37_79b9)),
            c: c0,
            c_scale: 1.0,
        }
    }

    fn split<'t, T>(&self, th: &'t [T]) -> (&'t [T], &'t [T], &'t T) {
        let ni = self.iso.net.n_params();
        let nk = self.kin.net.n_params();
        (&th[..ni], &th[ni..ni + nk], &th[ni + nk])
    }

    pub fn groups(&self) -> Vec<Group> {
        let mut g: Vec<Group> = self.iso.net.param_kinds().into_iter().map(Group::Net).collect();
        g.extend(self.kin.net.param_kinds().into_iter().map(Group::Net));
        g.push(Group::Material);
        g
    }

    /// Restore network and material constraints after an update.
    pub fn project(&mut self) {
        self.iso.net.project();
        self.kin.net.project();
        self.c = self.c.max(0.0);
    }

    /// Apply the same projection to a raw parameter vector.
    pub fn project_params(&self, p: &mut [f64]) {
        let ni = self.iso.net.n_params();
        let nk = self.kin.net.n_params();
        project_slice(&mut p[..ni], &self.iso.net.param_kinds(), self.iso.net.constrained);
        project_slice(&mut p[ni..ni + nk], &self.kin.net.param_kinds(), self.kin.net.constrained);
        p[ni + nk] = p[ni + nk].max(0.0);
    }

    pub fn r_of(&self, r: f64) -> f64 {
        self.iso.r_of_r(r)
    }

    /// Snapshot: both networks plus `{E, nu, sigma_y, C}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "E": self.elastic.e,
            "nu": self.elastic.nu,
            "sigma_y": self.yield_params.sigma_y,
            "C": self.c,
            "c_scale": self.c_scale,
            "isotropic": self.iso.to_json(),
            "kinematic": self.kin.to_json(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let num = |k: &str| v.get(k).and_then(|x| x.as_f64()).ok_or_else(|| Error::Invalid(format!("model snapshot lacks `{k}`")));
        let part = |k: &str| v.get(k).ok_or_else(|| Error::Invalid(format!("model snapshot lacks `{k}`")));
        Ok(SurrogateModel {
            elastic: ElasticParams { e: num("E")?, nu: num("nu")? },
            yield_params: YieldParams { sigma_y: num("sigma_y")? },
            iso: IsotropicHardeningNet::from_json(part("isotropic")?)?,
            kin: KinematicHardeningNet::from_json(part("kinematic")?)?,
            c: num("C")?,
            c_scale: v.get("c_scale").and_then(|x| x.as_f64()).unwrap_or(1.0),
        })
    }
}

impl Constitutive for SurrogateModel {
    fn elastic(&self) -> ElasticParams {
        self.elastic
    }

    fn sigma_y(&self) -> f64 {
        self.yield_params.sigma_y
    }

    fn n_internal(&self) -> usize {
        7
    }

    fn internal_scales(&self) -> Vec<f64> {
        let sy = self.sigma_y();
        vec![sy, sy, sy, sy, sy, sy, 1.0]
    }

    fn params(&self) -> Vec<f64> {
        let mut p = self.iso.net.params().to_vec();
        p.extend(self.kin.net.params());
        p.push(self.c / self.c_scale);
        p
    }

    fn set_params(&mut self, p: &[f64]) {
        let ni = self.iso.net.n_params();
        let nk = self.kin.net.n_params();
        self.iso.net.set_params(&p[..ni]);
        self.kin.net.set_params(&p[ni..ni + nk]);
        self.c = p[ni + nk] * self.c_scale;
    }

    fn yield_value<T: Real>(&self, th: &[T], sigma: &SymTensor3<T>, int: &[T]) -> T {
        let (pr, _, _) = self.split(th);
        let x = SymTensor3::from_slice(&int[0..6]);
        let big_r = self.iso.eval_with(pr, int[6]);
        big_r * (*sigma - x).vm_equivalent() - c(self.sigma_y())
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
        let (pr, pk, pc) = self.split(th);
        let sy = c::<T>(self.sigma_y());
        let x = SymTensor3::from_slice(&int[0..6]);
        let x_n = SymTensor3::from_slice(&int_n[0..6]);
        let r = int[6];
        let big_r = self.iso.eval_with(pr, r);
        let rel = *sigma - x;
        let j = rel.vm_equivalent();
        let n = rel.deviator().scale(big_r * c(1.5) / j);
        let dphi = self.kin.deriv_with(pk, x.frobenius_sq());
        let cmod = *pc * c(self.c_scale);
        let kin_dir = n - x.scale(dphi * c(2.0));
        let gain = dlam * c::<T>(2.0 / 3.0) * cmod;
        for a in 0..6 {
            rows[a] = (x[a] - x_n[a] - gain * kin_dir[a]) / sy;
        }
        rows[6] = r - int_n[6] - dlam * j / sy;
        rows[7] = (big_r * j - sy) / sy;
        n
    }

    fn backstress(&self, int: &[f64]) -> SymTensor3<f64> {
        SymTensor3::from_slice(&int[0..6])
    }

    fn accumulated(&self, int: &[f64]) -> f64 {
        int[6]
    }

    fn iso_force(&self, int: &[f64]) -> f64 {
        self.iso.r_of_r(int[6])
    }

    /// `σ:Δεᵖ − σ_y R Δr − X:Δα` with `X = (2/3) C α`.
    fn dissipation(&self, int_n: &[f64], int: &[f64], sigma: &SymTensor3<f64>, d_eps_p: &SymTensor3<f64>) -> f64 {
        let x = SymTensor3::from_slice(&int[0..6]);
        let dx = x - SymTensor3::from_slice(&int_n[0..6]);
        let kin = if self.c > 0.0 { x.ddot(&dx) * 1.5 / self.c } else { 0.0 };
        sigma.ddot(d_eps_p) - self.sigma_y() * self.iso.r_of_r(int[6]) * (int[6] - int_n[6]) - kin
    }
}
