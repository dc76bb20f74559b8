//! Elastic laws and yield functions.

use crate::error::{Error, Result};
use crate::scalar::{c, Real};
use crate::tensor::{pi_coords, principal_values, SymTensor3};
use nalgebra::Matrix6;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElasticParams {
    pub e: f64,
    pub nu: f64,
}

impl ElasticParams {
    pub fn new(e: f64, nu: f64) -> Result<Self> {
        let p = ElasticParams { e, nu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e > 0.0) || !(self.nu > -1.0 && self.nu < 0.5) {
            return Err(Error::Invalid(format!("inadmissible elastic constants E={} nu={}", self.e, self.nu)));
        }
        Ok(())
    }

    pub fn lame(&self) -> f64 {
        self.e * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))
    }

    pub fn shear(&self) -> f64 {
        self.e / (2.0 * (1.0 + self.nu))
    }

    pub fn bulk(&self) -> f64 {
        self.e / (3.0 * (1.0 - 2.0 * self.nu))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct YieldParams {
    pub sigma_y: f64,
}

/// Elastic part of the free energy and its derivatives.
pub trait ElasticLaw {
    fn stress<T: Real>(&self, eps_e: &SymTensor3<T>) -> SymTensor3<T>;
    fn energy<T: Real>(&self, eps_e: &SymTensor3<T>) -> T;
    /// Modulus acting on engineering-shear strain vectors.
    fn modulus(&self) -> Matrix6<f64>;
}

/// Pressure-insensitive yield function with kinematic shift and homothetic
/// isotropic scaling.
pub trait YieldFunction {
    fn sigma_y(&self) -> f64;
    fn value<T: Real>(&self, sigma: &SymTensor3<T>, x: &SymTensor3<T>, r_scale: T) -> T;
    fn gradients<T: Real>(&self, sigma: &SymTensor3<T>, x: &SymTensor3<T>, r_scale: T) -> Result<YieldGradients<T>>;
}

#[derive(Clone, Copy, Debug)]
pub struct YieldGradients<T: Real> {
    pub df_dsigma: SymTensor3<T>,
    pub df_dx: SymTensor3<T>,
    pub df_dr: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearElastic {
    pub params: ElasticParams,
}

impl LinearElastic {
    pub fn new(params: ElasticParams) -> Self {
        LinearElastic { params }
    }
}

impl ElasticLaw for LinearElastic {
    fn stress<T: Real>(&self, eps_e: &SymTensor3<T>) -> SymTensor3<T> {
        let lam = c::<T>(self.params.lame());
        let two_mu = c::<T>(2.0 * self.params.shear());
        eps_e.scale(two_mu) + SymTensor3::identity().scale(lam * eps_e.trace())
    }

    fn energy<T: Real>(&self, eps_e: &SymTensor3<T>) -> T {
        c::<T>(0.5) * self.stress(eps_e).ddot(eps_e)
    }

    fn modulus(&self) -> Matrix6<f64> {
        let lam = self.params.lame();
        let mu = self.params.shear();
        let mut d = Matrix6::zeros();
        for i in 0..3 {
            for j in 0..3 {
                d[(i, j)] = lam;
            }
            d[(i, i)] += 2.0 * mu;
            d[(i + 3, i + 3)] = mu;
        }
        d
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VonMises {
    pub params: YieldParams,
}

impl VonMises {
    pub fn new(sigma_y: f64) -> Self {
        VonMises { params: YieldParams { sigma_y } }
    }

    /// Same value computed from the π-coordinates of the relative stress.
    pub fn value_pi(&self, sigma: &SymTensor3<f64>, x: &SymTensor3<f64>, r_scale: f64) -> Result<f64> {
        let p = pi_coords(principal_values(&(*sigma - *x))?);
        let (q1, q2) = (r_scale * p.p1, r_scale * p.p2);
        Ok(1.5f64.sqrt() * (q1 * q1 + q2 * q2).sqrt() - self.params.sigma_y)
    }
}

impl YieldFunction for VonMises {
    fn sigma_y(&self) -> f64 {
        self.params.sigma_y
    }

    fn value<T: Real>(&self, sigma: &SymTensor3<T>, x: &SymTensor3<T>, r_scale: T) -> T {
        r_scale * (*sigma - *x).vm_equivalent() - c(self.params.sigma_y)
    }

    fn gradients<T: Real>(&self, sigma: &SymTensor3<T>, x: &SymTensor3<T>, r_scale: T) -> Result<YieldGradients<T>> {
        let rel = *sigma - *x;
        let j = rel.vm_equivalent();
        if j.value() < 1e-12 * self.params.sigma_y {
            return Err(Error::DegenerateState(j.value()));
        }
        let n = rel.deviator().scale(r_scale * c(1.5) / j);
        Ok(YieldGradients { df_dsigma: n, df_dx: -n, df_dr: j })
    }
}

pub fn elastic_stress<T: Real>(eps_e: &SymTensor3<T>, p: &ElasticParams) -> SymTensor3<T> {
    LinearElastic::new(*p).stress(eps_e)
}

pub fn yield_value<T: Real>(sigma: &SymTensor3<T>, x: &SymTensor3<T>, r_scale: T, p: &YieldParams) -> T {
    VonMises { params: *p }.value(sigma, x, r_scale)
}

pub fn yield_gradients<T: Real>(
    sigma: &SymTensor3<T>,
    x: &SymTensor3<T>,
    r_scale: T,
    p: &YieldParams,
) -> Result<YieldGradients<T>> {
    VonMises { params: *p }.gradients(sigma, x, r_scale)
}
