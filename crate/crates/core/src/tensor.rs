//! Symmetric second-order tensors in three dimensions.
//!
//! Components are stored as tensor (not engineering) values in the order
//! 11, 22, 33, 12, 13, 23. Double contraction counts the off-diagonal
//! entries twice.

use crate::error::{Error, Result};
use crate::scalar::{c, Real};
use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

/// Multiplicity of each stored component in a double contraction.
pub const WEIGHT: [f64; 6] = [1.0, 1.0, 1.0, 2.0, 2.0, 2.0];

/// Row/column index pairs of the stored components.
pub const INDEX: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

/// Orthogonal map from principal values to π-plane coordinates.
pub fn pi_matrix() -> [[f64; 3]; 3] {
    let a = (2.0f64 / 3.0).sqrt();
    let b = (1.0f64 / 6.0).sqrt();
    let h = 0.5f64.sqrt();
    let t = (1.0f64 / 3.0).sqrt();
    [[a, -b, -b], [0.0, h, -h], [t, t, t]]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymTensor3<T: Real> {
    pub c: [T; 6],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Invariants<T> {
    pub i1: T,
    pub i2: T,
    pub i3: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PiCoords<T> {
    pub p1: T,
    pub p2: T,
    pub p3: T,
}

impl<T: Real> Default for SymTensor3<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Real> SymTensor3<T> {
    pub fn new(c: [T; 6]) -> Self {
        SymTensor3 { c }
    }

    pub fn zero() -> Self {
        SymTensor3 { c: [T::zero(); 6] }
    }

    pub fn identity() -> Self {
        Self::diag(T::one(), T::one(), T::one())
    }

    pub fn diag(a: T, b: T, d: T) -> Self {
        let z = T::zero();
        SymTensor3 { c: [a, b, d, z, z, z] }
    }

    pub fn from_slice(s: &[T]) -> Self {
        let mut c = [T::zero(); 6];
        c.copy_from_slice(&s[..6]);
        SymTensor3 { c }
    }

    /// Entry `(i, j)` of the full matrix.
    pub fn get(&self, i: usize, j: usize) -> T {
        match (i.min(j), i.max(j)) {
            (0, 0) => self.c[0],
            (1, 1) => self.c[1],
            (2, 2) => self.c[2],
            (0, 1) => self.c[3],
            (0, 2) => self.c[4],
            (1, 2) => self.c[5],
            _ => panic!("index out of range"),
        }
    }

    pub fn trace(&self) -> T {
        self.c[0] + self.c[1] + self.c[2]
    }

    pub fn scale(&self, s: T) -> Self {
        let mut c = self.c;
        for v in c.iter_mut() {
            *v *= s;
        }
        SymTensor3 { c }
    }

    /// `A : B` with off-diagonals counted twice.
    pub fn ddot(&self, other: &Self) -> T {
        let mut s = T::zero();
        for k in 0..6 {
            let p = self.c[k] * other.c[k];
            s += if k < 3 { p } else { p + p };
        }
        s
    }

    pub fn frobenius_sq(&self) -> T {
        self.ddot(self)
    }

    pub fn deviator(&self) -> Self {
        let m = self.trace() / c(3.0);
        let mut d = *self;
        for k in 0..3 {
            d.c[k] -= m;
        }
        d
    }

    /// `√(3/2 · dev A : dev A)`.
    pub fn vm_equivalent(&self) -> T {
        (c::<T>(1.5) * self.deviator().frobenius_sq()).sqrt()
    }

    pub fn det(&self) -> T {
        let [a, b, d, e, f, g] = self.c;
        a * (b * d - g * g) - e * (e * d - g * f) + f * (e * g - b * f)
    }

    pub fn invariants(&self) -> Invariants<T> {
        let tr = self.trace();
        let half = c::<T>(0.5);
        Invariants {
            i1: tr,
            i2: half * (tr * tr - self.frobenius_sq()),
            i3: self.det(),
        }
    }

    /// Same tensor with engineering shear components (`2·A12` etc.).
    pub fn to_engineering(&self) -> [T; 6] {
        let mut v = self.c;
        for x in v.iter_mut().skip(3) {
            *x = *x + *x;
        }
        v
    }

    pub fn from_engineering(v: &[T]) -> Self {
        let half = c::<T>(0.5);
        SymTensor3 {
            c: [v[0], v[1], v[2], half * v[3], half * v[4], half * v[5]],
        }
    }

    pub fn map<U: Real>(&self, f: impl Fn(T) -> U) -> SymTensor3<U> {
        SymTensor3 { c: self.c.map(f) }
    }

    pub fn values(&self) -> SymTensor3<f64> {
        self.map(|v| v.value())
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.value().is_finite())
    }
}

impl SymTensor3<f64> {
    pub fn lift<T: Real>(&self) -> SymTensor3<T> {
        self.map(T::cst)
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.get(i, j))
    }

    /// Symmetric part of a full matrix.
    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        let s = |i: usize, j: usize| 0.5 * (m[(i, j)] + m[(j, i)]);
        SymTensor3 {
            c: [m[(0, 0)], m[(1, 1)], m[(2, 2)], s(0, 1), s(0, 2), s(1, 2)],
        }
    }

    /// `Q A Qᵀ`.
    pub fn rotated(&self, q: &Matrix3<f64>) -> Self {
        Self::from_matrix(&(q * self.to_matrix() * q.transpose()))
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Eigenvalues sorted descending, by cyclic Jacobi rotations.
pub fn principal_values(a: &SymTensor3<f64>) -> Result<[f64; 3]> {
    const MAX_SWEEPS: usize = 50;
    let mut m = [[0.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a.get(i, j);
        }
    }
    let scale = a.max_abs();
    if scale == 0.0 {
        return Ok([0.0; 3]);
    }
    if !scale.is_finite() {
        return Err(Error::NumericalFailure("non-finite tensor entry".into()));
    }
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off = m[0][1].powi(2) + m[0][2].powi(2) + m[1][2].powi(2);
        if off.sqrt() <= 1e-15 * scale {
            converged = true;
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if m[p][q] == 0.0 {
                continue;
            }
            let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let cs = 1.0 / (t * t + 1.0).sqrt();
            let sn = t * cs;
            for k in 0..3 {
                let (mkp, mkq) = (m[k][p], m[k][q]);
                m[k][p] = cs * mkp - sn * mkq;
                m[k][q] = sn * mkp + cs * mkq;
            }
            for k in 0..3 {
                let (mpk, mqk) = (m[p][k], m[q][k]);
                m[p][k] = cs * mpk - sn * mqk;
                m[q][k] = sn * mpk + cs * mqk;
            }
        }
    }
    if !converged {
        let off = m[0][1].powi(2) + m[0][2].powi(2) + m[1][2].powi(2);
        if off.sqrt() > 1e-12 * scale {
            return Err(Error::NumericalFailure("Jacobi eigen-solve hit the sweep cap".into()));
        }
    }
    let mut ev = [m[0][0], m[1][1], m[2][2]];
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(ev)
}

pub fn pi_coords<T: Real>(s: [T; 3]) -> PiCoords<T> {
    let m = pi_matrix();
    let row = |r: [f64; 3]| c::<T>(r[0]) * s[0] + c::<T>(r[1]) * s[1] + c::<T>(r[2]) * s[2];
    PiCoords {
        p1: row(m[0]),
        p2: row(m[1]),
        p3: row(m[2]),
    }
}

/// Von Mises equivalent evaluated through the π-plane; cross-check for
/// [`SymTensor3::vm_equivalent`].
pub fn vm_equivalent_pi(a: &SymTensor3<f64>) -> Result<f64> {
    let p = pi_coords(principal_values(a)?);
    Ok(1.5f64.sqrt() * (p.p1 * p.p1 + p.p2 * p.p2).sqrt())
}

impl<T: Real> Add for SymTensor3<T> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for k in 0..6 {
            self.c[k] += rhs.c[k];
        }
        self
    }
}

impl<T: Real> Sub for SymTensor3<T> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for k in 0..6 {
            self.c[k] -= rhs.c[k];
        }
        self
    }
}

impl<T: Real> AddAssign for SymTensor3<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Real> SubAssign for SymTensor3<T> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<T: Real> Neg for SymTensor3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Real> Mul<T> for SymTensor3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

impl<T: Real> Index<usize> for SymTensor3<T> {
    type Output = T;
    fn index(&self, k: usize) -> &T {
        &self.c[k]
    }
}

impl<T: Real> IndexMut<usize> for SymTensor3<T> {
    fn index_mut(&mut self, k: usize) -> &mut T {
        &mut self.c[k]
    }
}
