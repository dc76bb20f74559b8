//! Forward and reverse automatic differentiation over [`Real`].

mod dual;
mod tape;

pub use dual::Dual;
pub use tape::{Adjoints, Tape, Var};

use crate::error::{Error, Result};
use crate::scalar::Real;
use nalgebra::DMatrix;

/// Width of the tangent block used for chunked Jacobians.
pub const CHUNK: usize = 8;

pub type Dual8 = Dual<f64, CHUNK>;
/// Scalar for exact second directional derivatives.
pub type Hyper = Dual<Dual<f64, 1>, 1>;

/// Scalar-valued function of a flat vector, generic over the scalar.
pub trait ScalarFn {
    fn eval<T: Real>(&self, x: &[T]) -> T;
}

/// Vector-valued function of a flat vector, generic over the scalar.
pub trait VectorFn {
    fn eval<T: Real>(&self, x: &[T]) -> Vec<T>;
}

/// Gradient by one reverse sweep.
pub fn grad<F: ScalarFn>(f: &F, x: &[f64]) -> Result<Vec<f64>> {
    value_and_grad(f, x).map(|(_, g)| g)
}

pub fn value_and_grad<F: ScalarFn>(f: &F, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let tape = Tape::new();
    let vars = tape.vars(x);
    let y = f.eval(&vars);
    if !y.val().is_finite() {
        return Err(Error::NonFinite);
    }
    let adj = tape.backward(&[(y, 1.0)]);
    Ok((y.val(), vars.iter().map(|v| adj.wrt(v)).collect()))
}

/// Value and dense Jacobian using forward duals, `CHUNK` columns per pass.
pub fn value_and_jacobian<F: VectorFn>(f: &F, x: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = x.len();
    let mut value = Vec::new();
    let mut jac = DMatrix::zeros(0, n);
    let mut start = 0;
    loop {
        let width = CHUNK.min(n - start);
        let xd: Vec<Dual8> = x
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                if j >= start && j < start + width {
                    Dual8::variable(v, j - start)
                } else {
                    Dual8::constant(v)
                }
            })
            .collect();
        let y = f.eval(&xd);
        if start == 0 {
            value = y.iter().map(|d| d.re).collect();
            if value.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
            jac = DMatrix::zeros(y.len(), n);
        }
        for (i, yi) in y.iter().enumerate() {
            for k in 0..width {
                jac[(i, start + k)] = yi.eps[k];
            }
        }
        start += width;
        if start >= n {
            break;
        }
    }
    if jac.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok((value, jac))
}

pub fn jacobian<F: VectorFn>(f: &F, x: &[f64]) -> Result<DMatrix<f64>> {
    value_and_jacobian(f, x).map(|(_, j)| j)
}

/// `uᵀ ∇²f(x) v` by nested forward duals.
pub fn second_derivative<F: ScalarFn>(f: &F, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
    let xh: Vec<Hyper> = x
        .iter()
        .zip(u)
        .zip(v)
        .map(|((&xi, &ui), &vi)| Hyper {
            re: Dual { re: xi, eps: [ui] },
            eps: [Dual { re: vi, eps: [0.0] }],
        })
        .collect();
    let y = f.eval(&xh);
    let d2 = y.eps[0].eps[0];
    if !y.re.re.is_finite() || !d2.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(d2)
}
