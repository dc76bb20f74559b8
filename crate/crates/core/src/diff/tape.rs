//! Reverse-mode tape.
//!
//! Every arithmetic operation on a [`Var`] appends a node holding the opcode,
//! its operands and the forward value. A backward sweep from any set of seeded
//! outputs yields vector-Jacobian products with respect to every recorded
//! input at once. The tape also supports replaying the recorded program with
//! new input values.

use crate::scalar::Real;
use num_traits::{Num, One, Zero};
use std::cell::RefCell;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
enum Op {
    Input,
    Const,
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Rem(u32, u32),
    Neg(u32),
    Exp(u32),
    Ln(u32),
    Sqrt(u32),
    Powf(u32, f64),
}

#[derive(Clone, Copy, Debug)]
struct Node {
    op: Op,
    val: f64,
}

/// Recording of a scalar program. Single owner; not shareable across threads.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
    inputs: RefCell<Vec<u32>>,
}

/// Scalar recorded on a [`Tape`]. Constants carry no tape.
#[derive(Clone, Copy, Debug)]
pub struct Var<'t> {
    tape: Option<&'t Tape>,
    idx: u32,
    val: f64,
}

/// Adjoints of every node after a backward sweep.
#[derive(Clone, Debug)]
pub struct Adjoints {
    adj: Vec<f64>,
}

impl Adjoints {
    /// Accumulated adjoint of `v`; zero for constants.
    pub fn wrt(&self, v: &Var<'_>) -> f64 {
        if v.idx == NONE {
            0.0
        } else {
            self.adj[v.idx as usize]
        }
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Tape {
            nodes: RefCell::new(Vec::with_capacity(n)),
            inputs: RefCell::new(Vec::new()),
        }
    }

    /// Register an independent input.
    pub fn var(&self, v: f64) -> Var<'_> {
        let idx = self.push(Op::Input, v);
        self.inputs.borrow_mut().push(idx);
        Var { tape: Some(self), idx, val: v }
    }

    pub fn vars(&self, v: &[f64]) -> Vec<Var<'_>> {
        v.iter().map(|&x| self.var(x)).collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push(&self, op: Op, val: f64) -> u32 {
        let mut nodes = self.nodes.borrow_mut();
        let idx = nodes.len() as u32;
        nodes.push(Node { op, val });
        idx
    }

    /// Backward sweep seeded with `(output, weight)` pairs.
    pub fn backward(&self, seeds: &[(Var<'_>, f64)]) -> Adjoints {
        let nodes = self.nodes.borrow();
        let mut adj = vec![0.0; nodes.len()];
        for (v, w) in seeds {
            if v.idx != NONE {
                debug_assert!(std::ptr::eq(v.tape.unwrap(), self));
                adj[v.idx as usize] += *w;
            }
        }
        for i in (0..nodes.len()).rev() {
            let g = adj[i];
            if g == 0.0 {
                continue;
            }
            let y = nodes[i].val;
            match nodes[i].op {
                Op::Input | Op::Const => {}
                Op::Add(a, b) => {
                    adj[a as usize] += g;
                    adj[b as usize] += g;
                }
                Op::Sub(a, b) => {
                    adj[a as usize] += g;
                    adj[b as usize] -= g;
                }
                Op::Mul(a, b) => {
                    let (va, vb) = (nodes[a as usize].val, nodes[b as usize].val);
                    adj[a as usize] += g * vb;
                    adj[b as usize] += g * va;
                }
                Op::Div(a, b) => {
                    let vb = nodes[b as usize].val;
                    adj[a as usize] += g / vb;
                    adj[b as usize] -= g * y / vb;
                }
                Op::Rem(a, b) => {
                    let q = (nodes[a as usize].val / nodes[b as usize].val).trunc();
                    adj[a as usize] += g;
                    adj[b as usize] -= g * q;
                }
                Op::Neg(a) => adj[a as usize] -= g,
                Op::Exp(a) => adj[a as usize] += g * y,
                Op::Ln(a) => adj[a as usize] += g / nodes[a as usize].val,
                Op::Sqrt(a) => adj[a as usize] += g * 0.5 / y,
                Op::Powf(a, p) => {
                    let va = nodes[a as usize].val;
                    adj[a as usize] += g * pow_slope(va, p);
                }
            }
        }
        Adjoints { adj }
    }

    /// Re-run the recorded program with new input values (in registration
    /// order) and return the value of every node.
    pub fn replay(&self, inputs: &[f64]) -> Vec<f64> {
        let nodes = self.nodes.borrow();
        let input_ids = self.inputs.borrow();
        assert_eq!(inputs.len(), input_ids.len(), "replay input count mismatch");
        let mut val: Vec<f64> = nodes.iter().map(|n| n.val).collect();
        for (k, &id) in input_ids.iter().enumerate() {
            val[id as usize] = inputs[k];
        }
        for i in 0..nodes.len() {
            let v = |j: u32| val[j as usize];
            let y = match nodes[i].op {
                Op::Input | Op::Const => continue,
                Op::Add(a, b) => v(a) + v(b),
                Op::Sub(a, b) => v(a) - v(b),
                Op::Mul(a, b) => v(a) * v(b),
                Op::Div(a, b) => v(a) / v(b),
                Op::Rem(a, b) => v(a) % v(b),
                Op::Neg(a) => -v(a),
                Op::Exp(a) => v(a).exp(),
                Op::Ln(a) => v(a).ln(),
                Op::Sqrt(a) => v(a).sqrt(),
                Op::Powf(a, p) => pow_value(v(a), p),
            };
            val[i] = y;
        }
        val
    }

    /// Value of `v` inside a replay result.
    pub fn replayed(&self, values: &[f64], v: &Var<'_>) -> f64 {
        if v.idx == NONE {
            v.val
        } else {
            values[v.idx as usize]
        }
    }
}

fn pow_value(x: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        x.powf(p)
    }
}

fn pow_slope(x: f64, p: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else if x == 0.0 {
        if p == 1.0 {
            1.0
        } else {
            0.0
        }
    } else {
        p * x.powf(p - 1.0)
    }
}

impl<'t> Var<'t> {
    pub fn constant(v: f64) -> Self {
        Var { tape: None, idx: NONE, val: v }
    }

    pub fn val(&self) -> f64 {
        self.val
    }

    fn tape_of(a: &Self, b: &Self) -> Option<&'t Tape> {
        a.tape.or(b.tape)
    }

    fn operand(&self, tape: &'t Tape) -> u32 {
        if self.idx == NONE {
            tape.push(Op::Const, self.val)
        } else {
            self.idx
        }
    }

    fn binary(self, rhs: Self, val: f64, mk: fn(u32, u32) -> Op) -> Self {
        match Self::tape_of(&self, &rhs) {
            None => Var::constant(val),
            Some(t) => {
                let a = self.operand(t);
                let b = rhs.operand(t);
                Var { tape: Some(t), idx: t.push(mk(a, b), val), val }
            }
        }
    }

    fn unary(self, val: f64, op: Op) -> Self {
        match self.tape {
            None => Var::constant(val),
            Some(t) => Var { tape: Some(t), idx: t.push(op, val), val },
        }
    }
}

impl PartialEq for Var<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.val == other.val
    }
}

impl PartialOrd for Var<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.val.partial_cmp(&other.val)
    }
}

impl Add for Var<'_> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.binary(rhs, self.val + rhs.val, Op::Add)
    }
}
impl Sub for Var<'_> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.binary(rhs, self.val - rhs.val, Op::Sub)
    }
}
impl Mul for Var<'_> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.binary(rhs, self.val * rhs.val, Op::Mul)
    }
}
impl Div for Var<'_> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self.binary(rhs, self.val / rhs.val, Op::Div)
    }
}
impl Rem for Var<'_> {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        self.binary(rhs, self.val % rhs.val, Op::Rem)
    }
}
impl Neg for Var<'_> {
    type Output = Self;
    fn neg(self) -> Self {
        let idx = self.idx;
        self.unary(-self.val, Op::Neg(idx))
    }
}

macro_rules! var_assign {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl $tr for Var<'_> {
            fn $m(&mut self, rhs: Self) {
                *self = *self $op rhs;
            }
        }
    )*};
}
var_assign!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /, RemAssign rem_assign %);

impl Zero for Var<'_> {
    fn zero() -> Self {
        Var::constant(0.0)
    }
    fn is_zero(&self) -> bool {
        self.val == 0.0
    }
}

impl One for Var<'_> {
    fn one() -> Self {
        Var::constant(1.0)
    }
}

impl Num for Var<'_> {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(s: &str, _radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        s.parse::<f64>().map(Var::constant)
    }
}

impl Real for Var<'_> {
    fn cst(v: f64) -> Self {
        Var::constant(v)
    }
    fn value(&self) -> f64 {
        self.val
    }
    fn exp(self) -> Self {
        let idx = self.idx;
        self.unary(self.val.exp(), Op::Exp(idx))
    }
    fn ln(self) -> Self {
        let idx = self.idx;
        self.unary(self.val.ln(), Op::Ln(idx))
    }
    fn sqrt(self) -> Self {
        let idx = self.idx;
        self.unary(self.val.sqrt(), Op::Sqrt(idx))
    }
    fn powf(self, p: f64) -> Self {
        let idx = self.idx;
        self.unary(pow_value(self.val, p), Op::Powf(idx, p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_of_polynomial() {
        let tape = Tape::new();
        let x = tape.var(3.0);
        let y = tape.var(2.0);
        let f = x * x * y + y.exp();
        let adj = tape.backward(&[(f, 1.0)]);
        assert_eq!(adj.wrt(&x), 12.0);
        assert!((adj.wrt(&y) - (9.0 + 2f64.exp())).abs() < 1e-12);
    }

    #[test]
    fn constants_mix_with_vars() {
        let tape = Tape::new();
        let x = tape.var(2.0);
        let f = Var::constant(5.0) * x - Var::constant(1.0);
        assert_eq!(f.val(), 9.0);
        assert_eq!(tape.backward(&[(f, 1.0)]).wrt(&x), 5.0);
    }

    #[test]
    fn replay_is_bit_exact() {
        let tape = Tape::new();
        let x = tape.var(0.3);
        let y = tape.var(1.7);
        let f = (x * y).exp() / (y.sqrt() + x.powf(2.5)) - x.ln();
        let vals = tape.replay(&[0.3, 1.7]);
        assert_eq!(tape.replayed(&vals, &f).to_bits(), f.val().to_bits());

        let g = |a: f64, b: f64| (a * b).exp() / (b.sqrt() + a.powf(2.5)) - a.ln();
        let vals = tape.replay(&[0.9, 0.4]);
        assert_eq!(tape.replayed(&vals, &f).to_bits(), g(0.9, 0.4).to_bits());
    }
}
