use std::cell::RefCell;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{AutodiffError, Real};

/// Operation recorded in a [`TapeNode`]. Constant operands are folded into
/// the opcode so that constants never occupy tape slots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpCode {
    /// A differentiable parameter, identified by its registration order.
    Param(usize),
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    /// `a * factor`
    Scale { factor: f64 },
    /// `a + offset`
    Offset { offset: f64 },
    /// `minuend - a`
    SubFrom { minuend: f64 },
    /// `a / divisor`
    DivBy { divisor: f64 },
    /// `numerator / a`
    Recip { numerator: f64 },
    Tanh,
    Sin,
    Cos,
    Exp,
    Cosh,
    Sinh,
}

/// One recorded operation: its parents, the local partial derivative with
/// respect to each parent, and the forward value.
#[derive(Debug, Clone, PartialEq)]
pub struct TapeNode {
    pub op: OpCode,
    pub parents: [usize; 2],
    pub partials: [f64; 2],
    pub arity: u8,
    pub value: f64,
}

impl TapeNode {
    pub fn parents(&self) -> &[usize] {
        &self.parents[..self.arity as usize]
    }
}

/// Append-only reverse-mode tape.
///
/// Single writer: variables borrow the tape immutably and push through a
/// `RefCell`, so a tape must not be shared across threads. Use one tape per
/// worker and reduce gradients in a fixed order.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: RefCell<Vec<TapeNode>>,
    n_params: RefCell<usize>,
}

/// Gradient of a scalar with respect to every parameter leaf, indexed by
/// parameter id. Unreachable parameters hold `0.0`.
pub type Gradient = Vec<f64>;

/// A scalar that is either a recorded tape node or an untracked constant.
#[derive(Clone, Copy)]
pub struct Var<'t> {
    value: f64,
    node: Option<(&'t Tape, usize)>,
}

impl std::fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.node {
            Some((_, i)) => write!(f, "Var(#{i} = {})", self.value),
            None => write!(f, "Var(const {})", self.value),
        }
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            nodes: RefCell::new(Vec::with_capacity(n)),
            n_params: RefCell::new(0),
        }
    }

    /// Drop all nodes and parameters, keeping the allocation.
    pub fn clear(&mut self) {
        self.nodes.get_mut().clear();
        *self.n_params.get_mut() = 0;
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_params(&self) -> usize {
        *self.n_params.borrow()
    }

    pub fn nodes(&self) -> std::cell::Ref<'_, Vec<TapeNode>> {
        self.nodes.borrow()
    }

    /// Register a differentiable parameter leaf.
    pub fn param(&self, value: f64) -> Var<'_> {
        let id = {
            let mut n = self.n_params.borrow_mut();
            let id = *n;
            *n += 1;
            id
        };
        self.push(OpCode::Param(id), &[], &[], value)
    }

    pub fn constant(value: f64) -> Var<'static> {
        Var { value, node: None }
    }

    fn push(&self, op: OpCode, parents: &[usize], partials: &[f64], value: f64) -> Var<'_> {
        let mut node = TapeNode {
            op,
            parents: [0; 2],
            partials: [0.0; 2],
            arity: 0,
            value,
        };
        for (&p, &d) in parents.iter().zip(partials) {
            // a parent appears at most once; merge duplicates such as x * x
            if let Some(k) = node.parents().iter().position(|&q| q == p) {
                node.partials[k] += d;
            } else {
                let k = node.arity as usize;
                node.parents[k] = p;
                node.partials[k] = d;
                node.arity += 1;
            }
        }
        let mut nodes = self.nodes.borrow_mut();
        let index = nodes.len();
        nodes.push(node);
        Var {
            value,
            node: Some((self, index)),
        }
    }

    /// Reverse sweep from `loss`, returning `∂loss/∂θ` per parameter id.
    pub fn grad(&self, loss: Var<'_>) -> Result<Gradient, AutodiffError> {
        let mut out = vec![0.0; self.num_params()];
        let root = match loss.node {
            None => return Ok(out),
            Some((tape, i)) => {
                if !std::ptr::eq(tape, self) {
                    return Err(AutodiffError::ForeignVariable);
                }
                i
            }
        };
        let nodes = self.nodes.borrow();
        let mut adjoint = vec![0.0; root + 1];
        adjoint[root] = 1.0;
        for i in (0..=root).rev() {
            let node = &nodes[i];
            let a = adjoint[i];
            if let OpCode::Param(id) = node.op {
                out[id] += a;
                continue;
            }
            if a == 0.0 {
                continue;
            }
            for (k, &p) in node.parents().iter().enumerate() {
                if p >= i {
                    return Err(AutodiffError::Cycle { node: i, parent: p });
                }
                adjoint[p] += a * node.partials[k];
            }
        }
        Ok(out)
    }

    /// Recompute every node value from the parameter leaves in tape order.
    pub fn replay(&self) -> Result<Vec<f64>, AutodiffError> {
        let nodes = self.nodes.borrow();
        let mut values: Vec<f64> = Vec::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            for &p in node.parents() {
                if p >= i {
                    return Err(AutodiffError::Cycle { node: i, parent: p });
                }
            }
            let a = node.parents().first().map(|&p| values[p]).unwrap_or(0.0);
            let b = node.parents().get(1).map(|&p| values[p]).unwrap_or(a);
            let v = match node.op {
                OpCode::Param(_) => node.value,
                OpCode::Add => {
                    if node.arity == 1 {
                        a + a
                    } else {
                        a + b
                    }
                }
                OpCode::Sub => {
                    if node.arity == 1 {
                        0.0
                    } else {
                        a - b
                    }
                }
                OpCode::Mul => a * b,
                OpCode::Div => a / b,
                OpCode::Neg => -a,
                OpCode::Scale { factor } => a * factor,
                OpCode::Offset { offset } => a + offset,
                OpCode::SubFrom { minuend } => minuend - a,
                OpCode::DivBy { divisor } => a / divisor,
                OpCode::Recip { numerator } => numerator / a,
                OpCode::Tanh => a.tanh(),
                OpCode::Sin => a.sin(),
                OpCode::Cos => a.cos(),
                OpCode::Exp => a.exp(),
                OpCode::Cosh => a.cosh(),
                OpCode::Sinh => a.sinh(),
            };
            values.push(v);
        }
        Ok(values)
    }
}

impl<'t> Var<'t> {
    pub fn index(&self) -> Option<usize> {
        self.node.map(|(_, i)| i)
    }

    pub fn is_constant(&self) -> bool {
        self.node.is_none()
    }

    fn unary(self, op: OpCode, value: f64, partial: f64) -> Self {
        match self.node {
            None => Var { value, node: None },
            Some((tape, i)) => tape.push(op, &[i], &[partial], value),
        }
    }

    fn binary(self, o: Self, op: OpCode, value: f64, da: f64, db: f64) -> Self {
        match (self.node, o.node) {
            (None, None) => Var { value, node: None },
            (Some((tape, i)), None) => tape.push(op_with_const(op, o.value, true), &[i], &[da], value),
            (None, Some((tape, j))) => tape.push(op_with_const(op, self.value, false), &[j], &[db], value),
            (Some((tape, i)), Some((_, j))) => tape.push(op, &[i, j], &[da, db], value),
        }
    }
}

/// Fold a constant operand into a unary opcode so replay can reproduce it.
/// `const_is_rhs` tells whether the constant was the right operand.
fn op_with_const(op: OpCode, c: f64, const_is_rhs: bool) -> OpCode {
    match (op, const_is_rhs) {
        (OpCode::Add, _) => OpCode::Offset { offset: c },
        (OpCode::Sub, true) => OpCode::Offset { offset: -c },
        (OpCode::Sub, false) => OpCode::SubFrom { minuend: c },
        (OpCode::Mul, _) => OpCode::Scale { factor: c },
        (OpCode::Div, true) => OpCode::DivBy { divisor: c },
        (OpCode::Div, false) => OpCode::Recip { numerator: c },
        (other, _) => other,
    }
}

impl<'t> Add for Var<'t> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.binary(o, OpCode::Add, self.value + o.value, 1.0, 1.0)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self.binary(o, OpCode::Sub, self.value - o.value, 1.0, -1.0)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        self.binary(o, OpCode::Mul, self.value * o.value, o.value, self.value)
    }
}

impl<'t> Div for Var<'t> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.value / o.value;
        self.binary(o, OpCode::Div, q, 1.0 / o.value, -q / o.value)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Self;
    fn neg(self) -> Self {
        self.unary(OpCode::Neg, -self.value, -1.0)
    }
}

impl<'t> Real for Var<'t> {
    fn from_f64(v: f64) -> Self {
        Var { value: v, node: None }
    }

    fn value(&self) -> f64 {
        self.value
    }

    fn tanh(self) -> Self {
        let t = self.value.tanh();
        self.unary(OpCode::Tanh, t, 1.0 - t * t)
    }

    fn sin(self) -> Self {
        self.unary(OpCode::Sin, self.value.sin(), self.value.cos())
    }

    fn cos(self) -> Self {
        self.unary(OpCode::Cos, self.value.cos(), -self.value.sin())
    }

    fn exp(self) -> Self {
        let e = self.value.exp();
        self.unary(OpCode::Exp, e, e)
    }

    fn cosh(self) -> Self {
        self.unary(OpCode::Cosh, self.value.cosh(), self.value.sinh())
    }

    fn sinh(self) -> Self {
        self.unary(OpCode::Sinh, self.value.sinh(), self.value.cosh())
    }

    fn scale(self, c: f64) -> Self {
        self.unary(OpCode::Scale { factor: c }, self.value * c, c)
    }

    fn add_const(self, c: f64) -> Self {
        self.unary(OpCode::Offset { offset: c }, self.value + c, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Dual2;

    #[test]
    fn square_gradient() {
        let tape = Tape::new();
        let th = tape.param(2.0);
        let loss = th * th;
        assert_eq!(tape.grad(loss).unwrap(), vec![4.0]);
        // x * x is one node with a single merged parent
        assert_eq!(tape.nodes()[1].parents(), &[0]);
    }

    #[test]
    fn unreachable_parameter_is_zero() {
        let tape = Tape::new();
        let a = tape.param(1.5);
        let _b = tape.param(-3.0);
        let loss = a.sin();
        let g = tape.grad(loss).unwrap();
        assert_eq!(g[1], 0.0);
        assert!((g[0] - 1.5f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn tanh_matches_central_difference() {
        let x = 1.0;
        let f = |th: f64| (th * x).tanh();
        let tape = Tape::new();
        let th = tape.param(0.5);
        let loss = (th * Var::from_f64(x)).tanh();
        let g = tape.grad(loss).unwrap()[0];
        let h = 1e-6;
        let fd = (f(0.5 + h) - f(0.5 - h)) / (2.0 * h);
        assert!((g - fd).abs() <= 1e-6 * fd.abs(), "{g} vs {fd}");
    }

    #[test]
    fn constants_stay_off_tape() {
        let tape = Tape::new();
        let a = tape.param(3.0);
        let c = Var::from_f64(2.0) * Var::from_f64(5.0);
        assert!(c.is_constant());
        let y = a * c - Var::from_f64(1.0);
        assert_eq!(tape.len(), 3);
        assert_eq!(y.value(), 29.0);
        assert_eq!(tape.grad(y).unwrap(), vec![10.0]);
    }

    #[test]
    fn constant_loss_gives_zero_gradient() {
        let tape = Tape::new();
        let _ = tape.param(1.0);
        assert_eq!(tape.grad(Var::from_f64(7.0)).unwrap(), vec![0.0]);
    }

    #[test]
    fn foreign_variable_is_rejected() {
        let a = Tape::new();
        let b = Tape::new();
        let x = b.param(1.0);
        let _ = a.param(1.0);
        assert_eq!(a.grad(x), Err(AutodiffError::ForeignVariable));
    }

    #[test]
    fn replay_reproduces_values_bitwise() {
        let tape = Tape::new();
        let p: Vec<Var> = (0..4).map(|i| tape.param(0.3 * i as f64 - 0.4)).collect();
        let mut acc = Var::from_f64(0.1);
        for (i, &v) in p.iter().enumerate() {
            let t = (v * acc + Var::from_f64(i as f64)).tanh();
            acc = acc + t.cos() * v.exp() / (v.cosh() + Var::from_f64(1.0)) - t.sinh();
            acc = Var::from_f64(2.0) / (acc.square().add_const(1.0)) - (-acc).scale(0.5);
            acc = acc - Var::from_f64(0.25) + (Var::from_f64(3.0) - v) / Var::from_f64(4.0);
        }
        let recorded: Vec<f64> = tape.nodes().iter().map(|n| n.value).collect();
        let first = tape.replay().unwrap();
        let second = tape.replay().unwrap();
        assert_eq!(first, second);
        for (a, b) in recorded.iter().zip(&first) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn second_order_dual_on_tape() {
        // f(x; θ) = tanh(θ x); d²f/dx² = θ² · (-2 t (1 - t²)),  t = tanh(θx)
        // differentiate that w.r.t. θ and compare to a central difference.
        let x = 0.7;
        let fxx = |th: f64| {
            let t = (th * x).tanh();
            th * th * (-2.0 * t * (1.0 - t * t))
        };
        let tape = Tape::new();
        let th = tape.param(0.9);
        let xd = Dual2::new(Var::from_f64(x), Var::from_f64(1.0), Var::from_f64(0.0));
        let out = (Dual2::constant(th) * xd).tanh();
        assert!((out.d2.value() - fxx(0.9)).abs() < 1e-14);
        let g = tape.grad(out.d2).unwrap()[0];
        let h = 1e-6;
        let fd = (fxx(0.9 + h) - fxx(0.9 - h)) / (2.0 * h);
        assert!((g - fd).abs() < 1e-7 * fd.abs().max(1.0), "{g} vs {fd}");
    }
}
