//! The expression language for coefficients, coordinate changes and maps.
//!
//! ```text
//! expr   := term (("+"|"-") term)* ;
//! term   := factor (("*"|"/") factor)* ;
//! factor := "-" factor | power ;
//! power  := atom ("^" factor)? ;
//! atom   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")" ;
//! ```
//!
//! Variables are resolved to indices at parse time against a declared list,
//! so evaluation takes a plain slice of scalars.

mod eval;
mod fuzz;
mod parse;
mod print;

pub use fuzz::random_expr;
pub use parse::parse;

use crate::error::Result;
use crate::scalar::{Scalar, ScalarFn};

/// Byte range of a node in its source text. Synthesized nodes carry `0..0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
    Atan,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Atan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Atan => "atan",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Lit(f64),
    Var { index: usize, name: String },
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Expression tree. Equality compares structure and ignores spans.
#[derive(Debug, Clone)]
pub struct Expr {
    pub node: Node,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

impl Expr {
    fn synth(node: Node) -> Self {
        Expr { node, span: Span::default() }
    }

    /// Numeric literal; negative values become `Neg(Lit)` so that printing
    /// and reparsing give back the same tree.
    pub fn num(v: f64) -> Self {
        assert!(v.is_finite(), "non-finite literal {v}");
        if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
            Expr::synth(Node::Neg(Box::new(Expr::synth(Node::Lit(-v)))))
        } else {
            Expr::synth(Node::Lit(v))
        }
    }

    pub fn var(index: usize, name: impl Into<String>) -> Self {
        Expr::synth(Node::Var { index, name: name.into() })
    }

    /// Bundle coordinate `u{index+1}`.
    pub fn u(index: usize) -> Self {
        Expr::var(index, format!("u{}", index + 1))
    }

    /// Map parameter `s{index+1}`.
    pub fn s(index: usize) -> Self {
        Expr::var(index, format!("s{}", index + 1))
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Self {
        Expr::synth(Node::Bin(op, Box::new(a), Box::new(b)))
    }

    pub fn call(f: Func, a: Expr) -> Self {
        Expr::synth(Node::Call(f, Box::new(a)))
    }

    pub fn neg(a: Expr) -> Self {
        Expr::synth(Node::Neg(Box::new(a)))
    }

    pub fn add(self, o: Expr) -> Self {
        Expr::bin(BinOp::Add, self, o)
    }

    pub fn sub(self, o: Expr) -> Self {
        Expr::bin(BinOp::Sub, self, o)
    }

    pub fn mul(self, o: Expr) -> Self {
        Expr::bin(BinOp::Mul, self, o)
    }

    pub fn div(self, o: Expr) -> Self {
        Expr::bin(BinOp::Div, self, o)
    }

    pub fn pow(self, o: Expr) -> Self {
        Expr::bin(BinOp::Pow, self, o)
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self.node, Node::Lit(v) if v == 0.0)
    }

    /// One past the largest variable index used, or 0 for constants.
    pub fn min_arity(&self) -> usize {
        match &self.node {
            Node::Lit(_) => 0,
            Node::Var { index, .. } => index + 1,
            Node::Neg(a) | Node::Call(_, a) => a.min_arity(),
            Node::Bin(_, a, b) => a.min_arity().max(b.min_arity()),
        }
    }

    pub fn depth(&self) -> usize {
        match &self.node {
            Node::Lit(_) | Node::Var { .. } => 1,
            Node::Neg(a) | Node::Call(_, a) => 1 + a.depth(),
            Node::Bin(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Whether any variable with index in `range` occurs.
    pub fn uses_any(&self, range: std::ops::Range<usize>) -> bool {
        match &self.node {
            Node::Lit(_) => false,
            Node::Var { index, .. } => range.contains(index),
            Node::Neg(a) | Node::Call(_, a) => a.uses_any(range),
            Node::Bin(_, a, b) => a.uses_any(range.clone()) || b.uses_any(range),
        }
    }

    /// Replace variable `i` by `args[i]` throughout.
    pub fn substitute(&self, args: &[Expr]) -> Expr {
        match &self.node {
            Node::Lit(_) => self.clone(),
            Node::Var { index, .. } => args[*index].clone(),
            Node::Neg(a) => Expr::neg(a.substitute(args)),
            Node::Call(f, a) => Expr::call(*f, a.substitute(args)),
            Node::Bin(op, a, b) => Expr::bin(*op, a.substitute(args), b.substitute(args)),
        }
    }

    pub fn bind(&self, arity: usize) -> BoundExpr<'_> {
        assert!(self.min_arity() <= arity, "expression needs at least {} variables", self.min_arity());
        BoundExpr { expr: self, arity }
    }
}

/// An expression viewed as a function of a fixed number of variables.
#[derive(Debug, Clone, Copy)]
pub struct BoundExpr<'a> {
    pub expr: &'a Expr,
    pub arity: usize,
}

impl ScalarFn for BoundExpr<'_> {
    fn arity(&self) -> usize {
        self.arity
    }
    fn call<T: Scalar>(&self, x: &[T]) -> Result<T> {
        self.expr.eval(x)
    }
}

/// Variable names `u1..u{count}`.
pub fn bundle_vars(count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("u{i}")).collect()
}

/// Variable names `s1..s{count}`.
pub fn param_vars(count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("s{i}")).collect()
}
