use std::fmt;

use super::{BinOp, Expr, Node};

// Binding levels: 1 sum, 2 product, 3 unary minus, 4 power, 5 atom.
fn level(e: &Expr) -> u8 {
    match &e.node {
        Node::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Node::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Node::Neg(_) => 3,
        Node::Bin(BinOp::Pow, ..) => 4,
        Node::Lit(v) if *v < 0.0 => 3,
        Node::Lit(_) | Node::Var { .. } | Node::Call(..) => 5,
    }
}

fn child(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if level(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            // Debug output is the shortest representation that reparses to
            // the same f64.
            Node::Lit(v) if *v < 0.0 => write!(f, "-{:?}", -v),
            Node::Lit(v) => write!(f, "{v:?}"),
            Node::Var { name, .. } => f.write_str(name),
            Node::Neg(a) => {
                f.write_str("-")?;
                child(f, a, 3)
            }
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
            Node::Bin(op, a, b) => {
                let (sym, lmin, rmin) = match op {
                    BinOp::Add => (" + ", 1, 2),
                    BinOp::Sub => (" - ", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                    BinOp::Pow => ("^", 5, 3),
                };
                child(f, a, lmin)?;
                f.write_str(sym)?;
                child(f, b, rmin)
            }
        }
    }
}
