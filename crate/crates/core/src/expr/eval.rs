use super::{BinOp, Expr, Func, Node};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

impl Expr {
    /// Evaluate with `env[i]` bound to the variable of index `i`.
    pub fn eval<T: Scalar>(&self, env: &[T]) -> Result<T> {
        match &self.node {
            Node::Lit(v) => Ok(T::from_f64(*v)),
            Node::Var { index, name } => env
                .get(*index)
                .copied()
                .ok_or_else(|| Error::Shape(format!("variable {name} is unbound"))),
            Node::Neg(a) => Ok(-a.eval(env)?),
            Node::Call(f, a) => {
                let x = a.eval(env)?;
                let v = x.value();
                match f {
                    Func::Sin => Ok(x.sin()),
                    Func::Cos => Ok(x.cos()),
                    Func::Tan => Ok(x.tan()),
                    Func::Exp => Ok(x.exp()),
                    Func::Log if v <= 0.0 => Err(self.domain("log of non-positive value", env)),
                    Func::Log => Ok(x.ln()),
                    Func::Sqrt if v < 0.0 => Err(self.domain("sqrt of negative value", env)),
                    Func::Sqrt => Ok(x.sqrt()),
                    Func::Sinh => Ok(x.sinh()),
                    Func::Cosh => Ok(x.cosh()),
                    Func::Tanh => Ok(x.tanh()),
                    Func::Atan => Ok(x.atan()),
                }
            }
            Node::Bin(op, a, b) => {
                if *op == BinOp::Pow {
                    if let Some(n) = b.integer_literal() {
                        return Ok(a.eval(env)?.powi(n));
                    }
                    let base = a.eval(env)?;
                    if base.value() <= 0.0 {
                        return Err(self.domain("non-integer power of non-positive base", env));
                    }
                    return Ok(base.powf(b.eval(env)?));
                }
                let x = a.eval(env)?;
                let y = b.eval(env)?;
                match op {
                    BinOp::Add => Ok(x + y),
                    BinOp::Sub => Ok(x - y),
                    BinOp::Mul => Ok(x * y),
                    BinOp::Div if y.value() == 0.0 => Err(self.domain("division by zero", env)),
                    BinOp::Div => Ok(x / y),
                    BinOp::Pow => unreachable!(),
                }
            }
        }
    }

    /// Literal integer exponent (possibly negated) small enough for `powi`.
    fn integer_literal(&self) -> Option<i32> {
        let v = match &self.node {
            Node::Lit(v) => *v,
            Node::Neg(a) => match a.node {
                Node::Lit(v) => -v,
                _ => return None,
            },
            _ => return None,
        };
        (v.fract() == 0.0 && v.abs() <= 64.0).then_some(v as i32)
    }

    fn domain<T: Scalar>(&self, kind: &str, env: &[T]) -> Error {
        Error::Domain {
            kind: kind.to_string(),
            expr: self.to_string(),
            start: self.span.start,
            end: self.span.end,
            point: env.iter().map(Scalar::value).collect(),
        }
    }
}
