use rand::Rng;

use super::{BinOp, Expr, Func};

/// Random expression over `u1..u{nvars}` with depth at most `max_depth`.
///
/// Nothing here guarantees evaluability; callers reject trees that hit a
/// domain error or produce non-finite values at their sample points.
pub fn random_expr<R: Rng + ?Sized>(rng: &mut R, nvars: usize, max_depth: usize) -> Expr {
    assert!(max_depth >= 1);
    if max_depth == 1 || rng.gen_bool(0.25) {
        return leaf(rng, nvars);
    }
    let sub = max_depth - 1;
    match rng.gen_range(0..10) {
        0 => Expr::neg(random_expr(rng, nvars, sub)),
        1 | 2 => Expr::call(Func::ALL[rng.gen_range(0..Func::ALL.len())], random_expr(rng, nvars, sub)),
        3 => {
            // Mostly small integer powers; occasionally a general one.
            let exp = if rng.gen_bool(0.8) {
                Expr::num(rng.gen_range(1..=3) as f64)
            } else {
                random_expr(rng, nvars, sub.min(2))
            };
            random_expr(rng, nvars, sub).pow(exp)
        }
        k => {
            let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Add, BinOp::Mul][k - 4];
            Expr::bin(op, random_expr(rng, nvars, sub), random_expr(rng, nvars, sub))
        }
    }
}

fn leaf<R: Rng + ?Sized>(rng: &mut R, nvars: usize) -> Expr {
    if nvars > 0 && rng.gen_bool(0.7) {
        Expr::u(rng.gen_range(0..nvars))
    } else {
        let v: f64 = rng.gen_range(0.1..3.0);
        Expr::num((v * 100.0).round() / 100.0)
    }
}
