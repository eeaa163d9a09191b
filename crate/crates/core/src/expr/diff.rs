//! Partial differentiation. Jet variables are independent coordinates: the
//! derivative of `y1` with respect to `y` is zero.

use super::{simplify, Expr, FunKind, JetVar, Rat};
use num_traits::One;

pub fn diff(e: &Expr, v: JetVar) -> Expr {
    let canonical = simplify(e);
    simplify(&diff_node(&canonical, v))
}

fn diff_node(e: &Expr, v: JetVar) -> Expr {
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Var(w) => {
            if *w == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Neg(x) => -diff_node(x, v),
        Expr::Add(xs) => Expr::Add(xs.iter().map(|x| diff_node(x, v)).collect()),
        Expr::Mul(xs) => {
            let mut terms = Vec::with_capacity(xs.len());
            for (i, _) in xs.iter().enumerate() {
                let mut prod: Vec<Expr> = Vec::with_capacity(xs.len());
                for (j, x) in xs.iter().enumerate() {
                    if i == j {
                        prod.push(diff_node(x, v));
                    } else {
                        prod.push(x.clone());
                    }
                }
                terms.push(Expr::Mul(prod));
            }
            Expr::Add(terms)
        }
        Expr::Pow(b, x) => {
            if let Expr::Const(c) = &**x {
                // d(u^c) = c * u^(c-1) * u'
                let du = diff_node(b, v);
                let new_exp = Expr::Const(c - Rat::one());
                return Expr::Const(c.clone()) * Expr::pow((**b).clone(), new_exp) * du;
            }
            // d(u^w) = u^w * (w' ln u + w u'/u)
            let u = (**b).clone();
            let w = (**x).clone();
            let du = diff_node(b, v);
            let dw = diff_node(x, v);
            Expr::pow(u.clone(), w.clone())
                * (dw * Expr::fun(FunKind::Ln, u.clone()) + w * du / u)
        }
        Expr::Fun(kind, a) => {
            let da = diff_node(a, v);
            let arg = (**a).clone();
            match kind {
                FunKind::Exp => Expr::fun(FunKind::Exp, arg) * da,
                FunKind::Ln => match &**a {
                    // d ln|u| = u'/u, same as d ln u
                    Expr::Fun(FunKind::Abs, inner) => {
                        let u = (**inner).clone();
                        diff_node(inner, v) / u
                    }
                    _ => da / arg,
                },
                FunKind::Sin => Expr::fun(FunKind::Cos, arg) * da,
                FunKind::Cos => -(Expr::fun(FunKind::Sin, arg) * da),
                FunKind::Sqrt => {
                    // sqrt is normalized away by simplify; handle raw trees anyway
                    Expr::ratio(1, 2) * Expr::pow(arg, Expr::ratio(-1, 2)) * da
                }
                FunKind::Abs => {
                    // d|u| = u/|u| * u', valid away from u = 0
                    let u = arg.clone();
                    u.clone() * Expr::pow(Expr::fun(FunKind::Abs, u), Expr::int(-1)) * da
                }
            }
        }
    }
}
