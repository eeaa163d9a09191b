//! Floating-point evaluation and substitution.

use super::{print_expr, rat_to_f64, simplify, Expr, FunKind, JetVar};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    Unbound(JetVar),
    #[error("singular point: {detail}")]
    Singular { detail: String },
}

fn singular<T>(sub: &Expr, why: &str) -> Result<T, EvalError> {
    Err(EvalError::Singular {
        detail: format!("{why} in '{}'", print_expr(sub)),
    })
}

/// Evaluate at a point binding every free variable to a number.
pub fn eval_at(e: &Expr, point: &BTreeMap<JetVar, f64>) -> Result<f64, EvalError> {
    let v = eval_node(e, point)?;
    if v.is_finite() {
        Ok(v)
    } else {
        singular(e, "non-finite value")
    }
}

fn eval_node(e: &Expr, point: &BTreeMap<JetVar, f64>) -> Result<f64, EvalError> {
    match e {
        Expr::Const(c) => Ok(rat_to_f64(c)),
        Expr::Var(v) => point.get(v).copied().ok_or(EvalError::Unbound(*v)),
        Expr::Neg(x) => Ok(-eval_node(x, point)?),
        Expr::Add(xs) => {
            let mut acc = 0.0;
            for x in xs {
                acc += eval_node(x, point)?;
            }
            Ok(acc)
        }
        Expr::Mul(xs) => {
            let mut acc = 1.0;
            for x in xs {
                acc *= eval_node(x, point)?;
            }
            Ok(acc)
        }
        Expr::Pow(b, x) => {
            let base = eval_node(b, point)?;
            let exp = eval_node(x, point)?;
            if base == 0.0 {
                if exp > 0.0 {
                    return Ok(0.0);
                }
                return singular(e, "zero raised to a non-positive power");
            }
            if base < 0.0 {
                // only integer exponents are defined for negative bases
                if (exp - exp.round()).abs() > 1e-9 {
                    return singular(e, "negative base with non-integer exponent");
                }
                let k = exp.round();
                let mag = (-base).powf(k);
                let sign = if (k as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                return Ok(sign * mag);
            }
            Ok(base.powf(exp))
        }
        Expr::Fun(kind, a) => {
            let x = eval_node(a, point)?;
            match kind {
                FunKind::Exp => Ok(x.exp()),
                FunKind::Ln => {
                    if x <= 0.0 {
                        singular(e, "logarithm of a non-positive value")
                    } else {
                        Ok(x.ln())
                    }
                }
                FunKind::Sin => Ok(x.sin()),
                FunKind::Cos => Ok(x.cos()),
                FunKind::Sqrt => {
                    if x < 0.0 {
                        singular(e, "square root of a negative value")
                    } else {
                        Ok(x.sqrt())
                    }
                }
                FunKind::Abs => Ok(x.abs()),
            }
        }
    }
}

/// Simultaneous substitution, then canonicalization.
pub fn substitute(e: &Expr, bindings: &BTreeMap<JetVar, Expr>) -> Expr {
    simplify(&subst_node(e, bindings))
}

fn subst_node(e: &Expr, bindings: &BTreeMap<JetVar, Expr>) -> Expr {
    match e {
        Expr::Const(_) => e.clone(),
        Expr::Var(v) => bindings.get(v).cloned().unwrap_or_else(|| e.clone()),
        Expr::Neg(x) => Expr::Neg(Box::new(subst_node(x, bindings))),
        Expr::Add(xs) => Expr::Add(xs.iter().map(|x| subst_node(x, bindings)).collect()),
        Expr::Mul(xs) => Expr::Mul(xs.iter().map(|x| subst_node(x, bindings)).collect()),
        Expr::Pow(b, x) => Expr::Pow(
            Box::new(subst_node(b, bindings)),
            Box::new(subst_node(x, bindings)),
        ),
        Expr::Fun(k, a) => Expr::Fun(*k, Box::new(subst_node(a, bindings))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn pt(pairs: &[(JetVar, f64)]) -> BTreeMap<JetVar, f64> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn inverse_cube() {
        let e = parse_expr("y^(-3)", 0).unwrap();
        let v = eval_at(&e, &pt(&[(JetVar::Deriv(0), 2.0)])).unwrap();
        assert_eq!(v, 0.125);
    }

    #[test]
    fn first_integral_sample_value() {
        // y'' + y' + t*y^(-2) at (t=0, y=1, y'=1, y''=1) -> 2
        let e = parse_expr("y2 + y1 + t*y^(-2)", 2).unwrap();
        let v = eval_at(
            &e,
            &pt(&[
                (JetVar::Time, 0.0),
                (JetVar::Deriv(0), 1.0),
                (JetVar::Deriv(1), 1.0),
                (JetVar::Deriv(2), 1.0),
            ]),
        )
        .unwrap();
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn ln_of_negative_is_singular() {
        let e = parse_expr("ln(y)", 0).unwrap();
        let r = eval_at(&e, &pt(&[(JetVar::Deriv(0), -1.0)]));
        assert!(matches!(r, Err(EvalError::Singular { .. })));
    }

    #[test]
    fn unbound_variable_reported() {
        let e = parse_expr("t + y", 0).unwrap();
        let r = eval_at(&e, &pt(&[(JetVar::Time, 1.0)]));
        assert_eq!(r, Err(EvalError::Unbound(JetVar::Deriv(0))));
    }

    #[test]
    fn zero_to_negative_power_singular() {
        let e = parse_expr("t*y^(-2)", 0).unwrap();
        let r = eval_at(&e, &pt(&[(JetVar::Time, 0.0), (JetVar::Deriv(0), 0.0)]));
        assert!(matches!(r, Err(EvalError::Singular { .. })));
    }

    #[test]
    fn substitute_base_point() {
        // -2*t*y^(-3) with t -> 1 becomes -2*y^(-3)
        let e = parse_expr("-2*t*y^(-3)", 0).unwrap();
        let mut b = BTreeMap::new();
        b.insert(JetVar::Time, Expr::one());
        let s = substitute(&e, &b);
        assert_eq!(s, parse_expr("-2*y^(-3)", 0).unwrap());
    }

    #[test]
    fn substitute_zero_annihilates() {
        let e = parse_expr("y*y1", 1).unwrap();
        let mut b = BTreeMap::new();
        b.insert(JetVar::Deriv(0), Expr::zero());
        assert_eq!(substitute(&e, &b), Expr::zero());
    }

    #[test]
    fn substitute_then_fold_matches_eval() {
        // substituting exact rationals and folding agrees with direct
        // floating evaluation to machine precision
        let psi = parse_expr("y2 + y1 + t*y^(-2)", 2).unwrap();
        let pairs = [
            (JetVar::Time, (1i64, 2i64)),
            (JetVar::Deriv(0), (3, 4)),
            (JetVar::Deriv(1), (-2, 3)),
            (JetVar::Deriv(2), (5, 8)),
        ];
        let bindings: BTreeMap<JetVar, Expr> = pairs
            .iter()
            .map(|(v, (p, q))| (*v, Expr::ratio(*p, *q)))
            .collect();
        let folded = substitute(&psi, &bindings);
        let c = folded.as_const().expect("fully bound").clone();
        let direct = eval_at(
            &psi,
            &pairs
                .iter()
                .map(|(v, (p, q))| (*v, *p as f64 / *q as f64))
                .collect(),
        )
        .unwrap();
        let via_subst = crate::expr::rat_to_f64(&c);
        assert!((via_subst - direct).abs() <= 1e-15 * (1.0 + direct.abs()));
    }

    #[test]
    fn expressions_are_send_and_sync() {
        fn check<T: Send + Sync>() {}
        check::<Expr>();
        check::<JetVar>();
    }

    #[test]
    fn negative_base_integer_exponent() {
        let e = parse_expr("y^3", 0).unwrap();
        let v = eval_at(&e, &pt(&[(JetVar::Deriv(0), -2.0)])).unwrap();
        assert_eq!(v, -8.0);
    }
}
