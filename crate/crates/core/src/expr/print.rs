//! Deterministic text form. Output re-parses to a tree structurally equal to
//! the canonical input (`parse(print(e)) == simplify(e)`).

use super::{Expr, FunKind, Rat};
use num_traits::{One, Signed};

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, Prec::Sum);
    out
}

/// Precedence context used to decide parenthesization.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Sum,
    Product,
    Base,
}

fn write_expr(out: &mut String, e: &Expr, ctx: Prec) {
    match e {
        Expr::Const(c) => write_const(out, c, ctx),
        Expr::Var(v) => out.push_str(&v.name()),
        Expr::Fun(kind, a) => write_fun(out, *kind, a),
        Expr::Pow(b, x) => write_pow(out, b, x),
        Expr::Mul(xs) => write_mul(out, xs, ctx),
        Expr::Add(xs) => write_add(out, xs, ctx),
        Expr::Neg(x) => {
            if ctx > Prec::Sum {
                out.push_str("-(");
                write_expr(out, x, Prec::Sum);
                out.push(')');
            } else {
                out.push('-');
                write_expr(out, x, Prec::Product);
            }
        }
    }
}

fn write_const(out: &mut String, c: &Rat, ctx: Prec) {
    let needs_paren = (c.is_negative() || !c.is_integer()) && ctx == Prec::Base;
    if needs_paren {
        out.push('(');
    }
    if c.is_integer() {
        out.push_str(&c.numer().to_string());
    } else {
        out.push_str(&format!("{}/{}", c.numer(), c.denom()));
    }
    if needs_paren {
        out.push(')');
    }
}

fn write_fun(out: &mut String, kind: FunKind, arg: &Expr) {
    match kind {
        FunKind::Abs => {
            out.push('|');
            write_expr(out, arg, Prec::Sum);
            out.push('|');
        }
        FunKind::Ln => {
            if let Expr::Fun(FunKind::Abs, inner) = arg {
                out.push_str("ln|");
                write_expr(out, inner, Prec::Sum);
                out.push('|');
            } else {
                out.push_str("ln(");
                write_expr(out, arg, Prec::Sum);
                out.push(')');
            }
        }
        other => {
            out.push_str(other.name());
            out.push('(');
            write_expr(out, arg, Prec::Sum);
            out.push(')');
        }
    }
}

fn write_pow(out: &mut String, base: &Expr, exp: &Expr) {
    // sqrt sugar for the 1/2 power
    if let Expr::Const(c) = exp {
        if *c == Rat::new(1.into(), 2.into()) {
            out.push_str("sqrt(");
            write_expr(out, base, Prec::Sum);
            out.push(')');
            return;
        }
    }
    write_expr(out, base, Prec::Base);
    out.push('^');
    // Bare exponent only for positive integer literals; everything else is
    // parenthesized so the right-associative `^` re-parses unambiguously.
    match exp {
        Expr::Const(c) if c.is_integer() && !c.is_negative() => {
            out.push_str(&c.numer().to_string());
        }
        other => {
            out.push('(');
            write_expr(out, other, Prec::Sum);
            out.push(')');
        }
    }
}

fn write_mul(out: &mut String, xs: &[Expr], ctx: Prec) {
    let mut factors: Vec<&Expr> = xs.iter().collect();
    let mut lead_minus = false;
    let mut lead_const: Option<Rat> = None;
    if let Some(Expr::Const(c)) = factors.first().copied() {
        let mag = c.abs();
        lead_minus = c.is_negative();
        factors.remove(0);
        if !mag.is_one() || factors.is_empty() {
            lead_const = Some(mag);
        }
    }
    let wrap = ctx == Prec::Base || (ctx == Prec::Product && lead_minus);
    if wrap {
        out.push('(');
    }
    if lead_minus {
        out.push('-');
    }
    let mut first = true;
    if let Some(c) = lead_const {
        write_const(out, &c, Prec::Product);
        first = false;
    }
    for f in factors {
        if !first {
            out.push('*');
        }
        first = false;
        write_expr(out, f, Prec::Product);
    }
    if first {
        // product was just a bare constant +-1
        out.push('1');
    }
    if wrap {
        out.push(')');
    }
}

fn write_add(out: &mut String, xs: &[Expr], ctx: Prec) {
    let wrap = ctx > Prec::Sum;
    if wrap {
        out.push('(');
    }
    for (i, term) in xs.iter().enumerate() {
        if i == 0 {
            write_expr(out, term, Prec::Sum);
            continue;
        }
        if let Some((mag, rest)) = negative_head(term) {
            out.push_str(" - ");
            match rest {
                None => write_const(out, &mag, Prec::Product),
                Some(rest) => {
                    let mut parts = Vec::new();
                    if !mag.is_one() {
                        parts.push(Expr::Const(mag));
                    }
                    parts.extend(rest);
                    if parts.len() == 1 {
                        write_expr(out, &parts[0], Prec::Product);
                    } else {
                        write_mul(out, &parts, Prec::Sum);
                    }
                }
            }
        } else {
            out.push_str(" + ");
            write_expr(out, term, Prec::Sum);
        }
    }
    if wrap {
        out.push(')');
    }
}

/// If the term has a negative leading constant, return its magnitude and the
/// remaining factors so the caller can print `a - b` instead of `a + -b`.
fn negative_head(term: &Expr) -> Option<(Rat, Option<Vec<Expr>>)> {
    match term {
        Expr::Const(c) if c.is_negative() => Some((c.abs(), None)),
        Expr::Mul(xs) => match xs.first() {
            Some(Expr::Const(c)) if c.is_negative() => {
                Some((c.abs(), Some(xs[1..].to_vec())))
            }
            _ => None,
        },
        Expr::Neg(inner) => Some((Rat::new(1.into(), 1.into()), Some(vec![(**inner).clone()]))),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::simplify;

    #[test]
    fn negative_power() {
        let e = Expr::jet(0).powi(-3);
        assert_eq!(print_expr(&simplify(&e)), "y^(-3)");
    }

    #[test]
    fn zero_prints_bare() {
        assert_eq!(print_expr(&Expr::zero()), "0");
    }

    #[test]
    fn product_with_negative_constant() {
        let e = simplify(&(Expr::int(-2) * Expr::time() * Expr::jet(1)));
        assert_eq!(print_expr(&e), "-2*t*y1");
    }

    #[test]
    fn subtraction_rendering() {
        let e = simplify(&(Expr::jet(2) - Expr::int(2) * Expr::time()));
        assert_eq!(print_expr(&e), "y2 - 2*t");
    }

    #[test]
    fn rational_coefficient() {
        let e = simplify(&(Expr::ratio(3, 2) * Expr::time()));
        assert_eq!(print_expr(&e), "3/2*t");
    }

    #[test]
    fn abs_and_ln_abs() {
        let e = Expr::fun(FunKind::Ln, Expr::fun(FunKind::Abs, Expr::jet(0)));
        assert_eq!(print_expr(&e), "ln|y|");
        let a = Expr::fun(FunKind::Abs, Expr::time());
        assert_eq!(print_expr(&a), "|t|");
    }
}
