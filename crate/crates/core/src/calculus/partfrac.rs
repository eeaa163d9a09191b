//! Partial fraction decomposition over the rationals and integration of the
//! resulting pieces.

use super::poly::{factor_rational, Factor, QPoly};
use crate::expr::{simplify, Expr, FunKind, JetVar, Rat};
use crate::linalg::{self, LinSolve};
use num_traits::{One, Zero};

/// Integrate `num/den` with respect to `var`. Both polynomials must have
/// rational coefficients. Returns the antiderivative or a reason string.
pub fn integrate_rational(num: &QPoly, den: &QPoly, var: JetVar) -> Result<Expr, String> {
    if den.is_zero() {
        return Err("zero denominator".into());
    }
    if num.is_zero() {
        return Ok(Expr::zero());
    }
    let (quo, rem) = num.div_rem(den);
    let mut parts: Vec<Expr> = Vec::new();
    if !quo.is_zero() {
        parts.push(integrate_poly(&quo, var));
    }
    if rem.is_zero() {
        return Ok(simplify(&Expr::Add(parts)));
    }

    let Some((lead, factors)) = factor_rational(den) else {
        return Err(format!(
            "denominator '{}' does not factor into rational linear/quadratic parts",
            den.to_expr(var)
        ));
    };
    // rem / den = (rem/lead) / monic(den); solve against the monic factorization
    let target = rem.scale(&lead.recip());

    // Unknowns: for each linear factor (x-r)^m, coefficients A_1..A_m;
    // for each quadratic factor q(x)^m, pairs (B_j, C_j) for j = 1..m.
    // Basis polynomial of unknown u is monic_den / factor^j (times x for B).
    let monic_den = factors.iter().fold(QPoly::constant(Rat::one()), |acc, f| {
        acc.mul(&factor_power(f, full_mult(f)))
    });
    let mut basis: Vec<QPoly> = Vec::new();
    let mut pieces: Vec<Piece> = Vec::new();
    for f in &factors {
        match f {
            Factor::Linear { root, multiplicity } => {
                for j in 1..=*multiplicity {
                    let reduced = exact_div(&monic_den, &factor_power(f, j));
                    basis.push(reduced);
                    pieces.push(Piece::LinearTerm {
                        root: root.clone(),
                        power: j,
                    });
                }
            }
            Factor::Quadratic { p, q, multiplicity } => {
                for j in 1..=*multiplicity {
                    let reduced = exact_div(&monic_den, &factor_power(f, j));
                    basis.push(reduced.mul(&QPoly(vec![Rat::zero(), Rat::one()])));
                    pieces.push(Piece::QuadraticNum {
                        p: p.clone(),
                        q: q.clone(),
                        power: j,
                    });
                    basis.push(reduced);
                    pieces.push(Piece::QuadraticConst {
                        p: p.clone(),
                        q: q.clone(),
                        power: j,
                    });
                }
            }
        }
    }

    let deg = monic_den.degree();
    let rows: Vec<Vec<Rat>> = (0..deg)
        .map(|i| {
            basis
                .iter()
                .map(|b| b.0.get(i).cloned().unwrap_or_else(Rat::zero))
                .collect()
        })
        .collect();
    let rhs: Vec<Rat> = (0..deg)
        .map(|i| target.0.get(i).cloned().unwrap_or_else(Rat::zero))
        .collect();
    let coeffs = match linalg::solve(&rows, &rhs, basis.len()) {
        LinSolve::Unique(c) => c,
        LinSolve::Family { particular, .. } => particular,
        LinSolve::Inconsistent => {
            return Err("partial fraction system is inconsistent".into());
        }
    };

    for (u, piece) in coeffs.into_iter().zip(pieces) {
        if u.is_zero() {
            continue;
        }
        parts.push(piece.integrate(u, var)?);
    }
    Ok(simplify(&Expr::Add(parts)))
}

fn full_mult(f: &Factor) -> usize {
    match f {
        Factor::Linear { multiplicity, .. } => *multiplicity,
        Factor::Quadratic { multiplicity, .. } => *multiplicity,
    }
}

fn factor_power(f: &Factor, power: usize) -> QPoly {
    let base = match f {
        Factor::Linear { root, .. } => QPoly(vec![-root.clone(), Rat::one()]),
        Factor::Quadratic { p, q, .. } => QPoly(vec![q.clone(), p.clone(), Rat::one()]),
    };
    let mut acc = QPoly::constant(Rat::one());
    for _ in 0..power {
        acc = acc.mul(&base);
    }
    acc
}

fn exact_div(num: &QPoly, den: &QPoly) -> QPoly {
    let (q, r) = num.div_rem(den);
    debug_assert!(r.is_zero(), "factorization produced a non-divisor");
    q
}

enum Piece {
    /// u / (x - root)^power
    LinearTerm { root: Rat, power: usize },
    /// u * x / (x^2 + p x + q)^power
    QuadraticNum { p: Rat, q: Rat, power: usize },
    /// u / (x^2 + p x + q)^power
    QuadraticConst { p: Rat, q: Rat, power: usize },
}

impl Piece {
    fn integrate(self, u: Rat, var: JetVar) -> Result<Expr, String> {
        let x = Expr::Var(var);
        match self {
            Piece::LinearTerm { root, power } => {
                let shifted = simplify(&(x - Expr::Const(root)));
                if power == 1 {
                    Ok(simplify(
                        &(Expr::Const(u) * Expr::fun(FunKind::Ln, Expr::fun(FunKind::Abs, shifted))),
                    ))
                } else {
                    let k = 1 - power as i64;
                    Ok(simplify(
                        &(Expr::Const(u / Rat::from_integer(k.into()))
                            * Expr::pow(shifted, Expr::int(k))),
                    ))
                }
            }
            Piece::QuadraticNum { p, q, power } => {
                // u x = (u/2)(2x + p) - (u p / 2); the first part integrates in
                // closed form, the rest is a QuadraticConst piece.
                let half_u = &u / Rat::from_integer(2.into());
                let quad = simplify(
                    &(x.clone().powi(2) + Expr::Const(p.clone()) * x + Expr::Const(q.clone())),
                );
                let log_part = if power == 1 {
                    Expr::Const(half_u.clone())
                        * Expr::fun(FunKind::Ln, Expr::fun(FunKind::Abs, quad))
                } else {
                    let k = 1 - power as i64;
                    Expr::Const(&half_u / Rat::from_integer(k.into()))
                        * Expr::pow(quad, Expr::int(k))
                };
                let leftover = -(&half_u * &p);
                if leftover.is_zero() {
                    Ok(simplify(&log_part))
                } else {
                    let rest = Piece::QuadraticConst { p, q, power }.integrate(leftover, var)?;
                    Ok(simplify(&(log_part + rest)))
                }
            }
            Piece::QuadraticConst { p, q, power } => Err(format!(
                "constant numerator over irreducible quadratic ({}^2 + {}*{} + {})^{} needs \
                 inverse-tangent forms outside the supported function set",
                var,
                p,
                var,
                q,
                power
            )),
        }
    }
}

/// Antiderivative of a rational-coefficient polynomial.
pub fn integrate_poly(p: &QPoly, var: JetVar) -> Expr {
    let terms: Vec<Expr> = p
        .0
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| {
            let new_pow = k as i64 + 1;
            Expr::Const(c / Rat::from_integer(new_pow.into()))
                * Expr::pow(Expr::Var(var), Expr::int(new_pow))
        })
        .collect();
    simplify(&Expr::Add(terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{diff, is_zero, parse_expr, ProbeConfig};
    use crate::calculus::poly::extract_qpoly;

    fn check_by_differentiation(num: &str, den: &str, var: JetVar) {
        let n = extract_qpoly(&parse_expr(num, 0).unwrap(), var).unwrap();
        let d = extract_qpoly(&parse_expr(den, 0).unwrap(), var).unwrap();
        let anti = integrate_rational(&n, &d, var).unwrap();
        let back = diff(&anti, var);
        let integrand = simplify(
            &(parse_expr(num, 0).unwrap() / parse_expr(den, 0).unwrap()),
        );
        let residual = simplify(&(back - integrand));
        assert!(
            is_zero(&residual, &ProbeConfig::default()).unwrap().is_zero(),
            "d/dv of '{anti}' does not match {num}/{den}"
        );
    }

    #[test]
    fn difference_of_squares() {
        check_by_differentiation("1", "t^2 - 1", JetVar::Time);
    }

    #[test]
    fn repeated_linear_factor() {
        check_by_differentiation("t + 3", "t^2 - 4*t + 4", JetVar::Time);
    }

    #[test]
    fn improper_fraction_with_division() {
        check_by_differentiation("t^3 + 1", "t^2 - 1", JetVar::Time);
    }

    #[test]
    fn quadratic_log_part() {
        // t/(t^2+1) integrates to ln(t^2+1)/2
        check_by_differentiation("t", "t^2 + 1", JetVar::Time);
    }

    #[test]
    fn arctan_shape_rejected() {
        let n = extract_qpoly(&parse_expr("1", 0).unwrap(), JetVar::Time).unwrap();
        let d = extract_qpoly(&parse_expr("t^2 + 1", 0).unwrap(), JetVar::Time).unwrap();
        let e = integrate_rational(&n, &d, JetVar::Time);
        assert!(e.is_err());
        assert!(e.unwrap_err().contains("inverse-tangent"));
    }
}
