//! Dense univariate polynomials over the rationals, used by rational-function
//! integration: extraction from expression trees, division, and factoring by
//! rational-root extraction with a quadratic/biquadratic tail.

use crate::expr::{expand, Expr, JetVar, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Coefficients by ascending degree; no trailing zeros except for the zero
/// polynomial, which is an empty vector.
#[derive(Debug, Clone, PartialEq)]
pub struct QPoly(pub Vec<Rat>);

impl QPoly {
    pub fn zero() -> Self {
        QPoly(Vec::new())
    }

    pub fn constant(c: Rat) -> Self {
        if c.is_zero() {
            QPoly::zero()
        } else {
            QPoly(vec![c])
        }
    }

    pub fn monomial(c: Rat, deg: usize) -> Self {
        if c.is_zero() {
            return QPoly::zero();
        }
        let mut v = vec![Rat::zero(); deg + 1];
        v[deg] = c;
        QPoly(v)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn lead(&self) -> &Rat {
        self.0.last().expect("zero polynomial has no leading term")
    }

    fn trim(mut self) -> Self {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let n = self.0.len().max(other.0.len());
        let mut out = vec![Rat::zero(); n];
        for (i, c) in self.0.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.0.iter().enumerate() {
            out[i] += c;
        }
        QPoly(out).trim()
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![Rat::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly(out).trim()
    }

    pub fn scale(&self, c: &Rat) -> QPoly {
        QPoly(self.0.iter().map(|x| x * c).collect()).trim()
    }

    /// Euclidean division: returns `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &QPoly) -> (QPoly, QPoly) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let mut rem = self.clone();
        let mut quo = QPoly::zero();
        while !rem.is_zero() && rem.degree() >= divisor.degree() {
            let shift = rem.degree() - divisor.degree();
            let factor = rem.lead() / divisor.lead();
            let term = QPoly::monomial(factor, shift);
            quo = quo.add(&term);
            rem = rem.add(&divisor.mul(&term).scale(&-Rat::one()));
        }
        (quo, rem)
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Render as an expression in `var`.
    pub fn to_expr(&self, var: JetVar) -> Expr {
        if self.is_zero() {
            return Expr::zero();
        }
        let terms: Vec<Expr> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| {
                Expr::Const(c.clone()) * Expr::pow(Expr::Var(var), Expr::int(k as i64))
            })
            .collect();
        crate::expr::simplify(&Expr::Add(terms))
    }
}

/// Interpret `e` as a polynomial in `var` with rational coefficients.
/// Any other variable, function of `var`, or non-integer power makes it fail.
pub fn extract_qpoly(e: &Expr, var: JetVar) -> Option<QPoly> {
    let expanded = expand(e);
    let mut acc = QPoly::zero();
    for term in expanded.terms() {
        let mut coeff = Rat::one();
        let mut deg = 0usize;
        for factor in term.factors() {
            match factor {
                Expr::Const(c) => coeff *= c,
                Expr::Var(v) if *v == var => deg += 1,
                Expr::Pow(b, x) => {
                    if let (Expr::Var(v), Some(k)) = (&**b, x.as_int()) {
                        if *v == var {
                            let k = k.to_i64()?;
                            if k < 0 {
                                return None;
                            }
                            deg += k as usize;
                            continue;
                        }
                    }
                    return None;
                }
                _ => return None,
            }
        }
        acc = acc.add(&QPoly::monomial(coeff, deg));
    }
    Some(acc)
}

/// A factored denominator piece.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    /// `(x - root)^multiplicity`
    Linear { root: Rat, multiplicity: usize },
    /// irreducible `x^2 + p x + q`, `multiplicity` times
    Quadratic { p: Rat, q: Rat, multiplicity: usize },
}

/// Factor a monic-normalized polynomial over the rationals into linear and
/// irreducible quadratic parts. Returns the constant that normalizes the
/// input to the product of the returned factors, or `None` when the residual
/// part resists the rational-root / biquadratic toolkit.
pub fn factor_rational(poly: &QPoly) -> Option<(Rat, Vec<Factor>)> {
    assert!(!poly.is_zero());
    let constant = poly.lead().clone();
    let monic = poly.scale(&constant.recip());
    let mut rest = monic;
    let mut factors: Vec<Factor> = Vec::new();

    // strip roots at zero
    let mut zero_mult = 0usize;
    while !rest.is_zero() && rest.0[0].is_zero() {
        rest = QPoly(rest.0[1..].to_vec());
        zero_mult += 1;
    }
    if zero_mult > 0 {
        factors.push(Factor::Linear {
            root: Rat::zero(),
            multiplicity: zero_mult,
        });
    }

    // rational roots p/q with p | constant term, q | leading term
    'outer: while rest.degree() >= 1 {
        let candidates = rational_root_candidates(&rest)?;
        for cand in candidates {
            if rest.eval(&cand).is_zero() {
                let mut mult = 0usize;
                let lin = QPoly(vec![-cand.clone(), Rat::one()]);
                loop {
                    let (q, r) = rest.div_rem(&lin);
                    if r.is_zero() {
                        rest = q;
                        mult += 1;
                    } else {
                        break;
                    }
                }
                factors.push(Factor::Linear {
                    root: cand,
                    multiplicity: mult,
                });
                continue 'outer;
            }
        }
        break;
    }

    match rest.degree() {
        0 => {}
        2 => {
            let p = &rest.0[1] / &rest.0[2];
            let q = &rest.0[0] / &rest.0[2];
            factors.push(Factor::Quadratic {
                p,
                q,
                multiplicity: 1,
            });
        }
        4 => {
            // biquadratic x^4 + p x^2 + q: substitute z = x^2
            if !rest.0[1].is_zero() || !rest.0[3].is_zero() {
                return None;
            }
            let p = &rest.0[2] / &rest.0[4];
            let q = &rest.0[0] / &rest.0[4];
            let zpoly = QPoly(vec![q, p, Rat::one()]);
            let (_, zfactors) = factor_rational(&zpoly)?;
            for zf in zfactors {
                match zf {
                    Factor::Linear { root, multiplicity } => {
                        // x^2 - root; irreducible since rational roots of the
                        // original quartic were already stripped
                        for _ in 0..multiplicity {
                            push_quadratic(&mut factors, Rat::zero(), -root.clone());
                        }
                    }
                    Factor::Quadratic { .. } => return None,
                }
            }
        }
        _ => return None,
    }
    Some((constant, factors))
}

fn push_quadratic(factors: &mut Vec<Factor>, p: Rat, q: Rat) {
    for f in factors.iter_mut() {
        if let Factor::Quadratic {
            p: p0,
            q: q0,
            multiplicity,
        } = f
        {
            if *p0 == p && *q0 == q {
                *multiplicity += 1;
                return;
            }
        }
    }
    factors.push(Factor::Quadratic {
        p,
        q,
        multiplicity: 1,
    });
}

const MAX_DIVISOR_CANDIDATES: usize = 4096;

fn rational_root_candidates(poly: &QPoly) -> Option<Vec<Rat>> {
    // clear denominators to an integer polynomial
    let mut lcm = BigInt::one();
    for c in &poly.0 {
        lcm = num_integer_lcm(&lcm, c.denom());
    }
    let ints: Vec<BigInt> = poly.0.iter().map(|c| c.numer() * (&lcm / c.denom())).collect();
    let a0 = ints.first()?.clone();
    let an = ints.last()?.clone();
    if a0.is_zero() {
        // roots at zero are stripped before this is called
        return Some(vec![Rat::zero()]);
    }
    let ps = small_divisors(&a0)?;
    let qs = small_divisors(&an)?;
    let mut out = Vec::new();
    for p in &ps {
        for q in &qs {
            let r = Rat::new(p.clone(), q.clone());
            if !out.contains(&r) {
                out.push(r.clone());
                out.push(-r);
            }
        }
    }
    Some(out)
}

fn small_divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs();
    let limit = n.to_u64()?;
    let mut out = Vec::new();
    let mut d = 1u64;
    while d.saturating_mul(d) <= limit {
        if limit % d == 0 {
            out.push(BigInt::from(d));
            out.push(BigInt::from(limit / d));
            if out.len() > MAX_DIVISOR_CANDIDATES {
                return None;
            }
        }
        d += 1;
    }
    Some(out)
}

fn num_integer_lcm(a: &BigInt, b: &BigInt) -> BigInt {
    if a.is_zero() || b.is_zero() {
        return BigInt::zero();
    }
    (a * b).abs() / num_integer_gcd(a, b)
}

fn num_integer_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let mut a = a.abs();
    let mut b = b.abs();
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn r(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

    #[test]
    fn extract_simple() {
        let e = parse_expr("3*t^2 - t + 1/2", 0).unwrap();
        let p = extract_qpoly(&e, JetVar::Time).unwrap();
        assert_eq!(p, QPoly(vec![Rat::new(1.into(), 2.into()), r(-1), r(3)]));
    }

    #[test]
    fn extract_rejects_other_vars() {
        let e = parse_expr("t*y", 0).unwrap();
        assert!(extract_qpoly(&e, JetVar::Time).is_none());
    }

    #[test]
    fn division_round_trip() {
        let a = QPoly(vec![r(-1), r(0), r(1)]); // x^2 - 1
        let b = QPoly(vec![r(1), r(1)]); // x + 1
        let (q, rem) = a.div_rem(&b);
        assert_eq!(q, QPoly(vec![r(-1), r(1)]));
        assert!(rem.is_zero());
    }

    #[test]
    fn factor_difference_of_squares() {
        let p = QPoly(vec![r(-1), r(0), r(1)]);
        let (c, fs) = factor_rational(&p).unwrap();
        assert_eq!(c, r(1));
        assert_eq!(fs.len(), 2);
        assert!(fs.iter().all(|f| matches!(f, Factor::Linear { multiplicity: 1, .. })));
    }

    #[test]
    fn factor_repeated_root() {
        // (x - 2)^2 = x^2 - 4x + 4
        let p = QPoly(vec![r(4), r(-4), r(1)]);
        let (_, fs) = factor_rational(&p).unwrap();
        assert_eq!(
            fs,
            vec![Factor::Linear {
                root: r(2),
                multiplicity: 2
            }]
        );
    }

    #[test]
    fn irreducible_quadratic_kept() {
        // x^2 + 1
        let p = QPoly(vec![r(1), r(0), r(1)]);
        let (_, fs) = factor_rational(&p).unwrap();
        assert_eq!(
            fs,
            vec![Factor::Quadratic {
                p: r(0),
                q: r(1),
                multiplicity: 1
            }]
        );
    }

    #[test]
    fn biquadratic_splits() {
        // x^4 - 5x^2 + 4 = (x-1)(x+1)(x-2)(x+2); all roots rational
        let p = QPoly(vec![r(4), r(0), r(-5), r(0), r(1)]);
        let (_, fs) = factor_rational(&p).unwrap();
        let total: usize = fs
            .iter()
            .map(|f| match f {
                Factor::Linear { multiplicity, .. } => *multiplicity,
                Factor::Quadratic { multiplicity, .. } => 2 * multiplicity,
            })
            .sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn irreducible_cubic_unsupported() {
        // x^3 - 2 has no rational roots
        let p = QPoly(vec![r(-2), r(0), r(0), r(1)]);
        assert!(factor_rational(&p).is_none());
    }
}
