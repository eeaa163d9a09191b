//! Canonicalization and bounded expansion.
//!
//! Canonical form: Add/Mul children flattened and sorted by the fixed total
//! order, constants folded, no zero summands or unit factors, like terms and
//! like bases merged, `Neg` rewritten away, `sqrt` rewritten to `^(1/2)`.
//! `simplify` never distributes products over sums; `expand` does, with the
//! power-expansion bound below.

use super::{Expr, FunKind, Rat};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// Pow(Add, k) is multiplied out only for integer exponents 1..=MAX_EXPAND_POW.
const MAX_EXPAND_POW: i64 = 8;

/// Constant folding bound for integer powers of rationals.
const MAX_CONST_POW: i64 = 64;

pub fn simplify(e: &Expr) -> Expr {
    match e {
        Expr::Const(c) => Expr::Const(c.clone()),
        Expr::Var(v) => Expr::Var(*v),
        Expr::Neg(x) => simplify(&Expr::Mul(vec![Expr::int(-1), (**x).clone()])),
        Expr::Add(xs) => {
            let kids: Vec<Expr> = xs.iter().map(simplify).collect();
            rebuild_add(kids)
        }
        Expr::Mul(xs) => {
            let kids: Vec<Expr> = xs.iter().map(simplify).collect();
            rebuild_mul(kids)
        }
        Expr::Pow(b, x) => rebuild_pow(simplify(b), simplify(x)),
        Expr::Fun(kind, a) => rebuild_fun(*kind, simplify(a)),
    }
}

/// Sum of already-simplified children.
fn rebuild_add(kids: Vec<Expr>) -> Expr {
    let mut flat = Vec::new();
    for k in kids {
        match k {
            Expr::Add(xs) => flat.extend(xs),
            other => flat.push(other),
        }
    }
    // Collect coefficients per term core: Mul[c, rest...] -> (c, rest).
    let mut const_sum = Rat::zero();
    let mut by_core: BTreeMap<Expr, Rat> = BTreeMap::new();
    for term in flat {
        let (coeff, core) = split_coeff(term);
        match core {
            None => const_sum += coeff,
            Some(core) => {
                let slot = by_core.entry(core).or_insert_with(Rat::zero);
                *slot += coeff;
            }
        }
    }
    let mut out: Vec<Expr> = Vec::new();
    for (core, coeff) in by_core {
        if coeff.is_zero() {
            continue;
        }
        out.push(attach_coeff(coeff, core));
    }
    if !const_sum.is_zero() {
        out.push(Expr::Const(const_sum));
    }
    out.sort();
    match out.len() {
        0 => Expr::zero(),
        1 => out.pop().unwrap(),
        _ => Expr::Add(out),
    }
}

/// Split a simplified term into (rational coefficient, non-constant core).
fn split_coeff(term: Expr) -> (Rat, Option<Expr>) {
    match term {
        Expr::Const(c) => (c, None),
        Expr::Mul(xs) => {
            let mut coeff = Rat::one();
            let mut rest = Vec::new();
            for x in xs {
                match x {
                    Expr::Const(c) => coeff *= c,
                    other => rest.push(other),
                }
            }
            match rest.len() {
                0 => (coeff, None),
                1 => (coeff, Some(rest.pop().unwrap())),
                _ => (coeff, Some(Expr::Mul(rest))),
            }
        }
        other => (Rat::one(), Some(other)),
    }
}

fn attach_coeff(coeff: Rat, core: Expr) -> Expr {
    if coeff.is_one() {
        return core;
    }
    let mut xs = vec![Expr::Const(coeff)];
    match core {
        Expr::Mul(ys) => xs.extend(ys),
        other => xs.push(other),
    }
    xs.sort();
    Expr::Mul(xs)
}

/// Product of already-simplified children.
fn rebuild_mul(kids: Vec<Expr>) -> Expr {
    let mut flat = Vec::new();
    for k in kids {
        match k {
            Expr::Mul(xs) => flat.extend(xs),
            other => flat.push(other),
        }
    }
    let mut const_acc = Rat::one();
    // exp factors merge additively in the exponent's argument
    let mut exp_arg: Vec<Expr> = Vec::new();
    // base -> accumulated exponent terms
    let mut by_base: BTreeMap<Expr, Vec<Expr>> = BTreeMap::new();
    for f in flat {
        match f {
            Expr::Const(c) => {
                if c.is_zero() {
                    return Expr::zero();
                }
                const_acc *= c;
            }
            Expr::Fun(FunKind::Exp, a) => exp_arg.push(*a),
            Expr::Pow(b, e) => match (*b, *e) {
                (Expr::Fun(FunKind::Exp, a), e) => {
                    exp_arg.push(Expr::Mul(vec![e, *a]));
                }
                (b, e) => by_base.entry(b).or_default().push(e),
            },
            other => by_base.entry(other).or_default().push(Expr::one()),
        }
    }
    let mut out: Vec<Expr> = Vec::new();
    for (base, exps) in by_base {
        let total = rebuild_add(exps.into_iter().map(|e| simplify(&e)).collect());
        if total.is_zero_literal() {
            continue;
        }
        let factor = rebuild_pow(base, total);
        match factor {
            Expr::Const(c) => {
                if c.is_zero() {
                    return Expr::zero();
                }
                const_acc *= c;
            }
            Expr::Mul(xs) => out.extend(xs),
            other => out.push(other),
        }
    }
    if !exp_arg.is_empty() {
        let arg = rebuild_add(exp_arg.into_iter().map(|e| simplify(&e)).collect());
        let f = rebuild_fun(FunKind::Exp, arg);
        match f {
            Expr::Const(c) => const_acc *= c,
            other => out.push(other),
        }
    }
    if const_acc.is_zero() {
        return Expr::zero();
    }
    // A bare constant times a single sum distributes, so `x - (a + b)`
    // cancels term-by-term against `a + b`.
    if out.len() == 1 && !const_acc.is_one() {
        if let Expr::Add(terms) = &out[0] {
            let scaled: Vec<Expr> = terms
                .iter()
                .map(|t| rebuild_mul(vec![Expr::Const(const_acc.clone()), t.clone()]))
                .collect();
            return rebuild_add(scaled);
        }
    }
    if !const_acc.is_one() {
        out.push(Expr::Const(const_acc));
    }
    out.sort();
    match out.len() {
        0 => Expr::one(),
        1 => out.pop().unwrap(),
        _ => Expr::Mul(out),
    }
}

/// Power of already-simplified parts.
fn rebuild_pow(base: Expr, exp: Expr) -> Expr {
    if exp.is_zero_literal() {
        return Expr::one();
    }
    if exp.is_one_literal() {
        return base;
    }
    if base.is_one_literal() {
        return Expr::one();
    }
    if let (Some(b), Some(k)) = (base.as_const(), exp.as_int()) {
        // 0^negative stays symbolic so evaluation can flag the singularity.
        if !(b.is_zero() && !k.is_positive()) {
            if let Some(k) = k.to_i64() {
                if k.abs() <= MAX_CONST_POW {
                    return Expr::Const(rat_pow(b, k));
                }
            }
        }
    }
    if let Expr::Const(c) = &base {
        if c.is_zero() {
            if let Expr::Const(e) = &exp {
                if e.is_positive() {
                    return Expr::zero();
                }
            }
        }
    }
    if let Some(k) = exp.as_int() {
        // Integer exponents push through products and merge nested powers.
        if let Expr::Mul(xs) = &base {
            let kids: Vec<Expr> = xs
                .iter()
                .map(|x| rebuild_pow(x.clone(), Expr::Const(Rat::from_integer(k.clone()))))
                .collect();
            return rebuild_mul(kids);
        }
        if let Expr::Pow(b2, e2) = &base {
            let merged = simplify(&Expr::Mul(vec![
                (**e2).clone(),
                Expr::Const(Rat::from_integer(k)),
            ]));
            return rebuild_pow((**b2).clone(), merged);
        }
    }
    Expr::Pow(Box::new(base), Box::new(exp))
}

fn rebuild_fun(kind: FunKind, arg: Expr) -> Expr {
    match kind {
        FunKind::Sqrt => return rebuild_pow(arg, Expr::ratio(1, 2)),
        FunKind::Exp => {
            if arg.is_zero_literal() {
                return Expr::one();
            }
            if let Expr::Fun(FunKind::Ln, inner) = &arg {
                return (**inner).clone();
            }
        }
        FunKind::Ln => {
            if arg.is_one_literal() {
                return Expr::zero();
            }
            if let Expr::Fun(FunKind::Exp, inner) = &arg {
                return (**inner).clone();
            }
        }
        FunKind::Sin => {
            if arg.is_zero_literal() {
                return Expr::zero();
            }
        }
        FunKind::Cos => {
            if arg.is_zero_literal() {
                return Expr::one();
            }
        }
        FunKind::Abs => {
            if let Expr::Const(c) = &arg {
                return Expr::Const(c.abs());
            }
            if let Expr::Fun(FunKind::Abs, _) = &arg {
                return arg;
            }
            // |c * u| = |c| * |u| keeps constants out of absolute values.
            if let Expr::Mul(xs) = &arg {
                if let Some(Expr::Const(c)) = xs.first() {
                    if c.is_negative() {
                        let rest: Vec<Expr> = std::iter::once(Expr::Const(-c.clone()))
                            .chain(xs[1..].iter().cloned())
                            .collect();
                        return rebuild_fun(FunKind::Abs, rebuild_mul(rest));
                    }
                }
            }
        }
    }
    Expr::Fun(kind, Box::new(arg))
}

fn rat_pow(base: &Rat, k: i64) -> Rat {
    let mut acc = Rat::one();
    let b = if k >= 0 {
        base.clone()
    } else {
        base.recip()
    };
    for _ in 0..k.unsigned_abs() {
        acc *= b.clone();
    }
    acc
}

/// Distribute products over sums and multiply out small integer powers of
/// sums, then canonicalize. Exponents outside 1..=8 are left alone.
pub fn expand(e: &Expr) -> Expr {
    let s = simplify(e);
    let x = expand_node(&s);
    simplify(&x)
}

fn expand_node(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Var(_) => e.clone(),
        Expr::Neg(x) => simplify(&Expr::Neg(Box::new(expand_node(x)))),
        Expr::Fun(k, a) => simplify(&Expr::Fun(*k, Box::new(expand_node(a)))),
        // re-canonicalize so nested sums flatten before terms() is consulted
        Expr::Add(xs) => simplify(&Expr::Add(xs.iter().map(expand_node).collect())),
        Expr::Pow(b, x) => {
            let b = expand_node(b);
            let x = expand_node(x);
            if let (Expr::Add(_), Some(k)) = (&b, x.as_int()) {
                if let Some(k) = k.to_i64() {
                    if (1..=MAX_EXPAND_POW).contains(&k) {
                        let mut acc = b.clone();
                        for _ in 1..k {
                            acc = distribute(&acc, &b);
                        }
                        return acc;
                    }
                }
            }
            Expr::Pow(Box::new(b), Box::new(x))
        }
        Expr::Mul(xs) => {
            let mut acc = Expr::one();
            for x in xs {
                let x = expand_node(x);
                acc = distribute(&acc, &x);
            }
            acc
        }
    }
}

/// Product of two expanded expressions, distributing over any top-level sums.
fn distribute(a: &Expr, b: &Expr) -> Expr {
    let ta = a.terms();
    let tb = b.terms();
    if ta.len() == 1 && tb.len() == 1 {
        return simplify(&Expr::Mul(vec![a.clone(), b.clone()]));
    }
    let mut terms = Vec::with_capacity(ta.len() * tb.len());
    for x in ta {
        for y in tb {
            terms.push(simplify(&Expr::Mul(vec![x.clone(), y.clone()])));
        }
    }
    simplify(&Expr::Add(terms))
}
