//! Immutable symbolic expressions over the jet coordinates `t, y, y', ..., y^(n)`.
//!
//! Every operation returns a new tree; nothing is mutated in place, so
//! expressions can be shared freely between threads. Canonical form is
//! established by [`simplify`] and is what [`parse_expr`] returns.

mod diff;
mod eval;
mod parse;
mod print;
mod simplify;
mod zero;

pub use diff::diff;
pub use eval::{eval_at, substitute, EvalError};
pub(crate) use parse::parse_rat;
pub use parse::{parse_expr, ParseError};
pub use print::print_expr;
pub use simplify::{expand, simplify};
pub use zero::{is_zero, sample_point, ProbeConfig, SampleBox, ZeroTestError, ZeroVerdict};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeSet;

/// Exact rational scalar used for all literal constants.
pub type Rat = BigRational;

/// A coordinate of the jet space: `t` or the k-th derivative of `y`.
///
/// `Deriv(0)` is `y` itself. `Aux` is a reserved symbol (printed `s`) used
/// internally for functions of an integrating-factor argument; the parser
/// never produces it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum JetVar {
    Time,
    Deriv(u32),
    Aux,
}

impl JetVar {
    pub fn name(&self) -> String {
        match self {
            JetVar::Time => "t".into(),
            JetVar::Deriv(0) => "y".into(),
            JetVar::Deriv(k) => format!("y{k}"),
            JetVar::Aux => "s".into(),
        }
    }

    /// Order of the derivative this variable denotes (t counts as none).
    pub fn deriv_order(&self) -> Option<u32> {
        match self {
            JetVar::Deriv(k) => Some(*k),
            _ => None,
        }
    }
}

impl std::fmt::Display for JetVar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

/// Elementary functions admitted in expressions.
///
/// `Abs` exists so antiderivatives can carry `ln|u|`; the parser accepts
/// `|...|` and `abs(...)` for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FunKind {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl FunKind {
    pub fn name(&self) -> &'static str {
        match self {
            FunKind::Exp => "exp",
            FunKind::Ln => "ln",
            FunKind::Sin => "sin",
            FunKind::Cos => "cos",
            FunKind::Sqrt => "sqrt",
            FunKind::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<FunKind> {
        Some(match name {
            "exp" => FunKind::Exp,
            "ln" => FunKind::Ln,
            "sin" => FunKind::Sin,
            "cos" => FunKind::Cos,
            "sqrt" => FunKind::Sqrt,
            "abs" => FunKind::Abs,
            _ => return None,
        })
    }
}

/// Immutable expression tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(Rat),
    Var(JetVar),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Fun(FunKind, Box<Expr>),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Const(Rat::from_integer(BigInt::from(n)))
    }

    pub fn ratio(p: i64, q: i64) -> Expr {
        Expr::Const(Rat::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn time() -> Expr {
        Expr::Var(JetVar::Time)
    }

    /// The k-th derivative of y as a variable (`jet(0)` is y).
    pub fn jet(k: u32) -> Expr {
        Expr::Var(JetVar::Deriv(k))
    }

    pub fn aux() -> Expr {
        Expr::Var(JetVar::Aux)
    }

    pub fn fun(kind: FunKind, arg: Expr) -> Expr {
        Expr::Fun(kind, Box::new(arg))
    }

    pub fn pow(base: Expr, exp: Expr) -> Expr {
        Expr::Pow(Box::new(base), Box::new(exp))
    }

    pub fn powi(self, k: i64) -> Expr {
        Expr::pow(self, Expr::int(k))
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Expr::Const(_))
    }

    pub fn as_const(&self) -> Option<&Rat> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Constant integer value, if the node is a literal integer.
    pub fn as_int(&self) -> Option<BigInt> {
        match self {
            Expr::Const(c) if c.is_integer() => Some(c.to_integer()),
            _ => None,
        }
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_one_literal(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    /// All jet variables occurring in the tree, in canonical order.
    pub fn free_vars(&self) -> BTreeSet<JetVar> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<JetVar>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Add(xs) | Expr::Mul(xs) => {
                for x in xs {
                    x.collect_vars(out);
                }
            }
            Expr::Pow(b, e) => {
                b.collect_vars(out);
                e.collect_vars(out);
            }
            Expr::Neg(x) | Expr::Fun(_, x) => x.collect_vars(out),
        }
    }

    pub fn contains_var(&self, v: JetVar) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().any(|x| x.contains_var(v)),
            Expr::Pow(b, e) => b.contains_var(v) || e.contains_var(v),
            Expr::Neg(x) | Expr::Fun(_, x) => x.contains_var(v),
        }
    }

    /// Highest y-derivative order referenced anywhere, if any.
    pub fn max_deriv(&self) -> Option<u32> {
        self.free_vars()
            .into_iter()
            .filter_map(|v| v.deriv_order())
            .max()
    }

    /// Top-level additive terms of a canonical tree.
    pub fn terms(&self) -> &[Expr] {
        match self {
            Expr::Add(xs) => xs,
            _ => std::slice::from_ref(self),
        }
    }

    /// Top-level multiplicative factors of a canonical tree.
    pub fn factors(&self) -> &[Expr] {
        match self {
            Expr::Mul(xs) => xs,
            _ => std::slice::from_ref(self),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(_) => 1,
            Expr::Fun(..) => 2,
            Expr::Pow(..) => 3,
            Expr::Mul(_) => 4,
            Expr::Add(_) => 5,
            // Neg is transient (eliminated by simplify); order it like its operand class.
            Expr::Neg(_) => 6,
        }
    }
}

/// Fixed total order: Const < Var < Fun < Pow < Mul < Add, ties broken
/// recursively. This is the order canonical Add/Mul children are sorted by.
impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.rank().cmp(&other.rank()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        match (self, other) {
            (Expr::Const(a), Expr::Const(b)) => a.cmp(b),
            (Expr::Var(a), Expr::Var(b)) => a.cmp(b),
            (Expr::Fun(fa, xa), Expr::Fun(fb, xb)) => fa.cmp(fb).then_with(|| xa.cmp(xb)),
            (Expr::Pow(ba, ea), Expr::Pow(bb, eb)) => ba.cmp(bb).then_with(|| ea.cmp(eb)),
            (Expr::Mul(xs), Expr::Mul(ys)) | (Expr::Add(xs), Expr::Add(ys)) => xs.cmp(ys),
            (Expr::Neg(a), Expr::Neg(b)) => a.cmp(b),
            _ => unreachable!("rank() distinguishes variants"),
        }
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print_expr(self))
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, Expr::Neg(Box::new(rhs))])
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(vec![self, rhs])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Mul(vec![self, Expr::pow(rhs, Expr::int(-1))])
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

pub(crate) fn rat_to_f64(r: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        // Fall back to a sign-correct infinity for magnitudes beyond f64.
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}
