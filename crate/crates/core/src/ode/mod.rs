//! Quasi-linear ODE model: `F_n y^(n) + ... + F_1 y' + F_0 = 0` with
//! coefficients over the jet `(t, y, ..., y^(n-1))`, the pairwise exactness
//! conditions, explicit first integrals, factor application, and order
//! reduction.

pub mod file;

use crate::calculus::{integrate_uni, total_derivative, IntegralResult};
use crate::expr::{
    diff, eval_at, is_zero, print_expr, simplify, substitute, Expr, JetVar, ProbeConfig, Rat,
    ZeroTestError, ZeroVerdict,
};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OdeError {
    #[error("expected {expected} coefficients for order {order}, got {got}")]
    WrongArity {
        order: usize,
        expected: usize,
        got: usize,
    },
    #[error("the highest coefficient F{0} must not be identically zero")]
    HighestCoeffZero(usize),
    #[error("coefficient F{index} references {var}, beyond the jet for order {order}")]
    VariableOutOfRange {
        index: usize,
        var: JetVar,
        order: usize,
    },
    #[error("term '{term}' is not quasi-linear: its highest derivative appears nonlinearly")]
    NotQuasiLinear { term: String },
    #[error("equation is not exact; {violated} of {total} conditions are violated")]
    NotExact { violated: usize, total: usize },
    #[error("base point {base} is singular: {detail}")]
    BasePointSingular { base: String, detail: String },
    #[error("no nonsingular base point found; tried {tried}; supply one explicitly")]
    BasePointExhausted { tried: String },
    #[error("integrating factor is identically zero")]
    ZeroFactor,
    #[error("zero test inconclusive: {0}")]
    Inconclusive(String),
}

impl From<ZeroTestError> for OdeError {
    fn from(e: ZeroTestError) -> Self {
        OdeError::Inconclusive(e.to_string())
    }
}

/// The order-n quasi-linear data model. Coefficients are stored canonical,
/// indexed so `coeffs[i]` multiplies `y^(i)` (with `coeffs[0]` the free term).
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiLinearOde {
    order: usize,
    coeffs: Vec<Expr>,
}

impl QuasiLinearOde {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, i: usize) -> &Expr {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    /// Jet coordinates `(t, y, ..., y^(n-1))` in integration order.
    pub fn coordinates(&self) -> Vec<JetVar> {
        coordinates(self.order)
    }

    /// Left-hand side `sum_i F_i y^(i) + F_0` as one expression.
    pub fn lhs(&self) -> Expr {
        let mut terms = vec![self.coeffs[0].clone()];
        for (i, c) in self.coeffs.iter().enumerate().skip(1) {
            terms.push(simplify(&(c.clone() * Expr::jet(i as u32))));
        }
        simplify(&Expr::Add(terms))
    }
}

pub fn coordinates(order: usize) -> Vec<JetVar> {
    let mut v = vec![JetVar::Time];
    for k in 0..order {
        v.push(JetVar::Deriv(k as u32));
    }
    v
}

/// Validate and build the model.
pub fn make_ode(
    order: usize,
    coeffs: Vec<Expr>,
    cfg: &ProbeConfig,
) -> Result<QuasiLinearOde, OdeError> {
    if order == 0 || coeffs.len() != order + 1 {
        return Err(OdeError::WrongArity {
            order,
            expected: order + 1,
            got: coeffs.len(),
        });
    }
    let coeffs: Vec<Expr> = coeffs.iter().map(simplify).collect();
    for (i, c) in coeffs.iter().enumerate() {
        for v in c.free_vars() {
            let ok = match v {
                JetVar::Time => true,
                JetVar::Deriv(k) => (k as usize) < order,
                JetVar::Aux => false,
            };
            if !ok {
                return Err(OdeError::VariableOutOfRange {
                    index: i,
                    var: v,
                    order,
                });
            }
        }
    }
    if is_zero(&coeffs[order], cfg)?.is_zero() {
        return Err(OdeError::HighestCoeffZero(order));
    }
    Ok(QuasiLinearOde { order, coeffs })
}

/// Decompose a single expression into quasi-linear coefficients. Each term
/// joins `F_k` where `y^(k)` is its highest derivative, provided that factor
/// occurs linearly; terms with no derivative factor join `F_0`.
pub fn split_equation(
    e: &Expr,
    order: usize,
    cfg: &ProbeConfig,
) -> Result<QuasiLinearOde, OdeError> {
    let expanded = crate::expr::expand(e);
    let mut coeffs = vec![Expr::zero(); order + 1];
    let mut buckets: Vec<Vec<Expr>> = vec![Vec::new(); order + 1];
    for term in expanded.terms() {
        let kmax = term.max_deriv().filter(|k| *k >= 1);
        let Some(k) = kmax else {
            buckets[0].push(term.clone());
            continue;
        };
        if (k as usize) > order {
            return Err(OdeError::VariableOutOfRange {
                index: order,
                var: JetVar::Deriv(k),
                order,
            });
        }
        let jet = Expr::jet(k);
        let mut linear_factor = false;
        let mut positive_power = false;
        let mut other_power = false;
        for f in term.factors() {
            match f {
                Expr::Var(JetVar::Deriv(j)) if *j == k => linear_factor = true,
                Expr::Pow(b, e) if **b == jet => {
                    match e.as_int() {
                        Some(m) if m > 1.into() => positive_power = true,
                        _ => other_power = true,
                    }
                }
                _ => {}
            }
        }
        if linear_factor || positive_power {
            // divide one power of the leading derivative out; what remains is
            // the coefficient (it may still reference y^(k) when k < n)
            if !linear_factor && (k as usize) == order {
                return Err(OdeError::NotQuasiLinear {
                    term: print_expr(term),
                });
            }
            buckets[k as usize].push(simplify(&(term.clone() / jet)));
        } else if other_power && (k as usize) == order {
            return Err(OdeError::NotQuasiLinear {
                term: print_expr(term),
            });
        } else {
            // the highest derivative occurs only inside a function argument or
            // with a negative/fractional power; the term is coefficient-level
            // and joins F0 (order validation rejects it when k = n)
            buckets[0].push(term.clone());
        }
    }
    for (k, parts) in buckets.into_iter().enumerate() {
        coeffs[k] = simplify(&Expr::Add(parts));
    }
    make_ode(order, coeffs, cfg)
}

/// Index of an exactness condition pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CondPair {
    /// `dF_i/dt = dF_0/dy^(i-1)`
    Time { i: usize },
    /// `dF_i/dy^(j-1) = dF_j/dy^(i-1)`, i > j >= 1
    Cross { i: usize, j: usize },
}

impl std::fmt::Display for CondPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CondPair::Time { i } => write!(f, "({i},0)"),
            CondPair::Cross { i, j } => write!(f, "({i},{j})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub pair: CondPair,
    pub lhs_label: String,
    pub rhs_label: String,
    pub residual: Expr,
    pub verdict: ZeroVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactnessReport {
    pub exact: bool,
    pub conditions: Vec<ConditionCheck>,
    pub seed: u64,
    /// Records the enumerated size of the condition system.
    pub count_note: String,
}

impl ExactnessReport {
    pub fn violated(&self) -> Vec<&ConditionCheck> {
        self.conditions
            .iter()
            .filter(|c| !c.verdict.is_zero())
            .collect()
    }
}

fn jet_name(k: usize) -> String {
    JetVar::Deriv(k as u32).name()
}

/// Enumerate the condition pairs for order `n` in report order.
pub fn condition_pairs(n: usize) -> Vec<CondPair> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 1..=n {
        out.push(CondPair::Time { i });
    }
    for i in 2..=n {
        for j in 1..i {
            out.push(CondPair::Cross { i, j });
        }
    }
    out
}

/// Residual `lhs - rhs` of one condition, with its labels.
pub fn condition_residual(ode: &QuasiLinearOde, pair: CondPair) -> (String, String, Expr) {
    match pair {
        CondPair::Time { i } => {
            let lhs = diff(ode.coeff(i), JetVar::Time);
            let rhs = diff(ode.coeff(0), JetVar::Deriv((i - 1) as u32));
            (
                format!("dF{i}/dt"),
                format!("dF0/d{}", jet_name(i - 1)),
                simplify(&(lhs - rhs)),
            )
        }
        CondPair::Cross { i, j } => {
            let lhs = diff(ode.coeff(i), JetVar::Deriv((j - 1) as u32));
            let rhs = diff(ode.coeff(j), JetVar::Deriv((i - 1) as u32));
            (
                format!("dF{i}/d{}", jet_name(j - 1)),
                format!("dF{j}/d{}", jet_name(i - 1)),
                simplify(&(lhs - rhs)),
            )
        }
    }
}

/// Check all `n + n(n-1)/2` pairwise conditions.
pub fn exactness_report(
    ode: &QuasiLinearOde,
    cfg: &ProbeConfig,
) -> Result<ExactnessReport, OdeError> {
    let n = ode.order();
    let mut conditions = Vec::new();
    for pair in condition_pairs(n) {
        let (lhs_label, rhs_label, residual) = condition_residual(ode, pair);
        let verdict = is_zero(&residual, cfg)?;
        conditions.push(ConditionCheck {
            pair,
            lhs_label,
            rhs_label,
            residual,
            verdict,
        });
    }
    let exact = conditions.iter().all(|c| c.verdict.is_zero());
    Ok(ExactnessReport {
        exact,
        conditions,
        seed: cfg.seed,
        count_note: format!(
            "condition system for order {n}: {} pairwise equations (n(n+1)/2)",
            n * (n + 1) / 2
        ),
    })
}

/// A point of the jet space used as the lower limit of the coordinate-line
/// integrals. Missing coordinates default to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BasePoint(BTreeMap<JetVar, Rat>);

impl BasePoint {
    pub fn new(map: BTreeMap<JetVar, Rat>) -> Self {
        BasePoint(map)
    }

    pub fn zeros() -> Self {
        BasePoint(BTreeMap::new())
    }

    pub fn ones(order: usize) -> Self {
        BasePoint(
            coordinates(order)
                .into_iter()
                .map(|v| (v, Rat::one()))
                .collect(),
        )
    }

    /// `t = 0`, every jet coordinate 1.
    pub fn zero_time_unit_jets(order: usize) -> Self {
        let mut m: BTreeMap<JetVar, Rat> = coordinates(order)
            .into_iter()
            .map(|v| (v, Rat::one()))
            .collect();
        m.insert(JetVar::Time, Rat::zero());
        BasePoint(m)
    }

    pub fn value(&self, v: JetVar) -> Rat {
        self.0.get(&v).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn to_f64(&self, order: usize) -> BTreeMap<JetVar, f64> {
        coordinates(order)
            .into_iter()
            .map(|v| (v, crate::expr::rat_to_f64(&self.value(v))))
            .collect()
    }

    pub fn label(&self, order: usize) -> String {
        coordinates(order)
            .into_iter()
            .map(|v| format!("{}0={}", v.name(), self.value(v)))
            .collect::<Vec<_>>()
            .join(", ")
    }

    pub fn entries(&self) -> &BTreeMap<JetVar, Rat> {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockedTerm {
    pub coeff_index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PsiStatus {
    Closed,
    PartiallyClosed { blocked: Vec<BlockedTerm> },
}

/// A constructed first integral `psi = c` with its base point.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstIntegral {
    pub psi: Expr,
    pub base: BasePoint,
    pub status: PsiStatus,
}

impl FirstIntegral {
    pub fn is_closed(&self) -> bool {
        matches!(self.status, PsiStatus::Closed)
    }
}

/// Build the first integral along coordinate lines: the k-th summand
/// integrates `F_k` in the k-th coordinate with all earlier coordinates
/// frozen at the base point and later ones left live.
pub fn first_integral(
    ode: &QuasiLinearOde,
    base: &BasePoint,
    cfg: &ProbeConfig,
) -> Result<FirstIntegral, OdeError> {
    let report = exactness_report(ode, cfg)?;
    if !report.exact {
        return Err(OdeError::NotExact {
            violated: report.violated().len(),
            total: report.conditions.len(),
        });
    }
    first_integral_unchecked(ode, base)
}

/// Same construction without re-running the exactness check (used when the
/// caller already holds a certificate).
pub fn first_integral_unchecked(
    ode: &QuasiLinearOde,
    base: &BasePoint,
) -> Result<FirstIntegral, OdeError> {
    let coords = ode.coordinates();
    let n = ode.order();
    let mut parts: Vec<Expr> = Vec::new();
    let mut blocked: Vec<BlockedTerm> = Vec::new();
    for k in 0..=n {
        // freeze coordinates before position k at their base values
        let frozen: BTreeMap<JetVar, Expr> = coords[..k]
            .iter()
            .map(|v| (*v, Expr::Const(base.value(*v))))
            .collect();
        let integrand = substitute(ode.coeff(k), &frozen);
        if integrand.is_zero_literal() {
            continue;
        }
        let var = coords[k];
        match integrate_uni(&integrand, var) {
            IntegralResult::Closed(anti) => {
                let mut at_lower = BTreeMap::new();
                at_lower.insert(var, Expr::Const(base.value(var)));
                let lower = substitute(&anti, &at_lower);
                parts.push(simplify(&(anti - lower)));
            }
            IntegralResult::Unsupported { reason } => {
                blocked.push(BlockedTerm {
                    coeff_index: k,
                    reason,
                });
            }
        }
    }
    let psi = simplify(&Expr::Add(parts));
    // The definite-integral form must evaluate finitely (to zero) at its own
    // base point; a singular evaluation means the base sits on a pole.
    let point = base.to_f64(n);
    if let Err(crate::expr::EvalError::Singular { detail }) = eval_at(&psi, &point) {
        return Err(OdeError::BasePointSingular {
            base: base.label(n),
            detail,
        });
    }
    let status = if blocked.is_empty() {
        PsiStatus::Closed
    } else {
        PsiStatus::PartiallyClosed { blocked }
    };
    Ok(FirstIntegral {
        psi,
        base: base.clone(),
        status,
    })
}

/// Default base-point ladder: all zeros, all ones, then `t=0` with unit jets.
pub fn base_candidates(order: usize) -> Vec<BasePoint> {
    vec![
        BasePoint::zeros(),
        BasePoint::ones(order),
        BasePoint::zero_time_unit_jets(order),
    ]
}

/// Try the user base (if any) and then the default ladder, recording every
/// singular attempt.
pub fn first_integral_with_fallback(
    ode: &QuasiLinearOde,
    user_base: Option<BasePoint>,
    cfg: &ProbeConfig,
) -> Result<(FirstIntegral, Vec<String>), OdeError> {
    let report = exactness_report(ode, cfg)?;
    if !report.exact {
        return Err(OdeError::NotExact {
            violated: report.violated().len(),
            total: report.conditions.len(),
        });
    }
    let mut candidates: Vec<BasePoint> = Vec::new();
    if let Some(b) = user_base {
        candidates.push(b);
    }
    for c in base_candidates(ode.order()) {
        if !candidates.contains(&c) {
            candidates.push(c);
        }
    }
    let mut notes = Vec::new();
    let mut tried = Vec::new();
    for base in candidates {
        tried.push(base.label(ode.order()));
        match first_integral_unchecked(ode, &base) {
            Ok(fi) => return Ok((fi, notes)),
            Err(OdeError::BasePointSingular { base, detail }) => {
                notes.push(format!("base ({base}) singular ({detail}); retrying"));
            }
            Err(other) => return Err(other),
        }
    }
    Err(OdeError::BasePointExhausted {
        tried: tried.join("; "),
    })
}

/// Multiply every coefficient by `mu`.
pub fn apply_factor(
    ode: &QuasiLinearOde,
    mu: &Expr,
    cfg: &ProbeConfig,
) -> Result<QuasiLinearOde, OdeError> {
    if is_zero(mu, cfg)?.is_zero() {
        return Err(OdeError::ZeroFactor);
    }
    let coeffs: Vec<Expr> = ode
        .coeffs
        .iter()
        .map(|c| simplify(&(mu.clone() * c.clone())))
        .collect();
    make_ode(ode.order, coeffs, cfg)
}

/// Result of reducing the order by one: the reduced equation is `psi = c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub integral: FirstIntegral,
    pub mu: Option<Expr>,
    pub base_notes: Vec<String>,
    pub constant_name: &'static str,
}

/// Reduce an exact (or factor-scaled exact) equation to `psi = c` of order
/// `n - 1`.
pub fn reduce_order(
    ode: &QuasiLinearOde,
    mu: Option<&Expr>,
    base: Option<BasePoint>,
    cfg: &ProbeConfig,
) -> Result<Reduction, OdeError> {
    let scaled = match mu {
        Some(m) => apply_factor(ode, m, cfg)?,
        None => ode.clone(),
    };
    let (integral, base_notes) = first_integral_with_fallback(&scaled, base, cfg)?;
    Ok(Reduction {
        integral,
        mu: mu.cloned(),
        base_notes,
        constant_name: "c",
    })
}

/// Residual of the defining identity `d psi / dt - lhs(ode)`; zero when the
/// constructed psi really is a first integral of the equation.
pub fn psi_defining_residual(ode: &QuasiLinearOde, psi: &Expr) -> Result<Expr, OdeError> {
    let td = total_derivative(psi, ode.order() as u32).map_err(|e| {
        OdeError::Inconclusive(e.to_string())
    })?;
    Ok(simplify(&(td - ode.lhs())))
}
