//! Integrating-factor search for non-exact quasi-linear equations.
//!
//! A candidate shape `xi` turns the exactness defect into ratio conditions:
//! every pair with a non-vanishing denominator must equal one common function
//! `g(xi)`, and then `mu = exp(integral of g)`. Specialized entry points cover
//! time-only factors, single-jet-variable factors, a monomial power ansatz,
//! and the constant-coefficient-like linear equation shortcut. Every returned
//! factor carries an exactness certificate for the scaled equation; the
//! certificate is computed, never assumed.

mod ansatz;
mod linear;

pub use ansatz::{find_mu_power_ansatz, AnsatzBounds, AnsatzInfo};
pub use linear::{linear_ode_factor, LinearFactor};

use crate::expr::{
    diff, eval_at, is_zero, print_expr, sample_point, simplify, substitute, Expr, FunKind,
    JetVar, ProbeConfig, ZeroVerdict,
};
use crate::ode::{
    apply_factor, condition_pairs, condition_residual, exactness_report, CondPair,
    ExactnessReport, OdeError, QuasiLinearOde,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use thiserror::Error;

/// Declared shape of the factor argument `xi`.
#[derive(Debug, Clone, PartialEq)]
pub enum XiKind {
    TimeOnly { alpha: Expr },
    SingleJet { k: usize, alpha: Expr },
    Product { alpha: Expr, alphas: Vec<Expr> },
}

/// A factor argument: its shape plus the assembled expression.
#[derive(Debug, Clone, PartialEq)]
pub struct XiSpec {
    pub kind: XiKind,
    pub xi: Expr,
}

impl XiSpec {
    /// `xi = t`
    pub fn time() -> Self {
        XiSpec {
            kind: XiKind::TimeOnly { alpha: Expr::time() },
            xi: Expr::time(),
        }
    }

    /// `xi = y^(k-1)` for k in 1..=n
    pub fn jet(k: usize) -> Self {
        let v = Expr::jet((k - 1) as u32);
        XiSpec {
            kind: XiKind::SingleJet {
                k,
                alpha: v.clone(),
            },
            xi: v,
        }
    }

    /// Classify an arbitrary expression as a product of single-variable
    /// components.
    pub fn from_expr(e: &Expr, order: usize) -> Result<Self, MuError> {
        let xi = simplify(e);
        let vars: Vec<JetVar> = xi.free_vars().into_iter().collect();
        if vars.is_empty() {
            return Err(MuError::InvalidXi {
                reason: "xi must not be constant".into(),
            });
        }
        for v in &vars {
            match v {
                JetVar::Time => {}
                JetVar::Deriv(k) if (*k as usize) < order => {}
                other => {
                    return Err(MuError::InvalidXi {
                        reason: format!("xi references {other}, outside the jet for this order"),
                    })
                }
            }
        }
        if vars.len() == 1 {
            let v = vars[0];
            return Ok(match v {
                JetVar::Time => XiSpec {
                    kind: XiKind::TimeOnly { alpha: xi.clone() },
                    xi,
                },
                JetVar::Deriv(k) => XiSpec {
                    kind: XiKind::SingleJet {
                        k: k as usize + 1,
                        alpha: xi.clone(),
                    },
                    xi,
                },
                JetVar::Aux => unreachable!("rejected above"),
            });
        }
        // multivariate: must factor into per-variable components
        let mut alpha = Expr::one();
        let mut alphas: Vec<Expr> = vec![Expr::one(); order];
        for f in xi.factors() {
            let fvars: Vec<JetVar> = f.free_vars().into_iter().collect();
            match fvars.as_slice() {
                [] => alpha = simplify(&(alpha * f.clone())),
                [JetVar::Time] => alpha = simplify(&(alpha * f.clone())),
                [JetVar::Deriv(k)] => {
                    let slot = *k as usize;
                    alphas[slot] = simplify(&(alphas[slot].clone() * f.clone()));
                }
                _ => {
                    return Err(MuError::InvalidXi {
                        reason: format!(
                            "factor '{}' mixes variables; xi must be a product of \
                             single-variable components",
                            print_expr(f)
                        ),
                    })
                }
            }
        }
        Ok(XiSpec {
            kind: XiKind::Product { alpha, alphas },
            xi,
        })
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            XiKind::TimeOnly { .. } => format!("xi = {} (time only)", print_expr(&self.xi)),
            XiKind::SingleJet { k, .. } => {
                format!(
                    "xi = {} (single jet variable y^({}))",
                    print_expr(&self.xi),
                    k - 1
                )
            }
            XiKind::Product { .. } => format!("xi = {} (product form)", print_expr(&self.xi)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioStatus {
    Active,
    Degenerate,
}

/// One rearranged condition `numerator / denominator = g(xi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioCondition {
    pub index: CondPair,
    pub numerator: Expr,
    pub denominator: Expr,
    pub status: RatioStatus,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MuError {
    #[error("DegenerateInconsistent: pair {index} has a vanishing denominator but nonzero numerator {numerator}; no factor of this shape exists")]
    DegenerateInconsistent { index: CondPair, numerator: String },
    #[error("RatiosDisagree: pairs {a} and {b} give different ratios (witness {witness})")]
    RatiosDisagree {
        a: CondPair,
        b: CondPair,
        witness: String,
    },
    #[error("NotFunctionOfXi: Jacobian minor {minor} is nonzero at {witness}")]
    NotFunctionOfXi { minor: String, witness: String },
    #[error("RewriteFailed: the ratio depends on xi but no closed form was recovered; samples (xi, r): {samples:?}")]
    RewriteFailed { samples: Vec<(f64, f64)> },
    #[error("IntegrationUnsupported: {reason}")]
    IntegrationUnsupported { reason: String },
    #[error("CertificateFailed: scaled equation still violates {violated:?}")]
    CertificateFailed { violated: Vec<String> },
    #[error("CrossConditionsFail: prerequisite conditions violated: {failing:?}")]
    CrossConditionsFail { failing: Vec<String> },
    #[error("NoSolution: {reason}")]
    NoSolution { reason: String },
    #[error("ConditionFailed({which}): {detail}")]
    ConditionFailed { which: String, detail: String },
    #[error("invalid xi: {reason}")]
    InvalidXi { reason: String },
    #[error(transparent)]
    Ode(#[from] OdeError),
}

impl From<crate::expr::ZeroTestError> for MuError {
    fn from(e: crate::expr::ZeroTestError) -> Self {
        MuError::Ode(e.into())
    }
}

/// Which search branch produced a factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchPath {
    AlreadyExact,
    Time,
    Jet(usize),
    PowerAnsatz,
    UserXi,
}

impl std::fmt::Display for SearchPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SearchPath::AlreadyExact => write!(f, "already-exact"),
            SearchPath::Time => write!(f, "time"),
            SearchPath::Jet(k) => write!(f, "jet(k={k})"),
            SearchPath::PowerAnsatz => write!(f, "power-ansatz"),
            SearchPath::UserXi => write!(f, "user-xi"),
        }
    }
}

/// A certified integrating factor.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorResult {
    pub mu: Expr,
    /// The common ratio as a function of a fresh symbol `s` with `s = xi`.
    pub g: Expr,
    pub xi: XiSpec,
    /// Exactness report of the scaled equation; `certificate.exact` holds.
    pub certificate: ExactnessReport,
    pub path: SearchPath,
    pub ansatz: Option<AnsatzInfo>,
}

impl FactorResult {
    fn trivial(certificate: ExactnessReport) -> Self {
        FactorResult {
            mu: Expr::one(),
            g: Expr::zero(),
            xi: XiSpec::time(),
            certificate,
            path: SearchPath::AlreadyExact,
            ansatz: None,
        }
    }
}

/// Build all ratio conditions for a candidate `xi`.
///
/// Time pairs: `(dF0/dy^(i-1) - dFi/dt) / (xi_t Fi - xi_{y^(i-1)} F0)`.
/// Cross pairs: `(dFj/dy^(i-1) - dFi/dy^(j-1)) / (xi_{y^(j-1)} Fi - xi_{y^(i-1)} Fj)`.
pub fn ratio_conditions(
    ode: &QuasiLinearOde,
    xi: &XiSpec,
    cfg: &ProbeConfig,
) -> Result<Vec<RatioCondition>, MuError> {
    let n = ode.order();
    let xi_t = diff(&xi.xi, JetVar::Time);
    let xi_jet = |k: usize| diff(&xi.xi, JetVar::Deriv(k as u32));
    let mut out = Vec::new();
    for pair in condition_pairs(n) {
        let (numerator, denominator) = match pair {
            CondPair::Time { i } => {
                let num = simplify(
                    &(diff(ode.coeff(0), JetVar::Deriv((i - 1) as u32))
                        - diff(ode.coeff(i), JetVar::Time)),
                );
                let den = simplify(
                    &(xi_t.clone() * ode.coeff(i).clone()
                        - xi_jet(i - 1) * ode.coeff(0).clone()),
                );
                (num, den)
            }
            CondPair::Cross { i, j } => {
                let num = simplify(
                    &(diff(ode.coeff(j), JetVar::Deriv((i - 1) as u32))
                        - diff(ode.coeff(i), JetVar::Deriv((j - 1) as u32))),
                );
                let den = simplify(
                    &(xi_jet(j - 1) * ode.coeff(i).clone()
                        - xi_jet(i - 1) * ode.coeff(j).clone()),
                );
                (num, den)
            }
        };
        let den_zero = is_zero(&denominator, cfg)?.is_zero();
        let status = if den_zero {
            if !is_zero(&numerator, cfg)?.is_zero() {
                return Err(MuError::DegenerateInconsistent {
                    index: pair,
                    numerator: print_expr(&numerator),
                });
            }
            RatioStatus::Degenerate
        } else {
            RatioStatus::Active
        };
        out.push(RatioCondition {
            index: pair,
            numerator,
            denominator,
            status,
        });
    }
    Ok(out)
}

/// Express `r` as a function `g(s)` of `xi`, verifying functional dependence
/// first via the 2x2 Jacobian minors of `(r, xi)`.
pub fn rewrite_in_xi(r: &Expr, xi: &XiSpec, cfg: &ProbeConfig) -> Result<Expr, MuError> {
    let r = simplify(r);
    let mut vars: Vec<JetVar> = r.free_vars().into_iter().collect();
    for v in xi.xi.free_vars() {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    vars.sort();

    // dependence: every minor r_u xi_v - r_v xi_u must vanish
    for (a, u) in vars.iter().enumerate() {
        for v in vars.iter().skip(a + 1) {
            let minor = simplify(
                &(diff(&r, *u) * diff(&xi.xi, *v) - diff(&r, *v) * diff(&xi.xi, *u)),
            );
            if let ZeroVerdict::NonZero { witness, value } = is_zero(&minor, cfg)? {
                return Err(MuError::NotFunctionOfXi {
                    minor: print_expr(&minor),
                    witness: format!("{} = {value:.6e}", witness_label(&witness)),
                });
            }
        }
    }

    // constants pass through unchanged
    if r.free_vars().is_empty() {
        return Ok(r);
    }

    // bare-variable xi: renaming the variable is the rewrite
    if let Expr::Var(v) = &xi.xi {
        let mut b = BTreeMap::new();
        b.insert(*v, Expr::aux());
        let g = substitute(&r, &b);
        if g.free_vars().iter().all(|w| *w == JetVar::Aux) {
            verify_rewrite(&g, &r, xi, cfg)?;
            return Ok(g);
        }
    }

    // numeric samples of (xi, r) for shape fitting
    let samples = collect_samples(&r, &xi.xi, &vars, cfg);

    // power law r = c * xi^p
    if let Some(g) = try_power_law(&r, xi, &samples, cfg) {
        return Ok(g);
    }
    // affine r = a + b xi
    if let Some(g) = try_affine(&r, xi, &samples, cfg) {
        return Ok(g);
    }
    Err(MuError::RewriteFailed {
        samples: samples.into_iter().take(8).collect(),
    })
}

fn witness_label(witness: &[(JetVar, f64)]) -> String {
    if witness.is_empty() {
        return "the empty point".into();
    }
    witness
        .iter()
        .map(|(v, x)| format!("{}={x:.4}", v.name()))
        .collect::<Vec<_>>()
        .join(", ")
}

fn collect_samples(
    r: &Expr,
    xi: &Expr,
    vars: &[JetVar],
    cfg: &ProbeConfig,
) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < 16 && attempts < 400 {
        attempts += 1;
        let point = sample_point(vars, &cfg.sample_box, &mut rng);
        let (Ok(xv), Ok(rv)) = (eval_at(xi, &point), eval_at(r, &point)) else {
            continue;
        };
        if xv.abs() > 1e-9 && xv.abs() < 1e9 && rv.abs() < 1e12 {
            out.push((xv, rv));
        }
    }
    out
}

fn verify_rewrite(g: &Expr, r: &Expr, xi: &XiSpec, cfg: &ProbeConfig) -> Result<(), MuError> {
    let mut b = BTreeMap::new();
    b.insert(JetVar::Aux, xi.xi.clone());
    let back = substitute(g, &b);
    let residual = simplify(&(back - r.clone()));
    match is_zero(&residual, cfg)? {
        ZeroVerdict::NonZero { witness, value } => Err(MuError::NotFunctionOfXi {
            minor: "verification residual g(xi) - r".into(),
            witness: format!("{} = {value:.6e}", witness_label(&witness)),
        }),
        _ => Ok(()),
    }
}

/// Snap a float to a small rational `p/q` with `q <= max_den`.
fn snap_rational(x: f64, max_den: i64) -> Option<(i64, i64)> {
    if !x.is_finite() || x.abs() > 1e7 {
        return None;
    }
    let mut best: Option<(i64, i64)> = None;
    let mut best_err = 5e-5;
    for q in 1..=max_den {
        let p = (x * q as f64).round();
        if p.abs() > 1e9 {
            continue;
        }
        let err = (x - p / q as f64).abs();
        if err < best_err {
            best_err = err;
            best = Some((p as i64, q));
        }
    }
    best
}

fn try_power_law(
    r: &Expr,
    xi: &XiSpec,
    samples: &[(f64, f64)],
    cfg: &ProbeConfig,
) -> Option<Expr> {
    let (x1, r1) = samples.iter().find(|(x, r)| x.abs() > 1e-6 && r.abs() > 1e-12)?;
    let (x2, r2) = samples.iter().find(|(x, r)| {
        (x.abs() - x1.abs()).abs() > 1e-3 && x.abs() > 1e-6 && r.abs() > 1e-12
    })?;
    let p_hat = (r1.abs().ln() - r2.abs().ln()) / (x1.abs().ln() - x2.abs().ln());
    let (pn, pd) = snap_rational(p_hat, 12)?;
    let p = Expr::ratio(pn, pd);
    let q = simplify(&(r.clone() * Expr::pow(xi.xi.clone(), simplify(&-p.clone()))));
    if !q.free_vars().is_empty() {
        return None;
    }
    let g = simplify(&(q * Expr::pow(Expr::aux(), p)));
    verify_rewrite(&g, r, xi, cfg).ok()?;
    Some(g)
}

fn try_affine(
    r: &Expr,
    xi: &XiSpec,
    samples: &[(f64, f64)],
    cfg: &ProbeConfig,
) -> Option<Expr> {
    let (x1, r1) = samples.first()?;
    let (x2, r2) = samples.iter().find(|(x, _)| (x - x1).abs() > 1e-4)?;
    let b_hat = (r1 - r2) / (x1 - x2);
    let a_hat = r1 - b_hat * x1;
    let (bn, bd) = snap_rational(b_hat, 64)?;
    let (an, ad) = snap_rational(a_hat, 64)?;
    let g = simplify(&(Expr::ratio(an, ad) + Expr::ratio(bn, bd) * Expr::aux()));
    verify_rewrite(&g, r, xi, cfg).ok()?;
    Some(g)
}

/// Rewrite `exp(G)` pulling `c*ln(u)` summands out as power factors `u^c`.
fn exp_of_integral(g_integral: &Expr) -> Expr {
    let mut power_factors: Vec<Expr> = Vec::new();
    let mut residual: Vec<Expr> = Vec::new();
    for term in g_integral.terms() {
        let (coeff, core) = split_term_const(term);
        let stripped = match &core {
            Expr::Fun(FunKind::Ln, inner) => match &**inner {
                Expr::Fun(FunKind::Abs, arg) => Some((**arg).clone()),
                other => Some(other.clone()),
            },
            _ => None,
        };
        match stripped {
            Some(base) => power_factors.push(Expr::pow(base, coeff)),
            None => residual.push(term.clone()),
        }
    }
    if !residual.is_empty() {
        power_factors.push(Expr::fun(FunKind::Exp, Expr::Add(residual)));
    }
    simplify(&Expr::Mul(power_factors))
}

pub(crate) fn split_term_const(term: &Expr) -> (Expr, Expr) {
    match term {
        Expr::Const(c) => (Expr::Const(c.clone()), Expr::one()),
        Expr::Mul(xs) => {
            if let Some(Expr::Const(c)) = xs.first() {
                let rest: Vec<Expr> = xs[1..].to_vec();
                let core = if rest.len() == 1 {
                    rest.into_iter().next().unwrap()
                } else {
                    Expr::Mul(rest)
                };
                return (Expr::Const(c.clone()), core);
            }
            (Expr::one(), term.clone())
        }
        other => (Expr::one(), other.clone()),
    }
}

/// Find `mu(xi)` for the given candidate shape. Already-exact equations get
/// `mu = 1` immediately.
pub fn find_mu_given_xi(
    ode: &QuasiLinearOde,
    xi: XiSpec,
    cfg: &ProbeConfig,
) -> Result<FactorResult, MuError> {
    let report = exactness_report(ode, cfg)?;
    if report.exact {
        return Ok(FactorResult::trivial(report));
    }
    let conds = ratio_conditions(ode, &xi, cfg)?;
    let active: Vec<&RatioCondition> = conds
        .iter()
        .filter(|c| c.status == RatioStatus::Active)
        .collect();
    let Some(first) = active.first() else {
        return Err(MuError::NoSolution {
            reason: "all ratio conditions are degenerate yet the equation is not exact".into(),
        });
    };
    for other in active.iter().skip(1) {
        let cross = simplify(
            &(first.numerator.clone() * other.denominator.clone()
                - other.numerator.clone() * first.denominator.clone()),
        );
        if let ZeroVerdict::NonZero { witness, value } = is_zero(&cross, cfg)? {
            return Err(MuError::RatiosDisagree {
                a: first.index,
                b: other.index,
                witness: format!("{} -> {value:.6e}", witness_label(&witness)),
            });
        }
    }
    let ratio = simplify(&(first.numerator.clone() / first.denominator.clone()));
    let g = rewrite_in_xi(&ratio, &xi, cfg)?;
    finish_with_g(ode, xi, g, SearchPath::UserXi, cfg)
}

/// Shared tail: integrate `g`, assemble `mu`, certify.
fn finish_with_g(
    ode: &QuasiLinearOde,
    xi: XiSpec,
    g: Expr,
    path: SearchPath,
    cfg: &ProbeConfig,
) -> Result<FactorResult, MuError> {
    let anti = match crate::calculus::integrate_uni(&g, JetVar::Aux) {
        crate::calculus::IntegralResult::Closed(a) => a,
        crate::calculus::IntegralResult::Unsupported { reason } => {
            return Err(MuError::IntegrationUnsupported { reason })
        }
    };
    let mu_s = exp_of_integral(&anti);
    let mut b = BTreeMap::new();
    b.insert(JetVar::Aux, xi.xi.clone());
    let mu = substitute(&mu_s, &b);
    certify(ode, mu, g, xi, path, None, cfg)
}

pub(crate) fn certify(
    ode: &QuasiLinearOde,
    mu: Expr,
    g: Expr,
    xi: XiSpec,
    path: SearchPath,
    ansatz: Option<AnsatzInfo>,
    cfg: &ProbeConfig,
) -> Result<FactorResult, MuError> {
    let scaled = apply_factor(ode, &mu, cfg)?;
    let certificate = exactness_report(&scaled, cfg)?;
    if !certificate.exact {
        let violated = certificate
            .violated()
            .iter()
            .map(|c| format!("{} = {}", c.lhs_label, c.rhs_label))
            .collect();
        return Err(MuError::CertificateFailed { violated });
    }
    Ok(FactorResult {
        mu,
        g,
        xi,
        certificate,
        path,
        ansatz,
    })
}

/// Conditions that must already hold for a time-only factor: every cross
/// pair (the pairs not involving the time column).
pub fn find_mu_time(ode: &QuasiLinearOde, cfg: &ProbeConfig) -> Result<FactorResult, MuError> {
    let report = exactness_report(ode, cfg)?;
    if report.exact {
        return Ok(FactorResult::trivial(report));
    }
    let failing = precheck_failures(ode, cfg, |pair| matches!(pair, CondPair::Cross { .. }))?;
    if !failing.is_empty() {
        return Err(MuError::CrossConditionsFail { failing });
    }
    let mut res = find_mu_given_xi(ode, XiSpec::time(), cfg)?;
    res.path = SearchPath::Time;
    Ok(res)
}

/// Factor in the single jet variable `y^(k-1)`: all conditions not involving
/// index `k` must already hold.
pub fn find_mu_jet(
    ode: &QuasiLinearOde,
    k: usize,
    cfg: &ProbeConfig,
) -> Result<FactorResult, MuError> {
    let n = ode.order();
    if k == 0 || k > n {
        return Err(MuError::InvalidXi {
            reason: format!("jet index k={k} outside 1..={n}"),
        });
    }
    let report = exactness_report(ode, cfg)?;
    if report.exact {
        return Ok(FactorResult::trivial(report));
    }
    let failing = precheck_failures(ode, cfg, |pair| match pair {
        CondPair::Time { i } => i != k,
        CondPair::Cross { i, j } => i != k && j != k,
    })?;
    if !failing.is_empty() {
        return Err(MuError::CrossConditionsFail { failing });
    }
    let mut res = find_mu_given_xi(ode, XiSpec::jet(k), cfg)?;
    res.path = SearchPath::Jet(k);
    Ok(res)
}

fn precheck_failures(
    ode: &QuasiLinearOde,
    cfg: &ProbeConfig,
    include: impl Fn(CondPair) -> bool,
) -> Result<Vec<String>, MuError> {
    let mut failing = Vec::new();
    for pair in condition_pairs(ode.order()) {
        if !include(pair) {
            continue;
        }
        let (lhs, rhs, residual) = condition_residual(ode, pair);
        if !is_zero(&residual, cfg)?.is_zero() {
            failing.push(format!("{pair}: {lhs} != {rhs}"));
        }
    }
    Ok(failing)
}

/// One attempted branch of the automatic search.
#[derive(Debug, Clone)]
pub struct SearchAttempt {
    pub branch: String,
    pub outcome: String,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub attempts: Vec<SearchAttempt>,
    pub result: Option<FactorResult>,
}

/// Deterministic search order: exactness, time factor, each jet variable,
/// then the monomial power ansatz.
pub fn search_auto(
    ode: &QuasiLinearOde,
    bounds: &AnsatzBounds,
    cfg: &ProbeConfig,
) -> Result<SearchOutcome, OdeError> {
    let mut attempts = Vec::new();
    let report = exactness_report(ode, cfg)?;
    if report.exact {
        attempts.push(SearchAttempt {
            branch: "exactness".into(),
            outcome: "already exact; mu = 1".into(),
        });
        return Ok(SearchOutcome {
            attempts,
            result: Some(FactorResult::trivial(report)),
        });
    }
    attempts.push(SearchAttempt {
        branch: "exactness".into(),
        outcome: format!("not exact ({} conditions violated)", report.violated().len()),
    });

    let mut branches: Vec<(String, Box<dyn Fn() -> Result<FactorResult, MuError>>)> = Vec::new();
    branches.push((
        "mu(t)".into(),
        Box::new({
            let ode = ode.clone();
            let cfg = cfg.clone();
            move || find_mu_time(&ode, &cfg)
        }),
    ));
    for k in 1..=ode.order() {
        branches.push((
            format!("mu(y^({}))", k - 1),
            Box::new({
                let ode = ode.clone();
                let cfg = cfg.clone();
                move || find_mu_jet(&ode, k, &cfg)
            }),
        ));
    }
    branches.push((
        "power-ansatz".into(),
        Box::new({
            let ode = ode.clone();
            let cfg = cfg.clone();
            let bounds = bounds.clone();
            move || find_mu_power_ansatz(&ode, &bounds, &cfg)
        }),
    ));

    for (name, run) in branches {
        match run() {
            Ok(res) => {
                attempts.push(SearchAttempt {
                    branch: name,
                    outcome: format!("found mu = {}", print_expr(&res.mu)),
                });
                return Ok(SearchOutcome {
                    attempts,
                    result: Some(res),
                });
            }
            Err(MuError::Ode(e)) => return Err(e),
            Err(e) => {
                attempts.push(SearchAttempt {
                    branch: name,
                    outcome: e.to_string(),
                });
            }
        }
    }
    Ok(SearchOutcome {
        attempts,
        result: None,
    })
}
