//! Monomial integrating factors `mu = t^a0 * y^a1 * (y')^a2 * ...` found by
//! exact linear algebra: substituting the ansatz into the factor PDE system
//! and clearing the common monomial leaves conditions linear in the unknown
//! exponents.

use super::{certify, MuError, SearchPath, XiKind, XiSpec};
use crate::expr::{diff, expand, simplify, Expr, JetVar, ProbeConfig, Rat};
use crate::linalg::{self, LinSolve};
use crate::ode::{condition_pairs, exactness_report, CondPair, QuasiLinearOde};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

/// Magnitude bound on numerator and denominator of each solved exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzBounds {
    pub max_abs: i64,
}

impl Default for AnsatzBounds {
    fn default() -> Self {
        AnsatzBounds { max_abs: 12 }
    }
}

/// Extra data attached to a factor found by the ansatz.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzInfo {
    /// Exponents `(a0, a1, ..., an)` for `(t, y, ..., y^(n-1))`.
    pub exponents: Vec<Rat>,
    /// Dimension of the affine solution family (0 = unique).
    pub family_dim: usize,
    /// Kernel basis vectors when the family is not a point.
    pub family_basis: Vec<Vec<Rat>>,
}

impl AnsatzInfo {
    /// Does the affine family contain the given exponent vector?
    pub fn family_contains(&self, target: &[Rat]) -> bool {
        if target.len() != self.exponents.len() {
            return false;
        }
        if self.family_dim == 0 {
            return self.exponents == target;
        }
        // solve particular + B c = target for c exactly
        let rows: Vec<Vec<Rat>> = (0..self.exponents.len())
            .map(|i| self.family_basis.iter().map(|b| b[i].clone()).collect())
            .collect();
        let rhs: Vec<Rat> = target
            .iter()
            .zip(&self.exponents)
            .map(|(t, p)| t - p)
            .collect();
        !matches!(
            linalg::solve(&rows, &rhs, self.family_basis.len()),
            LinSolve::Inconsistent
        )
    }
}

/// Collect `expand(e)` into a map core-term -> rational coefficient.
fn collect_cores(e: &Expr, into: &mut BTreeMap<Expr, Vec<(usize, Rat)>>, slot: usize) {
    let expanded = expand(e);
    for term in expanded.terms() {
        if term.is_zero_literal() {
            continue;
        }
        let (coeff, core) = super::split_term_const(term);
        let c = match coeff.as_const() {
            Some(c) => c.clone(),
            None => Rat::one(),
        };
        into.entry(core).or_default().push((slot, c));
    }
}

/// Search for a monomial factor within the exponent bounds.
pub fn find_mu_power_ansatz(
    ode: &QuasiLinearOde,
    bounds: &AnsatzBounds,
    cfg: &ProbeConfig,
) -> Result<super::FactorResult, MuError> {
    let report = exactness_report(ode, cfg)?;
    if report.exact {
        return Ok(super::FactorResult::trivial(report));
    }
    let n = ode.order();
    let unknowns = n + 1; // a0 for t, a_k for y^(k-1)
    let var_of = |slot: usize| -> JetVar {
        if slot == 0 {
            JetVar::Time
        } else {
            JetVar::Deriv((slot - 1) as u32)
        }
    };

    // Build rows: for each condition, constant part C (slot = unknowns) and
    // per-exponent parts B_i, keyed by core term.
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    let mut rhs: Vec<Rat> = Vec::new();
    for pair in condition_pairs(n) {
        let mut buckets: BTreeMap<Expr, Vec<(usize, Rat)>> = BTreeMap::new();
        match pair {
            CondPair::Time { i } => {
                let t = Expr::time();
                let yi = Expr::Var(var_of(i));
                // t*y^(i-1)*(dFi/dt - dF0/dy^(i-1)) + a0*y^(i-1)*Fi - ai*t*F0 = 0
                let c = simplify(
                    &(t.clone()
                        * yi.clone()
                        * (diff(ode.coeff(i), JetVar::Time)
                            - diff(ode.coeff(0), var_of(i)))),
                );
                collect_cores(&c, &mut buckets, unknowns);
                let b0 = simplify(&(yi * ode.coeff(i).clone()));
                collect_cores(&b0, &mut buckets, 0);
                let bi = simplify(&-(t * ode.coeff(0).clone()));
                collect_cores(&bi, &mut buckets, i);
            }
            CondPair::Cross { i, j } => {
                let yi = Expr::Var(var_of(i));
                let yj = Expr::Var(var_of(j));
                // yi*yj*(dFi/dy^(j-1) - dFj/dy^(i-1)) + aj*yi*Fi - ai*yj*Fj = 0
                let c = simplify(
                    &(yi.clone()
                        * yj.clone()
                        * (diff(ode.coeff(i), var_of(j)) - diff(ode.coeff(j), var_of(i)))),
                );
                collect_cores(&c, &mut buckets, unknowns);
                let bj = simplify(&(yi * ode.coeff(i).clone()));
                collect_cores(&bj, &mut buckets, j);
                let bi = simplify(&-(yj * ode.coeff(j).clone()));
                collect_cores(&bi, &mut buckets, i);
            }
        }
        for (_core, entries) in buckets {
            let mut row = vec![Rat::zero(); unknowns];
            let mut c = Rat::zero();
            for (slot, value) in entries {
                if slot == unknowns {
                    c += value;
                } else {
                    row[slot] += value;
                }
            }
            if row.iter().all(|x| x.is_zero()) && c.is_zero() {
                continue;
            }
            rows.push(row);
            rhs.push(-c);
        }
    }

    let (exponents, family_dim, family_basis) = match linalg::solve(&rows, &rhs, unknowns) {
        LinSolve::Inconsistent => {
            return Err(MuError::NoSolution {
                reason: "the exponent system is inconsistent; no monomial factor exists".into(),
            })
        }
        LinSolve::Unique(a) => (a, 0, Vec::new()),
        LinSolve::Family { particular, basis } => {
            let dim = basis.len();
            (particular, dim, basis)
        }
    };

    let cap = BigInt::from(bounds.max_abs);
    for a in &exponents {
        if a.numer().abs() > cap || a.denom().abs() > cap {
            return Err(MuError::NoSolution {
                reason: format!(
                    "solved exponent {a} exceeds the ansatz bound {} on numerator/denominator",
                    bounds.max_abs
                ),
            });
        }
    }
    if exponents.iter().all(|a| a.is_zero()) {
        return Err(MuError::NoSolution {
            reason: "only the trivial constant factor solves the exponent system".into(),
        });
    }

    let mut factors = Vec::new();
    let mut alphas = vec![Expr::one(); n];
    let mut alpha = Expr::one();
    for (slot, a) in exponents.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let f = simplify(&Expr::pow(Expr::Var(var_of(slot)), Expr::Const(a.clone())));
        if slot == 0 {
            alpha = f.clone();
        } else {
            alphas[slot - 1] = f.clone();
        }
        factors.push(f);
    }
    let mu = simplify(&Expr::Mul(factors));

    // With xi taken as the monomial itself, mu(xi) = xi means g(s) = 1/s.
    let nonzero: Vec<usize> = exponents
        .iter()
        .enumerate()
        .filter(|(_, a)| !a.is_zero())
        .map(|(i, _)| i)
        .collect();
    let kind = match nonzero.as_slice() {
        [0] => XiKind::TimeOnly {
            alpha: alpha.clone(),
        },
        [k] => XiKind::SingleJet {
            k: *k,
            alpha: alphas[*k - 1].clone(),
        },
        _ => XiKind::Product { alpha, alphas },
    };
    let xi = XiSpec {
        kind,
        xi: mu.clone(),
    };
    let g = simplify(&(Expr::one() / Expr::aux()));
    let info = AnsatzInfo {
        exponents,
        family_dim,
        family_basis,
    };
    certify(ode, mu, g, xi, SearchPath::PowerAnsatz, Some(info), cfg)
}
