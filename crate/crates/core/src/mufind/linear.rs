//! Shortcut for linear equations
//! `P_n y^(n) + ... + P_1 y' + P_0 y = h` with time-dependent coefficients:
//! when `P_2..P_n` are pairwise proportional and `W(P_1, P_n) = P_0 P_n`
//! (with `W(u, w) = u' w - u w'`), the factor is `1/P_n` and the reduced
//! right-hand side is the antiderivative of `h / P_n`.

use super::MuError;
use crate::calculus::{integrate_uni, wronskian, IntegralResult};
use crate::expr::{is_zero, simplify, Expr, JetVar, ProbeConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFactor {
    pub mu: Expr,
    pub first_integral_rhs: Expr,
    /// Set when the factor degenerates to a constant.
    pub trivial: bool,
}

/// `p` lists `[P_0, P_1, ..., P_n]`, all functions of `t` only; `h` is the
/// right-hand side.
pub fn linear_ode_factor(
    p: &[Expr],
    h: &Expr,
    cfg: &ProbeConfig,
) -> Result<LinearFactor, MuError> {
    if p.len() < 3 {
        return Err(MuError::InvalidXi {
            reason: format!("need at least P0, P1, P2; got {} coefficients", p.len()),
        });
    }
    let n = p.len() - 1;
    for (i, pi) in p.iter().enumerate() {
        if let Some(v) = pi.free_vars().into_iter().find(|v| *v != JetVar::Time) {
            return Err(MuError::InvalidXi {
                reason: format!("P{i} references {v}; coefficients must depend on t only"),
            });
        }
        // P0 may vanish (constant-coefficient case); the derivative
        // coefficients must not
        if i >= 1 && is_zero(pi, cfg)?.is_zero() {
            return Err(MuError::ConditionFailed {
                which: "nonzero-coefficients".into(),
                detail: format!("P{i} vanishes on the probe box"),
            });
        }
    }
    // P_2 .. P_n pairwise proportional
    for i in 2..=n {
        for j in (i + 1)..=n {
            let w = wronskian(&p[i], &p[j]).map_err(|e| MuError::InvalidXi {
                reason: e.to_string(),
            })?;
            if !is_zero(&w, cfg)?.is_zero() {
                return Err(MuError::ConditionFailed {
                    which: "proportionality".into(),
                    detail: format!("W(P{i}, P{j}) does not vanish"),
                });
            }
        }
    }
    // W(P_1, P_n) = P_0 P_n
    let w = wronskian(&p[1], &p[n]).map_err(|e| MuError::InvalidXi {
        reason: e.to_string(),
    })?;
    let residual = simplify(&(w - p[0].clone() * p[n].clone()));
    if !is_zero(&residual, cfg)?.is_zero() {
        return Err(MuError::ConditionFailed {
            which: "wronskian".into(),
            detail: format!(
                "W(P1, P{n}) - P0*P{n} = {} is not identically zero",
                crate::expr::print_expr(&residual)
            ),
        });
    }
    let mu = simplify(&(Expr::one() / p[n].clone()));
    let integrand = simplify(&(h.clone() / p[n].clone()));
    let rhs = match integrate_uni(&integrand, JetVar::Time) {
        IntegralResult::Closed(e) => e,
        IntegralResult::Unsupported { reason } => {
            return Err(MuError::IntegrationUnsupported { reason })
        }
    };
    let trivial = mu.free_vars().is_empty();
    Ok(LinearFactor {
        mu,
        first_integral_rhs: rhs,
        trivial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn cfg() -> ProbeConfig {
        ProbeConfig::default()
    }

    fn e(src: &str) -> Expr {
        parse_expr(src, 0).unwrap()
    }

    #[test]
    fn derived_instance() {
        // P = (t, t^2, t), h = t: mu = 1/t and the reduced rhs is t
        let r = linear_ode_factor(&[e("t"), e("t^2"), e("t")], &e("t"), &cfg()).unwrap();
        assert_eq!(r.mu, e("t^(-1)"));
        assert_eq!(r.first_integral_rhs, e("t"));
        assert!(!r.trivial);
    }

    #[test]
    fn constant_coefficients_trivial_factor() {
        // a0 = 0: W(a1, a2) = 0 = a0*a2, so mu = 1/a2 (a constant factor)
        let r = linear_ode_factor(&[e("0"), e("1"), e("2")], &e("1"), &cfg()).unwrap();
        assert_eq!(r.mu, e("1/2"));
        assert!(r.trivial);
    }

    #[test]
    fn higher_order_proportional_chain() {
        let r = linear_ode_factor(&[e("t"), e("t^2"), e("t"), e("t")], &e("2*t"), &cfg()).unwrap();
        assert_eq!(r.mu, e("t^(-1)"));
        assert_eq!(r.first_integral_rhs, e("2*t"));
    }

    #[test]
    fn wronskian_condition_failure() {
        // P = (1, t, t^2): W(t, t^2) = -t^2 != P0*P2 = t^2
        let err = linear_ode_factor(&[e("1"), e("t"), e("t^2")], &e("t"), &cfg()).unwrap_err();
        match err {
            MuError::ConditionFailed { which, .. } => assert_eq!(which, "wronskian"),
            other => panic!("expected wronskian failure, got {other}"),
        }
    }

    #[test]
    fn proportionality_failure() {
        // P2 = t, P3 = t^2 are not proportional
        let err = linear_ode_factor(
            &[e("t"), e("t^2"), e("t"), e("t^2")],
            &e("t"),
            &cfg(),
        )
        .unwrap_err();
        match err {
            MuError::ConditionFailed { which, .. } => assert_eq!(which, "proportionality"),
            other => panic!("expected proportionality failure, got {other}"),
        }
    }
}
