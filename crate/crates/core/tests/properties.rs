//! Property tests for the symbolic layer and the exactness machinery.

use exactode::calculus::total_derivative;
use exactode::expr::{
    diff, eval_at, is_zero, parse_expr, print_expr, simplify, Expr, FunKind, JetVar,
    ProbeConfig, SampleBox,
};
use exactode::mufind::{find_mu_power_ansatz, AnsatzBounds};
use exactode::ode::{apply_factor, exactness_report, first_integral_with_fallback, make_ode};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

fn cfg() -> ProbeConfig {
    ProbeConfig::default()
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-4i64..=4).prop_map(Expr::int),
        ((1i64..=3), (1i64..=3)).prop_map(|(p, q)| Expr::ratio(p, q)),
        Just(Expr::time()),
        Just(Expr::jet(0)),
        Just(Expr::jet(1)),
    ];
    leaf.prop_recursive(3, 20, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Add),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Expr::Mul),
            (inner.clone(), -3i64..=3).prop_map(|(b, k)| Expr::pow(b, Expr::int(k))),
            inner.clone().prop_map(|x| Expr::fun(FunKind::Sin, x)),
            inner.clone().prop_map(|x| Expr::fun(FunKind::Cos, x)),
            inner.clone().prop_map(|x| -x),
        ]
    })
}

/// Polynomial-only trees, for identities that need exact cancellation.
fn arb_poly_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-3i64..=3).prop_map(Expr::int),
        Just(Expr::time()),
        Just(Expr::jet(0)),
        Just(Expr::jet(1)),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Add),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Expr::Mul),
            (inner.clone(), 1i64..=3).prop_map(|(b, k)| Expr::pow(b, Expr::int(k))),
            inner.prop_map(|x| -x),
        ]
    })
}

fn sample_points(vars: &[JetVar], count: usize, seed: u64) -> Vec<BTreeMap<JetVar, f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sb = SampleBox::default();
    (0..count)
        .map(|_| vars.iter().map(|v| (*v, sb.sample(&mut rng))).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// print-then-parse reproduces the canonical tree
    #[test]
    fn print_parse_round_trip(e in arb_expr()) {
        let canonical = simplify(&e);
        let text = print_expr(&canonical);
        let back = parse_expr(&text, 9).unwrap_or_else(|err| {
            panic!("'{text}' failed to reparse: {err}")
        });
        prop_assert_eq!(back, canonical);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// simplify is idempotent
    #[test]
    fn simplify_idempotent(e in arb_expr()) {
        let once = simplify(&e);
        prop_assert_eq!(simplify(&once), once.clone());
    }

    /// simplify preserves values at nonsingular points
    #[test]
    fn simplify_value_preserving(e in arb_expr(), seed in 0u64..1000) {
        let s = simplify(&e);
        let vars: Vec<JetVar> = e.free_vars().into_iter().collect();
        for point in sample_points(&vars, 4, seed) {
            let (Ok(a), Ok(b)) = (eval_at(&e, &point), eval_at(&s, &point)) else {
                continue;
            };
            let scale = 1.0 + a.abs();
            prop_assert!((a - b).abs() <= 1e-9 * scale, "{a} vs {b} for {e:?}");
        }
    }

    /// differentiation is linear
    #[test]
    fn diff_linearity(f in arb_expr(), g in arb_expr(), a in -3i64..=3, b in -3i64..=3) {
        for v in [JetVar::Time, JetVar::Deriv(0)] {
            let lhs = diff(&simplify(&(Expr::int(a) * f.clone() + Expr::int(b) * g.clone())), v);
            let rhs = simplify(&(Expr::int(a) * diff(&f, v) + Expr::int(b) * diff(&g, v)));
            let residual = simplify(&(lhs - rhs));
            // a fully singular residual domain is an admissible skip
            if let Ok(verdict) = is_zero(&residual, &cfg()) {
                prop_assert!(verdict.is_zero(), "linearity failed in {}", v.name());
            }
        }
    }

    /// total derivative satisfies the Leibniz rule
    #[test]
    fn total_derivative_leibniz(f in arb_poly_expr(), g in arb_poly_expr()) {
        let n = 2;
        let product = simplify(&(f.clone() * g.clone()));
        let lhs = total_derivative(&product, n).unwrap();
        let rhs = simplify(
            &(total_derivative(&f, n).unwrap() * g.clone()
                + f.clone() * total_derivative(&g, n).unwrap()),
        );
        let residual = simplify(&(lhs - rhs));
        prop_assert!(is_zero(&residual, &cfg()).unwrap().is_zero());
    }

    /// total derivative is linear
    #[test]
    fn total_derivative_linear(f in arb_poly_expr(), g in arb_poly_expr(), a in -3i64..=3) {
        let n = 2;
        let lhs = total_derivative(&simplify(&(Expr::int(a) * f.clone() + g.clone())), n).unwrap();
        let rhs = simplify(
            &(Expr::int(a) * total_derivative(&f, n).unwrap() + total_derivative(&g, n).unwrap()),
        );
        let residual = simplify(&(lhs - rhs));
        prop_assert!(is_zero(&residual, &cfg()).unwrap().is_zero());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// mixed partials commute
    #[test]
    fn mixed_partials_commute(f in arb_expr()) {
        let (u, v) = (JetVar::Time, JetVar::Deriv(0));
        let a = diff(&diff(&f, u), v);
        let b = diff(&diff(&f, v), u);
        let residual = simplify(&(a - b));
        if let Ok(verdict) = is_zero(&residual, &cfg()) {
            prop_assert!(verdict.is_zero(), "mixed partials differ for {f:?}");
        }
    }
}

/// Finite-difference oracle for the symbolic derivative.
#[test]
fn diff_matches_central_differences() {
    let exprs = [
        "y^3 - 2*t*y + 1",
        "sin(2*t) + cos(y)",
        "exp(t)*y^2",
        "t*y^(-2) + y1",
        "sqrt(y^2 + 1)",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let sb = SampleBox::default();
    for src in exprs {
        let f = parse_expr(src, 2).unwrap();
        let vars: Vec<JetVar> = f.free_vars().into_iter().collect();
        for v in &vars {
            let symbolic = diff(&f, *v);
            let mut checked = 0;
            let mut guard = 0;
            while checked < 32 && guard < 400 {
                guard += 1;
                let point: BTreeMap<JetVar, f64> =
                    vars.iter().map(|w| (*w, sb.sample(&mut rng))).collect();
                let x = point[v];
                let h = 1e-6 * x.abs().max(1.0);
                let mut hi = point.clone();
                hi.insert(*v, x + h);
                let mut lo = point.clone();
                lo.insert(*v, x - h);
                let (Ok(fh), Ok(fl), Ok(ds)) = (
                    eval_at(&f, &hi),
                    eval_at(&f, &lo),
                    eval_at(&symbolic, &point),
                ) else {
                    continue;
                };
                let numeric = (fh - fl) / (2.0 * h);
                let scale = ds.abs().max(numeric.abs()).max(1.0);
                assert!(
                    (numeric - ds).abs() <= 1e-6 * scale,
                    "{src} d/d{}: numeric {numeric} vs symbolic {ds} at {point:?}",
                    v.name()
                );
                checked += 1;
            }
            assert_eq!(checked, 32, "not enough nonsingular points for {src}");
        }
    }
}

/// Exactness round trip on random polynomial first integrals, plus factor
/// recovery after scaling by a random monomial. This is the smaller property
/// sibling of the acceptance suites.
#[test]
fn exact_roundtrip_and_factor_recovery() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut done = 0;
    while done < 8 {
        let Some(psi) = random_poly_psi(&mut rng) else {
            continue;
        };
        let coeffs = vec![
            diff(&psi, JetVar::Time),
            diff(&psi, JetVar::Deriv(0)),
            diff(&psi, JetVar::Deriv(1)),
        ];
        let Ok(ode) = make_ode(2, coeffs, &cfg()) else {
            continue;
        };
        let report = exactness_report(&ode, &cfg()).unwrap();
        assert!(report.exact, "derived equation must be exact: psi = {psi}");

        let (fi, _) = first_integral_with_fallback(&ode, None, &cfg()).unwrap();
        let a = total_derivative(&fi.psi, 2).unwrap();
        let b = total_derivative(&psi, 2).unwrap();
        assert!(
            is_zero(&simplify(&(a - b)), &cfg()).unwrap().is_zero(),
            "reconstructed psi drifts from the original"
        );

        // scale by a monomial and ask the ansatz to undo it
        let (ea, eb, ec) = (
            rng.gen_range(-2i64..=2),
            rng.gen_range(-2i64..=2),
            rng.gen_range(-2i64..=2),
        );
        if (ea, eb, ec) == (0, 0, 0) {
            continue;
        }
        let monomial = simplify(
            &(Expr::time().powi(ea) * Expr::jet(0).powi(eb) * Expr::jet(1).powi(ec)),
        );
        let Ok(scaled) = apply_factor(&ode, &monomial, &cfg()) else {
            continue;
        };
        if exactness_report(&scaled, &cfg()).unwrap().exact {
            continue;
        }
        let Ok(found) = find_mu_power_ansatz(&scaled, &AnsatzBounds::default(), &cfg()) else {
            continue;
        };
        assert!(found.certificate.exact);
        // every degenerate ratio pair in the found run kept a zero numerator,
        // which the certificate implies; check the recovered factor inverts
        // the monomial up to a constant
        let quotient = simplify(&(found.mu.clone() * monomial));
        let mut constant = true;
        for v in [JetVar::Time, JetVar::Deriv(0), JetVar::Deriv(1)] {
            if !is_zero(&diff(&quotient, v), &cfg()).unwrap().is_zero() {
                constant = false;
            }
        }
        if !constant {
            // an ambiguous family may legitimately return another member;
            // the inverse must then lie inside the family
            let info = found.ansatz.expect("ansatz info present");
            let target: Vec<exactode::Rat> = [-ea, -eb, -ec]
                .iter()
                .map(|k| exactode::Rat::from_integer((*k).into()))
                .collect();
            assert!(
                info.family_dim > 0 && info.family_contains(&target),
                "found factor is not a constant multiple of the inverse monomial \
                 and the family does not contain it"
            );
        }
        done += 1;
    }
}

fn random_poly_psi(rng: &mut ChaCha8Rng) -> Option<Expr> {
    let mut terms = Vec::new();
    for _ in 0..4 {
        let a = rng.gen_range(0u32..=2);
        let b = rng.gen_range(0u32..=2);
        let c = rng.gen_range(0u32..=1);
        let coeff = rng.gen_range(-3i64..=3);
        if coeff == 0 {
            continue;
        }
        terms.push(
            Expr::int(coeff)
                * Expr::time().powi(a as i64)
                * Expr::jet(0).powi(b as i64)
                * Expr::jet(1).powi(c as i64),
        );
    }
    // make sure y' genuinely appears so F2 is nonzero
    terms.push(Expr::jet(1) * Expr::jet(1));
    let psi = simplify(&Expr::Add(terms));
    if diff(&psi, JetVar::Deriv(1)).is_zero_literal() {
        None
    } else {
        Some(psi)
    }
}
