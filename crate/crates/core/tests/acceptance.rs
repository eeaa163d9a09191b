//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers. Run with `cargo test --test acceptance -- --nocapture`
//! to see every line.

use exactode::calculus::total_derivative;
use exactode::expr::{
    diff, is_zero, parse_expr, simplify, Expr, FunKind, JetVar, ProbeConfig,
};
use exactode::mufind::{find_mu_power_ansatz, AnsatzBounds};
use exactode::numverify::{h_refinement_check, State};
use exactode::ode::{
    apply_factor, exactness_report, first_integral_with_fallback, make_ode, split_equation,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

fn cfg() -> ProbeConfig {
    ProbeConfig::default() // 32 probes, tol 1e-9, box 0.1..2 sign-split
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .display()
        .to_string()
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_exactode"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

/// Difference is a constant: every jet partial passes the zero test at the
/// default 32 probes / 1e-9 tolerance.
fn constant_difference(a: &Expr, b: &Expr, vars: &[JetVar]) -> bool {
    let difference = simplify(&(a.clone() - b.clone()));
    vars.iter().all(|v| {
        is_zero(&diff(&difference, *v), &cfg())
            .map(|z| z.is_zero())
            .unwrap_or(false)
    })
}

#[test]
fn criterion_1_third_order_example_end_to_end() {
    let started = Instant::now();
    let (code, out) = run_cli(&["reduce", &fixture("example2.ode"), "--verify", "--json"]);
    let elapsed = started.elapsed();
    assert_eq!(code, 0, "reduce failed:\n{out}");
    let doc: serde_json::Value = serde_json::from_str(&out).expect("json document");

    // non-exactness with exactly three violated conditions
    assert_eq!(doc["exactness"]["exact"], false);
    assert_eq!(doc["exactness"]["violated_count"], 3);

    // mu = y^(-3) exactly after canonicalization
    let mu = parse_expr(doc["factor"]["mu"].as_str().unwrap(), 2).unwrap();
    assert_eq!(mu, parse_expr("y^(-3)", 2).unwrap());

    // psi differs from y'' + y' + t y^-2 by a constant
    let psi = parse_expr(doc["first_integral"]["psi"].as_str().unwrap(), 2).unwrap();
    let reference = parse_expr("y2 + y1 + t*y^(-2)", 2).unwrap();
    let jet = [
        JetVar::Time,
        JetVar::Deriv(0),
        JetVar::Deriv(1),
        JetVar::Deriv(2),
    ];
    assert!(
        constant_difference(&psi, &reference, &jet),
        "psi is not within a constant of the reference integral"
    );

    // five trajectories, normalized drift <= 1e-6 each
    let runs = doc["verification"].as_array().unwrap();
    assert_eq!(runs.len(), 5);
    let mut worst = 0.0f64;
    for r in runs {
        assert_eq!(r["passed"], true);
        let d = r["normalized_drift"].as_f64().unwrap();
        assert!(d <= 1e-6, "drift {d}");
        worst = worst.max(d);
    }

    assert!(
        elapsed <= Duration::from_secs(5),
        "runtime {elapsed:?} exceeds 5 s"
    );
    println!(
        "ACCEPTANCE 1 PASS: example2 end-to-end; mu = y^(-3), 3 violations, worst drift {worst:.3e}, {elapsed:?}"
    );
}

#[test]
fn criterion_2_linear_instance() {
    let started = Instant::now();

    // time-shape search through the CLI
    let (code, out) = run_cli(&["find-mu", &fixture("linear_example1.ode"), "--xi", "t", "--json"]);
    assert_eq!(code, 0, "{out}");
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    let mu_time = parse_expr(doc["factor"]["mu"].as_str().unwrap(), 1).unwrap();

    // power ansatz through the library
    let ode = split_equation(
        &parse_expr("t*y2 + t^2*y1 + t*y - t", 2).unwrap(),
        2,
        &cfg(),
    )
    .unwrap();
    let ansatz = find_mu_power_ansatz(&ode, &AnsatzBounds::default(), &cfg()).unwrap();

    // both factors equal 1/t up to a constant multiple
    let reference = parse_expr("t^(-1)", 0).unwrap();
    let jet = [JetVar::Time, JetVar::Deriv(0), JetVar::Deriv(1)];
    for (label, mu) in [("time", &mu_time), ("ansatz", &ansatz.mu)] {
        let quotient = simplify(&(mu.clone() / reference.clone()));
        for v in jet {
            assert!(
                is_zero(&diff(&quotient, v), &cfg()).unwrap().is_zero(),
                "{label} factor is not proportional to 1/t: {mu}"
            );
        }
    }

    // reduction gives y' + t y - t = c
    let (code, out) = run_cli(&["reduce", &fixture("linear_example1.ode"), "--verify", "--json"]);
    assert_eq!(code, 0, "{out}");
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    let psi = parse_expr(doc["first_integral"]["psi"].as_str().unwrap(), 1).unwrap();
    let reference = parse_expr("y1 + t*y - t", 1).unwrap();
    assert!(
        constant_difference(&psi, &reference, &jet),
        "psi {psi} is not y' + t y - t up to a constant"
    );
    let runs = doc["verification"].as_array().unwrap();
    assert_eq!(runs.len(), 5);
    for r in runs {
        assert!(r["normalized_drift"].as_f64().unwrap() <= 1e-6);
        assert_eq!(r["passed"], true);
    }

    let elapsed = started.elapsed();
    assert!(elapsed <= Duration::from_secs(5), "runtime {elapsed:?}");
    println!("ACCEPTANCE 2 PASS: linear instance; mu = 1/t via both routes, psi = y' + t*y - t, {elapsed:?}");
}

fn random_polynomial_psi(rng: &mut ChaCha8Rng) -> Expr {
    // degree <= 3 over {t, y, y'}, coefficients in -3..=3, with y' present
    loop {
        let mut terms = Vec::new();
        for a in 0..=3u32 {
            for b in 0..=(3 - a) {
                for c in 0..=(3 - a - b) {
                    if rng.gen_range(0..4) != 0 {
                        continue; // sparse
                    }
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
            }
        }
        let psi = simplify(&Expr::Add(terms));
        if !diff(&psi, JetVar::Deriv(1)).is_zero_literal() {
            return psi;
        }
    }
}

#[test]
fn criterion_3_exact_roundtrip_50_cases() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    let mut done = 0;
    while done < 50 {
        let psi = random_polynomial_psi(&mut rng);
        let coeffs = vec![
            diff(&psi, JetVar::Time),
            diff(&psi, JetVar::Deriv(0)),
            diff(&psi, JetVar::Deriv(1)),
        ];
        let Ok(ode) = make_ode(2, coeffs, &cfg()) else {
            continue; // F2 flagged as zero-ish; redraw
        };
        let report = exactness_report(&ode, &cfg()).unwrap();
        assert!(report.exact, "equation derived from psi = {psi} not exact");
        let (fi, _) = first_integral_with_fallback(&ode, None, &cfg()).unwrap();
        assert!(fi.is_closed(), "psi = {psi} did not close");
        let a = total_derivative(&fi.psi, 2).unwrap();
        let b = total_derivative(&psi, 2).unwrap();
        assert!(
            is_zero(&simplify(&(a - b)), &cfg()).unwrap().is_zero(),
            "total derivatives differ for psi = {psi}"
        );
        done += 1;
    }
    let elapsed = started.elapsed();
    assert!(elapsed <= Duration::from_secs(60), "runtime {elapsed:?}");
    println!("ACCEPTANCE 3 PASS: 50 exact round trips, {elapsed:?}");
}

#[test]
fn criterion_4_factor_recovery_25_cases() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(401);
    let jet = [JetVar::Time, JetVar::Deriv(0), JetVar::Deriv(1)];
    let mut done = 0;
    while done < 25 {
        let psi = random_polynomial_psi(&mut rng);
        let coeffs = vec![
            diff(&psi, JetVar::Time),
            diff(&psi, JetVar::Deriv(0)),
            diff(&psi, JetVar::Deriv(1)),
        ];
        let Ok(ode) = make_ode(2, coeffs, &cfg()) else {
            continue;
        };
        let (a, b, c) = (
            rng.gen_range(-3i64..=3),
            rng.gen_range(-3i64..=3),
            rng.gen_range(-3i64..=3),
        );
        if (a, b, c) == (0, 0, 0) {
            continue;
        }
        let monomial = simplify(
            &(Expr::time().powi(a) * Expr::jet(0).powi(b) * Expr::jet(1).powi(c)),
        );
        let Ok(scaled) = apply_factor(&ode, &monomial, &cfg()) else {
            continue;
        };
        if exactness_report(&scaled, &cfg()).unwrap().exact {
            continue; // scaling accidentally kept it exact; redraw
        }
        let found = find_mu_power_ansatz(&scaled, &AnsatzBounds::default(), &cfg())
            .unwrap_or_else(|e| panic!("recovery failed for psi = {psi}, m = {monomial}: {e}"));
        assert!(found.certificate.exact, "certificate must pass");
        let quotient = simplify(&(found.mu.clone() * monomial.clone()));
        let proportional = jet.iter().all(|v| {
            is_zero(&diff(&quotient, *v), &cfg())
                .map(|z| z.is_zero())
                .unwrap_or(false)
        });
        if !proportional {
            let info = found.ansatz.expect("ansatz info");
            let target: Vec<exactode::Rat> = [-a, -b, -c]
                .iter()
                .map(|k| exactode::Rat::from_integer((*k).into()))
                .collect();
            assert!(
                info.family_dim > 0 && info.family_contains(&target),
                "recovered factor misses the inverse monomial for psi = {psi}, m = {monomial}"
            );
        }
        done += 1;
    }
    let elapsed = started.elapsed();
    assert!(elapsed <= Duration::from_secs(60), "runtime {elapsed:?}");
    println!("ACCEPTANCE 4 PASS: 25 monomial factors recovered, {elapsed:?}");
}

#[test]
fn criterion_5_integration_oracle_50_cases() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(501);
    let v = JetVar::Time;
    let mut done = 0;
    while done < 50 {
        let f = random_integrand(&mut rng);
        let result = exactode::calculus::integrate_uni(&f, v);
        let exactode::calculus::IntegralResult::Closed(anti) = result else {
            panic!("generator produced an unsupported integrand: {f}");
        };
        let residual = simplify(&(diff(&anti, v) - f.clone()));
        match is_zero(&residual, &cfg()) {
            Ok(z) => assert!(z.is_zero(), "differentiate-back failed for {f}: got {anti}"),
            Err(_) => continue, // inconclusive domain (poles everywhere); redraw
        }
        done += 1;
    }
    let elapsed = started.elapsed();
    assert!(elapsed <= Duration::from_secs(60), "runtime {elapsed:?}");
    println!("ACCEPTANCE 5 PASS: 50 integrands differentiate back, {elapsed:?}");
}

fn random_integrand(rng: &mut ChaCha8Rng) -> Expr {
    let t = Expr::time;
    match rng.gen_range(0..5) {
        // polynomial
        0 => {
            let mut terms = Vec::new();
            for k in 0..=4i64 {
                let c = rng.gen_range(-4i64..=4);
                if c != 0 {
                    terms.push(Expr::int(c) * t().powi(k));
                }
            }
            terms.push(Expr::one());
            simplify(&Expr::Add(terms))
        }
        // power t^p, p != -1
        1 => {
            let p = *[-4, -3, -2, 2, 3, 5, 7].get(rng.gen_range(0..7)).unwrap();
            simplify(&(Expr::int(rng.gen_range(1..=3)) * t().powi(p)))
        }
        // trig/exp of a linear argument
        2 => {
            let a = rng.gen_range(1i64..=3);
            let b = rng.gen_range(-2i64..=2);
            let arg = simplify(&(Expr::int(a) * t() + Expr::int(b)));
            let kind = [FunKind::Exp, FunKind::Sin, FunKind::Cos][rng.gen_range(0..3)];
            Expr::fun(kind, arg)
        }
        // rational with a denominator splitting over the rationals
        3 => {
            let roots = [-2i64, -1, 1, 2];
            let r1 = roots[rng.gen_range(0..4)];
            let mut r2 = roots[rng.gen_range(0..4)];
            if r2 == r1 && rng.gen_bool(0.5) {
                r2 = -r1;
            }
            let num_deg = rng.gen_range(0..=1);
            let num = if num_deg == 0 {
                Expr::int(rng.gen_range(1..=3))
            } else {
                simplify(&(t() + Expr::int(rng.gen_range(-2i64..=2))))
            };
            let den = simplify(
                &((t() - Expr::int(r1)) * (t() - Expr::int(r2))),
            );
            simplify(&(num / den))
        }
        // shifted power (a t + b)^p
        _ => {
            let a = rng.gen_range(1i64..=3);
            let b = rng.gen_range(1i64..=3);
            let p = *[-3, -2, -1, 2, 4].get(rng.gen_range(0..5)).unwrap();
            let base = simplify(&(Expr::int(a) * t() + Expr::int(b)));
            simplify(&Expr::pow(base, Expr::int(p)))
        }
    }
}

#[test]
fn criterion_6_rk4_order_audit() {
    let started = Instant::now();

    // harmonic oscillator with psi = y^2 + (y')^2
    let sine = make_ode(
        2,
        vec![parse_expr("y", 0).unwrap(), Expr::zero(), Expr::one()],
        &cfg(),
    )
    .unwrap();
    let energy = parse_expr("y^2 + y1^2", 2).unwrap();
    let init = State::new(0.0, vec![0.0, 1.0]);
    let ratio_sine =
        h_refinement_check(&sine, &energy, &init, std::f64::consts::PI, 0.05).unwrap();
    assert!(
        (8.0..=32.0).contains(&ratio_sine),
        "oscillator ratio {ratio_sine}"
    );

    // scaled third-order example, h = 2e-3 vs 1e-3
    let e2 = split_equation(
        &parse_expr("y^3*y3 + y^3*y2 - 2*t*y1 + y", 3).unwrap(),
        3,
        &cfg(),
    )
    .unwrap();
    let psi = parse_expr("y2 + y1 + t*y^(-2)", 2).unwrap();
    let init = State::new(0.0, vec![1.0, 1.0, 1.0]);
    let ratio_e2 = h_refinement_check(&e2, &psi, &init, 0.5, 2e-3).unwrap();
    assert!((8.0..=32.0).contains(&ratio_e2), "example2 ratio {ratio_e2}");

    let elapsed = started.elapsed();
    println!(
        "ACCEPTANCE 6 PASS: refinement ratios oscillator {ratio_sine:.2}, example2 {ratio_e2:.2}, {elapsed:?}"
    );
}

#[test]
fn criterion_7_negative_controls() {
    // time-shape factor rejected with the named error
    let (code, out) = run_cli(&["find-mu", &fixture("example2.ode"), "--xi", "t"]);
    assert_eq!(code, 4, "{out}");
    assert!(out.contains("CrossConditionsFail"), "{out}");

    // squared top derivative rejected as not quasi-linear
    let (code, out) = run_cli(&["check", &fixture("notquasilinear.ode")]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("NotQuasiLinear"), "{out}");

    // psi = y is not a first integral of the oscillator
    let (code, out) = run_cli(&[
        "verify",
        &fixture("oscillator.ode"),
        "--psi",
        "y",
        "--span",
        "3.141592653589793",
        "--json",
    ]);
    assert_eq!(code, 5, "{out}");
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    let drift = doc["verification"][0]["max_drift"].as_f64().unwrap();
    assert!(drift > 0.1, "drift {drift} should exceed 0.1");
    assert_eq!(doc["verification"][0]["passed"], false);

    println!("ACCEPTANCE 7 PASS: negative controls (exit 4 CrossConditionsFail, exit 1 NotQuasiLinear, drift {drift:.3})");
}
