//! The run document: everything a pipeline invocation claims, reproducible
//! from `(input, seed)`. Rendered as human-readable text or JSON.

use crate::expr::{print_expr, Expr, ZeroVerdict};
use crate::mufind::{FactorResult, SearchAttempt};
use crate::numverify::DriftReport;
use crate::ode::{BasePoint, ConditionCheck, ExactnessReport, FirstIntegral, PsiStatus, QuasiLinearOde};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct RunDocument {
    pub command: String,
    pub seed: u64,
    pub input: InputEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exactness: Option<ExactnessSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor: Option<FactorSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_integral: Option<IntegralSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<Vec<DriftSummary>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<Vec<AttemptSummary>>,
    pub diagnostics: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorSummary>,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Serialize)]
pub struct InputEcho {
    pub path: String,
    pub canonical: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactnessSummary {
    pub exact: bool,
    pub condition_count: usize,
    pub violated_count: usize,
    pub conditions: Vec<ConditionSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionSummary {
    pub pair: String,
    pub lhs: String,
    pub rhs: String,
    pub residual: String,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorSummary {
    pub mu: String,
    pub g: String,
    pub xi: String,
    pub search_path: String,
    pub certificate_exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ansatz_exponents: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ansatz_family_dim: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegralSummary {
    pub psi: String,
    pub base_point: String,
    pub status: String,
    pub blocked: Vec<String>,
    pub reduced_equation: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DriftSummary {
    pub run: usize,
    pub psi0: f64,
    pub max_drift: f64,
    pub normalized_drift: f64,
    pub steps_used: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub early_stop: Option<String>,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AttemptSummary {
    pub branch: String,
    pub outcome: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorSummary {
    pub code: String,
    pub message: String,
}

pub fn verdict_summary(v: &ZeroVerdict) -> (String, Option<String>) {
    match v {
        ZeroVerdict::ProvenZero => ("proven-zero".into(), None),
        ZeroVerdict::ProbablyZero {
            probes,
            max_residual,
        } => (
            "probably-zero".into(),
            Some(format!("{probes} probes, max residual {max_residual:.3e}")),
        ),
        ZeroVerdict::NonZero { witness, value } => {
            let at = witness
                .iter()
                .map(|(var, x)| format!("{}={x:.4}", var.name()))
                .collect::<Vec<_>>()
                .join(", ");
            (
                "non-zero".into(),
                Some(if at.is_empty() {
                    format!("value {value:.6e}")
                } else {
                    format!("value {value:.6e} at {at}")
                }),
            )
        }
    }
}

pub fn condition_summary(c: &ConditionCheck) -> ConditionSummary {
    let (verdict, detail) = verdict_summary(&c.verdict);
    ConditionSummary {
        pair: c.pair.to_string(),
        lhs: c.lhs_label.clone(),
        rhs: c.rhs_label.clone(),
        residual: print_expr(&c.residual),
        verdict,
        detail,
    }
}

pub fn exactness_summary(r: &ExactnessReport) -> ExactnessSummary {
    ExactnessSummary {
        exact: r.exact,
        condition_count: r.conditions.len(),
        violated_count: r.violated().len(),
        conditions: r.conditions.iter().map(condition_summary).collect(),
    }
}

pub fn factor_summary(f: &FactorResult) -> FactorSummary {
    FactorSummary {
        mu: print_expr(&f.mu),
        g: format!("g(s) = {}", print_expr(&f.g)),
        xi: f.xi.describe(),
        search_path: f.path.to_string(),
        certificate_exact: f.certificate.exact,
        ansatz_exponents: f
            .ansatz
            .as_ref()
            .map(|a| a.exponents.iter().map(|e| e.to_string()).collect()),
        ansatz_family_dim: f.ansatz.as_ref().map(|a| a.family_dim),
    }
}

pub fn integral_summary(fi: &FirstIntegral, order: usize) -> IntegralSummary {
    let (status, blocked) = match &fi.status {
        PsiStatus::Closed => ("closed".to_string(), Vec::new()),
        PsiStatus::PartiallyClosed { blocked } => (
            "partially-closed".to_string(),
            blocked
                .iter()
                .map(|b| format!("F{}: {}", b.coeff_index, b.reason))
                .collect(),
        ),
    };
    IntegralSummary {
        psi: print_expr(&fi.psi),
        base_point: fi.base.label(order),
        status,
        blocked,
        reduced_equation: format!("{} = c", print_expr(&fi.psi)),
    }
}

pub fn drift_summary(run: usize, d: &DriftReport) -> DriftSummary {
    DriftSummary {
        run,
        psi0: d.psi0,
        max_drift: d.max_drift,
        normalized_drift: d.normalized_drift,
        steps_used: d.steps_used,
        early_stop: d.early_stop.as_ref().map(|s| s.to_string()),
        tol: d.tol,
        passed: d.passed,
    }
}

pub fn attempt_summaries(attempts: &[SearchAttempt]) -> Vec<AttemptSummary> {
    attempts
        .iter()
        .map(|a| AttemptSummary {
            branch: a.branch.clone(),
            outcome: a.outcome.clone(),
        })
        .collect()
}

pub fn input_echo(path: &str, ode: &QuasiLinearOde, base: Option<&BasePoint>) -> InputEcho {
    InputEcho {
        path: path.to_string(),
        canonical: crate::ode::file::canonical_ode_text(ode, base),
    }
}

/// A psi expression with no attached construction (used by `verify`).
pub fn integral_summary_for_expr(psi: &Expr, base_label: String) -> IntegralSummary {
    IntegralSummary {
        psi: print_expr(psi),
        base_point: base_label,
        status: "user-supplied".into(),
        blocked: Vec::new(),
        reduced_equation: format!("{} = c", print_expr(psi)),
    }
}

impl RunDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("== exactode {} ==\n", self.command));
        out.push_str(&format!("seed: {}\n", self.seed));
        out.push_str(&format!("input: {}\n", self.input.path));
        for line in self.input.canonical.lines() {
            out.push_str(&format!("  {line}\n"));
        }
        if let Some(ex) = &self.exactness {
            out.push_str(&format!(
                "exactness: {} ({} conditions, {} violated)\n",
                if ex.exact { "EXACT" } else { "NOT EXACT" },
                ex.condition_count,
                ex.violated_count
            ));
            for c in &ex.conditions {
                let mark = if c.verdict == "non-zero" { "x" } else { "o" };
                out.push_str(&format!(
                    "  [{mark}] {} {} = {}: residual {} [{}]",
                    c.pair, c.lhs, c.rhs, c.residual, c.verdict
                ));
                if let Some(d) = &c.detail {
                    out.push_str(&format!(" ({d})"));
                }
                out.push('\n');
            }
        }
        if let Some(search) = &self.search {
            out.push_str("search:\n");
            for a in search {
                out.push_str(&format!("  {}: {}\n", a.branch, a.outcome));
            }
        }
        if let Some(f) = &self.factor {
            out.push_str(&format!("integrating factor: mu = {}\n", f.mu));
            out.push_str(&format!("  {}\n", f.g));
            out.push_str(&format!("  {}\n", f.xi));
            out.push_str(&format!("  search path: {}\n", f.search_path));
            out.push_str(&format!(
                "  certificate: scaled equation exact = {}\n",
                f.certificate_exact
            ));
            if let Some(e) = &f.ansatz_exponents {
                out.push_str(&format!("  ansatz exponents: [{}]\n", e.join(", ")));
            }
            if let Some(d) = &f.ansatz_family_dim {
                if *d > 0 {
                    out.push_str(&format!("  ansatz family dimension: {d}\n"));
                }
            }
        }
        if let Some(fi) = &self.first_integral {
            out.push_str(&format!("first integral: {}\n", fi.reduced_equation));
            out.push_str(&format!("  base point: {}\n", fi.base_point));
            out.push_str(&format!("  status: {}\n", fi.status));
            for b in &fi.blocked {
                out.push_str(&format!("  blocked: {b}\n"));
            }
        }
        if let Some(runs) = &self.verification {
            out.push_str("verification:\n");
            for d in runs {
                out.push_str(&format!(
                    "  run {}: psi0 {:.6e}, max drift {:.3e}, normalized {:.3e}, steps {}, {}\n",
                    d.run,
                    d.psi0,
                    d.max_drift,
                    d.normalized_drift,
                    d.steps_used,
                    if d.passed { "PASS" } else { "FAIL" }
                ));
                if let Some(e) = &d.early_stop {
                    out.push_str(&format!("    early stop: {e}\n"));
                }
            }
        }
        for d in &self.diagnostics {
            out.push_str(&format!("note: {d}\n"));
        }
        if let Some(e) = &self.error {
            out.push_str(&format!("error[{}]: {}\n", e.code, e.message));
        }
        out.push_str(&format!("exit: {}\n", self.exit_code));
        out
    }
}
