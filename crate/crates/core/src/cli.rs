//! Command-line front end: parse, exactness check, factor search, order
//! reduction, and numeric verification with machine-readable output.

use crate::expr::{parse_expr, ProbeConfig, SampleBox};
use crate::mufind::{
    find_mu_given_xi, find_mu_jet, find_mu_time, search_auto, AnsatzBounds, FactorResult,
    MuError, XiSpec,
};
use crate::numverify::{
    check_first_integral, rk4_trajectory, trajectory_csv, verify_protocol, State, VerifyProtocol,
};
use crate::ode::file::{parse_base_line, parse_ode_file, OdeFile, OdeFileError};
use crate::ode::{exactness_report, reduce_order, OdeError, QuasiLinearOde};
use crate::report::*;
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(
    name = "exactode",
    version,
    about = "Exactness, integrating factors, and first integrals for quasi-linear ODEs"
)]
pub struct Cli {
    /// Emit the run document as JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for all randomized probing.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of probe points per zero test.
    #[arg(long, global = true, default_value_t = 32)]
    pub probes: usize,
    /// Relative tolerance for zero tests.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Probe box magnitudes LO:HI (samples get a random sign).
    #[arg(long = "box", global = true, default_value = "0.1:2", value_name = "LO:HI")]
    pub sample_box: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide exactness and list every pairwise condition.
    Check { input: PathBuf },
    /// Search for an integrating factor.
    FindMu {
        input: PathBuf,
        /// Factor argument: auto, t, y, y1, ..., or `expr:<text>`.
        #[arg(long, default_value = "auto")]
        xi: String,
        /// Magnitude bound for power-ansatz exponents.
        #[arg(long = "ansatz-bounds", default_value_t = 12)]
        ansatz_bounds: i64,
    },
    /// Full pipeline: exactness, factor search if needed, first integral.
    Reduce {
        input: PathBuf,
        /// Base point override, e.g. "t0=0, y0=1, y10=0".
        #[arg(long)]
        base: Option<String>,
        /// Integrate five random trajectories and drift-check the integral.
        #[arg(long)]
        verify: bool,
        /// Write each verification trajectory as CSV to `PREFIX<i>.csv`.
        #[arg(long = "dump-csv", value_name = "PREFIX")]
        dump_csv: Option<String>,
    },
    /// Drift-check a user-supplied first integral along one trajectory.
    Verify {
        input: PathBuf,
        /// Candidate first integral over t, y, ..., y^(n-1).
        #[arg(long)]
        psi: String,
        /// Initial state, e.g. "t0=0, y0=0, y10=1" (defaults to the file's base).
        #[arg(long)]
        base: Option<String>,
        #[arg(long, default_value_t = 0.5)]
        span: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long = "drift-tol", default_value_t = 1e-6)]
        drift_tol: f64,
        /// Write the trajectory as CSV to this path.
        #[arg(long = "dump-csv", value_name = "PATH")]
        dump_csv: Option<String>,
    },
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    let (doc, json) = execute(cli);
    if json {
        print!("{}", doc.to_json());
    } else {
        print!("{}", doc.to_text());
    }
    doc.exit_code
}

fn parse_box(text: &str) -> Result<SampleBox, String> {
    let Some((lo, hi)) = text.split_once(':') else {
        return Err(format!("--box expects LO:HI, got '{text}'"));
    };
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad box bound '{lo}'"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad box bound '{hi}'"))?;
    if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
        return Err(format!("--box needs 0 < LO < HI, got {lo}:{hi}"));
    }
    Ok(SampleBox { lo, hi })
}

fn execute(cli: Cli) -> (RunDocument, bool) {
    let json = cli.json;
    let sample_box = match parse_box(&cli.sample_box) {
        Ok(b) => b,
        Err(message) => {
            return (
                error_doc("options", cli.seed, "BadFlag", message),
                json,
            )
        }
    };
    let cfg = ProbeConfig {
        // zero probes would accept everything as probably-zero
        probes: cli.probes.max(1),
        tol: cli.tol,
        sample_box,
        seed: cli.seed,
    };
    let doc = match cli.command {
        Command::Check { input } => cmd_check(&input, &cfg),
        Command::FindMu {
            input,
            xi,
            ansatz_bounds,
        } => cmd_find_mu(&input, &xi, ansatz_bounds, &cfg),
        Command::Reduce {
            input,
            base,
            verify,
            dump_csv,
        } => cmd_reduce(&input, base.as_deref(), verify, dump_csv.as_deref(), &cfg),
        Command::Verify {
            input,
            psi,
            base,
            span,
            step,
            drift_tol,
            dump_csv,
        } => cmd_verify(
            &input,
            &psi,
            base.as_deref(),
            span,
            step,
            drift_tol,
            dump_csv.as_deref(),
            &cfg,
        ),
    };
    (doc, json)
}

fn error_doc(command: &str, seed: u64, code: &str, message: String) -> RunDocument {
    RunDocument {
        command: command.into(),
        seed,
        input: InputEcho {
            path: String::new(),
            canonical: String::new(),
        },
        exactness: None,
        factor: None,
        first_integral: None,
        verification: None,
        search: None,
        diagnostics: Vec::new(),
        error: Some(ErrorSummary {
            code: code.into(),
            message,
        }),
        exit_code: 1,
    }
}

/// Blank document carrying only the command name, seed, and input echo.
pub fn blank_doc(command: &str, seed: u64, input: InputEcho) -> RunDocument {
    RunDocument {
        command: command.into(),
        seed,
        input,
        exactness: None,
        factor: None,
        first_integral: None,
        verification: None,
        search: None,
        diagnostics: Vec::new(),
        error: None,
        exit_code: 0,
    }
}

fn ode_error_code(e: &OdeError) -> &'static str {
    match e {
        OdeError::WrongArity { .. } => "WrongArity",
        OdeError::HighestCoeffZero(_) => "HighestCoeffZero",
        OdeError::VariableOutOfRange { .. } => "VariableOutOfRange",
        OdeError::NotQuasiLinear { .. } => "NotQuasiLinear",
        OdeError::NotExact { .. } => "NotExact",
        OdeError::BasePointSingular { .. } => "BasePointSingular",
        OdeError::BasePointExhausted { .. } => "BasePointExhausted",
        OdeError::ZeroFactor => "ZeroFactor",
        OdeError::Inconclusive(_) => "InconclusiveDomain",
    }
}

fn mu_error_code(e: &MuError) -> &'static str {
    match e {
        MuError::DegenerateInconsistent { .. } => "DegenerateInconsistent",
        MuError::RatiosDisagree { .. } => "RatiosDisagree",
        MuError::NotFunctionOfXi { .. } => "NotFunctionOfXi",
        MuError::RewriteFailed { .. } => "RewriteFailed",
        MuError::IntegrationUnsupported { .. } => "IntegrationUnsupported",
        MuError::CertificateFailed { .. } => "CertificateFailed",
        MuError::CrossConditionsFail { .. } => "CrossConditionsFail",
        MuError::NoSolution { .. } => "NoSolution",
        MuError::ConditionFailed { .. } => "ConditionFailed",
        MuError::InvalidXi { .. } => "InvalidXi",
        MuError::Ode(o) => ode_error_code(o),
    }
}

fn file_error_doc(command: &str, path: &Path, seed: u64, e: &OdeFileError) -> RunDocument {
    let code = match e {
        OdeFileError::Malformed { .. } => "MalformedFile",
        OdeFileError::BadExpr { .. } => "ParseError",
        OdeFileError::Model(m) => ode_error_code(m),
    };
    let mut doc = error_doc(command, seed, code, e.to_string());
    doc.input.path = path.display().to_string();
    doc
}

fn load(
    command: &str,
    path: &Path,
    cfg: &ProbeConfig,
) -> Result<(OdeFile, RunDocument), Box<RunDocument>> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            let mut doc = error_doc(command, cfg.seed, "Io", format!("{}: {e}", path.display()));
            doc.input.path = path.display().to_string();
            return Err(Box::new(doc));
        }
    };
    match parse_ode_file(&text, cfg) {
        Ok(file) => {
            let echo = input_echo(
                &path.display().to_string(),
                &file.ode,
                file.base.as_ref(),
            );
            let doc = blank_doc(command, cfg.seed, echo);
            Ok((file, doc))
        }
        Err(e) => Err(Box::new(file_error_doc(command, path, cfg.seed, &e))),
    }
}

fn cmd_check(input: &Path, cfg: &ProbeConfig) -> RunDocument {
    let (file, doc) = match load("check", input, cfg) {
        Ok(v) => v,
        Err(d) => return *d,
    };
    check_document(doc, &file, cfg)
}

/// Exactness-only document. `doc` must be a blank document carrying the
/// input echo.
pub fn check_document(mut doc: RunDocument, file: &OdeFile, cfg: &ProbeConfig) -> RunDocument {
    let report = match exactness_report(&file.ode, cfg) {
        Ok(r) => r,
        Err(e) => {
            doc.error = Some(ErrorSummary {
                code: ode_error_code(&e).into(),
                message: e.to_string(),
            });
            doc.exit_code = 1;
            return doc;
        }
    };
    doc.diagnostics.push(report.count_note.clone());
    doc.exactness = Some(exactness_summary(&report));
    doc.exit_code = if report.exact { 0 } else { 3 };
    doc
}

enum XiChoice {
    Auto,
    Time,
    Jet(usize),
    Text(String),
}

fn parse_xi_flag(s: &str, order: usize) -> Result<XiChoice, String> {
    match s {
        "auto" => Ok(XiChoice::Auto),
        "t" => Ok(XiChoice::Time),
        "y" => Ok(XiChoice::Jet(1)),
        _ => {
            if let Some(text) = s.strip_prefix("expr:") {
                return Ok(XiChoice::Text(text.to_string()));
            }
            if let Some(k) = s.strip_prefix('y').and_then(|r| r.parse::<usize>().ok()) {
                if k < order {
                    return Ok(XiChoice::Jet(k + 1));
                }
                return Err(format!("y{k} is outside the jet for order {order}"));
            }
            Err(format!(
                "--xi expects auto, t, y, y1, ..., or expr:<text>; got '{s}'"
            ))
        }
    }
}

fn cmd_find_mu(input: &Path, xi: &str, ansatz_bounds: i64, cfg: &ProbeConfig) -> RunDocument {
    let (file, doc) = match load("find-mu", input, cfg) {
        Ok(v) => v,
        Err(d) => return *d,
    };
    find_mu_document(doc, &file, xi, ansatz_bounds, cfg)
}

/// Factor-search document for the given xi flag value.
pub fn find_mu_document(
    mut doc: RunDocument,
    file: &OdeFile,
    xi: &str,
    ansatz_bounds: i64,
    cfg: &ProbeConfig,
) -> RunDocument {
    let ode = &file.ode;
    match exactness_report(ode, cfg) {
        Ok(r) => {
            doc.diagnostics.push(r.count_note.clone());
            doc.exactness = Some(exactness_summary(&r));
        }
        Err(e) => {
            doc.error = Some(ErrorSummary {
                code: ode_error_code(&e).into(),
                message: e.to_string(),
            });
            doc.exit_code = 1;
            return doc;
        }
    }
    let choice = match parse_xi_flag(xi, ode.order()) {
        Ok(c) => c,
        Err(message) => {
            doc.error = Some(ErrorSummary {
                code: "BadFlag".into(),
                message,
            });
            doc.exit_code = 1;
            return doc;
        }
    };
    let bounds = AnsatzBounds {
        max_abs: ansatz_bounds,
    };
    let outcome: Result<FactorResult, MuError> = match choice {
        XiChoice::Auto => match search_auto(ode, &bounds, cfg) {
            Ok(outcome) => {
                doc.search = Some(attempt_summaries(&outcome.attempts));
                match outcome.result {
                    Some(res) => Ok(res),
                    None => {
                        doc.error = Some(ErrorSummary {
                            code: "NoCandidateCertified".into(),
                            message: "no candidate factor shape certified; see search attempts"
                                .into(),
                        });
                        doc.exit_code = 4;
                        return doc;
                    }
                }
            }
            Err(e) => {
                doc.error = Some(ErrorSummary {
                    code: ode_error_code(&e).into(),
                    message: e.to_string(),
                });
                doc.exit_code = 1;
                return doc;
            }
        },
        XiChoice::Time => find_mu_time(ode, cfg),
        XiChoice::Jet(k) => find_mu_jet(ode, k, cfg),
        XiChoice::Text(text) => parse_expr(&text, ode.order().saturating_sub(1) as u32)
            .map_err(|e| MuError::InvalidXi {
                reason: e.to_string(),
            })
            .and_then(|e| XiSpec::from_expr(&e, ode.order()))
            .and_then(|spec| find_mu_given_xi(ode, spec, cfg)),
    };
    match outcome {
        Ok(res) => {
            doc.factor = Some(factor_summary(&res));
            doc.exit_code = 0;
        }
        Err(e) => {
            let code = mu_error_code(&e);
            let hard = matches!(&e, MuError::Ode(o) if !matches!(o, OdeError::NotExact { .. }));
            doc.error = Some(ErrorSummary {
                code: code.into(),
                message: e.to_string(),
            });
            doc.exit_code = if hard { 1 } else { 4 };
        }
    }
    doc
}

fn cmd_reduce(
    input: &Path,
    base_flag: Option<&str>,
    verify: bool,
    dump_csv: Option<&str>,
    cfg: &ProbeConfig,
) -> RunDocument {
    let (file, mut doc) = match load("reduce", input, cfg) {
        Ok(v) => v,
        Err(d) => return *d,
    };
    let base = match base_flag {
        Some(text) => match parse_base_line(text, 0) {
            Ok(b) => Some(b),
            Err(e) => {
                doc.error = Some(ErrorSummary {
                    code: "BadFlag".into(),
                    message: format!("--base: {e}"),
                });
                doc.exit_code = 1;
                return doc;
            }
        },
        None => file.base.clone(),
    };
    reduce_document(doc, &file, base, verify, dump_csv, cfg)
}

/// Full-pipeline document: exactness, factor search when needed, first
/// integral, optional trajectory verification.
pub fn reduce_document(
    mut doc: RunDocument,
    file: &OdeFile,
    base: Option<crate::ode::BasePoint>,
    verify: bool,
    dump_csv: Option<&str>,
    cfg: &ProbeConfig,
) -> RunDocument {
    let ode = &file.ode;
    let report = match exactness_report(ode, cfg) {
        Ok(r) => r,
        Err(e) => {
            doc.error = Some(ErrorSummary {
                code: ode_error_code(&e).into(),
                message: e.to_string(),
            });
            doc.exit_code = 1;
            return doc;
        }
    };
    doc.diagnostics.push(report.count_note.clone());
    doc.exactness = Some(exactness_summary(&report));

    let mu: Option<crate::expr::Expr> = if report.exact {
        None
    } else {
        match search_auto(ode, &AnsatzBounds::default(), cfg) {
            Ok(outcome) => {
                doc.search = Some(attempt_summaries(&outcome.attempts));
                match outcome.result {
                    Some(res) => {
                        let mu = res.mu.clone();
                        doc.factor = Some(factor_summary(&res));
                        Some(mu)
                    }
                    None => {
                        doc.error = Some(ErrorSummary {
                            code: "NoCandidateCertified".into(),
                            message:
                                "equation is not exact and no factor shape certified; see search"
                                    .into(),
                        });
                        doc.exit_code = 4;
                        return doc;
                    }
                }
            }
            Err(e) => {
                doc.error = Some(ErrorSummary {
                    code: ode_error_code(&e).into(),
                    message: e.to_string(),
                });
                doc.exit_code = 1;
                return doc;
            }
        }
    };

    let reduction = match reduce_order(ode, mu.as_ref(), base, cfg) {
        Ok(r) => r,
        Err(e) => {
            doc.error = Some(ErrorSummary {
                code: ode_error_code(&e).into(),
                message: e.to_string(),
            });
            doc.exit_code = 1;
            return doc;
        }
    };
    for note in &reduction.base_notes {
        doc.diagnostics.push(note.clone());
    }
    doc.first_integral = Some(integral_summary(&reduction.integral, ode.order()));
    if !reduction.integral.is_closed() {
        doc.diagnostics
            .push("first integral is only partially closed; verification skipped".into());
        doc.exit_code = 4;
        return doc;
    }

    if verify {
        let proto = VerifyProtocol::default();
        match verify_protocol(ode, &reduction.integral.psi, &proto, cfg) {
            Ok(reports) => {
                if let Some(prefix) = dump_csv {
                    dump_protocol_csvs(prefix, ode, &reduction.integral.psi, &proto, cfg, &mut doc);
                }
                let all_pass = reports.iter().all(|r| r.passed);
                doc.verification = Some(
                    reports
                        .iter()
                        .enumerate()
                        .map(|(i, r)| drift_summary(i, r))
                        .collect(),
                );
                doc.exit_code = if all_pass { 0 } else { 5 };
            }
            Err(e) => {
                doc.error = Some(ErrorSummary {
                    code: "Verification".into(),
                    message: e.to_string(),
                });
                doc.exit_code = 5;
            }
        }
    }
    doc
}

fn dump_protocol_csvs(
    prefix: &str,
    ode: &QuasiLinearOde,
    psi: &crate::expr::Expr,
    proto: &VerifyProtocol,
    cfg: &ProbeConfig,
    doc: &mut RunDocument,
) {
    // re-run the same deterministic sampling to dump the accepted trajectories
    use crate::expr::{sample_point, JetVar};
    use rand_chacha::rand_core::SeedableRng;
    let vars = crate::ode::coordinates(ode.order());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5bd1_e995);
    let mut written = 0;
    let mut attempts = 0;
    while written < proto.runs && attempts < proto.runs * 40 {
        attempts += 1;
        let point = sample_point(&vars, &cfg.sample_box, &mut rng);
        let t0 = point[&JetVar::Time];
        let jets: Vec<f64> = (0..ode.order())
            .map(|k| point[&JetVar::Deriv(k as u32)])
            .collect();
        let init = State::new(t0, jets);
        let Ok(traj) = rk4_trajectory(ode, &init, proto.span, proto.h) else {
            continue;
        };
        if traj.early_stop.is_some() || traj.covered() < proto.span * 0.999 {
            continue;
        }
        let path = format!("{prefix}{written}.csv");
        let csv = trajectory_csv(&traj, Some(psi), ode.order());
        match std::fs::write(&path, csv) {
            Ok(()) => doc.diagnostics.push(format!("wrote {path}")),
            Err(e) => doc.diagnostics.push(format!("could not write {path}: {e}")),
        }
        written += 1;
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    input: &Path,
    psi_text: &str,
    base_flag: Option<&str>,
    span: f64,
    step: f64,
    drift_tol: f64,
    dump_csv: Option<&str>,
    cfg: &ProbeConfig,
) -> RunDocument {
    let (file, mut doc) = match load("verify", input, cfg) {
        Ok(v) => v,
        Err(d) => return *d,
    };
    let base = match base_flag {
        Some(text) => match parse_base_line(text, 0) {
            Ok(b) => Some(b),
            Err(e) => {
                doc.error = Some(ErrorSummary {
                    code: "BadFlag".into(),
                    message: format!("--base: {e}"),
                });
                doc.exit_code = 1;
                return doc;
            }
        },
        None => None,
    };
    verify_document(doc, &file, psi_text, base, span, step, drift_tol, dump_csv, cfg)
}

/// Drift-check document for a user-supplied first integral.
#[allow(clippy::too_many_arguments)]
pub fn verify_document(
    mut doc: RunDocument,
    file: &OdeFile,
    psi_text: &str,
    base_override: Option<crate::ode::BasePoint>,
    span: f64,
    step: f64,
    drift_tol: f64,
    dump_csv: Option<&str>,
    _cfg: &ProbeConfig,
) -> RunDocument {
    let ode = &file.ode;
    if !(span > 0.0 && span.is_finite() && step > 0.0 && step.is_finite()) {
        doc.error = Some(ErrorSummary {
            code: "BadFlag".into(),
            message: format!("--span {span} and --step {step} must be finite and positive"),
        });
        doc.exit_code = 1;
        return doc;
    }
    let psi = match parse_expr(psi_text, ode.order().saturating_sub(1) as u32) {
        Ok(p) => p,
        Err(e) => {
            doc.error = Some(ErrorSummary {
                code: "ParseError".into(),
                message: format!("--psi: {e}"),
            });
            doc.exit_code = 1;
            return doc;
        }
    };
    let base = match base_override.or_else(|| file.base.clone()) {
        Some(b) => b,
        None => {
            doc.error = Some(ErrorSummary {
                code: "MissingBase".into(),
                message: "verify needs an initial state: give --base or a base: line".into(),
            });
            doc.exit_code = 1;
            return doc;
        }
    };
    let point = base.to_f64(ode.order());
    let t0 = point[&crate::expr::JetVar::Time];
    let jets: Vec<f64> = (0..ode.order())
        .map(|k| point[&crate::expr::JetVar::Deriv(k as u32)])
        .collect();
    let init = State::new(t0, jets);
    doc.first_integral = Some(integral_summary_for_expr(&psi, base.label(ode.order())));
    let traj = match rk4_trajectory(ode, &init, span, step) {
        Ok(t) => t,
        Err(e) => {
            doc.error = Some(ErrorSummary {
                code: "Trajectory".into(),
                message: e.to_string(),
            });
            doc.exit_code = 1;
            return doc;
        }
    };
    if let Some(path) = dump_csv {
        let csv = trajectory_csv(&traj, Some(&psi), ode.order());
        match std::fs::write(path, csv) {
            Ok(()) => doc.diagnostics.push(format!("wrote {path}")),
            Err(e) => doc.diagnostics.push(format!("could not write {path}: {e}")),
        }
    }
    match check_first_integral(&psi, &traj, drift_tol) {
        Ok(report) => {
            let passed = report.passed;
            doc.verification = Some(vec![drift_summary(0, &report)]);
            doc.exit_code = if passed { 0 } else { 5 };
        }
        Err(e) => {
            doc.error = Some(ErrorSummary {
                code: "Verification".into(),
                message: e.to_string(),
            });
            doc.exit_code = 1;
        }
    }
    doc
}

