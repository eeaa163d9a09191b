//! Symbolic and numeric toolkit for quasi-linear ordinary differential
//! equations: exactness certification, first-integral construction,
//! integrating-factor search, and trajectory-based verification.

pub mod calculus;
pub mod cli;
pub mod expr;
pub mod linalg;
pub mod mufind;
pub mod numverify;
pub mod ode;
pub mod report;

pub use expr::{
    diff, eval_at, expand, is_zero, parse_expr, print_expr, simplify, substitute, EvalError,
    Expr, FunKind, JetVar, ParseError, ProbeConfig, Rat, SampleBox, ZeroTestError, ZeroVerdict,
};

/// Entry point used by the `exactode` binary. Returns the process exit code.
pub fn run_cli() -> i32 {
    cli::run()
}
