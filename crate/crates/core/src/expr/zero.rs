//! Probabilistic zero-testing: the decision procedure behind every symbolic
//! equality claim. Simplification proves literal zeros; everything else is
//! probed at seeded random points with a term-scaled tolerance.

use super::{eval_at, print_expr, simplify, EvalError, Expr, JetVar};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use thiserror::Error;

/// Magnitude interval probed per variable. Samples are drawn uniformly from
/// `[lo, hi]` with a random sign, i.e. from `[-hi,-lo] U [lo,hi]`, so poles
/// on the coordinate hyperplanes are avoided.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox {
    pub lo: f64,
    pub hi: f64,
}

impl Default for SampleBox {
    fn default() -> Self {
        SampleBox { lo: 0.1, hi: 2.0 }
    }
}

impl SampleBox {
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let mag = if self.hi > self.lo {
            rng.gen_range(self.lo..self.hi)
        } else {
            self.lo
        };
        if rng.gen_bool(0.5) {
            mag
        } else {
            -mag
        }
    }
}

/// Settings for the probabilistic zero test.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub probes: usize,
    pub tol: f64,
    pub sample_box: SampleBox,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            probes: 32,
            tol: 1e-9,
            sample_box: SampleBox::default(),
            seed: 0,
        }
    }
}

impl ProbeConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ZeroVerdict {
    /// Simplification reduced the tree to the literal constant 0.
    ProvenZero,
    /// All probes stayed within tolerance.
    ProbablyZero { probes: usize, max_residual: f64 },
    /// A concrete point at which the value exceeds tolerance.
    NonZero { witness: Vec<(JetVar, f64)>, value: f64 },
}

impl ZeroVerdict {
    pub fn is_zero(&self) -> bool {
        !matches!(self, ZeroVerdict::NonZero { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            ZeroVerdict::ProvenZero => "proven-zero",
            ZeroVerdict::ProbablyZero { .. } => "probably-zero",
            ZeroVerdict::NonZero { .. } => "non-zero",
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ZeroTestError {
    #[error("inconclusive domain: {singular} of {attempts} probe points were singular for '{expr}'")]
    InconclusiveDomain {
        expr: String,
        singular: usize,
        attempts: usize,
    },
}

/// Draw one probe point for the given variables.
pub fn sample_point(
    vars: &[JetVar],
    sample_box: &SampleBox,
    rng: &mut ChaCha8Rng,
) -> BTreeMap<JetVar, f64> {
    vars.iter().map(|v| (*v, sample_box.sample(rng))).collect()
}

/// Decide whether `e` is identically zero on the probe box.
///
/// A point rejects the hypothesis when `|value| > tol * (1 + scale)` with
/// `scale` the largest magnitude among the expression's additive terms there,
/// so cancellations of large terms are judged relative to their size.
pub fn is_zero(e: &Expr, cfg: &ProbeConfig) -> Result<ZeroVerdict, ZeroTestError> {
    let s = simplify(e);
    if s.is_zero_literal() {
        return Ok(ZeroVerdict::ProvenZero);
    }
    let vars: Vec<JetVar> = s.free_vars().into_iter().collect();
    if vars.is_empty() {
        // a nonzero rational constant is exactly nonzero
        if let Expr::Const(_) = &s {
            let value = super::rat_to_f64(s.as_const().unwrap());
            return Ok(ZeroVerdict::NonZero {
                witness: Vec::new(),
                value,
            });
        }
        // constant but not foldable (e.g. contains ln(2)); fall through and
        // evaluate once
        return match eval_const(&s, cfg) {
            Some(value) if value.abs() > cfg.tol * (1.0 + value.abs()) => {
                Ok(ZeroVerdict::NonZero {
                    witness: Vec::new(),
                    value,
                })
            }
            Some(value) => Ok(ZeroVerdict::ProbablyZero {
                probes: 1,
                max_residual: value.abs(),
            }),
            None => Err(ZeroTestError::InconclusiveDomain {
                expr: print_expr(&s),
                singular: 1,
                attempts: 1,
            }),
        };
    }

    let terms: Vec<&Expr> = s.terms().iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    let mut singular = 0usize;
    let mut max_residual = 0.0f64;
    let max_attempts = cfg.probes.saturating_mul(10).max(10);
    while accepted < cfg.probes && attempts < max_attempts {
        attempts += 1;
        let point = sample_point(&vars, &cfg.sample_box, &mut rng);
        let mut sum = 0.0f64;
        let mut scale = 0.0f64;
        let mut bad = false;
        for term in &terms {
            match eval_at(term, &point) {
                Ok(v) => {
                    sum += v;
                    scale = scale.max(v.abs());
                }
                Err(EvalError::Singular { .. }) => {
                    bad = true;
                    break;
                }
                Err(EvalError::Unbound(_)) => {
                    // free_vars covers everything; unreachable in practice
                    bad = true;
                    break;
                }
            }
        }
        if bad {
            singular += 1;
            continue;
        }
        accepted += 1;
        let residual = sum.abs();
        if residual > cfg.tol * (1.0 + scale) {
            return Ok(ZeroVerdict::NonZero {
                witness: point.into_iter().collect(),
                value: sum,
            });
        }
        max_residual = max_residual.max(residual);
    }
    if accepted < cfg.probes {
        return Err(ZeroTestError::InconclusiveDomain {
            expr: print_expr(&s),
            singular,
            attempts,
        });
    }
    Ok(ZeroVerdict::ProbablyZero {
        probes: accepted,
        max_residual,
    })
}

fn eval_const(e: &Expr, _cfg: &ProbeConfig) -> Option<f64> {
    eval_at(e, &BTreeMap::new()).ok()
}
