//! The ODE input file format.
//!
//! ```text
//! # comment
//! order: 3
//! equation: y^3*y3 + y^3*y2 - 2*t*y1 + y
//! base: t0=0, y0=1, y10=0, y20=0
//! ```
//!
//! Alternatively the coefficients can be listed directly as lines
//! `F0: <expr>` through `Fn: <expr>`. An `equation:` line may carry a right
//! hand side (`lhs = rhs` is read as `lhs - rhs = 0`). The `base:` line is
//! optional; keys append `0` to a variable name (`t0`, `y0`, `y10`, ...).

use super::{make_ode, split_equation, BasePoint, OdeError, QuasiLinearOde};
use crate::expr::{parse_expr, print_expr, Expr, JetVar, ProbeConfig, Rat};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OdeFileError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: {source}")]
    BadExpr {
        line: usize,
        source: crate::expr::ParseError,
    },
    #[error(transparent)]
    Model(#[from] OdeError),
}

#[derive(Debug, Clone)]
pub struct OdeFile {
    pub ode: QuasiLinearOde,
    pub base: Option<BasePoint>,
}

pub fn parse_ode_file(text: &str, cfg: &ProbeConfig) -> Result<OdeFile, OdeFileError> {
    let mut order: Option<usize> = None;
    let mut equation: Option<(usize, String)> = None;
    let mut coeff_lines: BTreeMap<usize, (usize, String)> = BTreeMap::new();
    let mut base_line: Option<(usize, String)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(OdeFileError::Malformed {
                line: lineno,
                message: "expected 'key: value'".into(),
            });
        };
        let key = key.trim();
        let value = value.trim().to_string();
        match key {
            "order" => {
                let n: usize = value.parse().map_err(|_| OdeFileError::Malformed {
                    line: lineno,
                    message: format!("bad order '{value}'"),
                })?;
                order = Some(n);
            }
            "equation" => equation = Some((lineno, value)),
            "base" => base_line = Some((lineno, value)),
            other => {
                if let Some(idx) = other.strip_prefix('F').and_then(|s| s.parse::<usize>().ok())
                {
                    coeff_lines.insert(idx, (lineno, value));
                } else {
                    return Err(OdeFileError::Malformed {
                        line: lineno,
                        message: format!("unknown key '{other}'"),
                    });
                }
            }
        }
    }

    let Some(n) = order else {
        return Err(OdeFileError::Malformed {
            line: 1,
            message: "missing 'order:' line".into(),
        });
    };
    if n == 0 {
        return Err(OdeFileError::Malformed {
            line: 1,
            message: "order must be at least 1".into(),
        });
    }
    // the grammar names derivatives up to y9, so coefficients of an order-9
    // equation exhaust the variable set
    if n > 9 {
        return Err(OdeFileError::Malformed {
            line: 1,
            message: format!("order {n} exceeds the supported maximum 9"),
        });
    }

    let ode = match (equation, coeff_lines.is_empty()) {
        (Some((lineno, text)), true) => {
            let expr = parse_equation_line(&text, n as u32, lineno)?;
            split_equation(&expr, n, cfg)?
        }
        (None, false) => {
            let mut coeffs = Vec::with_capacity(n + 1);
            for i in 0..=n {
                let Some((lineno, text)) = coeff_lines.get(&i) else {
                    return Err(OdeFileError::Malformed {
                        line: 1,
                        message: format!("missing coefficient line 'F{i}:'"),
                    });
                };
                let e = parse_expr(text, n as u32).map_err(|source| OdeFileError::BadExpr {
                    line: *lineno,
                    source,
                })?;
                coeffs.push(e);
            }
            if let Some((&extra, (lineno, _))) =
                coeff_lines.iter().find(|(i, _)| **i > n)
            {
                return Err(OdeFileError::Malformed {
                    line: *lineno,
                    message: format!("coefficient F{extra} exceeds order {n}"),
                });
            }
            make_ode(n, coeffs, cfg)?
        }
        (Some(_), false) => {
            return Err(OdeFileError::Malformed {
                line: 1,
                message: "give either 'equation:' or F-lines, not both".into(),
            });
        }
        (None, true) => {
            return Err(OdeFileError::Malformed {
                line: 1,
                message: "missing 'equation:' or coefficient lines".into(),
            });
        }
    };

    let base = match base_line {
        None => None,
        Some((lineno, text)) => Some(parse_base_line(&text, lineno)?),
    };
    Ok(OdeFile { ode, base })
}

fn parse_equation_line(text: &str, max_order: u32, lineno: usize) -> Result<Expr, OdeFileError> {
    let (lhs, rhs) = match text.split_once('=') {
        Some((l, r)) => (l.trim(), Some(r.trim())),
        None => (text, None),
    };
    let l = parse_expr(lhs, max_order).map_err(|source| OdeFileError::BadExpr {
        line: lineno,
        source,
    })?;
    match rhs {
        None => Ok(l),
        Some(r) => {
            let r = parse_expr(r, max_order).map_err(|source| OdeFileError::BadExpr {
                line: lineno,
                source,
            })?;
            Ok(crate::expr::simplify(&(l - r)))
        }
    }
}

pub fn parse_base_line(text: &str, lineno: usize) -> Result<BasePoint, OdeFileError> {
    let mut map: BTreeMap<JetVar, Rat> = BTreeMap::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let Some((key, value)) = part.split_once('=') else {
            return Err(OdeFileError::Malformed {
                line: lineno,
                message: format!("bad base entry '{part}' (expected name0=value)"),
            });
        };
        let key = key.trim();
        let Some(name) = key.strip_suffix('0') else {
            return Err(OdeFileError::Malformed {
                line: lineno,
                message: format!("base key '{key}' must end in 0 (t0, y0, y10, ...)"),
            });
        };
        let var = match name {
            "t" => JetVar::Time,
            "y" => JetVar::Deriv(0),
            other => match other.strip_prefix('y').and_then(|s| s.parse::<u32>().ok()) {
                Some(k) => JetVar::Deriv(k),
                None => {
                    return Err(OdeFileError::Malformed {
                        line: lineno,
                        message: format!("unknown base variable '{key}'"),
                    })
                }
            },
        };
        let rat = crate::expr::parse_rat(value.trim()).map_err(|source| OdeFileError::BadExpr {
            line: lineno,
            source,
        })?;
        map.insert(var, rat);
    }
    Ok(BasePoint::new(map))
}

/// Canonical emission of the model in the same file format (coefficient
/// lines, plus the base when one is attached).
pub fn canonical_ode_text(ode: &QuasiLinearOde, base: Option<&BasePoint>) -> String {
    let mut out = String::new();
    out.push_str(&format!("order: {}\n", ode.order()));
    for (i, c) in ode.coeffs().iter().enumerate() {
        out.push_str(&format!("F{i}: {}\n", print_expr(c)));
    }
    if let Some(b) = base {
        out.push_str(&format!("base: {}\n", b.label(ode.order())));
    }
    out
}
