//! Numeric back-end: fixed-step RK4 trajectories of the equation solved for
//! its highest derivative, constancy (drift) checks of first integrals along
//! those trajectories, and an h-refinement audit of the integrator order.

use crate::expr::{eval_at, sample_point, Expr, JetVar, ProbeConfig};
use crate::ode::QuasiLinearOde;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use thiserror::Error;

/// Relative pivot guard: integration stops when `|F_n|` falls below this
/// fraction of the largest coefficient magnitude at the state.
const EPS_PIVOT: f64 = 1e-8;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NumError {
    #[error("pivot too small at t = {t:.6}: |F_n| = {pivot:.3e}")]
    PivotTooSmall { t: f64, pivot: f64 },
    #[error("initial state is singular: {detail}")]
    ImmediateSingularity { detail: String },
    #[error("evaluation failed along the trajectory: {0}")]
    Eval(#[from] crate::expr::EvalError),
    #[error("both drifts are below the 1e-13 noise floor; the ratio is meaningless")]
    DriftBelowNoiseFloor,
    #[error("could not find {want} nonsingular initial states after {attempts} attempts")]
    NoViableInitialStates { want: usize, attempts: usize },
    #[error("bad trajectory parameters: {detail}")]
    BadParameters { detail: String },
}

/// State of the first-order system: time plus `(y, y', ..., y^(n-1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub jets: Vec<f64>,
}

impl State {
    pub fn new(t: f64, jets: Vec<f64>) -> Self {
        State { t, jets }
    }

    pub fn bindings(&self) -> BTreeMap<JetVar, f64> {
        let mut m = BTreeMap::new();
        m.insert(JetVar::Time, self.t);
        for (k, v) in self.jets.iter().enumerate() {
            m.insert(JetVar::Deriv(k as u32), *v);
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    PivotTooSmall { at_t: f64 },
    NonFinite { at_t: f64 },
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StopReason::PivotTooSmall { at_t } => {
                write!(f, "pivot |F_n| too small at t = {at_t:.6}")
            }
            StopReason::NonFinite { at_t } => write!(f, "non-finite value at t = {at_t:.6}"),
        }
    }
}

/// A fixed-step RK4 trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub t_grid: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub step: f64,
    pub method: &'static str,
    pub early_stop: Option<StopReason>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }

    /// Span actually covered before any early stop.
    pub fn covered(&self) -> f64 {
        match (self.t_grid.first(), self.t_grid.last()) {
            (Some(a), Some(b)) => (b - a).abs(),
            _ => 0.0,
        }
    }
}

/// Solve the equation for the highest derivative at a state:
/// `y^(n) = -(sum_{i=1}^{n-1} F_i y^(i) + F_0) / F_n`.
pub fn solve_highest(ode: &QuasiLinearOde, state: &State) -> Result<f64, NumError> {
    let n = ode.order();
    let point = state.bindings();
    let mut values = Vec::with_capacity(n + 1);
    for c in ode.coeffs() {
        values.push(eval_at(c, &point)?);
    }
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let pivot = values[n].abs();
    if scale == 0.0 || pivot < EPS_PIVOT * scale || !pivot.is_finite() {
        return Err(NumError::PivotTooSmall { t: state.t, pivot });
    }
    let mut acc = values[0];
    for i in 1..n {
        acc += values[i] * state.jets[i];
    }
    Ok(-acc / values[n])
}

fn derivative_vector(ode: &QuasiLinearOde, t: f64, jets: &[f64]) -> Result<Vec<f64>, NumError> {
    let n = ode.order();
    let state = State::new(t, jets.to_vec());
    let top = solve_highest(ode, &state)?;
    let mut d = Vec::with_capacity(n);
    for k in 1..n {
        d.push(jets[k]);
    }
    d.push(top);
    Ok(d)
}

/// Integrate over `span` from the initial state with fixed step `h` using the
/// classical four-stage scheme. The grid is uniform with a step count of
/// `round(span/h)`; early stops truncate the trajectory and record why.
pub fn rk4_trajectory(
    ode: &QuasiLinearOde,
    init: &State,
    span: f64,
    h: f64,
) -> Result<Trajectory, NumError> {
    if !(h > 0.0 && h.is_finite() && span > 0.0 && span.is_finite()) {
        return Err(NumError::BadParameters {
            detail: format!("span {span} and step {h} must be finite and positive"),
        });
    }
    if span / h > 2e7 {
        return Err(NumError::BadParameters {
            detail: format!("span/step = {:.3e} steps exceeds the 2e7 cap", span / h),
        });
    }
    let n = ode.order();
    assert_eq!(init.jets.len(), n, "state dimension mismatch");
    if let Err(e) = derivative_vector(ode, init.t, &init.jets) {
        return Err(match e {
            NumError::PivotTooSmall { t, pivot } => NumError::ImmediateSingularity {
                detail: format!("pivot |F_n| = {pivot:.3e} at t = {t:.6}"),
            },
            NumError::Eval(err) => NumError::ImmediateSingularity {
                detail: err.to_string(),
            },
            other => other,
        });
    }
    let steps = (span / h).round().max(1.0) as usize;
    let h = span / steps as f64;
    let mut t = init.t;
    let mut y = init.jets.clone();
    let mut t_grid = vec![t];
    let mut states = vec![y.clone()];
    let mut early_stop = None;
    'integrate: for _ in 0..steps {
        let stage = |tt: f64, yy: &[f64]| derivative_vector(ode, tt, yy);
        let k1 = match stage(t, &y) {
            Ok(v) => v,
            Err(_) => {
                early_stop = Some(StopReason::PivotTooSmall { at_t: t });
                break 'integrate;
            }
        };
        let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
        let k2 = match stage(t + 0.5 * h, &y2) {
            Ok(v) => v,
            Err(_) => {
                early_stop = Some(StopReason::PivotTooSmall { at_t: t });
                break 'integrate;
            }
        };
        let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
        let k3 = match stage(t + 0.5 * h, &y3) {
            Ok(v) => v,
            Err(_) => {
                early_stop = Some(StopReason::PivotTooSmall { at_t: t });
                break 'integrate;
            }
        };
        let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
        let k4 = match stage(t + h, &y4) {
            Ok(v) => v,
            Err(_) => {
                early_stop = Some(StopReason::PivotTooSmall { at_t: t });
                break 'integrate;
            }
        };
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += h;
        if y.iter().any(|v| !v.is_finite()) {
            early_stop = Some(StopReason::NonFinite { at_t: t });
            break;
        }
        t_grid.push(t);
        states.push(y.clone());
    }
    Ok(Trajectory {
        t_grid,
        states,
        step: h,
        method: "RK4",
        early_stop,
    })
}

/// Constancy report of a candidate first integral along a trajectory.
#[derive(Debug, Clone)]
pub struct DriftReport {
    pub psi0: f64,
    pub max_drift: f64,
    pub normalized_drift: f64,
    pub steps_used: usize,
    pub early_stop: Option<StopReason>,
    pub tol: f64,
    pub passed: bool,
}

/// Evaluate `psi` along the trajectory and measure the worst deviation from
/// its initial value. Passes iff `max_drift / (1 + |psi0|) <= tol`.
pub fn check_first_integral(
    psi: &Expr,
    traj: &Trajectory,
    tol: f64,
) -> Result<DriftReport, NumError> {
    assert!(!traj.is_empty());
    let mut psi0 = 0.0;
    let mut max_drift = 0.0f64;
    for (i, (t, jets)) in traj.t_grid.iter().zip(&traj.states).enumerate() {
        let state = State::new(*t, jets.clone());
        let v = eval_at(psi, &state.bindings())?;
        if i == 0 {
            psi0 = v;
        } else {
            max_drift = max_drift.max((v - psi0).abs());
        }
    }
    let normalized_drift = max_drift / (1.0 + psi0.abs());
    Ok(DriftReport {
        psi0,
        max_drift,
        normalized_drift,
        steps_used: traj.len() - 1,
        early_stop: traj.early_stop.clone(),
        tol,
        passed: normalized_drift <= tol,
    })
}

/// Run the drift check at `h` and `h/2` and return
/// `max_drift(h) / max_drift(h/2)`. For a smooth fourth-order run the ratio
/// sits near 16.
pub fn h_refinement_check(
    ode: &QuasiLinearOde,
    psi: &Expr,
    init: &State,
    span: f64,
    h: f64,
) -> Result<f64, NumError> {
    let coarse = rk4_trajectory(ode, init, span, h)?;
    let fine = rk4_trajectory(ode, init, span, h / 2.0)?;
    let dc = check_first_integral(psi, &coarse, f64::INFINITY)?;
    let df = check_first_integral(psi, &fine, f64::INFINITY)?;
    if dc.max_drift < 1e-13 && df.max_drift < 1e-13 {
        return Err(NumError::DriftBelowNoiseFloor);
    }
    Ok(dc.max_drift / df.max_drift)
}

/// Default numeric verification protocol: random initial states from the
/// probe box, fixed span and step, one drift report per trajectory.
#[derive(Debug, Clone)]
pub struct VerifyProtocol {
    pub runs: usize,
    pub span: f64,
    pub h: f64,
    pub tol: f64,
}

impl Default for VerifyProtocol {
    fn default() -> Self {
        VerifyProtocol {
            runs: 5,
            span: 0.5,
            h: 1e-3,
            tol: 1e-6,
        }
    }
}

/// Sample initial states until `runs` full-span trajectories exist (singular
/// starts and early-stopped runs are resampled), then drift-check `psi` on
/// each. Deterministic for a fixed seed.
pub fn verify_protocol(
    ode: &QuasiLinearOde,
    psi: &Expr,
    proto: &VerifyProtocol,
    cfg: &ProbeConfig,
) -> Result<Vec<DriftReport>, NumError> {
    let n = ode.order();
    let vars: Vec<JetVar> = crate::ode::coordinates(n);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5bd1_e995);
    let mut reports = Vec::new();
    let mut attempts = 0;
    let max_attempts = proto.runs * 40;
    while reports.len() < proto.runs && attempts < max_attempts {
        attempts += 1;
        let point = sample_point(&vars, &cfg.sample_box, &mut rng);
        let t0 = point[&JetVar::Time];
        let jets: Vec<f64> = (0..n).map(|k| point[&JetVar::Deriv(k as u32)]).collect();
        let init = State::new(t0, jets);
        let Ok(traj) = rk4_trajectory(ode, &init, proto.span, proto.h) else {
            continue;
        };
        if traj.early_stop.is_some() || traj.covered() < proto.span * 0.999 {
            continue;
        }
        match check_first_integral(psi, &traj, proto.tol) {
            Ok(report) => reports.push(report),
            Err(NumError::Eval(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    if reports.len() < proto.runs {
        return Err(NumError::NoViableInitialStates {
            want: proto.runs,
            attempts,
        });
    }
    Ok(reports)
}

/// CSV dump: `t, y, y1, ..., psi` per sample.
pub fn trajectory_csv(traj: &Trajectory, psi: Option<&Expr>, order: usize) -> String {
    let mut out = String::new();
    out.push('t');
    for k in 0..order {
        out.push(',');
        out.push_str(&JetVar::Deriv(k as u32).name());
    }
    if psi.is_some() {
        out.push_str(",psi");
    }
    out.push('\n');
    for (t, jets) in traj.t_grid.iter().zip(&traj.states) {
        out.push_str(&format!("{t:.12e}"));
        for v in jets {
            out.push_str(&format!(",{v:.12e}"));
        }
        if let Some(p) = psi {
            let state = State::new(*t, jets.clone());
            match eval_at(p, &state.bindings()) {
                Ok(v) => out.push_str(&format!(",{v:.12e}")),
                Err(_) => out.push_str(",nan"),
            }
        }
        out.push('\n');
    }
    out
}
