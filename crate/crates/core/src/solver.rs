//! Step two of the solver: the iterative control-point insertion loop.
//!
//! Starting from the quadratic curve {(a, y_a), pivot, (b, y_b)}, each
//! iteration m evaluates the pointwise solution errors e0 and e1 at the
//! symmetric parameters t0 = m·dt and t1 = 1 − m·dt, forms the mean error
//! s = ½(e0 + e1), and inserts the corrected points (ψ(t), φ(t) + e) into
//! the control polygon. The loop exits when |s| stops decreasing, when the
//! parameter pair would collapse onto the interval midpoint, or when the
//! iteration cap is hit.

use serde::Serialize;
use thiserror::Error;

use crate::bernstein::{BernsteinError, ControlPolygon, Point, DEFAULT_SLOPE_TOLERANCE};
use crate::pivot::{compute_pivot, PivotError, PivotResult, ScanConfig};
use crate::problem::BvpProblem;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Pivot(#[from] PivotError),
}

/// Solver controls.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Parameter grid step, in (0, 0.5).
    pub dt: f64,
    /// Iteration cap; the parameter-grid guard usually fires first.
    pub max_iterations: usize,
    /// Forwarded to the slope computation.
    pub slope_tolerance: f64,
    /// Mean errors at or below this magnitude count as numerically zero and
    /// do not participate in the stop comparison: an iteration that lands on
    /// the exact solution must not force an early exit.
    pub negligible_error: f64,
    /// Pivot-stage scan controls.
    pub scan: ScanConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 0.1,
            max_iterations: 50,
            slope_tolerance: DEFAULT_SLOPE_TOLERANCE,
            negligible_error: 1e-12,
            scan: ScanConfig::default(),
        }
    }
}

impl SolverConfig {
    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.dt > 0.0 && self.dt < 0.5) {
            return Err(SolveError::InvalidConfig(format!(
                "dt must lie in (0, 0.5), got {}",
                self.dt
            )));
        }
        if self.max_iterations == 0 {
            return Err(SolveError::InvalidConfig("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// One pass of the insertion loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub m: usize,
    pub t0: f64,
    pub t1: f64,
    pub e0: f64,
    pub e1: f64,
    /// Mean error s = ½(e0 + e1).
    pub s: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    /// |s| failed to decrease against the previous accepted iteration.
    ErrorNonDecreasing,
    /// The iteration cap was reached.
    MaxIterations,
    /// The next parameter pair would reach the middle of the t interval.
    HalfIntervalReached,
    /// The slope became undefined mid-run (vertical tangent) or an error
    /// evaluation broke down; the result carries the partial trace.
    PivotFailure,
}

/// Final curve plus the full iteration trace.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub polygon: ControlPolygon,
    pub pivot: PivotResult,
    pub records: Vec<IterationRecord>,
    pub stop_reason: StopReason,
    pub accepted_iterations: usize,
    /// Non-fatal warnings, e.g. a final polygon whose x coordinates are not
    /// strictly increasing.
    pub diagnostics: Vec<String>,
}

/// A row of the sampled solution table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    #[serde(rename = "ref")]
    pub reference: Option<f64>,
    #[serde(rename = "dev")]
    pub deviation: Option<f64>,
}

/// Pointwise solution error of the current curve at parameter t: the
/// explicit update form (or residual) of the problem applied to
/// (ψ(t), φ(t), φ′(t)/ψ′(t)).
pub fn local_error(
    problem: &BvpProblem,
    polygon: &ControlPolygon,
    t: f64,
    slope_tolerance: f64,
) -> Result<f64, BernsteinError> {
    let s = polygon.slope(t, slope_tolerance)?;
    let p = polygon.eval(t)?;
    Ok(problem.pointwise_error(p.x, p.y, s))
}

/// Outcome of a single insertion step.
#[derive(Debug, Clone)]
pub enum StepOutcome {
    Accept {
        polygon: ControlPolygon,
        record: IterationRecord,
    },
    Stop {
        reason: StopReason,
        record: Option<IterationRecord>,
    },
}

/// Runs iteration m on the current polygon. `s_old` is the comparison value
/// from the previous accepted iteration; `None` means no comparison yet, so
/// the step always inserts. The caller enforces the parameter-grid guard.
pub fn step(
    problem: &BvpProblem,
    polygon: &ControlPolygon,
    m: usize,
    dt: f64,
    s_old: Option<f64>,
    slope_tolerance: f64,
) -> StepOutcome {
    let t0 = m as f64 * dt;
    let t1 = 1.0 - t0;
    let (e0, e1) = match (
        local_error(problem, polygon, t0, slope_tolerance),
        local_error(problem, polygon, t1, slope_tolerance),
    ) {
        (Ok(e0), Ok(e1)) if e0.is_finite() && e1.is_finite() => (e0, e1),
        _ => {
            return StepOutcome::Stop {
                reason: StopReason::PivotFailure,
                record: None,
            }
        }
    };
    let s = 0.5 * (e0 + e1);
    let record = IterationRecord { m, t0, t1, e0, e1, s, accepted: false };
    if let Some(s_old) = s_old {
        if s.abs() >= s_old.abs() {
            return StepOutcome::Stop {
                reason: StopReason::ErrorNonDecreasing,
                record: Some(record),
            };
        }
    }

    let p0 = polygon.eval(t0).expect("t0 in range");
    let p1 = polygon.eval(t1).expect("t1 in range");
    let mut inserted = [
        (t0, Point::new(p0.x, p0.y + e0)),
        (t1, Point::new(p1.x, p1.y + e1)),
    ];
    inserted.sort_by(|a, b| a.1.x.total_cmp(&b.1.x));
    let mut next = polygon.clone();
    for (tag, point) in inserted {
        next.insert_by_x(point, tag);
    }
    StepOutcome::Accept {
        polygon: next,
        record: IterationRecord { accepted: true, ..record },
    }
}

/// Full solve: pivot, then the insertion loop.
pub fn solve(problem: &BvpProblem, cfg: &SolverConfig) -> Result<SolveResult, SolveError> {
    cfg.validate()?;
    let pivot = compute_pivot(problem, &cfg.scan)?;
    let mut polygon = ControlPolygon::new(
        vec![
            Point::new(problem.a, problem.y_a),
            Point::new(pivot.pivot.0, pivot.pivot.1),
            Point::new(problem.b, problem.y_b),
        ],
        vec![0.0, 0.5, 1.0],
    )
    .expect("three points with ordered tags");

    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    let mut s_old: Option<f64> = None;
    let mut accepted = 0usize;
    let mut m = 0usize;
    let stop_reason = loop {
        m += 1;
        // the pair after this one would meet at the interval midpoint, so
        // this is the last pair that can contribute two distinct points
        if (m + 1) as f64 * cfg.dt >= 0.5 - 1e-12 {
            break StopReason::HalfIntervalReached;
        }
        if m > cfg.max_iterations {
            break StopReason::MaxIterations;
        }
        match step(problem, &polygon, m, cfg.dt, s_old, cfg.slope_tolerance) {
            StepOutcome::Accept { polygon: next, record } => {
                log::debug!(
                    "{} m={} t0={:.4} e0={:+.6e} e1={:+.6e} s={:+.6e} accepted",
                    problem.name, m, record.t0, record.e0, record.e1, record.s
                );
                polygon = next;
                records.push(record);
                accepted += 1;
                if record.s.abs() > cfg.negligible_error {
                    s_old = Some(record.s);
                }
            }
            StepOutcome::Stop { reason, record } => {
                if let Some(record) = record {
                    log::debug!(
                        "{} m={} s={:+.6e} rejected ({:?})",
                        problem.name, m, record.s, reason
                    );
                    records.push(record);
                }
                break reason;
            }
        }
    };

    let xs: Vec<f64> = polygon.points().iter().map(|p| p.x).collect();
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        let msg = format!(
            "final polygon x coordinates are not strictly increasing for {}",
            problem.name
        );
        log::warn!("{msg}");
        diagnostics.push(msg);
    }

    Ok(SolveResult {
        polygon,
        pivot,
        records,
        stop_reason,
        accepted_iterations: accepted,
        diagnostics,
    })
}

/// Uniform parameter grid with `n` points covering [0, 1] (n ≥ 2).
pub fn uniform_grid(n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
}

/// Samples the curve at the given parameters; when a reference y(x) is
/// supplied each row also carries the reference value and the signed
/// deviation y − reference.
pub fn sample(
    polygon: &ControlPolygon,
    ts: &[f64],
    reference: Option<&dyn Fn(f64) -> f64>,
) -> Vec<SampleRow> {
    ts.iter()
        .map(|&t| {
            let p = polygon.eval(t).expect("sample parameter in range");
            let reference_value = reference.map(|f| f(p.x));
            SampleRow {
                t,
                x: p.x,
                y: p.y,
                reference: reference_value,
                deviation: reference_value.map(|r| p.y - r),
            }
        })
        .collect()
}
