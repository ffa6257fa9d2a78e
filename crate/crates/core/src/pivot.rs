//! Step one of the solver: the pivot point (p, q).
//!
//! The initial quadratic Bézier curve through {(a, y_a), (p, q), (b, y_b)}
//! is tangent at its endpoints to the segments joining them to the pivot,
//! so the pivot lies at the intersection of the two boundary tangent lines.
//! Endpoint slopes are the real roots of s ↦ G(x_end, y_end, s), found by a
//! sign-change scan followed by bisection; every slope pair contributes one
//! intersection candidate and the candidate whose p is nearest to the
//! interval midpoint is chosen.

use serde::Serialize;
use thiserror::Error;

use crate::problem::BvpProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum End {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PivotError {
    #[error("the slope equation at the {0:?} boundary has no real solutions")]
    NoRealSlopes(End),
    #[error("all boundary tangent pairs are parallel; no pivot candidate exists")]
    NoCandidate,
    #[error("the tangent lines are parallel")]
    Parallel,
}

/// Scan and refinement controls for the scalar slope equations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanConfig {
    /// Inclusive slope interval searched for sign changes.
    pub slope_range: (f64, f64),
    /// Number of scan samples over the range (≥ 2).
    pub scan_samples: usize,
    /// Target residual magnitude for refined roots.
    pub refine_tolerance: f64,
    /// Bisection iteration cap per bracket.
    pub max_refine_iterations: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        // wide enough to cover steep boundary slopes (around 1e3 in the
        // stiffest built-in) with two orders of margin
        ScanConfig {
            slope_range: (-1e4, 1e4),
            scan_samples: 20001,
            refine_tolerance: 1e-12,
            max_refine_iterations: 200,
        }
    }
}

/// A point with a prescribed tangent slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangentPoint {
    pub x: f64,
    pub y: f64,
    pub slope: f64,
}

/// One tangent-intersection candidate from a slope pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PivotCandidate {
    pub slope_a: f64,
    pub slope_b: f64,
    pub p: f64,
    pub q: f64,
    /// |p − 0.5(a+b)|, the selection figure of merit.
    pub midpoint_distance: f64,
}

/// The chosen pivot together with the full selection trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PivotResult {
    pub pivot: (f64, f64),
    pub slopes_a: Vec<f64>,
    pub slopes_b: Vec<f64>,
    pub candidates: Vec<PivotCandidate>,
    pub chosen_index: usize,
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, cfg: &ScanConfig) -> f64 {
    let mut flo = f(lo);
    for _ in 0..cfg.max_refine_iterations {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 || fmid.abs() <= cfg.refine_tolerance {
            return mid;
        }
        if (fmid > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// All real roots of s ↦ G(x_end, y_end, s) over the scan range, refined by
/// bisection, deduplicated within 1e-8 and sorted ascending. An empty list
/// is a valid return: the boundary slope equation has no real solutions.
pub fn endpoint_slopes(problem: &BvpProblem, end: End, cfg: &ScanConfig) -> Vec<f64> {
    let (x, y) = match end {
        End::Lower => (problem.a, problem.y_a),
        End::Upper => (problem.b, problem.y_b),
    };
    let g = |s: f64| problem.residual_raw(x, y, s);
    let (lo, hi) = cfg.slope_range;
    let n = cfg.scan_samples.max(2);
    let grid = |k: usize| lo + (hi - lo) * k as f64 / (n - 1) as f64;
    let values: Vec<f64> = (0..n).map(|k| g(grid(k))).collect();

    let mut roots = Vec::new();
    for k in 0..n {
        if values[k] == 0.0 {
            roots.push(grid(k));
            continue;
        }
        if k + 1 < n
            && values[k].is_finite()
            && values[k + 1].is_finite()
            && values[k + 1] != 0.0
            && (values[k] > 0.0) != (values[k + 1] > 0.0)
        {
            roots.push(bisect(&g, grid(k), grid(k + 1), cfg));
        }
    }
    roots.sort_by(f64::total_cmp);
    let mut deduped: Vec<f64> = Vec::new();
    for r in roots {
        if deduped.last().is_none_or(|last| r - last > 1e-8) {
            deduped.push(r);
        }
    }
    deduped
}

/// Intersection of the tangent lines through two points: solves
/// y₀ + s₀(p − x₀) = y₁ + s₁(p − x₁) for p, then q from the first line.
pub fn tangent_intersection(
    pt0: TangentPoint,
    pt1: TangentPoint,
) -> Result<(f64, f64), PivotError> {
    let (s0, s1) = (pt0.slope, pt1.slope);
    if (s0 - s1).abs() < 1e-12 * s0.abs().max(s1.abs()).max(1.0) {
        return Err(PivotError::Parallel);
    }
    let p = (pt1.y - pt0.y + s0 * pt0.x - s1 * pt1.x) / (s0 - s1);
    let q = pt0.y + s0 * (p - pt0.x);
    Ok((p, q))
}

/// Computes the pivot: enumerates every slope pair, intersects the tangent
/// lines, and selects the candidate whose p lies nearest to 0.5(a+b), ties
/// broken toward smaller p.
pub fn compute_pivot(problem: &BvpProblem, cfg: &ScanConfig) -> Result<PivotResult, PivotError> {
    let slopes_a = endpoint_slopes(problem, End::Lower, cfg);
    if slopes_a.is_empty() {
        return Err(PivotError::NoRealSlopes(End::Lower));
    }
    let slopes_b = endpoint_slopes(problem, End::Upper, cfg);
    if slopes_b.is_empty() {
        return Err(PivotError::NoRealSlopes(End::Upper));
    }

    let midpoint = 0.5 * (problem.a + problem.b);
    let mut candidates = Vec::new();
    for &s0 in &slopes_a {
        for &s1 in &slopes_b {
            let lower = TangentPoint { x: problem.a, y: problem.y_a, slope: s0 };
            let upper = TangentPoint { x: problem.b, y: problem.y_b, slope: s1 };
            if let Ok((p, q)) = tangent_intersection(lower, upper) {
                candidates.push(PivotCandidate {
                    slope_a: s0,
                    slope_b: s1,
                    p,
                    q,
                    midpoint_distance: (p - midpoint).abs(),
                });
            }
        }
    }
    if candidates.is_empty() {
        return Err(PivotError::NoCandidate);
    }

    let chosen_index = candidates
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            (a.midpoint_distance, a.p)
                .partial_cmp(&(b.midpoint_distance, b.p))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .map(|(i, _)| i)
        .unwrap();
    let chosen = &candidates[chosen_index];
    log::debug!(
        "pivot for {}: ({}, {}) from slopes ({}, {}), {} candidate(s)",
        problem.name,
        chosen.p,
        chosen.q,
        chosen.slope_a,
        chosen.slope_b,
        candidates.len()
    );
    Ok(PivotResult {
        pivot: (chosen.p, chosen.q),
        slopes_a,
        slopes_b,
        candidates,
        chosen_index,
    })
}
