//! Independent reference oracle: adaptive Runge–Kutta integration of the
//! associated initial value problem, plus single shooting against the far
//! boundary value.
//!
//! The integrator is the Dormand–Prince embedded 5(4) pair with standard
//! proportional step control. It shares no code with the Bézier solver, so
//! agreement between the two is meaningful evidence.

use thiserror::Error;

use crate::problem::Fn2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("solution blow-up: |y| exceeded {BLOW_UP_LIMIT:e} near x = {last_x}")]
    BlowUp { last_x: f64 },
    #[error("step size underflow near x = {last_x}; the solution is not resolvable there")]
    StepUnderflow { last_x: f64 },
    #[error("invalid IVP specification: {0}")]
    InvalidSpec(String),
}

const BLOW_UP_LIMIT: f64 = 1e12;

/// An initial value problem y′ = rhs(x, y), y(x0) = y0, integrated to x_end.
#[derive(Clone)]
pub struct IvpSpec {
    pub rhs: Fn2,
    pub x0: f64,
    pub y0: f64,
    pub x_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl IvpSpec {
    /// Spec with the default tolerances (1e-9 relative and absolute).
    pub fn new(rhs: Fn2, x0: f64, y0: f64, x_end: f64) -> Self {
        IvpSpec { rhs, x0, y0, x_end, rel_tol: 1e-9, abs_tol: 1e-9 }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    fn validate(&self) -> Result<(), OracleError> {
        if self.x0 == self.x_end {
            return Err(OracleError::InvalidSpec("x0 must differ from x_end".into()));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(OracleError::InvalidSpec("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Accepted integration nodes with the derivative at each node, supporting
/// dense evaluation by cubic Hermite interpolation between nodes.
#[derive(Debug, Clone)]
pub struct Trajectory {
    xs: Vec<f64>,
    ys: Vec<f64>,
    dys: Vec<f64>,
}

impl Trajectory {
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn first(&self) -> (f64, f64) {
        (self.xs[0], self.ys[0])
    }

    pub fn last(&self) -> (f64, f64) {
        (*self.xs.last().unwrap(), *self.ys.last().unwrap())
    }

    /// y(x) by cubic Hermite interpolation on the containing node interval;
    /// node abscissas reproduce node values exactly. `None` outside the span.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let ascending = self.xs[0] <= *self.xs.last().unwrap();
        let (lo, hi) = if ascending {
            (self.xs[0], *self.xs.last().unwrap())
        } else {
            (*self.xs.last().unwrap(), self.xs[0])
        };
        if x < lo || x > hi {
            return None;
        }
        let idx = if ascending {
            self.xs.partition_point(|&v| v < x)
        } else {
            self.xs.partition_point(|&v| v > x)
        };
        if idx < self.xs.len() && self.xs[idx] == x {
            return Some(self.ys[idx]);
        }
        let i = idx - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let u = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (d0, d1) = (self.dys[i] * h, self.dys[i + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        Some(
            (2.0 * u3 - 3.0 * u2 + 1.0) * y0
                + (u3 - 2.0 * u2 + u) * d0
                + (-2.0 * u3 + 3.0 * u2) * y1
                + (u3 - u2) * d1,
        )
    }
}

// Dormand-Prince 5(4) tableau
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates the IVP with the embedded 5(4) pair and adaptive step control.
pub fn integrate(spec: &IvpSpec) -> Result<Trajectory, OracleError> {
    spec.validate()?;
    let rhs = &spec.rhs;
    let span = spec.x_end - spec.x0;
    let direction = span.signum();
    let min_step = 1e-14 * span.abs();

    let mut x = spec.x0;
    let mut y = spec.y0;
    let mut k1 = rhs(x, y);
    let mut h = direction * span.abs() / 100.0;
    let mut xs = vec![x];
    let mut ys = vec![y];
    let mut dys = vec![k1];

    while (spec.x_end - x) * direction > 0.0 {
        if h.abs() < min_step {
            return Err(OracleError::StepUnderflow { last_x: x });
        }
        if (x + h - spec.x_end) * direction > 0.0 {
            h = spec.x_end - x;
        }

        let mut k = [k1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        for stage in 0..6 {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                acc += A[stage][j] * kj;
            }
            k[stage + 1] = rhs(x + C[stage] * h, y + h * acc);
        }
        let y5 = y + h * B5.iter().zip(&k).map(|(b, kk)| b * kk).sum::<f64>();
        let y4 = y + h * B4.iter().zip(&k).map(|(b, kk)| b * kk).sum::<f64>();
        let scale = spec.abs_tol + spec.rel_tol * y.abs().max(y5.abs());
        let err = ((y5 - y4) / scale).abs();

        if !y5.is_finite() || !err.is_finite() {
            // treat a nonfinite stage as a blow-up signal and retry smaller
            h *= 0.25;
            continue;
        }

        if err <= 1.0 {
            x += h;
            y = y5;
            k1 = k[6]; // FSAL: last stage is the derivative at the new point
            xs.push(x);
            ys.push(y);
            dys.push(k1);
            if y.abs() > BLOW_UP_LIMIT {
                return Err(OracleError::BlowUp { last_x: x });
            }
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }

    Ok(Trajectory { xs, ys, dys })
}

/// Report from a single shot: integrate from (a, y_a) and compare y(b)
/// against the target boundary value.
#[derive(Debug, Clone, PartialEq)]
pub struct ShootReport {
    pub y_end: f64,
    pub target: f64,
    /// y(b) − target.
    pub deviation: f64,
    /// deviation / max(1, |target|).
    pub relative_deviation: f64,
}

/// Integrates the explicit-form IVP and reports the mismatch at the far
/// boundary. The paper-scale problems fix the initial value, so no search
/// over initial conditions is needed.
pub fn shoot(spec: &IvpSpec, target: f64) -> Result<(ShootReport, Trajectory), OracleError> {
    let trajectory = integrate(spec)?;
    let (_, y_end) = trajectory.last();
    let deviation = y_end - target;
    Ok((
        ShootReport {
            y_end,
            target,
            deviation,
            relative_deviation: deviation / target.abs().max(1.0),
        },
        trajectory,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    #[test]
    fn exponential_growth() {
        let spec = IvpSpec::new(Arc::new(|_x, y| y), 0.0, 1.0, 2.0);
        let traj = integrate(&spec).unwrap();
        let (x, y) = traj.last();
        assert_eq!(x, 2.0);
        assert_abs_diff_eq!(y, 2f64.exp(), epsilon = 1e-6);
    }

    #[test]
    fn polynomial_quadrature_is_near_exact() {
        let spec = IvpSpec::new(Arc::new(|x, _y| -2.0 * x), -1.0, 3.0, 3.0);
        let (report, _) = shoot(&spec, -5.0).unwrap();
        assert_abs_diff_eq!(report.y_end, -5.0, epsilon = 1e-8);
    }

    #[test]
    fn riccati_boundary_value() {
        let spec = IvpSpec::new(Arc::new(|x, y: f64| x + y * y), 0.0, 1.0, 0.9);
        let (report, _) = shoot(&spec, 32.725).unwrap();
        assert!(report.relative_deviation.abs() <= 0.005);
    }

    #[test]
    fn riccati_blows_up_past_the_interval() {
        let spec = IvpSpec::new(Arc::new(|x, y: f64| x + y * y), 0.0, 1.0, 1.5);
        match integrate(&spec) {
            Err(OracleError::BlowUp { last_x } | OracleError::StepUnderflow { last_x }) => {
                // the pole sits just past x = 0.9
                assert!(last_x > 0.9 && last_x < 1.1, "pole location {last_x}");
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn dense_output_matches_nodes_and_closed_form() {
        let spec = IvpSpec::new(Arc::new(|_x, y| y), 0.0, 1.0, 2.0);
        let traj = integrate(&spec).unwrap();
        for (x, y) in traj.nodes() {
            assert_eq!(traj.eval(x), Some(y));
        }
        for k in 0..=40 {
            let x = 2.0 * k as f64 / 40.0;
            assert_abs_diff_eq!(traj.eval(x).unwrap(), x.exp(), epsilon = 1e-5);
        }
        assert_eq!(traj.eval(-0.1), None);
        assert_eq!(traj.eval(2.1), None);
    }

    #[test]
    fn trajectory_x_is_strictly_monotone() {
        let spec = IvpSpec::new(Arc::new(|x, y: f64| x + y * y), 0.0, 1.0, 0.9);
        let traj = integrate(&spec).unwrap();
        let xs: Vec<f64> = traj.nodes().map(|(x, _)| x).collect();
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(traj.first(), (0.0, 1.0));
        assert_eq!(traj.last().0, 0.9);
    }

    #[test]
    fn tighter_tolerances_do_not_hurt() {
        for (rhs, x0, y0, x_end, exact) in [
            (Arc::new(|_x, y: f64| y) as Fn2, 0.0, 1.0, 2.0, 2f64.exp()),
            (Arc::new(|x: f64, _y: f64| -2.0 * x) as Fn2, -1.0, 3.0, 3.0, -5.0),
        ] {
            let error_at = |tol: f64| {
                let spec = IvpSpec::new(rhs.clone(), x0, y0, x_end).with_tolerances(tol, tol);
                (integrate(&spec).unwrap().last().1 - exact).abs()
            };
            assert!(error_at(1e-9) <= error_at(1e-5) + 1e-13);
            assert!(error_at(5e-7) <= error_at(1e-6) + 1e-13);
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let spec = IvpSpec::new(Arc::new(|_x, y| y), 0.0, 1.0, 0.0);
        assert!(matches!(integrate(&spec), Err(OracleError::InvalidSpec(_))));
        let spec = IvpSpec::new(Arc::new(|_x, y| y), 0.0, 1.0, 1.0).with_tolerances(0.0, 1e-9);
        assert!(matches!(integrate(&spec), Err(OracleError::InvalidSpec(_))));
    }
}
