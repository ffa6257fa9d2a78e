//! bezier-bvp: two-point boundary value problems solved with Bernstein
//! polynomials and Bézier control-point insertion.
//!
//! A first-order BVP stated as a residual G(x, y, y′) = 0 with boundary
//! values y(a) = y_a and y(b) = y_b is approximated by a parametric Bézier
//! curve (ψ(t), φ(t)):
//!
//! 1. The boundary slopes are solved from G at each endpoint, and the
//!    intersection of the two boundary tangent lines gives the *pivot*
//!    point, completing an initial quadratic curve ([`pivot`]).
//! 2. Control points corrected by the pointwise ODE error are inserted at
//!    symmetric parameter pairs until the mean error stops decreasing or
//!    the parameter grid is exhausted ([`solver`]).
//!
//! An independent adaptive Runge–Kutta integrator ([`oracle`]) validates
//! results through the associated initial value problem, and a small
//! expression language ([`expr`]) lets callers state residuals as text.
//!
//! ```
//! use bezier_bvp::{builtin, solve, SolverConfig};
//!
//! let problem = builtin("parabola").unwrap();
//! let result = solve(&problem, &SolverConfig::default()).unwrap();
//! assert_eq!(result.polygon.len(), 9);
//! let mid = result.polygon.eval(0.5).unwrap();
//! assert!((mid.y - 3.0).abs() < 0.1); // exact solution: y(1) = 3
//! ```

pub mod bernstein;
pub mod expr;
pub mod oracle;
pub mod pivot;
pub mod problem;
pub mod solver;

pub use bernstein::{
    basis, basis_row, bernstein_approximation, binomial, BernsteinError, ControlPolygon,
    CurvePoint, Point, DEFAULT_SLOPE_TOLERANCE, MAX_BINOMIAL_DEGREE,
};
pub use expr::{compile_residual, eval, parse, render, Bindings, EvalError, Expr, ParseError};
pub use oracle::{integrate, shoot, IvpSpec, OracleError, ShootReport, Trajectory};
pub use pivot::{
    compute_pivot, endpoint_slopes, tangent_intersection, End, PivotCandidate, PivotError,
    PivotResult, ScanConfig, TangentPoint,
};
pub use problem::{builtin, BuiltinProblem, BvpProblem, ProblemError, ReferenceSolution};
pub use solver::{
    local_error, sample, solve, step, uniform_grid, IterationRecord, SampleRow, SolveError,
    SolveResult, SolverConfig, StepOutcome, StopReason,
};
