//! First-order two-point boundary value problems in implicit residual form,
//! plus the three built-in worked problems.
//!
//! An ODE y′ = … on [a, b] with y(a) = y_a and y(b) = y_b is stated as a
//! residual G(x, y, s) = 0, where s stands for dy/dx. The implicit form
//! covers equations that cannot be written with y isolated (for example
//! y′ = x + y², whose explicit-in-y form would need a square root branch).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// Residual G(x, y, s) of a first-order ODE; zero iff the triple satisfies
/// the equation pointwise.
pub type ResidualFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// A function of two reals, shared and immutable.
pub type Fn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A function of one real, shared and immutable.
pub type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("unknown built-in problem {name:?}")]
    NotFound { name: String },
    #[error("invalid interval: a = {a} must be smaller than b = {b}")]
    InvalidInterval { a: f64, b: f64 },
    #[error("boundary values must be finite")]
    NonFiniteBoundary,
    #[error("residual evaluated to a nonfinite value at (x={x}, y={y}, s={s})")]
    NonFiniteResidual { x: f64, y: f64, s: f64 },
}

/// Known exact solution of a problem, when one exists.
#[derive(Clone)]
pub enum ReferenceSolution {
    /// Closed-form y(x).
    ClosedForm(Fn1),
    /// No elementary solution; validation must go through the IVP oracle.
    OracleOnly,
}

impl fmt::Debug for ReferenceSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReferenceSolution::ClosedForm(_) => f.write_str("ClosedForm(..)"),
            ReferenceSolution::OracleOnly => f.write_str("OracleOnly"),
        }
    }
}

/// A first-order two-point BVP: residual G(x, y, s) = 0 on [a, b] with
/// boundary values y(a) = y_a and y(b) = y_b.
#[derive(Clone)]
pub struct BvpProblem {
    pub name: String,
    pub a: f64,
    pub b: f64,
    pub y_a: f64,
    pub y_b: f64,
    residual: ResidualFn,
    explicit_update: Option<Fn2>,
    explicit_rhs: Option<Fn2>,
    reference: Option<ReferenceSolution>,
}

impl fmt::Debug for BvpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BvpProblem")
            .field("name", &self.name)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("y_a", &self.y_a)
            .field("y_b", &self.y_b)
            .field("reference", &self.reference)
            .finish()
    }
}

impl BvpProblem {
    pub fn new(
        name: impl Into<String>,
        a: f64,
        b: f64,
        y_a: f64,
        y_b: f64,
        residual: ResidualFn,
    ) -> Result<Self, ProblemError> {
        if !a.is_finite() || !b.is_finite() || a >= b {
            return Err(ProblemError::InvalidInterval { a, b });
        }
        if !y_a.is_finite() || !y_b.is_finite() {
            return Err(ProblemError::NonFiniteBoundary);
        }
        Ok(BvpProblem {
            name: name.into(),
            a,
            b,
            y_a,
            y_b,
            residual,
            explicit_update: None,
            explicit_rhs: None,
            reference: None,
        })
    }

    /// Attaches the explicit update form F with y = F(y′, x) on solutions.
    /// When present it is preferred over the raw residual for local-error
    /// evaluation, because F(s, x) − y measures the error in units of y.
    pub fn with_explicit_update(mut self, f: Fn2) -> Self {
        self.explicit_update = Some(f);
        self
    }

    /// Attaches the explicit right-hand side y′ = g(x, y) for the IVP oracle.
    pub fn with_explicit_rhs(mut self, g: Fn2) -> Self {
        self.explicit_rhs = Some(g);
        self
    }

    pub fn with_reference(mut self, r: ReferenceSolution) -> Self {
        self.reference = Some(r);
        self
    }

    /// Only first-derivative equations are supported.
    pub fn derivative_order(&self) -> usize {
        1
    }

    /// Evaluates the residual G(x, y, s); nonfinite results are an error.
    pub fn residual_eval(&self, x: f64, y: f64, s: f64) -> Result<f64, ProblemError> {
        let g = (self.residual)(x, y, s);
        if !g.is_finite() {
            return Err(ProblemError::NonFiniteResidual { x, y, s });
        }
        Ok(g)
    }

    /// Residual without the finiteness guard, for root scans that must be
    /// able to step over singular regions.
    pub fn residual_raw(&self, x: f64, y: f64, s: f64) -> f64 {
        (self.residual)(x, y, s)
    }

    /// Pointwise solution error of a candidate (x, y, s) triple, in units of
    /// y: F(s, x) − y when the explicit update form is attached, otherwise
    /// the raw residual G(x, y, s).
    pub fn pointwise_error(&self, x: f64, y: f64, s: f64) -> f64 {
        match &self.explicit_update {
            Some(f) => f(s, x) - y,
            None => (self.residual)(x, y, s),
        }
    }

    pub fn explicit_rhs(&self) -> Option<&Fn2> {
        self.explicit_rhs.as_ref()
    }

    pub fn reference(&self) -> Option<&ReferenceSolution> {
        self.reference.as_ref()
    }

    /// Closed-form reference evaluator, when one is attached.
    pub fn closed_form(&self) -> Option<&Fn1> {
        match &self.reference {
            Some(ReferenceSolution::ClosedForm(f)) => Some(f),
            _ => None,
        }
    }
}

/// The built-in worked problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinProblem {
    /// y′ = y on [0, 2], y(0) = 1, y(2) = e²; exact solution eˣ.
    LinearExp,
    /// −¼ y′² + 4 = y on [−1, 3], y(−1) = 3, y(3) = −5; exact solution −x² + 4.
    Parabola,
    /// y′ = x + y² on [0, 0.9], y(0) = 1, y(0.9) = 32.725; no elementary solution.
    Riccati,
}

impl BuiltinProblem {
    pub const ALL: [BuiltinProblem; 3] = [
        BuiltinProblem::LinearExp,
        BuiltinProblem::Parabola,
        BuiltinProblem::Riccati,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinProblem::LinearExp => "LINEAR_EXP",
            BuiltinProblem::Parabola => "PARABOLA",
            BuiltinProblem::Riccati => "RICCATI",
        }
    }

    /// The parameter grid step used in the original worked runs.
    pub fn default_dt(self) -> f64 {
        match self {
            BuiltinProblem::LinearExp | BuiltinProblem::Parabola => 0.1,
            BuiltinProblem::Riccati => 0.15,
        }
    }

    pub fn problem(self) -> BvpProblem {
        match self {
            BuiltinProblem::LinearExp => BvpProblem::new(
                self.name(),
                0.0,
                2.0,
                1.0,
                2f64.exp(),
                Arc::new(|_x, y, s| s - y),
            )
            .unwrap()
            .with_explicit_update(Arc::new(|s, _x| s))
            .with_explicit_rhs(Arc::new(|_x, y| y))
            .with_reference(ReferenceSolution::ClosedForm(Arc::new(f64::exp))),
            BuiltinProblem::Parabola => BvpProblem::new(
                self.name(),
                -1.0,
                3.0,
                3.0,
                -5.0,
                Arc::new(|_x, y, s| -s * s / 4.0 + 4.0 - y),
            )
            .unwrap()
            .with_explicit_update(Arc::new(|s, _x| -s * s / 4.0 + 4.0))
            // validation-only branch: on the known solution y' = -2x
            .with_explicit_rhs(Arc::new(|x, _y| -2.0 * x))
            .with_reference(ReferenceSolution::ClosedForm(Arc::new(|x| -x * x + 4.0))),
            BuiltinProblem::Riccati => BvpProblem::new(
                self.name(),
                0.0,
                0.9,
                1.0,
                32.725,
                Arc::new(|x, y, s| s - x - y * y),
            )
            .unwrap()
            .with_explicit_update(Arc::new(|s, x| (s - x).sqrt()))
            .with_explicit_rhs(Arc::new(|x, y| x + y * y))
            .with_reference(ReferenceSolution::OracleOnly),
        }
    }
}

impl FromStr for BuiltinProblem {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "linear_exp" | "linexp" | "exp" => Ok(BuiltinProblem::LinearExp),
            "parabola" => Ok(BuiltinProblem::Parabola),
            "riccati" => Ok(BuiltinProblem::Riccati),
            _ => Err(ProblemError::NotFound { name: s.to_string() }),
        }
    }
}

/// Looks up a built-in problem by name (case-insensitive).
pub fn builtin(name: &str) -> Result<BvpProblem, ProblemError> {
    Ok(BuiltinProblem::from_str(name)?.problem())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn builtin_boundary_data() {
        let p = builtin("linear_exp").unwrap();
        assert_eq!((p.a, p.b, p.y_a), (0.0, 2.0, 1.0));
        assert_eq!(p.y_b, 2f64.exp());
        let p = builtin("parabola").unwrap();
        assert_eq!((p.a, p.b, p.y_a, p.y_b), (-1.0, 3.0, 3.0, -5.0));
        let p = builtin("riccati").unwrap();
        assert_eq!((p.a, p.b, p.y_a, p.y_b), (0.0, 0.9, 1.0, 32.725));
        assert!(builtin("heat_equation").is_err());
    }

    #[test]
    fn residual_zeroes() {
        let p = builtin("linear_exp").unwrap();
        assert_eq!(p.residual_eval(0.3, 2.0, 2.0).unwrap(), 0.0);
        let p = builtin("parabola").unwrap();
        assert_eq!(p.residual_eval(1.0, 3.0, -2.0).unwrap(), 0.0);
        let p = builtin("riccati").unwrap();
        assert_eq!(p.residual_eval(0.0, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn closed_forms_satisfy_the_ode() {
        for which in ["linear_exp", "parabola"] {
            let p = builtin(which).unwrap();
            let y = p.closed_form().unwrap().clone();
            let dy = |x: f64| (y(x + 5e-7) - y(x - 5e-7)) / 1e-6;
            for k in 0..=100 {
                let x = p.a + (p.b - p.a) * k as f64 / 100.0;
                let g = p.residual_eval(x, y(x), dy(x)).unwrap();
                assert_abs_diff_eq!(g, 0.0, epsilon = 1e-5);
            }
            // boundary data round-trips through the closed form
            assert_abs_diff_eq!(y(p.a), p.y_a, epsilon = 1e-9);
            assert_abs_diff_eq!(y(p.b), p.y_b, epsilon = 1e-9);
        }
    }

    #[test]
    fn pointwise_error_prefers_explicit_form() {
        // for the Riccati equation the explicit update form measures the
        // error in y units: sqrt(s - x) - y, not s - x - y^2
        let p = builtin("riccati").unwrap();
        let e = p.pointwise_error(0.0, 1.0, 4.0);
        assert_abs_diff_eq!(e, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn nonfinite_residual_is_flagged() {
        let p = BvpProblem::new("bad", 0.0, 1.0, 0.0, 1.0, Arc::new(|_, _, _| f64::NAN)).unwrap();
        assert!(matches!(
            p.residual_eval(0.0, 0.0, 0.0),
            Err(ProblemError::NonFiniteResidual { .. })
        ));
    }
}
