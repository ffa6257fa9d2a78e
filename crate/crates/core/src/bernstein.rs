//! Bernstein basis functions, Bézier curves, and the parametric slope dy/dx.
//!
//! A curve is spawned by a [`ControlPolygon`]: an ordered list of 2D control
//! points, each tagged with the parameter value that generated it. Evaluation
//! uses the de Casteljau recursion for numerical stability; a direct
//! basis-weighted summation is provided as an independent cross-check.

use serde::Serialize;
use thiserror::Error;

/// Largest degree accepted by [`binomial`], [`basis`] and the direct-sum
/// evaluator. Floating-point binomials stay well conditioned up to here;
/// the de Casteljau path has no such limit.
pub const MAX_BINOMIAL_DEGREE: usize = 60;

/// Default relative tolerance used to flag a vanishing ψ′ in [`ControlPolygon::slope`].
pub const DEFAULT_SLOPE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BernsteinError {
    #[error("basis index {index} out of range for degree {degree}")]
    IndexOutOfRange { degree: usize, index: usize },
    #[error("degree {degree} exceeds the binomial evaluation limit {MAX_BINOMIAL_DEGREE}")]
    DegreeTooLarge { degree: usize },
    #[error("parameter {t} lies outside [0, 1]")]
    ParameterOutOfRange { t: f64 },
    #[error("control polygon needs at least 2 points, got {len}")]
    TooFewPoints { len: usize },
    #[error("invalid control polygon tags: {reason}")]
    InvalidTags { reason: String },
    #[error("singular parametrization at t = {t}: |psi'| = {magnitude:e} is below tolerance")]
    SingularParametrization { t: f64, magnitude: f64 },
}

/// A 2D point (control point or derivative control point).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// A point on a Bézier curve together with the parameter that produced it:
/// x = ψ(t), y = φ(t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

/// Binomial coefficient C(n, i) by the multiplicative recurrence, in floating
/// point. Degrees above [`MAX_BINOMIAL_DEGREE`] are rejected rather than
/// returned with degraded precision.
pub fn binomial(n: usize, i: usize) -> Result<f64, BernsteinError> {
    if n > MAX_BINOMIAL_DEGREE {
        return Err(BernsteinError::DegreeTooLarge { degree: n });
    }
    if i > n {
        return Err(BernsteinError::IndexOutOfRange { degree: n, index: i });
    }
    let i = i.min(n - i);
    let mut c = 1.0;
    for k in 0..i {
        c = c * (n - k) as f64 / (k + 1) as f64;
    }
    Ok(c)
}

fn check_parameter(t: f64) -> Result<(), BernsteinError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(BernsteinError::ParameterOutOfRange { t });
    }
    Ok(())
}

/// The i-th Bernstein polynomial of degree n at t: C(n,i) t^i (1-t)^(n-i).
pub fn basis(n: usize, i: usize, t: f64) -> Result<f64, BernsteinError> {
    check_parameter(t)?;
    let c = binomial(n, i)?;
    Ok(c * t.powi(i as i32) * (1.0 - t).powi((n - i) as i32))
}

/// All n+1 Bernstein basis values of degree n at t. The entries sum to 1.
pub fn basis_row(n: usize, t: f64) -> Result<Vec<f64>, BernsteinError> {
    (0..=n).map(|i| basis(n, i, t)).collect()
}

fn de_casteljau(points: &[Point], t: f64) -> Point {
    let mut work = points.to_vec();
    for round in 1..work.len() {
        for i in 0..work.len() - round {
            work[i] = Point {
                x: (1.0 - t) * work[i].x + t * work[i + 1].x,
                y: (1.0 - t) * work[i].y + t * work[i + 1].y,
            };
        }
    }
    work[0]
}

/// An ordered control polygon plus the generating-parameter tag of each point.
///
/// Boundary points carry tags 0 and 1; interior points record the parameter
/// at which they were created. Tags are audit metadata: curve evaluation
/// depends only on point order. When points are inserted by x position the
/// tag sequence need not stay monotone (see [`ControlPolygon::insert_by_x`]).
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPolygon {
    points: Vec<Point>,
    tags: Vec<f64>,
}

impl ControlPolygon {
    pub fn new(points: Vec<Point>, tags: Vec<f64>) -> Result<Self, BernsteinError> {
        if points.len() < 2 {
            return Err(BernsteinError::TooFewPoints { len: points.len() });
        }
        if tags.len() != points.len() {
            return Err(BernsteinError::InvalidTags {
                reason: format!("{} tags for {} points", tags.len(), points.len()),
            });
        }
        if tags.iter().any(|t| !t.is_finite() || !(0.0..=1.0).contains(t)) {
            return Err(BernsteinError::InvalidTags {
                reason: "tags must be finite and lie in [0, 1]".into(),
            });
        }
        if tags[0] != 0.0 || *tags.last().unwrap() != 1.0 {
            return Err(BernsteinError::InvalidTags {
                reason: "first tag must be 0 and last tag must be 1".into(),
            });
        }
        Ok(ControlPolygon { points, tags })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Degree of the induced Bézier curve: number of points minus one.
    pub fn degree(&self) -> usize {
        self.points.len() - 1
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn tags(&self) -> &[f64] {
        &self.tags
    }

    /// Inserts a point keeping the polygon ordered by x coordinate; the tag
    /// travels with the point as metadata.
    pub fn insert_by_x(&mut self, point: Point, tag: f64) {
        let idx = self.points.iter().filter(|p| p.x < point.x).count();
        self.points.insert(idx, point);
        self.tags.insert(idx, tag);
    }

    /// Curve point at t via the de Casteljau recursion.
    pub fn eval(&self, t: f64) -> Result<CurvePoint, BernsteinError> {
        check_parameter(t)?;
        let p = de_casteljau(&self.points, t);
        Ok(CurvePoint { t, x: p.x, y: p.y })
    }

    /// Curve point at t via the direct basis-weighted summation. Cross-check
    /// for [`ControlPolygon::eval`]; limited to degree [`MAX_BINOMIAL_DEGREE`].
    pub fn eval_direct(&self, t: f64) -> Result<CurvePoint, BernsteinError> {
        check_parameter(t)?;
        let row = basis_row(self.degree(), t)?;
        let mut x = 0.0;
        let mut y = 0.0;
        for (w, p) in row.iter().zip(&self.points) {
            x += w * p.x;
            y += w * p.y;
        }
        Ok(CurvePoint { t, x, y })
    }

    /// Hodograph control points n·(P_{i+1} − P_i); evaluating a Bézier curve
    /// over them yields (ψ′(t), φ′(t)).
    pub fn derivative_points(&self) -> Vec<Point> {
        let n = self.degree() as f64;
        self.points
            .windows(2)
            .map(|w| Point {
                x: n * (w[1].x - w[0].x),
                y: n * (w[1].y - w[0].y),
            })
            .collect()
    }

    /// (ψ′(t), φ′(t)) via the hodograph.
    pub fn derivative(&self, t: f64) -> Result<Point, BernsteinError> {
        check_parameter(t)?;
        Ok(de_casteljau(&self.derivative_points(), t))
    }

    /// The slope dy/dx = φ′(t)/ψ′(t) of the curve at parameter t.
    ///
    /// `tol` is relative to the magnitude of the ψ′ control values; a ψ′
    /// below it signals a vertical tangent or an invalid parametrization.
    pub fn slope(&self, t: f64, tol: f64) -> Result<f64, BernsteinError> {
        check_parameter(t)?;
        let hodograph = self.derivative_points();
        let scale = hodograph.iter().fold(1.0f64, |m, p| m.max(p.x.abs()));
        let d = de_casteljau(&hodograph, t);
        if d.x.abs() < tol * scale {
            return Err(BernsteinError::SingularParametrization {
                t,
                magnitude: d.x.abs(),
            });
        }
        Ok(d.y / d.x)
    }
}

/// The Bernstein approximation of degree n to a function sampled at the
/// uniform abscissas i/n: control points (i/n, f(i/n)), so that ψ(t) = t.
///
/// `samples` holds the n+1 values f(0), f(1/n), …, f(1).
pub fn bernstein_approximation(samples: &[f64]) -> Result<ControlPolygon, BernsteinError> {
    if samples.len() < 2 {
        return Err(BernsteinError::TooFewPoints {
            len: samples.len(),
        });
    }
    let n = (samples.len() - 1) as f64;
    let points = samples
        .iter()
        .enumerate()
        .map(|(i, &f)| Point { x: i as f64 / n, y: f })
        .collect::<Vec<_>>();
    let tags = points.iter().map(|p| p.x).collect();
    ControlPolygon::new(points, tags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn quadratic() -> ControlPolygon {
        ControlPolygon::new(
            vec![Point::new(-1.0, 3.0), Point::new(1.0, 7.0), Point::new(3.0, -5.0)],
            vec![0.0, 0.5, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 0).unwrap(), 1.0);
        assert_eq!(binomial(5, 2).unwrap(), 10.0);
        assert_eq!(binomial(8, 4).unwrap(), 70.0);
        assert!(matches!(
            binomial(61, 1),
            Err(BernsteinError::DegreeTooLarge { degree: 61 })
        ));
        assert!(matches!(
            binomial(4, 5),
            Err(BernsteinError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn basis_values() {
        assert_abs_diff_eq!(basis(2, 1, 0.5).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(basis(5, 0, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(basis(3, 2, 0.4).unwrap(), 0.288, epsilon = 1e-15);
        assert!(basis(2, 1, 1.5).is_err());
    }

    #[test]
    fn basis_row_values() {
        let row = basis_row(1, 0.3).unwrap();
        assert_abs_diff_eq!(row[0], 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(row[1], 0.3, epsilon = 1e-15);
        let row = basis_row(2, 0.5).unwrap();
        assert_eq!(row, vec![0.25, 0.5, 0.25]);
        let sum: f64 = basis_row(4, 0.637).unwrap().iter().sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eval_endpoints_and_midpoint() {
        let poly = quadratic();
        let p0 = poly.eval(0.0).unwrap();
        assert_eq!((p0.x, p0.y), (-1.0, 3.0));
        let p1 = poly.eval(1.0).unwrap();
        assert_eq!((p1.x, p1.y), (3.0, -5.0));
        // psi = -1 + 4t, phi = 3 + 8t - 16t^2
        let mid = poly.eval(0.5).unwrap();
        assert_abs_diff_eq!(mid.x, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(mid.y, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn eval_straight_segment() {
        let seg = ControlPolygon::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0)],
            vec![0.0, 1.0],
        )
        .unwrap();
        let p = seg.eval(0.25).unwrap();
        assert_abs_diff_eq!(p.x, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn derivative_points_hodograph() {
        let seg = ControlPolygon::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0)],
            vec![0.0, 1.0],
        )
        .unwrap();
        assert_eq!(seg.derivative_points(), vec![Point::new(1.0, 1.0)]);
        assert_eq!(
            quadratic().derivative_points(),
            vec![Point::new(4.0, 8.0), Point::new(4.0, -24.0)]
        );
    }

    #[test]
    fn slope_values() {
        let seg = ControlPolygon::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0)],
            vec![0.0, 1.0],
        )
        .unwrap();
        assert_abs_diff_eq!(seg.slope(0.5, DEFAULT_SLOPE_TOLERANCE).unwrap(), 1.0);
        // matches y'(-1) of y = -x^2 + 4
        assert_abs_diff_eq!(
            quadratic().slope(0.0, DEFAULT_SLOPE_TOLERANCE).unwrap(),
            2.0,
            epsilon = 1e-14
        );
        let vertical = ControlPolygon::new(
            vec![Point::new(0.0, 0.0), Point::new(0.0, 1.0)],
            vec![0.0, 1.0],
        )
        .unwrap();
        assert!(matches!(
            vertical.slope(0.3, DEFAULT_SLOPE_TOLERANCE),
            Err(BernsteinError::SingularParametrization { .. })
        ));
    }

    #[test]
    fn approximation_constant_and_identity() {
        let ones = bernstein_approximation(&[1.0; 4]).unwrap();
        let ident = bernstein_approximation(&[0.0, 0.5, 1.0]).unwrap();
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            assert_abs_diff_eq!(ones.eval(t).unwrap().y, 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(ident.eval(t).unwrap().y, t, epsilon = 1e-14);
        }
    }

    #[test]
    fn approximation_of_exp_improves_with_degree() {
        let sup_error = |n: usize| {
            let samples: Vec<f64> = (0..=n).map(|i| (i as f64 / n as f64).exp()).collect();
            let poly = bernstein_approximation(&samples).unwrap();
            (0..=100)
                .map(|k| {
                    let t = k as f64 / 100.0;
                    (poly.eval(t).unwrap().y - t.exp()).abs()
                })
                .fold(0.0f64, f64::max)
        };
        assert!(sup_error(40) < sup_error(10));
    }

    #[test]
    fn insert_by_x_keeps_x_order() {
        let mut poly = quadratic();
        poly.insert_by_x(Point::new(0.0, 5.0), 0.25);
        poly.insert_by_x(Point::new(2.0, 1.0), 0.75);
        let xs: Vec<f64> = poly.points().iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![-1.0, 0.0, 1.0, 2.0, 3.0]);
        assert_eq!(poly.tags(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(ControlPolygon::new(vec![Point::new(0.0, 0.0)], vec![0.0]).is_err());
        assert!(ControlPolygon::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0)],
            vec![0.5, 1.0]
        )
        .is_err());
        assert!(ControlPolygon::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0)],
            vec![0.0, 2.0]
        )
        .is_err());
    }
}
