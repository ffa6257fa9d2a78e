//! Shared fixtures for the criterion benchmarks.

use bezier_bvp::{ControlPolygon, Point};

/// A polygon of the given size with points on a gentle oscillation, tagged
/// uniformly.
pub fn oscillating_polygon(len: usize) -> ControlPolygon {
    assert!(len >= 2);
    let n = (len - 1) as f64;
    let points = (0..len)
        .map(|i| {
            let t = i as f64 / n;
            Point::new(t, (6.0 * t).sin() + 0.5 * t)
        })
        .collect();
    let tags = (0..len).map(|i| i as f64 / n).collect();
    ControlPolygon::new(points, tags).unwrap()
}
