//! Polyline geometry: point-to-segment distances, dense resampling, and
//! Hausdorff distances between sampled curves (used to compare computed
//! invariant curves against reference shapes).

use crate::cone::Point;

/// Euclidean distance from `p` to the segment `[a, b]` (any dimension).
pub fn point_segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let n = p.dim();
    assert!(a.dim() == n && b.dim() == n, "dimension mismatch");
    let mut vv = 0.0;
    let mut pv = 0.0;
    for i in 0..n {
        let v = b[i] - a[i];
        vv += v * v;
        pv += (p[i] - a[i]) * v;
    }
    let t = if vv == 0.0 { 0.0 } else { (pv / vv).clamp(0.0, 1.0) };
    let mut d2 = 0.0;
    for i in 0..n {
        let c = a[i] + t * (b[i] - a[i]);
        let d = p[i] - c;
        d2 += d * d;
    }
    d2.sqrt()
}

/// Minimum Euclidean distance from `p` to a polyline (a single point is a
/// degenerate polyline).
pub fn distance_to_polyline(p: &Point, poly: &[Point]) -> f64 {
    assert!(!poly.is_empty(), "empty polyline");
    if poly.len() == 1 {
        return point_segment_distance(p, &poly[0], &poly[0]);
    }
    poly.windows(2)
        .map(|w| point_segment_distance(p, &w[0], &w[1]))
        .fold(f64::INFINITY, f64::min)
}

fn euclid(a: &Point, b: &Point) -> f64 {
    (0..a.dim())
        .map(|i| (a[i] - b[i]) * (a[i] - b[i]))
        .sum::<f64>()
        .sqrt()
}

/// Densifies a polyline so consecutive output points are at most `step`
/// apart; all original vertices are retained.
pub fn resample_polyline(poly: &[Point], step: f64) -> Vec<Point> {
    assert!(step > 0.0 && step.is_finite(), "bad resampling step");
    assert!(!poly.is_empty(), "empty polyline");
    let mut out = vec![poly[0].clone()];
    for w in poly.windows(2) {
        let len = euclid(&w[0], &w[1]);
        let subs = (len / step).ceil().max(1.0) as usize;
        for j in 1..=subs {
            let t = j as f64 / subs as f64;
            let coords: Vec<f64> = (0..w[0].dim())
                .map(|i| w[0][i] + t * (w[1][i] - w[0][i]))
                .collect();
            out.push(Point::new(coords).expect("interpolant of finite points"));
        }
    }
    out
}

/// Directed Hausdorff distance: the farthest that any point of `a`
/// (resampled at `step`) lies from the polyline `b`.
pub fn directed_hausdorff(a: &[Point], b: &[Point], step: f64) -> f64 {
    resample_polyline(a, step)
        .iter()
        .map(|p| distance_to_polyline(p, b))
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between two polylines, with both sides
/// densely resampled at `step`.
pub fn hausdorff_distance(a: &[Point], b: &[Point], step: f64) -> f64 {
    directed_hausdorff(a, b, step).max(directed_hausdorff(b, a, step))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pl(coords: &[(f64, f64)]) -> Vec<Point> {
        coords.iter().map(|&(x, y)| Point::planar(x, y)).collect()
    }

    #[test]
    fn segment_distance_cases() {
        let a = Point::planar(0.0, 0.0);
        let b = Point::planar(2.0, 0.0);
        // Perpendicular foot inside the segment.
        assert_eq!(point_segment_distance(&Point::planar(1.0, 1.0), &a, &b), 1.0);
        // Clamped to an endpoint.
        let d = point_segment_distance(&Point::planar(3.0, 1.0), &a, &b);
        assert!((d - 2.0f64.sqrt()).abs() <= 1e-15);
        // Degenerate segment behaves like a point.
        assert_eq!(point_segment_distance(&Point::planar(0.0, 3.0), &a, &a), 3.0);
    }

    #[test]
    fn polyline_distance_picks_the_nearest_segment() {
        let poly = pl(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]);
        assert_eq!(distance_to_polyline(&Point::planar(0.5, -0.25), &poly), 0.25);
        assert_eq!(distance_to_polyline(&Point::planar(1.5, 0.5), &poly), 0.5);
        // Single-point polyline.
        assert_eq!(
            distance_to_polyline(&Point::planar(0.0, 2.0), &[Point::planar(0.0, 0.0)]),
            2.0
        );
    }

    #[test]
    fn resampling_respects_the_step_and_keeps_vertices() {
        let poly = pl(&[(0.0, 0.0), (1.0, 0.0)]);
        let dense = resample_polyline(&poly, 0.25);
        assert_eq!(dense.len(), 5);
        assert_eq!(dense[0].as_slice(), &[0.0, 0.0]);
        assert_eq!(dense[4].as_slice(), &[1.0, 0.0]);
        for w in dense.windows(2) {
            assert!(euclid(&w[0], &w[1]) <= 0.25 + 1e-15);
        }
    }

    #[test]
    fn hausdorff_reference_values() {
        let l_shape = pl(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]);
        let diagonal = pl(&[(0.0, 0.0), (1.0, 1.0)]);
        // Identical polylines coincide.
        assert_eq!(hausdorff_distance(&l_shape, &l_shape, 0.01), 0.0);
        // The corner (1, 0) is the extremal point at distance sqrt(1/2).
        let d = hausdorff_distance(&l_shape, &diagonal, 0.01);
        assert!((d - 0.5f64.sqrt()).abs() <= 1e-12);
        // Parallel offset segments.
        let low = pl(&[(0.0, 0.0), (1.0, 0.0)]);
        let high = pl(&[(0.0, 0.5), (1.0, 0.5)]);
        assert!((hausdorff_distance(&low, &high, 0.01) - 0.5).abs() <= 1e-12);
    }
}
