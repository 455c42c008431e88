//! Fixed-point catalog for planar maps: the origin, the two axial points
//! (one on each positive half-axis), and the interior points found as
//! intersections of the two growth nullclines `f_i = 1`. Each point is
//! classified from the eigenvalues of the full Jacobian with explicit
//! hyperbolicity margins.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::cone::{compare, ConeRel, Point, Sign};
use crate::linalg::{LinalgError, Mat};
use crate::map::{KolmogorovMap, MapError};

/// Hyperbolicity margin on `|lambda| - 1`: classifications are only issued
/// when every eigenvalue clears the unit circle by this much.
pub const CLASSIFICATION_MARGIN: f64 = 1e-9;

/// Deduplication radius for interior roots (∞-norm).
pub const DEDUP_RADIUS: f64 = 1e-8;

/// More sign changes than this along one nullcline means the nullclines
/// nearly coincide; the configuration is reported instead of enumerated.
pub const DEGENERACY_LIMIT: usize = 10;

/// Default number of nullcline samples.
pub const DEFAULT_NULLCLINE_SAMPLES: usize = 65;

#[derive(Debug, Error)]
pub enum FixedPointError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(
        "no axial fixed point bracket on axis {axis}: the growth function is \
         {value_at_far_end} at the far face (expected below 1, which the box \
         hypotheses guarantee)"
    )]
    NoAxialBracket { axis: usize, value_at_far_end: f64 },
    #[error(
        "degenerate nullcline configuration: {crossings} crossings detected along one \
         nullcline, the two curves nearly coincide on a section; refusing to enumerate \
         a continuum of fixed points"
    )]
    Degenerate { crossings: usize },
    #[error("fixed-point cataloging requires a planar map (dim = 2), got dim = {0}")]
    NotPlanar(usize),
    #[error("eigenvalue computation failed at {point:?}: {source}")]
    Eigen {
        point: Vec<f64>,
        source: LinalgError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FixedPointKind {
    #[serde(rename = "origin")]
    Origin,
    #[serde(rename = "axial-1")]
    Axial1,
    #[serde(rename = "axial-2")]
    Axial2,
    #[serde(rename = "interior")]
    Interior,
}

impl std::fmt::Display for FixedPointKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FixedPointKind::Origin => "origin",
            FixedPointKind::Axial1 => "axial-1",
            FixedPointKind::Axial2 => "axial-2",
            FixedPointKind::Interior => "interior",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    #[serde(rename = "repeller")]
    Repeller,
    #[serde(rename = "attractor")]
    Attractor,
    #[serde(rename = "saddle")]
    Saddle,
    #[serde(rename = "nonhyperbolic")]
    Nonhyperbolic,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Repeller => "repeller",
            Classification::Attractor => "attractor",
            Classification::Saddle => "saddle",
            Classification::Nonhyperbolic => "nonhyperbolic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexVal {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexVal {
    fn from(z: Complex64) -> Self {
        ComplexVal { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointRecord {
    pub location: Vec<f64>,
    /// `‖T(location) - location‖_∞`.
    pub residual: f64,
    pub kind: FixedPointKind,
    pub eigenvalues: [ComplexVal; 2],
    pub classification: Classification,
    /// Unit eigenvector of the expanding eigenvalue, oriented into the
    /// interior; present exactly for saddles.
    pub unstable_direction: Option<Vec<f64>>,
    /// Set when Newton refinement failed and a coarse bracketing root was
    /// retained; such records do not meet the usual residual bound.
    pub low_precision: bool,
}

impl FixedPointRecord {
    pub fn point(&self) -> Point {
        Point::from_slice(&self.location).expect("records hold finite locations")
    }
}

fn residual_at(map: &KolmogorovMap, x: &[f64]) -> Result<f64, FixedPointError> {
    let p = Point::from_slice(x).expect("finite location");
    let t = map.apply(&p)?;
    Ok((0..x.len())
        .map(|i| (t[i] - x[i]).abs())
        .fold(0.0, f64::max))
}

/// Eigen-classification of a fixed point from the full Jacobian `DT`.
fn classify(
    map: &KolmogorovMap,
    location: &[f64],
    kind: FixedPointKind,
    low_precision: bool,
) -> Result<FixedPointRecord, FixedPointError> {
    let p = Point::from_slice(location).expect("finite location");
    let dt = map.jacobian(&p)?;
    let eig = dt.eigenvalues2().map_err(|source| FixedPointError::Eigen {
        point: location.to_vec(),
        source,
    })?;
    let moduli = [eig[0].norm(), eig[1].norm()];
    let above = |m: f64| m > 1.0 + CLASSIFICATION_MARGIN;
    let below = |m: f64| m < 1.0 - CLASSIFICATION_MARGIN;
    let classification = if moduli.iter().all(|&m| below(m)) {
        Classification::Attractor
    } else if moduli.iter().all(|&m| above(m)) {
        Classification::Repeller
    } else if (above(moduli[0]) && below(moduli[1])) || (below(moduli[0]) && above(moduli[1])) {
        Classification::Saddle
    } else {
        Classification::Nonhyperbolic
    };
    let unstable_direction = if classification == Classification::Saddle {
        // The expanding eigenvalue of a real split pair is real.
        let lambda = if moduli[0] > moduli[1] { eig[0] } else { eig[1] };
        let v = unstable_vector(&dt, lambda.re, location)?;
        Some(v)
    } else {
        None
    };
    Ok(FixedPointRecord {
        location: location.to_vec(),
        residual: residual_at(map, location)?,
        kind,
        eigenvalues: [eig[0].into(), eig[1].into()],
        classification,
        unstable_direction,
        low_precision,
    })
}

fn unstable_vector(
    dt: &Mat,
    lambda: f64,
    location: &[f64],
) -> Result<Vec<f64>, FixedPointError> {
    dt.eigenvector2(lambda)
        .map(|v| v.to_vec())
        .map_err(|source| FixedPointError::Eigen {
            point: location.to_vec(),
            source,
        })
}

/// The origin's record: its Jacobian is diagonal with entries `f(0)`.
pub fn origin_record(map: &KolmogorovMap) -> Result<FixedPointRecord, FixedPointError> {
    if map.dim() != 2 {
        return Err(FixedPointError::NotPlanar(map.dim()));
    }
    classify(map, &[0.0, 0.0], FixedPointKind::Origin, false)
}

/// Scalar bisection for `phi(t) = 0` on a bracket with `phi(lo) > 0 > phi(hi)`.
fn bisect<E>(
    mut phi: impl FnMut(f64) -> Result<f64, E>,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
) -> Result<f64, E> {
    let mut flo = phi(lo)?;
    while hi - lo > xtol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // resolution limit
        }
        let fm = phi(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Finds the axial fixed points: on each positive half-axis the growth
/// function starts above 1 (repelling origin) and ends below 1 at the box
/// face (forward invariance), so a unique crossing exists by monotonicity.
/// Located by bisection to 1e-14 followed by a guarded scalar Newton polish.
pub fn find_axial_fixed_points(
    map: &KolmogorovMap,
) -> Result<Vec<FixedPointRecord>, FixedPointError> {
    if map.dim() != 2 {
        return Err(FixedPointError::NotPlanar(map.dim()));
    }
    let r = map.r();
    let mut out = Vec::new();
    for axis in 0..2 {
        let embed = |t: f64| {
            if axis == 0 {
                Point::planar(t, 0.0)
            } else {
                Point::planar(0.0, t)
            }
        };
        let phi = |t: f64| -> Result<f64, FixedPointError> {
            Ok(map.growth(&embed(t))?[axis] - 1.0)
        };
        let at_far = phi(r[axis])?;
        if phi(0.0)? <= 0.0 || at_far >= 0.0 {
            return Err(FixedPointError::NoAxialBracket {
                axis: axis + 1,
                value_at_far_end: at_far + 1.0,
            });
        }
        let mut q = bisect(phi, 0.0, r[axis], 1e-14)?;
        // Newton polish on psi(t) = T_axis(t e_axis) - t, accepting only
        // residual improvements.
        let psi = |t: f64| -> Result<f64, FixedPointError> {
            Ok(map.apply(&embed(t))?[axis] - t)
        };
        let mut best = psi(q)?.abs();
        for _ in 0..5 {
            let p = embed(q);
            let dpsi = map.jacobian(&p)?.get(axis, axis) - 1.0;
            if dpsi == 0.0 {
                break;
            }
            let trial = q - psi(q)? / dpsi;
            if !trial.is_finite() || trial < 0.0 {
                break;
            }
            let tr = psi(trial)?.abs();
            if tr < best {
                q = trial;
                best = tr;
            } else {
                break;
            }
        }
        let loc = if axis == 0 { [q, 0.0] } else { [0.0, q] };
        let kind = if axis == 0 {
            FixedPointKind::Axial1
        } else {
            FixedPointKind::Axial2
        };
        out.push(classify(map, &loc, kind, false)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NullclineId {
    #[serde(rename = "first")]
    First,
    #[serde(rename = "second")]
    Second,
}

/// A sampled growth nullcline `{f_i = 1}`, parameterized as a graph over
/// one coordinate (grid samples with no root in the box are omitted).
#[derive(Debug, Clone, Serialize)]
pub struct NullclinePolyline {
    pub which: NullclineId,
    pub samples: Vec<Point>,
    /// Index of the graph (parameter) coordinate: the second coordinate for
    /// the first nullcline, the first coordinate for the second.
    pub graph_var: usize,
}

/// Traces a nullcline as a graph: for the first nullcline, each grid value
/// of the second coordinate is paired with the unique root of
/// `f_1(., x2) = 1`, which exists and is unique by the sign structure
/// (strict decrease in the first argument).
pub fn trace_nullcline(
    map: &KolmogorovMap,
    which: NullclineId,
    n_samples: usize,
) -> Result<NullclinePolyline, FixedPointError> {
    if map.dim() != 2 {
        return Err(FixedPointError::NotPlanar(map.dim()));
    }
    assert!(n_samples >= 2, "need at least 2 samples");
    let r = map.r();
    // comp: which growth function; solve_var: the coordinate solved for;
    // graph_var: the coordinate swept along the grid.
    let (comp, solve_var, graph_var) = match which {
        NullclineId::First => (0usize, 0usize, 1usize),
        NullclineId::Second => (1usize, 1usize, 0usize),
    };
    let mut samples = Vec::new();
    for m in 0..n_samples {
        let t = r[graph_var] * m as f64 / (n_samples - 1) as f64;
        let assemble = |s: f64| {
            let mut c = [0.0; 2];
            c[solve_var] = s;
            c[graph_var] = t;
            Point::planar(c[0], c[1])
        };
        let phi = |s: f64| -> Result<f64, FixedPointError> {
            Ok(map.growth(&assemble(s))?[comp] - 1.0)
        };
        let lo = phi(0.0)?;
        let hi = phi(r[solve_var])?;
        // Monotone decreasing in the solved coordinate: a root needs a sign
        // change across the box; otherwise this grid line misses the curve.
        if !(lo > 0.0 && hi < 0.0) {
            if lo == 0.0 {
                samples.push(assemble(0.0));
            }
            continue;
        }
        let root = bisect(phi, 0.0, r[solve_var], 1e-13)?;
        samples.push(assemble(root));
    }
    Ok(NullclinePolyline {
        which,
        samples,
        graph_var,
    })
}

/// Interior fixed points: sign changes of `f_2 - 1` along the first
/// nullcline, refined by damped 2-D Newton on `(f_1 - 1, f_2 - 1)` to
/// residual 1e-13, deduplicated within [`DEDUP_RADIUS`], and sorted by the
/// first coordinate (distinct interior fixed points are totally ordered).
pub fn find_interior_fixed_points(
    map: &KolmogorovMap,
    n_samples: usize,
) -> Result<Vec<FixedPointRecord>, FixedPointError> {
    if map.dim() != 2 {
        return Err(FixedPointError::NotPlanar(map.dim()));
    }
    let curve = trace_nullcline(map, NullclineId::First, n_samples)?;
    let h = |p: &Point| -> Result<f64, FixedPointError> { Ok(map.growth(p)?[1] - 1.0) };

    // Collect crossing seeds; count them first for degeneracy detection.
    let mut seeds: Vec<Point> = Vec::new();
    let mut values = Vec::with_capacity(curve.samples.len());
    for p in &curve.samples {
        values.push(h(p)?);
    }
    for (i, p) in curve.samples.iter().enumerate() {
        if values[i] == 0.0 {
            seeds.push(p.clone());
        } else if i + 1 < curve.samples.len()
            && values[i + 1] != 0.0
            && (values[i] > 0.0) != (values[i + 1] > 0.0)
        {
            let q = &curve.samples[i + 1];
            seeds.push(Point::planar(
                0.5 * (p[0] + q[0]),
                0.5 * (p[1] + q[1]),
            ));
        }
    }
    if seeds.len() > DEGENERACY_LIMIT {
        return Err(FixedPointError::Degenerate {
            crossings: seeds.len(),
        });
    }

    let mut found: Vec<(Vec<f64>, bool)> = Vec::new();
    for seed in &seeds {
        match newton_on_growth(map, seed) {
            Ok(root) => found.push((root, false)),
            Err(NewtonOutcome::Diverged) => {
                // Retain the coarse crossing with a low-precision tag.
                found.push((seed.as_slice().to_vec(), true));
            }
            Err(NewtonOutcome::Error(e)) => return Err(e),
        }
    }

    // Interior only: discard roots that collapsed onto the boundary (those
    // are the axial points or the origin, cataloged separately).
    found.retain(|(loc, _)| loc.iter().all(|&v| v > 1e-9));
    // Deduplicate.
    let mut unique: Vec<(Vec<f64>, bool)> = Vec::new();
    for (loc, low) in found {
        let dup = unique.iter().any(|(u, _)| {
            (0..2).map(|i| (u[i] - loc[i]).abs()).fold(0.0, f64::max) <= DEDUP_RADIUS
        });
        if !dup {
            unique.push((loc, low));
        }
    }
    unique.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]));

    let mut out = Vec::new();
    for (loc, low) in unique {
        out.push(classify(map, &loc, FixedPointKind::Interior, low)?);
    }
    Ok(out)
}

enum NewtonOutcome {
    Diverged,
    Error(FixedPointError),
}

/// Damped 2-D Newton on `(f_1 - 1, f_2 - 1)` from a crossing seed.
fn newton_on_growth(map: &KolmogorovMap, seed: &Point) -> Result<Vec<f64>, NewtonOutcome> {
    let err = NewtonOutcome::Error;
    let mut x = [seed[0], seed[1]];
    let eval = |x: &[f64; 2]| -> Result<[f64; 2], NewtonOutcome> {
        let p = Point::planar(x[0], x[1]);
        let f = map.growth(&p).map_err(|e| err(e.into()))?;
        Ok([f[0] - 1.0, f[1] - 1.0])
    };
    let norm = |v: &[f64; 2]| v[0].abs().max(v[1].abs());
    let mut fv = eval(&x)?;
    let mut res = norm(&fv);
    for _ in 0..80 {
        if res <= 1e-13 {
            return Ok(x.to_vec());
        }
        let p = Point::planar(x[0], x[1]);
        let jac = map.growth_jacobian(&p).map_err(|e| err(e.into()))?;
        let step = match jac.solve(&[fv[0], fv[1]]) {
            Ok(d) => d,
            Err(_) => return Err(NewtonOutcome::Diverged),
        };
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let trial = [
                (x[0] - alpha * step[0]).max(0.0),
                (x[1] - alpha * step[1]).max(0.0),
            ];
            let tfv = eval(&trial)?;
            let tres = norm(&tfv);
            if tres < res {
                x = trial;
                fv = tfv;
                res = tres;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if res <= 1e-13 {
        Ok(x.to_vec())
    } else {
        Err(NewtonOutcome::Diverged)
    }
}

/// Complete catalog: origin, both axial points, then interior points in
/// increasing order of the first coordinate.
pub fn find_all_fixed_points(
    map: &KolmogorovMap,
    n_samples: usize,
) -> Result<Vec<FixedPointRecord>, FixedPointError> {
    let mut out = vec![origin_record(map)?];
    out.extend(find_axial_fixed_points(map)?);
    out.extend(find_interior_fixed_points(map, n_samples)?);
    Ok(out)
}

/// Verifies that distinct interior records are pairwise strictly ordered in
/// the interior of the component order, as the theory demands. Returns the
/// first unordered pair, if any.
pub fn unordered_interior_pair<'a>(
    map: &KolmogorovMap,
    records: &'a [FixedPointRecord],
) -> Option<(&'a FixedPointRecord, &'a FixedPointRecord)> {
    let interior: Vec<&FixedPointRecord> = records
        .iter()
        .filter(|r| r.kind == FixedPointKind::Interior)
        .collect();
    for i in 0..interior.len() {
        for j in i + 1..interior.len() {
            let a = interior[i].point();
            let b = interior[j].point();
            let rel = compare(&a, &b, map.split(), 1e-12).expect("planar records");
            if !matches!(rel.c, ConeRel::Ll(Sign::Up) | ConeRel::Ll(Sign::Down)) {
                return Some((interior[i], interior[j]));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::EXAMPLE1_NAME;
    use std::collections::BTreeMap;

    fn example1(a: f64, b: f64) -> KolmogorovMap {
        let mut overrides = BTreeMap::new();
        overrides.insert("a".to_string(), a);
        overrides.insert("b".to_string(), b);
        KolmogorovMap::builtin(EXAMPLE1_NAME, &overrides).unwrap()
    }

    /// Independent oracle: root of `(s-1)^3 + a(s-1) + 1 = 0` in `(0, 1)`
    /// by direct bisection on the cubic.
    fn axial_root_oracle(a: f64) -> f64 {
        let cubic = |s: f64| {
            let t = s - 1.0;
            t * t * t + a * t + 1.0
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        assert!(cubic(lo) < 0.0 && cubic(hi) > 0.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if cubic(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn axial_points_match_the_cubic_oracle() {
        for a in [1.0, 0.75, 1.5] {
            let map = example1(a, 0.05);
            let axials = find_axial_fixed_points(&map).unwrap();
            assert_eq!(axials.len(), 2);
            let s0 = axial_root_oracle(a);
            let q1 = &axials[0];
            let q2 = &axials[1];
            assert!((q1.location[0] - s0).abs() <= 1e-12, "a={a}");
            assert_eq!(q1.location[1], 0.0);
            // Symmetric map: the second axial point mirrors the first.
            assert!((q2.location[1] - q1.location[0]).abs() <= 1e-13);
            assert_eq!(q2.location[0], 0.0);
            for q in [q1, q2] {
                assert_eq!(q.classification, Classification::Saddle, "a={a}");
                assert!(q.residual <= 1e-12 * (1.0 + s0));
            }
            // Transverse expanding eigenvalue equals the other component's
            // growth rate at the point.
            let f = map.growth(&q1.point()).unwrap();
            let max_mod = q1
                .eigenvalues
                .iter()
                .map(|z| (z.re * z.re + z.im * z.im).sqrt())
                .fold(0.0f64, f64::max);
            assert!((max_mod - f[1]).abs() <= 1e-9);
            assert!(f[1] > 1.0 + 1e-6);
            // Unstable direction points into the interior.
            let v = q1.unstable_direction.as_ref().unwrap();
            assert!(v[1] > 0.0 && v[0] >= -1e-12);
        }
        // Frozen hand-computed root for the reference parameters.
        let map = example1(1.0, 0.05);
        let q1 = &find_axial_fixed_points(&map).unwrap()[0];
        assert!((q1.location[0] - 0.317_672_196_171_980_67).abs() <= 1e-12);
    }

    #[test]
    fn origin_is_a_repeller_with_growth_eigenvalues() {
        let map = example1(1.0, 0.05);
        let rec = origin_record(&map).unwrap();
        assert_eq!(rec.classification, Classification::Repeller);
        assert_eq!(rec.residual, 0.0);
        let f0 = 1.0 + 0.05 * 1.0f64.atan();
        for z in rec.eigenvalues {
            assert!((z.re - f0).abs() <= 1e-14 && z.im == 0.0);
        }
    }

    #[test]
    fn nullcline_matches_the_closed_form_graph() {
        let map = example1(1.0, 0.05);
        let curve = trace_nullcline(&map, NullclineId::First, 65).unwrap();
        assert!(curve.samples.len() > 30);
        for p in &curve.samples {
            // On-curve residual.
            let f = map.growth(p).unwrap();
            assert!((f[0] - 1.0).abs() <= 1e-10);
            // The curve is the graph x2 = 1 + a(x1-1) + (x1-1)^3.
            let t = p[0] - 1.0;
            let expect = 1.0 + t + t * t * t;
            assert!((p[1] - expect).abs() <= 1e-10);
        }
        // Monotone nondecreasing in both coordinates.
        for w in curve.samples.windows(2) {
            assert!(w[1][0] >= w[0][0] - 1e-12 && w[1][1] >= w[0][1] - 1e-12);
        }
        // The second nullcline mirrors the first across the diagonal.
        let mirror = trace_nullcline(&map, NullclineId::Second, 65).unwrap();
        assert_eq!(mirror.samples.len(), curve.samples.len());
        for (p, q) in curve.samples.iter().zip(&mirror.samples) {
            assert!((p[0] - q[1]).abs() <= 1e-13 && (p[1] - q[0]).abs() <= 1e-13);
        }
    }

    #[test]
    fn interior_catalog_single_attractor_case() {
        let map = example1(1.5, 0.05);
        let interior = find_interior_fixed_points(&map, 65).unwrap();
        assert_eq!(interior.len(), 1);
        let p = &interior[0];
        assert!((p.location[0] - 1.0).abs() <= 1e-12 && (p.location[1] - 1.0).abs() <= 1e-12);
        assert_eq!(p.classification, Classification::Attractor);
        // Hand-derived eigenvalues at the coexistence point: 1 - b(a -+ 1).
        let mut mods: Vec<f64> = p.eigenvalues.iter().map(|z| z.re).collect();
        mods.sort_by(f64::total_cmp);
        assert!((mods[0] - 0.875).abs() <= 1e-9);
        assert!((mods[1] - 0.975).abs() <= 1e-9);
        assert!(p.eigenvalues.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn interior_catalog_bistable_case() {
        let map = example1(0.75, 0.05);
        let interior = find_interior_fixed_points(&map, 65).unwrap();
        assert_eq!(interior.len(), 3);
        // Locations are 1 - sqrt(1-a), 1, 1 + sqrt(1-a) on the diagonal:
        // exactly 0.5, 1.0, 1.5 for a = 0.75.
        let expected = [0.5, 1.0, 1.5];
        for (rec, &u) in interior.iter().zip(&expected) {
            assert!(
                (rec.location[0] - u).abs() <= 1e-10 && (rec.location[1] - u).abs() <= 1e-10,
                "expected ({u},{u}), got {:?}",
                rec.location
            );
            assert!(rec.residual <= 1e-12 * (1.0 + u));
            assert!(!rec.low_precision);
        }
        assert_eq!(interior[0].classification, Classification::Attractor);
        assert_eq!(interior[1].classification, Classification::Saddle);
        assert_eq!(interior[2].classification, Classification::Attractor);
        // Hand-derived spectrum at the outer attractor.
        let mut mods: Vec<f64> = interior[0].eigenvalues.iter().map(|z| z.re).collect();
        mods.sort_by(f64::total_cmp);
        assert!((mods[0] - 0.9375).abs() <= 1e-9 && (mods[1] - 0.9875).abs() <= 1e-9);
        // The interior saddle's unstable direction runs along the diagonal.
        let v = interior[1].unstable_direction.as_ref().unwrap();
        assert!((v[0] - v[1]).abs() <= 1e-9 && v[1] > 0.0);
        // All interior pairs are strictly ordered componentwise.
        let all = find_all_fixed_points(&map, 65).unwrap();
        assert!(unordered_interior_pair(&map, &all).is_none());
    }

    #[test]
    fn full_catalog_counts_and_kinds() {
        let map = example1(1.5, 0.05);
        let all = find_all_fixed_points(&map, 65).unwrap();
        assert_eq!(all.len(), 4);
        let kinds: Vec<FixedPointKind> = all.iter().map(|r| r.kind).collect();
        assert_eq!(
            kinds,
            vec![
                FixedPointKind::Origin,
                FixedPointKind::Axial1,
                FixedPointKind::Axial2,
                FixedPointKind::Interior
            ]
        );
        for rec in &all {
            let scale = 1.0 + rec.location.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(rec.residual <= 1e-12 * scale);
        }
        let all = find_all_fixed_points(&example1(0.75, 0.05), 65).unwrap();
        assert_eq!(all.len(), 6);
    }

    #[test]
    fn borderline_eigenvalue_is_reported_nonhyperbolic() {
        // At a = 1 the coexistence point has an eigenvalue of exactly 1:
        // the classifier must refuse to call it attracting or saddle.
        let map = example1(1.0, 0.05);
        let interior = find_interior_fixed_points(&map, 65).unwrap();
        assert_eq!(interior.len(), 1);
        assert_eq!(interior[0].classification, Classification::Nonhyperbolic);
        let max_re = interior[0]
            .eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((max_re - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn coincident_nullclines_are_a_reported_degeneracy() {
        let map = KolmogorovMap::from_source(
            "dim = 2\nsplit_k = 1\nr = (2, 2)\nf1 = 1 + 0.1*atan(1 - x1 - x2)\nf2 = 1 + 0.1*atan(1 - x1 - x2)\n",
            &BTreeMap::new(),
        )
        .unwrap();
        match find_interior_fixed_points(&map, 65) {
            Err(FixedPointError::Degenerate { crossings }) => {
                assert!(crossings > DEGENERACY_LIMIT)
            }
            other => panic!("expected degeneracy, got {other:?}"),
        }
    }

    #[test]
    fn missing_axial_bracket_is_a_hypothesis_violation() {
        let map = KolmogorovMap::from_source(
            "dim = 2\nsplit_k = 1\nr = (1, 1)\nf1 = 2 - 0.4*x1\nf2 = 2 - 0.4*x2\n",
            &BTreeMap::new(),
        )
        .unwrap();
        match find_axial_fixed_points(&map) {
            Err(FixedPointError::NoAxialBracket {
                axis,
                value_at_far_end,
            }) => {
                assert_eq!(axis, 1);
                assert!((value_at_far_end - 1.6).abs() <= 1e-12);
            }
            other => panic!("expected bracket failure, got {other:?}"),
        }
    }
}
