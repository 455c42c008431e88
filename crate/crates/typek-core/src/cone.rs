//! Order algebra for the orthant cone `C = R^N_+` and the split cone `K`.
//!
//! The cone `K` is determined by a partition of the coordinate indices into a
//! "horizontal" group `H = {0..k}` and a "vertical" group `V = {k..n}`:
//! `K = {p : p_i >= 0 for i in H, p_j <= 0 for j in V}`. A vector `x` is below
//! `y` in the K-order when `y - x` lies in `K`; strict and interior variants
//! follow the usual cone conventions. Every other module builds on these
//! primitives, so all comparisons in the crate funnel through [`compare`].

use serde::Serialize;
use thiserror::Error;

/// Errors from constructing or comparing cone-order primitives.
#[derive(Debug, Error)]
pub enum ConeError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("component {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("state vectors must have at least one component")]
    Empty,
    #[error("cone split requires 1 <= k < n, got k={k}, n={n}")]
    BadSplit { k: usize, n: usize },
    #[error("box bounds must satisfy lo <= hi componentwise (component {index}: {lo} > {hi})")]
    BoxBounds { index: usize, lo: f64, hi: f64 },
    #[error("tolerance must be nonnegative and finite, got {0}")]
    BadTolerance(f64),
}

/// A state vector in `C = R^N_+` (or a general point of `R^N` for
/// differences). Components are always finite; constructors reject NaN and
/// infinities outright since order comparisons on them are meaningless.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(components: Vec<f64>) -> Result<Self, ConeError> {
        if components.is_empty() {
            return Err(ConeError::Empty);
        }
        for (index, &value) in components.iter().enumerate() {
            if !value.is_finite() {
                return Err(ConeError::NonFinite { index, value });
            }
        }
        Ok(Point(components))
    }

    pub fn from_slice(components: &[f64]) -> Result<Self, ConeError> {
        Self::new(components.to_vec())
    }

    /// Planar convenience constructor; panics on non-finite input.
    pub fn planar(x1: f64, x2: f64) -> Self {
        Self::new(vec![x1, x2]).expect("planar point components must be finite")
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Max-norm of the vector.
    pub fn inf_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max-norm distance to another point of the same dimension.
    pub fn inf_dist(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&v| v >= 0.0)
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// The index partition defining the cone `K`: `H = {0..k}`, `V = {k..n}`
/// (zero-based; the split is strict, so both groups are nonempty).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConeSplit {
    n: usize,
    k: usize,
}

impl ConeSplit {
    pub fn new(n: usize, k: usize) -> Result<Self, ConeError> {
        if k == 0 || k >= n {
            return Err(ConeError::BadSplit { k, n });
        }
        Ok(ConeSplit { n, k })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn is_horizontal(&self, index: usize) -> bool {
        index < self.k
    }

    pub fn horizontal_indices(&self) -> std::ops::Range<usize> {
        0..self.k
    }

    pub fn vertical_indices(&self) -> std::ops::Range<usize> {
        self.k..self.n
    }
}

/// One of the two coordinate groups of a [`ConeSplit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Horizontal,
    Vertical,
}

/// Projection of `x` onto `C_H` or `C_V`: components outside the chosen
/// group are zeroed.
pub fn projection(x: &Point, side: Side, split: &ConeSplit) -> Result<Point, ConeError> {
    if x.dim() != split.dim() {
        return Err(ConeError::DimensionMismatch {
            expected: split.dim(),
            got: x.dim(),
        });
    }
    let kept = x
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let in_h = split.is_horizontal(i);
            match side {
                Side::Horizontal if in_h => v,
                Side::Vertical if !in_h => v,
                _ => 0.0,
            }
        })
        .collect();
    Point::new(kept)
}

/// Direction of an order relation: `Up` means the first argument is below the
/// second (`x <= y` resp. `x <=_K y`), `Down` the reverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    Up,
    Down,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Up => Sign::Down,
            Sign::Down => Sign::Up,
        }
    }
}

/// Strongest relation between two points in a single cone order.
///
/// `Ll => Lt => Leq` holds by construction: `Ll` certifies every component
/// margin exceeds the tolerance, `Lt` at least one, `Leq` none (the points
/// are ordered but too close to call strict at the given tolerance; with
/// tolerance zero this variant cannot occur). `Eq` is exact componentwise
/// equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConeRel {
    /// Unordered in this cone.
    None,
    /// Exactly equal.
    Eq,
    /// Ordered, but no component margin exceeds the tolerance.
    Leq(Sign),
    /// Strictly ordered: ordered and distinct with margin beyond tolerance.
    Lt(Sign),
    /// Interior-ordered: every component margin exceeds the tolerance.
    Ll(Sign),
}

impl ConeRel {
    pub fn is_strict(&self) -> bool {
        matches!(self, ConeRel::Lt(_) | ConeRel::Ll(_))
    }

    pub fn sign(&self) -> Option<Sign> {
        match self {
            ConeRel::Leq(s) | ConeRel::Lt(s) | ConeRel::Ll(s) => Some(*s),
            _ => None,
        }
    }

    fn label(&self) -> String {
        match self {
            ConeRel::None => "NONE".to_string(),
            ConeRel::Eq => "EQ".to_string(),
            ConeRel::Leq(s) => format!("LEQ{}", sign_char(*s)),
            ConeRel::Lt(s) => format!("LT{}", sign_char(*s)),
            ConeRel::Ll(s) => format!("LL{}", sign_char(*s)),
        }
    }
}

fn sign_char(s: Sign) -> char {
    match s {
        Sign::Up => '+',
        Sign::Down => '-',
    }
}

/// Result of [`compare`]: the strongest relation in the orthant order `C`
/// and in the split-cone order `K`, each with its direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OrderRel {
    pub c: ConeRel,
    pub k: ConeRel,
}

impl std::fmt::Display for OrderRel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}|{}", self.c.label(), self.k.label())
    }
}

/// Compares `x` and `y` in both cone orders.
///
/// Strict relations demand a margin greater than `tol` on the components
/// that certify them; with `tol = 0` this reduces to the exact definitions.
pub fn compare(x: &Point, y: &Point, split: &ConeSplit, tol: f64) -> Result<OrderRel, ConeError> {
    if x.dim() != split.dim() {
        return Err(ConeError::DimensionMismatch {
            expected: split.dim(),
            got: x.dim(),
        });
    }
    if y.dim() != split.dim() {
        return Err(ConeError::DimensionMismatch {
            expected: split.dim(),
            got: y.dim(),
        });
    }
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(ConeError::BadTolerance(tol));
    }
    let diff: Vec<f64> = y
        .as_slice()
        .iter()
        .zip(x.as_slice())
        .map(|(b, a)| b - a)
        .collect();
    // K-order flips the sign of the vertical components of the difference.
    let k_adjusted: Vec<f64> = diff
        .iter()
        .enumerate()
        .map(|(i, &d)| if split.is_horizontal(i) { d } else { -d })
        .collect();
    Ok(OrderRel {
        c: one_cone_rel(&diff, tol),
        k: one_cone_rel(&k_adjusted, tol),
    })
}

/// Strongest relation for a sign-adjusted difference vector `d = y - x`:
/// `d` in the cone means componentwise `d_i >= 0` after adjustment.
fn one_cone_rel(d: &[f64], tol: f64) -> ConeRel {
    let fwd = d.iter().all(|&v| v >= 0.0);
    let bwd = d.iter().all(|&v| v <= 0.0);
    if fwd && bwd {
        return ConeRel::Eq;
    }
    let (sign, mags): (Sign, Vec<f64>) = if fwd {
        (Sign::Up, d.to_vec())
    } else if bwd {
        (Sign::Down, d.iter().map(|v| -v).collect())
    } else {
        return ConeRel::None;
    };
    if mags.iter().all(|&v| v > tol) {
        ConeRel::Ll(sign)
    } else if mags.iter().any(|&v| v > tol) {
        ConeRel::Lt(sign)
    } else {
        ConeRel::Leq(sign)
    }
}

/// An axis-aligned box `[lo, hi] = {z : lo <= z <= hi}` in `C`. Degenerate
/// boxes (`lo = hi` in some or all components) are permitted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderedBox {
    lo: Point,
    hi: Point,
}

impl OrderedBox {
    pub fn new(lo: Point, hi: Point) -> Result<Self, ConeError> {
        if lo.dim() != hi.dim() {
            return Err(ConeError::DimensionMismatch {
                expected: lo.dim(),
                got: hi.dim(),
            });
        }
        for i in 0..lo.dim() {
            if lo[i] > hi[i] {
                return Err(ConeError::BoxBounds {
                    index: i,
                    lo: lo[i],
                    hi: hi[i],
                });
            }
        }
        Ok(OrderedBox { lo, hi })
    }

    /// `[0, r]` for `r` with positive components.
    pub fn to_upper(r: Point) -> Result<Self, ConeError> {
        let lo = Point::new(vec![0.0; r.dim()])?;
        Self::new(lo, r)
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn lo(&self) -> &Point {
        &self.lo
    }

    pub fn hi(&self) -> &Point {
        &self.hi
    }

    /// Membership test. With `strict_upper` the upper face is excluded:
    /// the box becomes `[lo, hi) = {z : lo <= z, z << hi}` (exact
    /// comparisons; no tolerance).
    pub fn contains(&self, x: &Point, strict_upper: bool) -> Result<bool, ConeError> {
        if x.dim() != self.dim() {
            return Err(ConeError::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        for i in 0..self.dim() {
            if x[i] < self.lo[i] {
                return Ok(false);
            }
            if strict_upper {
                if x[i] >= self.hi[i] {
                    return Ok(false);
                }
            } else if x[i] > self.hi[i] {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Membership with a symmetric slack on both faces, for tests on
    /// numerically computed orbits that may graze the boundary.
    pub fn contains_slack(&self, x: &Point, slack: f64) -> bool {
        debug_assert_eq!(x.dim(), self.dim());
        (0..self.dim()).all(|i| x[i] >= self.lo[i] - slack && x[i] <= self.hi[i] + slack)
    }

    /// Box scaled about the origin by `factor` (used for escape detection).
    pub fn scaled(&self, factor: f64) -> OrderedBox {
        let lo = Point::new(self.lo.as_slice().iter().map(|v| v * factor).collect())
            .expect("scaling a finite box stays finite");
        let hi = Point::new(self.hi.as_slice().iter().map(|v| v * factor).collect())
            .expect("scaling a finite box stays finite");
        OrderedBox { lo, hi }
    }

    /// Uniform grid with `res` points per axis, faces included, in
    /// deterministic row-major order (last axis fastest).
    pub fn grid(&self, res: usize) -> Vec<Point> {
        assert!(res >= 2, "grid resolution must be at least 2");
        let n = self.dim();
        let mut out = Vec::with_capacity(res.pow(n as u32));
        let mut idx = vec![0usize; n];
        loop {
            let coords: Vec<f64> = (0..n)
                .map(|i| {
                    let t = idx[i] as f64 / (res - 1) as f64;
                    self.lo[i] + t * (self.hi[i] - self.lo[i])
                })
                .collect();
            out.push(Point::new(coords).expect("grid points of a finite box are finite"));
            // Odometer increment, last axis fastest.
            let mut axis = n;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < res {
                    break;
                }
                idx[axis] = 0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn split2() -> ConeSplit {
        ConeSplit::new(2, 1).unwrap()
    }

    #[test]
    fn compare_k_interior() {
        // y - x = (1, -1) lies in the interior of K for k = 1.
        let x = Point::planar(1.0, 2.0);
        let y = Point::planar(2.0, 1.0);
        let rel = compare(&x, &y, &split2(), 0.0).unwrap();
        assert_eq!(rel.k, ConeRel::Ll(Sign::Up));
        assert_eq!(rel.c, ConeRel::None);
    }

    #[test]
    fn compare_equal_points() {
        let x = Point::planar(1.0, 1.0);
        let rel = compare(&x, &x, &split2(), 0.0).unwrap();
        assert_eq!(rel.c, ConeRel::Eq);
        assert_eq!(rel.k, ConeRel::Eq);
        assert!(!rel.c.is_strict());
    }

    #[test]
    fn compare_k_strict_c_unordered() {
        let x = Point::planar(0.3, 0.7);
        let y = Point::planar(0.4, 0.2);
        let rel = compare(&x, &y, &split2(), 0.0).unwrap();
        assert_eq!(rel.c, ConeRel::None);
        assert_eq!(rel.k, ConeRel::Ll(Sign::Up));
    }

    #[test]
    fn compare_c_order_down() {
        let x = Point::planar(2.0, 2.0);
        let y = Point::planar(1.0, 2.0);
        let rel = compare(&x, &y, &split2(), 0.0).unwrap();
        assert_eq!(rel.c, ConeRel::Lt(Sign::Down));
    }

    #[test]
    fn compare_tolerance_demotes_strictness() {
        let x = Point::planar(0.0, 0.0);
        let y = Point::planar(1e-14, 1e-14);
        let rel = compare(&x, &y, &split2(), 1e-12).unwrap();
        assert_eq!(rel.c, ConeRel::Leq(Sign::Up));
        // With zero tolerance the same pair is strict interior.
        let rel0 = compare(&x, &y, &split2(), 0.0).unwrap();
        assert_eq!(rel0.c, ConeRel::Ll(Sign::Up));
    }

    #[test]
    fn compare_dimension_mismatch() {
        let x = Point::planar(1.0, 2.0);
        let y = Point::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(compare(&x, &y, &split2(), 0.0).is_err());
    }

    #[test]
    fn projection_examples() {
        let s = split2();
        let x = Point::planar(3.0, 5.0);
        assert_eq!(
            projection(&x, Side::Horizontal, &s).unwrap(),
            Point::planar(3.0, 0.0)
        );
        assert_eq!(
            projection(&x, Side::Vertical, &s).unwrap(),
            Point::planar(0.0, 5.0)
        );
        let z = Point::planar(0.0, 0.0);
        assert_eq!(projection(&z, Side::Horizontal, &s).unwrap(), z);
        assert_eq!(projection(&z, Side::Vertical, &s).unwrap(), z);
    }

    #[test]
    fn box_membership() {
        let b = OrderedBox::to_upper(Point::planar(2.0, 2.0)).unwrap();
        assert!(!b.contains(&Point::planar(2.0, 1.0), true).unwrap());
        assert!(b.contains(&Point::planar(1.0, 1.0), true).unwrap());
        assert!(b.contains(&Point::planar(0.0, 0.0), false).unwrap());
        assert!(b.contains(&Point::planar(2.0, 2.0), false).unwrap());
    }

    #[test]
    fn degenerate_box_allowed() {
        let p = Point::planar(1.0, 1.0);
        let b = OrderedBox::new(p.clone(), p.clone()).unwrap();
        assert!(b.contains(&p, false).unwrap());
        assert!(!b.contains(&p, true).unwrap());
    }

    #[test]
    fn point_rejects_non_finite() {
        assert!(Point::new(vec![f64::NAN, 1.0]).is_err());
        assert!(Point::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(Point::new(vec![]).is_err());
    }

    #[test]
    fn grid_covers_faces() {
        let b = OrderedBox::to_upper(Point::planar(2.0, 2.0)).unwrap();
        let g = b.grid(3);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], Point::planar(0.0, 0.0));
        assert_eq!(g[8], Point::planar(2.0, 2.0));
    }

    /// Dyadic rationals make all cone arithmetic exact in f64.
    fn dyadic() -> impl Strategy<Value = f64> {
        (-64i32..=64).prop_map(|k| k as f64 / 8.0)
    }

    fn dyadic_point(n: usize) -> impl Strategy<Value = Point> {
        prop::collection::vec(dyadic(), n).prop_map(|v| Point::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn antisymmetry(x in dyadic_point(3), y in dyadic_point(3)) {
            let s = ConeSplit::new(3, 1).unwrap();
            let fwd = compare(&x, &y, &s, 0.0).unwrap();
            let bwd = compare(&y, &x, &s, 0.0).unwrap();
            // The strongest relation is mirrored with flipped sign; in
            // particular "x strictly below y" and "y strictly below x"
            // never hold together.
            match fwd.c {
                ConeRel::Lt(sig) => prop_assert_eq!(bwd.c, ConeRel::Lt(sig.flip())),
                ConeRel::Ll(sig) => prop_assert_eq!(bwd.c, ConeRel::Ll(sig.flip())),
                ConeRel::Eq => prop_assert_eq!(bwd.c, ConeRel::Eq),
                _ => {}
            }
            match fwd.k {
                ConeRel::Lt(sig) => prop_assert_eq!(bwd.k, ConeRel::Lt(sig.flip())),
                ConeRel::Ll(sig) => prop_assert_eq!(bwd.k, ConeRel::Ll(sig.flip())),
                _ => {}
            }
        }

        #[test]
        fn transitivity_k_order(x in dyadic_point(3), y in dyadic_point(3), z in dyadic_point(3)) {
            let s = ConeSplit::new(3, 2).unwrap();
            let xy = compare(&x, &y, &s, 0.0).unwrap();
            let yz = compare(&y, &z, &s, 0.0).unwrap();
            let xy_le = matches!(xy.k, ConeRel::Eq) || xy.k.sign() == Some(Sign::Up);
            let yz_le = matches!(yz.k, ConeRel::Eq) || yz.k.sign() == Some(Sign::Up);
            if xy_le && yz_le {
                let xz = compare(&x, &z, &s, 0.0).unwrap();
                prop_assert!(matches!(xz.k, ConeRel::Eq) || xz.k.sign() == Some(Sign::Up));
            }
        }

        #[test]
        fn permutation_invariance_within_groups(x in dyadic_point(4), y in dyadic_point(4)) {
            // Swap the two H components and the two V components of both
            // points; the relation must not change.
            let s = ConeSplit::new(4, 2).unwrap();
            let perm = |p: &Point| {
                let v = p.as_slice();
                Point::new(vec![v[1], v[0], v[3], v[2]]).unwrap()
            };
            let base = compare(&x, &y, &s, 0.0).unwrap();
            let permuted = compare(&perm(&x), &perm(&y), &s, 0.0).unwrap();
            prop_assert_eq!(base, permuted);
        }

        #[test]
        fn projection_idempotent(x in dyadic_point(3)) {
            let s = ConeSplit::new(3, 1).unwrap();
            let once = projection(&x, Side::Horizontal, &s).unwrap();
            let twice = projection(&once, Side::Horizontal, &s).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn ll_implies_lt_implies_leq(x in dyadic_point(3), y in dyadic_point(3)) {
            let s = ConeSplit::new(3, 1).unwrap();
            let rel = compare(&x, &y, &s, 0.0).unwrap();
            // Interior ordering certifies the weaker relations: re-check by
            // brute force on the raw difference.
            if let ConeRel::Ll(Sign::Up) = rel.c {
                for i in 0..3 {
                    prop_assert!(y[i] - x[i] > 0.0);
                }
            }
            if let ConeRel::Lt(Sign::Up) = rel.c {
                prop_assert!((0..3).all(|i| y[i] >= x[i]));
                prop_assert!((0..3).any(|i| y[i] > x[i]));
            }
        }
    }
}
