//! Global attractor decomposition for planar competitive systems.
//!
//! The attracting boundary object decomposes into three pieces: the unstable
//! manifold of each axial saddle (traced by forward continuation of a short
//! seed arc) and an interior curve connecting the extremal interior fixed
//! points (extracted by contracting the boundary of their order box onto the
//! curve). The assembly also certifies the order structure the theory
//! predicts: each piece is strictly monotone in the component order, and the
//! unions are unordered in the split-cone order.

use crate::cone::{compare, ConeRel, ConeSplit, Point, Sign};
use crate::fixed_points::{Classification, FixedPointKind, FixedPointRecord, DEDUP_RADIUS};
use crate::map::{KolmogorovMap, MapError};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Leading-edge movement below this threshold counts toward a stall.
pub const STALL_TOL: f64 = 1e-10;

/// Consecutive stalled iterations required before tracing stops.
pub const STALL_WINDOW: usize = 20;

/// Margin for the strict consecutive-point monotonicity checks.
pub const MONOTONE_TOL: f64 = 1e-12;

/// Margin for the pairwise unordered checks across curve unions.
pub const UNORDERED_TOL: f64 = 1e-9;

/// Consecutive output points closer than this (sup norm) are merged.
const OUTPUT_DEDUP: f64 = 1e-9;

/// Hard cap on the vertex count of a single traced arc.
const MAX_ARC_POINTS: usize = 4096;

/// Maximum midpoint-insertion passes per mapped arc or loop.
const MAX_REFINE_PASSES: usize = 24;

/// Numerical slack for the invariant-box membership check.
const BOX_SLACK: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum AttractorError {
    #[error(transparent)]
    Map(#[from] MapError),
    /// Manifold tracing must be anchored at a saddle with a real unstable
    /// direction.
    #[error("fixed point at {location:?} is classified as {classification}, not a saddle")]
    NotSaddle {
        location: Vec<f64>,
        classification: Classification,
    },
    /// A traced curve left the invariant box `[0, r]`, which contradicts
    /// forward invariance of the state box.
    #[error("curve tracing left the invariant box at {point:?}")]
    LeftBox { point: Vec<f64> },
    /// The contracted boundary loop still brackets the connecting curve too
    /// loosely after the configured number of iterations.
    #[error(
        "boundary sweep spread {spread:e} did not shrink below {threshold:e}; \
         increase the iteration budget or loosen the arc resolution"
    )]
    ResolutionInsufficient { spread: f64, threshold: f64 },
    /// The supplied catalog lacks a fixed point the decomposition needs.
    #[error("fixed-point catalog is missing a required {0} fixed point")]
    MissingFixedPoint(&'static str),
    /// The decomposition is only defined for planar systems.
    #[error("attractor decomposition requires a planar map, got dimension {0}")]
    NotPlanar(usize),
}

/// Tunable budgets for curve tracing and verification.
#[derive(Debug, Clone, Serialize)]
pub struct AttractorConfig {
    /// Target sup-norm spacing between consecutive polyline vertices.
    pub arc_resolution: f64,
    /// Total vertex budget for a traced manifold.
    pub max_points: usize,
    /// Distance of the manifold seed from its anchor along the unstable
    /// direction.
    pub seed_offset: f64,
    /// Iteration budget for manifold tracing.
    pub max_iterations: usize,
    /// Number of times the order-box boundary loop is mapped forward.
    pub sigma0_iterations: usize,
    /// Initial vertices per side of the order-box boundary loop.
    pub boundary_res: usize,
    /// Number of transversal lines swept across the contracted loop.
    pub transversal_res: usize,
    /// Random point pairs drawn for each unordered-union check.
    pub pair_samples: usize,
    /// Grid resolution per axis for the strict cross-gradient test.
    pub gradient_grid: usize,
    /// Seed for the deterministic pair sampling.
    pub seed: u64,
}

impl AttractorConfig {
    /// Defaults scaled to the map's state box.
    pub fn for_map(map: &KolmogorovMap) -> Self {
        AttractorConfig {
            arc_resolution: 1e-3 * map.r().inf_norm(),
            max_points: 50_000,
            seed_offset: 1e-6,
            max_iterations: 20_000,
            sigma0_iterations: 256,
            boundary_res: 64,
            transversal_res: 201,
            pair_samples: 10_000,
            gradient_grid: 33,
            seed: 1,
        }
    }
}

/// A traced unstable manifold, ordered from the anchor outward.
#[derive(Debug, Clone, Serialize)]
pub struct ManifoldPolyline {
    /// The saddle the manifold emanates from.
    pub anchor: FixedPointRecord,
    /// Polyline vertices; `points[0]` sits `seed_offset` from the anchor
    /// along the unstable direction, and consecutive vertices are at most
    /// `arc_resolution` apart.
    pub points: Vec<Point>,
    /// Where the leading edge came to rest.
    pub terminal: Vec<f64>,
    /// The spacing target the trace was run with.
    pub arc_resolution: f64,
    /// Whether tracing stopped because the leading edge stalled (as opposed
    /// to exhausting a budget).
    pub stalled: bool,
    /// Forward iterations performed.
    pub iterations: usize,
}

fn in_box(map: &KolmogorovMap, p: &Point) -> Result<(), AttractorError> {
    if map.domain().contains_slack(p, BOX_SLACK) {
        Ok(())
    } else {
        Err(AttractorError::LeftBox {
            point: p.as_slice().to_vec(),
        })
    }
}

fn lerp(a: &Point, b: &Point, t: f64) -> Point {
    let coords: Vec<f64> = (0..a.dim()).map(|i| a[i] + t * (b[i] - a[i])).collect();
    Point::new(coords).expect("interpolant of finite points is finite")
}

/// Drops interior vertices closer than `keep_res` to the previously kept
/// vertex. First and last vertices always survive, so arc joins are exact.
fn thin_polyline(arc: &mut Vec<Point>, keep_res: f64) {
    if arc.len() <= 2 {
        return;
    }
    let last = arc.len() - 1;
    let mut kept: Vec<Point> = vec![arc[0].clone()];
    for p in &arc[1..last] {
        if kept.last().expect("nonempty").inf_dist(p) >= keep_res {
            kept.push(p.clone());
        }
    }
    kept.push(arc[last].clone());
    *arc = kept;
}

/// Maps an open arc forward, inserting preimage midpoints until consecutive
/// image vertices are within `arc_resolution` (or budgets run out). The
/// preimage arc is refined in place so the next iteration starts dense.
fn map_arc(
    map: &KolmogorovMap,
    pre: &mut Vec<Point>,
    cfg: &AttractorConfig,
) -> Result<Vec<Point>, AttractorError> {
    let mut img: Vec<Point> = Vec::with_capacity(pre.len());
    for p in pre.iter() {
        let y = map.apply(p)?;
        in_box(map, &y)?;
        img.push(y);
    }
    for _ in 0..MAX_REFINE_PASSES {
        let wide: Vec<usize> = (0..img.len() - 1)
            .filter(|&i| img[i].inf_dist(&img[i + 1]) > cfg.arc_resolution)
            .collect();
        if wide.is_empty() || pre.len() + wide.len() > MAX_ARC_POINTS {
            break;
        }
        let mut new_pre = Vec::with_capacity(pre.len() + wide.len());
        let mut new_img = Vec::with_capacity(img.len() + wide.len());
        let mut w = 0;
        for i in 0..pre.len() {
            new_pre.push(pre[i].clone());
            new_img.push(img[i].clone());
            if w < wide.len() && wide[w] == i {
                let mid = lerp(&pre[i], &pre[i + 1], 0.5);
                let mid_img = map.apply(&mid)?;
                in_box(map, &mid_img)?;
                new_pre.push(mid);
                new_img.push(mid_img);
                w += 1;
            }
        }
        *pre = new_pre;
        img = new_img;
    }
    Ok(img)
}

/// Merges near-duplicate consecutive vertices and pins the final vertex to
/// the recorded terminal point.
fn dedup_polyline(points: Vec<Point>, terminal: &Point) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(points.len());
    for p in points {
        match out.last() {
            Some(last) if last.inf_dist(&p) < OUTPUT_DEDUP => {}
            _ => out.push(p),
        }
    }
    match out.last() {
        Some(last) if last.as_slice() == terminal.as_slice() => {}
        Some(_) if out.len() >= 2 => {
            let idx = out.len() - 1;
            out[idx] = terminal.clone();
        }
        _ => out.push(terminal.clone()),
    }
    out
}

/// Traces the one-dimensional unstable manifold of `saddle` by forward
/// continuation of the seed arc `[s, T(s)]`, `s = anchor ± offset·v`.
///
/// `flip = false` follows the recorded unstable direction (oriented into the
/// interior for axial saddles); `flip = true` follows the opposite ray,
/// which is meaningful for interior saddles whose manifold has two branches.
/// Tracing stops once the leading edge moves less than [`STALL_TOL`] for
/// [`STALL_WINDOW`] consecutive iterations, or when a budget is exhausted.
pub fn trace_unstable_manifold(
    map: &KolmogorovMap,
    saddle: &FixedPointRecord,
    flip: bool,
    cfg: &AttractorConfig,
) -> Result<ManifoldPolyline, AttractorError> {
    if saddle.classification != Classification::Saddle {
        return Err(AttractorError::NotSaddle {
            location: saddle.location.clone(),
            classification: saddle.classification,
        });
    }
    let dir = saddle
        .unstable_direction
        .as_ref()
        .ok_or(AttractorError::NotSaddle {
            location: saddle.location.clone(),
            classification: saddle.classification,
        })?;
    let sign = if flip { -1.0 } else { 1.0 };
    let seed_coords: Vec<f64> = saddle
        .location
        .iter()
        .zip(dir)
        .map(|(&c, &d)| c + sign * cfg.seed_offset * d)
        .collect();
    let seed = Point::new(seed_coords).expect("finite seed");
    in_box(map, &seed)?;
    let first = map.apply(&seed)?;
    in_box(map, &first)?;

    let mut arc = vec![seed, first];
    // Densify the seed arc linearly in case the offset exceeds the spacing
    // target (the manifold deviates from this chord only at second order).
    while arc
        .windows(2)
        .any(|w| w[0].inf_dist(&w[1]) > cfg.arc_resolution)
        && arc.len() < MAX_ARC_POINTS
    {
        let mut dense = vec![arc[0].clone()];
        for w in arc.windows(2) {
            if w[0].inf_dist(&w[1]) > cfg.arc_resolution {
                dense.push(lerp(&w[0], &w[1], 0.5));
            }
            dense.push(w[1].clone());
        }
        arc = dense;
    }

    let mut all = arc.clone();
    let mut tip = arc.last().expect("seed arc").clone();
    let mut streak = 0usize;
    let mut stalled = false;
    let mut iterations = 0usize;
    for it in 0..cfg.max_iterations {
        iterations = it + 1;
        thin_polyline(&mut arc, cfg.arc_resolution * 0.25);
        let img = map_arc(map, &mut arc, cfg)?;
        all.extend_from_slice(&img[1..]);
        let new_tip = img.last().expect("mapped arc").clone();
        if new_tip.inf_dist(&tip) < STALL_TOL {
            streak += 1;
        } else {
            streak = 0;
        }
        tip = new_tip;
        arc = img;
        if streak >= STALL_WINDOW {
            stalled = true;
            break;
        }
        if all.len() >= cfg.max_points {
            break;
        }
    }

    let points = dedup_polyline(all, &tip);
    Ok(ManifoldPolyline {
        anchor: saddle.clone(),
        points,
        terminal: tip.into_vec(),
        arc_resolution: cfg.arc_resolution,
        stalled,
        iterations,
    })
}

/// The interior connecting curve, ordered from `p0` to `p1`.
#[derive(Debug, Clone, Serialize)]
pub struct Sigma0Curve {
    /// Curve vertices; a single vertex when the extremal interior fixed
    /// points coincide.
    pub points: Vec<Point>,
    /// Final bracket width of the contracted boundary loop across the swept
    /// transversals (0 for the singleton case).
    pub max_spread: f64,
    /// Forward iterations applied to the boundary loop.
    pub iterations: usize,
    /// Whether the endpoints were distinct.
    pub distinct: bool,
}

/// Maps a closed loop forward with the same preimage-midpoint refinement as
/// [`map_arc`], treating the wrap-around edge like any other.
fn map_loop(
    map: &KolmogorovMap,
    pre: &mut Vec<Point>,
    cfg: &AttractorConfig,
) -> Result<Vec<Point>, AttractorError> {
    let mut img: Vec<Point> = Vec::with_capacity(pre.len());
    for p in pre.iter() {
        let y = map.apply(p)?;
        in_box(map, &y)?;
        img.push(y);
    }
    for _ in 0..MAX_REFINE_PASSES {
        let n = img.len();
        let wide: Vec<usize> = (0..n)
            .filter(|&i| img[i].inf_dist(&img[(i + 1) % n]) > cfg.arc_resolution)
            .collect();
        if wide.is_empty() || n + wide.len() > 4 * MAX_ARC_POINTS {
            break;
        }
        let mut new_pre = Vec::with_capacity(n + wide.len());
        let mut new_img = Vec::with_capacity(n + wide.len());
        let mut w = 0;
        for i in 0..n {
            new_pre.push(pre[i].clone());
            new_img.push(img[i].clone());
            if w < wide.len() && wide[w] == i {
                let mid = lerp(&pre[i], &pre[(i + 1) % n], 0.5);
                let mid_img = map.apply(&mid)?;
                in_box(map, &mid_img)?;
                new_pre.push(mid);
                new_img.push(mid_img);
                w += 1;
            }
        }
        *pre = new_pre;
        img = new_img;
    }
    Ok(img)
}

fn thin_loop(loop_pts: &mut Vec<Point>, keep_res: f64) {
    if loop_pts.len() <= 8 {
        return;
    }
    let mut kept: Vec<Point> = vec![loop_pts[0].clone()];
    for p in &loop_pts[1..] {
        if kept.last().expect("nonempty").inf_dist(p) >= keep_res {
            kept.push(p.clone());
        }
    }
    if kept.len() >= 8 {
        *loop_pts = kept;
    }
}

/// Builds the connecting curve between the extremal interior fixed points by
/// iterating the boundary loop of their order box forward until it collapses
/// onto the curve, then sweeping transversal lines to extract bracket
/// midpoints.
///
/// Coincident endpoints short-circuit to a singleton curve. If after the
/// iteration budget some transversal still brackets the curve wider than
/// `100 × arc_resolution`, the construction reports
/// [`AttractorError::ResolutionInsufficient`].
pub fn build_sigma0(
    map: &KolmogorovMap,
    p0: &FixedPointRecord,
    p1: &FixedPointRecord,
    cfg: &AttractorConfig,
) -> Result<Sigma0Curve, AttractorError> {
    if map.dim() != 2 {
        return Err(AttractorError::NotPlanar(map.dim()));
    }
    let a = p0.point();
    let b = p1.point();
    if a.inf_dist(&b) <= DEDUP_RADIUS {
        return Ok(Sigma0Curve {
            points: vec![a],
            max_spread: 0.0,
            iterations: 0,
            distinct: false,
        });
    }
    let span = [b[0] - a[0], b[1] - a[1]];
    if span[0] <= DEDUP_RADIUS || span[1] <= DEDUP_RADIUS {
        // Extremal interior fixed points of a valid system are strictly
        // ordered componentwise; anything else cannot bound an order box.
        return Err(AttractorError::MissingFixedPoint("ordered interior"));
    }

    // Closed boundary loop of the order box [a, b], counterclockwise.
    let corners = [
        Point::planar(a[0], a[1]),
        Point::planar(b[0], a[1]),
        Point::planar(b[0], b[1]),
        Point::planar(a[0], b[1]),
    ];
    let res = cfg.boundary_res.max(2);
    let mut loop_pts: Vec<Point> = Vec::with_capacity(4 * res);
    for side in 0..4 {
        let from = &corners[side];
        let to = &corners[(side + 1) % 4];
        for j in 0..res {
            loop_pts.push(lerp(from, to, j as f64 / res as f64));
        }
    }

    for _ in 0..cfg.sigma0_iterations {
        thin_loop(&mut loop_pts, cfg.arc_resolution * 0.5);
        loop_pts = map_loop(map, &mut loop_pts, cfg)?;
    }

    // Sweep transversals phi = s, where phi(x) is the sum of box-normalized
    // coordinates: the curve runs from phi = 0 at p0 to phi = 2 at p1, and
    // each transversal should be crossed by the two collapsed strands of the
    // loop on either side of it.
    let phi = |p: &Point| (p[0] - a[0]) / span[0] + (p[1] - a[1]) / span[1];
    let psi = |p: &Point| (p[0] - a[0]) / span[0] - (p[1] - a[1]) / span[1];
    let n = loop_pts.len();
    let mut centers: Vec<Point> = Vec::with_capacity(cfg.transversal_res);
    let mut max_spread = 0.0f64;
    let mut sampled = 0usize;
    for m in 1..=cfg.transversal_res {
        let s = 2.0 * m as f64 / (cfg.transversal_res + 1) as f64;
        let mut lo: Option<(f64, Point)> = None;
        let mut hi: Option<(f64, Point)> = None;
        for i in 0..n {
            let p = &loop_pts[i];
            let q = &loop_pts[(i + 1) % n];
            let fp = phi(p) - s;
            let fq = phi(q) - s;
            let crossing = if fp == 0.0 {
                Some(p.clone())
            } else if fp * fq < 0.0 {
                Some(lerp(p, q, fp / (fp - fq)))
            } else {
                None
            };
            if let Some(c) = crossing {
                let v = psi(&c);
                if lo.as_ref().is_none_or(|(lv, _)| v < *lv) {
                    lo = Some((v, c.clone()));
                }
                if hi.as_ref().is_none_or(|(hv, _)| v > *hv) {
                    hi = Some((v, c));
                }
            }
        }
        if let (Some((lv, lp)), Some((hv, hp))) = (lo, hi) {
            if hv > lv {
                sampled += 1;
                max_spread = max_spread.max(lp.inf_dist(&hp));
                centers.push(lerp(&lp, &hp, 0.5));
            }
        }
    }

    let threshold = 100.0 * cfg.arc_resolution;
    if sampled * 2 < cfg.transversal_res {
        return Err(AttractorError::ResolutionInsufficient {
            spread: f64::INFINITY,
            threshold,
        });
    }
    if max_spread > threshold {
        return Err(AttractorError::ResolutionInsufficient {
            spread: max_spread,
            threshold,
        });
    }

    let mut points = vec![a];
    for c in centers {
        if points.last().expect("nonempty").inf_dist(&c) >= OUTPUT_DEDUP {
            points.push(c);
        }
    }
    let idx = points.len() - 1;
    if idx >= 1 && points[idx].inf_dist(&b) < OUTPUT_DEDUP {
        points[idx] = b;
    } else {
        points.push(b);
    }
    Ok(Sigma0Curve {
        points,
        max_spread,
        iterations: cfg.sigma0_iterations,
        distinct: true,
    })
}

/// Verification flags for the order structure of the decomposition pieces.
#[derive(Debug, Clone, Serialize)]
pub struct MonotoneFlags {
    /// Whether every cross-group growth gradient is strictly positive on the
    /// sampled state box (the condition under which the stronger interior
    /// ordering and unordering statements apply).
    pub strict_cross_gradients: bool,
    /// Sampled pairs along the first axial manifold are strictly ordered in
    /// the component order.
    pub sigma_h_strict: bool,
    /// ... and ordered in the interior of the component order.
    pub sigma_h_interior: bool,
    pub sigma_v_strict: bool,
    pub sigma_v_interior: bool,
    /// Sampled pairs along the connecting curve are interior-ordered.
    pub sigma_0_interior: bool,
}

/// Pairwise unordering of the curve unions in the split-cone order.
#[derive(Debug, Clone, Serialize)]
pub struct UnorderedFlags {
    /// No sampled pair from the first manifold union is interior-ordered in
    /// the split-cone order.
    pub h_union_not_interior: bool,
    pub v_union_not_interior: bool,
    /// Under strict cross-gradients: no sampled pair is even strictly
    /// ordered in the split-cone order. Absent otherwise.
    pub h_union_not_strict: Option<bool>,
    pub v_union_not_strict: Option<bool>,
    /// Total random pairs examined per union.
    pub pairs_checked: usize,
}

/// Returns (strictly ordered, interior ordered) for consecutive and strided
/// point pairs along a curve, requiring a consistent direction throughout.
fn curve_monotone(split: &ConeSplit, pts: &[Point]) -> (bool, bool) {
    if pts.len() < 2 {
        return (true, true);
    }
    let mut strict = true;
    let mut interior = true;
    let mut dir: Option<Sign> = None;
    let mut note = |rel: ConeRel| match rel {
        ConeRel::Ll(s) | ConeRel::Lt(s) => {
            if *dir.get_or_insert(s) != s {
                strict = false;
                interior = false;
            } else if matches!(rel, ConeRel::Lt(_)) {
                interior = false;
            }
        }
        _ => {
            strict = false;
            interior = false;
        }
    };
    for w in pts.windows(2) {
        let rel = compare(&w[0], &w[1], split, MONOTONE_TOL).expect("curve points share the split");
        note(rel.c);
    }
    // Strided non-adjacent pairs guard against cancellation over longer
    // stretches of the curve.
    let stride = (pts.len() / 64).max(1);
    let idx: Vec<usize> = (0..pts.len()).step_by(stride).collect();
    for (u, &i) in idx.iter().enumerate() {
        for &j in &idx[u + 1..] {
            let rel = compare(&pts[i], &pts[j], split, MONOTONE_TOL).expect("curve points");
            note(rel.c);
        }
    }
    (strict, interior)
}

/// Draws seeded random pairs from the union of two curves and checks that
/// none are related in the (strict / interior) split-cone order.
fn union_unordered(
    split: &ConeSplit,
    first: &[Point],
    second: &[Point],
    cfg: &AttractorConfig,
    seed: u64,
    with_strict: bool,
) -> (bool, Option<bool>, usize) {
    let union: Vec<&Point> = first.iter().chain(second.iter()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut not_interior = true;
    let mut not_strict = true;
    let mut checked = 0usize;
    if union.len() >= 2 {
        for _ in 0..cfg.pair_samples {
            let i = rng.gen_range(0..union.len());
            let j = rng.gen_range(0..union.len());
            if i == j {
                continue;
            }
            let rel = compare(union[i], union[j], split, UNORDERED_TOL).expect("curve points");
            match rel.k {
                ConeRel::Ll(_) => {
                    not_interior = false;
                    not_strict = false;
                }
                ConeRel::Lt(_) => not_strict = false,
                _ => {}
            }
            checked += 1;
        }
    }
    (
        not_interior,
        if with_strict { Some(not_strict) } else { None },
        checked,
    )
}

/// Checks that every cross-group growth gradient is strictly positive on a
/// sampled grid over the state box.
pub fn cross_gradients_strict(map: &KolmogorovMap, res: usize) -> Result<bool, MapError> {
    let split = map.split();
    for x in map.domain().grid(res) {
        let jac = map.growth_jacobian(&x)?;
        for i in split.horizontal_indices() {
            for j in split.vertical_indices() {
                if jac.get(i, j) <= 0.0 || jac.get(j, i) <= 0.0 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// The assembled attracting boundary object and its verification flags.
#[derive(Debug, Clone, Serialize)]
pub struct AttractorDecomposition {
    /// Unstable manifold of the first-axis saddle.
    pub sigma_h: ManifoldPolyline,
    /// Unstable manifold of the second-axis saddle.
    pub sigma_v: ManifoldPolyline,
    /// Connecting curve between the extremal interior fixed points.
    pub sigma_0: Sigma0Curve,
    /// Least interior fixed point.
    pub p0: FixedPointRecord,
    /// Greatest interior fixed point.
    pub p1: FixedPointRecord,
    /// First-axis saddle.
    pub q1: FixedPointRecord,
    /// Second-axis saddle.
    pub q2: FixedPointRecord,
    pub monotone_flags: MonotoneFlags,
    pub unordered_flags: UnorderedFlags,
    /// The budgets the decomposition was computed with.
    pub config: AttractorConfig,
}

/// Assembles the full decomposition from a fixed-point catalog: traces both
/// axial manifolds, builds the connecting curve, and evaluates the order
/// flags.
pub fn assemble_decomposition(
    map: &KolmogorovMap,
    records: &[FixedPointRecord],
    cfg: &AttractorConfig,
) -> Result<AttractorDecomposition, AttractorError> {
    if map.dim() != 2 {
        return Err(AttractorError::NotPlanar(map.dim()));
    }
    let q1 = records
        .iter()
        .find(|r| r.kind == FixedPointKind::Axial1)
        .ok_or(AttractorError::MissingFixedPoint("first-axis"))?;
    let q2 = records
        .iter()
        .find(|r| r.kind == FixedPointKind::Axial2)
        .ok_or(AttractorError::MissingFixedPoint("second-axis"))?;
    let interior: Vec<&FixedPointRecord> = records
        .iter()
        .filter(|r| r.kind == FixedPointKind::Interior)
        .collect();
    let p0 = *interior
        .first()
        .ok_or(AttractorError::MissingFixedPoint("interior"))?;
    let p1 = *interior.last().expect("nonempty interior list");

    let sigma_h = trace_unstable_manifold(map, q1, false, cfg)?;
    let sigma_v = trace_unstable_manifold(map, q2, false, cfg)?;
    let sigma_0 = build_sigma0(map, p0, p1, cfg)?;

    let split = map.split();
    let strict_cross_gradients = cross_gradients_strict(map, cfg.gradient_grid)?;
    let (sigma_h_strict, sigma_h_interior) = curve_monotone(split, &sigma_h.points);
    let (sigma_v_strict, sigma_v_interior) = curve_monotone(split, &sigma_v.points);
    let (_, sigma_0_interior) = curve_monotone(split, &sigma_0.points);
    let (h_union_not_interior, h_union_not_strict, pairs_h) = union_unordered(
        split,
        &sigma_h.points,
        &sigma_0.points,
        cfg,
        cfg.seed,
        strict_cross_gradients,
    );
    let (v_union_not_interior, v_union_not_strict, pairs_v) = union_unordered(
        split,
        &sigma_v.points,
        &sigma_0.points,
        cfg,
        cfg.seed.wrapping_add(1),
        strict_cross_gradients,
    );

    Ok(AttractorDecomposition {
        sigma_h,
        sigma_v,
        sigma_0,
        p0: p0.clone(),
        p1: p1.clone(),
        q1: q1.clone(),
        q2: q2.clone(),
        monotone_flags: MonotoneFlags {
            strict_cross_gradients,
            sigma_h_strict,
            sigma_h_interior,
            sigma_v_strict,
            sigma_v_interior,
            sigma_0_interior,
        },
        unordered_flags: UnorderedFlags {
            h_union_not_interior,
            v_union_not_interior,
            h_union_not_strict,
            v_union_not_strict,
            pairs_checked: pairs_h.min(pairs_v),
        },
        config: cfg.clone(),
    })
}
