//! Orbit machinery: forward iteration with convergence/cycle/escape
//! verdicts, Newton inversion of the map (it is a homeomorphism onto its
//! image under the certified hypotheses), backward orbits, basin-of-repulsion
//! membership, region classification, eventual-monotonicity detection, and
//! randomized backward-monotonicity (retrotone) checking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cone::{compare, ConeRel, OrderRel, Point, Sign};
use crate::map::{KolmogorovMap, MapError};

/// Margin for the strict cone tags attached to orbit steps. Deliberately
/// finer than the default convergence tolerance (1e-10) so that steps taken
/// before a convergence verdict still carry strict tags.
pub const TAG_TOL: f64 = 1e-12;

/// Consecutive sub-tolerance steps required before a convergence verdict.
pub const CONV_STREAK: usize = 10;

#[derive(Debug, Error)]
pub enum OrbitError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(
        "no preimage of {y:?} found within tolerance (best residual {best_residual:e}); \
         the point may lie outside the map's image"
    )]
    NotInImage { y: Vec<f64>, best_residual: f64 },
}

/// Terminal status of an orbit run.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "limit")]
pub enum Verdict {
    /// Steps contracted below tolerance for [`CONV_STREAK`] consecutive
    /// iterations; the reported limit is Newton-polished.
    Converged { limit: Vec<f64> },
    /// The orbit returned near itself with period 2 while still taking
    /// steps above tolerance.
    CycleSuspected,
    BudgetExhausted,
    /// A forward iterate left `[0, 10r]` (or a backward iterate left
    /// `[0, r]`), which the theory rules out when the hypotheses hold.
    EscapedBox,
}

/// A recorded orbit: `tags[m]` is the cone relation from `points[m]` to
/// `points[m+1]` at margin [`TAG_TOL`].
#[derive(Debug, Clone)]
pub struct OrbitTrace {
    pub points: Vec<Point>,
    pub tags: Vec<OrderRel>,
    pub verdict: Verdict,
}

impl OrbitTrace {
    pub fn last(&self) -> &Point {
        self.points.last().expect("trace always holds the start")
    }
}

fn tag(map: &KolmogorovMap, a: &Point, b: &Point) -> OrderRel {
    compare(a, b, map.split(), TAG_TOL).expect("orbit points share the map dimension")
}

/// Newton polish of an approximate fixed point: solves `T(z) - z = 0`,
/// accepting only residual improvements, so the returned point is never
/// worse than the input. Falls back to plain iteration when the linearized
/// system is singular (degenerate fixed points).
fn polish_fixed_point(
    map: &KolmogorovMap,
    start: &[f64],
    budget: usize,
) -> Result<(Vec<f64>, f64), OrbitError> {
    let n = map.dim();
    let mut z = start.to_vec();
    let mut image = vec![0.0; n];
    let residual = |z: &[f64], image: &mut Vec<f64>| -> Result<f64, OrbitError> {
        map.apply_into(z, image)?;
        Ok((0..n).map(|i| (image[i] - z[i]).abs()).fold(0.0, f64::max))
    };
    let mut res = residual(&z, &mut image)?;
    for _ in 0..budget {
        if res <= 1e-15 {
            break;
        }
        let zp = Point::from_slice(&z).expect("iterates stay finite");
        let mut j = map.jacobian(&zp)?;
        for i in 0..n {
            j.set(i, i, j.get(i, i) - 1.0);
        }
        map.apply_into(&z, &mut image)?;
        let f: Vec<f64> = (0..n).map(|i| image[i] - z[i]).collect();
        let step = match j.solve(&f) {
            Ok(d) => d,
            Err(_) => {
                // Singular linearization: fall back to plain iteration,
                // keeping the best point seen.
                let mut best = (z.clone(), res);
                let mut w = z.clone();
                for _ in 0..2000 {
                    map.apply_into(&w, &mut image)?;
                    w.copy_from_slice(&image);
                    let r = residual(&w, &mut image)?;
                    if r < best.1 {
                        best = (w.clone(), r);
                    }
                    if r <= 1e-15 {
                        break;
                    }
                }
                return Ok(best);
            }
        };
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let trial: Vec<f64> = (0..n).map(|i| (z[i] - alpha * step[i]).max(0.0)).collect();
            let r = residual(&trial, &mut image)?;
            if r < res {
                z = trial;
                res = r;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok((z, res))
}

/// Iterates `x(n+1) = T(x(n))` until convergence (steps below `conv_tol`
/// for [`CONV_STREAK`] consecutive iterations, then Newton polish), a
/// suspected 2-cycle, box escape, or budget exhaustion.
pub fn iterate_forward(
    map: &KolmogorovMap,
    x0: &Point,
    max_steps: usize,
    conv_tol: f64,
) -> Result<OrbitTrace, OrbitError> {
    assert!(max_steps >= 1, "need at least one step");
    assert!(conv_tol > 0.0 && conv_tol.is_finite(), "bad tolerance");
    let r = map.r();
    let n = map.dim();
    let mut points = vec![x0.clone()];
    let mut tags = Vec::new();
    let mut conv_streak = 0usize;
    let mut cycle_streak = 0usize;
    let mut image = vec![0.0; n];

    for _ in 0..max_steps {
        let cur = points.last().expect("nonempty").clone();
        map.apply_into(cur.as_slice(), &mut image)?;
        let next = match Point::from_slice(&image) {
            Ok(p) => p,
            Err(_) => {
                let index = image.iter().position(|v| !v.is_finite()).unwrap_or(0) + 1;
                return Err(OrbitError::Map(MapError::Eval {
                    index,
                    point: cur.as_slice().to_vec(),
                    source: crate::expr::EvalError::NonFinite,
                }));
            }
        };
        tags.push(tag(map, &cur, &next));
        points.push(next.clone());

        // Escape box [0, 10r]: the certified hypotheses confine orbits.
        if (0..n).any(|i| next[i] < 0.0 || next[i] > 10.0 * r[i]) {
            return Ok(OrbitTrace {
                points,
                tags,
                verdict: Verdict::EscapedBox,
            });
        }

        let step = cur.inf_dist(&next);
        if step < conv_tol {
            conv_streak += 1;
        } else {
            conv_streak = 0;
        }
        if conv_streak >= CONV_STREAK {
            let (limit, _res) = polish_fixed_point(map, next.as_slice(), 60)?;
            return Ok(OrbitTrace {
                points,
                tags,
                verdict: Verdict::Converged { limit },
            });
        }

        // Period-2 recurrence while steps remain macroscopic.
        if points.len() >= 3 {
            let back2 = &points[points.len() - 3];
            let d2 = back2.inf_dist(&next);
            if d2 < conv_tol && step >= conv_tol {
                cycle_streak += 1;
            } else {
                cycle_streak = 0;
            }
            if cycle_streak >= CONV_STREAK {
                return Ok(OrbitTrace {
                    points,
                    tags,
                    verdict: Verdict::CycleSuspected,
                });
            }
        }
    }
    Ok(OrbitTrace {
        points,
        tags,
        verdict: Verdict::BudgetExhausted,
    })
}

/// Solves `T(x) = y` by damped Newton iteration, warm-started from
/// `x_guess`, with a coarse-grid multistart fallback. The search is clamped
/// to `[0, 2r]`; components where `y_i = 0` are pinned to zero (the map
/// fixes coordinate planes exactly, so preimages inherit the support).
pub fn invert_t(
    map: &KolmogorovMap,
    y: &Point,
    x_guess: &Point,
    tol: f64,
) -> Result<Point, OrbitError> {
    assert!(tol > 0.0 && tol.is_finite(), "bad tolerance");
    let n = map.dim();
    let r = map.r();
    let zero_support: Vec<bool> = (0..n).map(|i| y[i] == 0.0).collect();
    let clamp = |v: f64, i: usize| -> f64 {
        if zero_support[i] {
            0.0
        } else {
            v.clamp(0.0, 2.0 * r[i])
        }
    };

    let mut image = vec![0.0; n];
    let mut best_res = f64::INFINITY;

    let try_start = |start: &[f64],
                         image: &mut Vec<f64>,
                         best_res: &mut f64|
     -> Result<Option<Vec<f64>>, OrbitError> {
        let mut x: Vec<f64> = (0..n).map(|i| clamp(start[i], i)).collect();
        map.apply_into(&x, image)?;
        let mut res = (0..n)
            .map(|i| (image[i] - y[i]).abs())
            .fold(0.0, f64::max);
        for _ in 0..100 {
            if res <= tol {
                return Ok(Some(x));
            }
            let xp = Point::from_slice(&x).expect("finite iterate");
            let jac = map.jacobian(&xp)?;
            map.apply_into(&x, image)?;
            let f: Vec<f64> = (0..n).map(|i| image[i] - y[i]).collect();
            let step = match jac.solve(&f) {
                Ok(d) => d,
                Err(_) => break,
            };
            let mut alpha = 1.0;
            let mut improved = false;
            for _ in 0..40 {
                let trial: Vec<f64> =
                    (0..n).map(|i| clamp(x[i] - alpha * step[i], i)).collect();
                map.apply_into(&trial, image)?;
                let tr = (0..n)
                    .map(|i| (image[i] - y[i]).abs())
                    .fold(0.0, f64::max);
                if tr < res {
                    x = trial;
                    res = tr;
                    improved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if res <= tol {
            return Ok(Some(x));
        }
        if res < *best_res {
            *best_res = res;
        }
        Ok(None)
    };

    if let Some(x) = try_start(x_guess.as_slice(), &mut image, &mut best_res)? {
        return Ok(Point::new(x).expect("clamped iterate is finite"));
    }
    // Multistart over a coarse grid on [0, 2r] (roughly 81 starts in total).
    let per_axis = match n {
        2 => 9,
        3 => 4,
        _ => 3,
    };
    let grid = map.domain().scaled(2.0).grid(per_axis);
    for g in &grid {
        if let Some(x) = try_start(g.as_slice(), &mut image, &mut best_res)? {
            return Ok(Point::new(x).expect("clamped iterate is finite"));
        }
    }
    Err(OrbitError::NotInImage {
        y: y.as_slice().to_vec(),
        best_residual: best_res,
    })
}

/// Iterates the inverse map from `x0`, warm-starting each Newton solve at
/// the previous point. Verdicts: `Converged` when the orbit enters the
/// `tol`-ball at the origin (backward membership in the origin's basin of
/// repulsion) or stalls at a fixed point; `EscapedBox` when a preimage
/// leaves `[0, r]`; otherwise `BudgetExhausted`.
pub fn iterate_backward(
    map: &KolmogorovMap,
    x0: &Point,
    max_steps: usize,
    tol: f64,
) -> Result<OrbitTrace, OrbitError> {
    assert!(tol > 0.0 && tol.is_finite(), "bad tolerance");
    let n = map.dim();
    let r = map.r();
    let mut points = vec![x0.clone()];
    let mut tags = Vec::new();
    let mut stall_streak = 0usize;

    for _ in 0..max_steps {
        let cur = points.last().expect("nonempty").clone();
        if cur.inf_norm() < tol {
            return Ok(OrbitTrace {
                points,
                tags,
                verdict: Verdict::Converged {
                    limit: cur.as_slice().to_vec(),
                },
            });
        }
        let prev = invert_t(map, &cur, &cur, 1e-12)?;
        tags.push(tag(map, &cur, &prev));
        points.push(prev.clone());
        if (0..n).any(|i| prev[i] > r[i]) {
            return Ok(OrbitTrace {
                points,
                tags,
                verdict: Verdict::EscapedBox,
            });
        }
        let step = cur.inf_dist(&prev);
        if step < 1e-12 {
            stall_streak += 1;
        } else {
            stall_streak = 0;
        }
        if stall_streak >= CONV_STREAK {
            return Ok(OrbitTrace {
                points,
                tags,
                verdict: Verdict::Converged {
                    limit: prev.as_slice().to_vec(),
                },
            });
        }
    }
    Ok(OrbitTrace {
        points,
        tags,
        verdict: Verdict::BudgetExhausted,
    })
}

/// Membership verdict for the origin's basin of repulsion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BasinVerdict {
    Inside,
    Outside,
    Undecided,
}

/// Tests whether the backward orbit of `x` converges to the origin while
/// staying in `[0, r]`. Newton failures and gray-zone stalls report
/// `Undecided` rather than guessing.
pub fn basin_of_repulsion_test(
    map: &KolmogorovMap,
    x: &Point,
    max_steps: usize,
    tol: f64,
) -> BasinVerdict {
    match iterate_backward(map, x, max_steps, tol) {
        Err(_) => BasinVerdict::Undecided,
        Ok(trace) => match trace.verdict {
            Verdict::Converged { limit } => {
                let dist = limit.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if dist < tol {
                    BasinVerdict::Inside
                } else if dist > 100.0 * tol {
                    BasinVerdict::Outside
                } else {
                    BasinVerdict::Undecided
                }
            }
            Verdict::EscapedBox => BasinVerdict::Outside,
            Verdict::BudgetExhausted | Verdict::CycleSuspected => BasinVerdict::Undecided,
        },
    }
}

/// Planar phase regions cut out by the two growth nullclines, labeled by
/// the signs of `f - 1`: `R1` holds the origin (both above 1), `R2` holds
/// `r` (both below), `R3` meets the first axis (f1 below, f2 above), `R4`
/// is the mirror. `Other` within `tol` of a nullcline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegionTag {
    R1,
    R2,
    R3,
    R4,
    Other,
}

pub fn classify_region(map: &KolmogorovMap, x: &Point, tol: f64) -> Result<RegionTag, OrbitError> {
    assert_eq!(map.dim(), 2, "regions are defined for planar maps");
    let f = map.growth(x)?;
    let d1 = f[0] - 1.0;
    let d2 = f[1] - 1.0;
    if d1.abs() <= tol || d2.abs() <= tol {
        return Ok(RegionTag::Other);
    }
    Ok(match (d1 > 0.0, d2 > 0.0) {
        (true, true) => RegionTag::R1,
        (false, false) => RegionTag::R2,
        (false, true) => RegionTag::R3,
        (true, false) => RegionTag::R4,
    })
}

/// One of the four strict cone directions an orbit can settle into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConeDir {
    CUp,
    CDown,
    KUp,
    KDown,
}

impl std::fmt::Display for ConeDir {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConeDir::CUp => "C-up",
            ConeDir::CDown => "C-down",
            ConeDir::KUp => "K-up",
            ConeDir::KDown => "K-down",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MonotoneRun {
    pub cone: ConeDir,
    /// Index of the first step of the monotone suffix.
    pub onset: usize,
}

fn tag_matches(rel: &OrderRel, dir: ConeDir) -> bool {
    let strict_in = |c: &ConeRel, want: Sign| {
        matches!(c, ConeRel::Lt(s) | ConeRel::Ll(s) if *s == want)
    };
    match dir {
        ConeDir::CUp => strict_in(&rel.c, Sign::Up),
        ConeDir::CDown => strict_in(&rel.c, Sign::Down),
        ConeDir::KUp => strict_in(&rel.k, Sign::Up),
        ConeDir::KDown => strict_in(&rel.k, Sign::Down),
    }
}

/// Steps smaller than this are numerically stationary: their order tags
/// carry no information, so a stationary tail neither extends nor breaks a
/// monotone run.
const STATIONARY_TOL: f64 = 10.0 * TAG_TOL;

/// Finds the earliest index after which every remaining step of the trace
/// is strictly monotone in a single cone direction, requiring a run of at
/// least `window` steps. Equalities and sub-margin ties break runs, except
/// in a trailing stationary plateau where the orbit has effectively stopped
/// moving (steps below [`STATIONARY_TOL`]); an entirely stationary trace is
/// not monotone.
pub fn detect_eventual_monotonicity(trace: &OrbitTrace, window: usize) -> Option<MonotoneRun> {
    assert!(window >= 1);
    // Skip the trailing stationary plateau: non-strict tags there are
    // artifacts of the tag margin, not evidence against monotonicity.
    let mut end = trace.tags.len();
    while end > 0 {
        let t = &trace.tags[end - 1];
        let step = trace.points[end - 1].inf_dist(&trace.points[end]);
        if (t.c.is_strict() || t.k.is_strict()) || step >= STATIONARY_TOL {
            break;
        }
        end -= 1;
    }
    if end < window {
        return None;
    }
    let mut best: Option<MonotoneRun> = None;
    for dir in [ConeDir::CUp, ConeDir::CDown, ConeDir::KUp, ConeDir::KDown] {
        // Longest qualifying suffix for this direction.
        let mut onset = end;
        for (i, t) in trace.tags[..end].iter().enumerate().rev() {
            if tag_matches(t, dir) {
                onset = i;
            } else {
                break;
            }
        }
        let run = end - onset;
        if run >= window && best.is_none_or(|b| onset < b.onset) {
            best = Some(MonotoneRun { cone: dir, onset });
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RetrotoneStatus {
    Pass,
    Fail,
    /// Too few sampled pairs survived the image-order filter to conclude
    /// anything; raise the pair budget.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct RetrotoneCounterexample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub tx: Vec<f64>,
    pub ty: Vec<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RetrotoneReport {
    pub status: RetrotoneStatus,
    pub weak: bool,
    pub n_pairs: usize,
    /// Pairs whose images were strictly ordered in the K-order (both
    /// orientations counted; the pair is relabeled so images are ordered).
    pub filtered: usize,
    pub seed: u64,
    pub counterexample: Option<RetrotoneCounterexample>,
}

/// Samples uniform pairs in `[0, r]`, keeps those whose images satisfy
/// `T(x) <_K T(y)`, and asserts backward monotonicity: `x <_K y` plus the
/// componentwise strictness clauses. `weak = true` conditions strictness on
/// the image components being strictly ordered; `weak = false` demands the
/// stronger clauses conditioned only on the relevant component of the pair
/// being nonzero. Zero tests are exact (sampling almost never produces
/// exact zeros; boundary cases should be probed directly).
pub fn sample_retrotone(
    map: &KolmogorovMap,
    n_pairs: usize,
    seed: u64,
    weak: bool,
) -> Result<RetrotoneReport, OrbitError> {
    let n = map.dim();
    let split = map.split();
    let r = map.r();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut filtered = 0usize;
    let mut tx = vec![0.0; n];
    let mut ty = vec![0.0; n];

    for _ in 0..n_pairs {
        let x: Vec<f64> = (0..n).map(|i| r[i] * rng.gen::<f64>()).collect();
        let y: Vec<f64> = (0..n).map(|i| r[i] * rng.gen::<f64>()).collect();
        map.apply_into(&x, &mut tx)?;
        map.apply_into(&y, &mut ty)?;
        let txp = Point::from_slice(&tx).expect("image is finite");
        let typ = Point::from_slice(&ty).expect("image is finite");
        let rel = compare(&txp, &typ, split, 0.0).expect("matching dimensions");
        // Orient the pair so that T(x) <_K T(y); skip unordered images.
        let (x, y, tx_o, ty_o) = match rel.k {
            ConeRel::Lt(Sign::Up) | ConeRel::Ll(Sign::Up) => (&x, &y, &tx, &ty),
            ConeRel::Lt(Sign::Down) | ConeRel::Ll(Sign::Down) => (&y, &x, &ty, &tx),
            _ => continue,
        };
        filtered += 1;

        let fail = |reason: String| RetrotoneReport {
            status: RetrotoneStatus::Fail,
            weak,
            n_pairs,
            filtered,
            seed,
            counterexample: Some(RetrotoneCounterexample {
                x: x.clone(),
                y: y.clone(),
                tx: tx_o.clone(),
                ty: ty_o.clone(),
                reason,
            }),
        };

        // Baseline requirement in both modes: x <_K y strictly.
        let xp = Point::from_slice(x).expect("sample is finite");
        let yp = Point::from_slice(y).expect("sample is finite");
        let xy = compare(&xp, &yp, split, 0.0).expect("matching dimensions");
        if !matches!(xy.k, ConeRel::Lt(Sign::Up) | ConeRel::Ll(Sign::Up)) {
            return Ok(fail(format!(
                "images are K-ordered but the pair is not: relation {}",
                xy
            )));
        }
        for i in 0..n {
            let horizontal = split.is_horizontal(i);
            let (premise, conclusion, label) = if weak {
                if horizontal {
                    (tx_o[i] < ty_o[i], x[i] < y[i], "below")
                } else {
                    (tx_o[i] > ty_o[i], x[i] > y[i], "above")
                }
            } else if horizontal {
                (y[i] != 0.0, x[i] < y[i], "below")
            } else {
                (x[i] != 0.0, x[i] > y[i], "above")
            };
            if premise && !conclusion {
                return Ok(fail(format!(
                    "component {} of the first point is not strictly {} the second \
                     ({} vs {})",
                    i + 1,
                    label,
                    x[i],
                    y[i]
                )));
            }
        }
    }

    let status = if filtered < 10 {
        RetrotoneStatus::Inconclusive
    } else {
        RetrotoneStatus::Pass
    };
    Ok(RetrotoneReport {
        status,
        weak,
        n_pairs,
        filtered,
        seed,
        counterexample: None,
    })
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

    fn custom(defs: &str) -> KolmogorovMap {
        KolmogorovMap::from_source(defs, &BTreeMap::new()).unwrap()
    }

    fn limit_of(trace: &OrbitTrace) -> Vec<f64> {
        match &trace.verdict {
            Verdict::Converged { limit } => limit.clone(),
            other => panic!("expected convergence, got {other:?}"),
        }
    }

    #[test]
    fn interior_orbit_converges_to_coexistence_point() {
        let map = example1(1.5, 0.05);
        let trace =
            iterate_forward(&map, &Point::planar(0.3, 1.7), 100_000, 1e-12).unwrap();
        let limit = limit_of(&trace);
        assert!((limit[0] - 1.0).abs() < 1e-9 && (limit[1] - 1.0).abs() < 1e-9);
        // The polished limit is a genuine fixed point.
        let lp = Point::from_slice(&limit).unwrap();
        let t = map.apply(&lp).unwrap();
        assert!(t.inf_dist(&lp) <= 1e-10);
        // Orbits settle into one strict cone direction.
        let run = detect_eventual_monotonicity(&trace, 10).expect("eventually monotone");
        assert!(run.onset + 10 <= trace.tags.len());
    }

    #[test]
    fn fixed_point_input_converges_in_place() {
        let map = example1(1.5, 0.05);
        let trace = iterate_forward(&map, &Point::planar(1.0, 1.0), 100, 1e-12).unwrap();
        assert_eq!(limit_of(&trace), vec![1.0, 1.0]);
        assert_eq!(trace.points.len(), CONV_STREAK + 1);
        // Constant traces are not strictly monotone.
        assert!(detect_eventual_monotonicity(&trace, 10).is_none());
    }

    #[test]
    fn diagonal_orbit_matches_scalar_iteration() {
        // On the diagonal the full map reduces to the scalar recursion
        // u -> g(u) in both components.
        let map = example1(0.75, 0.05);
        let trace = iterate_forward(&map, &Point::planar(1.6, 1.6), 100_000, 1e-12).unwrap();
        let mut u = 1.6f64;
        for p in &trace.points {
            assert!((p[0] - u).abs() <= 1e-12 && (p[1] - u).abs() <= 1e-12);
            u = map.diagonal_g(u).unwrap();
        }
        let limit = limit_of(&trace);
        assert!((limit[0] - 1.5).abs() < 1e-9 && (limit[1] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn axis_orbits_stay_on_axis_and_find_the_axial_fixed_point() {
        let map = example1(1.0, 0.05);
        let trace = iterate_forward(&map, &Point::planar(0.7, 0.0), 100_000, 1e-10).unwrap();
        for p in &trace.points {
            assert_eq!(p[1], 0.0);
        }
        let limit = limit_of(&trace);
        // Independently hand-computed root of the axial fixed-point equation.
        assert!((limit[0] - 0.317_672_196_171_980_67).abs() < 1e-9);
        assert_eq!(limit[1], 0.0);
    }

    #[test]
    fn runaway_orbit_reports_escape() {
        let map = custom("dim = 2\nsplit_k = 1\nr = (1, 1)\nf1 = 2\nf2 = 2\n");
        let trace = iterate_forward(&map, &Point::planar(1.0, 1.0), 100, 1e-12).unwrap();
        assert_eq!(trace.verdict, Verdict::EscapedBox);
        assert!(trace.points.len() < 10);
    }

    #[test]
    fn two_cycle_is_flagged_not_converged() {
        // Decoupled logistic-type components with a stable period-2 orbit.
        let map = custom(
            "dim = 2\nsplit_k = 1\nr = (1.3, 1.3)\nf1 = 3.3 - 2.3*x1\nf2 = 3.3 - 2.3*x2\n",
        );
        let trace = iterate_forward(&map, &Point::planar(0.5, 0.3), 5_000, 1e-10).unwrap();
        assert_eq!(trace.verdict, Verdict::CycleSuspected);
        assert!(detect_eventual_monotonicity(&trace, 10).is_none());
    }

    #[test]
    fn inversion_round_trips() {
        for (a, b) in [(1.0, 0.05), (0.75, 0.05), (1.5, 0.05)] {
            let map = example1(a, b);
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            for _ in 0..100 {
                let x = Point::planar(2.0 * rng.gen::<f64>(), 2.0 * rng.gen::<f64>());
                let y = map.apply(&x).unwrap();
                let back = invert_t(&map, &y, &x, 1e-12).unwrap();
                assert!(
                    back.inf_dist(&x) <= 1e-10,
                    "round-trip failed at {x} for a={a}"
                );
            }
        }
    }

    #[test]
    fn inversion_respects_supports() {
        let map = example1(1.0, 0.05);
        // The origin maps only to itself.
        let zero = Point::planar(0.0, 0.0);
        let x = invert_t(&map, &zero, &Point::planar(0.3, 0.3), 1e-12).unwrap();
        assert_eq!(x.as_slice(), &[0.0, 0.0]);
        // Points on an axis invert to the same axis, even from an interior
        // warm start.
        let y = map.apply(&Point::planar(0.6, 0.0)).unwrap();
        let x = invert_t(&map, &y, &Point::planar(0.5, 0.5), 1e-12).unwrap();
        assert_eq!(x[1], 0.0);
        assert!((x[0] - 0.6).abs() <= 1e-10);
    }

    #[test]
    fn inversion_rejects_points_outside_the_image() {
        let map = example1(1.0, 0.05);
        let err = invert_t(&map, &Point::planar(3.9, 3.9), &Point::planar(1.0, 1.0), 1e-12)
            .unwrap_err();
        match err {
            OrbitError::NotInImage { best_residual, .. } => assert!(best_residual > 1e-3),
            other => panic!("expected not-in-image, got {other}"),
        }
    }

    #[test]
    fn backward_orbit_identifies_the_origin_basin() {
        let map = example1(1.0, 0.05);
        let trace =
            iterate_backward(&map, &Point::planar(0.05, 0.05), 1_000, 1e-8).unwrap();
        let limit = limit_of(&trace);
        assert!(limit.iter().all(|v| v.abs() < 1e-8));
        // Backward consistency: T applied to each preimage recovers its
        // successor in the recorded (backward) order.
        for m in 0..trace.points.len() - 1 {
            let fwd = map.apply(&trace.points[m + 1]).unwrap();
            assert!(fwd.inf_dist(&trace.points[m]) <= 1e-11 * 10.0);
        }
        assert_eq!(
            basin_of_repulsion_test(&map, &Point::planar(0.05, 0.05), 1_000, 1e-8),
            BasinVerdict::Inside
        );
    }

    #[test]
    fn fixed_points_are_outside_the_origin_basin() {
        let map = example1(1.0, 0.05);
        // Constant backward orbit at the interior fixed point.
        let trace = iterate_backward(&map, &Point::planar(1.0, 1.0), 200, 1e-8).unwrap();
        let limit = limit_of(&trace);
        assert!((limit[0] - 1.0).abs() < 1e-9 && (limit[1] - 1.0).abs() < 1e-9);
        assert_eq!(
            basin_of_repulsion_test(&map, &Point::planar(1.0, 1.0), 200, 1e-8),
            BasinVerdict::Outside
        );
    }

    #[test]
    fn backward_orbit_can_exit_the_box() {
        let map = example1(1.0, 0.05);
        let trace = iterate_backward(&map, &Point::planar(1.9, 1.9), 50, 1e-8).unwrap();
        assert_eq!(trace.verdict, Verdict::EscapedBox);
        let last = trace.last();
        assert!(last[0] > 2.0 || last[1] > 2.0);
    }

    #[test]
    fn phase_regions_by_growth_signs() {
        let map = example1(1.0, 0.05);
        let tol = 1e-9;
        let at = |x1, x2| classify_region(&map, &Point::planar(x1, x2), tol).unwrap();
        assert_eq!(at(0.1, 0.1), RegionTag::R1);
        assert_eq!(at(1.9, 1.9), RegionTag::R2);
        assert_eq!(at(0.6, 0.05), RegionTag::R3);
        assert_eq!(at(0.05, 0.6), RegionTag::R4);
        // Both nullclines pass through the coexistence point.
        assert_eq!(at(1.0, 1.0), RegionTag::Other);
    }

    #[test]
    fn retrotone_sampling_passes_for_the_reference_map() {
        let map = example1(1.0, 0.05);
        for weak in [true, false] {
            let report = sample_retrotone(&map, 20_000, 7, weak).unwrap();
            assert_eq!(report.status, RetrotoneStatus::Pass, "weak={weak}");
            assert!(report.filtered >= 10);
            assert!(report.counterexample.is_none());
        }
    }

    #[test]
    fn retrotone_sampling_catches_a_sign_broken_map() {
        // Competitive coupling in both directions (the second row should be
        // cooperative toward the first group): backward monotonicity fails.
        let map = custom(
            "dim = 2\nsplit_k = 1\nr = (2, 2)\nf1 = exp(1 - x1 - 0.5*x2)\nf2 = exp(1 - 0.5*x1 - x2)\n",
        );
        for weak in [true, false] {
            let report = sample_retrotone(&map, 100_000, 1, weak).unwrap();
            assert_eq!(report.status, RetrotoneStatus::Fail, "weak={weak}");
            let ce = report.counterexample.unwrap();
            // Re-verify the counterexample from scratch.
            let tx = map.apply(&Point::from_slice(&ce.x).unwrap()).unwrap();
            let ty = map.apply(&Point::from_slice(&ce.y).unwrap()).unwrap();
            let rel = compare(&tx, &ty, map.split(), 0.0).unwrap();
            assert!(matches!(rel.k, ConeRel::Lt(Sign::Up) | ConeRel::Ll(Sign::Up)));
        }
    }

    #[test]
    fn retrotone_with_tiny_budget_is_inconclusive() {
        let map = example1(1.0, 0.05);
        let report = sample_retrotone(&map, 5, 3, true).unwrap();
        assert_eq!(report.status, RetrotoneStatus::Inconclusive);
    }
}
