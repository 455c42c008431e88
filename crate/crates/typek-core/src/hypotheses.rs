//! Numerical certification of the standing hypotheses.
//!
//! Every check here is a sampling certificate, not a proof: conditions
//! quantified over the continuum are tested on grids/sections at a recorded
//! resolution, and each failure carries a concrete witness point that can be
//! re-evaluated independently. The checks:
//!
//! * sign structure of `Df` (competitive within groups, cooperative across),
//! * a repelling origin (`f(0)` componentwise above 1),
//! * forward invariance of the working box, `T([0,r]) ⊂ [0,r)`,
//! * dissipativity sections along translated faces of growing boxes,
//! * the spectral condition `rho(M(x)) < 1`,
//! * the planar trace/determinant criterion equivalent to it.

use serde::Serialize;
use thiserror::Error;

use crate::cone::Point;
use crate::linalg::LinalgError;
use crate::map::{KolmogorovMap, MapError};

/// Margin used when a condition demands strict inequality at a point.
pub const STRICT_MARGIN: f64 = 1e-12;

/// Default per-axis grid resolution for planar maps.
pub const DEFAULT_GRID_RES: usize = 65;

/// Default number of samples along a dissipativity section.
pub const DEFAULT_S_RES: usize = 200;

/// Default box-growth offsets for the dissipativity sections.
pub const DEFAULT_T_GRID: [f64; 6] = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0];

#[derive(Debug, Error)]
pub enum HypothesisError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("spectral radius iteration failed at {point:?}: {source}")]
    Spectral {
        point: Vec<f64>,
        source: LinalgError,
    },
    #[error("this check requires a planar map (dim = 2), got dim = {0}")]
    NotPlanar(usize),
}

/// Sign-structure violation: entry `(row, col)` of `Df` at `point` has the
/// wrong sign for its block.
#[derive(Debug, Clone, Serialize)]
pub struct SignViolation {
    pub point: Vec<f64>,
    pub row: usize,
    pub col: usize,
    pub value: f64,
    /// Which sign rule was broken: "diagonal", "within-group", "cross-group".
    pub rule: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SignCheck {
    pub pass: bool,
    pub violation: Option<SignViolation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OriginCheck {
    pub pass: bool,
    pub f_at_origin: Vec<f64>,
    /// Smallest componentwise excess of `f(0)` over 1.
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceCheck {
    pub pass: bool,
    /// Largest value of `T_i(x)/r_i` over the grid; the box maps into its
    /// own interior (upper faces excluded) exactly when this stays below 1.
    pub max_ratio: f64,
    pub argmax: Vec<f64>,
    pub component: usize,
}

/// The worst dissipativity section: at box offset `t`, along coordinate
/// `index`, the sampled maximum of `T_index` over the section was `value`
/// against the bound `u_index(t)`.
#[derive(Debug, Clone, Serialize)]
pub struct SectionWitness {
    pub t: f64,
    pub index: usize,
    pub s: f64,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DissipativityCheck {
    pub pass: bool,
    /// Minimum of `bound - value` over all sections; positive iff pass.
    pub worst_margin: f64,
    pub witness: SectionWitness,
    pub t_grid: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RhoCheck {
    pub pass: bool,
    pub max_rho: f64,
    pub argmax: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Criterion12Check {
    /// The trace/determinant inequality holds at every sampled nonzero point.
    pub pass: bool,
    /// The inequality agreed with the closed-form `rho(M) < 1` at every
    /// sampled point satisfying the side conditions (positive trace,
    /// positive discriminant).
    pub oracle_agreement: bool,
    pub mismatch_example: Option<Vec<f64>>,
    /// Sampled nonzero points where the side conditions themselves failed;
    /// these are reported rather than silently counted as agreement.
    pub side_condition_failures: usize,
    pub side_condition_example: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSpec {
    pub grid_res: usize,
    pub s_res: usize,
    pub t_grid: Vec<f64>,
}

/// Aggregated hypothesis certificate for one map at one resolution.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub a1: SignCheck,
    pub a2: OriginCheck,
    pub invariance: InvarianceCheck,
    pub dissipative: DissipativityCheck,
    pub rho: RhoCheck,
    /// Planar maps only.
    pub criterion12: Option<Criterion12Check>,
    /// Closed-form norm bound on the interaction matrix, when the family
    /// provides one.
    pub norm_bound: Option<f64>,
    pub grid_spec: GridSpec,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.a1.pass
            && self.a2.pass
            && self.invariance.pass
            && self.dissipative.pass
            && self.rho.pass
            && self
                .criterion12
                .as_ref()
                .is_none_or(|c| c.pass && c.oracle_agreement)
    }
}

/// Checks the competitive/cooperative sign pattern of `Df` over a grid on
/// `[0, r]` plus any `extra` probe points (retained witnesses from coarser
/// runs, so refining a grid can never turn a failure into a pass).
pub fn check_a1_signs(
    map: &KolmogorovMap,
    grid_res: usize,
    extra: &[Point],
) -> Result<SignCheck, HypothesisError> {
    let split = *map.split();
    for x in map.domain().grid(grid_res).iter().chain(extra) {
        let df = map.growth_jacobian(x)?;
        for i in 0..map.dim() {
            for j in 0..map.dim() {
                let v = df.get(i, j);
                let same_group = split.is_horizontal(i) == split.is_horizontal(j);
                let rule = if i == j {
                    // Self-limitation: strictly negative.
                    (v < 0.0).then_some(()).ok_or("diagonal")
                } else if same_group {
                    (v <= 0.0).then_some(()).ok_or("within-group")
                } else {
                    (v >= 0.0).then_some(()).ok_or("cross-group")
                };
                if let Err(rule) = rule {
                    return Ok(SignCheck {
                        pass: false,
                        violation: Some(SignViolation {
                            point: x.as_slice().to_vec(),
                            row: i,
                            col: j,
                            value: v,
                            rule: rule.to_string(),
                        }),
                    });
                }
            }
        }
    }
    Ok(SignCheck {
        pass: true,
        violation: None,
    })
}

/// Checks that the origin repels: `f(0)` strictly exceeds 1 componentwise.
pub fn check_a2_origin(map: &KolmogorovMap) -> Result<OriginCheck, HypothesisError> {
    let zero = Point::new(vec![0.0; map.dim()]).expect("origin is a valid point");
    let f0 = map.growth(&zero)?;
    let margin = (0..map.dim())
        .map(|i| f0[i] - 1.0)
        .fold(f64::INFINITY, f64::min);
    Ok(OriginCheck {
        pass: margin > STRICT_MARGIN,
        f_at_origin: f0.as_slice().to_vec(),
        margin,
    })
}

/// Checks `T([0, r]) ⊂ [0, r)` on a grid including all faces.
pub fn check_forward_invariance(
    map: &KolmogorovMap,
    grid_res: usize,
    extra: &[Point],
) -> Result<InvarianceCheck, HypothesisError> {
    let r = map.r();
    let mut worst = InvarianceCheck {
        pass: true,
        max_ratio: f64::NEG_INFINITY,
        argmax: vec![0.0; map.dim()],
        component: 0,
    };
    let mut image = vec![0.0; map.dim()];
    for x in map.domain().grid(grid_res).iter().chain(extra) {
        map.apply_into(x.as_slice(), &mut image)
            .map_err(HypothesisError::Map)?;
        for (i, &t) in image.iter().enumerate() {
            let ratio = t / r[i];
            if ratio > worst.max_ratio {
                worst.max_ratio = ratio;
                worst.argmax = x.as_slice().to_vec();
                worst.component = i;
            }
        }
    }
    worst.pass = worst.max_ratio < 1.0;
    Ok(worst)
}

/// Golden-section maximization of a unimodal section on `[a, b]`.
fn golden_max<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    mut a: f64,
    mut b: f64,
) -> Result<(f64, f64), E> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc > fd { (c, fc) } else { (d, fd) })
}

/// Dissipativity sections: along the growing boxes `[0, u(t)]` with
/// `u(t) = r + t·(1,...,1)`, each coordinate section
/// `s -> T_i(s e_i + u(t) restricted to the other group)` must stay below
/// `u_i(t)` for `s` in `[0, u_i(t)]`. The maximum is located on `s_res + 1`
/// uniform samples and sharpened by golden-section search around the
/// discrete argmax.
pub fn check_dissipativity(
    map: &KolmogorovMap,
    t_grid: &[f64],
    s_res: usize,
) -> Result<DissipativityCheck, HypothesisError> {
    assert!(s_res >= 2, "need at least 2 section samples");
    let n = map.dim();
    let split = *map.split();
    let r = map.r();
    let mut worst: Option<(f64, SectionWitness)> = None;
    let mut image = vec![0.0; n];

    for &t in t_grid {
        let u: Vec<f64> = (0..n).map(|i| r[i] + t).collect();
        for i in 0..n {
            // Base point: u(t) restricted to the complementary group.
            let mut base = vec![0.0; n];
            for j in 0..n {
                if split.is_horizontal(j) != split.is_horizontal(i) {
                    base[j] = u[j];
                }
            }
            let bound = u[i];
            let mut section = |s: f64| -> Result<f64, HypothesisError> {
                let mut x = base.clone();
                x[i] = s;
                map.apply_into(&x, &mut image)?;
                Ok(image[i])
            };
            // Uniform scan.
            let mut best_s = 0.0;
            let mut best_v = f64::NEG_INFINITY;
            for m in 0..=s_res {
                let s = bound * m as f64 / s_res as f64;
                let v = section(s)?;
                if v > best_v {
                    best_v = v;
                    best_s = s;
                }
            }
            // Local refinement around the discrete argmax.
            let step = bound / s_res as f64;
            let lo = (best_s - step).max(0.0);
            let hi = (best_s + step).min(bound);
            let (gs, gv) = golden_max(&mut section, lo, hi)?;
            if gv > best_v {
                best_v = gv;
                best_s = gs;
            }
            let margin = bound - best_v;
            if worst.as_ref().is_none_or(|(m, _)| margin < *m) {
                worst = Some((
                    margin,
                    SectionWitness {
                        t,
                        index: i,
                        s: best_s,
                        value: best_v,
                        bound,
                    },
                ));
            }
        }
    }
    let (worst_margin, witness) = worst.expect("t_grid and dimensions are nonempty");
    Ok(DissipativityCheck {
        pass: worst_margin > 0.0,
        worst_margin,
        witness,
        t_grid: t_grid.to_vec(),
    })
}

fn rho_at(map: &KolmogorovMap, x: &Point) -> Result<f64, HypothesisError> {
    let m = map.growth_matrix(x)?;
    if map.dim() == 2 {
        m.spectral_radius2().map_err(|source| HypothesisError::Spectral {
            point: x.as_slice().to_vec(),
            source,
        })
    } else {
        // For higher dimensions bound rho(M) by rho(|M|) via power iteration.
        m.abs()
            .spectral_radius_nonneg(1e-10, 10_000)
            .map_err(|source| HypothesisError::Spectral {
                point: x.as_slice().to_vec(),
                source,
            })
    }
}

/// Checks `rho(M(x)) < 1` over the grid (closed-form eigenvalues in the
/// plane, power iteration on `|M|` above).
pub fn check_rho(
    map: &KolmogorovMap,
    grid_res: usize,
    extra: &[Point],
) -> Result<RhoCheck, HypothesisError> {
    let mut max_rho = f64::NEG_INFINITY;
    let mut argmax = vec![0.0; map.dim()];
    for x in map.domain().grid(grid_res).iter().chain(extra) {
        let rho = rho_at(map, x)?;
        if rho > max_rho {
            max_rho = rho;
            argmax = x.as_slice().to_vec();
        }
    }
    Ok(RhoCheck {
        pass: max_rho < 1.0,
        max_rho,
        argmax,
    })
}

/// The planar trace/determinant inequality on the interaction matrix.
pub fn criterion12_holds(trace: f64, det: f64) -> bool {
    trace < 2.0f64.min(1.0 + det)
}

/// Evaluates the planar criterion at one point.
pub fn check_criterion12_point(
    map: &KolmogorovMap,
    x: &Point,
) -> Result<bool, HypothesisError> {
    if map.dim() != 2 {
        return Err(HypothesisError::NotPlanar(map.dim()));
    }
    let m = map.growth_matrix(x)?;
    let det = m.det2().expect("planar matrix");
    Ok(criterion12_holds(m.trace(), det))
}

/// Sweeps the planar criterion over the grid (origin excluded) and
/// cross-validates it against the closed-form spectral radius wherever the
/// side conditions (positive trace, positive discriminant) hold.
pub fn check_criterion12_grid(
    map: &KolmogorovMap,
    grid_res: usize,
) -> Result<Criterion12Check, HypothesisError> {
    if map.dim() != 2 {
        return Err(HypothesisError::NotPlanar(map.dim()));
    }
    let mut out = Criterion12Check {
        pass: true,
        oracle_agreement: true,
        mismatch_example: None,
        side_condition_failures: 0,
        side_condition_example: None,
    };
    for x in map.domain().grid(grid_res) {
        if x.as_slice().iter().all(|&v| v == 0.0) {
            continue;
        }
        let m = map.growth_matrix(&x)?;
        let tr = m.trace();
        let det = m.det2().expect("planar matrix");
        let holds = criterion12_holds(tr, det);
        if !holds && out.pass {
            out.pass = false;
        }
        let rho = m
            .spectral_radius2()
            .map_err(|source| HypothesisError::Spectral {
                point: x.as_slice().to_vec(),
                source,
            })?;
        let side_ok = tr > 0.0 && tr * tr - 4.0 * det > 0.0;
        if side_ok {
            if holds != (rho < 1.0) && out.oracle_agreement {
                out.oracle_agreement = false;
                out.mismatch_example = Some(x.as_slice().to_vec());
            }
        } else {
            out.side_condition_failures += 1;
            if out.side_condition_example.is_none() {
                out.side_condition_example = Some(x.as_slice().to_vec());
            }
        }
    }
    Ok(out)
}

/// Runs the full gate at one resolution.
pub fn run_hypothesis_gate(
    map: &KolmogorovMap,
    grid_res: usize,
    s_res: usize,
    t_grid: &[f64],
) -> Result<HypothesisReport, HypothesisError> {
    let a1 = check_a1_signs(map, grid_res, &[])?;
    let a2 = check_a2_origin(map)?;
    let invariance = check_forward_invariance(map, grid_res, &[])?;
    let dissipative = check_dissipativity(map, t_grid, s_res)?;
    let rho = check_rho(map, grid_res, &[])?;
    let criterion12 = if map.dim() == 2 {
        Some(check_criterion12_grid(map, grid_res)?)
    } else {
        None
    };
    Ok(HypothesisReport {
        a1,
        a2,
        invariance,
        dissipative,
        rho,
        criterion12,
        norm_bound: map.norm_bound(),
        grid_spec: GridSpec {
            grid_res,
            s_res,
            t_grid: t_grid.to_vec(),
        },
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

    #[test]
    fn reference_map_passes_all_checks() {
        let map = example1(1.0, 0.05);
        let report =
            run_hypothesis_gate(&map, DEFAULT_GRID_RES, DEFAULT_S_RES, &DEFAULT_T_GRID).unwrap();
        assert!(report.a1.pass);
        assert!(report.a2.pass);
        assert!(report.invariance.pass, "max ratio {}", report.invariance.max_ratio);
        assert!(report.dissipative.pass, "margin {}", report.dissipative.worst_margin);
        assert!(report.rho.pass);
        assert!(report.all_pass());
        // f(0) = 1 + b atan(1) in both components.
        let expect = 1.0 + 0.05 * 1.0f64.atan();
        assert_eq!(report.a2.f_at_origin, vec![expect, expect]);
        // The grid maximum of rho is controlled by the closed-form norm bound.
        let bound = report.norm_bound.unwrap();
        assert!(report.rho.max_rho <= bound + 1e-12);
        assert!(bound < 0.534);
    }

    #[test]
    fn sign_check_fails_on_positive_self_dependence() {
        // f1 grows with x1: the diagonal rule must flag it, with a witness.
        let map = custom("dim = 2\nsplit_k = 1\nr = (1, 1)\nf1 = 1 + x1\nf2 = 2 - x2\n");
        let check = check_a1_signs(&map, 9, &[]).unwrap();
        assert!(!check.pass);
        let v = check.violation.unwrap();
        assert_eq!((v.row, v.col), (0, 0));
        assert_eq!(v.rule, "diagonal");
        assert!(v.value > 0.0);
    }

    #[test]
    fn sign_check_passes_for_saturating_cross_coupling() {
        let map = custom(
            "dim = 2\nsplit_k = 1\nr = (1, 1)\nf1 = 1 + 0.3*atan(x2 - x1)\nf2 = 1 + 0.3*atan(x1 - x2)\n",
        );
        assert!(check_a1_signs(&map, 17, &[]).unwrap().pass);
    }

    #[test]
    fn witness_retention_keeps_failures_failing() {
        // At a coarse grid the violation of the cross-group rule may or may
        // not be sampled; once a witness is known, re-running at any
        // resolution with the witness appended must still fail.
        let map = custom("dim = 2\nsplit_k = 1\nr = (1, 1)\nf1 = 1 + x1\nf2 = 2 - x2\n");
        let coarse = check_a1_signs(&map, 3, &[]).unwrap();
        assert!(!coarse.pass);
        let witness = Point::from_slice(&coarse.violation.as_ref().unwrap().point).unwrap();
        let refined = check_a1_signs(&map, 6, &[witness]).unwrap();
        assert!(!refined.pass);
    }

    #[test]
    fn origin_check_boundary_cases() {
        assert!(check_a2_origin(&example1(1.0, 0.05)).unwrap().pass);
        // f1(0) = 1 exactly: not strictly above 1.
        let flat = custom("dim = 2\nsplit_k = 1\nr = (1, 1)\nf1 = 1 + 0.1*atan(x2) - 0.1*atan(x1)\nf2 = 1.2 - 0.1*x2 + 0.1*x1\n");
        let check = check_a2_origin(&flat).unwrap();
        assert!(!check.pass);
        assert_eq!(check.f_at_origin[0], 1.0);
        // One component below 1.
        let low = custom("dim = 2\nsplit_k = 1\nr = (1, 1)\nf1 = 0.9 - 0.1*x1 + 0.1*x2\nf2 = 1.1 - 0.1*x2 + 0.1*x1\n");
        assert!(!check_a2_origin(&low).unwrap().pass);
    }

    #[test]
    fn invariance_detects_identity_map() {
        // f = 1 everywhere: T(r) = r sits on the excluded upper face.
        let map = custom("dim = 2\nsplit_k = 1\nr = (1, 1)\nf1 = 1\nf2 = 1\n");
        let check = check_forward_invariance(&map, 9, &[]).unwrap();
        assert!(!check.pass);
        assert!(check.max_ratio >= 1.0);
        let map = example1(1.0, 0.05);
        let check = check_forward_invariance(&map, DEFAULT_GRID_RES, &[]).unwrap();
        assert!(check.pass);
        assert!(check.max_ratio < 1.0);
    }

    #[test]
    fn dissipativity_sections() {
        let map = example1(1.0, 0.05);
        let check = check_dissipativity(&map, &DEFAULT_T_GRID, DEFAULT_S_RES).unwrap();
        assert!(check.pass);
        assert!(check.worst_margin > 0.0);

        // The identity-like map attains the bound at the section endpoint.
        let flat = custom("dim = 2\nsplit_k = 1\nr = (1, 1)\nf1 = 1\nf2 = 1\n");
        let check = check_dissipativity(&flat, &DEFAULT_T_GRID, 50).unwrap();
        assert!(!check.pass);
        assert!(check.worst_margin <= 0.0);
    }

    #[test]
    fn rho_check_reference_values() {
        let map = example1(1.0, 0.05);
        let check = check_rho(&map, DEFAULT_GRID_RES, &[]).unwrap();
        assert!(check.pass);
        assert!(check.max_rho < 0.534);
        // The interaction matrix vanishes at the origin.
        assert_eq!(rho_at(&map, &Point::planar(0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn criterion_inequality_cases() {
        // Reference point: trace 0.1, determinant 0.
        let map = example1(1.0, 0.05);
        assert!(check_criterion12_point(&map, &Point::planar(1.0, 1.0)).unwrap());
        // Trace beyond 2 can never satisfy the inequality.
        assert!(!criterion12_holds(2.5, 10.0));
        // Determinant branch binds below the constant branch.
        assert!(!criterion12_holds(1.05, 0.0));
        assert!(criterion12_holds(0.95, 0.0));
    }

    #[test]
    fn criterion_matches_spectral_oracle_on_grid() {
        for (a, b) in [(1.0, 0.05), (0.75, 0.05), (1.5, 0.05), (0.75, 0.2)] {
            let map = example1(a, b);
            let check = check_criterion12_grid(&map, DEFAULT_GRID_RES).unwrap();
            assert!(
                check.oracle_agreement,
                "a={a}, b={b}: criterion disagreed with the eigenvalue oracle at {:?}",
                check.mismatch_example
            );
            // The origin is excluded, and on this family no other sampled
            // point degenerates.
            assert_eq!(check.side_condition_failures, 0);
        }
    }

    #[test]
    fn planar_only_guards() {
        let map = custom(
            "dim = 3\nsplit_k = 1\nr = (1, 1, 1)\nf1 = 1.1 - 0.1*x1 + 0.05*x2 + 0.05*x3\nf2 = 1.1 + 0.05*x1 - 0.1*x2 - 0.05*x3\nf3 = 1.1 + 0.05*x1 - 0.05*x2 - 0.1*x3\n",
        );
        assert!(matches!(
            check_criterion12_point(&map, &Point::new(vec![0.5, 0.5, 0.5]).unwrap()),
            Err(HypothesisError::NotPlanar(3))
        ));
        // The rho check still works through the power-iteration path.
        let check = check_rho(&map, 9, &[]).unwrap();
        assert!(check.max_rho.is_finite());
    }
}
