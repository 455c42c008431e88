//! Analysis toolkit for discrete competitive Kolmogorov systems on the
//! nonnegative cone: planar maps of the form `T_i(x) = x_i f_i(x)` whose
//! coordinates split into two competing groups.
//!
//! The crate provides:
//!
//! - [`cone`]: points, the split-cone order structure, and tolerance-margined
//!   order comparisons;
//! - [`expr`] / [`map`]: a small expression language for growth functions and
//!   the [`map::KolmogorovMap`] model with exact symbolic gradients;
//! - [`hypotheses`]: the verification gate (sign structure, repelling origin,
//!   forward invariance, dissipativity sections, spectral-radius bound, and
//!   the planar trace/determinant criterion with its closed-form oracle);
//! - [`orbit`]: forward/backward orbit iteration, inverse images by damped
//!   Newton, basin-of-repulsion tests, eventual-monotonicity detection, and
//!   randomized backward-order (retrotonicity) sampling;
//! - [`fixed_points`]: the complete fixed-point catalog (origin, axial,
//!   interior via nullcline crossings) with spectral classification;
//! - [`attractor`]: the attracting boundary decomposition - axial unstable
//!   manifolds, the interior connecting curve, and order-structure flags;
//! - [`geom`], [`serialize`], [`svg`]: polyline geometry, deterministic
//!   full-precision artifacts, and phase-portrait rendering.

pub mod attractor;
pub mod cone;
pub mod expr;
pub mod fixed_points;
pub mod geom;
pub mod hypotheses;
pub mod linalg;
pub mod map;
pub mod orbit;
pub mod serialize;
pub mod svg;

pub use attractor::{
    assemble_decomposition, build_sigma0, trace_unstable_manifold, AttractorConfig,
    AttractorDecomposition, AttractorError, ManifoldPolyline, MonotoneFlags, Sigma0Curve,
    UnorderedFlags,
};
pub use cone::{
    compare, ConeError, ConeRel, ConeSplit, OrderRel, OrderedBox, Point, Side, Sign,
};
pub use expr::{EvalError, Expr, ExprParseError};
pub use fixed_points::{
    find_all_fixed_points, find_axial_fixed_points, find_interior_fixed_points, trace_nullcline,
    Classification, FixedPointError, FixedPointKind, FixedPointRecord, NullclineId,
    NullclinePolyline,
};
pub use hypotheses::{run_hypothesis_gate, HypothesisError, HypothesisReport};
pub use linalg::{LinalgError, Mat};
pub use map::{KolmogorovMap, MapError, MapFamily, EXAMPLE1_NAME};
pub use orbit::{
    basin_of_repulsion_test, detect_eventual_monotonicity, invert_t, iterate_backward,
    iterate_forward, sample_retrotone, BasinVerdict, ConeDir, MonotoneRun, OrbitError, OrbitTrace,
    RegionTag, RetrotoneReport, RetrotoneStatus, Verdict,
};
