//! The map model: discrete Kolmogorov systems `T_i(x) = x_i f_i(x)`.
//!
//! A [`KolmogorovMap`] bundles the per-capita growth functions `f_i`
//! (expression trees with parameters substituted), their exact symbolic
//! gradients, the index split defining the cone `K`, and the working box
//! `[0, r]`. Maps are immutable after construction and all evaluation
//! methods are pure, so values are reproducible bit for bit.
//!
//! Maps come from two sources: the builtin `example1` family (a planar
//! system with mutualistic coupling between the two groups and saturating
//! `atan` nonlinearities) and user-supplied definition files. Both go
//! through the same parser and evaluator, so a definition file that spells
//! out the builtin's formulas produces identical floating-point values.

// Positivity guards are written `!(v > 0.0)` rather than `v <= 0.0` on
// purpose: the negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::cone::{ConeSplit, OrderedBox, Point};
use crate::expr::{parse_expr, EvalError, Expr, ExprParseError};
use crate::linalg::Mat;

/// Name accepted by [`KolmogorovMap::builtin`].
pub const EXAMPLE1_NAME: &str = "example1";

/// Definition of the builtin planar family. Parameters `a` and `b` may be
/// overridden; the defaults below are the reference configuration.
const EXAMPLE1_SOURCE: &str = "\
dim = 2
split_k = 1
r = (2, 2)
param a = 1
param b = 0.05
f1 = 1 + b*atan(x2 - 1 - a*(x1-1) - (x1-1)^3)
f2 = 1 + b*atan(x1 - 1 - a*(x2-1) - (x2-1)^3)
";

#[derive(Debug, Error)]
pub enum MapError {
    #[error("map definition line {line}: {msg}")]
    File { line: usize, msg: String },
    #[error(transparent)]
    Expr(#[from] ExprParseError),
    #[error("f{index} evaluation failed at {point:?}: {source}")]
    Eval {
        index: usize,
        point: Vec<f64>,
        source: EvalError,
    },
    #[error("f{index}{point:?} = {value} is not positive; growth functions must be positive on [0, r]")]
    NonPositive {
        index: usize,
        point: Vec<f64>,
        value: f64,
    },
    #[error("unknown builtin map `{0}` (available: example1)")]
    UnknownBuiltin(String),
    #[error("operation requires the example1 builtin")]
    NotBuiltin,
    #[error(transparent)]
    Cone(#[from] crate::cone::ConeError),
}

/// Which family a map belongs to; builtins retain their defining
/// parameters so family-specific diagnostics stay available.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum MapFamily {
    Example1 { a: f64, b: f64 },
    Custom,
}

/// A discrete Kolmogorov system on the nonnegative orthant.
#[derive(Debug)]
pub struct KolmogorovMap {
    dim: usize,
    split: ConeSplit,
    r: Point,
    domain: OrderedBox,
    /// Growth functions with parameters substituted.
    growth: Vec<Expr>,
    /// `grad[i][j]` is the exact symbolic partial of `f_{i+1}` in `x_{j+1}`.
    grad: Vec<Vec<Expr>>,
    params: BTreeMap<String, f64>,
    family: MapFamily,
    /// Raw right-hand sides of the `f<i> =` lines, for report echoes.
    source_exprs: Vec<String>,
    warnings: Vec<String>,
}

impl KolmogorovMap {
    /// Builds a named builtin map. Parameter `overrides` replace the
    /// defaults from the builtin definition.
    pub fn builtin(name: &str, overrides: &BTreeMap<String, f64>) -> Result<Self, MapError> {
        if name != EXAMPLE1_NAME {
            return Err(MapError::UnknownBuiltin(name.to_string()));
        }
        let mut map = Self::from_source(EXAMPLE1_SOURCE, overrides)?;
        let a = map.params["a"];
        let b = map.params["b"];
        if !(a > 0.0) || !(b > 0.0) {
            return Err(MapError::File {
                line: 0,
                msg: format!("example1 requires a > 0 and b > 0, got a = {a}, b = {b}"),
            });
        }
        map.family = MapFamily::Example1 { a, b };
        if let Some((value, bound)) = map.condition_margin() {
            if value >= bound {
                map.warnings.push(format!(
                    "b = {value} is not below the smallness bound min{{a/pi, 1/(8 + 2a + atan(2 + a))}} = {bound}; \
                     the contraction estimate behind the global results is not guaranteed"
                ));
            }
        }
        Ok(map)
    }

    /// Parses a map definition (see the crate README for the file format)
    /// and binds parameters. `overrides` take precedence over `param` lines
    /// and may introduce additional names.
    pub fn from_source(
        source: &str,
        overrides: &BTreeMap<String, f64>,
    ) -> Result<Self, MapError> {
        let mut dim: Option<(usize, usize)> = None; // (value, line)
        let mut split_k: Option<(usize, usize)> = None;
        let mut r: Option<(Vec<f64>, usize)> = None;
        let mut params: BTreeMap<String, f64> = BTreeMap::new();
        let mut f_lines: BTreeMap<usize, (String, usize)> = BTreeMap::new();

        for (idx, raw) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| MapError::File { line: line_no, msg };

            if let Some(rest) = line.strip_prefix("param ") {
                let (name, value) = split_assignment(rest)
                    .ok_or_else(|| err("expected `param <name> = <real>`".to_string()))?;
                if !is_valid_param_name(name) {
                    return Err(err(format!("`{name}` is not a valid parameter name")));
                }
                let value: f64 = value
                    .parse()
                    .map_err(|_| err(format!("`{value}` is not a real number")))?;
                if params.insert(name.to_string(), value).is_some() {
                    return Err(err(format!("parameter `{name}` defined twice")));
                }
                continue;
            }

            let (key, value) = split_assignment(line)
                .ok_or_else(|| err("expected `<key> = <value>`".to_string()))?;
            match key {
                "dim" => {
                    if dim.is_some() {
                        return Err(err("`dim` given twice".to_string()));
                    }
                    let n: usize = value
                        .parse()
                        .map_err(|_| err(format!("`{value}` is not a positive integer")))?;
                    if n < 2 {
                        return Err(err("`dim` must be at least 2".to_string()));
                    }
                    dim = Some((n, line_no));
                }
                "split_k" => {
                    if split_k.is_some() {
                        return Err(err("`split_k` given twice".to_string()));
                    }
                    let k: usize = value
                        .parse()
                        .map_err(|_| err(format!("`{value}` is not a positive integer")))?;
                    split_k = Some((k, line_no));
                }
                "r" => {
                    if r.is_some() {
                        return Err(err("`r` given twice".to_string()));
                    }
                    r = Some((parse_tuple(value).map_err(err)?, line_no));
                }
                _ if key.starts_with('f') && key[1..].bytes().all(|b| b.is_ascii_digit()) => {
                    let i: usize = key[1..]
                        .parse()
                        .map_err(|_| err(format!("bad growth-function index in `{key}`")))?;
                    if i == 0 {
                        return Err(err("growth functions are numbered from f1".to_string()));
                    }
                    if f_lines.insert(i, (value.to_string(), line_no)).is_some() {
                        return Err(err(format!("`f{i}` defined twice")));
                    }
                }
                other => {
                    return Err(err(format!(
                        "unknown key `{other}` (expected dim, split_k, r, param, or f<i>)"
                    )));
                }
            }
        }

        let (n, _) = dim.ok_or(MapError::File {
            line: 0,
            msg: "missing `dim = <n>` line".to_string(),
        })?;
        let (k, k_line) = split_k.ok_or(MapError::File {
            line: 0,
            msg: "missing `split_k = <k>` line".to_string(),
        })?;
        let split = ConeSplit::new(n, k).map_err(|e| MapError::File {
            line: k_line,
            msg: e.to_string(),
        })?;
        let (r_vec, r_line) = r.ok_or(MapError::File {
            line: 0,
            msg: "missing `r = (...)` line".to_string(),
        })?;
        if r_vec.len() != n {
            return Err(MapError::File {
                line: r_line,
                msg: format!("`r` has {} components but dim = {n}", r_vec.len()),
            });
        }
        if let Some(bad) = r_vec.iter().find(|v| !(**v > 0.0)) {
            return Err(MapError::File {
                line: r_line,
                msg: format!("`r` components must be positive, got {bad}"),
            });
        }
        let r_point = Point::new(r_vec)?;
        let domain = OrderedBox::to_upper(r_point.clone())?;

        let mut merged = params.clone();
        let mut warnings = Vec::new();
        for (name, value) in overrides {
            if !is_valid_param_name(name) {
                return Err(MapError::File {
                    line: 0,
                    msg: format!("`{name}` is not a valid parameter name"),
                });
            }
            merged.insert(name.clone(), *value);
        }

        let mut growth = Vec::with_capacity(n);
        let mut source_exprs = Vec::with_capacity(n);
        let mut used_params: BTreeSet<String> = BTreeSet::new();
        for i in 1..=n {
            let (src, line_no) = f_lines.remove(&i).ok_or(MapError::File {
                line: 0,
                msg: format!("missing `f{i} = <expression>` line"),
            })?;
            let parsed = parse_expr(&src, line_no)?;

            let mut vars = BTreeSet::new();
            parsed.variables(&mut vars);
            if let Some(&out_of_range) = vars.iter().find(|v| **v >= n) {
                return Err(MapError::File {
                    line: line_no,
                    msg: format!("f{i} references x{} but dim = {n}", out_of_range + 1),
                });
            }

            let bound = parsed.bind(&|name| merged.get(name).copied());
            let mut unresolved = BTreeSet::new();
            bound.params(&mut unresolved);
            if let Some(name) = unresolved.into_iter().next() {
                return Err(MapError::File {
                    line: line_no,
                    msg: format!("unknown identifier `{name}` (not a parameter or state variable)"),
                });
            }
            parsed.params(&mut used_params);
            growth.push(bound);
            source_exprs.push(src);
        }
        if let Some((stray, _)) = f_lines.into_iter().next() {
            return Err(MapError::File {
                line: 0,
                msg: format!("`f{stray}` is outside 1..={n} (dim = {n})"),
            });
        }
        for name in merged.keys() {
            if !used_params.contains(name) {
                warnings.push(format!("parameter `{name}` is not used by any growth function"));
            }
        }

        let grad = growth
            .iter()
            .map(|f| (0..n).map(|j| f.diff(j)).collect())
            .collect();

        let map = KolmogorovMap {
            dim: n,
            split,
            r: r_point,
            domain,
            growth,
            grad,
            params: merged,
            family: MapFamily::Custom,
            source_exprs,
            warnings,
        };
        map.probe_positivity()?;
        Ok(map)
    }

    /// Spot-checks that every growth function is positive on a coarse grid
    /// over `[0, r]` (positivity on the whole box is a standing assumption
    /// that cannot be verified exhaustively).
    fn probe_positivity(&self) -> Result<(), MapError> {
        let res = match self.dim {
            0..=2 => 9,
            3..=4 => 5,
            _ => 3,
        };
        let mut f = vec![0.0; self.dim];
        for point in self.domain.grid(res) {
            self.growth_into(point.as_slice(), &mut f)?;
            for (i, &v) in f.iter().enumerate() {
                if !(v > 0.0) {
                    return Err(MapError::NonPositive {
                        index: i + 1,
                        point: point.as_slice().to_vec(),
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn split(&self) -> &ConeSplit {
        &self.split
    }

    /// The dissipativity anchor `r` (upper corner of the working box).
    pub fn r(&self) -> &Point {
        &self.r
    }

    /// The working box `[0, r]`.
    pub fn domain(&self) -> &OrderedBox {
        &self.domain
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn family(&self) -> &MapFamily {
        &self.family
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Raw expression text of each `f_i`, as written in the definition.
    pub fn source_exprs(&self) -> &[String] {
        &self.source_exprs
    }

    pub(crate) fn growth_into(&self, x: &[f64], out: &mut [f64]) -> Result<(), MapError> {
        debug_assert_eq!(x.len(), self.dim);
        for (i, f) in self.growth.iter().enumerate() {
            out[i] = f.eval(x).map_err(|e| self.eval_error(i, x, e))?;
        }
        Ok(())
    }

    pub(crate) fn apply_into(&self, x: &[f64], out: &mut [f64]) -> Result<(), MapError> {
        self.growth_into(x, out)?;
        for i in 0..self.dim {
            out[i] *= x[i];
        }
        Ok(())
    }

    fn eval_error(&self, i: usize, x: &[f64], source: EvalError) -> MapError {
        MapError::Eval {
            index: i + 1,
            point: x.to_vec(),
            source,
        }
    }

    /// `f(x)`: the vector of per-capita growth factors.
    pub fn growth(&self, x: &Point) -> Result<Point, MapError> {
        let mut out = vec![0.0; self.dim];
        self.growth_into(x.as_slice(), &mut out)?;
        Ok(Point::new(out)?)
    }

    /// `T(x) = (x_1 f_1(x), ..., x_N f_N(x))`.
    pub fn apply(&self, x: &Point) -> Result<Point, MapError> {
        let mut out = vec![0.0; self.dim];
        self.apply_into(x.as_slice(), &mut out)?;
        Ok(Point::new(out)?)
    }

    /// The Jacobian of the growth vector, `(Df)_ij = del f_i / del x_j`.
    pub fn growth_jacobian(&self, x: &Point) -> Result<Mat, MapError> {
        let xs = x.as_slice();
        let mut out = Mat::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let v = self.grad[i][j]
                    .eval(xs)
                    .map_err(|e| self.eval_error(i, xs, e))?;
                out.set(i, j, v);
            }
        }
        Ok(out)
    }

    /// The interaction matrix with entries `-(x_i / f_i(x)) del f_i/del x_j`.
    /// Its spectral radius staying below 1 drives invertibility and the
    /// backward monotonicity of `T`.
    pub fn growth_matrix(&self, x: &Point) -> Result<Mat, MapError> {
        let xs = x.as_slice();
        let mut f = vec![0.0; self.dim];
        self.growth_into(xs, &mut f)?;
        let mut out = Mat::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let g = self.grad[i][j]
                    .eval(xs)
                    .map_err(|e| self.eval_error(i, xs, e))?;
                out.set(i, j, -(xs[i] / f[i]) * g);
            }
        }
        Ok(out)
    }

    /// The Jacobian of `T`: `(DT)_ij = delta_ij f_i(x) + x_i del f_i/del x_j`,
    /// equivalently `diag(f(x)) (I - M(x))`.
    pub fn jacobian(&self, x: &Point) -> Result<Mat, MapError> {
        let xs = x.as_slice();
        let mut f = vec![0.0; self.dim];
        self.growth_into(xs, &mut f)?;
        let mut out = Mat::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let g = self.grad[i][j]
                    .eval(xs)
                    .map_err(|e| self.eval_error(i, xs, e))?;
                let v = if i == j { f[i] + xs[i] * g } else { xs[i] * g };
                out.set(i, j, v);
            }
        }
        Ok(out)
    }

    /// Restriction of the symmetric builtin to its invariant diagonal:
    /// `g(u) = u (1 + b atan((u-1)(1 - a - (u-1)^2)))`. Fixed points of `g`
    /// are exactly the diagonal fixed points of the planar map.
    pub fn diagonal_g(&self, u: f64) -> Result<f64, MapError> {
        let MapFamily::Example1 { a, b } = self.family else {
            return Err(MapError::NotBuiltin);
        };
        let v = u - 1.0;
        Ok(u * (1.0 + b * (v * (1.0 - a - v * v)).atan()))
    }

    /// For the builtin family: `(b, bound)` where the analysis requires
    /// `0 < b < bound = min{a/pi, 1/(8 + 2a + atan(2 + a))}`.
    pub fn condition_margin(&self) -> Option<(f64, f64)> {
        let MapFamily::Example1 { a, b } = self.family else {
            return None;
        };
        let bound = (a / std::f64::consts::PI).min(1.0 / (8.0 + 2.0 * a + (2.0 + a).atan()));
        Some((b, bound))
    }

    /// For the builtin family: the closed-form bound `2(a+4)b / (1 - b atan(2+a))`
    /// on the infinity norm of the interaction matrix over `[0, r]`
    /// (defined when the denominator is positive).
    pub fn norm_bound(&self) -> Option<f64> {
        let MapFamily::Example1 { a, b } = self.family else {
            return None;
        };
        let denom = 1.0 - b * (2.0 + a).atan();
        (denom > 0.0).then(|| 2.0 * (a + 4.0) * b / denom)
    }
}

fn split_assignment(line: &str) -> Option<(&str, &str)> {
    let (key, value) = line.split_once('=')?;
    let key = key.trim();
    let value = value.trim();
    if key.is_empty() || value.is_empty() {
        return None;
    }
    Some((key, value))
}

fn is_valid_param_name(name: &str) -> bool {
    let mut bytes = name.bytes();
    match bytes.next() {
        Some(b) if b.is_ascii_alphabetic() || b == b'_' => {}
        _ => return false,
    }
    if !bytes.all(|b| b.is_ascii_alphanumeric() || b == b'_') {
        return false;
    }
    // Reject names that collide with state variables or function names.
    if name.starts_with('x') && name[1..].bytes().all(|b| b.is_ascii_digit()) && name.len() > 1 {
        return false;
    }
    !matches!(name, "atan" | "exp" | "log" | "sqrt" | "tanh")
}

/// `"(v1, v2, ...)"` -> vector of reals.
fn parse_tuple(text: &str) -> Result<Vec<f64>, String> {
    let inner = text
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| format!("expected a parenthesized tuple, got `{text}`"))?;
    inner
        .split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<f64>()
                .map_err(|_| format!("`{part}` is not a real number"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn example1(a: f64, b: f64) -> KolmogorovMap {
        let mut overrides = BTreeMap::new();
        overrides.insert("a".to_string(), a);
        overrides.insert("b".to_string(), b);
        KolmogorovMap::builtin(EXAMPLE1_NAME, &overrides).unwrap()
    }

    fn random_domain_point(map: &KolmogorovMap, rng: &mut impl Rng) -> Point {
        let coords = (0..map.dim())
            .map(|i| rng.gen::<f64>() * map.r()[i])
            .collect();
        Point::new(coords).unwrap()
    }

    #[test]
    fn builtin_reference_values() {
        let map = example1(1.0, 0.05);
        // Interior equilibrium of the reference configuration.
        let one = Point::planar(1.0, 1.0);
        assert_eq!(map.apply(&one).unwrap(), one);
        // At the origin the atan argument telescopes to exactly 1.
        let f0 = map.growth(&Point::planar(0.0, 0.0)).unwrap();
        let expect = 1.0 + 0.05 * 1.0f64.atan();
        assert_eq!(f0[0], expect);
        assert_eq!(f0[1], expect);
        // The origin is mapped to itself.
        assert_eq!(
            map.apply(&Point::planar(0.0, 0.0)).unwrap(),
            Point::planar(0.0, 0.0)
        );
    }

    #[test]
    fn interaction_matrix_at_interior_equilibrium() {
        let map = example1(1.0, 0.05);
        let m = map.growth_matrix(&Point::planar(1.0, 1.0)).unwrap();
        // Hand-derived: the atan argument and its quadratic term vanish at
        // (1,1), leaving d f1/d x1 = -a b and d f1/d x2 = b exactly.
        assert_eq!(m.get(0, 0), 0.05);
        assert_eq!(m.get(0, 1), -0.05);
        assert_eq!(m.get(1, 0), -0.05);
        assert_eq!(m.get(1, 1), 0.05);
        let dt = map.jacobian(&Point::planar(1.0, 1.0)).unwrap();
        assert_eq!(dt.get(0, 0), 0.95);
        assert_eq!(dt.get(0, 1), 0.05);
        assert_eq!(dt.get(1, 0), 0.05);
        assert_eq!(dt.get(1, 1), 0.95);
    }

    #[test]
    fn kolmogorov_structure_zeroes_are_exact() {
        let map = example1(1.0, 0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let mut x = random_domain_point(&map, &mut rng).into_vec();
            let i = rng.gen_range(0..2);
            x[i] = 0.0;
            let y = map.apply(&Point::new(x).unwrap()).unwrap();
            assert_eq!(y[i], 0.0);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        for (a, b) in [(1.0, 0.05), (0.75, 0.05), (1.5, 0.05)] {
            let map = example1(a, b);
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            for _ in 0..100 {
                let x = random_domain_point(&map, &mut rng);
                let dt = map.jacobian(&x).unwrap();
                for j in 0..2 {
                    let h = 1e-6 * (1.0 + x[j].abs());
                    let mut hi = x.as_slice().to_vec();
                    let mut lo = hi.clone();
                    hi[j] += h;
                    lo[j] -= h;
                    let thi = map.apply(&Point::new(hi).unwrap()).unwrap();
                    let tlo = map.apply(&Point::new(lo).unwrap()).unwrap();
                    for i in 0..2 {
                        let fd = (thi[i] - tlo[i]) / (2.0 * h);
                        let exact = dt.get(i, j);
                        assert!(
                            (exact - fd).abs() <= 1e-6 * (1.0 + exact.abs()),
                            "DT[{i}][{j}] at {x}: symbolic {exact}, finite difference {fd}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn builtin_symmetry_is_exact() {
        let map = example1(0.75, 0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..500 {
            let x = random_domain_point(&map, &mut rng);
            let swapped = Point::planar(x[1], x[0]);
            let tx = map.apply(&x).unwrap();
            let tswapped = map.apply(&swapped).unwrap();
            // f2 is f1 with arguments transposed, so the swap symmetry holds
            // bit for bit, not merely approximately.
            assert_eq!(tswapped[0], tx[1]);
            assert_eq!(tswapped[1], tx[0]);
        }
    }

    #[test]
    fn parsed_file_matches_builtin_bitwise() {
        let source = "\
# reference planar configuration written out by hand
dim = 2
split_k = 1
r = (2, 2)
param a = 1
param b = 0.05
f1 = 1 + b*atan(x2 - 1 - a*(x1-1) - (x1-1)^3)
f2 = 1 + b*atan(x1 - 1 - a*(x2-1) - (x2-1)^3)
";
        let custom = KolmogorovMap::from_source(source, &BTreeMap::new()).unwrap();
        let builtin = example1(1.0, 0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..1000 {
            let x = random_domain_point(&builtin, &mut rng);
            let yc = custom.apply(&x).unwrap();
            let yb = builtin.apply(&x).unwrap();
            assert_eq!(yc[0], yb[0]);
            assert_eq!(yc[1], yb[1]);
            let fc = custom.growth(&x).unwrap();
            let fb = builtin.growth(&x).unwrap();
            assert_eq!(fc[0], fb[0]);
            assert_eq!(fc[1], fb[1]);
        }
    }

    #[test]
    fn diagonal_restriction() {
        let map = example1(0.75, 0.05);
        assert_eq!(map.diagonal_g(1.0).unwrap(), 1.0);
        assert_eq!(map.diagonal_g(0.0).unwrap(), 0.0);
        // u = 1 + sqrt(1 - a) is fixed: every factor of the atan argument
        // evaluates exactly for a = 0.75 (sqrt(0.25) = 0.5 is a dyadic).
        assert_eq!(map.diagonal_g(1.5).unwrap(), 1.5);
        assert_eq!(map.diagonal_g(0.5).unwrap(), 0.5);
        // Off the fixed set, g agrees with the first component of T on the
        // diagonal up to evaluation-order rounding.
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..200 {
            let u = rng.gen::<f64>() * 2.0;
            let g = map.diagonal_g(u).unwrap();
            let t = map.apply(&Point::planar(u, u)).unwrap();
            assert!((g - t[0]).abs() <= 1e-15 * (1.0 + g.abs()));
            assert!((g - t[1]).abs() <= 1e-15 * (1.0 + g.abs()));
        }
        let custom = KolmogorovMap::from_source("dim = 2\nsplit_k = 1\nr = (1, 1)\nf1 = 2 - x1\nf2 = 2 - x2\n", &BTreeMap::new()).unwrap();
        assert!(matches!(custom.diagonal_g(0.5), Err(MapError::NotBuiltin)));
    }

    #[test]
    fn parameter_condition_warning() {
        // Reference configuration: b = 0.05 < min{1/pi, 1/(10 + atan(3))}.
        let ok = example1(1.0, 0.05);
        assert!(ok.warnings().is_empty(), "{:?}", ok.warnings());
        let (b, bound) = ok.condition_margin().unwrap();
        assert_eq!(b, 0.05);
        assert!((bound - 1.0 / (10.0 + 3.0f64.atan())).abs() < 1e-15);

        // b = 0.2 exceeds min{0.75/pi, 1/(9.5 + atan(2.75))} ~ 0.0933.
        let warned = example1(0.75, 0.2);
        assert_eq!(warned.warnings().len(), 1);
        assert!(warned.warnings()[0].contains("smallness bound"));
        let (_, bound) = warned.condition_margin().unwrap();
        assert!((bound - 1.0 / (9.5 + 2.75f64.atan())).abs() < 1e-15);
    }

    #[test]
    fn norm_bound_value() {
        let map = example1(1.0, 0.05);
        let bound = map.norm_bound().unwrap();
        let expect = 2.0 * 5.0 * 0.05 / (1.0 - 0.05 * 3.0f64.atan());
        assert_eq!(bound, expect);
        assert!(bound < 0.534);

        let custom = KolmogorovMap::from_source(
            "dim = 2\nsplit_k = 1\nr = (1, 1)\nf1 = 2 - x1\nf2 = 2 - x2\n",
            &BTreeMap::new(),
        )
        .unwrap();
        assert!(custom.norm_bound().is_none());
    }

    #[test]
    fn file_errors_are_located() {
        let missing = KolmogorovMap::from_source("dim = 2\nsplit_k = 1\nr = (1, 1)\nf1 = 2 - x1\n", &BTreeMap::new());
        assert!(missing.unwrap_err().to_string().contains("missing `f2"));

        let trailing = KolmogorovMap::from_source(
            "dim = 2\nsplit_k = 1\nr = (1, 1)\nf1 = 1 +\nf2 = 2 - x2\n",
            &BTreeMap::new(),
        );
        let msg = trailing.unwrap_err().to_string();
        assert!(msg.contains("line 4"), "{msg}");

        let unknown = KolmogorovMap::from_source(
            "dim = 2\nsplit_k = 1\nr = (1, 1)\nf1 = 2 - c*x1\nf2 = 2 - x2\n",
            &BTreeMap::new(),
        );
        let msg = unknown.unwrap_err().to_string();
        assert!(msg.contains("unknown identifier `c`"), "{msg}");

        let out_of_range = KolmogorovMap::from_source(
            "dim = 2\nsplit_k = 1\nr = (1, 1)\nf1 = 2 - x3\nf2 = 2 - x2\n",
            &BTreeMap::new(),
        );
        let msg = out_of_range.unwrap_err().to_string();
        assert!(msg.contains("references x3"), "{msg}");

        let bad_split = KolmogorovMap::from_source(
            "dim = 2\nsplit_k = 2\nr = (1, 1)\nf1 = 2 - x1\nf2 = 2 - x2\n",
            &BTreeMap::new(),
        );
        assert!(bad_split.is_err());

        // f2 stays positive on the whole box so the first violation the
        // last-axis-fastest grid sweep reaches belongs to f1.
        let nonpositive = KolmogorovMap::from_source(
            "dim = 2\nsplit_k = 1\nr = (3, 3)\nf1 = 2 - x1\nf2 = 4 - x2\n",
            &BTreeMap::new(),
        );
        assert!(matches!(
            nonpositive.unwrap_err(),
            MapError::NonPositive { index: 1, .. }
        ));

        let unknown_builtin = KolmogorovMap::builtin("example9", &BTreeMap::new());
        assert!(matches!(
            unknown_builtin.unwrap_err(),
            MapError::UnknownBuiltin(_)
        ));
    }

    #[test]
    fn override_merging_and_unused_parameter_warning() {
        let mut overrides = BTreeMap::new();
        overrides.insert("a".to_string(), 1.5);
        let map = KolmogorovMap::builtin(EXAMPLE1_NAME, &overrides).unwrap();
        assert_eq!(map.params()["a"], 1.5);
        assert_eq!(map.params()["b"], 0.05); // default survives
        assert!(matches!(
            map.family(),
            MapFamily::Example1 { a, b } if *a == 1.5 && *b == 0.05
        ));

        let mut stray = BTreeMap::new();
        stray.insert("c".to_string(), 3.0);
        let map = KolmogorovMap::builtin(EXAMPLE1_NAME, &stray).unwrap();
        assert!(map.warnings().iter().any(|w| w.contains("`c`")));
    }

    #[test]
    fn eval_error_names_component_and_point() {
        let map = KolmogorovMap::from_source(
            "dim = 2\nsplit_k = 1\nr = (1, 1)\nf1 = 1 + 1/(1 + x1)\nf2 = 2 - x2\n",
            &BTreeMap::new(),
        )
        .unwrap();
        // Evaluation outside the probed box can hit the pole at x1 = -1.
        let err = map.growth(&Point::planar(-1.0, 0.5)).unwrap_err();
        match err {
            MapError::Eval { index, source, .. } => {
                assert_eq!(index, 1);
                assert_eq!(source, EvalError::DivisionByZero);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
