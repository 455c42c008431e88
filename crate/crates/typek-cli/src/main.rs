//! `typek`: command-line analysis of discrete competitive Kolmogorov systems.
//!
//! Subcommands: `check` (hypothesis gate), `fixed-points` (catalog),
//! `attractor` (gate + catalog + attracting-boundary decomposition),
//! `orbit` (forward orbit traces), and `retrotone` (randomized backward
//! order-reversal sampling).
//!
//! Exit codes: 0 all checks passed; 1 output could not be written; 2 a
//! verified check failed (including structural hypothesis violations); 3 a
//! numerical evaluation failed (divergence, starved budgets); 4 the map
//! definition or invocation was invalid; 5 the nullclines are degenerate
//! (too many crossings to isolate interior fixed points).

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use typek_core::attractor::{assemble_decomposition, AttractorConfig, AttractorError};
use typek_core::fixed_points::{
    find_all_fixed_points, trace_nullcline, FixedPointError, FixedPointRecord, NullclineId,
    NullclinePolyline, DEFAULT_NULLCLINE_SAMPLES,
};
use typek_core::hypotheses::{
    run_hypothesis_gate, HypothesisError, HypothesisReport, DEFAULT_S_RES, DEFAULT_T_GRID,
};
use typek_core::map::{KolmogorovMap, MapError};
use typek_core::orbit::{
    detect_eventual_monotonicity, iterate_forward, sample_retrotone, OrbitError, RetrotoneStatus,
    Verdict,
};
use typek_core::serialize::{fixed_points_csv, orbit_csv, to_json_string, write_atomic};
use typek_core::svg::render_svg;
use typek_core::Point;

use rand::Rng;
use rand::SeedableRng;

const EXIT_OK: u8 = 0;
const EXIT_IO: u8 = 1;
const EXIT_CHECK_FAILED: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_BAD_MAP: u8 = 4;
const EXIT_DEGENERATE: u8 = 5;

/// A hard failure with its exit code; soft check failures return `Ok(2)`
/// from the command instead.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<MapError> for Failure {
    fn from(e: MapError) -> Self {
        let code = match &e {
            MapError::Eval { .. } => EXIT_NUMERIC,
            _ => EXIT_BAD_MAP,
        };
        Failure::new(code, format!("map error: {e}"))
    }
}

impl From<HypothesisError> for Failure {
    fn from(e: HypothesisError) -> Self {
        match e {
            HypothesisError::Map(m) => m.into(),
            other => Failure::new(EXIT_NUMERIC, format!("hypothesis check error: {other}")),
        }
    }
}

impl From<FixedPointError> for Failure {
    fn from(e: FixedPointError) -> Self {
        match e {
            FixedPointError::Map(m) => m.into(),
            FixedPointError::Degenerate { .. } => {
                Failure::new(EXIT_DEGENERATE, format!("fixed-point search: {e}"))
            }
            FixedPointError::NoAxialBracket { .. } => {
                Failure::new(EXIT_CHECK_FAILED, format!("fixed-point search: {e}"))
            }
            FixedPointError::NotPlanar(_) => {
                Failure::new(EXIT_BAD_MAP, format!("fixed-point search: {e}"))
            }
            FixedPointError::Eigen { .. } => {
                Failure::new(EXIT_NUMERIC, format!("fixed-point search: {e}"))
            }
        }
    }
}

impl From<OrbitError> for Failure {
    fn from(e: OrbitError) -> Self {
        match e {
            OrbitError::Map(m) => m.into(),
            other => Failure::new(EXIT_NUMERIC, format!("orbit error: {other}")),
        }
    }
}

impl From<AttractorError> for Failure {
    fn from(e: AttractorError) -> Self {
        match e {
            AttractorError::Map(m) => m.into(),
            AttractorError::NotSaddle { .. }
            | AttractorError::LeftBox { .. }
            | AttractorError::MissingFixedPoint(_) => {
                Failure::new(EXIT_CHECK_FAILED, format!("attractor assembly: {e}"))
            }
            AttractorError::ResolutionInsufficient { .. } => {
                Failure::new(EXIT_NUMERIC, format!("attractor assembly: {e}"))
            }
            AttractorError::NotPlanar(_) => {
                Failure::new(EXIT_BAD_MAP, format!("attractor assembly: {e}"))
            }
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::new(EXIT_IO, format!("serialization error: {e}"))
    }
}

#[derive(Parser)]
#[command(
    name = "typek",
    version,
    about = "Analyze discrete competitive Kolmogorov systems x -> (x_i f_i(x)): \
             verify the structural hypotheses, catalog fixed points, trace orbits, \
             and assemble the attracting boundary decomposition"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the hypothesis gate and write report.json.
    Check(CheckArgs),
    /// Locate and classify all fixed points; write fixed_points.csv/.json.
    FixedPoints(FixedPointsArgs),
    /// Run the gate and catalog, then assemble the attracting boundary;
    /// write report.json, fixed_points.*, attractor.json, attractor.svg.
    Attractor(AttractorCmdArgs),
    /// Iterate forward orbits; write one orbit_<idx>.csv per start.
    Orbit(OrbitArgs),
    /// Sample random ordered pairs to test backward order reversal.
    Retrotone(RetrotoneArgs),
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|_| format!("`{value}` is not a real number"))?;
    if !v.is_finite() {
        return Err(format!("parameter {name} must be finite"));
    }
    Ok((name.trim().to_string(), v))
}

#[derive(Args)]
struct MapArgs {
    /// Built-in map family (currently: example1).
    #[arg(
        long,
        value_name = "NAME",
        conflicts_with = "map",
        required_unless_present = "map"
    )]
    builtin: Option<String>,
    /// Path to a map definition file.
    #[arg(long, value_name = "FILE")]
    map: Option<PathBuf>,
    /// Parameter override NAME=VALUE (repeatable).
    #[arg(short = 'p', long = "param", value_name = "NAME=VALUE", value_parser = parse_param)]
    params: Vec<(String, f64)>,
}

impl MapArgs {
    fn load(&self) -> Result<KolmogorovMap, Failure> {
        let overrides: BTreeMap<String, f64> = self.params.iter().cloned().collect();
        let map = if let Some(name) = &self.builtin {
            KolmogorovMap::builtin(name, &overrides)?
        } else {
            let path = self.map.as_ref().expect("clap requires a map source");
            let text = std::fs::read_to_string(path).map_err(|e| {
                Failure::new(EXIT_BAD_MAP, format!("cannot read {}: {e}", path.display()))
            })?;
            KolmogorovMap::from_source(&text, &overrides)?
        };
        for w in map.warnings() {
            eprintln!("warning: {w}");
        }
        Ok(map)
    }

    fn load_planar(&self) -> Result<KolmogorovMap, Failure> {
        let map = self.load()?;
        if map.dim() != 2 {
            return Err(Failure::new(
                EXIT_BAD_MAP,
                format!("this command requires a planar map, got dimension {}", map.dim()),
            ));
        }
        Ok(map)
    }
}

#[derive(Args)]
struct OutArgs {
    /// Output directory for artifacts.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

impl OutArgs {
    fn write(&self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        std::fs::create_dir_all(&self.out)
            .map_err(|e| Failure::new(EXIT_IO, format!("cannot create {}: {e}", self.out.display())))?;
        let path = self.out.join(name);
        write_atomic(&path, bytes)
            .map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    map: MapArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Per-axis grid resolution for the sampled checks (default: 65 for
    /// planar maps, 17 otherwise).
    #[arg(long, value_name = "INT")]
    grid: Option<usize>,
}

#[derive(Args)]
struct FixedPointsArgs {
    #[command(flatten)]
    map: MapArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Samples along each nullcline when hunting interior crossings.
    #[arg(long, value_name = "INT")]
    grid: Option<usize>,
}

#[derive(Args)]
struct AttractorCmdArgs {
    #[command(flatten)]
    map: MapArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Per-axis grid resolution for the gate and nullcline sampling.
    #[arg(long, value_name = "INT")]
    grid: Option<usize>,
    /// Seed for the randomized unordered-pair verification.
    #[arg(long, value_name = "INT", default_value_t = 1)]
    seed: u64,
    /// Arc resolution override for curve tracing.
    #[arg(long, value_name = "REAL")]
    arc_resolution: Option<f64>,
}

#[derive(Args)]
struct OrbitArgs {
    #[command(flatten)]
    map: MapArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Explicit start point "x1,x2,..." (repeatable).
    #[arg(long = "x0", value_name = "COORDS", allow_hyphen_values = true)]
    x0: Vec<String>,
    /// Number of additional seeded random interior starts.
    #[arg(long, value_name = "INT", default_value_t = 0)]
    random: usize,
    /// Iteration budget per orbit.
    #[arg(long, value_name = "INT", default_value_t = 100_000)]
    max_steps: usize,
    /// Convergence tolerance on consecutive steps.
    #[arg(long, value_name = "REAL", default_value_t = 1e-10)]
    tol: f64,
    /// Seed for the random starts.
    #[arg(long, value_name = "INT", default_value_t = 1)]
    seed: u64,
    /// Minimum run length for the eventual-monotonicity report.
    #[arg(long, value_name = "INT", default_value_t = 10)]
    window: usize,
}

#[derive(Args)]
struct RetrotoneArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Number of random candidate pairs to draw.
    #[arg(long, value_name = "INT", default_value_t = 100_000)]
    pairs: usize,
    /// Sampling seed.
    #[arg(long, value_name = "INT", default_value_t = 1)]
    seed: u64,
    /// Test the weak variant (clauses conditioned on strict image
    /// components) instead of the strong one.
    #[arg(long)]
    weak: bool,
}

/// Map metadata echoed into report.json (no file paths, no timestamps, so
/// artifacts are byte-identical across reruns).
#[derive(Serialize)]
struct MapMeta<'a> {
    dim: usize,
    split_k: usize,
    r: &'a [f64],
    params: &'a BTreeMap<String, f64>,
    source: &'a [String],
    warnings: &'a [String],
}

impl<'a> MapMeta<'a> {
    fn of(map: &'a KolmogorovMap) -> Self {
        MapMeta {
            dim: map.dim(),
            split_k: map.split().k(),
            r: map.r().as_slice(),
            params: map.params(),
            source: map.source_exprs(),
            warnings: map.warnings(),
        }
    }
}

#[derive(Serialize)]
struct Report<'a> {
    map: MapMeta<'a>,
    grid_res: usize,
    hypotheses: &'a HypothesisReport,
}

fn default_grid(map: &KolmogorovMap) -> usize {
    if map.dim() == 2 {
        65
    } else {
        17
    }
}

fn pass_str(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn print_gate_summary(report: &HypothesisReport) {
    println!("sign structure:        {}", pass_str(report.a1.pass));
    println!("repelling origin:      {}", pass_str(report.a2.pass));
    println!("forward invariance:    {}", pass_str(report.invariance.pass));
    println!("dissipativity:         {}", pass_str(report.dissipative.pass));
    println!(
        "spectral radius < 1:   {} (max {:.6})",
        pass_str(report.rho.pass),
        report.rho.max_rho
    );
    match &report.criterion12 {
        Some(c) => println!(
            "trace/det criterion:   {} (oracle agreement: {})",
            pass_str(c.pass),
            c.oracle_agreement
        ),
        None => println!("trace/det criterion:   skipped (planar maps only)"),
    }
    if let Some(b) = report.norm_bound {
        println!("interaction norm bound: {b:.6}");
    }
    println!(
        "hypothesis gate:       {}",
        pass_str(report.all_pass())
    );
}

fn run_gate_and_report(
    map: &KolmogorovMap,
    grid: usize,
    out: &OutArgs,
) -> Result<HypothesisReport, Failure> {
    let report = run_hypothesis_gate(map, grid, DEFAULT_S_RES, &DEFAULT_T_GRID)?;
    let doc = Report {
        map: MapMeta::of(map),
        grid_res: grid,
        hypotheses: &report,
    };
    out.write("report.json", to_json_string(&doc)?.as_bytes())?;
    print_gate_summary(&report);
    Ok(report)
}

fn cmd_check(args: &CheckArgs) -> Result<u8, Failure> {
    let map = args.map.load()?;
    let grid = args.grid.unwrap_or_else(|| default_grid(&map));
    let report = run_gate_and_report(&map, grid, &args.out)?;
    Ok(if report.all_pass() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

fn write_catalog(records: &[FixedPointRecord], out: &OutArgs) -> Result<(), Failure> {
    out.write("fixed_points.csv", fixed_points_csv(records).as_bytes())?;
    out.write("fixed_points.json", to_json_string(&records)?.as_bytes())?;
    Ok(())
}

fn print_catalog(records: &[FixedPointRecord]) {
    for r in records {
        println!(
            "{:<9} at ({:.12}, {:.12})  {}  residual {:.3e}{}",
            r.kind.to_string(),
            r.location[0],
            r.location[1],
            r.classification,
            r.residual,
            if r.low_precision {
                "  (low precision)"
            } else {
                ""
            }
        );
    }
}

fn cmd_fixed_points(args: &FixedPointsArgs) -> Result<u8, Failure> {
    let map = args.map.load_planar()?;
    let n = args.grid.unwrap_or(DEFAULT_NULLCLINE_SAMPLES);
    let records = find_all_fixed_points(&map, n)?;
    write_catalog(&records, &args.out)?;
    print_catalog(&records);
    Ok(EXIT_OK)
}

fn cmd_attractor(args: &AttractorCmdArgs) -> Result<u8, Failure> {
    let map = args.map.load_planar()?;
    let grid = args.grid.unwrap_or_else(|| default_grid(&map));
    let report = run_gate_and_report(&map, grid, &args.out)?;
    if !report.all_pass() {
        eprintln!("hypothesis gate failed; not assembling the attractor");
        return Ok(EXIT_CHECK_FAILED);
    }

    let records = find_all_fixed_points(&map, grid)?;
    write_catalog(&records, &args.out)?;
    print_catalog(&records);

    let mut cfg = AttractorConfig::for_map(&map);
    cfg.seed = args.seed;
    if let Some(res) = args.arc_resolution {
        if !(res > 0.0 && res.is_finite()) {
            return Err(Failure::new(EXIT_BAD_MAP, "arc resolution must be positive"));
        }
        cfg.arc_resolution = res;
    }
    let dec = assemble_decomposition(&map, &records, &cfg)?;
    let nullclines: Vec<NullclinePolyline> = vec![
        trace_nullcline(&map, NullclineId::First, grid)?,
        trace_nullcline(&map, NullclineId::Second, grid)?,
    ];
    args.out
        .write("attractor.json", to_json_string(&dec)?.as_bytes())?;
    args.out.write(
        "attractor.svg",
        render_svg(&map, &records, &dec, &nullclines).as_bytes(),
    )?;

    println!(
        "first-axis manifold:   {} points, terminal ({:.9}, {:.9})",
        dec.sigma_h.points.len(),
        dec.sigma_h.terminal[0],
        dec.sigma_h.terminal[1]
    );
    println!(
        "second-axis manifold:  {} points, terminal ({:.9}, {:.9})",
        dec.sigma_v.points.len(),
        dec.sigma_v.terminal[0],
        dec.sigma_v.terminal[1]
    );
    println!(
        "connecting curve:      {} points{}",
        dec.sigma_0.points.len(),
        if dec.sigma_0.distinct {
            ""
        } else {
            " (endpoints coincide)"
        }
    );
    let m = &dec.monotone_flags;
    let u = &dec.unordered_flags;
    let monotone_ok = m.sigma_h_strict && m.sigma_v_strict && m.sigma_0_interior;
    let interior_ok = !m.strict_cross_gradients || (m.sigma_h_interior && m.sigma_v_interior);
    let unordered_ok = u.h_union_not_interior
        && u.v_union_not_interior
        && u.h_union_not_strict.unwrap_or(true)
        && u.v_union_not_strict.unwrap_or(true);
    println!("curves monotone:       {}", pass_str(monotone_ok && interior_ok));
    println!("unions unordered:      {}", pass_str(unordered_ok));
    Ok(if monotone_ok && interior_ok && unordered_ok {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

fn parse_start(s: &str, dim: usize) -> Result<Point, Failure> {
    let coords: Result<Vec<f64>, _> = s.split(',').map(|c| c.trim().parse::<f64>()).collect();
    let coords = coords
        .map_err(|_| Failure::new(EXIT_BAD_MAP, format!("cannot parse start point `{s}`")))?;
    if coords.len() != dim {
        return Err(Failure::new(
            EXIT_BAD_MAP,
            format!("start `{s}` has {} coordinates, map has {dim}", coords.len()),
        ));
    }
    if coords.iter().any(|c| *c < 0.0) {
        return Err(Failure::new(
            EXIT_BAD_MAP,
            format!("start `{s}` must lie in the nonnegative cone"),
        ));
    }
    Point::new(coords).map_err(|e| Failure::new(EXIT_BAD_MAP, format!("bad start `{s}`: {e}")))
}

fn cmd_orbit(args: &OrbitArgs) -> Result<u8, Failure> {
    let map = args.map.load()?;
    let mut starts: Vec<Point> = Vec::new();
    for s in &args.x0 {
        starts.push(parse_start(s, map.dim())?);
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
    let r = map.r();
    for _ in 0..args.random {
        let coords: Vec<f64> = (0..map.dim())
            .map(|i| (0.02 + 0.96 * rng.gen::<f64>()) * r[i])
            .collect();
        starts.push(Point::new(coords).expect("finite random start"));
    }
    if starts.is_empty() {
        return Err(Failure::new(
            EXIT_BAD_MAP,
            "no start points: pass --x0 COORDS or --random N",
        ));
    }
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(Failure::new(EXIT_BAD_MAP, "tolerance must be positive"));
    }

    for (idx, x0) in starts.iter().enumerate() {
        let trace = iterate_forward(&map, x0, args.max_steps, args.tol)?;
        args.out
            .write(&format!("orbit_{idx}.csv"), orbit_csv(&trace).as_bytes())?;
        let verdict = match &trace.verdict {
            Verdict::Converged { limit } => {
                let coords: Vec<String> = limit.iter().map(|c| format!("{c:.12}")).collect();
                format!("converged to ({})", coords.join(", "))
            }
            Verdict::CycleSuspected => "cycle suspected".to_string(),
            Verdict::BudgetExhausted => "budget exhausted".to_string(),
            Verdict::EscapedBox => "escaped the dissipativity box".to_string(),
        };
        let monotone = match detect_eventual_monotonicity(&trace, args.window) {
            Some(run) => format!("monotone {} from step {}", run.cone, run.onset),
            None => "no monotone tail".to_string(),
        };
        println!(
            "orbit {idx}: start ({}), {} steps, {verdict}, {monotone}",
            x0.as_slice()
                .iter()
                .map(|c| format!("{c}"))
                .collect::<Vec<_>>()
                .join(", "),
            trace.points.len() - 1,
        );
    }
    Ok(EXIT_OK)
}

fn cmd_retrotone(args: &RetrotoneArgs) -> Result<u8, Failure> {
    let map = args.map.load()?;
    let report = sample_retrotone(&map, args.pairs, args.seed, args.weak)?;
    println!(
        "variant: {}",
        if args.weak { "weak" } else { "strong" }
    );
    println!(
        "pairs: {} drawn, {} with ordered images",
        args.pairs, report.filtered
    );
    match report.status {
        RetrotoneStatus::Pass => {
            println!("backward order reversal: PASS");
            Ok(EXIT_OK)
        }
        RetrotoneStatus::Fail => {
            let c = report.counterexample.expect("failing report carries a witness");
            println!("backward order reversal: FAIL");
            println!("  x  = {:?}", c.x);
            println!("  y  = {:?}", c.y);
            println!("  Tx = {:?}", c.tx);
            println!("  Ty = {:?}", c.ty);
            println!("  {}", c.reason);
            Ok(EXIT_CHECK_FAILED)
        }
        RetrotoneStatus::Inconclusive => Err(Failure::new(
            EXIT_NUMERIC,
            format!(
                "only {} of {} sampled pairs had ordered images; \
                 increase --pairs to draw a conclusion",
                report.filtered, args.pairs
            ),
        )),
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Check(a) => cmd_check(a),
        Command::FixedPoints(a) => cmd_fixed_points(a),
        Command::Attractor(a) => cmd_attractor(a),
        Command::Orbit(a) => cmd_orbit(a),
        Command::Retrotone(a) => cmd_retrotone(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
