//! `toeplitz-embed`: analyse a Toeplitz symbol and write JSON reports.
//!
//! Every subcommand writes one JSON report into `--out` (plus an SVG for
//! `regions`, `numrange` and `plot`). Exit codes: 0/1/2 for the verdict
//! status (or 0/1 for pass/fail reports), 64 usage, 65 bad input, 70 numeric
//! failure with `error.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use toeplitz_embed::curve_topology::{self, PointLocation, RegionDecomposition, TopologyError, TopologyOptions};
use toeplitz_embed::hardy::{self, HardyError};
use toeplitz_embed::model_fig8::{self, CircleArcConfig, ModelError};
use toeplitz_embed::semigroup::{self, OperatorFamily, Schedule, SemigroupError};
use toeplitz_embed::spectral::{self, Region, SpectralError};
use toeplitz_embed::symbol::{Symbol, SymbolError, SymbolSpec};
use toeplitz_embed::verdict::{self, AnalysisConfig, AnalysisSummary, VerdictError};
use toeplitz_embed::{svg, C64};

const EXIT_USAGE: u8 = 64;
const EXIT_INPUT: u8 = 65;
const EXIT_NUMERIC: u8 = 70;

#[derive(Debug, Parser)]
#[command(
    name = "toeplitz-embed",
    version,
    about = "Decide whether a Toeplitz operator embeds into a C0-semigroup",
    after_help = "Environment:\n  TOEPLITZ_EMBED_THREADS  maximum number of worker threads\n\n\
Exit codes:\n  0 Embeddable / check passed\n  1 NotEmbeddable / check failed\n  2 Unknown\n  \
64 usage error\n  65 bad input JSON\n  70 numeric failure (details in error.json)"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Truncation order n of the Toeplitz matrix, in [2, 512] [default: 64]
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Exponent p of the Hardy space H^p, p > 1 [default: 2]
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Grid resolution of the region decomposition, a power of two in [128, 4096] [default: 512]
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Seed for randomized trials [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for reports
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Tolerance override KEY=VAL; keys: semigroup, identity, numrange_angles, disk_directions, kreiss_budget
    #[arg(long = "tol", global = true, value_name = "KEY=VAL")]
    tol: Vec<String>,
    /// Path of the SVG figure (regions, numrange, plot) [default: <out>/<command>.svg]
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every analysis the verdict rules need; writes analysis.json
    Analyze { input: PathBuf },
    /// Winding number of the curve about a point; writes winding.json
    Winding {
        input: PathBuf,
        #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true)]
        point: Vec<f64>,
    },
    /// Region decomposition of the curve complement; writes regions.json and an SVG
    Regions { input: PathBuf },
    /// Ahern-Clark index w+; writes wplus.json
    Wplus { input: PathBuf },
    /// Kernel eigenvector h_{lambda,j}; writes eigen.json
    Eigen {
        input: PathBuf,
        #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true)]
        lambda: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        j: usize,
    },
    /// Rule-based verdict from a symbol or analysis JSON; writes verdict.json
    Verdict {
        input: PathBuf,
        /// Circle-arc model configuration checked alongside the figure-eight rule
        #[arg(long)]
        zeta: Option<PathBuf>,
        /// Random trials for the model identities
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Build and verify a semigroup on the truncation; writes semigroup.json
    Semigroup {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
    },
    /// Numerical range of the truncation; writes numrange.json and an SVG
    Numrange { input: PathBuf },
    /// Kreiss constant estimate of the truncation; writes kreiss.json
    Kreiss {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = RegionKind::Hull)]
        region: RegionKind,
        /// Half-angle of the sector region
        #[arg(long)]
        omega: Option<f64>,
        /// Centre of the disk region
        #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true)]
        center: Vec<f64>,
        /// Radius of the disk region
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Check the figure-eight model identities; writes fig8.json
    Fig8 {
        config: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Region map with 0 marked; writes plot.svg and plot.json
    Plot { input: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Dunford,
    Sectorial,
    Auto,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RegionKind {
    Hull,
    Sector,
    Disk,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{kind}: {message}")]
    Numeric { kind: &'static str, message: String },
}

impl CliError {
    fn numeric(kind: &'static str, e: impl std::fmt::Display) -> Self {
        CliError::Numeric { kind, message: e.to_string() }
    }
}

impl From<SymbolError> for CliError {
    fn from(e: SymbolError) -> Self {
        match e {
            SymbolError::RefinementOverflow | SymbolError::BadStep => CliError::numeric("symbol", e),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<TopologyError> for CliError {
    fn from(e: TopologyError) -> Self {
        CliError::numeric("topology", e)
    }
}

impl From<HardyError> for CliError {
    fn from(e: HardyError) -> Self {
        match e {
            HardyError::Symbol(s) => s.into(),
            HardyError::BadOrder(_) | HardyError::IndexOutOfRange { .. } => CliError::Usage(e.to_string()),
            _ => CliError::numeric("hardy", e),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        CliError::numeric("spectral", e)
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Json(_) | ModelError::BadParameters(_) => CliError::Input(e.to_string()),
            _ => CliError::numeric("model", e),
        }
    }
}

impl From<SemigroupError> for CliError {
    fn from(e: SemigroupError) -> Self {
        CliError::numeric("semigroup", e)
    }
}

impl From<VerdictError> for CliError {
    fn from(e: VerdictError) -> Self {
        match e {
            VerdictError::Symbol(s) => s.into(),
            VerdictError::Topology(t) => t.into(),
            VerdictError::Config(c) => CliError::Usage(c),
        }
    }
}

/// Tolerance overrides from `--tol`.
#[derive(Debug, Default)]
struct Tolerances {
    semigroup: Option<f64>,
    identity: Option<f64>,
    numrange_angles: Option<usize>,
    disk_directions: Option<usize>,
    kreiss_budget: Option<usize>,
}

fn parse_tolerances(items: &[String]) -> Result<Tolerances, CliError> {
    let mut t = Tolerances::default();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--tol expects KEY=VAL, got {item:?}")))?;
        let bad = || CliError::Usage(format!("--tol {k}: cannot parse {v:?}"));
        match k.trim() {
            "semigroup" => t.semigroup = Some(v.parse::<f64>().map_err(|_| bad())?),
            "identity" => t.identity = Some(v.parse::<f64>().map_err(|_| bad())?),
            "numrange_angles" => t.numrange_angles = Some(v.parse().map_err(|_| bad())?),
            "disk_directions" => t.disk_directions = Some(v.parse().map_err(|_| bad())?),
            "kreiss_budget" => t.kreiss_budget = Some(v.parse().map_err(|_| bad())?),
            other => return Err(CliError::Usage(format!("unknown --tol key {other:?}"))),
        }
    }
    if t.semigroup.is_some_and(|x| !(x > 0.0)) || t.identity.is_some_and(|x| !(x > 0.0)) {
        return Err(CliError::Usage("tolerances must be positive".into()));
    }
    Ok(t)
}

/// A symbol together with the configuration it came with, if any.
struct Input {
    symbol: Symbol,
    summary: Option<AnalysisSummary>,
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Accepts a symbol JSON or an `analyze` report.
fn load_input(path: &Path) -> Result<Input, CliError> {
    let value = read_json(path)?;
    if value.get("analysis_schema").is_some() {
        let summary: AnalysisSummary =
            serde_json::from_value(value).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        if summary.analysis_schema != verdict::ANALYSIS_SCHEMA {
            return Err(CliError::Input(format!("unsupported analysis_schema {}", summary.analysis_schema)));
        }
        let symbol = summary.symbol.build()?;
        Ok(Input { symbol, summary: Some(summary) })
    } else {
        let spec: SymbolSpec =
            serde_json::from_value(value).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Ok(Input { symbol: spec.build()?, summary: None })
    }
}

struct Context {
    global: Global,
    tol: Tolerances,
}

impl Context {
    /// Embedded configuration overridden by explicit flags.
    fn config(&self, base: Option<&AnalysisConfig>) -> Result<AnalysisConfig, CliError> {
        let mut c = base.cloned().unwrap_or_default();
        if let Some(n) = self.global.n {
            c.n = n;
        }
        if let Some(p) = self.global.p {
            c.p = p;
        }
        if let Some(g) = self.global.grid {
            c.resolution = g;
        }
        if let Some(s) = self.global.seed {
            c.seed = s;
        }
        if let Some(a) = self.tol.numrange_angles {
            c.numrange_angles = a;
        }
        if let Some(d) = self.tol.disk_directions {
            c.disk_directions = d;
        }
        c.validate()?;
        Ok(c)
    }

    fn write_json<T: Serialize>(&self, name: &str, report: &T) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(report).map_err(|e| CliError::numeric("serialize", e))?;
        text.push('\n');
        self.write_file(&self.global.out.join(name), &text)
    }

    fn write_svg(&self, command: &str, text: &str) -> Result<PathBuf, CliError> {
        let path = self.global.svg.clone().unwrap_or_else(|| self.global.out.join(format!("{command}.svg")));
        self.write_file(&path, text)
    }

    fn write_file(&self, path: &Path, text: &str) -> Result<PathBuf, CliError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
        }
        fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Ok(path.to_path_buf())
    }
}

fn point(v: &[f64]) -> C64 {
    C64::new(v[0], v[1])
}

fn decomposition(symbol: &Symbol, config: &AnalysisConfig, include: Vec<C64>) -> Result<RegionDecomposition, CliError> {
    let disc = symbol.discretize(symbol.default_step())?;
    let opts = TopologyOptions { resolution: config.resolution, include, ..Default::default() };
    Ok(curve_topology::region_decomposition(&disc, &opts)?)
}

fn location_json(loc: &PointLocation, d: &RegionDecomposition) -> Value {
    match loc {
        PointLocation::Component(c) => {
            let comp = &d.components[*c];
            json!({"kind": "component", "component": c, "winding": comp.winding, "unbounded": comp.unbounded})
        }
        PointLocation::Curve { segment, left, right } => {
            json!({"kind": "curve", "segment": segment, "left": left, "right": right})
        }
        PointLocation::Intersection(i) => json!({"kind": "intersection", "index": i}),
        PointLocation::Unresolved { winding } => json!({"kind": "unresolved", "winding": winding}),
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let ctx = Context { tol: parse_tolerances(&cli.global.tol)?, global: cli.global };
    match cli.command {
        Command::Analyze { input } => {
            let inp = load_input(&input)?;
            let config = ctx.config(inp.summary.as_ref().map(|s| &s.config))?;
            let a = verdict::analyze(&inp.symbol, &config)?;
            ctx.write_json("analysis.json", &a.summary)?;
            Ok(0)
        }
        Command::Winding { input, point: p } => {
            let inp = load_input(&input)?;
            let lambda = point(&p);
            let disc = inp.symbol.discretize(inp.symbol.default_step())?;
            let w = curve_topology::winding_number(&disc, lambda)?;
            ctx.write_json("winding.json", &json!({"winding": w, "point": [lambda.re, lambda.im]}))?;
            println!("{w}");
            Ok(0)
        }
        Command::Regions { input } => {
            let inp = load_input(&input)?;
            let config = ctx.config(inp.summary.as_ref().map(|s| &s.config))?;
            let d = decomposition(&inp.symbol, &config, vec![C64::new(0.0, 0.0)])?;
            ctx.write_json("regions.json", &d.report())?;
            ctx.write_svg("regions", &svg::region_figure(&d, &[(C64::new(0.0, 0.0), "0")]))?;
            Ok(0)
        }
        Command::Wplus { input } => {
            let inp = load_input(&input)?;
            let disc = inp.symbol.discretize(inp.symbol.default_step())?;
            let w = curve_topology::w_plus(&inp.symbol, &disc)?;
            ctx.write_json("wplus.json", &w)?;
            println!("{}", w.value);
            Ok(0)
        }
        Command::Eigen { input, lambda, j } => {
            let inp = load_input(&input)?;
            let config = ctx.config(inp.summary.as_ref().map(|s| &s.config))?;
            let disc = inp.symbol.discretize(inp.symbol.default_step())?;
            let h = hardy::eigenvector(&inp.symbol, &disc, point(&lambda), j, config.n)?;
            ctx.write_json("eigen.json", &h)?;
            Ok(0)
        }
        Command::Verdict { input, zeta, trials } => {
            let inp = load_input(&input)?;
            let model = match &zeta {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                    Some(CircleArcConfig::from_json(&text)?.build()?)
                }
                None => None,
            };
            let config = ctx.config(inp.summary.as_ref().map(|s| &s.config))?;
            // An analysis report whose configuration is unchanged is used as is.
            let summary = match inp.summary {
                Some(s) if s.config == config => s,
                _ => verdict::analyze(&inp.symbol, &config)?.summary,
            };
            let report = match &model {
                Some(m) => Some(model_fig8::verify_identities(m, trials, config.seed)?),
                None => None,
            };
            let v = verdict::decide_summary(&summary, config.p, report);
            ctx.write_json("verdict.json", &v)?;
            print!("{}", verdict::explain(&v));
            Ok(v.status.exit_code() as u8)
        }
        Command::Semigroup { input, method } => {
            let inp = load_input(&input)?;
            let config = ctx.config(inp.summary.as_ref().map(|s| &s.config))?;
            let trunc = inp.symbol.toeplitz_truncation(config.n)?;
            let mut attempts: Vec<Value> = Vec::new();
            let mut family = None;
            if matches!(method, Method::Dunford | Method::Auto) {
                let d = decomposition(&inp.symbol, &config, vec![C64::new(0.0, 0.0)])?;
                match semigroup::build_dunford(&trunc, &d) {
                    Ok(f) => family = Some(f),
                    Err(e) => attempts.push(json!({"method": "dunford", "error": e.to_string()})),
                }
            }
            if family.is_none() && matches!(method, Method::Sectorial | Method::Auto) {
                match semigroup::build_sectorial(&trunc.matrix) {
                    Ok(f) => family = Some(f),
                    Err(e) => attempts.push(json!({"method": "sectorial", "error": e.to_string()})),
                }
            }
            let Some(family) = family else {
                ctx.write_json("semigroup.json", &json!({"n": config.n, "accepted": false, "attempts": attempts}))?;
                return Ok(1);
            };
            let mut schedule = Schedule::default();
            if let Some(t) = ctx.tol.semigroup {
                schedule.tol = t;
            }
            let report = semigroup::verify(&family, &trunc.matrix, &schedule)?;
            let g = family.at(1.0)?;
            let detail = match &family.variant {
                semigroup::FamilyVariant::GeneratorBased { ray, .. } => json!({"ray": ray}),
                semigroup::FamilyVariant::SectorialCalculus { angle, contour, .. } => {
                    json!({"angle": angle, "contour": contour})
                }
                semigroup::FamilyVariant::ModelFig8 { points, .. } => json!({"points": points}),
            };
            let out = json!({
                "n": config.n,
                "family": family.name(),
                "detail": detail,
                "attempts": attempts,
                "time_one_norm": toeplitz_embed::linalg::norm2(&g),
                "report": report,
                "accepted": report.accepted,
            });
            ctx.write_json("semigroup.json", &out)?;
            Ok(if report.accepted { 0 } else { 1 })
        }
        Command::Numrange { input } => {
            let inp = load_input(&input)?;
            let config = ctx.config(inp.summary.as_ref().map(|s| &s.config))?;
            let t = inp.symbol.toeplitz_truncation(config.n)?;
            let w = spectral::numerical_range(&t.matrix, config.numrange_angles);
            let eig = toeplitz_embed::linalg::eigenvalues(&t.matrix);
            let outer = w.outer_polygon();
            let inner = w.inner_polygon();
            let zero = C64::new(0.0, 0.0);
            let out = json!({
                "n": config.n,
                "numerical_radius": w.numerical_radius(),
                "zero_in_interior": spectral::zero_in_interior_numrange(&w),
                "boundary": w,
                "eigenvalues": eig,
            });
            ctx.write_json("numrange.json", &out)?;
            ctx.write_svg("numrange", &svg::numrange_figure(&outer, &inner, &eig, &[(zero, "0")]))?;
            Ok(0)
        }
        Command::Kreiss { input, region, omega, center, radius } => {
            let inp = load_input(&input)?;
            let config = ctx.config(inp.summary.as_ref().map(|s| &s.config))?;
            let t = inp.symbol.toeplitz_truncation(config.n)?;
            let region = match region {
                RegionKind::Hull => {
                    let w = spectral::numerical_range(&t.matrix, config.numrange_angles);
                    Region::NumericalRangeHull { support: w.samples.iter().map(|s| (s.angle, s.support)).collect() }
                }
                RegionKind::Sector => {
                    let omega = omega.ok_or_else(|| CliError::Usage("--region sector needs --omega".into()))?;
                    Region::Sector { omega }
                }
                RegionKind::Disk => {
                    let radius = radius.ok_or_else(|| CliError::Usage("--region disk needs --radius".into()))?;
                    let center = if center.is_empty() { C64::new(0.0, 0.0) } else { point(&center) };
                    Region::Disk { center, radius }
                }
            };
            let budget = ctx.tol.kreiss_budget.unwrap_or(48);
            let k = spectral::kreiss_constant(&t.matrix, &region, budget)?;
            ctx.write_json("kreiss.json", &json!({"n": config.n, "budget": budget, "estimate": k}))?;
            Ok(0)
        }
        Command::Fig8 { config, trials } => {
            let text = fs::read_to_string(&config).map_err(|e| CliError::Input(format!("{}: {e}", config.display())))?;
            let cfg = CircleArcConfig::from_json(&text)?;
            let model = cfg.build()?;
            let seed = ctx.global.seed.unwrap_or(0);
            let report = model_fig8::verify_identities(&model, trials, seed)?;
            let samples = model.pair.domain.samples();
            let separation = model_fig8::separation_check(&model.pair, &samples);
            let tol = ctx.tol.identity.unwrap_or(1e-10);
            let identity_residual = report.group_residual.max(report.tilde_residual).max(report.det_residual);
            let passed = identity_residual <= tol && report.unit_residual <= tol && separation.passed();
            let out = json!({
                "config": cfg,
                "log_cut": model.log_cut,
                "identity_residual": identity_residual,
                "tolerance": tol,
                "identities": report,
                "separation": separation,
                "passed": passed,
            });
            ctx.write_json("fig8.json", &out)?;
            Ok(if passed { 0 } else { 1 })
        }
        Command::Plot { input } => {
            let inp = load_input(&input)?;
            let config = ctx.config(inp.summary.as_ref().map(|s| &s.config))?;
            let zero = C64::new(0.0, 0.0);
            let d = decomposition(&inp.symbol, &config, vec![zero])?;
            let figure = svg::region_figure(&d, &[(zero, "0")]);
            let path = ctx.write_svg("plot", &figure)?;
            let mut windings = BTreeMap::new();
            for c in &d.components {
                *windings.entry(c.winding).or_insert(0usize) += 1;
            }
            let out = json!({
                "svg": path.file_name().map(|f| f.to_string_lossy().into_owned()),
                "bytes": figure.len(),
                "components": d.components.len(),
                "components_by_winding": windings,
                "location_of_zero": location_json(&d.locate(zero), &d),
            });
            ctx.write_json("plot.json", &out)?;
            Ok(0)
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("TOEPLITZ_EMBED_THREADS") else {
        return Ok(());
    };
    let k: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&k| k > 0)
        .ok_or_else(|| CliError::Usage(format!("TOEPLITZ_EMBED_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(k)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let out = cli.global.out.clone();
    let result = configure_threads().and_then(|_| run(cli));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("toeplitz-embed: {e}");
            match e {
                CliError::Usage(_) => ExitCode::from(EXIT_USAGE),
                CliError::Input(_) => ExitCode::from(EXIT_INPUT),
                CliError::Numeric { kind, message } => {
                    let diag = json!({"error": kind, "message": message});
                    let _ = fs::create_dir_all(&out);
                    let _ = fs::write(out.join("error.json"), format!("{:#}\n", diag));
                    ExitCode::from(EXIT_NUMERIC)
                }
            }
        }
    }
}
