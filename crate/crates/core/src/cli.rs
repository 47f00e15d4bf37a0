//! Batch front door: config parsing, command dispatch, report and trace
//! emission.
//!
//! Exit codes: 0 for a passed check or a converged solve, 1 for a verified
//! failure or a non-converged run (a report is still written), 2 for usage
//! and config errors.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::contraction::{check_g_phi, check_metric_phi, induce_phi, ContractionReport};
use crate::error::Error;
use crate::fmspace::{
    render_f64, threshold_for_distance, verify_fm_axioms, FuzzyMetric, Point, Space,
    DEFAULT_THRESHOLD_TOL,
};
use crate::maps::{Bijection, MapSpec};
use crate::multivalued::{
    check_setvalued_contraction, solve_inclusion, OrbitResult, PairPlan, SetValuedConfig,
    SetValuedMap,
};
use crate::phi::{
    verify_phi_class, PhiFunction, DEFAULT_CHECK_GRID, DEFAULT_CHECK_T_MAX, DEFAULT_ITER_CAP,
};
use crate::report::Report;
use crate::solver::{
    solve_coincidence, uniqueness_probe, IterationRecord, Residual, SolverConfig, UniquenessReport,
    DEFAULT_MAX_ITER, DEFAULT_T0, DEFAULT_WINDOW,
};
use crate::tnorm::{verify_tnorm_axioms, TNorm};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_SAMPLES: usize = 10_000;
const DEFAULT_TNORM_GRID: usize = 21;
const DEFAULT_INDUCE_AT: [f64; 3] = [0.1, 0.5, 1.0];

/// Header line of every trace file.
pub const TRACE_HEADER: &str = "# index\tpoint\tsuccessive_grade";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    CheckAxioms,
    CheckPhi,
    CheckContraction,
    Solve,
    SolveSet,
    Threshold,
    InducePhi,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckAxioms => "check-axioms",
            Command::CheckPhi => "check-phi",
            Command::CheckContraction => "check-contraction",
            Command::Solve => "solve",
            Command::SolveSet => "solve-set",
            Command::Threshold => "threshold",
            Command::InducePhi => "induce-phi",
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fmfix",
    version,
    about = "Contraction checks and solvers on fuzzy metric spaces"
)]
pub struct Args {
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    /// Write the iteration trace of solve commands here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Overrides `verification.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `verification.samples`.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Overrides `solver.max_iter`.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Print wall-clock timings to stderr.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Run(#[from] Error),
}

impl CliError {
    fn validation(field: &str, message: impl ToString) -> Self {
        CliError::Validation {
            field: field.to_owned(),
            message: message.to_string(),
        }
    }

    fn missing(field: &str) -> Self {
        CliError::validation(field, "section is required by this command")
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Run(Error::NoAdmissibleSuccessor { .. } | Error::MaxIterExceeded { .. }) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationSection {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    /// Grid size for t-norm and Φ-class checks.
    pub grid: Option<usize>,
    /// Upper end of the Φ-class check range.
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub start: Option<Point>,
    pub epsilon: f64,
    pub lambda: f64,
    #[serde(default = "default_t0")]
    pub t0: f64,
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_times: Option<Vec<f64>>,
    #[serde(default = "default_window")]
    pub window: usize,
    /// Additional starts for the uniqueness probe.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub starts: Vec<Point>,
    /// Asserts weak demicompactness of a non-finite space for `solve-set`.
    #[serde(default)]
    pub demicompact: bool,
}

fn default_t0() -> f64 {
    DEFAULT_T0
}

fn default_window() -> usize {
    DEFAULT_WINDOW
}

impl SolverSection {
    fn config(&self, max_iter: Option<usize>) -> Result<SolverConfig, CliError> {
        let start = self
            .start
            .clone()
            .or_else(|| self.starts.first().cloned())
            .ok_or_else(|| CliError::validation("solver.start", "a start point is required"))?;
        Ok(SolverConfig {
            start,
            epsilon: self.epsilon,
            lambda: self.lambda,
            t0: self.t0,
            max_iter: max_iter.or(self.max_iter).unwrap_or(DEFAULT_MAX_ITER),
            residual_times: self.residual_times.clone(),
            window: self.window,
        })
    }
}

/// `{"d": ...}` or `{"x": ..., "y": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum ThresholdSection {
    Distance { d: f64 },
    Points { x: Point, y: Point },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InduceSection {
    pub k: f64,
    pub cap: f64,
    #[serde(default)]
    pub at: Option<Vec<f64>>,
}

/// A parsed and structurally validated problem document.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProblemConfig {
    pub space: Option<Space>,
    pub tnorm: TNorm,
    pub phi: Option<PhiFunction>,
    pub psi: Option<PhiFunction>,
    pub f: Option<MapSpec>,
    pub g: Option<Bijection>,
    pub set_map: Option<SetValuedMap>,
    pub solver: Option<SolverSection>,
    pub verification: VerificationSection,
    pub threshold: Option<ThresholdSection>,
    pub induce: Option<InduceSection>,
}

const KNOWN_FIELDS: [&str; 11] = [
    "space",
    "tnorm",
    "phi",
    "psi",
    "f",
    "g",
    "T",
    "solver",
    "verification",
    "threshold",
    "induce",
];

fn section<T: DeserializeOwned>(
    doc: &mut Map<String, Value>,
    field: &str,
) -> Result<Option<T>, CliError> {
    doc.remove(field)
        .map(|v| serde_json::from_value(v).map_err(|e| CliError::validation(field, e)))
        .transpose()
}

/// Parses a JSON problem document and checks its structural invariants:
/// bijectivity of `g`, `f` and `T` mapping into the space, nonempty images,
/// and a valid solver section.
pub fn parse_config(text: &str) -> Result<ProblemConfig, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let Value::Object(mut doc) = value else {
        return Err(CliError::Parse {
            line: 1,
            column: 1,
            message: "expected a JSON object at the top level".into(),
        });
    };
    if let Some(k) = doc.keys().find(|k| !KNOWN_FIELDS.contains(&k.as_str())) {
        return Err(CliError::validation(k, "unknown section"));
    }

    let space: Option<Space> = section(&mut doc, "space")?;
    let set_cfg: Option<SetValuedConfig> = section(&mut doc, "T")?;
    let mut cfg = ProblemConfig {
        tnorm: section(&mut doc, "tnorm")?.unwrap_or(TNorm::Product),
        phi: section(&mut doc, "phi")?,
        psi: section(&mut doc, "psi")?,
        f: section(&mut doc, "f")?,
        g: section(&mut doc, "g")?,
        solver: section(&mut doc, "solver")?,
        verification: section(&mut doc, "verification")?.unwrap_or_default(),
        threshold: section(&mut doc, "threshold")?,
        induce: section(&mut doc, "induce")?,
        space,
        set_map: None,
    };

    let needs_space = |field: &str| CliError::validation(field, "requires a `space` section");
    if let Some(g) = &cfg.g {
        let space = cfg.space.as_ref().ok_or_else(|| needs_space("g"))?;
        g.validate(space)
            .map_err(|e| CliError::validation("g", e))?;
    }
    if let Some(f) = &cfg.f {
        let space = cfg.space.as_ref().ok_or_else(|| needs_space("f"))?;
        f.validate(space)
            .map_err(|e| CliError::validation("f", e))?;
    }
    if let Some(t) = &set_cfg {
        let space = cfg.space.as_ref().ok_or_else(|| needs_space("T"))?;
        cfg.set_map = Some(SetValuedMap::bind(t, space).map_err(|e| CliError::validation("T", e))?);
    }
    if let Some(s) = &cfg.solver {
        if let Some(start) = &s.start {
            s.config(None)?
                .validate()
                .map_err(|e| CliError::validation("solver", e))?;
            if let Some(space) = &cfg.space {
                space
                    .contains(start)
                    .map_err(|e| CliError::validation("solver.start", e))?;
            }
        } else if !s.starts.is_empty() {
            s.config(None)?
                .validate()
                .map_err(|e| CliError::validation("solver", e))?;
        } else {
            return Err(CliError::validation(
                "solver.start",
                "a start point is required",
            ));
        }
    }
    if let Some(ThresholdSection::Distance { d }) = &cfg.threshold {
        if !(d.is_finite() && *d >= 0.0) {
            return Err(CliError::validation(
                "threshold.d",
                "distance must be finite and nonnegative",
            ));
        }
    }
    Ok(cfg)
}

/// Effective run parameters after applying flag overrides.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunVerdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckAxiomsDetails {
    pub tnorm: Report,
    pub metric: Report,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_transformed: Option<Report>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckContractionDetails {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub single_valued: Option<ContractionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_valued: Option<ContractionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<ContractionReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveDetails {
    pub point: Point,
    pub converged: bool,
    pub iterations: usize,
    pub horizon_used: usize,
    pub residuals: Vec<Residual>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniqueness: Option<UniquenessReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSetDetails {
    pub point: Point,
    pub converged: bool,
    pub iterations: usize,
    pub horizon_used: usize,
    pub in_tg_image: bool,
    pub in_t_image: bool,
    pub member_check: Vec<crate::multivalued::ClosureEvidence>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdDetails {
    pub d: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiValue {
    pub t: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InduceDetails {
    pub phi: PhiFunction,
    pub values: Vec<PhiValue>,
    pub class_check: Report,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureDetails {
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Details {
    CheckAxioms(CheckAxiomsDetails),
    CheckPhi(Report),
    CheckContraction(CheckContractionDetails),
    Solve(SolveDetails),
    SolveSet(SolveSetDetails),
    Threshold(ThresholdDetails),
    InducePhi(InduceDetails),
    Failure(FailureDetails),
}

/// The machine-readable result of one command. Field order is fixed;
/// timings are deliberately absent so reports are byte-identical across runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: Command,
    pub config_digest: String,
    pub seed: u64,
    pub samples: usize,
    pub verdict: RunVerdict,
    pub details: Details,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// Report plus optional trace text and exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: RunReport,
    pub trace: Option<String>,
    pub exit_code: u8,
}

pub fn config_digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn render_point(p: &Point) -> String {
    match p {
        Point::Label(l) => serde_json::to_string(l).expect("strings serialize"),
        Point::Coords(c) => c
            .iter()
            .map(|v| render_f64(*v))
            .collect::<Vec<_>>()
            .join(","),
    }
}

/// One line of a trace: `index<TAB>point<TAB>successive_grade`, numbers with
/// 17 significant digits, labels as JSON strings.
pub fn render_trace_line(r: &IterationRecord) -> String {
    format!(
        "{}\t{}\t{}",
        r.index,
        render_point(&r.point),
        render_f64(r.successive_grade)
    )
}

pub fn render_trace(records: &[IterationRecord]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(out, "{}", render_trace_line(r));
    }
    out
}

/// Inverse of [`render_trace_line`]. Returns `None` for comment lines.
pub fn parse_trace_line(line: &str) -> Result<Option<IterationRecord>, String> {
    if line.starts_with('#') {
        return Ok(None);
    }
    let mut fields = line.split('\t');
    let (Some(i), Some(p), Some(g), None) =
        (fields.next(), fields.next(), fields.next(), fields.next())
    else {
        return Err(format!("expected 3 tab-separated fields in `{line}`"));
    };
    let index = i.parse::<usize>().map_err(|e| format!("index: {e}"))?;
    let point = if p.starts_with('"') {
        Point::Label(serde_json::from_str(p).map_err(|e| format!("point: {e}"))?)
    } else {
        let coords = p
            .split(',')
            .map(str::parse::<f64>)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("point: {e}"))?;
        Point::Coords(coords)
    };
    let successive_grade = g.parse::<f64>().map_err(|e| format!("grade: {e}"))?;
    Ok(Some(IterationRecord {
        index,
        point,
        successive_grade,
    }))
}

fn orbit_trace(
    fm: &FuzzyMetric,
    r: &OrbitResult,
    epsilon: f64,
) -> Result<Vec<IterationRecord>, CliError> {
    r.orbit
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            Ok(IterationRecord {
                index: i + 1,
                point: w[1].clone(),
                successive_grade: fm.membership(&w[1], &w[0], epsilon)?,
            })
        })
        .collect()
}

fn verdict(ok: bool) -> RunVerdict {
    if ok {
        RunVerdict::Pass
    } else {
        RunVerdict::Fail
    }
}

fn require<'a, T>(v: &'a Option<T>, field: &str) -> Result<&'a T, CliError> {
    v.as_ref().ok_or_else(|| CliError::missing(field))
}

/// Runs `command` on a parsed config. `text` is the raw document, hashed
/// into the report.
pub fn run(
    command: Command,
    cfg: &ProblemConfig,
    text: &str,
    ov: Overrides,
) -> Result<Outcome, CliError> {
    let seed = ov.seed.or(cfg.verification.seed).unwrap_or(DEFAULT_SEED);
    let samples = ov
        .samples
        .or(cfg.verification.samples)
        .unwrap_or(DEFAULT_SAMPLES);
    let identity = Bijection::identity();
    let g = cfg.g.as_ref().unwrap_or(&identity);
    let fm = || require(&cfg.space, "space").map(|s| FuzzyMetric::standard(s.clone(), cfg.tnorm));
    let mut trace = None;

    let (ok, details) = match command {
        Command::CheckAxioms => {
            let fm = fm()?;
            let grid = cfg.verification.grid.unwrap_or(DEFAULT_TNORM_GRID);
            let tnorm = verify_tnorm_axioms(cfg.tnorm, grid)?;
            let metric = verify_fm_axioms(&fm, samples, seed)?;
            let g_transformed = match &cfg.g {
                Some(g) if !g.is_identity() => {
                    Some(verify_fm_axioms(&fm.g_transform(g)?, samples, seed)?)
                }
                _ => None,
            };
            let ok = tnorm.passed()
                && metric.passed()
                && g_transformed.as_ref().is_none_or(Report::passed);
            (
                ok,
                Details::CheckAxioms(CheckAxiomsDetails {
                    tnorm,
                    metric,
                    g_transformed,
                }),
            )
        }
        Command::CheckPhi => {
            let phi = require(&cfg.phi, "phi")?;
            let report = verify_phi_class(
                phi,
                cfg.verification.grid.unwrap_or(DEFAULT_CHECK_GRID),
                cfg.verification.t_max.unwrap_or(DEFAULT_CHECK_T_MAX),
                DEFAULT_ITER_CAP,
            )?;
            (report.passed(), Details::CheckPhi(report))
        }
        Command::CheckContraction => {
            let fm = fm()?;
            if cfg.f.is_none() && cfg.set_map.is_none() {
                return Err(CliError::validation(
                    "f",
                    "check-contraction needs `f` or `T`",
                ));
            }
            let phi = require(&cfg.phi, "phi")?;
            let single_valued = cfg
                .f
                .as_ref()
                .map(|f| check_g_phi(&fm, f, g, phi, samples, seed))
                .transpose()?;
            let set_valued = cfg
                .set_map
                .as_ref()
                .map(|t| {
                    let plan = if fm.space().is_finite() {
                        PairPlan::Exhaustive
                    } else {
                        PairPlan::Sampled { samples, seed }
                    };
                    check_setvalued_contraction(&fm, t, g, phi, plan)
                })
                .transpose()?;
            let metric = match (&cfg.psi, &cfg.f) {
                (Some(psi), Some(f)) => {
                    Some(check_metric_phi(fm.space(), f, g, psi, samples, seed)?)
                }
                _ => None,
            };
            let ok = [&single_valued, &set_valued, &metric]
                .iter()
                .all(|r| r.as_ref().is_none_or(ContractionReport::passed));
            (
                ok,
                Details::CheckContraction(CheckContractionDetails {
                    single_valued,
                    set_valued,
                    metric,
                }),
            )
        }
        Command::Solve => {
            let fm = fm()?;
            let f = require(&cfg.f, "f")?;
            if cfg.set_map.is_some() {
                return Err(CliError::validation(
                    "T",
                    "solve takes `f`; use solve-set for `T`",
                ));
            }
            let phi = require(&cfg.phi, "phi")?;
            let section = require(&cfg.solver, "solver")?;
            let scfg = section.config(ov.max_iter)?;
            let r = solve_coincidence(&fm, f, g, phi, &scfg)?;
            let uniqueness = if section.starts.len() >= 2 {
                Some(uniqueness_probe(&fm, f, g, phi, &scfg, &section.starts)?)
            } else {
                None
            };
            trace = Some(render_trace(&r.trace));
            let ok = r.converged && uniqueness.as_ref().is_none_or(|u| u.consistent);
            (
                ok,
                Details::Solve(SolveDetails {
                    point: r.point,
                    converged: r.converged,
                    iterations: r.iterations,
                    horizon_used: r.horizon_used,
                    residuals: r.residuals,
                    uniqueness,
                }),
            )
        }
        Command::SolveSet => {
            let fm = fm()?;
            let t = require(&cfg.set_map, "T")?;
            if cfg.f.is_some() {
                return Err(CliError::validation(
                    "f",
                    "solve-set takes `T`; use solve for `f`",
                ));
            }
            let phi = require(&cfg.phi, "phi")?;
            let section = require(&cfg.solver, "solver")?;
            let scfg = section.config(ov.max_iter)?;
            match solve_inclusion(&fm, t, g, phi, &scfg, section.demicompact) {
                Ok(r) => {
                    trace = Some(render_trace(&orbit_trace(&fm, &r, scfg.epsilon)?));
                    (
                        r.converged && r.in_tg_image,
                        Details::SolveSet(SolveSetDetails {
                            converged: r.converged,
                            iterations: r.orbit.len() - 1,
                            horizon_used: r.horizon_used,
                            in_tg_image: r.in_tg_image,
                            in_t_image: r.in_t_image,
                            member_check: r.member_check,
                            point: r.point,
                        }),
                    )
                }
                Err(e @ Error::NoAdmissibleSuccessor { .. }) => (
                    false,
                    Details::Failure(FailureDetails {
                        error: e.to_string(),
                    }),
                ),
                Err(e) => return Err(e.into()),
            }
        }
        Command::Threshold => {
            let d = match require(&cfg.threshold, "threshold")? {
                ThresholdSection::Distance { d } => *d,
                ThresholdSection::Points { x, y } => {
                    let fm = fm()?;
                    match &cfg.g {
                        Some(g) => fm.g_transform(g)?.distance(x, y)?,
                        None => fm.distance(x, y)?,
                    }
                }
            };
            let tau = threshold_for_distance(d, DEFAULT_THRESHOLD_TOL);
            (true, Details::Threshold(ThresholdDetails { d, tau }))
        }
        Command::InducePhi => {
            let s = require(&cfg.induce, "induce")?;
            let phi = induce_phi(s.k, s.cap)?;
            let at = s.at.clone().unwrap_or_else(|| DEFAULT_INDUCE_AT.to_vec());
            if let Some(t) = at.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
                return Err(CliError::validation(
                    "induce.at",
                    format!("time {t} must be finite and nonnegative"),
                ));
            }
            let values = at
                .iter()
                .map(|&t| PhiValue {
                    t,
                    phi: phi.eval(t),
                })
                .collect();
            let class_check = verify_phi_class(
                &phi,
                DEFAULT_CHECK_GRID,
                DEFAULT_CHECK_T_MAX,
                DEFAULT_ITER_CAP,
            )?;
            (
                class_check.passed(),
                Details::InducePhi(InduceDetails {
                    phi,
                    values,
                    class_check,
                }),
            )
        }
    };

    Ok(Outcome {
        report: RunReport {
            command,
            config_digest: config_digest(text),
            seed,
            samples,
            verdict: verdict(ok),
            details,
        },
        trace,
        exit_code: if ok { 0 } else { 1 },
    })
}

/// Reads the config, runs the command, writes the trace and prints the
/// report. Used by the binary.
pub fn main_with(args: Args) -> ExitCode {
    let started = Instant::now();
    let result = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", args.config.display())))
        .and_then(|text| {
            let cfg = parse_config(&text)?;
            let parsed = started.elapsed();
            let outcome = run(
                args.command,
                &cfg,
                &text,
                Overrides {
                    seed: args.seed,
                    samples: args.samples,
                    max_iter: args.max_iter,
                },
            )?;
            Ok((outcome, parsed))
        });
    match result {
        Ok((outcome, parsed)) => {
            if let (Some(path), Some(trace)) = (&args.trace, &outcome.trace) {
                if let Err(e) = std::fs::write(path, trace) {
                    eprintln!("error: cannot write trace {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            print!("{}", outcome.report.to_json());
            if args.timings {
                eprintln!("timings: parse {:?}, total {:?}", parsed, started.elapsed());
            }
            ExitCode::from(outcome.exit_code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FLAGSHIP: &str = r#"{
        "space": {"kind": "interval", "lo": 0, "hi": 1},
        "tnorm": "product",
        "g": {"kind": "affine", "a": -1, "b": 1},
        "f": {"kind": "affine", "a": 0.5, "b": 0},
        "phi": {"kind": "induced", "k": 0.5, "cap": 1},
        "solver": {"start": 0, "epsilon": 1e-3, "lambda": 1e-3, "t0": 2}
    }"#;

    fn run_text(cmd: Command, text: &str) -> Outcome {
        run(
            cmd,
            &parse_config(text).unwrap(),
            text,
            Overrides::default(),
        )
        .unwrap()
    }

    #[test]
    fn flagship_parses_and_solves() {
        let cfg = parse_config(FLAGSHIP).unwrap();
        assert_eq!(cfg.g, Some(Bijection::Affine { a: -1.0, b: 1.0 }));
        let out = run_text(Command::Solve, FLAGSHIP);
        assert_eq!(out.exit_code, 0);
        let Details::Solve(d) = &out.report.details else {
            panic!()
        };
        assert!((d.point.as_real().unwrap() - 2.0 / 3.0).abs() <= 1e-6);
        assert!(out.trace.unwrap().starts_with(TRACE_HEADER));
    }

    #[test]
    fn validation_messages() {
        let bad_t0 = FLAGSHIP.replace(r#""t0": 2"#, r#""t0": 0.5"#);
        let e = parse_config(&bad_t0).unwrap_err();
        assert!(e.to_string().contains("t0 must exceed 1"), "{e}");
        assert!(matches!(&e, CliError::Validation { field, .. } if field == "solver"));

        let bad_g = FLAGSHIP.replace(r#""a": -1, "b": 1"#, r#""a": 0, "b": 1"#);
        let e = parse_config(&bad_g).unwrap_err();
        assert!(e.to_string().contains("g not bijective"), "{e}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn parse_error_has_position() {
        let e = parse_config("{\n  \"space\": ,\n}").unwrap_err();
        let CliError::Parse { line, column, .. } = e else {
            panic!("{e:?}")
        };
        assert_eq!((line, column), (2, 12));
        assert!(matches!(parse_config("[1]"), Err(CliError::Parse { .. })));
        assert!(matches!(
            parse_config(r#"{"spaces": {}}"#),
            Err(CliError::Validation { field, .. }) if field == "spaces"
        ));
    }

    #[test]
    fn hicks_half_fails_with_counterexample() {
        let text = r#"{
            "space": {"kind": "interval", "lo": 0, "hi": 1},
            "f": {"kind": "affine", "a": 0.5, "b": 0},
            "phi": {"kind": "linear", "k": 0.5},
            "verification": {"samples": 200}
        }"#;
        let out = run_text(Command::CheckContraction, text);
        assert_eq!(out.exit_code, 1);
        let Details::CheckContraction(d) = &out.report.details else {
            panic!()
        };
        assert!(!d.single_valued.as_ref().unwrap().counterexamples.is_empty());
    }

    #[test]
    fn threshold_golden_ratio() {
        let out = run_text(Command::Threshold, r#"{"threshold": {"d": 1}}"#);
        let Details::Threshold(d) = &out.report.details else {
            panic!()
        };
        assert!((d.tau - 0.6180339887498949).abs() < 1e-9);
        let json = out.report.to_json();
        assert!(json.contains("0.618033988"), "{json}");
    }

    #[test]
    fn trace_round_trip() {
        for point in [
            Point::real(2.0 / 3.0),
            Point::label("a\tb\"c"),
            Point::Coords(vec![0.1, -3e-300]),
        ] {
            let r = IterationRecord {
                index: 7,
                point,
                successive_grade: 0.9990009990009991,
            };
            assert_eq!(parse_trace_line(&render_trace_line(&r)).unwrap(), Some(r));
        }
        assert_eq!(parse_trace_line(TRACE_HEADER).unwrap(), None);
        assert!(parse_trace_line("1\t0.5").is_err());
        assert!(parse_trace_line("x\t0.5\t1").is_err());
    }

    #[test]
    fn solve_set_flagship() {
        let text = r#"{
            "space": {"kind": "finite", "points": ["0", "0.1", "1"],
                      "dist": [[0, 0.1, 1], [0.1, 0, 0.9], [1, 0.9, 0]]},
            "T": {"kind": "setvalued", "map": {"0": ["0"], "0.1": ["0"], "1": ["0", "0.1"]}},
            "phi": {"kind": "induced", "k": 0.5, "cap": 1},
            "solver": {"start": "1", "epsilon": 1e-3, "lambda": 1e-3}
        }"#;
        let out = run_text(Command::SolveSet, text);
        assert_eq!(out.exit_code, 0);
        let Details::SolveSet(d) = &out.report.details else {
            panic!()
        };
        assert_eq!(d.point, Point::label("0"));
        assert_eq!(run_text(Command::CheckContraction, text).exit_code, 0);
    }

    #[test]
    fn induce_phi_command() {
        let out = run_text(
            Command::InducePhi,
            r#"{"induce": {"k": 0.5, "cap": 1, "at": [0.5]}}"#,
        );
        assert_eq!(out.exit_code, 0);
        let Details::InducePhi(d) = &out.report.details else {
            panic!()
        };
        assert!((d.values[0].phi - 0.390388203202208).abs() < 1e-12);
    }

    #[test]
    fn missing_sections_are_config_errors() {
        let e = run(
            Command::CheckPhi,
            &ProblemConfig::default(),
            "{}",
            Overrides::default(),
        )
        .unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("phi"));
    }
}
