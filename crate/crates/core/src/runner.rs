//! Job configuration, loop files and JSON reports for the command-line tool.
//!
//! Every report is a pretty-printed JSON object with the resolved
//! configuration, the job-specific body, a list of tolerance checks and an
//! overall `passed` flag. Matrices are written row-major as `[re, im]`
//! pairs. Reports carry no timestamps or host details, so identical inputs
//! give byte-identical output.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::connection::{ConnectionField, DEFAULT_FD_STEP};
use crate::error::{Error, Result};
use crate::fock::DEFAULT_DIM_BUDGET;
use crate::holonomy::{holonomy, holonomy_gate, HolonomyReport, LoopPath, Segment, MIN_SEGMENTS};
use crate::linalg::{self, CMatrix};
use crate::optics::{ModelKind, ModelSpec, ParamPoint, DEFAULT_PARAM_LIMIT};
use crate::rank::{holonomy_algebra_rank, RankReport, DEFAULT_RANK_EPS};

/// Acceptance thresholds, adjustable with `--tol name=value`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// `‖Γ†Γ − 1‖_F` of a holonomy gate.
    pub unitarity: f64,
    /// `‖Γ_n − Γ_2n‖_F` at the configured segment count.
    pub discretization: f64,
    /// Gate change across the cutoff history or sweep.
    pub cutoff: f64,
    /// `|arg det Γ − Im ∮ tr A|` modulo 2π.
    pub det_phase: f64,
    /// `‖A + A†‖_max` of connection components.
    pub anti_hermitian: f64,
    /// `‖F + F†‖_max` of a curvature component.
    pub curvature: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            unitarity: 1e-7,
            discretization: 1e-6,
            cutoff: 1e-6,
            det_phase: 1e-6,
            anti_hermitian: 1e-9,
            curvature: 1e-8,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 6] = [
        "unitarity",
        "discretization",
        "cutoff",
        "det_phase",
        "anti_hermitian",
        "curvature",
    ];

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Validation(format!("tolerance `{name}` must be positive, got {value}")));
        }
        let slot = match name {
            "unitarity" => &mut self.unitarity,
            "discretization" => &mut self.discretization,
            "cutoff" => &mut self.cutoff,
            "det_phase" => &mut self.det_phase,
            "anti_hermitian" => &mut self.anti_hermitian,
            "curvature" => &mut self.curvature,
            _ => {
                return Err(Error::Validation(format!(
                    "unknown tolerance `{name}` (known: {})",
                    Self::NAMES.join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }

    /// Applies a `name=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (name, value) = split_assignment(spec)?;
        self.set(name, value)
    }
}

fn split_assignment(spec: &str) -> Result<(&str, f64)> {
    let (name, value) = spec
        .split_once('=')
        .ok_or_else(|| Error::Validation(format!("expected name=value, got `{spec}`")))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| Error::Validation(format!("`{value}` is not a number in `{spec}`")))?;
    Ok((name.trim(), value))
}

/// Parses repeated `name=value` coordinate assignments into a point.
pub fn parse_point(model: ModelKind, assignments: &[String]) -> Result<ParamPoint> {
    let pairs = assignments
        .iter()
        .map(|a| split_assignment(a))
        .collect::<Result<Vec<_>>>()?;
    ParamPoint::from_named(model, pairs)
}

/// Resolved settings of one job.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JobConfig {
    pub model: ModelKind,
    pub cutoff: usize,
    pub n_segments: usize,
    pub tolerances: Tolerances,
    /// Where the report goes; not part of the report itself.
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub samples: usize,
    pub eps: f64,
    pub param_limit: f64,
    pub dim_budget: usize,
}

impl Default for JobConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::TwoQubit,
            cutoff: 16,
            n_segments: 4096,
            tolerances: Tolerances::default(),
            out: None,
            seed: 0,
            samples: 200,
            eps: DEFAULT_RANK_EPS,
            param_limit: DEFAULT_PARAM_LIMIT,
            dim_budget: DEFAULT_DIM_BUDGET,
        }
    }
}

impl JobConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.cutoff < 2 {
            return Err(Error::Validation(format!("cutoff must be at least 2, got {}", self.cutoff)));
        }
        if self.n_segments < MIN_SEGMENTS {
            return Err(Error::Validation(format!(
                "segments must be at least {MIN_SEGMENTS}, got {}",
                self.n_segments
            )));
        }
        if self.samples == 0 {
            return Err(Error::Validation("samples must be positive".into()));
        }
        for (name, v) in [("eps", self.eps), ("param_limit", self.param_limit)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!("{name} must be positive, got {v}")));
            }
        }
        if self.dim_budget == 0 {
            return Err(Error::Validation("dimension budget must be positive".into()));
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<ModelSpec> {
        self.spec_at(self.cutoff)
    }

    fn spec_at(&self, cutoff: usize) -> Result<ModelSpec> {
        Ok(ModelSpec::with_budget(self.model, cutoff, self.dim_budget)?.with_param_limit(self.param_limit))
    }

    fn field(&self) -> Result<ConnectionField> {
        self.validate()?;
        ConnectionField::new(&self.spec()?)
    }
}

/// One tolerance comparison: passes when `value ≤ tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {:.3e} (tolerance {:.3e}) {}",
            self.name,
            self.value,
            self.tolerance,
            if self.passed { "ok" } else { "FAILED" }
        )
    }
}

/// A finished job: the report text plus its checks.
#[derive(Clone, Debug)]
pub struct JobOutcome {
    pub report: String,
    pub checks: Vec<Check>,
}

impl JobOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Writes the report to `path`, or to stdout without one.
    pub fn write(&self, path: Option<&Path>) -> Result<()> {
        match path {
            Some(p) => std::fs::write(p, &self.report).map_err(|source| Error::Io {
                path: p.display().to_string(),
                source,
            }),
            None => {
                print!("{}", self.report);
                Ok(())
            }
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, B: Serialize> {
    job: &'static str,
    version: &'static str,
    config: &'a JobConfig,
    #[serde(flatten)]
    body: B,
    checks: &'a [Check],
    passed: bool,
}

fn finish<B: Serialize>(job: &'static str, config: &JobConfig, body: B, checks: Vec<Check>) -> Result<JobOutcome> {
    let passed = checks.iter().all(|c| c.passed);
    let envelope = Envelope {
        job,
        version: env!("CARGO_PKG_VERSION"),
        config,
        body,
        checks: &checks,
        passed,
    };
    let mut report = serde_json::to_string_pretty(&envelope)
        .map_err(|e| Error::Validation(format!("report serialization failed: {e}")))?;
    report.push('\n');
    Ok(JobOutcome { report, checks })
}

// ---------------------------------------------------------------------------
// loop files

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LoopFile {
    model: String,
    segments: Vec<SegmentSpec>,
}

type NamedCoords = BTreeMap<String, f64>;

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SegmentSpec {
    Line {
        from: NamedCoords,
        to: NamedCoords,
    },
    Arc {
        #[serde(default)]
        center: NamedCoords,
        radius: f64,
        plane: [String; 2],
        #[serde(default)]
        start_angle: f64,
        #[serde(default = "full_turn")]
        end_angle: f64,
    },
}

fn full_turn() -> f64 {
    TAU
}

fn coords(model: ModelKind, named: &NamedCoords) -> Result<Vec<f64>> {
    let mut x = vec![0.0; model.n_real()];
    for (name, &v) in named {
        x[model.coordinate_index(name)?] = v;
    }
    Ok(x)
}

/// Parses loop-file text; `label` names the source in error messages.
pub fn parse_loop_str(text: &str, label: &str) -> Result<LoopPath> {
    let file: LoopFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: label.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let model: ModelKind = file.model.parse()?;
    let segments = file
        .segments
        .iter()
        .map(|s| {
            Ok(match s {
                SegmentSpec::Line { from, to } => Segment::Line {
                    from: coords(model, from)?,
                    to: coords(model, to)?,
                },
                SegmentSpec::Arc {
                    center,
                    radius,
                    plane,
                    start_angle,
                    end_angle,
                } => Segment::Arc {
                    center: coords(model, center)?,
                    radius: *radius,
                    plane: (model.coordinate_index(&plane[0])?, model.coordinate_index(&plane[1])?),
                    start_angle: *start_angle,
                    end_angle: *end_angle,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    LoopPath::new(model, segments)
}

pub fn parse_loop_file(path: &Path) -> Result<LoopPath> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_loop_str(&text, &path.display().to_string())
}

fn check_loop_model(config: &JobConfig, path: &LoopPath) -> Result<()> {
    if path.model() != config.model {
        return Err(Error::ModelMismatch {
            expected: config.model.to_string(),
            found: path.model().to_string(),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// jobs

#[derive(Serialize)]
struct HolonomyBody<'a> {
    fiber_dim: usize,
    /// Names of the entries of every coordinate vector in `loop`.
    coordinates: Vec<String>,
    #[serde(rename = "loop")]
    path: &'a LoopPath,
    holonomy: &'a HolonomyReport,
}

/// Cutoff the holonomy job compares against: three quarters of the job's.
fn reference_cutoff(cutoff: usize) -> usize {
    (3 * cutoff).div_ceil(4).max(2)
}

pub fn run_holonomy_job(config: &JobConfig, path: &LoopPath) -> Result<JobOutcome> {
    check_loop_model(config, path)?;
    let field = config.field()?;
    field
        .spec()
        .warn_if_strong_squeezing(&ParamPoint::from_coords(config.model, path.base_point())?);
    let mut report = holonomy(&field, path, config.n_segments)?;
    let low = reference_cutoff(config.cutoff);
    if low < config.cutoff {
        let coarse = ConnectionField::new(&config.spec_at(low)?)?;
        let (g, _) = holonomy_gate(&coarse, path, config.n_segments)?;
        report.cutoff_history = vec![(low, linalg::frobenius(&(&g - &report.gate))), (config.cutoff, 0.0)];
    } else {
        report.cutoff_history = vec![(config.cutoff, 0.0)];
    }
    let tol = &config.tolerances;
    let discretization = report.discretization_history.last().map_or(0.0, |h| h.1);
    let cutoff_change = report.cutoff_history.first().map_or(0.0, |h| h.1);
    let phase_gap = linalg::wrap_angle(report.det_phase - report.trace_integral).abs();
    let checks = vec![
        Check::new("unitarity", report.unitarity_defect, tol.unitarity),
        Check::new("discretization", discretization, tol.discretization),
        Check::new("cutoff", cutoff_change, tol.cutoff),
        Check::new("det_phase", phase_gap, tol.det_phase),
    ];
    let body = HolonomyBody {
        fiber_dim: field.fiber_dim(),
        coordinates: config.model.coordinate_names(),
        path,
        holonomy: &report,
    };
    finish("holonomy", config, body, checks)
}

#[derive(Serialize)]
struct RankBody<'a> {
    base_point: &'a ParamPoint,
    rank: &'a RankReport,
}

pub fn run_rank_probe(config: &JobConfig, base: &ParamPoint) -> Result<JobOutcome> {
    let field = config.field()?;
    let report = holonomy_algebra_rank(&field, base, config.samples, config.eps, config.seed)?;
    let body = RankBody {
        base_point: base,
        rank: &report,
    };
    finish("rank-probe", config, body, Vec::new())
}

#[derive(Serialize)]
struct SweepRow {
    cutoff: usize,
    gate_distance: f64,
}

#[derive(Serialize)]
struct SweepBody<'a> {
    #[serde(rename = "loop")]
    path: &'a LoopPath,
    table: Vec<SweepRow>,
    monotone: bool,
    final_gap: f64,
    #[serde(serialize_with = "linalg::serialize_rows")]
    final_gate: CMatrix,
}

/// Gate at each cutoff and its distance to the gate at the largest cutoff.
pub fn run_convergence_sweep(config: &JobConfig, path: &LoopPath, cutoffs: &[usize]) -> Result<JobOutcome> {
    check_loop_model(config, path)?;
    config.validate()?;
    if cutoffs.is_empty() {
        return Err(Error::Validation("sweep needs at least one cutoff".into()));
    }
    if let Some(w) = cutoffs.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::Validation(format!(
            "cutoffs must be strictly ascending ({} then {})",
            w[0], w[1]
        )));
    }
    // fail on the budget before doing any work
    let specs = cutoffs.iter().map(|&c| config.spec_at(c)).collect::<Result<Vec<_>>>()?;
    let gates = specs
        .iter()
        .map(|s| Ok(holonomy_gate(&ConnectionField::new(s)?, path, config.n_segments)?.0))
        .collect::<Result<Vec<_>>>()?;
    let last = gates.last().expect("non-empty").clone();
    let table: Vec<SweepRow> = cutoffs
        .iter()
        .zip(&gates)
        .map(|(&cutoff, g)| SweepRow {
            cutoff,
            gate_distance: linalg::frobenius(&(g - &last)),
        })
        .collect();
    let rise = table
        .windows(2)
        .map(|w| w[1].gate_distance - w[0].gate_distance)
        .fold(0.0_f64, f64::max);
    let final_gap = if table.len() > 1 {
        table[table.len() - 2].gate_distance
    } else {
        0.0
    };
    let checks = vec![
        Check::new("cutoff", final_gap, config.tolerances.cutoff),
        Check::new("monotone", rise, 0.0),
    ];
    let body = SweepBody {
        path,
        monotone: rise <= 0.0,
        final_gap,
        table,
        final_gate: last,
    };
    finish("sweep", config, body, checks)
}

#[derive(Serialize)]
struct Component {
    coordinate: String,
    #[serde(serialize_with = "linalg::serialize_rows")]
    value: CMatrix,
}

#[derive(Serialize)]
struct ConnectionBody<'a> {
    point: &'a ParamPoint,
    fiber_dim: usize,
    components: Vec<Component>,
    max_anti_hermitian_defect: f64,
}

pub fn run_connection_report(config: &JobConfig, point: &ParamPoint) -> Result<JobOutcome> {
    let field = config.field()?;
    field.spec().warn_if_strong_squeezing(point);
    let sample = field.connection_at(point)?;
    let defect = sample.max_anti_hermitian_defect();
    let components = sample
        .components
        .iter()
        .enumerate()
        .map(|(k, a)| {
            Ok(Component {
                coordinate: config.model.coordinate_name(k)?,
                value: a.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let body = ConnectionBody {
        point,
        fiber_dim: field.fiber_dim(),
        components,
        max_anti_hermitian_defect: defect,
    };
    let checks = vec![Check::new("anti_hermitian", defect, config.tolerances.anti_hermitian)];
    finish("connection", config, body, checks)
}

#[derive(Serialize)]
struct CurvatureBody<'a> {
    point: &'a ParamPoint,
    mu: String,
    nu: String,
    step: f64,
    #[serde(serialize_with = "linalg::serialize_rows")]
    value: CMatrix,
    anti_hermitian_defect: f64,
}

pub fn run_curvature_report(config: &JobConfig, point: &ParamPoint, mu: &str, nu: &str) -> Result<JobOutcome> {
    let field = config.field()?;
    let (m, n) = (config.model.coordinate_index(mu)?, config.model.coordinate_index(nu)?);
    let sample = field.curvature_at(point, m, n, DEFAULT_FD_STEP)?;
    let defect = linalg::anti_hermitian_defect(&sample.value);
    let body = CurvatureBody {
        point,
        mu: mu.to_string(),
        nu: nu.to_string(),
        step: DEFAULT_FD_STEP,
        value: sample.value,
        anti_hermitian_defect: defect,
    };
    let checks = vec![Check::new("curvature", defect, config.tolerances.curvature)];
    finish("curvature", config, body, checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CIRCLE: &str = r#"{
  "model": "two_qubit",
  "segments": [
    {"kind": "arc", "radius": 0.2, "plane": ["alpha1_re", "alpha1_im"]}
  ]
}"#;

    #[test]
    fn circle_file_parses_to_one_segment() {
        let path = parse_loop_str(CIRCLE, "circle.json").unwrap();
        assert_eq!(path.segments().len(), 1);
        assert_eq!(path.model(), ModelKind::TwoQubit);
        assert!((path.length() - TAU * 0.2).abs() < 1e-15);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let bad = "{\n  \"model\": \"two_qubit\",\n  \"segments\": [ oops ]\n}";
        match parse_loop_str(bad, "bad.json") {
            Err(Error::Parse { line, column, path, .. }) => {
                assert_eq!(line, 3);
                assert!(column > 0);
                assert_eq!(path, "bad.json");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_coordinate_and_open_loop() {
        let unknown = CIRCLE.replace("alpha1_im", "mu7_re");
        assert!(matches!(
            parse_loop_str(&unknown, "x"),
            Err(Error::UnknownCoordinate { .. })
        ));
        let open = r#"{"model": "two_qubit", "segments": [
            {"kind": "line", "from": {}, "to": {"beta1_re": 0.1}}]}"#;
        assert!(matches!(parse_loop_str(open, "x"), Err(Error::OpenLoop { .. })));
        let extra = r#"{"model": "two_qubit", "segments": [], "colour": 1}"#;
        assert!(matches!(parse_loop_str(extra, "x"), Err(Error::Parse { .. })));
    }

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        t.apply_override("cutoff=1e-4").unwrap();
        assert_eq!(t.cutoff, 1e-4);
        assert!(t.apply_override("speed=1").is_err());
        assert!(t.apply_override("cutoff=-1").is_err());
        assert!(t.apply_override("cutoff").is_err());
    }

    #[test]
    fn sweep_rejects_descending_cutoffs() {
        let config = JobConfig {
            cutoff: 4,
            n_segments: 8,
            ..JobConfig::default()
        };
        let path = parse_loop_str(CIRCLE, "c").unwrap();
        assert!(matches!(
            run_convergence_sweep(&config, &path, &[8, 6]),
            Err(Error::Validation(_))
        ));
    }
}
