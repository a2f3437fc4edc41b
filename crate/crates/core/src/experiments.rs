//! Batch runs: a [`RunConfig`] names a model, an experiment and its
//! parameters; [`run`] executes it and writes the requested artifacts;
//! [`report_bundle`] runs many configs and aggregates their verdicts.
//!
//! Reports are deterministic for a fixed config. The only wall-clock value
//! anywhere is the `timestamp` field of a bundle summary.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::commutant::{commutant_basis, ergodicity_report, sample_commutant_unitary};
use crate::decoherence::{
    canonical_factorization, decoherence_trace, decohered_time, pointer_dependence, separable_factorization_family,
    zurek_initial_state,
};
use crate::error::{QsError, Result};
use crate::espace::{coherent_family, locality_degree, reduced_state, rival_coherent_family, space_graph, DEFAULT_COEFF_FLOOR, DEFAULT_MI_FLOOR};
use crate::hilbert::{hermiticity_residual, named, spectral_decompose, Ket, C64, DEFAULT_CLUSTER_TOL};
use crate::kstruct::{
    canonical_tps_invariants, check_kind, computational_basis_structure, make_basis_structure, occupation_structure,
    KStructure, DEFAULT_KIND_TOL,
};
use crate::models::{Model, ModelSpec};
use crate::relevance::{alternative_laws, alternative_reality, certify_nonuniqueness, passive_time_travel, Witness};
use crate::sampling::{haar_unitary, random_ket, rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Certify,
    Timetravel,
    Altreality,
    Altlaws,
    Ergodicity,
    Spacegraph,
    Decohere,
    Coherent,
    Factorfamily,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Certify => "certify",
            Experiment::Timetravel => "timetravel",
            Experiment::Altreality => "altreality",
            Experiment::Altlaws => "altlaws",
            Experiment::Ergodicity => "ergodicity",
            Experiment::Spacegraph => "spacegraph",
            Experiment::Decohere => "decohere",
            Experiment::Coherent => "coherent",
            Experiment::Factorfamily => "factorfamily",
        }
    }

    /// Verdict a run must produce to exit 0 when no expectation is given.
    pub fn default_expectation(self) -> Option<&'static str> {
        match self {
            Experiment::Certify | Experiment::Altreality => Some("DistinctStructures"),
            Experiment::Timetravel => Some("Pass"),
            Experiment::Altlaws => Some("LocalityRaised"),
            Experiment::Ergodicity => None,
            Experiment::Spacegraph => Some("Monotone"),
            Experiment::Decohere => Some("OracleMatch"),
            Experiment::Coherent => Some("FrameValid"),
            Experiment::Factorfamily => Some("AllSeparable"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Dot,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = QsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "json" => Ok(Format::Json),
            "dot" => Ok(Format::Dot),
            "csv" => Ok(Format::Csv),
            other => Err(QsError::Argument(format!("unknown format '{other}' (json, dot, csv)"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mi_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<f64>,
}

/// Experiment parameters. Which ones are required depends on the experiment;
/// see [`RunConfig::validate`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// `time:<t>`, `commutant:<seed>`, `commutant-offorbit:<seed>` or `phase:<θ>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    /// `random:<seed>`, `eigen:<i>` or `basis:<i>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    /// `computational`, `occupation` or `random-basis:<seed>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// System amplitudes `[re, im]` for the spin-bath initial state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sites: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_seed: Option<u64>,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Json]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    /// Model spec file, resolved against the bundle directory when loaded
    /// from a bundle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_file: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Expected verdict; `any` accepts every verdict.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<String>,
    /// Artifact path prefix; extensions are appended per format.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    /// Include witness matrices in certificates.
    #[serde(default)]
    pub full: bool,
}

impl RunConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            name: None,
            experiment,
            model: None,
            model_file: None,
            seed: 0,
            params: Params::default(),
            tolerances: Tolerances::default(),
            expect: None,
            output: None,
            formats: default_formats(),
            full: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| QsError::Schema(format!("run config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.experiment.name().to_string())
    }

    /// Required fields per experiment.
    pub fn validate(&self) -> Result<()> {
        let missing = |what: &str| Err(QsError::Schema(format!("{} requires {what}", self.experiment.name())));
        let needs_model = !matches!(self.experiment, Experiment::Coherent);
        if needs_model && self.model.is_none() && self.model_file.is_none() {
            return missing("a model");
        }
        if self.model.is_some() && self.model_file.is_some() {
            return Err(QsError::Schema("give either model or model_file, not both".into()));
        }
        match self.experiment {
            Experiment::Certify if self.params.witness.is_none() => missing("params.witness"),
            Experiment::Timetravel if self.params.t.is_none() => missing("params.t"),
            Experiment::Decohere if !matches!(self.model, None | Some(ModelSpec::Zurek(_))) => {
                Err(QsError::Schema("decohere requires a zurek model".into()))
            }
            _ => Ok(()),
        }
    }

    fn resolve_against(&mut self, base: &Path) {
        if let Some(p) = &self.model_file {
            if p.is_relative() {
                self.model_file = Some(base.join(p));
            }
        }
    }

    fn model_spec(&self) -> Result<ModelSpec> {
        match (&self.model, &self.model_file) {
            (Some(m), _) => Ok(m.clone()),
            (None, Some(path)) => ModelSpec::from_json(&read_text(path)?),
            (None, None) => Err(QsError::Schema(format!("{} requires a model", self.experiment.name()))),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| QsError::Io { path: path.display().to_string(), source })
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io = |source| QsError::Io { path: path.display().to_string(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable value");
    s.push('\n');
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Pass,
    Mismatch,
    Error,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Pass => 0,
            RunStatus::Mismatch => 2,
            RunStatus::Error => 1,
        }
    }

    fn severity(self) -> u8 {
        match self {
            RunStatus::Pass => 0,
            RunStatus::Mismatch => 1,
            RunStatus::Error => 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub name: String,
    pub experiment: Experiment,
    pub status: RunStatus,
    pub verdict: Option<String>,
    pub expected: Option<String>,
    /// Headline number: gap, residual, deviation or fraction.
    pub metric: Option<f64>,
    /// Full report envelope (`null` on error).
    pub report: Value,
    /// Other artifacts in memory, keyed by format.
    pub extras: Vec<(Format, String)>,
    pub artifacts: Vec<PathBuf>,
    pub error: Option<String>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    fn summary(&self) -> Value {
        json!({
            "name": self.name,
            "experiment": self.experiment,
            "status": self.status,
            "verdict": self.verdict,
            "expected": self.expected,
            "metric": self.metric.filter(|m| m.is_finite()),
            "error": self.error,
        })
    }
}

struct Computed {
    verdict: String,
    metric: Option<f64>,
    report: Value,
    extras: Vec<(Format, String)>,
}

/// Executes one config, writes its artifacts when an output prefix is set,
/// and classifies the result against the expected verdict.
pub fn run(config: &RunConfig) -> RunOutcome {
    let name = config.display_name();
    let expected = match config.expect.as_deref() {
        Some("any") => None,
        Some(e) => Some(e.to_string()),
        None => config.experiment.default_expectation().map(str::to_string),
    };
    let computed = config.validate().and_then(|_| compute(config)).and_then(|c| {
        let artifacts = write_artifacts(config, &c)?;
        Ok((c, artifacts))
    });
    match computed {
        Ok((c, artifacts)) => {
            let status = match &expected {
                Some(e) if *e != c.verdict => RunStatus::Mismatch,
                _ => RunStatus::Pass,
            };
            RunOutcome {
                name,
                experiment: config.experiment,
                status,
                verdict: Some(c.verdict),
                expected,
                metric: c.metric,
                report: c.report,
                extras: c.extras,
                artifacts,
                error: None,
            }
        }
        Err(e) => RunOutcome {
            name,
            experiment: config.experiment,
            status: RunStatus::Error,
            verdict: None,
            expected,
            metric: None,
            report: Value::Null,
            extras: Vec::new(),
            artifacts: Vec::new(),
            error: Some(e.to_string()),
        },
    }
}

fn write_artifacts(config: &RunConfig, c: &Computed) -> Result<Vec<PathBuf>> {
    let Some(prefix) = &config.output else { return Ok(Vec::new()) };
    let mut written = Vec::new();
    let with_ext = |ext: &str| {
        let mut p = prefix.as_os_str().to_owned();
        p.push(format!(".{ext}"));
        PathBuf::from(p)
    };
    for f in &config.formats {
        let (path, text) = match f {
            Format::Json => (with_ext("json"), to_pretty(&c.report)),
            Format::Dot | Format::Csv => {
                let ext = if *f == Format::Dot { "dot" } else { "csv" };
                match c.extras.iter().find(|(g, _)| g == f) {
                    Some((_, text)) => (with_ext(ext), text.clone()),
                    None => {
                        return Err(QsError::Argument(format!(
                            "{} does not produce {ext} output",
                            config.experiment.name()
                        )))
                    }
                }
            }
        };
        write_atomic(&path, &text)?;
        written.push(path);
    }
    Ok(written)
}

fn parse_prefixed<T: std::str::FromStr>(spec: &str, prefix: &str) -> Option<Result<T>> {
    spec.strip_prefix(prefix).map(|rest| {
        rest.parse::<T>().map_err(|_| QsError::Argument(format!("cannot parse '{rest}' in '{spec}'")))
    })
}

/// Parses a witness spec against a model.
pub fn parse_witness(spec: &str, model: &Model) -> Result<Witness> {
    let h = &model.hamiltonian;
    if let Some(t) = parse_prefixed::<f64>(spec, "time:") {
        return Ok(Witness::time(h, t?, model.hbar));
    }
    if let Some(theta) = parse_prefixed::<f64>(spec, "phase:") {
        return Ok(Witness::phase(h.dim(), theta?));
    }
    if let Some(seed) = parse_prefixed::<u64>(spec, "commutant-offorbit:") {
        return Witness::commutant(h, seed?, true)?
            .ok_or_else(|| QsError::Argument("no commutant unitary off the time orbit exists for this model".into()));
    }
    if let Some(seed) = parse_prefixed::<u64>(spec, "commutant:") {
        return Witness::commutant(h, seed?, false)?
            .ok_or_else(|| QsError::Internal("unrestricted commutant sampling failed".into()));
    }
    Err(QsError::Argument(format!(
        "unknown witness '{spec}' (time:<t>, commutant:<seed>, commutant-offorbit:<seed>, phase:<θ>)"
    )))
}

/// Parses a state spec against a model.
pub fn parse_state(spec: &str, model: &Model, cluster_tol: f64) -> Result<Ket> {
    let d = model.hamiltonian.dim();
    if let Some(seed) = parse_prefixed::<u64>(spec, "random:") {
        return Ok(random_ket(d, &mut rng(seed?)));
    }
    if let Some(i) = parse_prefixed::<usize>(spec, "basis:") {
        let i = i?;
        if i >= d {
            return Err(QsError::Argument(format!("basis index {i} out of range for dim {d}")));
        }
        return Ok(Ket::basis(d, i));
    }
    if let Some(i) = parse_prefixed::<usize>(spec, "eigen:") {
        let i = i?;
        let sd = spectral_decompose(&model.hamiltonian, cluster_tol)?;
        let col = sd
            .eigenvectors
            .iter()
            .flat_map(|v| v.column_iter().map(|c| c.into_owned()).collect::<Vec<_>>())
            .nth(i)
            .ok_or_else(|| QsError::Argument(format!("eigenvector index {i} out of range for dim {d}")))?;
        return Ket::normalized(col);
    }
    Err(QsError::Argument(format!("unknown state '{spec}' (random:<seed>, eigen:<i>, basis:<i>)")))
}

fn parse_structure(spec: &str, model: &Model, kind_tol: f64) -> Result<KStructure> {
    let d = model.hamiltonian.dim();
    let s = if spec == "computational" {
        computational_basis_structure(d)
    } else if spec == "occupation" {
        occupation_structure(&model.tps)?
    } else if let Some(seed) = parse_prefixed::<u64>(spec, "random-basis:") {
        let u = haar_unitary(d, &mut rng(seed?));
        let vecs: Vec<Ket> = (0..d).map(|i| Ket::normalized(u.matrix().column(i).into_owned())).collect::<Result<_>>()?;
        make_basis_structure(&vecs)?
    } else {
        return Err(QsError::Argument(format!(
            "unknown structure '{spec}' (computational, occupation, random-basis:<seed>)"
        )));
    };
    let kind = s.kind.clone().with_tolerance(kind_tol);
    Ok(s.with_kind(kind))
}

fn envelope(config: &RunConfig, model_id: Option<&str>, verdict: &str, report: Value) -> Value {
    json!({
        "name": config.display_name(),
        "experiment": config.experiment,
        "model": model_id,
        "seed": config.seed,
        "verdict": verdict,
        "report": report,
    })
}

fn finite(x: f64) -> Value {
    if x.is_finite() { json!(x) } else { Value::Null }
}

fn compute(config: &RunConfig) -> Result<Computed> {
    let tol = &config.tolerances;
    let kind_tol = tol.kind.unwrap_or(DEFAULT_KIND_TOL);
    let cluster_tol = tol.cluster.unwrap_or(DEFAULT_CLUSTER_TOL);
    let p = &config.params;
    let model = match (config.experiment, &config.model, &config.model_file) {
        (Experiment::Coherent, None, None) => None,
        _ => Some(config.model_spec()?.build()?),
    };
    let default_state = format!("random:{}", config.seed);
    let state_spec = p.state.clone().unwrap_or(default_state);
    let plain = |verdict: String, metric: Option<f64>, report: Value| Computed {
        report: envelope(config, model.as_ref().map(|m| m.id.as_str()), &verdict, report),
        verdict,
        metric,
        extras: Vec::new(),
    };

    match config.experiment {
        Experiment::Certify => {
            let m = model.as_ref().expect("model present");
            let s = parse_structure(p.structure.as_deref().unwrap_or("computational"), m, kind_tol)?;
            let psi = parse_state(&state_spec, m, cluster_tol)?;
            let w = parse_witness(p.witness.as_deref().expect("validated"), m)?;
            let cert = certify_nonuniqueness(&m.hamiltonian, &s, &psi, &w)?.with_model_id(m.id.clone());
            let mut report = cert.to_json(config.full);
            report["state"] = json!(state_spec);
            let verdict = format!("{:?}", cert.verdict);
            Ok(plain(verdict, Some(cert.max_invariant_gap), report))
        }
        Experiment::Timetravel => {
            let m = model.as_ref().expect("model present");
            let t = p.t.expect("validated");
            let basis = computational_basis_structure(m.hamiltonian.dim());
            let samples = p.samples.unwrap_or(1).max(1);
            let mut runs = Vec::new();
            let mut worst: f64 = 0.0;
            for k in 0..samples {
                let psi = if k == 0 {
                    parse_state(&state_spec, m, cluster_tol)?
                } else {
                    random_ket(m.hamiltonian.dim(), &mut rng(config.seed.wrapping_add(k as u64)))
                };
                let rep = passive_time_travel(&m.hamiltonian, &basis, &psi, t, m.hbar)?;
                worst = worst.max(rep.residual);
                runs.push(serde_json::to_value(&rep)?);
            }
            let verdict = if worst < 1e-11 { "Pass" } else { "Fail" };
            Ok(plain(verdict.into(), Some(worst), json!({"t": t, "max_residual": worst, "samples": runs})))
        }
        Experiment::Altreality => {
            let m = model.as_ref().expect("model present");
            let s = parse_structure(p.structure.as_deref().unwrap_or("computational"), m, kind_tol)?;
            let psi = parse_state(&state_spec, m, cluster_tol)?;
            let seed = p.witness_seed.unwrap_or(config.seed);
            let cert = alternative_reality(&m.hamiltonian, &s, &psi, seed)?.with_model_id(m.id.clone());
            let mut report = cert.to_json(config.full);
            report["state"] = json!(state_spec);
            Ok(plain(format!("{:?}", cert.verdict), Some(cert.max_invariant_gap), report))
        }
        Experiment::Altlaws => {
            let m = model.as_ref().expect("model present");
            let samples = p.samples.unwrap_or(1).max(1);
            let floor = tol.coeff_floor.unwrap_or(DEFAULT_COEFF_FLOOR);
            let d0 = locality_degree(&m.hamiltonian, &m.tps, floor)?;
            let reports = (0..samples as u64)
                .into_par_iter()
                .map(|k| alternative_laws(&m.hamiltonian, &m.tps, config.seed.wrapping_add(k)))
                .collect::<Result<Vec<_>>>()?;
            let raised = reports.iter().filter(|r| r.d_conjugated > d0).count();
            let fraction = raised as f64 / samples as f64;
            let dev = reports.iter().map(|r| r.spectral_deviation).fold(0.0, f64::max);
            let verdict = if fraction >= 0.95 { "LocalityRaised" } else { "LocalityPreserved" };
            Ok(plain(
                verdict.into(),
                Some(fraction),
                json!({
                    "d_original": d0,
                    "d_conjugated": reports.iter().map(|r| r.d_conjugated).collect::<Vec<_>>(),
                    "raised_fraction": fraction,
                    "max_spectral_deviation": dev,
                }),
            ))
        }
        Experiment::Ergodicity => {
            let m = model.as_ref().expect("model present");
            let r = ergodicity_report(&m.hamiltonian, p.bound.unwrap_or(3), tol.relation.unwrap_or(1e-9), cluster_tol)?;
            Ok(plain(format!("{:?}", r.verdict), Some(r.min_gap).filter(|g| g.is_finite()), r.to_json()))
        }
        Experiment::Spacegraph => {
            let m = model.as_ref().expect("model present");
            let psi = parse_state(&state_spec, m, cluster_tol)?;
            let g = space_graph(&m.hamiltonian, &m.tps, &psi, tol.mi_floor.unwrap_or(DEFAULT_MI_FLOOR))?;
            let verdict = if g.is_distance_monotone() { "Monotone" } else { "NotMonotone" };
            let mut report = g.to_json();
            report["state"] = json!(state_spec);
            let mut c = plain(verdict.into(), Some(g.i_max), report);
            c.extras.push((Format::Dot, g.to_dot()));
            Ok(c)
        }
        Experiment::Decohere => {
            let m = model.as_ref().expect("model present");
            let Some(ModelSpec::Zurek(spec)) = config.model.clone().or_else(|| config.model_spec().ok()) else {
                return Err(QsError::Schema("decohere requires a zurek model".into()));
            };
            let a = p.a.map_or(C64::from(std::f64::consts::FRAC_1_SQRT_2), |[re, im]| C64::new(re, im));
            let b = p.b.map_or(C64::from(std::f64::consts::FRAC_1_SQRT_2), |[re, im]| C64::new(re, im));
            let psi = zurek_initial_state(a, b, spec.env_count())?;
            let n = p.times.unwrap_or(200).max(2);
            let t_end = p.t_end.unwrap_or(4.0 * decohered_time(&spec));
            let times: Vec<f64> = (0..n).map(|k| t_end * k as f64 / (n - 1) as f64).collect();
            let trace = decoherence_trace(&spec, &psi, &times)?;
            let t_dec = decohered_time(&spec);
            let pointer = pointer_dependence(&spec, &psi, p.witness_seed.unwrap_or(config.seed), t_dec)?;
            let verdict = if trace.max_dev < 1e-10 { "OracleMatch" } else { "OracleMismatch" };
            let report = json!({
                "trace": trace.to_json(),
                "pointer": pointer.to_json(),
            });
            let mut c = Computed {
                report: envelope(config, Some(&m.id), verdict, report),
                verdict: verdict.into(),
                metric: Some(trace.max_dev),
                extras: Vec::new(),
            };
            c.extras.push((Format::Csv, trace.to_csv()));
            Ok(c)
        }
        Experiment::Coherent => {
            let sites = p.sites.or(model.as_ref().map(|m| m.hamiltonian.dim())).unwrap_or(16);
            let hbar = p.hbar.unwrap_or(1.0);
            let fam = coherent_family(sites, hbar)?;
            let (c, residual) = fam.frame_residual();
            let povm = fam.povm_structure();
            let kind_passed = check_kind(&povm).passed();
            let mut report = json!({
                "sites": sites,
                "hbar": hbar,
                "frame_constant": c,
                "frame_residual": residual,
                "povm_kind_passed": kind_passed,
            });
            if let Some(m) = model.as_ref().filter(|m| m.hamiltonian.dim() == sites) {
                let cb = commutant_basis(&m.hamiltonian, cluster_tol)?;
                let w = sample_commutant_unitary(&cb, p.witness_seed.unwrap_or(config.seed), false)
                    .unitary()
                    .cloned()
                    .ok_or_else(|| QsError::Internal("unrestricted commutant sampling failed".into()))?;
                let rival = rival_coherent_family(&fam, &w)?;
                let observable = if m.tps.factor_dims().iter().all(|&d| d == 2) {
                    occupation_structure(&m.tps)?
                } else {
                    computational_basis_structure(sites)
                };
                let sup = |a: Vec<Vec<f64>>, b: Vec<Vec<f64>>| {
                    a.iter().zip(&b).flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs())).fold(0.0, f64::max)
                };
                report["rival"] = json!({
                    "gram_deviation": sup(fam.overlap_table(), rival.overlap_table()),
                    "profile_gap": sup(fam.expectation_profile(&observable), rival.expectation_profile(&observable)),
                    "frame_residual": rival.frame_residual().1,
                });
            }
            let verdict = if residual < 0.05 && kind_passed { "FrameValid" } else { "FrameInvalid" };
            Ok(plain(verdict.into(), Some(residual), report))
        }
        Experiment::Factorfamily => {
            let m = model.as_ref().expect("model present");
            if m.hamiltonian.dim() != 4 {
                return Err(QsError::Argument("factorfamily needs a 4-dimensional model".into()));
            }
            let psi = parse_state(&state_spec, m, cluster_tol)?;
            let count = p.count.unwrap_or(8);
            let family = separable_factorization_family(&psi, config.seed, count)?;
            let tops = family
                .iter()
                .map(|t| Ok(reduced_state(&psi, t, &[0])?.eigenvalues()[1]))
                .collect::<Result<Vec<f64>>>()?;
            let bell = [named::bell()];
            let invariants = family
                .iter()
                .map(|t| canonical_tps_invariants(t, &bell, &m.hamiltonian))
                .collect::<Result<Vec<_>>>()?;
            let mut distinct = 0;
            let mut pairs = 0;
            for i in 0..invariants.len() {
                for j in (i + 1)..invariants.len() {
                    pairs += 1;
                    let gap = invariants[i].iter().zip(&invariants[j]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    if gap > 1e-3 {
                        distinct += 1;
                    }
                }
            }
            let canonical = canonical_factorization(&psi)?;
            let min_top = tops.iter().cloned().fold(f64::INFINITY, f64::min);
            let verdict = if min_top > 1.0 - 1e-10 { "AllSeparable" } else { "NotSeparable" };
            Ok(plain(
                verdict.into(),
                Some(min_top),
                json!({
                    "count": count,
                    "top_schmidt_weights": tops,
                    "min_top_schmidt_weight": finite(min_top),
                    "distinct_pairs": distinct,
                    "pairs": pairs,
                    "canonical_invariants": canonical_tps_invariants(&canonical, &bell, &m.hamiltonian)?,
                }),
            ))
        }
    }
}

/// Summary of a built model for the `model` subcommand.
pub fn describe_model(spec: &ModelSpec) -> Result<Value> {
    let m = spec.build()?;
    Ok(json!({
        "id": m.id,
        "dim": m.hamiltonian.dim(),
        "factor_dims": m.tps.factor_dims(),
        "hbar": m.hbar,
        "eigenvalues": m.hamiltonian.eigenvalues(),
        "locality_degree": locality_degree(&m.hamiltonian, &m.tps, DEFAULT_COEFF_FLOOR)?,
        "hermiticity_residual": hermiticity_residual(m.hamiltonian.matrix()),
    }))
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BundleFile {
    #[serde(default)]
    #[allow(dead_code)]
    name: Option<String>,
    runs: Vec<RunConfig>,
}

/// Loads `{"name": …, "runs": [RunConfig…]}`; relative model files resolve
/// against the bundle's directory.
pub fn load_bundle(path: &Path) -> Result<Vec<RunConfig>> {
    let text = read_text(path)?;
    let file: BundleFile = serde_json::from_str(&text).map_err(|e| QsError::Schema(format!("bundle {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(file
        .runs
        .into_iter()
        .map(|mut c| {
            c.resolve_against(base);
            c
        })
        .collect())
}

pub struct BundleReport {
    pub outcomes: Vec<RunOutcome>,
    pub summary: Value,
    pub exit_code: i32,
}

/// Runs every config on at most `jobs` worker threads. With `out_dir`, each
/// run's artifacts go to `<out_dir>/<name>.<ext>` and the summary to
/// `<out_dir>/summary.json`.
pub fn report_bundle(configs: &[RunConfig], jobs: usize, out_dir: Option<&Path>) -> Result<BundleReport> {
    let configs: Vec<RunConfig> = configs
        .iter()
        .map(|c| {
            let mut c = c.clone();
            if let Some(dir) = out_dir {
                c.output = Some(dir.join(c.display_name()));
            }
            c
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| QsError::Internal(format!("thread pool: {e}")))?;
    let outcomes: Vec<RunOutcome> = pool.install(|| configs.par_iter().map(run).collect());
    let worst = outcomes.iter().map(|o| o.status).max_by_key(|s| s.severity()).unwrap_or(RunStatus::Pass);
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let summary = json!({
        "timestamp": timestamp,
        "exit_code": worst.exit_code(),
        "runs": outcomes.iter().map(RunOutcome::summary).collect::<Vec<_>>(),
    });
    if let Some(dir) = out_dir {
        write_atomic(&dir.join("summary.json"), &to_pretty(&summary))?;
    }
    Ok(BundleReport { exit_code: worst.exit_code(), outcomes, summary })
}
