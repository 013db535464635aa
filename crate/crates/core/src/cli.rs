//! Batch front end: input parsing, job dispatch, reports and exit codes.
//!
//! Every command builds its whole report in memory and hands back a string;
//! the binary writes it in one go, so a failing command prints nothing on
//! stdout.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::huffman::{canonical_codewords, ceil_self_information, shannon_lengths};
use crate::nml::{
    nml_adversary, nml_distribution, nml_tv, pointwise_utility, robust_huffman_pointwise,
    robust_shannon_pointwise, NmlResult,
};
use crate::oracle::{self, ball_sample, brute_min_over_codes, brute_sup_over_ball, default_lmax};
use crate::primitives::{
    drop_zero_symbols, entropy, kl_divergence, kraft_sum, validate_distribution, Arity,
    CodeLengths, Distribution, DivergenceBall, PrefixCode,
};
use crate::solver::{
    existence_threshold, gg_threshold, solve_avg_redundancy, solve_gg, Regime, SolveOptions,
};
use crate::tilted::{avg_redundancy, gg_utility, sup_avg_redundancy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BOUNDARY: i32 = 3;
pub const EXIT_NO_CONVERGENCE: i32 = 4;
pub const EXIT_VERIFY_FAILED: i32 = 5;

/// Tolerance on the nested minimax comparison against the sampling oracle.
pub const NESTED_MINIMAX_TOL: f64 = 5e-3;
pub const DEFAULT_SAMPLES: usize = 20_000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Library(#[from] Error),
    #[error("{failed} of {total} checks failed")]
    VerifyFailed {
        failed: usize,
        total: usize,
        /// The full verification report, still worth printing.
        report: String,
    },
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Library(Error::BoundaryRegime { .. }) => EXIT_BOUNDARY,
            CliError::Library(Error::NoConvergence(_)) => EXIT_NO_CONVERGENCE,
            CliError::Library(_) => EXIT_INPUT,
            CliError::VerifyFailed { .. } => EXIT_VERIFY_FAILED,
            CliError::Output(_) => EXIT_INTERNAL,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    /// Minimax average redundancy over the divergence ball.
    AvgRed,
    /// Minimax of average redundancy minus divergence.
    Gg,
    /// Minimax pointwise redundancy (robust Huffman on the NML weights).
    Pointwise,
    /// Shannon code for the nominal distribution, scored by its worst case.
    ShannonNominal,
    /// Robust Shannon code on the NML distribution of the divergence ball.
    NmlOnly,
    /// Robust Shannon code on the NML distribution of a total-variation ball.
    NmlTv,
}

impl ObjectiveKind {
    pub fn name(self) -> &'static str {
        match self {
            ObjectiveKind::AvgRed => "avg-red",
            ObjectiveKind::Gg => "gg",
            ObjectiveKind::Pointwise => "pointwise",
            ObjectiveKind::ShannonNominal => "shannon-nominal",
            ObjectiveKind::NmlOnly => "nml-only",
            ObjectiveKind::NmlTv => "nml-tv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Table,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobSpec {
    pub input: PathBuf,
    pub objective: ObjectiveKind,
    /// In nats.
    pub radius: f64,
    /// Total-variation radius for `nml-tv`.
    pub tv: Option<f64>,
    pub arity: Arity,
    pub tol: f64,
    pub strict_boundary: bool,
    pub seed: u64,
    pub format: OutputFormat,
    /// Drop zero-probability symbols instead of rejecting the input.
    pub allow_zero: bool,
}

impl JobSpec {
    pub fn new(input: impl Into<PathBuf>, objective: ObjectiveKind, radius: f64) -> Self {
        JobSpec {
            input: input.into(),
            objective,
            radius,
            tv: None,
            arity: Arity::BINARY,
            tol: crate::solver::DEFAULT_TOL,
            strict_boundary: false,
            seed: 0,
            format: OutputFormat::Json,
            allow_zero: false,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return Err(CliError::Input(format!("radius must be a non-negative number, got {}", self.radius)));
        }
        if !(self.tol > 0.0) {
            return Err(CliError::Input(format!("tolerance must be positive, got {}", self.tol)));
        }
        match (self.objective, self.tv) {
            (ObjectiveKind::NmlTv, None) => Err(CliError::Input("nml-tv needs --tv".into())),
            (_, Some(t)) if !(t >= 0.0 && t.is_finite()) => {
                Err(CliError::Input(format!("--tv must be a non-negative number, got {t}")))
            }
            _ => Ok(()),
        }
    }
}

/// Converts a radius given in bits to nats.
pub fn bits_to_nats(bits: f64) -> f64 {
    bits * std::f64::consts::LN_2
}

/// A nominal distribution read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub distribution: Distribution,
    /// Original indices of zero-probability symbols dropped on ingestion.
    pub dropped: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonInstance {
    probs: Vec<f64>,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

/// Reads `{"probs": [...], "labels": [...]}` JSON or `label,prob` CSV.
///
/// The format follows the extension (`.json`, `.csv`), falling back to
/// sniffing the first character.
pub fn load_instance(path: &Path, allow_zero: bool) -> CliResult<Instance> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let is_json = match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("json") => true,
        Some(e) if e.eq_ignore_ascii_case("csv") => false,
        _ => text.trim_start().starts_with('{'),
    };
    let (probs, labels) = if is_json {
        let parsed: JsonInstance = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        (parsed.probs, parsed.labels)
    } else {
        parse_csv(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
    };
    instance_from_parts(probs, labels, allow_zero)
}

fn parse_csv(text: &str) -> std::result::Result<(Vec<f64>, Option<Vec<String>>), String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut probs = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        if record.len() != 2 {
            return Err(format!("row {}: expected `label,prob`, got {} fields", row + 1, record.len()));
        }
        match record[1].parse::<f64>() {
            Ok(p) => {
                labels.push(record[0].to_string());
                probs.push(p);
            }
            // a header line
            Err(_) if row == 0 => {}
            Err(_) => return Err(format!("row {}: `{}` is not a number", row + 1, &record[1])),
        }
    }
    Ok((probs, Some(labels)))
}

fn instance_from_parts(probs: Vec<f64>, labels: Option<Vec<String>>, allow_zero: bool) -> CliResult<Instance> {
    if let Some(l) = &labels {
        if l.len() != probs.len() {
            return Err(Error::LabelMismatch { labels: l.len(), probs: probs.len() }.into());
        }
    }
    if allow_zero {
        let (distribution, kept) = drop_zero_symbols(&probs, labels.as_deref())?;
        let dropped = (0..probs.len()).filter(|i| !kept.contains(i)).collect();
        return Ok(Instance { distribution, dropped });
    }
    let mut distribution = validate_distribution(&probs, false)?;
    if let Some(l) = labels {
        distribution = distribution.with_labels(l)?;
    }
    Ok(Instance { distribution, dropped: Vec::new() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub kraft_sum: f64,
    pub residuals: BTreeMap<String, f64>,
}

/// Output of `code`, and the input of `verify --code`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeReport {
    pub objective: ObjectiveKind,
    pub regime: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub arity: u32,
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tv: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub lengths: Vec<u32>,
    pub codewords: Vec<String>,
    pub worst_case: Vec<f64>,
    pub achieved_utility: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nml_raw: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dropped: Vec<usize>,
    pub diagnostics: Diagnostics,
}

/// The solved code before it is flattened into a report.
struct Solution {
    lengths: CodeLengths,
    codewords: PrefixCode,
    beta: Option<f64>,
    worst_case: Distribution,
    achieved_utility: f64,
    regime: Regime,
    nml: Option<NmlResult>,
}

fn solve_job(job: &JobSpec, mu: &Distribution) -> CliResult<Solution> {
    let ball = DivergenceBall::new(mu.clone(), job.radius)?;
    let opts = SolveOptions { tol: job.tol, strict_boundary: job.strict_boundary };
    let from_robust = |r: crate::solver::RobustCodeResult, nml| Solution {
        lengths: r.lengths,
        codewords: r.codewords,
        beta: r.beta,
        worst_case: r.worst_case,
        achieved_utility: r.achieved_utility,
        regime: r.regime,
        nml,
    };
    Ok(match job.objective {
        ObjectiveKind::AvgRed => from_robust(solve_avg_redundancy(&ball, job.arity, opts)?, None),
        ObjectiveKind::Gg => from_robust(solve_gg(&ball, job.arity, opts)?, None),
        ObjectiveKind::Pointwise => {
            let nml = nml_distribution(&ball, crate::nml::DEFAULT_TOL)?;
            from_robust(robust_huffman_pointwise(&ball, job.arity)?, Some(nml))
        }
        ObjectiveKind::ShannonNominal => {
            let lengths = shannon_lengths(mu, job.arity)?;
            let sup = sup_avg_redundancy(&lengths, &ball, job.tol.min(1e-12))?;
            let regime = if job.radius == 0.0 {
                Regime::ZeroRadius
            } else if sup.beta.is_some() {
                Regime::Interior
            } else {
                Regime::Boundary
            };
            Solution {
                codewords: canonical_codewords(&lengths)?,
                lengths,
                beta: sup.beta,
                worst_case: sup.maximizer,
                achieved_utility: sup.value,
                regime,
                nml: None,
            }
        }
        ObjectiveKind::NmlOnly | ObjectiveKind::NmlTv => {
            let (lengths, nml) = if job.objective == ObjectiveKind::NmlOnly {
                (
                    robust_shannon_pointwise(&ball, job.arity)?,
                    nml_distribution(&ball, crate::nml::DEFAULT_TOL)?,
                )
            } else {
                let nml = nml_tv(mu, job.tv.unwrap_or(0.0))?;
                (ceil_self_information(nml.normalized.probs(), job.arity)?, nml)
            };
            let zero = match job.objective {
                ObjectiveKind::NmlTv => job.tv == Some(0.0),
                _ => job.radius == 0.0,
            };
            Solution {
                codewords: canonical_codewords(&lengths)?,
                achieved_utility: pointwise_utility(&lengths, &nml.normalized)?,
                lengths,
                beta: None,
                worst_case: nml.normalized.clone(),
                regime: if zero { Regime::ZeroRadius } else { Regime::Interior },
                nml: Some(nml),
            }
        }
    })
}

fn utility_of(objective: ObjectiveKind, lengths: &CodeLengths, nu: &Distribution, mu: &Distribution) -> crate::Result<f64> {
    match objective {
        ObjectiveKind::AvgRed | ObjectiveKind::ShannonNominal => avg_redundancy(lengths, nu),
        ObjectiveKind::Gg => gg_utility(lengths, nu, mu),
        ObjectiveKind::Pointwise | ObjectiveKind::NmlOnly | ObjectiveKind::NmlTv => {
            pointwise_utility(lengths, nu)
        }
    }
}

fn reference_nml(job: &JobSpec, mu: &Distribution) -> crate::Result<NmlResult> {
    match job.objective {
        ObjectiveKind::NmlTv => nml_tv(mu, job.tv.unwrap_or(0.0)),
        _ => nml_distribution(&DivergenceBall::new(mu.clone(), job.radius)?, crate::nml::DEFAULT_TOL),
    }
}

/// Recomputes the diagnostics block from the code, the reported worst case
/// and the job alone, so `verify --code` reproduces it bit for bit.
fn diagnose(
    job: &JobSpec,
    mu: &Distribution,
    lengths: &CodeLengths,
    worst_case: &Distribution,
    beta: Option<f64>,
    achieved_utility: f64,
) -> crate::Result<Diagnostics> {
    let mut residuals = BTreeMap::new();
    let recomputed = utility_of(job.objective, lengths, worst_case, mu)?;
    residuals.insert("utility".to_string(), (recomputed - achieved_utility).abs());
    match job.objective {
        ObjectiveKind::AvgRed | ObjectiveKind::Gg | ObjectiveKind::ShannonNominal => {
            let div = kl_divergence(worst_case, mu)?;
            residuals.insert("ball_excess".to_string(), (div - job.radius).max(0.0));
            if beta.is_some() {
                residuals.insert("surface".to_string(), (div - job.radius).abs());
            }
        }
        ObjectiveKind::Pointwise | ObjectiveKind::NmlOnly | ObjectiveKind::NmlTv => {
            let nml = reference_nml(job, mu)?;
            let gap = nml
                .normalized
                .probs()
                .iter()
                .zip(worst_case.probs())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            residuals.insert("nml_consistency".to_string(), gap);
            if job.objective != ObjectiveKind::NmlTv {
                let root = nml.roots_residual.iter().map(|r| r.1).fold(0.0, f64::max);
                residuals.insert("nml_root".to_string(), root);
            }
        }
    }
    Ok(Diagnostics { kraft_sum: kraft_sum(lengths), residuals })
}

/// Solves the job and returns the report without rendering it.
pub fn run_code(job: &JobSpec) -> CliResult<CodeReport> {
    job.validate()?;
    let instance = load_instance(&job.input, job.allow_zero)?;
    let mu = &instance.distribution;
    let sol = solve_job(job, mu)?;
    let diagnostics = diagnose(job, mu, &sol.lengths, &sol.worst_case, sol.beta, sol.achieved_utility)?;
    Ok(CodeReport {
        objective: job.objective,
        regime: sol.regime.as_str().to_string(),
        beta: sol.beta,
        arity: job.arity.get(),
        radius: job.radius,
        tv: job.tv.filter(|_| job.objective == ObjectiveKind::NmlTv),
        labels: mu.labels().map(<[String]>::to_vec),
        lengths: sol.lengths.as_integers().ok_or(Error::NotInteger)?,
        codewords: sol.codewords.codewords().to_vec(),
        worst_case: sol.worst_case.probs().to_vec(),
        achieved_utility: sol.achieved_utility,
        nml_raw: sol.nml.map(|n| n.raw),
        dropped: instance.dropped,
        diagnostics,
    })
}

pub fn cmd_code(job: &JobSpec) -> CliResult<String> {
    let report = run_code(job)?;
    Ok(match job.format {
        OutputFormat::Json => to_json(&report)?,
        OutputFormat::Table => code_table(&report),
    })
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn code_table(r: &CodeReport) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| out.push_str(&format!("{k:<26}{v}\n"));
    line("objective", r.objective.name().to_string());
    line("regime", r.regime.clone());
    if let Some(b) = r.beta {
        line("beta", format!("{b:.10}"));
    }
    line("arity", r.arity.to_string());
    line("radius (nats)", r.radius.to_string());
    line("achieved_utility", format!("{:.12}", r.achieved_utility));
    line("kraft_sum", format!("{:.12}", r.diagnostics.kraft_sum));
    for (k, v) in &r.diagnostics.residuals {
        line(&format!("residual.{k}"), format!("{v:.3e}"));
    }
    out.push('\n');
    out.push_str(&format!("{:<12}{:>8}  {:<14}{:>20}\n", "symbol", "length", "codeword", "worst_case"));
    for i in 0..r.lengths.len() {
        let label = r
            .labels
            .as_ref()
            .map(|l| l[i].clone())
            .unwrap_or_else(|| i.to_string());
        out.push_str(&format!(
            "{:<12}{:>8}  {:<14}{:>20.12}\n",
            label, r.lengths[i], r.codewords[i], r.worst_case[i]
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolSaturation {
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub mu: f64,
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeReport {
    pub symbols: usize,
    pub arity: u32,
    pub entropy: f64,
    /// Largest radius with a tight tilt for the average-redundancy problem.
    pub r_max: f64,
    pub gg_threshold: f64,
    pub limit_code: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exp_neg_radius: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub saturation: Vec<SymbolSaturation>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub dropped: Vec<usize>,
}

/// `radius` in nats.
pub fn run_analyze(input: &Path, arity: Arity, radius: Option<f64>, allow_zero: bool) -> CliResult<AnalyzeReport> {
    if let Some(r) = radius {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(CliError::Input(format!("radius must be a non-negative number, got {r}")));
        }
    }
    let instance = load_instance(input, allow_zero)?;
    let mu = &instance.distribution;
    let threshold = existence_threshold(mu, arity)?;
    let saturation = match radius {
        Some(r) => {
            let t = (-r).exp();
            mu.probs()
                .iter()
                .enumerate()
                .map(|(index, &m)| SymbolSaturation {
                    index,
                    label: mu.labels().map(|l| l[index].clone()),
                    mu: m,
                    saturated: m >= t,
                })
                .collect()
        }
        None => Vec::new(),
    };
    Ok(AnalyzeReport {
        symbols: mu.len(),
        arity: arity.get(),
        entropy: entropy(mu, arity),
        r_max: threshold.r_max,
        gg_threshold: gg_threshold(mu),
        limit_code: threshold.limit_code.as_integers().ok_or(Error::NotInteger)?,
        radius,
        exp_neg_radius: radius.map(|r| (-r).exp()),
        saturation,
        dropped: instance.dropped,
    })
}

pub fn cmd_analyze(
    input: &Path,
    arity: Arity,
    radius: Option<f64>,
    allow_zero: bool,
    format: OutputFormat,
) -> CliResult<String> {
    let r = run_analyze(input, arity, radius, allow_zero)?;
    Ok(match format {
        OutputFormat::Json => to_json(&r)?,
        OutputFormat::Table => {
            let mut out = format!(
                "{:<18}{}\n{:<18}{}\n{:<18}{:.12}\n{:<18}{:.12}\n{:<18}{:.12}\n{:<18}{:?}\n",
                "symbols", r.symbols, "arity", r.arity, "entropy", r.entropy, "r_max", r.r_max,
                "gg_threshold", r.gg_threshold, "limit_code", r.limit_code
            );
            if let (Some(radius), Some(t)) = (r.radius, r.exp_neg_radius) {
                out.push_str(&format!("{:<18}{}\n{:<18}{:.12}\n", "radius (nats)", radius, "exp(-radius)", t));
                for s in &r.saturation {
                    let name = s.label.clone().unwrap_or_else(|| s.index.to_string());
                    let flag = if s.saturated { "saturated" } else { "" };
                    out.push_str(&format!("  {:<16}{:<18.12}{}\n", name, s.mu, flag));
                }
            }
            out
        }
    })
}

/// Sampling and enumeration limits for `verify`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleLimits {
    pub lmax: Option<u32>,
    pub samples: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { lmax: None, samples: DEFAULT_SAMPLES }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub objective: ObjectiveKind,
    pub passed: bool,
    pub checks: Vec<Check>,
}

struct Checks(Vec<Check>);

impl Checks {
    /// Passes when `measured <= threshold`.
    fn at_most(&mut self, name: &str, measured: f64, threshold: f64) {
        self.0.push(Check {
            name: name.to_string(),
            passed: measured <= threshold,
            measured,
            threshold,
        });
    }

    fn holds(&mut self, name: &str, ok: bool) {
        self.0.push(Check {
            name: name.to_string(),
            passed: ok,
            measured: if ok { 0.0 } else { 1.0 },
            threshold: 0.0,
        });
    }
}

/// Runs the oracle checks for `job`. With `code_file`, the code under test is
/// read from a previous `code` report instead of being solved afresh.
pub fn run_verify(job: &JobSpec, limits: OracleLimits, code_file: Option<&Path>) -> CliResult<VerifyReport> {
    job.validate()?;
    let instance = load_instance(&job.input, job.allow_zero)?;
    let mu = &instance.distribution;
    let m = mu.len();
    if m > oracle::MAX_SYMBOLS {
        return Err(Error::LimitExceeded(format!(
            "{m} symbols; the oracle handles at most {}",
            oracle::MAX_SYMBOLS
        ))
        .into());
    }
    let lmax = limits.lmax.unwrap_or_else(|| default_lmax(m, job.arity));
    let ball = DivergenceBall::new(mu.clone(), job.radius)?;
    let mut checks = Checks(Vec::new());

    let fresh = run_code(job)?;
    let report = match code_file {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            let stored: CodeReport = serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            checks.holds("objective_matches", stored.objective == job.objective);
            checks.holds("arity_matches", stored.arity == job.arity.get());
            checks.holds("dimension_matches", stored.lengths.len() == m && stored.worst_case.len() == m);
            stored
        }
        None => fresh.clone(),
    };
    if report.lengths.len() != m || report.worst_case.len() != m {
        return finish_verify(job.objective, checks);
    }

    let lengths = match CodeLengths::integer(report.lengths.clone(), job.arity) {
        Ok(l) => l,
        Err(_) => {
            let k: f64 = report.lengths.iter().map(|&l| job.arity.as_f64().powi(-(l as i32))).sum();
            checks.at_most("kraft", k, 1.0);
            return finish_verify(job.objective, checks);
        }
    };
    checks.at_most("kraft", kraft_sum(&lengths), 1.0 + 1e-12);
    checks.holds(
        "prefix_free",
        PrefixCode::new(report.codewords.clone(), lengths.clone()).is_ok(),
    );
    let worst = match Distribution::new(report.worst_case.clone()) {
        Ok(w) => w,
        Err(_) => {
            checks.holds("worst_case_is_distribution", false);
            return finish_verify(job.objective, checks);
        }
    };
    let diag = diagnose(job, mu, &lengths, &worst, report.beta, report.achieved_utility)?;
    if code_file.is_some() {
        let same = serde_json::to_string(&diag).ok() == serde_json::to_string(&report.diagnostics).ok();
        checks.holds("diagnostics_roundtrip", same);
        checks.at_most(
            "matches_fresh_solve",
            (report.achieved_utility - fresh.achieved_utility).abs(),
            1e-9,
        );
    }
    checks.at_most("utility_recompute", diag.residuals["utility"], 1e-9);

    let achieved = report.achieved_utility;
    let samples = || ball_sample(&ball, job.arity, limits.samples, limits.samples / 2, job.seed);
    match job.objective {
        ObjectiveKind::AvgRed | ObjectiveKind::Gg | ObjectiveKind::ShannonNominal => {
            checks.at_most("worst_case_in_ball", diag.residuals["ball_excess"], 1e-10);
            if let Some(gap) = diag.residuals.get("surface") {
                checks.at_most("worst_case_on_surface", *gap, job.tol.max(1e-9));
            }
            let pts = samples()?;
            let utility = if job.objective == ObjectiveKind::Gg {
                oracle::Utility::Gg
            } else {
                oracle::Utility::AvgRedundancy
            };
            let sampled = brute_sup_over_ball(&lengths, &ball, utility, &pts)?;
            checks.at_most("sampled_sup_below_achieved", sampled - achieved, 1e-6);
            match job.objective {
                ObjectiveKind::ShannonNominal => {
                    let expect = shannon_lengths(mu, job.arity)?;
                    checks.holds("shannon_lengths", expect == lengths);
                    checks.at_most("nominal_redundancy_below_one", avg_redundancy(&lengths, mu)?, 1.0 - 1e-15);
                }
                _ => {
                    let objective = if job.objective == ObjectiveKind::Gg {
                        oracle::Objective::Gg { ball: &ball, samples: &pts }
                    } else {
                        oracle::Objective::AvgRedundancy { ball: &ball, samples: &pts }
                    };
                    let brute = brute_min_over_codes(objective, job.arity, lmax)?;
                    checks.at_most(
                        "nested_minimax",
                        (achieved - brute.optimum_value).abs(),
                        NESTED_MINIMAX_TOL,
                    );
                }
            }
        }
        ObjectiveKind::Pointwise | ObjectiveKind::NmlOnly | ObjectiveKind::NmlTv => {
            checks.at_most("nml_consistency", diag.residuals["nml_consistency"], 1e-12);
            let nml = reference_nml(job, mu)?;
            if let Some(root) = diag.residuals.get("nml_root") {
                checks.at_most("nml_root_residual", *root, 1e-10);
            }
            if job.objective != ObjectiveKind::NmlTv {
                let mut excess = 0.0f64;
                for k in 0..m {
                    let nu = nml_adversary(mu, k, nml.raw[k])?;
                    excess = excess.max(kl_divergence(&nu, mu)? - job.radius);
                }
                checks.at_most("adversaries_in_ball", excess, 1e-10);
                let mut over = f64::NEG_INFINITY;
                for nu in samples()? {
                    for (a, b) in nu.probs().iter().zip(&nml.raw) {
                        over = over.max(a - b);
                    }
                }
                checks.at_most("nml_dominates_samples", over, 1e-9);
            } else {
                let tv = job.tv.unwrap_or(0.0);
                let gap = mu
                    .probs()
                    .iter()
                    .zip(&nml.raw)
                    .map(|(m, p)| ((m + tv / 2.0).min(1.0) - p).abs())
                    .fold(0.0, f64::max);
                checks.at_most("tv_formula", gap, 0.0);
            }
            if job.objective == ObjectiveKind::Pointwise {
                let brute = brute_min_over_codes(
                    oracle::Objective::Pointwise(nml.normalized.probs()),
                    job.arity,
                    lmax,
                )?;
                checks.at_most(
                    "pointwise_optimal",
                    (achieved - brute.optimum_value).abs(),
                    1e-12 * brute.optimum_value.abs().max(1.0),
                );
            } else {
                checks.at_most("robust_shannon_below_one", achieved, 1.0 - 1e-15);
            }
        }
    }
    finish_verify(job.objective, checks)
}

fn finish_verify(objective: ObjectiveKind, checks: Checks) -> CliResult<VerifyReport> {
    let passed = checks.0.iter().all(|c| c.passed);
    Ok(VerifyReport { objective, passed, checks: checks.0 })
}

pub fn cmd_verify(job: &JobSpec, limits: OracleLimits, code_file: Option<&Path>) -> CliResult<String> {
    let report = run_verify(job, limits, code_file)?;
    let text = match job.format {
        OutputFormat::Json => to_json(&report)?,
        OutputFormat::Table => {
            let mut out = String::new();
            for c in &report.checks {
                out.push_str(&format!(
                    "{} {:<28} measured {:.3e}  threshold {:.3e}\n",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.measured,
                    c.threshold
                ));
            }
            out
        }
    };
    if report.passed {
        Ok(text)
    } else {
        Err(CliError::VerifyFailed {
            failed: report.checks.iter().filter(|c| !c.passed).count(),
            total: report.checks.len(),
            report: text,
        })
    }
}

/// Writes `contents` to `path` through a sibling temporary file and a rename.
pub fn write_atomically(path: &Path, contents: &str) -> CliResult<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::Output(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.{}.tmp", file_name.to_string_lossy(), std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::Output(format!("{}: {e}", path.display()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn reads_json_and_csv() {
        let dir = tempfile::tempdir().unwrap();
        let j = write(&dir, "a.json", r#"{"probs":[0.6,0.3,0.1],"labels":["a","b","c"]}"#);
        let c = write(&dir, "a.csv", "label,prob\na,0.6\nb,0.3\nc,0.1\n");
        let a = load_instance(&j, false).unwrap();
        let b = load_instance(&c, false).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.distribution.labels().unwrap(), &["a", "b", "c"]);
    }

    #[test]
    fn rejects_malformed_input() {
        let dir = tempfile::tempdir().unwrap();
        for (name, body) in [
            ("bad.json", r#"{"probs":[0.6,0.3]}"#),
            ("neg.json", r#"{"probs":[1.2,-0.2]}"#),
            ("junk.json", "{"),
            ("bad.csv", "a,0.5\nb,zero\n"),
            ("wide.csv", "a,0.5,1\nb,0.5,1\n"),
        ] {
            let p = write(&dir, name, body);
            let e = load_instance(&p, false).unwrap_err();
            assert_eq!(e.exit_code(), EXIT_INPUT, "{name}");
        }
        let missing = dir.path().join("nope.json");
        assert_eq!(load_instance(&missing, false).unwrap_err().exit_code(), EXIT_INPUT);
    }

    #[test]
    fn zeros_need_opt_in() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "z.json", r#"{"probs":[0.5,0.0,0.5],"labels":["a","b","c"]}"#);
        assert!(load_instance(&p, false).is_err());
        let i = load_instance(&p, true).unwrap();
        assert_eq!(i.dropped, vec![1]);
        assert_eq!(i.distribution.labels().unwrap(), &["a", "c"]);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(Error::BoundaryRegime { radius: 1.0, threshold: 0.5 }).exit_code(), 3);
        assert_eq!(CliError::from(Error::NoConvergence(3)).exit_code(), 4);
        assert_eq!(CliError::from(Error::NotNormalized { sum: 2.0 }).exit_code(), 2);
    }

    #[test]
    fn shannon_nominal_example() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "d.json", r#"{"probs":[0.5,0.25,0.25]}"#);
        let r = run_code(&JobSpec::new(&p, ObjectiveKind::ShannonNominal, 0.0)).unwrap();
        assert_eq!(r.lengths, vec![1, 2, 2]);
        assert_eq!(r.codewords, vec!["0", "10", "11"]);
        assert_eq!(r.regime, "zero_radius");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "out.json", "old");
        write_atomically(&p, "new").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "new");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
