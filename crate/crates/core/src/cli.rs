//! Command-line front end: presets and presentation files in, certified
//! reports out, as aligned tables or JSON.
//!
//! Exit codes are stable:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | invalid arguments |
//! | 3 | input file unreadable |
//! | 4 | malformed presentation or instance |
//! | 5 | input violates a hypothesis (invalid algebra, not simply connected, b₂ too small, too little data) |
//! | 6 | resource budget exceeded |
//! | 7 | infeasible exact-sequence instance |
//! | 8 | model failed certification |

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::dga::{DgaError, FiniteDga, FiniteDgaDocument};
use crate::dichotomy::{CatBound, DichotomyError, DichotomyVerdict, GrowthReport, classify};
use crate::les::{
    BlowupReport, BoundReport, GottliebBudget, LesError, LesInstance, LesSolution, ScenarioError,
    blowup_scenario, isotropy_lower_bounds, solve_les,
};
use crate::minimal_model::{
    BuildConfig, BuildError, CertificationReport, DEFAULT_MAX_BASIS_SIZE, MinimalModel,
    ModelExport, RankSequence, build_minimal_model, verify_model,
};
use crate::spaces::{
    BettiData, IntersectionForm, SpaceError, four_manifold, product, projective, sphere,
};

/// Smallest accepted `--cap`.
pub const MIN_CAP: u128 = 64;
pub const DEFAULT_MAX_DEGREE: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Usage = 2,
    Unreadable = 3,
    Malformed = 4,
    Hypothesis = 5,
    Budget = 6,
    Infeasible = 7,
    Certification = 8,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ratmodel",
    version,
    about = "Minimal models, rational homotopy ranks and exact-sequence bounds",
    long_about = "Minimal models, rational homotopy ranks and exact-sequence bounds.\n\n\
        Inputs are cohomology algebras with zero differential, which determine the rational \
        homotopy type of formal spaces such as simply connected closed 4-manifolds. Algebras \
        with a nonzero differential are accepted as well.\n\n\
        Exit codes: 0 ok, 2 invalid arguments, 3 unreadable input, 4 malformed input, \
        5 hypothesis violated, 6 budget exceeded, 7 infeasible instance, 8 certification failed."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Build and certify the minimal model; print its generators.
    Model(SpaceArgs),
    /// Ranks of the dual rational homotopy groups.
    Ranks(SpaceArgs),
    /// Elliptic/hyperbolic verdict with witness and growth statistics.
    Classify(SpaceArgs),
    /// Solve an exact-sequence rank instance given as JSON.
    Les(LesArgs),
    /// Lower bounds for the isotropy group of a transitive action.
    Isotropy(SpaceArgs),
    /// Rank-level blow-up scenario for a 4-manifold with b₂ > 2.
    Blowup(SpaceArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SpaceArgs {
    /// Built-in space: S<n>, CP<n>, S2xS2, <k>CP2, diag(a,b,...), a matrix
    /// such as "[[0,1],[1,0]]", or a product A*B of presets.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    pub preset: Option<String>,
    /// JSON algebra presentation: basis, products, optional differential.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_DEGREE)]
    pub max_degree: u32,
    /// Category bound (defaults: 2 for 4-manifolds, else half the dimension).
    /// For `isotropy`, 0 means no evaluation image at all.
    #[arg(long)]
    pub cat: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Largest monomial basis allowed in any degree.
    #[arg(long, default_value_t = DEFAULT_MAX_BASIS_SIZE)]
    pub cap: u128,
}

#[derive(Debug, Clone, Args)]
pub struct LesArgs {
    /// JSON instance with rows "B", "E", "F" (numbers or null), optional
    /// "zero_maps", "rank_caps", "closed_below", "closed_above".
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputSource {
    Preset(String),
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Model,
    Ranks,
    Classify,
    Les,
    Isotropy,
    Blowup,
}

/// Validated settings for one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub source: InputSource,
    pub max_degree: u32,
    pub cat: Option<usize>,
    pub format: Format,
    pub cap: u128,
}

impl RunConfig {
    pub fn new(command: CommandKind, source: InputSource) -> Self {
        Self {
            command,
            source,
            max_degree: DEFAULT_MAX_DEGREE,
            cat: None,
            format: Format::Table,
            cap: DEFAULT_MAX_BASIS_SIZE,
        }
    }

    pub fn preset(command: CommandKind, name: &str, max_degree: u32) -> Self {
        Self {
            max_degree,
            ..Self::new(command, InputSource::Preset(name.to_string()))
        }
    }

    pub fn from_cli(cli: Cli) -> Self {
        let (command, args) = match cli.command {
            Command::Les(a) => {
                return Self {
                    format: a.format,
                    ..Self::new(CommandKind::Les, InputSource::File(a.input))
                };
            }
            Command::Model(a) => (CommandKind::Model, a),
            Command::Ranks(a) => (CommandKind::Ranks, a),
            Command::Classify(a) => (CommandKind::Classify, a),
            Command::Isotropy(a) => (CommandKind::Isotropy, a),
            Command::Blowup(a) => (CommandKind::Blowup, a),
        };
        let source = match (args.preset, args.input) {
            (Some(p), _) => InputSource::Preset(p),
            (None, Some(f)) => InputSource::File(f),
            (None, None) => unreachable!("clap requires one of --preset/--input"),
        };
        Self {
            command,
            source,
            max_degree: args.max_degree,
            cat: args.cat,
            format: args.format,
            cap: args.cap,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.command != CommandKind::Les {
            if self.max_degree < 2 {
                return Err(CliError::Usage(format!(
                    "--max-degree must be at least 2, got {}",
                    self.max_degree
                )));
            }
            if self.cap < MIN_CAP {
                return Err(CliError::Usage(format!(
                    "--cap must be at least {MIN_CAP}, got {}",
                    self.cap
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {message}")]
    Unreadable { path: String, message: String },
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("{0}")]
    Hypothesis(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("model failed certification: {0}")]
    Certification(String),
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        match self {
            Self::Usage(_) => ExitStatus::Usage,
            Self::Unreadable { .. } => ExitStatus::Unreadable,
            Self::Malformed(_) => ExitStatus::Malformed,
            Self::Hypothesis(_) => ExitStatus::Hypothesis,
            Self::Budget(_) => ExitStatus::Budget,
            Self::Infeasible(_) => ExitStatus::Infeasible,
            Self::Certification(_) => ExitStatus::Certification,
        }
    }
}

impl From<DgaError> for CliError {
    fn from(e: DgaError) -> Self {
        match e {
            DgaError::Invalid(_) | DgaError::NotSimplyConnected(_) => {
                Self::Hypothesis(e.to_string())
            }
            _ => Self::Malformed(e.to_string()),
        }
    }
}

impl From<SpaceError> for CliError {
    fn from(e: SpaceError) -> Self {
        match e {
            SpaceError::Dga(inner) => inner.into(),
            SpaceError::Parse(_) => Self::Malformed(e.to_string()),
            _ => Self::Hypothesis(e.to_string()),
        }
    }
}

impl From<BuildError> for CliError {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::Target(inner) => inner.into(),
            BuildError::BudgetExceeded { .. } => Self::Budget(e.to_string()),
            BuildError::TruncationTooSmall(_) => Self::Usage(e.to_string()),
            BuildError::MissingPrimitive { .. } => Self::Hypothesis(e.to_string()),
        }
    }
}

impl From<DichotomyError> for CliError {
    fn from(e: DichotomyError) -> Self {
        match e {
            DichotomyError::ZeroCat => Self::Usage(e.to_string()),
            _ => Self::Hypothesis(e.to_string()),
        }
    }
}

impl From<LesError> for CliError {
    fn from(e: LesError) -> Self {
        match e {
            LesError::Malformed(_) => Self::Malformed(e.to_string()),
            LesError::Infeasible(_) | LesError::Uncertified(_) => Self::Infeasible(e.to_string()),
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        Self::Hypothesis(e.to_string())
    }
}

/// Exit status plus the text for stdout (report) and stderr (diagnostics).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub status: ExitStatus,
    pub stdout: String,
    pub stderr: String,
}

/// Runs one command; deterministic for identical inputs.
pub fn run(config: &RunConfig) -> RunOutcome {
    match execute(config) {
        Ok(stdout) => RunOutcome {
            status: ExitStatus::Success,
            stdout,
            stderr: String::new(),
        },
        Err(e) => RunOutcome {
            status: e.status(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

/// Resolves a preset name to its cohomology algebra.
pub fn preset_algebra(name: &str) -> Result<FiniteDga, CliError> {
    let name = name.trim();
    if let Some((a, b)) = name.split_once('*') {
        return Ok(product(&preset_algebra(a)?, &preset_algebra(b)?)?);
    }
    if let Some(n) = name.strip_prefix('S').and_then(|r| r.parse::<u32>().ok()) {
        return Ok(sphere(n)?);
    }
    if let Some(n) = name.strip_prefix("CP").and_then(|r| r.parse::<u32>().ok())
        && n != 2
    {
        return Ok(projective(n)?);
    }
    let form = IntersectionForm::parse(name)
        .map_err(|_| CliError::Usage(format!("unknown preset `{name}`")))?;
    Ok(four_manifold(&form)?)
}

fn load_algebra(source: &InputSource) -> Result<FiniteDga, CliError> {
    match source {
        InputSource::Preset(name) => preset_algebra(name),
        InputSource::File(path) => {
            let text = read(path)?;
            let doc: FiniteDgaDocument =
                serde_json::from_str(&text).map_err(|e| CliError::Malformed(e.to_string()))?;
            Ok(FiniteDga::from_document(&doc)?)
        }
    }
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Unreadable {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn source_label(source: &InputSource) -> String {
    match source {
        InputSource::Preset(p) => p.clone(),
        InputSource::File(f) => f.display().to_string(),
    }
}

/// A model that passed [`verify_model`], with its certification summary.
struct Certified {
    target: FiniteDga,
    model: MinimalModel,
    certification: CertificationReport,
}

fn certified_model(config: &RunConfig) -> Result<Certified, CliError> {
    let target = load_algebra(&config.source)?;
    let model = build_minimal_model(
        &target,
        BuildConfig {
            truncation: config.max_degree,
            max_basis_size: config.cap,
        },
    )?;
    let certification = verify_model(&model, &target, config.max_degree)?;
    if let Some(failure) = &certification.failure {
        return Err(CliError::Certification(failure.to_string()));
    }
    Ok(Certified {
        target,
        model,
        certification,
    })
}

#[derive(Debug, Serialize)]
struct CertificationSummary {
    passed: bool,
    d_squared: bool,
    minimal: bool,
    chain_map: bool,
    isomorphism_through: u32,
}

impl CertificationSummary {
    fn of(report: &CertificationReport) -> Self {
        Self {
            passed: report.passed(),
            d_squared: report.d_squared,
            minimal: report.minimal,
            chain_map: report.chain_map,
            isomorphism_through: report.truncation,
        }
    }

    fn line(&self) -> String {
        format!(
            "certification: {} (d² = 0, minimal, chain map, H^k iso for k ≤ {})",
            if self.passed { "passed" } else { "FAILED" },
            self.isomorphism_through
        )
    }
}

#[derive(Debug, Serialize)]
struct ModelOutput {
    input: String,
    certification: CertificationSummary,
    model: ModelExport,
}

#[derive(Debug, Serialize)]
struct RanksOutput {
    input: String,
    certification: CertificationSummary,
    truncation: u32,
    formal_dimension: u32,
    ranks: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct ClassifyOutput {
    input: String,
    certification: CertificationSummary,
    ranks: Vec<usize>,
    betti: Vec<usize>,
    verdict: DichotomyVerdict,
}

#[derive(Debug, Serialize)]
struct IsotropyOutput {
    input: String,
    certification: CertificationSummary,
    ranks: Vec<usize>,
    report: BoundReport,
}

#[derive(Debug, Serialize)]
struct BlowupOutput {
    input: String,
    certification: CertificationSummary,
    ranks: Vec<usize>,
    report: BlowupReport,
}

fn execute(config: &RunConfig) -> Result<String, CliError> {
    config.validate()?;
    let json = config.format == Format::Json;
    if config.command == CommandKind::Les {
        let InputSource::File(path) = &config.source else {
            return Err(CliError::Usage("les needs --input".into()));
        };
        let instance = LesInstance::from_json(&read(path)?)?;
        let solution = solve_les(&instance)?;
        return Ok(if json {
            to_json(&solution)
        } else {
            les_table(&solution)
        });
    }
    let input = source_label(&config.source);
    let Certified {
        target,
        model,
        certification,
    } = certified_model(config)?;
    let summary = CertificationSummary::of(&certification);
    let ranks = model.pi_ranks();
    match config.command {
        CommandKind::Model => {
            let out = ModelOutput {
                input,
                certification: summary,
                model: model.export(),
            };
            Ok(if json {
                to_json(&out)
            } else {
                model_table(&out)
            })
        }
        CommandKind::Ranks => {
            let out = RanksOutput {
                input,
                certification: summary,
                truncation: ranks.truncation(),
                formal_dimension: ranks.formal_dimension(),
                ranks: ranks.ranks().to_vec(),
            };
            Ok(if json {
                to_json(&out)
            } else {
                ranks_table(&out)
            })
        }
        CommandKind::Classify => {
            let betti = BettiData::of(&target)?;
            let cat = CatBound::resolve(config.cat, ranks.formal_dimension())?;
            let verdict = classify(&ranks, &betti, cat)?;
            let out = ClassifyOutput {
                input,
                certification: summary,
                ranks: ranks.ranks().to_vec(),
                betti: betti.numbers().to_vec(),
                verdict,
            };
            Ok(if json {
                to_json(&out)
            } else {
                classify_table(&out)
            })
        }
        CommandKind::Isotropy => {
            let budget = match config.cat {
                Some(0) => GottliebBudget::zero(),
                other => {
                    GottliebBudget::from_cat(CatBound::resolve(other, ranks.formal_dimension())?)
                }
            };
            let out = IsotropyOutput {
                input,
                certification: summary,
                ranks: ranks.ranks().to_vec(),
                report: isotropy_lower_bounds(&ranks, budget),
            };
            Ok(if json {
                to_json(&out)
            } else {
                isotropy_table(&out)
            })
        }
        CommandKind::Blowup => {
            let cat = CatBound::resolve(config.cat, ranks.formal_dimension())?;
            let report = blowup_scenario(&ranks, cat)?;
            let out = BlowupOutput {
                input,
                certification: summary,
                ranks: ranks.ranks().to_vec(),
                report,
            };
            Ok(if json {
                to_json(&out)
            } else {
                blowup_table(&out)
            })
        }
        CommandKind::Les => unreachable!("handled above"),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn model_table(out: &ModelOutput) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "minimal model of {} through degree {}",
        out.input, out.model.truncation
    );
    let _ = writeln!(s, "{}", out.certification.line());
    let _ = writeln!(
        s,
        "{:<10} {:>6}  {:<8}  {:<30}  φ",
        "generator", "degree", "kind", "d"
    );
    for g in &out.model.generators {
        let kind = match g.kind {
            crate::minimal_model::GeneratorKind::Cokernel => "cokernel",
            crate::minimal_model::GeneratorKind::Kernel => "kernel",
        };
        let d = if g.differential.is_empty() {
            "0"
        } else {
            &g.differential
        };
        let phi = if g.phi.is_empty() { "0" } else { &g.phi };
        let _ = writeln!(
            s,
            "{:<10} {:>6}  {:<8}  {:<30}  {}",
            g.name, g.degree, kind, d, phi
        );
    }
    s
}

fn rank_rows(s: &mut String, ranks: &[usize]) {
    let _ = writeln!(s, "{:>6}  {:>8}", "degree", "rank");
    for (k, r) in ranks.iter().enumerate().skip(2) {
        let _ = writeln!(s, "{k:>6}  {r:>8}");
    }
}

fn ranks_table(out: &RanksOutput) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "rational homotopy ranks of {} through degree {} (formal dimension {})",
        out.input, out.truncation, out.formal_dimension
    );
    let _ = writeln!(s, "{}", out.certification.line());
    rank_rows(&mut s, &out.ranks);
    let _ = writeln!(s, "total {}", out.ranks.iter().sum::<usize>());
    s
}

fn growth_rows(s: &mut String, g: &GrowthReport) {
    let _ = writeln!(s, "growth: {:?}", g.flag);
    let _ = writeln!(
        s,
        "{:>6}  {:>10}  {:>14}",
        "degree", "cumulative", "s_k/s_(k-2)"
    );
    for (k, c) in g.cumulative.iter().enumerate().skip(2) {
        let ratio = g
            .ratios
            .iter()
            .find(|r| r.degree as usize == k)
            .and_then(|r| r.value)
            .map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        let _ = writeln!(s, "{k:>6}  {c:>10}  {ratio:>14}");
    }
}

fn classify_table(out: &ClassifyOutput) -> String {
    let v = &out.verdict;
    let mut s = String::new();
    let _ = writeln!(s, "classification of {}", out.input);
    let _ = writeln!(s, "{}", out.certification.line());
    let _ = writeln!(s, "verdict: {:?}", v.verdict);
    let _ = writeln!(s, "witness: {}", v.witness);
    let _ = writeln!(s, "cat: {} ({:?})", v.cat.value, v.cat.source);
    let _ = writeln!(s, "euler characteristic: {}", v.euler);
    let _ = writeln!(
        s,
        "dim π_even: {}, dim π_odd: {}",
        v.even_total, v.odd_total
    );
    if v.heuristic {
        let _ = writeln!(
            s,
            "note: elliptic verdicts rest on the stabilization heuristic"
        );
    }
    rank_rows(&mut s, &out.ranks);
    if let Some(g) = &v.growth {
        growth_rows(&mut s, g);
    }
    s
}

fn isotropy_table(out: &IsotropyOutput) -> String {
    let r = &out.report;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "isotropy lower bounds for a transitive action on {}",
        out.input
    );
    let _ = writeln!(s, "{}", out.certification.line());
    let _ = writeln!(
        s,
        "budget: {}, total shaving: {}, k0: {}, solver-certified: {}",
        r.budget.total, r.total_shaving, r.k0, r.certified
    );
    let _ = writeln!(
        s,
        "{:>6}  {:>10}  {:>9}  {:>6}  {:>8}  {:>10}",
        "k", "Π^(k+1)", "allowance", "bound", "uniform", "unshifted"
    );
    for b in &r.bounds {
        let _ = writeln!(
            s,
            "{:>6}  {:>10}  {:>9}  {:>6}  {:>8}  {:>10}",
            b.degree, b.next_rank, b.allowance, b.bound, b.uniform_bound, b.unshifted
        );
    }
    s
}

fn blowup_table(out: &BlowupOutput) -> String {
    let r = &out.report;
    let mut s = String::new();
    let _ = writeln!(s, "blow-up scenario for {} (b₂ = {})", out.input, r.b2);
    let _ = writeln!(s, "{}", out.certification.line());
    let sg: Vec<String> = r.structure_group.iter().map(usize::to_string).collect();
    let _ = writeln!(
        s,
        "structure group ranks (degrees 1..{}): {}",
        r.truncation,
        sg.join(" ")
    );
    let _ = writeln!(
        s,
        "k0: {}, positive bounds beyond k0: {}",
        r.isotropy.k0, r.positive_beyond_k0
    );
    let _ = writeln!(
        s,
        "{:>6}  {:>10}  {:>20}  {:>9}  {:>10}",
        "k", "Π^(k+1)", "surjectivity", "bound", "cumulative"
    );
    for (i, b) in r.bounds.iter().enumerate() {
        let flag = r
            .surjectivity
            .iter()
            .find(|(d, _)| *d == b.degree + 1)
            .map(|(_, f)| format!("{f:?}"))
            .unwrap_or_default();
        let bound = b
            .bound
            .map_or_else(|| "excluded".to_string(), |v| v.to_string());
        let _ = writeln!(
            s,
            "{:>6}  {:>10}  {:>20}  {:>9}  {:>10}",
            b.degree,
            out.ranks.get(b.degree as usize + 1).copied().unwrap_or(0),
            flag,
            bound,
            r.cumulative[i]
        );
    }
    s
}

fn les_table(solution: &LesSolution) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<8}  {:<6}  {:<12}  certified",
        "entry", "known", "interval"
    );
    for n in &solution.nodes {
        let _ = writeln!(
            s,
            "{:<8}  {:<6}  {:<12}  {}",
            n.label,
            n.known,
            n.interval.to_string(),
            if n.tight { "tight" } else { "sound" }
        );
    }
    if solution.has_unbounded {
        let _ = writeln!(s, "note: some entries are unbounded above");
    }
    s
}

/// Ranks of a certified model, for callers that want the raw sequence.
pub fn certified_ranks(config: &RunConfig) -> Result<RankSequence, CliError> {
    Ok(certified_model(config)?.model.pi_ranks())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn preset(command: CommandKind, name: &str, n: u32, format: Format) -> RunOutcome {
        run(&RunConfig {
            format,
            ..RunConfig::preset(command, name, n)
        })
    }

    #[test]
    fn sphere_ranks_table() {
        let out = preset(CommandKind::Ranks, "S2", 10, Format::Table);
        assert_eq!(out.status, ExitStatus::Success);
        let rows: Vec<(usize, usize)> = out
            .stdout
            .lines()
            .filter_map(|l| {
                let mut it = l.split_whitespace().map(str::parse::<usize>);
                match (it.next(), it.next()) {
                    (Some(Ok(k)), Some(Ok(r))) if r > 0 => Some((k, r)),
                    _ => None,
                }
            })
            .collect();
        assert_eq!(rows, vec![(2, 1), (3, 1)]);
        assert!(out.stdout.contains("certification: passed"));
    }

    #[test]
    fn three_cp2_is_hyperbolic() {
        let out = preset(CommandKind::Classify, "3CP2", 10, Format::Table);
        assert_eq!(out.status, ExitStatus::Success);
        assert!(out.stdout.contains("verdict: Hyperbolic"));
        assert!(out.stdout.contains("dim π_even = 3 > cat = 2"));
    }

    #[test]
    fn blowup_rejects_small_b2() {
        let out = preset(
            CommandKind::Blowup,
            "S2xS2",
            DEFAULT_MAX_DEGREE,
            Format::Table,
        );
        assert_eq!(out.status, ExitStatus::Hypothesis);
        assert!(out.stderr.contains("b₂ > 2"));
        assert!(out.stdout.is_empty());
    }

    #[test]
    fn table_and_json_agree() {
        let table = preset(CommandKind::Ranks, "CP3", 9, Format::Table).stdout;
        let json: serde_json::Value =
            serde_json::from_str(&preset(CommandKind::Ranks, "CP3", 9, Format::Json).stdout)
                .unwrap();
        let from_json: Vec<u64> = json["ranks"].as_array().unwrap()[2..]
            .iter()
            .map(|v| v.as_u64().unwrap())
            .collect();
        let from_table: Vec<u64> = table
            .lines()
            .filter_map(|l| {
                let mut it = l.split_whitespace();
                it.next()?.parse::<u32>().ok()?;
                it.next()?.parse().ok()
            })
            .collect();
        assert_eq!(from_table, from_json);
    }

    #[test]
    fn exit_codes_are_distinct() {
        let bad_degree = preset(CommandKind::Ranks, "S2", 1, Format::Table);
        assert_eq!(bad_degree.status.code(), 2);
        let unknown = preset(CommandKind::Ranks, "K3?", 4, Format::Table);
        assert_eq!(unknown.status.code(), 2);
        let missing = run(&RunConfig::new(
            CommandKind::Ranks,
            InputSource::File("/nonexistent/algebra.json".into()),
        ));
        assert_eq!(missing.status.code(), 3);
        let budget = run(&RunConfig {
            cap: MIN_CAP,
            ..RunConfig::preset(CommandKind::Ranks, "3CP2", 10)
        });
        assert_eq!(budget.status.code(), 6);

        let dir = std::env::temp_dir().join(format!("ratmodel-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let malformed = dir.join("malformed.json");
        std::fs::write(&malformed, "{ not json").unwrap();
        let out = run(&RunConfig::new(
            CommandKind::Ranks,
            InputSource::File(malformed),
        ));
        assert_eq!(out.status.code(), 4);
        let infeasible = dir.join("infeasible.json");
        std::fs::write(&infeasible, r#"{"B":[5,8],"E":[0,0],"F":[null,null]}"#).unwrap();
        let out = run(&RunConfig::new(
            CommandKind::Les,
            InputSource::File(infeasible),
        ));
        assert_eq!(out.status.code(), 7);
        std::fs::remove_dir_all(dir).unwrap();
    }
}
