//! Command-line front end: split a table across parties, score an existing
//! assignment, infer split parameters, or run the self-check suites.
//!
//! Results go to stdout as JSON; progress and errors go to stderr. Exit code
//! 1 means a validation failure, 2 an I/O or parse problem; the first stderr
//! line starting with "error: " carries the reason.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vpart::corr::{CorrelationKind, GlobalCorr, PcorOptions};
use vpart::dataset::PartyPartition;
use vpart::error::{Error, Result};
use vpart::eval::{
    estimate_alpha, estimate_beta, estimate_beta_by_shuffling, party_shapley, RidgeValue, Task,
};
use vpart::harness;
use vpart::io::{
    load_csv, load_libsvm, materialize_parties, LabelColumn, ManifestHead, SplitManifest,
    SplitMode, SplitParams,
};
use vpart::split::{
    equal_counts, split_by_correlation, split_by_importance, BrkgaConfig, DirichletSpec,
};
use vpart::GlobalDataset;

/// Environment variable supplying the default worker-thread cap.
const THREADS_ENV: &str = "VPART_THREADS";

#[derive(Parser)]
#[command(name = "vpart", version, about = "Feature partitioning across parties", max_term_width = 100)]
struct Cli {
    /// Worker thread cap; results are identical at any value
    /// [default: $VPART_THREADS, else all cores]
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assign feature columns to parties; write party files and a manifest
    Split(SplitArgs),
    /// Score an existing assignment: inter-party correlation and pair matrix
    Metrics(MetricsArgs),
    /// Infer split parameters (alpha, beta) from data and an assignment
    Estimate(EstimateArgs),
    /// Run the built-in self-check suites and report pass/fail
    Validate(ValidateArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Libsvm,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Mode {
    Importance,
    Correlation,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum CorrKind {
    Spearman,
    Pearson,
}

impl From<CorrKind> for CorrelationKind {
    fn from(k: CorrKind) -> Self {
        match k {
            CorrKind::Spearman => CorrelationKind::Spearman,
            CorrKind::Pearson => CorrelationKind::Pearson,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum TaskArg {
    Reg,
    Cls,
}

#[derive(Args)]
struct InputArgs {
    /// Input table path
    #[arg(long)]
    input: PathBuf,

    /// Input file format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// CSV label column: a header name, or digits for a 0-based index
    #[arg(long)]
    label_column: Option<String>,

    /// Whether the first CSV row is a header [default: detect]
    #[arg(long)]
    header: Option<bool>,
}

impl InputArgs {
    fn load(&self) -> Result<GlobalDataset> {
        match self.format {
            Format::Csv => {
                let label = self.label_column.as_deref().map(parse_label_column);
                load_csv(&self.input, label.as_ref(), self.header)
            }
            Format::Libsvm => {
                if self.label_column.is_some() {
                    log("note: --label-column is ignored for libsvm input");
                }
                load_libsvm(&self.input)
            }
        }
    }
}

fn parse_label_column(s: &str) -> LabelColumn {
    match s.parse::<usize>() {
        Ok(i) => LabelColumn::Index(i),
        Err(_) => LabelColumn::Name(s.to_string()),
    }
}

#[derive(Args)]
struct PcorArgs {
    /// Exact decomposition whenever min(party sizes) is at most this
    #[arg(long, default_value_t = PcorOptions::default().exact_dim_threshold)]
    exact_dim_threshold: usize,

    /// Singular values kept by the truncated decomposition
    #[arg(long, default_value_t = PcorOptions::default().truncate_rank)]
    truncate_rank: usize,
}

impl PcorArgs {
    fn options(&self, kind: CorrelationKind) -> PcorOptions {
        PcorOptions {
            kind,
            exact_dim_threshold: self.exact_dim_threshold,
            truncate_rank: self.truncate_rank,
        }
    }
}

#[derive(Args)]
struct BrkgaArgs {
    /// Genetic search population size
    #[arg(long, default_value_t = BrkgaConfig::default().population_size)]
    population: usize,

    /// Fraction of the population kept as elites
    #[arg(long, default_value_t = BrkgaConfig::default().elite_fraction)]
    elite_fraction: f64,

    /// Fraction replaced by fresh random genomes each generation
    #[arg(long, default_value_t = BrkgaConfig::default().mutant_fraction)]
    mutant_fraction: f64,

    /// Probability an offspring key comes from the elite parent
    #[arg(long, default_value_t = BrkgaConfig::default().elite_inherit_bias)]
    elite_bias: f64,

    /// Generation cap per search
    #[arg(long, default_value_t = BrkgaConfig::default().max_generations)]
    max_generations: usize,

    /// Stop after this many generations without improvement
    #[arg(long, default_value_t = BrkgaConfig::default().stall_generations)]
    stall_generations: usize,

    /// Stop the target search once |score - target| falls below this
    #[arg(long, default_value_t = BrkgaConfig::default().target_tolerance)]
    target_tolerance: f64,
}

impl BrkgaArgs {
    fn config(&self, seed: u64) -> BrkgaConfig {
        BrkgaConfig {
            population_size: self.population,
            elite_fraction: self.elite_fraction,
            mutant_fraction: self.mutant_fraction,
            elite_inherit_bias: self.elite_bias,
            max_generations: self.max_generations,
            stall_generations: self.stall_generations,
            target_tolerance: self.target_tolerance,
            seed,
        }
    }
}

#[derive(Args)]
struct SplitArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Output directory for party files and the manifest
    #[arg(long, default_value = "split_out")]
    out: PathBuf,

    /// How the assignment is chosen
    #[arg(long, value_enum)]
    mode: Mode,

    /// Number of parties
    #[arg(long)]
    parties: usize,

    /// RNG seed; recorded in the manifest
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Dirichlet concentration: one value, or one per party comma-separated
    #[arg(long, default_value = "1")]
    alpha: String,

    /// Allow parties to end up with zero features (importance mode)
    #[arg(long)]
    no_guard: bool,

    /// Correlation placement in [0, 1]: 0 = minimum achievable, 1 = maximum
    #[arg(long, default_value_t = 0.5)]
    beta: f64,

    /// Per-party column counts, comma-separated [default: as equal as possible]
    #[arg(long)]
    counts: Option<String>,

    /// Column correlation kind (correlation mode)
    #[arg(long, value_enum, default_value_t = CorrKind::Spearman)]
    corr_kind: CorrKind,

    #[command(flatten)]
    brkga: BrkgaArgs,

    #[command(flatten)]
    pcor: PcorArgs,
}

#[derive(Args)]
struct MetricsArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Manifest describing the assignment to score
    #[arg(long, conflicts_with = "assignment")]
    manifest: Option<PathBuf>,

    /// Explicit assignment: party of each column, comma-separated
    #[arg(long)]
    assignment: Option<String>,

    /// Number of parties [default: highest party in --assignment + 1]
    #[arg(long)]
    parties: Option<usize>,

    /// Column correlation kind [default: manifest's, else spearman]
    #[arg(long, value_enum)]
    corr_kind: Option<CorrKind>,

    #[command(flatten)]
    pcor: PcorArgs,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum EstimateWhat {
    Alpha,
    Beta,
    Both,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum BoundsMethod {
    /// Genetic search for the achievable extremes
    Search,
    /// Random shuffles only; cheaper, looser bracket
    Shuffle,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Manifest describing the assignment to analyze
    #[arg(long, conflicts_with = "assignment")]
    manifest: Option<PathBuf>,

    /// Explicit assignment: party of each column, comma-separated
    #[arg(long)]
    assignment: Option<String>,

    /// Number of parties [default: highest party in --assignment + 1]
    #[arg(long)]
    parties: Option<usize>,

    /// Which parameters to infer
    #[arg(long, value_enum, default_value_t = EstimateWhat::Both)]
    what: EstimateWhat,

    /// RNG seed for subset evaluation and permutation sampling
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Prediction task for the party-importance game (alpha)
    #[arg(long, value_enum, default_value_t = TaskArg::Reg)]
    task: TaskArg,

    /// Ridge penalty of the importance game's model
    #[arg(long, default_value_t = 1e-3)]
    lambda: f64,

    /// Sampled permutations when more than 10 parties rule out enumeration
    #[arg(long, default_value_t = 256)]
    permutations: usize,

    /// How the achievable correlation range is bracketed (beta)
    #[arg(long, value_enum, default_value_t = BoundsMethod::Search)]
    bounds: BoundsMethod,

    /// Random shuffles used when --bounds shuffle
    #[arg(long, default_value_t = 200)]
    shuffles: usize,

    /// Column correlation kind [default: manifest's, else spearman]
    #[arg(long, value_enum)]
    corr_kind: Option<CorrKind>,

    #[command(flatten)]
    brkga: BrkgaArgs,

    #[command(flatten)]
    pcor: PcorArgs,
}

#[derive(Args)]
struct ValidateArgs {
    /// Run a single suite [default: all]
    #[arg(long)]
    suite: Option<String>,
}

fn log(msg: impl AsRef<str>) {
    eprintln!("{}", msg.as_ref());
}

fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParam(format!("{what}: '{t}' is not a number")))
        })
        .collect()
}

fn parse_usize_list(s: &str, what: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidParam(format!("{what}: '{t}' is not a count")))
        })
        .collect()
}

fn parse_alphas(s: &str, parties: usize) -> Result<Vec<f64>> {
    let values = parse_f64_list(s, "--alpha")?;
    if values.len() == 1 {
        Ok(vec![values[0]; parties])
    } else if values.len() == parties {
        Ok(values)
    } else {
        Err(Error::InvalidParam(format!(
            "--alpha needs 1 or {parties} values, got {}",
            values.len()
        )))
    }
}

/// Assignment + corr kind from either a manifest or explicit flags.
fn resolve_partition(
    manifest: &Option<PathBuf>,
    assignment: &Option<String>,
    parties: Option<usize>,
    n_features: usize,
) -> Result<(PartyPartition, Option<CorrelationKind>)> {
    if let Some(path) = manifest {
        let m = SplitManifest::load(path)?;
        let part = m.partition()?;
        if part.n_features() != n_features {
            return Err(Error::InvalidParam(format!(
                "manifest assignment covers {} columns but the input has {n_features}",
                part.n_features()
            )));
        }
        return Ok((part, m.corr_kind));
    }
    let Some(spec) = assignment else {
        return Err(Error::InvalidParam(
            "either --manifest or --assignment is required".into(),
        ));
    };
    let ids = parse_usize_list(spec, "--assignment")?;
    if ids.len() != n_features {
        return Err(Error::InvalidParam(format!(
            "--assignment lists {} columns but the input has {n_features}",
            ids.len()
        )));
    }
    let k = parties.unwrap_or_else(|| ids.iter().max().map_or(0, |&m| m + 1));
    let part = PartyPartition::new(ids.iter().map(|&p| p as u32).collect(), k)?;
    Ok((part, None))
}

fn emit(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serialization"));
}

fn run_split(args: &SplitArgs) -> Result<i32> {
    let ds = args.input.load()?;
    log(format!(
        "loaded {} samples x {} features from {}",
        ds.n_samples(),
        ds.n_features(),
        args.input.input.display()
    ));
    let source_path = args.input.input.display().to_string();
    let (part, head) = match args.mode {
        Mode::Importance => {
            let alphas = parse_alphas(&args.alpha, args.parties)?;
            let spec = DirichletSpec {
                alphas: alphas.clone(),
                guard_nonempty: !args.no_guard,
                seed: args.seed,
            };
            let part = split_by_importance(ds.n_features(), &spec)?;
            let head = ManifestHead {
                seed: args.seed,
                mode: SplitMode::Importance,
                params: SplitParams::Importance {
                    alphas,
                    guard_nonempty: spec.guard_nonempty,
                },
                corr_kind: None,
                achieved: None,
                source_path,
            };
            (part, head)
        }
        Mode::Correlation => {
            let counts = match &args.counts {
                Some(s) => parse_usize_list(s, "--counts")?,
                None => equal_counts(ds.n_features(), args.parties)?,
            };
            if counts.len() != args.parties {
                return Err(Error::InvalidParam(format!(
                    "--counts lists {} parties but --parties is {}",
                    counts.len(),
                    args.parties
                )));
            }
            let kind: CorrelationKind = args.corr_kind.into();
            let cfg = args.brkga.config(args.seed);
            let opts = args.pcor.options(kind);
            let result = split_by_correlation(&ds, args.beta, &counts, &cfg, &opts)?;
            log(format!(
                "search: icor range [{:.6}, {:.6}], target {:.6}, achieved {:.6} after {} generations",
                result.icor_min,
                result.icor_max,
                result.icor_target,
                result.icor_achieved,
                result.generations_used
            ));
            let head = ManifestHead {
                seed: args.seed,
                mode: SplitMode::Correlation,
                params: SplitParams::Correlation {
                    beta: args.beta,
                    counts,
                    brkga: cfg,
                    pcor: opts,
                },
                corr_kind: Some(kind),
                achieved: Some(vpart::io::AchievedMetrics {
                    icor_achieved: result.icor_achieved,
                    icor_min: result.icor_min,
                    icor_max: result.icor_max,
                    target: result.icor_target,
                    optimizer_gap: result.gap,
                }),
                source_path,
            };
            (result.partition, head)
        }
    };
    let manifest = materialize_parties(&ds, &part, &args.out, head)?;
    log(format!("wrote party files and manifest to {}", args.out.display()));
    emit(&serde_json::to_value(&manifest).expect("manifest serialization"));
    Ok(0)
}

fn run_metrics(args: &MetricsArgs) -> Result<i32> {
    let ds = args.input.load()?;
    let (part, manifest_kind) =
        resolve_partition(&args.manifest, &args.assignment, args.parties, ds.n_features())?;
    let kind: CorrelationKind = match (args.corr_kind, manifest_kind) {
        (Some(k), _) => k.into(),
        (None, Some(k)) => k,
        (None, None) => CorrelationKind::default(),
    };
    let opts = args.pcor.options(kind);
    part.require_nonempty_parties()?;
    let gc = GlobalCorr::from_dataset(&ds, kind)?;
    let parties = part.all_party_columns();
    let icor = gc.icor_of_parties(&parties, &opts)?;
    let pcor = gc.pcor_matrix(&parties, &opts)?;
    let pcor_rows: Vec<Vec<f64>> = pcor.rows().into_iter().map(|r| r.to_vec()).collect();
    emit(&serde_json::json!({
        "n_samples": ds.n_samples(),
        "n_features": ds.n_features(),
        "parties": part.num_parties(),
        "party_sizes": part.party_sizes(),
        "corr_kind": kind.to_string(),
        "icor": icor,
        "pcor_matrix": pcor_rows,
    }));
    Ok(0)
}

fn run_estimate(args: &EstimateArgs) -> Result<i32> {
    let ds = args.input.load()?;
    let (part, manifest_kind) =
        resolve_partition(&args.manifest, &args.assignment, args.parties, ds.n_features())?;
    let kind: CorrelationKind = match (args.corr_kind, manifest_kind) {
        (Some(k), _) => k.into(),
        (None, Some(k)) => k,
        (None, None) => CorrelationKind::default(),
    };
    let opts = args.pcor.options(kind);

    let mut report = serde_json::Map::new();
    if matches!(args.what, EstimateWhat::Alpha | EstimateWhat::Both) {
        let task = match args.task {
            TaskArg::Reg => Task::Regression,
            TaskArg::Cls => Task::Classification,
        };
        let game = RidgeValue::with_lambda(&ds, &part, task, args.lambda, args.seed)?;
        let shapley = party_shapley(part.num_parties(), &game, args.permutations, args.seed)?;
        log(format!(
            "party importances from {} evaluations: {:?}",
            shapley.samples, shapley.per_party
        ));
        let alpha = estimate_alpha(&shapley)?;
        report.insert(
            "alpha".into(),
            serde_json::json!({
                "alpha_vec": alpha.alpha_vec,
                "symmetric_alpha": alpha.symmetric_alpha,
                "shapley": serde_json::to_value(&shapley).expect("report serialization"),
            }),
        );
    }
    if matches!(args.what, EstimateWhat::Beta | EstimateWhat::Both) {
        let beta = match args.bounds {
            BoundsMethod::Search => {
                estimate_beta(&ds, &part, &args.brkga.config(args.seed), &opts)?
            }
            BoundsMethod::Shuffle => {
                estimate_beta_by_shuffling(&ds, &part, args.shuffles, args.seed, &opts)?
            }
        };
        report.insert(
            "beta".into(),
            serde_json::to_value(&beta).expect("report serialization"),
        );
    }
    emit(&serde_json::Value::Object(report));
    Ok(0)
}

fn run_validate(args: &ValidateArgs) -> Result<i32> {
    let reports = match &args.suite {
        Some(name) => vec![harness::run_suite(name)?],
        None => harness::run_all_suites()?,
    };
    for suite in &reports {
        for check in &suite.checks {
            log(format!(
                "{}: {} [{}] {}",
                suite.suite,
                check.name,
                if check.passed { "pass" } else { "FAIL" },
                check.details
            ));
        }
    }
    emit(&serde_json::to_value(&reports).expect("report serialization"));
    let failed: usize = reports
        .iter()
        .flat_map(|s| &s.checks)
        .filter(|c| !c.passed)
        .count();
    if failed > 0 {
        log(format!("error: {failed} self-check(s) failed"));
        return Ok(1);
    }
    Ok(0)
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let from_env = std::env::var(THREADS_ENV)
        .ok()
        .map(|v| {
            v.parse::<usize>()
                .map_err(|_| Error::InvalidParam(format!("{THREADS_ENV}='{v}' is not a thread count")))
        })
        .transpose()?;
    if let Some(n) = flag.or(from_env) {
        if n == 0 {
            return Err(Error::InvalidParam("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParam(format!("thread pool setup failed: {e}")))?;
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let outcome = configure_threads(cli.threads).and_then(|()| match &cli.command {
        Command::Split(args) => run_split(args),
        Command::Metrics(args) => run_metrics(args),
        Command::Estimate(args) => run_estimate(args),
        Command::Validate(args) => run_validate(args),
    });
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            log(format!("error: {e}"));
            std::process::exit(if e.is_input_error() { 2 } else { 1 });
        }
    }
}
