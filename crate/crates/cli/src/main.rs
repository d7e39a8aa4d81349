//! Batch front end: generate or ingest datasets, run the selection
//! pipeline, the component-discriminant baseline, and the scheme sweep.
//! Progress goes to stderr; machine-readable outputs go to files.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use adabag::ingest::{ingest_corpus, ingest_prebuilt, IngestConfig};
use adabag::io::{read_dataset, write_dataset};
use adabag::pca_lda::{run_baseline, write_baseline_report, BaselineConfig, PcOrdering};
use adabag::pipeline::{run_pipeline, write_outputs, PipelineConfig};
use adabag::simgen::{generate, PolarityVariant, SimConfig};
use adabag::weights::Scheme;
use adabag::{Error, Result};

#[derive(Parser)]
#[command(name = "adabag", version, about = "Grouped sparse feature selection and classification")]
struct Cli {
    /// Worker threads for the parallel stages (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic benchmark dataset.
    Simulate(SimulateArgs),
    /// Build a dataset directory from a review corpus.
    Ingest(IngestArgs),
    /// Run the full selection and classification pipeline.
    Run(RunArgs),
    /// Principal-component discriminant baseline.
    PcaLda(PcaLdaArgs),
    /// Run every sharing scheme and tabulate the results.
    SweepSchemes(SweepArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Output dataset directory.
    #[arg(long, default_value = "./dataset")]
    out: PathBuf,
    /// Master seed; falls back to ADABAG_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Polarity variant: equal or structured.
    #[arg(long, default_value = "structured")]
    variant: String,
    /// Rows drawn before the response band removal.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Noise variance of the response.
    #[arg(long, default_value_t = 0.3)]
    noise_var: f64,
}

#[derive(Args)]
struct IngestArgs {
    /// Corpus directory (metadata.tsv plus review files, or prebuilt
    /// vocab.txt plus reviews.feat).
    #[arg(long)]
    corpus: PathBuf,
    /// Read prebuilt feature files instead of tokenizing.
    #[arg(long)]
    prebuilt: bool,
    /// Output dataset directory.
    #[arg(long, default_value = "./dataset")]
    out: PathBuf,
    /// Keep tokens appearing in at least this many reviews.
    #[arg(long, default_value_t = 5)]
    min_reviews: usize,
    /// Drop tokens shorter than this many characters.
    #[arg(long, default_value_t = 2)]
    min_token_len: usize,
    /// Genre priority order, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "drama,comedy,horror")]
    genres: Vec<String>,
    /// Token polarity scores (token<TAB>score lines).
    #[arg(long)]
    polarity_file: Option<PathBuf>,
    /// Low-class threshold (class 0 when rating <= a).
    #[arg(long, default_value_t = 4.0)]
    a: f64,
    /// High-class threshold (class 1 when rating >= b).
    #[arg(long, default_value_t = 7.0)]
    b: f64,
}

#[derive(Args)]
struct RunArgs {
    /// Input dataset directory.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML or JSON configuration, e.g. a previous run_manifest.json;
    /// explicit flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sharing scheme: ws1..ws6 or custom.
    #[arg(long)]
    scheme: Option<String>,
    /// Group weights for the custom scheme, comma separated.
    #[arg(long, value_delimiter = ',')]
    custom_r: Option<Vec<f64>>,
    /// Master seed; falls back to the config file, ADABAG_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Bootstrap replicates.
    #[arg(long)]
    b_replicates: Option<usize>,
    /// Penalty grid length.
    #[arg(long)]
    grid_k: Option<usize>,
    /// Ratio of the smallest to the largest grid penalty.
    #[arg(long)]
    grid_eps: Option<f64>,
    /// Divide design columns by their sample standard deviation.
    #[arg(long)]
    standardize: bool,
    /// Polarity values below this magnitude are clamped to it.
    #[arg(long)]
    polarity_tol: Option<f64>,
    /// Sweep budget per penalty value.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Fallback low threshold when the dataset has no thresholds.tsv.
    #[arg(long)]
    a: Option<f64>,
    /// Fallback high threshold when the dataset has no thresholds.tsv.
    #[arg(long)]
    b: Option<f64>,
}

#[derive(Args)]
struct PcaLdaArgs {
    #[arg(long, default_value = "./dataset")]
    dataset: PathBuf,
    #[arg(long, default_value = "./out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Variance-explained stopping fraction.
    #[arg(long, default_value_t = 0.30)]
    var_explained: f64,
    /// Component orderings to evaluate: variance, entropy, entropy-desc.
    #[arg(long, value_delimiter = ',', default_value = "variance,entropy")]
    ordering: Vec<String>,
    /// Component budget for the iterative decomposition path.
    #[arg(long, default_value_t = 300)]
    component_budget: usize,
    #[arg(long, default_value_t = 4.0)]
    a: f64,
    #[arg(long, default_value_t = 7.0)]
    b: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "./dataset")]
    dataset: PathBuf,
    #[arg(long, default_value = "./out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 100)]
    b_replicates: usize,
    #[arg(long, default_value_t = 100)]
    grid_k: usize,
    #[arg(long, default_value_t = 1e-3)]
    grid_eps: f64,
    #[arg(long)]
    standardize: bool,
    #[arg(long, default_value_t = 1e-5)]
    polarity_tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 4.0)]
    a: f64,
    #[arg(long, default_value_t = 7.0)]
    b: f64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Ingest(args) => cmd_ingest(args),
        Command::Run(args) => cmd_run(args),
        Command::PcaLda(args) => cmd_pca_lda(args),
        Command::SweepSchemes(args) => cmd_sweep(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::Parse { .. } => 2,
                Error::Io(_) => 3,
                _ => 1,
            })
        }
    }
}

/// Seed precedence: explicit flag, then file config, then ADABAG_SEED,
/// then 0.
fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(s) = file {
        return Ok(s);
    }
    match std::env::var("ADABAG_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| {
            Error::config(format!("ADABAG_SEED '{v}' is not an unsigned integer"))
        }),
        Err(_) => Ok(0),
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

#[derive(Serialize)]
struct SimManifest<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    out: &'a Path,
    seed: u64,
    variant: &'a str,
    n: usize,
    noise_var: f64,
    rows_kept: usize,
    a: f64,
    b: f64,
    true_support: &'a [usize],
    wall_ms: u128,
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let started = Instant::now();
    let seed = resolve_seed(args.seed, None)?;
    let variant: PolarityVariant = args.variant.parse()?;
    let mut config = SimConfig::new(seed, variant);
    config.n = args.n;
    config.noise_var = args.noise_var;
    let (ds, true_support) = generate(&config)?;
    write_dataset(&args.out, &ds)?;
    write_json(
        &args.out.join("sim_manifest.json"),
        &SimManifest {
            tool: "adabag",
            version: env!("CARGO_PKG_VERSION"),
            command: "simulate",
            out: &args.out,
            seed,
            variant: &args.variant,
            n: args.n,
            noise_var: args.noise_var,
            rows_kept: ds.n_rows(),
            a: ds.a,
            b: ds.b,
            true_support: &true_support,
            wall_ms: started.elapsed().as_millis(),
        },
    )?;
    log::info!(
        "simulated {} rows x {} features into {} (seed {seed})",
        ds.n_rows(),
        ds.n_cols(),
        args.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct IngestManifest<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    corpus: &'a Path,
    prebuilt: bool,
    out: &'a Path,
    min_reviews: usize,
    min_token_len: usize,
    genres: &'a [String],
    polarity_file: Option<&'a Path>,
    a: f64,
    b: f64,
    reviews_seen: usize,
    reviews_kept: usize,
    dropped_middle: usize,
    multi_genre: usize,
    empty_rows: usize,
    vocab_size: usize,
    missing_polarity: usize,
    wall_ms: u128,
}

fn cmd_ingest(args: IngestArgs) -> Result<()> {
    let started = Instant::now();
    let config = IngestConfig {
        genres: args.genres.clone(),
        min_reviews: args.min_reviews,
        min_token_len: args.min_token_len,
        a: args.a,
        b: args.b,
    };
    let polarity = args.polarity_file.as_deref();
    let (ds, stats) = if args.prebuilt {
        ingest_prebuilt(&args.corpus, &config, polarity)?
    } else {
        ingest_corpus(&args.corpus, &config, polarity)?
    };
    write_dataset(&args.out, &ds)?;
    write_json(
        &args.out.join("ingest_manifest.json"),
        &IngestManifest {
            tool: "adabag",
            version: env!("CARGO_PKG_VERSION"),
            command: "ingest",
            corpus: &args.corpus,
            prebuilt: args.prebuilt,
            out: &args.out,
            min_reviews: args.min_reviews,
            min_token_len: args.min_token_len,
            genres: &args.genres,
            polarity_file: polarity,
            a: args.a,
            b: args.b,
            reviews_seen: stats.reviews_seen,
            reviews_kept: stats.reviews_kept,
            dropped_middle: stats.dropped_middle,
            multi_genre: stats.multi_genre,
            empty_rows: stats.empty_rows,
            vocab_size: stats.vocab_size,
            missing_polarity: stats.missing_polarity,
            wall_ms: started.elapsed().as_millis(),
        },
    )?;
    log::info!(
        "ingested {} of {} reviews into {} ({} features)",
        stats.reviews_kept,
        stats.reviews_seen,
        args.out.display(),
        stats.vocab_size
    );
    Ok(())
}

/// On-disk shape of a run configuration; also the shape of
/// `run_manifest.json`, so a manifest can be fed straight back in.
#[derive(Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct RunDoc {
    tool: Option<String>,
    version: Option<String>,
    command: Option<String>,
    dataset: Option<PathBuf>,
    out: Option<PathBuf>,
    /// Fallback thresholds for datasets without thresholds.tsv.
    a: Option<f64>,
    b: Option<f64>,
    config: Option<PipelineConfig>,
    wall_ms: Option<u128>,
}

fn load_run_doc(path: &Path) -> Result<RunDoc> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => serde_json::from_str(&text)
            .map_err(|e| Error::config(format!("{}: {e}", path.display()))),
        Some("toml") => toml::from_str(&text)
            .map_err(|e| Error::config(format!("{}: {e}", path.display()))),
        _ => Err(Error::config(format!(
            "{}: config files must end in .toml or .json",
            path.display()
        ))),
    }
}

fn parse_scheme(s: &str) -> Result<Scheme> {
    s.parse::<Scheme>()
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let started = Instant::now();
    let doc = match &args.config {
        Some(p) => load_run_doc(p)?,
        None => RunDoc::default(),
    };
    let dataset = args
        .dataset
        .or(doc.dataset)
        .unwrap_or_else(|| PathBuf::from("./dataset"));
    let out = args.out.or(doc.out).unwrap_or_else(|| PathBuf::from("./out"));
    let file_config = doc.config;
    let mut config = file_config.clone().unwrap_or_default();
    config.seed = resolve_seed(args.seed, file_config.as_ref().map(|c| c.seed))?;
    if let Some(s) = &args.scheme {
        config.scheme = parse_scheme(s)?;
    }
    if let Some(r) = &args.custom_r {
        config.custom_r = Some(r.clone());
    }
    if let Some(v) = args.b_replicates {
        config.b_replicates = v;
    }
    if let Some(v) = args.grid_k {
        config.grid_k = v;
    }
    if let Some(v) = args.grid_eps {
        config.grid_eps = v;
    }
    if args.standardize {
        config.standardize = true;
    }
    if let Some(v) = args.polarity_tol {
        config.polarity_tol = v;
    }
    if let Some(v) = args.max_iter {
        config.max_iter = v;
    }
    config.validate()?;
    let a = args.a.or(doc.a).unwrap_or(4.0);
    let b = args.b.or(doc.b).unwrap_or(7.0);
    let ds = read_dataset(&dataset, Some((a, b)))?;
    log::info!(
        "running scheme {} on {} rows x {} features ({} groups), seed {}",
        config.scheme.name(),
        ds.n_rows(),
        ds.n_cols(),
        ds.n_groups(),
        config.seed
    );
    let result = run_pipeline(&ds, &config)?;
    std::fs::create_dir_all(&out)?;
    write_outputs(&out, &ds, &result)?;
    write_json(
        &out.join("run_manifest.json"),
        &RunDoc {
            tool: Some("adabag".into()),
            version: Some(env!("CARGO_PKG_VERSION").into()),
            command: Some("run".into()),
            dataset: Some(dataset),
            out: Some(out.clone()),
            a: Some(a),
            b: Some(b),
            config: Some(config),
            wall_ms: Some(started.elapsed().as_millis()),
        },
    )?;
    log::info!(
        "cutoff {} keeps {} features; test error {:.3} (outputs in {})",
        result.report.c_star,
        result.report.model_size,
        result.report.test_me,
        out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct PcaManifest<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    dataset: &'a Path,
    out: &'a Path,
    seed: u64,
    var_explained: f64,
    orderings: &'a [String],
    component_budget: usize,
    wall_ms: u128,
}

fn cmd_pca_lda(args: PcaLdaArgs) -> Result<()> {
    let started = Instant::now();
    let seed = resolve_seed(args.seed, None)?;
    let orderings: Vec<PcOrdering> = args
        .ordering
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_>>()?;
    let ds = read_dataset(&args.dataset, Some((args.a, args.b)))?;
    let config = BaselineConfig {
        seed,
        var_explained: args.var_explained,
        component_budget: args.component_budget,
        orderings,
    };
    let report = run_baseline(&ds, &config)?;
    std::fs::create_dir_all(&args.out)?;
    write_baseline_report(&args.out.join("pca_report.json"), &report)?;
    write_json(
        &args.out.join("pca_manifest.json"),
        &PcaManifest {
            tool: "adabag",
            version: env!("CARGO_PKG_VERSION"),
            command: "pca-lda",
            dataset: &args.dataset,
            out: &args.out,
            seed,
            var_explained: args.var_explained,
            orderings: &args.ordering,
            component_budget: args.component_budget,
            wall_ms: started.elapsed().as_millis(),
        },
    )?;
    for o in &report.orderings {
        log::info!(
            "{}: {} components reach {:.1}% variance, test error {:.3}",
            o.ordering,
            o.t,
            100.0 * o.cumulative_variance,
            o.test_me
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepManifest<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    dataset: &'a Path,
    out: &'a Path,
    seed: u64,
    b_replicates: usize,
    grid_k: usize,
    grid_eps: f64,
    standardize: bool,
    wall_ms: u128,
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let started = Instant::now();
    let seed = resolve_seed(args.seed, None)?;
    let ds = read_dataset(&args.dataset, Some((args.a, args.b)))?;
    std::fs::create_dir_all(&args.out)?;
    let mut table = std::fs::File::create(args.out.join("sweep_schemes.tsv"))?;
    write!(table, "scheme\tlambda_opt\tc_star\tmodel_size\ttest_me")?;
    for name in &ds.group_names {
        write!(table, "\ttest_me_{name}")?;
    }
    writeln!(table)?;
    for scheme in Scheme::ALL_FORMULAS {
        let config = PipelineConfig {
            scheme,
            custom_r: None,
            b_replicates: args.b_replicates,
            grid_k: args.grid_k,
            grid_eps: args.grid_eps,
            seed,
            polarity_tol: args.polarity_tol,
            standardize: args.standardize,
            max_iter: args.max_iter,
        };
        let result = run_pipeline(&ds, &config)?;
        write!(
            table,
            "{}\t{}\t{}\t{}\t{}",
            scheme.name(),
            result.report.lambda_opt,
            result.report.c_star,
            result.report.model_size,
            result.report.test_me
        )?;
        for me in &result.report.per_group_test_me {
            match me {
                Some(v) => write!(table, "\t{v}")?,
                None => write!(table, "\t")?,
            }
        }
        writeln!(table)?;
        log::info!(
            "{}: {} features, test error {:.3}",
            scheme.name(),
            result.report.model_size,
            result.report.test_me
        );
    }
    write_json(
        &args.out.join("sweep_manifest.json"),
        &SweepManifest {
            tool: "adabag",
            version: env!("CARGO_PKG_VERSION"),
            command: "sweep-schemes",
            dataset: &args.dataset,
            out: &args.out,
            seed,
            b_replicates: args.b_replicates,
            grid_k: args.grid_k,
            grid_eps: args.grid_eps,
            standardize: args.standardize,
            wall_ms: started.elapsed().as_millis(),
        },
    )?;
    Ok(())
}
