mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use scmgan::bayes_net::BayesNet;
use scmgan::data::{load_csv, SchemaSource, Table, TableSchema};
use scmgan::discovery::{self, DiscoveryError};
use scmgan::evaluate::{evaluate_pipeline, EvaluateError};
use scmgan::gan::{self, GanError, TrainConfig, TrainedModel};
use scmgan::graph::CausalGraph;

use config::{join_list, ConfigFile, Snapshot};

/// Seed used when none is given on the command line or in a config file.
const DEFAULT_SEED: u64 = 20_240_531;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or parameter values.
    Usage(String),
    /// Unreadable or inconsistent input files.
    Data(String),
    /// Failures while training or writing results.
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Runtime(m) => m,
        }
    }
}

fn data_err(context: impl std::fmt::Display) -> impl FnOnce(String) -> CliError {
    move |e| CliError::Data(format!("{context}: {e}"))
}

#[derive(Parser, Debug)]
#[command(name = "scmgan", version, about = "Causal-graph GAN for synthetic tabular data")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a dataset from a Bayesian network in BIF format.
    SampleBn(SampleBnArgs),
    /// Estimate a causal DAG from a CSV file with the PC algorithm.
    Discover(DiscoverArgs),
    /// Train a causal generator on a CSV file and a DAG.
    Train(TrainArgs),
    /// Sample rows from a trained model.
    Generate(GenerateArgs),
    /// Compare synthetic against real data.
    Evaluate(EvaluateArgs),
}

#[derive(Args, Debug)]
struct SampleBnArgs {
    #[arg(long)]
    bif: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV; a `.schema` sidecar is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DiscoverArgs {
    #[arg(long)]
    csv: PathBuf,
    /// Column schema; defaults to the CSV's `.schema` sidecar when present.
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    max_cond: Option<usize>,
    /// Output `.dag` file; the log goes to `<out>.report.txt`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long)]
    dag: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    beta1: Option<f64>,
    #[arg(long)]
    beta2: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    noise_dim: Option<usize>,
    /// Comma-separated hidden sizes of each mechanism.
    #[arg(long)]
    mechanism_hidden: Option<String>,
    /// Comma-separated hidden sizes of the discriminator.
    #[arg(long)]
    discriminator_hidden: Option<String>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Model file; also writes `<out>.loss.csv` and `<out>.config`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    real: PathBuf,
    #[arg(long)]
    synth: PathBuf,
    /// Schema for both files; defaults to the real CSV's sidecar.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Ground-truth network for the oracle likelihood.
    #[arg(long)]
    oracle: Option<PathBuf>,
    /// Target column for machine-learning efficacy.
    #[arg(long)]
    target: Option<String>,
    /// Report prefix: writes `<out>.txt` and `<out>.json`.
    #[arg(long)]
    out: PathBuf,
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("schema")
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

fn schema_source(csv: &Path, explicit: Option<&Path>) -> Result<SchemaSource, CliError> {
    let path = match explicit {
        Some(p) => p.to_path_buf(),
        None => {
            let side = sidecar_path(csv);
            if !side.exists() {
                return Ok(SchemaSource::Infer);
            }
            side
        }
    };
    let schema = TableSchema::read_sidecar(&path).map_err(|e| data_err(path.display())(e.to_string()))?;
    Ok(SchemaSource::Explicit(schema))
}

fn load_table(csv: &Path, schema: Option<&Path>) -> Result<Table, CliError> {
    let source = schema_source(csv, schema)?;
    load_csv(csv, source).map_err(|e| data_err(csv.display())(e.to_string()))
}

fn write_table(table: &Table, out: &Path) -> Result<(), CliError> {
    table
        .write_csv_file(out)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", out.display())))?;
    let side = sidecar_path(out);
    table
        .schema()
        .write_sidecar(&side)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", side.display())))
}

fn cmd_sample_bn(args: SampleBnArgs) -> Result<(), CliError> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let text = read_text(&args.bif)?;
    let bn = BayesNet::parse_bif(&text).map_err(|e| data_err(args.bif.display())(e.to_string()))?;
    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    let table = bn.ancestral_sample(args.n, seed);
    write_table(&table, &args.out)?;
    log::info!("wrote {} rows of `{}` to {}", args.n, bn.name(), args.out.display());
    Ok(())
}

fn cmd_discover(args: DiscoverArgs) -> Result<(), CliError> {
    let cfg = match &args.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    cfg.check_keys(&["alpha", "max_cond"])?;
    let alpha = cfg.resolve("alpha", args.alpha, discovery::DEFAULT_ALPHA)?;
    let max_cond = cfg.resolve("max_cond", args.max_cond, discovery::DEFAULT_MAX_COND)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Usage(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let table = load_table(&args.csv, args.schema.as_deref())?;
    let result = discovery::discover(&table, alpha, max_cond).map_err(|e| match e {
        DiscoveryError::InvalidParameter(m) => CliError::Usage(m),
        other => CliError::Data(other.to_string()),
    })?;
    if result.fallback {
        log::warn!("DAG extension fell back to a topological ordering; see the report");
    }
    write_file(&args.out, &result.dag.to_dag_string())?;
    write_file(&with_suffix(&args.out, ".report.txt"), &result.report(alpha, max_cond))?;
    let mut snap = Snapshot::default();
    snap.set("alpha", alpha);
    snap.set("max_cond", max_cond);
    write_file(&with_suffix(&args.out, ".config"), &snap.render("discover"))?;
    log::info!("discovered {} edges", result.dag.n_edges());
    Ok(())
}

const TRAIN_KEYS: &[&str] = &[
    "epochs",
    "batch_size",
    "lr",
    "beta1",
    "beta2",
    "eps",
    "tau",
    "noise_dim",
    "mechanism_hidden",
    "discriminator_hidden",
    "k_max",
    "seed",
];

fn resolve_train_config(args: &TrainArgs) -> Result<TrainConfig, CliError> {
    let cfg = match &args.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    cfg.check_keys(TRAIN_KEYS)?;
    let d = TrainConfig::default();
    Ok(TrainConfig {
        epochs: cfg.resolve("epochs", args.epochs, d.epochs)?,
        batch_size: cfg.resolve("batch_size", args.batch_size, d.batch_size)?,
        lr: cfg.resolve("lr", args.lr, d.lr)?,
        beta1: cfg.resolve("beta1", args.beta1, d.beta1)?,
        beta2: cfg.resolve("beta2", args.beta2, d.beta2)?,
        eps: cfg.resolve("eps", None, d.eps)?,
        tau: cfg.resolve("tau", args.tau, d.tau)?,
        noise_dim: cfg.resolve("noise_dim", args.noise_dim, d.noise_dim)?,
        mechanism_hidden: cfg.resolve_list("mechanism_hidden", args.mechanism_hidden.as_deref(), d.mechanism_hidden)?,
        discriminator_hidden: cfg.resolve_list(
            "discriminator_hidden",
            args.discriminator_hidden.as_deref(),
            d.discriminator_hidden,
        )?,
        k_max: cfg.resolve("k_max", args.k_max, d.k_max)?,
        seed: cfg.resolve("seed", args.seed, DEFAULT_SEED)?,
    })
}

fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let cfg = resolve_train_config(&args)?;
    // Row-independent checks happen before any file is read.
    cfg.validate(usize::MAX).map_err(|e| CliError::Usage(e.to_string()))?;
    let table = load_table(&args.csv, args.schema.as_deref())?;
    cfg.validate(table.n_rows()).map_err(|e| CliError::Usage(e.to_string()))?;
    let graph = CausalGraph::parse(&read_text(&args.dag)?).map_err(|e| data_err(args.dag.display())(e.to_string()))?;
    graph
        .bind_to(&table.schema().names())
        .map_err(|e| CliError::Data(format!("{} does not match {}: {e}", args.dag.display(), args.csv.display())))?;

    let (model, history) = gan::fit(&table, &graph, &cfg).map_err(|e| match e {
        GanError::NonFiniteLoss { .. } => CliError::Runtime(e.to_string()),
        GanError::InvalidConfig(m) => CliError::Usage(m),
        GanError::SchemaMismatch(_) | GanError::Transform(_) => CliError::Data(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    })?;
    model
        .save(&args.out)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", args.out.display())))?;
    write_file(&with_suffix(&args.out, ".loss.csv"), &history.to_csv())?;

    let mut snap = Snapshot::default();
    snap.set("epochs", cfg.epochs);
    snap.set("batch_size", cfg.batch_size);
    snap.set("lr", cfg.lr);
    snap.set("beta1", cfg.beta1);
    snap.set("beta2", cfg.beta2);
    snap.set("eps", cfg.eps);
    snap.set("tau", cfg.tau);
    snap.set("noise_dim", cfg.noise_dim);
    snap.set("mechanism_hidden", join_list(&cfg.mechanism_hidden));
    snap.set("discriminator_hidden", join_list(&cfg.discriminator_hidden));
    snap.set("k_max", cfg.k_max);
    snap.set("seed", cfg.seed);
    write_file(&with_suffix(&args.out, ".config"), &snap.render("train"))?;
    if let Some(last) = history.epochs.last() {
        log::info!(
            "trained {} epochs; final d_loss {:.4}, g_loss {:.4}",
            history.epochs.len(),
            last.d_loss,
            last.g_loss
        );
    }
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let text = read_text(&args.model)?;
    let model = TrainedModel::from_json(&text).map_err(|e| data_err(args.model.display())(e.to_string()))?;
    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    let table = model.sample(args.n, seed).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_table(&table, &args.out)
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let real = load_table(&args.real, args.schema.as_deref())?;
    let synth = load_csv(&args.synth, SchemaSource::Explicit(real.schema().clone()))
        .map_err(|e| data_err(args.synth.display())(e.to_string()))?;
    let oracle = match &args.oracle {
        Some(p) => Some(BayesNet::parse_bif(&read_text(p)?).map_err(|e| data_err(p.display())(e.to_string()))?),
        None => None,
    };
    let report = evaluate_pipeline(&real, &synth, oracle.as_ref(), args.target.as_deref()).map_err(|e| match e {
        EvaluateError::SchemaMismatch(_) | EvaluateError::EmptyColumn(_) | EvaluateError::SingleClass(_) => {
            CliError::Data(e.to_string())
        }
        EvaluateError::Oracle(_) => CliError::Data(e.to_string()),
    })?;
    let text = report.to_text();
    write_file(&with_suffix(&args.out, ".txt"), &text)?;
    let json = serde_json::to_string_pretty(&report.to_json()).expect("report serializes");
    write_file(&with_suffix(&args.out, ".json"), &json)?;
    print!("{text}");
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::SampleBn(a) => cmd_sample_bn(a),
        Command::Discover(a) => cmd_discover(a),
        Command::Train(a) => cmd_train(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Evaluate(a) => cmd_evaluate(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
