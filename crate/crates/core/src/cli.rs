//! Command-line front end.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, ErrorCategory, Result};
use crate::evaluation::{
    derive_seed, fold_split, path_length_analysis, run_experiment, split_folds,
    ExperimentOptions, PathLength, DEFAULT_FOLDS, DEFAULT_MAX_N, FOLD_SEED_STREAM,
};
use crate::graph::{build_graph, BipartiteGraph, DedupRule, Interaction};
use crate::indices::{score_all, CnVariant, IndexConfig, IndexKind, KatzMethod};
use crate::io::{
    emit_plot, parse_edge_list_with_manifest, parse_matador, read_baseline_curve,
    write_fold_assignment, write_pr_curve, write_predictions, write_report, write_timings,
    ColumnMap, DatasetFormat, DatasetManifest,
};
use crate::ranking::{rank, TiePolicy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;

pub const DEFAULT_BETAS: [f64; 3] = [0.005, 0.01, 0.02];

#[derive(Debug, Parser)]
#[command(
    name = "dtilink",
    version,
    about = "Similarity-index link prediction for drug-target interaction networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a dataset and print its dimensions and duplicate statistics
    Validate(DatasetArgs),
    /// Score and rank all candidate pairs of the full dataset
    Predict(PredictArgs),
    /// Cross-validated precision-recall evaluation of one or more indices
    Evaluate(EvaluateArgs),
    /// Shortest training-path lengths for the validation links of one fold
    Paths(PathsArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    /// Tab-separated MATADOR export with a header row
    Matador,
    /// drug,protein[,weight] CSV
    EdgeList,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IndexArg {
    Cn,
    Jaccard,
    Pa,
    Katz,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CnVariantArg {
    Path,
    Set,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KatzMethodArg {
    Auto,
    Direct,
    Series,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TieArg {
    Lexicographic,
    Shuffle,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DedupArg {
    Sum,
    Max,
    First,
}

#[derive(Debug, Args)]
struct DatasetArgs {
    /// Input dataset
    dataset: PathBuf,
    /// Input format; inferred from the extension when omitted (.csv is an edge list)
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// MATADOR column holding the chemical identifier
    #[arg(long, default_value = "chemical_id")]
    drug_column: String,
    /// MATADOR column holding the protein identifier
    #[arg(long, default_value = "protein_id")]
    protein_column: String,
    /// MATADOR column holding the confidence score, or "none"
    #[arg(long, default_value = "matador_score")]
    score_column: String,
    /// Merge rule for repeated (drug, protein) rows in weighted mode
    #[arg(long, value_enum, default_value_t = DedupArg::Sum)]
    dedup: DedupArg,
}

#[derive(Debug, Args)]
struct ScoringArgs {
    /// Use edge weights (MATADOR scores) instead of presence
    #[arg(long)]
    weighted: bool,
    /// Common-neighbours formulation
    #[arg(long, value_enum, default_value_t = CnVariantArg::Path)]
    cn_variant: CnVariantArg,
    /// Katz computation method
    #[arg(long, value_enum, default_value_t = KatzMethodArg::Auto)]
    katz_method: KatzMethodArg,
    /// Ordering of equal scores
    #[arg(long, value_enum, default_value_t = TieArg::Lexicographic)]
    tie_break: TieArg,
    /// Master seed for fold splits and tie shuffling
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads (output is identical for any value)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    scoring: ScoringArgs,
    /// Similarity index
    #[arg(long, value_enum, default_value_t = IndexArg::Cn)]
    index: IndexArg,
    /// Katz damping factor (required for katz)
    #[arg(long)]
    beta: Option<f64>,
    /// Number of predictions to write
    #[arg(long, default_value_t = DEFAULT_MAX_N)]
    top_n: usize,
    /// Directory for predictions.csv (standard output when omitted)
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    scoring: ScoringArgs,
    /// Indices to evaluate (comma separated)
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [IndexArg::Cn, IndexArg::Jaccard, IndexArg::Pa, IndexArg::Katz])]
    index: Vec<IndexArg>,
    /// Katz damping factors (comma separated; default 0.005,0.01,0.02)
    #[arg(long, value_delimiter = ',')]
    beta: Vec<f64>,
    /// Number of cross-validation folds
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    folds: usize,
    /// Largest rank cutoff n of the precision-recall sweep
    #[arg(long, default_value_t = DEFAULT_MAX_N)]
    top_n: usize,
    /// External baseline curve, CSV with recall,precision columns
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// Legend name for the baseline curve
    #[arg(long, default_value = "baseline")]
    baseline_name: String,
    /// Output directory
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct PathsArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Number of cross-validation folds
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    folds: usize,
    /// Master seed (same derivation as evaluate)
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Fold to hold out, 0-based
    #[arg(long, default_value_t = 0)]
    fold: usize,
}

/// Runs the CLI with explicit argument list and output streams; returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(rendered.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(rendered.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let threads = match &cli.command {
        Command::Predict(a) => a.scoring.threads,
        Command::Evaluate(a) => a.scoring.threads,
        _ => None,
    };
    let mut out_buf = Vec::new();
    let mut err_buf = Vec::new();
    let result = match build_pool(threads) {
        Ok(pool) => pool.install(|| dispatch(cli.command, &mut out_buf, &mut err_buf)),
        Err(e) => Err(e),
    };
    let _ = stdout.write_all(&out_buf);
    let _ = stderr.write_all(&err_buf);
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e.category() {
                ErrorCategory::Usage => EXIT_USAGE,
                ErrorCategory::Data => EXIT_DATA,
                ErrorCategory::Computation => EXIT_COMPUTATION,
            }
        }
    }
}

fn build_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::InvalidConfig("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start thread pool: {e}")))
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match command {
        Command::Validate(a) => cmd_validate(&a, stdout),
        Command::Predict(a) => cmd_predict(&a, stdout, stderr),
        Command::Evaluate(a) => cmd_evaluate(&a, stdout, stderr),
        Command::Paths(a) => cmd_paths(&a, stdout),
    }
}

fn load(args: &DatasetArgs) -> Result<(Vec<Interaction>, DatasetManifest)> {
    let format = match args.format {
        Some(FormatArg::Matador) => DatasetFormat::MatadorTsv,
        Some(FormatArg::EdgeList) => DatasetFormat::EdgeListCsv,
        None => match args.dataset.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => DatasetFormat::EdgeListCsv,
            _ => DatasetFormat::MatadorTsv,
        },
    };
    let file = File::open(&args.dataset).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", args.dataset.display()),
        ))
    })?;
    let source = args.dataset.display().to_string();
    match format {
        DatasetFormat::MatadorTsv => {
            let columns = ColumnMap {
                drug: args.drug_column.clone(),
                protein: args.protein_column.clone(),
                score: (!args.score_column.eq_ignore_ascii_case("none"))
                    .then(|| args.score_column.clone()),
            };
            parse_matador(file, &columns, Some(&source))
        }
        DatasetFormat::EdgeListCsv => parse_edge_list_with_manifest(file, Some(&source)),
    }
}

fn dedup_rule(arg: DedupArg) -> DedupRule {
    match arg {
        DedupArg::Sum => DedupRule::Sum,
        DedupArg::Max => DedupRule::Max,
        DedupArg::First => DedupRule::First,
    }
}

fn tie_policy(arg: TieArg) -> TiePolicy {
    match arg {
        TieArg::Lexicographic => TiePolicy::Lexicographic,
        TieArg::Shuffle => TiePolicy::SeededShuffle,
    }
}

fn index_config(index: IndexArg, beta: Option<f64>, scoring: &ScoringArgs) -> IndexConfig {
    let base = match index {
        IndexArg::Cn => IndexConfig::common_neighbours(),
        IndexArg::Jaccard => IndexConfig::jaccard(),
        IndexArg::Pa => IndexConfig::preferential_attachment(),
        IndexArg::Katz => IndexConfig {
            beta,
            ..IndexConfig::katz(f64::NAN)
        },
    };
    base.with_weighted(scoring.weighted)
        .with_cn_variant(match scoring.cn_variant {
            CnVariantArg::Path => CnVariant::PathCount,
            CnVariantArg::Set => CnVariant::SetCardinality,
        })
        .with_katz_method(match scoring.katz_method {
            KatzMethodArg::Auto => KatzMethod::Auto,
            KatzMethodArg::Direct => KatzMethod::DirectSolve,
            KatzMethodArg::Series => KatzMethod::TruncatedSeries,
        })
}

fn load_graph(args: &DatasetArgs, weighted: bool) -> Result<(BipartiteGraph, DatasetManifest)> {
    let (rows, manifest) = load(args)?;
    let graph = build_graph(&rows, weighted, dedup_rule(args.dedup))?;
    Ok((graph, manifest))
}

fn cmd_validate(args: &DatasetArgs, out: &mut dyn Write) -> Result<()> {
    let (graph, m) = load_graph(args, true)?;
    writeln!(
        out,
        "{} drugs, {} proteins, {} interactions",
        graph.n_drugs(),
        graph.n_proteins(),
        graph.n_edges()
    )?;
    writeln!(out, "source: {}", m.source.as_deref().unwrap_or("-"))?;
    writeln!(out, "format: {}", m.format)?;
    if let Some(c) = &m.columns {
        writeln!(
            out,
            "columns: drug={} protein={} score={}",
            c.drug,
            c.protein,
            c.score.as_deref().unwrap_or("none")
        )?;
    }
    writeln!(out, "data rows: {}", m.rows)?;
    writeln!(out, "accepted rows: {}", m.interactions)?;
    writeln!(out, "duplicate rows: {} (merged with {})", m.duplicate_rows(), args.dedup_name())?;
    writeln!(out, "skipped rows: {}", m.skipped.len())?;
    for s in &m.skipped {
        writeln!(out, "  line {}: {}", s.line, s.reason)?;
    }
    writeln!(out, "biadjacency: {} x {}", graph.n_drugs(), graph.n_proteins())?;
    writeln!(out, "sha256: {}", m.content_hash)?;
    Ok(())
}

impl DatasetArgs {
    fn dedup_name(&self) -> DedupRule {
        dedup_rule(self.dedup)
    }
}

fn cmd_predict(args: &PredictArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match (args.index, args.beta) {
        (IndexArg::Katz, None) => {
            return Err(Error::InvalidConfig("--index katz requires --beta".into()))
        }
        (IndexArg::Katz, Some(_)) | (_, None) => {}
        (_, Some(_)) => {
            return Err(Error::InvalidConfig("--beta only applies to --index katz".into()))
        }
    }
    let config = index_config(args.index, args.beta, &args.scoring);
    config.validate()?;
    let (graph, _) = load_graph(&args.data, args.scoring.weighted)?;
    writeln!(
        stderr,
        "scoring {} on {} x {} graph with {} edges",
        config.label(),
        graph.n_drugs(),
        graph.n_proteins(),
        graph.n_edges()
    )?;
    let scores = score_all(&graph, &config)?;
    let ranked = rank(
        &scores,
        tie_policy(args.scoring.tie_break),
        derive_seed(args.scoring.seed, 1),
        Some(args.top_n),
    )?;
    match &args.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = dir.join("predictions.csv");
            let mut w = BufWriter::new(File::create(&path)?);
            write_predictions(&ranked, &mut w)?;
            w.flush()?;
            writeln!(stderr, "wrote {} predictions to {}", ranked.len(), path.display())?;
        }
        None => write_predictions(&ranked, stdout)?,
    }
    Ok(())
}

/// File-name-safe form of a config label.
pub fn slug(label: &str) -> String {
    let mut s = String::new();
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            s.push(c.to_ascii_lowercase());
        } else if !s.ends_with('-') {
            s.push('-');
        }
    }
    s.trim_matches('-').to_string()
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn cmd_evaluate(args: &EvaluateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let has_katz = args.index.contains(&IndexArg::Katz);
    if !has_katz && !args.beta.is_empty() {
        return Err(Error::InvalidConfig("--beta given but katz is not among --index".into()));
    }
    let betas: Vec<f64> = if args.beta.is_empty() {
        DEFAULT_BETAS.to_vec()
    } else {
        args.beta.clone()
    };
    let mut configs = Vec::new();
    for &index in &args.index {
        if index == IndexArg::Katz {
            for &b in &betas {
                configs.push(index_config(index, Some(b), &args.scoring));
            }
        } else {
            configs.push(index_config(index, None, &args.scoring));
        }
    }
    for c in &configs {
        c.validate()?;
    }
    if configs.iter().any(|c| c.kind == IndexKind::Katz) && args.scoring.weighted {
        writeln!(stderr, "note: weighted katz uses raw MATADOR scores as edge weights")?;
    }

    let baseline = match &args.baseline {
        Some(path) => Some((args.baseline_name.clone(), read_baseline_curve(File::open(path)?)?)),
        None => None,
    };
    let (graph, _) = load_graph(&args.data, args.scoring.weighted)?;
    writeln!(
        stderr,
        "evaluating {} configs with {}-fold cross-validation on {} interactions",
        configs.len(),
        args.folds,
        graph.n_edges()
    )?;
    let options = ExperimentOptions {
        k: args.folds,
        seed: args.scoring.seed,
        max_n: args.top_n,
        tie_policy: tie_policy(args.scoring.tie_break),
    };
    let report = run_experiment(&graph, &configs, &options, baseline)?;

    let dir = &args.out_dir;
    fs::create_dir_all(dir)?;
    let mut w = create(dir, "report.txt")?;
    write_report(&report, &mut w)?;
    w.flush()?;
    let mut w = create(dir, "timing.txt")?;
    write_timings(&report, &mut w)?;
    w.flush()?;

    let edges = graph.edges();
    let folds = split_folds(&edges, args.folds, derive_seed(args.scoring.seed, FOLD_SEED_STREAM))?;
    let mut w = create(dir, "folds.csv")?;
    write_fold_assignment(&graph, &edges, &folds, &mut w)?;
    w.flush()?;

    let mut plotted = Vec::new();
    if let Some(b) = &report.baseline {
        plotted.push((format!("Baseline ({})", b.name), b.curve.clone()));
    }
    for r in &report.results {
        match &r.outcome {
            Ok(s) => {
                let mut w = create(dir, &format!("curve_{}.csv", slug(&r.label)))?;
                write_pr_curve(&s.curve, &mut w)?;
                w.flush()?;
                plotted.push((r.label.clone(), s.curve.clone()));
            }
            Err(msg) => writeln!(stderr, "{} failed: {msg}", r.label)?,
        }
    }
    let mut w = create(dir, "pr_curves.svg")?;
    emit_plot(&plotted, &mut w)?;
    w.flush()?;

    write_report(&report, &mut *stdout)?;
    writeln!(stderr, "results written to {}", dir.display())?;
    if report.results.iter().all(|r| r.outcome.is_err()) {
        return Err(Error::SolveFailed("every configuration failed".into()));
    }
    Ok(())
}

fn cmd_paths(args: &PathsArgs, out: &mut dyn Write) -> Result<()> {
    if args.fold >= args.folds {
        return Err(Error::InvalidConfig(format!(
            "--fold {} out of range for --folds {}",
            args.fold, args.folds
        )));
    }
    let (graph, _) = load_graph(&args.data, false)?;
    let edges = graph.edges();
    let folds = split_folds(&edges, args.folds, derive_seed(args.seed, FOLD_SEED_STREAM))?;
    let (train, validation) = fold_split(&graph, &edges, &folds, args.fold)?;
    let hist = path_length_analysis(&train, &validation)?;
    writeln!(
        out,
        "fold {} of {}: {} validation links",
        args.fold,
        args.folds,
        hist.total()
    )?;
    writeln!(out, "length\tcount\tfraction")?;
    for (len, count) in &hist.counts {
        writeln!(out, "{len}\t{count}\t{:.4}", hist.fraction(*len))?;
    }
    writeln!(
        out,
        "at length 3: {}/{} = {:.4}",
        hist.count(PathLength::Finite(3)),
        hist.total(),
        hist.fraction(PathLength::Finite(3))
    )?;
    Ok(())
}
