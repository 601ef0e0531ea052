//! Command-line front end for the analysis pipeline.
//!
//! `analyze` runs the full pipeline over one or more project CSVs and
//! writes all artifacts under the output directory; `summary-only` emits
//! just the per-project summary table on standard output. Logs and
//! diagnostics go to standard error; machine artifacts live only in the
//! output directory.
//!
//! Exit codes: 0 on full success, 1 on configuration errors, 2 when one or
//! more projects failed while the run itself was valid.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use buglag_core::ingest::SchemaConfig;
use buglag_core::pipeline::{
    run_pipeline, run_summary_only, BucketKey, ClusterSpace, PipelineConfig, ProjectInput,
    ProjectOutcome, RunSummary,
};
use buglag_core::report::summary_table;

#[derive(Parser)]
#[command(
    name = "buglag",
    version,
    about = "Detects anomalously long bug resolution times in issue-tracker CSV exports and clusters their summaries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write figures, tables, and report.md
    Analyze(AnalyzeArgs),
    /// Emit only the per-project totals/duplicates table
    #[command(name = "summary-only")]
    SummaryOnly(SummaryArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Project input as NAME=PATH; repeat for several projects
    #[arg(long = "input", value_name = "NAME=PATH", required = true)]
    inputs: Vec<String>,

    /// Output directory for all artifacts
    #[arg(long = "out", value_name = "DIR")]
    out: PathBuf,

    /// |z| above which a bug is flagged (default 3.0)
    #[arg(long = "z-threshold", value_name = "F")]
    z_threshold: Option<f64>,

    /// IQR fence multiplier (default 1.5)
    #[arg(long = "iqr-multiplier", value_name = "F")]
    iqr_multiplier: Option<f64>,

    /// Number of clusters (default 3)
    #[arg(long, value_name = "N")]
    k: Option<usize>,

    /// Seed for the clustering RNG (default 42)
    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// Top terms reported per cluster (default 10)
    #[arg(long = "top-terms", value_name = "N")]
    top_terms: Option<usize>,

    /// Space to cluster in: pca2d or tfidf (default pca2d)
    #[arg(long = "cluster-space", value_name = "SPACE")]
    cluster_space: Option<String>,

    /// Month bucket for anomaly counts: created or resolved (default created)
    #[arg(long = "bucket-key", value_name = "KEY")]
    bucket_key: Option<String>,

    /// CSV column that marks duplicates (default: the resolution column)
    #[arg(long = "duplicate-column", value_name = "COLUMN")]
    duplicate_column: Option<String>,

    /// Literal the duplicate column is compared against, case-insensitively
    /// (default "Duplicate")
    #[arg(long = "duplicate-literal", value_name = "TEXT")]
    duplicate_literal: Option<String>,

    /// key=value file remapping logical fields to CSV column names
    #[arg(long, value_name = "FILE")]
    schema: Option<PathBuf>,

    /// key=value file with defaults for the options above; flags win
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Also write tfidf.json per project
    #[arg(long = "dump-tfidf")]
    dump_tfidf: bool,

    /// Also write embedding.csv per project
    #[arg(long = "dump-embedding")]
    dump_embedding: bool,
}

#[derive(Args)]
struct SummaryArgs {
    /// Project input as NAME=PATH; repeat for several projects
    #[arg(long = "input", value_name = "NAME=PATH", required = true)]
    inputs: Vec<String>,

    /// CSV column that marks duplicates (default: the resolution column)
    #[arg(long = "duplicate-column", value_name = "COLUMN")]
    duplicate_column: Option<String>,

    /// Literal the duplicate column is compared against (default "Duplicate")
    #[arg(long = "duplicate-literal", value_name = "TEXT")]
    duplicate_literal: Option<String>,

    /// key=value file remapping logical fields to CSV column names
    #[arg(long, value_name = "FILE")]
    schema: Option<PathBuf>,
}

fn main() -> ExitCode {
    init_logging();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Analyze(args) => analyze(args),
        Command::SummaryOnly(args) => summary_only(args),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            eprintln!("ERROR {message}");
            ExitCode::from(1)
        }
    }
}

fn init_logging() {
    let mut builder =
        env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"));
    if std::env::var_os("NO_COLOR").is_some() {
        builder.write_style(env_logger::WriteStyle::Never);
    }
    let _ = builder.format_timestamp(None).try_init();
}

fn analyze(args: AnalyzeArgs) -> Result<ExitCode, String> {
    let file = load_key_values(args.config.as_deref())?;
    let known = [
        "z_threshold",
        "iqr_multiplier",
        "k",
        "seed",
        "top_terms",
        "cluster_space",
        "bucket_key",
        "duplicate_column",
        "duplicate_literal",
        "dump_tfidf",
        "dump_embedding",
    ];
    for key in file.keys() {
        if !known.contains(&key.as_str()) {
            return Err(format!("config file: unknown key {key:?}"));
        }
    }
    let merged = |flag: Option<String>, key: &str| flag.or_else(|| file.get(key).cloned());

    let mut schema = load_schema(args.schema.as_deref())?;
    if let Some(column) = merged(args.duplicate_column, "duplicate_column") {
        schema.duplicate_marker = Some(column);
    }

    let config = PipelineConfig {
        inputs: parse_inputs(&args.inputs)?,
        out_dir: args.out,
        z_threshold: parse_merged(merged(None, "z_threshold"), args.z_threshold, 3.0)?,
        iqr_multiplier: parse_merged(merged(None, "iqr_multiplier"), args.iqr_multiplier, 1.5)?,
        k: parse_merged(merged(None, "k"), args.k, 3)?,
        seed: parse_merged(merged(None, "seed"), args.seed, 42)?,
        top_terms: parse_merged(merged(None, "top_terms"), args.top_terms, 10)?,
        cluster_space: parse_merged_str::<ClusterSpace>(merged(
            args.cluster_space,
            "cluster_space",
        ))?
        .unwrap_or_default(),
        bucket_key: parse_merged_str::<BucketKey>(merged(args.bucket_key, "bucket_key"))?
            .unwrap_or_default(),
        duplicate_literal: merged(args.duplicate_literal, "duplicate_literal")
            .unwrap_or_else(|| "Duplicate".to_string()),
        schema,
        dump_tfidf: args.dump_tfidf || flag_from(&file, "dump_tfidf")?,
        dump_embedding: args.dump_embedding || flag_from(&file, "dump_embedding")?,
    };

    let run = run_pipeline(&config).map_err(|e| e.to_string())?;
    report_outcomes(&run);
    Ok(exit_for(&run))
}

fn summary_only(args: SummaryArgs) -> Result<ExitCode, String> {
    let mut schema = load_schema(args.schema.as_deref())?;
    if let Some(column) = args.duplicate_column {
        schema.duplicate_marker = Some(column);
    }
    let literal = args
        .duplicate_literal
        .unwrap_or_else(|| "Duplicate".to_string());
    let inputs = parse_inputs(&args.inputs)?;
    let (summaries, run) =
        run_summary_only(&inputs, &schema, &literal).map_err(|e| e.to_string())?;
    print!("{}", summary_table(&summaries));
    report_outcomes(&run);
    Ok(exit_for(&run))
}

fn parse_inputs(raw: &[String]) -> Result<Vec<ProjectInput>, String> {
    raw.iter()
        .map(|spec| {
            let (name, path) = spec
                .split_once('=')
                .ok_or_else(|| format!("--input {spec:?} is not of the form NAME=PATH"))?;
            Ok(ProjectInput {
                name: name.to_string(),
                path: PathBuf::from(path),
            })
        })
        .collect()
}

fn load_schema(path: Option<&std::path::Path>) -> Result<SchemaConfig, String> {
    match path {
        None => Ok(SchemaConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| format!("cannot read schema file {}: {e}", p.display()))?;
            SchemaConfig::parse(&text).map_err(|e| e.to_string())
        }
    }
}

/// Reads a `key = value` file (comments with `#` or `;`, optional quotes).
fn load_key_values(path: Option<&std::path::Path>) -> Result<HashMap<String, String>, String> {
    let mut map = HashMap::new();
    let Some(p) = path else { return Ok(map) };
    let text = std::fs::read_to_string(p)
        .map_err(|e| format!("cannot read config file {}: {e}", p.display()))?;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config file line {}: expected key = value", lineno + 1))?;
        let value = value
            .trim()
            .trim_matches('"')
            .trim_matches('\'')
            .to_string();
        map.insert(key.trim().to_string(), value);
    }
    Ok(map)
}

fn parse_merged<T: std::str::FromStr>(
    file: Option<String>,
    flag: Option<T>,
    default: T,
) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    if let Some(v) = flag {
        return Ok(v);
    }
    match file {
        Some(text) => text
            .parse()
            .map_err(|e| format!("config file value {text:?}: {e}")),
        None => Ok(default),
    }
}

fn parse_merged_str<T: std::str::FromStr>(value: Option<String>) -> Result<Option<T>, String>
where
    T::Err: std::fmt::Display,
{
    value
        .map(|text| text.parse().map_err(|e| format!("{e}")))
        .transpose()
}

fn flag_from(file: &HashMap<String, String>, key: &str) -> Result<bool, String> {
    match file.get(key).map(String::as_str) {
        None => Ok(false),
        Some("true") => Ok(true),
        Some("false") => Ok(false),
        Some(other) => Err(format!(
            "config file: {key} must be true or false, got {other:?}"
        )),
    }
}

fn report_outcomes(run: &RunSummary) {
    for (name, outcome) in &run.projects {
        match outcome {
            ProjectOutcome::Analyzed => eprintln!("project {name}: ok"),
            ProjectOutcome::Degraded(reason) => eprintln!("project {name}: degraded ({reason})"),
            ProjectOutcome::Failed(error) => eprintln!("project {name}: FAILED ({error})"),
        }
    }
}

fn exit_for(run: &RunSummary) -> ExitCode {
    if run.any_failed() {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
