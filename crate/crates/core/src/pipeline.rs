//! End-to-end orchestration over one or more project CSVs.
//!
//! Per project: parse, compute durations (unresolved and negative-duration
//! bugs excluded), detect anomalies, vectorize only the anomalous
//! summaries, PCA to 2-D, KMeans, themes, then write the per-project
//! artifacts; finally a cross-project `report.md`.
//!
//! Analytic degradations (no resolved bugs, fewer anomalies than `k`, an
//! all-empty anomalous corpus) downgrade a project to a summary-only report
//! row with a warning. Hard failures (unreadable file, missing columns)
//! skip the project but never abort the others.
//!
//! Artifacts are written atomically (temp file + rename) and each run
//! recreates the per-project directory, so stale files never mix with
//! fresh ones. Identical inputs and configuration produce byte-identical
//! artifact trees.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Real;

use crate::anomaly::{detect_anomalies, monthly_counts, AnomalyConfig, AnomalySet, MonthlyCounts};
use crate::cluster::{cluster_top_terms, kmeans, ClusterTheme, Clustering, KMeansConfig};
use crate::ingest::{
    self, dataset_summary, parse_bug_reports, Diagnostic, RepoSummary, ResolutionRecord,
    SchemaConfig,
};
use crate::reduce::{pca_fit, pca_transform, Embedding2D};
use crate::report::{
    render_cluster_scatter, render_monthly_bars, render_resolution_scatter, write_report,
    FigureKind, FigureSpec, ProjectReportEntry,
};
use crate::textvec::{build_vocabulary, tfidf_matrix, tokenize, DocTermMatrix};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One `name=path` project input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectInput {
    pub name: String,
    pub path: PathBuf,
}

/// Space the KMeans step runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClusterSpace {
    /// Cluster the 2-D PCA embedding (default).
    #[default]
    Pca2d,
    /// Cluster the full TF-IDF rows.
    Tfidf,
}

impl std::str::FromStr for ClusterSpace {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pca2d" => Ok(ClusterSpace::Pca2d),
            "tfidf" => Ok(ClusterSpace::Tfidf),
            other => Err(format!("expected pca2d or tfidf, got {other:?}")),
        }
    }
}

/// Timestamp that buckets an anomaly into its month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BucketKey {
    #[default]
    Created,
    Resolved,
}

impl std::str::FromStr for BucketKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "created" => Ok(BucketKey::Created),
            "resolved" => Ok(BucketKey::Resolved),
            other => Err(format!("expected created or resolved, got {other:?}")),
        }
    }
}

/// Full pipeline configuration.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub inputs: Vec<ProjectInput>,
    pub out_dir: PathBuf,
    pub z_threshold: f64,
    pub iqr_multiplier: f64,
    pub k: usize,
    pub seed: u64,
    pub top_terms: usize,
    pub cluster_space: ClusterSpace,
    pub bucket_key: BucketKey,
    pub duplicate_literal: String,
    pub schema: SchemaConfig,
    pub dump_tfidf: bool,
    pub dump_embedding: bool,
}

impl PipelineConfig {
    /// Defaults for everything except the inputs and output directory.
    pub fn new(inputs: Vec<ProjectInput>, out_dir: PathBuf) -> Self {
        PipelineConfig {
            inputs,
            out_dir,
            z_threshold: 3.0,
            iqr_multiplier: 1.5,
            k: 3,
            seed: 42,
            top_terms: 10,
            cluster_space: ClusterSpace::default(),
            bucket_key: BucketKey::default(),
            duplicate_literal: "Duplicate".to_string(),
            schema: SchemaConfig::default(),
            dump_tfidf: false,
            dump_embedding: false,
        }
    }
}

/// How one project ended up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProjectOutcome {
    /// All six artifacts written.
    Analyzed,
    /// Summary-only row; clustering (and possibly detection) skipped.
    Degraded(String),
    /// Nothing usable; other projects unaffected.
    Failed(String),
}

/// Per-project outcomes of one run.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub projects: Vec<(String, ProjectOutcome)>,
}

impl RunSummary {
    pub fn any_failed(&self) -> bool {
        self.projects
            .iter()
            .any(|(_, o)| matches!(o, ProjectOutcome::Failed(_)))
    }
}

/// Runs the full pipeline. Configuration problems (missing inputs, bad
/// thresholds, unwritable output directory) fail fast before any artifact
/// is touched; per-project problems are contained.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    validate_config(config)?;
    fs::create_dir_all(&config.out_dir)?;

    let mut summary = RunSummary::default();
    let mut entries: Vec<ProjectReportEntry<f64>> = Vec::new();
    for input in &config.inputs {
        match analyze_project(config, input) {
            Ok(project) => {
                let outcome = match &project.skip_reason {
                    None => ProjectOutcome::Analyzed,
                    Some(reason) => ProjectOutcome::Degraded(reason.clone()),
                };
                summary.projects.push((input.name.clone(), outcome));
                entries.push(ProjectReportEntry {
                    summary: project.summary,
                    themes: project.themes,
                    skip_reason: project.skip_reason,
                });
            }
            Err(e) => {
                warn_line(&input.path, None, &format!("project failed: {e}"));
                summary
                    .projects
                    .push((input.name.clone(), ProjectOutcome::Failed(e)));
            }
        }
    }
    if !entries.is_empty() {
        write_atomic(
            &config.out_dir.join("report.md"),
            write_report(&entries).as_bytes(),
        )?;
    }
    Ok(summary)
}

/// Parses every project and emits only the summary table (markdown).
pub fn run_summary_only(
    inputs: &[ProjectInput],
    schema: &SchemaConfig,
    duplicate_literal: &str,
) -> Result<(Vec<RepoSummary>, RunSummary), PipelineError> {
    validate_inputs(inputs)?;
    let mut summaries = Vec::new();
    let mut run = RunSummary::default();
    for input in inputs {
        match parse_project(&input.path, schema) {
            Ok((reports, diagnostics)) => {
                emit_diagnostics(&input.path, &diagnostics);
                summaries.push(dataset_summary(&input.name, &reports, duplicate_literal));
                run.projects
                    .push((input.name.clone(), ProjectOutcome::Analyzed));
            }
            Err(e) => {
                warn_line(&input.path, None, &format!("project failed: {e}"));
                run.projects
                    .push((input.name.clone(), ProjectOutcome::Failed(e)));
            }
        }
    }
    Ok((summaries, run))
}

fn validate_config(config: &PipelineConfig) -> Result<(), PipelineError> {
    validate_inputs(&config.inputs)?;
    if config.k == 0 {
        return Err(PipelineError::Config("k must be at least 1".into()));
    }
    let anomaly_config = AnomalyConfig {
        z_threshold: config.z_threshold,
        iqr_multiplier: config.iqr_multiplier,
    };
    anomaly_config
        .validate()
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    Ok(())
}

fn validate_inputs(inputs: &[ProjectInput]) -> Result<(), PipelineError> {
    if inputs.is_empty() {
        return Err(PipelineError::Config(
            "at least one --input is required".into(),
        ));
    }
    let mut names: Vec<&str> = inputs.iter().map(|i| i.name.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(PipelineError::Config("project names must be unique".into()));
    }
    for input in inputs {
        if input.name.is_empty()
            || input.name == "."
            || input.name == ".."
            || input.name.chars().any(std::path::is_separator)
        {
            return Err(PipelineError::Config(format!(
                "project name {:?} is not usable as a directory name",
                input.name
            )));
        }
        if !input.path.is_file() {
            return Err(PipelineError::Config(format!(
                "input file does not exist: {}",
                input.path.display()
            )));
        }
    }
    Ok(())
}

struct ProjectResult {
    summary: RepoSummary,
    themes: Option<Vec<ClusterTheme<f64>>>,
    skip_reason: Option<String>,
}

struct ResolvedBug {
    record: ResolutionRecord<f64>,
    resolved: chrono::DateTime<chrono::Utc>,
    summary: String,
}

fn parse_project(
    path: &Path,
    schema: &SchemaConfig,
) -> Result<(Vec<ingest::BugReport>, Vec<Diagnostic>), String> {
    let file = fs::File::open(path).map_err(|e| format!("cannot open: {e}"))?;
    let outcome =
        parse_bug_reports(std::io::BufReader::new(file), schema).map_err(|e| e.to_string())?;
    Ok((outcome.reports, outcome.diagnostics))
}

fn analyze_project(config: &PipelineConfig, input: &ProjectInput) -> Result<ProjectResult, String> {
    let (reports, diagnostics) = parse_project(&input.path, &config.schema)?;
    emit_diagnostics(&input.path, &diagnostics);
    let summary = dataset_summary(&input.name, &reports, &config.duplicate_literal);

    let mut resolved: Vec<ResolvedBug> = Vec::new();
    for report in &reports {
        match ingest::compute_resolution::<f64>(report) {
            ingest::ResolutionOutcome::Resolved(record) => resolved.push(ResolvedBug {
                record,
                resolved: report.resolved.expect("resolved record has a timestamp"),
                summary: report.summary.clone(),
            }),
            ingest::ResolutionOutcome::Unresolved => {}
            ingest::ResolutionOutcome::NegativeDuration { bug_id, days } => warn_line(
                &input.path,
                None,
                &format!("resolved precedes created for bug {bug_id} ({days:.3} days); excluded"),
            ),
        }
    }

    let project_dir = config.out_dir.join(&input.name);
    if project_dir.exists() {
        fs::remove_dir_all(&project_dir)
            .map_err(|e| format!("cannot clear {}: {e}", project_dir.display()))?;
    }
    fs::create_dir_all(&project_dir)
        .map_err(|e| format!("cannot create {}: {e}", project_dir.display()))?;
    let write = |name: &str, bytes: &[u8]| -> Result<(), String> {
        write_atomic(&project_dir.join(name), bytes)
            .map_err(|e| format!("cannot write {name}: {e}"))
    };

    let records: Vec<ResolutionRecord<f64>> = resolved.iter().map(|b| b.record.clone()).collect();
    let anomaly_config = AnomalyConfig {
        z_threshold: config.z_threshold,
        iqr_multiplier: config.iqr_multiplier,
    };

    let degrade = |reason: String, write_empty: bool| -> Result<ProjectResult, String> {
        warn_line(&input.path, None, &reason);
        if write_empty {
            write("anomalies.csv", anomalies_csv::<f64>(&[]).as_bytes())?;
            write(
                "monthly_counts.csv",
                monthly_csv(&MonthlyCounts::default()).as_bytes(),
            )?;
            let scatter = render_resolution_scatter(
                &figure_spec(FigureKind::ResolutionScatter, &input.name),
                &[],
                &empty_set(),
            )
            .map_err(|e| e.to_string())?;
            write("resolution_scatter.svg", scatter.as_bytes())?;
            let bars = render_monthly_bars(
                &figure_spec(FigureKind::MonthlyBars, &input.name),
                &MonthlyCounts::default(),
            )
            .map_err(|e| e.to_string())?;
            write("monthly_anomalies.svg", bars.as_bytes())?;
        }
        Ok(ProjectResult {
            summary: summary.clone(),
            themes: None,
            skip_reason: Some(reason),
        })
    };

    if records.is_empty() {
        return degrade(
            "no resolved bugs; anomaly detection skipped".to_string(),
            true,
        );
    }

    let set = detect_anomalies(&records, &anomaly_config).map_err(|e| e.to_string())?;

    write("anomalies.csv", anomalies_csv(&set.flags).as_bytes())?;

    let bucket_times: Vec<chrono::DateTime<chrono::Utc>> = resolved
        .iter()
        .zip(&set.flags)
        .filter(|(_, f)| f.is_anomaly)
        .map(|(b, _)| match config.bucket_key {
            BucketKey::Created => b.record.created,
            BucketKey::Resolved => b.resolved,
        })
        .collect();
    let monthly = monthly_counts(&bucket_times);
    write("monthly_counts.csv", monthly_csv(&monthly).as_bytes())?;
    let bars = render_monthly_bars(&figure_spec(FigureKind::MonthlyBars, &input.name), &monthly)
        .map_err(|e| e.to_string())?;
    write("monthly_anomalies.svg", bars.as_bytes())?;
    let scatter = render_resolution_scatter(
        &figure_spec(FigureKind::ResolutionScatter, &input.name),
        &records,
        &set,
    )
    .map_err(|e| e.to_string())?;
    write("resolution_scatter.svg", scatter.as_bytes())?;

    let anomalous: Vec<&ResolvedBug> = resolved
        .iter()
        .zip(&set.flags)
        .filter(|(_, f)| f.is_anomaly)
        .map(|(b, _)| b)
        .collect();
    if anomalous.is_empty() {
        return degrade("no anomalies; clustering skipped".to_string(), false);
    }
    if anomalous.len() < config.k {
        return degrade(
            format!(
                "anomaly count {} is below k = {}; clustering skipped",
                anomalous.len(),
                config.k
            ),
            false,
        );
    }

    let corpus: Vec<Vec<String>> = anomalous.iter().map(|b| tokenize(&b.summary)).collect();
    let vocab = match build_vocabulary(&corpus) {
        Ok(v) => v,
        Err(e) => return degrade(format!("{e}; clustering skipped"), false),
    };
    let matrix: DocTermMatrix<f64> = tfidf_matrix(&corpus, &vocab);
    if config.dump_tfidf {
        write("tfidf.json", matrix.to_debug_json().as_bytes())?;
    }

    let model = match pca_fit(&matrix, 2) {
        Ok(m) => m,
        Err(e) => return degrade(format!("{e}; clustering skipped"), false),
    };
    let embedding = pca_transform(&model, &matrix).map_err(|e| e.to_string())?;
    if config.dump_embedding {
        write(
            "embedding.csv",
            embedding_csv(&anomalous, &embedding).as_bytes(),
        )?;
    }

    let points: Vec<Vec<f64>> = match config.cluster_space {
        ClusterSpace::Pca2d => embedding.points.iter().map(|&(x, y)| vec![x, y]).collect(),
        ClusterSpace::Tfidf => matrix.to_dense(),
    };
    let kmeans_config = KMeansConfig {
        k: config.k,
        seed: config.seed,
        ..KMeansConfig::default()
    };
    let clustering = kmeans(&points, &kmeans_config).map_err(|e| e.to_string())?;
    let themes =
        cluster_top_terms(&matrix, &clustering, config.top_terms).map_err(|e| e.to_string())?;

    let ids: Vec<&str> = anomalous.iter().map(|b| b.record.bug_id.as_str()).collect();
    write(
        "clusters.json",
        clusters_json(config, &clustering, &themes, &ids).as_bytes(),
    )?;
    let cluster_svg = render_cluster_scatter(
        &figure_spec(FigureKind::ClusterScatter, &input.name),
        &embedding,
        &clustering,
    )
    .map_err(|e| e.to_string())?;
    write("cluster_scatter.svg", cluster_svg.as_bytes())?;

    Ok(ProjectResult {
        summary,
        themes: Some(themes),
        skip_reason: None,
    })
}

fn figure_spec(kind: FigureKind, project: &str) -> FigureSpec {
    let title = match kind {
        FigureKind::ResolutionScatter => {
            format!("Bug resolution times in {project} (anomalies in red)")
        }
        FigureKind::MonthlyBars => format!("Monthly anomaly counts in {project}"),
        FigureKind::ClusterScatter => format!("Clustering of anomalous summaries in {project}"),
    };
    FigureSpec::new(kind, title)
}

fn empty_set() -> AnomalySet<f64> {
    AnomalySet {
        stats: crate::anomaly::DistributionStats {
            mean: 0.0,
            std: 0.0,
            q1: 0.0,
            median: 0.0,
            q3: 0.0,
            iqr: 0.0,
        },
        flags: Vec::new(),
    }
}

/// CSV of the anomalous bugs only: which detector fired and the scores.
fn anomalies_csv<T: Real>(flags: &[crate::anomaly::BugFlags<T>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "bug_id",
        "resolution_days",
        "z_score",
        "z_flag",
        "iqr_flag",
        "is_anomaly",
    ])
    .expect("in-memory write");
    for f in flags.iter().filter(|f| f.is_anomaly) {
        w.write_record([
            f.bug_id.as_str(),
            &fmt_sig6(f.resolution_days.to_f64().unwrap_or(f64::NAN)),
            &fmt_sig6(f.z_score.to_f64().unwrap_or(f64::NAN)),
            bool_str(f.z_flag),
            bool_str(f.iqr_flag),
            bool_str(f.is_anomaly),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn bool_str(v: bool) -> &'static str {
    if v {
        "true"
    } else {
        "false"
    }
}

/// Formats with six significant digits (plain decimal notation).
fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn monthly_csv(series: &MonthlyCounts) -> String {
    let mut out = String::from("month,count\n");
    for (month, count) in &series.entries {
        out.push_str(&format!("{month},{count}\n"));
    }
    out
}

fn embedding_csv(bugs: &[&ResolvedBug], embedding: &Embedding2D<f64>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["bug_id", "x", "y"])
        .expect("in-memory write");
    for (bug, &(x, y)) in bugs.iter().zip(&embedding.points) {
        w.write_record([bug.record.bug_id.as_str(), &format!("{x}"), &format!("{y}")])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn clusters_json(
    config: &PipelineConfig,
    clustering: &Clustering<f64>,
    themes: &[ClusterTheme<f64>],
    ids: &[&str],
) -> String {
    #[derive(Serialize)]
    struct ClusterJson {
        index: usize,
        size: usize,
        top_terms: Vec<(String, f64)>,
        bug_ids: Vec<String>,
    }
    #[derive(Serialize)]
    struct ClustersJson {
        k: usize,
        seed: u64,
        inertia: f64,
        clusters: Vec<ClusterJson>,
    }
    let clusters = themes
        .iter()
        .map(|theme| ClusterJson {
            index: theme.cluster_index,
            size: theme.size,
            top_terms: theme.top_terms.clone(),
            bug_ids: ids
                .iter()
                .zip(&clustering.assignments)
                .filter(|&(_, &a)| a == theme.cluster_index)
                .map(|(id, _)| id.to_string())
                .collect(),
        })
        .collect();
    let doc = ClustersJson {
        k: config.k,
        seed: config.seed,
        inertia: clustering.inertia,
        clusters,
    };
    let mut json = serde_json::to_string_pretty(&doc).expect("serialization cannot fail");
    json.push('\n');
    json
}

/// `WARN <file>:<row>: <cause>` on standard error; `-` when no row applies.
fn warn_line(file: &Path, row: Option<u64>, cause: &str) {
    match row {
        Some(r) => eprintln!("WARN {}:{}: {}", file.display(), r, cause),
        None => eprintln!("WARN {}:-: {}", file.display(), cause),
    }
}

fn emit_diagnostics(file: &Path, diagnostics: &[Diagnostic]) {
    for d in diagnostics {
        warn_line(file, d.row, &d.cause);
    }
}

/// Writes through a temporary sibling then renames into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let file_name = path.file_name().and_then(|n| n.to_str()).ok_or_else(|| {
        std::io::Error::new(std::io::ErrorKind::InvalidInput, "bad artifact path")
    })?;
    let tmp = path.with_file_name(format!("{file_name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
