//! Issue-tracker CSV ingestion.
//!
//! Parses per-project CSV exports into [`BugReport`]s, normalizes the
//! heterogeneous timestamp formats found in Jira and Bugzilla dumps, computes
//! resolution durations, and derives per-repository summary statistics.
//!
//! Malformed rows never abort a parse and are never silently dropped: each
//! one produces a [`Diagnostic`] carrying the file line it came from.

use std::io::Read;

use chrono::{DateTime, NaiveDateTime, TimeZone, Utc};
use thiserror::Error;

use crate::scalar::{real, Real};

/// Errors that abort a parse entirely (as opposed to per-row diagnostics).
#[derive(Debug, Error)]
pub enum IngestError {
    /// The header row lacks one or more required mapped columns.
    #[error("missing required columns: {}", .0.join(", "))]
    MissingColumns(Vec<String>),
    #[error("csv read error: {0}")]
    Csv(#[from] csv::Error),
    #[error("schema file error: {0}")]
    Schema(String),
}

/// Maps the logical bug-report fields onto the actual CSV column names.
///
/// Defaults match Jira-style tracker exports: `Issue key`, `Created`,
/// `Resolved`, `Priority`, `Status`, `Resolution`, `Summary`.
///
/// The `id`, `created`, `resolved`, and `summary` columns must exist in the
/// header; `priority`, `status`, and `resolution` are optional and parse as
/// absent when their column is missing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaConfig {
    pub id: String,
    pub created: String,
    pub resolved: String,
    pub priority: String,
    pub status: String,
    pub resolution: String,
    pub summary: String,
    /// Column whose value marks duplicate reports. `None` means the
    /// resolution column doubles as the marker.
    pub duplicate_marker: Option<String>,
}

impl Default for SchemaConfig {
    fn default() -> Self {
        SchemaConfig {
            id: "Issue key".to_string(),
            created: "Created".to_string(),
            resolved: "Resolved".to_string(),
            priority: "Priority".to_string(),
            status: "Status".to_string(),
            resolution: "Resolution".to_string(),
            summary: "Summary".to_string(),
            duplicate_marker: None,
        }
    }
}

impl SchemaConfig {
    /// Parses a `key = value` schema file on top of the defaults.
    ///
    /// Accepts `#`/`;` comments and blank lines; values may be wrapped in
    /// single or double quotes (needed for column names with spaces in
    /// stricter TOML editors, harmless otherwise). Recognized keys are the
    /// seven logical fields plus `duplicate_marker`.
    pub fn parse(text: &str) -> Result<SchemaConfig, IngestError> {
        let mut schema = SchemaConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                IngestError::Schema(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            let value = unquote(value.trim());
            if value.is_empty() {
                return Err(IngestError::Schema(format!(
                    "line {}: empty value for {key}",
                    lineno + 1
                )));
            }
            match key {
                "id" => schema.id = value,
                "created" => schema.created = value,
                "resolved" => schema.resolved = value,
                "priority" => schema.priority = value,
                "status" => schema.status = value,
                "resolution" => schema.resolution = value,
                "summary" => schema.summary = value,
                "duplicate_marker" => schema.duplicate_marker = Some(value),
                other => {
                    return Err(IngestError::Schema(format!(
                        "line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(schema)
    }
}

fn unquote(s: &str) -> String {
    let b = s.as_bytes();
    if b.len() >= 2
        && (b[0] == b'"' && b[b.len() - 1] == b'"' || b[0] == b'\'' && b[b.len() - 1] == b'\'')
    {
        s[1..s.len() - 1].to_string()
    } else {
        s.to_string()
    }
}

/// One parsed issue-tracker row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BugReport {
    pub id: String,
    pub created: DateTime<Utc>,
    pub resolved: Option<DateTime<Utc>>,
    pub priority: Option<String>,
    pub status: Option<String>,
    pub resolution: Option<String>,
    /// Free text; may be empty.
    pub summary: String,
    /// Raw value of the configured duplicate-marker column (the resolution
    /// column unless remapped), captured at parse time so summaries can count
    /// duplicates against any column of the export.
    pub duplicate_marker: Option<String>,
}

/// A resolved bug with its resolution duration in fractional days.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionRecord<T> {
    pub bug_id: String,
    pub created: DateTime<Utc>,
    /// Days between creation and resolution; never negative.
    pub resolution_days: T,
}

/// Per-repository counts for the summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct RepoSummary {
    pub project: String,
    pub total_reports: usize,
    pub duplicates: usize,
    /// Percentage rounded to one decimal; 0.0 for an empty project.
    pub duplicate_rate_pct: f64,
}

/// A per-row data-quality note. `row` is the 1-based line in the source file
/// where the record starts, when known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub row: Option<u64>,
    pub cause: String,
}

impl Diagnostic {
    fn at(row: Option<u64>, cause: impl Into<String>) -> Self {
        Diagnostic {
            row,
            cause: cause.into(),
        }
    }
}

/// Result of parsing one CSV stream: every data row lands in exactly one of
/// the two vectors (as a report, or as a diagnostic).
#[derive(Debug, Default)]
pub struct ParseOutcome {
    pub reports: Vec<BugReport>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Parses an issue-tracker CSV export.
///
/// The stream must be UTF-8 with a header row; fields are comma-separated
/// with double-quote quoting, and quoted fields may embed commas and
/// newlines. Reports come back in file order.
pub fn parse_bug_reports<R: Read>(
    reader: R,
    schema: &SchemaConfig,
) -> Result<ParseOutcome, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(false)
        .from_reader(reader);

    let headers: Vec<String> = rdr
        .headers()?
        .iter()
        .enumerate()
        // Exports frequently lead with a UTF-8 BOM glued to the first header.
        .map(|(i, h)| {
            if i == 0 {
                h.trim_start_matches('\u{feff}').to_string()
            } else {
                h.to_string()
            }
        })
        .collect();
    let col = |name: &str| headers.iter().position(|h| h == name);

    let mut missing = Vec::new();
    let mut require = |logical: &str, actual: &str| -> usize {
        match col(actual) {
            Some(i) => i,
            None => {
                missing.push(format!("{logical} ({actual:?})"));
                usize::MAX
            }
        }
    };
    let id_idx = require("id", &schema.id);
    let created_idx = require("created", &schema.created);
    let resolved_idx = require("resolved", &schema.resolved);
    let summary_idx = require("summary", &schema.summary);
    let marker_idx = schema
        .duplicate_marker
        .as_ref()
        .map(|name| require("duplicate_marker", name));
    if !missing.is_empty() {
        return Err(IngestError::MissingColumns(missing));
    }
    let priority_idx = col(&schema.priority);
    let status_idx = col(&schema.status);
    let resolution_idx = col(&schema.resolution);
    let marker_idx = marker_idx.or(resolution_idx);

    let mut out = ParseOutcome::default();
    for result in rdr.records() {
        let record = match result {
            Ok(r) => r,
            Err(e) => {
                let row = e.position().map(|p| p.line());
                out.diagnostics
                    .push(Diagnostic::at(row, format!("malformed row: {e}")));
                continue;
            }
        };
        let row = record.position().map(|p| p.line());
        let cell = |idx: usize| record.get(idx).unwrap_or("");
        let opt_cell = |idx: Option<usize>| -> Option<String> {
            idx.map(|i| cell(i).trim())
                .filter(|s| !s.is_empty())
                .map(str::to_string)
        };

        let id = cell(id_idx).trim();
        if id.is_empty() {
            out.diagnostics.push(Diagnostic::at(row, "empty id"));
            continue;
        }
        let created_raw = cell(created_idx).trim();
        let created = match parse_timestamp(created_raw) {
            Some(ts) => ts,
            None => {
                out.diagnostics.push(Diagnostic::at(
                    row,
                    format!("unparseable created timestamp {created_raw:?}"),
                ));
                continue;
            }
        };
        let resolved_raw = cell(resolved_idx).trim();
        let resolved = if resolved_raw.is_empty() {
            None
        } else {
            match parse_timestamp(resolved_raw) {
                Some(ts) => Some(ts),
                None => {
                    out.diagnostics.push(Diagnostic::at(
                        row,
                        format!("unparseable resolved timestamp {resolved_raw:?}"),
                    ));
                    continue;
                }
            }
        };

        out.reports.push(BugReport {
            id: id.to_string(),
            created,
            resolved,
            priority: opt_cell(priority_idx),
            status: opt_cell(status_idx),
            resolution: opt_cell(resolution_idx),
            summary: cell(summary_idx).to_string(),
            duplicate_marker: opt_cell(marker_idx),
        });
    }
    Ok(out)
}

/// Parses the timestamp formats seen across tracker exports. Naive
/// timestamps (no offset) are interpreted as UTC.
///
/// Accepted: RFC 3339 / ISO-8601 with offset, ISO-8601 without offset,
/// `YYYY-MM-DD HH:MM:SS`, and Jira's `DD/Mon/YY HH:MM`. Fractional seconds
/// are allowed where ISO permits them.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.with_timezone(&Utc));
    }
    for fmt in [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%d/%b/%y %H:%M",
    ] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(Utc.from_utc_datetime(&naive));
        }
    }
    None
}

/// Outcome of turning a report into an analysis record.
#[derive(Debug, Clone, PartialEq)]
pub enum ResolutionOutcome<T> {
    Resolved(ResolutionRecord<T>),
    /// No resolved timestamp; the bug is excluded from duration analysis.
    Unresolved,
    /// Resolved precedes created; excluded from analysis rather than clamped.
    NegativeDuration {
        bug_id: String,
        days: T,
    },
}

/// Computes the resolution duration of a report in fractional days.
pub fn compute_resolution<T: Real>(report: &BugReport) -> ResolutionOutcome<T> {
    let resolved = match report.resolved {
        Some(ts) => ts,
        None => return ResolutionOutcome::Unresolved,
    };
    let delta = resolved.signed_duration_since(report.created);
    let seconds = delta.num_seconds() as f64 + f64::from(delta.subsec_nanos()) * 1e-9;
    let days: T = real(seconds / 86_400.0);
    if resolved < report.created {
        ResolutionOutcome::NegativeDuration {
            bug_id: report.id.clone(),
            days,
        }
    } else {
        ResolutionOutcome::Resolved(ResolutionRecord {
            bug_id: report.id.clone(),
            created: report.created,
            resolution_days: days,
        })
    }
}

/// Convenience wrapper: durations for every resolved report, plus one
/// diagnostic per negative-duration report.
pub fn resolution_records<T: Real>(
    reports: &[BugReport],
) -> (Vec<ResolutionRecord<T>>, Vec<Diagnostic>) {
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    for report in reports {
        match compute_resolution::<T>(report) {
            ResolutionOutcome::Resolved(r) => records.push(r),
            ResolutionOutcome::Unresolved => {}
            ResolutionOutcome::NegativeDuration { bug_id, days } => {
                diagnostics.push(Diagnostic::at(
                    None,
                    format!("resolved precedes created for bug {bug_id} ({days} days); excluded"),
                ))
            }
        }
    }
    (records, diagnostics)
}

/// Counts reports and duplicate-marked reports for one project.
///
/// A report is a duplicate when its captured marker value equals
/// `duplicate_literal`, compared case-insensitively.
pub fn dataset_summary(
    project: &str,
    reports: &[BugReport],
    duplicate_literal: &str,
) -> RepoSummary {
    let needle = duplicate_literal.to_lowercase();
    let duplicates = reports
        .iter()
        .filter(|r| {
            r.duplicate_marker
                .as_deref()
                .is_some_and(|m| m.to_lowercase() == needle)
        })
        .count();
    let total = reports.len();
    let rate = if total > 0 {
        (1000.0 * duplicates as f64 / total as f64).round() / 10.0
    } else {
        0.0
    };
    RepoSummary {
        project: project.to_string(),
        total_reports: total,
        duplicates,
        duplicate_rate_pct: rate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "Issue key,Created,Resolved,Priority,Status,Resolution,Summary";

    fn parse(text: &str) -> ParseOutcome {
        parse_bug_reports(text.as_bytes(), &SchemaConfig::default()).unwrap()
    }

    #[test]
    fn one_valid_row() {
        let out = parse(&format!(
            "{HEADER}\nCASS-1,2020-01-01 10:00:00,2020-01-05 10:00:00,Major,Resolved,Fixed,npe in reader\n"
        ));
        assert_eq!(out.reports.len(), 1);
        assert!(out.diagnostics.is_empty());
        let r = &out.reports[0];
        assert_eq!(r.id, "CASS-1");
        assert_eq!(r.summary, "npe in reader");
        assert_eq!(r.resolution.as_deref(), Some("Fixed"));
        assert_eq!(r.duplicate_marker.as_deref(), Some("Fixed"));
    }

    #[test]
    fn empty_resolved_cell_parses_as_unresolved() {
        let out = parse(&format!(
            "{HEADER}\nCASS-2,2020-01-01 10:00:00,,Major,Open,,pending\n"
        ));
        assert_eq!(out.reports.len(), 1);
        assert!(out.reports[0].resolved.is_none());
        assert!(out.diagnostics.is_empty());
    }

    #[test]
    fn bad_created_rejected_with_row_number() {
        let out = parse(&format!(
            "{HEADER}\nCASS-1,2020-01-01 10:00:00,,,,,ok\nCASS-2,not-a-date,,,,,bad\n"
        ));
        assert_eq!(out.reports.len(), 1);
        assert_eq!(out.diagnostics.len(), 1);
        assert_eq!(out.diagnostics[0].row, Some(3));
        assert!(out.diagnostics[0].cause.contains("not-a-date"));
    }

    #[test]
    fn empty_summary_is_not_an_error() {
        let out = parse(&format!("{HEADER}\nCASS-3,2020-01-01 10:00:00,,,,,\n"));
        assert_eq!(out.reports.len(), 1);
        assert_eq!(out.reports[0].summary, "");
    }

    #[test]
    fn missing_header_is_fatal_and_names_logical_columns() {
        let err = parse_bug_reports("Key,Opened,Summary\n".as_bytes(), &SchemaConfig::default())
            .unwrap_err();
        match err {
            IngestError::MissingColumns(cols) => {
                let joined = cols.join(";");
                assert!(joined.contains("id"));
                assert!(joined.contains("created"));
                assert!(joined.contains("resolved"));
                assert!(!joined.contains("summary ("), "summary present: {joined}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn quoted_summary_with_comma_and_newline() {
        let out = parse(&format!(
            "{HEADER}\nCASS-4,2020-01-01 10:00:00,,,,,\"crash, then\nhang\"\n"
        ));
        assert_eq!(out.reports.len(), 1);
        assert_eq!(out.reports[0].summary, "crash, then\nhang");
    }

    #[test]
    fn row_conservation_on_mixed_input() {
        let out = parse(&format!(
            "{HEADER}\nA,2020-01-01 00:00:00,,,,,x\nB,nope,,,,,x\n,2020-01-01 00:00:00,,,,,x\nD,2020-01-02 00:00:00,garbled,,,,x\n"
        ));
        assert_eq!(out.reports.len() + out.diagnostics.len(), 4);
    }

    #[test]
    fn timestamp_formats_and_timezone_stability() {
        let a = parse_timestamp("2020-03-01T12:00:00Z").unwrap();
        let b = parse_timestamp("2020-03-01T14:00:00+02:00").unwrap();
        assert_eq!(a, b);
        assert_eq!(parse_timestamp("2020-03-01 12:00:00"), Some(a));
        assert_eq!(parse_timestamp("2020-03-01T12:00:00"), Some(a));
        let jira = parse_timestamp("01/Mar/20 12:00").unwrap();
        assert_eq!(jira, a);
        assert!(parse_timestamp("2020-13-40 99:00:00").is_none());
        assert!(parse_timestamp("").is_none());
    }

    #[test]
    fn resolution_examples() {
        let report = BugReport {
            id: "X".into(),
            created: parse_timestamp("2020-01-01T00:00:00Z").unwrap(),
            resolved: Some(parse_timestamp("2020-01-03T12:00:00Z").unwrap()),
            priority: None,
            status: None,
            resolution: None,
            summary: String::new(),
            duplicate_marker: None,
        };
        match compute_resolution::<f64>(&report) {
            ResolutionOutcome::Resolved(r) => assert_eq!(r.resolution_days, 2.5),
            other => panic!("{other:?}"),
        }

        let unresolved = BugReport {
            resolved: None,
            ..report.clone()
        };
        assert_eq!(
            compute_resolution::<f64>(&unresolved),
            ResolutionOutcome::Unresolved
        );

        let zero = BugReport {
            resolved: Some(report.created),
            ..report.clone()
        };
        match compute_resolution::<f64>(&zero) {
            ResolutionOutcome::Resolved(r) => assert_eq!(r.resolution_days, 0.0),
            other => panic!("{other:?}"),
        }

        let negative = BugReport {
            resolved: Some(parse_timestamp("2019-12-31T00:00:00Z").unwrap()),
            ..report
        };
        match compute_resolution::<f64>(&negative) {
            ResolutionOutcome::NegativeDuration { bug_id, days } => {
                assert_eq!(bug_id, "X");
                assert!(days < 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_durations_are_excluded_not_clamped() {
        let created = parse_timestamp("2020-06-01T00:00:00Z").unwrap();
        let reports = vec![
            BugReport {
                id: "OK".into(),
                created,
                resolved: Some(parse_timestamp("2020-06-02T00:00:00Z").unwrap()),
                priority: None,
                status: None,
                resolution: None,
                summary: String::new(),
                duplicate_marker: None,
            },
            BugReport {
                id: "NEG".into(),
                created,
                resolved: Some(parse_timestamp("2020-05-01T00:00:00Z").unwrap()),
                priority: None,
                status: None,
                resolution: None,
                summary: String::new(),
                duplicate_marker: None,
            },
        ];
        let (records, diags) = resolution_records::<f64>(&reports);
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].bug_id, "OK");
        assert_eq!(diags.len(), 1);
        assert!(diags[0].cause.contains("NEG"));
    }

    #[test]
    fn summary_rates_match_known_projects() {
        fn fake_reports(total: usize, duplicates: usize) -> Vec<BugReport> {
            (0..total)
                .map(|i| BugReport {
                    id: format!("B-{i}"),
                    created: parse_timestamp("2020-01-01T00:00:00Z").unwrap(),
                    resolved: None,
                    priority: None,
                    status: None,
                    resolution: None,
                    summary: String::new(),
                    duplicate_marker: (i < duplicates).then(|| "Duplicate".to_string()),
                })
                .collect()
        }
        let s = dataset_summary("Cassandra", &fake_reports(4612, 300), "Duplicate");
        assert_eq!(
            (s.total_reports, s.duplicates, s.duplicate_rate_pct),
            (4612, 300, 6.5)
        );
        let s = dataset_summary("Thunderbird", &fake_reports(15192, 4200), "Duplicate");
        assert_eq!(
            (s.total_reports, s.duplicates, s.duplicate_rate_pct),
            (15192, 4200, 27.6)
        );
        let s = dataset_summary("Empty", &[], "Duplicate");
        assert_eq!(
            (s.total_reports, s.duplicates, s.duplicate_rate_pct),
            (0, 0, 0.0)
        );
    }

    #[test]
    fn duplicate_match_is_case_insensitive() {
        let out = parse(&format!(
            "{HEADER}\nA,2020-01-01 00:00:00,,,,DUPLICATE,x\nB,2020-01-01 00:00:00,,,,Fixed,x\n"
        ));
        let s = dataset_summary("p", &out.reports, "Duplicate");
        assert_eq!(s.duplicates, 1);
    }

    #[test]
    fn duplicate_marker_column_can_be_remapped() {
        let schema = SchemaConfig {
            duplicate_marker: Some("Status".to_string()),
            ..SchemaConfig::default()
        };
        let text = format!("{HEADER}\nA,2020-01-01 00:00:00,,,dup,Fixed,x\n");
        let out = parse_bug_reports(text.as_bytes(), &schema).unwrap();
        assert_eq!(out.reports[0].duplicate_marker.as_deref(), Some("dup"));
        assert_eq!(dataset_summary("p", &out.reports, "dup").duplicates, 1);
    }

    #[test]
    fn schema_file_parsing() {
        let schema = SchemaConfig::parse(
            "# comment\nid = \"Bug ID\"\ncreated=Opened\nduplicate_marker = Dup\n",
        )
        .unwrap();
        assert_eq!(schema.id, "Bug ID");
        assert_eq!(schema.created, "Opened");
        assert_eq!(schema.duplicate_marker.as_deref(), Some("Dup"));
        assert_eq!(schema.summary, "Summary");
        assert!(SchemaConfig::parse("nonsense").is_err());
        assert!(SchemaConfig::parse("colour = Blue").is_err());
    }

    #[test]
    fn bom_in_first_header_cell_is_stripped() {
        let text = format!("\u{feff}{HEADER}\nA,2020-01-01 00:00:00,,,,,x\n");
        let out = parse(&text);
        assert_eq!(out.reports.len(), 1);
    }
}
