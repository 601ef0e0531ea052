//! Figure rendering and report tables.
//!
//! Figures are hand-emitted SVG: deterministic, diffable, and checkable by
//! XML parsing in tests. Identical inputs produce byte-identical documents.
//! Axis ticks sit on round numbers (1/2/5 x 10^n steps, at most 10 per
//! axis).

use thiserror::Error;

use crate::anomaly::{AnomalySet, MonthlyCounts};
use crate::cluster::{ClusterTheme, Clustering};
use crate::ingest::{RepoSummary, ResolutionRecord};
use crate::reduce::Embedding2D;
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("figure dimensions must be positive")]
    InvalidDimensions,
    #[error("figure payload does not match its kind")]
    KindMismatch,
    #[error("row counts differ: {left} vs {right}")]
    RowMismatch { left: usize, right: usize },
}

/// The three figure types the tool renders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKind {
    ResolutionScatter,
    MonthlyBars,
    ClusterScatter,
}

/// Figure geometry and caption.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureSpec {
    pub kind: FigureKind,
    pub title: String,
    pub width: u32,
    pub height: u32,
}

impl FigureSpec {
    /// Default 900x600 canvas.
    pub fn new(kind: FigureKind, title: impl Into<String>) -> Self {
        FigureSpec {
            kind,
            title: title.into(),
            width: 900,
            height: 600,
        }
    }

    fn validate(&self, kind: FigureKind) -> Result<(), ReportError> {
        if self.width == 0 || self.height == 0 {
            return Err(ReportError::InvalidDimensions);
        }
        if self.kind != kind {
            return Err(ReportError::KindMismatch);
        }
        Ok(())
    }
}

/// Fixed palette; cluster `i` uses `PALETTE[i % 8]`.
pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

const NEUTRAL_POINT: &str = "#4878a8";
const ANOMALY_POINT: &str = "#d62728";
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 64.0;
const LEGEND_WIDTH: f64 = 150.0;

/// Scatter of resolution time over creation date, anomalies in red.
pub fn render_resolution_scatter<T: Real>(
    spec: &FigureSpec,
    records: &[ResolutionRecord<T>],
    anomalies: &AnomalySet<T>,
) -> Result<String, ReportError> {
    spec.validate(FigureKind::ResolutionScatter)?;
    if records.len() != anomalies.flags.len() {
        return Err(ReportError::RowMismatch {
            left: records.len(),
            right: anomalies.flags.len(),
        });
    }

    let xs: Vec<f64> = records.iter().map(|r| epoch_days(r.created)).collect();
    let ys: Vec<f64> = records
        .iter()
        .map(|r| r.resolution_days.to_f64().unwrap_or(0.0))
        .collect();
    let mut svg = SvgCanvas::new(spec);
    if records.is_empty() {
        svg.empty_axes("created (UTC)", "resolution time (days)");
        return Ok(svg.finish());
    }
    let x_range = min_max(&xs);
    let y_range = min_max(&ys);
    svg.axes_with_ticks(
        x_range,
        y_range,
        &date_ticks(x_range),
        &numeric_ticks(y_range, false),
        "created (UTC)",
        "resolution time (days)",
    );
    for ((x, y), flags) in xs.iter().zip(&ys).zip(&anomalies.flags) {
        let (px, py) = svg.project(*x, *y, x_range, y_range);
        let class = if flags.is_anomaly { "pt anomaly" } else { "pt" };
        svg.push(&format!(
            r#"<circle class="{class}" cx="{}" cy="{}" r="3"/>"#,
            fmt2(px),
            fmt2(py)
        ));
    }
    Ok(svg.finish())
}

/// Bar chart of monthly anomaly counts, one bar per month including zeros.
pub fn render_monthly_bars(
    spec: &FigureSpec,
    series: &MonthlyCounts,
) -> Result<String, ReportError> {
    spec.validate(FigureKind::MonthlyBars)?;
    let mut svg = SvgCanvas::new(spec);
    if series.entries.is_empty() {
        svg.empty_axes("month", "anomaly count");
        return Ok(svg.finish());
    }
    let max_count = series
        .entries
        .iter()
        .map(|&(_, c)| c)
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    let y_range = (0.0, max_count);
    let plot = svg.plot_rect();
    svg.axes_with_ticks(
        (0.0, 1.0),
        y_range,
        &[],
        &numeric_ticks(y_range, true),
        "month",
        "anomaly count",
    );
    let n = series.entries.len();
    let slot = plot.width / n as f64;
    let bar_w = slot * 0.8;
    let label_stride = n.div_ceil(10);
    for (i, (month, count)) in series.entries.iter().enumerate() {
        let x = plot.x + slot * i as f64 + (slot - bar_w) / 2.0;
        let h = plot.height * (*count as f64) / max_count;
        let y = plot.y + plot.height - h;
        svg.push(&format!(
            r#"<rect class="bar" x="{}" y="{}" width="{}" height="{}"/>"#,
            fmt2(x),
            fmt2(y),
            fmt2(bar_w),
            fmt2(h)
        ));
        if i % label_stride == 0 {
            svg.push(&format!(
                r#"<text class="tick-label" x="{}" y="{}" text-anchor="middle">{}</text>"#,
                fmt2(plot.x + slot * (i as f64 + 0.5)),
                fmt2(plot.y + plot.height + 16.0),
                escape(&month.to_string())
            ));
        }
    }
    Ok(svg.finish())
}

/// Scatter of the 2-D embedding colored by cluster, with a sized legend.
pub fn render_cluster_scatter<T: Real>(
    spec: &FigureSpec,
    embedding: &Embedding2D<T>,
    clustering: &Clustering<T>,
) -> Result<String, ReportError> {
    spec.validate(FigureKind::ClusterScatter)?;
    if embedding.len() != clustering.assignments.len() {
        return Err(ReportError::RowMismatch {
            left: embedding.len(),
            right: clustering.assignments.len(),
        });
    }
    let k = clustering.centroids.len();
    let mut sizes = vec![0usize; k];
    for &a in &clustering.assignments {
        sizes[a] += 1;
    }

    let mut svg = SvgCanvas::with_right_margin(spec, LEGEND_WIDTH);
    let xs: Vec<f64> = embedding
        .points
        .iter()
        .map(|p| p.0.to_f64().unwrap_or(0.0))
        .collect();
    let ys: Vec<f64> = embedding
        .points
        .iter()
        .map(|p| p.1.to_f64().unwrap_or(0.0))
        .collect();
    if embedding.is_empty() {
        svg.empty_axes("pc1", "pc2");
    } else {
        let x_range = min_max(&xs);
        let y_range = min_max(&ys);
        svg.axes_with_ticks(
            x_range,
            y_range,
            &numeric_ticks(x_range, false),
            &numeric_ticks(y_range, false),
            "pc1",
            "pc2",
        );
        for ((x, y), &a) in xs.iter().zip(&ys).zip(&clustering.assignments) {
            let (px, py) = svg.project(*x, *y, x_range, y_range);
            let color = PALETTE[a % PALETTE.len()];
            svg.push(&format!(
                r#"<circle class="pt" cx="{}" cy="{}" r="3" fill="{color}"/>"#,
                fmt2(px),
                fmt2(py)
            ));
        }
    }
    let legend_x = f64::from(spec.width) - LEGEND_WIDTH + 8.0;
    for (c, &size) in sizes.iter().enumerate() {
        let y = MARGIN_TOP + 14.0 + 18.0 * c as f64;
        let color = PALETTE[c % PALETTE.len()];
        svg.push(&format!(
            r#"<rect class="legend-swatch" x="{}" y="{}" width="12" height="12" fill="{color}"/>"#,
            fmt2(legend_x),
            fmt2(y - 10.0)
        ));
        svg.push(&format!(
            r#"<text class="legend-label" x="{}" y="{}">cluster {c} (n={size})</text>"#,
            fmt2(legend_x + 18.0),
            fmt2(y)
        ));
    }
    Ok(svg.finish())
}

/// One project's contribution to the cross-project report.
#[derive(Debug, Clone)]
pub struct ProjectReportEntry<T> {
    pub summary: RepoSummary,
    /// `None` when clustering was skipped for this project.
    pub themes: Option<Vec<ClusterTheme<T>>>,
    pub skip_reason: Option<String>,
}

/// Markdown table of per-project totals, duplicates, and duplicate rates.
pub fn summary_table(summaries: &[RepoSummary]) -> String {
    let mut md = String::from("| Project | Total Reports | Duplicates | Duplicate Rate (%) |\n");
    md.push_str("|---|---|---|---|\n");
    for s in summaries {
        md.push_str(&format!(
            "| {} | {} | {} | {:.1} |\n",
            escape_md(&s.project),
            s.total_reports,
            s.duplicates,
            s.duplicate_rate_pct
        ));
    }
    md
}

/// The cross-project markdown report: the summary table plus a
/// project/cluster/keywords table, with skipped projects noted underneath.
pub fn write_report<T: Real>(entries: &[ProjectReportEntry<T>]) -> String {
    let mut md = String::from("# Resolution Time Anomaly Report\n\n## Project Summary\n\n");
    let summaries: Vec<RepoSummary> = entries.iter().map(|e| e.summary.clone()).collect();
    md.push_str(&summary_table(&summaries));

    md.push_str("\n## Anomaly Cluster Themes\n\n");
    md.push_str("| Project | Cluster | Themes/Keywords |\n|---|---|---|\n");
    for entry in entries {
        if let Some(themes) = &entry.themes {
            for theme in themes {
                let keywords: Vec<&str> = theme.top_terms.iter().map(|(t, _)| t.as_str()).collect();
                md.push_str(&format!(
                    "| {} | {} | {} |\n",
                    escape_md(&entry.summary.project),
                    theme.cluster_index,
                    keywords.join(", ")
                ));
            }
        }
    }
    let skipped: Vec<&ProjectReportEntry<T>> =
        entries.iter().filter(|e| e.themes.is_none()).collect();
    if !skipped.is_empty() {
        md.push('\n');
        for entry in skipped {
            let reason = entry.skip_reason.as_deref().unwrap_or("clustering skipped");
            md.push_str(&format!(
                "- {}: {}\n",
                escape_md(&entry.summary.project),
                reason
            ));
        }
    }
    md
}

fn epoch_days(ts: chrono::DateTime<chrono::Utc>) -> f64 {
    ts.timestamp() as f64 / 86_400.0
}

fn min_max(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Smallest 1/2/5 x 10^n step of at least `raw`.
fn nice_step(raw: f64) -> f64 {
    let power = 10f64.powf(raw.log10().floor());
    for mult in [1.0, 2.0, 5.0, 10.0] {
        let step = mult * power;
        if step >= raw {
            return step;
        }
    }
    10.0 * power
}

/// Round-number tick positions covering the range, at most 10 of them.
fn numeric_ticks((lo, hi): (f64, f64), integer: bool) -> Vec<(f64, String)> {
    if hi <= lo {
        return vec![(lo, fmt_tick(lo, 1.0))];
    }
    let mut step = nice_step((hi - lo) / 9.0);
    if integer {
        step = step.max(1.0);
    }
    let mut ticks = Vec::new();
    let mut t = (lo / step).ceil() * step;
    while t <= hi + step * 1e-9 {
        ticks.push((t, fmt_tick(t, step)));
        t += step;
    }
    ticks
}

/// Date-labelled ticks for an epoch-day axis, stepped on whole days.
fn date_ticks((lo, hi): (f64, f64)) -> Vec<(f64, String)> {
    let label = |days: f64| {
        chrono::DateTime::from_timestamp((days as i64) * 86_400, 0)
            .map(|dt| dt.date_naive().to_string())
            .unwrap_or_default()
    };
    if hi <= lo {
        return vec![(lo, label(lo))];
    }
    let step = nice_step((hi - lo) / 9.0).max(1.0);
    let mut ticks = Vec::new();
    let mut t = (lo / step).ceil() * step;
    while t <= hi + step * 1e-9 {
        ticks.push((t, label(t)));
        t += step;
    }
    ticks
}

fn fmt_tick(value: f64, step: f64) -> String {
    let decimals = if step >= 1.0 {
        0
    } else {
        (-step.log10().floor()) as usize
    };
    format!("{value:.decimals$}")
}

fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn escape_md(text: &str) -> String {
    text.replace('|', "\\|")
}

struct PlotRect {
    x: f64,
    y: f64,
    width: f64,
    height: f64,
}

/// Incremental SVG builder with fixed margins and a title slot.
struct SvgCanvas {
    body: String,
    width: f64,
    height: f64,
    right_margin: f64,
}

impl SvgCanvas {
    fn new(spec: &FigureSpec) -> Self {
        Self::with_right_margin(spec, MARGIN_RIGHT)
    }

    fn with_right_margin(spec: &FigureSpec, right_margin: f64) -> Self {
        let width = f64::from(spec.width);
        let height = f64::from(spec.height);
        let w = fmt2(width);
        let h = fmt2(height);
        let mut body = String::new();
        body.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
        ));
        body.push_str(&format!(
            "<style>text{{font-family:sans-serif;font-size:12px}}\
             .title{{font-size:16px}}\
             .axis{{stroke:#333333;stroke-width:1}}\
             .tick{{stroke:#333333;stroke-width:1}}\
             .pt{{fill:{NEUTRAL_POINT};fill-opacity:0.75}}\
             .pt.anomaly{{fill:{ANOMALY_POINT};fill-opacity:0.9}}\
             .bar{{fill:{NEUTRAL_POINT}}}</style>\n"
        ));
        body.push_str(&format!(
            "<rect width=\"{w}\" height=\"{h}\" fill=\"#ffffff\"/>\n"
        ));
        body.push_str(&format!(
            "<text class=\"title\" x=\"{}\" y=\"24\" text-anchor=\"middle\">{}</text>\n",
            fmt2(width / 2.0),
            escape(&spec.title)
        ));
        SvgCanvas {
            body,
            width,
            height,
            right_margin,
        }
    }

    fn plot_rect(&self) -> PlotRect {
        PlotRect {
            x: MARGIN_LEFT,
            y: MARGIN_TOP,
            width: self.width - MARGIN_LEFT - self.right_margin,
            height: self.height - MARGIN_TOP - MARGIN_BOTTOM,
        }
    }

    fn project(
        &self,
        x: f64,
        y: f64,
        (x_lo, x_hi): (f64, f64),
        (y_lo, y_hi): (f64, f64),
    ) -> (f64, f64) {
        let plot = self.plot_rect();
        let fx = if x_hi > x_lo {
            (x - x_lo) / (x_hi - x_lo)
        } else {
            0.5
        };
        let fy = if y_hi > y_lo {
            (y - y_lo) / (y_hi - y_lo)
        } else {
            0.5
        };
        (plot.x + fx * plot.width, plot.y + (1.0 - fy) * plot.height)
    }

    fn axis_frame(&mut self, x_label: &str, y_label: &str) {
        let plot = self.plot_rect();
        let x0 = plot.x;
        let y0 = plot.y + plot.height;
        self.push(&format!(
            r#"<line class="axis" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            fmt2(x0),
            fmt2(y0),
            fmt2(x0 + plot.width),
            fmt2(y0)
        ));
        self.push(&format!(
            r#"<line class="axis" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            fmt2(x0),
            fmt2(plot.y),
            fmt2(x0),
            fmt2(y0)
        ));
        self.push(&format!(
            r#"<text class="axis-label" x="{}" y="{}" text-anchor="middle">{}</text>"#,
            fmt2(x0 + plot.width / 2.0),
            fmt2(self.height - 16.0),
            escape(x_label)
        ));
        self.push(&format!(
            r#"<text class="axis-label" x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            fmt2(plot.y + plot.height / 2.0),
            fmt2(plot.y + plot.height / 2.0),
            escape(y_label)
        ));
    }

    fn axes_with_ticks(
        &mut self,
        x_range: (f64, f64),
        y_range: (f64, f64),
        x_ticks: &[(f64, String)],
        y_ticks: &[(f64, String)],
        x_label: &str,
        y_label: &str,
    ) {
        self.axis_frame(x_label, y_label);
        let plot = self.plot_rect();
        let y0 = plot.y + plot.height;
        for (value, label) in x_ticks {
            let (px, _) = self.project(*value, 0.0, x_range, (0.0, 1.0));
            self.push(&format!(
                r#"<line class="tick" x1="{0}" y1="{1}" x2="{0}" y2="{2}"/>"#,
                fmt2(px),
                fmt2(y0),
                fmt2(y0 + 5.0)
            ));
            self.push(&format!(
                r#"<text class="tick-label" x="{}" y="{}" text-anchor="middle">{}</text>"#,
                fmt2(px),
                fmt2(y0 + 18.0),
                escape(label)
            ));
        }
        for (value, label) in y_ticks {
            let (_, py) = self.project(0.0, *value, (0.0, 1.0), y_range);
            self.push(&format!(
                r#"<line class="tick" x1="{1}" y1="{0}" x2="{2}" y2="{0}"/>"#,
                fmt2(py),
                fmt2(plot.x - 5.0),
                fmt2(plot.x)
            ));
            self.push(&format!(
                r#"<text class="tick-label" x="{}" y="{}" text-anchor="end">{}</text>"#,
                fmt2(plot.x - 8.0),
                fmt2(py + 4.0),
                escape(label)
            ));
        }
    }

    fn empty_axes(&mut self, x_label: &str, y_label: &str) {
        self.axis_frame(x_label, y_label);
        let plot = self.plot_rect();
        self.push(&format!(
            r#"<text class="no-data" x="{}" y="{}" text-anchor="middle">no data</text>"#,
            fmt2(plot.x + plot.width / 2.0),
            fmt2(plot.y + plot.height / 2.0)
        ));
    }

    fn push(&mut self, element: &str) {
        self.body.push_str(element);
        self.body.push('\n');
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}
