//! Resolution-time outlier detection.
//!
//! Two detectors run over the resolved-bug durations and their union forms
//! the anomaly set:
//!
//! * z-score rule: `|x - mean| / std > threshold` (population std),
//! * IQR fence rule: `x < Q1 - m*IQR` or `x > Q3 + m*IQR`.
//!
//! Both comparisons are strict. Quartiles use linear interpolation at
//! position `p * (n - 1)` on the sorted sample.

use chrono::{DateTime, Datelike, Utc};
use thiserror::Error;

use crate::ingest::ResolutionRecord;
use crate::scalar::{real, real_count, Real};

#[derive(Debug, Error)]
pub enum AnomalyError {
    #[error("no resolved bugs")]
    Empty,
    #[error("anomaly thresholds must be strictly positive")]
    InvalidConfig,
}

/// Detector thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnomalyConfig<T> {
    pub z_threshold: T,
    pub iqr_multiplier: T,
}

impl<T: Real> Default for AnomalyConfig<T> {
    fn default() -> Self {
        AnomalyConfig {
            z_threshold: real(3.0),
            iqr_multiplier: real(1.5),
        }
    }
}

impl<T: Real> AnomalyConfig<T> {
    pub fn validate(&self) -> Result<(), AnomalyError> {
        let ok = |v: T| v.is_finite() && v > T::zero();
        if ok(self.z_threshold) && ok(self.iqr_multiplier) {
            Ok(())
        } else {
            Err(AnomalyError::InvalidConfig)
        }
    }
}

/// Summary statistics of a duration sample, in days.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionStats<T> {
    pub mean: T,
    /// Population standard deviation.
    pub std: T,
    pub q1: T,
    pub median: T,
    pub q3: T,
    pub iqr: T,
}

/// Mean, population std, and interpolated quartiles by direct summation.
pub fn distribution_stats<T: Real>(durations: &[T]) -> Result<DistributionStats<T>, AnomalyError> {
    if durations.is_empty() {
        return Err(AnomalyError::Empty);
    }
    let n: T = real_count(durations.len());
    let mut sum = T::zero();
    for &x in durations {
        sum = sum + x;
    }
    let mean = sum / n;
    let mut sq = T::zero();
    for &x in durations {
        let d = x - mean;
        sq = sq + d * d;
    }
    let std = (sq / n).sqrt();

    let mut sorted = durations.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("durations must be finite"));
    let q1 = quantile_type7(&sorted, 0.25);
    let median = quantile_type7(&sorted, 0.5);
    let q3 = quantile_type7(&sorted, 0.75);
    Ok(DistributionStats {
        mean,
        std,
        q1,
        median,
        q3,
        iqr: q3 - q1,
    })
}

/// Linear interpolation at position `p * (n - 1)` in an already-sorted slice.
fn quantile_type7<T: Real>(sorted: &[T], p: f64) -> T {
    let n = sorted.len();
    let pos = real::<T>(p) * real_count::<T>(n - 1);
    let lo = pos.floor().to_usize().expect("quantile position in range");
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    let frac = pos - pos.floor();
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Per-value z-score and flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZScore<T> {
    pub score: T,
    pub flagged: bool,
}

/// Z-scores against the sample statistics; a zero-variance sample yields
/// all-zero scores and no flags.
pub fn zscore_flags<T: Real>(
    durations: &[T],
    stats: &DistributionStats<T>,
    threshold: T,
) -> Vec<ZScore<T>> {
    durations
        .iter()
        .map(|&x| {
            if stats.std > T::zero() {
                let score = (x - stats.mean) / stats.std;
                ZScore {
                    score,
                    flagged: score.abs() > threshold,
                }
            } else {
                ZScore {
                    score: T::zero(),
                    flagged: false,
                }
            }
        })
        .collect()
}

/// Tukey fences: flags values strictly outside `[q1 - m*iqr, q3 + m*iqr]`.
pub fn iqr_flags<T: Real>(
    durations: &[T],
    stats: &DistributionStats<T>,
    multiplier: T,
) -> Vec<bool> {
    let lower = stats.q1 - multiplier * stats.iqr;
    let upper = stats.q3 + multiplier * stats.iqr;
    durations.iter().map(|&x| x < lower || x > upper).collect()
}

/// Flags for one bug, keyed by id and kept in record order.
#[derive(Debug, Clone, PartialEq)]
pub struct BugFlags<T> {
    pub bug_id: String,
    pub resolution_days: T,
    pub z_score: T,
    pub z_flag: bool,
    pub iqr_flag: bool,
    /// Union of the two detectors.
    pub is_anomaly: bool,
}

/// Detection output: the statistics that produced the flags plus one entry
/// per input record, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct AnomalySet<T> {
    pub stats: DistributionStats<T>,
    pub flags: Vec<BugFlags<T>>,
}

impl<T> AnomalySet<T> {
    pub fn anomalies(&self) -> impl Iterator<Item = &BugFlags<T>> {
        self.flags.iter().filter(|f| f.is_anomaly)
    }

    pub fn anomaly_count(&self) -> usize {
        self.anomalies().count()
    }
}

/// Runs both detectors over the records and unions their flags.
pub fn detect_anomalies<T: Real>(
    records: &[ResolutionRecord<T>],
    config: &AnomalyConfig<T>,
) -> Result<AnomalySet<T>, AnomalyError> {
    config.validate()?;
    let durations: Vec<T> = records.iter().map(|r| r.resolution_days).collect();
    let stats = distribution_stats(&durations)?;
    let z = zscore_flags(&durations, &stats, config.z_threshold);
    let iqr = iqr_flags(&durations, &stats, config.iqr_multiplier);
    let flags = records
        .iter()
        .zip(z)
        .zip(iqr)
        .map(|((r, z), iqr_flag)| BugFlags {
            bug_id: r.bug_id.clone(),
            resolution_days: r.resolution_days,
            z_score: z.score,
            z_flag: z.flagged,
            iqr_flag,
            is_anomaly: z.flagged || iqr_flag,
        })
        .collect();
    Ok(AnomalySet { stats, flags })
}

/// A calendar month in UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn of(ts: DateTime<Utc>) -> Self {
        YearMonth {
            year: ts.year(),
            month: ts.month(),
        }
    }

    pub fn next(self) -> Self {
        if self.month == 12 {
            YearMonth {
                year: self.year + 1,
                month: 1,
            }
        } else {
            YearMonth {
                year: self.year,
                month: self.month + 1,
            }
        }
    }
}

impl std::fmt::Display for YearMonth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// Anomaly counts per month, zero-filled between the first and last bucket.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MonthlyCounts {
    pub entries: Vec<(YearMonth, usize)>,
}

impl MonthlyCounts {
    pub fn total(&self) -> usize {
        self.entries.iter().map(|(_, c)| c).sum()
    }
}

/// Buckets each timestamp into its UTC year-month; months between the
/// earliest and latest bucket are present with a zero count.
pub fn monthly_counts(bucket_times: &[DateTime<Utc>]) -> MonthlyCounts {
    let mut months: Vec<YearMonth> = bucket_times.iter().map(|&t| YearMonth::of(t)).collect();
    months.sort_unstable();
    let (first, last) = match (months.first(), months.last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => return MonthlyCounts::default(),
    };
    let mut entries = Vec::new();
    let mut cursor = first;
    let mut idx = 0;
    loop {
        let mut count = 0;
        while idx < months.len() && months[idx] == cursor {
            count += 1;
            idx += 1;
        }
        entries.push((cursor, count));
        if cursor == last {
            break;
        }
        cursor = cursor.next();
    }
    MonthlyCounts { entries }
}
