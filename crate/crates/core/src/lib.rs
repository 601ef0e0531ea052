//! Detects anomalously long bug-resolution times in issue-tracker CSV
//! exports and explains them thematically.
//!
//! The pipeline: parse reports, compute resolution durations, flag outliers
//! with the union of a z-score rule and an IQR fence rule, TF-IDF-vectorize
//! the anomalous summaries, project them to 2-D with PCA, cluster with
//! KMeans, and render figures plus a cross-project report.
//!
//! The numeric kernels are generic over [`Real`] (`f32` or `f64`); the
//! pipeline and CLI run everything on `f64`, for which the crate root
//! exposes the `*64` aliases below.

pub mod anomaly;
pub mod cluster;
pub mod ingest;
pub mod pipeline;
pub mod reduce;
pub mod report;
pub mod scalar;
pub mod textvec;

pub use scalar::Real;

/// `f64` specializations used by the pipeline and CLI.
pub type ResolutionRecord64 = ingest::ResolutionRecord<f64>;
pub type AnomalyConfig64 = anomaly::AnomalyConfig<f64>;
pub type DistributionStats64 = anomaly::DistributionStats<f64>;
pub type AnomalySet64 = anomaly::AnomalySet<f64>;
pub type DocTermMatrix64 = textvec::DocTermMatrix<f64>;
pub type PcaModel64 = reduce::PcaModel<f64>;
pub type Embedding2D64 = reduce::Embedding2D<f64>;
pub type KMeansConfig64 = cluster::KMeansConfig<f64>;
pub type Clustering64 = cluster::Clustering<f64>;
pub type ClusterTheme64 = cluster::ClusterTheme<f64>;
