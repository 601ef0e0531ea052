//! KMeans clustering (Lloyd's algorithm) with k-means++ seeding, plus
//! per-cluster top-term extraction.
//!
//! Every source of nondeterminism is pinned: seeding draws from a ChaCha
//! generator keyed by the configured seed (restart `r` uses `seed + r`),
//! candidate points are sampled through a value-sorted index so results do
//! not depend on input order, distance ties assign to the lowest centroid
//! index, and the best restart wins by strict inertia comparison (lowest
//! restart index on ties).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::Real;
use crate::textvec::DocTermMatrix;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("k exceeds corpus size")]
    KExceedsCorpusSize,
    #[error("invalid kmeans configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("points must share one dimensionality")]
    RaggedPoints,
    #[error("points must be finite")]
    NonFinitePoint,
    #[error("clustering is not row-aligned with the matrix ({clusters} vs {docs} docs)")]
    RowMismatch { clusters: usize, docs: usize },
}

/// KMeans parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig<T> {
    pub k: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Convergence bound on the max-norm of centroid movement.
    pub tol: T,
    pub n_restarts: usize,
}

impl<T: Real> Default for KMeansConfig<T> {
    fn default() -> Self {
        KMeansConfig {
            k: 3,
            seed: 42,
            max_iters: 300,
            tol: crate::scalar::real(1e-6),
            n_restarts: 10,
        }
    }
}

/// Clustering result in the space the points were given in.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering<T> {
    /// Per-point cluster index in `[0, k)`.
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<T>>,
    /// Sum of squared distances of points to their assigned centroid.
    pub inertia: T,
    pub iterations_run: usize,
}

/// Inertia trace of one restart: the objective after every assignment step,
/// ending with the final inertia. Non-increasing by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartTrace<T> {
    pub restart: usize,
    pub seed: u64,
    pub inertia_per_iteration: Vec<T>,
}

/// Top mean-TF-IDF terms of one cluster's member documents.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTheme<T> {
    pub cluster_index: usize,
    pub size: usize,
    /// `(term, mean weight)` sorted by weight descending, ties by term.
    pub top_terms: Vec<(String, T)>,
}

/// Runs KMeans and keeps the best restart by inertia.
pub fn kmeans<T: Real>(
    points: &[Vec<T>],
    config: &KMeansConfig<T>,
) -> Result<Clustering<T>, ClusterError> {
    kmeans_traced(points, config).map(|(clustering, _)| clustering)
}

/// Like [`kmeans`] but also returns the inertia trace of every restart.
pub fn kmeans_traced<T: Real>(
    points: &[Vec<T>],
    config: &KMeansConfig<T>,
) -> Result<(Clustering<T>, Vec<RestartTrace<T>>), ClusterError> {
    if config.k == 0 {
        return Err(ClusterError::InvalidConfig("k must be at least 1"));
    }
    if config.max_iters == 0 {
        return Err(ClusterError::InvalidConfig("max_iters must be at least 1"));
    }
    if config.n_restarts == 0 {
        return Err(ClusterError::InvalidConfig("n_restarts must be at least 1"));
    }
    if !(config.tol >= T::zero() && config.tol.is_finite()) {
        return Err(ClusterError::InvalidConfig(
            "tol must be finite and non-negative",
        ));
    }
    if points.len() < config.k {
        return Err(ClusterError::KExceedsCorpusSize);
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(ClusterError::RaggedPoints);
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(ClusterError::NonFinitePoint);
    }

    // Sampling domain ordered by point value, so seeding depends only on the
    // seed and the multiset of points, never on input order.
    let mut value_order: Vec<usize> = (0..points.len()).collect();
    value_order.sort_by(|&a, &b| {
        points[a]
            .partial_cmp(&points[b])
            .expect("finite points compare")
            .then(a.cmp(&b))
    });

    let mut best: Option<Clustering<T>> = None;
    let mut traces = Vec::with_capacity(config.n_restarts);
    for restart in 0..config.n_restarts {
        let seed = config.seed.wrapping_add(restart as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centroids = plus_plus_seeds(
            points,
            &value_order,
            config.k,
            config.seed,
            restart,
            config.n_restarts,
            &mut rng,
        );
        let (clustering, trace) = lloyd(points, centroids, config);
        traces.push(RestartTrace {
            restart,
            seed,
            inertia_per_iteration: trace,
        });
        let better = match &best {
            None => true,
            Some(b) => clustering.inertia < b.inertia,
        };
        if better {
            best = Some(clustering);
        }
    }
    Ok((best.expect("at least one restart"), traces))
}

/// Greedy k-means++ with stratified restarts.
///
/// Restart `r` takes its first seed from a strided walk over the
/// value-sorted points, so consecutive restarts start from distinct,
/// spread-out basins (with at most ten points every point gets a turn).
/// Each later step draws `2 + floor(ln k)` candidates with probability
/// proportional to squared distance from the chosen set and keeps the
/// candidate that minimizes the total potential. All sums run in value
/// order, so the choice depends only on the seed and the point multiset.
fn plus_plus_seeds<T: Real>(
    points: &[Vec<T>],
    value_order: &[usize],
    k: usize,
    base_seed: u64,
    restart: usize,
    n_restarts: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<T>> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let stride = (n / n_restarts).max(1);
    let first = value_order[((base_seed as usize % n) + restart * stride) % n];
    chosen[first] = true;
    let mut centers = vec![points[first].clone()];
    // Sampling weights are tracked in f64; they only pick indices, so the
    // scalar type does not affect which points get chosen.
    let mut dist2: Vec<f64> = points
        .iter()
        .map(|p| {
            squared_distance(p, &centers[0])
                .to_f64()
                .expect("finite distance")
        })
        .collect();
    let local_trials = 2 + (k as f64).ln().floor() as usize;

    while centers.len() < k {
        let total: f64 = value_order.iter().map(|&i| dist2[i]).sum();
        if total <= 0.0 {
            // All remaining mass is zero (duplicate-heavy input); take the
            // first unchosen point in value order.
            let next = *value_order
                .iter()
                .find(|&&i| !chosen[i])
                .expect("k <= n leaves a point");
            chosen[next] = true;
            centers.push(points[next].clone());
            continue;
        }
        let mut best_pick = None;
        let mut best_potential = f64::INFINITY;
        let mut best_dist2 = Vec::new();
        for _ in 0..local_trials {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = *value_order.last().expect("non-empty");
            for &i in value_order {
                acc += dist2[i];
                if acc > target {
                    pick = i;
                    break;
                }
            }
            let candidate_dist2: Vec<f64> = points
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    dist2[i].min(
                        squared_distance(p, &points[pick])
                            .to_f64()
                            .expect("finite distance"),
                    )
                })
                .collect();
            let potential: f64 = value_order.iter().map(|&i| candidate_dist2[i]).sum();
            if potential < best_potential {
                best_potential = potential;
                best_pick = Some(pick);
                best_dist2 = candidate_dist2;
            }
        }
        let pick = best_pick.expect("at least one candidate");
        chosen[pick] = true;
        centers.push(points[pick].clone());
        dist2 = best_dist2;
    }
    centers
}

fn lloyd<T: Real>(
    points: &[Vec<T>],
    mut centroids: Vec<Vec<T>>,
    config: &KMeansConfig<T>,
) -> (Clustering<T>, Vec<T>) {
    let n = points.len();
    let k = centroids.len();
    let dim = points[0].len();
    let mut assignments = vec![0usize; n];
    let mut trace = Vec::new();
    let mut iterations = 0;

    loop {
        let mut cost = T::zero();
        for (a, p) in assignments.iter_mut().zip(points) {
            let (idx, d2) = nearest(p, &centroids);
            *a = idx;
            cost = cost + d2;
        }
        trace.push(cost);

        let mut sums = vec![vec![T::zero(); dim]; k];
        let mut counts = vec![0usize; k];
        for (&a, p) in assignments.iter().zip(points) {
            counts[a] += 1;
            for (s, &x) in sums[a].iter_mut().zip(p) {
                *s = *s + x;
            }
        }
        let mut new_centroids = centroids.clone();
        for c in 0..k {
            if counts[c] > 0 {
                let inv = T::one() / crate::scalar::real_count::<T>(counts[c]);
                for (nc, s) in new_centroids[c].iter_mut().zip(&sums[c]) {
                    *nc = *s * inv;
                }
            }
        }
        // Re-seed each empty cluster with the point farthest from its own
        // (freshly updated) centroid; ties and repeat repairs go to the
        // lowest point index.
        let empties: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
        if !empties.is_empty() {
            let mut taken = vec![false; n];
            for empty in empties {
                let mut far_idx = None;
                let mut far_d = T::neg_infinity();
                for (i, p) in points.iter().enumerate() {
                    if taken[i] {
                        continue;
                    }
                    let d = squared_distance(p, &new_centroids[assignments[i]]);
                    if d > far_d {
                        far_d = d;
                        far_idx = Some(i);
                    }
                }
                if let Some(i) = far_idx {
                    taken[i] = true;
                    new_centroids[empty] = points[i].clone();
                }
            }
        }

        let mut movement = T::zero();
        for (old, new) in centroids.iter().zip(&new_centroids) {
            for (&o, &nw) in old.iter().zip(new) {
                let d = (o - nw).abs();
                if d > movement {
                    movement = d;
                }
            }
        }
        centroids = new_centroids;
        iterations += 1;
        if movement < config.tol || iterations >= config.max_iters {
            break;
        }
    }

    // Final assignment against the final centroids keeps the
    // nearest-centroid invariant intact.
    let mut inertia = T::zero();
    for (a, p) in assignments.iter_mut().zip(points) {
        let (idx, d2) = nearest(p, &centroids);
        *a = idx;
        inertia = inertia + d2;
    }
    trace.push(inertia);

    (
        Clustering {
            assignments,
            centroids,
            inertia,
            iterations_run: iterations,
        },
        trace,
    )
}

/// Index of the nearest centroid (strictly smaller distance wins, so ties
/// stay with the lowest index) and the squared distance to it.
fn nearest<T: Real>(point: &[T], centroids: &[Vec<T>]) -> (usize, T) {
    let mut best = 0;
    let mut best_d = squared_distance(point, &centroids[0]);
    for (c, centroid) in centroids.iter().enumerate().skip(1) {
        let d = squared_distance(point, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    (best, best_d)
}

fn squared_distance<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| {
        let d = x - y;
        acc + d * d
    })
}

/// Per-cluster themes: the `m` largest terms of the mean TF-IDF vector over
/// member documents, computed in the original term space regardless of the
/// space that was clustered. Empty clusters yield empty themes.
pub fn cluster_top_terms<T: Real>(
    matrix: &DocTermMatrix<T>,
    clustering: &Clustering<T>,
    m: usize,
) -> Result<Vec<ClusterTheme<T>>, ClusterError> {
    if clustering.assignments.len() != matrix.n_docs() {
        return Err(ClusterError::RowMismatch {
            clusters: clustering.assignments.len(),
            docs: matrix.n_docs(),
        });
    }
    let k = clustering.centroids.len();
    let n_terms = matrix.n_terms();
    let mut sums = vec![vec![T::zero(); n_terms]; k];
    let mut counts = vec![0usize; k];
    for (i, &a) in clustering.assignments.iter().enumerate() {
        counts[a] += 1;
        for &(j, w) in matrix.row(i) {
            sums[a][j] = sums[a][j] + w;
        }
    }
    let vocab = matrix.vocabulary();
    let themes = (0..k)
        .map(|c| {
            if counts[c] == 0 {
                return ClusterTheme {
                    cluster_index: c,
                    size: 0,
                    top_terms: Vec::new(),
                };
            }
            let inv = T::one() / crate::scalar::real_count::<T>(counts[c]);
            let mut weighted: Vec<(usize, T)> = sums[c]
                .iter()
                .enumerate()
                .filter(|&(_, &w)| w > T::zero())
                .map(|(j, &w)| (j, w * inv))
                .collect();
            weighted.sort_by(|a, b| {
                b.1.partial_cmp(&a.1)
                    .expect("finite weights")
                    .then_with(|| vocab.term(a.0).cmp(vocab.term(b.0)))
            });
            weighted.truncate(m);
            ClusterTheme {
                cluster_index: c,
                size: counts[c],
                top_terms: weighted
                    .into_iter()
                    .map(|(j, w)| (vocab.term(j).to_string(), w))
                    .collect(),
            }
        })
        .collect();
    Ok(themes)
}
