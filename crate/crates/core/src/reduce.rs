//! Principal component analysis of the TF-IDF matrix.
//!
//! Columns are mean-centered, the covariance (denominator `n - 1`) is
//! eigendecomposed with cyclic Jacobi rotations, and the leading
//! eigenvectors become the projection axes. When the term space is wider
//! than the document count the mathematically equivalent Gram-matrix form
//! is decomposed instead and mapped back, which keeps the rotation cost at
//! `min(n_docs, n_terms)^3`.
//!
//! Eigenvectors are sign-ambiguous; each component is flipped so its
//! largest-magnitude coordinate is positive, making fits bit-stable.

use thiserror::Error;

use crate::scalar::{real, real_count, Real};
use crate::textvec::DocTermMatrix;

/// Convergence threshold on the off-diagonal Frobenius norm.
const JACOBI_OFF_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Error)]
pub enum ReduceError {
    #[error("insufficient documents")]
    InsufficientDocuments,
    #[error("n_components {requested} exceeds min(n_docs, n_terms) = {max}")]
    ComponentBound { requested: usize, max: usize },
    #[error("n_components must be at least 1")]
    ZeroComponents,
    #[error("dimension mismatch: model has {expected} terms, matrix has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("model has {0} components, expected 2")]
    NotTwoComponents(usize),
}

/// Fitted projection: per-term means, orthonormal components, and the
/// covariance eigenvalues they explain (descending).
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel<T> {
    pub mean: Vec<T>,
    pub components: Vec<Vec<T>>,
    pub explained_variances: Vec<T>,
}

/// Two-dimensional projection of a document set, row-aligned with the
/// matrix it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding2D<T> {
    pub points: Vec<(T, T)>,
}

impl<T> Embedding2D<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Fits a PCA model on a TF-IDF matrix.
pub fn pca_fit<T: Real>(
    matrix: &DocTermMatrix<T>,
    n_components: usize,
) -> Result<PcaModel<T>, ReduceError> {
    fit_sparse(matrix.rows(), matrix.n_terms(), n_components)
}

/// Fits a PCA model on dense rows; entries may be of any sign.
pub fn pca_fit_dense<T: Real>(
    rows: &[Vec<T>],
    n_components: usize,
) -> Result<PcaModel<T>, ReduceError> {
    let sparse: Vec<Vec<(usize, T)>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .copied()
                .enumerate()
                .filter(|&(_, v)| v != T::zero())
                .collect()
        })
        .collect();
    let n_terms = rows.first().map_or(0, Vec::len);
    fit_sparse(&sparse, n_terms, n_components)
}

/// Projects each row of `matrix` onto the model's two components.
pub fn pca_transform<T: Real>(
    model: &PcaModel<T>,
    matrix: &DocTermMatrix<T>,
) -> Result<Embedding2D<T>, ReduceError> {
    transform_rows(model, matrix.rows(), matrix.n_terms())
}

/// Dense-row variant of [`pca_transform`].
pub fn pca_transform_dense<T: Real>(
    model: &PcaModel<T>,
    rows: &[Vec<T>],
) -> Result<Embedding2D<T>, ReduceError> {
    let sparse: Vec<Vec<(usize, T)>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .copied()
                .enumerate()
                .filter(|&(_, v)| v != T::zero())
                .collect()
        })
        .collect();
    let n_terms = rows.first().map_or(model.mean.len(), Vec::len);
    transform_rows(model, &sparse, n_terms)
}

fn transform_rows<T: Real>(
    model: &PcaModel<T>,
    rows: &[Vec<(usize, T)>],
    n_terms: usize,
) -> Result<Embedding2D<T>, ReduceError> {
    if model.components.len() != 2 {
        return Err(ReduceError::NotTwoComponents(model.components.len()));
    }
    if n_terms != model.mean.len() {
        return Err(ReduceError::DimensionMismatch {
            expected: model.mean.len(),
            got: n_terms,
        });
    }
    let c0 = &model.components[0];
    let c1 = &model.components[1];
    // (x - mean) . c == x . c - mean . c, so the mean term is hoisted out.
    let m0 = dot_dense(&model.mean, c0);
    let m1 = dot_dense(&model.mean, c1);
    let points = rows
        .iter()
        .map(|row| {
            let mut x = T::zero();
            let mut y = T::zero();
            for &(j, w) in row {
                x = x + w * c0[j];
                y = y + w * c1[j];
            }
            (x - m0, y - m1)
        })
        .collect();
    Ok(Embedding2D { points })
}

fn dot_dense<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn fit_sparse<T: Real>(
    rows: &[Vec<(usize, T)>],
    d: usize,
    k: usize,
) -> Result<PcaModel<T>, ReduceError> {
    let n = rows.len();
    if n < 2 {
        return Err(ReduceError::InsufficientDocuments);
    }
    if k == 0 {
        return Err(ReduceError::ZeroComponents);
    }
    if k > n.min(d) {
        return Err(ReduceError::ComponentBound {
            requested: k,
            max: n.min(d),
        });
    }

    let n_t: T = real_count(n);
    let denom: T = real_count(n - 1);
    let mut mean = vec![T::zero(); d];
    for row in rows {
        for &(j, w) in row {
            mean[j] = mean[j] + w;
        }
    }
    for m in &mut mean {
        *m = *m / n_t;
    }

    let mut components: Vec<Vec<T>> = Vec::with_capacity(k);
    let mut variances: Vec<T> = Vec::with_capacity(k);
    let mut rank_deficient = false;

    if d <= n {
        // Covariance path: C = (sum_i x_i x_i^T - n mu mu^T) / (n - 1).
        let mut cov = vec![T::zero(); d * d];
        for row in rows {
            for &(a, wa) in row {
                for &(b, wb) in row {
                    cov[a * d + b] = cov[a * d + b] + wa * wb;
                }
            }
        }
        for a in 0..d {
            for b in 0..d {
                cov[a * d + b] = (cov[a * d + b] - n_t * mean[a] * mean[b]) / denom;
            }
        }
        let (eigvals, eigvecs) = jacobi_eigen(&mut cov, d);
        let order = descending_order(&eigvals);
        let tol = zero_tolerance(&eigvals);
        for &idx in order.iter().take(k) {
            let var = eigvals[idx];
            if var <= tol {
                rank_deficient = true;
            }
            components.push((0..d).map(|i| eigvecs[i * d + idx]).collect());
            variances.push(var.max(T::zero()));
        }
    } else {
        // Gram path: G = Xc Xc^T / (n - 1) shares the covariance spectrum;
        // eigenvectors map back through v = Xc^T u / |Xc^T u|.
        let mdots: Vec<T> = rows
            .iter()
            .map(|row| row.iter().fold(T::zero(), |s, &(j, w)| s + w * mean[j]))
            .collect();
        let mean_sq = dot_dense(&mean, &mean);
        let mut gram = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let raw = sparse_dot(&rows[i], &rows[j]);
                let centered = (raw - mdots[i] - mdots[j] + mean_sq) / denom;
                gram[i * n + j] = centered;
                gram[j * n + i] = centered;
            }
        }
        let (eigvals, eigvecs) = jacobi_eigen(&mut gram, n);
        let order = descending_order(&eigvals);
        let tol = zero_tolerance(&eigvals);
        for &idx in order.iter().take(k) {
            let var = eigvals[idx];
            if var <= tol {
                rank_deficient = true;
                continue;
            }
            // v = sum_i u_i (x_i - mu), renormalized.
            let mut v = vec![T::zero(); d];
            let mut coeff_sum = T::zero();
            for i in 0..n {
                let u = eigvecs[i * n + idx];
                coeff_sum = coeff_sum + u;
                for &(j, w) in &rows[i] {
                    v[j] = v[j] + u * w;
                }
            }
            for (vj, mj) in v.iter_mut().zip(&mean) {
                *vj = *vj - coeff_sum * *mj;
            }
            let norm = dot_dense(&v, &v).sqrt();
            if norm <= T::zero() {
                rank_deficient = true;
                continue;
            }
            for vj in &mut v {
                *vj = *vj / norm;
            }
            components.push(v);
            variances.push(var.max(T::zero()));
        }
        // Complete missing directions from an orthonormal complement.
        let mut basis_col = 0;
        while components.len() < k && basis_col < d {
            let mut v = vec![T::zero(); d];
            v[basis_col] = T::one();
            basis_col += 1;
            for c in &components {
                let proj = dot_dense(&v, c);
                for (vj, cj) in v.iter_mut().zip(c) {
                    *vj = *vj - proj * *cj;
                }
            }
            let norm = dot_dense(&v, &v).sqrt();
            if norm > real(1e-6) {
                for vj in &mut v {
                    *vj = *vj / norm;
                }
                components.push(v);
                variances.push(T::zero());
            }
        }
    }

    if rank_deficient {
        log::warn!("matrix rank below requested components; trailing axes carry zero variance");
    }

    for c in &mut components {
        fix_sign(c);
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variances: variances,
    })
}

fn sparse_dot<T: Real>(a: &[(usize, T)], b: &[(usize, T)]) -> T {
    let mut sum = T::zero();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                sum = sum + a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    sum
}

fn descending_order<T: Real>(values: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .expect("finite eigenvalues")
            .then(a.cmp(&b))
    });
    order
}

fn zero_tolerance<T: Real>(eigvals: &[T]) -> T {
    let max = eigvals
        .iter()
        .fold(T::zero(), |m, &v| if v > m { v } else { m });
    max.max(T::one()) * real(1e-12)
}

/// Flips `v` so its largest-magnitude coordinate (lowest index on ties) is
/// positive.
fn fix_sign<T: Real>(v: &mut [T]) {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < T::zero() {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix stored row-major
/// in `a`. Returns the eigenvalues and the eigenvector matrix `v` with
/// eigenvector `c` in column `c` (`v[i * n + c]`).
fn jacobi_eigen<T: Real>(a: &mut [T], n: usize) -> (Vec<T>, Vec<T>) {
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let off_tol: T = real(JACOBI_OFF_TOL);
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off_sq = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                let x = a[p * n + q];
                off_sq = off_sq + (x * x + x * x);
            }
        }
        if off_sq.sqrt() < off_tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (apq + apq);
                let t = {
                    let abs_t = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    if theta < T::zero() {
                        -abs_t
                    } else {
                        abs_t
                    }
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for i in 0..n {
                    let api = a[p * n + i];
                    let aqi = a[q * n + i];
                    a[p * n + i] = c * api - s * aqi;
                    a[q * n + i] = s * api + c * aqi;
                }
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = c * vip - s * viq;
                    v[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }
    let eigvals = (0..n).map(|i| a[i * n + i]).collect();
    (eigvals, v)
}
