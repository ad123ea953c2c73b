//! Noise-free Gaussian-process regression with an RBF kernel.
//!
//! Inputs and outputs are standardized to zero mean and unit variance before
//! fitting, so the predictive standard deviation lives in `[0, 1]`: it is
//! `~0` at training points and reverts to the unit prior far away from them.
//! The kernel matrix is factorized once per fit (Cholesky, with a small
//! jitter on the diagonal escalated on failure); predictions reuse the
//! factorization. A fitted model is immutable and safe for concurrent reads.

use crate::{Classify, FailureKind};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;
use thiserror::Error;

/// Default diagonal jitter for noise-free observations.
pub const DEFAULT_JITTER: f64 = 1e-8;
/// Jitter escalation stops here; beyond it the kernel is declared singular.
pub const MAX_JITTER: f64 = 1e-4;
/// Queries are batched into chunks of this many rows for parallel prediction.
const PREDICT_CHUNK: usize = 512;

#[derive(Debug, Error)]
pub enum GpError {
    #[error("inconsistent data: {0}")]
    InconsistentData(String),
    #[error("kernel matrix not positive definite even with jitter {max_jitter:.1e} (n = {n})")]
    SingularKernel { n: usize, max_jitter: f64 },
    #[error("dimension mismatch: query has {query} features, model has {model}")]
    DimensionMismatch { query: usize, model: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
}

impl Classify for GpError {
    fn kind(&self) -> FailureKind {
        match self {
            GpError::InconsistentData(_)
            | GpError::DimensionMismatch { .. }
            | GpError::InvalidInput(_) => FailureKind::Input,
            GpError::SingularKernel { .. } | GpError::InvariantViolation(_) => {
                FailureKind::Numerical
            }
        }
    }
}

/// Per-dimension affine map to zero mean and unit variance.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Fits per-dimension mean and population standard deviation.
    ///
    /// A dimension with zero variance gets its scale clamped to 1 (with a
    /// warning) so constant features pass through as zeros.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self, GpError> {
        let n = rows.len();
        if n == 0 {
            return Err(GpError::InvalidInput("cannot standardize zero rows".into()));
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(GpError::InvalidInput("rows have zero dimensions".into()));
        }
        let mut mean = vec![0.0; d];
        for row in rows {
            if row.len() != d {
                return Err(GpError::InvalidInput("ragged input rows".into()));
            }
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut var = vec![0.0; d];
        for row in rows {
            for ((v, m), x) in var.iter_mut().zip(&mean).zip(row) {
                let centered = x - m;
                *v += centered * centered;
            }
        }
        let scale: Vec<f64> = var
            .iter()
            .enumerate()
            .map(|(dim, v)| {
                let s = (v / n as f64).sqrt();
                if s > 0.0 {
                    s
                } else {
                    log::warn!("constant feature in dimension {dim}; scale clamped to 1");
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, scale })
    }

    pub fn dims(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((x, m), s)| (x - m) / s)
            .collect()
    }

    pub fn inverse_transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((z, m), s)| z * s + m)
            .collect()
    }

    /// Scalar convenience for one-dimensional standardizers.
    pub fn transform_scalar(&self, value: f64) -> f64 {
        (value - self.mean[0]) / self.scale[0]
    }

    pub fn inverse_transform_scalar(&self, value: f64) -> f64 {
        value * self.scale[0] + self.mean[0]
    }
}

/// RBF kernel with one lengthscale per input dimension; signal variance is
/// fixed at 1, so `k(x, x) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfKernel {
    pub lengthscales: Vec<f64>,
}

impl RbfKernel {
    pub fn isotropic(lengthscale: f64, dims: usize) -> Result<Self, GpError> {
        if !(lengthscale > 0.0) {
            return Err(GpError::InvalidInput(format!(
                "lengthscale must be > 0, got {lengthscale}"
            )));
        }
        Ok(Self {
            lengthscales: vec![lengthscale; dims],
        })
    }

    /// Covariance between two points in standardized coordinates.
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut sq = 0.0;
        for ((x, y), l) in a.iter().zip(b).zip(&self.lengthscales) {
            let d = (x - y) / l;
            sq += d * d;
        }
        (-0.5 * sq).exp()
    }
}

/// How the lengthscale is chosen at fit time.
#[derive(Debug, Clone, PartialEq)]
pub enum LengthscalePolicy {
    /// One fixed isotropic lengthscale in standardized units.
    Fixed(f64),
    /// Pick the candidate with the highest log marginal likelihood at each
    /// refit. Deterministic: candidates are scanned in order and ties keep
    /// the earlier candidate.
    GridSearch { candidates: Vec<f64> },
}

impl Default for LengthscalePolicy {
    fn default() -> Self {
        LengthscalePolicy::Fixed(1.0)
    }
}

impl LengthscalePolicy {
    /// The default log-spaced candidate set for [`LengthscalePolicy::GridSearch`].
    pub fn default_grid() -> Self {
        LengthscalePolicy::GridSearch {
            candidates: vec![0.3, 0.5, 1.0, 2.0, 4.0],
        }
    }
}

/// Mean and standard deviation of the predictive distribution, both in
/// standardized output units. Use [`GpModel::destandardize_mean`] to convert
/// the mean back to output units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub std: f64,
}

/// A fitted noise-free GP regressor.
#[derive(Debug, Clone)]
pub struct GpModel {
    x_train: DMatrix<f64>,
    kernel: RbfKernel,
    jitter: f64,
    /// Inverse of the Cholesky factor; grid-sized variance queries run as
    /// one triangular product instead of per-column solves.
    l_inv: DMatrix<f64>,
    weights: DVector<f64>,
    x_standardizer: Standardizer,
    y_standardizer: Standardizer,
}

fn kernel_matrix(kernel: &RbfKernel, x: &DMatrix<f64>, jitter: f64) -> DMatrix<f64> {
    let n = x.nrows();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = 1.0 + jitter;
        for j in (i + 1)..n {
            let v = kernel.eval(x.row(i).transpose().as_slice(), x.row(j).transpose().as_slice());
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Log marginal likelihood of standardized targets under the factorized model.
fn log_marginal(chol: &Cholesky<f64, Dyn>, weights: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let n = y.len() as f64;
    let data_fit = y.dot(weights);
    let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
    -0.5 * data_fit - log_det - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
}

impl GpModel {
    /// Fits the GP to raw (unstandardized) inputs and outputs.
    ///
    /// Duplicate input rows with identical outputs collapse to one; duplicate
    /// rows with conflicting outputs are an error. The kernel diagonal starts
    /// at `jitter` and is escalated by 10x up to [`MAX_JITTER`] if the
    /// factorization fails.
    pub fn fit(
        x_raw: &[Vec<f64>],
        y_raw: &[f64],
        policy: &LengthscalePolicy,
        jitter: f64,
    ) -> Result<Self, GpError> {
        if x_raw.len() != y_raw.len() {
            return Err(GpError::InconsistentData(format!(
                "{} inputs vs {} outputs",
                x_raw.len(),
                y_raw.len()
            )));
        }
        if x_raw.is_empty() {
            return Err(GpError::InvalidInput("need at least one training point".into()));
        }
        if !(jitter > 0.0) {
            return Err(GpError::InvalidInput(format!("jitter must be > 0, got {jitter}")));
        }

        // Collapse exact duplicates; conflicting outputs are inconsistent.
        let mut x_clean: Vec<Vec<f64>> = Vec::with_capacity(x_raw.len());
        let mut y_clean: Vec<f64> = Vec::with_capacity(y_raw.len());
        for (row, &y) in x_raw.iter().zip(y_raw) {
            if let Some(pos) = x_clean.iter().position(|r| r == row) {
                if y_clean[pos] != y {
                    return Err(GpError::InconsistentData(format!(
                        "duplicate input {row:?} with outputs {} and {y}",
                        y_clean[pos]
                    )));
                }
            } else {
                x_clean.push(row.clone());
                y_clean.push(y);
            }
        }

        let x_standardizer = Standardizer::fit(&x_clean)?;
        let y_rows: Vec<Vec<f64>> = y_clean.iter().map(|&v| vec![v]).collect();
        let y_standardizer = Standardizer::fit(&y_rows)?;

        let n = x_clean.len();
        let d = x_standardizer.dims();
        let mut x_std = DMatrix::zeros(n, d);
        for (i, row) in x_clean.iter().enumerate() {
            for (j, v) in x_standardizer.transform(row).into_iter().enumerate() {
                x_std[(i, j)] = v;
            }
        }
        let y_std = DVector::from_iterator(
            n,
            y_clean.iter().map(|&v| y_standardizer.transform_scalar(v)),
        );

        let candidates: Vec<f64> = match policy {
            LengthscalePolicy::Fixed(l) => vec![*l],
            LengthscalePolicy::GridSearch { candidates } => candidates.clone(),
        };
        if candidates.is_empty() {
            return Err(GpError::InvalidInput("empty lengthscale candidate set".into()));
        }

        let mut best: Option<(f64, Self)> = None;
        for &lengthscale in &candidates {
            let kernel = RbfKernel::isotropic(lengthscale, d)?;
            let (chol, effective_jitter) = factorize(&kernel, &x_std, jitter)?;
            let weights = chol.solve(&y_std);
            let score = log_marginal(&chol, &weights, &y_std);
            match &best {
                Some((best_score, _)) if score <= *best_score => {}
                _ => {
                    let l_inv = invert_lower(&chol);
                    let model = GpModel {
                        x_train: x_std.clone(),
                        kernel,
                        jitter: effective_jitter,
                        l_inv,
                        weights,
                        x_standardizer: x_standardizer.clone(),
                        y_standardizer: y_standardizer.clone(),
                    };
                    best = Some((score, model));
                }
            }
        }
        Ok(best.expect("at least one candidate").1)
    }

    /// Fits directly on pre-standardized data with a fixed kernel, bypassing
    /// the standardizers (they become identity maps). Intended for tests that
    /// need to hold the coordinate system fixed while data are appended.
    pub fn fit_standardized(
        x_std: &[Vec<f64>],
        y_std: &[f64],
        kernel: RbfKernel,
        jitter: f64,
    ) -> Result<Self, GpError> {
        if x_std.len() != y_std.len() || x_std.is_empty() {
            return Err(GpError::InvalidInput("bad pre-standardized training set".into()));
        }
        let n = x_std.len();
        let d = x_std[0].len();
        let mut x = DMatrix::zeros(n, d);
        for (i, row) in x_std.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                x[(i, j)] = v;
            }
        }
        let y = DVector::from_column_slice(y_std);
        let (chol, effective_jitter) = factorize(&kernel, &x, jitter)?;
        let weights = chol.solve(&y);
        let l_inv = invert_lower(&chol);
        Ok(GpModel {
            x_train: x,
            kernel,
            jitter: effective_jitter,
            l_inv,
            weights,
            x_standardizer: Standardizer {
                mean: vec![0.0; d],
                scale: vec![1.0; d],
            },
            y_standardizer: Standardizer {
                mean: vec![0.0],
                scale: vec![1.0],
            },
        })
    }

    pub fn training_size(&self) -> usize {
        self.x_train.nrows()
    }

    pub fn dims(&self) -> usize {
        self.x_train.ncols()
    }

    pub fn kernel(&self) -> &RbfKernel {
        &self.kernel
    }

    /// Effective jitter after any escalation during fitting.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn input_standardizer(&self) -> &Standardizer {
        &self.x_standardizer
    }

    pub fn output_standardizer(&self) -> &Standardizer {
        &self.y_standardizer
    }

    /// Converts a standardized predictive mean back to output units.
    pub fn destandardize_mean(&self, mean_std: f64) -> f64 {
        self.y_standardizer.inverse_transform_scalar(mean_std)
    }

    /// Shared prediction kernel: cross-covariances as a matrix right-hand
    /// side, one factorized solve per chunk. Every query is one column, so a
    /// single query and a batch run the identical per-column arithmetic.
    fn predict_chunk(&self, chunk: &[Vec<f64>]) -> Result<Vec<Prediction>, GpError> {
        let n = self.training_size();
        let m = chunk.len();
        let mut k_star = DMatrix::zeros(n, m);
        for (j, query_raw) in chunk.iter().enumerate() {
            let q = self.x_standardizer.transform(query_raw);
            for i in 0..n {
                k_star[(i, j)] = self
                    .kernel
                    .eval(self.x_train.row(i).transpose().as_slice(), &q);
            }
        }
        // variance = 1 − ‖L⁻¹ k*‖². The whitening product is written out
        // per column so a query computes bit-identically whether it arrives
        // alone or inside a batch.
        let whitened = whiten_columns(&self.l_inv, &k_star);
        let mut out = Vec::with_capacity(m);
        for j in 0..m {
            let mut mean = 0.0;
            let mut explained = 0.0;
            for i in 0..n {
                mean += k_star[(i, j)] * self.weights[i];
                explained += whitened[(i, j)] * whitened[(i, j)];
            }
            let variance = 1.0 - explained;
            if variance > 1.0 + 1e-6 {
                return Err(GpError::InvariantViolation(format!(
                    "predictive variance {variance} exceeds the unit prior"
                )));
            }
            out.push(Prediction {
                mean,
                std: variance.max(0.0).sqrt(),
            });
        }
        Ok(out)
    }

    /// Predictive mean and std (standardized units) at one raw query.
    pub fn predict_one(&self, query_raw: &[f64]) -> Result<Prediction, GpError> {
        if query_raw.len() != self.dims() {
            return Err(GpError::DimensionMismatch {
                query: query_raw.len(),
                model: self.dims(),
            });
        }
        Ok(self.predict_chunk(&[query_raw.to_vec()])?[0])
    }

    /// Batch prediction over raw queries; identical to mapping
    /// [`GpModel::predict_one`], with large batches evaluated in parallel
    /// (output order is preserved).
    pub fn predict(&self, queries_raw: &[Vec<f64>]) -> Result<Vec<Prediction>, GpError> {
        for q in queries_raw {
            if q.len() != self.dims() {
                return Err(GpError::DimensionMismatch {
                    query: q.len(),
                    model: self.dims(),
                });
            }
        }
        if queries_raw.len() <= PREDICT_CHUNK {
            return self.predict_chunk(queries_raw);
        }
        queries_raw
            .par_chunks(PREDICT_CHUNK)
            .map(|chunk| self.predict_chunk(chunk))
            .collect::<Result<Vec<Vec<_>>, _>>()
            .map(|chunks| chunks.into_iter().flatten().collect())
    }

    /// Predictive means in output units at raw queries.
    pub fn predict_mean_output(&self, queries_raw: &[Vec<f64>]) -> Result<Vec<f64>, GpError> {
        Ok(self
            .predict(queries_raw)?
            .into_iter()
            .map(|p| self.destandardize_mean(p.mean))
            .collect())
    }
}

/// `L⁻¹ · K*` with `L⁻¹` lower triangular, accumulated per output element in
/// ascending `k` order. The order is fixed per column, so results do not
/// depend on how queries are batched.
fn whiten_columns(l_inv: &DMatrix<f64>, k_star: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l_inv.nrows();
    let m = k_star.ncols();
    let li = l_inv.as_slice();
    let ks = k_star.as_slice();
    let mut out = vec![0.0f64; n * m];
    for j in 0..m {
        let ks_col = &ks[j * n..(j + 1) * n];
        let out_col = &mut out[j * n..(j + 1) * n];
        for (k, &x) in ks_col.iter().enumerate() {
            if x != 0.0 {
                let li_col = &li[k * n + k..(k + 1) * n];
                for (o, &l) in out_col[k..].iter_mut().zip(li_col) {
                    *o += l * x;
                }
            }
        }
    }
    DMatrix::from_vec(n, m, out)
}

fn invert_lower(chol: &Cholesky<f64, Dyn>) -> DMatrix<f64> {
    let l = chol.l();
    let n = l.nrows();
    l.solve_lower_triangular(&DMatrix::identity(n, n))
        .expect("Cholesky factor has a positive diagonal")
}

fn factorize(
    kernel: &RbfKernel,
    x_std: &DMatrix<f64>,
    base_jitter: f64,
) -> Result<(Cholesky<f64, Dyn>, f64), GpError> {
    let mut jitter = base_jitter;
    loop {
        let k = kernel_matrix(kernel, x_std, jitter);
        if let Some(chol) = Cholesky::new(k) {
            return Ok((chol, jitter));
        }
        jitter *= 10.0;
        if jitter > MAX_JITTER {
            return Err(GpError::SingularKernel {
                n: x_std.nrows(),
                max_jitter: MAX_JITTER,
            });
        }
    }
}
