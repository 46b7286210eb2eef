//! PCA embedding dimension of a point cloud.
//!
//! `R_p = 1 - rho_p^2`, where `rho_p` correlates pairwise distances in the
//! original cloud with those after projecting onto the top `p` principal
//! directions. The embedding dimension is the smallest `p` with `R_p` below a
//! tolerance, capped.

use nalgebra::{DMatrix, RealField};
use num_traits::Float;
use rand::Rng;
use rayon::prelude::*;

use crate::distance::euclidean;
use crate::error::{Error, Result};
use crate::geometry::{pairwise_correlation, PearsonAccumulator};
use crate::map::PointCloud;
use crate::rng::seeded;
use crate::scalar::Real;

/// Principal components of a centered cloud, directions ordered by singular
/// value (descending). The largest-magnitude entry of each direction is
/// positive, which fixes the signs of the scores.
#[derive(Debug, Clone)]
pub struct Pca<T: Real + RealField> {
    /// `N x r` scores, the centered cloud times the directions.
    scores: DMatrix<T>,
    singular_values: Vec<T>,
}

impl<T: Real + RealField> Pca<T> {
    pub fn new(cloud: &PointCloud<T>) -> Result<Self> {
        let (rows, cols) = (cloud.len(), cloud.dim());
        if rows == 0 {
            return Err(Error::Shape("empty point cloud".into()));
        }
        let mut data = DMatrix::from_row_slice(rows, cols, cloud.coords());
        for mut column in data.column_iter_mut() {
            let mean = column.iter().copied().sum::<T>() / T::of_usize(rows);
            for v in column.iter_mut() {
                *v -= mean;
            }
        }
        // scores come from `data * v` rather than `u * sigma`: the left
        // vectors of a rank-deficient input are not reliably orthonormal
        let svd = data.clone().svd(false, true);
        let v_t = match svd.v_t {
            Some(v_t) => v_t,
            None => return Err(Error::Shape("singular value decomposition failed".into())),
        };
        let sigma = svd.singular_values;
        let mut order: Vec<usize> = (0..sigma.len()).collect();
        order.sort_by(|&a, &b| {
            sigma[b]
                .partial_cmp(&sigma[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let r = order.len();
        let mut scores = DMatrix::zeros(rows, r);
        let mut singular_values = Vec::with_capacity(r);
        for (k, &src) in order.iter().enumerate() {
            let dir = v_t.row(src);
            let mut lead = 0;
            for c in 1..dir.len() {
                if Float::abs(dir[c]) > Float::abs(dir[lead]) {
                    lead = c;
                }
            }
            let sign = if dir[lead] < T::zero() { -T::one() } else { T::one() };
            for i in 0..rows {
                let dot = data.row(i).iter().zip(dir.iter()).map(|(&x, &w)| x * w).sum::<T>();
                scores[(i, k)] = dot * sign;
            }
            singular_values.push(sigma[src]);
        }
        Ok(Self { scores, singular_values })
    }

    pub fn singular_values(&self) -> &[T] {
        &self.singular_values
    }

    /// Number of available directions, `min(N, D)`.
    pub fn max_dimension(&self) -> usize {
        self.singular_values.len()
    }

    /// The cloud in principal coordinates `1..=p`.
    pub fn project(&self, p: usize) -> Result<PointCloud<T>> {
        if p == 0 || p > self.max_dimension() {
            return Err(Error::Dimension { requested: p, max: self.max_dimension() });
        }
        let rows = self.scores.nrows();
        let coords = (0..rows)
            .flat_map(|i| (0..p).map(move |k| self.scores[(i, k)]))
            .collect();
        PointCloud::from_rows(p, coords)
    }

    #[inline]
    fn score(&self, i: usize, k: usize) -> T {
        self.scores[(i, k)]
    }
}

/// Centers `cloud` and projects it onto its top `p` principal directions.
pub fn pca_project<T: Real + RealField>(cloud: &PointCloud<T>, p: usize) -> Result<PointCloud<T>> {
    Pca::new(cloud)?.project(p)
}

/// `1 - rho^2` for the pairwise distances of two clouds over the same points.
pub fn residual_variance<T: Real>(orig: &PointCloud<T>, proj: &PointCloud<T>) -> Result<T> {
    if orig.len() != proj.len() {
        return Err(Error::Shape(format!(
            "{} original points against {} projected",
            orig.len(),
            proj.len()
        )));
    }
    let rho: T = pairwise_correlation(
        orig.len(),
        |i, j| euclidean(orig.point(i), orig.point(j)),
        |i, j| euclidean(proj.point(i), proj.point(j)),
    )?;
    Ok(T::one() - rho * rho)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingReport<T> {
    /// Smallest `p` with `R_p` below the tolerance, or the cap.
    pub dimension: usize,
    /// `R_1, ..., R_dimension`.
    pub residuals: Vec<T>,
    /// Number of point pairs the residuals were evaluated on.
    pub pairs: usize,
    /// True when `pairs` is a random subsample of all pairs.
    pub subsampled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingOptions {
    pub cap: usize,
    pub tolerance: f64,
    /// Clouds with at most this many points use every pair.
    pub full_pairs_up_to: usize,
    /// Sample size for larger clouds.
    pub sampled_pairs: usize,
    pub seed: u64,
}

impl Default for EmbeddingOptions {
    fn default() -> Self {
        Self {
            cap: 100,
            tolerance: 0.05,
            full_pairs_up_to: 900,
            sampled_pairs: 1_000_000,
            seed: 0x5eed_d1a6,
        }
    }
}

pub fn embedding_dimension<T: Real + RealField>(cloud: &PointCloud<T>) -> Result<EmbeddingReport<T>> {
    embedding_dimension_with(cloud, &EmbeddingOptions::default())
}

/// Ascends `p = 1, 2, ...` updating projected squared distances one principal
/// coordinate at a time, stopping at the first `R_p < tolerance`.
pub fn embedding_dimension_with<T: Real + RealField>(
    cloud: &PointCloud<T>,
    opts: &EmbeddingOptions,
) -> Result<EmbeddingReport<T>> {
    let size = cloud.len();
    if size < 3 {
        return Err(Error::Shape(format!("{size} points; at least 3 are needed")));
    }
    let subsampled = size > opts.full_pairs_up_to;
    let pairs: Vec<(u32, u32)> = if subsampled {
        let mut rng = seeded(opts.seed);
        (0..opts.sampled_pairs)
            .map(|_| loop {
                let (a, b) = (rng.random_range(0..size), rng.random_range(0..size));
                if a != b {
                    break (a.min(b) as u32, a.max(b) as u32);
                }
            })
            .collect()
    } else {
        (1..size)
            .flat_map(|j| (0..j).map(move |i| (i as u32, j as u32)))
            .collect()
    };
    let original: Vec<T> = pairs
        .par_iter()
        .map(|&(i, j)| euclidean(cloud.point(i as usize), cloud.point(j as usize)))
        .collect();

    let pca = Pca::new(cloud)?;
    let last = opts.cap.min(pca.max_dimension());
    let tolerance = T::lit(opts.tolerance);
    let mut squared = vec![T::zero(); pairs.len()];
    let mut residuals = Vec::new();
    for p in 0..last {
        squared.par_iter_mut().zip(&pairs).for_each(|(s, &(i, j))| {
            let d = pca.score(i as usize, p) - pca.score(j as usize, p);
            *s += d * d;
        });
        let r = residual_from(&original, &squared)?;
        residuals.push(r);
        if r < tolerance {
            break;
        }
    }
    let dimension = if residuals.last().is_some_and(|&r| r < tolerance) {
        residuals.len()
    } else {
        opts.cap
    };
    Ok(EmbeddingReport {
        dimension,
        residuals,
        pairs: pairs.len(),
        subsampled,
    })
}

/// Chunks are accumulated in parallel and merged in order, so the value does
/// not depend on the thread count.
fn residual_from<T: Real>(original: &[T], squared: &[T]) -> Result<T> {
    const CHUNK: usize = 8192;
    let parts: Vec<PearsonAccumulator<T>> = original
        .par_chunks(CHUNK)
        .zip(squared.par_chunks(CHUNK))
        .map(|(a, b)| {
            let mut acc = PearsonAccumulator::new();
            for (&x, &s) in a.iter().zip(b) {
                acc.push(x, Float::sqrt(s));
            }
            acc
        })
        .collect();
    let mut acc = PearsonAccumulator::new();
    for part in &parts {
        acc.merge(part);
    }
    match acc.correlation() {
        Ok(rho) => Ok(T::one() - rho * rho),
        Err(Error::UndefinedCorrelation("constant sample")) => {
            // original distances are checked first; a constant projection explains nothing
            if original.iter().all(|&d| d == original[0]) {
                Err(Error::UndefinedCorrelation("constant original distances"))
            } else {
                Ok(T::one())
            }
        }
        Err(e) => Err(e),
    }
}
