//! Condensed pairwise distance matrices.
//!
//! Entry `{i, j}` with `i < j` lives at `j * (j - 1) / 2 + i`, which is also
//! the colexicographic rank of the edge `{i, j}` used by the persistence code.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::map::PointCloud;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T> {
    size: usize,
    lower: Vec<T>,
}

#[inline]
pub fn pair_rank(i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    j * (j - 1) / 2 + i
}

#[inline]
pub fn euclidean<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x - y;
            d * d
        })
        .sum::<T>()
        .sqrt()
}

impl<T: Real> DistanceMatrix<T> {
    /// Builds from `f(i, j)` for `i < j`. Rows are evaluated in parallel;
    /// every entry is computed independently, so the result is deterministic.
    pub fn from_fn<F>(size: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> T + Sync,
    {
        let rows: Vec<Vec<T>> = (1..size.max(1))
            .into_par_iter()
            .map(|j| (0..j).map(|i| f(i, j)).collect())
            .collect();
        Self {
            size,
            lower: rows.concat(),
        }
    }

    /// Euclidean distances between the points of `cloud`.
    pub fn from_cloud(cloud: &PointCloud<T>) -> Self {
        Self::from_fn(cloud.len(), |i, j| euclidean(cloud.point(i), cloud.point(j)))
    }

    /// Validates a dense matrix: square, symmetric, zero diagonal, nonnegative.
    pub fn from_full(rows: &[Vec<T>]) -> Result<Self> {
        let size = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::InvalidMetric(format!("row {i} has length {}", row.len())));
            }
            if row[i] != T::zero() {
                return Err(Error::InvalidMetric(format!("nonzero diagonal at {i}")));
            }
            for (j, &d) in row.iter().enumerate() {
                if d.is_nan() || d < T::zero() {
                    return Err(Error::InvalidMetric(format!("entry ({i}, {j}) = {d}")));
                }
                if d != rows[j][i] {
                    return Err(Error::InvalidMetric(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self::from_fn(size, |i, j| rows[i][j]))
    }

    /// Wraps an already condensed lower triangle.
    pub fn from_condensed(size: usize, lower: Vec<T>) -> Result<Self> {
        if lower.len() != size * size.saturating_sub(1) / 2 {
            return Err(Error::Shape(format!(
                "{} entries do not form a condensed {size}x{size} matrix",
                lower.len()
            )));
        }
        if let Some(bad) = lower.iter().find(|&&d| d.is_nan() || d < T::zero()) {
            return Err(Error::InvalidMetric(format!("entry {bad}")));
        }
        Ok(Self { size, lower })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        if i == j {
            T::zero()
        } else {
            self.lower[pair_rank(i, j)]
        }
    }

    /// Condensed entries in rank order.
    pub fn condensed(&self) -> &[T] {
        &self.lower
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            size: self.size,
            lower: self.lower.iter().map(|&d| d * s).collect(),
        }
    }

    pub fn max(&self) -> T {
        self.lower.iter().copied().fold(T::zero(), T::max)
    }

    /// `min_i max_j d(i, j)`: beyond this radius the Rips complex is a cone.
    pub fn enclosing_radius(&self) -> T {
        (0..self.size)
            .map(|i| (0..self.size).map(|j| self.get(i, j)).fold(T::zero(), T::max))
            .fold(T::infinity(), T::min)
    }
}
