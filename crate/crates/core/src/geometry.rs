//! Geometric comparison of point clouds with the flat torus.
//!
//! Nodes sit on the torus `(1/2pi) S^1 x (1/2pi) S^1` in `R^4`; the geometry
//! score is the Pearson correlation between all pairwise cloud distances and
//! the corresponding chordal distances on that torus.

use rayon::prelude::*;

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::map::PointCloud;
use crate::network::NodeId;
use crate::scalar::Real;

/// A point of the embedded torus in `R^4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint<T>(pub [T; 4]);

pub fn torus_embedding<T: Real>(i: NodeId, n: usize) -> TorusPoint<T> {
    let tau = T::lit(std::f64::consts::TAU);
    let r = T::one() / tau;
    let ax = tau * T::of_usize(i.x as usize) / T::of_usize(n);
    let ay = tau * T::of_usize(i.y as usize) / T::of_usize(n);
    TorusPoint([r * ax.cos(), r * ax.sin(), r * ay.cos(), r * ay.sin()])
}

/// The `n^2` regularly spaced torus points as an `N x 4` cloud, in node index order.
pub fn torus_cloud<T: Real>(n: usize) -> PointCloud<T> {
    let coords = (0..n * n)
        .flat_map(|idx| torus_embedding::<T>(NodeId::from_index(idx, n), n).0)
        .collect();
    PointCloud::from_rows(4, coords).expect("four coordinates per node")
}

/// Closed-form chordal distance `(1/pi) (sin^2(dx pi/n) + sin^2(dy pi/n))^(1/2)`.
pub fn torus_chordal_distance<T: Real>(i: NodeId, j: NodeId, n: usize) -> T {
    let pi = T::lit(std::f64::consts::PI);
    let sin_sq = |k: usize| {
        let s = (pi * T::of_usize(k) / T::of_usize(n)).sin();
        s * s
    };
    let (dx, dy) = offsets(i, j, n);
    (sin_sq(dx) + sin_sq(dy)).sqrt() / pi
}

/// Periodic offsets folded into `0..=n/2`; `k` and `n - k` give the same
/// chord, and folding makes such pairs tie exactly in floating point.
fn offsets(i: NodeId, j: NodeId, n: usize) -> (usize, usize) {
    let m = n as i64;
    let fold = |a: u32, b: u32| {
        let d = (a as i64 - b as i64).rem_euclid(m);
        d.min(m - d) as usize
    };
    (fold(i.x, j.x), fold(i.y, j.y))
}

/// `sin^2(k pi / n)` for `k = 0..=n/2`, so chordal distances cost two lookups.
pub(crate) struct ChordalTable<T> {
    n: usize,
    sin_sq: Vec<T>,
}

impl<T: Real> ChordalTable<T> {
    pub(crate) fn new(n: usize) -> Self {
        let pi = T::lit(std::f64::consts::PI);
        let sin_sq = (0..=n / 2)
            .map(|k| {
                let s = (pi * T::of_usize(k) / T::of_usize(n)).sin();
                s * s
            })
            .collect();
        Self { n, sin_sq }
    }

    #[inline]
    pub(crate) fn distance(&self, i: NodeId, j: NodeId) -> T {
        let (dx, dy) = offsets(i, j, self.n);
        (self.sin_sq[dx] + self.sin_sq[dy]).sqrt() / T::lit(std::f64::consts::PI)
    }
}

/// Streaming, mergeable accumulator for the Pearson correlation of paired
/// samples (Welford updates, pairwise merges).
#[derive(Debug, Clone, Copy, Default)]
pub struct PearsonAccumulator<T> {
    count: usize,
    mean_a: T,
    mean_b: T,
    m2_a: T,
    m2_b: T,
    co: T,
}

impl<T: Real> PearsonAccumulator<T> {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, a: T, b: T) {
        self.count += 1;
        let k = T::of_usize(self.count);
        let da = a - self.mean_a;
        self.mean_a += da / k;
        let db = b - self.mean_b;
        self.mean_b += db / k;
        self.m2_a += da * (a - self.mean_a);
        self.m2_b += db * (b - self.mean_b);
        self.co += da * (b - self.mean_b);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (T::of_usize(self.count), T::of_usize(other.count));
        let total = na + nb;
        let da = other.mean_a - self.mean_a;
        let db = other.mean_b - self.mean_b;
        let w = na * nb / total;
        self.m2_a += other.m2_a + da * da * w;
        self.m2_b += other.m2_b + db * db * w;
        self.co += other.co + da * db * w;
        self.mean_a += da * nb / total;
        self.mean_b += db * nb / total;
        self.count += other.count;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn correlation(&self) -> Result<T> {
        if self.count < 2 {
            return Err(Error::UndefinedCorrelation("fewer than two samples"));
        }
        if self.m2_a <= T::zero() || self.m2_b <= T::zero() {
            return Err(Error::UndefinedCorrelation("constant sample"));
        }
        let r = self.co / (self.m2_a.sqrt() * self.m2_b.sqrt());
        Ok(r.max(-T::one()).min(T::one()))
    }
}

pub fn pearson_correlation<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("lengths {} and {} differ", a.len(), b.len())));
    }
    let mut acc = PearsonAccumulator::new();
    for (&x, &y) in a.iter().zip(b) {
        acc.push(x, y);
    }
    acc.correlation()
}

/// Pearson correlation over all unordered pairs `i < j`, with `a(i, j)` and
/// `b(i, j)` evaluated on the fly. Rows are accumulated in parallel and merged
/// in row order, so the result is independent of the thread count.
pub fn pairwise_correlation<T, A, B>(size: usize, a: A, b: B) -> Result<T>
where
    T: Real,
    A: Fn(usize, usize) -> T + Sync,
    B: Fn(usize, usize) -> T + Sync,
{
    let rows: Vec<PearsonAccumulator<T>> = (1..size.max(1))
        .into_par_iter()
        .map(|j| {
            let mut acc = PearsonAccumulator::new();
            for i in 0..j {
                acc.push(a(i, j), b(i, j));
            }
            acc
        })
        .collect();
    let mut total = PearsonAccumulator::new();
    for r in &rows {
        total.merge(r);
    }
    total.correlation()
}

/// Geometry score of a cloud of `n^2` points (node index order).
pub fn geometry_score<T: Real>(cloud: &PointCloud<T>, n: usize) -> Result<T> {
    if cloud.len() != n * n {
        return Err(Error::Shape(format!(
            "cloud has {} points, expected {}",
            cloud.len(),
            n * n
        )));
    }
    geometry_score_from_distances(&DistanceMatrix::from_cloud(cloud), n)
}

/// As [`geometry_score`] but reusing precomputed cloud distances.
pub fn geometry_score_from_distances<T: Real>(dist: &DistanceMatrix<T>, n: usize) -> Result<T> {
    if dist.size() != n * n {
        return Err(Error::Shape(format!(
            "distance matrix has {} points, expected {}",
            dist.size(),
            n * n
        )));
    }
    let table = ChordalTable::<T>::new(n);
    pairwise_correlation(
        dist.size(),
        |i, j| dist.get(i, j),
        |i, j| table.distance(NodeId::from_index(i, n), NodeId::from_index(j, n)),
    )
}
