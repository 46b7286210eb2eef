//! Vietoris-Rips persistence by reducing the coboundary matrix, with clearing,
//! emergent pairs and truncation at the enclosing radius.
//!
//! Simplices are indexed in the combinatorial number system: a simplex with
//! vertices `v_0 < ... < v_k` has index `sum C(v_m, m + 1)`. For edges this is
//! the condensed distance rank. Columns are processed in reverse filtration
//! order (diameter descending, index ascending); within a coboundary the pivot
//! is the coface with the smallest diameter, ties going to the largest index.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use super::{Barcode, PersistencePair, UnionFind};
use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Barcode of dimensions `0..=max_dim`, truncated at the enclosing radius
/// (which does not change the barcode).
pub fn vr_persistence<T: Real>(dist: &DistanceMatrix<T>, max_dim: usize) -> Result<Barcode<T>> {
    vr_persistence_with_threshold(dist, max_dim, None)
}

/// As [`vr_persistence`] but only simplices of diameter `<= threshold` enter.
/// Classes still alive at the threshold are reported with infinite death.
pub fn vr_persistence_with_threshold<T: Real>(
    dist: &DistanceMatrix<T>,
    max_dim: usize,
    threshold: Option<T>,
) -> Result<Barcode<T>> {
    if let Some(bad) = dist.condensed().iter().find(|d| !d.is_finite()) {
        return Err(Error::InvalidMetric(format!("non-finite distance {bad}")));
    }
    let n = dist.size();
    if n == 0 {
        return Ok(Barcode::new([]));
    }
    let threshold = threshold.unwrap_or_else(|| dist.enclosing_radius());
    let rips = Rips {
        dist,
        n,
        binom: Binomial::new(n, max_dim + 2)?,
        threshold,
    };

    let mut pairs = Vec::new();
    let mut columns = rips.persistence_zero(&mut pairs);
    for dim in 1..=max_dim {
        let pivots = rips.reduce(dim, &columns, &mut pairs);
        if dim < max_dim {
            columns = rips.columns(dim + 1, &pivots);
        }
    }
    Ok(Barcode::new(pairs))
}

#[derive(Debug, Clone, Copy)]
struct Cell<T> {
    diam: T,
    index: u64,
}

/// Heap order: the greatest entry is the pivot candidate.
struct ByPivot<T>(Cell<T>);

impl<T: Real> PartialEq for ByPivot<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Real> Eq for ByPivot<T> {}

impl<T: Real> PartialOrd for ByPivot<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for ByPivot<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .diam
            .partial_cmp(&self.0.diam)
            .unwrap_or(Ordering::Equal)
            .then(self.0.index.cmp(&other.0.index))
    }
}

/// `C(v, k)` for `v <= n`, `k <= kmax`.
struct Binomial {
    rows: Vec<Vec<u64>>,
}

impl Binomial {
    fn new(n: usize, kmax: usize) -> Result<Self> {
        let mut rows = vec![vec![0u64; n + 1]; kmax + 1];
        for v in 0..=n {
            rows[0][v] = 1;
            for k in 1..=kmax.min(v) {
                let below = if k < v { rows[k][v - 1] } else { 0 };
                rows[k][v] = rows[k - 1][v - 1]
                    .checked_add(below)
                    .ok_or_else(|| Error::Shape(format!("{n} points overflow simplex indices")))?;
            }
        }
        Ok(Self { rows })
    }

    #[inline]
    fn get(&self, v: usize, k: usize) -> u64 {
        self.rows[k][v]
    }
}

struct Rips<'a, T> {
    dist: &'a DistanceMatrix<T>,
    n: usize,
    binom: Binomial,
    threshold: T,
}

impl<T: Real> Rips<'_, T> {
    /// Vertices of the `dim`-simplex `index`, largest first.
    fn vertices(&self, mut index: u64, dim: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(dim + 1);
        let mut top = self.n;
        for k in (1..=dim + 1).rev() {
            // largest v < top with C(v, k) <= index
            let (mut lo, mut hi) = (k - 1, top - 1);
            while lo < hi {
                let mid = (lo + hi).div_ceil(2);
                if self.binom.get(mid, k) <= index {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            out.push(lo);
            index -= self.binom.get(lo, k);
            top = lo;
        }
        out
    }

    fn diameter(&self, vertices: &[usize]) -> T {
        let mut d = T::zero();
        for (a, &u) in vertices.iter().enumerate() {
            for &w in &vertices[a + 1..] {
                d = d.max(self.dist.get(u, w));
            }
        }
        d
    }

    /// Cofaces in decreasing index order.
    fn cofaces(&self, cell: Cell<T>, dim: usize) -> Cofaces<'_, '_, T> {
        Cofaces {
            rips: self,
            vertices: self.vertices(cell.index, dim),
            diam: cell.diam,
            below: cell.index,
            above: 0,
            v: self.n as i64 - 1,
            k: dim + 1,
        }
    }

    /// Dimension 0 by Kruskal; returns the edges that close a cycle, which
    /// are the dimension-1 columns, in reverse filtration order.
    fn persistence_zero(&self, pairs: &mut Vec<PersistencePair<T>>) -> Vec<Cell<T>> {
        let mut edges: Vec<Cell<T>> = self
            .dist
            .condensed()
            .iter()
            .enumerate()
            .filter(|(_, &d)| d <= self.threshold)
            .map(|(i, &diam)| Cell { diam, index: i as u64 })
            .collect();
        edges.sort_by(|a, b| {
            a.diam
                .partial_cmp(&b.diam)
                .unwrap_or(Ordering::Equal)
                .then(b.index.cmp(&a.index))
        });
        let mut uf = UnionFind::new(self.n);
        let mut columns = Vec::new();
        for e in edges {
            let v = self.vertices(e.index, 1);
            if uf.union(v[0], v[1]) {
                pairs.push(PersistencePair::new(0, T::zero(), e.diam));
            } else {
                columns.push(e);
            }
        }
        for v in 0..self.n {
            if uf.find(v) == v {
                pairs.push(PersistencePair::new(0, T::zero(), T::infinity()));
            }
        }
        columns.reverse();
        columns
    }

    /// All `dim`-simplices within the threshold that are not pivots of the
    /// previous dimension, in reverse filtration order.
    fn columns(&self, dim: usize, cleared: &HashMap<u64, usize>) -> Vec<Cell<T>> {
        let count = self.binom.get(self.n, dim + 1);
        let mut out: Vec<Cell<T>> = (0..count)
            .filter(|i| !cleared.contains_key(i))
            .map(|index| Cell {
                diam: self.diameter(&self.vertices(index, dim)),
                index,
            })
            .filter(|c| c.diam <= self.threshold)
            .collect();
        out.sort_by(|a, b| {
            b.diam
                .partial_cmp(&a.diam)
                .unwrap_or(Ordering::Equal)
                .then(a.index.cmp(&b.index))
        });
        out
    }

    /// Reduces the coboundary columns of dimension `dim`. Returns the pivot
    /// map (coface index to column position) for clearing.
    fn reduce(
        &self,
        dim: usize,
        columns: &[Cell<T>],
        pairs: &mut Vec<PersistencePair<T>>,
    ) -> HashMap<u64, usize> {
        let mut pivots: HashMap<u64, usize> = HashMap::new();
        let mut reduction: Vec<Vec<Cell<T>>> = vec![Vec::new(); columns.len()];
        for (pos, &col) in columns.iter().enumerate() {
            let mut heap = BinaryHeap::new();
            let mut added = Vec::new();
            let mut pivot = self.init_coboundary(col, dim, &pivots, &mut heap);
            loop {
                let Some(p) = pivot else {
                    pairs.push(PersistencePair::new(dim, col.diam, T::infinity()));
                    break;
                };
                match pivots.get(&p.index) {
                    Some(&other) => {
                        for &c in std::iter::once(&columns[other]).chain(&reduction[other]) {
                            added.push(c);
                            self.push_coboundary(c, dim, &mut heap);
                        }
                        pivot = peek_pivot(&mut heap);
                    }
                    None => {
                        pairs.push(PersistencePair::new(dim, col.diam, p.diam));
                        pivots.insert(p.index, pos);
                        reduction[pos] = cancel_mod2(added);
                        break;
                    }
                }
            }
        }
        pivots
    }

    fn push_coboundary(&self, cell: Cell<T>, dim: usize, heap: &mut BinaryHeap<ByPivot<T>>) {
        for c in self.cofaces(cell, dim) {
            if c.diam <= self.threshold {
                heap.push(ByPivot(c));
            }
        }
    }

    /// Fills the heap with the coboundary of `cell` and returns its pivot,
    /// or returns at once when the first coface of equal diameter is an
    /// unclaimed pivot (an emergent pair; the heap is then left incomplete).
    fn init_coboundary(
        &self,
        cell: Cell<T>,
        dim: usize,
        pivots: &HashMap<u64, usize>,
        heap: &mut BinaryHeap<ByPivot<T>>,
    ) -> Option<Cell<T>> {
        let mut check_emergent = true;
        let mut buffer = Vec::new();
        for c in self.cofaces(cell, dim) {
            if c.diam > self.threshold {
                continue;
            }
            if check_emergent && c.diam == cell.diam {
                if !pivots.contains_key(&c.index) {
                    return Some(c);
                }
                check_emergent = false;
            }
            buffer.push(ByPivot(c));
        }
        heap.extend(buffer);
        peek_pivot(heap)
    }
}

/// Pops entries until the top is a coface with nonzero coefficient mod 2.
fn pop_pivot<T: Real>(heap: &mut BinaryHeap<ByPivot<T>>) -> Option<Cell<T>> {
    let mut pivot = heap.pop()?.0;
    while let Some(top) = heap.peek() {
        if top.0.index != pivot.index {
            break;
        }
        heap.pop();
        pivot = heap.pop()?.0;
    }
    Some(pivot)
}

fn peek_pivot<T: Real>(heap: &mut BinaryHeap<ByPivot<T>>) -> Option<Cell<T>> {
    let p = pop_pivot(heap)?;
    heap.push(ByPivot(p));
    Some(p)
}

fn cancel_mod2<T: Real>(mut cells: Vec<Cell<T>>) -> Vec<Cell<T>> {
    cells.sort_by_key(|c| c.index);
    let mut out: Vec<Cell<T>> = Vec::with_capacity(cells.len());
    for c in cells {
        if out.last().is_some_and(|l| l.index == c.index) {
            out.pop();
        } else {
            out.push(c);
        }
    }
    out
}

struct Cofaces<'r, 'd, T> {
    rips: &'r Rips<'d, T>,
    vertices: Vec<usize>,
    diam: T,
    below: u64,
    above: u64,
    v: i64,
    k: usize,
}

impl<T: Real> Iterator for Cofaces<'_, '_, T> {
    type Item = Cell<T>;

    fn next(&mut self) -> Option<Cell<T>> {
        let binom = &self.rips.binom;
        loop {
            if self.v < self.k as i64 {
                return None;
            }
            let v = self.v as usize;
            self.v -= 1;
            if self.k > 0 && binom.get(v, self.k) <= self.below {
                // v belongs to the simplex
                self.below -= binom.get(v, self.k);
                self.above += binom.get(v, self.k + 1);
                self.k -= 1;
                continue;
            }
            let mut diam = self.diam;
            for &u in &self.vertices {
                diam = diam.max(self.rips.dist.get(u, v));
            }
            return Some(Cell {
                diam,
                index: self.above + binom.get(v, self.k + 1) + self.below,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::PointCloud;

    fn square() -> DistanceMatrix<f64> {
        DistanceMatrix::from_cloud(
            &PointCloud::from_rows(2, vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0]).unwrap(),
        )
    }

    #[test]
    fn simplex_indexing_round_trips() {
        let d = DistanceMatrix::from_fn(7, |_, _| 1.0);
        let rips = Rips { dist: &d, n: 7, binom: Binomial::new(7, 4).unwrap(), threshold: 1.0 };
        let mut index = 0;
        for c in 2..7 {
            for b in 1..c {
                for a in 0..b {
                    assert_eq!(rips.vertices(index, 2), vec![c, b, a]);
                    index += 1;
                }
            }
        }
        let cofaces: Vec<u64> = rips
            .cofaces(Cell { diam: 1.0, index: 3 }, 1)
            .map(|c| c.index)
            .collect();
        // edge {0, 3}: cofaces {0,3,6}, {0,3,5}, {0,3,4}, {0,2,3}, {0,1,3}
        let expected: Vec<u64> = [[0, 3, 6], [0, 3, 5], [0, 3, 4], [0, 2, 3], [0, 1, 3]]
            .iter()
            .map(|t| (t[0] + t[1] * (t[1] - 1) / 2 + t[2] * (t[2] - 1) * (t[2] - 2) / 6) as u64)
            .collect();
        assert_eq!(cofaces, expected);
    }

    #[test]
    fn two_points() {
        let d = DistanceMatrix::from_condensed(2, vec![2.5]).unwrap();
        let b = vr_persistence(&d, 1).unwrap();
        assert_eq!(
            b.pairs(),
            &[PersistencePair::new(0, 0.0, 2.5), PersistencePair::new(0, 0.0, f64::INFINITY)]
        );
    }

    #[test]
    fn unit_square_has_one_loop() {
        let b = vr_persistence(&square(), 1).unwrap();
        assert_eq!(b.finite_count(0), 3);
        assert_eq!(b.infinite_count(0), 1);
        let loops: Vec<_> = b.dimension(1).copied().collect();
        assert_eq!(loops, vec![PersistencePair::new(1, 1.0, 2f64.sqrt())]);
    }

    #[test]
    fn rejects_non_finite_distances() {
        let d = DistanceMatrix::from_condensed(2, vec![f64::INFINITY]).unwrap();
        assert!(matches!(vr_persistence(&d, 1), Err(Error::InvalidMetric(_))));
    }

    #[test]
    fn threshold_below_the_loop_keeps_it_alive() {
        let b = vr_persistence_with_threshold(&square(), 1, Some(1.2)).unwrap();
        assert_eq!(b.infinite_count(1), 1);
        assert_eq!(b.infinite_count(0), 1);
    }
}
