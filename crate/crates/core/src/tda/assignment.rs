use crate::error::{Error, Result};
use crate::scalar::Real;

/// Minimum-cost perfect assignment on a square cost matrix (row-major,
/// entries may be `+inf` for forbidden cells). Shortest augmenting paths with
/// potentials, `O(k^3)`. Returns `col[row]`.
pub fn min_cost_assignment<T: Real>(k: usize, cost: &[T]) -> Result<Vec<usize>> {
    if cost.len() != k * k {
        return Err(Error::Shape(format!("{} costs for a {k}x{k} problem", cost.len())));
    }
    let inf = T::infinity();
    // 1-based; index 0 is the virtual root
    let mut u = vec![T::zero(); k + 1];
    let mut v = vec![T::zero(); k + 1];
    let mut row_of = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for i in 1..=k {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=k {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * k + j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if j1 == 0 || !delta.is_finite() {
                return Err(Error::Shape("assignment has no finite solution".into()));
            }
            for j in 0..=k {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col = vec![0; k];
    for j in 1..=k {
        col[row_of[j] - 1] = j - 1;
    }
    Ok(col)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_problem() {
        let c = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let col = min_cost_assignment(3, &c).unwrap();
        let total: f64 = col.iter().enumerate().map(|(r, &j)| c[r * 3 + j]).sum();
        assert_eq!(total, 5.0);
    }

    #[test]
    fn forbidden_cells() {
        let inf = f64::INFINITY;
        let c = [inf, 1.0, 2.0, inf];
        assert_eq!(min_cost_assignment(2, &c).unwrap(), vec![1, 0]);
        assert!(min_cost_assignment(2, &[inf, inf, 1.0, 1.0]).is_err());
        assert_eq!(min_cost_assignment::<f64>(0, &[]).unwrap(), Vec::<usize>::new());
    }
}
