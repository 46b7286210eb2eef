use std::cmp::Ordering;

use super::{min_cost_assignment, Barcode};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Ground metric on the birth-death plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ground {
    #[default]
    LInf,
    L2,
}

/// Treatment of infinite bars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EssentialPolicy {
    /// Pair them by sorted birth at cost `|b - b'|`; differing counts are an error.
    #[default]
    MatchByBirth,
    Ignore,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WassersteinParams<T> {
    /// Order `q >= 1`.
    pub order: T,
    pub ground: Ground,
    pub essential: EssentialPolicy,
}

impl<T: Real> Default for WassersteinParams<T> {
    fn default() -> Self {
        Self {
            order: T::lit(2.0),
            ground: Ground::LInf,
            essential: EssentialPolicy::MatchByBirth,
        }
    }
}

impl Ground {
    fn between<T: Real>(self, a: (T, T), b: (T, T)) -> T {
        let (db, dd) = ((a.0 - b.0).abs(), (a.1 - b.1).abs());
        match self {
            Ground::LInf => db.max(dd),
            Ground::L2 => db.hypot(dd),
        }
    }

    fn to_diagonal<T: Real>(self, a: (T, T)) -> T {
        match self {
            Ground::LInf => (a.1 - a.0) / T::lit(2.0),
            Ground::L2 => (a.1 - a.0) / T::lit(2.0).sqrt(),
        }
    }
}

/// `q`-Wasserstein distance between the dimension-`dim` parts of two
/// barcodes: an optimal partial matching of finite points, unmatched points
/// paying their distance to the diagonal.
pub fn wasserstein<T: Real>(
    a: &Barcode<T>,
    b: &Barcode<T>,
    dim: usize,
    params: &WassersteinParams<T>,
) -> Result<T> {
    let q = params.order;
    if q.is_nan() || q < T::one() || q.is_infinite() {
        return Err(Error::InvalidMetric(format!("Wasserstein order {q} must be finite and >= 1")));
    }
    let split = |bc: &Barcode<T>| {
        let (mut fin, mut ess) = (Vec::new(), Vec::new());
        for p in bc.dimension(dim) {
            if p.is_infinite() {
                ess.push(p.birth);
            } else {
                fin.push((p.birth, p.death));
            }
        }
        (fin, ess)
    };
    let (mut fa, ea) = split(a);
    let (mut fb, eb) = split(b);
    // identical work for (a, b) and (b, a) makes the distance exactly symmetric
    if compare_points(&fa, &fb) == Ordering::Greater {
        std::mem::swap(&mut fa, &mut fb);
    }

    let mut total = T::zero();
    if params.essential == EssentialPolicy::MatchByBirth {
        if ea.len() != eb.len() {
            return Err(Error::IncomparableDiagrams(ea.len(), eb.len()));
        }
        let (mut ea, mut eb) = (ea, eb);
        let by = |x: &T, y: &T| x.partial_cmp(y).unwrap_or(Ordering::Equal);
        ea.sort_by(by);
        eb.sort_by(by);
        for (x, y) in ea.iter().zip(&eb) {
            total += (*x - *y).abs().powf(q);
        }
    }
    total += finite_cost(&fa, &fb, params.ground, q)?;
    Ok(total.powf(T::one() / q))
}

fn compare_points<T: Real>(a: &[(T, T)], b: &[(T, T)]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.iter()
            .zip(b)
            .map(|(x, y)| {
                x.0.partial_cmp(&y.0)
                    .unwrap_or(Ordering::Equal)
                    .then(x.1.partial_cmp(&y.1).unwrap_or(Ordering::Equal))
            })
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// Optimal cost (sum of `q`-th powers) over the diagonal-augmented square
/// problem: rows are `a` then diagonal copies of `b`, columns are `b` then
/// diagonal copies of `a`.
fn finite_cost<T: Real>(a: &[(T, T)], b: &[(T, T)], ground: Ground, q: T) -> Result<T> {
    let (m, n) = (a.len(), b.len());
    let k = m + n;
    if k == 0 {
        return Ok(T::zero());
    }
    let mut cost = vec![T::zero(); k * k];
    for i in 0..k {
        for j in 0..k {
            cost[i * k + j] = match (i < m, j < n) {
                (true, true) => ground.between(a[i], b[j]).powf(q),
                (true, false) if j - n == i => ground.to_diagonal(a[i]).powf(q),
                (false, true) if i - m == j => ground.to_diagonal(b[j]).powf(q),
                (false, false) => T::zero(),
                _ => T::infinity(),
            };
        }
    }
    let col = min_cost_assignment(k, &cost)?;
    Ok(col.iter().enumerate().map(|(r, &c)| cost[r * k + c]).sum())
}
