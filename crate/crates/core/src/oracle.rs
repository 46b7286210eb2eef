//! Slow, obviously-correct reference implementations used by tests.
//!
//! Available under `cfg(test)` and with the `oracle` feature; nothing here is
//! meant for production sizes.

use std::cmp::Ordering;

use crate::contagion::ContagionConfig;
use crate::distance::DistanceMatrix;
use crate::map::PointCloud;
use crate::network::Network;
use crate::scalar::Real;
use crate::tda::{Barcode, EssentialPolicy, PersistencePair, WassersteinParams};

/// Contagion by full rescans: each step activates every inactive node whose
/// active-neighbour fraction exceeds the threshold.
pub fn naive_contagion(net: &Network, seed: &[usize], cfg: &ContagionConfig) -> Vec<u32> {
    let nodes = net.node_count();
    let mut times = vec![cfg.sentinel; nodes];
    for &s in seed {
        times[s] = 0;
    }
    let mut t = 0;
    loop {
        let newly: Vec<usize> = (0..nodes)
            .filter(|&v| times[v] == cfg.sentinel)
            .filter(|&v| {
                let active = net
                    .neighbors(v)
                    .iter()
                    .filter(|&&u| times[u as usize] <= t)
                    .count();
                let degree = net.degree(v);
                degree > 0 && active as f64 / degree as f64 > cfg.threshold.value()
            })
            .collect();
        if newly.is_empty() {
            return times;
        }
        t += 1;
        for v in newly {
            times[v] = t;
        }
    }
}

/// Two-pass textbook Pearson correlation.
pub fn naive_pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    cov / (va * vb).sqrt()
}

/// `1 - rho^2` over all pairs by a double loop.
pub fn naive_residual_variance(orig: &PointCloud<f64>, proj: &PointCloud<f64>) -> f64 {
    let dist = |c: &PointCloud<f64>, i: usize, j: usize| -> f64 {
        c.point(i)
            .iter()
            .zip(c.point(j))
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for i in 0..orig.len() {
        for j in i + 1..orig.len() {
            a.push(dist(orig, i, j));
            b.push(dist(proj, i, j));
        }
    }
    let r = naive_pearson(&a, &b);
    1.0 - r * r
}

/// Vietoris-Rips barcode by the standard column reduction of the full
/// boundary matrix over `Z/2`, simplices ordered by (diameter, dimension,
/// lexicographic vertices). Exponential in `max_dim`; meant for a handful of
/// points.
pub fn naive_vr_barcode<T: Real>(dist: &DistanceMatrix<T>, max_dim: usize) -> Barcode<T> {
    let n = dist.size();
    let mut simplices: Vec<(T, Vec<usize>)> = Vec::new();
    let mut current: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    for _ in 0..=max_dim + 1 {
        let mut next = Vec::new();
        for s in &current {
            let diam = s
                .iter()
                .flat_map(|&a| s.iter().map(move |&b| (a, b)))
                .map(|(a, b)| dist.get(a, b))
                .fold(T::zero(), T::max);
            simplices.push((diam, s.clone()));
            for v in s.last().map_or(0, |&l| l + 1)..n {
                let mut t = s.clone();
                t.push(v);
                next.push(t);
            }
        }
        current = next;
    }
    simplices.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.len().cmp(&b.1.len()))
            .then_with(|| a.1.cmp(&b.1))
    });
    let position: std::collections::HashMap<Vec<usize>, usize> = simplices
        .iter()
        .enumerate()
        .map(|(k, s)| (s.1.clone(), k))
        .collect();

    // columns as sorted row lists; low = last entry
    let mut columns: Vec<Vec<usize>> = simplices
        .iter()
        .map(|(_, s)| {
            let mut rows: Vec<usize> = if s.len() == 1 {
                Vec::new()
            } else {
                (0..s.len())
                    .map(|skip| {
                        let face: Vec<usize> =
                            s.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &v)| v).collect();
                        position[&face]
                    })
                    .collect()
            };
            rows.sort_unstable();
            rows
        })
        .collect();
    let mut low_owner: std::collections::HashMap<usize, usize> = Default::default();
    let mut paired = vec![false; simplices.len()];
    let mut pairs = Vec::new();
    for j in 0..columns.len() {
        while let Some(&low) = columns[j].last() {
            match low_owner.get(&low) {
                Some(&k) => {
                    let merged = symmetric_difference(&columns[j], &columns[k]);
                    columns[j] = merged;
                }
                None => break,
            }
        }
        if let Some(&low) = columns[j].last() {
            low_owner.insert(low, j);
            paired[low] = true;
            paired[j] = true;
            let dim = simplices[low].1.len() - 1;
            if dim <= max_dim {
                pairs.push(PersistencePair::new(dim, simplices[low].0, simplices[j].0));
            }
        }
    }
    for (k, (diam, s)) in simplices.iter().enumerate() {
        let dim = s.len() - 1;
        if !paired[k] && dim <= max_dim && columns[k].is_empty() {
            pairs.push(PersistencePair::new(dim, *diam, T::infinity()));
        }
    }
    Barcode::new(pairs)
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x == y => {
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => {
                out.push(*x);
                i += 1;
            }
            (Some(_), Some(y)) => {
                out.push(*y);
                j += 1;
            }
            (Some(x), None) => {
                out.push(*x);
                i += 1;
            }
            (None, Some(y)) => {
                out.push(*y);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// `q`-Wasserstein distance by enumerating every partial matching of the
/// finite points. Feasible up to about six points per side.
pub fn brute_force_wasserstein(
    a: &Barcode<f64>,
    b: &Barcode<f64>,
    dim: usize,
    params: &WassersteinParams<f64>,
) -> f64 {
    let q = params.order;
    let ground = |x: (f64, f64), y: (f64, f64)| match params.ground {
        crate::tda::Ground::LInf => (x.0 - y.0).abs().max((x.1 - y.1).abs()),
        crate::tda::Ground::L2 => (x.0 - y.0).hypot(x.1 - y.1),
    };
    let diag = |x: (f64, f64)| match params.ground {
        crate::tda::Ground::LInf => (x.1 - x.0) / 2.0,
        crate::tda::Ground::L2 => (x.1 - x.0) / 2f64.sqrt(),
    };
    let finite = |bc: &Barcode<f64>| -> Vec<(f64, f64)> {
        bc.dimension(dim).filter(|p| !p.is_infinite()).map(|p| (p.birth, p.death)).collect()
    };
    let (fa, fb) = (finite(a), finite(b));

    #[allow(clippy::too_many_arguments)]
    fn search(
        i: usize,
        fa: &[(f64, f64)],
        fb: &[(f64, f64)],
        used: &mut Vec<bool>,
        cost: f64,
        best: &mut f64,
        pair_cost: &dyn Fn(usize, usize) -> f64,
        diag_a: &dyn Fn(usize) -> f64,
        diag_b: &dyn Fn(usize) -> f64,
    ) {
        if i == fa.len() {
            let rest: f64 = (0..fb.len()).filter(|&j| !used[j]).map(diag_b).sum();
            *best = best.min(cost + rest);
            return;
        }
        search(i + 1, fa, fb, used, cost + diag_a(i), best, pair_cost, diag_a, diag_b);
        for j in 0..fb.len() {
            if !used[j] {
                used[j] = true;
                search(i + 1, fa, fb, used, cost + pair_cost(i, j), best, pair_cost, diag_a, diag_b);
                used[j] = false;
            }
        }
    }

    let mut best = f64::INFINITY;
    search(
        0,
        &fa,
        &fb,
        &mut vec![false; fb.len()],
        0.0,
        &mut best,
        &|i, j| ground(fa[i], fb[j]).powf(q),
        &|i| diag(fa[i]).powf(q),
        &|j| diag(fb[j]).powf(q),
    );
    if params.essential == EssentialPolicy::MatchByBirth {
        let births = |bc: &Barcode<f64>| -> Vec<f64> {
            let mut v: Vec<f64> = bc.dimension(dim).filter(|p| p.is_infinite()).map(|p| p.birth).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        best += births(a)
            .iter()
            .zip(births(b))
            .map(|(x, y)| (x - y).abs().powf(q))
            .sum::<f64>();
    }
    best.powf(1.0 / q)
}

/// Number of partial matchings between `m` and `n` points, for sizing tests.
pub fn partial_matching_count(m: usize, n: usize) -> u64 {
    // sum_k C(m,k) C(n,k) k!
    let mut total = 0u64;
    for k in 0..=m.min(n) {
        let mut term = 1u64;
        for i in 0..k {
            term = term * (m - i) as u64 * (n - i) as u64 / (i + 1) as u64;
        }
        total += term;
    }
    total
}
