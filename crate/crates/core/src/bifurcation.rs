//! Analytic bifurcation curves for the threshold contagion on networks with
//! `gamma = 0`: the wavefront threshold, the new-cluster horizon and its
//! lower bound, and the new-cluster threshold obtained from the distribution
//! of the number `d_in` of non-geometric edges into an active cluster.
//!
//! The `d_in` functions are generic over the number type so that the exact
//! distribution can be summed in [`Rational`](crate::Rational) arithmetic.

use num_traits::{pow, FromPrimitive, Num};

use crate::error::{Error, Result};
use crate::Rational;

/// Wavefront threshold `k / (dG + dNG)`, where `k` is the number of
/// geometric edges a node on a straight front has into the active side:
/// 1, 3, 4 for `dG = 4, 8, 12`.
pub fn t_wfp(dg: usize, dng: usize) -> Result<f64> {
    let numerator = match dg {
        4 => 1.0,
        8 => 3.0,
        12 => 4.0,
        other => return Err(Error::UnsupportedDegree(other)),
    };
    Ok(numerator / (dg + dng) as f64)
}

/// Fraction of a node's edges that are non-geometric, `dNG / (dG + dNG)`.
pub fn anc_horizon(dg: usize, dng: usize) -> f64 {
    if dg + dng == 0 {
        return 0.0;
    }
    dng as f64 / (dg + dng) as f64
}

/// One point of the new-cluster analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegimeQuery {
    pub dg: usize,
    pub dng: usize,
    /// Number of nodes `N`.
    pub nodes: usize,
    /// Active-node count `q(t)`.
    pub q_t: usize,
    /// Width of the neighborhood around the active set.
    pub width: usize,
}

impl RegimeQuery {
    /// Fraction of the other nodes that are active, `q(t) / (N - 1)`.
    pub fn delta(&self) -> f64 {
        self.q_t as f64 / (self.nodes - 1) as f64
    }

    fn validate(&self) -> Result<()> {
        if self.nodes < 2 || self.q_t > self.nodes {
            return Err(Error::Bifurcation(format!(
                "q(t) = {} active nodes out of N = {}",
                self.q_t, self.nodes
            )));
        }
        Ok(())
    }
}

/// `delta * H` with `delta = q(t) / (N - 1)`.
pub fn anc_lower_bound(q: &RegimeQuery) -> f64 {
    delta_bound(q.delta(), q.dg, q.dng)
}

/// `delta * H` for an explicit `delta`.
pub fn delta_bound(delta: f64, dg: usize, dng: usize) -> f64 {
    delta * anc_horizon(dg, dng)
}

/// Approximate `|N(I)|` for an active square of `q_t` nodes widened by `w`
/// on every side: `(sqrt(q_t) + 2w)^2`, rounded to the nearest integer.
pub fn neighborhood_size(q_t: usize, w: usize) -> usize {
    let side = (q_t as f64).sqrt() + 2.0 * w as f64;
    (side * side).round() as usize
}

/// Largest active count for which the widened neighborhood (`w = dG`) still
/// leaves 10% of the network outside: `floor((sqrt(0.9 N) - 2 dG)^2)`.
pub fn q_max(nodes: usize, dg: usize) -> Result<usize> {
    let root = (0.9 * nodes as f64).sqrt() - 2.0 * dg as f64;
    if root <= 0.0 {
        return Err(Error::Bifurcation(format!(
            "N = {nodes} is too small for dG = {dg}: no active set fits"
        )));
    }
    Ok((root * root).floor() as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CdfMode {
    /// `d_in ~ Bin(dNG, q(t)/N)`.
    #[default]
    Binomial,
    /// Sampling without replacement from the `N - 1` other nodes.
    Exact,
}

impl CdfMode {
    pub fn name(self) -> &'static str {
        match self {
            CdfMode::Binomial => "binomial",
            CdfMode::Exact => "exact",
        }
    }
}

impl std::str::FromStr for CdfMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binomial" => Ok(CdfMode::Binomial),
            "exact" => Ok(CdfMode::Exact),
            other => Err(Error::Format(format!("unknown d_in mode `{other}`"))),
        }
    }
}

fn num<S: FromPrimitive>(v: usize) -> S {
    S::from_usize(v).expect("count fits the number type")
}

fn binomial_coefficient<S: Num + FromPrimitive + Clone>(n: usize, k: usize) -> S {
    (0..k).fold(S::one(), |acc, i| acc * num::<S>(n - i) / num::<S>(i + 1))
}

/// `P(d_in = k)`.
pub fn d_in_pmf<S>(k: usize, dng: usize, q_t: usize, nodes: usize, mode: CdfMode) -> Result<S>
where
    S: Num + FromPrimitive + Clone + PartialOrd,
{
    if k > dng {
        return Ok(S::zero());
    }
    if nodes < 2 || q_t > nodes - 1 {
        return Err(Error::Bifurcation(format!(
            "q(t) = {q_t} exceeds the N - 1 = {} other nodes",
            nodes.saturating_sub(1)
        )));
    }
    let choose: S = binomial_coefficient(dng, k);
    Ok(match mode {
        CdfMode::Binomial => {
            let p = num::<S>(q_t) / num::<S>(nodes);
            let not_p = S::one() - p.clone();
            choose * pow(p, k) * pow(not_p, dng - k)
        }
        CdfMode::Exact => {
            // falling products; a factor reaching zero zeroes the term
            let falling = |start: usize, len: usize| -> S {
                (0..len).fold(S::one(), |acc, i| {
                    acc * if i <= start { num::<S>(start - i) } else { S::zero() }
                })
            };
            let inactive = nodes - 1 - q_t;
            choose * falling(q_t, k) * falling(inactive, dng - k) / falling(nodes - 1, dng)
        }
    })
}

/// `P(d_in <= k)`.
pub fn d_in_cdf<S>(k: usize, dng: usize, q_t: usize, nodes: usize, mode: CdfMode) -> Result<S>
where
    S: Num + FromPrimitive + Clone + PartialOrd,
{
    (0..=k.min(dng)).try_fold(S::zero(), |acc, d| Ok(acc + d_in_pmf::<S>(d, dng, q_t, nodes, mode)?))
}

/// New-cluster threshold `k* / (dG + dNG)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AncThreshold {
    pub value: f64,
    /// Largest `k` whose expected count of outside nodes with more than `k`
    /// active neighbors is at least one.
    pub k: usize,
    /// True when no `k >= 1` qualifies; `value` is then 0.
    pub no_anc: bool,
    /// `|N(I)|` used for the outside count.
    pub neighborhood: usize,
}

/// Finds the largest `k` with `(M - 1) / M >= P(d_in <= k)`, where
/// `M = N - |N(I)|` counts the nodes outside the neighborhood. The binomial
/// mode compares in `f64`, the exact mode in rationals.
pub fn t_anc(q: &RegimeQuery, mode: CdfMode) -> Result<AncThreshold> {
    q.validate()?;
    let neighborhood = neighborhood_size(q.q_t, q.width);
    if neighborhood >= q.nodes {
        return Err(Error::Bifurcation(format!(
            "neighborhood of {neighborhood} nodes covers the network of {}",
            q.nodes
        )));
    }
    let outside = q.nodes - neighborhood;
    let q_t = q.q_t.min(q.nodes - 1);
    let mut best = None;
    for k in 0..q.dng {
        let fits = match mode {
            CdfMode::Binomial => {
                let cdf: f64 = d_in_cdf(k, q.dng, q_t, q.nodes, mode)?;
                (outside - 1) as f64 / outside as f64 >= cdf
            }
            CdfMode::Exact => {
                let cdf: Rational = d_in_cdf(k, q.dng, q_t, q.nodes, mode)?;
                Rational::new((outside - 1).into(), outside.into()) >= cdf
            }
        };
        if fits {
            best = Some(k);
        }
    }
    let k = best.unwrap_or(0);
    let no_anc = k == 0;
    Ok(AncThreshold {
        value: if no_anc { 0.0 } else { k as f64 / (q.dg + q.dng) as f64 },
        k,
        no_anc,
        neighborhood,
    })
}

/// One row of the bifurcation diagram for a fixed `dNG`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BifurcationRow {
    pub dng: usize,
    pub t_wfp: f64,
    pub horizon: f64,
    pub lower_bound: f64,
    pub t_anc: AncThreshold,
}

/// Curves over `dNG` in `dngs` for fixed `dG`, `N`, `q(t)` and width.
pub fn bifurcation_curves(
    dg: usize,
    nodes: usize,
    q_t: usize,
    width: usize,
    dngs: impl IntoIterator<Item = usize>,
    mode: CdfMode,
) -> Result<Vec<BifurcationRow>> {
    dngs.into_iter()
        .map(|dng| {
            let q = RegimeQuery { dg, dng, nodes, q_t, width };
            Ok(BifurcationRow {
                dng,
                t_wfp: t_wfp(dg, dng)?,
                horizon: anc_horizon(dg, dng),
                lower_bound: anc_lower_bound(&q),
                t_anc: t_anc(&q, mode)?,
            })
        })
        .collect()
}
