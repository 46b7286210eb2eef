//! Synchronous Watts threshold model with cluster seeding.
//!
//! An inactive node activates at step `t + 1` iff the fraction of its
//! neighbours active at step `t` is strictly larger than the threshold.
//! Active nodes stay active. Nodes that never activate get the sentinel
//! time `2N`.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::{Network, NetworkHeader, NodeId};

/// Homogeneous threshold `T` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Threshold(f64);

impl Threshold {
    pub fn new(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidThreshold(t));
        }
        Ok(Self(t))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `T * 1000` when that is an integer, for cache headers.
    pub fn per_mille(self) -> Option<u32> {
        let k = (self.0 * 1000.0).round();
        (k / 1000.0 == self.0).then_some(k as u32)
    }

    /// Smallest active-neighbour count `c` with `c / degree > T`;
    /// `degree + 1` when no count suffices.
    pub fn required_active(self, degree: usize) -> usize {
        if degree == 0 {
            return 1;
        }
        (0..=degree)
            .find(|&c| c as f64 / degree as f64 > self.0)
            .unwrap_or(degree + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContagionConfig {
    pub threshold: Threshold,
    /// Time recorded for nodes that never activate; `2N`.
    pub sentinel: u32,
}

impl ContagionConfig {
    pub fn new(threshold: f64, node_count: usize) -> Result<Self> {
        Ok(Self {
            threshold: Threshold::new(threshold)?,
            sentinel: 2 * node_count as u32,
        })
    }

    pub fn for_network(threshold: f64, net: &Network) -> Result<Self> {
        Self::new(threshold, net.node_count())
    }
}

/// `{j}` together with all of its neighbours, as sorted linear indices.
pub fn cluster_seed(net: &Network, j: NodeId) -> Vec<usize> {
    let v = j.index(net.n());
    let mut seed: Vec<usize> = net.neighbors(v).iter().map(|&u| u as usize).collect();
    seed.push(v);
    seed.sort_unstable();
    seed.dedup();
    seed
}

/// Activation time of every node for one realization seeded at `seed`.
pub fn run_contagion(net: &Network, seed: &[usize], cfg: &ContagionConfig) -> Vec<u32> {
    let nodes = net.node_count();
    let required: Vec<u32> = (0..nodes)
        .map(|v| cfg.threshold.required_active(net.degree(v)) as u32)
        .collect();
    let mut times = vec![cfg.sentinel; nodes];
    let mut active_neighbors = vec![0u32; nodes];
    let mut frontier: Vec<usize> = Vec::with_capacity(seed.len());
    for &s in seed {
        if times[s] != 0 {
            times[s] = 0;
            frontier.push(s);
        }
    }
    let mut next = Vec::new();
    let mut t = 0u32;
    while !frontier.is_empty() {
        next.clear();
        for &v in &frontier {
            for &u in net.neighbors(v) {
                let u = u as usize;
                if times[u] == cfg.sentinel {
                    active_neighbors[u] += 1;
                    if active_neighbors[u] == required[u] {
                        next.push(u);
                    }
                }
            }
        }
        t += 1;
        for &u in &next {
            times[u] = t;
        }
        std::mem::swap(&mut frontier, &mut next);
    }
    times
}

/// `N x N` activation times; row `j` is the realization seeded at cluster `j`,
/// so entry `(j, i)` is `x_j^(i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivationMatrix {
    size: usize,
    sentinel: u32,
    times: Vec<u32>,
}

impl ActivationMatrix {
    pub fn from_rows(size: usize, sentinel: u32, times: Vec<u32>) -> Result<Self> {
        if times.len() != size * size {
            return Err(Error::Shape(format!(
                "{} entries cannot form a {size}x{size} matrix",
                times.len()
            )));
        }
        Ok(Self {
            size,
            sentinel,
            times,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn sentinel(&self) -> u32 {
        self.sentinel
    }

    #[inline]
    pub fn get(&self, realization: usize, node: usize) -> u32 {
        self.times[realization * self.size + node]
    }

    pub fn row(&self, realization: usize) -> &[u32] {
        &self.times[realization * self.size..(realization + 1) * self.size]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.times
    }

    pub fn has_sentinel(&self) -> bool {
        self.times.contains(&self.sentinel)
    }

    /// Binary cache file: magic `CMAPACT1`, then little-endian `u32` n, p^2, q,
    /// gamma*10, `u64` seed, `u32` T*1000, then the `N*N` `u32` entries row by row.
    pub fn write_cache<W: Write>(&self, mut w: W, key: &CacheKey) -> Result<()> {
        let nodes = (key.network.n as usize).pow(2);
        if nodes != self.size {
            return Err(Error::Shape(format!(
                "cache key describes {nodes} nodes, matrix has {}",
                self.size
            )));
        }
        w.write_all(&key.to_bytes())?;
        let mut buf = Vec::with_capacity(self.times.len() * 4);
        for &t in &self.times {
            buf.extend_from_slice(&t.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    /// Reads a cache file, returning its key alongside the matrix.
    pub fn read_cache<R: Read>(mut r: R) -> Result<(CacheKey, Self)> {
        let mut head = [0u8; CacheKey::LEN];
        r.read_exact(&mut head)?;
        let key = CacheKey::from_bytes(&head)?;
        let nodes = (key.network.n as usize).pow(2);
        let mut raw = vec![0u8; nodes * nodes * 4];
        r.read_exact(&mut raw)?;
        let times = raw
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Ok((key, Self::from_rows(nodes, 2 * nodes as u32, times)?))
    }
}

/// Header identifying a cached activation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub network: NetworkHeader,
    pub threshold_per_mille: u32,
}

impl CacheKey {
    const MAGIC: &'static [u8; 8] = b"CMAPACT1";
    pub const LEN: usize = 8 + 4 * 4 + 8 + 4;

    pub fn new(net: &Network, threshold: Threshold) -> Result<Self> {
        let threshold_per_mille = threshold.per_mille().ok_or_else(|| {
            Error::Format(format!(
                "threshold {} is not a multiple of 0.001",
                threshold.value()
            ))
        })?;
        Ok(Self {
            network: net.header()?,
            threshold_per_mille,
        })
    }

    pub fn to_bytes(&self) -> [u8; Self::LEN] {
        let mut out = [0u8; Self::LEN];
        out[..8].copy_from_slice(Self::MAGIC);
        let h = &self.network;
        out[8..12].copy_from_slice(&h.n.to_le_bytes());
        out[12..16].copy_from_slice(&h.p_squared.to_le_bytes());
        out[16..20].copy_from_slice(&h.q.to_le_bytes());
        out[20..24].copy_from_slice(&h.gamma_x10.to_le_bytes());
        out[24..32].copy_from_slice(&h.seed.to_le_bytes());
        out[32..36].copy_from_slice(&self.threshold_per_mille.to_le_bytes());
        out
    }

    pub fn from_bytes(b: &[u8; Self::LEN]) -> Result<Self> {
        if &b[..8] != Self::MAGIC {
            return Err(Error::Format("not an activation cache file".into()));
        }
        let u = |i: usize| u32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]]);
        let mut seed = [0u8; 8];
        seed.copy_from_slice(&b[24..32]);
        Ok(Self {
            network: NetworkHeader {
                n: u(8),
                p_squared: u(12),
                q: u(16),
                gamma_x10: u(20),
                seed: u64::from_le_bytes(seed),
            },
            threshold_per_mille: u(32),
        })
    }
}

/// Runs every cluster-seeded realization. Rows are computed in parallel and
/// written disjointly, so the result does not depend on the thread count.
pub fn activation_matrix(net: &Network, cfg: &ContagionConfig) -> ActivationMatrix {
    let nodes = net.node_count();
    let n = net.n();
    let mut times = vec![0u32; nodes * nodes];
    times
        .par_chunks_mut(nodes)
        .enumerate()
        .for_each(|(j, row)| {
            let seed = cluster_seed(net, NodeId::from_index(j, n));
            row.copy_from_slice(&run_contagion(net, &seed, cfg));
        });
    ActivationMatrix {
        size: nodes,
        sentinel: cfg.sentinel,
        times,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_network, Radius};

    fn lattice(n: usize, sq: u32) -> Network {
        build_network(n, Radius::from_squared(sq).unwrap(), 0, 0.0, 0).unwrap()
    }

    #[test]
    fn strict_inequality_at_ties() {
        let t = Threshold::new(0.3).unwrap();
        assert_eq!(t.required_active(10), 4);
        assert_eq!(t.required_active(4), 2);
        assert_eq!(Threshold::new(0.25).unwrap().required_active(4), 2);
        assert_eq!(Threshold::new(0.0).unwrap().required_active(8), 1);
        assert_eq!(Threshold::new(1.0).unwrap().required_active(8), 9);
        assert_eq!(Threshold::new(0.375).unwrap().required_active(8), 4);
        assert!(Threshold::new(1.2).is_err());
        assert!(Threshold::new(-0.1).is_err());
    }

    #[test]
    fn cluster_seed_on_plain_lattice() {
        let net = lattice(50, 1);
        let seed = cluster_seed(&net, NodeId::new(0, 0));
        let mut expect: Vec<usize> = [(0, 0), (1, 0), (49, 0), (0, 1), (0, 49)]
            .iter()
            .map(|&(x, y)| NodeId::new(x, y).index(50))
            .collect();
        expect.sort_unstable();
        assert_eq!(seed, expect);
        assert_eq!(cluster_seed(&lattice(9, 4), NodeId::new(3, 3)).len(), 13);
        let noisy = build_network(10, Radius::from_squared(2).unwrap(), 2, 0.0, 4).unwrap();
        assert_eq!(cluster_seed(&noisy, NodeId::new(5, 5)).len(), 11);
    }

    #[test]
    fn stalled_cluster_has_nine_nodes() {
        for n in [5, 6, 11, 50] {
            let net = lattice(n, 1);
            let cfg = ContagionConfig::for_network(0.3, &net).unwrap();
            let times = run_contagion(&net, &cluster_seed(&net, NodeId::new(0, 0)), &cfg);
            let active: Vec<usize> = (0..times.len()).filter(|&v| times[v] != cfg.sentinel).collect();
            assert_eq!(active.len(), 9, "n = {n}");
            let at_one = times.iter().filter(|&&t| t == 1).count();
            assert_eq!(at_one, 4);
        }
    }

    #[test]
    fn threshold_one_keeps_only_seed() {
        let net = build_network(8, Radius::from_squared(2).unwrap(), 2, 0.0, 1).unwrap();
        let cfg = ContagionConfig::for_network(1.0, &net).unwrap();
        let seed = cluster_seed(&net, NodeId::new(2, 3));
        let times = run_contagion(&net, &seed, &cfg);
        for (v, &t) in times.iter().enumerate() {
            assert_eq!(t, if seed.contains(&v) { 0 } else { 128 });
        }
    }

    #[test]
    fn matrix_rows_start_at_seed_clusters() {
        let net = build_network(6, Radius::from_squared(1).unwrap(), 1, 0.0, 2).unwrap();
        let cfg = ContagionConfig::for_network(0.2, &net).unwrap();
        let m = activation_matrix(&net, &cfg);
        for j in 0..36 {
            let seed = cluster_seed(&net, NodeId::from_index(j, 6));
            for i in 0..36 {
                assert_eq!(m.get(j, i) == 0, seed.contains(&i));
            }
        }
    }

    #[test]
    fn cache_round_trip_and_key() {
        let net = build_network(4, Radius::from_squared(1).unwrap(), 2, 0.5, 9).unwrap();
        let cfg = ContagionConfig::for_network(0.25, &net).unwrap();
        let m = activation_matrix(&net, &cfg);
        let key = CacheKey::new(&net, cfg.threshold).unwrap();
        assert_eq!(key.threshold_per_mille, 250);
        let mut buf = Vec::new();
        m.write_cache(&mut buf, &key).unwrap();
        assert_eq!(buf.len(), CacheKey::LEN + 16 * 16 * 4);
        let (k2, m2) = ActivationMatrix::read_cache(&buf[..]).unwrap();
        assert_eq!(k2, key);
        assert_eq!(m2, m);
        buf[0] = b'X';
        assert!(ActivationMatrix::read_cache(&buf[..]).is_err());
    }
}
