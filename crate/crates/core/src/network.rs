//! Kleinberg-like small-world networks on an `n x n` periodic lattice.
//!
//! Every node gets a geometric edge to each node within Euclidean (periodic)
//! radius `p`, plus `q` non-geometric stubs. Stubs are matched so that a stub
//! at `i` joins a stub at `j` with probability proportional to
//! `mu_per(i, j)^(-gamma)`, where `mu_per` is the periodic lattice (L1)
//! distance. The result is a simple graph: no loops, no multi-edges, and no
//! non-geometric edge parallel to a geometric one.

use std::fmt;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded};

/// Restarts allowed when stub matching paints itself into a corner.
pub const DEFAULT_MAX_RESTARTS: usize = 100;

/// Residue-class representative of a lattice node, `0 <= x, y < n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub x: u32,
    pub y: u32,
}

impl NodeId {
    pub fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }

    /// Reduces arbitrary integer coordinates onto the lattice.
    pub fn wrapped(x: i64, y: i64, n: usize) -> Self {
        let n = n as i64;
        Self {
            x: x.rem_euclid(n) as u32,
            y: y.rem_euclid(n) as u32,
        }
    }

    /// Linear index `x + n * y`.
    #[inline]
    pub fn index(self, n: usize) -> usize {
        self.x as usize + n * self.y as usize
    }

    #[inline]
    pub fn from_index(idx: usize, n: usize) -> Self {
        Self {
            x: (idx % n) as u32,
            y: (idx / n) as u32,
        }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// `|a|_per` on a cycle of length `n`.
#[inline]
pub fn periodic_abs(a: i64, n: usize) -> u32 {
    let r = a.rem_euclid(n as i64) as u32;
    r.min(n as u32 - r)
}

/// Periodic lattice distance `|i_x - j_x|_per + |i_y - j_y|_per`.
pub fn periodic_lattice_distance(i: NodeId, j: NodeId, n: usize) -> Result<u32> {
    if n < 2 {
        return Err(Error::InvalidLattice(n));
    }
    Ok(periodic_abs(i.x as i64 - j.x as i64, n) + periodic_abs(i.y as i64 - j.y as i64, n))
}

/// Geometric radius, held as the integer `p^2` so the Gauss-circle test
/// `dx^2 + dy^2 <= p^2` is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Radius {
    squared: u32,
}

impl Radius {
    pub fn from_squared(squared: u32) -> Result<Self> {
        if squared == 0 {
            return Err(Error::InvalidNetwork("radius must be positive".into()));
        }
        Ok(Self { squared })
    }

    /// Accepts a length `p`. Squares within 1e-9 of an integer snap to it
    /// (so `sqrt(2)` means `p^2 = 2`); otherwise lattice membership only
    /// depends on `floor(p^2)`.
    pub fn from_length(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidNetwork(format!("radius {p} must be positive")));
        }
        let sq = p * p;
        let snapped = sq.round();
        let squared = if (sq - snapped).abs() < 1e-9 { snapped } else { sq.floor() };
        if squared < 1.0 {
            // no lattice point other than the origin lies within p < 1
            return Ok(Self { squared: 0 });
        }
        Self::from_squared(squared as u32)
    }

    pub fn squared(self) -> u32 {
        self.squared
    }

    pub fn length(self) -> f64 {
        (self.squared as f64).sqrt()
    }

    /// Largest coordinate offset that can lie inside the circle.
    pub fn reach(self) -> u32 {
        let mut r = (self.squared as f64).sqrt() as u32;
        while (r + 1) * (r + 1) <= self.squared {
            r += 1;
        }
        while r * r > self.squared {
            r -= 1;
        }
        r
    }
}

/// All non-zero offsets `(dx, dy)` with `dx^2 + dy^2 <= p^2`, in row-major order.
/// The count is the geometric degree.
pub fn geometric_neighbor_offsets(p: Radius) -> Vec<(i32, i32)> {
    let r = p.reach() as i32;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if (dx, dy) != (0, 0) && (dx * dx + dy * dy) as u32 <= p.squared {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// Unordered node pair stored as `(min, max)` linear indices.
pub type Edge = (u32, u32);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkParams {
    pub n: usize,
    pub radius: Radius,
    pub q: usize,
    pub gamma: f64,
    pub seed: u64,
    pub max_restarts: usize,
}

impl NetworkParams {
    pub fn new(n: usize, radius: Radius, q: usize, gamma: f64, seed: u64) -> Self {
        Self {
            n,
            radius,
            q,
            gamma,
            seed,
            max_restarts: DEFAULT_MAX_RESTARTS,
        }
    }
}

/// Immutable noisy geometric network.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    n: usize,
    radius: Radius,
    q: usize,
    gamma: f64,
    seed: u64,
    geometric: Vec<Edge>,
    nongeometric: Vec<Edge>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

/// Identity of a network for file headers and cache keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NetworkHeader {
    pub n: u32,
    pub p_squared: u32,
    pub q: u32,
    pub gamma_x10: u32,
    pub seed: u64,
}

pub fn build_network(n: usize, radius: Radius, q: usize, gamma: f64, seed: u64) -> Result<Network> {
    Network::build(&NetworkParams::new(n, radius, q, gamma, seed))
}

/// Periodic offset lookup tables indexed by `(dx mod n) + n * (dy mod n)`.
struct OffsetTables {
    geometric: Vec<bool>,
    weight: Vec<f64>,
}

impl OffsetTables {
    fn new(n: usize, radius: Radius, gamma: f64) -> Self {
        let mut geometric = vec![false; n * n];
        let mut weight = vec![0.0; n * n];
        for dy in 0..n {
            for dx in 0..n {
                let ax = periodic_abs(dx as i64, n) as u64;
                let ay = periodic_abs(dy as i64, n) as u64;
                let k = dx + n * dy;
                geometric[k] = (dx, dy) != (0, 0) && ax * ax + ay * ay <= radius.squared as u64;
                let mu = (ax + ay) as f64;
                weight[k] = if mu == 0.0 {
                    0.0
                } else if gamma == 0.0 {
                    1.0
                } else {
                    mu.powf(-gamma)
                };
            }
        }
        Self { geometric, weight }
    }

    #[inline]
    fn key(n: usize, a: usize, b: usize) -> usize {
        let (ax, ay) = (a % n, a / n);
        let (bx, by) = (b % n, b / n);
        (bx + n - ax) % n + n * ((by + n - ay) % n)
    }
}

impl Network {
    pub fn build(params: &NetworkParams) -> Result<Self> {
        let NetworkParams {
            n,
            radius,
            q,
            gamma,
            seed,
            max_restarts,
        } = *params;
        if n < 2 {
            return Err(Error::InvalidLattice(n));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::InvalidNetwork(format!("gamma {gamma} must be finite and >= 0")));
        }
        let reach = radius.reach() as usize;
        if n < 2 * reach + 1 {
            return Err(Error::InvalidNetwork(format!(
                "lattice side {n} too small for radius^2 = {} (need n >= {})",
                radius.squared,
                2 * reach + 1
            )));
        }
        let nodes = n * n;
        let offsets = geometric_neighbor_offsets(radius);
        let d_g = offsets.len();
        if (nodes * q) % 2 != 0 {
            return Err(Error::InvalidNetwork(format!(
                "odd total stub count N*q = {}",
                nodes * q
            )));
        }
        if q > 0 && q >= nodes - 1 - d_g {
            return Err(Error::InvalidNetwork(format!(
                "q = {q} must be below N - 1 - d_G = {}",
                nodes - 1 - d_g
            )));
        }

        let mut geometric = Vec::with_capacity(nodes * d_g / 2);
        for idx in 0..nodes {
            let i = NodeId::from_index(idx, n);
            for &(dx, dy) in &offsets {
                let j = NodeId::wrapped(i.x as i64 + dx as i64, i.y as i64 + dy as i64, n).index(n);
                if idx < j {
                    geometric.push((idx as u32, j as u32));
                }
            }
        }
        geometric.sort_unstable();

        let nongeometric = if q == 0 {
            Vec::new()
        } else {
            let tables = OffsetTables::new(n, radius, gamma);
            let mut found = None;
            for attempt in 0..=max_restarts {
                let s = if attempt == 0 { seed } else { derive_seed(seed, &[attempt as u64]) };
                if let Some(edges) = match_stubs(n, q, &tables, s) {
                    found = Some(edges);
                    break;
                }
            }
            found.ok_or(Error::MatchingExhausted(max_restarts))?
        };

        Ok(Self::assemble(n, radius, q, gamma, seed, geometric, nongeometric))
    }

    fn assemble(
        n: usize,
        radius: Radius,
        q: usize,
        gamma: f64,
        seed: u64,
        geometric: Vec<Edge>,
        nongeometric: Vec<Edge>,
    ) -> Self {
        let nodes = n * n;
        let mut degree = vec![0usize; nodes];
        for &(a, b) in geometric.iter().chain(&nongeometric) {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(nodes + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..nodes].to_vec();
        let mut targets = vec![0u32; offsets[nodes]];
        for &(a, b) in geometric.iter().chain(&nongeometric) {
            targets[fill[a as usize]] = b;
            fill[a as usize] += 1;
            targets[fill[b as usize]] = a;
            fill[b as usize] += 1;
        }
        for v in 0..nodes {
            targets[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Self {
            n,
            radius,
            q,
            gamma,
            seed,
            geometric,
            nongeometric,
            offsets,
            targets,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.n * self.n
    }

    pub fn radius(&self) -> Radius {
        self.radius
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn geometric_degree(&self) -> usize {
        geometric_neighbor_offsets(self.radius).len()
    }

    pub fn geometric_edges(&self) -> &[Edge] {
        &self.geometric
    }

    pub fn nongeometric_edges(&self) -> &[Edge] {
        &self.nongeometric
    }

    /// Sorted neighbour indices of node `v`.
    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn header(&self) -> Result<NetworkHeader> {
        Ok(NetworkHeader {
            n: self.n as u32,
            p_squared: self.radius.squared,
            q: self.q as u32,
            gamma_x10: gamma_tenths(self.gamma)?,
            seed: self.seed,
        })
    }

    /// Writes the versioned text edge list.
    ///
    /// ```text
    /// contagion-net 1
    /// n 20
    /// p2 2
    /// q 2
    /// gamma_x10 15
    /// seed 42
    /// G <count>
    /// <a> <b>        (linear node indices, a < b)
    /// NG <count>
    /// <a> <b>
    /// ```
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let h = self.header()?;
        writeln!(w, "contagion-net 1")?;
        writeln!(w, "n {}", h.n)?;
        writeln!(w, "p2 {}", h.p_squared)?;
        writeln!(w, "q {}", h.q)?;
        writeln!(w, "gamma_x10 {}", h.gamma_x10)?;
        writeln!(w, "seed {}", h.seed)?;
        for (tag, edges) in [("G", &self.geometric), ("NG", &self.nongeometric)] {
            writeln!(w, "{tag} {}", edges.len())?;
            for &(a, b) in edges.iter() {
                writeln!(w, "{a} {b}")?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Format("unexpected end of network file".into()))?
                .map_err(Error::from)
        };
        if next()?.trim() != "contagion-net 1" {
            return Err(Error::Format("not a contagion-net v1 file".into()));
        }
        fn field(line: &str, key: &str) -> Result<u64> {
            let mut it = line.split_whitespace();
            match (it.next(), it.next(), it.next()) {
                (Some(k), Some(v), None) if k == key => v
                    .parse()
                    .map_err(|_| Error::Format(format!("bad value for {key}: {v}"))),
                _ => Err(Error::Format(format!("expected `{key} <value>`, got `{line}`"))),
            }
        }
        let n = field(&next()?, "n")? as usize;
        let p2 = field(&next()?, "p2")? as u32;
        let q = field(&next()?, "q")? as usize;
        let gamma_x10 = field(&next()?, "gamma_x10")?;
        let seed = field(&next()?, "seed")?;
        let mut sections = Vec::with_capacity(2);
        for tag in ["G", "NG"] {
            let count = field(&next()?, tag)? as usize;
            let mut edges = Vec::with_capacity(count);
            for _ in 0..count {
                let line = next()?;
                let mut it = line.split_whitespace().map(|s| s.parse::<u32>());
                match (it.next(), it.next(), it.next()) {
                    (Some(Ok(a)), Some(Ok(b)), None) if a < b && (b as usize) < n * n => {
                        edges.push((a, b))
                    }
                    _ => return Err(Error::Format(format!("bad edge line `{line}`"))),
                }
            }
            sections.push(edges);
        }
        let nongeometric = sections.pop().unwrap();
        let geometric = sections.pop().unwrap();
        if n < 2 {
            return Err(Error::InvalidLattice(n));
        }
        let radius = Radius::from_squared(p2)?;
        let gamma = gamma_x10 as f64 / 10.0;
        Ok(Self::assemble(n, radius, q, gamma, seed, geometric, nongeometric))
    }
}

/// `gamma * 10` as an integer, for headers. Gammas off the 0.1 grid are rejected.
pub fn gamma_tenths(gamma: f64) -> Result<u32> {
    let k = (gamma * 10.0).round();
    if k < 0.0 || k > u32::MAX as f64 || k / 10.0 != gamma {
        return Err(Error::Format(format!(
            "gamma {gamma} is not a multiple of 0.1 and cannot be written to a header"
        )));
    }
    Ok(k as u32)
}

/// One attempt at matching all stubs; `None` when some stub has no admissible partner.
fn match_stubs(n: usize, q: usize, tables: &OffsetTables, seed: u64) -> Option<Vec<Edge>> {
    let nodes = n * n;
    let mut rng = seeded(seed);
    let mut free = vec![q as u32; nodes];
    let mut partners: Vec<Vec<u32>> = vec![Vec::with_capacity(q); nodes];
    let mut stubs: Vec<u32> = (0..nodes as u32).flat_map(|v| std::iter::repeat_n(v, q)).collect();
    stubs.shuffle(&mut rng);

    let mut stamp = vec![u32::MAX; nodes];
    let mut cand: Vec<u32> = Vec::with_capacity(nodes);
    let mut cumulative: Vec<f64> = Vec::with_capacity(nodes);
    let mut edges = Vec::with_capacity(nodes * q / 2);

    for &s in &stubs {
        let s = s as usize;
        if free[s] == 0 {
            continue;
        }
        free[s] -= 1;
        for &p in &partners[s] {
            stamp[p as usize] = s as u32;
        }
        cand.clear();
        cumulative.clear();
        let mut total = 0.0;
        for j in 0..nodes {
            if j == s || free[j] == 0 || stamp[j] == s as u32 {
                continue;
            }
            let key = OffsetTables::key(n, s, j);
            if tables.geometric[key] {
                continue;
            }
            total += free[j] as f64 * tables.weight[key];
            cand.push(j as u32);
            cumulative.push(total);
        }
        if cand.is_empty() || total <= 0.0 {
            return None;
        }
        let r = rng.random::<f64>() * total;
        let pick = cumulative.partition_point(|&c| c <= r).min(cand.len() - 1);
        let j = cand[pick] as usize;
        free[j] -= 1;
        partners[s].push(j as u32);
        partners[j].push(s as u32);
        edges.push((s.min(j) as u32, s.max(j) as u32));
    }
    edges.sort_unstable();
    Some(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn r(sq: u32) -> Radius {
        Radius::from_squared(sq).unwrap()
    }

    #[test]
    fn lattice_distance_examples() {
        let n = 50;
        let o = NodeId::new(0, 0);
        assert_eq!(periodic_lattice_distance(o, o, n).unwrap(), 0);
        assert_eq!(periodic_lattice_distance(o, NodeId::new(49, 49), n).unwrap(), 2);
        assert_eq!(periodic_lattice_distance(o, NodeId::new(26, 0), n).unwrap(), 24);
        assert!(matches!(
            periodic_lattice_distance(o, o, 1),
            Err(Error::InvalidLattice(1))
        ));
    }

    #[test]
    fn gauss_circle_degrees() {
        assert_eq!(geometric_neighbor_offsets(r(1)).len(), 4);
        assert_eq!(geometric_neighbor_offsets(r(2)).len(), 8);
        assert_eq!(geometric_neighbor_offsets(r(4)).len(), 12);
        let four: HashSet<_> = geometric_neighbor_offsets(r(1)).into_iter().collect();
        assert_eq!(four, HashSet::from([(1, 0), (-1, 0), (0, 1), (0, -1)]));
        assert_eq!(Radius::from_length(2f64.sqrt()).unwrap().squared(), 2);
        assert_eq!(Radius::from_length(2.0).unwrap().squared(), 4);
        assert_eq!(Radius::from_length(1.9).unwrap().squared(), 3);
        assert_eq!(geometric_neighbor_offsets(Radius::from_length(1.9).unwrap()).len(), 8);
    }

    #[test]
    fn total_degree_ten_for_dg8_q2() {
        let net = build_network(50, r(2), 2, 0.0, 11).unwrap();
        assert!((0..net.node_count()).all(|v| net.degree(v) == 10));
        assert_eq!(net.nongeometric_edges().len(), 2500);
    }

    #[test]
    fn pure_lattice_has_no_random_edges() {
        let net = build_network(50, r(1), 0, 2.5, 3).unwrap();
        assert!(net.nongeometric_edges().is_empty());
        assert!((0..net.node_count()).all(|v| net.degree(v) == 4));
        let other = build_network(50, r(1), 0, 0.0, 99).unwrap();
        assert_eq!(net.geometric_edges(), other.geometric_edges());
    }

    #[test]
    fn geometric_edge_iff_within_radius() {
        for (n, sq) in [(7, 1), (7, 2), (9, 4), (5, 2)] {
            let net = build_network(n, r(sq), 0, 0.0, 0).unwrap();
            let set: HashSet<Edge> = net.geometric_edges().iter().copied().collect();
            for a in 0..n * n {
                for b in a + 1..n * n {
                    let (i, j) = (NodeId::from_index(a, n), NodeId::from_index(b, n));
                    let dx = periodic_abs(i.x as i64 - j.x as i64, n);
                    let dy = periodic_abs(i.y as i64 - j.y as i64, n);
                    assert_eq!(set.contains(&(a as u32, b as u32)), dx * dx + dy * dy <= sq);
                }
            }
        }
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(build_network(1, r(1), 0, 0.0, 0), Err(Error::InvalidLattice(1))));
        // 5x5 lattice, q = 1: 25 stubs
        assert!(matches!(build_network(5, r(1), 1, 0.0, 0), Err(Error::InvalidNetwork(_))));
        assert!(build_network(4, r(1), 11, 0.0, 0).is_err());
        assert!(build_network(2, r(2), 0, 0.0, 0).is_err());
        assert!(build_network(6, r(1), 0, -1.0, 0).is_err());
    }

    #[test]
    fn exhausted_restarts_surface_as_error() {
        // 4x4, d_G = 4, q = 10 leaves exactly one admissible partner set; with
        // no restarts allowed the first dead end is fatal.
        let mut params = NetworkParams::new(4, r(1), 10, 0.0, 5);
        params.max_restarts = 0;
        match Network::build(&params) {
            Ok(net) => assert!((0..16).all(|v| net.degree(v) == 14)),
            Err(e) => assert!(matches!(e, Error::MatchingExhausted(0))),
        }
    }

    #[test]
    fn text_format_round_trips() {
        let net = build_network(8, r(2), 3, 1.5, 21).unwrap();
        let mut buf = Vec::new();
        net.write_to(&mut buf).unwrap();
        let back = Network::read_from(&buf[..]).unwrap();
        assert_eq!(back, net);
        let mut again = Vec::new();
        back.write_to(&mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn off_grid_gamma_has_no_header() {
        let net = build_network(6, r(1), 1, 0.25, 1).unwrap();
        assert!(net.header().is_err());
        assert_eq!(gamma_tenths(0.3).unwrap(), 3);
        assert_eq!(gamma_tenths(3.0).unwrap(), 30);
    }
}
