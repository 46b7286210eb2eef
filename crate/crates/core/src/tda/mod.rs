//! Persistent homology of Vietoris-Rips filtrations, barcodes and their
//! Wasserstein distances.

mod assignment;
mod reference;
mod rips;
mod union_find;
mod wasserstein;

use std::cmp::Ordering;
use std::io::{BufRead, Write};

pub use assignment::min_cost_assignment;
pub use reference::{reference_torus_barcode, topology_score, topology_score_from_distances};
pub use rips::{vr_persistence, vr_persistence_with_threshold};
pub use union_find::UnionFind;
pub use wasserstein::{wasserstein, EssentialPolicy, Ground, WassersteinParams};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// One persistence interval `[birth, death)`; `death` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair<T> {
    pub dim: usize,
    pub birth: T,
    pub death: T,
}

impl<T: Real> PersistencePair<T> {
    pub fn new(dim: usize, birth: T, death: T) -> Self {
        Self { dim, birth, death }
    }

    pub fn is_infinite(&self) -> bool {
        self.death.is_infinite()
    }

    pub fn persistence(&self) -> T {
        self.death - self.birth
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.dim
            .cmp(&other.dim)
            .then(self.birth.partial_cmp(&other.birth).unwrap_or(Ordering::Equal))
            .then(self.death.partial_cmp(&other.death).unwrap_or(Ordering::Equal))
    }
}

/// Multiset of persistence pairs over all computed dimensions, kept sorted by
/// `(dim, birth, death)`. Zero-persistence pairs are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Barcode<T> {
    pairs: Vec<PersistencePair<T>>,
    scale: T,
}

impl<T: Real> Barcode<T> {
    pub fn new(pairs: impl IntoIterator<Item = PersistencePair<T>>) -> Self {
        Self::with_scale(pairs, T::one())
    }

    fn with_scale(pairs: impl IntoIterator<Item = PersistencePair<T>>, scale: T) -> Self {
        let mut pairs: Vec<_> = pairs.into_iter().filter(|p| p.death > p.birth).collect();
        pairs.sort_by(PersistencePair::canonical_cmp);
        Self { pairs, scale }
    }

    pub fn pairs(&self) -> &[PersistencePair<T>] {
        &self.pairs
    }

    /// Divisor applied by calibration; `1` for raw barcodes.
    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn dimension(&self, dim: usize) -> impl Iterator<Item = &PersistencePair<T>> + '_ {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    /// Only the pairs of dimension `dim`.
    pub fn restricted(&self, dim: usize) -> Self {
        Self {
            pairs: self.dimension(dim).copied().collect(),
            scale: self.scale,
        }
    }

    pub fn finite_count(&self, dim: usize) -> usize {
        self.dimension(dim).filter(|p| !p.is_infinite()).count()
    }

    pub fn infinite_count(&self, dim: usize) -> usize {
        self.dimension(dim).filter(|p| p.is_infinite()).count()
    }

    /// Number of bars of dimension `dim` alive at filtration value `eps`.
    pub fn betti_at(&self, dim: usize, eps: T) -> usize {
        self.dimension(dim)
            .filter(|p| p.birth <= eps && eps < p.death)
            .count()
    }

    pub fn max_finite_persistence(&self) -> Option<T> {
        self.pairs
            .iter()
            .filter(|p| !p.is_infinite())
            .map(PersistencePair::persistence)
            .fold(None, |m, x| Some(m.map_or(x, |m: T| m.max(x))))
    }

    /// Finite persistences of dimension `dim`, longest first.
    pub fn persistences(&self, dim: usize) -> Vec<T> {
        let mut v: Vec<T> = self
            .dimension(dim)
            .filter(|p| !p.is_infinite())
            .map(PersistencePair::persistence)
            .collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
        v
    }

    /// Every birth and death multiplied by `s > 0`.
    pub fn scaled(&self, s: T) -> Self {
        Self::with_scale(
            self.pairs
                .iter()
                .map(|p| PersistencePair::new(p.dim, p.birth * s, p.death * s)),
            self.scale,
        )
    }

    /// Divides every birth and death by the longest finite persistence, so the
    /// longest finite bar has length exactly one. The divisor accumulates in
    /// [`Barcode::scale`].
    pub fn calibrate(&self) -> Result<Self> {
        let longest = self.max_finite_persistence().ok_or(Error::Calibration)?;
        let pairs = self.pairs.iter().map(|p| {
            let death = if p.is_infinite() { p.death } else { p.death / longest };
            PersistencePair::new(p.dim, p.birth / longest, death)
        });
        let mut out = Self::with_scale(pairs, self.scale * longest);
        // pin the longest bar to exactly 1 against rounding in birth/longest
        if let Some(top) = out
            .pairs
            .iter_mut()
            .filter(|p| !p.is_infinite())
            .max_by(|a, b| a.persistence().partial_cmp(&b.persistence()).unwrap_or(Ordering::Equal))
        {
            top.death = top.birth + T::one();
        }
        Ok(out)
    }

    /// CSV `dim,birth,death` with `inf` for infinite deaths, preceded by a
    /// `# scale=<divisor>` comment line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# scale={}", self.scale)?;
        writeln!(w, "dim,birth,death")?;
        for p in &self.pairs {
            if p.is_infinite() {
                writeln!(w, "{},{},inf", p.dim, p.birth)?;
            } else {
                writeln!(w, "{},{},{}", p.dim, p.birth, p.death)?;
            }
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut scale = T::one();
        let mut pairs = Vec::new();
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("scale=") {
                    scale = parse_real(v)?;
                }
                continue;
            }
            if line.is_empty() || line == "dim,birth,death" {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(Error::Format(format!("bad barcode row `{line}`")));
            }
            let dim = f[0]
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad dimension in `{line}`")))?;
            pairs.push(PersistencePair::new(dim, parse_real(f[1])?, parse_real(f[2])?));
        }
        Ok(Self::with_scale(pairs, scale))
    }
}

fn parse_real<T: Real>(s: &str) -> Result<T> {
    match s.trim() {
        "inf" | "+inf" | "Infinity" => Ok(T::infinity()),
        v => v
            .parse::<f64>()
            .map(T::lit)
            .map_err(|_| Error::Format(format!("bad number `{v}`"))),
    }
}
