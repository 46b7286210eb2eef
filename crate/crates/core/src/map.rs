//! Contagion maps: nodes to points in `R^N` built from activation times.

use std::io::{BufRead, Write};

use crate::contagion::ActivationMatrix;
use crate::error::{Error, Result};
use crate::network::NodeId;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapVariant {
    /// Point `i` is `[x_1^(i), ..., x_N^(i)]`: column `i` of the matrix.
    Regular,
    /// Point `i` is `[x_i^(1), ..., x_i^(N)]`: row `i`.
    Reflected,
    /// Coordinate `j` of point `i` is `x_j^(i) + x_i^(j)`.
    Symmetric,
}

impl MapVariant {
    pub fn name(self) -> &'static str {
        match self {
            MapVariant::Regular => "regular",
            MapVariant::Reflected => "reflected",
            MapVariant::Symmetric => "symmetric",
        }
    }
}

impl std::str::FromStr for MapVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regular" => Ok(MapVariant::Regular),
            "reflected" => Ok(MapVariant::Reflected),
            "symmetric" => Ok(MapVariant::Symmetric),
            other => Err(Error::Format(format!("unknown map variant `{other}`"))),
        }
    }
}

/// `len` points in `R^dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T> {
    dim: usize,
    coords: Vec<T>,
    variant: Option<MapVariant>,
    has_infinite: bool,
}

impl<T: Real> PointCloud<T> {
    pub fn from_rows(dim: usize, coords: Vec<T>) -> Result<Self> {
        if dim == 0 || !coords.len().is_multiple_of(dim) {
            return Err(Error::Shape(format!(
                "{} coordinates do not split into rows of {dim}",
                coords.len()
            )));
        }
        Ok(Self {
            dim,
            coords,
            variant: None,
            has_infinite: false,
        })
    }

    pub fn from_points(points: &[Vec<T>]) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::Shape("points have differing dimensions".into()));
        }
        Self::from_rows(dim, points.concat())
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn variant(&self) -> Option<MapVariant> {
        self.variant
    }

    /// True when some node never activated in some realization used by the map.
    pub fn has_infinite(&self) -> bool {
        self.has_infinite
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            coords: self.coords.iter().map(|&c| c * s).collect(),
            ..self.clone()
        }
    }

    /// Applies the same permutation to points and, for contagion maps whose
    /// coordinates are indexed by nodes, to coordinates. `perm[new] = old`.
    pub fn relabeled(&self, perm: &[usize], permute_coords: bool) -> Self {
        let mut coords = Vec::with_capacity(self.coords.len());
        for &old in perm {
            let p = self.point(old);
            if permute_coords {
                coords.extend(perm.iter().map(|&c| p[c]));
            } else {
                coords.extend_from_slice(p);
            }
        }
        Self {
            coords,
            ..self.clone()
        }
    }

    /// CSV with one row per node: `node_x,node_y,c0,c1,...`. Requires `len == n^2`.
    pub fn write_csv<W: Write>(&self, mut w: W, n: usize) -> Result<()> {
        if self.len() != n * n {
            return Err(Error::Shape(format!(
                "cloud has {} points, lattice side {n} needs {}",
                self.len(),
                n * n
            )));
        }
        write!(w, "node_x,node_y")?;
        for k in 0..self.dim {
            write!(w, ",c{k}")?;
        }
        writeln!(w)?;
        for i in 0..self.len() {
            let node = NodeId::from_index(i, n);
            write!(w, "{},{}", node.x, node.y)?;
            for c in self.point(i) {
                write!(w, ",{c}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Reads the CSV written by [`PointCloud::write_csv`], returning the
    /// cloud and the lattice side. Rows may come in any node order.
    pub fn read_csv<R: BufRead>(r: R) -> Result<(Self, usize)> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty point cloud file".into()))??;
        let dim = header.split(',').count().saturating_sub(2);
        if !header.starts_with("node_x,node_y") || dim == 0 {
            return Err(Error::Format("point cloud header must be node_x,node_y,c0,...".into()));
        }
        let mut rows: Vec<(NodeId, Vec<T>)> = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let mut coord = || -> Result<u32> {
                fields
                    .next()
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Format(format!("bad node coordinates in `{line}`")))
            };
            let node = NodeId::new(coord()?, coord()?);
            let vals: Vec<T> = line
                .split(',')
                .skip(2)
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map(T::lit)
                        .map_err(|_| Error::Format(format!("bad coordinate `{s}`")))
                })
                .collect::<Result<_>>()?;
            if vals.len() != dim {
                return Err(Error::Format(format!("row `{line}` has wrong width")));
            }
            rows.push((node, vals));
        }
        let n = (rows.len() as f64).sqrt().round() as usize;
        if n * n != rows.len() {
            return Err(Error::Format(format!("{} rows is not a square lattice", rows.len())));
        }
        let mut coords = vec![T::zero(); rows.len() * dim];
        let mut seen = vec![false; rows.len()];
        for (node, vals) in rows {
            if node.x as usize >= n || node.y as usize >= n {
                return Err(Error::Format(format!("node {node} outside {n}x{n} lattice")));
            }
            let idx = node.index(n);
            if std::mem::replace(&mut seen[idx], true) {
                return Err(Error::Format(format!("duplicate node {node}")));
            }
            coords[idx * dim..(idx + 1) * dim].copy_from_slice(&vals);
        }
        Ok((Self::from_rows(dim, coords)?, n))
    }
}

/// Builds the contagion map of `m` for the given variant. Sentinel entries are
/// kept as coordinates; `has_infinite` records whether any occurred.
pub fn build_map<T: Real>(m: &ActivationMatrix, variant: MapVariant) -> PointCloud<T> {
    let size = m.size();
    let mut coords = Vec::with_capacity(size * size);
    for i in 0..size {
        for j in 0..size {
            let v = match variant {
                MapVariant::Regular => m.get(j, i) as usize,
                MapVariant::Reflected => m.get(i, j) as usize,
                MapVariant::Symmetric => m.get(j, i) as usize + m.get(i, j) as usize,
            };
            coords.push(T::of_usize(v));
        }
    }
    PointCloud {
        dim: size,
        coords,
        variant: Some(variant),
        has_infinite: m.has_sentinel(),
    }
}

/// Shape-checked variant of [`build_map`] for raw square matrices.
pub fn build_map_from_rows<T: Real>(
    rows: &[Vec<u32>],
    sentinel: u32,
    variant: MapVariant,
) -> Result<PointCloud<T>> {
    let size = rows.len();
    if rows.iter().any(|r| r.len() != size) {
        return Err(Error::Shape("activation matrix is not square".into()));
    }
    let m = ActivationMatrix::from_rows(size, sentinel, rows.concat())?;
    Ok(build_map(&m, variant))
}
