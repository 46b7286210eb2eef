//! Sweep configuration: a JSON file, defaults for the two studies, and
//! validation.

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use contagion_core::contagion::Threshold;
use contagion_core::network::{gamma_tenths, geometric_neighbor_offsets};
use contagion_core::tda::{Ground, WassersteinParams};
use contagion_core::{MapVariant, Radius};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SweepError};

/// Largest lattice side accepted without `paper_scale`.
pub const DESK_SCALE_MAX_N: usize = 20;
pub const PAPER_SCALE_N: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// Pearson correlation with torus distances.
    Geometry,
    /// PCA embedding dimension.
    Dimensionality,
    /// Wasserstein distance to the reference torus barcode.
    Topology,
}

impl std::str::FromStr for Measure {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geometry" | "rho" => Ok(Measure::Geometry),
            "dimensionality" | "dimension" | "p" => Ok(Measure::Dimensionality),
            "topology" | "wasserstein" | "w2" => Ok(Measure::Topology),
            other => Err(SweepError::Config(format!("unknown measure `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroundMetric {
    #[default]
    Linf,
    L2,
}

impl std::str::FromStr for GroundMetric {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linf" | "inf" => Ok(GroundMetric::Linf),
            "l2" => Ok(GroundMetric::L2),
            other => Err(SweepError::Config(format!("unknown ground metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TdaConfig {
    pub ground: GroundMetric,
    /// Wasserstein order.
    pub order: f64,
}

impl Default for TdaConfig {
    fn default() -> Self {
        Self { ground: GroundMetric::Linf, order: 2.0 }
    }
}

impl TdaConfig {
    pub fn params(&self) -> WassersteinParams<f64> {
        WassersteinParams {
            order: self.order,
            ground: match self.ground {
                GroundMetric::Linf => Ground::LInf,
                GroundMetric::L2 => Ground::L2,
            },
            ..Default::default()
        }
    }
}

mod variant_name {
    use contagion_core::MapVariant;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &MapVariant, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(v.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<MapVariant, D::Error> {
        let name = String::deserialize(d)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Lattice side; `N = n^2`.
    pub n: usize,
    /// Squared geometric radius.
    pub p_squared: u32,
    /// Non-geometric degrees.
    pub dng: Vec<usize>,
    pub thresholds: Vec<f64>,
    pub gammas: Vec<f64>,
    #[serde(with = "variant_name")]
    pub variant: MapVariant,
    pub seed: u64,
    pub measures: BTreeSet<Measure>,
    pub tda: TdaConfig,
    /// Active fraction `q(t) / (N - 1)` used for the new-cluster overlay.
    pub delta: f64,
    /// Neighborhood width for the new-cluster overlay.
    pub overlay_width: usize,
    pub output_dir: PathBuf,
    /// Worker threads; `None` uses all cores. Does not affect results.
    pub threads: Option<usize>,
    /// Keep activation matrices under `output_dir/cache`.
    pub cache: bool,
    /// Permits `n` above the desk-scale limit.
    pub paper_scale: bool,
}

/// `0, 0.01, ..., 1`.
pub fn threshold_grid() -> Vec<f64> {
    (0..=100).map(|k| k as f64 / 100.0).collect()
}

/// `0, 0.1, ..., 3`.
pub fn gamma_grid() -> Vec<f64> {
    (0..=30).map(|k| k as f64 / 10.0).collect()
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n: DESK_SCALE_MAX_N,
            p_squared: 2,
            dng: (0..=25).collect(),
            thresholds: threshold_grid(),
            gammas: vec![0.0],
            variant: MapVariant::Symmetric,
            seed: 1,
            measures: [Measure::Geometry, Measure::Dimensionality].into(),
            tda: TdaConfig::default(),
            delta: 0.6,
            overlay_width: 0,
            output_dir: PathBuf::from("sweep-out"),
            threads: None,
            cache: true,
            paper_scale: false,
        }
    }
}

impl SweepConfig {
    /// Defaults of the decay-exponent study: `dG = 8`, `dNG = 2`,
    /// `T` in {0.05, 0.25, 0.4}, gamma from 0 to 3 by 0.1, all measures.
    pub fn gamma_study() -> Self {
        Self {
            dng: vec![2],
            thresholds: vec![0.05, 0.25, 0.4],
            gammas: gamma_grid(),
            measures: [Measure::Geometry, Measure::Dimensionality, Measure::Topology].into(),
            output_dir: PathBuf::from("gamma-out"),
            ..Self::default()
        }
    }

    /// Reads a JSON file. Missing fields take the values of `base`.
    pub fn from_json_file(path: &Path, base: &Self) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut merged = serde_json::to_value(base)?;
        let patch: serde_json::Value = serde_json::from_str(&text)?;
        let serde_json::Value::Object(patch) = patch else {
            return Err(SweepError::Config(format!("{} is not a JSON object", path.display())));
        };
        if let serde_json::Value::Object(m) = &mut merged {
            m.extend(patch);
        }
        let cfg: Self = serde_json::from_value(merged)?;
        Ok(cfg)
    }

    pub fn radius(&self) -> Result<Radius> {
        Ok(Radius::from_squared(self.p_squared)?)
    }

    pub fn geometric_degree(&self) -> Result<usize> {
        Ok(geometric_neighbor_offsets(self.radius()?).len())
    }

    pub fn node_count(&self) -> usize {
        self.n * self.n
    }

    pub fn wants(&self, m: Measure) -> bool {
        self.measures.contains(&m)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SweepError::Config(msg));
        if self.n < 3 {
            return bad(format!("lattice side n = {} (need n >= 3)", self.n));
        }
        if self.n > DESK_SCALE_MAX_N && !self.paper_scale {
            return bad(format!(
                "n = {} exceeds the desk-scale limit {DESK_SCALE_MAX_N}; set paper_scale to run it",
                self.n
            ));
        }
        let dg = self.geometric_degree()?;
        let nodes = self.node_count();
        if self.dng.is_empty() || self.thresholds.is_empty() || self.gammas.is_empty() {
            return bad("dng, thresholds and gammas must all be nonempty".into());
        }
        if self.measures.is_empty() {
            return bad("no measure selected".into());
        }
        for &q in &self.dng {
            if (nodes * q) % 2 == 1 {
                return bad(format!("dNG = {q} gives an odd stub count on {nodes} nodes"));
            }
            if q + dg + 1 >= nodes {
                return bad(format!("dNG = {q} leaves no admissible partners (dG = {dg}, N = {nodes})"));
            }
        }
        for &t in &self.thresholds {
            let t = Threshold::new(t)?;
            if self.cache && t.per_mille().is_none() {
                return bad(format!("threshold {} is off the 0.001 grid the cache is keyed on", t.value()));
            }
        }
        for &g in &self.gammas {
            if !g.is_finite() || g < 0.0 {
                return bad(format!("gamma = {g} must be finite and >= 0"));
            }
            if self.cache {
                gamma_tenths(g)?;
            }
        }
        if !distinct_usize(&self.dng) || !distinct_f64(&self.thresholds) || !distinct_f64(&self.gammas) {
            return bad("grid lists contain duplicates".into());
        }
        if !(self.tda.order.is_finite() && self.tda.order >= 1.0) {
            return bad(format!("Wasserstein order {} must be finite and >= 1", self.tda.order));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return bad(format!("delta = {} must lie in (0, 1]", self.delta));
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        Ok(())
    }

    /// Copy with the fields that do not influence results cleared. Its JSON is
    /// what the config hash is computed from.
    pub fn canonical(&self) -> Self {
        Self {
            output_dir: PathBuf::new(),
            threads: None,
            cache: false,
            ..self.clone()
        }
    }

    /// SHA-256 of the canonical config as compact JSON with sorted keys, hex
    /// encoded.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self.canonical()).expect("config serializes");
        let json = serde_json::to_vec(&value).expect("config serializes");
        hex_digest(&json)
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn distinct_usize(v: &[usize]) -> bool {
    v.iter().collect::<HashSet<_>>().len() == v.len()
}

fn distinct_f64(v: &[f64]) -> bool {
    v.iter().map(|x| x.to_bits()).collect::<HashSet<_>>().len() == v.len()
}

/// Parses `a,b,c` or an inclusive range `start:stop:step`. Range values are
/// computed in integer units of the finest decimal place written, so
/// `0:1:0.01` yields exactly the literals `0.01, 0.02, ...`.
pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    let bad = || SweepError::Config(format!("cannot parse number list `{s}`"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let places = parts.iter().map(|p| p.split_once('.').map_or(0, |(_, f)| f.len())).max().unwrap_or(0);
            let scale = 10f64.powi(places as i32);
            let units = |x: &str| -> Result<i64> {
                let v: f64 = x.parse().map_err(|_| bad())?;
                Ok((v * scale).round() as i64)
            };
            let (a, b, d) = (units(start)?, units(stop)?, units(step)?);
            if d <= 0 || b < a {
                return Err(bad());
            }
            Ok((0..=(b - a) / d).map(|k| (a + k * d) as f64 / scale).collect())
        }
        [_] => s
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
            .collect(),
        _ => Err(bad()),
    }
}

/// Parses `a,b,c` or an inclusive range `start:stop` / `start:stop:step`.
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    let bad = || SweepError::Config(format!("cannot parse integer list `{s}`"));
    let num = |x: &str| x.trim().parse::<usize>().map_err(|_| bad());
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b] => Ok((num(a)?..=num(b)?).collect()),
        [a, b, step] => {
            let step = num(step)?;
            if step == 0 {
                return Err(bad());
            }
            Ok((num(a)?..=num(b)?).step_by(step).collect())
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}
