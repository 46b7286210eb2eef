//! Grid and decay-exponent studies.
//!
//! One network is built per `(gamma, dNG)` from a seed derived from the
//! config seed, then reused for every threshold. Cells run on a bounded rayon
//! pool; each cell's values depend only on its inputs, and records are sorted
//! before they are returned, so results do not depend on the thread count.

use std::time::Instant;

use contagion_core::contagion::activation_matrix;
use contagion_core::dimension::embedding_dimension;
use contagion_core::distance::DistanceMatrix;
use contagion_core::geometry::geometry_score_from_distances;
use contagion_core::map::{build_map, PointCloud};
use contagion_core::network::NetworkParams;
use contagion_core::rng::derive_seed;
use contagion_core::tda::{reference_torus_barcode, topology_score_from_distances, Barcode};
use contagion_core::{ContagionConfig, Error as CoreError, Network};
use log::{info, warn};
use rayon::prelude::*;

use crate::cache::ActivationCache;
use crate::config::{Measure, SweepConfig};
use crate::error::{Result, SweepError};
use crate::result::{CellRecord, StudyKind, SweepResult};

/// Seed of the network for one `(gamma, dNG)` pair. Gamma enters through its
/// bit pattern (`-0.0` folded to `0.0`).
pub fn network_seed(seed: u64, gamma: f64, dng: usize) -> u64 {
    derive_seed(seed, &[(gamma + 0.0).to_bits(), dng as u64])
}

/// Every `(gamma, dNG, T)` cell of the config.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    run(cfg, StudyKind::Grid)
}

/// Every `(gamma, T)` cell at the config's single `dNG`.
pub fn run_gamma_study(cfg: &SweepConfig) -> Result<SweepResult> {
    if cfg.dng.len() != 1 {
        return Err(SweepError::Config(format!(
            "a gamma study fixes one dNG, got {:?}",
            cfg.dng
        )));
    }
    run(cfg, StudyKind::Gamma)
}

struct Shared<'a> {
    cfg: &'a SweepConfig,
    cache: Option<ActivationCache>,
    reference: Option<Barcode<f64>>,
}

fn run(cfg: &SweepConfig, kind: StudyKind) -> Result<SweepResult> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build()?;
    let records = pool.install(|| -> Result<Vec<CellRecord>> {
        let shared = Shared {
            cfg,
            cache: if cfg.cache {
                Some(ActivationCache::open(cfg.output_dir.join("cache"))?)
            } else {
                None
            },
            reference: if cfg.wants(Measure::Topology) {
                Some(reference_torus_barcode(cfg.n)?)
            } else {
                None
            },
        };
        let radius = cfg.radius()?;
        let pairs: Vec<(f64, usize)> = cfg
            .gammas
            .iter()
            .flat_map(|&g| cfg.dng.iter().map(move |&q| (g, q)))
            .collect();
        let networks: Vec<Network> = pairs
            .par_iter()
            .map(|&(gamma, q)| {
                let params = NetworkParams::new(cfg.n, radius, q, gamma, network_seed(cfg.seed, gamma, q));
                Network::build(&params).map_err(SweepError::from)
            })
            .collect::<Result<_>>()?;
        info!("{} networks built, {} cells to score", networks.len(), networks.len() * cfg.thresholds.len());
        let cells: Vec<(usize, f64)> = (0..networks.len())
            .flat_map(|k| cfg.thresholds.iter().map(move |&t| (k, t)))
            .collect();
        cells
            .par_iter()
            .map(|&(k, t)| score_cell(&shared, &networks[k], t))
            .collect()
    })?;
    Ok(SweepResult::new(kind, cfg.n, cfg.p_squared, cfg.hash(), records))
}

fn score_cell(shared: &Shared<'_>, net: &Network, threshold: f64) -> Result<CellRecord> {
    let cfg = shared.cfg;
    let start = Instant::now();
    let contagion = ContagionConfig::for_network(threshold, net)?;
    let matrix = match &shared.cache {
        Some(c) => c.get_or_compute(net, &contagion)?,
        None => activation_matrix(net, &contagion),
    };
    let cloud: PointCloud<f64> = build_map(&matrix, cfg.variant);
    let needs_distances = cfg.wants(Measure::Geometry) || cfg.wants(Measure::Topology);
    let dist = needs_distances.then(|| DistanceMatrix::from_cloud(&cloud));
    let here = || format!("gamma = {}, dNG = {}, T = {threshold}", net.gamma(), net.q());

    let rho = match &dist {
        Some(d) if cfg.wants(Measure::Geometry) => Some(match geometry_score_from_distances(d, cfg.n) {
            Ok(r) => r,
            Err(CoreError::UndefinedCorrelation(why)) => {
                warn!("correlation undefined at {}: {why}", here());
                f64::NAN
            }
            Err(e) => return Err(e.into()),
        }),
        _ => None,
    };
    let (dimension, residuals) = if cfg.wants(Measure::Dimensionality) {
        match embedding_dimension(&cloud) {
            Ok(r) => (Some(r.dimension), Some(r.residuals)),
            Err(CoreError::UndefinedCorrelation(why)) => {
                warn!("embedding dimension undefined at {}: {why}", here());
                (None, None)
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        (None, None)
    };
    let wasserstein = match (&dist, &shared.reference) {
        (Some(d), Some(reference)) => Some(topology_score_from_distances(d, reference, &cfg.tda.params())?),
        _ => None,
    };
    Ok(CellRecord {
        gamma: net.gamma(),
        dng: net.q(),
        threshold,
        rho,
        dimension,
        residuals,
        wasserstein,
        has_infinite: cloud.has_infinite(),
        wallclock: start.elapsed(),
    })
}
