//! Experiment driver for contagion maps: `(dNG, T)` grids and decay-exponent
//! studies with an activation-matrix cache, deterministic result tables, and
//! heatmaps with bifurcation overlays.

pub mod cache;
pub mod config;
pub mod error;
pub mod manifest;
pub mod render;
pub mod result;
pub mod sweep;

pub use config::{Measure, SweepConfig};
pub use error::{Result, SweepError};
pub use result::{CellRecord, StudyKind, SweepResult};
pub use sweep::{run_gamma_study, run_sweep};

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// Files a study writes into its output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyOutputs {
    pub results: PathBuf,
    pub timings: PathBuf,
    pub manifest: PathBuf,
}

/// Writes `results.csv`, `timings.csv` and `manifest.json` into `dir`.
pub fn write_outputs(result: &SweepResult, cfg: &SweepConfig, command: &str, dir: &Path) -> Result<StudyOutputs> {
    std::fs::create_dir_all(dir)?;
    let results = dir.join("results.csv");
    let mut w = BufWriter::new(File::create(&results)?);
    result.write_csv(&mut w)?;
    w.flush()?;
    let timings = dir.join("timings.csv");
    let mut w = BufWriter::new(File::create(&timings)?);
    result.write_timings(&mut w)?;
    w.flush()?;
    manifest::Manifest::new(command, serde_json::to_value(cfg.canonical())?)?.write(dir)?;
    Ok(StudyOutputs { results, timings, manifest: dir.join("manifest.json") })
}

/// Heatmaps of every requested measure at every gamma of a grid study, with
/// bifurcation overlays at `q(t) = round(delta * (N - 1))`, under `dir/heatmaps`.
pub fn render_study(result: &SweepResult, cfg: &SweepConfig, dir: &Path) -> Result<Vec<render::Rendered>> {
    use render::{render_heatmap, HeatMeasure, OverlaySpec};
    let nodes = cfg.node_count();
    let spec = OverlaySpec {
        dg: cfg.geometric_degree()?,
        nodes,
        q_t: (cfg.delta * (nodes - 1) as f64).round() as usize,
        width: cfg.overlay_width,
        mode: Default::default(),
    };
    let measures = [
        (Measure::Geometry, HeatMeasure::Rho),
        (Measure::Dimensionality, HeatMeasure::Dimension),
        (Measure::Topology, HeatMeasure::Wasserstein),
    ];
    let out = dir.join("heatmaps");
    let mut rendered = Vec::new();
    for gamma in result.gammas() {
        for (m, h) in measures {
            if cfg.wants(m) {
                let stem = format!("{}_gamma{gamma}", h.name());
                rendered.push(render_heatmap(result, h, Some(gamma), Some(&spec), &out, &stem)?);
            }
        }
    }
    Ok(rendered)
}
