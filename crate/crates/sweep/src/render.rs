//! Heatmaps of one measure over the `(dNG, T)` grid, with optional
//! bifurcation-curve overlays.
//!
//! Colormap: viridis, linearly interpolated between nine anchors, spanning
//! the smallest to the largest finite cell value of the map (the range is
//! written into the CSV). Special cells: topology cells whose map carries
//! never-activated nodes are white, undefined values are mid grey. Overlays
//! are drawn black for the wavefront threshold and red for the new-cluster
//! threshold. Every image has a CSV matrix next to it holding the exact
//! values.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use contagion_core::bifurcation::{t_anc, t_wfp, CdfMode, RegimeQuery};
use image::{Rgb, RgbImage};

use crate::error::{Result, SweepError};
use crate::result::{CellRecord, SweepResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatMeasure {
    Rho,
    Dimension,
    Wasserstein,
}

impl HeatMeasure {
    pub fn name(self) -> &'static str {
        match self {
            HeatMeasure::Rho => "rho",
            HeatMeasure::Dimension => "dimension",
            HeatMeasure::Wasserstein => "wasserstein",
        }
    }

    fn value(self, r: &CellRecord) -> Option<f64> {
        match self {
            HeatMeasure::Rho => r.rho,
            HeatMeasure::Dimension => r.dimension.map(|p| p as f64),
            HeatMeasure::Wasserstein => r.wasserstein,
        }
    }
}

impl std::str::FromStr for HeatMeasure {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rho" | "geometry" => Ok(HeatMeasure::Rho),
            "dimension" | "dimensionality" | "p" => Ok(HeatMeasure::Dimension),
            "wasserstein" | "topology" | "w2" => Ok(HeatMeasure::Wasserstein),
            other => Err(SweepError::Render(format!("unknown measure `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Value(f64),
    /// Topology of a map with never-activated nodes.
    White,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Value(v) => write!(f, "{v}"),
            Cell::White => f.write_str("white"),
        }
    }
}

/// Rows are thresholds in descending order, columns `dNG` ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapGrid {
    pub measure: HeatMeasure,
    pub gamma: f64,
    pub dngs: Vec<usize>,
    pub thresholds: Vec<f64>,
    pub cells: Vec<Vec<Cell>>,
}

/// Lays out the records at one gamma. `gamma` may be omitted when the result
/// holds a single one.
pub fn heatmap_grid(result: &SweepResult, measure: HeatMeasure, gamma: Option<f64>) -> Result<HeatmapGrid> {
    let gammas = result.gammas();
    let gamma = match (gamma, gammas.as_slice()) {
        (Some(g), _) if gammas.contains(&g) => g,
        (Some(g), _) => return Err(SweepError::Render(format!("no records at gamma = {g}"))),
        (None, [g]) => *g,
        (None, _) => return Err(SweepError::Render(format!("result spans gammas {gammas:?}; pick one"))),
    };
    let records: Vec<&CellRecord> = result.records.iter().filter(|r| r.gamma == gamma).collect();
    let mut dngs: Vec<usize> = records.iter().map(|r| r.dng).collect();
    dngs.sort_unstable();
    dngs.dedup();
    let mut thresholds: Vec<f64> = records.iter().map(|r| r.threshold).collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    if records.len() != dngs.len() * thresholds.len() {
        return Err(SweepError::Render(format!(
            "ragged grid: {} records for {} dNG values x {} thresholds",
            records.len(),
            dngs.len(),
            thresholds.len()
        )));
    }
    let mut cells = vec![vec![None; dngs.len()]; thresholds.len()];
    for r in records {
        let row = thresholds.iter().position(|&t| t == r.threshold).expect("collected above");
        let col = dngs.binary_search(&r.dng).expect("collected above");
        if cells[row][col].is_some() {
            return Err(SweepError::Render(format!("duplicate cell dNG = {}, T = {}", r.dng, r.threshold)));
        }
        cells[row][col] = Some(if measure == HeatMeasure::Wasserstein && r.has_infinite {
            Cell::White
        } else {
            Cell::Value(measure.value(r).ok_or_else(|| {
                SweepError::Render(format!("the result does not contain {}", measure.name()))
            })?)
        });
    }
    let cells = cells
        .into_iter()
        .map(|row| row.into_iter().map(|c| c.expect("grid is complete")).collect())
        .collect();
    Ok(HeatmapGrid { measure, gamma, dngs, thresholds, cells })
}

impl HeatmapGrid {
    /// Finite values span; `None` when there are none.
    pub fn range(&self) -> Option<(f64, f64)> {
        let mut values = self.cells.iter().flatten().filter_map(|c| match c {
            Cell::Value(v) if v.is_finite() => Some(*v),
            _ => None,
        });
        let first = values.next()?;
        Some(values.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }

    /// Header row `T\dNG,<dNG>...`, then one row per threshold.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# measure={}", self.measure.name())?;
        writeln!(w, "# gamma={}", self.gamma)?;
        if let Some((lo, hi)) = self.range() {
            writeln!(w, "# range={lo},{hi}")?;
        }
        write!(w, "T\\dNG")?;
        for d in &self.dngs {
            write!(w, ",{d}")?;
        }
        writeln!(w)?;
        for (t, row) in self.thresholds.iter().zip(&self.cells) {
            write!(w, "{t}")?;
            for c in row {
                write!(w, ",{c}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Vertical pixel of threshold `t`, interpolating between row centres.
    fn y_of(&self, t: f64, cell: u32) -> Option<f64> {
        let ts = &self.thresholds;
        let centre = |row: usize| (row as f64 + 0.5) * cell as f64;
        if ts.len() == 1 {
            return (t == ts[0]).then(|| centre(0));
        }
        (0..ts.len() - 1).find_map(|row| {
            let (hi, lo) = (ts[row], ts[row + 1]);
            (t <= hi && t >= lo).then(|| centre(row) + (hi - t) / (hi - lo) * cell as f64)
        })
    }

    pub fn to_image(&self, cell: u32, overlay: Option<&[OverlayPoint]>) -> RgbImage {
        let (w, h) = (self.dngs.len() as u32 * cell, self.thresholds.len() as u32 * cell);
        let mut img = RgbImage::new(w, h);
        let (lo, hi) = self.range().unwrap_or((0.0, 1.0));
        for (row, cells) in self.cells.iter().enumerate() {
            for (col, c) in cells.iter().enumerate() {
                let colour = match c {
                    Cell::White => Rgb([255, 255, 255]),
                    Cell::Value(v) if !v.is_finite() => Rgb([128, 128, 128]),
                    Cell::Value(v) => viridis(if hi > lo { (v - lo) / (hi - lo) } else { 0.5 }),
                };
                for dy in 0..cell {
                    for dx in 0..cell {
                        img.put_pixel(col as u32 * cell + dx, row as u32 * cell + dy, colour);
                    }
                }
            }
        }
        if let Some(points) = overlay {
            let column = |d: usize| self.dngs.binary_search(&d).ok();
            let curve = |pick: fn(&OverlayPoint) -> Option<f64>| -> Vec<(f64, f64)> {
                points
                    .iter()
                    .filter_map(|p| {
                        let x = (column(p.dng)? as f64 + 0.5) * cell as f64;
                        Some((x, self.y_of(pick(p)?, cell)?))
                    })
                    .collect()
            };
            draw_polyline(&mut img, &curve(|p| p.t_wfp), Rgb([0, 0, 0]));
            draw_polyline(&mut img, &curve(|p| p.t_anc), Rgb([220, 30, 30]));
        }
        img
    }
}

fn draw_polyline(img: &mut RgbImage, points: &[(f64, f64)], colour: Rgb<u8>) {
    let mut plot = |x: f64, y: f64| {
        let (x, y) = (x.round(), y.round());
        if x >= 0.0 && y >= 0.0 && (x as u32) < img.width() && (y as u32) < img.height() {
            img.put_pixel(x as u32, y as u32, colour);
        }
    };
    for &(x, y) in points {
        for dx in -1..=1 {
            for dy in -1..=1 {
                plot(x + dx as f64, y + dy as f64);
            }
        }
    }
    for pair in points.windows(2) {
        let ((x0, y0), (x1, y1)) = (pair[0], pair[1]);
        let steps = (x1 - x0).abs().max((y1 - y0).abs()).ceil().max(1.0) as usize;
        for s in 0..=steps {
            let f = s as f64 / steps as f64;
            plot(x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        }
    }
}

const VIRIDIS: [[u8; 3]; 9] = [
    [68, 1, 84],
    [71, 44, 122],
    [59, 81, 139],
    [44, 113, 142],
    [33, 144, 141],
    [39, 173, 129],
    [92, 200, 99],
    [170, 220, 50],
    [253, 231, 37],
];

/// Colour of `u` in `[0, 1]`, clamped.
pub fn viridis(u: f64) -> Rgb<u8> {
    let u = u.clamp(0.0, 1.0) * (VIRIDIS.len() - 1) as f64;
    let k = (u.floor() as usize).min(VIRIDIS.len() - 2);
    let f = u - k as f64;
    let mix = |c: usize| (VIRIDIS[k][c] as f64 * (1.0 - f) + VIRIDIS[k + 1][c] as f64 * f).round() as u8;
    Rgb([mix(0), mix(1), mix(2)])
}

/// One column of the overlay. Either threshold is absent when undefined
/// (unsupported `dG`, or a neighborhood covering the network).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlayPoint {
    pub dng: usize,
    pub t_wfp: Option<f64>,
    pub t_anc: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlaySpec {
    pub dg: usize,
    pub nodes: usize,
    pub q_t: usize,
    pub width: usize,
    pub mode: CdfMode,
}

pub fn overlay_curves(spec: &OverlaySpec, dngs: &[usize]) -> Vec<OverlayPoint> {
    dngs.iter()
        .map(|&dng| {
            let q = RegimeQuery { dg: spec.dg, dng, nodes: spec.nodes, q_t: spec.q_t, width: spec.width };
            OverlayPoint {
                dng,
                t_wfp: t_wfp(spec.dg, dng).ok(),
                t_anc: t_anc(&q, spec.mode).ok().filter(|a| !a.no_anc).map(|a| a.value),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub csv: PathBuf,
    pub png: PathBuf,
    pub overlay_csv: Option<PathBuf>,
}

/// Writes `<stem>.csv`, `<stem>.png` and, with an overlay, `<stem>_overlay.csv`
/// into `dir`.
pub fn render_heatmap(
    result: &SweepResult,
    measure: HeatMeasure,
    gamma: Option<f64>,
    overlay: Option<&OverlaySpec>,
    dir: &Path,
    stem: &str,
) -> Result<Rendered> {
    std::fs::create_dir_all(dir)?;
    let grid = heatmap_grid(result, measure, gamma)?;
    let csv = dir.join(format!("{stem}.csv"));
    let mut w = BufWriter::new(File::create(&csv)?);
    grid.write_csv(&mut w)?;
    w.flush()?;
    let points = overlay.map(|spec| overlay_curves(spec, &grid.dngs));
    let overlay_csv = match &points {
        Some(points) => {
            let path = dir.join(format!("{stem}_overlay.csv"));
            let mut w = BufWriter::new(File::create(&path)?);
            writeln!(w, "dng,t_wfp,t_anc")?;
            for p in points {
                let f = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                writeln!(w, "{},{},{}", p.dng, f(p.t_wfp), f(p.t_anc))?;
            }
            w.flush()?;
            Some(path)
        }
        None => None,
    };
    let png = dir.join(format!("{stem}.png"));
    grid.to_image(12, points.as_deref()).save(&png)?;
    Ok(Rendered { csv, png, overlay_csv })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::result::StudyKind;
    use std::time::Duration;

    fn rec(dng: usize, threshold: f64, w: f64, has_infinite: bool) -> CellRecord {
        CellRecord {
            gamma: 0.0,
            dng,
            threshold,
            rho: Some(w / 10.0),
            dimension: Some(4),
            residuals: None,
            wasserstein: Some(w),
            has_infinite,
            wallclock: Duration::ZERO,
        }
    }

    fn result(records: Vec<CellRecord>) -> SweepResult {
        SweepResult::new(StudyKind::Grid, 20, 2, "h".into(), records)
    }

    #[test]
    fn two_by_two_grid() {
        let r = result(vec![rec(0, 0.1, 1.0, false), rec(1, 0.1, 2.0, false), rec(0, 0.4, 3.0, true), rec(1, 0.4, 4.0, false)]);
        let g = heatmap_grid(&r, HeatMeasure::Wasserstein, None).unwrap();
        assert_eq!(g.thresholds, vec![0.4, 0.1]);
        assert_eq!(g.dngs, vec![0, 1]);
        assert_eq!(g.cells, vec![vec![Cell::White, Cell::Value(4.0)], vec![Cell::Value(1.0), Cell::Value(2.0)]]);
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.ends_with("T\\dNG,0,1\n0.4,white,4\n0.1,1,2\n"));
        // white cells are a topology convention only
        let rho = heatmap_grid(&r, HeatMeasure::Rho, None).unwrap();
        assert_eq!(rho.cells[0][0], Cell::Value(0.3));
    }

    #[test]
    fn ragged_grids_are_rejected() {
        let r = result(vec![rec(0, 0.1, 1.0, false), rec(1, 0.1, 2.0, false), rec(0, 0.4, 3.0, false)]);
        assert!(matches!(heatmap_grid(&r, HeatMeasure::Rho, None), Err(SweepError::Render(_))));
    }

    #[test]
    fn wavefront_overlay_points() {
        let spec = OverlaySpec { dg: 8, nodes: 2500, q_t: 988, width: 0, mode: CdfMode::Binomial };
        let pts = overlay_curves(&spec, &[0, 2, 10]);
        assert_eq!(pts[1].dng, 2);
        assert!((pts[1].t_wfp.unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(pts[0].t_wfp, Some(0.375));
        assert!(pts[2].t_anc.is_some());
    }

    #[test]
    fn colormap_endpoints() {
        assert_eq!(viridis(0.0), Rgb([68, 1, 84]));
        assert_eq!(viridis(1.0), Rgb([253, 231, 37]));
        assert_eq!(viridis(7.0), Rgb([253, 231, 37]));
    }

    #[test]
    fn png_is_written_with_overlay() {
        let dir = tempfile::tempdir().unwrap();
        let r = result(vec![rec(0, 0.1, 1.0, false), rec(2, 0.1, 2.0, false), rec(0, 0.4, 3.0, true), rec(2, 0.4, 4.0, false)]);
        let spec = OverlaySpec { dg: 8, nodes: 400, q_t: 239, width: 0, mode: CdfMode::Binomial };
        let out = render_heatmap(&r, HeatMeasure::Wasserstein, Some(0.0), Some(&spec), dir.path(), "w").unwrap();
        let img = image::open(&out.png).unwrap().to_rgb8();
        assert_eq!((img.width(), img.height()), (24, 24));
        assert_eq!(*img.get_pixel(1, 1), Rgb([255, 255, 255]));
        // T^WFP(8, 2) = 0.3 sits a third of the way from the 0.4 row centre (y = 6)
        // to the 0.1 row centre (y = 18)
        assert_eq!(*img.get_pixel(18, 10), Rgb([0, 0, 0]));
        assert!(out.overlay_csv.is_some());
    }
}
