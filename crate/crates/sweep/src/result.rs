//! Sweep records and their CSV form.
//!
//! `results.csv` is a pure function of the config: wallclock times go to a
//! separate `timings.csv` so two runs of one config are byte-identical.

use std::cmp::Ordering;
use std::io::{BufRead, Write};
use std::time::Duration;

use crate::error::{Result, SweepError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StudyKind {
    /// `(dNG, T)` grid.
    Grid,
    /// `(gamma, T)` at fixed `dNG`.
    Gamma,
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Grid => "grid",
            StudyKind::Gamma => "gamma",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub gamma: f64,
    pub dng: usize,
    pub threshold: f64,
    /// `None` when geometry was not requested; NaN when undefined.
    pub rho: Option<f64>,
    pub dimension: Option<usize>,
    /// `R_1, ..., R_P`.
    pub residuals: Option<Vec<f64>>,
    pub wasserstein: Option<f64>,
    /// Some node never activated in some realization.
    pub has_infinite: bool,
    pub wallclock: Duration,
}

impl CellRecord {
    fn order(&self, other: &Self) -> Ordering {
        self.gamma
            .total_cmp(&other.gamma)
            .then(self.dng.cmp(&other.dng))
            .then(self.threshold.total_cmp(&other.threshold))
    }

    /// Everything but the wallclock.
    pub fn same_values(&self, other: &Self) -> bool {
        Self { wallclock: Duration::ZERO, ..self.clone() } == Self { wallclock: Duration::ZERO, ..other.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub kind: StudyKind,
    pub n: usize,
    pub p_squared: u32,
    pub config_hash: String,
    pub version: String,
    /// Sorted by `(gamma, dNG, T)`.
    pub records: Vec<CellRecord>,
}

const COLUMNS: &str = "gamma,dng,threshold,rho,embedding_dimension,wasserstein,has_infinite,residuals";

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

impl SweepResult {
    pub fn new(kind: StudyKind, n: usize, p_squared: u32, config_hash: String, mut records: Vec<CellRecord>) -> Self {
        records.sort_by(CellRecord::order);
        Self {
            kind,
            n,
            p_squared,
            config_hash,
            version: env!("CARGO_PKG_VERSION").to_string(),
            records,
        }
    }

    pub fn gammas(&self) -> Vec<f64> {
        let mut g: Vec<f64> = self.records.iter().map(|r| r.gamma).collect();
        g.sort_by(f64::total_cmp);
        g.dedup();
        g
    }

    /// Floats use Rust's shortest round-trip formatting; the residual curve
    /// is a quoted JSON array.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# kind={}", self.kind.name())?;
        writeln!(w, "# n={}", self.n)?;
        writeln!(w, "# p_squared={}", self.p_squared)?;
        writeln!(w, "# config_hash={}", self.config_hash)?;
        writeln!(w, "# version={}", self.version)?;
        writeln!(w, "{COLUMNS}")?;
        for r in &self.records {
            let residuals = match &r.residuals {
                Some(v) => format!("\"{}\"", serde_json::to_string(v)?),
                None => String::new(),
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.gamma,
                r.dng,
                r.threshold,
                opt(&r.rho),
                opt(&r.dimension),
                opt(&r.wasserstein),
                r.has_infinite,
                residuals
            )?;
        }
        Ok(())
    }

    pub fn write_timings<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "gamma,dng,threshold,wallclock_s")?;
        for r in &self.records {
            writeln!(w, "{},{},{},{:.6}", r.gamma, r.dng, r.threshold, r.wallclock.as_secs_f64())?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Reads what [`write_csv`](Self::write_csv) wrote. Wallclocks are zero.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let bad = |msg: String| SweepError::Config(format!("results file: {msg}"));
        let mut kind = None;
        let (mut n, mut p_squared, mut hash, mut version) = (None, None, None, None);
        let mut records = Vec::new();
        let mut header_seen = false;
        for line in r.lines() {
            let line = line?;
            if let Some(meta) = line.strip_prefix("# ") {
                let (k, v) = meta.split_once('=').ok_or_else(|| bad(format!("bad metadata `{line}`")))?;
                match k {
                    "kind" => {
                        kind = Some(match v {
                            "grid" => StudyKind::Grid,
                            "gamma" => StudyKind::Gamma,
                            _ => return Err(bad(format!("unknown kind `{v}`"))),
                        })
                    }
                    "n" => n = v.parse().ok(),
                    "p_squared" => p_squared = v.parse().ok(),
                    "config_hash" => hash = Some(v.to_string()),
                    "version" => version = Some(v.to_string()),
                    _ => {}
                }
                continue;
            }
            if !header_seen {
                if line != COLUMNS {
                    return Err(bad(format!("unexpected header `{line}`")));
                }
                header_seen = true;
                continue;
            }
            let f: Vec<&str> = line.splitn(8, ',').collect();
            if f.len() != 8 {
                return Err(bad(format!("short row `{line}`")));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number `{s}`")));
            let opt_num = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
            records.push(CellRecord {
                gamma: num(f[0])?,
                dng: f[1].parse().map_err(|_| bad(format!("bad dNG `{}`", f[1])))?,
                threshold: num(f[2])?,
                rho: opt_num(f[3])?,
                dimension: if f[4].is_empty() {
                    None
                } else {
                    Some(f[4].parse().map_err(|_| bad(format!("bad dimension `{}`", f[4])))?)
                },
                wasserstein: opt_num(f[5])?,
                has_infinite: f[6].parse().map_err(|_| bad(format!("bad flag `{}`", f[6])))?,
                residuals: if f[7].is_empty() {
                    None
                } else {
                    Some(serde_json::from_str(f[7].trim_matches('"'))?)
                },
                wallclock: Duration::ZERO,
            });
        }
        let missing = |what: &str| bad(format!("missing `{what}` metadata"));
        let mut out = Self::new(
            kind.ok_or_else(|| missing("kind"))?,
            n.ok_or_else(|| missing("n"))?,
            p_squared.ok_or_else(|| missing("p_squared"))?,
            hash.ok_or_else(|| missing("config_hash"))?,
            records,
        );
        out.version = version.ok_or_else(|| missing("version"))?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(dng: usize, threshold: f64) -> CellRecord {
        CellRecord {
            gamma: 0.0,
            dng,
            threshold,
            rho: Some(0.25),
            dimension: Some(4),
            residuals: Some(vec![0.5, 0.1, 0.07, 0.01]),
            wasserstein: None,
            has_infinite: threshold > 0.3,
            wallclock: Duration::from_millis(dng as u64),
        }
    }

    #[test]
    fn csv_round_trip_is_sorted_and_exact() {
        let r = SweepResult::new(StudyKind::Grid, 20, 2, "ab".into(), vec![record(2, 0.4), record(0, 0.1), record(2, 0.1)]);
        assert_eq!(r.records[0].dng, 0);
        assert_eq!(r.records[2].threshold, 0.4);
        let text = r.to_csv_string();
        assert!(text.contains("\n0,0,0.1,0.25,4,,false,\"[0.5,0.1,0.07,0.01]\"\n"));
        assert!(!text.contains('\r'));
        let back = SweepResult::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back.records.len(), 3);
        for (a, b) in back.records.iter().zip(&r.records) {
            assert!(a.same_values(b));
        }
        assert_eq!(back.to_csv_string(), text);
    }
}
