//! On-disk activation-matrix cache, one binary file per (network, T).

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, ErrorKind, Write};
use std::path::{Path, PathBuf};

use contagion_core::contagion::{activation_matrix, CacheKey};
use contagion_core::{ActivationMatrix, ContagionConfig, Network};
use log::warn;

use crate::error::Result;

#[derive(Debug, Clone)]
pub struct ActivationCache {
    dir: PathBuf,
}

/// What a lookup did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheOutcome {
    Hit,
    Miss,
    /// A file existed but its header or body did not match; recomputed.
    Replaced,
}

impl ActivationCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &CacheKey) -> PathBuf {
        let h = &key.network;
        self.dir.join(format!(
            "act_n{}_p{}_q{}_g{}_s{:016x}_t{:04}.bin",
            h.n, h.p_squared, h.q, h.gamma_x10, h.seed, key.threshold_per_mille
        ))
    }

    pub fn get_or_compute(&self, net: &Network, cfg: &ContagionConfig) -> Result<ActivationMatrix> {
        Ok(self.lookup(net, cfg)?.0)
    }

    pub fn lookup(&self, net: &Network, cfg: &ContagionConfig) -> Result<(ActivationMatrix, CacheOutcome)> {
        let key = CacheKey::new(net, cfg.threshold)?;
        let path = self.path_for(&key);
        let mut outcome = CacheOutcome::Miss;
        match File::open(&path) {
            Ok(f) => match ActivationMatrix::read_cache(BufReader::new(f)) {
                Ok((stored, m)) if stored == key && m.sentinel() == cfg.sentinel => {
                    return Ok((m, CacheOutcome::Hit));
                }
                Ok((stored, _)) => {
                    warn!("cache header mismatch in {}: {stored:?}, expected {key:?}; recomputing", path.display());
                    outcome = CacheOutcome::Replaced;
                }
                Err(e) => {
                    warn!("unreadable cache file {}: {e}; recomputing", path.display());
                    outcome = CacheOutcome::Replaced;
                }
            },
            Err(e) if e.kind() == ErrorKind::NotFound => {}
            Err(e) => return Err(e.into()),
        }
        let m = activation_matrix(net, cfg);
        // write then rename so readers never see a partial file
        let tmp = path.with_extension("bin.tmp");
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            m.write_cache(&mut w, &key)?;
            w.flush()?;
        }
        fs::rename(&tmp, &path)?;
        Ok((m, outcome))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use contagion_core::network::build_network;
    use contagion_core::Radius;

    #[test]
    fn miss_then_hit_then_repair() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ActivationCache::open(dir.path()).unwrap();
        let net = build_network(5, Radius::from_squared(1).unwrap(), 2, 0.0, 4).unwrap();
        let cfg = ContagionConfig::for_network(0.2, &net).unwrap();
        let (cold, o1) = cache.lookup(&net, &cfg).unwrap();
        let (warm, o2) = cache.lookup(&net, &cfg).unwrap();
        assert_eq!((o1, o2), (CacheOutcome::Miss, CacheOutcome::Hit));
        assert_eq!(cold, warm);

        // a file whose header describes another network is replaced
        let other = build_network(5, Radius::from_squared(1).unwrap(), 2, 0.0, 5).unwrap();
        let key = CacheKey::new(&net, cfg.threshold).unwrap();
        let path = cache.path_for(&key);
        let foreign = activation_matrix(&other, &cfg);
        foreign
            .write_cache(File::create(&path).unwrap(), &CacheKey::new(&other, cfg.threshold).unwrap())
            .unwrap();
        let (fixed, o3) = cache.lookup(&net, &cfg).unwrap();
        assert_eq!(o3, CacheOutcome::Replaced);
        assert_eq!(fixed, cold);

        fs::write(&path, b"garbage").unwrap();
        assert_eq!(cache.lookup(&net, &cfg).unwrap().1, CacheOutcome::Replaced);
        assert_eq!(cache.lookup(&net, &cfg).unwrap().1, CacheOutcome::Hit);
    }
}
