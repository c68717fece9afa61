//! On-disk cache of model lists, keyed by theory hash and size bound.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use lawvere::record::{theory_hash, AlgebraRecord};
use lawvere::{enumerate_models, EnumError, EnumOptions, FiniteAlgebra, Theory};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct CacheEntry {
    format_version: u32,
    theory_hash: String,
    k: usize,
    up_to_iso: bool,
    payload: Vec<AlgebraRecord>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: usize,
    pub computations: usize,
    pub writes: usize,
}

#[derive(Debug)]
pub struct ModelCache {
    dir: Option<PathBuf>,
    stats: CacheStats,
    warnings: Vec<String>,
}

impl ModelCache {
    /// `None` disables the cache entirely.
    pub fn new(dir: Option<PathBuf>) -> Self {
        ModelCache { dir, stats: CacheStats::default(), warnings: Vec::new() }
    }

    pub fn default_dir() -> PathBuf {
        std::env::temp_dir().join("lawvere-cache")
    }

    pub fn stats(&self) -> CacheStats {
        self.stats
    }

    pub fn take_warnings(&mut self) -> Vec<String> {
        std::mem::take(&mut self.warnings)
    }

    pub fn path_for(&self, theory: &Theory, k: usize, up_to_iso: bool) -> Option<PathBuf> {
        let suffix = if up_to_iso { "-iso" } else { "" };
        self.dir.as_ref().map(|d| d.join(theory_hash(theory)).join(format!("models-k{k}{suffix}.json")))
    }

    /// All models of size `1..=k`, labeled or one per isomorphism class.
    pub fn models(&mut self, theory: &Arc<Theory>, k: usize, up_to_iso: bool) -> Result<Vec<FiniteAlgebra>, EnumError> {
        let path = self.path_for(theory, k, up_to_iso);
        if let Some(path) = &path {
            if path.exists() {
                match read_entry(path, theory, k, up_to_iso) {
                    Ok(models) => {
                        self.stats.hits += 1;
                        return Ok(models);
                    }
                    Err(why) => self.warnings.push(format!("ignoring cache entry {}: {why}", path.display())),
                }
            }
        }
        let opts = EnumOptions { up_to_iso, jobs: 0, ..Default::default() };
        let models = enumerate_models(theory, k, &opts)?;
        self.stats.computations += 1;
        if let Some(path) = &path {
            match write_entry(path, theory, k, up_to_iso, &models) {
                Ok(()) => self.stats.writes += 1,
                Err(e) => self.warnings.push(format!("could not write cache entry {}: {e}", path.display())),
            }
        }
        Ok(models)
    }
}

fn read_entry(path: &Path, theory: &Arc<Theory>, k: usize, up_to_iso: bool) -> Result<Vec<FiniteAlgebra>, String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    let entry: CacheEntry = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    if entry.format_version != FORMAT_VERSION {
        return Err(format!("format version {} is not {FORMAT_VERSION}", entry.format_version));
    }
    if entry.theory_hash != theory_hash(theory) || entry.k != k || entry.up_to_iso != up_to_iso {
        return Err("entry describes a different enumeration".into());
    }
    let models = entry
        .payload
        .iter()
        .map(|r| r.to_algebra(theory).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    if models.iter().any(|m| !m.is_model() || m.size() > k) || models.windows(2).any(|w| w[0] >= w[1]) {
        return Err("payload is not a sorted list of models".into());
    }
    Ok(models)
}

fn write_entry(path: &Path, theory: &Theory, k: usize, up_to_iso: bool, models: &[FiniteAlgebra]) -> std::io::Result<()> {
    let dir = path.parent().expect("cache paths have a parent");
    fs::create_dir_all(dir)?;
    let entry = CacheEntry {
        format_version: FORMAT_VERSION,
        theory_hash: theory_hash(theory),
        k,
        up_to_iso,
        payload: models.iter().map(AlgebraRecord::from_algebra).collect(),
    };
    let tmp = dir.join(format!(".{}.{}.tmp", path.file_name().and_then(|n| n.to_str()).unwrap_or("entry"), std::process::id()));
    {
        let mut file = fs::File::create(&tmp)?;
        serde_json::to_writer(&mut file, &entry)?;
        file.write_all(b"\n")?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lawvere::parse_theory;

    fn monoid() -> Arc<Theory> {
        Arc::new(
            parse_theory(
                "theory monoid\nop mul : 2\nop e : 0\n\
                 eq assoc (x y z) : mul(mul(x,y),z) = mul(x,mul(y,z))\n\
                 eq left_unit (x) : mul(e(),x) = x\neq right_unit (x) : mul(x,e()) = x\nend\n",
            )
            .unwrap(),
        )
    }

    #[test]
    fn second_lookup_is_a_hit() {
        let dir = tempfile::tempdir().unwrap();
        let t = monoid();
        let mut cache = ModelCache::new(Some(dir.path().to_path_buf()));
        let first = cache.models(&t, 3, true).unwrap();
        let second = cache.models(&t, 3, true).unwrap();
        assert_eq!(first, second);
        assert_eq!(cache.stats(), CacheStats { hits: 1, computations: 1, writes: 1 });
        assert!(cache.path_for(&t, 3, true).unwrap().ends_with("models-k3-iso.json"));

        let mut fresh = ModelCache::new(Some(dir.path().to_path_buf()));
        assert_eq!(fresh.models(&t, 3, true).unwrap(), first);
        assert_eq!(fresh.stats().computations, 0);
        // labeled models live in a separate entry
        fresh.models(&t, 3, false).unwrap();
        assert_eq!(fresh.stats().computations, 1);
    }

    #[test]
    fn corrupt_entry_is_recomputed() {
        let dir = tempfile::tempdir().unwrap();
        let t = monoid();
        let mut cache = ModelCache::new(Some(dir.path().to_path_buf()));
        let good = cache.models(&t, 2, false).unwrap();
        let path = cache.path_for(&t, 2, false).unwrap();
        fs::write(&path, "{ not json").unwrap();
        assert_eq!(cache.models(&t, 2, false).unwrap(), good);
        assert_eq!(cache.stats().computations, 2);
        assert_eq!(cache.take_warnings().len(), 1);
        assert_eq!(cache.models(&t, 2, false).unwrap(), good);
        assert_eq!(cache.stats().hits, 1);

        let mut stale: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        stale["format_version"] = 0.into();
        fs::write(&path, stale.to_string()).unwrap();
        cache.models(&t, 2, false).unwrap();
        assert_eq!(cache.stats().computations, 3);
    }

    #[test]
    fn disabled_cache_never_writes() {
        let t = monoid();
        let mut cache = ModelCache::new(None);
        cache.models(&t, 2, false).unwrap();
        cache.models(&t, 2, false).unwrap();
        assert_eq!(cache.stats(), CacheStats { hits: 0, computations: 2, writes: 0 });
    }

    #[test]
    fn entry_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let t = monoid();
        let models = enumerate_models(&t, 3, &EnumOptions::default()).unwrap();
        let path = dir.path().join("entry.json");
        write_entry(&path, &t, 3, false, &models).unwrap();
        assert_eq!(read_entry(&path, &t, 3, false).unwrap(), models);
        assert!(read_entry(&path, &t, 2, false).is_err());
    }
}
