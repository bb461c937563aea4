//! Certificate JSON records and the on-disk certificate cache.
//!
//! A cache entry is one JSON file per `(modulus, rank, A, B, kind)` key.
//! Writes go to a temporary file in the cache directory and are renamed
//! into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::algebra::{ModuleSpec, Sequence};
use crate::error::{Error, Result};
use crate::search::{compute_constant, ConstantCertificate, ConstantKind, SearchOptions, SearchStats};
use crate::weights::WeightConfig;
use crate::ENGINE_VERSION;

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "WZS_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = ".wzs-cache";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub kind: ConstantKind,
    pub modulus: u32,
    pub rank: u32,
    pub a_set: Vec<u32>,
    pub b_set: Option<Vec<u32>>,
    pub value: usize,
    pub extremal: Sequence,
    pub nodes_explored: u64,
    pub symmetries_used: Vec<String>,
    pub exhaustive: bool,
    pub engine_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl CertificateRecord {
    /// Record without a timestamp (embedded in reports).
    pub fn from_certificate(cert: &ConstantCertificate) -> Self {
        Self {
            kind: cert.kind,
            modulus: cert.module.modulus(),
            rank: cert.module.rank(),
            a_set: cert.config.a_set().to_vec(),
            b_set: cert.config.b_set().map(<[u32]>::to_vec),
            value: cert.value,
            extremal: cert.extremal.clone(),
            nodes_explored: cert.stats.nodes_explored,
            symmetries_used: cert.stats.symmetries_used.clone(),
            exhaustive: cert.stats.exhaustive,
            engine_version: ENGINE_VERSION.to_string(),
            timestamp: None,
        }
    }

    pub fn stamped(mut self) -> Self {
        self.timestamp = Some(Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true));
        self
    }

    pub fn key(&self) -> CacheKey {
        CacheKey {
            kind: self.kind,
            modulus: self.modulus,
            rank: self.rank,
            a_set: self.a_set.clone(),
            b_set: self.b_set.clone(),
        }
    }

    pub fn to_certificate(&self) -> Result<ConstantCertificate> {
        let module = ModuleSpec::new(self.modulus, self.rank)?;
        let a: Vec<i64> = self.a_set.iter().map(|&v| v as i64).collect();
        let b: Option<Vec<i64>> = self
            .b_set
            .as_ref()
            .map(|b| b.iter().map(|&v| v as i64).collect());
        let config = WeightConfig::new(self.modulus, &a, b.as_deref())?;
        for x in self.extremal.iter() {
            module.check(x)?;
        }
        Ok(ConstantCertificate {
            kind: self.kind,
            module,
            config,
            value: self.value,
            extremal: self.extremal.clone(),
            stats: SearchStats {
                nodes_explored: self.nodes_explored,
                symmetries_used: self.symmetries_used.clone(),
                exhaustive: self.exhaustive,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CacheKey {
    pub kind: ConstantKind,
    pub modulus: u32,
    pub rank: u32,
    pub a_set: Vec<u32>,
    pub b_set: Option<Vec<u32>>,
}

impl CacheKey {
    pub fn new(module: &ModuleSpec, cfg: &WeightConfig, kind: ConstantKind) -> Self {
        Self {
            kind,
            modulus: module.modulus(),
            rank: module.rank(),
            a_set: cfg.a_set().to_vec(),
            b_set: cfg.b_set().map(<[u32]>::to_vec),
        }
    }

    /// e.g. `D-m6-r1-a1_5-b1.json`, `E-m8-r1-a1_7-bnone.json`.
    pub fn file_name(&self) -> String {
        let join = |v: &[u32]| {
            v.iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join("_")
        };
        format!(
            "{}-m{}-r{}-a{}-b{}.json",
            self.kind,
            self.modulus,
            self.rank,
            join(&self.a_set),
            self.b_set.as_deref().map_or("none".to_string(), join)
        )
    }
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// The flag wins over the environment, which wins over the default.
    pub fn resolve(flag: Option<&Path>) -> Self {
        match flag {
            Some(p) => Self::new(p),
            None => match std::env::var_os(CACHE_ENV) {
                Some(p) if !p.is_empty() => Self::new(p),
                _ => Self::new(DEFAULT_CACHE_DIR),
            },
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(key.file_name())
    }

    /// A cached certificate for `key` from this engine version, if any.
    pub fn load(&self, key: &CacheKey) -> Result<Option<ConstantCertificate>> {
        let path = self.path_for(key);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let record: CertificateRecord = serde_json::from_str(&text)?;
        if record.key() != *key {
            return Err(Error::Cache(format!(
                "{} holds a different key",
                path.display()
            )));
        }
        if record.engine_version != ENGINE_VERSION {
            return Ok(None);
        }
        record.to_certificate().map(Some)
    }

    pub fn store(&self, cert: &ConstantCertificate) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let record = CertificateRecord::from_certificate(cert).stamped();
        let path = self.path_for(&record.key());
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer_pretty(&mut tmp, &record)?;
        tmp.write_all(b"\n")?;
        tmp.persist(&path).map_err(|e| Error::Io(e.error))?;
        Ok(path)
    }
}

/// Cached lookup, falling back to [`compute_constant`] and storing the
/// result. Returns whether the cache was hit.
pub fn compute_cached(
    cache: &Cache,
    module: &ModuleSpec,
    cfg: &WeightConfig,
    kind: ConstantKind,
    options: &SearchOptions,
) -> Result<(ConstantCertificate, bool)> {
    let key = CacheKey::new(module, cfg, kind);
    if let Some(cert) = cache.load(&key)? {
        return Ok((cert, true));
    }
    let cert = compute_constant(module, cfg, kind, options)?;
    cache.store(&cert)?;
    Ok((cert, false))
}
