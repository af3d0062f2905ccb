//! Shared computation context: the `|zeta|^2` sample store and the moment
//! tables built from it.
//!
//! Samples are drawn lazily, one lattice panel at a time, and memoised in a
//! [`SampleCache`], which can be loaded from and saved to disk. Tables are
//! immutable snapshots handed out behind `Arc`; extending the range builds a
//! longer snapshot. Reads take shared locks; sampling is serialised.

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

use parking_lot::{Mutex, RwLock};

use crate::cache::{SampleCache, GENERATOR_VERSION};
use crate::error::{Error, Result};
use crate::quadrature::{kronrod_nodes, KRONROD_POINTS};
use crate::special::zeta_sq_critical_panel;
use crate::table::{MomentTable, LATTICE_WIDTH};

/// Default absolute tolerance of each `|zeta(1/2 + it)|^2` sample.
pub const DEFAULT_SAMPLE_TOL: f64 = 1e-8;

/// Largest height the lab will sample.
pub const SAMPLE_CEILING: f64 = 10_000.0;

/// Tables grow in blocks of this many units of `t`.
const GROWTH_BLOCK: f64 = 50.0;

pub struct Lab {
    sample_tol: f64,
    samples: RwLock<SampleCache>,
    lattice: RwLock<Vec<[f64; KRONROD_POINTS]>>,
    tables: RwLock<HashMap<u32, Arc<MomentTable>>>,
    derived: RwLock<HashMap<String, f64>>,
    sampling: Mutex<()>,
    zeta_evaluations: AtomicU64,
    cache_hits: AtomicU64,
    dirty: AtomicBool,
}

impl std::fmt::Debug for Lab {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Lab")
            .field("sample_tol", &self.sample_tol)
            .field("samples", &self.samples.read().len())
            .field("lattice_extent", &self.lattice_extent())
            .finish()
    }
}

impl Default for Lab {
    fn default() -> Self {
        Lab::new(DEFAULT_SAMPLE_TOL)
    }
}

impl Lab {
    pub fn new(sample_tol: f64) -> Lab {
        Lab::with_cache(SampleCache::new(LATTICE_WIDTH, sample_tol))
    }

    /// A lab seeded with previously computed samples. The cache's tolerance
    /// becomes the sample tolerance.
    pub fn with_cache(cache: SampleCache) -> Lab {
        let sample_tol = cache.header().tol;
        Lab {
            sample_tol,
            samples: RwLock::new(cache),
            lattice: RwLock::new(Vec::new()),
            tables: RwLock::new(HashMap::new()),
            derived: RwLock::new(HashMap::new()),
            sampling: Mutex::new(()),
            zeta_evaluations: AtomicU64::new(0),
            cache_hits: AtomicU64::new(0),
            dirty: AtomicBool::new(false),
        }
    }

    /// Open a cache file if it exists and matches `sample_tol` and this
    /// generator; otherwise start empty.
    pub fn open(path: &Path, sample_tol: f64) -> Result<Lab> {
        if !path.exists() {
            return Ok(Lab::new(sample_tol));
        }
        let cache = SampleCache::load(path)?;
        let h = cache.header();
        let compatible =
            h.k == 1 && h.grid_step == LATTICE_WIDTH && h.tol <= sample_tol && h.generator_version == GENERATOR_VERSION;
        if !compatible {
            return Ok(Lab::new(sample_tol));
        }
        let mut fresh = SampleCache::new(LATTICE_WIDTH, sample_tol);
        fresh.merge(&cache);
        Ok(Lab::with_cache(fresh))
    }

    /// Process-wide lab with the default sample tolerance.
    pub fn shared() -> &'static Lab {
        static LAB: OnceLock<Lab> = OnceLock::new();
        LAB.get_or_init(Lab::default)
    }

    /// Write the sample store to `path` if anything new was computed.
    pub fn save(&self, path: &Path) -> Result<bool> {
        if !self.dirty.load(Ordering::Acquire) && path.exists() {
            return Ok(false);
        }
        self.samples.read().save(path)?;
        self.dirty.store(false, Ordering::Release);
        Ok(true)
    }

    pub fn sample_tol(&self) -> f64 {
        self.sample_tol
    }

    /// Number of zeta evaluations performed by this lab.
    pub fn zeta_evaluations(&self) -> u64 {
        self.zeta_evaluations.load(Ordering::Relaxed)
    }

    /// Number of samples served from the cache.
    pub fn cache_hits(&self) -> u64 {
        self.cache_hits.load(Ordering::Relaxed)
    }

    pub fn lattice_extent(&self) -> f64 {
        self.lattice.read().len() as f64 * LATTICE_WIDTH
    }

    /// `|zeta(1/2 + it)|^2` at one height, through the cache.
    pub fn sample(&self, t: f64) -> Result<f64> {
        if let Some(v) = self.samples.read().get(t) {
            self.cache_hits.fetch_add(1, Ordering::Relaxed);
            return Ok(v);
        }
        let v = crate::special::zeta_sq_critical(t, self.sample_tol)?;
        self.zeta_evaluations.fetch_add(1, Ordering::Relaxed);
        self.samples.write().insert(t, v)?;
        self.dirty.store(true, Ordering::Release);
        Ok(v)
    }

    /// A snapshot of the cached samples.
    pub fn samples(&self) -> SampleCache {
        self.samples.read().clone()
    }

    fn ensure_lattice(&self, extent: f64) -> Result<()> {
        if self.lattice_extent() >= extent {
            return Ok(());
        }
        let _guard = self.sampling.lock();
        let have = self.lattice.read().len();
        let want = (extent / LATTICE_WIDTH).ceil() as usize;
        if have >= want {
            return Ok(());
        }
        let nodes = kronrod_nodes();
        let half = 0.5 * LATTICE_WIDTH;
        let offsets: Vec<f64> = nodes.iter().map(|x| half * x).collect();
        let mut fresh = Vec::with_capacity(want - have);
        for p in have..want {
            let center = p as f64 * LATTICE_WIDTH + half;
            let ts: Vec<f64> = offsets.iter().map(|d| center + d).collect();
            let cached: Option<Vec<f64>> = {
                let cache = self.samples.read();
                ts.iter().map(|&t| cache.get(t)).collect()
            };
            let values = match cached {
                Some(v) => {
                    self.cache_hits.fetch_add(KRONROD_POINTS as u64, Ordering::Relaxed);
                    v
                }
                None => {
                    let v = zeta_sq_critical_panel(center, &offsets, self.sample_tol)?;
                    self.zeta_evaluations.fetch_add(KRONROD_POINTS as u64, Ordering::Relaxed);
                    let mut cache = self.samples.write();
                    for (&t, &x) in ts.iter().zip(&v) {
                        cache.insert(t, x)?;
                    }
                    self.dirty.store(true, Ordering::Release);
                    v
                }
            };
            let mut arr = [0.0; KRONROD_POINTS];
            arr.copy_from_slice(&values);
            fresh.push(arr);
        }
        self.lattice.write().extend(fresh);
        Ok(())
    }

    /// A derived scalar (calibration constant, fit statistic) computed once
    /// per lab under `key`.
    pub fn derived<F: FnOnce() -> Result<f64>>(&self, key: &str, compute: F) -> Result<f64> {
        if let Some(&v) = self.derived.read().get(key) {
            return Ok(v);
        }
        let v = compute()?;
        self.derived.write().insert(key.to_string(), v);
        Ok(v)
    }

    /// Table of `|zeta|^{2k}` covering at least `[0, t_max]`.
    pub fn table(&self, k: u32, t_max: f64) -> Result<Arc<MomentTable>> {
        if k == 0 {
            return Err(Error::Domain("moment order k must be >= 1".into()));
        }
        if !(t_max >= 0.0) {
            return Err(Error::Domain(format!("table extent {t_max} must be >= 0")));
        }
        if t_max > SAMPLE_CEILING {
            return Err(Error::DeskScaleExceeded {
                what: "sampled height".into(),
                requested: t_max,
                limit: SAMPLE_CEILING,
            });
        }
        if let Some(t) = self.tables.read().get(&k) {
            if t.extent() >= t_max {
                return Ok(t.clone());
            }
        }
        let extent = ((t_max / GROWTH_BLOCK).ceil().max(1.0) * GROWTH_BLOCK).min(SAMPLE_CEILING);
        self.ensure_lattice(extent)?;
        let lattice = self.lattice.read();
        let want = (extent / LATTICE_WIDTH).ceil() as usize;
        let mut tables = self.tables.write();
        let table = match tables.get(&k) {
            Some(t) if t.extent() >= t_max => return Ok(t.clone()),
            Some(t) => {
                let mut grown = (**t).clone();
                let have = grown.panels().len();
                grown.extend(&lattice[have..want]);
                grown
            }
            None => MomentTable::from_samples(k, self.sample_tol, &lattice[..want]),
        };
        let table = Arc::new(table);
        tables.insert(k, table.clone());
        Ok(table)
    }
}
