//! Persisted samples of `|zeta(1/2 + it)|^2`.
//!
//! The on-disk format is plain CSV preceded by a `#`-prefixed header block:
//!
//! ```text
//! # k=1
//! # grid_step=0.25
//! # tol=1e-8
//! # generator_version=zml-core/0.1.0
//! t,value
//! 0.0029,2.1327e0
//! ```
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a
//! write/read cycle reproduces every entry bit for bit.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::quadrature::critical_line_wavelength;

/// Identifies the code that produced a cache; bump when sampling changes.
pub const GENERATOR_VERSION: &str = concat!("zml-core/", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: line {line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("cache rejects sample at t = {t}: {msg}")]
    InvalidEntry { t: f64, msg: String },
}

pub type Result<T> = std::result::Result<T, CacheError>;

/// Header fields, in on-disk order.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheHeader {
    pub k: u32,
    pub grid_step: f64,
    pub tol: f64,
    pub generator_version: String,
}

/// Sorted `(t, |zeta(1/2 + it)|^{2k})` samples.
///
/// Keys are the bit patterns of non-negative `t`, whose ordering agrees with
/// the numeric ordering, so lookups are exact and iteration is sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCache {
    header: CacheHeader,
    entries: BTreeMap<u64, f64>,
}

impl SampleCache {
    pub fn new(grid_step: f64, tol: f64) -> Self {
        SampleCache {
            header: CacheHeader { k: 1, grid_step, tol, generator_version: GENERATOR_VERSION.to_string() },
            entries: BTreeMap::new(),
        }
    }

    pub fn header(&self) -> &CacheHeader {
        &self.header
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, t: f64) -> Option<f64> {
        if t < 0.0 {
            return None;
        }
        // -0.0 and 0.0 share a key
        self.entries.get(&(t + 0.0).to_bits()).copied()
    }

    pub fn insert(&mut self, t: f64, value: f64) -> Result<()> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(CacheError::InvalidEntry { t, msg: "t must be finite and >= 0".into() });
        }
        if !(value >= 0.0 && value.is_finite()) {
            return Err(CacheError::InvalidEntry { t, msg: format!("value {value} must be finite and >= 0") });
        }
        self.entries.insert((t + 0.0).to_bits(), value);
        Ok(())
    }

    /// Entries in increasing `t`.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (f64::from_bits(k), v))
    }

    /// Absorb entries of another cache (other wins on collisions).
    pub fn merge(&mut self, other: &SampleCache) {
        for (&k, &v) in &other.entries {
            self.entries.insert(k, v);
        }
    }

    /// Monotone cubic (Fritsch–Carlson) interpolation at `t`.
    ///
    /// Returns `None` unless `t` is bracketed by cached samples whose spacing
    /// is at most a quarter of the local oscillation scale; callers then
    /// recompute instead.
    pub fn interpolate(&self, t: f64) -> Option<f64> {
        if let Some(v) = self.get(t) {
            return Some(v);
        }
        if !(t > 0.0) {
            return None;
        }
        let key = t.to_bits();
        let mut below = self.entries.range(..key).rev().map(|(&k, &v)| (f64::from_bits(k), v));
        let mut above = self.entries.range(key..).map(|(&k, &v)| (f64::from_bits(k), v));
        let p1 = below.next()?;
        let p2 = above.next()?;
        let p0 = below.next();
        let p3 = above.next();
        let limit = 0.25 * critical_line_wavelength(t);
        let spacing_ok = |a: (f64, f64), b: (f64, f64)| b.0 - a.0 <= limit;
        if !spacing_ok(p1, p2) || p0.is_some_and(|p| !spacing_ok(p, p1)) || p3.is_some_and(|p| !spacing_ok(p2, p)) {
            return None;
        }
        let h = p2.0 - p1.0;
        let d = (p2.1 - p1.1) / h;
        let slope_at = |left: Option<(f64, f64)>, mid: (f64, f64), right: Option<(f64, f64)>, fallback: f64| {
            let dl = left.map(|l| (mid.1 - l.1) / (mid.0 - l.0));
            let dr = right.map(|r| (r.1 - mid.1) / (r.0 - mid.0));
            match (dl, dr) {
                (Some(a), Some(b)) if a * b > 0.0 => {
                    // weighted harmonic mean keeps the interpolant monotone
                    let (hl, hr) = (mid.0 - left.unwrap().0, right.unwrap().0 - mid.0);
                    let w1 = 2.0 * hr + hl;
                    let w2 = hr + 2.0 * hl;
                    (w1 + w2) / (w1 / a + w2 / b)
                }
                (Some(_), Some(_)) => 0.0,
                _ => fallback,
            }
        };
        let m1 = slope_at(p0, p1, Some(p2), d);
        let m2 = slope_at(Some(p1), p2, p3, d);
        let x = (t - p1.0) / h;
        let h00 = (1.0 + 2.0 * x) * (1.0 - x) * (1.0 - x);
        let h10 = x * (1.0 - x) * (1.0 - x);
        let h01 = x * x * (3.0 - 2.0 * x);
        let h11 = x * x * (x - 1.0);
        Some((h00 * p1.1 + h10 * h * m1 + h01 * p2.1 + h11 * h * m2).max(0.0))
    }

    pub fn write_to<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut out = BufWriter::new(out);
        writeln!(out, "# k={}", self.header.k)?;
        writeln!(out, "# grid_step={}", self.header.grid_step)?;
        writeln!(out, "# tol={:e}", self.header.tol)?;
        writeln!(out, "# generator_version={}", self.header.generator_version)?;
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["t", "value"])?;
        for (t, v) in self.iter() {
            wtr.write_record([format!("{t}"), format!("{v:e}")])?;
        }
        wtr.flush()
    }

    pub fn read_from<R: Read>(input: R, path: &Path) -> Result<SampleCache> {
        let parse_err = |line: usize, msg: String| CacheError::Parse { path: path.to_path_buf(), line, msg };
        let mut reader = BufReader::new(input);
        let mut fields: Vec<(String, String)> = Vec::new();
        let mut line_no = 0;
        let mut line = String::new();
        let mut body = String::new();
        loop {
            line.clear();
            let n =
                reader.read_line(&mut line).map_err(|source| CacheError::Io { path: path.to_path_buf(), source })?;
            if n == 0 {
                break;
            }
            line_no += 1;
            match line.trim_end().strip_prefix('#') {
                Some(rest) => {
                    let (key, value) = rest
                        .trim()
                        .split_once('=')
                        .ok_or_else(|| parse_err(line_no, format!("malformed header line {line:?}")))?;
                    fields.push((key.trim().to_string(), value.trim().to_string()));
                }
                None => {
                    body.push_str(&line);
                    break;
                }
            }
        }
        let expected = ["k", "grid_step", "tol", "generator_version"];
        let keys: Vec<&str> = fields.iter().map(|(k, _)| k.as_str()).collect();
        if keys != expected {
            return Err(parse_err(line_no, format!("header keys {keys:?}, expected {expected:?}")));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i].1.parse::<f64>().map_err(|e| parse_err(i + 1, format!("{}: {e}", fields[i].0)))
        };
        let k = fields[0].1.parse::<u32>().map_err(|e| parse_err(1, format!("k: {e}")))?;
        let header = CacheHeader { k, grid_step: num(1)?, tol: num(2)?, generator_version: fields[3].1.clone() };
        reader.read_to_string(&mut body).map_err(|source| CacheError::Io { path: path.to_path_buf(), source })?;

        let header_lines = fields.len();
        let mut rdr = csv::Reader::from_reader(body.as_bytes());
        let mut cache = SampleCache { header, entries: BTreeMap::new() };
        let mut last = f64::NEG_INFINITY;
        for (i, rec) in rdr.records().enumerate() {
            let row = header_lines + 2 + i;
            let rec = rec.map_err(|e| parse_err(row, e.to_string()))?;
            if rec.len() != 2 {
                return Err(parse_err(row, format!("expected 2 fields, found {}", rec.len())));
            }
            let t: f64 = rec[0].parse().map_err(|e| parse_err(row, format!("t: {e}")))?;
            let v: f64 = rec[1].parse().map_err(|e| parse_err(row, format!("value: {e}")))?;
            if !(t > last) {
                return Err(parse_err(row, format!("t = {t} is not strictly increasing")));
            }
            last = t;
            cache.insert(t, v).map_err(|e| parse_err(row, e.to_string()))?;
        }
        Ok(cache)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let io_err = |source| CacheError::Io { path: path.to_path_buf(), source };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io_err)?;
        }
        // write beside the target, then rename, so readers never see a torn file
        let tmp = path.with_extension("csv.tmp");
        let file = File::create(&tmp).map_err(io_err)?;
        self.write_to(file).map_err(io_err)?;
        std::fs::rename(&tmp, path).map_err(io_err)
    }

    pub fn load(path: &Path) -> Result<SampleCache> {
        let file = File::open(path).map_err(|source| CacheError::Io { path: path.to_path_buf(), source })?;
        SampleCache::read_from(file, path)
    }
}
