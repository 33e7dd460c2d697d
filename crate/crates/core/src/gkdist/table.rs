//! Quantile tables and their on-disk cache.
//!
//! Tables are CSV with a leading comment recording the numeric
//! configuration:
//!
//! ```text
//! # series_tol=1e-12, quad_nodes=256
//! beta,p,quantile
//! 0.25,0.95,2.4784...
//! ```

use std::env;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{GkConfig, GkDist};
use crate::error::{Error, Result};

/// Environment variable naming the cache directory.
pub const CACHE_DIR_ENV: &str = "BUBBLEGOF_CACHE_DIR";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileRow {
    pub beta: f64,
    pub p: f64,
    pub quantile: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTable {
    pub series_tol: f64,
    pub quad_nodes: usize,
    pub rows: Vec<QuantileRow>,
}

impl QuantileTable {
    fn header(series_tol: f64, quad_nodes: usize) -> String {
        format!("# series_tol={series_tol:e}, quad_nodes={quad_nodes}")
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = Self::header(self.series_tol, self.quad_nodes);
        out.push_str("\nbeta,p,quantile\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.beta, r.p, r.quantile));
        }
        out
    }

    /// Parse a table written by [`QuantileTable::to_csv_string`].
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let bad = |line: usize, message: &str| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: message.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let (_, first) = lines.next().ok_or_else(|| bad(1, "empty table"))?;
        let (series_tol, quad_nodes) = parse_header(first).ok_or_else(|| bad(1, "missing config comment"))?;
        match lines.next() {
            Some((_, "beta,p,quantile")) => {}
            _ => return Err(bad(2, "expected header `beta,p,quantile`")),
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(i + 1, "non-numeric field"))?;
            match fields[..] {
                [beta, p, quantile] => rows.push(QuantileRow { beta, p, quantile }),
                _ => return Err(bad(i + 1, "expected three columns")),
            }
        }
        Ok(QuantileTable {
            series_tol,
            quad_nodes,
            rows,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Write via a temporary file in the target directory and rename, so
    /// readers never observe a partial table.
    pub fn write_atomic(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_csv_string().as_bytes())
    }

    fn matches(&self, config: &GkConfig) -> bool {
        self.series_tol == config.series_tol && self.quad_nodes == config.quad_nodes
    }
}

fn parse_header(line: &str) -> Option<(f64, usize)> {
    let rest = line.strip_prefix('#')?.trim();
    let mut tol = None;
    let mut nodes = None;
    for part in rest.split(',') {
        match part.trim().split_once('=')? {
            ("series_tol", v) => tol = v.trim().parse().ok(),
            ("quad_nodes", v) => nodes = v.trim().parse().ok(),
            _ => {}
        }
    }
    Some((tol?, nodes?))
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Quantiles of `D^beta` for every `(beta, p)` pair, rows ordered by beta
/// then p as given.
pub fn tabulate(betas: &[f64], probs: &[f64], config: GkConfig) -> Result<QuantileTable> {
    check_probs(probs)?;
    let mut rows = Vec::with_capacity(betas.len() * probs.len());
    for &beta in betas {
        let dist = GkDist::with_config(beta, config)?;
        for &p in probs {
            rows.push(QuantileRow {
                beta,
                p,
                quantile: dist.quantile(p)?,
            });
        }
    }
    Ok(QuantileTable {
        series_tol: config.series_tol,
        quad_nodes: config.quad_nodes,
        rows,
    })
}

fn check_probs(probs: &[f64]) -> Result<()> {
    match probs.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
        Some(p) => Err(Error::param(format!("probability must lie in (0, 1), got {p}"))),
        None => Ok(()),
    }
}

/// Per-beta quantile cache in a directory, one file per
/// `(beta, series_tol, quad_nodes)`.
#[derive(Debug, Clone)]
pub struct TableCache {
    dir: PathBuf,
}

impl TableCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        TableCache { dir: dir.into() }
    }

    /// `$BUBBLEGOF_CACHE_DIR`, else `$XDG_CACHE_HOME/bubblegof`, else
    /// `$HOME/.cache/bubblegof`, else `.bubblegof-cache`.
    pub fn from_env() -> Self {
        let dir = env::var_os(CACHE_DIR_ENV)
            .map(PathBuf::from)
            .or_else(|| env::var_os("XDG_CACHE_HOME").map(|d| PathBuf::from(d).join("bubblegof")))
            .or_else(|| env::var_os("HOME").map(|d| PathBuf::from(d).join(".cache").join("bubblegof")))
            .unwrap_or_else(|| PathBuf::from(".bubblegof-cache"));
        TableCache { dir }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, beta: f64, config: &GkConfig) -> PathBuf {
        self.dir.join(format!(
            "gk_beta{beta}_tol{:e}_nodes{}.csv",
            config.series_tol, config.quad_nodes
        ))
    }

    /// Quantiles at `probs` for one beta, reusing cached entries and
    /// writing back any that had to be computed.
    pub fn quantiles(&self, beta: f64, probs: &[f64], config: GkConfig) -> Result<Vec<f64>> {
        check_probs(probs)?;
        let path = self.path_for(beta, &config);
        let mut table = match QuantileTable::read(&path) {
            Ok(t) if t.matches(&config) && t.rows.iter().all(|r| r.beta == beta) => t,
            _ => QuantileTable {
                series_tol: config.series_tol,
                quad_nodes: config.quad_nodes,
                rows: Vec::new(),
            },
        };
        let mut dist = None;
        let mut dirty = false;
        let mut out = Vec::with_capacity(probs.len());
        for &p in probs {
            if let Some(r) = table.rows.iter().find(|r| r.p == p) {
                out.push(r.quantile);
                continue;
            }
            if dist.is_none() {
                dist = Some(GkDist::with_config(beta, config)?);
            }
            let q = dist.as_ref().expect("initialized above").quantile(p)?;
            table.rows.push(QuantileRow { beta, p, quantile: q });
            dirty = true;
            out.push(q);
        }
        if dirty {
            table.rows.sort_by(|a, b| a.p.total_cmp(&b.p));
            table.write_atomic(&path)?;
        }
        Ok(out)
    }

    /// Same layout as [`tabulate`], served through the cache.
    pub fn tabulate(&self, betas: &[f64], probs: &[f64], config: GkConfig) -> Result<QuantileTable> {
        let mut rows = Vec::with_capacity(betas.len() * probs.len());
        for &beta in betas {
            let qs = self.quantiles(beta, probs, config)?;
            rows.extend(probs.iter().zip(qs).map(|(&p, quantile)| QuantileRow { beta, p, quantile }));
        }
        Ok(QuantileTable {
            series_tol: config.series_tol,
            quad_nodes: config.quad_nodes,
            rows,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_row() {
        let t = tabulate(&[1.0], &[0.99], GkConfig::default()).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!((t.rows[0].quantile - 1.6276236115189502).abs() < 1e-8);
    }

    #[test]
    fn csv_layout_and_round_trip() {
        let t = tabulate(&[0.5, 1.0], &[0.9, 0.95], GkConfig::default()).unwrap();
        let text = t.to_csv_string();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# series_tol=1e-12, quad_nodes=256"));
        assert_eq!(lines.next(), Some("beta,p,quantile"));
        assert_eq!(text.lines().count(), 6);
        let back = QuantileTable::parse(&text, Path::new("mem")).unwrap();
        assert_eq!(back, t);
        assert_eq!(text, tabulate(&[0.5, 1.0], &[0.9, 0.95], GkConfig::default()).unwrap().to_csv_string());
    }

    #[test]
    fn rejects_bad_probs() {
        assert!(tabulate(&[0.5], &[1.0], GkConfig::default()).is_err());
        assert!(tabulate(&[1.5], &[0.5], GkConfig::default()).is_err());
    }

    #[test]
    fn quantiles_nonincreasing_in_beta() {
        let betas: Vec<f64> = (1..=20).map(|i| i as f64 * 0.05).collect();
        for p in [0.9, 0.95, 0.99] {
            let t = tabulate(&betas, &[p], GkConfig::default()).unwrap();
            let qs: Vec<f64> = t.rows.iter().map(|r| r.quantile).collect();
            assert!(qs.windows(2).all(|w| w[1] <= w[0] + 1e-9), "p={p}: {qs:?}");
        }
    }

    #[test]
    fn cache_reuses_and_invalidates() {
        let dir = tempfile::tempdir().unwrap();
        let cache = TableCache::new(dir.path());
        let cfg = GkConfig::default();
        let first = cache.quantiles(0.5, &[0.95, 0.9], cfg).unwrap();
        let path = cache.path_for(0.5, &cfg);
        let bytes = fs::read(&path).unwrap();
        let again = cache.quantiles(0.5, &[0.9, 0.95], cfg).unwrap();
        assert_eq!(again, [first[1], first[0]]);
        assert_eq!(fs::read(&path).unwrap(), bytes);

        // a stale header for the same key is ignored and rewritten
        let stale = String::from_utf8(bytes).unwrap().replace("quad_nodes=256", "quad_nodes=8");
        fs::write(&path, stale).unwrap();
        let fresh = cache.quantiles(0.5, &[0.9], cfg).unwrap();
        assert_eq!(fresh[0], first[1]);
        let table = QuantileTable::read(&path).unwrap();
        assert_eq!(table.quad_nodes, 256);

        let other = GkConfig { quad_nodes: 128, ..cfg };
        assert_ne!(cache.path_for(0.5, &other), path);
    }

    #[test]
    fn io_errors_name_the_path() {
        let err = QuantileTable::read("/nonexistent/dir/table.csv").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/table.csv"));
    }
}
