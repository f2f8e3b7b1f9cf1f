//! Cache directory handling for the sieve table and the recursion series.

use std::env;
use std::path::{Path, PathBuf};

use mobius_core::cache::{
    read_series, read_table, write_series, write_table, SERIES_FILE, TABLE_FILE,
};
use mobius_core::recursion::{moebius_series, MoebiusSeries, Strategy};
use mobius_core::sieve::{build_sieve, FactorizationTable};
use mobius_core::Result;

pub const CACHE_ENV: &str = "MOBIUS_CACHE_DIR";

pub struct Store {
    dir: Option<PathBuf>,
}

impl Store {
    pub fn new(no_cache: bool, explicit: Option<&Path>) -> Self {
        if no_cache {
            return Store { dir: None };
        }
        let dir = explicit
            .map(Path::to_path_buf)
            .or_else(|| env::var_os(CACHE_ENV).map(PathBuf::from))
            .or_else(|| env::var_os("XDG_CACHE_HOME").map(|d| PathBuf::from(d).join("mobius")))
            .or_else(|| {
                env::var_os("HOME").map(|d| PathBuf::from(d).join(".cache").join("mobius"))
            });
        Store { dir }
    }

    fn path(&self, file: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(file))
    }

    /// A sieve covering at least `limit`.
    pub fn sieve(&self, limit: u64) -> Result<FactorizationTable> {
        let Some(path) = self.path(TABLE_FILE) else {
            return build_sieve(limit);
        };
        if path.exists() {
            let table = read_table(&path).inspect_err(|_| unusable(&path))?;
            if table.limit() >= limit {
                return Ok(table);
            }
        }
        let table = build_sieve(limit)?;
        if let Err(e) = write_table(&path, &table) {
            eprintln!("mobius: warning: could not write {}: {e}", path.display());
        }
        Ok(table)
    }

    /// A recursion series covering at least `limit`, grown from the cached
    /// prefix when there is one.
    pub fn series(&self, limit: u64) -> Result<MoebiusSeries> {
        let Some(path) = self.path(SERIES_FILE) else {
            return moebius_series(limit, Strategy::Blocked);
        };
        let mut series = if path.exists() {
            read_series(&path).inspect_err(|_| unusable(&path))?
        } else {
            MoebiusSeries::new()
        };
        if series.limit() >= limit {
            return Ok(series);
        }
        series.extend_to(limit, Strategy::Blocked)?;
        if let Err(e) = write_series(&path, &series) {
            eprintln!("mobius: warning: could not write {}: {e}", path.display());
        }
        Ok(series)
    }
}

fn unusable(path: &Path) {
    eprintln!(
        "mobius: cache file {} is unusable; remove it or pass --no-cache",
        path.display()
    );
}
