//! Append-only cache of point counts.
//!
//! One record per line: `curve_hash T p k N`, where `T` is the sorted index
//! list written as `[i,j,...]` (no spaces). Unparseable lines are skipped
//! with a warning, and a truncated final line is terminated before new
//! records are appended.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use log::warn;

use crate::curve::SubsetMask;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub curve_hash: String,
    pub subset: SubsetMask,
    pub p: u32,
    pub k: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub entries: usize,
    pub skipped_lines: usize,
}

#[derive(Debug)]
pub struct CountCache {
    path: Option<PathBuf>,
    map: Mutex<HashMap<CacheKey, u64>>,
    file: Option<Mutex<File>>,
    hits: AtomicU64,
    misses: AtomicU64,
    skipped_lines: usize,
}

fn format_subset(s: SubsetMask) -> String {
    let idx: Vec<String> = s.indices().iter().map(u32::to_string).collect();
    format!("[{}]", idx.join(","))
}

fn parse_subset(s: &str) -> Option<SubsetMask> {
    let inner = s.strip_prefix('[')?.strip_suffix(']')?;
    if inner.is_empty() {
        return Some(SubsetMask::EMPTY);
    }
    let mut prev: Option<u32> = None;
    let mut idx = Vec::new();
    for part in inner.split(',') {
        let i: u32 = part.parse().ok()?;
        if i >= 128 || prev.is_some_and(|p| p >= i) {
            return None;
        }
        prev = Some(i);
        idx.push(i);
    }
    Some(SubsetMask::from_indices(idx))
}

pub fn format_record(key: &CacheKey, n_points: u64) -> String {
    format!(
        "{} {} {} {} {}",
        key.curve_hash,
        format_subset(key.subset),
        key.p,
        key.k,
        n_points
    )
}

pub fn parse_record(line: &str) -> Option<(CacheKey, u64)> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    let [hash, subset, p, k, n] = fields.as_slice() else {
        return None;
    };
    if hash.is_empty() || !hash.chars().all(|c| c.is_ascii_hexdigit()) {
        return None;
    }
    let key = CacheKey {
        curve_hash: hash.to_string(),
        subset: parse_subset(subset)?,
        p: p.parse().ok()?,
        k: k.parse().ok()?,
    };
    Some((key, n.parse().ok()?))
}

impl CountCache {
    pub fn in_memory() -> Self {
        CountCache {
            path: None,
            map: Mutex::new(HashMap::new()),
            file: None,
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
            skipped_lines: 0,
        }
    }

    /// Load (or create) a cache file and open it for appending.
    pub fn open(path: impl AsRef<Path>) -> io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)?;
        let mut text = String::new();
        file.read_to_string(&mut text)?;
        let mut map = HashMap::new();
        let mut skipped = 0;
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match parse_record(line) {
                Some((key, n)) => {
                    if let Some(&old) = map.get(&key) {
                        if old != n {
                            warn!(
                                "{}:{}: conflicting cache record ignored",
                                path.display(),
                                lineno + 1
                            );
                        }
                        continue;
                    }
                    map.insert(key, n);
                }
                None => {
                    warn!(
                        "{}:{}: ignoring corrupt cache line",
                        path.display(),
                        lineno + 1
                    );
                    skipped += 1;
                }
            }
        }
        if !text.is_empty() && !text.ends_with('\n') {
            file.write_all(b"\n")?;
        }
        Ok(CountCache {
            path: Some(path),
            map: Mutex::new(map),
            file: Some(Mutex::new(file)),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
            skipped_lines: skipped,
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, key: &CacheKey) -> Option<u64> {
        let found = self.map.lock().expect("cache lock").get(key).copied();
        let counter = if found.is_some() {
            &self.hits
        } else {
            &self.misses
        };
        counter.fetch_add(1, Ordering::Relaxed);
        found
    }

    /// Record a count. Existing keys are left untouched.
    pub fn insert(&self, key: CacheKey, n_points: u64) -> io::Result<()> {
        let mut map = self.map.lock().expect("cache lock");
        if map.contains_key(&key) {
            return Ok(());
        }
        if let Some(file) = &self.file {
            let mut f = file.lock().expect("cache file lock");
            writeln!(f, "{}", format_record(&key, n_points))?;
            f.flush()?;
        }
        map.insert(key, n_points);
        Ok(())
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            entries: self.map.lock().expect("cache lock").len(),
            skipped_lines: self.skipped_lines,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(t: &[u32], k: u32) -> CacheKey {
        CacheKey {
            curve_hash: "00ff00ff00ff00ff".into(),
            subset: SubsetMask::from_indices(t.iter().copied()),
            p: 7,
            k,
        }
    }

    #[test]
    fn record_format() {
        assert_eq!(
            format_record(&key(&[0, 2], 3), 352),
            "00ff00ff00ff00ff [0,2] 7 3 352"
        );
        assert_eq!(format_record(&key(&[], 1), 8), "00ff00ff00ff00ff [] 7 1 8");
        assert_eq!(
            parse_record("00ff00ff00ff00ff [0,2] 7 3 352"),
            Some((key(&[0, 2], 3), 352))
        );
        assert_eq!(parse_record("00ff00ff00ff00ff [2,0] 7 3 352"), None);
        assert_eq!(parse_record("00ff00ff00ff00ff [0,2] 7 3"), None);
        assert_eq!(parse_record("zz [0] 7 3 1"), None);
    }

    #[test]
    fn persists_and_skips_corrupt_trailing_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("counts.cache");
        {
            let c = CountCache::open(&path).unwrap();
            c.insert(key(&[1], 1), 8).unwrap();
            c.insert(key(&[1], 1), 9).unwrap();
            c.insert(key(&[], 2), 40).unwrap();
        }
        // simulate an interrupted write
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"00ff00ff00ff00ff [3] 7").unwrap();
        drop(f);

        let c = CountCache::open(&path).unwrap();
        assert_eq!(c.stats().entries, 2);
        assert_eq!(c.stats().skipped_lines, 1);
        assert_eq!(c.get(&key(&[1], 1)), Some(8));
        assert_eq!(c.get(&key(&[4], 1)), None);
        assert_eq!((c.stats().hits, c.stats().misses), (1, 1));
        c.insert(key(&[2], 1), 16).unwrap();
        drop(c);

        let c = CountCache::open(&path).unwrap();
        assert_eq!(c.get(&key(&[2], 1)), Some(16));
        assert_eq!(c.stats().entries, 3);
    }
}
