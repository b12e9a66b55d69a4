//! On-disk cache of the critical-orbit lifts `F_n`, one file per
//! `(lambda, sign, lift, n)`.
//!
//! A file is a one-line header
//! `PER1FN v<version> lambda=<a>/<b> sign=<+|-> n=<n> lift=<lift>`
//! followed by the pair in BFP text. Writes go to a temporary file in the cache directory
//! and are renamed into place, so readers only ever see complete files.

use std::io::Write;
use std::path::{Path, PathBuf};

use heightlab_core::per1::{build_fn, CriticalSign, FnSequence, Lambda, Lift, Per1Error};
use heightlab_core::polyforms::BinaryFormPair;

pub const CACHE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Lookup {
    Hit(BinaryFormPair),
    Missing,
    /// Written by another format version.
    Stale(String),
    Corrupt(String),
}

#[derive(Clone, Debug)]
pub struct FnCache {
    dir: PathBuf,
}

fn key(lambda: &Lambda, sign: CriticalSign, lift: Lift, n: usize) -> String {
    let lam = lambda.to_string();
    let lam = if lam.contains('/') { lam } else { format!("{lam}/1") };
    format!("lambda={lam} sign={sign} n={n} lift={lift}")
}

/// File contents for one level.
pub fn encode(lambda: &Lambda, sign: CriticalSign, lift: Lift, n: usize, pair: &BinaryFormPair) -> String {
    format!("PER1FN v{CACHE_VERSION} {}\n{}", key(lambda, sign, lift, n), pair.to_bfp())
}

/// Parses file contents, checking the version and the key.
pub fn decode(text: &str, lambda: &Lambda, sign: CriticalSign, lift: Lift, n: usize) -> Lookup {
    let Some((header, rest)) = text.split_once('\n') else {
        return Lookup::Corrupt("missing header".into());
    };
    let Some(tail) = header.strip_prefix("PER1FN v") else {
        return Lookup::Corrupt("bad header".into());
    };
    let (version, found) = tail.split_once(' ').unwrap_or((tail, ""));
    if version != CACHE_VERSION.to_string() {
        return Lookup::Stale(format!("v{version}"));
    }
    if found.trim() != key(lambda, sign, lift, n) {
        return Lookup::Corrupt("key mismatch".into());
    }
    match BinaryFormPair::from_bfp(rest) {
        Ok(pair) => Lookup::Hit(pair),
        Err(e) => Lookup::Corrupt(e.to_string()),
    }
}

impl FnCache {
    pub fn new(dir: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(FnCache { dir: dir.to_path_buf() })
    }

    pub fn path(&self, lambda: &Lambda, sign: CriticalSign, lift: Lift, n: usize) -> PathBuf {
        let lam: String = lambda
            .to_string()
            .chars()
            .map(|c| match c {
                '/' => '_',
                '-' => 'm',
                c => c,
            })
            .collect();
        let s = match sign {
            CriticalSign::Plus => "p",
            CriticalSign::Minus => "m",
        };
        self.dir.join(format!("fn-{lam}-{s}-{lift}-{n}.per1fn"))
    }

    pub fn lookup(&self, lambda: &Lambda, sign: CriticalSign, lift: Lift, n: usize) -> Lookup {
        match std::fs::read_to_string(self.path(lambda, sign, lift, n)) {
            Ok(text) => decode(&text, lambda, sign, lift, n),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Lookup::Missing,
            Err(e) => Lookup::Corrupt(e.to_string()),
        }
    }

    pub fn store(
        &self,
        lambda: &Lambda,
        sign: CriticalSign,
        lift: Lift,
        n: usize,
        pair: &BinaryFormPair,
    ) -> std::io::Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(encode(lambda, sign, lift, n, pair).as_bytes())?;
        tmp.flush()?;
        tmp.persist(self.path(lambda, sign, lift, n)).map_err(|e| e.error)?;
        Ok(())
    }

    /// `F_1..F_n`, from the cache when every level is present and
    /// consistent, otherwise rebuilt and written back.
    pub fn sequence(&self, lambda: &Lambda, sign: CriticalSign, lift: Lift, n: usize) -> Result<FnSequence, Per1Error> {
        let mut pairs = Vec::with_capacity(n);
        let mut complete = true;
        for k in 1..=n {
            match self.lookup(lambda, sign, lift, k) {
                Lookup::Hit(p) => pairs.push(p),
                Lookup::Missing => complete = false,
                Lookup::Stale(v) => {
                    log::warn!("ignoring cache file {} written by format {v}", self.path(lambda, sign, lift, k).display());
                    complete = false;
                }
                Lookup::Corrupt(why) => {
                    log::warn!("recomputing corrupt cache file {}: {why}", self.path(lambda, sign, lift, k).display());
                    complete = false;
                }
            }
            if !complete {
                break;
            }
        }
        if complete {
            match FnSequence::from_pairs(lambda, sign, lift, pairs) {
                Ok(seq) => return Ok(seq),
                Err(e) => log::warn!("recomputing inconsistent cache for lambda={lambda} sign={sign}: {e}"),
            }
        }
        let seq = build_fn(lambda, sign, n, lift)?;
        for e in &seq.entries()[1..] {
            if let Err(err) = self.store(lambda, sign, lift, e.n, &e.pair) {
                log::warn!("could not write cache entry n={}: {err}", e.n);
            }
        }
        Ok(seq)
    }
}

/// Builds `F_1..F_n` through the cache when one is configured.
pub fn load_sequence(
    cache: Option<&FnCache>,
    lambda: &Lambda,
    sign: CriticalSign,
    lift: Lift,
    n: usize,
) -> Result<FnSequence, Per1Error> {
    match cache {
        Some(c) => c.sequence(lambda, sign, lift, n),
        None => build_fn(lambda, sign, n, lift),
    }
}
