//! On-disk prime-sieve cache: a raw bitset with an 8-byte little-endian
//! header. The header stores the sieve limit L; the payload is
//! ⌈(L+1)/64⌉ little-endian 64-bit words, bit i of the stream set iff i
//! is prime. The cache directory comes from SL2TRACE_SIEVE_CACHE.

use std::path::PathBuf;

use anyhow::{Context, Result};
use sl2trace_core::primes::PrimeSieve;

pub const CACHE_ENV: &str = "SL2TRACE_SIEVE_CACHE";
const CACHE_FILE: &str = "primes.sieve";

fn cache_path() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).map(|dir| PathBuf::from(dir).join(CACHE_FILE))
}

pub fn write_sieve(path: &std::path::Path, sieve: &PrimeSieve) -> Result<()> {
    let mut bytes = Vec::with_capacity(8 + sieve.words().len() * 8);
    bytes.extend_from_slice(&sieve.limit().to_le_bytes());
    for w in sieve.words() {
        bytes.extend_from_slice(&w.to_le_bytes());
    }
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing sieve cache {}", path.display()))
}

pub fn read_sieve(path: &std::path::Path) -> Result<PrimeSieve> {
    let bytes =
        std::fs::read(path).with_context(|| format!("reading sieve cache {}", path.display()))?;
    anyhow::ensure!(bytes.len() >= 8, "sieve cache too short");
    let limit = u64::from_le_bytes(bytes[0..8].try_into().unwrap());
    let words: Vec<u64> = bytes[8..]
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    PrimeSieve::from_words(limit, words).map_err(|e| anyhow::anyhow!("{e}"))
}

/// A sieve covering at least `limit`, loaded from the cache when possible
/// and cached after construction when the cache directory is configured.
pub fn sieve_with_cache(limit: u64) -> Result<PrimeSieve> {
    if let Some(path) = cache_path() {
        if path.exists() {
            match read_sieve(&path) {
                Ok(sieve) if sieve.limit() >= limit => return Ok(sieve),
                Ok(_) | Err(_) => {} // stale or unreadable: rebuild below
            }
        }
        let sieve = PrimeSieve::new(limit);
        write_sieve(&path, &sieve)?;
        Ok(sieve)
    } else {
        Ok(PrimeSieve::new(limit))
    }
}
