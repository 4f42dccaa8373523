use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use sha2::{Digest, Sha256};

use crate::coverage::{CoverageOracle, NeuronSet, OracleError, Topology};

/// Memoizes activated sets by program-text digest for one campaign.
///
/// Only successful answers are stored. Oracles are deterministic, so a hit
/// returns exactly what a fresh query would.
pub struct OracleCache<'a> {
    oracle: &'a dyn CoverageOracle,
    threshold: f64,
    entries: Mutex<HashMap<[u8; 32], NeuronSet>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl<'a> OracleCache<'a> {
    pub fn new(oracle: &'a dyn CoverageOracle, threshold: f64) -> Self {
        OracleCache {
            oracle,
            threshold,
            entries: Mutex::new(HashMap::new()),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn topology(&self) -> &Topology {
        self.oracle.topology()
    }

    pub fn activated(&self, program: &str) -> Result<NeuronSet, OracleError> {
        let key: [u8; 32] = Sha256::digest(program.as_bytes()).into();
        if let Some(hit) = self.lock().get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(hit.clone());
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let set = self.oracle.activated(program, self.threshold)?;
        self.lock().insert(key, set.clone());
        Ok(set)
    }

    /// `(hits, misses)` so far.
    pub fn stats(&self) -> (u64, u64) {
        (self.hits.load(Ordering::Relaxed), self.misses.load(Ordering::Relaxed))
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, HashMap<[u8; 32], NeuronSet>> {
        self.entries.lock().unwrap_or_else(|p| p.into_inner())
    }
}
