//! Per-cache least recently used, starting from empty caches.

use crate::engine::Policy;
use crate::error::{Error, Result};
use crate::model::{CacheBankState, Matching, PolicyDecision, RequestBatch};

/// Identity matching; a miss at a full cache evicts the least recently
/// requested content (ties by older arrival).
pub fn lru_step(bank: &CacheBankState, batch: &RequestBatch) -> PolicyDecision {
    let evictions = batch
        .requests
        .iter()
        .zip(bank.caches())
        .map(|(&request, cache)| {
            if cache.contains(request) || !cache.is_full() {
                None
            } else {
                cache.least_recently_used()
            }
        })
        .collect();
    PolicyDecision::new(Matching::identity(bank.m()), evictions)
}

#[derive(Clone, Debug)]
pub struct LruPolicy {
    m: usize,
    k: usize,
}

impl LruPolicy {
    pub fn new(m: usize, k: usize) -> Result<Self> {
        if m == 0 || k == 0 {
            return Err(Error::Config("m and k must be positive".into()));
        }
        Ok(LruPolicy { m, k })
    }
}

impl Policy for LruPolicy {
    fn name(&self) -> &str {
        "lru"
    }

    fn caches(&self) -> usize {
        self.m
    }

    fn capacity(&self) -> usize {
        self.k
    }

    fn initial_bank(&self) -> CacheBankState {
        CacheBankState::empty(self.m, self.k)
    }

    fn decide(&self, bank: &CacheBankState, batch: &RequestBatch) -> PolicyDecision {
        lru_step(bank, batch)
    }
}
