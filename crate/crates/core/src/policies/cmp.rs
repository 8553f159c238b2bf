//! Cache Most Popular: every cache starts with the `k` most popular contents
//! and, on a miss, replaces its least popular content with the request.

use crate::engine::Policy;
use crate::error::{Error, Result};
use crate::model::{CacheBankState, ContentId, Matching, PolicyDecision, RequestBatch};
use crate::popularity::CatalogPopularity;

/// Bank with `{C1, …, Ck}` (by popularity rank) in every cache. The fills
/// happen before the first slot and are not faults.
pub fn cmp_init(pop: &CatalogPopularity, m: usize, k: usize) -> Result<CacheBankState> {
    if k > pop.n() {
        return Err(Error::Config(format!(
            "cache size k = {k} exceeds catalog size n = {}",
            pop.n()
        )));
    }
    let top: Vec<ContentId> = pop.ranked()[..k].to_vec();
    CacheBankState::preloaded(k, &vec![top; m])
}

fn least_popular(pop: &CatalogPopularity, cache: &crate::model::CacheState) -> Option<ContentId> {
    if pop.is_identity_ranking() {
        cache.largest_id()
    } else {
        cache.contents().max_by_key(|&c| pop.rank(c))
    }
}

/// Identity matching; a miss at a full cache evicts its least popular content.
pub fn cmp_step(
    bank: &CacheBankState,
    batch: &RequestBatch,
    pop: &CatalogPopularity,
) -> PolicyDecision {
    let evictions = batch
        .requests
        .iter()
        .zip(bank.caches())
        .map(|(&request, cache)| {
            if cache.contains(request) || !cache.is_full() {
                None
            } else {
                least_popular(pop, cache)
            }
        })
        .collect();
    PolicyDecision::new(Matching::identity(bank.m()), evictions)
}

#[derive(Clone, Debug)]
pub struct CmpPolicy {
    popularity: CatalogPopularity,
    m: usize,
    k: usize,
    preload: bool,
}

impl CmpPolicy {
    pub fn new(popularity: CatalogPopularity, m: usize, k: usize) -> Result<Self> {
        if m == 0 || k == 0 {
            return Err(Error::Config("m and k must be positive".into()));
        }
        if k > popularity.n() {
            return Err(Error::Config(format!(
                "cache size k = {k} exceeds catalog size n = {}",
                popularity.n()
            )));
        }
        Ok(CmpPolicy {
            popularity,
            m,
            k,
            preload: true,
        })
    }

    /// Start from empty caches; the fills then count as faults.
    pub fn empty_start(mut self) -> Self {
        self.preload = false;
        self
    }

    pub fn popularity(&self) -> &CatalogPopularity {
        &self.popularity
    }
}

impl Policy for CmpPolicy {
    fn name(&self) -> &str {
        "cmp"
    }

    fn caches(&self) -> usize {
        self.m
    }

    fn capacity(&self) -> usize {
        self.k
    }

    fn catalog_size(&self) -> Option<usize> {
        Some(self.popularity.n())
    }

    fn initial_bank(&self) -> CacheBankState {
        if self.preload {
            cmp_init(&self.popularity, self.m, self.k).expect("k <= n checked at construction")
        } else {
            CacheBankState::empty(self.m, self.k)
        }
    }

    fn decide(&self, bank: &CacheBankState, batch: &RequestBatch) -> PolicyDecision {
        cmp_step(bank, batch, &self.popularity)
    }
}
