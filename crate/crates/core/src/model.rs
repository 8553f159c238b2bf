//! Domain types shared by every policy, workload and baseline.
//!
//! Cache and request positions are 0-based inside the crate; content ids are
//! 1-based, with `C1` the most popular content under the active ordering.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// Index of a content in the catalog, 1-based.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContentId(u32);

impl ContentId {
    /// # Panics
    /// Panics if `index` is zero.
    pub fn new(index: usize) -> Self {
        assert!(index >= 1, "content ids are 1-based");
        ContentId(u32::try_from(index).expect("content index fits in u32"))
    }

    /// Validated constructor for ids that must lie in `[1, n]`.
    pub fn checked(index: usize, n: usize) -> Result<Self> {
        if index == 0 || index > n {
            return Err(Error::Config(format!(
                "content index {index} outside catalog [1, {n}]"
            )));
        }
        Ok(ContentId::new(index))
    }

    pub fn from_zero_based(index: usize) -> Self {
        ContentId::new(index + 1)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn zero_based(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for ContentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}", self.0)
    }
}

/// The `m` requests that arrive together in one slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RequestBatch {
    pub slot: u64,
    pub requests: Vec<ContentId>,
}

impl RequestBatch {
    pub fn new(slot: u64, requests: Vec<ContentId>) -> Self {
        RequestBatch { slot, requests }
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }
}

/// Bookkeeping kept for every cached content.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct EntryMeta {
    pub arrival_slot: u64,
    /// Cache-local insertion sequence number; breaks arrival ties.
    pub arrival_seq: u64,
    pub last_use: u64,
}

/// Contents of one cache with arrival and recency metadata.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheState {
    capacity: usize,
    entries: BTreeMap<ContentId, EntryMeta>,
    by_arrival: BTreeMap<u64, ContentId>,
    // (last_use, arrival_seq): ties on last use resolve to the older arrival.
    by_recency: BTreeMap<(u64, u64), ContentId>,
    next_seq: u64,
}

impl CacheState {
    pub fn empty(capacity: usize) -> Self {
        CacheState {
            capacity,
            entries: BTreeMap::new(),
            by_arrival: BTreeMap::new(),
            by_recency: BTreeMap::new(),
            next_seq: 0,
        }
    }

    /// A cache filled before the first slot. `oldest_first` lists the
    /// contents in arrival order; all get slot 0 as arrival and last use.
    pub fn preloaded(capacity: usize, oldest_first: &[ContentId]) -> Result<Self> {
        let mut cache = CacheState::empty(capacity);
        for &content in oldest_first {
            cache.insert(content, 0)?;
        }
        Ok(cache)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() >= self.capacity
    }

    pub fn contains(&self, content: ContentId) -> bool {
        self.entries.contains_key(&content)
    }

    /// Cached contents in ascending id order.
    pub fn contents(&self) -> impl Iterator<Item = ContentId> + '_ {
        self.entries.keys().copied()
    }

    pub fn meta(&self, content: ContentId) -> Option<EntryMeta> {
        self.entries.get(&content).copied()
    }

    /// Contents ordered from oldest to newest arrival.
    pub fn arrival_order(&self) -> impl Iterator<Item = ContentId> + '_ {
        self.by_arrival.values().copied()
    }

    pub fn oldest_arrival(&self) -> Option<ContentId> {
        self.by_arrival.values().next().copied()
    }

    pub fn least_recently_used(&self) -> Option<ContentId> {
        self.by_recency.values().next().copied()
    }

    pub fn largest_id(&self) -> Option<ContentId> {
        self.entries.keys().next_back().copied()
    }

    pub(crate) fn insert(&mut self, content: ContentId, slot: u64) -> Result<()> {
        if self.is_full() {
            return Err(Error::Protocol(format!(
                "insert of {content} into a full cache of size {}",
                self.capacity
            )));
        }
        if self.contains(content) {
            return Err(Error::Protocol(format!("{content} is already cached")));
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        let meta = EntryMeta {
            arrival_slot: slot,
            arrival_seq: seq,
            last_use: slot,
        };
        self.entries.insert(content, meta);
        self.by_arrival.insert(seq, content);
        self.by_recency.insert((slot, seq), content);
        Ok(())
    }

    pub(crate) fn remove(&mut self, content: ContentId) -> bool {
        match self.entries.remove(&content) {
            Some(meta) => {
                self.by_arrival.remove(&meta.arrival_seq);
                self.by_recency.remove(&(meta.last_use, meta.arrival_seq));
                true
            }
            None => false,
        }
    }

    pub(crate) fn touch(&mut self, content: ContentId, slot: u64) {
        if let Some(meta) = self.entries.get_mut(&content) {
            self.by_recency.remove(&(meta.last_use, meta.arrival_seq));
            meta.last_use = slot;
            self.by_recency.insert((slot, meta.arrival_seq), content);
        }
    }

    /// Checks that the secondary indexes agree with the entry table.
    pub fn check_invariants(&self) -> bool {
        self.entries.len() <= self.capacity
            && self.by_arrival.len() == self.entries.len()
            && self.by_recency.len() == self.entries.len()
            && self.entries.iter().all(|(c, meta)| {
                self.by_arrival.get(&meta.arrival_seq) == Some(c)
                    && self.by_recency.get(&(meta.last_use, meta.arrival_seq)) == Some(c)
            })
    }
}

/// The whole bank of `m` caches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheBankState {
    caches: Vec<CacheState>,
    slot_clock: u64,
}

impl CacheBankState {
    pub fn empty(m: usize, k: usize) -> Self {
        CacheBankState {
            caches: (0..m).map(|_| CacheState::empty(k)).collect(),
            slot_clock: 0,
        }
    }

    /// One entry per cache, each listing its contents oldest first.
    pub fn preloaded(k: usize, contents: &[Vec<ContentId>]) -> Result<Self> {
        let caches = contents
            .iter()
            .map(|c| CacheState::preloaded(k, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(CacheBankState {
            caches,
            slot_clock: 0,
        })
    }

    pub fn m(&self) -> usize {
        self.caches.len()
    }

    pub fn k(&self) -> usize {
        self.caches.first().map_or(0, CacheState::capacity)
    }

    pub fn slot_clock(&self) -> u64 {
        self.slot_clock
    }

    pub(crate) fn set_slot_clock(&mut self, slot: u64) {
        self.slot_clock = slot;
    }

    pub fn caches(&self) -> &[CacheState] {
        &self.caches
    }

    pub fn cache(&self, j: usize) -> &CacheState {
        &self.caches[j]
    }

    pub(crate) fn cache_mut(&mut self, j: usize) -> &mut CacheState {
        &mut self.caches[j]
    }

    /// Union of all cache contents.
    pub fn distinct_contents(&self) -> BTreeSet<ContentId> {
        self.caches.iter().flat_map(CacheState::contents).collect()
    }

    /// Per-cache sorted content lists, in cache order.
    pub fn content_sets(&self) -> Vec<Vec<ContentId>> {
        self.caches.iter().map(|c| c.contents().collect()).collect()
    }
}

/// Fault counts per slot and per cache.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaultLedger {
    per_slot: Vec<u32>,
    per_cache: Vec<u64>,
    warmup_slots: usize,
}

impl FaultLedger {
    pub fn new(m: usize, warmup_slots: usize) -> Self {
        FaultLedger {
            per_slot: Vec::new(),
            per_cache: vec![0; m],
            warmup_slots,
        }
    }

    /// Records one slot; `faulted[j]` says whether cache `j` faulted.
    pub fn record(&mut self, faulted: &[bool]) {
        debug_assert_eq!(faulted.len(), self.per_cache.len());
        let mut count = 0;
        for (j, &f) in faulted.iter().enumerate() {
            if f {
                self.per_cache[j] += 1;
                count += 1;
            }
        }
        self.per_slot.push(count);
    }

    pub fn m(&self) -> usize {
        self.per_cache.len()
    }

    pub fn slots(&self) -> usize {
        self.per_slot.len()
    }

    pub fn per_slot(&self) -> &[u32] {
        &self.per_slot
    }

    pub fn per_cache(&self) -> &[u64] {
        &self.per_cache
    }

    pub fn warmup_slots(&self) -> usize {
        self.warmup_slots
    }

    pub fn set_warmup_slots(&mut self, warmup: usize) {
        self.warmup_slots = warmup;
    }

    pub fn total(&self) -> u64 {
        self.per_slot.iter().map(|&f| u64::from(f)).sum()
    }

    /// Mean faults per slot, excluding the warm-up prefix.
    pub fn rate_after_warmup(&self) -> f64 {
        let measured = &self.per_slot[self.warmup_slots.min(self.per_slot.len())..];
        if measured.is_empty() {
            return 0.0;
        }
        let faults: u64 = measured.iter().map(|&f| u64::from(f)).sum();
        faults as f64 / measured.len() as f64
    }

    /// Fraction of all requests that faulted.
    pub fn fault_fraction(&self) -> f64 {
        let requests = self.per_slot.len() * self.m();
        if requests == 0 {
            0.0
        } else {
            self.total() as f64 / requests as f64
        }
    }
}

/// Perfect matching of request positions to caches.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matching {
    assignment: Vec<usize>,
}

impl Matching {
    /// `assignment[i]` is the cache serving request `i`; must be a permutation.
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        let m = assignment.len();
        let mut seen = vec![false; m];
        for &j in &assignment {
            if j >= m || seen[j] {
                return Err(Error::Protocol(format!(
                    "assignment {assignment:?} is not a permutation of 0..{m}"
                )));
            }
            seen[j] = true;
        }
        Ok(Matching { assignment })
    }

    pub fn identity(m: usize) -> Self {
        Matching {
            assignment: (0..m).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn cache_for(&self, request: usize) -> usize {
        self.assignment[request]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Inverse view: `requests[j]` is the request position served by cache `j`.
    pub fn request_for_each_cache(&self) -> Vec<usize> {
        let mut inverse = vec![0; self.assignment.len()];
        for (i, &j) in self.assignment.iter().enumerate() {
            inverse[j] = i;
        }
        inverse
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .assignment
            .iter()
            .enumerate()
            .map(|(i, j)| format!("{}->{}", i + 1, j + 1))
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// A matching plus the victim chosen at each cache (indexed by cache).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolicyDecision {
    pub matching: Matching,
    pub evictions: Vec<Option<ContentId>>,
}

impl PolicyDecision {
    pub fn new(matching: Matching, evictions: Vec<Option<ContentId>>) -> Self {
        PolicyDecision {
            matching,
            evictions,
        }
    }
}
