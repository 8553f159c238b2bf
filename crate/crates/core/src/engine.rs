//! Slot-by-slot simulation loop and fault accounting.

use std::io::Write;

use crate::error::{Error, Result};
use crate::model::{CacheBankState, ContentId, FaultLedger, PolicyDecision, RequestBatch};

/// An online policy: an initial bank and a pure per-slot decision rule.
pub trait Policy: Sync {
    fn name(&self) -> &str;

    /// Number of caches `m`.
    fn caches(&self) -> usize;

    /// Per-cache capacity `k`.
    fn capacity(&self) -> usize;

    /// Catalog size the policy was configured for, if it depends on one.
    fn catalog_size(&self) -> Option<usize> {
        None
    }

    fn initial_bank(&self) -> CacheBankState;

    fn decide(&self, bank: &CacheBankState, batch: &RequestBatch) -> PolicyDecision;
}

/// Produces request batches, one per slot.
pub trait BatchSource {
    /// Requests for `slot`, or `None` once a finite sequence is exhausted.
    fn next_batch(&mut self, slot: u64) -> Option<RequestBatch>;
}

/// A seeded family of request sequences.
pub trait Workload: Sync {
    fn caches(&self) -> usize;

    fn catalog_size(&self) -> usize;

    fn source(&self, seed: u64) -> Box<dyn BatchSource + '_>;
}

/// What happened at one cache in one slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheEvent {
    pub slot: u64,
    pub cache: usize,
    pub request: ContentId,
    pub hit: bool,
    pub evicted: Option<ContentId>,
}

/// Per-cache events of a run, in slot then cache order. Only filled when
/// tracing is requested.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimulationTrace {
    pub events: Vec<CacheEvent>,
}

impl SimulationTrace {
    /// CSV with columns `slot,cache,request,hit,evicted` (1-based cache and
    /// content indices, empty `evicted` when nothing was ejected).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["slot", "cache", "request", "hit", "evicted"])?;
        for e in &self.events {
            w.write_record([
                e.slot.to_string(),
                (e.cache + 1).to_string(),
                e.request.index().to_string(),
                u8::from(e.hit).to_string(),
                e.evicted.map(|c| c.index().to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Result of serving one batch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ServiceOutcome {
    pub faults: u32,
    /// Indexed by cache.
    pub faulted: Vec<bool>,
    /// Indexed by cache.
    pub events: Vec<CacheEvent>,
}

/// Serves `batch` under `decision`, mutating `bank`.
///
/// The whole decision is validated against the pre-service state before
/// anything changes, so on error the bank is untouched.
pub fn apply_service(
    bank: &mut CacheBankState,
    batch: &RequestBatch,
    decision: &PolicyDecision,
) -> Result<ServiceOutcome> {
    let m = bank.m();
    if batch.len() != m || decision.matching.len() != m || decision.evictions.len() != m {
        return Err(Error::Protocol(format!(
            "bank has {m} caches but batch/matching/evictions have {}/{}/{} entries",
            batch.len(),
            decision.matching.len(),
            decision.evictions.len()
        )));
    }
    let request_at = decision.matching.request_for_each_cache();

    let mut faulted = vec![false; m];
    for j in 0..m {
        let cache = bank.cache(j);
        let request = batch.requests[request_at[j]];
        let hit = cache.contains(request);
        faulted[j] = !hit;
        match (hit, decision.evictions[j]) {
            (true, Some(victim)) => {
                return Err(Error::Protocol(format!(
                    "cache {}: eviction of {victim} named on a hit",
                    j + 1
                )))
            }
            (true, None) => {}
            (false, Some(victim)) => {
                if !cache.contains(victim) {
                    return Err(Error::InvalidEviction {
                        cache: j + 1,
                        victim,
                    });
                }
            }
            (false, None) => {
                if cache.is_full() {
                    return Err(Error::Protocol(format!(
                        "cache {}: miss on {request} at a full cache without an eviction",
                        j + 1
                    )));
                }
            }
        }
    }

    let slot = batch.slot;
    bank.set_slot_clock(slot);
    let mut events = Vec::with_capacity(m);
    for j in 0..m {
        let request = batch.requests[request_at[j]];
        let cache = bank.cache_mut(j);
        let evicted = if faulted[j] {
            let victim = decision.evictions[j];
            if let Some(v) = victim {
                cache.remove(v);
            }
            cache.insert(request, slot)?;
            victim
        } else {
            cache.touch(request, slot);
            None
        };
        events.push(CacheEvent {
            slot,
            cache: j,
            request,
            hit: !faulted[j],
            evicted,
        });
    }

    Ok(ServiceOutcome {
        faults: faulted.iter().filter(|&&f| f).count() as u32,
        faulted,
        events,
    })
}

#[derive(Clone, Debug)]
pub struct SimulationOptions {
    pub slots: u64,
    pub seed: u64,
    /// Slots excluded by [`FaultLedger::rate_after_warmup`].
    pub warmup: usize,
    pub record_trace: bool,
    /// Overrides the policy's own initial bank.
    pub initial: Option<CacheBankState>,
}

impl SimulationOptions {
    pub fn new(slots: u64, seed: u64) -> Self {
        SimulationOptions {
            slots,
            seed,
            warmup: 0,
            record_trace: false,
            initial: None,
        }
    }

    pub fn warmup(mut self, warmup: usize) -> Self {
        self.warmup = warmup;
        self
    }

    pub fn traced(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn initial(mut self, bank: CacheBankState) -> Self {
        self.initial = Some(bank);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulationRun {
    pub ledger: FaultLedger,
    pub trace: SimulationTrace,
    pub final_bank: CacheBankState,
    pub batches: Vec<RequestBatch>,
}

/// Runs `policy` against `workload` for up to `opts.slots` slots (fewer if
/// the workload is finite). Slots are numbered from 1. Fully determined by
/// the arguments.
pub fn run_simulation(
    policy: &dyn Policy,
    workload: &dyn Workload,
    opts: &SimulationOptions,
) -> Result<SimulationRun> {
    run_inner(policy, workload, opts, false)
}

/// Like [`run_simulation`] but also returns the generated batches, for
/// replay against offline baselines.
pub fn run_simulation_keeping_batches(
    policy: &dyn Policy,
    workload: &dyn Workload,
    opts: &SimulationOptions,
) -> Result<SimulationRun> {
    run_inner(policy, workload, opts, true)
}

fn run_inner(
    policy: &dyn Policy,
    workload: &dyn Workload,
    opts: &SimulationOptions,
    keep_batches: bool,
) -> Result<SimulationRun> {
    if opts.slots == 0 {
        return Err(Error::Config("slots must be at least 1".into()));
    }
    let m = policy.caches();
    if workload.caches() != m {
        return Err(Error::Config(format!(
            "policy '{}' has {m} caches but the workload produces {} requests per slot",
            policy.name(),
            workload.caches()
        )));
    }
    if let Some(n) = policy.catalog_size() {
        if n != workload.catalog_size() {
            return Err(Error::Config(format!(
                "policy '{}' was configured for {n} contents but the workload has {}",
                policy.name(),
                workload.catalog_size()
            )));
        }
    }
    let mut bank = match &opts.initial {
        Some(b) => {
            if b.m() != m || b.k() != policy.capacity() {
                return Err(Error::Config(format!(
                    "initial bank is {}x{} but the policy expects {m}x{}",
                    b.m(),
                    b.k(),
                    policy.capacity()
                )));
            }
            b.clone()
        }
        None => policy.initial_bank(),
    };

    let mut ledger = FaultLedger::new(m, opts.warmup);
    let mut trace = SimulationTrace::default();
    let mut batches = Vec::new();
    let mut source = workload.source(opts.seed);
    for slot in 1..=opts.slots {
        let Some(batch) = source.next_batch(slot) else {
            break;
        };
        if batch.len() != m {
            return Err(Error::Config(format!(
                "slot {slot}: workload produced {} requests for {m} caches",
                batch.len()
            )));
        }
        let decision = policy.decide(&bank, &batch);
        let outcome = apply_service(&mut bank, &batch, &decision)?;
        ledger.record(&outcome.faulted);
        if opts.record_trace {
            trace.events.extend(outcome.events);
        }
        if keep_batches {
            batches.push(batch);
        }
    }
    Ok(SimulationRun {
        ledger,
        trace,
        final_bank: bank,
        batches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Matching;

    fn c(i: usize) -> ContentId {
        ContentId::new(i)
    }

    fn bank(k: usize, sets: &[&[usize]]) -> CacheBankState {
        let contents: Vec<Vec<ContentId>> = sets
            .iter()
            .map(|s| s.iter().map(|&i| c(i)).collect())
            .collect();
        CacheBankState::preloaded(k, &contents).unwrap()
    }

    #[test]
    fn hit_only_refreshes_last_use() {
        let mut b = bank(1, &[&[1]]);
        let before = b.cache(0).meta(c(1)).unwrap();
        let batch = RequestBatch::new(3, vec![c(1)]);
        let out = apply_service(
            &mut b,
            &batch,
            &PolicyDecision::new(Matching::identity(1), vec![None]),
        )
        .unwrap();
        assert_eq!(out.faults, 0);
        let after = b.cache(0).meta(c(1)).unwrap();
        assert_eq!(after.last_use, 3);
        assert_eq!(after.arrival_seq, before.arrival_seq);
        assert_eq!(after.arrival_slot, before.arrival_slot);
    }

    #[test]
    fn miss_replaces_named_victim() {
        let mut b = bank(1, &[&[1]]);
        let batch = RequestBatch::new(1, vec![c(2)]);
        let out = apply_service(
            &mut b,
            &batch,
            &PolicyDecision::new(Matching::identity(1), vec![Some(c(1))]),
        )
        .unwrap();
        assert_eq!(out.faults, 1);
        assert_eq!(b.content_sets(), vec![vec![c(2)]]);
        assert_eq!(out.events[0].evicted, Some(c(1)));
    }

    #[test]
    fn cross_matching_hits_both() {
        let mut b = bank(1, &[&[1], &[2]]);
        let batch = RequestBatch::new(1, vec![c(2), c(1)]);
        let decision = PolicyDecision::new(Matching::new(vec![1, 0]).unwrap(), vec![None, None]);
        assert_eq!(apply_service(&mut b, &batch, &decision).unwrap().faults, 0);
    }

    #[test]
    fn invalid_evictions_are_rejected_without_side_effects() {
        let mut b = bank(1, &[&[1]]);
        let original = b.clone();
        let batch = RequestBatch::new(1, vec![c(2)]);
        let err = apply_service(
            &mut b,
            &batch,
            &PolicyDecision::new(Matching::identity(1), vec![Some(c(3))]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidEviction { cache: 1, .. }));
        let err = apply_service(
            &mut b,
            &batch,
            &PolicyDecision::new(Matching::identity(1), vec![None]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Protocol(_)));
        assert_eq!(b, original);
    }

    #[test]
    fn under_full_cache_inserts_without_victim() {
        let mut b = CacheBankState::empty(2, 2);
        let batch = RequestBatch::new(1, vec![c(5), c(5)]);
        let out = apply_service(
            &mut b,
            &batch,
            &PolicyDecision::new(Matching::identity(2), vec![None, None]),
        )
        .unwrap();
        // Duplicates fault independently at each cache.
        assert_eq!(out.faults, 2);
        assert_eq!(b.content_sets(), vec![vec![c(5)], vec![c(5)]]);
    }

    #[test]
    fn trace_csv_columns() {
        let trace = SimulationTrace {
            events: vec![CacheEvent {
                slot: 1,
                cache: 0,
                request: c(2),
                hit: false,
                evicted: Some(c(1)),
            }],
        };
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "slot,cache,request,hit,evicted\n1,1,2,0,1\n"
        );
    }
}
