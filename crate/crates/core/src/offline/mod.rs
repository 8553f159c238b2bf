//! Offline baselines that see the whole request sequence in advance.

pub mod adversarial;
pub mod belady;
pub mod exhaustive;

use std::io::Write;

use crate::engine::apply_service;
use crate::error::{Error, Result};
use crate::model::{CacheBankState, PolicyDecision, RequestBatch};
use crate::popularity::CatalogPopularity;

pub use adversarial::{adversarial_offline_schedule, adversarial_offline_schedule_for};
pub use belady::belady;
pub use exhaustive::{brute_force_opt, SearchBudget};

/// Per-slot decisions of an offline algorithm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OfflineSchedule {
    pub decisions: Vec<PolicyDecision>,
    pub total_faults: u64,
}

impl OfflineSchedule {
    /// Replays the schedule from `initial` through [`apply_service`] and
    /// returns the number of faults observed.
    pub fn replay(&self, initial: &CacheBankState, batches: &[RequestBatch]) -> Result<u64> {
        if batches.len() != self.decisions.len() {
            return Err(Error::Mismatch(format!(
                "schedule has {} decisions for {} batches",
                self.decisions.len(),
                batches.len()
            )));
        }
        let mut bank = initial.clone();
        let mut faults = 0u64;
        for (batch, decision) in batches.iter().zip(&self.decisions) {
            faults += u64::from(apply_service(&mut bank, batch, decision)?.faults);
        }
        Ok(faults)
    }

    /// CSV `slot,request_pos,cache,evicted`, one row per request (1-based
    /// positions, caches and content ids).
    pub fn write_csv<W: Write>(&self, batches: &[RequestBatch], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["slot", "request_pos", "cache", "evicted"])?;
        for (batch, decision) in batches.iter().zip(&self.decisions) {
            for i in 0..batch.len() {
                let j = decision.matching.cache_for(i);
                w.write_record([
                    batch.slot.to_string(),
                    (i + 1).to_string(),
                    (j + 1).to_string(),
                    decision.evictions[j]
                        .map(|c| c.index().to_string())
                        .unwrap_or_default(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Expected-fault lower bound for any offline policy over `slots` i.i.d.
/// slots: `slots · m · Σ_{i > mk} p_i`. Returns 0 (with a warning) when the
/// bank can hold `mk ≥ n` contents.
pub fn opt_bound_faults(pop: &CatalogPopularity, m: usize, k: usize, slots: u64) -> f64 {
    let held = m * k;
    if held >= pop.n() {
        log::warn!(
            "degenerate OPT bound: mk = {held} >= n = {}, bound is 0",
            pop.n()
        );
        return 0.0;
    }
    slots as f64 * m as f64 * pop.tail_sum(held + 1)
}
