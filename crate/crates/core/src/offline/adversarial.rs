//! Offline schedule for the adversarial stream: cross-assign the prefix
//! `(a1, b1)` and every later batch is served without a fault.

use super::OfflineSchedule;
use crate::error::{Error, Result};
use crate::model::{CacheBankState, Matching, PolicyDecision, RequestBatch};
use crate::workloads::adversarial::{
    a, adversarial_initial_bank, adversarial_stream, b, x, CAPACITY, CYCLE_LEN,
};

/// Schedule for `batches`, which must be exactly `adversarial_stream(c)` for
/// some `c`, starting from `adversarial_initial_bank()`.
pub fn adversarial_offline_schedule(batches: &[RequestBatch]) -> Result<OfflineSchedule> {
    if batches.is_empty() || !(batches.len() - 1).is_multiple_of(CYCLE_LEN) {
        return Err(Error::Mismatch(format!(
            "{} batches is not a prefix plus whole cycles",
            batches.len()
        )));
    }
    let cycles = (batches.len() - 1) / CYCLE_LEN;
    if batches != adversarial_stream(cycles).as_slice() {
        return Err(Error::Mismatch(
            "batches differ from the adversarial stream".into(),
        ));
    }

    // a1 -> cache 2 ejecting x2, b1 -> cache 1 ejecting x1.
    let mut decisions = vec![PolicyDecision::new(
        Matching::new(vec![1, 0]).expect("swap is a permutation"),
        vec![Some(x(1)), Some(x(2))],
    )];
    let settled = CacheBankState::preloaded(
        CAPACITY,
        &[vec![b(1), a(2), a(3), a(4)], vec![a(1), b(2), b(3), b(4)]],
    )?;
    for batch in &batches[1..] {
        let [r1, r2] = [batch.requests[0], batch.requests[1]];
        let assignment = if settled.cache(0).contains(r1) && settled.cache(1).contains(r2) {
            vec![0, 1]
        } else if settled.cache(1).contains(r1) && settled.cache(0).contains(r2) {
            vec![1, 0]
        } else {
            return Err(Error::Mismatch(format!(
                "slot {}: no fault-free assignment",
                batch.slot
            )));
        };
        decisions.push(PolicyDecision::new(
            Matching::new(assignment).expect("valid permutation"),
            vec![None, None],
        ));
    }
    let schedule = OfflineSchedule {
        decisions,
        total_faults: 2,
    };
    debug_assert_eq!(
        schedule.replay(&adversarial_initial_bank(), batches).ok(),
        Some(2)
    );
    Ok(schedule)
}

/// Convenience wrapper generating the stream for `cycles` first.
pub fn adversarial_offline_schedule_for(cycles: usize) -> (Vec<RequestBatch>, OfflineSchedule) {
    let batches = adversarial_stream(cycles);
    let schedule = adversarial_offline_schedule(&batches).expect("generator output always matches");
    (batches, schedule)
}
