//! Deterministic two-cache stream on which every rules-compliant online
//! algorithm faults once per batch while an offline schedule faults twice.
//!
//! Contents live in a 10-content universe: `x1, x2, a1..a4, b1..b4` map to
//! ids `1, 2, 3..=6, 7..=10`, so within each letter the subscript order
//! agrees with the id order.

use std::io::Write;

use crate::engine::{BatchSource, Workload};
use crate::error::Result;
use crate::model::{CacheBankState, ContentId, RequestBatch};

pub const CATALOG: usize = 10;
pub const CACHES: usize = 2;
pub const CAPACITY: usize = 4;
pub const CYCLE_LEN: usize = 6;

pub fn x(i: usize) -> ContentId {
    assert!((1..=2).contains(&i));
    ContentId::new(i)
}

pub fn a(i: usize) -> ContentId {
    assert!((1..=4).contains(&i));
    ContentId::new(2 + i)
}

pub fn b(i: usize) -> ContentId {
    assert!((1..=4).contains(&i));
    ContentId::new(6 + i)
}

/// Symbolic name (`x1`, `a3`, …) of a content in the adversarial universe.
pub fn label(content: ContentId) -> String {
    match content.index() {
        i @ 1..=2 => format!("x{i}"),
        i @ 3..=6 => format!("a{}", i - 2),
        i @ 7..=10 => format!("b{}", i - 6),
        i => format!("C{i}"),
    }
}

/// The repeating six-batch cycle.
pub fn cycle() -> [[ContentId; 2]; CYCLE_LEN] {
    [
        [a(1), a(2)],
        [b(1), b(2)],
        [a(1), a(3)],
        [a(3), b(3)],
        [a(1), a(4)],
        [a(3), b(4)],
    ]
}

/// Prefix `(a1, b1)` followed by `cycles` copies of [`cycle`]; slots from 1.
pub fn adversarial_stream(cycles: usize) -> Vec<RequestBatch> {
    let mut batches = vec![RequestBatch::new(1, vec![a(1), b(1)])];
    for _ in 0..cycles {
        for pair in cycle() {
            let slot = batches.len() as u64 + 1;
            batches.push(RequestBatch::new(slot, pair.to_vec()));
        }
    }
    batches
}

/// `c1 = {x1, a2, a3, a4}`, `c2 = {x2, b2, b3, b4}` with `x_j` oldest and
/// `a4, b4` older than `a3, b3`, older than `a2, b2`.
pub fn adversarial_initial_bank() -> CacheBankState {
    CacheBankState::preloaded(
        CAPACITY,
        &[vec![x(1), a(4), a(3), a(2)], vec![x(2), b(4), b(3), b(2)]],
    )
    .expect("initial contents fit the caches")
}

/// CSV `slot,r1,r2` with content ids.
pub fn write_stream_csv<W: Write>(batches: &[RequestBatch], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["slot", "r1", "r2"])?;
    for batch in batches {
        let mut record = vec![batch.slot.to_string()];
        record.extend(batch.requests.iter().map(|c| c.index().to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// [`adversarial_stream`] as a finite workload (the seed is ignored).
#[derive(Clone, Debug)]
pub struct AdversarialWorkload {
    pub cycles: usize,
}

struct Replay {
    batches: std::vec::IntoIter<RequestBatch>,
}

impl BatchSource for Replay {
    fn next_batch(&mut self, _slot: u64) -> Option<RequestBatch> {
        self.batches.next()
    }
}

impl Workload for AdversarialWorkload {
    fn caches(&self) -> usize {
        CACHES
    }

    fn catalog_size(&self) -> usize {
        CATALOG
    }

    fn source(&self, _seed: u64) -> Box<dyn BatchSource + '_> {
        Box::new(Replay {
            batches: adversarial_stream(self.cycles).into_iter(),
        })
    }
}
