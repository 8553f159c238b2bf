// Shared helpers for the integration tests and the acceptance runner.
#![allow(dead_code)]

use mcp_sim::engine::apply_service;
use mcp_sim::model::{CacheBankState, ContentId, RequestBatch};
use mcp_sim::policies::rules_compliant_step;
use mcp_sim::workloads::adversarial::{a, adversarial_initial_bank, adversarial_stream, b};

/// One table cell: `entering` replaced the occupant of column `column`
/// (named by its occupant right after the prefix batch) in `cache`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TableCell {
    pub cache: usize,
    pub column: ContentId,
    pub entering: ContentId,
}

pub struct Table1Replay {
    /// Cells written by each post-prefix batch.
    pub rows: Vec<Vec<TableCell>>,
    /// Bank after every post-prefix batch.
    pub banks: Vec<CacheBankState>,
    pub faults: Vec<u32>,
}

/// Replays the rules-compliant policy on the adversarial stream and reads
/// off the table cells.
pub fn replay_table1(cycles: usize) -> Table1Replay {
    let batches = adversarial_stream(cycles);
    let mut bank = adversarial_initial_bank();
    let prefix = rules_compliant_step(&bank, &batches[0]);
    apply_service(&mut bank, &batches[0], &prefix).unwrap();

    // columns[j][p] = (label, current occupant)
    let mut columns: Vec<Vec<(ContentId, ContentId)>> = bank
        .caches()
        .iter()
        .map(|c| {
            let mut v: Vec<ContentId> = c.contents().collect();
            v.sort();
            v.into_iter().map(|x| (x, x)).collect()
        })
        .collect();

    let mut out = Table1Replay {
        rows: Vec::new(),
        banks: Vec::new(),
        faults: Vec::new(),
    };
    for batch in &batches[1..] {
        let decision = rules_compliant_step(&bank, batch);
        let outcome = apply_service(&mut bank, batch, &decision).unwrap();
        let mut cells = Vec::new();
        for e in outcome.events.iter().filter(|e| !e.hit) {
            let victim = e.evicted.expect("caches are full after the prefix");
            let slot = columns[e.cache]
                .iter_mut()
                .find(|(_, occupant)| *occupant == victim)
                .expect("victim sits in some column");
            slot.1 = e.request;
            cells.push(TableCell {
                cache: e.cache,
                column: slot.0,
                entering: e.request,
            });
        }
        out.rows.push(cells);
        out.banks.push(bank.clone());
        out.faults.push(outcome.faults);
    }
    out
}

/// The three printed cycles: (cache, column, entering) per row.
pub fn table1_expected() -> Vec<TableCell> {
    let cell = |cache, column, entering| TableCell {
        cache,
        column,
        entering,
    };
    vec![
        cell(1, b(4), a(2)),
        cell(0, a(4), b(2)),
        cell(1, b(3), a(3)),
        cell(1, b(2), b(3)),
        cell(1, b(1), a(4)),
        cell(1, b(4), b(4)),
        cell(1, b(3), a(2)),
        cell(1, b(2), b(1)),
        cell(1, b(1), a(3)),
        cell(1, b(4), b(3)),
        cell(1, b(3), a(4)),
        cell(1, b(2), b(4)),
        cell(1, b(1), a(2)),
        cell(1, b(4), b(1)),
        cell(1, b(3), a(3)),
        cell(1, b(2), b(3)),
        cell(1, b(1), a(4)),
        cell(1, b(4), b(4)),
    ]
}

/// Maximum number of hits over all `m!` assignments, with the preferred
/// assignment: lexicographically smallest hit set by (content id, position),
/// then lexicographically smallest assignment.
pub fn brute_force_matching(bank: &CacheBankState, requests: &[ContentId]) -> (usize, Vec<usize>) {
    let m = requests.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&i| (requests[i], i));
    let mut priority = vec![0; m];
    for (rank, &i) in order.iter().enumerate() {
        priority[i] = rank;
    }
    let mut best: Option<(usize, Vec<usize>, Vec<usize>)> = None;
    let mut perm: Vec<usize> = (0..m).collect();
    permute(&mut perm, 0, &mut |p| {
        let hits: Vec<usize> = (0..m)
            .filter(|&i| bank.cache(p[i]).contains(requests[i]))
            .map(|i| priority[i])
            .collect();
        let mut ranks = hits.clone();
        ranks.sort();
        let candidate = (hits.len(), ranks, p.to_vec());
        let better = match &best {
            None => true,
            Some((h, r, a)) => {
                candidate.0 > *h || (candidate.0 == *h && (&candidate.1, &candidate.2) < (r, a))
            }
        };
        if better {
            best = Some(candidate);
        }
    });
    let (h, _, a) = best.unwrap();
    (h, a)
}

fn permute(p: &mut Vec<usize>, at: usize, f: &mut dyn FnMut(&[usize])) {
    if at == p.len() {
        f(p);
        return;
    }
    for i in at..p.len() {
        p.swap(at, i);
        permute(p, at + 1, f);
        p.swap(at, i);
    }
}

pub fn batches_from(rows: &[Vec<usize>]) -> Vec<RequestBatch> {
    rows.iter()
        .enumerate()
        .map(|(t, r)| {
            RequestBatch::new(t as u64 + 1, r.iter().map(|&i| ContentId::new(i)).collect())
        })
        .collect()
}

pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
