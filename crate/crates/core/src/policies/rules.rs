//! Generic online algorithm obeying the two rules any competitive MCP policy
//! must follow: serve each batch through a maximum-weight matching (an edge
//! request→cache weighs 1 iff the cache holds the request) and, on a miss,
//! eject the oldest arrived content.
//!
//! Ties among maximum-weight matchings are broken in two stages:
//!
//! 1. Among all maximum hit sets, prefer the lexicographically smallest by
//!    content id. For a two-request batch `(*_i, *_j)`, `i < j`, whose
//!    contents both sit in cache `u` and not in cache `v`, this serves
//!    `*_i` from `u` and `*_j` from `v`.
//! 2. With the hit set fixed, pick the lexicographically smallest assignment
//!    by (request position, cache index).

use crate::engine::Policy;
use crate::error::{Error, Result};
use crate::model::{CacheBankState, ContentId, Matching, PolicyDecision, RequestBatch};

/// Kuhn's augmenting-path test: can every request in `requests` be matched to
/// a distinct available cache through a hit edge?
fn hits_matchable(requests: &[usize], hit: &[Vec<bool>], available: &[bool]) -> bool {
    fn augment(
        r: usize,
        hit: &[Vec<bool>],
        available: &[bool],
        owner: &mut [Option<usize>],
        seen: &mut [bool],
    ) -> bool {
        for j in 0..available.len() {
            if !available[j] || !hit[r][j] || seen[j] {
                continue;
            }
            seen[j] = true;
            let free = match owner[j] {
                None => true,
                Some(other) => augment(other, hit, available, owner, seen),
            };
            if free {
                owner[j] = Some(r);
                return true;
            }
        }
        false
    }

    let mut owner = vec![None; available.len()];
    requests.iter().all(|&r| {
        let mut seen = vec![false; available.len()];
        augment(r, hit, available, &mut owner, &mut seen)
    })
}

/// Maximum-hit matching with the documented tie-breaking.
pub fn rules_compliant_matching(bank: &CacheBankState, requests: &[ContentId]) -> Matching {
    let m = requests.len();
    assert_eq!(m, bank.m(), "batch length must equal the number of caches");
    let hit: Vec<Vec<bool>> = requests
        .iter()
        .map(|&r| bank.caches().iter().map(|c| c.contains(r)).collect())
        .collect();
    let all = vec![true; m];

    // Stage 1: greedy over the transversal matroid in content-id order yields
    // a maximum hit set that is lexicographically smallest.
    let mut priority: Vec<usize> = (0..m).collect();
    priority.sort_by_key(|&i| (requests[i], i));
    let mut hit_set: Vec<usize> = Vec::new();
    for i in priority {
        hit_set.push(i);
        if !hits_matchable(&hit_set, &hit, &all) {
            hit_set.pop();
        }
    }
    let mut must_hit = vec![false; m];
    for &i in &hit_set {
        must_hit[i] = true;
    }

    // Stage 2: fix positions in order, each to the smallest feasible cache.
    let mut available = vec![true; m];
    let mut assignment = vec![0; m];
    for i in 0..m {
        let remaining: Vec<usize> = (i + 1..m).filter(|&r| must_hit[r]).collect();
        let chosen = (0..m)
            .find(|&j| {
                if !available[j] || (must_hit[i] && !hit[i][j]) {
                    return false;
                }
                available[j] = false;
                let ok = hits_matchable(&remaining, &hit, &available);
                available[j] = true;
                ok
            })
            .expect("a maximum hit set always admits a completion");
        available[chosen] = false;
        assignment[i] = chosen;
    }
    Matching::new(assignment).expect("each cache is used once")
}

/// Rules-compliant matching; each miss at a full cache ejects its oldest arrival.
pub fn rules_compliant_step(bank: &CacheBankState, batch: &RequestBatch) -> PolicyDecision {
    let matching = rules_compliant_matching(bank, &batch.requests);
    let mut evictions = vec![None; bank.m()];
    for (i, &request) in batch.requests.iter().enumerate() {
        let j = matching.cache_for(i);
        let cache = bank.cache(j);
        if !cache.contains(request) && cache.is_full() {
            evictions[j] = cache.oldest_arrival();
        }
    }
    PolicyDecision::new(matching, evictions)
}

#[derive(Clone, Debug)]
pub struct RulesCompliantPolicy {
    m: usize,
    k: usize,
}

impl RulesCompliantPolicy {
    pub fn new(m: usize, k: usize) -> Result<Self> {
        if m == 0 || k == 0 {
            return Err(Error::Config("m and k must be positive".into()));
        }
        Ok(RulesCompliantPolicy { m, k })
    }
}

impl Policy for RulesCompliantPolicy {
    fn name(&self) -> &str {
        "rules_compliant"
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
        rules_compliant_step(bank, batch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workloads::adversarial::{a, adversarial_initial_bank, b};

    fn c(i: usize) -> ContentId {
        ContentId::new(i)
    }

    #[test]
    fn unique_cross_matching() {
        let bank = CacheBankState::preloaded(1, &[vec![c(1)], vec![c(2)]]).unwrap();
        let batch = RequestBatch::new(1, vec![c(2), c(1)]);
        let d = rules_compliant_step(&bank, &batch);
        assert_eq!(d.matching.assignment(), &[1, 0]);
        assert_eq!(d.evictions, vec![None, None]);
    }

    #[test]
    fn both_requests_in_one_cache_splits_by_subscript() {
        let bank = CacheBankState::preloaded(
            4,
            &[vec![a(4), a(3), a(2), a(1)], vec![b(4), b(3), b(2), b(1)]],
        )
        .unwrap();
        let d = rules_compliant_step(&bank, &RequestBatch::new(1, vec![a(1), a(2)]));
        assert_eq!(d.matching.assignment(), &[0, 1]);
        assert_eq!(d.evictions, vec![None, Some(b(4))]);

        // Same situation mirrored: the smaller subscript keeps the hit even
        // though lexicographic order alone would send it to cache 1.
        let d = rules_compliant_step(&bank, &RequestBatch::new(1, vec![b(1), b(2)]));
        assert_eq!(d.matching.assignment(), &[1, 0]);
        assert_eq!(d.evictions, vec![Some(a(4)), None]);
    }

    #[test]
    fn cold_batch_uses_identity_and_evicts_oldest() {
        let bank = adversarial_initial_bank();
        let d = rules_compliant_step(&bank, &RequestBatch::new(1, vec![a(1), b(1)]));
        assert_eq!(d.matching.assignment(), &[0, 1]);
        assert_eq!(
            d.evictions,
            vec![
                Some(crate::workloads::adversarial::x(1)),
                Some(crate::workloads::adversarial::x(2))
            ]
        );
    }

    #[test]
    fn duplicate_requests_share_one_hit() {
        let bank = CacheBankState::preloaded(1, &[vec![c(1)], vec![c(2)]]).unwrap();
        let d = rules_compliant_step(&bank, &RequestBatch::new(1, vec![c(2), c(2)]));
        assert_eq!(d.matching.assignment(), &[1, 0]);
        assert_eq!(d.evictions, vec![Some(c(1)), None]);
    }
}
