//! Exact offline optimum for tiny instances by layered shortest path.
//!
//! States after each slot are banks with caches treated as interchangeable:
//! the key is the sorted multiset of per-cache content sets. Each state keeps
//! one concrete cache ordering (the one reached along its best path), so the
//! recovered decisions refer to real cache indices and replay exactly.
//!
//! Caches change only on faults; a fault at a full cache ejects one content,
//! and a fault at an under-full cache only inserts.

use std::collections::HashMap;

use super::OfflineSchedule;
use crate::error::{Error, Result};
use crate::model::{CacheBankState, ContentId, Matching, PolicyDecision, RequestBatch};

/// Size limits for [`brute_force_opt`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_n: usize,
    pub max_k: usize,
    pub max_m: usize,
    pub max_slots: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_n: 6,
            max_k: 3,
            max_m: 3,
            max_slots: 8,
        }
    }
}

impl SearchBudget {
    fn exceeds_default(&self) -> bool {
        let d = SearchBudget::default();
        self.max_n > d.max_n
            || self.max_k > d.max_k
            || self.max_m > d.max_m
            || self.max_slots > d.max_slots
    }
}

type Bank = Vec<Vec<ContentId>>;

struct Node {
    cost: u64,
    bank: Bank,
    parent: usize,
    decision: Option<PolicyDecision>,
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                prefix.push(j);
                go(prefix, used, out);
                prefix.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

fn canonical(bank: &Bank) -> Bank {
    let mut key = bank.clone();
    key.sort();
    key
}

/// Minimum total faults over all matchings and evictions, with one optimal
/// schedule. Refuses instances outside `budget`.
pub fn brute_force_opt(
    batches: &[RequestBatch],
    m: usize,
    k: usize,
    n: usize,
    initial: &CacheBankState,
    budget: &SearchBudget,
) -> Result<OfflineSchedule> {
    if budget.exceeds_default() {
        log::warn!(
            "exhaustive OPT budget {budget:?} exceeds the default; the search grows as \
             (m! * k^m)^T over up to C(n, k)^m states"
        );
    }
    if n > budget.max_n || k > budget.max_k || m > budget.max_m || batches.len() > budget.max_slots
    {
        return Err(Error::BudgetExceeded(format!(
            "instance n={n}, k={k}, m={m}, T={} exceeds budget n<={}, k<={}, m<={}, T<={}",
            batches.len(),
            budget.max_n,
            budget.max_k,
            budget.max_m,
            budget.max_slots
        )));
    }
    if m == 0 || k == 0 {
        return Err(Error::Config("m and k must be positive".into()));
    }
    if initial.m() != m || initial.k() != k {
        return Err(Error::Config(format!(
            "initial bank is {}x{}, expected {m}x{k}",
            initial.m(),
            initial.k()
        )));
    }
    let in_catalog = |c: &ContentId| c.index() <= n;
    if !initial.distinct_contents().iter().all(in_catalog) {
        return Err(Error::Config(format!(
            "initial bank holds contents outside [1, {n}]"
        )));
    }
    for batch in batches {
        if batch.len() != m || !batch.requests.iter().all(in_catalog) {
            return Err(Error::Config(format!(
                "slot {}: expected {m} requests within [1, {n}]",
                batch.slot
            )));
        }
    }

    let perms = permutations(m);
    let start = initial.content_sets();
    let mut layers: Vec<Vec<Node>> = vec![vec![Node {
        cost: 0,
        bank: start,
        parent: 0,
        decision: None,
    }]];

    for batch in batches {
        let prev = layers.last().expect("at least the initial layer");
        let mut next: Vec<Node> = Vec::new();
        let mut index: HashMap<Bank, usize> = HashMap::new();
        for (parent, node) in prev.iter().enumerate() {
            for perm in &perms {
                // perm[i] is the cache serving request i.
                let mut request_at = vec![0; m];
                for (i, &j) in perm.iter().enumerate() {
                    request_at[j] = i;
                }
                let options: Vec<Vec<Option<ContentId>>> = (0..m)
                    .map(|j| {
                        let cache = &node.bank[j];
                        let r = batch.requests[request_at[j]];
                        if cache.contains(&r) || cache.len() < k {
                            vec![None]
                        } else {
                            cache.iter().map(|&v| Some(v)).collect()
                        }
                    })
                    .collect();
                let misses = (0..m)
                    .filter(|&j| !node.bank[j].contains(&batch.requests[request_at[j]]))
                    .count() as u64;

                let mut choice = vec![0usize; m];
                loop {
                    let evictions: Vec<Option<ContentId>> =
                        (0..m).map(|j| options[j][choice[j]]).collect();
                    let mut bank = node.bank.clone();
                    for j in 0..m {
                        let r = batch.requests[request_at[j]];
                        if !bank[j].contains(&r) {
                            if let Some(v) = evictions[j] {
                                bank[j].retain(|&c| c != v);
                            }
                            bank[j].push(r);
                            bank[j].sort();
                        }
                    }
                    let cost = node.cost + misses;
                    let key = canonical(&bank);
                    let decision = PolicyDecision::new(
                        Matching::new(perm.clone()).expect("perm is a permutation"),
                        evictions,
                    );
                    match index.get(&key) {
                        Some(&at) if next[at].cost <= cost => {}
                        Some(&at) => {
                            next[at] = Node {
                                cost,
                                bank,
                                parent,
                                decision: Some(decision),
                            };
                        }
                        None => {
                            index.insert(key, next.len());
                            next.push(Node {
                                cost,
                                bank,
                                parent,
                                decision: Some(decision),
                            });
                        }
                    }

                    // Advance the mixed-radix counter over eviction choices.
                    let mut pos = 0;
                    while pos < m {
                        choice[pos] += 1;
                        if choice[pos] < options[pos].len() {
                            break;
                        }
                        choice[pos] = 0;
                        pos += 1;
                    }
                    if pos == m {
                        break;
                    }
                }
            }
        }
        layers.push(next);
    }

    let last = layers.last().expect("non-empty layers");
    let (mut at, best) = last
        .iter()
        .enumerate()
        .min_by_key(|(_, node)| node.cost)
        .map(|(i, node)| (i, node.cost))
        .expect("every layer has a state");
    let mut decisions = Vec::with_capacity(batches.len());
    for layer in layers.iter().skip(1).rev() {
        let node = &layer[at];
        decisions.push(
            node.decision
                .clone()
                .expect("non-initial nodes carry a decision"),
        );
        at = node.parent;
    }
    decisions.reverse();
    Ok(OfflineSchedule {
        decisions,
        total_faults: best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(i: usize) -> ContentId {
        ContentId::new(i)
    }

    fn batches(rows: &[&[usize]]) -> Vec<RequestBatch> {
        rows.iter()
            .enumerate()
            .map(|(t, r)| RequestBatch::new(t as u64 + 1, r.iter().map(|&i| c(i)).collect()))
            .collect()
    }

    #[test]
    fn unit_cache_alternation() {
        let initial = CacheBankState::preloaded(1, &[vec![c(1)]]).unwrap();
        let b = batches(&[&[2], &[1], &[2]]);
        let s = brute_force_opt(&b, 1, 1, 2, &initial, &SearchBudget::default()).unwrap();
        assert_eq!(s.total_faults, 3);
        assert_eq!(s.replay(&initial, &b).unwrap(), 3);
    }

    #[test]
    fn cross_matching_avoids_all_faults() {
        let initial = CacheBankState::preloaded(1, &[vec![c(1)], vec![c(2)]]).unwrap();
        let b = batches(&[&[1, 2], &[2, 1]]);
        let s = brute_force_opt(&b, 2, 1, 2, &initial, &SearchBudget::default()).unwrap();
        assert_eq!(s.total_faults, 0);
        assert_eq!(s.decisions[1].matching.assignment(), &[1, 0]);
        assert_eq!(s.replay(&initial, &b).unwrap(), 0);
    }

    #[test]
    fn refuses_oversized_instances() {
        let initial = CacheBankState::empty(4, 1);
        let b = batches(&[&[1, 2, 3, 4]]);
        let err = brute_force_opt(&b, 4, 1, 4, &initial, &SearchBudget::default()).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded(_)));
        let wide = SearchBudget {
            max_m: 4,
            ..SearchBudget::default()
        };
        assert_eq!(
            brute_force_opt(&b, 4, 1, 4, &initial, &wide)
                .unwrap()
                .total_faults,
            4
        );
    }

    #[test]
    fn empty_sequence_costs_nothing() {
        let initial = CacheBankState::empty(2, 2);
        let s = brute_force_opt(&[], 2, 2, 4, &initial, &SearchBudget::default()).unwrap();
        assert_eq!(s.total_faults, 0);
        assert!(s.decisions.is_empty());
    }

    #[test]
    fn rejects_requests_outside_catalog() {
        let initial = CacheBankState::empty(1, 1);
        let b = batches(&[&[5]]);
        assert!(brute_force_opt(&b, 1, 1, 4, &initial, &SearchBudget::default()).is_err());
    }
}
