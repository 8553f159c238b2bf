//! Furthest-in-future eviction for a single cache.

use std::collections::HashMap;

use super::OfflineSchedule;
use crate::error::{Error, Result};
use crate::model::{ContentId, Matching, PolicyDecision};

/// Optimal single-cache schedule. On a miss at a full cache the victim is
/// the cached content whose next request is furthest away; contents never
/// requested again go first, and ties pick the larger id.
pub fn belady(sequence: &[ContentId], k: usize, initial: &[ContentId]) -> Result<OfflineSchedule> {
    if k == 0 {
        return Err(Error::Config("cache size must be positive".into()));
    }
    let mut cached: Vec<ContentId> = initial.to_vec();
    cached.sort();
    cached.dedup();
    if cached.len() != initial.len() || cached.len() > k {
        return Err(Error::Config(format!(
            "initial contents must be at most {k} distinct ids"
        )));
    }

    // next_pos[t]: next position after t requesting the same content.
    let mut next_pos = vec![usize::MAX; sequence.len()];
    let mut upcoming: HashMap<ContentId, usize> = HashMap::new();
    for (t, &c) in sequence.iter().enumerate().rev() {
        if let Some(&later) = upcoming.get(&c) {
            next_pos[t] = later;
        }
        upcoming.insert(c, t);
    }

    let mut decisions = Vec::with_capacity(sequence.len());
    let mut faults = 0u64;
    for (t, &request) in sequence.iter().enumerate() {
        let mut eviction = None;
        if !cached.contains(&request) {
            faults += 1;
            if cached.len() == k {
                let victim = *cached
                    .iter()
                    .max_by_key(|&&c| (upcoming.get(&c).copied().unwrap_or(usize::MAX), c))
                    .expect("full cache is non-empty");
                cached.retain(|&c| c != victim);
                eviction = Some(victim);
            }
            cached.push(request);
        }
        upcoming.insert(request, next_pos[t]);
        decisions.push(PolicyDecision::new(Matching::identity(1), vec![eviction]));
    }
    Ok(OfflineSchedule {
        decisions,
        total_faults: faults,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CacheBankState, RequestBatch};

    fn seq(ids: &[usize]) -> Vec<ContentId> {
        ids.iter().map(|&i| ContentId::new(i)).collect()
    }

    fn batches(s: &[ContentId]) -> Vec<RequestBatch> {
        s.iter()
            .enumerate()
            .map(|(t, &c)| RequestBatch::new(t as u64 + 1, vec![c]))
            .collect()
    }

    /// Exhaustive search over every eviction choice.
    fn exhaustive(s: &[ContentId], k: usize, cache: Vec<ContentId>) -> u64 {
        let Some((&first, rest)) = s.split_first() else {
            return 0;
        };
        if cache.contains(&first) {
            return exhaustive(rest, k, cache);
        }
        if cache.len() < k {
            let mut next = cache;
            next.push(first);
            return 1 + exhaustive(rest, k, next);
        }
        (0..cache.len())
            .map(|v| {
                let mut next = cache.clone();
                next[v] = first;
                1 + exhaustive(rest, k, next)
            })
            .min()
            .unwrap()
    }

    #[test]
    fn cyclic_three_with_two_slots() {
        let s = seq(&[1, 2, 3, 1, 2, 3]);
        assert_eq!(exhaustive(&s, 2, vec![]), 4);
        let schedule = belady(&s, 2, &[]).unwrap();
        assert_eq!(schedule.total_faults, 4);
        let empty = CacheBankState::empty(1, 2);
        assert_eq!(schedule.replay(&empty, &batches(&s)).unwrap(), 4);
    }

    #[test]
    fn repeated_content_faults_once() {
        let s = seq(&[7; 20]);
        assert_eq!(belady(&s, 3, &[]).unwrap().total_faults, 1);
    }

    #[test]
    fn few_distinct_contents_only_compulsory_misses() {
        let s = seq(&[1, 2, 1, 3, 2, 3, 1, 1, 2]);
        assert_eq!(belady(&s, 3, &[]).unwrap().total_faults, 3);
    }

    #[test]
    fn prefers_never_used_then_larger_id() {
        let s = seq(&[3, 1]);
        // Cache {1, 2}: 2 never requested again, so it goes.
        let schedule = belady(&s, 2, &seq(&[1, 2])).unwrap();
        assert_eq!(
            schedule.decisions[0].evictions,
            vec![Some(ContentId::new(2))]
        );
        // Cache {4, 5}, neither used again: larger id goes.
        let schedule = belady(&seq(&[1]), 2, &seq(&[4, 5])).unwrap();
        assert_eq!(
            schedule.decisions[0].evictions,
            vec![Some(ContentId::new(5))]
        );
    }

    #[test]
    fn rejects_oversized_initial_state() {
        assert!(belady(&seq(&[1]), 1, &seq(&[1, 2])).is_err());
        assert!(belady(&seq(&[1]), 2, &seq(&[1, 1])).is_err());
    }
}
