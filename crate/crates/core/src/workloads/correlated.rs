//! Grouped time-correlated arrivals.
//!
//! The catalog is split into `n/b` consecutive groups of `b` contents. Each
//! stream repeatedly picks a group with probability `∝ l^(-beta)`, draws
//! `y ~ Geometric(gamma)` on `{1, 2, …}`, and requests `min(y, b)` distinct
//! contents of that group in uniformly random order, one per slot.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use super::stream_rng;
use super::zipf::zipf_pmf;
use crate::engine::{BatchSource, Workload};
use crate::error::{Error, Result};
use crate::model::{ContentId, RequestBatch};
use crate::popularity::{CatalogPopularity, ContentSampler};

#[derive(Clone, Debug)]
pub struct GroupedCorrelatedModel {
    n: usize,
    group_size: usize,
    beta: f64,
    gamma: f64,
    group_pmf: Vec<f64>,
    group_sampler: ContentSampler,
    length: Geometric,
}

impl GroupedCorrelatedModel {
    /// `group_size = 1` gives the degenerate model with one content per
    /// subsequence.
    pub fn new(n: usize, group_size: usize, beta: f64, gamma: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyCatalog);
        }
        if group_size == 0 || !n.is_multiple_of(group_size) {
            return Err(Error::Config(format!(
                "group size {group_size} must be positive and divide n = {n}"
            )));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::Config(format!(
                "gamma must lie in (0, 1], got {gamma}"
            )));
        }
        let group_pmf = zipf_pmf(n / group_size, beta)?.pmf().to_vec();
        let group_sampler = ContentSampler::new(&group_pmf)?;
        let length = Geometric::new(gamma).map_err(|e| Error::Config(e.to_string()))?;
        Ok(GroupedCorrelatedModel {
            n,
            group_size,
            beta,
            gamma,
            group_pmf,
            group_sampler,
            length,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn group_size(&self) -> usize {
        self.group_size
    }

    pub fn groups(&self) -> usize {
        self.n / self.group_size
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn group_pmf(&self) -> &[f64] {
        &self.group_pmf
    }

    /// 1-based group of a content.
    pub fn group_of(&self, content: ContentId) -> usize {
        content.zero_based() / self.group_size + 1
    }

    /// Subsequence length `min(y, b)`.
    pub fn draw_length<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let failures = self.length.sample(rng);
        let y = failures.saturating_add(1);
        usize::try_from(y).map_or(self.group_size, |y| y.min(self.group_size))
    }

    /// Draws one subsequence into `out` (cleared first).
    pub fn draw_subsequence<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<ContentId>) {
        out.clear();
        let group = self.group_sampler.sample(rng).zero_based();
        let len = self.draw_length(rng);
        let first = group * self.group_size;
        let mut members: Vec<ContentId> = (first..first + self.group_size)
            .map(ContentId::from_zero_based)
            .collect();
        let (chosen, _) = members.partial_shuffle(rng, len);
        out.extend_from_slice(chosen);
    }

    /// `E[min(y, b)] = Σ_{j=1}^{b} (1-γ)^(j-1)`.
    pub fn expected_length(&self) -> f64 {
        (0..self.group_size)
            .map(|j| (1.0 - self.gamma).powi(j as i32))
            .sum()
    }

    /// Exact `p̃` by symmetry within a group: `P(group) · E[L] / b`.
    pub fn exact_ptilde(&self) -> Vec<f64> {
        let per_member = self.expected_length() / self.group_size as f64;
        (0..self.n)
            .map(|i| self.group_pmf[i / self.group_size] * per_member)
            .collect()
    }
}

/// Per-stream generator state.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StreamState {
    queue: VecDeque<ContentId>,
    completed: u64,
    scratch: Vec<ContentId>,
}

impl StreamState {
    pub fn new() -> Self {
        StreamState::default()
    }

    /// Number of subsequences fully emitted so far (`t_j`).
    pub fn completed(&self) -> u64 {
        self.completed
    }

    /// Requests still queued from the current subsequence.
    pub fn pending(&self) -> impl Iterator<Item = ContentId> + '_ {
        self.queue.iter().copied()
    }
}

/// Next request of one stream.
pub fn next_correlated_request<R: Rng + ?Sized>(
    model: &GroupedCorrelatedModel,
    state: &mut StreamState,
    rng: &mut R,
) -> ContentId {
    if state.queue.is_empty() {
        model.draw_subsequence(rng, &mut state.scratch);
        state.queue.extend(state.scratch.iter().copied());
    }
    let next = state.queue.pop_front().expect("subsequences are non-empty");
    if state.queue.is_empty() {
        state.completed += 1;
    }
    next
}

/// Monte-Carlo estimate of `p̃` and `E[L]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PtildeEstimate {
    /// Indexed by content.
    pub per_content: Vec<f64>,
    pub mean_len: f64,
    pub samples: u64,
}

impl PtildeEstimate {
    /// Estimates sorted descending, as the bounds expect.
    pub fn sorted_desc(&self) -> Vec<f64> {
        let mut v = self.per_content.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// Popularity ranking induced by the estimates.
    pub fn popularity(&self) -> CatalogPopularity {
        CatalogPopularity::from_weights(self.per_content.clone())
            .expect("estimates are non-negative counts")
    }
}

pub fn estimate_ptilde<R: Rng + ?Sized>(
    model: &GroupedCorrelatedModel,
    samples: u64,
    rng: &mut R,
) -> Result<PtildeEstimate> {
    if samples == 0 {
        return Err(Error::Config("need at least one subsequence sample".into()));
    }
    let mut counts = vec![0u64; model.n()];
    let mut total_len = 0u64;
    let mut buf = Vec::with_capacity(model.group_size());
    for _ in 0..samples {
        model.draw_subsequence(rng, &mut buf);
        total_len += buf.len() as u64;
        for c in &buf {
            counts[c.zero_based()] += 1;
        }
    }
    let s = samples as f64;
    Ok(PtildeEstimate {
        per_content: counts.into_iter().map(|c| c as f64 / s).collect(),
        mean_len: total_len as f64 / s,
        samples,
    })
}

/// Monte-Carlo `E[Z(T)]`: subsequences completed within `slots` slots,
/// summed over `m` independent streams. Averages `runs` single-stream
/// horizons and scales by `m`.
pub fn estimate_completions<R: Rng + ?Sized>(
    model: &GroupedCorrelatedModel,
    m: usize,
    slots: u64,
    runs: u64,
    rng: &mut R,
) -> Result<f64> {
    if runs == 0 || slots == 0 {
        return Err(Error::Config("runs and slots must be positive".into()));
    }
    let mut completed = 0u64;
    for _ in 0..runs {
        let mut elapsed = 0u64;
        loop {
            elapsed += model.draw_length(rng) as u64;
            if elapsed > slots {
                break;
            }
            completed += 1;
        }
    }
    Ok(m as f64 * completed as f64 / runs as f64)
}

/// `m` independent correlated streams.
#[derive(Clone, Debug)]
pub struct CorrelatedWorkload {
    model: GroupedCorrelatedModel,
    m: usize,
}

impl CorrelatedWorkload {
    pub fn new(model: GroupedCorrelatedModel, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("need at least one cache".into()));
        }
        Ok(CorrelatedWorkload { model, m })
    }

    pub fn model(&self) -> &GroupedCorrelatedModel {
        &self.model
    }

    /// The first `slots` requests of stream `stream` generated in isolation.
    pub fn stream_requests(&self, seed: u64, stream: usize, slots: usize) -> Vec<ContentId> {
        let mut rng = stream_rng(seed, stream as u64);
        let mut state = StreamState::new();
        (0..slots)
            .map(|_| next_correlated_request(&self.model, &mut state, &mut rng))
            .collect()
    }
}

struct CorrelatedSource<'a> {
    model: &'a GroupedCorrelatedModel,
    streams: Vec<(StreamState, ChaCha8Rng)>,
}

impl BatchSource for CorrelatedSource<'_> {
    fn next_batch(&mut self, slot: u64) -> Option<RequestBatch> {
        let requests = self
            .streams
            .iter_mut()
            .map(|(state, rng)| next_correlated_request(self.model, state, rng))
            .collect();
        Some(RequestBatch::new(slot, requests))
    }
}

impl Workload for CorrelatedWorkload {
    fn caches(&self) -> usize {
        self.m
    }

    fn catalog_size(&self) -> usize {
        self.model.n()
    }

    fn source(&self, seed: u64) -> Box<dyn BatchSource + '_> {
        Box::new(CorrelatedSource {
            model: &self.model,
            streams: (0..self.m)
                .map(|j| (StreamState::new(), stream_rng(seed, j as u64)))
                .collect(),
        })
    }
}
