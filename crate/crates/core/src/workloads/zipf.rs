//! Truncated Zipf popularity and i.i.d. batch arrivals.

use rand_chacha::ChaCha8Rng;

use super::stream_rng;
use crate::engine::{BatchSource, Workload};
use crate::error::{Error, Result};
use crate::model::{ContentId, RequestBatch};
use crate::popularity::{compensated_sum, CatalogPopularity, ContentSampler};

/// `pmf[i-1] ∝ i^(-beta)` over `i = 1..=n`, normalized by exact summation.
#[derive(Clone, Debug, PartialEq)]
pub struct ZipfPopularity {
    n: usize,
    beta: f64,
    pmf: Vec<f64>,
}

impl ZipfPopularity {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn popularity(&self) -> CatalogPopularity {
        CatalogPopularity::from_weights(self.pmf.clone())
            .expect("zipf pmf is a valid weight vector")
    }
}

pub fn zipf_pmf(n: usize, beta: f64) -> Result<ZipfPopularity> {
    if n == 0 {
        return Err(Error::EmptyCatalog);
    }
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::Config(format!(
            "zipf exponent must be finite and >= 0, got {beta}"
        )));
    }
    let weights: Vec<f64> = (1..=n).map(|i| (i as f64).powf(-beta)).collect();
    // Smallest terms first keeps the compensated sum tight for large n.
    let normalizer = compensated_sum(weights.iter().rev().copied());
    let pmf = weights.into_iter().map(|w| w / normalizer).collect();
    Ok(ZipfPopularity { n, beta, pmf })
}

/// One request per stream, each stream advancing its own generator by one draw.
pub fn sample_iid_batch(
    sampler: &ContentSampler,
    slot: u64,
    streams: &mut [ChaCha8Rng],
) -> RequestBatch {
    RequestBatch::new(
        slot,
        streams.iter_mut().map(|rng| sampler.sample(rng)).collect(),
    )
}

/// `m` independent streams drawing i.i.d. from a fixed popularity.
#[derive(Clone, Debug)]
pub struct IidWorkload {
    sampler: ContentSampler,
    m: usize,
}

impl IidWorkload {
    pub fn new(popularity: &CatalogPopularity, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("need at least one cache".into()));
        }
        Ok(IidWorkload {
            sampler: ContentSampler::new(popularity.weights())?,
            m,
        })
    }

    pub fn zipf(n: usize, beta: f64, m: usize) -> Result<Self> {
        IidWorkload::new(&zipf_pmf(n, beta)?.popularity(), m)
    }

    pub fn sampler(&self) -> &ContentSampler {
        &self.sampler
    }

    /// The first `slots` requests of stream `stream` generated in isolation.
    pub fn stream_requests(&self, seed: u64, stream: usize, slots: usize) -> Vec<ContentId> {
        let mut rng = stream_rng(seed, stream as u64);
        (0..slots).map(|_| self.sampler.sample(&mut rng)).collect()
    }
}

struct IidSource<'a> {
    sampler: &'a ContentSampler,
    streams: Vec<ChaCha8Rng>,
}

impl BatchSource for IidSource<'_> {
    fn next_batch(&mut self, slot: u64) -> Option<RequestBatch> {
        Some(sample_iid_batch(self.sampler, slot, &mut self.streams))
    }
}

impl Workload for IidWorkload {
    fn caches(&self) -> usize {
        self.m
    }

    fn catalog_size(&self) -> usize {
        self.sampler.n()
    }

    fn source(&self, seed: u64) -> Box<dyn BatchSource + '_> {
        Box::new(IidSource {
            sampler: &self.sampler,
            streams: (0..self.m).map(|j| stream_rng(seed, j as u64)).collect(),
        })
    }
}
