//! Catalog popularity: per-content weights (request probabilities `p`, or
//! expected appearances per subsequence `p̃`) plus the induced ranking.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::ContentId;

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Weights indexed by content, with contents ranked by descending weight.
/// Equal weights rank the smaller index as more popular.
#[derive(Clone, Debug, PartialEq)]
pub struct CatalogPopularity {
    weights: Vec<f64>,
    ranked: Vec<ContentId>,
    rank_of: Vec<usize>,
    identity: bool,
}

impl CatalogPopularity {
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyCatalog);
        }
        if let Some(bad) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::Config(format!("invalid popularity weight {bad}")));
        }
        let mut order: Vec<usize> = (0..weights.len()).collect();
        order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
        let mut rank_of = vec![0; weights.len()];
        for (rank, &idx) in order.iter().enumerate() {
            rank_of[idx] = rank + 1;
        }
        let identity = order.iter().enumerate().all(|(r, &i)| r == i);
        Ok(CatalogPopularity {
            ranked: order.into_iter().map(ContentId::from_zero_based).collect(),
            weights,
            rank_of,
            identity,
        })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, content: ContentId) -> f64 {
        self.weights[content.zero_based()]
    }

    /// Weights indexed by content (`weights()[i]` belongs to `C_{i+1}`).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// 1-based popularity rank.
    pub fn rank(&self, content: ContentId) -> usize {
        self.rank_of[content.zero_based()]
    }

    /// Contents from most to least popular.
    pub fn ranked(&self) -> &[ContentId] {
        &self.ranked
    }

    /// True when `C_i` has rank `i` for every `i`.
    pub fn is_identity_ranking(&self) -> bool {
        self.identity
    }

    /// Weights sorted descending.
    pub fn sorted_weights(&self) -> Vec<f64> {
        self.ranked.iter().map(|&c| self.weight(c)).collect()
    }

    /// Compensated sum of the weights at ranks `from..=to` (1-based,
    /// inclusive). Empty ranges sum to zero.
    pub fn rank_sum(&self, from: usize, to: usize) -> f64 {
        let from = from.max(1);
        let to = to.min(self.n());
        if from > to {
            return 0.0;
        }
        compensated_sum(self.ranked[from - 1..to].iter().map(|&c| self.weight(c)))
    }

    /// Σ of weights at ranks `from..=n`.
    pub fn tail_sum(&self, from: usize) -> f64 {
        self.rank_sum(from, self.n())
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.weights.iter().copied())
    }
}

/// Inverse-CDF sampler over content weights; one uniform draw per sample.
#[derive(Clone, Debug)]
pub struct ContentSampler {
    cdf: Vec<f64>,
}

impl ContentSampler {
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyCatalog);
        }
        let total = compensated_sum(weights.iter().copied());
        if total.is_nan() || total <= 0.0 || !total.is_finite() {
            return Err(Error::Config(
                "weights must have positive finite mass".into(),
            ));
        }
        let mut cdf = Vec::with_capacity(weights.len());
        let mut sum = 0.0f64;
        let mut carry = 0.0f64;
        for &w in weights {
            let y = w - carry;
            let t = sum + y;
            carry = (t - sum) - y;
            sum = t;
            cdf.push(sum / total);
        }
        Ok(ContentSampler { cdf })
    }

    pub fn n(&self) -> usize {
        self.cdf.len()
    }

    /// Content whose CDF interval contains `u ∈ [0, 1)`.
    pub fn lookup(&self, u: f64) -> ContentId {
        let idx = self.cdf.partition_point(|&c| c <= u);
        ContentId::from_zero_based(idx.min(self.cdf.len() - 1))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ContentId {
        self.lookup(rng.random::<f64>())
    }
}
