//! Closed-form per-slot fault bounds and competitive-ratio bounds.
//!
//! All evaluators use exact compensated partial sums over the popularity
//! vector sorted descending; ranks below are 1-based.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::popularity::{compensated_sum, CatalogPopularity};

fn check_k(pop: &CatalogPopularity, k: usize) -> Result<()> {
    if k == 0 || k > pop.n() {
        return Err(Error::Precondition(format!(
            "cache size k = {k} must lie in [1, n = {}]",
            pop.n()
        )));
    }
    Ok(())
}

/// CMP expected faults per slot: `(m Σ_{i>k} p_i, m Σ_{i≥k} p_i)`.
pub fn cmp_rate_bounds(pop: &CatalogPopularity, m: usize, k: usize) -> Result<(f64, f64)> {
    check_k(pop, k)?;
    let m = m as f64;
    Ok((m * pop.tail_sum(k + 1), m * pop.tail_sum(k)))
}

/// OPT expected faults per slot: `m Σ_{i>mk} p_i` (0 when `mk ≥ n`).
pub fn opt_rate_lower(pop: &CatalogPopularity, m: usize, k: usize) -> f64 {
    m as f64 * pop.tail_sum(m * k + 1)
}

/// Upper bound on CMP's competitive ratio under i.i.d. arrivals:
/// `Σ_{i≥k} p_i / Σ_{i>mk} p_i`.
pub fn cr_upper_iid(pop: &CatalogPopularity, m: usize, k: usize) -> Result<f64> {
    check_k(pop, k)?;
    if m * k >= pop.n() {
        return Err(Error::UndefinedBound(format!(
            "mk = {} must be below n = {}",
            m * k,
            pop.n()
        )));
    }
    let denominator = pop.tail_sum(m * k + 1);
    if denominator <= 0.0 {
        return Err(Error::UndefinedBound(
            "no popularity mass beyond the top mk contents".into(),
        ));
    }
    Ok(pop.tail_sum(k) / denominator)
}

/// First rank excluded from the correlated OPT bound's tail: `⌈m(k + E[L])⌉`.
pub fn correlated_cutoff(m: usize, k: usize, mean_len: f64) -> usize {
    (m as f64 * (k as f64 + mean_len)).ceil() as usize
}

/// Correlated OPT lower bound over the horizon: `E[Z(T)] · Σ_{i > ⌈m(k+E[L])⌉} p̃_i`.
/// `ptilde_sorted` must be descending.
pub fn opt_bound_correlated(
    ptilde_sorted: &[f64],
    mean_len: f64,
    mean_completions: f64,
    m: usize,
    k: usize,
) -> f64 {
    let cutoff = correlated_cutoff(m, k, mean_len);
    if cutoff >= ptilde_sorted.len() {
        return 0.0;
    }
    mean_completions * compensated_sum(ptilde_sorted[cutoff..].iter().copied())
}

/// Upper bound on CMP's competitive ratio under correlated arrivals:
/// `(1 + m / E[Z(T)]) · Σ_{i≥k} p̃_i / Σ_{i > ⌈m(k+E[L])⌉} p̃_i`.
pub fn cr_upper_correlated(
    ptilde_sorted: &[f64],
    mean_len: f64,
    mean_completions: f64,
    m: usize,
    k: usize,
) -> Result<f64> {
    let n = ptilde_sorted.len();
    if ptilde_sorted.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Precondition("p̃ must be sorted descending".into()));
    }
    if k == 0 || k > n {
        return Err(Error::Precondition(format!(
            "k = {k} must lie in [1, n = {n}]"
        )));
    }
    if mean_completions.is_nan() || mean_completions <= 0.0 {
        return Err(Error::Precondition("E[Z(T)] must be positive".into()));
    }
    let cutoff = correlated_cutoff(m, k, mean_len);
    if cutoff + 1 > n {
        return Err(Error::UndefinedBound(format!(
            "m(k + E[L]) + 1 = {} exceeds n = {n}",
            cutoff + 1
        )));
    }
    let denominator = compensated_sum(ptilde_sorted[cutoff..].iter().copied());
    if denominator <= 0.0 {
        return Err(Error::UndefinedBound("no p̃ mass beyond the cutoff".into()));
    }
    let numerator = compensated_sum(ptilde_sorted[k - 1..].iter().copied());
    Ok((1.0 + m as f64 / mean_completions) * numerator / denominator)
}

/// Horizon penalty `1 + 1/⌊T/b⌋` for `T ≥ b`.
pub fn corollary_penalty(horizon: u64, group_size: u64) -> Result<f64> {
    if group_size == 0 || horizon < group_size {
        return Err(Error::Precondition(format!(
            "need T >= b >= 1, got T = {horizon}, b = {group_size}"
        )));
    }
    Ok(1.0 + 1.0 / (horizon / group_size) as f64)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ScalingRegime {
    Cmp,
    Lru,
}

impl FromStr for ScalingRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cmp" => Ok(ScalingRegime::Cmp),
            "lru" => Ok(ScalingRegime::Lru),
            other => Err(Error::Config(format!("unknown regime '{other}'"))),
        }
    }
}

impl fmt::Display for ScalingRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalingRegime::Cmp => "cmp",
            ScalingRegime::Lru => "lru",
        })
    }
}

/// Unnormalized asymptotic trend for `beta > 1`: `m^(β-1)` for CMP and
/// `m^(β-1) (ln k)^(2-2/β)` for LRU. Constants are unknown, so these are
/// overlay references, not bounds.
pub fn scaling_reference(m: usize, k: f64, beta: f64, regime: ScalingRegime) -> Result<f64> {
    if beta.is_nan() || beta <= 1.0 {
        return Err(Error::Regime(format!(
            "scaling forms need beta > 1, got {beta}"
        )));
    }
    let base = (m as f64).powf(beta - 1.0);
    Ok(match regime {
        ScalingRegime::Cmp => base,
        ScalingRegime::Lru => base * k.ln().powf(2.0 - 2.0 / beta),
    })
}

/// Asymptotic regime of the i.i.d. ratio for a Zipf exponent.
pub fn iid_regime(beta: f64) -> &'static str {
    if beta < 1.0 {
        "beta<1"
    } else if beta == 1.0 {
        "beta=1"
    } else {
        "beta>1"
    }
}

/// Analytic quantities for one parameter point. Rates are per slot.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub beta: f64,
    pub group_size: Option<usize>,
    pub gamma: Option<f64>,
    pub horizon: u64,
    pub cmp_rate_lower: f64,
    pub cmp_rate_upper: f64,
    pub opt_rate_lower: f64,
    /// `None` when the ratio is undefined (e.g. `mk ≥ n`).
    pub cr_upper: Option<f64>,
    /// `None` for i.i.d. points.
    pub penalty_factor: Option<f64>,
    /// `None` for `beta ≤ 1`.
    pub scaling_reference: Option<f64>,
    pub regime: &'static str,
}

impl BoundReport {
    pub const COLUMNS: [&'static str; 14] = [
        "n",
        "m",
        "k",
        "beta",
        "b",
        "gamma",
        "T",
        "cmp_rate_lower",
        "cmp_rate_upper",
        "opt_rate_lower",
        "cr_upper",
        "penalty_factor",
        "scaling_reference",
        "regime",
    ];

    /// Report for i.i.d. arrivals with popularity `pop` (Zipf exponent `beta`).
    pub fn iid(
        pop: &CatalogPopularity,
        beta: f64,
        m: usize,
        k: usize,
        horizon: u64,
    ) -> Result<Self> {
        let (lower, upper) = cmp_rate_bounds(pop, m, k)?;
        Ok(BoundReport {
            n: pop.n(),
            m,
            k,
            beta,
            group_size: None,
            gamma: None,
            horizon,
            cmp_rate_lower: lower,
            cmp_rate_upper: upper,
            opt_rate_lower: opt_rate_lower(pop, m, k),
            cr_upper: cr_upper_iid(pop, m, k).ok(),
            penalty_factor: None,
            scaling_reference: scaling_reference(m, k as f64, beta, ScalingRegime::Cmp).ok(),
            regime: iid_regime(beta),
        })
    }

    /// Report for correlated arrivals from `p̃` (descending), `E[L]` and `E[Z(T)]`.
    /// Rates are per subsequence here.
    #[allow(clippy::too_many_arguments)]
    pub fn correlated(
        ptilde_sorted: &[f64],
        mean_len: f64,
        mean_completions: f64,
        beta: f64,
        group_size: usize,
        gamma: f64,
        m: usize,
        k: usize,
        horizon: u64,
    ) -> Result<Self> {
        let pop = CatalogPopularity::from_weights(ptilde_sorted.to_vec())?;
        check_k(&pop, k)?;
        let cutoff = correlated_cutoff(m, k, mean_len);
        Ok(BoundReport {
            n: pop.n(),
            m,
            k,
            beta,
            group_size: Some(group_size),
            gamma: Some(gamma),
            horizon,
            cmp_rate_lower: pop.tail_sum(k + 1),
            cmp_rate_upper: pop.tail_sum(k),
            opt_rate_lower: pop.tail_sum(cutoff + 1),
            cr_upper: cr_upper_correlated(ptilde_sorted, mean_len, mean_completions, m, k).ok(),
            penalty_factor: Some(1.0 + m as f64 / mean_completions),
            scaling_reference: scaling_reference(m, k as f64, beta, ScalingRegime::Cmp).ok(),
            regime: iid_regime(beta),
        })
    }

    pub fn record(&self) -> Vec<String> {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|v| v.to_string()).unwrap_or_default()
        }
        vec![
            self.n.to_string(),
            self.m.to_string(),
            self.k.to_string(),
            self.beta.to_string(),
            opt(self.group_size),
            opt(self.gamma),
            self.horizon.to_string(),
            self.cmp_rate_lower.to_string(),
            self.cmp_rate_upper.to_string(),
            self.opt_rate_lower.to_string(),
            opt(self.cr_upper),
            opt(self.penalty_factor),
            opt(self.scaling_reference),
            self.regime.to_string(),
        ]
    }
}

/// CSV in [`BoundReport::COLUMNS`] order.
pub fn write_reports_csv<W: Write>(reports: &[BoundReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BoundReport::COLUMNS)?;
    for r in reports {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}
