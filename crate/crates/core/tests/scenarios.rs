#![allow(clippy::excessive_precision)]

mod common;

use mcp_sim::bounds::{
    cmp_rate_bounds, corollary_penalty, cr_upper_correlated, cr_upper_iid, opt_rate_lower,
};
use mcp_sim::engine::{run_simulation, SimulationOptions};
use mcp_sim::harness::{adversarial_counts, run_preset, ExperimentConfig};
use mcp_sim::model::{CacheBankState, ContentId};
use mcp_sim::offline::{
    adversarial_offline_schedule_for, brute_force_opt, opt_bound_faults, SearchBudget,
};
use mcp_sim::policies::CmpPolicy;
use mcp_sim::popularity::ContentSampler;
use mcp_sim::workloads::adversarial::{a, adversarial_initial_bank, b};
use mcp_sim::workloads::{
    estimate_ptilde, stream_rng, zipf_pmf, GroupedCorrelatedModel, IidWorkload,
};

// Reference partial sums for n = 10^4, m = 10, evaluated with 50-digit
// arithmetic: (beta, k, lower, upper, opt, ratio).
const REFERENCE: [(f64, usize, f64, f64, f64, f64); 6] = [
    (
        0.8,
        50,
        7.5958183854305490426,
        7.6119502347890066919,
        5.2437325617925267666,
        1.4516282333412755567,
    ),
    (
        0.8,
        100,
        6.9995414556533346707,
        7.0088067700638948088,
        4.2938241448701029034,
        1.6322994453411472368,
    ),
    (
        0.8,
        200,
        6.3126404413266101961,
        6.317961967037580573,
        3.2023535941104141609,
        1.9729120415238390272,
    ),
    (
        1.2,
        50,
        3.1037449598417607463,
        3.1228027365583915254,
        1.3543516107662491523,
        2.3057548067533281549,
    ),
    (
        1.2,
        100,
        2.4923417249539789933,
        2.5006371040818963353,
        0.96554509910203721365,
        2.5898708474699980122,
    ),
    (
        1.2,
        200,
        1.9577614601974492572,
        1.9613722336837309337,
        0.62692170488994099869,
        3.1285760540513729537,
    ),
];

fn close(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol * want.abs().max(1.0)
}

#[test]
fn partial_sums_match_extended_precision() {
    for (beta, k, lo, hi, opt, ratio) in REFERENCE {
        let pop = zipf_pmf(10_000, beta).unwrap().popularity();
        let (l, h) = cmp_rate_bounds(&pop, 10, k).unwrap();
        assert!(close(l, lo, 1e-12), "lower {beta} {k}: {l} vs {lo}");
        assert!(close(h, hi, 1e-12), "upper {beta} {k}: {h} vs {hi}");
        assert!(close(opt_rate_lower(&pop, 10, k), opt, 1e-12));
        assert!(close(opt_bound_faults(&pop, 10, k, 1), opt, 1e-12));
        assert!(close(cr_upper_iid(&pop, 10, k).unwrap(), ratio, 1e-12));
    }
}

#[test]
fn zipf_head_mass() {
    let z = zipf_pmf(10_000, 1.2).unwrap();
    let head = mcp_sim::popularity::compensated_sum(z.pmf()[..100].iter().copied());
    assert!((head - 0.75076582750460210067).abs() < 1e-10);
}

#[test]
fn uniform_coin_frequency() {
    let sampler = ContentSampler::new(zipf_pmf(2, 0.0).unwrap().pmf()).unwrap();
    let mut rng = stream_rng(11, 0);
    let draws = 1_000_000;
    let ones = (0..draws)
        .filter(|_| sampler.sample(&mut rng) == ContentId::new(1))
        .count();
    assert!((ones as f64 / draws as f64 - 0.5).abs() <= 0.002);
}

#[test]
fn harmonic_three_frequencies() {
    let sampler = ContentSampler::new(zipf_pmf(3, 1.0).unwrap().pmf()).unwrap();
    let mut rng = stream_rng(12, 0);
    let draws = 1_000_000usize;
    let mut counts = [0usize; 3];
    for _ in 0..draws {
        counts[sampler.sample(&mut rng).zero_based()] += 1;
    }
    for (count, p) in counts.iter().zip([6.0 / 11.0, 3.0 / 11.0, 2.0 / 11.0]) {
        let sd = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((*count as f64 / draws as f64 - p).abs() <= 3.0 * sd);
    }
}

#[test]
fn truncated_geometric_mean_length() {
    let model = GroupedCorrelatedModel::new(100, 10, 1.2, 0.5).unwrap();
    assert_eq!(model.expected_length(), 1.998046875);
    let mut rng = stream_rng(13, 0);
    let draws = 100_000;
    let total: usize = (0..draws).map(|_| model.draw_length(&mut rng)).sum();
    let mean = total as f64 / draws as f64;
    assert!((mean / 1.998046875 - 1.0).abs() <= 0.01, "{mean}");
}

#[test]
fn ptilde_estimate_sums_to_mean_length() {
    let model = GroupedCorrelatedModel::new(100, 10, 1.2, 0.5).unwrap();
    let est = estimate_ptilde(&model, 1_000_000, &mut stream_rng(14, 0)).unwrap();
    let total: f64 = est.per_content.iter().sum();
    assert!((total / est.mean_len - 1.0).abs() <= 1e-3);
    for (e, x) in est.per_content.iter().zip(model.exact_ptilde()) {
        assert!((e - x).abs() < 0.01);
    }
}

#[test]
fn table1_cells() {
    let replay = common::replay_table1(3);
    assert!(replay.faults.iter().all(|&f| f == 1));
    let cells: Vec<_> = replay.rows.concat();
    assert_eq!(cells, common::table1_expected());
    let frozen: Vec<ContentId> = vec![a(1), a(2), a(3), b(2)];
    for bank in &replay.banks[1..] {
        let mut c1: Vec<ContentId> = bank.cache(0).contents().collect();
        c1.sort();
        assert_eq!(c1, frozen);
    }
}

#[test]
fn adversarial_seventeen_cycles() {
    // 1 prefix batch + 102 cycle batches.
    let (online, offline) = adversarial_counts(17).unwrap();
    assert_eq!(online.len(), 103);
    assert_eq!(*online.last().unwrap(), 104);
    assert_eq!(*offline.last().unwrap(), 2);
    let (batches, schedule) = adversarial_offline_schedule_for(17);
    assert_eq!(
        schedule
            .replay(&adversarial_initial_bank(), &batches)
            .unwrap(),
        2
    );
}

#[test]
fn correlated_bound_with_unit_groups() {
    // b = 1: E[L] = 1, p̃ = p and Z(T) = m T, so the bound is the i.i.d.
    // numerator over a denominator shifted by m, times the horizon penalty.
    let (n, m, k, slots) = (2_000, 3, 20, 500u64);
    let model = GroupedCorrelatedModel::new(n, 1, 0.9, 0.4).unwrap();
    assert_eq!(model.expected_length(), 1.0);
    let p = zipf_pmf(n, 0.9).unwrap();
    assert_eq!(model.exact_ptilde(), p.pmf());
    let completions = (m as u64 * slots) as f64;
    let got = cr_upper_correlated(p.pmf(), 1.0, completions, m, k).unwrap();
    let pop = p.popularity();
    let want =
        corollary_penalty(slots, 1).unwrap() * pop.tail_sum(k) / pop.tail_sum(m * (k + 1) + 1);
    assert!((got - want).abs() <= 1e-12 * want);
}

#[test]
fn ratio_approaches_one_for_light_tails() {
    let (m, k) = (2, 10);
    let ratios: Vec<f64> = [10usize, 100, 1000]
        .iter()
        .map(|&f| cr_upper_iid(&zipf_pmf(f * m * k, 0.8).unwrap().popularity(), m, k).unwrap())
        .collect();
    assert!(ratios.windows(2).all(|w| w[0] > w[1]));
    assert!(ratios[2] < 1.05, "{ratios:?}");
}

#[test]
fn cmp_rate_for_one_seed_sits_in_band() {
    let (n, m, k) = (10_000, 10, 100);
    let pop = zipf_pmf(n, 0.8).unwrap().popularity();
    let policy = CmpPolicy::new(pop.clone(), m, k).unwrap();
    let workload = IidWorkload::new(&pop, m).unwrap();
    let run = run_simulation(
        &policy,
        &workload,
        &SimulationOptions::new(10_000, 7).warmup(k),
    )
    .unwrap();
    let (lo, hi) = cmp_rate_bounds(&pop, m, k).unwrap();
    // Per-slot fault counts have sd below sqrt(m); allow 4 standard errors.
    let slack = 4.0 * (m as f64).sqrt() / (10_000f64 - k as f64).sqrt();
    let rate = run.ledger.rate_after_warmup();
    assert!(
        rate >= lo - slack && rate <= hi + slack,
        "{rate} vs [{lo}, {hi}]"
    );
}

#[test]
fn exhaustive_opt_stays_above_the_expected_bound() {
    let (n, m, k, slots) = (6, 2, 2, 6u64);
    let pop = zipf_pmf(n, 0.7).unwrap().popularity();
    let workload = IidWorkload::new(&pop, m).unwrap();
    let policy = CmpPolicy::new(pop.clone(), m, k).unwrap();
    let initial = CacheBankState::empty(m, k);
    let mut faults = Vec::new();
    for seed in 0..500 {
        let run = mcp_sim::engine::run_simulation_keeping_batches(
            &policy,
            &workload,
            &SimulationOptions::new(slots, seed),
        )
        .unwrap();
        let opt =
            brute_force_opt(&run.batches, m, k, n, &initial, &SearchBudget::default()).unwrap();
        faults.push(opt.total_faults as f64);
    }
    let (mean, se) = common::mean_and_stderr(&faults);
    let bound = opt_bound_faults(&pop, m, k, slots);
    assert!(mean >= bound - 3.0 * se, "{mean} ± {se} vs {bound}");
}

#[test]
fn fig3_row_exceeds_one() {
    let cfg =
        ExperimentConfig::parse("n = 10000\nk = 100\nbeta = 0.8\nseeds = 1..=2\nslots = 2000")
            .unwrap();
    let table = run_preset("fig3", &cfg).unwrap();
    let mean = table.means().next().unwrap();
    assert!(mean.ratio > 1.0);
}
