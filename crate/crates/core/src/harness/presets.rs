//! Preset experiment grids and their CSV / plot-data output.
//!
//! Every row carries the grid parameters, then `seed,faults,opt_bound,ratio`.
//! Each grid point is followed by a `mean` row and a `stderr` row. The
//! denominator is always the expected-fault lower bound for OPT, so ratios
//! over-estimate the true competitive ratio.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::engine::{run_simulation, Policy, SimulationOptions};
use crate::error::{Error, Result};
use crate::offline::{adversarial_offline_schedule, opt_bound_faults};
use crate::policies::{CmpPolicy, LruPolicy, PolicyKind, RulesCompliantPolicy};
use crate::popularity::CatalogPopularity;
use crate::workloads::{adversarial_initial_bank, zipf_pmf, AdversarialWorkload, IidWorkload};

pub const DEFAULT_SEEDS: std::ops::RangeInclusive<u64> = 1..=20;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PresetKind {
    Fig3,
    Fig4,
    Fig5,
    Adversarial,
}

impl FromStr for PresetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig3" => Ok(PresetKind::Fig3),
            "fig4" => Ok(PresetKind::Fig4),
            "fig5" => Ok(PresetKind::Fig5),
            "adversarial" => Ok(PresetKind::Adversarial),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }
}

impl fmt::Display for PresetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PresetKind::Fig3 => "fig3",
            PresetKind::Fig4 => "fig4",
            PresetKind::Fig5 => "fig5",
            PresetKind::Adversarial => "adversarial",
        })
    }
}

/// One parameter combination of an i.i.d. Zipf preset.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPoint {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub beta: f64,
    pub policy: PolicyKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedCell {
    Seed(u64),
    Mean,
    Stderr,
}

impl fmt::Display for SeedCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeedCell::Seed(s) => write!(f, "{s}"),
            SeedCell::Mean => f.write_str("mean"),
            SeedCell::Stderr => f.write_str("stderr"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PresetRow {
    pub params: Vec<String>,
    pub seed: SeedCell,
    pub faults: f64,
    pub opt_bound: f64,
    pub ratio: f64,
}

impl PresetRow {
    pub fn param(&self, table: &PresetTable, name: &str) -> Option<&str> {
        let at = table.param_names.iter().position(|p| p == name)?;
        self.params.get(at).map(String::as_str)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PresetTable {
    pub kind: PresetKind,
    pub param_names: Vec<String>,
    pub rows: Vec<PresetRow>,
}

impl PresetTable {
    pub fn header(&self) -> Vec<String> {
        let mut h = self.param_names.clone();
        h.extend(["seed", "faults", "opt_bound", "ratio"].map(String::from));
        h
    }

    pub fn means(&self) -> impl Iterator<Item = &PresetRow> {
        self.rows.iter().filter(|r| r.seed == SeedCell::Mean)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for row in &self.rows {
            let mut record = row.params.clone();
            record.push(row.seed.to_string());
            record.push(row.faults.to_string());
            record.push(row.opt_bound.to_string());
            record.push(row.ratio.to_string());
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// `x,y,series` rows built from the mean rows (every row for the
    /// adversarial preset).
    pub fn plot_rows(&self) -> Vec<(String, f64, String)> {
        let mut out = Vec::new();
        if self.kind == PresetKind::Adversarial {
            for row in &self.rows {
                let x = row.param(self, "batch").unwrap_or_default().to_string();
                out.push((x.clone(), row.faults, "online".to_string()));
                out.push((x, row.opt_bound, "offline".to_string()));
            }
            return out;
        }
        let x_name = match self.kind {
            PresetKind::Fig3 => "n",
            PresetKind::Fig4 => "m",
            _ => "beta",
        };
        let hidden = [x_name, "slots", "warmup"];
        for row in self.means() {
            let series = self
                .param_names
                .iter()
                .zip(&row.params)
                .filter(|(name, _)| !hidden.contains(&name.as_str()))
                .map(|(name, value)| format!("{name}={value}"))
                .collect::<Vec<_>>()
                .join(";");
            let x = row.param(self, x_name).unwrap_or_default().to_string();
            let y = if self.kind == PresetKind::Fig5 {
                fault_fraction(self, row)
            } else {
                row.ratio
            };
            out.push((x, y, series));
        }
        out
    }

    pub fn write_plot<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "series"])?;
        for (x, y, series) in self.plot_rows() {
            w.write_record([x, y.to_string(), series])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Faults per request over the counted (post-warm-up) slots.
pub fn fault_fraction(table: &PresetTable, row: &PresetRow) -> f64 {
    let get = |name| -> f64 {
        row.param(table, name)
            .and_then(|v| v.parse().ok())
            .unwrap_or(f64::NAN)
    };
    row.faults / ((get("slots") - get("warmup")) * get("m"))
}

fn restrict<T: Clone>(cfg: &ExperimentConfig, key: &str, value: T, default: &[T]) -> Vec<T> {
    if cfg.is_explicit(key) {
        vec![value]
    } else {
        default.to_vec()
    }
}

/// Concrete grid of an i.i.d. preset. Keys set explicitly in `cfg` pin the
/// corresponding axis to that value.
pub fn preset_grid(kind: PresetKind, cfg: &ExperimentConfig) -> Vec<GridPoint> {
    type Axes = (
        Vec<usize>,
        Vec<usize>,
        Vec<usize>,
        Vec<f64>,
        Vec<PolicyKind>,
    );
    let (ns, ms, ks, betas, policies): Axes = match kind {
        PresetKind::Fig3 => (
            vec![2_000, 5_000, 10_000, 20_000],
            vec![10],
            vec![50, 100],
            vec![0.6, 0.8, 1.0, 1.2],
            vec![PolicyKind::Cmp],
        ),
        PresetKind::Fig4 => (
            vec![10_000],
            vec![1, 2, 5, 10, 20, 50],
            vec![100],
            vec![0.8, 1.2],
            vec![PolicyKind::Cmp],
        ),
        PresetKind::Fig5 => (
            vec![5_000, 10_000],
            vec![10],
            vec![50, 100, 200],
            vec![1.0, 1.2, 1.4],
            vec![PolicyKind::Lru, PolicyKind::Cmp],
        ),
        PresetKind::Adversarial => return Vec::new(),
    };
    let ns = restrict(cfg, "n", cfg.workload.n, &ns);
    let ms = restrict(cfg, "m", cfg.m, &ms);
    let ks = restrict(cfg, "k", cfg.k, &ks);
    let betas = restrict(cfg, "beta", cfg.workload.beta, &betas);
    let policies = restrict(cfg, "policy", cfg.policy, &policies);

    let mut grid = Vec::new();
    for &n in &ns {
        for &m in &ms {
            for &k in &ks {
                for &beta in &betas {
                    for &policy in &policies {
                        grid.push(GridPoint {
                            n,
                            m,
                            k,
                            beta,
                            policy,
                        });
                    }
                }
            }
        }
    }
    grid
}

/// Faults after warm-up and the matching OPT lower bound for one seed.
pub fn run_grid_point(
    point: &GridPoint,
    pop: &CatalogPopularity,
    slots: u64,
    warmup: usize,
    seed: u64,
) -> Result<(u64, f64)> {
    let policy: Box<dyn Policy> = match point.policy {
        PolicyKind::Cmp => Box::new(CmpPolicy::new(pop.clone(), point.m, point.k)?),
        PolicyKind::Lru => Box::new(LruPolicy::new(point.m, point.k)?),
        PolicyKind::RulesCompliant => Box::new(RulesCompliantPolicy::new(point.m, point.k)?),
    };
    let workload = IidWorkload::new(pop, point.m)?;
    let run = run_simulation(
        policy.as_ref(),
        &workload,
        &SimulationOptions::new(slots, seed).warmup(warmup),
    )?;
    let faults: u64 = run.ledger.per_slot()[warmup..]
        .iter()
        .map(|&f| u64::from(f))
        .sum();
    let bound = opt_bound_faults(pop, point.m, point.k, slots - warmup as u64);
    Ok((faults, bound))
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
    (mean, (var / count).sqrt())
}

/// Runs a named preset with overrides from `cfg`.
pub fn run_preset(name: &str, cfg: &ExperimentConfig) -> Result<PresetTable> {
    let kind: PresetKind = name.parse()?;
    if kind == PresetKind::Adversarial {
        return adversarial_preset(cfg);
    }
    let seeds: Vec<u64> = if cfg.is_explicit("seeds") {
        cfg.seeds.clone()
    } else {
        DEFAULT_SEEDS.collect()
    };
    let grid = preset_grid(kind, cfg);
    let slots = cfg.slots;
    let warmups: Vec<usize> = grid.iter().map(|p| cfg.warmup.unwrap_or(p.k)).collect();
    if let Some(&w) = warmups.iter().find(|&&w| w as u64 >= slots) {
        return Err(Error::Config(format!(
            "warmup {w} must be below slots {slots}"
        )));
    }
    let pops = grid
        .iter()
        .map(|p| Ok(zipf_pmf(p.n, p.beta)?.popularity()))
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, u64)> = (0..grid.len())
        .flat_map(|g| seeds.iter().map(move |&s| (g, s)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(g, seed)| run_grid_point(&grid[g], &pops[g], slots, warmups[g], seed))
        .collect::<Result<Vec<_>>>()?;

    let param_names = ["n", "m", "k", "beta", "policy", "slots", "warmup"]
        .map(String::from)
        .to_vec();
    let mut rows = Vec::with_capacity(grid.len() * (seeds.len() + 2));
    for (g, point) in grid.iter().enumerate() {
        let params = vec![
            point.n.to_string(),
            point.m.to_string(),
            point.k.to_string(),
            point.beta.to_string(),
            point.policy.to_string(),
            slots.to_string(),
            warmups[g].to_string(),
        ];
        let chunk = &results[g * seeds.len()..(g + 1) * seeds.len()];
        let mut faults = Vec::with_capacity(seeds.len());
        let mut ratios = Vec::with_capacity(seeds.len());
        let bound = chunk[0].1;
        for (&seed, &(f, b)) in seeds.iter().zip(chunk) {
            let ratio = f as f64 / b;
            faults.push(f as f64);
            ratios.push(ratio);
            rows.push(PresetRow {
                params: params.clone(),
                seed: SeedCell::Seed(seed),
                faults: f as f64,
                opt_bound: b,
                ratio,
            });
        }
        let (fault_mean, fault_se) = mean_and_stderr(&faults);
        let (ratio_mean, ratio_se) = mean_and_stderr(&ratios);
        rows.push(PresetRow {
            params: params.clone(),
            seed: SeedCell::Mean,
            faults: fault_mean,
            opt_bound: bound,
            ratio: ratio_mean,
        });
        rows.push(PresetRow {
            params,
            seed: SeedCell::Stderr,
            faults: fault_se,
            opt_bound: 0.0,
            ratio: ratio_se,
        });
    }
    Ok(PresetTable {
        kind,
        param_names,
        rows,
    })
}

/// Cumulative online (rules-compliant) and offline faults after each batch
/// of the adversarial stream.
pub fn adversarial_counts(cycles: usize) -> Result<(Vec<u64>, Vec<u64>)> {
    let workload = AdversarialWorkload { cycles };
    let policy = RulesCompliantPolicy::new(2, 4)?;
    let batches = crate::workloads::adversarial_stream(cycles);
    let opts = SimulationOptions::new(batches.len() as u64, 0).initial(adversarial_initial_bank());
    let run = run_simulation(&policy, &workload, &opts)?;
    let online = run
        .ledger
        .per_slot()
        .iter()
        .scan(0u64, |acc, &f| {
            *acc += u64::from(f);
            Some(*acc)
        })
        .collect();

    let schedule = adversarial_offline_schedule(&batches)?;
    let mut bank = adversarial_initial_bank();
    let mut total = 0u64;
    let mut offline = Vec::with_capacity(batches.len());
    for (batch, decision) in batches.iter().zip(&schedule.decisions) {
        total += u64::from(crate::engine::apply_service(&mut bank, batch, decision)?.faults);
        offline.push(total);
    }
    Ok((online, offline))
}

fn adversarial_preset(cfg: &ExperimentConfig) -> Result<PresetTable> {
    let cycles = cfg.workload.cycles;
    let seed = cfg.seeds.first().copied().unwrap_or(1);
    let (online, offline) = adversarial_counts(cycles)?;
    let rows = online
        .iter()
        .zip(&offline)
        .enumerate()
        .map(|(t, (&on, &off))| PresetRow {
            params: vec![cycles.to_string(), (t + 1).to_string()],
            seed: SeedCell::Seed(seed),
            faults: on as f64,
            opt_bound: off as f64,
            ratio: on as f64 / off as f64,
        })
        .collect();
    Ok(PresetTable {
        kind: PresetKind::Adversarial,
        param_names: vec!["cycles".into(), "batch".into()],
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(extra: &str) -> ExperimentConfig {
        ExperimentConfig::parse(&format!("slots = 300\nseeds = 1..=3\n{extra}")).unwrap()
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(
            run_preset("fig9", &small("")),
            Err(Error::UnknownPreset(_))
        ));
    }

    #[test]
    fn grids_have_the_documented_shape() {
        let cfg = ExperimentConfig::default();
        assert_eq!(preset_grid(PresetKind::Fig3, &cfg).len(), 32);
        assert_eq!(preset_grid(PresetKind::Fig4, &cfg).len(), 12);
        assert_eq!(preset_grid(PresetKind::Fig5, &cfg).len(), 36);
        let pinned = small("n = 2000\nk = 50");
        let g = preset_grid(PresetKind::Fig3, &pinned);
        assert_eq!(g.len(), 4);
        assert!(g.iter().all(|p| p.n == 2000 && p.k == 50 && p.m == 10));
    }

    #[test]
    fn rows_are_seeds_then_mean_then_stderr() {
        let t = run_preset("fig4", &small("n = 500\nk = 5\nbeta = 0.8\nm = 2")).unwrap();
        assert_eq!(
            t.header(),
            [
                "n",
                "m",
                "k",
                "beta",
                "policy",
                "slots",
                "warmup",
                "seed",
                "faults",
                "opt_bound",
                "ratio"
            ]
        );
        let seeds: Vec<String> = t.rows.iter().map(|r| r.seed.to_string()).collect();
        assert_eq!(seeds, ["1", "2", "3", "mean", "stderr"]);
        let mean = &t.rows[3];
        let avg = t.rows[..3].iter().map(|r| r.ratio).sum::<f64>() / 3.0;
        assert!((mean.ratio - avg).abs() < 1e-12);
        assert!(mean.ratio > 1.0);
    }

    #[test]
    fn csv_is_reproducible() {
        let cfg = small("n = 300\nk = 4\nbeta = 1.2");
        let render = || {
            let mut buf = Vec::new();
            run_preset("fig5", &cfg)
                .unwrap()
                .write_csv(&mut buf)
                .unwrap();
            buf
        };
        assert_eq!(render(), render());
    }

    #[test]
    fn adversarial_rows() {
        let t = run_preset("adversarial", &small("cycles = 2")).unwrap();
        assert_eq!(t.rows.len(), 13);
        let last = t.rows.last().unwrap();
        assert_eq!((last.faults, last.opt_bound), (14.0, 2.0));
        assert_eq!(t.plot_rows().len(), 26);
    }

    #[test]
    fn plot_rows_use_means() {
        let t = run_preset("fig3", &small("k = 5\nbeta = 0.8\nm = 2")).unwrap();
        let plot = t.plot_rows();
        assert_eq!(plot.len(), 4);
        assert_eq!(plot[0].0, "2000");
        assert_eq!(plot[0].2, "m=2;k=5;beta=0.8;policy=cmp");
    }
}
