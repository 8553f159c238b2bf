//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 exhaustive-search
//! budget refusal, 1 anything else.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, WorkloadFamily};
use super::presets::{adversarial_counts, run_preset};
use crate::bounds::{write_reports_csv, BoundReport};
use crate::engine::{run_simulation_keeping_batches, Policy, SimulationOptions, Workload};
use crate::error::{Error, Result};
use crate::offline::{adversarial_offline_schedule, brute_force_opt, SearchBudget};
use crate::policies::{CmpPolicy, LruPolicy, PolicyKind, RulesCompliantPolicy};
use crate::workloads::adversarial::write_stream_csv;
use crate::workloads::{
    adversarial_initial_bank, adversarial_stream, estimate_completions, estimate_ptilde, zipf_pmf,
    AdversarialWorkload, CorrelatedWorkload, GroupedCorrelatedModel, IidWorkload,
};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Plot,
}

#[derive(Parser, Debug)]
#[command(
    name = "mcp-sim",
    version,
    about = "Multiple cache paging simulator and bounds"
)]
struct Cli {
    /// Flat key = value config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the CSV artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct ModelArgs {
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    /// Group size of the correlated model.
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    slots: Option<String>,
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    warmup: Option<String>,
}

impl ModelArgs {
    fn pairs(&self) -> Vec<(&'static str, &String)> {
        [
            ("n", &self.n),
            ("m", &self.m),
            ("k", &self.k),
            ("beta", &self.beta),
            ("b", &self.b),
            ("gamma", &self.gamma),
            ("slots", &self.slots),
            ("seeds", &self.seeds),
            ("warmup", &self.warmup),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k, v)))
        .collect()
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one policy on one workload for each seed.
    Simulate {
        #[arg(long)]
        policy: Option<String>,
        #[arg(long)]
        workload: Option<String>,
        #[command(flatten)]
        model: ModelArgs,
        /// Also solve the instance exactly (tiny instances only).
        #[arg(long)]
        with_opt: bool,
        /// Per-request event trace of the first seed.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Analytic bounds; n, m, k and beta accept comma-separated grids.
    Bounds {
        #[arg(long)]
        workload: Option<String>,
        #[command(flatten)]
        model: ModelArgs,
        /// Monte-Carlo subsequence samples for correlated bounds.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    /// Rules-compliant policy versus the offline schedule on the adversarial stream.
    Adversarial {
        #[arg(long)]
        cycles: Option<String>,
        /// Offline schedule CSV.
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
    /// Run a named experiment grid: fig3, fig4, fig5 or adversarial.
    Preset {
        name: String,
        #[arg(long)]
        policy: Option<String>,
        #[arg(long)]
        cycles: Option<String>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Monte-Carlo table of expected appearances per subsequence.
    Ptilde {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
}

/// Maps an error to its exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::UnknownPreset(_) => 2,
        Error::BudgetExceeded(_) => 3,
        _ => 1,
    }
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code. Results go to `stdout`; diagnostics to
/// stderr.
pub fn cli_main<I, T>(argv: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn base_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path).map_err(|e| match e {
            Error::Io(io) => Error::Config(format!("{}: {io}", path.display())),
            other => other,
        })?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set("seed", &seed.to_string())?;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

fn apply(cfg: &mut ExperimentConfig, pairs: &[(&str, &String)]) -> Result<()> {
    for (key, value) in pairs {
        cfg.set(key, value)?;
    }
    cfg.validate()
}

fn open_out(path: &PathBuf) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn build_policy(cfg: &ExperimentConfig) -> Result<Box<dyn Policy>> {
    let (m, k) = (cfg.m, cfg.k);
    Ok(match cfg.policy {
        PolicyKind::Cmp => {
            let w = &cfg.workload;
            let pop = match w.family {
                WorkloadFamily::Zipf => zipf_pmf(w.n, w.beta)?.popularity(),
                WorkloadFamily::Correlated => {
                    let model = GroupedCorrelatedModel::new(w.n, w.group_size, w.beta, w.gamma)?;
                    crate::popularity::CatalogPopularity::from_weights(model.exact_ptilde())?
                }
                WorkloadFamily::Adversarial => zipf_pmf(w.n, 0.0)?.popularity(),
            };
            Box::new(CmpPolicy::new(pop, m, k)?)
        }
        PolicyKind::Lru => Box::new(LruPolicy::new(m, k)?),
        PolicyKind::RulesCompliant => Box::new(RulesCompliantPolicy::new(m, k)?),
    })
}

fn build_workload(cfg: &ExperimentConfig) -> Result<Box<dyn Workload>> {
    let w = &cfg.workload;
    Ok(match w.family {
        WorkloadFamily::Zipf => Box::new(IidWorkload::zipf(w.n, w.beta, cfg.m)?),
        WorkloadFamily::Correlated => Box::new(CorrelatedWorkload::new(
            GroupedCorrelatedModel::new(w.n, w.group_size, w.beta, w.gamma)?,
            cfg.m,
        )?),
        WorkloadFamily::Adversarial => Box::new(AdversarialWorkload { cycles: w.cycles }),
    })
}

fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    let mut cfg = base_config(&cli)?;
    match &cli.command {
        Command::Simulate {
            policy,
            workload,
            model,
            with_opt,
            trace,
        } => {
            let mut pairs = model.pairs();
            if let Some(p) = policy {
                pairs.push(("policy", p));
            }
            if let Some(w) = workload {
                pairs.push(("workload", w));
            }
            apply(&mut cfg, &pairs)?;
            simulate(&cfg, *with_opt, trace.as_ref(), stdout)
        }
        Command::Bounds {
            workload,
            model,
            samples,
        } => {
            if let Some(w) = workload {
                cfg.set("workload", w)?;
            }
            bounds(&cfg, model, *samples, cli.format, stdout)
        }
        Command::Adversarial { cycles, schedule } => {
            if let Some(c) = cycles {
                cfg.set("cycles", c)?;
            }
            adversarial(&cfg, schedule.as_ref(), stdout)
        }
        Command::Preset {
            name,
            policy,
            cycles,
            model,
        } => {
            let mut pairs = model.pairs();
            if let Some(p) = policy {
                pairs.push(("policy", p));
            }
            if let Some(c) = cycles {
                pairs.push(("cycles", c));
            }
            apply(&mut cfg, &pairs)?;
            let table = run_preset(name, &cfg)?;
            let format = cli.format.unwrap_or(OutputFormat::Csv);
            match &cfg.out {
                Some(path) => {
                    let file = open_out(path)?;
                    match format {
                        OutputFormat::Csv => table.write_csv(file)?,
                        OutputFormat::Plot => table.write_plot(file)?,
                    }
                    writeln!(
                        stdout,
                        "wrote {} rows to {}",
                        table.rows.len(),
                        path.display()
                    )?;
                }
                None => match format {
                    OutputFormat::Csv => table.write_csv(&mut *stdout)?,
                    OutputFormat::Plot => table.write_plot(&mut *stdout)?,
                },
            }
            Ok(())
        }
        Command::Ptilde { model, samples } => {
            apply(&mut cfg, &model.pairs())?;
            ptilde(&cfg, *samples, stdout)
        }
    }
}

fn simulate(
    cfg: &ExperimentConfig,
    with_opt: bool,
    trace: Option<&PathBuf>,
    stdout: &mut dyn Write,
) -> Result<()> {
    let policy = build_policy(cfg)?;
    let workload = build_workload(cfg)?;
    let adversarial = cfg.workload.family == WorkloadFamily::Adversarial;
    let mut summaries = Vec::new();
    for (i, &seed) in cfg.seeds.iter().enumerate() {
        let mut opts = SimulationOptions::new(cfg.slots, seed).warmup(cfg.warmup_or_zero());
        if adversarial {
            opts = opts.initial(adversarial_initial_bank());
        }
        if trace.is_some() && i == 0 {
            opts = opts.traced();
        }
        let run = run_simulation_keeping_batches(policy.as_ref(), workload.as_ref(), &opts)?;
        if let (Some(path), 0) = (trace, i) {
            run.trace.write_csv(open_out(path)?)?;
        }
        let faults = run.ledger.total();
        write!(
            stdout,
            "seed = {seed}, faults = {faults}, rate_after_warmup = {:?}",
            run.ledger.rate_after_warmup()
        )?;
        let mut opt = None;
        if with_opt {
            let initial = opts
                .initial
                .clone()
                .unwrap_or_else(|| policy.initial_bank());
            let schedule = brute_force_opt(
                &run.batches,
                cfg.m,
                cfg.k,
                workload.catalog_size(),
                &initial,
                &SearchBudget::default(),
            )?;
            write!(stdout, ", opt = {}", schedule.total_faults)?;
            opt = Some(schedule.total_faults);
        }
        writeln!(stdout)?;
        summaries.push((
            seed,
            run.ledger.slots(),
            faults,
            run.ledger.rate_after_warmup(),
            opt,
        ));
    }
    if let Some(path) = &cfg.out {
        let mut w = csv::Writer::from_writer(open_out(path)?);
        w.write_record([
            "policy",
            "workload",
            "n",
            "m",
            "k",
            "seed",
            "slots",
            "faults",
            "rate_after_warmup",
            "opt",
        ])?;
        for (seed, slots, faults, rate, opt) in summaries {
            w.write_record([
                cfg.policy.to_string(),
                cfg.workload.family.to_string(),
                workload.catalog_size().to_string(),
                cfg.m.to_string(),
                cfg.k.to_string(),
                seed.to_string(),
                slots.to_string(),
                faults.to_string(),
                rate.to_string(),
                opt.map(|o| o.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
    }
    Ok(())
}

fn grid<T: std::str::FromStr>(key: &str, given: &Option<String>, fallback: T) -> Result<Vec<T>> {
    match given {
        None => Ok(vec![fallback]),
        Some(list) => list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("{key}: cannot parse '{s}'")))
            })
            .collect(),
    }
}

fn bounds(
    cfg: &ExperimentConfig,
    model: &ModelArgs,
    samples: u64,
    format: Option<OutputFormat>,
    stdout: &mut dyn Write,
) -> Result<()> {
    let mut cfg = cfg.clone();
    let scalar = [
        ("b", &model.b),
        ("gamma", &model.gamma),
        ("slots", &model.slots),
        ("seeds", &model.seeds),
    ];
    for (key, value) in scalar {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    let ns = grid("n", &model.n, cfg.workload.n)?;
    let ms = grid("m", &model.m, cfg.m)?;
    let ks = grid("k", &model.k, cfg.k)?;
    let betas = grid("beta", &model.beta, cfg.workload.beta)?;
    let seed = cfg.seeds[0];

    let mut reports = Vec::new();
    for &n in &ns {
        for &beta in &betas {
            let correlated = match cfg.workload.family {
                WorkloadFamily::Correlated => {
                    let w = &cfg.workload;
                    let model = GroupedCorrelatedModel::new(n, w.group_size, beta, w.gamma)?;
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let est = estimate_ptilde(&model, samples, &mut rng)?;
                    Some((model, est))
                }
                _ => None,
            };
            let pop = zipf_pmf(n, beta)?.popularity();
            for &m in &ms {
                for &k in &ks {
                    let report = match &correlated {
                        None => BoundReport::iid(&pop, beta, m, k, cfg.slots)?,
                        Some((model, est)) => {
                            let mut rng = ChaCha8Rng::seed_from_u64(seed);
                            let completions =
                                estimate_completions(model, m, cfg.slots, 200, &mut rng)?;
                            BoundReport::correlated(
                                &est.sorted_desc(),
                                est.mean_len,
                                completions,
                                beta,
                                cfg.workload.group_size,
                                cfg.workload.gamma,
                                m,
                                k,
                                cfg.slots,
                            )?
                        }
                    };
                    reports.push(report);
                }
            }
        }
    }

    match (&cfg.out, format) {
        (Some(path), _) => {
            write_reports_csv(&reports, open_out(path)?)?;
            print_reports(&reports, stdout)?;
        }
        (None, Some(_)) => write_reports_csv(&reports, &mut *stdout)?,
        (None, None) => print_reports(&reports, stdout)?,
    }
    Ok(())
}

fn print_reports(reports: &[BoundReport], stdout: &mut dyn Write) -> Result<()> {
    for r in reports {
        writeln!(
            stdout,
            "n = {}, m = {}, k = {}, beta = {:?}",
            r.n, r.m, r.k, r.beta
        )?;
        writeln!(stdout, "cmp_rate_lower = {:?}", r.cmp_rate_lower)?;
        writeln!(stdout, "cmp_rate_upper = {:?}", r.cmp_rate_upper)?;
        writeln!(stdout, "opt_rate_lower = {:?}", r.opt_rate_lower)?;
        match r.cr_upper {
            Some(v) => writeln!(stdout, "cr_upper = {v:?}")?,
            None => writeln!(stdout, "cr_upper = undefined")?,
        }
        if let Some(p) = r.penalty_factor {
            writeln!(stdout, "penalty_factor = {p:?}")?;
        }
        writeln!(stdout, "regime = {}", r.regime)?;
    }
    Ok(())
}

fn adversarial(
    cfg: &ExperimentConfig,
    schedule: Option<&PathBuf>,
    stdout: &mut dyn Write,
) -> Result<()> {
    let cycles = cfg.workload.cycles;
    let batches = adversarial_stream(cycles);
    let (online, offline) = adversarial_counts(cycles)?;
    let on = *online.last().expect("stream is never empty");
    let off = *offline.last().expect("stream is never empty");
    if let Some(path) = &cfg.out {
        write_stream_csv(&batches, open_out(path)?)?;
    }
    if let Some(path) = schedule {
        adversarial_offline_schedule(&batches)?.write_csv(&batches, open_out(path)?)?;
    }
    writeln!(
        stdout,
        "batches = {}, online_faults = {on}, offline_faults = {off}, ratio = {:?}",
        batches.len(),
        on as f64 / off as f64
    )?;
    Ok(())
}

fn ptilde(cfg: &ExperimentConfig, samples: u64, stdout: &mut dyn Write) -> Result<()> {
    let w = &cfg.workload;
    let model = GroupedCorrelatedModel::new(w.n, w.group_size, w.beta, w.gamma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seeds[0]);
    let est = estimate_ptilde(&model, samples, &mut rng)?;
    let exact = model.exact_ptilde();
    let write_table = |out: &mut dyn Write| -> Result<()> {
        let mut csv = csv::Writer::from_writer(out);
        csv.write_record(["content", "ptilde", "exact"])?;
        for (i, (e, x)) in est.per_content.iter().zip(&exact).enumerate() {
            csv.write_record([(i + 1).to_string(), e.to_string(), x.to_string()])?;
        }
        csv.flush()?;
        Ok(())
    };
    match &cfg.out {
        Some(path) => {
            write_table(&mut open_out(path)?)?;
            writeln!(
                stdout,
                "samples = {samples}, mean_len = {:?}, expected_len = {:?}",
                est.mean_len,
                model.expected_length()
            )?;
        }
        None => write_table(stdout)?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String) {
        let mut out = Vec::new();
        let code = cli_main(
            std::iter::once("mcp-sim").chain(args.iter().copied()),
            &mut out,
        );
        (code, String::from_utf8(out).unwrap())
    }

    #[test]
    fn bounds_example() {
        let (code, out) = run_args(&["bounds", "--n", "4", "--m", "2", "--k", "1", "--beta", "0"]);
        assert_eq!(code, 0);
        assert!(out.contains("cr_upper = 2.0"), "{out}");
    }

    #[test]
    fn simulate_full_catalog_never_faults() {
        let (code, out) = run_args(&[
            "simulate",
            "--policy",
            "cmp",
            "--workload",
            "zipf",
            "--n",
            "4",
            "--beta",
            "0",
            "--m",
            "1",
            "--k",
            "4",
            "--slots",
            "100",
        ]);
        assert_eq!(code, 0);
        assert!(out.contains("faults = 0,"), "{out}");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_args(&["preset", "fig9"]).0, 2);
        assert_eq!(run_args(&["simulate", "--k", "0"]).0, 2);
        assert_eq!(run_args(&["frobnicate"]).0, 2);
        let (code, _) = run_args(&[
            "simulate",
            "--n",
            "20",
            "--m",
            "2",
            "--k",
            "2",
            "--slots",
            "5",
            "--with-opt",
        ]);
        assert_eq!(code, 3);
    }

    #[test]
    fn with_opt_on_a_tiny_instance() {
        let (code, out) = run_args(&[
            "simulate",
            "--policy",
            "lru",
            "--n",
            "5",
            "--m",
            "2",
            "--k",
            "2",
            "--beta",
            "0.5",
            "--slots",
            "6",
            "--with-opt",
        ]);
        assert_eq!(code, 0);
        assert!(out.contains("opt = "), "{out}");
    }
}
