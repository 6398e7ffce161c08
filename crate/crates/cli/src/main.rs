use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use mfmbd_core::io::{
    parse_dataset_str, write_clustering_csv, write_estimates_csv, write_exact_csv, write_metrics_csv,
    write_probe_csv, VEMURAFENIB_CSV,
};
use mfmbd_core::pipeline::fit_method;
use mfmbd_core::probe::probe_consistency;
use mfmbd_core::{
    exact_partition_posterior, parse_dataset, run_study, Method, MethodSettings, MfmConfig, PtPolicy, Result,
    RngStream, RunReport, Scenario, StudyConfig, TrialDataset,
};

const THREADS_ENV: &str = "MFMBD_THREADS";

type CliResult<T> = std::result::Result<T, String>;

trait At<T> {
    fn at(self, path: &Path) -> CliResult<T>;
}

impl<T, E: std::fmt::Display> At<T> for std::result::Result<T, E> {
    fn at(self, path: &Path) -> CliResult<T> {
        self.map_err(|e| format!("{}: {e}", path.display()))
    }
}

fn plain<T>(r: Result<T>) -> CliResult<T> {
    r.map_err(|e| e.to_string())
}

/// Two-step basket-trial analysis: MFM clustering of cohorts, then
/// hierarchical shrinkage within each cluster.
#[derive(Parser)]
#[command(name = "mfmbd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one method to a cohort dataset.
    Fit(FitArgs),
    /// Run a simulation scenario through the three methods.
    Simulate(SimulateArgs),
    /// Enumerate the partition posterior of a small dataset.
    ExactPosterior(ExactArgs),
    /// Render a fit report as a CSV of means and credible intervals.
    Report(ReportArgs),
    /// Track P(k = k₀ | data) as the number of cohorts grows.
    Probe(ProbeArgs),
}

#[derive(Args)]
struct DataArg {
    /// CSV with header `cohort,n,r[,p_t]`; the bundled Vemurafenib data if omitted.
    #[arg(long)]
    data: Option<PathBuf>,
}

impl DataArg {
    fn load(&self) -> CliResult<TrialDataset> {
        match &self.data {
            Some(path) => parse_dataset(path).at(path),
            None => plain(parse_dataset_str(VEMURAFENIB_CSV)),
        }
    }
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArg,
    #[arg(long, default_value = "mfm-bd")]
    method: Method,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Benchmark rate for cohorts without their own p_t.
    #[arg(long = "p-t", default_value_t = 0.15, conflicts_with = "cluster_pooled")]
    p_t: f64,
    /// Use each cluster's pooled observed rate as the benchmark instead.
    #[arg(long)]
    cluster_pooled: bool,
    /// Step-one sweeps (MFM-BD only).
    #[arg(long, default_value_t = 5000)]
    iters1: usize,
    #[arg(long, default_value_t = 2000)]
    burn1: usize,
    /// Hierarchical-model iterations; 8000 for MFM-BD step two, 10000 for the comparators.
    #[arg(long)]
    iters2: Option<usize>,
    #[arg(long, default_value_t = 2000)]
    burn2: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    scenario: u8,
    #[arg(long, default_value_t = 20)]
    n: u64,
    #[arg(long, default_value_t = 200)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Methods to run, comma separated.
    #[arg(long, value_delimiter = ',', default_values = ["mfm-bd", "berry", "exnex"])]
    methods: Vec<Method>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    data: DataArg,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Output CSV; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// A report.json written by `fit`.
    input: PathBuf,
    /// Output CSV; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProbeArgs {
    /// One true rate per cluster.
    #[arg(long, value_delimiter = ',', default_values = ["0.2", "0.6"])]
    rates: Vec<f64>,
    /// Total cohort counts.
    #[arg(long, value_delimiter = ',', default_values = ["4", "10", "20", "40"])]
    schedule: Vec<usize>,
    #[arg(long, default_value_t = 30)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Fit(a) => fit(a),
        Command::Simulate(a) => simulate(a),
        Command::ExactPosterior(a) => exact(a),
        Command::Report(a) => report(a),
        Command::Probe(a) => probe(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).at(path)?))
}

fn sink(path: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn fit(a: FitArgs) -> CliResult<()> {
    let dataset = a.data.load()?;
    let mut settings = MethodSettings {
        pt_policy: if a.cluster_pooled {
            PtPolicy::ClusterPooled
        } else {
            PtPolicy::Benchmark { default: a.p_t }
        },
        ..MethodSettings::default()
    };
    settings.mfm.iterations = a.iters1;
    settings.mfm.burn_in = a.burn1;
    match a.method {
        Method::MfmBd => {
            settings.step_two.iterations = a.iters2.unwrap_or(settings.step_two.iterations);
            settings.step_two.burn_in = a.burn2;
        }
        Method::Berry => {
            settings.berry.iterations = a.iters2.unwrap_or(settings.berry.iterations);
            settings.berry.burn_in = a.burn2;
        }
        Method::Exnex => {
            settings.exnex.iterations = a.iters2.unwrap_or(settings.exnex.iterations);
            settings.exnex.burn_in = a.burn2;
        }
    }

    let start = Instant::now();
    let fit = plain(fit_method(
        a.method,
        &dataset,
        &settings,
        &mut RngStream::new(a.seed, 0),
    ))?;
    let seconds = start.elapsed().as_secs_f64();

    let mfm = fit.mfm_bd;
    let report = RunReport {
        method: a.method,
        seed: a.seed,
        dataset,
        settings,
        partition: mfm.as_ref().map(|f| f.partition.clone()),
        estimates: fit.estimates,
        k_hat: mfm.as_ref().map(|f| f.k_hat.clone()),
        co_clustering: mfm.map(|f| f.co_clustering),
    };

    fs::create_dir_all(&a.out).at(&a.out)?;
    let path = a.out.join("report.json");
    report.write(&path).at(&path)?;
    let path = a.out.join("estimates.csv");
    write_estimates_csv(&report, create(&path)?).at(&path)?;
    let timing = serde_json::json!({ "method": a.method, "seed": a.seed, "wall_seconds": seconds });
    let path = a.out.join("timing.json");
    fs::write(&path, format!("{timing:#}\n")).at(&path)?;

    if let Some(p) = &report.partition {
        println!("partition: {p}");
    }
    for (e, c) in report.estimates.iter().zip(report.dataset.cohorts()) {
        println!(
            "{:<12} {:>3}/{:<3} mean {:5.1}%  95% CI ({:4.1}, {:4.1})",
            e.cohort,
            c.r,
            c.n,
            100.0 * e.mean,
            100.0 * e.ci_low,
            100.0 * e.ci_high
        );
    }
    Ok(())
}

fn simulate(a: SimulateArgs) -> CliResult<()> {
    let config = StudyConfig {
        scenario: plain(Scenario::preset(a.scenario, a.n))?,
        replicates: a.replicates,
        methods: a.methods,
        base_seed: a.seed,
        settings: MethodSettings::default(),
    };
    let summary = plain(run_study(&config))?;
    let mut methods = config.methods.clone();
    methods.sort();
    methods.dedup();

    fs::create_dir_all(&a.out).at(&a.out)?;
    let stem = format!("scenario{}_n{}", summary.scenario, summary.n);
    let summaries = std::slice::from_ref(&summary);
    let path = a.out.join(format!("{stem}_summary.json"));
    let json = serde_json::to_string_pretty(&summary).map_err(|e| e.to_string())? + "\n";
    fs::write(&path, json).at(&path)?;
    let path = a.out.join(format!("{stem}_metrics.csv"));
    write_metrics_csv(summaries, &methods, create(&path)?).at(&path)?;
    if summary.k_hat_mean.is_some() {
        let path = a.out.join(format!("{stem}_khat.csv"));
        write_clustering_csv(summaries, create(&path)?).at(&path)?;
    }

    println!(
        "scenario {} n={} replicates={} seed={}",
        summary.scenario, summary.n, summary.replicates, a.seed
    );
    if let (Some(m), Some(sd)) = (summary.k_hat_mean, summary.k_hat_sd) {
        println!("K̂ mean {m:.3} (sd {sd:.3})");
    }
    for m in &summary.metrics {
        println!("{:<7} AAB {:.4}  AMSE {:.4}", m.method.as_str(), m.aab, m.amse);
    }
    Ok(())
}

fn exact(a: ExactArgs) -> CliResult<()> {
    let dataset = a.data.load()?;
    let posterior = plain(exact_partition_posterior(
        &dataset, a.gamma, a.alpha, a.beta, a.lambda,
    ))?;
    plain(write_exact_csv(&posterior, sink(&a.out)?))
}

fn report(a: ReportArgs) -> CliResult<()> {
    let report = RunReport::read(&a.input).at(&a.input)?;
    plain(write_estimates_csv(&report, sink(&a.out)?))
}

fn probe(a: ProbeArgs) -> CliResult<()> {
    let rows = plain(probe_consistency(
        &a.rates,
        &a.schedule,
        a.n,
        &MfmConfig::default(),
        a.seed,
    ))?;
    plain(write_probe_csv(&rows, sink(&a.out)?))
}
