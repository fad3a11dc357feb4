use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use condcop::copula::{margin_evaluations, Provenance, PseudoObservations, TrivariateSample};
use condcop::harness::{self, ExperimentConfig, MarginSource, ReplicationMode};
use condcop::loclin::{Bandwidths, ConditionalCdfFit};
use condcop::{Error, Result};

#[derive(Parser)]
#[command(
    name = "condcop",
    version,
    about = "Conditional copula estimation under the simplifying assumption"
)]
struct Cli {
    /// Worker threads for replications (default: all cores).
    #[arg(long, global = true, env = "CONDCOP_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Limit standard deviation σ(u) under the Gaussian copula.
    Sigma {
        #[arg(long)]
        u1: f64,
        #[arg(long)]
        u2: f64,
        #[arg(long, allow_hyphen_values = true)]
        rho: f64,
    },
    /// Estimator-versus-oracle proximity and normality experiments.
    Simulate(RunArgs),
    /// Fit one dataset from CSV (`x,y` or `x,y1,y2`).
    Estimate(EstimateArgs),
    /// Rate scan and monotonicity reports of the conditional CDF estimator.
    Diagnose(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file; desk-scale defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Full-scale replication counts and sample sizes.
    #[arg(long = "full-scale", visible_alias = "paper")]
    full_scale: bool,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    h1: Option<f64>,
    #[arg(long)]
    h2: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    u1: f64,
    #[arg(long, default_value_t = 0.7)]
    u2: f64,
    /// Output CSV of per-observation estimates.
    #[arg(long, default_value = "estimates.csv")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("warning: could not size thread pool: {e}");
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Sigma { u1, u2, rho } => {
            println!("{:.6}", condcop::limit_sigma(u1, u2, rho)?);
            Ok(())
        }
        Command::Simulate(args) => simulate(&args),
        Command::Estimate(args) => estimate(&args),
        Command::Diagnose(args) => diagnose(&args),
    }
}

fn resolve_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => harness::load_config(path)?,
        None => ExperimentConfig::desk(),
    };
    if args.full_scale {
        let full = ExperimentConfig::full_scale();
        cfg.n_grid = full.n_grid;
        cfg.replications = full.replications;
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    cfg.validate()?;
    std::fs::create_dir_all(&args.out)?;
    Ok(cfg)
}

fn simulate(args: &RunArgs) -> Result<()> {
    let cfg = resolve_config(args)?;
    let law = cfg.limit_law()?;
    eprintln!(
        "C(u) = {:.6}, sigma(u) = {:.6}, rho12|X = {:.6}",
        law.copula,
        law.sigma(),
        law.rho
    );
    let mut all = Vec::new();
    let mut proximity = Vec::new();
    let mut normality = Vec::new();
    for &n in &cfg.n_grid {
        let records = harness::run_replications(&cfg, n, ReplicationMode::Full)?;
        let prox = harness::proximity_row(n, &records);
        let norm = harness::normality_summary(n, &records, &law);
        eprintln!(
            "n = {n:>6}: corr = {:.4}, gap = {:.4}, sd = {:.4}, ks = {:.4} (p = {:.3}), failed = {}",
            prox.corr, prox.gap, norm.sd, norm.ks, norm.ks_pvalue, prox.failed
        );
        harness::emit_qq(&norm, args.out.join(format!("qq_{n}.csv")))?;
        harness::emit_histogram(&norm, args.out.join(format!("hist_{n}.csv")))?;
        all.extend(records);
        proximity.push(prox);
        normality.push(norm);
    }
    harness::emit_csv(&all, args.out.join("replications.csv"))?;
    if cfg.n_grid.len() >= 2 && cfg.replications >= 50 {
        harness::emit_proximity(&proximity, args.out.join("proximity.csv"))?;
    } else {
        eprintln!("warning: proximity table skipped (needs two sample sizes and R >= 50)");
    }
    if cfg.replications >= 200 {
        harness::emit_normality(&normality, args.out.join("normality.csv"))?;
    } else {
        eprintln!("warning: normality table skipped (needs R >= 200)");
    }
    Ok(())
}

fn diagnose(args: &RunArgs) -> Result<()> {
    let cfg = resolve_config(args)?;
    let rows = harness::rate_scan(&cfg, MarginSource::LocalLinear)?;
    for r in &rows {
        eprintln!(
            "n = {:>6}: median sup|F - F0| = {:.5}, median sup|Q - Q0| = {:.5}, failed = {}",
            r.n, r.median_sup_cdf, r.median_sup_quantile, r.failed
        );
    }
    harness::emit_rates(&rows, args.out.join("rates.csv"))?;
    let n = *cfg.n_grid.last().expect("validated non-empty");
    let xs: Vec<f64> = harness::rate_x_lattice()
        .into_iter()
        .filter(|&x| x >= cfg.gamma && x <= 1.0 - cfg.gamma)
        .collect();
    let reports = harness::monotonicity_scan(&cfg, n, 0, &xs)?;
    let violations = reports.iter().filter(|r| r.violation).count();
    eprintln!(
        "monotonicity at n = {n}: {violations} of {} points flagged",
        reports.len()
    );
    harness::emit_monotonicity(&reports, args.out.join("monotonicity.csv"))
}

fn read_columns(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let width = rdr.headers()?.len();
    if width != 2 && width != 3 {
        return Err(Error::Parse(format!("expected 2 or 3 columns, found {width}")));
    }
    let mut cols = vec![Vec::new(); width];
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: not a number: `{field}`", line + 1)))?;
            cols[c].push(v);
        }
    }
    Ok(cols)
}

fn estimate(args: &EstimateArgs) -> Result<()> {
    let cols = read_columns(&args.data)?;
    let x = &cols[0];
    let n = x.len();
    let default_h = 0.5 * (n as f64).powf(-0.2);
    let bw = Bandwidths::new(args.h1.unwrap_or(default_h), args.h2.unwrap_or(default_h))?;
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if bw.h1 >= 0.5 * (hi - lo) {
        eprintln!("warning: h1 = {} is at least half the range of x", bw.h1);
    }
    let fits: Vec<ConditionalCdfFit> = cols[1..]
        .iter()
        .map(|y| ConditionalCdfFit::from_xy(x, y, bw))
        .collect::<Result<_>>()?;

    if let [fit] = fits.as_slice() {
        let y = &cols[1];
        let mut w = csv::Writer::from_path(&args.out)?;
        w.write_record(["x", "y", "cdf"])?;
        let mut degenerate = 0;
        for (&xi, &yi) in x.iter().zip(y) {
            let v = fit.cdf(yi, xi).unwrap_or_else(|_| {
                degenerate += 1;
                f64::NAN
            });
            w.write_record([format!("{xi:.16e}"), format!("{yi:.16e}"), format!("{v:.16e}")])?;
        }
        w.flush()?;
        if degenerate > 0 {
            eprintln!("warning: {degenerate} observations fall in degenerate local designs (written as NaN)");
        }
        return Ok(());
    }

    let sample = TrivariateSample::new(cols[0].clone(), cols[1].clone(), cols[2].clone())?;
    let evals = margin_evaluations(&sample, &fits[0], &fits[1]);
    let total = evals.len();
    let pairs: Vec<(f64, f64)> = evals.into_iter().filter_map(|r| r.ok()).collect();
    if pairs.len() < total {
        eprintln!("warning: {} degenerate observations excluded", total - pairs.len());
    }
    let obs = PseudoObservations::new(pairs, Provenance::Estimated)?;
    let mut w = csv::Writer::from_path(&args.out)?;
    w.write_record(["v1", "v2", "provenance"])?;
    for &(a, b) in obs.pairs() {
        w.write_record([
            format!("{a:.16e}"),
            format!("{b:.16e}"),
            obs.provenance().as_str().to_string(),
        ])?;
    }
    w.flush()?;
    println!("{:.6}", obs.copula().eval(args.u1, args.u2)?);
    Ok(())
}
