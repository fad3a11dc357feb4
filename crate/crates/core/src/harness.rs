//! Seeded Monte Carlo replication of the estimator-versus-oracle experiments.
//!
//! Every replication draws from the Gaussian reference model with a seed
//! derived from `(master_seed, n, rep_index)`, so the output of an experiment
//! does not depend on the number of worker threads or on scheduling.

use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use crate::copula::{margin_evaluations, Provenance, PseudoObservations};
use crate::error::{Error, Result};
use crate::gauss::{conditional_margin, std_normal_cdf, std_normal_quantile, GaussianCopulaSpec, LimitLaw};
use crate::loclin::{Bandwidths, ConditionalCdfFit, MonotonicityReport};
use crate::stats;

/// Share of degenerate pseudo-observations above which a replication fails.
pub const MAX_DEGENERATE_SHARE: f64 = 0.01;
/// Offset mixed into the master seed for the rate scan, so its draws are
/// independent of the copula experiments at the same `(n, rep)`.
const RATE_SCAN_STREAM: u64 = 0x5241_5445_5343_414e;

/// `h = c · n^exponent`, used for both `h1` and `h2`.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandwidthRule {
    pub c: f64,
    pub exponent: f64,
}

impl Default for BandwidthRule {
    fn default() -> Self {
        Self { c: 0.5, exponent: -0.2 }
    }
}

impl BandwidthRule {
    pub fn bandwidths(&self, n: usize) -> Result<Bandwidths> {
        Bandwidths::from_rule(self.c, self.exponent, n)
    }
}

/// Description of a Monte Carlo run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub rho1x: f64,
    pub rho2x: f64,
    pub rho12: f64,
    pub u: (f64, f64),
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub bandwidth: BandwidthRule,
    pub master_seed: u64,
    pub gamma: f64,
}

pub const DEFAULT_MASTER_SEED: u64 = 20_190_318;

impl ExperimentConfig {
    /// Reference correlations at desk scale: 200 replications for
    /// `n ∈ {250, 500, 1000, 2000}`.
    pub fn desk() -> Self {
        Self {
            rho1x: 0.4,
            rho2x: -0.2,
            rho12: 0.3689989,
            u: (0.5, 0.7),
            n_grid: vec![250, 500, 1000, 2000],
            replications: 200,
            bandwidth: BandwidthRule::default(),
            master_seed: DEFAULT_MASTER_SEED,
            gamma: 0.1,
        }
    }

    /// Full-scale settings: 5000 replications per sample size, `n` from 100
    /// up to 10000.
    pub fn full_scale() -> Self {
        Self {
            n_grid: vec![100, 200, 500, 1000, 2000, 5000, 10_000],
            replications: 5000,
            ..Self::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |field: &str, reason: String| Error::Config {
            field: field.to_string(),
            reason,
        };
        GaussianCopulaSpec::new(self.rho1x, self.rho2x, self.rho12)
            .map_err(|e| cfg_err("rho12", format!("invalid correlation triple: {e}")))?;
        if !(self.u.0 > 0.0 && self.u.0 < 1.0 && self.u.1 > 0.0 && self.u.1 < 1.0) {
            return Err(cfg_err("u", format!("{:?} is not inside the open unit square", self.u)));
        }
        if self.replications < 1 {
            return Err(cfg_err("replications", "must be at least 1".into()));
        }
        if self.n_grid.is_empty() {
            return Err(cfg_err("n_grid", "empty".into()));
        }
        for &n in &self.n_grid {
            if n < 10 {
                return Err(cfg_err("n_grid", format!("sample size {n} < 10")));
            }
            self.bandwidth
                .bandwidths(n)
                .map_err(|e| cfg_err("bandwidth", e.to_string()))?;
        }
        if !(self.gamma > 0.0 && self.gamma < 0.5) {
            return Err(cfg_err("gamma", format!("{} is not in (0, 0.5)", self.gamma)));
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<GaussianCopulaSpec> {
        GaussianCopulaSpec::new(self.rho1x, self.rho2x, self.rho12)
    }

    pub fn limit_law(&self) -> Result<LimitLaw> {
        LimitLaw::new(self.u, self.spec()?.rho12_given_x())
    }

    /// Parses the key-value config format (TOML). The three correlations are
    /// required; every other field falls back to [`ExperimentConfig::desk`].
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config {
            field: offending_key(text, &e),
            reason: e.message().to_string(),
        })?;
        let missing = |field: &str| Error::Config {
            field: field.to_string(),
            reason: "missing required field".into(),
        };
        let desk = Self::desk();
        let cfg = Self {
            rho1x: raw.rho1x.ok_or_else(|| missing("rho1x"))?,
            rho2x: raw.rho2x.ok_or_else(|| missing("rho2x"))?,
            rho12: raw.rho12.ok_or_else(|| missing("rho12"))?,
            u: raw.u.map(|[a, b]| (a, b)).unwrap_or(desk.u),
            n_grid: raw.n_grid.unwrap_or(desk.n_grid),
            replications: raw.replications.unwrap_or(desk.replications),
            bandwidth: raw.bandwidth.unwrap_or(desk.bandwidth),
            master_seed: raw.master_seed.unwrap_or(desk.master_seed),
            gamma: raw.gamma.unwrap_or(desk.gamma),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        let grid: Vec<String> = self.n_grid.iter().map(|n| n.to_string()).collect();
        format!(
            "rho1x = {:?}\nrho2x = {:?}\nrho12 = {:?}\nu = [{:?}, {:?}]\nn_grid = [{}]\nreplications = {}\n\
             bandwidth = {{ c = {:?}, exponent = {:?} }}\nmaster_seed = {}\ngamma = {:?}\n",
            self.rho1x,
            self.rho2x,
            self.rho12,
            self.u.0,
            self.u.1,
            grid.join(", "),
            self.replications,
            self.bandwidth.c,
            self.bandwidth.exponent,
            self.master_seed,
            self.gamma
        )
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    rho1x: Option<f64>,
    rho2x: Option<f64>,
    rho12: Option<f64>,
    u: Option<[f64; 2]>,
    n_grid: Option<Vec<usize>>,
    replications: Option<usize>,
    bandwidth: Option<BandwidthRule>,
    master_seed: Option<u64>,
    gamma: Option<f64>,
}

/// Key named in a TOML error: the quoted name for unknown or missing fields,
/// otherwise the key on the line where the error starts.
fn offending_key(text: &str, e: &toml::de::Error) -> String {
    if let Some(name) = e.message().split('`').nth(1) {
        return name.to_string();
    }
    e.span()
        .and_then(|span| {
            let start = text[..span.start.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
            let line = text[start..].lines().next()?;
            line.split_once('=')
                .map(|(k, _)| k.trim().trim_matches('"').to_string())
        })
        .unwrap_or_else(|| "<document>".to_string())
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    ExperimentConfig::from_toml_str(&std::fs::read_to_string(path)?)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based seed for replication `rep_index` at sample size `n`.
pub fn replication_seed(master_seed: u64, n: usize, rep_index: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ n as u64) ^ rep_index as u64)
}

/// Outputs of one replication.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicationRecord {
    pub n: usize,
    pub rep_index: usize,
    pub seed: u64,
    /// `Ĉ_n(u)` from estimated margins.
    pub c_hat: f64,
    /// `Ĉ_n^(or)(u)` from the true margins.
    pub c_oracle: f64,
    pub degenerate_count: usize,
    /// Largest `|F̂_j(Y_ij|X_i) - F_j(Y_ij|X_i)|` over the sample.
    pub sup_margin_error: Option<f64>,
    pub failed: bool,
}

impl ReplicationRecord {
    pub const CSV_HEADER: [&'static str; 8] = [
        "n",
        "rep_index",
        "seed",
        "c_hat",
        "c_oracle",
        "degenerate_count",
        "sup_margin_error",
        "failed",
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReplicationMode {
    /// Smoothed local-linear margins against the oracle.
    Full,
    /// Both columns from the oracle pipeline.
    OracleOnly,
}

pub fn run_replication(cfg: &ExperimentConfig, n: usize, rep_index: usize) -> Result<ReplicationRecord> {
    run_replication_with(cfg, n, rep_index, ReplicationMode::Full)
}

pub fn run_replication_with(
    cfg: &ExperimentConfig,
    n: usize,
    rep_index: usize,
    mode: ReplicationMode,
) -> Result<ReplicationRecord> {
    let spec = cfg.spec()?;
    let seed = replication_seed(cfg.master_seed, n, rep_index);
    let sample = spec.sample(n, seed);
    let (u1, u2) = cfg.u;

    let oracle_pairs = margin_evaluations(&sample, &spec.margin(1), &spec.margin(2))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let oracle = PseudoObservations::new(oracle_pairs, Provenance::Oracle)?;

    if mode == ReplicationMode::OracleOnly {
        let c = oracle.copula().eval(u1, u2)?;
        return Ok(ReplicationRecord {
            n,
            rep_index,
            seed,
            c_hat: c,
            c_oracle: c,
            degenerate_count: 0,
            sup_margin_error: Some(0.0),
            failed: false,
        });
    }

    let bw = cfg.bandwidth.bandwidths(n)?;
    let fit1 = ConditionalCdfFit::from_xy(&sample.x, &sample.y1, bw)?;
    let fit2 = ConditionalCdfFit::from_xy(&sample.x, &sample.y2, bw)?;
    let estimated = margin_evaluations(&sample, &fit1, &fit2);

    let keep: Vec<bool> = estimated.iter().map(|r| r.is_ok()).collect();
    let degenerate_count = keep.iter().filter(|k| !**k).count();
    let failed = degenerate_count as f64 > MAX_DEGENERATE_SHARE * n as f64;
    let est_pairs: Vec<(f64, f64)> = estimated.into_iter().filter_map(|r| r.ok()).collect();

    let sup_margin_error = est_pairs
        .iter()
        .zip(oracle.pairs().iter().zip(&keep).filter(|(_, &k)| k).map(|(p, _)| p))
        .map(|(e, o)| (e.0 - o.0).abs().max((e.1 - o.1).abs()))
        .reduce(f64::max);

    let (c_hat, c_oracle) = if est_pairs.is_empty() {
        (f64::NAN, oracle.copula().eval(u1, u2)?)
    } else {
        let est = PseudoObservations::new(est_pairs, Provenance::Estimated)?;
        let ora = if degenerate_count > 0 {
            oracle.retain_indices(&keep)?
        } else {
            oracle
        };
        (est.copula().eval(u1, u2)?, ora.copula().eval(u1, u2)?)
    };

    Ok(ReplicationRecord {
        n,
        rep_index,
        seed,
        c_hat,
        c_oracle,
        degenerate_count,
        sup_margin_error,
        failed: failed || !c_hat.is_finite(),
    })
}

/// All replications at sample size `n`, in replication order.
pub fn run_replications(cfg: &ExperimentConfig, n: usize, mode: ReplicationMode) -> Result<Vec<ReplicationRecord>> {
    (0..cfg.replications)
        .into_par_iter()
        .map(|r| run_replication_with(cfg, n, r, mode))
        .collect()
}

/// Estimator/oracle agreement at one sample size.
#[derive(Clone, Debug, PartialEq)]
pub struct ProximityRow {
    pub n: usize,
    /// Pearson correlation of `Ĉ_n(u)` and `Ĉ_n^(or)(u)` across replications.
    pub corr: f64,
    /// `√n · mean |Ĉ_n(u) - Ĉ_n^(or)(u)|`.
    pub gap: f64,
    pub succeeded: usize,
    pub failed: usize,
}

pub fn proximity_row(n: usize, records: &[ReplicationRecord]) -> ProximityRow {
    let ok: Vec<&ReplicationRecord> = records.iter().filter(|r| !r.failed).collect();
    let hat: Vec<f64> = ok.iter().map(|r| r.c_hat).collect();
    let ora: Vec<f64> = ok.iter().map(|r| r.c_oracle).collect();
    let gap = (n as f64).sqrt() * stats::mean(&hat.iter().zip(&ora).map(|(a, b)| (a - b).abs()).collect::<Vec<_>>());
    ProximityRow {
        n,
        corr: stats::pearson(&hat, &ora),
        gap,
        succeeded: ok.len(),
        failed: records.len() - ok.len(),
    }
}

/// Sampling distribution of `√n (Ĉ_n(u) - C(u))` at one sample size.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalitySummary {
    pub n: usize,
    pub c_true: f64,
    pub sigma: f64,
    /// Standard deviation of `√n (Ĉ_n(u) - C(u))`.
    pub sd: f64,
    /// KS statistic of `√n (Ĉ_n(u) - C(u)) / σ(u)` against `N(0, 1)`.
    pub ks: f64,
    pub ks_pvalue: f64,
    /// `(theoretical, empirical)` quantile pairs of `√n (Ĉ_n(u) - C(u))`.
    pub qq: Vec<(f64, f64)>,
    /// Histogram over `[-4σ, 4σ]`: `(lower edge, upper edge, count)`.
    pub histogram: Vec<(f64, f64, usize)>,
    pub succeeded: usize,
    pub failed: usize,
}

const HISTOGRAM_BINS: usize = 32;

pub fn normality_summary(n: usize, records: &[ReplicationRecord], law: &LimitLaw) -> NormalitySummary {
    let ok: Vec<&ReplicationRecord> = records.iter().filter(|r| !r.failed).collect();
    let sigma = law.sigma();
    let sn = (n as f64).sqrt();
    let mut scaled: Vec<f64> = ok.iter().map(|r| sn * (r.c_hat - law.copula)).collect();
    let standardized: Vec<f64> = scaled.iter().map(|v| v / sigma).collect();
    let ks = stats::ks_statistic(&standardized, std_normal_cdf);
    scaled.sort_by(f64::total_cmp);
    let m = scaled.len();
    let qq = scaled
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let p = (i as f64 + 0.5) / m as f64;
            (sigma * std_normal_quantile(p).unwrap_or(f64::NAN), v)
        })
        .collect();
    let (lo, hi) = (-4.0 * sigma, 4.0 * sigma);
    let width = (hi - lo) / HISTOGRAM_BINS as f64;
    let mut counts = vec![0usize; HISTOGRAM_BINS];
    for &v in &scaled {
        if v >= lo && v < hi {
            counts[((v - lo) / width) as usize] += 1;
        }
    }
    let histogram = counts
        .into_iter()
        .enumerate()
        .map(|(b, c)| (lo + width * b as f64, lo + width * (b + 1) as f64, c))
        .collect();
    NormalitySummary {
        n,
        c_true: law.copula,
        sigma,
        sd: stats::std_dev(&scaled),
        ks,
        ks_pvalue: stats::ks_pvalue(ks, m),
        qq,
        histogram,
        succeeded: m,
        failed: records.len() - m,
    }
}

pub fn experiment_proximity(cfg: &ExperimentConfig) -> Result<Vec<ProximityRow>> {
    cfg.validate()?;
    if cfg.n_grid.len() < 2 {
        return Err(Error::Config {
            field: "n_grid".into(),
            reason: "proximity needs at least two sample sizes".into(),
        });
    }
    if cfg.replications < 50 {
        return Err(Error::Config {
            field: "replications".into(),
            reason: "proximity needs at least 50 replications".into(),
        });
    }
    cfg.n_grid
        .iter()
        .map(|&n| Ok(proximity_row(n, &run_replications(cfg, n, ReplicationMode::Full)?)))
        .collect()
}

pub fn experiment_normality(cfg: &ExperimentConfig) -> Result<Vec<NormalitySummary>> {
    cfg.validate()?;
    if cfg.replications < 200 {
        return Err(Error::Config {
            field: "replications".into(),
            reason: "normality needs at least 200 replications".into(),
        });
    }
    let law = cfg.limit_law()?;
    cfg.n_grid
        .iter()
        .map(|&n| {
            Ok(normality_summary(
                n,
                &run_replications(cfg, n, ReplicationMode::Full)?,
                &law,
            ))
        })
        .collect()
}

/// Which conditional margins the rate scan evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarginSource {
    LocalLinear,
    Oracle,
}

/// Median uniform errors at one sample size.
#[derive(Clone, Debug, PartialEq)]
pub struct RateRow {
    pub n: usize,
    pub median_sup_cdf: f64,
    pub median_sup_quantile: f64,
    pub failed: usize,
}

/// `x ∈ {0.1, …, 0.9}`.
pub fn rate_x_lattice() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

/// 33 equally spaced interior points of `(0, 1)`.
pub fn rate_y_lattice() -> Vec<f64> {
    (1..=33).map(|k| k as f64 / 34.0).collect()
}

/// `u ∈ {0.10, 0.15, …, 0.90}`.
pub fn rate_u_lattice() -> Vec<f64> {
    (0..=16).map(|k| 0.1 + 0.05 * k as f64).collect()
}

/// Sup errors of the first conditional margin for one replication:
/// `(sup |F̂ - F|, sup |F̂⁻ - F⁻|)` over the fixed lattices.
pub fn margin_sup_errors(
    cfg: &ExperimentConfig,
    n: usize,
    rep_index: usize,
    source: MarginSource,
) -> Result<(f64, f64)> {
    let spec = cfg.spec()?;
    let truth = spec.margin(1);
    let seed = replication_seed(cfg.master_seed ^ RATE_SCAN_STREAM, n, rep_index);
    let sample = spec.sample(n, seed);
    let fit = match source {
        MarginSource::LocalLinear => Some(ConditionalCdfFit::from_xy(
            &sample.x,
            &sample.y1,
            cfg.bandwidth.bandwidths(n)?,
        )?),
        MarginSource::Oracle => None,
    };
    let levels = rate_u_lattice();
    let ys = rate_y_lattice();
    let mut sup_cdf = 0.0f64;
    let mut sup_q = 0.0f64;
    for x in rate_x_lattice() {
        let (est_cdf, est_q): (Vec<f64>, Vec<f64>) = match &fit {
            Some(fit) => {
                let design = fit.design(x);
                if design.is_degenerate() {
                    return Err(Error::DegenerateDesign {
                        x,
                        det: design.determinant(),
                        floor: fit.det_floor(),
                    });
                }
                (ys.iter().map(|&y| design.cdf(y)).collect(), fit.quantiles(&levels, x)?)
            }
            None => (
                ys.iter()
                    .map(|&y| conditional_margin(y, x, truth.rho))
                    .collect::<Result<_>>()?,
                levels.iter().map(|&u| truth.quantile(u, x)).collect::<Result<_>>()?,
            ),
        };
        for (&y, e) in ys.iter().zip(&est_cdf) {
            sup_cdf = sup_cdf.max((e - conditional_margin(y, x, truth.rho)?).abs());
        }
        for (&u, e) in levels.iter().zip(&est_q) {
            sup_q = sup_q.max((e - truth.quantile(u, x)?).abs());
        }
    }
    Ok((sup_cdf, sup_q))
}

pub fn rate_scan(cfg: &ExperimentConfig, source: MarginSource) -> Result<Vec<RateRow>> {
    cfg.validate()?;
    if cfg.n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config {
            field: "n_grid".into(),
            reason: "rate scan needs increasing sample sizes".into(),
        });
    }
    cfg.n_grid
        .iter()
        .map(|&n| {
            let results: Vec<Result<(f64, f64)>> = (0..cfg.replications)
                .into_par_iter()
                .map(|r| margin_sup_errors(cfg, n, r, source))
                .collect();
            let ok: Vec<(f64, f64)> = results.iter().filter_map(|r| r.as_ref().ok().copied()).collect();
            let cdf_errs: Vec<f64> = ok.iter().map(|e| e.0).collect();
            let q_errs: Vec<f64> = ok.iter().map(|e| e.1).collect();
            Ok(RateRow {
                n,
                median_sup_cdf: stats::median(&cdf_errs),
                median_sup_quantile: stats::median(&q_errs),
                failed: results.len() - ok.len(),
            })
        })
        .collect()
}

/// Monotonicity reports of the first margin at several `x` for one draw.
pub fn monotonicity_scan(
    cfg: &ExperimentConfig,
    n: usize,
    rep_index: usize,
    xs: &[f64],
) -> Result<Vec<MonotonicityReport>> {
    let spec = cfg.spec()?;
    let sample = spec.sample(n, replication_seed(cfg.master_seed ^ RATE_SCAN_STREAM, n, rep_index));
    let fit = ConditionalCdfFit::from_xy(&sample.x, &sample.y1, cfg.bandwidth.bandwidths(n)?)?;
    xs.iter().map(|&x| fit.monotonicity_check(x, cfg.gamma)).collect()
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(field: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: `{field}`")))
}

fn parse_usize(field: &str) -> Result<usize> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not an integer: `{field}`")))
}

/// Writes a table with a fixed header.
pub fn write_table<P: AsRef<Path>>(
    path: P,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes replication records with 17-significant-digit floats.
pub fn emit_csv<P: AsRef<Path>>(records: &[ReplicationRecord], path: P) -> Result<()> {
    write_table(
        path,
        &ReplicationRecord::CSV_HEADER,
        records.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.rep_index.to_string(),
                r.seed.to_string(),
                fmt_f64(r.c_hat),
                fmt_f64(r.c_oracle),
                r.degenerate_count.to_string(),
                r.sup_margin_error.map(fmt_f64).unwrap_or_default(),
                u8::from(r.failed).to_string(),
            ]
        }),
    )
}

pub fn read_replications<P: AsRef<Path>>(path: P) -> Result<Vec<ReplicationRecord>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != ReplicationRecord::CSV_HEADER {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            let sup = &rec[6];
            Ok(ReplicationRecord {
                n: parse_usize(&rec[0])?,
                rep_index: parse_usize(&rec[1])?,
                seed: rec[2]
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad seed `{}`", &rec[2])))?,
                c_hat: parse_f64(&rec[3])?,
                c_oracle: parse_f64(&rec[4])?,
                degenerate_count: parse_usize(&rec[5])?,
                sup_margin_error: if sup.is_empty() { None } else { Some(parse_f64(sup)?) },
                failed: match &rec[7] {
                    "0" => false,
                    "1" => true,
                    other => return Err(Error::Parse(format!("bad failed flag `{other}`"))),
                },
            })
        })
        .collect()
}

pub fn emit_proximity<P: AsRef<Path>>(rows: &[ProximityRow], path: P) -> Result<()> {
    write_table(
        path,
        &["n", "corr", "gap"],
        rows.iter()
            .map(|r| vec![r.n.to_string(), fmt_f64(r.corr), fmt_f64(r.gap)]),
    )
}

pub fn emit_normality<P: AsRef<Path>>(rows: &[NormalitySummary], path: P) -> Result<()> {
    write_table(
        path,
        &["n", "sd", "ks"],
        rows.iter().map(|r| vec![r.n.to_string(), fmt_f64(r.sd), fmt_f64(r.ks)]),
    )
}

pub fn emit_qq<P: AsRef<Path>>(summary: &NormalitySummary, path: P) -> Result<()> {
    write_table(
        path,
        &["theoretical", "empirical"],
        summary.qq.iter().map(|&(t, e)| vec![fmt_f64(t), fmt_f64(e)]),
    )
}

pub fn emit_histogram<P: AsRef<Path>>(summary: &NormalitySummary, path: P) -> Result<()> {
    write_table(
        path,
        &["lower", "upper", "count"],
        summary
            .histogram
            .iter()
            .map(|&(a, b, c)| vec![fmt_f64(a), fmt_f64(b), c.to_string()]),
    )
}

pub fn emit_rates<P: AsRef<Path>>(rows: &[RateRow], path: P) -> Result<()> {
    write_table(
        path,
        &["n", "median_sup_cdf", "median_sup_quantile", "failed"],
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                fmt_f64(r.median_sup_cdf),
                fmt_f64(r.median_sup_quantile),
                r.failed.to_string(),
            ]
        }),
    )
}

pub fn emit_monotonicity<P: AsRef<Path>>(reports: &[MonotonicityReport], path: P) -> Result<()> {
    write_table(
        path,
        &["x", "min_density", "violation_flag"],
        reports
            .iter()
            .map(|r| vec![fmt_f64(r.x), fmt_f64(r.min_density), u8::from(r.violation).to_string()]),
    )
}
