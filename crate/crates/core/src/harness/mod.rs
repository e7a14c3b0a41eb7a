//! Experiment driver: seeded Monte Carlo ratio estimation against an
//! offline benchmark, the verification suite that sweeps every pathwise
//! check over the bundled corpus, and report emission.

pub mod corpus;
pub mod rng;

pub use rng::trial_rng;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{
    run_fgpg, run_gpg, run_greedy_aware, run_greedy_oblivious, run_msvv, TieBreak,
    TradeoffFunction,
};
use crate::certificate::{
    check_augmentation_inner, check_decomposable, check_price_monotone, check_shortfall,
    check_threshold_bound, classic_pd_candidate, CheckReport,
};
use crate::error::Error;
use crate::instance::{gen_random_smallbid, load_instance, Instance, SeedVector};
use crate::numerics::{alpha_at, minimize_alpha, Method};
use crate::offline::{
    analytic_opt, build_lp, solve_bruteforce, solve_lp, OfflineResult, DEFAULT_BRUTEFORCE_CAP,
    DEFAULT_LP_TOL,
};
use crate::Result;

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "ADWORDS_LAB_THREADS";

fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let k: usize = v
            .parse()
            .map_err(|_| Error::invalid(THREADS_ENV, format!("not a thread count: {v}")))?;
        builder = builder.num_threads(k.max(1));
    }
    builder
        .build()
        .map_err(|e| Error::invalid(THREADS_ENV, e.to_string()))
}

/// Where the instance comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum InstanceSource {
    File { path: PathBuf },
    Builtin { name: String },
}

impl InstanceSource {
    pub fn resolve(&self) -> Result<Instance> {
        match self {
            InstanceSource::File { path } => load_instance(path),
            InstanceSource::Builtin { name } => corpus::builtin(name),
        }
    }
}

/// Default beta for seeded policies and the suite sweeps.
pub const DEFAULT_BETA: f64 = TradeoffFunction::<f64>::DEFAULT_BETA;

fn default_beta() -> f64 {
    DEFAULT_BETA
}

/// One policy to evaluate. `beta` only affects the seeded policies.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PolicySpec {
    pub name: String,
    #[serde(default = "default_beta")]
    pub beta: f64,
}

impl PolicySpec {
    pub fn randomized(&self) -> bool {
        matches!(self.name.as_str(), "gpg" | "fgpg")
    }
}

/// Benchmark selection for the denominator of the ratio.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkChoice {
    Lp,
    Bruteforce,
    Analytic,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

/// Full experiment description; serializes as the JSON config file format.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentConfig {
    pub instance: InstanceSource,
    pub policies: Vec<PolicySpec>,
    pub trials: usize,
    pub rng_seed: u64,
    pub benchmark: BenchmarkChoice,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: ReportFormat,
}

impl ExperimentConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Per-policy aggregate over the trials.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PolicyRow {
    pub policy: String,
    pub beta: f64,
    pub mean: f64,
    pub std_error: f64,
    pub ratio: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RatioReport {
    pub instance: String,
    pub gamma: f64,
    pub trials: usize,
    pub rng_seed: u64,
    pub benchmark: BenchmarkChoice,
    pub benchmark_value: f64,
    pub policies: Vec<PolicyRow>,
}

fn solve_benchmark(inst: &Instance, choice: BenchmarkChoice) -> Result<OfflineResult> {
    match choice {
        BenchmarkChoice::Lp => solve_lp(inst, &build_lp(inst), DEFAULT_LP_TOL),
        BenchmarkChoice::Bruteforce => solve_bruteforce(inst, DEFAULT_BRUTEFORCE_CAP),
        BenchmarkChoice::Analytic => analytic_opt(inst).ok_or_else(|| {
            Error::invalid("benchmark", format!("no analytic optimum for `{}`", inst.label()))
        }),
    }
}

fn policy_value(inst: &Instance, spec: &PolicySpec, seeds: Option<&SeedVector>) -> Result<f64> {
    match spec.name.as_str() {
        "gpg" => Ok(run_gpg(inst, seeds.expect("seeded policy"), spec.beta)?.total),
        "fgpg" => Ok(run_fgpg(inst, seeds.expect("seeded policy"), spec.beta)?.total),
        "greedy" | "greedy-oblivious" => {
            Ok(run_greedy_oblivious(inst, TieBreak::LowestId).total)
        }
        "greedy-aware" => Ok(run_greedy_aware(inst)?.total),
        "msvv" => Ok(run_msvv(inst)?.total),
        other => Err(Error::Unknown { kind: "policy".to_string(), name: other.to_string() }),
    }
}

/// Run every policy for `trials` seeded trials and aggregate ratios against
/// the benchmark. Deterministic for a fixed config, independent of the
/// worker pool size: trial k always uses RNG stream k and aggregation runs
/// in trial order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RatioReport> {
    if cfg.trials == 0 {
        return Err(Error::invalid("trials", "at least one trial is required"));
    }
    let inst = cfg.instance.resolve()?;
    let bench = solve_benchmark(&inst, cfg.benchmark)?;
    if bench.value <= 0.0 {
        return Err(Error::invalid("benchmark", "benchmark value is not positive"));
    }
    let pool = worker_pool()?;
    let mut policies = Vec::with_capacity(cfg.policies.len());
    for spec in &cfg.policies {
        let values: Vec<f64> = if spec.randomized() {
            let results: Vec<Result<f64>> = pool.install(|| {
                (0..cfg.trials)
                    .into_par_iter()
                    .map(|trial| {
                        let mut rng = trial_rng(cfg.rng_seed, trial as u64);
                        let seeds = SeedVector::sample(inst.n(), &mut rng);
                        policy_value(&inst, spec, Some(&seeds))
                    })
                    .collect()
            });
            results.into_iter().collect::<Result<Vec<f64>>>()?
        } else {
            vec![policy_value(&inst, spec, None)?; cfg.trials]
        };
        let kf = cfg.trials as f64;
        let mean = values.iter().sum::<f64>() / kf;
        let std_error = if cfg.trials < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (kf - 1.0);
            (var / kf).sqrt()
        };
        policies.push(PolicyRow {
            policy: spec.name.clone(),
            beta: spec.beta,
            mean,
            std_error,
            ratio: mean / bench.value,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        });
    }
    Ok(RatioReport {
        instance: inst.label().to_string(),
        gamma: inst.gamma(),
        trials: cfg.trials,
        rng_seed: cfg.rng_seed,
        benchmark: cfg.benchmark,
        benchmark_value: bench.value,
        policies,
    })
}

/// Serialize a report; JSON is pretty-printed, CSV has one row per policy.
pub fn emit_report(report: &RatioReport, format: ReportFormat, out: &mut dyn std::io::Write) -> Result<()> {
    match format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, report)?;
            writeln!(out)?;
        }
        ReportFormat::Csv => {
            writeln!(
                out,
                "instance,policy,beta,trials,mean,stdError,ratio,min,max,benchmark,benchmarkValue,gamma"
            )?;
            for row in &report.policies {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{:?},{},{}",
                    report.instance,
                    row.policy,
                    row.beta,
                    report.trials,
                    row.mean,
                    row.std_error,
                    row.ratio,
                    row.min,
                    row.max,
                    report.benchmark,
                    report.benchmark_value,
                    report.gamma,
                )?;
            }
        }
    }
    Ok(())
}

/// Which parts of the verification suite to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyScope {
    All,
    Bounds,
    Coupling,
    Classic,
    Decomposable,
    Alpha,
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub scope: VerifyScope,
    /// Uniform grid size for the focal-seed sweeps.
    pub grid_points: usize,
    /// Base seed vectors per instance.
    pub outer_seeds: usize,
    /// Random (instance, seed) pairs for the coupling check.
    pub coupling_pairs: usize,
    pub rng_seed: u64,
    /// Self-test switch: break the coupling on purpose to prove the suite
    /// notices.
    pub corrupt_coupling: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            scope: VerifyScope::All,
            grid_points: 201,
            outer_seeds: 20,
            coupling_pairs: 1000,
            rng_seed: 0,
            corrupt_coupling: false,
        }
    }
}

/// All reports of one suite run.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub reports: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(CheckReport::passed)
    }

    pub fn failing(&self) -> Vec<&CheckReport> {
        self.reports.iter().filter(|r| !r.passed()).collect()
    }

    pub fn total_checks(&self) -> usize {
        self.reports.iter().map(|r| r.checks).sum()
    }
}

fn merge_named(acc: &mut Vec<CheckReport>, name: String, parts: Vec<CheckReport>) {
    let mut merged = CheckReport::new(name);
    for part in parts {
        merged.merge(part);
    }
    acc.push(merged);
}

fn bounds_scope(opts: &VerifyOptions, pool: &rayon::ThreadPool) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for inst in corpus::verify_corpus()? {
        let opt = solve_lp(&inst, &build_lp(&inst), DEFAULT_LP_TOL)?;
        type Check = fn(&Instance, &OfflineResult, &SeedVector, f64, usize) -> Result<CheckReport>;
        let checks: [(&str, Check); 3] = [
            ("price-monotone", check_price_monotone),
            ("threshold-bound", check_threshold_bound),
            ("shortfall", check_shortfall),
        ];
        for (name, check) in checks {
            let parts: Vec<Result<CheckReport>> = pool.install(|| {
                (0..opts.outer_seeds)
                    .into_par_iter()
                    .map(|k| {
                        let mut rng = trial_rng(opts.rng_seed, k as u64);
                        let base = SeedVector::sample(inst.n(), &mut rng);
                        check(&inst, &opt, &base, DEFAULT_BETA, opts.grid_points)
                    })
                    .collect()
            });
            let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
            merge_named(&mut out, format!("{name}:{}", inst.label()), parts);
        }
    }
    Ok(out)
}

fn decomposable_scope(opts: &VerifyOptions, pool: &rayon::ThreadPool) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for inst in corpus::verify_corpus()? {
        if !crate::instance::is_decomposable(&inst) {
            continue;
        }
        let opt = solve_lp(&inst, &build_lp(&inst), DEFAULT_LP_TOL)?;
        let parts: Vec<Result<CheckReport>> = pool.install(|| {
            (0..opts.outer_seeds)
                .into_par_iter()
                .map(|k| {
                    let mut rng = trial_rng(opts.rng_seed, k as u64);
                    let base = SeedVector::sample(inst.n(), &mut rng);
                    check_decomposable(&inst, &opt, &base, 1.0, opts.grid_points)
                })
                .collect()
        });
        let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
        merge_named(&mut out, format!("decomposable:{}", inst.label()), parts);
    }
    Ok(out)
}

fn coupling_scope(opts: &VerifyOptions, pool: &rayon::ThreadPool) -> Result<Vec<CheckReport>> {
    let augment = !opts.corrupt_coupling;
    let mut out = Vec::new();
    for inst in corpus::bundled()? {
        let parts: Vec<Result<CheckReport>> = pool.install(|| {
            (0..opts.outer_seeds)
                .into_par_iter()
                .map(|k| {
                    let mut rng = trial_rng(opts.rng_seed, k as u64);
                    let seeds = SeedVector::sample(inst.n(), &mut rng);
                    Ok(check_augmentation_inner(&inst, &seeds, DEFAULT_BETA, augment)?.report)
                })
                .collect()
        });
        let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
        merge_named(&mut out, format!("augmentation:{}", inst.label()), parts);
    }
    // random small-bid pairs with randomized shapes
    let parts: Vec<Result<CheckReport>> = pool.install(|| {
        (0..opts.coupling_pairs)
            .into_par_iter()
            .map(|k| {
                use rand::Rng;
                let mut rng = trial_rng(opts.rng_seed, 1_000_000 + k as u64);
                let n = rng.gen_range(2..=5);
                let t_len = rng.gen_range(4..=12);
                let gamma_max = rng.gen_range(0.05..1.0);
                let inst = gen_random_smallbid(n, t_len, gamma_max, rng.gen())?;
                let seeds = SeedVector::sample(inst.n(), &mut rng);
                Ok(check_augmentation_inner(&inst, &seeds, DEFAULT_BETA, augment)?.report)
            })
            .collect()
    });
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    merge_named(&mut out, "augmentation:random-smallbid".to_string(), parts);
    Ok(out)
}

fn classic_scope(opts: &VerifyOptions, pool: &rayon::ThreadPool) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for inst in corpus::bundled()? {
        let parts: Vec<Result<CheckReport>> = pool.install(|| {
            (0..opts.outer_seeds)
                .into_par_iter()
                .map(|k| {
                    let mut rng = trial_rng(opts.rng_seed, k as u64);
                    let seeds = SeedVector::sample(inst.n(), &mut rng);
                    // alpha 0 keeps coverage trivial; this scope checks the
                    // payment condition only
                    Ok(classic_pd_candidate(&inst, &seeds, 1.0, 0.0)?.1)
                })
                .collect()
        });
        let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
        merge_named(&mut out, format!("classic-payment:{}", inst.label()), parts);
    }
    Ok(out)
}

fn alpha_scope() -> Result<Vec<CheckReport>> {
    let mut report = CheckReport::new("alpha-constants");
    let cases = [
        (1.0, 0.508, 0.515, 0.586),
        (1.15, 0.522, 0.530, 0.789),
    ];
    for (beta, lo, hi, x_ref) in cases {
        let (x_star, a_star) = minimize_alpha(beta, 400, 1e-9)?;
        report.require(a_star, lo, 0.0, || format!("beta={beta}: minimum below {lo}"));
        report.require(hi, a_star, 0.0, || format!("beta={beta}: minimum above {hi}"));
        report.require(0.005, (x_star - x_ref).abs(), 0.0, || {
            format!("beta={beta}: minimizer {x_star} not near {x_ref}")
        });
        for k in 0..=20 {
            let v = k as f64 / 20.0;
            let closed = alpha_at(v, beta, Method::ClosedForm)?;
            let quad = alpha_at(v, beta, Method::Quadrature)?;
            report.require(1e-6, (closed - quad).abs(), 0.0, || {
                format!("beta={beta} v={v}: methods disagree")
            });
        }
    }
    Ok(vec![report])
}

/// Run the selected checks over the bundled corpus. Violations are
/// findings, not errors: the function only fails on infrastructure
/// problems (I/O, solver failures).
pub fn run_verification_suite(opts: &VerifyOptions) -> Result<SuiteReport> {
    let pool = worker_pool()?;
    let mut reports = Vec::new();
    let on = |scope| opts.scope == VerifyScope::All || opts.scope == scope;
    if on(VerifyScope::Bounds) {
        reports.extend(bounds_scope(opts, &pool)?);
    }
    if on(VerifyScope::Decomposable) {
        reports.extend(decomposable_scope(opts, &pool)?);
    }
    if on(VerifyScope::Coupling) {
        reports.extend(coupling_scope(opts, &pool)?);
    }
    if on(VerifyScope::Classic) {
        reports.extend(classic_scope(opts, &pool)?);
    }
    if on(VerifyScope::Alpha) {
        reports.extend(alpha_scope()?);
    }
    Ok(SuiteReport { reports })
}
