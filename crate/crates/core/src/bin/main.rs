//! Command line front end: experiments, the verification suite, the alpha
//! constants, the adaptive lower-bound construction, and instance emission.
//! Exit codes: 0 success, 1 violation found, 2 usage or runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use adwords_lab::algorithms::{GreedyOblivious, TieBreak};
use adwords_lab::harness::{
    self, corpus, emit_report, run_experiment, run_verification_suite, BenchmarkChoice,
    ExperimentConfig, InstanceSource, PolicySpec, ReportFormat, VerifyOptions, VerifyScope,
};
use adwords_lab::instance::{gen_adversary, save_instance};
use adwords_lab::numerics::{alpha_at, emit_figure1, minimize_alpha, sweep_beta, Method};
use adwords_lab::Result;

#[derive(Parser)]
#[command(name = "adwords-lab", version, about = "Online budgeted allocation laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchmarkArg {
    Lp,
    Bruteforce,
    Analytic,
}

impl From<BenchmarkArg> for BenchmarkChoice {
    fn from(b: BenchmarkArg) -> Self {
        match b {
            BenchmarkArg::Lp => BenchmarkChoice::Lp,
            BenchmarkArg::Bruteforce => BenchmarkChoice::Bruteforce,
            BenchmarkArg::Analytic => BenchmarkChoice::Analytic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    All,
    Bounds,
    Coupling,
    Classic,
    Decomposable,
    Alpha,
}

impl From<ScopeArg> for VerifyScope {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::All => VerifyScope::All,
            ScopeArg::Bounds => VerifyScope::Bounds,
            ScopeArg::Coupling => VerifyScope::Coupling,
            ScopeArg::Classic => VerifyScope::Classic,
            ScopeArg::Decomposable => VerifyScope::Decomposable,
            ScopeArg::Alpha => VerifyScope::Alpha,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Monte Carlo ratio experiment from a config file or flags.
    Run {
        /// JSON config file; flags below override nothing when this is set.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Bundled instance name, or a path to an instance JSON file.
        #[arg(long)]
        instance: Option<String>,
        /// Policy, repeatable: gpg, fgpg, greedy, greedy-aware, msvv;
        /// optionally with beta as in gpg:1.0.
        #[arg(long = "policy")]
        policies: Vec<String>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "lp")]
        benchmark: BenchmarkArg,
        /// Report destination; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
    /// Pathwise verification suite over the bundled corpus.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        scope: ScopeArg,
        #[arg(long, default_value_t = 201)]
        grid: usize,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        /// Self test: break the coupling on purpose; the suite must fail.
        #[arg(long)]
        corrupt_coupling: bool,
    },
    /// Competitive constant alpha(beta): point value, sweep, or plot data.
    Alpha {
        #[arg(long)]
        beta: Option<f64>,
        /// Beta sweep start:end:steps, e.g. 0.8:1.4:13.
        #[arg(long)]
        sweep: Option<String>,
        /// Emit TSV curve samples at the given (or default 1.15) beta.
        #[arg(long)]
        figure1: Option<PathBuf>,
        #[arg(long, default_value_t = 2001)]
        samples: usize,
    },
    /// Adaptive lower-bound construction against a deterministic target.
    Adversary {
        #[arg(long)]
        n: usize,
        /// greedy, greedy-oblivious or greedy-aware (identical here: the
        /// construction uses unit bids, where aware and oblivious greedy
        /// make the same choices).
        #[arg(long, default_value = "greedy")]
        target: String,
    },
    /// Emit instance JSON: one bundled instance, or the whole corpus.
    Gen {
        /// Bundled instance name.
        #[arg(long)]
        name: Option<String>,
        /// Output file (with --name) or directory (with --corpus).
        #[arg(long)]
        out: PathBuf,
        /// Write every bundled instance into the output directory.
        #[arg(long)]
        corpus: bool,
    },
}

fn parse_policy(text: &str) -> Result<PolicySpec> {
    match text.split_once(':') {
        None => Ok(PolicySpec { name: text.to_string(), beta: harness::DEFAULT_BETA }),
        Some((name, beta)) => {
            let beta: f64 = beta.parse().map_err(|_| {
                adwords_lab::Error::invalid("policy", format!("bad beta in `{text}`"))
            })?;
            Ok(PolicySpec { name: name.to_string(), beta })
        }
    }
}

fn parse_instance(text: &str) -> InstanceSource {
    let path = PathBuf::from(text);
    if text.ends_with(".json") || path.exists() {
        InstanceSource::File { path }
    } else {
        InstanceSource::Builtin { name: text.to_string() }
    }
}

fn parse_sweep(text: &str) -> Result<Vec<f64>> {
    let bad = || adwords_lab::Error::invalid("sweep", format!("expected start:end:steps, got `{text}`"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let end: f64 = parts[1].parse().map_err(|_| bad())?;
    let steps: usize = parts[2].parse().map_err(|_| bad())?;
    if steps < 2 || end <= start {
        return Err(bad());
    }
    Ok((0..steps)
        .map(|k| start + (end - start) * k as f64 / (steps - 1) as f64)
        .collect())
}

fn cmd_run(
    config: Option<PathBuf>,
    instance: Option<String>,
    policies: Vec<String>,
    trials: usize,
    seed: u64,
    benchmark: BenchmarkArg,
    output: Option<PathBuf>,
    format: FormatArg,
) -> Result<u8> {
    let cfg = match config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => {
            let instance = instance.ok_or_else(|| {
                adwords_lab::Error::invalid("instance", "--instance or --config is required")
            })?;
            if policies.is_empty() {
                return Err(adwords_lab::Error::invalid("policy", "at least one --policy"));
            }
            ExperimentConfig {
                instance: parse_instance(&instance),
                policies: policies.iter().map(|p| parse_policy(p)).collect::<Result<_>>()?,
                trials,
                rng_seed: seed,
                benchmark: benchmark.into(),
                output,
                format: format.into(),
            }
        }
    };
    let report = run_experiment(&cfg)?;
    match &cfg.output {
        Some(path) => {
            let mut file = std::fs::File::create(path)?;
            emit_report(&report, cfg.format, &mut file)?;
        }
        None => emit_report(&report, cfg.format, &mut std::io::stdout().lock())?,
    }
    Ok(0)
}

fn cmd_verify(opts: VerifyOptions) -> Result<u8> {
    let suite = run_verification_suite(&opts)?;
    for report in &suite.reports {
        let status = if report.passed() { "ok" } else { "FAIL" };
        println!(
            "{status:4} {name}: {checks} checks, {viols} violations",
            name = report.name,
            checks = report.checks,
            viols = report.violations.len()
        );
        for v in report.violations.iter().take(5) {
            println!("       {} (by {:.3e})", v.location, v.magnitude);
        }
    }
    Ok(u8::from(!suite.passed()))
}

fn cmd_alpha(
    beta: Option<f64>,
    sweep: Option<String>,
    figure1: Option<PathBuf>,
    samples: usize,
) -> Result<u8> {
    if let Some(path) = figure1 {
        let beta = beta.unwrap_or(harness::DEFAULT_BETA);
        emit_figure1(beta, samples, &path)?;
        println!("wrote {} samples at beta={beta} to {}", samples, path.display());
        return Ok(0);
    }
    if let Some(spec) = sweep {
        println!("beta,minimizer,minimum");
        for row in sweep_beta(&parse_sweep(&spec)?)? {
            println!("{},{},{}", row.beta, row.minimizer, row.minimum);
        }
        return Ok(0);
    }
    let beta = beta.unwrap_or(harness::DEFAULT_BETA);
    let (minimizer, minimum) = minimize_alpha(beta, 400, 1e-9)?;
    let quad = alpha_at(minimizer, beta, Method::Quadrature)?;
    println!(
        "{}",
        serde_json::json!({
            "beta": beta,
            "alphaStar": minimum,
            "minimizer": minimizer,
            "methodGap": (minimum - quad).abs(),
        })
    );
    Ok(0)
}

fn cmd_adversary(n: usize, target: String) -> Result<u8> {
    let mut policy = match target.as_str() {
        "greedy" | "greedy-oblivious" | "greedy-aware" => {
            GreedyOblivious::new(TieBreak::LowestId)
        }
        other => {
            return Err(adwords_lab::Error::Unknown {
                kind: "target".to_string(),
                name: other.to_string(),
            })
        }
    };
    let tr = gen_adversary(n, &mut policy)?;
    println!(
        "{}",
        serde_json::json!({
            "label": tr.instance.label(),
            "n": n,
            "arrivals": tr.instance.t_len(),
            "alg": tr.alg_value,
            "opt": tr.opt_value,
            "ratio": tr.ratio(),
            "phases": tr.phase_log.len(),
        })
    );
    Ok(0)
}

fn cmd_gen(name: Option<String>, out: PathBuf, whole_corpus: bool) -> Result<u8> {
    if whole_corpus {
        corpus::write_corpus(&out)?;
        println!("wrote {} instances to {}", corpus::CORPUS_NAMES.len(), out.display());
        return Ok(0);
    }
    let name = name.ok_or_else(|| {
        adwords_lab::Error::invalid("name", "--name or --corpus is required")
    })?;
    save_instance(&corpus::builtin(&name)?, &out)?;
    println!("wrote {} to {}", name, out.display());
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Run { config, instance, policies, trials, seed, benchmark, output, format } => {
            cmd_run(config, instance, policies, trials, seed, benchmark, output, format)
        }
        Cmd::Verify { scope, grid, seeds, pairs, rng_seed, corrupt_coupling } => {
            cmd_verify(VerifyOptions {
                scope: scope.into(),
                grid_points: grid,
                outer_seeds: seeds,
                coupling_pairs: pairs,
                rng_seed,
                corrupt_coupling,
            })
        }
        Cmd::Alpha { beta, sweep, figure1, samples } => cmd_alpha(beta, sweep, figure1, samples),
        Cmd::Adversary { n, target } => cmd_adversary(n, target),
        Cmd::Gen { name, out, corpus } => cmd_gen(name, out, corpus),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
