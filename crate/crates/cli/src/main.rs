//! `humbert`: predictions, verification runs, raw counts and quotients for
//! Humbert-Edge curves.
//!
//! Exit codes: 0 when every check passes, 1 when a mathematical check fails,
//! 2 on invalid input or an exceeded budget.

mod render;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use humbert_core::counting::{trace, CacheStats};
use humbert_core::decomp::{decompose, identity_suite, IdentityRow};
use humbert_core::verifier::{full_verify, Verdict, VerificationReport, VerifyOptions};
use humbert_core::{
    random_smooth_curve, Budget, CountCache, CountRecord, CurveMatrix, ExtField, Method, SubsetMask,
};

#[derive(Parser, Debug)]
#[command(
    name = "humbert",
    version,
    about = "Isogeny decomposition of Humbert-Edge curves, with finite-field checks"
)]
struct Cli {
    /// Worker threads for counting (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Omit the timestamp from structured output.
    #[arg(long, global = true)]
    deterministic: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Structured,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the predicted decomposition of JX_n.
    Predict {
        #[arg(long)]
        n: u32,
    },
    /// Count points on the quotient tower and check the decomposition.
    Verify(VerifyArgs),
    /// Count points of one quotient X_T over F_(p^k).
    Count(CountArgs),
    /// Write the quotient curve X_T.
    Quotient {
        #[arg(long)]
        curve: PathBuf,
        /// Comma-separated involution indices, e.g. "0,2"; empty for T = ∅.
        #[arg(long, default_value = "")]
        subset: String,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the closed-form identities for 3 ≤ n ≤ max-n.
    Identities {
        #[arg(long)]
        max_n: u32,
    },
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Curve type for seeded random curves.
    #[arg(long, required_unless_present = "curve")]
    n: Option<u32>,
    /// Primes to test (comma-separated). Required without --curve.
    #[arg(long, value_delimiter = ',')]
    p: Vec<u64>,
    #[arg(long, default_value_t = 3)]
    kmax: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Curves per prime; trial i uses seed + i.
    #[arg(long, default_value_t = 1)]
    trials: u32,
    /// Verify this curve file instead of seeded random curves.
    #[arg(long, conflicts_with = "n")]
    curve: Option<PathBuf>,
    #[arg(long, default_value_t = Method::Auto)]
    method: Method,
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CountArgs {
    #[arg(long)]
    curve: PathBuf,
    #[arg(long, default_value = "")]
    subset: String,
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Must match the curve's prime when given.
    #[arg(long)]
    p: Option<u64>,
    #[arg(long, default_value_t = Method::Auto)]
    method: Method,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Report cache hits and misses.
    #[arg(long)]
    stats: bool,
}

struct Output {
    format: Format,
    deterministic: bool,
}

impl Output {
    fn timestamp(&self) -> Option<u64> {
        if self.deterministic {
            return None;
        }
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs())
    }

    fn structured<T: Serialize>(&self, doc: &T) -> Result<()> {
        println!("{}", serde_json::to_string_pretty(doc)?);
        Ok(())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(t) = cli.threads {
        if t == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()?;
    }
    let out = Output {
        format: cli.format,
        deterministic: cli.deterministic,
    };
    match cli.command {
        Command::Predict { n } => run_predict(n, &out),
        Command::Verify(args) => run_verify(args, &out),
        Command::Count(args) => run_count(args, &out),
        Command::Quotient {
            curve,
            subset,
            out: path,
        } => run_quotient(&curve, &subset, path.as_deref()),
        Command::Identities { max_n } => run_identities(max_n, &out),
    }
}

fn read_curve(path: &Path) -> Result<CurveMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    CurveMatrix::from_json_str(&text)
        .with_context(|| format!("invalid curve file {}", path.display()))
}

fn parse_subset(s: &str) -> Result<SubsetMask> {
    let inner = s.trim().trim_start_matches('{').trim_end_matches('}');
    let mut idx = Vec::new();
    for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let i: u32 = part
            .parse()
            .with_context(|| format!("bad involution index `{part}`"))?;
        if i >= 128 {
            bail!("involution index {i} out of range");
        }
        idx.push(i);
    }
    let mask = SubsetMask::from_indices(idx.iter().copied());
    if mask.len() as usize != idx.len() {
        bail!("repeated involution index in `{s}`");
    }
    Ok(mask)
}

fn open_cache(path: Option<&Path>) -> Result<Option<CountCache>> {
    path.map(|p| CountCache::open(p).with_context(|| format!("opening cache {}", p.display())))
        .transpose()
}

fn run_predict(n: u32, out: &Output) -> Result<ExitCode> {
    let report = decompose(n)?;
    match out.format {
        Format::Table => print!("{}", render::decomposition(&report)),
        Format::Structured => out.structured(&report.to_document())?,
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct Trial {
    seed: Option<u64>,
    report: VerificationReport,
}

#[derive(Serialize)]
struct VerifyDocument {
    command: &'static str,
    kmax: u32,
    method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
    trials: Vec<Trial>,
    verdict: Verdict,
}

fn run_verify(args: VerifyArgs, out: &Output) -> Result<ExitCode> {
    if args.kmax == 0 {
        bail!("--kmax must be at least 1");
    }
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let mut jobs: Vec<(Option<u64>, CurveMatrix)> = Vec::new();
    if let Some(path) = &args.curve {
        let curve = read_curve(path)?;
        if let Some(&p) = args.p.iter().find(|&&p| p != curve.p() as u64) {
            bail!("--p {p} does not match the curve's prime {}", curve.p());
        }
        jobs.push((None, curve));
    } else {
        let n = args.n.expect("clap enforces --n without --curve");
        if args.p.is_empty() {
            bail!("--p is required unless --curve is given");
        }
        for &p in &args.p {
            for i in 0..args.trials as u64 {
                let seed = args.seed.wrapping_add(i);
                jobs.push((Some(seed), random_smooth_curve(n, p, seed)?));
            }
        }
    }
    let cache = open_cache(args.cache.as_deref())?;
    let mut trials = Vec::new();
    for (seed, curve) in jobs {
        let opts = VerifyOptions {
            kmax: args.kmax,
            method: args.method,
            seed: seed.unwrap_or(args.seed),
            budget: Budget::default(),
            ..VerifyOptions::default()
        };
        let report = full_verify(&curve, &opts, cache.as_ref())?;
        if out.format == Format::Table {
            print!("{}", render::verification(seed, &report));
        }
        trials.push(Trial { seed, report });
    }
    let passed = trials.iter().all(|t| t.report.passed());
    let verdict = if passed { Verdict::Pass } else { Verdict::Fail };
    match out.format {
        Format::Table => println!("overall: {}", if passed { "PASS" } else { "FAIL" }),
        Format::Structured => out.structured(&VerifyDocument {
            command: "verify",
            kmax: args.kmax,
            method: args.method,
            timestamp: out.timestamp(),
            trials,
            verdict,
        })?,
    }
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

#[derive(Serialize)]
struct CountDocument {
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
    record: CountRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    cache: Option<StatsEntry>,
}

#[derive(Serialize)]
struct StatsEntry {
    hits: u64,
    misses: u64,
    entries: usize,
}

impl From<CacheStats> for StatsEntry {
    fn from(s: CacheStats) -> Self {
        StatsEntry {
            hits: s.hits,
            misses: s.misses,
            entries: s.entries,
        }
    }
}

fn run_count(args: CountArgs, out: &Output) -> Result<ExitCode> {
    let curve = read_curve(&args.curve)?;
    if let Some(p) = args.p.filter(|&p| p != curve.p() as u64) {
        bail!("--p {p} does not match the curve's prime {}", curve.p());
    }
    if args.k == 0 {
        bail!("--k must be at least 1");
    }
    let subset = parse_subset(&args.subset)?;
    let field = ExtField::new(curve.p() as u64, args.k, args.seed)?;
    let cache = open_cache(args.cache.as_deref())?;
    let record = trace(
        &curve,
        subset,
        &field,
        args.method,
        &Budget::default(),
        cache.as_ref(),
    )?;
    let stats = args
        .stats
        .then(|| cache.as_ref().map(CountCache::stats).unwrap_or_default());
    match out.format {
        Format::Table => {
            println!(
                "T = {}  type {}  F_{}^{}  N = {}  a = {}  ({:?})",
                record.subset,
                record.quotient_type,
                record.p,
                record.k,
                record.n_points,
                record.trace,
                record.source
            );
            if let Some(s) = stats {
                println!(
                    "cache: {} hits, {} misses, {} entries",
                    s.hits, s.misses, s.entries
                );
            }
        }
        Format::Structured => out.structured(&CountDocument {
            command: "count",
            timestamp: out.timestamp(),
            record,
            cache: stats.map(StatsEntry::from),
        })?,
    }
    Ok(ExitCode::SUCCESS)
}

fn run_quotient(curve: &Path, subset: &str, out: Option<&Path>) -> Result<ExitCode> {
    let curve = read_curve(curve)?;
    let q = curve.quotient(parse_subset(subset)?)?;
    let text = q.to_document().to_canonical_string();
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct IdentitiesDocument {
    command: &'static str,
    max_n: u32,
    rows: Vec<IdentityRow>,
    verdict: Verdict,
}

fn run_identities(max_n: u32, out: &Output) -> Result<ExitCode> {
    let rows = identity_suite(max_n)?;
    let passed = rows.iter().all(IdentityRow::holds);
    match out.format {
        Format::Table => print!("{}", render::identities(&rows)),
        Format::Structured => out.structured(&IdentitiesDocument {
            command: "identities",
            max_n,
            verdict: if passed { Verdict::Pass } else { Verdict::Fail },
            rows,
        })?,
    }
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_parse() {
        assert_eq!(parse_subset("").unwrap(), SubsetMask::EMPTY);
        assert_eq!(
            parse_subset("2,0").unwrap(),
            SubsetMask::from_indices([0, 2])
        );
        assert_eq!(
            parse_subset("{0, 3}").unwrap(),
            SubsetMask::from_indices([0, 3])
        );
        assert!(parse_subset("1,1").is_err());
        assert!(parse_subset("x").is_err());
        assert!(parse_subset("200").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
