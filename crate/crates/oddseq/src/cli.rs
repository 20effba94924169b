//! Argument parsing and subcommand drivers.

use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use oddseq_core::asympt::{
    moment_asymptotic, peak_density, peak_r, QuadratureSpec, SaddleFunction, IMAG_TOLERANCE,
};
use oddseq_core::boltzmann::{sample_exact, sample_free_into, stream_rng, BoltzmannParams, SampleRecord, Side};
use oddseq_core::exact::{ln_bigint, ln_biguint, ou_peak_row, rank_distribution, rank_moments};
use oddseq_core::stats::LimitSuiteConfig;
use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, Result};
use crate::output::{format_exp, sink, write_report, write_table, Format, Metadata, Table};
use crate::verify::{limits_suite, modular_suite, MODULAR_TOLERANCE};

/// Largest `n` for the exact q-series tables.
pub const EXACT_N_LIMIT: usize = 20_000;
/// Largest `n` for a full rank distribution.
pub const RANKDIST_N_LIMIT: usize = 5_000;
/// Largest `n` for which `saddle` also prints exact peak counts.
pub const SADDLE_EXACT_LIMIT: u64 = 4_000;
pub const MAX_MOMENT: usize = 32;

#[derive(Debug, Parser)]
#[command(name = "oddseq", version, about = "Exact counts, asymptotics and limit laws for odd unimodal sequences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedArg {
    Fixed(u64),
    Auto,
}

impl FromStr for SeedArg {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            Ok(SeedArg::Auto)
        } else {
            s.parse().map(SeedArg::Fixed).map_err(|_| format!("expected an unsigned integer or `auto`, got `{s}`"))
        }
    }
}

impl SeedArg {
    /// Resolves `auto` to a fresh seed and logs it.
    pub fn resolve(self) -> u64 {
        match self {
            SeedArg::Fixed(s) => s,
            SeedArg::Auto => {
                let s = rand::random::<u64>();
                eprintln!("oddseq: generated seed {s}");
                s
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Boltzmann model with free total size.
    Free,
    /// Rejection down to total size exactly `n`.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Modular,
    Limits,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact counts and rank moments for n = 0..=n_max.
    Exact {
        #[arg(long)]
        n_max: usize,
        /// Comma-separated moment orders; 0 is the plain count.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        moments: Vec<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Rank distribution ou(m, n) for one n.
    Rankdist {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Kloosterman-Bessel asymptotics against exact moments.
    Asympt {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        ell: Vec<usize>,
        /// Truncation of the k-sum; default is the largest odd k <= sqrt(n).
        #[arg(long)]
        k_max: Option<u64>,
        /// Gauss-Legendre nodes per panel.
        #[arg(long, default_value_t = 64)]
        nodes: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Saddle-point approximation to counts by peak.
    Saddle {
        #[arg(long)]
        n: u64,
        /// A single peak index; default is every index with non-negligible density.
        #[arg(long)]
        m: Option<u64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Boltzmann samples as JSON lines.
    Sample {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        count: u64,
        #[arg(long, value_enum, default_value_t = Mode::Free)]
        mode: Mode,
        /// An unsigned integer or `auto`.
        #[arg(long, required = true)]
        seed: SeedArg,
        /// Workers; each owns the stream `(seed, worker)`.
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Per-draw rejection budget in exact mode.
        #[arg(long, default_value_t = 100_000_000)]
        max_attempts: u64,
        /// Order statistics reported per side.
        #[arg(long, default_value_t = 3)]
        t_max: u64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run a verification suite and emit a JSON report.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Required by the randomized `limits` suite.
        #[arg(long)]
        seed: Option<SeedArg>,
        /// Residual tolerance of the modular suite.
        #[arg(long, default_value_t = MODULAR_TOLERANCE)]
        tolerance: f64,
        #[arg(long)]
        draws: Option<u64>,
        #[arg(long)]
        sample_n: Option<u64>,
        #[arg(long)]
        mean_n: Option<u64>,
        #[arg(long)]
        ks_threshold: Option<f64>,
        #[arg(long)]
        joint_threshold: Option<f64>,
        #[arg(long)]
        factor_threshold: Option<f64>,
        #[arg(long)]
        mean_sigmas: Option<f64>,
        #[arg(long)]
        product_threshold: Option<f64>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

/// Runs one parsed invocation; `args` is the raw command line for metadata.
pub fn run(cli: Cli, args: &[String]) -> Result<()> {
    match cli.command {
        Command::Exact { n_max, moments, out } => cmd_exact(args, n_max, &moments, &out),
        Command::Rankdist { n, out } => cmd_rankdist(args, n, &out),
        Command::Asympt { n, ell, k_max, nodes, out } => cmd_asympt(args, &n, &ell, k_max, nodes, &out),
        Command::Saddle { n, m, out } => cmd_saddle(args, n, m, &out),
        Command::Sample { n, count, mode, seed, threads, max_attempts, t_max, output } => {
            let cfg = SampleConfig { n, count, mode, seed: seed.resolve(), threads, max_attempts, t_max };
            cmd_sample(args, &cfg, output)
        }
        Command::Verify {
            suite,
            seed,
            tolerance,
            draws,
            sample_n,
            mean_n,
            ks_threshold,
            joint_threshold,
            factor_threshold,
            mean_sigmas,
            product_threshold,
            output,
        } => match suite {
            Suite::Modular => cmd_verify_modular(args, tolerance, output),
            Suite::Limits => {
                let seed = seed.ok_or_else(|| {
                    CliError::Usage("the limits suite is randomized: pass --seed N or --seed auto".into())
                })?;
                let mut cfg = LimitSuiteConfig { seed: seed.resolve(), ..Default::default() };
                macro_rules! over {
                    ($($f:ident),*) => { $( if let Some(v) = $f { cfg.$f = v; } )* };
                }
                over!(draws, sample_n, mean_n, ks_threshold, joint_threshold, factor_threshold, mean_sigmas, product_threshold);
                cmd_verify_limits(args, &cfg, output)
            }
        },
    }
}

fn resource_guard(what: &str, n: u64, limit: u64) -> Result<()> {
    if n > limit {
        return Err(oddseq_core::Error::Resource(format!("{what}: n = {n} exceeds the limit {limit}")).into());
    }
    Ok(())
}

fn emit(out: &OutputArgs, meta: &mut Metadata, table: &Table) -> Result<()> {
    meta.finish();
    let mut w = sink(out.output.as_deref())?;
    write_table(&mut *w, meta, table, out.format)
}

fn column_name(j: usize) -> String {
    if j == 0 {
        "ou".into()
    } else {
        format!("ou_{j}")
    }
}

pub fn cmd_exact(args: &[String], n_max: usize, moments: &[usize], out: &OutputArgs) -> Result<()> {
    resource_guard("exact", n_max as u64, EXACT_N_LIMIT as u64)?;
    let top = moments.iter().copied().max().unwrap_or(0);
    if top > MAX_MOMENT {
        return Err(CliError::Usage(format!("moment order {top} exceeds {MAX_MOMENT}")));
    }
    let mut meta = Metadata::start(args, None);
    let rows = rank_moments(n_max, top);
    let mut table = Table::new(std::iter::once("n".to_string()).chain(moments.iter().map(|&j| column_name(j))));
    for n in 0..=n_max {
        let mut r = vec![n.to_string()];
        r.extend(moments.iter().map(|&j| rows[j][n].to_string()));
        table.push(r);
    }
    emit(out, &mut meta, &table)
}

pub fn cmd_rankdist(args: &[String], n: usize, out: &OutputArgs) -> Result<()> {
    resource_guard("rankdist", n as u64, RANKDIST_N_LIMIT as u64)?;
    let mut meta = Metadata::start(args, None);
    let law = rank_distribution(n);
    meta.set("n", n);
    meta.set("total", law.total().to_string());
    let mut table = Table::new(["m", "count"]);
    for (m, c) in &law.counts {
        table.push(vec![m.to_string(), c.to_string()]);
    }
    emit(out, &mut meta, &table)
}

pub fn cmd_asympt(
    args: &[String],
    ns: &[u64],
    ells: &[usize],
    k_max: Option<u64>,
    nodes: usize,
    out: &OutputArgs,
) -> Result<()> {
    if let Some(&l) = ells.iter().find(|&&l| l % 2 == 1) {
        return Err(CliError::Usage(format!(
            "ell = {l} is odd: rank symmetry ou(-m, n) = ou(m, n) makes every odd moment vanish"
        )));
    }
    let n_max = ns.iter().copied().max().unwrap_or(0);
    resource_guard("asympt", n_max, EXACT_N_LIMIT as u64)?;
    let top = ells.iter().copied().max().unwrap_or(0);
    if top > MAX_MOMENT {
        return Err(CliError::Usage(format!("moment order {top} exceeds {MAX_MOMENT}")));
    }
    let quad = QuadratureSpec::with_nodes(nodes)?;
    let mut meta = Metadata::start(args, None);
    meta.set("quadrature", serde_json::to_value(quad)?);
    meta.set(
        "k_max",
        match k_max {
            Some(k) => json!(k),
            None => json!("largest odd k <= sqrt(n)"),
        },
    );
    let exact = rank_moments(n_max as usize, top);
    let mut table = Table::new(["n", "ell", "exact", "asymptotic", "ratio"]);
    let mut warnings = Vec::new();
    for &l in ells {
        for &n in ns {
            let a = moment_asymptotic(n, l, k_max, &quad)?;
            if a.imag_warning() {
                let msg = format!("n={n} ell={l}: imaginary part {:.3e} of the real part exceeds {IMAG_TOLERANCE:e}", a.imag_ratio());
                eprintln!("oddseq: warning: {msg}");
                warnings.push(msg);
            }
            let e = &exact[l][n as usize];
            let ratio = match ln_bigint(e) {
                Ok(le) => format!("{:.12}", (a.ln_value() - le).exp()),
                Err(_) => "nan".into(),
            };
            table.push(vec![n.to_string(), l.to_string(), e.to_string(), format_exp(a.ln_value()), ratio]);
        }
    }
    if !warnings.is_empty() {
        meta.set("warnings", warnings);
    }
    emit(out, &mut meta, &table)
}

pub fn cmd_saddle(args: &[String], n: u64, m: Option<u64>, out: &OutputArgs) -> Result<()> {
    if n == 0 {
        return Err(CliError::Usage("saddle needs n >= 1".into()));
    }
    let ms: Vec<u64> = match m {
        Some(m) => vec![m],
        None => {
            let nf = n as f64;
            let dens: Vec<f64> = (0..=(n - 1) / 2).map(|m| peak_density(nf, m as f64)).collect();
            let top = dens.iter().copied().fold(0.0, f64::max);
            (0..dens.len() as u64).filter(|&m| dens[m as usize] >= 1e-12 * top).collect()
        }
    };
    let exact = (n <= SADDLE_EXACT_LIMIT).then(|| ou_peak_row(n as usize));
    let mut meta = Metadata::start(args, None);
    meta.set("n", n);
    let mut table = Table::new(["m", "r", "f2", "ln_saddle", "saddle", "peak_density", "exact", "ratio"]);
    for m in ms {
        let f = SaddleFunction::new(n, m)?;
        let ls = f.ln_saddle();
        let (ex, ratio) = match exact.as_ref().and_then(|row| row.get(m as usize)) {
            Some(c) if c.bits() > 0 => (c.to_string(), format!("{:.12e}", (ls - ln_biguint(c)).exp())),
            Some(c) => (c.to_string(), String::new()),
            None => (String::new(), String::new()),
        };
        table.push(vec![
            m.to_string(),
            format!("{:.12}", peak_r(n as f64, m as f64)),
            format!("{:.12e}", f.f2()),
            format!("{ls:.12}"),
            format_exp(ls),
            format!("{:.12e}", peak_density(n as f64, m as f64)),
            ex,
            ratio,
        ]);
    }
    emit(out, &mut meta, &table)
}

#[derive(Debug, Clone)]
pub struct SampleConfig {
    pub n: u64,
    pub count: u64,
    pub mode: Mode,
    pub seed: u64,
    pub threads: usize,
    pub max_attempts: u64,
    pub t_max: u64,
}

#[derive(Debug, Serialize)]
struct SmallCounts<'a> {
    left: &'a [u64],
    right: &'a [u64],
}

#[derive(Debug, Serialize)]
struct SampleLine<'a> {
    m: u64,
    #[serde(rename = "N")]
    weight: u64,
    rank: i64,
    peak: u64,
    y_left: Vec<u64>,
    y_right: Vec<u64>,
    x_small: SmallCounts<'a>,
}

fn head(x: &[u64], k: usize) -> &[u64] {
    &x[..x.len().min(k)]
}

fn record_line(r: &SampleRecord, t_max: u64, k_n: usize) -> serde_json::Result<String> {
    let ys = |side| (1..=t_max).map_while(|t| r.largest_part(side, t)).collect();
    serde_json::to_string(&SampleLine {
        m: r.m,
        weight: r.weight(),
        rank: r.rank(),
        peak: r.peak(),
        y_left: ys(Side::Left),
        y_right: ys(Side::Right),
        x_small: SmallCounts { left: head(&r.x_left, k_n), right: head(&r.x_right, k_n) },
    })
}

/// Draws for one worker: JSON lines plus total rejection attempts.
fn worker(params: &BoltzmannParams, cfg: &SampleConfig, w: usize, quota: u64, k_n: usize) -> Result<(Vec<String>, u64)> {
    let mut rng = stream_rng(cfg.seed, w as u64);
    let mut lines = Vec::with_capacity(quota as usize);
    let mut attempts = 0;
    let mut rec = SampleRecord::default();
    for _ in 0..quota {
        match cfg.mode {
            Mode::Free => {
                sample_free_into(params, &mut rng, &mut rec);
                attempts += 1;
                lines.push(record_line(&rec, cfg.t_max, k_n)?);
            }
            Mode::Exact => {
                let s = sample_exact(params, &mut rng, cfg.max_attempts)?;
                attempts += s.attempts;
                lines.push(record_line(&s.record, cfg.t_max, k_n)?);
            }
        }
    }
    Ok((lines, attempts))
}

/// Records are reproducible given `(seed, threads)`: worker `w` owns stream
/// `w` and a contiguous block of the output.
pub fn sample_lines(cfg: &SampleConfig) -> Result<(Vec<String>, u64)> {
    if cfg.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let params = BoltzmannParams::new(cfg.n)?;
    let k_n = ((cfg.n as f64).powf(0.25).floor() as usize).max(1);
    let t = cfg.threads as u64;
    let quotas: Vec<u64> = (0..t).map(|w| cfg.count / t + u64::from(w < cfg.count % t)).collect();
    let parts: Vec<Result<(Vec<String>, u64)>> = if cfg.threads == 1 {
        vec![worker(&params, cfg, 0, cfg.count, k_n)]
    } else {
        std::thread::scope(|sc| {
            let handles: Vec<_> = quotas
                .iter()
                .enumerate()
                .map(|(w, &q)| {
                    let params = &params;
                    sc.spawn(move || worker(params, cfg, w, q, k_n))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("sampling worker panicked")).collect()
        })
    };
    let mut lines = Vec::with_capacity(cfg.count as usize);
    let mut attempts = 0;
    for p in parts {
        let (l, a) = p?;
        lines.extend(l);
        attempts += a;
    }
    Ok((lines, attempts))
}

pub fn cmd_sample(args: &[String], cfg: &SampleConfig, output: Option<PathBuf>) -> Result<()> {
    let mut meta = Metadata::start(args, Some(cfg.seed));
    let (lines, attempts) = sample_lines(cfg)?;
    let k_n = ((cfg.n as f64).powf(0.25).floor() as u64).max(1);
    meta.set("n", cfg.n);
    meta.set("count", cfg.count);
    meta.set("mode", format!("{:?}", cfg.mode).to_lowercase());
    meta.set("threads", cfg.threads);
    meta.set("rng", "ChaCha8, stream = worker index");
    meta.set("x_small_parts", k_n);
    meta.set("attempts", attempts);
    meta.finish();
    let mut w = sink(output.as_deref())?;
    writeln!(w, "{}", serde_json::to_string(&json!({ "metadata": meta }))?)?;
    for l in &lines {
        writeln!(w, "{l}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_verify_modular(args: &[String], tol: f64, output: Option<PathBuf>) -> Result<()> {
    let mut meta = Metadata::start(args, None);
    let report = modular_suite(tol)?;
    meta.finish();
    write_report(&mut *sink(output.as_deref())?, &meta, &report)?;
    if report.pass {
        Ok(())
    } else {
        let failed = report.results.iter().filter(|r| !r.pass).count();
        Err(CliError::CheckFailed(format!("{failed} modular identities above tolerance {tol:e}")))
    }
}

pub fn cmd_verify_limits(args: &[String], cfg: &LimitSuiteConfig, output: Option<PathBuf>) -> Result<()> {
    let mut meta = Metadata::start(args, Some(cfg.seed));
    let report = limits_suite(cfg);
    meta.finish();
    write_report(&mut *sink(output.as_deref())?, &meta, &report)?;
    if report.pass {
        Ok(())
    } else {
        let failed: Vec<_> = report.report.checks.iter().filter(|c| c.mandatory && !c.pass).map(|c| c.name.as_str()).collect();
        Err(CliError::CheckFailed(format!("limit checks failed: {}", failed.join(", "))))
    }
}
