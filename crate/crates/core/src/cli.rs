//! Command-line front end: argument parsing and artifact rendering.
//!
//! [`run`] turns parsed arguments into the bytes a subcommand emits, so the
//! binary only has to route them to stdout or `--out`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::blocksim::{
    channel_dim, score, subspace_ceiling, threshold_demo, BlockSource, ProjectAndPatch, SweepConfig, SweepMode,
    DEFAULT_SAMPLES,
};
use crate::classical::{classical_rate_comparison, comparison_row, simulate, ComparisonRow, CoinSource};
use crate::error::{Error, Result};
use crate::io::{format_sig, read_density, read_ensemble};
use crate::measures::{average_entropy, fidelity, holevo, vn_entropy};
use crate::purify::photographic_negative_report;
use crate::qmat::DEFAULT_DIM_CAP;
use crate::rates::{rate_report, RateOptions, RateReport};
use crate::selftest;

#[derive(Debug, Parser)]
#[command(name = "mixcomp", version, about = "Compression rates and bounds for ensembles of mixed quantum states")]
pub struct Cli {
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for sweeps and Monte Carlo (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Largest Hilbert-space dimension a block simulation may build.
    #[arg(long, global = true, default_value_t = DEFAULT_DIM_CAP)]
    pub dim_cap: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fidelity between two density matrices.
    Fidelity { a: PathBuf, b: PathBuf },
    /// Von Neumann entropy of a density matrix.
    Entropy { state: PathBuf },
    /// Holevo quantity of an ensemble.
    Holevo {
        #[arg(long)]
        ensemble: PathBuf,
    },
    /// Rate bounds and scheme rates.
    Rates {
        #[command(subcommand)]
        command: RatesCommand,
    },
    /// Canonical purification rates.
    Purify {
        #[command(subcommand)]
        command: PurifyCommand,
    },
    /// The two-coin classical source.
    Classical {
        #[command(subcommand)]
        command: ClassicalCommand,
    },
    /// Finite-block coding experiments.
    Blocksim {
        #[command(subcommand)]
        command: BlocksimCommand,
    },
    /// Run the built-in invariant suites.
    Selftest {
        /// Random instances per suite.
        #[arg(long, default_value_t = 100)]
        cases: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum RatesCommand {
    Report {
        #[arg(long)]
        ensemble: PathBuf,
        /// Same as --format csv.
        #[arg(long)]
        csv: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum PurifyCommand {
    /// Photographic-negative ensemble of dimension d (or d..=d-max).
    Report {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        d_max: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct CoinArgs {
    #[arg(long, default_value_t = 0.5)]
    pub p1: f64,
    #[arg(long, default_value_t = 0.25)]
    pub alpha1: f64,
    #[arg(long, default_value_t = 0.75)]
    pub alpha2: f64,
}

#[derive(Debug, Subcommand)]
pub enum ClassicalCommand {
    /// Compare rates for one source, or along the symmetric flip family.
    Compare {
        #[command(flatten)]
        coins: CoinArgs,
        /// Sweep epsilon over [0, 0.5] for the symmetric flip pair.
        #[arg(long)]
        grid: bool,
        /// Grid intervals.
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
    /// Monte Carlo run of the three-message protocol.
    Simulate {
        #[command(flatten)]
        coins: CoinArgs,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Mc,
    Auto,
}

impl From<ModeArg> for SweepMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => SweepMode::Exact,
            ModeArg::Mc => SweepMode::MonteCarlo,
            ModeArg::Auto => SweepMode::Auto,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum BlocksimCommand {
    /// Score project-and-patch at one rate and block length.
    Run {
        #[arg(long)]
        ensemble: PathBuf,
        #[arg(long = "N", short = 'N')]
        n: usize,
        #[arg(long)]
        rate: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Ceiling below S(rho_bar) and achieved fidelity above it, per N.
    Threshold {
        #[arg(long)]
        ensemble: PathBuf,
        #[arg(long, default_value_t = 0.15)]
        delta: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [4usize, 8, 12])]
        n_list: Vec<usize>,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
}

/// Rendered artifact plus the exit status to report.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub text: String,
    pub success: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text, success: true }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifacts serialize");
    s.push('\n');
    s
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>, seed: Option<u64>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output");
    match seed {
        Some(s) => format!("# seed={s}\n{body}"),
        None => body,
    }
}

fn report_csv(rep: &RateReport) -> String {
    let rows = rep
        .entries
        .iter()
        .map(|e| vec![e.name.clone(), format_sig(e.rate), e.kind.as_str().to_string(), e.description.clone()])
        .collect();
    csv_text(&["name", "rate", "kind", "description"], rows, None)
}

fn report_json(rep: &RateReport) -> String {
    let bracket = rep.qmin_bracket().map(|(lo, hi)| [lo, hi]);
    to_json(&json!({
        "ensemble": rep.ensemble,
        "entries": rep.entries,
        "qmin_bracket": bracket,
    }))
}

fn comparison_record(label: String, row: &ComparisonRow) -> Vec<String> {
    vec![
        label,
        format_sig(row.s_rho_bar),
        format_sig(row.h_p),
        format_sig(row.xi),
        row.upsilon.map(format_sig).unwrap_or_default(),
        format_sig(row.chi),
        format_sig(row.conjectured_mi),
    ]
}

const COMPARISON_HEADER: [&str; 7] = ["epsilon_or_params", "S_rho_bar", "H_p", "Xi", "Upsilon", "chi", "conjectured_MI"];

fn classical_compare(cli: &Cli, coins: &CoinArgs, grid: bool, steps: usize) -> Result<String> {
    let format = cli.format.unwrap_or(Format::Csv);
    if grid {
        if steps == 0 {
            return Err(Error::Domain("--steps must be at least 1".into()));
        }
        let eps: Vec<f64> = (0..=steps).map(|k| 0.5 * k as f64 / steps as f64).collect();
        let rows = eps
            .iter()
            .map(|&e| comparison_row(&CoinSource::symmetric_flip(e)?).map(|r| (e, r)))
            .collect::<Result<Vec<_>>>()?;
        return Ok(match format {
            Format::Csv => csv_text(
                &COMPARISON_HEADER,
                rows.iter().map(|(e, r)| comparison_record(format_sig(*e), r)).collect(),
                None,
            ),
            Format::Json => to_json(
                &rows
                    .iter()
                    .map(|(e, r)| json!({"epsilon": e, "rates": r}))
                    .collect::<Vec<_>>(),
            ),
        });
    }
    let src = CoinSource::new(coins.p1, coins.alpha1, coins.alpha2)?;
    Ok(match format {
        Format::Csv => {
            let label = format!(
                "p1={};alpha1={};alpha2={}",
                format_sig(src.p1),
                format_sig(src.alpha1),
                format_sig(src.alpha2)
            );
            csv_text(&COMPARISON_HEADER, vec![comparison_record(label, &comparison_row(&src)?)], None)
        }
        Format::Json => report_json(&classical_rate_comparison(&src)?),
    })
}

fn blocksim_run(cli: &Cli, ensemble: &Path, n: usize, rate: f64, mode: ModeArg, samples: usize) -> Result<String> {
    let base = read_ensemble(ensemble)?;
    let source = BlockSource::with_cap(base, n, cli.dim_cap)?.diagonalized();
    let scheme = ProjectAndPatch::for_source(&source, rate)?;
    let k = channel_dim(rate, n, source.block_dim())?;
    let config = SweepConfig {
        mode: mode.into(),
        samples,
        seed: cli.seed,
    };
    let sc = score(&source, &scheme, config)?;
    Ok(to_json(&json!({
        "rate": rate,
        "realized_rate": (k as f64).log2() / n as f64,
        "channel_dim": k,
        "N": n,
        "global_fid": sc.global,
        "local_fid": sc.local,
        "global_std_error": sc.global_std_error,
        "local_std_error": sc.local_std_error,
        "ceiling": subspace_ceiling(&source, k),
        "eta": scheme.subspace.eta(),
        "method": sc.method,
        "strings": sc.strings,
        "seed": cli.seed,
    })))
}

fn blocksim_threshold(cli: &Cli, ensemble: &Path, delta: f64, n_list: &[usize], mode: ModeArg, samples: usize) -> Result<String> {
    let base = read_ensemble(ensemble)?;
    let config = SweepConfig {
        mode: mode.into(),
        samples,
        seed: cli.seed,
    };
    let rows = threshold_demo(&base, delta, n_list, cli.dim_cap, config)?;
    Ok(match cli.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&json!({"seed": cli.seed, "delta": delta, "rows": rows})),
        Format::Csv => csv_text(
            &[
                "N",
                "rate_below",
                "dim_below",
                "ceiling_below",
                "rate_above",
                "dim_above",
                "eta_above",
                "achieved_above",
                "achieved_std_error",
                "method",
            ],
            rows.iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        format_sig(r.rate_below),
                        r.dim_below.to_string(),
                        format_sig(r.ceiling_below),
                        format_sig(r.rate_above),
                        r.dim_above.to_string(),
                        format_sig(r.eta_above),
                        format_sig(r.achieved_above),
                        format_sig(r.achieved_std_error),
                        serde_json::to_value(r.method).expect("enum serializes").as_str().unwrap_or("").to_string(),
                    ]
                })
                .collect(),
            Some(cli.seed),
        ),
    })
}

fn dispatch(cli: &Cli) -> Result<Output> {
    let text = match &cli.command {
        Command::Fidelity { a, b } => {
            let f = fidelity(&read_density(a)?, &read_density(b)?)?;
            to_json(&json!({ "fidelity": f }))
        }
        Command::Entropy { state } => to_json(&json!({ "entropy": vn_entropy(&read_density(state)?) })),
        Command::Holevo { ensemble } => {
            let e = read_ensemble(ensemble)?;
            to_json(&json!({
                "holevo": holevo(&e),
                "S_rho_bar": vn_entropy(&e.average()),
                "average_entropy": average_entropy(&e),
            }))
        }
        Command::Rates {
            command: RatesCommand::Report { ensemble, csv },
        } => {
            let rep = rate_report(&read_ensemble(ensemble)?, RateOptions::default())?;
            if *csv || cli.format == Some(Format::Csv) {
                report_csv(&rep)
            } else {
                report_json(&rep)
            }
        }
        Command::Purify {
            command: PurifyCommand::Report { d, d_max },
        } => {
            let last = d_max.unwrap_or(*d);
            if last < *d {
                return Err(Error::Domain(format!("--d-max {last} is below --d {d}")));
            }
            let reports = (*d..=last).map(photographic_negative_report).collect::<Result<Vec<_>>>()?;
            match (cli.format, d_max) {
                (Some(Format::Csv), _) => csv_text(
                    &["d", "q", "chi", "gap", "top_eigenvalue"],
                    reports
                        .iter()
                        .map(|r| {
                            vec![
                                r.d.to_string(),
                                format_sig(r.q),
                                format_sig(r.chi),
                                format_sig(r.gap),
                                format_sig(r.spectrum[0]),
                            ]
                        })
                        .collect(),
                    None,
                ),
                (_, None) => to_json(&reports[0]),
                (_, Some(_)) => to_json(&reports),
            }
        }
        Command::Classical {
            command: ClassicalCommand::Compare { coins, grid, steps },
        } => classical_compare(cli, coins, *grid, *steps)?,
        Command::Classical {
            command: ClassicalCommand::Simulate { coins, n },
        } => {
            let src = CoinSource::new(coins.p1, coins.alpha1, coins.alpha2)?;
            let summary = simulate(&src, *n, cli.seed)?.summary(&src);
            to_json(&json!({ "source": src, "summary": summary }))
        }
        Command::Blocksim {
            command:
                BlocksimCommand::Run {
                    ensemble,
                    n,
                    rate,
                    mode,
                    samples,
                },
        } => blocksim_run(cli, ensemble, *n, *rate, *mode, *samples)?,
        Command::Blocksim {
            command:
                BlocksimCommand::Threshold {
                    ensemble,
                    delta,
                    n_list,
                    mode,
                    samples,
                },
        } => blocksim_threshold(cli, ensemble, *delta, n_list, *mode, *samples)?,
        Command::Selftest { cases } => {
            let rep = selftest::run(cli.seed, *cases);
            return Ok(Output {
                text: to_json(&rep),
                success: rep.ok(),
            });
        }
    };
    Ok(Output::ok(text))
}

/// Runs one parsed invocation on a pool of `--workers` threads.
pub fn run(cli: &Cli) -> Result<Output> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Error::Domain("--workers must be at least 1".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
    pool.install(|| dispatch(cli))
}

/// `{"error": kind, "message": text}` for stderr.
pub fn error_json(kind: &str, message: &str) -> String {
    json!({ "error": kind, "message": message }).to_string()
}
