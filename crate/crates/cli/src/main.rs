//! `shellkp`: command-line front end.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::RunConfig;
use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "shellkp", version, about = "Spectra of Schrödinger operators with point interactions on concentric spheres")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the result here instead of stdout (run metadata goes to `<out>.meta.json`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for randomized sweeps.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print the merged configuration as TOML and exit.
    #[arg(long, global = true)]
    echo_config: bool,

    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    delta: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    chi: Option<f64>,
    /// Shell spacing.
    #[arg(long, global = true)]
    d: Option<f64>,
    /// Radius of the first shell (default d/2).
    #[arg(long, global = true)]
    offset: Option<f64>,
    /// Number of shells in truncated domains.
    #[arg(long, global = true)]
    count_hint: Option<usize>,
    /// Space dimension.
    #[arg(long, global = true)]
    nu: Option<u32>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Band edges of the 1D comparison operator.
    Bands {
        #[arg(long)]
        max_bands: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        e_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        e_max: Option<f64>,
    },
    /// Asymptotic class of the interaction.
    Classify,
    /// Periodic or antiperiodic ground state at the spectrum bottom.
    GroundSymmetry,
    /// Band/gap spectral map of the full operator.
    SpectrumMap {
        #[arg(long, allow_negative_numbers = true)]
        e_cutoff: Option<f64>,
        #[arg(long)]
        l_min: Option<u32>,
        #[arg(long)]
        l_max: Option<u32>,
        #[arg(long)]
        r_max: Option<f64>,
    },
    /// Transfer-matrix norm along whole periods.
    TransferNorm {
        #[arg(long, allow_negative_numbers = true)]
        energy: Option<f64>,
        #[arg(long)]
        l: Option<u32>,
        #[arg(long)]
        x0: Option<f64>,
        #[arg(long)]
        periods: Option<usize>,
    },
    /// Channel eigenvalues inside one gap.
    GapEigs {
        #[arg(long)]
        gap_index: Option<usize>,
        #[arg(long)]
        l_min: Option<u32>,
        #[arg(long)]
        l_max: Option<u32>,
        #[arg(long)]
        r_max: Option<f64>,
    },
    /// Eigenvalues below the spectrum bottom in two dimensions.
    Welsh {
        #[arg(long)]
        n_wanted: Option<usize>,
        #[arg(long)]
        r_max: Option<f64>,
        /// CSV path for the Kepler phase trace.
        #[arg(long)]
        trace: Option<String>,
    },
    /// Weyl m-function over a decreasing epsilon ladder.
    MFunction {
        #[arg(long, allow_negative_numbers = true)]
        energy: Option<f64>,
        #[arg(long)]
        l: Option<u32>,
        #[arg(long, value_delimiter = ',')]
        epsilons: Option<Vec<f64>>,
        #[arg(long)]
        x0: Option<f64>,
        #[arg(long)]
        r_max: Option<f64>,
    },
    /// Random comparison of gap eigenvalue counts against finite differences.
    OracleCheck {
        #[arg(long)]
        configs: Option<usize>,
        /// Coarse grid step in units of d.
        #[arg(long)]
        h: Option<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Bands { .. } => "bands",
            Command::Classify => "classify",
            Command::GroundSymmetry => "ground-symmetry",
            Command::SpectrumMap { .. } => "spectrum-map",
            Command::TransferNorm { .. } => "transfer-norm",
            Command::GapEigs { .. } => "gap-eigs",
            Command::Welsh { .. } => "welsh",
            Command::MFunction { .. } => "m-function",
            Command::OracleCheck { .. } => "oracle-check",
        }
    }
}

fn set<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

/// Flags win over the file.
fn merge(cfg: &mut RunConfig, cli: &Cli) {
    let c = &cli.common;
    set(&mut cfg.nu, c.nu);
    let i = &mut cfg.interaction;
    set(&mut i.alpha, c.alpha);
    set(&mut i.beta, c.beta);
    set(&mut i.gamma, c.gamma);
    set(&mut i.delta, c.delta);
    set(&mut i.chi, c.chi);
    let g = &mut cfg.geometry;
    set(&mut g.d, c.d);
    set(&mut g.offset, c.offset);
    set(&mut g.count_hint, c.count_hint);
    match &cli.command {
        Command::Bands { max_bands, e_min, e_max } => {
            set(&mut cfg.bands.max_bands, *max_bands);
            set(&mut cfg.bands.e_min, *e_min);
            set(&mut cfg.bands.e_max, *e_max);
        }
        Command::SpectrumMap { e_cutoff, l_min, l_max, r_max } => {
            let s = &mut cfg.spectrum_map;
            set(&mut s.e_cutoff, *e_cutoff);
            set(&mut s.l_min, *l_min);
            set(&mut s.l_max, *l_max);
            set(&mut s.r_max, *r_max);
        }
        Command::TransferNorm { energy, l, x0, periods } => {
            let s = &mut cfg.transfer_norm;
            set(&mut s.energy, *energy);
            set(&mut s.l, *l);
            set(&mut s.x0, *x0);
            set(&mut s.periods, *periods);
        }
        Command::GapEigs { gap_index, l_min, l_max, r_max } => {
            let s = &mut cfg.gap_eigs;
            set(&mut s.gap_index, *gap_index);
            set(&mut s.l_min, *l_min);
            set(&mut s.l_max, *l_max);
            set(&mut s.r_max, *r_max);
        }
        Command::Welsh { n_wanted, r_max, trace } => {
            let s = &mut cfg.welsh;
            set(&mut s.n_wanted, *n_wanted);
            set(&mut s.r_max, *r_max);
            set(&mut s.trace, trace.clone());
        }
        Command::MFunction { energy, l, epsilons, x0, r_max } => {
            let s = &mut cfg.m_function;
            set(&mut s.energy, *energy);
            set(&mut s.l, *l);
            set(&mut s.epsilons, epsilons.clone());
            set(&mut s.x0, *x0);
            set(&mut s.r_max, *r_max);
        }
        Command::OracleCheck { configs, h } => {
            set(&mut cfg.oracle_check.configs, *configs);
            set(&mut cfg.oracle_check.h, *h);
        }
        Command::Classify | Command::GroundSymmetry => {}
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    merge(&mut cfg, &cli);
    if cli.echo_config {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::config("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    }
    let ctx = commands::Context {
        cfg: &cfg,
        seed: cli.seed.unwrap_or(0),
    };
    let result = match &cli.command {
        Command::Bands { .. } => commands::bands(&ctx)?,
        Command::Classify => commands::classify_cmd(&ctx)?,
        Command::GroundSymmetry => commands::ground_symmetry(&ctx)?,
        Command::SpectrumMap { .. } => commands::spectrum_map(&ctx)?,
        Command::TransferNorm { .. } => commands::transfer_norm(&ctx)?,
        Command::GapEigs { .. } => commands::gap_eigs(&ctx)?,
        Command::Welsh { .. } => commands::welsh(&ctx)?,
        Command::MFunction { .. } => commands::m_function(&ctx)?,
        Command::OracleCheck { .. } => commands::oracle_check(&ctx)?,
    };
    let format = cli.format.unwrap_or(result.default_format);
    let text = match format {
        Format::Json => result.json,
        Format::Csv => result.csv.render()?,
    };
    match &cli.out {
        Some(path) => {
            std::fs::write(path, text)?;
            let meta = serde_json::json!({
                "command": cli.command.name(),
                "version": env!("CARGO_PKG_VERSION"),
                "jobs": cli.jobs.unwrap_or_else(rayon::current_num_threads),
                "seed": cli.seed,
                "elapsed_seconds": started.elapsed().as_secs_f64(),
            });
            let mut meta_path = path.clone().into_os_string();
            meta_path.push(".meta.json");
            std::fs::write(meta_path, serde_json::to_string_pretty(&meta).expect("plain json") + "\n")?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => e.exit(),
            _ => {
                let err = CliError::config(e.to_string().lines().next().unwrap_or("bad arguments").trim_start_matches("error: "));
                eprintln!("{}", err.line());
                std::process::exit(err.exit_code());
            }
        },
    };
    if let Err(e) = run(cli) {
        eprintln!("{}", e.line());
        std::process::exit(e.exit_code());
    }
}
