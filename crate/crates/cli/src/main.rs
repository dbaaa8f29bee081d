use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

use commands::CliError;

#[derive(Parser, Debug)]
#[command(name = "oneshot-info", version, about = "One-shot entropies, typical sets and coding simulations")]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Enumeration cap (largest support, member set or channel table).
    #[arg(long, global = true)]
    cap: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct Budget {
    /// Total error budget ε.
    #[arg(long)]
    eps: f64,
    /// Four comma-separated parts ε0,ε1,ε2,ε3 (default: equal quarters).
    #[arg(long, value_delimiter = ',')]
    eps_split: Option<Vec<f64>>,
    /// Use this δ instead of searching for one.
    #[arg(long)]
    delta: Option<f64>,
    /// Grid step of the δ search.
    #[arg(long, default_value_t = oneshot_info::typical::DEFAULT_DELTA_STEP)]
    delta_step: f64,
}

#[derive(Args, Debug, Clone)]
pub struct Sim {
    #[arg(long)]
    trials: u64,
    /// Master seed; trial t uses stream t of it.
    #[arg(long)]
    seed: u64,
    /// Average the exact error given each draw of the shared randomness.
    #[arg(long)]
    exact: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Shannon, H0, H∞ and H-∞ of a distribution (all axes jointly).
    Entropy {
        #[arg(long)]
        pmf: PathBuf,
    },
    /// Smooth entropy of order 0, inf or -inf.
    Smooth {
        #[arg(long)]
        pmf: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        order: String,
        #[arg(long)]
        eps: f64,
        /// Conditional form: target axis (requires --given).
        #[arg(long, requires = "given")]
        target: Option<String>,
        #[arg(long, requires = "target")]
        given: Option<String>,
        /// Use the exhaustive reference solver.
        #[arg(long)]
        oracle: bool,
    },
    /// Typical set, its Ξ bounds and tail mass.
    Typical {
        #[arg(long)]
        pmf: PathBuf,
        #[arg(long)]
        delta: f64,
    },
    /// Smallest grid δ whose typical set misses at most ε of the mass.
    FindDelta {
        #[arg(long)]
        pmf: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = oneshot_info::typical::DEFAULT_DELTA_STEP)]
        delta_step: f64,
    },
    /// Distributed source coding: lower bounds and achievable lengths.
    SwRegion {
        #[arg(long)]
        pmf: PathBuf,
        /// Blocklength: use the n-fold i.i.d. extension.
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[command(flatten)]
        budget: Budget,
    },
    /// Distributed source coding: simulate the hash protocol.
    SwSim {
        #[arg(long)]
        pmf: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[command(flatten)]
        budget: Budget,
        #[command(flatten)]
        sim: Sim,
        /// Code lengths lx,ly (default: ceiled achievable lengths).
        #[arg(long, value_delimiter = ',')]
        lengths: Option<Vec<u32>>,
    },
    /// Multiple-access channel: achievable rate caps.
    MacRegion {
        #[arg(long)]
        px: PathBuf,
        #[arg(long)]
        py: PathBuf,
        #[arg(long)]
        channel: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[command(flatten)]
        budget: Budget,
    },
    /// Multiple-access channel: simulate random codes.
    MacSim {
        #[arg(long)]
        px: PathBuf,
        #[arg(long)]
        py: PathBuf,
        #[arg(long)]
        channel: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[command(flatten)]
        budget: Budget,
        #[command(flatten)]
        sim: Sim,
        /// Integer rates c1,c2 (default: best integer pair inside the caps).
        #[arg(long, value_delimiter = ',')]
        rates: Option<Vec<u32>>,
        /// Draw messages uniformly instead of always sending (0, 0).
        #[arg(long)]
        uniform_messages: bool,
    },
    /// Smooth entropies of i.i.d. extensions for n = 1..n_max.
    AsymScan {
        #[arg(long)]
        pmf: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        n_max: usize,
    },
    /// Collision probability of the GF(2) hash family.
    HashCheck {
        /// Number of input symbols.
        #[arg(long)]
        domain: usize,
        /// Output bits ℓ.
        #[arg(long)]
        bits: u32,
        /// Monte Carlo trials; exact enumeration when absent.
        #[arg(long, requires = "seed")]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut caps = oneshot_info::Caps::default();
    if let Some(cap) = cli.cap {
        caps.enumeration = cap;
    }
    match commands::run(&cli.command, &caps, cli.format).and_then(|text| emit(&text, cli.out.as_ref())) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Input(format!("stdout: {e}")))
        }
    }
}
