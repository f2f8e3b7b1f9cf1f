mod commands;
mod store;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mobius_core::cascade::Variant;
use mobius_core::recursion::Strategy;
use mobius_core::Error;

#[derive(Parser, Debug)]
#[command(
    name = "mobius",
    version,
    about = "Moebius function, Mertens sums and Legendre prime counts"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Default range for `verify` and `stats` when not given explicitly.
    #[arg(long, global = true)]
    pub limit: Option<u64>,

    /// Neither read nor write the table caches.
    #[arg(long, global = true)]
    pub no_cache: bool,

    /// Cache directory (default: $MOBIUS_CACHE_DIR, then the user cache dir).
    #[arg(long, global = true, value_name = "DIR")]
    pub cache_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum StrategyArg {
    Naive,
    Blocked,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Naive => Strategy::Naive,
            StrategyArg::Blocked => Strategy::Blocked,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum VariantArg {
    #[value(alias = "appendix9")]
    Full,
    #[value(alias = "klein")]
    Negated,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Full => Variant::Full,
            VariantArg::Negated => Variant::Negated,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Smallest-prime-factor table with factorizations, mu, lambda and degree.
    Sieve { n: u64 },
    /// mu(1..=n) from the recursion, with Mertens sums.
    Mu {
        n: u64,
        #[arg(long, value_enum, default_value_t = StrategyArg::Blocked)]
        strategy: StrategyArg,
    },
    /// pi(n) by the rectified Legendre sum.
    Pi {
        n: u64,
        /// Show every square-free product term.
        #[arg(long)]
        breakdown: bool,
    },
    /// Running totals of f(d) for one n.
    Cascade {
        n: u64,
        #[arg(long, value_enum, default_value_t = VariantArg::Full)]
        variant: VariantArg,
        /// Keep rows with f(d) = 0.
        #[arg(long)]
        zeros: bool,
    },
    /// Upper/lower section sums split at n/2.
    Sections {
        n: u64,
        /// Also report 2n, 4n, ... this many times.
        #[arg(long, default_value_t = 0)]
        doublings: u32,
    },
    /// Full table of mu(d)[n/d] for d = 1..=n, marking small-prime divisors.
    Meissel {
        n: u64,
        /// Take the d = 1 term as n - 1.
        #[arg(long)]
        rectified: bool,
    },
    /// Square-free products of the given primes in Pascal form.
    Pascal(PascalArgs),
    /// Liouville sums of degree-k collections for k = 1..=max-k.
    Degree {
        #[arg(required = true)]
        primes: Vec<u64>,
        #[arg(long, default_value_t = 4)]
        max_k: u32,
    },
    /// Growth of M(x) and L(x), sign statistics and a random-walk baseline.
    Stats(StatsArgs),
    /// Run every cross-check.
    Verify {
        /// Limit 5,000.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Args, Debug)]
pub struct PascalArgs {
    #[arg(required = true)]
    pub primes: Vec<u64>,
    /// Show the degree-k collection instead of the square-free one.
    #[arg(long)]
    pub degree: Option<u32>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    pub limit: Option<u64>,
    #[arg(long, default_value_t = mobius_core::growth::DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub trials: u64,
    /// Emit the per-trial baseline instead of the growth table (csv only).
    #[arg(long)]
    pub baseline: bool,
}

/// Exit status for a failed command: usage problems are 2, everything
/// else (failed checks, corrupt caches, internal errors) is 1.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::ResourceLimit { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout
                .write_all(out.text.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return ExitCode::from(1);
            }
            ExitCode::from(out.status)
        }
        Err(e) => {
            eprintln!("mobius: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
