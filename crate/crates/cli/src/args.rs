use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "fracparts",
    version,
    about = "Small fractional parts of polynomials: Weyl sums, minimizers, recovery"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Args, Debug)]
pub struct Global {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Working precision in bits.
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    /// Budget for every enumerative routine.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Decimal or fraction, e.g. 0.05 or 1/20.
    #[arg(long, global = true)]
    pub eps: Option<String>,
    #[arg(long, global = true, conflicts_with_all = ["csv", "table"])]
    pub json: bool,
    #[arg(long, global = true, conflicts_with = "table")]
    pub csv: bool,
    #[arg(long, global = true)]
    pub table: bool,
    /// Write to this file (atomically) instead of stdout.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Evaluate a Weyl sum.
    Weyl(PolyArgs),
    /// Count solutions of the Vinogradov system.
    Meanvalue {
        #[arg(long)]
        s: String,
        #[arg(long)]
        k: String,
        /// Every N from 1 to this bound.
        #[arg(long, conflicts_with = "n")]
        nmax: Option<u64>,
        /// Explicit N values, e.g. 5,10 or 1..12.
        #[arg(long)]
        n: Option<String>,
    },
    /// Exponent table with prior values and winners.
    Exponents {
        #[arg(long)]
        k: String,
        /// i, ii, iii or a comma list; all three by default.
        #[arg(long)]
        problem: Option<String>,
        /// Number of variables for problem iii.
        #[arg(long)]
        s: Option<String>,
        /// Constant of the logarithmic family.
        #[arg(long)]
        b: Option<f64>,
    },
    #[command(subcommand)]
    Minimize(MinimizeCmd),
    #[command(subcommand)]
    Pipeline(PipelineCmd),
    /// Recover a common denominator from a large Weyl sum.
    Recover {
        #[command(flatten)]
        poly: PolyArgs,
        /// Lower bound for |g|; the certified modulus by default.
        #[arg(long)]
        a: Option<String>,
    },
    /// Minima over several N for generated coefficients, with fitted slopes.
    Scan {
        /// uniform, rational, or a constant name (pi, e, phi, sqrt2).
        #[arg(long, default_value = "uniform")]
        generator: String,
        #[arg(long)]
        k: u32,
        /// full, binomial or monomial.
        #[arg(long, default_value = "full")]
        shape: String,
        #[arg(long)]
        n_list: String,
        #[arg(long, default_value_t = 1)]
        trials: u32,
    },
    /// Execute an experiment spec file.
    Run {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum MinimizeCmd {
    /// min over 1 <= n <= N of ||alpha_k n^k + ... + alpha_1 n||.
    Poly(PolyArgs),
    /// min of ||beta_1 n_1^k + ... + beta_s n_s^k|| over the punctured box.
    Form {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        betas: String,
        /// Number of variables; a single beta is repeated s times.
        #[arg(long)]
        s: Option<usize>,
        #[arg(long)]
        n: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum PipelineCmd {
    /// Large Weyl sum of a multiple, then rational recovery.
    Qm(PolyArgs),
    /// Two-step construction for alpha_k n^k + alpha_1 n.
    Twostep {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        alpha_k: String,
        #[arg(long)]
        alpha_1: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        nu: Option<String>,
    },
}

#[derive(Args, Debug)]
pub struct PolyArgs {
    /// Degree; must match the number of coefficients when given.
    #[arg(long)]
    pub k: Option<u32>,
    /// alpha_1,...,alpha_k as fractions, decimals or constant names.
    #[arg(long)]
    pub coeffs: String,
    #[arg(long)]
    pub n: u64,
}
