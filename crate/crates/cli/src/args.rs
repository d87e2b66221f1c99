//! Command-line flags. Every per-command field is optional so that a TOML
//! config table can supply it; defaults are applied after merging.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "cubic-cw", version, about = "Exact-law experiments for the cubic Curie-Weiss model")]
pub struct Cli {
    /// TOML file with one table per subcommand, e.g. `[be]` with `K = 0.2`.
    /// Command-line flags take precedence over the file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output file; overrides --out-dir.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Directory for `<command>.<csv|json>`; stdout when neither this nor --out is set.
    #[arg(long, global = true, env = "CUBIC_CW_OUT_DIR")]
    pub out_dir: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Worker threads for grid sweeps (default: available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DumpFormat {
    Csv,
    Bin,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stationary points and phase label at (K, J), or a label table over grids.
    #[command(after_help = "CSV columns (single point): m,phi,phi_dd,kind,global_min\n\
                            CSV columns (grid): K,J,label,m_star")]
    Phase(PhaseArgs),
    /// Coexistence curve J = γ(K).
    #[command(after_help = "CSV columns: K,gamma,m_low,m_high,equal_depth_gap")]
    Gamma(GammaArgs),
    /// Exact law of S_n.
    #[command(after_help = "CSV columns: s,m,pmf,cdf")]
    Law(LawArgs),
    /// Kolmogorov distance and Stein bound terms along an n grid, with rate fits.
    #[command(after_help = "CSV columns: n,K,J,dK,bound_term1,bound_term2,bound_term3,be_bound\n\
                            bound_term1..3 are the Δ², remainder and step-size terms.")]
    Be(BeArgs),
    /// Threshold experiments along J = 1 + αK_n.
    #[command(
        after_help = "CSV columns: n,K_n,J_n,m_star,dK,bound_term1,bound_term2,bound_term3,be_bound,nonuniform_sup,variance,excluded\n\
                            With --explore-alpha-zero: n,K_n,m_star,dK_candidate,dK_standardized_normal,dK_quartic"
    )]
    Threshold(ThresholdArgs),
    /// Exact check of the mean-field residual concentration inequality.
    #[command(after_help = "CSV columns: n,t,lhs,rhs,holds\nWith --quartic: n,t,prob,c_t")]
    Concentration(ConcentrationArgs),
    /// Cramér-type tail ratios P(W > x)/P(Z > x).
    #[command(after_help = "CSV columns: n,x,p_exact,p_normal,ratio,normalized_residual")]
    Cramer(CramerArgs),
    /// Moderate-deviation functional log P(W > a_n x)/a_n² with a_n = n^{1/8}.
    #[command(after_help = "CSV columns: n,x,a_n,value,target,rel_err")]
    Mdp(MdpArgs),
    /// Exchangeable-pair regression at one n.
    #[command(after_help = "CSV columns: s,w,pmf,regression,delta2,remainder")]
    Stein(SteinArgs),
    /// Heat-bath Glauber sampler compared with the exact law.
    #[command(after_help = "CSV columns: s,exact,empirical (pooled over chains)")]
    Sample(SampleArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Phase(_) => "phase",
            Self::Gamma(_) => "gamma",
            Self::Law(_) => "law",
            Self::Be(_) => "be",
            Self::Threshold(_) => "threshold",
            Self::Concentration(_) => "concentration",
            Self::Cramer(_) => "cramer",
            Self::Mdp(_) => "mdp",
            Self::Stein(_) => "stein",
            Self::Sample(_) => "sample",
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct PhaseArgs {
    #[arg(long = "K", allow_hyphen_values = true)]
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[arg(long = "J", allow_hyphen_values = true)]
    #[serde(rename = "J")]
    pub j: Option<f64>,
    /// K grid (`a,b`, `start:stop:step`, `start:stop:xF`); needs --j-grid.
    #[arg(long)]
    pub k_grid: Option<String>,
    #[arg(long)]
    pub j_grid: Option<String>,
    /// Grid points of the stationary-point scan.
    #[arg(long)]
    pub scan_points: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct GammaArgs {
    /// K values (default 0.3,0.1,0.03,0.01).
    #[arg(long, visible_alias = "K")]
    pub k_grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub j_lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub j_hi: Option<f64>,
    #[arg(long)]
    pub j_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct LawArgs {
    #[arg(long = "K", allow_hyphen_values = true)]
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[arg(long = "J", allow_hyphen_values = true)]
    #[serde(rename = "J")]
    pub j: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct BeArgs {
    #[arg(long = "K", allow_hyphen_values = true)]
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[arg(long = "J", allow_hyphen_values = true)]
    #[serde(rename = "J")]
    pub j: Option<f64>,
    /// System sizes (default 1024:65536:x2).
    #[arg(long, visible_alias = "n")]
    pub n_grid: Option<String>,
    /// Condition on a window around the low or high global minimizer.
    #[arg(long, value_enum)]
    pub condition: Option<Phase>,
    /// Window half-width as a fraction of the distance to the other minimizer (default 0.2).
    #[arg(long)]
    pub window: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ThresholdArgs {
    /// Case 1 (mixed), 2 (quartic), 3 (normal) or 4 (normal at quartic scale); default 1.
    #[arg(long)]
    pub case: Option<u8>,
    /// Default −1; must be negative.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// K_n = n^{−2δ} for cases 3 and 4 (default 0.1).
    #[arg(long)]
    pub delta: Option<f64>,
    /// K_n = n^{−exponent} for case 2 (default 0.75).
    #[arg(long)]
    pub exponent: Option<f64>,
    #[arg(long, visible_alias = "n")]
    pub n_grid: Option<String>,
    /// Exploratory comparison at J = 1, K_n = n^{−1/4}.
    #[arg(long)]
    pub explore_alpha_zero: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConcentrationArgs {
    #[arg(long = "K", allow_hyphen_values = true)]
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[arg(long = "J", allow_hyphen_values = true)]
    #[serde(rename = "J")]
    pub j: Option<f64>,
    /// System sizes (default 100,1000,10000).
    #[arg(long, visible_alias = "n")]
    pub n_grid: Option<String>,
    /// t values (default 0:5:0.5).
    #[arg(long, visible_alias = "t")]
    pub t_grid: Option<String>,
    /// Fit c in P(n^{1/4}|m| ≥ t) ≤ 2exp(−ct⁴) instead.
    #[arg(long)]
    pub quartic: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct CramerArgs {
    #[arg(long = "K", allow_hyphen_values = true)]
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[arg(long = "J", allow_hyphen_values = true)]
    #[serde(rename = "J")]
    pub j: Option<f64>,
    #[arg(long, visible_alias = "n")]
    pub n_grid: Option<String>,
    /// x values; default is `points` values on [0, c·n^{1/6}] per n.
    #[arg(long, visible_alias = "x")]
    pub x_grid: Option<String>,
    /// Range constant c (default 1).
    #[arg(long)]
    pub c: Option<f64>,
    /// Points of the default x grid (default 50).
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum)]
    pub condition: Option<Phase>,
    #[arg(long)]
    pub window: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct MdpArgs {
    #[arg(long = "K", allow_hyphen_values = true)]
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[arg(long = "J", allow_hyphen_values = true)]
    #[serde(rename = "J")]
    pub j: Option<f64>,
    #[arg(long, visible_alias = "n")]
    pub n_grid: Option<String>,
    /// x values (default 0.5,1,1.5).
    #[arg(long, visible_alias = "x")]
    pub x_grid: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct SteinArgs {
    #[arg(long = "K", allow_hyphen_values = true)]
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[arg(long = "J", allow_hyphen_values = true)]
    #[serde(rename = "J")]
    pub j: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    pub condition: Option<Phase>,
    #[arg(long)]
    pub window: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct SampleArgs {
    #[arg(long = "K", allow_hyphen_values = true)]
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[arg(long = "J", allow_hyphen_values = true)]
    #[serde(rename = "J")]
    pub j: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Recorded samples per chain (default 10000).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Burn-in in sweeps of n steps (default 100).
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Steps between samples (default n).
    #[arg(long)]
    pub thinning: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Independent chains, one RNG stream each (default 1).
    #[arg(long)]
    pub chains: Option<usize>,
    /// Autocorrelation budget for the mixing warning, in samples (default 20).
    #[arg(long)]
    pub tau_budget: Option<f64>,
    /// Write raw sample streams and metadata to this directory.
    #[arg(long)]
    pub dump_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub dump_format: Option<DumpFormat>,
}
