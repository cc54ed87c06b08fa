//! Command-line arguments.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use asymkde::{Grid, KernelFamily, Role, Spacing};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{CliError, CliResult};
use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "asymkde",
    version,
    about = "Asymmetric-kernel density estimation for positive data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a density estimate on a grid.
    Estimate(EstimateArgs),
    /// Select a bandwidth by plugin rule or cross-validation.
    Bandwidth(BandwidthArgs),
    /// Run the seeded verification suite.
    Verify(VerifyArgs),
    /// Replicate cross-validation profiles on simulated log-normal data.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    /// gamma, lognormal, bs, ig or rig.
    #[arg(long, default_value = "gamma", value_parser = parse_family)]
    pub kernel: KernelFamily,
    /// proper or improper.
    #[arg(long, default_value = "proper", value_parser = parse_role)]
    pub role: Role,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    /// Observation file; stdin when absent or `-`.
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// plugin, cv or fixed:VALUE.
    #[arg(long, default_value = "plugin")]
    pub bandwidth: BandwidthMode,
    /// Evaluation grid MIN:MAX:COUNT[:geo|ari]; defaults to 512 geometric
    /// points between the 1e-5 and 1 - 1e-5 quantiles of a fitted log-normal.
    #[arg(long)]
    pub grid: Option<GridSpec>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BandwidthArgs {
    /// Observation file; stdin when absent or `-`.
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// plugin, cv or fixed:VALUE.
    #[arg(long, default_value = "cv")]
    pub bandwidth: BandwidthMode,
    /// Bandwidth grid for cross-validation, MIN:MAX:COUNT[:geo|ari].
    #[arg(long)]
    pub grid: Option<GridSpec>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Fewer replications; finishes in well under a minute.
    #[arg(long)]
    pub quick: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Multiplies every tolerance; for exercising the failure path.
    #[arg(long, default_value_t = 1.0, hide = true)]
    pub tolerance_scale: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Log-mean of the generating log-normal.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub mu: f64,
    /// Log-standard-deviation of the generating log-normal.
    #[arg(long, default_value_t = 1.0)]
    pub log_sd: f64,
    /// Samples per replication.
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    /// Replications; 1000 by default, 50 with --quick.
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Bandwidth grid MIN:MAX:COUNT[:geo|ari]; 0.05:1.5:40:geo by default,
    /// 20 points with --quick.
    #[arg(long)]
    pub grid: Option<GridSpec>,
    #[arg(long)]
    pub quick: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_family(s: &str) -> Result<KernelFamily, String> {
    match KernelFamily::parse(s) {
        Some(KernelFamily::Gaussian) | None => Err(format!(
            "unknown kernel {s:?}; expected gamma, lognormal, bs, ig or rig"
        )),
        Some(f) => Ok(f),
    }
}

fn parse_role(s: &str) -> Result<Role, String> {
    Role::parse(s).ok_or_else(|| format!("unknown role {s:?}; expected proper or improper"))
}

/// How the bandwidth σ is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthMode {
    Plugin,
    Cv,
    Fixed(f64),
}

impl FromStr for BandwidthMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plugin" => Ok(BandwidthMode::Plugin),
            "cv" => Ok(BandwidthMode::Cv),
            _ => {
                let v = s
                    .strip_prefix("fixed:")
                    .ok_or_else(|| format!("expected plugin, cv or fixed:VALUE, got {s:?}"))?;
                let sigma: f64 = v
                    .parse()
                    .map_err(|_| format!("bad fixed bandwidth {v:?}"))?;
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(format!("fixed bandwidth must be > 0, got {v}"));
                }
                Ok(BandwidthMode::Fixed(sigma))
            }
        }
    }
}

impl fmt::Display for BandwidthMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BandwidthMode::Plugin => f.write_str("plugin"),
            BandwidthMode::Cv => f.write_str("cv"),
            BandwidthMode::Fixed(v) => write!(f, "fixed:{v}"),
        }
    }
}

/// `MIN:MAX:COUNT[:geo|ari]`; arithmetic when the spacing is omitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn build(&self) -> CliResult<Grid> {
        Grid::new(self.min, self.max, self.count, self.spacing)
            .map_err(|e| CliError::Usage(format!("--grid: {e}")))
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(format!("expected MIN:MAX:COUNT[:geo|ari], got {s:?}"));
        }
        let real = |p: &str| {
            p.parse::<f64>()
                .map_err(|_| format!("bad grid bound {p:?}"))
        };
        let min = real(parts[0])?;
        let max = real(parts[1])?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| format!("bad grid count {:?}", parts[2]))?;
        let spacing = match parts.get(3).copied() {
            None | Some("ari") => Spacing::Arithmetic,
            Some("geo") => Spacing::Geometric,
            Some(o) => return Err(format!("grid spacing must be geo or ari, got {o:?}")),
        };
        if count < 2 {
            return Err("grid count must be at least 2".into());
        }
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(format!("grid needs finite MIN < MAX, got {min}:{max}"));
        }
        if spacing == Spacing::Geometric && min <= 0.0 {
            return Err("geometric grid needs MIN > 0".into());
        }
        Ok(GridSpec {
            min,
            max,
            count,
            spacing,
        })
    }
}
