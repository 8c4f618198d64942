use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "hill",
    version,
    about = "Hill discriminant, band edges and SUSY partners of periodic Sturm-Liouville problems"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Mathieu problem q = 2r cos 2x on [0, pi].
    #[arg(long, global = true, value_name = "R", allow_hyphen_values = true)]
    pub mathieu: Option<f64>,

    /// Free problem p = 1, q = 0 on [0, pi].
    #[arg(long, global = true)]
    pub free: bool,

    /// TOML problem description.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Number of grid nodes (odd).
    #[arg(long, global = true, default_value_t = hill_spps::DEFAULT_GRID)]
    pub grid: usize,

    /// Series order N.
    #[arg(long, global = true, default_value_t = hill_spps::DEFAULT_ORDER)]
    pub order: usize,

    /// Emit JSON instead of CSV.
    #[arg(long, global = true)]
    pub json: bool,

    /// Arithmetic for the series pipeline.
    #[arg(long, global = true, value_enum, default_value_t = Precision::DoubleDouble)]
    pub precision: Precision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    Double,
    DoubleDouble,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Samples D_N(lambda) on a range.
    Discriminant {
        #[arg(long, allow_hyphen_values = true, value_name = "A:B")]
        range: Range,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
    },
    /// First band edges with boundary type and residual.
    Eigenvalues {
        #[arg(long, default_value_t = 11)]
        count: usize,
    },
    /// Stability intervals on a range.
    Bands {
        #[arg(long, allow_hyphen_values = true, value_name = "A:B")]
        range: Range,
    },
    /// Bloch solutions f+ and f- on [0, xmax].
    Bloch {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long)]
        xmax: f64,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
    },
    /// Superpotential, partner potential and partner ground state.
    Darboux {
        /// Probe count for the invariance check.
        #[arg(long, default_value_t = 50)]
        probes: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("expected A:B, got {s:?}"))?;
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
        let (lo, hi) = (parse(a)?, parse(b)?);
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(format!("empty range {lo}:{hi}"));
        }
        Ok(Range { lo, hi })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        assert_eq!("-7:2".parse::<Range>(), Ok(Range { lo: -7.0, hi: 2.0 }));
        assert!("2:-7".parse::<Range>().is_err());
        assert!("3".parse::<Range>().is_err());
        assert!("a:1".parse::<Range>().is_err());
    }

    #[test]
    fn hyphen_values_accepted() {
        let cli =
            Cli::try_parse_from(["hill", "discriminant", "--mathieu", "1", "--range", "-1:26"])
                .unwrap();
        assert_eq!(cli.global.mathieu, Some(1.0));
        match cli.command {
            Command::Discriminant { range, samples } => {
                assert_eq!(range, Range { lo: -1.0, hi: 26.0 });
                assert_eq!(samples, 2000);
            }
            other => panic!("{other:?}"),
        }
    }
}
