//! Command-line front end: argument types, run manifests and the four
//! subcommands. The binary is a thin wrapper around [`run`].

mod commands;
mod manifest;
mod svg;

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use manifest::{ModelSource, RunManifest};
pub use svg::{line_plot, Series};

use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "hopfbalance", version, about = "Periodic-orbit bifurcations of delay equations in the frequency domain")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Model file (JSON) or builtin name (`pyragas`, `leukemia`).
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Parameter override `name=value`; repeatable.
    #[arg(long = "param", global = true, value_parser = parse_assign)]
    pub params: Vec<(String, f64)>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub svg: bool,
    /// Worker threads for grid and branch commands.
    #[arg(long, global = true, env = "HOPFBALANCE_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Locate Hopf points, or continue a Hopf curve over `--range`.
    Hopf(HopfArgs),
    /// Harmonic-balance coefficients and `xi_k` at a point.
    Coeffs(CoeffsArgs),
    /// Normal-form classification at a point or over a two-parameter grid.
    Classify(ClassifyArgs),
    /// Predicted cycle branch against direct simulation.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Args)]
pub struct HopfArgs {
    /// Fixed parameter, `tau=value` or `mu=value`.
    #[arg(long, value_parser = parse_assign)]
    pub fix: (String, f64),
    /// Continue the curve in the fixed parameter over `lo:hi:step`.
    #[arg(long, value_parser = parse_range)]
    pub range: Option<Range>,
    /// Starting guess `omega:other` (defaults to the model seed).
    #[arg(long, value_parser = parse_pair)]
    pub guess: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Args)]
pub struct CoeffsArgs {
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub q: u8,
    /// Locate the critical point with this parameter fixed.
    #[arg(long, value_parser = parse_assign, conflicts_with = "omega")]
    pub fix: Option<(String, f64)>,
    /// Evaluate at this frequency and the given parameters instead.
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long, value_parser = parse_pair)]
    pub guess: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Amplitude,
    P2,
    P3,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub q: u8,
    #[arg(long, value_enum, default_value_t = FamilyArg::Amplitude)]
    pub family: FamilyArg,
    /// Fixed delay for single-point classification, `tau=value`.
    #[arg(long, value_parser = parse_assign)]
    pub fix: Option<(String, f64)>,
    /// Grid axis `name=lo:hi:count`; give two for a variety scan.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Vec<GridAxis>,
    #[arg(long, value_parser = parse_pair)]
    pub guess: Option<(f64, f64)>,
    /// Relative zero tolerance for coefficients.
    #[arg(long, default_value_t = crate::singclass::DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub q: u8,
    /// Fixed delay, `tau=value`.
    #[arg(long, value_parser = parse_assign)]
    pub fix: (String, f64),
    /// Bifurcation-parameter grid `lo:hi:step`.
    #[arg(long, value_parser = parse_range)]
    pub range: Range,
    #[arg(long, value_parser = parse_pair)]
    pub guess: Option<(f64, f64)>,
    /// Integration step (default `tau/40`).
    #[arg(long)]
    pub sim_dt: Option<f64>,
    /// Transient discarded before measuring.
    #[arg(long, default_value_t = 80000.0)]
    pub sim_transient: f64,
    /// Measurement window (default: 12 periods at the Hopf frequency, at
    /// least 400).
    #[arg(long)]
    pub sim_measure: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Range {
    /// Grid values `lo, lo + step, ...` up to `hi` inclusive (with a
    /// relative slack for round-off); empty when `hi < lo`.
    pub fn values(&self) -> Vec<f64> {
        if self.hi < self.lo {
            return Vec::new();
        }
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.lo + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    f64::from_str(s.trim()).map_err(|e| format!("`{s}`: {e}"))
}

fn parse_assign(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    if name.is_empty() {
        return Err(format!("empty name in `{s}`"));
    }
    Ok((name.trim().to_string(), parse_f64(value)?))
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected a:b, got `{s}`"))?;
    Ok((parse_f64(a)?, parse_f64(b)?))
}

fn parse_range(s: &str) -> std::result::Result<Range, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err(format!("expected lo:hi:step, got `{s}`"));
    };
    let r = Range { lo: parse_f64(lo)?, hi: parse_f64(hi)?, step: parse_f64(step)? };
    if !(r.step > 0.0) {
        return Err("range step must be positive".into());
    }
    Ok(r)
}

fn parse_grid(s: &str) -> std::result::Result<GridAxis, String> {
    let (name, rest) = s.split_once('=').ok_or_else(|| format!("expected name=lo:hi:count, got `{s}`"))?;
    let parts: Vec<&str> = rest.split(':').collect();
    let [lo, hi, count] = parts.as_slice() else {
        return Err(format!("expected name=lo:hi:count, got `{s}`"));
    };
    let count: usize = count.trim().parse().map_err(|e| format!("`{count}`: {e}"))?;
    if count == 0 {
        return Err("grid count must be positive".into());
    }
    Ok(GridAxis { name: name.trim().to_string(), lo: parse_f64(lo)?, hi: parse_f64(hi)?, count })
}

/// Execute a parsed command line. Returns the paths written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    if let Some(n) = cli.global.threads {
        // Only the first call in a process can configure the global pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let model = cli
        .global
        .model
        .as_deref()
        .ok_or_else(|| Error::Validation("--model is required".into()))?;
    let source = ModelSource::resolve(model)?;
    std::fs::create_dir_all(&cli.global.out)?;
    match &cli.command {
        Command::Hopf(a) => commands::hopf(&cli.global, &source, a),
        Command::Coeffs(a) => commands::coeffs(&cli.global, &source, a),
        Command::Classify(a) => commands::classify(&cli.global, &source, a),
        Command::Compare(a) => commands::compare(&cli.global, &source, a),
    }
}

/// Format a float so it round-trips exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsers() {
        assert_eq!(parse_assign("tau=4.5").unwrap(), ("tau".into(), 4.5));
        assert!(parse_assign("tau").is_err());
        assert_eq!(parse_range("0:1:0.25").unwrap().values().len(), 5);
        assert!(parse_range("1:0:0.5").unwrap().values().is_empty());
        assert!(parse_range("0:1:0").is_err());
        let g = parse_grid("kappa=-0.06:-0.03:7").unwrap();
        assert_eq!((g.name.as_str(), g.count), ("kappa", 7));
    }

    #[test]
    fn q_zero_is_usage_error() {
        let r = Cli::try_parse_from(["hopfbalance", "--model", "leukemia", "coeffs", "--q", "0"]);
        assert!(r.is_err());
    }

    #[test]
    fn round_trip_format() {
        for x in [0.1, 1.0 / 3.0, -2.0927529542, 1e-300, 6.02e23] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
