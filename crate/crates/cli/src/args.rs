use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use multidicke::Pair;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "multidicke", version, about = "Phase diagrams of multilevel atoms in multimode cavities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Variational phase grid (CSV) plus a JSON sidecar of separatrices.
    PhaseDiagram(GridArgs),
    /// Closed-form observables along a one-parameter sweep (CSV).
    Observables(SweepArgs),
    /// Exact ground states by diagonalization (JSON).
    Exact(ExactArgs),
    /// Variational versus exact energies and labels (JSON).
    Compare(ExactArgs),
    /// Check a system file and print what is known about it.
    Validate(SystemArg),
}

#[derive(Debug, Args)]
pub struct SystemArg {
    /// TOML system file, or `preset:<xi3|v3|lambda3|xi4|two-level>`.
    #[arg(long)]
    pub system: String,
}

#[derive(Debug, Args, Serialize)]
pub struct GridArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub system: SystemArg,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Scanned transitions, e.g. `1-2,2-3`.
    #[arg(long)]
    pub axes: String,
    /// `lo:hi`, once for all axes or once per axis (comma separated).
    #[arg(long, default_value = "0:2")]
    pub range: String,
    /// Points per axis.
    #[arg(long, default_value_t = 50)]
    pub res: usize,
    /// Solve the rotating-wave problem at the listed couplings.
    #[arg(long)]
    pub rwa: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub system: SystemArg,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// One transition (`mu = t`) or two (`mu_A = radius cos t`, `mu_B = radius sin t`).
    #[arg(long)]
    pub axes: String,
    /// `lo:hi` of the path parameter; defaults to `0:2`, or `0:pi/2` for two axes.
    #[arg(long)]
    pub range: Option<String>,
    #[arg(long, default_value_t = 201)]
    pub res: usize,
    /// Radius of the two-axis path.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub rwa: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct ExactArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub system: SystemArg,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Scanned transitions; without it the system's own couplings are solved.
    #[arg(long)]
    pub axes: Option<String>,
    #[arg(long, default_value = "0:2")]
    pub range: String,
    #[arg(long, default_value_t = 10)]
    pub res: usize,
    /// Number of atoms; overrides the system file.
    #[arg(long)]
    pub na: Option<usize>,
    /// Photon cutoff per mode (`8,8`) or `auto` to converge from 4.
    #[arg(long, default_value = "auto")]
    pub cutoff: String,
    /// Energy tolerance of the cutoff convergence.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long)]
    pub rwa: bool,
    /// Seed of the Lanczos start vector.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest basis size accepted.
    #[arg(long, default_value_t = 2_000_000)]
    pub budget: usize,
}

pub fn parse_pairs(s: &str) -> Result<Vec<Pair>, multidicke::Error> {
    s.split(',').map(str::parse).collect()
}

pub fn parse_ranges(s: &str, count: usize) -> Result<Vec<(f64, f64)>, multidicke::Error> {
    let bad = || multidicke::Error::InvalidArgument(format!("bad range '{s}', expected lo:hi[,lo:hi...]"));
    let ranges: Vec<(f64, f64)> = s
        .split(',')
        .map(|r| {
            let (lo, hi) = r.split_once(':').ok_or_else(bad)?;
            Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
        })
        .collect::<Result<_, multidicke::Error>>()?;
    match ranges.len() {
        1 => Ok(vec![ranges[0]; count]),
        n if n == count => Ok(ranges),
        n => Err(multidicke::Error::InvalidArgument(format!("{n} ranges for {count} axes"))),
    }
}

pub fn parse_cutoffs(s: &str, modes: usize) -> Result<Option<Vec<u32>>, multidicke::Error> {
    if s == "auto" {
        return Ok(None);
    }
    let bad = || multidicke::Error::InvalidArgument(format!("bad cutoff '{s}'"));
    let c: Vec<u32> = s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    match c.len() {
        1 => Ok(Some(vec![c[0]; modes])),
        n if n == modes => Ok(Some(c)),
        n => Err(multidicke::Error::InvalidArgument(format!("{n} cutoffs for {modes} modes"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_lists() {
        assert_eq!(parse_pairs("1-2,2-3").unwrap(), vec![Pair::new(1, 2), Pair::new(2, 3)]);
        assert!(parse_pairs("2-1").is_err());
    }

    #[test]
    fn ranges_broadcast() {
        assert_eq!(parse_ranges("0:2", 2).unwrap(), vec![(0.0, 2.0), (0.0, 2.0)]);
        assert_eq!(parse_ranges("0:1,0.5:3", 2).unwrap(), vec![(0.0, 1.0), (0.5, 3.0)]);
        assert!(parse_ranges("0:1,0:1,0:1", 2).is_err());
        assert!(parse_ranges("0-1", 1).is_err());
    }

    #[test]
    fn cutoffs() {
        assert_eq!(parse_cutoffs("auto", 2).unwrap(), None);
        assert_eq!(parse_cutoffs("6", 2).unwrap(), Some(vec![6, 6]));
        assert_eq!(parse_cutoffs("6,9", 2).unwrap(), Some(vec![6, 9]));
        assert!(parse_cutoffs("6,9,1", 2).is_err());
    }
}
