use std::ffi::OsString;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use super::config::{ExperimentConfig, ExperimentKind};
use super::headline::{reproduce_headline, HeadlineSettings};
use super::run::{resolve_workers, run, EXIT_ERROR, EXIT_OK, EXIT_ROW_FAILURES};
use crate::error::Result;

#[derive(Parser, Debug)]
#[command(
    name = "pearson",
    version,
    about = "Spectral experiments on sparse half-line potentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Kernel ratios or raw kernel values over an (xi, a, b, L) grid.
    Kernel(Experiment),
    /// Rescaled eigenvalue spacings around xi*.
    Clock(Experiment),
    /// Eigenvalue counts against the free density on an interval.
    Dos(Experiment),
    /// Measured constants for the perturbation bounds.
    Verify(Experiment),
    /// Smallest length at which the truncated kernel is within tolerance.
    Hatn(Experiment),
    /// The headline run on the canonical four-bump potential.
    Reproduce {
        /// Directory receiving the three CSV files.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        /// Accepted for interface compatibility; every run is deterministic.
        #[arg(long)]
        seedless: bool,
    },
}

/// Flags override the matching keys of `--config`.
#[derive(Args, Debug)]
struct Experiment {
    /// TOML experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Thread count; falls back to the config, then PEARSON_WORKERS.
    #[arg(long)]
    workers: Option<usize>,
    /// Accepted for interface compatibility; every run is deterministic.
    #[arg(long)]
    seedless: bool,
    #[arg(long, allow_hyphen_values = true, value_parser = list::<f64>)]
    xi: Option<List<f64>>,
    #[arg(long, allow_hyphen_values = true, value_parser = list::<f64>)]
    lengths: Option<List<f64>>,
    #[arg(long, allow_hyphen_values = true, value_parser = list::<f64>)]
    a: Option<List<f64>>,
    #[arg(long, allow_hyphen_values = true, value_parser = list::<f64>)]
    b: Option<List<f64>>,
    #[arg(long, allow_hyphen_values = true, value_parser = list::<usize>)]
    ell: Option<List<usize>>,
    #[arg(long)]
    depth: Option<usize>,
    /// `lo,hi`
    #[arg(long, allow_hyphen_values = true, value_parser = pair)]
    interval: Option<[f64; 2]>,
    #[arg(long)]
    bins: Option<usize>,
    /// ratio, quadrature or cd_formula.
    #[arg(long, allow_hyphen_values = true, value_parser = list::<String>)]
    methods: Option<List<String>>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    ab_bound: Option<f64>,
    /// `lo,hi`
    #[arg(long, allow_hyphen_values = true, value_parser = pair)]
    window: Option<[f64; 2]>,
    #[arg(long)]
    max_length: Option<f64>,
    /// one_bump, transfer_bound, truncation_step or kappa_schedule.
    #[arg(long, allow_hyphen_values = true, value_parser = list::<String>)]
    probes: Option<List<String>>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true, value_parser = list::<usize>)]
    m: Option<List<usize>>,
}

/// A comma-separated flag value; the empty string is the empty list.
#[derive(Clone, Debug)]
struct List<T>(Vec<T>);

fn list<T: FromStr>(s: &str) -> std::result::Result<List<T>, String>
where
    T::Err: std::fmt::Display,
{
    if s.trim().is_empty() {
        return Ok(List(Vec::new()));
    }
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<std::result::Result<_, _>>()
        .map(List)
}

fn pair(s: &str) -> std::result::Result<[f64; 2], String> {
    match list::<f64>(s)?.0[..] {
        [lo, hi] => Ok([lo, hi]),
        _ => Err("expected `lo,hi`".into()),
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl Experiment {
    fn into_config(self, kind: ExperimentKind) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_toml_str(&std::fs::read_to_string(path)?)?,
            None => ExperimentConfig::new(kind),
        };
        c.kind = kind;
        if self.out.is_some() {
            c.out = self.out;
        }
        c.workers = resolve_workers(self.workers, c.workers);
        let g = &mut c.grid;
        set(&mut g.xi, self.xi.map(|l| l.0));
        set(&mut g.lengths, self.lengths.map(|l| l.0));
        set(&mut g.a, self.a.map(|l| l.0));
        set(&mut g.b, self.b.map(|l| l.0));
        set(&mut g.ell, self.ell.map(|l| l.0));
        set(&mut g.depth, self.depth);
        set(&mut g.interval, self.interval);
        set(&mut g.bins, self.bins);
        set(&mut g.methods, self.methods.map(|l| l.0));
        set(&mut g.tolerance, self.tolerance);
        set(&mut g.ab_bound, self.ab_bound);
        set(&mut g.window, self.window);
        set(&mut g.max_length, self.max_length);
        set(&mut c.verify.probes, self.probes.map(|l| l.0));
        set(&mut c.verify.lambda, self.lambda);
        set(&mut c.verify.m, self.m.map(|l| l.0));
        Ok(c)
    }
}

fn dispatch(command: Command) -> Result<i32> {
    let (kind, experiment) = match command {
        Command::Kernel(e) => (ExperimentKind::KernelSweep, e),
        Command::Clock(e) => (ExperimentKind::Clock, e),
        Command::Dos(e) => (ExperimentKind::Dos, e),
        Command::Verify(e) => (ExperimentKind::Verify, e),
        Command::Hatn(e) => (ExperimentKind::HatnSearch, e),
        Command::Reproduce {
            out_dir, workers, ..
        } => {
            let out = reproduce_headline(
                &out_dir,
                &HeadlineSettings::default(),
                resolve_workers(workers, None),
            )?;
            for f in &out.files {
                println!("{}", f.display());
            }
            return Ok(if out.failures == 0 {
                EXIT_OK
            } else {
                EXIT_ROW_FAILURES
            });
        }
    };
    run(&experiment.into_config(kind)?)
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Command {
        Cli::try_parse_from(args).unwrap().command
    }

    #[test]
    fn flags_override_defaults() {
        let Command::Kernel(e) = parse(&[
            "pearson",
            "kernel",
            "--xi",
            "0.5,2",
            "--a",
            "-1,1",
            "--methods",
            "quadrature",
        ]) else {
            panic!("wrong subcommand");
        };
        let c = e.into_config(ExperimentKind::KernelSweep).unwrap();
        assert_eq!(c.grid.xi, vec![0.5, 2.0]);
        assert_eq!(c.grid.a, vec![-1.0, 1.0]);
        assert_eq!(c.grid.methods, vec!["quadrature".to_string()]);
        assert_eq!(c.grid.b, vec![0.0]);
    }

    #[test]
    fn empty_list_flag_reaches_validation() {
        let Command::Clock(e) = parse(&["pearson", "clock", "--xi="]) else {
            panic!("wrong subcommand");
        };
        let c = e.into_config(ExperimentKind::Clock).unwrap();
        assert!(c.grid.xi.is_empty());
        assert!(c.validate().is_err());
    }
}
