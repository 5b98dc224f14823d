use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::csv::{fmt_f64, fmt_opt, sanitize, write_atomic, CsvTable};
use crate::error::{Error, Result};
use crate::kernel::{cd_formula, cd_quadrature, kernel_ratio, sine_kernel};
use crate::potential::{
    empirical_hat_n, power_law_amplitudes, HatNSearch, PearsonPotential, TruncationLevel,
};
use crate::scalar::Complex64;
use crate::spectrum::{clock_statistics, density_of_states};
use crate::verify::{
    probe_kappa_schedule_with, probe_one_bump, probe_transfer_bound, probe_truncation_step,
    staircase, truncation_window_grid, BoundProbe, MTildeCache,
};

pub const WORKERS_ENV: &str = "PEARSON_WORKERS";

pub const KERNEL_HEADER: &[&str] = &[
    "method", "xi", "a", "b", "length", "value", "target", "error", "status",
];
pub const CLOCK_HEADER: &[&str] = &[
    "length",
    "xi_star",
    "n",
    "spacing",
    "statistic",
    "deviation",
    "max_deviation",
    "status",
];
pub const DOS_HEADER: &[&str] = &[
    "length",
    "lo",
    "hi",
    "count",
    "mass",
    "free_mass",
    "rel_error",
    "status",
];
pub const VERIFY_HEADER: &[&str] = &[
    "lemma_id",
    "parameters",
    "measured",
    "reference",
    "verdict",
    "status",
];
pub const HATN_HEADER: &[&str] = &["ell", "tolerance", "hat_n", "status"];

pub const EXIT_OK: i32 = 0;
pub const EXIT_ROW_FAILURES: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

pub fn header_for(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::KernelSweep => KERNEL_HEADER,
        ExperimentKind::Clock => CLOCK_HEADER,
        ExperimentKind::Dos => DOS_HEADER,
        ExperimentKind::Verify => VERIFY_HEADER,
        ExperimentKind::HatnSearch => HATN_HEADER,
    }
}

/// Flag, then config file, then the environment; `None` leaves the pool default.
pub fn resolve_workers(flag: Option<usize>, config: Option<usize>) -> Option<usize> {
    flag.or(config).or_else(|| {
        std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .filter(|&n| n > 0)
    })
}

/// Runs `f` inside a pool of `workers` threads.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn status<T>(r: &Result<T>) -> String {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => sanitize(&e.to_string()),
    }
}

fn nan_row(width: usize, leading: Vec<String>, err: &Error) -> Vec<String> {
    let mut row = leading;
    while row.len() < width - 1 {
        row.push(fmt_f64(f64::NAN));
    }
    row.push(sanitize(&err.to_string()));
    row
}

/// Rows of independent tasks, evaluated in parallel and kept in task order.
fn collect<T: Sync>(
    tasks: &[T],
    f: impl Fn(&T) -> Vec<Vec<String>> + Sync + Send,
    table: &mut CsvTable,
) {
    let rows: Vec<Vec<Vec<String>>> = tasks.par_iter().map(f).collect();
    for row in rows.into_iter().flatten() {
        table.push(row);
    }
}

fn kernel_rows(config: &ExperimentConfig, v: &PearsonPotential, table: &mut CsvTable) {
    let g = &config.grid;
    let mut tasks = Vec::new();
    for method in &g.methods {
        for &xi in &g.xi {
            for &length in &g.lengths {
                for &a in &g.a {
                    for &b in &g.b {
                        tasks.push((method.as_str(), xi, a, b, length));
                    }
                }
            }
        }
    }
    collect(
        &tasks,
        |&(method, xi, a, b, length)| {
            let lead = vec![
                method.to_string(),
                fmt_f64(xi),
                fmt_f64(a),
                fmt_f64(b),
                fmt_f64(length),
            ];
            let (p, q) = (xi + a / length, xi + b / length);
            let evaluated: Result<(f64, Option<f64>)> = match method {
                "ratio" => kernel_ratio(
                    v,
                    xi,
                    Complex64::new(a, 0.0),
                    Complex64::new(b, 0.0),
                    length,
                )
                .and_then(|r| Ok((r.re, Some(sine_kernel(xi, a, b)?)))),
                "quadrature" => cd_quadrature(v, p, q, length).map(|e| (e.value, None)),
                _ => cd_formula(v, p, q, length).map(|e| (e.value, None)),
            };
            let row = match &evaluated {
                Ok((value, target)) => {
                    let mut row = lead;
                    row.push(fmt_f64(*value));
                    row.push(fmt_opt(*target));
                    row.push(fmt_opt(target.map(|t| (value - t).abs())));
                    row.push(status(&evaluated));
                    row
                }
                Err(e) => nan_row(KERNEL_HEADER.len(), lead, e),
            };
            vec![row]
        },
        table,
    );
}

pub(crate) fn clock_rows_for(
    v: &PearsonPotential,
    length: f64,
    xi: f64,
    depth: usize,
) -> Vec<Vec<String>> {
    match clock_statistics(v, length, xi, depth) {
        Ok(report) => report
            .statistics
            .iter()
            .map(|s| {
                vec![
                    fmt_f64(length),
                    fmt_f64(xi),
                    s.n.to_string(),
                    fmt_f64(s.spacing),
                    fmt_f64(s.statistic),
                    fmt_f64((s.statistic - 1.0).abs()),
                    fmt_f64(report.max_deviation),
                    "ok".into(),
                ]
            })
            .collect(),
        Err(e) => vec![nan_row(
            CLOCK_HEADER.len(),
            vec![fmt_f64(length), fmt_f64(xi), String::new()],
            &e,
        )],
    }
}

pub(crate) fn dos_rows_for(
    v: &PearsonPotential,
    length: f64,
    interval: (f64, f64),
    bins: usize,
) -> Vec<Vec<String>> {
    match density_of_states(v, length, interval, bins) {
        Ok(d) => d
            .bins
            .iter()
            .map(|b| {
                vec![
                    fmt_f64(length),
                    fmt_f64(b.lo),
                    fmt_f64(b.hi),
                    b.count.to_string(),
                    fmt_f64(b.mass),
                    fmt_f64(b.free_mass),
                    fmt_f64(b.relative_error()),
                    "ok".into(),
                ]
            })
            .collect(),
        Err(e) => vec![nan_row(DOS_HEADER.len(), vec![fmt_f64(length)], &e)],
    }
}

fn probe_row(name: &str, probe: Result<BoundProbe>) -> Vec<String> {
    match probe {
        Ok(p) => {
            let params = p
                .parameters
                .iter()
                .map(|(k, v)| format!("{k}={}", fmt_f64(*v)))
                .collect::<Vec<_>>()
                .join(";");
            vec![
                p.lemma.as_str().into(),
                params,
                fmt_f64(p.measured),
                fmt_opt(p.reference),
                p.verdict.as_str().into(),
                "ok".into(),
            ]
        }
        Err(e) => vec![
            name.into(),
            String::new(),
            fmt_f64(f64::NAN),
            String::new(),
            String::new(),
            sanitize(&e.to_string()),
        ],
    }
}

#[derive(Clone, Debug)]
enum ProbeTask {
    OneBump(f64),
    Transfer(usize),
    Truncation(usize, f64),
    Kappa,
}

fn verify_rows(config: &ExperimentConfig, v: &PearsonPotential, table: &mut CsvTable) {
    let vc = &config.verify;
    let mut tasks = Vec::new();
    for probe in &vc.probes {
        match probe.as_str() {
            "one_bump" => tasks.extend(config.grid.xi.iter().map(|&xi| ProbeTask::OneBump(xi))),
            "transfer_bound" => tasks.extend(vc.m.iter().map(|&m| ProbeTask::Transfer(m))),
            "truncation_step" => {
                for &l in &config.grid.ell {
                    tasks.extend(
                        config
                            .grid
                            .xi
                            .iter()
                            .map(|&xi| ProbeTask::Truncation(l, xi)),
                    );
                }
            }
            _ => tasks.push(ProbeTask::Kappa),
        }
    }
    let cache = MTildeCache::default();
    collect(
        &tasks,
        |task| {
            let row = match *task {
                ProbeTask::OneBump(xi) => probe_row("one_bump", probe_one_bump(vc.lambda, xi)),
                ProbeTask::Transfer(m) => probe_row(
                    "transfer_bound",
                    probe_transfer_bound(m, &vc.x_grid, &vc.t_grid),
                ),
                ProbeTask::Truncation(l, xi) => probe_row(
                    "truncation_step",
                    truncation_window_grid(v, l, 8)
                        .and_then(|grid| probe_truncation_step(v, TruncationLevel(l), xi, &grid)),
                ),
                ProbeTask::Kappa => {
                    let [first, last] = vc.terms;
                    let all = power_law_amplitudes(1.0, 0.25, last);
                    let max_m = vc.m.iter().copied().max().unwrap_or(1);
                    let probe = staircase(&all, max_m, |m| cache.get(m)).and_then(|ms| {
                        probe_kappa_schedule_with(&all[first - 1..], &ms[first - 1..], &cache)
                    });
                    probe_row("kappa_schedule", probe)
                }
            };
            vec![row]
        },
        table,
    );
}

fn hatn_rows(config: &ExperimentConfig, v: &PearsonPotential, table: &mut CsvTable) {
    let g = &config.grid;
    let search = HatNSearch {
        max_length: g.max_length,
        ..HatNSearch::default()
    };
    // Each search already parallelizes over its energy grid.
    for &l in &g.ell {
        let found = empirical_hat_n(
            v,
            TruncationLevel(l),
            g.tolerance,
            (g.window[0], g.window[1]),
            g.ab_bound,
            &search,
        );
        let row = match found {
            Ok(x) => vec![l.to_string(), fmt_f64(g.tolerance), fmt_f64(x), "ok".into()],
            Err(e) => nan_row(
                HATN_HEADER.len(),
                vec![l.to_string(), fmt_f64(g.tolerance)],
                &e,
            ),
        };
        table.push(row);
    }
}

/// Evaluates the configured experiment into a table, without writing it.
pub fn execute(config: &ExperimentConfig) -> Result<CsvTable> {
    config.validate()?;
    let v = config.build_potential()?;
    let mut table = CsvTable::new(header_for(config.kind));
    let workers = resolve_workers(None, config.workers);
    with_workers(workers, || match config.kind {
        ExperimentKind::KernelSweep => kernel_rows(config, &v, &mut table),
        ExperimentKind::Clock => {
            let g = &config.grid;
            let tasks: Vec<(f64, f64)> = g
                .lengths
                .iter()
                .flat_map(|&l| g.xi.iter().map(move |&x| (l, x)))
                .collect();
            collect(
                &tasks,
                |&(l, xi)| clock_rows_for(&v, l, xi, g.depth),
                &mut table,
            );
        }
        ExperimentKind::Dos => {
            let g = &config.grid;
            let interval = (g.interval[0], g.interval[1]);
            collect(
                &g.lengths,
                |&l| dos_rows_for(&v, l, interval, g.bins),
                &mut table,
            );
        }
        ExperimentKind::Verify => verify_rows(config, &v, &mut table),
        ExperimentKind::HatnSearch => hatn_rows(config, &v, &mut table),
    })?;
    Ok(table)
}

pub fn default_output(kind: ExperimentKind) -> PathBuf {
    PathBuf::from(format!("{}.csv", kind.as_str()))
}

/// Runs the experiment, writes the CSV atomically and returns the exit status:
/// 0 when every row succeeded, 1 when some rows recorded a failure.
pub fn run(config: &ExperimentConfig) -> Result<i32> {
    let table = execute(config)?;
    let out = config
        .out
        .clone()
        .unwrap_or_else(|| default_output(config.kind));
    write_table(&out, &table)?;
    let failures = table.failures();
    if failures > 0 {
        eprintln!(
            "{failures} of {} rows failed; see the status column of {}",
            table.rows.len(),
            out.display()
        );
        Ok(EXIT_ROW_FAILURES)
    } else {
        Ok(EXIT_OK)
    }
}

pub fn write_table(path: &Path, table: &CsvTable) -> Result<()> {
    write_atomic(path, &table.render())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn free_clock_rows() {
        let mut c = ExperimentConfig::new(ExperimentKind::Clock);
        c.grid.depth = 2;
        let t = execute(&c).unwrap();
        assert_eq!(t.rows.len(), 4);
        let j0 = (100.0 / PI).ceil();
        for row in &t.rows {
            let n: f64 = row[2].parse().unwrap();
            let stat: f64 = row[4].parse().unwrap();
            let expected = (2.0 * (j0 + n) + 1.0) * PI / 200.0;
            assert!((stat - expected).abs() < 1e-8);
        }
    }

    #[test]
    fn verify_one_bump_row_passes() {
        let c = ExperimentConfig::new(ExperimentKind::Verify);
        let t = execute(&c).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0][0], "one_bump");
        assert_eq!(t.rows[0][4], "pass");
    }

    #[test]
    fn empty_grid_is_rejected() {
        let mut c = ExperimentConfig::new(ExperimentKind::KernelSweep);
        c.grid.xi.clear();
        assert!(execute(&c).is_err());
    }

    #[test]
    fn output_is_worker_independent() {
        let mut c = ExperimentConfig::new(ExperimentKind::KernelSweep);
        c.potential = Some(crate::potential::PotentialSpec::canonical(2));
        c.grid.a = vec![-1.0, 0.5];
        c.grid.b = vec![0.0, 1.5];
        c.grid.methods = vec!["ratio".into(), "quadrature".into()];
        c.workers = Some(1);
        let one = execute(&c).unwrap().render();
        c.workers = Some(3);
        assert_eq!(one, execute(&c).unwrap().render());
    }

    #[test]
    fn failed_rows_keep_width() {
        let mut c = ExperimentConfig::new(ExperimentKind::KernelSweep);
        c.grid.xi = vec![0.001];
        c.grid.a = vec![-5.0];
        let t = execute(&c).unwrap();
        assert_eq!(t.failures(), 1);
        assert_eq!(t.rows[0].len(), KERNEL_HEADER.len());
    }
}
