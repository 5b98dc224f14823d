//! The headline run on the canonical four-bump potential: kernel sup errors,
//! clock spacings and the density of states, each written as its own CSV.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::csv::{fmt_f64, sanitize, write_atomic, CsvTable};
use super::run::{clock_rows_for, dos_rows_for, with_workers, CLOCK_HEADER, DOS_HEADER};
use crate::error::Result;
use crate::kernel::kernel_ratio_sup_error;
use crate::potential::{canonical_pearson, PearsonPotential};

pub const SUP_ERROR_HEADER: &[&str] = &["xi", "length", "sup_error", "status"];

#[derive(Clone, Debug, PartialEq)]
pub struct HeadlineSettings {
    pub bumps: usize,
    pub xis: Vec<f64>,
    pub lengths: Vec<f64>,
    /// Offsets used for both `a` and `b`.
    pub offsets: Vec<f64>,
    pub clock_xi_star: f64,
    pub clock_depth: usize,
    pub dos_interval: (f64, f64),
    pub dos_bins: usize,
    pub dos_length: f64,
}

impl Default for HeadlineSettings {
    fn default() -> Self {
        Self {
            bumps: 4,
            xis: vec![0.5, 1.0, 2.0],
            lengths: vec![1e2, 1e3, 1e4],
            offsets: (0..=16).map(|i| -2.0 + 0.25 * i as f64).collect(),
            clock_xi_star: 1.0,
            clock_depth: 3,
            dos_interval: (1.0, 4.0),
            dos_bins: 10,
            dos_length: 1e4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct HeadlineOutput {
    pub files: Vec<PathBuf>,
    /// Rows whose status is not `ok`, over all three files.
    pub failures: usize,
}

pub fn sup_error_table(v: &PearsonPotential, s: &HeadlineSettings) -> CsvTable {
    let tasks: Vec<(f64, f64)> = s
        .xis
        .iter()
        .flat_map(|&xi| s.lengths.iter().map(move |&l| (xi, l)))
        .collect();
    let rows: Vec<Vec<String>> = tasks
        .par_iter()
        .map(|&(xi, l)| {
            let (value, status) = match kernel_ratio_sup_error(v, xi, &s.offsets, l) {
                Ok(e) => (e, "ok".to_string()),
                Err(e) => (f64::NAN, sanitize(&e.to_string())),
            };
            vec![fmt_f64(xi), fmt_f64(l), fmt_f64(value), status]
        })
        .collect();
    let mut table = CsvTable::new(SUP_ERROR_HEADER);
    rows.into_iter().for_each(|r| table.push(r));
    table
}

pub fn clock_table(v: &PearsonPotential, s: &HeadlineSettings) -> CsvTable {
    let rows: Vec<Vec<Vec<String>>> = s
        .lengths
        .par_iter()
        .map(|&l| clock_rows_for(v, l, s.clock_xi_star, s.clock_depth))
        .collect();
    let mut table = CsvTable::new(CLOCK_HEADER);
    rows.into_iter().flatten().for_each(|r| table.push(r));
    table
}

pub fn dos_table(v: &PearsonPotential, s: &HeadlineSettings) -> CsvTable {
    let mut table = CsvTable::new(DOS_HEADER);
    for r in dos_rows_for(v, s.dos_length, s.dos_interval, s.dos_bins) {
        table.push(r);
    }
    table
}

/// Writes `kernel_sup_error.csv`, `clock.csv` and `dos.csv` into `out_dir`.
pub fn reproduce_headline(
    out_dir: &Path,
    settings: &HeadlineSettings,
    workers: Option<usize>,
) -> Result<HeadlineOutput> {
    let v = canonical_pearson(settings.bumps);
    let tables = with_workers(workers, || {
        [
            ("kernel_sup_error.csv", sup_error_table(&v, settings)),
            ("clock.csv", clock_table(&v, settings)),
            ("dos.csv", dos_table(&v, settings)),
        ]
    })?;
    let mut files = Vec::new();
    let mut failures = 0;
    for (name, table) in tables {
        let path = out_dir.join(name);
        write_atomic(&path, &table.render())?;
        failures += table.failures();
        files.push(path);
    }
    Ok(HeadlineOutput { files, failures })
}
