use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::{RunReport, SweepTable};
use crate::error::{Error, Result};

pub const REPORT_HEADER: [&str; 15] = [
    "mechanism",
    "n",
    "m",
    "p",
    "eps",
    "delta",
    "rho",
    "eps_prime",
    "delta_inf",
    "trial",
    "seed",
    "true_weight",
    "private_weight",
    "error",
    "runtime_ns",
];

// `{}` on floats is locale independent and round-trips exactly
fn report_fields(report: &RunReport) -> impl Iterator<Item = [String; 15]> + '_ {
    let c = &report.config;
    report.records.iter().map(move |r| {
        [
            c.mechanism.to_string(),
            c.n.to_string(),
            c.m.to_string(),
            c.p.to_string(),
            c.eps.to_string(),
            c.delta.to_string(),
            c.rho.to_string(),
            c.eps_prime.to_string(),
            c.delta_inf.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.true_weight.to_string(),
            r.private_weight.to_string(),
            r.error.to_string(),
            r.runtime_ns.to_string(),
        ]
    })
}

pub fn write_report_csv<W: Write>(report: &RunReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for row in report_fields(report) {
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Per-trial rows of every sweep point, each prefixed by the sweep density.
pub fn write_sweep_csv<W: Write>(table: &SweepTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(std::iter::once("sweep_param").chain(REPORT_HEADER))?;
    for point in &table.points {
        let p = point.p.to_string();
        for row in report_fields(&point.report) {
            w.write_record(std::iter::once(p.as_str()).chain(row.iter().map(String::as_str)))?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn emit_csv(report: &RunReport, path: impl AsRef<Path>) -> Result<()> {
    write_report_csv(report, create(path.as_ref())?)
}

pub fn emit_sweep_csv(table: &SweepTable, path: impl AsRef<Path>) -> Result<()> {
    write_sweep_csv(table, create(path.as_ref())?)
}
