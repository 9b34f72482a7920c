use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{BranchKind, Parity, Sign};
use crate::convergence_lab::SequenceRecord;

/// Column names of CSV schema v1.
pub const CSV_HEADER_V1: [&str; 13] = [
    "N",
    "parity",
    "z2_re",
    "z2_im",
    "sigma2",
    "value",
    "nth_root",
    "ref_limit",
    "abs_err",
    "branch",
    "sign",
    "bits",
    "seed",
];

/// One CSV (or JSON) row of a sequence study. Floats are written in shortest round-trip form,
/// so parsing a row back gives the identical doubles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub parity: Parity,
    pub z2_re: f64,
    pub z2_im: f64,
    pub sigma2: f64,
    pub value: f64,
    pub nth_root: f64,
    pub ref_limit: f64,
    pub abs_err: f64,
    pub branch: BranchKind,
    pub sign: Sign,
    /// 0 for exact evaluation.
    pub bits: usize,
    pub seed: Option<u64>,
}

impl OutputRow {
    pub fn from_record(r: &SequenceRecord, seed: Option<u64>) -> Self {
        Self {
            n: r.n,
            parity: r.parity,
            z2_re: r.z2,
            z2_im: 0.0,
            sigma2: r.sigma2,
            value: r.value,
            nth_root: r.nth_root,
            ref_limit: r.ref_limit,
            abs_err: r.abs_err,
            branch: r.branch.kind,
            sign: r.branch.sign,
            bits: r.bits,
            seed,
        }
    }
}

/// Shortest round-trip decimal, switching to exponent form outside [1e−5, 1e16).
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn write_csv<W: Write, R: Serialize>(out: W, rows: &[R]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// CSV with a fixed header and preformatted cells, for tables whose columns vary by mode.
pub fn write_table<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses CSV schema v1 back into rows.
pub fn read_rows(text: &str) -> csv::Result<Vec<OutputRow>> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
}
