//! Functional time series as CSV: round-trip exact digits, LF line endings.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::functionals::{BalanceResiduals, FunctionalRecord};
use crate::scalar::Real;

const BASE_COLUMNS: [&str; 11] = [
    "t", "l2", "weighted", "hminus1", "h1", "j_l2", "j_weighted", "phi", "jj", "lyap", "batchelor",
];

pub fn timeseries_header() -> Vec<&'static str> {
    BASE_COLUMNS
        .iter()
        .chain(BalanceResiduals::<f64>::NAMES.iter())
        .copied()
        .collect()
}

fn row<T: Real>(r: &FunctionalRecord<T>) -> [T; 15] {
    let [e, g, ej, gj] = r.residuals.values();
    [
        r.t, r.l2, r.weighted, r.hminus1, r.h1, r.j_l2, r.j_weighted, r.phi, r.jj, r.lyap,
        r.batchelor, e, g, ej, gj,
    ]
}

pub fn write_timeseries_to<T: Real, W: Write>(records: &[FunctionalRecord<T>], out: W) -> Result<()> {
    if records.windows(2).any(|w| !(w[0].t < w[1].t)) {
        return Err(Error::Invalid("time series records must be strictly time-ordered".into()));
    }
    let mut w = ::csv::WriterBuilder::new()
        .terminator(::csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(timeseries_header())?;
    for r in records {
        w.write_record(row(r).iter().map(|v| v.to_exact_string()))?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

/// Writes the series atomically to `path`.
pub fn write_timeseries<T: Real>(records: &[FunctionalRecord<T>], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_timeseries_to(records, &mut buf)?;
    super::write_atomic(path, &buf)
}

/// Reads a series written by [`write_timeseries`]. The quadratic breakdown is
/// not stored, so `quad` comes back zeroed.
pub fn read_timeseries<T: Real>(path: &Path) -> Result<Vec<FunctionalRecord<T>>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rd = ::csv::Reader::from_reader(file);
    let header: Vec<String> = rd.headers()?.iter().map(String::from).collect();
    if header != timeseries_header() {
        return Err(Error::Invalid(format!("{}: unexpected header {header:?}", path.display())));
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let v = rec
            .iter()
            .map(|s| {
                T::from_str_radix(s, 10)
                    .map_err(|_| Error::Invalid(format!("{}: bad number `{s}`", path.display())))
            })
            .collect::<Result<Vec<T>>>()?;
        out.push(FunctionalRecord {
            t: v[0],
            l2: v[1],
            weighted: v[2],
            hminus1: v[3],
            h1: v[4],
            j_l2: v[5],
            j_weighted: v[6],
            phi: v[7],
            jj: v[8],
            lyap: v[9],
            batchelor: v[10],
            residuals: BalanceResiduals {
                energy: v[11],
                gamma: v[12],
                energy_j: v[13],
                gamma_j: v[14],
            },
            quad: Default::default(),
        });
    }
    Ok(out)
}
