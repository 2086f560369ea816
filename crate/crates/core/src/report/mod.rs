//! Data products of the command-line front end: the reference table,
//! figure data and CSV output helpers.

pub mod figures;
pub mod table1;

use std::io::Write;

/// `x` with exactly `decimals` digits after the point, rounding the exact
/// binary value half-to-even.
pub fn fixed(x: f64, decimals: usize) -> String {
    format!("{x:.decimals$}")
}

pub fn round_half_even(x: f64, decimals: usize) -> f64 {
    fixed(x, decimals).parse().expect("formatted float parses")
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn real(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x}")
    }
}

/// Writes a header and records as UTF-8 CSV with LF line endings.
pub fn write_csv<W: Write>(out: W, header: &[&str], records: &[Vec<String>]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header)?;
    for r in records {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}
