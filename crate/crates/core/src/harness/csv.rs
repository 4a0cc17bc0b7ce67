//! Sweep results as CSV, one row per (sweep value, solver).
//!
//! ```text
//! sweep_param,sweep_value,solver,mean_rate,stderr_rate,mean_time_s,trials
//! lp,2,bcd-discrete,3.21765432,0.0123456789,0,100
//! ```

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use super::sweep::SweepResult;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "sweep_param,sweep_value,solver,mean_rate,stderr_rate,mean_time_s,trials";

/// `%.9g`: nine significant digits, trailing zeros trimmed, exponent form
/// outside [1e-4, 1e9).
pub fn format_g9(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return "0".into();
    }
    const P: i32 = 9;
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (P - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes the CSV to `out`. Solvers with no successful trial at a point are omitted.
pub fn write_csv<W: Write>(result: &SweepResult, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for point in &result.points {
        for s in point.summaries.iter().filter(|s| s.trials > 0) {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                result.param,
                format_g9(point.value),
                s.solver.name(),
                format_g9(s.mean_rate),
                format_g9(s.stderr_rate),
                format_g9(s.mean_time_s),
                s.trials
            )?;
        }
    }
    Ok(())
}

pub fn csv_string(result: &SweepResult) -> String {
    let mut buf = Vec::new();
    write_csv(result, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV is ASCII")
}

/// Writes the CSV file at `path`, creating parent directories.
pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let io_err = |e: io::Error| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    fs::write(path, csv_string(result)).map_err(io_err)
}
