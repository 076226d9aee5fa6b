//! Number formatting and atomic file output shared by every writer.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::distribution::ExcitationDistribution;
use crate::error::{Error, Result};

/// 15 significant digits in scientific notation, independent of locale.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.14e}")
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// `omega_t,p_0,…,p_nmax,meanN,meanN2`, one row per distribution.
pub fn trajectory_csv(rows: &[ExcitationDistribution]) -> String {
    let n_max = rows.iter().map(|r| r.n_max()).max().unwrap_or(0);
    let mut out = String::from("omega_t");
    for n in 0..=n_max {
        let _ = write!(out, ",p_{n}");
    }
    out.push_str(",meanN,meanN2\n");
    for row in rows {
        out.push_str(&fmt_num(row.omega_t));
        for n in 0..=n_max {
            out.push(',');
            out.push_str(&fmt_num(row.p.get(n).copied().unwrap_or(0.0)));
        }
        let _ = writeln!(out, ",{},{}", fmt_num(row.mean()), fmt_num(row.second_moment()));
    }
    out
}

/// Generic CSV from a header and numeric rows.
pub fn table_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt_num).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
