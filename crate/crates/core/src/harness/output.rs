use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::sweep::{Estimate, ResultRow, ResultTable};

pub const CSV_HEADER: &str = "mode,scheme,gamma,replications,hrr,hrr_ci,mean_sv,mean_sv_ci,lrr,lrr_ci,usage,usage_ci,se,se_ci,mean_eps,tx_multiplicity";

/// `%g`-style formatting with six significant digits.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(format_sig6).unwrap_or_default()
}

fn estimate_cells(e: &Estimate) -> [String; 2] {
    [cell(e.value), cell(e.ci)]
}

fn csv_row(r: &ResultRow) -> String {
    let mut fields = vec![
        r.mode.as_str().to_string(),
        r.scheme.name().to_string(),
        r.gamma.to_string(),
        r.replications.to_string(),
    ];
    for e in [&r.hrr, &r.mean_sv, &r.lrr, &r.usage, &r.se] {
        fields.extend(estimate_cells(e));
    }
    fields.push(cell(r.mean_eps));
    fields.push(cell(r.tx_multiplicity));
    fields.join(",")
}

pub fn render_csv(table: &ResultTable) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in &table.rows {
        out.push_str(&csv_row(row));
        out.push('\n');
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io)?;
    }
    fs::write(path, contents).map_err(io)
}

pub fn emit_csv(table: &ResultTable, path: &Path) -> Result<()> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    write_file(path, &render_csv(table))
}

/// Whitespace-separated columns, one block per scheme separated by two blank
/// lines (select with `index`); `?` marks missing values.
pub fn emit_gnuplot(table: &ResultTable, path: &Path) -> Result<()> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    let gp = |v: Option<f64>| v.map(format_sig6).unwrap_or_else(|| "?".into());
    let mut out = String::new();
    let mut current = None;
    for r in &table.rows {
        if current != Some(r.scheme) {
            if current.is_some() {
                out.push_str("\n\n");
            }
            current = Some(r.scheme);
            let _ = writeln!(out, "# {} {}", r.mode, r.scheme);
            let _ = writeln!(
                out,
                "# gamma hrr hrr_ci mean_sv mean_sv_ci lrr lrr_ci usage usage_ci se se_ci mean_eps tx_multiplicity"
            );
        }
        let mut cols = vec![r.gamma.to_string()];
        for e in [&r.hrr, &r.mean_sv, &r.lrr, &r.usage, &r.se] {
            cols.push(gp(e.value));
            cols.push(gp(e.ci));
        }
        cols.push(gp(r.mean_eps));
        cols.push(gp(r.tx_multiplicity));
        let _ = writeln!(out, "{}", cols.join(" "));
    }
    write_file(path, &out)
}
