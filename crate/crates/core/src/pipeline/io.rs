//! CSV input and output. Numbers are written with 17 significant digits so
//! that every file reads back bit-exactly.

use std::path::Path;

use crate::error::{Error, Result};
use crate::multicurve::TenorStructure;
use crate::tenor_extension::ForwardCurve;

pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header plus rows of raw cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self { header: header.iter().map(|s| s.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&x| fmt(x)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::invalid(format!("missing column {name}")))
    }

    pub fn numbers(&self, col: usize) -> Result<Vec<f64>> {
        self.rows.iter().enumerate().map(|(i, r)| parse_number(&r[col], i + 2)).collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r.records().map(|rec| Ok(rec?.iter().map(str::to_string).collect())).collect::<Result<_>>()?;
        Ok(Self { header, rows })
    }
}

fn parse_number(cell: &str, line: usize) -> Result<f64> {
    let v: f64 = cell.parse().map_err(|_| Error::invalid(format!("line {line}: `{cell}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::invalid(format!("line {line}: non-finite value")));
    }
    Ok(v)
}

/// Checks the header and that every cell outside `text_columns` is a finite number.
pub fn validate_table(table: &Table, expected_prefix: &[&str], text_columns: &[&str]) -> Result<()> {
    if table.header.len() < expected_prefix.len() || table.header.iter().zip(expected_prefix).any(|(a, b)| a != b) {
        return Err(Error::invalid(format!("header {:?} does not start with {:?}", table.header, expected_prefix)));
    }
    for (i, row) in table.rows.iter().enumerate() {
        if row.len() != table.header.len() {
            return Err(Error::invalid(format!("line {}: {} cells for {} columns", i + 2, row.len(), table.header.len())));
        }
        for (h, cell) in table.header.iter().zip(row) {
            if !text_columns.contains(&h.as_str()) {
                parse_number(cell, i + 2)?;
            }
        }
    }
    Ok(())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + b.abs())
}

/// `maturity_years, discount_factor` at every master date; `T_0` may be omitted.
pub fn load_discount(path: &Path, tenor: &TenorStructure<f64>) -> Result<Vec<f64>> {
    let t = Table::read(path)?;
    let m = t.numbers(t.column("maturity_years")?)?;
    let b = t.numbers(t.column("discount_factor")?)?;
    let mut out = Vec::with_capacity(tenor.n() + 1);
    let mut j = 0;
    for l in 0..=tenor.n() {
        let date = tenor.date(l);
        if j < m.len() && close(m[j], date) {
            out.push(b[j]);
            j += 1;
        } else if l == 0 {
            out.push(1.0);
        } else {
            return Err(Error::invalid(format!("{}: no discount factor for maturity {date}", path.display())));
        }
    }
    if j != m.len() {
        return Err(Error::invalid(format!("{}: maturities off the tenor grid", path.display())));
    }
    Ok(out)
}

/// `tenor, maturity_years, libor_rate` with one row per payment date of every tenor.
pub fn load_libor(path: &Path, tenor: &TenorStructure<f64>) -> Result<Vec<Vec<f64>>> {
    let t = Table::read(path)?;
    let lab = t.column("tenor")?;
    let m = t.numbers(t.column("maturity_years")?)?;
    let rate = t.numbers(t.column("libor_rate")?)?;
    let mut out = Vec::new();
    for (x, info) in tenor.tenors().iter().enumerate() {
        let nx = tenor.n_x(x)?;
        let mut row = vec![f64::NAN; nx];
        for (i, r) in t.rows.iter().enumerate() {
            if r[lab] != info.label {
                continue;
            }
            let k = (1..=nx).find(|&k| close(m[i], tenor.tenor_date(x, k).unwrap_or(f64::NAN)));
            match k {
                Some(k) => row[k - 1] = rate[i],
                None => return Err(Error::invalid(format!("{}: maturity {} is not a {} payment date", path.display(), m[i], info.label))),
            }
        }
        if let Some(k) = row.iter().position(|v| v.is_nan()) {
            return Err(Error::invalid(format!("{}: missing {} rate for period {}", path.display(), info.label, k + 1)));
        }
        out.push(row);
    }
    Ok(out)
}

/// `maturity_years, forward_rate`, read as a piecewise linear curve.
pub fn load_forward_curve(path: &Path) -> Result<ForwardCurve<f64>> {
    let t = Table::read(path)?;
    let m = t.numbers(t.column("maturity_years")?)?;
    let f = t.numbers(t.column("forward_rate")?)?;
    ForwardCurve::table(m, f)
}
