use std::path::Path;

use serde::Serialize;

use crate::CliError;

/// A numeric table written as CSV. The first column is always `n`, except
/// for per-probe traces, which lead with the probe index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trace {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Trace {
    pub fn new(columns: &[&str]) -> Self {
        Trace { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| format_value(v))).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

/// Integers print without a fraction; everything else in shortest
/// round-trip form.
fn format_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        ryu::Buffer::new().format(v).to_string()
    }
}

pub fn emit_trace(trace: &Trace, path: &Path) -> Result<(), CliError> {
    std::fs::write(path, trace.to_csv()).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// One value per line in the first column; `#` starts a comment line.
pub fn read_sequence(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_sequence(&text).map_err(|(line, message)| CliError::Sequence { path: path.to_path_buf(), line, message })
}

pub(crate) fn parse_sequence(text: &str) -> Result<Vec<f64>, (u64, String)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| (e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = record.get(0).unwrap_or("");
        if record.len() != 1 {
            return Err((line, format!("expected one value, found {} fields", record.len())));
        }
        let v: f64 = field.parse().map_err(|_| (line, format!("'{field}' is not a number")))?;
        if !v.is_finite() {
            return Err((line, format!("'{field}' is not finite")));
        }
        out.push(v);
    }
    Ok(out)
}
