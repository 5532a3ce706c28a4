//! Tabular output: CSV with 17 significant digits and JSON lines.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::{Map, Value};
use thiserror::Error;

use crate::adiabatic::SpectrumPoint;
use crate::config::Format;
use crate::oracle::compare::{ComparisonReport, REFERENCE};
use crate::oracle::Model;
use crate::steady::DerivedParams;

pub const SPECTRUM_COLUMNS: [&str; 10] = [
    "omega_rads",
    "omega_over_gamma",
    "n",
    "k_x",
    "epr_variance",
    "S_db",
    "eof",
    "log_negativity",
    "model",
    "flags",
];

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Table {
        Table {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric value at (`row`, `name`), if present and numeric.
    pub fn num(&self, row: usize, name: &str) -> Option<f64> {
        match self.rows.get(row)?.get(self.column(name)?)? {
            Cell::Num(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }
}

/// Seventeen significant digits, enough to round-trip any f64.
pub fn format_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn point_flags(point: &SpectrumPoint, derived: &DerivedParams) -> Vec<String> {
    let mut flags = Vec::new();
    if point.beyond_elimination {
        flags.push("beyond_elimination".to_string());
    }
    if derived.multistable {
        flags.push("multistable".to_string());
    }
    if let Err(e) = &point.result {
        flags.push(format!("error:{}", e.code()));
    }
    flags
}

fn spectrum_cells(point: &SpectrumPoint, derived: &DerivedParams, model: Model) -> Vec<Cell> {
    let nan = f64::NAN;
    let (n, k_x, x, s, eof, ln) = match &point.result {
        Ok((sf, m)) => (sf.n, sf.k_x, m.epr_variance, m.s_db, m.eof, m.log_negativity),
        Err(_) => (nan, nan, nan, nan, nan, nan),
    };
    vec![
        point.omega.into(),
        (point.omega / derived.gamma).into(),
        n.into(),
        k_x.into(),
        x.into(),
        s.into(),
        eof.into(),
        ln.into(),
        model.name().into(),
        point_flags(point, derived).join(";").into(),
    ]
}

/// One row per frequency with the standard spectrum columns.
pub fn spectrum_table(points: &[SpectrumPoint], derived: &DerivedParams, model: Model) -> Table {
    let mut table = Table::new(&SPECTRUM_COLUMNS);
    for p in points {
        table.push(spectrum_cells(p, derived, model));
    }
    table
}

/// One row per (frequency, model) with a `dev_<model>` column for every
/// model compared against the reference.
pub fn comparison_table(report: &ComparisonReport, derived: &DerivedParams) -> Table {
    let compared: Vec<Model> = report.models.iter().copied().filter(|&m| m != REFERENCE).collect();
    let mut columns: Vec<String> = SPECTRUM_COLUMNS.iter().map(|c| c.to_string()).collect();
    columns.extend(compared.iter().map(|m| format!("dev_{m}")));
    let mut table = Table::new(&columns);
    for row in &report.rows {
        for (&model, result) in &row.results {
            let point = SpectrumPoint {
                omega: row.omega,
                result: result.clone(),
                beyond_elimination: row.omega.abs() >= derived.delta,
            };
            let mut cells = spectrum_cells(&point, derived, model);
            cells.extend(
                compared
                    .iter()
                    .map(|m| Cell::Num(row.deviations.get(m).copied().unwrap_or(f64::NAN))),
            );
            table.push(cells);
        }
    }
    table
}

/// Writes `table` in `format`.
pub fn write_table<W: Write>(table: &Table, format: Format, out: W) -> Result<(), OutputError> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(out);
            w.write_record(&table.columns)?;
            for row in &table.rows {
                w.write_record(row.iter().map(|c| match c {
                    Cell::Num(x) => format_num(*x),
                    Cell::Text(s) => s.clone(),
                }))?;
            }
            w.flush()?;
        }
        Format::JsonLines => {
            let mut out = out;
            for row in &table.rows {
                let obj: Map<String, Value> = table
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, c)| {
                        let v = match c {
                            // non-finite numbers become null
                            Cell::Num(x) => Value::from(*x),
                            Cell::Text(s) => Value::from(s.as_str()),
                        };
                        (k.clone(), v)
                    })
                    .collect();
                serde_json::to_writer(&mut out, &obj).map_err(io::Error::from)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

/// Writes `table` to `path`, or to stdout when `path` is `None`.
pub fn emit_rows(table: &Table, format: Format, path: Option<&Path>) -> Result<(), OutputError> {
    match path {
        Some(p) => write_table(table, format, BufWriter::new(File::create(p)?)),
        None => write_table(table, format, io::stdout().lock()),
    }
}

/// Reads JSON lines written by [`write_table`]. Column order follows the
/// first record.
pub fn read_jsonlines(text: &str) -> Result<Table, OutputError> {
    let mut table = Table::default();
    for (idx, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let malformed = |msg: String| OutputError::Malformed { line: idx + 1, msg };
        let obj: Map<String, Value> = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
        if table.columns.is_empty() {
            table.columns = obj.keys().cloned().collect();
        }
        let row = table
            .columns
            .iter()
            .map(|k| match obj.get(k) {
                Some(Value::Number(n)) => n
                    .as_f64()
                    .map(Cell::Num)
                    .ok_or_else(|| malformed(format!("'{k}' out of range"))),
                Some(Value::Null) => Ok(Cell::Num(f64::NAN)),
                Some(Value::String(s)) => Ok(Cell::Text(s.clone())),
                Some(other) => Err(malformed(format!("'{k}' has unexpected value {other}"))),
                None => Err(malformed(format!("missing field '{k}'"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        table.rows.push(row);
    }
    Ok(table)
}

/// Reads CSV written by [`write_table`]; cells that parse as numbers are
/// numeric.
pub fn read_csv(text: &str) -> Result<Table, OutputError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut table = Table::new(&reader.headers()?.iter().collect::<Vec<_>>());
    for record in reader.records() {
        let record = record?;
        table.rows.push(
            record
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map(Cell::Num)
                        .unwrap_or_else(|_| Cell::Text(s.to_string()))
                })
                .collect(),
        );
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn render(table: &Table, format: Format) -> String {
        let mut buf = Vec::new();
        write_table(table, format, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn header_only_when_empty() {
        let t = Table::new(&SPECTRUM_COLUMNS);
        assert_eq!(render(&t, Format::Csv), format!("{}\n", SPECTRUM_COLUMNS.join(",")));
        assert_eq!(render(&t, Format::JsonLines), "");
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_num(0.1), "1.0000000000000001e-1");
        for x in [std::f64::consts::PI, 1e-300, -2.5e17, 5e-324] {
            assert_eq!(format_num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn csv_quotes_text() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1.0.into(), "x,y".into()]);
        assert_eq!(render(&t, Format::Csv), "a,b\n1.0000000000000000e0,\"x,y\"\n");
        assert_eq!(read_csv(&render(&t, Format::Csv)).unwrap(), t);
    }

    #[test]
    fn jsonlines_round_trip() {
        let mut t = Table::new(&["omega_rads", "model", "flags"]);
        t.push(vec![(1.0f64 / 3.0).into(), "rwa3".into(), "".into()]);
        t.push(vec![(-7.25e-12).into(), "full6".into(), "error:SingularDrift".into()]);
        assert_eq!(read_jsonlines(&render(&t, Format::JsonLines)).unwrap(), t);
    }

    #[test]
    fn nan_survives_as_null() {
        let mut t = Table::new(&["x"]);
        t.push(vec![f64::NAN.into()]);
        let text = render(&t, Format::JsonLines);
        assert_eq!(text, "{\"x\":null}\n");
        assert!(matches!(read_jsonlines(&text).unwrap().rows[0][0], Cell::Num(x) if x.is_nan()));
    }
}
