//! Record formatting shared by every subcommand.

use std::io::Write;

use ecami_core::InfoReport;
use serde_json::{Map, Number, Value};

use crate::error::{usage, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" | "jsonl" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

pub const REPORT_HEADER: [&str; 9] = [
    "rule",
    "N",
    "q",
    "S_bits",
    "I_half_bits",
    "I_quarter_bits",
    "period",
    "t_av_used",
    "wall_ms",
];

/// `%.12g`: 12 significant digits, trailing zeros dropped, exponent form
/// outside `[1e-5, 1e12)`.
pub fn fmt12(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// One output record; `Cell::Missing` is an empty CSV field and a JSON null.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    UInt(u64),
    Float(f64),
    Text(String),
    /// `;`-separated in CSV, an array in JSON.
    List(Vec<f64>),
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::UInt(v) => v.to_string(),
            Cell::Float(v) => fmt12(*v),
            Cell::Text(s) => s.clone(),
            Cell::List(v) => v.iter().map(|x| fmt12(*x)).collect::<Vec<_>>().join(";"),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::UInt(v) => Value::from(*v),
            Cell::Float(v) => json_float(*v),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::List(v) => Value::Array(v.iter().map(|x| json_float(*x)).collect()),
            Cell::Missing => Value::Null,
        }
    }
}

fn json_float(v: f64) -> Value {
    fmt12(v)
        .parse::<f64>()
        .ok()
        .and_then(Number::from_f64)
        .map_or(Value::Null, Value::Number)
}

pub fn report_row(r: &InfoReport, wall_ms: u64) -> Row {
    Row {
        cells: vec![
            Cell::Int(r.rule as i64),
            Cell::Int(r.n as i64),
            Cell::Float(r.q),
            Cell::Float(r.s_total),
            Cell::Float(r.i_half),
            r.i_quarter.map_or(Cell::Missing, Cell::Float),
            r.period.map_or(Cell::Missing, |p| Cell::Int(p as i64)),
            Cell::Int(r.t_av_used as i64),
            Cell::Int(wall_ms as i64),
        ],
    }
}

/// Job key as it appears in the first three CSV columns.
pub fn job_key(rule: u8, n: u32, q: f64) -> String {
    format!("{rule},{n},{}", fmt12(q))
}

/// Serialises rows under a fixed header as CSV or JSON lines.
pub struct RowWriter<W: Write> {
    format: Format,
    header: Vec<String>,
    out: W,
}

impl<W: Write> RowWriter<W> {
    pub fn new(out: W, format: Format, header: &[&str]) -> Self {
        Self {
            format,
            header: header.iter().map(|s| s.to_string()).collect(),
            out,
        }
    }

    pub fn write_header(&mut self) -> CliResult<()> {
        if self.format == Format::Csv {
            let line = self.csv_line(self.header.clone());
            self.out.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn write_row(&mut self, row: &Row) -> CliResult<()> {
        if row.cells.len() != self.header.len() {
            return usage(format!(
                "row has {} cells, header has {}",
                row.cells.len(),
                self.header.len()
            ));
        }
        let line = match self.format {
            Format::Csv => self.csv_line(row.cells.iter().map(Cell::csv).collect()),
            Format::Json => {
                let obj: Map<String, Value> = self
                    .header
                    .iter()
                    .cloned()
                    .zip(row.cells.iter().map(Cell::json))
                    .collect();
                let mut s = serde_json::to_string(&Value::Object(obj))?;
                s.push('\n');
                s
            }
        };
        self.out.write_all(line.as_bytes())?;
        Ok(())
    }

    pub fn flush(&mut self) -> CliResult<()> {
        self.out.flush()?;
        Ok(())
    }

    fn csv_line(&self, fields: Vec<String>) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&fields).expect("in-memory csv write");
        String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("utf-8 fields")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt12(0.5), "0.5");
        assert_eq!(fmt12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt12(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt12(12.0), "12");
        assert_eq!(fmt12(123456.789), "123456.789");
        assert_eq!(fmt12(1.5e-7), "1.5e-7");
        assert_eq!(fmt12(-2.25e13), "-2.25e13");
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(fmt12(0.00012345678901234), "0.000123456789012");
    }

    #[test]
    fn json_mirrors_csv() {
        let row = Row {
            cells: vec![Cell::Int(3), Cell::Float(1.0 / 3.0), Cell::Missing],
        };
        let mut csv = RowWriter::new(Vec::new(), Format::Csv, &["a", "b", "c"]);
        csv.write_header().unwrap();
        csv.write_row(&row).unwrap();
        assert_eq!(String::from_utf8(csv.out).unwrap(), "a,b,c\n3,0.333333333333,\n");
        let mut js = RowWriter::new(Vec::new(), Format::Json, &["a", "b", "c"]);
        js.write_header().unwrap();
        js.write_row(&row).unwrap();
        assert_eq!(
            String::from_utf8(js.out).unwrap(),
            "{\"a\":3,\"b\":0.333333333333,\"c\":null}\n"
        );
    }
}
