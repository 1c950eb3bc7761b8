//! Result tables: comma-separated values with `#` metadata lines on top.
//!
//! Floats are written with 17 significant digits, so every table parses back
//! to the same `ResultRow` values bit for bit. Missing cells are empty.

use std::fmt;
use std::io::{self, Read, Write};

/// One output record. Each table fills the subset of columns that belongs
/// to its quantity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultRow {
    pub row: u64,
    pub scenario: String,
    pub z0: Option<f64>,
    pub beta: Option<f64>,
    pub a: Option<f64>,
    pub method: Option<String>,
    pub f_x: Option<f64>,
    pub f_y: Option<f64>,
    pub f_z: Option<f64>,
    pub g_plus: Option<f64>,
    pub g_minus: Option<f64>,
    pub a_down: Option<f64>,
    pub a_up: Option<f64>,
    pub g_plus_error: Option<f64>,
    pub g_minus_error: Option<f64>,
    pub vf_excited: Option<f64>,
    pub vf_ground: Option<f64>,
    pub rr_any_state: Option<f64>,
    pub total_excited: Option<f64>,
    pub total_ground: Option<f64>,
    pub accelerated_factor: Option<f64>,
    pub thermal_factor: Option<f64>,
    pub difference: Option<f64>,
    pub t: Option<f64>,
    pub energy: Option<f64>,
    pub equilibrium_energy: Option<f64>,
    pub decay_rate: Option<f64>,
    pub mc_energy: Option<f64>,
    pub mc_standard_error: Option<f64>,
    pub mc_n1: Option<u64>,
    pub mc_n2: Option<u64>,
    pub mc_seed: Option<u64>,
}

/// Closed-form against oracle value of one spectral quantity on one row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CompareRow {
    pub row: u64,
    pub scenario: String,
    pub z0: Option<f64>,
    pub beta: Option<f64>,
    pub a: Option<f64>,
    pub quantity: String,
    pub closed: f64,
    pub oracle: f64,
    pub abs_diff: f64,
    pub achieved_error: f64,
    pub tolerance: f64,
    pub flagged: bool,
}

#[derive(Debug)]
pub enum TableError {
    Io(io::Error),
    Csv(csv::Error),
    UnknownColumn(String),
    BadCell { column: String, value: String },
}

impl fmt::Display for TableError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableError::Io(e) => write!(f, "{e}"),
            TableError::Csv(e) => write!(f, "{e}"),
            TableError::UnknownColumn(c) => write!(f, "unknown column `{c}`"),
            TableError::BadCell { column, value } => {
                write!(f, "cannot parse `{value}` in column `{column}`")
            }
        }
    }
}

impl std::error::Error for TableError {}

impl From<io::Error> for TableError {
    fn from(e: io::Error) -> Self {
        TableError::Io(e)
    }
}

impl From<csv::Error> for TableError {
    fn from(e: csv::Error) -> Self {
        TableError::Csv(e)
    }
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_float(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

fn opt_int(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn parse_float(column: &str, s: &str) -> Result<Option<f64>, TableError> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| TableError::BadCell {
        column: column.into(),
        value: s.into(),
    })
}

fn parse_int(column: &str, s: &str) -> Result<Option<u64>, TableError> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| TableError::BadCell {
        column: column.into(),
        value: s.into(),
    })
}

fn required<T>(column: &str, v: Option<T>) -> Result<T, TableError> {
    v.ok_or_else(|| TableError::BadCell {
        column: column.into(),
        value: String::new(),
    })
}

macro_rules! float_columns {
    ($m:ident) => {
        $m!(
            z0,
            beta,
            a,
            f_x,
            f_y,
            f_z,
            g_plus,
            g_minus,
            a_down,
            a_up,
            g_plus_error,
            g_minus_error,
            vf_excited,
            vf_ground,
            rr_any_state,
            total_excited,
            total_ground,
            accelerated_factor,
            thermal_factor,
            difference,
            t,
            energy,
            equilibrium_energy,
            decay_rate,
            mc_energy,
            mc_standard_error
        )
    };
}

impl ResultRow {
    pub fn cell(&self, column: &str) -> Result<String, TableError> {
        macro_rules! floats {
            ($($f:ident),*) => {
                match column {
                    $(stringify!($f) => return Ok(opt_float(self.$f)),)*
                    _ => {}
                }
            };
        }
        float_columns!(floats);
        Ok(match column {
            "row" => self.row.to_string(),
            "scenario" => self.scenario.clone(),
            "method" => self.method.clone().unwrap_or_default(),
            "mc_n1" => opt_int(self.mc_n1),
            "mc_n2" => opt_int(self.mc_n2),
            "mc_seed" => opt_int(self.mc_seed),
            other => return Err(TableError::UnknownColumn(other.into())),
        })
    }

    pub fn set_cell(&mut self, column: &str, value: &str) -> Result<(), TableError> {
        macro_rules! floats {
            ($($f:ident),*) => {
                match column {
                    $(stringify!($f) => { self.$f = parse_float(column, value)?; return Ok(()); })*
                    _ => {}
                }
            };
        }
        float_columns!(floats);
        match column {
            "row" => self.row = required(column, parse_int(column, value)?)?,
            "scenario" => self.scenario = value.into(),
            "method" => self.method = (!value.is_empty()).then(|| value.into()),
            "mc_n1" => self.mc_n1 = parse_int(column, value)?,
            "mc_n2" => self.mc_n2 = parse_int(column, value)?,
            "mc_seed" => self.mc_seed = parse_int(column, value)?,
            other => return Err(TableError::UnknownColumn(other.into())),
        }
        Ok(())
    }
}

pub const COMPARE_COLUMNS: [&str; 12] = [
    "row",
    "scenario",
    "z0",
    "beta",
    "a",
    "quantity",
    "closed",
    "oracle",
    "abs_diff",
    "achieved_error",
    "tolerance",
    "flagged",
];

impl CompareRow {
    fn cells(&self) -> Vec<String> {
        vec![
            self.row.to_string(),
            self.scenario.clone(),
            opt_float(self.z0),
            opt_float(self.beta),
            opt_float(self.a),
            self.quantity.clone(),
            format_float(self.closed),
            format_float(self.oracle),
            format_float(self.abs_diff),
            format_float(self.achieved_error),
            format_float(self.tolerance),
            self.flagged.to_string(),
        ]
    }

    fn from_cells(cells: &csv::StringRecord) -> Result<Self, TableError> {
        let get = |i: usize| cells.get(i).unwrap_or("");
        let float =
            |i: usize| required(COMPARE_COLUMNS[i], parse_float(COMPARE_COLUMNS[i], get(i))?);
        Ok(CompareRow {
            row: required("row", parse_int("row", get(0))?)?,
            scenario: get(1).into(),
            z0: parse_float("z0", get(2))?,
            beta: parse_float("beta", get(3))?,
            a: parse_float("a", get(4))?,
            quantity: get(5).into(),
            closed: float(6)?,
            oracle: float(7)?,
            abs_diff: float(8)?,
            achieved_error: float(9)?,
            tolerance: float(10)?,
            flagged: get(11).parse().map_err(|_| TableError::BadCell {
                column: "flagged".into(),
                value: get(11).into(),
            })?,
        })
    }
}

fn write_comments<W: Write>(out: &mut W, comments: &[String]) -> io::Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    Ok(())
}

pub fn write_rows<W: Write>(
    mut out: W,
    comments: &[String],
    columns: &[&str],
    rows: &[ResultRow],
) -> Result<(), TableError> {
    write_comments(&mut out, comments)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns)?;
    for r in rows {
        let cells = columns
            .iter()
            .map(|c| r.cell(c))
            .collect::<Result<Vec<_>, _>>()?;
        w.write_record(&cells)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_compare<W: Write>(
    mut out: W,
    comments: &[String],
    rows: &[CompareRow],
) -> Result<(), TableError> {
    write_comments(&mut out, comments)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARE_COLUMNS)?;
    for r in rows {
        w.write_record(r.cells())?;
    }
    w.flush()?;
    Ok(())
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input)
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<ResultRow>, TableError> {
    let mut r = reader(input);
    let headers = r.headers()?.clone();
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let mut row = ResultRow::default();
        for (column, value) in headers.iter().zip(record.iter()) {
            row.set_cell(column, value)?;
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_compare<R: Read>(input: R) -> Result<Vec<CompareRow>, TableError> {
    let mut r = reader(input);
    if r.headers()?.iter().ne(COMPARE_COLUMNS) {
        return Err(TableError::UnknownColumn(
            r.headers()?.iter().collect::<Vec<_>>().join(","),
        ));
    }
    r.records()
        .map(|rec| CompareRow::from_cells(&rec?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_round_trip() {
        let rows = vec![
            ResultRow {
                row: 3,
                scenario: "static_mirror_thermal".into(),
                z0: Some(0.1),
                beta: Some(f64::INFINITY),
                method: Some("closed".into()),
                g_plus: Some(1.0 / 3.0),
                g_minus: Some(0.0),
                mc_n1: Some(12),
                ..Default::default()
            },
            ResultRow {
                row: 4,
                scenario: "accelerated_mirror".into(),
                a: Some(std::f64::consts::PI),
                f_x: Some(-1.2345678901234567e-300),
                ..Default::default()
            },
        ];
        let columns = [
            "row", "scenario", "z0", "beta", "a", "method", "f_x", "g_plus", "g_minus", "mc_n1",
        ];
        let mut buf = Vec::new();
        write_rows(&mut buf, &["quantity: test".into()], &columns, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# quantity: test\nrow,scenario"));
        assert_eq!(read_rows(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn compare_round_trip() {
        let rows = vec![CompareRow {
            row: 0,
            scenario: "static_free_space".into(),
            quantity: "g_plus".into(),
            closed: 1.0,
            oracle: 1.0 + 1e-12,
            abs_diff: 1e-12,
            achieved_error: 3e-9,
            tolerance: 3e-9,
            ..Default::default()
        }];
        let mut buf = Vec::new();
        write_compare(&mut buf, &[], &rows).unwrap();
        assert_eq!(read_compare(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn unknown_column_is_an_error() {
        assert!(read_rows("row,bogus\n1,2\n".as_bytes()).is_err());
        assert!(ResultRow::default().cell("bogus").is_err());
    }
}
