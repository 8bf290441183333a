//! Plot-ready record streams. Columns are fixed per kind; every float is
//! written as `{:.16e}` (17 significant digits) so CSV and JSON round-trip
//! to the same bits.

use std::io::{self, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    GeodesicSample,
    CutPoint,
    SpherePoint,
    Check,
    Distance,
}

const MATRIX: [&str; 9] = ["r11", "r12", "r13", "r21", "r22", "r23", "r31", "r32", "r33"];

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::GeodesicSample => "geodesic_sample",
            Kind::CutPoint => "cut_point",
            Kind::SpherePoint => "sphere_point",
            Kind::Check => "check",
            Kind::Distance => "distance",
        }
    }

    pub fn columns(self) -> Vec<&'static str> {
        let with_pose = |head: &[&'static str]| {
            let mut cols = head.to_vec();
            cols.extend_from_slice(&MATRIX);
            cols.extend_from_slice(&["x", "y", "z"]);
            cols
        };
        match self {
            Kind::GeodesicSample => with_pose(&["t", "phi0", "beta"]),
            Kind::CutPoint => {
                let mut cols = with_pose(&["beta", "t1"]);
                cols.push("branch");
                cols
            }
            Kind::SpherePoint => with_pose(&["radius", "phi0", "beta", "t1"]),
            Kind::Check => vec!["id", "name", "passed", "observed", "bound", "time_limit"],
            Kind::Distance => vec![
                "distance",
                "phi0",
                "beta",
                "t",
                "residual",
                "multiplicity",
                "oracle_length",
                "oracle_mismatch",
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(u64),
    Text(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Builder for one row; the caller pushes values in column order.
#[derive(Debug, Default)]
pub struct Row(Vec<Value>);

impl Row {
    pub fn new() -> Self {
        Row(Vec::new())
    }

    pub fn nums(mut self, xs: impl IntoIterator<Item = f64>) -> Self {
        self.0.extend(xs.into_iter().map(Value::Num));
        self
    }

    pub fn int(mut self, n: u64) -> Self {
        self.0.push(Value::Int(n));
        self
    }

    pub fn text(mut self, s: &'static str) -> Self {
        self.0.push(Value::Text(s));
        self
    }
}

pub fn write(out: &mut impl Write, format: Format, kind: Kind, rows: &[Row]) -> io::Result<()> {
    let cols = kind.columns();
    for row in rows {
        assert_eq!(row.0.len(), cols.len(), "{} row has the wrong width", kind.name());
    }
    match format {
        Format::Csv => write_csv(out, &cols, rows),
        Format::Json => write_json(out, kind, &cols, rows),
    }
}

fn write_csv(out: &mut impl Write, cols: &[&str], rows: &[Row]) -> io::Result<()> {
    writeln!(out, "{}", cols.join(","))?;
    for row in rows {
        let cells: Vec<String> = row
            .0
            .iter()
            .map(|v| match v {
                Value::Num(x) => num(*x),
                Value::Int(n) => n.to_string(),
                Value::Text(s) => (*s).to_string(),
            })
            .collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

fn write_json(out: &mut impl Write, kind: Kind, cols: &[&str], rows: &[Row]) -> io::Result<()> {
    writeln!(out, "[")?;
    for (i, row) in rows.iter().enumerate() {
        let mut fields = vec![format!("\"kind\":\"{}\"", kind.name())];
        for (col, v) in cols.iter().zip(&row.0) {
            let rendered = match v {
                // JSON has no NaN or infinity
                Value::Num(x) if !x.is_finite() => "null".to_string(),
                Value::Num(x) => num(*x),
                Value::Int(n) => n.to_string(),
                Value::Text(s) => format!("\"{s}\""),
            };
            fields.push(format!("\"{col}\":{rendered}"));
        }
        let sep = if i + 1 < rows.len() { "," } else { "" };
        writeln!(out, "  {{{}}}{sep}", fields.join(","))?;
    }
    writeln!(out, "]")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn render(format: Format, kind: Kind, rows: &[Row]) -> String {
        let mut buf = Vec::new();
        write(&mut buf, format, kind, rows).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn floats_round_trip_through_text() {
        for x in [0.1, -1.0 / 3.0, std::f64::consts::PI, 1e-300, 5e-324, -0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn csv_header_matches_columns() {
        let rows = [Row::new().int(2).text("known-cut-times").int(1).nums([0.0, 1e-12, 1.0])];
        let text = render(Format::Csv, Kind::Check, &rows);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "id,name,passed,observed,bound,time_limit");
        assert!(lines.next().unwrap().starts_with("2,known-cut-times,1,0.0000000000000000e0,"));
    }

    #[test]
    fn json_nulls_non_finite() {
        let rows = [Row::new().nums([1.0, 0.0, 0.0, 1.0, 0.0]).text("unique").nums([f64::NAN, f64::NAN])];
        let text = render(Format::Json, Kind::Distance, &rows);
        assert!(text.contains("\"oracle_length\":null"));
        assert!(text.contains("\"kind\":\"distance\""));
    }

    #[test]
    #[should_panic(expected = "wrong width")]
    fn width_is_enforced() {
        render(Format::Csv, Kind::Check, &[Row::new().nums([1.0])]);
    }
}
