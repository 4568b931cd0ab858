//! CSV, JSON and PGM output of sweep tables.

use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, Result};
use crate::point::{Status, SweepResultRow};

pub const CSV_HEADER: [&str; 13] = [
    "omega",
    "E",
    "gamma",
    "phi",
    "T",
    "exists",
    "mu_min",
    "d_rhp",
    "tau_min",
    "n_c",
    "branch",
    "negative_pair",
    "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Pgm,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "pgm" => Ok(Format::Pgm),
            other => Err(CliError::Config(format!("unknown format `{other}`"))),
        }
    }
}

/// C's `%.12g`.
pub fn format_g(x: f64) -> String {
    const P: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= P {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn branch_string(b: &[i64]) -> String {
    b.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

pub fn write_csv<W: Write>(rows: &[SweepResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            format_g(r.omega),
            format_g(r.e),
            format_g(r.gamma),
            format_g(r.phi),
            format_g(r.period),
            r.exists.to_string(),
            format_g(r.mu_min),
            format_g(r.d_rhp),
            format_g(r.tau_min),
            r.n_c.to_string(),
            branch_string(&r.branch),
            r.negative_pair.to_string(),
            r.status.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepResultRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(String::from).collect();
    if header != CSV_HEADER {
        return Err(CliError::Config(format!("unexpected csv header {header:?}")));
    }
    let bad = |what: &str, v: &str| CliError::Config(format!("bad {what} `{v}`"));
    let f = |v: &str| v.parse::<f64>().map_err(|_| bad("number", v));
    let b = |v: &str| v.parse::<bool>().map_err(|_| bad("boolean", v));
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let branch = if rec[10].is_empty() {
            Vec::new()
        } else {
            rec[10]
                .split(';')
                .map(|v| v.parse::<i64>().map_err(|_| bad("branch", v)))
                .collect::<Result<Vec<_>>>()?
        };
        rows.push(SweepResultRow {
            omega: f(&rec[0])?,
            e: f(&rec[1])?,
            gamma: f(&rec[2])?,
            phi: f(&rec[3])?,
            period: f(&rec[4])?,
            exists: b(&rec[5])?,
            mu_min: f(&rec[6])?,
            d_rhp: f(&rec[7])?,
            tau_min: f(&rec[8])?,
            n_c: rec[9].parse().map_err(|_| bad("n_c", &rec[9]))?,
            branch,
            negative_pair: b(&rec[11])?,
            status: Status::parse(&rec[12]).ok_or_else(|| bad("status", &rec[12]))?,
        });
    }
    Ok(rows)
}

/// Array of objects with the CSV field names; non-finite numbers become `null`.
pub fn write_json<W: Write>(rows: &[SweepResultRow], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Numeric value of a named column.
pub fn column_value(r: &SweepResultRow, column: &str) -> Result<f64> {
    Ok(match column {
        "mu_min" => r.mu_min,
        "d_rhp" => r.d_rhp,
        "tau_min" => r.tau_min,
        "exists" => f64::from(u8::from(r.exists)),
        "n_c" => r.n_c as f64,
        "negative_pair" => f64::from(u8::from(r.negative_pair)),
        "T" => r.period,
        "branch" => r.branch.iter().map(|v| v.abs()).max().unwrap_or(0) as f64,
        other => return Err(CliError::Config(format!("column `{other}` cannot be drawn"))),
    })
}

/// Binary graymap (P5) of one column: width = number of ω values, height =
/// number of E values, top row at the largest E. The finite range maps
/// linearly onto 0..=255; +inf saturates to 255, NaN and −inf to 0.
pub fn write_pgm<W: Write>(
    rows: &[SweepResultRow],
    n_omega: usize,
    n_e: usize,
    column: &str,
    mut out: W,
) -> Result<()> {
    if rows.len() != n_omega * n_e {
        return Err(CliError::Config(format!(
            "{} rows do not fill a {n_omega}×{n_e} grid",
            rows.len()
        )));
    }
    let vals = rows
        .iter()
        .map(|r| column_value(r, column))
        .collect::<Result<Vec<f64>>>()?;
    let finite = vals.iter().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    let level = |v: f64| -> u8 {
        if v.is_nan() || v == f64::NEG_INFINITY {
            0
        } else if v == f64::INFINITY {
            255
        } else if hi > lo {
            (255.0 * (v - lo) / (hi - lo)).round() as u8
        } else {
            0
        }
    };
    write!(out, "P5\n{n_omega} {n_e}\n255\n")?;
    let mut pixels = Vec::with_capacity(n_omega * n_e);
    for y in 0..n_e {
        let j = n_e - 1 - y;
        for i in 0..n_omega {
            pixels.push(level(vals[i * n_e + j]));
        }
    }
    out.write_all(&pixels)?;
    Ok(())
}

pub fn emit(
    rows: &[SweepResultRow],
    format: Format,
    path: Option<&Path>,
    grid: (usize, usize),
    column: &str,
) -> Result<()> {
    let mut buf: Vec<u8> = Vec::new();
    match format {
        Format::Csv => write_csv(rows, &mut buf)?,
        Format::Json => write_json(rows, &mut buf)?,
        Format::Pgm => write_pgm(rows, grid.0, grid.1, column, &mut buf)?,
    }
    match path {
        Some(p) => std::fs::write(p, buf)?,
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format_matches_c() {
        let cases = [
            (1.0, "1"),
            (0.1, "0.1"),
            (1.5, "1.5"),
            (-2.25, "-2.25"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (std::f64::consts::PI, "3.14159265359"),
            (2.0 / 3.0, "0.666666666667"),
            (1e100, "1e+100"),
            (999999999999.5, "1e+12"),
            (0.0, "0"),
        ];
        for (x, s) in cases {
            assert_eq!(format_g(x), s, "{x}");
        }
        assert_eq!(format_g(f64::INFINITY), "inf");
        assert_eq!(format_g(f64::NAN), "nan");
    }

    #[test]
    fn empty_table_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn pgm_layout() {
        let mk = |omega: f64, e: f64, mu: f64| SweepResultRow {
            omega,
            e,
            gamma: 0.01,
            phi: 0.0,
            period: 1.0,
            exists: mu == 0.0,
            mu_min: mu,
            d_rhp: 0.0,
            tau_min: 0.0,
            n_c: 1,
            branch: vec![],
            negative_pair: false,
            status: Status::Ok,
        };
        // ω outer: (ω0,E0) (ω0,E1) (ω1,E0) (ω1,E1)
        let rows = vec![
            mk(1.0, 0.0, 0.0),
            mk(1.0, 1.0, 1.0),
            mk(2.0, 0.0, 0.5),
            mk(2.0, 1.0, f64::INFINITY),
        ];
        let mut buf = Vec::new();
        write_pgm(&rows, 2, 2, "mu_min", &mut buf).unwrap();
        let header = b"P5\n2 2\n255\n";
        assert_eq!(&buf[..header.len()], header);
        // top row is the larger E
        assert_eq!(&buf[header.len()..], &[255, 255, 0, 128]);
        assert!(write_pgm(&rows, 3, 2, "mu_min", Vec::new()).is_err());
        assert!(write_pgm(&rows, 2, 2, "status", Vec::new()).is_err());
    }
}
