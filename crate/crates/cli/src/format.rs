//! Text forms of complex scalars and result tables.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::CliError;
use crate::table::{CellMethod, Outcome, Row, Table};

/// `a+bi` with 17 significant digits in each part; parses back bit-exactly.
pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:.16e}{sign}{:.16e}i", z.re, z.im.abs())
}

pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Accepts `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`, with optional exponents.
pub fn parse_complex(text: &str) -> Result<Complex64, CliError> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || CliError::Config(format!("`{text}` is not a complex number"));
    let number = |part: &str| -> Result<f64, CliError> {
        match part {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => part.parse().map_err(|_| bad()),
        }
    };
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(s.parse().map_err(|_| bad())?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re: f64 = body[..k].parse().map_err(|_| bad())?;
            Ok(Complex64::new(re, number(&body[k..])?))
        }
        None => Ok(Complex64::new(0.0, number(body)?)),
    }
}

const HEADER: [&str; 6] = ["z", "lambda", "n", "method", "relative_error", "status"];

pub fn emit_csv(table: &Table) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(HEADER).expect("in-memory write");
    for row in &table.rows {
        let (value, status) = match &row.outcome {
            Outcome::Value(v) => (format_real(*v), "ok".to_string()),
            Outcome::Failed(msg) => (String::new(), format!("failed: {msg}")),
            Outcome::Skipped => (String::new(), "skipped".to_string()),
        };
        writer
            .write_record([
                format_complex(row.z),
                format_complex(row.lambda),
                row.n.to_string(),
                row.method.to_string(),
                value,
                status,
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("flush")).expect("utf-8 output")
}

pub fn parse_csv(text: &str) -> Result<Table, CliError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| CliError::Parse(e.to_string()))?;
    if header.iter().ne(HEADER) {
        return Err(CliError::Parse(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Parse(e.to_string()))?;
        let field = |k: usize| record.get(k).unwrap_or("");
        let bad = |what: &str| CliError::Parse(format!("bad {what} in record {record:?}"));
        let outcome = match field(5) {
            "ok" => Outcome::Value(field(4).parse().map_err(|_| bad("value"))?),
            "skipped" => Outcome::Skipped,
            s => Outcome::Failed(s.strip_prefix("failed: ").ok_or_else(|| bad("status"))?.to_string()),
        };
        rows.push(Row {
            z: parse_complex(field(0)).map_err(|_| bad("z"))?,
            lambda: parse_complex(field(1)).map_err(|_| bad("lambda"))?,
            n: field(2).parse().map_err(|_| bad("n"))?,
            method: field(3).parse().map_err(|_| bad("method"))?,
            outcome,
        });
    }
    Ok(Table { rows })
}

fn short_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{}{}i", z.re, if z.im < 0.0 { '-' } else { '+' }, z.im.abs())
    }
}

fn short_outcome(outcome: Option<&Outcome>) -> String {
    match outcome {
        Some(Outcome::Value(v)) => format!("{v:.8e}"),
        Some(Outcome::Failed(msg)) => format!("failed ({msg})"),
        Some(Outcome::Skipped) | None => "–".to_string(),
    }
}

/// One line per `(z, Λ, n)` with the two methods side by side.
pub fn emit_markdown(table: &Table) -> String {
    let mut out = String::from("| z | Λ | n | Olver | Fixed point |\n|---|---|---|---|---|\n");
    let mut keys: Vec<(Complex64, Complex64, usize)> = Vec::new();
    for row in &table.rows {
        let key = (row.z, row.lambda, row.n);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    for (z, lambda, n) in keys {
        let find = |m: CellMethod| {
            table.rows.iter().find(|r| r.z == z && r.lambda == lambda && r.n == n && r.method == m).map(|r| &r.outcome)
        };
        let _ = writeln!(
            out,
            "| {} | {} | {n} | {} | {} |",
            short_complex(z),
            short_complex(lambda),
            short_outcome(find(CellMethod::Olver)),
            short_outcome(find(CellMethod::FixedPoint))
        );
    }
    out
}
