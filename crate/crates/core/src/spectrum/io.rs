//! Plain-text spectrum and coefficient files.
//!
//! Spectrum: first line `n k`, then `n` lines of `n + k` whitespace-separated
//! reals (row-major `A`). Coefficients: `n + k` reals spread over any number
//! of lines. Blank lines and lines starting with `#` are ignored; reported
//! line numbers refer to the original text.

use nalgebra::DMatrix;

use super::Spectrum;
use crate::error::{Error, Result};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let t = l.trim();
        (!t.is_empty() && !t.starts_with('#')).then_some((i + 1, l))
    })
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn parse_reals(line_no: usize, line: &str) -> Result<Vec<f64>> {
    line.split_whitespace()
        .enumerate()
        .map(|(c, tok)| {
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_err(line_no, c + 1, format!("`{tok}` is not a real number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(line_no, c + 1, format!("`{tok}` is not finite")))
            }
        })
        .collect()
}

pub(super) fn parse_spectrum(text: &str) -> Result<Spectrum> {
    let mut lines = content_lines(text);
    let (header_no, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, 1, "missing header line `n k`"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(parse_err(
            header_no,
            dims.len().min(2) + 1,
            format!("header must contain exactly `n k`, found {} fields", dims.len()),
        ));
    }
    let parse_dim = |c: usize| -> Result<usize> {
        dims[c]
            .parse::<usize>()
            .ok()
            .filter(|&v| v >= 1)
            .ok_or_else(|| parse_err(header_no, c + 1, format!("`{}` is not a positive integer", dims[c])))
    };
    let n = parse_dim(0)?;
    let k = parse_dim(1)?;
    let cols = n + k;
    let mut flat = Vec::with_capacity(n * cols);
    for row in 0..n {
        let (line_no, line) = lines.next().ok_or_else(|| {
            parse_err(header_no + row + 1, 1, format!("expected {n} matrix rows, found {row}"))
        })?;
        let vals = parse_reals(line_no, line)?;
        if vals.len() != cols {
            return Err(parse_err(
                line_no,
                vals.len().min(cols) + 1,
                format!("expected {cols} entries, found {}", vals.len()),
            ));
        }
        flat.extend(vals);
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(parse_err(line_no, 1, "unexpected trailing content"));
    }
    Spectrum::new(DMatrix::from_row_slice(n, cols, &flat))
}

pub(super) fn format_spectrum(spec: &Spectrum) -> String {
    let mut out = format!("{} {}\n", spec.n(), spec.k());
    for r in 0..spec.n() {
        let row: Vec<String> = spec.matrix().row(r).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parse a coefficient file holding exactly `expected` reals.
pub fn parse_coefficients(text: &str, expected: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(expected);
    let mut last_line = 1;
    for (line_no, line) in content_lines(text) {
        last_line = line_no;
        let vals = parse_reals(line_no, line)?;
        if out.len() + vals.len() > expected {
            return Err(parse_err(
                line_no,
                expected - out.len() + 1,
                format!("expected {expected} coefficients in total"),
            ));
        }
        out.extend(vals);
    }
    if out.len() != expected {
        return Err(parse_err(
            last_line,
            1,
            format!("expected {expected} coefficients, found {}", out.len()),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pentagon() {
        let s = Spectrum::parse("2 3\n0 1 0 4 1\n0 0 1 1 4\n").unwrap();
        assert_eq!((s.n(), s.k()), (2, 3));
        assert_eq!(s.column(3), vec![4.0, 1.0]);
        assert_eq!(Spectrum::parse(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn wrong_count_reports_position() {
        let err = Spectrum::parse("2 3\n0 1 0 4 1\n0 0 1 1\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 3,
                column: 5,
                message: "expected 5 entries, found 4".into()
            }
        );
        let err = Spectrum::parse("# comment\n1 2\n0 x 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, column: 2, .. }));
        let err = Spectrum::parse("2 3\n0 1 0 4 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = Spectrum::parse("2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, column: 2, .. }));
    }

    #[test]
    fn coefficients() {
        assert_eq!(parse_coefficients("1 2\n3\n", 3).unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(matches!(
            parse_coefficients("1 2 3 4", 3),
            Err(Error::Parse { line: 1, column: 4, .. })
        ));
        assert!(parse_coefficients("1 2", 3).is_err());
    }
}
