//! Plain-text commutation-angle files.
//!
//! The format is line-oriented: the first line holds the number of
//! generators d, the following lines hold the strict upper triangle of the
//! angle matrix row by row — row k lists θ_{k,k+1} … θ_{k,d} — with one row
//! per line. A token of the form `m/n` denotes the rational angle 2π·m/n;
//! any other token is parsed as decimal radians. A file whose triangle is
//! entirely absent denotes the zero matrix. Non-reduced fractions are
//! normalized and reported as warnings; malformed tokens are rejected with
//! their line and column.

use std::path::Path;

use unidil::rotreps::{RationalAngle, RationalTheta, ThetaMatrix};

use crate::CliError;

/// A parsed angle file: always the real matrix, plus the exact rational
/// form whenever every token was a fraction (the zero triangle counts).
#[derive(Clone, Debug)]
pub struct ParsedTheta {
    pub d: usize,
    pub matrix: ThetaMatrix,
    pub rational: Option<RationalTheta>,
    /// Normalization notes, already formatted with file positions.
    pub warnings: Vec<String>,
}

/// One triangle entry in both readings.
enum Entry {
    Rational(RationalAngle),
    Radians(f64),
}

impl Entry {
    fn radians(&self) -> f64 {
        match self {
            Entry::Rational(q) => q.radians(),
            Entry::Radians(x) => *x,
        }
    }
}

/// Loads and parses an angle file.
pub fn load_theta_file(path: &Path) -> Result<ParsedTheta, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_theta_text(&text, &path.display().to_string())
}

/// Parses the file contents; `origin` names the source in messages.
pub fn parse_theta_text(text: &str, origin: &str) -> Result<ParsedTheta, CliError> {
    let mut lines = text.lines().enumerate();

    let (d_line, d_text) = lines
        .next()
        .ok_or_else(|| usage(origin, 1, 1, "empty file; expected the dimension"))?;
    let d_token = d_text.trim();
    let d: usize = d_token
        .parse()
        .map_err(|_| usage(origin, d_line + 1, 1, &format!("expected a dimension, found `{d_token}`")))?;
    if d == 0 {
        return Err(usage(origin, d_line + 1, 1, "dimension must be at least 1"));
    }

    // Tokenize the remaining non-blank lines, keeping 1-based positions.
    let mut rows: Vec<(usize, Vec<(usize, &str)>)> = Vec::new();
    for (idx, line) in lines {
        let tokens = tokenize(line);
        if !tokens.is_empty() {
            rows.push((idx + 1, tokens));
        }
    }

    let mut warnings = Vec::new();
    let mut entries: Vec<Entry> = Vec::new();
    if rows.is_empty() {
        // Absent triangle: the zero matrix.
        entries.resize_with(d * (d - 1) / 2, || Entry::Rational(RationalAngle::zero()));
    } else {
        // Row k (0-based) carries d−1−k entries; the last, empty row is
        // never written.
        if rows.len() != d - 1 {
            return Err(usage(
                origin,
                rows.last().map_or(1, |(l, _)| *l),
                1,
                &format!("expected {} triangle rows for dimension {d}, found {}", d - 1, rows.len()),
            ));
        }
        for (k, (line_no, tokens)) in rows.iter().enumerate() {
            let expected = d - 1 - k;
            if tokens.len() != expected {
                return Err(usage(
                    origin,
                    *line_no,
                    tokens.first().map_or(1, |(c, _)| *c),
                    &format!("row {} needs {expected} entries, found {}", k + 1, tokens.len()),
                ));
            }
            for &(col, token) in tokens {
                entries.push(parse_token(token, origin, *line_no, col, &mut warnings)?);
            }
        }
    }

    let matrix = ThetaMatrix::from_upper(d, entries.iter().map(Entry::radians).collect());
    let rational = entries
        .iter()
        .map(|e| match e {
            Entry::Rational(q) => Some(*q),
            Entry::Radians(_) => None,
        })
        .collect::<Option<Vec<_>>>()
        .map(|qs| RationalTheta::from_upper(d, qs));

    Ok(ParsedTheta { d, matrix, rational, warnings })
}

/// Splits a line into (1-based column, token) pairs on whitespace.
fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    // Byte offsets equal character columns for the ASCII grammar; for
    // non-ASCII garbage the position still points into the right region.
    out.iter().map(|&(s, t)| (s + 1, t)).collect()
}

fn parse_token(
    token: &str,
    origin: &str,
    line: usize,
    col: usize,
    warnings: &mut Vec<String>,
) -> Result<Entry, CliError> {
    if let Some((m_text, n_text)) = token.split_once('/') {
        let m: i64 = m_text.parse().map_err(|_| {
            usage(origin, line, col, &format!("bad numerator in fraction `{token}`"))
        })?;
        let n: u64 = n_text.parse().map_err(|_| {
            usage(origin, line, col, &format!("bad denominator in fraction `{token}`"))
        })?;
        if n == 0 {
            return Err(usage(origin, line, col, &format!("zero denominator in `{token}`")));
        }
        let q = RationalAngle::new(m, n);
        if (q.numerator(), q.denominator()) != (m.rem_euclid(n as i64) as u64, n) {
            warnings.push(format!(
                "{origin}:{line}:{col}: fraction {token} normalized to {}/{}",
                q.numerator(),
                q.denominator()
            ));
        }
        Ok(Entry::Rational(q))
    } else {
        let x: f64 = token
            .parse()
            .map_err(|_| usage(origin, line, col, &format!("malformed angle token `{token}`")))?;
        if !x.is_finite() {
            return Err(usage(origin, line, col, &format!("non-finite angle `{token}`")));
        }
        Ok(Entry::Radians(x))
    }
}

fn usage(origin: &str, line: usize, col: usize, message: &str) -> CliError {
    CliError::Usage(format!("{origin}:{line}:{col}: {message}"))
}
