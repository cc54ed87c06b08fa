//! Observation files: one or more values per line separated by commas or
//! whitespace, an optional header line, `#` comments and blank lines.

use std::io::Read;
use std::path::Path;

use asymkde::SampleSet;

use crate::error::{CliError, CliResult};

/// Reads observations from `path`, or from stdin when `path` is `None` or `-`.
pub fn read_samples(path: Option<&Path>) -> CliResult<SampleSet> {
    let text = match path {
        Some(p) if p != Path::new("-") => std::fs::read_to_string(p)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?,
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    parse_samples(&text)
}

/// Parses observation text. Non-numeric values are parse errors and
/// non-positive values domain errors, both reported with their line.
pub fn parse_samples(text: &str) -> CliResult<SampleSet> {
    let mut values = Vec::new();
    let mut seen_content = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = content
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let parsed: Vec<Option<f64>> = fields.iter().map(|f| parse_real(f)).collect();
        let first = !seen_content;
        seen_content = true;
        if first && parsed.iter().all(Option::is_none) {
            // header
            continue;
        }
        for (field, v) in fields.iter().zip(parsed) {
            let v = v.ok_or_else(|| CliError::Parse {
                line,
                message: format!("not a decimal number: {field:?}"),
            })?;
            if v <= 0.0 {
                return Err(CliError::Domain(format!(
                    "line {line}: observations must be positive, got {field}"
                )));
            }
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err(CliError::Domain("need at least one sample, got 0".into()));
    }
    Ok(SampleSet::new(values)?)
}

/// Decimal reals only; `inf`, `nan` and hex forms are rejected.
fn parse_real(s: &str) -> Option<f64> {
    let ok = s
        .chars()
        .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
        && s.chars().any(|c| c.is_ascii_digit());
    if !ok {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}
