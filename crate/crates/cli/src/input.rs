//! Plain-text sample files: one real per line.

use std::path::Path;

use crate::error::{CliError, CliResult};

/// Reads one value per line. Blank lines and lines starting with `#` are
/// skipped; a non-numeric first data line is taken as a header.
pub fn parse_values(text: &str) -> CliResult<Vec<f64>> {
    let mut values = Vec::new();
    let mut header_allowed = true;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(_) => {
                return Err(CliError::Data(format!("line {}: non-finite value '{line}'", i + 1)))
            }
            Err(_) if header_allowed => {}
            Err(_) => {
                return Err(CliError::Data(format!("line {}: cannot parse '{line}' as a number", i + 1)))
            }
        }
        header_allowed = false;
    }
    Ok(values)
}

pub fn read_values(path: &Path) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    parse_values(&text).map_err(|e| match e {
        CliError::Data(msg) => CliError::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}
