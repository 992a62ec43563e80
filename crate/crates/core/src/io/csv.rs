//! Plain-text frames (one sample per line) and spectrum tables.

use std::fmt::Write as _;
use std::path::Path;

use crate::spectral::RangeSpectrum;
use crate::{Error, Result};

/// Parse a frame written one value per line. Blank lines are only allowed
/// at the end of the file.
pub fn parse_frame(text: &str, expected_len: usize) -> Result<Vec<f64>> {
    let body = text.trim_end();
    let mut values = Vec::with_capacity(expected_len);
    if !body.is_empty() {
        for (i, line) in body.lines().enumerate() {
            let field = line.trim();
            let v: f64 = field.parse().map_err(|_| Error::Csv {
                line: i + 1,
                reason: format!("`{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Csv {
                    line: i + 1,
                    reason: format!("`{field}` is not finite"),
                });
            }
            values.push(v);
        }
    }
    if values.len() != expected_len {
        return Err(Error::Csv {
            line: values.len() + 1,
            reason: format!("expected {expected_len} samples, found {}", values.len()),
        });
    }
    Ok(values)
}

pub fn read_frame(path: &Path, expected_len: usize) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    parse_frame(&text, expected_len)
}

/// One value per line in shortest round-trip form.
pub fn format_frame(values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 24);
    for v in values {
        writeln!(out, "{v}").unwrap();
    }
    out
}

pub fn write_frame(path: &Path, values: &[f64]) -> Result<()> {
    std::fs::write(path, format_frame(values)).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Table with columns `bin_hz,range_m,<name>_db,...`, one row per bin.
/// All spectra must share the same bin grid.
pub fn format_spectra(spectra: &[(&str, &RangeSpectrum)]) -> Result<String> {
    let Some((_, first)) = spectra.first() else {
        return Err(Error::invalid("spectra", "nothing to write"));
    };
    if let Some((name, _)) = spectra.iter().find(|(_, s)| s.bins.len() != first.bins.len()) {
        return Err(Error::shape(format!("{} bins", first.bins.len()), format!("`{name}` with a different bin count")));
    }
    let mut out = String::from("bin_hz,range_m");
    for (name, _) in spectra {
        write!(out, ",{name}_db").unwrap();
    }
    out.push('\n');
    for k in 0..first.bins.len() {
        write!(out, "{},{}", first.bin_frequency(k), first.bin_range(k)).unwrap();
        for (_, s) in spectra {
            write!(out, ",{}", s.bins[k]).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_spectra(path: &Path, spectra: &[(&str, &RangeSpectrum)]) -> Result<()> {
    std::fs::write(path, format_spectra(spectra)?).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_roundtrip_is_exact() {
        let v = vec![0.1, -1e-300, 2.0 / 3.0, 0.0, 123456.789];
        assert_eq!(parse_frame(&format_frame(&v), 5).unwrap(), v);
    }

    #[test]
    fn short_file_names_expected_length() {
        let text = format_frame(&vec![0.5; 415]);
        let err = parse_frame(&text, 416).unwrap_err();
        assert!(err.to_string().contains("expected 416"), "{err}");
    }

    #[test]
    fn bad_line_is_reported_by_number() {
        let err = parse_frame("1.0\n2.0\nabc\n4.0\n", 4).unwrap_err();
        assert!(matches!(err, Error::Csv { line: 3, .. }), "{err:?}");
    }
}
