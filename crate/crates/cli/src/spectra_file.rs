//! Plain-text spectrum pairs.
//!
//! ```text
//! # comments and blank lines are ignored
//! [tau1]
//! G1 -0.5
//! G2 1.25
//! [tau2]
//! G1 0.75
//! G2 2.0
//! ```
//!
//! `G1` lines are group I energies and `G2` lines group II energies,
//! ascending within each group. `[tau1]` is the snapshot at separation and
//! `[tau2]` the one at reconnection.

use std::fmt::Write as _;
use std::path::Path;

use adiabatic_core::SpectralSnapshot;

use crate::CliError;

#[derive(Default)]
struct Section {
    seen: bool,
    group1: Vec<f64>,
    group2: Vec<f64>,
}

/// Reads the `[tau1]` and `[tau2]` snapshots from `path`.
pub fn load_user_spectra(path: &Path) -> Result<(SpectralSnapshot, SpectralSnapshot), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_user_spectra(&text, path)
}

/// Parses the file format; `path` is used only in error messages.
pub fn parse_user_spectra(
    text: &str,
    path: &Path,
) -> Result<(SpectralSnapshot, SpectralSnapshot), CliError> {
    let err = |line: usize, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut sections = [Section::default(), Section::default()];
    let mut current: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let idx = match name.trim() {
                "tau1" => 0,
                "tau2" => 1,
                other => {
                    return Err(err(
                        line_no,
                        format!("unknown section [{other}], expected [tau1] or [tau2]"),
                    ))
                }
            };
            if sections[idx].seen {
                return Err(err(
                    line_no,
                    format!("section [{}] appears twice", name.trim()),
                ));
            }
            sections[idx].seen = true;
            current = Some(idx);
            continue;
        }
        let Some(idx) = current else {
            return Err(err(
                line_no,
                "entry before any [tau1]/[tau2] section".into(),
            ));
        };
        let mut parts = line.split_whitespace();
        let (tag, value) = (parts.next(), parts.next());
        if parts.next().is_some() {
            return Err(err(
                line_no,
                format!("expected `G1 <energy>` or `G2 <energy>`, got `{line}`"),
            ));
        }
        let energy: f64 = match value.map(str::parse) {
            Some(Ok(v)) if f64::is_finite(v) => v,
            _ => {
                return Err(err(
                    line_no,
                    format!("expected a finite energy in `{line}`"),
                ))
            }
        };
        match tag {
            Some("G1") => sections[idx].group1.push(energy),
            Some("G2") => sections[idx].group2.push(energy),
            _ => return Err(err(line_no, format!("expected `G1` or `G2`, got `{line}`"))),
        }
    }
    for (idx, name) in ["tau1", "tau2"].iter().enumerate() {
        if !sections[idx].seen {
            return Err(err(
                text.lines().count().max(1),
                format!("missing section [{name}]"),
            ));
        }
    }
    let [first, second] = sections;
    Ok((
        SpectralSnapshot::new("tau1", first.group1, first.group2)?,
        SpectralSnapshot::new("tau2", second.group1, second.group2)?,
    ))
}

/// Formats a snapshot pair in the format read by [`load_user_spectra`].
/// Energies are written with shortest round-trip precision.
pub fn format_user_spectra(first: &SpectralSnapshot, second: &SpectralSnapshot) -> String {
    let mut out = String::new();
    for (name, snap) in [("tau1", first), ("tau2", second)] {
        let _ = writeln!(out, "[{name}]");
        for e in snap.group1() {
            let _ = writeln!(out, "G1 {e:?}");
        }
        for e in snap.group2() {
            let _ = writeln!(out, "G2 {e:?}");
        }
    }
    out
}

pub fn export_user_spectra(
    path: &Path,
    first: &SpectralSnapshot,
    second: &SpectralSnapshot,
) -> Result<(), CliError> {
    std::fs::write(path, format_user_spectra(first, second)).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use adiabatic_core::SpectrumError;

    fn parse(text: &str) -> Result<(SpectralSnapshot, SpectralSnapshot), CliError> {
        parse_user_spectra(text, Path::new("test.txt"))
    }

    #[test]
    fn well_formed() {
        let (a, b) = parse(
            "# pair\n[tau1]\nG1 -1\nG2 0.5\nG1 3 # trailing\n\n[tau2]\nG2 0.1\nG1 0.2\nG2 1e1\n",
        )
        .unwrap();
        assert_eq!(a.group1(), &[-1.0, 3.0]);
        assert_eq!(a.group2(), &[0.5]);
        assert_eq!(b.group1(), &[0.2]);
        assert_eq!(b.group2(), &[0.1, 10.0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("[tau1]\nG1 1\nG3 2\n[tau2]\n", 3),
            ("G1 1\n[tau1]\n[tau2]\n", 1),
            ("[tau1]\nG1 x\n[tau2]\n", 2),
            ("[tau1]\n[tau1]\n", 2),
            ("[tau1]\n[tau3]\n", 2),
            ("[tau1]\nG1 1 2\n[tau2]\n", 2),
            ("[tau1]\nG1 inf\n[tau2]\n", 2),
        ];
        for (text, line) in cases {
            match parse(text) {
                Err(CliError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(matches!(
            parse("[tau1]\nG1 1\n"),
            Err(CliError::Parse { .. })
        ));
    }

    #[test]
    fn tie_and_order_violations() {
        match parse("[tau1]\nG1 1.5\nG2 1.5\n[tau2]\nG1 1\n") {
            Err(CliError::Spectrum(SpectrumError::Degenerate { group1, group2 })) => {
                assert_eq!((group1, group2), (1.5, 1.5));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse("[tau1]\nG1 2\nG1 1\n[tau2]\n"),
            Err(CliError::Spectrum(SpectrumError::NotIncreasing { .. }))
        ));
    }
}
