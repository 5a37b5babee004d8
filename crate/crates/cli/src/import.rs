//! Published comparison curves kept in their native units.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{create_dir, read_text, write_bytes, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: f64,
    pub tts: f64,
}

/// Imported data. Its units are never converted, and it is never fitted
/// together with work-unit data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalCurve {
    pub label: String,
    pub units: String,
    pub provenance: String,
    pub points: Vec<CurvePoint>,
}

fn check_label(label: &str) -> CliResult<()> {
    let ok = !label.is_empty()
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        && !label.starts_with('.');
    if ok {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "label '{label}' must be non-empty and use only letters, digits, '-', '_' and '.'"
        )))
    }
}

/// Parses a CSV with columns `n,tts` and an optional `units` column whose
/// value must be the same on every row. Errors name the offending row.
pub fn parse_curve_csv(path: &Path, label: &str, units: Option<&str>, provenance: &str) -> CliResult<ExternalCurve> {
    let text = read_text(path)?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let fail = |m: String| CliError::validation(format!("{}: {m}", path.display()));
    let header = rdr.headers().map_err(|e| fail(format!("header: {e}")))?.clone();
    let col = |name: &str| header.iter().position(|h| h.trim() == name);
    let (n_col, tts_col) = match (col("n"), col("tts")) {
        (Some(n), Some(t)) => (n, t),
        _ => {
            return Err(fail(format!(
                "header must contain 'n' and 'tts', found '{}'",
                header.iter().collect::<Vec<_>>().join(",")
            )))
        }
    };
    let units_col = col("units");
    let mut found_units: Option<String> = units.map(str::to_string);
    let mut points = Vec::new();
    for (k, row) in rdr.records().enumerate() {
        let line = k + 2;
        let row = row.map_err(|e| fail(format!("row {line}: {e}")))?;
        let field = |c: usize, name: &str| -> CliResult<f64> {
            let raw = row.get(c).unwrap_or("").trim();
            let v: f64 = raw.parse().map_err(|_| fail(format!("row {line}: {name} '{raw}' is not a number")))?;
            if !(v.is_finite() && v > 0.0) {
                return Err(fail(format!("row {line}: {name} must be positive and finite, got '{raw}'")));
            }
            Ok(v)
        };
        let n = field(n_col, "n")?;
        let tts = field(tts_col, "tts")?;
        if let Some(c) = units_col {
            let u = row.get(c).unwrap_or("").trim();
            match &found_units {
                Some(existing) if existing != u => {
                    return Err(fail(format!("row {line}: units '{u}' differ from '{existing}'")))
                }
                Some(_) => {}
                None => found_units = Some(u.to_string()),
            }
        }
        points.push(CurvePoint { n, tts });
    }
    if points.is_empty() {
        return Err(fail("no data rows".into()));
    }
    let units = found_units
        .filter(|u| !u.is_empty())
        .ok_or_else(|| CliError::Usage("units missing: pass --units or add a 'units' column".into()))?;
    Ok(ExternalCurve {
        label: label.to_string(),
        units,
        provenance: provenance.to_string(),
        points,
    })
}

pub fn import(csv: &Path, label: &str, units: Option<&str>, provenance: &str, store: &Path) -> CliResult<PathBuf> {
    check_label(label)?;
    let curve = parse_curve_csv(csv, label, units, provenance)?;
    create_dir(store)?;
    let path = store.join(format!("{label}.json"));
    let mut text = serde_json::to_string_pretty(&curve).expect("curves serialize");
    text.push('\n');
    write_bytes(&path, text.as_bytes())?;
    Ok(path)
}

/// Stored curves sorted by label.
pub fn list(store: &Path) -> CliResult<Vec<ExternalCurve>> {
    let entries = match std::fs::read_dir(store) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(CliError::io(store, e)),
    };
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::io(store, e))?.path();
        if path.extension().is_some_and(|x| x == "json") {
            let curve: ExternalCurve = serde_json::from_str(&read_text(&path)?)
                .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
            out.push(curve);
        }
    }
    out.sort_by(|a, b| a.label.cmp(&b.label));
    Ok(out)
}
