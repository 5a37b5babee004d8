//! JSON instance files.
//!
//! Layout of a file (keys always in this order, one array entry per line):
//!
//! ```text
//! {
//!   "format_version": 1,
//!   "n": 16,
//!   "scale": 25,
//!   "fields": [
//!     [0, 11],
//!     ...
//!   ],
//!   "couplings": [
//!     [0, 4, 25],
//!     ...
//!   ],
//!   "layout": {...} | null,
//!   "reference_energy_scaled": -1012 | null,
//!   "reference_method": "exhaustive"
//! }
//! ```

use std::fmt::Write as _;

use serde::Deserialize;

use super::{Coupling, ProblemInstance, ReferenceMethod, WeakStrongLayout, DEFAULT_SCALE};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    format_version: u32,
    n: usize,
    #[serde(default)]
    scale: Option<i64>,
    fields: Vec<(usize, i64)>,
    couplings: Vec<(usize, usize, i64)>,
    #[serde(default)]
    layout: Option<WeakStrongLayout>,
    #[serde(default)]
    reference_energy_scaled: Option<i64>,
    #[serde(default)]
    reference_method: ReferenceMethod,
}

/// Notes produced while parsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParseReport {
    /// `scale` was absent and [`DEFAULT_SCALE`] was used.
    pub scale_defaulted: bool,
}

/// Byte-stable text form of `instance`.
pub fn serialize_instance(instance: &ProblemInstance) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"format_version\": {FORMAT_VERSION},");
    let _ = writeln!(out, "  \"n\": {},", instance.n());
    let _ = writeln!(out, "  \"scale\": {},", instance.scale());

    let fields: Vec<String> = instance
        .fields()
        .iter()
        .enumerate()
        .filter(|(_, &h)| h != 0)
        .map(|(i, h)| format!("[{i}, {h}]"))
        .collect();
    write_array(&mut out, "fields", &fields);
    let couplings: Vec<String> = instance
        .couplings()
        .iter()
        .map(|c| format!("[{}, {}, {}]", c.i, c.j, c.value))
        .collect();
    write_array(&mut out, "couplings", &couplings);

    let layout = match instance.layout() {
        Some(l) => serde_json::to_string(l).expect("layout serializes"),
        None => "null".to_string(),
    };
    let _ = writeln!(out, "  \"layout\": {layout},");
    let reference = instance
        .reference_energy_scaled()
        .map_or_else(|| "null".to_string(), |e| e.to_string());
    let _ = writeln!(out, "  \"reference_energy_scaled\": {reference},");
    let method = serde_json::to_string(&instance.reference_method()).expect("enum serializes");
    let _ = writeln!(out, "  \"reference_method\": {method}");
    out.push_str("}\n");
    out
}

fn write_array(out: &mut String, key: &str, items: &[String]) {
    if items.is_empty() {
        let _ = writeln!(out, "  \"{key}\": [],");
        return;
    }
    let _ = writeln!(out, "  \"{key}\": [");
    for (k, item) in items.iter().enumerate() {
        let sep = if k + 1 == items.len() { "" } else { "," };
        let _ = writeln!(out, "    {item}{sep}");
    }
    out.push_str("  ],\n");
}

pub fn parse_instance(content: &str) -> Result<ProblemInstance> {
    parse_instance_with_report(content).map(|(inst, _)| inst)
}

pub fn parse_instance_with_report(content: &str) -> Result<(ProblemInstance, ParseReport)> {
    let file: InstanceFile = serde_json::from_str(content).map_err(|e| {
        Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    if file.format_version != FORMAT_VERSION {
        return Err(Error::parse(
            "format_version",
            format!("unsupported version {} (expected {FORMAT_VERSION})", file.format_version),
        ));
    }
    let n = file.n;
    if n == 0 {
        return Err(Error::parse("n", "instance must have at least one site"));
    }
    let report = ParseReport {
        scale_defaulted: file.scale.is_none(),
    };
    let scale = file.scale.unwrap_or(DEFAULT_SCALE);
    if scale <= 0 {
        return Err(Error::parse("scale", format!("must be positive, got {scale}")));
    }

    let mut fields = vec![0i64; n];
    let mut seen = vec![false; n];
    for (k, &(site, h)) in file.fields.iter().enumerate() {
        if site >= n {
            return Err(Error::parse(format!("fields[{k}]"), format!("site {site} out of range (n = {n})")));
        }
        if std::mem::replace(&mut seen[site], true) {
            return Err(Error::parse(format!("fields[{k}]"), format!("duplicate field for site {site}")));
        }
        fields[site] = h;
    }

    let mut couplings = Vec::with_capacity(file.couplings.len());
    for (k, &(i, j, v)) in file.couplings.iter().enumerate() {
        let ctx = || format!("couplings[{k}]");
        if i == j {
            return Err(Error::parse(ctx(), format!("self-loop on site {i}")));
        }
        if i > j {
            return Err(Error::parse(ctx(), format!("entry ({i}, {j}) must have i < j")));
        }
        if j >= n {
            return Err(Error::parse(ctx(), format!("site {j} out of range (n = {n})")));
        }
        couplings.push(Coupling::new(i, j, v));
    }
    let mut sorted: Vec<(usize, usize, usize)> = couplings.iter().enumerate().map(|(k, c)| (c.i, c.j, k)).collect();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
        return Err(Error::parse(
            format!("couplings[{}]", w[1].2),
            format!("duplicate edge ({}, {})", w[1].0, w[1].1),
        ));
    }

    if let Some(layout) = &file.layout {
        layout
            .validate()
            .map_err(|e| Error::parse("layout", e.to_string()))?;
        if layout.num_sites() != n {
            return Err(Error::parse(
                "layout",
                format!("layout describes {} sites, n = {n}", layout.num_sites()),
            ));
        }
    }

    let instance = ProblemInstance::new(n, scale, couplings, fields)
        .map_err(|e| Error::parse("instance", e.to_string()))?
        .with_layout(file.layout)
        .with_reference(file.reference_energy_scaled, file.reference_method);
    Ok((instance, report))
}
