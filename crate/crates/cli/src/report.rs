use std::path::Path;

use serde::Serialize;

use crate::error::{write_bytes, CliResult};

pub const TOOL: &str = "wscluster";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Envelope of every JSON report: tool version, parameter echo, result.
#[derive(Debug, Serialize)]
pub struct Report<'a, P: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub parameters: &'a P,
    pub result: &'a R,
}

pub fn write_report<P: Serialize, R: Serialize>(path: &Path, command: &str, parameters: &P, result: &R) -> CliResult<()> {
    let report = Report {
        tool: TOOL,
        version: VERSION,
        command,
        parameters,
        result,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("reports serialize");
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

/// Stable 64-bit FNV-1a hash, used to derive seeds from string keys.
pub fn stable_hash(parts: &[&str]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for b in part.bytes().chain(std::iter::once(0xff)) {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}
