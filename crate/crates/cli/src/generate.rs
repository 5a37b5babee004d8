use std::path::{Path, PathBuf};

use rand::RngCore;
use serde::Serialize;
use sha2::{Digest, Sha256};
use wscluster::instance::{generate_network, serialize_instance};
use wscluster::{ProblemInstance, ReferenceMethod, RngStream, WeakStrongLayout};

use crate::error::{create_dir, write_bytes, CliError, CliResult};
use crate::report::write_report;

/// Pair arrangement requested on the command line or in a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutSpec {
    Pairs(usize),
    Grid { rows: usize, cols: usize },
}

impl LayoutSpec {
    pub fn layout(self) -> CliResult<WeakStrongLayout> {
        let layout = match self {
            LayoutSpec::Pairs(p) => WeakStrongLayout::for_pair_count(p),
            LayoutSpec::Grid { rows, cols } => WeakStrongLayout::pair_grid(rows, cols),
        };
        layout.map_err(|e| CliError::Usage(e.to_string()))
    }

    fn tag(self) -> String {
        match self {
            LayoutSpec::Pairs(p) => format!("p{p}"),
            LayoutSpec::Grid { rows, cols } => format!("g{rows}x{cols}"),
        }
    }
}

/// Parses `RxC` pair-grid dimensions.
pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s.split_once(['x', 'X']).ok_or("expected ROWSxCOLS, e.g. 2x3")?;
    let r: usize = r.trim().parse().map_err(|_| format!("bad row count '{r}'"))?;
    let c: usize = c.trim().parse().map_err(|_| format!("bad column count '{c}'"))?;
    if r == 0 || c == 0 {
        return Err("grid dimensions must be at least 1".into());
    }
    Ok((r, c))
}

/// Backbone seed of instance `k` of a set generated from `seed`.
pub fn backbone_seed(seed: u64, k: u64) -> u64 {
    RngStream::from_parts(seed, k, 0).next_u64()
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub id: String,
    pub backbone_seed: u64,
    pub instance: ProblemInstance,
}

/// `count` instances on `spec`, deterministic in `seed`.
pub fn generate_set(spec: LayoutSpec, count: usize, seed: u64) -> CliResult<Vec<Generated>> {
    let layout = spec.layout()?;
    (0..count)
        .map(|k| {
            let bseed = backbone_seed(seed, k as u64);
            Ok(Generated {
                id: format!("ws-{}-s{seed}-{k:04}", spec.tag()),
                backbone_seed: bseed,
                instance: generate_network(&layout, bseed)?,
            })
        })
        .collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub instance_id: String,
    pub n: usize,
    pub backbone_seed: u64,
    pub reference_energy_scaled: Option<i64>,
    pub reference_method: ReferenceMethod,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
struct GenerateParams {
    layout: LayoutSpec,
    count: usize,
    seed: u64,
    out: PathBuf,
}

#[derive(Debug, Serialize)]
struct GenerateResult {
    files: Vec<ManifestEntry>,
}

/// Writes one instance file per generated instance plus `manifest.json`.
pub fn run(spec: LayoutSpec, count: usize, seed: u64, out: &Path) -> CliResult<Vec<ManifestEntry>> {
    if count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    let set = generate_set(spec, count, seed)?;
    create_dir(out)?;
    let mut files = Vec::with_capacity(set.len());
    for g in set {
        let text = serialize_instance(&g.instance);
        let name = format!("{}.json", g.id);
        write_bytes(&out.join(&name), text.as_bytes())?;
        files.push(ManifestEntry {
            file: name,
            instance_id: g.id,
            n: g.instance.n(),
            backbone_seed: g.backbone_seed,
            reference_energy_scaled: g.instance.reference_energy_scaled(),
            reference_method: g.instance.reference_method(),
            sha256: sha256_hex(text.as_bytes()),
        });
    }
    let params = GenerateParams {
        layout: spec,
        count,
        seed,
        out: out.to_path_buf(),
    };
    let result = GenerateResult { files };
    write_report(&out.join("manifest.json"), "generate", &params, &result)?;
    Ok(result.files)
}
