use std::path::Path;

use serde::Serialize;
use wscluster::twolevel::{double_scaling_curve, write_curve_csv, CurveRow};

use crate::error::{write_bytes, CliError, CliResult};
use crate::report::write_report;

#[derive(Debug, Clone, Serialize)]
pub struct TwoLevelRequest {
    pub n_min: u32,
    pub n_max: u32,
    pub t_ann: f64,
    pub dt: f64,
    /// Noise levels; the noiseless curve is always included.
    pub noise: Vec<f64>,
}

impl TwoLevelRequest {
    pub fn q_values(&self) -> Vec<f64> {
        let mut q = vec![0.0];
        for &x in &self.noise {
            if !q.contains(&x) {
                q.push(x);
            }
        }
        q
    }
}

/// Writes `twolevel.csv` and `twolevel.json` into `out`.
pub fn run(req: &TwoLevelRequest, out: &Path) -> CliResult<Vec<CurveRow>> {
    if req.n_min == 0 || req.n_min > req.n_max {
        return Err(CliError::Usage(format!(
            "need 1 <= n-min <= n-max, got {}..{}",
            req.n_min, req.n_max
        )));
    }
    let rows = double_scaling_curve(req.n_min..=req.n_max, req.t_ann, req.dt, &req.q_values())?;
    let mut csv = Vec::new();
    write_curve_csv(&mut csv, &rows)?;
    write_bytes(&out.join("twolevel.csv"), &csv)?;
    write_report(&out.join("twolevel.json"), "twolevel", req, &rows)?;
    Ok(rows)
}
