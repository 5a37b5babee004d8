//! Least-squares fits of `log10 tts` against `sqrt(n)`.
//!
//! Two models: `a + b sqrt(n)` and `a + b sqrt(n) + c log10(sqrt(n))`, the
//! latter absorbing a polynomial prefactor `n^(c/2)`.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::solvers::SolverId;
use crate::stats::{nearest_rank, Interval};
use crate::tts::BOOTSTRAP_RESAMPLES;

/// Condition number of the design matrix above which a fit is flagged.
pub const CONDITION_WARNING: f64 = 1e8;

/// Default number of largest sizes used by the linear model.
pub const DEFAULT_LAST_K: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    Linear,
    LogCorrected,
}

impl FitModel {
    fn parameters(self) -> usize {
        match self {
            FitModel::Linear => 2,
            FitModel::LogCorrected => 3,
        }
    }

    fn basis(self, n: f64) -> Vec<f64> {
        let r = n.sqrt();
        match self {
            FitModel::Linear => vec![1.0, r],
            FitModel::LogCorrected => vec![1.0, r, r.log10()],
        }
    }
}

impl std::str::FromStr for FitModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(FitModel::Linear),
            "log-corrected" | "log_corrected" => Ok(FitModel::LogCorrected),
            _ => Err(Error::invalid(format!("unknown model '{s}' (expected linear or log-corrected)"))),
        }
    }
}

/// One `(n, log10 tts)` observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub n: f64,
    pub log10_tts: f64,
}

/// How coefficient intervals were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    /// Resampling instances within each size.
    Bootstrap,
    /// Student-t intervals from the residual covariance.
    Covariance,
    /// No residual degrees of freedom.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub a: f64,
    pub b: f64,
    pub c: Option<f64>,
    /// Coefficient covariance, row-major in the order a, b, c.
    pub covariance: Vec<Vec<f64>>,
    pub ci_method: CiMethod,
    pub a_ci: Option<Interval>,
    pub b_ci: Option<Interval>,
    pub c_ci: Option<Interval>,
    pub points: Vec<FitPoint>,
    pub residuals: Vec<f64>,
    pub condition_number: f64,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn predict(&self, n: f64) -> f64 {
        let r = n.sqrt();
        self.a + self.b * r + self.c.map_or(0.0, |c| c * r.log10())
    }

    pub fn residual_sum_of_squares(&self) -> f64 {
        self.residuals.iter().map(|r| r * r).sum()
    }

    fn coefficients(&self) -> Vec<f64> {
        let mut out = vec![self.a, self.b];
        out.extend(self.c);
        out
    }
}

struct Ols {
    coef: Vec<f64>,
    residuals: Vec<f64>,
    covariance: Vec<Vec<f64>>,
    stderr: Option<Vec<f64>>,
    dof: usize,
    condition_number: f64,
}

fn ols(model: FitModel, points: &[FitPoint]) -> Result<Ols> {
    let m = points.len();
    let k = model.parameters();
    if m < k {
        return Err(Error::invalid(format!(
            "{} fit needs at least {k} points, got {m}",
            if k == 2 { "linear" } else { "log-corrected" }
        )));
    }
    if points.iter().any(|p| !(p.n > 0.0) || !p.log10_tts.is_finite()) {
        return Err(Error::invalid("fit points need n > 0 and finite log10 tts"));
    }
    let x = DMatrix::from_fn(m, k, |i, j| model.basis(points[i].n)[j]);
    let y = DVector::from_iterator(m, points.iter().map(|p| p.log10_tts));
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > smax * 1e-12) {
        return Err(Error::invalid("rank-deficient design matrix (repeated sizes?)"));
    }
    let coef = svd
        .solve(&y, 0.0)
        .map_err(|e| Error::invalid(format!("least squares failed: {e}")))?;
    let residuals: Vec<f64> = (&y - &x * &coef).iter().copied().collect();
    let dof = m - k;

    // (X^T X)^-1 = V S^-2 V^T
    let v_t = svd.v_t.as_ref().expect("computed");
    let inv_s2 = DMatrix::from_diagonal(&svd.singular_values.map(|s| 1.0 / (s * s)));
    let xtx_inv = v_t.transpose() * inv_s2 * v_t;
    let sigma2 = if dof > 0 {
        residuals.iter().map(|r| r * r).sum::<f64>() / dof as f64
    } else {
        0.0
    };
    let cov = &xtx_inv * sigma2;
    let covariance = (0..k).map(|i| (0..k).map(|j| cov[(i, j)]).collect()).collect();
    let stderr = (dof > 0).then(|| (0..k).map(|i| cov[(i, i)].max(0.0).sqrt()).collect());
    Ok(Ols {
        coef: coef.iter().copied().collect(),
        residuals,
        covariance,
        stderr,
        dof,
        condition_number: smax / smin,
    })
}

fn sorted_points(points: &[FitPoint]) -> Vec<FitPoint> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.n.total_cmp(&b.n));
    pts
}

fn keep_last(points: Vec<FitPoint>, last_k: usize) -> Vec<FitPoint> {
    if last_k == 0 || last_k >= points.len() {
        points
    } else {
        points[points.len() - last_k..].to_vec()
    }
}

fn build(model: FitModel, points: Vec<FitPoint>) -> Result<FitResult> {
    let fit = ols(model, &points)?;
    let mut warnings = Vec::new();
    if fit.condition_number > CONDITION_WARNING {
        let msg = format!("design matrix condition number {:.3e} exceeds {CONDITION_WARNING:e}", fit.condition_number);
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let (ci_method, cis) = match &fit.stderr {
        Some(se) => {
            let t = StudentsT::new(0.0, 1.0, fit.dof as f64)
                .expect("positive degrees of freedom")
                .inverse_cdf(0.975);
            let cis: Vec<Interval> = fit
                .coef
                .iter()
                .zip(se)
                .map(|(c, s)| Interval::new(c - t * s, c + t * s))
                .collect();
            (CiMethod::Covariance, Some(cis))
        }
        None => (CiMethod::None, None),
    };
    let ci = |k: usize| cis.as_ref().and_then(|c| c.get(k).copied());
    Ok(FitResult {
        model,
        a: fit.coef[0],
        b: fit.coef[1],
        c: fit.coef.get(2).copied(),
        covariance: fit.covariance,
        ci_method,
        a_ci: ci(0),
        b_ci: ci(1),
        c_ci: ci(2),
        points,
        residuals: fit.residuals,
        condition_number: fit.condition_number,
        warnings,
    })
}

/// `a + b sqrt(n)` through the `last_k` largest sizes (`0` keeps all).
pub fn fit_linear(points: &[FitPoint], last_k: usize) -> Result<FitResult> {
    build(FitModel::Linear, keep_last(sorted_points(points), last_k))
}

/// `a + b sqrt(n) + c log10(sqrt(n))` through every point.
pub fn fit_log_corrected(points: &[FitPoint]) -> Result<FitResult> {
    build(FitModel::LogCorrected, sorted_points(points))
}

/// Fits `model` to the `percentile` of per-instance times to solution at
/// each size, with coefficient intervals from resampling instances within
/// each size. Sizes whose percentile is unsolved are dropped.
pub fn fit_bootstrap<R: Rng + ?Sized>(
    model: FitModel,
    samples: &BTreeMap<usize, Vec<f64>>,
    percentile: f64,
    last_k: usize,
    rng: &mut R,
) -> Result<FitResult> {
    let summarize = |values: &[f64]| -> Option<f64> {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let x = nearest_rank(&v, percentile);
        (x.is_finite() && x > 0.0).then(|| x.log10())
    };
    let mut sizes: Vec<(usize, &Vec<f64>)> = samples
        .iter()
        .filter(|(_, v)| !v.is_empty())
        .map(|(&n, v)| (n, v))
        .filter(|(_, v)| summarize(v).is_some())
        .collect();
    if model == FitModel::Linear && last_k > 0 && sizes.len() > last_k {
        sizes.drain(..sizes.len() - last_k);
    }
    let points: Vec<FitPoint> = sizes
        .iter()
        .map(|(n, v)| FitPoint {
            n: *n as f64,
            log10_tts: summarize(v).expect("filtered"),
        })
        .collect();
    let mut fit = build(model, points)?;

    let k = model.parameters();
    let mut draws: Vec<Vec<f64>> = vec![Vec::with_capacity(BOOTSTRAP_RESAMPLES); k];
    let mut resample = Vec::new();
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let mut pts = Vec::with_capacity(sizes.len());
        for (n, values) in &sizes {
            resample.clear();
            resample.extend((0..values.len()).map(|_| values[rng.random_range(0..values.len())]));
            if let Some(y) = summarize(&resample) {
                pts.push(FitPoint {
                    n: *n as f64,
                    log10_tts: y,
                });
            }
        }
        if let Ok(o) = ols(model, &pts) {
            for (d, c) in draws.iter_mut().zip(&o.coef) {
                d.push(*c);
            }
        }
    }
    if draws[0].len() >= BOOTSTRAP_RESAMPLES / 2 {
        let coef = fit.coefficients();
        let cis: Vec<Interval> = draws
            .iter_mut()
            .zip(&coef)
            .map(|(d, &c)| {
                d.sort_by(f64::total_cmp);
                Interval::new(nearest_rank(d, 2.5).min(c), nearest_rank(d, 97.5).max(c))
            })
            .collect();
        fit.ci_method = CiMethod::Bootstrap;
        fit.a_ci = Some(cis[0]);
        fit.b_ci = Some(cis[1]);
        fit.c_ci = cis.get(2).copied();
    } else {
        fit.warnings
            .push("too few usable bootstrap resamples; intervals from the covariance".into());
    }
    Ok(fit)
}

/// One row of a solver comparison, sorted by `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub label: String,
    pub b: f64,
    pub b_ci: Option<Interval>,
    /// Labels whose `b` interval overlaps this one.
    pub indistinguishable_from: Vec<String>,
}

/// Ranks fits by scaling exponent. Fits without intervals use a point
/// interval at `b`.
pub fn compare_solvers(fits: &[(String, FitResult)]) -> Vec<RankRow> {
    let interval = |f: &FitResult| f.b_ci.unwrap_or(Interval::point(f.b));
    let mut order: Vec<usize> = (0..fits.len()).collect();
    order.sort_by(|&i, &j| fits[i].1.b.total_cmp(&fits[j].1.b).then(fits[i].0.cmp(&fits[j].0)));
    order
        .iter()
        .map(|&i| {
            let (label, fit) = &fits[i];
            let mine = interval(fit);
            RankRow {
                label: label.clone(),
                b: fit.b,
                b_ci: fit.b_ci,
                indistinguishable_from: order
                    .iter()
                    .filter(|&&j| j != i && mine.overlaps(&interval(&fits[j].1)))
                    .map(|&j| fits[j].0.clone())
                    .collect(),
            }
        })
        .collect()
}

/// Label used for a solver's fit in comparison tables.
pub fn fit_label(solver: SolverId, model: FitModel) -> String {
    let m = match model {
        FitModel::Linear => "linear",
        FitModel::LogCorrected => "log-corrected",
    };
    format!("{solver}/{m}")
}

/// Writes `count` samples of the fitted curve between `n_min` and `n_max`
/// as CSV `n,sqrt_n,log10_tts`.
pub fn write_curve_csv<W: Write>(writer: W, fit: &FitResult, n_min: f64, n_max: f64, count: usize) -> Result<()> {
    if count < 2 || !(n_min > 0.0 && n_max > n_min) {
        return Err(Error::invalid("curve sampling needs count >= 2 and 0 < n_min < n_max"));
    }
    let mut wtr = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| Error::parse("curve csv", e.to_string());
    wtr.write_record(["n", "sqrt_n", "log10_tts"]).map_err(err)?;
    for k in 0..count {
        let n = n_min + (n_max - n_min) * k as f64 / (count - 1) as f64;
        wtr.write_record([n.to_string(), n.sqrt().to_string(), fit.predict(n).to_string()])
            .map_err(err)?;
    }
    wtr.flush().map_err(|e| Error::parse("curve csv", e.to_string()))?;
    Ok(())
}
