//! Noisy two-level model of an annealer searching for one marked state.
//!
//! The Hamiltonian `H(s) = -(1 - s)|psi><psi| - s|w><w|` mixes the uniform
//! superposition `psi` over `n` qubits with the marked state `w`. It acts
//! on the two-dimensional span of both, where it is integrated exactly.
//! Independent bit-flip noise with probability `q` per spin multiplies the
//! success probability by `(1 - q)^n`.

use std::io::Write;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tts::time_to_solution;

/// Overlap `<psi|w> = 2^(-n/2)`.
pub fn marked_overlap(n: u32) -> f64 {
    (-(n as f64) / 2.0).exp2()
}

/// Survival probability `(1 - q)^n` of `n` spins under bit-flip noise.
pub fn noise_factor(q: f64, n: u32) -> f64 {
    // plain products: powi may be constant-folded with different rounding
    (0..n).fold(1.0, |acc, _| acc * (1.0 - q))
}

/// `H(s)` in the orthonormal basis `{w, (psi - alpha w) / sqrt(1 - alpha^2)}`.
pub fn effective_hamiltonian(s: f64, n: u32) -> Matrix2<f64> {
    let a = marked_overlap(n);
    let a2 = a * a;
    let off = -(1.0 - s) * a * (1.0 - a2).sqrt();
    Matrix2::new(-s - (1.0 - s) * a2, off, off, -(1.0 - s) * (1.0 - a2))
}

/// Closed-form gap `sqrt((1 - 2s)^2 + 4 s (1 - s) 2^-n)`.
pub fn gap(s: f64, n: u32) -> f64 {
    let a2 = marked_overlap(n).powi(2);
    ((1.0 - 2.0 * s).powi(2) + 4.0 * s * (1.0 - s) * a2).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoLevelParams {
    pub n: u32,
    pub t_ann: f64,
    pub dt: f64,
    pub q_noise: f64,
}

impl Default for TwoLevelParams {
    fn default() -> Self {
        TwoLevelParams {
            n: 1,
            t_ann: 500.0,
            dt: 0.01,
            q_noise: 0.0,
        }
    }
}

impl TwoLevelParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("two-level model needs n >= 1"));
        }
        if !(self.t_ann > 0.0 && self.t_ann.is_finite()) {
            return Err(Error::invalid("annealing time must be positive"));
        }
        if !(self.dt > 0.0 && self.dt <= self.t_ann) {
            return Err(Error::invalid("time step must lie in (0, t_ann]"));
        }
        if !(0.0..1.0).contains(&self.q_noise) {
            return Err(Error::invalid("noise probability must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealResult {
    pub p_succ: f64,
    pub p_succ_noisy: f64,
    /// Largest deviation of the state norm from 1 over the run.
    pub norm_drift: f64,
    pub steps: usize,
}

/// `exp(-i H dt)` for a real symmetric 2x2 `H`.
fn propagator(h: &Matrix2<f64>, dt: f64) -> [[Complex64; 2]; 2] {
    let mean = 0.5 * (h[(0, 0)] + h[(1, 1)]);
    let z = 0.5 * (h[(0, 0)] - h[(1, 1)]);
    let x = h[(0, 1)];
    let w = (z * z + x * x).sqrt();
    let (c, s) = ((w * dt).cos(), (w * dt).sin());
    let (uz, ux) = if w > 0.0 { (z / w, x / w) } else { (0.0, 0.0) };
    let phase = Complex64::from_polar(1.0, -mean * dt);
    let i = Complex64::i();
    [
        [phase * (c - i * s * uz), phase * (-i * s * ux)],
        [phase * (-i * s * ux), phase * (c + i * s * uz)],
    ]
}

/// Integrates a linear schedule `s = t / t_ann` from `psi`, one exact
/// propagator per step evaluated at the step midpoint. The step is
/// `t_ann / round(t_ann / dt)`.
pub fn integrate_schrodinger(params: &TwoLevelParams) -> Result<AnnealResult> {
    params.validate()?;
    let steps = ((params.t_ann / params.dt).round() as usize).max(1);
    let dt = params.t_ann / steps as f64;
    let a = marked_overlap(params.n);
    let mut phi = [Complex64::new(a, 0.0), Complex64::new((1.0 - a * a).sqrt(), 0.0)];
    let mut drift: f64 = 0.0;
    for k in 0..steps {
        let s = (k as f64 + 0.5) * dt / params.t_ann;
        let u = propagator(&effective_hamiltonian(s, params.n), dt);
        phi = [
            u[0][0] * phi[0] + u[0][1] * phi[1],
            u[1][0] * phi[0] + u[1][1] * phi[1],
        ];
        let norm = (phi[0].norm_sqr() + phi[1].norm_sqr()).sqrt();
        drift = drift.max((norm - 1.0).abs());
    }
    let p_succ = phi[0].norm_sqr().min(1.0);
    Ok(AnnealResult {
        p_succ,
        p_succ_noisy: noise_factor(params.q_noise, params.n) * p_succ,
        norm_drift: drift,
        steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub n: u32,
    pub sqrt_n: f64,
    pub q: f64,
    pub p_succ: f64,
    pub p_succ_noisy: f64,
    /// `t_ann` times the repetitions needed at `p_succ_noisy`, arbitrary
    /// units.
    pub tts: f64,
}

/// Time to solution of the noisy model for every `n` in `n_range` and
/// every noise level in `q_values`, with `t_ann` as the cost of one run.
pub fn double_scaling_curve(
    n_range: std::ops::RangeInclusive<u32>,
    t_ann: f64,
    dt: f64,
    q_values: &[f64],
) -> Result<Vec<CurveRow>> {
    let mut rows = Vec::new();
    for &q in q_values {
        for n in n_range.clone() {
            let r = integrate_schrodinger(&TwoLevelParams {
                n,
                t_ann,
                dt,
                q_noise: q,
            })?;
            rows.push(CurveRow {
                n,
                sqrt_n: (n as f64).sqrt(),
                q,
                p_succ: r.p_succ,
                p_succ_noisy: r.p_succ_noisy,
                tts: time_to_solution(r.p_succ_noisy, t_ann)?,
            });
        }
    }
    Ok(rows)
}

/// Writes `n,sqrt_n,q,p_succ,p_succ_noisy,tts` rows.
pub fn write_curve_csv<W: Write>(writer: W, rows: &[CurveRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for r in rows {
        wtr.serialize(r).map_err(|e| Error::parse("two-level csv", e.to_string()))?;
    }
    wtr.flush().map_err(|e| Error::parse("two-level csv", e.to_string()))?;
    Ok(())
}
