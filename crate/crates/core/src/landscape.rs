//! Spin-overlap distribution `P(q)` and its peak structure.
//!
//! Two independent parallel-tempering chains are run side by side and the
//! overlap of their coldest replicas is histogrammed. A distribution with
//! one dominant peak indicates a simple landscape; several well-separated
//! peaks indicate competing low-energy valleys.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::mcmc::{geometric_temperature_ladder, heat_bath_sweep, HeatBathTable, RngStream, SpinState};
use crate::solvers::swap_accepts;
use crate::stats::{wilson_interval, Interval};

/// Histogram bins; bin `k` is centred at `q = -1 + k * BIN_WIDTH`.
pub const BINS: usize = 101;
pub const BIN_WIDTH: f64 = 2.0 / (BINS - 1) as f64;
const ZERO_BIN: usize = (BINS - 1) / 2;

/// Largest instance for which the exact distribution is computed.
pub const EXACT_LIMIT: usize = 20;

/// Minimum sweeps accepted by [`sample_overlap_distribution`].
pub const MIN_SWEEPS: usize = 100;

/// Minimum instances per size accepted by [`peak_fraction`].
pub const MIN_INSTANCES: usize = 10;

/// `(1/n) sum_j a_j b_j`.
pub fn spin_overlap(a: &[i8], b: &[i8]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!("overlap of states with {} and {} spins", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::invalid("overlap of empty states"));
    }
    let dot: i64 = a.iter().zip(b).map(|(&x, &y)| (x * y) as i64).sum();
    Ok(dot as f64 / a.len() as f64)
}

pub fn bin_of(q: f64) -> usize {
    (((q + 1.0) / BIN_WIDTH).round().max(0.0) as usize).min(BINS - 1)
}

pub fn bin_center(k: usize) -> f64 {
    -1.0 + k as f64 * BIN_WIDTH
}

/// Accumulated overlap measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapHistogram {
    pub counts: Vec<u64>,
    /// Temperature at which `q` was measured.
    pub temperature: f64,
    pub burn_in_fraction: f64,
}

impl OverlapHistogram {
    pub fn new(temperature: f64, burn_in_fraction: f64) -> Self {
        OverlapHistogram {
            counts: vec![0; BINS],
            temperature,
            burn_in_fraction,
        }
    }

    pub fn record(&mut self, q: f64) {
        self.counts[bin_of(q)] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn merge(&mut self, other: &OverlapHistogram) -> Result<()> {
        if self.temperature != other.temperature || self.counts.len() != other.counts.len() {
            return Err(Error::invalid("merging histograms measured under different settings"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    /// Fraction of measurements in each bin.
    pub fn probabilities(&self) -> Vec<f64> {
        normalize_mass(&self.counts.iter().map(|&c| c as f64).collect::<Vec<_>>())
    }

    /// Density per bin scaled so that the integral over `q` in `[0, 1]` is
    /// 1, counting half of the bin centred at zero. If no mass lies there
    /// the whole range integrates to 1 instead.
    pub fn density(&self) -> Vec<f64> {
        density_from_mass(&self.counts.iter().map(|&c| c as f64).collect::<Vec<_>>())
    }
}

fn normalize_mass(mass: &[f64]) -> Vec<f64> {
    let total: f64 = mass.iter().sum();
    if total > 0.0 {
        mass.iter().map(|m| m / total).collect()
    } else {
        vec![0.0; mass.len()]
    }
}

/// See [`OverlapHistogram::density`].
pub fn density_from_mass(mass: &[f64]) -> Vec<f64> {
    let positive = 0.5 * mass[ZERO_BIN] + mass[ZERO_BIN + 1..].iter().sum::<f64>();
    let norm = if positive > 0.0 { positive } else { mass.iter().sum() };
    if norm > 0.0 {
        mass.iter().map(|m| m / (norm * BIN_WIDTH)).collect()
    } else {
        vec![0.0; mass.len()]
    }
}

/// Exact Boltzmann `P(q)` per bin for two independent replicas at `beta`.
///
/// The overlap depends only on the Hamming distance between the two
/// states, whose distribution is the autocorrelation of the Boltzmann
/// weights under XOR; a Walsh-Hadamard transform computes it in
/// `O(n 2^n)`.
pub fn exact_overlap_distribution(instance: &ProblemInstance, beta: f64) -> Result<Vec<f64>> {
    let n = instance.n();
    if n == 0 || n > EXACT_LIMIT {
        return Err(Error::Limit(format!("exact overlap distribution needs 1 <= n <= {EXACT_LIMIT}, got {n}")));
    }
    let size = 1usize << n;
    let scale = instance.scale() as f64;
    let mut energy = vec![0i64; size];
    let mut spins = vec![-1i8; n];
    let mut e = instance.energy(&spins)?;
    let mut code = 0usize;
    energy[0] = e;
    for i in 1..size {
        let bit = i.trailing_zeros() as usize;
        e += instance.delta_unchecked(&spins, bit);
        spins[bit] = -spins[bit];
        code ^= 1 << bit;
        energy[code] = e;
    }
    let e_min = *energy.iter().min().expect("non-empty");
    let mut w: Vec<f64> = energy
        .iter()
        .map(|&e| (-beta * (e - e_min) as f64 / scale).exp())
        .collect();
    let z: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= z);

    walsh_hadamard(&mut w);
    w.iter_mut().for_each(|x| *x *= *x);
    walsh_hadamard(&mut w);
    let mut by_distance = vec![0.0; n + 1];
    for (d, c) in w.iter().enumerate() {
        by_distance[d.count_ones() as usize] += c / size as f64;
    }
    let mut bins = vec![0.0; BINS];
    for (d, p) in by_distance.iter().enumerate() {
        bins[bin_of(1.0 - 2.0 * d as f64 / n as f64)] += p.max(0.0);
    }
    Ok(bins)
}

fn walsh_hadamard(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for chunk in v.chunks_mut(2 * h) {
            let (lo, hi) = chunk.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// Sampling settings for [`sample_overlap_distribution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlapParams {
    pub t_min: f64,
    pub t_max: f64,
    pub temperatures: usize,
    pub sweeps: usize,
    #[serde(default = "half")]
    pub burn_in_fraction: f64,
}

fn half() -> f64 {
    0.5
}

impl Default for OverlapParams {
    fn default() -> Self {
        OverlapParams {
            t_min: 0.2279,
            t_max: 2.5,
            temperatures: 21,
            sweeps: 100_000,
            burn_in_fraction: 0.5,
        }
    }
}

/// One parallel-tempering chain with heat-bath updates.
struct Chain {
    tables: Vec<HeatBathTable>,
    betas: Vec<f64>,
    replicas: Vec<SpinState>,
    rng: RngStream,
}

impl Chain {
    fn new(instance: &ProblemInstance, betas: &[f64], mut rng: RngStream) -> Self {
        let replicas = betas.iter().map(|_| SpinState::random(instance, &mut rng)).collect();
        Chain {
            tables: betas.iter().map(|&b| HeatBathTable::new(instance, b)).collect(),
            betas: betas.to_vec(),
            replicas,
            rng,
        }
    }

    fn step(&mut self, instance: &ProblemInstance) {
        for (state, table) in self.replicas.iter_mut().zip(&self.tables) {
            heat_bath_sweep(instance, state, table, &mut self.rng);
        }
        for k in 0..self.replicas.len().saturating_sub(1) {
            let (ei, ej) = (self.replicas[k].energy(), self.replicas[k + 1].energy());
            if swap_accepts(self.betas[k], self.betas[k + 1], ei, ej, instance.scale(), &mut self.rng) {
                self.replicas.swap(k, k + 1);
            }
        }
    }

    fn coldest(&self) -> &SpinState {
        &self.replicas[0]
    }
}

/// Overlap histogram between the coldest replicas of two independent
/// parallel-tempering chains, one measurement per sweep after burn-in.
/// The chains use streams `rng.replica(1)` and `rng.replica(2)`.
pub fn sample_overlap_distribution(
    instance: &ProblemInstance,
    params: &OverlapParams,
    rng: &RngStream,
) -> Result<OverlapHistogram> {
    if params.sweeps < MIN_SWEEPS {
        return Err(Error::invalid(format!(
            "overlap sampling needs at least {MIN_SWEEPS} sweeps, got {}",
            params.sweeps
        )));
    }
    if !(0.0..1.0).contains(&params.burn_in_fraction) {
        return Err(Error::invalid("burn-in fraction must lie in [0, 1)"));
    }
    let ladder = geometric_temperature_ladder(params.t_min, params.t_max, params.temperatures)?;
    let betas = ladder.betas();
    let mut a = Chain::new(instance, &betas, rng.replica(1));
    let mut b = Chain::new(instance, &betas, rng.replica(2));
    let burn_in = (params.sweeps as f64 * params.burn_in_fraction).floor() as usize;
    let mut hist = OverlapHistogram::new(ladder.temperatures()[0], params.burn_in_fraction);
    for sweep in 0..params.sweeps {
        a.step(instance);
        b.step(instance);
        if sweep >= burn_in {
            hist.record(spin_overlap(a.coldest().spins(), b.coldest().spins())?);
        }
    }
    Ok(hist)
}

/// Peak-detection settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeakParams {
    /// Width of the Gaussian smoothing kernel in `q`.
    pub sigma: f64,
    /// Minimum peak height relative to the tallest peak.
    pub relative_height: f64,
    /// Minimum distance in `q` between reported peaks.
    pub min_separation: f64,
}

impl Default for PeakParams {
    fn default() -> Self {
        PeakParams {
            sigma: 0.02,
            relative_height: 0.1,
            min_separation: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakClass {
    SinglePeak,
    MultiPeak,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub q: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakVerdict {
    pub classification: PeakClass,
    /// Sorted by decreasing height.
    pub peaks: Vec<Peak>,
    pub params: PeakParams,
}

/// Gaussian smoothing over bin centres; the kernel is renormalized where
/// it overhangs the ends of the range.
pub fn smooth(density: &[f64], sigma: f64) -> Vec<f64> {
    if !(sigma > 0.0) {
        return density.to_vec();
    }
    let reach = (4.0 * sigma / BIN_WIDTH).ceil() as isize;
    let kernel: Vec<f64> = (-reach..=reach)
        .map(|d| {
            let x = d as f64 * BIN_WIDTH / sigma;
            (-0.5 * x * x).exp()
        })
        .collect();
    let len = density.len() as isize;
    (0..len)
        .map(|k| {
            let (mut acc, mut wsum) = (0.0, 0.0);
            for (off, w) in (-reach..=reach).zip(&kernel) {
                let j = k + off;
                if (0..len).contains(&j) {
                    acc += w * density[j as usize];
                    wsum += w;
                }
            }
            acc / wsum
        })
        .collect()
}

/// Classifies a density (any positive scaling) by counting its peaks.
pub fn classify_density(density: &[f64], params: &PeakParams) -> Result<PeakVerdict> {
    if density.len() != BINS || density.iter().all(|&d| d <= 0.0) {
        return Err(Error::invalid("cannot classify an empty overlap histogram"));
    }
    let s = smooth(density, params.sigma);
    let max = s.iter().cloned().fold(0.0, f64::max);
    let mut candidates: Vec<Peak> = Vec::new();
    let mut k = 0;
    while k < s.len() {
        // treat a run of equal values as one plateau
        let mut end = k;
        while end + 1 < s.len() && s[end + 1] == s[k] {
            end += 1;
        }
        let left_lower = k == 0 || s[k - 1] < s[k];
        let right_lower = end + 1 == s.len() || s[end + 1] < s[k];
        if left_lower && right_lower && s[k] >= params.relative_height * max && s[k] > 0.0 {
            candidates.push(Peak {
                q: 0.5 * (bin_center(k) + bin_center(end)),
                height: s[k],
            });
        }
        k = end + 1;
    }
    candidates.sort_by(|a, b| b.height.total_cmp(&a.height).then(b.q.total_cmp(&a.q)));
    let mut peaks: Vec<Peak> = Vec::new();
    for c in candidates {
        if peaks.iter().all(|p| (p.q - c.q).abs() >= params.min_separation - 1e-12) {
            peaks.push(c);
        }
    }
    let classification = if peaks.len() >= 2 {
        PeakClass::MultiPeak
    } else {
        PeakClass::SinglePeak
    };
    Ok(PeakVerdict {
        classification,
        peaks,
        params: *params,
    })
}

pub fn classify_peaks(hist: &OverlapHistogram, params: &PeakParams) -> Result<PeakVerdict> {
    if hist.total() == 0 {
        return Err(Error::invalid("cannot classify an empty overlap histogram"));
    }
    classify_density(&hist.density(), params)
}

/// Share of multi-peak instances at one size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakFraction {
    pub n: usize,
    pub instances: usize,
    pub multi_peak: usize,
    pub fraction: f64,
    pub ci: Interval,
}

/// Multi-peak fraction per size with Wilson intervals.
pub fn peak_fraction(verdicts: &BTreeMap<usize, Vec<PeakVerdict>>) -> Result<Vec<PeakFraction>> {
    verdicts
        .iter()
        .map(|(&n, vs)| {
            if vs.len() < MIN_INSTANCES {
                return Err(Error::invalid(format!(
                    "size {n} has {} instances; at least {MIN_INSTANCES} are required",
                    vs.len()
                )));
            }
            let multi = vs.iter().filter(|v| v.classification == PeakClass::MultiPeak).count();
            Ok(PeakFraction {
                n,
                instances: vs.len(),
                multi_peak: multi,
                fraction: multi as f64 / vs.len() as f64,
                ci: wilson_interval(multi as u64, vs.len() as u64),
            })
        })
        .collect()
}

/// Writes `q_bin_center,density` rows.
pub fn write_histogram_csv<W: Write>(writer: W, hist: &OverlapHistogram) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| Error::parse("histogram csv", e.to_string());
    wtr.write_record(["q_bin_center", "density"]).map_err(err)?;
    for (k, d) in hist.density().iter().enumerate() {
        wtr.write_record([format!("{:.2}", bin_center(k)), d.to_string()])
            .map_err(err)?;
    }
    wtr.flush().map_err(|e| Error::parse("histogram csv", e.to_string()))?;
    Ok(())
}
