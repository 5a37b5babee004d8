use crate::error::{Error, Result};

/// Ordered inverse temperatures, in physical units (applied to `E / scale`).
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    betas: Vec<f64>,
}

impl Schedule {
    pub fn from_betas(betas: Vec<f64>) -> Result<Self> {
        if betas.is_empty() || betas.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::invalid("schedule needs finite non-negative betas"));
        }
        Ok(Schedule { betas })
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn is_increasing(&self) -> bool {
        self.betas.windows(2).all(|w| w[1] > w[0])
    }
}

/// `steps` evenly spaced betas from `beta_ini` to `beta_end`, both included.
pub fn linear_beta_schedule(beta_ini: f64, beta_end: f64, steps: usize) -> Result<Schedule> {
    if steps < 2 {
        return Err(Error::invalid(format!("linear schedule needs at least 2 steps, got {steps}")));
    }
    if !(beta_ini >= 0.0 && beta_end > beta_ini && beta_end.is_finite()) {
        return Err(Error::invalid(format!(
            "linear schedule needs 0 <= beta_ini < beta_end, got {beta_ini} -> {beta_end}"
        )));
    }
    let step = (beta_end - beta_ini) / (steps - 1) as f64;
    let mut betas: Vec<f64> = (0..steps).map(|k| beta_ini + step * k as f64).collect();
    betas[steps - 1] = beta_end;
    Ok(Schedule { betas })
}

/// Temperatures in geometric progression, coldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureLadder {
    temperatures: Vec<f64>,
}

impl TemperatureLadder {
    pub fn from_temperatures(mut temperatures: Vec<f64>) -> Result<Self> {
        if temperatures.is_empty() || temperatures.iter().any(|t| !t.is_finite() || *t <= 0.0) {
            return Err(Error::invalid("ladder needs finite positive temperatures"));
        }
        temperatures.sort_by(f64::total_cmp);
        Ok(TemperatureLadder { temperatures })
    }

    pub fn temperatures(&self) -> &[f64] {
        &self.temperatures
    }

    pub fn betas(&self) -> Vec<f64> {
        self.temperatures.iter().map(|t| 1.0 / t).collect()
    }

    pub fn len(&self) -> usize {
        self.temperatures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.temperatures.is_empty()
    }
}

pub fn geometric_temperature_ladder(t_min: f64, t_max: f64, count: usize) -> Result<TemperatureLadder> {
    if count < 2 {
        return Err(Error::invalid(format!("ladder needs at least 2 temperatures, got {count}")));
    }
    if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
        return Err(Error::invalid(format!(
            "ladder needs 0 < T_min < T_max, got {t_min} .. {t_max}"
        )));
    }
    let ratio = (t_max / t_min).powf(1.0 / (count - 1) as f64);
    let mut temperatures: Vec<f64> = (0..count).map(|k| t_min * ratio.powi(k as i32)).collect();
    temperatures[0] = t_min;
    temperatures[count - 1] = t_max;
    Ok(TemperatureLadder { temperatures })
}
