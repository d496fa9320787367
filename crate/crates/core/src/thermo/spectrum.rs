use serde::{Deserialize, Serialize};

use super::{InverseCapture, NucleusSpec, ThermoError};

/// One bin of an angle-integrated proton spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    /// Proton energy, MeV.
    pub eps: f64,
    pub counts: f64,
    pub err: f64,
}

impl SpectrumPoint {
    pub fn new(eps: f64, counts: f64, err: f64) -> Result<Self, ThermoError> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(ThermoError::InvalidPoint {
                eps,
                reason: "proton energy must be positive".into(),
            });
        }
        if !(err >= 0.0) || !counts.is_finite() {
            return Err(ThermoError::InvalidPoint {
                eps,
                reason: "counts must be finite and errors non-negative".into(),
            });
        }
        Ok(Self { eps, counts, err })
    }
}

/// Spectrum value divided by `ε σ_inv(ε)`. `value` is `None` when the
/// inverse cross section vanishes at this energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledPoint {
    pub eps: f64,
    pub value: Option<f64>,
    pub err: Option<f64>,
    /// `σ_inv(ε)` used for the scaling, fm².
    pub sigma_inv: f64,
}

impl ScaledPoint {
    pub fn is_scalable(&self) -> bool {
        self.value.is_some()
    }
}

/// Divides every yield by `ε σ_inv(ε)`; errors scale by the same factor.
pub fn scale_spectrum(
    points: &[SpectrumPoint],
    nucleus: &NucleusSpec,
    capture: &InverseCapture,
) -> Result<Vec<ScaledPoint>, ThermoError> {
    if points.is_empty() {
        return Err(ThermoError::InvalidArgument("spectrum has no points".into()));
    }
    points
        .iter()
        .map(|p| {
            let sigma_inv = capture.sigma(nucleus, p.eps)?;
            let factor = p.eps * sigma_inv;
            if factor > 0.0 {
                Ok(ScaledPoint {
                    eps: p.eps,
                    value: Some(p.counts / factor),
                    err: Some(p.err / factor),
                    sigma_inv,
                })
            } else {
                log::warn!("inverse cross section vanishes at {} MeV; point left unscaled", p.eps);
                Ok(ScaledPoint {
                    eps: p.eps,
                    value: None,
                    err: None,
                    sigma_inv,
                })
            }
        })
        .collect()
}

/// Exponential slope fit of a scaled spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperatureFit {
    /// `-1/slope`, MeV. Non-finite for a flat spectrum.
    pub temperature: f64,
    pub temperature_err: f64,
    pub log_intercept: f64,
    pub slope: f64,
    pub points_used: usize,
}

/// Weighted linear regression of `ln(value)` on `ε` over points with
/// `ε <= eps_max`.
///
/// Weights come from the propagated relative errors when every used point
/// has a positive error; otherwise unit weights are used and the slope
/// variance is estimated from the residual scatter.
pub fn fit_temperature(points: &[ScaledPoint], eps_max: f64) -> Result<TemperatureFit, ThermoError> {
    let mut rows = Vec::new();
    for p in points.iter().filter(|p| p.eps <= eps_max) {
        let Some(value) = p.value else {
            log::warn!("skipping unscalable point at {} MeV", p.eps);
            continue;
        };
        if !(value > 0.0) {
            return Err(ThermoError::InvalidPoint {
                eps: p.eps,
                reason: format!("scaled value {value} is not positive"),
            });
        }
        let rel = p.err.map(|e| e / value).unwrap_or(0.0);
        rows.push((p.eps, value.ln(), rel));
    }
    if rows.len() < 3 {
        return Err(ThermoError::Underdetermined(format!(
            "{} usable points at or below {eps_max} MeV; need at least 3",
            rows.len()
        )));
    }
    let weighted = rows.iter().all(|r| r.2 > 0.0);
    let weight = |rel: f64| if weighted { 1.0 / (rel * rel) } else { 1.0 };

    // Centered in x and offset in y so that a flat spectrum gives slope 0 exactly.
    let y_ref = rows[0].1;
    let s: f64 = rows.iter().map(|r| weight(r.2)).sum();
    let x_mean = rows.iter().map(|r| weight(r.2) * r.0).sum::<f64>() / s;
    let (mut sxx, mut sxy, mut sy) = (0.0, 0.0, 0.0);
    for &(x, y, rel) in &rows {
        let w = weight(rel);
        let dx = x - x_mean;
        sxx += w * dx * dx;
        sxy += w * dx * (y - y_ref);
        sy += w * (y - y_ref);
    }
    if !(sxx > 0.0) {
        return Err(ThermoError::Underdetermined("all usable points share one energy".into()));
    }
    let slope = sxy / sxx;
    let intercept = y_ref + sy / s - slope * x_mean;
    let slope_var = if weighted {
        1.0 / sxx
    } else {
        let rss: f64 = rows.iter().map(|&(x, y, _)| (y - intercept - slope * x).powi(2)).sum();
        rss / (rows.len() - 2) as f64 / sxx
    };
    let temperature = -1.0 / slope;
    if !temperature.is_finite() {
        log::warn!("flat scaled spectrum: temperature is not finite");
    }
    Ok(TemperatureFit {
        temperature,
        temperature_err: slope_var.sqrt() / (slope * slope),
        log_intercept: intercept,
        slope,
        points_used: rows.len(),
    })
}
