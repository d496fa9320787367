use std::f64::consts::PI;

use super::{hbar_c, NucleusSpec, ThermoError, COULOMB_MEV_FM};

/// Piecewise-linear `(ε, σ_inv)` table, energies in MeV and areas in fm².
#[derive(Debug, Clone, PartialEq)]
pub struct CaptureTable {
    points: Vec<(f64, f64)>,
}

impl CaptureTable {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self, ThermoError> {
        if points.len() < 2 {
            return Err(ThermoError::InvalidArgument("capture table needs at least two rows".into()));
        }
        if points.iter().any(|&(e, s)| !(e.is_finite() && s.is_finite() && s >= 0.0)) {
            return Err(ThermoError::InvalidArgument(
                "capture table entries must be finite with non-negative cross sections".into(),
            ));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(ThermoError::InvalidArgument("capture table has duplicate energies".into()));
        }
        Ok(Self { points })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.points[0].0, self.points[self.points.len() - 1].0)
    }

    pub fn interpolate(&self, eps: f64) -> Result<f64, ThermoError> {
        let (lo, hi) = self.range();
        if !(lo..=hi).contains(&eps) {
            return Err(ThermoError::OutsideTable { eps, lo, hi });
        }
        let idx = self.points.partition_point(|&(e, _)| e < eps);
        if idx == 0 {
            return Ok(self.points[0].1);
        }
        let (e0, s0) = self.points[idx - 1];
        let (e1, s1) = self.points[idx];
        Ok(s0 + (s1 - s0) * (eps - e0) / (e1 - e0))
    }
}

/// Source of the inverse capture cross section.
#[derive(Debug, Clone, PartialEq)]
pub enum InverseCapture {
    /// Geometric area times a WKB barrier transmission for one partial wave.
    Wkb { orbital: u32 },
    /// User-supplied table; overrides the barrier model.
    Table(CaptureTable),
}

impl Default for InverseCapture {
    fn default() -> Self {
        Self::Wkb { orbital: 0 }
    }
}

impl InverseCapture {
    pub fn sigma(&self, nucleus: &NucleusSpec, eps: f64) -> Result<f64, ThermoError> {
        match self {
            Self::Wkb { orbital } => inverse_capture_xsec(nucleus, *orbital, eps),
            Self::Table(t) => {
                check_energy(eps)?;
                t.interpolate(eps)
            }
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            Self::Wkb { .. } => "wkb",
            Self::Table(_) => "table",
        }
    }
}

fn check_energy(eps: f64) -> Result<(), ThermoError> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(ThermoError::InvalidArgument(format!("proton energy {eps} MeV must be positive")))
    }
}

/// Barrier for a proton in partial wave `l` at distance `r` (fm), in MeV.
fn barrier(nucleus: &NucleusSpec, l: u32, r: f64) -> f64 {
    let lf = f64::from(l);
    let hc = hbar_c();
    COULOMB_MEV_FM * f64::from(nucleus.charge()) / r + lf * (lf + 1.0) * hc * hc / (2.0 * nucleus.reduced_mass() * r * r)
}

/// Sommerfeld parameter for a proton of energy `eps` (MeV).
pub(crate) fn sommerfeld(nucleus: &NucleusSpec, eps: f64) -> f64 {
    let velocity_over_c = (2.0 * eps / nucleus.reduced_mass()).sqrt();
    COULOMB_MEV_FM * f64::from(nucleus.charge()) / (hbar_c() * velocity_over_c)
}

/// Gamow exponent `2∫κ dr` for pure Coulomb s-wave tunnelling from the
/// nuclear surface.
pub(crate) fn coulomb_exponent(nucleus: &NucleusSpec, eps: f64) -> f64 {
    let x = eps / nucleus.coulomb_barrier();
    let eta = sommerfeld(nucleus, eps);
    2.0 * PI * eta * (2.0 / PI) * (x.sqrt().acos() - (x * (1.0 - x)).sqrt())
}

/// `2∫κ dr` through the combined Coulomb and centrifugal barrier, integrated
/// numerically between the surface and the outer turning point.
pub(crate) fn barrier_exponent(nucleus: &NucleusSpec, l: u32, eps: f64) -> f64 {
    let radius = nucleus.radius();
    if eps >= barrier(nucleus, l, radius) {
        return 0.0;
    }
    let hc = hbar_c();
    let mu = nucleus.reduced_mass();
    let k = COULOMB_MEV_FM * f64::from(nucleus.charge());
    let lf = f64::from(l);
    let cent = lf * (lf + 1.0) * hc * hc / (2.0 * mu);
    let outer = (k + (k * k + 4.0 * eps * cent).sqrt()) / (2.0 * eps);
    // r = outer - (outer - R) t², which removes the square-root endpoint.
    let span = outer - radius;
    let integrand = |t: f64| {
        let r = outer - span * t * t;
        let kinetic = (barrier(nucleus, l, r) - eps).max(0.0);
        (2.0 * mu * kinetic).sqrt() / hc * 2.0 * span * t
    };
    const PANELS: usize = 4000;
    let h = 1.0 / PANELS as f64;
    let mut sum = integrand(0.0) + integrand(1.0);
    for i in 1..PANELS {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * integrand(i as f64 * h);
    }
    2.0 * sum * h / 3.0
}

/// Inverse capture cross section (fm²) for a proton of energy `eps` (MeV)
/// in partial wave `l`: `πR²` times the barrier transmission.
///
/// Above the barrier top the transmission is one. Below it the transmission
/// is `exp(-G)`, where `G` is the WKB exponent; for `l = 0` the pure
/// Coulomb closed form is used.
pub fn inverse_capture_xsec(nucleus: &NucleusSpec, l: u32, eps: f64) -> Result<f64, ThermoError> {
    check_energy(eps)?;
    let radius = nucleus.radius();
    let geometric = PI * radius * radius;
    let top = barrier(nucleus, l, radius);
    if eps >= top {
        return Ok(geometric);
    }
    let exponent = if l == 0 {
        coulomb_exponent(nucleus, eps)
    } else {
        barrier_exponent(nucleus, l, eps)
    };
    Ok(geometric * (-exponent).exp())
}
