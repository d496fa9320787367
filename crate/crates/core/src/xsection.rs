//! Angular distribution of evaporation protons after E1/E2 photoabsorption.
//!
//! The cross section is a Legendre series whose coefficients are sums of
//! interference terms between compound states of spin `L1` and `L2`. Each
//! term carries a fixed geometric weight (Clebsch–Gordan and Z coefficients)
//! times a transmission magnitude and an S-matrix correlation factor. The
//! shape depends on four ratios: `A = T(L=2)/T(L=1)`, `B = T(l'=1)/T(l'=0)`,
//! `C = T(l'=2)/T(l'=0)` and `r = β/Γ_cn`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angmom::{self, AngmomError, AngularMomentum, Projection};

/// Highest Legendre order the model can produce.
pub const MAX_ORDER: usize = 4;

/// Photon spin; only electric radiation is modeled.
const PHOTON_SPIN: u32 = 1;

/// Relative tolerance on the imaginary residue of a realized coefficient.
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid channel configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid shape parameter: {0}")]
    InvalidParams(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate model: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Coefficient(#[from] AngmomError),
}

/// Weight given to each residual spin `I'` when summing over residual states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ResidualWeighting {
    /// Unit weight for every allowed `I'`.
    #[default]
    Equal,
    /// `2I' + 1`.
    Multiplicity,
    /// `exp(-I'(I'+1) / 2σ²)`.
    SpinCutoff { sigma: f64 },
}

impl ResidualWeighting {
    pub fn weight(&self, residual_spin: u32) -> f64 {
        let i = f64::from(residual_spin);
        match *self {
            Self::Equal => 1.0,
            Self::Multiplicity => 2.0 * i + 1.0,
            Self::SpinCutoff { sigma } => (-i * (i + 1.0) / (2.0 * sigma * sigma)).exp(),
        }
    }
}

/// Phase convention for the Z coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ZPhase {
    /// Original Blatt–Biedenharn definition.
    #[default]
    BlattBiedenharn,
    /// Huby revision, `Z̄ = i^(l2 - l1 - L) Z`. Only for sign audits.
    Huby,
}

/// Which multipoles and proton partial waves enter the term sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    multipoles: Vec<u32>,
    exit_orbitals: Vec<u32>,
    weighting: ResidualWeighting,
    z_phase: ZPhase,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            multipoles: vec![1, 2],
            exit_orbitals: vec![0, 1, 2],
            weighting: ResidualWeighting::Equal,
            z_phase: ZPhase::BlattBiedenharn,
        }
    }
}

impl ChannelConfig {
    pub fn new(multipoles: &[u32], exit_orbitals: &[u32], weighting: ResidualWeighting) -> Result<Self, ModelError> {
        let mut multipoles = multipoles.to_vec();
        multipoles.sort_unstable();
        multipoles.dedup();
        let mut exit_orbitals = exit_orbitals.to_vec();
        exit_orbitals.sort_unstable();
        exit_orbitals.dedup();
        if multipoles.is_empty() || multipoles.iter().any(|&l| !(1..=2).contains(&l)) {
            return Err(ModelError::InvalidConfig(format!(
                "multipoles must be a nonempty subset of {{1, 2}}, got {multipoles:?}"
            )));
        }
        if exit_orbitals.is_empty() || exit_orbitals.iter().any(|&l| l > 2) {
            return Err(ModelError::InvalidConfig(format!(
                "proton orbital momenta must be a nonempty subset of {{0, 1, 2}}, got {exit_orbitals:?}"
            )));
        }
        if let ResidualWeighting::SpinCutoff { sigma } = weighting {
            if !(sigma.is_finite() && sigma > 0.0) {
                return Err(ModelError::InvalidConfig(format!("spin cutoff must be positive, got {sigma}")));
            }
        }
        Ok(Self {
            multipoles,
            exit_orbitals,
            weighting,
            z_phase: ZPhase::BlattBiedenharn,
        })
    }

    pub fn with_z_phase(mut self, z_phase: ZPhase) -> Self {
        self.z_phase = z_phase;
        self
    }

    pub fn multipoles(&self) -> &[u32] {
        &self.multipoles
    }

    pub fn exit_orbitals(&self) -> &[u32] {
        &self.exit_orbitals
    }

    pub fn weighting(&self) -> ResidualWeighting {
        self.weighting
    }

    pub fn z_phase(&self) -> ZPhase {
        self.z_phase
    }

    /// Photon orbital momenta reachable for multipole `l` with electric
    /// radiation: `L ± 1`, non-negative.
    pub fn entrance_orbitals(multipole: u32) -> Vec<u32> {
        let mut v = Vec::with_capacity(2);
        if multipole >= 1 {
            v.push(multipole - 1);
        }
        v.push(multipole + 1);
        v
    }
}

/// One interference term of the angular distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TermAmplitude {
    /// Compound spins `(L1, L2)`; equal to the photon multipolarities.
    pub compound: (u32, u32),
    /// Photon orbital momenta `(l1, l2)`.
    pub photon_orbital: (u32, u32),
    /// Proton orbital momenta `(l1', l2')`.
    pub proton_orbital: (u32, u32),
    /// Residual-nucleus spin `I'`, equal to the exit channel spin.
    pub residual_spin: u32,
    /// Legendre order.
    pub order: u32,
    #[serde(skip)]
    pub geometry: Complex64,
}

impl TermAmplitude {
    pub fn is_cross_symmetry(&self) -> bool {
        self.compound.0 != self.compound.1
    }

    /// The term with both halves of the interference exchanged.
    pub fn swapped(&self) -> (u32, u32, u32, u32, u32, u32, u32, u32) {
        (
            self.compound.1,
            self.compound.0,
            self.photon_orbital.1,
            self.photon_orbital.0,
            self.proton_orbital.1,
            self.proton_orbital.0,
            self.residual_spin,
            self.order,
        )
    }

    pub fn key(&self) -> (u32, u32, u32, u32, u32, u32, u32, u32) {
        (
            self.compound.0,
            self.compound.1,
            self.photon_orbital.0,
            self.photon_orbital.1,
            self.proton_orbital.0,
            self.proton_orbital.1,
            self.residual_spin,
            self.order,
        )
    }

    /// Number of quadrupole, `l' = 1` and `l' = 2` indices in the term.
    fn channel_counts(&self) -> [i32; 3] {
        let count = |pair: (u32, u32), v: u32| i32::from(pair.0 == v) + i32::from(pair.1 == v);
        [
            count(self.compound, 2),
            count(self.proton_orbital, 1),
            count(self.proton_orbital, 2),
        ]
    }
}

/// The four shape parameters of the angular distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "B")]
    b: f64,
    #[serde(rename = "C")]
    c: f64,
    r: f64,
}

impl ShapeParams {
    pub fn new(a: f64, b: f64, c: f64, r: f64) -> Result<Self, ModelError> {
        for (name, v) in [("A", a), ("B", b), ("C", c), ("r", r)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ModelError::InvalidParams(format!("{name} = {v} must be finite and non-negative")));
            }
        }
        Ok(Self { a, b, c, r })
    }

    /// `T(L=2) / T(L=1)`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// `T(l'=1) / T(l'=0)`.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// `T(l'=2) / T(l'=0)`.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// `β / Γ_cn`.
    pub fn r(&self) -> f64 {
        self.r
    }
}

/// Correlation between S-matrix elements of compound spins `l1`, `l2`:
/// unity for equal spin and parity, `1/(1+r)` across spins.
pub fn correlation_factor(l1: u32, l2: u32, r: f64) -> Result<f64, ModelError> {
    if !(r >= 0.0) {
        return Err(ModelError::InvalidArgument(format!("r = {r} must be non-negative")));
    }
    Ok(if l1 == l2 { 1.0 } else { 1.0 / (1.0 + r) })
}

fn ratio_magnitude(counts: [i32; 3], params: &ShapeParams) -> f64 {
    (params.a.powi(counts[0]) * params.b.powi(counts[1]) * params.c.powi(counts[2])).sqrt()
}

/// `√(T^L1 T^L2 T^l1' T^l2')` relative to the dipole, `l' = 0` reference.
pub fn magnitude_factor(term: &TermAmplitude, params: &ShapeParams) -> f64 {
    ratio_magnitude(term.channel_counts(), params)
}

fn i_power(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn z_with_phase(
    phase: ZPhase,
    l1: u32,
    j1: u32,
    l2: u32,
    j2: u32,
    s: u32,
    order: u32,
) -> Result<Complex64, AngmomError> {
    let j = AngularMomentum::integer;
    let z = angmom::z_coeff(j(l1), j(j1), j(l2), j(j2), j(s), j(order))?;
    Ok(match phase {
        ZPhase::BlattBiedenharn => Complex64::new(z, 0.0),
        ZPhase::Huby => i_power(i64::from(l2) - i64::from(l1) - i64::from(order)) * z,
    })
}

/// `⟨L -1; 1 +1 | l 0⟩`, the photon helicity projection onto orbital `l`.
fn photon_cg(multipole: u32, orbital: u32) -> Result<f64, AngmomError> {
    angmom::clebsch_gordan(
        AngularMomentum::integer(multipole),
        Projection::integer(-1),
        AngularMomentum::integer(PHOTON_SPIN),
        Projection::integer(1),
        AngularMomentum::integer(orbital),
        Projection::integer(0),
    )
}

fn tri(a: u32, b: u32, c: u32) -> bool {
    a.abs_diff(b) <= c && c <= a + b
}

/// Every term allowed by the selection rules, in lexicographic order of
/// `(L1, L2, l1, l2, l1', l2', I', L)`.
pub fn enumerate_terms(config: &ChannelConfig) -> Result<Vec<TermAmplitude>, ModelError> {
    let max_residual = config
        .multipoles
        .iter()
        .flat_map(|&m| config.exit_orbitals.iter().map(move |&l| m + l))
        .max()
        .unwrap_or(0);
    let max_order = 2 * config.multipoles.iter().copied().max().unwrap_or(0);

    let mut terms = Vec::new();
    for &big1 in &config.multipoles {
        for &big2 in &config.multipoles {
            for l1 in ChannelConfig::entrance_orbitals(big1) {
                for l2 in ChannelConfig::entrance_orbitals(big2) {
                    let entrance = photon_cg(big1, l1)? * photon_cg(big2, l2)?;
                    let entrance_phase = i_power(i64::from(big2) - i64::from(big1) + i64::from(l1) - i64::from(l2));
                    for &p1 in &config.exit_orbitals {
                        for &p2 in &config.exit_orbitals {
                            let same_spin = big1 == big2;
                            if same_spin != (p1.abs_diff(p2) % 2 == 0) {
                                continue;
                            }
                            for spin in 0..=max_residual {
                                if !(tri(p1, big1, spin) && tri(p2, big2, spin)) {
                                    continue;
                                }
                                let sign = if (spin + 1) % 2 == 0 { 1.0 } else { -1.0 };
                                for order in 0..=max_order {
                                    let parity_ok = (l1 + l2 + order) % 2 == 0 && (p1 + p2 + order) % 2 == 0;
                                    if !(parity_ok
                                        && tri(big1, big2, order)
                                        && tri(l1, l2, order)
                                        && tri(p1, p2, order))
                                    {
                                        continue;
                                    }
                                    let z_in = z_with_phase(config.z_phase, l1, big1, l2, big2, PHOTON_SPIN, order)?;
                                    let z_out = z_with_phase(config.z_phase, p1, big1, p2, big2, spin, order)?;
                                    let geometry = entrance_phase
                                        * z_in
                                        * z_out
                                        * (entrance * sign * config.weighting.weight(spin));
                                    terms.push(TermAmplitude {
                                        compound: (big1, big2),
                                        photon_orbital: (l1, l2),
                                        proton_orbital: (p1, p2),
                                        residual_spin: spin,
                                        order,
                                        geometry,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(terms)
}

/// Coefficients `c_0..c_4` of `σ(θ) = Σ c_L P_L(cos θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegendreSeries {
    coeffs: [f64; MAX_ORDER + 1],
}

impl LegendreSeries {
    pub fn new(coeffs: [f64; MAX_ORDER + 1]) -> Self {
        Self { coeffs }
    }

    pub fn coefficients(&self) -> &[f64; MAX_ORDER + 1] {
        &self.coeffs
    }

    pub fn coefficient(&self, order: usize) -> f64 {
        self.coeffs.get(order).copied().unwrap_or(0.0)
    }

    /// `σ` at `x = cos θ`.
    pub fn eval_cos(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(l, c)| c * angmom::legendre_unchecked(l as u32, x))
            .sum()
    }

    pub fn eval(&self, theta: f64) -> Result<f64, ModelError> {
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(ModelError::InvalidArgument(format!("angle {theta} rad outside [0, π]")));
        }
        Ok(self.eval_cos(theta.cos()))
    }

    /// Forward-to-backward hemisphere yield ratio.
    pub fn forward_backward_ratio(&self) -> Result<f64, ModelError> {
        let (mut forward, mut backward) = (0.0, 0.0);
        for (l, c) in self.coeffs.iter().enumerate() {
            let half = half_range_integral(l as u32);
            forward += c * half;
            backward += if l % 2 == 0 { c * half } else { -c * half };
        }
        if !(backward > 0.0) {
            return Err(ModelError::Degenerate(format!(
                "backward hemisphere integral {backward} is not positive"
            )));
        }
        Ok(forward / backward)
    }
}

/// `∫_0^1 P_l(x) dx`.
fn half_range_integral(l: u32) -> f64 {
    if l == 0 {
        1.0
    } else {
        let p = |n: u32| angmom::legendre_unchecked(n, 0.0);
        (p(l - 1) - p(l + 1)) / f64::from(2 * l + 1)
    }
}

#[derive(Debug, Clone, Copy)]
struct BasisEntry {
    order: usize,
    counts: [i32; 3],
    cross: bool,
    weight: Complex64,
}

/// Term list for one configuration, pre-grouped by how each term depends on
/// the shape parameters.
#[derive(Debug, Clone)]
pub struct AngularModel {
    config: ChannelConfig,
    terms: Vec<TermAmplitude>,
    basis: Vec<BasisEntry>,
}

impl AngularModel {
    pub fn new(config: &ChannelConfig) -> Result<Self, ModelError> {
        let terms = enumerate_terms(config)?;
        let mut basis: Vec<BasisEntry> = Vec::new();
        for t in &terms {
            let counts = t.channel_counts();
            let order = t.order as usize;
            let cross = t.is_cross_symmetry();
            match basis
                .iter_mut()
                .find(|e| e.order == order && e.counts == counts && e.cross == cross)
            {
                Some(e) => e.weight += t.geometry,
                None => basis.push(BasisEntry {
                    order,
                    counts,
                    cross,
                    weight: t.geometry,
                }),
            }
        }
        Ok(Self {
            config: config.clone(),
            terms,
            basis,
        })
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.config
    }

    pub fn terms(&self) -> &[TermAmplitude] {
        &self.terms
    }

    /// Complex coefficient sums before realization and normalization.
    pub fn raw_coefficients(&self, params: &ShapeParams) -> [Complex64; MAX_ORDER + 1] {
        let corr = 1.0 / (1.0 + params.r);
        let mut out = [Complex64::new(0.0, 0.0); MAX_ORDER + 1];
        for e in &self.basis {
            let scale = ratio_magnitude(e.counts, params) * if e.cross { corr } else { 1.0 };
            out[e.order] += e.weight * scale;
        }
        out
    }

    /// Real coefficients normalized to `c_0 = 1`.
    pub fn legendre_coefficients(&self, params: &ShapeParams) -> Result<LegendreSeries, ModelError> {
        let raw = self.raw_coefficients(params);
        let c0 = raw[0].re;
        if !(c0 > 0.0) {
            return Err(ModelError::Degenerate(format!("isotropic coefficient {c0} is not positive")));
        }
        let mut coeffs = [0.0; MAX_ORDER + 1];
        for (l, c) in raw.iter().enumerate() {
            if c.im.abs() >= IMAGINARY_TOLERANCE * c0 {
                return Err(ModelError::Degenerate(format!(
                    "coefficient c_{l} keeps imaginary part {}",
                    c.im
                )));
            }
            coeffs[l] = c.re / c0;
        }
        Ok(LegendreSeries { coeffs })
    }

    pub fn cross_section(&self, params: &ShapeParams, theta: f64) -> Result<f64, ModelError> {
        self.legendre_coefficients(params)?.eval(theta)
    }

    pub fn asymmetry(&self, params: &ShapeParams) -> Result<f64, ModelError> {
        self.legendre_coefficients(params)?.forward_backward_ratio()
    }
}

pub fn legendre_coefficients(params: &ShapeParams, config: &ChannelConfig) -> Result<LegendreSeries, ModelError> {
    AngularModel::new(config)?.legendre_coefficients(params)
}

/// Relative differential cross section at `theta` (radians).
pub fn cross_section(params: &ShapeParams, config: &ChannelConfig, theta: f64) -> Result<f64, ModelError> {
    AngularModel::new(config)?.cross_section(params, theta)
}

/// Ratio of forward- to backward-hemisphere yield.
pub fn asymmetry(params: &ShapeParams, config: &ChannelConfig) -> Result<f64, ModelError> {
    AngularModel::new(config)?.asymmetry(params)
}

/// `σ(90°)` directly from the series values at `x = 0`.
pub fn transverse_value(series: &LegendreSeries) -> f64 {
    series.eval_cos(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn reference() -> ShapeParams {
        ShapeParams::new(0.082, 0.47, 0.37, 0.11).unwrap()
    }

    #[test]
    fn correlation_examples() {
        assert_eq!(correlation_factor(1, 1, 123.0).unwrap(), 1.0);
        assert!((correlation_factor(1, 2, 0.11).unwrap() - 1.0 / 1.11).abs() < 1e-15);
        assert!(correlation_factor(2, 1, 1e300).unwrap() < 1e-299);
        assert!(correlation_factor(1, 2, -0.1).is_err());
        assert!(correlation_factor(1, 2, f64::NAN).is_err());
    }

    fn term(compound: (u32, u32), proton: (u32, u32)) -> TermAmplitude {
        TermAmplitude {
            compound,
            photon_orbital: (0, 0),
            proton_orbital: proton,
            residual_spin: 0,
            order: 0,
            geometry: Complex64::new(1.0, 0.0),
        }
    }

    #[test]
    fn magnitude_examples() {
        let p = reference();
        assert_eq!(magnitude_factor(&term((1, 1), (0, 0)), &p), 1.0);
        let v = magnitude_factor(&term((1, 2), (0, 1)), &p);
        assert!((v - (0.082f64 * 0.47).sqrt()).abs() < 1e-15);
        assert!((v - 0.1963).abs() < 1e-4);
        let v = magnitude_factor(&term((2, 2), (2, 2)), &p);
        assert!((v - 0.082 * 0.37).abs() < 1e-15);
    }

    #[test]
    fn shape_params_reject_negative_and_non_finite() {
        assert!(ShapeParams::new(-1.0, 0.0, 0.0, 0.0).is_err());
        assert!(ShapeParams::new(0.0, f64::INFINITY, 0.0, 0.0).is_err());
        assert!(ShapeParams::new(0.0, 0.0, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn config_rejects_out_of_range_channels() {
        assert!(ChannelConfig::new(&[1, 3], &[0], ResidualWeighting::Equal).is_err());
        assert!(ChannelConfig::new(&[1], &[0, 3], ResidualWeighting::Equal).is_err());
        assert!(ChannelConfig::new(&[], &[0], ResidualWeighting::Equal).is_err());
        assert!(ChannelConfig::new(&[1], &[0], ResidualWeighting::SpinCutoff { sigma: 0.0 }).is_err());
    }

    #[test]
    fn entrance_orbitals_follow_electric_rule() {
        assert_eq!(ChannelConfig::entrance_orbitals(1), vec![0, 2]);
        assert_eq!(ChannelConfig::entrance_orbitals(2), vec![1, 3]);
    }

    #[test]
    fn odd_orders_only_across_spins() {
        let terms = enumerate_terms(&ChannelConfig::default()).unwrap();
        assert!(!terms.is_empty());
        for t in &terms {
            if t.order % 2 == 1 {
                assert!(t.is_cross_symmetry());
            }
            assert!(t.order as usize <= MAX_ORDER);
            let (p1, p2) = t.proton_orbital;
            assert_eq!(t.is_cross_symmetry(), p1.abs_diff(p2) % 2 == 1);
            assert!(tri(p1, t.compound.0, t.residual_spin) && tri(p2, t.compound.1, t.residual_spin));
        }
        let keys: Vec<_> = terms.iter().map(|t| t.key()).collect();
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn swap_partners_are_conjugate() {
        let terms = enumerate_terms(&ChannelConfig::default()).unwrap();
        for t in &terms {
            let partner = terms
                .iter()
                .find(|u| u.key() == t.swapped())
                .expect("enumeration closed under swap");
            assert!((partner.geometry - t.geometry.conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn dipole_only_has_no_odd_orders() {
        let config = ChannelConfig::new(&[1], &[0, 1, 2], ResidualWeighting::Equal).unwrap();
        let terms = enumerate_terms(&config).unwrap();
        assert!(terms.iter().all(|t| t.order == 0 || t.order == 2));
    }

    #[test]
    fn no_quadrupole_means_no_odd_coefficients() {
        let p = ShapeParams::new(0.0, 0.47, 0.37, 0.11).unwrap();
        let s = legendre_coefficients(&p, &ChannelConfig::default()).unwrap();
        assert_eq!(s.coefficient(1), 0.0);
        assert_eq!(s.coefficient(3), 0.0);
        assert_eq!(asymmetry(&p, &ChannelConfig::default()).unwrap(), 1.0);
    }

    #[test]
    fn r_dependence_is_confined_to_odd_orders() {
        let model = AngularModel::new(&ChannelConfig::default()).unwrap();
        let base = model.legendre_coefficients(&reference()).unwrap();
        for r in [0.0, 0.11, 1.0, 10.0] {
            let p = ShapeParams::new(0.082, 0.47, 0.37, r).unwrap();
            let s = model.legendre_coefficients(&p).unwrap();
            for l in 0..=MAX_ORDER {
                if l % 2 == 0 {
                    assert!((s.coefficient(l) - base.coefficient(l)).abs() < 1e-14);
                } else {
                    let scaled = (1.0 + r) * s.coefficient(l);
                    let reference = 1.11 * base.coefficient(l);
                    assert!((scaled - reference).abs() < 1e-12, "L={l} r={r}");
                }
            }
        }
    }

    #[test]
    fn reference_parameters_peak_forward() {
        let model = AngularModel::new(&ChannelConfig::default()).unwrap();
        let s = model.legendre_coefficients(&reference()).unwrap();
        assert_eq!(s.coefficient(0), 1.0);
        assert!(s.coefficient(1) > 0.0);
        let u = model.asymmetry(&reference()).unwrap();
        assert!(u > 1.05, "U = {u}");
        let u1 = model.asymmetry(&ShapeParams::new(0.082, 0.47, 0.37, 1.0).unwrap()).unwrap();
        assert!((u - 1.0).abs() > (u1 - 1.0).abs());
    }

    #[test]
    fn bohr_limit_is_symmetric() {
        let model = AngularModel::new(&ChannelConfig::default()).unwrap();
        let p = ShapeParams::new(0.082, 0.47, 0.37, 1e12).unwrap();
        let s = model.legendre_coefficients(&p).unwrap();
        let mid = transverse_value(&s);
        for i in 0..=90 {
            let th = f64::from(i).to_radians();
            let d = (s.eval(th).unwrap() - s.eval(std::f64::consts::PI - th).unwrap()).abs();
            assert!(d / mid < 1e-10);
        }
        assert!((model.asymmetry(&p).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn series_values_at_ninety_degrees() {
        let s = LegendreSeries::new([1.0, 0.3, -0.2, 0.05, 0.1]);
        let direct = s.eval(FRAC_PI_2).unwrap();
        assert!((direct - (1.0 + 0.1 + 3.0 / 8.0 * 0.1)).abs() < 1e-15);
        let iso = LegendreSeries::new([1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(iso.eval(0.3).unwrap(), 1.0);
        assert_eq!(iso.eval(2.9).unwrap(), 1.0);
        assert!(s.eval(-0.1).is_err());
        assert!(s.eval(3.2).is_err());
    }

    #[test]
    fn half_range_integrals() {
        let expect = [1.0, 0.5, 0.0, -0.125, 0.0];
        for (l, e) in expect.iter().enumerate() {
            assert!((half_range_integral(l as u32) - e).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_backward_hemisphere() {
        let s = LegendreSeries::new([1.0, 2.0, 0.0, 0.0, 0.0]);
        assert!(matches!(s.forward_backward_ratio(), Err(ModelError::Degenerate(_))));
    }

    #[test]
    fn weighting_modes() {
        assert_eq!(ResidualWeighting::Equal.weight(3), 1.0);
        assert_eq!(ResidualWeighting::Multiplicity.weight(3), 7.0);
        let w = ResidualWeighting::SpinCutoff { sigma: 2.0 }.weight(2);
        assert!((w - (-6.0f64 / 8.0).exp()).abs() < 1e-15);
    }
}
