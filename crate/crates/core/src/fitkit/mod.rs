//! Weighted least-squares extraction of the shape parameters and per-bin
//! normalizations from angular distributions.

pub mod lm;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angmom::legendre_unchecked;
use crate::xsection::{AngularModel, ModelError, ShapeParams, MAX_ORDER};

use lm::{LmOptions, Residuals};

/// Diagonal covariance entry (log space) above which a fit is reported as
/// not identifiable.
pub const IDENTIFIABILITY_LIMIT: f64 = 1e2;

/// Lower and upper edges of the multi-start box: A, B, C then r.
pub const START_BOX: [(f64, f64); 4] = [(1e-3, 10.0), (1e-3, 10.0), (1e-3, 10.0), (1e-3, 100.0)];

// Optimizer bounds in log space, wider than the start box.
const LOG_SHAPE_BOUNDS: (f64, f64) = (-18.420680743952367, 9.210340371976184); // 1e-8 .. 1e4
const LOG_R_BOUNDS: (f64, f64) = (-18.420680743952367, 18.420680743952367); // 1e-8 .. 1e8
const LOG_NORM_BOUNDS: (f64, f64) = (-700.0, 700.0);

const HALTON_BASES: [u32; 4] = [2, 3, 5, 7];

#[derive(Debug, Error)]
pub enum FitError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dataset '{label}': {reason}")]
    InvalidDataset { label: String, reason: String },
    #[error("underdetermined fit: {0}")]
    Underdetermined(String),
    #[error("no start converged ({0} attempted)")]
    NoConvergence(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularPoint {
    pub theta_deg: f64,
    #[serde(rename = "yield")]
    pub value: f64,
    pub err: f64,
}

/// Angular distribution for one proton-energy bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularDataset {
    label: String,
    points: Vec<AngularPoint>,
    unit_weights: bool,
}

impl AngularDataset {
    /// Builds a dataset from `(theta_deg, yield, err)` rows.
    ///
    /// When every error is absent or zero, unit weights are used. Mixing
    /// positive errors with absent or non-positive ones is rejected.
    pub fn new(label: impl Into<String>, rows: &[(f64, f64, Option<f64>)]) -> Result<Self, FitError> {
        let label = label.into();
        let bad = |reason: String| FitError::InvalidDataset {
            label: label.clone(),
            reason,
        };
        if rows.len() < 5 {
            return Err(bad(format!("{} points; need at least 5", rows.len())));
        }
        for &(theta, y, _) in rows {
            if !(theta > 0.0 && theta < 180.0) {
                return Err(bad(format!("angle {theta} deg outside (0, 180)")));
            }
            if !y.is_finite() {
                return Err(bad(format!("yield {y} at {theta} deg is not finite")));
            }
        }
        if rows.iter().all(|r| r.0 == rows[0].0) {
            return Err(bad("all points share one angle".into()));
        }
        let unit_weights = rows.iter().all(|r| r.2.map_or(true, |e| e == 0.0));
        if !unit_weights {
            if let Some(r) = rows.iter().find(|r| !r.2.is_some_and(|e| e > 0.0 && e.is_finite())) {
                return Err(bad(format!("error at {} deg must be positive", r.0)));
            }
        }
        let points = rows
            .iter()
            .map(|&(theta_deg, value, err)| AngularPoint {
                theta_deg,
                value,
                err: if unit_weights { 1.0 } else { err.unwrap_or(1.0) },
            })
            .collect();
        Ok(Self {
            label,
            points,
            unit_weights,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &[AngularPoint] {
        &self.points
    }

    pub fn unit_weights(&self) -> bool {
        self.unit_weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Copy with yields and errors multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.points {
            p.value *= k;
            if !self.unit_weights {
                p.err *= k;
            }
        }
        out
    }
}

/// `Σ ((y - n σ(θ)) / err)²` over all points of all datasets.
pub fn chi_square(
    params: &ShapeParams,
    norms: &[f64],
    datasets: &[AngularDataset],
    model: &AngularModel,
) -> Result<f64, FitError> {
    if norms.len() != datasets.len() {
        return Err(FitError::InvalidArgument(format!(
            "{} norms for {} datasets",
            norms.len(),
            datasets.len()
        )));
    }
    let series = model.legendre_coefficients(params)?;
    let mut chi2 = 0.0;
    for (d, &n) in datasets.iter().zip(norms) {
        for p in &d.points {
            let sigma = series.eval(p.theta_deg.to_radians())?;
            chi2 += ((p.value - n * sigma) / p.err).powi(2);
        }
    }
    Ok(chi2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FitMode {
    /// Shared shape parameters, one normalization per dataset.
    #[default]
    Joint,
    /// Independent fit of every dataset.
    PerBin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub n_starts: usize,
    /// Offset into the Halton sequence; seed 0 starts at index 1.
    pub seed: u64,
    /// Relative χ² tolerance for counting agreeing starts.
    pub tol: f64,
    pub max_iter: usize,
    pub mode: FitMode,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            n_starts: 32,
            seed: 0,
            tol: 1e-6,
            max_iter: 500,
            mode: FitMode::Joint,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: ShapeParams,
    pub norms: Vec<f64>,
    pub chi2: f64,
    pub dof: i64,
    /// Over `(ln A, ln B, ln C, ln(1+r), ln n_1, ...)`.
    pub covariance: Vec<Vec<f64>>,
    pub converged: bool,
    pub identifiable: bool,
    pub n_starts_agreeing: usize,
    /// χ² at each multi-start initial point, in start order.
    #[serde(skip)]
    pub start_chi2: Vec<f64>,
}

impl FitResult {
    /// Interval for `r` from `k` standard deviations of `ln(1+r)`, clipped at 0.
    pub fn r_interval(&self, k: f64) -> (f64, f64) {
        let s = self.covariance[3][3].max(0.0).sqrt();
        let base = 1.0 + self.params.r();
        ((base * (-k * s).exp() - 1.0).max(0.0), base * (k * s).exp() - 1.0)
    }

    /// Standard deviation of entry `i` of the log-space parameter vector.
    pub fn log_sigma(&self, i: usize) -> f64 {
        self.covariance[i][i].max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum FitOutput {
    Joint(FitResult),
    PerBin { bins: Vec<(String, FitResult)> },
}

/// Fits in the mode selected by `options`.
pub fn fit(datasets: &[AngularDataset], model: &AngularModel, options: &FitOptions) -> Result<FitOutput, FitError> {
    match options.mode {
        FitMode::Joint => fit_angular(datasets, model, options).map(FitOutput::Joint),
        FitMode::PerBin => datasets
            .iter()
            .map(|d| Ok((d.label.clone(), fit_angular(std::slice::from_ref(d), model, options)?)))
            .collect::<Result<Vec<_>, FitError>>()
            .map(|bins| FitOutput::PerBin { bins }),
    }
}

// Point with Legendre values precomputed.
struct Row {
    dataset: usize,
    value: f64,
    err: f64,
    legendre: [f64; MAX_ORDER + 1],
}

struct Problem<'a> {
    model: &'a AngularModel,
    rows: Vec<Row>,
    n_sets: usize,
}

impl<'a> Problem<'a> {
    fn new(model: &'a AngularModel, datasets: &[AngularDataset]) -> Self {
        let rows = datasets
            .iter()
            .enumerate()
            .flat_map(|(i, d)| {
                d.points.iter().map(move |p| {
                    let x = p.theta_deg.to_radians().cos();
                    let mut legendre = [0.0; MAX_ORDER + 1];
                    for (l, v) in legendre.iter_mut().enumerate() {
                        *v = legendre_unchecked(l as u32, x);
                    }
                    Row {
                        dataset: i,
                        value: p.value,
                        err: p.err,
                        legendre,
                    }
                })
            })
            .collect();
        Self {
            model,
            rows,
            n_sets: datasets.len(),
        }
    }

    fn shape_values(&self, params: &ShapeParams) -> Option<Vec<f64>> {
        let series = self.model.legendre_coefficients(params).ok()?;
        let c = series.coefficients();
        Some(
            self.rows
                .iter()
                .map(|r| r.legendre.iter().zip(c).map(|(p, c)| p * c).sum())
                .collect(),
        )
    }

    /// Best norms for fixed shape, from the linear least-squares profile.
    fn profile_norms(&self, sigma: &[f64]) -> Vec<f64> {
        let mut num = vec![0.0; self.n_sets];
        let mut den = vec![0.0; self.n_sets];
        for (r, s) in self.rows.iter().zip(sigma) {
            let w = 1.0 / (r.err * r.err);
            num[r.dataset] += w * r.value * s;
            den[r.dataset] += w * s * s;
        }
        num.iter()
            .zip(&den)
            .map(|(n, d)| if *d > 0.0 && *n > 0.0 { n / d } else { 1.0 })
            .collect()
    }

    fn residuals_for(&self, params: &ShapeParams, norms: &[f64], out: &mut [f64]) -> bool {
        let Some(sigma) = self.shape_values(params) else {
            return false;
        };
        for ((o, r), s) in out.iter_mut().zip(&self.rows).zip(&sigma) {
            *o = (r.value - norms[r.dataset] * s) / r.err;
        }
        true
    }

    fn chi2_for(&self, params: &ShapeParams, norms: &[f64]) -> f64 {
        let mut out = vec![0.0; self.rows.len()];
        if self.residuals_for(params, norms, &mut out) {
            out.iter().map(|v| v * v).sum()
        } else {
            f64::INFINITY
        }
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lower = vec![LOG_SHAPE_BOUNDS.0; 3];
        let mut upper = vec![LOG_SHAPE_BOUNDS.1; 3];
        lower.push(LOG_R_BOUNDS.0);
        upper.push(LOG_R_BOUNDS.1);
        lower.extend(std::iter::repeat(LOG_NORM_BOUNDS.0).take(self.n_sets));
        upper.extend(std::iter::repeat(LOG_NORM_BOUNDS.1).take(self.n_sets));
        (lower, upper)
    }
}

// Optimizer coordinates: (ln A, ln B, ln C, ln r, ln n_i).
fn decode(x: &[f64]) -> Option<(ShapeParams, Vec<f64>)> {
    let p = ShapeParams::new(x[0].exp(), x[1].exp(), x[2].exp(), x[3].exp()).ok()?;
    Some((p, x[4..].iter().map(|v| v.exp()).collect()))
}

impl Residuals for Problem<'_> {
    fn len(&self) -> usize {
        self.rows.len()
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) -> bool {
        match decode(x) {
            Some((p, norms)) => self.residuals_for(&p, &norms, out),
            None => false,
        }
    }
}

fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = u64::from(base);
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while index > 0 {
        out += (index % b) as f64 * inv;
        index /= b;
        inv /= base as f64;
    }
    out
}

/// Multi-start points: Halton coordinates mapped log-uniformly onto
/// [`START_BOX`].
pub fn start_points(n: usize, seed: u64) -> Vec<ShapeParams> {
    (0..n as u64)
        .map(|i| {
            let mut v = [0.0; 4];
            for (k, ((lo, hi), base)) in START_BOX.iter().zip(HALTON_BASES).enumerate() {
                let u = radical_inverse(seed + i + 1, base);
                v[k] = (lo.ln() + u * (hi.ln() - lo.ln())).exp();
            }
            ShapeParams::new(v[0], v[1], v[2], v[3]).expect("start box is positive")
        })
        .collect()
}

struct StartOutcome {
    initial_chi2: f64,
    x: Vec<f64>,
    chi2: f64,
    converged: bool,
}

/// Joint multi-start fit of all datasets.
pub fn fit_angular(
    datasets: &[AngularDataset],
    model: &AngularModel,
    options: &FitOptions,
) -> Result<FitResult, FitError> {
    if datasets.is_empty() {
        return Err(FitError::InvalidArgument("no datasets".into()));
    }
    if options.n_starts == 0 {
        return Err(FitError::InvalidArgument("at least one start is required".into()));
    }
    let n_points: usize = datasets.iter().map(AngularDataset::len).sum();
    let n_params = 4 + datasets.len();
    let dof = n_points as i64 - n_params as i64;
    if dof <= 0 {
        return Err(FitError::Underdetermined(format!(
            "{n_points} points for {n_params} parameters"
        )));
    }
    let problem = Problem::new(model, datasets);
    let (lower, upper) = problem.bounds();
    let lm_opts = LmOptions {
        max_iter: options.max_iter,
        tol: 1e-10,
        lower,
        upper,
    };

    let starts = start_points(options.n_starts, options.seed);
    let outcomes: Vec<StartOutcome> = starts
        .par_iter()
        .map(|p| {
            let norms = problem
                .shape_values(p)
                .map(|s| problem.profile_norms(&s))
                .unwrap_or_else(|| vec![1.0; problem.n_sets]);
            let mut x0 = vec![p.a().ln(), p.b().ln(), p.c().ln(), p.r().ln()];
            x0.extend(norms.iter().map(|n| n.ln()));
            let initial_chi2 = lm::cost_at(&problem, &x0);
            let out = lm::minimize(&problem, &x0, &lm_opts);
            StartOutcome {
                initial_chi2,
                x: out.x,
                chi2: out.cost,
                converged: out.converged,
            }
        })
        .collect();

    let mut best: Option<usize> = None;
    for (i, o) in outcomes.iter().enumerate() {
        if !o.converged || !o.chi2.is_finite() {
            continue;
        }
        if best.map_or(true, |b| o.chi2 < outcomes[b].chi2) {
            best = Some(i);
        }
    }
    let Some(best) = best else {
        return Err(FitError::NoConvergence(outcomes.len()));
    };
    let winner = &outcomes[best];
    let agreeing = outcomes
        .iter()
        .filter(|o| o.converged && o.chi2 - winner.chi2 <= options.tol * (1.0 + winner.chi2))
        .count();
    log::debug!(
        "best start {best}: chi2 {} ({agreeing}/{} agreeing)",
        winner.chi2,
        outcomes.len()
    );

    let (params, norms) = decode(&winner.x).ok_or_else(|| FitError::InvalidArgument("optimum left the domain".into()))?;
    let covariance = covariance(&problem, &params, &norms);
    let identifiable = (0..covariance.nrows()).all(|i| covariance[(i, i)] <= IDENTIFIABILITY_LIMIT);
    Ok(FitResult {
        params,
        norms,
        chi2: winner.chi2,
        dof,
        covariance: covariance.row_iter().map(|r| r.iter().copied().collect()).collect(),
        converged: true,
        identifiable,
        n_starts_agreeing: agreeing,
        start_chi2: outcomes.iter().map(|o| o.initial_chi2).collect(),
    })
}

/// Inverse of the finite-difference Hessian of `χ²/2` over
/// `(ln A, ln B, ln C, ln(1+r), ln n_i)`.
///
/// At `r = 0` the Hessian is taken one step inside the domain.
/// Eigenvalues below `1e-12` of the largest are raised to that floor before
/// inversion, so flat directions show up as very large variances and the
/// result is always positive semidefinite.
fn covariance(problem: &Problem, params: &ShapeParams, norms: &[f64]) -> DMatrix<f64> {
    let mut u = vec![params.a().ln(), params.b().ln(), params.c().ln(), params.r().ln_1p()];
    u.extend(norms.iter().map(|n| n.ln()));
    let n = u.len();
    let half_chi2 = |v: &[f64]| {
        let r = (v[3].exp() - 1.0).max(0.0);
        match ShapeParams::new(v[0].exp(), v[1].exp(), v[2].exp(), r) {
            Ok(p) => {
                let ns: Vec<f64> = v[4..].iter().map(|x| x.exp()).collect();
                0.5 * problem.chi2_for(&p, &ns)
            }
            Err(_) => f64::INFINITY,
        }
    };
    let h = 1e-4;
    // Keep the stencil inside r >= 0; a stencil straddling the boundary
    // would see the clamp as a kink.
    u[3] = u[3].max(h);
    let f0 = half_chi2(&u);
    let mut hess = DMatrix::zeros(n, n);
    let mut v = u.clone();
    for i in 0..n {
        v[i] = u[i] + h;
        let fp = half_chi2(&v);
        v[i] = u[i] - h;
        let fm = half_chi2(&v);
        v[i] = u[i];
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let mut corner = |si: f64, sj: f64| {
                v[i] = u[i] + si * h;
                v[j] = u[j] + sj * h;
                let f = half_chi2(&v);
                v[i] = u[i];
                v[j] = u[j];
                f
            };
            let val = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0)) / (4.0 * h * h);
            hess[(i, j)] = val;
            hess[(j, i)] = val;
        }
    }
    if hess.iter().any(|x| !x.is_finite()) {
        return DMatrix::from_diagonal_element(n, n, f64::INFINITY);
    }
    let eig = SymmetricEigen::new(hess);
    let top = eig.eigenvalues.amax();
    let floor = (top * 1e-12).max(f64::MIN_POSITIVE);
    let inv = eig.eigenvalues.map(|l| 1.0 / l.max(floor));
    let q = &eig.eigenvectors;
    let cov = q * DMatrix::from_diagonal(&inv) * q.transpose();
    (&cov + cov.transpose()) * 0.5
}

/// One synthetic dataset per entry of `norms`, all on the angle grid
/// `thetas` (degrees).
///
/// Yields are `n σ(θ) (1 + noise_frac z)` with `z` standard normal from a
/// ChaCha8 stream seeded with `seed`, drawn dataset by dataset in angle
/// order. Errors are `noise_frac n σ(θ)`; at zero noise the datasets carry
/// unit weights.
pub fn synth_dataset(
    params: &ShapeParams,
    norms: &[f64],
    thetas: &[f64],
    noise_frac: f64,
    seed: u64,
    model: &AngularModel,
) -> Result<Vec<AngularDataset>, FitError> {
    if !(noise_frac >= 0.0 && noise_frac.is_finite()) {
        return Err(FitError::InvalidArgument(format!("noise fraction {noise_frac} must be non-negative")));
    }
    let series = model.legendre_coefficients(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    norms
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let mut rows = Vec::with_capacity(thetas.len());
            for &t in thetas {
                let truth = n * series.eval(t.to_radians())?;
                let z: f64 = if noise_frac > 0.0 { StandardNormal.sample(&mut rng) } else { 0.0 };
                rows.push((t, truth * (1.0 + noise_frac * z), Some(noise_frac * truth)));
            }
            AngularDataset::new(format!("bin{}", i + 1), &rows)
        })
        .collect()
}
