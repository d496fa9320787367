//! Command-line front end: `xsym <subcommand>`.

pub mod io;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use crate::angmom::{self, AngmomError, AngularMomentum, Projection};
use crate::fitkit::{self, AngularDataset, FitError, FitMode, FitOptions, FitOutput, FitResult};
use crate::thermo::{self, InverseCapture, NucleusSpec, ThermoError};
use crate::xsection::{AngularModel, ChannelConfig, ModelError, ResidualWeighting, ShapeParams, ZPhase};

use io::{fmt_f64, num, nums, pick, significant, ConfigFile, WidthUnit};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl AppError {
    /// 1 usage, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Data(_) => 2,
            Self::Numerical(_) => 3,
        }
    }
}

impl From<ModelError> for AppError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Degenerate(_) => Self::Numerical(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

impl From<FitError> for AppError {
    fn from(e: FitError) -> Self {
        match e {
            FitError::InvalidArgument(_) => Self::Usage(e.to_string()),
            FitError::InvalidDataset { .. } | FitError::Underdetermined(_) => Self::Data(e.to_string()),
            FitError::NoConvergence(_) => Self::Numerical(e.to_string()),
            FitError::Model(m) => m.into(),
        }
    }
}

impl From<ThermoError> for AppError {
    fn from(e: ThermoError) -> Self {
        match e {
            ThermoError::InvalidArgument(_) => Self::Usage(e.to_string()),
            ThermoError::Degenerate(_) => Self::Numerical(e.to_string()),
            _ => Self::Data(e.to_string()),
        }
    }
}

impl From<AngmomError> for AppError {
    fn from(e: AngmomError) -> Self {
        Self::Usage(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Parser)]
#[command(name = "xsym", version, about = "Angular distributions, cross-symmetry fits and compound-nucleus timescales")]
pub struct Cli {
    /// Flat `key = value` file; flags on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format (default: csv for `model`, json otherwise).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one coupling coefficient.
    Coeff(CoeffArgs),
    /// Legendre coefficients and a sampled σ(θ) curve.
    Model(ModelArgs),
    /// Fit A, B, C, r and per-bin norms to angular distributions.
    Fit(FitArgs),
    /// Temperature from an angle-integrated proton spectrum.
    Spectrum(SpectrumArgs),
    /// Mean exciton number and temperature band.
    Exciton(ExcitonArgs),
    /// Phase relaxation, decay and thermalization times.
    Times(TimesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CoeffKind {
    /// ⟨j1 m1 j2 m2 | j m⟩
    Cg,
    /// {j1 j2 j3; j4 j5 j6}
    W6j,
    /// W(a b c d; e f)
    Racah,
    /// Z(l1 j1 l2 j2; s L)
    Z,
}

#[derive(Debug, Args)]
struct CoeffArgs {
    #[arg(value_enum)]
    kind: CoeffKind,
    /// Six spins (and projections for cg), as `1`, `3/2` or `-1/2`.
    #[arg(num_args = 6, allow_hyphen_values = true, value_name = "J")]
    values: Vec<String>,
}

#[derive(Debug, Args)]
struct ChannelArgs {
    /// Residual-spin weighting: equal, multiplicity or spin-cutoff:SIGMA.
    #[arg(long)]
    weighting: Option<String>,
    /// Photon multipoles, comma separated.
    #[arg(long)]
    multipoles: Option<String>,
    /// Exit proton orbitals, comma separated.
    #[arg(long)]
    exit_orbitals: Option<String>,
    /// Z-coefficient phase: blatt-biedenharn or huby.
    #[arg(long)]
    z_phase: Option<String>,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(short = 'A', allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(short = 'B', allow_hyphen_values = true)]
    b: Option<f64>,
    #[arg(short = 'C', allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(short = 'r', allow_hyphen_values = true)]
    r: Option<f64>,
    /// Angle grid `start:stop:count` in degrees.
    #[arg(long)]
    grid: Option<String>,
    #[command(flatten)]
    channel: ChannelArgs,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// CSV with columns bin_label, theta_deg, yield[, err].
    data: Option<PathBuf>,
    /// joint or per-bin.
    #[arg(long)]
    mode: Option<String>,
    /// Number of multi-start points (default 32)
    #[arg(long)]
    starts: Option<usize>,
    /// Offset into the Halton start sequence (default 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Relative χ² tolerance for counting agreeing starts (default 1e-6)
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap per start (default 500)
    #[arg(long)]
    max_iter: Option<usize>,
    #[command(flatten)]
    channel: ChannelArgs,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    /// CSV with columns eps_mev, counts[, err].
    data: Option<PathBuf>,
    /// Residual mass number (default 208).
    #[arg(short = 'A', long = "mass")]
    mass: Option<u32>,
    /// Residual charge (default 82).
    #[arg(short = 'Z', long = "charge")]
    charge: Option<u32>,
    /// Excitation energy in MeV, reported only.
    #[arg(short = 'E', long = "excitation", allow_hyphen_values = true)]
    excitation: Option<f64>,
    /// Upper proton energy of the fit, MeV.
    #[arg(long)]
    eps_max: Option<f64>,
    /// CSV with columns eps_mev, sigma_fm2 replacing the barrier model.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Partial wave of the barrier model.
    #[arg(long)]
    orbital: Option<u32>,
}

#[derive(Debug, Args)]
struct ExcitonArgs {
    #[arg(short = 'A', long = "mass")]
    mass: Option<u32>,
    /// Excitation energy, MeV.
    #[arg(short = 'E', long = "excitation", allow_hyphen_values = true)]
    excitation: Option<f64>,
}

#[derive(Debug, Args)]
struct TimesArgs {
    /// β/Γ_cn.
    #[arg(short = 'r', allow_hyphen_values = true)]
    r: Option<f64>,
    /// Compound decay width (default 0.1eV).
    #[arg(long)]
    gcn: Option<String>,
    /// Spreading width (default 2MeV).
    #[arg(long)]
    gspr: Option<String>,
    /// Mean level spacing (default 1e-16MeV).
    #[arg(long = "D")]
    d: Option<String>,
}

/// Runs the CLI, writing to stdout, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run_with(args, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("xsym: {}", e.to_string().trim_end());
            e.exit_code()
        }
    }
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write) -> Result<(), AppError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                write!(out, "{e}").map_err(|e| AppError::Data(e.to_string()))?;
                return Ok(());
            }
            return Err(AppError::Usage(e.to_string()));
        }
    };
    let config = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let format = pick(cli.format, &config, "format")?;
    let output: Option<PathBuf> = pick(cli.output, &config, "output")?;
    if let Some(p) = &output {
        io::check_output(p)?;
    }
    let text = match cli.command {
        Command::Coeff(a) => cmd_coeff(&a, format)?,
        Command::Model(a) => cmd_model(a, &config, format.unwrap_or(Format::Csv))?,
        Command::Fit(a) => cmd_fit(a, &config, format.unwrap_or(Format::Json))?,
        Command::Spectrum(a) => cmd_spectrum(a, &config, format.unwrap_or(Format::Json))?,
        Command::Exciton(a) => cmd_exciton(a, &config, format.unwrap_or(Format::Json))?,
        Command::Times(a) => cmd_times(a, &config, format.unwrap_or(Format::Json))?,
    };
    match output {
        Some(p) => std::fs::write(&p, text).map_err(|e| AppError::Data(format!("cannot write {}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| AppError::Data(e.to_string())),
    }
}

fn required<T>(value: Option<T>, what: &str) -> Result<T, AppError> {
    value.ok_or_else(|| AppError::Usage(format!("missing {what}")))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn csv_text(header: &[&str], rows: &[Vec<String>], comments: &[String]) -> Result<String, AppError> {
    let mut buf = Vec::new();
    for c in comments {
        writeln!(buf, "# {c}").map_err(|e| AppError::Data(e.to_string()))?;
    }
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let csv_err = |e: csv::Error| AppError::Data(e.to_string());
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.flush().map_err(|e| AppError::Data(e.to_string()))?;
    }
    String::from_utf8(buf).map_err(|e| AppError::Data(e.to_string()))
}

fn cmd_coeff(args: &CoeffArgs, format: Option<Format>) -> Result<String, AppError> {
    let v = &args.values;
    let j = |i: usize| v[i].parse::<AngularMomentum>().map_err(AppError::from);
    let m = |i: usize| v[i].parse::<Projection>().map_err(AppError::from);
    let (name, value) = match args.kind {
        CoeffKind::Cg => ("cg", angmom::clebsch_gordan(j(0)?, m(1)?, j(2)?, m(3)?, j(4)?, m(5)?)?),
        CoeffKind::W6j => ("w6j", angmom::wigner_6j(j(0)?, j(1)?, j(2)?, j(3)?, j(4)?, j(5)?)?),
        CoeffKind::Racah => ("racah", angmom::racah_w(j(0)?, j(1)?, j(2)?, j(3)?, j(4)?, j(5)?)?),
        CoeffKind::Z => ("z", angmom::z_coeff(j(0)?, j(1)?, j(2)?, j(3)?, j(4)?, j(5)?)?),
    };
    let text = significant(value, 12);
    Ok(match format {
        None => format!("{text}\n"),
        Some(Format::Csv) => csv_text(&["kind", "arguments", "value"], &[vec![name.into(), v.join(" "), text]], &[])?,
        Some(Format::Json) => pretty(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "coeff",
            "kind": name,
            "arguments": v,
            "value": num(value),
        })),
    })
}

fn parse_list(text: &str, what: &str) -> Result<Vec<u32>, AppError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| AppError::Usage(format!("bad {what} list {text:?}")))
        })
        .collect()
}

fn build_model(args: &ChannelArgs, config: &ConfigFile) -> Result<AngularModel, AppError> {
    let weighting = match pick(args.weighting.clone(), config, "weighting")?.as_deref() {
        None | Some("equal") => ResidualWeighting::Equal,
        Some("multiplicity") => ResidualWeighting::Multiplicity,
        Some(other) => match other.strip_prefix("spin-cutoff:").map(str::parse::<f64>) {
            Some(Ok(sigma)) if sigma > 0.0 => ResidualWeighting::SpinCutoff { sigma },
            _ => {
                return Err(AppError::Usage(format!(
                    "unknown weighting {other:?}; use equal, multiplicity or spin-cutoff:SIGMA"
                )))
            }
        },
    };
    let multipoles = match pick(args.multipoles.clone(), config, "multipoles")? {
        Some(t) => parse_list(&t, "multipole")?,
        None => vec![1, 2],
    };
    let exits = match pick(args.exit_orbitals.clone(), config, "exit-orbitals")? {
        Some(t) => parse_list(&t, "exit orbital")?,
        None => vec![0, 1, 2],
    };
    let phase = match pick(args.z_phase.clone(), config, "z-phase")?.as_deref() {
        None | Some("blatt-biedenharn") => ZPhase::BlattBiedenharn,
        Some("huby") => ZPhase::Huby,
        Some(other) => return Err(AppError::Usage(format!("unknown z-phase {other:?}"))),
    };
    let config = ChannelConfig::new(&multipoles, &exits, weighting)?.with_z_phase(phase);
    Ok(AngularModel::new(&config)?)
}

fn params_json(p: &ShapeParams) -> Value {
    json!({ "A": num(p.a()), "B": num(p.b()), "C": num(p.c()), "r": num(p.r()) })
}

fn cmd_model(args: ModelArgs, config: &ConfigFile, format: Format) -> Result<String, AppError> {
    let a = required(pick(args.a, config, "A")?, "-A")?;
    let b = required(pick(args.b, config, "B")?, "-B")?;
    let c = required(pick(args.c, config, "C")?, "-C")?;
    let r = required(pick(args.r, config, "r")?, "-r")?;
    let params = ShapeParams::new(a, b, c, r)?;
    let grid = io::parse_grid(&pick(args.grid, config, "grid")?.unwrap_or_else(|| "0:180:19".into()))?;
    let model = build_model(&args.channel, config)?;
    let series = model.legendre_coefficients(&params)?;
    // Adding zero turns -0 into 0 for printing.
    let coeffs: Vec<f64> = series.coefficients().iter().map(|c| c + 0.0).collect();
    let asymmetry = series.forward_backward_ratio()?;
    let curve: Vec<(f64, f64)> = grid
        .iter()
        .map(|&t| Ok((t, series.eval(t.to_radians())?)))
        .collect::<Result<_, ModelError>>()?;
    Ok(match format {
        Format::Json => pretty(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "model",
            "params": params_json(&params),
            "coefficients": nums(&coeffs),
            "asymmetry": num(asymmetry),
            "curve": curve.iter().map(|&(t, s)| json!({"theta_deg": t, "sigma": num(s)})).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let comments = vec![
                format!("schema_version = {SCHEMA_VERSION}"),
                format!("A = {a}, B = {b}, C = {c}, r = {r}"),
                format!(
                    "c_L = {}",
                    coeffs.iter().map(|&c| fmt_f64(c)).collect::<Vec<_>>().join(", ")
                ),
                format!("asymmetry = {asymmetry}"),
            ];
            let rows: Vec<Vec<String>> = curve.iter().map(|&(t, s)| vec![fmt_f64(t), fmt_f64(s)]).collect();
            csv_text(&["theta_deg", "sigma"], &rows, &comments)?
        }
    })
}

fn fit_json(res: &FitResult) -> Value {
    let (lo, hi) = res.r_interval(1.0);
    json!({
        "params": params_json(&res.params),
        "norms": nums(&res.norms),
        "chi2": num(res.chi2),
        "dof": res.dof,
        "covariance": res.covariance.iter().map(|row| nums(row)).collect::<Vec<_>>(),
        "converged": res.converged,
        "identifiable": res.identifiable,
        "n_starts_agreeing": res.n_starts_agreeing,
        "r_interval_1sigma": [num(lo), num(hi)],
    })
}

struct Residual {
    label: String,
    theta: f64,
    value: f64,
    err: f64,
    model: f64,
}

fn residuals(datasets: &[AngularDataset], fits: &[(&FitResult, usize)], model: &AngularModel) -> Result<Vec<Residual>, AppError> {
    let mut out = Vec::new();
    for (d, &(res, norm_idx)) in datasets.iter().zip(fits) {
        let series = model.legendre_coefficients(&res.params)?;
        let n = res.norms[norm_idx];
        for p in d.points() {
            out.push(Residual {
                label: d.label().to_string(),
                theta: p.theta_deg,
                value: p.value,
                err: p.err,
                model: n * series.eval(p.theta_deg.to_radians())?,
            });
        }
    }
    Ok(out)
}

fn cmd_fit(args: FitArgs, config: &ConfigFile, format: Format) -> Result<String, AppError> {
    let path: PathBuf = required(pick(args.data, config, "data")?, "data file")?;
    io::check_input(&path)?;
    let mode = match pick(args.mode, config, "mode")?.as_deref() {
        None | Some("joint") => FitMode::Joint,
        Some("per-bin") => FitMode::PerBin,
        Some(other) => return Err(AppError::Usage(format!("unknown mode {other:?}; use joint or per-bin"))),
    };
    let defaults = FitOptions::default();
    let options = FitOptions {
        n_starts: pick(args.starts, config, "starts")?.unwrap_or(defaults.n_starts),
        seed: pick(args.seed, config, "seed")?.unwrap_or(defaults.seed),
        tol: pick(args.tol, config, "tol")?.unwrap_or(defaults.tol),
        max_iter: pick(args.max_iter, config, "max-iter")?.unwrap_or(defaults.max_iter),
        mode,
    };
    let model = build_model(&args.channel, config)?;
    let datasets = io::read_angular(&path)?;
    let output = fitkit::fit(&datasets, &model, &options)?;

    let (summary, table) = match &output {
        FitOutput::Joint(res) => {
            if !res.identifiable {
                log::warn!("fit is not identifiable: a log-space variance exceeds {}", fitkit::IDENTIFIABILITY_LIMIT);
            }
            let refs: Vec<_> = (0..datasets.len()).map(|i| (res, i)).collect();
            (fit_json(res), residuals(&datasets, &refs, &model)?)
        }
        FitOutput::PerBin { bins } => {
            let mut items = Vec::new();
            for (label, res) in bins {
                if !res.identifiable {
                    log::warn!("bin {label}: fit is not identifiable");
                }
                let mut v = fit_json(res);
                v["bin_label"] = json!(label);
                items.push(v);
            }
            let refs: Vec<_> = bins.iter().map(|(_, r)| (r, 0)).collect();
            (Value::Array(items), residuals(&datasets, &refs, &model)?)
        }
    };
    let mode_name = match mode {
        FitMode::Joint => "joint",
        FitMode::PerBin => "per-bin",
    };
    Ok(match format {
        Format::Json => {
            let key = if mode == FitMode::Joint { "result" } else { "bins" };
            pretty(&json!({
                "schema_version": SCHEMA_VERSION,
                "command": "fit",
                "input": path.display().to_string(),
                "mode": mode_name,
                key: summary,
                "residuals": table.iter().map(|r| json!({
                    "bin_label": r.label,
                    "theta_deg": r.theta,
                    "yield": num(r.value),
                    "err": num(r.err),
                    "model": num(r.model),
                    "pull": num((r.value - r.model) / r.err),
                })).collect::<Vec<_>>(),
            }))
        }
        Format::Csv => {
            let comments = vec![
                format!("schema_version = {SCHEMA_VERSION}"),
                format!("mode = {mode_name}"),
                format!("fit = {}", serde_json::to_string(&summary).expect("JSON values always serialize")),
            ];
            let rows: Vec<Vec<String>> = table
                .iter()
                .map(|r| {
                    vec![
                        r.label.clone(),
                        fmt_f64(r.theta),
                        fmt_f64(r.value),
                        fmt_f64(r.err),
                        fmt_f64(r.model),
                        fmt_f64((r.value - r.model) / r.err),
                    ]
                })
                .collect();
            csv_text(&["bin_label", "theta_deg", "yield", "err", "model", "pull"], &rows, &comments)?
        }
    })
}

fn cmd_spectrum(args: SpectrumArgs, config: &ConfigFile, format: Format) -> Result<String, AppError> {
    let path: PathBuf = required(pick(args.data, config, "data")?, "spectrum file")?;
    io::check_input(&path)?;
    let table_path: Option<PathBuf> = pick(args.table, config, "table")?;
    if let Some(t) = &table_path {
        io::check_input(t)?;
    }
    let mass = pick(args.mass, config, "mass")?.unwrap_or(208);
    let charge = pick(args.charge, config, "charge")?.unwrap_or(82);
    let excitation = pick(args.excitation, config, "excitation")?.unwrap_or(0.0);
    let eps_max = pick(args.eps_max, config, "eps-max")?.unwrap_or(f64::INFINITY);
    let orbital = pick(args.orbital, config, "orbital")?.unwrap_or(0);
    let nucleus = NucleusSpec::new(mass, charge, excitation)?;

    let capture = match &table_path {
        Some(t) => InverseCapture::Table(io::read_capture_table(t)?),
        None => InverseCapture::Wkb { orbital },
    };
    let points = io::read_spectrum(&path)?;
    let scaled = thermo::scale_spectrum(&points, &nucleus, &capture)?;
    let fit = thermo::fit_temperature(&scaled, eps_max)?;
    let capture_json = match &table_path {
        Some(t) => json!({"source": capture.describe(), "path": t.display().to_string()}),
        None => json!({"source": capture.describe(), "orbital": orbital}),
    };
    let opt = |v: Option<f64>| v.map_or(Value::Null, num);
    Ok(match format {
        Format::Json => pretty(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "spectrum",
            "input": path.display().to_string(),
            "nucleus": {
                "mass_number": mass,
                "charge": charge,
                "excitation_energy_mev": num(excitation),
                "radius_fm": num(nucleus.radius()),
                "coulomb_barrier_mev": num(nucleus.coulomb_barrier()),
            },
            "capture": capture_json,
            "eps_max_mev": num(eps_max),
            "temperature_mev": num(fit.temperature),
            "temperature_err_mev": num(fit.temperature_err),
            "slope_per_mev": num(fit.slope),
            "log_intercept": num(fit.log_intercept),
            "points_used": fit.points_used,
            "points": points.iter().zip(&scaled).map(|(p, s)| json!({
                "eps_mev": p.eps,
                "counts": num(p.counts),
                "err": num(p.err),
                "sigma_inv_fm2": num(s.sigma_inv),
                "scaled": opt(s.value),
                "scaled_err": opt(s.err),
            })).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let comments = vec![
                format!("schema_version = {SCHEMA_VERSION}"),
                format!("capture = {capture_json}"),
                format!(
                    "temperature_mev = {} +/- {} ({} points)",
                    fit.temperature, fit.temperature_err, fit.points_used
                ),
            ];
            let cell = |v: Option<f64>| v.map_or(String::new(), fmt_f64);
            let rows: Vec<Vec<String>> = points
                .iter()
                .zip(&scaled)
                .map(|(p, s)| {
                    vec![
                        fmt_f64(p.eps),
                        fmt_f64(p.counts),
                        fmt_f64(p.err),
                        fmt_f64(s.sigma_inv),
                        cell(s.value),
                        cell(s.err),
                    ]
                })
                .collect();
            csv_text(
                &["eps_mev", "counts", "err", "sigma_inv_fm2", "scaled", "scaled_err"],
                &rows,
                &comments,
            )?
        }
    })
}

fn single_row(format: Format, command: &str, fields: &[(&str, Value)]) -> Result<String, AppError> {
    Ok(match format {
        Format::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("schema_version".into(), json!(SCHEMA_VERSION));
            obj.insert("command".into(), json!(command));
            for (k, v) in fields {
                obj.insert((*k).into(), v.clone());
            }
            pretty(&Value::Object(obj))
        }
        Format::Csv => {
            let header: Vec<&str> = fields.iter().map(|f| f.0).collect();
            let row: Vec<String> = fields
                .iter()
                .map(|(_, v)| match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            csv_text(&header, &[row], &[format!("schema_version = {SCHEMA_VERSION}")])?
        }
    })
}

fn cmd_exciton(args: ExcitonArgs, config: &ConfigFile, format: Format) -> Result<String, AppError> {
    let mass = required(pick(args.mass, config, "mass")?, "-A")?;
    let e_star = required(pick(args.excitation, config, "excitation")?, "-E")?;
    let rep = thermo::exciton_report(mass, e_star)?;
    single_row(
        format,
        "exciton",
        &[
            ("mass_number", json!(mass)),
            ("excitation_energy_mev", num(e_star)),
            ("g_per_mev", num(rep.g)),
            ("n_bar", num(rep.n_bar)),
            ("n_sigma", num(rep.n_sigma)),
            ("t_low_mev", num(rep.t_low)),
            ("t_high_mev", num(rep.t_high)),
        ],
    )
}

fn width(flag: Option<String>, config: &ConfigFile, key: &str, default: &str, unit: WidthUnit) -> Result<f64, AppError> {
    io::parse_width(&pick(flag, config, key)?.unwrap_or_else(|| default.to_string()), unit)
}

fn cmd_times(args: TimesArgs, config: &ConfigFile, format: Format) -> Result<String, AppError> {
    let r = required(pick(args.r, config, "r")?, "-r")?;
    let gcn = width(args.gcn, config, "gcn", "0.1eV", WidthUnit::Ev)?;
    let gspr = width(args.gspr, config, "gspr", "2MeV", WidthUnit::Mev)?;
    let d = width(args.d, config, "D", "1e-16MeV", WidthUnit::Mev)?;
    let rep = thermo::timescales(r, gcn, gspr, d)?;
    single_row(
        format,
        "times",
        &[
            ("r", num(r)),
            ("beta_ev", num(rep.beta)),
            ("tau_ph_s", num(rep.tau_ph)),
            ("gamma_cn_ev", num(rep.gamma_cn)),
            ("tau_cn_s", num(rep.tau_cn)),
            ("gamma_spr_mev", num(rep.gamma_spr)),
            ("tau_th_s", num(rep.tau_th)),
            ("level_spacing_mev", num(rep.level_spacing_d)),
            ("t_heisenberg_s", num(rep.t_heisenberg)),
            ("n_eff", num(rep.n_eff)),
            ("tau_ph_over_tau_th", num(rep.tau_ph / rep.tau_th)),
        ],
    )
}

