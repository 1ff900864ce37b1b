//! Command-line front end. Every command writes into `--out` (created if
//! needed) along with a `manifest.json` echoing the configuration.
//!
//! Exit codes: 0 success, 1 `trajan-repro` check failure, 2 usage, 3 data,
//! 4 convergence. Failures print a JSON object on stderr.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::data::{read_csv, trajan, write_csv, CountDataset, CsvSchema};
use crate::design::{DesignSpec, Term};
use crate::diagnostics::{
    aic_csv, aic_table, cell_fit_csv, curve_csv, curves_svg, empirical_zero_diagnostic, fitted_vs_observed,
    overlay_points, scatter_svg, zero_curve, zero_diagnostic_csv, CellFit, CurveModel, CurveTable, GridSpec,
};
use crate::dist::Family;
use crate::error::{Error, Result};
use crate::fit::{fit_mle, FitOptions, FitResult};
use crate::likelihood::{loglik, ModelSpec, PhiMode};
use crate::simulate::{simulate, SimPlan};
use crate::zi::{match_dispersion_through_point, zi_gamma_from_point, ZiType};

pub const SCHEMA_VERSION: u32 = 1;
const TRAJAN_CELL: &str = "photoperiod:bap";

#[derive(Debug, Parser)]
#[command(name = "zicount", version, about = "Zero-altered count regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Fit one model and write fit.json.
    Fit(FitArgs),
    /// Draw a dataset from a model with given parameters.
    Simulate(SimulateArgs),
    /// Zero-probability curves as SVG plus CSV sidecars.
    Curves(CurvesArgs),
    /// Fit, then write the per-cell table and the binned zero diagnostic.
    Diagnose(DiagnoseArgs),
    /// Fit the seven reference models to the embedded Trajan data and check them.
    TrajanRepro(ReproArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ZiArg {
    None,
    A,
    B,
    C,
    D,
}

impl From<ZiArg> for ZiType {
    fn from(z: ZiArg) -> Self {
        match z {
            ZiArg::None => ZiType::None,
            ZiArg::A => ZiType::A,
            ZiArg::B => ZiType::B,
            ZiArg::C => ZiType::C,
            ZiArg::D => ZiType::D,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseArg {
    Poisson,
    Nbquad,
    Nblin,
}

impl From<BaseArg> for Family {
    fn from(b: BaseArg) -> Self {
        match b {
            BaseArg::Poisson => Family::Poisson,
            BaseArg::Nbquad => Family::NbQuad,
            BaseArg::Nblin => Family::NbLin,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long, conflicts_with = "trajan")]
    pub input: Option<PathBuf>,
    /// Use the embedded Trajan data (response `roots`, cell `photoperiod:bap`).
    #[arg(long)]
    pub trajan: bool,
    /// Response column.
    #[arg(long)]
    pub response: Option<String>,
    /// Cell column; `a:b` crosses two columns.
    #[arg(long)]
    pub cell: Option<String>,
    /// Columns to read as categorical even if numeric.
    #[arg(long, value_delimiter = ',')]
    pub categorical: Vec<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "none")]
    pub zi: ZiArg,
    #[arg(long, value_enum, default_value = "poisson")]
    pub base: BaseArg,
    /// Mean covariates. Defaults to one mean per cell when `--cell` is set,
    /// otherwise a constant. `cells` names the saturated cell design.
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,
    /// Covariates for gamma (constant by default). `cells` gives one gamma per cell.
    #[arg(long, value_delimiter = ',')]
    pub gamma_covariates: Vec<String>,
    /// Allow Type C zero deflation.
    #[arg(long)]
    pub deflation: bool,
    /// Fix the dispersion instead of estimating it.
    #[arg(long)]
    pub phi: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// Template covariates (optional for constant designs).
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub common: Common,
    /// Parameter vector in layout order: mean, gamma, log phi.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub params: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CurvesArgs {
    /// With data: curves at each model's fitted gamma or phi, with cell points.
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub common: Common,
    /// Without data: curves matched through this (pi0, pit0) point.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.2, 0.4])]
    pub point: Vec<f64>,
    #[arg(long, default_value_t = 512)]
    pub grid_points: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 4)]
    pub bins: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReproArgs {
    #[command(flatten)]
    pub common: Common,
}

/// Entry point for the binary.
pub fn main() -> i32 {
    run(std::env::args_os())
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let message = e.to_string();
            report_error("usage", message.trim());
            return 2;
        }
    };
    let echo: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli.command, &echo) {
        Ok(code) => code,
        Err(e) => {
            let (kind, code) = classify(&e);
            report_error(kind, &e.to_string());
            code
        }
    }
}

fn classify(e: &Error) -> (&'static str, i32) {
    match e {
        Error::InvalidParameter(_) | Error::Unsupported(_) | Error::DimensionMismatch { .. } => ("usage", 2),
        Error::NotConverged(_) | Error::SingularHessian(_) | Error::NonFinite(_) | Error::NoSolution(_) => {
            ("convergence", 4)
        }
        _ => ("data", 3),
    }
}

fn report_error(kind: &str, message: &str) {
    eprintln!("{}", json!({ "error": kind, "message": message }));
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn prepare_out(common: &Common, command: &Command, argv: &[String]) -> Result<()> {
    fs::create_dir_all(&common.out)?;
    let manifest = json!({
        "schema_version": SCHEMA_VERSION,
        "library": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "argv": argv,
        "config": command,
    });
    write_json(&common.out.join("manifest.json"), &manifest)
}

/// Loads the dataset named by `args`, or `None` when no source was given.
pub fn load_data(args: &DataArgs) -> Result<Option<CountDataset>> {
    if args.trajan {
        let mut d = trajan();
        if let Some(r) = &args.response {
            if r != &d.response {
                return Err(Error::InvalidParameter(format!("the Trajan response is '{}'", d.response)));
            }
        }
        if let Some(c) = &args.cell {
            d.categorical(c)?;
            d.cell = Some(c.clone());
        }
        return Ok(Some(d));
    }
    let Some(path) = &args.input else { return Ok(None) };
    let response = args
        .response
        .clone()
        .ok_or_else(|| Error::InvalidParameter("--response is required with --input".into()))?;
    let mut schema = CsvSchema::new(response).categorical(args.categorical.iter().cloned());
    if let Some(c) = &args.cell {
        schema = schema.cell(c.clone());
    }
    read_csv(path, &schema).map(Some)
}

fn require_data(args: &DataArgs) -> Result<CountDataset> {
    load_data(args)?.ok_or_else(|| Error::InvalidParameter("give --input <csv> or --trajan".into()))
}

fn design_from(covariates: &[String], data: Option<&CountDataset>, default_cells: bool) -> Result<DesignSpec> {
    let cell = data.and_then(|d| d.cell.clone());
    if covariates.is_empty() {
        return Ok(match (&cell, default_cells) {
            (Some(c), true) => DesignSpec::cells(c.clone()),
            _ => DesignSpec::constant(),
        });
    }
    if covariates.len() == 1 && covariates[0] == "cells" {
        let c = cell.ok_or_else(|| Error::InvalidParameter("'cells' needs --cell".into()))?;
        return Ok(DesignSpec::cells(c));
    }
    let mut spec = DesignSpec::constant();
    for name in covariates {
        let numeric = data.is_some_and(|d| d.numeric(name).is_ok());
        spec.terms.push(if numeric { Term::Numeric(name.clone()) } else { Term::Factor(name.clone()) });
    }
    Ok(spec)
}

pub fn model_spec(args: &ModelArgs, data: Option<&CountDataset>) -> Result<ModelSpec> {
    let mut spec = ModelSpec::new(args.base.into(), args.zi.into())
        .mean_design(design_from(&args.covariates, data, true)?)
        .gamma_design(design_from(&args.gamma_covariates, data, false)?)
        .deflation(args.deflation);
    if let Some(phi) = args.phi {
        spec = spec.phi(PhiMode::Fixed(phi));
    }
    Ok(spec)
}

/// The contents of `fit.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub model: String,
    pub n: usize,
    pub fit: FitResult,
    #[serde(default)]
    pub cells: Vec<CellFit>,
}

pub fn read_fit_report(path: impl AsRef<Path>) -> Result<FitReport> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Re-evaluates the stored parameters on `data` and returns
/// `|loglik - stored loglik|`.
pub fn check_round_trip(report: &FitReport, data: &CountDataset) -> Result<f64> {
    let ll = loglik(&report.fit.spec, data, &report.fit.params)?;
    Ok((ll - report.fit.loglik_value).abs())
}

fn fit_report(spec: &ModelSpec, data: &CountDataset, seed: u64) -> Result<FitReport> {
    let options = FitOptions { seed, ..FitOptions::default() };
    let fit = fit_mle(spec, data, &options)?;
    let cells = match &data.cell {
        Some(c) => fitted_vs_observed(&fit, data, c)?,
        None => Vec::new(),
    };
    Ok(FitReport { schema_version: SCHEMA_VERSION, model: spec.label(), n: data.len(), fit, cells })
}

fn execute(command: &Command, argv: &[String]) -> Result<i32> {
    match command {
        Command::Fit(a) => {
            let data = require_data(&a.data)?;
            let spec = model_spec(&a.model, Some(&data))?;
            prepare_out(&a.common, command, argv)?;
            let report = fit_report(&spec, &data, a.common.seed)?;
            write_json(&a.common.out.join("fit.json"), &report)?;
            println!("{}: loglik {:.6}, AIC {:.4}", report.model, report.fit.loglik_value, report.fit.aic);
            Ok(0)
        }
        Command::Simulate(a) => {
            let template = load_data(&a.data)?;
            let spec = model_spec(&a.model, template.as_ref())?;
            prepare_out(&a.common, command, argv)?;
            let mut plan = SimPlan::new(spec, a.params.clone(), a.n, a.common.seed);
            plan.template = template;
            let data = simulate(&plan)?;
            let file = fs::File::create(a.common.out.join("simulated.csv"))?;
            write_csv(&data, file)?;
            Ok(0)
        }
        Command::Curves(a) => {
            if a.point.len() != 2 {
                return Err(Error::InvalidParameter(format!("--point takes pi0,pit0; got {} values", a.point.len())));
            }
            prepare_out(&a.common, command, argv)?;
            let grid = GridSpec { points: a.grid_points, ..GridSpec::default() };
            let (tables, title) = match load_data(&a.data)? {
                Some(data) => (fitted_curves(&data, &grid, a.common.seed)?, "Fitted zero-probability curves"),
                None => (matched_curves(a.point[0], a.point[1], &grid)?, "Curves through a common point"),
            };
            write_curves(&a.common.out, &tables, title)?;
            Ok(0)
        }
        Command::Diagnose(a) => {
            let data = require_data(&a.data)?;
            let spec = model_spec(&a.model, Some(&data))?;
            prepare_out(&a.common, command, argv)?;
            let report = fit_report(&spec, &data, a.common.seed)?;
            let diag = empirical_zero_diagnostic(&report.fit, &data, a.bins)?;
            fs::write(a.common.out.join("zero_diagnostic.csv"), zero_diagnostic_csv(&diag))?;
            if !report.cells.is_empty() {
                fs::write(a.common.out.join("cells.csv"), cell_fit_csv(&report.cells))?;
            }
            write_json(
                &a.common.out.join("diagnose.json"),
                &json!({
                    "schema_version": SCHEMA_VERSION,
                    "model": report.model,
                    "loglik": report.fit.loglik_value,
                    "aic": report.fit.aic,
                    "zero_diagnostic": diag,
                    "excess_beyond_3sigma": diag.excess_beyond_3sigma(),
                    "cells": report.cells,
                }),
            )?;
            println!("max |z| over {} bins: {:.3}", a.bins, diag.max_abs_z);
            Ok(0)
        }
        Command::TrajanRepro(a) => {
            prepare_out(&a.common, command, argv)?;
            let report = trajan_repro(&a.common.out, a.common.seed)?;
            for c in &report.checks {
                println!("[{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(if report.checks.iter().all(|c| c.passed) { 0 } else { 1 })
        }
    }
}

fn write_curves(out: &Path, tables: &[CurveTable], title: &str) -> Result<()> {
    fs::write(out.join("curves.svg"), curves_svg(tables, title))?;
    for t in tables {
        let stem: String = t.label.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' }).collect();
        fs::write(out.join(format!("curve_{stem}.csv")), curve_csv(t))?;
    }
    Ok(())
}

/// Curves for Types A-D and both negative binomials passing through `(pi0, pit0)`.
pub fn matched_curves(pi0: f64, pit0: f64, grid: &GridSpec) -> Result<Vec<CurveTable>> {
    let mut tables = Vec::new();
    for zi in ZiType::EXPLICIT {
        let gamma = zi_gamma_from_point(zi, pi0, pit0)?;
        tables.push(zero_curve(format!("{} (gamma {gamma:.3})", zi.label()), CurveModel::Explicit(zi), gamma, grid, vec![(pi0, pit0)])?);
    }
    for family in [Family::NbLin, Family::NbQuad] {
        let phi = match_dispersion_through_point(family, pi0, pit0)?;
        tables.push(zero_curve(format!("{} (phi {phi:.2})", family.label()), CurveModel::Implicit(family), phi, grid, vec![(pi0, pit0)])?);
    }
    Ok(tables)
}

/// The seven reference specifications: one mean per cell, constant gamma.
pub fn reference_specs(cell: &str) -> Vec<ModelSpec> {
    let cells = DesignSpec::cells(cell);
    [
        (Family::Poisson, ZiType::None),
        (Family::NbQuad, ZiType::None),
        (Family::NbLin, ZiType::None),
        (Family::Poisson, ZiType::A),
        (Family::Poisson, ZiType::B),
        (Family::Poisson, ZiType::C),
        (Family::Poisson, ZiType::D),
    ]
    .into_iter()
    .map(|(b, z)| ModelSpec::new(b, z).mean_design(cells.clone()))
    .collect()
}

fn fit_all(specs: &[ModelSpec], data: &CountDataset, seed: u64) -> Result<Vec<FitResult>> {
    let options = FitOptions { seed, ..FitOptions::default() };
    std::thread::scope(|s| {
        let handles: Vec<_> = specs.iter().map(|spec| s.spawn(move || fit_mle(spec, data, &options))).collect();
        handles.into_iter().map(|h| h.join().expect("fit thread panicked")).collect()
    })
}

fn fitted_curves(data: &CountDataset, grid: &GridSpec, seed: u64) -> Result<Vec<CurveTable>> {
    let cell = data.cell.clone().ok_or_else(|| Error::InvalidParameter("fitted curves need --cell".into()))?;
    let specs: Vec<ModelSpec> = reference_specs(&cell).into_iter().filter(|s| s.zi != ZiType::None || s.base != Family::Poisson).collect();
    let fits = fit_all(&specs, data, seed)?;
    fits.iter().map(|f| fitted_curve(f, data, &cell, grid)).collect()
}

fn fitted_curve(fit: &FitResult, data: &CountDataset, cell: &str, grid: &GridSpec) -> Result<CurveTable> {
    let points = overlay_points(fit, data, cell)?;
    let (model, param) = match fit.spec.zi {
        ZiType::None => (CurveModel::Implicit(fit.spec.base), fit.phi().unwrap_or(0.0)),
        zi => (CurveModel::Explicit(zi), gamma_of(fit)),
    };
    zero_curve(fit.spec.label(), model, param, grid, points)
}

/// The first gamma coefficient on the gamma scale.
fn gamma_of(fit: &FitResult) -> f64 {
    let raw = fit.params[fit.param_names.iter().position(|n| n.starts_with("gamma:") || n.starts_with("theta:")).unwrap_or(0)];
    if fit.spec.inflation_only_c() {
        -raw.exp()
    } else {
        raw
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReproReport {
    pub schema_version: u32,
    pub n: usize,
    pub observed_p0: f64,
    pub models: Vec<ReproModel>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReproModel {
    pub model: String,
    pub loglik: f64,
    pub aic: f64,
    pub fitted_p0: f64,
    pub max_rel_mean_error: f64,
    pub cells: Vec<CellFit>,
}

/// Fits the reference models to the Trajan data, writes figures and tables
/// into `out`, and returns the report.
pub fn trajan_repro(out: &Path, seed: u64) -> Result<ReproReport> {
    let data = trajan();
    let specs = reference_specs(TRAJAN_CELL);
    let fits = fit_all(&specs, &data, seed)?;
    let mut models = Vec::new();
    for fit in &fits {
        let cells = fitted_vs_observed(fit, &data, TRAJAN_CELL)?;
        let max_rel = cells.iter().map(|c| ((c.fitted_mean - c.observed_mean) / c.observed_mean).abs()).fold(0.0, f64::max);
        models.push(ReproModel {
            model: fit.spec.label(),
            loglik: fit.loglik_value,
            aic: fit.aic,
            fitted_p0: fit.mean_fitted_zero(),
            max_rel_mean_error: max_rel,
            cells,
        });
    }
    let by = |label: &str| models.iter().find(|m| m.model == label).expect("reference model present");
    let mut checks = Vec::new();
    for label in ["Poisson", "NB-quad", "Type D"] {
        let m = by(label);
        checks.push(Check {
            name: format!("{label} reproduces cell means"),
            passed: m.max_rel_mean_error < 1e-6,
            detail: format!("max relative error {:.3e}", m.max_rel_mean_error),
        });
    }
    for label in ["NB-lin", "Type A", "Type B", "Type C"] {
        let m = by(label);
        checks.push(Check {
            name: format!("{label} does not reproduce cell means"),
            passed: m.max_rel_mean_error > 1e-4,
            detail: format!("max relative error {:.3e}", m.max_rel_mean_error),
        });
    }
    let a = by("Type A");
    checks.push(Check {
        name: "Type A overall fitted zero proportion is 0.237".into(),
        passed: (a.fitted_p0 - 0.237).abs() <= 0.002,
        detail: format!("{:.6}", a.fitted_p0),
    });

    let observed_p0 = data.zero_proportion();
    let mean_series: Vec<(String, Vec<(f64, f64)>)> =
        models.iter().map(|m| (m.model.clone(), m.cells.iter().map(|c| (c.observed_mean, c.fitted_mean)).collect())).collect();
    let zero_series: Vec<(String, Vec<(f64, f64)>)> =
        models.iter().map(|m| (m.model.clone(), m.cells.iter().map(|c| (c.observed_p0, c.fitted_p0)).collect())).collect();
    let upper = models.iter().flat_map(|m| m.cells.iter().flat_map(|c| [c.observed_mean, c.fitted_mean])).fold(0.0, f64::max).ceil();
    fs::write(out.join("means.svg"), scatter_svg(&mean_series, upper, "Fitted versus observed means", "observed mean", "fitted mean"))?;
    fs::write(out.join("zeros.svg"), scatter_svg(&zero_series, 1.0, "Fitted versus observed zero proportions", "observed", "fitted"))?;
    let grid = GridSpec::default();
    let curves = fits
        .iter()
        .filter(|f| !(f.spec.zi == ZiType::None && f.spec.base == Family::Poisson))
        .map(|f| fitted_curve(f, &data, TRAJAN_CELL, &grid))
        .collect::<Result<Vec<_>>>()?;
    fs::write(out.join("fitted_curves.svg"), curves_svg(&curves, "Fitted zero-probability curves"))?;
    fs::write(out.join("aic.csv"), aic_csv(&aic_table(&fits)))?;
    for m in &models {
        let stem: String = m.model.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' }).collect();
        fs::write(out.join(format!("cells_{stem}.csv")), cell_fit_csv(&m.cells))?;
    }
    let report = ReproReport { schema_version: SCHEMA_VERSION, n: data.len(), observed_p0, models, checks };
    write_json(&out.join("report.json"), &report)?;
    Ok(report)
}
