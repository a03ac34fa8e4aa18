//! Command-line front end. [`dispatch`] parses arguments, runs one
//! subcommand and maps the outcome to an exit code: 0 on success, 1 on
//! usage or validation errors, 2 on runtime failures.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use cdsupport::christoffel::{fit, ChristoffelModel, FitOptions, Solver};
use cdsupport::geometry::{contour_polylines, write_contours_csv, BoundingBox, ShapeSpec};
use cdsupport::harness::{
    ingest_csv, run_concentration_study, run_convergence_study, run_outlier_from_config, run_synthetic_support,
    ConcentrationSettings, DegreeRule, ExperimentConfig, ExperimentKind, Generator, OutlierSettings, RunReport,
    ThresholdRule,
};
use cdsupport::oracles::{bound_sandwich_suite, inequality_suite};
use cdsupport::thresholding::{estimate_support, practical_degree};
use cdsupport::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "cdsupport", version, about = "Support estimation with the empirical Christoffel function")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a model to the rows of a CSV file.
    Fit(FitArgs),
    /// Print the Christoffel value of every row of a CSV file.
    Score(ScoreArgs),
    /// Threshold a model, rasterize the estimate and extract contours.
    Estimate(EstimateArgs),
    /// Run the closed-form bound and inequality checks.
    VerifyBounds(VerifyArgs),
    /// Divergences between a shape and its estimate across sample sizes.
    ConvergenceStudy(StudyArgs),
    /// Monte-Carlo coverage of the concentration bound on ball measures.
    ConcentrationStudy(ConcentrationArgs),
    /// Precision at half on a labeled dataset, against KDE and random scores.
    OutlierBench(OutlierArgs),
    /// Estimates, contours and divergences for a planar shape.
    SyntheticSupport(StudyArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Comma-separated points, one per row.
    #[arg(long)]
    input: PathBuf,
    /// The first row of the input is a header.
    #[arg(long)]
    header: bool,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Polynomial degree; defaults to ⌊2 n^{1/4}⌋.
    #[arg(long)]
    degree: Option<u32>,
    /// Fit on raw coordinates instead of whitened ones.
    #[arg(long)]
    no_standardize: bool,
    #[arg(long, value_enum, default_value_t = SolverArg::Qr)]
    solver: SolverArg,
    /// Where to write the model.
    #[arg(long)]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SolverArg {
    Qr,
    NormalEquations,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    input: InputArgs,
    /// Write a one-column CSV here instead of printing.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[arg(long)]
    model: PathBuf,
    /// A positive threshold, or `auto` for the smallest training score.
    #[arg(long, default_value = "auto")]
    gamma: String,
    /// `auto` for the training box grown by 50%, or `lo0,lo1,…:hi0,hi1,…`.
    #[arg(long = "box", default_value = "auto")]
    bbox: String,
    /// Cells per axis.
    #[arg(long, default_value_t = 256)]
    res: usize,
    /// Contour CSV (x, y, ring_id); planar models only.
    #[arg(long)]
    contours: Option<PathBuf>,
    /// Occupancy text raster.
    #[arg(long)]
    raster: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Write every report as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Flags shared by the experiment subcommands.
#[derive(Args, Debug)]
struct CommonArgs {
    /// TOML config; its keys override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; defaults to $CDSUPPORT_OUT_DIR, then the working directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
}

#[derive(Args, Debug)]
struct StudyArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum, default_value_t = ShapeArg::Disk)]
    shape: ShapeArg,
    /// Sample sizes.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u64>>,
    /// `practical`, `theoretical` or a fixed degree.
    #[arg(long, default_value = "practical")]
    degree: String,
    #[arg(long, value_enum, default_value_t = ThresholdArg::MinScore)]
    threshold: ThresholdArg,
    /// Decay exponent r of the sampling density.
    #[arg(long, default_value_t = 0.0)]
    decay: f64,
    /// Raster cells per axis.
    #[arg(long, default_value_t = 256)]
    resolution: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ShapeArg {
    Disk,
    Annulus,
    FourDisks,
    DiskWithHole,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ThresholdArg {
    MinScore,
    Theoretical,
}

#[derive(Args, Debug)]
struct ConcentrationArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value_t = 2)]
    p: usize,
    /// Integer exponent of the ball weight (1 − ‖x‖²)^r.
    #[arg(long, default_value_t = 0.0)]
    r: f64,
    #[arg(long, value_delimiter = ',', default_value = "2,3")]
    degrees: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "1000,10000")]
    n: Vec<u64>,
    #[arg(long, default_value_t = 200)]
    reps: usize,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
}

#[derive(Args, Debug)]
struct OutlierArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Labeled CSV with the label in the last column.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    header: bool,
    /// Built-in dataset used when no input is given.
    #[arg(long, value_enum)]
    generator: Option<GeneratorArg>,
    #[arg(long, value_delimiter = ',')]
    degrees: Option<Vec<u32>>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GeneratorArg {
    Separable,
    ThyroidSurrogate,
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Fit(a) => cmd_fit(a),
        Command::Score(a) => cmd_score(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::VerifyBounds(a) => cmd_verify(a),
        Command::ConvergenceStudy(a) => {
            let cfg = study_config(ExperimentKind::Convergence, &a)?;
            save_report(&run_convergence_study(&cfg)?, &cfg, "convergence")
        }
        Command::SyntheticSupport(a) => {
            let cfg = study_config(ExperimentKind::SyntheticSupport, &a)?;
            let out = run_synthetic_support(&cfg)?;
            let written = out.save(&output_dir(&cfg))?;
            print_written(&written);
            Ok(EXIT_OK)
        }
        Command::ConcentrationStudy(a) => {
            let mut cfg = ExperimentConfig::new(ExperimentKind::Concentration);
            cfg.n_grid = a.n;
            cfg.concentration = Some(ConcentrationSettings {
                p: a.p,
                r: a.r,
                degrees: a.degrees,
                reps: a.reps,
                alpha: a.alpha,
                grid_per_axis: 50,
                grid_radius: 0.95,
            });
            let cfg = finish_config(cfg, &a.common)?;
            save_report(&run_concentration_study(&cfg)?, &cfg, "concentration")
        }
        Command::OutlierBench(a) => {
            let mut cfg = ExperimentConfig::new(ExperimentKind::Outlier);
            cfg.input = a.input;
            cfg.seeds = (0..10).collect();
            let mut settings = OutlierSettings {
                generator: a.generator.map(|g| match g {
                    GeneratorArg::Separable => Generator::Separable,
                    GeneratorArg::ThyroidSurrogate => Generator::ThyroidSurrogate,
                }),
                has_header: a.header,
                ..OutlierSettings::default()
            };
            if let Some(d) = a.degrees {
                settings.degrees = d;
            }
            cfg.outlier = Some(settings);
            let cfg = finish_config(cfg, &a.common)?;
            save_report(&run_outlier_from_config(&cfg)?, &cfg, "outlier")
        }
    }
}

fn cmd_fit(a: FitArgs) -> Result<i32> {
    let data = ingest_csv(&a.input.input, a.input.header)?;
    let degree = match a.degree {
        Some(d) => d,
        None => practical_degree(data.len() as u64)?,
    };
    let options = FitOptions {
        standardize: !a.no_standardize,
        solver: match a.solver {
            SolverArg::Qr => Solver::Qr,
            SolverArg::NormalEquations => Solver::NormalEquations,
        },
        ..FitOptions::default()
    };
    let model = fit(data.points(), degree, &options)?;
    model.save(&a.out)?;
    eprintln!(
        "fitted degree {} on {} points in dimension {} (basis size {})",
        degree,
        data.len(),
        model.dim(),
        model.basis().len()
    );
    for w in model.warnings() {
        eprintln!("warning: {w:?}");
    }
    Ok(EXIT_OK)
}

fn cmd_score(a: ScoreArgs) -> Result<i32> {
    let model = ChristoffelModel::load(&a.model)?;
    let data = ingest_csv(&a.input.input, a.input.header)?;
    let scores = model.scores(data.points())?;
    let mut text = String::new();
    if a.out.is_some() {
        text.push_str("christoffel\n");
    }
    for s in scores {
        text.push_str(&format!("{s:e}\n"));
    }
    match a.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn cmd_estimate(a: EstimateArgs) -> Result<i32> {
    let model = ChristoffelModel::load(&a.model)?;
    let training = model.training_summary();
    let gamma = if a.gamma == "auto" {
        training.ok_or_else(|| Error::InvalidArgument("model has no training summary; pass --gamma".into()))?.min_score
    } else {
        parse_f64(&a.gamma, "--gamma")?
    };
    let bbox = if a.bbox == "auto" {
        let t = training.ok_or_else(|| Error::InvalidArgument("model has no training summary; pass --box".into()))?;
        BoundingBox::new(t.lower.clone(), t.upper.clone())?.inflate(0.5)
    } else {
        parse_box(&a.bbox)?
    };
    if a.contours.is_some() && model.dim() != 2 {
        return Err(Error::UnsupportedDimension { op: "contours", supported: 2, p: model.dim() });
    }
    let raster = estimate_support(&model, gamma)?.rasterize(&bbox, &vec![a.res; model.dim()])?;
    let mut rings = 0;
    if let Some(path) = &a.contours {
        let r = contour_polylines(&raster)?;
        rings = r.len();
        write_contours_csv(&r, BufWriter::new(fs::File::create(path)?))?;
    }
    if let Some(path) = &a.raster {
        raster.write_text(BufWriter::new(fs::File::create(path)?))?;
    }
    let summary = serde_json::json!({
        "gamma": gamma,
        "box_lower": bbox.lower(),
        "box_upper": bbox.upper(),
        "resolution": a.res,
        "occupied_cells": raster.count(),
        "measure": raster.measure(),
        "rings": rings,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(EXIT_OK)
}

fn cmd_verify(a: VerifyArgs) -> Result<i32> {
    let mut reports = bound_sandwich_suite()?;
    reports.extend(inequality_suite());
    let violations: Vec<_> = reports.iter().filter(|r| !r.satisfied).collect();
    println!("{} checks, {} violated", reports.len(), violations.len());
    for v in &violations {
        println!("violated: {} bound={:e} measured={:e} inputs={:?}", v.name, v.bound, v.measured, v.inputs);
    }
    if let Some(path) = a.out {
        fs::write(path, serde_json::to_string_pretty(&reports)?)?;
    }
    Ok(if violations.is_empty() { EXIT_OK } else { EXIT_RUNTIME })
}

fn study_config(kind: ExperimentKind, a: &StudyArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(kind);
    cfg.shape = Some(match a.shape {
        ShapeArg::Disk => ShapeSpec::unit_disk(),
        ShapeArg::Annulus => ShapeSpec::planar_annulus(),
        ShapeArg::FourDisks => ShapeSpec::four_disks(),
        ShapeArg::DiskWithHole => ShapeSpec::disk_with_hole(),
    });
    cfg.n_grid = a.n.clone().unwrap_or_else(|| match kind {
        ExperimentKind::Convergence => vec![500, 2000, 8000, 32000],
        _ => vec![32000],
    });
    cfg.degree = match a.degree.as_str() {
        "practical" => DegreeRule::Practical,
        "theoretical" => DegreeRule::Theoretical { params: None, eps: 0.5, alpha: 0.1 },
        d => DegreeRule::Fixed {
            degree: d.parse().map_err(|_| Error::InvalidArgument(format!("--degree: cannot parse {d:?}")))?,
        },
    };
    cfg.threshold = match a.threshold {
        ThresholdArg::MinScore => ThresholdRule::MinScore,
        ThresholdArg::Theoretical => ThresholdRule::Theoretical,
    };
    cfg.decay = a.decay;
    cfg.resolution = a.resolution;
    finish_config(cfg, &a.common)
}

/// Applies the shared flags, then the config file on top of them.
fn finish_config(mut cfg: ExperimentConfig, common: &CommonArgs) -> Result<ExperimentConfig> {
    if let Some(seeds) = &common.seeds {
        cfg.seeds = seeds.clone();
    }
    if let Some(dir) = &common.out_dir {
        cfg.output_dir = Some(dir.clone());
    }
    if let Some(path) = &common.config {
        cfg = cfg.with_overrides(&fs::read_to_string(path)?)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.resolved_output_dir().unwrap_or_else(|| PathBuf::from("."))
}

fn save_report(report: &RunReport, cfg: &ExperimentConfig, stem: &str) -> Result<i32> {
    let written = report.save(&output_dir(cfg), stem)?;
    print_written(&written);
    Ok(EXIT_OK)
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn parse_f64(s: &str, flag: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::InvalidArgument(format!("{flag}: cannot parse {s:?} as a number")))
}

fn parse_box(s: &str) -> Result<BoundingBox> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| Error::InvalidArgument("--box must look like lo0,lo1:hi0,hi1".into()))?;
    let parse = |part: &str| part.split(',').map(|v| parse_f64(v, "--box")).collect::<Result<Vec<_>>>();
    BoundingBox::new(parse(lo)?, parse(hi)?)
}
