//! The `rgb2msi` command line.
//!
//! Exit codes: 0 success, 1 usage or parameter error, 2 data or format
//! error, 3 numeric failure. Tables go to stdout (or `--report`), logs to
//! stderr. Any subcommand accepts `--config FILE` holding `key = value`
//! lines named after its long flags; flags given on the command line win.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::eval::{aggregate, CubeScore};
use crate::forward::{build_mixing_matrix, simulate_camera, MixingMatrix};
use crate::inference::{benchmark, predict_parallel, BenchOptions, BENCH_HEADER};
use crate::network::{decode_model, model_dtype, save_model, ArchitectureSpec, NetworkParams, Real};
use crate::oximetry::{so2_map_checked, BaselineMode, ChromophoreSet};
use crate::phantom::{phantom_suite, PhantomClass, PhantomConfig};
use crate::spectral::{CameraResponse, RgbImage, ScalarMap, SpectralCube, WavelengthGrid};
use crate::train::{
    assemble_dataset, group_by_class, load_dataset, run_crossval, run_interclass, train, TrainConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parameter(_) | Error::Spec(_) => EXIT_USAGE,
        Error::Io { .. }
        | Error::Stream(_)
        | Error::Format(_)
        | Error::ModelFormat(_)
        | Error::OutOfSupport { .. }
        | Error::Bounds { .. }
        | Error::Dimension(_)
        | Error::Sampling { .. } => EXIT_DATA,
        Error::Divergence { .. } | Error::DegenerateData(_) | Error::DegenerateResponse { .. } | Error::Basis(_) => {
            EXIT_NUMERIC
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rgb2msi", version, about = "Recover multispectral cubes from RGB images")]
pub struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Only log errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    /// File of `key = value` lines used as default flag values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic phantom dataset with ground-truth saturation maps.
    Phantom(PhantomArgs),
    /// Render a spectral cube to RGB through the camera model.
    SynthRgb(SynthArgs),
    /// Train a network on every cube of a dataset directory.
    Train(TrainArgs),
    /// Predict a spectral cube from an RGB image.
    Predict(PredictArgs),
    /// Per-band PSNR of predicted cubes against ground truth.
    Eval(EvalArgs),
    /// Cube-level k-fold cross-validation against an affine baseline.
    Crossval(CrossvalArgs),
    /// Train on each class, test on every class.
    Interclass(InterclassArgs),
    /// Per-pixel oxygen saturation map of a spectral cube.
    So2(So2Args),
    /// Time full-frame prediction.
    Bench(BenchArgs),
}

impl Command {
    const NAMES: [&'static str; 9] = [
        "phantom",
        "synth-rgb",
        "train",
        "predict",
        "eval",
        "crossval",
        "interclass",
        "so2",
        "bench",
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    F32,
    F64,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct PhantomArgs {
    /// Output dataset directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Class as `name:count:s_min:s_max` (repeatable).
    #[arg(long = "class", value_parser = parse_class, default_value = "phantom:30:0:1")]
    pub classes: Vec<PhantomClass>,
    #[arg(long, default_value_t = 96)]
    pub width: usize,
    #[arg(long, default_value_t = 96)]
    pub height: usize,
    /// Lattice spacing of the random fields, in pixels.
    #[arg(long, default_value_t = 16.0)]
    pub smoothness: f64,
    #[arg(long, default_value_t = PhantomConfig::default().v_range.0)]
    pub v_min: f64,
    #[arg(long, default_value_t = PhantomConfig::default().v_range.1)]
    pub v_max: f64,
    #[arg(long, default_value_t = PhantomConfig::default().c0)]
    pub c0: f64,
    #[arg(long, default_value_t = PhantomConfig::default().c1)]
    pub c1: f64,
    /// Extinction table CSV (`wavelength_nm,eps_hbo2,eps_hb`); built-in fixture otherwise.
    #[arg(long)]
    pub chromophores: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn parse_class(s: &str) -> std::result::Result<PhantomClass, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [name, count, lo, hi] = parts[..] else {
        return Err(format!("expected name:count:s_min:s_max, got {s:?}"));
    };
    let num = |v: &str| v.parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok(PhantomClass {
        name: name.to_string(),
        cubes: count.parse().map_err(|e| format!("{count:?}: {e}"))?,
        s_range: (num(lo)?, num(hi)?),
    })
}

#[derive(Debug, Args)]
pub struct CameraArgs {
    /// Camera response CSV (`wavelength_nm,r,g,b`); built-in Gaussian curves otherwise.
    #[arg(long)]
    pub response: Option<PathBuf>,
    /// Keep raw transmission weights instead of normalizing each channel to sum one.
    #[arg(long)]
    pub no_normalize: bool,
}

impl CameraArgs {
    fn mixing(&self, grid: &WavelengthGrid) -> Result<MixingMatrix> {
        let response = match &self.response {
            Some(p) => CameraResponse::from_csv(p)?,
            None => CameraResponse::default(),
        };
        build_mixing_matrix(&response, grid, !self.no_normalize)
    }
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct SynthArgs {
    /// Input spectral cube.
    #[arg(long)]
    pub cube: PathBuf,
    /// Output RGB image (`.mcube`, 3 bands).
    #[arg(long)]
    pub out: PathBuf,
    /// Also write an 8-bit PPM preview.
    #[arg(long)]
    pub ppm: Option<PathBuf>,
    #[command(flatten)]
    pub camera: CameraArgs,
    /// Gaussian sensor noise standard deviation.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Quantize to this many bits per channel.
    #[arg(long)]
    pub bits: Option<u32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TrainOpts {
    /// Dataset root laid out as `<root>/<class>/<name>.mcube`.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub camera: CameraArgs,
    #[arg(long, value_enum, default_value = "f32")]
    pub precision: Precision,
    /// Feature maps per hidden layer.
    #[arg(long, default_value_t = 32)]
    pub features: usize,
    #[arg(long, default_value_t = TrainConfig::default().epochs)]
    pub epochs: usize,
    #[arg(long, default_value_t = TrainConfig::default().batch_size)]
    pub batch_size: usize,
    #[arg(long, default_value_t = TrainConfig::default().learning_rate)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = TrainConfig::default().beta1)]
    pub beta1: f64,
    #[arg(long, default_value_t = TrainConfig::default().beta2)]
    pub beta2: f64,
    #[arg(long, default_value_t = TrainConfig::default().epsilon)]
    pub epsilon: f64,
    /// Pixels drawn per cube; every unmasked pixel when absent.
    #[arg(long)]
    pub samples_per_cube: Option<usize>,
    #[arg(long, default_value_t = TrainConfig::default().specular_mask_threshold)]
    pub mask_threshold: f64,
    /// Standard deviation of Gaussian noise added to training inputs.
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl TrainOpts {
    fn config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            epochs: self.epochs,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            seed: self.seed,
            specular_mask_threshold: self.mask_threshold,
            samples_per_cube: self.samples_per_cube,
            input_jitter: self.jitter,
            workers: self.workers,
        }
    }

    fn spec(&self) -> Result<ArchitectureSpec> {
        if self.features == 0 {
            return Err(Error::param("features must be >= 1"));
        }
        Ok(ArchitectureSpec::with_width(self.features))
    }
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct TrainArgs {
    #[command(flatten)]
    pub opts: TrainOpts,
    /// Output model file.
    #[arg(long)]
    pub out: PathBuf,
    /// Write the `epoch,loss` table here instead of stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// RGB image (`.mcube`, 3 bands).
    #[arg(long)]
    pub rgb: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct EvalArgs {
    /// Predicted cube (repeatable, paired in order with `--truth`).
    #[arg(long, required = true)]
    pub pred: Vec<PathBuf>,
    /// Ground-truth cube (repeatable).
    #[arg(long, required = true)]
    pub truth: Vec<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub peak: f64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct CrossvalArgs {
    #[command(flatten)]
    pub opts: TrainOpts,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Network report destination; stdout otherwise.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also write the affine baseline's report.
    #[arg(long)]
    pub baseline_report: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct InterclassArgs {
    #[command(flatten)]
    pub opts: TrainOpts,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct So2Args {
    /// Spectral cube (ground truth or predicted).
    #[arg(long)]
    pub cube: PathBuf,
    /// Output saturation map; undefined pixels are listed in `<out>.mask.pgm`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub chromophores: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "const")]
    pub baseline: BaselineMode,
    /// Ground-truth saturation map to score against.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct BenchArgs {
    /// Model to time; a seeded random default network otherwise.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value_t = 192)]
    pub height: usize,
    #[arg(long, default_value_t = 10)]
    pub iters: usize,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    init_logging(&cli);
    match dispatch(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn init_logging(cli: &Cli) {
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        (false, 2) => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    // ignores the environment on purpose: logged commands must be reproducible
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .try_init();
}

/// Replaces `--config FILE` by the flags it lists, placed right after the
/// subcommand so that flags given explicitly override them.
fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut out = Vec::with_capacity(argv.len());
    let mut config = None;
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            let path = it.next().ok_or_else(|| Error::param("--config needs a file"))?;
            config = Some(PathBuf::from(path));
        } else if let Some(p) = a.to_str().and_then(|s| s.strip_prefix("--config=")) {
            config = Some(PathBuf::from(p));
        } else {
            out.push(a);
        }
    }
    let Some(path) = config else {
        return Ok(out);
    };
    let flags = read_config(&path)?;
    let at = out
        .iter()
        .position(|a| a.to_str().is_some_and(|s| Command::NAMES.contains(&s)))
        .ok_or_else(|| Error::param("--config needs a subcommand"))?;
    out.splice(at + 1..at + 1, flags);
    Ok(out)
}

/// Reads `key = value` lines (`#` starts a comment) as long flags.
/// `key = true` becomes a bare switch and `key = false` is dropped.
pub fn read_config(path: &Path) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut flags = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::param(format!("{}:{}: expected key = value", path.display(), n + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key == "config" {
            return Err(Error::param(format!("{}:{}: invalid key", path.display(), n + 1)));
        }
        match value {
            "true" => flags.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                flags.push(format!("--{key}").into());
                flags.push(value.into());
            }
        }
    }
    Ok(flags)
}

pub fn dispatch(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Phantom(a) => cmd_phantom(a),
        Command::SynthRgb(a) => cmd_synth(a),
        Command::Train(a) => match a.opts.precision {
            Precision::F32 => cmd_train::<f32>(a),
            Precision::F64 => cmd_train::<f64>(a),
        },
        Command::Predict(a) => cmd_predict(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Crossval(a) => match a.opts.precision {
            Precision::F32 => cmd_crossval::<f32>(a),
            Precision::F64 => cmd_crossval::<f64>(a),
        },
        Command::Interclass(a) => match a.opts.precision {
            Precision::F32 => cmd_interclass::<f32>(a),
            Precision::F64 => cmd_interclass::<f64>(a),
        },
        Command::So2(a) => cmd_so2(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

/// Writes `text` to `path`, or to stdout when no path is given.
fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn chromophores(path: Option<&Path>, grid: &WavelengthGrid) -> Result<ChromophoreSet> {
    match path {
        Some(p) => ChromophoreSet::from_csv(p, grid),
        None => ChromophoreSet::fixture(grid),
    }
}

fn cmd_phantom(a: &PhantomArgs) -> Result<()> {
    let base = PhantomConfig {
        width: a.width,
        height: a.height,
        v_range: (a.v_min, a.v_max),
        c0: a.c0,
        c1: a.c1,
        smoothness: a.smoothness,
        ..Default::default()
    };
    let chrom = chromophores(a.chromophores.as_deref(), &WavelengthGrid::msi_default())?;
    let manifest = phantom_suite(&a.out, &a.classes, &base, &chrom, a.seed)?;
    log::info!("wrote {} cubes to {}", manifest.entries.len(), a.out.display());
    Ok(())
}

fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let cube = SpectralCube::load(&a.cube)?;
    let mix = a.camera.mixing(cube.grid())?;
    let rgb = simulate_camera(&cube, &mix, a.noise, a.bits, a.seed)?;
    rgb.save(&a.out)?;
    if let Some(p) = &a.ppm {
        rgb.save_ppm(p)?;
    }
    Ok(())
}

/// Every cube of a dataset plus the mixing matrix on their shared grid.
fn load_training_cubes(opts: &TrainOpts) -> Result<(Vec<(String, Vec<SpectralCube>)>, MixingMatrix)> {
    let classes = group_by_class(load_dataset(&opts.data)?);
    let grid = classes[0].1[0].grid().clone();
    if let Some((name, _)) = classes.iter().find(|(_, c)| c.iter().any(|c| c.grid() != &grid)) {
        return Err(Error::dim(format!("class {name} has cubes on a different wavelength grid")));
    }
    let mix = opts.camera.mixing(&grid)?;
    Ok((classes, mix))
}

fn cmd_train<T: Real>(a: &TrainArgs) -> Result<()> {
    let cfg = a.opts.config();
    cfg.validate()?;
    let spec = a.opts.spec()?;
    let (classes, mix) = load_training_cubes(&a.opts)?;
    let cubes: Vec<&SpectralCube> = classes.iter().flat_map(|(_, c)| c).collect();
    let data = assemble_dataset(&cubes, &mix, cfg.samples_per_cube, cfg.specular_mask_threshold, cfg.seed)?;
    log::info!("training on {} pixels from {} cubes", data.len(), cubes.len());
    let trained = train::<T>(&data, spec, &cfg)?;
    let params = trained.params.with_grid(mix.grid().clone())?;
    save_model(&params, &a.out)?;
    let mut table = String::from("epoch,loss\n");
    for (e, l) in trained.loss_history.iter().enumerate() {
        table.push_str(&format!("{},{l:.9e}\n", e + 1));
    }
    emit(&table, a.report.as_deref())
}

fn predict_with<T: Real>(bytes: &[u8], rgb: &RgbImage, workers: usize) -> Result<SpectralCube> {
    let params: NetworkParams<T> = decode_model(bytes)?;
    predict_parallel(&params, rgb, workers)
}

fn read_model(path: &Path) -> Result<(Vec<u8>, String)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let dtype = model_dtype(&bytes)?;
    Ok((bytes, dtype))
}

fn cmd_predict(a: &PredictArgs) -> Result<()> {
    let (bytes, dtype) = read_model(&a.model)?;
    let rgb = RgbImage::load(&a.rgb)?;
    let cube = match dtype.as_str() {
        "f64le" => predict_with::<f64>(&bytes, &rgb, a.workers)?,
        _ => predict_with::<f32>(&bytes, &rgb, a.workers)?,
    };
    cube.save(&a.out)
}

fn cmd_eval(a: &EvalArgs) -> Result<()> {
    if a.pred.len() != a.truth.len() {
        return Err(Error::param(format!(
            "{} predictions but {} ground-truth cubes",
            a.pred.len(),
            a.truth.len()
        )));
    }
    if !(a.peak > 0.0 && a.peak.is_finite()) {
        return Err(Error::param("peak must be positive"));
    }
    let mut scores = Vec::with_capacity(a.pred.len());
    let mut grid = None;
    for (p, t) in a.pred.iter().zip(&a.truth) {
        let truth = SpectralCube::load(t)?;
        scores.push(CubeScore::compute(&SpectralCube::load(p)?, &truth, a.peak)?);
        grid.get_or_insert_with(|| truth.grid().clone());
    }
    let report = aggregate(&scores, &grid.expect("at least one pair"))?;
    emit(&report.to_csv(), a.report.as_deref())
}

fn cmd_crossval<T: Real>(a: &CrossvalArgs) -> Result<()> {
    let cfg = a.opts.config();
    let spec = a.opts.spec()?;
    let (classes, mix) = load_training_cubes(&a.opts)?;
    let cubes: Vec<SpectralCube> = classes.into_iter().flat_map(|(_, c)| c).collect();
    let out = run_crossval::<T>(&cubes, &mix, &spec, &cfg, a.folds)?;
    log::info!(
        "network {:.3} dB, affine baseline {:.3} dB",
        out.network.overall_mean_db,
        out.baseline.overall_mean_db
    );
    if let Some(p) = &a.baseline_report {
        out.baseline.write_csv(p)?;
    }
    emit(&out.network.to_csv(), a.report.as_deref())
}

fn cmd_interclass<T: Real>(a: &InterclassArgs) -> Result<()> {
    let cfg = a.opts.config();
    let spec = a.opts.spec()?;
    let (classes, mix) = load_training_cubes(&a.opts)?;
    let m = run_interclass::<T>(&classes, &mix, &spec, &cfg)?;
    emit(&m.to_csv(), a.report.as_deref())
}

fn cmd_so2(a: &So2Args) -> Result<()> {
    let cube = SpectralCube::load(&a.cube)?;
    let chrom = chromophores(a.chromophores.as_deref(), cube.grid())?;
    let map = so2_map_checked(&cube, &chrom, a.baseline)?;
    map.save(&a.out)?;
    let (mean, max) = match &a.truth {
        Some(t) => {
            let truth = ScalarMap::load(t)?;
            (
                format!("{:.9}", map.mean_abs_error(&truth)?),
                format!("{:.9}", map.max_abs_error(&truth)?),
            )
        }
        None => (String::new(), String::new()),
    };
    let text = format!(
        "defined,pixels,mean_abs_error,max_abs_error\n{},{},{mean},{max}\n",
        map.defined_count(),
        cube.pixels()
    );
    emit(&text, None)
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let opts = BenchOptions {
        width: a.width,
        height: a.height,
        iterations: a.iters,
        workers: a.workers,
        seed: a.seed,
    };
    let report = match &a.model {
        Some(p) => {
            let (bytes, dtype) = read_model(p)?;
            if dtype == "f64le" {
                benchmark(&decode_model::<f64>(&bytes)?, &opts)?
            } else {
                benchmark(&decode_model::<f32>(&bytes)?, &opts)?
            }
        }
        None => benchmark(&NetworkParams::<f32>::init(ArchitectureSpec::default(), a.seed)?, &opts)?,
    };
    log::info!(
        "{:.2} ms per frame ({:.1} FPS); reference GPU figure ~90 ms (~11 FPS)",
        report.mean_ms,
        report.fps
    );
    emit(&format!("{BENCH_HEADER}\n{}\n", report.csv_row()), None)
}
