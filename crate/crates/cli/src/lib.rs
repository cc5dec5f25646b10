//! Command-line front end: `detect`, `synth`, `bench` and `suite`.
//!
//! Exit codes: 0 detection, 1 error, 2 no detection, 3 backend mismatch.

mod bench;
mod detect;
mod suite;
mod synth;

use std::ffi::OsString;
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use edgealign::{
    build_pyramid, coarse_to_fine, load_pgm, Backend, EdgeThresholds, Error as CoreError, Image, PoseGrid, Pyramid,
    ScoreParams, SearchConfig, SearchOutcome, TemplatePyramid,
};

pub use bench::BenchRow;
pub use detect::{DetectResult, TraceEntry};
pub use suite::standard_suite;

pub const EXIT_FOUND: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NO_DETECTION: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "edgealign", version, about = "Edge-orientation template matching")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find the template's pose in an image.
    Detect(detect::DetectArgs),
    /// Render a synthetic scene and its ground truth from a JSON spec.
    Synth(synth::SynthArgs),
    /// Time serial against parallel search over a suite of fixtures.
    Bench(bench::BenchArgs),
    /// Write the standard 812x617 benchmark suite.
    Suite(suite::SuiteArgs),
}

/// Pose lattice, pyramid and scoring options shared by `detect` and `bench`.
#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 3.0)]
    pub step_x: f64,
    #[arg(long, default_value_t = 3.0)]
    pub step_y: f64,
    #[arg(long, default_value_t = 3.0)]
    pub step_theta_deg: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta_min_deg: f64,
    #[arg(long, default_value_t = 90.0, allow_negative_numbers = true)]
    pub theta_max_deg: f64,
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    #[arg(long, default_value_t = 3)]
    pub neighborhood: usize,
    /// Low hysteresis threshold; defaults to half of `--high`.
    #[arg(long)]
    pub low: Option<f64>,
    /// High hysteresis threshold; defaults to 0.3 of the strongest template
    /// gradient at each pyramid level.
    #[arg(long)]
    pub high: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub min_score: f64,
}

impl Default for SearchArgs {
    fn default() -> Self {
        Self {
            step_x: 3.0,
            step_y: 3.0,
            step_theta_deg: 3.0,
            theta_min_deg: 0.0,
            theta_max_deg: 90.0,
            levels: 3,
            neighborhood: 3,
            low: None,
            high: None,
            min_score: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Serial,
    Parallel,
}

impl BackendArg {
    pub fn with_workers(self, workers: usize) -> Backend {
        match self {
            BackendArg::Serial => Backend::serial(),
            BackendArg::Parallel => Backend::parallel(workers),
        }
    }
}

/// Everything a search needs, built outside the timed region.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub models: TemplatePyramid,
    pub working: Pyramid,
    pub config: SearchConfig,
}

impl Prepared {
    pub fn new(template: &Image, scene: &Image, args: &SearchArgs) -> Result<Self, String> {
        let thresholds = match (args.low, args.high) {
            (Some(_), None) => return Err("--low requires --high".into()),
            (low, Some(high)) => Some(EdgeThresholds::new(low.unwrap_or(0.5 * high), high).map_err(|e| e.to_string())?),
            (None, None) => None,
        };
        let template_pyr = build_pyramid(template, args.levels).map_err(|e| format!("template: {e}"))?;
        let models = TemplatePyramid::extract(&template_pyr, |_, field| match thresholds {
            Some(t) => Ok(t),
            None => EdgeThresholds::relative(field.max_magnitude(), 0.3),
        })
        .map_err(|e| format!("template: {e}"))?;
        let working = build_pyramid(scene, args.levels).map_err(|e| format!("image: {e}"))?;

        // translations cover the image itself
        let grid = PoseGrid::from_degrees(
            (0.0, (scene.width() - 1) as f64, args.step_x),
            (0.0, (scene.height() - 1) as f64, args.step_y),
            (args.theta_min_deg, args.theta_max_deg, args.step_theta_deg),
        )
        .map_err(|e| e.to_string())?;
        let mut config = SearchConfig::new(grid);
        config.num_levels = args.levels;
        config.min_score = args.min_score;
        config.score_params = ScoreParams::with_neighborhood(args.neighborhood).map_err(|e| e.to_string())?;
        Ok(Self { models, working, config })
    }
}

/// The search being timed. Swappable so the bench gate can be exercised
/// with a deliberately broken backend.
pub type SearchRunner = dyn Fn(&Prepared, Backend) -> Result<SearchOutcome, CoreError> + Sync;

pub fn default_runner(p: &Prepared, backend: Backend) -> Result<SearchOutcome, CoreError> {
    coarse_to_fine(&p.models, &p.working, &p.config, backend)
}

pub fn read_pgm(path: &Path) -> Result<Image, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    load_pgm(&bytes).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), String> {
    std::fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &default_runner)
}

pub fn run_with<I, T>(args: I, runner: &SearchRunner) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_FOUND };
        }
    };
    let result = match &cli.command {
        Command::Detect(a) => detect::run(a, runner),
        Command::Synth(a) => synth::run(a),
        Command::Bench(a) => bench::run(a, runner),
        Command::Suite(a) => suite::run(a),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_ERROR
        }
    }
}
