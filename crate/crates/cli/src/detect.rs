use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use edgealign::{project_model, save_ppm, Detection, PoseDeg};
use serde::Serialize;

use crate::{read_pgm, write_file, BackendArg, Prepared, SearchArgs, SearchRunner, EXIT_FOUND, EXIT_NO_DETECTION};

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long)]
    pub template: PathBuf,
    #[arg(long)]
    pub image: PathBuf,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long, value_enum, default_value_t = BackendArg::Serial)]
    pub backend: BackendArg,
    /// Threads for the parallel backend; 0 uses every hardware thread.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Result JSON path; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// PPM of the image with the placed model points in red.
    #[arg(long)]
    pub overlay: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub level: usize,
    pub x: f64,
    pub y: f64,
    pub theta_deg: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectResult {
    pub pose: PoseDeg,
    pub score: f64,
    pub n_model_points: usize,
    pub elapsed_ms: f64,
    pub backend: String,
    pub level_trace: Vec<TraceEntry>,
}

impl DetectResult {
    pub fn new(d: &Detection, n_model_points: usize, elapsed_ms: f64, backend: &str) -> Self {
        Self {
            pose: PoseDeg::from_pose(&d.pose),
            score: d.score,
            n_model_points,
            elapsed_ms,
            backend: backend.to_string(),
            level_trace: d
                .level_trace
                .iter()
                .map(|s| TraceEntry {
                    level: s.level,
                    x: s.pose.ux,
                    y: s.pose.uy,
                    theta_deg: s.pose.theta_deg(),
                    score: s.score,
                })
                .collect(),
        }
    }
}

pub fn run(args: &DetectArgs, runner: &SearchRunner) -> Result<i32, String> {
    let template = read_pgm(&args.template)?;
    let image = read_pgm(&args.image)?;
    let prepared = Prepared::new(&template, &image, &args.search)?;
    let backend = args.backend.with_workers(args.workers);

    let start = Instant::now();
    let outcome = runner(&prepared, backend).map_err(|e| e.to_string())?;
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;

    let found = outcome.is_detected();
    let best = outcome.best();
    let model = prepared.models.level(0);
    let result = DetectResult::new(best, model.len(), elapsed_ms, backend.name());
    let json = serde_json::to_string_pretty(&result).expect("result serializes");
    match &args.out {
        Some(path) => {
            write_file(path, json + "\n")?;
            let p = &result.pose;
            if found {
                println!("detected at ({:.2}, {:.2}, {:.2} deg), score {:.4}", p.x, p.y, p.theta_deg, result.score);
            } else {
                println!("no detection, best score {:.4}", result.score);
            }
        }
        None => println!("{json}"),
    }
    if let Some(path) = &args.overlay {
        write_file(path, save_ppm(&image, &project_model(model, &best.pose), [255, 0, 0]))?;
    }
    Ok(if found { EXIT_FOUND } else { EXIT_NO_DETECTION })
}
