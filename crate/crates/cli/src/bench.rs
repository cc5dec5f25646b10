use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use edgealign::{Backend, Image, Pose};
use serde::Serialize;

use crate::{read_pgm, Prepared, SearchArgs, SearchRunner, EXIT_FOUND, EXIT_MISMATCH};

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of `NAME_template.pgm` / `NAME_scene.pgm` pairs.
    #[arg(long)]
    pub suite: PathBuf,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub reps: u32,
    #[arg(long, default_value_t = 1)]
    pub warmup: u32,
    /// Threads for the parallel backend; 0 uses every hardware thread.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub sample: String,
    pub backend: String,
    pub workers: usize,
    pub run: u32,
    pub elapsed_ms: f64,
}

struct Sample {
    name: String,
    template: Image,
    scene: Image,
}

fn load_suite(dir: &Path) -> Result<Vec<Sample>, String> {
    let entries = std::fs::read_dir(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().to_str()?.strip_suffix("_template.pgm").map(str::to_owned))
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|name| {
            Ok(Sample {
                template: read_pgm(&dir.join(format!("{name}_template.pgm")))?,
                scene: read_pgm(&dir.join(format!("{name}_scene.pgm")))?,
                name,
            })
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Times `backend` on one sample; returns the rows and the pose of the last run.
fn time_backend(
    sample: &Sample,
    prepared: &Prepared,
    backend: Backend,
    args: &BenchArgs,
    runner: &SearchRunner,
) -> Result<(Vec<BenchRow>, Pose), String> {
    let search = || runner(prepared, backend).map_err(|e| format!("{}: {e}", sample.name));
    for _ in 0..args.warmup {
        search()?;
    }
    let mut rows = Vec::new();
    let mut pose = None;
    for run in 0..args.reps {
        let start = Instant::now();
        let outcome = search()?;
        let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
        pose = Some(outcome.best().pose);
        rows.push(BenchRow {
            sample: sample.name.clone(),
            backend: backend.name().to_string(),
            workers: backend.effective_workers(),
            run,
            elapsed_ms,
        });
    }
    Ok((rows, pose.expect("reps >= 1")))
}

pub fn run(args: &BenchArgs, runner: &SearchRunner) -> Result<i32, String> {
    let samples = load_suite(&args.suite)?;
    if samples.is_empty() {
        return Err(format!("{}: no *_template.pgm fixtures", args.suite.display()));
    }
    let mut writer = csv::Writer::from_path(&args.out).map_err(|e| format!("{}: {e}", args.out.display()))?;
    let mut mismatched = Vec::new();
    for sample in &samples {
        let prepared = Prepared::new(&sample.template, &sample.scene, &args.search)
            .map_err(|e| format!("{}: {e}", sample.name))?;
        let (serial_rows, serial_pose) = time_backend(sample, &prepared, Backend::serial(), args, runner)?;
        let parallel = Backend::parallel(args.workers);
        let (parallel_rows, parallel_pose) = time_backend(sample, &prepared, parallel, args, runner)?;
        for row in serial_rows.iter().chain(&parallel_rows) {
            writer.serialize(row).map_err(|e| e.to_string())?;
        }
        if serial_pose != parallel_pose {
            println!("{}: backends disagree, serial {:?} vs parallel {:?}", sample.name, serial_pose, parallel_pose);
            mismatched.push(sample.name.clone());
            continue;
        }
        let ms = |rows: &[BenchRow]| median(rows.iter().map(|r| r.elapsed_ms).collect());
        let (s, p) = (ms(&serial_rows), ms(&parallel_rows));
        println!(
            "{}: serial {s:.1} ms, parallel {p:.1} ms ({} workers), speedup {:.2}x",
            sample.name,
            parallel.effective_workers(),
            s / p
        );
    }
    writer.flush().map_err(|e| format!("{}: {e}", args.out.display()))?;
    if mismatched.is_empty() {
        Ok(EXIT_FOUND)
    } else {
        eprintln!("error: backend mismatch on {}", mismatched.join(", "));
        Ok(EXIT_MISMATCH)
    }
}
