use std::path::PathBuf;

use clap::Args;
use edgealign::{compose_scene, save_pgm, Illumination, Occluder, PoseDeg, SceneSpec, TemplateShape};

use crate::{write_file, EXIT_FOUND};

#[derive(Debug, Args)]
pub struct SuiteArgs {
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

const WIDTH: usize = 812;
const HEIGHT: usize = 617;
const TEMPLATE_SIZE: usize = 96;

/// Seven 812x617 scenes mixing clutter, occlusion, lighting and noise.
pub fn standard_suite() -> Vec<(String, SceneSpec)> {
    use TemplateShape::*;
    let rows: [(TemplateShape, f64, f64, f64, usize); 7] = [
        (Rectangle, 210.0, 160.0, 12.0, 0),
        (LBracket, 600.0, 420.0, 37.0, 10),
        (Cross, 400.0, 300.0, 63.0, 20),
        (Ring, 150.0, 470.0, 0.0, 15),
        (Rectangle, 650.0, 150.0, 80.0, 25),
        (LBracket, 330.0, 480.0, 21.0, 20),
        (Cross, 520.0, 250.0, 45.0, 30),
    ];
    rows.iter()
        .enumerate()
        .map(|(i, &(shape, x, y, theta_deg, clutter))| {
            let mut spec = SceneSpec::clean(WIDTH, HEIGHT, shape, TEMPLATE_SIZE, PoseDeg { x, y, theta_deg });
            spec.clutter_segments = clutter;
            spec.clutter_seed = 1000 + i as u64;
            match i {
                2 => spec.illumination = Illumination { gain: 0.8, bias: 20.0, gamma: 1.0 },
                3 => {
                    spec.noise_sigma = 1.0;
                    spec.noise_seed = 7;
                }
                4 => {
                    spec.occluder = Some(Occluder { x: 590, y: 90, w: 40, h: 50, fill: 120.0 });
                }
                5 => spec.illumination = Illumination { gain: 1.0, bias: 0.0, gamma: 1.3 },
                _ => {}
            }
            (format!("sample{}", i + 1), spec)
        })
        .collect()
}

pub fn run(args: &SuiteArgs) -> Result<i32, String> {
    std::fs::create_dir_all(&args.out).map_err(|e| format!("{}: {e}", args.out.display()))?;
    for (name, spec) in standard_suite() {
        let (scene, truth) = compose_scene(&spec).map_err(|e| format!("{name}: {e}"))?;
        let path = |suffix: &str| args.out.join(format!("{name}_{suffix}"));
        write_file(&path("template.pgm"), save_pgm(&truth.template))?;
        write_file(&path("scene.pgm"), save_pgm(&scene))?;
        write_file(&path("spec.json"), spec.to_json() + "\n")?;
        write_file(&path("truth.json"), truth.to_json() + "\n")?;
    }
    println!("wrote 7 samples to {}", args.out.display());
    Ok(EXIT_FOUND)
}
