use std::path::PathBuf;

use clap::Args;
use edgealign::{compose_scene, save_pgm, SceneSpec};

use crate::{write_file, EXIT_FOUND};

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out_image: PathBuf,
    #[arg(long)]
    pub out_truth: PathBuf,
    /// Also write the rendered template.
    #[arg(long)]
    pub out_template: Option<PathBuf>,
}

pub fn run(args: &SynthArgs) -> Result<i32, String> {
    let text = std::fs::read_to_string(&args.spec).map_err(|e| format!("{}: {e}", args.spec.display()))?;
    let spec = SceneSpec::from_json(&text).map_err(|e| format!("{}: {e}", args.spec.display()))?;
    let (scene, truth) = compose_scene(&spec).map_err(|e| e.to_string())?;
    write_file(&args.out_image, save_pgm(&scene))?;
    write_file(&args.out_truth, truth.to_json() + "\n")?;
    if let Some(path) = &args.out_template {
        write_file(path, save_pgm(&truth.template))?;
    }
    Ok(EXIT_FOUND)
}
