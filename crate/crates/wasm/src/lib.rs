//! wasm-bindgen surface for the static demo page in `www/`.
//!
//! A [`Demo`] owns one synthetic scene. The page can re-render it, run a
//! pyramid search with an overlay, and paint score heatmaps to compare vote
//! window sizes. Timing is left to the page (`performance.now()`).

use edgealign::{
    build_pyramid, coarse_to_fine, compose_scene, compute_gradients, project_model, score_map, Backend, EdgeThresholds,
    GradientField, GroundTruth, Image, Pose, PoseDeg, PoseGrid, SceneSpec, ScoreParams, SearchConfig, TemplatePyramid,
    TemplateShape,
};
use wasm_bindgen::prelude::*;

const HIGH_FRACTION: f64 = 0.3;

#[wasm_bindgen]
pub struct Demo {
    scene: Image,
    truth: GroundTruth,
    field: GradientField,
    detected: Option<Pose>,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn gray_rgba(img: &Image) -> Vec<u8> {
    img.data()
        .iter()
        .flat_map(|&v| {
            let b = v.clamp(0.0, 255.0).round() as u8;
            [b, b, b, 255]
        })
        .collect()
}

fn models(template: &Image, levels: usize) -> Result<TemplatePyramid, String> {
    let pyr = build_pyramid(template, levels).map_err(err)?;
    TemplatePyramid::extract(&pyr, |_, f| EdgeThresholds::relative(f.max_magnitude(), HIGH_FRACTION)).map_err(err)
}

#[wasm_bindgen]
impl Demo {
    /// Renders a scene. `shape` is one of `rectangle`, `ring`, `l_bracket`,
    /// `cross`.
    #[wasm_bindgen(constructor)]
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        width: usize,
        height: usize,
        shape: &str,
        size: usize,
        x: f64,
        y: f64,
        theta_deg: f64,
        clutter: usize,
        seed: u32,
        noise_sigma: f64,
    ) -> Result<Demo, String> {
        let shape: TemplateShape = shape.parse().map_err(err)?;
        let mut spec = SceneSpec::clean(width, height, shape, size, PoseDeg { x, y, theta_deg });
        spec.clutter_segments = clutter;
        spec.clutter_seed = u64::from(seed);
        spec.noise_sigma = noise_sigma;
        spec.noise_seed = u64::from(seed) ^ 0x9E37_79B9_7F4A_7C15;
        let (scene, truth) = compose_scene(&spec).map_err(err)?;
        let field = compute_gradients(&scene).map_err(err)?;
        Ok(Demo { scene, truth, field, detected: None })
    }

    pub fn width(&self) -> usize {
        self.scene.width()
    }

    pub fn height(&self) -> usize {
        self.scene.height()
    }

    /// RGBA bytes of the scene, with the last detection's model points in
    /// red.
    pub fn scene_rgba(&self) -> Vec<u8> {
        let mut rgba = gray_rgba(&self.scene);
        if let Some(pose) = &self.detected {
            let model = models(&self.truth.template, 1).expect("template has edges");
            let w = self.scene.width() as i64;
            for (x, y) in project_model(model.level(0), pose) {
                if x >= 0 && y >= 0 && x < w && (y as usize) < self.scene.height() {
                    let i = 4 * (y * w + x) as usize;
                    rgba[i..i + 3].copy_from_slice(&[255, 0, 0]);
                }
            }
        }
        rgba
    }

    /// Coarse-to-fine search over every translation and 0..=90 degrees.
    /// Returns a JSON document with the pose, score and ground truth.
    pub fn detect(
        &mut self,
        neighborhood: usize,
        step: f64,
        step_theta_deg: f64,
        levels: usize,
    ) -> Result<String, String> {
        let tp = models(&self.truth.template, levels)?;
        let working = build_pyramid(&self.scene, levels).map_err(err)?;
        let grid = PoseGrid::from_degrees(
            (0.0, (self.scene.width() - 1) as f64, step),
            (0.0, (self.scene.height() - 1) as f64, step),
            (0.0, 90.0, step_theta_deg),
        )
        .map_err(err)?;
        let mut cfg = SearchConfig::new(grid);
        cfg.num_levels = levels;
        cfg.score_params = ScoreParams::with_neighborhood(neighborhood).map_err(err)?;
        let outcome = coarse_to_fine(&tp, &working, &cfg, Backend::serial()).map_err(err)?;
        let best = outcome.best();
        self.detected = Some(best.pose);
        let expected = self.truth.expected_pose(tp.level(0));
        let doc = serde_json::json!({
            "detected": outcome.is_detected(),
            "pose": PoseDeg::from_pose(&best.pose),
            "score": best.score,
            "expected": PoseDeg::from_pose(&expected),
            "model_points": tp.level(0).len(),
        });
        Ok(doc.to_string())
    }

    /// Clears the overlay.
    pub fn clear(&mut self) {
        self.detected = None;
    }

    /// Score over translations at one rotation, sampled every `step` pixels,
    /// as RGBA (`heatmap_width` x `heatmap_height`). Negative scores are
    /// black, 1 is white.
    pub fn heatmap(&self, neighborhood: usize, theta_deg: f64, step: f64) -> Result<Vec<u8>, String> {
        let model = models(&self.truth.template, 1)?;
        let grid = self.heat_grid(theta_deg, step)?;
        let params = ScoreParams::with_neighborhood(neighborhood).map_err(err)?;
        let map = score_map(model.level(0), &self.field, &grid, &params, 1 << 22).map_err(err)?;
        Ok(map.iter().flat_map(|&s| heat_color(s)).collect())
    }

    pub fn heatmap_width(&self, step: f64) -> usize {
        self.heat_grid(0.0, step).map_or(0, |g| g.counts().0)
    }

    pub fn heatmap_height(&self, step: f64) -> usize {
        self.heat_grid(0.0, step).map_or(0, |g| g.counts().1)
    }
}

impl Demo {
    fn heat_grid(&self, theta_deg: f64, step: f64) -> Result<PoseGrid, String> {
        PoseGrid::from_degrees(
            (0.0, (self.scene.width() - 1) as f64, step),
            (0.0, (self.scene.height() - 1) as f64, step),
            (theta_deg, theta_deg, 1.0),
        )
        .map_err(err)
    }
}

/// Black through red and yellow to white.
fn heat_color(score: f64) -> [u8; 4] {
    let t = score.clamp(0.0, 1.0);
    let ch = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    [ch(3.0 * t), ch(3.0 * t - 1.0), ch(3.0 * t - 2.0), 255]
}
