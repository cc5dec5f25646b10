//! Edge-orientation template matching for texture-less planar objects.
//!
//! A template image is reduced to a sparse [`EdgeModel`] of oriented edge
//! points. The model is then aligned against the dense [`GradientField`] of a
//! search image by maximizing a normalized orientation-consistency score over
//! an exhaustive grid of rigid poses `(x, y, θ)`, optionally coarse-to-fine on
//! an image [`Pyramid`].
//!
//! # Quick start
//! ```
//! use edgealign::{
//!     build_pyramid, coarse_to_fine, render_template, Backend, EdgeThresholds,
//!     PoseGrid, SearchConfig, TemplateShape, TemplatePyramid,
//! };
//!
//! let template = render_template(TemplateShape::Cross, 32).unwrap();
//! let scene = template.clone();
//! let config = SearchConfig {
//!     grid: PoseGrid::from_degrees((0.0, 31.0, 1.0), (0.0, 31.0, 1.0), (0.0, 0.0, 1.0)).unwrap(),
//!     num_levels: 1,
//!     ..SearchConfig::default()
//! };
//! let models = TemplatePyramid::extract(
//!     &build_pyramid(&template, 1).unwrap(),
//!     |_, _| EdgeThresholds::new(10.0, 20.0),
//! )
//! .unwrap();
//! let working = build_pyramid(&scene, 1).unwrap();
//! let outcome = coarse_to_fine(&models, &working, &config, Backend::serial()).unwrap();
//! assert!(outcome.is_detected());
//! ```
//!
//! # Modules
//! - [`image`]: raster container, Netpbm I/O, box downsampling and pyramids.
//! - [`edges`]: Sobel gradients, NMS + hysteresis edge-model extraction.
//! - [`pose`]: rigid poses, the pose lattice and its linearization.
//! - [`similarity`]: per-point neighborhood vote and whole-pose score.
//! - [`search`]: exhaustive and coarse-to-fine maximization, serial/parallel.
//! - [`synth`]: seeded synthetic templates and scenes with ground truth.

pub mod edges;
mod error;
pub mod image;
pub mod pose;
pub mod search;
pub mod similarity;
pub mod synth;

pub use edges::{compute_gradients, extract_edge_model, EdgeModel, EdgePoint, EdgeThresholds, GradientField};
pub use error::{Error, Result};
pub use image::{build_pyramid, downsample, load_pgm, save_pgm, save_ppm, Image, Pyramid};
pub use pose::{Pose, PoseGrid};
pub use search::{
    coarse_to_fine, exhaustive_search, score_map, Backend, BackendKind, Detection, LevelStep, SearchConfig,
    SearchOutcome, TemplatePyramid,
};
pub use similarity::{point_vote, pose_score, project_model, Polarity, PoseScore, ScoreParams};
pub use synth::{
    compose_scene, render_template, GroundTruth, Illumination, Occluder, PoseDeg, SceneSpec, SplitMix64, TemplateShape,
};
