//! Pose-space maximization.
//!
//! [`exhaustive_search`] scores every lattice pose and keeps the maximum;
//! [`coarse_to_fine`] runs it on the top of a pyramid and refines a beam of
//! candidates down to full resolution.
//!
//! The serial and parallel backends return identical results. Each pose
//! score is computed by one thread in a fixed order; parallelism only
//! partitions poses, and candidates are ranked by `(score desc, index asc)`,
//! a total order whose reduction is associative and commutative.

use crate::edges::{compute_gradients, EdgeModel, EdgeThresholds, GradientField};
use crate::error::{Error, Result};
use crate::image::Pyramid;
use crate::pose::{Axis, Pose, PoseGrid};
use crate::similarity::{PoseScore, RotatedModel, ScoreParams};

/// Execution strategy for the pose reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Serial,
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Backend {
    pub kind: BackendKind,
    /// Worker threads for [`BackendKind::Parallel`]; 0 uses all hardware threads.
    pub workers: usize,
}

impl Backend {
    pub const fn serial() -> Self {
        Self { kind: BackendKind::Serial, workers: 1 }
    }

    pub const fn parallel(workers: usize) -> Self {
        Self { kind: BackendKind::Parallel, workers }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            BackendKind::Serial => "serial",
            BackendKind::Parallel => "parallel",
        }
    }

    /// Threads the backend actually uses.
    pub fn effective_workers(&self) -> usize {
        match self.kind {
            BackendKind::Serial => 1,
            BackendKind::Parallel if self.workers > 0 => self.workers,
            BackendKind::Parallel => std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

/// One step of a detection's history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelStep {
    pub level: usize,
    /// Pose in level-0 coordinates.
    pub pose: Pose,
    pub score: f64,
}

/// Best pose found by a search.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    /// Level-0 coordinates; the translation places the model centroid.
    pub pose: Pose,
    pub score: f64,
    /// Model points projecting inside the working image at `pose`.
    pub n_inbounds: usize,
    /// Coarse to fine.
    pub level_trace: Vec<LevelStep>,
    /// Linear index of the originating pose in the top-level grid.
    pub grid_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Detected(Detection),
    /// Best candidate scored below the acceptance floor.
    NoDetection(Detection),
}

impl SearchOutcome {
    pub fn is_detected(&self) -> bool {
        matches!(self, Self::Detected(_))
    }

    /// The detection, or the best rejected candidate.
    pub fn best(&self) -> &Detection {
        match self {
            Self::Detected(d) | Self::NoDetection(d) => d,
        }
    }

    pub fn into_best(self) -> Detection {
        match self {
            Self::Detected(d) | Self::NoDetection(d) => d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Pose lattice at level-0 scale.
    pub grid: PoseGrid,
    pub num_levels: usize,
    pub score_params: ScoreParams,
    pub min_score: f64,
    /// Candidates carried between levels.
    pub topk: usize,
    /// Refinement window half-width, in lattice steps.
    pub refine_radius: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid: PoseGrid::single(Pose::new(0.0, 0.0, 0.0)),
            num_levels: 1,
            score_params: ScoreParams::default(),
            min_score: 0.5,
            topk: 5,
            refine_radius: 2,
        }
    }
}

impl SearchConfig {
    pub fn new(grid: PoseGrid) -> Self {
        Self { grid, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.num_levels == 0 {
            return Err(Error::InvalidParameter("num_levels must be >= 1".into()));
        }
        if self.topk == 0 {
            return Err(Error::InvalidParameter("topk must be >= 1".into()));
        }
        if self.refine_radius == 0 {
            return Err(Error::InvalidParameter("refine_radius must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.min_score) {
            return Err(Error::InvalidParameter(format!("min_score must lie in [0, 1], got {}", self.min_score)));
        }
        Ok(())
    }
}

/// Smallest rotation step reached by halving during refinement.
pub const MIN_THETA_STEP_DEG: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Ranked {
    score: f64,
    index: usize,
}

impl Ranked {
    #[inline]
    fn beats(&self, other: &Ranked) -> bool {
        self.score > other.score || (self.score == other.score && self.index < other.index)
    }
}

/// Bounded best-first list under the `(score desc, index asc)` order.
#[derive(Debug, Clone)]
struct TopK {
    k: usize,
    items: Vec<Ranked>,
}

impl TopK {
    fn new(k: usize) -> Self {
        Self { k, items: Vec::with_capacity(k + 1) }
    }

    #[inline]
    fn push(&mut self, r: Ranked) {
        if self.items.len() == self.k && !r.beats(self.items.last().unwrap()) {
            return;
        }
        let at = self.items.iter().position(|x| r.beats(x)).unwrap_or(self.items.len());
        self.items.insert(at, r);
        self.items.truncate(self.k);
    }

    #[cfg_attr(not(feature = "parallel"), allow(dead_code))]
    fn merge(mut self, other: TopK) -> TopK {
        for r in other.items {
            self.push(r);
        }
        self
    }
}

#[inline]
fn score_index(
    rotated: &[RotatedModel],
    grid: &PoseGrid,
    field: &GradientField,
    params: &ScoreParams,
    index: usize,
) -> Ranked {
    let (ix, iy, it) = grid.split_index(index);
    let s = rotated[it].score_at(grid.x.value(ix), grid.y.value(iy), field, params);
    Ranked { score: s.value, index }
}

#[cfg(feature = "parallel")]
fn pool(workers: usize) -> std::sync::Arc<rayon::ThreadPool> {
    use std::collections::HashMap;
    use std::sync::{Arc, Mutex, OnceLock};
    static POOLS: OnceLock<Mutex<HashMap<usize, Arc<rayon::ThreadPool>>>> = OnceLock::new();
    let mut pools = POOLS.get_or_init(Default::default).lock().unwrap();
    pools
        .entry(workers)
        .or_insert_with(|| {
            Arc::new(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .thread_name(|i| format!("edgealign-{i}"))
                    .build()
                    .expect("failed to build worker pool"),
            )
        })
        .clone()
}

fn search_topk(
    rotated: &[RotatedModel],
    grid: &PoseGrid,
    field: &GradientField,
    params: &ScoreParams,
    backend: Backend,
    k: usize,
) -> Vec<Ranked> {
    let size = grid.size();
    match backend.kind {
        #[cfg(feature = "parallel")]
        BackendKind::Parallel => {
            use rayon::prelude::*;
            let run = || {
                (0..size)
                    .into_par_iter()
                    .with_min_len(64)
                    .fold(
                        || TopK::new(k),
                        |mut acc, i| {
                            acc.push(score_index(rotated, grid, field, params, i));
                            acc
                        },
                    )
                    .reduce(|| TopK::new(k), TopK::merge)
                    .items
            };
            if backend.workers == 0 {
                run()
            } else {
                pool(backend.workers).install(run)
            }
        }
        // without the `parallel` feature every backend runs serially
        _ => {
            let mut top = TopK::new(k);
            for i in 0..size {
                top.push(score_index(rotated, grid, field, params, i));
            }
            top.items
        }
    }
}

fn rotations(model: &EdgeModel, axis: &Axis) -> Vec<RotatedModel> {
    (0..axis.count()).map(|it| RotatedModel::new(model, axis.value(it))).collect()
}

/// Scores every pose in `grid` and returns the best one. Ties go to the
/// smallest linear index.
pub fn exhaustive_search(
    model: &EdgeModel,
    field: &GradientField,
    grid: &PoseGrid,
    params: &ScoreParams,
    backend: Backend,
) -> Result<Detection> {
    if model.is_empty() {
        return Err(Error::EmptyModel { max_magnitude: 0.0 });
    }
    let rotated = rotations(model, &grid.theta);
    let best = search_topk(&rotated, grid, field, params, backend, 1)[0];
    let pose = grid.pose_at(best.index)?;
    let level = model.source_level();
    let n_inbounds = rotated[grid.split_index(best.index).2].score_at(pose.ux, pose.uy, field, params).n_inbounds;
    Ok(Detection {
        pose,
        score: best.score,
        n_inbounds,
        level_trace: vec![LevelStep { level, pose: to_level0(pose, level), score: best.score }],
        grid_index: best.index,
    })
}

/// Dense scores of every pose in `grid`, indexed like [`PoseGrid::pose_at`].
/// Refuses grids larger than `max_entries`.
pub fn score_map(
    model: &EdgeModel,
    field: &GradientField,
    grid: &PoseGrid,
    params: &ScoreParams,
    max_entries: usize,
) -> Result<Vec<f64>> {
    if model.is_empty() {
        return Err(Error::EmptyModel { max_magnitude: 0.0 });
    }
    let size = grid.size();
    if size > max_entries {
        return Err(Error::ScoreMapTooLarge { required: size, allowed: max_entries });
    }
    let rotated = rotations(model, &grid.theta);
    Ok((0..size).map(|i| score_index(&rotated, grid, field, params, i).score).collect())
}

/// Edge models for every level of a template pyramid.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplatePyramid {
    models: Vec<EdgeModel>,
}

impl TemplatePyramid {
    /// Extracts one model per level. `thresholds` picks the edge thresholds
    /// from the level index and its gradient field.
    pub fn extract(
        pyramid: &Pyramid,
        thresholds: impl Fn(usize, &GradientField) -> Result<EdgeThresholds>,
    ) -> Result<Self> {
        let models = pyramid
            .levels()
            .iter()
            .enumerate()
            .map(|(level, image)| {
                let wrap = |e: Error| Error::LevelModel { level, source: Box::new(e) };
                let field = compute_gradients(image).map_err(wrap)?;
                let t = thresholds(level, &field).map_err(wrap)?;
                crate::edges::extract_edge_model(&field, t, level).map_err(wrap)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { models })
    }

    pub fn from_models(models: Vec<EdgeModel>) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::InvalidParameter("template pyramid needs at least one model".into()));
        }
        Ok(Self { models })
    }

    pub fn models(&self) -> &[EdgeModel] {
        &self.models
    }

    pub fn level(&self, level: usize) -> &EdgeModel {
        &self.models[level]
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }
}

fn to_level0(pose: Pose, level: usize) -> Pose {
    let s = (1u64 << level) as f64;
    Pose::new(pose.ux * s, pose.uy * s, pose.theta)
}

#[derive(Debug, Clone)]
struct Candidate {
    /// Pose in the current level's pixel units.
    pose: Pose,
    score: PoseScore,
    top_index: usize,
    trace: Vec<LevelStep>,
}

/// Lattice of spacing `step` around `center` reaching out to `reach` on
/// each side (rounded down to whole steps).
fn centered_axis(center: f64, step: f64, reach: f64) -> Axis {
    let half = (reach / step + 1e-9).floor() * step;
    Axis { start: center - half, end: center + half, step }
}

fn same_pose(a: &Pose, b: &Pose) -> bool {
    (a.ux - b.ux).abs() < 1e-9 && (a.uy - b.uy).abs() < 1e-9 && (a.theta - b.theta).abs() < 1e-12
}

/// Coarse-to-fine search: exhaustive at the pyramid top, then a beam of
/// `topk` candidates refined per level. The window reaches `refine_radius`
/// coarse-level steps to each side and is sampled at the halved step.
///
/// At the top level the grid's translations and steps are divided by
/// `2^(L-1)`. Going one level finer doubles each candidate's translation and
/// halves the lattice steps in level-0 units, so translation steps keep the
/// same size in each level's own pixels. The rotation step halves per level
/// but never drops below [`MIN_THETA_STEP_DEG`] through halving.
pub fn coarse_to_fine(
    template: &TemplatePyramid,
    working: &Pyramid,
    config: &SearchConfig,
    backend: Backend,
) -> Result<SearchOutcome> {
    config.validate()?;
    let levels = config.num_levels;
    if template.len() != levels || working.len() != levels {
        return Err(Error::InvalidParameter(format!(
            "expected {levels} pyramid levels, template has {} and working image has {}",
            template.len(),
            working.len()
        )));
    }
    let params = &config.score_params;
    let top = levels - 1;
    let top_grid = config.grid.scale_translation(1.0 / (1u64 << top) as f64);
    let top_field = compute_gradients(working.level(top).unwrap())?;
    let top_model = template.level(top);
    let rotated = rotations(top_model, &top_grid.theta);
    let mut beam: Vec<Candidate> = search_topk(&rotated, &top_grid, &top_field, params, backend, config.topk)
        .into_iter()
        .map(|r| {
            let (ix, iy, it) = top_grid.split_index(r.index);
            let pose = top_grid.pose_at(r.index).unwrap();
            let score = rotated[it].score_at(top_grid.x.value(ix), top_grid.y.value(iy), &top_field, params);
            Candidate {
                pose,
                score,
                top_index: r.index,
                trace: vec![LevelStep { level: top, pose: to_level0(pose, top), score: score.value }],
            }
        })
        .collect();

    let (step_x, step_y) = (top_grid.x.step, top_grid.y.step);
    let min_theta_step = MIN_THETA_STEP_DEG.to_radians();
    let mut step_theta = top_grid.theta.step;
    let radius = config.refine_radius as f64;
    for level in (0..top).rev() {
        let coarse_theta = step_theta;
        step_theta = (step_theta / 2.0).max(min_theta_step.min(step_theta));
        let field = compute_gradients(working.level(level).unwrap())?;
        let model = template.level(level);
        let mut refined: Vec<Candidate> = Vec::new();
        for cand in &beam {
            let center = Pose::new(2.0 * cand.pose.ux, 2.0 * cand.pose.uy, cand.pose.theta);
            let local = PoseGrid::new(
                centered_axis(center.ux, step_x, radius * 2.0 * step_x),
                centered_axis(center.uy, step_y, radius * 2.0 * step_y),
                centered_axis(center.theta, step_theta, radius * coarse_theta),
            );
            let rotated = rotations(model, &local.theta);
            for r in search_topk(&rotated, &local, &field, params, backend, config.topk) {
                let (ix, iy, it) = local.split_index(r.index);
                let pose = local.pose_at(r.index)?;
                if refined.iter().any(|c| same_pose(&c.pose, &pose)) {
                    continue;
                }
                let score = rotated[it].score_at(local.x.value(ix), local.y.value(iy), &field, params);
                let mut trace = cand.trace.clone();
                trace.push(LevelStep { level, pose: to_level0(pose, level), score: score.value });
                refined.push(Candidate { pose, score, top_index: cand.top_index, trace });
            }
        }
        // stable: equal scores keep beam order, then window order
        refined.sort_by(|a, b| b.score.value.total_cmp(&a.score.value));
        refined.truncate(config.topk);
        beam = refined;
    }

    let best = beam.into_iter().next().expect("beam is never empty");
    let detection = Detection {
        pose: best.pose,
        score: best.score.value,
        n_inbounds: best.score.n_inbounds,
        level_trace: best.trace,
        grid_index: best.top_index,
    };
    Ok(if detection.score >= config.min_score {
        SearchOutcome::Detected(detection)
    } else {
        SearchOutcome::NoDetection(detection)
    })
}
