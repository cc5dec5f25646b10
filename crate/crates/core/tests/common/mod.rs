//! Shared helpers: an independent reference scorer and scene builders.
#![allow(dead_code)]

use edgealign::{
    build_pyramid, compose_scene, compute_gradients, extract_edge_model, EdgeModel, EdgeThresholds, GroundTruth, Image,
    Occluder, Pose, PoseDeg, PoseGrid, SceneSpec, SplitMix64, TemplatePyramid, TemplateShape,
};

/// Gradients computed by [`reference_gradients`].
pub struct RefField {
    pub gx: Vec<f64>,
    pub gy: Vec<f64>,
    pub w: usize,
    pub h: usize,
}

/// Sobel straight from the pixel grid, zero on the border ring.
pub fn reference_gradients(img: &Image) -> RefField {
    let (w, h) = (img.width(), img.height());
    let p = |x: usize, y: usize| img.get(x, y);
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            gx[y * w + x] = (p(x + 1, y - 1) + 2.0 * p(x + 1, y) + p(x + 1, y + 1))
                - (p(x - 1, y - 1) + 2.0 * p(x - 1, y) + p(x - 1, y + 1));
            gy[y * w + x] = (p(x - 1, y + 1) + 2.0 * p(x, y + 1) + p(x + 1, y + 1))
                - (p(x - 1, y - 1) + 2.0 * p(x, y - 1) + p(x + 1, y - 1));
        }
    }
    RefField { gx, gy, w, h }
}

fn nearest(v: f64) -> i64 {
    let f = v.floor();
    if v - f >= 0.5 {
        f as i64 + 1
    } else {
        f as i64
    }
}

/// Mean best-window cosine, computed with plain loops over poses, points and
/// window pixels.
pub fn reference_score(model: &EdgeModel, f: &RefField, pose: &Pose, nb: usize, signed: bool) -> f64 {
    let (gx, gy, w, h) = (&f.gx, &f.gy, f.w, f.h);
    let r = (nb / 2) as i64;
    let (s, c) = pose.theta.sin_cos();
    let mut sum = 0.0;
    for p in model.points() {
        let px = nearest(c * p.x_rel - s * p.y_rel + pose.ux);
        let py = nearest(s * p.x_rel + c * p.y_rel + pose.uy);
        if px < 0 || py < 0 || px >= w as i64 || py >= h as i64 {
            continue;
        }
        let (ddx, ddy) = (c * p.dx - s * p.dy, s * p.dx + c * p.dy);
        let norm = (ddx * ddx + ddy * ddy).sqrt();
        let (dx, dy) = (ddx / norm, ddy / norm);
        let mut best = f64::NEG_INFINITY;
        for yy in py - r..=py + r {
            for xx in px - r..=px + r {
                if xx < 0 || yy < 0 || xx >= w as i64 || yy >= h as i64 {
                    continue;
                }
                let i = yy as usize * w + xx as usize;
                let m = (gx[i] * gx[i] + gy[i] * gy[i]).sqrt();
                let mut v = if m >= 1e-9 { (dx * gx[i] + dy * gy[i]) / m } else { 0.0 };
                if !signed {
                    v = v.abs();
                }
                if v > best {
                    best = v;
                }
            }
        }
        sum += best;
    }
    sum / model.len() as f64
}

/// `(best score, first index reaching it)` over every grid pose.
pub fn reference_argmax(model: &EdgeModel, img: &Image, grid: &PoseGrid, nb: usize) -> (f64, usize) {
    let field = reference_gradients(img);
    let (nx, ny, nt) = grid.counts();
    let mut best = (f64::NEG_INFINITY, 0);
    let mut index = 0;
    for it in 0..nt {
        for iy in 0..ny {
            for ix in 0..nx {
                let pose = Pose::new(grid.x.value(ix), grid.y.value(iy), grid.theta.value(it));
                let s = reference_score(model, &field, &pose, nb, true);
                if s > best.0 {
                    best = (s, index);
                }
                index += 1;
            }
        }
    }
    best
}

/// Integer-valued scene of random flat rectangles over a random ground.
pub fn random_blocks(rng: &mut SplitMix64, w: usize, h: usize, blocks: usize) -> Image {
    let mut data = vec![(rng.next_u64() % 256) as f64; w * h];
    for _ in 0..blocks {
        let x0 = (rng.next_u64() % w as u64) as usize;
        let y0 = (rng.next_u64() % h as u64) as usize;
        let x1 = (x0 + 2 + (rng.next_u64() % (w as u64 / 2)) as usize).min(w);
        let y1 = (y0 + 2 + (rng.next_u64() % (h as u64 / 2)) as usize).min(h);
        let v = (rng.next_u64() % 256) as f64;
        for y in y0..y1 {
            for x in x0..x1 {
                data[y * w + x] = v;
            }
        }
    }
    Image::new(w, h, data).unwrap()
}

pub fn crop(img: &Image, x0: usize, y0: usize, w: usize, h: usize) -> Image {
    Image::from_fn(w, h, |x, y| img.get(x0 + x, y0 + y)).unwrap()
}

/// Level-0 model with the default relative thresholds.
pub fn default_model(template: &Image) -> EdgeModel {
    let f = compute_gradients(template).unwrap();
    extract_edge_model(&f, EdgeThresholds::relative(f.max_magnitude(), 0.3).unwrap(), 0).unwrap()
}

pub fn template_pyramid(template: &Image, levels: usize) -> TemplatePyramid {
    let pyr = build_pyramid(template, levels).unwrap();
    TemplatePyramid::extract(&pyr, |_, f| EdgeThresholds::relative(f.max_magnitude(), 0.3)).unwrap()
}

pub struct Scene {
    pub image: Image,
    pub truth: GroundTruth,
    pub model: EdgeModel,
    /// Where a search should put the model centroid.
    pub expected: Pose,
}

pub fn scene(spec: &SceneSpec) -> Scene {
    let (image, truth) = compose_scene(spec).unwrap();
    let model = default_model(&truth.template);
    let expected = truth.expected_pose(&model);
    Scene { image, truth, model, expected }
}

/// Translation grid of step `step` over the image whose lattice passes
/// through `through`, with `theta_deg` as the rotation axis.
pub fn lattice_through(img: &Image, through: &Pose, step: f64, theta_deg: (f64, f64, f64)) -> PoseGrid {
    let x0 = through.ux.rem_euclid(step);
    let y0 = through.uy.rem_euclid(step);
    PoseGrid::from_degrees((x0, img.width() as f64 - 1.0, step), (y0, img.height() as f64 - 1.0, step), theta_deg)
        .unwrap()
}

/// The committed seeded clutter scene.
pub fn clutter_spec() -> SceneSpec {
    SceneSpec::from_json(include_str!("../fixtures/clutter_scene.json")).unwrap()
}

pub struct Instance {
    pub image: Image,
    pub model: EdgeModel,
    pub grid: PoseGrid,
    pub nb: usize,
}

/// Random desk-scale case: a blocky image and a crop of it as template,
/// searched over every pixel at 0, 15 and 30 degrees.
pub fn instance(seed: u64) -> Instance {
    let mut rng = SplitMix64::new(seed);
    loop {
        let w = 24 + (rng.next_u64() % 25) as usize;
        let h = 24 + (rng.next_u64() % 25) as usize;
        let image = random_blocks(&mut rng, w, h, 6);
        let tw = 8 + (rng.next_u64() % 9) as usize;
        let th = 8 + (rng.next_u64() % 9) as usize;
        let x0 = (rng.next_u64() % (w - tw) as u64) as usize;
        let y0 = (rng.next_u64() % (h - th) as u64) as usize;
        let template = crop(&image, x0, y0, tw, th);
        let f = compute_gradients(&template).unwrap();
        if f.max_magnitude() == 0.0 {
            continue;
        }
        let model = default_model(&template);
        let grid =
            PoseGrid::from_degrees((0.0, (w - 1) as f64, 1.0), (0.0, (h - 1) as f64, 1.0), (0.0, 30.0, 15.0)).unwrap();
        let nb = if seed.is_multiple_of(2) { 1 } else { 3 };
        return Instance { image, model, grid, nb };
    }
}

pub fn within(got: &Pose, want: &Pose, px: f64, deg: f64) -> bool {
    (got.ux - want.ux).abs() <= px + 1e-9
        && (got.uy - want.uy).abs() <= px + 1e-9
        && (got.theta_deg() - want.theta_deg()).abs() <= deg + 1e-9
}

/// Occluder over the left part of the placed template, sized so the
/// measured occluded fraction is as close to `target` as possible.
pub fn occluded_spec(target: f64) -> (SceneSpec, f64) {
    let base = SceneSpec::clean(256, 256, TemplateShape::Rectangle, 64, PoseDeg { x: 128.0, y: 128.0, theta_deg: 0.0 });
    let mut best = (base.clone(), f64::INFINITY, 0.0);
    for w in 1..64 {
        let mut spec = base.clone();
        spec.occluder = Some(Occluder { x: 96, y: 0, w, h: 256, fill: 120.0 });
        let (_, truth) = compose_scene(&spec).unwrap();
        let err = (truth.occluded_fraction - target).abs();
        if err < best.1 {
            best = (spec, err, truth.occluded_fraction);
        }
    }
    (best.0, best.2)
}

/// Best score among poses whose model footprint cannot overlap the target.
pub fn best_clutter_score(s: &Scene, grid: &PoseGrid, map: &[f64]) -> f64 {
    let reach = s.truth.template.width() as f64 * std::f64::consts::SQRT_2;
    map.iter()
        .enumerate()
        .filter(|&(i, _)| {
            let p = grid.pose_at(i).unwrap();
            (p.ux - s.expected.ux).hypot(p.uy - s.expected.uy) > reach
        })
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max)
}
