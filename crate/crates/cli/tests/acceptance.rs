//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::time::Instant;

use common::*;
use edgealign::{
    build_pyramid, coarse_to_fine, compose_scene, compute_gradients, exhaustive_search, load_pgm, pose_score,
    project_model, render_template, save_pgm, save_ppm, score_map, Backend, Detection, EdgeModel, GradientField,
    Illumination, Image, Occluder, Pose, PoseDeg, PoseGrid, SceneSpec, ScoreParams, SearchConfig, SearchOutcome,
    SplitMix64, TemplateShape,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn nb(n: usize) -> ScoreParams {
    ScoreParams::with_neighborhood(n).unwrap()
}

const PARALLEL: [Backend; 3] = [Backend::parallel(2), Backend::parallel(4), Backend::parallel(0)];

/// Serial search plus the same search on every parallel configuration;
/// fails unless scores are bit-equal and indices agree.
fn search_all(
    model: &EdgeModel,
    field: &GradientField,
    grid: &PoseGrid,
    params: &ScoreParams,
) -> Result<Detection, String> {
    let serial = exhaustive_search(model, field, grid, params, Backend::serial()).map_err(|e| e.to_string())?;
    for b in PARALLEL {
        let par = exhaustive_search(model, field, grid, params, b).map_err(|e| e.to_string())?;
        check(par.score.to_bits() == serial.score.to_bits() && par.grid_index == serial.grid_index, || {
            format!(
                "{} workers: {} @ {} vs serial {} @ {}",
                b.effective_workers(),
                par.score,
                par.grid_index,
                serial.score,
                serial.grid_index
            )
        })?;
    }
    Ok(serial)
}

fn pyramid_search_all(s: &Scene, levels: usize, cfg: &SearchConfig) -> Result<SearchOutcome, String> {
    let tp = template_pyramid(&s.truth.template, levels);
    let working = build_pyramid(&s.image, levels).map_err(|e| e.to_string())?;
    let serial = coarse_to_fine(&tp, &working, cfg, Backend::serial()).map_err(|e| e.to_string())?;
    for b in PARALLEL {
        let par = coarse_to_fine(&tp, &working, cfg, b).map_err(|e| e.to_string())?;
        check(par == serial, || {
            format!("{} workers disagree: {:?} vs {:?}", b.effective_workers(), par.best(), serial.best())
        })?;
    }
    Ok(serial)
}

fn oracle() -> Outcome {
    let start = Instant::now();
    let (mut worst, n) = (0.0f64, 24);
    for seed in 0..n {
        let inst = instance(seed);
        let field = compute_gradients(&inst.image).unwrap();
        let (ref_score, ref_index) = reference_argmax(&inst.model, &inst.image, &inst.grid, inst.nb);
        let d = search_all(&inst.model, &field, &inst.grid, &nb(inst.nb))?;
        worst = worst.max((d.score - ref_score).abs());
        check((d.score - ref_score).abs() <= 1e-9, || {
            format!("seed {seed}: score {} vs reference {ref_score}", d.score)
        })?;
        check(d.grid_index == ref_index, || format!("seed {seed}: index {} vs reference {ref_index}", d.grid_index))?;
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("{n} instances, max |score diff| {worst:.1e}, argmax identical, {secs:.1} s"))
}

fn self_match() -> Outcome {
    let mut scores = Vec::new();
    for shape in TemplateShape::ALL {
        let t = render_template(shape, 64).unwrap();
        let model = default_model(&t);
        let (cx, cy) = model.centroid_abs();
        let identity = Pose::new(cx, cy, 0.0);
        let grid = lattice_through(&t, &identity, 1.0, (-6.0, 6.0, 3.0));
        let map = score_map(&model, &compute_gradients(&t).unwrap(), &grid, &nb(1), usize::MAX).unwrap();
        let (nx, ny, _) = grid.counts();
        let at = |i: usize| grid.pose_at(i).unwrap();
        let idx = (0..grid.size())
            .find(|&i| {
                let p = at(i);
                (p.ux - cx).abs() < 1e-9 && (p.uy - cy).abs() < 1e-9 && p.theta.abs() < 1e-12
            })
            .ok_or_else(|| format!("{shape}: identity missing from the {nx}x{ny} grid"))?;
        check(map[idx] >= 0.999, || format!("{shape}: {}", map[idx]))?;
        scores.push(format!("{shape} {:.4}", map[idx]));
    }
    Ok(scores.join(", "))
}

fn illumination() -> Outcome {
    let mut spec = clutter_spec();
    spec.noise_sigma = 3.0;
    spec.noise_seed = 5;
    let s = scene(&spec);
    let grid = lattice_through(&s.image, &s.expected, 4.0, (0.0, 90.0, 10.0));
    let base = compute_gradients(&s.image).unwrap();
    let reference = score_map(&s.model, &base, &grid, &nb(3), usize::MAX).unwrap();
    let mut worst = 0.0f64;
    for a in [0.25, 1.7, 4.0] {
        for b in [-30.0, 0.0, 50.0] {
            let lit = compute_gradients(&s.image.map(|v| a * v + b).unwrap()).unwrap();
            let map = score_map(&s.model, &lit, &grid, &nb(3), usize::MAX).unwrap();
            for (x, y) in reference.iter().zip(&map) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    // the same through the scene generator, without noise
    let clean = scene(&clutter_spec());
    let clean_ref =
        score_map(&clean.model, &compute_gradients(&clean.image).unwrap(), &grid, &nb(3), usize::MAX).unwrap();
    for (a, b) in [(0.25, -30.0), (4.0, 50.0), (1.7, 0.0)] {
        let mut lit = clutter_spec();
        lit.illumination = Illumination { gain: a, bias: b, gamma: 1.0 };
        let (img, _) = compose_scene(&lit).unwrap();
        let map = score_map(&clean.model, &compute_gradients(&img).unwrap(), &grid, &nb(3), usize::MAX).unwrap();
        for (x, y) in clean_ref.iter().zip(&map) {
            worst = worst.max((x - y).abs());
        }
    }
    check(worst <= 1e-9, || format!("max score change {worst:.3e}"))?;
    Ok(format!("{} poses x 12 lightings, max score change {worst:.1e}", grid.size()))
}

fn occlusion() -> Outcome {
    let mut notes = Vec::new();
    for target in [0.1, 0.25, 0.4] {
        let (spec, f) = occluded_spec(target);
        check((f - target).abs() <= 0.05, || format!("could not occlude {target}, got {f}"))?;
        let s = scene(&spec);
        let field = compute_gradients(&s.image).unwrap();
        let at_truth = pose_score(&s.model, &s.expected, &field, &nb(3)).unwrap().value;
        check(at_truth >= (1.0 - f) - 0.05, || format!("f {f:.3}: score {at_truth:.4}"))?;
        let mut note = format!("f {f:.3} score {at_truth:.3}");
        if target <= 0.25 {
            let grid = lattice_through(&s.image, &s.expected, 3.0, (0.0, 90.0, 3.0));
            let d = search_all(&s.model, &field, &grid, &nb(3))?;
            check(within(&d.pose, &s.expected, 1e-9, 1e-9), || {
                format!("f {f:.3}: search won at {:?}, truth {:?}", d.pose, s.expected)
            })?;
            note += " (wins)";
        }
        notes.push(note);
    }
    Ok(notes.join(", "))
}

fn clutter() -> Outcome {
    // (a) wider window never lowers a score
    let mut poses = 0;
    let mut fields: Vec<(EdgeModel, GradientField, PoseGrid)> = (0..4)
        .map(|seed| {
            let inst = instance(100 + seed);
            (inst.model, compute_gradients(&inst.image).unwrap(), inst.grid)
        })
        .collect();
    let c = scene(&clutter_spec());
    fields.push((
        c.model.clone(),
        compute_gradients(&c.image).unwrap(),
        lattice_through(&c.image, &c.expected, 5.0, (0.0, 90.0, 15.0)),
    ));
    for (model, field, grid) in &fields {
        let one = score_map(model, field, grid, &nb(1), usize::MAX).unwrap();
        let three = score_map(model, field, grid, &nb(3), usize::MAX).unwrap();
        for (i, (a, b)) in one.iter().zip(&three).enumerate() {
            check(b >= a, || format!("pose {i}: {b} < {a}"))?;
        }
        poses += one.len();
    }
    check(poses >= 1000, || format!("only {poses} poses"))?;

    // (b) committed clutter scene
    let field = compute_gradients(&c.image).unwrap();
    let grid = lattice_through(&c.image, &c.expected, 3.0, (0.0, 90.0, 3.0));
    let map = score_map(&c.model, &field, &grid, &nb(3), usize::MAX).unwrap();
    let truth = pose_score(&c.model, &c.expected, &field, &nb(3)).unwrap().value;
    let best_clutter = best_clutter_score(&c, &grid, &map);
    check(truth - best_clutter >= 0.1, || format!("truth {truth:.3} vs clutter {best_clutter:.3}"))?;
    let d = search_all(&c.model, &field, &grid, &nb(3))?;
    check(within(&d.pose, &c.expected, 3.0, 3.0), || format!("detected {:?}, truth {:?}", d.pose, c.expected))?;
    Ok(format!(
        "{poses} poses monotone; clutter scene truth {truth:.3} vs best clutter {best_clutter:.3}, detected within one step"
    ))
}

fn rotation() -> Outcome {
    let mut worst = (0.0f64, 0.0f64);
    let mut record = |d: &Detection, e: &Pose| {
        worst.0 = worst.0.max((d.pose.ux - e.ux).abs()).max((d.pose.uy - e.uy).abs());
        worst.1 = worst.1.max((d.pose.theta_deg() - e.theta_deg()).abs());
        within(&d.pose, e, 1.0, 1.0)
    };
    for shape in [TemplateShape::LBracket, TemplateShape::Rectangle] {
        for theta in [10.0, 37.0, 80.0] {
            let s = scene(&SceneSpec::clean(256, 256, shape, 96, PoseDeg { x: 128.0, y: 127.0, theta_deg: theta }));
            let mut cfg = SearchConfig::new(lattice_through(&s.image, &s.expected, 4.0, (0.0, 90.0, 4.0)));
            cfg.num_levels = 2;
            cfg.score_params = nb(1);
            let tp = template_pyramid(&s.truth.template, 2);
            let expected = s.truth.expected_pose(tp.level(0));
            let d = pyramid_search_all(&s, 2, &cfg)?.into_best();
            check(record(&d, &expected), || format!("{shape} at {theta}: {:?} vs {:?}", d.pose, expected))?;
        }
    }
    // default scoring on the plain lattice
    let s = scene(&SceneSpec::clean(
        256,
        256,
        TemplateShape::Rectangle,
        48,
        PoseDeg { x: 100.0, y: 60.0, theta_deg: 30.0 },
    ));
    let mut cfg =
        SearchConfig::new(PoseGrid::from_degrees((0.0, 255.0, 4.0), (0.0, 255.0, 4.0), (0.0, 90.0, 4.0)).unwrap());
    cfg.num_levels = 2;
    let expected = s.truth.expected_pose(template_pyramid(&s.truth.template, 2).level(0));
    let d = pyramid_search_all(&s, 2, &cfg)?.into_best();
    check(record(&d, &expected), || format!("(100, 60, 30): {:?} vs {:?}", d.pose, expected))?;
    Ok(format!("7 scenes, worst error {:.2} px / {:.2} deg", worst.0, worst.1))
}

fn determinism() -> Outcome {
    // criteria 1, 4, 5 and 6 already ran every search through all backends;
    // here the oracle cases run again with the other window size
    for seed in 0..24 {
        let inst = instance(seed);
        let field = compute_gradients(&inst.image).unwrap();
        search_all(&inst.model, &field, &inst.grid, &nb(if inst.nb == 1 { 3 } else { 1 }))?;
    }
    let c = scene(&clutter_spec());
    let mut cfg = SearchConfig::new(lattice_through(&c.image, &c.expected, 3.0, (0.0, 90.0, 3.0)));
    cfg.num_levels = 3;
    pyramid_search_all(&c, 3, &cfg)?;
    Ok(format!(
        "all acceptance searches bit-equal on workers 2, 4 and {} (hardware)",
        Backend::parallel(0).effective_workers()
    ))
}

fn bench() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let suite = dir.path().join("suite");
    let out = dir.path().join("bench.csv");
    let cli = |args: &[&str]| edgealign_cli::run(std::iter::once("edgealign").chain(args.iter().copied()));
    let s = |p: &Path| p.to_str().unwrap().to_string();
    check(cli(&["suite", "--out", &s(&suite)]) == 0, || "suite generation failed".into())?;
    let code = cli(&["bench", "--suite", &s(&suite), "--reps", "1", "--warmup", "0", "--out", &s(&out)]);
    check(code == 0, || format!("bench exited {code}"))?;

    let mut reader = csv::Reader::from_path(&out).map_err(|e| e.to_string())?;
    let header: Vec<String> = reader.headers().map_err(|e| e.to_string())?.iter().map(str::to_owned).collect();
    check(header == ["sample", "backend", "workers", "run", "elapsed_ms"], || format!("header {header:?}"))?;
    let records: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    check(records.len() == 7 * 2, || format!("{} rows", records.len()))?;
    let mut speedups = Vec::new();
    for pair in records.chunks(2) {
        let ms = |r: &csv::StringRecord| r[4].parse::<f64>().unwrap();
        check(ms(&pair[0]) > 0.0 && ms(&pair[1]) > 0.0, || "non-positive timing".into())?;
        check(&pair[0][1] == "serial" && &pair[1][1] == "parallel", || "row order".into())?;
        speedups.push(ms(&pair[0]) / ms(&pair[1]));
    }
    let mut sorted = speedups.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let list: Vec<String> = speedups.iter().map(|x| format!("{x:.2}")).collect();
    let summary = format!("14 rows, speedups [{}], median {median:.2}x on {threads} threads", list.join(", "));
    if threads >= 4 {
        check(median > 1.0, || summary.clone())?;
        Ok(summary)
    } else {
        Ok(format!("{summary} (speedup not asserted below 4 threads)"))
    }
}

fn formats() -> Outcome {
    // PGM: binary round-trip of byte-valued images, ASCII parse
    let mut rng = SplitMix64::new(77);
    for _ in 0..20 {
        let (w, h) = (1 + (rng.next_u64() % 40) as usize, 1 + (rng.next_u64() % 40) as usize);
        let img = Image::from_fn(w, h, |_, _| (rng.next_u64() % 256) as f64).unwrap();
        let back = load_pgm(&save_pgm(&img)).map_err(|e| e.to_string())?;
        check(back == img, || format!("{w}x{h} PGM round-trip differs"))?;
    }
    let ascii = load_pgm(b"P2\n# comment\n3 2\n255\n0 10 20\n30 40 255\n").map_err(|e| e.to_string())?;
    check(ascii.data() == [0.0, 10.0, 20.0, 30.0, 40.0, 255.0], || "P2 parse".into())?;
    let clamped = save_pgm(&Image::new(3, 1, vec![-4.0, 127.5, 300.0]).unwrap());
    check(clamped == b"P5\n3 1\n255\n\x00\x80\xff", || format!("clamp/round bytes {clamped:?}"))?;

    // PPM overlay bytes
    let img = Image::from_fn(4, 3, |x, y| (x * 10 + y) as f64).unwrap();
    let ppm = save_ppm(&img, &[(1, 2), (9, 9), (-1, 0)], [255, 0, 0]);
    let mut want = b"P6\n4 3\n255\n".to_vec();
    for y in 0..3 {
        for x in 0..4 {
            let v = (x * 10 + y) as u8;
            want.extend(if (x, y) == (1, 2) { [255, 0, 0] } else { [v, v, v] });
        }
    }
    check(ppm == want, || "PPM overlay bytes".into())?;
    let t = render_template(TemplateShape::Cross, 32).unwrap();
    let model = default_model(&t);
    let pose = Pose::new(15.3, 16.8, 0.2);
    let pts = project_model(&model, &pose);
    let ppm = save_ppm(&t, &pts, [255, 0, 0]);
    let red = ppm[13..].chunks(3).filter(|c| c == &[255, 0, 0]).count();
    let mut distinct = pts.clone();
    distinct.retain(|p| p.0 >= 0 && p.1 >= 0 && p.0 < 32 && p.1 < 32);
    distinct.sort();
    distinct.dedup();
    check(red == distinct.len(), || format!("{red} red pixels for {} projections", distinct.len()))?;

    // SceneSpec JSON round-trip
    let shapes = prop::sample::select(TemplateShape::ALL.to_vec());
    let occluder = prop::option::of((0usize..200, 0usize..200, 1usize..50, 1usize..50, -1e3f64..1e3));
    let strategy = (
        shapes,
        16usize..64,
        (-1e3f64..1e3, -1e3f64..1e3, -720f64..720.0),
        0usize..100,
        any::<u64>(),
        occluder,
        (1e-3f64..10.0, -1e3f64..1e3, 1e-3f64..5.0),
        0f64..50.0,
        any::<u64>(),
    );
    let mut runner = TestRunner::new(Config { failure_persistence: None, ..Config::with_cases(256) });
    runner
        .run(&strategy, |(shape, size, (x, y, th), segs, cseed, occ, (gain, bias, gamma), sigma, nseed)| {
            let mut spec = SceneSpec::clean(320, 240, shape, size, PoseDeg { x, y, theta_deg: th });
            spec.clutter_segments = segs;
            spec.clutter_seed = cseed;
            spec.occluder = occ.map(|(x, y, w, h, fill)| Occluder { x, y, w, h, fill });
            spec.illumination = Illumination { gain, bias, gamma };
            spec.noise_sigma = sigma;
            spec.noise_seed = nseed;
            let back = SceneSpec::from_json(&spec.to_json()).unwrap();
            prop_assert_eq!(back, spec);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("20 PGM round-trips, P2 parse, clamp bytes, PPM overlay bytes, 256 SceneSpec JSON round-trips".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("brute-force oracle equivalence", oracle),
        ("self-match identity", self_match),
        ("illumination invariance", illumination),
        ("occlusion robustness", occlusion),
        ("neighborhood clutter fix", clutter),
        ("rotation recovery", rotation),
        ("backend determinism", determinism),
        ("bench harness", bench),
        ("format fidelity", formats),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {} {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
