//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use paetex::bandlimit::{abel_radial, make_even, psf, AbelOptions};
use paetex::flow::{default_lambda_grid, horn_schunck, lambda_sweep, FlowConfig};
use paetex::metrics::aee;
use paetex::{
    add_gaussian_texture, convolve_psf, convolve_time, irf, irf_kernel, make_displacement, make_phantom, propagate,
    reconstruct_textured, reconstruct_time_reversal, relative_l2, simulate, warp_image, BandSpec, DeformationSpec,
    Grid, Image, PhantomKind, PhantomSpec, SensorData, SensorGeometry, SolverConfig,
};
use paetex_harness::{output, run_experiment, ExperimentConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn disk_mask(grid: &Grid, radius: f64) -> Vec<bool> {
    (0..grid.len())
        .map(|k| {
            let p = grid.position(k % grid.width, k / grid.width);
            p[0].hypot(p[1]) <= radius
        })
        .collect()
}

/// Measured traces of the filtered source vs time-filtered even data.
fn c1_filtered_traces() -> Outcome {
    let r = 60.0;
    let grid: Grid = Grid::centered(128, 128, 1.0).unwrap();
    let gauss = |p: [f64; 2]| (-(p[0] * p[0] + p[1] * p[1]) / 32.0).exp();
    let f = Image::from_fn(grid, gauss);
    let geom = SensorGeometry::new([0.0, 0.0], r, 128).unwrap();
    let band = BandSpec::new(0.4 / r, 10.0 / r).unwrap();

    // the time convolution needs samples well past the comparison window
    let long = SolverConfig { total_time: Some(4.0 * r), ..SolverConfig::default() };
    let even = make_even(&simulate(&f, &geom, &long).unwrap()).unwrap();
    let kernel = irf_kernel(&band, even.dt, even.num_steps / 2);
    let rhs = convolve_time(&kernel, &even).unwrap();

    // Ψ∗f has unbounded support; the canvas covers everything that reaches a sensor by t = 2R
    let t_cmp = 2.0 * r;
    let n_canvas = (2.0 * (r + t_cmp) + 9.0) as usize | 1;
    let canvas: Grid = Grid::centered(n_canvas, n_canvas, 1.0).unwrap();
    let g = convolve_psf(&Image::from_fn(canvas, gauss), &band).unwrap();
    let lhs = propagate(&g, &geom, &SolverConfig { total_time: Some(t_cmp), ..SolverConfig::default() }).unwrap();

    let n = lhs.num_steps;
    let worst = (0..geom.num_sensors)
        .map(|j| relative_l2(lhs.trace(j), &rhs.trace(j)[rhs.time_origin..rhs.time_origin + n], None))
        .fold(0.0, f64::max);
    outcome(worst <= 0.02, format!("worst per-sensor rel. L2 {:.3}% (tol 2%)", 100.0 * worst))
}

fn c2_mirror() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let geom = SensorGeometry::new([0.0, 0.0], 10.0, 3).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let steps = rng.random_range(2..200);
        let dt = rng.random_range(0.01..1.0);
        let traces: Vec<f64> = (0..3 * steps).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = SensorData::new(geom, dt, steps, 0, traces).unwrap();
        let e = make_even(&m).unwrap();
        let o = e.time_origin as isize;
        for j in 0..3 {
            for (k, v) in e.trace(j).iter().enumerate() {
                let n = (k as isize - o).unsigned_abs();
                let want = if n < steps { m.trace(j)[n] } else { 0.0 };
                worst = worst.max((v - want).abs());
            }
        }
    }
    outcome(worst <= 1e-12, format!("1000 cases, worst deviation {worst:.2e} (tol 1e-12)"))
}

fn c3_fha() -> Outcome {
    let mut errs = Vec::new();
    for (lo, hi) in [(0.4, 10.0), (1.8, 10.0)] {
        let band = BandSpec::new(lo, hi).unwrap();
        let s: Vec<f64> = (0..401).map(|k| 20.0 / hi * k as f64 / 400.0).collect();
        let abel = abel_radial(&band, &s, AbelOptions::default()).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for (si, a) in s.iter().zip(&abel) {
            let want = irf(*si, &band);
            num += (a - want).powi(2);
            den += want * want;
        }
        errs.push((num / den).sqrt());
    }
    outcome(
        errs.iter().all(|e| *e <= 0.02),
        format!(
            "rel. L2 {:.3}% (0.4,10), {:.3}% (1.8,10) (tol 2%)",
            100.0 * errs[0],
            100.0 * errs[1]
        ),
    )
}

fn c4_psf_values() -> Outcome {
    let band = BandSpec::<f64>::new(0.4, 10.0).unwrap();
    let (p0, p1) = (psf(0.0, &band), psf(1.0, &band));
    let pass = (p0 - 7.94505).abs() <= 1e-4 && (p1 - 0.056712).abs() <= 1e-4;
    outcome(pass, format!("psf(0) = {p0:.6}, psf(1) = {p1:.6} (tol 1e-4)"))
}

fn c5_round_trip() -> Outcome {
    let r = 120.0;
    let grid: Grid = Grid::centered(256, 256, 1.0).unwrap();
    let geom = SensorGeometry::new([0.0, 0.0], r, 256).unwrap();
    let cfg = SolverConfig::default();
    let spec = PhantomSpec::new(PhantomKind::Disc { center: [0.0, 0.0], radius: r / 4.0 });
    let f = make_phantom(&spec, &grid, &geom).unwrap();
    let mask = disk_mask(&grid, 0.8 * r);
    let m = simulate(&f, &geom, &cfg).unwrap();
    let tr = reconstruct_time_reversal(&m, &grid, &cfg).unwrap();
    let e_tr = relative_l2(&tr.values, &f.values, Some(&mask));
    let band = BandSpec::new(0.4 / r, 10.0 / r).unwrap();
    let tex = reconstruct_textured(&m, &band, &grid, &cfg).unwrap();
    let e_tex = relative_l2(&tex.values, &convolve_psf(&f, &band).unwrap().values, Some(&mask));
    outcome(
        e_tr <= 0.15 && e_tex <= 0.10,
        format!(
            "time reversal {:.2}% (tol 15%), textured vs convolve_psf {:.2}% (tol 10%)",
            100.0 * e_tr,
            100.0 * e_tex
        ),
    )
}

/// White noise blurred by a Gaussian of width `sigma`, peak 128.
fn smooth_texture(n: usize, sigma: f64, seed: u64) -> Image {
    let grid: Grid = Grid::centered(n, n, 1.0).unwrap();
    let noise = add_gaussian_texture(&Image::zeros(grid), 1.0, seed).unwrap();
    let r = (3.0 * sigma).ceil() as isize;
    let taps: Vec<f64> = (-r..=r).map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let norm: f64 = taps.iter().sum();
    let blur = |src: &Image, along_x: bool| {
        let mut out = Image::zeros(grid);
        for j in 0..n {
            for i in 0..n {
                let mut acc = 0.0;
                for (t, w) in taps.iter().enumerate() {
                    let d = t as isize - r;
                    let (a, b) = if along_x { (i as isize + d, j as isize) } else { (i as isize, j as isize + d) };
                    acc += w * src.get(a.clamp(0, n as isize - 1) as usize, b.clamp(0, n as isize - 1) as usize);
                }
                out.set(i, j, acc / norm);
            }
        }
        out
    };
    let out = blur(&blur(&noise, true), false);
    out.scaled(128.0 / out.max_abs())
}

fn c6_flow() -> Outcome {
    let grid: Grid = Grid::centered(32, 24, 1.0).unwrap();
    let f1 = Image::from_fn(grid, |x| x[0]);
    let f2 = f1.map(|v| v - 1.0);
    let cfg = FlowConfig { tolerance: 1e-13, max_iterations: 20_000, ..FlowConfig::default() };
    let r = horn_schunck(&f1, &f2, &cfg).unwrap();
    let ramp = (0..grid.len())
        .map(|k| (r.field.ux[k] - 1.0).abs().max(r.field.uy[k].abs()))
        .fold(0.0, f64::max);

    let f1 = smooth_texture(96, 3.0, 7);
    let shift = DeformationSpec::RigidTranslation { shift: [2.0, 0.0] };
    let u0 = make_displacement(&shift, &f1.grid).unwrap();
    // f2(x) = f1(x + u0) moves content by −u0; the solver returns −u0
    let f2 = warp_image(&f1, &u0).unwrap();
    let best = lambda_sweep(&f1, &f2, &default_lambda_grid(), &FlowConfig::default())
        .unwrap()
        .into_iter()
        .map(|r| (r.lambda, aee(&r.field.negated(), &u0).unwrap()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    outcome(
        ramp <= 1e-6 && best.1 <= 0.3,
        format!(
            "ramp max deviation {ramp:.2e} (tol 1e-6), texture AEE {:.3} px at lambda {:.4} (tol 0.3)",
            best.1, best.0
        ),
    )
}

fn csv_reports(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for def in fs::read_dir(dir).unwrap() {
        let def = def.unwrap().path();
        if !def.is_dir() {
            continue;
        }
        for f in fs::read_dir(&def).unwrap() {
            let p = f.unwrap().path();
            if p.extension().is_some_and(|e| e == "csv") {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn c7_elastography(out: &Path) -> Outcome {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/branching.json");
    let mut cfg = ExperimentConfig::load(config).unwrap();
    cfg.output_dir = out.to_path_buf();
    let runs = run_experiment(&cfg).unwrap();

    let mut pass = true;
    let mut detail = Vec::new();
    for run in &runs {
        if !run.failures.is_empty() {
            pass = false;
            detail.push(format!("{}: failed modes {:?}", run.name, run.failures));
            continue;
        }
        let best = output::table_best(&run.report);
        let get = |label: &str| best.iter().find(|(m, _)| m == label).map(|(_, v)| *v).unwrap();
        let none = get("none");
        for (label, v) in &best {
            if label.starts_with("band") {
                let (rel, warp) = (none[2] / v[2], none[3] / v[3]);
                pass &= rel >= 2.0 && warp >= 2.0;
                detail.push(format!("{} {label}: AEErel x{rel:.2} warping x{warp:.2}", run.name));
            } else if label.starts_with("gauss") {
                let dev = (0..4).map(|k| ((v[k] - none[k]) / none[k]).abs()).fold(0.0, f64::max);
                pass &= dev <= 0.05;
                detail.push(format!("{} {label}: max deviation from none {:.1}%", run.name, 100.0 * dev));
            }
        }
    }
    outcome(pass, format!("{} (need band x2 on AEErel and warping, gauss within 5%)", detail.join("; ")))
}

fn c8_determinism(first: &Path, scratch: &Path) -> Outcome {
    let manifest = first.join("manifest.json");
    let mut reports = Vec::new();
    for k in 0..2 {
        let mut cfg = ExperimentConfig::load(&manifest).unwrap();
        cfg.output_dir = scratch.join(format!("rerun{k}"));
        run_experiment(&cfg).unwrap();
        reports.push(csv_reports(&cfg.output_dir));
    }
    let original = csv_reports(first);
    let same = reports[0] == reports[1] && reports[0] == original;
    outcome(
        same && !original.is_empty(),
        format!("{} CSV files, two reruns from manifest.json byte-identical to each other and to the original run: {same}", original.len()),
    )
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let branching = tmp.path().join("branching");
    let budget = |mins: u64| Duration::from_secs(60 * mins);
    type Check<'a> = Box<dyn FnOnce() -> Outcome + 'a>;
    let checks: Vec<(&str, Duration, Check)> = vec![
        ("1 filtered-source traces", budget(2), Box::new(c1_filtered_traces)),
        ("2 even-extension mirror", budget(1), Box::new(c2_mirror)),
        ("3 Fourier-Abel-Hankel closure", budget(1), Box::new(c3_fha)),
        ("4 PSF spot values", Duration::from_secs(1), Box::new(c4_psf_values)),
        ("5 reconstruction round trip", budget(5), Box::new(c5_round_trip)),
        ("6 flow solver", budget(1), Box::new(c6_flow)),
        ("7 elastography benefit", budget(20), Box::new(|| c7_elastography(&branching))),
        ("8 determinism", budget(40), Box::new(|| c8_determinism(&branching, tmp.path()))),
    ];
    let mut failed = 0;
    for (name, limit, check) in checks {
        let t0 = Instant::now();
        let o = check();
        let took = t0.elapsed();
        let pass = o.pass && took <= limit;
        failed += usize::from(!pass);
        println!(
            "{} criterion {name}: {} [{:.1}s, budget {}s]",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} of 8 criteria failed");
        std::process::exit(1);
    }
    println!("all 8 criteria passed");
}
