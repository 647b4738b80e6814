use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use paetex::metrics::{ErrorReport, ErrorRow};
use paetex::phantom::support_mask;
use paetex::{write_image, Image};
use serde::Serialize;

use crate::config::{ExperimentConfig, TextureMode};
use crate::pipeline::DeformationRun;
use crate::plot;

pub const MANIFEST_VERSION: u32 = 1;

/// File-name form of a mode label.
pub fn slug(label: &str) -> String {
    label.replace(' ', "_")
}

fn csv_error(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

fn write_rows(path: &Path, rows: &[&ErrorRow], runs: &DeformationRun) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record([
        "mode",
        "lambda",
        "aae",
        "aee",
        "aee_rel",
        "warping",
        "mask_pixels",
        "total_pixels",
        "iterations",
        "converged",
    ])
    .map_err(csv_error)?;
    for r in rows {
        let (iters, converged) = runs
            .modes
            .iter()
            .find(|m| m.label == r.mode)
            .and_then(|m| {
                m.flows
                    .iter()
                    .position(|(l, _)| *l == r.lambda)
                    .map(|k| m.iterations[k])
            })
            .unwrap_or((0, false));
        w.write_record([
            r.mode.clone(),
            r.lambda.to_string(),
            r.aae.to_string(),
            r.aee.to_string(),
            r.aee_rel.to_string(),
            r.warping.to_string(),
            r.mask_pixels.to_string(),
            r.total_pixels.to_string(),
            iters.to_string(),
            converged.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()
}

/// Table in the layout `Texture Mode,AAE,AEEabs,AEErel,Warping`.
pub fn write_table(path: &Path, rows: &[(String, [f64; 4])]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(["Texture Mode", "AAE", "AEEabs", "AEErel", "Warping"])
        .map_err(csv_error)?;
    for (mode, v) in rows {
        let mut rec = vec![mode.clone()];
        rec.extend(v.iter().map(|x| format!("{x:.4}")));
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()
}

/// Rows of `report` at `lambda`, in mode order.
pub fn table_at(report: &ErrorReport, lambda: f64) -> Vec<(String, [f64; 4])> {
    report
        .modes()
        .into_iter()
        .filter_map(|m| {
            report
                .at(&m, lambda)
                .map(|r| (m.clone(), [r.aae, r.aee, r.aee_rel, r.warping]))
        })
        .collect()
}

/// Per-measure best values over `λ`, in mode order.
pub fn table_best(report: &ErrorReport) -> Vec<(String, [f64; 4])> {
    report
        .modes()
        .into_iter()
        .filter_map(|m| report.best(&m).map(|b| (m, b)))
        .collect()
}

fn mask_image(f: &Image) -> Image {
    let mask = support_mask(f);
    Image::new(f.grid, mask.iter().map(|m| if *m { 1.0 } else { 0.0 }).collect()).expect("same grid")
}

struct Outputs<'a> {
    root: &'a Path,
    files: Vec<String>,
}

impl Outputs<'_> {
    fn path(&mut self, rel: String) -> PathBuf {
        let p = self.root.join(&rel);
        self.files.push(rel);
        p
    }
}

fn write_deformation(out: &mut Outputs, cfg: &ExperimentConfig, run: &DeformationRun) -> io::Result<()> {
    let dir = out.root.join(&run.name);
    fs::create_dir_all(dir.join("images"))?;
    let d = &run.name;
    let io_err = |e: paetex::Error| io::Error::other(e.to_string());

    for (name, img) in [
        ("phantom", &run.phantom),
        ("phantom_warped", &run.warped),
        ("support_mask", &mask_image(&run.phantom)),
    ] {
        write_image(img, out.path(format!("{d}/images/{name}.raw"))).map_err(io_err)?;
        out.files.push(format!("{d}/images/{name}.raw.json"));
    }
    for (name, values) in [("u0_x", &run.u0.ux), ("u0_y", &run.u0.uy)] {
        let img = Image::new(run.u0.grid, values.clone()).map_err(io_err)?;
        write_image(&img, out.path(format!("{d}/images/{name}.raw"))).map_err(io_err)?;
        out.files.push(format!("{d}/images/{name}.raw.json"));
    }

    let headline = cfg.headline_lambdas.first().copied();
    let support = support_mask(&run.phantom);
    for m in &run.modes {
        let s = slug(&m.label);
        write_image(&m.f1, out.path(format!("{d}/images/{s}_f1.raw"))).map_err(io_err)?;
        out.files.push(format!("{d}/images/{s}_f1.raw.json"));
        write_image(&m.f2, out.path(format!("{d}/images/{s}_f2.raw"))).map_err(io_err)?;
        out.files.push(format!("{d}/images/{s}_f2.raw.json"));

        let rows: Vec<&ErrorRow> = run.report.for_mode(&m.label).collect();
        write_rows(&out.path(format!("{d}/errors_{s}.csv")), &rows, run)?;
        fs::write(
            out.path(format!("{d}/curve_{s}.svg")),
            plot::curves(&format!("{d}: {}", m.label), &rows),
        )?;

        let shown = headline
            .and_then(|h| m.flows.iter().find(|(l, _)| ((l - h) / h).abs() < 1e-3))
            .or(m.flows.first());
        if let Some((lambda, u)) = shown {
            fs::write(
                out.path(format!("{d}/quiver_{s}.svg")),
                plot::quiver(
                    &format!("{d}: {} at lambda = {lambda}", m.label),
                    u,
                    &run.u0,
                    Some(&support),
                ),
            )?;
        }
    }

    let all: Vec<&ErrorRow> = run.report.rows.iter().collect();
    write_rows(&out.path(format!("{d}/errors_vs_lambda.csv")), &all, run)?;
    fs::write(out.path(format!("{d}/curves_combined.svg")), plot::curves(d, &all))?;
    for &h in &cfg.headline_lambdas {
        write_table(&out.path(format!("{d}/report_lambda_{h}.csv")), &table_at(&run.report, h))?;
    }
    write_table(&out.path(format!("{d}/report_best.csv")), &table_best(&run.report))?;

    let mut trace = String::new();
    for m in &run.modes {
        trace.push_str(&m.label);
        trace.push_str(": ");
        trace.push_str(&m.trace.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" -> "));
        trace.push('\n');
    }
    for (label, msg) in &run.failures {
        trace.push_str(&format!("{label}: FAILED: {msg}\n"));
    }
    fs::write(out.path(format!("{d}/trace.txt")), trace)?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    manifest_version: u32,
    tool: &'static str,
    version: &'static str,
    /// Resolved configuration: explicit lambda grid and per-mode seeds.
    config: &'a ExperimentConfig,
    files: &'a [String],
}

/// Configuration with every default that affects results made explicit.
pub fn resolved(cfg: &ExperimentConfig) -> ExperimentConfig {
    let mut out = cfg.clone();
    out.lambdas = Some(cfg.lambda_grid());
    out.reference_length = Some(cfg.reference_length());
    for m in &mut out.modes {
        if let TextureMode::Gauss { seed, .. } = m {
            if seed.is_none() {
                *seed = Some(cfg.seed);
            }
        }
    }
    out
}

/// Writes every artifact of a run under `cfg.output_dir`; returns the
/// relative paths written, manifest last.
pub fn write_run(cfg: &ExperimentConfig, runs: &[DeformationRun]) -> io::Result<Vec<String>> {
    fs::create_dir_all(&cfg.output_dir)?;
    let mut out = Outputs {
        root: &cfg.output_dir,
        files: Vec::new(),
    };
    for run in runs {
        write_deformation(&mut out, cfg, run)?;
    }
    let mut files = out.files;
    files.push("manifest.json".into());
    let manifest = Manifest {
        manifest_version: MANIFEST_VERSION,
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: &resolved(cfg),
        files: &files,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
    fs::write(cfg.output_dir.join("manifest.json"), text + "\n")?;
    Ok(files)
}
