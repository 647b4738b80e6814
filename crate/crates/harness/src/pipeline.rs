use std::fmt;

use paetex::flow::lambda_sweep;
use paetex::metrics::{ErrorReport, ErrorRow, EPS_MAG};
use paetex::{
    add_gaussian_texture, make_displacement, make_phantom, reconstruct_textured, reconstruct_time_reversal,
    simulate, warp_image, DisplacementField, Image, SensorData,
};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, NamedDeformation, TextureMode};

/// Pipeline stage, as recorded in a mode's trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    /// Forward acoustic simulation of the reference (0) or deformed (1) frame.
    Simulate(u8),
    Reconstruct(u8),
    ReconstructTextured(u8),
    AddTexture,
    /// Warping of an already textured image with the ground-truth motion.
    AdvectTexture,
    Normalize,
    Flow,
}

impl Stage {
    pub fn is_acoustic(self) -> bool {
        matches!(
            self,
            Self::Simulate(_) | Self::Reconstruct(_) | Self::ReconstructTextured(_)
        )
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Simulate(k) => write!(f, "simulate f{}", k + 1),
            Self::Reconstruct(k) => write!(f, "reconstruct f{}", k + 1),
            Self::ReconstructTextured(k) => write!(f, "reconstruct_textured f{}", k + 1),
            Self::AddTexture => f.write_str("add_gaussian_texture"),
            Self::AdvectTexture => f.write_str("warp textured image"),
            Self::Normalize => f.write_str("normalize intensities"),
            Self::Flow => f.write_str("lambda sweep"),
        }
    }
}

pub struct ModeRun {
    pub label: String,
    pub f1: Image,
    pub f2: Image,
    /// Estimated motion per `λ`, in the same convention as the ground truth.
    pub flows: Vec<(f64, DisplacementField)>,
    pub iterations: Vec<(usize, bool)>,
    pub trace: Vec<Stage>,
}

pub struct DeformationRun {
    pub name: String,
    pub phantom: Image,
    pub warped: Image,
    pub u0: DisplacementField,
    pub report: ErrorReport,
    pub modes: Vec<ModeRun>,
    /// Modes that were aborted, with the diagnostic.
    pub failures: Vec<(String, String)>,
}

struct Frames {
    m1: SensorData,
    m2: SensorData,
}

fn image_pair(
    cfg: &ExperimentConfig,
    mode: &TextureMode,
    phantom: &Image,
    u0: &DisplacementField,
    frames: Option<&Frames>,
    trace: &mut Vec<Stage>,
) -> paetex::Result<(Image, Image)> {
    let grid = phantom.grid;
    let scale_for = |f1: &Image| match cfg.intensity_scale {
        Some(s) if f1.max_abs() > 0.0 => s / f1.max_abs(),
        _ => 1.0,
    };
    match mode {
        TextureMode::Gauss { alpha, .. } => {
            let base = match cfg.intensity_scale {
                Some(_) => {
                    trace.push(Stage::Normalize);
                    phantom.scaled(scale_for(phantom))
                }
                None => phantom.clone(),
            };
            let f1 = add_gaussian_texture(&base, *alpha, cfg.gauss_seed(mode))?;
            trace.push(Stage::AddTexture);
            let f2 = warp_image(&f1, u0)?;
            trace.push(Stage::AdvectTexture);
            Ok((f1, f2))
        }
        TextureMode::None { .. } | TextureMode::Band { .. } => {
            let frames = frames.expect("acoustic frames are simulated for acoustic modes");
            trace.extend([Stage::Simulate(0), Stage::Simulate(1)]);
            let (f1, f2) = match mode.band(cfg.reference_length()) {
                None => {
                    let f1 = reconstruct_time_reversal(&frames.m1, &grid, &cfg.solver)?;
                    trace.push(Stage::Reconstruct(0));
                    let f2 = reconstruct_time_reversal(&frames.m2, &grid, &cfg.solver)?;
                    trace.push(Stage::Reconstruct(1));
                    (f1, f2)
                }
                Some(band) => {
                    let f1 = reconstruct_textured(&frames.m1, &band, &grid, &cfg.solver)?;
                    trace.push(Stage::ReconstructTextured(0));
                    let f2 = reconstruct_textured(&frames.m2, &band, &grid, &cfg.solver)?;
                    trace.push(Stage::ReconstructTextured(1));
                    (f1, f2)
                }
            };
            if cfg.intensity_scale.is_some() {
                trace.push(Stage::Normalize);
                let s = scale_for(&f1);
                Ok((f1.scaled(s), f2.scaled(s)))
            } else {
                Ok((f1, f2))
            }
        }
    }
}

fn run_mode(
    cfg: &ExperimentConfig,
    mode: &TextureMode,
    phantom: &Image,
    u0: &DisplacementField,
    frames: Option<&Frames>,
    lambdas: &[f64],
) -> paetex::Result<(ModeRun, Vec<ErrorRow>)> {
    let label = mode.label();
    let mut trace = Vec::new();
    let (f1, f2) = image_pair(cfg, mode, phantom, u0, frames, &mut trace)?;
    let results = lambda_sweep(&f1, &f2, lambdas, &cfg.flow)?;
    trace.push(Stage::Flow);
    let mut rows = Vec::with_capacity(results.len());
    let mut flows = Vec::with_capacity(results.len());
    let mut iterations = Vec::with_capacity(results.len());
    for r in results {
        // The flow solves f2 + ∇f1·u ≈ f1, while the warp convention is
        // f2(x) = f1(x + u0(x)).
        let u = r.field.negated();
        rows.push(ErrorRow::evaluate(&label, r.lambda, &f1, &f2, &u, u0, EPS_MAG)?);
        iterations.push((r.iterations, r.converged));
        flows.push((r.lambda, u));
    }
    log::info!("mode {label}: {}", trace.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" -> "));
    Ok((
        ModeRun {
            label,
            f1,
            f2,
            flows,
            iterations,
            trace,
        },
        rows,
    ))
}

/// All texture modes for one deformation.
pub fn run_deformation(cfg: &ExperimentConfig, def: &NamedDeformation) -> paetex::Result<DeformationRun> {
    let grid = cfg.grid().map_err(|e| paetex::Error::InvalidInput(e.to_string()))?;
    let geom = cfg.geometry().map_err(|e| paetex::Error::InvalidInput(e.to_string()))?;
    let phantom = make_phantom(&cfg.phantom, &grid, &geom)?;
    let u0 = make_displacement(&def.deformation, &grid)?;
    let warped = warp_image(&phantom, &u0)?;
    let lambdas = cfg.lambda_grid();

    // Both acoustic modes share the same forward data.
    let frames = if cfg.modes.iter().any(TextureMode::uses_acoustics) {
        log::info!("{}: simulating reference and deformed frames", def.name);
        let sims: Vec<_> = [&phantom, &warped]
            .par_iter()
            .map(|f| simulate(f, &geom, &cfg.solver))
            .collect();
        let mut sims = sims.into_iter();
        match (sims.next().expect("two frames"), sims.next().expect("two frames")) {
            (Ok(m1), Ok(m2)) => Some(Ok(Frames { m1, m2 })),
            (Err(e), _) | (_, Err(e)) => Some(Err(e.to_string())),
        }
    } else {
        None
    };

    let outcomes: Vec<_> = cfg
        .modes
        .par_iter()
        .map(|mode| {
            let frames = match (&frames, mode.uses_acoustics()) {
                (Some(Err(e)), true) => return Err(format!("forward simulation failed: {e}")),
                (Some(Ok(fr)), true) => Some(fr),
                _ => None,
            };
            run_mode(cfg, mode, &phantom, &u0, frames, &lambdas).map_err(|e| e.to_string())
        })
        .collect();

    let mut report = ErrorReport::default();
    let mut modes = Vec::new();
    let mut failures = Vec::new();
    for (mode, outcome) in cfg.modes.iter().zip(outcomes) {
        match outcome {
            Ok((run, rows)) => {
                for row in rows {
                    report.push(row)?;
                }
                modes.push(run);
            }
            Err(msg) => {
                log::error!("{}: mode {} aborted: {msg}", def.name, mode.label());
                failures.push((mode.label(), msg));
            }
        }
    }
    Ok(DeformationRun {
        name: def.name.clone(),
        phantom,
        warped,
        u0,
        report,
        modes,
        failures,
    })
}
