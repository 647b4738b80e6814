//! Batch runner for texture-mode elastography experiments.
//!
//! A run builds one image pair per texture mode and deformation, sweeps the
//! flow regularization weight, scores every flow against the ground-truth
//! motion, and writes CSV tables, SVG plots, raw images and a manifest that
//! reruns the experiment.

pub mod config;
pub mod oracle;
pub mod output;
pub mod pipeline;
pub mod plot;

pub use config::{ConfigError, ExperimentConfig, NamedDeformation, TextureMode};
pub use pipeline::{DeformationRun, ModeRun, Stage};

use std::io;

/// Runs every deformation of `cfg` and writes all artifacts.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<DeformationRun>, RunError> {
    cfg.validate()?;
    let mut runs = Vec::with_capacity(cfg.deformations.len());
    for def in &cfg.deformations {
        log::info!("deformation {}", def.name);
        runs.push(pipeline::run_deformation(cfg, def)?);
    }
    output::write_run(cfg, &runs)?;
    Ok(runs)
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Pipeline(#[from] paetex::Error),
    #[error("writing outputs: {0}")]
    Io(#[from] io::Error),
}
