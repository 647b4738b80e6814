//! Photoacoustic texture generation and optical-flow elastography.
//!
//! The crate simulates 2D photoacoustic measurements on a circular detector
//! array, band-limits them to produce speckle-like texture, reconstructs
//! images by time reversal and estimates displacement fields between image
//! pairs with Horn–Schunck optical flow.
//!
//! Numerical types are generic over [`Real`] (`f32` or `f64`) and default
//! to `f64`; the `*32` aliases below name the single-precision variants.

pub mod band;
pub mod bandlimit;
pub mod bessel;
pub mod error;
pub mod fft;
pub mod field;
pub mod flow;
pub mod image;
pub mod io;
pub mod metrics;
pub mod phantom;
mod real;
pub mod reconstruct;
pub mod sensor;
pub mod wave;

pub use band::BandSpec;
pub use bandlimit::{
    abel_radial, apply_bandpass, apply_spectral_mask, convolve_psf, convolve_time, irf,
    irf_kernel, make_even, psf, AbelOptions, RadialKernel, TimeKernel,
};
pub use error::{Error, Result};
pub use field::DisplacementField;
pub use flow::{default_lambda_grid, horn_schunck, lambda_sweep, FlowConfig, FlowResult};
pub use image::{relative_l2, Grid, Image};
pub use io::{read_image, read_sensor_data, write_image, write_sensor_data};
pub use metrics::{aae, aee, aee_rel, warping_error, ErrorReport, ErrorRow};
pub use phantom::{
    add_gaussian_texture, make_displacement, make_phantom, warp_image, DeformationSpec, PhantomKind,
    PhantomSpec,
};
pub use real::Real;
pub use reconstruct::{reconstruct_textured, reconstruct_time_reversal};
pub use sensor::{SensorData, SensorGeometry};
pub use wave::{propagate, simulate, wave_trace_oracle, wave_trace_oracle_fn, OracleOptions, SolverConfig};

pub type Image32 = Image<f32>;
pub type Grid32 = Grid<f32>;
pub type SensorData32 = SensorData<f32>;
pub type SensorGeometry32 = SensorGeometry<f32>;
pub type BandSpec32 = BandSpec<f32>;
pub type DisplacementField32 = DisplacementField<f32>;
