//! Interpolation of diffusion-model latents.
//!
//! Mixing many inverted latents with a norm-restoring interpolator amplifies
//! any bias they share by roughly `√N`, which shows up as degenerate images.
//! This crate provides the interpolators (`lin`, `fix`, `nin`, `slerp2`), the
//! mean-adjusted variants that keep the shared bias out of the
//! renormalization, a synthetic-latent generator, and a harness that measures
//! the amplification.
//!
//! ```
//! use latentmix::{centroid, make_biased_set, BiasSpec, InterpMethod, LatentShape, SeedSpec};
//!
//! let shape = LatentShape::new(4, 32, 32)?;
//! let set = make_biased_set(64, shape, &BiasSpec::GlobalConstant(0.05), SeedSpec::new(1, 0))?;
//!
//! let plain = centroid(&set, InterpMethod::FIX)?.channel_means();
//! let adjusted = centroid(&set, InterpMethod::FIX_CHM)?.channel_means();
//! // the plain centroid pushes the 0.05 bias towards 8 × 0.05
//! assert!(plain.iter().all(|m| *m > 0.3));
//! assert!(adjusted.iter().all(|m| (m - 0.05).abs() < 0.01));
//! # Ok::<(), latentmix::Error>(())
//! ```

pub mod csv;
pub mod diagnostics;
mod error;
pub mod interp;
pub mod latent;
pub mod latf;
pub mod reduce;
pub mod synth;

pub use diagnostics::{
    bias_growth_experiment, measured_amplification, norm_profile, predicted_amplification,
    AmplificationReport, ExperimentConfig,
};
pub use error::{Error, Result};
pub use interp::{
    centroid, decompose, fix_norm, lerp, mean_adjusted_interp, nin, slerp2, Decomposition,
    InterpMethod, MeanMode, NormMode,
};
pub use latent::{Latent, LatentSet, LatentShape, Weights};
pub use latf::{read_latents, write_latents, Dtype, LatfError};
pub use synth::{
    apply_region_offset, make_biased_set, sample_gaussian_latent, toy2d_paths, BiasSpec, Region,
    SeedSpec, Toy2dPaths,
};

// The guide under book/ is compiled and run as doctests of this crate.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/latents.md")]
    mod latents {}
    #[doc = include_str!("../../../book/src/interpolation.md")]
    mod interpolation {}
    #[doc = include_str!("../../../book/src/mean-adjustment.md")]
    mod mean_adjustment {}
    #[doc = include_str!("../../../book/src/bias-amplification.md")]
    mod bias_amplification {}
    #[doc = include_str!("../../../book/src/synthetic-latents.md")]
    mod synthetic_latents {}
    #[doc = include_str!("../../../book/src/latf.md")]
    mod latf {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
