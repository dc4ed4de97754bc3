//! Interpolation operators over sets of latents.
//!
//! Three norm treatments are provided for a weighted combination
//! `s = Σ w_n z_n`:
//!
//! * **lin**: `s` itself (convex combination).
//! * **fix**: `s` rescaled to the nominal norm `√L`.
//! * **nin**: `s` rescaled to the weight-interpolated input norms
//!   `Σ w_n ‖z_n‖`.
//!
//! Any of the norm-restoring treatments can be combined with a mean
//! adjustment: each latent is split into a deterministic part `d` (zero,
//! the global mean, or per-channel means) and a noise part `e = z − d`. The
//! `d` parts are mixed linearly and only the `e` parts are renormalized,
//! which keeps a bias common to all inputs from being amplified.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::latent::{Latent, LatentSet, LatentShape, Weights};

/// Relative threshold (times `√L`) below which a combined direction is
/// considered undefined.
pub const DEGENERATE_RELATIVE_NORM: f64 = 1e-12;

/// `slerp2` falls back to linear interpolation when `sin θ` is below this.
pub const SLERP_PARALLEL_SIN: f64 = 1e-6;

/// `slerp2` rejects inputs whose angle is within this of `π`.
pub const SLERP_ANTIPODAL_MARGIN: f64 = 1e-6;

/// How the norm of the mixed (noise) part is restored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormMode {
    Lin,
    Fix,
    Nin,
}

/// How each latent is split into deterministic and noise parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeanMode {
    Zero,
    GlobalMean,
    ChannelMean,
}

impl NormMode {
    pub fn label(self) -> &'static str {
        match self {
            NormMode::Lin => "lin",
            NormMode::Fix => "fix",
            NormMode::Nin => "nin",
        }
    }
}

impl MeanMode {
    /// Short suffix: `0`, `m`, or `chm`.
    pub fn label(self) -> &'static str {
        match self {
            MeanMode::Zero => "0",
            MeanMode::GlobalMean => "m",
            MeanMode::ChannelMean => "chm",
        }
    }
}

impl FromStr for NormMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lin" => Ok(NormMode::Lin),
            "fix" => Ok(NormMode::Fix),
            "nin" => Ok(NormMode::Nin),
            other => Err(Error::InvalidMethod(format!(
                "unknown norm mode `{other}` (expected lin, fix or nin)"
            ))),
        }
    }
}

impl FromStr for MeanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0" => Ok(MeanMode::Zero),
            "m" => Ok(MeanMode::GlobalMean),
            "chm" => Ok(MeanMode::ChannelMean),
            other => Err(Error::InvalidMethod(format!(
                "unknown mean mode `{other}` (expected 0, m or chm)"
            ))),
        }
    }
}

/// A norm mode paired with a mean mode, written `fix/chm`, `nin/0`, `lin`, ...
///
/// `lin` only pairs with `0`: linear interpolation already preserves means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InterpMethod {
    norm: NormMode,
    mean: MeanMode,
}

impl InterpMethod {
    pub const LIN: InterpMethod = InterpMethod::raw(NormMode::Lin, MeanMode::Zero);
    pub const FIX: InterpMethod = InterpMethod::raw(NormMode::Fix, MeanMode::Zero);
    pub const FIX_M: InterpMethod = InterpMethod::raw(NormMode::Fix, MeanMode::GlobalMean);
    pub const FIX_CHM: InterpMethod = InterpMethod::raw(NormMode::Fix, MeanMode::ChannelMean);
    pub const NIN: InterpMethod = InterpMethod::raw(NormMode::Nin, MeanMode::Zero);
    pub const NIN_M: InterpMethod = InterpMethod::raw(NormMode::Nin, MeanMode::GlobalMean);
    pub const NIN_CHM: InterpMethod = InterpMethod::raw(NormMode::Nin, MeanMode::ChannelMean);

    /// The six norm-restoring combinations compared in the FID/CLIP study.
    pub const NORM_ADJUSTED: [InterpMethod; 6] = [
        Self::FIX,
        Self::FIX_M,
        Self::FIX_CHM,
        Self::NIN,
        Self::NIN_M,
        Self::NIN_CHM,
    ];

    const fn raw(norm: NormMode, mean: MeanMode) -> Self {
        Self { norm, mean }
    }

    pub fn new(norm: NormMode, mean: MeanMode) -> Result<Self> {
        if norm == NormMode::Lin && mean != MeanMode::Zero {
            return Err(Error::InvalidMethod(format!(
                "lin cannot be combined with mean mode `{}`",
                mean.label()
            )));
        }
        Ok(Self::raw(norm, mean))
    }

    pub fn norm_mode(&self) -> NormMode {
        self.norm
    }

    pub fn mean_mode(&self) -> MeanMode {
        self.mean
    }
}

impl fmt::Display for InterpMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.norm {
            NormMode::Lin => f.write_str("lin"),
            n => write!(f, "{}/{}", n.label(), self.mean.label()),
        }
    }
}

impl FromStr for InterpMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (norm, mean) = match s.split_once('/') {
            Some((n, m)) => (n.parse()?, m.parse()?),
            None => (s.parse()?, MeanMode::Zero),
        };
        InterpMethod::new(norm, mean)
    }
}

/// Exact split of a latent into a deterministic part and a noise part.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    deterministic: Latent,
    noise: Latent,
    mode: MeanMode,
}

impl Decomposition {
    pub fn deterministic(&self) -> &Latent {
        &self.deterministic
    }

    pub fn noise(&self) -> &Latent {
        &self.noise
    }

    pub fn mode(&self) -> MeanMode {
        self.mode
    }

    /// `d + e`.
    pub fn recombine(&self) -> Latent {
        self.deterministic
            .add(&self.noise)
            .expect("parts share a shape")
    }
}

/// Splits `z` into `d + e` with `d` chosen by `mode`.
pub fn decompose(z: &Latent, mode: MeanMode) -> Decomposition {
    let shape = z.shape();
    let deterministic = match mode {
        MeanMode::Zero => Latent::zeros(shape),
        MeanMode::GlobalMean => Latent::filled(shape, z.global_mean()),
        MeanMode::ChannelMean => Latent::from_channel_constants(shape, &z.channel_means())
            .expect("channel means are finite and one per channel"),
    };
    let noise = z.sub(&deterministic).expect("same shape");
    Decomposition {
        deterministic,
        noise,
        mode,
    }
}

/// `Σ w_n x_n` over slices, skipping zero weights so vertex weights copy
/// their input bit-exactly.
fn weighted_sum<'a, I>(len: usize, terms: I) -> Vec<f64>
where
    I: IntoIterator<Item = (f64, &'a [f64])>,
{
    let mut out: Option<Vec<f64>> = None;
    for (w, x) in terms {
        if w == 0.0 {
            continue;
        }
        match out.as_mut() {
            None => out = Some(x.iter().map(|v| w * v).collect()),
            Some(acc) => acc.iter_mut().zip(x).for_each(|(a, v)| *a += w * v),
        }
    }
    out.unwrap_or_else(|| vec![0.0; len])
}

fn check_direction(norm: f64, shape: LatentShape) -> Result<()> {
    let threshold = DEGENERATE_RELATIVE_NORM * shape.nominal_norm();
    if norm <= threshold {
        Err(Error::DegenerateDirection { norm, threshold })
    } else {
        Ok(())
    }
}

fn lerp_raw(set: &LatentSet, weights: &Weights) -> Vec<f64> {
    weighted_sum(
        set.shape().len(),
        weights
            .as_slice()
            .iter()
            .copied()
            .zip(set.iter().map(Latent::as_slice)),
    )
}

fn finish(shape: LatentShape, data: Vec<f64>) -> Result<Latent> {
    Latent::new(shape, data)
}

/// Convex combination `Σ w_n z_n`.
pub fn lerp(set: &LatentSet, weights: &Weights) -> Result<Latent> {
    set.ensure_weights(weights)?;
    finish(set.shape(), lerp_raw(set, weights))
}

/// Convex combination rescaled to norm `√L`.
///
/// Does not reproduce its inputs at vertex weights unless they already have
/// norm `√L`.
pub fn fix_norm(set: &LatentSet, weights: &Weights) -> Result<Latent> {
    set.ensure_weights(weights)?;
    let shape = set.shape();
    let sum = Latent::new(shape, lerp_raw(set, weights))?;
    let norm = sum.norm();
    check_direction(norm, shape)?;
    Ok(sum.scaled(shape.nominal_norm() / norm))
}

/// Convex combination rescaled to the interpolated norm `Σ w_n ‖z_n‖`.
pub fn nin(set: &LatentSet, weights: &Weights) -> Result<Latent> {
    set.ensure_weights(weights)?;
    let shape = set.shape();
    let sum = Latent::new(shape, lerp_raw(set, weights))?;
    let norm = sum.norm();
    check_direction(norm, shape)?;
    Ok(sum.scaled(interpolated_norm(set.iter(), weights) / norm))
}

fn interpolated_norm<'a>(latents: impl Iterator<Item = &'a Latent>, weights: &Weights) -> f64 {
    let terms: Vec<f64> = weights
        .as_slice()
        .iter()
        .zip(latents)
        .filter(|(w, _)| **w != 0.0)
        .map(|(w, z)| w * z.norm())
        .collect();
    crate::reduce::pairwise_sum(&terms)
}

/// Spherical interpolation between two latents, with the angle measured
/// between their normalized directions.
///
/// Inputs need not have unit norm; the coefficients are applied to the raw
/// inputs, so the path norm can leave the range of input norms. When
/// `sin θ < 1e-6` the inputs are treated as parallel and linearly mixed.
pub fn slerp2(p1: &Latent, p2: &Latent, t: f64) -> Result<Latent> {
    p1.shape().ensure_same(&p2.shape())?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(t));
    }
    let shape = p1.shape();
    let (n1, n2) = (p1.norm(), p2.norm());
    check_direction(n1, shape)?;
    check_direction(n2, shape)?;

    let cos = (p1.dot(p2)? / (n1 * n2)).clamp(-1.0, 1.0);
    let theta = cos.acos();
    if theta > PI - SLERP_ANTIPODAL_MARGIN {
        return Err(Error::Antipodal { angle: theta });
    }
    let sin = theta.sin();
    let (a, b) = if sin < SLERP_PARALLEL_SIN {
        (1.0 - t, t)
    } else {
        (((1.0 - t) * theta).sin() / sin, (t * theta).sin() / sin)
    };
    let data = p1
        .as_slice()
        .iter()
        .zip(p2.as_slice())
        .map(|(x, y)| a * x + b * y)
        .collect();
    finish(shape, data)
}

/// Interpolation with mean adjustment.
///
/// Each member is decomposed with `method.mean_mode()`; deterministic parts
/// are mixed linearly and the noise parts are mixed and renormalized with
/// `method.norm_mode()`. With `nin`, vertex weights return the selected input
/// exactly for every mean mode.
pub fn mean_adjusted_interp(
    set: &LatentSet,
    weights: &Weights,
    method: InterpMethod,
) -> Result<Latent> {
    set.ensure_weights(weights)?;
    match (method.norm_mode(), method.mean_mode()) {
        (NormMode::Lin, _) => lerp(set, weights),
        (NormMode::Fix, MeanMode::Zero) => fix_norm(set, weights),
        (NormMode::Nin, MeanMode::Zero) => nin(set, weights),
        (norm_mode, mean_mode) => {
            let shape = set.shape();
            let parts: Vec<Decomposition> = set.iter().map(|z| decompose(z, mean_mode)).collect();
            let w = weights.as_slice();

            let noise_sum = weighted_sum(
                shape.len(),
                w.iter().copied().zip(parts.iter().map(|p| p.noise.as_slice())),
            );
            let noise_norm = crate::reduce::sum_of_squares(&noise_sum).sqrt();
            check_direction(noise_norm, shape)?;
            let target = match norm_mode {
                NormMode::Fix => shape.nominal_norm(),
                NormMode::Nin => interpolated_norm(parts.iter().map(|p| &p.noise), weights),
                NormMode::Lin => unreachable!(),
            };
            let scale = target / noise_norm;

            // d' + scale·Σ w e  ==  scale·Σ w z + (1 − scale)·d'
            // The right-hand form returns z_k bit-exactly when scale is 1.
            let det_sum = weighted_sum(
                shape.len(),
                w.iter()
                    .copied()
                    .zip(parts.iter().map(|p| p.deterministic.as_slice())),
            );
            let mixed = lerp_raw(set, weights);
            let data = if scale == 1.0 {
                mixed
            } else {
                mixed
                    .iter()
                    .zip(&det_sum)
                    .map(|(z, d)| scale * z + (1.0 - scale) * d)
                    .collect()
            };
            finish(shape, data)
        }
    }
}

/// Uniform-weight interpolation of the whole set.
pub fn centroid(set: &LatentSet, method: InterpMethod) -> Result<Latent> {
    mean_adjusted_interp(set, &Weights::uniform(set.len())?, method)
}
