//! Synthetic latents: i.i.d. noise, bias-plus-noise sets, region offsets, and
//! the two-dimensional toy paths.
//!
//! # Random streams
//!
//! Every random value comes from a [`ChaCha8Rng`] seeded with
//! `SeedSpec::base_seed` (via `seed_from_u64`) and switched to stream
//! `SeedSpec::stream_index` (via `set_stream`). ChaCha provides 2^64
//! independent streams per seed. Standard-normal variates are drawn with the
//! ziggurat sampler of `rand_distr::StandardNormal`.
//!
//! Output is bit-identical for identical arguments within one build of this
//! crate. Values are not promised to match other implementations or other
//! versions of the `rand` crates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::interp::{fix_norm, lerp, nin, slerp2};
use crate::latent::{Latent, LatentSet, LatentShape, Weights};

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SeedSpec {
    pub base_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(base_seed: u64, stream_index: u64) -> Self {
        Self {
            base_seed,
            stream_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base_seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// Same base seed, stream shifted by `offset`.
    pub fn stream(&self, offset: u64) -> SeedSpec {
        SeedSpec::new(self.base_seed, self.stream_index.wrapping_add(offset))
    }

    /// A new base seed derived from this spec and `label` by SplitMix64
    /// mixing, with stream index zero. Used to give each Monte Carlo trial its
    /// own family of streams.
    pub fn derive(&self, label: u64) -> SeedSpec {
        let mut x = self.base_seed;
        for word in [self.stream_index, label] {
            x = splitmix64(x ^ splitmix64(word));
        }
        SeedSpec::new(x, 0)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// L i.i.d. standard-normal values.
pub fn sample_gaussian_latent(shape: LatentShape, seed: SeedSpec) -> Latent {
    let mut rng = seed.rng();
    let data = (0..shape.len())
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    Latent::from_parts_unchecked(shape, data)
}

/// Half-open rectangle of rows and columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub rows: std::ops::Range<usize>,
    pub cols: std::ops::Range<usize>,
}

impl Region {
    pub fn new(rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        Self { rows, cols }
    }

    /// The top `⌊H/4⌋` rows across the full width.
    pub fn top_quarter(shape: LatentShape) -> Self {
        Self::new(0..shape.height() / 4, 0..shape.width())
    }

    pub fn area(&self) -> usize {
        self.rows.len() * self.cols.len()
    }

    fn check(&self, shape: LatentShape) -> Result<()> {
        let fits = self.rows.start <= self.rows.end
            && self.cols.start <= self.cols.end
            && self.rows.end <= shape.height()
            && self.cols.end <= shape.width();
        if fits {
            Ok(())
        } else {
            Err(Error::RegionOutOfBounds {
                rows: self.rows.clone(),
                cols: self.cols.clone(),
                height: shape.height(),
                width: shape.width(),
            })
        }
    }
}

/// The deterministic component injected into synthetic latents.
#[derive(Debug, Clone, PartialEq)]
pub enum BiasSpec {
    None,
    /// The same constant added to every element.
    GlobalConstant(f64),
    /// One constant per channel.
    PerChannel(Vec<f64>),
    /// Per-channel constants added inside a spatial region only.
    RegionOffset { region: Region, offsets: Vec<f64> },
}

impl BiasSpec {
    /// Offsets `(−b, +b, 0, …)` on the top quarter: channel 0 goes down and
    /// channel 1 up by the same amount, so the global mean is unchanged.
    pub fn balanced_region(shape: LatentShape, b: f64) -> Result<Self> {
        if shape.channels() < 2 {
            return Err(Error::InvalidBias(
                "balanced offsets need at least two channels".into(),
            ));
        }
        let mut offsets = vec![0.0; shape.channels()];
        offsets[0] = -b;
        offsets[1] = b;
        Ok(BiasSpec::RegionOffset {
            region: Region::top_quarter(shape),
            offsets,
        })
    }

    pub fn validate(&self, shape: LatentShape) -> Result<()> {
        let check_len = |v: &[f64]| {
            if v.len() != shape.channels() {
                return Err(Error::InvalidBias(format!(
                    "{} channel values for {} channels",
                    v.len(),
                    shape.channels()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidBias("non-finite channel value".into()));
            }
            Ok(())
        };
        match self {
            BiasSpec::None => Ok(()),
            BiasSpec::GlobalConstant(b) if b.is_finite() => Ok(()),
            BiasSpec::GlobalConstant(_) => Err(Error::InvalidBias("non-finite constant".into())),
            BiasSpec::PerChannel(v) => check_len(v),
            BiasSpec::RegionOffset { region, offsets } => {
                check_len(offsets)?;
                region.check(shape)
            }
        }
    }

    /// The bias as a latent `d`.
    pub fn deterministic_part(&self, shape: LatentShape) -> Result<Latent> {
        self.validate(shape)?;
        match self {
            BiasSpec::None => Ok(Latent::zeros(shape)),
            BiasSpec::GlobalConstant(b) => Ok(Latent::filled(shape, *b)),
            BiasSpec::PerChannel(v) => Latent::from_channel_constants(shape, v),
            BiasSpec::RegionOffset { .. } => apply_region_offset(&Latent::zeros(shape), self),
        }
    }

    /// Mean of the bias over each channel.
    pub fn channel_bias(&self, shape: LatentShape) -> Result<Vec<f64>> {
        self.validate(shape)?;
        Ok(match self {
            BiasSpec::None => vec![0.0; shape.channels()],
            BiasSpec::GlobalConstant(b) => vec![*b; shape.channels()],
            BiasSpec::PerChannel(v) => v.clone(),
            BiasSpec::RegionOffset { region, offsets } => {
                let frac = region.area() as f64 / shape.plane() as f64;
                offsets.iter().map(|o| o * frac).collect()
            }
        })
    }
}

/// `n` latents `d + e_k`, where member `k` draws its noise from
/// `seed.stream(k)`. Sets built with the same seed and different `n` share
/// their leading members.
pub fn make_biased_set(
    n: usize,
    shape: LatentShape,
    bias: &BiasSpec,
    seed: SeedSpec,
) -> Result<LatentSet> {
    if n == 0 {
        return Err(Error::EmptySet);
    }
    let d = bias.deterministic_part(shape)?;
    let members = (0..n as u64)
        .map(|k| {
            let e = sample_gaussian_latent(shape, seed.stream(k));
            if matches!(bias, BiasSpec::None) {
                Ok(e)
            } else {
                e.add(&d)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    LatentSet::new(members)
}

/// Adds a [`BiasSpec::RegionOffset`] to `z` inside the region only.
pub fn apply_region_offset(z: &Latent, bias: &BiasSpec) -> Result<Latent> {
    let BiasSpec::RegionOffset { region, offsets } = bias else {
        return Err(Error::InvalidBias("expected a region offset".into()));
    };
    let shape = z.shape();
    bias.validate(shape)?;
    let mut data = z.as_slice().to_vec();
    for (c, &offset) in offsets.iter().enumerate() {
        for r in region.rows.clone() {
            for col in region.cols.clone() {
                data[shape.index(c, r, col)] += offset;
            }
        }
    }
    Latent::new(shape, data)
}

/// Points along the four two-input paths of the toy example.
#[derive(Debug, Clone, PartialEq)]
pub struct Toy2dPaths {
    pub t: Vec<f64>,
    pub lin: Vec<[f64; 2]>,
    pub fix: Vec<[f64; 2]>,
    pub slerp: Vec<[f64; 2]>,
    pub nin: Vec<[f64; 2]>,
}

impl Toy2dPaths {
    /// Default inputs: 90° apart with norms 1.8 and 1.0, on either side of
    /// the nominal radius √2, so that all four paths separate.
    pub const DEFAULT_Z1: [f64; 2] = [1.8, 0.0];
    pub const DEFAULT_Z2: [f64; 2] = [0.0, 1.0];
}

/// Traces lin, fix, slerp and nin between `z1` and `z2` at `steps` uniformly
/// spaced `t ∈ [0, 1]`, treating the points as latents with `L = 2`.
pub fn toy2d_paths(z1: [f64; 2], z2: [f64; 2], steps: usize) -> Result<Toy2dPaths> {
    if steps < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 steps, got {steps}")));
    }
    let shape = LatentShape::new(1, 1, 2)?;
    let p1 = Latent::new(shape, z1.to_vec())?;
    let p2 = Latent::new(shape, z2.to_vec())?;
    let set = LatentSet::new(vec![p1.clone(), p2.clone()])?;
    let point = |z: Latent| [z.as_slice()[0], z.as_slice()[1]];

    let mut paths = Toy2dPaths {
        t: Vec::with_capacity(steps),
        lin: Vec::with_capacity(steps),
        fix: Vec::with_capacity(steps),
        slerp: Vec::with_capacity(steps),
        nin: Vec::with_capacity(steps),
    };
    for i in 0..steps {
        let t = i as f64 / (steps - 1) as f64;
        let w = Weights::new(vec![1.0 - t, t])?;
        paths.t.push(t);
        paths.lin.push(point(lerp(&set, &w)?));
        paths.fix.push(point(fix_norm(&set, &w)?));
        paths.slerp.push(point(slerp2(&p1, &p2, t)?));
        paths.nin.push(point(nin(&set, &w)?));
    }
    Ok(paths)
}
