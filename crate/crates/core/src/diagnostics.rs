//! Bias-amplification measurements on synthetic latents.
//!
//! For latents `z_n = d + e_n` with a small common bias `d` and i.i.d.
//! standard-normal noise, the plain-centroid noise part has norm close to
//! `√(L/N)`. Rescaling the centroid to `√L` therefore multiplies `d` by
//! roughly `√N`. The experiment here measures that growth per channel and
//! checks that mean adjustment removes it.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interp::{centroid, mean_adjusted_interp, InterpMethod};
use crate::latent::{LatentSet, LatentShape, Weights};
use crate::reduce;
use crate::synth::{make_biased_set, BiasSpec, SeedSpec};

/// Expected amplification of a common bias by a norm-restoring centroid of
/// `n` latents: `√n`.
pub fn predicted_amplification(n: usize) -> f64 {
    (n as f64).sqrt()
}

/// Centroid channel means divided by the injected per-channel bias.
///
/// Channels without injected bias yield `None`.
pub fn measured_amplification(
    set: &LatentSet,
    method: InterpMethod,
    bias: &BiasSpec,
) -> Result<Vec<Option<f64>>> {
    let injected = bias.channel_bias(set.shape())?;
    let means = centroid(set, method)?.channel_means();
    Ok(ratio(&means, &injected))
}

fn ratio(means: &[f64], injected: &[f64]) -> Vec<Option<f64>> {
    means
        .iter()
        .zip(injected)
        .map(|(m, b)| (*b != 0.0).then(|| m / b))
        .collect()
}

/// Least-squares slope of `y = k·x` (no intercept).
pub fn through_origin_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let sxy = reduce::dot(xs, ys);
    let sxx = reduce::sum_of_squares(xs);
    sxy / sxx
}

/// Parameters of [`bias_growth_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub shape: LatentShape,
    pub bias: BiasSpec,
    /// Set sizes, strictly increasing, each at least 2.
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub methods: Vec<InterpMethod>,
    pub seed: u64,
}

impl ExperimentConfig {
    /// SD 1.5 geometry (`4×64×64`), a 0.02 global bias, and
    /// `N ∈ {2, 8, 32, 48, 64, 96}`. `b² = 4e-4` stays well below `1/96`.
    pub fn desk_scale(methods: Vec<InterpMethod>, trials: usize, seed: u64) -> Self {
        Self {
            shape: LatentShape::new(4, 64, 64).expect("valid shape"),
            bias: BiasSpec::GlobalConstant(0.02),
            n_values: vec![2, 8, 32, 48, 64, 96],
            trials,
            methods,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_values.is_empty() {
            return bad("no set sizes given".into());
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n < 2) {
            return bad(format!("set size {n} is below 2"));
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return bad("set sizes must be strictly increasing".into());
        }
        if self.trials == 0 {
            return bad("need at least one trial".into());
        }
        if self.methods.is_empty() {
            return bad("no methods given".into());
        }
        self.bias.validate(self.shape)
    }
}

/// Per-method outcome of [`bias_growth_experiment`].
///
/// Matrices are indexed `[n_index][channel]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplificationReport {
    pub method: InterpMethod,
    pub n_values: Vec<usize>,
    pub channel_bias: Vec<f64>,
    /// Centroid channel means averaged over trials.
    pub channel_means: Vec<Vec<f64>>,
    /// Sample standard deviation of the centroid channel means across trials.
    pub channel_std: Vec<Vec<f64>>,
    /// `√N` per entry of `n_values`.
    pub predicted: Vec<f64>,
    /// Averaged channel mean over injected channel bias; `None` where no
    /// bias was injected.
    pub amplification: Vec<Vec<Option<f64>>>,
    /// Through-origin slope of channel mean against `√N`, per channel.
    pub slopes: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl AmplificationReport {
    pub fn channels(&self) -> usize {
        self.channel_bias.len()
    }

    /// Standard error of the averaged channel mean.
    pub fn std_error(&self, n_index: usize, channel: usize) -> f64 {
        self.channel_std[n_index][channel] / (self.trials as f64).sqrt()
    }

    pub fn n_index(&self, n: usize) -> Option<usize> {
        self.n_values.iter().position(|&v| v == n)
    }
}

/// Measures how centroid channel means grow with the set size.
///
/// Each trial `t` draws one set of `max(N)` biased latents from the seed
/// family `SeedSpec::new(seed, 0).derive(t)`; every `N` uses that set's
/// first `N` members and every method sees the same sets. Trials run in
/// parallel and are reduced pairwise in trial order, so reports are
/// identical across thread counts.
pub fn bias_growth_experiment(config: &ExperimentConfig) -> Result<Vec<AmplificationReport>> {
    config.validate()?;
    let max_n = *config.n_values.last().expect("validated non-empty");
    let root = SeedSpec::new(config.seed, 0);

    // [trial][method][n_index][channel]
    let per_trial: Vec<Vec<Vec<Vec<f64>>>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(config, max_n, root.derive(t)))
        .collect::<Result<_>>()?;

    let injected = config.bias.channel_bias(config.shape)?;
    let channels = config.shape.channels();
    let predicted: Vec<f64> = config.n_values.iter().map(|&n| predicted_amplification(n)).collect();

    let reports = config
        .methods
        .iter()
        .enumerate()
        .map(|(mi, &method)| {
            let mut channel_means = Vec::with_capacity(config.n_values.len());
            let mut channel_std = Vec::with_capacity(config.n_values.len());
            for ni in 0..config.n_values.len() {
                let (means, stds): (Vec<f64>, Vec<f64>) = (0..channels)
                    .map(|c| {
                        let samples: Vec<f64> =
                            per_trial.iter().map(|trial| trial[mi][ni][c]).collect();
                        (reduce::mean(&samples), reduce::sample_std(&samples))
                    })
                    .unzip();
                channel_means.push(means);
                channel_std.push(stds);
            }
            let slopes = (0..channels)
                .map(|c| {
                    let ys: Vec<f64> = channel_means.iter().map(|m| m[c]).collect();
                    through_origin_slope(&predicted, &ys)
                })
                .collect();
            let amplification = channel_means.iter().map(|m| ratio(m, &injected)).collect();
            AmplificationReport {
                method,
                n_values: config.n_values.clone(),
                channel_bias: injected.clone(),
                channel_means,
                channel_std,
                predicted: predicted.clone(),
                amplification,
                slopes,
                trials: config.trials,
                seed: config.seed,
            }
        })
        .collect();
    Ok(reports)
}

fn run_trial(
    config: &ExperimentConfig,
    max_n: usize,
    seed: SeedSpec,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let mut set = make_biased_set(max_n, config.shape, &config.bias, seed)?.into_members();
    let mut out = vec![vec![Vec::new(); config.n_values.len()]; config.methods.len()];
    // Largest N first so the member list only ever shrinks.
    for (ni, &n) in config.n_values.iter().enumerate().rev() {
        set.truncate(n);
        let prefix = LatentSet::new(std::mem::take(&mut set))?;
        for (mi, &method) in config.methods.iter().enumerate() {
            out[mi][ni] = centroid(&prefix, method)?.channel_means();
        }
        set = prefix.into_members();
    }
    Ok(out)
}

/// Norm of the interpolation result at each weight vector of `grid`.
pub fn norm_profile(
    set: &LatentSet,
    grid: &[Weights],
    method: InterpMethod,
) -> Result<Vec<(Weights, f64)>> {
    grid.iter()
        .map(|w| Ok((w.clone(), mean_adjusted_interp(set, w, method)?.norm())))
        .collect()
}

/// Two-input weight grid `(1 − t, t)` at `steps` uniformly spaced `t`.
pub fn pairwise_grid(steps: usize) -> Result<Vec<Weights>> {
    if steps < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 steps, got {steps}")));
    }
    (0..steps)
        .map(|i| {
            let t = i as f64 / (steps - 1) as f64;
            Weights::new(vec![1.0 - t, t])
        })
        .collect()
}
