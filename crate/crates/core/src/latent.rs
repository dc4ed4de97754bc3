//! Latent values, mixing weights, and the elementary reductions over them.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::reduce;

/// Channel × height × width extent of a latent.
///
/// Stable Diffusion 1.5 latents are `4 × 64 × 64` for 512 px images; SD 3.5
/// uses 16 channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatentShape {
    channels: usize,
    height: usize,
    width: usize,
}

impl LatentShape {
    pub fn new(channels: usize, height: usize, width: usize) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::InvalidShape {
                channels,
                height,
                width,
            });
        }
        Ok(Self {
            channels,
            height,
            width,
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Elements per channel, `H·W`.
    pub fn plane(&self) -> usize {
        self.height * self.width
    }

    /// Total dimensionality `L = C·H·W`.
    pub fn len(&self) -> usize {
        self.channels * self.plane()
    }

    /// Never true; shapes have at least one element.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat row-major index of `(channel, row, col)`.
    pub fn index(&self, channel: usize, row: usize, col: usize) -> usize {
        (channel * self.height + row) * self.width + col
    }

    /// Nominal norm `√L` of a standard-normal latent of this shape.
    pub fn nominal_norm(&self) -> f64 {
        (self.len() as f64).sqrt()
    }

    pub(crate) fn ensure_same(&self, other: &LatentShape) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: self.to_string(),
                found: other.to_string(),
            })
        }
    }
}

impl fmt::Display for LatentShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.channels, self.height, self.width)
    }
}

impl FromStr for LatentShape {
    type Err = Error;

    /// Parses `CxHxW`, e.g. `4x64x64`.
    fn from_str(s: &str) -> Result<Self> {
        let dims: Vec<&str> = s.split(['x', 'X']).collect();
        let bad = || Error::InvalidShape {
            channels: 0,
            height: 0,
            width: 0,
        };
        if dims.len() != 3 {
            return Err(bad());
        }
        let parse = |d: &str| d.trim().parse::<usize>().map_err(|_| bad());
        LatentShape::new(parse(dims[0])?, parse(dims[1])?, parse(dims[2])?)
    }
}

/// A real-valued `C×H×W` latent stored row-major as (channel, row, column).
///
/// Every element is finite; constructors reject NaN and infinities.
#[derive(Debug, Clone, PartialEq)]
pub struct Latent {
    shape: LatentShape,
    data: Vec<f64>,
}

impl Latent {
    pub fn new(shape: LatentShape, data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::DataLength {
                expected: shape.len(),
                found: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: LatentShape) -> Self {
        Self::filled(shape, 0.0)
    }

    /// # Panics
    /// If `value` is not finite.
    pub fn filled(shape: LatentShape, value: f64) -> Self {
        assert!(value.is_finite(), "fill value must be finite");
        Self {
            shape,
            data: vec![value; shape.len()],
        }
    }

    /// Builds a latent whose channel `c` is the constant `values[c]`.
    pub fn from_channel_constants(shape: LatentShape, values: &[f64]) -> Result<Self> {
        if values.len() != shape.channels() {
            return Err(Error::DataLength {
                expected: shape.channels(),
                found: values.len(),
            });
        }
        let data = values
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, shape.plane()))
            .collect();
        Self::new(shape, data)
    }

    /// Builds a latent from `f(channel, row, col)`.
    pub fn from_fn<F>(shape: LatentShape, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, usize) -> f64,
    {
        let mut data = Vec::with_capacity(shape.len());
        for c in 0..shape.channels() {
            for r in 0..shape.height() {
                for w in 0..shape.width() {
                    data.push(f(c, r, w));
                }
            }
        }
        Self::new(shape, data)
    }

    /// Wraps data known to be finite and correctly sized.
    pub(crate) fn from_parts_unchecked(shape: LatentShape, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), shape.len());
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Self { shape, data }
    }

    pub fn shape(&self) -> LatentShape {
        self.shape
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// The `H·W` values of one channel.
    pub fn channel(&self, c: usize) -> &[f64] {
        let plane = self.shape.plane();
        &self.data[c * plane..(c + 1) * plane]
    }

    /// Euclidean norm over all `L` elements.
    pub fn norm(&self) -> f64 {
        reduce::sum_of_squares(&self.data).sqrt()
    }

    /// Mean of each channel's `H·W` values.
    pub fn channel_means(&self) -> Vec<f64> {
        (0..self.shape.channels())
            .map(|c| reduce::mean(self.channel(c)))
            .collect()
    }

    /// Mean of all `L` elements.
    pub fn global_mean(&self) -> f64 {
        reduce::mean(&self.data)
    }

    pub fn dot(&self, other: &Latent) -> Result<f64> {
        self.shape.ensure_same(&other.shape)?;
        Ok(reduce::dot(&self.data, &other.data))
    }

    /// `a · self`.
    ///
    /// # Panics
    /// If the product overflows to a non-finite value.
    pub fn scaled(&self, a: f64) -> Latent {
        let data: Vec<f64> = self.data.iter().map(|v| a * v).collect();
        assert!(data.iter().all(|v| v.is_finite()), "scaling overflowed");
        Latent::from_parts_unchecked(self.shape, data)
    }

    /// Element-wise sum.
    pub fn add(&self, other: &Latent) -> Result<Latent> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Element-wise difference.
    pub fn sub(&self, other: &Latent) -> Result<Latent> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Latent, f: impl Fn(f64, f64) -> f64) -> Result<Latent> {
        self.shape.ensure_same(&other.shape)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Latent::new(self.shape, data)
    }
}

/// Nonnegative mixing weights summing to one.
///
/// Zero weights are allowed so that vertex weights `(1, 0, …, 0)` can be
/// expressed.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights(Vec<f64>);

impl Weights {
    /// Tolerance on `|Σ w − 1|`.
    pub const SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("no weights given".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidWeights(format!(
                "weight {w} is negative or not finite"
            )));
        }
        if !weights.iter().any(|&w| w > 0.0) {
            return Err(Error::InvalidWeights("all weights are zero".into()));
        }
        let sum = reduce::pairwise_sum(&weights);
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self(weights))
    }

    /// Accepts weights whose sum is within `tolerance` of one and rescales
    /// them to sum to one. Anything further off is rejected.
    pub fn normalized_within(weights: Vec<f64>, tolerance: f64) -> Result<Self> {
        let sum = reduce::pairwise_sum(&weights);
        if !sum.is_finite() || (sum - 1.0).abs() > tolerance {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {sum}, more than {tolerance} away from 1"
            )));
        }
        Self::new(weights.into_iter().map(|w| w / sum).collect())
    }

    /// `1/N` each.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidWeights("no weights given".into()));
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    /// `1` at position `k`, zero elsewhere.
    pub fn vertex(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::InvalidWeights(format!("vertex {k} out of range for {n}")));
        }
        let mut w = vec![0.0; n];
        w[k] = 1.0;
        Ok(Self(w))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// An ordered, non-empty collection of same-shape latents.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentSet {
    members: Vec<Latent>,
}

impl LatentSet {
    pub fn new(members: Vec<Latent>) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptySet)?.shape();
        for m in &members[1..] {
            first.ensure_same(&m.shape())?;
        }
        Ok(Self { members })
    }

    pub fn shape(&self) -> LatentShape {
        self.members[0].shape()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    /// Never true; sets have at least one member.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn members(&self) -> &[Latent] {
        &self.members
    }

    pub fn get(&self, n: usize) -> Option<&Latent> {
        self.members.get(n)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Latent> {
        self.members.iter()
    }

    pub fn into_members(self) -> Vec<Latent> {
        self.members
    }

    /// The first `n` members.
    pub fn prefix(&self, n: usize) -> Result<LatentSet> {
        if n == 0 {
            return Err(Error::EmptySet);
        }
        if n > self.len() {
            return Err(Error::LengthMismatch {
                latents: self.len(),
                weights: n,
            });
        }
        Ok(Self {
            members: self.members[..n].to_vec(),
        })
    }

    pub(crate) fn ensure_weights(&self, weights: &Weights) -> Result<()> {
        if weights.len() == self.len() {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                latents: self.len(),
                weights: weights.len(),
            })
        }
    }
}

impl<'a> IntoIterator for &'a LatentSet {
    type Item = &'a Latent;
    type IntoIter = std::slice::Iter<'a, Latent>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}
