//! Seeded generators for the synthetic benchmark families.
//!
//! Every family draws `t_0 = 0 < t_1 < … < t_49` with floored Gaussian
//! increments; the series has length `t_49` and the 48 interior stamps are
//! the ground-truth change points. The samples come from
//! `y(t) = a1·y(t−1) + a2·y(t−2) + ε_t` with `y(1) = y(2) = 0`, run as a single
//! recursion across segments, except for the Gaussian-mixture family which
//! is piecewise iid.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    JumpingMean,
    ScalingVariance,
    ChangingCoefficients,
    GaussianMixtures,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::JumpingMean,
        Family::ScalingVariance,
        Family::ChangingCoefficients,
        Family::GaussianMixtures,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Family::JumpingMean => "jm",
            Family::ScalingVariance => "sv",
            Family::ChangingCoefficients => "cc",
            Family::GaussianMixtures => "gm",
        }
    }

    /// Segment-length distribution of the family.
    pub fn segment_spec(self, seed: u64) -> SegmentSpec {
        match self {
            Family::ChangingCoefficients => SegmentSpec {
                family: self,
                seed,
                stamps: DEFAULT_STAMPS,
                mean: 1000.0,
                std: 10.0,
            },
            _ => SegmentSpec {
                family: self,
                seed,
                stamps: DEFAULT_STAMPS,
                mean: 100.0,
                std: 10f64.sqrt(),
            },
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jm" => Ok(Family::JumpingMean),
            "sv" => Ok(Family::ScalingVariance),
            "cc" => Ok(Family::ChangingCoefficients),
            "gm" => Ok(Family::GaussianMixtures),
            other => Err(Error::InvalidParameter(format!(
                "unknown family '{other}' (expected jm, sv, cc or gm)"
            ))),
        }
    }
}

/// Stamps drawn per series, including `t_0 = 0`.
pub const DEFAULT_STAMPS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSpec {
    pub family: Family,
    pub seed: u64,
    pub stamps: usize,
    pub mean: f64,
    pub std: f64,
}

/// `t_0 = 0` followed by `n − 1` cumulative floored `N(mean, std²)` steps;
/// non-positive steps are redrawn.
pub fn gen_change_points(rng: &mut SeededRng, n: usize, mean: f64, std: f64) -> Result<Vec<usize>> {
    if !(mean >= 1.0) || !(std >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "segment lengths need mean >= 1 and std >= 0, got mean {mean}, std {std}"
        )));
    }
    let mut stamps = Vec::with_capacity(n);
    if n == 0 {
        return Ok(stamps);
    }
    stamps.push(0);
    while stamps.len() < n {
        let step = rng.normal(mean, std).floor();
        if step >= 1.0 {
            let last = *stamps.last().unwrap();
            stamps.push(last + step as usize);
        }
    }
    Ok(stamps)
}

struct Segments {
    stamps: Vec<usize>,
}

impl Segments {
    fn draw(rng: &mut SeededRng, spec: &SegmentSpec) -> Result<Self> {
        if spec.stamps < 2 {
            return Err(Error::InvalidParameter("need at least two stamps".into()));
        }
        Ok(Self {
            stamps: gen_change_points(rng, spec.stamps, spec.mean, spec.std)?,
        })
    }

    fn len(&self) -> usize {
        *self.stamps.last().unwrap()
    }

    /// `(segment index from 0, start, end)` with 0-based sample ranges.
    fn iter(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.stamps.windows(2).enumerate().map(|(n, w)| (n, w[0], w[1]))
    }

    fn change_points(&self) -> Vec<usize> {
        self.stamps[1..self.stamps.len() - 1].to_vec()
    }
}

/// Single AR(2) recursion with per-sample noise mean/std and coefficients.
fn ar_recursion<F>(len: usize, rng: &mut SeededRng, mut params: F) -> Vec<f64>
where
    F: FnMut(usize) -> (f64, f64, f64, f64),
{
    let mut y = vec![0.0; len];
    for t in 2..len {
        let (a1, a2, mu, sigma) = params(t);
        y[t] = a1 * y[t - 1] + a2 * y[t - 2] + rng.normal(mu, sigma);
    }
    y
}

fn segment_lookup(segments: &Segments) -> Vec<usize> {
    let mut seg = vec![0; segments.len()];
    for (n, start, end) in segments.iter() {
        seg[start..end].fill(n);
    }
    seg
}

/// Noise mean of segment `n` (0-based): `Σ_{j≤n} j/16`.
pub fn jumping_mean_level(n: usize) -> f64 {
    (n * (n + 1)) as f64 / 32.0
}

/// Noise std of segment `n` (1-based): 1 when odd, `ln(e + n/4)` when even.
pub fn scaling_variance_sigma(n: usize) -> f64 {
    if n % 2 == 1 {
        1.0
    } else {
        (std::f64::consts::E + n as f64 / 4.0).ln()
    }
}

pub fn gen_jumping_mean(seed: u64) -> Result<TimeSeries> {
    generate_with(&Family::JumpingMean.segment_spec(seed))
}

pub fn gen_scaling_variance(seed: u64) -> Result<TimeSeries> {
    generate_with(&Family::ScalingVariance.segment_spec(seed))
}

pub fn gen_changing_coefficients(seed: u64) -> Result<TimeSeries> {
    generate_with(&Family::ChangingCoefficients.segment_spec(seed))
}

pub fn gen_gaussian_mixtures(seed: u64) -> Result<TimeSeries> {
    generate_with(&Family::GaussianMixtures.segment_spec(seed))
}

/// AR(1) coefficient of every segment, alternating the low and high regimes.
pub fn changing_coefficients_draws(rng: &mut SeededRng, segments: usize) -> Vec<f64> {
    (0..segments)
        .map(|n| {
            if n % 2 == 0 {
                rng.uniform_in(0.0, 0.5)
            } else {
                rng.uniform_in(0.8, 0.95)
            }
        })
        .collect()
}

/// Draws from `0.5 N(−1, 0.5²) + 0.5 N(1, 0.5²)` (first) or
/// `0.8 N(−1, 1) + 0.2 N(1, 0.1²)` (second).
fn mixture_draw(rng: &mut SeededRng, second: bool) -> f64 {
    let u = rng.uniform();
    if second {
        if u < 0.8 {
            rng.normal(-1.0, 1.0)
        } else {
            rng.normal(1.0, 0.1)
        }
    } else if u < 0.5 {
        rng.normal(-1.0, 0.5)
    } else {
        rng.normal(1.0, 0.5)
    }
}

pub fn generate_with(spec: &SegmentSpec) -> Result<TimeSeries> {
    let mut rng = SeededRng::new(spec.seed);
    let segments = Segments::draw(&mut rng, spec)?;
    let len = segments.len();
    let seg = segment_lookup(&segments);
    let values = match spec.family {
        Family::JumpingMean => ar_recursion(len, &mut rng, |t| (0.6, -0.5, jumping_mean_level(seg[t]), 1.5)),
        Family::ScalingVariance => ar_recursion(len, &mut rng, |t| (0.6, -0.5, 0.0, scaling_variance_sigma(seg[t] + 1))),
        Family::ChangingCoefficients => {
            let coefs = changing_coefficients_draws(&mut rng, spec.stamps - 1);
            ar_recursion(len, &mut rng, |t| (coefs[seg[t]], 0.0, 0.0, 1.5))
        }
        Family::GaussianMixtures => (0..len).map(|t| mixture_draw(&mut rng, seg[t] % 2 == 1)).collect(),
    };
    TimeSeries::univariate(values, segments.change_points())
}

pub fn generate(family: Family, seed: u64) -> Result<TimeSeries> {
    generate_with(&family.segment_spec(seed))
}

/// `count` series with seeds `base_seed, base_seed + 1, …`.
pub fn corpus(family: Family, base_seed: u64, count: usize) -> Result<Vec<TimeSeries>> {
    (0..count as u64).map(|i| generate(family, base_seed + i)).collect()
}

/// Stationary AR(2) noise (`a1 = 0.6`, `a2 = −0.5`, `σ = 1.5`) without change points.
pub fn gen_stationary_noise(seed: u64, len: usize) -> Result<TimeSeries> {
    let mut rng = SeededRng::new(seed);
    TimeSeries::univariate(ar_recursion(len, &mut rng, |_| (0.6, -0.5, 0.0, 1.5)), vec![])
}

/// Drops ground-truth points closer than `window` to either end, since the
/// dissimilarity curve only covers `[N, T − N]`.
pub fn usable_change_points(ts: &TimeSeries, window: usize) -> Vec<usize> {
    let hi = ts.len().saturating_sub(window);
    ts.change_points()
        .iter()
        .copied()
        .filter(|&t| t >= window && t <= hi)
        .collect()
}
