//! End-to-end detection: windows, two autoencoders, fusion, smoothing,
//! dissimilarity, matched filter, scoring and thresholding.

use std::fmt;
use std::str::FromStr;

use crate::autoencoder::{extract_features, train, AutoencoderParams, FeatureTrack, TrainConfig};
use crate::datagen::Family;
use crate::error::{Error, Result};
use crate::postprocess::{
    auto_weights, detect, dissimilarity, fuse_features, height_scores, matched_filter, prominence, smooth_features,
    DissimilarityCurve, ScoreCurve,
};
use crate::preprocess::{default_spectrum_len, make_fd_windows, make_td_windows, rescale_channels};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Td,
    Fd,
    Combined,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Td => "td",
            Mode::Fd => "fd",
            Mode::Combined => "combined",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "td" => Ok(Mode::Td),
            "fd" => Ok(Mode::Fd),
            "combined" => Ok(Mode::Combined),
            other => Err(Error::InvalidParameter(format!(
                "unknown mode '{other}' (expected td, fd or combined)"
            ))),
        }
    }
}

/// Latent-dimension presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// One time-invariant feature per domain.
    A,
    /// Two time-invariant plus one instantaneous time-domain feature.
    B,
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::A => "a",
            Preset::B => "b",
        })
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Preset::A),
            "b" => Ok(Preset::B),
            other => Err(Error::InvalidParameter(format!("unknown setting '{other}' (expected a or b)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeSettings {
    pub hidden: usize,
    pub shared: usize,
    pub lambda: f64,
}

impl AeSettings {
    fn validate(&self, name: &str) -> Result<()> {
        if self.shared == 0 || self.shared > self.hidden {
            return Err(Error::InvalidParameter(format!(
                "{name}: need 1 <= shared <= hidden, got shared {} and hidden {}",
                self.shared, self.hidden
            )));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("{name}: lambda must be finite and >= 0")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scoring {
    Prominence,
    Height,
}

impl FromStr for Scoring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "prominence" => Ok(Scoring::Prominence),
            "height" => Ok(Scoring::Height),
            other => Err(Error::InvalidParameter(format!(
                "unknown scoring '{other}' (expected prominence or height)"
            ))),
        }
    }
}

impl fmt::Display for Scoring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scoring::Prominence => "prominence",
            Scoring::Height => "height",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub mode: Mode,
    pub window: usize,
    /// Cropped spectrum length; `⌊N/2⌋ + 1` when unset.
    pub spectrum_len: Option<usize>,
    pub td: AeSettings,
    pub fd: AeSettings,
    pub k: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Fusion weight overrides, only consulted in combined mode.
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub tau: f64,
    /// Triangular smoothing of the feature tracks before the dissimilarity.
    pub smoothing: bool,
    pub matched_filter: bool,
    pub scoring: Scoring,
}

/// Default `(N, δ)` for a synthetic family.
pub fn family_window_delta(family: Family) -> (usize, usize) {
    match family {
        Family::ChangingCoefficients => (200, 150),
        _ => (20, 15),
    }
}

impl Settings {
    pub fn preset(preset: Preset, window: usize) -> Self {
        let one = AeSettings {
            hidden: 1,
            shared: 1,
            lambda: 1.0,
        };
        let td = match preset {
            Preset::A => one,
            Preset::B => AeSettings {
                hidden: 3,
                shared: 2,
                lambda: 1.0,
            },
        };
        let defaults = TrainConfig::default();
        Self {
            mode: Mode::Combined,
            window,
            spectrum_len: None,
            td,
            fd: one,
            k: defaults.k,
            epochs: defaults.epochs,
            batch_size: defaults.batch_size,
            learning_rate: defaults.learning_rate,
            seed: 0,
            alpha: None,
            beta: None,
            tau: 0.0,
            smoothing: true,
            matched_filter: true,
            scoring: Scoring::Prominence,
        }
    }

    pub fn for_family(family: Family, preset: Preset, mode: Mode) -> Self {
        let mut s = Self::preset(preset, family_window_delta(family).0);
        s.mode = mode;
        s
    }

    pub fn spectrum_bins(&self) -> usize {
        self.spectrum_len.unwrap_or_else(|| default_spectrum_len(self.window))
    }

    /// Weights fixed by the mode or by overrides; `None` entries are
    /// estimated from the data.
    pub fn fixed_weights(&self) -> (Option<f64>, Option<f64>) {
        match self.mode {
            Mode::Td => (Some(1.0), Some(0.0)),
            Mode::Fd => (Some(0.0), Some(1.0)),
            Mode::Combined => (self.alpha, self.beta),
        }
    }

    pub fn train_config(&self, domain: &AeSettings, seed: u64) -> TrainConfig {
        TrainConfig {
            lambda: domain.lambda,
            k: self.k,
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            seed,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 1 {
            return Err(Error::InvalidParameter("window size must be positive".into()));
        }
        let bins = self.spectrum_bins();
        if bins == 0 || bins > self.window {
            return Err(Error::InvalidParameter(format!(
                "spectrum length must be in 1..={}, got {bins}",
                self.window
            )));
        }
        self.td.validate("td")?;
        self.fd.validate("fd")?;
        if !(self.tau >= 0.0) {
            return Err(Error::InvalidParameter("tau must be >= 0".into()));
        }
        for (name, w) in [("alpha", self.alpha), ("beta", self.beta)] {
            if let Some(w) = w {
                if !(w >= 0.0) || !w.is_finite() {
                    return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0")));
                }
            }
        }
        self.train_config(&self.td, self.seed).validate()
    }
}

/// Seed of the frequency-domain autoencoder, derived from the run seed.
pub fn fd_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

/// Time-invariant feature tracks of the trained domains.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedFeatures {
    pub window: usize,
    pub td: Option<FeatureTrack>,
    pub fd: Option<FeatureTrack>,
    pub td_model: Option<AutoencoderParams>,
    pub fd_model: Option<AutoencoderParams>,
    /// Mean loss of the last epoch per trained domain.
    pub td_loss: Option<f64>,
    pub fd_loss: Option<f64>,
}

/// Trains the autoencoders needed by the settings and extracts the features.
/// A domain whose weight is fixed at zero is not trained.
pub fn fit_features(ts: &TimeSeries, settings: &Settings) -> Result<FittedFeatures> {
    settings.validate()?;
    let n = settings.window;
    if ts.len() < 2 * n {
        return Err(Error::SeriesTooShort {
            needed: 2 * n,
            length: ts.len(),
        });
    }
    let scaled = rescale_channels(ts);
    let td_windows = make_td_windows(&scaled, n)?;
    let (alpha, beta) = settings.fixed_weights();
    let mut out = FittedFeatures {
        window: n,
        td: None,
        fd: None,
        td_model: None,
        fd_model: None,
        td_loss: None,
        fd_loss: None,
    };
    if alpha != Some(0.0) {
        let cfg = settings.train_config(&settings.td, settings.seed);
        let trained = train(&td_windows, settings.td.hidden, settings.td.shared, &cfg)?;
        out.td = Some(extract_features(&trained.params, &td_windows)?);
        out.td_loss = trained.loss_history.last().copied();
        out.td_model = Some(trained.params);
    }
    if beta != Some(0.0) {
        let fd_windows = make_fd_windows(&td_windows, settings.spectrum_bins())?;
        let cfg = settings.train_config(&settings.fd, fd_seed(settings.seed));
        let trained = train(&fd_windows, settings.fd.hidden, settings.fd.shared, &cfg)?;
        out.fd = Some(extract_features(&trained.params, &fd_windows)?);
        out.fd_loss = trained.loss_history.last().copied();
        out.fd_model = Some(trained.params);
    }
    if out.td.is_none() && out.fd.is_none() {
        return Err(Error::InvalidParameter("alpha and beta are both zero".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub alpha: f64,
    pub beta: f64,
    /// Dissimilarity of the (smoothed) fused features.
    pub dissimilarity: DissimilarityCurve,
    /// Curve that is scored: matched-filtered unless disabled.
    pub filtered: DissimilarityCurve,
    pub scores: ScoreCurve,
    pub alarms: Vec<usize>,
}

fn feature_curve(track: &FeatureTrack, window: usize, smoothing: bool) -> Result<DissimilarityCurve> {
    if smoothing {
        dissimilarity(&smooth_features(track, window)?, window)
    } else {
        dissimilarity(track, window)
    }
}

/// Postprocessing of already extracted features.
pub fn score_features(features: &FittedFeatures, settings: &Settings) -> Result<PipelineOutput> {
    let n = settings.window;
    let (fixed_alpha, fixed_beta) = settings.fixed_weights();
    let (alpha, beta) = match (&features.td, &features.fd) {
        (Some(td), Some(fd)) => match (fixed_alpha, fixed_beta) {
            (Some(a), Some(b)) => (a, b),
            (a, b) => {
                let (auto_a, auto_b) = auto_weights(
                    &feature_curve(td, n, settings.smoothing)?,
                    &feature_curve(fd, n, settings.smoothing)?,
                )?;
                (a.unwrap_or(auto_a), b.unwrap_or(auto_b))
            }
        },
        (Some(_), None) => (fixed_alpha.unwrap_or(1.0), 0.0),
        (None, Some(_)) => (0.0, fixed_beta.unwrap_or(1.0)),
        (None, None) => return Err(Error::Empty("no trained feature track")),
    };
    let fused = match (&features.td, &features.fd) {
        (Some(td), Some(fd)) => fuse_features(td, fd, alpha, beta)?,
        (Some(td), None) => td.scaled(alpha),
        (None, Some(fd)) => fd.scaled(beta),
        (None, None) => unreachable!(),
    };
    let curve = feature_curve(&fused, n, settings.smoothing)?;
    let filtered = if settings.matched_filter {
        matched_filter(&curve, n)
    } else {
        curve.clone()
    };
    let scores = match settings.scoring {
        Scoring::Prominence => prominence(&filtered),
        Scoring::Height => height_scores(&filtered),
    };
    let alarms = detect(&scores, settings.tau);
    Ok(PipelineOutput {
        alpha,
        beta,
        dissimilarity: curve,
        filtered,
        scores,
        alarms,
    })
}

pub fn run_pipeline(ts: &TimeSeries, settings: &Settings) -> Result<PipelineOutput> {
    let features = fit_features(ts, settings)?;
    score_features(&features, settings)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_series() -> TimeSeries {
        let values: Vec<f64> = (0..300).map(|t| if t < 150 { 0.0 } else { 1.0 } + 0.01 * ((t * 7) % 5) as f64).collect();
        TimeSeries::univariate(values, vec![150]).unwrap()
    }

    fn quick(mode: Mode) -> Settings {
        let mut s = Settings::preset(Preset::A, 10);
        s.mode = mode;
        s.epochs = 5;
        s
    }

    #[test]
    fn presets() {
        let a = Settings::preset(Preset::A, 20);
        assert_eq!((a.td.hidden, a.td.shared, a.fd.hidden, a.fd.shared), (1, 1, 1, 1));
        assert_eq!((a.k, a.td.lambda), (2, 1.0));
        let b = Settings::preset(Preset::B, 20);
        assert_eq!((b.td.hidden, b.td.shared, b.fd.hidden, b.fd.shared), (3, 2, 1, 1));
        assert_eq!(family_window_delta(Family::ChangingCoefficients), (200, 150));
        assert_eq!(family_window_delta(Family::GaussianMixtures), (20, 15));
    }

    #[test]
    fn rejects_short_series() {
        let ts = TimeSeries::univariate(vec![0.0; 19], vec![]).unwrap();
        let err = run_pipeline(&ts, &quick(Mode::Td)).unwrap_err();
        assert!(matches!(err, Error::SeriesTooShort { .. }));
    }

    #[test]
    fn invalid_settings() {
        let mut s = quick(Mode::Td);
        s.td.shared = 2;
        assert!(s.validate().is_err());
        let mut s = quick(Mode::Td);
        s.spectrum_len = Some(11);
        assert!(s.validate().is_err());
        let mut s = quick(Mode::Combined);
        s.alpha = Some(-1.0);
        assert!(s.validate().is_err());
    }

    #[test]
    fn curve_covers_defined_range() {
        let ts = step_series();
        let out = run_pipeline(&ts, &quick(Mode::Combined)).unwrap();
        assert_eq!(out.dissimilarity.first_time(), 10);
        assert_eq!(out.dissimilarity.len(), 300 - 20 + 1);
        assert_eq!(out.scores.len(), out.filtered.len());
        assert!(out.alpha >= 0.0 && out.beta >= 0.0);
    }

    #[test]
    fn td_mode_equals_weighted_combined() {
        let ts = step_series();
        let td = run_pipeline(&ts, &quick(Mode::Td)).unwrap();
        let mut s = quick(Mode::Combined);
        s.alpha = Some(1.0);
        s.beta = Some(0.0);
        let combined = run_pipeline(&ts, &s).unwrap();
        assert_eq!(td, combined);
    }

    #[test]
    fn skips_zero_weight_domain() {
        let f = fit_features(&step_series(), &quick(Mode::Fd)).unwrap();
        assert!(f.td.is_none() && f.fd.is_some());
    }

    #[test]
    fn height_without_filter_scores_raw_curve() {
        let ts = step_series();
        let mut s = quick(Mode::Td);
        let features = fit_features(&ts, &s).unwrap();
        s.matched_filter = false;
        s.scoring = Scoring::Height;
        let out = score_features(&features, &s).unwrap();
        assert_eq!(out.filtered, out.dissimilarity);
        s.smoothing = false;
        let raw = score_features(&features, &s).unwrap();
        let direct = dissimilarity(features.td.as_ref().unwrap(), 10).unwrap();
        assert_eq!(raw.dissimilarity, direct);
        for (t, p) in out.scores.peaks() {
            assert_eq!(p, out.dissimilarity.values()[t - out.dissimilarity.first_time()]);
        }
    }
}
