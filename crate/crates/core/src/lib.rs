//! Change point detection with partially time-invariant representations.
//!
//! A series is cut into sliding windows, each window is encoded by a small
//! autoencoder in the time domain and in the frequency domain, and the
//! distance between the time-invariant codes of windows `N` apart serves as
//! a dissimilarity curve. Peaks of the matched-filtered curve, scored by
//! prominence, are the candidate change points.
//!
//! ```no_run
//! use tire::{datagen, run_pipeline, roc_auc, Family, Mode, Preset, Settings};
//!
//! let ts = datagen::generate(Family::JumpingMean, 0)?;
//! let settings = Settings::for_family(Family::JumpingMean, Preset::A, Mode::Td);
//! let out = run_pipeline(&ts, &settings)?;
//! let gt = datagen::usable_change_points(&ts, settings.window);
//! println!("AUC {}", roc_auc(&out.scores, &gt, 15)?.auc);
//! # Ok::<(), tire::Error>(())
//! ```

pub mod autoencoder;
pub mod datagen;
pub mod error;
pub mod evaluation;
pub mod export;
pub mod pipeline;
pub mod postprocess;
pub mod preprocess;
pub mod rng;
pub mod series;

pub use autoencoder::{
    batch_loss, extract_features, loss_gradient, train, AutoencoderParams, FeatureTrack, TrackKind, TrainConfig,
    Trained,
};
pub use datagen::Family;
pub use error::{Error, Result};
pub use evaluation::{corpus_auc, match_alarms, roc_auc, tpr_fpr, CorpusSummary, MatchReport, RocCurve, RocPoint};
pub use pipeline::{
    family_window_delta, fit_features, run_pipeline, score_features, AeSettings, FittedFeatures, Mode,
    PipelineOutput, Preset, Scoring, Settings,
};
pub use postprocess::{DissimilarityCurve, ScoreCurve};
pub use preprocess::{Domain, WindowSet};
pub use rng::SeededRng;
pub use series::TimeSeries;
