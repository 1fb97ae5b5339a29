//! Single-hidden-layer tanh autoencoder with a partially time-invariant code.
//!
//! The latent code `h_t = tanh(W y_t + b)` is split into `s` time-invariant
//! coordinates followed by `h - s` instantaneous ones. Training couples
//! `K + 1` consecutive windows through weight-tied copies of the same
//! encoder and penalises jumps in the time-invariant block.

mod io;
mod loss;
mod train;

pub use loss::{batch_loss, loss_gradient};
pub use train::{eligible_indices, train, Adam, TrainConfig, Trained};

use crate::error::{Error, Result};
use crate::preprocess::WindowSet;
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderParams {
    input_dim: usize,
    hidden: usize,
    shared: usize,
    /// `hidden × input_dim`, row-major.
    pub(crate) w_enc: Vec<f64>,
    pub(crate) b_enc: Vec<f64>,
    /// `input_dim × hidden`, row-major.
    pub(crate) w_dec: Vec<f64>,
    pub(crate) b_dec: Vec<f64>,
}

fn check_shape(input_dim: usize, hidden: usize, shared: usize) -> Result<()> {
    if input_dim == 0 {
        return Err(Error::InvalidParameter("input dimension must be positive".into()));
    }
    if hidden == 0 || shared == 0 || shared > hidden {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= s <= h, got s={shared}, h={hidden}"
        )));
    }
    Ok(())
}

fn glorot(rng: &mut SeededRng, fan_in: usize, fan_out: usize, count: usize) -> Vec<f64> {
    let r = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..count).map(|_| rng.uniform_in(-r, r)).collect()
}

impl AutoencoderParams {
    pub fn zeros(input_dim: usize, hidden: usize, shared: usize) -> Result<Self> {
        check_shape(input_dim, hidden, shared)?;
        Ok(Self {
            input_dim,
            hidden,
            shared,
            w_enc: vec![0.0; hidden * input_dim],
            b_enc: vec![0.0; hidden],
            w_dec: vec![0.0; input_dim * hidden],
            b_dec: vec![0.0; input_dim],
        })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(input_dim: usize, hidden: usize, shared: usize, rng: &mut SeededRng) -> Result<Self> {
        let mut p = Self::zeros(input_dim, hidden, shared)?;
        p.w_enc = glorot(rng, input_dim, hidden, hidden * input_dim);
        p.w_dec = glorot(rng, hidden, input_dim, input_dim * hidden);
        Ok(p)
    }

    /// Assembles parameters from explicit arrays (weights row-major).
    pub fn from_parts(
        input_dim: usize,
        hidden: usize,
        shared: usize,
        w_enc: Vec<f64>,
        b_enc: Vec<f64>,
        w_dec: Vec<f64>,
        b_dec: Vec<f64>,
    ) -> Result<Self> {
        check_shape(input_dim, hidden, shared)?;
        let expect = |got: usize, expected: usize| {
            if got == expected {
                Ok(())
            } else {
                Err(Error::DimensionMismatch { expected, got })
            }
        };
        expect(w_enc.len(), hidden * input_dim)?;
        expect(b_enc.len(), hidden)?;
        expect(w_dec.len(), input_dim * hidden)?;
        expect(b_dec.len(), input_dim)?;
        let p = Self {
            input_dim,
            hidden,
            shared,
            w_enc,
            b_enc,
            w_dec,
            b_dec,
        };
        if !p.slices().iter().all(|s| s.iter().all(|v| v.is_finite())) {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        Ok(p)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    /// Number of time-invariant features `s`.
    pub fn shared(&self) -> usize {
        self.shared
    }

    pub fn w_enc(&self) -> &[f64] {
        &self.w_enc
    }

    pub fn b_enc(&self) -> &[f64] {
        &self.b_enc
    }

    pub fn w_dec(&self) -> &[f64] {
        &self.w_dec
    }

    pub fn b_dec(&self) -> &[f64] {
        &self.b_dec
    }

    pub fn param_count(&self) -> usize {
        2 * self.hidden * self.input_dim + self.hidden + self.input_dim
    }

    pub(crate) fn slices(&self) -> [&[f64]; 4] {
        [&self.w_enc, &self.b_enc, &self.w_dec, &self.b_dec]
    }

    pub(crate) fn slices_mut(&mut self) -> [&mut [f64]; 4] {
        [&mut self.w_enc, &mut self.b_enc, &mut self.w_dec, &mut self.b_dec]
    }

    /// All parameters in the order `W, b, W', b'`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.slices().concat()
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::DimensionMismatch {
                expected: self.param_count(),
                got: flat.len(),
            });
        }
        let mut offset = 0;
        for s in self.slices_mut() {
            s.copy_from_slice(&flat[offset..offset + s.len()]);
            offset += s.len();
        }
        Ok(())
    }

    pub(crate) fn encode_into(&self, v: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            let row = &self.w_enc[j * self.input_dim..(j + 1) * self.input_dim];
            let a: f64 = row.iter().zip(v).map(|(w, x)| w * x).sum::<f64>() + self.b_enc[j];
            *o = a.tanh();
        }
    }

    pub(crate) fn decode_into(&self, h: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.w_dec[i * self.hidden..(i + 1) * self.hidden];
            let a: f64 = row.iter().zip(h).map(|(w, x)| w * x).sum::<f64>() + self.b_dec[i];
            *o = a.tanh();
        }
    }

    /// `tanh(W v + b)`; the first `s` entries are the time-invariant features.
    pub fn encode(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: v.len(),
            });
        }
        let mut out = vec![0.0; self.hidden];
        self.encode_into(v, &mut out);
        Ok(out)
    }

    /// `tanh(W' h + b')`.
    pub fn decode(&self, h: &[f64]) -> Result<Vec<f64>> {
        if h.len() != self.hidden {
            return Err(Error::DimensionMismatch {
                expected: self.hidden,
                got: h.len(),
            });
        }
        let mut out = vec![0.0; self.input_dim];
        self.decode_into(h, &mut out);
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackKind {
    Time,
    Frequency,
    Fused,
}

/// Per-time-stamp feature vectors for `t` in `[N, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTrack {
    kind: TrackKind,
    first_time: usize,
    dim: usize,
    data: Vec<f64>,
}

impl FeatureTrack {
    pub fn new(kind: TrackKind, first_time: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidParameter(format!(
                "feature data of length {} does not split into vectors of {dim}",
                data.len()
            )));
        }
        Ok(Self {
            kind,
            first_time,
            dim,
            data,
        })
    }

    /// Builds a track from one vector per time stamp.
    pub fn from_rows(kind: TrackKind, first_time: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).ok_or(Error::Empty("feature track"))?;
        let mut data = Vec::with_capacity(dim * rows.len());
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(kind, first_time, dim, data)
    }

    pub fn kind(&self) -> TrackKind {
        self.kind
    }

    /// Time stamp of the first vector (the window size `N`).
    pub fn first_time(&self) -> usize {
        self.first_time
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, index: usize) -> &[f64] {
        &self.data[index * self.dim..(index + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// One coordinate over time.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.iter().map(|v| v[j]).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            kind: self.kind,
            first_time: self.first_time,
            dim: self.dim,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Time-invariant features `s_t` of every window.
pub fn extract_features(params: &AutoencoderParams, windows: &WindowSet) -> Result<FeatureTrack> {
    if windows.dim() != params.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: params.input_dim(),
            got: windows.dim(),
        });
    }
    let kind = match windows.domain() {
        crate::preprocess::Domain::Time => TrackKind::Time,
        crate::preprocess::Domain::Frequency => TrackKind::Frequency,
    };
    let s = params.shared();
    let mut h = vec![0.0; params.hidden()];
    let mut data = Vec::with_capacity(s * windows.len());
    for w in windows.iter() {
        params.encode_into(w, &mut h);
        data.extend_from_slice(&h[..s]);
    }
    FeatureTrack::new(kind, windows.window(), s, data)
}
