//! The K-coupled training loss and its analytic gradient.
//!
//! For a batch member `t` the loss is
//! `‖y_t − ỹ_t‖ + (λ/K) Σ_{k<K} ‖s_{t−k} − s_{t−k−1}‖`
//! with non-squared Euclidean norms.

use super::train::TrainConfig;
use super::AutoencoderParams;
use crate::error::{Error, Result};
use crate::preprocess::WindowSet;

/// Norms below this contribute no gradient.
const NORM_GUARD: f64 = 1e-12;

/// Reusable buffers for evaluating one batch member at a time.
pub(crate) struct LossEngine {
    k: usize,
    lambda: f64,
    codes: Vec<f64>,
    recon: Vec<f64>,
    d_codes: Vec<f64>,
    delta_dec: Vec<f64>,
    delta_enc: Vec<f64>,
}

impl LossEngine {
    pub(crate) fn new(params: &AutoencoderParams, k: usize, lambda: f64) -> Self {
        let h = params.hidden();
        Self {
            k,
            lambda,
            codes: vec![0.0; (k + 1) * h],
            recon: vec![0.0; params.input_dim()],
            d_codes: vec![0.0; (k + 1) * h],
            delta_dec: vec![0.0; params.input_dim()],
            delta_enc: vec![0.0; h],
        }
    }

    /// Encodes windows `index − K ..= index` into `codes` (oldest first) and
    /// decodes the newest one into `recon`. Returns the member's loss.
    fn forward(&mut self, p: &AutoencoderParams, windows: &WindowSet, index: usize) -> f64 {
        let h = p.hidden();
        let k = self.k;
        for j in 0..=k {
            let w = windows.get(index - k + j);
            p.encode_into(w, &mut self.codes[j * h..(j + 1) * h]);
        }
        p.decode_into(&self.codes[k * h..], &mut self.recon);

        let target = windows.get(index);
        let recon_norm = self
            .recon
            .iter()
            .zip(target)
            .map(|(r, y)| (r - y) * (r - y))
            .sum::<f64>()
            .sqrt();

        let mut penalty = 0.0;
        if self.lambda != 0.0 {
            let s = p.shared();
            for j in 0..k {
                let a = &self.codes[j * h..j * h + s];
                let b = &self.codes[(j + 1) * h..(j + 1) * h + s];
                penalty += a.iter().zip(b).map(|(x, y)| (y - x) * (y - x)).sum::<f64>().sqrt();
            }
            penalty *= self.lambda / k as f64;
        }
        recon_norm + penalty
    }

    /// Accumulates the member's gradient into `grad`; returns its loss.
    pub(crate) fn accumulate(
        &mut self,
        p: &AutoencoderParams,
        windows: &WindowSet,
        index: usize,
        grad: &mut AutoencoderParams,
    ) -> f64 {
        let loss = self.forward(p, windows, index);
        let h = p.hidden();
        let dim = p.input_dim();
        let s = p.shared();
        let k = self.k;
        self.d_codes.iter_mut().for_each(|v| *v = 0.0);

        // Reconstruction term through the decoder.
        let target = windows.get(index);
        let norm = self
            .recon
            .iter()
            .zip(target)
            .map(|(r, y)| (r - y) * (r - y))
            .sum::<f64>()
            .sqrt();
        if norm >= NORM_GUARD {
            let newest = &self.codes[k * h..];
            for i in 0..dim {
                let r = self.recon[i];
                self.delta_dec[i] = (r - target[i]) / norm * (1.0 - r * r);
            }
            for i in 0..dim {
                let d = self.delta_dec[i];
                grad.b_dec[i] += d;
                let row = &mut grad.w_dec[i * h..(i + 1) * h];
                for (g, &c) in row.iter_mut().zip(newest) {
                    *g += d * c;
                }
                let wrow = &p.w_dec[i * h..(i + 1) * h];
                for (dc, &w) in self.d_codes[k * h..].iter_mut().zip(wrow) {
                    *dc += d * w;
                }
            }
        }

        // Penalty between consecutive time-invariant blocks.
        if self.lambda != 0.0 {
            let c = self.lambda / k as f64;
            for j in 0..k {
                let (lo, hi) = (j * h, (j + 1) * h);
                let norm = (0..s)
                    .map(|i| {
                        let u = self.codes[hi + i] - self.codes[lo + i];
                        u * u
                    })
                    .sum::<f64>()
                    .sqrt();
                if norm < NORM_GUARD {
                    continue;
                }
                for i in 0..s {
                    let g = c * (self.codes[hi + i] - self.codes[lo + i]) / norm;
                    self.d_codes[hi + i] += g;
                    self.d_codes[lo + i] -= g;
                }
            }
        }

        // Back through every weight-tied encoder copy.
        for j in 0..=k {
            let code = &self.codes[j * h..(j + 1) * h];
            let dcode = &self.d_codes[j * h..(j + 1) * h];
            let mut any = false;
            for m in 0..h {
                self.delta_enc[m] = dcode[m] * (1.0 - code[m] * code[m]);
                any |= self.delta_enc[m] != 0.0;
            }
            if !any {
                continue;
            }
            let w = windows.get(index - k + j);
            for m in 0..h {
                let d = self.delta_enc[m];
                if d == 0.0 {
                    continue;
                }
                grad.b_enc[m] += d;
                let row = &mut grad.w_enc[m * dim..(m + 1) * dim];
                for (g, &x) in row.iter_mut().zip(w) {
                    *g += d * x;
                }
            }
        }
        loss
    }
}

fn validate(params: &AutoencoderParams, windows: &WindowSet, batch: &[usize], cfg: &TrainConfig) -> Result<()> {
    if windows.dim() != params.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: params.input_dim(),
            got: windows.dim(),
        });
    }
    if cfg.k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    if let Some(&bad) = batch.iter().find(|&&i| i < cfg.k || i >= windows.len()) {
        return Err(Error::InvalidParameter(format!(
            "batch index {bad} lacks a full history of {} windows",
            cfg.k
        )));
    }
    Ok(())
}

/// Sum of the per-member losses over `batch` (indices into `windows`, each
/// at least `K`).
pub fn batch_loss(params: &AutoencoderParams, windows: &WindowSet, batch: &[usize], cfg: &TrainConfig) -> Result<f64> {
    validate(params, windows, batch, cfg)?;
    let mut engine = LossEngine::new(params, cfg.k, cfg.lambda);
    Ok(batch.iter().map(|&i| engine.forward(params, windows, i)).sum())
}

/// Batch loss together with its gradient with respect to every parameter.
pub fn loss_gradient(
    params: &AutoencoderParams,
    windows: &WindowSet,
    batch: &[usize],
    cfg: &TrainConfig,
) -> Result<(f64, AutoencoderParams)> {
    validate(params, windows, batch, cfg)?;
    let mut grad = AutoencoderParams::zeros(params.input_dim(), params.hidden(), params.shared())?;
    let mut engine = LossEngine::new(params, cfg.k, cfg.lambda);
    let loss = batch
        .iter()
        .map(|&i| engine.accumulate(params, windows, i, &mut grad))
        .sum();
    Ok((loss, grad))
}
