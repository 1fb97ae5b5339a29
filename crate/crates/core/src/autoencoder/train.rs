//! Mini-batch Adam training.

use super::loss::LossEngine;
use super::AutoencoderParams;
use crate::error::{Error, Result};
use crate::preprocess::WindowSet;
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Weight of the time-invariance penalty.
    pub lambda: f64,
    /// Number of consecutive feature differences coupled per batch member.
    pub k: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            k: 2,
            epochs: 200,
            batch_size: 64,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if self.k == 0 {
            return bad("K must be at least 1");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be a nonnegative number");
        }
        if !(self.learning_rate > 0.0) || !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("invalid Adam hyperparameters");
        }
        if !(self.epsilon > 0.0) {
            return bad("Adam epsilon must be positive");
        }
        Ok(())
    }
}

/// Adam with bias-corrected moment estimates.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    step: i32,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(param_count: usize, cfg: &TrainConfig) -> Self {
        Self {
            lr: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            epsilon: cfg.epsilon,
            step: 0,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
        }
    }

    pub fn update(&mut self, params: &mut AutoencoderParams, grad: &AutoencoderParams) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        let mut offset = 0;
        for (p, g) in params.slices_mut().into_iter().zip(grad.slices()) {
            let m = &mut self.m[offset..offset + p.len()];
            let v = &mut self.v[offset..offset + p.len()];
            for i in 0..p.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= self.lr * m_hat / (v_hat.sqrt() + self.epsilon);
            }
            offset += p.len();
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub params: AutoencoderParams,
    /// Mean per-member loss of every epoch.
    pub loss_history: Vec<f64>,
}

/// Window indices with a complete `K`-window history (`t ≥ N + K`).
pub fn eligible_indices(windows: &WindowSet, k: usize) -> Vec<usize> {
    (k..windows.len()).collect()
}

pub fn train(windows: &WindowSet, hidden: usize, shared: usize, cfg: &TrainConfig) -> Result<Trained> {
    cfg.validate()?;
    if windows.is_empty() {
        return Err(Error::Empty("window set"));
    }
    let mut order = eligible_indices(windows, cfg.k);
    if order.is_empty() {
        return Err(Error::SeriesTooShort {
            needed: windows.window() + cfg.k,
            length: windows.window() + windows.len() - 1,
        });
    }
    let mut rng = SeededRng::new(cfg.seed);
    let mut params = AutoencoderParams::init(windows.dim(), hidden, shared, &mut rng)?;
    let mut grad = AutoencoderParams::zeros(windows.dim(), hidden, shared)?;
    let mut adam = Adam::new(params.param_count(), cfg);
    let mut engine = LossEngine::new(&params, cfg.k, cfg.lambda);
    let mut loss_history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        rng.shuffle(&mut order);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            for g in grad.slices_mut() {
                g.fill(0.0);
            }
            let mut batch_total = 0.0;
            for &i in batch {
                batch_total += engine.accumulate(&params, windows, i, &mut grad);
            }
            if !batch_total.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    loss: batch_total,
                });
            }
            total += batch_total;
            adam.update(&mut params, &grad);
        }
        loss_history.push(total / order.len() as f64);
    }
    Ok(Trained {
        params,
        loss_history,
    })
}
