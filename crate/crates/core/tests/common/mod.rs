//! Reference implementations used as oracles by the integration tests.
//! They follow the definitions directly and trade speed for obviousness.

#![allow(dead_code)]

use std::f64::consts::PI;

use tire::{AutoencoderParams, SeededRng};

/// `|X_k|` for `k < bins` by the O(N²) sum.
pub fn naive_dft_magnitude(x: &[f64], bins: usize) -> Vec<f64> {
    let n = x.len() as f64;
    (0..bins)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &v) in x.iter().enumerate() {
                let phase = -2.0 * PI * (k * t) as f64 / n;
                re += v * phase.cos();
                im += v * phase.sin();
            }
            re.hypot(im)
        })
        .collect()
}

/// Interior strict local maxima, plateaus reported at their left end.
pub fn local_maxima(d: &[f64]) -> Vec<usize> {
    let n = d.len();
    (1..n.saturating_sub(1))
        .filter(|&t| {
            if d[t - 1] >= d[t] {
                return false;
            }
            match (t + 1..n).find(|&j| d[j] != d[t]) {
                Some(j) => d[j] < d[t],
                None => false,
            }
        })
        .collect()
}

/// Prominence straight from its definition: nearest strictly higher point
/// on each side (clamped to the ends), larger of the two open-interval
/// minima, end value when an interval is empty.
pub fn prominence(d: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut out = vec![0.0; n];
    for t in local_maxima(d) {
        let tl = (0..t).rev().find(|&j| d[j] > d[t]).unwrap_or(0);
        let tr = (t + 1..n).find(|&j| d[j] > d[t]).unwrap_or(n - 1);
        let side_min = |lo: usize, hi: usize, end: usize| {
            if lo + 1 < hi {
                (lo + 1..hi).map(|j| d[j]).fold(f64::INFINITY, f64::min)
            } else {
                d[end]
            }
        };
        out[t] = d[t] - side_min(tl, t, tl).max(side_min(t, tr, tr));
    }
    out
}

/// Direct convolution with `(N − |k|)/N²` and clamped indices.
pub fn triangular_convolution(x: &[f64], n: usize) -> Vec<f64> {
    let last = x.len() as isize - 1;
    let nn = (n * n) as f64;
    (0..x.len() as isize)
        .map(|t| {
            let mut acc = 0.0;
            for k in -(n as isize) + 1..n as isize {
                let w = (n as isize - k.abs()) as f64 / nn;
                acc += w * x[(t + k).clamp(0, last) as usize];
            }
            acc
        })
        .collect()
}

/// Ground-truth hits by exhaustive search over alarm assignments: an alarm
/// belongs to a ground-truth point when no other point is strictly closer
/// and no earlier point is equally close.
pub fn count_correct(gt: &[usize], alarms: &[usize], delta: usize) -> usize {
    gt.iter()
        .enumerate()
        .filter(|&(i, &a)| {
            alarms.iter().any(|&b| {
                let dist = a.abs_diff(b);
                dist <= delta
                    && gt.iter().enumerate().all(|(j, &c)| {
                        let other = c.abs_diff(b);
                        j == i || other > dist || (other == dist && j > i)
                    })
            })
        })
        .count()
}

/// AUC from every distinct alarm set reachable by some threshold, using
/// the brute-force matching above.
pub fn exhaustive_auc(first_time: usize, scores: &[f64], gt: &[usize], delta: usize) -> f64 {
    let mut levels: Vec<f64> = scores.to_vec();
    levels.push(0.0);
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut cuts = levels.clone();
    cuts.extend(levels.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    cuts.push(levels.last().unwrap() + 1.0);
    let mut pts = vec![(0.0, 0.0), (1.0, 1.0)];
    for tau in cuts {
        if tau < 0.0 {
            continue;
        }
        let alarms: Vec<usize> = scores
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > tau)
            .map(|(i, _)| first_time + i)
            .collect();
        let correct = count_correct(gt, &alarms, delta);
        let tpr = correct as f64 / gt.len() as f64;
        let fpr = if alarms.is_empty() {
            0.0
        } else {
            (alarms.len() - correct) as f64 / alarms.len() as f64
        };
        pts.push((fpr, tpr));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum()
}

fn tanh_layer(w: &[f64], b: &[f64], x: &[f64]) -> Vec<f64> {
    b.iter()
        .enumerate()
        .map(|(r, &bias)| {
            let z: f64 = bias + x.iter().enumerate().map(|(c, v)| w[r * x.len() + c] * v).sum::<f64>();
            z.tanh()
        })
        .collect()
}

fn norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Loss of a batch written out term by term for `K = 1`:
/// `Σ ‖y_t − ỹ_t‖ + λ ‖s_t − s_{t−1}‖`.
pub fn pairwise_loss(p: &AutoencoderParams, windows: &[Vec<f64>], batch: &[usize], lambda: f64) -> f64 {
    let s = p.shared();
    let code = |y: &[f64]| tanh_layer(p.w_enc(), p.b_enc(), y);
    batch
        .iter()
        .map(|&t| {
            let h = code(&windows[t]);
            let recon = tanh_layer(p.w_dec(), p.b_dec(), &h);
            let prev = code(&windows[t - 1]);
            norm(&windows[t], &recon) + lambda * norm(&h[..s], &prev[..s])
        })
        .sum()
}

pub fn random_rows(rng: &mut SeededRng, count: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..dim).map(|_| rng.uniform_in(-1.0, 1.0)).collect())
        .collect()
}

pub fn random_params(rng: &mut SeededRng, d: usize, h: usize, s: usize) -> AutoencoderParams {
    let mut draw = |n: usize, scale: f64| -> Vec<f64> { (0..n).map(|_| rng.uniform_in(-scale, scale)).collect() };
    let w_enc = draw(h * d, 0.8);
    let b_enc = draw(h, 0.3);
    let w_dec = draw(d * h, 0.8);
    let b_dec = draw(d, 0.3);
    AutoencoderParams::from_parts(d, h, s, w_enc, b_enc, w_dec, b_dec).unwrap()
}
