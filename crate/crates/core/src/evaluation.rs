//! Matching alarms to ground truth, TPR/FPR and the extended ROC/AUC.

use crate::error::{Error, Result};
use crate::postprocess::{detect, ScoreCurve};

#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport {
    pub n_ground_truth: usize,
    pub n_alarms: usize,
    pub n_correct: usize,
    /// For every ground-truth point, the closest assigned alarm within `δ`.
    pub matched: Vec<Option<usize>>,
    pub delta: usize,
}

/// Index of the nearest ground-truth point, ties resolved to the earlier one.
fn nearest(gt: &[usize], b: usize) -> usize {
    let pos = gt.partition_point(|&a| a < b);
    match (pos.checked_sub(1), gt.get(pos)) {
        (None, _) => pos,
        (Some(prev), None) => prev,
        (Some(prev), Some(&next)) => {
            if b - gt[prev] <= next - b {
                prev
            } else {
                pos
            }
        }
    }
}

/// Assigns each alarm to its nearest ground-truth point; a ground-truth point
/// is detected when one of its alarms lies within `delta`. An alarm thus
/// supports at most one ground-truth point.
pub fn match_alarms(gt: &[usize], alarms: &[usize], delta: usize) -> MatchReport {
    let mut matched: Vec<Option<usize>> = vec![None; gt.len()];
    if !gt.is_empty() {
        for &b in alarms {
            let i = nearest(gt, b);
            let dist = gt[i].abs_diff(b);
            if dist <= delta {
                let better = matched[i].is_none_or(|m| gt[i].abs_diff(m) > dist);
                if better {
                    matched[i] = Some(b);
                }
            }
        }
    }
    MatchReport {
        n_ground_truth: gt.len(),
        n_alarms: alarms.len(),
        n_correct: matched.iter().filter(|m| m.is_some()).count(),
        matched,
        delta,
    }
}

/// `(TPR, FPR)` with `FPR = (N_AL − N_CR) / N_AL`, taken as 0 without alarms.
pub fn tpr_fpr(report: &MatchReport) -> Result<(f64, f64)> {
    if report.n_ground_truth == 0 {
        return Err(Error::NoGroundTruth);
    }
    let tpr = report.n_correct as f64 / report.n_ground_truth as f64;
    let fpr = if report.n_alarms == 0 {
        0.0
    } else {
        (report.n_alarms - report.n_correct) as f64 / report.n_alarms as f64
    };
    Ok((tpr, fpr))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    /// Threshold; `None` for the appended `(1, 1)` point.
    pub tau: Option<f64>,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// One point per threshold in increasing `τ`, then `(1, 1)`.
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Thresholds covering every achievable alarm set: 0 and each distinct
/// positive score.
fn thresholds(scores: &ScoreCurve) -> Vec<f64> {
    let mut taus: Vec<f64> = scores.values().iter().copied().filter(|&p| p > 0.0).collect();
    taus.push(0.0);
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    taus
}

/// Trapezoidal area under `(fpr, tpr)` points after sorting by (FPR, TPR),
/// starting from `(0, 0)` and ending at `(1, 1)`.
pub fn trapezoid_auc(points: &[(f64, f64)]) -> f64 {
    let mut pts = points.to_vec();
    pts.push((0.0, 0.0));
    pts.push((1.0, 1.0));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    pts.windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum()
}

pub fn roc_auc(scores: &ScoreCurve, gt: &[usize], delta: usize) -> Result<RocCurve> {
    if gt.is_empty() {
        return Err(Error::NoGroundTruth);
    }
    let mut points = Vec::new();
    for tau in thresholds(scores) {
        let alarms = detect(scores, tau);
        let (tpr, fpr) = tpr_fpr(&match_alarms(gt, &alarms, delta))?;
        points.push(RocPoint {
            tau: Some(tau),
            fpr,
            tpr,
        });
    }
    let coords: Vec<(f64, f64)> = points.iter().map(|p| (p.fpr, p.tpr)).collect();
    let auc = trapezoid_auc(&coords);
    points.push(RocPoint {
        tau: None,
        fpr: 1.0,
        tpr: 1.0,
    });
    Ok(RocCurve { points, auc })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusSummary {
    pub mean: f64,
    /// Sample standard deviation over `√n`; zero for a single series.
    pub std_error: f64,
    pub count: usize,
}

pub fn corpus_auc(aucs: &[f64]) -> Result<CorpusSummary> {
    if aucs.is_empty() {
        return Err(Error::Empty("corpus without series"));
    }
    let n = aucs.len() as f64;
    let mean = aucs.iter().sum::<f64>() / n;
    let std_error = if aucs.len() < 2 {
        0.0
    } else {
        let var = aucs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    };
    Ok(CorpusSummary {
        mean,
        std_error,
        count: aucs.len(),
    })
}
