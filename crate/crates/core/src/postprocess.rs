//! From feature tracks to change point scores: fusion, triangular
//! smoothing, the feature-distance dissimilarity, matched filtering and
//! prominence scoring.

use crate::autoencoder::{FeatureTrack, TrackKind};
use crate::error::{Error, Result};

/// Values over time stamps `first_time ..= first_time + len - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityCurve {
    first_time: usize,
    values: Vec<f64>,
}

impl DissimilarityCurve {
    pub fn new(first_time: usize, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "dissimilarities must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { first_time, values })
    }

    pub fn first_time(&self) -> usize {
        self.first_time
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.values.len()).map(|i| self.first_time + i)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            first_time: self.first_time,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Change point score per time stamp; nonzero only at local maxima.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreCurve {
    first_time: usize,
    values: Vec<f64>,
}

impl ScoreCurve {
    pub fn new(first_time: usize, values: Vec<f64>) -> Self {
        Self { first_time, values }
    }

    pub fn first_time(&self) -> usize {
        self.first_time
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(t, P_t)` for every strictly positive score.
    pub fn peaks(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 0.0)
            .map(|(i, &v)| (self.first_time + i, v))
    }
}

/// Nearest-rank quantile: element `⌈p·n⌉` (1-based) of the sorted values.
pub fn quantile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("quantile of an empty set"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("quantile level {p} outside (0, 1]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    // Absorb representation error in p·n, e.g. 0.95 · 100.
    let rank = ((p * n as f64) - 1e-9).ceil().max(1.0) as usize;
    Ok(sorted[rank.min(n) - 1])
}

pub const FUSION_QUANTILE: f64 = 0.95;

/// Weights `(α, β)` that let both domains contribute comparably: each
/// domain is scaled by the 95% quantile of the *other* domain's curve.
pub fn auto_weights(curve_td: &DissimilarityCurve, curve_fd: &DissimilarityCurve) -> Result<(f64, f64)> {
    let alpha = quantile(curve_fd.values(), FUSION_QUANTILE)?;
    let beta = quantile(curve_td.values(), FUSION_QUANTILE)?;
    if alpha == 0.0 && beta == 0.0 {
        return Ok((1.0, 1.0));
    }
    Ok((alpha, beta))
}

/// `[α·s_TD, β·s_FD]` per time stamp.
pub fn fuse_features(td: &FeatureTrack, fd: &FeatureTrack, alpha: f64, beta: f64) -> Result<FeatureTrack> {
    if td.len() != fd.len() {
        return Err(Error::LengthMismatch {
            left: td.len(),
            right: fd.len(),
        });
    }
    if td.first_time() != fd.first_time() {
        return Err(Error::InvalidParameter("tracks start at different time stamps".into()));
    }
    let dim = td.dim() + fd.dim();
    let mut data = Vec::with_capacity(dim * td.len());
    for (a, b) in td.iter().zip(fd.iter()) {
        data.extend(a.iter().map(|v| alpha * v));
        data.extend(b.iter().map(|v| beta * v));
    }
    FeatureTrack::new(TrackKind::Fused, td.first_time(), dim, data)
}

/// Triangular weights `(N - |k|) / N²` for offsets `k = -(N-1) ..= N-1`.
pub fn triangular_kernel(window: usize) -> Vec<f64> {
    let n = window as f64;
    let n2 = n * n;
    (1..2 * window)
        .map(|j| {
            let k = j.min(2 * window - j) as f64;
            k / n2
        })
        .collect()
}

/// Zero-delay triangular moving average with edge value padding.
///
/// Computed as two cascaded length-`N` box sums over the padded signal,
/// which is the same triangle as [`triangular_kernel`].
pub fn triangular_filter(signal: &[f64], window: usize) -> Vec<f64> {
    if signal.is_empty() || window <= 1 {
        return signal.to_vec();
    }
    let reach = window - 1;
    let last = signal.len() - 1;
    let padded: Vec<f64> = (0..signal.len() + 2 * reach)
        .map(|i| signal[i.saturating_sub(reach).min(last)])
        .collect();
    let box_sum = |x: &[f64]| -> Vec<f64> {
        let mut out = Vec::with_capacity(x.len() + 1 - window);
        let mut acc: f64 = x[..window].iter().sum();
        out.push(acc);
        for i in window..x.len() {
            acc += x[i] - x[i - window];
            out.push(acc);
        }
        out
    };
    let once = box_sum(&padded);
    let twice = box_sum(&once);
    let norm = (window * window) as f64;
    twice.into_iter().map(|v| v / norm).collect()
}

/// Smooths every feature coordinate over time.
pub fn smooth_features(track: &FeatureTrack, window: usize) -> Result<FeatureTrack> {
    let dim = track.dim();
    let len = track.len();
    let mut data = vec![0.0; dim * len];
    for j in 0..dim {
        let smoothed = triangular_filter(&track.column(j), window);
        for (i, v) in smoothed.into_iter().enumerate() {
            data[i * dim + j] = v;
        }
    }
    FeatureTrack::new(track.kind(), track.first_time(), dim, data)
}

/// `D_t = ‖s̃_t − s̃_{t+N}‖` for `t` in `[N, T − N]`.
pub fn dissimilarity(track: &FeatureTrack, window: usize) -> Result<DissimilarityCurve> {
    if window == 0 {
        return Err(Error::InvalidParameter("window size must be positive".into()));
    }
    let len = track.len();
    if len <= window {
        return Err(Error::SeriesTooShort {
            needed: 2 * window,
            length: len + track.first_time() - 1,
        });
    }
    let values = (0..len - window)
        .map(|i| {
            track
                .get(i)
                .iter()
                .zip(track.get(i + window))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    DissimilarityCurve::new(track.first_time(), values)
}

/// The dissimilarity curve filtered with the same triangular kernel.
pub fn matched_filter(curve: &DissimilarityCurve, window: usize) -> DissimilarityCurve {
    let values = triangular_filter(curve.values(), window)
        .into_iter()
        .map(|v| v.max(0.0))
        .collect();
    DissimilarityCurve {
        first_time: curve.first_time,
        values,
    }
}

/// Indices of local maxima: `D[i-1] < D[i]` and the first differing value to
/// the right is smaller. A plateau reports its leftmost index; the two
/// boundary points never qualify.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if values[i - 1] < values[i] {
            let mut j = i + 1;
            while j < n && values[j] == values[i] {
                j += 1;
            }
            if j < n && values[j] < values[i] {
                out.push(i);
            }
            i = j;
        } else {
            i += 1;
        }
    }
    out
}

/// Range-minimum queries in O(1) after O(n log n) setup.
struct SparseMin {
    levels: Vec<Vec<f64>>,
}

impl SparseMin {
    fn new(values: &[f64]) -> Self {
        let mut levels = vec![values.to_vec()];
        let mut span = 1;
        while 2 * span <= values.len() {
            let prev = levels.last().unwrap();
            let next: Vec<f64> = (0..=values.len() - 2 * span)
                .map(|i| prev[i].min(prev[i + span]))
                .collect();
            levels.push(next);
            span *= 2;
        }
        Self { levels }
    }

    /// Minimum over `lo..hi` (nonempty).
    fn min(&self, lo: usize, hi: usize) -> f64 {
        let len = hi - lo;
        let level = (usize::BITS - 1 - len.leading_zeros()) as usize;
        let row = &self.levels[level];
        row[lo].min(row[hi - (1 << level)])
    }
}

/// Indices of the nearest strictly greater value on each side.
fn nearest_greater(values: &[f64]) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
    let n = values.len();
    let mut left = vec![None; n];
    let mut right = vec![None; n];
    let mut stack: Vec<usize> = Vec::new();
    for i in 0..n {
        while let Some(&top) = stack.last() {
            if values[top] > values[i] {
                break;
            }
            stack.pop();
        }
        left[i] = stack.last().copied();
        stack.push(i);
    }
    stack.clear();
    for i in (0..n).rev() {
        while let Some(&top) = stack.last() {
            if values[top] > values[i] {
                break;
            }
            stack.pop();
        }
        right[i] = stack.last().copied();
        stack.push(i);
    }
    (left, right)
}

/// Prominence of every local maximum, zero elsewhere.
///
/// For a maximum at `t`, `t_L` / `t_R` are the nearest points with a larger
/// value, clamped to the ends of the curve. The score is `D_t` minus the
/// larger of the minima over the open intervals `(t_L, t)` and `(t, t_R)`.
/// An interval is only empty when it lies against a clamped end; that side
/// then uses the end value itself.
pub fn prominence(curve: &DissimilarityCurve) -> ScoreCurve {
    let v = curve.values();
    let n = v.len();
    let mut scores = vec![0.0; n];
    let maxima = local_maxima(v);
    if !maxima.is_empty() {
        let table = SparseMin::new(v);
        let (left, right) = nearest_greater(v);
        for i in maxima {
            let tl = left[i].unwrap_or(0);
            let tr = right[i].unwrap_or(n - 1);
            let left_min = if tl + 1 < i { table.min(tl + 1, i) } else { v[tl] };
            let right_min = if i + 1 < tr { table.min(i + 1, tr) } else { v[tr] };
            scores[i] = (v[i] - left_min.max(right_min)).max(0.0);
        }
    }
    ScoreCurve::new(curve.first_time(), scores)
}

/// Peak height as the score: `D_t` at local maxima, zero elsewhere.
pub fn height_scores(curve: &DissimilarityCurve) -> ScoreCurve {
    let v = curve.values();
    let mut scores = vec![0.0; v.len()];
    for i in local_maxima(v) {
        scores[i] = v[i];
    }
    ScoreCurve::new(curve.first_time(), scores)
}

/// Time stamps whose score exceeds `tau`, ascending.
pub fn detect(scores: &ScoreCurve, tau: f64) -> Vec<usize> {
    scores
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > tau)
        .map(|(i, _)| scores.first_time() + i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use proptest::prelude::*;

    fn curve(values: &[f64]) -> DissimilarityCurve {
        DissimilarityCurve::new(20, values.to_vec()).unwrap()
    }

    fn track(rows: &[Vec<f64>]) -> FeatureTrack {
        FeatureTrack::from_rows(TrackKind::Time, 5, rows).unwrap()
    }

    /// Direct double-loop convolution with clamped indices.
    fn convolve_oracle(x: &[f64], n: usize) -> Vec<f64> {
        let v = triangular_kernel(n);
        let last = x.len() as isize - 1;
        (0..x.len() as isize)
            .map(|t| {
                (-(n as isize) + 1..n as isize)
                    .map(|k| {
                        let idx = (t + k).clamp(0, last) as usize;
                        v[(n as isize - 1 + k) as usize] * x[idx]
                    })
                    .sum()
            })
            .collect()
    }

    /// Literal evaluation of the prominence definition, O(T²).
    fn prominence_oracle(d: &[f64]) -> Vec<f64> {
        let n = d.len();
        let mut out = vec![0.0; n];
        for t in local_maxima(d) {
            let tl = (0..t).rev().find(|&j| d[j] > d[t]).unwrap_or(0);
            let tr = (t + 1..n).find(|&j| d[j] > d[t]).unwrap_or(n - 1);
            let lmin = if tl + 1 < t {
                d[tl + 1..t].iter().cloned().fold(f64::INFINITY, f64::min)
            } else {
                d[tl]
            };
            let rmin = if t + 1 < tr {
                d[t + 1..tr].iter().cloned().fold(f64::INFINITY, f64::min)
            } else {
                d[tr]
            };
            out[t] = d[t] - lmin.max(rmin);
        }
        out
    }

    #[test]
    fn quantile_nearest_rank() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(quantile(&v, 0.95).unwrap(), 95.0);
        assert_eq!(quantile(&v, 1.0).unwrap(), 100.0);
        assert_eq!(quantile(&v, 0.001).unwrap(), 1.0);
        assert_eq!(quantile(&[2.5; 7], 0.3).unwrap(), 2.5);
        assert!(quantile(&[], 0.5).is_err());
    }

    #[test]
    fn quantile_matches_sort_oracle() {
        let mut rng = SeededRng::new(5);
        let v: Vec<f64> = (0..1000).map(|_| rng.standard_normal()).collect();
        let mut sorted = v.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for p in [0.1, 0.5, 0.95, 0.999, 1.0] {
            let rank = (p * 1000.0f64).round() as usize;
            assert_eq!(quantile(&v, p).unwrap(), sorted[rank - 1]);
        }
    }

    #[test]
    fn auto_weights_symmetry_and_zero_fd() {
        let c = curve(&[0.1, 0.5, 0.2, 0.9]);
        let (a, b) = auto_weights(&c, &c).unwrap();
        assert_eq!(a, b);
        let zero = curve(&[0.0; 4]);
        let (a, b) = auto_weights(&c, &zero).unwrap();
        assert_eq!(a, 0.0);
        assert_eq!(b, 0.9);
        assert_eq!(auto_weights(&zero, &zero).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn auto_weights_constructed_quantiles() {
        // 95% quantiles 0.2 (TD) and 0.6 (FD) by construction.
        let mut td: Vec<f64> = (0..100).map(|i| 0.2 * i as f64 / 94.0).collect();
        td.iter_mut().skip(95).for_each(|v| *v = 5.0);
        td[94] = 0.2;
        let fd: Vec<f64> = td.iter().map(|v| if *v == 5.0 { 9.0 } else { 3.0 * v }).collect();
        let (a, b) = auto_weights(&curve(&td), &curve(&fd)).unwrap();
        assert!((a - 0.6).abs() < 1e-12);
        assert!((b - 0.2).abs() < 1e-12);
    }

    #[test]
    fn fuse_modes() {
        let td = track(&[vec![0.5], vec![-0.5]]);
        let fd = track(&[vec![0.25], vec![1.0]]);
        let only_td = fuse_features(&td, &fd, 1.0, 0.0).unwrap();
        assert_eq!(only_td.get(1), &[-0.5, 0.0]);
        let only_fd = fuse_features(&td, &fd, 0.0, 1.0).unwrap();
        assert_eq!(only_fd.get(0), &[0.0, 0.25]);
        let both = fuse_features(&td, &fd, 1.0, 1.0).unwrap();
        assert_eq!(both.get(0), &[0.5, 0.25]);
        assert_eq!(both.kind(), TrackKind::Fused);
        let short = track(&[vec![0.5]]);
        assert!(matches!(fuse_features(&td, &short, 1.0, 1.0), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn kernel_for_three() {
        let v = triangular_kernel(3);
        let expect = [1.0, 2.0, 3.0, 2.0, 1.0].map(|x| x / 9.0);
        for (a, b) in v.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn impulse_response_is_the_kernel() {
        let n = 4;
        let mut x = vec![0.0; 15];
        x[7] = 1.0;
        let y = triangular_filter(&x, n);
        let v = triangular_kernel(n);
        for (i, &w) in v.iter().enumerate() {
            assert!((y[7 - (n - 1) + i] - w).abs() < 1e-15);
        }
        assert!(y[..7 - (n - 1)].iter().all(|&a| a.abs() < 1e-15));
        let spike = matched_filter(&curve(&{
            let mut c = vec![0.0; 11];
            c[5] = 1.0;
            c
        }), 3);
        assert!((spike.values()[5] - 3.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn smoothing_preserves_constant_tracks() {
        let t = track(&vec![vec![0.3, -0.7]; 12]);
        let s = smooth_features(&t, 4).unwrap();
        for v in s.iter() {
            assert!((v[0] - 0.3).abs() < 1e-12 && (v[1] + 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn dissimilarity_of_constant_track_is_zero() {
        let t = track(&vec![vec![0.4]; 30]);
        let d = dissimilarity(&t, 5).unwrap();
        assert_eq!(d.len(), 30 - 5);
        assert_eq!(d.first_time(), 5);
        assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dissimilarity_of_step_track() {
        // Step of height 0.6 between the track positions 9 and 10.
        let n = 4;
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![if i < 10 { 0.1 } else { 0.7 }]).collect();
        let d = dissimilarity(&track(&rows), n).unwrap();
        // Closed form: D_i = 0.6 when i < 10 <= i + n, else 0.
        for (i, &v) in d.values().iter().enumerate() {
            let expected = if i < 10 && 10 <= i + n { 0.6 } else { 0.0 };
            assert!((v - expected).abs() < 1e-12, "{i}: {v}");
        }
        let smoothed = dissimilarity(&smooth_features(&track(&rows), n).unwrap(), n).unwrap();
        // Four consecutive kernel taps (2 + 3 + 4 + 3) / 16 of the step.
        let peak = smoothed.values().iter().cloned().fold(0.0, f64::max);
        assert!((peak - 0.45).abs() < 1e-12, "{peak}");
        assert_eq!(local_maxima(smoothed.values()).len(), 1);
    }

    #[test]
    fn dissimilarity_needs_two_windows() {
        let err = dissimilarity(&track(&vec![vec![0.0]; 5]), 5).unwrap_err();
        assert!(err.to_string().contains("series too short for window size"));
    }

    #[test]
    fn dissimilarity_ignores_feature_order() {
        let mut rng = SeededRng::new(4);
        let rows: Vec<Vec<f64>> = (0..30).map(|_| (0..3).map(|_| rng.uniform_in(-1.0, 1.0)).collect()).collect();
        let permuted: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[2], r[0], r[1]]).collect();
        let a = dissimilarity(&track(&rows), 4).unwrap();
        let b = dissimilarity(&track(&permuted), 4).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn matched_filter_matches_convolution() {
        let mut rng = SeededRng::new(8);
        let x: Vec<f64> = (0..200).map(|_| rng.uniform()).collect();
        let y = matched_filter(&curve(&x), 7);
        for (a, b) in y.values().iter().zip(convolve_oracle(&x, 7)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn prominence_example() {
        let s = prominence(&curve(&[0.0, 1.0, 0.0, 3.0, 0.0, 2.0, 0.0]));
        assert_eq!(s.values(), &[0.0, 1.0, 0.0, 3.0, 0.0, 2.0, 0.0]);
        assert_eq!(s.first_time(), 20);
    }

    #[test]
    fn prominence_single_peak() {
        let c = [0.5, 0.2, 0.4, 1.3, 0.9, 0.7, 0.8];
        let s = prominence(&curve(&c));
        // Descends to 0.2 on the left and 0.7 on the right.
        assert!((s.values()[3] - (1.3 - 0.7)).abs() < 1e-15);
    }

    #[test]
    fn monotone_curve_has_no_peaks() {
        let c: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        assert!(prominence(&curve(&c)).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn plateau_counts_once_at_its_left_end() {
        assert_eq!(local_maxima(&[0.0, 2.0, 2.0, 2.0, 1.0]), vec![1]);
        assert!(local_maxima(&[0.0, 2.0, 2.0, 3.0]).is_empty());
        assert!(local_maxima(&[0.0, 2.0, 2.0]).is_empty());
        let s = prominence(&curve(&[0.0, 2.0, 2.0, 2.0, 1.0, 0.0]));
        assert_eq!(s.values(), &[0.0, 2.0 - 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn detect_threshold_semantics() {
        let s = prominence(&curve(&[0.0, 1.0, 0.0, 3.0, 0.0, 2.0, 0.0]));
        assert_eq!(detect(&s, 0.0), vec![21, 23, 25]);
        assert!(detect(&s, 3.0).is_empty());
        assert_eq!(detect(&s, 2.5), vec![23]);
    }

    #[test]
    fn prominence_matches_oracle_on_random_curves() {
        let mut rng = SeededRng::new(12);
        for _ in 0..1000 {
            let len = 1 + rng.index(200);
            // Quantised values so ties and plateaus occur.
            let d: Vec<f64> = (0..len).map(|_| rng.index(12) as f64 / 4.0).collect();
            let fast = prominence(&curve(&d));
            assert_eq!(fast.values(), prominence_oracle(&d).as_slice());
        }
    }

    proptest! {
        #[test]
        fn kernel_sums_to_one(n in 1usize..500) {
            let s: f64 = triangular_kernel(n).iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
        }

        #[test]
        fn filter_matches_oracle(x in prop::collection::vec(0.0f64..1.0, 1..80), n in 1usize..12) {
            for (a, b) in triangular_filter(&x, n).iter().zip(convolve_oracle(&x, n)) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn score_bound(x in prop::collection::vec(0.0f64..1.0, 3..100)) {
            let s = prominence(&curve(&x));
            let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
            for (p, d) in s.values().iter().zip(&x) {
                prop_assert!(*p >= 0.0 && *p <= d - min + 1e-15);
            }
        }

        #[test]
        fn scaling_equivariance(x in prop::collection::vec(0.0f64..1.0, 3..100), c in 0.1f64..10.0, tau in 0.0f64..0.5) {
            let a = prominence(&curve(&x));
            let b = prominence(&curve(&x).scaled(c));
            for (p, q) in a.values().iter().zip(b.values()) {
                prop_assert!((p * c - q).abs() <= 1e-12 * c);
            }
            let base = detect(&a, tau);
            let scaled = detect(&b, tau * c);
            // Allow disagreement only for scores within rounding of the cut.
            for t in base.iter().filter(|t| !scaled.contains(t)).chain(scaled.iter().filter(|t| !base.contains(t))) {
                let p = a.values()[t - a.first_time()];
                prop_assert!((p - tau).abs() < 1e-12);
            }
        }
    }
}
