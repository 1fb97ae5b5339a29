//! Rescaling, sliding windows and cropped DFT magnitudes.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Time,
    Frequency,
}

/// One stacked vector per time stamp `t` in `[N, T]`, stride 1.
///
/// Time-domain vectors hold the per-channel windows back to back
/// (`[x¹_t, …, x^d_t]`, each of length `N`); frequency-domain vectors hold
/// the cropped spectra of those windows (`M` bins per channel).
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSet {
    domain: Domain,
    window: usize,
    spectrum_len: Option<usize>,
    channels: usize,
    dim: usize,
    data: Vec<f64>,
}

impl WindowSet {
    /// Builds a set directly from row-major vectors.
    pub fn from_rows(domain: Domain, window: usize, channels: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).ok_or(Error::Empty("window set"))?;
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
        let spectrum_len = match domain {
            Domain::Time => None,
            Domain::Frequency => Some(dim / channels.max(1)),
        };
        Ok(Self {
            domain,
            window,
            spectrum_len,
            channels,
            dim,
            data,
        })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Window size `N`.
    pub fn window(&self) -> usize {
        self.window
    }

    /// Cropped spectrum length `M` (frequency domain only).
    pub fn spectrum_len(&self) -> Option<usize> {
        self.spectrum_len
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Length of every vector (`Nd` or `Md`).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of windows, `T - N + 1`.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, index: usize) -> &[f64] {
        &self.data[index * self.dim..(index + 1) * self.dim]
    }

    /// Time stamp of the window at `index`, i.e. the last sample it covers.
    pub fn time_of(&self, index: usize) -> usize {
        self.window + index
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }
}

fn rescale_slice(values: &[f64]) -> Vec<f64> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if !(range > 0.0) {
        return vec![0.0; values.len()];
    }
    values
        .iter()
        .map(|&v| (2.0 * (v - lo) / range - 1.0).clamp(-1.0, 1.0))
        .collect()
}

/// Maps every channel affinely onto `[-1, 1]`, independently of the others.
/// A constant channel becomes all zeros.
pub fn rescale_channels(ts: &TimeSeries) -> TimeSeries {
    ts.map_channels(rescale_slice)
}

pub fn make_td_windows(ts: &TimeSeries, window: usize) -> Result<WindowSet> {
    let length = ts.len();
    if window == 0 {
        return Err(Error::InvalidParameter("window size must be positive".into()));
    }
    if window > length {
        return Err(Error::WindowTooLarge { window, length });
    }
    let d = ts.dims();
    let count = length - window + 1;
    let dim = window * d;
    let mut data = Vec::with_capacity(count * dim);
    for start in 0..count {
        for ch in ts.channels() {
            data.extend_from_slice(&ch[start..start + window]);
        }
    }
    Ok(WindowSet {
        domain: Domain::Time,
        window,
        spectrum_len: None,
        channels: d,
        dim,
        data,
    })
}

/// Number of non-redundant bins of a real signal of length `window`.
pub fn default_spectrum_len(window: usize) -> usize {
    window / 2 + 1
}

/// Reusable planned transform for `|DFT|` cropped to the first `M` bins.
pub struct MagnitudeSpectrum {
    fft: Arc<dyn Fft<f64>>,
    buffer: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
    bins: usize,
}

impl MagnitudeSpectrum {
    pub fn new(window: usize, bins: usize) -> Result<Self> {
        if bins == 0 || bins > window {
            return Err(Error::InvalidParameter(format!(
                "spectrum length must be in [1, {window}], got {bins}"
            )));
        }
        let fft = FftPlanner::new().plan_fft_forward(window);
        let scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
        Ok(Self {
            fft,
            buffer: vec![Complex::default(); window],
            scratch,
            bins,
        })
    }

    pub fn apply_into(&mut self, window: &[f64], out: &mut Vec<f64>) -> Result<()> {
        if window.len() != self.buffer.len() {
            return Err(Error::DimensionMismatch {
                expected: self.buffer.len(),
                got: window.len(),
            });
        }
        for (b, &x) in self.buffer.iter_mut().zip(window) {
            *b = Complex::new(x, 0.0);
        }
        self.fft.process_with_scratch(&mut self.buffer, &mut self.scratch);
        out.extend(self.buffer[..self.bins].iter().map(|c| c.norm()));
        Ok(())
    }
}

/// `|DFT(window)|` restricted to bins `0..bins`.
pub fn dft_magnitude(window: &[f64], bins: usize) -> Result<Vec<f64>> {
    if window.is_empty() {
        return Err(Error::Empty("window"));
    }
    let mut spectrum = MagnitudeSpectrum::new(window.len(), bins)?;
    let mut out = Vec::with_capacity(bins);
    spectrum.apply_into(window, &mut out)?;
    Ok(out)
}

/// Min-max rescales every coordinate of the set to `[-1, 1]` across time.
pub fn rescale_dimensions(set: &mut WindowSet) {
    let dim = set.dim;
    let count = set.len();
    let mut column = vec![0.0; count];
    for j in 0..dim {
        for (i, c) in column.iter_mut().enumerate() {
            *c = set.data[i * dim + j];
        }
        let scaled = rescale_slice(&column);
        for (i, v) in scaled.into_iter().enumerate() {
            set.data[i * dim + j] = v;
        }
    }
}

/// Frequency-domain counterpart of a time-domain window set, with every
/// spectral coordinate rescaled to `[-1, 1]` over time.
pub fn make_fd_windows(td: &WindowSet, bins: usize) -> Result<WindowSet> {
    if td.domain != Domain::Time {
        return Err(Error::InvalidParameter(
            "frequency windows are built from time-domain windows".into(),
        ));
    }
    let n = td.window;
    let mut spectrum = MagnitudeSpectrum::new(n, bins)?;
    let dim = bins * td.channels;
    let mut data = Vec::with_capacity(dim * td.len());
    for w in td.iter() {
        for x in w.chunks_exact(n) {
            spectrum.apply_into(x, &mut data)?;
        }
    }
    let mut out = WindowSet {
        domain: Domain::Frequency,
        window: n,
        spectrum_len: Some(bins),
        channels: td.channels,
        dim,
        data,
    };
    rescale_dimensions(&mut out);
    Ok(out)
}
