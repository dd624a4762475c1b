//! Mel scale, triangular filter bank and cepstral coefficients.

use std::f64::consts::PI;

use ndarray::Array2;

use crate::dsp::{dft_magnitude, hamming_window};
use crate::error::{Error, Result};

/// Floor added to each filter output before the logarithm.
pub const LOG_FLOOR: f64 = 1e-10;

pub fn mel_from_hz(f: f64) -> Result<f64> {
    if !(f >= 0.0) {
        return Err(Error::Domain(format!("frequency must be >= 0, got {f}")));
    }
    Ok(2595.0 * (1.0 + f / 700.0).log10())
}

pub fn hz_from_mel(m: f64) -> Result<f64> {
    if !(m >= 0.0) {
        return Err(Error::Domain(format!("mel value must be >= 0, got {m}")));
    }
    Ok(700.0 * (10f64.powf(m / 2595.0) - 1.0))
}

/// Triangular filters over `n_fft` DFT bins. Boundary points sit at
/// fractional bin positions `f * n_fft / fs`; every filter peaks at 2.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterBank {
    pub n_filters: usize,
    pub n_fft_bins: usize,
    pub sample_rate: f64,
    pub freq_range: [f64; 2],
    /// `M + 2` boundary points in bin units, ascending.
    pub points: Vec<f64>,
    /// `[M × n_fft_bins]`
    pub weights: Array2<f64>,
}

/// Weight of a triangle with feet `lo`, `hi` and apex `mid` (value 2) at `k`.
pub fn triangle(k: f64, lo: f64, mid: f64, hi: f64) -> f64 {
    if k < lo || k > hi {
        0.0
    } else if k <= mid {
        2.0 * (k - lo) / (mid - lo)
    } else {
        2.0 * (hi - k) / (hi - mid)
    }
}

pub fn build_mel_filterbank(
    n_filters: usize,
    n_fft: usize,
    sample_rate: f64,
    f_min: f64,
    f_max: f64,
) -> Result<MelFilterBank> {
    if n_filters == 0 {
        return Err(Error::Config("a filter bank needs at least one filter".into()));
    }
    if n_fft < 2 {
        return Err(Error::Config(format!("n_fft must be >= 2, got {n_fft}")));
    }
    if !(f_min >= 0.0 && f_min < f_max && f_max <= sample_rate / 2.0) {
        return Err(Error::Config(format!(
            "filter bank range [{f_min}, {f_max}] Hz invalid at {sample_rate} Hz"
        )));
    }
    let (m_lo, m_hi) = (mel_from_hz(f_min)?, mel_from_hz(f_max)?);
    let step = (m_hi - m_lo) / (n_filters + 1) as f64;
    let points = (0..n_filters + 2)
        .map(|i| Ok(hz_from_mel(m_lo + step * i as f64)? * n_fft as f64 / sample_rate))
        .collect::<Result<Vec<_>>>()?;

    let weights = Array2::from_shape_fn((n_filters, n_fft), |(m, k)| {
        triangle(k as f64, points[m], points[m + 1], points[m + 2])
    });
    let fb = MelFilterBank {
        n_filters,
        n_fft_bins: n_fft,
        sample_rate,
        freq_range: [f_min, f_max],
        points,
        weights,
    };
    let empty = fb.empty_filters();
    if !empty.is_empty() {
        log::warn!(
            "{} of {n_filters} mel filters cover no DFT bin at n_fft={n_fft}; their outputs are floored",
            empty.len()
        );
    }
    Ok(fb)
}

impl MelFilterBank {
    /// Indices of filters whose weights are all zero.
    pub fn empty_filters(&self) -> Vec<usize> {
        self.weights
            .rows()
            .into_iter()
            .enumerate()
            .filter(|(_, r)| r.iter().all(|&w| w == 0.0))
            .map(|(m, _)| m)
            .collect()
    }
}

/// `s(m) = Σ_k |X(k)|² H_m(k)`.
pub fn mel_spectrum(frame_mag: &[f64], fb: &MelFilterBank) -> Result<Vec<f64>> {
    if frame_mag.len() != fb.n_fft_bins {
        return Err(Error::Size(format!(
            "spectrum has {} bins, filter bank expects {}",
            frame_mag.len(),
            fb.n_fft_bins
        )));
    }
    let power: Vec<f64> = frame_mag.iter().map(|v| v * v).collect();
    Ok(mel_from_power(&power, fb))
}

pub(crate) fn mel_from_power(power: &[f64], fb: &MelFilterBank) -> Vec<f64> {
    fb.weights
        .rows()
        .into_iter()
        .map(|row| row.iter().zip(power).map(|(w, p)| w * p).sum())
        .collect()
}

/// `c(n) = Σ_{m=1..M} log10(s(m) + ε) cos(πn(m − 0.5)/M)` for `n < n_coeffs`.
pub fn cepstrum(mel: &[f64], n_coeffs: usize) -> Result<Vec<f64>> {
    let m_count = mel.len();
    if n_coeffs == 0 || n_coeffs > m_count {
        return Err(Error::Config(format!(
            "need 1 <= C <= M, got C={n_coeffs}, M={m_count}"
        )));
    }
    let logs: Vec<f64> = mel.iter().map(|s| (s + LOG_FLOOR).log10()).collect();
    Ok((0..n_coeffs)
        .map(|n| {
            logs.iter()
                .enumerate()
                .map(|(i, l)| {
                    let m = (i + 1) as f64;
                    l * (PI * n as f64 * (m - 0.5) / m_count as f64).cos()
                })
                .sum()
        })
        .collect())
}

/// Hamming window, zero-pad to the bank's DFT size, then the cepstrum.
pub fn mfcc(frame: &[f64], fb: &MelFilterBank, n_coeffs: usize) -> Result<Vec<f64>> {
    if frame.len() > fb.n_fft_bins {
        return Err(Error::Size(format!(
            "frame of {} samples exceeds the {}-point DFT",
            frame.len(),
            fb.n_fft_bins
        )));
    }
    let window = hamming_window(frame.len())?;
    let mut buf = vec![0.0; fb.n_fft_bins];
    for ((b, x), w) in buf.iter_mut().zip(frame).zip(&window) {
        *b = x * w;
    }
    let mel = mel_spectrum(&dft_magnitude(&buf), fb)?;
    cepstrum(&mel, n_coeffs)
}
