use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Frame length and hop, in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameSpec {
    pub len: usize,
    pub hop: usize,
}

impl FrameSpec {
    /// `len = round(frame_ms / 1000 * fs)`, `hop = floor(len * (1 - overlap))`.
    pub fn from_ms(sample_rate: f64, frame_ms: f64, overlap: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&overlap) {
            return Err(Error::Config(format!(
                "overlap fraction must be in [0, 1), got {overlap}"
            )));
        }
        if !(frame_ms.is_finite() && frame_ms > 0.0) {
            return Err(Error::Config(format!("frame length {frame_ms} ms")));
        }
        let len = (frame_ms / 1000.0 * sample_rate).round() as usize;
        if len < 2 {
            return Err(Error::Size(format!(
                "{frame_ms} ms at {sample_rate} Hz gives a frame of {len} samples"
            )));
        }
        let hop = (len as f64 * (1.0 - overlap)).floor() as usize;
        if hop == 0 {
            return Err(Error::Config("overlap leaves a zero hop".into()));
        }
        Ok(Self { len, hop })
    }

    /// `1 + ceil((n - len) / hop)`: a zero-padded tail frame is emitted
    /// whenever samples remain after the last full frame.
    pub fn frame_count(&self, n: usize) -> usize {
        if n < self.len {
            0
        } else {
            1 + (n - self.len).div_ceil(self.hop)
        }
    }
}

pub fn frame_slice(x: &[f64], spec: FrameSpec) -> Result<Vec<Vec<f64>>> {
    if x.len() < spec.len {
        return Err(Error::Size(format!(
            "signal of {} samples is shorter than one {}-sample frame",
            x.len(),
            spec.len
        )));
    }
    let count = spec.frame_count(x.len());
    Ok((0..count)
        .map(|i| {
            let start = i * spec.hop;
            let end = (start + spec.len).min(x.len());
            let mut frame = x[start..end].to_vec();
            frame.resize(spec.len, 0.0);
            frame
        })
        .collect())
}

/// Splits a signal into overlapping frames; the tail frame is zero-padded.
pub fn frame_signal(x: &TimeSeries, frame_ms: f64, overlap: f64) -> Result<Vec<Vec<f64>>> {
    let spec = FrameSpec::from_ms(x.sample_rate(), frame_ms, overlap)?;
    frame_slice(x.samples(), spec)
}

pub fn hamming_window(len: usize) -> Result<Vec<f64>> {
    if len < 2 {
        return Err(Error::Size(format!("Hamming window needs L >= 2, got {len}")));
    }
    let denom = (len - 1) as f64;
    Ok((0..len)
        .map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / denom).cos())
        .collect())
}

/// Full N-point DFT of a real frame.
pub fn dft(frame: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = frame.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    if buf.is_empty() {
        return buf;
    }
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// `|X(k)|` for `k = 0..N-1`, with `N` the frame length.
pub fn dft_magnitude(frame: &[f64]) -> Vec<f64> {
    dft(frame).into_iter().map(|c| c.norm()).collect()
}
