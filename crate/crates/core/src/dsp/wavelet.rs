//! Daubechies-3 discrete wavelet transform with half-sample symmetric
//! boundary extension, and universal-threshold soft denoising.
//!
//! Each level maps `n` samples to `floor((n + 5) / 2)` approximation and
//! detail coefficients. Synthesis is the transpose of analysis restricted to
//! the original support, which is exact for this extension mode.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

pub const DB3_LEN: usize = 6;

/// db3 decomposition low-pass filter, from its closed form.
pub fn db3_lowpass() -> [f64; DB3_LEN] {
    let r = 10f64.sqrt();
    let s = (5.0 + 2.0 * r).sqrt();
    let norm = 16.0 * std::f64::consts::SQRT_2;
    // closed form is the reconstruction filter; analysis is its reverse
    let rec = [
        1.0 + r + s,
        5.0 + r + 3.0 * s,
        10.0 - 2.0 * r + 2.0 * s,
        10.0 - 2.0 * r - 2.0 * s,
        5.0 + r - 3.0 * s,
        1.0 + r - s,
    ];
    let mut dec = [0.0; DB3_LEN];
    for (d, r) in dec.iter_mut().zip(rec.iter().rev()) {
        *d = r / norm;
    }
    dec
}

/// Quadrature mirror of [`db3_lowpass`]: `g[k] = (-1)^k h[F-1-k]`.
pub fn db3_highpass() -> [f64; DB3_LEN] {
    let h = db3_lowpass();
    let mut g = [0.0; DB3_LEN];
    for (k, gk) in g.iter_mut().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        *gk = sign * h[DB3_LEN - 1 - k];
    }
    g
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletDecomposition {
    /// Approximation at the deepest level.
    pub approx: Vec<f64>,
    /// Detail coefficients, finest level first.
    pub details: Vec<Vec<f64>>,
    pub levels: usize,
    pub wavelet: String,
    /// Input length at each level, finest first.
    pub input_lens: Vec<usize>,
}

impl WaveletDecomposition {
    pub fn coefficient_count(&self) -> usize {
        self.approx.len() + self.details.iter().map(Vec::len).sum::<usize>()
    }
}

fn reflect(mut i: isize, n: isize) -> usize {
    loop {
        if i < 0 {
            i = -1 - i;
        } else if i >= n {
            i = 2 * n - 1 - i;
        } else {
            return i as usize;
        }
    }
}

/// One analysis step: `c[o] = Σ_j f[j] · x̃[2o + 1 − j]`.
pub fn dwt_step(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let h = db3_lowpass();
    let g = db3_highpass();
    let n = x.len() as isize;
    let out_len = (x.len() + DB3_LEN - 1) / 2;
    let mut approx = Vec::with_capacity(out_len);
    let mut detail = Vec::with_capacity(out_len);
    for o in 0..out_len as isize {
        let (mut a, mut d) = (0.0, 0.0);
        for j in 0..DB3_LEN {
            let v = x[reflect(2 * o + 1 - j as isize, n)];
            a += h[j] * v;
            d += g[j] * v;
        }
        approx.push(a);
        detail.push(d);
    }
    (approx, detail)
}

/// One synthesis step back to `n` samples.
pub fn idwt_step(approx: &[f64], detail: &[f64], n: usize) -> Vec<f64> {
    let h = db3_lowpass();
    let g = db3_highpass();
    let mut out = vec![0.0; n];
    for (o, (a, d)) in approx.iter().zip(detail).enumerate() {
        for j in 0..DB3_LEN {
            let t = 2 * o as isize + 1 - j as isize;
            if (0..n as isize).contains(&t) {
                out[t as usize] += a * h[j] + d * g[j];
            }
        }
    }
    out
}

pub fn min_len(levels: usize) -> usize {
    DB3_LEN << levels
}

pub fn decompose(x: &[f64], levels: usize) -> Result<WaveletDecomposition> {
    if levels == 0 {
        return Err(Error::Config("wavelet levels must be at least 1".into()));
    }
    if x.len() < min_len(levels) {
        return Err(Error::Size(format!(
            "{} samples is too short for a {levels}-level db3 transform (need {})",
            x.len(),
            min_len(levels)
        )));
    }
    let mut current = x.to_vec();
    let mut details = Vec::with_capacity(levels);
    let mut input_lens = Vec::with_capacity(levels);
    for _ in 0..levels {
        input_lens.push(current.len());
        let (a, d) = dwt_step(&current);
        details.push(d);
        current = a;
    }
    Ok(WaveletDecomposition {
        approx: current,
        details,
        levels,
        wavelet: "db3".into(),
        input_lens,
    })
}

pub fn reconstruct(dec: &WaveletDecomposition) -> Result<Vec<f64>> {
    if dec.details.len() != dec.levels || dec.input_lens.len() != dec.levels {
        return Err(Error::Size("inconsistent wavelet decomposition".into()));
    }
    let mut current = dec.approx.clone();
    for level in (0..dec.levels).rev() {
        let d = &dec.details[level];
        if d.len() != current.len() {
            return Err(Error::Size(format!(
                "level {} has {} detail and {} approximation coefficients",
                level + 1,
                d.len(),
                current.len()
            )));
        }
        current = idwt_step(&current, d, dec.input_lens[level]);
    }
    Ok(current)
}

pub fn db3_decompose(x: &TimeSeries, levels: usize) -> Result<WaveletDecomposition> {
    decompose(x.samples(), levels)
}

pub fn db3_reconstruct(dec: &WaveletDecomposition, like: &TimeSeries) -> Result<TimeSeries> {
    like.with_samples(reconstruct(dec)?, like.unit())
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `median(|d1|) / 0.6745 * sqrt(2 ln n)`.
pub fn universal_threshold(finest_detail: &[f64], n: usize) -> f64 {
    let mut abs: Vec<f64> = finest_detail.iter().map(|v| v.abs()).collect();
    let sigma = median(&mut abs) / 0.6745;
    sigma * (2.0 * (n as f64).ln()).sqrt()
}

pub fn soft_threshold(v: f64, thr: f64) -> f64 {
    v.signum() * (v.abs() - thr).max(0.0)
}

pub fn denoise(x: &[f64], levels: usize) -> Result<Vec<f64>> {
    let mut dec = decompose(x, levels)?;
    let thr = universal_threshold(&dec.details[0], x.len());
    for d in dec.details.iter_mut() {
        for v in d.iter_mut() {
            *v = soft_threshold(*v, thr);
        }
    }
    reconstruct(&dec)
}

pub fn db3_denoise(x: &TimeSeries, levels: usize) -> Result<TimeSeries> {
    x.with_samples(denoise(x.samples(), levels)?, x.unit())
}
