//! Separable Gaussian smoothing and finite-difference gradients on 2-D
//! matrices. Boundaries use half-sample reflection (`d c b a | a b c d`).

use ndarray::{Array2, Axis};

/// Index into `0..n` with half-sample symmetric reflection.
pub(crate) fn reflect(mut i: isize, n: usize) -> usize {
    let n = n as isize;
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

/// Normalised 1-D Gaussian taps, truncated at `truncate * sigma`.
pub fn gaussian_kernel(sigma: f64, truncate: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (truncate * sigma + 0.5) as isize;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / sum).collect()
}

pub fn convolve_axis(m: &Array2<f64>, kernel: &[f64], axis: Axis) -> Array2<f64> {
    let radius = (kernel.len() / 2) as isize;
    let n = m.len_of(axis);
    let mut out = Array2::zeros(m.dim());
    for (src, mut dst) in m.lanes(axis).into_iter().zip(out.lanes_mut(axis)) {
        for i in 0..n {
            let mut acc = 0.0;
            for (k, w) in kernel.iter().enumerate() {
                acc += w * src[reflect(i as isize + k as isize - radius, n)];
            }
            dst[i] = acc;
        }
    }
    out
}

/// 2-D Gaussian blur, truncated at 4σ.
pub fn gaussian_blur(m: &Array2<f64>, sigma: f64) -> Array2<f64> {
    let k = gaussian_kernel(sigma, 4.0);
    let tmp = convolve_axis(m, &k, Axis(0));
    convolve_axis(&tmp, &k, Axis(1))
}

/// Central differences in the interior, one-sided at the ends.
pub fn gradient(m: &Array2<f64>, axis: Axis) -> Array2<f64> {
    let n = m.len_of(axis);
    let mut out = Array2::zeros(m.dim());
    if n < 2 {
        return out;
    }
    for (src, mut dst) in m.lanes(axis).into_iter().zip(out.lanes_mut(axis)) {
        dst[0] = src[1] - src[0];
        dst[n - 1] = src[n - 1] - src[n - 2];
        for i in 1..n - 1 {
            dst[i] = 0.5 * (src[i + 1] - src[i - 1]);
        }
    }
    out
}
