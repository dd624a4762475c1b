//! Global (single-window) structural similarity.

use ndarray::Array2;

use crate::dsp::Spectrogram;
use crate::error::{Error, Result};

pub const K1: f64 = 0.01;
pub const K2: f64 = 0.03;

/// SSIM over all pixels at once. The dynamic range `L` is the span of both
/// images together; population moments.
pub fn ssim_matrix(x: &Array2<f64>, y: &Array2<f64>, k1: f64, k2: f64) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::Size(format!(
            "SSIM of {:?} and {:?} matrices",
            x.dim(),
            y.dim()
        )));
    }
    if x.is_empty() {
        return Err(Error::Size("SSIM of empty matrices".into()));
    }
    let (lo, hi) = x
        .iter()
        .chain(y.iter())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if range == 0.0 {
        // both images are the same constant
        return Ok(1.0);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y.iter()) {
        let (dx, dy) = (a - mx, b - my);
        vx += dx * dx;
        vy += dy * dy;
        cxy += dx * dy;
    }
    vx /= n;
    vy /= n;
    cxy /= n;
    let c1 = (range * k1).powi(2);
    let c2 = (range * k2).powi(2);
    Ok((2.0 * mx * my + c1) * (2.0 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2)))
}

pub fn ssim(x: &Spectrogram, y: &Spectrogram) -> Result<f64> {
    ssim_matrix(x.values(), y.values(), K1, K2)
}
