//! Hessian ridge measure and multiplicative blending.

use ndarray::{Array2, Axis, Zip};

use super::filter::{gaussian_blur, gradient};
use super::tensor::eigen_2x2;
use crate::dsp::{Scale, Spectrogram};
use crate::error::Result;

/// `max(0, −λ_min)` of the Hessian of the σ-smoothed matrix. Bright
/// line-like crests have strongly negative curvature across the line.
pub fn ridge_measure(m: &Array2<f64>, sigma: f64) -> Array2<f64> {
    let g = gaussian_blur(m, sigma);
    let gt = gradient(&g, Axis(0));
    let gf = gradient(&g, Axis(1));
    let h_tt = gradient(&gt, Axis(0));
    let h_ff = gradient(&gf, Axis(1));
    let h_tf = gradient(&gf, Axis(0));
    Zip::from(&h_tt)
        .and(&h_ff)
        .and(&h_tf)
        .map_collect(|&a, &d, &b| (-eigen_2x2(a, d, b).1).max(0.0))
}

/// `m · (1 + R / max R)`; returned unchanged when `R` vanishes everywhere.
pub fn ridge_blend(m: &Array2<f64>, sigma: f64) -> Array2<f64> {
    let r = ridge_measure(m, sigma);
    let peak = r.iter().fold(0.0f64, |acc, &v| acc.max(v));
    if peak <= 0.0 {
        return m.clone();
    }
    Zip::from(m).and(&r).map_collect(|&v, &rv| v * (1.0 + rv / peak))
}

pub fn ridge_filter(s: &Spectrogram, sigma: f64) -> Result<Spectrogram> {
    s.expect_scale(Scale::Power)?;
    s.with_values(ridge_blend(s.values(), sigma), Scale::Power)
}
