//! Spectrogram enhancement.
//!
//! Stage one ([`enhance_coherence`]) ridge-filters the power spectrogram,
//! converts it to decibels and weights every pixel by `1 + c`, where `c` is
//! the structure-tensor coherence of the *original* spectrogram. Stage two
//! ([`enhance_threshold`]) nudges pixels by quartile band and blurs.

pub mod filter;
pub mod ridge;
pub mod ssim;
pub mod tensor;
pub mod threshold;

use ndarray::Zip;
use serde::{Deserialize, Serialize};

pub use filter::{gaussian_blur, gaussian_kernel, gradient};
pub use ridge::{ridge_blend, ridge_filter, ridge_measure};
pub use ssim::{ssim, ssim_matrix};
pub use tensor::{
    coherence, structure_tensor, structure_tensor_matrix, tensor_eigenvalues, CoherenceMap,
    StructureTensorField,
};
pub use threshold::{percentile, quartile_thresholds, threshold_adjust};

use crate::dsp::spectrogram::power_to_db;
use crate::dsp::{Scale, Spectrogram, DB_FLOOR};
use crate::error::{Error, Result};

pub const COHERENCE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnhanceConfig {
    /// Structure-tensor smoothing, pixels.
    pub sigma: f64,
    /// Ridge-filter Hessian scale, pixels.
    pub sigma_r: f64,
    /// Blur after threshold adjustment, pixels.
    pub blur_sigma: f64,
    /// Offsets for pixels above p75, above p50, above p25, and the rest.
    pub deltas: [f64; 4],
}

impl Default for EnhanceConfig {
    fn default() -> Self {
        Self {
            sigma: 1.5,
            sigma_r: 1.5,
            blur_sigma: 1.0,
            deltas: [5.0, 2.0, -2.0, -5.0],
        }
    }
}

impl EnhanceConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma", self.sigma),
            ("sigma_r", self.sigma_r),
            ("blur_sigma", self.blur_sigma),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be non-negative, got {v}")));
            }
        }
        if self.deltas.iter().any(|d| !d.is_finite()) {
            return Err(Error::Config("deltas must be finite".into()));
        }
        Ok(())
    }
}

/// Coherence-weighted decibel spectrogram from a power spectrogram.
pub fn enhance_coherence(s: &Spectrogram, cfg: &EnhanceConfig) -> Result<Spectrogram> {
    s.expect_scale(Scale::Power)?;
    let ridge = ridge_blend(s.values(), cfg.sigma_r);
    let field = structure_tensor(s, cfg.sigma)?;
    let (l1, l2) = tensor_eigenvalues(&field);
    let c = coherence(&l1, &l2, COHERENCE_EPS);
    let out = Zip::from(&ridge)
        .and(&c.c)
        .map_collect(|&r, &c| power_to_db(r, DB_FLOOR) * (1.0 + c));
    s.with_values(out, Scale::Decibel)
}

/// Quartile-band adjustment followed by a Gaussian blur.
pub fn enhance_threshold(s1: &Spectrogram, cfg: &EnhanceConfig) -> Result<Spectrogram> {
    s1.expect_scale(Scale::Decibel)?;
    let adjusted = threshold_adjust(s1.values(), &cfg.deltas)?;
    s1.with_values(gaussian_blur(&adjusted, cfg.blur_sigma), Scale::Decibel)
}

#[derive(Debug, Clone)]
pub struct Enhanced {
    pub ridge_only: Spectrogram,
    pub coherence_weighted: Spectrogram,
    pub thresholded: Spectrogram,
}

/// Both enhancement stages, keeping the ridge-only intermediate.
pub fn enhance(s: &Spectrogram, cfg: &EnhanceConfig) -> Result<Enhanced> {
    cfg.validate()?;
    let ridge_only = ridge_filter(s, cfg.sigma_r)?;
    let coherence_weighted = enhance_coherence(s, cfg)?;
    let thresholded = enhance_threshold(&coherence_weighted, cfg)?;
    Ok(Enhanced {
        ridge_only,
        coherence_weighted,
        thresholded,
    })
}
