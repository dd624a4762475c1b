//! Feature extraction: MFCC, Hjorth parameters and spectral energy
//! distribution.

pub mod hjorth;
pub mod mel;
pub mod sed;
pub mod vector;

use serde::{Deserialize, Serialize};

pub use hjorth::{hjorth, sample_variance, Hjorth};
pub use mel::{
    build_mel_filterbank, cepstrum, hz_from_mel, mel_from_hz, mel_spectrum, mfcc, MelFilterBank,
};
pub use sed::{band_ranges, spectral_energy_distribution};
pub use vector::{
    load_features_csv, read_features_csv, save_features_csv, write_features_csv, FeatureKind,
    FeatureVector, Label,
};

use crate::dsp::{frame_signal, Scale, Spectrogram};
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Where MFCC frames come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MfccSource {
    /// Short frames of the denoised time signal.
    #[default]
    Frames,
    /// Rows of the enhanced spectrogram, read back as power.
    Enhanced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    #[serde(rename = "M")]
    pub n_filters: usize,
    #[serde(rename = "C")]
    pub n_coeffs: usize,
    pub n_bands: usize,
    pub f_min: f64,
    pub f_max: f64,
    pub mfcc_frame_ms: f64,
    pub mfcc_overlap: f64,
    /// DFT size for MFCC frames; frames are zero-padded up to it.
    pub mfcc_n_fft: usize,
    pub mfcc_source: MfccSource,
    pub wavelet_levels: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            n_filters: 20,
            n_coeffs: 12,
            n_bands: 25,
            f_min: 5.0,
            f_max: 150.0,
            mfcc_frame_ms: 25.0,
            mfcc_overlap: 0.5,
            mfcc_n_fft: 64,
            mfcc_source: MfccSource::Frames,
            wavelet_levels: 3,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_filters == 0 || self.n_coeffs == 0 || self.n_coeffs > self.n_filters {
            return Err(Error::Config(format!(
                "need 1 <= C <= M, got C={}, M={}",
                self.n_coeffs, self.n_filters
            )));
        }
        if self.n_bands == 0 {
            return Err(Error::Config("n_bands must be positive".into()));
        }
        if !(self.f_min >= 0.0 && self.f_min < self.f_max) {
            return Err(Error::Config(format!(
                "mel range [{}, {}] Hz",
                self.f_min, self.f_max
            )));
        }
        Ok(())
    }

    pub fn filterbank(&self, n_fft: usize, sample_rate: f64) -> Result<MelFilterBank> {
        build_mel_filterbank(self.n_filters, n_fft, sample_rate, self.f_min, self.f_max)
    }
}

fn mean_rows(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = rows
        .first()
        .ok_or_else(|| Error::Size("no frames to average".into()))?;
    let mut acc = vec![0.0; first.len()];
    for r in rows {
        for (a, v) in acc.iter_mut().zip(r) {
            *a += v;
        }
    }
    let n = rows.len() as f64;
    Ok(acc.into_iter().map(|a| a / n).collect())
}

/// Frame-averaged MFCCs of a time signal.
pub fn mfcc_series(x: &TimeSeries, cfg: &FeatureConfig) -> Result<Vec<f64>> {
    let frames = frame_signal(x, cfg.mfcc_frame_ms, cfg.mfcc_overlap)?;
    let n_fft = cfg.mfcc_n_fft.max(frames[0].len());
    let fb = cfg.filterbank(n_fft, x.sample_rate())?;
    let coeffs = frames
        .iter()
        .map(|f| mfcc(f, &fb, cfg.n_coeffs))
        .collect::<Result<Vec<_>>>()?;
    mean_rows(&coeffs)
}

/// Frame-averaged MFCCs computed from spectrogram rows. Decibel values are
/// mapped back to power; the one-sided bins fill the lower half of the DFT.
pub fn mfcc_spectrogram(s: &Spectrogram, cfg: &FeatureConfig) -> Result<Vec<f64>> {
    let framing = s.framing().ok_or_else(|| {
        Error::State("spectrogram carries no framing; cannot place mel filters".into())
    })?;
    let fb = cfg.filterbank(framing.n_fft, framing.sample_rate)?;
    let mut power = vec![0.0; framing.n_fft];
    let coeffs = s
        .values()
        .rows()
        .into_iter()
        .map(|row| {
            for (p, &v) in power.iter_mut().zip(row.iter()) {
                *p = match s.scale() {
                    Scale::Power => v,
                    Scale::Decibel => 10f64.powf(v / 10.0),
                };
            }
            cepstrum(&mel::mel_from_power(&power, &fb), cfg.n_coeffs)
        })
        .collect::<Result<Vec<_>>>()?;
    mean_rows(&coeffs)
}
