//! Deterministic synthetic ground-velocity records: harmonic rumbles, 1/f
//! background noise with broadband transients, and labeled corpora.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Label;
use crate::frontend::{simulate_chain, FrontEndConfig};
use crate::series::{TimeSeries, Unit};

/// Upper edge every harmonic must respect.
pub const BAND_LIMIT_HZ: f64 = 150.0;
/// Raised-cosine onset and offset length.
pub const RAMP_S: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RumbleSpec {
    pub fundamental: f64,
    pub n_harmonics: usize,
    pub duration: f64,
    /// `(time s, offset Hz)` knots, linearly interpolated and held flat
    /// outside; empty means a flat contour.
    pub freq_contour: Vec<(f64, f64)>,
    /// Fundamental amplitude in m/s; harmonic `h` gets `amplitude / h`.
    pub amplitude: f64,
    /// `None` adds no noise.
    pub snr_db: Option<f64>,
    /// Amplitude the SNR is measured against; defaults to `amplitude`, so a
    /// silent rumble can still carry noise of a chosen variance.
    pub noise_reference: Option<f64>,
    pub sample_rate: f64,
    pub seed: u64,
}

impl Default for RumbleSpec {
    fn default() -> Self {
        Self {
            fundamental: 20.0,
            n_harmonics: 3,
            duration: 4.0,
            freq_contour: Vec::new(),
            amplitude: 1e-6,
            snr_db: Some(10.0),
            noise_reference: None,
            sample_rate: 475.0,
            seed: 0,
        }
    }
}

/// Piecewise-linear value at `t`, flat beyond the end knots.
pub fn contour_at(knots: &[(f64, f64)], t: f64) -> f64 {
    match knots {
        [] => 0.0,
        [(_, v)] => *v,
        _ => {
            if t <= knots[0].0 {
                return knots[0].1;
            }
            for w in knots.windows(2) {
                let ((t0, v0), (t1, v1)) = (w[0], w[1]);
                if t <= t1 {
                    return if t1 > t0 { v0 + (v1 - v0) * (t - t0) / (t1 - t0) } else { v1 };
                }
            }
            knots[knots.len() - 1].1
        }
    }
}

impl RumbleSpec {
    pub fn n_samples(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.sample_rate > 0.0) {
            return Err(Error::Spec("duration and sample rate must be positive".into()));
        }
        if self.n_harmonics == 0 || !(self.fundamental > 0.0) {
            return Err(Error::Spec("need a positive fundamental and >= 1 harmonic".into()));
        }
        if !(self.amplitude >= 0.0) || self.noise_reference.is_some_and(|r| !(r >= 0.0)) {
            return Err(Error::Spec("amplitudes must be non-negative".into()));
        }
        if self.freq_contour.windows(2).any(|w| w[1].0 < w[0].0) {
            return Err(Error::Spec("contour knots must be in time order".into()));
        }
        let offsets = self.freq_contour.iter().map(|k| k.1).chain([0.0]);
        let (lo, hi) = offsets.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
        let top = (self.fundamental + if self.freq_contour.is_empty() { 0.0 } else { hi })
            * self.n_harmonics as f64;
        if top > BAND_LIMIT_HZ {
            return Err(Error::Spec(format!(
                "harmonic {} reaches {top:.1} Hz, above {BAND_LIMIT_HZ} Hz",
                self.n_harmonics
            )));
        }
        if self.fundamental + lo.min(0.0) <= 0.0 {
            return Err(Error::Spec("contour drives the fundamental to 0 Hz".into()));
        }
        Ok(())
    }

    /// Mean power of the harmonic stack at amplitude `a`.
    fn stack_power(&self, a: f64) -> f64 {
        (1..=self.n_harmonics)
            .map(|h| (a / h as f64).powi(2) / 2.0)
            .sum()
    }

    pub fn noise_std(&self) -> f64 {
        match self.snr_db {
            None => 0.0,
            Some(snr) => {
                let reference = self.noise_reference.unwrap_or(self.amplitude);
                (self.stack_power(reference) / 10f64.powf(snr / 10.0)).sqrt()
            }
        }
    }
}

/// Hann half-window ramps over the first and last `ramp` samples.
fn envelope(i: usize, n: usize, ramp: usize) -> f64 {
    let edge = i.min(n - 1 - i);
    if ramp == 0 || edge >= ramp {
        1.0
    } else {
        0.5 * (1.0 - (PI * edge as f64 / ramp as f64).cos())
    }
}

fn white_noise(rng: &mut ChaCha8Rng, n: usize, std: f64) -> Vec<f64> {
    if std == 0.0 {
        return vec![0.0; n];
    }
    let d = Normal::new(0.0, std).expect("finite std");
    (0..n).map(|_| d.sample(rng)).collect()
}

pub fn gen_rumble(spec: &RumbleSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let n = spec.n_samples();
    let fs = spec.sample_rate;
    let ramp = ((RAMP_S * fs).round() as usize).min(n / 2);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut phase = 0.0;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let f0 = spec.fundamental + contour_at(&spec.freq_contour, i as f64 / fs);
        let v: f64 = (1..=spec.n_harmonics)
            .map(|h| spec.amplitude / h as f64 * (h as f64 * phase).sin())
            .sum();
        out.push(v * envelope(i, n, ramp));
        phase += 2.0 * PI * f0 / fs;
    }
    for (o, e) in out.iter_mut().zip(white_noise(&mut rng, n, spec.noise_std())) {
        *o += e;
    }
    TimeSeries::new(out, fs, Unit::GroundVelocityMPerS)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseProfile {
    /// Power falls as `1 / f^exponent`.
    pub exponent: f64,
    /// Target RMS of the colored noise, m/s.
    pub rms: f64,
    /// The RMS is scaled by a uniform draw in `±rms_jitter_db`.
    pub rms_jitter_db: f64,
    /// Mean number of transients per second.
    pub transient_rate: f64,
    /// Peak amplitude of a transient relative to the noise RMS.
    pub transient_gain: f64,
    pub transient_ms: f64,
    pub sample_rate: f64,
}

impl Default for NoiseProfile {
    fn default() -> Self {
        Self {
            exponent: 1.0,
            rms: 8e-7,
            rms_jitter_db: 12.0,
            transient_rate: 0.5,
            transient_gain: 4.0,
            transient_ms: 30.0,
            sample_rate: 475.0,
        }
    }
}

impl NoiseProfile {
    pub fn quiet() -> Self {
        Self {
            transient_rate: 0.0,
            rms_jitter_db: 0.0,
            ..Self::default()
        }
    }
}

/// White Gaussian noise shaped to a `1/f^exponent` power spectrum, scaled to
/// unit RMS.
pub fn colored_noise(rng: &mut ChaCha8Rng, n: usize, fs: f64, exponent: f64) -> Vec<f64> {
    let mut buf: Vec<Complex64> = white_noise(rng, n, 1.0)
        .into_iter()
        .map(|v| Complex64::new(v, 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let kk = k.min(n - k);
        *c = if kk == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            *c / (kk as f64 * fs / n as f64).powf(exponent / 2.0)
        };
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let x: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    if rms > 0.0 {
        x.into_iter().map(|v| v / rms).collect()
    } else {
        x
    }
}

pub fn gen_background(duration: f64, seed: u64, profile: &NoiseProfile) -> Result<TimeSeries> {
    if !(duration > 0.0 && profile.sample_rate > 0.0) {
        return Err(Error::Spec("duration and sample rate must be positive".into()));
    }
    let fs = profile.sample_rate;
    let n = (duration * fs).round() as usize;
    if n < 2 {
        return Err(Error::Spec(format!("{duration} s is under two samples")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = if profile.rms_jitter_db > 0.0 {
        rng.random_range(-profile.rms_jitter_db..=profile.rms_jitter_db)
    } else {
        0.0
    };
    let rms = profile.rms * 10f64.powf(jitter / 20.0);
    let mut x: Vec<f64> = colored_noise(&mut rng, n, fs, profile.exponent)
        .into_iter()
        .map(|v| v * rms)
        .collect();

    let count = (profile.transient_rate * duration).round() as usize;
    let len = ((profile.transient_ms / 1000.0 * fs).round() as usize).clamp(2, n);
    for _ in 0..count {
        let start = rng.random_range(0..=n - len);
        let burst = white_noise(&mut rng, len, 1.0);
        for (j, b) in burst.into_iter().enumerate() {
            // Hann-windowed white burst: flat spectrum up to Nyquist
            let w = 0.5 * (1.0 - (2.0 * PI * j as f64 / (len - 1) as f64).cos());
            x[start + j] += profile.transient_gain * rms * w * b;
        }
    }
    TimeSeries::new(x, fs, Unit::GroundVelocityMPerS)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub n_rumbles: usize,
    pub n_background: usize,
    pub seed: u64,
    pub snr_db: f64,
    pub duration: f64,
    /// Fundamentals are drawn uniformly from this range.
    pub fundamental_range: (f64, f64),
    pub harmonics_range: (usize, usize),
    /// Largest contour excursion in Hz.
    pub contour_depth: f64,
    pub amplitude: f64,
    pub amplitude_jitter_db: f64,
    pub background: NoiseProfile,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            n_rumbles: 20,
            n_background: 20,
            seed: 42,
            snr_db: 10.0,
            duration: 4.0,
            fundamental_range: (16.0, 24.0),
            harmonics_range: (3, 5),
            contour_depth: 2.0,
            amplitude: 1e-6,
            amplitude_jitter_db: 12.0,
            background: NoiseProfile::default(),
        }
    }
}

/// SplitMix64 finaliser, used to derive independent per-item seeds.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct CorpusItem {
    pub source_id: String,
    pub label: Label,
    pub seed: u64,
    /// Rumble parameters; `None` for background items.
    pub spec: Option<RumbleSpec>,
    pub velocity: TimeSeries,
    pub codes: TimeSeries,
    pub clipped_fraction: f64,
}

impl CorpusConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_rumbles == 0 || self.n_background == 0 {
            return Err(Error::Config("corpus needs at least one item per class".into()));
        }
        let (f_lo, f_hi) = self.fundamental_range;
        let (h_lo, h_hi) = self.harmonics_range;
        if !(f_lo > 0.0 && f_lo <= f_hi) || h_lo == 0 || h_lo > h_hi {
            return Err(Error::Config("empty fundamental or harmonic range".into()));
        }
        if (f_hi + self.contour_depth) * h_hi as f64 > BAND_LIMIT_HZ {
            return Err(Error::Config(format!(
                "harmonic {h_hi} of {f_hi} Hz leaves the {BAND_LIMIT_HZ} Hz band"
            )));
        }
        Ok(())
    }

    /// Parameters of rumble `i`, drawn from its own seed.
    pub fn rumble_spec(&self, i: usize, sample_rate: f64) -> RumbleSpec {
        let seed = mix_seed(self.seed, i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED);
        let (f_lo, f_hi) = self.fundamental_range;
        let fundamental = if f_hi > f_lo { rng.random_range(f_lo..f_hi) } else { f_lo };
        let n_harmonics = rng.random_range(self.harmonics_range.0..=self.harmonics_range.1);
        let knots = 4;
        let freq_contour = (0..knots)
            .map(|k| {
                let t = self.duration * k as f64 / (knots - 1) as f64;
                (t, rng.random_range(-self.contour_depth..=self.contour_depth))
            })
            .collect();
        let jitter = if self.amplitude_jitter_db > 0.0 {
            rng.random_range(-self.amplitude_jitter_db..=self.amplitude_jitter_db)
        } else {
            0.0
        };
        RumbleSpec {
            fundamental,
            n_harmonics,
            duration: self.duration,
            freq_contour,
            amplitude: self.amplitude * 10f64.powf(jitter / 20.0),
            snr_db: Some(self.snr_db),
            noise_reference: None,
            sample_rate,
            seed,
        }
    }
}

/// Generates every item in memory and runs it through the acquisition chain.
pub fn generate_corpus(cfg: &CorpusConfig, frontend: &FrontEndConfig) -> Result<Vec<CorpusItem>> {
    cfg.validate()?;
    let fs = frontend.sample_rate;
    let mut items = Vec::with_capacity(cfg.n_rumbles + cfg.n_background);
    for i in 0..cfg.n_rumbles {
        let spec = cfg.rumble_spec(i, fs);
        let velocity = gen_rumble(&spec)?;
        let chain = simulate_chain(&velocity, frontend)?;
        items.push(CorpusItem {
            source_id: format!("rumble_{i:03}"),
            label: Label::Rumble,
            seed: spec.seed,
            spec: Some(spec),
            velocity,
            codes: chain.codes,
            clipped_fraction: chain.clipped_fraction,
        });
    }
    let profile = NoiseProfile {
        sample_rate: fs,
        ..cfg.background.clone()
    };
    for i in 0..cfg.n_background {
        let seed = mix_seed(cfg.seed, (cfg.n_rumbles + i) as u64);
        let velocity = gen_background(cfg.duration, seed, &profile)?;
        let chain = simulate_chain(&velocity, frontend)?;
        items.push(CorpusItem {
            source_id: format!("background_{i:03}"),
            label: Label::Background,
            seed,
            spec: None,
            velocity,
            codes: chain.codes,
            clipped_fraction: chain.clipped_fraction,
        });
    }
    Ok(items)
}

pub const MANIFEST_HEADER: [&str; 11] = [
    "source_id",
    "label",
    "wav",
    "velocity_csv",
    "seed",
    "fundamental_hz",
    "n_harmonics",
    "duration_s",
    "amplitude_m_per_s",
    "snr_db",
    "clipped_fraction",
];

pub fn write_manifest<W: Write>(items: &[CorpusItem], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(MANIFEST_HEADER)?;
    for it in items {
        let (f0, nh, amp, snr) = match &it.spec {
            Some(s) => (
                s.fundamental.to_string(),
                s.n_harmonics.to_string(),
                s.amplitude.to_string(),
                s.snr_db.map_or_else(String::new, |v| v.to_string()),
            ),
            None => Default::default(),
        };
        w.write_record([
            it.source_id.clone(),
            it.label.to_string(),
            format!("{}.wav", it.source_id),
            format!("{}_velocity.csv", it.source_id),
            it.seed.to_string(),
            f0,
            nh,
            it.velocity.duration().to_string(),
            amp,
            snr,
            it.clipped_fraction.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `(source_id, label, wav file)` rows of a manifest.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<(String, Label, String)>> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    if header.iter().take(3).ne(MANIFEST_HEADER.iter().take(3).copied()) {
        return Err(Error::Format("manifest must start with source_id,label,wav".into()));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        out.push((rec[0].to_string(), rec[1].parse()?, rec[2].to_string()));
    }
    Ok(out)
}

/// Writes `<id>.wav` (ADC codes), `<id>_velocity.csv` and `manifest.csv`.
pub fn write_corpus(items: &[CorpusItem], dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    for it in items {
        it.codes.save_wav(dir.join(format!("{}.wav", it.source_id)))?;
        it.velocity
            .save_csv(dir.join(format!("{}_velocity.csv", it.source_id)))?;
    }
    let f = std::fs::File::create(dir.join("manifest.csv"))?;
    write_manifest(items, std::io::BufWriter::new(f))
}

pub fn gen_labeled_corpus(
    cfg: &CorpusConfig,
    frontend: &FrontEndConfig,
    dir: impl AsRef<Path>,
) -> Result<Vec<CorpusItem>> {
    let items = generate_corpus(cfg, frontend)?;
    write_corpus(&items, dir)?;
    Ok(items)
}
