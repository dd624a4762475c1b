//! Software model of the analog acquisition chain.
//!
//! geophone → instrumentation amplifier → Butterworth bandpass →
//! variable-gain amplifier with DC offset and clip → ADC.
//!
//! The analog filter is represented by its bilinear-transform digital
//! equivalent with the band edges prewarped, so the −3 dB points land exactly
//! on `band_low` and `band_high`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{TimeSeries, Unit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontEndConfig {
    /// V per (m/s).
    pub geophone_sensitivity: f64,
    /// Hz.
    pub geophone_natural_freq: f64,
    pub geophone_damping: f64,
    pub gain_stage1: f64,
    pub gain_stage2: f64,
    pub band_low: f64,
    pub band_high: f64,
    pub filter_order: usize,
    pub adc_bits: u32,
    pub adc_vref: f64,
    pub sample_rate: f64,
    /// Volts added before clipping; `None` means `adc_vref / 2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dc_offset: Option<f64>,
}

impl Default for FrontEndConfig {
    fn default() -> Self {
        Self {
            geophone_sensitivity: 80.0,
            geophone_natural_freq: 5.0,
            geophone_damping: 0.7,
            gain_stage1: 500.0,
            gain_stage2: 6.0,
            band_low: 5.0,
            band_high: 150.0,
            filter_order: 3,
            adc_bits: 16,
            adc_vref: 3.3,
            sample_rate: 475.0,
            dc_offset: None,
        }
    }
}

impl FrontEndConfig {
    pub fn dc_offset(&self) -> f64 {
        self.dc_offset.unwrap_or(self.adc_vref / 2.0)
    }

    pub fn total_gain(&self) -> f64 {
        self.gain_stage1 * self.gain_stage2
    }

    pub fn max_code(&self) -> f64 {
        (2f64).powi(self.adc_bits as i32) - 1.0
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("geophone_sensitivity", self.geophone_sensitivity),
            ("geophone_natural_freq", self.geophone_natural_freq),
            ("geophone_damping", self.geophone_damping),
            ("gain_stage1", self.gain_stage1),
            ("gain_stage2", self.gain_stage2),
            ("adc_vref", self.adc_vref),
            ("sample_rate", self.sample_rate),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        check_band(self.band_low, self.band_high, self.sample_rate)?;
        if self.geophone_natural_freq >= self.sample_rate / 2.0 {
            return Err(Error::Config(
                "geophone natural frequency must be below Nyquist".into(),
            ));
        }
        if self.filter_order == 0 {
            return Err(Error::Config("filter_order must be at least 1".into()));
        }
        if !(1..=32).contains(&self.adc_bits) {
            return Err(Error::Config(format!(
                "adc_bits must be in 1..=32, got {}",
                self.adc_bits
            )));
        }
        let off = self.dc_offset();
        if !(off.is_finite() && (0.0..=self.adc_vref).contains(&off)) {
            return Err(Error::Config(format!(
                "dc_offset {off} outside [0, adc_vref]"
            )));
        }
        let g = self.total_gain();
        if !(3000.0..=6000.0).contains(&g) {
            log::warn!("total gain {g} is outside the 3000-6000 design range");
        }
        Ok(())
    }
}

fn check_band(low: f64, high: f64, fs: f64) -> Result<()> {
    if !(low > 0.0 && low < high && high < fs / 2.0) {
        return Err(Error::Config(format!(
            "band edges must satisfy 0 < {low} < {high} < fs/2 = {}",
            fs / 2.0
        )));
    }
    Ok(())
}

/// One direct-form-II-transposed second-order section, `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    pub fn response(&self, f: f64, fs: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -2.0 * PI * f / fs);
        let z2 = z1 * z1;
        (self.b[0] + z1 * self.b[1] + z2 * self.b[2])
            / (self.a[0] + z1 * self.a[1] + z2 * self.a[2])
    }
}

/// Cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct SosFilter {
    pub sections: Vec<Biquad>,
}

impl SosFilter {
    pub fn response(&self, f: f64, fs: f64) -> Complex64 {
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(f, fs))
    }

    pub fn magnitude_db(&self, f: f64, fs: f64) -> f64 {
        20.0 * self.response(f, fs).norm().log10()
    }

    /// Filters from zero initial state.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for s in &self.sections {
            let (mut z1, mut z2) = (0.0, 0.0);
            for v in y.iter_mut() {
                let input = *v;
                let out = s.b[0] * input + z1;
                z1 = s.b[1] * input - s.a[1] * out + z2;
                z2 = s.b[2] * input - s.a[2] * out;
                *v = out;
            }
        }
        y
    }
}

/// Second-order high-pass `s² / (s² + 2ζω₀s + ω₀²)` modelling the
/// proof-mass response, bilinear-discretised with prewarping at ω₀.
pub fn geophone_highpass(natural_freq: f64, damping: f64, fs: f64) -> SosFilter {
    let w0 = 2.0 * PI * natural_freq;
    let k = w0 / (w0 / (2.0 * fs)).tan();
    let k2 = k * k;
    let a0 = k2 + 2.0 * damping * w0 * k + w0 * w0;
    let a1 = 2.0 * (w0 * w0 - k2);
    let a2 = k2 - 2.0 * damping * w0 * k + w0 * w0;
    SosFilter {
        sections: vec![Biquad {
            b: [k2 / a0, -2.0 * k2 / a0, k2 / a0],
            a: [1.0, a1 / a0, a2 / a0],
        }],
    }
}

/// Analog magnitude of the geophone high-pass at `f` Hz.
pub fn geophone_highpass_analog_gain(natural_freq: f64, damping: f64, f: f64) -> f64 {
    let r = f / natural_freq;
    r * r / ((1.0 - r * r).powi(2) + (2.0 * damping * r).powi(2)).sqrt()
}

/// Butterworth bandpass: order-`order` lowpass prototype, lowpass→bandpass
/// transform at prewarped edges, bilinear transform, grouped into sections.
pub fn design_butterworth_bandpass(
    order: usize,
    low: f64,
    high: f64,
    fs: f64,
) -> Result<SosFilter> {
    if order == 0 {
        return Err(Error::Config("filter order must be at least 1".into()));
    }
    check_band(low, high, fs)?;
    let fs2 = 2.0 * fs;
    let wl = fs2 * (PI * low / fs).tan();
    let wh = fs2 * (PI * high / fs).tan();
    let bw = wh - wl;
    let w0sq = wl * wh;

    let n = order as i32;
    let mut analog_poles = Vec::with_capacity(2 * order);
    for m in (-n + 1..n).step_by(2) {
        let p = -Complex64::from_polar(1.0, PI * f64::from(m) / f64::from(2 * n));
        let half = p * (bw / 2.0);
        let disc = (half * half - w0sq).sqrt();
        analog_poles.push(half + disc);
        analog_poles.push(half - disc);
    }

    // `order` zeros at s = 0 map to z = 1; the remaining `order` zeros at
    // infinity map to z = -1.
    let mut gain = Complex64::new(bw.powi(n) * fs2.powi(n), 0.0);
    let mut poles = Vec::with_capacity(analog_poles.len());
    for p in &analog_poles {
        gain /= fs2 - p;
        poles.push((fs2 + p) / (fs2 - p));
    }
    let gain = gain.re;

    let tol = 1e-10;
    let mut complex: Vec<Complex64> = poles.iter().copied().filter(|p| p.im > tol).collect();
    let mut real: Vec<f64> = poles
        .iter()
        .filter(|p| p.im.abs() <= tol)
        .map(|p| p.re)
        .collect();
    complex.sort_by(|a, b| a.re.total_cmp(&b.re));
    real.sort_by(f64::total_cmp);
    if !real.len().is_multiple_of(2) {
        return Err(Error::Numeric("unpaired real pole in bandpass design".into()));
    }

    let mut sections: Vec<Biquad> = complex
        .iter()
        .map(|p| Biquad {
            b: [1.0, 0.0, -1.0],
            a: [1.0, -2.0 * p.re, p.norm_sqr()],
        })
        .chain(real.chunks(2).map(|r| Biquad {
            b: [1.0, 0.0, -1.0],
            a: [1.0, -(r[0] + r[1]), r[0] * r[1]],
        }))
        .collect();
    if sections.len() != order {
        return Err(Error::Numeric(format!(
            "expected {order} sections, built {}",
            sections.len()
        )));
    }
    for b in sections[0].b.iter_mut() {
        *b *= gain;
    }
    Ok(SosFilter { sections })
}

pub fn bandpass_filter(cfg: &FrontEndConfig) -> Result<SosFilter> {
    design_butterworth_bandpass(cfg.filter_order, cfg.band_low, cfg.band_high, cfg.sample_rate)
}

/// Ground velocity (m/s) to geophone output voltage.
pub fn geophone_transduce(velocity: &TimeSeries, cfg: &FrontEndConfig) -> Result<TimeSeries> {
    velocity.expect_unit(Unit::GroundVelocityMPerS)?;
    let hp = geophone_highpass(
        cfg.geophone_natural_freq,
        cfg.geophone_damping,
        velocity.sample_rate(),
    );
    let scaled: Vec<f64> = velocity
        .samples()
        .iter()
        .map(|v| v * cfg.geophone_sensitivity)
        .collect();
    velocity.with_samples(hp.apply(&scaled), Unit::Volts)
}

/// Fixed-gain instrumentation amplifier ahead of the bandpass.
pub fn instrumentation_amplify(x: &TimeSeries, cfg: &FrontEndConfig) -> Result<TimeSeries> {
    x.expect_unit(Unit::Volts)?;
    x.with_samples(
        x.samples().iter().map(|v| v * cfg.gain_stage1).collect(),
        Unit::Volts,
    )
}

pub fn butterworth_bandpass(x: &TimeSeries, cfg: &FrontEndConfig) -> Result<TimeSeries> {
    x.expect_unit(Unit::Volts)?;
    let filt = design_butterworth_bandpass(
        cfg.filter_order,
        cfg.band_low,
        cfg.band_high,
        x.sample_rate(),
    )?;
    x.with_samples(filt.apply(x.samples()), Unit::Volts)
}

/// Second gain stage, DC offset and clip to `[0, adc_vref]`.
pub fn amplify_clip_clamp(x: &TimeSeries, cfg: &FrontEndConfig) -> Result<TimeSeries> {
    x.expect_unit(Unit::Volts)?;
    let off = cfg.dc_offset();
    x.with_samples(
        x.samples()
            .iter()
            .map(|v| (v * cfg.gain_stage2 + off).clamp(0.0, cfg.adc_vref))
            .collect(),
        Unit::Volts,
    )
}

/// Fraction of samples that `amplify_clip_clamp` would clip.
pub fn clipped_fraction(x: &TimeSeries, cfg: &FrontEndConfig) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let off = cfg.dc_offset();
    let n = x
        .samples()
        .iter()
        .map(|v| v * cfg.gain_stage2 + off)
        .filter(|v| *v < 0.0 || *v > cfg.adc_vref)
        .count();
    n as f64 / x.len() as f64
}

/// `round_half_up(v / vref * (2^bits - 1))`.
pub fn adc_quantize(x: &TimeSeries, cfg: &FrontEndConfig) -> Result<TimeSeries> {
    x.expect_unit(Unit::Volts)?;
    let full = cfg.max_code();
    let mut codes = Vec::with_capacity(x.len());
    for (i, &v) in x.samples().iter().enumerate() {
        if !(0.0..=cfg.adc_vref).contains(&v) {
            return Err(Error::Range(format!(
                "sample {i} = {v} V outside [0, {}] V; is the clip stage missing?",
                cfg.adc_vref
            )));
        }
        codes.push((v / cfg.adc_vref * full + 0.5).floor().min(full));
    }
    x.with_samples(codes, Unit::AdcCode)
}

/// Volts per ADC step.
pub fn adc_sensitivity(cfg: &FrontEndConfig) -> f64 {
    cfg.adc_vref / cfg.max_code()
}

/// Smallest resolvable ground velocity in m/s for the given total gain.
pub fn system_sensitivity(cfg: &FrontEndConfig, total_gain: f64) -> Result<f64> {
    if !(total_gain.is_finite() && total_gain > 0.0) {
        return Err(Error::Config(format!(
            "total gain must be positive, got {total_gain}"
        )));
    }
    Ok(adc_sensitivity(cfg) / (total_gain * cfg.geophone_sensitivity))
}

/// ADC codes back to volts relative to the DC offset.
pub fn codes_to_volts(codes: &TimeSeries, cfg: &FrontEndConfig) -> Result<TimeSeries> {
    codes.expect_unit(Unit::AdcCode)?;
    let s = adc_sensitivity(cfg);
    let off = cfg.dc_offset();
    codes.with_samples(
        codes.samples().iter().map(|c| c * s - off).collect(),
        Unit::Volts,
    )
}

/// ADC codes with the mid-scale offset removed, as a dimensionless series.
pub fn centered_codes(codes: &TimeSeries, cfg: &FrontEndConfig) -> Result<TimeSeries> {
    codes.expect_unit(Unit::AdcCode)?;
    let mid = cfg.dc_offset() / adc_sensitivity(cfg);
    codes.with_samples(
        codes.samples().iter().map(|c| c - mid).collect(),
        Unit::Dimensionless,
    )
}

#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub codes: TimeSeries,
    pub clipped_fraction: f64,
}

/// Runs the whole acquisition chain on a ground-velocity record.
pub fn simulate_chain(velocity: &TimeSeries, cfg: &FrontEndConfig) -> Result<ChainOutput> {
    cfg.validate()?;
    if (velocity.sample_rate() - cfg.sample_rate).abs() > 1e-9 * cfg.sample_rate {
        return Err(Error::Config(format!(
            "input sampled at {} Hz but the ADC runs at {} Hz",
            velocity.sample_rate(),
            cfg.sample_rate
        )));
    }
    let v = geophone_transduce(velocity, cfg)?;
    let v = instrumentation_amplify(&v, cfg)?;
    let v = butterworth_bandpass(&v, cfg)?;
    let clipped = clipped_fraction(&v, cfg);
    let v = amplify_clip_clamp(&v, cfg)?;
    Ok(ChainOutput {
        codes: adc_quantize(&v, cfg)?,
        clipped_fraction: clipped,
    })
}
