//! Uniformly sampled signals and their on-disk formats.
//!
//! Two-column CSV (`time_s,<unit>`) works for every unit; the unit tag rides
//! in the second header cell. ADC code series can also be stored as 16-bit
//! PCM WAV, where code `c` is written as the signed sample `c - 32768`.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical unit carried by a [`TimeSeries`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    GroundVelocityMPerS,
    Volts,
    AdcCode,
    Dimensionless,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::GroundVelocityMPerS => "ground_velocity_m_per_s",
            Unit::Volts => "volts",
            Unit::AdcCode => "adc_code",
            Unit::Dimensionless => "dimensionless",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ground_velocity_m_per_s" => Ok(Unit::GroundVelocityMPerS),
            "volts" => Ok(Unit::Volts),
            "adc_code" => Ok(Unit::AdcCode),
            "dimensionless" => Ok(Unit::Dimensionless),
            other => Err(Error::Format(format!("unknown unit tag `{other}`"))),
        }
    }
}

/// A uniformly sampled, finite-valued signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: Vec<f64>,
    sample_rate: f64,
    unit: Unit,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>, sample_rate: f64, unit: Unit) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::Config(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            samples,
            sample_rate,
            unit,
        })
    }

    pub fn zeros(len: usize, sample_rate: f64, unit: Unit) -> Result<Self> {
        Self::new(vec![0.0; len], sample_rate, unit)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn expect_unit(&self, expected: Unit) -> Result<()> {
        if self.unit == expected {
            Ok(())
        } else {
            Err(Error::UnitMismatch {
                expected,
                found: self.unit,
            })
        }
    }

    /// Same sample rate, new samples and unit. Rejects non-finite output.
    pub fn with_samples(&self, samples: Vec<f64>, unit: Unit) -> Result<Self> {
        Self::new(samples, self.sample_rate, unit)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["time_s", self.unit.as_str()])?;
        for (i, v) in self.samples.iter().enumerate() {
            let t = i as f64 / self.sample_rate;
            w.write_record([t.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.len() != 2 || headers.get(0) != Some("time_s") {
            return Err(Error::Format(
                "time series CSV must have header `time_s,<unit>`".into(),
            ));
        }
        let unit: Unit = headers[1].parse()?;
        let mut times = Vec::new();
        let mut samples = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(Error::Format("expected two columns".into()));
            }
            times.push(parse_f64(&rec[0])?);
            samples.push(parse_f64(&rec[1])?);
        }
        if times.len() < 2 {
            return Err(Error::Format(
                "need at least two rows to infer the sample rate".into(),
            ));
        }
        let span = times[times.len() - 1] - times[0];
        if span <= 0.0 {
            return Err(Error::Format("time column must be increasing".into()));
        }
        let fs = (times.len() - 1) as f64 / span;
        // time stamps are i / fs printed in shortest round-trip form
        let fs = (fs * 1e6).round() / 1e6;
        Self::new(samples, fs, unit)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }

    /// Writes ADC codes as mono 16-bit little-endian PCM.
    pub fn save_wav(&self, path: impl AsRef<Path>) -> Result<()> {
        self.expect_unit(Unit::AdcCode)?;
        let rate = self.sample_rate.round();
        if (rate - self.sample_rate).abs() > 1e-9 || rate > u32::MAX as f64 {
            return Err(Error::Config(format!(
                "WAV needs an integral sample rate, got {}",
                self.sample_rate
            )));
        }
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: rate as u32,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(path, spec)?;
        for &c in &self.samples {
            if c.fract() != 0.0 || !(0.0..=65535.0).contains(&c) {
                return Err(Error::Range(format!("{c} is not a 16-bit ADC code")));
            }
            w.write_sample((c as i32 - 32768) as i16)?;
        }
        w.finalize()?;
        Ok(())
    }

    pub fn load_wav(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = hound::WavReader::open(path)?;
        let spec = r.spec();
        if spec.channels != 1
            || spec.bits_per_sample != 16
            || spec.sample_format != hound::SampleFormat::Int
        {
            return Err(Error::Format(
                "expected mono 16-bit integer PCM".into(),
            ));
        }
        let samples = r
            .samples::<i16>()
            .map(|s| s.map(|v| f64::from(v) + 32768.0))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(samples, f64::from(spec.sample_rate), Unit::AdcCode)
    }

    /// Loads `.wav` as ADC codes and anything else as CSV.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let is_wav = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("wav"));
        if is_wav {
            Self::load_wav(path)
        } else {
            Self::load_csv(path)
        }
    }
}

pub(crate) fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Format(format!("not a number: `{s}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert!(TimeSeries::new(vec![0.0, f64::NAN], 10.0, Unit::Volts).is_err());
        assert!(TimeSeries::new(vec![0.0], 0.0, Unit::Volts).is_err());
    }

    #[test]
    fn csv_round_trip_keeps_rate_and_unit() {
        let ts = TimeSeries::new(
            (0..50).map(|i| (i as f64 * 0.3).sin()).collect(),
            475.0,
            Unit::GroundVelocityMPerS,
        )
        .unwrap();
        let mut buf = Vec::new();
        ts.write_csv(&mut buf).unwrap();
        let back = TimeSeries::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, ts);
    }

    #[test]
    fn csv_rejects_unknown_unit() {
        let data = "time_s,furlongs\n0,1\n0.1,2\n";
        assert!(matches!(
            TimeSeries::read_csv(data.as_bytes()),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn wav_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("codes.wav");
        let ts = TimeSeries::new(vec![0.0, 1.0, 32768.0, 65535.0], 475.0, Unit::AdcCode)
            .unwrap();
        ts.save_wav(&path).unwrap();
        assert_eq!(TimeSeries::load(&path).unwrap(), ts);
    }

    #[test]
    fn wav_requires_codes() {
        let dir = tempfile::tempdir().unwrap();
        let ts = TimeSeries::new(vec![0.5], 475.0, Unit::Volts).unwrap();
        assert!(matches!(
            ts.save_wav(dir.path().join("x.wav")),
            Err(Error::UnitMismatch { .. })
        ));
    }
}
