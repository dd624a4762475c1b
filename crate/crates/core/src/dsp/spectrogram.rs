//! Time × frequency matrices and their persistence.
//!
//! Binary layout (`SPG1`, little-endian): magic, `u32` rows, `u32` cols,
//! `rows * cols` f64 values row-major, then `rows` frame times and `cols`
//! bin frequencies as f64. The scale tag and framing live in a JSON sidecar
//! (`<file>.json`) since the binary header has no room for them. The CSV form
//! puts the scale tag in its top-left cell.

use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ndarray::Array2;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::frame::{frame_slice, hamming_window, FrameSpec};
use crate::error::{Error, Result};
use crate::series::{parse_f64, TimeSeries};

const MAGIC: &[u8; 4] = b"SPG1";

/// Guard added before taking logarithms of power.
pub const POWER_EPS: f64 = 1e-12;

/// Lower bound applied when power is converted to decibels.
pub const DB_FLOOR: f64 = -100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Power,
    Decibel,
}

impl Scale {
    pub fn as_str(self) -> &'static str {
        match self {
            Scale::Power => "power",
            Scale::Decibel => "decibel",
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "power" => Ok(Scale::Power),
            "decibel" => Ok(Scale::Decibel),
            other => Err(Error::Format(format!("unknown scale tag `{other}`"))),
        }
    }
}

/// STFT framing that produced a spectrogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Framing {
    pub frame_len: usize,
    pub hop: usize,
    /// FFT length after zero padding.
    pub n_fft: usize,
    pub sample_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Sidecar {
    scale: Scale,
    #[serde(default)]
    framing: Option<Framing>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    values: Array2<f64>,
    frame_times: Vec<f64>,
    bin_freqs: Vec<f64>,
    scale: Scale,
    framing: Option<Framing>,
}

impl Spectrogram {
    pub fn new(
        values: Array2<f64>,
        frame_times: Vec<f64>,
        bin_freqs: Vec<f64>,
        scale: Scale,
        framing: Option<Framing>,
    ) -> Result<Self> {
        let (rows, cols) = values.dim();
        if frame_times.len() != rows || bin_freqs.len() != cols {
            return Err(Error::Size(format!(
                "axes {}x{} do not match a {rows}x{cols} matrix",
                frame_times.len(),
                bin_freqs.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite spectrogram value".into()));
        }
        if bin_freqs.first().is_some_and(|&f| f < 0.0)
            || bin_freqs.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::Format(
                "bin frequencies must be non-negative and strictly increasing".into(),
            ));
        }
        if let (Some(fr), Some(&last)) = (framing, bin_freqs.last()) {
            if last > fr.sample_rate / 2.0 + 1e-9 {
                return Err(Error::Format("bin frequency above Nyquist".into()));
            }
        }
        Ok(Self {
            values,
            frame_times,
            bin_freqs,
            scale,
            framing,
        })
    }

    /// A bare matrix with index axes (`t = row`, `f = col`).
    pub fn from_matrix(values: Array2<f64>, scale: Scale) -> Result<Self> {
        let (rows, cols) = values.dim();
        Self::new(
            values,
            (0..rows).map(|i| i as f64).collect(),
            (0..cols).map(|j| j as f64).collect(),
            scale,
            None,
        )
    }

    /// Same axes, new values and scale.
    pub fn with_values(&self, values: Array2<f64>, scale: Scale) -> Result<Self> {
        Self::new(
            values,
            self.frame_times.clone(),
            self.bin_freqs.clone(),
            scale,
            self.framing,
        )
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn frame_times(&self) -> &[f64] {
        &self.frame_times
    }

    pub fn bin_freqs(&self) -> &[f64] {
        &self.bin_freqs
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn framing(&self) -> Option<Framing> {
        self.framing
    }

    pub fn n_frames(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_bins(&self) -> usize {
        self.values.ncols()
    }

    pub fn expect_scale(&self, scale: Scale) -> Result<()> {
        if self.scale == scale {
            Ok(())
        } else {
            Err(Error::State(format!(
                "expected a {scale} spectrogram, got {}",
                self.scale
            )))
        }
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let (rows, cols) = self.values.dim();
        let rows32 = u32::try_from(rows).map_err(|_| Error::Size("too many rows".into()))?;
        let cols32 = u32::try_from(cols).map_err(|_| Error::Size("too many cols".into()))?;
        w.write_all(MAGIC)?;
        w.write_all(&rows32.to_le_bytes())?;
        w.write_all(&cols32.to_le_bytes())?;
        for v in self.values.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in self.frame_times.iter().chain(&self.bin_freqs) {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the binary payload; `scale` and `framing` come from elsewhere.
    pub fn read_binary<R: Read>(mut r: R, scale: Scale, framing: Option<Framing>) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("missing SPG1 magic".into()));
        }
        let rows = read_u32(&mut r)? as usize;
        let cols = read_u32(&mut r)? as usize;
        let values = read_f64s(&mut r, rows * cols)?;
        let frame_times = read_f64s(&mut r, rows)?;
        let bin_freqs = read_f64s(&mut r, cols)?;
        let values = Array2::from_shape_vec((rows, cols), values)
            .map_err(|e| Error::Format(e.to_string()))?;
        Self::new(values, frame_times, bin_freqs, scale, framing)
    }

    pub fn sidecar_path(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    }

    /// Writes `path` (SPG1) plus its JSON sidecar.
    pub fn save_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path)?;
        self.write_binary(std::io::BufWriter::new(f))?;
        let side = Sidecar {
            scale: self.scale,
            framing: self.framing,
        };
        std::fs::write(Self::sidecar_path(path), serde_json::to_string_pretty(&side)?)?;
        Ok(())
    }

    /// Loads an SPG1 file. The scale comes from the sidecar, or from
    /// `fallback` when there is none; with neither the tag is unknown and
    /// loading fails with a state error.
    pub fn load_binary(path: impl AsRef<Path>, fallback: Option<Scale>) -> Result<Self> {
        let path = path.as_ref();
        let side_path = Self::sidecar_path(path);
        let (scale, framing) = if side_path.exists() {
            let side: Sidecar = serde_json::from_str(&std::fs::read_to_string(side_path)?)?;
            (side.scale, side.framing)
        } else {
            let scale = fallback.ok_or_else(|| {
                Error::State(format!(
                    "{} has no sidecar; its scale tag is unknown",
                    path.display()
                ))
            })?;
            (scale, None)
        };
        let f = std::fs::File::open(path)?;
        Self::read_binary(std::io::BufReader::new(f), scale, framing)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![self.scale.as_str().to_string()];
        header.extend(self.bin_freqs.iter().map(f64::to_string));
        w.write_record(&header)?;
        for (t, row) in self.frame_times.iter().zip(self.values.rows()) {
            let mut rec = vec![t.to_string()];
            rec.extend(row.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
        let mut records = r.records();
        let header = records
            .next()
            .ok_or_else(|| Error::Format("empty spectrogram CSV".into()))??;
        let scale: Scale = header
            .get(0)
            .ok_or_else(|| Error::Format("missing scale cell".into()))?
            .parse()?;
        let bin_freqs = header.iter().skip(1).map(parse_f64).collect::<Result<Vec<_>>>()?;
        let mut frame_times = Vec::new();
        let mut values = Vec::new();
        for rec in records {
            let rec = rec?;
            if rec.len() != bin_freqs.len() + 1 {
                return Err(Error::Format("ragged spectrogram CSV".into()));
            }
            frame_times.push(parse_f64(&rec[0])?);
            for v in rec.iter().skip(1) {
                values.push(parse_f64(v)?);
            }
        }
        let values = Array2::from_shape_vec((frame_times.len(), bin_freqs.len()), values)
            .map_err(|e| Error::Format(e.to_string()))?;
        Self::new(values, frame_times, bin_freqs, scale, None)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }

    /// Grayscale PNG with min-max normalisation: time runs left to right,
    /// frequency bottom to top.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        save_matrix_png(&self.values, path)
    }
}

pub fn save_matrix_png(m: &Array2<f64>, path: impl AsRef<Path>) -> Result<()> {
    let (rows, cols) = m.dim();
    if rows == 0 || cols == 0 {
        return Err(Error::Size("cannot render an empty matrix".into()));
    }
    let (lo, hi) = m
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = if hi > lo { hi - lo } else { 1.0 };
    let img = image::GrayImage::from_fn(rows as u32, cols as u32, |x, y| {
        let v = m[[x as usize, cols - 1 - y as usize]];
        image::Luma([((v - lo) / range * 255.0).round() as u8])
    });
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::Io(std::io::Error::other(e)))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    let mut b = [0u8; 8];
    for _ in 0..n {
        r.read_exact(&mut b)?;
        out.push(f64::from_le_bytes(b));
    }
    Ok(out)
}

/// Hamming-windowed power STFT, frames zero-padded to the next power of two.
/// Rows are frames, columns the one-sided bins `k = 0..=n_fft/2`.
pub fn stft_spectrogram(x: &TimeSeries, frame_ms: f64, overlap: f64) -> Result<Spectrogram> {
    let fs = x.sample_rate();
    let spec = FrameSpec::from_ms(fs, frame_ms, overlap)?;
    let frames = frame_slice(x.samples(), spec)?;
    let window = hamming_window(spec.len)?;
    let n_fft = spec.len.next_power_of_two();
    let n_bins = n_fft / 2 + 1;
    let fft = FftPlanner::new().plan_fft_forward(n_fft);

    let mut values = Array2::zeros((frames.len(), n_bins));
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    for (i, frame) in frames.iter().enumerate() {
        buf.fill(Complex64::new(0.0, 0.0));
        for ((b, v), w) in buf.iter_mut().zip(frame).zip(&window) {
            b.re = v * w;
        }
        fft.process(&mut buf);
        for (k, c) in buf.iter().take(n_bins).enumerate() {
            values[[i, k]] = c.norm_sqr();
        }
    }
    let half = spec.len as f64 / 2.0;
    let frame_times = (0..frames.len())
        .map(|i| ((i * spec.hop) as f64 + half) / fs)
        .collect();
    let bin_freqs = (0..n_bins).map(|k| k as f64 * fs / n_fft as f64).collect();
    Spectrogram::new(
        values,
        frame_times,
        bin_freqs,
        Scale::Power,
        Some(Framing {
            frame_len: spec.len,
            hop: spec.hop,
            n_fft,
            sample_rate: fs,
        }),
    )
}

/// `max(10 log10(p + 1e-12), floor_db)`.
pub fn power_to_db(p: f64, floor_db: f64) -> f64 {
    (10.0 * (p + POWER_EPS).log10()).max(floor_db)
}

pub fn to_decibel(s: &Spectrogram, floor_db: f64) -> Result<Spectrogram> {
    s.expect_scale(Scale::Power)?;
    s.with_values(s.values.mapv(|p| power_to_db(p, floor_db)), Scale::Decibel)
}
