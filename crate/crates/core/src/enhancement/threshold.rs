use ndarray::Array2;

use crate::error::{Error, Result};

/// Linear interpolation between order statistics (`p` in percent).
pub fn percentile(sorted: &[f64], p: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::Size("percentile of an empty set".into()));
    }
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// 25th, 50th and 75th percentiles of all entries.
pub fn quartile_thresholds(m: &Array2<f64>) -> Result<[f64; 3]> {
    let mut v: Vec<f64> = m.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    Ok([
        percentile(&v, 25.0)?,
        percentile(&v, 50.0)?,
        percentile(&v, 75.0)?,
    ])
}

/// Which of the four intensity bands a value falls in: 0 is above the 75th
/// percentile, 3 is at or below the 25th. Inequalities are strict.
pub fn band_index(v: f64, thresholds: &[f64; 3]) -> usize {
    if v > thresholds[2] {
        0
    } else if v > thresholds[1] {
        1
    } else if v > thresholds[0] {
        2
    } else {
        3
    }
}

/// Per-pixel offsets by intensity band, before any blur.
pub fn threshold_adjust(m: &Array2<f64>, deltas: &[f64; 4]) -> Result<Array2<f64>> {
    let t = quartile_thresholds(m)?;
    Ok(m.mapv(|v| v + deltas[band_index(v, &t)]))
}
