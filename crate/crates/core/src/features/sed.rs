use std::ops::Range;

use crate::dsp::{Scale, Spectrogram};
use crate::error::{Error, Result};

/// Contiguous bin ranges, as equal as possible; the first `n_bins % n_bands`
/// bands get one extra bin.
pub fn band_ranges(n_bins: usize, n_bands: usize) -> Result<Vec<Range<usize>>> {
    if n_bands == 0 || n_bins < n_bands {
        return Err(Error::Size(format!(
            "cannot split {n_bins} bins into {n_bands} bands"
        )));
    }
    let (base, extra) = (n_bins / n_bands, n_bins % n_bands);
    let mut start = 0;
    Ok((0..n_bands)
        .map(|k| {
            let len = base + usize::from(k < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect())
}

/// `E_k = Σ_{i ∈ B_k} Σ_j value[j, i]²` over frames `j` and bins `i`.
pub fn spectral_energy_distribution(s: &Spectrogram, n_bands: usize) -> Result<Vec<f64>> {
    s.expect_scale(Scale::Power)?;
    let v = s.values();
    Ok(band_ranges(s.n_bins(), n_bands)?
        .into_iter()
        .map(|r| v.slice(ndarray::s![.., r]).iter().map(|x| x * x).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn power(m: Array2<f64>) -> Spectrogram {
        Spectrogram::from_matrix(m, Scale::Power).unwrap()
    }

    #[test]
    fn remainder_goes_low() {
        let r = band_ranges(53, 25).unwrap();
        assert_eq!(r[0], 0..3);
        assert_eq!(r[1], 3..6);
        assert_eq!(r[2], 6..9);
        assert_eq!(r[3], 9..11);
        assert_eq!(r[24].end, 53);
        assert!(band_ranges(24, 25).is_err());
    }

    #[test]
    fn uniform_energy() {
        let e = spectral_energy_distribution(&power(Array2::ones((9, 25))), 25).unwrap();
        assert!(e.iter().all(|&v| v == 9.0));
        let z = spectral_energy_distribution(&power(Array2::zeros((9, 25))), 25).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // 50 bins by 7 frames
        let m = Array2::from_shape_fn((7, 50), |_| rng.random::<f64>());
        let e = spectral_energy_distribution(&power(m.clone()), 25).unwrap();
        for (k, ek) in e.iter().enumerate() {
            let mut acc = 0.0;
            for i in 2 * k..2 * k + 2 {
                for j in 0..7 {
                    acc += m[[j, i]] * m[[j, i]];
                }
            }
            assert!((ek - acc).abs() < 1e-12);
        }
        let total: f64 = m.iter().map(|v| v * v).sum();
        assert!((e.iter().sum::<f64>() - total).abs() <= 1e-12 * total);
    }

    #[test]
    fn decibel_rejected() {
        let s = Spectrogram::from_matrix(Array2::ones((3, 30)), Scale::Decibel).unwrap();
        assert!(matches!(
            spectral_energy_distribution(&s, 25),
            Err(Error::State(_))
        ));
    }

    proptest! {
        #[test]
        fn bands_partition_the_energy(
            frames in 1usize..20,
            bins in 25usize..140,
            seed in 0u64..1000,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = Array2::from_shape_fn((frames, bins), |_| rng.random::<f64>() * 1e4);
            let total: f64 = m.iter().map(|v| v * v).sum();
            let parts: f64 = spectral_energy_distribution(&power(m), 25).unwrap().iter().sum();
            prop_assert!((total - parts).abs() <= 1e-12 * total);
        }
    }
}
