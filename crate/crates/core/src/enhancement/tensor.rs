use ndarray::{Array2, Axis, Zip};

use super::filter::{gaussian_blur, gradient};
use crate::dsp::Spectrogram;
use crate::error::{Error, Result};

/// Smoothed gradient products at every pixel; `t` is axis 0, `f` axis 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureTensorField {
    pub j_tt: Array2<f64>,
    pub j_ff: Array2<f64>,
    pub j_tf: Array2<f64>,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceMap {
    pub c: Array2<f64>,
    pub epsilon_guard: f64,
}

pub fn structure_tensor_matrix(m: &Array2<f64>, sigma: f64) -> Result<StructureTensorField> {
    let (rows, cols) = m.dim();
    if rows < 3 || cols < 3 {
        return Err(Error::Size(format!(
            "structure tensor needs at least 3x3, got {rows}x{cols}"
        )));
    }
    let gt = gradient(m, Axis(0));
    let gf = gradient(m, Axis(1));
    Ok(StructureTensorField {
        j_tt: gaussian_blur(&(&gt * &gt), sigma),
        j_ff: gaussian_blur(&(&gf * &gf), sigma),
        j_tf: gaussian_blur(&(&gt * &gf), sigma),
        sigma,
    })
}

pub fn structure_tensor(s: &Spectrogram, sigma: f64) -> Result<StructureTensorField> {
    structure_tensor_matrix(s.values(), sigma)
}

/// Closed-form eigenvalues of a symmetric 2x2 matrix, larger first.
pub fn eigen_2x2(a: f64, d: f64, b: f64) -> (f64, f64) {
    let root = ((a - d) * (a - d) + 4.0 * b * b).sqrt();
    (0.5 * (a + d + root), 0.5 * (a + d - root))
}

pub fn tensor_eigenvalues(t: &StructureTensorField) -> (Array2<f64>, Array2<f64>) {
    let mut l1 = Array2::zeros(t.j_tt.dim());
    let mut l2 = Array2::zeros(t.j_tt.dim());
    Zip::from(&mut l1)
        .and(&mut l2)
        .and(&t.j_tt)
        .and(&t.j_ff)
        .and(&t.j_tf)
        .for_each(|l1, l2, &a, &d, &b| {
            let (hi, lo) = eigen_2x2(a, d, b);
            *l1 = hi;
            *l2 = lo;
        });
    (l1, l2)
}

/// `(λ1 − λ2) / (λ1 + λ2)` clamped to `[0, 1]`; pixels whose eigenvalue sum
/// is below `eps` are homogeneous and get 0.
pub fn coherence(l1: &Array2<f64>, l2: &Array2<f64>, eps: f64) -> CoherenceMap {
    let c = Zip::from(l1).and(l2).map_collect(|&a, &b| {
        let sum = a + b;
        if sum < eps {
            0.0
        } else {
            ((a - b) / sum).clamp(0.0, 1.0)
        }
    });
    CoherenceMap {
        c,
        epsilon_guard: eps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single(v: f64) -> Array2<f64> {
        Array2::from_elem((1, 1), v)
    }

    #[test]
    fn eigen_examples() {
        assert_eq!(eigen_2x2(4.0, 0.0, 0.0), (4.0, 0.0));
        assert_eq!(eigen_2x2(1.0, 1.0, 0.0), (1.0, 1.0));
        let (a, b) = eigen_2x2(2.0, 1.0, 1.0);
        assert!((a - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((b - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn coherence_regimes() {
        assert_eq!(coherence(&single(2.0), &single(2.0), 1e-12).c[[0, 0]], 0.0);
        assert_eq!(coherence(&single(3.0), &single(0.0), 1e-12).c[[0, 0]], 1.0);
        assert_eq!(coherence(&single(0.0), &single(0.0), 1e-12).c[[0, 0]], 0.0);
    }

    #[test]
    fn constant_matrix_has_zero_tensor() {
        let t = structure_tensor_matrix(&Array2::from_elem((6, 5), 7.0), 1.5).unwrap();
        for m in [&t.j_tt, &t.j_ff, &t.j_tf] {
            assert!(m.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn time_ramp_is_single_direction() {
        let m = Array2::from_shape_fn((8, 8), |(i, _)| i as f64);
        let t = structure_tensor_matrix(&m, 1.5).unwrap();
        for i in 2..6 {
            for j in 2..6 {
                assert!(t.j_tt[[i, j]] > 0.5);
                assert!(t.j_ff[[i, j]].abs() < 1e-12);
                assert!(t.j_tf[[i, j]].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn too_small_is_size_error() {
        assert!(matches!(
            structure_tensor_matrix(&Array2::zeros((2, 5)), 1.0),
            Err(Error::Size(_))
        ));
    }

    proptest! {
        #[test]
        fn field_invariants(v in prop::collection::vec(0.0f64..10.0, 36)) {
            let m = Array2::from_shape_vec((6, 6), v).unwrap();
            let t = structure_tensor_matrix(&m, 1.5).unwrap();
            let (l1, l2) = tensor_eigenvalues(&t);
            for ((i, j), &tt) in t.j_tt.indexed_iter() {
                let (ff, tf) = (t.j_ff[[i, j]], t.j_tf[[i, j]]);
                prop_assert!(tt >= 0.0 && ff >= 0.0);
                prop_assert!(tf * tf <= tt * ff + 1e-9);
                prop_assert!(l1[[i, j]] >= l2[[i, j]] && l2[[i, j]] >= -1e-12);
            }
            let c = coherence(&l1, &l2, 1e-12);
            prop_assert!(c.c.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
