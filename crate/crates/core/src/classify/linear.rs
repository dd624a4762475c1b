//! Ridge classifier, linear SVM and logistic regression on standardized
//! features with an unregularized bias.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearKind {
    Ridge,
    SvmLinear,
    Logistic,
}

/// Per-feature affine map to zero mean, unit variance. Constant features get
/// a unit scale so they map to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardization {
    pub fn fit(x: &Array2<f64>) -> Self {
        let n = x.nrows() as f64;
        let means: Vec<f64> = x.columns().into_iter().map(|c| c.sum() / n).collect();
        let stds = x
            .columns()
            .into_iter()
            .zip(&means)
            .map(|(c, m)| {
                let s = (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Self { means, stds }
    }

    pub fn apply_row(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn apply(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut z = x.clone();
        for mut row in z.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - self.means[j]) / self.stds[j];
            }
        }
        z
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub kind: LinearKind,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub hyperparams: BTreeMap<String, f64>,
    pub standardization: Standardization,
}

impl LinearModel {
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::Size(format!(
                "model expects {} features, got {}",
                self.weights.len(),
                x.len()
            )));
        }
        let z = self.standardization.apply_row(x);
        Ok(self.weights.iter().zip(&z).map(|(w, v)| w * v).sum::<f64>() + self.bias)
    }

    /// Sign of the decision value; zero goes to the positive class.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(Label::from_sign(self.decision(x)?))
    }
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear(mut a: Array2<f64>, mut b: Array1<f64>) -> Result<Array1<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::Size("linear system must be square".into()));
    }
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[[i, col]].abs().total_cmp(&a[[j, col]].abs()))
            .unwrap();
        if a[[piv, col]].abs() <= 1e-12 * scale {
            return Err(Error::Numeric("singular normal equations".into()));
        }
        if piv != col {
            for k in 0..n {
                a.swap([piv, k], [col, k]);
            }
            b.swap(piv, col);
        }
        for row in col + 1..n {
            let f = a[[row, col]] / a[[col, col]];
            if f != 0.0 {
                for k in col..n {
                    a[[row, k]] -= f * a[[col, k]];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = Array1::zeros(n);
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[[row, k]] * x[k]).sum();
        x[row] = (b[row] - s) / a[[row, row]];
    }
    Ok(x)
}

/// Ridge regression with a bias column that is not penalised:
/// `(X̃ᵀX̃ + α D) w = X̃ᵀy`, `X̃ = [X 1]`, `D = diag(1, …, 1, 0)`.
/// Returns `(weights, bias)`.
pub fn ridge_solve(x: &Array2<f64>, y: &[f64], alpha: f64) -> Result<(Vec<f64>, f64)> {
    if alpha < 0.0 || !alpha.is_finite() {
        return Err(Error::Config(format!("ridge alpha must be >= 0, got {alpha}")));
    }
    let (n, d) = x.dim();
    let mut xt = Array2::ones((n, d + 1));
    xt.slice_mut(ndarray::s![.., ..d]).assign(x);
    let mut gram = xt.t().dot(&xt);
    for j in 0..d {
        gram[[j, j]] += alpha;
    }
    let rhs = xt.t().dot(&Array1::from(y.to_vec()));
    let sol = solve_linear(gram, rhs)?;
    Ok((sol.iter().take(d).copied().collect(), sol[d]))
}

pub fn train_ridge(train: &Dataset, alpha: f64) -> Result<LinearModel> {
    train.require_both_classes()?;
    let x = train.matrix();
    let st = Standardization::fit(&x);
    let (weights, bias) = ridge_solve(&st.apply(&x), &train.targets(), alpha)?;
    Ok(LinearModel {
        kind: LinearKind::Ridge,
        weights,
        bias,
        hyperparams: BTreeMap::from([("alpha".into(), alpha)]),
        standardization: st,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub epochs: usize,
    pub step: f64,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            epochs: 200,
            step: 0.01,
            seed: 0,
        }
    }
}

/// `½‖w‖² + C Σ max(0, 1 − y(w·z + b))`.
pub fn svm_objective(z: &Array2<f64>, y: &[f64], w: &[f64], b: f64, c: f64) -> f64 {
    let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let hinge: f64 = z
        .rows()
        .into_iter()
        .zip(y)
        .map(|(row, yi)| {
            let f = row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b;
            (1.0 - yi * f).max(0.0)
        })
        .sum();
    reg + c * hinge
}

/// Shuffled per-sample subgradient steps. An epoch that raises the objective
/// is rolled back and the step halved, so the returned trace never increases.
pub fn train_svm_linear_traced(train: &Dataset, p: SvmParams) -> Result<(LinearModel, Vec<f64>)> {
    train.require_both_classes()?;
    if !(p.c > 0.0 && p.step > 0.0) {
        return Err(Error::Config("SVM C and step must be positive".into()));
    }
    let x = train.matrix();
    let st = Standardization::fit(&x);
    let z = st.apply(&x);
    let y = train.targets();
    let (n, d) = z.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let (mut w, mut b) = (vec![0.0; d], 0.0);
    let mut best = svm_objective(&z, &y, &w, b, p.c);
    let mut trace = vec![best];
    let mut step = p.step;
    for _ in 0..p.epochs {
        let (w0, b0) = (w.clone(), b);
        order.shuffle(&mut rng);
        for &i in &order {
            let row = z.row(i);
            let f = row.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>() + b;
            let active = y[i] * f < 1.0;
            for (j, wj) in w.iter_mut().enumerate() {
                let mut g = *wj / n as f64;
                if active {
                    g -= p.c * y[i] * row[j];
                }
                *wj -= step * g;
            }
            if active {
                b += step * p.c * y[i];
            }
        }
        let obj = svm_objective(&z, &y, &w, b, p.c);
        if obj <= best {
            best = obj;
        } else {
            w = w0;
            b = b0;
            step *= 0.5;
        }
        trace.push(best);
    }
    let hyperparams = BTreeMap::from([
        ("C".into(), p.c),
        ("epochs".into(), p.epochs as f64),
        ("step".into(), p.step),
        ("seed".into(), p.seed as f64),
    ]);
    Ok((
        LinearModel {
            kind: LinearKind::SvmLinear,
            weights: w,
            bias: b,
            hyperparams,
            standardization: st,
        },
        trace,
    ))
}

pub fn train_svm_linear(train: &Dataset, p: SvmParams) -> Result<LinearModel> {
    Ok(train_svm_linear_traced(train, p)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub step: f64,
    pub epochs: usize,
    /// Stop once the gradient norm drops below this.
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            step: 0.5,
            epochs: 2000,
            tol: 1e-9,
        }
    }
}

fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Mean negative log-likelihood `(1/n) Σ log(1 + exp(−y f))` and its gradient
/// with respect to `[w…, b]`.
pub fn logistic_loss_and_grad(z: &Array2<f64>, y: &[f64], params: &[f64]) -> (f64, Vec<f64>) {
    let (n, d) = z.dim();
    let (w, b) = (&params[..d], params[d]);
    let mut loss = 0.0;
    let mut grad = vec![0.0; d + 1];
    for (row, &yi) in z.axis_iter(Axis(0)).zip(y) {
        let f = row.iter().zip(w).map(|(a, c)| a * c).sum::<f64>() + b;
        loss += softplus(-yi * f);
        let g = -yi * sigmoid(-yi * f);
        for (gj, xj) in grad.iter_mut().zip(row.iter()) {
            *gj += g * xj;
        }
        grad[d] += g;
    }
    let n = n as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    (loss / n, grad)
}

pub fn train_logistic(train: &Dataset, p: LogisticParams) -> Result<LinearModel> {
    train.require_both_classes()?;
    if !(p.step > 0.0) {
        return Err(Error::Config("logistic step must be positive".into()));
    }
    let x = train.matrix();
    let st = Standardization::fit(&x);
    let z = st.apply(&x);
    let y = train.targets();
    let d = z.ncols();
    let mut params = vec![0.0; d + 1];
    for _ in 0..p.epochs {
        let (_, grad) = logistic_loss_and_grad(&z, &y, &params);
        if grad.iter().map(|g| g * g).sum::<f64>().sqrt() < p.tol {
            break;
        }
        for (v, g) in params.iter_mut().zip(&grad) {
            *v -= p.step * g;
        }
    }
    if params.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("logistic regression diverged".into()));
    }
    let bias = params.pop().unwrap();
    Ok(LinearModel {
        kind: LinearKind::Logistic,
        weights: params,
        bias,
        hyperparams: BTreeMap::from([
            ("step".into(), p.step),
            ("epochs".into(), p.epochs as f64),
            ("tol".into(), p.tol),
        ]),
        standardization: st,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureKind;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn data(x: Vec<Vec<f64>>, labels: Vec<Label>) -> Dataset {
        Dataset::from_parts(FeatureKind::Mfcc, x, labels).unwrap()
    }

    fn blobs(n: usize, sep: f64, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut x = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let label = if i % 2 == 0 { Label::Rumble } else { Label::Background };
            let c = label.sign() * sep;
            x.push(vec![c + noise.sample(&mut rng), -c + noise.sample(&mut rng)]);
            labels.push(label);
        }
        data(x, labels)
    }

    fn pair() -> Dataset {
        data(vec![vec![-1.0], vec![1.0]], vec![Label::Background, Label::Rumble])
    }

    #[test]
    fn ridge_pair_boundary_at_zero() {
        let m = train_ridge(&pair(), 1e-9).unwrap();
        assert!(m.bias.abs() < 1e-12);
        assert_eq!(m.predict(&[-1.0]).unwrap(), Label::Background);
        assert_eq!(m.predict(&[1.0]).unwrap(), Label::Rumble);
        assert_eq!(m.predict(&[0.0]).unwrap(), Label::Rumble);
    }

    #[test]
    fn ridge_infinite_shrinkage_is_majority() {
        let d = data(
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![Label::Background, Label::Background, Label::Rumble],
        );
        let m = train_ridge(&d, 1e12).unwrap();
        assert!(m.weights[0].abs() < 1e-9);
        assert_eq!(m.predict(&[2.0]).unwrap(), Label::Background);
    }

    #[test]
    fn ridge_singular_without_penalty() {
        let d = data(
            vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]],
            vec![Label::Background, Label::Rumble, Label::Rumble],
        );
        assert!(matches!(train_ridge(&d, 0.0), Err(Error::Numeric(_))));
        assert!(train_ridge(&d, 1.0).is_ok());
    }

    #[test]
    fn empty_class_is_data_error() {
        let d = data(vec![vec![1.0], vec![2.0]], vec![Label::Rumble, Label::Rumble]);
        assert!(matches!(train_ridge(&d, 1.0), Err(Error::Data(_))));
        assert!(matches!(train_logistic(&d, LogisticParams::default()), Err(Error::Data(_))));
    }

    #[test]
    fn ridge_scale_covariance() {
        let d = blobs(20, 1.0, 4);
        let x = d.matrix();
        let y = d.targets();
        let (w, b) = ridge_solve(&x, &y, 1.0).unwrap();
        let s = 7.0;
        let (ws, bs) = ridge_solve(&x.mapv(|v| v * s), &y, s * s).unwrap();
        assert!((b - bs).abs() < 1e-9);
        for (a, c) in w.iter().zip(&ws) {
            assert!((a - c * s).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_shift_is_absorbed() {
        let d = blobs(30, 0.7, 8);
        let shifted = data(
            d.rows().iter().map(|r| r.values.iter().map(|v| v + 50.0).collect()).collect(),
            d.labels(),
        );
        let m = train_ridge(&d, 1.0).unwrap();
        let ms = train_ridge(&shifted, 1.0).unwrap();
        for (a, b) in d.rows().iter().zip(shifted.rows()) {
            let (da, db) = (m.decision(&a.values).unwrap(), ms.decision(&b.values).unwrap());
            assert!((da - db).abs() < 1e-9);
        }
    }

    #[test]
    fn svm_separates_and_descends() {
        let d = blobs(40, 3.0, 1);
        let (m, trace) = train_svm_linear_traced(&d, SvmParams::default()).unwrap();
        assert!(trace.windows(2).all(|w| w[1] <= w[0]));
        for r in d.rows() {
            assert_eq!(m.predict(&r.values).unwrap(), r.label);
        }
    }

    #[test]
    fn svm_matches_ridge_on_repeated_points() {
        let d = data(
            vec![vec![-1.0], vec![-1.0], vec![1.0], vec![1.0]],
            vec![Label::Background, Label::Background, Label::Rumble, Label::Rumble],
        );
        let svm = train_svm_linear(&d, SvmParams::default()).unwrap();
        let ridge = train_ridge(&d, 1.0).unwrap();
        for x in [-1.0, -0.1, 0.1, 1.0] {
            assert_eq!(svm.predict(&[x]).unwrap(), ridge.predict(&[x]).unwrap());
        }
    }

    #[test]
    fn svm_is_seed_deterministic() {
        let d = blobs(30, 0.5, 2);
        let p = SvmParams { seed: 9, ..Default::default() };
        assert_eq!(train_svm_linear(&d, p).unwrap(), train_svm_linear(&d, p).unwrap());
    }

    #[test]
    fn logistic_symmetric_pair() {
        let m = train_logistic(
            &pair(),
            LogisticParams { epochs: 50, ..Default::default() },
        )
        .unwrap();
        assert!(m.bias.abs() < 1e-12);
        assert!((sigmoid(m.decision(&[0.0]).unwrap()) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn logistic_gradient_matches_finite_differences() {
        let d = blobs(16, 0.5, 3);
        let z = Standardization::fit(&d.matrix()).apply(&d.matrix());
        let y = d.targets();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p: Vec<f64> = (0..3).map(|_| rng.random::<f64>() - 0.5).collect();
        let (_, g) = logistic_loss_and_grad(&z, &y, &p);
        let h = 1e-6;
        for j in 0..3 {
            let mut hi = p.clone();
            let mut lo = p.clone();
            hi[j] += h;
            lo[j] -= h;
            let fd = (logistic_loss_and_grad(&z, &y, &hi).0 - logistic_loss_and_grad(&z, &y, &lo).0)
                / (2.0 * h);
            assert!((fd - g[j]).abs() < 1e-6);
        }
    }

    #[test]
    fn logistic_converges_on_overlap() {
        let d = blobs(30, 0.5, 5);
        let m = train_logistic(&d, LogisticParams::default()).unwrap();
        let z = m.standardization.apply(&d.matrix());
        let mut p = m.weights.clone();
        p.push(m.bias);
        let (_, g) = logistic_loss_and_grad(&z, &d.targets(), &p);
        assert!(g.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-6);
    }

    #[test]
    fn logistic_separable_with_early_stop() {
        let d = blobs(20, 4.0, 6);
        let m = train_logistic(&d, LogisticParams { epochs: 100, ..Default::default() }).unwrap();
        for r in d.rows() {
            assert_eq!(m.predict(&r.values).unwrap(), r.label);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let m = train_ridge(&pair(), 1.0).unwrap();
        assert!(matches!(m.predict(&[1.0, 2.0]), Err(Error::Size(_))));
    }
}
