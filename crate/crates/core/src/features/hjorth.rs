use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hjorth {
    pub activity: f64,
    pub mobility: f64,
    pub complexity: f64,
}

impl Hjorth {
    pub fn to_vec(self) -> Vec<f64> {
        vec![self.activity, self.mobility, self.complexity]
    }
}

/// Sample variance (divides by `N - 1`); a single sample has variance 0.
pub fn sample_variance(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
}

fn diff(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

pub fn activity(x: &[f64]) -> f64 {
    sample_variance(x)
}

pub fn mobility(x: &[f64]) -> Result<f64> {
    let v = sample_variance(x);
    if v <= 0.0 {
        return Err(Error::Degenerate(
            "mobility is undefined for a constant signal".into(),
        ));
    }
    Ok((sample_variance(&diff(x)) / v).sqrt())
}

pub fn complexity(x: &[f64]) -> Result<f64> {
    let d = diff(x);
    if sample_variance(&d) <= 0.0 {
        return Err(Error::Degenerate(
            "complexity is undefined when the first difference is constant".into(),
        ));
    }
    Ok(mobility(&d)? / mobility(x)?)
}

pub fn hjorth(x: &[f64]) -> Result<Hjorth> {
    if x.len() < 3 {
        return Err(Error::Size(format!(
            "Hjorth parameters need at least 3 samples, got {}",
            x.len()
        )));
    }
    Ok(Hjorth {
        activity: activity(x),
        mobility: mobility(x)?,
        complexity: complexity(x)?,
    })
}
