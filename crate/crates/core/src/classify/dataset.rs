use ndarray::Array2;

use crate::error::{Error, Result};
use crate::features::{FeatureKind, FeatureVector, Label};

/// Rows of one feature kind and one length.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Vec<FeatureVector>,
}

impl Dataset {
    pub fn new(rows: Vec<FeatureVector>) -> Result<Self> {
        if let Some(first) = rows.first() {
            if let Some(r) = rows
                .iter()
                .find(|r| r.kind != first.kind || r.len() != first.len())
            {
                return Err(Error::Data(format!(
                    "mixed rows: {} x {} and {} x {}",
                    first.kind,
                    first.len(),
                    r.kind,
                    r.len()
                )));
            }
        }
        Ok(Self { rows })
    }

    /// Builds a dataset from raw rows, mostly for tests and synthetic probes.
    pub fn from_parts(kind: FeatureKind, x: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self> {
        if x.len() != labels.len() {
            return Err(Error::Size(format!(
                "{} rows but {} labels",
                x.len(),
                labels.len()
            )));
        }
        let rows = x
            .into_iter()
            .zip(labels)
            .enumerate()
            .map(|(i, (v, l))| FeatureVector::new(kind, v, l, format!("row{i}")))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    pub fn rows(&self) -> &[FeatureVector] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn kind(&self) -> Option<FeatureKind> {
        self.rows.first().map(|r| r.kind)
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, FeatureVector::len)
    }

    /// `(rumble, background)` counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.rows.iter().filter(|r| r.label == Label::Rumble).count();
        (pos, self.rows.len() - pos)
    }

    pub fn labels(&self) -> Vec<Label> {
        self.rows.iter().map(|r| r.label).collect()
    }

    /// `±1` targets, rumble positive.
    pub fn targets(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.label.sign()).collect()
    }

    pub fn matrix(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.len(), self.dim()), |(i, j)| self.rows[i].values[j])
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    pub fn require_both_classes(&self) -> Result<()> {
        match self.class_counts() {
            (0, _) => Err(Error::Data("no rumble rows to train on".into())),
            (_, 0) => Err(Error::Data("no background rows to train on".into())),
            _ => Ok(()),
        }
    }
}
