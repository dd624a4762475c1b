use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Rumble,
    Background,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Rumble => "rumble",
            Label::Background => "background",
        }
    }

    /// `+1` for the positive (rumble) class.
    pub fn sign(self) -> f64 {
        match self {
            Label::Rumble => 1.0,
            Label::Background => -1.0,
        }
    }

    pub fn from_sign(v: f64) -> Self {
        if v >= 0.0 {
            Label::Rumble
        } else {
            Label::Background
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rumble" => Ok(Label::Rumble),
            "background" => Ok(Label::Background),
            other => Err(Error::Format(format!("unknown label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Mfcc,
    Hjorth,
    Sed,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 3] = [FeatureKind::Mfcc, FeatureKind::Hjorth, FeatureKind::Sed];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Mfcc => "mfcc",
            FeatureKind::Hjorth => "hjorth",
            FeatureKind::Sed => "sed",
        }
    }

    /// Length forced by the definition; MFCC and SED lengths are configurable.
    pub fn fixed_len(self) -> Option<usize> {
        match self {
            FeatureKind::Hjorth => Some(3),
            _ => None,
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mfcc" => Ok(FeatureKind::Mfcc),
            "hjorth" => Ok(FeatureKind::Hjorth),
            "sed" => Ok(FeatureKind::Sed),
            other => Err(Error::Format(format!("unknown feature kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub kind: FeatureKind,
    pub values: Vec<f64>,
    pub label: Label,
    pub source_id: String,
}

impl FeatureVector {
    pub fn new(
        kind: FeatureKind,
        values: Vec<f64>,
        label: Label,
        source_id: impl Into<String>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Size(format!("empty {kind} feature vector")));
        }
        if let Some(n) = kind.fixed_len() {
            if values.len() != n {
                return Err(Error::Size(format!(
                    "{kind} vectors have {n} values, got {}",
                    values.len()
                )));
            }
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite {kind} feature {v}")));
        }
        Ok(Self {
            kind,
            values,
            label,
            source_id: source_id.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Header `kind,source_id,label,v0..v{n-1}`; all rows must share one length.
pub fn write_features_csv<W: Write>(rows: &[FeatureVector], writer: W) -> Result<()> {
    let n = rows.first().map_or(0, FeatureVector::len);
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Size("feature rows differ in length".into()));
    }
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["kind".to_string(), "source_id".into(), "label".into()];
    header.extend((0..n).map(|i| format!("v{i}")));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.kind.to_string(), r.source_id.clone(), r.label.to_string()];
        rec.extend(r.values.iter().map(|v| format!("{v:?}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features_csv<R: Read>(reader: R) -> Result<Vec<FeatureVector>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    let fixed = ["kind", "source_id", "label"];
    if header.len() < 4 || header.iter().take(3).ne(fixed) {
        return Err(Error::Format(
            "feature CSV header must start with kind,source_id,label,v0".into(),
        ));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let values = rec
            .iter()
            .skip(3)
            .map(crate::series::parse_f64)
            .collect::<Result<Vec<_>>>()?;
        rows.push(FeatureVector::new(
            rec[0].parse()?,
            values,
            rec[2].parse()?,
            &rec[1],
        )?);
    }
    Ok(rows)
}

pub fn save_features_csv(rows: &[FeatureVector], path: impl AsRef<Path>) -> Result<()> {
    write_features_csv(rows, std::fs::File::create(path)?)
}

pub fn load_features_csv(path: impl AsRef<Path>) -> Result<Vec<FeatureVector>> {
    read_features_csv(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            FeatureVector::new(FeatureKind::Hjorth, vec![1.5, 0.25, 1e-7], Label::Rumble, "r0")
                .unwrap(),
            FeatureVector::new(FeatureKind::Hjorth, vec![0.1, 2.0, 3.0], Label::Background, "b0")
                .unwrap(),
        ];
        let mut buf = Vec::new();
        write_features_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("kind,source_id,label,v0,v1,v2\nhjorth,r0,rumble,"));
        assert_eq!(read_features_csv(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn validation() {
        assert!(FeatureVector::new(FeatureKind::Hjorth, vec![1.0], Label::Rumble, "x").is_err());
        assert!(FeatureVector::new(FeatureKind::Sed, vec![f64::NAN], Label::Rumble, "x").is_err());
        assert!("noise".parse::<Label>().is_err());
        assert_eq!(Label::from_sign(0.0), Label::Rumble);
    }
}
