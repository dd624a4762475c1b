//! End-to-end orchestration shared by the command-line tool and the tests.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classify::{
    default_registry, evaluate, leaderboard, split_dataset, train, Dataset, EvalReport,
    Leaderboard, Model, TrainingConfig,
};
use crate::dsp::{db3_denoise, stft_spectrogram, to_decibel, Spectrogram};
use crate::enhancement::{enhance, ssim, EnhanceConfig, Enhanced};
use crate::error::{Error, Result};
use crate::features::{
    hjorth, mfcc_series, mfcc_spectrogram, save_features_csv, spectral_energy_distribution,
    FeatureConfig, FeatureKind, FeatureVector, Label, MfccSource,
};
use crate::frontend::{centered_codes, FrontEndConfig};
use crate::series::{TimeSeries, Unit};
use crate::synth::{generate_corpus, write_corpus, CorpusConfig, CorpusItem};

pub use crate::dsp::DB_FLOOR;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StftConfig {
    pub frame_ms: f64,
    pub overlap: f64,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            frame_ms: 250.0,
            overlap: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub frontend: FrontEndConfig,
    pub stft: StftConfig,
    pub enhancement: EnhanceConfig,
    pub features: FeatureConfig,
    pub training: TrainingConfig,
    pub synth: CorpusConfig,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.frontend.validate()?;
        self.enhancement.validate()?;
        self.features.validate()?;
        self.training.validate()?;
        self.synth.validate()?;
        if !(self.stft.frame_ms > 0.0 && (0.0..1.0).contains(&self.stft.overlap)) {
            return Err(Error::Config(format!(
                "stft frame {} ms with overlap {}",
                self.stft.frame_ms, self.stft.overlap
            )));
        }
        if self.features.f_max > self.frontend.sample_rate / 2.0 {
            return Err(Error::Config(
                "mel range extends past the Nyquist frequency".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Applies a seed override to every seeded stage.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.training.seed = seed;
        self.synth.seed = seed;
        self
    }
}

/// Zero-mean code signal after wavelet denoising.
pub fn condition(codes: &TimeSeries, cfg: &PipelineConfig) -> Result<TimeSeries> {
    codes.expect_unit(Unit::AdcCode)?;
    let centered = centered_codes(codes, &cfg.frontend)?;
    db3_denoise(&centered, cfg.features.wavelet_levels)
}

/// Power spectrogram of a signal; ADC codes are conditioned first.
pub fn spectrogram(x: &TimeSeries, cfg: &PipelineConfig) -> Result<Spectrogram> {
    let x = if x.unit() == Unit::AdcCode {
        condition(x, cfg)?
    } else {
        x.clone()
    };
    stft_spectrogram(&x, cfg.stft.frame_ms, cfg.stft.overlap)
}

/// SSIM of both enhancement outputs against the input, in decibels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnhanceSsim {
    pub ridge_only: f64,
    pub coherence_weighted: f64,
    pub thresholded: f64,
}

pub fn enhance_with_ssim(power: &Spectrogram, cfg: &EnhanceConfig) -> Result<(Enhanced, EnhanceSsim)> {
    let e = enhance(power, cfg)?;
    let original = to_decibel(power, DB_FLOOR)?;
    let ridge_db = to_decibel(&e.ridge_only, DB_FLOOR)?;
    let scores = EnhanceSsim {
        ridge_only: ssim(&ridge_db, &original)?,
        coherence_weighted: ssim(&e.coherence_weighted, &original)?,
        thresholded: ssim(&e.thresholded, &original)?,
    };
    Ok((e, scores))
}

#[derive(Debug, Clone)]
pub struct RecordingFeatures {
    pub mfcc: FeatureVector,
    pub hjorth: FeatureVector,
    pub sed: FeatureVector,
}

impl RecordingFeatures {
    pub fn get(&self, kind: FeatureKind) -> &FeatureVector {
        match kind {
            FeatureKind::Mfcc => &self.mfcc,
            FeatureKind::Hjorth => &self.hjorth,
            FeatureKind::Sed => &self.sed,
        }
    }
}

/// All three feature vectors of one ADC-code recording.
pub fn extract_features(
    codes: &TimeSeries,
    label: Label,
    source_id: &str,
    cfg: &PipelineConfig,
) -> Result<RecordingFeatures> {
    let clean = condition(codes, cfg)?;
    let power = stft_spectrogram(&clean, cfg.stft.frame_ms, cfg.stft.overlap)?;
    let mfcc = match cfg.features.mfcc_source {
        MfccSource::Frames => mfcc_series(&clean, &cfg.features)?,
        MfccSource::Enhanced => {
            let e = enhance(&power, &cfg.enhancement)?;
            mfcc_spectrogram(&e.thresholded, &cfg.features)?
        }
    };
    let h = hjorth(clean.samples())?;
    let sed = spectral_energy_distribution(&power, cfg.features.n_bands)?;
    Ok(RecordingFeatures {
        mfcc: FeatureVector::new(FeatureKind::Mfcc, mfcc, label, source_id)?,
        hjorth: FeatureVector::new(FeatureKind::Hjorth, h.to_vec(), label, source_id)?,
        sed: FeatureVector::new(FeatureKind::Sed, sed, label, source_id)?,
    })
}

pub fn corpus_features(items: &[CorpusItem], cfg: &PipelineConfig) -> Result<Vec<RecordingFeatures>> {
    items
        .iter()
        .map(|it| extract_features(&it.codes, it.label, &it.source_id, cfg))
        .collect()
}

pub fn datasets(features: &[RecordingFeatures]) -> Result<BTreeMap<FeatureKind, Dataset>> {
    FeatureKind::ALL
        .into_iter()
        .map(|k| {
            let rows = features.iter().map(|f| f.get(k).clone()).collect();
            Ok((k, Dataset::new(rows)?))
        })
        .collect()
}

/// Synthetic corpus → features → leaderboard, all in memory.
pub fn corpus_leaderboard(cfg: &PipelineConfig) -> Result<Leaderboard> {
    let items = generate_corpus(&cfg.synth, &cfg.frontend)?;
    let data = datasets(&corpus_features(&items, cfg)?)?;
    leaderboard(&data, &default_registry(), cfg.training.split, &cfg.training)
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub leaderboard: Leaderboard,
    pub report: EvalReport,
    pub model: Model,
}

/// Writes the corpus, one spectrogram set, per-kind feature CSVs, the model
/// trained on the configured feature kind and its report, and the
/// leaderboard under `out`.
pub fn run_all(cfg: &PipelineConfig, out: impl AsRef<Path>) -> Result<RunSummary> {
    cfg.validate()?;
    let out = out.as_ref();
    let corpus_dir = out.join("corpus");
    let items = generate_corpus(&cfg.synth, &cfg.frontend)?;
    write_corpus(&items, &corpus_dir)?;

    let first = &items[0];
    let power = spectrogram(&first.codes, cfg)?;
    let (enhanced, scores) = enhance_with_ssim(&power, &cfg.enhancement)?;
    let spec_dir = out.join("spectrogram");
    std::fs::create_dir_all(&spec_dir)?;
    power.save_binary(spec_dir.join(format!("{}.spg", first.source_id)))?;
    enhanced
        .coherence_weighted
        .save_binary(spec_dir.join(format!("{}_coherence.spg", first.source_id)))?;
    enhanced
        .thresholded
        .save_binary(spec_dir.join(format!("{}_threshold.spg", first.source_id)))?;
    std::fs::write(
        spec_dir.join(format!("{}_ssim.json", first.source_id)),
        serde_json::to_string_pretty(&scores)? + "\n",
    )?;

    let features = corpus_features(&items, cfg)?;
    let data = datasets(&features)?;
    let feat_dir = out.join("features");
    std::fs::create_dir_all(&feat_dir)?;
    for (kind, ds) in &data {
        save_features_csv(ds.rows(), feat_dir.join(format!("{kind}.csv")))?;
    }

    let kind = match cfg.training.algorithm {
        crate::classify::Algorithm::Tree => FeatureKind::Hjorth,
        _ => FeatureKind::Mfcc,
    };
    let (train_set, test_set) = split_dataset(&data[&kind], cfg.training.split, cfg.training.seed)?;
    let model = train(cfg.training.algorithm, &train_set, &cfg.training)?;
    let report = evaluate(&model, &test_set)?;
    model.save(out.join("model.json"))?;
    std::fs::write(
        out.join("report.json"),
        serde_json::to_string_pretty(&report)? + "\n",
    )?;

    let lb = leaderboard(&data, &default_registry(), cfg.training.split, &cfg.training)?;
    let f = std::fs::File::create(out.join("leaderboard.csv"))?;
    lb.write_csv(std::io::BufWriter::new(f))?;
    std::fs::write(out.join("leaderboard.txt"), lb.to_text())?;
    Ok(RunSummary {
        leaderboard: lb,
        report,
        model,
    })
}
