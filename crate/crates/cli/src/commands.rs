use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use log::info;
use rumble_core::classify::{
    default_registry, evaluate as eval_model, leaderboard as rank, split_dataset, train as fit,
    Algorithm, Dataset, Model,
};
use rumble_core::dsp::{Scale, Spectrogram};
use rumble_core::features::{load_features_csv, save_features_csv, FeatureKind, Label};
use rumble_core::frontend::simulate_chain;
use rumble_core::pipeline::{self, PipelineConfig};
use rumble_core::synth::{gen_labeled_corpus, gen_rumble, read_manifest, RumbleSpec};
use rumble_core::{Error, Result, TimeSeries};

/// Prefixes I/O errors with the offending path.
fn at<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(
            io.kind(),
            format!("{}: {io}", path.display()),
        )),
        other => other,
    })
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("output")
        .to_string()
}

fn load_spectrogram(path: &Path, fallback: Option<Scale>) -> Result<Spectrogram> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    at(
        path,
        if is_csv {
            Spectrogram::load_csv(path)
        } else {
            Spectrogram::load_binary(path, fallback)
        },
    )
}

fn save_spectrogram(s: &Spectrogram, out: &Path, name: &str) -> Result<()> {
    s.save_binary(out.join(format!("{name}.spg")))?;
    s.save_csv(out.join(format!("{name}.csv")))?;
    s.save_png(out.join(format!("{name}.png")))
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Ground-velocity CSV (`time_s,ground_velocity_m_per_s`).
    input: Option<PathBuf>,
    /// Rumble spec JSON to synthesize instead of reading a file.
    #[arg(long, conflicts_with = "input")]
    spec: Option<PathBuf>,
}

pub fn simulate(a: SimulateArgs, cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let (velocity, name) = match (&a.input, &a.spec) {
        (Some(p), _) => (at(p, TimeSeries::load(p))?, stem(p)),
        (None, Some(p)) => {
            let spec: RumbleSpec = serde_json::from_str(&at(p, Ok(std::fs::read_to_string(p)?))?)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            (gen_rumble(&spec)?, stem(p))
        }
        (None, None) => {
            let spec = RumbleSpec {
                seed: cfg.synth.seed,
                sample_rate: cfg.frontend.sample_rate,
                ..Default::default()
            };
            (gen_rumble(&spec)?, "rumble".to_string())
        }
    };
    let chain = simulate_chain(&velocity, &cfg.frontend)?;
    chain.codes.save_wav(out.join(format!("{name}.wav")))?;
    chain.codes.save_csv(out.join(format!("{name}.csv")))?;
    println!(
        "simulated {} samples at {} Hz, clipped {:.3} %",
        chain.codes.len(),
        chain.codes.sample_rate(),
        chain.clipped_fraction * 100.0
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    n_rumbles: Option<usize>,
    #[arg(long)]
    n_background: Option<usize>,
    /// Rumble SNR in dB.
    #[arg(long)]
    snr_db: Option<f64>,
}

pub fn synth(a: SynthArgs, cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let mut corpus = cfg.synth.clone();
    corpus.n_rumbles = a.n_rumbles.unwrap_or(corpus.n_rumbles);
    corpus.n_background = a.n_background.unwrap_or(corpus.n_background);
    corpus.snr_db = a.snr_db.unwrap_or(corpus.snr_db);
    let dir = out.join("corpus");
    let items = gen_labeled_corpus(&corpus, &cfg.frontend, &dir)?;
    println!(
        "wrote {} recordings and {}",
        items.len(),
        dir.join("manifest.csv").display()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct SpectrogramArgs {
    /// WAV of ADC codes or a time-series CSV.
    input: PathBuf,
}

pub fn spectrogram(a: SpectrogramArgs, cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let x = at(&a.input, TimeSeries::load(&a.input))?;
    let s = pipeline::spectrogram(&x, cfg)?;
    let name = stem(&a.input);
    save_spectrogram(&s, out, &name)?;
    println!(
        "{name}: {} frames x {} bins ({} scale)",
        s.n_frames(),
        s.n_bins(),
        s.scale()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct EnhanceArgs {
    /// Power spectrogram (`.spg` with sidecar, or CSV).
    input: PathBuf,
    /// Scale to assume when a binary file has no sidecar.
    #[arg(long, value_parser = parse_scale)]
    scale: Option<Scale>,
}

fn parse_scale(s: &str) -> std::result::Result<Scale, String> {
    s.parse::<Scale>().map_err(|e| e.to_string())
}

pub fn enhance(a: EnhanceArgs, cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let s = load_spectrogram(&a.input, a.scale)?;
    let (e, scores) = pipeline::enhance_with_ssim(&s, &cfg.enhancement)?;
    let name = stem(&a.input);
    save_spectrogram(&e.coherence_weighted, out, &format!("{name}_coherence"))?;
    save_spectrogram(&e.thresholded, out, &format!("{name}_threshold"))?;
    std::fs::write(
        out.join(format!("{name}_ssim.json")),
        serde_json::to_string_pretty(&scores)? + "\n",
    )?;
    for (name, v) in [
        ("ridge only", scores.ridge_only),
        ("coherence weighted", scores.coherence_weighted),
        ("thresholded", scores.thresholded),
    ] {
        println!("SSIM vs input (dB): {name:<18} {v:.4}");
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    /// Corpus manifest; WAV paths are resolved next to it.
    #[arg(long, conflicts_with = "inputs")]
    manifest: Option<PathBuf>,
    /// Individual recordings, all given the same `--label`.
    inputs: Vec<PathBuf>,
    #[arg(long, default_value = "rumble", value_parser = parse_label)]
    label: Label,
}

fn parse_label(s: &str) -> std::result::Result<Label, String> {
    s.parse::<Label>().map_err(|e| e.to_string())
}

pub fn features(a: FeaturesArgs, cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let sources: Vec<(PathBuf, String, Label)> = match &a.manifest {
        Some(m) => {
            let base = m.parent().unwrap_or(Path::new("."));
            at(m, read_manifest(m))?
                .into_iter()
                .map(|(id, label, wav)| (base.join(wav), id, label))
                .collect()
        }
        None if a.inputs.is_empty() => {
            return Err(Error::Config("give --manifest or at least one input".into()))
        }
        None => a
            .inputs
            .iter()
            .map(|p| (p.clone(), stem(p), a.label))
            .collect(),
    };
    let mut per_kind: BTreeMap<FeatureKind, Vec<_>> = BTreeMap::new();
    for (path, id, label) in &sources {
        let codes = at(path, TimeSeries::load(path))?;
        let f = pipeline::extract_features(&codes, *label, id, cfg)?;
        for kind in FeatureKind::ALL {
            per_kind.entry(kind).or_default().push(f.get(kind).clone());
        }
        info!("features for {id}");
    }
    for (kind, rows) in &per_kind {
        let path = out.join(format!("{kind}.csv"));
        save_features_csv(rows, &path)?;
        println!("{}: {} rows", path.display(), rows.len());
    }
    Ok(())
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    Dataset::new(at(path, load_features_csv(path))?)
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Feature CSV of one kind.
    features: PathBuf,
    /// Overrides the configured algorithm.
    #[arg(long)]
    algorithm: Option<String>,
    /// Train on every row instead of the configured split's training part.
    #[arg(long)]
    all: bool,
}

pub fn train(a: TrainArgs, cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let data = load_dataset(&a.features)?;
    let algorithm = match &a.algorithm {
        Some(s) => s.parse::<Algorithm>()?,
        None => cfg.training.algorithm,
    };
    let train_set = if a.all {
        data
    } else {
        split_dataset(&data, cfg.training.split, cfg.training.seed)?.0
    };
    let model = fit(algorithm, &train_set, &cfg.training)?;
    let path = out.join("model.json");
    model.save(&path)?;
    println!(
        "trained {algorithm} on {} rows; wrote {}",
        train_set.len(),
        path.display()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    /// Feature CSV of the kind the model was trained on.
    features: PathBuf,
    /// Evaluate on every row instead of the configured split's test part.
    #[arg(long)]
    all: bool,
}

pub fn evaluate(a: EvaluateArgs, cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let model = at(&a.model, Model::load(&a.model))?;
    let data = load_dataset(&a.features)?;
    let test = if a.all {
        data
    } else {
        split_dataset(&data, cfg.training.split, cfg.training.seed)?.1
    };
    let report = eval_model(&model, &test)?;
    std::fs::write(
        out.join("report.json"),
        serde_json::to_string_pretty(&report)? + "\n",
    )?;
    let cell = rumble_core::classify::metrics::fmt_metric;
    println!(
        "{} on {} rows (synthetic): TP {} FP {} TN {} FN {}",
        model.algorithm(),
        report.total(),
        report.tp,
        report.fp,
        report.tn,
        report.fn_
    );
    println!(
        "accuracy {}  BA {}  F1 {}  sensitivity {}  specificity {}  precision {}",
        cell(report.accuracy),
        cell(report.balanced_accuracy),
        cell(report.f1),
        cell(report.sensitivity),
        cell(report.specificity),
        cell(report.precision)
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct LeaderboardArgs {
    /// Directory holding `mfcc.csv`, `hjorth.csv` and/or `sed.csv`.
    dir: PathBuf,
}

pub fn leaderboard(a: LeaderboardArgs, cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let mut data = BTreeMap::new();
    for kind in FeatureKind::ALL {
        let path = a.dir.join(format!("{kind}.csv"));
        if path.exists() {
            data.insert(kind, load_dataset(&path)?);
        }
    }
    if data.is_empty() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("no feature CSVs in {}", a.dir.display()),
        )));
    }
    let lb = rank(&data, &default_registry(), cfg.training.split, &cfg.training)?;
    let f = std::fs::File::create(out.join("leaderboard.csv"))?;
    lb.write_csv(std::io::BufWriter::new(f))?;
    let text = lb.to_text();
    std::fs::write(out.join("leaderboard.txt"), &text)?;
    print!("{text}");
    Ok(())
}

#[derive(Debug, Args)]
pub struct SsimArgs {
    a: PathBuf,
    b: PathBuf,
    /// Scale to assume for binary files without a sidecar.
    #[arg(long, value_parser = parse_scale)]
    scale: Option<Scale>,
}

pub fn ssim(a: SsimArgs) -> Result<()> {
    let x = load_spectrogram(&a.a, a.scale)?;
    let y = load_spectrogram(&a.b, a.scale)?;
    println!("{:?}", rumble_core::enhancement::ssim(&x, &y)?);
    Ok(())
}

pub fn run_all(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let summary = pipeline::run_all(cfg, out)?;
    print!("{}", summary.leaderboard.to_text());
    println!(
        "{} report accuracy {}",
        summary.model.algorithm(),
        rumble_core::classify::metrics::fmt_metric(summary.report.accuracy)
    );
    Ok(())
}
