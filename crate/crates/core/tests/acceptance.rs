//! One test per acceptance criterion. Each prints a single PASS/FAIL line
//! before asserting, so `cargo test --test acceptance -- --nocapture`
//! doubles as a report.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use rumble_core::classify::linear::{logistic_loss_and_grad, ridge_solve};
use rumble_core::classify::{evaluate, train, Algorithm, Dataset, TrainingConfig};
use rumble_core::dsp::wavelet::{decompose, denoise, reconstruct};
use rumble_core::dsp::{dft, to_decibel, Scale, Spectrogram};
use rumble_core::enhancement::tensor::{coherence, eigen_2x2, structure_tensor_matrix, tensor_eigenvalues};
use rumble_core::enhancement::{ssim_matrix, threshold_adjust, COHERENCE_EPS};
use rumble_core::features::hjorth::mobility;
use rumble_core::features::{build_mel_filterbank, mfcc, spectral_energy_distribution};
use rumble_core::frontend::{adc_sensitivity, design_butterworth_bandpass, simulate_chain};
use rumble_core::pipeline::{self, corpus_leaderboard, enhance_with_ssim, run_all, DB_FLOOR};
use rumble_core::synth::{contour_at, gen_rumble};
use rumble_core::{FeatureKind, FrontEndConfig, Label, PipelineConfig, TimeSeries, Unit};

// written straight to stdout so the line shows without --nocapture
fn report(n: u32, ok: bool, detail: String) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stdout(), "criterion {n:>2}: {verdict} ({detail})");
    assert!(ok, "criterion {n} failed: {detail}");
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

#[test]
fn criterion_01_bandpass_response() {
    let start = Instant::now();
    let cfg = FrontEndConfig::default();
    let sos = design_butterworth_bandpass(3, 5.0, 150.0, cfg.sample_rate).unwrap();
    let at_lo = sos.magnitude_db(5.0, cfg.sample_rate);
    let at_hi = sos.magnitude_db(150.0, cfg.sample_rate);
    let band: Vec<f64> = (0..=160)
        .map(|i| sos.magnitude_db(20.0 + 0.5 * i as f64, cfg.sample_rate))
        .collect();
    let ripple = band.iter().cloned().fold(f64::MIN, f64::max)
        - band.iter().cloned().fold(f64::MAX, f64::min);
    // one minute of noise through the whole chain
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let v: Vec<f64> = (0..60 * 475).map(|_| rng.random_range(-1e-6..1e-6)).collect();
    let x = TimeSeries::new(v, cfg.sample_rate, Unit::GroundVelocityMPerS).unwrap();
    simulate_chain(&x, &cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ok = (at_lo + 3.0).abs() <= 0.5 && (at_hi + 3.0).abs() <= 0.5 && ripple <= 0.1 && secs < 1.0;
    report(
        1,
        ok,
        format!("5 Hz {at_lo:.3} dB, 150 Hz {at_hi:.3} dB, ripple 20-100 Hz {ripple:.2e} dB, {secs:.3} s"),
    );
}

#[test]
fn criterion_02_adc_sensitivity() {
    let micro = adc_sensitivity(&FrontEndConfig::default()) * 1e6;
    // three decimals as printed, i.e. truncated
    let shown = (micro * 1000.0).floor() / 1000.0;
    report(2, shown == 50.354, format!("{micro:.6} uV"));
}

#[test]
fn criterion_03_parseval() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=512);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let time: f64 = x.iter().map(|v| v * v).sum();
        let freq: f64 = dft(&x).iter().map(|c| c.norm_sqr()).sum::<f64>() / n as f64;
        worst = worst.max(rel_err(time, freq));
    }
    report(3, worst < 1e-9, format!("worst relative error {worst:.2e} over 1000 frames"));
}

#[test]
fn criterion_04_wavelet() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(64..=4096);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y = reconstruct(&decompose(&x, 3).unwrap()).unwrap();
        let num: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
        let den: f64 = x.iter().map(|a| a * a).sum();
        worst = worst.max((num / den).sqrt());
    }

    let snr = |clean: &[f64], x: &[f64]| {
        let s: f64 = clean.iter().map(|v| v * v).sum();
        let e: f64 = clean.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum();
        10.0 * (s / e).log10()
    };
    let noise = Normal::new(0.0, 0.5f64.sqrt()).unwrap();
    let trial = |f: f64, rng: &mut ChaCha8Rng| {
        let phase = rng.random_range(0.0..2.0 * PI);
        let clean: Vec<f64> = (0..1900)
            .map(|i| (2.0 * PI * f * i as f64 / 475.0 + phase).sin())
            .collect();
        // tone power 1/2 against noise variance 1/2
        let noisy: Vec<f64> = clean.iter().map(|c| c + noise.sample(rng)).collect();
        let den = denoise(&noisy, 3).unwrap();
        snr(&clean, &den) > snr(&clean, &noisy)
    };
    // tones at rumble fundamentals
    let improved = (0..20)
        .filter(|_| {
            let f = rng.random_range(16.0..24.0);
            trial(f, &mut rng)
        })
        .count();
    // above the approximation band the shrinkage removes tone energy too
    let sweep: Vec<bool> = (0..20).map(|k| trial(5.0 + 7.0 * k as f64, &mut rng)).collect();
    let swept = sweep.iter().filter(|&&b| b).count();
    report(
        4,
        worst < 1e-9 && improved >= 19,
        format!(
            "round-trip worst {worst:.2e}, denoising improved {improved}/20 at 16-24 Hz, {swept}/20 on a 5-138 Hz sweep"
        ),
    );
}

#[test]
fn criterion_05_structure_tensor() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_tr: f64 = 0.0;
    let mut worst_det: f64 = 0.0;
    for _ in 0..10_000 {
        let (a, d, b) = (
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
        );
        let (l1, l2) = eigen_2x2(a, d, b);
        let scale = 1.0 + a.abs() + d.abs() + b.abs();
        worst_tr = worst_tr.max((l1 + l2 - (a + d)).abs() / scale);
        worst_det = worst_det.max((l1 * l2 - (a * d - b * b)).abs() / (scale * scale));
    }

    let img = Array2::from_shape_fn((100, 1000), |_| rng.random_range(-5.0..5.0));
    let (l1, l2) = tensor_eigenvalues(&structure_tensor_matrix(&img, 1.5).unwrap());
    let c = coherence(&l1, &l2, COHERENCE_EPS).c;
    let in_range = c.iter().all(|v| (0.0..=1.0).contains(v));

    // a step along the frequency axis: only one gradient direction
    let edge = Array2::from_shape_fn((9, 9), |(_, j)| if j < 4 { 0.0 } else { 1.0 });
    let (e1, e2) = tensor_eigenvalues(&structure_tensor_matrix(&edge, 1.0).unwrap());
    let ce = coherence(&e1, &e2, COHERENCE_EPS).c;
    let edge_ok = ce[[4, 4]] == 1.0;
    let (i1, i2) = eigen_2x2(2.5, 2.5, 0.0);
    let iso = coherence(
        &Array2::from_elem((1, 1), i1),
        &Array2::from_elem((1, 1), i2),
        COHERENCE_EPS,
    )
    .c[[0, 0]];
    let flat = Array2::from_elem((8, 8), 3.0);
    let (h1, h2) = tensor_eigenvalues(&structure_tensor_matrix(&flat, 1.5).unwrap());
    let homo = coherence(&h1, &h2, COHERENCE_EPS).c;
    let regimes = edge_ok && iso == 0.0 && homo.iter().all(|&v| v == 0.0);

    report(
        5,
        worst_tr < 1e-9 && worst_det < 1e-9 && in_range && regimes,
        format!(
            "trace {worst_tr:.1e}, det {worst_det:.1e}, {} coherences in [0,1]: {in_range}, edge/isotropic/homogeneous: {regimes}",
            c.len()
        ),
    );
}

#[test]
fn criterion_06_threshold_golden() {
    let m = Array2::from_shape_vec((2, 2), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    let out: Vec<f64> = threshold_adjust(&m, &[5.0, 2.0, -2.0, -5.0])
        .unwrap()
        .into_iter()
        .collect();
    report(6, out == vec![-4.0, 0.0, 5.0, 9.0], format!("{out:?}"));
}

#[test]
fn criterion_07_ssim() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let s = |x: &Array2<f64>, y: &Array2<f64>| ssim_matrix(x, y, 0.01, 0.03).unwrap();
    let (mut ident, mut symm, mut scale_err, mut shift_err): (f64, f64, f64, f64) =
        (0.0, 0.0, 0.0, 0.0);
    for _ in 0..200 {
        let x = Array2::from_shape_fn((16, 24), |_| rng.random_range(-3.0..3.0));
        let y = &x + &Array2::from_shape_fn((16, 24), |_| rng.random_range(-1.0..1.0));
        let base = s(&x, &y);
        ident = ident.max((s(&x, &x) - 1.0).abs());
        symm = symm.max((base - s(&y, &x)).abs());
        let a = rng.random_range(0.1..10.0);
        let b = rng.random_range(-20.0..20.0);
        scale_err = scale_err.max((s(&(&x * a), &(&y * a)) - base).abs());
        shift_err = shift_err.max((s(&(&x * a + b), &(&y * a + b)) - base).abs());
    }
    let gx = Array2::from_shape_fn((4, 4), |(i, j)| (4 * i + j + 1) as f64);
    let gy = Array2::from_shape_vec(
        (4, 4),
        vec![2., 1., 4., 3., 6., 5., 8., 9., 9., 12., 10., 11., 16., 13., 15., 14.],
    )
    .unwrap();
    let golden = (s(&gx, &gy) - 2189623152.0 / 2282882777.0).abs();
    report(
        7,
        ident < 1e-12 && symm < 1e-9 && scale_err < 1e-9 && shift_err < 1e-9 && golden < 1e-9,
        format!(
            "identity {ident:.1e}, symmetry {symm:.1e}, joint scaling {scale_err:.1e}, joint affine with shift {shift_err:.1e}, golden {golden:.1e}"
        ),
    );
}

/// Mean dB on the harmonic tracks minus mean dB elsewhere in 5-150 Hz.
fn contour_contrast(db: &Spectrogram, f0: &dyn Fn(f64) -> f64, n_harmonics: usize) -> f64 {
    let freqs = db.bin_freqs();
    let df = freqs[1] - freqs[0];
    let (mut on, mut n_on, mut off, mut n_off) = (0.0, 0, 0.0, 0);
    for (j, &t) in db.frame_times().iter().enumerate() {
        let tracks: Vec<f64> = (1..=n_harmonics).map(|h| h as f64 * f0(t)).collect();
        for (k, &f) in freqs.iter().enumerate() {
            if !(5.0..=150.0).contains(&f) {
                continue;
            }
            let dist = tracks.iter().map(|h| (h - f).abs()).fold(f64::MAX, f64::min);
            let v = db.values()[[j, k]];
            if dist <= 0.5 * df {
                on += v;
                n_on += 1;
            } else if dist > 2.0 * df {
                off += v;
                n_off += 1;
            }
        }
    }
    on / n_on as f64 - off / n_off as f64
}

#[test]
fn criterion_08_enhancement_direction() {
    let cfg = PipelineConfig::default();
    let fs = cfg.frontend.sample_rate;
    let (mut ssim_drops, mut contrast_up) = (0, 0);
    let mut lines = Vec::new();
    for i in 0..10 {
        let spec = cfg.synth.rumble_spec(i, fs);
        let codes = simulate_chain(&gen_rumble(&spec).unwrap(), &cfg.frontend)
            .unwrap()
            .codes;
        let power = pipeline::spectrogram(&codes, &cfg).unwrap();
        let (e, scores) = enhance_with_ssim(&power, &cfg.enhancement).unwrap();
        if scores.thresholded < scores.ridge_only {
            ssim_drops += 1;
        }
        let f0 = |t: f64| spec.fundamental + contour_at(&spec.freq_contour, t);
        let before = contour_contrast(&to_decibel(&power, DB_FLOOR).unwrap(), &f0, spec.n_harmonics);
        let after = contour_contrast(&e.coherence_weighted, &f0, spec.n_harmonics);
        if after > before {
            contrast_up += 1;
        }
        lines.push(format!(
            "#{i} ssim ridge {:.3} final {:.3} contrast {before:.1}->{after:.1}",
            scores.ridge_only, scores.thresholded
        ));
    }
    for l in &lines {
        println!("    {l}");
    }
    report(
        8,
        ssim_drops >= 9 && contrast_up == 10,
        format!("ssim lower in {ssim_drops}/10, contrast higher in {contrast_up}/10"),
    );
}

/// Straight transcription of the MFCC definition with nested loops.
fn mfcc_oracle(frame: &[f64], n_fft: usize, fs: f64, m_count: usize, c_count: usize) -> Vec<f64> {
    let len = frame.len();
    let mut padded = vec![0.0; n_fft];
    for i in 0..len {
        let w = if len == 1 {
            1.0
        } else {
            0.54 - 0.46 * (2.0 * PI * i as f64 / (len - 1) as f64).cos()
        };
        padded[i] = frame[i] * w;
    }
    let mut power = vec![0.0; n_fft];
    for k in 0..n_fft {
        let (mut re, mut im) = (0.0, 0.0);
        for (n, x) in padded.iter().enumerate() {
            let ang = -2.0 * PI * (k * n) as f64 / n_fft as f64;
            re += x * ang.cos();
            im += x * ang.sin();
        }
        power[k] = re * re + im * im;
    }
    let mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
    let hz = |m: f64| 700.0 * (10f64.powf(m / 2595.0) - 1.0);
    let (m_lo, m_hi) = (mel(5.0), mel(150.0));
    let points: Vec<f64> = (0..m_count + 2)
        .map(|i| hz(m_lo + (m_hi - m_lo) * i as f64 / (m_count + 1) as f64) * n_fft as f64 / fs)
        .collect();
    let mut logs = vec![0.0; m_count];
    for m in 0..m_count {
        let (lo, mid, hi) = (points[m], points[m + 1], points[m + 2]);
        let mut s = 0.0;
        for k in 0..n_fft {
            let kf = k as f64;
            let h = if kf < lo || kf > hi {
                0.0
            } else if kf <= mid {
                2.0 * (kf - lo) / (mid - lo)
            } else {
                2.0 * (hi - kf) / (hi - mid)
            };
            s += h * power[k];
        }
        logs[m] = (s + 1e-10).log10();
    }
    (0..c_count)
        .map(|n| {
            let mut c = 0.0;
            for m in 1..=m_count {
                c += logs[m - 1] * (PI * n as f64 * (m as f64 - 0.5) / m_count as f64).cos();
            }
            c
        })
        .collect()
}

#[test]
fn criterion_09_features() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (fs, n_fft) = (475.0, 64);
    let fb = build_mel_filterbank(20, n_fft, fs, 5.0, 150.0).unwrap();
    let mut mfcc_worst: f64 = 0.0;
    for _ in 0..50 {
        let len = rng.random_range(2..=n_fft);
        let frame: Vec<f64> = (0..len).map(|_| rng.random_range(-2000.0..2000.0)).collect();
        let got = mfcc(&frame, &fb, 12).unwrap();
        let want = mfcc_oracle(&frame, n_fft, fs, 20, 12);
        for (g, w) in got.iter().zip(&want) {
            mfcc_worst = mfcc_worst.max((g - w).abs() / w.abs().max(1.0));
        }
    }

    let mut mob_worst: f64 = 0.0;
    for f in [5.0, 20.0, 47.5, 100.0, 150.0] {
        let x: Vec<f64> = (0..10_000)
            .map(|i| (2.0 * PI * f * i as f64 / fs + 0.3).sin())
            .collect();
        let expect = 2.0 * (PI * f / fs).sin();
        mob_worst = mob_worst.max(rel_err(mobility(&x).unwrap(), expect));
    }

    let mut sed_worst: f64 = 0.0;
    for _ in 0..20 {
        let bins = rng.random_range(25..=300);
        let m = Array2::from_shape_fn((rng.random_range(1..40), bins), |_| rng.random_range(0.0..1e3));
        let s = Spectrogram::from_matrix(m.clone(), Scale::Power).unwrap();
        let total: f64 = m.iter().map(|v| v * v).sum();
        let parts: f64 = spectral_energy_distribution(&s, 25).unwrap().iter().sum();
        sed_worst = sed_worst.max(rel_err(total, parts));
    }

    report(
        9,
        mfcc_worst < 1e-9 && mob_worst < 0.01 && sed_worst < 1e-12,
        format!("mfcc {mfcc_worst:.1e}, hjorth mobility {:.3} %, sed partition {sed_worst:.1e}", mob_worst * 100.0),
    );
}

fn xor_dataset() -> Dataset {
    let pts = [(0.0, 0.0, Label::Background), (1.0, 1.0, Label::Background), (0.0, 1.0, Label::Rumble), (1.0, 0.0, Label::Rumble)];
    let (x, y): (Vec<_>, Vec<_>) = pts.iter().map(|&(a, b, l)| (vec![a, b], l)).unzip();
    Dataset::from_parts(FeatureKind::Mfcc, x, y).unwrap()
}

#[test]
fn criterion_10_classifiers() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (n, d, alpha) = (60, 5, 0.7);
    let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-2.0..2.0));
    let y: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
    let (w, b) = ridge_solve(&x, &y, alpha).unwrap();
    let a = DMatrix::from_fn(n, d + 1, |i, j| if j < d { x[[i, j]] } else { 1.0 });
    let mut lhs = a.transpose() * &a;
    for j in 0..d {
        lhs[(j, j)] += alpha;
    }
    let theta = lhs.lu().solve(&(a.transpose() * DVector::from_vec(y.clone()))).unwrap();
    let ridge_err = w
        .iter()
        .chain([&b])
        .zip(theta.iter())
        .map(|(g, o)| (g - o).abs())
        .fold(0.0, f64::max);

    let params: Vec<f64> = (0..=d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (_, grad) = logistic_loss_and_grad(&x, &y, &params);
    let h = 1e-5;
    let mut grad_err: f64 = 0.0;
    for j in 0..=d {
        let mut up = params.clone();
        let mut dn = params.clone();
        up[j] += h;
        dn[j] -= h;
        let fd = (logistic_loss_and_grad(&x, &y, &up).0 - logistic_loss_and_grad(&x, &y, &dn).0) / (2.0 * h);
        grad_err = grad_err.max((fd - grad[j]).abs());
    }

    // every sign pattern a line can cut from the four XOR corners
    let xor = xor_dataset();
    let mut best_linear: f64 = 0.0;
    for ia in 0..72 {
        let ang = 2.0 * PI * ia as f64 / 72.0;
        for ib in -40..=40 {
            let off = ib as f64 * 0.05;
            let correct = xor
                .rows()
                .iter()
                .filter(|r| {
                    let f = ang.cos() * r.values[0] + ang.sin() * r.values[1] + off;
                    Label::from_sign(f) == r.label
                })
                .count();
            best_linear = best_linear.max(correct as f64 / 4.0);
        }
    }
    let cfg = TrainingConfig::default();
    let acc = |alg| evaluate(&train(alg, &xor, &cfg).unwrap(), &xor).unwrap().accuracy.unwrap();
    let tree = acc(Algorithm::Tree);
    let linear: Vec<f64> = [Algorithm::Ridge, Algorithm::SvmLinear, Algorithm::Logistic]
        .into_iter()
        .map(acc)
        .collect();
    let ok = ridge_err < 1e-8
        && grad_err < 1e-6
        && tree == 1.0
        && best_linear <= 0.75
        && linear.iter().all(|&a| a <= 0.75);
    report(
        10,
        ok,
        format!("ridge {ridge_err:.1e}, gradient {grad_err:.1e}, xor tree {tree}, linear {linear:?}, enumerated max {best_linear}"),
    );
}

#[test]
fn criterion_11_pipeline_ordering() {
    let start = Instant::now();
    let lb = corpus_leaderboard(&PipelineConfig::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let acc = |r: Option<&rumble_core::classify::LeaderboardRow>| {
        r.and_then(|r| r.report.accuracy).unwrap_or(f64::NAN)
    };
    let ridge = acc(lb.get(FeatureKind::Mfcc, Algorithm::Ridge));
    let best_mfcc = acc(lb.best_for(FeatureKind::Mfcc));
    let best_sed = acc(lb.best_for(FeatureKind::Sed));
    let top_is_ridge = lb.rows.first().map(|r| (r.feature, r.algorithm))
        == Some((FeatureKind::Mfcc, Algorithm::Ridge));
    print!("{}", lb.to_text());
    report(
        11,
        ridge >= 0.9 && best_mfcc > best_sed && secs < 60.0,
        format!(
            "mfcc+ridge {ridge:.4} (ranked first: {top_is_ridge}), best mfcc {best_mfcc:.4} vs best sed {best_sed:.4}, {secs:.1} s"
        ),
    );
}

fn files_under(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(files_under(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

#[test]
fn criterion_12_determinism() {
    let cfg = PipelineConfig::default().with_seed(42);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_all(&cfg, a.path()).unwrap();
    run_all(&cfg, b.path()).unwrap();
    let fa = files_under(a.path());
    let fb = files_under(b.path());
    let same_names = fa.iter().map(|p| p.strip_prefix(a.path()).unwrap()).eq(fb
        .iter()
        .map(|p| p.strip_prefix(b.path()).unwrap()));
    let differing: Vec<_> = fa
        .iter()
        .zip(&fb)
        .filter(|(x, y)| std::fs::read(x).unwrap() != std::fs::read(y).unwrap())
        .map(|(x, _)| x.strip_prefix(a.path()).unwrap().display().to_string())
        .collect();
    report(
        12,
        same_names && differing.is_empty(),
        format!("{} files compared, differing {differing:?}", fa.len()),
    );
}
