#![allow(dead_code)]

pub mod screening;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use sqeval::AudioClip;

pub const RATE: f64 = 48_000.0;

/// Deterministic speech-like signal: voiced syllables with a gliding pitch
/// and formant-shaped harmonics, occasional fricative bursts, pauses, and
/// silent lead-in/out.
pub fn speech_fixture(seed: u64, secs: f64) -> AudioClip {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (secs * RATE) as usize;
    let mut out = vec![0.0; n];
    let formants: [(f64, f64); 3] = [
        (rng.gen_range(450.0..750.0), 90.0),
        (rng.gen_range(1100.0..1900.0), 120.0),
        (rng.gen_range(2300.0..3000.0), 180.0),
    ];
    let base_f0 = rng.gen_range(100.0..210.0);
    let mut t = 0.4;
    while t < secs - 0.6 {
        let dur = rng.gen_range(0.12..0.32);
        let start = (t * RATE) as usize;
        let len = ((dur * RATE) as usize).min(n - start);
        let amp = rng.gen_range(0.05..0.3);
        if rng.gen_bool(0.2) {
            // fricative: high-passed noise
            let mut prev = 0.0;
            for i in 0..len {
                let env = (PI * i as f64 / len as f64).sin();
                let w: f64 = rng.gen_range(-1.0..1.0);
                out[start + i] += 0.3 * amp * env * (w - prev);
                prev = w;
            }
        } else {
            let f0_start = base_f0 * rng.gen_range(0.85..1.15);
            let f0_end = base_f0 * rng.gen_range(0.8..1.2);
            let mut phase = 0.0;
            for i in 0..len {
                let frac = i as f64 / len as f64;
                let f0 = f0_start + (f0_end - f0_start) * frac;
                phase += 2.0 * PI * f0 / RATE;
                let env = (PI * frac).sin().powf(0.7);
                let mut s = 0.0;
                let mut h = 1;
                while h as f64 * f0 < 8000.0 {
                    let f = h as f64 * f0;
                    let gain: f64 = formants
                        .iter()
                        .map(|&(fc, bw)| 1.0 / (1.0 + ((f - fc) / bw).powi(2)))
                        .sum::<f64>()
                        + 0.02;
                    s += gain * (h as f64 * phase).sin() / (h as f64).sqrt();
                    h += 1;
                }
                out[start + i] += amp * env * s * 0.5;
            }
        }
        t += dur + if rng.gen_bool(0.15) { rng.gen_range(0.3..0.6) } else { rng.gen_range(0.03..0.15) };
    }
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.9 {
        out.iter_mut().for_each(|v| *v *= 0.9 / peak);
    }
    AudioClip::fullband(out).unwrap()
}

/// Low-passed, slowly modulated noise, loosely like a babble/car background.
pub fn noise_fixture(seed: u64, secs: f64) -> AudioClip {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5);
    let n = (secs * RATE) as usize;
    let (mut lp1, mut lp2) = (0.0, 0.0);
    let samples = (0..n)
        .map(|i| {
            let w: f64 = rng.gen_range(-1.0..1.0);
            lp1 += 0.15 * (w - lp1);
            lp2 += 0.02 * (w - lp2);
            let m = 1.0 + 0.3 * (2.0 * PI * 0.7 * i as f64 / RATE).sin();
            0.1 * m * (lp1 + 2.0 * lp2 + 0.05 * w)
        })
        .collect();
    AudioClip::fullband(samples).unwrap()
}

/// Mean frame-wise log-spectral distance (dB) of `processed` against
/// `clean`, over frames where the clean signal is within 40 dB of its
/// loudest frame. Hann frames of 1024 samples, hop 512.
pub fn log_spectral_distance(clean: &AudioClip, processed: &AudioClip) -> f64 {
    assert_eq!(clean.len(), processed.len());
    let frame = 1024;
    let hop = 512;
    let window: Vec<f64> = (0..frame)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (frame - 1) as f64).cos())
        .collect();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(frame);
    let power = |x: &[f64], start: usize| -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> =
            (0..frame).map(|i| Complex::new(x[start + i] * window[i], 0.0)).collect();
        fft.process(&mut buf);
        buf[..frame / 2 + 1].iter().map(|c| c.norm_sqr()).collect()
    };
    let starts: Vec<usize> = (0..)
        .map(|k| k * hop)
        .take_while(|s| s + frame <= clean.len())
        .collect();
    let energies: Vec<f64> = starts
        .iter()
        .map(|&s| clean.samples()[s..s + frame].iter().map(|v| v * v).sum())
        .collect();
    let max_e = energies.iter().cloned().fold(0.0, f64::max);
    let eps = 1e-10;
    let mut total = 0.0;
    let mut count = 0;
    for (&s, &e) in starts.iter().zip(&energies) {
        if e < max_e * 1e-4 {
            continue;
        }
        let pc = power(clean.samples(), s);
        let pp = power(processed.samples(), s);
        let mean_sq = pc
            .iter()
            .zip(&pp)
            .map(|(a, b)| (10.0 * ((a + eps) / (b + eps)).log10()).powi(2))
            .sum::<f64>()
            / pc.len() as f64;
        total += mean_sq.sqrt();
        count += 1;
    }
    total / count as f64
}

/// A-weighted RMS level computed without the library: magnitude weighting
/// applied to a direct power-spectrum sum (Parseval).
pub fn a_weighted_rms_db(x: &[f64]) -> f64 {
    let n = x.len();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft.process(&mut buf);
    let ra = |f: f64| {
        let f2 = f * f;
        (12194.217f64.powi(2) * f2 * f2)
            / ((f2 + 20.598997f64.powi(2))
                * ((f2 + 107.65265f64.powi(2)) * (f2 + 737.86223f64.powi(2))).sqrt()
                * (f2 + 12194.217f64.powi(2)))
    };
    let norm = ra(1000.0);
    let energy: f64 = buf
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let f = k.min(n - k) as f64 * RATE / n as f64;
            c.norm_sqr() * (ra(f) / norm).powi(2)
        })
        .sum::<f64>()
        / n as f64;
    10.0 * (energy / n as f64).log10()
}

/// Challenge results: (team, BAK, SIG, OVRL MOS, BAK, SIG, OVRL DMOS).
pub const CHALLENGE_TABLE: [(&str, f64, f64, f64, f64, f64, f64); 20] = [
    ("36", 4.66, 3.90, 3.78, 2.05, 0.01, 1.01),
    ("33", 4.48, 3.77, 3.58, 1.87, -0.12, 0.81),
    ("13", 4.35, 3.76, 3.58, 1.74, -0.13, 0.80),
    ("34", 4.29, 3.72, 3.51, 1.68, -0.17, 0.74),
    ("19", 4.13, 3.74, 3.48, 1.52, -0.15, 0.71),
    ("18", 4.52, 3.50, 3.42, 1.91, -0.39, 0.64),
    ("16", 3.76, 3.79, 3.37, 1.16, -0.10, 0.60),
    ("8", 4.20, 3.37, 3.20, 1.59, -0.52, 0.42),
    ("22", 4.34, 3.27, 3.16, 1.73, -0.62, 0.39),
    ("20", 3.89, 3.44, 3.15, 1.28, -0.45, 0.38),
    ("31", 3.73, 3.36, 3.09, 1.12, -0.53, 0.32),
    ("baseline", 3.89, 3.36, 3.07, 1.28, -0.54, 0.30),
    ("12", 4.07, 3.20, 3.03, 1.47, -0.69, 0.25),
    ("30", 3.46, 3.46, 2.99, 0.85, -0.43, 0.22),
    ("37", 4.18, 3.11, 2.96, 1.58, -0.78, 0.19),
    ("11", 3.81, 3.13, 2.91, 1.20, -0.76, 0.14),
    ("38", 2.59, 3.92, 2.78, -0.02, 0.03, 0.01),
    ("noisy", 2.61, 3.89, 2.77, 0.00, 0.00, 0.00),
    ("28", 3.60, 2.86, 2.64, 1.00, -1.03, -0.13),
    ("4", 2.84, 3.28, 2.62, 0.23, -0.61, -0.15),
];

pub fn challenge_scores() -> Vec<sqeval::stats::ConditionScore> {
    CHALLENGE_TABLE
        .iter()
        .map(|&(id, bak, sig, ovrl, ..)| sqeval::stats::ConditionScore::from_mos(id, sig, bak, ovrl))
        .collect()
}

/// Least squares via the normal equations `(X'X) b = X'y`, optionally
/// weighted, solved by Gaussian elimination with partial pivoting.
pub fn normal_equations_ols(rows: &[(f64, f64, f64)], weights: Option<&[f64]>) -> [f64; 3] {
    let mut a = [[0.0f64; 4]; 3];
    for (i, &(sig, bak, ovrl)) in rows.iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        let x = [1.0, sig, bak];
        for r in 0..3 {
            for c in 0..3 {
                a[r][c] += w * x[r] * x[c];
            }
            a[r][3] += w * x[r] * ovrl;
        }
    }
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        for r in 0..3 {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..4 {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    [a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]]
}

/// Spearman by brute force: rank = (#smaller) + (#equal + 1) / 2, then the
/// textbook covariance / (sd * sd) on ranks.
pub fn brute_spearman(x: &[f64], y: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|a| {
                let less = v.iter().filter(|b| *b < a).count() as f64;
                let equal = v.iter().filter(|b| *b == a).count() as f64;
                less + (equal + 1.0) / 2.0
            })
            .collect()
    };
    brute_pearson(&rank(x), &rank(y))
}

/// Pearson from raw sums.
pub fn brute_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

pub fn brute_rmse(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..x.len() {
        acc += (x[i] - y[i]) * (x[i] - y[i]);
    }
    (acc / x.len() as f64).sqrt()
}
