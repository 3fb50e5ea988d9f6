use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::audio::{AudioClip, AudioError};

const F1: f64 = 20.598_997;
const F2: f64 = 107.652_65;
const F3: f64 = 737.862_23;
const F4: f64 = 12_194.217;

fn a_response_raw(freq: f64) -> f64 {
    let f2 = freq * freq;
    (F4 * F4 * f2 * f2)
        / ((f2 + F1 * F1) * ((f2 + F2 * F2) * (f2 + F3 * F3)).sqrt() * (f2 + F4 * F4))
}

/// Linear magnitude of the IEC 61672 A-weighting curve, normalised to unity at 1 kHz.
pub fn a_weighting_gain(freq: f64) -> f64 {
    a_response_raw(freq.abs()) / a_response_raw(1000.0)
}

/// A-weighting in dB at `freq` Hz.
pub fn a_weighting_db(freq: f64) -> f64 {
    20.0 * a_weighting_gain(freq).log10()
}

/// Applies the A-weighting magnitude curve as a zero-phase weighting over
/// the spectrum of the whole clip. Output length equals input length.
pub fn a_weight(clip: &AudioClip) -> Result<AudioClip, AudioError> {
    clip.require_fullband()?;
    let n = clip.len();
    if n == 0 {
        return Ok(clip.clone());
    }
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);

    let mut spectrum: Vec<Complex<f64>> = clip
        .samples()
        .iter()
        .map(|&s| Complex::new(s, 0.0))
        .collect();
    forward.process(&mut spectrum);

    let bin_hz = clip.sample_rate() as f64 / n as f64;
    for (k, bin) in spectrum.iter_mut().enumerate() {
        let mirrored = k.min(n - k);
        *bin *= a_weighting_gain(mirrored as f64 * bin_hz);
    }
    inverse.process(&mut spectrum);

    let scale = 1.0 / n as f64;
    let samples = spectrum.iter().map(|c| c.re * scale).collect();
    Ok(clip.with_samples(samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, secs: f64) -> AudioClip {
        let n = (secs * 48_000.0) as usize;
        AudioClip::fullband(
            (0..n)
                .map(|i| 0.5 * (2.0 * std::f64::consts::PI * freq * i as f64 / 48_000.0).sin())
                .collect(),
        )
        .unwrap()
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn curve_reference_points() {
        // Tabulated IEC 61672 values.
        for (f, db) in [
            (100.0, -19.1),
            (1000.0, 0.0),
            (2000.0, 1.2),
            (4000.0, 1.0),
            (10_000.0, -2.5),
            (16_000.0, -6.6),
        ] {
            assert!((a_weighting_db(f) - db).abs() < 0.15, "{f} Hz: {}", a_weighting_db(f));
        }
    }

    #[test]
    fn unity_at_1khz() {
        let clip = sine(1000.0, 1.0);
        let out = a_weight(&clip).unwrap();
        let change = 20.0 * (rms(out.samples()) / rms(clip.samples())).log10();
        assert!(change.abs() < 0.2, "{change}");
    }

    #[test]
    fn attenuates_100hz() {
        let clip = sine(100.0, 1.0);
        let out = a_weight(&clip).unwrap();
        let change = 20.0 * (rms(out.samples()) / rms(clip.samples())).log10();
        assert!((change + 19.1).abs() < 1.0, "{change}");
    }

    #[test]
    fn silence_in_silence_out() {
        let clip = AudioClip::fullband(vec![0.0; 4800]).unwrap();
        let out = a_weight(&clip).unwrap();
        assert_eq!(out.len(), clip.len());
        assert!(out.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn rejects_other_rates() {
        let clip = AudioClip::new(vec![0.0; 160], 16_000).unwrap();
        assert!(matches!(a_weight(&clip), Err(AudioError::UnsupportedRate(16_000))));
    }
}
