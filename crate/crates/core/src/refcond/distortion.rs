//! Wiener-type spectral subtraction used to impose noise-canceller-like
//! distortion on clean speech.
//!
//! The clean input carries no noise of its own, so the suppressor is driven
//! by a synthetic noise reference: the clip's long-term average power
//! spectrum lowered by [`DistortionParams::noise_reference_db`]. Bins and
//! frames that fall below that reference are attenuated towards the gain
//! floor, which produces the weak-segment loss and musical artefacts that
//! real noise suppressors leave on speech.

use std::fmt;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::audio::AudioClip;

use super::RefcondError;

/// One of the four speech distortion levels; level 1 is the most severe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct NsLevel(u8);

impl NsLevel {
    pub const ALL: [NsLevel; 4] = [NsLevel(1), NsLevel(2), NsLevel(3), NsLevel(4)];

    pub fn new(level: u8) -> Result<Self, RefcondError> {
        if (1..=4).contains(&level) {
            Ok(Self(level))
        } else {
            Err(RefcondError::InvalidLevel(level))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for NsLevel {
    type Error = RefcondError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<NsLevel> for u8 {
    fn from(level: NsLevel) -> u8 {
        level.0
    }
}

impl fmt::Display for NsLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NS level {}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionParams {
    /// Factor applied to the noise reference before the a-posteriori SNR (>= 1).
    pub over_subtraction: f64,
    /// Lower bound of the spectral gain, in (0, 1].
    pub gain_floor: f64,
    pub frame_ms: f64,
    pub hop_ms: f64,
    /// Decision-directed weight of the previous frame's estimate, in [0, 1).
    pub smoothing: f64,
    /// Noise reference level relative to the long-term average spectrum.
    pub noise_reference_db: f64,
}

impl DistortionParams {
    const FRAME_MS: f64 = 32.0;
    const HOP_MS: f64 = 16.0;
    const SMOOTHING: f64 = 0.98;
    const NOISE_REFERENCE_DB: f64 = -15.0;

    /// Preset for a distortion level. Over-subtraction strictly decreases and
    /// the gain floor strictly increases from level 1 to level 4.
    pub fn preset(level: NsLevel) -> Self {
        let (over_subtraction, gain_floor) = match level.get() {
            1 => (6.0, 0.03),
            2 => (3.5, 0.07),
            3 => (2.0, 0.15),
            _ => (1.25, 0.30),
        };
        Self {
            over_subtraction,
            gain_floor,
            ..Self::identity()
        }
    }

    /// Parameters whose spectral gain is exactly one everywhere.
    pub fn identity() -> Self {
        Self {
            over_subtraction: 1.0,
            gain_floor: 1.0,
            frame_ms: Self::FRAME_MS,
            hop_ms: Self::HOP_MS,
            smoothing: Self::SMOOTHING,
            noise_reference_db: Self::NOISE_REFERENCE_DB,
        }
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail these checks
    pub fn validate(&self) -> Result<(), RefcondError> {
        let bad = |msg: &str| Err(RefcondError::InvalidParams(msg.to_string()));
        if !(self.over_subtraction >= 1.0) {
            return bad("over_subtraction must be >= 1");
        }
        if !(self.gain_floor > 0.0 && self.gain_floor <= 1.0) {
            return bad("gain_floor must lie in (0, 1]");
        }
        if !(self.smoothing >= 0.0 && self.smoothing < 1.0) {
            return bad("smoothing must lie in [0, 1)");
        }
        if !(self.hop_ms > 0.0 && self.frame_ms >= self.hop_ms) {
            return bad("need 0 < hop_ms <= frame_ms");
        }
        if !self.noise_reference_db.is_finite() {
            return bad("noise_reference_db must be finite");
        }
        Ok(())
    }
}

/// Applies the preset distortion for `level` to clean speech.
pub fn apply_ns_distortion(speech: &AudioClip, level: NsLevel) -> Result<AudioClip, RefcondError> {
    apply_spectral_distortion(speech, &DistortionParams::preset(level))
}

/// STFT Wiener suppression with decision-directed a-priori SNR,
/// `G = max(xi / (1 + xi), gain_floor)`, sqrt-Hann analysis and synthesis.
pub fn apply_spectral_distortion(
    speech: &AudioClip,
    params: &DistortionParams,
) -> Result<AudioClip, RefcondError> {
    params.validate()?;
    speech.require_fullband()?;
    if speech.is_empty() {
        return Ok(speech.clone());
    }
    let rate = speech.sample_rate() as f64;
    let frame = (params.frame_ms * rate / 1000.0).round() as usize;
    let hop = (params.hop_ms * rate / 1000.0).round().max(1.0) as usize;
    let window = sqrt_hann(frame);

    // Pad so every input sample is covered by the same number of frames.
    let lead = frame - hop;
    let len = speech.len();
    let n_frames = (len + lead).div_ceil(hop);
    let mut padded = vec![0.0; lead + n_frames * hop + frame];
    padded[lead..lead + len].copy_from_slice(speech.samples());

    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(frame);
    let inverse = planner.plan_fft_inverse(frame);
    let bins = frame / 2 + 1;

    let spectra: Vec<Vec<Complex<f64>>> = (0..n_frames)
        .map(|t| {
            let start = t * hop;
            let mut buf: Vec<Complex<f64>> = padded[start..start + frame]
                .iter()
                .zip(&window)
                .map(|(s, w)| Complex::new(s * w, 0.0))
                .collect();
            forward.process(&mut buf);
            buf
        })
        .collect();

    let mut noise_ref = vec![0.0; bins];
    for spec in &spectra {
        for (acc, c) in noise_ref.iter_mut().zip(spec) {
            *acc += c.norm_sqr();
        }
    }
    let ref_scale = 10f64.powf(params.noise_reference_db / 10.0) / n_frames as f64;
    if noise_ref.iter().all(|&p| p == 0.0) {
        return Ok(speech.clone());
    }
    for p in noise_ref.iter_mut() {
        *p = (*p * ref_scale * params.over_subtraction).max(f64::MIN_POSITIVE);
    }

    let mut out = vec![0.0; padded.len()];
    let mut norm = vec![0.0; padded.len()];
    let mut prev_clean_snr = vec![0.0; bins];
    let mut gains = vec![1.0; bins];
    for (t, mut spec) in spectra.into_iter().enumerate() {
        for k in 0..bins {
            let post_snr = spec[k].norm_sqr() / noise_ref[k];
            let ml = (post_snr - 1.0).max(0.0);
            let prior_snr = if t == 0 {
                ml
            } else {
                params.smoothing * prev_clean_snr[k] + (1.0 - params.smoothing) * ml
            };
            let gain = (prior_snr / (1.0 + prior_snr)).max(params.gain_floor).min(1.0);
            gains[k] = gain;
            prev_clean_snr[k] = gain * gain * post_snr;
        }
        for (k, c) in spec.iter_mut().enumerate() {
            *c *= gains[k.min(frame - k)];
        }
        inverse.process(&mut spec);

        let start = t * hop;
        let scale = 1.0 / frame as f64;
        for (i, (c, w)) in spec.iter().zip(&window).enumerate() {
            out[start + i] += c.re * scale * w;
            norm[start + i] += w * w;
        }
    }

    let samples = out[lead..lead + len]
        .iter()
        .zip(&norm[lead..lead + len])
        .map(|(s, n)| if *n > 1e-12 { s / n } else { 0.0 })
        .collect();
    Ok(speech.with_samples(samples))
}

fn sqrt_hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| {
            let phase = 2.0 * std::f64::consts::PI * n as f64 / len as f64;
            (0.5 - 0.5 * phase.cos()).sqrt()
        })
        .collect()
}
