use serde::{Deserialize, Serialize};

use crate::audio::AudioClip;

use super::level::{active_speech_level, rms_level};
use super::weighting::a_weight;
use super::RefcondError;

/// Peak the mixture is rescaled to when the sum would clip.
pub const CLIP_GUARD_PEAK: f64 = 0.99;

/// Result of mixing speech and noise at a target A-weighted SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub clip: AudioClip,
    /// Gain applied to the noise segment before summation.
    pub noise_gain_db: f64,
    /// Gain applied to the whole mixture (1.0 unless it would have clipped).
    pub post_mix_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrMeasurement {
    pub speech_level_db: f64,
    pub noise_level_db: f64,
}

impl SnrMeasurement {
    pub fn snr_db(&self) -> f64 {
        self.speech_level_db - self.noise_level_db
    }
}

/// A-weighted active speech level and A-weighted RMS noise level.
pub fn measure_snr_a(speech: &AudioClip, noise: &AudioClip) -> Result<SnrMeasurement, RefcondError> {
    Ok(SnrMeasurement {
        speech_level_db: active_speech_level(&a_weight(speech)?)?,
        noise_level_db: rms_level(&a_weight(noise)?)?,
    })
}

/// Adds the leading `speech.len()` samples of `noise` to `speech`, scaled so
/// that the A-weighted speech-to-noise ratio equals `snr_db_a`.
pub fn mix_at_snr(speech: &AudioClip, noise: &AudioClip, snr_db_a: f64) -> Result<Mixture, RefcondError> {
    speech.require_fullband()?;
    noise.require_fullband()?;
    if noise.len() < speech.len() {
        return Err(RefcondError::NoiseTooShort {
            noise: noise.len(),
            speech: speech.len(),
        });
    }
    let segment = noise.with_samples(noise.samples()[..speech.len()].to_vec());
    let measured = measure_snr_a(speech, &segment)?;
    let noise_gain_db = measured.speech_level_db - snr_db_a - measured.noise_level_db;
    let gain = 10f64.powf(noise_gain_db / 20.0);

    let mut mixed: Vec<f64> = speech
        .samples()
        .iter()
        .zip(segment.samples())
        .map(|(s, n)| s + gain * n)
        .collect();
    let peak = mixed.iter().fold(0.0, |m: f64, s| m.max(s.abs()));
    let post_mix_scale = if peak > 1.0 { CLIP_GUARD_PEAK / peak } else { 1.0 };
    if post_mix_scale != 1.0 {
        log::debug!("mixture peak {peak:.3} rescaled by {post_mix_scale:.4}");
        mixed.iter_mut().for_each(|s| *s *= post_mix_scale);
    }
    Ok(Mixture {
        clip: speech.with_samples(mixed),
        noise_gain_db,
        post_mix_scale,
    })
}
