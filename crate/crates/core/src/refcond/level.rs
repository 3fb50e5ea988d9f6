use crate::audio::AudioClip;

use super::RefcondError;

/// Frame length used by the activity mask.
pub const LEVEL_FRAME_MS: f64 = 20.0;
/// Frames whose energy is within this many dB of the loudest frame count as active.
pub const ACTIVITY_RANGE_DB: f64 = 35.0;
/// Mean-square floor (dBFS) below which a clip is treated as silent.
pub const SILENCE_FLOOR_DB: f64 = -100.0;

fn power_db(mean_square: f64) -> f64 {
    10.0 * mean_square.log10()
}

/// Level (dBFS, sine peak 1.0 reads -3.01) of the speech-active part of a clip.
///
/// The clip is cut into 20 ms frames; frames with mean-square energy within
/// 35 dB of the loudest frame are active, and the level is the RMS over the
/// samples of active frames.
pub fn active_speech_level(clip: &AudioClip) -> Result<f64, RefcondError> {
    if clip.is_empty() {
        return Err(RefcondError::NoActiveSpeech);
    }
    let frame = ((LEVEL_FRAME_MS / 1000.0) * clip.sample_rate() as f64).round().max(1.0) as usize;
    let frames: Vec<(f64, usize)> = clip
        .samples()
        .chunks(frame)
        .map(|c| (c.iter().map(|s| s * s).sum::<f64>(), c.len()))
        .collect();

    let peak = frames
        .iter()
        .map(|&(energy, len)| energy / len as f64)
        .fold(0.0, f64::max);
    if peak <= 0.0 || power_db(peak) < SILENCE_FLOOR_DB {
        return Err(RefcondError::NoActiveSpeech);
    }
    let threshold = peak * 10f64.powf(-ACTIVITY_RANGE_DB / 10.0);

    let (energy, count) = frames
        .iter()
        .filter(|&&(energy, len)| energy / len as f64 >= threshold)
        .fold((0.0, 0usize), |(e, n), &(energy, len)| (e + energy, n + len));
    Ok(power_db(energy / count as f64))
}

/// Plain RMS level (dBFS) over the whole clip.
pub fn rms_level(clip: &AudioClip) -> Result<f64, RefcondError> {
    if clip.is_empty() {
        return Err(RefcondError::SilentNoise);
    }
    let ms = clip.samples().iter().map(|s| s * s).sum::<f64>() / clip.len() as f64;
    if ms <= 0.0 || power_db(ms) < SILENCE_FLOOR_DB {
        return Err(RefcondError::SilentNoise);
    }
    Ok(power_db(ms))
}
