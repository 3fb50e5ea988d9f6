//! Mono audio clips and the 16-bit PCM WAV files they are exchanged in.

use std::path::Path;

use thiserror::Error;

/// Sample rate used for every fullband reference-condition operation.
pub const FULLBAND_RATE: u32 = 48_000;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("clip is empty")]
    Empty,
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("unsupported sample rate {0} Hz (expected {FULLBAND_RATE} Hz)")]
    UnsupportedRate(u32),
    #[error("sample rate mismatch: {0} Hz vs {1} Hz")]
    RateMismatch(u32, u32),
    #[error("unsupported WAV format: {0}")]
    UnsupportedFormat(String),
    #[error("wav i/o: {0}")]
    Wav(#[from] hound::Error),
}

/// A single-channel block of samples nominally in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioClip {
    /// Builds a clip, rejecting non-finite samples.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, AudioError> {
        if let Some(idx) = samples.iter().position(|s| !s.is_finite()) {
            return Err(AudioError::NonFinite(idx));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Builds a 48 kHz clip.
    pub fn fullband(samples: Vec<f64>) -> Result<Self, AudioError> {
        Self::new(samples, FULLBAND_RATE)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn channels(&self) -> u16 {
        1
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    /// Returns a copy scaled by a linear gain.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
        }
    }

    pub(crate) fn require_fullband(&self) -> Result<(), AudioError> {
        if self.sample_rate != FULLBAND_RATE {
            return Err(AudioError::UnsupportedRate(self.sample_rate));
        }
        Ok(())
    }

    pub(crate) fn with_samples(&self, samples: Vec<f64>) -> Self {
        Self {
            samples,
            sample_rate: self.sample_rate,
        }
    }
}

/// Reads a RIFF WAV file. Only 16-bit integer PCM, mono, 48 kHz is accepted.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioClip, AudioError> {
    let mut reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(AudioError::UnsupportedFormat(format!(
            "{:?} {}-bit (expected 16-bit integer PCM)",
            spec.sample_format, spec.bits_per_sample
        )));
    }
    if spec.channels != 1 {
        return Err(AudioError::UnsupportedFormat(format!(
            "{} channels (expected mono)",
            spec.channels
        )));
    }
    if spec.sample_rate != FULLBAND_RATE {
        return Err(AudioError::UnsupportedRate(spec.sample_rate));
    }
    let samples = reader
        .samples::<i16>()
        .map(|s| s.map(|v| v as f64 / 32768.0))
        .collect::<Result<Vec<_>, _>>()?;
    AudioClip::new(samples, spec.sample_rate)
}

/// Writes a clip as 16-bit PCM mono. Samples outside the representable range
/// saturate; samples read by [`read_wav`] round-trip exactly.
pub fn write_wav(path: impl AsRef<Path>, clip: &AudioClip) -> Result<(), AudioError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate(),
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec)?;
    for &s in clip.samples() {
        writer.write_sample(to_pcm16(s))?;
    }
    writer.finalize()?;
    Ok(())
}

fn to_pcm16(sample: f64) -> i16 {
    (sample * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}
