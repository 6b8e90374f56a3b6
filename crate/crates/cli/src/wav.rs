//! Mono 48 kHz WAV input and output (PCM16 or float32).

use std::path::Path;

use crate::CliError;

pub const REQUIRED_RATE: u32 = 48_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Pcm16,
    Float32,
}

#[derive(Debug, Clone)]
pub struct Audio {
    pub samples: Vec<f32>,
    pub format: SampleFormat,
}

fn read_error(path: &Path, e: hound::Error) -> CliError {
    match e {
        hound::Error::Unsupported => CliError::Usage(format!("{}: unsupported WAV encoding", path.display())),
        e => CliError::Io(format!("cannot read {}: {e}", path.display())),
    }
}

pub fn read_wav(path: &Path) -> Result<Audio, CliError> {
    let reader = hound::WavReader::open(path).map_err(|e| read_error(path, e))?;
    let spec = reader.spec();
    if spec.sample_rate != REQUIRED_RATE {
        return Err(CliError::Usage(format!(
            "{}: sample rate is {} Hz; input must be 48 kHz ({REQUIRED_RATE} Hz), resampling is not supported",
            path.display(),
            spec.sample_rate
        )));
    }
    if spec.channels != 1 {
        return Err(CliError::Usage(format!("{}: {} channels; input must be mono", path.display(), spec.channels)));
    }
    let (samples, format) = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => (
            reader
                .into_samples::<i16>()
                .map(|s| s.map(|v| v as f32 / 32768.0))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| read_error(path, e))?,
            SampleFormat::Pcm16,
        ),
        (hound::SampleFormat::Float, 32) => (
            reader.into_samples::<f32>().collect::<Result<Vec<_>, _>>().map_err(|e| read_error(path, e))?,
            SampleFormat::Float32,
        ),
        (fmt, bits) => {
            return Err(CliError::Usage(format!(
                "{}: {bits}-bit {fmt:?} samples; only 16-bit PCM and 32-bit float are supported",
                path.display()
            )))
        }
    };
    Ok(Audio { samples, format })
}

pub fn write_wav(path: &Path, samples: &[f32], format: SampleFormat) -> Result<(), CliError> {
    let io = |e: hound::Error| CliError::Io(format!("cannot write {}: {e}", path.display()));
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: REQUIRED_RATE,
        bits_per_sample: match format {
            SampleFormat::Pcm16 => 16,
            SampleFormat::Float32 => 32,
        },
        sample_format: match format {
            SampleFormat::Pcm16 => hound::SampleFormat::Int,
            SampleFormat::Float32 => hound::SampleFormat::Float,
        },
    };
    let mut w = hound::WavWriter::create(path, spec).map_err(io)?;
    match format {
        SampleFormat::Pcm16 => {
            for &v in samples {
                w.write_sample((v * 32768.0).round().clamp(-32768.0, 32767.0) as i16).map_err(io)?;
            }
        }
        SampleFormat::Float32 => {
            for &v in samples {
                w.write_sample(v).map_err(io)?;
            }
        }
    }
    w.finalize().map_err(io)
}
