//! Mono WAV input (16-bit PCM or 32-bit float) and float output.

use std::path::Path;

use crate::error::{Error, Result};

use super::io_error;

fn hound_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::InvalidInput(format!("{}: {other}", path.display())),
    }
}

/// Read a mono WAV file as `f32` samples in `[-1, 1]` plus its sample rate.
/// 16-bit PCM samples are scaled by `1 / 32768`; 32-bit float samples are
/// passed through. Other layouts and multi-channel files are rejected.
pub fn read_wav_mono(path: &Path) -> Result<(Vec<f32>, f64)> {
    let mut reader = hound::WavReader::open(path).map_err(|e| hound_error(path, e))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::InvalidInput(format!(
            "{}: expected mono audio, found {} channels",
            path.display(),
            spec.channels
        )));
    }
    let samples: Vec<f32> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| f32::from(v) / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| hound_error(path, e))?,
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| hound_error(path, e))?,
        (format, bits) => {
            return Err(Error::InvalidInput(format!(
                "{}: unsupported sample layout {format:?}/{bits} bits; \
                 expected 16-bit PCM or 32-bit float",
                path.display()
            )))
        }
    };
    Ok((samples, f64::from(spec.sample_rate)))
}

/// Write mono `f32` samples as a 32-bit float WAV file.
pub fn write_wav_mono(path: &Path, samples: &[f32], sample_rate_hz: u32) -> Result<()> {
    if sample_rate_hz == 0 {
        return Err(Error::InvalidInput(
            "sample rate must be positive to write a WAV file".to_string(),
        ));
    }
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: sample_rate_hz,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let file = std::fs::File::create(path).map_err(io_error(path))?;
    let mut writer =
        hound::WavWriter::new(std::io::BufWriter::new(file), spec).map_err(|e| hound_error(path, e))?;
    for &s in samples {
        writer.write_sample(s).map_err(|e| hound_error(path, e))?;
    }
    writer.finalize().map_err(|e| hound_error(path, e))
}
