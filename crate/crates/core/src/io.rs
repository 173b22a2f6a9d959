//! WAV audio and per-image debug tables.

use crate::error::{Error, Result};
use crate::synth::DelayStreams;
use std::fmt::Write as _;
use std::path::Path;

/// Mono audio with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Audio {
    pub rate: u32,
    pub samples: Vec<f64>,
}

/// Writes mono 32-bit float WAV.
pub fn write_wav(path: &Path, audio: &Audio) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: audio.rate,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut w = hound::WavWriter::create(path, spec)?;
    for &v in &audio.samples {
        w.write_sample(v as f32)?;
    }
    w.finalize()?;
    Ok(())
}

/// Reads a mono WAV; integer formats are scaled to [-1, 1).
pub fn read_wav(path: &Path) -> Result<Audio> {
    let mut r = hound::WavReader::open(path)?;
    let spec = r.spec();
    if spec.channels != 1 {
        return Err(Error::InvalidArgument(format!(
            "{}: expected mono audio, found {} channels",
            path.display(),
            spec.channels
        )));
    }
    let samples = match spec.sample_format {
        hound::SampleFormat::Float => r
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<Vec<_>, _>>()?,
        hound::SampleFormat::Int => {
            let scale = 1.0 / (1u64 << (spec.bits_per_sample - 1)) as f64;
            r.samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<std::result::Result<Vec<_>, _>>()?
        }
    };
    Ok(Audio {
        rate: spec.sample_rate,
        samples,
    })
}

/// `n,d_i,tau_i,A_i` rows for the image with enumeration index `image`.
pub fn debug_csv(streams: &DelayStreams, image: usize) -> Result<String> {
    let slot = streams
        .images
        .iter()
        .position(|s| s.image.index == image)
        .ok_or_else(|| Error::InvalidArgument(format!("image {image} is not in the render")))?;
    let mut out = String::from("n,d_i,tau_i,A_i\n");
    for (n, d) in streams.images[slot].distance.iter().enumerate() {
        let _ = writeln!(
            out,
            "{n},{d:.17e},{:.17e},{:.17e}",
            streams.tau(slot, n),
            streams.amplitude(slot, n)
        );
    }
    Ok(out)
}
