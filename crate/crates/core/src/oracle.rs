//! Reference renderers: static image-source RIRs and their convolution,
//! brute-force full-rate moving synthesis, and a block-splice baseline that
//! freezes the source once per block.

use crate::dsp;
use crate::error::{Error, Result};
use crate::farrow::FarrowFilter;
use crate::geom::Vec3;
use crate::kernel::KaiserSinc;
use crate::room::{self, MicPosition, Room};
use crate::synth::{self, Scene, SynthesisConfig};
use crate::trajectory::Trajectory;
use std::f64::consts::PI;

/// One image arrival: delay in samples and linear amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    pub delay: f64,
    pub amplitude: f64,
}

/// Static room impulse response as a sampled tap train.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticRir {
    pub rate: f64,
    pub taps: Vec<f64>,
    /// Arrivals in ascending delay order.
    pub arrivals: Vec<Arrival>,
    pub image_count: usize,
    pub max_order: u32,
}

/// Static RIR with the default sound speed and distance clamp.
pub fn static_rir(
    room: &Room,
    source_pos: Vec3,
    mic: &MicPosition,
    rate: f64,
    max_order: u32,
) -> Result<StaticRir> {
    static_rir_with(room, source_pos, mic, rate, max_order, synth::SOUND_SPEED, synth::D_MIN)
}

/// Every image up to `max_order` becomes a tap of amplitude `β/(4π·d)` at
/// delay `d·rate/c`, spread over 64 samples with a Kaiser-windowed sinc.
/// Integer delays give a single exact tap. Kernel weights that would fall
/// before sample 0 are dropped.
pub fn static_rir_with(
    room: &Room,
    source_pos: Vec3,
    mic: &MicPosition,
    rate: f64,
    max_order: u32,
    sound_speed: f64,
    d_min: f64,
) -> Result<StaticRir> {
    if !room.contains(source_pos) {
        return Err(Error::Domain(format!("source {source_pos:?} is outside the room")));
    }
    if !(rate > 0.0) || !(sound_speed > 0.0) || !(d_min > 0.0) {
        return Err(Error::InvalidArgument(
            "rate, sound speed and d_min must be positive".into(),
        ));
    }
    let images = room::enumerate_images(room, max_order);
    let mut arrivals: Vec<Arrival> = images
        .iter()
        .map(|spec| {
            let d = room::image_distance(spec, source_pos, mic, room).max(d_min);
            Arrival {
                delay: d * rate / sound_speed,
                amplitude: spec.beta / (4.0 * PI * d),
            }
        })
        .collect();
    arrivals.sort_by(|a, b| a.delay.total_cmp(&b.delay));

    let kernel = KaiserSinc::default();
    let last = arrivals.last().map_or(0.0, |a| a.delay);
    let mut taps = vec![0.0; last.floor() as usize + kernel.half_width + 1];
    let mut weights = Vec::with_capacity(2 * kernel.half_width);
    for a in &arrivals {
        if a.delay.fract() == 0.0 {
            taps[a.delay as usize] += a.amplitude;
            continue;
        }
        let first = kernel.taps(a.delay, &mut weights);
        for (j, w) in weights.iter().enumerate() {
            let k = first + j as i64;
            if k >= 0 {
                taps[k as usize] += a.amplitude * w;
            }
        }
    }
    while taps.len() > 1 && taps.last() == Some(&0.0) {
        taps.pop();
    }
    Ok(StaticRir {
        rate,
        taps,
        arrivals,
        image_count: images.len(),
        max_order,
    })
}

/// Linear convolution `s ⊛ h`, length `len(s) + len(h) − 1`.
pub fn static_render(s: &[f64], rir: &StaticRir, rate: f64) -> Result<Vec<f64>> {
    if (rir.rate - rate).abs() > 1e-9 * rate {
        return Err(Error::InvalidArgument(format!(
            "signal rate {rate} differs from RIR rate {}",
            rir.rate
        )));
    }
    Ok(dsp::fft_convolve(s, &rir.taps))
}

/// Every image at the audio rate, no decimation. Refuses jobs needing more
/// than `cfg.oracle_budget` distance evaluations.
pub fn full_rate_moving_oracle(
    s: &[f64],
    traj: &Trajectory,
    scene: &Scene,
    filter: &FarrowFilter,
    cfg: &SynthesisConfig,
) -> Result<synth::Render> {
    cfg.validate()?;
    let images = synth::select_images(scene, traj, cfg);
    let out_len = synth::stream_length(s.len(), traj, &images, scene, filter, cfg);
    let needed = images.len() as u64 * out_len as u64;
    if needed > cfg.oracle_budget {
        return Err(Error::BudgetExceeded {
            needed,
            budget: cfg.oracle_budget,
        });
    }
    let streams = crate::reduce::with_workers(cfg.workers, || {
        synth::low_order_distances(&images, traj, scene, cfg, out_len)
    })??;
    let audio = synth::synthesize(s, &streams, filter, cfg)?;
    let flat = SynthesisConfig {
        decimation: 1,
        order_split: u32::MAX,
        ..cfg.clone()
    };
    let specs: Vec<_> = images.iter().map(|i| i.spec).collect();
    let cost = synth::cost_report(&flat, &specs, s.len() as f64 / cfg.audio_rate);
    Ok(synth::Render {
        audio,
        streams,
        cost,
    })
}

/// Weight of block `b` at sample `n` for blocks of `hop` samples with
/// linear ramps of `crossfade` samples centred on the boundaries. Weights
/// of all blocks sum to 1.
fn block_weight(n: usize, b: usize, blocks: usize, hop: usize, crossfade: usize) -> f64 {
    let ramp = |t: f64| {
        if crossfade == 0 {
            if t >= 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            ((t + 0.5 * crossfade as f64) / crossfade as f64).clamp(0.0, 1.0)
        }
    };
    let n = n as f64;
    let rise = if b == 0 { 1.0 } else { ramp(n - (b * hop) as f64) };
    let fall = if b + 1 == blocks {
        0.0
    } else {
        ramp(n - ((b + 1) * hop) as f64)
    };
    rise - fall
}

/// Block-splice rendering: the input is cut into blocks of `hop` samples,
/// each convolved with the static RIR of the source position at the block
/// start, and the results are overlap-added. `crossfade > 0` replaces the
/// hard cuts with linear ramps of that many samples.
pub fn splice_baseline(
    s: &[f64],
    traj: &Trajectory,
    scene: &Scene,
    cfg: &SynthesisConfig,
    hop: usize,
    crossfade: usize,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if hop == 0 {
        return Err(Error::InvalidArgument("block hop must be ≥ 1".into()));
    }
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let blocks = s.len().div_ceil(hop);
    let half = crossfade.div_ceil(2);
    let mut out: Vec<f64> = Vec::new();
    let mut cache: Option<(Vec3, StaticRir)> = None;
    for b in 0..blocks {
        let pos = traj.position_at(b * hop);
        if cache.as_ref().is_none_or(|(p, _)| *p != pos) {
            let rir = static_rir_with(
                &scene.room,
                pos,
                &scene.mic,
                cfg.audio_rate,
                cfg.max_order,
                cfg.sound_speed,
                cfg.d_min,
            )?;
            cache = Some((pos, rir));
        }
        let taps = &cache.as_ref().expect("filled above").1.taps;
        let lo = (b * hop).saturating_sub(half);
        let hi = ((b + 1) * hop + half).min(s.len());
        let need = hi + taps.len() - 1;
        if out.len() < need {
            out.resize(need, 0.0);
        }
        for n in lo..hi {
            let x = s[n] * block_weight(n, b, blocks, hop, crossfade);
            if x == 0.0 {
                continue;
            }
            for (k, h) in taps.iter().enumerate() {
                if *h != 0.0 {
                    out[n + k] += x * h;
                }
            }
        }
    }
    Ok(out)
}
