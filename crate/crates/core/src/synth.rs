//! Hierarchical moving-image-source synthesis.
//!
//! Each image contributes `Aᵢ(n)·s(n − τᵢ(n))` with `Aᵢ = βᵢ/(4π·dᵢ)` and
//! `τᵢ = fs·dᵢ/c`. Low-order images (order ≤ K) get exact distances at the
//! audio rate. Higher-order images are far away, so their distance streams
//! have about the bandwidth of the trajectory itself; they are evaluated on
//! the trajectory decimated by N and brought back to the audio rate with a
//! band-limited upsampler. All images share one Farrow branch-filter pass.

use crate::error::{Error, Result};
use crate::farrow::{self, BranchStreams, FarrowFilter};
use crate::reduce::{self, Summation};
use crate::room::{self, ImageSourceSpec, MicPosition, Room};
use crate::trajectory::{self, Trajectory, Upsampler};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Output samples per parallel work item.
const BLOCK: usize = 4096;

/// Speed of sound in m/s.
pub const SOUND_SPEED: f64 = 343.0;
/// Distance clamp in meters.
pub const D_MIN: f64 = 0.05;

/// Which time instant the amplitude `Aᵢ` is taken at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Modulation {
    /// `Aᵢ(n)·s(n − τᵢ(n))`: amplitude at the receive time.
    #[default]
    ReceiverTime,
    /// Amplitude at the emission time `n − τᵢ(n)`, read from the same
    /// distance stream by linear interpolation.
    SourceTime,
}

impl std::str::FromStr for Modulation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "receiver" | "receiver-time" => Ok(Self::ReceiverTime),
            "source" | "source-time" => Ok(Self::SourceTime),
            _ => Err(Error::InvalidArgument(format!("unknown modulation `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisConfig {
    pub audio_rate: f64,
    /// Images with order ≤ this are computed at the full rate (K).
    pub order_split: u32,
    /// Trajectory decimation factor for high-order images (N).
    pub decimation: usize,
    pub max_order: u32,
    /// Drop images that cannot arrive within `c·t60`.
    pub t60: Option<f64>,
    pub sound_speed: f64,
    /// Distances are clamped to at least this before use.
    pub d_min: f64,
    pub summation: Summation,
    pub modulation: Modulation,
    /// Worker threads, 0 = rayon default.
    pub workers: usize,
    /// Cap on distance evaluations for the full-rate oracle.
    pub oracle_budget: u64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            audio_rate: 16000.0,
            order_split: 1,
            decimation: 3200,
            max_order: 3,
            t60: None,
            sound_speed: SOUND_SPEED,
            d_min: D_MIN,
            summation: Summation::PairwiseTree,
            modulation: Modulation::ReceiverTime,
            workers: 0,
            oracle_budget: 2_000_000_000,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.audio_rate > 0.0) {
            return bad(format!("audio rate must be positive, got {}", self.audio_rate));
        }
        if self.decimation == 0 {
            return bad("decimation factor must be ≥ 1".into());
        }
        if !(self.d_min > 0.0) {
            return bad(format!("d_min must be positive, got {}", self.d_min));
        }
        if !(self.sound_speed > 0.0) {
            return bad(format!("sound speed must be positive, got {}", self.sound_speed));
        }
        if let Some(t) = self.t60 {
            if !(t > 0.0) {
                return bad(format!("t60 must be positive, got {t}"));
            }
        }
        Ok(())
    }
}

/// Room plus receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scene {
    pub room: Room,
    pub mic: MicPosition,
}

/// An image together with its position in the enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageRef {
    pub index: usize,
    pub spec: ImageSourceSpec,
}

/// Per-image distance stream `dᵢ(n)` in meters at the audio rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageStream {
    pub image: ImageRef,
    pub distance: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayStreams {
    pub audio_rate: f64,
    pub sound_speed: f64,
    pub d_min: f64,
    pub len: usize,
    pub images: Vec<ImageStream>,
    /// Distance evaluations performed to build the streams.
    pub evaluations: u64,
}

impl DelayStreams {
    pub fn empty(cfg: &SynthesisConfig, len: usize) -> Self {
        Self {
            audio_rate: cfg.audio_rate,
            sound_speed: cfg.sound_speed,
            d_min: cfg.d_min,
            len,
            images: Vec::new(),
            evaluations: 0,
        }
    }

    #[inline]
    fn clamped(&self, i: usize, n: usize) -> f64 {
        let d = &self.images[i].distance;
        d[n.min(d.len() - 1)].max(self.d_min)
    }

    /// `τᵢ(n) = fs·max(dᵢ(n), d_min)/c` in samples.
    #[inline]
    pub fn tau(&self, i: usize, n: usize) -> f64 {
        self.audio_rate * self.clamped(i, n) / self.sound_speed
    }

    /// `Aᵢ(n) = βᵢ / (4π·max(dᵢ(n), d_min))`.
    #[inline]
    pub fn amplitude(&self, i: usize, n: usize) -> f64 {
        self.images[i].image.spec.beta / (4.0 * PI * self.clamped(i, n))
    }

    pub fn max_tau(&self) -> f64 {
        self.images
            .iter()
            .flat_map(|s| s.distance.iter())
            .fold(0.0f64, |m, d| m.max(d.max(self.d_min)))
            * self.audio_rate
            / self.sound_speed
    }
}

/// Enumerates images up to `cfg.max_order` and tags them with their index.
/// With `cfg.t60` set, drops images whose distance from the first trajectory
/// position, less the trajectory's extent, exceeds `c·t60`.
pub fn select_images(scene: &Scene, traj: &Trajectory, cfg: &SynthesisConfig) -> Vec<ImageRef> {
    let all = room::enumerate_images(&scene.room, cfg.max_order);
    let (lo, hi) = traj.bounding_box();
    let extent = crate::geom::distance(lo, hi);
    let start = traj.position_at(0);
    all.into_iter()
        .enumerate()
        .map(|(index, spec)| ImageRef { index, spec })
        .filter(|img| match cfg.t60 {
            Some(t60) => {
                room::image_distance(&img.spec, start, &scene.mic, &scene.room) - extent
                    <= cfg.sound_speed * t60
            }
            None => true,
        })
        .collect()
}

/// Splits images into (order ≤ K, order > K), keeping enumeration order.
pub fn partition_images(images: &[ImageRef], order_split: u32) -> (Vec<ImageRef>, Vec<ImageRef>) {
    images.iter().partition(|img| img.spec.order <= order_split)
}

/// Stream length sufficient for `synthesize` on `input_len` samples:
/// input plus the largest possible delay plus the filter length.
pub fn stream_length(
    input_len: usize,
    traj: &Trajectory,
    images: &[ImageRef],
    scene: &Scene,
    filter: &FarrowFilter,
    cfg: &SynthesisConfig,
) -> usize {
    let (lo, hi) = traj.bounding_box();
    let far = images
        .iter()
        .map(|img| room::max_image_distance(&img.spec, lo, hi, &scene.mic, &scene.room))
        .fold(cfg.d_min, f64::max);
    // upsampler overshoot on high-order streams is far below a meter
    let tau = cfg.audio_rate * (far + 1.0) / cfg.sound_speed;
    input_len + tau.ceil() as usize + filter.branch_len() + 1
}

/// Exact per-sample distances at the audio rate. Positions past the end of
/// the trajectory are held.
pub fn low_order_distances(
    images: &[ImageRef],
    traj: &Trajectory,
    scene: &Scene,
    cfg: &SynthesisConfig,
    out_len: usize,
) -> Result<DelayStreams> {
    if (traj.rate() - cfg.audio_rate).abs() > 1e-9 * cfg.audio_rate {
        return Err(Error::InvalidArgument(format!(
            "trajectory rate {} differs from audio rate {}",
            traj.rate(),
            cfg.audio_rate
        )));
    }
    let streams: Vec<ImageStream> = images
        .par_iter()
        .map(|img| ImageStream {
            image: *img,
            distance: (0..out_len)
                .map(|n| room::image_distance(&img.spec, traj.position_at(n), &scene.mic, &scene.room))
                .collect(),
        })
        .collect();
    let held = out_len.min(traj.len()) as u64;
    Ok(DelayStreams {
        evaluations: held * images.len() as u64,
        images: streams,
        ..DelayStreams::empty(cfg, out_len)
    })
}

/// Distances evaluated on a coarse trajectory at `audio_rate / factor`,
/// then band-limited upsampling by `factor` to `out_len` samples.
pub fn high_order_distances(
    images: &[ImageRef],
    traj_coarse: &Trajectory,
    factor: usize,
    scene: &Scene,
    cfg: &SynthesisConfig,
    out_len: usize,
) -> Result<DelayStreams> {
    let expected = cfg.audio_rate / factor as f64;
    if (traj_coarse.rate() - expected).abs() > 1e-9 * expected {
        return Err(Error::InvalidArgument(format!(
            "coarse trajectory rate {} is not audio rate / {factor}",
            traj_coarse.rate()
        )));
    }
    let up = Upsampler::new(factor)?;
    let streams: Vec<ImageStream> = images
        .par_iter()
        .map(|img| {
            let coarse: Vec<f64> = traj_coarse
                .positions()
                .iter()
                .map(|p| room::image_distance(&img.spec, *p, &scene.mic, &scene.room))
                .collect();
            up.upsample(&coarse, out_len).map(|distance| ImageStream {
                image: *img,
                distance,
            })
        })
        .collect::<Result<_>>()?;
    Ok(DelayStreams {
        evaluations: traj_coarse.len() as u64 * images.len() as u64,
        images: streams,
        ..DelayStreams::empty(cfg, out_len)
    })
}

/// Union of two stream sets, ordered by enumeration index.
pub fn merge_streams(low: DelayStreams, high: DelayStreams) -> Result<DelayStreams> {
    if low.len != high.len {
        return Err(Error::LengthMismatch(format!(
            "stream lengths {} and {}",
            low.len, high.len
        )));
    }
    if low.audio_rate != high.audio_rate {
        return Err(Error::LengthMismatch(format!(
            "stream rates {} and {}",
            low.audio_rate, high.audio_rate
        )));
    }
    let mut images = low.images;
    images.extend(high.images);
    images.sort_by_key(|s| s.image.index);
    if images.windows(2).any(|w| w[0].image.index == w[1].image.index) {
        return Err(Error::InvalidArgument("image present in both stream sets".into()));
    }
    Ok(DelayStreams {
        images,
        evaluations: low.evaluations + high.evaluations,
        ..low
    })
}

/// Holds the last position so that the coarse grid of step `factor`
/// reaches at least sample `out_len − 1`.
fn cover(traj: &Trajectory, factor: usize, out_len: usize) -> Result<Trajectory> {
    let last = out_len.max(traj.len()).saturating_sub(1);
    let len = last.div_ceil(factor) * factor + 1;
    if len <= traj.len() {
        return Ok(traj.clone());
    }
    let mut positions = traj.positions().to_vec();
    positions.resize(len, traj.position_at(traj.len() - 1));
    Trajectory::new(traj.rate(), positions)
}

/// Full hierarchical distance pipeline for one trajectory.
pub fn hierarchical_streams(
    images: &[ImageRef],
    traj: &Trajectory,
    scene: &Scene,
    cfg: &SynthesisConfig,
    out_len: usize,
) -> Result<DelayStreams> {
    let (low, high) = partition_images(images, cfg.order_split);
    let low = low_order_distances(&low, traj, scene, cfg, out_len)?;
    let high = if high.is_empty() {
        DelayStreams::empty(cfg, out_len)
    } else {
        let coarse = trajectory::decimate(&cover(traj, cfg.decimation, out_len)?, cfg.decimation)?;
        high_order_distances(&high, &coarse, cfg.decimation, scene, cfg, out_len)?
    };
    merge_streams(low, high)
}

/// Linear interpolation of image `i`'s clamped distance at fractional index `t`.
#[inline]
fn distance_at(streams: &DelayStreams, i: usize, t: f64) -> f64 {
    let t = t.max(0.0);
    let k = t.floor() as usize;
    let f = t - k as f64;
    let a = streams.clamped(i, k);
    if f == 0.0 {
        a
    } else {
        a + (streams.clamped(i, k + 1) - a) * f
    }
}

fn contribution(
    streams: &DelayStreams,
    branches: &BranchStreams,
    filter: &FarrowFilter,
    modulation: Modulation,
    i: usize,
    start: usize,
    out: &mut [f64],
) {
    let latency = filter.nominal_delay();
    let offset = latency as i64;
    let beta = streams.images[i].image.spec.beta;
    for (j, y) in out.iter_mut().enumerate() {
        let n = start + j;
        let tau = streams.tau(i, n);
        // evaluating at n + P with delay τ + P keeps the split non-negative
        let split = farrow::split_delay(tau + latency, filter)
            .expect("clamped delays are never below the filter latency");
        let v = farrow::eval(branches, n as i64 + offset, split);
        let gain = match modulation {
            Modulation::ReceiverTime => streams.amplitude(i, n),
            Modulation::SourceTime => beta / (4.0 * PI * distance_at(streams, i, n as f64 - tau)),
        };
        *y = gain * v;
    }
}

/// `y(n) = Σᵢ Aᵢ(n)·s(n − τᵢ(n))` using one shared branch-filter pass.
///
/// Output length is `s.len() + ceil(max τ) + L`. Distances past the end of
/// the streams are held. Images are summed with `cfg.summation`; the result
/// does not depend on the worker count.
pub fn synthesize(
    s: &[f64],
    streams: &DelayStreams,
    filter: &FarrowFilter,
    cfg: &SynthesisConfig,
) -> Result<Vec<f64>> {
    if let Some(i) = s.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("input sample {i}")));
    }
    if streams.images.iter().any(|img| img.distance.is_empty()) {
        return Err(Error::InvalidArgument("empty distance stream".into()));
    }
    let out_len = s.len() + streams.max_tau().ceil() as usize + filter.branch_len();
    let count = streams.images.len();
    reduce::with_workers(cfg.workers, || {
        let branches = farrow::branch_filter(s, filter);
        let mut out = vec![0.0; out_len];
        out.par_chunks_mut(BLOCK).enumerate().for_each(|(b, chunk)| {
            let start = b * BLOCK;
            let leaf = |i: usize, buf: &mut [f64]| {
                contribution(streams, &branches, filter, cfg.modulation, i, start, buf)
            };
            let sum = reduce::reduce_images(count, chunk.len(), cfg.summation, &leaf);
            chunk.copy_from_slice(&sum);
        });
        out
    })
}

/// What a full render produced.
#[derive(Debug, Clone)]
pub struct Render {
    pub audio: Vec<f64>,
    pub streams: DelayStreams,
    pub cost: CostReport,
}

/// Enumerate, build hierarchical streams, synthesize.
pub fn render_hierarchical(
    s: &[f64],
    traj: &Trajectory,
    scene: &Scene,
    filter: &FarrowFilter,
    cfg: &SynthesisConfig,
) -> Result<Render> {
    cfg.validate()?;
    let images = select_images(scene, traj, cfg);
    let out_len = stream_length(s.len(), traj, &images, scene, filter, cfg);
    let streams = reduce::with_workers(cfg.workers, || {
        hierarchical_streams(&images, traj, scene, cfg, out_len)
    })??;
    let audio = synthesize(s, &streams, filter, cfg)?;
    let specs: Vec<ImageSourceSpec> = images.iter().map(|i| i.spec).collect();
    let cost = cost_report(cfg, &specs, s.len() as f64 / cfg.audio_rate);
    Ok(Render {
        audio,
        streams,
        cost,
    })
}

/// Distance-evaluation counts for naive full-rate vs hierarchical synthesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostReport {
    pub low_images: u64,
    pub high_images: u64,
    pub samples: u64,
    pub coarse_samples: u64,
    /// Every image at the audio rate.
    pub naive: u64,
    /// Low-order at the audio rate, high-order at the decimated rate.
    pub hierarchical: u64,
    pub ratio: f64,
    /// Saving on the high-order images alone.
    pub high_order_ratio: f64,
}

pub fn cost_report_counts(
    cfg: &SynthesisConfig,
    low_images: u64,
    high_images: u64,
    duration: f64,
) -> CostReport {
    let samples = (duration * cfg.audio_rate).ceil() as u64;
    let coarse_samples = samples.div_ceil(cfg.decimation.max(1) as u64);
    let naive = (low_images + high_images) * samples;
    let hierarchical = low_images * samples + high_images * coarse_samples;
    let ratio = if hierarchical == 0 {
        1.0
    } else {
        naive as f64 / hierarchical as f64
    };
    let high_order_ratio = if high_images == 0 || coarse_samples == 0 {
        1.0
    } else {
        samples as f64 / coarse_samples as f64
    };
    CostReport {
        low_images,
        high_images,
        samples,
        coarse_samples,
        naive,
        hierarchical,
        ratio,
        high_order_ratio,
    }
}

pub fn cost_report(cfg: &SynthesisConfig, images: &[ImageSourceSpec], duration: f64) -> CostReport {
    let low = images.iter().filter(|s| s.order <= cfg.order_split).count() as u64;
    cost_report_counts(cfg, low, images.len() as u64 - low, duration)
}
