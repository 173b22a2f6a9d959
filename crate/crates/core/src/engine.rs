//! End-to-end rendering from an [`EngineConfig`].

use crate::config::{EngineConfig, FarrowSpec};
use crate::error::{Error, Result};
use crate::farrow::{self, DesignGrid, FarrowFilter};
use crate::oracle;
use crate::synth::{self, CostReport, DelayStreams, Scene};
use crate::trajectory::{self, Trajectory};

/// Which renderer produces the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Hierarchical,
    /// All images at the audio rate.
    Oracle,
    /// Static RIR per block of `hop` samples.
    Splice { hop: usize, crossfade: usize },
    /// Static RIR at the first trajectory position.
    Static,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Hierarchical => "hierarchical",
            Mode::Oracle => "oracle",
            Mode::Splice { .. } => "splice",
            Mode::Static => "static",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RenderOutput {
    pub audio: Vec<f64>,
    /// Present for the moving renderers.
    pub streams: Option<DelayStreams>,
    pub cost: Option<CostReport>,
}

/// Designs the filter, or loads it when a matrix file is given.
pub fn build_filter(spec: &FarrowSpec) -> Result<FarrowFilter> {
    match &spec.file {
        Some(path) => FarrowFilter::from_matrix(&std::fs::read_to_string(path)?),
        None => farrow::design(spec.poly_order, spec.branch_len, spec.passband, DesignGrid::default()),
    }
}

/// Loads or generates the source path at the audio rate.
pub fn build_trajectory(cfg: &EngineConfig, scene: &Scene) -> Result<Trajectory> {
    let traj = match &cfg.source.file {
        Some(path) => Trajectory::from_table(&std::fs::read_to_string(path)?)?,
        None => trajectory::generate(
            &cfg.source.trajectory_spec(cfg.seed)?,
            cfg.synth.audio_rate,
            &scene.room,
            cfg.source.margin,
        )?,
    };
    if (traj.rate() - cfg.synth.audio_rate).abs() > 1e-9 * cfg.synth.audio_rate {
        return Err(Error::InvalidArgument(format!(
            "trajectory rate {} differs from audio rate {}",
            traj.rate(),
            cfg.synth.audio_rate
        )));
    }
    if let Some(i) = traj.positions().iter().position(|p| !scene.room.contains(*p)) {
        return Err(Error::Domain(format!("trajectory sample {i} is outside the room")));
    }
    Ok(traj)
}

pub fn render(
    mode: Mode,
    s: &[f64],
    traj: &Trajectory,
    scene: &Scene,
    filter: &FarrowFilter,
    cfg: &synth::SynthesisConfig,
) -> Result<RenderOutput> {
    match mode {
        Mode::Hierarchical => {
            let r = synth::render_hierarchical(s, traj, scene, filter, cfg)?;
            Ok(RenderOutput {
                audio: r.audio,
                streams: Some(r.streams),
                cost: Some(r.cost),
            })
        }
        Mode::Oracle => {
            let r = oracle::full_rate_moving_oracle(s, traj, scene, filter, cfg)?;
            Ok(RenderOutput {
                audio: r.audio,
                streams: Some(r.streams),
                cost: Some(r.cost),
            })
        }
        Mode::Splice { hop, crossfade } => Ok(RenderOutput {
            audio: oracle::splice_baseline(s, traj, scene, cfg, hop, crossfade)?,
            streams: None,
            cost: None,
        }),
        Mode::Static => {
            let rir = oracle::static_rir_with(
                &scene.room,
                traj.position_at(0),
                &scene.mic,
                cfg.audio_rate,
                cfg.max_order,
                cfg.sound_speed,
                cfg.d_min,
            )?;
            Ok(RenderOutput {
                audio: oracle::static_render(s, &rir, cfg.audio_rate)?,
                streams: None,
                cost: None,
            })
        }
    }
}
