//! Moving sound sources in shoebox rooms.
//!
//! A source follows a band-limited trajectory; every image source of the
//! room becomes a time-varying delay and gain applied to the dry signal.
//! Delays are realised with a Farrow variable fractional-delay filter whose
//! branch outputs are shared by all images. Low-order images get exact
//! per-sample distances; high-order images are evaluated on a decimated
//! trajectory and upsampled, which removes most of the distance work.
//!
//! ```no_run
//! use movsrc::{FarrowFilter, Room, MicPosition, Scene, SynthesisConfig, Trajectory};
//!
//! let room = Room::uniform([5.0, 6.0, 4.0], 0.8)?;
//! let mic = MicPosition::new(&room, [1.5, 2.0, 1.5])?;
//! let scene = Scene { room, mic };
//! let traj = Trajectory::stationary(16000.0, [3.5, 4.0, 1.5], 16000)?;
//! let dry = vec![0.0; 16000];
//! let out = movsrc::synth::render_hierarchical(
//!     &dry, &traj, &scene, &FarrowFilter::default(), &SynthesisConfig::default())?;
//! # Ok::<(), movsrc::Error>(())
//! ```

// `!(x > 0.0)` is deliberate: it rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dsp;
pub mod engine;
pub mod error;
pub mod farrow;
pub mod geom;
pub mod io;
pub mod kernel;
pub mod metrics;
pub mod oracle;
pub mod reduce;
pub mod room;
pub mod synth;
pub mod trajectory;

pub use config::EngineConfig;
pub use error::{Error, Result};
pub use farrow::{DelaySplit, DesignGrid, DesignQuality, FarrowFilter};
pub use geom::Vec3;
pub use metrics::{compare, CompareOptions, ComparisonReport};
pub use oracle::StaticRir;
pub use reduce::Summation;
pub use room::{ImageSourceSpec, MicPosition, Room};
pub use synth::{CostReport, DelayStreams, Modulation, Scene, SynthesisConfig};
pub use trajectory::{Trajectory, TrajectoryKind, TrajectorySpec};
