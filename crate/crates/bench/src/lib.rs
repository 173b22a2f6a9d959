//! Shared fixtures for the engine benchmarks.

use movsrc::{MicPosition, Room, Scene, Trajectory, TrajectoryKind, TrajectorySpec};
use std::f64::consts::PI;

pub const RATE: f64 = 16000.0;

pub fn scene() -> Scene {
    let room = Room::uniform([5.0, 6.0, 4.0], 0.8).expect("valid room");
    let mic = MicPosition::new(&room, [1.5, 2.0, 1.5]).expect("mic inside");
    Scene { room, mic }
}

/// Band-limited random path, 2 Hz, 1 m/s.
pub fn moving(seconds: f64) -> Trajectory {
    let spec = TrajectorySpec {
        kind: TrajectoryKind::FilteredNoise { center: [2.5, 3.0, 2.0] },
        duration: seconds,
        bandwidth_limit: 2.0,
        speed_max: 1.0,
        seed: 11,
    };
    movsrc::trajectory::generate(&spec, RATE, &scene().room, 0.3).expect("feasible path")
}

pub fn sine(freq: f64, len: usize) -> Vec<f64> {
    (0..len).map(|n| (2.0 * PI * freq * n as f64 / RATE).sin()).collect()
}
