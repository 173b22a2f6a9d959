#![allow(dead_code)]

use movsrc::trajectory::{self, Trajectory, TrajectoryKind, TrajectorySpec};
use movsrc::{MicPosition, Room, Scene};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

pub const RATE: f64 = 16000.0;

/// 5 × 6 × 4 m, β = 0.8 on every wall.
pub fn medium_scene() -> Scene {
    let room = Room::uniform([5.0, 6.0, 4.0], 0.8).unwrap();
    let mic = MicPosition::new(&room, [1.5, 2.0, 1.5]).unwrap();
    Scene { room, mic }
}

/// Long room for the receding-source runs.
pub fn long_scene() -> Scene {
    let room = Room::uniform([10.0, 8.0, 4.0], 0.8).unwrap();
    let mic = MicPosition::new(&room, [2.0, 4.0, 2.0]).unwrap();
    Scene { room, mic }
}

pub fn sine(freq: f64, len: usize) -> Vec<f64> {
    (0..len).map(|n| (2.0 * PI * freq * n as f64 / RATE).sin()).collect()
}

pub fn white_noise(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Source 1 m from the mic, moving straight away at `speed` m/s.
pub fn receding(scene: &Scene, speed: f64, seconds: f64) -> Trajectory {
    let m = scene.mic.pos();
    let spec = TrajectorySpec {
        kind: TrajectoryKind::Line {
            start: [m[0] + 1.0, m[1], m[2]],
            direction: [1.0, 0.0, 0.0],
        },
        duration: seconds,
        bandwidth_limit: 1.0,
        speed_max: speed,
        seed: 0,
    };
    trajectory::generate(&spec, RATE, &scene.room, 0.2).unwrap()
}

/// Band-limited random motion around the room centre.
pub fn wandering(scene: &Scene, bandwidth: f64, speed: f64, seconds: f64, seed: u64) -> Trajectory {
    let d = scene.room.dims();
    let spec = TrajectorySpec {
        kind: TrajectoryKind::FilteredNoise {
            center: [d[0] / 2.0, d[1] / 2.0, d[2] / 2.0],
        },
        duration: seconds,
        bandwidth_limit: bandwidth,
        speed_max: speed,
        seed,
    };
    trajectory::generate(&spec, RATE, &scene.room, 0.3).unwrap()
}

pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `max |a − b| / max |b|` with the shorter one zero-extended.
pub fn rel_max_diff(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    let at = |x: &[f64], i: usize| x.get(i).copied().unwrap_or(0.0);
    let d = (0..n).fold(0.0f64, |m, i| m.max((at(a, i) - at(b, i)).abs()));
    d / max_abs(b)
}
