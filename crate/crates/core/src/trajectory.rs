//! Band-limited source trajectories.
//!
//! A [`Trajectory`] is a uniformly sampled path `p(n)` together with its
//! spatio-temporal sampling rate. Displacement of a physical source is the
//! double integral of its acceleration, so its spectrum falls off as `1/ω²`
//! above the acceleration bandwidth; the tools here generate such paths,
//! measure their bandwidth, and move them between sampling rates.

use crate::dsp;
use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::kernel::KaiserSinc;
use crate::room::Room;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Energy fraction used when no other is requested.
pub const DEFAULT_ENERGY_FRACTION: f64 = 0.99;

/// Axes whose detrended RMS falls below this are treated as static (meters).
const STATIC_RMS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    rate: f64,
    positions: Vec<Vec3>,
}

impl Trajectory {
    pub fn new(rate: f64, positions: Vec<Vec3>) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "trajectory rate must be positive, got {rate}"
            )));
        }
        if positions.is_empty() {
            return Err(Error::InvalidArgument("trajectory is empty".into()));
        }
        if let Some(i) = positions.iter().position(|p| !geom::is_finite(*p)) {
            return Err(Error::NonFinite(format!("trajectory position {i}")));
        }
        Ok(Self { rate, positions })
    }

    /// A source that sits at `position` for `len` samples.
    pub fn stationary(rate: f64, position: Vec3, len: usize) -> Result<Self> {
        Self::new(rate, vec![position; len.max(1)])
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.positions.len() as f64 / self.rate
    }

    /// Position at sample `n`, holding the endpoints outside the recorded range.
    #[inline]
    pub fn position_at(&self, n: usize) -> Vec3 {
        self.positions[n.min(self.positions.len() - 1)]
    }

    /// Axis-aligned bounding box `(lo, hi)` of all positions.
    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let mut lo = self.positions[0];
        let mut hi = self.positions[0];
        for p in &self.positions {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    fn axis(&self, k: usize) -> Vec<f64> {
        self.positions.iter().map(|p| p[k]).collect()
    }

    /// Plain-text table: `rate_hz=<rate>` followed by one `x y z` row per sample.
    pub fn to_table(&self) -> String {
        let mut out = String::with_capacity(self.positions.len() * 48);
        let _ = writeln!(out, "rate_hz={}", self.rate);
        for p in &self.positions {
            let _ = writeln!(out, "{} {} {}", p[0], p[1], p[2]);
        }
        out
    }

    pub fn from_table(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing rate_hz header".into(),
        })?;
        let rate = header
            .strip_prefix("rate_hz=")
            .and_then(|v| v.trim().parse::<f64>().ok())
            .ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `rate_hz=<value>`, got `{header}`"),
            })?;
        let mut positions = Vec::new();
        for (line, row) in lines {
            let vals: Vec<f64> = row
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    line,
                    message: format!("{e}"),
                })?;
            if vals.len() != 3 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 3 coordinates, got {}", vals.len()),
                });
            }
            positions.push([vals[0], vals[1], vals[2]]);
        }
        Self::new(rate, positions)
    }
}

/// Shape of a generated path.
#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryKind {
    Static { position: Vec3 },
    /// Straight line from `start` at `speed_max` along `direction`.
    Line { start: Vec3, direction: Vec3 },
    /// Horizontal circle traversed at `speed_max`.
    Circle { center: Vec3, radius: f64 },
    /// `center + direction·amplitude·sin(2π·frequency·t)`.
    Sine {
        center: Vec3,
        direction: Vec3,
        amplitude: f64,
        frequency: f64,
    },
    /// Constant-speed polyline through the waypoints, then Gaussian smoothing
    /// down to the bandwidth limit.
    Waypoints { points: Vec<Vec3> },
    /// Gaussian noise restricted to the band below the limit, scaled to the
    /// speed limit and to the room, around `center`.
    FilteredNoise { center: Vec3 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySpec {
    pub kind: TrajectoryKind,
    pub duration: f64,
    /// Upper band edge of the displacement content, Hz.
    pub bandwidth_limit: f64,
    pub speed_max: f64,
    pub seed: u64,
}

fn infeasible(msg: impl Into<String>) -> Error {
    Error::InfeasibleTrajectory(msg.into())
}

fn unit(v: Vec3) -> Option<Vec3> {
    let n = geom::norm(v);
    (n > 0.0 && n.is_finite()).then(|| geom::scale(v, 1.0 / n))
}

/// Generates a trajectory sampled at `rate`, keeping `margin` from the walls.
///
/// The result is checked against the spec before it is returned: every
/// position inside the margin box, finite-difference speed within
/// `speed_max·(1 + 1e-3)`, and at least 99% of the displacement energy below
/// `bandwidth_limit`. A spec that cannot meet these is an error.
pub fn generate(spec: &TrajectorySpec, rate: f64, room: &Room, margin: f64) -> Result<Trajectory> {
    if !(spec.duration > 0.0) || spec.bandwidth_limit < 0.0 || spec.speed_max < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "duration must be positive, bandwidth and speed non-negative: {spec:?}"
        )));
    }
    if !(rate > 0.0) || rate < 2.0 * spec.bandwidth_limit {
        return Err(Error::InvalidArgument(format!(
            "rate {rate} Hz cannot carry a {} Hz trajectory",
            spec.bandwidth_limit
        )));
    }
    let len = (spec.duration * rate).round() as usize;
    if len < 2 {
        return Err(Error::InvalidArgument(format!(
            "duration {} s gives fewer than 2 samples at {rate} Hz",
            spec.duration
        )));
    }
    let t = |n: usize| n as f64 / rate;
    let speed = spec.speed_max;

    let positions: Vec<Vec3> = match &spec.kind {
        TrajectoryKind::Static { position } => vec![*position; len],
        TrajectoryKind::Line { start, direction } => {
            let dir = match unit(*direction) {
                Some(d) => d,
                None if speed == 0.0 => [0.0; 3],
                None => return Err(infeasible("line direction is zero")),
            };
            (0..len)
                .map(|n| geom::add(*start, geom::scale(dir, speed * t(n))))
                .collect()
        }
        TrajectoryKind::Circle { center, radius } => {
            if !(*radius > 0.0) {
                return Err(infeasible("circle radius must be positive"));
            }
            let omega = speed / radius;
            if omega / (2.0 * PI) > spec.bandwidth_limit {
                return Err(infeasible(format!(
                    "circle revolves at {} Hz, above the {} Hz limit",
                    omega / (2.0 * PI),
                    spec.bandwidth_limit
                )));
            }
            (0..len)
                .map(|n| {
                    let a = omega * t(n);
                    [
                        center[0] + radius * a.cos(),
                        center[1] + radius * a.sin(),
                        center[2],
                    ]
                })
                .collect()
        }
        TrajectoryKind::Sine {
            center,
            direction,
            amplitude,
            frequency,
        } => {
            let dir = unit(*direction).ok_or_else(|| infeasible("sine direction is zero"))?;
            if *frequency > spec.bandwidth_limit {
                return Err(infeasible(format!(
                    "{frequency} Hz oscillation exceeds the {} Hz limit",
                    spec.bandwidth_limit
                )));
            }
            if 2.0 * PI * frequency * amplitude.abs() > speed * (1.0 + 1e-3) {
                return Err(infeasible(format!(
                    "peak speed {} m/s exceeds {speed} m/s",
                    2.0 * PI * frequency * amplitude.abs()
                )));
            }
            let w = 2.0 * PI * frequency;
            (0..len)
                .map(|n| geom::add(*center, geom::scale(dir, amplitude * (w * t(n)).sin())))
                .collect()
        }
        TrajectoryKind::Waypoints { points } => waypoint_path(points, len, rate, spec)?,
        TrajectoryKind::FilteredNoise { center } => {
            filtered_noise(*center, len, rate, room, margin, spec)?
        }
    };

    let traj = Trajectory::new(rate, positions)?;
    if let Some(p) = traj
        .positions
        .iter()
        .find(|p| !room.contains_with_margin(**p, margin))
    {
        return Err(infeasible(format!(
            "position {p:?} is closer than {margin} m to a wall"
        )));
    }
    let vmax = max_speed(&traj);
    if vmax > speed * (1.0 + 1e-3) {
        return Err(infeasible(format!(
            "speed reaches {vmax} m/s, limit is {speed} m/s"
        )));
    }
    let bw = bandwidth_estimate(&traj, DEFAULT_ENERGY_FRACTION)?;
    if bw > spec.bandwidth_limit {
        return Err(infeasible(format!(
            "displacement bandwidth {bw} Hz exceeds the {} Hz limit",
            spec.bandwidth_limit
        )));
    }
    Ok(traj)
}

fn waypoint_path(
    points: &[Vec3],
    len: usize,
    rate: f64,
    spec: &TrajectorySpec,
) -> Result<Vec<Vec3>> {
    if points.is_empty() {
        return Err(infeasible("no waypoints"));
    }
    let seg: Vec<f64> = points
        .windows(2)
        .map(|w| geom::distance(w[0], w[1]))
        .collect();
    let total: f64 = seg.iter().sum();
    if total == 0.0 {
        return Ok(vec![points[0]; len]);
    }
    if spec.speed_max == 0.0 {
        return Err(infeasible("distinct waypoints need a positive speed"));
    }
    if spec.bandwidth_limit == 0.0 {
        return Err(infeasible("distinct waypoints need a positive bandwidth"));
    }
    let along = |s: f64| -> Vec3 {
        let mut s = s.min(total);
        for (i, &l) in seg.iter().enumerate() {
            if s <= l || i == seg.len() - 1 {
                let f = if l > 0.0 { (s / l).min(1.0) } else { 0.0 };
                return geom::add(points[i], geom::scale(geom::sub(points[i + 1], points[i]), f));
            }
            s -= l;
        }
        points[points.len() - 1]
    };
    let raw: Vec<Vec3> = (0..len)
        .map(|n| along(spec.speed_max * n as f64 / rate))
        .collect();

    // Gaussian with |H(B)| = e^{-2π²σ²B²} ≈ 7e-3 at σ = 0.5/B.
    let sigma = 0.5 / spec.bandwidth_limit * rate;
    let half = (4.0 * sigma).ceil() as usize;
    let mut kernel: Vec<f64> = (0..=2 * half)
        .map(|i| {
            let x = i as f64 - half as f64;
            (-0.5 * (x / sigma).powi(2)).exp()
        })
        .collect();
    let ksum: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|v| *v /= ksum);

    let mut out = vec![[0.0; 3]; len];
    for k in 0..3 {
        let mut padded = Vec::with_capacity(len + 2 * half);
        padded.extend(std::iter::repeat_n(raw[0][k], half));
        padded.extend(raw.iter().map(|p| p[k]));
        padded.extend(std::iter::repeat_n(raw[len - 1][k], half));
        let smooth = dsp::fft_convolve(&padded, &kernel);
        for n in 0..len {
            out[n][k] = smooth[n + 2 * half];
        }
    }
    Ok(out)
}

fn filtered_noise(
    center: Vec3,
    len: usize,
    rate: f64,
    room: &Room,
    margin: f64,
    spec: &TrajectorySpec,
) -> Result<Vec<Vec3>> {
    let top = 0.95 * spec.bandwidth_limit;
    let kmax = ((top * len as f64 / rate).floor() as usize).min((len - 1) / 2);
    if kmax == 0 {
        return Err(infeasible(format!(
            "{} s is too short to hold any content below {top} Hz",
            spec.duration
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let ifft = FftPlanner::new().plan_fft_inverse(len);
    let mut axes = [vec![], vec![], vec![]];
    for axis in axes.iter_mut() {
        let mut spectrum = vec![Complex64::new(0.0, 0.0); len];
        for k in 1..=kmax {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            spectrum[k] = Complex64::new(re, im);
            spectrum[len - k] = Complex64::new(re, -im);
        }
        ifft.process(&mut spectrum);
        *axis = spectrum.iter().map(|c| c.re).collect();
    }
    let unit_path: Vec<Vec3> = (0..len).map(|n| [axes[0][n], axes[1][n], axes[2][n]]).collect();
    let vmax = max_speed(&Trajectory::new(rate, unit_path.clone())?);

    let dims = room.dims();
    let mut gain = if vmax > 0.0 { spec.speed_max / vmax } else { 0.0 };
    for k in 0..3 {
        let room_left = (center[k] - margin).min(dims[k] - margin - center[k]);
        if room_left < 0.0 {
            return Err(infeasible(format!(
                "centre {center:?} is inside the wall margin"
            )));
        }
        let peak = axes[k].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak > 0.0 {
            gain = gain.min(room_left / peak);
        }
    }
    Ok(unit_path
        .iter()
        .map(|p| geom::add(center, geom::scale(*p, gain)))
        .collect())
}

/// Finite-difference velocity in m/s: central differences, one-sided at the ends.
pub fn velocity(traj: &Trajectory) -> Result<Vec<Vec3>> {
    let p = &traj.positions;
    let n = p.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "velocity needs at least 2 samples".into(),
        ));
    }
    let r = traj.rate;
    Ok((0..n)
        .map(|i| {
            let (a, b, span) = match i {
                0 => (0, 1, 1.0),
                i if i == n - 1 => (n - 2, n - 1, 1.0),
                i => (i - 1, i + 1, 2.0),
            };
            geom::scale(geom::sub(p[b], p[a]), r / span)
        })
        .collect())
}

/// Largest finite-difference speed along the path.
pub fn max_speed(traj: &Trajectory) -> f64 {
    if traj.len() < 2 {
        return 0.0;
    }
    velocity(traj)
        .map(|v| v.iter().map(|x| geom::norm(*x)).fold(0.0, f64::max))
        .unwrap_or(0.0)
}

/// Subtracts the line through the first and last sample, making the periodic
/// extension continuous. Returns the removed line's endpoints.
fn remove_endpoint_line(x: &mut [f64]) -> (f64, f64) {
    let n = x.len();
    let (a, b) = (x[0], x[n - 1]);
    let denom = (n - 1).max(1) as f64;
    for (i, v) in x.iter_mut().enumerate() {
        *v -= a + (b - a) * i as f64 / denom;
    }
    (a, b)
}

fn restore_endpoint_line(x: &mut [f64], (a, b): (f64, f64)) {
    let n = x.len();
    let denom = (n - 1).max(1) as f64;
    for (i, v) in x.iter_mut().enumerate() {
        *v += a + (b - a) * i as f64 / denom;
    }
}

fn axis_bandwidth(mut x: Vec<f64>, rate: f64, fraction: f64) -> f64 {
    let n = x.len();
    remove_endpoint_line(&mut x);
    let mean = x.iter().sum::<f64>() / n as f64;
    x.iter_mut().for_each(|v| *v -= mean);
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    if rms < STATIC_RMS {
        return 0.0;
    }
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let energy: Vec<f64> = buf[1..=n / 2].iter().map(|c| c.norm_sqr()).collect();
    let total: f64 = energy.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for (i, e) in energy.iter().enumerate() {
        acc += e;
        if acc >= fraction * total {
            return (i + 1) as f64 * rate / n as f64;
        }
    }
    rate / 2.0
}

/// Smallest frequency below which `energy_fraction` of the displacement
/// energy lies, maximized over the three axes.
///
/// Each axis has the line through its endpoints and then its mean removed
/// before the DFT, so constant drift counts as DC and the periodic extension
/// has no jump. A constant trajectory returns 0.
pub fn bandwidth_estimate(traj: &Trajectory, energy_fraction: f64) -> Result<f64> {
    if !(energy_fraction > 0.0 && energy_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "energy fraction must lie in (0, 1), got {energy_fraction}"
        )));
    }
    if traj.len() < 2 {
        return Ok(0.0);
    }
    Ok((0..3)
        .map(|k| axis_bandwidth(traj.axis(k), traj.rate, energy_fraction))
        .fold(0.0, f64::max))
}

/// Keeps every `factor`-th sample; output rate is `rate / factor`.
///
/// When the estimated bandwidth is above the output Nyquist, an ideal
/// low-pass at that Nyquist is applied first (on the endpoint-detrended
/// path). `factor = 1` returns the input unchanged.
pub fn decimate(traj: &Trajectory, factor: usize) -> Result<Trajectory> {
    if factor == 0 {
        return Err(Error::InvalidArgument("decimation factor must be ≥ 1".into()));
    }
    if factor == 1 {
        return Ok(traj.clone());
    }
    let nyquist = 0.5 * traj.rate / factor as f64;
    let mut positions = traj.positions.clone();
    if bandwidth_estimate(traj, DEFAULT_ENERGY_FRACTION)? > nyquist {
        for k in 0..3 {
            let mut x = traj.axis(k);
            let line = remove_endpoint_line(&mut x);
            let mut y = dsp::lowpass(&x, 1.0 / factor as f64);
            restore_endpoint_line(&mut y, line);
            for (p, v) in positions.iter_mut().zip(y) {
                p[k] = v;
            }
        }
    }
    Trajectory::new(
        traj.rate / factor as f64,
        positions.into_iter().step_by(factor).collect(),
    )
}

/// Kaiser-windowed-sinc interpolator by an integer factor.
///
/// The kernel is centred (zero group delay), spans 32 input samples on each
/// side, and is renormalized per output phase so constants pass exactly.
/// Samples outside the input are extrapolated by odd reflection about the
/// endpoints, so value and slope stay continuous there.
#[derive(Debug, Clone)]
pub struct Upsampler {
    factor: usize,
    kernel: KaiserSinc,
    /// `factor × 2·half_width` weights, one row per output phase.
    table: Vec<f64>,
    row_sums: Vec<f64>,
}

impl Upsampler {
    pub fn new(factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidArgument("upsampling factor must be ≥ 1".into()));
        }
        let kernel = KaiserSinc::default();
        let width = 2 * kernel.half_width;
        let mut table = Vec::with_capacity(factor * width);
        let mut row_sums = Vec::with_capacity(factor);
        let mut taps = Vec::with_capacity(width);
        for phase in 0..factor {
            // fractional position phase/factor past a base sample at 0
            kernel.taps(phase as f64 / factor as f64, &mut taps);
            row_sums.push(taps.iter().sum());
            table.extend_from_slice(&taps);
        }
        Ok(Self {
            factor,
            kernel,
            table,
            row_sums,
        })
    }

    pub fn factor(&self) -> usize {
        self.factor
    }

    /// Interpolates `samples` onto a grid `factor` times denser, `out_len` long.
    pub fn upsample(&self, samples: &[f64], out_len: usize) -> Result<Vec<f64>> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("cannot upsample an empty sequence".into()));
        }
        let n = samples.len() as i64;
        let held = |k: i64| samples[k.clamp(0, n - 1) as usize];
        if self.factor == 1 {
            return Ok((0..out_len as i64).map(held).collect());
        }
        // odd reflection about the endpoints keeps value and slope continuous
        let at = |k: i64| {
            if k < 0 {
                2.0 * samples[0] - held(-k)
            } else if k >= n {
                2.0 * samples[(n - 1) as usize] - held(2 * (n - 1) - k)
            } else {
                samples[k as usize]
            }
        };
        let half = self.kernel.half_width as i64;
        let width = 2 * self.kernel.half_width;
        let mut out = Vec::with_capacity(out_len);
        for m in 0..out_len {
            let base = (m / self.factor) as i64;
            let phase = m % self.factor;
            let reference = at(base);
            if phase == 0 {
                out.push(reference);
                continue;
            }
            let row = &self.table[phase * width..(phase + 1) * width];
            let first = base - half + 1;
            let mut acc = 0.0;
            if first >= 0 && first + width as i64 <= n {
                let window = &samples[first as usize..first as usize + width];
                for (w, x) in row.iter().zip(window) {
                    acc += w * (x - reference);
                }
            } else {
                for (j, w) in row.iter().enumerate() {
                    acc += w * (at(first + j as i64) - reference);
                }
            }
            out.push(reference + acc / self.row_sums[phase]);
        }
        Ok(out)
    }
}

/// One-shot convenience wrapper around [`Upsampler`].
pub fn bandlimited_upsample(samples: &[f64], factor: usize, out_len: usize) -> Result<Vec<f64>> {
    Upsampler::new(factor)?.upsample(samples, out_len)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn room() -> Room {
        Room::uniform([8.0, 6.0, 4.0], 0.9).unwrap()
    }

    fn spec(kind: TrajectoryKind) -> TrajectorySpec {
        TrajectorySpec {
            kind,
            duration: 2.0,
            bandwidth_limit: 4.0,
            speed_max: 1.0,
            seed: 7,
        }
    }

    fn sine_traj(rate: f64, len: usize, freqs: &[(f64, f64)]) -> Trajectory {
        let pos = (0..len)
            .map(|n| {
                let t = n as f64 / rate;
                let x: f64 = freqs
                    .iter()
                    .map(|(f, a)| a * (2.0 * PI * f * t).sin())
                    .sum();
                [3.0 + x, 3.0, 2.0]
            })
            .collect();
        Trajectory::new(rate, pos).unwrap()
    }

    #[test]
    fn test_line_advances_one_step_per_sample() {
        let rate = 16000.0;
        let s = spec(TrajectoryKind::Line {
            start: [1.0, 3.0, 2.0],
            direction: [1.0, 0.0, 0.0],
        });
        let t = generate(&s, rate, &room(), 0.1).unwrap();
        assert_eq!(t.len(), 32000);
        for w in t.positions().windows(2) {
            assert!((w[1][0] - w[0][0] - 1.0 / rate).abs() < 1e-12);
        }
    }

    #[test]
    fn test_sine_bandwidth_is_its_frequency() {
        let s = TrajectorySpec {
            bandwidth_limit: 2.0,
            ..spec(TrajectoryKind::Sine {
                center: [4.0, 3.0, 2.0],
                direction: [0.0, 1.0, 0.0],
                amplitude: 0.05,
                frequency: 2.0,
            })
        };
        let t = generate(&s, 16000.0, &room(), 0.1).unwrap();
        let bw = bandwidth_estimate(&t, 0.99).unwrap();
        assert!((1.8..=2.2).contains(&bw), "{bw}");
    }

    #[test]
    fn test_filtered_noise_is_deterministic() {
        let s = spec(TrajectoryKind::FilteredNoise {
            center: [4.0, 3.0, 2.0],
        });
        let a = generate(&s, 1000.0, &room(), 0.2).unwrap();
        let b = generate(&s, 1000.0, &room(), 0.2).unwrap();
        assert_eq!(a, b);
        let other = generate(&TrajectorySpec { seed: 8, ..s }, 1000.0, &room(), 0.2).unwrap();
        assert_ne!(a, other);
        assert!(max_speed(&a) <= 1.0 + 1e-9);
        assert!(bandwidth_estimate(&a, 0.99).unwrap() <= 4.0);
    }

    #[test]
    fn test_waypoints_need_speed() {
        let mut s = spec(TrajectoryKind::Waypoints {
            points: vec![[1.0, 1.0, 1.0], [3.0, 2.0, 1.0]],
        });
        s.speed_max = 0.0;
        assert!(matches!(
            generate(&s, 1000.0, &room(), 0.1),
            Err(Error::InfeasibleTrajectory(_))
        ));
    }

    #[test]
    fn test_waypoints_respect_limits() {
        let s = TrajectorySpec {
            duration: 8.0,
            bandwidth_limit: 2.0,
            ..spec(TrajectoryKind::Waypoints {
                points: vec![[1.0, 1.0, 1.0], [3.0, 2.0, 1.5], [5.0, 1.0, 2.0]],
            })
        };
        let t = generate(&s, 2000.0, &room(), 0.1).unwrap();
        assert!(max_speed(&t) <= 1.0 * (1.0 + 1e-3));
        assert!(bandwidth_estimate(&t, 0.99).unwrap() <= 2.0);
    }

    #[test]
    fn test_sine_too_fast_is_rejected() {
        let s = spec(TrajectoryKind::Sine {
            center: [4.0, 3.0, 2.0],
            direction: [1.0, 0.0, 0.0],
            amplitude: 1.0,
            frequency: 1.0,
        });
        assert!(generate(&s, 1000.0, &room(), 0.1).is_err());
    }

    #[test]
    fn test_leaving_the_room_is_rejected() {
        let s = spec(TrajectoryKind::Line {
            start: [7.0, 3.0, 2.0],
            direction: [1.0, 0.0, 0.0],
        });
        assert!(generate(&s, 1000.0, &room(), 0.1).is_err());
    }

    #[test]
    fn test_velocity_examples() {
        let still = Trajectory::stationary(100.0, [1.0, 2.0, 3.0], 10).unwrap();
        assert!(velocity(&still).unwrap().iter().all(|v| *v == [0.0; 3]));

        let rate = 1000.0;
        let line = Trajectory::new(
            rate,
            (0..100).map(|n| [n as f64 / rate, 0.0, 0.0]).collect(),
        )
        .unwrap();
        for v in velocity(&line).unwrap() {
            assert!((v[0] - 1.0).abs() < 1e-9);
        }

        let (f, a) = (2.0, 0.1);
        let sine = sine_traj(16000.0, 16000, &[(f, a)]);
        let peak = velocity(&sine)
            .unwrap()
            .iter()
            .map(|v| v[0].abs())
            .fold(0.0, f64::max);
        assert!((peak - 2.0 * PI * f * a).abs() < 1e-4);
        assert!(velocity(&Trajectory::stationary(1.0, [0.0; 3], 1).unwrap()).is_err());
    }

    #[test]
    fn test_bandwidth_examples() {
        let still = Trajectory::stationary(100.0, [1.0, 2.0, 3.0], 64).unwrap();
        assert_eq!(bandwidth_estimate(&still, 0.99).unwrap(), 0.0);

        let two = sine_traj(16000.0, 32000, &[(2.0, 0.2)]);
        let bw = bandwidth_estimate(&two, 0.99).unwrap();
        assert!((1.8..=2.2).contains(&bw), "{bw}");

        let mix = sine_traj(16000.0, 32000, &[(1.0, 0.2), (3.0, 0.2)]);
        let bw = bandwidth_estimate(&mix, 0.99).unwrap();
        assert!((2.8..=3.2).contains(&bw), "{bw}");

        assert!(bandwidth_estimate(&two, 1.0).is_err());
        assert!(bandwidth_estimate(&two, 0.0).is_err());
    }

    #[test]
    fn test_line_has_zero_bandwidth() {
        let rate = 1000.0;
        let line = Trajectory::new(
            rate,
            (0..2000).map(|n| [1.0 + n as f64 / rate, 2.0, 1.0]).collect(),
        )
        .unwrap();
        assert_eq!(bandwidth_estimate(&line, 0.99).unwrap(), 0.0);
    }

    #[test]
    fn test_decimate_identity_and_dc() {
        let t = sine_traj(1000.0, 500, &[(2.0, 0.1)]);
        assert_eq!(decimate(&t, 1).unwrap(), t);
        assert!(decimate(&t, 0).is_err());

        let still = Trajectory::stationary(1000.0, [1.5, 2.5, 0.5], 1000).unwrap();
        let d = decimate(&still, 7).unwrap();
        assert!((d.rate() - 1000.0 / 7.0).abs() < 1e-12);
        assert!(d.positions().iter().all(|p| *p == [1.5, 2.5, 0.5]));
    }

    #[test]
    fn test_upsample_identity_constant_and_empty() {
        let x = vec![1.0, -2.0, 3.5, 0.25];
        assert_eq!(bandlimited_upsample(&x, 1, 4).unwrap(), x);
        let c = vec![3.7; 100];
        let y = bandlimited_upsample(&c, 8, 800).unwrap();
        assert!(y.iter().all(|v| *v == 3.7));
        assert!(bandlimited_upsample(&[], 4, 10).is_err());
        assert!(bandlimited_upsample(&x, 0, 10).is_err());
    }

    #[test]
    fn test_upsample_slow_sinusoid() {
        // 0.1 of the input Nyquist
        let factor = 16;
        let f = 0.05;
        let x: Vec<f64> = (0..400).map(|k| (2.0 * PI * f * k as f64).sin()).collect();
        let y = bandlimited_upsample(&x, factor, 400 * factor).unwrap();
        let lo = 32 * factor;
        let hi = (400 - 32) * factor;
        let (mut e, mut r) = (0.0, 0.0);
        for (m, v) in y.iter().enumerate().take(hi).skip(lo) {
            let truth = (2.0 * PI * f * m as f64 / factor as f64).sin();
            e += (v - truth).powi(2);
            r += truth * truth;
        }
        assert!((e / r).sqrt() <= 1e-3, "{}", (e / r).sqrt());
    }

    #[test]
    fn test_table_round_trip() {
        let t = sine_traj(250.0, 40, &[(2.0, 0.1)]);
        let back = Trajectory::from_table(&t.to_table()).unwrap();
        assert_eq!(back, t);
        assert!(Trajectory::from_table("rate=5\n1 2 3\n").is_err());
        assert!(Trajectory::from_table("rate_hz=5\n1 2\n").is_err());
    }
}
