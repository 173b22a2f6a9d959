//! Flat `key = value` engine configuration with dotted keys.
//!
//! ```text
//! # comment
//! room.dims = 5 6 4
//! room.reflection = 0.8
//! mic.pos = 1.5 2 1.5
//! source.kind = line
//! source.start = 2 3 1.5
//! source.direction = 1 0 0
//! synth.N = 3200
//! farrow.M = 4
//! ```
//!
//! Later assignments win, so command-line overrides are applied with
//! [`EngineConfig::set`] after the file.

use crate::error::{Error, Result};
use crate::farrow::{DEFAULT_BRANCH_LEN, DEFAULT_PASSBAND, DEFAULT_POLY_ORDER};
use crate::geom::Vec3;
use crate::room::{MicPosition, Room};
use crate::synth::{Scene, SynthesisConfig};
use crate::trajectory::{TrajectoryKind, TrajectorySpec};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub struct FarrowSpec {
    pub poly_order: usize,
    pub branch_len: usize,
    pub passband: f64,
    /// Load coefficients from a matrix file instead of designing.
    pub file: Option<PathBuf>,
}

impl Default for FarrowSpec {
    fn default() -> Self {
        Self {
            poly_order: DEFAULT_POLY_ORDER,
            branch_len: DEFAULT_BRANCH_LEN,
            passband: DEFAULT_PASSBAND,
            file: None,
        }
    }
}

/// Source path parameters as written in the file; assembled into a
/// [`TrajectorySpec`] on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub kind: String,
    pub position: Vec3,
    pub direction: Vec3,
    pub radius: f64,
    pub amplitude: f64,
    pub frequency: f64,
    pub points: Vec<Vec3>,
    pub duration: f64,
    pub bandwidth: f64,
    pub speed: f64,
    pub margin: f64,
    /// Read the path from a table instead of generating it.
    pub file: Option<PathBuf>,
}

impl Default for SourceSpec {
    fn default() -> Self {
        Self {
            kind: "static".into(),
            position: [3.5, 4.0, 1.5],
            direction: [1.0, 0.0, 0.0],
            radius: 1.0,
            amplitude: 0.5,
            frequency: 0.5,
            points: Vec::new(),
            duration: 2.0,
            bandwidth: 2.0,
            speed: 1.0,
            margin: 0.3,
            file: None,
        }
    }
}

impl SourceSpec {
    pub fn trajectory_spec(&self, seed: u64) -> Result<TrajectorySpec> {
        let p = self.position;
        let kind = match self.kind.as_str() {
            "static" => TrajectoryKind::Static { position: p },
            "line" => TrajectoryKind::Line {
                start: p,
                direction: self.direction,
            },
            "circle" => TrajectoryKind::Circle {
                center: p,
                radius: self.radius,
            },
            "sine" => TrajectoryKind::Sine {
                center: p,
                direction: self.direction,
                amplitude: self.amplitude,
                frequency: self.frequency,
            },
            "waypoints" => TrajectoryKind::Waypoints {
                points: self.points.clone(),
            },
            "noise" => TrajectoryKind::FilteredNoise { center: p },
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown source.kind `{other}` (static, line, circle, sine, waypoints, noise)"
                )))
            }
        };
        Ok(TrajectorySpec {
            kind,
            duration: self.duration,
            bandwidth_limit: self.bandwidth,
            speed_max: self.speed,
            seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub room_dims: Vec3,
    pub wall_reflection: [f64; 6],
    pub mic: Vec3,
    pub source: SourceSpec,
    pub synth: SynthesisConfig,
    pub farrow: FarrowSpec,
    pub seed: u64,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            room_dims: [5.0, 6.0, 4.0],
            wall_reflection: [0.8; 6],
            mic: [1.5, 2.0, 1.5],
            source: SourceSpec::default(),
            synth: SynthesisConfig::default(),
            farrow: FarrowSpec::default(),
            seed: 0,
            input: None,
            output: None,
        }
    }
}

fn floats(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("{key}: `{t}` is not a number")))
        })
        .collect()
}

fn float(key: &str, value: &str) -> Result<f64> {
    match floats(key, value)?.as_slice() {
        [v] => Ok(*v),
        _ => Err(Error::InvalidArgument(format!("{key}: expected one number, got `{value}`"))),
    }
}

fn vec3(key: &str, value: &str) -> Result<Vec3> {
    match floats(key, value)?.as_slice() {
        [x, y, z] => Ok([*x, *y, *z]),
        _ => Err(Error::InvalidArgument(format!("{key}: expected three numbers, got `{value}`"))),
    }
}

fn int<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("{key}: `{value}` is not a valid integer")))
}

/// Splits `key = value` lines, skipping blanks and `#` comments.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: format!("expected key = value, got `{line}`"),
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl EngineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, (k, v)) in parse_pairs(text)?.into_iter().enumerate() {
            cfg.set(&k, &v).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::parse(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(q) = p.as_mut() {
                if q.is_relative() {
                    *q = base.join(&*q);
                }
            }
        };
        fix(&mut cfg.input);
        fix(&mut cfg.output);
        fix(&mut cfg.source.file);
        fix(&mut cfg.farrow.file);
        Ok(cfg)
    }

    /// Assigns one dotted key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let s = &mut self.synth;
        let src = &mut self.source;
        match key {
            "room.dims" => self.room_dims = vec3(key, value)?,
            "room.reflection" => {
                self.wall_reflection = match floats(key, value)?.as_slice() {
                    [r] => [*r; 6],
                    v if v.len() == 6 => std::array::from_fn(|i| v[i]),
                    _ => {
                        return Err(Error::InvalidArgument(format!(
                            "{key}: expected 1 or 6 numbers, got `{value}`"
                        )))
                    }
                }
            }
            "mic.pos" => self.mic = vec3(key, value)?,
            "source.kind" => src.kind = value.trim().to_string(),
            "source.position" | "source.start" | "source.center" => {
                src.position = vec3(key, value)?
            }
            "source.direction" => src.direction = vec3(key, value)?,
            "source.radius" => src.radius = float(key, value)?,
            "source.amplitude" => src.amplitude = float(key, value)?,
            "source.frequency" => src.frequency = float(key, value)?,
            "source.points" => {
                let v = floats(key, value)?;
                if v.len() % 3 != 0 || v.is_empty() {
                    return Err(Error::InvalidArgument(format!(
                        "{key}: expected a multiple of three numbers"
                    )));
                }
                src.points = v.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
            }
            "source.duration" => src.duration = float(key, value)?,
            "source.bandwidth" => src.bandwidth = float(key, value)?,
            "source.speed" => src.speed = float(key, value)?,
            "source.margin" => src.margin = float(key, value)?,
            "source.file" => src.file = Some(PathBuf::from(value.trim())),
            "synth.rate" => s.audio_rate = float(key, value)?,
            "synth.K" => s.order_split = int(key, value)?,
            "synth.N" => s.decimation = int(key, value)?,
            "synth.max_order" => s.max_order = int(key, value)?,
            "synth.t60" => {
                s.t60 = match value.trim() {
                    "" | "none" => None,
                    v => Some(float(key, v)?),
                }
            }
            "synth.d_min" => s.d_min = float(key, value)?,
            "synth.c" => s.sound_speed = float(key, value)?,
            "synth.summation" => s.summation = value.trim().parse()?,
            "synth.modulation" => s.modulation = value.trim().parse()?,
            "synth.workers" => s.workers = int(key, value)?,
            "synth.oracle_budget" => s.oracle_budget = int(key, value)?,
            "farrow.M" => self.farrow.poly_order = int(key, value)?,
            "farrow.L" => self.farrow.branch_len = int(key, value)?,
            "farrow.alpha" => self.farrow.passband = float(key, value)?,
            "farrow.file" => self.farrow.file = Some(PathBuf::from(value.trim())),
            "seed" => self.seed = int(key, value)?,
            "input" => self.input = Some(PathBuf::from(value.trim())),
            "output" => self.output = Some(PathBuf::from(value.trim())),
            _ => return Err(Error::InvalidArgument(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    pub fn room(&self) -> Result<Room> {
        Room::new(self.room_dims, self.wall_reflection)
    }

    pub fn scene(&self) -> Result<Scene> {
        let room = self.room()?;
        let mic = MicPosition::new(&room, self.mic)?;
        Ok(Scene { room, mic })
    }

    /// Serializes every key, in a form [`EngineConfig::parse`] reads back.
    pub fn to_text(&self) -> String {
        let v = |p: Vec3| format!("{} {} {}", p[0], p[1], p[2]);
        let r = self.wall_reflection.map(|x| x.to_string()).join(" ");
        let s = &self.synth;
        let src = &self.source;
        let mut lines = vec![
            format!("room.dims = {}", v(self.room_dims)),
            format!("room.reflection = {r}"),
            format!("mic.pos = {}", v(self.mic)),
            format!("source.kind = {}", src.kind),
            format!("source.position = {}", v(src.position)),
            format!("source.direction = {}", v(src.direction)),
            format!("source.radius = {}", src.radius),
            format!("source.amplitude = {}", src.amplitude),
            format!("source.frequency = {}", src.frequency),
            format!("source.duration = {}", src.duration),
            format!("source.bandwidth = {}", src.bandwidth),
            format!("source.speed = {}", src.speed),
            format!("source.margin = {}", src.margin),
            format!("synth.rate = {}", s.audio_rate),
            format!("synth.K = {}", s.order_split),
            format!("synth.N = {}", s.decimation),
            format!("synth.max_order = {}", s.max_order),
            format!("synth.t60 = {}", s.t60.map_or("none".into(), |t| t.to_string())),
            format!("synth.d_min = {}", s.d_min),
            format!("synth.c = {}", s.sound_speed),
            format!(
                "synth.summation = {}",
                match s.summation {
                    crate::reduce::Summation::PairwiseTree => "pairwise",
                    crate::reduce::Summation::Sequential => "sequential",
                }
            ),
            format!(
                "synth.modulation = {}",
                match s.modulation {
                    crate::synth::Modulation::ReceiverTime => "receiver",
                    crate::synth::Modulation::SourceTime => "source",
                }
            ),
            format!("synth.workers = {}", s.workers),
            format!("synth.oracle_budget = {}", s.oracle_budget),
            format!("farrow.M = {}", self.farrow.poly_order),
            format!("farrow.L = {}", self.farrow.branch_len),
            format!("farrow.alpha = {}", self.farrow.passband),
            format!("seed = {}", self.seed),
        ];
        if !src.points.is_empty() {
            let pts: Vec<String> = src.points.iter().map(|p| v(*p)).collect();
            lines.push(format!("source.points = {}", pts.join(", ")));
        }
        let path = |k: &str, p: &Option<PathBuf>| p.as_ref().map(|p| format!("{k} = {}", p.display()));
        lines.extend(path("source.file", &src.file));
        lines.extend(path("farrow.file", &self.farrow.file));
        lines.extend(path("input", &self.input));
        lines.extend(path("output", &self.output));
        lines.join("\n") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_parse_basic() {
        let cfg = EngineConfig::parse(
            "# a room\nroom.dims = 8 6 3\nroom.reflection = 0.5\nsynth.N = 1600\n\nfarrow.M = 3 # cubic\n",
        )
        .unwrap();
        assert_eq!(cfg.room_dims, [8.0, 6.0, 3.0]);
        assert_eq!(cfg.wall_reflection, [0.5; 6]);
        assert_eq!(cfg.synth.decimation, 1600);
        assert_eq!(cfg.farrow.poly_order, 3);
    }

    #[test]
    fn test_later_assignment_wins() {
        let mut cfg = EngineConfig::parse("synth.K = 2\nsynth.K = 0\n").unwrap();
        assert_eq!(cfg.synth.order_split, 0);
        cfg.set("synth.K", "3").unwrap();
        assert_eq!(cfg.synth.order_split, 3);
    }

    #[test]
    fn test_errors_carry_line() {
        match EngineConfig::parse("room.dims = 1 2 3\nbogus.key = 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(EngineConfig::parse("room.dims = 1 2\n").is_err());
        assert!(EngineConfig::parse("no equals sign\n").is_err());
        assert!(EngineConfig::parse("room.reflection = 0.1 0.2\n").is_err());
    }

    #[test]
    fn test_text_round_trip() {
        let mut cfg = EngineConfig::default();
        cfg.set("room.reflection", "0.1 0.2 0.3 0.4 0.5 0.6").unwrap();
        cfg.set("source.points", "1 1 1, 2 2 2").unwrap();
        cfg.set("synth.t60", "0.4").unwrap();
        cfg.set("synth.modulation", "source").unwrap();
        cfg.set("output", "out.wav").unwrap();
        let back = EngineConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn test_source_kinds() {
        let mut src = SourceSpec::default();
        for k in ["static", "line", "circle", "sine", "waypoints", "noise"] {
            src.kind = k.into();
            assert!(src.trajectory_spec(1).is_ok());
        }
        src.kind = "spiral".into();
        assert!(src.trajectory_spec(1).is_err());
    }
}
