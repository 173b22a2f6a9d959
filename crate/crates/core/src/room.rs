//! Shoebox room and its image-source lattice.
//!
//! Every image is addressed per axis by a lattice index `n` and a parity bit
//! `q`. Along axis `k` the image coordinate is `2·n·L_k ± x_k` (minus when the
//! parity bit is set). The image reflects `|n − q|` times off the wall at 0 and
//! `|n|` times off the wall at `L_k`, which fixes both its order and its
//! combined reflection attenuation.

use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use std::f64::consts::PI;

/// Wall order used by [`Room::wall_reflection`].
pub const WALLS: [&str; 6] = ["-x", "+x", "-y", "+y", "-z", "+z"];

/// Shoebox geometry with one real amplitude reflection coefficient per wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Room {
    dims: Vec3,
    wall_reflection: [f64; 6],
}

impl Room {
    pub fn new(dims: Vec3, wall_reflection: [f64; 6]) -> Result<Self> {
        if !dims.iter().all(|d| d.is_finite() && *d > 0.0) {
            return Err(Error::InvalidRoom(format!(
                "dimensions must be finite and positive, got {dims:?}"
            )));
        }
        if !wall_reflection.iter().all(|r| *r > 0.0 && *r <= 1.0) {
            return Err(Error::InvalidRoom(format!(
                "wall reflection coefficients must lie in (0, 1], got {wall_reflection:?}"
            )));
        }
        Ok(Self {
            dims,
            wall_reflection,
        })
    }

    /// Room with the same reflection coefficient on all six walls.
    pub fn uniform(dims: Vec3, reflection: f64) -> Result<Self> {
        Self::new(dims, [reflection; 6])
    }

    pub fn dims(&self) -> Vec3 {
        self.dims
    }

    /// Coefficients in [`WALLS`] order.
    pub fn wall_reflection(&self) -> [f64; 6] {
        self.wall_reflection
    }

    pub fn volume(&self) -> f64 {
        self.dims.iter().product()
    }

    /// True when `pos` is strictly inside the room.
    pub fn contains(&self, pos: Vec3) -> bool {
        (0..3).all(|k| pos[k] > 0.0 && pos[k] < self.dims[k])
    }

    /// True when `pos` keeps at least `margin` from every wall.
    pub fn contains_with_margin(&self, pos: Vec3, margin: f64) -> bool {
        (0..3).all(|k| pos[k] >= margin && pos[k] <= self.dims[k] - margin)
    }
}

/// Receiver position, validated to be strictly inside its room.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicPosition {
    pos: Vec3,
}

impl MicPosition {
    pub fn new(room: &Room, pos: Vec3) -> Result<Self> {
        if !geom::is_finite(pos) || !room.contains(pos) {
            return Err(Error::InvalidArgument(format!(
                "microphone {pos:?} is not strictly inside room {:?}",
                room.dims()
            )));
        }
        Ok(Self { pos })
    }

    pub fn pos(&self) -> Vec3 {
        self.pos
    }
}

/// One mirrored source of the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageSourceSpec {
    pub lattice: [i32; 3],
    pub parity: [bool; 3],
    /// Product of the wall coefficients over all reflections.
    pub beta: f64,
    /// Total number of reflections.
    pub order: u32,
}

impl ImageSourceSpec {
    /// The direct path.
    pub fn direct() -> Self {
        Self {
            lattice: [0; 3],
            parity: [false; 3],
            beta: 1.0,
            order: 0,
        }
    }

    /// Builds the spec for a lattice/parity pair, deriving order and beta.
    pub fn new(room: &Room, lattice: [i32; 3], parity: [bool; 3]) -> Self {
        let r = room.wall_reflection();
        let mut beta = 1.0;
        let mut order = 0;
        for k in 0..3 {
            let (low, high) = wall_hits(lattice[k], parity[k]);
            order += low + high;
            beta *= r[2 * k].powi(low as i32) * r[2 * k + 1].powi(high as i32);
        }
        Self {
            lattice,
            parity,
            beta,
            order,
        }
    }

    /// Reflection counts per wall, in [`WALLS`] order.
    pub fn wall_hits(&self) -> [u32; 6] {
        let mut hits = [0; 6];
        for k in 0..3 {
            let (low, high) = wall_hits(self.lattice[k], self.parity[k]);
            hits[2 * k] = low;
            hits[2 * k + 1] = high;
        }
        hits
    }
}

/// Reflections off the low (at 0) and high (at L) wall of one axis.
fn wall_hits(n: i32, parity: bool) -> (u32, u32) {
    let q = i32::from(parity);
    ((n - q).unsigned_abs(), n.unsigned_abs())
}

/// Every image with order ≤ `max_order`, each exactly once.
///
/// Sorted by ascending order, then lexicographically by lattice index and
/// parity (`false < true`). The direct source is always first.
pub fn enumerate_images(room: &Room, max_order: u32) -> Vec<ImageSourceSpec> {
    let m = max_order as i32;
    // (n, parity, axis order) for one axis
    let axis: Vec<(i32, bool, u32)> = (-m..=m)
        .flat_map(|n| [false, true].map(|p| (n, p)))
        .filter_map(|(n, p)| {
            let (lo, hi) = wall_hits(n, p);
            (lo + hi <= max_order).then_some((n, p, lo + hi))
        })
        .collect();

    let mut out = Vec::new();
    for &(nx, px, ox) in &axis {
        for &(ny, py, oy) in &axis {
            if ox + oy > max_order {
                continue;
            }
            for &(nz, pz, oz) in &axis {
                if ox + oy + oz <= max_order {
                    out.push(ImageSourceSpec::new(room, [nx, ny, nz], [px, py, pz]));
                }
            }
        }
    }
    out.sort_by(|a, b| {
        a.order
            .cmp(&b.order)
            .then(a.lattice.cmp(&b.lattice))
            .then(a.parity.cmp(&b.parity))
    });
    out
}

/// Position of the image of `source_pos`. Affine in `source_pos`.
#[inline]
pub fn image_position(spec: &ImageSourceSpec, source_pos: Vec3, room: &Room) -> Vec3 {
    let dims = room.dims();
    let mut out = [0.0; 3];
    for k in 0..3 {
        let s = if spec.parity[k] {
            -source_pos[k]
        } else {
            source_pos[k]
        };
        out[k] = 2.0 * f64::from(spec.lattice[k]) * dims[k] + s;
    }
    out
}

/// Unclamped Euclidean distance from the image to the microphone.
#[inline]
pub fn image_distance(
    spec: &ImageSourceSpec,
    source_pos: Vec3,
    mic: &MicPosition,
    room: &Room,
) -> f64 {
    geom::distance(image_position(spec, source_pos, room), mic.pos())
}

/// Largest distance from the microphone to the image of any point in the box
/// `[lo, hi]`. The mirror map sends boxes to boxes, so the bound is attained
/// at a corner.
pub fn max_image_distance(
    spec: &ImageSourceSpec,
    lo: Vec3,
    hi: Vec3,
    mic: &MicPosition,
    room: &Room,
) -> f64 {
    let a = image_position(spec, lo, room);
    let b = image_position(spec, hi, room);
    let m = mic.pos();
    let far: Vec3 = std::array::from_fn(|k| (a[k] - m[k]).abs().max((b[k] - m[k]).abs()));
    geom::norm(far)
}

/// Spherical spreading with wall losses: `beta / (4π·distance)`.
pub fn attenuation(beta: f64, distance: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::Domain(format!(
            "attenuation needs a positive distance, got {distance}"
        )));
    }
    Ok(beta / (4.0 * PI * distance))
}

/// Number of images whose path length fits within `c·t60`.
///
/// Path lengths are taken for source and microphone at the room centre, where
/// the image with per-axis indices `(i, j, k)` sits at `(i·Lx, j·Ly, k·Lz)`.
/// This is the lattice-point count of an ellipsoid in index space and grows
/// as `(4/3)π(c·t60)³ / V`. Meant for budgeting, not for enumeration.
pub fn estimate_image_count(room: &Room, t60: f64, c: f64) -> Result<u64> {
    if !(t60 > 0.0) || !(c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t60 and c must be positive, got t60={t60}, c={c}"
        )));
    }
    let radius = c * t60;
    let r2 = radius * radius;
    let [lx, ly, lz] = room.dims();
    let imax = (radius / lx).floor() as i64;
    let mut count: u64 = 0;
    for i in -imax..=imax {
        let x = i as f64 * lx;
        let rest_x = r2 - x * x;
        if rest_x < 0.0 {
            continue;
        }
        let jmax = (rest_x.sqrt() / ly).floor() as i64;
        for j in -jmax..=jmax {
            let y = j as f64 * ly;
            let rest = rest_x - y * y;
            if rest < 0.0 {
                continue;
            }
            let kmax = (rest.sqrt() / lz).floor() as u64;
            count += 2 * kmax + 1;
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn room() -> Room {
        Room::new([5.0, 6.0, 4.0], [0.9, 0.8, 0.7, 0.6, 0.5, 0.4]).unwrap()
    }

    #[test]
    fn test_room_validation() {
        assert!(Room::uniform([0.0, 1.0, 1.0], 0.5).is_err());
        assert!(Room::uniform([1.0, 1.0, 1.0], 0.0).is_err());
        assert!(Room::uniform([1.0, 1.0, 1.0], 1.5).is_err());
        assert!(Room::uniform([1.0, 1.0, 1.0], 1.0).is_ok());
    }

    #[test]
    fn test_mic_must_be_inside() {
        let r = room();
        assert!(MicPosition::new(&r, [1.0, 1.0, 1.0]).is_ok());
        assert!(MicPosition::new(&r, [0.0, 1.0, 1.0]).is_err());
        assert!(MicPosition::new(&r, [1.0, 6.0, 1.0]).is_err());
    }

    #[test]
    fn test_order_zero_is_direct() {
        let images = enumerate_images(&room(), 0);
        assert_eq!(images, vec![ImageSourceSpec::direct()]);
    }

    #[test]
    fn test_order_one_has_seven_images() {
        let images = enumerate_images(&room(), 1);
        assert_eq!(images.len(), 7);
        assert_eq!(images[0], ImageSourceSpec::direct());
        // each first-order image hits exactly one distinct wall
        let mut walls: Vec<usize> = images[1..]
            .iter()
            .map(|s| {
                let hits = s.wall_hits();
                assert_eq!(hits.iter().sum::<u32>(), 1);
                hits.iter().position(|&h| h == 1).unwrap()
            })
            .collect();
        walls.sort();
        assert_eq!(walls, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn test_unit_walls_give_unit_beta() {
        let r = Room::uniform([3.0, 4.0, 5.0], 1.0).unwrap();
        assert!(enumerate_images(&r, 3).iter().all(|s| s.beta == 1.0));
    }

    #[test]
    fn test_first_order_beta_matches_wall() {
        let r = room();
        let coeffs = r.wall_reflection();
        for s in enumerate_images(&r, 1).iter().skip(1) {
            let wall = s.wall_hits().iter().position(|&h| h == 1).unwrap();
            assert_eq!(s.beta, coeffs[wall]);
        }
    }

    #[test]
    fn test_ordering_is_sorted() {
        let images = enumerate_images(&room(), 3);
        for w in images.windows(2) {
            let key = |s: &ImageSourceSpec| (s.order, s.lattice, s.parity);
            assert!(key(&w[0]) < key(&w[1]));
        }
    }

    #[test]
    fn test_image_position_examples() {
        let r = room();
        let src = [1.0, 2.0, 1.0];
        assert_eq!(image_position(&ImageSourceSpec::direct(), src, &r), src);
        let mirror = ImageSourceSpec::new(&r, [0, 0, 0], [true, false, false]);
        assert_eq!(image_position(&mirror, src, &r), [-1.0, 2.0, 1.0]);
        let shifted = ImageSourceSpec::new(&r, [1, 0, 0], [false; 3]);
        assert_eq!(image_position(&shifted, src, &r)[0], 11.0);
    }

    #[test]
    fn test_image_distance_triangle() {
        let r = Room::uniform([10.0, 10.0, 10.0], 1.0).unwrap();
        let mic = MicPosition::new(&r, [1.0, 1.0, 1.0]).unwrap();
        let d = image_distance(&ImageSourceSpec::direct(), [4.0, 5.0, 1.0], &mic, &r);
        assert_eq!(d, 5.0);
        let same = image_distance(&ImageSourceSpec::direct(), [1.0, 1.0, 1.0], &mic, &r);
        assert_eq!(same, 0.0);
    }

    #[test]
    fn test_attenuation_examples() {
        assert!((attenuation(1.0, 1.0 / (4.0 * PI)).unwrap() - 1.0).abs() < 1e-15);
        assert!((attenuation(0.5, 2.0).unwrap() - 0.019894367886486918).abs() < 1e-15);
        assert!((attenuation(1.0, 5.0).unwrap() - 0.015915494309189534).abs() < 1e-15);
        assert!(attenuation(1.0, 0.0).is_err());
        assert!(attenuation(1.0, -1.0).is_err());
    }

    #[test]
    fn test_max_image_distance_bounds_corners() {
        let r = room();
        let mic = MicPosition::new(&r, [2.0, 3.0, 1.5]).unwrap();
        let lo = [1.0, 1.0, 1.0];
        let hi = [2.0, 2.5, 1.2];
        for s in enumerate_images(&r, 2) {
            let bound = max_image_distance(&s, lo, hi, &mic, &r);
            for corner in 0..8 {
                let p = std::array::from_fn(|k| if corner >> k & 1 == 1 { hi[k] } else { lo[k] });
                assert!(image_distance(&s, p, &mic, &r) <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn test_tiny_t60_counts_direct_only() {
        let r = room();
        assert_eq!(estimate_image_count(&r, 1e-3, 343.0).unwrap(), 1);
        assert!(estimate_image_count(&r, 0.0, 343.0).is_err());
    }
}
