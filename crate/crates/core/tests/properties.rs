use movsrc::farrow::{self, DelaySplit, DesignGrid};
use movsrc::room::{self, ImageSourceSpec, MicPosition, Room};
use movsrc::trajectory::{self, Trajectory, TrajectoryKind, TrajectorySpec};
use proptest::prelude::*;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

fn default_filter() -> &'static movsrc::FarrowFilter {
    static F: OnceLock<movsrc::FarrowFilter> = OnceLock::new();
    F.get_or_init(movsrc::FarrowFilter::default)
}

fn cubic_filter() -> &'static movsrc::FarrowFilter {
    static F: OnceLock<movsrc::FarrowFilter> = OnceLock::new();
    F.get_or_init(|| farrow::design(3, 8, 0.8, DesignGrid::default()).unwrap())
}

/// Every image reachable with at most `m` plane reflections, found by
/// breadth-first search over reflection words. Keys are exact positions;
/// each maps to (order, hits per wall) of its shortest word.
fn reflection_closure(dims: [f64; 3], src: [f64; 3], m: u32) -> HashMap<[u64; 3], (u32, [u32; 6])> {
    let key = |p: [f64; 3]| p.map(f64::to_bits);
    let mut seen = HashMap::new();
    seen.insert(key(src), (0, [0; 6]));
    let mut frontier = vec![(src, [0u32; 6])];
    for order in 1..=m {
        let mut next = Vec::new();
        for (p, hits) in &frontier {
            for wall in 0..6 {
                let k = wall / 2;
                let mut q = *p;
                // reflect across the plane x_k = 0 or x_k = L_k of the
                // unfolded room the point currently sits in
                let cell = (p[k] / dims[k]).floor();
                let plane = if wall % 2 == 0 { cell * dims[k] } else { (cell + 1.0) * dims[k] };
                q[k] = 2.0 * plane - p[k];
                if seen.contains_key(&key(q)) {
                    continue;
                }
                // parity of the unfolded cell decides which physical wall
                // the plane is
                let even = (cell as i64).rem_euclid(2) == 0;
                let physical = match (wall % 2 == 0, even) {
                    (true, true) | (false, false) => 2 * k,
                    _ => 2 * k + 1,
                };
                let mut h = *hits;
                h[physical] += 1;
                seen.insert(key(q), (order, h));
                next.push((q, h));
            }
        }
        frontier = next;
    }
    seen
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn test_mirror_involution(
        l in 1.0f64..20.0, u in 0.01f64..0.99, axis in 0usize..3, high in any::<bool>()
    ) {
        let r = Room::uniform([l, l + 1.0, l + 2.0], 0.5).unwrap();
        let dims = r.dims();
        let mut p = [dims[0] / 2.0, dims[1] / 2.0, dims[2] / 2.0];
        p[axis] = u * dims[axis];
        let mut lattice = [0; 3];
        let mut parity = [false; 3];
        lattice[axis] = i32::from(high);
        parity[axis] = true;
        let spec = ImageSourceSpec::new(&r, lattice, parity);
        prop_assert_eq!(spec.order, 1);
        let back = room::image_position(&spec, room::image_position(&spec, p, &r), &r);
        for k in 0..3 {
            prop_assert!((back[k] - p[k]).abs() <= 4.0 * f64::EPSILON * dims[k].max(1.0));
        }
    }

    #[test]
    fn test_beta_monotone_in_reflection(
        coeffs in prop::array::uniform6(0.05f64..0.95),
        wall in 0usize..6,
        bump in 0.0f64..0.05,
        m in 0u32..4
    ) {
        let r = Room::new([4.0, 5.0, 3.0], coeffs).unwrap();
        let mut up = coeffs;
        up[wall] += bump;
        let r2 = Room::new([4.0, 5.0, 3.0], up).unwrap();
        let a = room::enumerate_images(&r, m);
        let b = room::enumerate_images(&r2, m);
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x.lattice, y.lattice);
            prop_assert!(y.beta >= x.beta);
        }
    }

    #[test]
    fn test_enumeration_matches_reflection_search(
        dims in prop::array::uniform3(2u32..9),
        frac in prop::array::uniform3(1u32..8),
        coeffs in prop::array::uniform6(0.1f64..1.0),
        m in 0u32..4
    ) {
        let dims = dims.map(f64::from);
        // eighths of the room, never on a wall
        let src = [0, 1, 2].map(|k| dims[k] * f64::from(frac[k]) / 8.0);
        let r = Room::new(dims, coeffs).unwrap();
        let images = room::enumerate_images(&r, m);
        let oracle = reflection_closure(dims, src, m);
        prop_assert_eq!(images.len(), oracle.len());
        let expected = (2 * m + 1) * (2 * m * m + 2 * m + 3) / 3;
        prop_assert_eq!(images.len() as u32, expected);
        for spec in &images {
            let p = room::image_position(spec, src, &r);
            let found = oracle.get(&p.map(f64::to_bits));
            prop_assert!(found.is_some(), "image {:?} not reachable", spec);
            let (order, hits) = *found.unwrap();
            prop_assert_eq!(order, spec.order);
            prop_assert_eq!(hits, spec.wall_hits());
            let beta: f64 = (0..6).map(|w| coeffs[w].powi(hits[w] as i32)).product();
            prop_assert!((beta - spec.beta).abs() <= 1e-14);
        }
    }

    #[test]
    fn test_direct_distance_translation_invariant(
        s in prop::array::uniform3(1.0f64..4.0),
        m in prop::array::uniform3(1.0f64..4.0),
        t in prop::array::uniform3(-0.9f64..0.9)
    ) {
        let r = Room::uniform([5.0, 5.0, 5.0], 0.5).unwrap();
        let direct = ImageSourceSpec::direct();
        let mic = MicPosition::new(&r, m).unwrap();
        let shifted = MicPosition::new(&r, [m[0] + t[0], m[1] + t[1], m[2] + t[2]]).unwrap();
        let d0 = room::image_distance(&direct, s, &mic, &r);
        let d1 = room::image_distance(&direct, [s[0] + t[0], s[1] + t[1], s[2] + t[2]], &shifted, &r);
        prop_assert!((d0 - d1).abs() <= 1e-12);
    }

    #[test]
    fn test_horner_matches_power_sum(x in prop::collection::vec(-1.0f64..1.0, 64..256), mu in 0.0f64..1.0) {
        for f in [default_filter(), cubic_filter()] {
            let streams = farrow::branch_filter(&x, f);
            for idx in 0..streams.len() {
                let v = streams.at(idx);
                let direct: f64 = v.iter().enumerate().map(|(k, c)| c * mu.powi(k as i32)).sum();
                let split = DelaySplit { integer_part: 0, fractional_part: mu };
                let horner = farrow::eval(&streams, idx as i64, split);
                let scale = v.iter().fold(0.0f64, |a, c| a.max(c.abs()));
                prop_assert!((horner - direct).abs() <= 1e-12 * scale.max(1e-300));
            }
        }
    }

    #[test]
    fn test_constant_delay_linear_and_shift_invariant(
        x in prop::collection::vec(-1.0f64..1.0, 100..300),
        tau in 3.0f64..40.0,
        a in -4.0f64..4.0,
        shift in 1usize..20
    ) {
        let f = cubic_filter();
        let taus = vec![tau; x.len() + shift];
        let y = farrow::delay_stream(&x, f, &taus).unwrap();
        let ax: Vec<f64> = x.iter().map(|v| a * v).collect();
        let ay = farrow::delay_stream(&ax, f, &taus).unwrap();
        for (p, q) in ay.iter().zip(&y) {
            prop_assert!((p - a * q).abs() <= 1e-12 * (1.0 + q.abs()));
        }
        let mut sx = vec![0.0; shift];
        sx.extend_from_slice(&x);
        let sy = farrow::delay_stream(&sx, f, &taus).unwrap();
        for n in 0..x.len() {
            prop_assert!((sy[n + shift] - y[n]).abs() <= 1e-12);
        }
    }

    #[test]
    fn test_shared_branch_streams(x in prop::collection::vec(-1.0f64..1.0, 50..200), t1 in 4.0f64..30.0, t2 in 4.0f64..30.0) {
        let f = cubic_filter();
        let s1 = farrow::branch_filter(&x, f);
        let s2 = farrow::branch_filter(&x, f);
        prop_assert_eq!(&s1, &s2);
        for (t, y) in [(t1, farrow::delay_stream(&x, f, &vec![t1; x.len()]).unwrap()),
                       (t2, farrow::delay_stream(&x, f, &vec![t2; x.len()]).unwrap())] {
            let split = farrow::split_delay(t, f).unwrap();
            for (n, v) in y.iter().enumerate() {
                prop_assert_eq!(v.to_bits(), farrow::eval(&s1, n as i64, split).to_bits());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn test_decimate_upsample_round_trip(
        n_pow in 2u32..7, frac in 0.05f64..1.0, amp in 0.01f64..0.5, phase in 0.0f64..std::f64::consts::TAU
    ) {
        let factor = 1usize << n_pow;
        let rate = 16000.0;
        let f0 = frac * 0.4 * rate / factor as f64;
        let len = 400 * factor;
        let pos: Vec<[f64; 3]> = (0..len)
            .map(|n| {
                let t = n as f64 / rate;
                [2.0 + amp * (2.0 * PI * f0 * t + phase).sin(), 3.0, 1.0 + 0.3 * amp * (2.0 * PI * 0.7 * f0 * t).cos()]
            })
            .collect();
        let traj = Trajectory::new(rate, pos).unwrap();
        let bw = trajectory::bandwidth_estimate(&traj, 0.99).unwrap();
        prop_assume!(bw <= 0.4 * rate / factor as f64);
        let coarse = trajectory::decimate(&traj, factor).unwrap();
        let back: Vec<Vec<f64>> = (0..3)
            .map(|k| {
                let c: Vec<f64> = coarse.positions().iter().map(|p| p[k]).collect();
                trajectory::bandlimited_upsample(&c, factor, len).unwrap()
            })
            .collect();
        let edge = 40 * factor;
        let (mut err, mut sig) = (0.0, 0.0);
        for (n, p) in traj.positions().iter().enumerate().take(len - edge).skip(edge) {
            for k in 0..3 {
                err += (back[k][n] - p[k]).powi(2);
                sig += p[k].powi(2);
            }
        }
        prop_assert!((err / sig).sqrt() <= 1e-3, "relative RMS {}", (err / sig).sqrt());
    }

    #[test]
    fn test_generated_speed_bounded(seed in any::<u64>(), speed in 0.1f64..2.0, bw in 0.5f64..4.0) {
        let r = Room::uniform([6.0, 5.0, 3.0], 0.5).unwrap();
        let spec = TrajectorySpec {
            kind: TrajectoryKind::FilteredNoise { center: [3.0, 2.5, 1.5] },
            duration: 3.0,
            bandwidth_limit: bw,
            speed_max: speed,
            seed,
        };
        let a = trajectory::generate(&spec, 8000.0, &r, 0.3).unwrap();
        prop_assert!(trajectory::max_speed(&a) <= speed * (1.0 + 1e-3));
        let b = trajectory::generate(&spec, 8000.0, &r, 0.3).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn test_bandwidth_offset_invariant(
        f0 in 0.2f64..20.0, offset in prop::array::uniform3(-50.0f64..50.0)
    ) {
        let rate = 1000.0;
        let pos: Vec<[f64; 3]> = (0..4000)
            .map(|n| {
                let t = n as f64 / rate;
                [(2.0 * PI * f0 * t).sin(), 0.5 * (2.0 * PI * 0.5 * f0 * t).cos(), 0.0]
            })
            .collect();
        let moved: Vec<[f64; 3]> = pos
            .iter()
            .map(|p| [p[0] + offset[0], p[1] + offset[1], p[2] + offset[2]])
            .collect();
        let a = trajectory::bandwidth_estimate(&Trajectory::new(rate, pos).unwrap(), 0.99).unwrap();
        let b = trajectory::bandwidth_estimate(&Trajectory::new(rate, moved).unwrap(), 0.99).unwrap();
        prop_assert_eq!(a, b);
    }
}
