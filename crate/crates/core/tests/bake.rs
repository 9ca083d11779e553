mod common;

use lfprobe_core::bake::{bake_probe, derive_low_res, simulate_probe, MIN_POINT_DISTANCE};
use lfprobe_core::math::Vec3;
use lfprobe_core::octmap::{
    mean_texel_angle, oct_decode_unchecked, oct_encode_unchecked, texel_center, texel_of, Distance,
    OctMap, Rgb8,
};
use lfprobe_core::pointcloud::{
    oracle_trace, sample_point_cloud, AnalyticScene, ColoredPoint, PointCloud, Room, Workstation,
};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = ColoredPoint> {
    (
        (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0),
        (0.0f32..=1.0, 0.0f32..=1.0, 0.0f32..=1.0),
    )
        .prop_map(|((x, y, z), (r, g, b))| ColoredPoint {
            position: Vec3::new(x, y, z),
            color: [r, g, b],
        })
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    /// No point projecting to a texel is nearer than what the texel stores,
    /// and the kept color belongs to a nearest point.
    #[test]
    fn minimum_distance_rule(points in prop::collection::vec(point(), 1..300)) {
        let origin = Vec3::new(0.1, -0.2, 0.05);
        let cloud = PointCloud::new(points.clone()).unwrap();
        let (probe, _) = bake_probe(&cloud, origin, 8, 2).unwrap();
        let chain = probe.chain();
        let mut nearest = vec![f64::INFINITY; 64];
        for p in &points {
            let q = p.position - origin;
            let d = q.length();
            if d < MIN_POINT_DISTANCE {
                continue;
            }
            let uv = oct_encode_unchecked(q);
            let (i, j) = texel_of(uv.u, uv.v, 8);
            let slot = (j * 8 + i) as usize;
            nearest[slot] = nearest[slot].min(d);
        }
        for j in 0..8 {
            for i in 0..8 {
                let want = nearest[(j * 8 + i) as usize];
                let stored = chain.distance.get(i, j);
                if want.is_infinite() {
                    prop_assert!(stored.is_empty());
                    prop_assert!(chain.direction.get(i, j).is_empty());
                    continue;
                }
                prop_assert_eq!(stored, Distance::from_meters(want));
                let color = chain.irradiance.get(i, j);
                let holder = points.iter().any(|p| {
                    let q = p.position - origin;
                    let uv = oct_encode_unchecked(q);
                    q.length() == want && texel_of(uv.u, uv.v, 8) == (i, j) && Rgb8::from_unit(p.color) == color
                });
                prop_assert!(holder);
            }
        }
    }

    #[test]
    fn bake_is_order_independent(
        points in prop::collection::vec(point(), 1..200),
        seed in any::<u64>(),
    ) {
        let mut shuffled = points.clone();
        let mut rng = common::Rng::new(seed);
        for k in (1..shuffled.len()).rev() {
            shuffled.swap(k, rng.below(k + 1));
        }
        // Duplicate a point so equidistant ties occur.
        let mut tied = points.clone();
        tied.push(points[0]);
        let origin = Vec3::ZERO;
        let a = bake_probe(&PointCloud::new(points).unwrap(), origin, 16, 4).unwrap().0;
        let b = bake_probe(&PointCloud::new(shuffled).unwrap(), origin, 16, 4).unwrap().0;
        prop_assert_eq!(a.chain(), b.chain());
        let c = bake_probe(&PointCloud::new(tied.clone()).unwrap(), origin, 16, 4).unwrap().0;
        tied.reverse();
        let d = bake_probe(&PointCloud::new(tied).unwrap(), origin, 16, 4).unwrap().0;
        prop_assert_eq!(c.chain(), d.chain());
    }

    #[test]
    fn low_res_is_conservative(
        texels in prop::collection::vec(prop::option::of(0.01f64..100.0), 32 * 32),
        factor in prop::sample::select(vec![1u32, 2, 4, 8, 16, 32]),
    ) {
        let map = OctMap::from_texels(
            32,
            texels.iter().map(|t| t.map_or(Distance::EMPTY, Distance::from_meters)).collect(),
        ).unwrap();
        let lo = derive_low_res(&map, factor);
        prop_assert_eq!(lo.resolution(), 32 / factor);
        for j in 0..32 {
            for i in 0..32 {
                let block = lo.get(i / factor, j / factor);
                let t = map.get(i, j);
                if !t.is_empty() {
                    prop_assert!(block.as_f64() <= t.as_f64());
                }
            }
        }
        for bj in 0..32 / factor {
            for bi in 0..32 / factor {
                let mut min = f64::INFINITY;
                for j in 0..factor {
                    for i in 0..factor {
                        min = min.min(map.get(bi * factor + i, bj * factor + j).as_f64());
                    }
                }
                prop_assert_eq!(lo.get(bi, bj).as_f64(), min);
            }
        }
    }
}

#[test]
fn single_point_example() {
    let cloud = common::cloud(&[(Vec3::new(0.0, 2.0, 0.0), [1.0, 0.0, 0.0])]);
    let (probe, report) = bake_probe(&cloud, Vec3::ZERO, 4, 1).unwrap();
    let chain = probe.chain();
    assert_eq!(report.filled_texels, 1);
    // (0, 1, 0) encodes to uv (0.5, 0.5): texel (2, 2).
    assert_eq!(chain.distance.get(2, 2).meters(), Some(2.0));
    assert_eq!(chain.irradiance.get(2, 2), Rgb8([255, 0, 0]));
    assert_eq!(chain.distance.count_empty(), 15);
}

#[test]
fn nearer_of_two_collinear_points() {
    let cloud = common::cloud(&[
        (Vec3::new(0.0, 0.0, 3.0), [0.0, 1.0, 0.0]),
        (Vec3::new(0.0, 0.0, 2.0), [0.0, 0.0, 1.0]),
    ]);
    let (probe, _) = bake_probe(&cloud, Vec3::ZERO, 16, 4).unwrap();
    let uv = oct_encode_unchecked(Vec3::Z);
    let (i, j) = texel_of(uv.u, uv.v, 16);
    assert_eq!(probe.chain().distance.get(i, j).meters(), Some(2.0));
    assert_eq!(probe.chain().irradiance.get(i, j), Rgb8([0, 0, 255]));
}

#[test]
fn random_full_resolution_map_mips_conservatively() {
    let mut rng = common::Rng::new(11);
    let res = 2048;
    let texels = (0..res * res)
        .map(|_| {
            if rng.unit() < 0.3 {
                Distance::EMPTY
            } else {
                Distance::from_meters(rng.range(0.1, 20.0))
            }
        })
        .collect();
    let map = OctMap::from_texels(res, texels).unwrap();
    let lo = derive_low_res(&map, 16);
    for j in 0..res {
        for i in 0..res {
            let t = map.get(i, j);
            if !t.is_empty() {
                assert!(lo.get(i / 16, j / 16).as_f64() <= t.as_f64());
            }
        }
    }
}

struct OracleMatch {
    filled: u64,
    matched: u64,
    /// Mismatched texels whose stored point lies in front of the visible
    /// surface.
    in_front: u64,
    shell_filled: u64,
    shell_matched: u64,
}

/// Compares every filled texel with the oracle along the texel center.
fn match_room_bake(density: f64) -> OracleMatch {
    let scene = AnalyticScene::room();
    let cloud = sample_point_cloud(&scene, density, 1);
    let (probe, _) = bake_probe(&cloud, Room::CENTER, 2048, 128).unwrap();
    let chain = probe.chain();
    let mut m = OracleMatch {
        filled: 0,
        matched: 0,
        in_front: 0,
        shell_filled: 0,
        shell_matched: 0,
    };
    for j in 0..2048 {
        for i in 0..2048 {
            let Some(r) = chain.distance.get(i, j).meters() else {
                continue;
            };
            let c = texel_center(i, j, 2048);
            let dir = oct_decode_unchecked(c.u, c.v);
            let hit = oracle_trace(&scene, Room::CENTER, dir).expect("closed room");
            let ok = (r - hit.t).abs() <= 0.02 * hit.t;
            m.filled += 1;
            m.matched += ok as u64;
            m.in_front += (!ok && r < hit.t) as u64;
            if hit.primitive == 0 {
                m.shell_filled += 1;
                m.shell_matched += ok as u64;
            }
        }
    }
    m
}

#[test]
fn room_texel_distances_match_the_oracle() {
    // At 1e4 points per m^2 a 2048^2 texel on the nearby boxes rarely holds
    // a sample of the visible face, so some of those texels keep a point
    // from behind it (see-through). Walls have nothing behind them.
    let sparse = match_room_bake(1e4);
    let share = sparse.matched as f64 / sparse.filled as f64;
    let shell = sparse.shell_matched as f64 / sparse.shell_filled as f64;
    println!(
        "1e4: {} filled texels, {:.2}% within 2% of the oracle, walls {:.2}%",
        sparse.filled,
        100.0 * share,
        100.0 * shell
    );
    assert!(shell >= 0.95, "{shell}");
    // Points in front of the oracle surface only occur at silhouettes.
    assert!(sparse.in_front as f64 <= 1e-3 * sparse.filled as f64, "{}", sparse.in_front);

    let dense = match_room_bake(3e4);
    let share = dense.matched as f64 / dense.filled as f64;
    println!("3e4: {} filled texels, {:.2}% within 2%", dense.filled, 100.0 * share);
    assert!(share >= 0.95, "{share}");
}

#[test]
fn stored_directions_stay_within_their_texel() {
    let scene = AnalyticScene::room();
    let cloud = sample_point_cloud(&scene, 1e4, 2);
    let res = 256;
    let (probe, _) = bake_probe(&cloud, Room::CENTER, res, 16).unwrap();
    let chain = probe.chain();
    let width = mean_texel_angle(res);
    for j in 0..res {
        for i in 0..res {
            if chain.distance.get(i, j).is_empty() {
                continue;
            }
            // Stored directions are incoming: from the point to the probe.
            let toward_point = -chain.incoming_direction(i, j).unwrap();
            let c = texel_center(i, j, res);
            let center = oct_decode_unchecked(c.u, c.v);
            assert!(common::angle(toward_point, center) <= 2.0 * width);
        }
    }
}

#[test]
fn simulated_probe_matches_a_baked_one() {
    let cloud = sample_point_cloud(&AnalyticScene::room(), 2e3, 5);
    let origin = Vec3::new(0.8, 1.1, 4.9);
    let (a, ra) = bake_probe(&cloud, origin, 256, 16).unwrap();
    let (b, rb) = simulate_probe(&cloud, origin, 256, 16).unwrap();
    assert_eq!(a, b);
    assert_eq!(ra, rb);
}

#[test]
fn probe_in_front_of_an_occluder_sees_its_near_face() {
    let scene = AnalyticScene::workstation();
    let cloud = sample_point_cloud(&scene, 3e4, 9);
    let origin = Vec3::new(1.5, 1.05, Workstation::COMPUTER.min.z - 1.0);
    let res = 256;
    let (probe, _) = simulate_probe(&cloud, origin, res, 32).unwrap();
    let chain = probe.chain();
    let (mut toward, mut seen) = (0, 0);
    for j in 0..res {
        for i in 0..res {
            let c = texel_center(i, j, res);
            let dir = oct_decode_unchecked(c.u, c.v);
            let hit = oracle_trace(&scene, origin, dir).unwrap();
            if hit.primitive != Workstation::COMPUTER_PRIMITIVE {
                continue;
            }
            toward += 1;
            if let Some(r) = chain.distance.get(i, j).meters() {
                let near_face = hit.face == 4 && (r - hit.t).abs() <= 0.02 * hit.t;
                if near_face && r < Workstation::COMPUTER.max.z - origin.z {
                    seen += 1;
                }
            }
        }
    }
    println!("occluder texels: {seen}/{toward} show the near face");
    assert!(toward > 1000);
    assert!(seen as f64 >= 0.95 * toward as f64);
}

#[test]
fn eight_simulated_probes_cover_the_room() {
    let cloud = sample_point_cloud(&AnalyticScene::room(), 1e5, 3);
    let res = 256;
    for k in 0..2 {
        for j in 0..2 {
            for i in 0..2 {
                let origin = Vec3::new(0.75, 0.5, 2.25) + Vec3::new(i as f64, j as f64, k as f64) * 1.5;
                let (probe, report) = simulate_probe(&cloud, origin, res, 32).unwrap();
                assert!(!report.origin_outside_bounds);
                let coverage = probe.coverage();
                println!("probe {origin:?}: {:.1}% filled", 100.0 * coverage);
                assert!(coverage >= 0.9, "{origin:?}: {coverage}");
            }
        }
    }
}
