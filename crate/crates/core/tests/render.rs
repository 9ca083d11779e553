mod common;

use common::Rng;
use lfprobe_core::bake::{bake_probe, ProbeData};
use lfprobe_core::math::Vec3;
use lfprobe_core::octmap::{oct_encode, texel_of, Rgb8};
use lfprobe_core::pointcloud::{sample_point_cloud, AnalyticScene, Room};
use lfprobe_core::render::{
    color_edge_mask, mse, psnr, render, render_oracle, Camera, Frame, FrameStats, SingleProbe,
    MISS_COLOR,
};
use lfprobe_core::trace::{TraceConfig, TraceStatus};

fn room_probe(density: f64, res: u32) -> ProbeData {
    let cloud = sample_point_cloud(&AnalyticScene::room(), density, 3);
    bake_probe(&cloud, Room::CENTER, res, res / 16).unwrap().0
}

fn tracer(probe: &ProbeData) -> SingleProbe<'_> {
    SingleProbe {
        probe,
        config: TraceConfig::default(),
    }
}

fn flat(width: u32, height: u32, px: Vec<Rgb8>) -> Frame {
    let n = px.len();
    Frame {
        width,
        height,
        pixels: px,
        status: vec![TraceStatus::Hit; n],
        stats: FrameStats::default(),
    }
}

#[test]
fn frames_do_not_depend_on_the_thread_count() {
    let probe = room_probe(1e4, 256);
    let cam = Camera::look_at(
        Vec3::new(1.0, 1.0, 2.0),
        Vec3::new(2.0, 0.8, 5.0),
        Vec3::Y,
        60.0,
        80,
        60,
    )
    .unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| render(&cam, &tracer(&probe)))
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a.pixels, b.pixels);
    assert_eq!(a.status, b.status);
    assert_eq!(a.stats.texel_fetches, b.stats.texel_fetches);
}

#[test]
fn center_pixel_looks_forward() {
    let cam = Camera::look_at(
        Vec3::new(0.3, -2.0, 1.0),
        Vec3::new(4.0, 1.0, -2.0),
        Vec3::Y,
        75.0,
        33,
        17,
    )
    .unwrap();
    let ray = cam.ray(16, 8);
    assert!((ray.dir - cam.forward()).length() < 1e-12);
    assert_eq!(ray.origin, cam.eye());
}

#[test]
fn eye_at_the_probe_reads_the_map_directly() {
    let probe = room_probe(1e4, 256);
    let chain = probe.chain();
    let cam = Camera::look_at(
        Room::CENTER,
        Room::CENTER + Vec3::new(0.3, -0.5, 1.0),
        Vec3::Y,
        100.0,
        96,
        96,
    )
    .unwrap();
    let frame = render(&cam, &tracer(&probe));
    for y in 0..96 {
        for x in 0..96 {
            let uv = oct_encode(cam.ray(x, y).dir).unwrap();
            let (i, j) = texel_of(uv.u, uv.v, 256);
            let n = (y * 96 + x) as usize;
            if chain.distance.get(i, j).is_empty() {
                assert_eq!(frame.status[n], TraceStatus::Miss);
                assert_eq!(frame.pixels[n], MISS_COLOR);
            } else {
                assert_eq!(frame.status[n], TraceStatus::Hit);
                assert_eq!(frame.pixels[n], chain.irradiance.get(i, j));
            }
        }
    }
    assert!(frame.stats.mean_fetches_per_pixel <= 1.0);
}

#[test]
fn empty_probe_renders_black() {
    let cloud = common::cloud(&[(Vec3::new(50.0, 0.0, 0.0), [1.0; 3])]);
    let probe = bake_probe(&cloud, Vec3::ZERO, 64, 4).unwrap().0;
    let cam = Camera::look_at(Vec3::new(0.0, 0.0, -3.0), Vec3::ZERO, Vec3::Y, 60.0, 40, 30).unwrap();
    let frame = render(&cam, &tracer(&probe));
    assert_eq!(frame.stats.miss_fraction, 1.0);
    assert!(frame.pixels.iter().all(|&p| p == MISS_COLOR));
}

#[test]
fn status_fractions_add_up() {
    let probe = room_probe(1e4, 256);
    let mut rng = Rng::new(77);
    for _ in 0..8 {
        let eye = rng.point_in(Vec3::splat(0.3), Vec3::new(2.7, 2.2, 5.7));
        let look = eye + rng.direction();
        let Ok(cam) = Camera::look_at(eye, look, Vec3::Y, 70.0, 40, 40) else {
            continue;
        };
        let s = render(&cam, &tracer(&probe)).stats;
        assert!(s.miss_fraction + s.unknown_fraction <= 1.0 + 1e-12);
        assert!((s.hit_fraction + s.miss_fraction + s.unknown_fraction - 1.0).abs() < 1e-12);
    }
}

#[test]
fn psnr_of_one_saturated_channel_in_four_pixels() {
    let a = flat(2, 2, vec![Rgb8([10, 20, 30]); 4]);
    let mut b = a.clone();
    b.pixels[3] = Rgb8([10, 20, 30 + 225]);
    let mut c = flat(2, 2, vec![Rgb8([0, 0, 0]); 4]);
    c.pixels[0] = Rgb8([255, 0, 0]);
    let black = flat(2, 2, vec![Rgb8([0, 0, 0]); 4]);
    let expected = 10.0 * 12f64.log10();
    assert!((psnr(&black, &c).unwrap() - expected).abs() < 1e-12);
    assert!((expected - 10.79).abs() < 0.005);
    assert_eq!(mse(&black, &c).unwrap(), 255.0 * 255.0 / 12.0);
    assert!(psnr(&a, &b).unwrap() > expected);
    assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
    assert!(psnr(&a, &flat(1, 4, a.pixels.clone())).is_err());
}

/// From the probe position at high density, the render matches the exact ray
/// cast to within one 8-bit step away from color edges, where a texel
/// straddling two colors keeps only one of them.
#[test]
fn eye_at_the_probe_matches_the_ray_cast() {
    let scene = AnalyticScene::room();
    let cloud = sample_point_cloud(&scene, 3e5, 1);
    let probe = bake_probe(&cloud, Room::CENTER, 1024, 64).unwrap().0;
    drop(cloud);
    let views = [
        ("+z", Vec3::new(1.5, 1.25, 6.0)),
        ("+x", Vec3::new(3.0, 1.0, 3.0)),
        ("down", Vec3::new(1.5, 0.0, 2.0)),
    ];
    for (name, look) in views {
        let cam = Camera::look_at(Room::CENTER, look, Vec3::Y, 60.0, 512, 512).unwrap();
        let frame = render(&cam, &tracer(&probe));
        let truth = render_oracle(&cam, &scene);
        let edges = color_edge_mask(&truth);
        let close = |n: usize| {
            (0..3).all(|c| frame.pixels[n].0[c].abs_diff(truth.pixels[n].0[c]) <= 1)
        };
        let n = frame.pixels.len();
        let all = (0..n).filter(|&i| close(i)).count() as f64 / n as f64;
        let interior: Vec<usize> = (0..n).filter(|&i| !edges[i]).collect();
        let inside = interior.iter().filter(|&&i| close(i)).count() as f64 / interior.len() as f64;
        println!("{name}: within one step {all:.4} overall, {inside:.4} away from edges");
        assert!(inside >= 0.99, "{name}: {inside}");
    }
}
