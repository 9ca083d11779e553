#![allow(dead_code)]

use lfprobe_core::math::Vec3;
use lfprobe_core::pointcloud::{ColoredPoint, PointCloud};
use lfprobe_core::trace::Ray;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }

    /// Uniform on the unit sphere.
    pub fn direction(&mut self) -> Vec3 {
        let z = self.range(-1.0, 1.0);
        let phi = self.range(0.0, std::f64::consts::TAU);
        let r = (1.0 - z * z).sqrt();
        Vec3::new(r * phi.cos(), z, r * phi.sin())
    }

    pub fn point_in(&mut self, min: Vec3, max: Vec3) -> Vec3 {
        Vec3::new(
            self.range(min.x, max.x),
            self.range(min.y, max.y),
            self.range(min.z, max.z),
        )
    }

    pub fn ray_in(&mut self, min: Vec3, max: Vec3) -> Ray {
        Ray::new(self.point_in(min, max), self.direction()).unwrap()
    }
}

pub fn cloud(points: &[(Vec3, [f32; 3])]) -> PointCloud {
    PointCloud::new(
        points
            .iter()
            .map(|&(position, color)| ColoredPoint { position, color })
            .collect(),
    )
    .unwrap()
}

/// Dense square patch of points with normal `axis`, at `offset` along it.
pub fn wall(axis: usize, offset: f64, half: f64, step: f64, color: [f32; 3]) -> Vec<ColoredPoint> {
    let n = (2.0 * half / step).round() as i64;
    let mut out = Vec::new();
    for a in 0..=n {
        for b in 0..=n {
            let s = -half + a as f64 * step;
            let t = -half + b as f64 * step;
            let p = match axis {
                0 => Vec3::new(offset, s, t),
                1 => Vec3::new(s, offset, t),
                _ => Vec3::new(s, t, offset),
            };
            out.push(ColoredPoint { position: p, color });
        }
    }
    out
}

/// Smallest angle between two directions, robust for tiny angles.
pub fn angle(a: Vec3, b: Vec3) -> f64 {
    a.angle_between(b)
}
