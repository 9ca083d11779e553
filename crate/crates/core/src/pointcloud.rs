//! Colored point clouds and analytic scenes.
//!
//! An [`AnalyticScene`] is a handful of boxes and spheres with exact ray
//! intersection. It stands in for a scanner capture: [`sample_point_cloud`]
//! turns it into a point cloud for baking, and [`oracle_trace`] gives the
//! ground truth a probe reconstruction is measured against.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::math::{Aabb, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColoredPoint {
    pub position: Vec3,
    /// Linear RGB in `[0, 1]`.
    pub color: [f32; 3],
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PointCloudError {
    #[error("empty point cloud")]
    Empty,
    #[error("point {index} has a non-finite position")]
    NonFinite { index: usize },
}

/// Unified colored point cloud in world space.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<ColoredPoint>,
    bounds: Aabb,
    /// Free-form identifier carried into probe metadata (usually a file name).
    pub label: String,
}

impl PointCloud {
    pub fn new(points: Vec<ColoredPoint>) -> Result<Self, PointCloudError> {
        if points.is_empty() {
            return Err(PointCloudError::Empty);
        }
        let mut bounds = Aabb::EMPTY;
        for (index, p) in points.iter().enumerate() {
            if !p.position.is_finite() {
                return Err(PointCloudError::NonFinite { index });
            }
            bounds.grow(p.position);
        }
        Ok(PointCloud {
            points,
            bounds,
            label: String::new(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn points(&self) -> &[ColoredPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bounds(&self) -> Aabb {
        self.bounds
    }
}

/// Surface coloring of a primitive face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Paint {
    Solid([f32; 3]),
    /// Alternating squares of side `cell` meters.
    Checker { a: [f32; 3], b: [f32; 3], cell: f64 },
}

impl Paint {
    /// `plane_axes` are the two in-plane axes for planar faces; `None` uses a
    /// 3D checker.
    fn color_at(&self, p: Vec3, plane_axes: Option<(usize, usize)>) -> [f32; 3] {
        match *self {
            Paint::Solid(c) => c,
            Paint::Checker { a, b, cell } => {
                let cellf = |x: f64| (x / cell).floor() as i64;
                let parity = match plane_axes {
                    Some((s, t)) => cellf(p[s]) + cellf(p[t]),
                    None => cellf(p.x) + cellf(p.y) + cellf(p.z),
                };
                if parity.rem_euclid(2) == 0 {
                    a
                } else {
                    b
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Material {
    Uniform(Paint),
    /// One paint per box face, ordered `-x, +x, -y, +y, -z, +z`. Spheres use
    /// the first entry.
    PerFace([Paint; 6]),
}

impl Material {
    fn paint(&self, face: usize) -> &Paint {
        match self {
            Material::Uniform(p) => p,
            Material::PerFace(faces) => &faces[face.min(5)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Box(Aabb),
    Sphere { center: Vec3, radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub shape: Shape,
    pub material: Material,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SceneError {
    #[error("primitive {index} has non-positive extent")]
    Degenerate { index: usize },
}

/// Closed set of boxes and spheres with exact ray intersection.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticScene {
    primitives: Vec<Primitive>,
}

/// Nearest intersection reported by [`oracle_trace`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleHit {
    pub t: f64,
    pub color: [f32; 3],
    pub primitive: usize,
    /// Box face index (`-x, +x, -y, +y, -z, +z`); `0` for spheres.
    pub face: usize,
}

impl AnalyticScene {
    pub fn new(primitives: Vec<Primitive>) -> Result<Self, SceneError> {
        for (index, p) in primitives.iter().enumerate() {
            let ok = match p.shape {
                Shape::Box(b) => {
                    let e = b.extent();
                    e.x > 0.0 && e.y > 0.0 && e.z > 0.0
                }
                Shape::Sphere { radius, .. } => radius > 0.0,
            };
            if !ok {
                return Err(SceneError::Degenerate { index });
            }
        }
        Ok(AnalyticScene { primitives })
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn surface_area(&self) -> f64 {
        self.primitives.iter().map(|p| shape_area(&p.shape)).sum()
    }

    pub fn bounds(&self) -> Aabb {
        let mut b = Aabb::EMPTY;
        for p in &self.primitives {
            match p.shape {
                Shape::Box(bx) => {
                    b.grow(bx.min);
                    b.grow(bx.max);
                }
                Shape::Sphere { center, radius } => {
                    b.grow(center - Vec3::splat(radius));
                    b.grow(center + Vec3::splat(radius));
                }
            }
        }
        b
    }

    /// A 3 m x 6 m room, 2.5 m high, seen from the inside: distinctly colored
    /// walls, a checkered floor and two boxes standing on it. Spans
    /// `x ∈ [0, 3]`, `y ∈ [0, 2.5]` (up), `z ∈ [0, 6]`.
    pub fn room() -> AnalyticScene {
        AnalyticScene::new(alloc::vec![
            Primitive {
                shape: Shape::Box(Room::BOUNDS),
                material: Material::PerFace([
                    Paint::Solid([0.80, 0.25, 0.20]),
                    Paint::Solid([0.20, 0.60, 0.30]),
                    Paint::Checker {
                        a: [0.85, 0.85, 0.80],
                        b: [0.25, 0.25, 0.30],
                        cell: 0.5,
                    },
                    Paint::Solid([0.95, 0.95, 0.90]),
                    Paint::Solid([0.25, 0.35, 0.80]),
                    Paint::Solid([0.90, 0.75, 0.20]),
                ]),
            },
            Primitive {
                shape: Shape::Box(Aabb::new(
                    Vec3::new(0.4, 0.0, 3.8),
                    Vec3::new(1.0, 0.9, 4.6)
                )),
                material: Material::Uniform(Paint::Solid([0.95, 0.50, 0.10])),
            },
            Primitive {
                shape: Shape::Box(Aabb::new(
                    Vec3::new(1.9, 0.0, 1.2),
                    Vec3::new(2.6, 0.7, 2.0)
                )),
                material: Material::Uniform(Paint::Solid([0.50, 0.30, 0.70])),
            },
        ])
        .expect("room primitives are well formed")
    }

    /// The room shell with a desk and a computer box on it instead of the
    /// two floor boxes. The computer's back (`+z`) face is hidden from
    /// [`Room::CENTER`].
    pub fn workstation() -> AnalyticScene {
        let room = AnalyticScene::room();
        AnalyticScene::new(alloc::vec![
            room.primitives[0],
            Primitive {
                shape: Shape::Box(Workstation::DESK),
                material: Material::Uniform(Paint::Solid([0.55, 0.40, 0.25])),
            },
            Primitive {
                shape: Shape::Box(Workstation::COMPUTER),
                material: Material::PerFace([
                    Paint::Solid([0.30, 0.30, 0.35]),
                    Paint::Solid([0.30, 0.30, 0.35]),
                    Paint::Solid([0.20, 0.20, 0.20]),
                    Paint::Solid([0.40, 0.40, 0.45]),
                    Paint::Solid([0.10, 0.10, 0.15]),
                    Paint::Checker {
                        a: [0.10, 0.70, 0.90],
                        b: [0.90, 0.90, 0.90],
                        cell: 0.1,
                    },
                ]),
            },
        ])
        .expect("workstation primitives are well formed")
    }
}

/// Reference dimensions of [`AnalyticScene::room`].
pub struct Room;

impl Room {
    pub const BOUNDS: Aabb = Aabb {
        min: Vec3::new(0.0, 0.0, 0.0),
        max: Vec3::new(3.0, 2.5, 6.0),
    };
    /// Probe position at the middle of the room.
    pub const CENTER: Vec3 = Vec3::new(1.5, 1.25, 3.0);
}

/// Reference geometry of [`AnalyticScene::workstation`].
pub struct Workstation;

impl Workstation {
    pub const DESK: Aabb = Aabb {
        min: Vec3::new(0.9, 0.0, 3.4),
        max: Vec3::new(2.1, 0.75, 4.2),
    };
    pub const COMPUTER: Aabb = Aabb {
        min: Vec3::new(1.2, 0.75, 3.6),
        max: Vec3::new(1.8, 1.35, 4.0),
    };
    /// Index of the computer in the scene's primitive list.
    pub const COMPUTER_PRIMITIVE: usize = 2;
    /// Box face index of the computer's back.
    pub const BACK_FACE: usize = 5;
}

fn shape_area(shape: &Shape) -> f64 {
    match *shape {
        Shape::Box(b) => {
            let e = b.extent();
            2.0 * (e.x * e.y + e.y * e.z + e.z * e.x)
        }
        Shape::Sphere { radius, .. } => 4.0 * core::f64::consts::PI * radius * radius,
    }
}

/// Uniform sample in `[0, 1)`.
#[inline]
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn cells(length: f64, spacing: f64) -> usize {
    ((length / spacing).round() as usize).max(1)
}

/// Deterministic jittered-stratified surface sampling of every primitive at
/// `density` points per square meter. Each primitive draws from its own
/// stream derived from `seed`, so the result does not depend on evaluation
/// order. Samples lying on another primitive's surface are dropped: they sit
/// on contact areas, such as the floor under a box, that no scan observes.
///
/// # Panics
/// If `density` is not positive.
pub fn sample_point_cloud(scene: &AnalyticScene, density: f64, seed: u64) -> PointCloud {
    assert!(density > 0.0, "sampling density must be positive");
    let spacing = 1.0 / density.sqrt();
    let mut points = Vec::with_capacity((density * scene.surface_area() * 1.05) as usize);
    for (index, prim) in scene.primitives.iter().enumerate() {
        let stream = seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut rng = ChaCha8Rng::seed_from_u64(stream);
        let first = points.len();
        match prim.shape {
            Shape::Box(b) => sample_box(&b, &prim.material, spacing, &mut rng, &mut points),
            Shape::Sphere { center, radius } => sample_sphere(
                center,
                radius,
                &prim.material,
                spacing,
                &mut rng,
                &mut points,
            ),
        }
        let others: Vec<&Shape> = scene
            .primitives
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != index)
            .map(|(_, p)| &p.shape)
            .collect();
        if !others.is_empty() {
            let mut k = first;
            for n in first..points.len() {
                if !others.iter().any(|o| on_surface(o, points[n].position)) {
                    points[k] = points[n];
                    k += 1;
                }
            }
            points.truncate(k);
        }
    }
    PointCloud::new(points).expect("analytic scenes have positive area")
}

/// Distance below which a sample counts as lying on another surface.
const CONTACT_TOLERANCE: f64 = 1e-9;

fn on_surface(shape: &Shape, p: Vec3) -> bool {
    match *shape {
        Shape::Box(b) => {
            b.padded(CONTACT_TOLERANCE).contains(p) && !b.padded(-CONTACT_TOLERANCE).contains(p)
        }
        Shape::Sphere { center, radius } => ((p - center).length() - radius).abs() <= CONTACT_TOLERANCE,
    }
}

fn sample_box(
    b: &Aabb,
    material: &Material,
    spacing: f64,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<ColoredPoint>,
) {
    for face in 0..6 {
        let axis = face / 2;
        let (s, t) = plane_axes(axis);
        let fixed = if face % 2 == 0 { b.min[axis] } else { b.max[axis] };
        let (s0, s1) = (b.min[s], b.max[s]);
        let (t0, t1) = (b.min[t], b.max[t]);
        let ns = cells(s1 - s0, spacing);
        let nt = cells(t1 - t0, spacing);
        let ds = (s1 - s0) / ns as f64;
        let dt = (t1 - t0) / nt as f64;
        let paint = material.paint(face);
        for a in 0..nt {
            for c in 0..ns {
                let mut p = [0.0; 3];
                p[axis] = fixed;
                p[s] = s0 + (c as f64 + unit(rng)) * ds;
                p[t] = t0 + (a as f64 + unit(rng)) * dt;
                let position = Vec3::from_array(p);
                out.push(ColoredPoint {
                    position,
                    color: paint.color_at(position, Some((s, t))),
                });
            }
        }
    }
}

fn sample_sphere(
    center: Vec3,
    radius: f64,
    material: &Material,
    spacing: f64,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<ColoredPoint>,
) {
    // (z, phi) is an equal-area parameterization of the sphere.
    let nz = cells(2.0 * radius, spacing);
    let nphi = cells(2.0 * core::f64::consts::PI * radius, spacing);
    let paint = material.paint(0);
    for a in 0..nz {
        for c in 0..nphi {
            let z = -1.0 + 2.0 * (a as f64 + unit(rng)) / nz as f64;
            let phi = 2.0 * core::f64::consts::PI * (c as f64 + unit(rng)) / nphi as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let n = Vec3::new(rho * phi.cos(), z, rho * phi.sin());
            let position = center + n * radius;
            out.push(ColoredPoint {
                position,
                color: paint.color_at(position, None),
            });
        }
    }
}

fn plane_axes(normal_axis: usize) -> (usize, usize) {
    match normal_axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Minimum accepted hit distance; hits closer than this are ignored.
pub const ORACLE_EPSILON: f64 = 1e-9;

/// Exact nearest intersection of the ray `origin + t * dir` (`t > 0`) with
/// the scene. Rays starting inside a primitive hit its inner surface. Ties go
/// to the lower primitive index.
pub fn oracle_trace(scene: &AnalyticScene, origin: Vec3, dir: Vec3) -> Option<OracleHit> {
    let mut best: Option<OracleHit> = None;
    for (index, prim) in scene.primitives.iter().enumerate() {
        let hit = match prim.shape {
            Shape::Box(b) => intersect_box(&b, origin, dir),
            Shape::Sphere { center, radius } => {
                intersect_sphere(center, radius, origin, dir).map(|t| (t, 0))
            }
        };
        let Some((t, face)) = hit else { continue };
        if best.map_or(true, |b| t < b.t) {
            let p = origin + dir * t;
            let axes = match prim.shape {
                Shape::Box(_) => Some(plane_axes(face / 2)),
                Shape::Sphere { .. } => None,
            };
            best = Some(OracleHit {
                t,
                color: prim.material.paint(face).color_at(p, axes),
                primitive: index,
                face,
            });
        }
    }
    best
}

fn intersect_box(b: &Aabb, origin: Vec3, dir: Vec3) -> Option<(f64, usize)> {
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    let mut near_face = 0;
    let mut far_face = 0;
    for axis in 0..3 {
        let o = origin[axis];
        let d = dir[axis];
        if d == 0.0 {
            if o < b.min[axis] || o > b.max[axis] {
                return None;
            }
            continue;
        }
        let ta = (b.min[axis] - o) / d;
        let tb = (b.max[axis] - o) / d;
        // Face hit first when travelling along +axis is the min face.
        let (t0, f0, t1, f1) = if ta < tb {
            (ta, 2 * axis, tb, 2 * axis + 1)
        } else {
            (tb, 2 * axis + 1, ta, 2 * axis)
        };
        if t0 > t_near {
            t_near = t0;
            near_face = f0;
        }
        if t1 < t_far {
            t_far = t1;
            far_face = f1;
        }
    }
    if t_near > t_far {
        return None;
    }
    if t_near > ORACLE_EPSILON {
        Some((t_near, near_face))
    } else if t_far > ORACLE_EPSILON {
        Some((t_far, far_face))
    } else {
        None
    }
}

fn intersect_sphere(center: Vec3, radius: f64, origin: Vec3, dir: Vec3) -> Option<f64> {
    let oc = origin - center;
    let b = oc.dot(dir);
    let a = dir.length_squared();
    let c = oc.length_squared() - radius * radius;
    let disc = b * b - a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t0 = (-b - sq) / a;
    let t1 = (-b + sq) / a;
    if t0 > ORACLE_EPSILON {
        Some(t0)
    } else if t1 > ORACLE_EPSILON {
        Some(t1)
    } else {
        None
    }
}
