//! Regular 3D grids of probes and multi-probe tracing.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::bake::ProbeData;
use crate::math::Vec3;
use crate::trace::{
    trace_one_probe, trace_one_probe_range, Ray, TraceConfig, TraceCounters, TraceOutcome,
    TraceStatus,
};

/// Probe origins may sit this far from their lattice position.
pub const PLACEMENT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("grid dimensions must be at least 1 on every axis, got {0:?}")]
    ZeroDims([usize; 3]),
    #[error("cell size must be positive and finite, got {0}")]
    BadCellSize(f64),
    #[error("expected {expected} probes for the grid dimensions, got {got}")]
    ProbeCount { expected: usize, got: usize },
    #[error("probe {index:?} sits at {actual:?}, expected {expected:?}")]
    Misplaced {
        index: [usize; 3],
        expected: [f64; 3],
        actual: [f64; 3],
    },
}

/// Probes on the lattice `origin + cell_size * (i, j, k)`, stored with `i`
/// varying fastest.
#[derive(Debug, Clone)]
pub struct ProbeGrid {
    origin: Vec3,
    cell_size: f64,
    dims: [usize; 3],
    probes: Vec<ProbeData>,
}

/// A cube of the grid, named by its lowest corner.
pub type Cube = [usize; 3];

/// Cube crossed by a ray over `[t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubeSpan {
    pub cube: Cube,
    pub t0: f64,
    pub t1: f64,
}

impl ProbeGrid {
    pub fn new(
        origin: Vec3,
        cell_size: f64,
        dims: [usize; 3],
        probes: Vec<ProbeData>,
    ) -> Result<Self, GridError> {
        if dims.iter().any(|&n| n == 0) {
            return Err(GridError::ZeroDims(dims));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(GridError::BadCellSize(cell_size));
        }
        let expected = dims[0] * dims[1] * dims[2];
        if probes.len() != expected {
            return Err(GridError::ProbeCount {
                expected,
                got: probes.len(),
            });
        }
        let grid = ProbeGrid {
            origin,
            cell_size,
            dims,
            probes,
        };
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let expected = grid.lattice_point([i, j, k]);
                    let actual = grid.probe([i, j, k]).origin();
                    if (actual - expected).length() > PLACEMENT_TOLERANCE * (1.0 + cell_size) {
                        return Err(GridError::Misplaced {
                            index: [i, j, k],
                            expected: expected.to_array(),
                            actual: actual.to_array(),
                        });
                    }
                }
            }
        }
        Ok(grid)
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn probes(&self) -> &[ProbeData] {
        &self.probes
    }

    pub fn lattice_point(&self, [i, j, k]: [usize; 3]) -> Vec3 {
        self.origin + Vec3::new(i as f64, j as f64, k as f64) * self.cell_size
    }

    #[inline]
    pub fn linear_index(&self, [i, j, k]: [usize; 3]) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn probe(&self, index: [usize; 3]) -> &ProbeData {
        &self.probes[self.linear_index(index)]
    }

    /// Number of cubes along an axis. An axis with one probe has a single
    /// unbounded slab.
    fn cubes_along(&self, axis: usize) -> usize {
        self.dims[axis].saturating_sub(1).max(1)
    }

    /// Cube containing `p`, clamped into the grid.
    pub fn cube_of(&self, p: Vec3) -> Cube {
        let mut c = [0; 3];
        for (axis, slot) in c.iter_mut().enumerate() {
            let f = ((p[axis] - self.origin[axis]) / self.cell_size).floor();
            let hi = self.cubes_along(axis) as f64 - 1.0;
            *slot = f.clamp(0.0, hi) as usize;
        }
        c
    }

    /// Distinct probe corners of a cube.
    pub fn cube_corners(&self, cube: Cube) -> Vec<[usize; 3]> {
        let mut out = Vec::with_capacity(8);
        for dk in 0..2 {
            for dj in 0..2 {
                for di in 0..2 {
                    let idx = [cube[0] + di, cube[1] + dj, cube[2] + dk];
                    if idx.iter().zip(self.dims).all(|(&a, n)| a < n) && !out.contains(&idx) {
                        out.push(idx);
                    }
                }
            }
        }
        out
    }

    /// Corners of `cube`, nearest to `eye` first. Equal distances are broken
    /// by lattice index.
    pub fn probe_order(&self, cube: Cube, eye: Vec3) -> Vec<[usize; 3]> {
        let mut corners = self.cube_corners(cube);
        corners.sort_by(|a, b| {
            let da = (self.lattice_point(*a) - eye).length_squared();
            let db = (self.lattice_point(*b) - eye).length_squared();
            da.total_cmp(&db).then_with(|| a.cmp(b))
        });
        corners
    }

    /// Cubes crossed by the ray over `[t_min, t_max]`, in ray order. Empty
    /// when the ray never overlaps the lattice.
    pub fn walk_cubes(&self, ray: &Ray, t_min: f64, t_max: f64) -> Vec<CubeSpan> {
        let mut spans = Vec::new();
        let mut t0 = t_min;
        let mut t1 = t_max;
        let mut bounded = [false; 3];
        for axis in 0..3 {
            if self.dims[axis] < 2 {
                continue;
            }
            bounded[axis] = true;
            let lo = self.origin[axis];
            let hi = lo + self.cell_size * (self.dims[axis] - 1) as f64;
            let (o, d) = (ray.origin[axis], ray.dir[axis]);
            if d == 0.0 {
                if o < lo || o > hi {
                    t1 = f64::NEG_INFINITY;
                }
                continue;
            }
            let (a, b) = ((lo - o) / d, (hi - o) / d);
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
        if !(t1 > t0) {
            return spans;
        }

        let start = ray.at(t0);
        let mut cube = self.cube_of(start);
        let mut step = [0i64; 3];
        let mut next_t = [f64::INFINITY; 3];
        let mut delta = [f64::INFINITY; 3];
        for axis in 0..3 {
            let d = ray.dir[axis];
            if !bounded[axis] || d == 0.0 {
                continue;
            }
            let c = cube[axis] as f64;
            let boundary = if d > 0.0 { c + 1.0 } else { c };
            let plane = self.origin[axis] + boundary * self.cell_size;
            step[axis] = if d > 0.0 { 1 } else { -1 };
            next_t[axis] = (plane - ray.origin[axis]) / d;
            delta[axis] = self.cell_size / d.abs();
        }
        let mut t = t0;
        loop {
            let axis = (0..3)
                .min_by(|&a, &b| next_t[a].total_cmp(&next_t[b]))
                .unwrap_or(0);
            let exit = next_t[axis].min(t1);
            if exit > t {
                spans.push(CubeSpan { cube, t0: t, t1: exit });
            }
            if next_t[axis] >= t1 {
                break;
            }
            let n = cube[axis] as i64 + step[axis];
            if n < 0 || n >= self.cubes_along(axis) as i64 {
                break;
            }
            cube[axis] = n as usize;
            t = exit.max(t);
            next_t[axis] += delta[axis];
        }
        spans
    }
}

/// Traces a ray through a probe grid. Probes within the eye-alignment
/// epsilon of the ray origin answer directly. Otherwise each crossed cube's
/// corner probes are tried nearest first over the cube's span of the ray;
/// the first span stretches back to the ray start and the last out to
/// `t_max`. A ray that never overlaps the lattice uses the cube nearest its
/// origin over the whole range. The first HIT wins; otherwise the result is
/// MISS, carrying the texel of the last UNKNOWN for diagnostics.
pub fn trace_grid(
    grid: &ProbeGrid,
    ray: &Ray,
    t_max: f64,
    cfg: &TraceConfig,
    counters: &mut TraceCounters,
) -> TraceOutcome {
    for (index, probe) in grid.probes.iter().enumerate() {
        if (probe.origin() - ray.origin).length() < cfg.eye_align_epsilon {
            let mut out = trace_one_probe(probe, ray, cfg, counters);
            out.probe = Some(index);
            return out;
        }
    }
    let mut spans = grid.walk_cubes(ray, cfg.ray_epsilon, t_max);
    if spans.is_empty() {
        spans.push(CubeSpan {
            cube: grid.cube_of(ray.origin),
            t0: 0.0,
            t1: t_max,
        });
    }
    let last = spans.len() - 1;
    let mut unsure = None;
    for (n, span) in spans.iter().enumerate() {
        let t0 = if n == 0 { 0.0 } else { span.t0 };
        let t1 = if n == last { t_max } else { span.t1 };
        for corner in grid
            .probe_order(span.cube, ray.origin)
            .into_iter()
            .take(cfg.max_probes_per_cube)
        {
            let index = grid.linear_index(corner);
            let mut out = trace_one_probe_range(&grid.probes[index], ray, t0, t1, cfg, counters);
            out.probe = Some(index);
            match out.status {
                TraceStatus::Hit => return out,
                TraceStatus::Unknown => unsure = Some(out),
                TraceStatus::Miss => {}
            }
        }
    }
    fallback_miss(unsure)
}

/// Traces a ray against a short list of probes, nearest to the ray origin
/// first (ties by list position). Same result rule as [`trace_grid`].
pub fn trace_few_probes(
    probes: &[ProbeData],
    ray: &Ray,
    cfg: &TraceConfig,
    counters: &mut TraceCounters,
) -> TraceOutcome {
    let mut order: Vec<usize> = (0..probes.len()).collect();
    order.sort_by(|&a, &b| {
        let da = (probes[a].origin() - ray.origin).length_squared();
        let db = (probes[b].origin() - ray.origin).length_squared();
        da.total_cmp(&db).then(a.cmp(&b))
    });
    let mut unsure = None;
    for index in order {
        let mut out = trace_one_probe(&probes[index], ray, cfg, counters);
        out.probe = Some(index);
        match out.status {
            TraceStatus::Hit => return out,
            TraceStatus::Unknown => unsure = Some(out),
            TraceStatus::Miss => {}
        }
    }
    fallback_miss(unsure)
}

/// Every probe failed: MISS, keeping the last UNKNOWN's texel.
fn fallback_miss(last_unknown: Option<TraceOutcome>) -> TraceOutcome {
    match last_unknown {
        Some(out) => TraceOutcome {
            status: TraceStatus::Miss,
            irradiance: None,
            ..out
        },
        None => TraceOutcome::MISS,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bake::bake_probe;
    use crate::pointcloud::{ColoredPoint, PointCloud};

    fn tiny_cloud() -> PointCloud {
        PointCloud::new(alloc::vec![ColoredPoint {
            position: Vec3::new(5.0, 5.0, 5.0),
            color: [1.0, 1.0, 1.0],
        }])
        .unwrap()
    }

    fn grid(dims: [usize; 3], cell: f64) -> ProbeGrid {
        let cloud = tiny_cloud();
        let mut probes = Vec::new();
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let o = Vec3::new(i as f64, j as f64, k as f64) * cell;
                    probes.push(bake_probe(&cloud, o, 8, 2).unwrap().0);
                }
            }
        }
        ProbeGrid::new(Vec3::ZERO, cell, dims, probes).unwrap()
    }

    #[test]
    fn rejects_bad_layouts() {
        let g = grid([2, 1, 1], 1.0);
        let p = g.probes().to_vec();
        assert!(matches!(
            ProbeGrid::new(Vec3::ZERO, 1.0, [3, 1, 1], p.clone()),
            Err(GridError::ProbeCount { .. })
        ));
        assert!(matches!(
            ProbeGrid::new(Vec3::ZERO, 2.0, [2, 1, 1], p.clone()),
            Err(GridError::Misplaced { .. })
        ));
        assert!(ProbeGrid::new(Vec3::ZERO, 0.0, [2, 1, 1], p).is_err());
    }

    #[test]
    fn probe_order_nearest_first_with_index_ties() {
        let g = grid([2, 2, 2], 1.0);
        let order = g.probe_order([0, 0, 0], Vec3::new(0.1, 0.2, 0.3));
        assert_eq!(order[0], [0, 0, 0]);
        assert_eq!(order.len(), 8);
        let tie = g.probe_order([0, 0, 0], Vec3::splat(0.5));
        assert_eq!(tie[0], [0, 0, 0]);
        assert_eq!(tie[1], [0, 0, 1]);
    }

    #[test]
    fn walk_visits_cubes_in_order() {
        let g = grid([4, 2, 2], 1.0);
        let ray = Ray::new(Vec3::new(0.5, 0.5, 0.5), Vec3::X).unwrap();
        let spans = g.walk_cubes(&ray, 0.0, 10.0);
        let cubes: Vec<_> = spans.iter().map(|s| s.cube[0]).collect();
        assert_eq!(cubes, [0, 1, 2]);
        assert_eq!(spans[0].t1, 0.5);
        assert_eq!(spans[2].t1, 2.5);
    }

    #[test]
    fn walk_along_a_row_of_four_cubes() {
        let g = grid([5, 2, 2], 1.0);
        let ray = Ray::new(Vec3::new(0.5, 0.5, 0.5), Vec3::X).unwrap();
        let cubes: Vec<_> = g.walk_cubes(&ray, 0.0, 100.0).iter().map(|s| s.cube).collect();
        assert_eq!(cubes, [[0, 0, 0], [1, 0, 0], [2, 0, 0], [3, 0, 0]]);
    }

    #[test]
    fn walk_outside_pointing_away_is_empty() {
        let g = grid([2, 2, 2], 1.0);
        let ray = Ray::new(Vec3::new(5.0, 5.0, 5.0), Vec3::X).unwrap();
        assert!(g.walk_cubes(&ray, 0.0, 3.0).is_empty());
    }

    #[test]
    fn flat_axes_are_unbounded() {
        let g = grid([3, 1, 1], 1.0);
        assert_eq!(g.cube_of(Vec3::new(1.5, 40.0, -9.0)), [1, 0, 0]);
        assert_eq!(g.cube_corners([1, 0, 0]), [[1, 0, 0], [2, 0, 0]]);
    }
}
