//! Ray queries against a single probe.
//!
//! A world-space ray is split where it crosses the probe's coordinate planes
//! so that each [`RaySegment`] stays inside one octant. Inside an octant the
//! octahedral projection is a central projection followed by an affine map,
//! so the segment projects to a straight line on the map and every texel
//! boundary `u = c` is a plane through the probe origin. A texel's footprint
//! on the ray is therefore an exact parametric interval, computed from the
//! texel index alone ([`ProjectedSegment::texel_interval`]).
//!
//! Marching visits texels in ray order. A texel *triggers* when the stored
//! distance is smaller than the ray's distance from the probe somewhere inside
//! the texel, i.e. the ray reaches behind the stored surface. The
//! low-resolution map holds block minima and block intervals contain the
//! intervals of their texels, so a block triggers whenever any of its texels
//! does: two-level marching returns exactly what single-level marching at
//! high resolution returns.
//!
//! On a high-resolution trigger the stored incoming direction decides
//! visibility: facing the ray (`n · ω < 0`) is a HIT, anything else is
//! UNKNOWN. With [`TraceConfig::surface_thickness`] set, a trigger where
//! the ray is already well behind the surface for the whole texel means the
//! ray slipped behind an occluder, which is also UNKNOWN.

#[allow(unused_imports)]
use num_traits::Float;

use crate::bake::ProbeData;
use crate::math::{sign_not_zero, Vec3};
use crate::octmap::{oct_encode_unchecked, texel_center, texel_of, MapChain, OctUv, Rgb8};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum RayError {
    #[error("ray direction is not unit length (|d| = {length})")]
    NonUnitDirection { length: f64 },
    #[error("ray origin is not finite")]
    NonFiniteOrigin,
}

/// Ray with a unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub dir: Vec3,
}

impl Ray {
    pub fn new(origin: Vec3, dir: Vec3) -> Result<Ray, RayError> {
        if !origin.is_finite() {
            return Err(RayError::NonFiniteOrigin);
        }
        let length = dir.length();
        if !((length - 1.0).abs() <= 1e-6) {
            return Err(RayError::NonUnitDirection { length });
        }
        Ok(Ray { origin, dir })
    }

    /// Normalizes `dir`.
    pub fn towards(origin: Vec3, dir: Vec3) -> Result<Ray, RayError> {
        Ray::new(origin, dir.normalize())
    }

    #[inline]
    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.dir * t
    }
}

/// Parametric piece `[t0, t1]` of a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySegment {
    pub t0: f64,
    pub t1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceStatus {
    Hit,
    Miss,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOutcome {
    pub status: TraceStatus,
    /// High-resolution texel that decided the outcome.
    pub texel: Option<(u32, u32)>,
    /// Center of [`texel`](Self::texel).
    pub uv: Option<OctUv>,
    /// Present iff the status is HIT.
    pub irradiance: Option<Rgb8>,
    /// Stored distance at the deciding texel.
    pub distance: Option<f64>,
    /// Index of the answering probe, filled in by multi-probe tracing.
    pub probe: Option<usize>,
}

impl TraceOutcome {
    pub const MISS: TraceOutcome = TraceOutcome {
        status: TraceStatus::Miss,
        texel: None,
        uv: None,
        irradiance: None,
        distance: None,
        probe: None,
    };

    #[inline]
    pub fn is_hit(&self) -> bool {
        self.status == TraceStatus::Hit
    }
}

/// Tracing tunables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceConfig {
    /// Ray origins closer than this to a probe origin take the O(1) lookup.
    pub eye_align_epsilon: f64,
    /// Rays start at this parameter to avoid self-intersection.
    pub ray_epsilon: f64,
    /// Relative slack on distance comparisons, absorbing distance
    /// quantization.
    pub distance_slack: f64,
    /// How far behind a surface, relative to its distance, the ray may be
    /// across a whole texel and still count as hitting it. Covers unsampled
    /// texels the ray skipped on the way in. `None` disables the check.
    pub surface_thickness: Option<f64>,
    /// Absolute padding added to the cloud bounds that limit marching.
    pub bounds_padding: f64,
    /// Multi-probe tracing stops after this many probes per cube.
    pub max_probes_per_cube: usize,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            eye_align_epsilon: 1e-4,
            ray_epsilon: 1e-4,
            distance_slack: 1e-3,
            surface_thickness: None,
            bounds_padding: 0.05,
            max_probes_per_cube: 8,
        }
    }
}

/// Work counters. A texel fetch is one read of a texel's payload at either
/// resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TraceCounters {
    pub texel_fetches: u64,
    /// Calls into single-probe tracing.
    pub probe_traces: u64,
}

impl TraceCounters {
    pub fn merge(&mut self, o: &TraceCounters) {
        self.texel_fetches += o.texel_fetches;
        self.probe_traces += o.probe_traces;
    }
}

/// Up to four ray segments, in ray order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentList {
    items: [RaySegment; 4],
    len: usize,
}

impl SegmentList {
    const EMPTY: SegmentList = SegmentList {
        items: [RaySegment { t0: 0.0, t1: 0.0 }; 4],
        len: 0,
    };

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_slice(&self) -> &[RaySegment] {
        &self.items[..self.len]
    }
}

/// Distance from the probe (at the origin of probe space) to the point of
/// the ray `w + t ω` closest to the line through the probe along `v`.
/// Falls back to `|w|` when the ray is parallel to `v`.
pub fn distance_to_intersection(w: Vec3, omega: Vec3, v: Vec3) -> f64 {
    let wv = w.cross(v);
    let ov = omega.cross(v);
    let denom = ov.length_squared();
    if denom < 1e-12 {
        return w.length();
    }
    let t = -wv.dot(ov) / denom;
    (w + omega * t).length()
}

/// Parametric range in which the ray is marched against `probe`, or `None`
/// when the ray never enters the padded cloud bounds.
fn march_range(probe: &ProbeData, ray: &Ray, cfg: &TraceConfig) -> Option<(f64, f64)> {
    let start = cfg.ray_epsilon;
    match probe.meta().bounds {
        Some(b) => {
            let (e0, e1) = b
                .padded(cfg.bounds_padding)
                .intersect_line(ray.origin, ray.dir)?;
            let t0 = e0.max(start);
            (e1 > t0).then_some((t0, e1))
        }
        None => Some((start, 1e4)),
    }
}

/// Splits `[t0, t1]` where the ray crosses the probe's coordinate planes.
pub fn split_at_octants(probe_origin: Vec3, ray: &Ray, t0: f64, t1: f64) -> SegmentList {
    let mut out = SegmentList::EMPTY;
    if !(t1 > t0) {
        return out;
    }
    let w = ray.origin - probe_origin;
    let mut cuts = [f64::NAN; 3];
    let mut n = 0;
    for axis in 0..3 {
        let d = ray.dir[axis];
        if d != 0.0 {
            let t = -w[axis] / d;
            if t > t0 && t < t1 {
                cuts[n] = t;
                n += 1;
            }
        }
    }
    let cuts = &mut cuts[..n];
    cuts.sort_by(|a, b| a.total_cmp(b));
    let min_len = 1e-12 * (1.0 + t1.abs());
    let mut start = t0;
    for &c in cuts.iter() {
        if c - start > min_len {
            out.items[out.len] = RaySegment { t0: start, t1: c };
            out.len += 1;
            start = c;
        }
    }
    if t1 - start > min_len || out.len == 0 {
        out.items[out.len] = RaySegment { t0: start, t1 };
        out.len += 1;
    }
    out
}

/// Segments of `ray` against `probe` over the padded cloud bounds.
pub fn compute_ray_segments(probe: &ProbeData, ray: &Ray, cfg: &TraceConfig) -> SegmentList {
    match march_range(probe, ray, cfg) {
        Some((t0, t1)) => split_at_octants(probe.origin(), ray, t0, t1),
        None => SegmentList::EMPTY,
    }
}

/// A ray segment expressed in one octant of a probe's octahedral map.
///
/// With `q(t) = w + t ω` in probe space and octant signs `m`, both texture
/// coordinates take the form `(a · q) / (m · q)`.
#[derive(Debug, Clone, Copy)]
pub struct ProjectedSegment {
    w: Vec3,
    omega: Vec3,
    t0: f64,
    t1: f64,
    au_w: f64,
    au_o: f64,
    av_w: f64,
    av_o: f64,
    m_w: f64,
    m_o: f64,
    su: i8,
    sv: i8,
    u_mid: f64,
    v_mid: f64,
}

impl ProjectedSegment {
    pub fn new(probe_origin: Vec3, ray: &Ray, seg: RaySegment) -> Self {
        let w = ray.origin - probe_origin;
        let omega = ray.dir;
        let mid = w + omega * (0.5 * (seg.t0 + seg.t1));
        let m = Vec3::new(sign_not_zero(mid.x), sign_not_zero(mid.y), sign_not_zero(mid.z));
        let (sx, sz) = (m.x, m.z);
        let (a_u, a_v) = if m.y > 0.0 {
            (
                Vec3::new(0.5, 0.0, 0.0) + m * 0.5,
                Vec3::new(0.0, 0.0, 0.5) + m * 0.5,
            )
        } else {
            // Folded lower hemisphere: u = sx (1 - sz z / L), v = sz (1 - sx x / L).
            (
                (m * sx - Vec3::Z * (sx * sz)) * 0.5 + m * 0.5,
                (m * sz - Vec3::X * (sx * sz)) * 0.5 + m * 0.5,
            )
        };
        let mut s = ProjectedSegment {
            w,
            omega,
            t0: seg.t0,
            t1: seg.t1,
            au_w: a_u.dot(w),
            au_o: a_u.dot(omega),
            av_w: a_v.dot(w),
            av_o: a_v.dot(omega),
            m_w: m.dot(w),
            m_o: m.dot(omega),
            su: 0,
            sv: 0,
            u_mid: 0.0,
            v_mid: 0.0,
        };
        (s.u_mid, s.v_mid) = s.uv_at(0.5 * (seg.t0 + seg.t1));
        // d/dt (a + b t) / (c + d t) has the sign of b c - a d.
        let du = s.au_o * s.m_w - s.au_w * s.m_o;
        let dv = s.av_o * s.m_w - s.av_w * s.m_o;
        let scale = (s.m_w.abs() + s.m_o.abs()) * (s.m_w.abs() + s.m_o.abs()) + 1e-300;
        s.su = if du.abs() <= 1e-14 * scale { 0 } else if du > 0.0 { 1 } else { -1 };
        s.sv = if dv.abs() <= 1e-14 * scale { 0 } else if dv > 0.0 { 1 } else { -1 };
        s
    }

    #[inline]
    pub fn t0(&self) -> f64 {
        self.t0
    }

    #[inline]
    pub fn t1(&self) -> f64 {
        self.t1
    }

    /// Probe-space position at `t`.
    #[inline]
    pub fn point(&self, t: f64) -> Vec3 {
        self.w + self.omega * t
    }

    /// Texture coordinate at `t` using this octant's projection.
    #[inline]
    pub fn uv_at(&self, t: f64) -> (f64, f64) {
        let l = self.m_w + t * self.m_o;
        ((self.au_w + t * self.au_o) / l, (self.av_w + t * self.av_o) / l)
    }

    /// Texel the ray occupies just after `t`. The nudge keeps the lookup off
    /// texel boundaries and off the probe origin.
    pub fn texel_at(&self, t: f64, resolution: u32) -> (u32, u32) {
        let t = (t + 1e-9 * (self.t1 - self.t0)).min(self.t1);
        let (u, v) = self.uv_at(t);
        texel_of(u, v, resolution)
    }

    /// First texel the segment occupies from `t` on, among texels with
    /// `lo <= (i, j) < hi`. Looks around the texel at `t` for the earliest
    /// non-empty interval, so a sliver cut off a texel corner right at `t`
    /// is not stepped over.
    pub fn first_texel(&self, t: f64, resolution: u32, lo: (u32, u32), hi: (u32, u32)) -> (u32, u32) {
        let (i, j) = self.texel_at(t, resolution);
        let center = (i.clamp(lo.0, hi.0 - 1), j.clamp(lo.1, hi.1 - 1));
        let mut best = center;
        let mut best_enter = f64::INFINITY;
        for dj in -1i64..=1 {
            for di in -1i64..=1 {
                let (ni, nj) = (center.0 as i64 + di, center.1 as i64 + dj);
                if ni < lo.0 as i64 || nj < lo.1 as i64 || ni >= hi.0 as i64 || nj >= hi.1 as i64 {
                    continue;
                }
                let (ta, tb) = self.texel_interval(ni as u32, nj as u32, resolution);
                if tb > ta && tb > t && ta < best_enter {
                    best = (ni as u32, nj as u32);
                    best_enter = ta;
                }
            }
        }
        best
    }

    /// Ray parameter where `u = c` (`axis = 0`) or `v = c` (`axis = 1`)
    /// on this segment's side of the projection pole, if the line gets there.
    #[inline]
    fn crossing(&self, axis: usize, c: f64) -> Option<f64> {
        let (a_w, a_o) = if axis == 0 {
            (self.au_w, self.au_o)
        } else {
            (self.av_w, self.av_o)
        };
        let t = -(a_w - c * self.m_w) / (a_o - c * self.m_o);
        (t.is_finite() && self.m_w + t * self.m_o > 0.0).then_some(t)
    }

    /// Entry and exit along one texture axis, `None` when the segment's
    /// coordinate never falls in `[index, index + 1) / resolution`.
    #[inline]
    fn axis_bounds(&self, axis: usize, index: u32, resolution: u32) -> Option<(f64, f64)> {
        let r = resolution as f64;
        let lo = index as f64 / r;
        let hi = (index + 1) as f64 / r;
        let (s, mid) = if axis == 0 {
            (self.su, self.u_mid)
        } else {
            (self.sv, self.v_mid)
        };
        // A boundary the line never reaches lies beyond one end of the
        // coordinate's range along the segment.
        let bound = |c: f64, reachable_side: bool, inf: f64| {
            self.crossing(axis, c).or(reachable_side.then_some(inf))
        };
        match s {
            0 => (lo <= mid && mid < hi).then_some((f64::NEG_INFINITY, f64::INFINITY)),
            1 => Some((
                bound(lo, lo <= mid, f64::NEG_INFINITY)?,
                bound(hi, hi >= mid, f64::INFINITY)?,
            )),
            _ => Some((
                bound(hi, hi >= mid, f64::NEG_INFINITY)?,
                bound(lo, lo <= mid, f64::INFINITY)?,
            )),
        }
    }

    /// Parametric interval of the segment inside texel `(i, j)`, empty
    /// (`enter >= exit`) when the segment misses it. Depends only on the
    /// texel, not on how the march reached it.
    pub fn texel_interval(&self, i: u32, j: u32, resolution: u32) -> (f64, f64) {
        match (self.axis_bounds(0, i, resolution), self.axis_bounds(1, j, resolution)) {
            (Some((ua, ub)), Some((va, vb))) => {
                let enter = ua.max(va).max(self.t0);
                let exit = ub.min(vb).min(self.t1);
                (enter, exit.max(enter))
            }
            _ => (self.t0, self.t0),
        }
    }

    /// Next texel along the segment after `(i, j)`, or `None` at its end.
    pub fn next_texel(&self, (i, j): (u32, u32), resolution: u32) -> Option<(u32, u32)> {
        let exit_u = self.exit_crossing(0, i, resolution);
        let exit_v = self.exit_crossing(1, j, resolution);
        let step_u = match (exit_u, exit_v) {
            (None, None) => return None,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a <= b,
        };
        let (ni, nj) = if step_u {
            (i as i64 + self.su as i64, j as i64)
        } else {
            (i as i64, j as i64 + self.sv as i64)
        };
        let r = resolution as i64;
        (ni >= 0 && ni < r && nj >= 0 && nj < r).then_some((ni as u32, nj as u32))
    }

    #[inline]
    fn exit_crossing(&self, axis: usize, index: u32, resolution: u32) -> Option<f64> {
        let s = if axis == 0 { self.su } else { self.sv };
        let r = resolution as f64;
        let c = match s {
            0 => return None,
            1 => (index + 1) as f64 / r,
            _ => index as f64 / r,
        };
        self.crossing(axis, c).filter(|&t| t < self.t1)
    }

    /// Largest and smallest distance from the probe over `[ta, tb]`.
    #[inline]
    fn depth_range(&self, ta: f64, tb: f64) -> (f64, f64) {
        let da = self.point(ta).length();
        let db = self.point(tb).length();
        let closest = (-self.w.dot(self.omega)).clamp(ta, tb);
        (da.max(db), self.point(closest).length())
    }
}

/// Result of the low-resolution stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowResResult {
    pub found: bool,
    /// Triggered block, or the last block visited when nothing was found.
    pub texel: (u32, u32),
    /// Entry and exit of the ray through [`texel`](Self::texel).
    pub t_enter: f64,
    pub t_exit: f64,
}

/// Marches low-resolution texels from `start` until a block whose minimum
/// distance lies in front of the ray somewhere inside it. No visibility test
/// is made at this level.
pub fn low_resolution_tracing(
    seg: &ProjectedSegment,
    chain: &MapChain,
    start: (u32, u32),
    cfg: &TraceConfig,
    counters: &mut TraceCounters,
) -> LowResResult {
    let res = chain.lo_resolution();
    let slack = (1.0 + cfg.distance_slack) * (1.0 + 1e-9);
    let mut texel = start;
    loop {
        counters.texel_fetches += 1;
        let r = chain.distance_lo.get(texel.0, texel.1);
        let (ta, tb) = seg.texel_interval(texel.0, texel.1, res);
        if !r.is_empty() && tb > ta {
            let (d_max, _) = seg.depth_range(ta, tb);
            if r.as_f64() < d_max * slack {
                return LowResResult {
                    found: true,
                    texel,
                    t_enter: ta,
                    t_exit: tb,
                };
            }
        }
        match seg.next_texel(texel, res) {
            Some(n) => texel = n,
            None => {
                return LowResResult {
                    found: false,
                    texel,
                    t_enter: ta,
                    t_exit: tb,
                }
            }
        }
    }
}

enum TexelVerdict {
    Pass,
    Decided(TraceOutcome),
}

#[inline]
fn evaluate_hi_texel(
    seg: &ProjectedSegment,
    chain: &MapChain,
    (i, j): (u32, u32),
    cfg: &TraceConfig,
    counters: &mut TraceCounters,
) -> TexelVerdict {
    let res = chain.hi_resolution();
    counters.texel_fetches += 1;
    let stored = chain.distance.get(i, j);
    if stored.is_empty() {
        return TexelVerdict::Pass;
    }
    let r = stored.as_f64();
    let (ta, tb) = seg.texel_interval(i, j, res);
    if !(tb > ta) {
        return TexelVerdict::Pass;
    }
    let (d_max, d_min) = seg.depth_range(ta, tb);
    if !(r < d_max * (1.0 + cfg.distance_slack)) {
        return TexelVerdict::Pass;
    }
    let facing = chain
        .incoming_direction(i, j)
        .map_or(false, |n| n.dot(seg.omega) < 0.0);
    let touches = match cfg.surface_thickness {
        Some(k) => r >= d_min * (1.0 - cfg.distance_slack) - k * r,
        None => true,
    };
    let status = if facing && touches {
        TraceStatus::Hit
    } else {
        TraceStatus::Unknown
    };
    debug_assert!(status != TraceStatus::Hit || facing);
    TexelVerdict::Decided(TraceOutcome {
        status,
        texel: Some((i, j)),
        uv: Some(texel_center(i, j, res)),
        irradiance: (status == TraceStatus::Hit).then(|| chain.irradiance.get(i, j)),
        distance: Some(r),
        probe: None,
    })
}

/// Refines a triggered low-resolution block at full resolution, starting
/// where the ray enters it at `t_enter`. MISS when no texel in the block
/// triggers.
pub fn high_resolution_tracing(
    seg: &ProjectedSegment,
    chain: &MapChain,
    block: (u32, u32),
    t_enter: f64,
    cfg: &TraceConfig,
    counters: &mut TraceCounters,
) -> TraceOutcome {
    let res = chain.hi_resolution();
    let f = chain.factor();
    let lo_i = block.0 * f;
    let lo_j = block.1 * f;
    let in_block = |(i, j): (u32, u32)| {
        i >= lo_i && i < lo_i + f && j >= lo_j && j < lo_j + f
    };
    let mut texel = seg.first_texel(t_enter, res, (lo_i, lo_j), (lo_i + f, lo_j + f));
    loop {
        if let TexelVerdict::Decided(out) = evaluate_hi_texel(seg, chain, texel, cfg, counters) {
            return out;
        }
        match seg.next_texel(texel, res) {
            Some(n) if in_block(n) => texel = n,
            _ => return TraceOutcome::MISS,
        }
    }
}

/// Two-level trace of one segment: skip empty space at low resolution,
/// refine triggered blocks at high resolution, and move past blocks whose
/// refinement found nothing.
pub fn trace_one_ray_segment(
    chain: &MapChain,
    seg: &ProjectedSegment,
    cfg: &TraceConfig,
    counters: &mut TraceCounters,
) -> TraceOutcome {
    let lo_res = chain.lo_resolution();
    let mut start = Some(seg.first_texel(seg.t0(), lo_res, (0, 0), (lo_res, lo_res)));
    while let Some(s) = start {
        let low = low_resolution_tracing(seg, chain, s, cfg, counters);
        if !low.found {
            return TraceOutcome::MISS;
        }
        let out = high_resolution_tracing(seg, chain, low.texel, low.t_enter, cfg, counters);
        if out.status != TraceStatus::Miss {
            return out;
        }
        start = seg.next_texel(low.texel, lo_res);
    }
    TraceOutcome::MISS
}

/// Single-level reference march over every high-resolution texel of the
/// segment.
pub fn trace_segment_single_level(
    chain: &MapChain,
    seg: &ProjectedSegment,
    cfg: &TraceConfig,
    counters: &mut TraceCounters,
) -> TraceOutcome {
    let res = chain.hi_resolution();
    let mut texel = seg.first_texel(seg.t0(), res, (0, 0), (res, res));
    loop {
        if let TexelVerdict::Decided(out) = evaluate_hi_texel(seg, chain, texel, cfg, counters) {
            return out;
        }
        match seg.next_texel(texel, res) {
            Some(n) => texel = n,
            None => return TraceOutcome::MISS,
        }
    }
}

/// O(1) lookup for a ray leaving the probe origin: every point along it
/// projects to the same texel. HIT iff that texel is set and its distance
/// lies in `[t0, t1]`.
fn eye_aligned(
    probe: &ProbeData,
    ray: &Ray,
    t0: f64,
    t1: f64,
    counters: &mut TraceCounters,
) -> TraceOutcome {
    let chain = probe.chain();
    let res = chain.hi_resolution();
    let uv = oct_encode_unchecked(ray.dir);
    let (i, j) = texel_of(uv.u, uv.v, res);
    counters.texel_fetches += 1;
    let stored = chain.distance.get(i, j);
    match stored.meters() {
        Some(r) if r >= t0 && r <= t1 => TraceOutcome {
            status: TraceStatus::Hit,
            texel: Some((i, j)),
            uv: Some(texel_center(i, j, res)),
            irradiance: Some(chain.irradiance.get(i, j)),
            distance: Some(r),
            probe: None,
        },
        _ => TraceOutcome::MISS,
    }
}

/// Traces `ray` against one probe. Rays starting at the probe origin take
/// the O(1) lookup; all others march their segments in order and return the
/// first non-MISS outcome.
pub fn trace_one_probe(
    probe: &ProbeData,
    ray: &Ray,
    cfg: &TraceConfig,
    counters: &mut TraceCounters,
) -> TraceOutcome {
    trace_one_probe_range(probe, ray, 0.0, f64::INFINITY, cfg, counters)
}

/// [`trace_one_probe`] restricted to ray parameters in `[t_min, t_max]`.
pub fn trace_one_probe_range(
    probe: &ProbeData,
    ray: &Ray,
    t_min: f64,
    t_max: f64,
    cfg: &TraceConfig,
    counters: &mut TraceCounters,
) -> TraceOutcome {
    counters.probe_traces += 1;
    if (ray.origin - probe.origin()).length() < cfg.eye_align_epsilon {
        return eye_aligned(probe, ray, t_min.max(cfg.ray_epsilon), t_max, counters);
    }
    march(probe, ray, t_min, t_max, cfg, counters, trace_one_ray_segment)
}

/// Single-level counterpart of [`trace_one_probe`] (no fast path, no
/// low-resolution skipping).
pub fn trace_one_probe_single_level(
    probe: &ProbeData,
    ray: &Ray,
    cfg: &TraceConfig,
    counters: &mut TraceCounters,
) -> TraceOutcome {
    counters.probe_traces += 1;
    march(probe, ray, 0.0, f64::INFINITY, cfg, counters, trace_segment_single_level)
}

fn march(
    probe: &ProbeData,
    ray: &Ray,
    t_min: f64,
    t_max: f64,
    cfg: &TraceConfig,
    counters: &mut TraceCounters,
    per_segment: fn(&MapChain, &ProjectedSegment, &TraceConfig, &mut TraceCounters) -> TraceOutcome,
) -> TraceOutcome {
    let Some((a, b)) = march_range(probe, ray, cfg) else {
        return TraceOutcome::MISS;
    };
    let t0 = a.max(t_min);
    let t1 = b.min(t_max);
    let segments = split_at_octants(probe.origin(), ray, t0, t1);
    for &s in segments.as_slice() {
        let seg = ProjectedSegment::new(probe.origin(), ray, s);
        let out = per_segment(probe.chain(), &seg, cfg, counters);
        if out.status != TraceStatus::Miss {
            return out;
        }
    }
    TraceOutcome::MISS
}
