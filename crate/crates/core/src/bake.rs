//! Baking point clouds into probes.
//!
//! Every point is projected onto the probe's unit sphere and octahedral map;
//! each high-resolution texel keeps the point nearest to the probe origin.
//! The low-resolution distance map is a MIN-filter over blocks of the
//! high-resolution one, so it never reports a surface farther away than any
//! texel it covers.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::{Aabb, Vec3};
use crate::octmap::{
    oct_encode_unchecked, texel_of, ChainError, DirCode, Distance, MapChain, OctMap, Rgb8,
};
use crate::pointcloud::{ColoredPoint, PointCloud};

/// Points closer than this to the probe origin have no usable direction.
pub const MIN_POINT_DISTANCE: f64 = 1e-6;

/// Bytes per high-resolution texel: RGB8 irradiance, binary16 distance and
/// one direction byte.
pub const HI_TEXEL_BYTES: u64 = 3 + 2 + 1;
/// Bytes per low-resolution texel: binary16 distance and one direction byte.
pub const LO_TEXEL_BYTES: u64 = 2 + 1;

/// Size of the five texel payloads of one probe, excluding any header.
pub fn payload_bytes(r_hi: u32, r_lo: u32) -> u64 {
    let hi = r_hi as u64 * r_hi as u64;
    let lo = r_lo as u64 * r_lo as u64;
    hi * HI_TEXEL_BYTES + lo * LO_TEXEL_BYTES
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProbeMeta {
    /// Seconds since the Unix epoch; zero when unknown.
    pub baked_at: u64,
    /// Identifier of the source point cloud.
    pub source: String,
    /// Points that contributed to the bake (coincident points excluded).
    pub point_count: u64,
    /// Bounds of the source cloud; limits how far rays are marched.
    pub bounds: Option<Aabb>,
}

/// One baked light field probe. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeData {
    origin: Vec3,
    chain: MapChain,
    meta: ProbeMeta,
}

impl ProbeData {
    pub fn new(origin: Vec3, chain: MapChain, meta: ProbeMeta) -> Self {
        ProbeData {
            origin,
            chain,
            meta,
        }
    }

    #[inline]
    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    #[inline]
    pub fn chain(&self) -> &MapChain {
        &self.chain
    }

    pub fn meta(&self) -> &ProbeMeta {
        &self.meta
    }

    pub fn with_timestamp(mut self, baked_at: u64) -> Self {
        self.meta.baked_at = baked_at;
        self
    }

    /// Fraction of high-resolution texels holding a surface.
    pub fn coverage(&self) -> f64 {
        let d = &self.chain.distance;
        let n = d.texels().len();
        (n - d.count_empty()) as f64 / n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum BakeError {
    #[error("resolutions must be positive (hi {hi}, lo {lo})")]
    ZeroResolution { hi: u32, lo: u32 },
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// Diagnostics from a bake; callers decide how to surface them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BakeReport {
    /// Points skipped because they coincide with the probe origin.
    pub skipped_coincident: u64,
    /// Texels that received a point.
    pub filled_texels: u64,
    /// The probe origin lies outside the cloud bounds.
    pub origin_outside_bounds: bool,
}

/// Bakes the five maps of a probe at `origin`.
pub fn bake_probe(
    cloud: &PointCloud,
    origin: Vec3,
    r_hi: u32,
    r_lo: u32,
) -> Result<(ProbeData, BakeReport), BakeError> {
    if r_hi == 0 || r_lo == 0 {
        return Err(BakeError::ZeroResolution { hi: r_hi, lo: r_lo });
    }
    if r_lo > r_hi || r_hi % r_lo != 0 {
        return Err(ChainError::NotMultiple { hi: r_hi, lo: r_lo }.into());
    }
    let points = cloud.points();
    let n_texels = r_hi as usize * r_hi as usize;
    let mut best: Vec<u32> = vec![u32::MAX; n_texels];
    let mut best_dist: Vec<f64> = vec![f64::INFINITY; n_texels];
    let mut report = BakeReport {
        origin_outside_bounds: !cloud.bounds().contains(origin),
        ..BakeReport::default()
    };

    for (k, p) in points.iter().enumerate() {
        let q = p.position - origin;
        let d = q.length();
        if !(d >= MIN_POINT_DISTANCE) {
            report.skipped_coincident += 1;
            continue;
        }
        let uv = oct_encode_unchecked(q);
        let (i, j) = texel_of(uv.u, uv.v, r_hi);
        let slot = j as usize * r_hi as usize + i as usize;
        let cur = best[slot];
        let better = cur == u32::MAX
            || d < best_dist[slot]
            || (d == best_dist[slot] && tie_key(p) < tie_key(&points[cur as usize]));
        if better {
            best[slot] = k as u32;
            best_dist[slot] = d;
        }
    }

    let mut irradiance = OctMap::filled(r_hi, Rgb8::BLACK);
    let mut distance = OctMap::filled(r_hi, Distance::EMPTY);
    let mut direction = OctMap::filled(r_hi, DirCode::EMPTY);
    let res = r_hi as f64;
    for j in 0..r_hi {
        for i in 0..r_hi {
            let slot = j as usize * r_hi as usize + i as usize;
            let k = best[slot];
            if k == u32::MAX {
                continue;
            }
            report.filled_texels += 1;
            let p = &points[k as usize];
            let uv = oct_encode_unchecked(p.position - origin);
            irradiance.set(i, j, Rgb8::from_unit(p.color));
            distance.set(i, j, Distance::from_meters(best_dist[slot]));
            direction.set(
                i,
                j,
                DirCode::from_offset(uv.u * res - i as f64, uv.v * res - j as f64),
            );
        }
    }

    let distance_lo = derive_low_res(&distance, r_hi / r_lo);
    let direction_lo = low_res_directions(&distance_lo);
    let chain = MapChain::new(irradiance, distance, direction, distance_lo, direction_lo)?;
    let meta = ProbeMeta {
        baked_at: 0,
        source: cloud.label.clone(),
        point_count: points.len() as u64 - report.skipped_coincident,
        bounds: Some(cloud.bounds()),
    };
    Ok((ProbeData::new(origin, chain, meta), report))
}

/// A probe at an arbitrary position of a unified cloud. Uses exactly the
/// [`bake_probe`] path; [`BakeReport::origin_outside_bounds`] flags origins
/// outside the captured region.
pub fn simulate_probe(
    cloud: &PointCloud,
    origin: Vec3,
    r_hi: u32,
    r_lo: u32,
) -> Result<(ProbeData, BakeReport), BakeError> {
    bake_probe(cloud, origin, r_hi, r_lo)
}

/// Order-independent tie break between equidistant points.
fn tie_key(p: &ColoredPoint) -> [u64; 6] {
    [
        p.position.x.to_bits(),
        p.position.y.to_bits(),
        p.position.z.to_bits(),
        p.color[0].to_bits() as u64,
        p.color[1].to_bits() as u64,
        p.color[2].to_bits() as u64,
    ]
}

/// MIN-filters `factor x factor` blocks of a distance map. `EMPTY` texels are
/// ignored; an all-`EMPTY` block stays `EMPTY`.
///
/// # Panics
/// If `factor` is zero or does not divide the resolution.
pub fn derive_low_res(high: &OctMap<Distance>, factor: u32) -> OctMap<Distance> {
    let r_hi = high.resolution();
    assert!(factor > 0 && r_hi % factor == 0, "factor must divide the resolution");
    let r_lo = r_hi / factor;
    let mut lo = OctMap::filled(r_lo, Distance::EMPTY);
    for jl in 0..r_lo {
        for il in 0..r_lo {
            let mut m = Distance::EMPTY;
            for j in jl * factor..(jl + 1) * factor {
                for i in il * factor..(il + 1) * factor {
                    let d = high.get(i, j);
                    if d.as_f64() < m.as_f64() {
                        m = d;
                    }
                }
            }
            lo.set(il, jl, m);
        }
    }
    lo
}

/// Low-resolution direction map: the texel-center direction wherever the
/// low-resolution distance is set.
pub fn low_res_directions(distance_lo: &OctMap<Distance>) -> OctMap<DirCode> {
    let r = distance_lo.resolution();
    let mut out = OctMap::filled(r, DirCode::EMPTY);
    for j in 0..r {
        for i in 0..r {
            if !distance_lo.get(i, j).is_empty() {
                out.set(i, j, DirCode::CENTER);
            }
        }
    }
    out
}
