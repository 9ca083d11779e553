//! Octahedral direction/texel mathematics and the per-probe map chain.
//!
//! Convention: the `+Y` axis maps to the center of the square and the
//! `(x, z)` plane is the equator. For a unit direction `d` with
//! `L = |x| + |y| + |z|` the upper hemisphere uses `p = (x / L, z / L)`;
//! the lower hemisphere folds `p` across the diamond edges with
//! `sign(0) = +1`. Texture coordinates are `uv = p * 0.5 + 0.5`, so all four
//! corners of the square decode to `-Y`.
//!
//! Texel `(i, j)` covers `u ∈ [i / res, (i + 1) / res)` and
//! `v ∈ [j / res, (j + 1) / res)`; maps are stored row-major with `j` as the
//! row index.

use alloc::vec;
use alloc::vec::Vec;

use half::f16;
#[allow(unused_imports)]
use num_traits::Float;

use crate::math::{sign_not_zero, Vec3};

/// Tolerance on `|d| = 1` accepted by [`oct_encode`].
pub const UNIT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum OctError {
    #[error("direction is not unit length (|d| = {length})")]
    NonUnitDirection { length: f64 },
    #[error("texture coordinate ({u}, {v}) outside [0, 1]^2")]
    UvOutOfRange { u: f64, v: f64 },
}

/// Normalized octahedral texture coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OctUv {
    pub u: f64,
    pub v: f64,
}

impl OctUv {
    pub fn new(u: f64, v: f64) -> Result<Self, OctError> {
        if (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v) {
            Ok(OctUv { u, v })
        } else {
            Err(OctError::UvOutOfRange { u, v })
        }
    }
}

/// Encodes a unit direction. Fails when `|d|` deviates from one by more than
/// [`UNIT_TOLERANCE`].
pub fn oct_encode(d: Vec3) -> Result<OctUv, OctError> {
    let length = d.length();
    if !((length - 1.0).abs() <= UNIT_TOLERANCE) {
        return Err(OctError::NonUnitDirection { length });
    }
    Ok(oct_encode_unchecked(d))
}

/// [`oct_encode`] without the unit-length check. Any non-zero vector encodes
/// to the same coordinate as its normalized form.
#[inline]
pub fn oct_encode_unchecked(d: Vec3) -> OctUv {
    let l1 = d.x.abs() + d.y.abs() + d.z.abs();
    let mut px = d.x / l1;
    let mut pz = d.z / l1;
    if d.y < 0.0 {
        let fx = sign_not_zero(px) * (1.0 - pz.abs());
        let fz = sign_not_zero(pz) * (1.0 - px.abs());
        px = fx;
        pz = fz;
    }
    OctUv {
        u: (px * 0.5 + 0.5).clamp(0.0, 1.0),
        v: (pz * 0.5 + 0.5).clamp(0.0, 1.0),
    }
}

/// Decodes a texture coordinate to a unit direction.
pub fn oct_decode(uv: OctUv) -> Result<Vec3, OctError> {
    OctUv::new(uv.u, uv.v)?;
    Ok(oct_decode_unchecked(uv.u, uv.v))
}

#[inline]
pub fn oct_decode_unchecked(u: f64, v: f64) -> Vec3 {
    let mut px = u * 2.0 - 1.0;
    let mut pz = v * 2.0 - 1.0;
    let y = 1.0 - px.abs() - pz.abs();
    if y < 0.0 {
        let fx = sign_not_zero(px) * (1.0 - pz.abs());
        let fz = sign_not_zero(pz) * (1.0 - px.abs());
        px = fx;
        pz = fz;
    }
    Vec3::new(px, y, pz).normalize()
}

/// Nearest texel index of `uv`, clamped into the map.
#[inline]
pub fn texel_of(u: f64, v: f64, resolution: u32) -> (u32, u32) {
    let r = resolution as f64;
    let max = resolution as i64 - 1;
    let i = ((u * r).floor() as i64).clamp(0, max) as u32;
    let j = ((v * r).floor() as i64).clamp(0, max) as u32;
    (i, j)
}

/// Texture coordinate of the center of texel `(i, j)`.
#[inline]
pub fn texel_center(i: u32, j: u32, resolution: u32) -> OctUv {
    let r = resolution as f64;
    OctUv {
        u: (i as f64 + 0.5) / r,
        v: (j as f64 + 0.5) / r,
    }
}

/// Mean angular width of a texel in radians (square root of its mean solid
/// angle).
pub fn mean_texel_angle(resolution: u32) -> f64 {
    (4.0 * core::f64::consts::PI).sqrt() / resolution as f64
}

/// 8-bit RGB irradiance texel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Rgb8(pub [u8; 3]);

impl Rgb8 {
    pub const BLACK: Rgb8 = Rgb8([0, 0, 0]);

    /// Quantizes a `[0, 1]` color.
    pub fn from_unit(c: [f32; 3]) -> Rgb8 {
        let q = |x: f32| (x.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8;
        Rgb8([q(c[0]), q(c[1]), q(c[2])])
    }

    pub fn to_unit(self) -> [f32; 3] {
        let s = |x: u8| x as f32 / 255.0;
        [s(self.0[0]), s(self.0[1]), s(self.0[2])]
    }
}

/// Radial distance texel in meters, stored as binary16. `EMPTY` marks
/// directions where no surface was observed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distance(pub f16);

impl Distance {
    pub const EMPTY: Distance = Distance(f16::INFINITY);

    /// Rounds to the nearest representable distance; finite inputs never
    /// become `EMPTY`.
    pub fn from_meters(m: f64) -> Distance {
        let m = m.max(0.0);
        let h = f16::from_f64(m);
        if h.is_infinite() {
            Distance(f16::MAX)
        } else {
            Distance(h)
        }
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0.is_infinite()
    }

    #[inline]
    pub fn meters(self) -> Option<f64> {
        if self.is_empty() {
            None
        } else {
            Some(self.0.to_f64())
        }
    }

    /// Distance with `EMPTY` read as `+inf`.
    #[inline]
    pub fn as_f64(self) -> f64 {
        self.0.to_f64()
    }

    pub fn to_bits(self) -> u16 {
        self.0.to_bits()
    }

    pub fn from_bits(bits: u16) -> Distance {
        Distance(f16::from_bits(bits))
    }
}

/// Direction texel: the position of the kept point inside its texel,
/// quantized to 15 levels per axis (`u` offset in the high nibble, `v` in the
/// low nibble, levels `1..=15`). `0` is `EMPTY`. The stored direction is
/// recovered by decoding that sub-texel position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirCode(pub u8);

impl DirCode {
    pub const EMPTY: DirCode = DirCode(0);
    /// Code of the texel center.
    pub const CENTER: DirCode = DirCode(0x88);
    const LEVELS: f64 = 15.0;

    /// `fu`, `fv` are the fractional offsets inside the texel in `[0, 1]`.
    pub fn from_offset(fu: f64, fv: f64) -> DirCode {
        let q = |f: f64| ((f * Self::LEVELS).floor() as i64).clamp(0, 14) as u8 + 1;
        DirCode((q(fu) << 4) | q(fv))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Fractional offset inside the texel, or `None` for `EMPTY` and
    /// malformed codes.
    pub fn offset(self) -> Option<(f64, f64)> {
        let hu = self.0 >> 4;
        let hv = self.0 & 0x0f;
        if hu == 0 || hv == 0 {
            return None;
        }
        Some((
            (hu as f64 - 0.5) / Self::LEVELS,
            (hv as f64 - 0.5) / Self::LEVELS,
        ))
    }
}

/// Square octahedral map with texels of type `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct OctMap<T> {
    resolution: u32,
    texels: Vec<T>,
}

impl<T: Copy> OctMap<T> {
    pub fn filled(resolution: u32, value: T) -> Self {
        assert!(resolution > 0, "octahedral map resolution must be positive");
        let n = resolution as usize * resolution as usize;
        OctMap {
            resolution,
            texels: vec![value; n],
        }
    }

    /// Wraps row-major texels. Returns `None` on a size mismatch.
    pub fn from_texels(resolution: u32, texels: Vec<T>) -> Option<Self> {
        if resolution == 0 || texels.len() != resolution as usize * resolution as usize {
            return None;
        }
        Some(OctMap { resolution, texels })
    }

    #[inline]
    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    #[inline]
    pub fn texels(&self) -> &[T] {
        &self.texels
    }

    #[inline]
    pub fn get(&self, i: u32, j: u32) -> T {
        self.texels[j as usize * self.resolution as usize + i as usize]
    }

    #[inline]
    pub fn set(&mut self, i: u32, j: u32, value: T) {
        let r = self.resolution as usize;
        self.texels[j as usize * r + i as usize] = value;
    }

    /// Nearest-texel lookup; `uv` is clamped into the map.
    #[inline]
    pub fn fetch(&self, uv: OctUv) -> T {
        let (i, j) = texel_of(uv.u, uv.v, self.resolution);
        self.get(i, j)
    }
}

impl OctMap<Distance> {
    pub fn count_empty(&self) -> usize {
        self.texels.iter().filter(|d| d.is_empty()).count()
    }
}

/// The five maps of one probe: high-resolution irradiance, distance and
/// direction, and low-resolution distance and direction.
#[derive(Debug, Clone, PartialEq)]
pub struct MapChain {
    pub irradiance: OctMap<Rgb8>,
    pub distance: OctMap<Distance>,
    pub direction: OctMap<DirCode>,
    pub distance_lo: OctMap<Distance>,
    pub direction_lo: OctMap<DirCode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ChainError {
    #[error("high-resolution maps disagree on resolution")]
    HighResMismatch,
    #[error("low-resolution maps disagree on resolution")]
    LowResMismatch,
    #[error("high resolution {hi} is not a multiple of low resolution {lo}")]
    NotMultiple { hi: u32, lo: u32 },
}

impl MapChain {
    pub fn new(
        irradiance: OctMap<Rgb8>,
        distance: OctMap<Distance>,
        direction: OctMap<DirCode>,
        distance_lo: OctMap<Distance>,
        direction_lo: OctMap<DirCode>,
    ) -> Result<Self, ChainError> {
        let hi = irradiance.resolution();
        if distance.resolution() != hi || direction.resolution() != hi {
            return Err(ChainError::HighResMismatch);
        }
        let lo = distance_lo.resolution();
        if direction_lo.resolution() != lo {
            return Err(ChainError::LowResMismatch);
        }
        if lo > hi || hi % lo != 0 {
            return Err(ChainError::NotMultiple { hi, lo });
        }
        Ok(MapChain {
            irradiance,
            distance,
            direction,
            distance_lo,
            direction_lo,
        })
    }

    #[inline]
    pub fn hi_resolution(&self) -> u32 {
        self.distance.resolution()
    }

    #[inline]
    pub fn lo_resolution(&self) -> u32 {
        self.distance_lo.resolution()
    }

    /// High-res texels per low-res texel along one axis.
    #[inline]
    pub fn factor(&self) -> u32 {
        self.hi_resolution() / self.lo_resolution()
    }

    /// Incoming direction stored at a high-res texel: the unit vector from the
    /// kept point toward the probe origin.
    #[inline]
    pub fn incoming_direction(&self, i: u32, j: u32) -> Option<Vec3> {
        decode_incoming(self.direction.get(i, j), i, j, self.hi_resolution())
    }

    /// Incoming direction stored at a low-res texel.
    pub fn incoming_direction_lo(&self, i: u32, j: u32) -> Option<Vec3> {
        decode_incoming(self.direction_lo.get(i, j), i, j, self.lo_resolution())
    }
}

fn decode_incoming(code: DirCode, i: u32, j: u32, resolution: u32) -> Option<Vec3> {
    let (fu, fv) = code.offset()?;
    let r = resolution as f64;
    let u = (i as f64 + fu) / r;
    let v = (j as f64 + fv) / r;
    Some(-oct_decode_unchecked(u, v))
}
