//! The `LFPROBE1` probe file.
//!
//! All integers and floats are little-endian.
//!
//! | bytes | field |
//! |-------|-------|
//! | 8 | magic `LFPROBE1` |
//! | 4 | format version (`u32`) |
//! | 24 | origin, 3 x `f64` |
//! | 4 + 4 | high and low resolution (`u32`) |
//! | 5 + 3 | payload format codes, 3 zero bytes |
//! | 8 | bake time, seconds since the Unix epoch (`u64`) |
//! | 8 | contributing point count (`u64`) |
//! | 48 | cloud bounds min then max, 6 x `f64`, NaN when unknown |
//! | 2 + n | source label length (`u16`) and UTF-8 bytes |
//!
//! The five maps follow in the order irradiance, distance, direction (high
//! resolution), distance, direction (low resolution), each row-major with
//! texel `(i, j)` at `j * resolution + i`.

use std::fs;
use std::path::Path;

use half::f16;
use lfprobe_core::bake::{payload_bytes, ProbeData, ProbeMeta};
use lfprobe_core::math::{Aabb, Vec3};
use lfprobe_core::octmap::{ChainError, DirCode, Distance, MapChain, OctMap, Rgb8};

pub const MAGIC: &[u8; 8] = b"LFPROBE1";
pub const VERSION: u32 = 1;

/// Payload format codes.
pub const FORMAT_RGB8: u8 = 1;
pub const FORMAT_F16: u8 = 2;
pub const FORMAT_DIR8: u8 = 3;
const FORMATS: [u8; 5] = [FORMAT_RGB8, FORMAT_F16, FORMAT_DIR8, FORMAT_F16, FORMAT_DIR8];

/// Header bytes before the source label.
pub const FIXED_HEADER_BYTES: u64 = 8 + 4 + 24 + 8 + 8 + 8 + 8 + 48 + 2;

#[derive(Debug, thiserror::Error)]
pub enum ProbeFileError {
    #[error("probe file i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a probe file (bad magic)")]
    BadMagic,
    #[error("unsupported probe file version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("unsupported payload formats {0:?}")]
    UnsupportedFormat([u8; 5]),
    #[error("probe file truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: u64, actual: u64 },
    #[error("probe file has {actual} bytes, layout needs exactly {expected}")]
    TrailingBytes { expected: u64, actual: u64 },
    #[error("source label is not valid UTF-8")]
    BadLabel,
    #[error("source label longer than {max} bytes", max = u16::MAX)]
    LabelTooLong,
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// Exact file size for the given resolutions and source label length.
pub fn layout_size(r_hi: u32, r_lo: u32, label_len: usize) -> u64 {
    FIXED_HEADER_BYTES + label_len as u64 + payload_bytes(r_hi, r_lo)
}

/// Exact file size of `probe` once saved.
pub fn file_size(probe: &ProbeData) -> u64 {
    let c = probe.chain();
    layout_size(c.hi_resolution(), c.lo_resolution(), probe.meta().source.len())
}

pub fn encode_probe(probe: &ProbeData) -> Result<Vec<u8>, ProbeFileError> {
    let meta = probe.meta();
    let label = meta.source.as_bytes();
    if label.len() > u16::MAX as usize {
        return Err(ProbeFileError::LabelTooLong);
    }
    let chain = probe.chain();
    let mut out = Vec::with_capacity(file_size(probe) as usize);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for c in probe.origin().to_array() {
        out.extend_from_slice(&c.to_le_bytes());
    }
    out.extend_from_slice(&chain.hi_resolution().to_le_bytes());
    out.extend_from_slice(&chain.lo_resolution().to_le_bytes());
    out.extend_from_slice(&FORMATS);
    out.extend_from_slice(&[0; 3]);
    out.extend_from_slice(&meta.baked_at.to_le_bytes());
    out.extend_from_slice(&meta.point_count.to_le_bytes());
    let bounds = match meta.bounds {
        Some(b) => [b.min.to_array(), b.max.to_array()].concat(),
        None => vec![f64::NAN; 6],
    };
    for c in bounds {
        out.extend_from_slice(&c.to_le_bytes());
    }
    out.extend_from_slice(&(label.len() as u16).to_le_bytes());
    out.extend_from_slice(label);

    for t in chain.irradiance.texels() {
        out.extend_from_slice(&t.0);
    }
    for t in chain.distance.texels() {
        out.extend_from_slice(&t.to_bits().to_le_bytes());
    }
    out.extend(chain.direction.texels().iter().map(|d| d.0));
    for t in chain.distance_lo.texels() {
        out.extend_from_slice(&t.to_bits().to_le_bytes());
    }
    out.extend(chain.direction_lo.texels().iter().map(|d| d.0));
    debug_assert_eq!(out.len() as u64, file_size(probe));
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> &'a [u8] {
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        s
    }

    fn u16(&mut self) -> u16 {
        u16::from_le_bytes(self.take(2).try_into().unwrap())
    }

    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take(4).try_into().unwrap())
    }

    fn u64(&mut self) -> u64 {
        u64::from_le_bytes(self.take(8).try_into().unwrap())
    }

    fn f64(&mut self) -> f64 {
        f64::from_le_bytes(self.take(8).try_into().unwrap())
    }

    fn vec3(&mut self) -> Vec3 {
        Vec3::new(self.f64(), self.f64(), self.f64())
    }
}

fn distances(bytes: &[u8]) -> Vec<Distance> {
    bytes
        .chunks_exact(2)
        .map(|b| Distance(f16::from_bits(u16::from_le_bytes([b[0], b[1]]))))
        .collect()
}

fn map<T: Copy>(resolution: u32, texels: Vec<T>) -> OctMap<T> {
    OctMap::from_texels(resolution, texels).expect("texel count matches the layout")
}

pub fn decode_probe(bytes: &[u8]) -> Result<ProbeData, ProbeFileError> {
    let actual = bytes.len() as u64;
    if actual < 8 + 4 {
        return Err(ProbeFileError::Truncated {
            expected: FIXED_HEADER_BYTES,
            actual,
        });
    }
    if &bytes[..8] != MAGIC {
        return Err(ProbeFileError::BadMagic);
    }
    let mut cur = Cursor { bytes, pos: 8 };
    let version = cur.u32();
    if version != VERSION {
        return Err(ProbeFileError::VersionMismatch {
            found: version,
            expected: VERSION,
        });
    }
    if actual < FIXED_HEADER_BYTES {
        return Err(ProbeFileError::Truncated {
            expected: FIXED_HEADER_BYTES,
            actual,
        });
    }
    let origin = cur.vec3();
    let r_hi = cur.u32();
    let r_lo = cur.u32();
    let formats: [u8; 5] = cur.take(5).try_into().unwrap();
    cur.take(3);
    if formats != FORMATS {
        return Err(ProbeFileError::UnsupportedFormat(formats));
    }
    let baked_at = cur.u64();
    let point_count = cur.u64();
    let (min, max) = (cur.vec3(), cur.vec3());
    let label_len = cur.u16() as usize;
    let expected = layout_size(r_hi, r_lo, label_len);
    if actual < expected {
        return Err(ProbeFileError::Truncated { expected, actual });
    }
    if actual > expected {
        return Err(ProbeFileError::TrailingBytes { expected, actual });
    }
    let source = std::str::from_utf8(cur.take(label_len))
        .map_err(|_| ProbeFileError::BadLabel)?
        .to_owned();

    let hi = r_hi as usize * r_hi as usize;
    let lo = r_lo as usize * r_lo as usize;
    let irradiance: Vec<Rgb8> = cur
        .take(hi * 3)
        .chunks_exact(3)
        .map(|c| Rgb8([c[0], c[1], c[2]]))
        .collect();
    let distance = distances(cur.take(hi * 2));
    let direction: Vec<DirCode> = cur.take(hi).iter().map(|&b| DirCode(b)).collect();
    let distance_lo = distances(cur.take(lo * 2));
    let direction_lo: Vec<DirCode> = cur.take(lo).iter().map(|&b| DirCode(b)).collect();

    let chain = MapChain::new(
        map(r_hi, irradiance),
        map(r_hi, distance),
        map(r_hi, direction),
        map(r_lo, distance_lo),
        map(r_lo, direction_lo),
    )?;
    let bounds = (min.is_finite() && max.is_finite()).then(|| Aabb::new(min, max));
    let meta = ProbeMeta {
        baked_at,
        source,
        point_count,
        bounds,
    };
    Ok(ProbeData::new(origin, chain, meta))
}

pub fn save_probe(probe: &ProbeData, path: &Path) -> Result<(), ProbeFileError> {
    fs::write(path, encode_probe(probe)?)?;
    Ok(())
}

pub fn load_probe(path: &Path) -> Result<ProbeData, ProbeFileError> {
    decode_probe(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lfprobe_core::bake::bake_probe;
    use lfprobe_core::pointcloud::{ColoredPoint, PointCloud};

    fn probe() -> ProbeData {
        let pts = (0..50)
            .map(|k| ColoredPoint {
                position: Vec3::new((k as f64).sin() * 3.0, (k as f64 * 0.7).cos(), 2.0 + k as f64 * 0.01),
                color: [k as f32 / 50.0, 0.5, 1.0],
            })
            .collect();
        let cloud = PointCloud::new(pts).unwrap().with_label("unit");
        bake_probe(&cloud, Vec3::new(0.1, 0.2, 0.3), 32, 8).unwrap().0.with_timestamp(42)
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let p = probe();
        let bytes = encode_probe(&p).unwrap();
        assert_eq!(bytes.len() as u64, file_size(&p));
        let back = decode_probe(&bytes).unwrap();
        assert_eq!(back.chain().distance.texels().len(), p.chain().distance.texels().len());
        let bits = |q: &ProbeData| -> Vec<u16> { q.chain().distance.texels().iter().map(|d| d.to_bits()).collect() };
        assert_eq!(bits(&back), bits(&p));
        assert_eq!(back.chain().irradiance, p.chain().irradiance);
        assert_eq!(back.chain().direction, p.chain().direction);
        assert_eq!(back.chain().direction_lo, p.chain().direction_lo);
        assert_eq!(back.meta(), p.meta());
        assert_eq!(back.origin(), p.origin());
    }

    #[test]
    fn truncation_names_lengths() {
        let bytes = encode_probe(&probe()).unwrap();
        let cut = &bytes[..bytes.len() - 10];
        match decode_probe(cut).unwrap_err() {
            ProbeFileError::Truncated { expected, actual } => {
                assert_eq!(expected, bytes.len() as u64);
                assert_eq!(actual, bytes.len() as u64 - 10);
            }
            e => panic!("unexpected {e}"),
        }
        assert!(matches!(
            decode_probe(&bytes[..20]).unwrap_err(),
            ProbeFileError::Truncated { .. }
        ));
    }

    #[test]
    fn version_and_magic_are_checked() {
        let mut bytes = encode_probe(&probe()).unwrap();
        bytes[8] = 9;
        assert!(matches!(
            decode_probe(&bytes).unwrap_err(),
            ProbeFileError::VersionMismatch { found: 9, expected: 1 }
        ));
        bytes[0] = b'X';
        assert!(matches!(decode_probe(&bytes).unwrap_err(), ProbeFileError::BadMagic));
    }

    #[test]
    fn paper_resolution_layout() {
        // 2048^2 high-resolution and 128^2 low-resolution maps.
        assert_eq!(payload_bytes(2048, 128), 25_214_976);
        assert_eq!(layout_size(2048, 128, 4), 25_214_976 + FIXED_HEADER_BYTES + 4);
    }
}
