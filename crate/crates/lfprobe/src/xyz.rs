//! Plain-text `.xyz` point clouds: one `x y z r g b` point per line.
//!
//! Colors are either 0–255 integers or 0–1 reals. The scale is chosen per
//! file: any color component above 1 selects the 0–255 scale.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use lfprobe_core::math::Vec3;
use lfprobe_core::pointcloud::{ColoredPoint, PointCloud, PointCloudError};

/// Share of malformed lines above which loading fails.
pub const MAX_MALFORMED_FRACTION: f64 = 0.01;

/// Line numbers listed in a malformed-input error.
const REPORTED_LINES: usize = 20;

#[derive(Debug, thiserror::Error)]
pub enum XyzError {
    #[error("cannot read point cloud: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Cloud(#[from] PointCloudError),
    #[error("{malformed} of {lines} lines are malformed (first at lines {first:?})")]
    TooManyMalformed {
        malformed: usize,
        lines: usize,
        first: Vec<usize>,
    },
}

/// Parse statistics.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct XyzReport {
    /// Non-empty lines seen.
    pub lines: usize,
    /// 1-based numbers of lines that could not be parsed.
    pub malformed: Vec<usize>,
    /// Colors were read on the 0–255 scale.
    pub byte_colors: bool,
}

fn parse_line(line: &str) -> Option<[f64; 6]> {
    let mut out = [0.0f64; 6];
    let mut fields = line.split_whitespace();
    for slot in out.iter_mut() {
        *slot = fields.next()?.parse().ok()?;
        if !slot.is_finite() {
            return None;
        }
    }
    if fields.next().is_some() || out[3..].iter().any(|&c| c < 0.0) {
        return None;
    }
    Some(out)
}

/// Reads a cloud from any buffered reader.
pub fn read_xyz<R: BufRead>(reader: R) -> Result<(PointCloud, XyzReport), XyzError> {
    let mut report = XyzReport::default();
    let mut rows = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        report.lines += 1;
        match parse_line(trimmed) {
            Some(row) => rows.push(row),
            None => report.malformed.push(n + 1),
        }
    }
    if report.lines > 0
        && report.malformed.len() as f64 > MAX_MALFORMED_FRACTION * report.lines as f64
    {
        return Err(XyzError::TooManyMalformed {
            malformed: report.malformed.len(),
            lines: report.lines,
            first: report.malformed.iter().copied().take(REPORTED_LINES).collect(),
        });
    }
    report.byte_colors = rows.iter().any(|r| r[3..].iter().any(|&c| c > 1.0));
    let scale = if report.byte_colors { 1.0 / 255.0 } else { 1.0 };
    let points = rows
        .iter()
        .map(|r| ColoredPoint {
            position: Vec3::new(r[0], r[1], r[2]),
            color: [
                (r[3] * scale).min(1.0) as f32,
                (r[4] * scale).min(1.0) as f32,
                (r[5] * scale).min(1.0) as f32,
            ],
        })
        .collect();
    Ok((PointCloud::new(points)?, report))
}

/// Loads a `.xyz` file, labelling the cloud with its file name.
pub fn load_xyz(path: &Path) -> Result<(PointCloud, XyzReport), XyzError> {
    let (cloud, report) = read_xyz(BufReader::new(File::open(path)?))?;
    let label = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok((cloud.with_label(label), report))
}

/// Writes positions with enough digits for 1e-6 m round trips and colors as
/// 0–255 integers.
pub fn write_xyz<W: Write>(cloud: &PointCloud, writer: W) -> io::Result<()> {
    let mut w = BufWriter::new(writer);
    for p in cloud.points() {
        let c = p.color.map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8);
        writeln!(
            w,
            "{:.7} {:.7} {:.7} {} {} {}",
            p.position.x, p.position.y, p.position.z, c[0], c[1], c[2]
        )?;
    }
    w.flush()
}

pub fn save_xyz(cloud: &PointCloud, path: &Path) -> io::Result<()> {
    write_xyz(cloud, File::create(path)?)
}
