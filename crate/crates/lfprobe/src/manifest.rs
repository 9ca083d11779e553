//! JSON grid manifests.
//!
//! ```json
//! {
//!   "grid_origin": [0.75, 0.6, 0.75],
//!   "cell_size": 1.5,
//!   "dims": [2, 2, 4],
//!   "probes": [{ "index": [0, 0, 0], "path": "probe_0_0_0.lfprobe" }]
//! }
//! ```
//!
//! Probe paths are relative to the manifest's directory.

use std::path::{Path, PathBuf};

use lfprobe_core::grid::{GridError, ProbeGrid};
use lfprobe_core::math::Vec3;
use serde::{Deserialize, Serialize};

use crate::probe_file::{load_probe, ProbeFileError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridManifest {
    pub grid_origin: [f64; 3],
    pub cell_size: f64,
    pub dims: [usize; 3],
    pub probes: Vec<ManifestProbe>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestProbe {
    pub index: [usize; 3],
    pub path: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid manifest {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("manifest lists probe index {0:?} twice")]
    Duplicate([usize; 3]),
    #[error("manifest probe index {0:?} is outside the grid dimensions")]
    OutOfRange([usize; 3]),
    #[error("manifest has no probe at index {0:?}")]
    Missing([usize; 3]),
    #[error("probe {path}: {source}")]
    Probe {
        path: PathBuf,
        source: ProbeFileError,
    },
    #[error(transparent)]
    Grid(#[from] GridError),
}

impl GridManifest {
    pub fn read(path: &Path) -> Result<GridManifest, ManifestError> {
        let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ManifestError::Json {
            path: path.to_owned(),
            source,
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), ManifestError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text).map_err(|source| ManifestError::Io {
            path: path.to_owned(),
            source,
        })
    }

    /// Probe paths ordered like [`ProbeGrid`] storage.
    pub fn ordered_paths(&self) -> Result<Vec<&Path>, ManifestError> {
        let [nx, ny, nz] = self.dims;
        let mut slots: Vec<Option<&Path>> = vec![None; nx * ny * nz];
        for p in &self.probes {
            let [i, j, k] = p.index;
            if i >= nx || j >= ny || k >= nz {
                return Err(ManifestError::OutOfRange(p.index));
            }
            let slot = &mut slots[i + nx * (j + ny * k)];
            if slot.is_some() {
                return Err(ManifestError::Duplicate(p.index));
            }
            *slot = Some(&p.path);
        }
        slots
            .into_iter()
            .enumerate()
            .map(|(n, s)| s.ok_or(ManifestError::Missing([n % nx, (n / nx) % ny, n / (nx * ny)])))
            .collect()
    }
}

/// Loads a manifest and every probe it lists.
pub fn load_grid(manifest_path: &Path) -> Result<ProbeGrid, ManifestError> {
    let manifest = GridManifest::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let probes = manifest
        .ordered_paths()?
        .into_iter()
        .map(|rel| {
            let path = base.join(rel);
            load_probe(&path).map_err(|source| ManifestError::Probe { path, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProbeGrid::new(
        Vec3::from_array(manifest.grid_origin),
        manifest.cell_size,
        manifest.dims,
        probes,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(indices: &[[usize; 3]]) -> GridManifest {
        GridManifest {
            grid_origin: [0.0; 3],
            cell_size: 1.0,
            dims: [2, 1, 1],
            probes: indices
                .iter()
                .map(|&index| ManifestProbe {
                    index,
                    path: format!("p{}.lfprobe", index[0]).into(),
                })
                .collect(),
        }
    }

    #[test]
    fn orders_by_lattice_index() {
        let m = manifest(&[[1, 0, 0], [0, 0, 0]]);
        let paths = m.ordered_paths().unwrap();
        assert_eq!(paths, [Path::new("p0.lfprobe"), Path::new("p1.lfprobe")]);
    }

    #[test]
    fn rejects_gaps_and_duplicates() {
        assert!(matches!(manifest(&[[0, 0, 0]]).ordered_paths(), Err(ManifestError::Missing([1, 0, 0]))));
        assert!(matches!(
            manifest(&[[0, 0, 0], [0, 0, 0]]).ordered_paths(),
            Err(ManifestError::Duplicate(_))
        ));
        assert!(matches!(
            manifest(&[[0, 0, 0], [2, 0, 0]]).ordered_paths(),
            Err(ManifestError::OutOfRange(_))
        ));
    }

    #[test]
    fn json_shape() {
        let m = manifest(&[[0, 0, 0], [1, 0, 0]]);
        let v: serde_json::Value = serde_json::to_value(&m).unwrap();
        assert_eq!(v["cell_size"], 1.0);
        assert_eq!(v["probes"][1]["index"], serde_json::json!([1, 0, 0]));
    }
}
