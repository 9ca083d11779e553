//! A renderable source: one probe file or a grid manifest.

use std::path::Path;

use lfprobe_core::bake::ProbeData;
use lfprobe_core::grid::ProbeGrid;
use lfprobe_core::math::Aabb;
use lfprobe_core::render::{render, Frame, GridTracer, RayTracer, SingleProbe};
use lfprobe_core::trace::TraceConfig;

use crate::camera::{CameraSpec, CameraSpecError};
use crate::image::encode_png;
use crate::manifest::{load_grid, ManifestError};
use crate::probe_file::{load_probe, ProbeFileError};

#[derive(Debug, thiserror::Error)]
pub enum SourceError {
    #[error(transparent)]
    Probe(#[from] ProbeFileError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
}

#[derive(Debug, Clone)]
pub enum ProbeSource {
    Probe(ProbeData),
    Grid(ProbeGrid),
}

impl ProbeSource {
    /// `.json` paths are grid manifests, anything else a probe file.
    pub fn load(path: &Path) -> Result<ProbeSource, SourceError> {
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Ok(ProbeSource::Grid(load_grid(path)?))
        } else {
            Ok(ProbeSource::Probe(load_probe(path)?))
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ProbeSource::Probe(_) => "probe",
            ProbeSource::Grid(_) => "grid",
        }
    }

    pub fn probe_count(&self) -> usize {
        match self {
            ProbeSource::Probe(_) => 1,
            ProbeSource::Grid(g) => g.probes().len(),
        }
    }

    /// Probe counts per axis; `[1, 1, 1]` for a single probe.
    pub fn dims(&self) -> [usize; 3] {
        match self {
            ProbeSource::Probe(_) => [1, 1, 1],
            ProbeSource::Grid(g) => g.dims(),
        }
    }

    /// Union of the cloud bounds recorded in the probes.
    pub fn bounds(&self) -> Option<Aabb> {
        let probes = match self {
            ProbeSource::Probe(p) => core::slice::from_ref(p),
            ProbeSource::Grid(g) => g.probes(),
        };
        probes
            .iter()
            .filter_map(|p| p.meta().bounds)
            .reduce(|a, b| Aabb::new(a.min.min(b.min), a.max.max(b.max)))
    }

    pub fn tracer(&self, config: TraceConfig) -> Box<dyn RayTracer + '_> {
        match self {
            ProbeSource::Probe(probe) => Box::new(SingleProbe { probe, config }),
            ProbeSource::Grid(grid) => Box::new(GridTracer {
                grid,
                config,
                t_max: f64::INFINITY,
            }),
        }
    }
}

impl ProbeSource {
    pub fn render(&self, spec: &CameraSpec, config: TraceConfig) -> Result<Frame, CameraSpecError> {
        let camera = spec.to_camera()?;
        Ok(render(&camera, &*self.tracer(config)))
    }

    /// Renders and PNG-encodes one frame. The CLI and the service both go
    /// through here, so equal inputs give equal bytes.
    pub fn render_png(
        &self,
        spec: &CameraSpec,
        config: TraceConfig,
    ) -> Result<(Vec<u8>, Frame), CameraSpecError> {
        let frame = self.render(spec, config)?;
        let png = encode_png(&frame).expect("in-memory PNG encoding does not fail");
        Ok((png, frame))
    }
}
