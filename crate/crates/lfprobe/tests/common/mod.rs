#![allow(dead_code)]

use std::path::PathBuf;

use lfprobe::manifest::{GridManifest, ManifestProbe};
use lfprobe::probe_file::save_probe;
use lfprobe::service::AppState;
use lfprobe_core::bake::simulate_probe;
use lfprobe_core::math::Vec3;
use lfprobe_core::pointcloud::{sample_point_cloud, AnalyticScene, Room};
use lfprobe_core::trace::TraceConfig;
use tempfile::TempDir;

pub const GRID_ORIGIN: [f64; 3] = [0.75, 0.5, 2.25];

/// A small room grid and a single probe on disk, with a service config
/// listing both as `room` and `center`.
pub struct Fixture {
    pub dir: TempDir,
    pub config: PathBuf,
    pub manifest: PathBuf,
    pub probe: PathBuf,
}

pub fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let cloud = sample_point_cloud(&AnalyticScene::room(), 5e3, 2);
    let mut probes = Vec::new();
    for k in 0..2 {
        for j in 0..2 {
            for i in 0..2 {
                let at = Vec3::from_array(GRID_ORIGIN) + Vec3::new(i as f64, j as f64, k as f64) * 1.5;
                let probe = simulate_probe(&cloud, at, 128, 8).unwrap().0;
                let name = format!("probe_{i}_{j}_{k}.lfprobe");
                save_probe(&probe, &dir.path().join(&name)).unwrap();
                probes.push(ManifestProbe {
                    index: [i, j, k],
                    path: name.into(),
                });
            }
        }
    }
    let manifest = dir.path().join("manifest.json");
    GridManifest {
        grid_origin: GRID_ORIGIN,
        cell_size: 1.5,
        dims: [2, 2, 2],
        probes,
    }
    .write(&manifest)
    .unwrap();
    let probe = dir.path().join("center.lfprobe");
    save_probe(&simulate_probe(&cloud, Room::CENTER, 128, 8).unwrap().0, &probe).unwrap();
    let config = dir.path().join("scenes.json");
    std::fs::write(
        &config,
        r#"{"scenes":[
            {"id":"room","name":"Room grid","path":"manifest.json"},
            {"id":"center","path":"center.lfprobe"}
        ]}"#,
    )
    .unwrap();
    Fixture {
        dir,
        config,
        manifest,
        probe,
    }
}

impl Fixture {
    pub fn state(&self) -> AppState {
        AppState::load_file(&self.config, TraceConfig::default()).unwrap()
    }
}

/// A camera inside the room looking down its length.
pub const CAMERA: &str = r#"{"eye":[1.4,1.2,1.0],"look":[1.6,1.0,5.0],"fov":70,"width":64,"height":48}"#;
