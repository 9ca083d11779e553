use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lfprobe::bench::{bench_views, View};
use lfprobe::camera::CameraSpec;
use lfprobe::manifest::{GridManifest, ManifestProbe};
use lfprobe::probe_file::save_probe;
use lfprobe::service::{port_from_env, serve, AppState};
use lfprobe::source::ProbeSource;
use lfprobe::xyz::{load_xyz, save_xyz};
use lfprobe_core::bake::{bake_probe, simulate_probe, ProbeData};
use lfprobe_core::math::Vec3;
use lfprobe_core::pointcloud::{sample_point_cloud, AnalyticScene, PointCloud};
use lfprobe_core::trace::TraceConfig;

#[derive(Parser)]
#[command(name = "lfprobe", version, about = "Light field probe baking and rendering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a built-in analytic scene into an .xyz cloud.
    SampleScene {
        #[arg(long, value_enum, default_value_t = SceneName::Room)]
        scene: SceneName,
        /// Points per square meter.
        #[arg(long, default_value_t = 1e4)]
        density: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bake a probe from a cloud.
    Bake(BakeArgs),
    /// Bake a probe at an arbitrary position of a unified cloud.
    SimulateProbe(BakeArgs),
    /// Bake a uniform grid of probes and write its manifest.
    BakeGrid {
        #[arg(long)]
        cloud: PathBuf,
        /// Position of probe (0, 0, 0).
        #[arg(long, value_parser = parse_vec3)]
        grid_origin: Vec3,
        #[arg(long, default_value_t = 1.5)]
        cell_size: f64,
        /// Probe counts per axis, `NXxNYxNZ`.
        #[arg(long, value_parser = parse_dims)]
        dims: [usize; 3],
        #[arg(long, default_value_t = 2048)]
        hi: u32,
        #[arg(long, default_value_t = 128)]
        lo: u32,
        /// Output directory for the probes and `manifest.json`.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Render one frame to a PNG.
    Render {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_parser = parse_vec3)]
        eye: Vec3,
        #[arg(long, value_parser = parse_vec3)]
        look: Vec3,
        #[arg(long, value_parser = parse_vec3)]
        up: Option<Vec3>,
        #[arg(long, default_value_t = 60.0)]
        fov: f64,
        #[arg(long, value_parser = parse_size, default_value = "512x512")]
        size: (u32, u32),
        #[command(flatten)]
        trace: TraceArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time frame rendering over a set of views.
    Bench {
        #[command(flatten)]
        source: SourceArgs,
        /// JSON array of `{ "name", "eye", "look", "fov", "width", "height" }`.
        #[arg(long)]
        views: PathBuf,
        #[arg(long, default_value_t = 50)]
        reps: usize,
        #[arg(long, default_value_t = 3)]
        warmup: usize,
        #[command(flatten)]
        trace: TraceArgs,
        #[arg(long)]
        report: PathBuf,
    },
    /// Run the frame service.
    Serve {
        /// JSON `{ "scenes": [{ "id", "path" }] }`.
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Overrides the `LFPROBE_PORT` environment variable.
        #[arg(long)]
        port: Option<u16>,
        #[command(flatten)]
        trace: TraceArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SceneName {
    Room,
    Workstation,
}

#[derive(Args)]
struct BakeArgs {
    #[arg(long)]
    cloud: PathBuf,
    #[arg(long, value_parser = parse_vec3)]
    origin: Vec3,
    #[arg(long, default_value_t = 2048)]
    hi: u32,
    #[arg(long, default_value_t = 128)]
    lo: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    #[arg(long)]
    probe: Option<PathBuf>,
    #[arg(long)]
    grid: Option<PathBuf>,
}

impl SourceArgs {
    fn load(&self) -> Result<ProbeSource> {
        let loaded = match (&self.probe, &self.grid) {
            (Some(p), _) => lfprobe::probe_file::load_probe(p)
                .map(ProbeSource::Probe)
                .with_context(|| format!("loading probe {}", p.display()))?,
            (_, Some(g)) => lfprobe::manifest::load_grid(g)
                .map(ProbeSource::Grid)
                .with_context(|| format!("loading grid {}", g.display()))?,
            _ => bail!("one of --probe or --grid is required"),
        };
        Ok(loaded)
    }
}

#[derive(Args)]
struct TraceArgs {
    /// Probes tried per grid cube, nearest first.
    #[arg(long, default_value_t = 8)]
    max_probes_per_cube: usize,
}

impl TraceArgs {
    fn config(&self) -> TraceConfig {
        TraceConfig {
            max_probes_per_cube: self.max_probes_per_cube,
            ..TraceConfig::default()
        }
    }
}

fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y, z] if parts.iter().all(|v| v.is_finite()) => Ok(Vec3::new(x, y, z)),
        _ => Err("expected three finite numbers `x,y,z`".into()),
    }
}

fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s.split_once('x').ok_or("expected `WIDTHxHEIGHT`")?;
    Ok((
        w.parse().map_err(|e| format!("width: {e}"))?,
        h.parse().map_err(|e| format!("height: {e}"))?,
    ))
}

fn parse_dims(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<usize> = s
        .split('x')
        .map(|p| p.parse::<usize>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|_| "expected `NXxNYxNZ`".to_string())
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn load_cloud(path: &Path) -> Result<PointCloud> {
    let (cloud, report) = load_xyz(path).with_context(|| format!("loading {}", path.display()))?;
    if !report.malformed.is_empty() {
        eprintln!(
            "warning: skipped {} malformed lines in {}",
            report.malformed.len(),
            path.display()
        );
    }
    Ok(cloud)
}

fn finish_bake(
    result: Result<(ProbeData, lfprobe_core::bake::BakeReport), lfprobe_core::bake::BakeError>,
    out: &Path,
) -> Result<()> {
    let (probe, report) = result?;
    if report.skipped_coincident > 0 {
        eprintln!(
            "warning: skipped {} points coinciding with the probe origin",
            report.skipped_coincident
        );
    }
    if report.origin_outside_bounds {
        eprintln!("warning: probe origin lies outside the cloud bounds");
    }
    let probe = probe.with_timestamp(now());
    save_probe(&probe, out).with_context(|| format!("writing {}", out.display()))?;
    eprintln!(
        "{}: {:.1}% of texels filled",
        out.display(),
        100.0 * probe.coverage()
    );
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::SampleScene {
            scene,
            density,
            seed,
            out,
        } => {
            if !(density > 0.0 && density.is_finite()) {
                bail!("--density must be positive");
            }
            let (scene, label) = match scene {
                SceneName::Room => (AnalyticScene::room(), "room"),
                SceneName::Workstation => (AnalyticScene::workstation(), "workstation"),
            };
            let cloud = sample_point_cloud(&scene, density, seed);
            save_xyz(&cloud, &out).with_context(|| format!("writing {}", out.display()))?;
            eprintln!("{label}: {} points", cloud.len());
        }
        Command::Bake(a) => {
            let cloud = load_cloud(&a.cloud)?;
            finish_bake(bake_probe(&cloud, a.origin, a.hi, a.lo), &a.out)?;
        }
        Command::SimulateProbe(a) => {
            let cloud = load_cloud(&a.cloud)?;
            finish_bake(simulate_probe(&cloud, a.origin, a.hi, a.lo), &a.out)?;
        }
        Command::BakeGrid {
            cloud,
            grid_origin,
            cell_size,
            dims,
            hi,
            lo,
            out_dir,
        } => {
            let cloud = load_cloud(&cloud)?;
            std::fs::create_dir_all(&out_dir)
                .with_context(|| format!("creating {}", out_dir.display()))?;
            let mut probes = Vec::new();
            for k in 0..dims[2] {
                for j in 0..dims[1] {
                    for i in 0..dims[0] {
                        let origin = grid_origin + Vec3::new(i as f64, j as f64, k as f64) * cell_size;
                        let name = PathBuf::from(format!("probe_{i}_{j}_{k}.lfprobe"));
                        finish_bake(simulate_probe(&cloud, origin, hi, lo), &out_dir.join(&name))?;
                        probes.push(ManifestProbe {
                            index: [i, j, k],
                            path: name,
                        });
                    }
                }
            }
            let manifest = GridManifest {
                grid_origin: grid_origin.to_array(),
                cell_size,
                dims,
                probes,
            };
            manifest.write(&out_dir.join("manifest.json"))?;
        }
        Command::Render {
            source,
            eye,
            look,
            up,
            fov,
            size,
            trace,
            out,
        } => {
            let source = source.load()?;
            let spec = CameraSpec {
                eye: eye.to_array(),
                look: look.to_array(),
                up: up.map(Vec3::to_array),
                fov,
                width: size.0,
                height: size.1,
            };
            let (png, frame) = source.render_png(&spec, trace.config())?;
            std::fs::write(&out, png).with_context(|| format!("writing {}", out.display()))?;
            let s = frame.stats;
            eprintln!(
                "{:.1} ms, {:.1} fetches/pixel, miss {:.2}%, unknown {:.2}%",
                s.trace_ms,
                s.mean_fetches_per_pixel,
                100.0 * s.miss_fraction,
                100.0 * s.unknown_fraction
            );
        }
        Command::Bench {
            source,
            views,
            reps,
            warmup,
            trace,
            report,
        } => {
            let source = source.load()?;
            let text = std::fs::read_to_string(&views)
                .with_context(|| format!("reading {}", views.display()))?;
            let views: Vec<View> =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", views.display()))?;
            if views.len() < 2 {
                bail!("bench needs at least two views");
            }
            let cameras = views
                .iter()
                .map(|v| Ok((v.name.clone(), v.camera.to_camera()?)))
                .collect::<Result<Vec<_>>>()?;
            let tracer = source.tracer(trace.config());
            let result = bench_views(&*tracer, &cameras, warmup, reps);
            std::fs::write(&report, serde_json::to_string_pretty(&result)?)
                .with_context(|| format!("writing {}", report.display()))?;
            for v in &result.views {
                eprintln!("{}: median {:.1} ms", v.name, v.median_ms);
            }
            eprintln!(
                "relative std of medians: {:.2}%",
                100.0 * result.relative_std_of_medians
            );
        }
        Command::Serve {
            config,
            host,
            port,
            trace,
        } => {
            let state = AppState::load_file(&config, trace.config())?;
            let port = match port {
                Some(p) => p,
                None => port_from_env().context("invalid LFPROBE_PORT")?,
            };
            let addr = SocketAddr::new(host, port);
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind(addr)
                    .await
                    .with_context(|| format!("binding {addr}"))?;
                eprintln!("listening on http://{}", listener.local_addr()?);
                serve(listener, state).await?;
                Ok::<_, anyhow::Error>(())
            })?;
        }
    }
    Ok(())
}
