//! Pinhole rendering through any ray tracer.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::bake::ProbeData;
use crate::grid::{trace_few_probes, trace_grid, ProbeGrid};
use crate::math::Vec3;
use crate::octmap::Rgb8;
use crate::pointcloud::{oracle_trace, AnalyticScene};
use crate::trace::{
    trace_one_probe, Ray, TraceConfig, TraceCounters, TraceOutcome, TraceStatus,
};

/// Color of pixels whose ray found nothing.
pub const MISS_COLOR: Rgb8 = Rgb8([0, 0, 0]);
/// Color of pixels no probe could decide.
pub const UNKNOWN_COLOR: Rgb8 = Rgb8([255, 0, 255]);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RenderError {
    #[error("camera {0} is not finite")]
    NonFinite(&'static str),
    #[error("image size must be non-zero, got {width}x{height}")]
    ZeroSize { width: u32, height: u32 },
    #[error("field of view must be in (0, 180) degrees, got {0}")]
    BadFov(f64),
    #[error("camera look target coincides with the eye")]
    ZeroLook,
    #[error("camera up vector is parallel to the view direction")]
    ParallelUp,
    #[error("frame sizes differ: {a:?} vs {b:?}")]
    SizeMismatch { a: (u32, u32), b: (u32, u32) },
}

/// Look-at pinhole camera with a vertical field of view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    eye: Vec3,
    forward: Vec3,
    right: Vec3,
    up: Vec3,
    tan_half_fov: f64,
    width: u32,
    height: u32,
}

impl Camera {
    pub fn look_at(
        eye: Vec3,
        target: Vec3,
        up: Vec3,
        fov_y_degrees: f64,
        width: u32,
        height: u32,
    ) -> Result<Camera, RenderError> {
        if !eye.is_finite() {
            return Err(RenderError::NonFinite("eye"));
        }
        if !target.is_finite() {
            return Err(RenderError::NonFinite("look"));
        }
        if !up.is_finite() {
            return Err(RenderError::NonFinite("up"));
        }
        if width == 0 || height == 0 {
            return Err(RenderError::ZeroSize { width, height });
        }
        if !(fov_y_degrees > 0.0 && fov_y_degrees < 180.0) {
            return Err(RenderError::BadFov(fov_y_degrees));
        }
        let forward = target - eye;
        if forward.length() < 1e-12 {
            return Err(RenderError::ZeroLook);
        }
        let forward = forward.normalize();
        let right = forward.cross(up);
        if right.length() < 1e-9 * up.length().max(1e-300) || up.length() == 0.0 {
            return Err(RenderError::ParallelUp);
        }
        let right = right.normalize();
        let up = right.cross(forward);
        Ok(Camera {
            eye,
            forward,
            right,
            up,
            tan_half_fov: (fov_y_degrees.to_radians() * 0.5).tan(),
            width,
            height,
        })
    }

    pub fn eye(&self) -> Vec3 {
        self.eye
    }

    pub fn forward(&self) -> Vec3 {
        self.forward
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Ray through the center of pixel `(px, py)`, row 0 at the top.
    pub fn ray(&self, px: u32, py: u32) -> Ray {
        let aspect = self.width as f64 / self.height as f64;
        let x = (2.0 * (px as f64 + 0.5) / self.width as f64 - 1.0) * self.tan_half_fov * aspect;
        let y = (1.0 - 2.0 * (py as f64 + 0.5) / self.height as f64) * self.tan_half_fov;
        let d = (self.forward + self.right * x + self.up * y).normalize();
        Ray {
            origin: self.eye,
            dir: d,
        }
    }
}

/// Anything that answers ray queries.
pub trait RayTracer: Sync {
    fn trace(&self, ray: &Ray, counters: &mut TraceCounters) -> TraceOutcome;
}

/// One probe.
pub struct SingleProbe<'a> {
    pub probe: &'a ProbeData,
    pub config: TraceConfig,
}

impl RayTracer for SingleProbe<'_> {
    fn trace(&self, ray: &Ray, counters: &mut TraceCounters) -> TraceOutcome {
        trace_one_probe(self.probe, ray, &self.config, counters)
    }
}

/// A handful of probes, nearest first.
pub struct FewProbes<'a> {
    pub probes: &'a [ProbeData],
    pub config: TraceConfig,
}

impl RayTracer for FewProbes<'_> {
    fn trace(&self, ray: &Ray, counters: &mut TraceCounters) -> TraceOutcome {
        trace_few_probes(self.probes, ray, &self.config, counters)
    }
}

/// A probe grid.
pub struct GridTracer<'a> {
    pub grid: &'a ProbeGrid,
    pub config: TraceConfig,
    pub t_max: f64,
}

impl RayTracer for GridTracer<'_> {
    fn trace(&self, ray: &Ray, counters: &mut TraceCounters) -> TraceOutcome {
        trace_grid(self.grid, ray, self.t_max, &self.config, counters)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrameStats {
    /// Wall time of the pixel loop; zero without `std`.
    pub trace_ms: f64,
    pub texel_fetches: u64,
    pub mean_fetches_per_pixel: f64,
    pub hit_fraction: f64,
    pub miss_fraction: f64,
    pub unknown_fraction: f64,
}

/// Rendered image, row-major from the top-left, with per-pixel status.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<Rgb8>,
    pub status: Vec<TraceStatus>,
    pub stats: FrameStats,
}

impl Frame {
    pub fn get(&self, x: u32, y: u32) -> Rgb8 {
        self.pixels[(y * self.width + x) as usize]
    }

    /// Packed RGB bytes.
    pub fn rgb_bytes(&self) -> Vec<u8> {
        self.pixels.iter().flat_map(|p| p.0).collect()
    }
}

/// Colors for pixels without a HIT.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Palette {
    pub background: Rgb8,
    pub unknown: Rgb8,
}

impl Default for Palette {
    fn default() -> Self {
        Palette {
            background: MISS_COLOR,
            unknown: UNKNOWN_COLOR,
        }
    }
}

impl Palette {
    fn color(&self, out: &TraceOutcome) -> Rgb8 {
        match out.status {
            TraceStatus::Hit => out.irradiance.unwrap_or(self.background),
            TraceStatus::Miss => self.background,
            TraceStatus::Unknown => self.unknown,
        }
    }
}

fn render_row<T: RayTracer + ?Sized>(
    camera: &Camera,
    tracer: &T,
    palette: &Palette,
    y: u32,
    pixels: &mut [Rgb8],
    status: &mut [TraceStatus],
) -> TraceCounters {
    let mut counters = TraceCounters::default();
    for x in 0..camera.width {
        let out = tracer.trace(&camera.ray(x, y), &mut counters);
        pixels[x as usize] = palette.color(&out);
        status[x as usize] = out.status;
    }
    counters
}

/// [`render_with`] using the default palette.
pub fn render<T: RayTracer + ?Sized>(camera: &Camera, tracer: &T) -> Frame {
    render_with(camera, tracer, &Palette::default())
}

/// Renders one frame. Rows are traced in parallel with the `parallel`
/// feature; the result does not depend on the thread count.
pub fn render_with<T: RayTracer + ?Sized>(camera: &Camera, tracer: &T, palette: &Palette) -> Frame {
    let (w, h) = (camera.width, camera.height);
    let n = (w as usize) * (h as usize);
    let mut pixels = vec![MISS_COLOR; n];
    let mut status = vec![TraceStatus::Miss; n];

    #[cfg(feature = "std")]
    let started = std::time::Instant::now();

    #[cfg(feature = "parallel")]
    let counters = {
        use rayon::prelude::*;
        pixels
            .par_chunks_mut(w as usize)
            .zip(status.par_chunks_mut(w as usize))
            .enumerate()
            .map(|(y, (p, s))| render_row(camera, tracer, palette, y as u32, p, s))
            .reduce(TraceCounters::default, |mut a, b| {
                a.merge(&b);
                a
            })
    };
    #[cfg(not(feature = "parallel"))]
    let counters = {
        let mut total = TraceCounters::default();
        for (y, (p, s)) in pixels
            .chunks_mut(w as usize)
            .zip(status.chunks_mut(w as usize))
            .enumerate()
        {
            total.merge(&render_row(camera, tracer, palette, y as u32, p, s));
        }
        total
    };

    #[cfg(feature = "std")]
    let trace_ms = started.elapsed().as_secs_f64() * 1e3;
    #[cfg(not(feature = "std"))]
    let trace_ms = 0.0;

    let stats = frame_stats(&status, counters.texel_fetches, trace_ms);
    Frame {
        width: w,
        height: h,
        pixels,
        status,
        stats,
    }
}

fn frame_stats(status: &[TraceStatus], fetches: u64, trace_ms: f64) -> FrameStats {
    let n = status.len().max(1) as f64;
    let count = |s| status.iter().filter(|&&x| x == s).count() as f64 / n;
    FrameStats {
        trace_ms,
        texel_fetches: fetches,
        mean_fetches_per_pixel: fetches as f64 / n,
        hit_fraction: count(TraceStatus::Hit),
        miss_fraction: count(TraceStatus::Miss),
        unknown_fraction: count(TraceStatus::Unknown),
    }
}

/// Ground-truth render of an analytic scene by exact ray casting.
pub fn render_oracle(camera: &Camera, scene: &AnalyticScene) -> Frame {
    let (w, h) = (camera.width, camera.height);
    let mut pixels = Vec::with_capacity((w * h) as usize);
    let mut status = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let ray = camera.ray(x, y);
            match oracle_trace(scene, ray.origin, ray.dir) {
                Some(hit) => {
                    pixels.push(Rgb8::from_unit(hit.color));
                    status.push(TraceStatus::Hit);
                }
                None => {
                    pixels.push(MISS_COLOR);
                    status.push(TraceStatus::Miss);
                }
            }
        }
    }
    let stats = frame_stats(&status, 0, 0.0);
    Frame {
        width: w,
        height: h,
        pixels,
        status,
        stats,
    }
}

/// Pixels whose color differs from a 4-neighbor.
pub fn color_edge_mask(frame: &Frame) -> Vec<bool> {
    let (w, h) = (frame.width as i64, frame.height as i64);
    let mut mask = vec![false; frame.pixels.len()];
    for y in 0..h {
        for x in 0..w {
            let c = frame.pixels[(y * w + x) as usize];
            let edge = [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|&(dx, dy)| {
                let (nx, ny) = (x + dx, y + dy);
                nx >= 0 && ny >= 0 && nx < w && ny < h && frame.pixels[(ny * w + nx) as usize] != c
            });
            mask[(y * w + x) as usize] = edge;
        }
    }
    mask
}

/// Mean squared error over RGB channels, in 8-bit units.
pub fn mse(a: &Frame, b: &Frame) -> Result<f64, RenderError> {
    if (a.width, a.height) != (b.width, b.height) {
        return Err(RenderError::SizeMismatch {
            a: (a.width, a.height),
            b: (b.width, b.height),
        });
    }
    let mut sum = 0.0;
    for (p, q) in a.pixels.iter().zip(&b.pixels) {
        for c in 0..3 {
            let d = p.0[c] as f64 - q.0[c] as f64;
            sum += d * d;
        }
    }
    Ok(sum / (3 * a.pixels.len()).max(1) as f64)
}

/// Peak signal-to-noise ratio in dB; infinite for identical frames.
pub fn psnr(a: &Frame, b: &Frame) -> Result<f64, RenderError> {
    let e = mse(a, b)?;
    Ok(if e == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0 * 255.0 / e).log10()
    })
}
