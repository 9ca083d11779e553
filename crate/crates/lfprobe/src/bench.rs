//! Frame-time benchmarks over a set of views.

use std::time::Instant;

use lfprobe_core::render::{render, Camera, RayTracer};
use serde::{Deserialize, Serialize};

use crate::camera::CameraSpec;

/// A named view in a views file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct View {
    pub name: String,
    #[serde(flatten)]
    pub camera: CameraSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewTiming {
    pub name: String,
    pub median_ms: f64,
    pub mean_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
    pub mean_fetches_per_pixel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub warmup: usize,
    pub reps: usize,
    pub views: Vec<ViewTiming>,
    /// Standard deviation of the per-view medians over their mean.
    pub relative_std_of_medians: f64,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Population standard deviation over the mean.
pub fn relative_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean
}

/// Times `reps` renders of every view after `warmup` untimed ones. Each
/// sample is the wall time of a whole frame.
pub fn bench_views<T: RayTracer + ?Sized>(
    tracer: &T,
    views: &[(String, Camera)],
    warmup: usize,
    reps: usize,
) -> BenchReport {
    let mut timings = Vec::with_capacity(views.len());
    for (name, camera) in views {
        for _ in 0..warmup {
            render(camera, tracer);
        }
        let mut samples = Vec::with_capacity(reps);
        let mut fetches = 0.0;
        for _ in 0..reps {
            let start = Instant::now();
            let frame = render(camera, tracer);
            samples.push(start.elapsed().as_secs_f64() * 1e3);
            fetches += frame.stats.mean_fetches_per_pixel;
        }
        timings.push(ViewTiming {
            name: name.clone(),
            median_ms: median(&samples),
            mean_ms: samples.iter().sum::<f64>() / reps.max(1) as f64,
            min_ms: samples.iter().copied().fold(f64::INFINITY, f64::min),
            max_ms: samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean_fetches_per_pixel: fetches / reps.max(1) as f64,
        });
    }
    let medians: Vec<f64> = timings.iter().map(|t| t.median_ms).collect();
    BenchReport {
        warmup,
        reps,
        relative_std_of_medians: relative_std(&medians),
        views: timings,
    }
}
