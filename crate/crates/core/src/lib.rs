//! Light-field probes over colored point clouds.
//!
//! A probe stores, per octahedral texel, the color, distance and incoming
//! direction of the nearest point seen from the probe origin. Rays are traced
//! against one probe by marching its maps, or against a grid of probes by
//! walking the grid cells the ray crosses.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bake;
pub mod grid;
pub mod math;
pub mod octmap;
pub mod pointcloud;
pub mod render;
pub mod trace;

pub use bake::{bake_probe, simulate_probe, BakeError, BakeReport, ProbeData, ProbeMeta};
pub use grid::{trace_few_probes, trace_grid, GridError, ProbeGrid};
pub use math::{Aabb, Vec3};
pub use octmap::{oct_decode, oct_encode, DirCode, Distance, MapChain, OctMap, OctUv, Rgb8};
pub use pointcloud::{AnalyticScene, ColoredPoint, PointCloud, PointCloudError};
pub use render::{psnr, render, render_with, Camera, Frame, FrameStats, Palette, RayTracer, RenderError};
pub use trace::{
    trace_one_probe, Ray, TraceConfig, TraceCounters, TraceOutcome, TraceStatus,
};
