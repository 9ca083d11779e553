//! File formats, rendering helpers and the frame service around
//! [`lfprobe_core`].
//!
//! - [`xyz`]: `.xyz` point clouds.
//! - [`probe_file`]: the binary probe format.
//! - [`manifest`]: JSON grid manifests.
//! - [`source`]: a probe or a grid, ready to render.
//! - [`service`]: the HTTP and WebSocket frame service.

pub mod bench;
pub mod camera;
pub mod image;
pub mod manifest;
pub mod probe_file;
pub mod service;
pub mod source;
pub mod xyz;

pub use lfprobe_core;
