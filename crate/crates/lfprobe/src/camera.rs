//! JSON camera descriptions shared by the CLI and the service.

use lfprobe_core::math::Vec3;
use lfprobe_core::render::{Camera, RenderError};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Largest accepted image side.
pub const MAX_IMAGE_SIDE: u32 = 4096;

fn default_fov() -> f64 {
    60.0
}

fn default_side() -> u32 {
    512
}

/// `{ "eye": [x, y, z], "look": [x, y, z], "up": [0, 1, 0], "fov": 60,
/// "width": 512, "height": 512 }`; `up`, `fov` and the size are optional.
/// `look` is the point looked at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    pub eye: [f64; 3],
    pub look: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub up: Option<[f64; 3]>,
    #[serde(default = "default_fov")]
    pub fov: f64,
    #[serde(default = "default_side")]
    pub width: u32,
    #[serde(default = "default_side")]
    pub height: u32,
}

/// A rejected camera, naming the offending field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid camera field `{field}`: {message}")]
pub struct CameraSpecError {
    pub field: &'static str,
    pub message: String,
}

impl CameraSpecError {
    fn new(field: &'static str, message: impl Into<String>) -> Self {
        CameraSpecError {
            field,
            message: message.into(),
        }
    }
}

fn check_field<T: DeserializeOwned>(
    obj: &Map<String, Value>,
    field: &'static str,
    required: bool,
) -> Result<(), CameraSpecError> {
    match obj.get(field) {
        None if required => Err(CameraSpecError::new(field, "missing")),
        None => Ok(()),
        Some(v) => T::deserialize(v)
            .map(|_| ())
            .map_err(|e| CameraSpecError::new(field, e.to_string())),
    }
}

impl CameraSpec {
    /// Parses and validates a JSON camera. Errors name the offending field,
    /// or `body` when the document itself is unusable.
    pub fn from_json(bytes: &[u8]) -> Result<CameraSpec, CameraSpecError> {
        let value: Value =
            serde_json::from_slice(bytes).map_err(|e| CameraSpecError::new("body", e.to_string()))?;
        CameraSpec::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<CameraSpec, CameraSpecError> {
        let obj = value
            .as_object()
            .ok_or_else(|| CameraSpecError::new("body", "expected a JSON object"))?;
        check_field::<[f64; 3]>(obj, "eye", true)?;
        check_field::<[f64; 3]>(obj, "look", true)?;
        check_field::<Option<[f64; 3]>>(obj, "up", false)?;
        check_field::<f64>(obj, "fov", false)?;
        check_field::<u32>(obj, "width", false)?;
        check_field::<u32>(obj, "height", false)?;
        let spec: CameraSpec =
            serde_json::from_value(value).map_err(|e| CameraSpecError::new("body", e.to_string()))?;
        spec.to_camera()?;
        Ok(spec)
    }

    pub fn to_camera(&self) -> Result<Camera, CameraSpecError> {
        for (field, v) in [("width", self.width), ("height", self.height)] {
            if v > MAX_IMAGE_SIDE {
                return Err(CameraSpecError {
                    field,
                    message: format!("{v} exceeds the maximum of {MAX_IMAGE_SIDE}"),
                });
            }
        }
        let up = self.up.unwrap_or([0.0, 1.0, 0.0]);
        Camera::look_at(
            Vec3::from_array(self.eye),
            Vec3::from_array(self.look),
            Vec3::from_array(up),
            self.fov,
            self.width,
            self.height,
        )
        .map_err(|e| CameraSpecError {
            field: match e {
                RenderError::NonFinite(name) => name,
                RenderError::ZeroSize { width: 0, .. } => "width",
                RenderError::ZeroSize { .. } => "height",
                RenderError::BadFov(_) => "fov",
                RenderError::ZeroLook => "look",
                RenderError::ParallelUp => "up",
                RenderError::SizeMismatch { .. } => "width",
            },
            message: e.to_string(),
        })
    }
}
