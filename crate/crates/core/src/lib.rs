//! Behavioral simulator for a memristive analog pixel frame-differencing sensor.
//!
//! The crate models a two-stage op-amp circuit whose second stage uses a
//! programmable memristor to switch between pixel differencing (low
//! resistance) and reference preservation (high resistance). On top of the
//! circuit model sit two array architectures, a device mismatch model, an
//! image-sequence pipeline for moving object detection, and the file and
//! experiment plumbing used by the `memsense` command-line tool.

pub mod array;
pub mod circuit;
pub mod device;
mod error;
pub mod frame;
pub mod io;
pub mod pipeline;

pub use array::{AnalogRowMemory, ArchitectureKind, ArrayArchitecture, ArrayGeometry, CostParams};
pub use circuit::{CircuitConfig, PixelPairInput};
pub use device::{MemristorDevice, MemristorState};
pub use error::{Error, Result};
pub use frame::{Frame, Mask};
pub use pipeline::{DetectionMetrics, DetectionResult};
