//! Numerics for a 2D-real-time-to-3D-cine cardiac MRI reconstruction
//! pipeline: everything around the network rather than the network itself.
//!
//! - [`volume`]: grid containers, sidecar file I/O, resampling, CLAHE.
//! - [`respsim`]: respiratory motion synthesis and training-data
//!   degradation with replayable manifests.
//! - [`loss`]: reference implementations of the training losses.
//! - [`segpost`]: segmentation cleanup and ventricular volumetry.
//! - [`vessel`]: centerline extraction and vessel diameter measurement.
//! - [`qa`]: image-quality profiles and method-agreement statistics.

pub mod error;
pub mod loss;
pub mod qa;
pub mod respsim;
mod rng;
pub mod segpost;
pub mod vessel;
pub mod volume;

pub use error::{Error, Result};
pub use volume::{LabelVolume, Mask, Structure, Volume, FOREGROUND_STRUCTURES};
