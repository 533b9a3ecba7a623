//! Respiratory motion synthesis and training-data degradation.
//!
//! A high-resolution breath-hold-like volume is turned into a realistic
//! free-breathing acquisition in three steps: thick-slice averaging along
//! LR, a per-slice in-plane deformation driven by a respiratory signal
//! sampled on the slice acquisition schedule, and multiplicative banding.
//! Every random draw is recorded in a manifest so a degradation can be
//! replayed bit for bit.

mod banding;
mod config;
mod deform;
mod degrade;
mod field_io;
mod schedule;
mod signal;

pub use banding::{
    apply_banding, apply_banding_replay, draw_banding, scale_slices, BandingDraw,
    BANDING_PROBABILITY, BANDING_SCALE_RANGE,
};
pub use config::RespiratoryConfig;
pub use deform::{
    apply_deformation, deformation_for_slice, elastic_augment, DeformationField, SliceDeformation,
    MAX_RESP_AMPLITUDE, PEAK_SHIFT_AP_PX, PEAK_SHIFT_HF_PX,
};
pub use degrade::{
    degrade, degrade_replay, simulate_thick_slices, BandRecord, CycleRecord, DegradeManifest,
    DegradeParams, SliceRecord, DEFAULT_THICK_FACTOR,
};
pub use field_io::{load_field, save_field, FIELD_DATA_EXT, FIELD_HEADER_EXT};
pub use schedule::{build_slice_schedule, Beat, SliceSchedule};
pub use signal::{resp_signal, RespiratorySignal};
