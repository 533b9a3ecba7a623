//! Volume containers and geometry-preserving grid operations.

mod intensity;
mod io;
mod resample;
mod types;

pub use intensity::{clahe, normalize01, ClaheParams};
pub use io::{load, load_labels, load_volume, save_labels, save_volume, Loaded};
pub use resample::{
    crop_or_pad, crop_or_pad_labels, draw_rotation_angles, resample_isotropic, rotate_augment,
    upsample_slice_dir, Interpolation,
};
pub use types::{LabelVolume, Mask, Structure, Volume, FOREGROUND_STRUCTURES};
