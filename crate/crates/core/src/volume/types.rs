use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cardiac structures a label volume can carry. `code` values are the
/// on-disk byte encoding and must stay stable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Structure {
    Background,
    LeftVentricle,
    RightVentricle,
    LeftAtrium,
    RightAtrium,
    Aorta,
    PulmonaryArtery,
}

pub const FOREGROUND_STRUCTURES: [Structure; 6] = [
    Structure::LeftVentricle,
    Structure::RightVentricle,
    Structure::LeftAtrium,
    Structure::RightAtrium,
    Structure::Aorta,
    Structure::PulmonaryArtery,
];

impl Structure {
    pub const COUNT: usize = 7;

    pub fn code(self) -> u8 {
        match self {
            Structure::Background => 0,
            Structure::LeftVentricle => 1,
            Structure::RightVentricle => 2,
            Structure::LeftAtrium => 3,
            Structure::RightAtrium => 4,
            Structure::Aorta => 5,
            Structure::PulmonaryArtery => 6,
        }
    }

    pub fn from_code(code: u8) -> Option<Structure> {
        Some(match code {
            0 => Structure::Background,
            1 => Structure::LeftVentricle,
            2 => Structure::RightVentricle,
            3 => Structure::LeftAtrium,
            4 => Structure::RightAtrium,
            5 => Structure::Aorta,
            6 => Structure::PulmonaryArtery,
            _ => return None,
        })
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Structure::Background => "BG",
            Structure::LeftVentricle => "LV",
            Structure::RightVentricle => "RV",
            Structure::LeftAtrium => "LA",
            Structure::RightAtrium => "RA",
            Structure::Aorta => "Ao",
            Structure::PulmonaryArtery => "PA",
        }
    }

    /// Parse a short name, case-insensitively.
    pub fn parse(name: &str) -> Option<Structure> {
        let lower = name.to_ascii_lowercase();
        [
            Structure::Background,
            Structure::LeftVentricle,
            Structure::RightVentricle,
            Structure::LeftAtrium,
            Structure::RightAtrium,
            Structure::Aorta,
            Structure::PulmonaryArtery,
        ]
        .into_iter()
        .find(|s| s.short_name().to_ascii_lowercase() == lower)
    }

    pub fn standard_names() -> Vec<String> {
        (0..Structure::COUNT as u8)
            .map(|c| Structure::from_code(c).unwrap().short_name().to_string())
            .collect()
    }
}

fn check_grid(dims: [usize; 3], spacing_mm: [f64; 3]) -> Result<()> {
    if dims.contains(&0) {
        return Err(Error::dims(format!("zero-sized dims {dims:?}")));
    }
    if spacing_mm.iter().any(|&s| s <= 0.0 || !s.is_finite()) {
        return Err(Error::arg(format!("non-positive spacing {spacing_mm:?}")));
    }
    Ok(())
}

/// A scalar intensity volume on a regular grid.
///
/// Axes are ordered (HF, AP, LR): head-foot, anterior-posterior, left-right.
/// Voxel data is stored frame-major, then HF-major; the LR index varies
/// fastest. An optional frame axis carries cine time.
#[derive(Clone, Debug, PartialEq)]
pub struct Volume {
    dims: [usize; 3],
    spacing_mm: [f64; 3],
    frames: Option<usize>,
    frame_period_s: Option<f64>,
    data: Vec<f32>,
}

impl Volume {
    pub fn new(dims: [usize; 3], spacing_mm: [f64; 3], data: Vec<f32>) -> Result<Volume> {
        Self::with_frames(dims, spacing_mm, None, None, data)
    }

    pub fn with_frames(
        dims: [usize; 3],
        spacing_mm: [f64; 3],
        frames: Option<usize>,
        frame_period_s: Option<f64>,
        data: Vec<f32>,
    ) -> Result<Volume> {
        check_grid(dims, spacing_mm)?;
        if frames == Some(0) {
            return Err(Error::dims("frame count must be at least 1"));
        }
        let expect = dims[0] * dims[1] * dims[2] * frames.unwrap_or(1);
        if data.len() != expect {
            return Err(Error::dims(format!(
                "data length {} does not match dims {dims:?} x {} frames",
                data.len(),
                frames.unwrap_or(1)
            )));
        }
        Ok(Volume {
            dims,
            spacing_mm,
            frames,
            frame_period_s,
            data,
        })
    }

    /// A zero-filled volume with the given geometry.
    pub fn zeros(dims: [usize; 3], spacing_mm: [f64; 3]) -> Result<Volume> {
        let n = dims[0] * dims[1] * dims[2];
        Volume::new(dims, spacing_mm, vec![0.0; n])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing_mm(&self) -> [f64; 3] {
        self.spacing_mm
    }

    pub fn frames(&self) -> Option<usize> {
        self.frames
    }

    pub fn frame_period_s(&self) -> Option<f64> {
        self.frame_period_s
    }

    /// Number of frames, counting a frameless volume as one.
    pub fn frame_count(&self) -> usize {
        self.frames.unwrap_or(1)
    }

    pub fn voxels_per_frame(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn frame_data(&self, frame: usize) -> &[f32] {
        let n = self.voxels_per_frame();
        &self.data[frame * n..(frame + 1) * n]
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    #[inline]
    pub fn at(&self, frame: usize, i: usize, j: usize, k: usize) -> f32 {
        self.data[frame * self.voxels_per_frame() + self.index(i, j, k)]
    }

    /// Replace the payload, keeping geometry. Length must match.
    pub(crate) fn map_data(mut self, f: impl FnOnce(Vec<f32>) -> Vec<f32>) -> Volume {
        let n = self.data.len();
        self.data = f(std::mem::take(&mut self.data));
        assert_eq!(self.data.len(), n, "map_data must preserve length");
        self
    }

    /// Same geometry, different payload length checks. Internal helper for
    /// ops that change dims.
    pub(crate) fn rebuild(
        &self,
        dims: [usize; 3],
        spacing_mm: [f64; 3],
        data: Vec<f32>,
    ) -> Result<Volume> {
        Volume::with_frames(dims, spacing_mm, self.frames, self.frame_period_s, data)
    }
}

/// A segmentation volume on the same grid conventions as [`Volume`].
/// Every voxel holds a structure code; codes must decode via
/// [`Structure::from_code`].
#[derive(Clone, Debug, PartialEq)]
pub struct LabelVolume {
    dims: [usize; 3],
    spacing_mm: [f64; 3],
    frames: Option<usize>,
    frame_period_s: Option<f64>,
    data: Vec<u8>,
}

impl LabelVolume {
    pub fn new(dims: [usize; 3], spacing_mm: [f64; 3], data: Vec<u8>) -> Result<LabelVolume> {
        Self::with_frames(dims, spacing_mm, None, None, data)
    }

    pub fn with_frames(
        dims: [usize; 3],
        spacing_mm: [f64; 3],
        frames: Option<usize>,
        frame_period_s: Option<f64>,
        data: Vec<u8>,
    ) -> Result<LabelVolume> {
        check_grid(dims, spacing_mm)?;
        if frames == Some(0) {
            return Err(Error::dims("frame count must be at least 1"));
        }
        let expect = dims[0] * dims[1] * dims[2] * frames.unwrap_or(1);
        if data.len() != expect {
            return Err(Error::dims(format!(
                "label data length {} does not match dims {dims:?} x {} frames",
                data.len(),
                frames.unwrap_or(1)
            )));
        }
        if let Some(bad) = data.iter().position(|&c| Structure::from_code(c).is_none()) {
            return Err(Error::UnknownLabel {
                code: data[bad],
                index: bad,
            });
        }
        Ok(LabelVolume {
            dims,
            spacing_mm,
            frames,
            frame_period_s,
            data,
        })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing_mm(&self) -> [f64; 3] {
        self.spacing_mm
    }

    pub fn frames(&self) -> Option<usize> {
        self.frames
    }

    pub fn frame_period_s(&self) -> Option<f64> {
        self.frame_period_s
    }

    pub fn frame_count(&self) -> usize {
        self.frames.unwrap_or(1)
    }

    pub fn voxels_per_frame(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn frame_data(&self, frame: usize) -> &[u8] {
        let n = self.voxels_per_frame();
        &self.data[frame * n..(frame + 1) * n]
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    #[inline]
    pub fn at(&self, frame: usize, i: usize, j: usize, k: usize) -> u8 {
        self.data[frame * self.voxels_per_frame() + self.index(i, j, k)]
    }

    /// Voxel volume in millilitres.
    pub fn voxel_ml(&self) -> f64 {
        self.spacing_mm[0] * self.spacing_mm[1] * self.spacing_mm[2] / 1000.0
    }

    /// Binary mask of one structure in one frame.
    pub fn class_mask(&self, frame: usize, structure: Structure) -> Mask {
        let code = structure.code();
        let data = self.frame_data(frame).iter().map(|&c| c == code).collect();
        Mask {
            dims: self.dims,
            spacing_mm: self.spacing_mm,
            data,
        }
    }
}

/// A single-frame binary mask. Used for vessel geometry and surface
/// counting, where only membership matters.
#[derive(Clone, Debug, PartialEq)]
pub struct Mask {
    dims: [usize; 3],
    spacing_mm: [f64; 3],
    data: Vec<bool>,
}

impl Mask {
    pub fn new(dims: [usize; 3], spacing_mm: [f64; 3], data: Vec<bool>) -> Result<Mask> {
        check_grid(dims, spacing_mm)?;
        if data.len() != dims[0] * dims[1] * dims[2] {
            return Err(Error::dims(format!(
                "mask data length {} does not match dims {dims:?}",
                data.len()
            )));
        }
        Ok(Mask {
            dims,
            spacing_mm,
            data,
        })
    }

    /// Build a mask by evaluating a predicate on voxel indices.
    pub fn from_fn(
        dims: [usize; 3],
        spacing_mm: [f64; 3],
        mut f: impl FnMut(usize, usize, usize) -> bool,
    ) -> Result<Mask> {
        let mut data = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    data.push(f(i, j, k));
                }
            }
        }
        Mask::new(dims, spacing_mm, data)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing_mm(&self) -> [f64; 3] {
        self.spacing_mm
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        self.data[self.index(i, j, k)]
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}
