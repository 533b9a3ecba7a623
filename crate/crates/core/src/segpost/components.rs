use crate::error::{Error, Result};
use crate::volume::Mask;

/// Voxel neighborhood: shared face only, face or edge, or any shared
/// face/edge/corner.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connectivity {
    Six,
    Eighteen,
    TwentySix,
}

impl Connectivity {
    pub fn offsets(self) -> Vec<[i64; 3]> {
        let max_taxicab = match self {
            Connectivity::Six => 1,
            Connectivity::Eighteen => 2,
            Connectivity::TwentySix => 3,
        };
        let mut out = Vec::new();
        for di in -1i64..=1 {
            for dj in -1i64..=1 {
                for dk in -1i64..=1 {
                    let t = di.abs() + dj.abs() + dk.abs();
                    if t > 0 && t <= max_taxicab {
                        out.push([di, dj, dk]);
                    }
                }
            }
        }
        out
    }
}

/// Flood-fill labelling. Returns one label per voxel (0 for background,
/// components numbered 1.. in scan order of their first voxel) and the
/// component count.
pub fn label_components(mask: &Mask, conn: Connectivity) -> (Vec<u32>, usize) {
    let d = mask.dims();
    let offsets = conn.offsets();
    let mut labels = vec![0u32; d[0] * d[1] * d[2]];
    let mut next = 0u32;
    let mut stack: Vec<[usize; 3]> = Vec::new();
    for i in 0..d[0] {
        for j in 0..d[1] {
            for k in 0..d[2] {
                let idx = mask.index(i, j, k);
                if !mask.data()[idx] || labels[idx] != 0 {
                    continue;
                }
                next += 1;
                labels[idx] = next;
                stack.push([i, j, k]);
                while let Some([ci, cj, ck]) = stack.pop() {
                    for off in &offsets {
                        let ni = ci as i64 + off[0];
                        let nj = cj as i64 + off[1];
                        let nk = ck as i64 + off[2];
                        if ni < 0
                            || nj < 0
                            || nk < 0
                            || ni as usize >= d[0]
                            || nj as usize >= d[1]
                            || nk as usize >= d[2]
                        {
                            continue;
                        }
                        let (ni, nj, nk) = (ni as usize, nj as usize, nk as usize);
                        let nidx = mask.index(ni, nj, nk);
                        if mask.data()[nidx] && labels[nidx] == 0 {
                            labels[nidx] = next;
                            stack.push([ni, nj, nk]);
                        }
                    }
                }
            }
        }
    }
    (labels, next as usize)
}

pub fn component_sizes(labels: &[u32], count: usize) -> Vec<usize> {
    let mut sizes = vec![0usize; count];
    for &l in labels {
        if l > 0 {
            sizes[(l - 1) as usize] += 1;
        }
    }
    sizes
}

/// The largest connected component of a non-empty mask; size ties go to
/// the component whose first voxel comes earliest in scan order.
pub fn largest_component(mask: &Mask, conn: Connectivity) -> Result<Mask> {
    let (labels, count) = label_components(mask, conn);
    if count == 0 {
        return Err(Error::EmptyMask(
            "cannot take the largest component of an empty mask".to_string(),
        ));
    }
    let sizes = component_sizes(&labels, count);
    let mut best = 0usize;
    for (c, &s) in sizes.iter().enumerate() {
        if s > sizes[best] {
            best = c;
        }
    }
    let keep = (best + 1) as u32;
    Mask::new(
        mask.dims(),
        mask.spacing_mm(),
        labels.iter().map(|&l| l == keep).collect(),
    )
}
