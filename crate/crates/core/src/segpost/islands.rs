use crate::segpost::components::{component_sizes, label_components, Connectivity};
use crate::volume::{LabelVolume, FOREGROUND_STRUCTURES};

/// Remove stray islands, per class and per frame: only the largest
/// connected component of each class survives, everything else is cleared
/// to background.
///
/// Combining a smaller component into the kept one would apply when the
/// two share a face, but any two face-sharing regions are already a single
/// component at every supported connectivity, so combination never fires
/// and keep-largest is the whole rule. Islands that should count as part
/// of the main body are instead captured by choosing a generous
/// connectivity (26 joins even corner-touching voxels).
pub fn clean_islands(labels: &LabelVolume, conn: Connectivity) -> LabelVolume {
    let dims = labels.dims();
    let mut data = labels.data().to_vec();
    let per_frame = dims[0] * dims[1] * dims[2];
    for frame in 0..labels.frame_count() {
        let out = &mut data[frame * per_frame..(frame + 1) * per_frame];
        for structure in FOREGROUND_STRUCTURES {
            let mask = labels.class_mask(frame, structure);
            let (comp, count) = label_components(&mask, conn);
            if count <= 1 {
                continue;
            }
            let sizes = component_sizes(&comp, count);
            let mut largest = 0usize;
            for (c, &s) in sizes.iter().enumerate() {
                if s > sizes[largest] {
                    largest = c;
                }
            }
            let keep = (largest + 1) as u32;
            for (idx, &c) in comp.iter().enumerate() {
                if c > 0 && c != keep {
                    out[idx] = 0;
                }
            }
        }
    }
    LabelVolume::with_frames(
        dims,
        labels.spacing_mm(),
        labels.frames(),
        labels.frame_period_s(),
        data,
    )
    .expect("cleaning preserves geometry and only writes background")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::Structure;

    fn labelled(dims: [usize; 3], f: impl Fn(usize, usize, usize) -> u8) -> LabelVolume {
        let mut data = Vec::new();
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    data.push(f(i, j, k));
                }
            }
        }
        LabelVolume::new(dims, [1.0; 3], data).unwrap()
    }

    #[test]
    fn single_component_classes_are_unchanged() {
        let v = labelled([6, 6, 6], |i, _, _| if i < 3 { 1 } else { 2 });
        let cleaned = clean_islands(&v, Connectivity::TwentySix);
        assert_eq!(cleaned.data(), v.data());
    }

    #[test]
    fn small_far_island_is_removed() {
        // A 100-voxel slab and a 3-voxel speck of the same class.
        let v = labelled([10, 10, 5], |i, j, k| {
            let slab = k == 0;
            let speck = k == 4 && i == 9 && j < 3;
            if slab || speck {
                1
            } else {
                0
            }
        });
        let lv = Structure::LeftVentricle;
        assert_eq!(v.class_mask(0, lv).count(), 103);
        let cleaned = clean_islands(&v, Connectivity::TwentySix);
        assert_eq!(cleaned.class_mask(0, lv).count(), 100);
        assert_eq!(cleaned.at(0, 9, 0, 4), 0);
    }

    #[test]
    fn connectivity_decides_whether_diagonal_voxels_survive() {
        // A corner-touching voxel is part of the blob at 26 but a separate
        // island at 6.
        let v = labelled([6, 6, 1], |i, j, _| {
            (i < 3 && j < 3 || i == 3 && j == 3) as u8
        });
        let lv = Structure::LeftVentricle;
        let at26 = clean_islands(&v, Connectivity::TwentySix);
        assert_eq!(at26.class_mask(0, lv).count(), 10);
        let at6 = clean_islands(&v, Connectivity::Six);
        assert_eq!(at6.class_mask(0, lv).count(), 9);
        assert_eq!(at6.at(0, 3, 3, 0), 0);
    }

    #[test]
    fn other_classes_are_untouched_by_a_cleanup() {
        // Class 2 sits right next to class 1's island; removing the island
        // must not disturb it.
        let v = labelled([8, 8, 1], |i, j, _| {
            if (i < 4 && j < 4) || (i == 7 && j == 7) {
                1
            } else if i == 7 && j == 6 {
                2
            } else {
                0
            }
        });
        let cleaned = clean_islands(&v, Connectivity::TwentySix);
        assert_eq!(cleaned.at(0, 7, 7, 0), 0);
        assert_eq!(cleaned.at(0, 7, 6, 0), 2);
    }

    #[test]
    fn cleaning_is_idempotent_and_never_adds_voxels() {
        let v = labelled([8, 8, 8], |i, j, k| {
            ((i * 31 + j * 17 + k * 7) % 11 < 3) as u8 * (1 + ((i + j + k) % 3) as u8)
        });
        let once = clean_islands(&v, Connectivity::TwentySix);
        let twice = clean_islands(&once, Connectivity::TwentySix);
        assert_eq!(once.data(), twice.data());
        for (a, b) in v.data().iter().zip(once.data()) {
            assert!(*b == *a || *b == 0, "cleanup may only clear voxels");
        }
    }

    #[test]
    fn frames_are_cleaned_independently() {
        let dims = [6, 6, 2];
        let mut data = Vec::new();
        for frame in 0..2 {
            for i in 0..dims[0] {
                for j in 0..dims[1] {
                    for _k in 0..dims[2] {
                        let main = i < 3 && j < 3;
                        let speck = i == 5 && j == 5 && frame == 1;
                        data.push((main || speck) as u8);
                    }
                }
            }
        }
        let v = LabelVolume::with_frames(dims, [1.0; 3], Some(2), Some(0.05), data).unwrap();
        let cleaned = clean_islands(&v, Connectivity::TwentySix);
        let lv = Structure::LeftVentricle;
        assert_eq!(cleaned.class_mask(0, lv).count(), 18);
        assert_eq!(cleaned.class_mask(1, lv).count(), 18, "speck removed");
        assert_eq!(cleaned.frame_period_s(), Some(0.05));
    }

    #[test]
    fn empty_classes_stay_empty() {
        let v = labelled([4, 4, 4], |_, _, _| 0);
        let cleaned = clean_islands(&v, Connectivity::TwentySix);
        assert!(cleaned.data().iter().all(|&c| c == 0));
    }
}
