use crate::loss::image::{conv3_axis, DERIV, SMOOTH};
use crate::respsim::DeformationField;

/// Scale on the deformation regularizer.
pub const SMOOTHNESS_SCALE: f64 = 5e-8;

/// Sum of squared 2D Sobel responses (both gradient components) over one
/// displacement map.
fn plane_sq_grad(map: &[f32], dims2: [usize; 2]) -> f64 {
    let dims = [dims2[0], dims2[1], 1];
    let base: Vec<f64> = map.iter().map(|&v| v as f64).collect();
    let mut total = 0.0f64;
    for axis in 0..2 {
        let g = conv3_axis(
            &conv3_axis(&base, dims, axis, DERIV),
            dims,
            1 - axis,
            SMOOTH,
        );
        total += g.iter().map(|v| v * v).sum::<f64>();
    }
    total
}

/// Deformation regularizer: per slice, squared L2 norm of the 2D Sobel
/// gradients of both displacement maps, averaged over slices and scaled
/// by 5e-8. Zero exactly when every slice's displacement is constant.
pub fn deformation_smoothness(field: &DeformationField) -> f64 {
    let slices = field.slices();
    let mut total = 0.0f64;
    for s in slices {
        total += plane_sq_grad(s.dy(), s.dims()) + plane_sq_grad(s.dx(), s.dims());
    }
    total / slices.len() as f64 * SMOOTHNESS_SCALE
}
