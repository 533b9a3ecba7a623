use crate::error::{Error, Result};
use crate::volume::{LabelVolume, Mask, FOREGROUND_STRUCTURES};

/// Multi-class soft segmentation: one [0, 1] channel per class on a shared
/// grid, class-major in memory. Binary stacks (every value exactly 0 or 1)
/// double as one-hot ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskStack {
    dims: [usize; 3],
    spacing_mm: [f64; 3],
    classes: usize,
    data: Vec<f32>,
}

impl MaskStack {
    pub fn new(
        dims: [usize; 3],
        spacing_mm: [f64; 3],
        classes: usize,
        data: Vec<f32>,
    ) -> Result<MaskStack> {
        if classes == 0 {
            return Err(Error::arg("mask stack needs at least one class"));
        }
        let per_class = dims[0] * dims[1] * dims[2];
        if per_class == 0 {
            return Err(Error::arg("mask stack dims must be positive"));
        }
        if data.len() != classes * per_class {
            return Err(Error::dims(format!(
                "mask stack of {} classes over {:?} needs {} values, got {}",
                classes,
                dims,
                classes * per_class,
                data.len()
            )));
        }
        if data.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::arg("mask stack values must lie in [0, 1]"));
        }
        Ok(MaskStack {
            dims,
            spacing_mm,
            classes,
            data,
        })
    }

    /// One-hot encoding of a labelled frame over the six foreground
    /// structures, in their code order.
    pub fn from_labels(labels: &LabelVolume, frame: usize) -> Result<MaskStack> {
        let dims = labels.dims();
        let per_class = dims[0] * dims[1] * dims[2];
        let frame_data = labels.frame_data(frame);
        let mut data = Vec::with_capacity(FOREGROUND_STRUCTURES.len() * per_class);
        for s in FOREGROUND_STRUCTURES {
            let code = s.code();
            data.extend(frame_data.iter().map(|&v| (v == code) as u8 as f32));
        }
        MaskStack::new(dims, labels.spacing_mm(), FOREGROUND_STRUCTURES.len(), data)
    }

    pub fn from_masks(masks: &[Mask]) -> Result<MaskStack> {
        let first = masks
            .first()
            .ok_or_else(|| Error::arg("mask stack needs at least one class"))?;
        let dims = first.dims();
        if masks.iter().any(|m| m.dims() != dims) {
            return Err(Error::dims("masks in a stack must share dims".to_string()));
        }
        let mut data = Vec::with_capacity(masks.len() * first.data().len());
        for m in masks {
            data.extend(m.data().iter().map(|&b| b as u8 as f32));
        }
        MaskStack::new(dims, first.spacing_mm(), masks.len(), data)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing_mm(&self) -> [f64; 3] {
        self.spacing_mm
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn class_data(&self, class: usize) -> &[f32] {
        let per_class = self.dims[0] * self.dims[1] * self.dims[2];
        &self.data[class * per_class..(class + 1) * per_class]
    }

    pub fn is_binary(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn class_mask(&self, class: usize) -> Mask {
        let d = self.dims;
        let data = self.class_data(class);
        Mask::from_fn(d, self.spacing_mm, |i, j, k| {
            data[(i * d[1] + j) * d[2] + k] >= 0.5
        })
        .expect("stack geometry was validated on construction")
    }
}

fn check_same_stack(pred: &MaskStack, gt: &MaskStack) -> Result<()> {
    if pred.dims() != gt.dims() || pred.classes() != gt.classes() {
        return Err(Error::dims(format!(
            "mask stacks differ: {:?} x{} classes vs {:?} x{} classes",
            pred.dims(),
            pred.classes(),
            gt.dims(),
            gt.classes()
        )));
    }
    Ok(())
}

/// Focal Tversky weights. `alpha` penalizes false negatives, `beta` false
/// positives, `gamma` focuses the loss on poorly segmented classes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TverskyParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for TverskyParams {
    fn default() -> Self {
        TverskyParams {
            alpha: 0.7,
            beta: 0.3,
            gamma: 0.75,
        }
    }
}

impl TverskyParams {
    fn validate(&self) -> Result<()> {
        let ok = self.alpha >= 0.0
            && self.beta >= 0.0
            && self.gamma > 0.0
            && self.alpha.is_finite()
            && self.beta.is_finite()
            && self.gamma.is_finite();
        if !ok {
            return Err(Error::arg(format!(
                "tversky weights must satisfy alpha, beta >= 0 and gamma > 0, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Focal Tversky loss summed over classes. Per class, with soft counts
/// TP = sum p*g, FN = sum (1-p)*g, FP = sum p*(1-g):
/// TI = TP / (TP + alpha*FN + beta*FP), contribution (1 - TI)^gamma.
/// A class absent from both prediction and truth contributes 0 (TI = 1).
pub fn focal_tversky(pred: &MaskStack, gt: &MaskStack, params: TverskyParams) -> Result<f64> {
    check_same_stack(pred, gt)?;
    params.validate()?;
    if !gt.is_binary() {
        return Err(Error::arg("ground-truth stack must be binary"));
    }
    let mut loss = 0.0f64;
    for c in 0..pred.classes() {
        let (mut tp, mut fn_, mut fp) = (0.0f64, 0.0f64, 0.0f64);
        for (&p, &g) in pred.class_data(c).iter().zip(gt.class_data(c)) {
            let (p, g) = (p as f64, g as f64);
            tp += p * g;
            fn_ += (1.0 - p) * g;
            fp += p * (1.0 - g);
        }
        let denom = tp + params.alpha * fn_ + params.beta * fp;
        let ti = if denom == 0.0 { 1.0 } else { tp / denom };
        loss += (1.0 - ti).powf(params.gamma);
    }
    Ok(loss)
}

/// Dice overlap 2|P∩G| / (|P| + |G|); two empty masks count as perfect
/// agreement.
pub fn dice(pred: &Mask, gt: &Mask) -> Result<f64> {
    if pred.dims() != gt.dims() {
        return Err(Error::dims(format!(
            "masks differ: {:?} vs {:?}",
            pred.dims(),
            gt.dims()
        )));
    }
    let mut inter = 0usize;
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        inter += (p && g) as usize;
    }
    let total = pred.count() + gt.count();
    if total == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / total as f64)
}
