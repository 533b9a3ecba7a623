//! Image-quality and agreement measures: the LV-septum intensity profile
//! with its sharpness and contrast summaries, volume-to-volume similarity
//! metrics, and Bland-Altman / signed-rank paired statistics.

mod metrics;
mod profile;
mod stats;

pub use metrics::{image_metrics, mse, psnr_db, ssim, ImageMetrics, SSIM_WINDOW};
pub use profile::{contrast, edge_sharpness, intensity_profile, IntensityProfile};
pub use stats::{bland_altman, wilcoxon_signed_rank, AgreementStats, WILCOXON_EXACT_MAX_N};
