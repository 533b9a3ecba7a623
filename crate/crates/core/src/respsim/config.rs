use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, Domain};

/// Parameters of one synthetic free-breathing acquisition.
///
/// The per-cycle and per-beat variability draws are functions of
/// (seed, index), so any cycle or beat can be evaluated without walking its
/// predecessors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RespiratoryConfig {
    /// Overall motion magnitude scale.
    pub m: f64,
    /// Nominal breathing period in seconds.
    pub b_s: f64,
    /// Phase offset in radians.
    pub phi_rad: f64,
    /// Per-cycle amplitude variability range.
    pub var1_range: (f64, f64),
    /// Per-cycle period variability range.
    pub var2_range: (f64, f64),
    /// Mean R-R interval in seconds.
    pub rr_mean_s: f64,
    /// Per-beat R-R jitter range.
    pub rr_jitter_range: (f64, f64),
    /// Root seed for all draws tied to this acquisition.
    pub seed: u64,
}

pub const VAR1_RANGE: (f64, f64) = (0.9, 1.1);
pub const VAR2_RANGE: (f64, f64) = (0.95, 1.05);
pub const RR_JITTER_RANGE: (f64, f64) = (0.95, 1.05);

pub const M_DRAW_RANGE: (f64, f64) = (0.5, 1.5);
pub const B_DRAW_RANGE_S: (f64, f64) = (3.0, 6.0);
pub const RR_DRAW_RANGE_S: (f64, f64) = (0.6, 1.2);

impl RespiratoryConfig {
    /// Draw a subject: magnitude in [0.5, 1.5], breathing period in
    /// [3, 6] s, random phase, mean R-R in [0.6, 1.2] s. Variability ranges
    /// take their standard values.
    pub fn draw(seed: u64) -> RespiratoryConfig {
        let mut rng = stream(seed, Domain::ConfigDraw, 0);
        RespiratoryConfig {
            m: rng.random_range(M_DRAW_RANGE.0..=M_DRAW_RANGE.1),
            b_s: rng.random_range(B_DRAW_RANGE_S.0..=B_DRAW_RANGE_S.1),
            phi_rad: rng.random_range(0.0..std::f64::consts::TAU),
            var1_range: VAR1_RANGE,
            var2_range: VAR2_RANGE,
            rr_mean_s: rng.random_range(RR_DRAW_RANGE_S.0..=RR_DRAW_RANGE_S.1),
            rr_jitter_range: RR_JITTER_RANGE,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.m,
            self.b_s,
            self.phi_rad,
            self.var1_range.0,
            self.var1_range.1,
            self.var2_range.0,
            self.var2_range.1,
            self.rr_mean_s,
            self.rr_jitter_range.0,
            self.rr_jitter_range.1,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::arg("respiratory config contains non-finite values"));
        }
        if self.b_s <= 0.0 {
            return Err(Error::arg(format!(
                "breathing period must be positive, got {}",
                self.b_s
            )));
        }
        if self.rr_mean_s <= 0.0 {
            return Err(Error::arg(format!(
                "mean R-R interval must be positive, got {}",
                self.rr_mean_s
            )));
        }
        for (name, (lo, hi)) in [
            ("var1", self.var1_range),
            ("var2", self.var2_range),
            ("rr_jitter", self.rr_jitter_range),
        ] {
            if !(lo > 0.0 && hi >= lo) {
                return Err(Error::arg(format!(
                    "{name} range ({lo}, {hi}) must be positive and ordered"
                )));
            }
        }
        Ok(())
    }

    fn draw_in(&self, domain: Domain, index: u64, range: (f64, f64)) -> f64 {
        if range.0 == range.1 {
            return range.0;
        }
        stream(self.seed, domain, index).random_range(range.0..=range.1)
    }

    /// Amplitude variability of respiratory cycle `cycle`.
    pub(crate) fn var1(&self, cycle: u64) -> f64 {
        self.draw_in(Domain::RespVar1, cycle, self.var1_range)
    }

    /// Period variability of respiratory cycle `cycle`.
    pub(crate) fn var2(&self, cycle: u64) -> f64 {
        self.draw_in(Domain::RespVar2, cycle, self.var2_range)
    }

    /// R-R jitter of heartbeat `beat`.
    pub(crate) fn rr_jitter(&self, beat: u64) -> f64 {
        self.draw_in(Domain::RrJitter, beat, self.rr_jitter_range)
    }
}
