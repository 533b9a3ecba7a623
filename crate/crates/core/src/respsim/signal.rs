use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::respsim::config::RespiratoryConfig;

/// One respiratory cycle as realized by the variability draws.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub start_s: f64,
    pub duration_s: f64,
    pub var1: f64,
    pub var2: f64,
}

/// The respiratory displacement signal
///
///   S(t) = M * Var1(cycle) * sin(2 pi t / (B * Var2(cycle)) + phi)
///
/// where Var1 and Var2 are piecewise-constant over respiratory cycles.
/// Cycle c occupies [T_c, T_c + B * Var2(c)); boundaries accumulate from
/// t = 0. The sine argument uses global time, so the signal may jump at a
/// cycle boundary; that discontinuity is part of the model.
///
/// |S| never exceeds M * max(Var1), which is 1.65 for drawn configs.
pub struct RespiratorySignal {
    cfg: RespiratoryConfig,
    /// End time of each realized cycle so far; extended lazily.
    cycle_ends: Vec<f64>,
    cycles: Vec<Cycle>,
}

impl RespiratorySignal {
    pub fn new(cfg: RespiratoryConfig) -> Result<RespiratorySignal> {
        cfg.validate()?;
        Ok(RespiratorySignal {
            cfg,
            cycle_ends: Vec::new(),
            cycles: Vec::new(),
        })
    }

    pub fn config(&self) -> &RespiratoryConfig {
        &self.cfg
    }

    fn extend_past(&mut self, t: f64) {
        while self.cycle_ends.last().copied().unwrap_or(0.0) <= t {
            let c = self.cycles.len() as u64;
            let start = self.cycle_ends.last().copied().unwrap_or(0.0);
            let var1 = self.cfg.var1(c);
            let var2 = self.cfg.var2(c);
            let duration = self.cfg.b_s * var2;
            self.cycles.push(Cycle {
                start_s: start,
                duration_s: duration,
                var1,
                var2,
            });
            self.cycle_ends.push(start + duration);
        }
    }

    /// Signal value at `t` seconds. `t` must be finite and non-negative.
    pub fn value(&mut self, t: f64) -> f64 {
        assert!(
            t.is_finite() && t >= 0.0,
            "signal time must be >= 0, got {t}"
        );
        self.extend_past(t);
        let c = self.cycle_ends.partition_point(|&end| end <= t);
        let cycle = &self.cycles[c];
        let omega = std::f64::consts::TAU / (self.cfg.b_s * cycle.var2);
        self.cfg.m * cycle.var1 * (omega * t + self.cfg.phi_rad).sin()
    }

    /// Cycles realized up to and including the one containing `t`.
    pub fn cycles_until(&mut self, t: f64) -> Vec<Cycle> {
        assert!(t.is_finite() && t >= 0.0);
        self.extend_past(t);
        let c = self.cycle_ends.partition_point(|&end| end <= t);
        self.cycles[..=c].to_vec()
    }
}

/// One-shot evaluation of the respiratory signal.
pub fn resp_signal(cfg: &RespiratoryConfig, t: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(crate::error::Error::arg(format!(
            "signal time must be finite and >= 0, got {t}"
        )));
    }
    Ok(RespiratorySignal::new(cfg.clone())?.value(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frozen_cfg() -> RespiratoryConfig {
        RespiratoryConfig {
            m: 1.0,
            b_s: 4.0,
            phi_rad: 0.0,
            var1_range: (1.0, 1.0),
            var2_range: (1.0, 1.0),
            rr_mean_s: 1.0,
            rr_jitter_range: (1.0, 1.0),
            seed: 0,
        }
    }

    #[test]
    fn quarter_period_peaks_at_one() {
        // sin(2 pi * 1 / 4) = 1 with unit variability and zero phase.
        let s = resp_signal(&frozen_cfg(), 1.0).unwrap();
        assert!((s - 1.0).abs() < 1e-12, "got {s}");
    }

    #[test]
    fn phase_shifts_the_signal() {
        let mut cfg = frozen_cfg();
        cfg.phi_rad = std::f64::consts::FRAC_PI_2;
        let s = resp_signal(&cfg, 0.0).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amplitude_envelope_holds_over_random_configs() {
        for seed in 0..300 {
            let cfg = RespiratoryConfig::draw(seed);
            let mut sig = RespiratorySignal::new(cfg).unwrap();
            for step in 0..400 {
                let t = step as f64 * 0.25;
                assert!(sig.value(t).abs() <= 1.5 * 1.1 + 1e-12);
            }
        }
    }

    #[test]
    fn variability_draws_are_per_cycle() {
        let cfg = RespiratoryConfig {
            var1_range: (0.9, 1.1),
            var2_range: (0.95, 1.05),
            ..frozen_cfg()
        };
        let mut sig = RespiratorySignal::new(cfg.clone()).unwrap();
        let cycles = sig.cycles_until(30.0);
        assert!(cycles.len() >= 7);
        for (c, cycle) in cycles.iter().enumerate() {
            assert_eq!(cycle.var1, cfg.var1(c as u64));
            assert_eq!(cycle.var2, cfg.var2(c as u64));
            assert!((cycle.duration_s - cfg.b_s * cycle.var2).abs() < 1e-12);
        }
        // Boundaries accumulate.
        for w in cycles.windows(2) {
            assert!((w[0].start_s + w[0].duration_s - w[1].start_s).abs() < 1e-12);
        }
    }

    #[test]
    fn evaluation_order_does_not_matter() {
        let cfg = RespiratoryConfig::draw(99);
        let mut a = RespiratorySignal::new(cfg.clone()).unwrap();
        let mut b = RespiratorySignal::new(cfg).unwrap();
        let late = a.value(57.3);
        for step in 0..580 {
            b.value(step as f64 * 0.1);
        }
        assert_eq!(late.to_bits(), b.value(57.3).to_bits());
    }

    #[test]
    fn negative_time_is_rejected() {
        assert!(resp_signal(&frozen_cfg(), -0.1).is_err());
        assert!(resp_signal(&frozen_cfg(), f64::NAN).is_err());
    }
}
