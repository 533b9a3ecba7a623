use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::respsim::config::RespiratoryConfig;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Beat {
    pub start_s: f64,
    pub duration_s: f64,
}

/// When each slice of a stack is acquired.
///
/// Every slice costs two consecutive heartbeats: the first re-establishes
/// the steady state after the slice shift, the second acquires. Slice k
/// therefore owns beats 2k and 2k+1, and its data is stamped at the middle
/// of beat 2k+1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceSchedule {
    pub beats: Vec<Beat>,
    /// Acquisition timestamp per slice, strictly increasing.
    pub slice_times_s: Vec<f64>,
    /// Index of the beat each slice samples (always 2k + 1).
    pub acquiring_beat: Vec<usize>,
}

impl SliceSchedule {
    pub fn n_slices(&self) -> usize {
        self.slice_times_s.len()
    }

    /// Total scan time: the end of the last beat.
    pub fn total_duration_s(&self) -> f64 {
        self.beats
            .last()
            .map(|b| b.start_s + b.duration_s)
            .unwrap_or(0.0)
    }
}

/// Build the acquisition schedule for `n_slices` slices. Beat b lasts
/// rr_mean * jitter(b) seconds with the jitter drawn per beat.
pub fn build_slice_schedule(cfg: &RespiratoryConfig, n_slices: usize) -> Result<SliceSchedule> {
    cfg.validate()?;
    if n_slices == 0 {
        return Err(Error::arg("schedule needs at least one slice"));
    }
    let n_beats = 2 * n_slices;
    let mut beats = Vec::with_capacity(n_beats);
    let mut t = 0.0;
    for b in 0..n_beats {
        let duration = cfg.rr_mean_s * cfg.rr_jitter(b as u64);
        beats.push(Beat {
            start_s: t,
            duration_s: duration,
        });
        t += duration;
    }
    let mut slice_times_s = Vec::with_capacity(n_slices);
    let mut acquiring_beat = Vec::with_capacity(n_slices);
    for k in 0..n_slices {
        let beat = &beats[2 * k + 1];
        slice_times_s.push(beat.start_s + beat.duration_s / 2.0);
        acquiring_beat.push(2 * k + 1);
    }
    Ok(SliceSchedule {
        beats,
        slice_times_s,
        acquiring_beat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn steady_cfg(rr: f64) -> RespiratoryConfig {
        RespiratoryConfig {
            m: 1.0,
            b_s: 4.0,
            phi_rad: 0.0,
            var1_range: (1.0, 1.0),
            var2_range: (1.0, 1.0),
            rr_mean_s: rr,
            rr_jitter_range: (1.0, 1.0),
            seed: 0,
        }
    }

    #[test]
    fn unit_rr_first_slice_lands_at_one_and_a_half() {
        let s = build_slice_schedule(&steady_cfg(1.0), 3).unwrap();
        assert_eq!(s.slice_times_s[0], 1.5);
        assert_eq!(s.slice_times_s[1], 3.5);
        assert_eq!(s.acquiring_beat, vec![1, 3, 5]);
        assert_eq!(s.total_duration_s(), 6.0);
    }

    #[test]
    fn slice_times_fall_inside_their_second_beat() {
        let mut cfg = RespiratoryConfig::draw(21);
        cfg.rr_mean_s = 0.8;
        let s = build_slice_schedule(&cfg, 24).unwrap();
        for (k, &t) in s.slice_times_s.iter().enumerate() {
            let beat = &s.beats[s.acquiring_beat[k]];
            assert_eq!(s.acquiring_beat[k], 2 * k + 1);
            assert!(t >= beat.start_s && t < beat.start_s + beat.duration_s);
        }
        for w in s.slice_times_s.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn stack_duration_spans_the_reported_range() {
        // Without jitter the bounds are exact: 2 * n * rr.
        let lo = build_slice_schedule(&steady_cfg(0.6), 20).unwrap();
        assert!((lo.total_duration_s() - 24.0).abs() < 1e-9);
        let hi = build_slice_schedule(&steady_cfg(1.2), 28).unwrap();
        assert!((hi.total_duration_s() - 67.2).abs() < 1e-9);
        // Typical scans land between those extremes, covering the measured
        // 26-65 s span.
        assert!(lo.total_duration_s() < 26.0 && hi.total_duration_s() > 65.0);
    }

    #[test]
    fn jittered_durations_stay_within_five_percent() {
        let mut cfg = steady_cfg(1.0);
        cfg.rr_jitter_range = (0.95, 1.05);
        cfg.seed = 5;
        let s = build_slice_schedule(&cfg, 28).unwrap();
        let nominal = 2.0 * 28.0 * 1.0;
        assert!(s.total_duration_s() >= nominal * 0.95);
        assert!(s.total_duration_s() <= nominal * 1.05);
    }

    #[test]
    fn constant_jitter_scales_linearly() {
        let mut cfg = steady_cfg(1.0);
        cfg.rr_jitter_range = (0.95, 0.95);
        let s = build_slice_schedule(&cfg, 10).unwrap();
        let r = build_slice_schedule(&steady_cfg(1.0), 10).unwrap();
        assert!((s.total_duration_s() - 0.95 * r.total_duration_s()).abs() < 1e-12);
    }

    #[test]
    fn zero_slices_is_rejected() {
        assert!(build_slice_schedule(&steady_cfg(1.0), 0).is_err());
    }
}
