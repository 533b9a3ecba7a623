use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest sample size for which the signed-rank null is enumerated
/// exactly; the tie-corrected normal approximation takes over above it.
pub const WILCOXON_EXACT_MAX_N: usize = 25;

const LOA_FACTOR: f64 = 1.96;

/// Bland-Altman agreement summary of paired measurements. The limits of
/// agreement are bias +/- 1.96 standard deviations of the differences;
/// `p_value` is the two-sided signed-rank test on the same pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementStats {
    pub bias: f64,
    pub sd_diff: f64,
    pub loa_low: f64,
    pub loa_high: f64,
    pub p_value: f64,
}

fn differences(pairs: &[(f64, f64)]) -> Result<Vec<f64>> {
    if pairs.is_empty() {
        return Err(Error::Statistics("no pairs given".to_string()));
    }
    if pairs.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::arg("paired values must be finite"));
    }
    Ok(pairs.iter().map(|&(x, y)| x - y).collect())
}

pub fn bland_altman(pairs: &[(f64, f64)]) -> Result<AgreementStats> {
    let d = differences(pairs)?;
    let n = d.len();
    if n < 2 {
        return Err(Error::Statistics(format!(
            "agreement statistics need at least 2 pairs, got {n}"
        )));
    }
    let bias = d.iter().sum::<f64>() / n as f64;
    let ss: f64 = d.iter().map(|v| (v - bias) * (v - bias)).sum();
    let sd_diff = (ss / (n - 1) as f64).sqrt();
    Ok(AgreementStats {
        bias,
        sd_diff,
        loa_low: bias - LOA_FACTOR * sd_diff,
        loa_high: bias + LOA_FACTOR * sd_diff,
        p_value: wilcoxon_signed_rank(pairs)?,
    })
}

/// Ranks of |d|, doubled so midranks of ties stay integral, plus the tie
/// group sizes.
fn doubled_midranks(d: &[f64]) -> (Vec<u64>, Vec<usize>) {
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].abs().partial_cmp(&d[b].abs()).unwrap());
    let mut rank2 = vec![0u64; n];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && d[order[j]].abs() == d[order[i]].abs() {
            j += 1;
        }
        // Sorted slots i..j hold one-based ranks i+1..=j; twice their
        // midrank is (i+1) + j.
        for &o in &order[i..j] {
            rank2[o] = (i + 1 + j) as u64;
        }
        ties.push(j - i);
        i = j;
    }
    (rank2, ties)
}

/// Exact permutation p: distribute the 2^n equally likely sign assignments
/// over the doubled rank sum and fold the two tails.
fn exact_two_sided_p(rank2: &[u64], w2: u64) -> f64 {
    let total: usize = rank2.iter().sum::<u64>() as usize;
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    for &r in rank2 {
        for s in (r as usize..counts.len()).rev() {
            counts[s] += counts[s - r as usize];
        }
    }
    let le: u64 = counts[..=w2 as usize].iter().sum();
    let ge: u64 = counts[w2 as usize..].iter().sum();
    let denom = 2f64.powi(rank2.len() as i32);
    (2.0 * le.min(ge) as f64 / denom).min(1.0)
}

/// Tie-corrected normal approximation, no continuity correction.
fn normal_two_sided_p(n: usize, ties: &[usize], w2: u64) -> f64 {
    let nf = n as f64;
    let mean2 = nf * (nf + 1.0) / 2.0;
    let tie_adj: f64 = ties
        .iter()
        .map(|&t| {
            let t = t as f64;
            (t * t * t - t) / 48.0
        })
        .sum();
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_adj;
    let z = (w2 as f64 - mean2) / (4.0 * var).sqrt();
    let normal = Normal::new(0.0, 1.0).unwrap();
    (2.0 * normal.cdf(-z.abs())).min(1.0)
}

/// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
/// are dropped; if none remain the samples are indistinguishable and p is
/// 1.
pub fn wilcoxon_signed_rank(pairs: &[(f64, f64)]) -> Result<f64> {
    let d: Vec<f64> = differences(pairs)?
        .into_iter()
        .filter(|&v| v != 0.0)
        .collect();
    if d.is_empty() {
        return Ok(1.0);
    }
    let (rank2, ties) = doubled_midranks(&d);
    let w2: u64 = d
        .iter()
        .zip(&rank2)
        .filter(|(&v, _)| v > 0.0)
        .map(|(_, &r)| r)
        .sum();
    Ok(if d.len() <= WILCOXON_EXACT_MAX_N {
        exact_two_sided_p(&rank2, w2)
    } else {
        normal_two_sided_p(d.len(), &ties, w2)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn equal_pairs_have_zero_bias_and_unit_p() {
        let s = bland_altman(&[(1.0, 1.0), (2.0, 2.0)]).unwrap();
        assert_eq!(s.bias, 0.0);
        assert_eq!(s.sd_diff, 0.0);
        assert_eq!((s.loa_low, s.loa_high), (0.0, 0.0));
        assert_eq!(s.p_value, 1.0);
    }

    #[test]
    fn plus_minus_one_differences_give_the_hand_computed_limits() {
        let s = bland_altman(&[(1.0, 0.0), (0.0, 1.0)]).unwrap();
        assert_eq!(s.bias, 0.0);
        assert!((s.sd_diff - 2f64.sqrt()).abs() < 1e-15);
        assert!((s.loa_high - 1.96 * 2f64.sqrt()).abs() < 1e-12);
        assert!((s.loa_high - 2.7719).abs() < 1e-4);
        assert_eq!(s.p_value, 1.0);
    }

    #[test]
    fn limits_bracket_the_bias_symmetrically_and_swap_with_the_inputs() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let pairs: Vec<(f64, f64)> = (0..17)
            .map(|_| (rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)))
            .collect();
        let swapped: Vec<(f64, f64)> = pairs.iter().map(|&(x, y)| (y, x)).collect();
        let s = bland_altman(&pairs).unwrap();
        let t = bland_altman(&swapped).unwrap();
        let width = s.loa_high - s.loa_low;
        assert!((width - 2.0 * 1.96 * s.sd_diff).abs() <= 1e-12 * width.max(1.0));
        assert_eq!(t.bias, -s.bias);
        assert_eq!(t.loa_low, -s.loa_high);
        assert_eq!(t.loa_high, -s.loa_low);
        assert_eq!(t.p_value, s.p_value);
    }

    #[test]
    fn too_few_or_non_finite_pairs_are_rejected() {
        assert!(bland_altman(&[]).is_err());
        assert!(bland_altman(&[(1.0, 2.0)]).is_err());
        assert!(bland_altman(&[(1.0, f64::NAN), (2.0, 3.0)]).is_err());
        assert!(wilcoxon_signed_rank(&[]).is_err());
    }

    #[test]
    fn five_positive_distinct_differences_hit_the_textbook_p() {
        let pairs: Vec<(f64, f64)> = (1..=5).map(|i| (i as f64, 0.0)).collect();
        assert_eq!(wilcoxon_signed_rank(&pairs).unwrap(), 0.0625);
    }

    #[test]
    fn antisymmetric_differences_are_maximally_insignificant() {
        let pairs = vec![
            (1.0, 0.0),
            (0.0, 1.0),
            (2.0, 0.0),
            (0.0, 2.0),
            (3.0, 0.0),
            (0.0, 3.0),
        ];
        assert_eq!(wilcoxon_signed_rank(&pairs).unwrap(), 1.0);
    }

    #[test]
    fn all_zero_differences_mean_p_one() {
        assert_eq!(
            wilcoxon_signed_rank(&[(4.0, 4.0), (7.0, 7.0)]).unwrap(),
            1.0
        );
    }

    /// Independent oracle: enumerate all sign assignments directly on
    /// freshly computed f64 midranks (exact in binary: multiples of 1/2).
    fn brute_force_p(d: &[f64]) -> f64 {
        let n = d.len();
        let mut sorted: Vec<f64> = d.iter().map(|v| v.abs()).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let rank_of = |v: f64| -> f64 {
            let lo = sorted.partition_point(|&x| x < v.abs());
            let hi = sorted.partition_point(|&x| x <= v.abs());
            (lo + 1 + hi) as f64 / 2.0
        };
        let ranks: Vec<f64> = d.iter().map(|&v| rank_of(v)).collect();
        let w: f64 = d
            .iter()
            .zip(&ranks)
            .filter(|(&v, _)| v > 0.0)
            .map(|(_, &r)| r)
            .sum();
        let (mut le, mut ge) = (0u64, 0u64);
        for signs in 0..(1u64 << n) {
            let s: f64 = (0..n)
                .filter(|&i| signs >> i & 1 == 1)
                .map(|i| ranks[i])
                .sum();
            if s <= w {
                le += 1;
            }
            if s >= w {
                ge += 1;
            }
        }
        (2.0 * le.min(ge) as f64 / (1u64 << n) as f64).min(1.0)
    }

    #[test]
    fn exact_mode_agrees_with_full_enumeration() {
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        for _ in 0..50 {
            let n = rng.random_range(1..=12);
            // Small integer magnitudes force plenty of ties.
            let d: Vec<f64> = (0..n)
                .map(|_| {
                    let mag = rng.random_range(1..=4) as f64 * 0.5;
                    if rng.random::<bool>() {
                        mag
                    } else {
                        -mag
                    }
                })
                .collect();
            let pairs: Vec<(f64, f64)> = d.iter().map(|&v| (v, 0.0)).collect();
            let p = wilcoxon_signed_rank(&pairs).unwrap();
            let oracle = brute_force_p(&d);
            assert!(
                (p - oracle).abs() < 1e-12,
                "n={n} d={d:?} p={p} oracle={oracle}"
            );
        }
    }

    #[test]
    fn normal_approximation_tracks_the_exact_tail() {
        let mut rng = ChaCha12Rng::seed_from_u64(55);
        for _ in 0..5 {
            let d: Vec<f64> = (0..30)
                .map(|_| {
                    let mag = rng.random_range(1..=9) as f64;
                    if rng.random_range(0..10) < 6 {
                        mag
                    } else {
                        -mag
                    }
                })
                .collect();
            let pairs: Vec<(f64, f64)> = d.iter().map(|&v| (v, 0.0)).collect();
            let approx = wilcoxon_signed_rank(&pairs).unwrap();
            let (rank2, _) = doubled_midranks(&d);
            let w2: u64 = d
                .iter()
                .zip(&rank2)
                .filter(|(&v, _)| v > 0.0)
                .map(|(_, &r)| r)
                .sum();
            let exact = exact_two_sided_p(&rank2, w2);
            assert!(
                (approx - exact).abs() < 0.05,
                "approx {approx} vs exact {exact}"
            );
        }
    }

    #[test]
    fn strong_effects_stay_significant_in_the_approximate_regime() {
        let pairs: Vec<(f64, f64)> = (1..=40).map(|i| (i as f64, 0.0)).collect();
        assert!(wilcoxon_signed_rank(&pairs).unwrap() < 1e-6);
    }
}
