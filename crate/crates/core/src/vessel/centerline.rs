use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial order of the smoothed centerline.
pub const CHEB_ORDER: usize = 7;

const COEFFS: usize = CHEB_ORDER + 1;

/// Chebyshev polynomials of the first kind T_0..T_max at `x`.
fn cheb_t(x: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 2..out.len() {
        out[k] = 2.0 * x * out[k - 1] - out[k - 2];
    }
}

/// Derivatives dT_k/dx via T_k' = k U_{k-1} with the second-kind
/// recurrence.
fn cheb_t_prime(x: f64, out: &mut [f64]) {
    let n = out.len();
    let mut us = vec![0.0f64; n];
    us[0] = 1.0;
    if n > 1 {
        us[1] = 2.0 * x;
    }
    for k in 2..n {
        us[k] = 2.0 * x * us[k - 1] - us[k - 2];
    }
    out[0] = 0.0;
    for k in 1..n {
        out[k] = k as f64 * us[k - 1];
    }
}

/// A smooth vessel centerline: the fitted chain points, their normalized
/// arc-length parameters, and one Chebyshev polynomial per coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Centerline {
    points_mm: Vec<[f64; 3]>,
    arc_s: Vec<f64>,
    cheb_coeffs: [[f64; COEFFS]; 3],
    residual_rms: f64,
}

/// Normalized cumulative chord length of an ordered point sequence.
fn arc_params(points: &[[f64; 3]]) -> Result<Vec<f64>> {
    let mut s = Vec::with_capacity(points.len());
    s.push(0.0);
    let mut total = 0.0;
    for w in points.windows(2) {
        let d = ((w[1][0] - w[0][0]).powi(2)
            + (w[1][1] - w[0][1]).powi(2)
            + (w[1][2] - w[0][2]).powi(2))
        .sqrt();
        if d == 0.0 {
            return Err(Error::DegenerateGeometry(
                "centerline chain repeats a point".to_string(),
            ));
        }
        total += d;
        s.push(total);
    }
    if total == 0.0 {
        return Err(Error::DegenerateGeometry(
            "centerline chain has zero length".to_string(),
        ));
    }
    for v in &mut s {
        *v /= total;
    }
    Ok(s)
}

/// Fit a voxel chain, parametrized by normalized arc length, in mm space.
pub fn fit_centerline(
    chain: &[[usize; 3]],
    spacing_mm: [f64; 3],
    order: usize,
) -> Result<Centerline> {
    let points: Vec<[f64; 3]> = chain
        .iter()
        .map(|&[i, j, k]| {
            [
                i as f64 * spacing_mm[0],
                j as f64 * spacing_mm[1],
                k as f64 * spacing_mm[2],
            ]
        })
        .collect();
    let s = arc_params(&points)?;
    fit_with_params(&points, &s, order)
}

/// Fit points against caller-chosen parameters. With parameters matching
/// the generating polynomial's own argument, a degree <= order curve is
/// recovered exactly (up to conditioning); arc length does not have that
/// property for curved polynomials, which is why this entry point exists.
pub fn fit_with_params(points_mm: &[[f64; 3]], params: &[f64], order: usize) -> Result<Centerline> {
    if !(1..=CHEB_ORDER).contains(&order) {
        return Err(Error::arg(format!(
            "centerline order must be between 1 and {CHEB_ORDER}, got {order}"
        )));
    }
    let n = points_mm.len();
    if params.len() != n {
        return Err(Error::dims(format!(
            "{n} points but {} parameters",
            params.len()
        )));
    }
    if n < order + 1 {
        return Err(Error::UnderdeterminedFit { points: n, order });
    }
    if params.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::arg(
            "centerline parameters must be strictly increasing",
        ));
    }

    // Normalize parameters to [0, 1] and map onto the Chebyshev domain.
    let (lo, hi) = (params[0], params[n - 1]);
    let arc_s: Vec<f64> = params.iter().map(|&t| (t - lo) / (hi - lo)).collect();

    let mut row = vec![0.0f64; order + 1];
    let design = DMatrix::from_fn(n, order + 1, |i, m| {
        cheb_t(2.0 * arc_s[i] - 1.0, &mut row);
        row[m]
    });
    let rhs = DMatrix::from_fn(n, 3, |i, c| points_mm[i][c]);
    let svd = design.svd(true, true);
    let sol = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::DegenerateGeometry(format!("centerline fit failed: {e}")))?;

    let mut cheb_coeffs = [[0.0f64; COEFFS]; 3];
    for c in 0..3 {
        for m in 0..=order {
            cheb_coeffs[c][m] = sol[(m, c)];
        }
    }
    let mut line = Centerline {
        points_mm: points_mm.to_vec(),
        arc_s,
        cheb_coeffs,
        residual_rms: 0.0,
    };
    let mut sq = 0.0f64;
    for (p, &s) in line.points_mm.iter().zip(&line.arc_s) {
        let q = line.eval(s);
        sq += (0..3).map(|c| (p[c] - q[c]).powi(2)).sum::<f64>();
    }
    line.residual_rms = (sq / n as f64).sqrt();
    Ok(line)
}

impl Centerline {
    pub fn points_mm(&self) -> &[[f64; 3]] {
        &self.points_mm
    }

    pub fn arc_s(&self) -> &[f64] {
        &self.arc_s
    }

    pub fn coeffs(&self) -> &[[f64; COEFFS]; 3] {
        &self.cheb_coeffs
    }

    /// Root-mean-square distance between the fitted points and the curve.
    pub fn residual_rms(&self) -> f64 {
        self.residual_rms
    }

    /// Curve position at normalized arc length `s`.
    pub fn eval(&self, s: f64) -> [f64; 3] {
        let mut t = [0.0f64; COEFFS];
        cheb_t(2.0 * s - 1.0, &mut t);
        let mut p = [0.0f64; 3];
        for (c, out) in p.iter_mut().enumerate() {
            *out = (0..COEFFS).map(|m| self.cheb_coeffs[c][m] * t[m]).sum();
        }
        p
    }

    /// Unit tangent at `s`, from the analytic derivative.
    pub fn tangent(&self, s: f64) -> Result<[f64; 3]> {
        let mut tp = [0.0f64; COEFFS];
        cheb_t_prime(2.0 * s - 1.0, &mut tp);
        let mut d = [0.0f64; 3];
        for (c, out) in d.iter_mut().enumerate() {
            // Chain rule for x = 2s - 1.
            *out = 2.0
                * (0..COEFFS)
                    .map(|m| self.cheb_coeffs[c][m] * tp[m])
                    .sum::<f64>();
        }
        let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if norm < 1e-9 {
            return Err(Error::DegenerateGeometry(format!(
                "centerline tangent vanishes at s = {s}"
            )));
        }
        Ok([d[0] / norm, d[1] / norm, d[2] / norm])
    }

    /// Arc parameter minimizing the distance to `p`: dense scan plus local
    /// golden-section refinement.
    pub fn nearest_s(&self, p: [f64; 3]) -> f64 {
        let d2 = |s: f64| {
            let q = self.eval(s);
            (0..3).map(|c| (p[c] - q[c]).powi(2)).sum::<f64>()
        };
        let steps = 1024usize;
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for i in 0..=steps {
            let d = d2(i as f64 / steps as f64);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        let mut a = (best.saturating_sub(1)) as f64 / steps as f64;
        let mut b = ((best + 1).min(steps)) as f64 / steps as f64;
        for _ in 0..80 {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            if d2(m1) <= d2(m2) {
                b = m2;
            } else {
                a = m1;
            }
        }
        (a + b) / 2.0
    }
}

/// How to pick a measurement point on a centerline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SelectPoint {
    /// Normalized arc length in [0, 1].
    ArcFraction(f64),
    /// Closest curve point to a 3D position in mm.
    NearestTo([f64; 3]),
}

/// Resolve a selection to a curve point and unit tangent.
pub fn select_point(line: &Centerline, sel: SelectPoint) -> Result<([f64; 3], [f64; 3])> {
    let s = match sel {
        SelectPoint::ArcFraction(s) => {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::arg(format!(
                    "arc fraction must lie in [0, 1], got {s}"
                )));
            }
            s
        }
        SelectPoint::NearestTo(p) => line.nearest_s(p),
    };
    Ok((line.eval(s), line.tangent(s)?))
}
