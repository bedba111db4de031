//! Geometric decay certificates `||R^n|| <= c r^n` for the non-peripheral
//! part `R = S (1 - Q)`.

use serde::Serialize;

use crate::operator::{CMat, C64};

/// Margin added to the spectral radius to obtain the certified rate.
pub const RATE_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayNorm {
    Frobenius,
    /// Induced infinity norm, the largest absolute row sum.
    RowSum,
}

impl DecayNorm {
    pub fn eval(self, m: &CMat) -> f64 {
        match self {
            Self::Frobenius => m.norm(),
            Self::RowSum => m.row_iter().map(|r| r.iter().map(|z: &C64| z.norm()).sum::<f64>()).fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayCertificate {
    pub norm: DecayNorm,
    pub n_max: usize,
    /// `||R^n||` for `n = 1..=n_max`.
    pub curve: Vec<f64>,
    pub sub_radius: f64,
    /// Certified rate `r = sub_radius + RATE_MARGIN`.
    pub rate: f64,
    /// Smallest `c` with `curve[n] <= c r^n` on the fit window.
    pub constant: f64,
    /// Largest `n` used to fit `c`.
    pub fit_window: usize,
    /// Values at or below this are indistinguishable from rounding.
    pub noise_floor: f64,
    /// Least-squares rate of the curve above the noise floor.
    pub empirical_rate: Option<f64>,
    /// Largest `curve[n] / (c r^n + noise_floor)` over all `n`.
    pub worst_ratio: f64,
    pub holds: bool,
}

/// Fits `c` on `n <= n_max / 2` and checks `||R^n|| <= c r^n` up to `n_max`.
pub fn certify_decay(r_mat: &CMat, norm: DecayNorm, sub_radius: f64, n_max: usize) -> DecayCertificate {
    let n_max = n_max.max(2);
    let rate = sub_radius + RATE_MARGIN;
    let noise_floor = 64.0 * f64::EPSILON * (r_mat.nrows() as f64) * norm.eval(r_mat).max(1.0);
    let mut curve = Vec::with_capacity(n_max);
    let mut power = r_mat.clone();
    for _ in 0..n_max {
        curve.push(norm.eval(&power));
        power = &power * r_mat;
    }
    let fit_window = n_max / 2;
    let mut constant: f64 = 0.0;
    for (i, v) in curve.iter().enumerate().take(fit_window) {
        if *v > noise_floor {
            constant = constant.max(v / rate.powi(i as i32 + 1));
        }
    }
    let mut worst_ratio: f64 = 0.0;
    for (i, v) in curve.iter().enumerate() {
        let bound = constant * rate.powi(i as i32 + 1) + noise_floor;
        worst_ratio = worst_ratio.max(v / bound);
    }
    let empirical_rate = log_slope(&curve, noise_floor);
    DecayCertificate {
        norm,
        n_max,
        sub_radius,
        rate,
        constant,
        fit_window,
        noise_floor,
        empirical_rate,
        worst_ratio,
        holds: worst_ratio <= 1.0 + 1e-9,
        curve,
    }
}

fn log_slope(curve: &[f64], floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        curve.iter().enumerate().filter(|(_, v)| **v > floor).map(|(i, v)| ((i + 1) as f64, v.ln())).collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some((sxy / sxx).exp())
}
