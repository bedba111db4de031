use serde::Serialize;

use super::algebra::choi_effros;
use super::subsystem::OperatorSubsystem;
use super::AsymptoticLift;
use crate::channel::Channel;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::linalg::{null_space, min_singular_value};
use crate::operator::{c, spectral_norm, vec_of, CMat, CVec};
use crate::sampling::SampleRng;
use rand_distr::StandardNormal;
use rand::Rng;

const SAMPLES: usize = 32;

#[derive(Debug, Clone, Serialize)]
pub struct PoissonReport {
    /// `dim N^alpha`, the fixed points of the automorphism.
    pub dim_fixed_alpha: usize,
    /// `dim H_L`, the fixed points of the channel.
    pub dim_h_l: usize,
    /// Largest distance of `E(N^alpha)` from `H_L`.
    pub onto_residual: f64,
    /// Smallest singular value of `E` restricted to `N^alpha`.
    pub injectivity: f64,
    pub multiplicative_residual: f64,
    pub norm_residual: f64,
    pub isomorphic: bool,
}

/// Compares the fixed-point algebra `N^alpha` with the Poisson boundary
/// `H_L = {x : L(x) = x}`, whose product `P_1(xy)` comes from the spectral
/// projection at eigenvalue one.
pub fn poisson_boundary(ch: &Channel, lift: &AsymptoticLift, cfg: &Config, rng: &mut SampleRng) -> Result<PoissonReport> {
    let d = ch.dim();
    let s = ch.superoperator().matrix();
    let n = s.nrows();
    let shifted = s - CMat::identity(n, n);
    let null_tol = (cfg.tol_cluster * s.norm().max(1.0)).max(1e-12);
    let fixed = null_space(&shifted, null_tol);
    let h_sys = OperatorSubsystem::from_vectors(&fixed, d, cfg.tol_span)?;

    let one = c(1.0, 0.0);
    let p1 = lift
        .peripheral
        .peripheral_eigenvalues
        .iter()
        .position(|p| (p.complex() - one).norm() <= cfg.tol_cluster)
        .map(|i| lift.peripheral.projections[i].clone())
        .ok_or_else(|| Error::Inconsistent("eigenvalue one is missing from the peripheral spectrum".into()))?;
    let h = choi_effros(h_sys, &p1, cfg.tol_alg, cfg.tol_span, rng)?;

    let m = lift.dim();
    let alpha_shift = &lift.alpha - CMat::identity(m, m);
    let fixed_alpha = null_space(&alpha_shift, (cfg.tol_cluster * alpha_shift.norm().max(1.0)).max(1e-12));
    let dim_fixed_alpha = fixed_alpha.ncols();
    let dim_h_l = h.dim();
    if dim_fixed_alpha != dim_h_l {
        return Err(Error::Inconsistent(format!(
            "fixed points of alpha have dimension {dim_fixed_alpha} but the Poisson boundary has dimension {dim_h_l}"
        )));
    }

    let mut onto_residual: f64 = 0.0;
    let mut images = CMat::zeros(d * d, dim_fixed_alpha);
    for j in 0..dim_fixed_alpha {
        let x = lift.e(&fixed_alpha.column(j).into_owned());
        onto_residual = onto_residual.max(h.system().coords(&x).1);
        images.set_column(j, &vec_of(&x));
    }
    let injectivity = if dim_fixed_alpha == 0 { 1.0 } else { min_singular_value(&images) };

    let random_fixed = |rng: &mut SampleRng| -> CVec {
        let w = CVec::from_fn(dim_fixed_alpha, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        &fixed_alpha * w
    };
    let mut multiplicative_residual: f64 = 0.0;
    let mut norm_residual: f64 = 0.0;
    for _ in 0..SAMPLES {
        let (y1, y2) = (random_fixed(rng), random_fixed(rng));
        let in_n = lift.e(&lift.algebra.product(&y1, &y2));
        let (h1, _) = h.system().coords(&lift.e(&y1));
        let (h2, _) = h.system().coords(&lift.e(&y2));
        let in_h = h.system().assemble(&h.product(&h1, &h2));
        let scale = spectral_norm(&lift.e(&y1)) * spectral_norm(&lift.e(&y2));
        multiplicative_residual = multiplicative_residual.max((in_n - in_h).norm() / scale.max(1e-300));
        let norm_n = lift.algebra.norm(&y1);
        norm_residual = norm_residual.max((norm_n - h.norm(&h1)).abs() / norm_n.max(1e-300));
    }

    let tol = cfg.tol_alg;
    Ok(PoissonReport {
        dim_fixed_alpha,
        dim_h_l,
        onto_residual,
        injectivity,
        multiplicative_residual,
        norm_residual,
        isomorphic: onto_residual <= cfg.tol_span
            && injectivity > tol
            && multiplicative_residual <= tol
            && norm_residual <= tol,
    })
}
