//! Seeded random operators, functionals and channels.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::{Channel, KrausSet};
use crate::config::Config;
use crate::linalg::inverse_sqrt_psd;
use crate::operator::{c, identity, nuclear_norm, spectral_norm, CMat, Functional};
use crate::stochastic::StochasticMatrix;

pub type SampleRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMat {
    CMat::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMat {
    let g = gaussian_matrix(rng, d);
    (&g + g.adjoint()) * c(0.5, 0.0)
}

/// Random operator of operator norm one.
pub fn random_unit_operator<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMat {
    let g = gaussian_matrix(rng, d);
    let n = spectral_norm(&g);
    g / c(n, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionalStratum {
    Raw,
    Hermitian,
    Traceless,
}

impl FunctionalStratum {
    /// Cycles through the three strata so every batch covers each of them.
    pub fn for_index(i: usize) -> Self {
        match i % 3 {
            0 => Self::Raw,
            1 => Self::Hermitian,
            _ => Self::Traceless,
        }
    }
}

/// Gaussian pairing matrix reduced to the requested stratum and scaled to
/// trace norm one.
pub fn random_functional<R: Rng + ?Sized>(rng: &mut R, d: usize, stratum: FunctionalStratum) -> Functional {
    let g = gaussian_matrix(rng, d);
    let mut f = match stratum {
        FunctionalStratum::Raw => g,
        FunctionalStratum::Hermitian => (&g + g.adjoint()) * c(0.5, 0.0),
        FunctionalStratum::Traceless => {
            let tr = g.trace() / c(d as f64, 0.0);
            g - identity(d) * tr
        }
    };
    let n = nuclear_norm(&f);
    if n > 0.0 {
        f /= c(n, 0.0);
    }
    Functional::new(f).expect("square by construction")
}

/// Stratified batch of `count` unit-trace-norm functionals on `M_d`.
pub fn functional_batch<R: Rng + ?Sized>(rng: &mut R, d: usize, count: usize) -> Vec<Functional> {
    (0..count).map(|i| random_functional(rng, d, FunctionalStratum::for_index(i))).collect()
}

/// Random UCP map with `count` Gaussian Kraus operators, made unital by
/// `K_i -> S^{-1/2} K_i` with `S = sum_i K_i K_i*`.
pub fn random_ucp_channel<R: Rng + ?Sized>(rng: &mut R, d: usize, count: usize, cfg: &Config) -> Channel {
    let raw: Vec<CMat> = (0..count).map(|_| gaussian_matrix(rng, d)).collect();
    let s = raw.iter().fold(CMat::zeros(d, d), |acc, k| acc + k * k.adjoint());
    let w = inverse_sqrt_psd(&s).expect("Gaussian Kraus sums are positive definite");
    let ops = raw.iter().map(|k| &w * k).collect();
    Channel::from_kraus(KrausSet::new(ops).expect("same dimension"), cfg)
}

/// Irreducible chain of period exactly `k` on `n >= k` states: states are
/// dealt into `k` nonempty classes at random and each row spreads random
/// positive mass over the whole next class.
pub fn random_periodic_stochastic<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> StochasticMatrix {
    assert!(k >= 1 && n >= k, "need n >= k >= 1");
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    let class_of = |s: usize| labels[s] % k;
    let mut rows = vec![vec![0.0; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        let next = (class_of(i) + 1) % k;
        for (j, p) in row.iter_mut().enumerate() {
            if class_of(j) == next {
                *p = rng.random_range(0.05..1.0);
            }
        }
        let sum: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= sum);
    }
    StochasticMatrix::new(rows).expect("rows are normalized")
}
