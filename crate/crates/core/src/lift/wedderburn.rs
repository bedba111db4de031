use serde::Serialize;

use super::algebra::ChoiEffrosAlgebra;
use crate::linalg::{cluster, eigenvalues, null_space};
use crate::operator::{c, CMat, CVec, C64};
use crate::sampling::SampleRng;
use rand::Rng;
use rand_distr::StandardNormal;

const ATTEMPTS: usize = 5;

#[derive(Debug, Clone, Serialize)]
pub struct WedderburnReport {
    /// Block sizes `n_i` with `N ≅ ⊕ M_{n_i}`, largest first.
    pub blocks: Vec<usize>,
    pub center_dim: usize,
    /// Coordinates of the minimal central projections, aligned with `blocks`.
    #[serde(skip)]
    pub central_projections: Vec<CVec>,
    /// Set when the spectrum of a central element could not be resolved into
    /// square multiplicities; `blocks` is then a best effort.
    pub warning: Option<String>,
}

/// Block decomposition from the center: a generic self-adjoint central `h`
/// acts on `N` by left multiplication with one eigenvalue per block, of
/// multiplicity `n_i^2`.
pub fn wedderburn(alg: &ChoiEffrosAlgebra, tol: f64, rng: &mut SampleRng) -> WedderburnReport {
    let m = alg.dim();
    // Commutator constraints: sum_i z_i (c_ijk - c_jik) = 0 for all j, k.
    let mut constraints = CMat::zeros(m * m, m);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                constraints[(j * m + k, i)] = alg.structure_constant(i, j, k) - alg.structure_constant(j, i, k);
            }
        }
    }
    let center = null_space(&constraints, tol.max(1e-12) * constraints.norm().max(1.0));
    let center_dim = center.ncols();

    // Real and imaginary parts of central elements are central and self-adjoint.
    let mut generators: Vec<CVec> = Vec::new();
    for j in 0..center_dim {
        let z = center.column(j);
        generators.push(z.map(|v| c(v.re, 0.0)));
        generators.push(z.map(|v| c(v.im, 0.0)));
    }

    let mut last = None;
    for _ in 0..ATTEMPTS {
        let h = generators.iter().fold(CVec::zeros(m), |acc, g| {
            let w: f64 = rng.sample(StandardNormal);
            acc + g * c(w, 0.0)
        });
        let lh = alg.left_multiplication(&h);
        let Ok(values) = eigenvalues(&lh) else { continue };
        let spread = values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        let groups = cluster(&values, 1e-6 * spread);
        let mults: Vec<usize> = groups.iter().map(|g| g.len()).collect();
        let square = mults.iter().all(|&k| is_square(k));
        if groups.len() == center_dim && square {
            let mut blocks: Vec<(usize, CVec)> = groups
                .iter()
                .map(|g| {
                    let mu = mean(&values, g);
                    let others: Vec<C64> =
                        groups.iter().filter(|o| *o != g).map(|o| mean(&values, o)).collect();
                    (isqrt(g.len()), central_projection(&lh, alg.unit(), mu, &others))
                })
                .collect();
            blocks.sort_by_key(|b| std::cmp::Reverse(b.0));
            return WedderburnReport {
                blocks: blocks.iter().map(|b| b.0).collect(),
                center_dim,
                central_projections: blocks.into_iter().map(|b| b.1).collect(),
                warning: None,
            };
        }
        last = Some(mults);
    }
    let mults = last.unwrap_or_default();
    let mut blocks: Vec<usize> = mults.iter().map(|&k| isqrt(k)).collect();
    blocks.sort_by(|a, b| b.cmp(a));
    WedderburnReport {
        blocks,
        center_dim,
        central_projections: Vec::new(),
        warning: Some(format!(
            "central element spectrum has multiplicities {mults:?} for a center of dimension {center_dim}"
        )),
    }
}

/// `prod_{nu != mu} (L_h - nu) / (mu - nu)` applied to the unit.
fn central_projection(lh: &CMat, unit: &CVec, mu: C64, others: &[C64]) -> CVec {
    let m = lh.nrows();
    others.iter().fold(unit.clone(), |acc, &nu| (lh - CMat::identity(m, m) * nu) * acc / (mu - nu))
}

fn mean(values: &[C64], group: &[usize]) -> C64 {
    group.iter().map(|&i| values[i]).sum::<C64>() / c(group.len() as f64, 0.0)
}

fn isqrt(k: usize) -> usize {
    (k as f64).sqrt().round() as usize
}

fn is_square(k: usize) -> bool {
    let r = isqrt(k);
    r * r == k
}
