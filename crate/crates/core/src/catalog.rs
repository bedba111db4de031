//! Small channels and chains with known asymptotics, used by tests, golden
//! fixtures and the command line.

use crate::channel::{Channel, KrausSet};
use crate::config::Config;
use crate::operator::{c, from_real_rows, identity, matrix_unit, tensor, CMat};
use crate::stochastic::StochasticMatrix;

pub fn pauli_z() -> CMat {
    from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
}

/// `x -> U x U*`.
pub fn ad_unitary(u: CMat, cfg: &Config) -> Channel {
    Channel::from_kraus(KrausSet::new(vec![u]).expect("single operator"), cfg)
}

pub fn ad_z(cfg: &Config) -> Channel {
    ad_unitary(pauli_z(), cfg)
}

/// Diagonal unitary `diag(1, e^{2 pi i theta})`.
pub fn phase_unitary(theta: f64) -> CMat {
    let mut u = identity(2);
    u[(1, 1)] = c(0.0, 2.0 * std::f64::consts::PI * theta).exp();
    u
}

/// `x -> tr(x) / d * 1`.
pub fn completely_depolarizing(d: usize, cfg: &Config) -> Channel {
    let s = c(1.0 / (d as f64).sqrt(), 0.0);
    let ops = (0..d).flat_map(|i| (0..d).map(move |j| matrix_unit(d, i, j) * s)).collect();
    Channel::from_kraus(KrausSet::new(ops).expect("same dimension"), cfg)
}

/// `x -> p x + (1 - p) tr(x) / d * 1` for `p` in `[0, 1]`.
pub fn depolarizing(d: usize, p: f64, cfg: &Config) -> Channel {
    let mut ops = vec![identity(d) * c(p.sqrt(), 0.0)];
    let s = c(((1.0 - p) / d as f64).sqrt(), 0.0);
    ops.extend((0..d).flat_map(|i| (0..d).map(move |j| matrix_unit(d, i, j) * s)));
    Channel::from_kraus(KrausSet::new(ops).expect("same dimension"), cfg)
}

/// `D ⊗ Ad U` on `M_2 ⊗ M_2`, with `D` completely depolarizing.
pub fn depolarizing_tensor_unitary(u: &CMat, cfg: &Config) -> Channel {
    let s = c(1.0 / 2f64.sqrt(), 0.0);
    let ops = (0..2).flat_map(|i| (0..2).map(move |j| tensor(&(matrix_unit(2, i, j) * s), u))).collect();
    Channel::from_kraus(KrausSet::new(ops).expect("same dimension"), cfg)
}

/// Cyclic shift `i -> i + 1 mod n`.
pub fn cycle(n: usize) -> StochasticMatrix {
    let rows = (0..n).map(|i| (0..n).map(|j| if j == (i + 1) % n { 1.0 } else { 0.0 }).collect()).collect();
    StochasticMatrix::new(rows).expect("permutation matrix")
}

/// Two-state chain with eigenvalues `1` and `0.8`.
pub fn lazy_chain() -> StochasticMatrix {
    StochasticMatrix::new(vec![vec![0.9, 0.1], vec![0.1, 0.9]]).expect("stochastic")
}

/// Period-two chain on four states with spectrum `{1, -1, 1/2, -1/2}`.
pub fn block_cyclic_four() -> StochasticMatrix {
    StochasticMatrix::new(vec![
        vec![0.0, 0.0, 0.75, 0.25],
        vec![0.0, 0.0, 0.25, 0.75],
        vec![0.75, 0.25, 0.0, 0.0],
        vec![0.25, 0.75, 0.0, 0.0],
    ])
    .expect("stochastic")
}

/// Two communicating states feeding an absorbing third state.
pub fn reducible_three() -> StochasticMatrix {
    StochasticMatrix::new(vec![vec![0.5, 0.25, 0.25], vec![0.25, 0.5, 0.25], vec![0.0, 0.0, 1.0]]).expect("stochastic")
}
