//! Eigenstructure of a superoperator (or any square matrix), the peripheral
//! spectrum, the spectral idempotent `Q`, and the power-subsequence route to
//! the same idempotent.

use std::f64::consts::PI;

use serde::Serialize;

use crate::channel::Superoperator;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::linalg::{cluster, eigenvalues, inverse, matrix_power, spectral_radius_subspace};
use crate::operator::{c, frobenius, CMat, C64, ONE};

/// One cluster of numerically equal eigenvalues.
#[derive(Debug, Clone)]
pub struct EigenCluster {
    /// Cluster mean, rescaled to modulus one when peripheral.
    pub value: C64,
    /// Raw eigenvalues that were merged into this cluster.
    pub members: Vec<C64>,
    pub algebraic: usize,
    pub geometric: usize,
    pub peripheral: bool,
    /// Right eigenvectors as columns.
    pub right: CMat,
    /// Left eigenvectors as columns; `left* right = I` when semisimple.
    pub left: CMat,
}

impl EigenCluster {
    pub fn semisimple(&self) -> bool {
        self.geometric == self.algebraic
    }

    /// Spectral projection `R L*` of a semisimple cluster.
    pub fn projection(&self) -> CMat {
        &self.right * self.left.adjoint()
    }

    /// Largest raw modulus inside the cluster.
    pub fn max_modulus(&self) -> f64 {
        self.members.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DefectEntry {
    pub value: [f64; 2],
    pub algebraic: usize,
    pub geometric: usize,
}

#[derive(Debug, Clone)]
pub struct SpectralData {
    pub dim: usize,
    /// All eigenvalues, each cluster member listed separately.
    pub eigenvalues: Vec<C64>,
    pub clusters: Vec<EigenCluster>,
    pub defect_report: Vec<DefectEntry>,
}

impl SpectralData {
    pub fn diagonalizable(&self) -> bool {
        self.clusters.iter().all(EigenCluster::semisimple)
    }

    /// Max-entry residual of `<l_i, r_j> = delta_ij` over semisimple clusters.
    pub fn biorthogonality_residual(&self) -> f64 {
        let ss: Vec<&EigenCluster> = self.clusters.iter().filter(|c| c.semisimple()).collect();
        let mut worst: f64 = 0.0;
        for (a, ca) in ss.iter().enumerate() {
            for (b, cb) in ss.iter().enumerate() {
                let g = ca.left.adjoint() * &cb.right;
                for i in 0..g.nrows() {
                    for j in 0..g.ncols() {
                        let target = if a == b && i == j { ONE } else { c(0.0, 0.0) };
                        worst = worst.max((g[(i, j)] - target).norm());
                    }
                }
            }
        }
        worst
    }

    /// `sum_c lambda_c R_c L_c*`; only meaningful when diagonalizable.
    pub fn reconstruct(&self) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for cl in self.clusters.iter().filter(|c| c.semisimple()) {
            out += cl.projection() * cl.value;
        }
        out
    }

    /// Eigenvalues ordered by descending modulus, then ascending phase in `[0, 2pi)`.
    pub fn sorted_eigenvalues(&self) -> Vec<C64> {
        sort_spectrum(&self.eigenvalues)
    }
}

/// Deterministic presentation order: descending modulus, then ascending
/// phase in `[0, 2pi)`, both compared after rounding to 1e-9.
pub fn sort_spectrum(values: &[C64]) -> Vec<C64> {
    let mut v = values.to_vec();
    let key = |z: &C64| {
        let m = (z.norm() * 1e9).round() as i64;
        let mut phase = if z.norm() < 1e-12 { 0.0 } else { z.arg().rem_euclid(2.0 * PI) };
        if phase > 2.0 * PI - 1e-9 {
            phase = 0.0;
        }
        (-m, (phase * 1e9).round() as i64)
    };
    v.sort_by_key(key);
    v
}

/// Full eigendecomposition of a superoperator.
pub fn eigendecompose(s: &Superoperator, cfg: &Config) -> Result<SpectralData> {
    eigendecompose_matrix(s.matrix(), cfg)
}

/// Eigenvalues are clustered by single linkage with radius `tol_cluster`;
/// per cluster the right and left eigenspaces are the numerical kernels of
/// `S - lambda` and `(S - lambda)*`. A defective peripheral cluster is an error.
pub fn eigendecompose_matrix(s: &CMat, cfg: &Config) -> Result<SpectralData> {
    let n = s.nrows();
    if n != s.ncols() {
        return Err(Error::Dimension(format!("eigendecomposition of a {}x{} matrix", n, s.ncols())));
    }
    let raw = eigenvalues(s)?;
    let scale = frobenius(s).max(1.0);
    let null_tol = (cfg.tol_cluster * scale).max(1e-12);
    let mut clusters = Vec::new();
    let mut defect_report = Vec::new();
    for group in cluster(&raw, cfg.tol_cluster) {
        let members: Vec<C64> = group.iter().map(|&i| raw[i]).collect();
        let mean = members.iter().sum::<C64>() / c(members.len() as f64, 0.0);
        let peripheral = mean.norm() > 1.0 - cfg.tol_per;
        let value = if peripheral { mean / c(mean.norm(), 0.0) } else { mean };
        let algebraic = members.len();
        let shifted = s - CMat::identity(n, n) * value;
        let (right, geometric) = kernel_capped(&shifted, algebraic, null_tol);
        let (left, left_dim) = kernel_capped(&shifted.adjoint(), algebraic, null_tol);
        let geometric = geometric.min(left_dim);
        let mut cl = EigenCluster { value, members, algebraic, geometric, peripheral, right, left };
        if cl.semisimple() {
            let m = cl.left.adjoint() * &cl.right;
            let m_inv = inverse(&m).map_err(|_| {
                Error::Numerical(format!("left/right eigenvectors of {value} are not biorthogonalizable"))
            })?;
            cl.left = &cl.left * m_inv.adjoint();
        } else {
            defect_report.push(DefectEntry { value: [value.re, value.im], algebraic, geometric });
            if peripheral {
                return Err(Error::PeripheralDefect { eigenvalue: format!("{value}"), algebraic, geometric });
            }
        }
        clusters.push(cl);
    }
    Ok(SpectralData { dim: n, eigenvalues: raw, clusters, defect_report })
}

/// Kernel of `m` restricted to at most `cap` directions (the smallest
/// singular values), returned with its dimension.
fn kernel_capped(m: &CMat, cap: usize, tol: f64) -> (CMat, usize) {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let keep: Vec<usize> = order.into_iter().take(cap).filter(|&k| svd.singular_values[k] <= tol).collect();
    let basis = CMat::from_fn(n, keep.len(), |i, j| v_t[(keep[j], i)].conj());
    (basis, keep.len())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PeripheralEigenvalue {
    pub value: [f64; 2],
    pub multiplicity: usize,
}

impl PeripheralEigenvalue {
    pub fn complex(&self) -> C64 {
        c(self.value[0], self.value[1])
    }
}

#[derive(Debug, Clone)]
pub struct PeripheralDecomposition {
    pub dim: usize,
    pub peripheral_eigenvalues: Vec<PeripheralEigenvalue>,
    /// Spectral projection of each peripheral cluster, aligned with
    /// `peripheral_eigenvalues`.
    pub projections: Vec<CMat>,
    /// Spectral idempotent onto the peripheral part.
    pub q: CMat,
    /// Peripheral right eigenvectors as columns.
    pub right: CMat,
    /// Eigenvalue of each column of `right`.
    pub column_values: Vec<C64>,
    pub sub_radius: f64,
    pub semisimple: bool,
    /// Whether the whole spectrum (not only the peripheral part) is semisimple.
    pub diagonalizable: bool,
}

/// Collects the peripheral clusters into `Q = sum R_c L_c*` and measures the
/// spectral radius of the rest.
pub fn peripheral(spec: &SpectralData, tol_per: f64) -> Result<PeripheralDecomposition> {
    let n = spec.dim;
    let mut q = CMat::zeros(n, n);
    let mut peripheral_eigenvalues = Vec::new();
    let mut projections = Vec::new();
    let mut columns = Vec::new();
    let mut column_values = Vec::new();
    let mut sub_radius: f64 = 0.0;
    for cl in &spec.clusters {
        let is_peripheral = cl.value.norm() > 1.0 - tol_per;
        if !is_peripheral {
            sub_radius = sub_radius.max(cl.max_modulus());
            continue;
        }
        if !cl.semisimple() {
            return Err(Error::PeripheralDefect {
                eigenvalue: format!("{}", cl.value),
                algebraic: cl.algebraic,
                geometric: cl.geometric,
            });
        }
        let p = cl.projection();
        q += &p;
        projections.push(p);
        peripheral_eigenvalues.push(PeripheralEigenvalue { value: [cl.value.re, cl.value.im], multiplicity: cl.algebraic });
        for j in 0..cl.right.ncols() {
            columns.push(cl.right.column(j).into_owned());
            column_values.push(cl.value);
        }
    }
    let mut right = CMat::zeros(n, columns.len());
    for (j, col) in columns.iter().enumerate() {
        right.set_column(j, col);
    }
    Ok(PeripheralDecomposition {
        dim: n,
        peripheral_eigenvalues,
        projections,
        q,
        right,
        column_values,
        sub_radius,
        semisimple: true,
        diagonalizable: spec.diagonalizable(),
    })
}

impl PeripheralDecomposition {
    /// Total peripheral multiplicity, i.e. `dim N`.
    pub fn peripheral_count(&self) -> usize {
        self.peripheral_eigenvalues.iter().map(|p| p.multiplicity).sum()
    }

    pub fn values(&self) -> Vec<C64> {
        self.peripheral_eigenvalues.iter().map(|p| p.complex()).collect()
    }

    pub fn q_superoperator(&self, dim: usize) -> Result<Superoperator> {
        Superoperator::from_matrix(dim, self.q.clone())
    }

    /// `A^n Q = sum_c lambda_c^n P_c`, the peripheral part of `S^n`.
    pub fn peripheral_power(&self, n: u64) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for (pe, p) in self.peripheral_eigenvalues.iter().zip(&self.projections) {
            out += p * unimodular_power(pe.complex(), n);
        }
        out
    }

    pub fn idempotency_residual(&self) -> f64 {
        frobenius(&(&self.q * &self.q - &self.q))
    }

    pub fn commutation_residual(&self, s: &CMat) -> f64 {
        frobenius(&(&self.q * s - s * &self.q))
    }

    /// Spectral radius of `S (1 - Q)` by orthogonal iteration, an independent
    /// estimate of `sub_radius`.
    pub fn complement_radius(&self, s: &CMat) -> f64 {
        let complement = s * (CMat::identity(self.dim, self.dim) - &self.q);
        // Several eigenvalues can share the top modulus, so the block is
        // doubled until consecutive estimates agree.
        let mut block = 8.min(self.dim);
        let mut estimate = spectral_radius_subspace(&complement, block, 2000);
        while block < self.dim {
            block = (2 * block).min(self.dim);
            let next = spectral_radius_subspace(&complement, block, 2000);
            let settled = (next - estimate).abs() <= 1e-12 * next.max(1.0);
            estimate = next;
            if settled {
                break;
            }
        }
        estimate
    }
}

/// `lambda^n` for unimodular `lambda`, computed from the phase to avoid drift.
pub fn unimodular_power(lambda: C64, n: u64) -> C64 {
    let turns = lambda.arg() / (2.0 * PI);
    let t = (turns * n as f64).rem_euclid(1.0);
    C64::from_polar(1.0, 2.0 * PI * t)
}

/// `|lambda^n - 1|` for `lambda = e^{2 pi i turns}`.
fn return_distance(turns: f64, n: u64) -> f64 {
    let t = (turns * n as f64).rem_euclid(1.0);
    let dist = t.min(1.0 - t);
    2.0 * (PI * dist).sin()
}

/// Lazily enumerates `n = 1, 2, ...` up to `k_max` with `|lambda^n - 1| < epsilon`
/// for every given unimodular `lambda` simultaneously.
pub fn kuperberg_iter(eigenvalues: &[C64], epsilon: f64, k_max: u64) -> impl Iterator<Item = u64> {
    let turns: Vec<f64> = eigenvalues.iter().map(|z| z.arg() / (2.0 * PI)).collect();
    (1..=k_max).filter(move |&n| turns.iter().all(|&t| return_distance(t, n) < epsilon))
}

/// Exhaustive search for the simultaneous return times; empty when none
/// exists below `k_max`.
pub fn kuperberg_sequence(eigenvalues: &[C64], epsilon: f64, k_max: u64) -> Vec<u64> {
    kuperberg_iter(eigenvalues, epsilon, k_max).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerLimitPoint {
    pub n: u64,
    /// `||S^n - Q||_F`.
    pub raw_deviation: f64,
    /// `||S^n - A^n Q||_F`, with the residual peripheral phases removed.
    pub phase_adjusted_deviation: f64,
    /// `max |lambda^n - 1|` over the peripheral eigenvalues.
    pub phase_error: f64,
    /// `c r^n + phase_error * sum_c ||P_c||_F` plus a rounding allowance
    /// linear in `n`.
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerLimitReport {
    pub points: Vec<PowerLimitPoint>,
    pub deviation_at_largest: f64,
    /// Deviation from `Q` of the idempotent obtained by purifying `S^{n_last}`.
    pub refined_deviation: f64,
    pub purification_steps: usize,
    pub decay_constant: f64,
    pub rate: f64,
    pub within_bound: bool,
    pub pass: bool,
    #[serde(skip)]
    pub refined_limit: CMat,
}

/// Compares `S^{n_k}` with the spectral idempotent along `seq`. The last power
/// is then purified with `X -> 3X^2 - 2X^3`, which converges to the unique
/// idempotent polynomial in `S` nearest to it; that limit is the power route's
/// estimate of `Q`.
pub fn power_limit_check(s: &CMat, pd: &PeripheralDecomposition, seq: &[u64], tol: f64) -> Result<PowerLimitReport> {
    let last = *seq.last().ok_or_else(|| Error::InvalidInput("empty power sequence".into()))?;
    let n = s.nrows();
    let eye = CMat::identity(n, n);
    let complement = s * (&eye - &pd.q);
    let rate = (pd.sub_radius + 1e-6).min(1.0);
    let decay_constant = fitted_decay_constant(&complement, rate, 64);
    let proj_mass: f64 = pd.projections.iter().map(frobenius).sum();
    let values = pd.values();

    let mut points = Vec::with_capacity(seq.len());
    let mut last_power = eye.clone();
    for &k in seq {
        let sk = matrix_power(s, k);
        let phase_error = values.iter().map(|&v| (unimodular_power(v, k) - ONE).norm()).fold(0.0, f64::max);
        let raw_deviation = frobenius(&(&sk - &pd.q));
        let phase_adjusted_deviation = frobenius(&(&sk - pd.peripheral_power(k)));
        // Rounding moves the stored unimodular eigenvalues by O(eps), which
        // compounds linearly in k.
        let rounding = (1e-12 + k as f64 * f64::EPSILON * n as f64) * (1.0 + proj_mass);
        let bound = decay_constant * rate.powf(k as f64) + phase_error * proj_mass + rounding;
        points.push(PowerLimitPoint { n: k, raw_deviation, phase_adjusted_deviation, phase_error, bound });
        if k == last {
            last_power = sk;
        }
    }
    let (refined_limit, purification_steps) = purify_idempotent(&last_power);
    let refined_deviation = frobenius(&(&refined_limit - &pd.q));
    let within_bound = points.iter().all(|p| p.raw_deviation <= p.bound);
    let deviation_at_largest = points.last().map_or(0.0, |p| p.raw_deviation);
    Ok(PowerLimitReport {
        points,
        deviation_at_largest,
        refined_deviation,
        purification_steps,
        decay_constant,
        rate,
        within_bound,
        pass: within_bound && refined_deviation <= tol,
        refined_limit,
    })
}

/// `max_{1<=m<=window} ||R^m||_F / r^m`, the constant in `||R^m|| <= c r^m`
/// fitted on an initial window.
pub fn fitted_decay_constant(r_mat: &CMat, rate: f64, window: usize) -> f64 {
    let mut power = r_mat.clone();
    let mut best: f64 = 0.0;
    let mut rate_pow = rate;
    for _ in 1..=window {
        let norm = frobenius(&power);
        if rate_pow > 0.0 {
            best = best.max(norm / rate_pow);
        }
        power = &power * r_mat;
        rate_pow *= rate;
        if norm == 0.0 {
            break;
        }
    }
    best
}

/// Newton-Schulz style purification toward an idempotent.
pub fn purify_idempotent(x: &CMat) -> (CMat, usize) {
    let mut cur = x.clone();
    for step in 0..200 {
        let sq = &cur * &cur;
        let residual = frobenius(&(&sq - &cur));
        if residual <= 1e-15 * frobenius(&cur).max(1.0) {
            return (cur, step);
        }
        let cube = &sq * &cur;
        let next = sq * c(3.0, 0.0) - cube * c(2.0, 0.0);
        if frobenius(&(&next - &cur)) == 0.0 {
            return (next, step + 1);
        }
        cur = next;
    }
    (cur, 200)
}
