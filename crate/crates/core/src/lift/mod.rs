//! The asymptotic lift `(N, alpha, E)` of a UCP map and its checks.
//!
//! `N` is the peripheral space `Q(M_d)` with the Choi-Effros product, `E` is
//! the inclusion and `alpha` is the restriction of `L`, which is a
//! `*`-automorphism of `N` satisfying `L o E = E o alpha`.

mod algebra;
mod poisson;
mod subsystem;
mod verify;
mod wedderburn;

pub use algebra::{choi_effros, AxiomResiduals, ChoiEffrosAlgebra};
pub use poisson::{poisson_boundary, PoissonReport};
pub use subsystem::OperatorSubsystem;
pub use verify::{
    verify_asymptotic_equalities, verify_reversible_lift, AsymptoticEqualityReport, InequalityEntry, LevelReport,
    PositivityCheck, ReversibleLiftCandidate, ReversibleLiftReport,
};
pub use wedderburn::{wedderburn, WedderburnReport};

use serde::Serialize;

use crate::channel::{Channel, Superoperator};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::linalg::{inverse, matrix_power, min_singular_value};
use crate::operator::{c, max_abs, trace_norm, CMat, CVec, Functional};
use crate::sampling::rng_from_seed;
use crate::spectral::{eigendecompose, peripheral, PeripheralDecomposition};

/// Beyond this dimension multiplicativity of `alpha` is checked on samples.
const FULL_AUTOMORPHISM_MAX_DIM: usize = 20;
const SAMPLED_PAIRS: usize = 200;
const ISOMETRY_SAMPLES: usize = 32;

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct LiftResiduals {
    /// `max_j ||L(b_j) - E(alpha(b_j))||_F`.
    pub equivariance: f64,
    /// `alpha(x o y) - alpha(x) o alpha(y)`.
    pub automorphism: f64,
    /// Largest imaginary part of `alpha` in the self-adjoint basis.
    pub star_preservation: f64,
    pub unit_preservation: f64,
    pub alpha_min_singular: f64,
    pub isometry: f64,
    /// Smallest singular value of `[E alpha^{-n}]_{0 <= n <= dim N}`.
    pub nondegeneracy_min_singular: f64,
}

#[derive(Debug, Clone)]
pub struct AsymptoticLift {
    pub algebra: ChoiEffrosAlgebra,
    /// Matrix of `alpha` in the basis of `algebra`.
    pub alpha: CMat,
    alpha_inverse: CMat,
    pub peripheral: PeripheralDecomposition,
    pub residuals: LiftResiduals,
}

/// Builds `(N, alpha, E, Q)` for a UCP channel and checks the lift invariants.
pub fn build_lift(ch: &Channel, cfg: &Config) -> Result<AsymptoticLift> {
    ch.require_ucp(cfg)?;
    let spec = eigendecompose(ch.superoperator(), cfg)?;
    let pd = peripheral(&spec, cfg.tol_per)?;
    lift_from_peripheral(ch, pd, cfg)
}

/// Same as [`build_lift`] once the peripheral decomposition is known.
pub fn lift_from_peripheral(ch: &Channel, pd: PeripheralDecomposition, cfg: &Config) -> Result<AsymptoticLift> {
    let ns = OperatorSubsystem::from_vectors(&pd.right, ch.dim(), cfg.tol_span)?;
    lift_from_subsystem(ch, ns, pd, cfg)
}

/// Builds the lift on an explicitly given basis of the peripheral space.
pub fn lift_from_subsystem(
    ch: &Channel,
    ns: OperatorSubsystem,
    pd: PeripheralDecomposition,
    cfg: &Config,
) -> Result<AsymptoticLift> {
    if ns.dim() != pd.peripheral_count() {
        return Err(Error::Inconsistent(format!(
            "peripheral space has dimension {} but {} peripheral eigenvalues were counted",
            ns.dim(),
            pd.peripheral_count()
        )));
    }
    let mut rng = rng_from_seed(cfg.seed);
    let algebra = choi_effros(ns, &pd.q, cfg.tol_alg, cfg.tol_span, &mut rng)?;
    let m = algebra.dim();

    let mut alpha = CMat::zeros(m, m);
    let mut equivariance: f64 = 0.0;
    for (j, b) in algebra.system().basis().iter().enumerate() {
        let (coords, r) = algebra.system().coords(&ch.apply(b)?);
        equivariance = equivariance.max(r);
        alpha.set_column(j, &coords);
    }
    let alpha_min_singular = min_singular_value(&alpha);
    let alpha_inverse = inverse(&alpha)?;
    let mut lift = AsymptoticLift {
        algebra,
        alpha,
        alpha_inverse,
        peripheral: pd,
        residuals: LiftResiduals { equivariance, alpha_min_singular, ..Default::default() },
    };
    lift.residuals = lift.check_invariants(&mut rng);

    let r = lift.residuals;
    for (name, value) in [
        ("equivariance", r.equivariance),
        ("automorphism", r.automorphism),
        ("star preservation", r.star_preservation),
        ("unit preservation", r.unit_preservation),
        ("isometry", r.isometry),
    ] {
        if value > cfg.tol_alg {
            return Err(Error::Inconsistent(format!("lift invariant '{name}' fails with residual {value:e}")));
        }
    }
    if r.alpha_min_singular <= cfg.tol_alg || r.nondegeneracy_min_singular <= cfg.tol_alg {
        return Err(Error::Inconsistent("alpha is not invertible or E is degenerate".into()));
    }
    Ok(lift)
}

impl AsymptoticLift {
    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.algebra.system().ambient_dim()
    }

    pub fn basis(&self) -> &[CMat] {
        self.algebra.system().basis()
    }

    /// The inclusion `E: N -> M_d`.
    pub fn e(&self, y: &CVec) -> CMat {
        self.algebra.system().assemble(y)
    }

    pub fn alpha_apply(&self, y: &CVec) -> CVec {
        &self.alpha * y
    }

    pub fn alpha_inverse(&self) -> &CMat {
        &self.alpha_inverse
    }

    /// `alpha^n` for any integer `n`.
    pub fn alpha_power(&self, n: i64) -> CMat {
        if n >= 0 {
            matrix_power(&self.alpha, n as u64)
        } else {
            matrix_power(&self.alpha_inverse, n.unsigned_abs())
        }
    }

    pub fn q_superoperator(&self) -> Superoperator {
        Superoperator::from_matrix(self.ambient_dim(), self.peripheral.q.clone()).expect("Q has the channel's shape")
    }

    /// `||rho o E||` computed as the trace norm of `rho o Q` on `M_n ⊗ M_d`.
    pub fn functional_norm(&self, f: &Functional) -> Result<f64> {
        let n = f.dim() / self.ambient_dim();
        let q = self.q_superoperator().amplify(n).predual();
        Ok(trace_norm(&Functional::new(q.apply(f.pairing_matrix())?)?))
    }

    /// Largest entry of `alpha - 1`.
    pub fn alpha_deviation(&self) -> f64 {
        max_abs(&(&self.alpha - CMat::identity(self.dim(), self.dim())))
    }

    fn check_invariants<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> LiftResiduals {
        let m = self.dim();
        let alg = &self.algebra;
        let mut r = self.residuals;

        r.star_preservation = self.alpha.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        r.unit_preservation = max_abs(&(self.alpha_apply(alg.unit()) - alg.unit()));

        let column = |i: usize| self.alpha.column(i).into_owned();
        let pair = |i: usize, j: usize| -> f64 {
            let mut ei = CVec::zeros(m);
            ei[i] = c(1.0, 0.0);
            let mut ej = CVec::zeros(m);
            ej[j] = c(1.0, 0.0);
            let lhs = self.alpha_apply(&alg.product(&ei, &ej));
            let rhs = alg.product(&column(i), &column(j));
            max_abs(&(lhs - rhs))
        };
        r.automorphism = 0.0;
        if m <= FULL_AUTOMORPHISM_MAX_DIM {
            for i in 0..m {
                for j in 0..m {
                    r.automorphism = r.automorphism.max(pair(i, j));
                }
            }
        } else {
            for _ in 0..SAMPLED_PAIRS {
                let (i, j) = (rng.random_range(0..m), rng.random_range(0..m));
                r.automorphism = r.automorphism.max(pair(i, j));
            }
        }

        r.isometry = 0.0;
        for _ in 0..ISOMETRY_SAMPLES {
            let y = alg.random_unit_element(rng);
            r.isometry = r.isometry.max((alg.norm(&self.alpha_apply(&y)) - 1.0).abs());
        }

        let b = alg.system().basis_matrix();
        let d2 = b.nrows();
        let mut stacked = CMat::zeros(d2 * (m + 1), m);
        let mut power = CMat::identity(m, m);
        for n in 0..=m {
            stacked.view_mut((n * d2, 0), (d2, m)).copy_from(&(&b * &power));
            power = &self.alpha_inverse * power;
        }
        r.nondegeneracy_min_singular = min_singular_value(&stacked);
        r
    }
}

/// The inverse sequence `x_n = E(alpha^{-n} a)` for `n` in `[from, to]`.
/// It satisfies `x_n = L(x_{n+1})` and `||x_n|| = ||E(a)||`.
pub fn inverse_sequence(lift: &AsymptoticLift, a: &CVec, from: i64, to: i64) -> Vec<(i64, CMat)> {
    let start = lift.alpha_power(-from) * a;
    let mut out = Vec::new();
    let mut y = start;
    for n in from..=to {
        out.push((n, lift.e(&y)));
        y = lift.alpha_inverse() * y;
    }
    out
}

/// Coordinate map `theta` from `a` to `b` with `E_b o theta = E_a`, and the
/// largest of its residuals as an algebra isomorphism intertwining the alphas.
pub fn lift_isomorphism(a: &AsymptoticLift, b: &AsymptoticLift) -> Result<(CMat, f64)> {
    if a.dim() != b.dim() || a.ambient_dim() != b.ambient_dim() {
        return Err(Error::Dimension("lifts have different shapes".into()));
    }
    let m = a.dim();
    let mut theta = CMat::zeros(m, m);
    let mut residual: f64 = 0.0;
    for (j, x) in a.basis().iter().enumerate() {
        let (coords, r) = b.algebra.system().coords(x);
        residual = residual.max(r);
        theta.set_column(j, &coords);
    }
    for i in 0..m {
        for j in 0..m {
            let mut ei = CVec::zeros(m);
            ei[i] = c(1.0, 0.0);
            let mut ej = CVec::zeros(m);
            ej[j] = c(1.0, 0.0);
            let lhs = &theta * a.algebra.product(&ei, &ej);
            let rhs = b.algebra.product(&(&theta * &ei), &(&theta * &ej));
            residual = residual.max(max_abs(&(lhs - rhs)));
        }
    }
    residual = residual.max(max_abs(&(&theta * &a.alpha - &b.alpha * &theta)));
    let unit_gap = max_abs(&(&theta * a.algebra.unit() - b.algebra.unit()));
    residual = residual.max(unit_gap);
    Ok((theta, residual))
}
