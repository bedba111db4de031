use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::subsystem::OperatorSubsystem;
use super::AsymptoticLift;
use crate::channel::{Channel, Superoperator};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::linalg::{inverse, min_hermitian_eigenvalue, min_singular_value};
use crate::operator::{c, identity, nuclear_norm, spectral_norm, trace_pair, vec_of, CMat, CVec, Functional};
use crate::sampling::{functional_batch, SampleRng};
use crate::spectral::{eigendecompose, peripheral};

type MatrixMap<'a> = dyn Fn(&CMat) -> CMat + 'a;

/// Constant in front of `sub_radius^k` in the allowed gap.
const GAP_CONSTANT: f64 = 10.0;
/// Gaps below this are treated as converged when fitting the rate.
const RATE_FLOOR: f64 = 1e-11;

#[derive(Debug, Clone, Serialize)]
pub struct LevelReport {
    pub level: usize,
    pub samples: usize,
    pub k_max: usize,
    /// Largest `| ||rho o L^k_max|| - ||rho o E|| |` over the samples.
    pub max_gap: f64,
    pub allowed: f64,
    pub sub_radius: f64,
    /// Largest gap at each `k`, over the samples.
    pub max_gap_curve: Vec<f64>,
    /// Geometric rate fitted to `max_gap_curve`, when enough points lie above
    /// the floating point floor.
    pub empirical_rate: Option<f64>,
    /// Steps where `||rho o L^{k+1}|| > ||rho o L^k|| + 1e-10`.
    pub monotone_violations: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticEqualityReport {
    pub levels: Vec<LevelReport>,
    pub pass: bool,
}

/// Compares `||rho o L^k||` at `k = k_max` with `||rho o E||` for sampled
/// functionals on `M_n ⊗ M_d` at each requested level `n`.
pub fn verify_asymptotic_equalities(
    ch: &Channel,
    lift: &AsymptoticLift,
    levels: &[usize],
    cfg: &Config,
    rng: &mut SampleRng,
) -> Result<AsymptoticEqualityReport> {
    let r = lift.peripheral.sub_radius;
    let allowed = cfg.tol_alg + GAP_CONSTANT * r.powi(cfg.k_max as i32);
    let mut out = Vec::new();
    for &n in levels {
        let amplified = ch.amplify(n, cfg)?;
        let p = amplified.predual();
        let q = lift.q_superoperator().amplify(n).predual();
        let nd = n * ch.dim();
        let mut curve = vec![0.0f64; cfg.k_max + 1];
        let mut violations = 0;
        for f in functional_batch(rng, nd, cfg.samples) {
            let target = nuclear_norm(&q.apply_unchecked(f.pairing_matrix()));
            let mut g = f.into_pairing_matrix();
            let mut prev = f64::INFINITY;
            for slot in curve.iter_mut() {
                let t = nuclear_norm(&g);
                if t > prev + 1e-10 {
                    violations += 1;
                }
                prev = t;
                *slot = slot.max((t - target).abs());
                g = p.apply_unchecked(&g);
            }
        }
        let max_gap = curve[cfg.k_max];
        out.push(LevelReport {
            level: n,
            samples: cfg.samples,
            k_max: cfg.k_max,
            max_gap,
            allowed,
            sub_radius: r,
            empirical_rate: fitted_rate(&curve),
            max_gap_curve: curve,
            monotone_violations: violations,
            pass: max_gap <= allowed && violations == 0,
        });
    }
    let pass = out.iter().all(|l| l.pass);
    Ok(AsymptoticEqualityReport { levels: out, pass })
}

/// Least-squares slope of `ln g_k` over the points above [`RATE_FLOOR`].
fn fitted_rate(curve: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        curve.iter().enumerate().skip(1).filter(|(_, g)| **g > RATE_FLOOR).map(|(k, g)| (k as f64, g.ln())).collect();
    if pts.len() < 5 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some((sxy / sxx).exp())
}

/// A proposed reversible lift: a unital `*`-closed subspace `N` of `M_m`
/// given by a basis, the matrix of `alpha` in that basis, and the images
/// `E(b_i)` in `M_d`.
#[derive(Debug, Clone)]
pub struct ReversibleLiftCandidate {
    pub basis: Vec<CMat>,
    pub alpha: CMat,
    pub e: Vec<CMat>,
}

impl ReversibleLiftCandidate {
    pub fn new(basis: Vec<CMat>, alpha: CMat, e: Vec<CMat>) -> Result<Self> {
        let k = basis.len();
        if k == 0 {
            return Err(Error::InvalidInput("candidate basis is empty".into()));
        }
        let m = basis[0].nrows();
        if basis.iter().any(|b| b.nrows() != m || b.ncols() != m) {
            return Err(Error::Dimension("candidate basis elements must share one square shape".into()));
        }
        if alpha.nrows() != k || alpha.ncols() != k {
            return Err(Error::Dimension(format!("alpha must be {k}x{k}")));
        }
        if e.len() != k {
            return Err(Error::Dimension(format!("expected {k} images under E, got {}", e.len())));
        }
        let d = e[0].nrows();
        if e.iter().any(|x| x.nrows() != d || x.ncols() != d) {
            return Err(Error::Dimension("images under E must share one square shape".into()));
        }
        Ok(Self { basis, alpha, e })
    }

    /// The built lift seen as a concrete candidate inside `M_d`.
    pub fn from_lift(lift: &AsymptoticLift) -> Self {
        Self { basis: lift.basis().to_vec(), alpha: lift.alpha.clone(), e: lift.basis().to_vec() }
    }

    /// `(C, id, iota)` with `iota(1) = 1_d`.
    pub fn trivial(d: usize) -> Self {
        Self { basis: vec![identity(1)], alpha: identity(1), e: vec![identity(d)] }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn container_dim(&self) -> usize {
        self.basis[0].nrows()
    }

    pub fn target_dim(&self) -> usize {
        self.e[0].nrows()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityCheck {
    pub map: &'static str,
    pub level: usize,
    /// Smallest eigenvalue of an image of a sampled positive element.
    pub min_eigenvalue: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityEntry {
    /// Lower bound on `||rho o E||` from an explicit unit-ball element of `N`.
    pub lower: f64,
    /// Upper bound on `||rho o E||` from a representing matrix in `N`.
    pub upper: f64,
    /// `lim_k ||rho o L^k||`.
    pub limit: f64,
    /// `lower <= limit + tol`; a violation here is certain.
    pub holds: bool,
    /// `upper <= limit + tol`; the inequality is proved for this functional.
    pub certified: bool,
    pub equality: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReversibleLiftReport {
    pub dim_n: usize,
    pub container_dim: usize,
    pub alpha_unit_residual: f64,
    pub alpha_inverse_unit_residual: f64,
    pub e_unit_residual: f64,
    pub positivity: Vec<PositivityCheck>,
    pub alpha_min_singular: f64,
    pub equivariance_residual: f64,
    pub nondegeneracy_min_singular: f64,
    /// `N` is a `*`-subalgebra of its container, so `lower == upper`.
    pub norm_exact: bool,
    pub functionals: Vec<InequalityEntry>,
    /// Largest `lower - limit`.
    pub max_excess: f64,
    pub structural_pass: bool,
    pub inequality_holds: bool,
    pub inequality_certified: bool,
    pub pass: bool,
}

/// Checks that a candidate is a reversible lift of `ch` (unital, positive at
/// matrix levels one and two, equivariant and nondegenerate) and that
/// `||rho o E|| <= lim ||rho o L^k||` for the given and sampled functionals.
pub fn verify_reversible_lift(
    cand: &ReversibleLiftCandidate,
    ch: &Channel,
    functionals: &[Functional],
    cfg: &Config,
    rng: &mut SampleRng,
) -> Result<ReversibleLiftReport> {
    let d = ch.dim();
    if cand.target_dim() != d {
        return Err(Error::Dimension(format!("E maps into M_{} but the channel acts on M_{d}", cand.target_dim())));
    }
    if functionals.iter().any(|f| f.dim() != d) {
        return Err(Error::Dimension(format!("functionals must act on M_{d}")));
    }
    ch.require_ucp(cfg)?;
    let k = cand.dim();
    let m = cand.container_dim();

    let mut span = CMat::zeros(m * m, k);
    for (j, b) in cand.basis.iter().enumerate() {
        span.set_column(j, &vec_of(b));
    }
    if min_singular_value(&span) <= 1e-10 {
        return Err(Error::InvalidInput("candidate basis is linearly dependent".into()));
    }
    let herm = OperatorSubsystem::from_vectors(&span, m, cfg.tol_span)?;
    let span_pinv = span.clone().pseudo_inverse(1e-12).map_err(|e| Error::Numerical(e.to_string()))?;
    let alpha_inv = inverse(&cand.alpha)?;

    let to_coords = |x: &CMat| -> CVec { &span_pinv * vec_of(x) };
    let assemble_n = |a: &CVec| cand.basis.iter().zip(a.iter()).fold(CMat::zeros(m, m), |acc, (b, z)| acc + b * *z);
    let assemble_e = |a: &CVec| cand.e.iter().zip(a.iter()).fold(CMat::zeros(d, d), |acc, (b, z)| acc + b * *z);
    let apply_alpha = |x: &CMat| assemble_n(&(&cand.alpha * to_coords(x)));
    let apply_alpha_inv = |x: &CMat| assemble_n(&(&alpha_inv * to_coords(x)));
    let apply_e = |x: &CMat| assemble_e(&to_coords(x));

    let one = identity(m);
    let alpha_unit_residual = (apply_alpha(&one) - &one).norm();
    let alpha_inverse_unit_residual = (apply_alpha_inv(&one) - &one).norm();
    let e_unit_residual = (apply_e(&one) - identity(d)).norm();

    let mut positivity = Vec::new();
    let maps: [(&'static str, &MatrixMap); 3] =
        [("alpha", &apply_alpha), ("alpha_inverse", &apply_alpha_inv), ("e", &apply_e)];
    for (name, map) in maps {
        for level in [1usize, 2] {
            let mut worst = f64::INFINITY;
            for _ in 0..cfg.samples.max(1) {
                let x = random_positive(&herm, level, rng);
                let scale = spectral_norm(&x).max(1.0);
                let y = blockwise(&x, m, level, map);
                worst = worst.min(min_hermitian_eigenvalue(&y) / scale);
            }
            positivity.push(PositivityCheck { map: name, level, min_eigenvalue: worst, pass: worst >= -cfg.tol_psd });
        }
    }

    let alpha_min_singular = min_singular_value(&cand.alpha);
    let mut equivariance_residual: f64 = 0.0;
    for i in 0..k {
        let lhs = assemble_e(&cand.alpha.column(i).into_owned());
        let rhs = ch.apply(&cand.e[i])?;
        equivariance_residual = equivariance_residual.max((lhs - rhs).norm());
    }
    let mut e_mat = CMat::zeros(d * d, k);
    for (j, x) in cand.e.iter().enumerate() {
        e_mat.set_column(j, &vec_of(x));
    }
    let mut stacked = CMat::zeros(d * d * (k + 1), k);
    let mut power = CMat::identity(k, k);
    for n in 0..=k {
        stacked.view_mut((n * d * d, 0), (d * d, k)).copy_from(&(&e_mat * &power));
        power = &alpha_inv * power;
    }
    let nondegeneracy_min_singular = min_singular_value(&stacked);

    let mut closure: f64 = 0.0;
    for a in herm.basis() {
        for b in herm.basis() {
            closure = closure.max(herm.coords(&(a * b)).1);
        }
    }
    let norm_exact = closure <= cfg.tol_span;

    let spec = eigendecompose(ch.superoperator(), cfg)?;
    let q = Superoperator::from_matrix(d, peripheral(&spec, cfg.tol_per)?.q)?.predual();
    let mut all = functionals.to_vec();
    all.extend(functional_batch(rng, d, cfg.samples));
    let mut entries = Vec::with_capacity(all.len());
    for f in &all {
        let limit = nuclear_norm(&q.apply_unchecked(f.pairing_matrix()));
        let phi: Vec<_> = cand.e.iter().map(|x| trace_pair(f.pairing_matrix(), x)).collect();
        // Representing matrix G in N: tr(G h_j) = phi(h_j) for the Hermitian basis.
        let g = herm.basis().iter().fold(CMat::zeros(m, m), |acc, h| {
            let value: crate::operator::C64 = to_coords(h).iter().zip(&phi).map(|(t, p)| t * p).sum();
            acc + h * value
        });
        let upper = nuclear_norm(&g);
        let lower = polar_lower_bound(&g, &herm, rng);
        let tol = cfg.tol_alg;
        entries.push(InequalityEntry {
            lower,
            upper,
            limit,
            holds: lower <= limit + tol,
            certified: upper <= limit + tol,
            equality: (upper - limit).abs() <= tol && (lower - limit).abs() <= tol,
        });
    }
    let max_excess = entries.iter().map(|e| e.lower - e.limit).fold(f64::NEG_INFINITY, f64::max);
    let structural_pass = alpha_unit_residual <= cfg.tol_alg
        && alpha_inverse_unit_residual <= cfg.tol_alg
        && e_unit_residual <= cfg.tol_alg
        && positivity.iter().all(|p| p.pass)
        && alpha_min_singular > cfg.tol_alg
        && equivariance_residual <= cfg.tol_alg
        && nondegeneracy_min_singular > cfg.tol_alg;
    let inequality_holds = entries.iter().all(|e| e.holds);
    let inequality_certified = entries.iter().all(|e| e.certified);
    Ok(ReversibleLiftReport {
        dim_n: k,
        container_dim: m,
        alpha_unit_residual,
        alpha_inverse_unit_residual,
        e_unit_residual,
        positivity,
        alpha_min_singular,
        equivariance_residual,
        nondegeneracy_min_singular,
        norm_exact,
        functionals: entries,
        max_excess,
        structural_pass,
        inequality_holds,
        inequality_certified,
        pass: structural_pass && inequality_holds,
    })
}

/// Positive element of `M_level(N)`: a random self-adjoint block matrix with
/// entries in `N`, shifted by its smallest eigenvalue.
fn random_positive(herm: &OperatorSubsystem, level: usize, rng: &mut SampleRng) -> CMat {
    let m = herm.ambient_dim();
    let k = herm.dim();
    let real = |rng: &mut SampleRng| CVec::from_fn(k, |_, _| c(rng.sample(StandardNormal), 0.0));
    let complex = |rng: &mut SampleRng| CVec::from_fn(k, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let mut x = CMat::zeros(level * m, level * m);
    for a in 0..level {
        x.view_mut((a * m, a * m), (m, m)).copy_from(&herm.assemble(&real(rng)));
        for b in a + 1..level {
            let y = herm.assemble(&complex(rng));
            x.view_mut((b * m, a * m), (m, m)).copy_from(&y.adjoint());
            x.view_mut((a * m, b * m), (m, m)).copy_from(&y);
        }
    }
    let shift = min_hermitian_eigenvalue(&x);
    x - CMat::identity(level * m, level * m) * c(shift, 0.0)
}

/// Applies `map` to each `m x m` block of a `level x level` block matrix.
fn blockwise(x: &CMat, m: usize, level: usize, map: &dyn Fn(&CMat) -> CMat) -> CMat {
    let blocks: Vec<Vec<CMat>> = (0..level)
        .map(|a| (0..level).map(|b| map(&x.view((a * m, b * m), (m, m)).into_owned())).collect())
        .collect();
    let out_dim = blocks[0][0].nrows();
    let mut out = CMat::zeros(level * out_dim, level * out_dim);
    for (a, row) in blocks.iter().enumerate() {
        for (b, blk) in row.iter().enumerate() {
            out.view_mut((a * out_dim, b * out_dim), (out_dim, out_dim)).copy_from(blk);
        }
    }
    out
}

/// `sup_{y in ball N} |tr(G y)|` from below: the Hilbert-Schmidt projection of
/// the polar maximizer onto `N`, rescaled into the ball, and a few random
/// unit-ball elements of `N`.
fn polar_lower_bound(g: &CMat, herm: &OperatorSubsystem, rng: &mut SampleRng) -> f64 {
    let svd = g.clone().svd(true, true);
    let (u, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let polar = v_t.adjoint() * u.adjoint();
    let (coords, _) = herm.coords(&polar);
    let y = herm.assemble(&coords);
    let mut best = trace_pair(g, &y).norm() / spectral_norm(&y).max(1.0);
    for _ in 0..8 {
        let a = CVec::from_fn(herm.dim(), |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let y = herm.assemble(&a);
        let n = spectral_norm(&y);
        if n > 0.0 {
            best = best.max(trace_pair(g, &y).norm() / n);
        }
    }
    best
}
