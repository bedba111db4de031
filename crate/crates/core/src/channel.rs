//! Unital completely positive maps on `M_d`: Kraus, Choi and superoperator
//! representations, validation, powers, amplification and the predual map.

use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, matrix_power, min_hermitian_eigenvalue};
use crate::operator::{
    c, ensure_square, identity, max_abs, spectral_norm, unvec, vec_index, vec_of, CMat, Functional, Operator,
    SystemDescriptor, ZERO,
};
use crate::stochastic::StochasticMatrix;

/// Eigenvalue cutoff used when extracting Kraus operators from a Choi matrix.
pub const KRAUS_CUTOFF: f64 = 1e-10;

/// Matrix `S` of a linear map on `M_d` with `S vec(x) = vec(L(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMat,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, matrix: CMat) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::Dimension(format!(
                "superoperator for d={dim} must be {0}x{0}, got {1}x{2}",
                dim * dim,
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: identity(dim * dim) }
    }

    /// Assembles the matrix of a linear map column by column from its action
    /// on matrix units.
    pub fn from_fn(dim: usize, f: impl Fn(&CMat) -> CMat) -> Self {
        let mut matrix = CMat::zeros(dim * dim, dim * dim);
        for j in 0..dim {
            for i in 0..dim {
                let mut unit = CMat::zeros(dim, dim);
                unit[(i, j)] = c(1.0, 0.0);
                let image = f(&unit);
                matrix.set_column(vec_index(i, j, dim), &vec_of(&image));
            }
        }
        Self { dim, matrix }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        let d = ensure_square(x, "operator")?;
        if d != self.dim {
            return Err(Error::Dimension(format!("operator of dim {d} given to a map on M_{}", self.dim)));
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &CMat) -> CMat {
        unvec(&(&self.matrix * vec_of(x)), self.dim)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Superoperator) -> Result<Superoperator> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!("cannot compose maps on M_{} and M_{}", self.dim, other.dim)));
        }
        Ok(Self { dim: self.dim, matrix: &self.matrix * &other.matrix })
    }

    pub fn power(&self, k: u64) -> Superoperator {
        Self { dim: self.dim, matrix: matrix_power(&self.matrix, k) }
    }

    /// The map `F -> F'` on pairing matrices with `tr(F' x) = tr(F L(x))`.
    pub fn predual(&self) -> Superoperator {
        let d = self.dim;
        let mut out = CMat::zeros(d * d, d * d);
        for a in 0..d {
            for b in 0..d {
                for p in 0..d {
                    for q in 0..d {
                        out[(vec_index(b, a, d), vec_index(p, q, d))] = self.matrix[(vec_index(q, p, d), vec_index(a, b, d))];
                    }
                }
            }
        }
        Self { dim: d, matrix: out }
    }

    /// `id_n ⊗ L` on `M_n ⊗ M_d`, acting blockwise on `d x d` blocks.
    pub fn amplify(&self, n: usize) -> Superoperator {
        let d = self.dim;
        let nd = n * d;
        let mut out = CMat::zeros(nd * nd, nd * nd);
        for a in 0..n {
            for b in 0..n {
                for i in 0..d {
                    for j in 0..d {
                        let col = vec_index(a * d + i, b * d + j, nd);
                        for p in 0..d {
                            for q in 0..d {
                                let v = self.matrix[(vec_index(p, q, d), vec_index(i, j, d))];
                                if v != ZERO {
                                    out[(vec_index(a * d + p, b * d + q, nd), col)] = v;
                                }
                            }
                        }
                    }
                }
            }
        }
        Self { dim: nd, matrix: out }
    }

    /// `C = sum_ij E_ij ⊗ L(E_ij)`.
    pub fn choi(&self) -> ChoiMatrix {
        let d = self.dim;
        let matrix = CMat::from_fn(d * d, d * d, |r, s| {
            let (i, a) = (r / d, r % d);
            let (j, b) = (s / d, s % d);
            self.matrix[(vec_index(a, b, d), vec_index(i, j, d))]
        });
        ChoiMatrix { dim: d, matrix }
    }

    /// Max-entry residual of `L(x*) = L(x)*`, i.e. of `S T = T conj(S)`
    /// where `T` is the transpose permutation on vectorized operators.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        let lhs = self.matrix[(vec_index(a, b, d), vec_index(j, i, d))];
                        let rhs = self.matrix[(vec_index(b, a, d), vec_index(i, j, d))].conj();
                        worst = worst.max((lhs - rhs).norm());
                    }
                }
            }
        }
        worst
    }

    pub fn unital_residual(&self) -> f64 {
        spectral_norm(&(self.apply_unchecked(&identity(self.dim)) - identity(self.dim)))
    }
}

/// A list of Kraus operators `{K_i}` representing `x -> sum_i K_i x K_i*`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    dim: usize,
    operators: Vec<CMat>,
}

impl KrausSet {
    pub fn new(operators: Vec<CMat>) -> Result<Self> {
        let first = operators.first().ok_or_else(|| Error::InvalidInput("empty Kraus list".into()))?;
        let dim = ensure_square(first, "Kraus operator")?;
        for (k, op) in operators.iter().enumerate() {
            let dk = ensure_square(op, "Kraus operator")?;
            if dk != dim {
                return Err(Error::Dimension(format!("Kraus operator {k} has dim {dk}, expected {dim}")));
            }
        }
        Ok(Self { dim, operators })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[CMat] {
        &self.operators
    }

    /// `vec(K x K*) = (conj(K) ⊗ K) vec(x)` under column stacking.
    pub fn to_superoperator(&self) -> Superoperator {
        let mut matrix = CMat::zeros(self.dim * self.dim, self.dim * self.dim);
        for k in &self.operators {
            matrix += k.map(|z| z.conj()).kronecker(k);
        }
        Superoperator { dim: self.dim, matrix }
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        self.operators.iter().map(|k| k * x * k.adjoint()).fold(CMat::zeros(self.dim, self.dim), |acc, t| acc + t)
    }
}

/// Choi matrix `C = sum_ij E_ij ⊗ L(E_ij)`, a `d^2 x d^2` matrix whose
/// `(i, j)` block is `L(E_ij)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: CMat,
}

impl ChoiMatrix {
    pub fn new(dim: usize, matrix: CMat) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::Dimension(format!("Choi matrix for d={dim} must be {0}x{0}", dim * dim)));
        }
        Ok(Self { dim, matrix })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn hermitian_residual(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_hermitian_eigenvalue(&self.matrix)
    }

    pub fn to_superoperator(&self) -> Superoperator {
        let d = self.dim;
        let matrix = CMat::from_fn(d * d, d * d, |r, s| {
            let (a, b) = (r % d, r / d);
            let (i, j) = (s % d, s / d);
            self.matrix[(i * d + a, j * d + b)]
        });
        Superoperator { dim: d, matrix }
    }

    /// Kraus operators from the eigendecomposition of `C`, ordered by
    /// descending eigenvalue; eigenvalues at or below `cutoff` are dropped.
    pub fn to_kraus(&self, cutoff: f64) -> Result<KrausSet> {
        let d = self.dim;
        let (values, vectors) = hermitian_eigen(&self.matrix);
        if let Some(&lo) = values.first() {
            if lo < -cutoff.max(1e-9) {
                return Err(Error::Validation(format!("Choi matrix has negative eigenvalue {lo:e}")));
            }
        }
        let mut ops = Vec::new();
        for k in (0..values.len()).rev() {
            if values[k] <= cutoff {
                continue;
            }
            let s = values[k].sqrt();
            ops.push(CMat::from_fn(d, d, |a, i| vectors[(i * d + a, k)] * s));
        }
        if ops.is_empty() {
            ops.push(CMat::zeros(d, d));
        }
        KrausSet::new(ops)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ValidationFlags {
    pub cp: bool,
    pub unital: bool,
}

/// A linear map on `M_d` together with its validation status.
#[derive(Debug, Clone)]
pub struct Channel {
    system: SystemDescriptor,
    superop: Superoperator,
    kraus: Option<KrausSet>,
    flags: ValidationFlags,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub dim: usize,
    pub choi_min_eigenvalue: f64,
    pub choi_hermitian_residual: f64,
    pub cp: bool,
    pub unital_residual: f64,
    pub unital: bool,
    pub hermiticity_residual: f64,
    pub hermiticity_preserving: bool,
    pub tol_psd: f64,
    pub tol_herm: f64,
}

impl ValidationReport {
    pub fn is_ucp(&self) -> bool {
        self.cp && self.unital && self.hermiticity_preserving
    }
}

impl Channel {
    pub fn from_kraus(ks: KrausSet, cfg: &Config) -> Self {
        let superop = ks.to_superoperator();
        let unital = superop.unital_residual() <= cfg.tol_herm;
        Self {
            system: SystemDescriptor::full(ks.dim()),
            superop,
            kraus: Some(ks),
            flags: ValidationFlags { cp: true, unital },
        }
    }

    /// Wraps a superoperator; complete positivity is read off its Choi matrix.
    pub fn from_superoperator(superop: Superoperator, cfg: &Config) -> Self {
        let choi = superop.choi();
        let cp = choi.hermitian_residual() <= cfg.tol_herm && choi.min_eigenvalue() >= -cfg.tol_psd;
        let unital = superop.unital_residual() <= cfg.tol_herm;
        Self { system: SystemDescriptor::full(superop.dim()), superop, kraus: None, flags: ValidationFlags { cp, unital } }
    }

    pub fn from_choi(choi: ChoiMatrix, cfg: &Config) -> Self {
        Self::from_superoperator(choi.to_superoperator(), cfg)
    }

    /// The Markov operator of `P` realized on `M_n` as pinch-then-act:
    /// `L(x) = diag(P diagvec(x))`.
    pub fn from_stochastic(p: &StochasticMatrix) -> Self {
        let n = p.n();
        let mut matrix = CMat::zeros(n * n, n * n);
        let mut kraus = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let pij = p.get(i, j);
                if pij > 0.0 {
                    matrix[(vec_index(i, i, n), vec_index(j, j, n))] = c(pij, 0.0);
                    let mut k = CMat::zeros(n, n);
                    k[(i, j)] = c(pij.sqrt(), 0.0);
                    kraus.push(k);
                }
            }
        }
        Self {
            system: SystemDescriptor::commutative(n),
            superop: Superoperator { dim: n, matrix },
            kraus: KrausSet::new(kraus).ok(),
            flags: ValidationFlags { cp: true, unital: true },
        }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            system: SystemDescriptor::full(d),
            superop: Superoperator::identity(d),
            kraus: KrausSet::new(vec![identity(d)]).ok(),
            flags: ValidationFlags { cp: true, unital: true },
        }
    }

    pub fn system(&self) -> SystemDescriptor {
        self.system
    }

    pub fn dim(&self) -> usize {
        self.superop.dim()
    }

    pub fn superoperator(&self) -> &Superoperator {
        &self.superop
    }

    pub fn kraus(&self) -> Option<&KrausSet> {
        self.kraus.as_ref()
    }

    pub fn flags(&self) -> ValidationFlags {
        self.flags
    }

    /// Kraus operators, extracted from the Choi matrix when none are stored.
    pub fn kraus_or_extract(&self) -> Result<KrausSet> {
        match &self.kraus {
            Some(k) => Ok(k.clone()),
            None => self.superop.choi().to_kraus(KRAUS_CUTOFF),
        }
    }

    pub fn validate(&self, cfg: &Config) -> ValidationReport {
        let choi = self.superop.choi();
        let choi_min_eigenvalue = choi.min_eigenvalue();
        let choi_hermitian_residual = choi.hermitian_residual();
        let unital_residual = self.superop.unital_residual();
        let hermiticity_residual = self.superop.hermiticity_residual();
        ValidationReport {
            dim: self.dim(),
            choi_min_eigenvalue,
            choi_hermitian_residual,
            cp: choi_min_eigenvalue >= -cfg.tol_psd && choi_hermitian_residual <= cfg.tol_herm,
            unital_residual,
            unital: unital_residual <= cfg.tol_herm,
            hermiticity_residual,
            hermiticity_preserving: hermiticity_residual <= cfg.tol_herm,
            tol_psd: cfg.tol_psd,
            tol_herm: cfg.tol_herm,
        }
    }

    /// Validates and fails with [`Error::Validation`] unless the map is UCP.
    pub fn require_ucp(&self, cfg: &Config) -> Result<ValidationReport> {
        let report = self.validate(cfg);
        if !report.is_ucp() {
            return Err(Error::Validation(format!(
                "not a UCP map: choi_min_eigenvalue={:e}, unital_residual={:e}, hermiticity_residual={:e}",
                report.choi_min_eigenvalue, report.unital_residual, report.hermiticity_residual
            )));
        }
        Ok(report)
    }

    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        self.superop.apply(x)
    }

    pub fn power(&self, k: u64) -> Channel {
        Channel { system: self.system, superop: self.superop.power(k), kraus: None, flags: self.flags }
    }

    pub fn compose(&self, other: &Channel) -> Result<Channel> {
        Ok(Channel {
            system: self.system,
            superop: self.superop.compose(&other.superop)?,
            kraus: None,
            flags: ValidationFlags {
                cp: self.flags.cp && other.flags.cp,
                unital: self.flags.unital && other.flags.unital,
            },
        })
    }

    pub fn predual(&self) -> Superoperator {
        self.superop.predual()
    }

    /// `rho -> rho ∘ L` on functionals.
    pub fn predual_apply(&self, f: &Functional) -> Result<Functional> {
        Functional::new(self.superop.predual().apply(f.pairing_matrix())?)
    }

    /// `id_n ⊗ L` on `M_n ⊗ M_d`, guarded by `cfg.dim_ceiling`.
    pub fn amplify(&self, n: usize, cfg: &Config) -> Result<Channel> {
        let system = self.system.amplified(n)?;
        let side = n * self.dim();
        cfg.guard(side * side)?;
        if n == 1 {
            return Ok(self.clone());
        }
        let kraus = self.kraus.as_ref().map(|ks| {
            KrausSet::new(ks.operators().iter().map(|k| identity(n).kronecker(k)).collect())
                .expect("amplified Kraus operators share a dimension")
        });
        Ok(Channel { system, superop: self.superop.amplify(n), kraus, flags: self.flags })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{from_real_rows, matrix_unit, real_diag, trace_norm, trace_pair};
    use crate::sampling::{gaussian_matrix, rng_from_seed};

    fn cfg() -> Config {
        Config::default()
    }

    fn z() -> CMat {
        real_diag(&[1.0, -1.0])
    }

    fn ad_z() -> Channel {
        Channel::from_kraus(KrausSet::new(vec![z()]).unwrap(), &cfg())
    }

    fn depolarizing() -> Channel {
        Channel::from_superoperator(Superoperator::from_fn(2, |x| identity(2) * (x.trace() / c(2.0, 0.0))), &cfg())
    }

    fn units(d: usize) -> Vec<CMat> {
        (0..d).flat_map(|i| (0..d).map(move |j| matrix_unit(d, i, j))).collect()
    }

    #[test]
    fn from_kraus_examples() {
        let id = Channel::from_kraus(KrausSet::new(vec![identity(2)]).unwrap(), &cfg());
        assert_eq!(id.flags(), ValidationFlags { cp: true, unital: true });
        assert!((id.superoperator().matrix() - identity(4)).norm() < 1e-15);

        let adz = ad_z();
        assert!(adz.flags().cp && adz.flags().unital);

        let pinch = Channel::from_kraus(KrausSet::new(vec![matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)]).unwrap(), &cfg());
        assert!(pinch.flags().cp && pinch.flags().unital);
        for i in 0..2 {
            for j in 0..2 {
                let out = pinch.apply(&matrix_unit(2, i, j)).unwrap();
                let expect = if i == j { matrix_unit(2, i, j) } else { CMat::zeros(2, 2) };
                assert!((out - expect).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn from_kraus_errors() {
        assert!(KrausSet::new(vec![]).is_err());
        assert!(KrausSet::new(vec![identity(2), identity(3)]).is_err());
    }

    #[test]
    fn validate_examples() {
        let r = Channel::identity(2).validate(&cfg());
        assert!(r.cp && r.unital);

        // Choi matrix of the transpose is the swap with eigenvalues ±1.
        let transpose = Channel::from_superoperator(Superoperator::from_fn(2, |x| x.transpose()), &cfg());
        let r = transpose.validate(&cfg());
        assert!(!r.cp && r.unital);
        assert!((r.choi_min_eigenvalue + 1.0).abs() < 1e-12);
        assert!(transpose.require_ucp(&cfg()).is_err());

        let r = depolarizing().validate(&cfg());
        assert!(r.cp && r.unital);
    }

    #[test]
    fn apply_examples() {
        let g = gaussian_matrix(&mut rng_from_seed(1), 2);
        assert!((Channel::identity(2).apply(&g).unwrap() - &g).norm() < 1e-15);
        let x = from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let hand = z() * &x * z();
        assert_eq!(hand, from_real_rows(&[&[0.0, -1.0], &[0.0, 0.0]]));
        assert!((ad_z().apply(&x).unwrap() - hand).norm() < 1e-15);
        let out = depolarizing().apply(&real_diag(&[1.0, 0.0])).unwrap();
        assert!((out - real_diag(&[0.5, 0.5])).norm() < 1e-15);
        assert!(ad_z().apply(&identity(3)).is_err());
    }

    #[test]
    fn power_examples() {
        let sq = ad_z().power(2);
        for u in units(2) {
            assert!((sq.apply(&u).unwrap() - &u).norm() < 1e-14);
        }
        assert!((depolarizing().power(0).superoperator().matrix() - identity(4)).norm() < 1e-15);
        let dep = depolarizing();
        let d5 = dep.power(5);
        for u in units(2) {
            let once = dep.apply(&u).unwrap();
            assert!((dep.apply(&once).unwrap() - &once).norm() < 1e-14);
            assert!((d5.apply(&u).unwrap() - once).norm() < 1e-14);
        }
    }

    #[test]
    fn predual_examples() {
        assert!((Channel::identity(2).predual().matrix() - identity(4)).norm() < 1e-15);
        let adz = ad_z();
        let pre = adz.predual();
        for f in units(2) {
            for x in units(2) {
                let lhs = trace_pair(&pre.apply(&f).unwrap(), &x);
                let rhs = trace_pair(&f, &adz.apply(&x).unwrap());
                assert!((lhs - rhs).norm() < 1e-14);
            }
        }
        assert!((pre.matrix() - adz.superoperator().matrix()).norm() < 1e-14);

        let dep = depolarizing();
        let pre = dep.predual();
        for f in units(2) {
            let expect = identity(2) * (f.trace() / c(2.0, 0.0));
            assert!((pre.apply(&f).unwrap() - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn predual_is_trace_norm_contractive() {
        let mut rng = rng_from_seed(5);
        let ch = crate::sampling::random_ucp_channel(&mut rng, 3, 3, &cfg());
        let f = Functional::new(gaussian_matrix(&mut rng, 3)).unwrap();
        let g = ch.predual_apply(&f).unwrap();
        assert!(trace_norm(&g) <= trace_norm(&f) + 1e-12);
        assert!((g.pairing_matrix().trace() - f.pairing_matrix().trace()).norm() < 1e-12);
    }

    #[test]
    fn amplify_examples() {
        let adz = ad_z();
        let same = adz.amplify(1, &cfg()).unwrap();
        assert_eq!(same.superoperator(), adz.superoperator());
        let id2 = Channel::identity(2).amplify(2, &cfg()).unwrap();
        assert!((id2.superoperator().matrix() - identity(16)).norm() < 1e-15);

        let amp = adz.amplify(2, &cfg()).unwrap();
        let u = identity(2).kronecker(&z());
        let x = gaussian_matrix(&mut rng_from_seed(3), 4);
        let expect = &u * &x * u.adjoint();
        assert!((amp.apply(&x).unwrap() - &expect).norm() < 1e-13);
        // blockwise oracle
        let mut blockwise = CMat::zeros(4, 4);
        for a in 0..2 {
            for b in 0..2 {
                let block = x.view((2 * a, 2 * b), (2, 2)).into_owned();
                blockwise.view_mut((2 * a, 2 * b), (2, 2)).copy_from(&adz.apply(&block).unwrap());
            }
        }
        assert!((blockwise - expect).norm() < 1e-13);
        assert_eq!(amp.system().hierarchy_level, 2);
    }

    #[test]
    fn amplify_resource_guard() {
        let small = Config { dim_ceiling: 15, ..cfg() };
        assert!(matches!(ad_z().amplify(2, &small), Err(Error::ResourceGuard { .. })));
    }

    #[test]
    fn from_stochastic_examples() {
        let id = Channel::from_stochastic(&StochasticMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap());
        let g = from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert!((id.apply(&g).unwrap() - real_diag(&[1.0, 4.0])).norm() < 1e-15);

        let swap = Channel::from_stochastic(&StochasticMatrix::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap());
        assert!((swap.apply(&real_diag(&[1.0, 0.0])).unwrap() - real_diag(&[0.0, 1.0])).norm() < 1e-15);

        let avg = Channel::from_stochastic(&StochasticMatrix::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap());
        assert!((avg.apply(&real_diag(&[1.0, 0.0])).unwrap() - real_diag(&[0.5, 0.5])).norm() < 1e-15);
        let r = avg.validate(&cfg());
        assert!(r.is_ucp());
        let kraus = avg.kraus().unwrap();
        assert!((kraus.to_superoperator().matrix() - avg.superoperator().matrix()).norm() < 1e-15);
    }

    #[test]
    fn choi_round_trip_and_kraus_extraction() {
        let mut rng = rng_from_seed(11);
        let ch = crate::sampling::random_ucp_channel(&mut rng, 3, 2, &cfg());
        let choi = ch.superoperator().choi();
        assert!((choi.to_superoperator().matrix() - ch.superoperator().matrix()).norm() < 1e-13);
        let ks = choi.to_kraus(KRAUS_CUTOFF).unwrap();
        assert!(ks.operators().len() <= 2);
        assert!((ks.to_superoperator().matrix() - ch.superoperator().matrix()).norm() < 1e-12);
        let x = gaussian_matrix(&mut rng, 3);
        assert!((ks.apply(&x) - ch.apply(&x).unwrap()).norm() < 1e-12);
    }
}
