use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::subsystem::OperatorSubsystem;
use crate::error::{Error, Result};
use crate::operator::{c, max_abs, spectral_norm, unvec, vec_of, CMat, CVec, C64, ZERO};

/// Beyond this dimension associativity is checked on sampled triples only.
const FULL_ASSOCIATIVITY_MAX_DIM: usize = 20;
const SAMPLED_TRIPLES: usize = 400;
const CSTAR_SAMPLES: usize = 32;

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct AxiomResiduals {
    /// Largest distance of `Q(b_i b_j)` from the subsystem.
    pub closure: f64,
    pub associativity: f64,
    pub involution: f64,
    pub unit: f64,
    /// Largest `| ||x* o x|| - ||x||^2 |` over sampled unit-norm `x`.
    pub c_star: f64,
    pub associativity_exhaustive: bool,
}

/// The range of a UCP idempotent `Q` with the product `x o y = Q(xy)`,
/// stored through structure constants in a Hermitian orthonormal basis.
#[derive(Debug, Clone)]
pub struct ChoiEffrosAlgebra {
    system: OperatorSubsystem,
    /// `c[(i * m + j) * m + k]`, the `b_k` coordinate of `b_i o b_j`.
    structure: Vec<C64>,
    pub residuals: AxiomResiduals,
}

/// Computes the Choi-Effros product on `ns` from the superoperator matrix of
/// `Q` and checks the `C*`-algebra axioms within `tol_alg`.
pub fn choi_effros<R: Rng + ?Sized>(
    ns: OperatorSubsystem,
    q: &CMat,
    tol_alg: f64,
    tol_span: f64,
    rng: &mut R,
) -> Result<ChoiEffrosAlgebra> {
    let d = ns.ambient_dim();
    let m = ns.dim();
    if q.nrows() != d * d || q.ncols() != d * d {
        return Err(Error::Dimension(format!("Q must be {0}x{0}", d * d)));
    }
    let mut structure = vec![ZERO; m * m * m];
    let mut closure: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let prod = &ns.basis()[i] * &ns.basis()[j];
            let qp = unvec(&(q * vec_of(&prod)), d);
            let (coords, r) = ns.coords(&qp);
            closure = closure.max(r);
            for k in 0..m {
                structure[(i * m + j) * m + k] = coords[k];
            }
        }
    }
    if closure > tol_span {
        return Err(Error::QRangeMismatch { residual: closure });
    }
    let mut alg = ChoiEffrosAlgebra { system: ns, structure, residuals: AxiomResiduals { closure, ..Default::default() } };
    alg.residuals = alg.check_axioms(rng);
    let r = alg.residuals;
    for (axiom, value) in
        [("associativity", r.associativity), ("involution", r.involution), ("unit", r.unit), ("C*-identity", r.c_star)]
    {
        if value > tol_alg {
            return Err(Error::AlgebraAxiomFailure { axiom, residual: value });
        }
    }
    Ok(alg)
}

impl ChoiEffrosAlgebra {
    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    pub fn system(&self) -> &OperatorSubsystem {
        &self.system
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> C64 {
        let m = self.dim();
        self.structure[(i * m + j) * m + k]
    }

    pub fn structure_constants(&self) -> &[C64] {
        &self.structure
    }

    pub fn unit(&self) -> &CVec {
        self.system.identity_coords()
    }

    /// Coordinates of `x o y`.
    pub fn product(&self, x: &CVec, y: &CVec) -> CVec {
        let m = self.dim();
        let mut out = CVec::zeros(m);
        for i in 0..m {
            if x[i] == ZERO {
                continue;
            }
            for j in 0..m {
                let w = x[i] * y[j];
                if w == ZERO {
                    continue;
                }
                let base = (i * m + j) * m;
                for k in 0..m {
                    out[k] += w * self.structure[base + k];
                }
            }
        }
        out
    }

    /// The basis is self-adjoint, so the involution conjugates coordinates.
    pub fn star(&self, x: &CVec) -> CVec {
        x.map(|z| z.conj())
    }

    /// `||x||` is the operator norm in the ambient matrix algebra.
    pub fn norm(&self, x: &CVec) -> f64 {
        spectral_norm(&self.system.assemble(x))
    }

    /// Matrix of `y -> x o y` in coordinates.
    pub fn left_multiplication(&self, x: &CVec) -> CMat {
        let m = self.dim();
        let mut out = CMat::zeros(m, m);
        for j in 0..m {
            let mut e = CVec::zeros(m);
            e[j] = c(1.0, 0.0);
            out.set_column(j, &self.product(x, &e));
        }
        out
    }

    fn basis_vector(&self, i: usize) -> CVec {
        let mut e = CVec::zeros(self.dim());
        e[i] = c(1.0, 0.0);
        e
    }

    fn check_axioms<R: Rng + ?Sized>(&self, rng: &mut R) -> AxiomResiduals {
        let m = self.dim();
        let mut r = self.residuals;

        let triple = |i: usize, j: usize, k: usize| -> f64 {
            let (bi, bj, bk) = (self.basis_vector(i), self.basis_vector(j), self.basis_vector(k));
            let left = self.product(&self.product(&bi, &bj), &bk);
            let right = self.product(&bi, &self.product(&bj, &bk));
            max_abs(&(left - right))
        };
        r.associativity_exhaustive = m <= FULL_ASSOCIATIVITY_MAX_DIM;
        r.associativity = 0.0;
        if r.associativity_exhaustive {
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        r.associativity = r.associativity.max(triple(i, j, k));
                    }
                }
            }
        } else {
            for _ in 0..SAMPLED_TRIPLES {
                let (i, j, k) = (rng.random_range(0..m), rng.random_range(0..m), rng.random_range(0..m));
                r.associativity = r.associativity.max(triple(i, j, k));
            }
        }

        // (b_i o b_j)* = b_j o b_i for self-adjoint b_i, b_j.
        r.involution = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let dev = (self.structure_constant(i, j, k).conj() - self.structure_constant(j, i, k)).norm();
                    r.involution = r.involution.max(dev);
                }
            }
        }

        r.unit = 0.0;
        let u = self.unit();
        for j in 0..m {
            let bj = self.basis_vector(j);
            r.unit = r.unit.max(max_abs(&(self.product(u, &bj) - &bj)));
            r.unit = r.unit.max(max_abs(&(self.product(&bj, u) - &bj)));
        }

        r.c_star = 0.0;
        for _ in 0..CSTAR_SAMPLES {
            let x = self.random_unit_element(rng);
            let xsx = self.product(&self.star(&x), &x);
            r.c_star = r.c_star.max((self.norm(&xsx) - 1.0).abs());
        }
        r
    }

    /// Gaussian element scaled to norm one.
    pub fn random_unit_element<R: Rng + ?Sized>(&self, rng: &mut R) -> CVec {
        let m = self.dim();
        let x = CVec::from_fn(m, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            c(re, im)
        });
        let n = self.norm(&x);
        x / c(n, 0.0)
    }

    /// Gaussian self-adjoint element (real coordinates).
    pub fn random_self_adjoint<R: Rng + ?Sized>(&self, rng: &mut R) -> CVec {
        CVec::from_fn(self.dim(), |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            c(re, 0.0)
        })
    }

    /// Same algebra with the basis reordered by `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let m = self.dim();
        let mut inv = vec![0; m];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut structure = vec![ZERO; m * m * m];
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    structure[(inv[i] * m + inv[j]) * m + inv[k]] = self.structure_constant(i, j, k);
                }
            }
        }
        Self { system: self.system.permuted(perm), structure, residuals: self.residuals }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{identity, matrix_unit};
    use crate::sampling::rng_from_seed;

    fn full_matrix_system(d: usize) -> OperatorSubsystem {
        let mut v = CMat::zeros(d * d, d * d);
        for k in 0..d * d {
            v[(k, k)] = c(1.0, 0.0);
        }
        OperatorSubsystem::from_vectors(&v, d, 1e-8).unwrap()
    }

    #[test]
    fn identity_q_gives_ordinary_product() {
        let ns = full_matrix_system(2);
        let q = CMat::identity(4, 4);
        let alg = choi_effros(ns, &q, 1e-8, 1e-8, &mut rng_from_seed(1)).unwrap();
        let (x, _) = alg.system().coords(&matrix_unit(2, 0, 1));
        let (y, _) = alg.system().coords(&matrix_unit(2, 1, 0));
        let xy = alg.system().assemble(&alg.product(&x, &y));
        assert!((xy - matrix_unit(2, 0, 0)).norm() < 1e-14);
        assert!(alg.residuals.associativity < 1e-14);
        assert!(alg.residuals.c_star < 1e-12);
    }

    #[test]
    fn non_multiplicative_range_gets_new_product() {
        // Q = trace state times identity: range C1, product is trivial.
        let d = 3;
        let mut q = CMat::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                q[(i * (d + 1), j * (d + 1))] = c(1.0 / d as f64, 0.0);
            }
        }
        let v = CMat::from_column_slice(d * d, 1, vec_of(&identity(d)).as_slice());
        let ns = OperatorSubsystem::from_vectors(&v, d, 1e-8).unwrap();
        let alg = choi_effros(ns, &q, 1e-8, 1e-8, &mut rng_from_seed(1)).unwrap();
        assert_eq!(alg.dim(), 1);
        let u = alg.unit().clone();
        assert!(max_abs(&(alg.product(&u, &u) - &u)) < 1e-14);
    }

    #[test]
    fn range_mismatch_is_reported() {
        // The diagonal is not closed under products through Q = identity
        // once an off-diagonal element is added.
        let mut v = CMat::zeros(4, 3);
        v.set_column(0, &vec_of(&identity(2)));
        v.set_column(1, &vec_of(&(matrix_unit(2, 0, 1) + matrix_unit(2, 1, 0))));
        v.set_column(2, &vec_of(&(matrix_unit(2, 0, 1) * c(0.0, 1.0) - matrix_unit(2, 1, 0) * c(0.0, 1.0))));
        let ns = OperatorSubsystem::from_vectors(&v, 2, 1e-8).unwrap();
        let err = choi_effros(ns, &CMat::identity(4, 4), 1e-8, 1e-8, &mut rng_from_seed(1)).unwrap_err();
        assert!(matches!(err, Error::QRangeMismatch { .. }));
    }

    #[test]
    fn permutation_preserves_products() {
        let alg = choi_effros(full_matrix_system(2), &CMat::identity(4, 4), 1e-8, 1e-8, &mut rng_from_seed(3)).unwrap();
        let perm = [0, 2, 3, 1];
        let p = alg.permuted(&perm);
        let mut rng = rng_from_seed(5);
        let x = alg.random_unit_element(&mut rng);
        let y = alg.random_unit_element(&mut rng);
        let xp = CVec::from_iterator(4, perm.iter().map(|&i| x[i]));
        let yp = CVec::from_iterator(4, perm.iter().map(|&i| y[i]));
        let a = alg.system().assemble(&alg.product(&x, &y));
        let b = p.system().assemble(&p.product(&xp, &yp));
        assert!((a - b).norm() < 1e-12);
    }
}
