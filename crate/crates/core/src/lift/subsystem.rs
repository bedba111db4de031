use crate::error::{Error, Result};
use crate::linalg::{column_space, project_onto};
use crate::operator::{c, hs_inner, identity, unvec, vec_of, CMat, CVec, C64};

/// A `*`-closed, unital subspace of `M_d` with a Hermitian basis that is
/// orthonormal in the trace inner product. The first basis element is
/// `1 / sqrt(d)`.
#[derive(Debug, Clone)]
pub struct OperatorSubsystem {
    ambient_dim: usize,
    basis: Vec<CMat>,
    identity_coords: CVec,
    /// Largest distance of a basis element from the spanning vectors.
    pub span_residual: f64,
    /// Distance of the identity from the spanning vectors.
    pub identity_residual: f64,
}

impl OperatorSubsystem {
    /// Builds the subsystem spanned by the columns of `vectors` (vectorized
    /// `d x d` operators). Fails unless the span is `*`-closed and contains
    /// the identity within `tol_span`.
    pub fn from_vectors(vectors: &CMat, d: usize, tol_span: f64) -> Result<Self> {
        if vectors.nrows() != d * d {
            return Err(Error::Dimension(format!("spanning vectors must have length {}", d * d)));
        }
        let span = column_space(vectors, 1e-10 * vectors.norm().max(1.0));
        let m = span.ncols();

        let id_vec = vec_of(&identity(d));
        let (_, identity_residual) = project_onto(&span, &id_vec);
        if identity_residual > tol_span * (d as f64).sqrt() {
            return Err(Error::Inconsistent(format!("identity lies outside the span (residual {identity_residual:e})")));
        }

        let mut candidates = vec![identity(d) / c((d as f64).sqrt(), 0.0)];
        for j in 0..m {
            let x = unvec(&span.column(j).into_owned(), d);
            let xs = x.adjoint();
            candidates.push((&x + &xs) * c(0.5, 0.0));
            candidates.push((&x - &xs) * c(0.0, -0.5));
        }
        let basis = hermitian_gram_schmidt(&candidates, m);
        if basis.len() != m {
            return Err(Error::Inconsistent(format!(
                "span of dimension {m} yields {} independent self-adjoint elements; it is not *-closed",
                basis.len()
            )));
        }
        let mut span_residual: f64 = 0.0;
        for b in &basis {
            let (_, r) = project_onto(&span, &vec_of(b));
            span_residual = span_residual.max(r);
        }
        if span_residual > tol_span {
            return Err(Error::Inconsistent(format!("span is not *-closed (residual {span_residual:e})")));
        }
        let mut identity_coords = CVec::zeros(m);
        identity_coords[0] = c((d as f64).sqrt(), 0.0);
        Ok(Self { ambient_dim: d, basis, identity_coords, span_residual, identity_residual })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    pub fn identity_coords(&self) -> &CVec {
        &self.identity_coords
    }

    /// Columns `vec(b_i)`.
    pub fn basis_matrix(&self) -> CMat {
        let d2 = self.ambient_dim * self.ambient_dim;
        let mut out = CMat::zeros(d2, self.dim());
        for (j, b) in self.basis.iter().enumerate() {
            out.set_column(j, &vec_of(b));
        }
        out
    }

    /// `sum_i a_i b_i`.
    pub fn assemble(&self, coords: &CVec) -> CMat {
        let d = self.ambient_dim;
        self.basis.iter().zip(coords.iter()).fold(CMat::zeros(d, d), |acc, (b, a)| acc + b * *a)
    }

    /// Coordinates `a_i = tr(b_i x)` and the distance of `x` from the subsystem.
    pub fn coords(&self, x: &CMat) -> (CVec, f64) {
        let coords = CVec::from_iterator(self.dim(), self.basis.iter().map(|b| hs_inner(b, x)));
        let residual = (x - self.assemble(&coords)).norm();
        (coords, residual)
    }

    /// Returns the same subsystem with its basis reordered (first element kept
    /// as the normalized identity only if `perm[0] == 0`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let basis: Vec<CMat> = perm.iter().map(|&i| self.basis[i].clone()).collect();
        let identity_coords = CVec::from_iterator(perm.len(), perm.iter().map(|&i| self.identity_coords[i]));
        Self { basis, identity_coords, ..self.clone() }
    }
}

/// Gram-Schmidt over the reals on Hermitian candidates, stopping after
/// `limit` elements.
fn hermitian_gram_schmidt(candidates: &[CMat], limit: usize) -> Vec<CMat> {
    let mut out: Vec<CMat> = Vec::new();
    for cand in candidates {
        if out.len() == limit {
            break;
        }
        let mut v = cand.clone();
        for _ in 0..2 {
            for b in &out {
                let p: C64 = c(hs_inner(b, &v).re, 0.0);
                v -= b * p;
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            out.push(v / c(n, 0.0));
        }
    }
    out
}
