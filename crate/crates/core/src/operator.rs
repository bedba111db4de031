//! Dense complex operators, their norms, Kronecker products and the trace
//! pairing between operators and functionals.
//!
//! Vectorization is column-stacking throughout the crate: `vec(x)[i + j*d] = x[(i, j)]`,
//! which is also the storage order of [`nalgebra::DMatrix`].

use nalgebra::{DMatrix, DVector, Dim, Matrix, RawStorage};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// An element of the ambient matrix algebra.
pub type Operator = CMat;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

/// Matrix unit `E_{ij}` of size `d`.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    m[(i, j)] = ONE;
    m
}

pub fn from_real_rows(rows: &[&[f64]]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMat::from_fn(n, m, |i, j| c(rows[i][j], 0.0))
}

pub fn diag(entries: &[C64]) -> CMat {
    CMat::from_diagonal(&CVec::from_column_slice(entries))
}

pub fn real_diag(entries: &[f64]) -> CMat {
    CMat::from_fn(entries.len(), entries.len(), |i, j| if i == j { c(entries[i], 0.0) } else { ZERO })
}

pub fn ensure_square(x: &CMat, what: &str) -> Result<usize> {
    if x.nrows() != x.ncols() {
        return Err(Error::Dimension(format!("{what} is {}x{}, expected square", x.nrows(), x.ncols())));
    }
    Ok(x.nrows())
}

/// Column-stacking vectorization.
pub fn vec_of(x: &CMat) -> CVec {
    CVec::from_column_slice(x.as_slice())
}

/// Inverse of [`vec_of`] for a `d x d` operator.
pub fn unvec(v: &CVec, d: usize) -> CMat {
    assert_eq!(v.len(), d * d, "unvec: length {} is not {d}^2", v.len());
    CMat::from_column_slice(d, d, v.as_slice())
}

/// Index of entry `(i, j)` of a `d x d` operator inside its vectorization.
pub fn vec_index(i: usize, j: usize, d: usize) -> usize {
    i + j * d
}

/// Largest singular value.
pub fn operator_norm(x: &Operator) -> Result<f64> {
    ensure_square(x, "operator")?;
    Ok(spectral_norm(x))
}

/// Largest singular value of any (possibly rectangular) matrix.
pub fn spectral_norm(x: &CMat) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Sum of singular values of any matrix.
pub fn nuclear_norm(x: &CMat) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.singular_values().iter().sum()
}

pub fn frobenius(x: &CMat) -> f64 {
    x.norm()
}

pub fn max_abs<R: Dim, C: Dim, S: RawStorage<C64, R, C>>(x: &Matrix<C64, R, C, S>) -> f64 {
    x.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Kronecker product with `(x ⊗ y)[(i*dy + k, j*dy + l)] = x[(i,j)] * y[(k,l)]`.
pub fn tensor(x: &Operator, y: &Operator) -> Operator {
    x.kronecker(y)
}

/// Trace inner product `tr(a* b)`.
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn is_hermitian(x: &CMat, tol: f64) -> bool {
    x.nrows() == x.ncols() && max_abs(&(x - x.adjoint())) <= tol
}

/// A normal functional on `M_d`, stored as the matrix `F` with `rho(x) = tr(F x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional {
    pairing: CMat,
}

impl Functional {
    pub fn new(pairing: CMat) -> Result<Self> {
        ensure_square(&pairing, "pairing matrix")?;
        Ok(Self { pairing })
    }

    pub fn dim(&self) -> usize {
        self.pairing.nrows()
    }

    pub fn pairing_matrix(&self) -> &CMat {
        &self.pairing
    }

    pub fn into_pairing_matrix(self) -> CMat {
        self.pairing
    }
}

/// Norm of a normal functional on the full matrix algebra: the trace norm
/// of its pairing matrix.
pub fn trace_norm(f: &Functional) -> f64 {
    nuclear_norm(f.pairing_matrix())
}

/// `rho(x) = tr(F x)`.
pub fn pair(f: &Functional, x: &Operator) -> Result<C64> {
    ensure_square(x, "operator")?;
    if f.dim() != x.nrows() {
        return Err(Error::Dimension(format!("functional of dim {} paired with operator of dim {}", f.dim(), x.nrows())));
    }
    Ok(trace_pair(f.pairing_matrix(), x))
}

/// `tr(F x)` without the dimension bookkeeping.
pub fn trace_pair(f: &CMat, x: &CMat) -> C64 {
    let d = f.nrows();
    let mut acc = ZERO;
    for i in 0..d {
        for j in 0..d {
            acc += f[(i, j)] * x[(j, i)];
        }
    }
    acc
}

/// A JSON matrix entry: a real number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Entry> for C64 {
    fn from(e: Entry) -> Self {
        match e {
            Entry::Real(re) => c(re, 0.0),
            Entry::Complex([re, im]) => c(re, im),
        }
    }
}

/// Row-major `[re, im]` rows.
pub fn matrix_to_rows(x: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..x.nrows()).map(|i| (0..x.ncols()).map(|j| [x[(i, j)].re, x[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_rows(rows: &[Vec<Entry>]) -> Result<CMat> {
    let r = rows.len();
    let cols = rows.first().map_or(0, |row| row.len());
    if rows.iter().any(|row| row.len() != cols) {
        return Err(Error::Dimension("matrix rows have different lengths".into()));
    }
    Ok(CMat::from_fn(r, cols, |i, j| rows[i][j].into()))
}

/// Serde adapter for [`CMat`] as row-major `[re, im]` rows.
pub mod serde_matrix {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_rows(x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMat, D::Error> {
        let rows = Vec::<Vec<Entry>>::deserialize(d)?;
        matrix_from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for [`CVec`] as a list of `[re, im]` pairs.
pub mod serde_vector {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &CVec, s: S) -> std::result::Result<S::Ok, S::Error> {
        x.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CVec, D::Error> {
        let v = Vec::<Entry>::deserialize(d)?;
        Ok(CVec::from_iterator(v.len(), v.into_iter().map(C64::from)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "size")]
pub enum SystemKind {
    /// The full matrix algebra `M_d`.
    FullMatrix(usize),
    /// The diagonal copy of `C^n` inside `M_n`.
    Commutative(usize),
}

/// Which algebra a channel acts on, and at which amplification level `M_n ⊗ M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemDescriptor {
    pub kind: SystemKind,
    pub hierarchy_level: usize,
}

impl SystemDescriptor {
    pub fn full(d: usize) -> Self {
        Self { kind: SystemKind::FullMatrix(d), hierarchy_level: 1 }
    }

    pub fn commutative(n: usize) -> Self {
        Self { kind: SystemKind::Commutative(n), hierarchy_level: 1 }
    }

    /// Side length of the underlying matrices.
    pub fn base_dim(&self) -> usize {
        match self.kind {
            SystemKind::FullMatrix(d) | SystemKind::Commutative(d) => d,
        }
    }

    pub fn amplified(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("hierarchy level must be at least 1".into()));
        }
        Ok(Self { kind: self.kind, hierarchy_level: self.hierarchy_level * n })
    }
}
