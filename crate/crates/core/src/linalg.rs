//! Dense numerical kernels shared by the spectral, lift and markov modules.

use faer::Mat;
use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::operator::{c, CMat, CVec, C64};

/// Eigenvalues of a general complex square matrix (Schur-based, via faer).
pub fn eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Dimension(format!("eigenvalues of a {}x{} matrix", n, m.ncols())));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let fm = Mat::<C64>::from_fn(n, n, |i, j| m[(i, j)]);
    fm.eigenvalues().map_err(|e| Error::Numerical(format!("eigenvalue solver: {e:?}")))
}

/// Orthonormal basis (as columns) of the null space of `m`: right singular
/// vectors whose singular value is at most `tol`.
pub fn null_space(m: &CMat, tol: f64) -> CMat {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return CMat::zeros(0, 0);
    }
    // Thin SVD only yields min(rows, cols) right vectors; pad to square.
    let a = if rows < cols {
        let mut p = CMat::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&k| svd.singular_values[k] <= tol).collect();
    let mut out = CMat::zeros(cols, keep.len());
    for (col, &k) in keep.iter().enumerate() {
        for i in 0..cols {
            out[(i, col)] = v_t[(k, i)].conj();
        }
    }
    out
}

/// Orthonormal basis of the column space of `m`, dropping directions whose
/// singular value is below `tol`.
pub fn column_space(m: &CMat, tol: f64) -> CMat {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return CMat::zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&k| svd.singular_values[k] > tol).collect();
    CMat::from_fn(rows, keep.len(), |i, j| u[(i, keep[j])])
}

/// Smallest singular value (0 for an empty matrix).
pub fn min_singular_value(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let (rows, cols) = m.shape();
    let sv = m.singular_values();
    let smallest = sv.iter().copied().fold(f64::INFINITY, f64::min);
    // A wide matrix always has a nontrivial kernel.
    if rows < cols {
        0.0
    } else {
        smallest
    }
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let n = m.nrows();
    let vectors = CMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn min_hermitian_eigenvalue(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    hermitian_eigen(m).0[0]
}

/// Positive square root of the inverse of a positive definite matrix.
pub fn inverse_sqrt_psd(m: &CMat) -> Result<CMat> {
    let (values, vectors) = hermitian_eigen(m);
    if values.iter().any(|&v| v <= 0.0) {
        return Err(Error::Numerical("matrix is not positive definite".into()));
    }
    let scaled = CMat::from_fn(m.nrows(), m.ncols(), |i, j| vectors[(i, j)] / values[j].sqrt());
    Ok(&scaled * vectors.adjoint())
}

pub fn inverse(m: &CMat) -> Result<CMat> {
    m.clone().try_inverse().ok_or_else(|| Error::Numerical("singular matrix".into()))
}

/// `m^n` by repeated squaring.
pub fn matrix_power(m: &CMat, mut n: u64) -> CMat {
    let mut result = CMat::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Single-linkage clustering of complex values with the given radius.
/// Clusters come back ordered by their smallest member index.
pub fn cluster(values: &[C64], radius: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_slot[r]].push(i);
    }
    groups
}

/// Orthogonal iteration estimate of the spectral radius: iterate a block of
/// `block` vectors, re-orthonormalize, then take the largest Ritz value.
pub fn spectral_radius_subspace(m: &CMat, block: usize, iterations: usize) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    let b = block.clamp(1, n);
    // deterministic, generic start block
    let mut v = CMat::from_fn(n, b, |i, j| {
        let t = (i * 7 + j * 13 + 1) as f64;
        c((t * 0.618_033_988_75).fract() - 0.5, (t * 0.414_213_562_37).fract() - 0.5)
    });
    v = orthonormalize_columns(&v);
    for _ in 0..iterations {
        let w = m * &v;
        if w.norm() == 0.0 {
            return 0.0;
        }
        v = orthonormalize_columns(&w);
        if v.ncols() == 0 {
            return 0.0;
        }
    }
    let h = v.adjoint() * m * &v;
    eigenvalues(&h).map(|e| e.iter().map(|z| z.norm()).fold(0.0, f64::max)).unwrap_or(f64::NAN)
}

/// Gram-Schmidt (twice) on columns, dropping numerically dependent ones.
pub fn orthonormalize_columns(m: &CMat) -> CMat {
    let mut cols: Vec<CVec> = Vec::new();
    let scale = m.norm().max(f64::MIN_POSITIVE);
    for j in 0..m.ncols() {
        let mut v: CVec = m.column(j).into_owned();
        for _ in 0..2 {
            for q in &cols {
                let proj: C64 = q.dotc(&v);
                v -= q * proj;
            }
        }
        let nv = v.norm();
        if nv > 1e-13 * scale {
            cols.push(v / c(nv, 0.0));
        }
    }
    let mut out = CMat::zeros(m.nrows(), cols.len());
    for (j, col) in cols.iter().enumerate() {
        out.set_column(j, col);
    }
    out
}

/// Least-squares coordinates of `target` in the span of the orthonormal
/// columns of `basis`, plus the residual norm.
pub fn project_onto(basis: &CMat, target: &CVec) -> (CVec, f64) {
    let coeffs = basis.adjoint() * target;
    let residual = (target - basis * &coeffs).norm();
    (coeffs, residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{from_real_rows, ONE, ZERO};

    fn cyclic(n: usize) -> CMat {
        CMat::from_fn(n, n, |i, j| if j == (i + 1) % n { ONE } else { ZERO })
    }

    #[test]
    fn eigenvalues_of_cyclic_permutations() {
        for n in [2, 3, 4, 7, 12] {
            let ev = eigenvalues(&cyclic(n)).unwrap();
            assert_eq!(ev.len(), n);
            for z in &ev {
                assert!((z.norm() - 1.0).abs() < 1e-12);
                assert!((z.powu(n as u32) - ONE).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn null_space_of_rank_one() {
        let m = from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let ns = null_space(&m, 1e-10);
        assert_eq!(ns.ncols(), 1);
        assert!((&m * &ns).norm() < 1e-12);
        let wide = from_real_rows(&[&[1.0, 0.0, 0.0]]);
        assert_eq!(null_space(&wide, 1e-10).ncols(), 2);
    }

    #[test]
    fn clustering_is_single_linkage() {
        let vals = [c(0.0, 0.0), c(1.0, 0.0), c(0.5e-8, 0.0), c(1.0 + 0.9e-8, 0.0), c(1.0 + 1.8e-8, 0.0)];
        let groups = cluster(&vals, 1e-8);
        assert_eq!(groups, vec![vec![0, 2], vec![1, 3, 4]]);
    }

    #[test]
    fn power_by_squaring() {
        let m = from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let p = matrix_power(&m, 10);
        assert_eq!(p[(0, 1)].re, 10.0);
        assert_eq!(matrix_power(&m, 0), CMat::identity(2, 2));
    }

    #[test]
    fn subspace_radius_handles_equal_moduli() {
        let m = from_real_rows(&[&[0.0, 0.5, 0.0], &[0.5, 0.0, 0.0], &[0.0, 0.0, 0.1]]);
        let r = spectral_radius_subspace(&m, 3, 50);
        assert!((r - 0.5).abs() < 1e-12);
    }

    #[test]
    fn inverse_sqrt_of_diagonal() {
        let m = from_real_rows(&[&[4.0, 0.0], &[0.0, 9.0]]);
        let r = inverse_sqrt_psd(&m).unwrap();
        assert!((r[(0, 0)].re - 0.5).abs() < 1e-14);
        assert!((r[(1, 1)].re - 1.0 / 3.0).abs() < 1e-14);
    }
}
