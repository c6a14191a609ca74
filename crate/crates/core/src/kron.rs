//! Structured operators on product bases: sums of Kronecker products of
//! small per-axis factors.
//!
//! Axis 0 is the slowest index of the flattened basis. A factor of `None`
//! stands for the identity on that axis. Products of two operators are formed
//! term by term on the factors, so nothing of full dimension is multiplied
//! densely; the flattened matrix is produced only on request, as CSR or dense.

use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::iterative::LinearOperator;
use crate::operator::OperatorMatrix;
use crate::scalar::{cabs, cone, czero, Real};

pub type CMatrix<T> = DMatrix<Complex<T>>;

/// `coeff * (F_0 (x) F_1 (x) ... )`.
#[derive(Debug, Clone)]
pub struct KronTerm<T: Real> {
    pub coeff: Complex<T>,
    pub factors: Vec<Option<Arc<CMatrix<T>>>>,
}

#[derive(Debug, Clone)]
pub struct KronOperator<T: Real> {
    dims: Vec<usize>,
    terms: Vec<KronTerm<T>>,
}

impl<T: Real> KronOperator<T> {
    /// The zero operator on the given axes.
    pub fn zero(dims: &[usize]) -> Self {
        Self {
            dims: dims.to_vec(),
            terms: Vec::new(),
        }
    }

    pub fn identity(dims: &[usize]) -> Self {
        let mut op = Self::zero(dims);
        op.terms.push(KronTerm {
            coeff: cone(),
            factors: vec![None; dims.len()],
        });
        op
    }

    /// `coeff * m` acting on `axis`, identity elsewhere.
    pub fn embed(dims: &[usize], axis: usize, m: &CMatrix<T>, coeff: Complex<T>) -> Self {
        let mut op = Self::zero(dims);
        op.push_term(coeff, &[(axis, m)]);
        op
    }

    /// Appends `coeff * prod_i (factor_i on axis_i)`. Factors on the same
    /// axis are multiplied in the given order.
    pub fn push_term(&mut self, coeff: Complex<T>, factors: &[(usize, &CMatrix<T>)]) {
        let mut slots: Vec<Option<Arc<CMatrix<T>>>> = vec![None; self.dims.len()];
        for &(axis, m) in factors {
            assert!(axis < self.dims.len(), "axis {axis} out of range");
            assert_eq!(m.nrows(), self.dims[axis], "factor dimension mismatch");
            assert!(m.is_square());
            slots[axis] = Some(Arc::new(match &slots[axis] {
                None => m.clone(),
                Some(prev) => prev.as_ref() * m,
            }));
        }
        self.terms.push(KronTerm {
            coeff,
            factors: slots,
        });
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn terms(&self) -> &[KronTerm<T>] {
        &self.terms
    }

    pub fn scaled(mut self, c: Complex<T>) -> Self {
        for t in &mut self.terms {
            t.coeff *= c;
        }
        self
    }

    pub fn plus(mut self, other: &Self) -> Self {
        assert_eq!(self.dims, other.dims, "axis layout mismatch");
        self.terms.extend(other.terms.iter().cloned());
        self
    }

    pub fn minus(self, other: &Self) -> Self {
        let neg = other.clone().scaled(-cone::<T>());
        self.plus(&neg)
    }

    /// Operator product `self * other`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.dims, other.dims, "axis layout mismatch");
        let mut out = Self::zero(&self.dims);
        for a in &self.terms {
            for b in &other.terms {
                let factors = a
                    .factors
                    .iter()
                    .zip(&b.factors)
                    .map(|(fa, fb)| match (fa, fb) {
                        (None, None) => None,
                        (Some(x), None) => Some(x.clone()),
                        (None, Some(y)) => Some(y.clone()),
                        (Some(x), Some(y)) => Some(Arc::new(x.as_ref() * y.as_ref())),
                    })
                    .collect();
                out.terms.push(KronTerm {
                    coeff: a.coeff * b.coeff,
                    factors,
                });
            }
        }
        out
    }

    /// `self (x) other` with `other`'s axes appended after this one's.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut out = Self::zero(&dims);
        for a in &self.terms {
            for b in &other.terms {
                let mut factors = a.factors.clone();
                factors.extend(b.factors.iter().cloned());
                out.terms.push(KronTerm {
                    coeff: a.coeff * b.coeff,
                    factors,
                });
            }
        }
        out
    }

    /// Flattened sparse matrix; duplicate entries are summed.
    pub fn to_csr(&self) -> CsrMatrix<Complex<T>> {
        let n = self.dim();
        let mut coo = CooMatrix::new(n, n);
        let strides = strides(&self.dims);
        for term in &self.terms {
            let entries: Vec<Vec<(usize, usize, Complex<T>)>> = term
                .factors
                .iter()
                .zip(&self.dims)
                .map(|(f, &d)| match f {
                    None => (0..d).map(|i| (i, i, cone())).collect(),
                    Some(m) => {
                        let mut nz = Vec::new();
                        for j in 0..d {
                            for i in 0..d {
                                let v = m[(i, j)];
                                if v != czero() {
                                    nz.push((i, j, v));
                                }
                            }
                        }
                        nz
                    }
                })
                .collect();
            if entries.iter().any(|e| e.is_empty()) {
                continue;
            }
            let mut pos = vec![0usize; entries.len()];
            'odometer: loop {
                let mut row = 0;
                let mut col = 0;
                let mut val = term.coeff;
                for (axis, &p) in pos.iter().enumerate() {
                    let (i, j, v) = entries[axis][p];
                    row += i * strides[axis];
                    col += j * strides[axis];
                    val *= v;
                }
                if val != czero() {
                    coo.push(row, col, val);
                }
                for axis in (0..pos.len()).rev() {
                    pos[axis] += 1;
                    if pos[axis] < entries[axis].len() {
                        continue 'odometer;
                    }
                    pos[axis] = 0;
                }
                break;
            }
        }
        CsrMatrix::from(&coo)
    }

    pub fn to_dense(&self) -> CMatrix<T> {
        csr_to_dense(&self.to_csr())
    }

    pub fn to_operator(&self, label: impl Into<String>) -> OperatorMatrix<T> {
        OperatorMatrix::new(self.to_dense(), label)
    }

    /// Matrix-free application, factor by factor along each axis.
    pub fn apply_vec(&self, x: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        let mut y = DVector::zeros(n);
        for term in &self.terms {
            let mut buf = x.clone();
            for (axis, f) in term.factors.iter().enumerate() {
                if let Some(m) = f {
                    buf = apply_along_axis(&self.dims, axis, m, &buf);
                }
            }
            y.axpy(term.coeff, &buf, cone());
        }
        y
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for a in (0..dims.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * dims[a + 1];
    }
    s
}

fn apply_along_axis<T: Real>(
    dims: &[usize],
    axis: usize,
    m: &CMatrix<T>,
    x: &DVector<Complex<T>>,
) -> DVector<Complex<T>> {
    let d = dims[axis];
    let inner: usize = dims[axis + 1..].iter().product();
    let outer: usize = dims[..axis].iter().product();
    let mut y = DVector::zeros(x.len());
    for o in 0..outer {
        for i in 0..inner {
            let base = o * d * inner + i;
            for r in 0..d {
                let mut acc = czero::<T>();
                for c in 0..d {
                    let v = m[(r, c)];
                    if v != czero() {
                        acc += v * x[base + c * inner];
                    }
                }
                y[base + r * inner] = acc;
            }
        }
    }
    y
}

pub fn csr_to_dense<T: Real>(csr: &CsrMatrix<Complex<T>>) -> CMatrix<T> {
    let mut m = DMatrix::zeros(csr.nrows(), csr.ncols());
    for (i, j, v) in csr.triplet_iter() {
        m[(i, j)] += *v;
    }
    m
}

/// Row-major multi-index of a flat index (axis 0 slowest).
pub fn multi_index(dims: &[usize], mut flat: usize) -> Vec<usize> {
    let mut idx = vec![0; dims.len()];
    for a in (0..dims.len()).rev() {
        idx[a] = flat % dims[a];
        flat /= dims[a];
    }
    idx
}

pub fn flat_index(dims: &[usize], idx: &[usize]) -> usize {
    idx.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i)
}

/// Flat indices whose every axis index is below `dims[a] - exclude_top[a]`.
pub fn interior_indices(dims: &[usize], exclude_top: &[usize]) -> Vec<usize> {
    let n: usize = dims.iter().product();
    (0..n)
        .filter(|&f| {
            multi_index(dims, f)
                .iter()
                .zip(dims.iter().zip(exclude_top))
                .all(|(&i, (&d, &e))| i + e < d)
        })
        .collect()
}

/// Largest deviation of `m` from `target * I` on the rows and columns
/// selected by `mask`.
pub fn csr_deviation_from_scaled_identity<T: Real>(
    m: &CsrMatrix<Complex<T>>,
    mask: &[bool],
    target: Complex<T>,
) -> T {
    let mut worst = T::zero();
    let mut diag_seen = vec![false; m.nrows()];
    for (i, j, v) in m.triplet_iter() {
        if !(mask[i] && mask[j]) {
            continue;
        }
        let expect = if i == j {
            diag_seen[i] = true;
            target
        } else {
            czero()
        };
        worst = worst.max(cabs(*v - expect));
    }
    for (i, seen) in diag_seen.iter().enumerate() {
        if mask[i] && !seen {
            worst = worst.max(cabs(target));
        }
    }
    worst
}

/// Boolean form of [`interior_indices`].
pub fn interior_mask(dims: &[usize], exclude_top: &[usize]) -> Vec<bool> {
    let n: usize = dims.iter().product();
    let mut mask = vec![false; n];
    for f in interior_indices(dims, exclude_top) {
        mask[f] = true;
    }
    mask
}

/// Dense sub-block of `m` on the given rows and columns.
pub fn csr_compress<T: Real>(m: &CsrMatrix<Complex<T>>, indices: &[usize]) -> CMatrix<T> {
    let mut pos = vec![usize::MAX; m.nrows()];
    for (k, &i) in indices.iter().enumerate() {
        pos[i] = k;
    }
    let mut out = DMatrix::zeros(indices.len(), indices.len());
    for (i, j, v) in m.triplet_iter() {
        if pos[i] != usize::MAX && pos[j] != usize::MAX {
            out[(pos[i], pos[j])] += *v;
        }
    }
    out
}

/// `max |A_ij - conj(A_ji)|` of a square sparse matrix.
pub fn csr_hermiticity_residual<T: Real>(m: &CsrMatrix<Complex<T>>) -> T {
    let entries: std::collections::BTreeMap<(usize, usize), Complex<T>> =
        m.triplet_iter().map(|(i, j, v)| ((i, j), *v)).collect();
    let mut worst = T::zero();
    for (&(i, j), &v) in &entries {
        let w = entries.get(&(j, i)).copied().unwrap_or_else(czero);
        worst = worst.max(cabs(v - w.conj()));
    }
    worst
}

/// A sparse operator with its adjoint precomputed, for iterative solvers.
#[derive(Debug, Clone)]
pub struct SparseOperator<T: Real> {
    pub matrix: CsrMatrix<Complex<T>>,
    adjoint: CsrMatrix<Complex<T>>,
}

impl<T: Real> SparseOperator<T> {
    pub fn new(matrix: CsrMatrix<Complex<T>>) -> Self {
        let t = matrix.transpose();
        let (offsets, cols, vals) = t.disassemble();
        let vals = vals.into_iter().map(|v| v.conj()).collect();
        let adjoint =
            CsrMatrix::try_from_csr_data(matrix.ncols(), matrix.nrows(), offsets, cols, vals)
                .expect("transpose of a valid CSR matrix is valid");
        Self { matrix, adjoint }
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }
}

fn csr_matvec<T: Real>(m: &CsrMatrix<Complex<T>>, x: &DVector<Complex<T>>) -> DVector<Complex<T>> {
    let mut y = DVector::zeros(m.nrows());
    for (r, row) in m.row_iter().enumerate() {
        let mut acc = czero::<T>();
        for (&c, v) in row.col_indices().iter().zip(row.values()) {
            acc += *v * x[c];
        }
        y[r] = acc;
    }
    y
}

impl<T: Real> LinearOperator<T> for SparseOperator<T> {
    fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    fn apply(&self, x: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        csr_matvec(&self.matrix, x)
    }

    fn apply_adjoint(&self, x: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        csr_matvec(&self.adjoint, x)
    }
}

impl<T: Real> LinearOperator<T> for KronOperator<T> {
    fn dim(&self) -> usize {
        KronOperator::dim(self)
    }

    fn apply(&self, x: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        self.apply_vec(x)
    }
}

/// Dense Kronecker product `a (x) b`.
pub fn kron_dense<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    fn maxabs<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<Complex<f64>, R, C>>(
        m: &nalgebra::Matrix<Complex<f64>, R, C, S>,
    ) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn mat(n: usize, seed: usize) -> CMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| {
            let k = (i * 13 + j * 7 + seed * 5) % 11;
            if k.is_multiple_of(3) {
                czero()
            } else {
                cplx(k as f64 / 11.0 - 0.4, (k % 4) as f64 / 8.0)
            }
        })
    }

    #[test]
    fn flattening_agrees_with_dense_kronecker() {
        let dims = [2, 3, 2];
        let a = mat(2, 1);
        let b = mat(3, 2);
        let c = mat(2, 3);
        let mut op = KronOperator::zero(&dims);
        op.push_term(cplx(0.5, -1.0), &[(0, &a), (1, &b), (2, &c)]);
        op.push_term(cplx(2.0, 0.0), &[(1, &b)]);
        let dense = op.to_dense();
        let id2 = DMatrix::<Complex<f64>>::identity(2, 2);
        let expect = a.kronecker(&b).kronecker(&c) * cplx(0.5, -1.0)
            + id2.kronecker(&b).kronecker(&id2) * cplx(2.0, 0.0);
        assert!(maxabs(&(dense - expect)) < 1e-14);
    }

    #[test]
    fn composition_matches_dense_product() {
        let dims = [3, 2];
        let mut x = KronOperator::zero(&dims);
        x.push_term(cplx(1.0, 0.5), &[(0, &mat(3, 4))]);
        x.push_term(cplx(-0.3, 0.0), &[(0, &mat(3, 5)), (1, &mat(2, 6))]);
        let mut y = KronOperator::zero(&dims);
        y.push_term(cplx(0.7, 0.0), &[(1, &mat(2, 7))]);
        y = y.plus(&KronOperator::identity(&dims));
        let prod = x.compose(&y).to_dense();
        let expect = x.to_dense() * y.to_dense();
        assert!(maxabs(&(prod - expect)) < 1e-13);
    }

    #[test]
    fn matrix_free_application_matches_flattened() {
        let dims = [2, 3, 2];
        let mut op = KronOperator::zero(&dims);
        op.push_term(cplx(1.0, 0.0), &[(0, &mat(2, 1)), (2, &mat(2, 2))]);
        op.push_term(cplx(0.0, 1.0), &[(1, &mat(3, 3))]);
        let x = DVector::from_fn(12, |i, _| cplx(i as f64 * 0.1, 1.0 - i as f64 * 0.05));
        let y = op.apply_vec(&x);
        let expect = op.to_dense() * &x;
        assert!(maxabs(&(y - expect)) < 1e-13);
        let sp = SparseOperator::new(op.to_csr());
        let z = sp.apply(&x);
        assert!(maxabs(&(z - op.to_dense() * &x)) < 1e-13);
        let w = sp.apply_adjoint(&x);
        assert!(maxabs(&(w - op.to_dense().adjoint() * &x)) < 1e-13);
    }

    #[test]
    fn tensor_appends_axes() {
        let mut a = KronOperator::zero(&[2]);
        a.push_term(cone(), &[(0, &mat(2, 9))]);
        let t = a.tensor(&KronOperator::identity(&[3]));
        assert_eq!(t.dims(), &[2, 3]);
        let expect = mat(2, 9).kronecker(&DMatrix::identity(3, 3));
        assert!(maxabs(&(t.to_dense() - expect)) < 1e-15);
    }

    #[test]
    fn index_helpers() {
        let dims = [3, 2, 4];
        for f in 0..24 {
            assert_eq!(flat_index(&dims, &multi_index(&dims, f)), f);
        }
        assert_eq!(multi_index(&dims, 1), vec![0, 0, 1]);
        let interior = interior_indices(&dims, &[2, 0, 2]);
        assert_eq!(interior, vec![0, 1, 4, 5]);
    }
}
