//! Finite matrix representations of `x`, `p`, the dispersion operator and
//! the momentum quadratic mean, in two independent representations:
//!
//! * a truncated Hermite (ladder) basis adapted to one Gaussian family, in
//!   which the dispersion operator is diagonal away from the truncation edge;
//! * a uniform coordinate grid with central finite differences.
//!
//! The two are mutual oracles. Spectral statements about ladder matrices are
//! only made on the interior block (indices `0..N-2`): quadratic products of
//! truncated ladder matrices are corrupted in the top two rows and columns.

use std::ops::Range;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hermite::GaussianParams;
use crate::iterative::{lanczos_smallest, LanczosOptions, LinearOperator};
use crate::scalar::{cabs, cis, cone, cplx, creal, czero, from_usize, lit, to_f64, Real};
use crate::tridiag::SymTridiagonal;

/// Dimension of a truncated Hermite basis `{|0>, ..., |N-1>}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisSpec {
    cutoff: usize,
}

impl BasisSpec {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::InvalidParameter(format!(
                "basis cutoff must be >= 2, got {cutoff}"
            )));
        }
        Ok(Self { cutoff })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Indices free of truncation artifacts for quadratic ladder products.
    pub fn interior(&self) -> Range<usize> {
        0..self.cutoff - 2
    }
}

/// Uniform grid: `points` nodes on `center +- half_width * dx`, with the
/// center defaulting to the family's position mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub center: Option<f64>,
    pub half_width: f64,
    pub points: usize,
}

impl GridSpec {
    pub const MIN_HALF_WIDTH: f64 = 6.0;
    pub const MIN_POINTS: usize = 64;

    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        let g = Self {
            center: None,
            half_width,
            points,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_center(mut self, center: f64) -> Self {
        self.center = Some(center);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_width >= Self::MIN_HALF_WIDTH) {
            return Err(Error::InvalidParameter(format!(
                "grid half-width {} is below {} ground widths",
                self.half_width,
                Self::MIN_HALF_WIDTH
            )));
        }
        if self.points < Self::MIN_POINTS {
            return Err(Error::InvalidParameter(format!(
                "grid needs >= {} points, got {}",
                Self::MIN_POINTS,
                self.points
            )));
        }
        Ok(())
    }

    /// Node positions for a family.
    pub fn nodes<T: Real>(&self, params: &GaussianParams<T>) -> Vec<T> {
        let (start, h) = self.layout(params);
        (0..self.points)
            .map(|i| start + h * from_usize::<T>(i))
            .collect()
    }

    pub fn spacing<T: Real>(&self, params: &GaussianParams<T>) -> T {
        self.layout(params).1
    }

    fn layout<T: Real>(&self, params: &GaussianParams<T>) -> (T, T) {
        let center = self.center.map(lit::<T>).unwrap_or(params.x_mean());
        let half = lit::<T>(self.half_width) * params.dx();
        let h = (half + half) / from_usize::<T>(self.points - 1);
        (center - half, h)
    }
}

/// Square complex matrix plus a provenance label.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T: Real = f64> {
    pub matrix: DMatrix<Complex<T>>,
    pub label: String,
}

impl<T: Real> OperatorMatrix<T> {
    pub fn new(matrix: DMatrix<Complex<T>>, label: impl Into<String>) -> Self {
        assert!(matrix.is_square(), "operator matrices are square");
        Self {
            matrix,
            label: label.into(),
        }
    }

    pub fn identity(dim: usize, label: impl Into<String>) -> Self {
        Self::new(DMatrix::identity(dim, dim), label)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |A - A^dagger|`.
    pub fn hermiticity_residual(&self) -> T {
        let n = self.dim();
        let mut worst = T::zero();
        for j in 0..n {
            for i in 0..=j {
                let d = self.matrix[(i, j)] - self.matrix[(j, i)].conj();
                worst = worst.max(cabs(d));
            }
        }
        worst
    }

    /// Principal submatrix on the given (sorted) index set.
    pub fn compress(&self, indices: &[usize]) -> DMatrix<Complex<T>> {
        DMatrix::from_fn(indices.len(), indices.len(), |r, c| {
            self.matrix[(indices[r], indices[c])]
        })
    }

    /// Diagonal entries on the given index range, real parts.
    pub fn diagonal_on(&self, range: Range<usize>) -> Vec<T> {
        range.map(|i| self.matrix[(i, i)].re).collect()
    }

    /// `max |A_ij|` over `i != j`, both in `indices`.
    pub fn max_off_diagonal_on(&self, indices: &[usize]) -> T {
        let mut worst = T::zero();
        for &i in indices {
            for &j in indices {
                if i != j {
                    worst = worst.max(cabs(self.matrix[(i, j)]));
                }
            }
        }
        worst
    }

    /// True when every entry outside the first sub/super diagonals is zero.
    pub fn is_tridiagonal(&self) -> bool {
        let n = self.dim();
        for j in 0..n {
            for i in 0..n {
                if i.abs_diff(j) > 1 && self.matrix[(i, j)] != czero() {
                    return false;
                }
            }
        }
        true
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

impl<T: Real> LinearOperator<T> for OperatorMatrix<T> {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, x: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        &self.matrix * x
    }
}

/// `[A, B] = AB - BA`.
pub fn commutator<T: Real>(
    a: &DMatrix<Complex<T>>,
    b: &DMatrix<Complex<T>>,
) -> DMatrix<Complex<T>> {
    a * b - b * a
}

/// Largest deviation of `m` from `target * I` on the sub-block `indices`.
pub fn deviation_from_scaled_identity<T: Real>(
    m: &DMatrix<Complex<T>>,
    target: Complex<T>,
    indices: &[usize],
) -> T {
    let mut worst = T::zero();
    for &i in indices {
        for &j in indices {
            let expect = if i == j { target } else { czero() };
            worst = worst.max(cabs(m[(i, j)] - expect));
        }
    }
    worst
}

/// Sign convention of a conjugate pair.
///
/// * `Position`: `p = -i d/dx`, `[p, x] = -i` (one-dimensional mechanics).
/// * `Covariant`: `p = +i d/dx`, `[p, x] = +i` (four-momentum components and
///   the mass/tau pair).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    Position,
    Covariant,
}

/// Truncated lowering operator, `a|n> = sqrt(n)|n-1>`.
pub fn lowering<T: Real>(n: usize) -> DMatrix<Complex<T>> {
    let mut a = DMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = creal(from_usize::<T>(k).sqrt());
    }
    a
}

/// `(x - X)` and `(p - P)` in the ladder basis of width `dp`:
/// `x - X = dx (a + a^dagger)` and `p - P = i dp (a^dagger - a)` for the
/// position convention (negated for the covariant one).
#[derive(Debug, Clone)]
pub struct LadderPair<T: Real> {
    pub position: DMatrix<Complex<T>>,
    pub momentum: DMatrix<Complex<T>>,
}

impl<T: Real> LadderPair<T> {
    pub fn new(dp: T, cutoff: usize, convention: Convention) -> Self {
        let a = lowering::<T>(cutoff);
        let ad = a.adjoint();
        let dx = T::one() / (lit::<T>(2.0) * dp);
        let position = (&a + &ad) * creal(dx);
        let sign = match convention {
            Convention::Position => T::one(),
            Convention::Covariant => -T::one(),
        };
        let momentum = (&ad - &a) * cplx(T::zero(), sign * dp);
        Self { position, momentum }
    }

    /// `1/2 p^2 + 2 dp^4 x^2`, the one-axis dispersion operator.
    pub fn dispersion(&self, dp: T) -> DMatrix<Complex<T>> {
        let half = creal(lit::<T>(0.5));
        let dp2 = dp * dp;
        let pot = creal(lit::<T>(2.0) * dp2 * dp2);
        &self.momentum * &self.momentum * half + &self.position * &self.position * pot
    }
}

/// `(x - X, p - P)` for a one-dimensional family.
pub fn build_xp_ladder<T: Real>(
    params: &GaussianParams<T>,
    basis: &BasisSpec,
) -> (OperatorMatrix<T>, OperatorMatrix<T>) {
    let pair = LadderPair::new(params.dp(), basis.cutoff(), Convention::Position);
    (
        OperatorMatrix::new(pair.position, "x - X (ladder)"),
        OperatorMatrix::new(pair.momentum, "p - P (ladder)"),
    )
}

/// Dispersion operator `1/2 [(p - P)^2 + 4 dp^4 (x - X)^2]` in the ladder
/// basis. Its interior is diagonal with entries `(2n + 1) dp^2`.
pub fn build_sigma_1d<T: Real>(params: &GaussianParams<T>, basis: &BasisSpec) -> OperatorMatrix<T> {
    let pair = LadderPair::new(params.dp(), basis.cutoff(), Convention::Position);
    OperatorMatrix::new(pair.dispersion(params.dp()), "sigma (ladder)")
}

/// Momentum quadratic mean `P^2 + sigma`.
pub fn build_p2_mean<T: Real>(params: &GaussianParams<T>, basis: &BasisSpec) -> OperatorMatrix<T> {
    let sigma = build_sigma_1d(params, basis);
    let p2 = params.p_mean() * params.p_mean();
    let m = sigma.matrix + DMatrix::identity(basis.cutoff(), basis.cutoff()) * creal(p2);
    OperatorMatrix::new(m, "p2 mean (ladder)")
}

/// Dispersion operator `1/2 [(-i d/dx - P)^2 + 4 dp^4 (x - X)^2]` on a
/// uniform grid with Dirichlet ends.
///
/// The kinetic part uses the gauge-covariant central difference
/// `(2 f_j - e^{-iPh} f_{j+1} - e^{iPh} f_{j-1}) / h^2`, which is second-order
/// consistent with `(-i d/dx - P)^2` and exactly unitarily equivalent to the
/// `P = 0` stencil, so the spectrum does not depend on `P`.
pub fn build_sigma_grid<T: Real>(
    params: &GaussianParams<T>,
    grid: &GridSpec,
) -> Result<OperatorMatrix<T>> {
    grid.validate()?;
    let h = grid.spacing(params);
    let limit = params.dx() / lit(4.0);
    if h > limit {
        return Err(Error::GridTooCoarse {
            spacing: to_f64(h),
            limit: to_f64(limit),
        });
    }
    let nodes = grid.nodes(params);
    let n = nodes.len();
    let dp2 = params.dp() * params.dp();
    let pot = lit::<T>(2.0) * dp2 * dp2;
    let inv_h2 = T::one() / (h * h);
    let hop = cis(-params.p_mean() * h) * (-inv_h2 / lit(2.0));
    let mut m = DMatrix::zeros(n, n);
    for (j, &x) in nodes.iter().enumerate() {
        let d = x - params.x_mean();
        m[(j, j)] = creal(inv_h2 + pot * d * d);
        if j + 1 < n {
            m[(j, j + 1)] = hop;
            m[(j + 1, j)] = hop.conj();
        }
    }
    Ok(OperatorMatrix::new(m, "sigma (grid)"))
}

/// One eigenpair; eigenvectors are unit-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair<T: Real> {
    pub value: T,
    pub vector: DVector<Complex<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Largest dimension handled by the dense Hermitian solver.
    pub dense_limit: usize,
    /// Accepted `max |A - A^dagger|`.
    pub hermitian_tol: f64,
    pub iterative: LanczosOptions,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            dense_limit: 4096,
            hermitian_tol: 1e-10,
            iterative: LanczosOptions::default(),
        }
    }
}

/// The `k` smallest eigenpairs of a Hermitian operator, ascending.
pub fn eigensolve<T: Real>(op: &OperatorMatrix<T>, k: usize) -> Result<Vec<EigenPair<T>>> {
    eigensolve_with(op, k, &EigenOptions::default())
}

/// As [`eigensolve`]: tridiagonal operators go through bisection and inverse
/// iteration, others through the dense Hermitian solver up to
/// `dense_limit`, and Lanczos beyond.
pub fn eigensolve_with<T: Real>(
    op: &OperatorMatrix<T>,
    k: usize,
    opts: &EigenOptions,
) -> Result<Vec<EigenPair<T>>> {
    let n = op.dim();
    if k > n {
        return Err(Error::TooManyEigenpairs {
            requested: k,
            dim: n,
        });
    }
    let residual = to_f64(op.hermiticity_residual());
    if !(residual <= opts.hermitian_tol) {
        return Err(Error::NotHermitian { residual });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    if op.is_tridiagonal() {
        return Ok(tridiagonal_eigenpairs(&op.matrix, k));
    }
    if n <= opts.dense_limit {
        return Ok(dense_eigenpairs(&op.matrix, k));
    }
    lanczos_smallest(op, k, &opts.iterative)
}

fn dense_eigenpairs<T: Real>(m: &DMatrix<Complex<T>>, k: usize) -> Vec<EigenPair<T>> {
    // Symmetrize to remove sub-tolerance skew before the dense solve.
    let sym = (m + m.adjoint()) * creal(lit::<T>(0.5));
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    order
        .into_iter()
        .take(k)
        .map(|i| EigenPair {
            value: eig.eigenvalues[i],
            vector: eig.eigenvectors.column(i).into_owned(),
        })
        .collect()
}

/// Hermitian tridiagonal: a diagonal phase similarity makes the
/// off-diagonals real and non-negative, then bisection/inverse iteration.
fn tridiagonal_eigenpairs<T: Real>(m: &DMatrix<Complex<T>>, k: usize) -> Vec<EigenPair<T>> {
    let n = m.nrows();
    let mut phases = Vec::with_capacity(n);
    phases.push(cone::<T>());
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    for j in 0..n.saturating_sub(1) {
        let e = m[(j + 1, j)];
        let r = cabs(e);
        let unit = if r > T::zero() {
            e * creal(T::one() / r)
        } else {
            cone()
        };
        phases.push(phases[j] * unit);
        off.push(r);
    }
    let diag = (0..n).map(|i| m[(i, i)].re).collect();
    let tri = SymTridiagonal::new(diag, off);
    let (values, vectors) = tri.smallest_eigenpairs(k);
    values
        .into_iter()
        .zip(vectors)
        .map(|(value, w)| EigenPair {
            value,
            vector: DVector::from_fn(n, |i, _| phases[i] * creal(w[i])),
        })
        .collect()
}

/// Largest `|<u|v>|` normalized; 1 means equal up to a global phase.
pub fn cosine_similarity<T: Real>(u: &DVector<Complex<T>>, v: &DVector<Complex<T>>) -> T {
    let dot = u.dotc(v);
    cabs(dot) / (u.norm() * v.norm())
}
