//! Matrix-free smallest-eigenpair and smallest-singular-value solvers for
//! operators too large for dense factorizations.
//!
//! Lanczos with full reorthogonalization and locking: each cycle builds a
//! Krylov basis orthogonal to the already locked eigenvectors, takes the
//! smallest Ritz pair, locks it once its true residual `|Ay - theta y|` is
//! below tolerance and restarts from the remaining Ritz vectors.

use nalgebra::{Complex, DVector};

use crate::error::{Error, Result};
use crate::operator::EigenPair;
use crate::scalar::{creal, lit, to_f64, Real};
use crate::tridiag::SymTridiagonal;

/// Anything that can apply itself to a vector.
pub trait LinearOperator<T: Real> {
    fn dim(&self) -> usize;
    fn apply(&self, x: &DVector<Complex<T>>) -> DVector<Complex<T>>;

    /// `A^dagger x`; only needed for singular value solves.
    fn apply_adjoint(&self, _x: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        unimplemented!("adjoint action not provided for this operator")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Relative residual tolerance, `|Ay - theta y| <= tol * max(1, |theta|)`.
    pub tol: f64,
    /// Budget of operator applications.
    pub max_iter: usize,
    /// Krylov basis size per cycle.
    pub krylov_dim: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            krylov_dim: 80,
        }
    }
}

fn start_vector<T: Real>(n: usize, salt: usize) -> DVector<Complex<T>> {
    let v = DVector::from_fn(n, |i, _| {
        let t = ((i * 2_654_435_761 + salt * 40_503) % 10_007) as f64 / 10_007.0;
        creal(lit::<T>(0.25 + t))
    });
    let norm = v.norm();
    v / creal(norm)
}

fn orthogonalize<T: Real>(w: &mut DVector<Complex<T>>, basis: &[DVector<Complex<T>>]) {
    for _ in 0..2 {
        for b in basis {
            let c = b.dotc(w);
            w.axpy(-c, b, Complex::new(T::one(), T::zero()));
        }
    }
}

/// The `k` smallest eigenpairs of a Hermitian operator.
pub fn lanczos_smallest<T: Real, A: LinearOperator<T> + ?Sized>(
    op: &A,
    k: usize,
    opts: &LanczosOptions,
) -> Result<Vec<EigenPair<T>>> {
    lanczos_core(|x| op.apply(x), op.dim(), k, opts)
}

fn lanczos_core<T: Real, F>(
    apply: F,
    n: usize,
    k: usize,
    opts: &LanczosOptions,
) -> Result<Vec<EigenPair<T>>>
where
    F: Fn(&DVector<Complex<T>>) -> DVector<Complex<T>>,
{
    if k > n {
        return Err(Error::TooManyEigenpairs {
            requested: k,
            dim: n,
        });
    }
    let tol = lit::<T>(opts.tol);
    let mut locked: Vec<EigenPair<T>> = Vec::with_capacity(k);
    let mut locked_vecs: Vec<DVector<Complex<T>>> = Vec::with_capacity(k);
    let mut matvecs = 0usize;
    let mut last_residual: f64;
    let mut start = start_vector::<T>(n, 0);
    let mut restarts = 0usize;

    while locked.len() < k {
        orthogonalize(&mut start, &locked_vecs);
        let mut norm = start.norm();
        if norm <= lit::<T>(1e-12) {
            restarts += 1;
            start = start_vector(n, restarts);
            orthogonalize(&mut start, &locked_vecs);
            norm = start.norm();
        }
        start /= creal(norm);

        let m_max = opts.krylov_dim.max(2 * k + 10).min(n - locked_vecs.len());
        let mut basis: Vec<DVector<Complex<T>>> = vec![start.clone()];
        let mut alpha: Vec<T> = Vec::new();
        let mut beta: Vec<T> = Vec::new();
        for j in 0..m_max {
            let mut w = apply(&basis[j]);
            matvecs += 1;
            let a = basis[j].dotc(&w).re;
            alpha.push(a);
            orthogonalize(&mut w, &locked_vecs);
            orthogonalize(&mut w, &basis);
            let b = w.norm();
            if j + 1 == m_max || b <= lit::<T>(1e-14) * (a.abs() + T::one()) {
                break;
            }
            beta.push(b);
            basis.push(w / creal(b));
        }
        let m = alpha.len();
        beta.truncate(m.saturating_sub(1));
        let tri = SymTridiagonal::new(alpha, beta);
        let want = (k - locked.len()).min(m);
        let (thetas, svecs) = tri.smallest_eigenpairs(want);

        let ritz = |s: &Vec<T>| {
            let mut y = DVector::<Complex<T>>::zeros(n);
            for (coef, v) in s.iter().zip(&basis) {
                y.axpy(creal(*coef), v, Complex::new(T::one(), T::zero()));
            }
            let yn = y.norm();
            y / creal(yn)
        };

        let y0 = ritz(&svecs[0]);
        let ay = apply(&y0);
        matvecs += 1;
        let theta = y0.dotc(&ay).re;
        let res = (&ay - &y0 * creal(theta)).norm();
        last_residual = to_f64(res);
        if res <= tol * theta.abs().max(T::one()) {
            locked_vecs.push(y0.clone());
            locked.push(EigenPair {
                value: theta,
                vector: y0,
            });
            start = if thetas.len() > 1 {
                svecs[1..]
                    .iter()
                    .map(&ritz)
                    .fold(DVector::zeros(n), |acc, v| acc + v)
            } else {
                start_vector(n, locked.len())
            };
        } else {
            start = svecs
                .iter()
                .map(&ritz)
                .fold(DVector::zeros(n), |acc, v| acc + v);
        }
        if matvecs >= opts.max_iter && locked.len() < k {
            return Err(Error::ConvergenceFailure {
                iterations: matvecs,
                residual: last_residual,
            });
        }
    }
    locked.sort_by(|a, b| {
        a.value
            .partial_cmp(&b.value)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(locked)
}

/// Smallest singular triplet estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularPair<T: Real> {
    pub value: T,
    /// Right singular vector.
    pub vector: DVector<Complex<T>>,
}

/// The `k` smallest singular values of `A` from Lanczos on `A^dagger A`.
/// Accuracy of a singular value `s` is about `tol * |A|^2 / s`.
pub fn smallest_singular_values<T: Real, A: LinearOperator<T> + ?Sized>(
    op: &A,
    k: usize,
    opts: &LanczosOptions,
) -> Result<Vec<SingularPair<T>>> {
    let pairs = lanczos_core(|x| op.apply_adjoint(&op.apply(x)), op.dim(), k, opts)?;
    Ok(pairs
        .into_iter()
        .map(|p| SingularPair {
            value: p.value.max(T::zero()).sqrt(),
            vector: p.vector,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::GaussianParams;
    use crate::operator::{build_sigma_1d, BasisSpec, OperatorMatrix};
    use nalgebra::DMatrix;

    #[test]
    fn lanczos_matches_closed_form_dispersion_spectrum() {
        let params = GaussianParams::new(0.0, 0.0, 0.5).unwrap();
        let n = 120;
        let sigma = build_sigma_1d(&params, &BasisSpec::new(n).unwrap());
        let pairs = lanczos_smallest(&sigma, 4, &LanczosOptions::default()).unwrap();
        for (j, p) in pairs.iter().enumerate() {
            let want = (2 * j + 1) as f64 * 0.25;
            assert!((p.value - want).abs() < 1e-9, "{j}: {}", p.value);
        }
    }

    #[test]
    fn lanczos_handles_degenerate_spectrum() {
        let id = OperatorMatrix::<f64>::identity(30, "id");
        let pairs = lanczos_smallest(&id, 3, &LanczosOptions::default()).unwrap();
        assert_eq!(pairs.len(), 3);
        for p in &pairs {
            assert!((p.value - 1.0).abs() < 1e-12);
        }
        for i in 0..3 {
            for j in 0..i {
                assert!(pairs[i].vector.dotc(&pairs[j].vector).norm() < 1e-10);
            }
        }
    }

    struct Dense(DMatrix<Complex<f64>>);

    impl LinearOperator<f64> for Dense {
        fn dim(&self) -> usize {
            self.0.ncols()
        }
        fn apply(&self, x: &DVector<Complex<f64>>) -> DVector<Complex<f64>> {
            &self.0 * x
        }
        fn apply_adjoint(&self, x: &DVector<Complex<f64>>) -> DVector<Complex<f64>> {
            self.0.adjoint() * x
        }
    }

    #[test]
    fn smallest_singular_value_agrees_with_dense_svd() {
        let n = 40;
        let m = DMatrix::from_fn(n, n, |i, j| {
            let v = ((i * 31 + j * 17) % 23) as f64 / 23.0 - 0.5;
            Complex::new(
                v + if i == j { 2.0 } else { 0.0 },
                ((i + 2 * j) % 7) as f64 / 14.0,
            )
        });
        let svd = m.clone().singular_values();
        let smin = svd.iter().cloned().fold(f64::INFINITY, f64::min);
        let got = smallest_singular_values(
            &Dense(m),
            1,
            &LanczosOptions {
                tol: 1e-12,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(
            (got[0].value - smin).abs() < 1e-8,
            "{} vs {smin}",
            got[0].value
        );
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let params = GaussianParams::new(0.0, 0.0, 0.5).unwrap();
        let sigma = build_sigma_1d(&params, &BasisSpec::new(300).unwrap());
        let opts = LanczosOptions {
            tol: 1e-14,
            max_iter: 5,
            krylov_dim: 4,
        };
        assert!(matches!(
            lanczos_smallest(&sigma, 3, &opts),
            Err(Error::ConvergenceFailure { .. })
        ));
    }
}
