//! Real symmetric tridiagonal eigensolver: Sturm-sequence bisection for
//! eigenvalues and inverse iteration for eigenvectors.
//!
//! Used for Gauss-Hermite nodes (Jacobi matrices), for finite-difference
//! grids (which are tridiagonal after a diagonal phase similarity) and for
//! the projected problem inside the Lanczos iteration.

use crate::scalar::{from_usize, lit, safe_min, Real};

#[derive(Debug, Clone)]
pub struct SymTridiagonal<T> {
    diag: Vec<T>,
    off: Vec<T>,
}

impl<T: Real> SymTridiagonal<T> {
    /// `off[i]` couples rows `i` and `i + 1`.
    pub fn new(diag: Vec<T>, off: Vec<T>) -> Self {
        assert!(!diag.is_empty(), "empty tridiagonal matrix");
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length mismatch");
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn off(&self) -> &[T] {
        &self.off
    }

    fn gershgorin(&self) -> (T, T) {
        let n = self.dim();
        let mut lo = T::max_value().unwrap();
        let mut hi = T::min_value().unwrap();
        for i in 0..n {
            let mut r = T::zero();
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn norm_estimate(&self) -> T {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(safe_min::<T>())
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: T) -> usize {
        let pivmin = safe_min::<T>() * lit(1e4)
            + self.off.iter().fold(T::zero(), |m, &e| m.max(e * e))
                * T::default_epsilon()
                * T::default_epsilon();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < T::zero() {
            count += 1;
        }
        for i in 1..self.dim() {
            let e = self.off[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }

    /// The `j`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, j: usize) -> T {
        assert!(j < self.dim());
        if self.dim() == 1 {
            return self.diag[0];
        }
        let (mut lo, mut hi) = self.gershgorin();
        let pad = self.norm_estimate() * T::default_epsilon() * lit(8.0);
        lo -= pad;
        hi += pad;
        let two = lit::<T>(2.0);
        let eps = T::default_epsilon();
        for _ in 0..256 {
            let mid = (lo + hi) / two;
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= two * eps * lo.abs().max(hi.abs()) {
                break;
            }
        }
        (lo + hi) / two
    }

    /// The `k` smallest eigenvalues in ascending order.
    pub fn smallest_eigenvalues(&self, k: usize) -> Vec<T> {
        (0..k.min(self.dim())).map(|j| self.eigenvalue(j)).collect()
    }

    pub fn all_eigenvalues(&self) -> Vec<T> {
        self.smallest_eigenvalues(self.dim())
    }

    /// Solves `(A - sigma I) y = b` in place with partial pivoting.
    fn shifted_solve(&self, sigma: T, b: &mut [T]) {
        let n = self.dim();
        let tiny = self.norm_estimate() * T::default_epsilon();
        if n == 1 {
            let mut d = self.diag[0] - sigma;
            if d.abs() < tiny {
                d = tiny;
            }
            b[0] /= d;
            return;
        }
        let mut d: Vec<T> = self.diag.iter().map(|&v| v - sigma).collect();
        let mut dl = self.off.clone();
        let mut du = self.off.clone();
        let mut du2 = vec![T::zero(); n.saturating_sub(2)];
        let mut pivoted = vec![false; n - 1];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i].abs() < tiny {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                pivoted[i] = true;
            }
        }
        if d[n - 1].abs() < tiny {
            d[n - 1] = tiny;
        }
        for i in 0..n - 1 {
            if pivoted[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - dl[i] * b[i];
            } else {
                b[i + 1] -= dl[i] * b[i];
            }
        }
        b[n - 1] /= d[n - 1];
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
        }
    }

    /// Eigenpairs for the `k` smallest eigenvalues. Eigenvectors are
    /// orthonormal; vectors inside a cluster are re-orthogonalized.
    pub fn smallest_eigenpairs(&self, k: usize) -> (Vec<T>, Vec<Vec<T>>) {
        let values = self.smallest_eigenvalues(k);
        let n = self.dim();
        let cluster_gap = self.norm_estimate() * lit(1e-3);
        let mut vectors: Vec<Vec<T>> = Vec::with_capacity(values.len());
        for (j, &lambda) in values.iter().enumerate() {
            // Deterministic, non-degenerate start vector.
            let mut v: Vec<T> = (0..n)
                .map(|i| {
                    let t = from_usize::<T>((i * 7919 + j * 104_729) % 1009) / lit(1009.0);
                    lit::<T>(0.5) + t
                })
                .collect();
            for _ in 0..4 {
                self.shifted_solve(lambda, &mut v);
                for (w, &mu) in vectors.iter().zip(values.iter()) {
                    if (mu - lambda).abs() <= cluster_gap {
                        let dot = dot(w, &v);
                        for (vi, &wi) in v.iter_mut().zip(w.iter()) {
                            *vi -= dot * wi;
                        }
                    }
                }
                normalize(&mut v);
            }
            vectors.push(v);
        }
        (values, vectors)
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

fn normalize<T: Real>(v: &mut [T]) {
    let norm = dot(v, v).sqrt();
    if norm > T::zero() {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn second_difference(n: usize) -> SymTridiagonal<f64> {
        SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn second_difference_spectrum_is_closed_form() {
        let n = 50;
        let t = second_difference(n);
        let vals = t.all_eigenvalues();
        for (j, v) in vals.iter().enumerate() {
            let theta = std::f64::consts::PI * (j + 1) as f64 / (n + 1) as f64;
            let exact = 2.0 - 2.0 * theta.cos();
            assert!((v - exact).abs() < 1e-13, "{j}: {v} vs {exact}");
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal_and_satisfy_equation() {
        let t = second_difference(40);
        let (vals, vecs) = t.smallest_eigenpairs(6);
        for (i, v) in vecs.iter().enumerate() {
            let av = t.apply(v);
            let res = av
                .iter()
                .zip(v)
                .map(|(a, x)| (a - vals[i] * x).abs())
                .fold(0.0, f64::max);
            assert!(res < 1e-12);
            for (j, w) in vecs.iter().enumerate() {
                let d = dot(v, w);
                let expect: f64 = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_diagonal_gets_orthogonal_vectors() {
        let t = SymTridiagonal::new(vec![1.0_f64; 5], vec![0.0; 4]);
        let (vals, vecs) = t.smallest_eigenpairs(3);
        assert!(vals.iter().all(|v| (v - 1.0).abs() < 1e-14));
        for i in 0..3 {
            for j in 0..3 {
                let expect: f64 = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&vecs[i], &vecs[j]) - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn single_entry() {
        let t = SymTridiagonal::new(vec![3.5_f64], vec![]);
        let (vals, vecs) = t.smallest_eigenpairs(1);
        assert_eq!(vals, vec![3.5]);
        assert!((vecs[0][0].abs() - 1.0).abs() < 1e-15);
    }
}
