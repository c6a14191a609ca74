//! Gamma matrices and the 32x32 factor matrices used to take the square root
//! of the scalar operator.
//!
//! Dirac representation, entry by entry (`sigma_j` are the Pauli matrices):
//!
//! ```text
//! gamma^0 = [[I, 0], [0, -I]]     gamma^j = [[0, sigma_j], [-sigma_j, 0]]
//! gamma^5 = i gamma^0 gamma^1 gamma^2 gamma^3 = [[0, I], [I, 0]]
//! ```
//!
//! Factor matrices:
//!
//! ```text
//! alpha^mu = gamma^mu (x) I4 (x) I2
//! beta^mu  = gamma^5 (x) gamma^mu (x) I2
//! zeta     = I4 (x) I4 (x) diag(1, -1)
//! theta    = I4 (x) I4 (x) [[0, 1], [1, 0]]
//! ```

use nalgebra::{Complex, DMatrix, Matrix4};

use crate::relativistic::Metric;
use crate::scalar::{cabs, ci, cone, cplx, creal, czero, lit, to_f64, Real};

pub type CMatrix<T> = DMatrix<Complex<T>>;

/// Spinor dimension of the factor matrices.
pub const SPINOR_DIM: usize = 32;

/// Tolerance for the algebraic relations.
pub const RELATION_TOL: f64 = 1e-13;

fn max_abs<T: Real>(m: &CMatrix<T>) -> f64 {
    m.iter().fold(0.0, |w, z| w.max(to_f64(cabs(*z))))
}

fn anticommutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b + b * a
}

fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b - b * a
}

fn pauli<T: Real>(j: usize) -> CMatrix<T> {
    let (o, z, i) = (cone::<T>(), czero::<T>(), ci::<T>());
    match j {
        1 => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        2 => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        3 => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => DMatrix::identity(2, 2),
    }
}

fn blocks<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>, c: &CMatrix<T>, d: &CMatrix<T>) -> CMatrix<T> {
    let mut m = DMatrix::zeros(4, 4);
    m.view_mut((0, 0), (2, 2)).copy_from(a);
    m.view_mut((0, 2), (2, 2)).copy_from(b);
    m.view_mut((2, 0), (2, 2)).copy_from(c);
    m.view_mut((2, 2), (2, 2)).copy_from(d);
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaSet<T: Real = f64> {
    pub gamma: [CMatrix<T>; 4],
    pub gamma5: CMatrix<T>,
}

impl<T: Real> GammaSet<T> {
    /// Conjugates every matrix by a unitary, `U g U^dagger`.
    pub fn conjugated(&self, u: &CMatrix<T>) -> Self {
        let ud = u.adjoint();
        Self {
            gamma: std::array::from_fn(|mu| u * &self.gamma[mu] * &ud),
            gamma5: u * &self.gamma5 * &ud,
        }
    }

    /// Largest residual of `{g^mu, g^nu} = 2 g^{mu nu} I`.
    pub fn clifford_residual(&self) -> f64 {
        let id = DMatrix::<Complex<T>>::identity(4, 4);
        let mut worst: f64 = 0.0;
        for mu in 0..4 {
            for nu in 0..4 {
                let target = &id * creal(lit::<T>(2.0 * Metric::upper(mu, nu)));
                worst = worst.max(max_abs(
                    &(anticommutator(&self.gamma[mu], &self.gamma[nu]) - target),
                ));
            }
        }
        worst
    }

    /// Largest residual of `(g^5)^2 = I` and `{g^5, g^mu} = 0`.
    pub fn gamma5_residual(&self) -> f64 {
        let id = DMatrix::<Complex<T>>::identity(4, 4);
        let mut worst = max_abs(&(&self.gamma5 * &self.gamma5 - id));
        for g in &self.gamma {
            worst = worst.max(max_abs(&anticommutator(&self.gamma5, g)));
        }
        worst
    }

    /// `gamma^mu p_mu` for a covariant four-vector.
    pub fn slash(&self, p: &[T; 4]) -> CMatrix<T> {
        (0..4).fold(DMatrix::zeros(4, 4), |acc, mu| {
            acc + &self.gamma[mu] * creal(p[mu])
        })
    }
}

/// Dirac-representation gammas with `gamma^5 = i g0 g1 g2 g3`.
pub fn build_gammas<T: Real>() -> GammaSet<T> {
    let id = pauli::<T>(0);
    let zero = DMatrix::zeros(2, 2);
    let g0 = blocks(&id, &zero, &zero, &(-&id));
    let gj = |j| {
        let s = pauli::<T>(j);
        blocks(&zero, &s, &(-&s), &zero)
    };
    let gamma = [g0, gj(1), gj(2), gj(3)];
    let gamma5 = &gamma[0] * &gamma[1] * &gamma[2] * &gamma[3] * ci::<T>();
    GammaSet { gamma, gamma5 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorMatrices<T: Real = f64> {
    pub alpha: [CMatrix<T>; 4],
    pub beta: [CMatrix<T>; 4],
    pub zeta: CMatrix<T>,
    pub theta: CMatrix<T>,
}

pub fn build_factor_matrices<T: Real>(g: &GammaSet<T>) -> FactorMatrices<T> {
    let i2 = DMatrix::<Complex<T>>::identity(2, 2);
    let i4 = DMatrix::<Complex<T>>::identity(4, 4);
    let i16 = i4.kronecker(&i4);
    let alpha = std::array::from_fn(|mu| g.gamma[mu].kronecker(&i4).kronecker(&i2));
    let beta = std::array::from_fn(|mu| g.gamma5.kronecker(&g.gamma[mu]).kronecker(&i2));
    FactorMatrices {
        alpha,
        beta,
        zeta: i16.kronecker(&pauli::<T>(3)),
        theta: i16.kronecker(&pauli::<T>(1)),
    }
}

/// One algebraic relation and its largest entrywise residual.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationRow {
    pub id: &'static str,
    /// Identity tag from the report vocabulary.
    pub eq_ref: &'static str,
    pub max_abs_residual: f64,
}

impl RelationRow {
    pub fn pass(&self) -> bool {
        self.max_abs_residual <= RELATION_TOL
    }
}

/// Residuals of the ten relations the factor matrices must satisfy.
pub fn relation_report<T: Real>(f: &FactorMatrices<T>) -> Vec<RelationRow> {
    let n = f.zeta.nrows();
    let id = DMatrix::<Complex<T>>::identity(n, n);
    let metric_anti = |m: &[CMatrix<T>; 4]| {
        let mut w: f64 = 0.0;
        for mu in 0..4 {
            for nu in 0..4 {
                let target = &id * creal(lit::<T>(2.0 * Metric::upper(mu, nu)));
                w = w.max(max_abs(&(anticommutator(&m[mu], &m[nu]) - target)));
            }
        }
        w
    };
    let over = |m: &[CMatrix<T>; 4], g: &dyn Fn(&CMatrix<T>) -> CMatrix<T>| {
        m.iter().fold(0.0_f64, |w, x| w.max(max_abs(&g(x))))
    };
    let mut mixed: f64 = 0.0;
    for mu in 0..4 {
        for nu in 0..4 {
            mixed = mixed.max(max_abs(&anticommutator(&f.alpha[mu], &f.beta[nu])));
        }
    }
    let row = |id, eq_ref, v| RelationRow {
        id,
        eq_ref,
        max_abs_residual: v,
    };
    vec![
        row(
            "alpha-anticommutator",
            "alpha-clifford",
            metric_anti(&f.alpha),
        ),
        row("beta-anticommutator", "beta-clifford", metric_anti(&f.beta)),
        row("alpha-beta-anticommutator", "alpha-beta-anticommute", mixed),
        row(
            "zeta-square",
            "zeta-involution",
            max_abs(&(&f.zeta * &f.zeta - &id)),
        ),
        row(
            "theta-square",
            "theta-involution",
            max_abs(&(&f.theta * &f.theta - &id)),
        ),
        row(
            "zeta-theta-anticommutator",
            "zeta-theta-anticommute",
            max_abs(&anticommutator(&f.zeta, &f.theta)),
        ),
        row(
            "zeta-alpha-commutator",
            "zeta-alpha-commute",
            over(&f.alpha, &|a| commutator(&f.zeta, a)),
        ),
        row(
            "theta-alpha-commutator",
            "theta-alpha-commute",
            over(&f.alpha, &|a| commutator(&f.theta, a)),
        ),
        row(
            "zeta-beta-commutator",
            "zeta-beta-commute",
            over(&f.beta, &|b| commutator(&f.zeta, b)),
        ),
        row(
            "theta-beta-commutator",
            "theta-beta-commute",
            over(&f.beta, &|b| commutator(&f.theta, b)),
        ),
    ]
}

/// `sum_{mu nu} beta^mu alpha^nu B_{mu nu} - theta zeta dm2`.
pub fn constraint_matrix<T: Real>(f: &FactorMatrices<T>, b: &Matrix4<T>, dm2: T) -> CMatrix<T> {
    let n = f.zeta.nrows();
    let mut r = &f.theta * &f.zeta * creal(-dm2);
    for mu in 0..4 {
        for nu in 0..4 {
            if b[(mu, nu)] != T::zero() {
                r += &f.beta[mu] * &f.alpha[nu] * creal(b[(mu, nu)]);
            }
        }
    }
    debug_assert_eq!(r.nrows(), n);
    r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintResidual {
    pub frobenius: f64,
    pub max_abs: f64,
}

pub fn constraint_residual<T: Real>(
    f: &FactorMatrices<T>,
    b: &Matrix4<T>,
    dm2: T,
) -> ConstraintResidual {
    let r = constraint_matrix(f, b, dm2);
    ConstraintResidual {
        frobenius: to_f64(
            r.iter()
                .fold(T::zero(), |s, z| s + z.re * z.re + z.im * z.im)
                .sqrt(),
        ),
        max_abs: max_abs(&r),
    }
}

/// `32 (sum_mu B_mumu^2 + dm2^2)`: the squared Frobenius norm of the
/// constraint residual for a diagonal tensor, since the terms are
/// trace-orthogonal.
pub fn diagonal_constraint_norm_sq(diag: [f64; 4], dm2: f64) -> f64 {
    SPINOR_DIM as f64 * (diag.iter().map(|d| d * d).sum::<f64>() + dm2 * dm2)
}

/// Parameter order of the linear constraint map: the ten entries `B_{mu nu}`
/// with `mu <= nu` row by row, then `dm2`.
pub fn constraint_parameter_labels() -> Vec<String> {
    let mut v = Vec::new();
    for mu in 0..4 {
        for nu in mu..4 {
            v.push(format!("B{mu}{nu}"));
        }
    }
    v.push("dm2".into());
    v
}

/// Tensor and `dm2` from the 11 map coordinates.
pub fn constraint_parameters_to_tensor(x: &[f64]) -> (Matrix4<f64>, f64) {
    let mut b = Matrix4::zeros();
    let mut k = 0;
    for mu in 0..4 {
        for nu in mu..4 {
            b[(mu, nu)] = x[k];
            b[(nu, mu)] = x[k];
            k += 1;
        }
    }
    (b, x[10])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSolution {
    /// Singular values of the stacked real map, descending.
    pub singular_values: Vec<f64>,
    /// Unit-norm map coordinates minimizing the residual.
    pub minimizer: Vec<f64>,
    /// Frobenius residual at the minimizer.
    pub residual: f64,
}

impl ConstraintSolution {
    pub fn smallest(&self) -> f64 {
        *self.singular_values.last().expect("eleven singular values")
    }
}

/// Real `2*32*32 x 11` matrix of the constraint map; column `k` is the
/// residual produced by unit coordinate `k`, real parts stacked over
/// imaginary parts.
pub fn constraint_map(f: &FactorMatrices<f64>) -> DMatrix<f64> {
    let n = f.zeta.nrows() * f.zeta.ncols();
    let mut a = DMatrix::zeros(2 * n, 11);
    for k in 0..11 {
        let mut x = [0.0; 11];
        x[k] = 1.0;
        let (b, dm2) = constraint_parameters_to_tensor(&x);
        let r = constraint_matrix(f, &b, dm2);
        for (i, z) in r.iter().enumerate() {
            a[(i, k)] = z.re;
            a[(n + i, k)] = z.im;
        }
    }
    a
}

/// Singular values of the constraint map and the unit-norm coordinates that
/// minimize the residual. A positive smallest singular value means the
/// constraint has no nontrivial exact solution with these matrices.
pub fn constraint_solve(f: &FactorMatrices<f64>) -> ConstraintSolution {
    let a = constraint_map(f);
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let last = *order.last().expect("non-empty");
    let mut minimizer: Vec<f64> = v_t.row(last).iter().cloned().collect();
    if let Some(pivot) = minimizer
        .iter()
        .cloned()
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
    {
        if pivot < 0.0 {
            minimizer.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let (b, dm2) = constraint_parameters_to_tensor(&minimizer);
    let residual = constraint_residual(f, &b, dm2).frobenius;
    ConstraintSolution {
        singular_values,
        minimizer,
        residual,
    }
}

/// Smallest singular value of the constraint map from the eigenvalues of
/// its 11x11 Gram matrix; an independent route to the same number.
pub fn constraint_gram_smallest(f: &FactorMatrices<f64>) -> f64 {
    let a = constraint_map(f);
    let gram = a.transpose() * &a;
    gram.symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracBaseline {
    /// Smallest singular value of `gamma^mu p_mu - m`.
    pub smallest_singular_value: f64,
    /// Largest entry of `(gp + m)(gp - m) - (p.p - m^2) I`.
    pub factorization_residual: f64,
}

/// Plane-wave check of the Dirac operator at covariant momentum `p`.
pub fn dirac_baseline_residual<T: Real>(g: &GammaSet<T>, p: &[T; 4], m: T) -> DiracBaseline {
    let id = DMatrix::<Complex<T>>::identity(4, 4);
    let slash = g.slash(p);
    let minus = &slash - &id * creal(m);
    let plus = &slash + &id * creal(m);
    let sv = minus.clone().singular_values();
    let smin = sv
        .iter()
        .cloned()
        .fold(T::max_value().unwrap_or_else(|| lit(f64::MAX)), T::min);
    let p2 = Metric::dot(p, p);
    let fact = plus * &minus - id * creal(p2 - m * m);
    DiracBaseline {
        smallest_singular_value: to_f64(smin),
        factorization_residual: max_abs(&fact),
    }
}

/// Unitary from the QR factorization of a matrix with entries drawn from
/// `next`, phases fixed so the result is deterministic.
pub fn unitary_from<T: Real>(n: usize, mut next: impl FnMut() -> f64) -> CMatrix<T> {
    let m = DMatrix::from_fn(n, n, |_, _| {
        let re = next();
        let im = next();
        cplx(lit::<T>(re), lit::<T>(im))
    });
    let qr = m.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        let a = cabs(d);
        if a > T::zero() {
            let phase = d / creal(a);
            for i in 0..n {
                u[(i, j)] *= phase;
            }
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trace(m: &CMatrix<f64>) -> Complex<f64> {
        (0..m.nrows()).map(|i| m[(i, i)]).sum()
    }

    #[test]
    fn gamma_examples() {
        let g = build_gammas::<f64>();
        let id = DMatrix::<Complex<f64>>::identity(4, 4);
        assert!(
            max_abs(&(anticommutator(&g.gamma[0], &g.gamma[0]) - &id * cplx(2.0, 0.0))) < 1e-15
        );
        assert!(max_abs(&anticommutator(&g.gamma[1], &g.gamma[2])) < 1e-15);
        assert!(max_abs(&(&g.gamma5 * &g.gamma5 - &id)) < 1e-15);
        assert!(g.clifford_residual() < 1e-15);
        assert!(g.gamma5_residual() < 1e-15);
        let expect5 = blocks(
            &pauli(0),
            &DMatrix::zeros(2, 2),
            &DMatrix::zeros(2, 2),
            &pauli(0),
        );
        let swapped = {
            let mut m = DMatrix::zeros(4, 4);
            m.view_mut((0, 2), (2, 2)).copy_from(&pauli::<f64>(0));
            m.view_mut((2, 0), (2, 2)).copy_from(&pauli::<f64>(0));
            m
        };
        assert_ne!(g.gamma5, expect5);
        assert!(max_abs(&(&g.gamma5 - swapped)) < 1e-15);
    }

    #[test]
    fn factor_matrix_structure() {
        let f = build_factor_matrices(&build_gammas::<f64>());
        for m in f.alpha.iter().chain(&f.beta).chain([&f.zeta, &f.theta]) {
            assert_eq!(m.shape(), (32, 32));
            assert!(trace(m).norm() < 1e-15);
        }
        for i in 0..32 {
            let want = if i % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(f.zeta[(i, i)], cplx(want, 0.0));
        }
        assert!(max_abs(&(&f.alpha[0] - f.alpha[0].adjoint())) < 1e-15);
        for j in 1..4 {
            assert!(max_abs(&(&f.alpha[j] + f.alpha[j].adjoint())) < 1e-15);
        }
    }

    #[test]
    fn ten_relations_hold() {
        let f = build_factor_matrices(&build_gammas::<f64>());
        let rows = relation_report(&f);
        assert_eq!(rows.len(), 10);
        for r in &rows {
            assert!(r.pass(), "{} {}", r.id, r.max_abs_residual);
        }
    }

    #[test]
    fn relations_survive_unitary_conjugation() {
        for seed in [1u64, 2, 3] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = unitary_from::<f64>(4, || rng.random::<f64>() - 0.5);
            let id = DMatrix::<Complex<f64>>::identity(4, 4);
            assert!(max_abs(&(&u * u.adjoint() - id)) < 1e-14);
            let g = build_gammas::<f64>().conjugated(&u);
            assert!(g.clifford_residual() < 1e-13);
            let f = build_factor_matrices(&g);
            for r in relation_report(&f) {
                assert!(r.pass(), "seed {seed} {} {}", r.id, r.max_abs_residual);
            }
        }
    }

    #[test]
    fn constraint_residual_examples() {
        let f = build_factor_matrices(&build_gammas::<f64>());
        let z = constraint_residual(&f, &Matrix4::zeros(), 0.0);
        assert_eq!(z.frobenius, 0.0);
        let d = [1.0, 0.25, 0.25, 0.25];
        let b = Matrix4::from_diagonal(&d.into());
        let r = constraint_residual(&f, &b, 0.25);
        assert!((r.frobenius - 40f64.sqrt()).abs() < 1e-12);
        assert!((r.frobenius.powi(2) - diagonal_constraint_norm_sq(d, 0.25)).abs() < 1e-10);
        let r3 = constraint_residual(&f, &(b * 3.0), 0.75);
        assert!((r3.frobenius - 3.0 * r.frobenius).abs() < 1e-12);
    }

    #[test]
    fn constraint_map_spectrum() {
        let f = build_factor_matrices(&build_gammas::<f64>());
        let sol = constraint_solve(&f);
        assert_eq!(sol.singular_values.len(), 11);
        assert_eq!(constraint_parameter_labels().len(), 11);
        assert!(sol.smallest() > 0.1);
        assert!((sol.smallest() - constraint_gram_smallest(&f)).abs() < 1e-10);
        assert!((sol.residual - sol.smallest()).abs() < 1e-12);
        let norm: f64 = sol.minimizer.iter().map(|v| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dirac_baseline_examples() {
        let g = build_gammas::<f64>();
        let rest = dirac_baseline_residual(&g, &[1.0, 0.0, 0.0, 0.0], 1.0);
        assert!(rest.smallest_singular_value < 1e-14);
        let moving = dirac_baseline_residual(&g, &[2f64.sqrt(), 0.0, 0.0, 1.0], 1.0);
        assert!(moving.smallest_singular_value < 1e-12);
        let off = dirac_baseline_residual(&g, &[2.0, 0.0, 0.0, 0.0], 1.0);
        assert!((off.smallest_singular_value - 1.0).abs() < 1e-14);
        for b in [rest, moving, off] {
            assert!(b.factorization_residual < 1e-14);
        }
    }
}
