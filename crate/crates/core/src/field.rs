//! Scalar and fermion field equations on the five coordinates
//! `(x^0, x^1, x^2, x^3, tau)`.
//!
//! Operators live on a five-axis Hermite product basis (spacetime axes, then
//! the mass coordinate) with a trailing 32-dim spinor axis for the fermion
//! operator. Axis `mu` uses the family `(X^mu, -P_mu, sqrt(B_mumu))`: the
//! eigenfunctions of `i d/dx^mu - P_mu` carry the phase `exp(-i P_mu x^mu)`.
//! The tau axis likewise uses `(T, -M, dm)`.
//!
//! Pointwise residuals are evaluated analytically from the Hermite function
//! jet, never on a grid.

use nalgebra::{Complex, DMatrix, DVector, Matrix4};
use nalgebra_sparse::CsrMatrix;

use crate::clifford::{constraint_matrix, FactorMatrices, SPINOR_DIM};
use crate::error::{Error, Result};
use crate::hermite::{hermite_function_jet, GaussianParams, MAX_EXCITATION};
use crate::iterative::{smallest_singular_values, LanczosOptions, SingularPair};
use crate::kron::{
    csr_compress, csr_hermiticity_residual, csr_to_dense, interior_indices, multi_index, CMatrix,
    KronOperator, SparseOperator,
};
use crate::mass::{mass_ladder, MassSectorParams};
use crate::operator::{eigensolve, OperatorMatrix};
use crate::relativistic::{
    basis_width, check_dims, validate_mass_shell, DispersionTensor, FourMeans, Metric,
    SpacetimeLadders,
};
use crate::sampling::residual_points;
use crate::scalar::{cabs, ci, cis, cone, creal, czero, lit, to_f64, Real};

/// Largest allowed `g^{mu nu} P_mu P_nu - M^2` for a model.
pub const MASS_SHELL_TOL: f64 = 1e-10;

/// Largest allowed spectral mismatch of a resonant tuple.
pub const RESONANCE_TOL: f64 = 1e-12;

/// Dense factorizations are used up to this total dimension.
pub const DENSE_LIMIT: usize = 4096;

/// Number of field axes.
pub const FIELD_AXES: usize = 5;

/// Validated model: tensor, means and mass sector, on shell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig<T: Real = f64> {
    b: DispersionTensor<T>,
    means: FourMeans<T>,
    mass: MassSectorParams<T>,
    metric: Metric,
}

impl<T: Real> ModelConfig<T> {
    pub fn new(
        b: DispersionTensor<T>,
        means: FourMeans<T>,
        mass: MassSectorParams<T>,
    ) -> Result<Self> {
        let r = validate_mass_shell(&means, mass.mass())?;
        if r.abs() > lit(MASS_SHELL_TOL) {
            return Err(Error::OffShell(to_f64(r)));
        }
        Ok(Self {
            b,
            means,
            mass,
            metric: Metric,
        })
    }

    pub fn b(&self) -> &DispersionTensor<T> {
        &self.b
    }

    pub fn means(&self) -> &FourMeans<T> {
        &self.means
    }

    pub fn mass(&self) -> &MassSectorParams<T> {
        &self.mass
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn dm2(&self) -> T {
        self.mass.dm() * self.mass.dm()
    }

    /// The unvalidated operator model this configuration describes.
    pub fn model(&self) -> FieldModel<T> {
        FieldModel {
            b: *self.b.matrix(),
            dm2: self.dm2(),
            means: self.means,
            mass_mean: self.mass.mass(),
            tau_mean: self.mass.tau_mean(),
        }
    }

    /// Same model with positions `X^mu` and `T` shifted.
    pub fn shifted(&self, offset: [T; 5]) -> Result<Self> {
        let mut means = self.means;
        for mu in 0..4 {
            means.x[mu] += offset[mu];
        }
        let mass = MassSectorParams::new(
            self.mass.mass(),
            self.mass.tau_mean() + offset[4],
            self.mass.dm(),
        )?;
        Self::new(self.b, means, mass)
    }
}

/// Couplings and means entering the operators. Unlike [`ModelConfig`] the
/// tensor may be zero or indefinite and `dm2` may vanish, which the
/// factorization identity needs; basis widths then fall back to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldModel<T: Real = f64> {
    pub b: Matrix4<T>,
    pub dm2: T,
    pub means: FourMeans<T>,
    pub mass_mean: T,
    pub tau_mean: T,
}

impl<T: Real> FieldModel<T> {
    /// Momentum ground widths of the five axes.
    pub fn basis_widths(&self) -> [T; 5] {
        std::array::from_fn(|a| {
            if a < 4 {
                basis_width(self.b[(a, a)])
            } else {
                basis_width(self.dm2)
            }
        })
    }

    /// Family of axis `a` (`0..4` spacetime, `4` tau).
    pub fn axis_family(&self, a: usize) -> GaussianParams<T> {
        let w = self.basis_widths()[a];
        let (x, p) = if a < 4 {
            (self.means.x[a], -self.means.p[a])
        } else {
            (self.tau_mean, -self.mass_mean)
        };
        GaussianParams::new(x, p, w).expect("positive width and finite means")
    }

    /// `B_00 + sum_j B_jj + dm2`, or 1 when that vanishes.
    pub fn residual_scale(&self) -> T {
        let s = (0..4).fold(self.dm2, |acc, mu| acc + self.b[(mu, mu)]);
        if s > T::zero() {
            s
        } else {
            T::one()
        }
    }

    /// Centers and ground position widths of the five axes.
    pub fn envelope(&self) -> ([f64; 5], [f64; 5]) {
        let fams: Vec<_> = (0..5).map(|a| self.axis_family(a)).collect();
        (
            std::array::from_fn(|a| to_f64(fams[a].x_mean())),
            std::array::from_fn(|a| to_f64(fams[a].dx())),
        )
    }

    /// Gaussian envelope samples plus the 32 corners at two widths.
    pub fn sample_points(&self, seed: u64, count: usize) -> Vec<[f64; 5]> {
        let (c, s) = self.envelope();
        residual_points(c, s, seed, count)
    }
}

/// Multi-index `(n_0, n_1, n_2, n_3, k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumTuple {
    pub n: [usize; 4],
    pub k: usize,
    pub resonant: bool,
    /// `|(2n_0+1)B_00 - sum_j (2n_j+1)B_jj - (2k+1) dm2|`.
    pub residual: f64,
}

impl QuantumTuple {
    pub fn indices(&self) -> [usize; 5] {
        [self.n[0], self.n[1], self.n[2], self.n[3], self.k]
    }
}

/// Spectral mismatch of a tuple between the two sides of the scalar equation.
pub fn tuple_mismatch<T: Real>(cfg: &ModelConfig<T>, idx: [usize; 5]) -> Result<T> {
    let lhs =
        crate::relativistic::contracted_eigenvalue(cfg.b(), [idx[0], idx[1], idx[2], idx[3]])?;
    Ok(lhs - lit::<T>((2 * idx[4] + 1) as f64) * cfg.dm2())
}

/// All tuples with `n_mu <= max_n` whose contracted tensor eigenvalue equals
/// a mass dispersion eigenvalue `(2k+1) dm2`, in lexicographic order. `k` is
/// whatever the match requires; it is not bounded by `max_n`.
pub fn resonance_enumerate<T: Real>(
    cfg: &ModelConfig<T>,
    max_n: usize,
) -> Result<Vec<QuantumTuple>> {
    if !cfg.b().is_diagonal() {
        return Err(Error::NonDiagonalUnsupported);
    }
    let dm2 = cfg.dm2();
    let mut out = Vec::new();
    let r = max_n + 1;
    for flat in 0..r.pow(4) {
        let v = multi_index(&[r; 4], flat);
        let n = [v[0], v[1], v[2], v[3]];
        let lhs = crate::relativistic::contracted_eigenvalue(cfg.b(), n)?;
        let x = (lhs / dm2 - T::one()) / lit(2.0);
        if x < lit(-0.5) {
            continue;
        }
        let k = to_f64(x).round().max(0.0) as usize;
        let mismatch = to_f64((lhs - lit::<T>((2 * k + 1) as f64) * dm2).abs());
        if mismatch <= RESONANCE_TOL * to_f64(lhs.abs()).max(1.0) {
            out.push(QuantumTuple {
                n,
                k,
                resonant: true,
                residual: mismatch,
            });
        }
    }
    Ok(out)
}

/// Cutoffs of the five-axis product basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldBasis {
    cutoffs: [usize; 5],
}

impl FieldBasis {
    /// `cap` bounds the full dimension including `spinor` extra factor.
    pub fn new(cutoffs: [usize; 5], cap: usize, spinor: usize) -> Result<Self> {
        let dim = check_dims(&cutoffs, usize::MAX)?;
        let total = dim.saturating_mul(spinor.max(1));
        if total > cap {
            return Err(Error::DimensionCapExceeded { dim: total, cap });
        }
        Ok(Self { cutoffs })
    }

    pub fn cutoffs(&self) -> [usize; 5] {
        self.cutoffs
    }

    pub fn dim(&self) -> usize {
        self.cutoffs.iter().product()
    }

    /// Flat indices with every axis index below `N_a - exclude`.
    pub fn interior(&self, exclude: usize) -> Vec<usize> {
        interior_indices(&self.cutoffs, &[exclude; 5])
    }

    /// Whether a tuple lies in the interior excluding the top two indices.
    pub fn contains_interior(&self, idx: [usize; 5]) -> bool {
        idx.iter().zip(&self.cutoffs).all(|(&i, &n)| i + 2 < n)
    }
}

/// Ladder factors for one model and basis.
#[derive(Debug, Clone)]
pub struct FieldOperators<T: Real> {
    model: FieldModel<T>,
    basis: FieldBasis,
    mass_momentum: CMatrix<T>,
    mass_position: CMatrix<T>,
}

impl<T: Real> FieldOperators<T> {
    pub fn new(model: &FieldModel<T>, basis: &FieldBasis) -> Self {
        let w = model.basis_widths();
        let pair = mass_ladder(w[4], basis.cutoffs[4]);
        Self {
            model: *model,
            basis: *basis,
            mass_momentum: pair.momentum,
            mass_position: pair.position,
        }
    }

    fn spacetime(&self, dims: &[usize]) -> SpacetimeLadders<T> {
        let w = self.model.basis_widths();
        SpacetimeLadders::new(dims, [w[0], w[1], w[2], w[3]])
    }

    /// `g^{mu nu} Sigma_{mu nu} - (m2 - M^2)` on the five-axis basis.
    pub fn scalar(&self) -> KronOperator<T> {
        let dims = self.basis.cutoffs;
        let st = self.spacetime(&dims);
        let dm2 = self.model.dm2;
        let mass_disp = &self.mass_momentum * &self.mass_momentum * creal(lit::<T>(0.5))
            + &self.mass_position * &self.mass_position * creal(lit::<T>(2.0) * dm2 * dm2);
        st.contracted_sigma(&self.model.b)
            .plus(&KronOperator::embed(&dims, 4, &mass_disp, -cone::<T>()))
    }

    /// `alpha^mu pi_mu + 2 beta^mu B_{mu nu} xi^nu + s [zeta mu + 2 dm2 theta t]`
    /// on the basis with a trailing spinor axis; `s = -1` is the fermion
    /// operator, `s = +1` its factorization partner.
    pub fn dirac(&self, f: &FactorMatrices<T>, sign: T) -> KronOperator<T> {
        let c = self.basis.cutoffs;
        let dims = [c[0], c[1], c[2], c[3], c[4], SPINOR_DIM];
        let st = self.spacetime(&dims);
        let b = &self.model.b;
        let mut op = KronOperator::zero(&dims);
        for mu in 0..4 {
            op.push_term(cone(), &[(mu, st.momentum_factor(mu)), (5, &f.alpha[mu])]);
            for nu in 0..4 {
                if b[(mu, nu)] != T::zero() {
                    op.push_term(
                        creal(lit::<T>(2.0) * b[(mu, nu)]),
                        &[(nu, st.position_factor(nu)), (5, &f.beta[mu])],
                    );
                }
            }
        }
        op.push_term(creal(sign), &[(4, &self.mass_momentum), (5, &f.zeta)]);
        if self.model.dm2 != T::zero() {
            op.push_term(
                creal(sign * lit::<T>(2.0) * self.model.dm2),
                &[(4, &self.mass_position), (5, &f.theta)],
            );
        }
        op
    }
}

/// A flattened operator with its interior helpers.
#[derive(Debug, Clone)]
pub struct AssembledOperator<T: Real> {
    pub basis: FieldBasis,
    pub csr: CsrMatrix<Complex<T>>,
}

impl<T: Real> AssembledOperator<T> {
    pub fn dim(&self) -> usize {
        self.csr.nrows()
    }

    pub fn dense(&self) -> OperatorMatrix<T> {
        OperatorMatrix::new(csr_to_dense(&self.csr), "scalar field operator")
    }

    pub fn hermiticity_residual(&self) -> T {
        csr_hermiticity_residual(&self.csr)
    }
}

/// Interior spectrum summary of the scalar operator.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorSpectrum {
    pub eigenvalues: Vec<f64>,
    pub nullspace: usize,
    pub smallest_abs: f64,
}

impl<T: Real> AssembledOperator<T> {
    /// Eigenvalues of the interior compression (top two indices of every
    /// axis excluded) and the number within `tol` of zero.
    pub fn interior_spectrum(&self, tol: f64) -> Result<InteriorSpectrum> {
        let idx = self.basis.interior(2);
        if idx.is_empty() {
            return Ok(InteriorSpectrum {
                eigenvalues: vec![],
                nullspace: 0,
                smallest_abs: f64::INFINITY,
            });
        }
        let sub = OperatorMatrix::new(csr_compress(&self.csr, &idx), "interior");
        let pairs = eigensolve(&sub, idx.len())?;
        let eigenvalues: Vec<f64> = pairs.iter().map(|p| to_f64(p.value)).collect();
        Ok(InteriorSpectrum {
            nullspace: eigenvalues.iter().filter(|v| v.abs() <= tol).count(),
            smallest_abs: eigenvalues
                .iter()
                .map(|v| v.abs())
                .fold(f64::INFINITY, f64::min),
            eigenvalues,
        })
    }
}

/// `g^{mu nu} Sigma_{mu nu} - (m2 - M^2)` on the product basis.
pub fn assemble_scalar_operator<T: Real>(
    model: &FieldModel<T>,
    cutoffs: [usize; 5],
    cap: usize,
) -> Result<AssembledOperator<T>> {
    let basis = FieldBasis::new(cutoffs, cap, 1)?;
    let csr = FieldOperators::new(model, &basis).scalar().to_csr();
    Ok(AssembledOperator { basis, csr })
}

/// The fermion operator on (product basis) (x) C^32.
#[derive(Debug, Clone)]
pub struct FermionOperator<T: Real> {
    pub basis: FieldBasis,
    pub csr: CsrMatrix<Complex<T>>,
}

pub fn assemble_fermion_operator<T: Real>(
    model: &FieldModel<T>,
    factors: &FactorMatrices<T>,
    cutoffs: [usize; 5],
    cap: usize,
) -> Result<FermionOperator<T>> {
    let basis = FieldBasis::new(cutoffs, cap, SPINOR_DIM)?;
    let csr = FieldOperators::new(model, &basis)
        .dirac(factors, -T::one())
        .to_csr();
    Ok(FermionOperator { basis, csr })
}

impl<T: Real> FermionOperator<T> {
    pub fn dim(&self) -> usize {
        self.csr.nrows()
    }

    /// Entries coupling basis tuples that do not differ by exactly one step
    /// along exactly one axis.
    pub fn sparsity_violations(&self) -> usize {
        let dims = self.basis.cutoffs;
        self.csr
            .triplet_iter()
            .filter(|&(i, j, _)| {
                let a = multi_index(&dims, i / SPINOR_DIM);
                let b = multi_index(&dims, j / SPINOR_DIM);
                let steps: Vec<usize> = a.iter().zip(&b).map(|(x, y)| x.abs_diff(*y)).collect();
                !(steps.iter().sum::<usize>() == 1)
            })
            .count()
    }

    /// `|D - D^dagger|_F / |D|_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        let entries: std::collections::BTreeMap<(usize, usize), Complex<T>> = self
            .csr
            .triplet_iter()
            .map(|(i, j, v)| ((i, j), *v))
            .collect();
        let mut num = 0.0;
        let mut den = 0.0;
        for (&(i, j), &v) in &entries {
            let w = entries.get(&(j, i)).copied().unwrap_or_else(czero);
            num += to_f64(cabs(v - w.conj())).powi(2);
            den += to_f64(cabs(v)).powi(2);
        }
        // Entries whose transpose is structurally absent count twice.
        for (&(i, j), &v) in &entries {
            if !entries.contains_key(&(j, i)) {
                num += to_f64(cabs(v)).powi(2);
            }
        }
        if den == 0.0 {
            0.0
        } else {
            (num / den).sqrt()
        }
    }

    /// The `k` smallest singular values with right singular vectors: dense
    /// SVD up to [`DENSE_LIMIT`], Lanczos on `D^dagger D` beyond.
    pub fn smallest_singular(&self, k: usize) -> Result<Vec<SingularPair<T>>> {
        let n = self.dim();
        if k > n {
            return Err(Error::TooManyEigenpairs {
                requested: k,
                dim: n,
            });
        }
        if n <= DENSE_LIMIT {
            let svd = csr_to_dense(&self.csr).svd(false, true);
            let v_t = svd.v_t.expect("right singular vectors requested");
            let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
            order.sort_by(|&a, &b| {
                svd.singular_values[a]
                    .partial_cmp(&svd.singular_values[b])
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            Ok(order
                .into_iter()
                .take(k)
                .map(|i| SingularPair {
                    value: svd.singular_values[i],
                    vector: v_t.row(i).adjoint(),
                })
                .collect())
        } else {
            let op = SparseOperator::new(self.csr.clone());
            let opts = LanczosOptions {
                tol: 1e-8,
                ..LanczosOptions::default()
            };
            smallest_singular_values(&op, k, &opts)
        }
    }

    /// `D v` as a spinor coefficient vector.
    pub fn apply(&self, v: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        use crate::iterative::LinearOperator;
        SparseOperator::new(self.csr.clone()).apply(v)
    }
}

/// Smallest-singular-value analysis of the fermion operator.
#[derive(Debug, Clone)]
pub struct FermionSvd<T: Real = f64> {
    /// Total dimension of the square operator.
    pub dim: usize,
    /// Singular values in ascending order.
    pub singular_values: Vec<f64>,
    /// Number of singular values within the degeneracy tolerance of the
    /// smallest.
    pub multiplicity: usize,
    /// Unit right singular vector for the smallest value, chosen within the
    /// degenerate subspace to minimize the part of `D v` that falls outside
    /// the truncated basis.
    pub candidate: DVector<Complex<T>>,
    /// `|D v|` in the truncated basis.
    pub basis_residual: f64,
    /// Norm of the image components beyond the truncation edge.
    pub leakage: f64,
    /// Dimension of the subspace with `D v = 0` including the leak, up to
    /// the degeneracy tolerance.
    pub exact_kernel: usize,
}

impl<T: Real> FermionSvd<T> {
    pub fn smallest(&self) -> f64 {
        self.singular_values[0]
    }

    /// `sqrt(|D v|^2 + leakage^2)`: the L2 norm of the left side of the
    /// field equation for the candidate, since the basis is orthonormal.
    pub fn full_residual(&self) -> f64 {
        self.basis_residual.hypot(self.leakage)
    }
}

/// Part of the fermion operator that maps the basis with the given cutoffs
/// onto basis states just beyond it. Columns follow the flat order of the
/// original basis.
pub fn fermion_leak_block<T: Real>(
    model: &FieldModel<T>,
    f: &FactorMatrices<T>,
    cutoffs: [usize; 5],
) -> Result<CsrMatrix<Complex<T>>> {
    let ext: [usize; 5] = std::array::from_fn(|a| cutoffs[a] + 1);
    let big = assemble_fermion_operator(model, f, ext, usize::MAX)?;
    let n_ext: usize = ext.iter().product();
    let mut col_of = vec![usize::MAX; n_ext];
    for b in 0..cutoffs.iter().product() {
        col_of[crate::kron::flat_index(&ext, &multi_index(&cutoffs, b))] = b;
    }
    let mut coo = nalgebra_sparse::CooMatrix::new(
        n_ext * SPINOR_DIM,
        cutoffs.iter().product::<usize>() * SPINOR_DIM,
    );
    for (i, j, v) in big.csr.triplet_iter() {
        let (bi, bj) = (i / SPINOR_DIM, j / SPINOR_DIM);
        if col_of[bi] == usize::MAX && col_of[bj] != usize::MAX {
            coo.push(i, col_of[bj] * SPINOR_DIM + j % SPINOR_DIM, *v);
        }
    }
    Ok(CsrMatrix::from(&coo))
}

/// Dense SVD of the fermion operator and the least leaky smallest-value
/// singular vector. `degeneracy_tol` is relative to the largest singular
/// value.
pub fn fermion_svd<T: Real>(
    model: &FieldModel<T>,
    f: &FactorMatrices<T>,
    cutoffs: [usize; 5],
    cap: usize,
    degeneracy_tol: f64,
) -> Result<FermionSvd<T>> {
    let d = assemble_fermion_operator(model, f, cutoffs, cap)?;
    let n = d.dim();
    if n > DENSE_LIMIT {
        return Err(Error::DimensionCapExceeded {
            dim: n,
            cap: DENSE_LIMIT,
        });
    }
    let dense = csr_to_dense(&d.csr);
    let svd = dense.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[a]
            .partial_cmp(&svd.singular_values[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let singular_values: Vec<f64> = order
        .iter()
        .map(|&i| to_f64(svd.singular_values[i]))
        .collect();
    let smax = singular_values.last().copied().unwrap_or(0.0);
    let cut = singular_values[0] + degeneracy_tol * smax.max(1.0);
    let multiplicity = singular_values.iter().take_while(|&&s| s <= cut).count();
    let basis_vecs = DMatrix::from_columns(
        &order[..multiplicity]
            .iter()
            .map(|&i| v_t.row(i).adjoint())
            .collect::<Vec<_>>(),
    );

    let leak = fermion_leak_block(model, f, cutoffs)?;
    let leak_img = csr_times_dense(&leak, &basis_vecs);
    let inner = leak_img.clone().svd(false, true);
    let w_t = inner.v_t.expect("right singular vectors requested");
    let (mut best, mut best_val) = (0, f64::INFINITY);
    let mut exact_kernel = 0;
    let leak_cut = degeneracy_tol * smax.max(1.0);
    for (i, s) in inner.singular_values.iter().enumerate() {
        let s = to_f64(*s);
        if s <= leak_cut {
            exact_kernel += 1;
        }
        if s < best_val {
            best_val = s;
            best = i;
        }
    }
    // Columns beyond the rank of a wide image carry no singular value and
    // are exact null directions of the leak.
    exact_kernel += multiplicity.saturating_sub(inner.singular_values.len());
    let w = if multiplicity > inner.singular_values.len() {
        let full = leak_img.adjoint() * &leak_img;
        let eig = full.symmetric_eigen();
        let k = (0..multiplicity)
            .min_by(|&a, &b| {
                eig.eigenvalues[a]
                    .partial_cmp(&eig.eigenvalues[b])
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(0);
        eig.eigenvectors.column(k).into_owned()
    } else {
        w_t.row(best).adjoint()
    };
    let mut candidate = &basis_vecs * w;
    let norm = candidate.norm();
    candidate /= creal(norm);
    let basis_residual = to_f64((&dense * &candidate).norm());
    let leakage = to_f64(
        csr_times_dense(
            &leak,
            &DMatrix::from_column_slice(n, 1, candidate.as_slice()),
        )
        .norm(),
    );
    Ok(FermionSvd {
        dim: n,
        singular_values,
        multiplicity,
        candidate,
        basis_residual,
        leakage,
        exact_kernel,
    })
}

fn csr_times_dense<T: Real>(m: &CsrMatrix<Complex<T>>, x: &CMatrix<T>) -> CMatrix<T> {
    let mut out = DMatrix::zeros(m.nrows(), x.ncols());
    for (r, row) in m.row_iter().enumerate() {
        for (&c, v) in row.col_indices().iter().zip(row.values()) {
            for k in 0..x.ncols() {
                out[(r, k)] += *v * x[(c, k)];
            }
        }
    }
    out
}

/// Agreement of a pointwise residual with a basis residual, both already
/// normalized: each within `factor` of the other, up to an absolute floor
/// for values that are zero to rounding.
pub fn residuals_consistent(pointwise: f64, basis: f64, factor: f64, floor: f64) -> bool {
    pointwise <= factor * basis + floor && basis <= factor * pointwise + floor
}

/// Values of `chi`, `(i d/dx - P) chi` and `(i d/dx - P)^2 chi` for excitation
/// `n` of an axis family with momentum mean `-P`.
fn axis_jet<T: Real>(fam: &GaussianParams<T>, n: usize, x: T) -> Result<[Complex<T>; 3]> {
    if n > MAX_EXCITATION {
        return Err(Error::NotEvaluable(format!(
            "excitation {n} exceeds cap {MAX_EXCITATION}"
        )));
    }
    let s = fam.position_scale();
    let u = (x - fam.x_mean()) / s;
    let (psi, d1, d2) = hermite_function_jet(n, u);
    let e = cis(fam.p_mean() * x) / creal(s.sqrt());
    Ok([
        e * creal(psi),
        e * ci::<T>() * creal(d1 / s),
        e * creal(-d2 / (s * s)),
    ])
}

fn check_arity<T>(point: &[T]) -> Result<()> {
    if point.len() != FIELD_AXES {
        return Err(Error::WrongArity(point.len()));
    }
    Ok(())
}

/// Separable solution candidate `prod_mu chi_{n_mu}(x^mu) chi_k(tau)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarSolution<T: Real = f64> {
    pub tuple: QuantumTuple,
    pub model: FieldModel<T>,
}

impl<T: Real> ScalarSolution<T> {
    pub fn new(tuple: QuantumTuple, cfg: &ModelConfig<T>) -> Self {
        Self {
            tuple,
            model: cfg.model(),
        }
    }

    pub fn eval(&self, point: &[T]) -> Result<Complex<T>> {
        check_arity(point)?;
        let idx = self.tuple.indices();
        (0..5).try_fold(cone(), |acc, a| {
            Ok(acc * axis_jet(&self.model.axis_family(a), idx[a], point[a])?[0])
        })
    }

    /// Left side of the five-variable scalar equation (twice the operator)
    /// and the field value at `point`.
    pub fn lhs(&self, point: &[T]) -> Result<(Complex<T>, Complex<T>)> {
        check_arity(point)?;
        let idx = self.tuple.indices();
        let jets: Vec<[Complex<T>; 3]> = (0..5)
            .map(|a| axis_jet(&self.model.axis_family(a), idx[a], point[a]))
            .collect::<Result<_>>()?;
        let phi = jets.iter().fold(cone(), |acc, j| acc * j[0]);
        let others = |a: usize| {
            (0..5)
                .filter(|&b| b != a)
                .fold(cone::<T>(), |acc, b| acc * jets[b][0])
        };
        let m = &self.model;
        let xi: [T; 4] = std::array::from_fn(|mu| point[mu] - m.means.x[mu]);
        let four = lit::<T>(4.0);
        let mut lhs = czero::<T>();
        for mu in 0..4 {
            let bx = (0..4).fold(T::zero(), |acc, al| acc + m.b[(mu, al)] * xi[al]);
            let term = jets[mu][2] * others(mu) + phi * creal(four * bx * bx);
            lhs += term * creal(Metric::sign::<T>(mu));
        }
        let t = point[4] - m.tau_mean;
        lhs -= jets[4][2] * others(4) + phi * creal(four * m.dm2 * m.dm2 * t * t);
        Ok((lhs, phi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointwiseResidual {
    /// `max |LHS| / (scale * max |field|)`.
    pub normalized: f64,
    pub max_lhs: f64,
    pub max_field: f64,
    /// The field vanished at every point.
    pub degenerate: bool,
}

fn normalize(max_lhs: f64, max_field: f64, scale: f64) -> PointwiseResidual {
    let degenerate = max_field == 0.0;
    PointwiseResidual {
        normalized: if degenerate {
            0.0
        } else {
            max_lhs / (scale * max_field)
        },
        max_lhs,
        max_field,
        degenerate,
    }
}

pub fn scalar_residual_pointwise<T: Real, P: AsRef<[T]>>(
    sol: &ScalarSolution<T>,
    points: &[P],
) -> Result<PointwiseResidual> {
    let mut max_lhs = 0.0_f64;
    let mut max_field = 0.0_f64;
    for p in points {
        let (lhs, phi) = sol.lhs(p.as_ref())?;
        max_lhs = max_lhs.max(to_f64(cabs(lhs)));
        max_field = max_field.max(to_f64(cabs(phi)));
    }
    Ok(normalize(
        max_lhs,
        max_field,
        to_f64(sol.model.residual_scale()),
    ))
}

/// 32-component field given by coefficients over (product basis) (x) C^32,
/// spinor index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorCandidate<T: Real = f64> {
    pub cutoffs: [usize; 5],
    pub coeffs: DVector<Complex<T>>,
}

impl<T: Real> SpinorCandidate<T> {
    pub fn new(cutoffs: [usize; 5], coeffs: DVector<Complex<T>>) -> Result<Self> {
        let want = cutoffs.iter().product::<usize>() * SPINOR_DIM;
        if coeffs.len() != want {
            return Err(Error::InvalidParameter(format!(
                "spinor coefficients have length {}, basis needs {want}",
                coeffs.len()
            )));
        }
        if coeffs
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidParameter(
                "spinor coefficients must be finite".into(),
            ));
        }
        Ok(Self { cutoffs, coeffs })
    }

    pub fn zero(cutoffs: [usize; 5]) -> Self {
        let n = cutoffs.iter().product::<usize>() * SPINOR_DIM;
        Self {
            cutoffs,
            coeffs: DVector::zeros(n),
        }
    }

    /// Multiplies every coefficient by `u` on the spinor index.
    pub fn rotated(&self, u: &CMatrix<T>) -> Self {
        let mut c = self.coeffs.clone();
        let blocks = c.len() / SPINOR_DIM;
        for b in 0..blocks {
            let v = u * self.coeffs.rows(b * SPINOR_DIM, SPINOR_DIM);
            c.rows_mut(b * SPINOR_DIM, SPINOR_DIM).copy_from(&v);
        }
        Self {
            cutoffs: self.cutoffs,
            coeffs: c,
        }
    }

    fn jets(&self, model: &FieldModel<T>, point: &[T]) -> Result<Vec<Vec<[Complex<T>; 3]>>> {
        check_arity(point)?;
        (0..5)
            .map(|a| {
                let fam = model.axis_family(a);
                (0..self.cutoffs[a])
                    .map(|n| axis_jet(&fam, n, point[a]))
                    .collect()
            })
            .collect()
    }

    pub fn eval(&self, model: &FieldModel<T>, point: &[T]) -> Result<DVector<Complex<T>>> {
        let jets = self.jets(model, point)?;
        let mut psi = DVector::zeros(SPINOR_DIM);
        for b in 0..self.cutoffs.iter().product() {
            let idx = multi_index(&self.cutoffs, b);
            let w = (0..5).fold(cone::<T>(), |acc, a| acc * jets[a][idx[a]][0]);
            psi.axpy(w, &self.coeffs.rows(b * SPINOR_DIM, SPINOR_DIM), cone());
        }
        Ok(psi)
    }

    /// Left side of the five-variable fermion equation and the field at
    /// `point`.
    pub fn lhs(
        &self,
        model: &FieldModel<T>,
        f: &FactorMatrices<T>,
        point: &[T],
    ) -> Result<(DVector<Complex<T>>, DVector<Complex<T>>)> {
        let jets = self.jets(model, point)?;
        let xi: [T; 4] = std::array::from_fn(|mu| point[mu] - model.means.x[mu]);
        let bx: [T; 4] = std::array::from_fn(|mu| {
            (0..4).fold(T::zero(), |acc, nu| acc + model.b[(mu, nu)] * xi[nu])
        });
        let t = point[4] - model.tau_mean;
        let zero = || DVector::<Complex<T>>::zeros(SPINOR_DIM);
        let mut va: Vec<DVector<Complex<T>>> = (0..5).map(|_| zero()).collect();
        let mut vp = zero();
        for b in 0..self.cutoffs.iter().product() {
            let idx = multi_index(&self.cutoffs, b);
            let c = self.coeffs.rows(b * SPINOR_DIM, SPINOR_DIM);
            let vals: Vec<Complex<T>> = (0..5).map(|a| jets[a][idx[a]][0]).collect();
            let prod = vals.iter().fold(cone::<T>(), |acc, v| acc * v);
            vp.axpy(prod, &c, cone());
            for (a, acc) in va.iter_mut().enumerate() {
                let w = (0..5)
                    .filter(|&o| o != a)
                    .fold(jets[a][idx[a]][1], |w, o| w * vals[o]);
                acc.axpy(w, &c, cone());
            }
        }
        let mut lhs = zero();
        let two = lit::<T>(2.0);
        for mu in 0..4 {
            lhs += &f.alpha[mu] * &va[mu];
            lhs += &f.beta[mu] * &vp * creal(two * bx[mu]);
        }
        lhs -= &f.zeta * &va[4];
        lhs -= &f.theta * &vp * creal(two * model.dm2 * t);
        Ok((lhs, vp))
    }
}

/// Normalized pointwise residual of the fermion equation.
pub fn fermion_residual_pointwise<T: Real, P: AsRef<[T]>>(
    cand: &SpinorCandidate<T>,
    model: &FieldModel<T>,
    f: &FactorMatrices<T>,
    points: &[P],
) -> Result<PointwiseResidual> {
    let mut max_lhs = 0.0_f64;
    let mut max_field = 0.0_f64;
    for p in points {
        let (lhs, psi) = cand.lhs(model, f, p.as_ref())?;
        max_lhs = max_lhs.max(to_f64(lhs.norm()));
        max_field = max_field.max(to_f64(psi.norm()));
    }
    Ok(normalize(
        max_lhs,
        max_field,
        to_f64(model.residual_scale()),
    ))
}

/// Result of comparing `1/2 D1 D2` with the scalar operator.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationReport<T: Real = f64> {
    /// Interior basis tuples checked (top index of every axis excluded).
    pub blocks: usize,
    /// Largest difference between any interior diagonal block and the first.
    pub block_spread: f64,
    /// Largest entry of the interior coupling different basis tuples.
    pub off_block_max: f64,
    /// Largest entry of `first block - expected constant`.
    pub constant_deviation: f64,
    /// Largest entry of `1/2 D1 D2 - S (x) I` over the whole basis, edge
    /// included.
    pub full_max_abs: f64,
    /// `-i (beta^mu alpha^nu B_{mu nu} - theta zeta dm2)`.
    pub expected_constant: CMatrix<T>,
}

impl<T: Real> FactorizationReport<T> {
    pub fn pass(&self, tol: f64) -> bool {
        self.blocks > 0
            && self.block_spread <= tol
            && self.off_block_max <= tol
            && self.constant_deviation <= tol
    }
}

/// `1/2 D1 D2 - (scalar operator) (x) I_32` on the first-order interior of
/// the basis.
///
/// The truncated commutator `[a, a^dagger]` equals the identity except on
/// the top index, so the first-order cross terms reproduce the canonical
/// commutators everywhere below it.
pub fn factorization_product_check<T: Real>(
    model: &FieldModel<T>,
    f: &FactorMatrices<T>,
    cutoffs: [usize; 5],
    cap: usize,
) -> Result<FactorizationReport<T>> {
    let basis = FieldBasis::new(cutoffs, cap, SPINOR_DIM)?;
    let ops = FieldOperators::new(model, &basis);
    let d1 = ops.dirac(f, T::one());
    let d2 = ops.dirac(f, -T::one());
    let scalar = ops.scalar().tensor(&KronOperator::identity(&[SPINOR_DIM]));
    let diff = d1
        .compose(&d2)
        .scaled(creal(lit::<T>(0.5)))
        .minus(&scalar)
        .to_csr();

    let expected = constraint_matrix(f, &model.b, model.dm2) * (-ci::<T>());
    let interior = basis.interior(1);
    let mut block_of = vec![usize::MAX; basis.dim()];
    for (k, &b) in interior.iter().enumerate() {
        block_of[b] = k;
    }
    let mut blocks = vec![DMatrix::<Complex<T>>::zeros(SPINOR_DIM, SPINOR_DIM); interior.len()];
    let mut off_block_max = 0.0_f64;
    let mut full_max_abs = 0.0_f64;
    for (i, j, v) in diff.triplet_iter() {
        full_max_abs = full_max_abs.max(to_f64(cabs(*v)));
        let (bi, bj) = (i / SPINOR_DIM, j / SPINOR_DIM);
        if block_of[bi] == usize::MAX || block_of[bj] == usize::MAX {
            continue;
        }
        if bi == bj {
            blocks[block_of[bi]][(i % SPINOR_DIM, j % SPINOR_DIM)] += *v;
        } else {
            off_block_max = off_block_max.max(to_f64(cabs(*v)));
        }
    }
    let max_abs = |m: &CMatrix<T>| m.iter().fold(0.0_f64, |w, z| w.max(to_f64(cabs(*z))));
    let (block_spread, constant_deviation) = match blocks.first() {
        Some(first) => (
            blocks
                .iter()
                .map(|b| max_abs(&(b - first)))
                .fold(0.0, f64::max),
            max_abs(&(first - &expected)),
        ),
        None => (0.0, f64::INFINITY),
    };
    Ok(FactorizationReport {
        blocks: interior.len(),
        block_spread,
        off_block_max,
        constant_deviation,
        full_max_abs,
        expected_constant: expected,
    })
}

/// `|m^2 - p.p|`: the Klein-Gordon operator on a plane wave `exp(-i p.x)`.
pub fn kg_baseline_residual<T: Real>(p: &[T; 4], m: T) -> T {
    (m * m - Metric::dot(p, p)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{build_factor_matrices, build_gammas};
    use crate::relativistic::on_shell;

    fn config(diag: [f64; 4], dm: f64, mass: f64) -> ModelConfig<f64> {
        let b = DispersionTensor::from_diagonal(diag).unwrap();
        let p = on_shell(mass, [0.3, -0.2, 0.1]).unwrap();
        let means = FourMeans::new([0.5, -0.3, 0.2, 1.0], p);
        ModelConfig::new(b, means, MassSectorParams::new(mass, 0.4, dm).unwrap()).unwrap()
    }

    #[test]
    fn model_requires_mass_shell() {
        let b = DispersionTensor::from_diagonal([4.0, 1.0, 1.0, 1.0]).unwrap();
        let means = FourMeans::new([0.0; 4], [2.0, 0.0, 0.0, 0.0]);
        let mass = MassSectorParams::new(1.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            ModelConfig::new(b, means, mass),
            Err(Error::OffShell(_))
        ));
    }

    #[test]
    fn resonance_examples() {
        let cfg = config([4.0, 1.0, 1.0, 1.0], 1.0, 1.0);
        let tuples = resonance_enumerate(&cfg, 2).unwrap();
        let has = |n: [usize; 4], k| tuples.iter().any(|t| t.n == n && t.k == k);
        assert!(has([0, 0, 0, 0], 0));
        assert!(has([1, 1, 0, 0], 3));
        for t in &tuples {
            assert!(t.residual <= RESONANCE_TOL);
            assert!(tuple_mismatch(&cfg, t.indices()).unwrap().abs() < 1e-12);
        }
        let mut oracle = Vec::new();
        for flat in 0..81 {
            let v = multi_index(&[3; 4], flat);
            let lhs =
                4.0 * (2 * v[0] + 1) as f64 - (1..4).map(|j| (2 * v[j] + 1) as f64).sum::<f64>();
            for k in 0..100 {
                if ((2 * k + 1) as f64 - lhs).abs() < 1e-12 {
                    oracle.push(([v[0], v[1], v[2], v[3]], k));
                }
            }
        }
        let got: Vec<_> = tuples.iter().map(|t| (t.n, t.k)).collect();
        assert_eq!(got, oracle);
        let flat = config([1.0, 1.0, 1.0, 1.0], 1.0, 1.0);
        assert!(resonance_enumerate(&flat, 4).unwrap().is_empty());
    }

    #[test]
    fn resonant_tuple_solves_the_scalar_equation() {
        let cfg = config([4.0, 1.0, 1.0, 1.0], 1.0, 1.0);
        let model = cfg.model();
        let points = model.sample_points(11, 100);
        for t in resonance_enumerate(&cfg, 2).unwrap() {
            let sol = ScalarSolution::new(t, &cfg);
            let r = scalar_residual_pointwise(&sol, &points).unwrap();
            assert!(r.normalized <= 1e-9, "{:?} {}", t.indices(), r.normalized);
        }
        let off = QuantumTuple {
            n: [0; 4],
            k: 1,
            resonant: false,
            residual: 2.0,
        };
        let r = scalar_residual_pointwise(&ScalarSolution::new(off, &cfg), &points).unwrap();
        assert!((r.normalized - 4.0 / 8.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn translation_covariance() {
        let cfg = config([4.0, 1.0, 1.0, 1.0], 1.0, 1.0);
        let t = QuantumTuple {
            n: [1, 0, 2, 0],
            k: 1,
            resonant: false,
            residual: 0.0,
        };
        let shift = [0.7, -1.1, 0.3, 2.0, -0.4];
        let moved = cfg.shifted(shift).unwrap();
        let pts = cfg.model().sample_points(3, 20);
        let moved_pts: Vec<[f64; 5]> = pts
            .iter()
            .map(|p| std::array::from_fn(|a| p[a] + shift[a]))
            .collect();
        let a = scalar_residual_pointwise(&ScalarSolution::new(t, &cfg), &pts).unwrap();
        let b = scalar_residual_pointwise(&ScalarSolution::new(t, &moved), &moved_pts).unwrap();
        assert!((a.normalized - b.normalized).abs() < 1e-12);
    }

    #[test]
    fn five_variables_required() {
        let cfg = config([4.0, 1.0, 1.0, 1.0], 1.0, 1.0);
        let sol = ScalarSolution::new(resonance_enumerate(&cfg, 0).unwrap()[0], &cfg);
        assert!(matches!(sol.eval(&[0.0; 4]), Err(Error::WrongArity(4))));
        assert!(matches!(sol.eval(&[0.0; 6]), Err(Error::WrongArity(6))));
        let cand = SpinorCandidate::<f64>::zero([2; 5]);
        assert!(matches!(
            cand.eval(&cfg.model(), &[0.0; 3]),
            Err(Error::WrongArity(3))
        ));
    }

    #[test]
    fn scalar_operator_nullspace_matches_resonances() {
        let cfg = config([4.0, 1.0, 1.0, 1.0], 1.0, 1.0);
        let op = assemble_scalar_operator(&cfg.model(), [3, 3, 3, 3, 6], 1 << 16).unwrap();
        assert!(op.hermiticity_residual() <= 1e-12);
        let spec = op.interior_spectrum(1e-10).unwrap();
        let count = resonance_enumerate(&cfg, 0)
            .unwrap()
            .iter()
            .filter(|t| op.basis.contains_interior(t.indices()))
            .count();
        assert_eq!(spec.nullspace, count);
        assert_eq!(count, 1);

        let flat = config([1.0, 1.0, 1.0, 1.0], 1.0, 1.0);
        let op = assemble_scalar_operator(&flat.model(), [3, 3, 3, 3, 6], 1 << 16).unwrap();
        let spec = op.interior_spectrum(1e-10).unwrap();
        assert_eq!(spec.nullspace, 0);
        assert!(spec.smallest_abs >= 2.0 - 1e-10);
    }

    #[test]
    fn fermion_operator_structure() {
        let f = build_factor_matrices(&build_gammas::<f64>());
        let cfg = config([1.0, 0.25, 0.25, 0.25], 0.5, 1.0);
        let d = assemble_fermion_operator(&cfg.model(), &f, [2, 2, 2, 2, 2], 1 << 20).unwrap();
        assert_eq!(d.dim(), 1024);
        assert_eq!(d.sparsity_violations(), 0);
        let h = d.hermiticity_defect();
        assert!(h > 0.0 && h.is_finite());
        assert!(matches!(
            assemble_fermion_operator(&cfg.model(), &f, [2, 2, 2, 2, 2], 1000),
            Err(Error::DimensionCapExceeded { .. })
        ));
    }

    #[test]
    fn factorization_identity_with_diagonal_tensor() {
        let f = build_factor_matrices(&build_gammas::<f64>());
        let cfg = config([1.0, 0.25, 0.25, 0.25], 0.5, 1.0);
        let rep = factorization_product_check(&cfg.model(), &f, [2; 5], 1 << 20).unwrap();
        assert_eq!(rep.blocks, 1);
        assert!(rep.pass(1e-10), "{rep:?}");
        let wider =
            factorization_product_check(&cfg.model(), &f, [3, 2, 3, 2, 3], 1 << 20).unwrap();
        assert_eq!(wider.blocks, 8);
        assert!(wider.pass(1e-10));
    }

    #[test]
    fn factorization_identity_with_correlated_tensor() {
        let f = build_factor_matrices(&build_gammas::<f64>());
        let mut m = Matrix4::from_diagonal(&nalgebra::Vector4::new(2.0, 0.7, 0.9, 0.5));
        m[(0, 2)] = 0.3;
        m[(2, 0)] = 0.3;
        m[(1, 3)] = -0.2;
        m[(3, 1)] = -0.2;
        let model = FieldModel {
            b: m,
            dm2: 0.6,
            means: FourMeans::new([0.1, 0.2, -0.3, 0.4], [1.5, 0.2, 0.1, -0.3]),
            mass_mean: 1.2,
            tau_mean: -0.5,
        };
        let rep = factorization_product_check(&model, &f, [3, 2, 2, 3, 2], 1 << 20).unwrap();
        assert!(rep.pass(1e-10), "{rep:?}");
    }

    #[test]
    fn free_case_factorizes_exactly() {
        let f = build_factor_matrices(&build_gammas::<f64>());
        let model = FieldModel {
            b: Matrix4::zeros(),
            dm2: 0.0,
            means: FourMeans::new([0.0; 4], [1.0, 0.0, 0.0, 0.0]),
            mass_mean: 1.0,
            tau_mean: 0.0,
        };
        let rep = factorization_product_check(&model, &f, [2; 5], 1 << 20).unwrap();
        assert_eq!(rep.full_max_abs, 0.0);
        assert!(rep.expected_constant.iter().all(|z| *z == czero()));
    }

    #[test]
    fn zero_and_phase_rotated_candidates() {
        let f = build_factor_matrices(&build_gammas::<f64>());
        let cfg = config([1.0, 0.25, 0.25, 0.25], 0.5, 1.0);
        let model = cfg.model();
        let pts = model.sample_points(5, 10);
        let zero = SpinorCandidate::zero([2; 5]);
        let r = fermion_residual_pointwise(&zero, &model, &f, &pts).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.normalized, 0.0);
        let coeffs = DVector::from_fn(1024, |i, _| {
            Complex::new((i % 7) as f64 - 3.0, (i % 5) as f64 * 0.1)
        });
        let cand = SpinorCandidate::new([2; 5], coeffs).unwrap();
        let u = DMatrix::<Complex<f64>>::identity(32, 32) * Complex::from_polar(1.0, 0.7);
        let a = fermion_residual_pointwise(&cand, &model, &f, &pts).unwrap();
        let b = fermion_residual_pointwise(&cand.rotated(&u), &model, &f, &pts).unwrap();
        assert!((a.normalized - b.normalized).abs() < 1e-12);
    }

    #[test]
    fn pointwise_lhs_matches_basis_action_away_from_the_edge() {
        // A candidate supported below the top index of every axis is mapped by
        // the truncated operator without loss, so the pointwise left side equals
        // the function represented by D v.
        let f = build_factor_matrices(&build_gammas::<f64>());
        let cfg = config([1.0, 0.5, 0.7, 0.3], 0.8, 1.0);
        let model = cfg.model();
        let cut = [3, 2, 3, 2, 3];
        let d = assemble_fermion_operator(&model, &f, cut, 1 << 20).unwrap();
        let mut v = DVector::zeros(d.dim());
        for b in interior_indices(&cut, &[1; 5]) {
            for s in 0..SPINOR_DIM {
                v[b * SPINOR_DIM + s] =
                    Complex::new(((b + 3 * s) % 5) as f64 - 2.0, (s % 3) as f64);
            }
        }
        let cand = SpinorCandidate::new(cut, v.clone()).unwrap();
        let image = SpinorCandidate::new(cut, d.apply(&v)).unwrap();
        for p in model.sample_points(9, 5) {
            let (lhs, _) = cand.lhs(&model, &f, &p).unwrap();
            let want = image.eval(&model, &p).unwrap();
            assert!((lhs - &want).norm() < 1e-11 * want.norm().max(1.0));
        }
    }

    #[test]
    fn kg_baseline_examples() {
        assert!(kg_baseline_residual(&[2f64.sqrt(), 0.0, 0.0, 1.0], 1.0) < 1e-15);
        assert_eq!(kg_baseline_residual(&[1.0, 0.0, 0.0, 0.0], 2.0), 3.0);
        assert_eq!(kg_baseline_residual(&[1.0, 0.0, 0.0, 1.0], 0.0), 0.0);
    }
}
