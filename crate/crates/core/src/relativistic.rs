//! Minkowski metric, the momentum dispersion-codispersion tensor, mean
//! four-vectors and the tensor dispersion operator on a product Hermite basis.
//!
//! Each spacetime axis carries a conjugate pair `(x^mu, p_mu)` with
//! `[p_mu, x^mu] = +i`, built from ladder matrices of width `sqrt(B_mumu)`.
//! Operators are assembled as [`KronOperator`]s over a list of axis cutoffs
//! whose first four entries are the spacetime axes; further trailing axes
//! (the mass coordinate, spinor index) are left as identity.

use nalgebra::{Complex, Matrix4};

use crate::error::{Error, Result};
use crate::kron::{csr_deviation_from_scaled_identity, interior_mask, CMatrix, KronOperator};
use crate::operator::{Convention, LadderPair, OperatorMatrix};
use crate::scalar::{ci, cone, creal, czero, lit, to_f64, Real};

/// Default cap on the dimension of a product basis.
pub const DEFAULT_DIMENSION_CAP: usize = 1 << 16;

/// Fixed metric `diag(+1, -1, -1, -1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Metric;

impl Metric {
    pub const SIGNS: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

    /// `g_{mu nu}`.
    pub fn lower(mu: usize, nu: usize) -> f64 {
        if mu == nu {
            Self::SIGNS[mu]
        } else {
            0.0
        }
    }

    /// `g^{mu nu}`; numerically the same as the lowered form.
    pub fn upper(mu: usize, nu: usize) -> f64 {
        Self::lower(mu, nu)
    }

    pub fn sign<T: Real>(mu: usize) -> T {
        lit(Self::SIGNS[mu])
    }

    /// `g^{mu nu} a_mu b_nu`.
    pub fn dot<T: Real>(a: &[T; 4], b: &[T; 4]) -> T {
        (0..4).fold(T::zero(), |acc, mu| {
            acc + Self::sign::<T>(mu) * a[mu] * b[mu]
        })
    }

    pub fn raise<T: Real>(a: &[T; 4]) -> [T; 4] {
        std::array::from_fn(|mu| Self::sign::<T>(mu) * a[mu])
    }

    pub fn lower_index<T: Real>(a: &[T; 4]) -> [T; 4] {
        Self::raise(a)
    }
}

/// Symmetric, positive definite 4x4 tensor `B_{mu nu}` (momentum squared).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionTensor<T: Real = f64> {
    matrix: Matrix4<T>,
    diagonal: bool,
}

impl<T: Real> DispersionTensor<T> {
    pub fn new(matrix: Matrix4<T>) -> Result<Self> {
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("B has non-finite entries".into()));
        }
        let scale = matrix.iter().fold(T::zero(), |a, v| a.max(v.abs()));
        let asym = (matrix - matrix.transpose())
            .iter()
            .fold(T::zero(), |a, v| a.max(v.abs()));
        if asym > lit::<T>(1e-14) * scale {
            return Err(Error::InvalidParameter(format!(
                "B not symmetric (asymmetry {asym})"
            )));
        }
        for mu in 0..4 {
            if !(matrix[(mu, mu)] > T::zero()) {
                return Err(Error::InvalidParameter(format!(
                    "B diagonal entry {mu} must be strictly positive, got {}",
                    matrix[(mu, mu)]
                )));
            }
        }
        let sym = (matrix + matrix.transpose()) * lit::<T>(0.5);
        if sym.cholesky().is_none() {
            return Err(Error::InvalidParameter("B not positive definite".into()));
        }
        let diagonal = (0..4).all(|i| (0..4).all(|j| i == j || sym[(i, j)] == T::zero()));
        Ok(Self {
            matrix: sym,
            diagonal,
        })
    }

    pub fn from_diagonal(d: [T; 4]) -> Result<Self> {
        Self::new(Matrix4::from_diagonal(&d.into()))
    }

    pub fn matrix(&self) -> &Matrix4<T> {
        &self.matrix
    }

    pub fn get(&self, mu: usize, nu: usize) -> T {
        self.matrix[(mu, nu)]
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    /// Per-axis momentum ground widths `sqrt(B_mumu)`.
    pub fn axis_widths(&self) -> [T; 4] {
        std::array::from_fn(|mu| self.matrix[(mu, mu)].sqrt())
    }
}

/// Mean position `X^mu` (contravariant) and momentum `P_mu` (covariant).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FourMeans<T: Real = f64> {
    pub x: [T; 4],
    pub p: [T; 4],
}

impl<T: Real> FourMeans<T> {
    pub fn new(x: [T; 4], p: [T; 4]) -> Self {
        Self { x, p }
    }
}

/// `g^{mu nu} P_mu P_nu - M^2`.
pub fn validate_mass_shell<T: Real>(means: &FourMeans<T>, mass: T) -> Result<T> {
    if mass < T::zero() {
        return Err(Error::InvalidParameter(format!(
            "mass must be >= 0, got {mass}"
        )));
    }
    Ok(Metric::dot(&means.p, &means.p) - mass * mass)
}

/// Covariant momentum with `P_0 = +sqrt(M^2 + |P|^2)`.
pub fn on_shell<T: Real>(mass: T, spatial: [T; 3]) -> Result<[T; 4]> {
    if mass < T::zero() {
        return Err(Error::InvalidParameter(format!(
            "mass must be >= 0, got {mass}"
        )));
    }
    let p2 = spatial.iter().fold(mass * mass, |a, &v| a + v * v);
    Ok([p2.sqrt(), spatial[0], spatial[1], spatial[2]])
}

/// Invariant mass `sqrt(g^{mu nu} P_mu P_nu)` of a timelike or null momentum.
pub fn invariant_mass<T: Real>(p: &[T; 4]) -> Result<T> {
    let s = Metric::dot(p, p);
    if s < T::zero() {
        return Err(Error::SpacelikeMomentum(to_f64(s)));
    }
    Ok(s.sqrt())
}

/// Cutoffs of the four-axis Hermite product basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductBasisSpec {
    cutoffs: [usize; 4],
}

impl ProductBasisSpec {
    pub fn new(cutoffs: [usize; 4], cap: usize) -> Result<Self> {
        check_dims(&cutoffs, cap)?;
        Ok(Self { cutoffs })
    }

    pub fn cutoffs(&self) -> [usize; 4] {
        self.cutoffs
    }

    pub fn dim(&self) -> usize {
        self.cutoffs.iter().product()
    }

    /// Flat indices away from the truncation edge (top two per axis).
    pub fn interior_mask(&self) -> Vec<bool> {
        interior_mask(&self.cutoffs, &[2; 4])
    }
}

/// Checks every cutoff is at least 2 and the product stays under `cap`.
pub fn check_dims(cutoffs: &[usize], cap: usize) -> Result<usize> {
    if let Some(&c) = cutoffs.iter().find(|&&c| c < 2) {
        return Err(Error::InvalidParameter(format!(
            "basis cutoff must be >= 2, got {c}"
        )));
    }
    let dim = cutoffs
        .iter()
        .try_fold(1usize, |acc, &c| acc.checked_mul(c))
        .unwrap_or(usize::MAX);
    if dim > cap {
        return Err(Error::DimensionCapExceeded { dim, cap });
    }
    Ok(dim)
}

/// Basis width for a coupling entry: `sqrt(b)` when positive, 1 otherwise.
/// A zero coupling leaves the basis free to use any width.
pub fn basis_width<T: Real>(b: T) -> T {
    if b > T::zero() {
        b.sqrt()
    } else {
        T::one()
    }
}

/// Centered spacetime operators `p_mu - P_mu` and `x^mu - X^mu` embedded in a
/// product basis whose first four axes are spacetime.
#[derive(Debug, Clone)]
pub struct SpacetimeLadders<T: Real> {
    dims: Vec<usize>,
    pairs: Vec<LadderPair<T>>,
}

impl<T: Real> SpacetimeLadders<T> {
    /// `widths[mu]` is the momentum ground width of axis `mu`.
    pub fn new(dims: &[usize], widths: [T; 4]) -> Self {
        assert!(dims.len() >= 4, "need four spacetime axes");
        let pairs = (0..4)
            .map(|mu| LadderPair::new(widths[mu], dims[mu], Convention::Covariant))
            .collect();
        Self {
            dims: dims.to_vec(),
            pairs,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn momentum_factor(&self, mu: usize) -> &CMatrix<T> {
        &self.pairs[mu].momentum
    }

    pub fn position_factor(&self, mu: usize) -> &CMatrix<T> {
        &self.pairs[mu].position
    }

    /// `p_mu - P_mu`.
    pub fn momentum(&self, mu: usize) -> KronOperator<T> {
        KronOperator::embed(&self.dims, mu, &self.pairs[mu].momentum, cone())
    }

    /// `x^mu - X^mu`.
    pub fn position(&self, mu: usize) -> KronOperator<T> {
        KronOperator::embed(&self.dims, mu, &self.pairs[mu].position, cone())
    }

    /// `sum_alpha b[(mu, alpha)] (x^alpha - X^alpha)`.
    pub fn coupled_position(&self, b: &Matrix4<T>, mu: usize) -> KronOperator<T> {
        let mut op = KronOperator::zero(&self.dims);
        for alpha in 0..4 {
            let c = b[(mu, alpha)];
            if c != T::zero() {
                op.push_term(creal(c), &[(alpha, &self.pairs[alpha].position)]);
            }
        }
        op
    }

    /// `Sigma_{mu nu} = 1/2 pi_mu pi_nu + 2 (B xi)_mu (B xi)_nu`.
    pub fn sigma(&self, b: &Matrix4<T>, mu: usize, nu: usize) -> KronOperator<T> {
        let half = creal(lit::<T>(0.5));
        let kinetic = self.momentum(mu).compose(&self.momentum(nu)).scaled(half);
        let pot = self
            .coupled_position(b, mu)
            .compose(&self.coupled_position(b, nu))
            .scaled(creal(lit(2.0)));
        kinetic.plus(&pot)
    }

    /// `g^{mu nu} Sigma_{mu nu}`.
    pub fn contracted_sigma(&self, b: &Matrix4<T>) -> KronOperator<T> {
        (0..4).fold(KronOperator::zero(&self.dims), |acc, mu| {
            acc.plus(&self.sigma(b, mu, mu).scaled(creal(Metric::sign(mu))))
        })
    }
}

fn ladders_for<T: Real>(b: &DispersionTensor<T>, basis: &ProductBasisSpec) -> SpacetimeLadders<T> {
    let m = b.matrix();
    SpacetimeLadders::new(
        &basis.cutoffs(),
        std::array::from_fn(|mu| basis_width(m[(mu, mu)])),
    )
}

/// `Sigma_{mu nu}` flattened on the four-axis product basis. The means only
/// relocate the well; the centered operators do not depend on them.
pub fn build_sigma_tensor<T: Real>(
    mu: usize,
    nu: usize,
    b: &DispersionTensor<T>,
    _means: &FourMeans<T>,
    basis: &ProductBasisSpec,
) -> Result<OperatorMatrix<T>> {
    if mu > 3 || nu > 3 {
        return Err(Error::InvalidParameter(format!(
            "tensor index ({mu}, {nu}) out of range"
        )));
    }
    let op = ladders_for(b, basis).sigma(b.matrix(), mu, nu);
    Ok(op.to_operator(format!("sigma_{mu}{nu} (product ladder)")))
}

/// `g^{mu nu} Sigma_{mu nu}` flattened on the four-axis product basis.
pub fn contract_metric_sigma<T: Real>(
    b: &DispersionTensor<T>,
    _means: &FourMeans<T>,
    basis: &ProductBasisSpec,
) -> Result<OperatorMatrix<T>> {
    let op = ladders_for(b, basis).contracted_sigma(b.matrix());
    Ok(op.to_operator("g.sigma (product ladder)"))
}

/// Closed-form eigenvalue `(2n_0+1) B_00 - sum_j (2n_j+1) B_jj` of the
/// contracted operator for a diagonal tensor.
pub fn contracted_eigenvalue<T: Real>(b: &DispersionTensor<T>, n: [usize; 4]) -> Result<T> {
    if !b.is_diagonal() {
        return Err(Error::NonDiagonalUnsupported);
    }
    Ok((0..4).fold(T::zero(), |acc, mu| {
        acc + Metric::sign::<T>(mu) * lit::<T>((2 * n[mu] + 1) as f64) * b.get(mu, mu)
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommutatorKind {
    MomentumPosition,
    MomentumMomentum,
    PositionPosition,
}

/// One commutator checked on the interior of the product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorResidual {
    pub kind: CommutatorKind,
    pub mu: usize,
    pub nu: usize,
    /// Largest entry of `[A, B] - expected` on the interior block.
    pub residual: f64,
}

impl CommutatorResidual {
    pub fn label(&self) -> String {
        let (a, b) = match self.kind {
            CommutatorKind::MomentumPosition => ("p", "x"),
            CommutatorKind::MomentumMomentum => ("p", "p"),
            CommutatorKind::PositionPosition => ("x", "x"),
        };
        format!("[{a}{},{b}{}]", self.mu, self.nu)
    }
}

/// `[p_mu, x^nu] = i delta`, `[p_mu, p_nu] = 0` and `[x^mu, x^nu] = 0` on the
/// interior block, for every ordered pair with `mu <= nu` (all pairs for the
/// mixed commutator).
pub fn commutation_check<T: Real>(
    basis: &ProductBasisSpec,
    widths: [T; 4],
) -> Vec<CommutatorResidual> {
    let dims = basis.cutoffs();
    let ladders = SpacetimeLadders::new(&dims, widths);
    let mask = basis.interior_mask();
    let check = |a: KronOperator<T>, b: KronOperator<T>, target: Complex<T>| {
        let c = a.compose(&b).minus(&b.compose(&a)).to_csr();
        to_f64(csr_deviation_from_scaled_identity(&c, &mask, target))
    };
    let mut out = Vec::new();
    for mu in 0..4 {
        for nu in 0..4 {
            let target = if mu == nu { ci() } else { czero() };
            out.push(CommutatorResidual {
                kind: CommutatorKind::MomentumPosition,
                mu,
                nu,
                residual: check(ladders.momentum(mu), ladders.position(nu), target),
            });
        }
    }
    for (kind, get) in [
        (CommutatorKind::MomentumMomentum, 0),
        (CommutatorKind::PositionPosition, 1),
    ] {
        for mu in 0..4 {
            for nu in mu + 1..4 {
                let pick = |k| {
                    if get == 0 {
                        ladders.momentum(k)
                    } else {
                        ladders.position(k)
                    }
                };
                out.push(CommutatorResidual {
                    kind,
                    mu,
                    nu,
                    residual: check(pick(mu), pick(nu), czero()),
                });
            }
        }
    }
    out
}
