//! The mass operator `m` and its conjugate coordinate `tau`, with
//! `[m, tau] = i` and `m = i d/dtau`, plus the mass dispersion and mass
//! quadratic mean operators. Reuses the one-axis ladder machinery in the
//! covariant sign convention.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hermite::GaussianParams;
use crate::operator::{
    build_sigma_grid, commutator, deviation_from_scaled_identity, BasisSpec, Convention, GridSpec,
    LadderPair, OperatorMatrix,
};
use crate::scalar::{ci, creal, lit, Real};

/// `(M, T, dm)`; `dtau = 1 / (2 dm)` is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassSectorParams<T: Real = f64> {
    mass: T,
    tau_mean: T,
    dm: T,
}

impl<T: Real> MassSectorParams<T> {
    pub fn new(mass: T, tau_mean: T, dm: T) -> Result<Self> {
        if !(mass >= T::zero()) || !mass.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mass mean must be >= 0, got {mass}"
            )));
        }
        if !(dm > T::zero()) || !dm.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mass ground width must be positive, got {dm}"
            )));
        }
        if !tau_mean.is_finite() {
            return Err(Error::InvalidParameter("tau mean must be finite".into()));
        }
        Ok(Self { mass, tau_mean, dm })
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    pub fn tau_mean(&self) -> T {
        self.tau_mean
    }

    pub fn dm(&self) -> T {
        self.dm
    }

    pub fn dtau(&self) -> T {
        T::one() / (lit::<T>(2.0) * self.dm)
    }

    /// The tau axis as a Gaussian family. Eigenfunctions of `i d/dtau - M`
    /// carry the phase `exp(-i M tau)`, so the family momentum is `-M`.
    pub fn tau_family(&self) -> GaussianParams<T> {
        GaussianParams::new(self.tau_mean, -self.mass, self.dm).expect("validated at construction")
    }
}

#[derive(Debug, Clone)]
pub struct MassOps<T: Real = f64> {
    /// `m - M`.
    pub m_minus_mean: OperatorMatrix<T>,
    /// `tau - T`.
    pub tau_minus_mean: OperatorMatrix<T>,
    /// `M^2 + 1/2 (m - M)^2 + 2 dm^4 (tau - T)^2`.
    pub m2_mean: OperatorMatrix<T>,
}

/// Ladder pair `(m - M, tau - T)` on a basis of the given cutoff.
pub fn mass_ladder<T: Real>(dm: T, cutoff: usize) -> LadderPair<T> {
    LadderPair::new(dm, cutoff, Convention::Covariant)
}

pub fn build_mass_ops<T: Real>(params: &MassSectorParams<T>, basis: &BasisSpec) -> MassOps<T> {
    let pair = mass_ladder(params.dm, basis.cutoff());
    let n = basis.cutoff();
    let m2 =
        pair.dispersion(params.dm) + DMatrix::identity(n, n) * creal(params.mass * params.mass);
    MassOps {
        m_minus_mean: OperatorMatrix::new(pair.momentum, "m - M (ladder)"),
        tau_minus_mean: OperatorMatrix::new(pair.position, "tau - T (ladder)"),
        m2_mean: OperatorMatrix::new(m2, "m2 mean (ladder)"),
    }
}

/// `m2 - M^2` written with the width ratio, `1/2 [(m-M)^2 + (dm/dtau)^2 (tau-T)^2]`.
pub fn mass_dispersion_ratio_form<T: Real>(
    params: &MassSectorParams<T>,
    basis: &BasisSpec,
) -> OperatorMatrix<T> {
    let pair = mass_ladder(params.dm, basis.cutoff());
    let ratio = params.dm / params.dtau();
    let half = creal(lit::<T>(0.5));
    let m = (&pair.momentum * &pair.momentum
        + &pair.position * &pair.position * creal(ratio * ratio))
        * half;
    OperatorMatrix::new(m, "m2 - M2 ratio form (ladder)")
}

/// `m2 - M^2` written as `1/2 (m-M)^2 + 2 dm^4 (tau-T)^2`.
pub fn mass_dispersion<T: Real>(
    params: &MassSectorParams<T>,
    basis: &BasisSpec,
) -> OperatorMatrix<T> {
    let pair = mass_ladder(params.dm, basis.cutoff());
    OperatorMatrix::new(pair.dispersion(params.dm), "m2 - M2 (ladder)")
}

/// Largest entry difference between the two assemblies of `m2 - M^2`.
pub fn assembly_form_difference<T: Real>(params: &MassSectorParams<T>, basis: &BasisSpec) -> T {
    let a = mass_dispersion_ratio_form(params, basis).matrix;
    let b = mass_dispersion(params, basis).matrix;
    (a - b)
        .iter()
        .fold(T::zero(), |w, z| w.max(crate::scalar::cabs(*z)))
}

/// Deviation of `[m, tau]` from `i` on the interior block.
pub fn mass_commutator_residual<T: Real>(params: &MassSectorParams<T>, basis: &BasisSpec) -> T {
    let ops = build_mass_ops(params, basis);
    let c = commutator(&ops.m_minus_mean.matrix, &ops.tau_minus_mean.matrix);
    let idx: Vec<usize> = basis.interior().collect();
    deviation_from_scaled_identity(&c, ci(), &idx)
}

/// `1/2 [(i d/dtau - M)^2 + 4 dm^4 (tau - T)^2]` on a tau grid.
pub fn build_mass_dispersion_grid<T: Real>(
    params: &MassSectorParams<T>,
    grid: &GridSpec,
) -> Result<OperatorMatrix<T>> {
    build_sigma_grid(&params.tau_family(), grid).map(|op| op.relabel("m2 - M2 (tau grid)"))
}

/// `M^2 + (2k + 1) dm^2`.
pub fn m2_eigenvalue<T: Real>(params: &MassSectorParams<T>, k: usize) -> T {
    params.mass * params.mass + lit::<T>((2 * k + 1) as f64) * params.dm * params.dm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::eigensolve;

    #[test]
    fn spectrum_law() {
        let p = MassSectorParams::new(0.0, 0.0, 1.0).unwrap();
        let basis = BasisSpec::new(10).unwrap();
        let ops = build_mass_ops(&p, &basis);
        for k in basis.interior() {
            assert!((ops.m2_mean.matrix[(k, k)].re - (2 * k + 1) as f64).abs() < 1e-12);
        }
        let p = MassSectorParams::<f64>::new(2.0, 0.3, 0.5).unwrap();
        let ops = build_mass_ops(&p, &BasisSpec::new(6).unwrap());
        assert!((ops.m2_mean.matrix[(0, 0)].re - 4.25).abs() < 1e-14);
        assert_eq!(m2_eigenvalue(&p, 0), 4.25);
    }

    #[test]
    fn interior_is_diagonal() {
        let p = MassSectorParams::new(1.3, -0.2, 0.7).unwrap();
        let basis = BasisSpec::new(12).unwrap();
        let ops = build_mass_ops(&p, &basis);
        let idx: Vec<usize> = basis.interior().collect();
        assert!(ops.m2_mean.max_off_diagonal_on(&idx) < 1e-14);
        assert!(ops.m2_mean.hermiticity_residual() < 1e-14);
    }

    #[test]
    fn conjugate_pair_commutator() {
        let p = MassSectorParams::new(1.0, 0.0, 0.8).unwrap();
        assert!(mass_commutator_residual(&p, &BasisSpec::new(9).unwrap()) <= 1e-12);
    }

    #[test]
    fn two_assemblies_agree() {
        for dm in [0.1_f64, 0.5, 1.0, 3.0] {
            let p = MassSectorParams::new(1.0, 0.0, dm).unwrap();
            assert!(
                assembly_form_difference(&p, &BasisSpec::new(16).unwrap())
                    <= 1e-14 * dm.powi(2).max(1.0)
            );
        }
    }

    #[test]
    fn tau_grid_cross_check() {
        let p = MassSectorParams::new(2.0, 0.5, 0.5).unwrap();
        let grid = GridSpec::new(8.0, 1024).unwrap();
        let op = build_mass_dispersion_grid(&p, &grid).unwrap();
        let pairs = eigensolve(&op, 5).unwrap();
        for (k, e) in pairs.iter().enumerate() {
            let want = (2 * k + 1) as f64 * 0.25;
            assert!(((e.value - want) / want).abs() < 1e-3);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(MassSectorParams::new(-1.0, 0.0, 1.0).is_err());
        assert!(MassSectorParams::new(1.0, 0.0, 0.0).is_err());
    }
}
