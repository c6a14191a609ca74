//! Closed vocabulary for the `eq_ref` column. Every check row names one of
//! these identities; anything else is a programming error.

pub const EQ_REFS: &[(&str, &str)] = &[
    (
        "hermite-recurrence",
        "three-term recurrence of the Hermite polynomials",
    ),
    (
        "harmonic-gaussian",
        "position wave function of a harmonic Gaussian state",
    ),
    (
        "harmonic-gaussian-normalization",
        "unit norm of every harmonic Gaussian state",
    ),
    (
        "harmonic-gaussian-orthogonality",
        "orthogonality of distinct excitations",
    ),
    (
        "harmonic-gaussian-fourier",
        "closed-form momentum wave function",
    ),
    (
        "momentum-normalization",
        "unit norm in the momentum representation",
    ),
    ("mean-position", "position mean equals X"),
    ("mean-momentum", "momentum mean equals P"),
    ("position-dispersion", "position variance (2n+1) dx^2"),
    ("momentum-dispersion", "momentum variance (2n+1) dp^2"),
    ("uncertainty-product", "dx_n dp_n = n + 1/2"),
    (
        "exponent-variant",
        "moments under the alternative Gaussian exponent",
    ),
    (
        "dispersion-spectrum",
        "dispersion operator eigenvalues (2n+1) dp^2",
    ),
    ("canonical-commutator", "[x, p] = i on the interior"),
    ("momentum-quadratic-mean", "p2 mean = P^2 + dispersion"),
    ("grid-dispersion", "finite-difference dispersion spectrum"),
    (
        "grid-convergence",
        "second-order convergence of the grid spectrum",
    ),
    (
        "gauge-invariance",
        "grid spectrum independent of the momentum mean",
    ),
    (
        "truncation-locality",
        "interior entries independent of the cutoff",
    ),
    ("mass-commutator", "[m, tau] = i on the interior"),
    (
        "mass-dispersion-spectrum",
        "m2 - M^2 eigenvalues (2k+1) dm^2",
    ),
    (
        "mass-dispersion-forms",
        "width-ratio and explicit assemblies agree",
    ),
    ("mass-grid", "tau-grid spectrum of the mass dispersion"),
    ("tensor-dispersion", "dispersion tensor Sigma_{mu nu}"),
    ("tensor-symmetry", "Sigma_{mu nu} = Sigma_{nu mu}"),
    (
        "contracted-dispersion-spectrum",
        "closed-form spectrum of g^{mu nu} Sigma_{mu nu}",
    ),
    (
        "tensor-commutators",
        "canonical commutators of the spacetime ladders",
    ),
    ("gamma-clifford", "gamma matrix anticommutators"),
    ("gamma-five", "gamma5 squares to one and anticommutes"),
    (
        "representation-independence",
        "relations survive a unitary change of basis",
    ),
    ("alpha-clifford", "{alpha^mu, alpha^nu} = 2 g^{mu nu}"),
    ("beta-clifford", "{beta^mu, beta^nu} = 2 g^{mu nu}"),
    ("alpha-beta-anticommute", "{alpha^mu, beta^nu} = 0"),
    ("zeta-involution", "zeta^2 = 1"),
    ("theta-involution", "theta^2 = 1"),
    ("zeta-theta-anticommute", "{zeta, theta} = 0"),
    ("zeta-alpha-commute", "[zeta, alpha^mu] = 0"),
    ("theta-alpha-commute", "[theta, alpha^mu] = 0"),
    ("zeta-beta-commute", "[zeta, beta^mu] = 0"),
    ("theta-beta-commute", "[theta, beta^mu] = 0"),
    (
        "factor-constraint",
        "beta^mu alpha^nu B_{mu nu} - theta zeta dm^2 = 0",
    ),
    ("mass-shell", "g^{mu nu} P_mu P_nu = M^2"),
    (
        "resonance",
        "contracted tensor eigenvalue equals (2k+1) dm^2",
    ),
    ("scalar-field-equation", "separable scalar field equation"),
    (
        "scalar-operator-nullspace",
        "interior nullspace of the scalar operator",
    ),
    (
        "operator-factorization",
        "1/2 D1 D2 = scalar operator + constant",
    ),
    (
        "fermion-operator",
        "structure of the first-order fermion operator",
    ),
    (
        "fermion-field-equation",
        "fermion field equation for a basis candidate",
    ),
    (
        "klein-gordon-baseline",
        "Klein-Gordon operator on a plane wave",
    ),
    ("dirac-baseline", "Dirac operator on a plane wave"),
    ("dirac-factorization", "(gp + m)(gp - m) = p.p - m^2"),
];

pub fn is_registered(tag: &str) -> bool {
    EQ_REFS.iter().any(|(t, _)| *t == tag)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_are_unique() {
        let mut tags: Vec<_> = EQ_REFS.iter().map(|(t, _)| *t).collect();
        tags.sort_unstable();
        let n = tags.len();
        tags.dedup();
        assert_eq!(tags.len(), n);
    }

    #[test]
    fn relation_tags_are_registered() {
        let g = discofield_core::clifford::build_gammas::<f64>();
        let f = discofield_core::clifford::build_factor_matrices(&g);
        for row in discofield_core::clifford::relation_report(&f) {
            assert!(is_registered(row.eq_ref), "{}", row.eq_ref);
        }
    }
}
