//! Harmonic Gaussian states: Hermite polynomials, normalized Hermite
//! functions, closed-form position/momentum wave functions, Gauss-Hermite
//! quadrature and statistical moments.
//!
//! A family is fixed by [`GaussianParams`] `(X, P, dp)`. The position ground
//! width is always derived as `dx = 1 / (2 dp)`, so `dx * dp = 1/2` holds by
//! construction. With `s = sqrt(2) dx` and `u = (x - X) / s` the states are
//!
//! ```text
//! phi_n(x) = psi_n(u) / sqrt(s) * exp(i P x)
//! ```
//!
//! where `psi_n` is the orthonormal Hermite function. Evaluation always goes
//! through the normalized three-term recurrence for `psi_n`, which carries the
//! Gaussian factor and never forms `2^n n!`.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cabs, cis, cplx, czero, from_usize, lit, Real};
use crate::tridiag::SymTridiagonal;

/// Highest excitation index accepted by the evaluators. The recurrence is
/// stable well past this; the cap only bounds per-point cost.
pub const MAX_EXCITATION: usize = 4096;

/// Default Gauss-Hermite order for moments.
pub const DEFAULT_QUADRATURE_ORDER: usize = 64;

/// `(X, P, dp)` triple of a harmonic Gaussian family, natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams<T = f64> {
    x_mean: T,
    p_mean: T,
    dp: T,
}

impl<T: Real> GaussianParams<T> {
    pub fn new(x_mean: T, p_mean: T, dp: T) -> Result<Self> {
        if !(dp > T::zero()) || !dp.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "momentum ground width must be positive and finite, got {dp}"
            )));
        }
        if !x_mean.is_finite() || !p_mean.is_finite() {
            return Err(Error::InvalidParameter("means must be finite".into()));
        }
        Ok(Self { x_mean, p_mean, dp })
    }

    pub fn x_mean(&self) -> T {
        self.x_mean
    }

    pub fn p_mean(&self) -> T {
        self.p_mean
    }

    /// Momentum ground standard deviation.
    pub fn dp(&self) -> T {
        self.dp
    }

    /// Position ground standard deviation, `1 / (2 dp)`.
    pub fn dx(&self) -> T {
        T::one() / (lit::<T>(2.0) * self.dp)
    }

    /// `sqrt(2) dx`, the length unit of the Hermite argument.
    pub fn position_scale(&self) -> T {
        lit::<T>(2.0).sqrt() * self.dx()
    }

    /// `sqrt(2) dp`, the momentum unit of the Hermite argument.
    pub fn momentum_scale(&self) -> T {
        lit::<T>(2.0).sqrt() * self.dp
    }

    pub fn with_means(&self, x_mean: T, p_mean: T) -> Self {
        Self {
            x_mean,
            p_mean,
            dp: self.dp,
        }
    }
}

/// `|n, X, P, dp>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteState<T = f64> {
    pub n: usize,
    pub params: GaussianParams<T>,
}

impl<T: Real> HermiteState<T> {
    pub fn new(n: usize, params: GaussianParams<T>) -> Self {
        Self { n, params }
    }
}

/// Gauss-Hermite order plus a uniform-grid fallback for integrands that are
/// not Gaussian-weighted polynomials. `extent` is the half-width in units of
/// the ground position width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub order: usize,
    pub extent: f64,
    pub points: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            order: DEFAULT_QUADRATURE_ORDER,
            extent: 24.0,
            points: 4097,
        }
    }
}

impl QuadratureSpec {
    pub fn new(order: usize, extent: f64, points: usize) -> Result<Self> {
        let spec = Self {
            order,
            extent,
            points,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_order(order: usize) -> Result<Self> {
        Self::new(order, Self::default().extent, Self::default().points)
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 1 {
            return Err(Error::InvalidParameter(
                "quadrature order must be >= 1".into(),
            ));
        }
        if !(self.extent > 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature extent must be > 0".into(),
            ));
        }
        if self.points < 2 {
            return Err(Error::InvalidParameter(
                "quadrature needs >= 2 grid points".into(),
            ));
        }
        Ok(())
    }
}

/// Physicists' Hermite polynomial by the three-term recurrence.
pub fn hermite_polynomial<T: Real>(n: usize, u: T) -> T {
    let two = lit::<T>(2.0);
    let mut prev = T::one();
    if n == 0 {
        return prev;
    }
    let mut cur = two * u;
    for k in 1..n {
        let next = two * u * cur - two * from_usize::<T>(k) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Orthonormal Hermite functions `psi_0(u) .. psi_{n_max}(u)`,
/// `psi_n(u) = H_n(u) exp(-u^2/2) / sqrt(2^n n! sqrt(pi))`.
pub fn hermite_functions<T: Real>(n_max: usize, u: T) -> Vec<T> {
    let mut out = Vec::with_capacity(n_max + 1);
    let psi0 = T::pi().powf(lit(-0.25)) * (-u * u / lit(2.0)).exp();
    out.push(psi0);
    if n_max == 0 {
        return out;
    }
    let two = lit::<T>(2.0);
    out.push(two.sqrt() * u * psi0);
    for k in 1..n_max {
        let kf = from_usize::<T>(k);
        let k1 = kf + T::one();
        let next = (two / k1).sqrt() * u * out[k] - (kf / k1).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

pub fn hermite_function<T: Real>(n: usize, u: T) -> T {
    hermite_functions(n, u)[n]
}

/// `psi_n`, `psi_n'` and `psi_n''` at `u`, from `H_n' = 2n H_{n-1}` and the
/// Hermite differential equation.
pub fn hermite_function_jet<T: Real>(n: usize, u: T) -> (T, T, T) {
    let psi = hermite_functions(n, u);
    let value = psi[n];
    let lower = if n == 0 { T::zero() } else { psi[n - 1] };
    let d1 = (lit::<T>(2.0) * from_usize::<T>(n)).sqrt() * lower - u * value;
    let d2 = (u * u - lit::<T>(2.0) * from_usize::<T>(n) - T::one()) * value;
    (value, d1, d2)
}

fn check_cap(n: usize) -> Result<()> {
    if n > MAX_EXCITATION {
        return Err(Error::NotEvaluable(format!(
            "excitation {n} exceeds cap {MAX_EXCITATION}"
        )));
    }
    Ok(())
}

/// Which Gaussian exponent the position wave function uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExponentVariant {
    /// `exp(-(x-X)^2 / (4 dx^2))`: normalized, ground dispersion `dx^2`.
    #[default]
    Consistent,
    /// `exp(-(x-X)^2 / (2 dx^2))` with the same prefactor. Kept only to
    /// report what that form would yield; it is not normalized.
    Literal,
}

/// Position-representation wave function.
pub fn eval_phi<T: Real>(state: &HermiteState<T>, x: T) -> Result<Complex<T>> {
    check_cap(state.n)?;
    let p = &state.params;
    let s = p.position_scale();
    let u = (x - p.x_mean()) / s;
    let amp = hermite_function(state.n, u) / s.sqrt();
    Ok(cis(p.p_mean() * x) * amp)
}

/// Position wave function with an explicit exponent variant.
pub fn eval_phi_variant<T: Real>(
    state: &HermiteState<T>,
    x: T,
    variant: ExponentVariant,
) -> Result<Complex<T>> {
    match variant {
        ExponentVariant::Consistent => eval_phi(state, x),
        ExponentVariant::Literal => {
            check_cap(state.n)?;
            let p = &state.params;
            let s = p.position_scale();
            let u = (x - p.x_mean()) / s;
            // psi_n carries exp(-u^2/2); the literal form has exp(-u^2).
            let amp = hermite_function(state.n, u) * (-u * u / lit(2.0)).exp() / s.sqrt();
            Ok(cis(p.p_mean() * x) * amp)
        }
    }
}

/// Closed-form momentum wave function,
/// `(-i)^n exp(-i (p-P) X) psi_n((p-P)/(sqrt 2 dp)) / sqrt(sqrt 2 dp)`.
pub fn eval_phi_momentum<T: Real>(state: &HermiteState<T>, p: T) -> Result<Complex<T>> {
    check_cap(state.n)?;
    let g = &state.params;
    let s = g.momentum_scale();
    let v = (p - g.p_mean()) / s;
    let amp = hermite_function(state.n, v) / s.sqrt();
    let phase = cis(-(p - g.p_mean()) * g.x_mean()) * minus_i_pow(state.n);
    Ok(phase * amp)
}

fn minus_i_pow<T: Real>(n: usize) -> Complex<T> {
    match n % 4 {
        0 => cplx(T::one(), T::zero()),
        1 => cplx(T::zero(), -T::one()),
        2 => cplx(-T::one(), T::zero()),
        _ => cplx(T::zero(), T::one()),
    }
}

/// Gauss-Hermite rule for the weight `exp(-u^2)`.
///
/// `scaled_weights[i] = weights[i] * exp(nodes[i]^2)`; integrals of
/// `f(u) psi_a(u) psi_b(u)` use these so that no `exp(u^2)` is ever formed.
#[derive(Debug, Clone)]
pub struct GaussHermite<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub scaled_weights: Vec<T>,
}

impl<T: Real> GaussHermite<T> {
    /// Golub-Welsch nodes (bisection on the Jacobi matrix) with weights from
    /// the Christoffel function `1 / sum_k psi_k(u)^2`.
    pub fn new(order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidParameter(
                "quadrature order must be >= 1".into(),
            ));
        }
        let off: Vec<T> = (1..order)
            .map(|k| (from_usize::<T>(k) / lit(2.0)).sqrt())
            .collect();
        let jacobi = SymTridiagonal::new(vec![T::zero(); order], off);
        let mut nodes = jacobi.all_eigenvalues();
        // Enforce exact antisymmetry of the node set.
        for i in 0..order / 2 {
            let j = order - 1 - i;
            let m = (nodes[j] - nodes[i]) / lit(2.0);
            nodes[i] = -m;
            nodes[j] = m;
        }
        if order % 2 == 1 {
            nodes[order / 2] = T::zero();
        }
        let scaled_weights: Vec<T> = nodes
            .iter()
            .map(|&u| {
                let psi = hermite_functions(order - 1, u);
                T::one() / psi.iter().fold(T::zero(), |s, &v| s + v * v)
            })
            .collect();
        let weights = nodes
            .iter()
            .zip(&scaled_weights)
            .map(|(&u, &w)| w * (-u * u).exp())
            .collect();
        Ok(Self {
            nodes,
            weights,
            scaled_weights,
        })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }
}

/// Moment selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentKind {
    MeanX,
    MeanP,
    DispX,
    DispP,
}

/// Mean or dispersion of a state by Gauss-Hermite quadrature. Position
/// moments integrate `|phi_n|^2`, momentum moments `|phi~_n|^2`, both through
/// the closed-form wave functions.
pub fn moment<T: Real>(
    state: &HermiteState<T>,
    kind: MomentKind,
    quad: &QuadratureSpec,
) -> Result<T> {
    quad.validate()?;
    moment_with(state, kind, &GaussHermite::new(quad.order)?)
}

/// As [`moment`] with a prebuilt rule.
pub fn moment_with<T: Real>(
    state: &HermiteState<T>,
    kind: MomentKind,
    rule: &GaussHermite<T>,
) -> Result<T> {
    check_cap(state.n)?;
    let required = state.n + 2;
    if rule.order() < required {
        return Err(Error::QuadratureUnderResolved {
            order: rule.order(),
            n: state.n,
            required,
        });
    }
    let g = &state.params;
    let mut acc = T::zero();
    for (&u, &w) in rule.nodes.iter().zip(&rule.scaled_weights) {
        let density_weight = match kind {
            MomentKind::MeanX | MomentKind::DispX => {
                let s = g.position_scale();
                let x = g.x_mean() + s * u;
                let phi = eval_phi(state, x)?;
                let dens = (phi.re * phi.re + phi.im * phi.im) * s;
                let f = match kind {
                    MomentKind::MeanX => x,
                    _ => (x - g.x_mean()) * (x - g.x_mean()),
                };
                f * dens
            }
            MomentKind::MeanP | MomentKind::DispP => {
                let s = g.momentum_scale();
                let p = g.p_mean() + s * u;
                let phi = eval_phi_momentum(state, p)?;
                let dens = (phi.re * phi.re + phi.im * phi.im) * s;
                let f = match kind {
                    MomentKind::MeanP => p,
                    _ => (p - g.p_mean()) * (p - g.p_mean()),
                };
                f * dens
            }
        };
        acc += w * density_weight;
    }
    Ok(acc)
}

/// `<a|b>` for two states of the same family, by Gauss-Hermite quadrature of
/// `conj(phi_a) phi_b`.
pub fn inner_product<T: Real>(
    a: &HermiteState<T>,
    b: &HermiteState<T>,
    quad: &QuadratureSpec,
) -> Result<Complex<T>> {
    quad.validate()?;
    inner_product_with(a, b, &GaussHermite::new(quad.order)?)
}

/// As [`inner_product`] with a prebuilt rule.
pub fn inner_product_with<T: Real>(
    a: &HermiteState<T>,
    b: &HermiteState<T>,
    rule: &GaussHermite<T>,
) -> Result<Complex<T>> {
    if a.params != b.params {
        return Err(Error::FamilyMismatch);
    }
    let required = (a.n + b.n) / 2 + 1;
    if rule.order() < required {
        return Err(Error::QuadratureUnderResolved {
            order: rule.order(),
            n: a.n.max(b.n),
            required,
        });
    }
    let g = &a.params;
    let s = g.position_scale();
    let mut acc = czero::<T>();
    for (&u, &w) in rule.nodes.iter().zip(&rule.scaled_weights) {
        let x = g.x_mean() + s * u;
        let pa = eval_phi(a, x)?;
        let pb = eval_phi(b, x)?;
        acc += pa.conj() * pb * (w * s);
    }
    Ok(acc)
}

/// Trapezoid integral of `f(x)` over `X +- extent * dx` on `points` nodes.
pub fn trapezoid_position<T: Real, F>(
    params: &GaussianParams<T>,
    quad: &QuadratureSpec,
    mut f: F,
) -> Complex<T>
where
    F: FnMut(T) -> Complex<T>,
{
    let half = lit::<T>(quad.extent) * params.dx();
    let a = params.x_mean() - half;
    let h = (half + half) / from_usize::<T>(quad.points - 1);
    let mut acc = czero::<T>();
    for i in 0..quad.points {
        let x = a + h * from_usize::<T>(i);
        let w = if i == 0 || i + 1 == quad.points {
            h / lit(2.0)
        } else {
            h
        };
        acc += f(x) * w;
    }
    acc
}

/// Momentum wave function by direct quadrature of
/// `(2 pi)^(-1/2) * integral phi_n(x) exp(-i p x) dx`.
pub fn fourier_by_quadrature<T: Real>(
    state: &HermiteState<T>,
    p: T,
    quad: &QuadratureSpec,
) -> Result<Complex<T>> {
    quad.validate()?;
    check_cap(state.n)?;
    let norm = T::one() / (lit::<T>(2.0) * T::pi()).sqrt();
    let mut failure = None;
    let val = trapezoid_position(&state.params, quad, |x| match eval_phi(state, x) {
        Ok(phi) => phi * cis(-p * x),
        Err(e) => {
            failure = Some(e);
            czero()
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(val * norm),
    }
}

/// Norm and normalized position dispersion of a state under either exponent
/// variant, by trapezoid quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariantMoments<T> {
    pub norm: T,
    pub dispersion: T,
}

pub fn variant_moments<T: Real>(
    state: &HermiteState<T>,
    variant: ExponentVariant,
    quad: &QuadratureSpec,
) -> Result<VariantMoments<T>> {
    quad.validate()?;
    check_cap(state.n)?;
    let g = &state.params;
    let density = |x: T| {
        let phi = eval_phi_variant(state, x, variant).unwrap_or_else(|_| czero());
        let m = cabs(phi);
        m * m
    };
    let norm = trapezoid_position(g, quad, |x| cplx(density(x), T::zero())).re;
    let second = trapezoid_position(g, quad, |x| {
        let d = x - g.x_mean();
        cplx(d * d * density(x), T::zero())
    })
    .re;
    Ok(VariantMoments {
        norm,
        dispersion: second / norm,
    })
}
