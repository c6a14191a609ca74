//! Deterministic sample points for pointwise residuals.
//!
//! Point `i` is drawn from its own ChaCha stream (`seed`, stream `i`), so the
//! set does not depend on evaluation order or parallel scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Number of Gaussian-envelope points used by default.
pub const DEFAULT_GAUSSIAN_POINTS: usize = 100;

/// Corner offset in units of the per-axis width.
pub const CORNER_SIGMAS: f64 = 2.0;

/// `count` points from the product Gaussian with the given centers and
/// per-axis standard deviations.
pub fn gaussian_points<const D: usize>(
    centers: [f64; D],
    sigmas: [f64; D],
    seed: u64,
    count: usize,
) -> Vec<[f64; D]> {
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            std::array::from_fn(|a| {
                let z: f64 = StandardNormal.sample(&mut rng);
                centers[a] + sigmas[a] * z
            })
        })
        .collect()
}

/// The `2^D` hypercube corners at `center +- CORNER_SIGMAS * sigma`.
pub fn corner_points<const D: usize>(centers: [f64; D], sigmas: [f64; D]) -> Vec<[f64; D]> {
    (0..1usize << D)
        .map(|bits| {
            std::array::from_fn(|a| {
                let s = if bits >> (D - 1 - a) & 1 == 1 {
                    1.0
                } else {
                    -1.0
                };
                centers[a] + s * CORNER_SIGMAS * sigmas[a]
            })
        })
        .collect()
}

/// Gaussian points followed by the corners.
pub fn residual_points<const D: usize>(
    centers: [f64; D],
    sigmas: [f64; D],
    seed: u64,
    count: usize,
) -> Vec<[f64; D]> {
    let mut pts = gaussian_points(centers, sigmas, seed, count);
    pts.extend(corner_points(centers, sigmas));
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_independent_of_count() {
        let a = gaussian_points([0.0; 5], [1.0; 5], 7, 10);
        let b = gaussian_points([0.0; 5], [1.0; 5], 7, 3);
        assert_eq!(&a[..3], &b[..]);
        let c = gaussian_points([0.0; 5], [1.0; 5], 8, 3);
        assert_ne!(b, c);
    }

    #[test]
    fn corners_cover_the_hypercube() {
        let pts = corner_points([1.0, -1.0, 0.0, 0.0, 2.0], [0.5, 1.0, 1.0, 1.0, 0.25]);
        assert_eq!(pts.len(), 32);
        assert_eq!(pts[0], [0.0, -3.0, -2.0, -2.0, 1.5]);
        assert_eq!(pts[31], [2.0, 1.0, 2.0, 2.0, 2.5]);
    }

    #[test]
    fn envelope_statistics() {
        let pts = gaussian_points([3.0], [2.0], 1, 4000);
        let mean = pts.iter().map(|p| p[0]).sum::<f64>() / 4000.0;
        let var = pts.iter().map(|p| (p[0] - mean).powi(2)).sum::<f64>() / 4000.0;
        assert!((mean - 3.0).abs() < 0.15);
        assert!((var.sqrt() - 2.0).abs() < 0.15);
    }
}
