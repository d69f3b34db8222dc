//! Seeded generators for reproducible test data.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::basis::CoefficientSeries;
use crate::matrix::Mat;
use crate::realization::{check_admissible, Realization, ADMISSIBILITY_TOL};
use crate::scalar::{GaussRat, Scalar};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `a/b + i·c/d` with `|a|, |c| ≤ bound` and `1 ≤ b, d ≤ bound`.
pub fn gauss_rat(rng: &mut SampleRng, bound: i64) -> GaussRat {
    let bound = bound.max(1);
    GaussRat::from_parts(
        rng.random_range(-bound..=bound),
        rng.random_range(1..=bound),
        rng.random_range(-bound..=bound),
        rng.random_range(1..=bound),
    )
}

pub fn rational_matrix(rng: &mut SampleRng, rows: usize, cols: usize, bound: i64) -> Mat<GaussRat> {
    Mat::from_fn(rows, cols, |_, _| gauss_rat(rng, bound))
}

/// Rational `n × n` matrix with `I + α±A` invertible.
pub fn admissible_matrix(rng: &mut SampleRng, n: usize, bound: i64) -> Mat<GaussRat> {
    loop {
        let a = rational_matrix(rng, n, n, bound);
        if check_admissible(&a, 0.0).admissible {
            return a;
        }
    }
}

/// Rational realization with admissible `A`; with `invertible_d` the feedthrough is invertible
/// and `A − BD⁻¹C` is admissible too.
pub fn rational_realization(
    rng: &mut SampleRng,
    n: usize,
    m: usize,
    p: usize,
    bound: i64,
    invertible_d: bool,
) -> Realization<GaussRat> {
    loop {
        let a = admissible_matrix(rng, n, bound);
        let b = rational_matrix(rng, n, p, bound);
        let c = rational_matrix(rng, m, n, bound);
        let d = rational_matrix(rng, m, p, bound);
        let r = Realization::new(a, b, c, d).expect("consistent shapes");
        if !invertible_d {
            return r;
        }
        if let Ok(inv) = r.d.inverse() {
            let cross = &r.a - &(&(&r.b * &inv) * &r.c);
            if check_admissible(&cross, 0.0).admissible {
                return r;
            }
        }
    }
}

pub fn gaussian(rng: &mut SampleRng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

pub fn gaussian_matrix(rng: &mut SampleRng, rows: usize, cols: usize) -> Mat<Complex64> {
    Mat::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Complex Gaussian matrix rescaled to spectral radius `rho`.
pub fn matrix_with_radius(rng: &mut SampleRng, n: usize, rho: f64) -> Mat<Complex64> {
    loop {
        let a = gaussian_matrix(rng, n, n);
        let r = a.spectral_radius();
        if r > 1e-6 {
            return a.scale(&Complex64::new(rho / r, 0.0));
        }
    }
}

/// Float realization with `ρ(A) = rho` and Gaussian `B`, `C`, `D`.
pub fn stable_realization(
    rng: &mut SampleRng,
    n: usize,
    m: usize,
    p: usize,
    rho: f64,
) -> Realization<Complex64> {
    let a = matrix_with_radius(rng, n, rho);
    let b = gaussian_matrix(rng, n, p);
    let c = gaussian_matrix(rng, m, n);
    let d = gaussian_matrix(rng, m, p);
    let r = Realization::new(a, b, c, d).expect("consistent shapes");
    debug_assert!(check_admissible(&r.a, ADMISSIBILITY_TOL).admissible);
    r
}

/// Scalar rational series of the given length.
pub fn rational_series(rng: &mut SampleRng, len: usize, bound: i64) -> CoefficientSeries<GaussRat> {
    CoefficientSeries::scalar((0..len).map(|_| gauss_rat(rng, bound)).collect()).expect("nonempty")
}

/// A random rational scalar of the given mode.
pub fn scalar<T: Scalar>(rng: &mut SampleRng, bound: i64) -> T {
    T::from_gauss(&gauss_rat(rng, bound))
}
