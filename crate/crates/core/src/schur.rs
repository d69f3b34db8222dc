//! Discrete analytic Schur functions from coisometric colligations.
//!
//! A colligation `M = [[A, B], [C, D]]` with `MM* = I` gives the Schur
//! function `S = D + C(I − zA)^{−⊙} ⊙ (zB)`, whose kernel
//! `K^S(z, w) = Σ z⁽ⁿ⁾w̄⁽ⁿ⁾I − (ZⁿS)(z)(ZⁿS)(w)*` equals `F(z)F(w)*` with
//! `F = C e_A`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::basis::basis_coeffs;
use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::matrix::{hermitian_min_eigenvalue, Mat};
use crate::realization::{
    check_admissible, markov_params, resolvent_eval, Realization, ADMISSIBILITY_TOL,
};
use crate::samples;
use crate::scalar::{Mode, Scalar};
use num_complex::Complex64;

/// Default float tolerance on `‖MM* − I‖₂`.
pub const COISOMETRY_TOL: f64 = 1e-10;

/// Eigenvalues of the defect in `[−CLIP_TOL, 0)` are rounded to zero.
pub const CLIP_TOL: f64 = 1e-12;

/// Multiplier finite sections may exceed norm one by this much.
pub const CONTRACTION_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoisometryReport {
    pub coisometric: bool,
    pub defect_norm: f64,
}

/// `‖MM* − I‖₂`; exact mode requires the defect to vanish identically.
pub fn is_coisometry<T: Scalar>(m: &Mat<T>, tol: f64) -> CoisometryReport {
    let defect = &(m * &m.adjoint()) - &Mat::identity(m.rows());
    let defect_norm = defect.spectral_norm();
    let coisometric = match T::MODE {
        Mode::Exact => defect.is_zero(),
        Mode::Float => defect_norm <= tol,
    };
    CoisometryReport {
        coisometric,
        defect_norm,
    }
}

/// Coisometric block operator `[[A, B], [C, D]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Colligation<T> {
    realization: Realization<T>,
    coisometry_tol: f64,
    seed: Option<u64>,
}

impl<T: Scalar> Colligation<T> {
    pub fn new(a: Mat<T>, b: Mat<T>, c: Mat<T>, d: Mat<T>, coisometry_tol: f64) -> Result<Self> {
        Self::from_realization(Realization::new(a, b, c, d)?, coisometry_tol)
    }

    pub fn from_realization(realization: Realization<T>, coisometry_tol: f64) -> Result<Self> {
        let cg = Self {
            realization,
            coisometry_tol,
            seed: None,
        };
        let report = is_coisometry(&cg.block(), coisometry_tol);
        if !report.coisometric {
            return Err(Error::NotContraction(format!(
                "colligation is not coisometric: ‖MM* − I‖ = {:e}",
                report.defect_norm
            )));
        }
        Ok(cg)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn a(&self) -> &Mat<T> {
        &self.realization.a
    }

    pub fn b(&self) -> &Mat<T> {
        &self.realization.b
    }

    pub fn c(&self) -> &Mat<T> {
        &self.realization.c
    }

    pub fn d(&self) -> &Mat<T> {
        &self.realization.d
    }

    pub fn coisometry_tol(&self) -> f64 {
        self.coisometry_tol
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `(n, m, p)`
    pub fn dims(&self) -> (usize, usize, usize) {
        let r = &self.realization;
        (r.state_dim(), r.outputs(), r.inputs())
    }

    /// The full `(n + m) × (n + p)` block matrix.
    pub fn block(&self) -> Mat<T> {
        let r = &self.realization;
        Mat::block(&r.a, &r.b, &r.c, &r.d).expect("shapes checked by the realization")
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.realization.to_json();
        v["coisometry_tol"] = self.coisometry_tol.into();
        v["seed"] = self.seed.into();
        v
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let tol = v["coisometry_tol"].as_f64().unwrap_or(COISOMETRY_TOL);
        let mut cg = Self::from_realization(Realization::from_json(v)?, tol)?;
        cg.seed = v["seed"].as_u64();
        Ok(cg)
    }
}

/// Seeded random coisometry: Gram–Schmidt on the rows of a complex Gaussian
/// `(n + m) × (n + p)` matrix. Requires `m ≤ p`.
pub fn random_coisometry(
    n: usize,
    m: usize,
    p: usize,
    seed: u64,
) -> Result<Colligation<Complex64>> {
    if m > p {
        return Err(Error::InfeasibleDims(format!(
            "{} rows cannot be orthonormal in dimension {}",
            n + m,
            n + p
        )));
    }
    let (rows, cols) = (n + m, n + p);
    let mut rng = samples::rng(seed);
    loop {
        let mut data: Vec<Vec<Complex64>> = (0..rows)
            .map(|_| (0..cols).map(|_| samples::gaussian(&mut rng)).collect())
            .collect();
        if orthonormalize_rows(&mut data) {
            let mat = Mat::from_rows(data)?;
            let r = Realization::new(
                mat.submatrix(0..n, 0..n),
                mat.submatrix(0..n, n..cols),
                mat.submatrix(n..rows, 0..n),
                mat.submatrix(n..rows, n..cols),
            )?;
            return Ok(Colligation::from_realization(r, COISOMETRY_TOL)?.with_seed(seed));
        }
    }
}

/// Modified Gram–Schmidt, two passes. Returns false on a (numerically) dependent row.
fn orthonormalize_rows(rows: &mut [Vec<Complex64>]) -> bool {
    for i in 0..rows.len() {
        for _ in 0..2 {
            for j in 0..i {
                let proj: Complex64 = rows[i]
                    .iter()
                    .zip(&rows[j])
                    .map(|(a, b)| a * b.conj())
                    .sum();
                let (head, tail) = rows.split_at_mut(i);
                for (x, y) in tail[0].iter_mut().zip(&head[j]) {
                    *x -= proj * y;
                }
            }
        }
        let norm = rows[i].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            return false;
        }
        for x in rows[i].iter_mut() {
            *x /= norm;
        }
    }
    true
}

/// The Schur function of a colligation as a realization.
pub fn schur_function<T: Scalar>(cg: &Colligation<T>) -> Realization<T> {
    debug_assert!(check_admissible(cg.a(), ADMISSIBILITY_TOL).admissible);
    cg.realization.clone()
}

/// `F(z) = C e_A(z)`.
fn f_at<T: Scalar>(cg: &Colligation<T>, z: LatticePoint) -> Result<Mat<T>> {
    Ok(cg.c() * &resolvent_eval(cg.a(), z)?)
}

/// `F(w)* = e_{A*}(w̄) C*`.
fn f_star_at<T: Scalar>(cg: &Colligation<T>, w: LatticePoint) -> Result<Mat<T>> {
    Ok(&resolvent_eval(&cg.a().adjoint(), w.conj())? * &cg.c().adjoint())
}

/// `K^S(z, w) = C e_A(z) e_{A*}(w̄) C*`.
pub fn kernel_closed<T: Scalar>(
    cg: &Colligation<T>,
    z: LatticePoint,
    w: LatticePoint,
) -> Result<Mat<T>> {
    if cg.dims().0 == 0 {
        let m = cg.dims().1;
        return Ok(Mat::zeros(m, m));
    }
    Ok(&f_at(cg, z)? * &f_star_at(cg, w)?)
}

/// Truncated kernel series and the size of its last increment.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSeries<T> {
    pub value: Mat<T>,
    pub last_increment: f64,
}

/// Inner truncation length for the shifted sums `Σ_k A^k z⁽ᵏ⁺ⁿ⁾`.
fn inner_length(n_terms: usize) -> usize {
    2 * n_terms + 32
}

/// `P_n = Σ_{k≥0} A^k z⁽ᵏ⁺ⁿ⁾` for `n = 0..=upto`, by `P_n = z⁽ⁿ⁾I + A P_{n+1}`
/// from a truncation at `len`.
fn shifted_sums<T: Scalar>(a: &Mat<T>, basis: &[T], upto: usize) -> Vec<Mat<T>> {
    let len = basis.len() - 1;
    let id = Mat::<T>::identity(a.rows());
    let mut out = vec![Mat::zeros(a.rows(), a.rows()); upto + 1];
    let mut cur = Mat::zeros(a.rows(), a.rows());
    for n in (0..=len).rev() {
        cur = &id.scale(&basis[n]) + &(a * &cur);
        if n <= upto {
            out[n] = cur.clone();
        }
    }
    out
}

/// `Σ_{n<N} [z⁽ⁿ⁾w̄⁽ⁿ⁾ I − (ZⁿS)(z)(ZⁿS)(w)*]`.
///
/// With `P_n` as above, `(ZⁿS)(z) = D z⁽ⁿ⁾ + C P_{n+1} B`. The remainder after
/// `N` terms is `(Z^N F)(z)(Z^N F)(w)*`.
pub fn kernel_series<T: Scalar>(
    cg: &Colligation<T>,
    z: LatticePoint,
    w: LatticePoint,
    n_terms: usize,
) -> Result<KernelSeries<T>> {
    if n_terms == 0 {
        return Err(Error::InvalidArgument("kernel series needs N ≥ 1".into()));
    }
    z.require_half_lattice()?;
    w.require_half_lattice()?;
    let len = inner_length(n_terms);
    let bz = basis_coeffs::<T>(z, len);
    let bw = basis_coeffs::<T>(w, len);
    let pz = shifted_sums(cg.a(), &bz, n_terms);
    let pw = shifted_sums(cg.a(), &bw, n_terms);
    let shifted = |basis: &[T], p: &[Mat<T>], n: usize| {
        &cg.d().scale(&basis[n]) + &(&(cg.c() * &p[n + 1]) * cg.b())
    };
    let m = cg.dims().1;
    let id = Mat::<T>::identity(m);
    let mut value = Mat::zeros(m, m);
    let mut last = Mat::zeros(m, m);
    for n in 0..n_terms {
        let sz = shifted(&bz, &pz, n);
        let sw = shifted(&bw, &pw, n);
        let diag = id.scale(&(bz[n].clone() * bw[n].conj()));
        last = &diag - &(&sz * &sw.adjoint());
        value = &value + &last;
    }
    Ok(KernelSeries {
        value,
        last_increment: last.max_abs(),
    })
}

/// `(Z^N F)(z) = C Σ_k A^k z⁽ᵏ⁺ᴺ⁾`, truncated like [`kernel_series`].
///
/// Panics if `Re z < 0`.
pub fn shifted_f<T: Scalar>(cg: &Colligation<T>, z: LatticePoint, shift: usize) -> Mat<T> {
    let basis = basis_coeffs::<T>(z, inner_length(shift));
    cg.c() * &shifted_sums(cg.a(), &basis, shift)[shift]
}

/// Block Gram matrix `[K^S(z_i, z_j)]`.
pub fn kernel_gram<T: Scalar>(cg: &Colligation<T>, points: &[LatticePoint]) -> Result<Mat<T>> {
    let (n, m, _) = cg.dims();
    let size = points.len() * m;
    if n == 0 {
        return Ok(Mat::zeros(size, size));
    }
    let fs: Vec<Mat<T>> = points.iter().map(|&p| f_at(cg, p)).collect::<Result<_>>()?;
    let fstars: Vec<Mat<T>> = points
        .iter()
        .map(|&p| f_star_at(cg, p))
        .collect::<Result<_>>()?;
    let mut gram = Mat::zeros(size, size);
    for (i, fi) in fs.iter().enumerate() {
        for (j, fj) in fstars.iter().enumerate() {
            let k = fi * fj;
            for r in 0..m {
                for c in 0..m {
                    gram[(i * m + r, j * m + c)] = k[(r, c)].clone();
                }
            }
        }
    }
    Ok(gram)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramReport<T> {
    pub psd: bool,
    pub min_eig: f64,
    pub gram: Mat<T>,
}

/// Positivity of the kernel on a finite point set.
///
/// Float mode: `min_eig ≥ −tol`. Exact mode certifies by pivoted LDL* and
/// ignores `tol`; `min_eig` is reported in double precision either way.
pub fn gram_psd<T: Scalar>(
    cg: &Colligation<T>,
    points: &[LatticePoint],
    tol: f64,
) -> Result<GramReport<T>> {
    if points.is_empty() {
        return Err(Error::InvalidArgument(
            "Gram matrix needs at least one point".into(),
        ));
    }
    let gram = kernel_gram(cg, points)?;
    let min_eig = hermitian_min_eigenvalue(&gram);
    let psd = match T::MODE {
        Mode::Exact => ldl_psd(&gram),
        Mode::Float => min_eig >= -tol,
    };
    Ok(GramReport { psd, min_eig, gram })
}

/// Exact positive-semidefiniteness of a Hermitian matrix by symmetric pivoting.
pub fn ldl_psd<T: Scalar>(h: &Mat<T>) -> bool {
    if h != &h.adjoint() {
        return false;
    }
    let mut a = h.clone();
    let mut live: Vec<usize> = (0..h.rows()).collect();
    while !live.is_empty() {
        let mut pivot = None;
        for &k in &live {
            let d = &a[(k, k)];
            if d.is_zero() {
                continue;
            }
            if d.to_c64().re < 0.0 {
                return false;
            }
            pivot = Some(k);
            break;
        }
        let Some(k) = pivot else {
            // Zero diagonal: PSD only if the remaining block vanishes.
            return live
                .iter()
                .all(|&r| live.iter().all(|&c| a[(r, c)].is_zero()));
        };
        live.retain(|&r| r != k);
        let dk = a[(k, k)].clone();
        for &r in &live {
            if a[(r, k)].is_zero() {
                continue;
            }
            let f = a[(r, k)].clone() / dk.clone();
            for &c in &live {
                let sub = f.clone() * a[(k, c)].clone();
                a[(r, c)] = a[(r, c)].clone() - sub;
            }
        }
    }
    true
}

/// Completes `(A, C)` to a coisometric colligation `[[A, B], [C, D]]`.
///
/// With `M = [A* C*]`, the defect `I − M*M = VΛV*` factors as `N*N` with
/// `N* = VΛ^{1/2} = [B; D]`, so `p = n + m`. Square roots are taken in
/// double precision, so the result is a float colligation.
pub fn defect_completion<T: Scalar>(a: &Mat<T>, c: &Mat<T>) -> Result<Colligation<Complex64>> {
    if !a.is_square() || a.cols() != c.cols() {
        return Err(Error::ShapeMismatch(format!(
            "A is {}x{}, C is {}x{}",
            a.rows(),
            a.cols(),
            c.rows(),
            c.cols()
        )));
    }
    let (n, m) = (a.rows(), c.rows());
    let size = n + m;
    let col = a.vstack(c)?.to_dmatrix();
    let defect = DMatrix::<Complex64>::identity(size, size) - &col * col.adjoint();
    let defect = (&defect + defect.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = defect.symmetric_eigen();
    let mut root = DMatrix::<Complex64>::zeros(size, size);
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda < -CLIP_TOL {
            return Err(Error::NotContraction(format!(
                "[A* C*] has norm above one (defect eigenvalue {lambda:e})"
            )));
        }
        let s = lambda.max(0.0).sqrt();
        for i in 0..size {
            root[(i, j)] = eig.eigenvectors[(i, j)] * s;
        }
    }
    let root = Mat::<Complex64>::from_dmatrix(&root);
    let r = Realization::new(
        Mat::from_dmatrix(&a.to_dmatrix()),
        root.submatrix(0..n, 0..size),
        Mat::from_dmatrix(&c.to_dmatrix()),
        root.submatrix(n..size, 0..size),
    )?;
    Colligation::from_realization(r, COISOMETRY_TOL)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub contraction: bool,
    pub opnorm: f64,
}

/// Spectral norm of the `N`-block lower-triangular Toeplitz section of `M_S`.
pub fn multiplier_contraction<T: Scalar>(
    cg: &Colligation<T>,
    n_blocks: usize,
) -> Result<ContractionReport> {
    if n_blocks == 0 {
        return Err(Error::InvalidArgument("finite section needs N ≥ 1".into()));
    }
    let section = multiplier_section(cg, n_blocks);
    let opnorm = section.spectral_norm();
    Ok(ContractionReport {
        contraction: opnorm <= 1.0 + CONTRACTION_SLACK,
        opnorm,
    })
}

/// Block `(i, j) = Ŝ(i − j)` for `i ≥ j`, zero above the diagonal.
pub fn multiplier_section<T: Scalar>(cg: &Colligation<T>, n_blocks: usize) -> Mat<T> {
    let (_, m, p) = cg.dims();
    let coeffs = markov_params(&cg.realization, n_blocks.saturating_sub(1)).to_series();
    Mat::from_fn(n_blocks * m, n_blocks * p, |r, c| {
        let (i, j) = (r / m, c / p);
        if i < j {
            T::zero()
        } else {
            coeffs.coeffs()[i - j][(r % m, c % p)].clone()
        }
    })
}
