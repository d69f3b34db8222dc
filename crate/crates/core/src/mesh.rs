//! The mesh-`h` lattice `Λ_h = hℤ + ihℤ` and its `h → 0` limit.
//!
//! Mesh objects are reduced to the unit lattice by rescaling:
//! `z_h⁽ⁿ⁾(z) = hⁿ z⁽ⁿ⁾(z/h)`, `δ_{x,h} = δx / h`, `Z_h = h·Z`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::basis::{basis_coeffs, basis_poly, basis_table, z_apply, CoefficientSeries};
use crate::error::{Error, Result};
use crate::lattice::{apply_difference, DiffKind, LatticeFunction, LatticePoint, Window};
use crate::matrix::Mat;
use crate::scalar::{GaussRat, Scalar};

/// The point `h(j + ik)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MeshPoint {
    pub j: i64,
    pub k: i64,
    pub h: BigRational,
}

impl MeshPoint {
    pub fn new(j: i64, k: i64, h: BigRational) -> Result<Self> {
        if !h.is_positive() {
            return Err(Error::InvalidArgument(format!(
                "mesh size {h} must be positive"
            )));
        }
        if j < 0 {
            return Err(Error::InvalidArgument(format!(
                "h({j}+{k}i) is left of the imaginary axis"
            )));
        }
        Ok(Self { j, k, h })
    }

    /// The mesh point at `x + iy`; both coordinates must be multiples of `h`.
    pub fn from_coords(x: &BigRational, y: &BigRational, h: BigRational) -> Result<Self> {
        if !h.is_positive() {
            return Err(Error::InvalidArgument(format!(
                "mesh size {h} must be positive"
            )));
        }
        let to_index = |v: &BigRational| -> Result<i64> {
            let q = v / &h;
            if !q.is_integer() {
                return Err(Error::InvalidArgument(format!(
                    "{v} is not a multiple of h = {h}"
                )));
            }
            i64::try_from(q.to_integer())
                .map_err(|_| Error::InvalidArgument(format!("{v}/{h} is too large")))
        };
        Self::new(to_index(x)?, to_index(y)?, h)
    }

    /// Unit-lattice index `j + ik`.
    pub fn index(&self) -> LatticePoint {
        LatticePoint::new(self.j, self.k)
    }

    pub fn value<T: Scalar>(&self) -> T {
        h_scalar::<T>(&self.h) * self.index().to_scalar::<T>()
    }
}

impl fmt::Display for MeshPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·({})", self.h, self.index())
    }
}

fn h_scalar<T: Scalar>(h: &BigRational) -> T {
    T::from_gauss(&GaussRat::real(h.clone()))
}

/// `z_h⁽ⁿ⁾(z) = hⁿ z⁽ⁿ⁾(z/h)`.
pub fn basis_poly_h<T: Scalar>(n: usize, z: &MeshPoint) -> T {
    h_scalar::<T>(&z.h).pow(n as u32) * basis_poly::<T>(n, z.index())
}

/// `x(x − h)⋯(x − (n−1)h)/n!`, the real-axis formula for `x_h⁽ⁿ⁾`.
pub fn falling_product_h(n: usize, x: &BigRational, h: &BigRational) -> BigRational {
    let mut acc = BigRational::one();
    for i in 0..n {
        acc *= x - h * BigRational::from_integer(BigInt::from(i));
        acc /= BigRational::from_integer(BigInt::from(i + 1));
    }
    acc
}

/// `xⁿ/n!`
pub fn monomial_limit(n: usize, x: &BigRational) -> BigRational {
    let mut acc = BigRational::one();
    for i in 0..n {
        acc *= x.clone();
        acc /= BigRational::from_integer(BigInt::from(i + 1));
    }
    acc
}

/// A lattice function on `Λ_{+,h}` stored by unit-lattice index.
#[derive(Clone, PartialEq)]
pub struct MeshFunction<T> {
    pub h: BigRational,
    pub values: LatticeFunction<T>,
}

impl<T: Scalar> fmt::Debug for MeshFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeshFunction")
            .field("h", &self.h)
            .field("values", &self.values)
            .finish()
    }
}

impl<T: Scalar> MeshFunction<T> {
    pub fn new(h: BigRational, values: LatticeFunction<T>) -> Result<Self> {
        if !h.is_positive() {
            return Err(Error::InvalidArgument(format!(
                "mesh size {h} must be positive"
            )));
        }
        Ok(Self { h, values })
    }

    pub fn at(&self, j: i64, k: i64) -> Result<&Mat<T>> {
        self.values.get(LatticePoint::new(j, k))
    }
}

/// `z_h⁽ⁿ⁾` over an index window.
pub fn basis_table_h<T: Scalar>(n: usize, window: Window, h: &BigRational) -> MeshFunction<T> {
    let scale = h_scalar::<T>(h).pow(n as u32);
    let values = basis_table::<T>(n, window)
        .map(|v| v.scale(&scale))
        .expect("same shape");
    MeshFunction {
        h: h.clone(),
        values,
    }
}

/// `(δ_{x,h} f)(z) = (f(z + h) − f(z))/h`.
pub fn delta_xh<T: Scalar>(f: &MeshFunction<T>) -> Result<MeshFunction<T>> {
    let inv = T::one() / h_scalar::<T>(&f.h);
    let values = apply_difference(DiffKind::Dx, &f.values)?.map(|v| v.scale(&inv))?;
    Ok(MeshFunction {
        h: f.h.clone(),
        values,
    })
}

/// `(Z_h f)(z) = (f(0) − f(z))h/2 + ∫₀^z f δz`.
pub fn z_h<T: Scalar>(f: &MeshFunction<T>) -> Result<MeshFunction<T>> {
    let h = h_scalar::<T>(&f.h);
    let values = z_apply(&f.values)?.map(|v| v.scale(&h))?;
    Ok(MeshFunction {
        h: f.h.clone(),
        values,
    })
}

/// Coefficients `(δ_{x,h}ⁿ f)(0)` in the basis `z_h⁽ⁿ⁾`.
pub fn taylor_coefficients_h<T: Scalar>(
    f: &MeshFunction<T>,
    order: usize,
) -> Result<CoefficientSeries<T>> {
    let mut cur = f.clone();
    let mut coeffs = vec![cur.at(0, 0)?.clone()];
    for _ in 0..order {
        cur = delta_xh(&cur)?;
        coeffs.push(cur.at(0, 0)?.clone());
    }
    CoefficientSeries::new(coeffs)
}

/// Evaluates `Σ cₙ z_h⁽ⁿ⁾` over an index window.
pub fn series_table_h<T: Scalar>(
    c: &CoefficientSeries<T>,
    window: Window,
    h: &BigRational,
) -> MeshFunction<T> {
    let (rows, cols) = c.shape();
    let hs = h_scalar::<T>(h);
    let values = LatticeFunction::from_fn(window, rows, cols, |p| {
        let basis = basis_coeffs::<T>(p, c.order());
        let mut hn = T::one();
        let mut acc = Mat::zeros(rows, cols);
        for (n, coeff) in c.coeffs().iter().enumerate() {
            acc = &acc + &coeff.scale(&(basis[n].clone() * hn.clone()));
            hn = hn * hs.clone();
        }
        acc
    })
    .expect("uniform shape");
    MeshFunction {
        h: h.clone(),
        values,
    }
}

/// A truncated kernel sum with the size of the first omitted term (or a bound on the tail).
#[derive(Debug, Clone, PartialEq)]
pub struct KernelValue<T> {
    pub value: T,
    pub tail_estimate: f64,
}

/// `K_h(z, w) = Σ_{n≤N} z_h⁽ⁿ⁾ conj(w_h⁽ⁿ⁾)`.
pub fn kernel_h<T: Scalar>(z: &MeshPoint, w: &MeshPoint, n_terms: usize) -> Result<KernelValue<T>> {
    if z.h != w.h {
        return Err(Error::InvalidArgument(format!(
            "points on meshes {} and {}",
            z.h, w.h
        )));
    }
    let hs = h_scalar::<T>(&z.h);
    let bz = basis_coeffs::<T>(z.index(), n_terms + 1);
    let bw = basis_coeffs::<T>(w.index(), n_terms + 1);
    let mut value = T::zero();
    let mut hn2 = T::one();
    let h2 = hs.clone() * hs;
    for n in 0..=n_terms {
        value = value + bz[n].clone() * bw[n].conj() * hn2.clone();
        hn2 = hn2 * h2.clone();
    }
    let next = bz[n_terms + 1].clone() * bw[n_terms + 1].conj() * hn2;
    Ok(KernelValue {
        value,
        tail_estimate: next.modulus(),
    })
}

/// `K(z, w) = Σ_{n≤N} zⁿw̄ⁿ/(n!)²`, with a geometric bound on the omitted tail.
pub fn limit_kernel<T: Scalar>(z: &T, w: &T, n_terms: usize) -> KernelValue<T> {
    let zw = z.clone() * w.conj();
    let mut term = T::one();
    let mut value = T::zero();
    for n in 0..=n_terms {
        value = value + term.clone();
        let k = T::from_i64(n as i64 + 1);
        term = term * zw.clone() / (k.clone() * k);
    }
    let ratio = zw.modulus() / ((n_terms as f64 + 2.0).powi(2));
    let tail_estimate = if ratio < 1.0 {
        term.modulus() / (1.0 - ratio)
    } else {
        f64::INFINITY
    };
    KernelValue {
        value,
        tail_estimate,
    }
}

/// `⟨∂zⁿ, zᵐ⟩` and `⟨zⁿ, z^{m+1}/(m+1)⟩` with `⟨zᵃ, zᵇ⟩ = (a!)² δ_{ab}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjointCheck {
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub equal: bool,
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `⟨f, g⟩ = Σ f_k conj(g_k) (k!)²` for real monomial coefficient vectors.
fn limit_inner(f: &[BigRational], g: &[BigRational]) -> BigRational {
    f.iter()
        .zip(g)
        .enumerate()
        .map(|(k, (a, b))| a * b * BigRational::from_integer(factorial(k).pow(2)))
        .fold(BigRational::zero(), |acc, t| acc + t)
}

fn monomial(n: usize, scale: BigRational) -> Vec<BigRational> {
    let mut v = vec![BigRational::zero(); n + 1];
    v[n] = scale;
    v
}

pub fn adjoint_identity_check(n: usize, m: usize) -> Result<AdjointCheck> {
    if n > 20 || m > 20 {
        return Err(Error::InvalidArgument(
            "adjoint check supports n, m ≤ 20".into(),
        ));
    }
    let len = n.max(m + 1) + 1;
    let pad = |mut v: Vec<BigRational>| {
        v.resize(len, BigRational::zero());
        v
    };
    let d_zn = if n == 0 {
        vec![BigRational::zero()]
    } else {
        monomial(n - 1, BigRational::from_integer(BigInt::from(n)))
    };
    let zm = monomial(m, BigRational::one());
    let zn = monomial(n, BigRational::one());
    let int_zm = monomial(m + 1, BigRational::new(BigInt::one(), BigInt::from(m + 1)));
    let lhs = limit_inner(&pad(d_zn), &pad(zm));
    let rhs = limit_inner(&pad(zn), &pad(int_zm));
    Ok(AdjointCheck {
        equal: lhs == rhs,
        lhs,
        rhs,
    })
}

/// One row of a mesh convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow<T> {
    pub h: BigRational,
    pub value: T,
    pub limit: T,
    pub abs_err: f64,
}

/// `z_h⁽ⁿ⁾(z)` against `zⁿ/n!` for each `h`; `z` must lie on every mesh.
pub fn mesh_convergence<T: Scalar>(
    n: usize,
    x: &BigRational,
    y: &BigRational,
    h_list: &[BigRational],
) -> Result<Vec<ConvergenceRow<T>>> {
    let z = T::from_gauss(&GaussRat::new(x.clone(), y.clone()));
    let mut fact = T::one();
    for k in 1..=n {
        fact = fact * T::from_i64(k as i64);
    }
    let limit = z.pow(n as u32) / fact;
    h_list
        .iter()
        .map(|h| {
            let p = MeshPoint::from_coords(x, y, h.clone())?;
            let value = basis_poly_h::<T>(n, &p);
            let abs_err = (value.clone() - limit.clone()).modulus();
            Ok(ConvergenceRow {
                h: h.clone(),
                value,
                limit: limit.clone(),
                abs_err,
            })
        })
        .collect()
}

/// `h = 2^{−k}` for `k = 0..=kmax`.
pub fn dyadic_ladder(kmax: u32) -> Vec<BigRational> {
    (0..=kmax)
        .map(|k| BigRational::new(BigInt::one(), BigInt::from(2u8).pow(k)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::is_discrete_analytic;
    use num_complex::Complex64;

    type Q = GaussRat;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn q(s: &str) -> Q {
        s.parse().unwrap()
    }

    #[test]
    fn mesh_point_construction() {
        let p = MeshPoint::from_coords(&r(1, 1), &r(-1, 2), r(1, 4)).unwrap();
        assert_eq!((p.j, p.k), (4, -2));
        assert_eq!(p.value::<Q>(), q("1-1/2i"));
        assert!(MeshPoint::from_coords(&r(1, 3), &r(0, 1), r(1, 2)).is_err());
        assert!(MeshPoint::new(-1, 0, r(1, 2)).is_err());
        assert!(MeshPoint::new(1, 0, r(0, 1)).is_err());
    }

    #[test]
    fn basis_poly_h_examples() {
        for h in [r(1, 1), r(1, 3), r(1, 8)] {
            let x = r(2, 1);
            let p = MeshPoint::from_coords(&x, &r(0, 1), h).unwrap();
            assert_eq!(basis_poly_h::<Q>(1, &p), Q::real(x));
        }
        let p = MeshPoint::from_coords(&r(1, 1), &r(0, 1), r(1, 2)).unwrap();
        assert_eq!(basis_poly_h::<Q>(2, &p), q("1/4"));
        let p = MeshPoint::from_coords(&r(1, 1), &r(0, 1), r(1, 4)).unwrap();
        assert_eq!(basis_poly_h::<Q>(2, &p), q("3/8"));
    }

    #[test]
    fn rescaling_matches_product_formula_on_real_axis() {
        for h in [r(1, 1), r(1, 2), r(1, 3), r(2, 5), r(1, 16)] {
            for j in 0..12 {
                let x = &h * BigRational::from_integer(j.into());
                let p = MeshPoint::new(j, 0, h.clone()).unwrap();
                for n in 0..10 {
                    assert_eq!(
                        basis_poly_h::<Q>(n, &p),
                        Q::real(falling_product_h(n, &x, &h))
                    );
                }
            }
        }
    }

    #[test]
    fn mesh_operators() {
        let h = r(1, 3);
        let w = Window::new(0, 8, -3, 3).unwrap();
        let one =
            MeshFunction::new(h.clone(), LatticeFunction::from_scalar_fn(w, |_| Q::one())).unwrap();
        let z = z_h(&one).unwrap();
        for p in w.points() {
            let mp = MeshPoint::new(p.x, p.y, h.clone()).unwrap();
            assert_eq!(z.at(p.x, p.y).unwrap()[(0, 0)], mp.value::<Q>());
        }
        for n in 1..6 {
            let d = delta_xh(&basis_table_h::<Q>(n, w, &h)).unwrap();
            let prev = basis_table_h::<Q>(n - 1, w, &h);
            for (p, v) in d.values.iter() {
                assert_eq!(v, prev.values.at(p));
            }
        }
        let f = basis_table_h::<Q>(3, w, &h);
        let back = delta_xh(&z_h(&f).unwrap()).unwrap();
        for (p, v) in back.values.iter() {
            assert_eq!(v, f.values.at(p));
        }
    }

    #[test]
    fn mesh_basis_is_discrete_analytic() {
        let w = Window::new(0, 6, -4, 4).unwrap();
        for n in 0..8 {
            let t = basis_table_h::<Q>(n, w, &r(1, 4));
            assert_eq!(
                is_discrete_analytic(&t.values, 0.0).unwrap().max_residual,
                0.0
            );
        }
    }

    #[test]
    fn kernel_h_examples() {
        let h = r(1, 2);
        let zero = MeshPoint::new(0, 0, h.clone()).unwrap();
        let w = MeshPoint::new(3, -2, h.clone()).unwrap();
        assert_eq!(kernel_h::<Q>(&zero, &w, 20).unwrap().value, Q::one());
        let errs: Vec<f64> = dyadic_ladder(3)
            .into_iter()
            .map(|h| {
                let k = (BigRational::one() / &h).to_integer();
                let p = MeshPoint::new(i64::try_from(k).unwrap(), 0, h).unwrap();
                let kh = kernel_h::<Q>(&p, &p, 60).unwrap().value;
                let lim = limit_kernel::<Q>(&Q::one(), &Q::one(), 60).value;
                (kh - lim).modulus()
            })
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    }

    #[test]
    fn limit_kernel_value() {
        let one = Complex64::new(1.0, 0.0);
        let k = limit_kernel(&one, &one, 60);
        assert!((k.value.re - 2.279_585_302_336_067_3).abs() < 1e-15);
        assert!(k.tail_estimate < 1e-15);
    }

    #[test]
    fn adjoint_examples() {
        let c = adjoint_identity_check(1, 0).unwrap();
        assert_eq!(
            (c.lhs.clone(), c.rhs.clone(), c.equal),
            (r(1, 1), r(1, 1), true)
        );
        let c = adjoint_identity_check(3, 1).unwrap();
        assert_eq!(
            (c.lhs.clone(), c.rhs.clone(), c.equal),
            (r(0, 1), r(0, 1), true)
        );
        let c = adjoint_identity_check(4, 3).unwrap();
        assert_eq!(
            (c.lhs.clone(), c.rhs.clone(), c.equal),
            (r(144, 1), r(144, 1), true)
        );
        for n in 0..=10 {
            for m in 0..=10 {
                assert!(adjoint_identity_check(n, m).unwrap().equal);
            }
        }
        assert!(adjoint_identity_check(21, 0).is_err());
    }

    #[test]
    fn mesh_convergence_rows() {
        let rows = mesh_convergence::<Q>(2, &r(1, 1), &r(0, 1), &dyadic_ladder(2)).unwrap();
        let values: Vec<Q> = rows.iter().map(|row| row.value.clone()).collect();
        assert_eq!(values, ["0", "1/4", "3/8"].map(q));
        assert!(rows.iter().all(|row| row.limit == q("1/2")));
        assert!(mesh_convergence::<Q>(2, &r(1, 3), &r(0, 1), &dyadic_ladder(2)).is_err());
    }

    #[test]
    fn complex_point_converges() {
        let rows = mesh_convergence::<Q>(4, &r(1, 1), &r(1, 1), &dyadic_ladder(6)).unwrap();
        let errs: Vec<f64> = rows.iter().map(|row| row.abs_err).collect();
        assert!(errs.last().unwrap() < &errs[0]);
        assert!(errs.last().unwrap() < &0.2, "{errs:?}");
    }

    #[test]
    fn mesh_hardy_adjoint_identity() {
        let h = r(1, 2);
        let w = Window::new(0, 30, -1, 1).unwrap();
        let f = CoefficientSeries::scalar(["1", "-2", "1/3+i", "0", "5", "1/7"].map(q).to_vec())
            .unwrap();
        let g =
            CoefficientSeries::scalar(["2i", "1", "0", "-1/2", "3", "1", "1/4"].map(q).to_vec())
                .unwrap();
        let ft = series_table_h(&f, w, &h);
        let gt = series_table_h(&g, w, &h);
        let df = taylor_coefficients_h(&delta_xh(&ft).unwrap(), 12).unwrap();
        let zg = taylor_coefficients_h(&z_h(&gt).unwrap(), 12).unwrap();
        let fc = taylor_coefficients_h(&ft, 12).unwrap();
        let gc = taylor_coefficients_h(&gt, 12).unwrap();
        assert_eq!(fc.trimmed(), f.trimmed());
        assert_eq!(gc.trimmed(), g.trimmed());
        assert_eq!(df.inner(&gc).unwrap(), fc.inner(&zg).unwrap());
    }
}
