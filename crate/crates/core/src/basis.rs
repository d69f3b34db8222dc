//! Basis polynomials `z⁽ⁿ⁾`, the exponentials `e_λ`, the forward shift `Z`,
//! and coefficient-space (Hardy space) machinery.
//!
//! `z⁽ⁿ⁾` is the coefficient of `λⁿ` in
//! `e_λ(z) = (1+λ)^x (1+α₊λ)^y (1+α₋λ)^{−y}`; the table is built by
//! polynomial multiplication and truncated series division, which stays exact
//! in Gaussian-rational mode.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lattice::{
    apply_difference, integral_table, DiffKind, LatticeFunction, LatticePoint, Window,
};
use crate::matrix::Mat;
use crate::scalar::Scalar;

/// Default truncation order for generated series.
pub const DEFAULT_TERMS: usize = 256;

/// Number of trailing increments inspected by the divergence heuristic.
const DIVERGENCE_WINDOW: usize = 10;

/// Multiplies a truncated series by `(1 + cλ)` in place.
fn mul_linear<T: Scalar>(s: &mut [T], c: &T) {
    for k in (1..s.len()).rev() {
        let add = s[k - 1].clone() * c.clone();
        s[k] = s[k].clone() + add;
    }
}

/// Divides a truncated series by `(1 + cλ)` in place.
fn div_linear<T: Scalar>(s: &mut [T], c: &T) {
    for k in 1..s.len() {
        let sub = s[k - 1].clone() * c.clone();
        s[k] = s[k].clone() - sub;
    }
}

/// `z⁽⁰⁾, z⁽¹⁾, …, z⁽ⁿ⁾` at a point of the right half-lattice.
///
/// Panics if `Re z < 0`.
pub fn basis_coeffs<T: Scalar>(z: LatticePoint, n: usize) -> Vec<T> {
    debug_assert!(
        z.in_half_lattice(),
        "basis polynomials are taken on Re z >= 0"
    );
    let mut s = vec![T::zero(); n + 1];
    s[0] = T::one();
    let one = T::one();
    for _ in 0..z.x.max(0) {
        mul_linear(&mut s, &one);
    }
    let (up, down) = if z.y >= 0 {
        (T::alpha_plus(), T::alpha_minus())
    } else {
        (T::alpha_minus(), T::alpha_plus())
    };
    for _ in 0..z.y.unsigned_abs() {
        mul_linear(&mut s, &up);
        div_linear(&mut s, &down);
    }
    s
}

/// The basis polynomial `z⁽ⁿ⁾` at `z`.
pub fn basis_poly<T: Scalar>(n: usize, z: LatticePoint) -> T {
    basis_coeffs::<T>(z, n).pop().expect("n + 1 coefficients")
}

/// Table of `z⁽ⁿ⁾` over a window.
pub fn basis_table<T: Scalar>(n: usize, window: Window) -> LatticeFunction<T> {
    LatticeFunction::from_scalar_fn(window, |p| basis_poly(n, p))
}

/// CSV rows `x,y,n,re,im` for `z⁽ᵏ⁾`, `k ≤ n_max`, over a window.
pub fn basis_csv<T: Scalar>(n_max: usize, window: Window) -> String {
    let mut out = String::from("x,y,n,re,im\n");
    for p in window.points() {
        for (k, v) in basis_coeffs::<T>(p, n_max).iter().enumerate() {
            let (re, im) = v.to_json_pair();
            let plain = |v: Value| match v {
                Value::String(s) => s,
                other => other.to_string(),
            };
            let _ = writeln!(out, "{},{},{},{},{}", p.x, p.y, k, plain(re), plain(im));
        }
    }
    out
}

/// `e_λ(z) = (1+λ)^{Re z} ((1+α₊λ)/(1+α₋λ))^{Im z}`.
pub fn e_lambda<T: Scalar>(lambda: &T, z: LatticePoint) -> Result<T> {
    let num = T::one() + T::alpha_plus() * lambda.clone();
    let den = T::one() + T::alpha_minus() * lambda.clone();
    if den.is_zero() {
        return Err(Error::InvalidArgument(format!(
            "1 + α₋λ vanishes at λ = {lambda}"
        )));
    }
    let base = (T::one() + lambda.clone()).pow(z.x.max(0) as u32);
    let k = z.y.unsigned_abs() as u32;
    if z.y >= 0 {
        Ok(base * (num / den).pow(k))
    } else {
        if num.is_zero() {
            return Err(Error::InvalidArgument(format!(
                "1 + α₊λ vanishes at λ = {lambda} and Im z < 0"
            )));
        }
        Ok(base * (den / num).pow(k))
    }
}

/// Table of `e_λ` over a window.
pub fn e_lambda_table<T: Scalar>(lambda: &T, window: Window) -> Result<LatticeFunction<T>> {
    LatticeFunction::try_from_fn(window, 1, 1, |p| Ok(Mat::scalar(e_lambda(lambda, p)?)))
}

/// The `δx`-eigenvalue whose eigenfunction is the `δy`-eigenfunction for `μ`: `−iμ/(1+α₊μ)`.
pub fn mu_to_lambda<T: Scalar>(mu: &T) -> Result<T> {
    let den = T::one() + T::alpha_plus() * mu.clone();
    if den.is_zero() {
        return Err(Error::InvalidArgument(format!(
            "1 + α₊μ vanishes at μ = {mu}"
        )));
    }
    Ok(-(T::i() * mu.clone()) / den)
}

/// The `δx`-eigenfunction for `λ = −1` on the half-lattice.
pub fn e_minus_one<T: Scalar>(z: LatticePoint) -> T {
    if z.x == 0 {
        let minus_i = -T::i();
        if z.y >= 0 {
            minus_i.pow(z.y as u32)
        } else {
            (T::one() / minus_i).pow(z.y.unsigned_abs() as u32)
        }
    } else {
        T::zero()
    }
}

/// `(Zf)(z) = (f(0) − f(z))/2 + ∫₀^z f δz` on the same window.
///
/// The integral follows the canonical staircase; for discrete analytic `f`
/// any other path gives the same value.
pub fn z_apply<T: Scalar>(f: &LatticeFunction<T>) -> Result<LatticeFunction<T>> {
    let integral = integral_table(f)?;
    let f0 = f.get(LatticePoint::ORIGIN)?.clone();
    let half = T::from_ratio(1, 2);
    let (r, c) = f.shape();
    LatticeFunction::from_fn(f.window(), r, c, |p| {
        let diff = (&f0 - f.at(p)).scale(&half);
        &diff + integral.at(p)
    })
}

/// Finite sequence of matrix coefficients `f̂(0..=N)` of `Σ f̂(n) z⁽ⁿ⁾`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSeries<T> {
    rows: usize,
    cols: usize,
    coeffs: Vec<Mat<T>>,
}

impl<T: Scalar> CoefficientSeries<T> {
    pub fn new(coeffs: Vec<Mat<T>>) -> Result<Self> {
        let Some(first) = coeffs.first() else {
            return Err(Error::InvalidArgument(
                "series needs at least one coefficient".into(),
            ));
        };
        let (rows, cols) = first.shape();
        if coeffs.iter().any(|c| c.shape() != (rows, cols)) {
            return Err(Error::ShapeMismatch("coefficients differ in shape".into()));
        }
        Ok(Self { rows, cols, coeffs })
    }

    /// Scalar series from a coefficient list.
    pub fn scalar(coeffs: Vec<T>) -> Result<Self> {
        Self::new(coeffs.into_iter().map(Mat::scalar).collect())
    }

    pub fn zero(rows: usize, cols: usize, len: usize) -> Self {
        Self {
            rows,
            cols,
            coeffs: vec![Mat::zeros(rows, cols); len.max(1)],
        }
    }

    /// `cⁿ` for `n ≤ order` (the generating series of `e_c`).
    pub fn geometric(c: &T, order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut cur = T::one();
        for _ in 0..=order {
            coeffs.push(Mat::scalar(cur.clone()));
            cur = cur * c.clone();
        }
        Self {
            rows: 1,
            cols: 1,
            coeffs,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Highest stored index `N`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Mat<T>] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Mat<T> {
        self.coeffs
            .get(n)
            .cloned()
            .unwrap_or_else(|| Mat::zeros(self.rows, self.cols))
    }

    /// `δx` in coefficient space: `f̂(n) ↦ f̂(n+1)`.
    pub fn backward_shift(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero(self.rows, self.cols, 1);
        }
        Self {
            rows: self.rows,
            cols: self.cols,
            coeffs: self.coeffs[1..].to_vec(),
        }
    }

    /// `Z` in coefficient space: prepend a zero coefficient.
    pub fn forward_shift(&self) -> Self {
        let mut coeffs = vec![Mat::zeros(self.rows, self.cols)];
        coeffs.extend(self.coeffs.iter().cloned());
        Self {
            rows: self.rows,
            cols: self.cols,
            coeffs,
        }
    }

    /// Drops trailing zero coefficients (keeps at least one).
    pub fn trimmed(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() > 1 && coeffs.last().is_some_and(Mat::is_zero) {
            coeffs.pop();
        }
        Self {
            rows: self.rows,
            cols: self.cols,
            coeffs,
        }
    }

    /// Coefficientwise inner product `Σ tr(f̂(n) ĝ(n)*)`.
    pub fn inner(&self, other: &Self) -> Result<T> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(
                "inner product of differently shaped series".into(),
            ));
        }
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut acc = T::zero();
        for k in 0..n {
            let a = self.coeff(k);
            let b = other.coeff(k);
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                acc = acc + x.clone() * y.conj();
            }
        }
        Ok(acc)
    }

    /// JSON `{rows, cols, mode, coeffs:[matrix...]}`, each matrix as rows of `[re, im]` pairs.
    pub fn to_json(&self) -> Value {
        json!({
            "rows": self.rows,
            "cols": self.cols,
            "mode": T::MODE,
            "coeffs": self.coeffs.iter().map(Mat::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let dim = |key: &str| -> Result<usize> {
            v[key]
                .as_u64()
                .map(|n| n as usize)
                .ok_or_else(|| Error::Parse(format!("missing `{key}`")))
        };
        let (rows, cols) = (dim("rows")?, dim("cols")?);
        let list = v["coeffs"]
            .as_array()
            .ok_or_else(|| Error::Parse("missing `coeffs`".into()))?;
        let coeffs = list
            .iter()
            .map(|m| {
                // A scalar series may list bare `[re, im]` pairs.
                if rows == 1
                    && cols == 1
                    && m.as_array()
                        .is_some_and(|a| a.len() == 2 && !a[0].is_array())
                {
                    let a = m.as_array().expect("checked");
                    Ok(Mat::scalar(T::from_json_pair(&a[0], &a[1])?))
                } else {
                    Mat::from_json(m, (rows, cols))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let s = Self::new(coeffs)?;
        if s.shape() != (rows, cols) {
            return Err(Error::ShapeMismatch("series shape".into()));
        }
        Ok(s)
    }
}

/// `(δxⁿ f)(0)` for `n ≤ order`; the window must contain `0..=order` on the real axis.
pub fn taylor_coefficients<T: Scalar>(
    f: &LatticeFunction<T>,
    order: usize,
) -> Result<CoefficientSeries<T>> {
    let w = f.window();
    if !(w.x0 == 0 && w.x1 >= order as i64 && w.y0 <= 0 && w.y1 >= 0) {
        return Err(Error::WindowTooSmall(format!(
            "window {w} does not contain the real segment [0..{order}]"
        )));
    }
    let mut row: Vec<Mat<T>> = (0..=order as i64)
        .map(|x| f.at(LatticePoint::new(x, 0)).clone())
        .collect();
    let mut coeffs = Vec::with_capacity(order + 1);
    for _ in 0..=order {
        coeffs.push(row[0].clone());
        row = row.windows(2).map(|p| &p[1] - &p[0]).collect();
    }
    CoefficientSeries::new(coeffs)
}

/// Partial sum of a series at a point, with the divergence flag.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesValue<T> {
    pub value: Mat<T>,
    pub terms: usize,
    /// The last ten term magnitudes grew strictly monotonically.
    pub diverging: bool,
}

/// `Σ_{n≤N} c(n) z⁽ⁿ⁾`.
pub fn series_eval<T: Scalar>(c: &CoefficientSeries<T>, z: LatticePoint) -> SeriesValue<T> {
    let basis = basis_coeffs::<T>(z, c.order());
    let mut value = Mat::zeros(c.rows, c.cols);
    let mut increments = Vec::with_capacity(c.coeffs.len());
    for (coef, b) in c.coeffs.iter().zip(&basis) {
        let term = coef.scale(b);
        increments.push(term.max_abs());
        value = &value + &term;
    }
    let diverging = increments.len() > DIVERGENCE_WINDOW
        && increments[increments.len() - DIVERGENCE_WINDOW - 1..]
            .windows(2)
            .all(|p| p[1] > p[0]);
    SeriesValue {
        value,
        terms: c.coeffs.len(),
        diverging,
    }
}

/// Tabulates a (finite) series over a window.
pub fn series_table<T: Scalar>(c: &CoefficientSeries<T>, window: Window) -> LatticeFunction<T> {
    LatticeFunction::from_fn(window, c.rows, c.cols, |p| series_eval(c, p).value)
        .expect("series values share the series shape")
}

/// Cauchy product `Σ_{m≤n} â(m) b̂(n−m)`, truncated at `min(Na + Nb, max_order)`.
pub fn convolve<T: Scalar>(
    a: &CoefficientSeries<T>,
    b: &CoefficientSeries<T>,
    max_order: Option<usize>,
) -> Result<CoefficientSeries<T>> {
    if a.cols != b.rows {
        return Err(Error::ShapeMismatch(format!(
            "cannot convolve {}x{} with {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let full = a.order() + b.order();
    let top = max_order.map_or(full, |m| m.min(full));
    let mut coeffs = Vec::with_capacity(top + 1);
    for n in 0..=top {
        let mut acc = Mat::zeros(a.rows, b.cols);
        for m in n.saturating_sub(b.order())..=n.min(a.order()) {
            acc = &acc + &(&a.coeffs[m] * &b.coeffs[n - m]);
        }
        coeffs.push(acc);
    }
    CoefficientSeries::new(coeffs)
}

/// `Σ ‖ĉ(n)‖²_F` in the field (exact in exact mode).
pub fn h2_norm_sqr<T: Scalar>(c: &CoefficientSeries<T>) -> T {
    c.coeffs
        .iter()
        .fold(T::zero(), |acc, m| acc + m.frobenius_sqr())
}

/// Hardy-space norm `sqrt(Σ ‖ĉ(n)‖²_F)`.
pub fn h2_norm<T: Scalar>(c: &CoefficientSeries<T>) -> f64 {
    h2_norm_sqr(c).to_c64().re.max(0.0).sqrt()
}

/// `δxᵏ f` restricted to the common window of all `k ≤ kmax`.
pub fn iterated_dx<T: Scalar>(
    f: &LatticeFunction<T>,
    kmax: usize,
) -> Result<Vec<LatticeFunction<T>>> {
    let mut out = vec![f.clone()];
    for _ in 0..kmax {
        let next = apply_difference(DiffKind::Dx, out.last().expect("nonempty"))?;
        out.push(next);
    }
    let common = out.last().expect("nonempty").window();
    out.iter().map(|g| g.restrict(common)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::is_discrete_analytic;
    use crate::scalar::GaussRat;
    use num_complex::Complex64;

    type Q = GaussRat;

    fn q(s: &str) -> Q {
        s.parse().unwrap()
    }

    fn pt(x: i64, y: i64) -> LatticePoint {
        LatticePoint::new(x, y)
    }

    #[test]
    fn basis_examples() {
        assert_eq!(basis_poly::<Q>(0, pt(5, -3)), Q::one());
        assert_eq!(basis_poly::<Q>(2, pt(3, 0)), Q::from_i64(3));
        assert_eq!(basis_poly::<Q>(2, pt(1, 1)), q("-1/2+1/2i"));
        assert_eq!(basis_poly::<Q>(1, pt(2, -3)), q("2-3i"));
    }

    /// Coefficient extraction by brute-force expansion of each factor to full
    /// length, independent of the in-place multiply/divide routines.
    fn brute_coeff(n: usize, z: LatticePoint) -> Q {
        let len = n + 1;
        let mul = |a: &[Q], b: &[Q]| -> Vec<Q> {
            (0..len)
                .map(|k| (0..=k).fold(Q::zero(), |acc, j| acc + a[j].clone() * b[k - j].clone()))
                .collect()
        };
        let binom_series = |c: Q, e: i64| -> Vec<Q> {
            // (1 + cλ)^e via generalized binomial coefficients.
            let mut out = Vec::with_capacity(len);
            let mut coef = Q::one();
            for k in 0..len as i64 {
                out.push(coef.clone() * c.pow(k as u32));
                coef = coef * Q::from_ratio(e - k, k + 1);
            }
            out
        };
        let a = binom_series(Q::one(), z.x);
        let b = binom_series(Q::alpha_plus(), z.y);
        let c = binom_series(Q::alpha_minus(), -z.y);
        mul(&mul(&a, &b), &c)[n].clone()
    }

    #[test]
    fn basis_matches_binomial_expansion_oracle() {
        for x in 0..4 {
            for y in -3..4 {
                for n in 0..7 {
                    assert_eq!(
                        basis_poly::<Q>(n, pt(x, y)),
                        brute_coeff(n, pt(x, y)),
                        "n={n} z={x}{y:+}i"
                    );
                }
            }
        }
    }

    #[test]
    fn e_lambda_examples() {
        assert_eq!(e_lambda(&Q::zero(), pt(3, -2)).unwrap(), Q::one());
        let lam = q("2/3-1/5i");
        assert_eq!(e_lambda(&lam, pt(1, 0)).unwrap(), Q::one() + lam);
        assert_eq!(e_lambda(&Q::one(), pt(0, 1)).unwrap(), q("4/5+3/5i"));
        let bad = -(Q::alpha_plus() * Q::from_i64(2));
        assert!(e_lambda(&bad, pt(0, 1)).is_err());
    }

    #[test]
    fn mu_to_lambda_examples() {
        assert_eq!(mu_to_lambda(&Q::zero()).unwrap(), Q::zero());
        assert_eq!(mu_to_lambda(&Q::i()).unwrap(), q("1-i"));
        let bad = -(Q::alpha_minus() * Q::from_i64(2));
        assert!(mu_to_lambda(&bad).is_err());
        let mu = q("1/3+1/4i");
        let lam = mu_to_lambda(&mu).unwrap();
        let w = Window::new(0, 3, -2, 2).unwrap();
        let e = e_lambda_table(&lam, w).unwrap();
        let dy = apply_difference(DiffKind::Dy, &e).unwrap();
        for p in [pt(0, 0), pt(1, -2), pt(2, 1), pt(3, 0), pt(1, 1)] {
            assert_eq!(
                dy.scalar_at(p).unwrap(),
                mu.clone() * e.scalar_at(p).unwrap()
            );
        }
    }

    #[test]
    fn e_minus_one_values_and_eigenrelation() {
        assert_eq!(e_minus_one::<Q>(pt(0, 0)), Q::one());
        assert_eq!(e_minus_one::<Q>(pt(0, 1)), -Q::i());
        assert_eq!(e_minus_one::<Q>(pt(1, 5)), Q::zero());
        let w = Window::new(0, 4, -3, 3).unwrap();
        let f = LatticeFunction::from_scalar_fn(w, e_minus_one::<Q>);
        assert!(is_discrete_analytic(&f, 0.0).unwrap().analytic);
        let dx = apply_difference(DiffKind::Dx, &f).unwrap();
        for (p, v) in dx.iter() {
            assert_eq!(v[(0, 0)], -f.scalar_at(p).unwrap());
        }
    }

    #[test]
    fn z_apply_identities() {
        let w = Window::new(0, 5, -3, 3).unwrap();
        let one = LatticeFunction::from_scalar_fn(w, |_| Q::one());
        let z1 = z_apply(&one).unwrap();
        assert_eq!(z1, basis_table::<Q>(1, w));
        let f = basis_table::<Q>(3, w);
        let f = f
            .combine(
                &Q::one(),
                &e_lambda_table(&q("1/2+1/3i"), w).unwrap(),
                &Q::from_i64(2),
            )
            .unwrap();
        let zf = z_apply(&f).unwrap();
        let back = apply_difference(DiffKind::Dx, &zf).unwrap();
        assert_eq!(back, f.restrict(back.window()).unwrap());
        let dxf = apply_difference(DiffKind::Dx, &f).unwrap();
        let zdx = z_apply(&dxf).unwrap();
        let f0 = f.scalar_at(LatticePoint::ORIGIN).unwrap();
        for (p, v) in zdx.iter() {
            assert_eq!(v[(0, 0)], f.scalar_at(p).unwrap() - f0.clone());
        }
    }

    #[test]
    fn z_apply_requires_origin() {
        let w = Window::new(1, 3, 0, 2).unwrap();
        let f = LatticeFunction::from_scalar_fn(w, |_| Q::one());
        assert!(z_apply(&f).is_err());
    }

    #[test]
    fn taylor_examples() {
        let w = Window::new(0, 6, -1, 1).unwrap();
        let c = taylor_coefficients(&basis_table::<Q>(3, w), 5).unwrap();
        let expect: Vec<Q> = [0, 0, 0, 1, 0, 0].iter().map(|&v| Q::from_i64(v)).collect();
        assert_eq!(c, CoefficientSeries::scalar(expect).unwrap());
        let k = LatticeFunction::from_scalar_fn(w, |_| q("3-2i"));
        let c = taylor_coefficients(&k, 3).unwrap();
        assert_eq!(c.coeff(0)[(0, 0)], q("3-2i"));
        assert!(c.coeffs()[1..].iter().all(Mat::is_zero));
        let half = Q::from_ratio(1, 2);
        let c = taylor_coefficients(&e_lambda_table(&half, w).unwrap(), 4).unwrap();
        assert_eq!(c, CoefficientSeries::geometric(&half, 4));
        assert!(taylor_coefficients(&k, 7).is_err());
    }

    #[test]
    fn series_eval_examples() {
        let c = CoefficientSeries::scalar(vec![Q::zero(), Q::zero(), Q::one()]).unwrap();
        let z = pt(2, 3);
        assert_eq!(series_eval(&c, z).value[(0, 0)], basis_poly::<Q>(2, z));

        let lam = Complex64::new(0.9, 0.0);
        let s = CoefficientSeries::geometric(&lam, 200);
        let v = series_eval(&s, z);
        assert!(!v.diverging);
        assert!((v.value[(0, 0)] - e_lambda(&lam, z).unwrap()).norm() <= 1e-8);

        let big = CoefficientSeries::geometric(&Complex64::new(2.0, 0.0), 60);
        assert!(series_eval(&big, pt(1, 1)).diverging);
    }

    #[test]
    fn convolution_examples() {
        let one_plus_z = CoefficientSeries::scalar(vec![Q::one(), Q::one()]).unwrap();
        let sq = convolve(&one_plus_z, &one_plus_z, None).unwrap();
        assert_eq!(
            sq,
            CoefficientSeries::scalar(vec![Q::one(), Q::from_i64(2), Q::one()]).unwrap()
        );
        let unit = CoefficientSeries::scalar(vec![Q::one(), Q::zero(), Q::zero()]).unwrap();
        let b = CoefficientSeries::scalar(vec![q("1/2"), q("i"), q("-3")]).unwrap();
        assert_eq!(convolve(&unit, &b, Some(2)).unwrap(), b);
        let zz = CoefficientSeries::scalar(vec![Q::zero(), Q::one()]).unwrap();
        let prod = convolve(&zz, &zz, None).unwrap();
        assert_eq!(
            prod,
            CoefficientSeries::scalar(vec![Q::zero(), Q::zero(), Q::one()]).unwrap()
        );
        let m = CoefficientSeries::new(vec![Mat::<Q>::zeros(2, 3)]).unwrap();
        assert!(matches!(
            convolve(&m, &m, None),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn h2_norm_examples() {
        let z = CoefficientSeries::<Q>::zero(1, 1, 4);
        assert_eq!(h2_norm(&z), 0.0);
        let ones = CoefficientSeries::scalar(vec![Q::one(); 3]).unwrap();
        assert!((h2_norm(&ones) - 3f64.sqrt()).abs() < 1e-15);
        let f = CoefficientSeries::scalar(vec![q("1+i"), q("-2/3"), q("1/2i")]).unwrap();
        let lhs = h2_norm_sqr(&f.backward_shift());
        let rhs = h2_norm_sqr(&f) - f.coeff(0).frobenius_sqr();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn series_json_round_trip() {
        let f = CoefficientSeries::scalar(vec![q("1+i"), q("-2/3")]).unwrap();
        let back = CoefficientSeries::<Q>::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
        let bare =
            serde_json::json!({"rows": 1, "cols": 1, "coeffs": [["1/2", "0/1"], ["0/1", "1/1"]]});
        let s = CoefficientSeries::<Q>::from_json(&bare).unwrap();
        assert_eq!(s.coeff(1)[(0, 0)], Q::i());
    }

    #[test]
    fn csv_has_expected_columns() {
        let csv = basis_csv::<Q>(2, Window::new(0, 1, 0, 0).unwrap());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,y,n,re,im");
        assert_eq!(lines.len(), 1 + 2 * 3);
        assert_eq!(lines[5], "1,0,1,1/1,0/1");
    }
}
