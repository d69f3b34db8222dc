//! Rational discrete analytic functions `f(z) = D + C(I − zA)^{−⊙} ⊙ (zB)`.
//!
//! A realization `(A, B, C, D)` is admissible when neither `−2α₊` nor `−2α₋`
//! is an eigenvalue of `A`. Its transfer function `D + tC(I − tA)^{−1}B`
//! is the classical rational function with the same Taylor coefficients
//! (the Markov parameters `D, CB, CAB, …`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::basis::{iterated_dx, z_apply, CoefficientSeries};
use crate::error::{Error, Result};
use crate::lattice::{LatticeFunction, LatticePoint, Window};
use crate::matrix::Mat;
use crate::scalar::{GaussRat, Mode, Scalar};

/// Float-mode Hankel rank threshold, relative to the largest singular value.
pub const HANKEL_REL_TOL: f64 = 1e-8;

/// Float-mode admissibility threshold on the smallest singular value of `I + α±A`.
pub const ADMISSIBILITY_TOL: f64 = 1e-12;

/// State-space quadruple.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization<T> {
    pub a: Mat<T>,
    pub b: Mat<T>,
    pub c: Mat<T>,
    pub d: Mat<T>,
}

impl<T: Scalar> Realization<T> {
    pub fn new(a: Mat<T>, b: Mat<T>, c: Mat<T>, d: Mat<T>) -> Result<Self> {
        let n = a.rows();
        if !a.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "A is {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        if b.rows() != n || c.cols() != n || c.rows() != d.rows() || b.cols() != d.cols() {
            return Err(Error::ShapeMismatch(format!(
                "A {n}x{n}, B {}x{}, C {}x{}, D {}x{}",
                b.rows(),
                b.cols(),
                c.rows(),
                c.cols(),
                d.rows(),
                d.cols()
            )));
        }
        Ok(Self { a, b, c, d })
    }

    /// Zero-state realization of a constant.
    pub fn constant(d: Mat<T>) -> Self {
        let (m, p) = d.shape();
        Self {
            a: Mat::zeros(0, 0),
            b: Mat::zeros(0, p),
            c: Mat::zeros(m, 0),
            d,
        }
    }

    /// Scalar realization from four entries.
    pub fn scalar(a: T, b: T, c: T, d: T) -> Self {
        Self {
            a: Mat::scalar(a),
            b: Mat::scalar(b),
            c: Mat::scalar(c),
            d: Mat::scalar(d),
        }
    }

    pub fn state_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn outputs(&self) -> usize {
        self.d.rows()
    }

    pub fn inputs(&self) -> usize {
        self.d.cols()
    }

    /// Converts between scalar modes. Exact values convert exactly; float values
    /// become the exact binary rational they represent.
    pub fn convert<U: Scalar>(&self) -> Realization<U> {
        let entry = |v: &T| match T::MODE {
            Mode::Exact => U::from_gauss(
                &v.to_string()
                    .parse::<GaussRat>()
                    .expect("exact display parses"),
            ),
            Mode::Float => U::from_c64(v.to_c64()),
        };
        let f = |m: &Mat<T>| Mat::from_fn(m.rows(), m.cols(), |r, c| entry(&m[(r, c)]));
        Realization {
            a: f(&self.a),
            b: f(&self.b),
            c: f(&self.c),
            d: f(&self.d),
        }
    }

    /// `{n, m, p, A, B, C, D, mode}` with entries as `[re, im]` pairs.
    pub fn to_json(&self) -> Value {
        json!({
            "n": self.state_dim(),
            "m": self.outputs(),
            "p": self.inputs(),
            "A": self.a.to_json(),
            "B": self.b.to_json(),
            "C": self.c.to_json(),
            "D": self.d.to_json(),
            "mode": T::MODE,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let dim = |key: &str| -> Result<usize> {
            v[key]
                .as_u64()
                .map(|n| n as usize)
                .ok_or_else(|| Error::Parse(format!("missing `{key}`")))
        };
        let (n, m, p) = (dim("n")?, dim("m")?, dim("p")?);
        Self::new(
            Mat::from_json(&v["A"], (n, n))?,
            Mat::from_json(&v["B"], (n, p))?,
            Mat::from_json(&v["C"], (m, n))?,
            Mat::from_json(&v["D"], (m, p))?,
        )
    }
}

/// Outcome of the spectral exclusion test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// The singular factor, `"I+α₊A"` or `"I+α₋A"`, when inadmissible.
    pub witness: Option<String>,
}

/// True iff `I + α₊A` and `I + α₋A` are both invertible.
///
/// Exact mode uses exact determinants; float mode compares the smallest
/// singular value with `tol`.
pub fn check_admissible<T: Scalar>(a: &Mat<T>, tol: f64) -> Admissibility {
    assert!(a.is_square(), "admissibility of a non-square matrix");
    let n = a.rows();
    let id = Mat::<T>::identity(n);
    for (label, alpha) in [("I+α₊A", T::alpha_plus()), ("I+α₋A", T::alpha_minus())] {
        let factor = &id + &a.scale(&alpha);
        let singular = match T::MODE {
            Mode::Exact => factor.det().map(|d| d.is_zero()).unwrap_or(true),
            Mode::Float => factor.singular_values().last().is_some_and(|&s| s <= tol),
        };
        if singular {
            return Admissibility {
                admissible: false,
                witness: Some(label.to_string()),
            };
        }
    }
    Admissibility {
        admissible: true,
        witness: None,
    }
}

fn require_admissible<T: Scalar>(a: &Mat<T>) -> Result<()> {
    let adm = check_admissible(a, ADMISSIBILITY_TOL);
    match adm.witness {
        None => Ok(()),
        Some(witness) => Err(Error::Inadmissible { witness }),
    }
}

/// The pair `(I + A, (I + α₊A)(I + α₋A)^{−1})` of horizontal and vertical step matrices.
fn step_matrices<T: Scalar>(a: &Mat<T>) -> Result<(Mat<T>, Mat<T>, Mat<T>)> {
    require_admissible(a)?;
    let id = Mat::<T>::identity(a.rows());
    let right = &id + a;
    let plus = &id + &a.scale(&T::alpha_plus());
    let minus = &id + &a.scale(&T::alpha_minus());
    let up = &plus * &minus.inverse()?;
    let down = &minus * &plus.inverse()?;
    Ok((right, up, down))
}

/// `e_A(z) = (I+A)^{Re z} (I+α₊A)^{Im z} (I+α₋A)^{−Im z}`.
pub fn resolvent_eval<T: Scalar>(a: &Mat<T>, z: LatticePoint) -> Result<Mat<T>> {
    z.require_half_lattice()?;
    let (right, up, down) = step_matrices(a)?;
    let horiz = right.pow(z.x as u32);
    let vert = if z.y >= 0 {
        up.pow(z.y as u32)
    } else {
        down.pow(z.y.unsigned_abs() as u32)
    };
    Ok(&horiz * &vert)
}

/// `e_A` tabulated over a window by the step recurrences.
pub fn resolvent_table<T: Scalar>(a: &Mat<T>, window: Window) -> Result<LatticeFunction<T>> {
    let (right, up, down) = step_matrices(a)?;
    let n = a.rows();
    let mut base = right.pow(window.x0 as u32);
    let mut values = std::collections::HashMap::with_capacity(window.len());
    for x in window.x0..=window.x1 {
        let mut cur = base.clone();
        values.insert(LatticePoint::new(x, 0), cur.clone());
        for y in 1..=window.y1 {
            cur = &up * &cur;
            values.insert(LatticePoint::new(x, y), cur.clone());
        }
        let mut cur = base.clone();
        for y in (window.y0..0).rev() {
            cur = &down * &cur;
            values.insert(LatticePoint::new(x, y), cur.clone());
        }
        base = &right * &base;
    }
    LatticeFunction::from_fn(window, n, n, |p| values.remove(&p).expect("filled"))
}

fn spanning_window(window: Window) -> Window {
    Window::new(0, window.x1, window.y0.min(0), window.y1.max(0)).expect("valid window")
}

/// `f = D + C·Z(e_A B)` tabulated over a window.
///
/// `Z` is the discrete antiderivative, computed by exact staircase
/// integration, so singular `A` is handled.
pub fn rational_table<T: Scalar>(r: &Realization<T>, window: Window) -> Result<LatticeFunction<T>> {
    require_admissible(&r.a)?;
    let (m, p) = r.d.shape();
    if r.state_dim() == 0 {
        return LatticeFunction::from_fn(window, m, p, |_| r.d.clone());
    }
    let span = spanning_window(window);
    let ea = resolvent_table(&r.a, span)?;
    let eab = ea.map(|e| e * &r.b)?;
    let zg = z_apply(&eab)?;
    LatticeFunction::from_fn(window, m, p, |pt| &r.d + &(&r.c * zg.at(pt)))
}

/// Evaluates the rational function at one point.
pub fn rational_eval<T: Scalar>(r: &Realization<T>, z: LatticePoint) -> Result<Mat<T>> {
    let w = Window::new(z.x, z.x, z.y, z.y)?;
    Ok(rational_table(r, w)?.at(z).clone())
}

/// Closed form `D + C(e_A(z) − I)A^{−1}B`, valid for invertible `A`.
pub fn rational_eval_closed<T: Scalar>(r: &Realization<T>, z: LatticePoint) -> Result<Mat<T>> {
    let ea = resolvent_eval(&r.a, z)?;
    let id = Mat::identity(r.state_dim());
    let ainv = r.a.inverse()?;
    Ok(&r.d + &(&(&r.c * &(&ea - &id)) * &(&ainv * &r.b)))
}

/// `D, CB, CAB, …` as a list of matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovSequence<T> {
    terms: Vec<Mat<T>>,
}

impl<T: Scalar> MarkovSequence<T> {
    pub fn new(terms: Vec<Mat<T>>) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::InvalidArgument("empty Markov sequence".into()));
        };
        let shape = first.shape();
        if terms.iter().any(|t| t.shape() != shape) {
            return Err(Error::ShapeMismatch("Markov terms differ in shape".into()));
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[Mat<T>] {
        &self.terms
    }

    /// Number of terms after `D`.
    pub fn len(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn shape(&self) -> (usize, usize) {
        self.terms[0].shape()
    }

    pub fn to_series(&self) -> CoefficientSeries<T> {
        CoefficientSeries::new(self.terms.clone()).expect("nonempty, uniform shape")
    }

    pub fn from_series(s: &CoefficientSeries<T>) -> Self {
        Self {
            terms: s.coeffs().to_vec(),
        }
    }
}

/// `(D, CB, CAB, …, CA^{K−1}B)`.
pub fn markov_params<T: Scalar>(r: &Realization<T>, k: usize) -> MarkovSequence<T> {
    let mut terms = Vec::with_capacity(k + 1);
    terms.push(r.d.clone());
    let mut akb = r.b.clone();
    for _ in 0..k {
        terms.push(&r.c * &akb);
        akb = &r.a * &akb;
    }
    MarkovSequence { terms }
}

/// Classical transfer value `D + tC(I − tA)^{−1}B`.
pub fn transfer_eval<T: Scalar>(r: &Realization<T>, t: &T) -> Result<Mat<T>> {
    if r.state_dim() == 0 {
        return Ok(r.d.clone());
    }
    let m = &Mat::identity(r.state_dim()) - &r.a.scale(t);
    let inv = m
        .inverse()
        .map_err(|_| Error::Singular(format!("I - tA at t = {t}")))?;
    Ok(&r.d + &(&r.c * &inv).try_mul(&r.b.scale(t))?)
}

fn poly_eval<T: Scalar>(coeffs: &[T], t: &T) -> T {
    coeffs
        .iter()
        .rev()
        .fold(T::zero(), |acc, c| acc * t.clone() + c.clone())
}

/// Evaluates a matrix polynomial `Σ N_k t^k`.
pub fn matrix_poly_eval<T: Scalar>(coeffs: &[Mat<T>], t: &T) -> Mat<T> {
    let (m, p) = coeffs[0].shape();
    coeffs
        .iter()
        .rev()
        .fold(Mat::zeros(m, p), |acc, c| &acc.scale(t) + c)
}

/// Controllable-companion realization of `num(t)/den(t)`.
///
/// `den` must not vanish at `0`, `−α₊`, `−α₋`; the last two are exactly the
/// admissibility condition on the resulting state matrix.
pub fn realize_transfer<T: Scalar>(num: &[Mat<T>], den: &[T]) -> Result<Realization<T>> {
    let Some(first) = num.first() else {
        return Err(Error::InvalidArgument("empty numerator".into()));
    };
    let (m, p) = first.shape();
    if num.iter().any(|c| c.shape() != (m, p)) {
        return Err(Error::ShapeMismatch(
            "numerator coefficients differ in shape".into(),
        ));
    }
    let d0 = den.first().cloned().unwrap_or_else(T::zero);
    if d0.is_zero() {
        return Err(Error::PoleCondition("0".into()));
    }
    for (label, pt) in [("-α₊", -T::alpha_plus()), ("-α₋", -T::alpha_minus())] {
        if poly_eval(den, &pt).is_zero() {
            return Err(Error::PoleCondition(label.into()));
        }
    }
    let d: Vec<T> = den.iter().map(|c| c.clone() / d0.clone()).collect();
    let nm: Vec<Mat<T>> = num
        .iter()
        .map(|c| c.scale(&(T::one() / d0.clone())))
        .collect();
    let deg_num = nm.iter().rposition(|c| !c.is_zero()).unwrap_or(0);
    let deg_den = d.iter().rposition(|c| !c.is_zero()).unwrap_or(0);
    let order = deg_num.max(deg_den);
    let h0 = nm[0].clone();
    if order == 0 {
        return Ok(Realization::constant(h0));
    }
    let d_at = |j: usize| d.get(j).cloned().unwrap_or_else(T::zero);
    let n_at = |j: usize| nm.get(j).cloned().unwrap_or_else(|| Mat::zeros(m, p));
    // (num − h0·den)/t
    let q: Vec<Mat<T>> = (0..order)
        .map(|j| &n_at(j + 1) - &h0.scale(&d_at(j + 1)))
        .collect();
    let n = order * p;
    let mut a = Mat::zeros(n, n);
    for blk in 0..order - 1 {
        for k in 0..p {
            a[(blk * p + k, (blk + 1) * p + k)] = T::one();
        }
    }
    for j in 0..order {
        let coef = -d_at(order - j);
        for k in 0..p {
            a[((order - 1) * p + k, j * p + k)] = coef.clone();
        }
    }
    let mut b = Mat::zeros(n, p);
    for k in 0..p {
        b[((order - 1) * p + k, k)] = T::one();
    }
    let mut c = Mat::zeros(m, n);
    for i in 0..order {
        let beta = &q[order - 1 - i];
        for r in 0..m {
            for k in 0..p {
                c[(r, i * p + k)] = beta[(r, k)].clone();
            }
        }
    }
    Realization::new(a, b, c, h0)
}

/// Algebraic operations on realizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombineKind {
    Sum,
    Product,
}

impl FromStr for CombineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(CombineKind::Sum),
            "product" => Ok(CombineKind::Product),
            other => Err(Error::Parse(format!("unknown combination `{other}`"))),
        }
    }
}

impl fmt::Display for CombineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CombineKind::Sum => "sum",
            CombineKind::Product => "product",
        })
    }
}

/// `f₂ + f₁` (block diagonal) or `f₂ ⊙ f₁` (cascade). Dimensions are not reduced.
pub fn combine<T: Scalar>(
    kind: CombineKind,
    r2: &Realization<T>,
    r1: &Realization<T>,
) -> Result<Realization<T>> {
    require_admissible(&r1.a)?;
    require_admissible(&r2.a)?;
    match kind {
        CombineKind::Sum => {
            if r1.d.shape() != r2.d.shape() {
                return Err(Error::ShapeMismatch(format!(
                    "sum of {}x{} and {}x{} functions",
                    r2.outputs(),
                    r2.inputs(),
                    r1.outputs(),
                    r1.inputs()
                )));
            }
            Realization::new(
                Mat::block_diag(&r1.a, &r2.a),
                r1.b.vstack(&r2.b)?,
                r1.c.hstack(&r2.c)?,
                &r1.d + &r2.d,
            )
        }
        CombineKind::Product => {
            if r1.outputs() != r2.inputs() {
                return Err(Error::ShapeMismatch(format!(
                    "product needs outputs of f1 ({}) to equal inputs of f2 ({})",
                    r1.outputs(),
                    r2.inputs()
                )));
            }
            let (n1, n2) = (r1.state_dim(), r2.state_dim());
            let a = Mat::block(&r1.a, &Mat::zeros(n1, n2), &(&r2.b * &r1.c), &r2.a)?;
            let b = r1.b.vstack(&(&r2.b * &r1.d))?;
            let c = (&r2.d * &r1.c).hstack(&r2.c)?;
            Realization::new(a, b, c, &r2.d * &r1.d)
        }
    }
}

/// The `⊙`-inverse: `(A − BD^{−1}C, BD^{−1}, −D^{−1}C, D^{−1})`.
pub fn invert<T: Scalar>(r: &Realization<T>) -> Result<Realization<T>> {
    if !r.d.is_square() {
        return Err(Error::ShapeMismatch("D must be square to invert".into()));
    }
    let dinv =
        r.d.inverse()
            .map_err(|_| Error::Singular("feedthrough D".into()))?;
    let bd = &r.b * &dinv;
    let a_cross = &r.a - &(&bd * &r.c);
    require_admissible(&a_cross)?;
    Realization::new(a_cross, bd, -&(&dinv * &r.c), dinv)
}

fn hankel<T: Scalar>(
    terms: &[Mat<T>],
    block_rows: usize,
    block_cols: usize,
    shift: usize,
) -> Mat<T> {
    let (m, p) = terms[0].shape();
    Mat::from_fn(block_rows * m, block_cols * p, |r, c| {
        terms[r / m + c / p + 1 + shift][(r % m, c % p)].clone()
    })
}

/// Ho–Kalman realization from Markov parameters; returns the realization and
/// the McMillan degree (the Hankel rank).
///
/// With `K` parameters after `D`, the Hankel matrix has `⌈K/2⌉` block rows
/// and `⌊K/2⌋` block columns. The rank must already be stable when one block
/// row or one block column is removed; otherwise the data is reported as
/// insufficient. A degree-`n` SISO sequence needs `K ≥ 2n + 2`.
pub fn minimal_realization<T: Scalar>(seq: &MarkovSequence<T>) -> Result<(Realization<T>, usize)> {
    let terms = seq.terms();
    let k = terms.len() - 1;
    let (m, p) = seq.shape();
    if k < 2 {
        if terms[1..].iter().all(Mat::is_zero) {
            return Ok((Realization::constant(terms[0].clone()), 0));
        }
        return Err(Error::InsufficientData(format!("{k} Markov parameters")));
    }
    let rows = k.div_ceil(2);
    let cols = k - rows;
    let h = hankel(terms, rows, cols, 0);
    let degree = h.rank(HANKEL_REL_TOL);
    let fewer_rows = if rows > 1 {
        hankel(terms, rows - 1, cols, 0).rank(HANKEL_REL_TOL)
    } else {
        0
    };
    let fewer_cols = if cols > 1 {
        hankel(terms, rows, cols - 1, 0).rank(HANKEL_REL_TOL)
    } else {
        0
    };
    if fewer_rows != degree || fewer_cols != degree {
        return Err(Error::InsufficientData(format!(
            "Hankel rank {degree} has not stabilized with {k} Markov parameters"
        )));
    }
    if degree == 0 {
        if !terms[k].is_zero() {
            return Err(Error::InsufficientData(
                "only the last Markov parameter is nonzero".into(),
            ));
        }
        return Ok((Realization::constant(terms[0].clone()), 0));
    }
    let shifted = hankel(terms, rows, cols, 1);
    let r = match T::MODE {
        Mode::Exact => {
            let col_sel = h.pivot_columns(0.0);
            let row_sel = h.transpose().pivot_columns(0.0);
            debug_assert_eq!(col_sel.len(), degree);
            debug_assert_eq!(row_sel.len(), degree);
            let core_inv = h.select(&row_sel, &col_sel).inverse()?;
            let a = &core_inv * &shifted.select(&row_sel, &col_sel);
            let first_p: Vec<usize> = (0..p).collect();
            let first_m: Vec<usize> = (0..m).collect();
            let b = &core_inv * &h.select(&row_sel, &first_p);
            let c = h.select(&first_m, &col_sel);
            Realization::new(a, b, c, terms[0].clone())?
        }
        Mode::Float => {
            let svd = h.to_dmatrix().svd(true, true);
            let u = svd.u.as_ref().expect("requested U");
            let vt = svd.v_t.as_ref().expect("requested V*");
            let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
            order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
            let keep = &order[..degree];
            let sqrt_s: Vec<f64> = keep
                .iter()
                .map(|&i| svd.singular_values[i].sqrt())
                .collect();
            let obs = Mat::<T>::from_fn(h.rows(), degree, |r, c| {
                T::from_c64(u[(r, keep[c])] * sqrt_s[c])
            });
            let ctrb = Mat::<T>::from_fn(degree, h.cols(), |r, c| {
                T::from_c64(vt[(keep[r], c)] * sqrt_s[r])
            });
            // Pseudo-inverses of the balanced factors.
            let obs_pinv = Mat::<T>::from_fn(degree, h.rows(), |r, c| {
                T::from_c64(u[(c, keep[r])].conj() / sqrt_s[r])
            });
            let ctrb_pinv = Mat::<T>::from_fn(h.cols(), degree, |r, c| {
                T::from_c64(vt[(keep[c], r)].conj() / sqrt_s[c])
            });
            let a = &(&obs_pinv * &shifted) * &ctrb_pinv;
            let b = ctrb.submatrix(0..degree, 0..p);
            let c = obs.submatrix(0..m, 0..degree);
            Realization::new(a, b, c, terms[0].clone())?
        }
    };
    Ok((r, degree))
}

/// McMillan degree of a realization: Hankel rank of `2n + 2` Markov parameters.
pub fn mcmillan_degree<T: Scalar>(r: &Realization<T>) -> Result<usize> {
    let seq = markov_params(r, 2 * r.state_dim() + 2);
    minimal_realization(&seq).map(|(_, d)| d)
}

/// Realization of the Hardy kernel `K(·, w) = Σ z⁽ⁿ⁾ conj(w⁽ⁿ⁾)`.
///
/// Its transfer function is `conj(e_{t̄}(w)) = (1+t)^x (1+α₋t)^y / (1+α₊t)^y`
/// for `w = x + iy`, `y ≥ 0` (the roles of `α±` swap when `y < 0`).
pub fn kernel_realization<T: Scalar>(w: LatticePoint) -> Result<Realization<T>> {
    w.require_half_lattice()?;
    let (top, bottom) = if w.y >= 0 {
        (T::alpha_minus(), T::alpha_plus())
    } else {
        (T::alpha_plus(), T::alpha_minus())
    };
    let k = w.y.unsigned_abs() as usize;
    let mut num = vec![T::one()];
    let mul = |poly: &mut Vec<T>, c: &T| {
        poly.push(T::zero());
        for j in (1..poly.len()).rev() {
            let add = poly[j - 1].clone() * c.clone();
            poly[j] = poly[j].clone() + add;
        }
    };
    for _ in 0..w.x {
        mul(&mut num, &T::one());
    }
    for _ in 0..k {
        mul(&mut num, &top);
    }
    let mut den = vec![T::one()];
    for _ in 0..k {
        mul(&mut den, &bottom);
    }
    let num: Vec<Mat<T>> = num.into_iter().map(Mat::scalar).collect();
    realize_transfer(&num, &den)
}

/// Coefficients of `det(I − tA)` (Faddeev–LeVerrier).
pub fn det_poly<T: Scalar>(a: &Mat<T>) -> Vec<T> {
    let n = a.rows();
    // Characteristic polynomial det(sI − A) = Σ c_k s^k with c_n = 1.
    let mut c = vec![T::zero(); n + 1];
    c[n] = T::one();
    let id = Mat::<T>::identity(n);
    let mut mk = Mat::<T>::zeros(n, n);
    for k in 1..=n {
        mk = &(a * &mk) + &id.scale(&c[n - k + 1]);
        let am = a * &mk;
        c[n - k] = -(am.trace() / T::from_i64(k as i64));
    }
    // det(I − tA) = t^n det(t^{−1}I − A) reverses the coefficient order.
    c.reverse();
    c
}

/// A scalar polynomial `p = Σ c_k z⁽ᵏ⁾` with `Σ c_k t^k = det(I − tA)`;
/// `p ⊙ f` is a polynomial of degree at most `n`.
pub fn annihilating_polynomial<T: Scalar>(r: &Realization<T>) -> Result<CoefficientSeries<T>> {
    require_admissible(&r.a)?;
    CoefficientSeries::scalar(det_poly(&r.a))
}

/// Numerical rank of `span{δx f, …, δx^{kmax} f}` from window samples.
///
/// Exact mode ignores `tol`; float mode counts singular values above `tol · σ₁`.
pub fn backward_shift_rank<T: Scalar>(
    f: &LatticeFunction<T>,
    kmax: usize,
    tol: f64,
) -> Result<usize> {
    if kmax == 0 {
        return Ok(0);
    }
    let diffs = iterated_dx(f, kmax)?;
    let columns: Vec<Vec<T>> = diffs[1..]
        .iter()
        .map(|g| g.iter().flat_map(|(_, v)| v.as_slice().to_vec()).collect())
        .collect();
    let len = columns[0].len();
    let m = Mat::from_fn(len, kmax, |r, c| columns[c][r].clone());
    Ok(m.rank(tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{basis_poly, convolve, e_lambda, taylor_coefficients};
    use crate::lattice::is_discrete_analytic;
    use num_complex::Complex64;

    type Q = GaussRat;

    fn q(s: &str) -> Q {
        s.parse().unwrap()
    }

    fn m(rows: &[&[&str]]) -> Mat<Q> {
        Mat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|s| q(s)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn pt(x: i64, y: i64) -> LatticePoint {
        LatticePoint::new(x, y)
    }

    fn z_realization() -> Realization<Q> {
        Realization::scalar(Q::zero(), Q::one(), Q::one(), Q::zero())
    }

    fn two_state() -> Realization<Q> {
        Realization::new(
            m(&[&["1/2", "1/3"], &["-1/4", "1/5+1/2i"]]),
            m(&[&["1"], &["2"]]),
            m(&[&["1", "-1/2"]]),
            m(&[&["1/3"]]),
        )
        .unwrap()
    }

    #[test]
    fn admissibility_examples() {
        assert!(check_admissible(&Mat::<Q>::zeros(2, 2), 0.0).admissible);
        let bad = Mat::scalar(-(Q::alpha_plus() * Q::from_i64(2)));
        let adm = check_admissible(&bad, 0.0);
        assert!(!adm.admissible);
        // 1/α₋ = 2α₊, so the eigenvalue −2α₊ kills the α₋ factor.
        assert_eq!(adm.witness.as_deref(), Some("I+α₋A"));
        let bad = Mat::scalar(-(Q::alpha_minus() * Q::from_i64(2)));
        assert_eq!(
            check_admissible(&bad, 0.0).witness.as_deref(),
            Some("I+α₊A")
        );
        assert!(check_admissible(&Mat::scalar(Q::one()), 0.0).admissible);
        let fbad = Mat::scalar(Complex64::new(-1.0, -1.0));
        assert!(!check_admissible(&fbad, 1e-12).admissible);
    }

    #[test]
    fn resolvent_examples() {
        assert_eq!(
            resolvent_eval(&Mat::<Q>::zeros(2, 2), pt(3, -2)).unwrap(),
            Mat::identity(2)
        );
        let one = Mat::scalar(Q::one());
        assert_eq!(
            resolvent_eval(&one, pt(1, 0)).unwrap()[(0, 0)],
            Q::from_i64(2)
        );
        assert_eq!(
            resolvent_eval(&one, pt(0, 1)).unwrap()[(0, 0)],
            q("4/5+3/5i")
        );
        let bad = Mat::scalar(-(Q::alpha_plus() * Q::from_i64(2)));
        assert!(matches!(
            resolvent_eval(&bad, pt(1, 1)),
            Err(Error::Inadmissible { .. })
        ));
    }

    #[test]
    fn points_off_the_half_lattice_are_rejected() {
        let a = m(&[&["1/2"]]);
        assert!(matches!(
            resolvent_eval(&a, pt(-1, 0)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            kernel_realization::<Q>(pt(-1, 2)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn resolvent_scalar_matches_e_lambda() {
        let lam = q("2/3-1/7i");
        let a = Mat::scalar(lam.clone());
        for z in [pt(0, 0), pt(2, 3), pt(1, -4), pt(4, 1)] {
            assert_eq!(
                resolvent_eval(&a, z).unwrap()[(0, 0)],
                e_lambda(&lam, z).unwrap()
            );
        }
    }

    #[test]
    fn resolvent_step_relations_and_commutation() {
        let a = two_state().a;
        let w = Window::new(0, 4, -3, 3).unwrap();
        let table = resolvent_table(&a, w).unwrap();
        let id = Mat::<Q>::identity(2);
        let plus = &id + &a.scale(&Q::alpha_plus());
        let minus = &id + &a.scale(&Q::alpha_minus());
        let up = &plus * &minus.inverse().unwrap();
        for p in Window::new(0, 3, -3, 2).unwrap().points() {
            let e = resolvent_eval(&a, p).unwrap();
            assert_eq!(table.at(p), &e);
            assert_eq!(&(&id + &a) * &e, resolvent_eval(&a, p + pt(1, 0)).unwrap());
            assert_eq!(&up * &e, resolvent_eval(&a, p + pt(0, 1)).unwrap());
            assert_eq!(&a * &e, &e * &a);
        }
    }

    #[test]
    fn rational_eval_examples() {
        let c = Realization::new(
            Mat::zeros(1, 1),
            Mat::zeros(1, 1),
            Mat::scalar(q("3")),
            Mat::scalar(q("2-i")),
        )
        .unwrap();
        assert_eq!(rational_eval(&c, pt(3, -2)).unwrap()[(0, 0)], q("2-i"));
        let z = z_realization();
        for p in [pt(0, 0), pt(2, 3), pt(1, -2)] {
            assert_eq!(rational_eval(&z, p).unwrap()[(0, 0)], p.to_scalar());
        }
    }

    #[test]
    fn rational_eval_matches_closed_form_and_is_analytic() {
        let r = two_state();
        let w = Window::new(0, 4, -3, 3).unwrap();
        let table = rational_table(&r, w).unwrap();
        for p in [pt(0, 0), pt(3, 2), pt(2, -3), pt(4, 0)] {
            assert_eq!(table.at(p), &rational_eval_closed(&r, p).unwrap());
            assert_eq!(table.at(p), &rational_eval(&r, p).unwrap());
        }
        assert!(is_discrete_analytic(&table, 0.0).unwrap().analytic);
    }

    #[test]
    fn geometric_series_matches_resolvent_in_float() {
        let a = 0.9f64;
        let r: Realization<Complex64> = Realization::scalar(
            Complex64::new(a, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        );
        let z = pt(2, 3);
        let got = rational_eval(&r, z).unwrap()[(0, 0)];
        // Markov parameters (0, 1, a, a², …): Σ_{n≥1} a^{n−1} z⁽ⁿ⁾.
        let basis = crate::basis::basis_coeffs::<Complex64>(z, 300);
        let series: Complex64 = (1..=300).map(|n| basis[n] * a.powi(n as i32 - 1)).sum();
        assert!((got - series).norm() <= 1e-9, "{got} vs {series}");
    }

    #[test]
    fn markov_examples() {
        let r = Realization::new(
            Mat::zeros(1, 1),
            Mat::scalar(q("2")),
            Mat::scalar(q("3")),
            Mat::scalar(q("5")),
        )
        .unwrap();
        let seq = markov_params(&r, 4);
        let vals: Vec<Q> = seq.terms().iter().map(|t| t[(0, 0)].clone()).collect();
        assert_eq!(vals, ["5", "6", "0", "0", "0"].map(q));
        let r = Realization::scalar(Q::one(), Q::one(), Q::one(), Q::zero());
        let vals: Vec<Q> = markov_params(&r, 4)
            .terms()
            .iter()
            .map(|t| t[(0, 0)].clone())
            .collect();
        assert_eq!(vals, ["0", "1", "1", "1", "1"].map(q));
    }

    #[test]
    fn markov_equals_taylor_coefficients() {
        let r = two_state();
        let w = Window::new(0, 6, -1, 1).unwrap();
        let table = rational_table(&r, w).unwrap();
        let taylor = taylor_coefficients(&table, 6).unwrap();
        assert_eq!(markov_params(&r, 6).to_series(), taylor);
    }

    #[test]
    fn transfer_examples() {
        let r = z_realization();
        assert_eq!(transfer_eval(&r, &Q::zero()).unwrap()[(0, 0)], Q::zero());
        let r = Realization::scalar(Q::one(), Q::one(), Q::one(), Q::zero());
        assert_eq!(
            transfer_eval(&r, &Q::from_ratio(1, 2)).unwrap()[(0, 0)],
            Q::one()
        );
        assert!(matches!(
            transfer_eval(&r, &Q::one()),
            Err(Error::Singular(_))
        ));

        let rf = two_state().convert::<Complex64>();
        let t = Complex64::new(0.1, 0.0);
        let seq = markov_params(&rf, 8);
        let series: Complex64 = seq
            .terms()
            .iter()
            .enumerate()
            .map(|(k, h)| h[(0, 0)] * t.powi(k as i32))
            .sum();
        let exact = transfer_eval(&rf, &t).unwrap()[(0, 0)];
        // Tail after order 8 is below ρ(A)^9 t^9 ≈ 1e−9·‖C‖‖B‖; compare with a matching bound.
        assert!((series - exact).norm() <= 1e-8);
    }

    #[test]
    fn realize_transfer_examples() {
        let num = vec![Mat::scalar(Q::zero()), Mat::scalar(Q::one())];
        let r = realize_transfer(&num, &[Q::one()]).unwrap();
        assert_eq!(r, z_realization());
        let r = realize_transfer(&[Mat::scalar(q("7/2"))], &[Q::one()]).unwrap();
        assert_eq!(r.state_dim(), 0);
        assert_eq!(r.d[(0, 0)], q("7/2"));
        // den = 1 + α₊⁻¹·t... vanishing at −α₊: den(t) = t + α₊.
        let den = vec![Q::alpha_plus(), Q::one()];
        assert!(matches!(
            realize_transfer(&num, &den),
            Err(Error::PoleCondition(_))
        ));
        assert!(matches!(
            realize_transfer(&num, &[Q::zero(), Q::one()]),
            Err(Error::PoleCondition(_))
        ));
    }

    #[test]
    fn realize_transfer_reproduces_quotient() {
        let num: Vec<Mat<Q>> = ["1", "-2+i", "1/3", "0", "5"]
            .iter()
            .map(|s| Mat::scalar(q(s)))
            .collect();
        let den: Vec<Q> = ["2", "1/2", "-1"].map(q).to_vec();
        let r = realize_transfer(&num, &den).unwrap();
        assert!(check_admissible(&r.a, 0.0).admissible);
        for t in ["0", "1/7", "-1/3+1/5i", "2/9i", "1/4-1/4i"] {
            let t = q(t);
            let expect = matrix_poly_eval(&num, &t)[(0, 0)].clone() / poly_eval(&den, &t);
            assert_eq!(transfer_eval(&r, &t).unwrap()[(0, 0)], expect);
        }
    }

    #[test]
    fn realize_transfer_matrix_valued() {
        let num = vec![
            m(&[&["1", "0"], &["2", "1/2"]]),
            m(&[&["0", "1"], &["-1", "i"]]),
        ];
        let den = vec![Q::one(), q("1/3")];
        let r = realize_transfer(&num, &den).unwrap();
        assert_eq!(r.state_dim(), 2);
        let t = q("1/5+1/2i");
        let expect = matrix_poly_eval(&num, &t).scale(&(Q::one() / poly_eval(&den, &t)));
        assert_eq!(transfer_eval(&r, &t).unwrap(), expect);
    }

    #[test]
    fn product_with_identity_and_transfer_multiplicativity() {
        let r2 = two_state();
        let id = Realization::constant(Mat::<Q>::identity(1));
        let p = combine(CombineKind::Product, &r2, &id).unwrap();
        assert_eq!(markov_params(&p, 6), markov_params(&r2, 6));
        let r1 = Realization::scalar(q("1/2i"), q("1"), q("-1"), q("2"));
        let prod = combine(CombineKind::Product, &r2, &r1).unwrap();
        for t in ["1/5", "-1/3", "1/7i", "1/4+1/8i", "0"] {
            let t = q(t);
            let lhs = transfer_eval(&prod, &t).unwrap();
            let rhs = &transfer_eval(&r2, &t).unwrap() * &transfer_eval(&r1, &t).unwrap();
            assert_eq!(lhs, rhs);
        }
        let conv = convolve(
            &markov_params(&r2, 8).to_series(),
            &markov_params(&r1, 8).to_series(),
            Some(8),
        )
        .unwrap();
        assert_eq!(markov_params(&prod, 8).to_series(), conv);
    }

    #[test]
    fn sum_is_linear() {
        let r1 = two_state();
        let r2 = Realization::scalar(q("1/2i"), q("1"), q("-1"), q("2"));
        let s = combine(CombineKind::Sum, &r2, &r1).unwrap();
        let z = pt(2, -1);
        let lhs = rational_eval(&s, z).unwrap();
        let rhs = &rational_eval(&r1, z).unwrap() + &rational_eval(&r2, z).unwrap();
        assert_eq!(lhs, rhs);
        let wide = Realization::constant(Mat::<Q>::zeros(1, 2));
        assert!(combine(CombineKind::Sum, &wide, &r1).is_err());
        assert!(combine(
            CombineKind::Product,
            &r1,
            &Realization::constant(Mat::<Q>::zeros(2, 2))
        )
        .is_err());
    }

    #[test]
    fn resolvent_polynomial_is_inverted() {
        // 1 − z·a has realization (0, −a, 1, 1); its ⊙-inverse is e_a.
        let a = q("1/3+1/2i");
        let poly = Realization::scalar(Q::zero(), -a.clone(), Q::one(), Q::one());
        let inv = invert(&poly).unwrap();
        for p in [pt(0, 0), pt(2, 1), pt(1, -3)] {
            assert_eq!(
                rational_eval(&inv, p).unwrap()[(0, 0)],
                e_lambda(&a, p).unwrap()
            );
        }
        let prod = combine(CombineKind::Product, &inv, &poly).unwrap();
        let seq = markov_params(&prod, 8);
        assert_eq!(seq.terms()[0], Mat::identity(1));
        assert!(seq.terms()[1..].iter().all(Mat::is_zero));
    }

    #[test]
    fn invert_errors_and_constant() {
        let c = Realization::constant(m(&[&["2", "1"], &["1", "1"]]));
        let inv = invert(&c).unwrap();
        assert_eq!(inv.d, m(&[&["1", "-1"], &["-1", "2"]]));
        let sing = Realization::constant(m(&[&["1", "1"], &["1", "1"]]));
        assert!(matches!(invert(&sing), Err(Error::Singular(_))));
        // A^× = 0 − 1·1⁻¹·(2α₊) = −2α₊ is inadmissible.
        let r = Realization::scalar(
            Q::zero(),
            Q::one(),
            Q::alpha_plus() * Q::from_i64(2),
            Q::one(),
        );
        assert!(matches!(invert(&r), Err(Error::Inadmissible { .. })));
    }

    #[test]
    fn inverse_product_is_identity() {
        let r = two_state();
        let inv = invert(&r).unwrap();
        for prod in [
            combine(CombineKind::Product, &inv, &r).unwrap(),
            combine(CombineKind::Product, &r, &inv).unwrap(),
        ] {
            let seq = markov_params(&prod, 8);
            assert_eq!(seq.terms()[0], Mat::identity(1));
            assert!(seq.terms()[1..].iter().all(Mat::is_zero));
        }
    }

    #[test]
    fn minimal_realization_examples() {
        let ones: Vec<Mat<Q>> = (0..8)
            .map(|k| Mat::scalar(if k == 0 { Q::zero() } else { Q::one() }))
            .collect();
        let (r, deg) = minimal_realization(&MarkovSequence::new(ones.clone()).unwrap()).unwrap();
        assert_eq!(deg, 1);
        assert_eq!(markov_params(&r, 7).terms(), &ones[..]);
        let c: Vec<Mat<Q>> = (0..6)
            .map(|k| Mat::scalar(if k == 0 { q("3") } else { Q::zero() }))
            .collect();
        assert_eq!(
            minimal_realization(&MarkovSequence::new(c).unwrap())
                .unwrap()
                .1,
            0
        );
        // Too few terms for a degree-2 sequence.
        let short: Vec<Mat<Q>> = ["0", "1", "0", "1"]
            .iter()
            .map(|s| Mat::scalar(q(s)))
            .collect();
        assert!(matches!(
            minimal_realization(&MarkovSequence::new(short).unwrap()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn minimal_realization_reduces_nonminimal_sum() {
        let r = two_state();
        let doubled = combine(CombineKind::Sum, &r, &r).unwrap();
        assert_eq!(doubled.state_dim(), 4);
        let seq = markov_params(&doubled, 12);
        let (min, deg) = minimal_realization(&seq).unwrap();
        assert_eq!(deg, 2);
        assert_eq!(markov_params(&min, 12), seq);
        let (again, deg2) = minimal_realization(&markov_params(&min, 12)).unwrap();
        assert_eq!(deg2, 2);
        assert_eq!(again.state_dim(), 2);
    }

    #[test]
    fn float_ho_kalman_reproduces_markov() {
        let r = two_state().convert::<Complex64>();
        let seq = markov_params(&r, 12);
        let (min, deg) = minimal_realization(&seq).unwrap();
        assert_eq!(deg, 2);
        for (a, b) in markov_params(&min, 12).terms().iter().zip(seq.terms()) {
            assert!((a - b).max_abs() < 1e-10);
        }
    }

    #[test]
    fn kernel_realization_examples() {
        let r = kernel_realization::<Q>(pt(1, 0)).unwrap();
        let vals: Vec<Q> = markov_params(&r, 4)
            .terms()
            .iter()
            .map(|t| t[(0, 0)].clone())
            .collect();
        assert_eq!(vals, ["1", "1", "0", "0", "0"].map(q));
        assert_eq!(mcmillan_degree(&r).unwrap(), 1);
        let r0 = kernel_realization::<Q>(pt(0, 0)).unwrap();
        assert_eq!(r0.state_dim(), 0);
        assert_eq!(mcmillan_degree(&r0).unwrap(), 0);
        let ri = kernel_realization::<Q>(pt(0, 1)).unwrap();
        assert_eq!(mcmillan_degree(&ri).unwrap(), 1);
        let w = pt(0, 1);
        for (n, h) in markov_params(&ri, 10).terms().iter().enumerate() {
            assert_eq!(h[(0, 0)], basis_poly::<Q>(n, w).conj());
        }
    }

    #[test]
    fn kernel_markov_parameters_are_conjugate_basis_values() {
        for w in [pt(2, 3), pt(3, -2), pt(1, -1), pt(0, -3)] {
            let r = kernel_realization::<Q>(w).unwrap();
            for (n, h) in markov_params(&r, 14).terms().iter().enumerate() {
                assert_eq!(h[(0, 0)], basis_poly::<Q>(n, w).conj(), "w={w} n={n}");
            }
        }
        assert_eq!(
            mcmillan_degree(&kernel_realization::<Q>(pt(2, 3)).unwrap()).unwrap(),
            5
        );
    }

    #[test]
    fn det_poly_examples() {
        assert_eq!(det_poly(&Mat::<Q>::zeros(0, 0)), vec![Q::one()]);
        assert_eq!(det_poly(&Mat::scalar(q("3"))), vec![Q::one(), q("-3")]);
        let a = m(&[&["1", "2"], &["3", "4"]]);
        // det(I − tA) = 1 − 5t − 2t²
        assert_eq!(det_poly(&a), ["1", "-5", "-2"].map(q).to_vec());
    }

    #[test]
    fn annihilating_polynomial_examples() {
        let p = annihilating_polynomial(&z_realization()).unwrap();
        assert_eq!(p.coeffs().len(), 2);
        assert_eq!(p.coeff(0)[(0, 0)], Q::one());
        assert!(p.coeff(1).is_zero());

        let a = q("1/3-1/2i");
        // e_a = 1 + Z(a e_a): Markov (1, a, a², …).
        let ea = Realization::scalar(a.clone(), a.clone(), Q::one(), Q::one());
        let p = annihilating_polynomial(&ea).unwrap();
        assert_eq!(p, CoefficientSeries::scalar(vec![Q::one(), -a]).unwrap());
        let prod = convolve(&p, &markov_params(&ea, 10).to_series(), Some(10)).unwrap();
        assert_eq!(prod.coeff(0)[(0, 0)], Q::one());
        assert!(prod.coeffs()[1..].iter().all(Mat::is_zero));

        let r = two_state();
        let p = annihilating_polynomial(&r).unwrap();
        let prod = convolve(&p, &markov_params(&r, 12).to_series(), Some(12)).unwrap();
        assert!(prod.coeffs()[3..].iter().all(Mat::is_zero));
        assert!(!prod.coeff(2).is_zero());
    }

    #[test]
    fn backward_shift_rank_examples() {
        let w = Window::new(0, 10, -2, 2).unwrap();
        let table = rational_table(&two_state(), w).unwrap();
        assert_eq!(backward_shift_rank(&table, 5, 0.0).unwrap(), 2);
        let c = LatticeFunction::from_scalar_fn(w, |_| q("2+i"));
        assert_eq!(backward_shift_rank(&c, 4, 0.0).unwrap(), 0);
        let z3 = crate::basis::basis_table::<Q>(3, w);
        assert_eq!(backward_shift_rank(&z3, 6, 0.0).unwrap(), 3);
        let narrow =
            LatticeFunction::from_scalar_fn(Window::new(0, 2, 0, 0).unwrap(), |_| Q::one());
        assert!(backward_shift_rank(&narrow, 5, 0.0).is_err());
    }

    #[test]
    fn vanishing_markov_means_zero_function() {
        let r = Realization::new(
            Mat::zeros(2, 2),
            m(&[&["1"], &["0"]]),
            m(&[&["0", "1"]]),
            Mat::zeros(1, 1),
        )
        .unwrap();
        assert!(markov_params(&r, 6).terms().iter().all(Mat::is_zero));
        let table = rational_table(&r, Window::new(0, 5, -6, 6).unwrap()).unwrap();
        assert!(table.is_zero());
    }

    #[test]
    fn json_round_trip() {
        let r = two_state();
        let back = Realization::<Q>::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        let c = Realization::constant(m(&[&["1", "2"]]));
        assert_eq!(Realization::<Q>::from_json(&c.to_json()).unwrap(), c);
    }
}
