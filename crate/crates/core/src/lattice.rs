//! Lattice geometry, window-backed lattice functions, difference operators,
//! the discrete Cauchy–Riemann test and discrete path integration.
//!
//! Functions live on finite rectangular windows of the right half-lattice
//! `ℤ₊ + iℤ`. Difference operators never extrapolate: the output window is
//! the input window minus the rows/columns the stencil consumes.

use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::{Mode, Scalar};

/// A point `x + iy` of the integer lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    pub x: i64,
    pub y: i64,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    /// Whether the point belongs to the right half-lattice.
    pub fn in_half_lattice(&self) -> bool {
        self.x >= 0
    }

    /// `Ok(self)` on the right half-lattice, an invalid-argument error otherwise.
    pub fn require_half_lattice(self) -> Result<Self> {
        if self.in_half_lattice() {
            Ok(self)
        } else {
            Err(Error::InvalidArgument(format!(
                "{self} is not in the half-lattice"
            )))
        }
    }

    pub fn conj(&self) -> Self {
        Self::new(self.x, -self.y)
    }

    pub fn to_scalar<T: Scalar>(&self) -> T {
        T::from_i64(self.x) + T::i() * T::from_i64(self.y)
    }

    fn is_unit_step_to(&self, other: &Self) -> bool {
        (self.x - other.x).abs() + (self.y - other.y).abs() == 1
    }
}

impl Add for LatticePoint {
    type Output = LatticePoint;
    fn add(self, rhs: Self) -> Self {
        LatticePoint::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.x, self.y) {
            (x, 0) => write!(f, "{x}"),
            (0, 1) => write!(f, "i"),
            (0, -1) => write!(f, "-i"),
            (0, y) => write!(f, "{y}i"),
            (x, 1) => write!(f, "{x}+i"),
            (x, -1) => write!(f, "{x}-i"),
            (x, y) if y < 0 => write!(f, "{x}{y}i"),
            (x, y) => write!(f, "{x}+{y}i"),
        }
    }
}

impl FromStr for LatticePoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let z: crate::scalar::GaussRat = s.parse()?;
        let as_int = |r: &num_rational::BigRational| -> Result<i64> {
            if !r.is_integer() {
                return Err(Error::Parse(format!("`{s}` is not a lattice point")));
            }
            num_traits::ToPrimitive::to_i64(r.numer())
                .ok_or_else(|| Error::Parse(format!("`{s}` is out of range")))
        };
        Ok(LatticePoint::new(as_int(&z.re)?, as_int(&z.im)?))
    }
}

/// Inclusive rectangle `[x0..x1] × [y0..y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub x0: i64,
    pub x1: i64,
    pub y0: i64,
    pub y1: i64,
}

impl Window {
    /// A nonempty window inside the right half-lattice.
    pub fn new(x0: i64, x1: i64, y0: i64, y1: i64) -> Result<Self> {
        if x0 < 0 {
            return Err(Error::InvalidArgument(format!(
                "window x0 = {x0} leaves the right half-lattice"
            )));
        }
        if x1 < x0 || y1 < y0 {
            return Err(Error::InvalidArgument(format!(
                "empty window [{x0}..{x1}]x[{y0}..{y1}]"
            )));
        }
        Ok(Self { x0, x1, y0, y1 })
    }

    /// Smallest window holding the origin and `z`.
    pub fn spanning(z: LatticePoint) -> Result<Self> {
        Self::new(0, z.x, z.y.min(0), z.y.max(0))
    }

    pub fn width(&self) -> usize {
        (self.x1 - self.x0 + 1) as usize
    }

    pub fn height(&self) -> usize {
        (self.y1 - self.y0 + 1) as usize
    }

    pub fn len(&self) -> usize {
        self.width() * self.height()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        (self.x0..=self.x1).contains(&p.x) && (self.y0..=self.y1).contains(&p.y)
    }

    /// Points in x-major order.
    pub fn points(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        (self.x0..=self.x1)
            .flat_map(move |x| (self.y0..=self.y1).map(move |y| LatticePoint::new(x, y)))
    }

    fn index_of(&self, p: LatticePoint) -> usize {
        ((p.x - self.x0) as usize) * self.height() + (p.y - self.y0) as usize
    }

    /// Shrinks by `dx` columns on the right and `dy` rows on top.
    fn shrink(&self, dx: i64, dy: i64) -> Result<Self> {
        if self.x1 - self.x0 < dx || self.y1 - self.y0 < dy {
            return Err(Error::WindowTooSmall(format!(
                "window [{}..{}]x[{}..{}] cannot absorb a stencil of size {}x{}",
                self.x0,
                self.x1,
                self.y0,
                self.y1,
                dx + 1,
                dy + 1
            )));
        }
        Ok(Self {
            x0: self.x0,
            x1: self.x1 - dx,
            y0: self.y0,
            y1: self.y1 - dy,
        })
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}..{}]x[{}..{}]", self.x0, self.x1, self.y0, self.y1)
    }
}

/// Matrix-valued function sampled on a window of the right half-lattice.
#[derive(Clone, PartialEq)]
pub struct LatticeFunction<T> {
    window: Window,
    rows: usize,
    cols: usize,
    values: Vec<Mat<T>>,
}

impl<T: Scalar> LatticeFunction<T> {
    pub fn from_fn(
        window: Window,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(LatticePoint) -> Mat<T>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(window.len());
        for p in window.points() {
            let v = f(p);
            if v.shape() != (rows, cols) {
                return Err(Error::ShapeMismatch(format!(
                    "value at {p} is {}x{}, expected {rows}x{cols}",
                    v.rows(),
                    v.cols()
                )));
            }
            values.push(v);
        }
        Ok(Self {
            window,
            rows,
            cols,
            values,
        })
    }

    pub fn try_from_fn(
        window: Window,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(LatticePoint) -> Result<Mat<T>>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(window.len());
        for p in window.points() {
            values.push(f(p)?);
        }
        let mut it = values.into_iter();
        Self::from_fn(window, rows, cols, |_| it.next().expect("window size"))
    }

    /// Scalar (1×1) function.
    pub fn from_scalar_fn(window: Window, mut f: impl FnMut(LatticePoint) -> T) -> Self {
        Self::from_fn(window, 1, 1, |p| Mat::scalar(f(p))).expect("1x1 values")
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, p: LatticePoint) -> Result<&Mat<T>> {
        if !self.window.contains(p) {
            return Err(Error::OutsideWindow(format!(
                "{p} (window {})",
                self.window
            )));
        }
        Ok(&self.values[self.window.index_of(p)])
    }

    /// Value at a point known to be in the window.
    pub fn at(&self, p: LatticePoint) -> &Mat<T> {
        &self.values[self.window.index_of(p)]
    }

    /// Entry (0,0) at `p`; convenient for scalar functions.
    pub fn scalar_at(&self, p: LatticePoint) -> Result<T> {
        Ok(self.get(p)?[(0, 0)].clone())
    }

    pub fn iter(&self) -> impl Iterator<Item = (LatticePoint, &Mat<T>)> + '_ {
        self.window.points().zip(self.values.iter())
    }

    pub fn restrict(&self, window: Window) -> Result<Self> {
        if !(self
            .window
            .contains(LatticePoint::new(window.x0, window.y0))
            && self
                .window
                .contains(LatticePoint::new(window.x1, window.y1)))
        {
            return Err(Error::OutsideWindow(format!(
                "{window} is not inside {}",
                self.window
            )));
        }
        Self::from_fn(window, self.rows, self.cols, |p| self.at(p).clone())
    }

    pub fn map(&self, f: impl Fn(&Mat<T>) -> Mat<T>) -> Result<Self> {
        let first = f(&self.values[0]);
        let (r, c) = first.shape();
        Self::from_fn(self.window, r, c, |p| f(self.at(p)))
    }

    /// Pointwise `a·self + b·other` on the intersection-free case of equal windows.
    pub fn combine(&self, a: &T, other: &Self, b: &T) -> Result<Self> {
        if self.window != other.window || self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(
                "functions differ in window or shape".into(),
            ));
        }
        Self::from_fn(self.window, self.rows, self.cols, |p| {
            &self.at(p).scale(a) + &other.at(p).scale(b)
        })
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Mat::is_zero)
    }

    /// Largest entry modulus over the window.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(Mat::max_abs).fold(0.0, f64::max)
    }

    /// `{window, rows, cols, mode, values:[{x, y, re:[..], im:[..]}]}`, entries row-major.
    pub fn to_json(&self) -> Value {
        let values: Vec<Value> = self
            .iter()
            .map(|(p, m)| {
                let (re, im): (Vec<Value>, Vec<Value>) =
                    m.as_slice().iter().map(Scalar::to_json_pair).unzip();
                json!({ "x": p.x, "y": p.y, "re": re, "im": im })
            })
            .collect();
        json!({
            "window": self.window,
            "rows": self.rows,
            "cols": self.cols,
            "mode": T::MODE,
            "values": values,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let window: Window = serde_json::from_value(v["window"].clone())
            .map_err(|e| Error::Parse(format!("window: {e}")))?;
        let window = Window::new(window.x0, window.x1, window.y0, window.y1)?;
        let dim = |key: &str| -> Result<usize> {
            v[key]
                .as_u64()
                .map(|n| n as usize)
                .ok_or_else(|| Error::Parse(format!("missing `{key}`")))
        };
        let (rows, cols) = (dim("rows")?, dim("cols")?);
        let entries = v["values"]
            .as_array()
            .ok_or_else(|| Error::Parse("missing `values`".into()))?;
        let mut slots: Vec<Option<Mat<T>>> = vec![None; window.len()];
        for e in entries {
            let p = LatticePoint::new(
                e["x"]
                    .as_i64()
                    .ok_or_else(|| Error::Parse("value without x".into()))?,
                e["y"]
                    .as_i64()
                    .ok_or_else(|| Error::Parse("value without y".into()))?,
            );
            if !window.contains(p) {
                return Err(Error::OutsideWindow(p.to_string()));
            }
            let re = e["re"]
                .as_array()
                .ok_or_else(|| Error::Parse("value without re".into()))?;
            let im = e["im"]
                .as_array()
                .ok_or_else(|| Error::Parse("value without im".into()))?;
            if re.len() != rows * cols || im.len() != rows * cols {
                return Err(Error::ShapeMismatch(format!(
                    "value at {p} has wrong length"
                )));
            }
            let data = re
                .iter()
                .zip(im)
                .map(|(a, b)| T::from_json_pair(a, b))
                .collect::<Result<Vec<_>>>()?;
            slots[window.index_of(p)] = Some(Mat::from_vec(rows, cols, data));
        }
        if let Some(idx) = slots.iter().position(Option::is_none) {
            let p = window.points().nth(idx).expect("index in window");
            return Err(Error::Parse(format!("no value at {p}")));
        }
        let mut it = slots.into_iter().flatten();
        Self::from_fn(window, rows, cols, |_| it.next().expect("checked"))
    }
}

impl<T: Scalar> fmt::Debug for LatticeFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "LatticeFunction{{window: {}, shape: {}x{}, mode: {}}}",
            self.window,
            self.rows,
            self.cols,
            T::MODE
        )
    }
}

/// Difference operators on lattice functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffKind {
    /// `f(z+1) − f(z)`
    Dx,
    /// `f(z+i) − f(z)`
    Dy,
    /// `α₋δx + α₊δy + ½δxδy`; annihilates discrete analytic functions.
    Dbar,
    /// `α₊δx + α₋δy + ½δxδy`
    D,
    /// `½(δx − δy)`, equal to `−(i/2)D` on discrete analytic functions.
    Derivative,
}

impl FromStr for DiffKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dx" => Ok(DiffKind::Dx),
            "dy" => Ok(DiffKind::Dy),
            "dbar" => Ok(DiffKind::Dbar),
            "d" => Ok(DiffKind::D),
            "derivative" => Ok(DiffKind::Derivative),
            other => Err(Error::Parse(format!(
                "unknown difference operator `{other}`"
            ))),
        }
    }
}

fn step_x<T: Scalar>(f: &LatticeFunction<T>, out: Window) -> Result<LatticeFunction<T>> {
    LatticeFunction::from_fn(out, f.rows, f.cols, |p| {
        f.at(p + LatticePoint::new(1, 0)) - f.at(p)
    })
}

fn step_y<T: Scalar>(f: &LatticeFunction<T>, out: Window) -> Result<LatticeFunction<T>> {
    LatticeFunction::from_fn(out, f.rows, f.cols, |p| {
        f.at(p + LatticePoint::new(0, 1)) - f.at(p)
    })
}

/// Applies a difference operator; the window shrinks by one in each consumed direction.
pub fn apply_difference<T: Scalar>(
    kind: DiffKind,
    f: &LatticeFunction<T>,
) -> Result<LatticeFunction<T>> {
    let w = f.window;
    match kind {
        DiffKind::Dx => step_x(f, w.shrink(1, 0)?),
        DiffKind::Dy => step_y(f, w.shrink(0, 1)?),
        DiffKind::Dbar | DiffKind::D | DiffKind::Derivative => {
            let out = w.shrink(1, 1)?;
            let dx = step_x(f, w.shrink(1, 0)?)?;
            let dy = step_y(f, w.shrink(0, 1)?)?;
            let half = T::from_ratio(1, 2);
            let (cx, cy, cxy) = match kind {
                DiffKind::Dbar => (T::alpha_minus(), T::alpha_plus(), half),
                DiffKind::D => (T::alpha_plus(), T::alpha_minus(), half),
                _ => (half.clone(), -half, T::zero()),
            };
            LatticeFunction::from_fn(out, f.rows, f.cols, |p| {
                let dxy = dx.at(p + LatticePoint::new(0, 1)) - dx.at(p);
                let mut v = &dx.at(p).scale(&cx) + &dy.at(p).scale(&cy);
                if !cxy.is_zero() {
                    v = &v + &dxy.scale(&cxy);
                }
                v
            })
        }
    }
}

/// Result of the discrete Cauchy–Riemann test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticityReport {
    pub analytic: bool,
    pub max_residual: f64,
}

/// Checks `(f(z+1+i) − f(z))/(1+i) = (f(z+1) − f(z+i))/(1−i)` on every cell.
///
/// In exact mode `tol = 0` demands exact vanishing of every residual.
pub fn is_discrete_analytic<T: Scalar>(
    f: &LatticeFunction<T>,
    tol: f64,
) -> Result<AnalyticityReport> {
    let cells = f.window.shrink(1, 1)?;
    let one_plus_i = T::one() + T::i();
    let one_minus_i = T::one() - T::i();
    let mut max_residual = 0.0f64;
    let mut exact_zero = true;
    for p in cells.points() {
        let diag = f.at(p + LatticePoint::new(1, 1)) - f.at(p);
        let anti = f.at(p + LatticePoint::new(1, 0)) - f.at(p + LatticePoint::new(0, 1));
        let lhs = diag.map(|v| v.clone() / one_plus_i.clone());
        let rhs = anti.map(|v| v.clone() / one_minus_i.clone());
        let r = &lhs - &rhs;
        exact_zero &= r.is_zero();
        max_residual = max_residual.max(r.max_abs());
    }
    let analytic = if T::MODE == Mode::Exact && tol == 0.0 {
        exact_zero
    } else {
        max_residual <= tol
    };
    Ok(AnalyticityReport {
        analytic,
        max_residual,
    })
}

/// A lattice path with unit horizontal/vertical steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathSpec {
    vertices: Vec<LatticePoint>,
}

impl PathSpec {
    pub fn new(vertices: Vec<LatticePoint>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidArgument("path without vertices".into()));
        }
        for pair in vertices.windows(2) {
            if !pair[0].is_unit_step_to(&pair[1]) {
                return Err(Error::NonUnitStep {
                    from: pair[0].to_string(),
                    to: pair[1].to_string(),
                });
            }
        }
        Ok(Self { vertices })
    }

    /// Path through the given corners, filled in with unit steps
    /// (horizontal first between consecutive corners).
    pub fn through(corners: &[LatticePoint]) -> Result<Self> {
        let Some(&first) = corners.first() else {
            return Err(Error::InvalidArgument("path without vertices".into()));
        };
        let mut vertices = vec![first];
        for &target in &corners[1..] {
            let mut cur = *vertices.last().expect("nonempty");
            while cur.x != target.x {
                cur.x += (target.x - cur.x).signum();
                vertices.push(cur);
            }
            while cur.y != target.y {
                cur.y += (target.y - cur.y).signum();
                vertices.push(cur);
            }
        }
        Self::new(vertices)
    }

    /// Horizontal steps from the origin to `Re z`, then vertical steps to `z`.
    pub fn staircase(z: LatticePoint) -> Self {
        Self::through(&[LatticePoint::ORIGIN, z]).expect("staircase is a unit-step path")
    }

    /// Vertical steps first, then horizontal.
    pub fn staircase_vertical_first(z: LatticePoint) -> Self {
        Self::through(&[LatticePoint::ORIGIN, LatticePoint::new(0, z.y), z])
            .expect("staircase is a unit-step path")
    }

    pub fn vertices(&self) -> &[LatticePoint] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.vertices.first() == self.vertices.last()
    }
}

/// Trapezoid sum `Σ ½(f(z_{k−1}) + f(z_k))(z_k − z_{k−1})` along a path.
pub fn discrete_integral<T: Scalar>(f: &LatticeFunction<T>, path: &PathSpec) -> Result<Mat<T>> {
    for &p in path.vertices() {
        if !f.window.contains(p) {
            return Err(Error::OutsideWindow(format!("{p} (window {})", f.window)));
        }
    }
    let half = T::from_ratio(1, 2);
    let mut acc = Mat::zeros(f.rows, f.cols);
    for pair in path.vertices().windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let step = T::from_i64(b.x - a.x) + T::i() * T::from_i64(b.y - a.y);
        let avg = (f.at(a) + f.at(b)).scale(&(half.clone() * step));
        acc = &acc + &avg;
    }
    Ok(acc)
}

/// Integral along the canonical staircase from 0 to `z`.
pub fn integral_from_origin<T: Scalar>(f: &LatticeFunction<T>, z: LatticePoint) -> Result<Mat<T>> {
    if !f.window.contains(LatticePoint::ORIGIN) {
        return Err(Error::OutsideWindow(format!(
            "origin (window {})",
            f.window
        )));
    }
    if !f.window.contains(z) {
        return Err(Error::OutsideWindow(format!("{z} (window {})", f.window)));
    }
    discrete_integral(f, &PathSpec::staircase(z))
}

/// Staircase integrals from the origin to every window point at once.
///
/// Agrees with [`integral_from_origin`] pointwise; cost is linear in the window size.
pub fn integral_table<T: Scalar>(f: &LatticeFunction<T>) -> Result<LatticeFunction<T>> {
    let w = f.window;
    if !w.contains(LatticePoint::ORIGIN) {
        return Err(Error::OutsideWindow(format!("origin (window {w})")));
    }
    let half = T::from_ratio(1, 2);
    let half_i = half.clone() * T::i();
    let mut axis: Vec<Mat<T>> = vec![Mat::zeros(f.rows, f.cols)];
    for x in 1..=w.x1 {
        let a = LatticePoint::new(x - 1, 0);
        let b = LatticePoint::new(x, 0);
        let inc = (f.at(a) + f.at(b)).scale(&half);
        let next = axis.last().expect("nonempty") + &inc;
        axis.push(next);
    }
    let mut values: Vec<Option<Mat<T>>> = vec![None; w.len()];
    for x in w.x0..=w.x1 {
        let base = axis[x as usize].clone();
        values[w.index_of(LatticePoint::new(x, 0))] = Some(base.clone());
        let mut cur = base.clone();
        for y in 1..=w.y1 {
            let inc =
                (f.at(LatticePoint::new(x, y - 1)) + f.at(LatticePoint::new(x, y))).scale(&half_i);
            cur = &cur + &inc;
            values[w.index_of(LatticePoint::new(x, y))] = Some(cur.clone());
        }
        let mut cur = base;
        for y in (w.y0..0).rev() {
            let inc =
                (f.at(LatticePoint::new(x, y + 1)) + f.at(LatticePoint::new(x, y))).scale(&half_i);
            cur = &cur - &inc;
            values[w.index_of(LatticePoint::new(x, y))] = Some(cur.clone());
        }
    }
    let mut it = values.into_iter().map(|v| v.expect("every point visited"));
    LatticeFunction::from_fn(w, f.rows, f.cols, |_| it.next().expect("window size"))
}
