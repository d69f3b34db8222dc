//! The `verify-all` suite registry.
//!
//! Each check recomputes one invariant through the library and records a
//! residual. Registry order fixes the report order.

use std::fmt::Write as _;

use clap::ValueEnum;
use dalat::basis::{
    basis_poly, basis_table, convolve, e_lambda, e_lambda_table, h2_norm_sqr, mu_to_lambda,
    series_table, taylor_coefficients, CoefficientSeries,
};
use dalat::lattice::{apply_difference, is_discrete_analytic, DiffKind};
use dalat::mesh::{
    adjoint_identity_check, dyadic_ladder, kernel_h, limit_kernel, mesh_convergence, MeshPoint,
};
use dalat::realization::{
    backward_shift_rank, combine, invert, kernel_realization, markov_params, mcmillan_degree,
    minimal_realization, rational_eval, rational_table, CombineKind, Realization,
};
use dalat::samples;
use dalat::schur::{
    gram_psd, kernel_closed, kernel_series, multiplier_contraction, random_coisometry, Colligation,
};
use dalat::{Complex64, GaussRat, LatticeFunction, LatticePoint, Mat, Result, Scalar, Window};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

type Q = GaussRat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Quick,
    Full,
}

/// Deliberate corruptions used to test that the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Perturbs one entry of a basis table.
    CorruptBasis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub description: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub profile: Profile,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(
                s,
                "{status} {:<18} residual {:.3e} (tol {:.0e})  {}",
                c.name, c.residual, c.tolerance, c.detail
            );
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        let _ = writeln!(s, "{} checks, {failed} failed", self.checks.len());
        s
    }
}

struct Ctx {
    full: bool,
    fault: Option<Fault>,
}

impl Ctx {
    fn pick<T>(&self, quick: T, full: T) -> T {
        if self.full {
            full
        } else {
            quick
        }
    }
}

struct Measured {
    residual: f64,
    detail: String,
}

fn measured(residual: f64, detail: impl Into<String>) -> Result<Measured> {
    Ok(Measured {
        residual,
        detail: detail.into(),
    })
}

type CheckFn = fn(&Ctx) -> Result<Measured>;

const REGISTRY: &[(&str, &str, f64, CheckFn)] = &[
    ("si3", "δx z^(n) = z^(n-1)", 0.0, si3),
    ("dbar", "D̄ z^(n) = 0", 0.0, dbar),
    (
        "binomial",
        "z^(n)(x) = C(x, n) on the real axis",
        0.0,
        binomial,
    ),
    ("chu", "(z+w)^(n) = Σ z^(k) w^(n-k)", 0.0, chu),
    ("eigen", "δx e_λ = λ e_λ and δy e = μ e", 0.0, eigen),
    ("gene", "Σ λ^n z^(n) = e_λ(z)", 1e-8, gene),
    (
        "hadamard",
        "|z^(N)|^(1/N) → 1/√2 for non-real z",
        0.05,
        hadamard,
    ),
    ("resolvent", "(I - zA) ⊙ e_A = I", 0.0, resolvent),
    (
        "resolvent_series",
        "series D + Σ CA^(n-1)B z^(n) = rational f",
        1e-9,
        resolvent_series,
    ),
    ("convpont", "T(f2 ⊙ f1) = T f2 · T f1", 0.0, convpont),
    ("odot_inverse", "f ⊙ f^(-⊙) = I", 0.0, odot_inverse),
    ("mcmillan", "deg K(·, w) = Re w + |Im w|", 0.0, mcmillan),
    (
        "kernel_psd",
        "coisometry ⇒ Gram matrices are PSD",
        1e-9,
        kernel_psd,
    ),
    (
        "kernel_series",
        "K^S series matches closed form",
        1e-6,
        kernel_match,
    ),
    ("schineq", "‖δx f‖² = ‖f‖² - ‖f(0)‖²", 0.0, schineq),
    (
        "multiplier",
        "multiplier finite sections are contractions",
        1e-9,
        multiplier,
    ),
    (
        "mesh_rescale",
        "x_h^(n) equals the falling product formula",
        0.0,
        mesh_rescale,
    ),
    (
        "mesh_limit",
        "x_h^(n) → x^n/n! monotonically along h = 2^-k",
        0.0,
        mesh_limit,
    ),
    (
        "mesh_adjoint",
        "⟨∂z^n, z^m⟩ = ⟨z^n, ∫z^m⟩",
        0.0,
        mesh_adjoint,
    ),
    (
        "mesh_kernel",
        "K_h(1, 1) → K(1, 1) monotonically",
        0.0,
        mesh_kernel,
    ),
    (
        "shift_rank",
        "backward-shift rank = minimal state dimension",
        1e-8,
        shift_rank,
    ),
];

pub fn check_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|(name, ..)| *name).collect()
}

pub fn verify_all(profile: Profile, fault: Option<Fault>) -> Report {
    let ctx = Ctx {
        full: profile == Profile::Full,
        fault,
    };
    let checks: Vec<CheckResult> = REGISTRY
        .iter()
        .map(|&(name, description, tolerance, check)| {
            let (passed, residual, detail) = match check(&ctx) {
                Ok(m) => (m.residual <= tolerance, m.residual, m.detail),
                Err(e) => (false, f64::INFINITY, format!("error: {e}")),
            };
            CheckResult {
                name: name.into(),
                description: description.into(),
                passed,
                residual,
                tolerance,
                detail,
            }
        })
        .collect();
    Report {
        profile,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

fn pt(x: i64, y: i64) -> LatticePoint {
    LatticePoint::new(x, y)
}

fn diff_norm<T: Scalar>(a: &LatticeFunction<T>, b: &LatticeFunction<T>) -> Result<f64> {
    Ok(a.combine(&T::one(), b, &-T::one())?.max_abs())
}

fn basis_window(ctx: &Ctx) -> Result<Window> {
    ctx.pick(Window::new(0, 6, -6, 6), Window::new(0, 12, -12, 13))
}

fn max_n(ctx: &Ctx) -> usize {
    ctx.pick(8, 12)
}

fn si3(ctx: &Ctx) -> Result<Measured> {
    let window = basis_window(ctx)?;
    let mut worst: f64 = 0.0;
    for n in 1..=max_n(ctx) {
        let corrupt = ctx.fault == Some(Fault::CorruptBasis) && n == 3;
        let table = LatticeFunction::from_scalar_fn(window, |p| {
            let v = basis_poly::<Q>(n, p);
            if corrupt && p == pt(2, 1) {
                v + Q::one()
            } else {
                v
            }
        });
        let d = apply_difference(DiffKind::Dx, &table)?;
        worst = worst.max(diff_norm(&d, &basis_table(n - 1, d.window()))?);
    }
    measured(worst, format!("n ≤ {} on {window}", max_n(ctx)))
}

fn dbar(ctx: &Ctx) -> Result<Measured> {
    let window = basis_window(ctx)?;
    let mut worst: f64 = 0.0;
    for n in 0..=max_n(ctx) {
        let report = is_discrete_analytic(&basis_table::<Q>(n, window), 0.0)?;
        worst = worst.max(report.max_residual);
    }
    measured(worst, format!("n ≤ {} on {window}", max_n(ctx)))
}

fn binomial(ctx: &Ctx) -> Result<Measured> {
    let xmax = ctx.pick(8i64, 12);
    let mut worst: f64 = 0.0;
    for n in 0..=max_n(ctx) {
        for x in 0..=xmax {
            let mut c = BigRational::one();
            for k in 0..n as i64 {
                c = c * BigRational::from_integer((x - k).into())
                    / BigRational::from_integer((k + 1).into());
            }
            worst = worst.max((basis_poly::<Q>(n, pt(x, 0)) - Q::real(c)).modulus());
        }
    }
    measured(worst, format!("n ≤ {}, 0 ≤ x ≤ {xmax}", max_n(ctx)))
}

fn chu(ctx: &Ctx) -> Result<Measured> {
    let window = ctx.pick(Window::new(0, 3, -2, 1), Window::new(0, 5, -3, 2))?;
    let nmax = ctx.pick(6, 8);
    let mut worst: f64 = 0.0;
    for z in window.points() {
        for w in window.points() {
            for n in 0..=nmax {
                let rhs = (0..=n).fold(Q::zero(), |acc, k| {
                    acc + basis_poly::<Q>(k, z) * basis_poly::<Q>(n - k, w)
                });
                worst = worst.max((basis_poly::<Q>(n, z + w) - rhs).modulus());
            }
        }
    }
    measured(worst, format!("n ≤ {nmax}, z, w in {window}"))
}

fn eigen(ctx: &Ctx) -> Result<Measured> {
    let window = Window::new(0, 4, -4, 4)?;
    let count = ctx.pick(5, 20);
    let mut rng = samples::rng(3);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < count {
        let lam = samples::gauss_rat(&mut rng, 5);
        let mu = samples::gauss_rat(&mut rng, 5);
        let Ok(lam_mu) = mu_to_lambda(&mu) else {
            continue;
        };
        let (Ok(e), Ok(em)) = (
            e_lambda_table(&lam, window),
            e_lambda_table(&lam_mu, window),
        ) else {
            continue;
        };
        done += 1;
        let dx = apply_difference(DiffKind::Dx, &e)?;
        let scaled = e.restrict(dx.window())?.map(|v| v.scale(&lam))?;
        worst = worst.max(diff_norm(&dx, &scaled)?);
        let dy = apply_difference(DiffKind::Dy, &em)?;
        let scaled = em.restrict(dy.window())?.map(|v| v.scale(&mu))?;
        worst = worst.max(diff_norm(&dy, &scaled)?);
    }
    measured(worst, format!("{count} seeded λ and μ on {window}"))
}

fn gene(ctx: &Ctx) -> Result<Measured> {
    let terms = ctx.pick(120, 200);
    let mut worst: f64 = 0.0;
    for lam in [
        Complex64::new(0.5, 0.0),
        Complex64::new(0.9, 0.0),
        Complex64::new(0.0, 0.7),
    ] {
        let mut geometric = vec![Complex64::new(1.0, 0.0)];
        for _ in 1..terms {
            geometric.push(geometric[geometric.len() - 1] * lam);
        }
        let series = CoefficientSeries::scalar(geometric)?;
        for z in Window::new(0, 3, -3, 3)?.points() {
            let partial: Complex64 = (0..terms)
                .map(|n| series.coeff(n)[(0, 0)] * basis_poly::<Complex64>(n, z))
                .sum();
            worst = worst.max((partial - e_lambda(&lam, z)?).norm());
        }
    }
    measured(worst, format!("{terms} terms, λ ∈ {{0.5, 0.9, 0.7i}}"))
}

fn hadamard(_: &Ctx) -> Result<Measured> {
    let n = 400;
    let target = std::f64::consts::FRAC_1_SQRT_2;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for z in [pt(1, 1), pt(2, -4)] {
        let root = basis_poly::<Q>(n, z).modulus().powf(1.0 / n as f64);
        worst = worst.max((root / target - 1.0).abs());
        parts.push(format!("{z}: {root:.4}"));
    }
    measured(worst, format!("N = {n}, {}", parts.join(", ")))
}

fn resolvent(ctx: &Ctx) -> Result<Measured> {
    let count = ctx.pick(4, 10);
    let window = ctx.pick(Window::new(0, 3, -3, 3), Window::new(0, 5, -6, 6))?;
    let mut rng = samples::rng(6);
    let mut worst: f64 = 0.0;
    for k in 0..count {
        let n = 1 + k % 3;
        let a = samples::admissible_matrix(&mut rng, n, 3);
        let id = Mat::<Q>::identity(n);
        let poly = Realization::new(Mat::zeros(n, n), -&a, id.clone(), id.clone())?;
        let ea = Realization::new(a.clone(), a.clone(), id.clone(), id.clone())?;
        let prod = combine(CombineKind::Product, &poly, &ea)?;
        for (_, v) in rational_table(&prod, window)?.iter() {
            worst = worst.max((v - &id).max_abs());
        }
    }
    measured(worst, format!("{count} seeded admissible A on {window}"))
}

fn resolvent_series(ctx: &Ctx) -> Result<Measured> {
    let count = ctx.pick(4, 10);
    let terms = ctx.pick(250, 400);
    let mut worst: f64 = 0.0;
    for k in 0..count {
        let mut rng = samples::rng(600 + k as u64);
        let r = samples::stable_realization(&mut rng, 1 + k % 3, 1, 1, 0.9);
        let coeffs: Vec<Mat<Complex64>> = markov_params(&r, terms).terms().to_vec();
        let series = CoefficientSeries::new(coeffs)?;
        let table = series_table(&series, Window::new(0, 3, -4, 3)?);
        for (z, v) in table.iter() {
            let exact = rational_eval(&r, z)?;
            worst = worst.max((v - &exact).max_abs() / exact.max_abs().max(1.0));
        }
    }
    measured(
        worst,
        format!("{count} realizations with ρ(A) = 0.9, {terms} terms"),
    )
}

fn convpont(ctx: &Ctx) -> Result<Measured> {
    let count = ctx.pick(4, 10);
    let mut rng = samples::rng(7);
    let mut worst: f64 = 0.0;
    for k in 0..count {
        let (n1, n2) = (1 + k % 3, 1 + (k / 3) % 3);
        let (p1, mid, m2) = (1 + k % 2, 1 + (k / 2) % 2, 1 + (k / 4) % 2);
        let r1 = samples::rational_realization(&mut rng, n1, mid, p1, 3, false);
        let r2 = samples::rational_realization(&mut rng, n2, m2, mid, 3, false);
        let prod = combine(CombineKind::Product, &r2, &r1)?;
        let lhs = markov_params(&prod, 10).to_series();
        let rhs = convolve(
            &markov_params(&r2, 10).to_series(),
            &markov_params(&r1, 10).to_series(),
            Some(10),
        )?;
        for (a, b) in lhs.coeffs().iter().zip(rhs.coeffs()) {
            worst = worst.max((a - b).max_abs());
        }
    }
    measured(worst, format!("{count} seeded pairs, 11 Markov parameters"))
}

fn odot_inverse(ctx: &Ctx) -> Result<Measured> {
    let count = ctx.pick(4, 10);
    let mut rng = samples::rng(8);
    let mut worst: f64 = 0.0;
    for k in 0..count {
        let m = 1 + k % 2;
        let r = samples::rational_realization(&mut rng, 1 + k % 3, m, m, 3, true);
        let prod = combine(CombineKind::Product, &r, &invert(&r)?)?;
        for (j, t) in markov_params(&prod, 8).terms().iter().enumerate() {
            let expect = if j == 0 {
                Mat::identity(m)
            } else {
                Mat::zeros(m, m)
            };
            worst = worst.max((t - &expect).max_abs());
        }
    }
    measured(
        worst,
        format!("{count} seeded realizations with invertible D"),
    )
}

fn mcmillan(ctx: &Ctx) -> Result<Measured> {
    let r = ctx.pick(3i64, 6);
    let mut wrong = Vec::new();
    let mut count = 0;
    for x in 0..=r {
        for y in -r..=r {
            let w = pt(x, y);
            count += 1;
            let degree = mcmillan_degree(&kernel_realization::<Q>(w)?)?;
            if degree != (x + y.abs()) as usize {
                wrong.push(format!("{w}→{degree}"));
            }
        }
    }
    measured(
        wrong.len() as f64,
        format!("{count} points, mismatches [{}]", wrong.join(" ")),
    )
}

fn colligations(ctx: &Ctx) -> Result<Vec<Colligation<Complex64>>> {
    (0..ctx.pick(10u64, 50))
        .map(|seed| {
            let n = 1 + (seed % 8) as usize;
            let m = 1 + (seed % 3) as usize;
            let p = m + ((seed / 3) as usize % (4 - m));
            random_coisometry(n, m, p, seed)
        })
        .collect()
}

fn kernel_points() -> Result<Vec<LatticePoint>> {
    Ok(Window::new(0, 5, -5, 5)?
        .points()
        .step_by(2)
        .take(30)
        .collect())
}

fn kernel_psd(ctx: &Ctx) -> Result<Measured> {
    let pts = kernel_points()?;
    let cgs = colligations(ctx)?;
    let mut min_eig = f64::INFINITY;
    for cg in &cgs {
        min_eig = min_eig.min(gram_psd(cg, &pts, 1e-9)?.min_eig);
    }
    measured(
        (-min_eig).max(0.0),
        format!("{} colligations, min eigenvalue {min_eig:.3e}", cgs.len()),
    )
}

fn kernel_match(ctx: &Ctx) -> Result<Measured> {
    let pts = kernel_points()?;
    let cgs = colligations(ctx)?;
    let terms = ctx.pick(150, 300);
    let mut worst: f64 = 0.0;
    for cg in &cgs {
        for pair in pts.chunks(2).take(3) {
            let series = kernel_series(cg, pair[0], pair[1], terms)?.value;
            worst = worst.max((&series - &kernel_closed(cg, pair[0], pair[1])?).max_abs());
        }
    }
    measured(worst, format!("{} colligations, N = {terms}", cgs.len()))
}

fn schineq(ctx: &Ctx) -> Result<Measured> {
    let count = ctx.pick(8, 20);
    let mut rng = samples::rng(11);
    let mut worst: f64 = 0.0;
    for k in 0..count {
        let len = 1 + k % 12;
        let c = samples::rational_series(&mut rng, len, 6);
        let f = series_table(&c, Window::new(0, len as i64 + 1, 0, 0)?);
        let df = taylor_coefficients(&apply_difference(DiffKind::Dx, &f)?, len)?;
        let f0 = c.coeff(0).frobenius_sqr();
        worst = worst.max((h2_norm_sqr(&df) - (h2_norm_sqr(&c) - f0)).modulus());
    }
    measured(worst, format!("{count} seeded finite series"))
}

fn multiplier(ctx: &Ctx) -> Result<Measured> {
    let blocks = ctx.pick(32, 64);
    let mut worst: f64 = 0.0;
    for cg in &colligations(ctx)? {
        worst = worst.max(multiplier_contraction(cg, blocks)?.opnorm);
    }
    measured(
        (worst - 1.0).max(0.0),
        format!("max norm {worst:.12} at N = {blocks}"),
    )
}

fn mesh_rescale(ctx: &Ctx) -> Result<Measured> {
    let kmax = ctx.pick(4, 6);
    let mut worst: f64 = 0.0;
    for h in dyadic_ladder(kmax) {
        for n in 0..=8usize {
            for x in 1..=3i64 {
                let xr = BigRational::from_integer(x.into());
                let mut product = BigRational::one();
                for i in 0..n {
                    let factor = &xr - &h * BigRational::from_integer(i.into());
                    product = product * factor / BigRational::from_integer((i + 1).into());
                }
                let p = MeshPoint::from_coords(&xr, &BigRational::zero(), h.clone())?;
                worst =
                    worst.max((dalat::mesh::basis_poly_h::<Q>(n, &p) - Q::real(product)).modulus());
            }
        }
    }
    measured(worst, format!("n ≤ 8, x ≤ 3, h = 2^-k for k ≤ {kmax}"))
}

/// Counts ladder steps where the error grows, or fails to shrink once `x/h ≥ n`.
fn mesh_limit(ctx: &Ctx) -> Result<Measured> {
    let ladder = dyadic_ladder(ctx.pick(4, 6));
    let mut violations = Vec::new();
    for n in 0..=8usize {
        for x in 1..=3i64 {
            let xr = BigRational::from_integer(x.into());
            let rows = mesh_convergence::<Q>(n, &xr, &BigRational::zero(), &ladder)?;
            for pair in rows.windows(2) {
                let (prev, next) = (&pair[0], &pair[1]);
                let errors_vanish = prev.abs_err == 0.0 && next.abs_err == 0.0;
                let resolved = (&xr / &prev.h).to_integer() >= (n as i64).into();
                let ok = if resolved && !errors_vanish {
                    next.abs_err < prev.abs_err
                } else {
                    next.abs_err <= prev.abs_err
                };
                if !ok {
                    violations.push(format!("(n={n},x={x},h={})", next.h));
                }
            }
        }
    }
    measured(
        violations.len() as f64,
        format!("violations [{}]", violations.join(" ")),
    )
}

fn mesh_adjoint(ctx: &Ctx) -> Result<Measured> {
    let r = ctx.pick(6, 10);
    let mut bad = 0;
    for n in 0..=r {
        for m in 0..=r {
            if !adjoint_identity_check(n, m)?.equal {
                bad += 1;
            }
        }
    }
    measured(bad as f64, format!("n, m ≤ {r}"))
}

fn mesh_kernel(ctx: &Ctx) -> Result<Measured> {
    let ladder = dyadic_ladder(ctx.pick(4, 6));
    let one = Complex64::new(1.0, 0.0);
    let limit = limit_kernel(&one, &one, 60).value.re;
    let mut errors = Vec::new();
    for h in &ladder {
        let j = (BigRational::one() / h).to_integer().to_i64().unwrap_or(1);
        let p = MeshPoint::new(j, 0, h.clone())?;
        errors.push((kernel_h::<Q>(&p, &p, 60)?.value.to_c64().re - limit).abs());
    }
    let increases = errors.windows(2).filter(|w| w[1] >= w[0]).count();
    let listed: Vec<String> = errors.iter().map(|e| format!("{e:.2e}")).collect();
    measured(increases as f64, format!("errors [{}]", listed.join(" ")))
}

fn shift_rank(ctx: &Ctx) -> Result<Measured> {
    let count = ctx.pick(4u64, 10);
    let mut wrong = Vec::new();
    for k in 0..count {
        let n = 1 + (k % 4) as usize;
        let mut rng = samples::rng(1400 + k);
        let r = samples::stable_realization(&mut rng, n, 1, 1, 0.9);
        let (_, degree) = minimal_realization(&markov_params(&r, 2 * n + 2))?;
        let table = rational_table(&r, Window::new(0, n as i64 + 10, -2, 2)?)?;
        let rank = backward_shift_rank(&table, n + 3, 1e-8)?;
        if degree != n || rank != n {
            wrong.push(format!("seed {k}: n={n} degree={degree} rank={rank}"));
        }
    }
    measured(
        wrong.len() as f64,
        format!("{count} minimal systems, mismatches [{}]", wrong.join("; ")),
    )
}
