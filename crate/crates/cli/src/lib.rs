//! Command-line front end for `dalat`.
//!
//! [`run`] parses an argument vector and returns the exit code with the text
//! that would go to stdout: `0` on success, `1` on a domain error or failed
//! check, `2` on a usage error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{ColorChoice, Parser, Subcommand};
use dalat::basis::{basis_csv, basis_poly, basis_table, e_lambda};
use dalat::lattice::{discrete_integral, is_discrete_analytic};
use dalat::mesh::mesh_convergence;
use dalat::realization::{
    annihilating_polynomial, combine, invert, kernel_realization, markov_params, mcmillan_degree,
    minimal_realization, rational_eval, rational_table, transfer_eval, CombineKind, MarkovSequence,
    Realization,
};
use dalat::scalar::parse_scalar;
use dalat::schur::{
    gram_psd, is_coisometry, kernel_closed, kernel_series, multiplier_contraction,
    random_coisometry, Colligation,
};
use dalat::{
    Complex64, Error, GaussRat, LatticeFunction, LatticePoint, Mat, Mode, PathSpec, Scalar, Window,
};
use serde_json::{json, Value};

pub mod verify;

use verify::{Fault, Profile};

/// Discrete analytic functions on the right half-lattice.
#[derive(Debug, Parser)]
#[command(name = "dalat", version, about, color = ColorChoice::Never)]
struct Cli {
    /// Emit machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,

    /// Arithmetic: exact Gaussian rationals or double precision.
    #[arg(long, global = true, env = "DALAT_MODE", default_value = "exact")]
    mode: Mode,

    /// Tolerance for float comparisons (verb-specific default).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Seed for generated data.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write the output to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Basis polynomial z^(n) at a point, or CSV `x,y,n,re,im` of z^(0..=n) over a window.
    Basis {
        #[arg(long)]
        n: usize,
        #[arg(long, required_unless_present = "window")]
        z: Option<LatticePoint>,
        /// `x0,x1,y0,y1`
        #[arg(long, value_parser = parse_window, conflicts_with = "z")]
        window: Option<Window>,
    },
    /// Evaluate a realization at a point, or CSV `x,y,row,col,re,im` over a window.
    Eval {
        /// Realization JSON file.
        #[arg(long)]
        realization: PathBuf,
        #[arg(long, required_unless_present = "window")]
        z: Option<LatticePoint>,
        #[arg(long, value_parser = parse_window, conflicts_with = "z")]
        window: Option<Window>,
    },
    /// Discrete Cauchy-Riemann test of a built-in function or a lattice-function JSON file.
    CheckAnalytic {
        /// const1, z, zbar, zsq, basis:N or exp:LAMBDA
        #[arg(long = "fn", required_unless_present = "input")]
        function: Option<String>,
        #[arg(long, conflicts_with = "function")]
        input: Option<PathBuf>,
        #[arg(long, value_parser = parse_window, default_value = "0,6,-6,6")]
        window: Window,
    },
    /// Discrete integral along a polygonal path of unit steps.
    Integrate {
        #[arg(long = "fn")]
        function: String,
        /// Corners, e.g. `0,3,3+2i`; gaps are filled with horizontal then vertical unit steps.
        #[arg(long)]
        path: String,
    },
    /// Markov parameters D, CB, CAB, ... and optionally the transfer value at t.
    Tmap {
        #[arg(long)]
        realization: PathBuf,
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[arg(long)]
        t: Option<String>,
    },
    /// Realization of f2 ⊙ f1 (or f2 + f1 with `--kind sum`).
    Product {
        #[arg(long)]
        f2: PathBuf,
        #[arg(long)]
        f1: PathBuf,
        #[arg(long, default_value = "product")]
        kind: CombineKind,
    },
    /// Realization of the ⊙-inverse.
    Invert {
        #[arg(long)]
        realization: PathBuf,
    },
    /// McMillan degree of the kernel at w, of a realization, or of a Markov sequence.
    Degree {
        #[arg(long, required_unless_present_any = ["realization", "markov"])]
        w: Option<LatticePoint>,
        #[arg(long, conflicts_with = "w")]
        realization: Option<PathBuf>,
        /// Coefficient-series JSON of Markov parameters.
        #[arg(long, conflicts_with_all = ["w", "realization"])]
        markov: Option<PathBuf>,
    },
    /// Coefficients of det(I - tA), a polynomial annihilating the realization.
    Annihilate {
        #[arg(long)]
        realization: PathBuf,
    },
    /// Kernel positivity, multiplier contraction and kernel agreement for a colligation.
    SchurCheck {
        /// `n,m,p` for a seeded random coisometry.
        #[arg(long, required_unless_present = "colligation")]
        dims: Option<String>,
        #[arg(long, conflicts_with = "dims")]
        colligation: Option<PathBuf>,
        /// JSON list of lattice points such as `["0", "1+i", "2-3i"]`.
        #[arg(long)]
        points: Option<PathBuf>,
        /// Terms of the kernel series.
        #[arg(long, default_value_t = 300)]
        terms: usize,
        /// Blocks of the multiplier finite section.
        #[arg(long, default_value_t = 64)]
        sections: usize,
    },
    /// CSV `h,value,limit,abs_err` of x_h^(n) against x^n/n!.
    MeshConverge {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        x: String,
        #[arg(long, default_value = "0")]
        y: String,
        /// Comma-separated mesh sizes, e.g. `1,1/2,1/4`.
        #[arg(long, default_value = "1,1/2,1/4,1/8,1/16,1/32,1/64")]
        h_list: String,
    },
    /// Run every invariant suite and report pass/fail with residuals.
    VerifyAll {
        #[arg(long, default_value = "quick")]
        profile: Profile,
        #[arg(long, hide = true)]
        inject_fault: Option<Fault>,
    },
}

fn parse_window(s: &str) -> Result<Window, Error> {
    let parts: Vec<i64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad window bound `{p}`")))
        })
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x0, x1, y0, y1] => Window::new(x0, x1, y0, y1),
        _ => Err(Error::Parse(format!("window `{s}` must be x0,x1,y0,y1"))),
    }
}

/// Outcome of a verb: exit code and stdout text.
struct Output {
    code: i32,
    text: String,
}

impl Output {
    fn ok(text: impl Into<String>) -> Self {
        Self {
            code: 0,
            text: text.into(),
        }
    }

    fn with_code(code: i32, text: impl Into<String>) -> Self {
        Self {
            code,
            text: text.into(),
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_) | Error::InvalidArgument(_) => 2,
        _ => 1,
    }
}

fn error_output(err: &Error, json: bool) -> String {
    if json {
        let v = json!({"code": err.code(), "message": err.to_string(), "witness": err.witness()});
        format!("{v}\n")
    } else {
        format!("error: {err}\n")
    }
}

/// Parses `argv` (including the program name) and executes the verb.
pub fn run<I, S>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            return (code, e.to_string());
        }
    };
    let result = match cli.mode {
        Mode::Exact => execute::<GaussRat>(&cli),
        Mode::Float => execute::<Complex64>(&cli),
    };
    let out = match result {
        Ok(out) => out,
        Err(err) => Output::with_code(exit_code(&err), error_output(&err, cli.json)),
    };
    match &cli.out {
        Some(path) if out.code != 2 => match std::fs::write(path, &out.text) {
            Ok(()) => (out.code, String::new()),
            Err(e) => {
                let err = Error::InvalidArgument(format!("cannot write {}: {e}", path.display()));
                (2, error_output(&err, cli.json))
            }
        },
        _ => (out.code, out.text),
    }
}

fn read_json(path: &Path) -> Result<Value, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn read_realization<T: Scalar>(path: &Path) -> Result<Realization<T>, Error> {
    Realization::from_json(&read_json(path)?)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn compact(v: &Value) -> String {
    let mut s = v.to_string();
    s.push('\n');
    s
}

fn plain(v: Value) -> String {
    match v {
        Value::String(s) => s,
        other => other.to_string(),
    }
}

fn scalar_json<T: Scalar>(v: &T) -> Value {
    let (re, im) = v.to_json_pair();
    json!([re, im])
}

/// Built-in scalar lattice functions for `check-analytic` and `integrate`.
fn builtin<T: Scalar>(name: &str, window: Window) -> Result<LatticeFunction<T>, Error> {
    let table = match name {
        "const1" => LatticeFunction::from_scalar_fn(window, |_| T::one()),
        "z" => LatticeFunction::from_scalar_fn(window, |p| p.to_scalar()),
        "zbar" => LatticeFunction::from_scalar_fn(window, |p| p.conj().to_scalar()),
        "zsq" => LatticeFunction::from_scalar_fn(window, |p| {
            let z: T = p.to_scalar();
            z.clone() * z
        }),
        other => {
            if let Some(n) = other.strip_prefix("basis:") {
                let n: usize = n
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad basis index `{n}`")))?;
                basis_table(n, window)
            } else if let Some(lam) = other.strip_prefix("exp:") {
                let lam: T = parse_scalar(lam)?;
                LatticeFunction::try_from_fn(window, 1, 1, |p| e_lambda(&lam, p).map(Mat::scalar))?
            } else {
                return Err(Error::InvalidArgument(format!(
                    "unknown function `{other}` (const1, z, zbar, zsq, basis:N, exp:LAMBDA)"
                )));
            }
        }
    };
    Ok(table)
}

fn parse_points(v: &Value) -> Result<Vec<LatticePoint>, Error> {
    let list = v
        .as_array()
        .ok_or_else(|| Error::Parse("points must be a JSON list".into()))?;
    list.iter()
        .map(|p| match p {
            Value::String(s) => s.parse(),
            Value::Array(xy) if xy.len() == 2 => match (xy[0].as_i64(), xy[1].as_i64()) {
                (Some(x), Some(y)) => Ok(LatticePoint::new(x, y)),
                _ => Err(Error::Parse(format!("bad point {p}"))),
            },
            other => Err(Error::Parse(format!("bad point {other}"))),
        })
        .collect()
}

fn parse_dims(s: &str) -> Result<(usize, usize, usize), Error> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad dimension `{p}`")))
        })
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [n, m, p] => Ok((n, m, p)),
        _ => Err(Error::Parse(format!("dims `{s}` must be n,m,p"))),
    }
}

/// Thirty points of the `6 × 11` window, every other one.
fn default_points() -> Vec<LatticePoint> {
    Window::new(0, 5, -5, 5)
        .expect("valid")
        .points()
        .step_by(2)
        .take(30)
        .collect()
}

fn execute<T: Scalar>(cli: &Cli) -> Result<Output, Error> {
    match &cli.command {
        Command::Basis { n, z, window } => {
            if let Some(window) = window {
                if cli.json {
                    let tables: Vec<Value> = (0..=*n)
                        .map(|k| basis_table::<T>(k, *window).to_json())
                        .collect();
                    return Ok(Output::ok(compact(
                        &json!({"n_max": n, "window": window, "tables": tables}),
                    )));
                }
                return Ok(Output::ok(basis_csv::<T>(*n, *window)));
            }
            let z = z
                .expect("clap requires z or window")
                .require_half_lattice()?;
            let v = basis_poly::<T>(*n, z);
            if cli.json {
                let doc =
                    json!({"n": n, "z": z.to_string(), "mode": T::MODE, "value": scalar_json(&v)});
                return Ok(Output::ok(compact(&doc)));
            }
            Ok(Output::ok(format!("{v}\n")))
        }
        Command::Eval {
            realization,
            z,
            window,
        } => {
            let r = read_realization::<T>(realization)?;
            if let Some(window) = window {
                let table = rational_table(&r, *window)?;
                if cli.json {
                    return Ok(Output::ok(compact(&table.to_json())));
                }
                let mut csv = String::from("x,y,row,col,re,im\n");
                for (p, v) in table.iter() {
                    for row in 0..v.rows() {
                        for col in 0..v.cols() {
                            let (re, im) = v[(row, col)].to_json_pair();
                            let _ = writeln!(
                                csv,
                                "{},{},{row},{col},{},{}",
                                p.x,
                                p.y,
                                plain(re),
                                plain(im)
                            );
                        }
                    }
                }
                return Ok(Output::ok(csv));
            }
            let z = z
                .expect("clap requires z or window")
                .require_half_lattice()?;
            let v = rational_eval(&r, z)?;
            if cli.json {
                let doc = json!({"z": z.to_string(), "mode": T::MODE, "value": v.to_json()});
                return Ok(Output::ok(compact(&doc)));
            }
            Ok(Output::ok(format!("{v}\n")))
        }
        Command::CheckAnalytic {
            function,
            input,
            window,
        } => {
            let (label, table) = match (function, input) {
                (Some(name), _) => (name.clone(), builtin::<T>(name, *window)?),
                (None, Some(path)) => (
                    path.display().to_string(),
                    LatticeFunction::from_json(&read_json(path)?)?,
                ),
                (None, None) => unreachable!("clap requires --fn or --input"),
            };
            let tol = cli.tol.unwrap_or(match T::MODE {
                Mode::Exact => 0.0,
                Mode::Float => 1e-10,
            });
            let report = is_discrete_analytic(&table, tol)?;
            let code = if report.analytic { 0 } else { 1 };
            let text = if cli.json {
                pretty(&json!({
                    "function": label,
                    "window": table.window(),
                    "mode": T::MODE,
                    "analytic": report.analytic,
                    "max_residual": report.max_residual,
                }))
            } else {
                format!(
                    "analytic: {}\nmax_residual: {:e}\n",
                    report.analytic, report.max_residual
                )
            };
            Ok(Output::with_code(code, text))
        }
        Command::Integrate { function, path } => {
            let corners: Vec<LatticePoint> = path
                .split(',')
                .map(|s| s.trim().parse())
                .collect::<Result<_, _>>()?;
            let path = PathSpec::through(&corners)?;
            let xs = path.vertices().iter().map(|p| p.x);
            let ys = path.vertices().iter().map(|p| p.y);
            let window = Window::new(
                xs.clone().min().unwrap_or(0),
                xs.max().unwrap_or(0),
                ys.clone().min().unwrap_or(0),
                ys.max().unwrap_or(0),
            )?;
            let table = builtin::<T>(function, window)?;
            let v = discrete_integral(&table, &path)?;
            if cli.json {
                return Ok(Output::ok(compact(
                    &json!({"mode": T::MODE, "value": v.to_json()}),
                )));
            }
            Ok(Output::ok(format!("{v}\n")))
        }
        Command::Tmap { realization, k, t } => {
            let r = read_realization::<T>(realization)?;
            let seq = markov_params(&r, *k);
            let transfer = t
                .as_deref()
                .map(|t| parse_scalar::<T>(t).and_then(|t| transfer_eval(&r, &t)))
                .transpose()?;
            if cli.json {
                let mut doc = json!({
                    "mode": T::MODE,
                    "markov": seq.terms().iter().map(Mat::to_json).collect::<Vec<_>>(),
                });
                if let Some(v) = &transfer {
                    doc["transfer"] = v.to_json();
                }
                return Ok(Output::ok(compact(&doc)));
            }
            let mut text = String::new();
            for (i, h) in seq.terms().iter().enumerate() {
                let _ = writeln!(text, "h{i} = {h}");
            }
            if let Some(v) = transfer {
                let _ = writeln!(text, "T(t) = {v}");
            }
            Ok(Output::ok(text))
        }
        Command::Product { f2, f1, kind } => {
            let r = combine(
                *kind,
                &read_realization::<T>(f2)?,
                &read_realization::<T>(f1)?,
            )?;
            Ok(Output::ok(compact(&r.to_json())))
        }
        Command::Invert { realization } => {
            let r = invert(&read_realization::<T>(realization)?)?;
            Ok(Output::ok(compact(&r.to_json())))
        }
        Command::Degree {
            w,
            realization,
            markov,
        } => {
            let degree = if let Some(w) = w {
                mcmillan_degree(&kernel_realization::<T>(*w)?)?
            } else if let Some(path) = realization {
                mcmillan_degree(&read_realization::<T>(path)?)?
            } else {
                let path = markov.as_ref().expect("clap requires one source");
                let series = dalat::basis::CoefficientSeries::<T>::from_json(&read_json(path)?)?;
                minimal_realization(&MarkovSequence::from_series(&series))?.1
            };
            if cli.json {
                return Ok(Output::ok(compact(&json!({"degree": degree}))));
            }
            Ok(Output::ok(format!("{degree}\n")))
        }
        Command::Annihilate { realization } => {
            let p = annihilating_polynomial(&read_realization::<T>(realization)?)?;
            if cli.json {
                return Ok(Output::ok(compact(&p.to_json())));
            }
            let coeffs: Vec<String> = p.coeffs().iter().map(|c| c[(0, 0)].to_string()).collect();
            Ok(Output::ok(format!("{}\n", coeffs.join(", "))))
        }
        Command::SchurCheck {
            dims,
            colligation,
            points,
            terms,
            sections,
        } => schur_check(
            cli,
            dims.as_deref(),
            colligation.as_deref(),
            points.as_deref(),
            *terms,
            *sections,
        ),
        Command::MeshConverge { n, x, y, h_list } => {
            let x = parse_rational(x)?;
            let y = parse_rational(y)?;
            let hs: Vec<_> = h_list
                .split(',')
                .map(|h| parse_rational(h.trim()))
                .collect::<Result<_, _>>()?;
            let rows = mesh_convergence::<T>(*n, &x, &y, &hs)?;
            if cli.json {
                let list: Vec<Value> = rows
                    .iter()
                    .map(|r| {
                        json!({
                            "h": r.h.to_string(),
                            "value": scalar_json(&r.value),
                            "limit": scalar_json(&r.limit),
                            "abs_err": r.abs_err,
                        })
                    })
                    .collect();
                return Ok(Output::ok(compact(
                    &json!({"n": n, "mode": T::MODE, "rows": list}),
                )));
            }
            let mut csv = String::from("h,value,limit,abs_err\n");
            for r in &rows {
                let _ = writeln!(csv, "{},{},{},{:e}", r.h, r.value, r.limit, r.abs_err);
            }
            Ok(Output::ok(csv))
        }
        Command::VerifyAll {
            profile,
            inject_fault,
        } => {
            let report = verify::verify_all(*profile, *inject_fault);
            let code = if report.passed { 0 } else { 1 };
            let text = if cli.json {
                serde_json::to_string_pretty(&report).expect("serializable") + "\n"
            } else {
                report.to_text()
            };
            Ok(Output::with_code(code, text))
        }
    }
}

fn parse_rational(s: &str) -> Result<num_rational::BigRational, Error> {
    let v: GaussRat = s.parse()?;
    if !v.is_real() {
        return Err(Error::Parse(format!("`{s}` is not real")));
    }
    Ok(v.re)
}

fn schur_check(
    cli: &Cli,
    dims: Option<&str>,
    colligation: Option<&Path>,
    points: Option<&Path>,
    terms: usize,
    sections: usize,
) -> Result<Output, Error> {
    let seed = cli.seed.unwrap_or(0);
    let cg: Colligation<Complex64> = match (dims, colligation) {
        (Some(d), _) => {
            let (n, m, p) = parse_dims(d)?;
            random_coisometry(n, m, p, seed)?
        }
        (None, Some(path)) => Colligation::from_json(&read_json(path)?)?,
        (None, None) => unreachable!("clap requires --dims or --colligation"),
    };
    let pts = match points {
        Some(path) => parse_points(&read_json(path)?)?
            .into_iter()
            .map(LatticePoint::require_half_lattice)
            .collect::<Result<_, _>>()?,
        None => default_points(),
    };
    let tol = cli.tol.unwrap_or(1e-9);
    let defect = is_coisometry(&cg.block(), cg.coisometry_tol()).defect_norm;
    let gram = gram_psd(&cg, &pts, tol)?;
    let contraction = multiplier_contraction(&cg, sections)?;
    let mut match_err: f64 = 0.0;
    for pair in pts.chunks(2).take(3) {
        let (z, w) = (pair[0], *pair.get(1).unwrap_or(&pair[0]));
        let series = kernel_series(&cg, z, w, terms)?.value;
        match_err = match_err.max((&series - &kernel_closed(&cg, z, w)?).max_abs());
    }
    let (n, m, p) = cg.dims();
    let passed = gram.psd && contraction.contraction && match_err <= 1e-6;
    let doc = json!({
        "seed": cg.seed(),
        "dims": [n, m, p],
        "points": pts.len(),
        "coisometry_defect": defect,
        "min_eig": gram.min_eig,
        "psd": gram.psd,
        "opnorm": contraction.opnorm,
        "contraction": contraction.contraction,
        "kernel_match_err": match_err,
        "passed": passed,
    });
    let text = if cli.json {
        pretty(&doc)
    } else {
        format!(
            "dims: {n},{m},{p}\nseed: {}\nmin_eig: {:e}\nopnorm: {:.15}\nkernel_match_err: {:e}\npassed: {passed}\n",
            cg.seed().map_or("-".to_string(), |s| s.to_string()),
            gram.min_eig,
            contraction.opnorm,
            match_err
        )
    };
    Ok(Output::with_code(if passed { 0 } else { 1 }, text))
}
