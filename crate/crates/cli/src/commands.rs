//! Subcommand definitions and their implementations.

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use moyal_core::grid::{self, GridSpec};
use moyal_core::gvh::{gvh_certificate, mpc_identity_check, Certificate};
use moyal_core::poly::{poisson_bracket, PolySymbol, Shape};
use moyal_core::star::{moyal_bracket, moyal_product, truncated_bracket};
use moyal_core::symbol::SymbolEvaluator;
use moyal_core::weyl::dynamics::egorov_compare;
use moyal_core::weyl::{self, XGrid};
use moyal_core::MoyalError;

use crate::expr::{self, lower_evaluator, lower_poly, parse_symbol, ExprError};
use crate::output::{csv, document, format_float, poly_json, series_json, Json};

#[derive(Debug, Parser)]
#[command(name = "moyal-lab", version, about = "Exact and numerical Moyal calculus")]
pub struct Cli {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StarMode {
    Exact,
    Grid,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Star product, exact for polynomials or on a periodic grid.
    Star {
        #[arg(long = "A")]
        a: String,
        #[arg(long = "B")]
        b: String,
        #[arg(long, value_enum, default_value = "exact")]
        mode: StarMode,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long = "N", default_value_t = 128)]
        n: usize,
        #[arg(long = "L", default_value_t = 8.0)]
        l: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        /// Compare with direct quadrature at this many interior points.
        #[arg(long, default_value_t = 0)]
        check_points: usize,
        /// Relative tolerance for the quadrature comparison.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Write the grid product in the binary grid format.
        #[arg(long)]
        grid_out: Option<PathBuf>,
    },
    /// Poisson, Moyal or truncated Moyal bracket of two polynomials.
    Bracket {
        #[arg(long = "A")]
        a: String,
        #[arg(long = "H")]
        h: String,
        /// poisson, moyal, truncated:m or both.
        #[arg(long, default_value = "both")]
        mode: String,
        #[arg(long, default_value_t = 1)]
        d: usize,
    },
    /// Certificates for the exponential test family, m = 0..max-m.
    Gvh {
        #[arg(long = "H")]
        h: String,
        #[arg(long, default_value_t = 3)]
        max_m: u32,
        #[arg(long, default_value_t = 1)]
        d: usize,
    },
    /// Expansion of the exponential-test bracket identity for one Hamiltonian.
    Mpc {
        #[arg(long = "H")]
        h: String,
        #[arg(long, default_value_t = 1)]
        d: usize,
    },
    /// Scaling of the truncated star-product remainder with hbar.
    Remainder {
        #[arg(long = "A")]
        a: String,
        #[arg(long = "B")]
        b: String,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        orders: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_value = "0.8,0.4,0.2,0.1")]
        hbars: Vec<f64>,
        #[arg(long = "N", default_value_t = 128)]
        n: usize,
        #[arg(long = "L", default_value_t = 8.0)]
        l: f64,
        /// Fail unless every fitted slope is at least order + this.
        #[arg(long)]
        min_excess: Option<f64>,
    },
    /// Weyl-quantize a symbol on a position grid and invert it again.
    Quantize {
        #[arg(long = "A")]
        a: String,
        #[arg(long = "N", default_value_t = 256)]
        n: usize,
        #[arg(long = "L", default_value_t = 12.0)]
        l: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Write the operator matrix in the binary grid format.
        #[arg(long)]
        matrix_out: Option<PathBuf>,
    },
    /// Evolved Weyl symbol against classical transport.
    Egorov {
        #[arg(long = "A")]
        a: String,
        #[arg(long = "H")]
        h: String,
        /// Times; defaults to a quarter, a half and a full half-period of the oscillator.
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
        #[arg(long = "N", default_value_t = 256)]
        n: usize,
        #[arg(long = "L", default_value_t = 12.0)]
        l: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
    /// Coherent-state expectations over a range of hbar.
    Coherent {
        #[arg(long = "A")]
        a: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        eta: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025,0.0125")]
        hbars: Vec<f64>,
        #[arg(long = "L", default_value_t = 12.0)]
        l: f64,
        #[arg(long, default_value_t = 0.9)]
        min_slope: f64,
    },
}

#[derive(Debug)]
pub enum CliError {
    Expr { flag: &'static str, source: String, error: ExprError },
    Config(String),
    Core(MoyalError),
}

impl CliError {
    /// 1 for input and configuration problems, 2 for numeric failures, 3 for
    /// violated invariants.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Expr { .. } | CliError::Config(_) => 1,
            CliError::Core(MoyalError::Numeric(_)) => 2,
            CliError::Core(MoyalError::Invariant(_)) => 3,
            CliError::Core(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Expr { flag, source, error } => write!(f, "--{flag}: {}", error.render(source)),
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<MoyalError> for CliError {
    fn from(e: MoyalError) -> Self {
        CliError::Core(e)
    }
}

/// A rendered result and, when a tolerance check failed, the reason.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    pub failure: Option<String>,
}

struct Report {
    json: Json,
    csv: Option<String>,
    failure: Option<String>,
    default: Format,
}

impl Report {
    fn json(json: Json) -> Self {
        Report { json, csv: None, failure: None, default: Format::Json }
    }
}

fn parse(flag: &'static str, text: &str) -> Result<expr::Expr, CliError> {
    parse_symbol(text).map_err(|error| CliError::Expr { flag, source: text.to_string(), error })
}

fn poly_in(flag: &'static str, text: &str, shape: Shape) -> Result<PolySymbol, CliError> {
    let e = parse(flag, text)?;
    lower_poly(&e, shape).map_err(|error| CliError::Expr { flag, source: text.to_string(), error })
}

fn evaluator(flag: &'static str, text: &str) -> Result<SymbolEvaluator, CliError> {
    let e = parse(flag, text)?;
    lower_evaluator(&e).map_err(|error| CliError::Expr { flag, source: text.to_string(), error })
}

/// Both polynomials on the smallest shape holding either.
fn poly_pair(
    (fa, ta): (&'static str, &str),
    (fb, tb): (&'static str, &str),
    d: usize,
) -> Result<(PolySymbol, PolySymbol), CliError> {
    check_dim(d)?;
    let sa = expr::required_shape(&parse(fa, ta)?, d);
    let sb = expr::required_shape(&parse(fb, tb)?, d);
    let shape = sa.union(&sb)?;
    Ok((poly_in(fa, ta, shape)?, poly_in(fb, tb, shape)?))
}

fn phase_poly(flag: &'static str, text: &str, d: usize) -> Result<PolySymbol, CliError> {
    check_dim(d)?;
    poly_in(flag, text, Shape::phase(d))
}

fn check_dim(d: usize) -> Result<(), CliError> {
    if d == 0 || d > 8 {
        return Err(CliError::Config(format!("--d {d} must be in 1..=8")));
    }
    Ok(())
}

fn warning_json(w: &Option<grid::Warning>) -> Json {
    match w {
        None => Json::Null,
        Some(w) => Json::obj([
            ("kind", Json::str(w.kind)),
            ("magnitude", Json::float(w.magnitude)),
            ("threshold", Json::float(w.threshold)),
        ]),
    }
}

/// Run a parsed command line and render its result.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let (name, report) = match &cli.command {
        Command::Star { a, b, mode, d, n, l, hbar, check_points, tol, grid_out } => {
            let r = match mode {
                StarMode::Exact => star_exact(a, b, *d)?,
                StarMode::Grid => {
                    if *d != 1 {
                        return Err(CliError::Config("grid star products run in d = 1".into()));
                    }
                    star_on_grid(a, b, *n, *l, *hbar, *check_points, *tol, grid_out.as_ref())?
                }
            };
            ("star", r)
        }
        Command::Bracket { a, h, mode, d } => ("bracket", bracket(a, h, mode, *d)?),
        Command::Gvh { h, max_m, d } => ("gvh", gvh(h, *max_m, *d)?),
        Command::Mpc { h, d } => ("mpc", mpc(h, *d)?),
        Command::Remainder { a, b, orders, hbars, n, l, min_excess } => {
            ("remainder", remainder(a, b, orders, hbars, *n, *l, *min_excess)?)
        }
        Command::Quantize { a, n, l, hbar, tol, matrix_out } => {
            ("quantize", quantize(a, *n, *l, *hbar, *tol, matrix_out.as_ref())?)
        }
        Command::Egorov { a, h, t, n, l, hbar, tol } => ("egorov", egorov(a, h, t, *n, *l, *hbar, *tol)?),
        Command::Coherent { a, y, eta, hbars, l, min_slope } => {
            ("coherent", coherent(a, (*y, *eta), hbars, *l, *min_slope)?)
        }
    };
    let text = match cli.format.unwrap_or(report.default) {
        Format::Json => document(name, report.json).render(),
        Format::Csv => report
            .csv
            .ok_or_else(|| CliError::Config(format!("{name} has no CSV form; use --format json")))?,
    };
    Ok(Outcome { text, failure: report.failure })
}

fn star_exact(a: &str, b: &str, d: usize) -> Result<Report, CliError> {
    let (pa, pb) = poly_pair(("A", a), ("B", b), d)?;
    let product = moyal_product(&pa, &pb)?;
    Ok(Report::json(Json::obj([
        ("mode", Json::str("exact")),
        ("A", poly_json(&pa)),
        ("B", poly_json(&pb)),
        ("product", series_json(&product)),
    ])))
}

/// Interior grid indices for the quadrature comparison, spread by fixed strides.
fn check_indices(n: usize, count: usize) -> Vec<(usize, usize)> {
    let (lo, span) = (n / 4, n / 2);
    (0..count).map(|k| (lo + (k * 37 + 5) % span, lo + (k * 61 + 11) % span)).collect()
}

#[allow(clippy::too_many_arguments)]
fn star_on_grid(
    a: &str,
    b: &str,
    n: usize,
    l: f64,
    hbar: f64,
    check_points: usize,
    tol: f64,
    grid_out: Option<&PathBuf>,
) -> Result<Report, CliError> {
    let (fa, fb) = (evaluator("A", a)?, evaluator("B", b)?);
    let mut spec = GridSpec::new(n, l, hbar)?;
    spec.oracle_tol = tol;
    let (ga, wa) = grid::sample(&fa, &spec)?;
    let (gb, wb) = grid::sample(&fb, &spec)?;
    let product = grid::star_grid(&ga, &gb)?;
    if let Some(path) = grid_out {
        grid::io::write_grid(path, &product)?;
    }
    let mut checks = Vec::new();
    let mut worst: f64 = 0.0;
    let mut unconverged = 0;
    for (i, j) in check_indices(n, check_points) {
        let point = (spec.point(i), spec.point(j));
        let q = grid::quadrature::star_quadrature_point(&fa, &fb, point, &spec)?;
        let g = product.get(i, j);
        let rel = (g - q.refined).norm() / q.refined.norm().max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
        unconverged += usize::from(!q.converged);
        checks.push(Json::obj([
            ("x", Json::float(point.0)),
            ("xi", Json::float(point.1)),
            ("grid", Json::complex(g)),
            ("quadrature", Json::complex(q.refined)),
            ("relative_error", Json::float(rel)),
            ("quadrature_converged", Json::Bool(q.converged)),
        ]));
    }
    let failure = (worst > tol).then(|| format!("grid and quadrature differ by {} > {}", format_float(worst), format_float(tol)));
    let json = Json::obj([
        ("mode", Json::str("grid")),
        ("grid", Json::obj([("N", Json::Int(n as i64)), ("L", Json::float(l)), ("hbar", Json::float(hbar))])),
        ("warnings", Json::obj([("A", warning_json(&wa)), ("B", warning_json(&wb))])),
        ("interior_sup", Json::float(product.interior_sup())),
        ("boundary_magnitude", Json::float(product.boundary_magnitude())),
        ("oracle_checks", Json::Arr(checks)),
        ("oracle_max_relative_error", if check_points == 0 { Json::Null } else { Json::float(worst) }),
        ("oracle_unconverged", Json::Int(unconverged as i64)),
        ("grid_out", grid_out.map_or(Json::Null, |p| Json::str(p.display().to_string()))),
    ]);
    Ok(Report { json, csv: None, failure, default: Format::Json })
}

fn bracket(a: &str, h: &str, mode: &str, d: usize) -> Result<Report, CliError> {
    let (pa, ph) = poly_pair(("A", a), ("H", h), d)?;
    let mut out = Json::obj([("A", poly_json(&pa)), ("H", poly_json(&ph)), ("mode", Json::str(mode))]);
    let (poisson, moyal, truncated) = match mode {
        "poisson" => (true, false, None),
        "moyal" => (false, true, None),
        "both" => (true, true, None),
        other => match other.strip_prefix("truncated:").map(str::parse::<u32>) {
            Some(Ok(m)) => (false, false, Some(m)),
            _ => return Err(CliError::Config(format!("--mode {other}: expected poisson, moyal, truncated:m or both"))),
        },
    };
    if poisson {
        out = out.with("poisson", poly_json(&poisson_bracket(&pa, &ph)?));
    }
    if moyal {
        out = out.with("moyal", series_json(&moyal_bracket(&pa, &ph)?));
    }
    if let Some(m) = truncated {
        out = out.with("truncated", Json::obj([("m", Json::Int(m as i64)), ("series", series_json(&truncated_bracket(&pa, &ph, m)?))]));
    }
    Ok(Report::json(out))
}

fn gvh(h: &str, max_m: u32, d: usize) -> Result<Report, CliError> {
    let ph = phase_poly("H", h, d)?;
    let degree = ph.degree_phase();
    let mut rows = Vec::new();
    for m in 0..=max_m {
        let cert = gvh_certificate(&ph, m)?;
        let predicted_equal = degree <= 2 * m + 2;
        let row = match &cert {
            Certificate::Equal => Json::obj([("m", Json::Int(m as i64)), ("verdict", Json::str("equal"))]),
            Certificate::Witness { order, j, poly } => Json::obj([
                ("m", Json::Int(m as i64)),
                ("verdict", Json::str("witness")),
                ("order", Json::Int(*order as i64)),
                ("j", Json::Int(*j as i64)),
                ("witness", poly_json(poly)),
            ]),
        };
        if matches!(cert, Certificate::Equal) != predicted_equal {
            return Err(MoyalError::Invariant(format!(
                "certificate at m = {m} disagrees with the degree bound for deg H = {degree}"
            ))
            .into());
        }
        rows.push(row.with("degree_bound", Json::Int((2 * m + 2) as i64)));
    }
    Ok(Report::json(Json::obj([
        ("H", poly_json(&ph)),
        ("degree", Json::Int(degree as i64)),
        ("certificates", Json::Arr(rows)),
    ])))
}

fn mpc(h: &str, d: usize) -> Result<Report, CliError> {
    let ph = phase_poly("H", h, d)?;
    let r = mpc_identity_check(&ph)?;
    if !r.coefficient_checks.iter().all(|&ok| ok) {
        return Err(MoyalError::Invariant(format!("expansion coefficients fail their closed forms: {:?}", r.coefficient_checks)).into());
    }
    let opt = |p: &Option<PolySymbol>| p.as_ref().map_or(Json::Null, poly_json);
    Ok(Report::json(Json::obj([
        ("H", poly_json(&ph)),
        ("lhs_closed_form", poly_json(&r.lhs_closed_form)),
        ("literal_ordering_lhs", poly_json(&r.literal_ordering_lhs)),
        ("taylor_defect", poly_json(&r.taylor_defect)),
        ("c0", poly_json(&r.c0)),
        ("c1", poly_json(&r.c1)),
        ("c2", poly_json(&r.c2)),
        ("coefficient_checks", Json::Arr(r.coefficient_checks.iter().map(|&b| Json::Bool(b)).collect())),
        ("printed_c2_delta", opt(&r.printed_c2_delta)),
        ("printed_c2_delta_xi_reading", opt(&r.printed_c2_delta_xi_reading)),
    ])))
}

fn remainder(
    a: &str,
    b: &str,
    orders: &[u32],
    hbars: &[f64],
    n: usize,
    l: f64,
    min_excess: Option<f64>,
) -> Result<Report, CliError> {
    let (fa, fb) = (evaluator("A", a)?, evaluator("B", b)?);
    let first = *hbars.first().ok_or_else(|| CliError::Config("--hbars is empty".into()))?;
    let spec = GridSpec::new(n, l, first)?;
    let scan = grid::remainder_scaling_scan(&fa, &fb, orders, hbars, &spec)?;
    let mut failure = None;
    if let Some(excess) = min_excess {
        for f in &scan.fits {
            if let Some(s) = f.slope {
                if s < f.order as f64 + excess && failure.is_none() {
                    failure = Some(format!("order {} slope {} < {}", f.order, format_float(s), f.order as f64 + excess));
                }
            }
        }
    }
    let slope_of = |order: u32| scan.fits.iter().find(|f| f.order == order).and_then(|f| f.slope);
    let rows: Vec<Vec<String>> = scan
        .rows
        .iter()
        .map(|r| {
            vec![
                r.order.to_string(),
                format_float(r.hbar),
                format_float(r.sup_remainder),
                slope_of(r.order).map_or_else(String::new, format_float),
            ]
        })
        .collect();
    let table = csv(&["order", "hbar", "sup_remainder", "slope"], &rows);
    let json = Json::obj([
        ("grid", Json::obj([("N", Json::Int(n as i64)), ("L", Json::float(l))])),
        (
            "rows",
            Json::Arr(
                scan.rows
                    .iter()
                    .map(|r| {
                        Json::obj([
                            ("order", Json::Int(r.order as i64)),
                            ("hbar", Json::float(r.hbar)),
                            ("sup_remainder", Json::float(r.sup_remainder)),
                        ])
                    })
                    .collect(),
            ),
        ),
        (
            "fits",
            Json::Arr(
                scan.fits
                    .iter()
                    .map(|f| {
                        Json::obj([
                            ("order", Json::Int(f.order as i64)),
                            ("slope", Json::opt_float(f.slope)),
                            ("exact_within_noise", Json::Bool(f.exact_within_noise)),
                        ])
                    })
                    .collect(),
            ),
        ),
    ]);
    Ok(Report { json, csv: Some(table), failure, default: Format::Csv })
}

fn quantize(a: &str, n: usize, l: f64, hbar: f64, tol: f64, matrix_out: Option<&PathBuf>) -> Result<Report, CliError> {
    let fa = evaluator("A", a)?;
    let g = XGrid::new(n, l, hbar)?;
    let windowed = fa.is_polynomial();
    let fa = if windowed { fa.windowed(g.window_width()) } else { fa };
    let (op, warning) = weyl::quantize_kernel(&fa, &g);
    if let Some(path) = matrix_out {
        weyl::io::write_operator(path, &op)?;
    }
    let recovered = weyl::symbol_from_operator(&op);
    let reference = grid::sample_unchecked(&fa, recovered.spec());
    let scale = reference.interior_sup().max(f64::MIN_POSITIVE);
    let round_trip = recovered.sub(&reference)?.interior_sup() / scale;
    let failure = (round_trip > tol).then(|| format!("round trip error {} > {}", format_float(round_trip), format_float(tol)));
    let json = Json::obj([
        ("grid", Json::obj([("N", Json::Int(n as i64)), ("L", Json::float(l)), ("hbar", Json::float(hbar))])),
        ("windowed", Json::Bool(windowed)),
        ("window_width", if windowed { Json::float(g.window_width()) } else { Json::Null }),
        ("nyquist_warning", warning_json(&warning)),
        ("hs_norm", Json::float(op.hs_norm())),
        ("hermiticity_defect", Json::float(op.hermiticity_defect())),
        ("round_trip_relative_error", Json::float(round_trip)),
        ("tolerance", Json::float(tol)),
        ("matrix_out", matrix_out.map_or(Json::Null, |p| Json::str(p.display().to_string()))),
    ]);
    Ok(Report { json, csv: None, failure, default: Format::Json })
}

#[allow(clippy::too_many_arguments)]
fn egorov(a: &str, h: &str, times: &[f64], n: usize, l: f64, hbar: f64, tol: f64) -> Result<Report, CliError> {
    let fa = evaluator("A", a)?;
    let ph = phase_poly("H", h, 1)?;
    let g = XGrid::new(n, l, hbar)?;
    let default_times = [PI / 4.0, PI / 2.0, PI];
    let times = if times.is_empty() { &default_times[..] } else { times };
    let mut rows = Vec::new();
    let mut table = Vec::new();
    let mut failure = None;
    let mut control = false;
    for &t in times {
        let r = egorov_compare(&fa, &ph, t, &g)?;
        control |= r.flow == "shear";
        if r.flow != "shear" && r.mismatch > tol && failure.is_none() {
            failure = Some(format!("t = {}: mismatch {} > {}", format_float(t), format_float(r.mismatch), format_float(tol)));
        }
        rows.push(Json::obj([
            ("t", Json::float(t)),
            ("flow", Json::str(r.flow)),
            ("mismatch", Json::float(r.mismatch)),
            ("reference", Json::float(r.reference)),
            ("nyquist_warning", warning_json(&r.warning)),
        ]));
        table.push(vec![format_float(t), r.flow.to_string(), format_float(r.mismatch), format_float(r.reference)]);
    }
    let json = Json::obj([
        ("H", poly_json(&ph)),
        ("grid", Json::obj([("N", Json::Int(n as i64)), ("L", Json::float(l)), ("hbar", Json::float(hbar))])),
        ("tolerance", Json::float(tol)),
        ("negative_control", Json::Bool(control)),
        ("rows", Json::Arr(rows)),
    ]);
    Ok(Report { json, csv: Some(csv(&["t", "flow", "mismatch", "reference"], &table)), failure, default: Format::Json })
}

fn coherent(a: &str, y: (f64, f64), hbars: &[f64], l: f64, min_slope: f64) -> Result<Report, CliError> {
    let fa = evaluator("A", a)?;
    let sweep = weyl::coherent_sweep(&fa, y, hbars, l)?;
    let failure = (sweep.slope < min_slope)
        .then(|| format!("convergence slope {} < {}", format_float(sweep.slope), format_float(min_slope)));
    let rows = sweep
        .rows
        .iter()
        .map(|r| {
            Json::obj([
                ("hbar", Json::float(r.hbar)),
                ("N", Json::Int(r.n as i64)),
                ("expectation", Json::complex(r.expectation)),
                ("symbol_value", Json::complex(r.symbol_value)),
                ("deviation", Json::float(r.deviation)),
            ])
        })
        .collect();
    let table: Vec<Vec<String>> = sweep
        .rows
        .iter()
        .map(|r| {
            vec![
                format_float(r.hbar),
                r.n.to_string(),
                format_float(r.expectation.re),
                format_float(r.expectation.im),
                format_float(r.symbol_value.re),
                format_float(r.deviation),
            ]
        })
        .collect();
    let json = Json::obj([
        ("Y", Json::floats(&[y.0, y.1])),
        ("L", Json::float(l)),
        ("rows", Json::Arr(rows)),
        ("slope", Json::float(sweep.slope)),
        ("min_slope", Json::float(min_slope)),
    ]);
    Ok(Report {
        json,
        csv: Some(csv(&["hbar", "N", "expectation_re", "expectation_im", "symbol_value", "deviation"], &table)),
        failure,
        default: Format::Json,
    })
}

/// Parse `argv`, run, and return the rendered output and exit code. Output is
/// written even when a tolerance check fails.
pub fn run_args<I, T>(argv: I) -> (String, String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            return (if code == 0 { e.to_string() } else { String::new() }, if code == 0 { String::new() } else { e.to_string() }, code);
        }
    };
    match execute(&cli) {
        Ok(o) => {
            let code = if o.failure.is_some() { 2 } else { 0 };
            let err = o.failure.map(|f| format!("tolerance failure: {f}\n")).unwrap_or_default();
            match &cli.out {
                Some(path) => match std::fs::write(path, &o.text) {
                    Ok(()) => (String::new(), err, code),
                    Err(e) => (String::new(), format!("cannot write {}: {e}\n", path.display()), 1),
                },
                None => (o.text, err, code),
            }
        }
        Err(e) => (String::new(), format!("error: {e}\n"), e.exit_code()),
    }
}
