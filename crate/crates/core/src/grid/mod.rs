//! Sampled symbols on the periodic phase-space box `[−L, L)²` (one degree of freedom).

pub mod fourier;
pub mod io;
pub mod quadrature;

use ndarray::{Array2, Zip};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{MoyalError, Result};
use crate::scalar::complex_to_f64;
use crate::star::bidifferential_terms;
use crate::symbol::SymbolEvaluator;

pub use quadrature::{star_quadrature_point, QuadraturePoint};

/// Samples smaller than this on the box boundary count as decayed.
pub const BOUNDARY_DECAY: f64 = 1e-12;

/// Sup-norms below this make a log-log fit meaningless.
pub const NOISE_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub l: f64,
    pub hbar: f64,
    pub interior_tol: f64,
    pub oracle_tol: f64,
}

impl GridSpec {
    pub fn new(n: usize, l: f64, hbar: f64) -> Result<Self> {
        let spec = GridSpec { n, l, hbar, interior_tol: 1e-6, oracle_tol: 1e-6 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 16 || !self.n.is_power_of_two() {
            return Err(MoyalError::InvalidArgument(format!("grid size {} must be a power of two ≥ 16", self.n)));
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(MoyalError::InvalidArgument(format!("box half-length {} must be positive", self.l)));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(MoyalError::InvalidArgument(format!("hbar {} must be positive", self.hbar)));
        }
        Ok(())
    }

    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = hbar;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn step(&self) -> f64 {
        2.0 * self.l / self.n as f64
    }

    /// Fundamental wave number `π/L`.
    pub fn kappa(&self) -> f64 {
        std::f64::consts::PI / self.l
    }

    pub fn point(&self, i: usize) -> f64 {
        -self.l + i as f64 * self.step()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Central half-box `|x|, |ξ| < L/2`.
    pub fn is_interior(&self, i: usize) -> bool {
        self.point(i).abs() < self.l / 2.0
    }

    fn same_grid(&self, other: &GridSpec) -> bool {
        self.n == other.n && self.l == other.l && self.hbar == other.hbar
    }
}

/// A recoverable condition reported alongside a result.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Warning {
    pub kind: &'static str,
    pub magnitude: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSymbol {
    spec: GridSpec,
    samples: Array2<Complex64>,
}

impl GridSymbol {
    pub fn new(spec: GridSpec, samples: Array2<Complex64>) -> Result<Self> {
        if samples.dim() != (spec.n, spec.n) {
            return Err(MoyalError::GridMismatch(format!(
                "samples have shape {:?}, grid expects {}×{}",
                samples.dim(),
                spec.n,
                spec.n
            )));
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MoyalError::Numeric("non-finite grid sample".into()));
        }
        Ok(GridSymbol { spec, samples })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        GridSymbol { spec, samples: Array2::zeros((spec.n, spec.n)) }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn samples(&self) -> &Array2<Complex64> {
        &self.samples
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.samples[(i, j)]
    }

    fn check(&self, other: &GridSymbol) -> Result<()> {
        if self.spec.same_grid(&other.spec) {
            Ok(())
        } else {
            Err(MoyalError::GridMismatch(format!("{:?} vs {:?}", self.spec, other.spec)))
        }
    }

    pub fn add(&self, other: &GridSymbol) -> Result<GridSymbol> {
        self.check(other)?;
        Ok(GridSymbol { spec: self.spec, samples: &self.samples + &other.samples })
    }

    pub fn sub(&self, other: &GridSymbol) -> Result<GridSymbol> {
        self.check(other)?;
        Ok(GridSymbol { spec: self.spec, samples: &self.samples - &other.samples })
    }

    pub fn scale(&self, c: Complex64) -> GridSymbol {
        GridSymbol { spec: self.spec, samples: self.samples.mapv(|z| z * c) }
    }

    pub fn pointwise_mul(&self, other: &GridSymbol) -> Result<GridSymbol> {
        self.check(other)?;
        Ok(GridSymbol { spec: self.spec, samples: &self.samples * &other.samples })
    }

    fn interior_values(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.samples
            .indexed_iter()
            .filter(|((i, j), _)| self.spec.is_interior(*i) && self.spec.is_interior(*j))
            .map(|(_, z)| *z)
    }

    pub fn interior_sup(&self) -> f64 {
        self.interior_values().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest imaginary part on the interior.
    pub fn interior_sup_im(&self) -> f64 {
        self.interior_values().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn interior_sup_re(&self) -> f64 {
        self.interior_values().map(|z| z.re.abs()).fold(0.0, f64::max)
    }

    pub fn sup(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest magnitude on the outermost ring of samples.
    pub fn boundary_magnitude(&self) -> f64 {
        let n = self.spec.n;
        self.samples
            .indexed_iter()
            .filter(|((i, j), _)| *i == 0 || *j == 0 || *i == n - 1 || *j == n - 1)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Pointwise samples of `f`, with a warning when `f` has not decayed on the boundary.
pub fn sample(f: &SymbolEvaluator, spec: &GridSpec) -> Result<(GridSymbol, Option<Warning>)> {
    spec.validate()?;
    let pts = spec.points();
    let samples = Array2::from_shape_fn((spec.n, spec.n), |(i, j)| f.eval(pts[i], pts[j]));
    let g = GridSymbol::new(*spec, samples)?;
    let b = g.boundary_magnitude();
    let warning = (b >= BOUNDARY_DECAY).then_some(Warning { kind: "boundary-decay", magnitude: b, threshold: BOUNDARY_DECAY });
    Ok((g, warning))
}

/// Samples of `f`, ignoring the boundary check.
pub fn sample_unchecked(f: &SymbolEvaluator, spec: &GridSpec) -> GridSymbol {
    let pts = spec.points();
    GridSymbol { spec: *spec, samples: Array2::from_shape_fn((spec.n, spec.n), |(i, j)| f.eval(pts[i], pts[j])) }
}

/// Samples of `f ∘ Φ` for a map `Φ` of the phase plane.
pub fn sample_composed<F>(f: &SymbolEvaluator, spec: &GridSpec, phi: F) -> GridSymbol
where
    F: Fn(f64, f64) -> (f64, f64),
{
    let pts = spec.points();
    let samples = Array2::from_shape_fn((spec.n, spec.n), |(i, j)| {
        let (x, xi) = phi(pts[i], pts[j]);
        f.eval(x, xi)
    });
    GridSymbol { spec: *spec, samples }
}

/// `A⊛B` by twisted convolution of the Fourier coefficients.
///
/// For plane waves `e^{iκk·X} ⊛ e^{iκq·X} = e^{iκ(k+q)·X} e^{iθ(q_x k_ξ − q_ξ k_x)}` with
/// `θ = ħκ²/2`. For each pair of `x`-modes `(p_x, k_x)` the sum over `ξ`-modes is a
/// linear convolution, done with zero-padded FFTs, so the cost is `O(N³ log N)`.
/// Modes outside the band `[−N/2, N/2)` are dropped rather than wrapped.
/// Rows `p_x` are independent and computed in parallel; each row is reduced
/// sequentially, so results do not depend on the thread count.
pub fn star_grid(a: &GridSymbol, b: &GridSymbol) -> Result<GridSymbol> {
    a.check(b)?;
    let spec = a.spec;
    let n = spec.n;
    let half = (n / 2) as i64;
    let theta = 0.5 * spec.hbar * spec.kappa() * spec.kappa();
    let ac = fourier::coefficients(&a.samples);
    let bc = fourier::coefficients(&b.samples);
    let m = 2 * n;
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);

    // Padded transforms of the rows of b̂, one per q_x.
    let b_rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|q| {
            let mut buf = vec![Complex64::new(0.0, 0.0); m];
            for s in 0..n {
                buf[s] = bc[(q, s)];
            }
            fwd.process(&mut buf);
            buf
        })
        .collect();

    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|pxi_idx| {
            let px = pxi_idx as i64 - half;
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            let mut buf = vec![Complex64::new(0.0, 0.0); m];
            for kx_idx in 0..n {
                let kx = kx_idx as i64 - half;
                let qx = px - kx;
                if qx < -half || qx >= half {
                    continue;
                }
                let q_idx = (qx + half) as usize;
                for s in 0..n {
                    let kxi = s as i64 - half;
                    buf[s] = ac[(kx_idx, s)] * Complex64::from_polar(1.0, theta * (px * kxi) as f64);
                }
                for v in buf[n..].iter_mut() {
                    *v = Complex64::new(0.0, 0.0);
                }
                fwd.process(&mut buf);
                for (u, v) in buf.iter_mut().zip(&b_rows[q_idx]) {
                    *u *= v;
                }
                inv.process(&mut buf);
                for (t, out) in row.iter_mut().enumerate() {
                    let pxi = t as i64 - half;
                    let phase = Complex64::from_polar(1.0, -theta * (pxi * kx) as f64);
                    // Index t + N/2 of the linear convolution is mode p_ξ.
                    *out += buf[t + n / 2] * phase / m as f64;
                }
            }
            row
        })
        .collect();

    let mut coeffs = Array2::zeros((n, n));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            coeffs[(i, j)] = v;
        }
    }
    let out = fourier::synthesize(&coeffs);
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(MoyalError::Numeric("star_grid produced non-finite values".into()));
    }
    Ok(GridSymbol { spec, samples: out })
}

/// Reference twisted convolution by direct `O(N⁴)` summation, for small grids.
pub fn star_grid_direct(a: &GridSymbol, b: &GridSymbol) -> Result<GridSymbol> {
    a.check(b)?;
    let spec = a.spec;
    let n = spec.n as i64;
    let half = n / 2;
    let theta = 0.5 * spec.hbar * spec.kappa() * spec.kappa();
    let ac = fourier::coefficients(&a.samples);
    let bc = fourier::coefficients(&b.samples);
    let mut coeffs = Array2::zeros((spec.n, spec.n));
    for px in -half..half {
        for pxi in -half..half {
            let mut acc = Complex64::new(0.0, 0.0);
            for kx in -half..half {
                for kxi in -half..half {
                    let (qx, qxi) = (px - kx, pxi - kxi);
                    if qx < -half || qx >= half || qxi < -half || qxi >= half {
                        continue;
                    }
                    let w = Complex64::from_polar(1.0, theta * (px * kxi - pxi * kx) as f64);
                    acc += ac[((kx + half) as usize, (kxi + half) as usize)]
                        * bc[((qx + half) as usize, (qxi + half) as usize)]
                        * w;
                }
            }
            coeffs[((px + half) as usize, (pxi + half) as usize)] = acc;
        }
    }
    Ok(GridSymbol { spec, samples: fourier::synthesize(&coeffs) })
}

/// `∂_x^nx ∂_ξ^nxi A` by spectral differentiation.
pub fn spectral_partial(a: &GridSymbol, nx: u32, nxi: u32) -> GridSymbol {
    let c = fourier::coefficients(&a.samples);
    let d = fourier::differentiate(&c, a.spec.kappa(), nx, nxi);
    GridSymbol { spec: a.spec, samples: fourier::synthesize(&d) }
}

/// `C_j(A, B)` with spectral derivatives.
pub fn cj_grid(a: &GridSymbol, b: &GridSymbol, j: u32) -> Result<GridSymbol> {
    a.check(b)?;
    let mut out = Array2::zeros((a.spec.n, a.spec.n));
    for t in bidifferential_terms(1, j) {
        let da = spectral_partial(a, t.left_x[0], t.left_xi[0]);
        let db = spectral_partial(b, t.right_x[0], t.right_xi[0]);
        let c = complex_to_f64(&t.coef);
        Zip::from(&mut out).and(&da.samples).and(&db.samples).for_each(|o, x, y| *o += c * x * y);
    }
    Ok(GridSymbol { spec: a.spec, samples: out })
}

/// `R_N = A⊛B − Σ_{j ≤ N} ħ^j C_j(A, B)`.
pub fn remainder_grid(a: &GridSymbol, b: &GridSymbol, order: u32) -> Result<GridSymbol> {
    let mut r = star_grid(a, b)?;
    for j in 0..=order {
        let c = cj_grid(a, b, j)?.scale(Complex64::new(a.spec.hbar.powi(j as i32), 0.0));
        r = r.sub(&c)?;
    }
    Ok(r)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub order: u32,
    pub hbar: f64,
    pub sup_remainder: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanFit {
    pub order: u32,
    /// `None` when every remainder is below the noise floor.
    pub slope: Option<f64>,
    pub exact_within_noise: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    pub fits: Vec<ScanFit>,
}

/// Sup-norm of `R_N` on the interior for each order and `ħ`, and the fitted
/// exponent of `ħ` per order.
pub fn remainder_scaling_scan(
    a: &SymbolEvaluator,
    b: &SymbolEvaluator,
    orders: &[u32],
    hbars: &[f64],
    spec: &GridSpec,
) -> Result<ScanReport> {
    if hbars.len() < 2 {
        return Err(MoyalError::InvalidArgument("the scan needs at least two values of hbar".into()));
    }
    let mut rows = Vec::new();
    let mut per_order: Vec<Vec<f64>> = vec![Vec::new(); orders.len()];
    for &hbar in hbars {
        let s = spec.with_hbar(hbar);
        s.validate()?;
        let ga = sample_unchecked(a, &s);
        let gb = sample_unchecked(b, &s);
        let star = star_grid(&ga, &gb)?;
        let top = orders.iter().copied().max().unwrap_or(0);
        let mut partial = GridSymbol::zeros(s);
        let mut sums = Vec::with_capacity(top as usize + 1);
        for j in 0..=top {
            let c = cj_grid(&ga, &gb, j)?.scale(Complex64::new(hbar.powi(j as i32), 0.0));
            partial = partial.add(&c)?;
            sums.push(partial.clone());
        }
        for (k, &order) in orders.iter().enumerate() {
            let sup = star.sub(&sums[order as usize])?.interior_sup();
            per_order[k].push(sup);
            rows.push(ScanRow { order, hbar, sup_remainder: sup });
        }
    }
    let fits = orders
        .iter()
        .zip(&per_order)
        .map(|(&order, sups)| {
            let noisy = sups.iter().all(|&s| s < NOISE_FLOOR);
            ScanFit {
                order,
                slope: (!noisy).then(|| loglog_slope(hbars, sups)),
                exact_within_noise: noisy,
            }
        })
        .collect();
    Ok(ScanReport { rows, fits })
}

/// `Ã_σ(Y) = ∫ A(z) e^{−iσ(Y,z)} dz` on the dual grid of half-length `πN/(2L)`.
pub fn symplectic_fourier(a: &GridSymbol) -> GridSymbol {
    let spec = a.spec;
    let n = spec.n;
    let half = (n / 2) as i64;
    let h = spec.step();
    let f = fourier::fft2(&a.samples);
    let dual = GridSpec { l: std::f64::consts::PI * n as f64 / (2.0 * spec.l), ..spec };
    let samples = Array2::from_shape_fn((n, n), |(ia, ib)| {
        // Y = (y, η) = κ(ia − N/2, ib − N/2); the transform is taken at k = (η, −y).
        let mx = ib as i64 - half;
        let mxi = half - ia as i64;
        let src = (mx.rem_euclid(n as i64) as usize, mxi.rem_euclid(n as i64) as usize);
        let parity = if (mx + mxi).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        f[src] * (parity * h * h)
    });
    GridSymbol { spec: dual, samples }
}
