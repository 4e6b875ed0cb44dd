//! Weyl quantization as dense matrices on a periodic position grid (one degree of freedom).
//!
//! Matrices act directly on sample vectors: the quadrature weight `h = 2L/N` is
//! folded into the entries, so `(Âψ)_i = Σ_j M_ij ψ_j` approximates `∫K(x_i, y)ψ(y)dy`
//! and the Frobenius norm approximates the Hilbert–Schmidt norm.

pub mod dynamics;
pub mod io;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{MoyalError, Result};
use crate::grid::{GridSpec, GridSymbol, Warning};
use crate::symbol::SymbolEvaluator;

/// Relative tail of `|A(m, ξ)|` at the edge of the momentum band above which
/// `quantize_kernel` warns.
pub const NYQUIST_TAIL: f64 = 1e-10;

/// Polynomial symbols are multiplied by `e^{−|X|²/(2w²)}` with `w = L·WINDOW_FRACTION`.
pub const WINDOW_FRACTION: f64 = 0.125;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XGrid {
    pub n: usize,
    pub l: f64,
    pub hbar: f64,
}

impl XGrid {
    pub fn new(n: usize, l: f64, hbar: f64) -> Result<Self> {
        GridSpec::new(n, l, hbar)?;
        Ok(XGrid { n, l, hbar })
    }

    pub fn step(&self) -> f64 {
        2.0 * self.l / self.n as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        -self.l + i as f64 * self.step()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Momentum of the centered mode `k ∈ [−N/2, N/2)`: `πħk/L`.
    pub fn momentum(&self, k: i64) -> f64 {
        std::f64::consts::PI * self.hbar * k as f64 / self.l
    }

    /// The phase-space grid `[−L, L)²` with the same resolution.
    pub fn phase_grid(&self) -> GridSpec {
        GridSpec::new(self.n, self.l, self.hbar).expect("validated on construction")
    }

    /// Window width used for polynomial symbols on this grid.
    pub fn window_width(&self) -> f64 {
        self.l * WINDOW_FRACTION
    }

    fn is_interior(&self, i: usize) -> bool {
        self.point(i).abs() < self.l / 2.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveVector {
    pub grid: XGrid,
    pub values: DVector<Complex64>,
}

impl WaveVector {
    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: XGrid, f: F) -> Self {
        WaveVector { grid, values: DVector::from_fn(grid.n, |i, _| f(grid.point(i))) }
    }

    /// `⟨φ, ψ⟩ = h Σ φ̄_i ψ_i`.
    pub fn inner(&self, other: &WaveVector) -> Complex64 {
        self.values.dotc(&other.values) * self.grid.step()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.sqrt()
    }

    /// Largest magnitude at the two ends of the box.
    pub fn boundary_magnitude(&self) -> f64 {
        self.values[0].norm().max(self.values[self.grid.n - 1].norm())
    }

    /// `L²` distance restricted to the central half of the box.
    pub fn interior_distance(&self, other: &WaveVector) -> f64 {
        let h = self.grid.step();
        (0..self.grid.n)
            .filter(|&i| self.grid.is_interior(i))
            .map(|i| (self.values[i] - other.values[i]).norm_sqr() * h)
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    pub grid: XGrid,
    pub m: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn identity(grid: XGrid) -> Self {
        OperatorMatrix { grid, m: DMatrix::identity(grid.n, grid.n) }
    }

    /// Multiplication by `f(x)`.
    pub fn multiplication<F: Fn(f64) -> Complex64>(grid: XGrid, f: F) -> Self {
        let d = DVector::from_fn(grid.n, |i, _| f(grid.point(i)));
        OperatorMatrix { grid, m: DMatrix::from_diagonal(&d) }
    }

    /// `F^{-1} diag(f(p_k)) F` for the centered momenta `p_k`.
    pub fn fourier_multiplier<F: Fn(f64) -> Complex64>(grid: XGrid, f: F) -> Self {
        let n = grid.n;
        let half = (n / 2) as i64;
        // Circulant: entry (i, j) depends on (i − j) mod N.
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for k in -half..half {
            col[k.rem_euclid(n as i64) as usize] = f(grid.momentum(k));
        }
        FftPlanner::new().plan_fft_inverse(n).process(&mut col);
        let m = DMatrix::from_fn(n, n, |i, j| col[(i + n - j) % n] / n as f64);
        OperatorMatrix { grid, m }
    }

    pub fn apply(&self, psi: &WaveVector) -> WaveVector {
        WaveVector { grid: self.grid, values: &self.m * &psi.values }
    }

    pub fn mul(&self, other: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix { grid: self.grid, m: &self.m * &other.m }
    }

    pub fn add(&self, other: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix { grid: self.grid, m: &self.m + &other.m }
    }

    pub fn sub(&self, other: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix { grid: self.grid, m: &self.m - &other.m }
    }

    pub fn scale(&self, z: Complex64) -> OperatorMatrix {
        OperatorMatrix { grid: self.grid, m: &self.m * z }
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix { grid: self.grid, m: self.m.adjoint() }
    }

    pub fn commutator(&self, other: &OperatorMatrix) -> OperatorMatrix {
        self.mul(other).sub(&other.mul(self))
    }

    /// `(i/ħ)[self, other]`.
    pub fn bracket(&self, other: &OperatorMatrix) -> OperatorMatrix {
        self.commutator(other).scale(Complex64::new(0.0, 1.0 / self.grid.hbar))
    }

    /// Frobenius norm, the discrete Hilbert–Schmidt norm.
    pub fn hs_norm(&self) -> f64 {
        self.m.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max|M − M†| / max|M|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = (&self.m - self.m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let s = self.max_abs();
        if s == 0.0 {
            0.0
        } else {
            d / s
        }
    }

    /// `max|M†M − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.m.adjoint() * &self.m;
        (p - DMatrix::identity(self.grid.n, self.grid.n)).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖self − other‖_HS / ‖other‖_HS`.
    pub fn relative_distance(&self, other: &OperatorMatrix) -> f64 {
        (&self.m - &other.m).norm() / other.m.norm()
    }
}

/// Weyl quantization through the kernel `K(x,y) = (2πħ)^{-1}∫e^{i(x−y)η/ħ}A((x+y)/2, η)dη`,
/// with the `η` integral taken over the grid momenta. Entries with
/// `i + j = s` share the midpoint `−L + s h/2`, so each antidiagonal is a
/// single inverse FFT of the samples `A(m_s, p_k)`. The sampled kernel is
/// `2L`-periodic in `x − y`; entries with `|x − y| ≥ L` are set to zero.
pub fn quantize_kernel(a: &SymbolEvaluator, grid: &XGrid) -> (OperatorMatrix, Option<Warning>) {
    let n = grid.n;
    let half = (n / 2) as i64;
    let h = grid.step();
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let mut m = DMatrix::zeros(n, n);
    let mut peak: f64 = 0.0;
    let mut tail: f64 = 0.0;
    let mut varies = false;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for s in 0..(2 * n - 1) {
        let mid = -grid.l + s as f64 * h / 2.0;
        for k in -half..half {
            let v = a.eval(mid, grid.momentum(k));
            peak = peak.max(v.norm());
            if k == -half || k == half - 1 {
                tail = tail.max(v.norm());
            }
            buf[k.rem_euclid(n as i64) as usize] = v;
        }
        let first = buf[0];
        varies |= buf.iter().any(|v| (v - first).norm() > 1e-14 * first.norm().max(1e-300));
        ifft.process(&mut buf);
        let (lo, hi) = (s.saturating_sub(n - 1), s.min(n - 1));
        for i in lo..=hi {
            let j = s - i;
            if i.abs_diff(j) < n / 2 {
                m[(i, j)] = buf[(i + n - j) % n] / n as f64;
            }
        }
    }
    let rel = if peak > 0.0 { tail / peak } else { 0.0 };
    let warning = (varies && rel > NYQUIST_TAIL).then_some(Warning { kind: "nyquist-tail", magnitude: rel, threshold: NYQUIST_TAIL });
    (OperatorMatrix { grid: *grid, m }, warning)
}

/// Weyl quantization of a polynomial from the diagonal `x̂` and the spectral
/// `p̂`, using `x^a ξ^b ↦ 2^{−a} Σ_k C(a,k) x̂^k p̂^b x̂^{a−k}`.
pub fn quantize_polynomial(p: &crate::poly::PolySymbol, grid: &XGrid) -> Result<OperatorMatrix> {
    let shape = p.shape();
    if shape.dim != 1 || shape.test_point || shape.hbar {
        return Err(MoyalError::InvalidArgument(format!("operator quantization needs a polynomial in d = 1, got shape {shape}")));
    }
    let x = OperatorMatrix::multiplication(*grid, c);
    let pm = OperatorMatrix::fourier_multiplier(*grid, c);
    let pow = |op: &OperatorMatrix, k: u32| (0..k).fold(OperatorMatrix::identity(*grid), |acc, _| acc.mul(op));
    let mut out = OperatorMatrix { grid: *grid, m: DMatrix::zeros(grid.n, grid.n) };
    for (e, coef) in p.terms() {
        let (a, b) = (e.entries()[0], e.entries()[1]);
        let pb = pow(&pm, b);
        let weight = crate::scalar::complex_to_f64(coef) / 2f64.powi(a as i32);
        let mut binom = 1.0;
        for k in 0..=a {
            let term = pow(&x, k).mul(&pb).mul(&pow(&x, a - k));
            out = out.add(&term.scale(weight * binom));
            binom = binom * (a - k) as f64 / (k + 1) as f64;
        }
    }
    Ok(out)
}

/// Weyl symbol `A(x,ξ) = ∫e^{−iξt/ħ}K(x+t/2, x−t/2)dt` sampled on the phase grid `[−L, L)²`.
///
/// Even offsets `t = 2rh` give midpoints on the grid and odd offsets give
/// midpoints halfway between grid points. Each parity alone aliases the
/// symbol with its copy shifted by `πħ/h` in `ξ`, with opposite signs, so the
/// average of the two is alias-free. The odd part is moved back onto the
/// grid with a spectral half-step shift in `x`. Offsets run over `|t| < L` and
/// pairs leaving the box are dropped.
pub fn symbol_from_operator(op: &OperatorMatrix) -> GridSymbol {
    let grid = op.grid;
    let n = grid.n;
    let h = grid.step();
    let spec = grid.phase_grid();
    let xis = spec.points();
    let quarter = (n / 4) as i64;
    let entry = |a: i64, b: i64| {
        if (0..n as i64).contains(&a) && (0..n as i64).contains(&b) {
            op.m[(a as usize, b as usize)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let mut even = DMatrix::<Complex64>::zeros(n, n);
    let mut odd = DMatrix::<Complex64>::zeros(n, n);
    // phase[d + N/2][j] = 2 e^{−iξ_j d h/ħ} for offsets d ∈ [−N/2, N/2).
    let phase: Vec<Vec<Complex64>> = (-2 * quarter..2 * quarter)
        .map(|d| xis.iter().map(|xi| Complex64::from_polar(2.0, -xi * d as f64 * h / grid.hbar)).collect())
        .collect();
    for i in 0..n as i64 {
        for r in -quarter..quarter {
            let e = entry(i + r, i - r);
            let o = entry(i + 1 + r, i - r);
            let pe = &phase[(2 * r + 2 * quarter) as usize];
            let po = &phase[(2 * r + 1 + 2 * quarter) as usize];
            for j in 0..n {
                even[(i as usize, j)] += e * pe[j];
                odd[(i as usize, j)] += o * po[j];
            }
        }
    }
    // odd[i] sits at x_i + h/2; shift each ξ-column by −h/2.
    let mut planner = FftPlanner::new();
    let (fwd, inv) = (planner.plan_fft_forward(n), planner.plan_fft_inverse(n));
    let half = (n / 2) as i64;
    let kappa = std::f64::consts::PI / grid.l;
    for j in 0..n {
        let mut col: Vec<Complex64> = (0..n).map(|i| odd[(i, j)]).collect();
        fwd.process(&mut col);
        for (idx, v) in col.iter_mut().enumerate() {
            let k = if (idx as i64) < half { idx as i64 } else { idx as i64 - n as i64 };
            *v *= if k == -half {
                c((kappa * k as f64 * h / 2.0).cos())
            } else {
                Complex64::from_polar(1.0, -kappa * k as f64 * h / 2.0)
            };
        }
        inv.process(&mut col);
        for i in 0..n {
            odd[(i, j)] = col[i] / n as f64;
        }
    }
    let samples = ndarray::Array2::from_shape_fn((n, n), |(i, j)| (even[(i, j)] + odd[(i, j)]) * 0.5);
    GridSymbol::new(spec, samples).expect("finite input gives finite symbol")
}

/// `T̂(Y) = e^{−(i/ħ)L̂_Y}`: `(T̂(Y)ψ)(x) = e^{−(i/ħ)η(x + y/2)} ψ(x + y)`, so that
/// `T̂(Y)^* x̂ T̂(Y) = x̂ − y` and `T̂(Y)^* p̂ T̂(Y) = p̂ − η`. The shift is spectral.
pub fn heisenberg_translation(y: (f64, f64), grid: &XGrid) -> Result<OperatorMatrix> {
    if y.0.abs() >= grid.l / 2.0 {
        return Err(MoyalError::InvalidArgument(format!(
            "translation by y = {} does not stay in the box |y| < L/2 = {}",
            y.0,
            grid.l / 2.0
        )));
    }
    let hb = grid.hbar;
    let shift = OperatorMatrix::fourier_multiplier(*grid, |p| Complex64::from_polar(1.0, p * y.0 / hb));
    let phase = OperatorMatrix::multiplication(*grid, |x| Complex64::from_polar(1.0, -y.1 * (x + y.0 / 2.0) / hb));
    Ok(phase.mul(&shift))
}

/// `φ_Y(x) = (πħ)^{−1/4} e^{iη(x − y/2)/ħ} e^{−(x−y)²/(2ħ)}`, centered at `Y`; equal to `T̂(Y)^*φ₀`.
pub fn coherent_state(y: (f64, f64), grid: &XGrid) -> WaveVector {
    let hb = grid.hbar;
    let norm = (std::f64::consts::PI * hb).powf(-0.25);
    WaveVector::from_fn(*grid, |x| {
        Complex64::from_polar(norm * (-(x - y.0).powi(2) / (2.0 * hb)).exp(), y.1 * (x - y.0 / 2.0) / hb)
    })
}

/// `⟨ψ, Mψ⟩` with the quadrature weight.
pub fn expectation(op: &OperatorMatrix, psi: &WaveVector) -> Complex64 {
    psi.inner(&op.apply(psi))
}

/// `(i/ħ)(ÂĤ − ĤÂ)`.
pub fn commutator_bracket(a: &SymbolEvaluator, h: &SymbolEvaluator, grid: &XGrid) -> OperatorMatrix {
    let (qa, _) = quantize_kernel(a, grid);
    let (qh, _) = quantize_kernel(h, grid);
    qa.bracket(&qh)
}

/// `Â = (2π)^{−2}∫Ã_σ(Y) T̂(Y)^* dY` at `ħ = 1`, with `Ã_σ` computed by
/// quadrature over the phase grid.
///
/// The test points run over `y = a h`, `η = b h` with `|a h|, |b h| ≤ y_max`, so
/// every translation moves by whole grid steps and the operator is assembled
/// from shifted diagonals: `M = Σ_y diag(g_y(x − y/2)) S_y` with
/// `g_y(s) = Σ_η Ã_σ(y, η) e^{iηs}`.
pub fn quantize_via_covariant(a: &SymbolEvaluator, grid: &XGrid, y_max: f64) -> Result<OperatorMatrix> {
    if grid.hbar != 1.0 {
        return Err(MoyalError::InvalidArgument("covariant quantization is implemented at hbar = 1".into()));
    }
    let n = grid.n;
    let h = grid.step();
    let pts = grid.points();
    let kmax = (y_max / h).floor() as i64;
    let ys: Vec<f64> = (-kmax..=kmax).map(|k| k as f64 * h).collect();
    let ny = ys.len();
    let samples = DMatrix::from_fn(n, n, |i, j| a.eval(pts[i], pts[j]));
    // Ã(y_a, η_b) = h² Σ_ij e^{−iη_b x_i} A_ij e^{i y_a ξ_j}.
    let e_eta = DMatrix::from_fn(ny, n, |b, i| Complex64::from_polar(1.0, -ys[b] * pts[i]));
    let e_y = DMatrix::from_fn(n, ny, |j, a| Complex64::from_polar(1.0, ys[a] * pts[j]));
    let tilde = (&e_eta * &samples * &e_y) * c(h * h);
    let weight = h * h / (2.0 * std::f64::consts::PI).powi(2);
    let mut m = DMatrix::zeros(n, n);
    for (a_idx, &y) in ys.iter().enumerate() {
        let shift = a_idx as i64 - kmax;
        for i in 0..n {
            let j = i as i64 - shift;
            if j < 0 || j >= n as i64 {
                continue;
            }
            let s = pts[i] - y / 2.0;
            let g: Complex64 = (0..ny).map(|b| tilde[(b, a_idx)] * Complex64::from_polar(1.0, ys[b] * s)).sum();
            m[(i, j as usize)] = g * weight;
        }
    }
    Ok(OperatorMatrix { grid: *grid, m })
}

/// Relative Hermiticity defect above which a Hamiltonian is rejected.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// `Â(t) = e^{−itĤ/ħ} Â e^{itĤ/ħ}`, the solution of `dÂ/dt = (i/ħ)[Â, Ĥ]`, via the
/// eigendecomposition of `Ĥ`.
pub fn heisenberg_evolve(a: &OperatorMatrix, h: &OperatorMatrix, t: f64) -> Result<OperatorMatrix> {
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(MoyalError::InvalidArgument(format!("Hamiltonian is not Hermitian (defect {defect:e})")));
    }
    let herm = (&h.m + h.m.adjoint()) * c(0.5);
    let eig = nalgebra::SymmetricEigen::new(herm);
    let hb = h.grid.hbar;
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&lam| Complex64::from_polar(1.0, -t * lam / hb)),
    );
    let v = &eig.eigenvectors;
    let u = v * DMatrix::from_diagonal(&phases) * v.adjoint();
    Ok(OperatorMatrix { grid: a.grid, m: &u * &a.m * u.adjoint() })
}

/// Ascending eigenvalues of the Hermitian part of `op`.
pub fn hermitian_eigenvalues(op: &OperatorMatrix) -> Vec<f64> {
    let herm = (&op.m + op.m.adjoint()) * c(0.5);
    let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Largest position grid `coherent_sweep` will build.
pub const MAX_SWEEP_N: usize = 2048;

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct CoherentRow {
    pub hbar: f64,
    pub n: usize,
    pub expectation: Complex64,
    pub symbol_value: Complex64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct CoherentSweep {
    pub rows: Vec<CoherentRow>,
    /// Fitted exponent of `ħ` in `|⟨φ_Y, Âφ_Y⟩ − A(Y)|`.
    pub slope: f64,
}

/// Smallest grid on `[−L, L)` (at least 64 points) whose momentum band
/// `πħN/(2L)` reaches `band`.
pub fn grid_for_band(l: f64, hbar: f64, band: f64) -> Result<XGrid> {
    let need = (2.0 * l * band / (std::f64::consts::PI * hbar)).ceil() as usize;
    let n = need.max(64).next_power_of_two();
    if n > MAX_SWEEP_N {
        return Err(MoyalError::InvalidArgument(format!(
            "hbar = {hbar} on a box of half-length {l} needs N = {n} > {MAX_SWEEP_N}"
        )));
    }
    XGrid::new(n, l, hbar)
}

/// `⟨φ_Y, Âφ_Y⟩` against `A(Y)` over a range of `ħ` on a fixed box, with `A`
/// windowed to width `L/8` when polynomial. The Wigner function of `φ_Y` is
/// concentrated within a few `√ħ` of `Y`, so each grid only resolves momenta
/// up to `|η| + 10√ħ`.
pub fn coherent_sweep(a: &SymbolEvaluator, y: (f64, f64), hbars: &[f64], l: f64) -> Result<CoherentSweep> {
    if hbars.len() < 2 {
        return Err(MoyalError::InvalidArgument("the sweep needs at least two values of hbar".into()));
    }
    if y.0.abs() >= l / 2.0 || y.1.abs() >= l / 2.0 {
        return Err(MoyalError::InvalidArgument(format!("Y = {y:?} is not in the interior of the box")));
    }
    let a = if a.is_polynomial() { a.windowed(l * WINDOW_FRACTION) } else { a.clone() };
    let symbol_value = a.eval(y.0, y.1);
    let mut rows = Vec::with_capacity(hbars.len());
    for &hbar in hbars {
        let grid = grid_for_band(l, hbar, y.1.abs() + 10.0 * hbar.sqrt())?;
        let (op, _) = quantize_kernel(&a, &grid);
        let expectation = expectation(&op, &coherent_state(y, &grid));
        rows.push(CoherentRow { hbar, n: grid.n, expectation, symbol_value, deviation: (expectation - symbol_value).norm() });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.hbar).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.deviation).collect();
    Ok(CoherentSweep { slope: crate::grid::loglog_slope(&xs, &ys), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{PolySymbol, Shape, Var};
    use crate::scalar::cint;
    use crate::symbol::poisson;

    fn grid(n: usize, l: f64, hbar: f64) -> XGrid {
        XGrid::new(n, l, hbar).unwrap()
    }

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn position_and_momentum() {
        let g = grid(64, 8.0, 1.0);
        let (x2, w) = quantize_kernel(&SymbolEvaluator::monomial(2, 0), &g);
        assert!(w.is_none());
        let diag = OperatorMatrix::multiplication(g, |x| c(x * x));
        assert!(max_abs(&(&x2.m - &diag.m)) < 1e-12);

        let hb = 0.7;
        let g = grid(64, 8.0, hb);
        let p = OperatorMatrix::fourier_multiplier(g, c);
        for k in [-5i64, 0, 3, 11] {
            let wave = WaveVector::from_fn(g, |x| Complex64::from_polar(1.0, std::f64::consts::PI * k as f64 * x / g.l));
            let pw = p.apply(&wave);
            let err = (&pw.values - &wave.values * c(g.momentum(k))).norm();
            assert!(err < 1e-8, "k = {k}: {err}");
        }
        // Weyl ordering: xξ ↦ (x̂p̂ + p̂x̂)/2.
        let x = OperatorMatrix::multiplication(g, c);
        let sym = x.mul(&p).add(&p.mul(&x)).scale(c(0.5));
        let xp = PolySymbol::monomial_in(Shape::phase(1), &[(Var::X(0), 1), (Var::Xi(0), 1)], cint(1)).unwrap();
        assert!(max_abs(&(&quantize_polynomial(&xp, &g).unwrap().m - &sym.m)) < 1e-12);

    }

    #[test]
    fn real_symbols_are_hermitian() {
        let g = grid(64, 8.0, 1.0);
        let a = SymbolEvaluator::monomial(2, 1).add(&SymbolEvaluator::monomial(0, 3)).windowed(1.0);
        let (q, w) = quantize_kernel(&a, &g);
        assert!(w.is_none());
        assert!(q.hermiticity_defect() < 1e-10);
    }

    #[test]
    fn nyquist_warning() {
        let g = grid(32, 4.0, 1.0);
        let (_, w) = quantize_kernel(&SymbolEvaluator::monomial(0, 1), &g);
        assert_eq!(w.unwrap().kind, "nyquist-tail");
    }

    #[test]
    fn symbol_round_trips() {
        let g = grid(128, 8.0, 1.0);
        let id = symbol_from_operator(&OperatorMatrix::identity(g));
        assert!(id.sub(&crate::grid::sample_unchecked(&SymbolEvaluator::constant(1.0), id.spec())).unwrap().sup() < 1e-12);
        let xs = symbol_from_operator(&OperatorMatrix::multiplication(g, c));
        assert!(xs.sub(&crate::grid::sample_unchecked(&SymbolEvaluator::monomial(1, 0), xs.spec())).unwrap().sup() < 1e-12);
        for a in [
            SymbolEvaluator::gaussian(1.0, (0.0, 0.0)),
            SymbolEvaluator::gaussian(0.7, (0.5, -1.0)).mul(&SymbolEvaluator::monomial(1, 2)),
        ] {
            let (q, _) = quantize_kernel(&a, &g);
            let back = symbol_from_operator(&q);
            let expect = crate::grid::sample_unchecked(&a, back.spec());
            let err = back.sub(&expect).unwrap().interior_sup();
            assert!(err < 1e-6, "{err}");
        }
    }

    #[test]
    fn translation_properties() {
        let g = grid(128, 10.0, 1.0);
        let t0 = heisenberg_translation((0.0, 0.0), &g).unwrap();
        assert!(max_abs(&(&t0.m - DMatrix::identity(128, 128))) < 1e-12);
        assert!(heisenberg_translation((6.0, 0.0), &g).is_err());

        let y = (1.0, 0.5);
        let t = heisenberg_translation(y, &g).unwrap();
        assert!(t.unitarity_defect() < 1e-8);
        let phi0 = coherent_state((0.0, 0.0), &g);
        let x = OperatorMatrix::multiplication(g, c);
        let p = OperatorMatrix::fourier_multiplier(g, c);
        for s in [0.5, 1.0, 2.0] {
            let ts = heisenberg_translation((s * y.0, s * y.1), &g).unwrap();
            let lhs = ts.adjoint().mul(&x).mul(&ts).apply(&phi0);
            let rhs = x.apply(&phi0).values - &phi0.values * c(s * y.0);
            assert!(lhs.interior_distance(&WaveVector { grid: g, values: rhs }) < 1e-6);
            let lhs = ts.adjoint().mul(&p).mul(&ts).apply(&phi0);
            let rhs = p.apply(&phi0).values - &phi0.values * c(s * y.1);
            assert!(lhs.interior_distance(&WaveVector { grid: g, values: rhs }) < 1e-6);
        }
        // φ_Y = T̂(Y)^*φ₀.
        let phi_y = coherent_state(y, &g);
        let moved = t.adjoint().apply(&phi0);
        assert!((moved.inner(&phi_y).norm() - 1.0).abs() < 1e-10);
        assert!(moved.interior_distance(&phi_y) < 1e-8);
    }

    #[test]
    fn group_law_up_to_phase() {
        let g = grid(128, 10.0, 1.0);
        let (y, z) = ((0.75, -0.5), (-1.25, 1.0));
        let ty = heisenberg_translation(y, &g).unwrap();
        let tz = heisenberg_translation(z, &g).unwrap();
        let tyz = heisenberg_translation((y.0 + z.0, y.1 + z.1), &g).unwrap();
        let prod = ty.mul(&tz);
        // T̂(Y)T̂(Z) = e^{(i/2ħ)σ(Y,Z)} T̂(Y+Z) with σ(Y,Z) = η_Y z − y η_Z; test on a
        // state supported in the interior.
        let sigma = y.1 * z.0 - y.0 * z.1;
        let phase = Complex64::from_polar(1.0, sigma / (2.0 * g.hbar));
        let phi = coherent_state((0.5, 0.0), &g);
        let lhs = prod.apply(&phi);
        let rhs = WaveVector { grid: g, values: tyz.apply(&phi).values * phase };
        assert!(lhs.interior_distance(&rhs) < 1e-6);
    }

    #[test]
    fn translation_is_the_quantized_exponential() {
        // With z a whole number of grid steps the kernel quantization of
        // e^{−iL_Z/ħ} and the spectral translation agree entry by entry.
        let g = grid(64, 8.0, 1.0);
        let z = (4.0 * g.step(), 0.3);
        let sym = SymbolEvaluator::plane_wave(-z.1 / g.hbar, z.0 / g.hbar);
        let (q, _) = quantize_kernel(&sym, &g);
        let t = heisenberg_translation(z, &g).unwrap();
        // The spectral shift wraps around the box; compare away from the corners.
        let n = g.n;
        let worst = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i.abs_diff(j) < n / 2)
            .map(|(i, j)| (q.m[(i, j)] - t.m[(i, j)]).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn coherent_state_moments() {
        for hbar in [0.25, 0.5, 1.0] {
            let g = grid(128, 8.0, hbar);
            let y = (1.0, 0.5);
            let phi = coherent_state(y, &g);
            assert!((phi.norm() - 1.0).abs() < 1e-10);
            let (x2, _) = quantize_kernel(&SymbolEvaluator::monomial(2, 0), &g);
            let v = expectation(&x2, &phi);
            assert!((v - c(y.0 * y.0 + hbar / 2.0)).norm() < 1e-6);
            let p = OperatorMatrix::fourier_multiplier(g, c);
            assert!((expectation(&p, &phi) - c(y.1)).norm() < 1e-8);
        }
    }

    #[test]
    fn linear_commutator_is_exact() {
        let g = grid(128, 8.0, 1.0);
        let a = SymbolEvaluator::gaussian(0.8, (0.5, -0.25));
        let lz = PolySymbol::monomial_in(Shape::phase(1), &[(Var::X(0), 1)], crate::scalar::crat(7, 10)).unwrap()
            + PolySymbol::monomial_in(Shape::phase(1), &[(Var::Xi(0), 1)], crate::scalar::crat(13, 10)).unwrap();
        let (qa, _) = quantize_kernel(&a, &g);
        let comm = qa.bracket(&quantize_polynomial(&lz, &g).unwrap());
        let (op, _) = quantize_kernel(&poisson(&a, &SymbolEvaluator::from_poly(&lz).unwrap()), &g);
        let rel = comm.relative_distance(&op);
        assert!(rel < 1e-6, "{rel}");
    }

    #[test]
    fn covariant_route_matches_kernel_route() {
        let g = grid(128, 12.0, 1.0);
        let a = SymbolEvaluator::gaussian(1.0, (0.0, 0.0));
        let cov = quantize_via_covariant(&a, &g, g.l).unwrap();
        let (ker, _) = quantize_kernel(&a, &g);
        let rel = cov.relative_distance(&ker);
        assert!(rel < 1e-5, "{rel}");
        assert!(quantize_via_covariant(&a, &grid(64, 8.0, 0.5), 4.0).is_err());
    }

    #[test]
    fn evolution_basics() {
        let g = grid(64, 8.0, 1.0);
        let (a, _) = quantize_kernel(&SymbolEvaluator::gaussian(0.5, (1.0, 0.0)), &g);
        let (h, _) = quantize_kernel(&SymbolEvaluator::monomial(2, 0).add(&SymbolEvaluator::monomial(0, 2)).scale(c(0.5)), &g);
        let a0 = heisenberg_evolve(&a, &h, 0.0).unwrap();
        assert!(max_abs(&(&a0.m - &a.m)) < 1e-10);
        let id = OperatorMatrix::identity(g);
        let a1 = heisenberg_evolve(&a, &id, 1.7).unwrap();
        assert!(max_abs(&(&a1.m - &a.m)) < 1e-10);
        let at = heisenberg_evolve(&a, &h, 0.9).unwrap();
        let (e0, e1) = (hermitian_eigenvalues(&a), hermitian_eigenvalues(&at));
        let worst = e0.iter().zip(&e1).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
        let bad = OperatorMatrix { grid: g, m: DMatrix::from_fn(64, 64, |i, j| c((i as f64) - 2.0 * j as f64)) };
        assert!(heisenberg_evolve(&a, &bad, 1.0).is_err());
    }

    #[test]
    fn coherent_limit_rate() {
        let a = SymbolEvaluator::monomial(3, 0);
        let sweep = coherent_sweep(&a, (1.0, 0.0), &[0.1, 0.05, 0.025, 0.0125], 12.0).unwrap();
        assert!(sweep.slope >= 0.9, "{sweep:?}");
        // The leading correction is (ħ/4)ΔA(Y).
        let w = SymbolEvaluator::monomial(3, 0).windowed(12.0 * WINDOW_FRACTION);
        let lap = w.partial(2, 0).add(&w.partial(0, 2)).eval(1.0, 0.0);
        let last = sweep.rows.last().unwrap();
        let predicted = lap * (last.hbar / 4.0);
        assert!(((last.expectation - last.symbol_value) - predicted).norm() < 0.05 * predicted.norm(), "{sweep:?}");
    }
}
