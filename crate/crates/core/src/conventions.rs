//! Sign and normalization conventions shared by every module, as data.

use serde::Serialize;

/// The convention table attached to every machine-readable result.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Conventions {
    pub poisson_bracket: &'static str,
    pub symplectic_form: &'static str,
    pub linear_form: &'static str,
    pub star_expansion: &'static str,
    pub moyal_bracket: &'static str,
    pub exponential: &'static str,
    pub translation_operator: &'static str,
    pub coherent_state: &'static str,
    pub heisenberg_evolution: &'static str,
    pub classical_flow: &'static str,
    pub covariant_quantization: &'static str,
    pub fourier_grid: &'static str,
}

pub const CONVENTIONS: Conventions = Conventions {
    poisson_bracket: "{A,B} = d_xi A . d_x B - d_x A . d_xi B, so {x,xi} = -1",
    symplectic_form: "sigma(Y,X) = eta.x - y.xi",
    linear_form: "L_Y(X) = sigma(Y,X) = eta.x - y.xi",
    star_expansion: "A*B = sum_j hbar^j C_j(A,B), C_j = (i/2)^j/j! (d_x^A d_xi^B - d_xi^A d_x^B)^j; x*xi = x xi + i hbar/2",
    moyal_bracket: "{A,B}_* = (i/hbar)(A*B - B*A) = {A,B} + O(hbar^2)",
    exponential: "T_Y = exp(-i L_Y); T_Y*H = T_Y H(X + hbar Y/2), H*T_Y = T_Y H(X - hbar Y/2)",
    translation_operator: "T(Y) = exp(-(i/hbar) L(Y)^), (T(Y)psi)(x) = exp(-(i/hbar) eta (x + y/2)) psi(x + y); T(Y)^* x^ T(Y) = x^ - y",
    coherent_state: "phi_Y(x) = (pi hbar)^(-1/4) exp(i eta (x - y/2)/hbar) exp(-(x - y)^2/(2 hbar)) = T(Y)^* phi_0",
    heisenberg_evolution: "A(t) = exp(-i t H^/hbar) A^ exp(i t H^/hbar), dA/dt = (i/hbar)[A^, H^]",
    classical_flow: "dx/dt = -d_xi H, dxi/dt = d_x H, so d(A o Phi_t)/dt = {A,H} o Phi_t",
    covariant_quantization: "A^ = (2 pi)^(-2d) int A~_sigma(Y) T(Y)^* dY at hbar = 1",
    fourier_grid: "x_i = -L + i h, h = 2L/N, modes k in [-N/2, N/2), wave number pi k / L",
};
