//! The reference test function, its exact expansions, and the cosine
//! periodization used to cross-check them.
//!
//! The 1-d building block `B_2` is a piecewise-quadratic B-spline cutout:
//! continuously differentiable, second derivative jumping at 0. Its
//! coefficients are known in closed form in both bases, which makes exact
//! `L2` errors computable for the multivariate tensor product
//! `f(x) = ∏_ℓ B_2(x_ℓ)`.

use crate::bases::{Basis, SQRT_2};
use crate::error::{Error, Result};
use crate::index_sets::MultiIndex;
use num_complex::Complex64;
use std::f64::consts::PI;

/// `B_2(x)`: `-x²/4 - x/2 + 1/2` on `[-1, 0]`, `x²/8 - x/2 + 1/2` on `(0, 1]`.
///
/// Both pieces agree in value and first derivative at 0; the boundary point
/// itself is assigned to the left piece.
pub fn bspline_b2(x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::OutOfDomain(x));
    }
    if x <= 0.0 {
        Ok(-x * x / 4.0 - x / 2.0 + 0.5)
    } else {
        Ok(x * x / 8.0 - x / 2.0 + 0.5)
    }
}

/// The multivariate test function `f(x) = ∏_ℓ B_2(x_ℓ)`.
pub fn test_function(x: &[f64]) -> Result<f64> {
    let mut product = 1.0;
    for &xi in x {
        product *= bspline_b2(xi)?;
    }
    Ok(product)
}

/// `sin(k π / 2)` exactly: the cycle `0, 1, 0, -1`.
fn sin_half_pi(k: u32) -> f64 {
    match k % 4 {
        1 => 1.0,
        3 => -1.0,
        _ => 0.0,
    }
}

/// Coefficient of `B_2` against the orthonormal Chebyshev polynomial `T_k`.
///
/// Closed form: `15/32` for `k = 0`, `-(π-1)/(2π√2)` for `k = 1`,
/// `-1/(32√2)` for `k = 2`, and `-(3/(2π√2)) sin(kπ/2) / (k(k²-4))` for
/// `k ≥ 3` (zero at even `k`).
pub fn b2_cheb_coeff(k: u32) -> f64 {
    match k {
        0 => 15.0 / 32.0,
        1 => -(PI - 1.0) / (2.0 * PI * SQRT_2),
        2 => -1.0 / (32.0 * SQRT_2),
        _ => {
            let kf = k as f64;
            -(3.0 / (2.0 * PI * SQRT_2)) * sin_half_pi(k) / (kf * (kf * kf - 4.0))
        }
    }
}

/// Coefficient of `B_2` against the half-period cosine `V_k`.
///
/// Closed form: `23/(24√2)` for `k = 0` and
/// `6 sin(πk/2)/(π³k³) - (-1)^k/(π²k²)` for `k ≥ 1`.
pub fn b2_hpc_coeff(k: u32) -> f64 {
    if k == 0 {
        return 23.0 / (24.0 * SQRT_2);
    }
    let kf = k as f64;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    6.0 * sin_half_pi(k) / (PI.powi(3) * kf.powi(3)) - sign / (PI * PI * kf * kf)
}

/// Exact expansion coefficients of the tensor test function in one basis.
///
/// `f` is a tensor product, so its coefficient at a multi-index is the
/// product of the 1-d coefficients.
#[derive(Debug, Clone, Copy)]
pub struct CoefficientOracle {
    basis: Basis,
}

impl CoefficientOracle {
    /// Oracle for `f(x) = ∏ B_2(x_ℓ)` in the given basis.
    pub fn b2_tensor(basis: Basis) -> Self {
        CoefficientOracle { basis }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// 1-d coefficient of `B_2` at frequency `k`.
    pub fn coeff_1d(&self, k: u32) -> f64 {
        match self.basis {
            Basis::Chebyshev => b2_cheb_coeff(k),
            Basis::HalfPeriodCosine => b2_hpc_coeff(k),
        }
    }

    /// Tensor coefficient `∏_ℓ coeff_1d(k_ℓ)`.
    pub fn tensor_coeff(&self, k: &MultiIndex) -> f64 {
        k.entries().iter().map(|&ki| self.coeff_1d(ki)).product()
    }

    /// Squared 1-d norm `Σ_{k ≤ cutoff} coeff(k)²` plus a bound on the
    /// dropped tail.
    ///
    /// Chebyshev coefficients decay like `k^{-3}` and half-period cosine
    /// ones like `k^{-2}`, so the squared-tail bounds are `c²/(5 K⁵)` and
    /// `c²/(3 K³)` respectively; at the default cutoff both are far below
    /// anything resolvable in `f64`.
    pub fn norm_1d_squared(&self, cutoff: u32) -> (f64, f64) {
        let sum: f64 = (0..=cutoff).map(|k| self.coeff_1d(k).powi(2)).sum();
        let kf = cutoff as f64;
        let tail = match self.basis {
            Basis::Chebyshev => {
                let c = 3.0 / (2.0 * PI * SQRT_2);
                c * c / (5.0 * kf.powi(5))
            }
            Basis::HalfPeriodCosine => {
                let c = 1.0 / (PI * PI) + 6.0 / PI.powi(3);
                c * c / (3.0 * kf.powi(3))
            }
        };
        (sum, tail)
    }
}

/// Wraps `f` on `[-1,1]^d` into the even, 2-periodic composition
/// `g(x) = f(cos(π x_1), ..., cos(π x_d))`.
pub fn periodize_cos<F>(f: F, dim: usize) -> impl Fn(&[f64]) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    move |x: &[f64]| {
        debug_assert_eq!(x.len(), dim);
        let mapped: Vec<f64> = x.iter().map(|&xi| (PI * xi).cos()).collect();
        f(&mapped)
    }
}

/// Fourier coefficient `ĝ_k = 2^{-d} ∫_{T^d} g(x) e^{-π i k·x} dx` of a
/// 2-periodic function, by the tensor equispaced (periodic trapezoid) rule
/// with `grid` points per dimension.
///
/// Exact for trigonometric polynomials below the aliasing limit and
/// spectrally accurate for smooth `g`; the grid must satisfy
/// `grid ≥ 4 max|k_ℓ| + 4`.
pub fn fourier_coeff<G>(g: G, k: &[i64], grid: usize) -> Result<Complex64>
where
    G: Fn(&[f64]) -> f64,
{
    let dim = k.len();
    if dim == 0 {
        return Err(Error::InvalidDimension);
    }
    for &ki in k {
        let required = 4 * ki.unsigned_abs() as usize + 4;
        if grid < required {
            return Err(Error::GridTooCoarse {
                grid,
                frequency: ki,
                required,
            });
        }
    }
    // points x_j = -1 + 2j/grid per dimension; the mean over the grid equals
    // 2^{-d} times the integral for periodic integrands
    let mut sum = Complex64::new(0.0, 0.0);
    let total = grid.pow(dim as u32);
    let mut point = vec![0.0f64; dim];
    for flat in 0..total {
        let mut rest = flat;
        let mut phase = 0.0;
        for l in 0..dim {
            let j = rest % grid;
            rest /= grid;
            point[l] = -1.0 + 2.0 * j as f64 / grid as f64;
            phase -= PI * k[l] as f64 * point[l];
        }
        sum += Complex64::from_polar(g(&point), phase);
    }
    Ok(sum / total as f64)
}

/// Quadrature rules used as independent oracles for inner products.
pub mod quadrature {
    /// Gauss–Chebyshev approximation of `∫ f g dρ` for the normalized
    /// Chebyshev measure `ρ`: nodes `cos((2i+1)π/(2N))`, equal weights `1/N`.
    ///
    /// The rule absorbs the arcsine weight exactly and integrates
    /// polynomials of degree `< 2N` exactly.
    pub fn gauss_chebyshev_inner<F, G>(f: F, g: G, nodes: usize) -> f64
    where
        F: Fn(f64) -> f64,
        G: Fn(f64) -> f64,
    {
        let n = nodes as f64;
        (0..nodes)
            .map(|i| {
                let x = (std::f64::consts::PI * (2.0 * i as f64 + 1.0) / (2.0 * n)).cos();
                f(x) * g(x)
            })
            .sum::<f64>()
            / n
    }

    // 20-point Gauss-Legendre rule on [-1, 1], nodes/weights from Newton
    // iteration on the Legendre recurrence (computed once, cached).
    fn gauss_legendre_20() -> &'static [(f64, f64); 20] {
        use std::sync::OnceLock;
        static RULE: OnceLock<[(f64, f64); 20]> = OnceLock::new();
        RULE.get_or_init(|| {
            let n = 20usize;
            let mut rule = [(0.0, 0.0); 20];
            for i in 0..n {
                // Chebyshev-angle initial guess, then Newton on P_n
                let mut x =
                    (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                for _ in 0..100 {
                    let (p, dp) = legendre_with_derivative(n, x);
                    let step = p / dp;
                    x -= step;
                    if step.abs() < 1e-16 {
                        break;
                    }
                }
                let (_, dp) = legendre_with_derivative(n, x);
                rule[i] = (x, 2.0 / ((1.0 - x * x) * dp * dp));
            }
            rule
        })
    }

    fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
        let mut p0 = 1.0f64;
        let mut p1 = x;
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        (p1, dp)
    }

    /// Composite 20-point Gauss–Legendre integration of `f` over `[a, b]`
    /// split into `panels` equal panels.
    pub fn integrate_legendre<F>(f: F, a: f64, b: f64, panels: usize) -> f64
    where
        F: Fn(f64) -> f64,
    {
        let rule = gauss_legendre_20();
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let left = a + p as f64 * h;
            let mid = left + h / 2.0;
            let half = h / 2.0;
            total += rule
                .iter()
                .map(|&(x, w)| w * f(mid + half * x))
                .sum::<f64>()
                * half;
        }
        total
    }

    /// `∫_{-1}^{1} f(x) g(x) dx` with the kink at 0 on a panel boundary, so
    /// piecewise-smooth integrands like `B_2 · V_k` converge at full order.
    pub fn lebesgue_inner<F, G>(f: F, g: G, panels_per_half: usize) -> f64
    where
        F: Fn(f64) -> f64,
        G: Fn(f64) -> f64,
    {
        integrate_legendre(|x| f(x) * g(x), -1.0, 0.0, panels_per_half)
            + integrate_legendre(|x| f(x) * g(x), 0.0, 1.0, panels_per_half)
    }
}
