//! Tensor-product basis functions and design matrices.
//!
//! Two orthonormal families on `[-1, 1]`:
//!
//! * Chebyshev polynomials `T_k(x) = √2^{min{1,k}} cos(k arccos x)`,
//!   orthonormal for the Chebyshev (arcsine) measure;
//! * half-period cosines `V_k(x) = √2^{-δ_{0,k}} cos(π k (x+1)/2)`,
//!   orthonormal for the Lebesgue measure.
//!
//! Multivariate bases are coordinate-wise products. Evaluation goes through
//! the cosine form directly (one `arccos` per coordinate, one `cos` per
//! frequency), which is stable on the whole interval including the endpoints;
//! the three-term recurrence only appears in tests as an oracle.

use crate::error::{Error, Result};
use crate::index_sets::{MultiIndex, MultiIndexSet};
use crate::sampling::NodeSet;
use ndarray::Array2;
use rayon::prelude::*;

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Which 1-d family the tensor basis is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Orthonormal in `L2` of the Chebyshev measure.
    Chebyshev,
    /// Orthonormal in `L2` of the Lebesgue measure.
    HalfPeriodCosine,
}

impl Basis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Basis::Chebyshev => "chebyshev",
            Basis::HalfPeriodCosine => "half-period-cosine",
        }
    }

    /// Short token used in CSV columns and CLI flags.
    pub fn code(&self) -> &'static str {
        match self {
            Basis::Chebyshev => "cheb",
            Basis::HalfPeriodCosine => "hpc",
        }
    }

    pub fn from_code(code: &str) -> crate::error::Result<Self> {
        match code {
            "cheb" => Ok(Basis::Chebyshev),
            "hpc" => Ok(Basis::HalfPeriodCosine),
            other => Err(crate::error::Error::InvalidConfig(format!(
                "unknown basis `{other}` (expected cheb or hpc)"
            ))),
        }
    }
}

fn check_domain(x: f64) -> Result<f64> {
    if (-1.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(Error::OutOfDomain(x))
    }
}

/// `T_k(x) = √2^{min{1,k}} cos(k arccos x)`.
pub fn cheb_1d(k: u32, x: f64) -> Result<f64> {
    check_domain(x)?;
    let theta = x.acos();
    let scale = if k == 0 { 1.0 } else { SQRT_2 };
    Ok(scale * (k as f64 * theta).cos())
}

/// `V_k(x) = √2^{-δ_{0,k}} cos(π k (x+1)/2)`.
pub fn hpc_1d(k: u32, x: f64) -> Result<f64> {
    check_domain(x)?;
    if k == 0 {
        return Ok(std::f64::consts::FRAC_1_SQRT_2);
    }
    Ok((std::f64::consts::PI * k as f64 * (x + 1.0) / 2.0).cos())
}

fn tensor_eval(
    one_d: impl Fn(u32, f64) -> Result<f64>,
    k: &MultiIndex,
    x: &[f64],
) -> Result<f64> {
    if k.dim() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: k.dim(),
            found: x.len(),
        });
    }
    let mut product = 1.0;
    for (&ki, &xi) in k.entries().iter().zip(x) {
        product *= one_d(ki, xi)?;
    }
    Ok(product)
}

/// `η_k(x) = ∏_ℓ T_{k_ℓ}(x_ℓ)`.
pub fn cheb_tensor(k: &MultiIndex, x: &[f64]) -> Result<f64> {
    tensor_eval(cheb_1d, k, x)
}

/// `ψ_k(x) = ∏_ℓ V_{k_ℓ}(x_ℓ)`.
pub fn hpc_tensor(k: &MultiIndex, x: &[f64]) -> Result<f64> {
    tensor_eval(hpc_1d, k, x)
}

/// Evaluates the tensor basis function for `basis` at one point.
pub fn tensor_basis(basis: Basis, k: &MultiIndex, x: &[f64]) -> Result<f64> {
    match basis {
        Basis::Chebyshev => cheb_tensor(k, x),
        Basis::HalfPeriodCosine => hpc_tensor(k, x),
    }
}

/// Per-coordinate table of 1-d basis values `basis_k(x_ℓ)` for `k = 0..=kmax_ℓ`.
///
/// One `arccos` per coordinate, then one cosine per table entry; products of
/// table lookups reproduce the tensor values exactly (same floating
/// operations as the direct formula).
pub(crate) fn point_tables(basis: Basis, x: &[f64], kmax: &[u32]) -> Vec<Vec<f64>> {
    debug_assert_eq!(x.len(), kmax.len());
    x.iter()
        .zip(kmax)
        .map(|(&xi, &km)| match basis {
            Basis::Chebyshev => {
                let theta = xi.acos();
                (0..=km)
                    .map(|k| {
                        let scale = if k == 0 { 1.0 } else { SQRT_2 };
                        scale * (k as f64 * theta).cos()
                    })
                    .collect()
            }
            Basis::HalfPeriodCosine => {
                let half = std::f64::consts::PI * (xi + 1.0) / 2.0;
                (0..=km)
                    .map(|k| {
                        if k == 0 {
                            std::f64::consts::FRAC_1_SQRT_2
                        } else {
                            (k as f64 * half).cos()
                        }
                    })
                    .collect()
            }
        })
        .collect()
}

pub(crate) fn product_from_tables(tables: &[Vec<f64>], k: &MultiIndex) -> f64 {
    k.entries()
        .iter()
        .enumerate()
        .map(|(l, &ki)| tables[l][ki as usize])
        .product()
}

/// Evaluation matrix `[basis_k(x^i)]` of a node set against an index set.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    values: Array2<f64>,
    basis: Basis,
    normalized: bool,
}

impl DesignMatrix {
    /// Wraps an existing value matrix. Only for callers that assemble the
    /// entries themselves (tests, loaders); [`design_matrix`] is the normal
    /// route.
    pub fn from_parts(values: Array2<f64>, basis: Basis, normalized: bool) -> Self {
        DesignMatrix {
            values,
            basis,
            normalized,
        }
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// True when entries carry the `(#nodes)^{-1/2}` scaling.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }
}

/// Assembles the design matrix with entry `(i, j) = basis_{k_j}(x^i)`.
///
/// Row order follows the node set, column order the index set. With
/// `normalized` the entries are scaled by `(#nodes)^{-1/2}`, matching the
/// matrix whose extreme singular values are the frame bounds.
pub fn design_matrix(
    nodes: &NodeSet,
    indices: &MultiIndexSet,
    basis: Basis,
    normalized: bool,
) -> Result<DesignMatrix> {
    if nodes.dim() != indices.dim() {
        return Err(Error::DimensionMismatch {
            expected: indices.dim(),
            found: nodes.dim(),
        });
    }
    let n = nodes.len();
    let m = indices.len();
    let kmax = indices.max_components();
    let scale = if normalized {
        1.0 / (n as f64).sqrt()
    } else {
        1.0
    };

    let mut values = Array2::zeros((n, m));
    values
        .outer_iter_mut()
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            let tables = point_tables(basis, nodes.point(i), &kmax);
            for (j, k) in indices.iter().enumerate() {
                row[j] = scale * product_from_tables(&tables, k);
            }
        });

    Ok(DesignMatrix {
        values,
        basis,
        normalized,
    })
}
