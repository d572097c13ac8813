//! Least-squares coefficient fitting and `L2` error measurement.
//!
//! The fit solves the overdetermined system `[basis_k(x^i)] c ≈ f(x^i)` by
//! QR factorization (never the normal equations: subsampled node sets can
//! have smallest singular values of the order 1e-2, and squaring the
//! condition is avoidable at this scale). Errors come in two independent
//! flavors: a Parseval evaluation in coefficient space against an exact
//! expansion, and a plain Monte Carlo estimate; the two cross-check each
//! other.

use crate::bases::{point_tables, product_from_tables, Basis, DesignMatrix};
use crate::error::{Error, Result};
use crate::index_sets::MultiIndexSet;
use crate::reference_problems::CoefficientOracle;
use crate::sampling::{draw_chebyshev, draw_uniform, NodeSet};
use ndarray::Array1;
use ndarray_linalg::{SolveTriangular, QR, UPLO};
use rayon::prelude::*;

/// Normalized singular values below this refuse to fit (no regularization).
pub const RANK_THRESHOLD: f64 = 1e-10;

/// Default per-dimension cutoff for the exact-series norm in Parseval errors.
pub const DEFAULT_TAIL_CUTOFF: u32 = 100_000;

/// A fitted expansion `Σ_{k∈Λ} c_k basis_k`.
#[derive(Debug, Clone)]
pub struct Approximant {
    indices: MultiIndexSet,
    coefficients: Vec<f64>,
    basis: Basis,
}

impl Approximant {
    pub fn new(indices: MultiIndexSet, coefficients: Vec<f64>, basis: Basis) -> Result<Self> {
        if coefficients.len() != indices.len() {
            return Err(Error::DimensionMismatch {
                expected: indices.len(),
                found: coefficients.len(),
            });
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Linalg("non-finite coefficient".into()));
        }
        Ok(Approximant {
            indices,
            coefficients,
            basis,
        })
    }

    pub fn indices(&self) -> &MultiIndexSet {
        &self.indices
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// Evaluates `Σ_k c_k basis_k(x)`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.indices.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.indices.dim(),
                found: x.len(),
            });
        }
        for &xi in x {
            if !(-1.0..=1.0).contains(&xi) {
                return Err(Error::OutOfDomain(xi));
            }
        }
        let kmax = self.indices.max_components();
        let tables = point_tables(self.basis, x, &kmax);
        Ok(self
            .indices
            .iter()
            .zip(&self.coefficients)
            .map(|(k, &c)| c * product_from_tables(&tables, k))
            .sum())
    }
}

/// Result of a least-squares fit, with conditioning metadata.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub approximant: Approximant,
    /// Euclidean norm of the residual `‖L c - y‖₂`.
    pub residual_norm: f64,
    /// Smallest singular value of the normalized design matrix.
    pub min_singular_value: f64,
}

/// Fits coefficients on `indices` to the samples by QR least squares.
///
/// Requires at least `m` nodes and a normalized design matrix with smallest
/// singular value above [`RANK_THRESHOLD`].
pub fn least_squares_fit(
    nodes: &NodeSet,
    samples: &[f64],
    indices: &MultiIndexSet,
    basis: Basis,
) -> Result<FitResult> {
    if samples.len() != nodes.len() {
        return Err(Error::DimensionMismatch {
            expected: nodes.len(),
            found: samples.len(),
        });
    }
    if nodes.len() < indices.len() {
        return Err(Error::Underdetermined {
            rows: nodes.len(),
            cols: indices.len(),
        });
    }
    let design = crate::bases::design_matrix(nodes, indices, basis, false)?;
    fit_design(&design, samples, indices.clone())
}

/// Fit against a precomputed unnormalized design matrix.
pub fn fit_design(
    design: &DesignMatrix,
    samples: &[f64],
    indices: MultiIndexSet,
) -> Result<FitResult> {
    if design.is_normalized() {
        return Err(Error::NormalizationMismatch {
            expected_normalized: false,
        });
    }
    let n = design.rows();
    let sigma_min = {
        let normalized = design.values() / (n as f64).sqrt();
        let s = crate::linalg::singular_values(&normalized)?;
        s[s.len() - 1]
    };
    if sigma_min <= RANK_THRESHOLD {
        return Err(Error::RankDeficient {
            sigma_min,
            threshold: RANK_THRESHOLD,
        });
    }

    let rhs = Array1::from(samples.to_vec());
    let (q, r) = design.values().qr()?;
    let coefficients = r.solve_triangular(UPLO::Upper, ndarray_linalg::Diag::NonUnit, &q.t().dot(&rhs))?;
    let residual = design.values().dot(&coefficients) - &rhs;
    let residual_norm = residual.dot(&residual).sqrt();

    Ok(FitResult {
        approximant: Approximant::new(indices, coefficients.to_vec(), design.basis())?,
        residual_norm,
        min_singular_value: sigma_min,
    })
}

/// Which norm an error value refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMeasure {
    /// `L2` of the Chebyshev (arcsine) measure.
    ChebyshevWeighted,
    /// `L2` of the Lebesgue measure on `[-1,1]^d`.
    Lebesgue,
}

impl ErrorMeasure {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorMeasure::ChebyshevWeighted => "l2-chebyshev",
            ErrorMeasure::Lebesgue => "l2-lebesgue",
        }
    }

    /// The measure in which a basis is orthonormal.
    pub fn for_basis(basis: Basis) -> Self {
        match basis {
            Basis::Chebyshev => ErrorMeasure::ChebyshevWeighted,
            Basis::HalfPeriodCosine => ErrorMeasure::Lebesgue,
        }
    }
}

/// How an error value was computed, with method metadata.
#[derive(Debug, Clone, Copy)]
pub enum ErrorMethod {
    Parseval {
        /// Per-dimension cutoff of the exact coefficient series.
        tail_cutoff: u32,
        /// Bound on the part of the squared norm dropped by the cutoff.
        truncation_bound: f64,
    },
    MonteCarlo {
        points: usize,
        seed: u64,
        /// Standard error of the reported value (delta method).
        standard_error: f64,
    },
}

impl ErrorMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorMethod::Parseval { .. } => "parseval",
            ErrorMethod::MonteCarlo { .. } => "montecarlo",
        }
    }
}

/// An `L2` error value together with how it was measured.
#[derive(Debug, Clone, Copy)]
pub struct ErrorReport {
    pub value: f64,
    pub method: ErrorMethod,
    pub measure: ErrorMeasure,
}

/// Exact `L2` error through coefficient space.
///
/// With an orthonormal basis, `‖f - Σ c_k basis_k‖² = Σ_{k∈Λ} (c_k - f̂_k)²
/// + (‖f‖² - Σ_{k∈Λ} f̂_k²)`: in-set coefficient mismatch plus out-of-set
/// tail energy. The norm `‖f‖²` comes from the tensorized 1-d coefficient
/// series truncated at `tail_cutoff` per dimension.
pub fn l2_error_parseval(
    oracle: &CoefficientOracle,
    approx: &Approximant,
    tail_cutoff: u32,
) -> Result<ErrorReport> {
    if oracle.basis() != approx.basis() {
        return Err(Error::BasisMismatch {
            oracle: oracle.basis().as_str(),
            approximant: approx.basis().as_str(),
        });
    }
    let dim = approx.indices().dim() as i32;
    let (norm_1d, tail_1d) = oracle.norm_1d_squared(tail_cutoff);
    let norm_sq = norm_1d.powi(dim);
    // d-fold product tail: (a+t)^d - a^d <= d t (a+t)^{d-1}
    let truncation_bound = dim as f64 * tail_1d * (norm_1d + tail_1d).powi(dim - 1);

    let mut in_set_mismatch = 0.0;
    let mut in_set_energy = 0.0;
    for (k, &c) in approx.indices().iter().zip(approx.coefficients()) {
        let exact = oracle.tensor_coeff(k);
        in_set_mismatch += (c - exact) * (c - exact);
        in_set_energy += exact * exact;
    }
    let value_sq = in_set_mismatch + (norm_sq - in_set_energy);
    Ok(ErrorReport {
        value: value_sq.max(0.0).sqrt(),
        method: ErrorMethod::Parseval {
            tail_cutoff,
            truncation_bound,
        },
        measure: ErrorMeasure::for_basis(approx.basis()),
    })
}

/// Monte Carlo `L2` error estimate from `points` independent draws.
///
/// For the Chebyshev-weighted norm the draws follow the Chebyshev measure
/// (a probability measure, no volume factor); for the Lebesgue norm they are
/// uniform and the mean square is scaled by the volume `2^d`. Sampling is
/// split into fixed-size chunks on independent generator substreams, so the
/// result does not depend on thread scheduling.
pub fn l2_error_montecarlo<F>(
    f: F,
    approx: &Approximant,
    measure: ErrorMeasure,
    points: usize,
    seed: u64,
) -> Result<ErrorReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if points < 100 {
        return Err(Error::TooFewMcPoints(points));
    }
    let dim = approx.indices().dim();
    let kmax = approx.indices().max_components();
    let volume = match measure {
        ErrorMeasure::ChebyshevWeighted => 1.0,
        ErrorMeasure::Lebesgue => 2.0f64.powi(dim as i32),
    };

    const CHUNK: usize = 16_384;
    let chunks: Vec<(usize, usize)> = (0..points.div_ceil(CHUNK))
        .map(|c| (c, (points - c * CHUNK).min(CHUNK)))
        .collect();

    // per-chunk sums of Z = volume * (f - approx)^2 and of Z^2
    let partials: Result<Vec<(f64, f64)>> = chunks
        .par_iter()
        .map(|&(chunk_id, size)| {
            let draw = match measure {
                ErrorMeasure::ChebyshevWeighted => draw_chebyshev,
                ErrorMeasure::Lebesgue => draw_uniform,
            };
            let nodes = draw(dim, size, seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(chunk_id as u64 + 1)))?;
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for x in nodes.points() {
                let tables = point_tables(approx.basis(), x, &kmax);
                let fitted: f64 = approx
                    .indices()
                    .iter()
                    .zip(approx.coefficients())
                    .map(|(k, &c)| c * product_from_tables(&tables, k))
                    .sum();
                let z = volume * (f(x) - fitted).powi(2);
                sum += z;
                sum_sq += z * z;
            }
            Ok((sum, sum_sq))
        })
        .collect();
    let partials = partials?;
    let sum: f64 = partials.iter().map(|p| p.0).sum();
    let sum_sq: f64 = partials.iter().map(|p| p.1).sum();

    let n = points as f64;
    let mean = sum / n;
    let variance = (sum_sq / n - mean * mean).max(0.0);
    let se_mean = (variance / n).sqrt();
    let value = mean.max(0.0).sqrt();
    // delta method: se(sqrt(mean)) = se(mean) / (2 sqrt(mean))
    let standard_error = if value > 0.0 {
        se_mean / (2.0 * value)
    } else {
        se_mean.sqrt()
    };

    Ok(ErrorReport {
        value,
        method: ErrorMethod::MonteCarlo {
            points,
            seed,
            standard_error,
        },
        measure,
    })
}
