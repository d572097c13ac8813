//! Least-squares recovery of non-periodic multivariate functions on `[-1, 1]^d`
//! from a small number of random samples.
//!
//! The pipeline has four stages:
//!
//! 1. Enumerate a hyperbolic cross `Λ_{d,R}` of frequency multi-indices
//!    ([`index_sets`]) and fix a tensor-product basis on it ([`bases`]):
//!    either Chebyshev polynomials (orthonormal for the Chebyshev measure)
//!    or half-period cosines (orthonormal for the Lebesgue measure).
//! 2. Draw `M = ⌈4m log m⌉` random nodes from the matching measure
//!    ([`sampling`]).
//! 3. Select `n ≤ ⌈bm⌉` of those nodes with a spectral-sparsification greedy
//!    that provably preserves the lower frame bound ([`subsampling`]).
//! 4. Fit basis coefficients by plain least squares on the selected nodes and
//!    measure the `L2` error against an exact coefficient expansion
//!    ([`recovery`], [`reference_problems`]).
//!
//! [`experiments`] orchestrates full sweeps over the cross radius and fits
//! empirical error decay rates; the `chebycross` binary exposes every stage
//! as a CLI subcommand.
//!
//! ```
//! use chebycross::index_sets::MultiIndexSet;
//! use chebycross::sampling::{draw_chebyshev, oversampled_budget};
//!
//! let cross = MultiIndexSet::hyperbolic_cross(2, 20).unwrap();
//! assert_eq!(cross.len(), 107);
//! let budget = oversampled_budget(cross.len()).unwrap();
//! assert_eq!(budget, 2000);
//! let nodes = draw_chebyshev(2, budget, 7).unwrap();
//! assert_eq!(nodes.len(), 2000);
//! ```

pub mod bases;
pub mod error;
pub mod experiments;
pub mod index_sets;
pub(crate) mod linalg;
pub mod recovery;
pub mod reference_problems;
pub mod sampling;
pub mod subsampling;

pub use error::{Error, Result};
