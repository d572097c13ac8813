//! Seeded random node sets on `[-1, 1]^d`.
//!
//! Chebyshev-distributed nodes are drawn by the pushforward construction: if
//! `U` is uniform on `[-1, 1]` then `cos(π U)` follows the Chebyshev (arcsine)
//! measure `(π √(1-x²))^{-1} dx`. [`draw_chebyshev`] literally applies
//! `cos(π ·)` to the output of [`draw_uniform`], so the two samplers are
//! coupled coordinate by coordinate for equal seeds.

use crate::error::{Error, Result};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The probability measure a node set was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// Product arcsine measure `∏ (π √(1-x_ℓ²))^{-1} dx`.
    Chebyshev,
    /// Uniform (normalized Lebesgue) measure on `[-1, 1]^d`.
    Uniform,
}

impl Measure {
    pub fn as_str(&self) -> &'static str {
        match self {
            Measure::Chebyshev => "chebyshev",
            Measure::Uniform => "uniform",
        }
    }
}

/// Provenance of a node set produced by subsampling a larger one.
#[derive(Debug, Clone)]
pub struct ParentInfo {
    /// Size of the parent node set.
    pub size: usize,
    /// Row indices into the parent, ascending.
    pub indices: Vec<usize>,
}

/// A finite set of points in `[-1, 1]^d`, stored row-major in draw order.
#[derive(Debug, Clone)]
pub struct NodeSet {
    dim: usize,
    coords: Vec<f64>,
    measure: Measure,
    seed: Option<u64>,
    parent: Option<ParentInfo>,
}

impl NodeSet {
    /// Wraps existing coordinates (row-major, `len = n * dim`), validating the
    /// domain. Used by the CSV loader; freshly drawn sets come from
    /// [`draw_chebyshev`] / [`draw_uniform`].
    pub fn from_coords(dim: usize, coords: Vec<f64>, measure: Measure) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension);
        }
        if coords.is_empty() || coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        for &c in &coords {
            if !(-1.0..=1.0).contains(&c) {
                return Err(Error::OutOfDomain(c));
            }
        }
        Ok(NodeSet {
            dim,
            coords,
            measure,
            seed: None,
            parent: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    /// Seed used to draw this set; `None` for sets loaded from disk.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn parent(&self) -> Option<&ParentInfo> {
        self.parent.as_ref()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Extracts the points at `indices`, order-preserving, and records the
    /// provenance.
    pub fn subset(&self, indices: &[usize]) -> Result<NodeSet> {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.len() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.len(),
                });
            }
            coords.extend_from_slice(self.point(i));
        }
        Ok(NodeSet {
            dim: self.dim,
            coords,
            measure: self.measure,
            seed: self.seed,
            parent: Some(ParentInfo {
                size: self.len(),
                indices: indices.to_vec(),
            }),
        })
    }
}

/// Oversampled node budget `M = ⌈4 m log m⌉` (natural logarithm).
///
/// At `m = 107` this gives exactly the `M = 2000` used throughout.
pub fn oversampled_budget(m: usize) -> Result<usize> {
    if m < 2 {
        return Err(Error::BudgetUndefined(m));
    }
    let mf = m as f64;
    Ok((4.0 * mf * mf.ln()).ceil() as usize)
}

/// Draws `count` i.i.d. uniform points on `[-1, 1]^d`.
///
/// A single counter-based generator stream fills coordinates in row-major
/// order, so the output is a pure function of `(dim, count, seed)`.
pub fn draw_uniform(dim: usize, count: usize, seed: u64) -> Result<NodeSet> {
    if dim == 0 {
        return Err(Error::InvalidDimension);
    }
    if count == 0 {
        return Err(Error::EmptyNodeSet);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new_inclusive(-1.0f64, 1.0f64);
    let coords: Vec<f64> = (0..dim * count).map(|_| dist.sample(&mut rng)).collect();
    Ok(NodeSet {
        dim,
        coords,
        measure: Measure::Uniform,
        seed: Some(seed),
        parent: None,
    })
}

/// Draws `count` i.i.d. Chebyshev-distributed points on `[-1, 1]^d`.
///
/// Implemented as the exact pushforward of [`draw_uniform`]: every coordinate
/// is `cos(π u)` of the uniform draw with the same seed.
pub fn draw_chebyshev(dim: usize, count: usize, seed: u64) -> Result<NodeSet> {
    let mut nodes = draw_uniform(dim, count, seed)?;
    for c in &mut nodes.coords {
        *c = (std::f64::consts::PI * *c).cos();
    }
    nodes.measure = Measure::Chebyshev;
    Ok(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ks_distance<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = samples.len() as f64;
        let mut sup: f64 = 0.0;
        for (i, &x) in samples.iter().enumerate() {
            let f = cdf(x);
            let lo = i as f64 / n;
            let hi = (i + 1) as f64 / n;
            sup = sup.max((f - lo).abs()).max((hi - f).abs());
        }
        sup
    }

    #[test]
    fn budget_values() {
        assert_eq!(oversampled_budget(107).unwrap(), 2000);
        assert_eq!(oversampled_budget(2).unwrap(), 6);
        assert_eq!(oversampled_budget(10).unwrap(), 93);
        assert!(matches!(oversampled_budget(1), Err(Error::BudgetUndefined(1))));
    }

    #[test]
    fn cosine_pushforward_endpoints() {
        // cos(pi * 0) = 1, cos(pi * 1) = cos(-pi) = -1, cos(pi/2) = 0
        assert_eq!((std::f64::consts::PI * 0.0f64).cos(), 1.0);
        assert_eq!((std::f64::consts::PI * 1.0f64).cos(), -1.0);
        assert_eq!((std::f64::consts::PI * -1.0f64).cos(), -1.0);
        assert!((std::f64::consts::PI * 0.5f64).cos().abs() < 1e-16);
    }

    #[test]
    fn chebyshev_draw_is_pushforward_of_uniform_draw() {
        let uniform = draw_uniform(3, 500, 42).unwrap();
        let cheb = draw_chebyshev(3, 500, 42).unwrap();
        for (u, c) in uniform.coords.iter().zip(cheb.coords.iter()) {
            assert_eq!((std::f64::consts::PI * u).cos(), *c);
        }
    }

    #[test]
    fn draws_are_deterministic_per_seed() {
        let a = draw_chebyshev(2, 100, 9).unwrap();
        let b = draw_chebyshev(2, 100, 9).unwrap();
        assert_eq!(a.coords, b.coords);
        let c = draw_chebyshev(2, 100, 10).unwrap();
        assert_ne!(a.point(0), c.point(0));
    }

    #[test]
    fn chebyshev_matches_arcsine_cdf() {
        let nodes = draw_chebyshev(1, 100_000, 3).unwrap();
        let mut xs = nodes.coords.clone();
        let d = ks_distance(&mut xs, |x| 0.5 + x.asin() / std::f64::consts::PI);
        assert!(d < 0.01, "KS distance {d}");
    }

    #[test]
    fn uniform_matches_uniform_cdf_and_mean() {
        let nodes = draw_uniform(1, 100_000, 4).unwrap();
        let mean: f64 = nodes.coords.iter().sum::<f64>() / nodes.coords.len() as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        let mut xs = nodes.coords.clone();
        let d = ks_distance(&mut xs, |x| (x + 1.0) / 2.0);
        assert!(d < 0.01, "KS distance {d}");
    }

    #[test]
    fn chebyshev_mass_concentrates_at_boundary() {
        // P(|x| > 0.9) = 2 (1/2 - asin(0.9)/pi) ~ 0.287 under the arcsine law
        let nodes = draw_chebyshev(1, 100_000, 5).unwrap();
        let frac = nodes.coords.iter().filter(|x| x.abs() > 0.9).count() as f64
            / nodes.coords.len() as f64;
        let expected = 2.0 * (0.5 - 0.9f64.asin() / std::f64::consts::PI);
        assert!((frac - expected).abs() < 0.02, "frac {frac} vs {expected}");
    }

    #[test]
    fn all_coordinates_in_domain() {
        for seed in 0..3 {
            let nodes = draw_chebyshev(4, 1000, seed).unwrap();
            assert!(nodes.coords.iter().all(|c| (-1.0..=1.0).contains(c)));
            let nodes = draw_uniform(4, 1000, seed).unwrap();
            assert!(nodes.coords.iter().all(|c| (-1.0..=1.0).contains(c)));
        }
    }

    #[test]
    fn subset_preserves_order_and_provenance() {
        let nodes = draw_uniform(2, 50, 1).unwrap();
        let subset = nodes.subset(&[3, 7, 40]).unwrap();
        assert_eq!(subset.len(), 3);
        assert_eq!(subset.point(0), nodes.point(3));
        assert_eq!(subset.point(1), nodes.point(7));
        assert_eq!(subset.point(2), nodes.point(40));
        let parent = subset.parent().unwrap();
        assert_eq!(parent.size, 50);
        assert_eq!(parent.indices, vec![3, 7, 40]);
        assert!(matches!(
            nodes.subset(&[50]),
            Err(Error::IndexOutOfRange { index: 50, len: 50 })
        ));
    }
}
