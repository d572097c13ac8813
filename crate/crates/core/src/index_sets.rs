//! Hyperbolic cross frequency sets.
//!
//! The cross of radius `R` in dimension `d` is the set of multi-indices
//! `Λ_{d,R} = {k ∈ N_0^d : ∏_ℓ max{1, k_ℓ} ≤ R}`. Compared to a full tensor
//! grid the cross keeps only the frequencies that matter for functions with
//! dominating mixed smoothness, so its cardinality grows like `R (log R)^{d-1}`
//! instead of `R^d`.

use crate::error::{Error, Result};

/// A frequency multi-index `k ∈ N_0^d`.
///
/// Ordering is lexicographic, which is also the canonical order inside a
/// [`MultiIndexSet`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        assert!(!entries.is_empty(), "multi-index needs dimension >= 1");
        MultiIndex(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// `∏_ℓ max{1, k_ℓ}` in exact integer arithmetic.
    pub fn cross_weight(&self) -> u64 {
        self.0.iter().map(|&k| u64::from(k.max(1))).product()
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A hyperbolic cross `Λ_{d,R}`, stored in lexicographic order.
#[derive(Debug, Clone)]
pub struct MultiIndexSet {
    dim: usize,
    radius: u64,
    indices: Vec<MultiIndex>,
}

impl MultiIndexSet {
    /// Enumerates `Λ_{d,R} = {k ∈ N_0^d : ∏ max{1, k_ℓ} ≤ R}`.
    ///
    /// The enumeration descends over coordinates with the remaining integer
    /// budget `R / ∏ max{1, k_ℓ}`, so the membership test is exact; no
    /// floating-point boundary cases. Output is lexicographically ordered.
    pub fn hyperbolic_cross(dim: usize, radius: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension);
        }
        if radius == 0 {
            return Err(Error::InvalidRadius);
        }
        let mut indices = Vec::new();
        let mut prefix = Vec::with_capacity(dim);
        descend(dim, radius, &mut prefix, &mut indices);
        Ok(MultiIndexSet {
            dim,
            radius,
            indices,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> u64 {
        self.radius
    }

    /// Cardinality `m = #Λ`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.indices.iter()
    }

    /// Largest frequency component per coordinate direction.
    ///
    /// Used to size per-dimension evaluation tables when assembling design
    /// matrices.
    pub fn max_components(&self) -> Vec<u32> {
        let mut maxima = vec![0u32; self.dim];
        for idx in &self.indices {
            for (m, &k) in maxima.iter_mut().zip(idx.entries()) {
                *m = (*m).max(k);
            }
        }
        maxima
    }
}

/// Recursive lexicographic descent: coordinate `prefix.len()` ranges over
/// `0..=budget` (0 and 1 both cost factor 1), and the budget for the
/// remaining coordinates is the exact integer quotient.
fn descend(dim: usize, budget: u64, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if prefix.len() == dim {
        out.push(MultiIndex::new(prefix.clone()));
        return;
    }
    for k in 0..=budget {
        let weight = k.max(1);
        if weight > budget {
            break;
        }
        prefix.push(k as u32);
        descend(dim, budget / weight, prefix, out);
        prefix.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Independent oracle: exhaustive filter of the full grid {0..R}^d.
    fn brute_force(dim: usize, radius: u64) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut current = vec![0u32; dim];
        loop {
            let weight: u64 = current.iter().map(|&k| u64::from(k.max(1))).product();
            if weight <= radius {
                out.push(MultiIndex::new(current.clone()));
            }
            // odometer increment over {0..R}^d
            let mut pos = dim;
            loop {
                if pos == 0 {
                    out.sort();
                    return out;
                }
                pos -= 1;
                if u64::from(current[pos]) < radius {
                    current[pos] += 1;
                    for c in &mut current[pos + 1..] {
                        *c = 0;
                    }
                    break;
                }
            }
        }
    }

    #[test]
    fn paper_cardinality_d2_r20() {
        let cross = MultiIndexSet::hyperbolic_cross(2, 20).unwrap();
        assert_eq!(cross.len(), 107);
    }

    #[test]
    fn one_dimensional_cross_is_range() {
        let cross = MultiIndexSet::hyperbolic_cross(1, 5).unwrap();
        assert_eq!(cross.len(), 6);
        let entries: Vec<u32> = cross.iter().map(|k| k.entries()[0]).collect();
        assert_eq!(entries, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn radius_one_cross_is_binary_cube() {
        let cross = MultiIndexSet::hyperbolic_cross(3, 1).unwrap();
        assert_eq!(cross.len(), 8);
        for idx in cross.iter() {
            assert!(idx.entries().iter().all(|&k| k <= 1));
        }
    }

    #[test]
    fn small_cross_matches_brute_force_count() {
        // Frozen from the brute-force oracle: all k in {0..4}^2 with
        // max(1,k1)*max(1,k2) <= 4. Rows k1=0,1 give 5 each, k1=2 gives 3,
        // k1=3,4 give 2 each.
        let oracle = brute_force(2, 4);
        assert_eq!(oracle.len(), 17);
        let cross = MultiIndexSet::hyperbolic_cross(2, 4).unwrap();
        assert_eq!(cross.len(), 17);
        assert_eq!(cross.indices(), &oracle[..]);
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(matches!(
            MultiIndexSet::hyperbolic_cross(0, 5),
            Err(Error::InvalidDimension)
        ));
        assert!(matches!(
            MultiIndexSet::hyperbolic_cross(2, 0),
            Err(Error::InvalidRadius)
        ));
    }

    #[test]
    fn matches_brute_force_up_to_d3_r20() {
        for dim in 1..=3 {
            for radius in [1, 2, 3, 5, 8, 13, 20] {
                let cross = MultiIndexSet::hyperbolic_cross(dim, radius).unwrap();
                let oracle = brute_force(dim, radius);
                assert_eq!(
                    cross.indices(),
                    &oracle[..],
                    "mismatch at d={dim}, R={radius}"
                );
            }
        }
    }

    #[test]
    fn output_is_lexicographic_and_duplicate_free() {
        let cross = MultiIndexSet::hyperbolic_cross(3, 12).unwrap();
        for pair in cross.indices().windows(2) {
            assert!(pair[0] < pair[1]);
        }
    }

    #[test]
    fn nested_in_radius() {
        for dim in 1..=4 {
            let mut previous: HashSet<MultiIndex> = HashSet::new();
            for radius in 1..=30 {
                let cross = MultiIndexSet::hyperbolic_cross(dim, radius).unwrap();
                let current: HashSet<MultiIndex> = cross.iter().cloned().collect();
                assert!(previous.is_subset(&current), "d={dim}, R={radius}");
                previous = current;
            }
        }
    }

    #[test]
    fn downward_closed() {
        let cross = MultiIndexSet::hyperbolic_cross(3, 10).unwrap();
        let members: HashSet<&MultiIndex> = cross.iter().collect();
        for idx in cross.iter() {
            for (pos, &k) in idx.entries().iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let mut smaller = idx.entries().to_vec();
                smaller[pos] = k - 1;
                let smaller = MultiIndex::new(smaller);
                assert!(members.contains(&smaller), "{idx} in cross but {smaller} not");
            }
        }
    }

    #[test]
    fn coordinate_permutation_maps_cross_to_itself() {
        let cross = MultiIndexSet::hyperbolic_cross(3, 10).unwrap();
        let members: HashSet<Vec<u32>> = cross.iter().map(|k| k.entries().to_vec()).collect();
        for idx in cross.iter() {
            let e = idx.entries();
            let rotated = vec![e[1], e[2], e[0]];
            assert!(members.contains(&rotated));
        }
        // cardinality is therefore invariant under permuting coordinates
        assert_eq!(cross.len(), members.len());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            /// Membership is exactly the integer product condition.
            #[test]
            fn members_satisfy_weight_bound(dim in 1usize..4, radius in 1u64..30) {
                let cross = MultiIndexSet::hyperbolic_cross(dim, radius).unwrap();
                for k in cross.iter() {
                    prop_assert!(k.cross_weight() <= radius);
                }
            }

            /// Shrinking one component of a member yields a member.
            #[test]
            fn downward_closure(dim in 1usize..4, radius in 1u64..30, pick in any::<prop::sample::Index>()) {
                let cross = MultiIndexSet::hyperbolic_cross(dim, radius).unwrap();
                let members: HashSet<&MultiIndex> = cross.iter().collect();
                let idx = pick.get(cross.indices());
                for (pos, &k) in idx.entries().iter().enumerate() {
                    if k > 0 {
                        let mut smaller = idx.entries().to_vec();
                        smaller[pos] = k - 1;
                        prop_assert!(members.contains(&MultiIndex::new(smaller)));
                    }
                }
            }

            /// Crosses are nested in the radius.
            #[test]
            fn nested(dim in 1usize..4, radius in 1u64..29) {
                let small = MultiIndexSet::hyperbolic_cross(dim, radius).unwrap();
                let members: HashSet<MultiIndex> =
                    MultiIndexSet::hyperbolic_cross(dim, radius + 1)
                        .unwrap()
                        .iter()
                        .cloned()
                        .collect();
                for k in small.iter() {
                    prop_assert!(members.contains(k));
                }
            }
        }
    }
}
