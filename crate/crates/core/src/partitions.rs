//! Integer partitions as cycle types of permutations.
//!
//! A partition of `n` labels the conjugacy class of `S_n` whose elements
//! have cycle lengths given by its parts. This module provides enumeration,
//! the centralizer order `z_λ = ∏ r^{c_r} c_r!`, cycle multiplicities,
//! signatures and the exhaustive permutation substrate used by the
//! brute-force oracles.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` accepted by [`enumerate_partitions`].
pub const DEFAULT_PARTITION_CAP: usize = 200;

/// Largest `n` for operations that sum over every partition of `n`.
pub const EXACT_SUM_CAP: usize = 60;

/// Largest `n` for which all `n!` permutations may be enumerated.
pub const PERMUTATION_CAP: usize = 10;

/// A weakly decreasing sequence of positive parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::InvalidInput("partition parts must be positive".into()));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput(
                "partition parts must be weakly decreasing".into(),
            ));
        }
        Ok(Self { parts })
    }

    /// Sorts arbitrary positive parts into a partition.
    pub fn from_unsorted(mut parts: Vec<usize>) -> Result<Self> {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self::new(parts)
    }

    pub fn empty() -> Self {
        Self { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// `|λ|`, the sum of the parts.
    pub fn size(&self) -> usize {
        self.parts.iter().sum()
    }

    /// `l(λ)`, the number of parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Multiplicities `C_m` of each part length `m`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CycleCounts {
    counts: BTreeMap<usize, usize>,
    n: usize,
}

impl CycleCounts {
    /// Builds counts from a multiplicity map, dropping zero entries.
    pub fn from_map(counts: BTreeMap<usize, usize>) -> Result<Self> {
        if counts.contains_key(&0) {
            return Err(Error::InvalidInput("cycle length 0 is not allowed".into()));
        }
        let counts: BTreeMap<usize, usize> = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        let n = counts.iter().map(|(m, c)| m * c).sum();
        Ok(Self { counts, n })
    }

    /// `C_m`, zero when `m` does not occur.
    pub fn get(&self, m: usize) -> usize {
        self.counts.get(&m).copied().unwrap_or(0)
    }

    /// `Σ m·C_m`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.counts.iter().map(|(&m, &c)| (m, c))
    }

    pub fn as_map(&self) -> &BTreeMap<usize, usize> {
        &self.counts
    }

    pub fn to_partition(&self) -> Partition {
        let mut parts = Vec::with_capacity(self.counts.values().sum());
        for (&m, &c) in self.counts.iter().rev() {
            parts.extend(std::iter::repeat_n(m, c));
        }
        Partition { parts }
    }
}

/// Every partition of `n`, in descending lexicographic order.
pub fn enumerate_partitions(n: usize) -> Result<Vec<Partition>> {
    enumerate_partitions_capped(n, DEFAULT_PARTITION_CAP)
}

pub fn enumerate_partitions_capped(n: usize, cap: usize) -> Result<Vec<Partition>> {
    if n > cap {
        return Err(Error::SizeLimit { what: "partition enumeration", n, cap });
    }
    Ok(PartitionIter::new(n).collect())
}

/// Lazy descending-lexicographic walk over the partitions of `n`.
#[derive(Debug, Clone)]
pub struct PartitionIter {
    current: Option<Vec<usize>>,
}

impl PartitionIter {
    pub fn new(n: usize) -> Self {
        let first = if n == 0 { Vec::new() } else { vec![n] };
        Self { current: Some(first) }
    }
}

impl Iterator for PartitionIter {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        let current = self.current.take()?;
        let out = Partition { parts: current.clone() };

        // Successor: decrement the last part exceeding 1 and refill greedily.
        let mut parts = current;
        let mut ones = 0;
        while parts.last() == Some(&1) {
            parts.pop();
            ones += 1;
        }
        if let Some(last) = parts.last_mut() {
            *last -= 1;
            let cap = *last;
            let mut rest = ones + 1;
            while rest > 0 {
                let take = rest.min(cap);
                parts.push(take);
                rest -= take;
            }
            self.current = Some(parts);
        }
        Some(out)
    }
}

/// Part multiplicities `C_m` of `λ`.
pub fn cycle_counts(partition: &Partition) -> CycleCounts {
    let mut counts = BTreeMap::new();
    for &p in partition.parts() {
        *counts.entry(p).or_insert(0) += 1;
    }
    CycleCounts { counts, n: partition.size() }
}

fn factorial(k: usize) -> BigUint {
    (2..=k).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// `z_λ = ∏_r r^{c_r} c_r!`, the order of the centralizer.
pub fn z_of(partition: &Partition) -> BigUint {
    cycle_counts(partition)
        .iter()
        .fold(BigUint::one(), |acc, (r, c)| acc * BigUint::from(r).pow(c as u32) * factorial(c))
}

/// `1/z_λ = |C_λ| / n!`, exactly.
pub fn class_weight(partition: &Partition) -> BigRational {
    BigRational::new(One::one(), z_of(partition).into())
}

/// `1/z_λ` rounded to double precision.
pub fn class_weight_f64(partition: &Partition) -> f64 {
    // z_λ ≤ n! stays far inside the f64 range for n ≤ EXACT_SUM_CAP.
    1.0 / z_of(partition).to_f64().unwrap_or(f64::INFINITY)
}

/// `ε(σ) = ∏_m (-1)^{λ_m + 1}` for `σ` of cycle type `λ`.
pub fn signature(partition: &Partition) -> i32 {
    let even_parts = partition.parts().iter().filter(|&&p| p % 2 == 0).count();
    if even_parts % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Cycles of a permutation given in one-line notation (`perm[i] = σ(i)`),
/// each listed from its smallest element.
pub fn permutation_cycles(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut cycles = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            cycle.push(i);
            i = perm[i];
        }
        cycles.push(cycle);
    }
    cycles
}

pub fn permutation_cycle_type(perm: &[usize]) -> Partition {
    let parts = permutation_cycles(perm).iter().map(Vec::len).collect();
    Partition::from_unsorted(parts).expect("cycle lengths are positive")
}

pub fn permutation_count(n: usize) -> Result<usize> {
    if n > PERMUTATION_CAP {
        return Err(Error::SizeLimit { what: "permutation enumeration", n, cap: PERMUTATION_CAP });
    }
    Ok((1..=n).product())
}

/// The `index`-th permutation of `0..n` in lexicographic order (Lehmer decoding).
pub fn nth_permutation(n: usize, mut index: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut radix: usize = (1..n).product();
    let mut out = Vec::with_capacity(n);
    for k in (1..=n).rev() {
        let digit = index / radix;
        index %= radix;
        out.push(pool.remove(digit));
        if k > 1 {
            radix /= k - 1;
        }
    }
    out
}

/// Counts all `n!` permutations by cycle type.
pub fn class_sizes_by_enumeration(n: usize) -> Result<BTreeMap<Partition, usize>> {
    let total = permutation_count(n)?;
    let mut sizes = BTreeMap::new();
    for idx in 0..total {
        *sizes.entry(permutation_cycle_type(&nth_permutation(n, idx))).or_insert(0) += 1;
    }
    Ok(sizes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    /// Partitions of `n` with all parts at most `max`, counted recursively.
    fn count_oracle(n: usize, max: usize) -> u64 {
        if n == 0 {
            return 1;
        }
        (1..=max.min(n)).map(|k| count_oracle(n - k, k)).sum()
    }

    #[test]
    fn enumerates_small_cases_in_order() {
        assert_eq!(enumerate_partitions(0).unwrap(), vec![Partition::empty()]);
        assert_eq!(
            enumerate_partitions(4).unwrap(),
            vec![p(&[4]), p(&[3, 1]), p(&[2, 2]), p(&[2, 1, 1]), p(&[1, 1, 1, 1])]
        );
        assert_eq!(enumerate_partitions(10).unwrap().len(), 42);
    }

    #[test]
    fn enumeration_count_matches_recurrence() {
        let mut memo = vec![vec![0u64; 31]; 31];
        for n in 0..=30 {
            for m in 0..=30 {
                memo[n][m] = count_oracle(n, m);
            }
        }
        for n in 0..=30 {
            assert_eq!(enumerate_partitions(n).unwrap().len() as u64, memo[n][n], "n = {n}");
        }
        // p(60) from the same recurrence, memoised.
        let mut table = vec![vec![0u64; 61]; 61];
        for m in 0..=60 {
            table[0][m] = 1;
        }
        for n in 1..=60 {
            for m in 1..=60 {
                table[n][m] = (1..=m.min(n)).map(|k| table[n - k][k]).sum();
            }
        }
        assert_eq!(PartitionIter::new(60).count() as u64, table[60][60]);
    }

    #[test]
    fn enumeration_is_strictly_descending_lexicographic() {
        let all = enumerate_partitions(12).unwrap();
        assert!(all.windows(2).all(|w| w[0].parts() > w[1].parts()));
        assert!(all.iter().all(|l| l.size() == 12));
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(enumerate_partitions(201), Err(Error::SizeLimit { .. })));
        assert!(enumerate_partitions_capped(7, 6).is_err());
    }

    #[test]
    fn rejects_invalid_parts() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert!(Partition::new(vec![2, 0]).is_err());
    }

    #[test]
    fn z_values() {
        assert_eq!(z_of(&p(&[1, 1, 1])), BigUint::from(6u32));
        assert_eq!(z_of(&p(&[3])), BigUint::from(3u32));
        assert_eq!(z_of(&p(&[2, 1])), BigUint::from(2u32));
        assert_eq!(z_of(&Partition::empty()), BigUint::one());
    }

    #[test]
    fn class_weights() {
        assert_eq!(class_weight(&p(&[2, 1])), BigRational::new(1.into(), 2.into()));
        let ones = p(&[1; 7]);
        assert_eq!(class_weight(&ones), BigRational::new(1.into(), 5040.into()));
    }

    #[test]
    fn class_equation_holds_exactly() {
        for n in 0..=12 {
            let total = enumerate_partitions(n)
                .unwrap()
                .iter()
                .map(class_weight)
                .fold(BigRational::zero(), |a, b| a + b);
            assert!(total.is_one(), "n = {n}");
        }
    }

    #[test]
    fn class_sizes_match_permutation_buckets() {
        for n in 0..=8 {
            let sizes = class_sizes_by_enumeration(n).unwrap();
            let fact: usize = (1..=n).product();
            for lambda in enumerate_partitions(n).unwrap() {
                let expected = BigUint::from(fact) / z_of(&lambda);
                assert_eq!(BigUint::from(sizes[&lambda]), expected, "{lambda}");
            }
        }
    }

    #[test]
    fn cycle_count_examples() {
        let c = cycle_counts(&p(&[2, 2, 1]));
        assert_eq!(c.as_map(), &BTreeMap::from([(1, 1), (2, 2)]));
        let c = cycle_counts(&p(&[9, 3, 2, 2, 1]));
        assert_eq!(c.as_map(), &BTreeMap::from([(1, 1), (2, 2), (3, 1), (9, 1)]));
        assert_eq!(c.n(), 17);
        assert_eq!(c.to_partition(), p(&[9, 3, 2, 2, 1]));
        assert!(cycle_counts(&Partition::empty()).as_map().is_empty());
    }

    #[test]
    fn signatures() {
        assert_eq!(signature(&p(&[1, 1, 1])), 1);
        assert_eq!(signature(&p(&[2, 1])), -1);
        assert_eq!(signature(&p(&[3])), 1);
        for n in 0..=12 {
            for lambda in enumerate_partitions(n).unwrap() {
                let closed = if (n - lambda.len()) % 2 == 0 { 1 } else { -1 };
                assert_eq!(signature(&lambda), closed);
            }
        }
    }

    #[test]
    fn permutation_unranking_is_a_bijection() {
        let n = 5;
        let mut seen = std::collections::BTreeSet::new();
        for idx in 0..120 {
            let perm = nth_permutation(n, idx);
            let mut sorted = perm.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..n).collect::<Vec<_>>());
            seen.insert(perm);
        }
        assert_eq!(seen.len(), 120);
        assert_eq!(nth_permutation(3, 0), vec![0, 1, 2]);
        assert_eq!(nth_permutation(3, 5), vec![2, 1, 0]);
    }
}
