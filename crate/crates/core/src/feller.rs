//! The Feller coupling.
//!
//! Independent bits `ξ_m ~ Bernoulli(1/m)` are read as a permutation: a 1 at
//! position `j` starts a new cycle, so the gaps between consecutive ones in
//! `1 ξ_2 ⋯ ξ_n 1` are the cycle lengths of a uniform permutation of `n`.
//! Gaps in the whole sequence give the independent Poisson counts `Y_m`.
//!
//! Sequences are stored sparsely as the positions of their ones. From a one
//! at `j` the next one is at `K = floor(j/U) + 1` with `U` uniform on `(0,1]`,
//! because `P(K > k) = ∏_{i=j+1}^{k} (1 - 1/i) = j/k`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classfun::{check_domain, check_strict_domain, CoeffGrid, EvalPoint};
use crate::error::{Error, Result};
use crate::mc::{self, map_indexed, rng_for, Estimate};
use crate::partitions::{CycleCounts, Partition};

/// Positions beyond this are treated as "never" when sampling.
const FAR: f64 = 1e15;

/// Default stored length for a horizon `n`: `max(10 n, 10^4)`.
pub fn default_length(n: usize) -> usize {
    (10 * n).max(10_000)
}

/// A prefix `ξ_1..ξ_L` of the Bernoulli sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct XiSequence {
    len: usize,
    ones: Vec<usize>,
    /// First one after position `len`, when known (always, for sampled sequences).
    next_one: Option<usize>,
}

impl XiSequence {
    /// From explicit bits `ξ_1, ξ_2, ...`; `ξ_1` must be 1.
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        if bits.first() != Some(&true) {
            return Err(Error::InvalidInput("a Bernoulli sequence starts with ξ_1 = 1".into()));
        }
        let ones = bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i + 1).collect();
        Ok(Self { len: bits.len(), ones, next_one: None })
    }

    /// From a `0`/`1` string.
    pub fn parse(word: &str) -> Result<Self> {
        let bits = parse_word(word)?;
        Self::from_bits(&bits)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Positions of the ones, increasing.
    pub fn ones(&self) -> &[usize] {
        &self.ones
    }

    pub fn next_one(&self) -> Option<usize> {
        self.next_one
    }

    /// `ξ_j` for `1 <= j <= L`.
    pub fn bit(&self, j: usize) -> Result<bool> {
        if j == 0 || j > self.len {
            return Err(Error::IndexOutOfBounds(format!("ξ_{j} with L = {}", self.len)));
        }
        Ok(self.ones.binary_search(&j).is_ok())
    }

    pub fn bits(&self) -> Vec<bool> {
        let mut v = vec![false; self.len];
        for &p in &self.ones {
            v[p - 1] = true;
        }
        v
    }
}

fn parse_word(word: &str) -> Result<Vec<bool>> {
    word.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::MalformedWord(format!("unexpected character {other:?}"))),
        })
        .collect()
}

/// Position of the next one after a one at `j`.
fn next_position<R: Rng + ?Sized>(rng: &mut R, j: usize) -> usize {
    let u = 1.0 - rng.random::<f64>();
    let k = (j as f64 / u).floor();
    if k >= FAR {
        FAR as usize
    } else {
        k as usize + 1
    }
}

/// Samples `ξ_1..ξ_L` and the first one after `L` from `rng`.
pub fn sample_xi_with<R: Rng + ?Sized>(rng: &mut R, len: usize) -> XiSequence {
    let mut ones = Vec::new();
    let mut j = 1;
    if len >= 1 {
        ones.push(1);
    }
    let next_one = loop {
        let k = next_position(rng, j);
        if k > len {
            break if len == 0 { 1 } else { k };
        }
        ones.push(k);
        j = k;
    };
    XiSequence { len, ones, next_one: Some(next_one) }
}

/// `ξ_1..ξ_L` from the stream `(seed, 0)`.
pub fn sample_xi(len: usize, seed: u64) -> Result<XiSequence> {
    if len == 0 {
        return Err(Error::InvalidInput("sequence length must be at least 1".into()));
    }
    Ok(sample_xi_with(&mut rng_for(seed, 0), len))
}

/// Gap lengths between consecutive ones in `1 ξ_2 ⋯ ξ_n 1`.
fn gaps_to(xi: &XiSequence, n: usize) -> impl Iterator<Item = usize> + '_ {
    let end = xi.ones.partition_point(|&p| p <= n);
    let stops = xi.ones[..end].iter().copied().skip(1).chain(std::iter::once(n + 1));
    xi.ones[..end].iter().zip(stops).map(|(&a, b)| b - a)
}

/// `C_m^{(n)}`: the m-spacings of `1 ξ_2 ⋯ ξ_n 1`.
pub fn spacings(xi: &XiSequence, n: usize) -> Result<CycleCounts> {
    if n >= xi.len && !(n == xi.len && xi.next_one.is_some()) {
        return Err(Error::HorizonExceedsSample { n, len: xi.len });
    }
    let mut counts = BTreeMap::new();
    for g in gaps_to(xi, n) {
        *counts.entry(g).or_insert(0) += 1;
    }
    CycleCounts::from_map(counts)
}

/// The word `ξ_2 ⋯ ξ_n 1`, in which a 1 marks the position closing a cycle.
pub fn feller_word(xi: &XiSequence, n: usize) -> Result<String> {
    if n > xi.len {
        return Err(Error::HorizonExceedsSample { n, len: xi.len });
    }
    let bits = xi.bits();
    Ok((2..=n).map(|j| if bits[j - 1] { '1' } else { '0' }).chain((n >= 1).then_some('1')).collect())
}

/// Counts `Y_m` of m-spacings, `1 <= m <= M`, with their validity certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YCounts {
    /// `counts[m - 1] = Y_m`.
    pub counts: Vec<u64>,
    /// Largest `m` whose spacings starting inside the stored prefix are all counted.
    pub valid_up_to: usize,
    /// Expected number of m-spacings starting beyond the prefix, `1/(L + m)`, for `m = 1`.
    /// It decreases in `m`, so it bounds the bias of every counted `Y_m`.
    pub missed_bound: f64,
}

impl YCounts {
    pub fn get(&self, m: usize) -> u64 {
        if m == 0 || m > self.counts.len() {
            0
        } else {
            self.counts[m - 1]
        }
    }
}

/// `Y_m` over the stored prefix.
///
/// A sampled sequence knows its first one beyond `L`, so every spacing that
/// starts inside the prefix is seen. For a sequence given by explicit bits the
/// last stored gap is open and only `m <= L - p_last` are safe.
pub fn y_counts(xi: &XiSequence, max_m: usize) -> Result<YCounts> {
    let last = *xi.ones.last().unwrap_or(&0);
    let valid_up_to = match xi.next_one {
        Some(_) => xi.len,
        None => xi.len - last,
    };
    if max_m > valid_up_to {
        return Err(Error::InvalidInput(format!(
            "Y_m for m <= {max_m} needs a longer prefix: only m <= {valid_up_to} are certified at L = {}",
            xi.len
        )));
    }
    let mut counts = vec![0u64; max_m];
    let stops = xi.ones.iter().copied().skip(1).chain(xi.next_one);
    for (&a, b) in xi.ones.iter().zip(stops) {
        let g = b - a;
        if g <= max_m {
            counts[g - 1] += 1;
        }
    }
    Ok(YCounts { counts, valid_up_to, missed_bound: 1.0 / (xi.len as f64 + 1.0) })
}

/// `B_m^{(n)}`: `ξ_{n+1-m} = 1` followed by `m` zeros up to `ξ_{n+1}`.
pub fn b_event(xi: &XiSequence, n: usize, m: usize) -> Result<bool> {
    if n + 1 > xi.len {
        return Err(Error::IndexOutOfBounds(format!("ξ_{} with L = {}", n + 1, xi.len)));
    }
    if m == 0 || m > n {
        return Err(Error::IndexOutOfBounds(format!("m = {m} must lie in 1..={n}")));
    }
    if !xi.bit(n + 1 - m)? {
        return Ok(false);
    }
    for j in n + 2 - m..=n + 1 {
        if xi.bit(j)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Cycle type of a word in which a 1 closes a cycle. The word must end with 1.
pub fn bits_to_cycle_type(word: &str) -> Result<Partition> {
    let bits = parse_word(word)?;
    if bits.last() == Some(&false) {
        return Err(Error::MalformedWord("the last position must close a cycle".into()));
    }
    let mut parts = Vec::new();
    let mut start = 0;
    for (i, &b) in bits.iter().enumerate() {
        if b {
            parts.push(i + 1 - start);
            start = i + 1;
        }
    }
    Partition::from_unsorted(parts)
}

/// Canonical word of `λ`: parts laid out in order `λ_1, λ_2, ...`, each as
/// `λ_i - 1` zeros followed by the closing 1.
pub fn cycle_type_to_bits(lambda: &Partition) -> String {
    let mut w = String::with_capacity(lambda.size());
    for &p in lambda.parts() {
        w.extend(std::iter::repeat_n('0', p - 1));
        w.push('1');
    }
    w
}

/// Summary of a Feller Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FellerEstimate {
    pub value_re: f64,
    pub value_im: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
    #[serde(rename = "L")]
    pub length: usize,
    pub tail_bound: f64,
}

impl FellerEstimate {
    fn from_estimate(e: Estimate, seed: u64, length: usize, tail_bound: f64) -> Self {
        Self { value_re: e.mean.re, value_im: e.mean.im, stderr: e.stderr, trials: e.trials, seed, length, tail_bound }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.value_re, self.value_im)
    }

    pub fn estimate(&self) -> Estimate {
        Estimate { mean: self.value(), stderr: self.stderr, trials: self.trials }
    }
}

fn require_univariate(f: &CoeffGrid) -> Result<()> {
    if !f.is_univariate() {
        return Err(Error::InvalidInput("the Feller routes take a univariate f".into()));
    }
    Ok(())
}

fn pow_big(x: Complex64, g: usize) -> Complex64 {
    match u32::try_from(g) {
        Ok(g) => x.powu(g),
        Err(_) => Complex64::from_polar(x.norm().powf(g as f64), (x.arg() * g as f64) % std::f64::consts::TAU),
    }
}

/// Monte Carlo estimate of `E[∏_m f(x^m)^{C_m^{(n)}}]` over sampled `ξ`.
pub fn mc_expect_w1(f: &CoeffGrid, x: Complex64, n: usize, trials: u64, seed: u64) -> Result<FellerEstimate> {
    require_univariate(f)?;
    check_domain(f, &EvalPoint::univariate(x))?;
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be positive".into()));
    }
    let fx: Vec<Complex64> = (0..=n).map(|m| f.eval(x.powu(m as u32), Complex64::new(0.0, 0.0))).collect();
    let e = mc::estimate(trials, seed, |rng, _| {
        let xi = sample_xi_with(rng, n);
        gaps_to(&xi, n).map(|g| fx[g]).product()
    });
    Ok(FellerEstimate::from_estimate(e, seed, n, 0.0))
}

/// Whether `f` has no zero on the closed disk of radius `rho`, by the argument
/// principle on the boundary circle plus a check that `f` stays away from 0 there.
pub fn nonvanishing_on_disk(f: &CoeffGrid, rho: f64) -> bool {
    const POINTS: usize = 4096;
    let zero = Complex64::new(0.0, 0.0);
    if f.b00() == zero {
        return false;
    }
    if rho == 0.0 {
        return true;
    }
    let scale: f64 = f.nonzero().map(|(k, _, b)| b.norm() * rho.powi(k as i32)).sum();
    let values: Vec<Complex64> = (0..=POINTS)
        .map(|i| f.eval(Complex64::from_polar(rho, std::f64::consts::TAU * i as f64 / POINTS as f64), zero))
        .collect();
    if values.iter().any(|v| v.norm() <= 1e-9 * scale) {
        return false;
    }
    let mut winding = 0.0;
    for w in values.windows(2) {
        let step = (w[1] / w[0]).arg();
        if step.abs() > 1.0 {
            // too coarse to follow the argument reliably
            return false;
        }
        winding += step;
    }
    (winding / std::f64::consts::TAU).round() == 0.0
}

/// One draw of the limit variable `∏_m f(x^m)^{Y_m}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitDraw {
    pub value: Complex64,
    /// Bound on the expected `|log|` of the factor from spacings starting beyond `L`.
    pub tail_bound: f64,
}

fn check_limit_preconditions(f: &CoeffGrid, x: Complex64) -> Result<()> {
    require_univariate(f)?;
    check_strict_domain(f, &EvalPoint::univariate(x))?;
    if (f.b00() - 1.0).norm() > 1e-12 {
        return Err(Error::InvalidInput(format!("the limit product needs f(0) = 1, found {}", f.b00())));
    }
    if !nonvanishing_on_disk(f, x.norm()) {
        return Err(Error::Domain("f vanishes on the disk of radius |x|, so log f(x^m) is undefined".into()));
    }
    Ok(())
}

/// `Σ_m |log f(x^m)| / (L + m)`: expected size of the missed log factor.
fn limit_tail_bound(f: &CoeffGrid, x: Complex64, len: usize) -> f64 {
    let a = x.norm();
    let mut total = 0.0;
    let mut m = 1usize;
    loop {
        let y = x.powu(m as u32);
        let term = f.eval(y, Complex64::new(0.0, 0.0)).ln().norm();
        total += term / (len + m) as f64;
        if a.powi(m as i32) < 1e-17 || m > 100_000 {
            break;
        }
        m += 1;
    }
    // |log f(y)| <= 2 |f(y) - 1| once that is small, and |f(y) - 1| <= S |y|
    let s: f64 = f.nonzero().filter(|(k, _, _)| *k > 0).map(|(_, _, b)| b.norm()).sum::<f64>()
        + f.tail_constant().unwrap_or(0.0) / (1.0 - a * f.decay_rates().0).max(1e-300);
    total + 2.0 * s * a.powi(m as i32 + 1) / (1.0 - a) / len as f64
}

fn limit_value(f: &CoeffGrid, x: Complex64, rng: &mut ChaCha8Rng, len: usize) -> Complex64 {
    let xi = sample_xi_with(rng, len);
    let stops = xi.ones.iter().copied().skip(1).chain(xi.next_one);
    xi.ones
        .iter()
        .zip(stops)
        .map(|(&a, b)| f.eval(pow_big(x, b - a), Complex64::new(0.0, 0.0)))
        .product()
}

/// One draw of `f_∞(x) = ∏ f(x^m)^{Y_m}` from the stream `(seed, index)`.
pub fn sample_w1_infinity(f: &CoeffGrid, x: Complex64, len: usize, seed: u64, index: u64) -> Result<LimitDraw> {
    check_limit_preconditions(f, x)?;
    if len == 0 {
        return Err(Error::InvalidInput("sequence length must be at least 1".into()));
    }
    let value = limit_value(f, x, &mut rng_for(seed, index), len);
    Ok(LimitDraw { value, tail_bound: limit_tail_bound(f, x, len) })
}

/// Mean of `draws` independent draws of `f_∞(x)`.
pub fn mc_expect_w1_infinity(f: &CoeffGrid, x: Complex64, len: usize, draws: u64, seed: u64) -> Result<FellerEstimate> {
    check_limit_preconditions(f, x)?;
    if draws == 0 || len == 0 {
        return Err(Error::InvalidInput("draws and sequence length must be positive".into()));
    }
    let e = mc::estimate(draws, seed, |rng, _| limit_value(f, x, rng, len));
    Ok(FellerEstimate::from_estimate(e, seed, len, limit_tail_bound(f, x, len)))
}

/// Everything the coupling relates for one sampled sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct FellerSample {
    pub xi: XiSequence,
    pub n: usize,
    pub c: CycleCounts,
    pub y: YCounts,
}

impl FellerSample {
    /// Samples `ξ` of length `len > n` from the stream `(seed, index)` and derives `C^{(n)}` and `Y_m`, `m <= max_m`.
    pub fn draw(n: usize, len: usize, max_m: usize, seed: u64, index: u64) -> Result<Self> {
        if len <= n {
            return Err(Error::HorizonExceedsSample { n, len });
        }
        let xi = sample_xi_with(&mut rng_for(seed, index), len);
        let c = spacings(&xi, n)?;
        let y = y_counts(&xi, max_m)?;
        Ok(Self { xi, n, c, y })
    }

    /// `C_m <= Y_m + 1_{B_m}` for `m <= max_m`, and `Σ m C_m = n`.
    pub fn pathwise_bound_holds(&self) -> Result<bool> {
        let total: usize = self.c.iter().map(|(m, c)| m * c).sum();
        if total != self.n {
            return Ok(false);
        }
        for m in 1..=self.y.counts.len().min(self.n) {
            let c = self.c.get(m) as u64;
            let y = self.y.get(m);
            if c > y + 1 || (c == y + 1 && !b_event(&self.xi, self.n, m)?) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Frequencies of the cycle types `C^{(n)}` over `samples` sequences.
pub fn cycle_type_frequencies(n: usize, samples: u64, seed: u64) -> BTreeMap<Partition, u64> {
    const BLOCK: u64 = 4096;
    let blocks = samples.div_ceil(BLOCK);
    let partial = map_indexed(blocks, |b| {
        let mut freq: BTreeMap<Partition, u64> = BTreeMap::new();
        for i in b * BLOCK..((b + 1) * BLOCK).min(samples) {
            let xi = sample_xi_with(&mut rng_for(seed, i), n);
            let parts: Vec<usize> = gaps_to(&xi, n).collect();
            let lambda = Partition::from_unsorted(parts).expect("gaps are positive");
            *freq.entry(lambda).or_insert(0) += 1;
        }
        freq
    });
    let mut total = BTreeMap::new();
    for freq in partial {
        for (k, v) in freq {
            *total.entry(k).or_insert(0) += v;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::{class_weight_f64, cycle_counts, enumerate_partitions};

    fn xi(word: &str) -> XiSequence {
        XiSequence::parse(word).unwrap()
    }

    #[test]
    fn spacing_examples() {
        let c = spacings(&xi("1111111"), 5).unwrap();
        assert_eq!(c.get(1), 5);
        let c = spacings(&xi("1000000000"), 9).unwrap();
        assert_eq!(c.as_map().len(), 1);
        assert_eq!(c.get(9), 1);
        let s = xi("1000100010");
        let c4 = spacings(&s, 4).unwrap();
        assert_eq!((c4.get(4), c4.as_map().len()), (1, 1));
        let c5 = spacings(&s, 5).unwrap();
        assert_eq!((c5.get(1), c5.get(4), c5.as_map().len()), (1, 1, 2));
        assert!(matches!(spacings(&s, 10), Err(Error::HorizonExceedsSample { .. })));
    }

    #[test]
    fn y_counts_read_off_gaps() {
        let s = xi("1101001000");
        let y = y_counts(&s, 3).unwrap();
        assert_eq!(y.counts, vec![1, 1, 1]);
        assert_eq!(y.valid_up_to, 3);
        assert!(y_counts(&s, 4).is_err());
    }

    #[test]
    fn b_event_examples() {
        // n = 6, m = 3: positions 4..7 read 1000
        let s = xi("10010000");
        assert!(b_event(&s, 6, 3).unwrap());
        assert!(!b_event(&s, 6, 2).unwrap());
        let t = xi("1001001");
        for m in 1..=6 {
            assert!(!b_event(&t, 6, m).unwrap());
        }
        assert!(b_event(&t, 7, 1).is_err());
        assert!(b_event(&t, 6, 0).is_err());
    }

    #[test]
    fn canonical_words() {
        let lambda = Partition::new(vec![9, 3, 2, 2, 1]).unwrap();
        let w = cycle_type_to_bits(&lambda);
        assert_eq!(w, "00000000100101011");
        // the displayed word in the literature differs only in its leading sentinel
        assert_eq!(&w[1..], &"10000000100101011"[1..]);
        assert_eq!(bits_to_cycle_type(&w).unwrap(), lambda);
        assert_eq!(cycle_type_to_bits(&Partition::new(vec![1; 6]).unwrap()), "111111");
        assert!(matches!(bits_to_cycle_type("0110"), Err(Error::MalformedWord(_))));
        assert!(matches!(bits_to_cycle_type("01a1"), Err(Error::MalformedWord(_))));
        for n in 0..=10 {
            for lambda in enumerate_partitions(n).unwrap() {
                assert_eq!(bits_to_cycle_type(&cycle_type_to_bits(&lambda)).unwrap(), lambda);
            }
        }
    }

    #[test]
    fn feller_word_encodes_the_spacings() {
        for i in 0..200 {
            let s = sample_xi_with(&mut rng_for(5, i), 40);
            for n in [1, 7, 17, 39] {
                let word = feller_word(&s, n).unwrap();
                let lambda = bits_to_cycle_type(&word).unwrap();
                assert_eq!(cycle_counts(&lambda), spacings(&s, n).unwrap());
            }
        }
    }

    #[test]
    fn sampler_marginals() {
        let samples = 100_000u64;
        let (mut s2, mut s10) = (0u64, 0u64);
        for seed in 0..samples {
            let s = sample_xi(12, seed).unwrap();
            assert!(s.bit(1).unwrap());
            s2 += s.bit(2).unwrap() as u64;
            s10 += s.bit(10).unwrap() as u64;
        }
        for (count, p) in [(s2, 0.5), (s10, 0.1)] {
            let mean = count as f64 / samples as f64;
            let se = (p * (1.0 - p) / samples as f64).sqrt();
            assert!((mean - p).abs() < 3.0 * se, "{mean} vs {p}");
        }
    }

    #[test]
    fn sparse_sampler_matches_independent_bits() {
        // joint law of (ξ_2..ξ_5) against the product of Bernoulli(1/m)
        let samples = 200_000u64;
        let mut freq = [0u64; 16];
        for i in 0..samples {
            let s = sample_xi_with(&mut rng_for(77, i), 5);
            let key = (2..=5).fold(0, |acc, j| acc * 2 + s.bit(j).unwrap() as usize);
            freq[key] += 1;
        }
        for (key, &count) in freq.iter().enumerate() {
            let p: f64 = (2..=5)
                .map(|j| {
                    let bit = (key >> (5 - j)) & 1 == 1;
                    if bit { 1.0 / j as f64 } else { 1.0 - 1.0 / j as f64 }
                })
                .product();
            let se = (p * (1.0 - p) / samples as f64).sqrt();
            assert!((count as f64 / samples as f64 - p).abs() < 4.0 * se);
        }
    }

    #[test]
    fn cycle_law_small_n() {
        let n = 5;
        let samples = 200_000;
        let freq = cycle_type_frequencies(n, samples, 3);
        let mut tv = 0.0;
        for lambda in enumerate_partitions(n).unwrap() {
            let p = class_weight_f64(&lambda);
            let q = *freq.get(&lambda).unwrap_or(&0) as f64 / samples as f64;
            tv += (p - q).abs() / 2.0;
        }
        assert!(tv < 5e-3, "tv = {tv}");
    }

    #[test]
    fn pathwise_coupling() {
        for i in 0..2000 {
            let s = FellerSample::draw(20, 2000, 8, 9, i).unwrap();
            assert!(s.pathwise_bound_holds().unwrap());
        }
    }

    #[test]
    fn poisson_means_of_y() {
        let samples = 20_000u64;
        let mut sums = [0u64; 3];
        for i in 0..samples {
            let s = sample_xi_with(&mut rng_for(21, i), 10_000);
            let y = y_counts(&s, 3).unwrap();
            for m in 1..=3 {
                sums[m - 1] += y.get(m);
            }
        }
        for m in 1..=3 {
            let mean = sums[m - 1] as f64 / samples as f64;
            let se = (1.0 / m as f64 / samples as f64).sqrt();
            assert!((mean - 1.0 / m as f64).abs() < 3.5 * se, "m = {m}: {mean}");
        }
    }

    #[test]
    fn mc_char_poly() {
        let f = CoeffGrid::univariate_real(&[1.0, -1.0]).unwrap();
        let e = mc_expect_w1(&f, Complex64::new(0.3, 0.0), 6, 100_000, 1).unwrap();
        assert!(e.estimate().within(Complex64::new(0.7, 0.0), 3.0), "{e:?}");
        let one = mc_expect_w1(&CoeffGrid::one(), Complex64::new(0.3, 0.0), 6, 1000, 1).unwrap();
        assert_eq!((one.value(), one.stderr), (Complex64::new(1.0, 0.0), 0.0));
        assert!(mc_expect_w1(&f, Complex64::new(0.3, 0.0), 6, 0, 1).is_err());
        let a = serde_json::to_string(&e).unwrap();
        assert!(a.contains("\"L\":6") && a.contains("value_re"));
    }

    #[test]
    fn limit_draws() {
        let one = mc_expect_w1_infinity(&CoeffGrid::one(), Complex64::new(0.4, 0.0), 1000, 100, 0).unwrap();
        assert_eq!(one.value(), Complex64::new(1.0, 0.0));
        let f = CoeffGrid::univariate_real(&[1.0, -1.0]).unwrap();
        // ∏_k (1 - x^k)^{-b_k} keeps only k = 1 for f = 1 - x
        let e = mc_expect_w1_infinity(&f, Complex64::new(0.4, 0.0), 10_000, 100_000, 4).unwrap();
        assert!(e.estimate().within(Complex64::new(0.6, 0.0), 3.0), "{e:?}");
        assert!(e.tail_bound < 1e-3);
        let geo = CoeffGrid::geometric(60);
        let oracle: f64 = (1..=60).map(|k| 1.0 / (1.0 - 0.5f64.powi(k))).product();
        let e = mc_expect_w1_infinity(&geo, Complex64::new(0.5, 0.0), 10_000, 100_000, 6).unwrap();
        assert!(e.estimate().within(Complex64::new(oracle, 0.0), 3.0), "{e:?} vs {oracle}");
        // 1 - 2x vanishes at 1/2
        let g = CoeffGrid::univariate_real(&[1.0, -2.0]).unwrap();
        assert!(matches!(sample_w1_infinity(&g, Complex64::new(0.6, 0.0), 100, 0, 0), Err(Error::Domain(_))));
        assert!(sample_w1_infinity(&g, Complex64::new(0.4, 0.0), 100, 0, 0).is_ok());
        let h = CoeffGrid::univariate_real(&[2.0, -1.0]).unwrap();
        assert!(sample_w1_infinity(&h, Complex64::new(0.4, 0.0), 100, 0, 0).is_err());
    }

    #[test]
    fn nonvanishing_check() {
        let f = CoeffGrid::univariate_real(&[1.0, 0.0, 4.0]).unwrap(); // zeros at ±i/2
        assert!(nonvanishing_on_disk(&f, 0.45));
        assert!(!nonvanishing_on_disk(&f, 0.55));
        assert!(nonvanishing_on_disk(&CoeffGrid::geometric(60), 0.9));
    }
}
