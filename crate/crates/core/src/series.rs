//! Truncated power series in the bookkeeping variable `t`.
//!
//! Products of binomial factors `(1 - c t)^{-e}` are never formed by complex
//! powers. They are accumulated as a single logarithm `Σ_i e_i Σ_m c_i^m t^m / m`
//! and exponentiated once, so no branch of the complex logarithm is ever chosen.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Coefficients `h_0 .. h_N` of a power series truncated at order `N` (inclusive).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncSeries {
    coeffs: Vec<Complex64>,
}

impl TruncSeries {
    /// Builds a series from its coefficients; the order is `coeffs.len() - 1`.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("a truncated series needs at least h_0".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::from_coeffs(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero(order: usize) -> Self {
        Self { coeffs: vec![ZERO; order + 1] }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = ONE;
        s
    }

    /// The series `t` truncated at `order`.
    pub fn variable(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = ONE;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `[t^n] h`; fails rather than returning zero past the truncation order.
    pub fn coefficient(&self, n: usize) -> Result<Complex64> {
        self.coeffs
            .get(n)
            .copied()
            .ok_or(Error::OrderExceeded { n, order: self.order() })
    }

    /// Drops or zero-pads coefficients to the new order.
    pub fn retruncate(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, ZERO);
        Self { coeffs }
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::OrderMismatch { left: self.order(), right: other.order() });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Self { coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Self { coeffs })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let order = self.order();
        let mut coeffs = vec![ZERO; order + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            for (j, b) in other.coeffs[..=order - i].iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Ok(Self { coeffs })
    }

    /// `exp(a)` for a series with zero constant term, via `n h_n = Σ_k k a_k h_{n-k}`.
    pub fn exp(&self) -> Result<Self> {
        if self.coeffs[0] != ZERO {
            return Err(Error::ConstantTerm { expected: 0.0, found: self.coeffs[0] });
        }
        let order = self.order();
        let weighted: Vec<Complex64> =
            self.coeffs.iter().enumerate().map(|(k, a)| a * k as f64).collect();
        let mut h = vec![ZERO; order + 1];
        h[0] = ONE;
        for n in 1..=order {
            let mut acc = ZERO;
            for k in 1..=n {
                acc += weighted[k] * h[n - k];
            }
            h[n] = acc / n as f64;
        }
        Ok(Self { coeffs: h })
    }

    /// `log(h)` for a series with `h_0 = 1`, via `n a_n = n h_n - Σ_{k<n} k a_k h_{n-k}`.
    pub fn log(&self) -> Result<Self> {
        if self.coeffs[0] != ONE {
            return Err(Error::ConstantTerm { expected: 1.0, found: self.coeffs[0] });
        }
        let order = self.order();
        let mut a = vec![ZERO; order + 1];
        for n in 1..=order {
            let mut acc = self.coeffs[n] * n as f64;
            for k in 1..n {
                acc -= a[k] * k as f64 * self.coeffs[n - k];
            }
            a[n] = acc / n as f64;
        }
        Ok(Self { coeffs: a })
    }

    /// Coefficientwise modulus; a majorant of `self` with nonnegative coefficients.
    pub fn abs(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| Complex64::new(c.norm(), 0.0)).collect() }
    }
}

/// `exp(a)`; see [`TruncSeries::exp`].
pub fn exp_series(a: &TruncSeries) -> Result<TruncSeries> {
    a.exp()
}

/// `[t^n] h`; see [`TruncSeries::coefficient`].
pub fn coefficient(h: &TruncSeries, n: usize) -> Result<Complex64> {
    h.coefficient(n)
}

/// One factor `(1 - c t)^{-e}` of a product generating function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialFactor {
    pub c: Complex64,
    pub e: Complex64,
}

impl BinomialFactor {
    pub fn new(c: Complex64, e: Complex64) -> Self {
        Self { c, e }
    }
}

/// A finite product `∏_i (1 - c_i t)^{-e_i}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FactorList {
    factors: Vec<BinomialFactor>,
}

impl FactorList {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a factor; zero exponents are dropped since they contribute 1.
    pub fn push(&mut self, c: Complex64, e: Complex64) {
        if e != ZERO {
            self.factors.push(BinomialFactor::new(c, e));
        }
    }

    pub fn factors(&self) -> &[BinomialFactor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// The same product with every `c_i` replaced by `-c_i`, i.e. `∏ (1 + c_i t)^{-e_i}`.
    pub fn negated(&self) -> Self {
        Self {
            factors: self.factors.iter().map(|f| BinomialFactor::new(-f.c, f.e)).collect(),
        }
    }

    /// `Σ_i e_i Σ_{m=1}^{N} c_i^m t^m / m`, the logarithm of the product.
    pub fn log_series(&self, order: usize) -> TruncSeries {
        let mut log = vec![ZERO; order + 1];
        for f in &self.factors {
            let mut power = ONE;
            for (m, slot) in log.iter_mut().enumerate().skip(1) {
                power *= f.c;
                *slot += f.e * power / m as f64;
            }
        }
        TruncSeries { coeffs: log }
    }
}

impl FromIterator<(Complex64, Complex64)> for FactorList {
    fn from_iter<I: IntoIterator<Item = (Complex64, Complex64)>>(iter: I) -> Self {
        let mut list = Self::new();
        for (c, e) in iter {
            list.push(c, e);
        }
        list
    }
}

/// `(1 - c t)^{-e}` truncated at `order`.
pub fn binomial_factor(c: Complex64, e: Complex64, order: usize) -> TruncSeries {
    let mut list = FactorList::new();
    list.push(c, e);
    product_of_factors(&list, order)
}

/// `∏_i (1 - c_i t)^{-e_i}`, evaluated as the exponential of the summed logarithms.
pub fn product_of_factors(factors: &FactorList, order: usize) -> TruncSeries {
    factors.log_series(order).exp().expect("log series has zero constant term")
}

/// `Σ_λ a_λ t^{|λ|} / z_λ = exp(Σ_m a_m t^m / m)` truncated at `order`.
pub fn exponential_formula(a: &[Complex64], order: usize) -> Result<TruncSeries> {
    if a.len() < order {
        return Err(Error::InvalidInput(format!(
            "exponential formula at order {order} needs a_1..a_{order}, got {} terms",
            a.len()
        )));
    }
    let mut log = vec![ZERO; order + 1];
    for m in 1..=order {
        log[m] = a[m - 1] / m as f64;
    }
    TruncSeries { coeffs: log }.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::{class_weight_f64, enumerate_partitions};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &TruncSeries, b: &TruncSeries, tol: f64) -> bool {
        a.order() == b.order()
            && a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| (x - y).norm() <= tol)
    }

    fn random_series(rng: &mut ChaCha8Rng, order: usize) -> TruncSeries {
        let coeffs = (0..=order)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        TruncSeries::from_coeffs(coeffs).unwrap()
    }

    /// Direct Cauchy product with no shortcuts, used as a reference.
    fn naive_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        let n = a.len();
        (0..n).map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum()).collect()
    }

    #[test]
    fn mul_examples() {
        let a = TruncSeries::from_real(&[1.0, 1.0, 0.0]).unwrap();
        let b = TruncSeries::from_real(&[1.0, -1.0, 0.0]).unwrap();
        assert_eq!(a.mul(&b).unwrap(), TruncSeries::from_real(&[1.0, 0.0, -1.0]).unwrap());
        assert_eq!(a.mul(&TruncSeries::one(2)).unwrap(), a);
        let geo = TruncSeries::from_real(&[1.0; 6]).unwrap();
        let one_minus_t = TruncSeries::from_real(&[1.0, -1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(geo.mul(&one_minus_t).unwrap(), TruncSeries::one(5));
    }

    #[test]
    fn mul_rejects_order_mismatch() {
        let err = TruncSeries::one(2).mul(&TruncSeries::one(3)).unwrap_err();
        assert_eq!(err, Error::OrderMismatch { left: 2, right: 3 });
        assert_eq!(TruncSeries::one(3).retruncate(2).mul(&TruncSeries::one(2)).unwrap().order(), 2);
    }

    #[test]
    fn exp_examples() {
        assert_eq!(TruncSeries::zero(4).exp().unwrap(), TruncSeries::one(4));
        let e = TruncSeries::variable(3).exp().unwrap();
        let expected = TruncSeries::from_real(&[1.0, 1.0, 0.5, 1.0 / 6.0]).unwrap();
        assert!(close(&e, &expected, 1e-15));
        let log_geo =
            TruncSeries::from_real(&[0.0, 1.0, 1.0 / 2.0, 1.0 / 3.0, 1.0 / 4.0]).unwrap();
        assert!(close(&log_geo.exp().unwrap(), &TruncSeries::from_real(&[1.0; 5]).unwrap(), 1e-15));
    }

    #[test]
    fn exp_rejects_constant_term() {
        assert!(matches!(TruncSeries::one(2).exp(), Err(Error::ConstantTerm { .. })));
        assert!(matches!(TruncSeries::zero(2).log(), Err(Error::ConstantTerm { .. })));
    }

    #[test]
    fn binomial_factor_examples() {
        let s = binomial_factor(c(1.0, 0.0), c(2.0, 0.0), 10);
        for n in 0..=10 {
            assert!((s.coefficient(n).unwrap() - (n as f64 + 1.0)).norm() < 1e-12);
        }
        // (1 - t)^{-binom(2,1)}: the uniform-rotation example with s1 = s2 = 1.
        let s = binomial_factor(c(1.0, 0.0), c(2.0, 0.0), 6);
        assert!((s.coefficient(6).unwrap() - 7.0).norm() < 1e-12);
        let s = binomial_factor(c(0.5, 0.0), c(-1.0, 0.0), 6);
        let expected = TruncSeries::from_real(&[1.0, -0.5, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(close(&s, &expected, 1e-15));
    }

    #[test]
    fn binomial_factor_matches_falling_product() {
        // (1 - c t)^{-e} has coefficients c^n ∏_{j=1}^{n} (e + j - 1) / j.
        let (cc, e) = (c(0.3, -0.7), c(-1.3, 0.4));
        let s = binomial_factor(cc, e, 30);
        let mut expected = c(1.0, 0.0);
        for n in 0..=30 {
            if n > 0 {
                expected *= cc * (e + (n - 1) as f64) / n as f64;
            }
            let got = s.coefficient(n).unwrap();
            assert!((got - expected).norm() <= 1e-12 * expected.norm().max(1.0), "n = {n}");
        }
    }

    #[test]
    fn product_of_factors_examples() {
        let x = c(0.4, 0.2);
        let cancel: FactorList = [(x, c(1.0, 0.0)), (x, c(-1.0, 0.0))].into_iter().collect();
        assert!(close(&product_of_factors(&cancel, 8), &TruncSeries::one(8), 1e-15));

        let geo: FactorList = [(c(1.0, 0.0), c(1.0, 0.0))].into_iter().collect();
        assert!(close(
            &product_of_factors(&geo, 3),
            &TruncSeries::from_real(&[1.0; 4]).unwrap(),
            1e-15
        ));

        // (1 - 0.3 t) / (1 - t) against the explicit Cauchy product of both expansions.
        let list: FactorList =
            [(c(1.0, 0.0), c(1.0, 0.0)), (c(0.3, 0.0), c(-1.0, 0.0))].into_iter().collect();
        let got = product_of_factors(&list, 12);
        let mut numer = vec![c(0.0, 0.0); 13];
        numer[0] = c(1.0, 0.0);
        numer[1] = c(-0.3, 0.0);
        let expected = naive_mul(&vec![c(1.0, 0.0); 13], &numer);
        for n in 0..=12 {
            assert!((got.coefficient(n).unwrap() - expected[n]).norm() < 1e-14);
        }
    }

    #[test]
    fn negated_factor_list_flips_sign_of_t() {
        let list: FactorList = [(c(0.5, 0.1), c(1.5, -0.2))].into_iter().collect();
        let plus = product_of_factors(&list.negated(), 10);
        let minus = product_of_factors(&list, 10);
        for n in 0..=10 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((plus.coefficient(n).unwrap() - minus.coefficient(n).unwrap() * sign).norm() < 1e-13);
        }
    }

    #[test]
    fn exponential_formula_examples() {
        let ones = vec![c(1.0, 0.0); 8];
        let geo = exponential_formula(&ones, 8).unwrap();
        assert!(close(&geo, &TruncSeries::from_real(&[1.0; 9]).unwrap(), 1e-14));
        assert_eq!(exponential_formula(&[c(0.0, 0.0); 5], 5).unwrap(), TruncSeries::one(5));
        assert!(exponential_formula(&ones, 9).is_err());
    }

    fn partition_sum(a: &[Complex64], n: usize) -> Complex64 {
        enumerate_partitions(n)
            .unwrap()
            .iter()
            .map(|l| {
                let prod: Complex64 = l.parts().iter().map(|&p| a[p - 1]).product();
                prod * class_weight_f64(l)
            })
            .sum()
    }

    #[test]
    fn exponential_formula_for_one_minus_x() {
        let x: f64 = 0.5;
        let a: Vec<Complex64> = (1..=6).map(|m| c(1.0 - x.powi(m), 0.0)).collect();
        let s = exponential_formula(&a, 6).unwrap();
        for n in 0..=6 {
            assert!((s.coefficient(n).unwrap() - partition_sum(&a, n)).norm() < 1e-14);
        }
    }

    #[test]
    fn exponential_formula_matches_partition_sums_for_random_sequences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a: Vec<Complex64> = (0..12)
                .map(|_| {
                    let r = rng.random_range(0.0..2.0);
                    let phi = rng.random_range(0.0..std::f64::consts::TAU);
                    Complex64::from_polar(r, phi)
                })
                .collect();
            let s = exponential_formula(&a, 12).unwrap();
            for n in 0..=12 {
                let oracle = partition_sum(&a, n);
                assert!((s.coefficient(n).unwrap() - oracle).norm() <= 1e-10 * oracle.norm().max(1.0));
            }
        }
    }

    #[test]
    fn coefficient_examples() {
        let geo = TruncSeries::from_real(&[1.0; 8]).unwrap();
        assert_eq!(geo.coefficient(7).unwrap(), c(1.0, 0.0));
        assert_eq!(geo.coefficient(8), Err(Error::OrderExceeded { n: 8, order: 7 }));
        let e = TruncSeries::variable(3).exp().unwrap();
        assert_eq!(coefficient(&e, 2).unwrap(), c(0.5, 0.0));
    }

    proptest! {
        #[test]
        fn mul_is_commutative_and_associative(seed in any::<u64>(), order in 0usize..20) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b, d) = (random_series(&mut rng, order), random_series(&mut rng, order), random_series(&mut rng, order));
            prop_assert!(close(&a.mul(&b).unwrap(), &b.mul(&a).unwrap(), 1e-12));
            let left = a.mul(&b).unwrap().mul(&d).unwrap();
            let right = a.mul(&b.mul(&d).unwrap()).unwrap();
            prop_assert!(close(&left, &right, 1e-12));
            prop_assert!(close(&a.mul(&b).unwrap(), &TruncSeries::from_coeffs(naive_mul(a.coeffs(), b.coeffs())).unwrap(), 1e-12));
        }

        #[test]
        fn exp_log_round_trip(seed in any::<u64>(), order in 1usize..25) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut unit = random_series(&mut rng, order).scale(c(0.5, 0.0));
            unit.coeffs[0] = ONE;
            let back = unit.log().unwrap().exp().unwrap();
            prop_assert!(close(&back, &unit, 1e-10));
        }
    }
}
