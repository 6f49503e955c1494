//! Averages over the alternating group and the Weyl groups of `SO(2n)`,
//! `SO(2n+1)` and `SU(n)`.
//!
//! The signature of a permutation of cycle type `λ` is `∏ (-1)^{λ_m + 1}`, so
//! the signed average `E_n[ε f]` has generating function `exp(Σ (-1)^{m+1} a_m t^m / m)`,
//! which is the product `∏ (1 + c t)^{+e}` over the same factors `(c, e)` as the
//! unsigned one. `E_{A_n}[f] = E_n[f] + E_n[ε f]` for `n >= 2`.
//!
//! The Weyl group of `SO(2n)` is `D S_n` with `D` the diagonal sign matrices:
//! averaging over it is `W2` with angles uniform on `{±1}` and `ϑ = θ`. The
//! Weyl group of `SO(2n+1)` is `D A_n`. The Weyl group of `SU(n)` is `S_n`
//! acting on the zero-sum hyperplane, where `det(I - x g)` loses the factor `1 - x`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classfun::{
    check_domain, expect_bruteforce_sn, expect_exact, expect_gf, generating_factors, moments_of, part_values, partition_sum,
    randomized_value, AngleDistribution, CoeffGrid, EvalPoint, MomentTable, Randomization, BRUTE_FORCE_CAP,
};
use crate::error::{Error, Result};
use crate::mc::{stratified_estimate, Estimate};
use crate::partitions::{
    nth_permutation, permutation_count, permutation_cycle_type, permutation_cycles, signature, EXACT_SUM_CAP,
};
use crate::series::{product_of_factors, FactorList};

/// Largest `n` for exhaustive enumeration of signed permutations.
pub const SIGNED_BRUTE_FORCE_CAP: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    SymmetricS,
    AlternatingA,
    /// Weyl group of `SO(2n)`.
    WeylD,
    /// Weyl group of `SO(2n+1)`.
    WeylB,
    /// Weyl group of `SU(n)`.
    WeylSU,
}

/// What is averaged: a class function given by its coefficients, or
/// `Z(x_1)^{s_1} Z(x_2)^{s_2}` with `Z(x) = det(I - x w)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Observable {
    Grid(CoeffGrid),
    CharPoly { s1: u32, s2: u32 },
}

impl Observable {
    pub fn grid(&self) -> CoeffGrid {
        match self {
            Observable::Grid(g) => g.clone(),
            Observable::CharPoly { s1, s2 } => CoeffGrid::char_poly_power(*s1, *s2),
        }
    }
}

/// `(c, e) -> (-c, -e)`: turns `∏ (1 - c t)^{-e}` into `∏ (1 + c t)^{e}`.
fn sign_twisted(factors: &FactorList) -> FactorList {
    factors.factors().iter().map(|f| (-f.c, -f.e)).collect()
}

fn require_pair(n: usize, what: &str) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("{what} is defined by this formula for n >= 2 only")));
    }
    Ok(())
}

fn require_unrandomized(group: GroupKind, dist: &AngleDistribution) -> Result<()> {
    if *dist != AngleDistribution::Dirac1 {
        return Err(Error::InvalidInput(format!(
            "{group:?} supplies its own randomization; pass the Dirac distribution"
        )));
    }
    Ok(())
}

fn sign_moments(f: &CoeffGrid) -> MomentTable {
    let (k1, k2) = f.bounds();
    moments_of(&AngleDistribution::RootsOfUnityConjugatePair(2), k1, k2).expect("p = 2 is valid")
}

/// `E_n[ε f]` by the signed partition sum.
pub fn expect_signed_exact(
    f: &CoeffGrid,
    alpha: &MomentTable,
    variant: Randomization,
    x: &EvalPoint,
    n: usize,
) -> Result<Complex64> {
    if n > EXACT_SUM_CAP {
        return Err(Error::SizeLimit { what: "exact partition sum", n, cap: EXACT_SUM_CAP });
    }
    check_domain(f, x)?;
    let a = part_values(f, alpha, variant, x, n)?;
    partition_sum(&a, n, |l| signature(l) as f64)
}

/// `E_n[ε f] = [t^n] ∏ (1 + c t)^{e}`.
pub fn expect_signed_gf(
    f: &CoeffGrid,
    alpha: &MomentTable,
    variant: Randomization,
    x: &EvalPoint,
    n: usize,
    order: usize,
) -> Result<Complex64> {
    if n > order {
        return Err(Error::OrderExceeded { n, order });
    }
    check_domain(f, x)?;
    let factors = generating_factors(f, alpha, variant, x)?;
    product_of_factors(&sign_twisted(&factors), order).coefficient(n)
}

fn two_term(f: &CoeffGrid, alpha: &MomentTable, variant: Randomization, x: &EvalPoint, n: usize, order: usize) -> Result<Complex64> {
    if n > order {
        return Err(Error::OrderExceeded { n, order });
    }
    check_domain(f, x)?;
    let factors = generating_factors(f, alpha, variant, x)?;
    let minus = product_of_factors(&factors, order).coefficient(n)?;
    let plus = product_of_factors(&sign_twisted(&factors), order).coefficient(n)?;
    Ok(minus + plus)
}

/// `E_{A_n}[f]` as the partition sum with weights `(1 + ε(λ))/z_λ`.
pub fn expect_an_exact(
    f: &CoeffGrid,
    alpha: &MomentTable,
    variant: Randomization,
    x: &EvalPoint,
    n: usize,
) -> Result<Complex64> {
    require_pair(n, "the alternating-group average")?;
    if n > EXACT_SUM_CAP {
        return Err(Error::SizeLimit { what: "exact partition sum", n, cap: EXACT_SUM_CAP });
    }
    check_domain(f, x)?;
    let a = part_values(f, alpha, variant, x, n)?;
    partition_sum(&a, n, |l| 1.0 + signature(l) as f64)
}

/// Group average by partition sums: `E_n[f]`, plus `E_n[ε f]` for the groups
/// built on `A_n`, with the sign moments for the Weyl groups.
pub fn expect_group_exact(
    group: GroupKind,
    obs: &Observable,
    dist: &AngleDistribution,
    variant: Randomization,
    x: &EvalPoint,
    n: usize,
) -> Result<Complex64> {
    let f = obs.grid();
    let (k1, k2) = f.bounds();
    match group {
        GroupKind::SymmetricS => expect_exact(&f, &moments_of(dist, k1, k2)?, variant, x, n),
        GroupKind::AlternatingA => expect_an_exact(&f, &moments_of(dist, k1, k2)?, variant, x, n),
        GroupKind::WeylD => {
            require_unrandomized(group, dist)?;
            expect_exact(&f, &sign_moments(&f), Randomization::W2, x, n)
        }
        GroupKind::WeylB => {
            require_unrandomized(group, dist)?;
            expect_an_exact(&f, &sign_moments(&f), Randomization::W2, x, n)
        }
        GroupKind::WeylSU => {
            require_unrandomized(group, dist)?;
            let Observable::CharPoly { s1, s2 } = *obs else {
                return Err(Error::InvalidInput("the SU(n) formula takes integer exponents s1, s2".into()));
            };
            let divisor = su_divisor(s1, s2, x)?;
            Ok(expect_exact(&f, &moments_of(&AngleDistribution::Dirac1, k1, k2)?, Randomization::W1, x, n)? / divisor)
        }
    }
}

/// Group average through generating functions.
///
/// `dist` and `variant` randomize `S_n` and `A_n`. The Weyl groups supply
/// their own randomization and require `dist = Dirac1`.
#[allow(clippy::too_many_arguments)]
pub fn expect_group_gf(
    group: GroupKind,
    obs: &Observable,
    dist: &AngleDistribution,
    variant: Randomization,
    x: &EvalPoint,
    n: usize,
    order: usize,
) -> Result<Complex64> {
    let f = obs.grid();
    match group {
        GroupKind::SymmetricS => {
            let (k1, k2) = f.bounds();
            Ok(expect_gf(&f, &moments_of(dist, k1, k2)?, variant, x, n, order)?.value)
        }
        GroupKind::AlternatingA => {
            require_pair(n, "the alternating-group average")?;
            let (k1, k2) = f.bounds();
            two_term(&f, &moments_of(dist, k1, k2)?, variant, x, n, order)
        }
        GroupKind::WeylD => {
            require_unrandomized(group, dist)?;
            Ok(expect_gf(&f, &sign_moments(&f), Randomization::W2, x, n, order)?.value)
        }
        GroupKind::WeylB => {
            require_unrandomized(group, dist)?;
            require_pair(n, "the SO(2n+1) Weyl-group formula")?;
            two_term(&f, &sign_moments(&f), Randomization::W2, x, n, order)
        }
        GroupKind::WeylSU => {
            require_unrandomized(group, dist)?;
            let Observable::CharPoly { s1, s2 } = *obs else {
                return Err(Error::InvalidInput("the SU(n) formula takes integer exponents s1, s2".into()));
            };
            expect_su_gf(s1, s2, x, n, order)
        }
    }
}

fn expect_su_gf(s1: u32, s2: u32, x: &EvalPoint, n: usize, order: usize) -> Result<Complex64> {
    if n > order {
        return Err(Error::OrderExceeded { n, order });
    }
    let f = CoeffGrid::char_poly_power(s1, s2);
    check_domain(&f, x)?;
    let one = Complex64::new(1.0, 0.0);
    let divisor = su_divisor(s1, s2, x)?;
    let alpha = moments_of(&AngleDistribution::Dirac1, s1 as usize, s2 as usize)?;
    let series = product_of_factors(&generating_factors(&f, &alpha, Randomization::W1, x)?, order);
    // the divisor carries no t: dividing the coefficient or the whole series must agree
    let outside = series.coefficient(n)? / divisor;
    let inside = series.scale(one / divisor).coefficient(n)?;
    if (outside - inside).norm() > 1e-12 * outside.norm().max(1.0) {
        return Err(Error::Numerical(format!("scalar division is inconsistent: {outside} vs {inside}")));
    }
    Ok(outside)
}

fn su_divisor(s1: u32, s2: u32, x: &EvalPoint) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    if (s1 > 0 && x.x1 == one) || (s2 > 0 && x.x2 == one) {
        return Err(Error::Domain("the SU(n) formula divides by (1 - x_i)^{s_i}; x_i = 1 is excluded".into()));
    }
    Ok((one - x.x1).powu(s1) * (one - x.x2).powu(s2))
}

fn is_even(perm: &[usize]) -> bool {
    signature(&permutation_cycle_type(perm)) == 1
}

/// `det(I - x M)` for a complex matrix `M` with entries given densely.
fn det_one_minus(x: Complex64, m: &DMatrix<Complex64>) -> Complex64 {
    let k = m.nrows();
    (DMatrix::<Complex64>::identity(k, k) - m * x).determinant()
}

/// Matrix of the signed permutation `d g`: `(d g)_{i,j} = d_i [i = σ(j)]`.
fn signed_permutation_matrix(perm: &[usize], signs: u64) -> DMatrix<Complex64> {
    let n = perm.len();
    DMatrix::from_fn(n, n, |i, j| {
        if perm[j] == i {
            Complex64::new(if signs >> i & 1 == 1 { -1.0 } else { 1.0 }, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Matrix of a permutation on `{v : Σ v_i = 0}` in the basis `e_i - e_n`, `i < n`.
fn zero_sum_matrix(perm: &[usize]) -> DMatrix<Complex64> {
    let n = perm.len();
    let last = n - 1;
    let mut m = DMatrix::from_element(last, last, Complex64::new(0.0, 0.0));
    // g(e_i - e_n) = (e_{σ(i)} - e_n) - (e_{σ(n)} - e_n)
    for i in 0..last {
        if perm[i] != last {
            m[(perm[i], i)] += 1.0;
        }
        if perm[last] != last {
            m[(perm[last], i)] -= 1.0;
        }
    }
    m
}

/// Exhaustive group average (Monte Carlo only over the extra angles of `S_n`
/// and `A_n`). Signed permutations are enumerated in full, `2^n n!` elements.
#[allow(clippy::too_many_arguments)]
pub fn brute_force_group(
    group: GroupKind,
    obs: &Observable,
    dist: &AngleDistribution,
    variant: Randomization,
    x: &EvalPoint,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    let f = obs.grid();
    match group {
        GroupKind::SymmetricS => expect_bruteforce_sn(&f, dist, variant, x, n, trials, seed),
        GroupKind::AlternatingA if n < 2 => expect_bruteforce_sn(&f, dist, variant, x, n, trials, seed),
        GroupKind::AlternatingA => {
            if n > BRUTE_FORCE_CAP {
                return Err(Error::SizeLimit { what: "brute force over A_n", n, cap: BRUTE_FORCE_CAP });
            }
            dist.validate()?;
            check_domain(&f, x)?;
            let strata = permutation_count(n)? as u64;
            let draws = crate::classfun::draws_per_stratum(dist.is_deterministic(), trials, strata);
            Ok(stratified_estimate(strata, draws, seed, |s, rng| {
                let perm = nth_permutation(n, s as usize);
                if !is_even(&perm) {
                    return None;
                }
                let count = match variant {
                    Randomization::W1 => permutation_cycles(&perm).len(),
                    Randomization::W2 => n,
                };
                let angles: Vec<_> = (0..count).map(|_| dist.sample(rng)).collect();
                Some(randomized_value(&f, &perm, x, variant, &angles).expect("angle count matches"))
            }))
        }
        GroupKind::WeylD | GroupKind::WeylB => {
            require_unrandomized(group, dist)?;
            if n > SIGNED_BRUTE_FORCE_CAP {
                return Err(Error::SizeLimit { what: "signed permutation enumeration", n, cap: SIGNED_BRUTE_FORCE_CAP });
            }
            check_domain(&f, x)?;
            let sign_count = 1u64 << n;
            let strata = sign_count * permutation_count(n)? as u64;
            let even_only = group == GroupKind::WeylB;
            Ok(stratified_estimate(strata, 1, seed, |s, _| {
                let perm = nth_permutation(n, (s / sign_count) as usize);
                if even_only && !is_even(&perm) {
                    return None;
                }
                let signs = s % sign_count;
                Some(match obs {
                    Observable::CharPoly { s1, s2 } => {
                        let w = signed_permutation_matrix(&perm, signs);
                        det_one_minus(x.x1, &w).powu(*s1) * det_one_minus(x.x2, &w).powu(*s2)
                    }
                    Observable::Grid(g) => {
                        let angles: Vec<_> = (0..n)
                            .map(|i| {
                                let d = Complex64::new(if signs >> i & 1 == 1 { -1.0 } else { 1.0 }, 0.0);
                                (d, d)
                            })
                            .collect();
                        randomized_value(g, &perm, x, Randomization::W2, &angles).expect("one pair per point")
                    }
                })
            }))
        }
        GroupKind::WeylSU => {
            require_unrandomized(group, dist)?;
            let Observable::CharPoly { s1, s2 } = *obs else {
                return Err(Error::InvalidInput("the SU(n) oracle takes integer exponents s1, s2".into()));
            };
            if n > BRUTE_FORCE_CAP {
                return Err(Error::SizeLimit { what: "brute force over S_n", n, cap: BRUTE_FORCE_CAP });
            }
            check_domain(&f, x)?;
            let strata = permutation_count(n)? as u64;
            Ok(stratified_estimate(strata, 1, seed, |s, _| {
                if n == 0 {
                    return Some(Complex64::new(1.0, 0.0));
                }
                let m = zero_sum_matrix(&nth_permutation(n, s as usize));
                Some(det_one_minus(x.x1, &m).powu(s1) * det_one_minus(x.x2, &m).powu(s2))
            }))
        }
    }
}
