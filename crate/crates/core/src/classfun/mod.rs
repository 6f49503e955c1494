//! Class functions of random permutations and their randomized versions.
//!
//! For `f(x_1,x_2) = Σ b_{k1,k2} x_1^{k1} x_2^{k2}` and a permutation with
//! cycle lengths `λ_1, λ_2, ...`, the associated class function is
//! `∏ f(x_1^{λ_m}, x_2^{λ_m})`. `W1` multiplies each cycle's arguments by a
//! fresh angle pair, `W2` attaches an angle pair to every point and uses the
//! product along the cycle. Expectations over `S_n` are available through the
//! exact partition sum, through coefficient extraction from a product
//! generating function, and through brute force over all permutations.

mod angles;
mod grid;

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use angles::{moments_of, AngleAtom, AngleDistribution, MomentTable};
pub use grid::{CoeffGrid, GridKind};

use crate::error::{Error, Result};
use crate::mc::{stratified_estimate, Estimate};
use crate::partitions::{
    class_weight_f64, nth_permutation, permutation_count, permutation_cycles, Partition, PartitionIter,
    EXACT_SUM_CAP,
};
use crate::series::{product_of_factors, FactorList, TruncSeries};

pub(crate) const UNIT_SLACK: f64 = 1e-12;

/// Largest `n` for exhaustive averages over `S_n`.
pub const BRUTE_FORCE_CAP: usize = 8;

/// Step of the central difference used for `d/dx_1`.
pub const DERIVATIVE_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub x1: Complex64,
    pub x2: Complex64,
}

impl EvalPoint {
    pub fn new(x1: Complex64, x2: Complex64) -> Self {
        Self { x1, x2 }
    }

    pub fn univariate(x: Complex64) -> Self {
        Self { x1: x, x2: Complex64::new(0.0, 0.0) }
    }

    pub fn real(x1: f64, x2: f64) -> Self {
        Self::new(Complex64::new(x1, 0.0), Complex64::new(x2, 0.0))
    }

    pub fn coord(&self, dim: usize) -> Complex64 {
        if dim == 0 {
            self.x1
        } else {
            self.x2
        }
    }

    pub fn pow(&self, m: usize) -> (Complex64, Complex64) {
        (self.x1.powu(m as u32), self.x2.powu(m as u32))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Randomization {
    /// One angle pair per cycle.
    W1,
    /// One angle pair per point, multiplied along each cycle.
    W2,
}

/// Domain of the exact and generating-function routes: `|x_i| <= 1` on every
/// variable `f` depends on, and `|x_i| < r_i` when the radius is at most 1.
pub fn check_domain(f: &CoeffGrid, x: &EvalPoint) -> Result<()> {
    let radii = f.radii();
    for dim in 0..2 {
        let xi = x.coord(dim);
        if !(xi.re.is_finite() && xi.im.is_finite()) {
            return Err(Error::Domain(format!("x{} is not finite", dim + 1)));
        }
        if !f.depends_on(dim) {
            continue;
        }
        let r = if dim == 0 { radii.0 } else { radii.1 };
        let a = xi.norm();
        if a > 1.0 + UNIT_SLACK {
            return Err(Error::Domain(format!("|x{}| = {a} > 1", dim + 1)));
        }
        if r <= 1.0 && a >= r {
            return Err(Error::Domain(format!("|x{}| = {a} is not below the radius {r}", dim + 1)));
        }
    }
    Ok(())
}

/// Domain of the asymptotic routes: `|x_i| < min(r_i, 1)` strictly.
pub fn check_strict_domain(f: &CoeffGrid, x: &EvalPoint) -> Result<()> {
    check_domain(f, x)?;
    let radii = f.radii();
    for dim in 0..2 {
        if !f.depends_on(dim) {
            continue;
        }
        let r = if dim == 0 { radii.0 } else { radii.1 };
        let a = x.coord(dim).norm();
        if a >= r.min(1.0) {
            return Err(Error::Domain(format!("|x{}| = {a} must be below min(r, 1) = {}", dim + 1, r.min(1.0))));
        }
    }
    Ok(())
}

/// `∏_m f(x_1^{λ_m}, x_2^{λ_m})`.
pub fn assoc_class_value(f: &CoeffGrid, lambda: &Partition, x: &EvalPoint) -> Result<Complex64> {
    check_domain(f, x)?;
    Ok(lambda
        .parts()
        .iter()
        .map(|&m| {
            let (y1, y2) = x.pow(m);
            f.eval(y1, y2)
        })
        .product())
}

/// Value of the randomized class function on the permutation `perm` for given angles:
/// one pair per cycle (in the order of [`permutation_cycles`]) for `W1`, one per point for `W2`.
pub fn randomized_value(
    f: &CoeffGrid,
    perm: &[usize],
    x: &EvalPoint,
    variant: Randomization,
    angles: &[(Complex64, Complex64)],
) -> Result<Complex64> {
    let cycles = permutation_cycles(perm);
    let expected = match variant {
        Randomization::W1 => cycles.len(),
        Randomization::W2 => perm.len(),
    };
    if angles.len() != expected {
        return Err(Error::InvalidInput(format!("expected {expected} angle pairs, got {}", angles.len())));
    }
    let mut value = Complex64::new(1.0, 0.0);
    for (ci, cycle) in cycles.iter().enumerate() {
        let (mut t, mut v) = match variant {
            Randomization::W1 => angles[ci],
            Randomization::W2 => (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)),
        };
        if variant == Randomization::W2 {
            for &i in cycle {
                t *= angles[i].0;
                v *= angles[i].1;
            }
        }
        let (y1, y2) = x.pow(cycle.len());
        value *= f.eval(t * y1, v * y2);
    }
    Ok(value)
}

/// Per-part values `a_m`, `1 <= m <= n`, such that the expectation is
/// `Σ_{λ⊢n} (1/z_λ) ∏ a_{λ_i}`. Index 0 is unused.
pub(crate) fn part_values(
    f: &CoeffGrid,
    alpha: &MomentTable,
    variant: Randomization,
    x: &EvalPoint,
    n: usize,
) -> Result<Vec<Complex64>> {
    let mut a = vec![Complex64::new(0.0, 0.0); n + 1];
    match variant {
        Randomization::W1 => {
            let folded = f.fold_moments(alpha)?;
            for (m, am) in a.iter_mut().enumerate().skip(1) {
                let (y1, y2) = x.pow(m);
                *am = folded.eval(y1, y2);
            }
        }
        Randomization::W2 => {
            alpha.check_covers(f.bounds())?;
            for (m, am) in a.iter_mut().enumerate().skip(1) {
                let (y1, y2) = x.pow(m);
                *am = f
                    .nonzero()
                    .map(|(k1, k2, b)| {
                        b * y1.powu(k1 as u32) * y2.powu(k2 as u32) * alpha.get(k1, k2).powu(m as u32)
                    })
                    .sum();
            }
        }
    }
    Ok(a)
}

/// `Σ_{λ⊢n} w(λ)/z_λ ∏ a_{λ_i}`.
pub(crate) fn partition_sum(a: &[Complex64], n: usize, weight: impl Fn(&Partition) -> f64) -> Result<Complex64> {
    if n > EXACT_SUM_CAP {
        return Err(Error::SizeLimit { what: "exact partition sum", n, cap: EXACT_SUM_CAP });
    }
    let mut total = Complex64::new(0.0, 0.0);
    for lambda in PartitionIter::new(n) {
        let w = weight(&lambda);
        if w == 0.0 {
            continue;
        }
        let prod: Complex64 = lambda.parts().iter().map(|&m| a[m]).product();
        total += prod * (w * class_weight_f64(&lambda));
    }
    Ok(total)
}

/// Exact `E_n` of the randomized class function by summing over cycle types.
pub fn expect_exact(
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
    partition_sum(&a, n, |_| 1.0)
}

/// Factors `(c, e)` of the generating function `∏ (1 - c t)^{-e}`:
/// `W1` uses `c = x_1^{k1} x_2^{k2}, e = b α`; `W2` uses `c = α x_1^{k1} x_2^{k2}, e = b`.
pub fn generating_factors(
    f: &CoeffGrid,
    alpha: &MomentTable,
    variant: Randomization,
    x: &EvalPoint,
) -> Result<FactorList> {
    alpha.check_covers(f.bounds())?;
    Ok(f.nonzero()
        .map(|(k1, k2, b)| {
            let mono = x.x1.powu(k1 as u32) * x.x2.powu(k2 as u32);
            let a = alpha.get(k1, k2);
            match variant {
                Randomization::W1 => (mono, b * a),
                Randomization::W2 => (a * mono, b),
            }
        })
        .collect())
}

/// Coefficient value with a bound on the error caused by truncating a holomorphic `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GfValue {
    pub value: Complex64,
    /// Zero for polynomial grids.
    pub truncation_bound: f64,
}

/// `[t^n]` of the product generating function, computed to series order `order >= n`.
pub fn expect_gf(
    f: &CoeffGrid,
    alpha: &MomentTable,
    variant: Randomization,
    x: &EvalPoint,
    n: usize,
    order: usize,
) -> Result<GfValue> {
    if n > order {
        return Err(Error::OrderExceeded { n, order });
    }
    check_domain(f, x)?;
    let factors = generating_factors(f, alpha, variant, x)?;
    let series = product_of_factors(&factors, order);
    let value = series.coefficient(n)?;
    let truncation_bound = match f.tail_constant() {
        None => 0.0,
        Some(c) => truncation_bound(f, c, &factors, x, n, order)?,
    };
    Ok(GfValue { value, truncation_bound })
}

/// [`expect_gf`] that fails when the truncation bound exceeds `tolerance`.
pub fn expect_gf_within(
    f: &CoeffGrid,
    alpha: &MomentTable,
    variant: Randomization,
    x: &EvalPoint,
    n: usize,
    order: usize,
    tolerance: f64,
) -> Result<GfValue> {
    let v = expect_gf(f, alpha, variant, x, n, order)?;
    if v.truncation_bound > tolerance {
        return Err(Error::TruncationExceeded { bound: v.truncation_bound, tolerance });
    }
    Ok(v)
}

// The unseen coefficients add `T(t) = Σ_m τ_m t^m` to the log of the product,
// with `|τ_m| <= (C/m) Σ_{outside} (ρ_1|x_1|^m)^{k1} (ρ_2|x_2|^m)^{k2}`.
// Then `|[t^n](exp(L+T) - exp(L))| <= [t^n] exp(|L|)(exp(T^) - 1)` coefficientwise.
fn truncation_bound(
    f: &CoeffGrid,
    c: f64,
    factors: &FactorList,
    x: &EvalPoint,
    n: usize,
    order: usize,
) -> Result<f64> {
    let (rho1, rho2) = f.decay_rates();
    let (a1, a2) = (x.x1.norm(), x.x2.norm());
    let mut tail = vec![0.0; order + 1];
    for (m, t) in tail.iter_mut().enumerate().skip(1) {
        let u1 = if f.depends_on(0) { rho1 * a1.powi(m as i32) } else { 0.0 };
        let u2 = if f.depends_on(1) { rho2 * a2.powi(m as i32) } else { 0.0 };
        *t = c / m as f64 * f.outside_box_sum(u1, u2);
    }
    if tail.iter().any(|t| !t.is_finite()) {
        return Ok(f64::INFINITY);
    }
    let l_abs = factors.log_series(order).abs();
    let t_hat = TruncSeries::from_real(&tail)?;
    let base = l_abs.exp()?;
    let grown = l_abs.add(&t_hat)?.exp()?;
    Ok(grown.sub(&base)?.coefficient(n)?.re.max(0.0))
}

/// `d/dx_1` of [`expect_gf`] by a central difference with step [`DERIVATIVE_STEP`].
/// Approximate: the error is `O(h^2)` plus rounding of order `1e-11`.
pub fn expect_gf_dx1(
    f: &CoeffGrid,
    alpha: &MomentTable,
    variant: Randomization,
    x: &EvalPoint,
    n: usize,
    order: usize,
) -> Result<Complex64> {
    let h = DERIVATIVE_STEP;
    let plus = EvalPoint::new(x.x1 + h, x.x2);
    let minus = EvalPoint::new(x.x1 - h, x.x2);
    let hi = expect_gf(f, alpha, variant, &plus, n, order)?.value;
    let lo = expect_gf(f, alpha, variant, &minus, n, order)?.value;
    Ok((hi - lo) / (2.0 * h))
}

/// Angle draws per permutation so that the total reaches `trials`.
pub(crate) fn draws_per_stratum(deterministic: bool, trials: u64, strata: u64) -> u64 {
    if deterministic {
        1
    } else {
        trials.div_ceil(strata.max(1)).max(2)
    }
}

/// Literal average over all `n!` permutations, with angles sampled per cycle
/// (`W1`) or per point (`W2`). Exact, with zero standard error, when the angle
/// law is deterministic.
pub fn expect_bruteforce_sn(
    f: &CoeffGrid,
    dist: &AngleDistribution,
    variant: Randomization,
    x: &EvalPoint,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    if n > BRUTE_FORCE_CAP {
        return Err(Error::SizeLimit { what: "brute force over S_n", n, cap: BRUTE_FORCE_CAP });
    }
    dist.validate()?;
    check_domain(f, x)?;
    let strata = permutation_count(n)? as u64;
    let draws = draws_per_stratum(dist.is_deterministic(), trials, strata);
    Ok(stratified_estimate(strata, draws, seed, |s, rng| {
        let perm = nth_permutation(n, s as usize);
        let count = match variant {
            Randomization::W1 => permutation_cycles(&perm).len(),
            Randomization::W2 => n,
        };
        let angles: Vec<_> = (0..count).map(|_| dist.sample(rng)).collect();
        Some(randomized_value(f, &perm, x, variant, &angles).expect("angle count matches"))
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixOracle {
    pub estimate: Estimate,
    /// Largest `|det(I - xDg) - cycle formula|` over all draws.
    pub max_discrepancy: f64,
}

/// Tolerance for agreement of the determinant with the cycle product.
pub const DETERMINANT_TOLERANCE: f64 = 1e-10;

/// Average of `det(I - x D g)` over permutation matrices `g` and random
/// diagonal `D = diag(θ_1..θ_n)`, checking each determinant against
/// `∏_cycles (1 - x^{len} ∏ θ_i)`.
pub fn matrix_oracle_w2(
    x: Complex64,
    dist: &AngleDistribution,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<MatrixOracle> {
    if n > BRUTE_FORCE_CAP {
        return Err(Error::SizeLimit { what: "matrix oracle", n, cap: BRUTE_FORCE_CAP });
    }
    dist.validate()?;
    if x.norm().is_nan() || x.norm() > 1.0 + UNIT_SLACK {
        return Err(Error::Domain(format!("|x| = {} > 1", x.norm())));
    }
    let strata = permutation_count(n)? as u64;
    let draws = draws_per_stratum(dist.is_deterministic(), trials, strata);
    let worst = AtomicU64::new(0f64.to_bits());
    let estimate = stratified_estimate(strata, draws, seed, |s, rng| {
        let perm = nth_permutation(n, s as usize);
        let theta: Vec<Complex64> = (0..n).map(|_| dist.sample(rng).0).collect();
        // (D g)_{i,j} = θ_i [i = σ(j)]
        let m = DMatrix::from_fn(n, n, |i, j| {
            let dg = if perm[j] == i { theta[i] } else { Complex64::new(0.0, 0.0) };
            let id = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            id - x * dg
        });
        let det = m.determinant();
        let formula: Complex64 = permutation_cycles(&perm)
            .iter()
            .map(|c| Complex64::new(1.0, 0.0) - x.powu(c.len() as u32) * c.iter().map(|&i| theta[i]).product::<Complex64>())
            .product();
        worst.fetch_max((det - formula).norm().to_bits(), Ordering::Relaxed);
        Some(det)
    });
    let max_discrepancy = f64::from_bits(worst.into_inner());
    if max_discrepancy > DETERMINANT_TOLERANCE {
        return Err(Error::Numerical(format!(
            "determinant differs from the cycle product by {max_discrepancy:e}"
        )));
    }
    Ok(MatrixOracle { estimate, max_discrepancy })
}
