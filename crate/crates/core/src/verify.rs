//! Named invariant suites. Each property is checked on seeded random inputs
//! and reported with the worst discrepancy seen.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::asymptotics::{asymptotic_expect, binom_complex, gamma_complex, reduction_check};
use crate::classfun::{
    expect_bruteforce_sn, expect_exact, expect_gf, moments_of, AngleAtom, AngleDistribution, CoeffGrid, EvalPoint,
    Randomization,
};
use crate::error::{Error, Result};
use crate::feller::{bits_to_cycle_type, cycle_type_frequencies, cycle_type_to_bits, mc_expect_w1, FellerSample};
use crate::groups::{
    brute_force_group, expect_an_exact, expect_group_gf, expect_signed_exact, expect_signed_gf, GroupKind, Observable,
};
use crate::partitions::{class_sizes_by_enumeration, class_weight, class_weight_f64, enumerate_partitions, z_of, Partition};
use crate::series::binomial_factor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    ClassEquation,
    GfVsExact,
    Feller,
    Asymptotics,
    Groups,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::ClassEquation, Suite::GfVsExact, Suite::Feller, Suite::Asymptotics, Suite::Groups];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ClassEquation => "class-equation",
            Suite::GfVsExact => "gf-vs-exact",
            Suite::Feller => "feller",
            Suite::Asymptotics => "asymptotics",
            Suite::Groups => "groups",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub property: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub properties: Vec<PropertyResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }
}

/// Polynomial grid with `K_i <= max_k` and coefficients uniform on the disk of radius `max_abs`.
pub fn random_polynomial_grid<R: Rng + ?Sized>(rng: &mut R, max_k: usize, max_abs: f64) -> CoeffGrid {
    let k1 = rng.random_range(0..=max_k);
    let k2 = rng.random_range(0..=max_k);
    let rows = (0..=k1).map(|_| (0..=k2).map(|_| random_in_disk(rng, max_abs)).collect()).collect();
    CoeffGrid::polynomial(rows).expect("rectangular rows")
}

pub fn random_in_disk<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Complex64 {
    let r = radius * rng.random::<f64>().sqrt();
    Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
}

/// The four angle laws with a fixed two-atom list.
pub fn sample_distributions() -> Vec<AngleDistribution> {
    vec![
        AngleDistribution::Dirac1,
        AngleDistribution::UniformConjugatePair,
        AngleDistribution::RootsOfUnityConjugatePair(3),
        AngleDistribution::AtomList(vec![
            AngleAtom { theta: Complex64::from_polar(1.0, 0.4), vartheta: Complex64::from_polar(1.0, -1.1), prob: 0.3 },
            AngleAtom { theta: Complex64::new(-1.0, 0.0), vartheta: Complex64::new(0.0, 1.0), prob: 0.7 },
        ]),
    ]
}

fn record(property: &str, passed: bool, detail: String) -> PropertyResult {
    PropertyResult { property: property.into(), passed, detail }
}

fn worst_record(property: &str, worst: f64, tol: f64) -> PropertyResult {
    record(property, worst < tol, format!("max discrepancy {worst:.3e}, tolerance {tol:.0e}"))
}

fn relative(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteReport> {
    let properties = match suite {
        Suite::ClassEquation => class_equation()?,
        Suite::GfVsExact => gf_vs_exact(seed)?,
        Suite::Feller => feller(seed)?,
        Suite::Asymptotics => asymptotics(seed)?,
        Suite::Groups => groups(seed)?,
    };
    Ok(SuiteReport { suite: suite.name().into(), seed, properties })
}

/// `p(n)` by Euler's pentagonal recurrence.
fn partition_numbers(n_max: usize) -> Vec<BigUint> {
    let mut p = vec![BigUint::one()];
    for n in 1..=n_max {
        let (mut plus, mut minus) = (BigUint::zero(), BigUint::zero());
        for k in 1.. {
            let g1 = k * (3 * k - 1) / 2;
            if g1 > n {
                break;
            }
            let target = if k % 2 == 1 { &mut plus } else { &mut minus };
            *target += &p[n - g1];
            let g2 = k * (3 * k + 1) / 2;
            if g2 <= n {
                *target += &p[n - g2];
            }
        }
        p.push(plus - minus);
    }
    p
}

fn class_equation() -> Result<Vec<PropertyResult>> {
    let mut out = Vec::new();

    let bad: Vec<usize> = (0..=20)
        .filter(|&n| {
            let total: BigRational = enumerate_partitions(n).unwrap().iter().map(class_weight).sum();
            !total.is_one()
        })
        .collect();
    out.push(record("class_weights_sum_to_one", bad.is_empty(), format!("n in 0..=20, failures {bad:?}")));

    let p = partition_numbers(60);
    let bad: Vec<usize> = (0..=60).filter(|&n| BigUint::from(enumerate_partitions(n).unwrap().len()) != p[n]).collect();
    out.push(record("partition_count_matches_pentagonal_recurrence", bad.is_empty(), format!("n in 0..=60, failures {bad:?}")));

    let mut bad = Vec::new();
    for n in 0..=7 {
        let counted = class_sizes_by_enumeration(n)?;
        let factorial: BigUint = (1..=n).map(BigUint::from).product();
        for (lambda, size) in &counted {
            if BigUint::from(*size) * z_of(lambda) != factorial {
                bad.push(lambda.to_string());
            }
        }
        if counted.len() != enumerate_partitions(n)?.len() {
            bad.push(format!("n = {n}: class count"));
        }
    }
    out.push(record("class_sizes_match_permutation_enumeration", bad.is_empty(), format!("n in 0..=7, failures {bad:?}")));
    Ok(out)
}

fn gf_vs_exact(seed: u64) -> Result<Vec<PropertyResult>> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let one_minus_x = CoeffGrid::univariate_real(&[1.0, -1.0])?;
    let alpha = moments_of(&AngleDistribution::Dirac1, 1, 0)?;
    let mut worst = 0.0f64;
    for x in [Complex64::new(0.1, 0.0), Complex64::new(0.5, 0.0), Complex64::new(0.9, 0.0), Complex64::new(0.3, 0.4)] {
        let p = EvalPoint::univariate(x);
        for n in 1..=12 {
            let e = expect_exact(&one_minus_x, &alpha, Randomization::W1, &p, n)?;
            let g = expect_gf(&one_minus_x, &alpha, Randomization::W1, &p, n, n)?.value;
            worst = worst.max((e - (1.0 - x)).norm()).max((g - (1.0 - x)).norm());
        }
    }
    out.push(worst_record("char_poly_mean_is_one_minus_x", worst, 1e-10));

    for variant in [Randomization::W1, Randomization::W2] {
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let f = random_polynomial_grid(&mut rng, 4, 2.0);
            let x = EvalPoint::new(random_in_disk(&mut rng, 0.9), random_in_disk(&mut rng, 0.9));
            let (k1, k2) = f.bounds();
            for dist in sample_distributions() {
                let alpha = moments_of(&dist, k1, k2)?;
                for n in 0..=12 {
                    let e = expect_exact(&f, &alpha, variant, &x, n)?;
                    let g = expect_gf(&f, &alpha, variant, &x, n, 12)?.value;
                    worst = worst.max(relative(g, e));
                }
            }
        }
        let name = match variant {
            Randomization::W1 => "exact_equals_gf_w1",
            Randomization::W2 => "exact_equals_gf_w2",
        };
        out.push(worst_record(name, worst, 1e-9));
    }

    let f = CoeffGrid::char_poly_power(1, 1);
    let alpha = moments_of(&AngleDistribution::UniformConjugatePair, 1, 1)?;
    let x = EvalPoint::new(Complex64::from_polar(1.0, 0.7), Complex64::from_polar(1.0, -0.7));
    let mut worst = 0.0f64;
    for n in 1..=10 {
        let g = expect_gf(&f, &alpha, Randomization::W1, &x, n, n)?.value;
        worst = worst.max((g - (n as f64 + 1.0)).norm());
    }
    out.push(worst_record("uniform_rotation_moment_is_n_plus_one", worst, 1e-9));
    Ok(out)
}

fn feller(seed: u64) -> Result<Vec<PropertyResult>> {
    let mut out = Vec::new();

    let word = "00000000100101011";
    let lambda = bits_to_cycle_type(word)?;
    let ok = lambda == Partition::new(vec![9, 3, 2, 2, 1])? && cycle_type_to_bits(&lambda) == word;
    out.push(record("bit_word_round_trip", ok, format!("{word} -> {lambda}")));

    let (n, samples) = (6, 200_000u64);
    let freq = cycle_type_frequencies(n, samples, seed);
    let tv: f64 = enumerate_partitions(n)?
        .iter()
        .map(|l| {
            let emp = *freq.get(l).unwrap_or(&0) as f64 / samples as f64;
            (emp - class_weight_f64(l)).abs()
        })
        .sum::<f64>()
        / 2.0;
    out.push(record("cycle_type_law", tv < 1e-2, format!("n = {n}, {samples} samples, total variation {tv:.3e}")));

    let (n, draws) = (20, 20_000u64);
    let mut pathwise = true;
    let mut sums = [0.0f64; 5];
    let mut squares = [0.0f64; 5];
    for i in 0..draws {
        let s = FellerSample::draw(n, 4 * n, 5, seed, i)?;
        pathwise &= s.pathwise_bound_holds()?;
        for m in 1..=5 {
            let d = (s.c.get(m) as f64 - s.y.get(m) as f64).abs();
            sums[m - 1] += d;
            squares[m - 1] += d * d;
        }
    }
    out.push(record("pathwise_coupling_bound", pathwise, format!("n = {n}, {draws} samples")));
    let bound = 2.0 / (n as f64 + 1.0);
    let mut ok = true;
    let mut detail = Vec::new();
    for m in 0..5 {
        let k = draws as f64;
        let mean = sums[m] / k;
        let se = ((squares[m] / k - mean * mean).max(0.0) / (k - 1.0)).sqrt();
        ok &= mean <= bound + 3.0 * se;
        detail.push(format!("m={} {mean:.4}", m + 1));
    }
    out.push(record("mean_coupling_bound", ok, format!("bound {bound:.4}: {}", detail.join(", "))));

    let f = CoeffGrid::univariate_real(&[1.0, -1.0])?;
    let x = Complex64::new(0.3, 0.0);
    let est = mc_expect_w1(&f, x, 50, 100_000, seed)?;
    let ok = est.estimate().within(1.0 - x, 3.0);
    out.push(record("char_poly_monte_carlo", ok, format!("{:.5} +- {:.1e} vs 0.7", est.value_re, est.stderr)));
    Ok(out)
}

fn asymptotics(seed: u64) -> Result<Vec<PropertyResult>> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut worst = 0.0f64;
    for _ in 0..20 {
        let s = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        // coefficients of (1 - t)^{-s}
        let series = binomial_factor(Complex64::new(1.0, 0.0), s, 50);
        for k in 0..=50 {
            worst = worst.max(relative(series.coefficient(k)?, binom_complex(s + (k as f64 - 1.0), k)));
        }
    }
    out.push(worst_record("newton_series_coefficients", worst, 1e-10));

    let mut worst = 0.0f64;
    for _ in 0..50 {
        let z = Complex64::new(rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0));
        if crate::asymptotics::nonpositive_integer_near(z).is_some() {
            continue;
        }
        worst = worst.max(relative(gamma_complex(z + 1.0)?, z * gamma_complex(z)?));
    }
    out.push(worst_record("gamma_recurrence", worst, 1e-12));

    let x = EvalPoint::real(0.3, 0.2);
    let mut ok = true;
    let mut worst_final = 0.0f64;
    for i in 0..5 {
        let mut f = random_polynomial_grid(&mut rng, 3, 1.0);
        let b00 = [Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(0.5, 0.5)][i % 3];
        f = set_b00(&f, b00);
        let alpha = moments_of(&AngleDistribution::Dirac1, f.bounds().0, f.bounds().1)?;
        let report = reduction_check(&f, &alpha, Randomization::W1, &x, &[50, 400])?;
        ok &= report.trend_ok && report.rows[1].ratio_error < 0.05;
        worst_final = worst_final.max(report.rows[1].ratio_error);
    }
    out.push(record("ratio_tends_to_one", ok, format!("max |ratio - 1| at n = 400: {worst_final:.3e}")));

    let f = CoeffGrid::univariate_real(&[0.0, 1.0])?;
    let alpha = moments_of(&AngleDistribution::Dirac1, 1, 0)?;
    let ns: Vec<usize> = (1..=10).map(|k| 20 * k).collect();
    let x = EvalPoint::univariate(Complex64::new(0.5, 0.0));
    let report = reduction_check(&f, &alpha, Randomization::W1, &x, &ns)?;
    let values: Vec<f64> = report.rows.iter().map(|r| r.expect.norm()).collect();
    let ok = values.windows(2).all(|w| w[1] < w[0]) && values.last().is_some_and(|v| *v < 1e-3);
    let leading = asymptotic_expect(&f, &alpha, Randomization::W1, &x, 200)?.leading;
    out.push(record(
        "degenerate_regime_decays",
        ok && leading == Complex64::new(0.0, 0.0),
        format!("|E_200| = {:.3e}", values.last().copied().unwrap_or(f64::NAN)),
    ));
    Ok(out)
}

/// Copy of `f` with `b_{0,0}` replaced.
pub fn set_b00(f: &CoeffGrid, b00: Complex64) -> CoeffGrid {
    let (k1, k2) = f.bounds();
    let rows = (0..=k1)
        .map(|i| (0..=k2).map(|j| if i == 0 && j == 0 { b00 } else { f.get(i, j) }).collect())
        .collect();
    CoeffGrid::polynomial(rows).expect("rectangular rows")
}

fn groups(seed: u64) -> Result<Vec<PropertyResult>> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirac = AngleDistribution::Dirac1;

    let mut worst = 0.0f64;
    for _ in 0..5 {
        let f = random_polynomial_grid(&mut rng, 3, 2.0);
        let x = EvalPoint::new(random_in_disk(&mut rng, 0.9), random_in_disk(&mut rng, 0.9));
        let alpha = moments_of(&dirac, f.bounds().0, f.bounds().1)?;
        let obs = Observable::Grid(f.clone());
        for n in 2..=7 {
            let exact = expect_an_exact(&f, &alpha, Randomization::W1, &x, n)?;
            let gf = expect_group_gf(GroupKind::AlternatingA, &obs, &dirac, Randomization::W1, &x, n, n)?;
            let bf = brute_force_group(GroupKind::AlternatingA, &obs, &dirac, Randomization::W1, &x, n, 1, seed)?.mean;
            worst = worst.max(relative(gf, exact)).max(relative(bf, exact));
        }
    }
    out.push(worst_record("alternating_three_routes", worst, 1e-9));

    let mut worst = 0.0f64;
    for _ in 0..5 {
        let f = random_polynomial_grid(&mut rng, 3, 2.0);
        let x = EvalPoint::new(random_in_disk(&mut rng, 0.9), random_in_disk(&mut rng, 0.9));
        let alpha = moments_of(&AngleDistribution::UniformConjugatePair, f.bounds().0, f.bounds().1)?;
        for n in 0..=12 {
            let e = expect_signed_exact(&f, &alpha, Randomization::W1, &x, n)?;
            let g = expect_signed_gf(&f, &alpha, Randomization::W1, &x, n, 12)?;
            worst = worst.max(relative(g, e));
        }
    }
    out.push(worst_record("signed_product_matches_signed_sum", worst, 1e-9));

    let mut worst = 0.0f64;
    for n in 2..=20 {
        let v = expect_group_gf(GroupKind::AlternatingA, &Observable::Grid(CoeffGrid::one()), &dirac, Randomization::W1, &EvalPoint::real(0.5, 0.5), n, n)?;
        worst = worst.max((v - 1.0).norm());
    }
    out.push(worst_record("alternating_mean_of_one", worst, 1e-12));

    let mut worst = 0.0f64;
    let x = EvalPoint::new(random_in_disk(&mut rng, 0.9), random_in_disk(&mut rng, 0.9));
    for (s1, s2) in [(1, 0), (2, 0), (1, 1), (2, 2)] {
        let obs = Observable::CharPoly { s1, s2 };
        let w2_alpha = moments_of(&AngleDistribution::RootsOfUnityConjugatePair(2), s1 as usize, s2 as usize)?;
        for n in 1..=4 {
            let gf = expect_group_gf(GroupKind::WeylD, &obs, &dirac, Randomization::W2, &x, n, n)?;
            let bf = brute_force_group(GroupKind::WeylD, &obs, &dirac, Randomization::W2, &x, n, 1, seed)?.mean;
            let w2 = expect_gf(&obs.grid(), &w2_alpha, Randomization::W2, &x, n, n)?.value;
            worst = worst.max(relative(gf, bf)).max(relative(w2, bf));
            if n >= 2 {
                let gf = expect_group_gf(GroupKind::WeylB, &obs, &dirac, Randomization::W2, &x, n, n)?;
                let bf = brute_force_group(GroupKind::WeylB, &obs, &dirac, Randomization::W2, &x, n, 1, seed)?.mean;
                worst = worst.max(relative(gf, bf));
            }
        }
    }
    out.push(worst_record("weyl_signed_permutation_enumeration", worst, 1e-9));

    let mut worst = 0.0f64;
    for (s1, s2) in [(1, 0), (1, 1), (2, 1)] {
        let obs = Observable::CharPoly { s1, s2 };
        for n in 1..=4 {
            let gf = expect_group_gf(GroupKind::WeylSU, &obs, &dirac, Randomization::W1, &x, n, n)?;
            let bf = brute_force_group(GroupKind::WeylSU, &obs, &dirac, Randomization::W1, &x, n, 1, seed)?.mean;
            worst = worst.max(relative(gf, bf));
        }
    }
    out.push(worst_record("su_matches_zero_sum_subspace", worst, 1e-9));

    // the symmetric group goes through the same brute-force plumbing
    let f = CoeffGrid::univariate_real(&[1.0, -1.0])?;
    let bf = expect_bruteforce_sn(&f, &dirac, Randomization::W1, &EvalPoint::real(0.3, 0.0), 5, 1, seed)?;
    out.push(worst_record("symmetric_char_poly_brute_force", (bf.mean - 0.7).norm(), 1e-12));
    Ok(out)
}
