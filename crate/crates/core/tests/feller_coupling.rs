use num_complex::Complex64;
use perm_moments::classfun::{expect_gf, moments_of, AngleDistribution, CoeffGrid, EvalPoint, Randomization};
use perm_moments::feller::{
    b_event, bits_to_cycle_type, cycle_type_frequencies, cycle_type_to_bits, feller_word, mc_expect_w1,
    mc_expect_w1_infinity, sample_xi, spacings, y_counts, FellerSample, XiSequence,
};
use perm_moments::asymptotics::limit_mean_w1_infinity;
use perm_moments::partitions::{class_weight_f64, enumerate_partitions, Partition};
use perm_moments::Error;

const SEED: u64 = 314_159;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Binomial proportion within `k` standard errors of `p`.
fn proportion_ok(hits: u64, trials: u64, p: f64, k: f64) -> bool {
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    (hits as f64 / trials as f64 - p).abs() <= k * se
}

#[test]
fn word_examples() {
    let xi = XiSequence::parse("100010001").unwrap();
    let counts: Vec<(usize, usize)> = spacings(&xi, 8).unwrap().iter().collect();
    assert_eq!(counts, vec![(4, 2)]);
    assert_eq!(feller_word(&xi, 8).unwrap(), "00010001");
    assert_eq!(bits_to_cycle_type("00010001").unwrap(), Partition::new(vec![4, 4]).unwrap());
    assert_eq!(bits_to_cycle_type("1").unwrap(), Partition::new(vec![1]).unwrap());
    assert_eq!(cycle_type_to_bits(&Partition::new(vec![3, 1]).unwrap()), "0011");
    assert!(matches!(bits_to_cycle_type("0010"), Err(Error::MalformedWord(_))));
    assert!(matches!(bits_to_cycle_type("01x1"), Err(Error::MalformedWord(_))));
    assert!(XiSequence::parse("0101").is_err());
    assert!(matches!(spacings(&xi, 12), Err(Error::HorizonExceedsSample { .. })));
}

#[test]
fn words_round_trip_for_every_partition() {
    for n in 1..=12 {
        for l in enumerate_partitions(n).unwrap() {
            let w = cycle_type_to_bits(&l);
            assert_eq!(w.len(), n);
            assert_eq!(bits_to_cycle_type(&w).unwrap(), l);
        }
    }
}

#[test]
fn bit_means_are_one_over_j() {
    let trials = 40_000u64;
    let (mut two, mut ten) = (0u64, 0u64);
    for i in 0..trials {
        let xi = sample_xi(12, SEED + i).unwrap();
        two += xi.bit(2).unwrap() as u64;
        ten += xi.bit(10).unwrap() as u64;
    }
    assert!(proportion_ok(two, trials, 0.5, 4.0));
    assert!(proportion_ok(ten, trials, 0.1, 4.0));
}

#[test]
fn spacing_counts_are_poisson_means() {
    let trials = 20_000u64;
    let len = 20_000;
    let mut sums = [0f64; 3];
    let mut cross = 0f64;
    let mut sq = [0f64; 2];
    for i in 0..trials {
        let xi = sample_xi(len, SEED ^ i).unwrap();
        let y = y_counts(&xi, 3).unwrap();
        for m in 1..=3 {
            sums[m - 1] += y.get(m) as f64;
        }
        let (y1, y2) = (y.get(1) as f64, y.get(2) as f64);
        cross += y1 * y2;
        sq[0] += y1 * y1;
        sq[1] += y2 * y2;
    }
    let t = trials as f64;
    for m in 1..=3 {
        let mean = sums[m - 1] / t;
        let se = (1.0 / m as f64 / t).sqrt();
        assert!((mean - 1.0 / m as f64).abs() <= 4.0 * se, "m = {m}: {mean}");
    }
    let (m1, m2) = (sums[0] / t, sums[1] / t);
    let cov = cross / t - m1 * m2;
    let corr = cov / ((sq[0] / t - m1 * m1) * (sq[1] / t - m2 * m2)).sqrt();
    assert!(corr.abs() < 4.0 / t.sqrt(), "corr = {corr}");
}

#[test]
fn b_event_probability() {
    let trials = 200_000u64;
    let hits = (0..trials).filter(|&i| b_event(&sample_xi(22, SEED + 7 * i).unwrap(), 20, 4).unwrap()).count() as u64;
    assert!(proportion_ok(hits, trials, 1.0 / 21.0, 3.5), "{hits}");
    let xi = XiSequence::parse("1000").unwrap();
    assert!(b_event(&xi, 3, 3).unwrap());
    assert!(!b_event(&xi, 3, 2).unwrap());
    assert!(b_event(&xi, 3, 4).is_err());
    assert!(b_event(&xi, 4, 1).is_err());
}

#[test]
fn coupling_mismatch_shrinks() {
    let trials = 4_000u64;
    let rates: Vec<f64> = [10usize, 50, 500]
        .iter()
        .map(|&n| {
            let bad = (0..trials)
                .filter(|&i| {
                    let s = FellerSample::draw(n, 10 * n + 100, 3, SEED, i).unwrap();
                    assert!(s.pathwise_bound_holds().unwrap());
                    (1..=3).any(|m| s.c.get(m) as u64 != s.y.get(m))
                })
                .count();
            bad as f64 / trials as f64
        })
        .collect();
    assert!(rates[0] > rates[1] && rates[1] > rates[2], "{rates:?}");
    assert!(rates[2] < 0.05, "{rates:?}");
}

#[test]
fn cycle_types_follow_the_class_equation() {
    let n = 5;
    let samples = 200_000;
    let freq = cycle_type_frequencies(n, samples, SEED);
    let tv: f64 = enumerate_partitions(n)
        .unwrap()
        .iter()
        .map(|l| (*freq.get(l).unwrap_or(&0) as f64 / samples as f64 - class_weight_f64(l)).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv < 1e-2, "tv = {tv}");
}

#[test]
fn sampler_matches_the_series_route() {
    let f = CoeffGrid::univariate_real(&[1.0, 0.5, -0.25, 0.1]).unwrap();
    let x = c(0.5, 0.3);
    let alpha = moments_of(&AngleDistribution::Dirac1, 3, 0).unwrap();
    let want = expect_gf(&f, &alpha, Randomization::W1, &EvalPoint::univariate(x), 12, 12).unwrap().value;
    let est = mc_expect_w1(&f, x, 12, 100_000, SEED).unwrap();
    assert!(est.estimate().within(want, 3.0), "{est:?} vs {want}");
    assert_eq!(mc_expect_w1(&f, x, 12, 1000, 9).unwrap(), mc_expect_w1(&f, x, 12, 1000, 9).unwrap());
}

#[test]
fn limit_mean_of_the_geometric_grid() {
    // f = 1/(1 - x) at x = e^{2πi · 0.1i}, a real point inside the disk
    let x = (Complex64::new(0.0, std::f64::consts::TAU) * c(0.0, 0.1)).exp();
    let f = CoeffGrid::geometric(80);
    let lm = limit_mean_w1_infinity(&f, x, 80).unwrap();
    let euler: Complex64 = (1..=400).map(|k| 1.0 / (1.0 - x.powu(k))).product();
    assert!((lm.value - euler).norm() <= lm.tail_bound + 1e-12, "{lm:?} vs {euler}");
    let est = mc_expect_w1_infinity(&f, x, 10_000, 40_000, SEED).unwrap();
    let se = est.stderr + est.tail_bound;
    assert!((est.value() - euler).norm() <= 3.0 * se, "{est:?} vs {euler}");
}

#[test]
fn limit_mean_of_one_minus_x() {
    let f = CoeffGrid::univariate_real(&[1.0, -1.0]).unwrap();
    let lm = limit_mean_w1_infinity(&f, c(0.4, 0.0), 10).unwrap();
    assert!((lm.value - c(0.6, 0.0)).norm() < 1e-15);
    assert_eq!(lm.tail_bound, 0.0);
}
