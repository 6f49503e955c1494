//! Large-`n` behavior of the averages for `|x_i| < 1`.
//!
//! With `b = b_{0,0}` the generating function is `(1 - t)^{-b} g(t)` where `g`
//! is analytic beyond the unit disk, so `[t^n] ~ g(1) n^{b-1} / Γ(b)`. When `b`
//! is a non-positive integer the leading term vanishes and the averages decay.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classfun::{check_strict_domain, expect_gf, generating_factors, CoeffGrid, EvalPoint, MomentTable, Randomization};
use crate::error::{Error, Result};

/// Distance from a non-positive integer below which `b_{0,0}` counts as degenerate.
pub const DEGENERATE_TOL: f64 = 1e-12;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// The non-positive integer `z` is within [`DEGENERATE_TOL`] of, if any.
pub fn nonpositive_integer_near(z: Complex64) -> Option<i64> {
    let k = z.re.round();
    (k <= 0.0 && (z - k).norm() <= DEGENERATE_TOL).then_some(k as i64)
}

fn ln_gamma_lanczos(z: Complex64) -> Complex64 {
    // valid for Re z >= 0.5
    let z = z - 1.0;
    let mut a = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + a.ln()
}

/// `Γ(z)` by the Lanczos approximation, with reflection for `Re z < 1/2`.
pub fn gamma_complex(z: Complex64) -> Result<Complex64> {
    if nonpositive_integer_near(z).is_some() {
        return Err(Error::Pole(z));
    }
    if z.re < 0.5 {
        let s = (PI * z).sin();
        Ok(PI / (s * ln_gamma_lanczos(1.0 - z).exp()))
    } else {
        Ok(ln_gamma_lanczos(z).exp())
    }
}

/// `binom(s, k) = ∏_{m=1}^{k} (s - m + 1)/m`.
pub fn binom_complex(s: Complex64, k: usize) -> Complex64 {
    // partial products can overflow long before the result does; rescale by exact powers of two
    const BIG: f64 = 1e150;
    let mut acc = Complex64::new(1.0, 0.0);
    let mut exp2: i32 = 0;
    for m in 1..=k {
        acc = acc * (s - (m as f64) + 1.0) / m as f64;
        let a = acc.norm();
        if a > BIG || (a < 1.0 / BIG && a > 0.0) {
            let e = a.log2().round() as i32;
            acc /= 2f64.powi(e);
            exp2 += e;
        }
    }
    acc * 2f64.powi(exp2)
}

/// `binom(n + s, n) / (n^s / Γ(s + 1))`, which tends to 1 like `1 + O(1/n)`.
pub fn binom_growth_check(s: Complex64, n: usize) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::InvalidInput("the growth check needs n >= 1".into()));
    }
    let g = gamma_complex(s + 1.0)?;
    let power = (s * (n as f64).ln()).exp();
    Ok(binom_complex(s + n as f64, n) * g / power)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Generic,
    /// `b_{0,0} ∈ {0, -1, -2, ...}`: the averages tend to 0, geometrically for holomorphic `f`.
    DegenerateZeroLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticResult {
    /// `n^{b-1}/Γ(b) × constant`, or 0 in the degenerate regime.
    pub leading: Complex64,
    /// `b_{0,0} - 1`.
    pub exponent: Complex64,
    /// The product of all factors other than `(1 - t)^{-b_{0,0}}`, evaluated at `t = 1`.
    pub constant: Complex64,
    /// Bound on `|constant - true constant|` from truncating a holomorphic `f`.
    pub constant_tail_bound: f64,
    pub regime: Regime,
}

/// Leading-order asymptotics of `E_n` at `x` strictly inside the unit polydisk.
pub fn asymptotic_expect(
    f: &CoeffGrid,
    alpha: &MomentTable,
    variant: Randomization,
    x: &EvalPoint,
    n: usize,
) -> Result<AsymptoticResult> {
    check_strict_domain(f, x)?;
    let b = f.b00();
    let factors = generating_factors(f, alpha, variant, x)?;
    // factors with k1 = k2 = 0 have c = α_{0,0} = 1; everything else has |c| < 1
    let mut log_const = Complex64::new(0.0, 0.0);
    for fac in factors.factors() {
        if (fac.c - 1.0).norm() == 0.0 {
            continue;
        }
        log_const -= fac.e * (1.0 - fac.c).ln();
    }
    let constant = log_const.exp();
    let constant_tail_bound = match f.tail_constant() {
        None => 0.0,
        Some(c) => {
            let (rho1, rho2) = f.decay_rates();
            let (a1, a2) = (x.x1.norm(), x.x2.norm());
            let u1 = if f.depends_on(0) { rho1 * a1 } else { 0.0 };
            let u2 = if f.depends_on(1) { rho2 * a2 } else { 0.0 };
            let a_max = if f.depends_on(1) { a1.max(a2) } else { a1 };
            let delta = c / (1.0 - a_max) * f.outside_box_sum(u1, u2);
            constant.norm() * delta.exp_m1()
        }
    };
    let exponent = b - 1.0;
    if nonpositive_integer_near(b).is_some() {
        return Ok(AsymptoticResult {
            leading: Complex64::new(0.0, 0.0),
            exponent,
            constant,
            constant_tail_bound,
            regime: Regime::DegenerateZeroLimit,
        });
    }
    let power = (exponent * (n.max(1) as f64).ln()).exp();
    let leading = power / gamma_complex(b)? * constant;
    Ok(AsymptoticResult { leading, exponent, constant, constant_tail_bound, regime: Regime::Generic })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitMean {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// `∏_{k=1}^{k_tail} (1 - x^k)^{-b_k}` for univariate `f`, with a bound on the omitted factors
/// (including the unseen coefficients of a truncated holomorphic `f`).
pub fn limit_mean_w1_infinity(f: &CoeffGrid, x: Complex64, k_tail: usize) -> Result<LimitMean> {
    if !f.is_univariate() {
        return Err(Error::InvalidInput("the limit mean takes a univariate f".into()));
    }
    check_strict_domain(f, &EvalPoint::univariate(x))?;
    let (k_max, _) = f.bounds();
    let a = x.norm();
    let mut log_value = Complex64::new(0.0, 0.0);
    for k in 1..=k_max.min(k_tail) {
        let b = f.coeff(k);
        if b != Complex64::new(0.0, 0.0) {
            log_value -= b * (1.0 - x.powu(k as u32)).ln();
        }
    }
    // |log(1 - y)| <= |y|/(1 - |y|) <= |y|/(1 - a)
    let mut delta: f64 = (k_tail + 1..=k_max).map(|k| f.coeff(k).norm() * a.powi(k as i32)).sum();
    if let Some(c) = f.tail_constant() {
        let u = f.decay_rates().0 * a;
        let start = k_max.max(k_tail) + 1;
        delta += c * u.powi(start as i32) / (1.0 - u);
    }
    delta /= 1.0 - a;
    let value = log_value.exp();
    Ok(LimitMean { value, tail_bound: value.norm() * delta.exp_m1() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionRow {
    pub n: usize,
    pub expect: Complex64,
    pub asym: Complex64,
    /// `|expect / asym|`; NaN in the degenerate regime.
    pub ratio_abs: f64,
    /// `|expect / asym - 1|`; NaN in the degenerate regime.
    pub ratio_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub regime: Regime,
    pub rows: Vec<ReductionRow>,
    /// Generic regime: `|ratio - 1|` shrinks from the first to the last `n`.
    /// Degenerate regime: `|E_n|` is non-increasing over the second half of the list.
    pub trend_ok: bool,
    /// Degenerate regime: `δ` from a least-squares fit of `|E_n| ≈ A (1 + δ)^{-n}`.
    pub fitted_delta: Option<f64>,
    /// Generic regime: `p` from a fit of `|ratio - 1| ≈ A n^p`, when the errors are above rounding.
    pub fitted_power: Option<f64>,
}

impl ReductionReport {
    pub const CSV_HEADER: &'static str = "n,expect_re,expect_im,asym_re,asym_im,ratio_abs";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&csv_row(r));
            out.push('\n');
        }
        out
    }
}

pub fn csv_row(r: &ReductionRow) -> String {
    format!("{},{:e},{:e},{:e},{:e},{:e}", r.n, r.expect.re, r.expect.im, r.asym.re, r.asym.im, r.ratio_abs)
}

fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Compares the series route with the asymptotic formula over `n_list`.
pub fn reduction_check(
    f: &CoeffGrid,
    alpha: &MomentTable,
    variant: Randomization,
    x: &EvalPoint,
    n_list: &[usize],
) -> Result<ReductionReport> {
    check_strict_domain(f, x)?;
    let mut rows = Vec::with_capacity(n_list.len());
    let mut regime = if nonpositive_integer_near(f.b00()).is_some() { Regime::DegenerateZeroLimit } else { Regime::Generic };
    for &n in n_list {
        let expect = expect_gf(f, alpha, variant, x, n, n)?.value;
        let a = asymptotic_expect(f, alpha, variant, x, n)?;
        regime = a.regime;
        let (ratio_abs, ratio_error) = match a.regime {
            Regime::Generic => {
                let r = expect / a.leading;
                (r.norm(), (r - 1.0).norm())
            }
            Regime::DegenerateZeroLimit => (f64::NAN, f64::NAN),
        };
        rows.push(ReductionRow { n, expect, asym: a.leading, ratio_abs, ratio_error });
    }
    let (trend_ok, fitted_delta, fitted_power) = match regime {
        Regime::Generic => {
            let ok = match (rows.first(), rows.last()) {
                (Some(a), Some(b)) if rows.len() >= 2 => b.ratio_error < a.ratio_error || a.ratio_error < 1e-12,
                _ => true,
            };
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.n > 0 && r.ratio_error > 1e-13)
                .map(|r| ((r.n as f64).ln(), r.ratio_error.ln()))
                .collect();
            (ok, None, slope(&pts))
        }
        Regime::DegenerateZeroLimit => {
            let tail = &rows[rows.len() / 2..];
            let ok = tail.windows(2).all(|w| w[1].expect.norm() <= w[0].expect.norm());
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.expect.norm() > 1e-300)
                .map(|r| (r.n as f64, r.expect.norm().ln()))
                .collect();
            (ok, slope(&pts).map(|s| (-s).exp() - 1.0), None)
        }
    };
    Ok(ReductionReport { regime, rows, trend_ok, fitted_delta, fitted_power })
}
