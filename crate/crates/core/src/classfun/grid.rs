use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::angles::MomentTable;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Slack allowed when validating a declared tail constant against stored coefficients.
const TAIL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GridKind {
    /// Every nonzero coefficient is stored; the grid is exact.
    Polynomial,
    /// A holomorphic function on `|x_1| < r_1, |x_2| < r_2`, truncated at the
    /// grid bounds, with `|b_{k1,k2}| <= C r_1^{-k1} r_2^{-k2}` for every index.
    /// An infinite radius means the function does not depend on that variable.
    HolomorphicTruncated { radii: (f64, f64), tail_constant: f64 },
}

/// Coefficients `b_{k1,k2}`, `0 <= k_i <= K_i`, of `f(x_1,x_2) = Σ b x_1^{k1} x_2^{k2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffGrid {
    b: Vec<Complex64>,
    k1_max: usize,
    k2_max: usize,
    kind: GridKind,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl CoeffGrid {
    /// A polynomial from rows `b[k1][k2]`; ragged rows are zero-padded.
    pub fn polynomial(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        Self::from_rows(rows, GridKind::Polynomial)
    }

    /// A univariate polynomial `Σ b_k x^k`.
    pub fn univariate(coeffs: &[Complex64]) -> Result<Self> {
        Self::polynomial(coeffs.iter().map(|&c| vec![c]).collect())
    }

    pub fn univariate_real(coeffs: &[f64]) -> Result<Self> {
        Self::univariate(&coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect::<Vec<_>>())
    }

    /// A truncated holomorphic function with a declared geometric tail constant.
    pub fn holomorphic(rows: Vec<Vec<Complex64>>, radii: (f64, f64), tail_constant: f64) -> Result<Self> {
        let grid = Self::from_rows(rows, GridKind::HolomorphicTruncated { radii, tail_constant })?;
        grid.validate_tail()?;
        Ok(grid)
    }

    /// Like [`CoeffGrid::holomorphic`], with the smallest tail constant the stored
    /// coefficients allow. The caller asserts the unseen tail obeys the same bound.
    pub fn holomorphic_fitted(rows: Vec<Vec<Complex64>>, radii: (f64, f64)) -> Result<Self> {
        let probe = Self::from_rows(rows.clone(), GridKind::HolomorphicTruncated { radii, tail_constant: 0.0 })?;
        let (rho1, rho2) = probe.decay_rates();
        let mut c: f64 = 0.0;
        for k1 in 0..=probe.k1_max {
            for k2 in 0..=probe.k2_max {
                let scale = rho1.powi(k1 as i32) * rho2.powi(k2 as i32);
                let b = probe.get(k1, k2).norm();
                if b > 0.0 {
                    c = c.max(b / scale);
                }
            }
        }
        Self::holomorphic(rows, radii, c)
    }

    /// `(1 - x_1)^{s_1} (1 - x_2)^{s_2}`, the power of characteristic polynomials.
    pub fn char_poly_power(s1: u32, s2: u32) -> Self {
        let rows = (0..=s1)
            .map(|k1| {
                (0..=s2)
                    .map(|k2| {
                        let sign = if (k1 + k2) % 2 == 0 { 1.0 } else { -1.0 };
                        Complex64::new(sign * binomial(s1, k1) * binomial(s2, k2), 0.0)
                    })
                    .collect()
            })
            .collect();
        Self::polynomial(rows).expect("nonempty rows")
    }

    /// `1/(1 - x)` truncated at degree `k_max`: radius 1, tail constant 1.
    pub fn geometric(k_max: usize) -> Self {
        let rows = vec![vec![Complex64::new(1.0, 0.0)]; k_max + 1];
        Self::holomorphic(rows, (1.0, f64::INFINITY), 1.0).expect("geometric coefficients satisfy their bound")
    }

    /// `f ≡ 1`.
    pub fn one() -> Self {
        Self::univariate_real(&[1.0]).expect("nonempty")
    }

    fn from_rows(rows: Vec<Vec<Complex64>>, kind: GridKind) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("coefficient grid needs at least one row".into()));
        }
        if let GridKind::HolomorphicTruncated { radii: (r1, r2), tail_constant } = kind {
            if !(r1 > 0.0 && r2 > 0.0) || r1.is_nan() || r2.is_nan() {
                return Err(Error::InvalidInput("holomorphic radii must be positive".into()));
            }
            if !(tail_constant >= 0.0 && tail_constant.is_finite()) {
                return Err(Error::InvalidInput("tail constant must be finite and nonnegative".into()));
            }
        }
        let k1_max = rows.len() - 1;
        let k2_max = rows.iter().map(Vec::len).max().unwrap_or(1).max(1) - 1;
        let mut b = vec![ZERO; (k1_max + 1) * (k2_max + 1)];
        for (k1, row) in rows.iter().enumerate() {
            for (k2, &v) in row.iter().enumerate() {
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::InvalidInput(format!("coefficient b[{k1}][{k2}] is not finite")));
                }
                b[k1 * (k2_max + 1) + k2] = v;
            }
        }
        Ok(Self { b, k1_max, k2_max, kind })
    }

    fn validate_tail(&self) -> Result<()> {
        let GridKind::HolomorphicTruncated { tail_constant, .. } = self.kind else {
            return Ok(());
        };
        let (rho1, rho2) = self.decay_rates();
        for (k1, k2, b) in self.nonzero() {
            let bound = tail_constant * rho1.powi(k1 as i32) * rho2.powi(k2 as i32);
            if b.norm() > bound * (1.0 + TAIL_SLACK) + f64::MIN_POSITIVE {
                return Err(Error::InvalidInput(format!(
                    "|b[{k1}][{k2}]| = {} exceeds the declared tail bound {bound}",
                    b.norm()
                )));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self.kind, GridKind::Polynomial)
    }

    /// `(K_1, K_2)`.
    pub fn bounds(&self) -> (usize, usize) {
        (self.k1_max, self.k2_max)
    }

    /// Radii of convergence; infinite for polynomials.
    pub fn radii(&self) -> (f64, f64) {
        match self.kind {
            GridKind::Polynomial => (f64::INFINITY, f64::INFINITY),
            GridKind::HolomorphicTruncated { radii, .. } => radii,
        }
    }

    /// `(1/r_1, 1/r_2)`.
    pub fn decay_rates(&self) -> (f64, f64) {
        let (r1, r2) = self.radii();
        (1.0 / r1, 1.0 / r2)
    }

    pub fn tail_constant(&self) -> Option<f64> {
        match self.kind {
            GridKind::Polynomial => None,
            GridKind::HolomorphicTruncated { tail_constant, .. } => Some(tail_constant),
        }
    }

    /// Whether `x_i` enters `f` at all.
    pub fn depends_on(&self, dim: usize) -> bool {
        let (k, r) = match dim {
            0 => (self.k1_max, self.radii().0),
            _ => (self.k2_max, self.radii().1),
        };
        k > 0 || (!self.is_polynomial() && r.is_finite())
    }

    pub fn is_univariate(&self) -> bool {
        !self.depends_on(1)
    }

    pub fn get(&self, k1: usize, k2: usize) -> Complex64 {
        if k1 > self.k1_max || k2 > self.k2_max {
            return ZERO;
        }
        self.b[k1 * (self.k2_max + 1) + k2]
    }

    /// `b_{0,0} = f(0,0)`.
    pub fn b00(&self) -> Complex64 {
        self.b[0]
    }

    /// Univariate coefficient `b_k = b_{k,0}`.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.get(k, 0)
    }

    /// Nonzero entries as `(k1, k2, b)`.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        let width = self.k2_max + 1;
        self.b
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != ZERO)
            .map(move |(i, &b)| (i / width, i % width, b))
    }

    /// `f(y_1, y_2)` by nested Horner evaluation of the stored coefficients.
    pub fn eval(&self, y1: Complex64, y2: Complex64) -> Complex64 {
        let width = self.k2_max + 1;
        let mut acc = ZERO;
        for k1 in (0..=self.k1_max).rev() {
            let row = &self.b[k1 * width..(k1 + 1) * width];
            let inner = row.iter().rev().fold(ZERO, |s, &b| s * y2 + b);
            acc = acc * y1 + inner;
        }
        acc
    }

    /// The grid with coefficients `b_{k1,k2} α_{k1,k2}`, i.e. `f~(x) = E f(θ x_1, ϑ x_2)`.
    pub fn fold_moments(&self, alpha: &MomentTable) -> Result<Self> {
        alpha.check_covers(self.bounds())?;
        let mut folded = self.clone();
        let width = self.k2_max + 1;
        for (i, b) in folded.b.iter_mut().enumerate() {
            *b *= alpha.get(i / width, i % width);
        }
        Ok(folded)
    }

    /// Product of two polynomial grids.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if !(self.is_polynomial() && other.is_polynomial()) {
            return Err(Error::InvalidInput("grid products are only defined for polynomials".into()));
        }
        let (a1, a2) = self.bounds();
        let (c1, c2) = other.bounds();
        let mut rows = vec![vec![ZERO; a2 + c2 + 1]; a1 + c1 + 1];
        for (i1, i2, x) in self.nonzero() {
            for (j1, j2, y) in other.nonzero() {
                rows[i1 + j1][i2 + j2] += x * y;
            }
        }
        Self::polynomial(rows)
    }

    /// `Σ_{(k1,k2) outside the stored box} u_1^{k1} u_2^{k2}` for `0 <= u_i < 1`.
    pub(crate) fn outside_box_sum(&self, u1: f64, u2: f64) -> f64 {
        if u1 >= 1.0 || u2 >= 1.0 {
            return f64::INFINITY;
        }
        let a = u1.powi(self.k1_max as i32 + 1);
        let b = u2.powi(self.k2_max as i32 + 1);
        (a + b - a * b) / ((1.0 - u1) * (1.0 - u2))
    }

    /// Parses the text format: one `k1 k2 re im` line per coefficient, omitted
    /// entries zero, `#` comments. A `holomorphic r1 r2 C` line (radii may be
    /// `inf`) declares a truncated holomorphic function.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut holo: Option<(f64, f64, f64)> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse_f = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|e| Error::Parse { line: line_no, message: format!("{s:?}: {e}") })
            };
            if fields[0] == "holomorphic" {
                if fields.len() != 4 {
                    return Err(Error::Parse { line: line_no, message: "expected `holomorphic r1 r2 C`".into() });
                }
                holo = Some((parse_f(fields[1])?, parse_f(fields[2])?, parse_f(fields[3])?));
                continue;
            }
            if fields.len() != 4 {
                return Err(Error::Parse { line: line_no, message: format!("expected `k1 k2 re im`, got {} fields", fields.len()) });
            }
            let parse_k = |s: &str| -> Result<usize> {
                s.parse::<usize>().map_err(|e| Error::Parse { line: line_no, message: format!("{s:?}: {e}") })
            };
            let (k1, k2) = (parse_k(fields[0])?, parse_k(fields[1])?);
            if k1 > 4096 || k2 > 4096 {
                return Err(Error::Parse { line: line_no, message: "degree above 4096".into() });
            }
            entries.push((k1, k2, Complex64::new(parse_f(fields[2])?, parse_f(fields[3])?)));
        }
        if entries.is_empty() {
            return Err(Error::Parse { line: 0, message: "no coefficients".into() });
        }
        let k1_max = entries.iter().map(|e| e.0).max().unwrap_or(0);
        let k2_max = entries.iter().map(|e| e.1).max().unwrap_or(0);
        let mut rows = vec![vec![ZERO; k2_max + 1]; k1_max + 1];
        for (k1, k2, v) in entries {
            rows[k1][k2] += v;
        }
        match holo {
            None => Self::polynomial(rows),
            Some((r1, r2, c)) => Self::holomorphic(rows, (r1, r2), c),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let GridKind::HolomorphicTruncated { radii: (r1, r2), tail_constant } = self.kind {
            let _ = writeln!(out, "holomorphic {r1:?} {r2:?} {tail_constant:?}");
        }
        for (k1, k2, b) in self.nonzero() {
            let _ = writeln!(out, "{k1} {k2} {:?} {:?}", b.re, b.im);
        }
        out
    }
}
