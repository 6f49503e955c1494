use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const UNIT_TOL: f64 = 1e-12;

/// One atom `(θ, ϑ)` of a discrete joint law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleAtom {
    pub theta: Complex64,
    pub vartheta: Complex64,
    pub prob: f64,
}

/// Joint law of the circle-valued pair `(θ, ϑ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AngleDistribution {
    /// `θ = ϑ = 1`.
    Dirac1,
    /// `θ` uniform on the circle, `ϑ = conj(θ)`.
    UniformConjugatePair,
    /// `θ` uniform on the `p`-th roots of unity, `ϑ = conj(θ)`.
    RootsOfUnityConjugatePair(u32),
    AtomList(Vec<AngleAtom>),
}

impl AngleDistribution {
    pub fn validate(&self) -> Result<()> {
        match self {
            AngleDistribution::RootsOfUnityConjugatePair(0) => {
                Err(Error::InvalidInput("roots of unity need p >= 1".into()))
            }
            AngleDistribution::AtomList(atoms) => {
                if atoms.is_empty() {
                    return Err(Error::InvalidInput("atom list is empty".into()));
                }
                let mut total = 0.0;
                for a in atoms {
                    if !(a.prob >= 0.0 && a.prob.is_finite()) {
                        return Err(Error::InvalidInput(format!("atom probability {} is invalid", a.prob)));
                    }
                    if (a.theta.norm() - 1.0).abs() > UNIT_TOL || (a.vartheta.norm() - 1.0).abs() > UNIT_TOL {
                        return Err(Error::InvalidInput("atoms must lie on the unit circle".into()));
                    }
                    total += a.prob;
                }
                if (total - 1.0).abs() > UNIT_TOL {
                    return Err(Error::InvalidInput(format!("atom probabilities sum to {total}, not 1")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Whether the pair is almost surely constant, so that averages need no sampling.
    pub fn is_deterministic(&self) -> bool {
        match self {
            AngleDistribution::Dirac1 | AngleDistribution::RootsOfUnityConjugatePair(1) => true,
            AngleDistribution::AtomList(atoms) => atoms.iter().filter(|a| a.prob > 0.0).count() <= 1,
            _ => false,
        }
    }

    /// `α_{k1,k2} = E[θ^{k1} ϑ^{k2}]`.
    pub fn moment(&self, k1: usize, k2: usize) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        match self {
            AngleDistribution::Dirac1 => one,
            AngleDistribution::UniformConjugatePair => {
                if k1 == k2 {
                    one
                } else {
                    zero
                }
            }
            AngleDistribution::RootsOfUnityConjugatePair(p) => {
                if k1.abs_diff(k2).is_multiple_of(*p as usize) {
                    one
                } else {
                    zero
                }
            }
            AngleDistribution::AtomList(atoms) => atoms
                .iter()
                .map(|a| a.theta.powu(k1 as u32) * a.vartheta.powu(k2 as u32) * a.prob)
                .sum(),
        }
    }

    /// One draw of `(θ, ϑ)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Complex64, Complex64) {
        match self {
            AngleDistribution::Dirac1 => (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)),
            AngleDistribution::UniformConjugatePair => {
                let theta = Complex64::from_polar(1.0, TAU * rng.random::<f64>());
                (theta, theta.conj())
            }
            AngleDistribution::RootsOfUnityConjugatePair(p) => {
                let j = rng.random_range(0..*p);
                let theta = root_of_unity(j, *p);
                (theta, theta.conj())
            }
            AngleDistribution::AtomList(atoms) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for a in atoms {
                    acc += a.prob;
                    if u < acc {
                        return (a.theta, a.vartheta);
                    }
                }
                let last = atoms.iter().rev().find(|a| a.prob > 0.0).unwrap_or(&atoms[atoms.len() - 1]);
                (last.theta, last.vartheta)
            }
        }
    }
}

/// `e^{2πi j/p}`, exact on the real and imaginary axes.
pub(crate) fn root_of_unity(j: u32, p: u32) -> Complex64 {
    let j = j % p;
    if j == 0 {
        Complex64::new(1.0, 0.0)
    } else if 2 * j == p {
        Complex64::new(-1.0, 0.0)
    } else if 4 * j == p {
        Complex64::new(0.0, 1.0)
    } else if 4 * j == 3 * p {
        Complex64::new(0.0, -1.0)
    } else {
        Complex64::from_polar(1.0, TAU * j as f64 / p as f64)
    }
}

/// Moments `α_{k1,k2}` for `0 <= k_i <= K_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    alpha: Vec<Complex64>,
    k1_max: usize,
    k2_max: usize,
}

impl MomentTable {
    pub fn from_fn(k1_max: usize, k2_max: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut alpha = Vec::with_capacity((k1_max + 1) * (k2_max + 1));
        for k1 in 0..=k1_max {
            for k2 in 0..=k2_max {
                alpha.push(f(k1, k2));
            }
        }
        Self { alpha, k1_max, k2_max }
    }

    pub fn bounds(&self) -> (usize, usize) {
        (self.k1_max, self.k2_max)
    }

    pub fn get(&self, k1: usize, k2: usize) -> Complex64 {
        assert!(k1 <= self.k1_max && k2 <= self.k2_max, "moment ({k1},{k2}) outside the table");
        self.alpha[k1 * (self.k2_max + 1) + k2]
    }

    pub(crate) fn check_covers(&self, (k1, k2): (usize, usize)) -> Result<()> {
        if k1 > self.k1_max || k2 > self.k2_max {
            return Err(Error::InvalidInput(format!(
                "moment table up to ({},{}) does not cover grid bounds ({k1},{k2})",
                self.k1_max, self.k2_max
            )));
        }
        Ok(())
    }
}

/// Exact moment table of `dist` up to `(K_1, K_2)`.
pub fn moments_of(dist: &AngleDistribution, k1_max: usize, k2_max: usize) -> Result<MomentTable> {
    dist.validate()?;
    Ok(MomentTable::from_fn(k1_max, k2_max, |k1, k2| dist.moment(k1, k2)))
}
