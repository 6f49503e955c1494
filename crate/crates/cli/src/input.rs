//! Turns flags into validated library inputs.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use perm_moments::classfun::{AngleAtom, AngleDistribution, CoeffGrid, EvalPoint, Randomization};
use perm_moments::groups::{GroupKind, Observable};
use perm_moments::{Error, ErrorClass};

use crate::args::{DistArgs, FunctionArgs, Group, PointArgs, Preset, Variant};

#[derive(Debug)]
pub struct CliError {
    pub class: &'static str,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self { class: "validation", kind: "invalid_input", message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.class {
            "validation" => 2,
            "numerical" => 3,
            _ => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let class = match e.class() {
            ErrorClass::Validation => "validation",
            ErrorClass::Numerical => "numerical",
            ErrorClass::Internal => "internal",
        };
        Self { class, kind: e.tag(), message: e.to_string() }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError { class: "validation", kind: "io", message: format!("{}: {e}", path.display()) })
}

pub fn observable(a: &FunctionArgs) -> CliResult<Observable> {
    let chosen = [a.file.is_some(), a.coeffs.is_some(), a.preset.is_some(), a.s1.is_some() || a.s2.is_some()];
    match chosen.iter().filter(|&&c| c).count() {
        0 => return Err(CliError::validation("give one of --f, --coeffs, --preset or --s1/--s2")),
        1 => {}
        _ => return Err(CliError::validation("--f, --coeffs, --preset and --s1/--s2 are mutually exclusive")),
    }
    if a.s1.is_some() || a.s2.is_some() {
        return Ok(Observable::CharPoly { s1: a.s1.unwrap_or(0), s2: a.s2.unwrap_or(0) });
    }
    let grid = if let Some(path) = &a.file {
        CoeffGrid::parse_text(&read(path)?)?
    } else if let Some(inline) = &a.coeffs {
        CoeffGrid::parse_text(&inline.replace(';', "\n"))?
    } else {
        match a.preset.expect("one source is set") {
            Preset::OneMinusX => return Ok(Observable::CharPoly { s1: 1, s2: 0 }),
            Preset::X => CoeffGrid::univariate_real(&[0.0, 1.0])?,
            Preset::One => CoeffGrid::one(),
            Preset::Geometric => {
                if a.trunc > 4096 {
                    return Err(CliError::validation("--trunc is capped at 4096"));
                }
                CoeffGrid::geometric(a.trunc)
            }
        }
    };
    Ok(Observable::Grid(grid))
}

pub fn point(p: &PointArgs) -> CliResult<EvalPoint> {
    let values = [p.x1, p.x1_im, p.x2, p.x2_im];
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::validation("x1 and x2 must be finite"));
    }
    Ok(EvalPoint::new(Complex64::new(p.x1, p.x1_im), Complex64::new(p.x2, p.x2_im)))
}

fn parse_atoms(text: &str) -> CliResult<Vec<AngleAtom>> {
    let mut atoms = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| Error::Parse { line: i + 1, message: format!("{e}") })?;
        if v.len() != 5 {
            return Err(Error::Parse { line: i + 1, message: "expected 5 numbers".into() }.into());
        }
        atoms.push(AngleAtom {
            theta: Complex64::new(v[0], v[1]),
            vartheta: Complex64::new(v[2], v[3]),
            prob: v[4],
        });
    }
    Ok(atoms)
}

pub fn distribution(d: &DistArgs) -> CliResult<AngleDistribution> {
    let dist = if let Some(path) = &d.dist_file {
        AngleDistribution::AtomList(parse_atoms(&read(path)?)?)
    } else {
        match d.dist.as_str() {
            "dirac" => AngleDistribution::Dirac1,
            "uniform" => AngleDistribution::UniformConjugatePair,
            other => match other.strip_prefix("roots:").map(str::parse::<u32>) {
                Some(Ok(p)) => AngleDistribution::RootsOfUnityConjugatePair(p),
                _ => return Err(CliError::validation(format!("unknown distribution {other:?}"))),
            },
        }
    };
    dist.validate()?;
    Ok(dist)
}

pub fn variant(v: Variant) -> Randomization {
    match v {
        Variant::W1 => Randomization::W1,
        Variant::W2 => Randomization::W2,
    }
}

pub fn group(g: Group) -> GroupKind {
    match g {
        Group::S => GroupKind::SymmetricS,
        Group::A => GroupKind::AlternatingA,
        Group::WeylD => GroupKind::WeylD,
        Group::WeylB => GroupKind::WeylB,
        Group::WeylSu => GroupKind::WeylSU,
    }
}

/// `START:END[:STEP]` with `END` inclusive. `START > END` is an empty range.
pub fn n_range(s: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::validation(format!("--n-range {s:?}: expected START:END[:STEP]"));
    let parts: Vec<usize> = s.split(':').map(|p| p.trim().parse().map_err(|_| bad())).collect::<CliResult<_>>()?;
    let (start, end, step) = match parts[..] {
        [a, b] => (a, b, 1),
        [a, b, c] => (a, b, c),
        _ => return Err(bad()),
    };
    if step == 0 {
        return Err(CliError::validation("--n-range step must be positive"));
    }
    if start > end {
        return Ok(Vec::new());
    }
    if (end - start) / step > 100_000 {
        return Err(CliError::validation("--n-range has more than 100000 entries"));
    }
    Ok((start..=end).step_by(step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(n_range("10:30:10").unwrap(), vec![10, 20, 30]);
        assert_eq!(n_range("3:5").unwrap(), vec![3, 4, 5]);
        assert!(n_range("5:3").unwrap().is_empty());
        assert!(n_range("1:2:0").is_err());
        assert!(n_range("a:b").is_err());
        assert!(n_range("1").is_err());
    }

    #[test]
    fn atoms() {
        let a = parse_atoms("# two atoms\n1 0 1 0 0.5\n-1 0 -1 0 0.5\n").unwrap();
        assert_eq!(a.len(), 2);
        assert!(parse_atoms("1 0 1 0").is_err());
    }
}
