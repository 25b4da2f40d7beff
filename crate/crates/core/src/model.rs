//! Problem instance: `n` atomic levels, the dipolar transitions between them
//! (each served by exactly one field mode) and all frequencies and couplings.
//!
//! Level indices are 1-based everywhere they cross the public API.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An unordered level pair `(j, k)` with `j < k`, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pair {
    pub j: usize,
    pub k: usize,
}

impl Pair {
    pub const fn new(j: usize, k: usize) -> Self {
        Pair { j, k }
    }

    /// `mu_j_k`, the column name used in grid exports.
    pub fn coupling_name(&self) -> String {
        format!("mu_{}_{}", self.j, self.k)
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.j, self.k)
    }
}

impl FromStr for Pair {
    type Err = Error;

    /// Accepts `1-2`, `1,2`, `12` (single digits only) or `1_2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parts: Vec<&str> = s.split(['-', ',', '_']).collect();
        let bad = || Error::InvalidArgument(format!("cannot parse level pair '{s}'"));
        let (j, k) = match parts.as_slice() {
            [a, b] => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
            [ab] if ab.len() == 2 && ab.chars().all(|c| c.is_ascii_digit()) => {
                let d: Vec<usize> = ab.chars().map(|c| c as usize - '0' as usize).collect();
                (d[0], d[1])
            }
            _ => return Err(bad()),
        };
        if j >= k || j == 0 {
            return Err(bad());
        }
        Ok(Pair { j, k })
    }
}

/// One dipolar transition `j <-> k`, promoted by the mode of frequency
/// `mode_freq` with dipolar strength `mu`.
///
/// `mu = 0` encodes a forbidden transition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub j: usize,
    pub k: usize,
    #[serde(rename = "Omega")]
    pub mode_freq: f64,
    pub mu: f64,
}

impl Transition {
    pub fn new(j: usize, k: usize, mode_freq: f64, mu: f64) -> Self {
        Transition { j, k, mode_freq, mu }
    }

    pub fn pair(&self) -> Pair {
        Pair::new(self.j, self.k)
    }
}

/// The problem instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomicSystem {
    /// Number of atomic levels.
    pub n: usize,
    /// Level energies `omega_1 = 0 < omega_2 < ... < omega_n`.
    pub omega: Vec<f64>,
    pub transitions: Vec<Transition>,
    /// Number of atoms. Only the exact solver uses it; variational results
    /// are per particle.
    #[serde(default = "default_atom_count")]
    pub atom_count: usize,
}

fn default_atom_count() -> usize {
    1
}

/// A single violated structural rule.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    TooFewLevels(usize),
    LevelCountMismatch { n: usize, listed: usize },
    GroundNotZero(f64),
    NotStrictlyIncreasing { index: usize },
    NonFiniteLevel { index: usize },
    BadPair { j: usize, k: usize },
    DuplicatePair(Pair),
    BadModeFrequency(Pair),
    BadCoupling(Pair),
    NoAtoms,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewLevels(n) => write!(f, "need at least 2 levels, got {n}"),
            Violation::LevelCountMismatch { n, listed } => {
                write!(f, "n = {n} but {listed} level energies listed")
            }
            Violation::GroundNotZero(w) => write!(f, "omega_1 must be 0, got {w}"),
            Violation::NotStrictlyIncreasing { index } => {
                write!(f, "levels not strictly increasing at level {index}")
            }
            Violation::NonFiniteLevel { index } => write!(f, "level {index} energy is not finite"),
            Violation::BadPair { j, k } => write!(f, "transition ({j},{k}) needs 1 <= j < k <= n"),
            Violation::DuplicatePair(p) => write!(f, "pair {p} served by two modes"),
            Violation::BadModeFrequency(p) => {
                write!(f, "mode frequency of {p} must be finite and > 0")
            }
            Violation::BadCoupling(p) => write!(f, "coupling of {p} must be finite and >= 0"),
            Violation::NoAtoms => write!(f, "atom_count must be positive"),
        }
    }
}

/// Result of [`validate`]. Empty `violations` means the system is valid;
/// `notices` never invalidate it.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub notices: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

/// Maximum number of distinct dipolar strengths of an `n`-level atom.
pub fn lmax(n: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("lmax needs n >= 2, got {n}")));
    }
    Ok(n * (n - 1) / 2 - (n - 2))
}

/// Check every structural rule and report all violations.
pub fn validate(system: &AtomicSystem) -> ValidationReport {
    let mut report = ValidationReport::default();
    let v = &mut report.violations;
    if system.n < 2 {
        v.push(Violation::TooFewLevels(system.n));
    }
    if system.omega.len() != system.n {
        v.push(Violation::LevelCountMismatch { n: system.n, listed: system.omega.len() });
    }
    for (i, w) in system.omega.iter().enumerate() {
        if !w.is_finite() {
            v.push(Violation::NonFiniteLevel { index: i + 1 });
        }
    }
    if let Some(&w1) = system.omega.first() {
        if w1 != 0.0 {
            v.push(Violation::GroundNotZero(w1));
        }
    }
    for (i, w) in system.omega.windows(2).enumerate() {
        if !(w[0] < w[1]) {
            v.push(Violation::NotStrictlyIncreasing { index: i + 2 });
        }
    }
    let mut seen = Vec::new();
    for t in &system.transitions {
        if t.j == 0 || t.j >= t.k || t.k > system.n {
            v.push(Violation::BadPair { j: t.j, k: t.k });
            continue;
        }
        let p = t.pair();
        if seen.contains(&p) {
            v.push(Violation::DuplicatePair(p));
        } else {
            seen.push(p);
        }
        if !(t.mode_freq.is_finite() && t.mode_freq > 0.0) {
            v.push(Violation::BadModeFrequency(p));
        }
        if !(t.mu.is_finite() && t.mu >= 0.0) {
            v.push(Violation::BadCoupling(p));
        }
    }
    if system.atom_count == 0 {
        v.push(Violation::NoAtoms);
    }
    if let Ok(l) = lmax(system.n) {
        if system.transitions.len() > l {
            report.notices.push(format!(
                "{} transitions exceed l_max = {l} for n = {}",
                system.transitions.len(),
                system.n
            ));
        }
    }
    report
}

impl AtomicSystem {
    /// Build a system and reject it unless it validates.
    pub fn new(omega: Vec<f64>, transitions: Vec<Transition>, atom_count: usize) -> Result<Self> {
        let system = AtomicSystem { n: omega.len(), omega, transitions, atom_count };
        system.checked()
    }

    pub fn checked(self) -> Result<Self> {
        let report = validate(&self);
        if report.is_valid() {
            Ok(self)
        } else {
            Err(Error::InvalidSystem(report))
        }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = validate(self);
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidSystem(report))
        }
    }

    pub fn transition_index(&self, pair: Pair) -> Option<usize> {
        self.transitions.iter().position(|t| t.pair() == pair)
    }

    pub fn transition(&self, pair: Pair) -> Result<&Transition> {
        self.transition_index(pair)
            .map(|i| &self.transitions[i])
            .ok_or(Error::UnknownTransition(pair))
    }

    pub fn pairs(&self) -> Vec<Pair> {
        self.transitions.iter().map(Transition::pair).collect()
    }

    /// Energy of level `j` (1-based).
    pub fn level(&self, j: usize) -> f64 {
        self.omega[j - 1]
    }

    pub fn mu(&self, pair: Pair) -> Result<f64> {
        self.transition(pair).map(|t| t.mu)
    }

    pub fn set_mu(&mut self, pair: Pair, mu: f64) -> Result<()> {
        let i = self.transition_index(pair).ok_or(Error::UnknownTransition(pair))?;
        self.transitions[i].mu = mu;
        Ok(())
    }

    /// Copy of the system with the listed couplings replaced.
    pub fn with_couplings(&self, couplings: &[(Pair, f64)]) -> Result<Self> {
        let mut s = self.clone();
        for &(p, mu) in couplings {
            s.set_mu(p, mu)?;
        }
        Ok(s)
    }

    /// Copy with every frequency and coupling multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.omega.iter_mut().for_each(|w| *w *= s);
        for t in &mut out.transitions {
            t.mode_freq *= s;
            t.mu *= s;
        }
        out
    }
}

/// Parameter sets of the phase diagrams reproduced by this crate.
pub mod presets {
    use super::*;

    /// Three-level ladder: modes on (1,2) and (2,3);
    /// `Omega_12 = 1, Omega_23 = 0.5, omega = (0, 1, 1.3)`.
    pub fn xi3(mu12: f64, mu23: f64) -> AtomicSystem {
        AtomicSystem {
            n: 3,
            omega: vec![0.0, 1.0, 1.3],
            transitions: vec![Transition::new(1, 2, 1.0, mu12), Transition::new(2, 3, 0.5, mu23)],
            atom_count: 1,
        }
    }

    /// Three-level V: modes on (1,2) and (1,3);
    /// `Omega_13 = 1, Omega_12 = 0.8, omega = (0, 0.8, 1)`.
    pub fn v3(mu12: f64, mu13: f64) -> AtomicSystem {
        AtomicSystem {
            n: 3,
            omega: vec![0.0, 0.8, 1.0],
            transitions: vec![Transition::new(1, 2, 0.8, mu12), Transition::new(1, 3, 1.0, mu13)],
            atom_count: 1,
        }
    }

    /// Three-level Lambda: modes on (1,3) and (2,3);
    /// `Omega_13 = 1, Omega_23 = 0.8, omega = (0, 0.2, 1)`.
    pub fn lambda3(mu13: f64, mu23: f64) -> AtomicSystem {
        AtomicSystem {
            n: 3,
            omega: vec![0.0, 0.2, 1.0],
            transitions: vec![Transition::new(1, 3, 1.0, mu13), Transition::new(2, 3, 0.8, mu23)],
            atom_count: 1,
        }
    }

    /// Four-level ladder: `Omega = (1, 0.7, 0.3)`, `omega = (0, 1, 1.7, 2)`.
    pub fn xi4(mu12: f64, mu23: f64, mu34: f64) -> AtomicSystem {
        AtomicSystem {
            n: 4,
            omega: vec![0.0, 1.0, 1.7, 2.0],
            transitions: vec![
                Transition::new(1, 2, 1.0, mu12),
                Transition::new(2, 3, 0.7, mu23),
                Transition::new(3, 4, 0.3, mu34),
            ],
            atom_count: 1,
        }
    }

    /// Two-level single-mode system with unit frequencies.
    pub fn two_level(mu: f64) -> AtomicSystem {
        AtomicSystem {
            n: 2,
            omega: vec![0.0, 1.0],
            transitions: vec![Transition::new(1, 2, 1.0, mu)],
            atom_count: 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::presets::*;
    use super::*;

    #[test]
    fn lmax_values() {
        assert_eq!(lmax(2).unwrap(), 1);
        assert_eq!(lmax(3).unwrap(), 2);
        // 4*3/2 - 2
        assert_eq!(lmax(4).unwrap(), 4);
        assert!(lmax(1).is_err());
        assert!(lmax(0).is_err());
    }

    #[test]
    fn named_configurations_are_valid() {
        for s in [xi3(1.0, 1.0), v3(1.0, 1.0), lambda3(1.0, 1.0), xi4(1.0, 1.0, 1.0), two_level(1.0)] {
            let r = validate(&s);
            assert!(r.is_valid(), "{r}");
            assert!(r.notices.is_empty());
        }
        // forbidden transition encoded by mu = 0 is still valid
        assert!(validate(&xi3(1.0, 0.0)).is_valid());
    }

    #[test]
    fn duplicate_pair_rejected() {
        let mut s = xi3(1.0, 1.0);
        s.transitions.push(Transition::new(1, 2, 2.0, 0.3));
        let r = validate(&s);
        assert_eq!(r.violations, vec![Violation::DuplicatePair(Pair::new(1, 2))]);
        assert!(r.violations[0].to_string().contains("pair 1-2 served by two modes"));
    }

    #[test]
    fn unordered_levels_rejected() {
        let mut s = xi3(1.0, 1.0);
        s.omega = vec![0.0, 1.0, 0.5];
        let r = validate(&s);
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NotStrictlyIncreasing { index: 3 })));
        assert!(r.to_string().contains("levels not strictly increasing"));
    }

    #[test]
    fn other_violations() {
        let mut s = xi3(-1.0, 1.0);
        s.omega[0] = 0.1;
        s.transitions.push(Transition::new(3, 2, 1.0, 0.0));
        s.transitions[1].mode_freq = 0.0;
        s.atom_count = 0;
        let r = validate(&s);
        assert!(r.violations.contains(&Violation::GroundNotZero(0.1)));
        assert!(r.violations.contains(&Violation::BadCoupling(Pair::new(1, 2))));
        assert!(r.violations.contains(&Violation::BadModeFrequency(Pair::new(2, 3))));
        assert!(r.violations.contains(&Violation::BadPair { j: 3, k: 2 }));
        assert!(r.violations.contains(&Violation::NoAtoms));
        assert!(AtomicSystem::new(vec![0.0], vec![], 1).is_err());
    }

    #[test]
    fn lmax_excess_is_only_a_notice() {
        let s = AtomicSystem {
            n: 3,
            omega: vec![0.0, 1.0, 2.0],
            transitions: vec![
                Transition::new(1, 2, 1.0, 0.1),
                Transition::new(1, 3, 1.0, 0.1),
                Transition::new(2, 3, 1.0, 0.1),
            ],
            atom_count: 1,
        };
        let r = validate(&s);
        assert!(r.is_valid());
        assert_eq!(r.notices.len(), 1);
    }

    #[test]
    fn validate_is_idempotent() {
        let mut s = xi3(1.0, 1.0);
        s.omega = vec![0.0, 1.0, 0.5];
        let before = s.clone();
        assert_eq!(validate(&s), validate(&s));
        assert_eq!(s, before);
    }

    #[test]
    fn pair_parsing() {
        assert_eq!("1-2".parse::<Pair>().unwrap(), Pair::new(1, 2));
        assert_eq!("2,3".parse::<Pair>().unwrap(), Pair::new(2, 3));
        assert_eq!("34".parse::<Pair>().unwrap(), Pair::new(3, 4));
        assert_eq!("10_12".parse::<Pair>().unwrap(), Pair::new(10, 12));
        assert!("2-1".parse::<Pair>().is_err());
        assert!("0-1".parse::<Pair>().is_err());
        assert!("x".parse::<Pair>().is_err());
    }

    #[test]
    fn config_roundtrip_uses_omega_field_names() {
        let s = xi3(1.0, 0.25);
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"Omega\":1.0"));
        let back: AtomicSystem = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }
}
