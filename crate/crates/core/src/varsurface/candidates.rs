//! Closed-form critical points of the energy surface.
//!
//! Setting every matter radius but one to zero leaves a two-level surface on
//! the pair `(1, k)`; sending `rho_j -> infinity` with `rho_k = eta_k rho_j`
//! and all other radii zero leaves a two-level surface on `(j, k)` whose
//! lower level sits at `omega_j`. Both reduce to the same single-mode
//! problem, solved by [`two_level_critical`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AtomicSystem, Pair, Transition};

/// Which critical branch a candidate belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CandidateKind {
    /// Field vacuum, all atoms in level 1.
    Normal,
    /// Ground level 1 mixed with level `k`.
    Low { k: usize },
    /// Levels `j >= 2` and `k` mixed, reached in the `rho_j -> infinity` limit.
    High { j: usize, k: usize },
}

impl CandidateKind {
    pub fn pair(&self) -> Option<Pair> {
        match *self {
            CandidateKind::Normal => None,
            CandidateKind::Low { k } => Some(Pair::new(1, k)),
            CandidateKind::High { j, k } => Some(Pair::new(j, k)),
        }
    }

    pub fn for_pair(pair: Pair) -> Self {
        if pair.j == 1 {
            CandidateKind::Low { k: pair.k }
        } else {
            CandidateKind::High { j: pair.j, k: pair.k }
        }
    }
}

impl fmt::Display for CandidateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pair() {
            None => write!(f, "N"),
            Some(p) => write!(f, "S_{}_{}", p.j, p.k),
        }
    }
}

/// Location and value of an existing critical point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    /// `rho_k^c` for Low, `eta_k^c` for High, 0 for Normal.
    pub matter_amp: f64,
    /// Per-particle field radius of the active mode (`r_c` or its limit).
    pub photon_amp: f64,
    /// Per-particle energy.
    pub energy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationalCandidate {
    pub kind: CandidateKind,
    /// `None` when the existence inequality fails (or `mu = 0`).
    pub critical: Option<CriticalPoint>,
}

impl VariationalCandidate {
    pub fn exists(&self) -> bool {
        self.critical.is_some()
    }

    pub fn energy(&self) -> Option<f64> {
        self.critical.map(|c| c.energy)
    }

    pub fn pair(&self) -> Option<Pair> {
        self.kind.pair()
    }

    fn normal() -> Self {
        VariationalCandidate {
            kind: CandidateKind::Normal,
            critical: Some(CriticalPoint { matter_amp: 0.0, photon_amp: 0.0, energy: 0.0 }),
        }
    }
}

/// Critical point of `E(x) = (e0 + e1 x^2)/(1 + x^2) - 4 (mu^2/Omega) x^2/(1 + x^2)^2`
/// with `gap = e1 - e0 > 0`; `None` unless `4 mu^2 >= gap * Omega` and `mu > 0`.
fn two_level_critical(base: f64, gap: f64, t: &Transition) -> Option<CriticalPoint> {
    let coupling = 4.0 * t.mu * t.mu;
    let detuning = gap * t.mode_freq;
    if t.mu <= 0.0 || coupling < detuning {
        return None;
    }
    let x2 = (coupling - detuning) / (coupling + detuning);
    let x = x2.sqrt();
    Some(CriticalPoint {
        matter_amp: x,
        photon_amp: 2.0 * t.mu * x / (t.mode_freq * (1.0 + x2)),
        energy: base - (detuning - coupling).powi(2) / (16.0 * t.mode_freq * t.mu * t.mu),
    })
}

/// Closed-form candidate for a single transition.
pub(crate) fn candidate_for(system: &AtomicSystem, t: &Transition) -> VariationalCandidate {
    let base = system.level(t.j);
    let gap = system.level(t.k) - base;
    VariationalCandidate {
        kind: CandidateKind::for_pair(t.pair()),
        critical: two_level_critical(base, gap, t),
    }
}

/// Every single-pair candidate: Normal first, then Low pairs by ascending
/// `k`, then High pairs by ascending `(j, k)`.
pub fn candidates(system: &AtomicSystem) -> Vec<VariationalCandidate> {
    let mut transitions: Vec<&Transition> = system.transitions.iter().collect();
    transitions.sort_by_key(|t| (t.j != 1, t.j, t.k));
    std::iter::once(VariationalCandidate::normal())
        .chain(transitions.into_iter().map(|t| candidate_for(system, t)))
        .collect()
}

/// Existing candidate of least energy. Exact ties keep the earlier candidate
/// in [`candidates`] order.
pub fn minimize(system: &AtomicSystem) -> VariationalCandidate {
    let mut best = VariationalCandidate::normal();
    let mut best_energy = 0.0;
    for c in candidates(system).into_iter().skip(1) {
        if let Some(e) = c.energy() {
            if e < best_energy {
                best = c;
                best_energy = e;
            }
        }
    }
    best
}

/// Matter half of a variational state: `N_a` bosons in the superposition
/// `(b_lower^+ + mixing b_upper^+)/sqrt(1 + mixing^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatterPart {
    pub lower: usize,
    pub upper: Option<usize>,
    pub mixing: f64,
}

/// Field half: a coherent state of amplitude `amplitude` on one mode
/// (vacuum everywhere else).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldPart {
    pub mode: Option<Pair>,
    /// Total coherent amplitude `sqrt(N_a) r_c`.
    pub amplitude: f64,
}

/// Explicit product-state recipe for a candidate. Matter and field parts
/// are independent, so all joint moments factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateRecipe {
    pub atom_count: usize,
    pub matter: MatterPart,
    pub field: FieldPart,
}

impl StateRecipe {
    /// `<A_ll>` (total, not per particle).
    pub fn population(&self, level: usize) -> f64 {
        let n = self.atom_count as f64;
        let x2 = self.matter.mixing * self.matter.mixing;
        if level == self.matter.lower {
            n / (1.0 + x2)
        } else if Some(level) == self.matter.upper {
            n * x2 / (1.0 + x2)
        } else {
            0.0
        }
    }

    /// `<a^+ a>` of `mode` (total).
    pub fn photons(&self, mode: Pair) -> f64 {
        if self.field.mode == Some(mode) {
            self.field.amplitude * self.field.amplitude
        } else {
            0.0
        }
    }

    /// `<A_ll (x) a^+ a>` evaluated in the product state.
    pub fn joint_population_photons(&self, level: usize, mode: Pair) -> f64 {
        self.population(level) * self.photons(mode)
    }
}

/// Explicit state for an existing candidate.
pub fn variational_state_params(
    system: &AtomicSystem,
    candidate: &VariationalCandidate,
) -> Result<StateRecipe> {
    let crit = candidate.critical.ok_or_else(|| Error::CandidateAbsent(candidate.kind.to_string()))?;
    let scale = (system.atom_count as f64).sqrt();
    let (matter, field) = match candidate.kind {
        CandidateKind::Normal => (
            MatterPart { lower: 1, upper: None, mixing: 0.0 },
            FieldPart { mode: None, amplitude: 0.0 },
        ),
        kind => {
            let p = kind.pair().expect("collective candidate has a pair");
            (
                MatterPart { lower: p.j, upper: Some(p.k), mixing: crit.matter_amp },
                FieldPart { mode: Some(p), amplitude: scale * crit.photon_amp },
            )
        }
    };
    Ok(StateRecipe { atom_count: system.atom_count, matter, field })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets::*;
    use crate::varsurface::{gradient, reduced_energy};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn by_kind(list: &[VariationalCandidate], kind: CandidateKind) -> VariationalCandidate {
        *list.iter().find(|c| c.kind == kind).unwrap()
    }

    #[test]
    fn fig2a_candidates_at_unit_coupling() {
        let s = xi3(1.0, 1.0);
        let list = candidates(&s);
        assert_eq!(list.len(), 3);
        assert_eq!(list[0].kind, CandidateKind::Normal);
        assert_eq!(list[0].energy(), Some(0.0));
        let low = by_kind(&list, CandidateKind::Low { k: 2 }).critical.unwrap();
        assert_abs_diff_eq!(low.energy, -0.5625, epsilon = 1e-12);
        assert_abs_diff_eq!(low.matter_amp, 0.6f64.sqrt(), epsilon = 1e-12);
        let high = by_kind(&list, CandidateKind::High { j: 2, k: 3 }).critical.unwrap();
        assert_abs_diff_eq!(high.energy, 1.0 - 3.85f64.powi(2) / 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(high.energy, -0.852_812_5, epsilon = 1e-12);
        assert_abs_diff_eq!(high.matter_amp, (3.85f64 / 4.15).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(high.matter_amp, 0.963_177, epsilon = 1e-6);
    }

    #[test]
    fn boundary_and_subcritical_couplings() {
        let at = candidates(&xi3(0.5, 0.0));
        let c = by_kind(&at, CandidateKind::Low { k: 2 }).critical.unwrap();
        assert_eq!(c.matter_amp, 0.0);
        assert_eq!(c.energy, 0.0);
        // mu = 0 never exists
        assert!(!by_kind(&at, CandidateKind::High { j: 2, k: 3 }).exists());

        let below = candidates(&xi3(0.3, 0.0));
        assert!(!by_kind(&below, CandidateKind::Low { k: 2 }).exists());
        assert_eq!(minimize(&xi3(0.3, 0.0)).kind, CandidateKind::Normal);
    }

    #[test]
    fn candidate_order() {
        let mut s = xi4(1.0, 1.0, 1.0);
        s.transitions.reverse();
        s.transitions.push(Transition::new(1, 3, 1.0, 0.2));
        let kinds: Vec<_> = candidates(&s).iter().map(|c| c.kind).collect();
        assert_eq!(
            kinds,
            vec![
                CandidateKind::Normal,
                CandidateKind::Low { k: 2 },
                CandidateKind::Low { k: 3 },
                CandidateKind::High { j: 2, k: 3 },
                CandidateKind::High { j: 3, k: 4 },
            ]
        );
    }

    #[test]
    fn minimize_examples() {
        let m = minimize(&xi3(1.0, 1.0));
        assert_eq!(m.kind, CandidateKind::High { j: 2, k: 3 });
        assert_abs_diff_eq!(m.energy().unwrap(), -0.852_812_5, epsilon = 1e-12);
        assert_eq!(minimize(&xi3(0.2, 0.2)).kind, CandidateKind::Normal);
        assert_eq!(minimize(&xi3(0.2, 0.2)).energy(), Some(0.0));
        let m = minimize(&xi3(1.0, 0.0));
        assert_eq!(m.kind, CandidateKind::Low { k: 2 });
        assert_abs_diff_eq!(m.energy().unwrap(), -0.5625, epsilon = 1e-12);
    }

    #[test]
    fn exact_tie_goes_to_earlier_candidate() {
        // at the bifurcation the Low branch sits at E = 0 alongside Normal
        let s = xi3(0.5, 0.0);
        assert_eq!(candidates(&s)[1].energy(), Some(0.0));
        assert_eq!(minimize(&s).kind, CandidateKind::Normal);
        // two Low branches, the later one strictly lower
        let s = AtomicSystem {
            n: 3,
            omega: vec![0.0, 1.0, 2.0],
            transitions: vec![Transition::new(1, 3, 2.0, 2.0), Transition::new(1, 2, 1.0, 1.0)],
            atom_count: 1,
        };
        assert_eq!(minimize(&s).kind, CandidateKind::Low { k: 3 });
        assert_abs_diff_eq!(minimize(&s).energy().unwrap(), -1.125, epsilon = 1e-12);
    }

    #[test]
    fn closed_forms_annihilate_their_gradients() {
        for (mu12, mu23) in [(0.7, 0.0), (1.0, 1.0), (1.9, 0.4), (0.6, 1.7)] {
            let s = xi3(mu12, mu23);
            let low = by_kind(&candidates(&s), CandidateKind::Low { k: 2 }).critical.unwrap();
            let g = gradient(&s, &[low.matter_amp, 0.0]).unwrap();
            assert!(g.iter().all(|x| x.abs() < 1e-10), "{g:?}");

            // the High branch lives on the reduced (eta) surface, a two-level
            // problem with levels omega_2 and omega_3
            let high = by_kind(&candidates(&s), CandidateKind::High { j: 2, k: 3 });
            if let Some(c) = high.critical {
                let reduced = AtomicSystem {
                    n: 2,
                    omega: vec![0.0, 0.3],
                    transitions: vec![Transition::new(1, 2, 0.5, mu23)],
                    atom_count: 1,
                };
                let g = gradient(&reduced, &[c.matter_amp]).unwrap();
                assert!(g[0].abs() < 1e-10);
                let e = reduced_energy(&reduced, &[c.matter_amp]).unwrap() + 1.0;
                assert_abs_diff_eq!(e, c.energy, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn low_branch_is_continuous_at_its_bifurcation() {
        let star = 0.5;
        for d in [1e-2, 1e-4, 1e-6, 1e-8] {
            let c = minimize(&xi3(star + d, 0.0)).critical.unwrap();
            assert!(c.matter_amp < 3.0 * d.sqrt());
            assert!(c.energy <= 0.0 && c.energy > -10.0 * d * d);
        }
    }

    #[test]
    fn state_recipes() {
        let r = variational_state_params(&xi3(0.1, 0.1), &minimize(&xi3(0.1, 0.1))).unwrap();
        assert_eq!(r.matter, MatterPart { lower: 1, upper: None, mixing: 0.0 });
        assert_eq!(r.field.mode, None);
        assert_eq!(r.field.amplitude, 0.0);

        let mut s = xi3(1.0, 0.0);
        s.atom_count = 4;
        let r = variational_state_params(&s, &minimize(&s)).unwrap();
        assert_eq!(r.matter.upper, Some(2));
        assert_abs_diff_eq!(r.matter.mixing, 0.774_597, epsilon = 1e-6);
        assert_abs_diff_eq!(r.field.amplitude, 2.0 * 0.968_246, epsilon = 1e-6);

        let mut s = xi3(0.0, 1.0);
        s.atom_count = 1;
        let r = variational_state_params(&s, &minimize(&s)).unwrap();
        assert_eq!((r.matter.lower, r.matter.upper), (2, Some(3)));
        assert_abs_diff_eq!(r.matter.mixing, 0.963_177_5, epsilon = 1e-6);
        // 2 mu eta / (Omega (1 + eta^2))
        assert_abs_diff_eq!(r.field.amplitude, 1.998_593_3, epsilon = 1e-6);
        assert_abs_diff_eq!(r.photons(Pair::new(2, 3)), 3.994_375, epsilon = 1e-12);

        let absent = candidates(&xi3(0.1, 0.1))[1];
        assert!(matches!(variational_state_params(&s, &absent), Err(Error::CandidateAbsent(_))));
    }

    #[test]
    fn recipe_moments_factor() {
        let mut s = xi3(1.3, 0.2);
        s.atom_count = 3;
        let r = variational_state_params(&s, &minimize(&s)).unwrap();
        let m = Pair::new(1, 2);
        for level in 1..=3 {
            assert_eq!(r.joint_population_photons(level, m), r.population(level) * r.photons(m));
        }
        assert_abs_diff_eq!((1..=3).map(|l| r.population(l)).sum::<f64>(), 3.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn energies_scale_linearly(mu12 in 0.0..2.0f64, mu23 in 0.0..2.0f64, scale in 0.1..10.0f64) {
            let s = xi3(mu12, mu23);
            let a = candidates(&s);
            let b = candidates(&s.scaled(scale));
            for (x, y) in a.iter().zip(&b) {
                prop_assert_eq!(x.exists(), y.exists());
                if let (Some(cx), Some(cy)) = (x.critical, y.critical) {
                    prop_assert!((cy.energy - scale * cx.energy).abs() <= 1e-10 * (1.0 + cy.energy.abs()));
                    prop_assert!((cy.matter_amp - cx.matter_amp).abs() <= 1e-10);
                }
            }
        }

        #[test]
        fn existing_candidates_respect_their_boundary_values(mu12 in 0.0..3.0f64, mu23 in 0.0..3.0f64) {
            for c in candidates(&xi3(mu12, mu23)) {
                if let Some(cp) = c.critical {
                    match c.kind {
                        CandidateKind::Normal => prop_assert_eq!(cp.energy, 0.0),
                        CandidateKind::Low { .. } => prop_assert!(cp.energy <= 0.0),
                        CandidateKind::High { j, .. } => prop_assert!(cp.energy <= xi3(0.0, 0.0).level(j)),
                    }
                }
            }
        }
    }
}
