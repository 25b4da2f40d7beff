//! Coherent-state variational energy surface.
//!
//! The trial state is a product of Heisenberg-Weyl coherent states (one per
//! field mode) and a U(n) coherent state of the atoms with `gamma_1 = 1`,
//! `gamma_k = rho_k exp(i phi_k)`. Every function here works per particle:
//! field radii are `r_jk = R_jk / sqrt(N_a)`.
//!
//! Matter radii are passed as slices over levels `2..=n` (index 0 is level 2);
//! level 1 carries the implicit radius 1.

mod candidates;
mod numeric;

pub use candidates::{
    candidates, minimize, variational_state_params, CandidateKind, CriticalPoint, FieldPart,
    MatterPart, StateRecipe, VariationalCandidate,
};
pub use numeric::{minimize_numeric, NumericMinimum, NumericOptions};
pub(crate) use candidates::candidate_for;

use crate::error::{Error, Result};
use crate::model::AtomicSystem;

/// Field radius and phase per transition, in the order of `system.transitions`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldAmplitudes {
    pub radii: Vec<f64>,
    pub phases: Vec<f64>,
}

impl FieldAmplitudes {
    pub fn real(radii: Vec<f64>) -> Self {
        let phases = vec![0.0; radii.len()];
        FieldAmplitudes { radii, phases }
    }
}

/// Matter radius and phase for levels `2..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatterAmplitudes {
    pub radii: Vec<f64>,
    pub phases: Vec<f64>,
}

impl MatterAmplitudes {
    pub fn real(radii: Vec<f64>) -> Self {
        let phases = vec![0.0; radii.len()];
        MatterAmplitudes { radii, phases }
    }

    /// `R_0^2 = sum_{j>=2} rho_j^2`.
    pub fn r0_squared(&self) -> f64 {
        self.radii.iter().map(|r| r * r).sum()
    }
}

/// Phase assignment at the minimum: `theta_jk` per transition and the
/// relative matter phase `phi_k - phi_j` per transition.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseAssignment {
    pub theta: Vec<f64>,
    pub relative_phi: Vec<f64>,
}

#[inline]
fn radius_of(radii: &[f64], level: usize) -> f64 {
    if level == 1 {
        1.0
    } else {
        radii[level - 2]
    }
}

#[inline]
fn phase_of(phases: &[f64], level: usize) -> f64 {
    if level == 1 {
        0.0
    } else {
        phases[level - 2]
    }
}

fn check_matter(system: &AtomicSystem, radii: &[f64]) -> Result<()> {
    if radii.len() != system.n - 1 {
        return Err(Error::DimensionMismatch { expected: system.n - 1, found: radii.len() });
    }
    if radii.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Full per-particle energy surface as a function of all amplitudes and phases.
pub fn energy_surface_full(
    system: &AtomicSystem,
    field: &FieldAmplitudes,
    matter: &MatterAmplitudes,
) -> Result<f64> {
    let l = system.transitions.len();
    if field.radii.len() != l || field.phases.len() != l {
        return Err(Error::DimensionMismatch { expected: l, found: field.radii.len() });
    }
    if matter.phases.len() != matter.radii.len() {
        return Err(Error::DimensionMismatch {
            expected: matter.radii.len(),
            found: matter.phases.len(),
        });
    }
    check_matter(system, &matter.radii)?;
    if field.radii.iter().chain(&field.phases).chain(&matter.phases).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }

    let denom = 1.0 + matter.r0_squared();
    let mut photon = 0.0;
    let mut interaction = 0.0;
    for (i, t) in system.transitions.iter().enumerate() {
        let r = field.radii[i];
        photon += t.mode_freq * r * r;
        let rho = radius_of(&matter.radii, t.j) * radius_of(&matter.radii, t.k);
        let dphi = phase_of(&matter.phases, t.k) - phase_of(&matter.phases, t.j);
        interaction += t.mu * r * rho * field.phases[i].cos() * dphi.cos();
    }
    let diagonal: f64 = (2..=system.n)
        .map(|j| system.level(j) * matter.radii[j - 2].powi(2))
        .sum::<f64>();
    Ok(photon + diagonal / denom - 4.0 * interaction / denom)
}

/// Canonical representative of the minimizing phases: all zero.
///
/// With `mu_jk >= 0` the minimum needs `cos(theta) cos(phi_k - phi_j) > 0`;
/// the set `{0, pi}^2` is degenerate and `(0, 0)` is reported. Zero-coupling
/// transitions leave their phases free and are also reported as 0.
pub fn optimal_phases(system: &AtomicSystem) -> PhaseAssignment {
    let l = system.transitions.len();
    PhaseAssignment { theta: vec![0.0; l], relative_phi: vec![0.0; l] }
}

/// Stationary field radii at optimal phases:
/// `r_jk = 2 mu_jk rho_j rho_k / (Omega_jk (1 + R_0^2))`.
pub fn photon_stationary_r(system: &AtomicSystem, radii: &[f64]) -> Result<Vec<f64>> {
    check_matter(system, radii)?;
    let denom = 1.0 + radii.iter().map(|r| r * r).sum::<f64>();
    Ok(system
        .transitions
        .iter()
        .map(|t| {
            2.0 * t.mu * radius_of(radii, t.j) * radius_of(radii, t.k) / (t.mode_freq * denom)
        })
        .collect())
}

/// Energy after eliminating the field at its stationary point:
/// `sum_j omega_j rho_j^2/D - 4 sum (mu^2/Omega) (rho_j rho_k / D)^2`, `D = 1 + R_0^2`.
pub fn reduced_energy(system: &AtomicSystem, radii: &[f64]) -> Result<f64> {
    check_matter(system, radii)?;
    Ok(reduced_energy_unchecked(system, radii))
}

pub(crate) fn reduced_energy_unchecked(system: &AtomicSystem, radii: &[f64]) -> f64 {
    let denom = 1.0 + radii.iter().map(|r| r * r).sum::<f64>();
    let mut diagonal = 0.0;
    for (i, r) in radii.iter().enumerate() {
        diagonal += system.omega[i + 1] * r * r;
    }
    let mut interaction = 0.0;
    for t in &system.transitions {
        let x = radius_of(radii, t.j) * radius_of(radii, t.k) / denom;
        interaction += t.mu * t.mu / t.mode_freq * x * x;
    }
    diagonal / denom - 4.0 * interaction
}

/// Analytic gradient of [`reduced_energy`] with respect to `rho_2..rho_n`.
///
/// With populations `p_i = rho_i^2 / D` and `g = 4 mu^2 / Omega`:
/// `dE/drho_j = (2 rho_j / D) [omega_j - sum_i omega_i p_i - sum_b g_jb p_b
/// + 2 sum_pairs g_ab p_a p_b]`.
pub fn gradient(system: &AtomicSystem, radii: &[f64]) -> Result<Vec<f64>> {
    check_matter(system, radii)?;
    let n = system.n;
    let denom = 1.0 + radii.iter().map(|r| r * r).sum::<f64>();
    let pop: Vec<f64> = (1..=n).map(|j| radius_of(radii, j).powi(2) / denom).collect();
    let mean_level: f64 = (1..=n).map(|j| system.level(j) * pop[j - 1]).sum();

    let mut field_pull = vec![0.0; n];
    let mut pair_energy = 0.0;
    for t in &system.transitions {
        let g = 4.0 * t.mu * t.mu / t.mode_freq;
        field_pull[t.j - 1] += g * pop[t.k - 1];
        field_pull[t.k - 1] += g * pop[t.j - 1];
        pair_energy += g * pop[t.j - 1] * pop[t.k - 1];
    }

    Ok((2..=n)
        .map(|j| {
            let bracket = system.level(j) - mean_level - field_pull[j - 1] + 2.0 * pair_energy;
            2.0 * radii[j - 2] / denom * bracket
        })
        .collect())
}
