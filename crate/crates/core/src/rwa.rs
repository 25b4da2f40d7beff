//! Rotating-wave approximation and the symmetry bookkeeping it induces.
//!
//! Under the RWA the interaction keeps `A_jk a^+ + A_kj a` only. Its
//! coherent-state expectation is `-2 mu r rho_j rho_k cos(phi_k - phi_j - theta)/D`
//! against `-4 mu r rho_j rho_k cos(theta) cos(phi_k - phi_j)/D` for the full
//! model, so every variational result maps over by `mu -> mu/2`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::AtomicSystem;
use crate::phasemap::{classify, scan_grid_with, Axis, PhaseGrid, RegionLabel};
use crate::quantum::FockKet;
use crate::varsurface::{FieldAmplitudes, MatterAmplitudes};

/// The system whose full-model variational solutions are the RWA solutions
/// of `system`: every coupling halved.
pub fn rwa_rescale(system: &AtomicSystem) -> AtomicSystem {
    let mut out = system.clone();
    for t in &mut out.transitions {
        t.mu /= 2.0;
    }
    out
}

/// Variational label and energy per particle of the RWA problem.
pub fn classify_rwa(system: &AtomicSystem) -> (RegionLabel, f64) {
    classify(&rwa_rescale(system))
}

/// Phase grid of the RWA problem at the listed (unscaled) couplings.
pub fn scan_grid_rwa(system: &AtomicSystem, axes: &[Axis], resolution: usize) -> Result<PhaseGrid> {
    scan_grid_with(system, axes, resolution, classify_rwa)
}

/// Per-particle coherent-state energy surface of the RWA Hamiltonian.
pub fn energy_surface_rwa(
    system: &AtomicSystem,
    field: &FieldAmplitudes,
    matter: &MatterAmplitudes,
) -> Result<f64> {
    let l = system.transitions.len();
    if field.radii.len() != l || field.phases.len() != l {
        return Err(Error::DimensionMismatch { expected: l, found: field.radii.len() });
    }
    if matter.radii.len() != system.n - 1 || matter.phases.len() != system.n - 1 {
        return Err(Error::DimensionMismatch { expected: system.n - 1, found: matter.radii.len() });
    }
    let rho = |j: usize| if j == 1 { 1.0 } else { matter.radii[j - 2] };
    let phi = |j: usize| if j == 1 { 0.0 } else { matter.phases[j - 2] };
    let denom = 1.0 + matter.r0_squared();
    let mut e = 0.0;
    for (i, t) in system.transitions.iter().enumerate() {
        let r = field.radii[i];
        e += t.mode_freq * r * r;
        e -= 2.0 * t.mu * r * rho(t.j) * rho(t.k) * (phi(t.k) - phi(t.j) - field.phases[i]).cos() / denom;
    }
    for j in 2..=system.n {
        e += system.level(j) * rho(j) * rho(j) / denom;
    }
    if e.is_finite() {
        Ok(e)
    } else {
        Err(Error::NonFinite)
    }
}

/// Excitation cost `lambda_j` of lifting one atom from level 1 to level `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcitationWeights {
    /// `lambda_1..lambda_n`, with `lambda_1 = 0`.
    pub lambda: Vec<i64>,
}

impl ExcitationWeights {
    /// `lambda_2..lambda_n`.
    pub fn excited(&self) -> &[i64] {
        &self.lambda[1..]
    }
}

/// Propagate `lambda_k = lambda_j + 1` along every mode `(j, k)`, starting
/// from `lambda_1 = 0`. Every listed mode counts, whatever its coupling.
pub fn excitation_weights(system: &AtomicSystem) -> Result<ExcitationWeights> {
    system.ensure_valid()?;
    let n = system.n;
    let mut lambda: Vec<Option<i64>> = vec![None; n];
    lambda[0] = Some(0);
    let mut queue = VecDeque::from([1usize]);
    while let Some(level) = queue.pop_front() {
        let here = lambda[level - 1].expect("queued levels are assigned");
        for t in &system.transitions {
            let (other, value) = if t.j == level {
                (t.k, here + 1)
            } else if t.k == level {
                (t.j, here - 1)
            } else {
                continue;
            };
            match lambda[other - 1] {
                None => {
                    lambda[other - 1] = Some(value);
                    queue.push_back(other);
                }
                Some(prev) if prev != value => {
                    return Err(Error::InconsistentWeights { level: other, first: prev, second: value });
                }
                Some(_) => {}
            }
        }
    }
    let lambda = lambda
        .into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or(Error::Disconnected(i + 1)))
        .collect::<Result<_>>()?;
    Ok(ExcitationWeights { lambda })
}

/// `K_j = n_j + sum_{k<j} nu_kj - sum_{k>j} nu_jk` as integer linear forms:
/// `photon_coeff[j][t]` is the coefficient of mode `t` in `K_{j+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryCharges {
    pub photon_coeff: Vec<Vec<i64>>,
}

impl SymmetryCharges {
    pub fn new(system: &AtomicSystem) -> Self {
        let mut photon_coeff = vec![vec![0; system.transitions.len()]; system.n];
        for (i, t) in system.transitions.iter().enumerate() {
            photon_coeff[t.j - 1][i] -= 1;
            photon_coeff[t.k - 1][i] += 1;
        }
        SymmetryCharges { photon_coeff }
    }

    pub fn levels(&self) -> usize {
        self.photon_coeff.len()
    }
}

/// `(K_1..K_n)` on an occupation-number ket.
pub fn charge_of_state(charges: &SymmetryCharges, ket: &FockKet) -> Vec<i64> {
    charges
        .photon_coeff
        .iter()
        .zip(&ket.atoms)
        .map(|(coeff, &n)| {
            n as i64 + coeff.iter().zip(&ket.photons).map(|(c, &nu)| c * nu as i64).sum::<i64>()
        })
        .collect()
}

/// Parities `Pi_j = exp(i pi K_j)` as 0 (even) or 1 (odd).
pub fn parities(charges: &SymmetryCharges, ket: &FockKet) -> Vec<u8> {
    charge_of_state(charges, ket).into_iter().map(|k| k.rem_euclid(2) as u8).collect()
}

/// Total excitation number `M = sum_l lambda_l K_l`.
pub fn excitation_number(weights: &ExcitationWeights, charges: &SymmetryCharges, ket: &FockKet) -> i64 {
    charge_of_state(charges, ket).iter().zip(&weights.lambda).map(|(k, l)| k * l).sum()
}
