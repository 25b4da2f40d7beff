//! Exact ground state on a truncated Fock basis.
//!
//! The basis is the raw occupation basis `|nu..; n..>`; the parities of the
//! charges `K_2..K_n` split it into blocks that the full Hamiltonian never
//! connects, and each block is diagonalized separately.

mod basis;
mod eigen;
mod hamiltonian;

pub use basis::{atomic_multiplicity, basis_size, build_basis, FockKet, TruncatedBasis};
pub use eigen::{lowest_dense, lowest_eigenpair, lowest_lanczos, residual_norm, EigenPair, SolverConfig};
pub use hamiltonian::{build_hamiltonian, split_sectors, SectorLabel, SparseMatrix, SymmetrySector};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AtomicSystem, Pair};
use crate::varsurface::StateRecipe;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactConfig {
    pub rwa: bool,
    /// Largest basis size accepted.
    pub budget: usize,
    /// Ground-state probability allowed on states with a saturated mode.
    pub boundary_threshold: f64,
    /// Sectors whose ground energies lie this close to the minimum are reported as degenerate.
    pub degeneracy_tol: f64,
    pub solver: SolverConfig,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            rwa: false,
            budget: 2_000_000,
            boundary_threshold: 1e-8,
            degeneracy_tol: 1e-10,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumGroundResult {
    /// `mu_j_k -> value` for every transition.
    pub couplings: BTreeMap<String, f64>,
    pub pairs: Vec<Pair>,
    pub atom_count: usize,
    pub cutoffs: Vec<u32>,
    pub rwa: bool,
    pub basis_size: usize,
    pub energy_per_particle: f64,
    pub sector: String,
    /// Every sector within the degeneracy tolerance of the minimum, the
    /// reported one first.
    pub degenerate_sectors: Vec<String>,
    /// `<nu_t>/N_a` per transition.
    pub nu: Vec<f64>,
    /// `<A_ll>/N_a` per level.
    pub pop: Vec<f64>,
    /// Probability on states where mode `t` sits at its cutoff.
    pub mode_boundary_weight: Vec<f64>,
    /// Probability on states with any mode at its cutoff.
    pub boundary_weight: f64,
    /// `boundary_weight` below the configured threshold.
    pub truncation_converged: bool,
    pub residual: f64,
    /// Ground vector in basis order (zero outside the winning sector).
    #[serde(skip)]
    pub vector: Vec<f64>,
}

impl QuantumGroundResult {
    pub fn mode_index(&self, pair: Pair) -> Result<usize> {
        self.pairs.iter().position(|&p| p == pair).ok_or(Error::UnknownTransition(pair))
    }
}

/// Exact ground state at fixed cutoffs.
pub fn ground_state(system: &AtomicSystem, cutoffs: &[u32], config: &ExactConfig) -> Result<QuantumGroundResult> {
    let basis = build_basis(system, cutoffs, config.budget)?;
    let h = build_hamiltonian(system, &basis, config.rwa)?;
    let sectors = split_sectors(system, &basis);
    let solved: Vec<EigenPair> = sectors
        .par_iter()
        .map(|sec| lowest_eigenpair(&h.restrict(&sec.indices), &config.solver))
        .collect::<Result<_>>()?;

    let e_min = solved.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
    let degenerate: Vec<usize> =
        (0..sectors.len()).filter(|&i| solved[i].value <= e_min + config.degeneracy_tol).collect();
    let win = degenerate[0];
    let pair = &solved[win];

    let mut vector = vec![0.0; basis.len()];
    for (&g, &x) in sectors[win].indices.iter().zip(&pair.vector) {
        vector[g] = x;
    }
    let n_a = system.atom_count as f64;
    let modes = basis.modes();
    let mut nu = vec![0.0; modes];
    let mut pop = vec![0.0; system.n];
    let mut mode_boundary_weight = vec![0.0; modes];
    let mut boundary_weight = 0.0;
    let atomic = basis.atomic_count();
    for &g in &sectors[win].indices {
        let w = vector[g] * vector[g];
        if w == 0.0 {
            continue;
        }
        let mut saturated = false;
        for t in 0..modes {
            let v = basis.photon(g, t);
            nu[t] += w * v as f64;
            if v == cutoffs[t] {
                mode_boundary_weight[t] += w;
                saturated = true;
            }
        }
        if saturated {
            boundary_weight += w;
        }
        for (l, &n) in basis.atomic_state(g % atomic).iter().enumerate() {
            pop[l] += w * n as f64;
        }
    }
    nu.iter_mut().for_each(|x| *x /= n_a);
    pop.iter_mut().for_each(|x| *x /= n_a);

    Ok(QuantumGroundResult {
        couplings: system.transitions.iter().map(|t| (t.pair().coupling_name(), t.mu)).collect(),
        pairs: system.pairs(),
        atom_count: system.atom_count,
        cutoffs: cutoffs.to_vec(),
        rwa: config.rwa,
        basis_size: basis.len(),
        energy_per_particle: pair.value / n_a,
        sector: sectors[win].label.name.clone(),
        degenerate_sectors: degenerate.iter().map(|&i| sectors[i].label.name.clone()).collect(),
        nu,
        pop,
        mode_boundary_weight,
        boundary_weight,
        truncation_converged: boundary_weight < config.boundary_threshold,
        residual: pair.residual,
        vector,
    })
}

/// Normalized photon imbalance `(<nu_B> - <nu_A>)/(<nu_B> + <nu_A>)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DeltaNu {
    Defined(f64),
    /// Both modes empty (0/0).
    Undefined,
}

impl DeltaNu {
    pub fn value(&self) -> Option<f64> {
        match self {
            DeltaNu::Defined(v) => Some(*v),
            DeltaNu::Undefined => None,
        }
    }
}

impl Serialize for DeltaNu {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DeltaNu::Defined(v) => s.serialize_f64(*v),
            DeltaNu::Undefined => s.serialize_str("undefined"),
        }
    }
}

/// Photon sums (per particle) at or below this count as empty.
pub const DELTA_NU_FLOOR: f64 = 1e-12;

pub fn delta_nu(result: &QuantumGroundResult, a: Pair, b: Pair) -> Result<DeltaNu> {
    let na = result.nu[result.mode_index(a)?];
    let nb = result.nu[result.mode_index(b)?];
    let sum = na + nb;
    Ok(if sum <= DELTA_NU_FLOOR { DeltaNu::Undefined } else { DeltaNu::Defined((nb - na) / sum) })
}

/// Increase cutoffs until the energy per particle changes by less than
/// `tol` between successive solves and the boundary weight is below the
/// threshold. Modes that carry more than their share of the boundary
/// weight are doubled; if none does, all are.
pub fn converge_cutoff(
    system: &AtomicSystem,
    start: &[u32],
    tol: f64,
    config: &ExactConfig,
) -> Result<(Vec<u32>, QuantumGroundResult)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let threshold = config.boundary_threshold;
    let share = threshold / start.len().max(1) as f64;
    let mut cutoffs = start.to_vec();
    let mut previous: Option<f64> = None;
    loop {
        let result = ground_state(system, &cutoffs, config)?;
        let e = result.energy_per_particle;
        let done = match previous {
            None => result.boundary_weight < threshold * threshold,
            Some(p) => (e - p).abs() < tol && result.truncation_converged,
        };
        if done {
            return Ok((cutoffs, result));
        }
        let saturated: Vec<usize> =
            (0..cutoffs.len()).filter(|&t| result.mode_boundary_weight[t] > share).collect();
        let grow: Vec<usize> = if saturated.is_empty() { (0..cutoffs.len()).collect() } else { saturated };
        for t in grow {
            cutoffs[t] = (2 * cutoffs[t]).max(1);
        }
        let size = basis_size(&cutoffs, system.atom_count, system.n).unwrap_or(usize::MAX);
        if size > config.budget {
            return Err(Error::BudgetExceeded { size, budget: config.budget });
        }
        previous = Some(e);
    }
}

fn ln_factorial(k: u32) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Projection of the variational product state onto the truncated basis
/// (not renormalized): `N_a` atoms in `(b_lower^+ + x b_upper^+)/sqrt(1 + x^2)`
/// times a coherent state on the active mode.
pub fn product_state_vector(system: &AtomicSystem, basis: &TruncatedBasis, recipe: &StateRecipe) -> Result<Vec<f64>> {
    let x = recipe.matter.mixing;
    let norm = (1.0 + x * x).sqrt();
    let mut level_amp = vec![0.0; basis.levels()];
    level_amp[recipe.matter.lower - 1] = 1.0 / norm;
    if let Some(u) = recipe.matter.upper {
        level_amp[u - 1] = x / norm;
    }
    let half_ln_n = 0.5 * ln_factorial(basis.atom_count() as u32);
    let atomic_amp: Vec<f64> = (0..basis.atomic_count())
        .map(|r| {
            let mut ln = half_ln_n;
            for (l, &n) in basis.atomic_state(r).iter().enumerate() {
                if n == 0 {
                    continue;
                }
                if level_amp[l] == 0.0 {
                    return 0.0;
                }
                ln += n as f64 * level_amp[l].ln() - 0.5 * ln_factorial(n);
            }
            ln.exp()
        })
        .collect();

    let active = match recipe.field.mode {
        Some(p) => Some(system.transition_index(p).ok_or(Error::UnknownTransition(p))?),
        None => None,
    };
    let alpha = recipe.field.amplitude;
    let field_amp = |t: usize, nu: u32| -> f64 {
        if Some(t) != active || alpha == 0.0 {
            return if nu == 0 { 1.0 } else { 0.0 };
        }
        (-0.5 * alpha * alpha + nu as f64 * alpha.ln() - 0.5 * ln_factorial(nu)).exp()
    };
    Ok((0..basis.len())
        .map(|i| {
            (0..basis.modes()).fold(atomic_amp[i % basis.atomic_count()], |acc, t| {
                if acc == 0.0 {
                    0.0
                } else {
                    acc * field_amp(t, basis.photon(i, t))
                }
            })
        })
        .collect())
}

/// `<psi|H|psi>/(N_a <psi|psi>)` for the truncated product state of `recipe`.
pub fn product_state_energy(system: &AtomicSystem, cutoffs: &[u32], recipe: &StateRecipe, config: &ExactConfig) -> Result<f64> {
    let basis = build_basis(system, cutoffs, config.budget)?;
    let h = build_hamiltonian(system, &basis, config.rwa)?;
    let psi = product_state_vector(system, &basis, recipe)?;
    let mut hpsi = vec![0.0; psi.len()];
    h.matvec(&psi, &mut hpsi);
    let num: f64 = psi.iter().zip(&hpsi).map(|(a, b)| a * b).sum();
    let den: f64 = psi.iter().map(|a| a * a).sum();
    Ok(num / den / system.atom_count as f64)
}
