//! Closed-form expectation values of the variational ground state.
//!
//! In region `S(j,k)` everything follows from `s = (omega_k - omega_j) Omega / (4 mu^2)`:
//! `p = (1 + s)/2`, `q = (1 - s)/2`, `<nu>/N_a = (mu/Omega)^2 (1 - s^2)`,
//! `|<A_jk>|/N_a = sqrt(p q)` and `(Delta A_jj)^2 / N_a = p q`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AtomicSystem, Pair};
use crate::phasemap::RegionLabel;
use crate::varsurface::VariationalCandidate;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coherence {
    pub magnitude: f64,
    /// 0 or pi; the canonical representative 0 is always reported.
    pub phase: f64,
}

/// Per-particle observables. Per-transition vectors follow
/// `system.transitions`; per-level vectors run over levels `1..=n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSet {
    pub region: RegionLabel,
    pub nu: Vec<f64>,
    pub pop: Vec<f64>,
    pub coh: Vec<Coherence>,
    pub var_pop: Vec<f64>,
    pub var_nu: Vec<f64>,
}

impl ObservableSet {
    /// The transition carrying the field, if any.
    pub fn active_pair(&self) -> Option<Pair> {
        self.region.pair()
    }
}

/// `(p, q, 1 - s^2)` of the active pair.
fn collective_shape(system: &AtomicSystem, pair: Pair) -> Result<(f64, f64, f64)> {
    let t = system.transition(pair)?;
    let s = (system.level(pair.k) - system.level(pair.j)) * t.mode_freq / (4.0 * t.mu * t.mu);
    let p = (1.0 + s) / 2.0;
    // exact for p in [1/2, 1], so p + q == 1 bit for bit
    Ok((p, 1.0 - p, 1.0 - s * s))
}

fn require_existing(candidate: &VariationalCandidate) -> Result<()> {
    if candidate.exists() {
        Ok(())
    } else {
        Err(Error::CandidateAbsent(candidate.kind.to_string()))
    }
}

pub fn expectations(system: &AtomicSystem, candidate: &VariationalCandidate) -> Result<ObservableSet> {
    require_existing(candidate)?;
    let l = system.transitions.len();
    let mut out = ObservableSet {
        region: candidate.kind.into(),
        nu: vec![0.0; l],
        pop: vec![0.0; system.n],
        coh: vec![Coherence { magnitude: 0.0, phase: 0.0 }; l],
        var_pop: vec![0.0; system.n],
        var_nu: vec![0.0; l],
    };
    match candidate.pair() {
        None => out.pop[0] = 1.0,
        Some(pair) => {
            let (p, q, width) = collective_shape(system, pair)?;
            let t = system.transition(pair)?;
            let i = system.transition_index(pair).expect("checked above");
            let nu = (t.mu / t.mode_freq).powi(2) * width;
            out.nu[i] = nu;
            out.var_nu[i] = nu;
            out.pop[pair.j - 1] = p;
            out.pop[pair.k - 1] = q;
            out.coh[i].magnitude = 0.5 * width.sqrt();
            out.var_pop[pair.j - 1] = 0.25 * width;
            out.var_pop[pair.k - 1] = 0.25 * width;
        }
    }
    Ok(out)
}

/// Poisson photon-number distribution `P(0..=count)` of the active mode,
/// mean `N_a r_c^2`. Computed in log space.
pub fn photon_distribution(
    system: &AtomicSystem,
    candidate: &VariationalCandidate,
    count: usize,
) -> Result<Vec<f64>> {
    require_existing(candidate)?;
    let r = candidate.critical.map_or(0.0, |c| c.photon_amp);
    let lambda = system.atom_count as f64 * r * r;
    if lambda == 0.0 {
        let mut p = vec![0.0; count + 1];
        p[0] = 1.0;
        return Ok(p);
    }
    let ln_lambda = lambda.ln();
    let mut ln_fact = 0.0;
    Ok((0..=count)
        .map(|m| {
            if m > 0 {
                ln_fact += (m as f64).ln();
            }
            (-lambda + m as f64 * ln_lambda - ln_fact).exp()
        })
        .collect())
}

/// Binomial distribution of the number `x` of atoms in the upper level of
/// the active pair, `P(x) = C(N_a, x) p^(N_a - x) q^x`, `x = 0..=N_a`.
pub fn matter_distribution(system: &AtomicSystem, candidate: &VariationalCandidate) -> Result<Vec<f64>> {
    require_existing(candidate)?;
    let n = system.atom_count;
    let (p, q) = match candidate.pair() {
        None => (1.0, 0.0),
        Some(pair) => {
            let (p, q, _) = collective_shape(system, pair)?;
            (p, q)
        }
    };
    let mut ln_choose = 0.0;
    Ok((0..=n)
        .map(|x| {
            if x > 0 {
                ln_choose += ((n - x + 1) as f64).ln() - (x as f64).ln();
            }
            let lower = (n - x) as f64;
            let upper = x as f64;
            // 0^0 = 1 without touching ln(0)
            let lp = if lower == 0.0 { 0.0 } else { lower * p.ln() };
            let lq = if upper == 0.0 { 0.0 } else { upper * q.ln() };
            (ln_choose + lp + lq).exp()
        })
        .collect())
}

/// `<nu_jk> - 4 (mu/Omega)^2 (Delta A_jj)^2` (per particle) in region `S(j,k)`.
pub fn universal_relation_residual(system: &AtomicSystem, candidate: &VariationalCandidate) -> Result<f64> {
    let pair = candidate
        .pair()
        .ok_or_else(|| Error::InvalidArgument("universal relation needs a collective region".into()))?;
    let obs = expectations(system, candidate)?;
    let t = system.transition(pair)?;
    let i = system.transition_index(pair).expect("checked above");
    Ok(obs.nu[i] - 4.0 * (t.mu / t.mode_freq).powi(2) * obs.var_pop[pair.j - 1])
}
