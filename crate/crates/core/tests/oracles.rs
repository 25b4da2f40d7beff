//! Cross-checks of the engine against independent constructions.

use multidicke::model::presets::{two_level, xi3, xi4};
use multidicke::phasemap::{scan_grid, Axis, RegionLabel};
use multidicke::quantum::{converge_cutoff, ground_state, ExactConfig};
use multidicke::varsurface::{minimize, minimize_numeric, NumericOptions};
use multidicke::{AtomicSystem, Pair, Transition};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Single-pair collective energy written out from scratch:
/// `omega_j - (d Omega - 4 mu^2)^2 / (16 Omega mu^2)` when `4 mu^2 >= d Omega`.
fn pair_energy(s: &AtomicSystem, t: &Transition) -> Option<f64> {
    let d = s.omega[t.k - 1] - s.omega[t.j - 1];
    let m2 = t.mu * t.mu;
    (t.mu > 0.0 && 4.0 * m2 >= d * t.mode_freq)
        .then(|| s.omega[t.j - 1] - (d * t.mode_freq - 4.0 * m2).powi(2) / (16.0 * t.mode_freq * m2))
}

#[test]
fn four_level_grid_matches_direct_enumeration() {
    let axes = [Pair::new(1, 2), Pair::new(2, 3), Pair::new(3, 4)].map(|p| Axis::new(p, 0.0, 2.0));
    let grid = scan_grid(&xi4(0.0, 0.0, 0.0), &axes, 10).unwrap();
    assert_eq!(grid.cells.len(), 1000);
    for c in &grid.cells {
        let s = xi4(c.couplings[0], c.couplings[1], c.couplings[2]);
        let best = s
            .transitions
            .iter()
            .filter_map(|t| pair_energy(&s, t))
            .fold(0.0f64, f64::min);
        assert!((c.energy - best).abs() < 1e-12, "{:?}: {} vs {best}", c.couplings, c.energy);
        if c.label == RegionLabel::Normal {
            assert_eq!(c.energy, 0.0);
        }
    }
}

#[test]
fn closed_forms_match_numeric_minimum_on_random_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..60 {
        let n = rng.gen_range(2..=4);
        let mut omega = vec![0.0];
        for _ in 1..n {
            let w = *omega.last().unwrap() + rng.gen_range(0.2..1.0);
            omega.push(w);
        }
        let mut transitions = Vec::new();
        for j in 1..=n {
            for k in j + 1..=n {
                if k == j + 1 || rng.gen_bool(0.4) {
                    transitions.push(Transition::new(j, k, rng.gen_range(0.3..1.2), rng.gen_range(0.0..1.8)));
                }
            }
        }
        let s = AtomicSystem::new(omega, transitions, 1).unwrap();
        let closed = minimize(&s).energy().unwrap();
        let numeric = minimize_numeric(&s, &NumericOptions::default()).unwrap();
        // the closed forms are single-pair critical points; the numeric
        // search may only tie or do worse
        assert!(numeric.energy >= closed - 1e-9, "{s:?}: numeric {} below closed {closed}", numeric.energy);
        assert!((numeric.energy - closed).abs() < 1e-6, "{s:?}: {} vs {closed}", numeric.energy);
    }
}

/// Quantum Rabi model, one atom, built independently on `|n, g>, |n, e>`.
fn rabi_ground(mu: f64, cutoff: usize) -> f64 {
    let dim = 2 * (cutoff + 1);
    let idx = |n: usize, excited: usize| 2 * n + excited;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for n in 0..=cutoff {
        h[(idx(n, 0), idx(n, 0))] = n as f64;
        h[(idx(n, 1), idx(n, 1))] = n as f64 + 1.0;
        if n < cutoff {
            let g = -mu * ((n + 1) as f64).sqrt();
            for (a, b) in [(idx(n, 0), idx(n + 1, 1)), (idx(n + 1, 0), idx(n, 1))] {
                h[(a, b)] = g;
                h[(b, a)] = g;
            }
        }
    }
    SymmetricEigen::new(h).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

#[test]
fn single_atom_matches_the_rabi_model() {
    for mu in [0.0, 0.3, 0.7, 1.2] {
        let r = ground_state(&two_level(mu), &[40], &ExactConfig::default()).unwrap();
        let expected = rabi_ground(mu, 40);
        assert!((r.energy_per_particle - expected).abs() < 1e-10, "mu {mu}: {} vs {expected}", r.energy_per_particle);
    }
}

#[test]
fn single_atom_rwa_is_jaynes_cummings() {
    // ground state lies in the 0- or 1-excitation block
    for mu in [0.2, 0.9, 1.7] {
        let cfg = ExactConfig { rwa: true, ..ExactConfig::default() };
        let r = ground_state(&two_level(mu), &[6], &cfg).unwrap();
        let one = 1.0 - mu;
        assert!((r.energy_per_particle - one.min(0.0)).abs() < 1e-12, "mu {mu}");
    }
}

#[test]
fn exact_energy_is_below_variational_for_larger_samples() {
    for (a, b) in [(0.8, 0.2), (0.3, 1.2), (1.3, 1.3)] {
        let mut s = xi3(a, b);
        s.atom_count = 3;
        let (_, r) = converge_cutoff(&s, &[4, 4], 1e-6, &ExactConfig::default()).unwrap();
        assert!(r.truncation_converged);
        let var = minimize(&s).energy().unwrap();
        assert!(r.energy_per_particle <= var + 1e-9, "({a}, {b}): {} vs {var}", r.energy_per_particle);
    }
}
