//! Benchmark fixtures shared by the criterion benches.

use multidicke::model::presets::xi3;
use multidicke::phasemap::Axis;
use multidicke::{AtomicSystem, Pair};

/// Ladder system deep in the collective region, with `atoms` atoms.
pub fn ladder(mu12: f64, mu23: f64, atoms: usize) -> AtomicSystem {
    let mut s = xi3(mu12, mu23);
    s.atom_count = atoms;
    s
}

/// Both ladder couplings over `[0, 2]`.
pub fn ladder_axes() -> [Axis; 2] {
    [Axis::new(Pair::new(1, 2), 0.0, 2.0), Axis::new(Pair::new(2, 3), 0.0, 2.0)]
}
