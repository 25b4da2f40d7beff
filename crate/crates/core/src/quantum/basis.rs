use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::AtomicSystem;

/// Occupation-number ket `|nu_1 .. nu_l; n_1 .. n_n>`, photons in the order
/// of `system.transitions`, atoms per level.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FockKet {
    pub photons: Vec<u32>,
    pub atoms: Vec<u32>,
}

impl FockKet {
    pub fn new(photons: Vec<u32>, atoms: Vec<u32>) -> Self {
        FockKet { photons, atoms }
    }
}

fn choose(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Number of ways to put `atoms` bosons in `levels` levels.
pub fn atomic_multiplicity(atoms: usize, levels: usize) -> Option<usize> {
    choose((atoms + levels - 1) as u64, (levels - 1) as u64).and_then(|c| usize::try_from(c).ok())
}

/// Size of the truncated basis, `None` on overflow.
pub fn basis_size(cutoffs: &[u32], atoms: usize, levels: usize) -> Option<usize> {
    cutoffs
        .iter()
        .try_fold(atomic_multiplicity(atoms, levels)?, |acc, &c| acc.checked_mul(c as usize + 1))
}

/// All kets with `nu_t <= cutoffs[t]` and `sum n_j = N_a`, ordered
/// lexicographically in `(nu.., n..)`. The index of a ket is
/// `photon_rank * atomic_count + atomic_rank` with the first mode the
/// slowest photon digit.
#[derive(Clone, Debug)]
pub struct TruncatedBasis {
    cutoffs: Vec<u32>,
    atom_count: usize,
    atomic: Vec<Vec<u32>>,
    /// `suffix[l][r]`: compositions of `r` atoms into levels `l..n`.
    suffix: Vec<Vec<usize>>,
    photon_strides: Vec<usize>,
    size: usize,
}

fn compositions(total: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in 0..=total {
        prefix.push(first);
        compositions(total - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

impl TruncatedBasis {
    pub fn new(system: &AtomicSystem, cutoffs: &[u32], budget: usize) -> Result<Self> {
        system.ensure_valid()?;
        if cutoffs.len() != system.transitions.len() {
            return Err(Error::DimensionMismatch { expected: system.transitions.len(), found: cutoffs.len() });
        }
        let n = system.n;
        let atoms = system.atom_count;
        let size = basis_size(cutoffs, atoms, n).unwrap_or(usize::MAX);
        if size > budget {
            return Err(Error::BudgetExceeded { size, budget });
        }
        let mut atomic = Vec::new();
        compositions(atoms as u32, n, &mut Vec::with_capacity(n), &mut atomic);

        let mut suffix = vec![vec![0usize; atoms + 1]; n + 1];
        suffix[n - 1].fill(1);
        for l in (0..n - 1).rev() {
            for r in 0..=atoms {
                suffix[l][r] = (0..=r).map(|first| suffix[l + 1][r - first]).sum();
            }
        }

        let mut photon_strides = vec![atomic.len(); cutoffs.len()];
        for t in (0..cutoffs.len().saturating_sub(1)).rev() {
            photon_strides[t] = photon_strides[t + 1] * (cutoffs[t + 1] as usize + 1);
        }
        Ok(TruncatedBasis { cutoffs: cutoffs.to_vec(), atom_count: atoms, atomic, suffix, photon_strides, size })
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn cutoffs(&self) -> &[u32] {
        &self.cutoffs
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn atomic_count(&self) -> usize {
        self.atomic.len()
    }

    pub fn levels(&self) -> usize {
        self.suffix.len() - 1
    }

    pub fn modes(&self) -> usize {
        self.cutoffs.len()
    }

    /// Atomic occupations of the atomic configuration with rank `r`.
    pub fn atomic_state(&self, r: usize) -> &[u32] {
        &self.atomic[r]
    }

    /// Photon number of mode `t` in basis state `i`.
    #[inline]
    pub fn photon(&self, i: usize, t: usize) -> u32 {
        ((i / self.photon_strides[t]) % (self.cutoffs[t] as usize + 1)) as u32
    }

    #[inline]
    pub fn photon_stride(&self, t: usize) -> usize {
        self.photon_strides[t]
    }

    /// Rank of an atomic configuration in lexicographic order.
    pub fn atomic_rank(&self, atoms: &[u32]) -> Option<usize> {
        if atoms.len() != self.levels() || atoms.iter().map(|&a| a as usize).sum::<usize>() != self.atom_count {
            return None;
        }
        let mut rank = 0;
        let mut left = self.atom_count;
        for (l, &a) in atoms.iter().enumerate().take(atoms.len() - 1) {
            for smaller in 0..a as usize {
                rank += self.suffix[l + 1][left - smaller];
            }
            left -= a as usize;
        }
        Some(rank)
    }

    pub fn ket(&self, i: usize) -> FockKet {
        let photons = (0..self.modes()).map(|t| self.photon(i, t)).collect();
        FockKet { photons, atoms: self.atomic[i % self.atomic.len()].clone() }
    }

    pub fn index(&self, ket: &FockKet) -> Option<usize> {
        if ket.photons.len() != self.modes() {
            return None;
        }
        let mut idx = self.atomic_rank(&ket.atoms)?;
        for (t, &nu) in ket.photons.iter().enumerate() {
            if nu > self.cutoffs[t] {
                return None;
            }
            idx += nu as usize * self.photon_strides[t];
        }
        Some(idx)
    }

    pub fn iter(&self) -> impl Iterator<Item = FockKet> + '_ {
        (0..self.size).map(|i| self.ket(i))
    }
}

/// Truncated basis for `system` with `cutoffs[t]` photons at most in mode `t`.
pub fn build_basis(system: &AtomicSystem, cutoffs: &[u32], budget: usize) -> Result<TruncatedBasis> {
    TruncatedBasis::new(system, cutoffs, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets::*;

    #[test]
    fn sizes() {
        let s = xi3(1.0, 1.0);
        assert_eq!(build_basis(&s, &[1, 1], usize::MAX).unwrap().len(), 12);
        let mut s2 = s.clone();
        s2.atom_count = 2;
        assert_eq!(atomic_multiplicity(2, 3), Some(6));
        assert_eq!(build_basis(&s2, &[30, 30], usize::MAX).unwrap().len(), 5766);
        assert!(matches!(
            build_basis(&s2, &[30, 30], 5000),
            Err(Error::BudgetExceeded { size: 5766, budget: 5000 })
        ));
        assert!(build_basis(&s, &[1], 100).is_err());
    }

    #[test]
    fn enumeration_is_lexicographic_and_invertible() {
        let mut s = xi4(1.0, 1.0, 1.0);
        s.atom_count = 3;
        let b = build_basis(&s, &[2, 1, 3], usize::MAX).unwrap();
        let kets: Vec<FockKet> = b.iter().collect();
        assert_eq!(kets.len(), 3 * 2 * 4 * 20);
        for (i, k) in kets.iter().enumerate() {
            assert_eq!(b.index(k), Some(i));
            assert_eq!(k.atoms.iter().sum::<u32>(), 3);
        }
        for w in kets.windows(2) {
            let a = (&w[0].photons, &w[0].atoms);
            let c = (&w[1].photons, &w[1].atoms);
            assert!(a < c);
        }
        assert_eq!(b.index(&FockKet::new(vec![3, 0, 0], vec![3, 0, 0, 0])), None);
        assert_eq!(b.index(&FockKet::new(vec![0, 0, 0], vec![2, 0, 0, 0])), None);
    }
}
