use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::TruncatedBasis;
use crate::error::{Error, Result};
use crate::model::AtomicSystem;
use crate::rwa::{excitation_weights, SymmetryCharges};

/// Real symmetric matrix in compressed sparse row form (both triangles stored).
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Build from per-row `(col, value)` lists; columns are sorted and
    /// duplicates summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *values.last_mut().expect("pushed before") += v;
                } else {
                    cols.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseMatrix { dim, row_ptr, cols, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    /// Element `(i, j)`, zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(pos) => self.values[r.start + pos],
            Err(_) => 0.0,
        }
    }

    /// `(row, col, value)` of every stored element.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    /// `max |H - H^T|` over stored elements.
    pub fn max_asymmetry(&self) -> f64 {
        self.triplets().map(|(i, j, v)| (v - self.get(j, i)).abs()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    /// Principal submatrix on `indices` (which must be closed under the
    /// nonzero pattern), re-indexed in the given order.
    pub fn restrict(&self, indices: &[usize]) -> Self {
        let mut local = vec![usize::MAX; self.dim];
        for (l, &g) in indices.iter().enumerate() {
            local[g] = l;
        }
        let rows = indices
            .iter()
            .map(|&g| {
                self.row(g)
                    .filter(|&(c, _)| local[c] != usize::MAX)
                    .map(|(c, v)| (local[c], v))
                    .collect()
            })
            .collect();
        SparseMatrix::from_rows(rows)
    }
}

/// Matrix of the Hamiltonian on `basis`. Off-diagonal elements are
/// `-(mu/sqrt(N_a)) sqrt(m)` with `m` the integer product of the bosonic
/// factors, so `H` is symmetric bit for bit. Transitions that would leave
/// the truncation are dropped.
pub fn build_hamiltonian(system: &AtomicSystem, basis: &TruncatedBasis, rwa: bool) -> Result<SparseMatrix> {
    system.ensure_valid()?;
    if basis.modes() != system.transitions.len() || basis.levels() != system.n || basis.atom_count() != system.atom_count {
        return Err(Error::InvalidArgument("basis was built for a different system".into()));
    }
    let scale = (system.atom_count as f64).sqrt();
    let atomic = basis.atomic_count();
    let rows = (0..basis.len())
        .into_par_iter()
        .map(|i| {
            let atoms = basis.atomic_state(i % atomic);
            let photon_part = i - i % atomic;
            let mut row = Vec::new();
            let mut diag: f64 = atoms.iter().enumerate().map(|(l, &n)| system.omega[l] * n as f64).sum();
            for (t, tr) in system.transitions.iter().enumerate() {
                let nu = basis.photon(i, t);
                diag += tr.mode_freq * nu as f64;
                if tr.mu == 0.0 {
                    continue;
                }
                let pref = -tr.mu / scale;
                let (j, k) = (tr.j - 1, tr.k - 1);
                let stride = basis.photon_stride(t);
                let mut moved = atoms.to_vec();
                // `down`: A_jk (atom k -> j); `up`: A_kj (atom j -> k)
                for down in [true, false] {
                    let (from, to) = if down { (k, j) } else { (j, k) };
                    if atoms[from] == 0 {
                        continue;
                    }
                    moved[from] -= 1;
                    moved[to] += 1;
                    let atom_factor = atoms[from] as u64 * moved[to] as u64;
                    let rank = basis.atomic_rank(&moved).expect("atom number conserved");
                    moved[from] += 1;
                    moved[to] -= 1;
                    // photon created (a^+) or destroyed (a)
                    for create in [true, false] {
                        if rwa && create != down {
                            continue;
                        }
                        let (nu2, photon_factor) = if create {
                            if nu >= basis.cutoffs()[t] {
                                continue;
                            }
                            (nu + 1, nu as u64 + 1)
                        } else {
                            if nu == 0 {
                                continue;
                            }
                            (nu - 1, nu as u64)
                        };
                        let target = photon_part - nu as usize * stride + nu2 as usize * stride + rank;
                        let m = atom_factor * photon_factor;
                        row.push((target, pref * (m as f64).sqrt()));
                    }
                }
            }
            row.push((i, diag));
            row
        })
        .collect();
    Ok(SparseMatrix::from_rows(rows))
}

/// Symmetry label: parities of `K_2..K_n` (0 even, 1 odd).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SectorLabel {
    pub parities: Vec<u8>,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetrySector {
    pub label: SectorLabel,
    /// Basis indices, ascending.
    pub indices: Vec<usize>,
}

fn letter(p: i64) -> char {
    if p.rem_euclid(2) == 0 {
        'e'
    } else {
        'o'
    }
}

/// Partition the basis by the parities of `K_2..K_n` (`K_1` follows from
/// `N_a`). For three levels with odd `lambda_2` the sectors are named by
/// (parity of `M`, parity of `K_3`): `ee`, `eo`, `oe`, `oo`. Otherwise the
/// name lists the `K_2..K_n` parities. Nonempty sectors are returned,
/// sorted by name.
pub fn split_sectors(system: &AtomicSystem, basis: &TruncatedBasis) -> Vec<SymmetrySector> {
    let charges = SymmetryCharges::new(system);
    let weights = excitation_weights(system).ok();
    let letter_names = system.n == 3 && weights.as_ref().is_some_and(|w| w.lambda[1].rem_euclid(2) == 1);
    let atomic = basis.atomic_count();
    let mut sectors: std::collections::BTreeMap<Vec<u8>, Vec<usize>> = Default::default();
    for i in 0..basis.len() {
        let atoms = basis.atomic_state(i % atomic);
        let key: Vec<u8> = (1..system.n)
            .map(|l| {
                let k: i64 = atoms[l] as i64
                    + charges.photon_coeff[l]
                        .iter()
                        .enumerate()
                        .map(|(t, c)| c * basis.photon(i, t) as i64)
                        .sum::<i64>();
                k.rem_euclid(2) as u8
            })
            .collect();
        sectors.entry(key).or_default().push(i);
    }
    let mut out: Vec<SymmetrySector> = sectors
        .into_iter()
        .map(|(parities, indices)| {
            let name = if letter_names {
                let w = weights.as_ref().expect("checked");
                let m = w.lambda[1] * parities[0] as i64 + w.lambda[2] * parities[1] as i64;
                format!("{}{}", letter(m), letter(parities[1] as i64))
            } else {
                parities.iter().map(|&p| letter(p as i64)).collect()
            };
            SymmetrySector { label: SectorLabel { parities, name }, indices }
        })
        .collect();
    out.sort_by(|a, b| a.label.name.cmp(&b.label.name));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets::*;
    use crate::quantum::basis::{build_basis, FockKet};
    use crate::rwa::charge_of_state;

    #[test]
    fn zero_coupling_is_diagonal() {
        let mut s = xi3(0.0, 0.0);
        s.atom_count = 2;
        let b = build_basis(&s, &[2, 2], usize::MAX).unwrap();
        let h = build_hamiltonian(&s, &b, false).unwrap();
        assert_eq!(h.nnz(), b.len());
        let vac = b.index(&FockKet::new(vec![0, 0], vec![2, 0, 0])).unwrap();
        assert_eq!(h.get(vac, vac), 0.0);
    }

    #[test]
    fn single_element() {
        let s = xi3(0.7, 0.3);
        let b = build_basis(&s, &[3, 3], usize::MAX).unwrap();
        let h = build_hamiltonian(&s, &b, false).unwrap();
        let up = b.index(&FockKet::new(vec![1, 0], vec![0, 1, 0])).unwrap();
        let ground = b.index(&FockKet::new(vec![0, 0], vec![1, 0, 0])).unwrap();
        assert_eq!(h.get(up, ground), -0.7);
        assert_eq!(h.get(ground, up), -0.7);
        assert_eq!(h.get(up, up), 1.0 + 1.0);
        // counter-rotating: atom up while creating a photon
        let cr = b.index(&FockKet::new(vec![2, 0], vec![0, 1, 0])).unwrap();
        let from = b.index(&FockKet::new(vec![1, 0], vec![1, 0, 0])).unwrap();
        assert!((h.get(cr, from) + 0.7 * 2f64.sqrt()).abs() < 1e-15);
        let hr = build_hamiltonian(&s, &b, true).unwrap();
        assert_eq!(hr.get(cr, from), 0.0);
        assert_eq!(hr.get(up, ground), 0.0);
        // rotating: atom down while creating a photon
        let emitted = b.index(&FockKet::new(vec![1, 0], vec![1, 0, 0])).unwrap();
        let excited = b.index(&FockKet::new(vec![0, 0], vec![0, 1, 0])).unwrap();
        assert_eq!(hr.get(emitted, excited), -0.7);
        assert_eq!(hr.get(excited, emitted), -0.7);
    }

    #[test]
    fn bosonic_factors_with_two_atoms() {
        let mut s = xi3(1.0, 1.0);
        s.atom_count = 2;
        let b = build_basis(&s, &[4, 4], usize::MAX).unwrap();
        let h = build_hamiltonian(&s, &b, false).unwrap();
        // <nu=3; (0,2,0)| H |nu=2; (1,1,0)> = -(1/sqrt2) sqrt(2*1) sqrt(3)
        let a = b.index(&FockKet::new(vec![3, 0], vec![0, 2, 0])).unwrap();
        let c = b.index(&FockKet::new(vec![2, 0], vec![1, 1, 0])).unwrap();
        assert!((h.get(a, c) + 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn exactly_symmetric() {
        let mut s = xi4(0.8, 1.3, 0.4);
        s.atom_count = 3;
        let b = build_basis(&s, &[3, 2, 4], usize::MAX).unwrap();
        for rwa in [false, true] {
            assert_eq!(build_hamiltonian(&s, &b, rwa).unwrap().max_asymmetry(), 0.0);
        }
    }

    #[test]
    fn xi_sectors_and_block_structure() {
        let s = xi3(1.0, 1.0);
        let b = build_basis(&s, &[2, 2], usize::MAX).unwrap();
        let sectors = split_sectors(&s, &b);
        let names: Vec<&str> = sectors.iter().map(|x| x.label.name.as_str()).collect();
        assert_eq!(names, vec!["ee", "eo", "oe", "oo"]);
        assert_eq!(sectors.iter().map(|x| x.indices.len()).sum::<usize>(), b.len());
        let mut owner = vec![0; b.len()];
        for (si, sec) in sectors.iter().enumerate() {
            for &i in &sec.indices {
                owner[i] = si;
            }
        }
        let h = build_hamiltonian(&s, &b, false).unwrap();
        for (i, j, v) in h.triplets() {
            assert!(v == 0.0 || owner[i] == owner[j]);
        }
        // partition does not depend on couplings
        assert_eq!(split_sectors(&xi3(0.2, 3.0), &b), sectors);
    }

    #[test]
    fn rwa_preserves_every_charge() {
        let mut s = lambda3(1.0, 0.6);
        s.atom_count = 2;
        let b = build_basis(&s, &[3, 3], usize::MAX).unwrap();
        let c = SymmetryCharges::new(&s);
        let h = build_hamiltonian(&s, &b, true).unwrap();
        for (i, j, _) in h.triplets() {
            assert_eq!(charge_of_state(&c, &b.ket(i)), charge_of_state(&c, &b.ket(j)));
        }
        let full = build_hamiltonian(&s, &b, false).unwrap();
        assert!(full.triplets().any(|(i, j, _)| charge_of_state(&c, &b.ket(i)) != charge_of_state(&c, &b.ket(j))));
    }

    #[test]
    fn tuple_names_without_letter_labels() {
        let s = xi4(1.0, 1.0, 1.0);
        let b = build_basis(&s, &[2, 2, 2], usize::MAX).unwrap();
        let sectors = split_sectors(&s, &b);
        assert_eq!(sectors.len(), 8);
        assert!(sectors.iter().all(|x| x.label.name.len() == 3 && x.label.parities.len() == 3));
        assert_eq!(sectors[0].label.name, "eee");
    }
}
