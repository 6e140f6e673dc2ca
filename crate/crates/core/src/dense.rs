//! Dense statevector engine on a finite box, used as a brute-force oracle
//! for the sparse evaluators.
//!
//! Every cell outside the box is held quiescent. A block that straddles the
//! box boundary is applied with its outside cells read as quiescent, and any
//! amplitude it sends to a non-quiescent outside cell is a support escape.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use num_traits::{Float, Zero};

use crate::automata::{Automaton, MultilayerQca};
use crate::block::{block_cells, block_offsets, index_word, word_index, BlockUnitary};
use crate::error::{QcaError, Result};
use crate::lattice::{Alphabet, Configuration, Letter, Region, Site, Superposition};
use crate::scalar::{tol, zero, Real};

/// Default cap on the dimension of a dense state space.
pub const DEFAULT_STATE_CAP: usize = 4096;

/// Dense dimension cap: `QCA_STATE_CAP` if set and valid, else 4096.
pub fn state_cap() -> usize {
    std::env::var("QCA_STATE_CAP")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&c| c > 0)
        .unwrap_or(DEFAULT_STATE_CAP)
}

/// Basis of all configurations supported in a box. Index digits follow
/// [`Region::sites`], first site most significant.
#[derive(Debug, Clone)]
pub struct DenseSpace {
    region: Region,
    sites: Vec<Site>,
    position: BTreeMap<Site, usize>,
    letters: usize,
    q: Letter,
    dim: usize,
}

impl DenseSpace {
    pub fn new(region: Region, alphabet: &Alphabet, cap: usize) -> Result<Self> {
        let sites = region.sites();
        let letters = alphabet.len();
        let dim = (letters as u128).checked_pow(sites.len() as u32).unwrap_or(u128::MAX);
        if dim > cap as u128 {
            return Err(QcaError::CapExceeded { dim, cap });
        }
        let position = sites.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Ok(Self {
            region,
            sites,
            position,
            letters,
            q: alphabet.quiescent(),
            dim: dim as usize,
        })
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn weight(&self, pos: usize) -> usize {
        self.letters.pow((self.sites.len() - 1 - pos) as u32)
    }

    fn digit(&self, idx: usize, pos: usize) -> Letter {
        ((idx / self.weight(pos)) % self.letters) as Letter
    }

    /// Basis index of a configuration, or [`QcaError::SupportEscape`] if
    /// it has a cell outside the box.
    pub fn index_of(&self, config: &Configuration) -> Result<usize> {
        let mut digits = vec![self.q; self.sites.len()];
        for (s, l) in config.entries() {
            let p = self.position.get(s).ok_or(QcaError::SupportEscape)?;
            digits[*p] = *l;
        }
        Ok(digits.iter().fold(0usize, |acc, &l| acc * self.letters + l as usize))
    }

    pub fn config_of(&self, mut idx: usize) -> Configuration {
        let mut cells = Vec::new();
        for p in (0..self.sites.len()).rev() {
            let l = (idx % self.letters) as Letter;
            idx /= self.letters;
            if l != self.q {
                cells.push((self.sites[p].clone(), l));
            }
        }
        cells.reverse();
        Configuration::from_sorted(cells)
    }

    pub fn to_vector<T: Real>(&self, state: &Superposition<T>) -> Result<DVector<Complex<T>>> {
        let mut v = DVector::from_element(self.dim, zero());
        for (c, a) in state.terms() {
            v[self.index_of(c)?] += *a;
        }
        Ok(v)
    }

    /// Sparse state with one term per nonzero entry.
    pub fn to_state<T: Real>(&self, v: &DVector<Complex<T>>, alphabet: std::sync::Arc<Alphabet>) -> Superposition<T> {
        let terms = v
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(i, a)| (self.config_of(i), *a))
            .collect();
        Superposition::from_map(self.region.dim(), alphabet, terms)
    }

    /// Applies `u` on every block of the partition with the given offset
    /// that meets the box.
    pub fn apply_layer<T: Real>(
        &self,
        u: &BlockUnitary<T>,
        offset: &[i64],
        v: &DVector<Complex<T>>,
    ) -> Result<DVector<Complex<T>>> {
        let n = self.region.dim();
        if u.dim() != n || u.alphabet().len() != self.letters {
            return Err(QcaError::AlphabetMismatch(
                "block operator does not match the dense space".into(),
            ));
        }
        let cells = block_cells(n);
        let offsets = block_offsets(n);
        let mut v = v.clone();
        for base in self.block_bases(offset) {
            // Digit position of each block cell, or None outside the box.
            let slots: Vec<Option<usize>> = offsets
                .iter()
                .map(|d| self.position.get(&base.offset(d)).copied())
                .collect();
            if slots.iter().all(Option::is_none) {
                continue;
            }
            let weights: Vec<usize> = slots.iter().map(|s| s.map_or(0, |p| self.weight(p))).collect();
            let mut out = DVector::from_element(self.dim, zero::<T>());
            let mut escaped: BTreeMap<(usize, u64), Complex<T>> = BTreeMap::new();
            for (i, a) in v.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let mut word = smallvec::SmallVec::<[Letter; 4]>::from_elem(self.q, cells);
                let mut rest = i;
                for (p, s) in slots.iter().enumerate() {
                    if let Some(pos) = s {
                        let d = self.digit(i, *pos);
                        word[p] = d;
                        rest -= d as usize * weights[p];
                    }
                }
                for (row, b) in u.column(word_index(&word, self.letters)).iter() {
                    let w = index_word(*row, self.letters, cells);
                    let outside = slots.iter().zip(&w).any(|(s, l)| s.is_none() && *l != self.q);
                    if outside {
                        *escaped.entry((rest, *row)).or_insert_with(zero) += *a * *b;
                        continue;
                    }
                    let j = slots.iter().zip(&w).zip(&weights).fold(rest, |acc, ((s, l), wt)| {
                        if s.is_some() {
                            acc + *l as usize * wt
                        } else {
                            acc
                        }
                    });
                    out[j] += *a * *b;
                }
            }
            let lost: T = escaped.values().fold(T::zero(), |acc, z| acc + z.norm_sqr());
            if Float::sqrt(lost).to_f64_lossy() > tol::NORM {
                return Err(QcaError::SupportEscape);
            }
            v = out;
        }
        Ok(v)
    }

    /// Applies a letter permutation to every cell of the box.
    pub fn apply_cellwise<T: Real>(
        &self,
        perm: impl Fn(Letter) -> Letter,
        v: &DVector<Complex<T>>,
    ) -> DVector<Complex<T>> {
        let mut out = DVector::from_element(self.dim, zero());
        for (i, a) in v.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let j = (0..self.sites.len()).fold(0usize, |acc, p| acc * self.letters + perm(self.digit(i, p)) as usize);
            out[j] += *a;
        }
        out
    }

    /// One round of `a` on a dense vector.
    pub fn round<T: Real>(&self, a: &Automaton<T>, v: &DVector<Complex<T>>) -> Result<DVector<Complex<T>>> {
        let n = self.region.dim();
        match a {
            Automaton::Pqca(p) => {
                let s = self.apply_layer(p.scattering(), &vec![0; n], v)?;
                self.apply_layer(p.scattering(), &vec![1; n], &s)
            }
            Automaton::Bqca(b) => {
                let s = self.apply_layer(b.even(), &vec![0; n], v)?;
                self.apply_layer(b.odd(), &vec![1; n], &s)
            }
            Automaton::Multilayer(m) => self.multilayer_step(m, v),
        }
    }

    fn multilayer_step<T: Real>(&self, m: &MultilayerQca<T>, v: &DVector<Complex<T>>) -> Result<DVector<Complex<T>>> {
        let mut s = v.clone();
        for o in block_offsets(m.dim()) {
            s = self.apply_layer(m.block(), &o, &s)?;
        }
        if m.has_track_swap() {
            s = self.apply_cellwise(|l| m.swapped(l), &s);
        }
        Ok(s)
    }

    /// Bases of the blocks of the given partition that meet the box.
    fn block_bases(&self, offset: &[i64]) -> Vec<Site> {
        let n = self.region.dim();
        let lo: Vec<i64> = (0..n)
            .map(|k| (self.region.lo[k] - offset[k]).div_euclid(2) * 2 + offset[k])
            .collect();
        let mut out = Vec::new();
        let mut cur = lo.clone();
        loop {
            out.push(Site::from(cur.as_slice()));
            let mut k = n;
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                if cur[k] + 2 <= self.region.hi[k] {
                    cur[k] += 2;
                    break;
                }
                cur[k] = lo[k];
            }
        }
    }
}

/// Matrix of one round of `a` from configurations supported in `window`
/// to configurations supported in `window` expanded by `margin`, with the
/// dimension cap from [`state_cap`].
///
/// Rows index the expanded box, columns the window, both in
/// [`DenseSpace`] order.
pub fn dense_global_matrix<T: Real>(a: &Automaton<T>, window: &Region, margin: i64) -> Result<DMatrix<Complex<T>>> {
    dense_global_matrix_with_cap(a, window, margin, state_cap())
}

pub fn dense_global_matrix_with_cap<T: Real>(
    a: &Automaton<T>,
    window: &Region,
    margin: i64,
    cap: usize,
) -> Result<DMatrix<Complex<T>>> {
    let alphabet = crate::automata::Dynamics::alphabet(a).clone();
    let outer = DenseSpace::new(window.expanded(margin), &alphabet, cap)?;
    let inner = DenseSpace::new(window.clone(), &alphabet, cap)?;
    let mut m = DMatrix::from_element(outer.dim(), inner.dim(), zero());
    for j in 0..inner.dim() {
        let mut e = DVector::from_element(outer.dim(), zero());
        e[outer.index_of(&inner.config_of(j))?] = crate::scalar::one();
        let col = outer.round(a, &e)?;
        m.set_column(j, &col);
    }
    Ok(m)
}

/// Embeds a window vector into the expanded box used by
/// [`dense_global_matrix`] and returns it as a state.
pub fn window_state<T: Real>(
    window: &Region,
    alphabet: std::sync::Arc<Alphabet>,
    v: &DVector<Complex<T>>,
) -> Result<Superposition<T>> {
    let space = DenseSpace::new(window.clone(), &alphabet, usize::MAX)?;
    if v.len() != space.dim() {
        return Err(QcaError::MatrixShape {
            expected: space.dim(),
            found: v.len(),
        });
    }
    Ok(space.to_state(v, alphabet))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::automata::{Bqca, Pqca};
    use crate::lattice::make_configuration;
    use crate::scalar::one;

    fn swap_pqca() -> Automaton<f64> {
        let al = Arc::new(Alphabet::sized(2).unwrap());
        let u = BlockUnitary::from_permutation(1, al, [(1, 2), (2, 1)]).unwrap();
        Automaton::Pqca(Pqca::new(u).unwrap())
    }

    #[test]
    fn swap_pqca_is_a_permutation_on_four_sites() {
        let a = swap_pqca();
        let w = Region::new(vec![0], vec![3]).unwrap();
        let m = dense_global_matrix(&a, &w, 2).unwrap();
        assert_eq!(m.shape(), (256, 16));
        let mut rows = std::collections::BTreeSet::new();
        for j in 0..16 {
            let nz: Vec<usize> = (0..256).filter(|&i| !m[(i, j)].is_zero()).collect();
            assert_eq!(nz.len(), 1);
            assert_eq!(m[(nz[0], j)], one());
            assert!(rows.insert(nz[0]));
        }
    }

    #[test]
    fn swap_moves_letter_two_cells_per_round() {
        let a = swap_pqca();
        let al = crate::automata::Dynamics::alphabet(&a).clone();
        let w = Region::new(vec![0], vec![0]).unwrap();
        let m = dense_global_matrix(&a, &w, 2).unwrap();
        let outer = DenseSpace::new(w.expanded(2), &al, 4096).unwrap();
        let c = make_configuration(1, vec![(Site::from([0]), 1)], &al).unwrap();
        let target = make_configuration(1, vec![(Site::from([2]), 1)], &al).unwrap();
        assert_eq!(m[(outer.index_of(&target).unwrap(), 1)], one());
        assert_eq!(m[(outer.index_of(&c).unwrap(), 1)], zero());
    }

    #[test]
    fn identity_automaton_gives_identity() {
        let al = Arc::new(Alphabet::sized(3).unwrap());
        let id = BlockUnitary::<f64>::identity(1, al.clone()).unwrap();
        let a = Automaton::Bqca(Bqca::new(id.clone(), id).unwrap());
        let w = Region::new(vec![0], vec![2]).unwrap();
        let m = dense_global_matrix(&a, &w, 0).unwrap();
        assert_eq!(m, DMatrix::identity(27, 27));
    }

    #[test]
    fn escape_is_reported() {
        let a = swap_pqca();
        let w = Region::new(vec![0], vec![1]).unwrap();
        assert_eq!(dense_global_matrix(&a, &w, 0).unwrap_err(), QcaError::SupportEscape);
    }

    #[test]
    fn cap_is_enforced() {
        let a = swap_pqca();
        let w = Region::new(vec![0], vec![20]).unwrap();
        assert!(matches!(
            dense_global_matrix_with_cap(&a, &w, 0, 1024),
            Err(QcaError::CapExceeded { .. })
        ));
    }

    #[test]
    fn vector_round_trip() {
        let al = Arc::new(Alphabet::sized(3).unwrap());
        let space = DenseSpace::new(Region::new(vec![-1, 0], vec![0, 1]).unwrap(), &al, 4096).unwrap();
        for i in 0..space.dim() {
            assert_eq!(space.index_of(&space.config_of(i)).unwrap(), i);
        }
    }
}
