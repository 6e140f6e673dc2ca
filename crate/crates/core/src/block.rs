//! Block indexing and block unitaries acting on `2^n`-cell hypercubes.
//!
//! Cells of a block are ordered by their offset `v in {0,1}^n`,
//! lexicographically with axis 0 most significant. A joint basis index is
//! the letter tuple read in that cell order, first cell most significant.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::{Float, Zero};
use smallvec::SmallVec;

use crate::error::{QcaError, Result};
use crate::lattice::{Alphabet, Letter};
use crate::scalar::{one, tol, zero, Real};

/// Letters of the cells of one block (or supercell), in block order.
pub type Word = SmallVec<[Letter; 4]>;

/// Column entries `(row, amplitude)`.
pub type Column<T> = Vec<(u64, Complex<T>)>;

/// Number of cells in an `n`-dimensional block.
#[inline]
pub fn block_cells(n: usize) -> usize {
    1 << n
}

/// Offsets `v in {0,1}^n` in block order.
pub fn block_offsets(n: usize) -> Vec<Vec<i64>> {
    (0..block_cells(n))
        .map(|p| (0..n).map(|k| ((p >> (n - 1 - k)) & 1) as i64).collect())
        .collect()
}

/// Offsets of an `side^n` hypercube, lexicographic with axis 0 most
/// significant.
pub fn cube_offsets(n: usize, side: usize) -> Vec<Vec<i64>> {
    let count = side.pow(n as u32);
    (0..count)
        .map(|mut p| {
            let mut v = vec![0i64; n];
            for k in (0..n).rev() {
                v[k] = (p % side) as i64;
                p /= side;
            }
            v
        })
        .collect()
}

/// Position of offset `v` inside a block.
#[inline]
pub fn block_position(v: &[i64]) -> usize {
    v.iter().fold(0, |acc, &b| (acc << 1) | (b as usize & 1))
}

/// `letters^cells`, or `None` on overflow of `u64`.
pub fn word_space(letters: usize, cells: usize) -> Option<u64> {
    (letters as u64).checked_pow(cells as u32)
}

#[inline]
pub fn word_index(word: &[Letter], letters: usize) -> u64 {
    word.iter().fold(0u64, |acc, &l| acc * letters as u64 + l as u64)
}

#[inline]
pub fn index_word(mut idx: u64, letters: usize, cells: usize) -> Word {
    let mut w: Word = SmallVec::from_elem(0, cells);
    for p in (0..cells).rev() {
        w[p] = (idx % letters as u64) as Letter;
        idx /= letters as u64;
    }
    w
}

/// A unitary on the joint space of one block, fixing the all-quiescent
/// block.
///
/// Stored as the identity plus the columns that differ from it, so the
/// large structured operators produced by the lowering passes stay small.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockUnitary<T: Real> {
    n: usize,
    alphabet: Arc<Alphabet>,
    dim: u64,
    overrides: BTreeMap<u64, Column<T>>,
}

/// Deviation of a block operator from the two well-formedness conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockDefects {
    pub unitarity: f64,
    pub quiescence: f64,
}

impl<T: Real> BlockUnitary<T> {
    fn space(n: usize, alphabet: &Alphabet) -> Result<u64> {
        word_space(alphabet.len(), block_cells(n)).ok_or(QcaError::CapExceeded {
            dim: (alphabet.len() as u128).saturating_pow(block_cells(n) as u32),
            cap: u64::MAX as usize,
        })
    }

    pub fn identity(n: usize, alphabet: Arc<Alphabet>) -> Result<Self> {
        let dim = Self::space(n, &alphabet)?;
        Ok(Self {
            n,
            alphabet,
            dim,
            overrides: BTreeMap::new(),
        })
    }

    /// Validated construction from a dense matrix in block index order.
    pub fn from_dense(n: usize, alphabet: Arc<Alphabet>, m: &DMatrix<Complex<T>>) -> Result<Self> {
        let u = Self::from_dense_unchecked(n, alphabet, m)?;
        u.validate()?;
        Ok(u)
    }

    /// Shape-checked but otherwise unvalidated; used to build negative
    /// controls.
    pub fn from_dense_unchecked(n: usize, alphabet: Arc<Alphabet>, m: &DMatrix<Complex<T>>) -> Result<Self> {
        let dim = Self::space(n, &alphabet)?;
        if m.nrows() as u64 != dim || m.ncols() as u64 != dim {
            return Err(QcaError::MatrixShape {
                expected: dim as usize,
                found: if m.nrows() as u64 != dim { m.nrows() } else { m.ncols() },
            });
        }
        let mut overrides = BTreeMap::new();
        for c in 0..m.ncols() {
            let col: Column<T> = (0..m.nrows())
                .filter(|&r| !m[(r, c)].is_zero())
                .map(|r| (r as u64, m[(r, c)]))
                .collect();
            let is_unit = col.len() == 1 && col[0].0 == c as u64 && col[0].1 == one();
            if !is_unit {
                overrides.insert(c as u64, col);
            }
        }
        Ok(Self {
            n,
            alphabet,
            dim,
            overrides,
        })
    }

    /// Validated construction from the columns that differ from identity.
    pub fn from_columns(n: usize, alphabet: Arc<Alphabet>, columns: BTreeMap<u64, Column<T>>) -> Result<Self> {
        let u = Self::from_columns_unchecked(n, alphabet, columns)?;
        u.validate()?;
        Ok(u)
    }

    pub fn from_columns_unchecked(
        n: usize,
        alphabet: Arc<Alphabet>,
        columns: BTreeMap<u64, Column<T>>,
    ) -> Result<Self> {
        let dim = Self::space(n, &alphabet)?;
        let mut overrides = BTreeMap::new();
        for (c, mut col) in columns {
            if c >= dim || col.iter().any(|(r, _)| *r >= dim) {
                return Err(QcaError::MatrixShape {
                    expected: dim as usize,
                    found: c.max(col.iter().map(|e| e.0).max().unwrap_or(0)) as usize + 1,
                });
            }
            col.sort_by_key(|e| e.0);
            let mut merged: Column<T> = Vec::with_capacity(col.len());
            for (r, a) in col {
                match merged.last_mut() {
                    Some(last) if last.0 == r => last.1 += a,
                    _ => merged.push((r, a)),
                }
            }
            merged.retain(|(_, a)| !a.is_zero());
            let is_unit = merged.len() == 1 && merged[0].0 == c && merged[0].1 == one();
            if !is_unit {
                overrides.insert(c, merged);
            }
        }
        Ok(Self {
            n,
            alphabet,
            dim,
            overrides,
        })
    }

    /// Permutation of basis words. `map` lists only the words that move.
    pub fn from_permutation(
        n: usize,
        alphabet: Arc<Alphabet>,
        map: impl IntoIterator<Item = (u64, u64)>,
    ) -> Result<Self> {
        let cols = map.into_iter().map(|(from, to)| (from, vec![(to, one())])).collect();
        Self::from_columns(n, alphabet, cols)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn alphabet_arc(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    #[inline]
    pub fn cells(&self) -> usize {
        block_cells(self.n)
    }

    /// Dimension of the joint block space.
    #[inline]
    pub fn size(&self) -> u64 {
        self.dim
    }

    pub fn overrides(&self) -> &BTreeMap<u64, Column<T>> {
        &self.overrides
    }

    pub fn is_identity(&self) -> bool {
        self.overrides.is_empty()
    }

    /// Index of the all-quiescent block.
    pub fn quiescent_index(&self) -> u64 {
        let q = self.alphabet.quiescent() as u64;
        let l = self.alphabet.len() as u64;
        (0..self.cells()).fold(0, |acc, _| acc * l + q)
    }

    /// The image of basis word `idx`.
    #[inline]
    pub fn column(&self, idx: u64) -> Cow<'_, [(u64, Complex<T>)]> {
        match self.overrides.get(&idx) {
            Some(col) => Cow::Borrowed(col.as_slice()),
            None => Cow::Owned(vec![(idx, one())]),
        }
    }

    pub fn to_dense(&self, cap: usize) -> Result<DMatrix<Complex<T>>> {
        if self.dim > cap as u64 {
            return Err(QcaError::CapExceeded {
                dim: self.dim as u128,
                cap,
            });
        }
        let d = self.dim as usize;
        let mut m = DMatrix::identity(d, d);
        for (c, col) in &self.overrides {
            let c = *c as usize;
            m[(c, c)] = zero();
            for (r, a) in col {
                m[(*r as usize, c)] = *a;
            }
        }
        Ok(m)
    }

    /// `self * other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n != other.n || *self.alphabet != *other.alphabet {
            return Err(QcaError::AlphabetMismatch(
                "composing block operators over different blocks".into(),
            ));
        }
        let mut cols = BTreeMap::new();
        let keys: std::collections::BTreeSet<u64> =
            self.overrides.keys().chain(other.overrides.keys()).copied().collect();
        for c in keys {
            let mut acc: BTreeMap<u64, Complex<T>> = BTreeMap::new();
            for (mid, b) in other.column(c).iter() {
                for (r, a) in self.column(*mid).iter() {
                    *acc.entry(*r).or_insert_with(zero) += a * b;
                }
            }
            cols.insert(c, acc.into_iter().collect());
        }
        Self::from_columns_unchecked(self.n, self.alphabet.clone(), cols)
    }

    pub fn adjoint(&self) -> Self {
        let mut cols: BTreeMap<u64, Column<T>> = BTreeMap::new();
        for (c, col) in &self.overrides {
            cols.entry(*c).or_default();
            for (r, a) in col {
                cols.entry(*r).or_default().push((*c, a.conj()));
            }
        }
        // Rows of overridden columns that are not themselves overridden keep
        // their identity entry.
        for (r, col) in cols.iter_mut() {
            if !self.overrides.contains_key(r) {
                col.push((*r, one()));
            }
        }
        Self::from_columns_unchecked(self.n, self.alphabet.clone(), cols)
            .expect("adjoint of a well-shaped operator is well-shaped")
    }

    /// Measures `max |U^dagger U - I|` and the displacement of the
    /// all-quiescent block.
    pub fn defects(&self) -> BlockDefects {
        let mut unitarity = 0.0f64;

        // Entries landing on rows whose own column is untouched overlap an
        // identity column.
        for col in self.overrides.values() {
            for (r, a) in col {
                if !self.overrides.contains_key(r) {
                    unitarity = unitarity.max(a.norm().to_f64_lossy());
                }
            }
        }

        // Connected components of overridden columns sharing rows.
        let ids: BTreeMap<u64, usize> = self.overrides.keys().enumerate().map(|(i, c)| (*c, i)).collect();
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (c, col) in &self.overrides {
            let ci = ids[c];
            for (r, _) in col {
                if let Some(&ri) = ids.get(r) {
                    let (a, b) = (find(&mut parent, ci), find(&mut parent, ri));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
        let mut comps: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
        for (c, &i) in &ids {
            let root = find(&mut parent, i);
            comps.entry(root).or_default().push(*c);
        }
        for cols in comps.values() {
            let local: BTreeMap<u64, usize> = cols.iter().enumerate().map(|(i, c)| (*c, i)).collect();
            let k = cols.len();
            let mut a = DMatrix::from_element(k, k, zero::<T>());
            for (j, c) in cols.iter().enumerate() {
                for (r, z) in &self.overrides[c] {
                    if let Some(&i) = local.get(r) {
                        a[(i, j)] = *z;
                    }
                }
            }
            let gram = a.adjoint() * &a;
            for i in 0..k {
                for j in 0..k {
                    let target = if i == j { one() } else { zero() };
                    unitarity = unitarity.max((gram[(i, j)] - target).norm().to_f64_lossy());
                }
            }
        }

        let qi = self.quiescent_index();
        let quiescence = self
            .column(qi)
            .iter()
            .map(|(r, a)| {
                let target = if *r == qi { one() } else { zero() };
                (*a - target).norm_sqr()
            })
            .fold(T::zero(), |acc, x| acc + x);
        // A missing diagonal entry counts as a full unit of displacement.
        let has_diag = self.column(qi).iter().any(|(r, _)| *r == qi);
        let quiescence = Float::sqrt(quiescence).to_f64_lossy() + if has_diag { 0.0 } else { 1.0 };

        BlockDefects { unitarity, quiescence }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.defects();
        if d.unitarity > tol::UNITARY {
            return Err(QcaError::NotUnitary { deviation: d.unitarity });
        }
        if d.quiescence > tol::QUIESCENT {
            return Err(QcaError::QuiescenceViolated {
                deviation: d.quiescence,
            });
        }
        Ok(())
    }
}
