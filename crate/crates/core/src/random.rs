//! Seeded generators for block operators and sample states.
//!
//! All randomness flows through [`QcaRng`] so every check is reproducible
//! from its seed.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::automata::pair_alphabet;
use crate::block::{block_cells, index_word, word_index, word_space, BlockUnitary, Column};
use crate::error::{QcaError, Result};
use crate::lattice::{Alphabet, Configuration, Letter, Region, Site, Superposition};
use crate::scalar::{one, phase, zero, Real};

pub type QcaRng = ChaCha8Rng;

pub fn rng(seed: u64) -> QcaRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<T: Real>(rng: &mut QcaRng) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::of(re), T::of(im))
}

/// Haar-distributed unitary (QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal folded back into `Q`).
pub fn haar_unitary<T: Real>(dim: usize, rng: &mut QcaRng) -> DMatrix<Complex<T>> {
    if dim == 0 {
        return DMatrix::from_element(0, 0, zero());
    }
    let z = DMatrix::from_fn(dim, dim, |_, _| gaussian::<T>(rng));
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let n = d.norm();
        let ph = if n > T::zero() { d / n } else { one() };
        for i in 0..dim {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Random unit vector of length `dim`.
pub fn random_unit_vector<T: Real>(dim: usize, rng: &mut QcaRng) -> Vec<Complex<T>> {
    let v: Vec<Complex<T>> = (0..dim).map(|_| gaussian::<T>(rng)).collect();
    let norm = num_traits::Float::sqrt(v.iter().fold(T::zero(), |a, z| a + z.norm_sqr()));
    v.into_iter().map(|z| z / norm).collect()
}

/// Embeds `m` (acting on the listed basis indices) into a block operator.
fn block_from_sectors<T: Real>(
    n: usize,
    alphabet: Arc<Alphabet>,
    sectors: &[(Vec<u64>, DMatrix<Complex<T>>)],
) -> Result<BlockUnitary<T>> {
    let mut cols: BTreeMap<u64, Column<T>> = BTreeMap::new();
    for (idx, m) in sectors {
        for (j, c) in idx.iter().enumerate() {
            let col = idx.iter().enumerate().map(|(i, r)| (*r, m[(i, j)])).collect();
            cols.insert(*c, col);
        }
    }
    BlockUnitary::from_columns(n, alphabet, cols)
}

fn non_quiescent_words(n: usize, alphabet: &Alphabet) -> Result<Vec<u64>> {
    let size = word_space(alphabet.len(), block_cells(n)).ok_or(QcaError::CapExceeded { dim: u128::MAX, cap: 0 })?;
    let q = alphabet.quiescent();
    Ok((0..size)
        .filter(|&i| index_word(i, alphabet.len(), block_cells(n)).iter().any(|&l| l != q))
        .collect())
}

/// Generic block unitary: Haar on the complement of the all-quiescent
/// word, which is fixed exactly.
pub fn random_block_unitary<T: Real>(n: usize, alphabet: Arc<Alphabet>, rng: &mut QcaRng) -> Result<BlockUnitary<T>> {
    let idx = non_quiescent_words(n, &alphabet)?;
    let m = haar_unitary(idx.len(), rng);
    block_from_sectors(n, alphabet, &[(idx, m)])
}

/// Block unitary preserving the number of non-quiescent cells, Haar within
/// each occupation sector.
pub fn random_sector_block_unitary<T: Real>(
    n: usize,
    alphabet: Arc<Alphabet>,
    rng: &mut QcaRng,
) -> Result<BlockUnitary<T>> {
    let cells = block_cells(n);
    let q = alphabet.quiescent();
    let mut by_count: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    for i in non_quiescent_words(n, &alphabet)? {
        let occ = index_word(i, alphabet.len(), cells).iter().filter(|&&l| l != q).count();
        by_count.entry(occ).or_default().push(i);
    }
    let sectors: Vec<_> = by_count
        .into_values()
        .map(|idx| {
            let m = haar_unitary(idx.len(), rng);
            (idx, m)
        })
        .collect();
    block_from_sectors(n, alphabet, &sectors)
}

/// Diagonal block operator with random phases on every non-quiescent word.
pub fn random_diagonal_block<T: Real>(n: usize, alphabet: Arc<Alphabet>, rng: &mut QcaRng) -> Result<BlockUnitary<T>> {
    let cols = non_quiescent_words(n, &alphabet)?
        .into_iter()
        .map(|i| {
            let theta = T::of(rng.random_range(0.0..std::f64::consts::TAU));
            (i, vec![(i, phase(theta))])
        })
        .collect();
    BlockUnitary::from_columns(n, alphabet, cols)
}

/// Diagonal phases built from single-cell terms and pairwise controlled
/// phases; the quiescent letter never picks up a phase.
#[derive(Debug, Clone)]
pub struct PhaseTable<T: Real> {
    single: Vec<T>,
    pair: Vec<Vec<T>>,
    q: Letter,
}

impl<T: Real> PhaseTable<T> {
    pub fn random(alphabet: &Alphabet, rng: &mut QcaRng) -> Self {
        let l = alphabet.len();
        let q = alphabet.quiescent();
        let mut draw = |a: usize, b: Option<usize>| {
            if a == q as usize || b == Some(q as usize) {
                T::zero()
            } else {
                T::of(rng.random_range(0.0..std::f64::consts::TAU))
            }
        };
        let single = (0..l).map(|a| draw(a, None)).collect();
        let pair = (0..l).map(|a| (0..l).map(|b| draw(a, Some(b))).collect()).collect();
        Self { single, pair, q }
    }

    pub fn angle(&self, word: &[Letter]) -> T {
        let mut t = T::zero();
        for (u, &a) in word.iter().enumerate() {
            if a == self.q {
                continue;
            }
            t += self.single[a as usize];
            for &b in &word[u + 1..] {
                t += self.pair[a as usize][b as usize];
            }
        }
        t
    }
}

/// Multilayer block operator from the controlled-phase family: diagonal,
/// so shifted copies commute exactly.
pub fn controlled_phase_k<T: Real>(n: usize, tracks: &Alphabet, rng: &mut QcaRng) -> Result<BlockUnitary<T>> {
    let pairs = Arc::new(pair_alphabet(tracks)?);
    let table = PhaseTable::<T>::random(&pairs, rng);
    let cells = block_cells(n);
    let cols = non_quiescent_words(n, &pairs)?
        .into_iter()
        .map(|i| {
            let w = index_word(i, pairs.len(), cells);
            (i, vec![(i, phase(table.angle(&w)))])
        })
        .collect();
    BlockUnitary::from_columns(n, pairs, cols)
}

/// Multilayer block operator `W^{(x)2^n} D W^{dagger (x)2^n}` with `D` from
/// the controlled-phase family and `W` a single-cell unitary fixing the
/// quiescent letter and mixing `mixing` other letters.
///
/// Shifted copies commute because the cell rotations cancel on overlaps.
pub fn conjugated_phase_k<T: Real>(
    n: usize,
    tracks: &Alphabet,
    mixing: usize,
    rng: &mut QcaRng,
) -> Result<BlockUnitary<T>> {
    let pairs = Arc::new(pair_alphabet(tracks)?);
    let l = pairs.len();
    let q = pairs.quiescent() as usize;
    let others: Vec<usize> = (0..l).filter(|&a| a != q).collect();
    let mixing = mixing.min(others.len());
    let chosen: Vec<usize> = sample(rng, others.len(), mixing)
        .into_iter()
        .map(|i| others[i])
        .collect();
    let h = haar_unitary::<T>(mixing, rng);
    let mut w = DMatrix::<Complex<T>>::identity(l, l);
    for (i, &a) in chosen.iter().enumerate() {
        for (j, &b) in chosen.iter().enumerate() {
            w[(a, b)] = h[(i, j)];
        }
    }
    let wd = w.adjoint();
    let table = PhaseTable::<T>::random(&pairs, rng);
    let cells = block_cells(n);

    // Sparse single-cell columns.
    let col_of = |m: &DMatrix<Complex<T>>, a: usize| -> Vec<(Letter, Complex<T>)> {
        (0..l)
            .filter(|&r| m[(r, a)] != zero())
            .map(|r| (r as Letter, m[(r, a)]))
            .collect()
    };
    let tensor = |m: &DMatrix<Complex<T>>, word: &[Letter]| -> BTreeMap<u64, Complex<T>> {
        let mut acc: Vec<(Vec<Letter>, Complex<T>)> = vec![(Vec::new(), one())];
        for &a in word {
            let c = col_of(m, a as usize);
            acc = acc
                .into_iter()
                .flat_map(|(p, amp)| {
                    c.iter().map(move |(r, z)| {
                        let mut p2 = p.clone();
                        p2.push(*r);
                        (p2, amp * z)
                    })
                })
                .collect();
        }
        let mut out = BTreeMap::new();
        for (p, a) in acc {
            *out.entry(word_index(&p, l)).or_insert_with(zero) += a;
        }
        out
    };

    let mut cols = BTreeMap::new();
    for i in non_quiescent_words(n, &pairs)? {
        let w0 = index_word(i, l, cells);
        let mut acc: BTreeMap<u64, Complex<T>> = BTreeMap::new();
        for (j, a) in tensor(&wd, &w0) {
            let wj = index_word(j, l, cells);
            let a = a * phase(table.angle(&wj));
            for (r, b) in tensor(&w, &wj) {
                *acc.entry(r).or_insert_with(zero) += a * b;
            }
        }
        let col: Column<T> = acc.into_iter().filter(|(_, z)| z.norm() > T::of(1e-15)).collect();
        cols.insert(i, col);
    }
    BlockUnitary::from_columns(n, pairs, cols)
}

/// How [`StateSampler`] draws states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    /// Product state: `active` random cells carry random single-cell
    /// vectors, the rest are quiescent.
    SparseProduct,
    /// Equal-weight superposition (random phases) of two distinct random
    /// non-empty configurations with at most `active` occupied cells.
    TwoTerm,
}

/// Draws reproducible sample states supported in a region.
#[derive(Debug, Clone)]
pub struct StateSampler {
    pub region: Region,
    pub max_active: usize,
}

impl StateSampler {
    pub fn new(region: Region, max_active: usize) -> Self {
        Self { region, max_active }
    }

    /// Alternates product states (even `i`) and two-term superpositions.
    pub fn sample<T: Real>(&self, alphabet: &Arc<Alphabet>, i: usize, rng: &mut QcaRng) -> Result<Superposition<T>> {
        let kind = if i.is_multiple_of(2) {
            SampleKind::SparseProduct
        } else {
            SampleKind::TwoTerm
        };
        self.sample_kind(alphabet, kind, rng)
    }

    pub fn sample_kind<T: Real>(
        &self,
        alphabet: &Arc<Alphabet>,
        kind: SampleKind,
        rng: &mut QcaRng,
    ) -> Result<Superposition<T>> {
        let sites = self.region.sites();
        let n = self.region.dim();
        let active = self.max_active.clamp(1, sites.len());
        match kind {
            SampleKind::SparseProduct => {
                let chosen: Vec<Site> = sample(rng, sites.len(), active)
                    .into_iter()
                    .map(|i| sites[i].clone())
                    .collect();
                let factors: Vec<Vec<Complex<T>>> =
                    chosen.iter().map(|_| random_unit_vector(alphabet.len(), rng)).collect();
                product_state(n, alphabet.clone(), &chosen, &factors)
            }
            SampleKind::TwoTerm => {
                if alphabet.len() < 2 {
                    return Err(QcaError::InvalidParameter(
                        "two-term samples need a non-quiescent letter".into(),
                    ));
                }
                let a = random_configuration(&sites, alphabet, active, rng);
                let mut b = random_configuration(&sites, alphabet, active, rng);
                let mut guard = 0;
                while b == a && guard < 64 {
                    b = random_configuration(&sites, alphabet, active, rng);
                    guard += 1;
                }
                let ph = T::of(rng.random_range(0.0..std::f64::consts::TAU));
                let h = T::of(std::f64::consts::FRAC_1_SQRT_2);
                Superposition::normalized(
                    n,
                    alphabet.clone(),
                    [(a, Complex::new(h, T::zero())), (b, phase(ph) * h)],
                )
            }
        }
    }
}

/// Random non-empty configuration with between 1 and `max_active`
/// non-quiescent cells among `sites`.
pub fn random_configuration(sites: &[Site], alphabet: &Alphabet, max_active: usize, rng: &mut QcaRng) -> Configuration {
    let q = alphabet.quiescent();
    let count = rng.random_range(1..=max_active.clamp(1, sites.len()));
    let cells = sample(rng, sites.len(), count)
        .into_iter()
        .map(|i| {
            let mut l = rng.random_range(0..alphabet.len() as Letter - 1);
            if l >= q {
                l += 1;
            }
            (sites[i].clone(), l)
        })
        .collect();
    Configuration::from_unsorted(cells, q)
}

/// Product of single-cell vectors (indexed by letter) on the given sites,
/// quiescent elsewhere.
pub fn product_state<T: Real>(
    n: usize,
    alphabet: Arc<Alphabet>,
    sites: &[Site],
    factors: &[Vec<Complex<T>>],
) -> Result<Superposition<T>> {
    let q = alphabet.quiescent();
    type Branch<T> = (Vec<(Site, Letter)>, Complex<T>);
    let mut terms: Vec<Branch<T>> = vec![(Vec::new(), one())];
    for (s, f) in sites.iter().zip(factors) {
        let mut next = Vec::with_capacity(terms.len() * f.len());
        for (cells, a) in &terms {
            for (l, z) in f.iter().enumerate() {
                if *z == zero() {
                    continue;
                }
                let mut c = cells.clone();
                if l as Letter != q {
                    c.push((s.clone(), l as Letter));
                }
                next.push((c, *a * z));
            }
        }
        terms = next;
    }
    Superposition::normalized(
        n,
        alphabet,
        terms.into_iter().map(|(c, a)| (Configuration::from_unsorted(c, q), a)),
    )
}

/// A named automaton of the test corpus.
#[derive(Debug, Clone)]
pub struct CorpusEntry<T: Real> {
    pub name: String,
    pub automaton: crate::automata::Automaton<T>,
    /// Whether every block operator preserves the number of non-quiescent
    /// cells, which keeps sparse supports polynomial.
    pub occupation_preserving: bool,
}

/// Reproducible mix of random partitioned and block automata in one and
/// two dimensions over two and three letters. Two-dimensional generic
/// entries use two letters only.
pub fn corpus<T: Real>(seed: u64) -> Result<Vec<CorpusEntry<T>>> {
    use crate::automata::{Automaton, Bqca, Pqca};
    let mut r = rng(seed);
    let mut out = Vec::new();
    for (n, letters, sector) in [
        (1, 2, false),
        (1, 3, false),
        (1, 2, true),
        (2, 2, false),
        (2, 2, true),
        (2, 3, true),
    ] {
        let alphabet = Arc::new(Alphabet::sized(letters)?);
        let draw = |r: &mut QcaRng| {
            if sector {
                random_sector_block_unitary::<T>(n, alphabet.clone(), r)
            } else {
                random_block_unitary::<T>(n, alphabet.clone(), r)
            }
        };
        let tag = if sector { "sector" } else { "generic" };
        let u = draw(&mut r)?;
        out.push(CorpusEntry {
            name: format!("pqca-{n}d-{letters}-{tag}"),
            automaton: Automaton::Pqca(Pqca::new(u)?),
            occupation_preserving: sector,
        });
        let (u0, u1) = (draw(&mut r)?, draw(&mut r)?);
        out.push(CorpusEntry {
            name: format!("bqca-{n}d-{letters}-{tag}"),
            automaton: Automaton::Bqca(Bqca::new(u0, u1)?),
            occupation_preserving: sector,
        });
    }
    Ok(out)
}
