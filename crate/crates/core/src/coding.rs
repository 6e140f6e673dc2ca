//! Isometric codings between automata and the supercell grouping.
//!
//! A coding acts supercell by supercell: the source lattice is tiled by
//! hypercubes of side `s_h`, the target lattice by hypercubes of side `s_g`,
//! and the supercell at coordinate `Y` on one side corresponds to the
//! supercell at `Y` on the other. With unit tilings this is the plain
//! cellwise coding `Enc = (x) E`. Supercells are never materialised as
//! letters of a product alphabet, which keeps codings between large
//! alphabets cheap.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use num_traits::{Float, Zero};
use serde::{Deserialize, Serialize};

use crate::automata::{Automaton, Dynamics};
use crate::block::{cube_offsets, index_word, word_index, word_space, Word};
use crate::error::{QcaError, Result};
use crate::lattice::{Alphabet, Configuration, Letter, Site, Superposition};
use crate::scalar::{one, tol, zero, Real};

/// Largest supercell word space a coding table may enumerate.
pub const MAX_CODING_WORDS: u64 = 1 << 20;

/// Largest product alphabet [`Regrouping`] will build.
pub const MAX_PACKED_LETTERS: u64 = 1 << 16;

/// Partition of `Z^n` into hypercubes `origin + side*Y + [0, side)^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tiling {
    pub side: usize,
    pub origin: i64,
}

impl Tiling {
    pub fn new(side: usize, origin: i64) -> Result<Self> {
        if side == 0 {
            return Err(QcaError::InvalidGrouping("supercell side must be at least 1".into()));
        }
        Ok(Self { side, origin })
    }

    pub fn unit() -> Self {
        Self { side: 1, origin: 0 }
    }

    pub fn cells(&self, n: usize) -> usize {
        self.side.pow(n as u32)
    }

    /// Supercell coordinate and intra-supercell position of a site.
    pub fn locate(&self, site: &Site) -> (Site, usize) {
        let s = self.side as i64;
        let mut pos = 0usize;
        let y = Site::new(site.coords().iter().map(|&x| {
            let r = x - self.origin;
            pos = pos * self.side + r.rem_euclid(s) as usize;
            r.div_euclid(s)
        }));
        (y, pos)
    }

    /// Site at intra-supercell offset `v` of supercell `y`.
    pub fn site(&self, y: &Site, v: &[i64]) -> Site {
        let s = self.side as i64;
        Site::new(y.coords().iter().zip(v).map(|(&c, &d)| self.origin + s * c + d))
    }
}

/// A tiling together with the number of rounds that make one grouped step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grouping {
    pub side: usize,
    pub origin: i64,
    pub steps: usize,
}

impl Grouping {
    pub fn new(side: usize, origin: i64, steps: usize) -> Result<Self> {
        Tiling::new(side, origin)?;
        if steps == 0 {
            return Err(QcaError::InvalidGrouping(
                "a grouped step needs at least one round".into(),
            ));
        }
        Ok(Self { side, origin, steps })
    }

    pub fn tiling(&self) -> Tiling {
        Tiling {
            side: self.side,
            origin: self.origin,
        }
    }
}

type SparseRow<T> = Vec<(usize, Complex<T>)>;

/// Splits a configuration into supercell words (quiescent-padded).
pub fn supercell_words(config: &Configuration, tiling: &Tiling, n: usize, q: Letter) -> BTreeMap<Site, Word> {
    let cells = tiling.cells(n);
    let mut out: BTreeMap<Site, Word> = BTreeMap::new();
    for (s, l) in config.entries() {
        let (y, p) = tiling.locate(s);
        out.entry(y).or_insert_with(|| Word::from_elem(q, cells))[p] = *l;
    }
    out
}

fn place(cells: &mut Vec<(Site, Letter)>, tiling: &Tiling, offsets: &[Vec<i64>], y: &Site, word: &[Letter], q: Letter) {
    for (p, &l) in word.iter().enumerate() {
        if l != q {
            cells.push((tiling.site(y, &offsets[p]), l));
        }
    }
}

/// How the decoding isometry is built from the encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decoder {
    /// `D = (I (x) |q_G>) E^dagger + |q_H> (x) (I - E E^dagger)`: inverts
    /// the encoding and keeps anything outside its image on the target
    /// track.
    Inverter,
    /// `D|b> = |q_H> (x) |b>`.
    Inject,
}

/// Supercell isometry `E` from source words to superpositions of target
/// words, with its decoder.
///
/// Invariants, checked on construction: `E` is defined on every
/// non-quiescent source word, its images are orthonormal within
/// [`tol::NORM`], and none of them overlaps the quiescent target word, so
/// that with `E|q...q> = |q...q>` the full map is an isometry preserving
/// quiescence.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometricCoding<T: Real> {
    n: usize,
    alphabet_h: Arc<Alphabet>,
    alphabet_g: Arc<Alphabet>,
    tiling_h: Tiling,
    tiling_g: Tiling,
    table: BTreeMap<Word, Vec<(Word, Complex<T>)>>,
    reverse: BTreeMap<Word, Vec<(Word, Complex<T>)>>,
    decoder: Decoder,
}

impl<T: Real> IsometricCoding<T> {
    pub fn new(
        n: usize,
        alphabet_h: Arc<Alphabet>,
        tiling_h: Tiling,
        alphabet_g: Arc<Alphabet>,
        tiling_g: Tiling,
        table: BTreeMap<Word, Vec<(Word, Complex<T>)>>,
        decoder: Decoder,
    ) -> Result<Self> {
        let ch = tiling_h.cells(n);
        let cg = tiling_g.cells(n);
        let words = word_space(alphabet_h.len(), ch)
            .filter(|&w| w <= MAX_CODING_WORDS)
            .ok_or(QcaError::CapExceeded {
                dim: (alphabet_h.len() as u128).saturating_pow(ch as u32),
                cap: MAX_CODING_WORDS as usize,
            })?;
        let qh = alphabet_h.quiescent();
        let qg = alphabet_g.quiescent();
        let q_word_h = Word::from_elem(qh, ch);
        let q_word_g = Word::from_elem(qg, cg);

        let mut table: BTreeMap<Word, Vec<(Word, Complex<T>)>> = table
            .into_iter()
            .map(|(a, col)| {
                let mut merged: BTreeMap<Word, Complex<T>> = BTreeMap::new();
                for (b, z) in col {
                    *merged.entry(b).or_insert_with(zero) += z;
                }
                (a, merged.into_iter().filter(|(_, z)| !z.is_zero()).collect())
            })
            .collect();
        if let Some(col) = table.remove(&q_word_h) {
            let exact = col.len() == 1
                && col[0].0 == q_word_g
                && (col[0].1 - one::<T>()).norm().to_f64_lossy() <= tol::QUIESCENT;
            if !exact {
                return Err(QcaError::InvalidCoding(
                    "the quiescent source word must encode to the quiescent target word".into(),
                ));
            }
        }
        for (a, col) in &table {
            if a.len() != ch || a.iter().any(|&l| l as usize >= alphabet_h.len()) {
                return Err(QcaError::InvalidCoding(format!("bad source word {a:?}")));
            }
            for (b, z) in col {
                if b.len() != cg || b.iter().any(|&l| l as usize >= alphabet_g.len()) {
                    return Err(QcaError::InvalidCoding(format!("bad target word {b:?}")));
                }
                if *b == q_word_g && z.norm().to_f64_lossy() > tol::QUIESCENT {
                    return Err(QcaError::InvalidCoding(format!(
                        "source word {a:?} overlaps the quiescent target word"
                    )));
                }
            }
        }
        if table.len() as u64 != words - 1 {
            return Err(QcaError::InvalidCoding(format!(
                "encoding defined on {} of {} non-quiescent source words",
                table.len(),
                words - 1
            )));
        }

        let mut reverse: BTreeMap<Word, Vec<(Word, Complex<T>)>> = BTreeMap::new();
        for (a, col) in &table {
            for (b, z) in col {
                reverse.entry(b.clone()).or_default().push((a.clone(), *z));
            }
        }
        // Gram matrix of the images, accumulated through shared target words.
        let mut gram: BTreeMap<(&Word, &Word), Complex<T>> = BTreeMap::new();
        for col in reverse.values() {
            for (a1, z1) in col {
                for (a2, z2) in col {
                    *gram.entry((a1, a2)).or_insert_with(zero) += z1.conj() * z2;
                }
            }
        }
        let mut worst = 0.0f64;
        for a in table.keys() {
            let d = gram.get(&(a, a)).copied().unwrap_or_else(zero);
            worst = worst.max((d - one::<T>()).norm().to_f64_lossy());
        }
        for ((a1, a2), z) in &gram {
            if a1 != a2 {
                worst = worst.max(z.norm().to_f64_lossy());
            }
        }
        if worst > tol::NORM {
            return Err(QcaError::InvalidCoding(format!(
                "encoding is not an isometry (deviation {worst:e})"
            )));
        }
        Ok(Self {
            n,
            alphabet_h,
            alphabet_g,
            tiling_h,
            tiling_g,
            table,
            reverse,
            decoder,
        })
    }

    /// Cellwise coding from a `|Sigma_G| x |Sigma_H|` isometry.
    pub fn cellwise(
        n: usize,
        alphabet_h: Arc<Alphabet>,
        alphabet_g: Arc<Alphabet>,
        e: &DMatrix<Complex<T>>,
        decoder: Decoder,
    ) -> Result<Self> {
        if e.nrows() != alphabet_g.len() || e.ncols() != alphabet_h.len() {
            return Err(QcaError::MatrixShape {
                expected: alphabet_g.len() * alphabet_h.len(),
                found: e.nrows() * e.ncols(),
            });
        }
        let qh = alphabet_h.quiescent() as usize;
        let qg = alphabet_g.quiescent() as usize;
        for r in 0..e.nrows() {
            let want = if r == qg { one() } else { zero() };
            if (e[(r, qh)] - want).norm().to_f64_lossy() > tol::QUIESCENT {
                return Err(QcaError::InvalidCoding("E does not map q_H to q_G".into()));
            }
        }
        let table = (0..e.ncols())
            .filter(|&c| c != qh)
            .map(|c| {
                let col = (0..e.nrows())
                    .filter(|&r| !e[(r, c)].is_zero())
                    .map(|r| (Word::from_elem(r as Letter, 1), e[(r, c)]))
                    .collect();
                (Word::from_elem(c as Letter, 1), col)
            })
            .collect();
        Self::new(
            n,
            alphabet_h,
            Tiling::unit(),
            alphabet_g,
            Tiling::unit(),
            table,
            decoder,
        )
    }

    /// `E = I` on a single alphabet.
    pub fn identity(n: usize, alphabet: Arc<Alphabet>, decoder: Decoder) -> Result<Self> {
        let e = DMatrix::identity(alphabet.len(), alphabet.len());
        Self::cellwise(n, alphabet.clone(), alphabet, &e, decoder)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn alphabet_h(&self) -> &Arc<Alphabet> {
        &self.alphabet_h
    }

    pub fn alphabet_g(&self) -> &Arc<Alphabet> {
        &self.alphabet_g
    }

    pub fn tiling_h(&self) -> Tiling {
        self.tiling_h
    }

    pub fn tiling_g(&self) -> Tiling {
        self.tiling_g
    }

    pub fn decoder(&self) -> Decoder {
        self.decoder
    }

    /// Images of the non-quiescent source words.
    pub fn table(&self) -> &BTreeMap<Word, Vec<(Word, Complex<T>)>> {
        &self.table
    }

    /// Same coding with another decoder.
    pub fn with_decoder(mut self, decoder: Decoder) -> Self {
        self.decoder = decoder;
        self
    }

    /// `D|b>` as `(source word, target word, amplitude)` triples.
    fn decode_word(&self, b: &Word) -> Vec<(Word, Word, Complex<T>)> {
        let qh = Word::from_elem(self.alphabet_h.quiescent(), self.tiling_h.cells(self.n));
        match self.decoder {
            Decoder::Inject => vec![(qh, b.clone(), one())],
            Decoder::Inverter => {
                let qg = Word::from_elem(self.alphabet_g.quiescent(), self.tiling_g.cells(self.n));
                let mut out = Vec::new();
                let mut residual: BTreeMap<Word, Complex<T>> = BTreeMap::new();
                residual.insert(b.clone(), one());
                if let Some(pre) = self.reverse.get(b) {
                    for (a, e_ba) in pre {
                        out.push((a.clone(), qg.clone(), e_ba.conj()));
                        for (g, e_ga) in &self.table[a] {
                            *residual.entry(g.clone()).or_insert_with(zero) -= e_ba.conj() * *e_ga;
                        }
                    }
                }
                let floor = T::of(RESIDUAL_FLOOR);
                for (g, z) in residual {
                    if z.norm() > floor {
                        out.push((qh.clone(), g, z));
                    }
                }
                out
            }
        }
    }
}

/// Entries of `(I - E E^dagger)|b>` below this modulus are rounding noise
/// of an exact cancellation and are dropped.
const RESIDUAL_FLOOR: f64 = 1e-14;

/// `Enc = (x) E` applied supercell by supercell.
pub fn encode<T: Real>(coding: &IsometricCoding<T>, state: &Superposition<T>) -> Result<Superposition<T>> {
    if state.dim() != coding.n || state.alphabet() != &*coding.alphabet_h {
        return Err(QcaError::AlphabetMismatch(
            "state is not over the coding's source alphabet".into(),
        ));
    }
    let n = coding.n;
    let qh = coding.alphabet_h.quiescent();
    let qg = coding.alphabet_g.quiescent();
    let offsets_g = cube_offsets(n, coding.tiling_g.side);
    let mut out: BTreeMap<Configuration, Complex<T>> = BTreeMap::new();
    for (c, amp) in state.terms() {
        let words = supercell_words(c, &coding.tiling_h, n, qh);
        type Branch<T> = (Vec<(Site, Letter)>, Complex<T>);
        let mut partial: Vec<Branch<T>> = vec![(Vec::new(), *amp)];
        for (y, a) in &words {
            let col = &coding.table[a];
            let mut next = Vec::with_capacity(partial.len() * col.len());
            for (cells, z) in &partial {
                for (b, e) in col {
                    let mut cells = cells.clone();
                    place(&mut cells, &coding.tiling_g, &offsets_g, y, b, qg);
                    next.push((cells, *z * *e));
                }
            }
            partial = next;
        }
        for (cells, z) in partial {
            *out.entry(Configuration::from_unsorted(cells, qg)).or_insert_with(zero) += z;
        }
    }
    Ok(Superposition::from_map(n, coding.alphabet_g.clone(), out))
}

/// `Dec = (x) D` applied supercell by supercell.
pub fn decode<T: Real>(coding: &IsometricCoding<T>, state: &Superposition<T>) -> Result<TrackState<T>> {
    if state.dim() != coding.n || state.alphabet() != &*coding.alphabet_g {
        return Err(QcaError::AlphabetMismatch(
            "state is not over the coding's target alphabet".into(),
        ));
    }
    let n = coding.n;
    let qh = coding.alphabet_h.quiescent();
    let qg = coding.alphabet_g.quiescent();
    let offsets_h = cube_offsets(n, coding.tiling_h.side);
    let offsets_g = cube_offsets(n, coding.tiling_g.side);
    let mut cache: HashMap<Word, Vec<(Word, Word, Complex<T>)>> = HashMap::new();
    let mut out: BTreeMap<(Configuration, Configuration), Complex<T>> = BTreeMap::new();
    type Partial<T> = (Vec<(Site, Letter)>, Vec<(Site, Letter)>, Complex<T>);
    for (c, amp) in state.terms() {
        let words = supercell_words(c, &coding.tiling_g, n, qg);
        let mut partial: Vec<Partial<T>> = vec![(Vec::new(), Vec::new(), *amp)];
        for (y, b) in &words {
            let images = cache.entry(b.clone()).or_insert_with(|| coding.decode_word(b));
            let mut next = Vec::with_capacity(partial.len() * images.len());
            for (hs, gs, z) in &partial {
                for (a, g, d) in images.iter() {
                    let mut hs = hs.clone();
                    let mut gs = gs.clone();
                    place(&mut hs, &coding.tiling_h, &offsets_h, y, a, qh);
                    place(&mut gs, &coding.tiling_g, &offsets_g, y, g, qg);
                    next.push((hs, gs, *z * *d));
                }
            }
            partial = next;
        }
        for (hs, gs, z) in partial {
            let key = (
                Configuration::from_unsorted(hs, qh),
                Configuration::from_unsorted(gs, qg),
            );
            *out.entry(key).or_insert_with(zero) += z;
        }
    }
    Ok(TrackState {
        n,
        alphabet_h: coding.alphabet_h.clone(),
        alphabet_g: coding.alphabet_g.clone(),
        terms: out,
    })
}

/// Pure state on the two-track lattice produced by decoding: a source
/// track over `Sigma_H` and a target track over `Sigma_G`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackState<T: Real> {
    n: usize,
    alphabet_h: Arc<Alphabet>,
    alphabet_g: Arc<Alphabet>,
    terms: BTreeMap<(Configuration, Configuration), Complex<T>>,
}

/// Side of the Gram matrix above which Schmidt analysis falls back to
/// power iteration for the largest coefficient.
const DENSE_SCHMIDT_LIMIT: usize = 1024;

impl<T: Real> TrackState<T> {
    pub fn terms(&self) -> &BTreeMap<(Configuration, Configuration), Complex<T>> {
        &self.terms
    }

    pub fn norm_sqr(&self) -> T {
        self.terms.values().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    /// The product state `h (x) g`.
    pub fn product(h: &Superposition<T>, g: &Superposition<T>) -> Result<Self> {
        if h.dim() != g.dim() {
            return Err(QcaError::DimensionMismatch {
                expected: h.dim(),
                found: g.dim(),
            });
        }
        let mut terms = BTreeMap::new();
        for (a, x) in h.terms() {
            for (b, y) in g.terms() {
                terms.insert((a.clone(), b.clone()), *x * *y);
            }
        }
        Ok(Self {
            n: h.dim(),
            alphabet_h: h.alphabet_arc().clone(),
            alphabet_g: g.alphabet_arc().clone(),
            terms,
        })
    }

    /// `(<chi| (x) I)` applied to this state: a vector on the target track.
    pub fn project_source(&self, chi: &Superposition<T>) -> Result<BTreeMap<Configuration, Complex<T>>> {
        if chi.dim() != self.n || chi.alphabet() != &*self.alphabet_h {
            return Err(QcaError::AlphabetMismatch(
                "reference state is not on the source track".into(),
            ));
        }
        let mut out: BTreeMap<Configuration, Complex<T>> = BTreeMap::new();
        for ((h, g), z) in &self.terms {
            let c = chi.amplitude(h);
            if !c.is_zero() {
                *out.entry(g.clone()).or_insert_with(zero) += c.conj() * *z;
            }
        }
        Ok(out)
    }

    /// `||(<chi| (x) I) psi||^2`: equals `|<chi|h>|^2` for a product
    /// `h (x) phi`, and is insensitive to global phases.
    pub fn fidelity(&self, chi: &Superposition<T>) -> Result<T> {
        Ok(self
            .project_source(chi)?
            .values()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr()))
    }

    /// Normalised target-track factor left after projecting onto `chi`.
    pub fn garbage(&self, chi: &Superposition<T>) -> Result<Option<BTreeMap<Configuration, Complex<T>>>> {
        let v = self.project_source(chi)?;
        let norm = Float::sqrt(v.values().fold(T::zero(), |acc, z| acc + z.norm_sqr()));
        if norm.to_f64_lossy() <= tol::NORM {
            return Ok(None);
        }
        Ok(Some(v.into_iter().map(|(k, z)| (k, z / norm)).collect()))
    }

    /// Rows are source configurations; returns the sparse rows and the
    /// number of distinct columns.
    fn rows(&self) -> (Vec<SparseRow<T>>, usize) {
        let mut cols: BTreeMap<&Configuration, usize> = BTreeMap::new();
        let mut rows: Vec<Vec<(usize, Complex<T>)>> = Vec::new();
        let mut last: Option<&Configuration> = None;
        for ((h, g), z) in &self.terms {
            let next = cols.len();
            let j = *cols.entry(g).or_insert(next);
            if last != Some(h) {
                rows.push(Vec::new());
                last = Some(h);
            }
            rows.last_mut().unwrap().push((j, *z));
        }
        (rows, cols.len())
    }

    /// Gram matrix on the smaller side of the source/target bipartition.
    fn gram(&self) -> DMatrix<Complex<T>> {
        let (rows, ncols) = self.rows();
        if rows.len() <= ncols {
            // M M^dagger over rows: rows share columns.
            let mut by_col: Vec<Vec<(usize, Complex<T>)>> = vec![Vec::new(); ncols];
            for (i, r) in rows.iter().enumerate() {
                for (j, z) in r {
                    by_col[*j].push((i, *z));
                }
            }
            let mut g = DMatrix::from_element(rows.len(), rows.len(), zero());
            for col in &by_col {
                for (i, a) in col {
                    for (k, b) in col {
                        g[(*i, *k)] += *a * b.conj();
                    }
                }
            }
            g
        } else {
            let mut g = DMatrix::from_element(ncols, ncols, zero());
            for r in &rows {
                for (i, a) in r {
                    for (k, b) in r {
                        g[(*i, *k)] += a.conj() * *b;
                    }
                }
            }
            g
        }
    }

    fn gram_side(&self) -> usize {
        let (rows, ncols) = self.rows();
        rows.len().min(ncols)
    }

    /// All Schmidt coefficients across the track cut, descending.
    pub fn schmidt_coefficients(&self) -> Result<Vec<T>> {
        let side = self.gram_side();
        if side > DENSE_SCHMIDT_LIMIT {
            return Err(QcaError::CapExceeded {
                dim: side as u128,
                cap: DENSE_SCHMIDT_LIMIT,
            });
        }
        if side == 0 {
            return Ok(Vec::new());
        }
        let eig = self.gram().symmetric_eigen();
        let mut s: Vec<T> = eig
            .eigenvalues
            .iter()
            .map(|&l| Float::sqrt(Float::max(l, T::zero())))
            .collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        Ok(s)
    }

    /// Largest Schmidt coefficient; exact up to the dense limit, power
    /// iteration beyond it.
    pub fn largest_schmidt(&self) -> T {
        if self.gram_side() <= DENSE_SCHMIDT_LIMIT {
            return self
                .schmidt_coefficients()
                .ok()
                .and_then(|s| s.first().copied())
                .unwrap_or_else(T::zero);
        }
        let (rows, ncols) = self.rows();
        let mut v = DVector::from_element(ncols, one::<T>());
        let mut lambda = T::zero();
        for _ in 0..300 {
            let norm = Float::sqrt(v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()));
            if norm.is_zero() {
                return T::zero();
            }
            v /= Complex::new(norm, T::zero());
            let mut w = DVector::from_element(ncols, zero::<T>());
            for r in &rows {
                let mv: Complex<T> = r.iter().fold(zero(), |acc, (j, z)| acc + *z * v[*j]);
                for (j, z) in r {
                    w[*j] += z.conj() * mv;
                }
            }
            let next = Float::sqrt(w.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()));
            let done = Float::abs(next - lambda) <= T::of(1e-15);
            lambda = next;
            v = w;
            if done {
                break;
            }
        }
        Float::sqrt(lambda)
    }
}

/// Direction of [`regroup_state`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Pack,
    Unpack,
}

/// Bijection between states over `Sigma` and states over supercell letters
/// `Sigma^(s^n)`. The packed letter of a word is its [`word_index`]; its name
/// concatenates the cell names (joined by `.` unless all are single
/// characters).
#[derive(Debug, Clone, PartialEq)]
pub struct Regrouping {
    n: usize,
    tiling: Tiling,
    base: Arc<Alphabet>,
    packed: Arc<Alphabet>,
}

impl Regrouping {
    pub fn new(n: usize, base: Arc<Alphabet>, tiling: Tiling) -> Result<Self> {
        let cells = tiling.cells(n);
        if cells == 1 {
            return Ok(Self {
                n,
                tiling,
                packed: base.clone(),
                base,
            });
        }
        let size = word_space(base.len(), cells)
            .filter(|&s| s <= MAX_PACKED_LETTERS)
            .ok_or(QcaError::CapExceeded {
                dim: (base.len() as u128).saturating_pow(cells as u32),
                cap: MAX_PACKED_LETTERS as usize,
            })?;
        let short = base.letters().iter().all(|l| l.chars().count() == 1);
        let names: Vec<String> = (0..size)
            .map(|i| {
                let parts: Vec<&str> = index_word(i, base.len(), cells).iter().map(|&l| base.name(l)).collect();
                if short {
                    parts.concat()
                } else {
                    parts.join(".")
                }
            })
            .collect();
        let q = word_index(&Word::from_elem(base.quiescent(), cells), base.len());
        let packed = Arc::new(Alphabet::new(names, q as usize)?);
        Ok(Self {
            n,
            tiling,
            base,
            packed,
        })
    }

    pub fn base(&self) -> &Arc<Alphabet> {
        &self.base
    }

    pub fn packed(&self) -> &Arc<Alphabet> {
        &self.packed
    }

    pub fn tiling(&self) -> Tiling {
        self.tiling
    }

    pub fn pack<T: Real>(&self, state: &Superposition<T>) -> Result<Superposition<T>> {
        regroup_state(state, self, Direction::Pack)
    }

    pub fn unpack<T: Real>(&self, state: &Superposition<T>) -> Result<Superposition<T>> {
        regroup_state(state, self, Direction::Unpack)
    }
}

/// Reindexes cells at `x` into supercells at `floor((x - origin) / s)` or
/// back.
pub fn regroup_state<T: Real>(
    state: &Superposition<T>,
    regrouping: &Regrouping,
    direction: Direction,
) -> Result<Superposition<T>> {
    let (from, to) = match direction {
        Direction::Pack => (&regrouping.base, &regrouping.packed),
        Direction::Unpack => (&regrouping.packed, &regrouping.base),
    };
    if state.dim() != regrouping.n || state.alphabet() != &**from {
        return Err(QcaError::AlphabetMismatch("state does not match the regrouping".into()));
    }
    if Arc::ptr_eq(from, to) {
        return Ok(state.clone());
    }
    let n = regrouping.n;
    let cells = regrouping.tiling.cells(n);
    let letters = regrouping.base.len();
    let qb = regrouping.base.quiescent();
    let qp = regrouping.packed.quiescent();
    let offsets = cube_offsets(n, regrouping.tiling.side);
    let terms = state
        .terms()
        .iter()
        .map(|(c, a)| {
            let config = match direction {
                Direction::Pack => {
                    let words = supercell_words(c, &regrouping.tiling, n, qb);
                    let cells = words
                        .into_iter()
                        .map(|(y, w)| (y, word_index(&w, letters) as Letter))
                        .collect();
                    Configuration::from_unsorted(cells, qp)
                }
                Direction::Unpack => {
                    let mut out = Vec::new();
                    for (y, l) in c.entries() {
                        let w = index_word(*l as u64, letters, cells);
                        place(&mut out, &regrouping.tiling, &offsets, y, &w, qb);
                    }
                    Configuration::from_unsorted(out, qb)
                }
            };
            (config, *a)
        })
        .collect();
    Ok(Superposition::from_map(n, to.clone(), terms))
}

/// `t` rounds of a base automaton read on supercells of side `s`; the
/// quiescent supercell letter is `q^(s^n)`.
#[derive(Debug, Clone)]
pub struct GroupedAutomaton<T: Real> {
    base: Automaton<T>,
    steps: usize,
    regrouping: Regrouping,
}

/// Groups `a` by supercells of side `s` (tiling origin 0) and `t` rounds.
pub fn group<T: Real>(a: Automaton<T>, s: usize, t: usize) -> Result<GroupedAutomaton<T>> {
    group_with(a, Grouping::new(s, 0, t)?)
}

pub fn group_with<T: Real>(a: Automaton<T>, g: Grouping) -> Result<GroupedAutomaton<T>> {
    let g = Grouping::new(g.side, g.origin, g.steps)?;
    let regrouping = Regrouping::new(a.dimension(), Dynamics::alphabet(&a).clone(), g.tiling())?;
    Ok(GroupedAutomaton {
        base: a,
        steps: g.steps,
        regrouping,
    })
}

impl<T: Real> GroupedAutomaton<T> {
    pub fn base(&self) -> &Automaton<T> {
        &self.base
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn regrouping(&self) -> &Regrouping {
        &self.regrouping
    }

    /// The supercell quiescent letter.
    pub fn quiescent(&self) -> Letter {
        self.regrouping.packed.quiescent()
    }
}

impl<T: Real> Dynamics<T> for GroupedAutomaton<T> {
    fn dimension(&self) -> usize {
        self.base.dimension()
    }

    fn alphabet(&self) -> &Arc<Alphabet> {
        &self.regrouping.packed
    }

    fn round(&self, state: &Superposition<T>) -> Result<Superposition<T>> {
        let s = self.regrouping.unpack(state)?;
        let s = self.base.rounds(&s, self.steps)?;
        self.regrouping.pack(&s)
    }

    fn translation_period(&self) -> i64 {
        let p = self.base.translation_period();
        let s = self.regrouping.tiling.side as i64;
        p / gcd(p, s)
    }

    fn light_cone(&self) -> (i64, i64) {
        let (lo, hi) = self.base.light_cone();
        let t = self.steps as i64;
        let s = self.regrouping.tiling.side as i64;
        ((lo * t).div_euclid(s), (s - 1 + hi * t).div_euclid(s))
    }
}

/// `steps` rounds of an inner dynamics as one round.
#[derive(Debug, Clone)]
pub struct Iterated<D> {
    pub inner: D,
    pub steps: usize,
}

impl<T: Real, D: Dynamics<T>> Dynamics<T> for Iterated<D> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn alphabet(&self) -> &Arc<Alphabet> {
        self.inner.alphabet()
    }

    fn round(&self, state: &Superposition<T>) -> Result<Superposition<T>> {
        self.inner.rounds(state, self.steps)
    }

    fn translation_period(&self) -> i64 {
        self.inner.translation_period()
    }

    fn light_cone(&self) -> (i64, i64) {
        let (lo, hi) = self.inner.light_cone();
        (lo * self.steps as i64, hi * self.steps as i64)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::Pqca;
    use crate::lattice::make_configuration;
    use crate::lattice::{inner_product, Region};
    use crate::random::{haar_unitary, random_block_unitary, rng, StateSampler};
    use crate::scalar::cx;

    fn ab() -> Arc<Alphabet> {
        Arc::new(Alphabet::new(["q", "a", "b"], 0).unwrap())
    }

    fn conf(a: &Alphabet, cells: &[(i64, usize)]) -> Configuration {
        make_configuration(
            1,
            cells.iter().map(|&(x, l)| (Site::from([x]), l)).collect::<Vec<_>>(),
            a,
        )
        .unwrap()
    }

    #[test]
    fn pack_names_and_round_trip() {
        let a = ab();
        let rg = Regrouping::new(1, a.clone(), Tiling::new(2, 0).unwrap()).unwrap();
        let psi = Superposition::<f64>::basis(1, a.clone(), conf(&a, &[(0, 1), (1, 2)]));
        let packed = rg.pack(&psi).unwrap();
        let (c, _) = packed.terms().iter().next().unwrap();
        assert_eq!(c.entries().len(), 1);
        assert_eq!(c.entries()[0].0, Site::from([0]));
        assert_eq!(rg.packed().name(c.entries()[0].1), "ab");
        assert_eq!(rg.unpack(&packed).unwrap(), psi);
        let q = Superposition::<f64>::quiescent(1, a);
        assert!(rg.pack(&q).unwrap().is_quiescent());
    }

    #[test]
    fn negative_coordinates_pack_by_floor() {
        let a = ab();
        let rg = Regrouping::new(1, a.clone(), Tiling::new(2, 0).unwrap()).unwrap();
        let psi = Superposition::<f64>::basis(1, a.clone(), conf(&a, &[(-1, 1)]));
        let packed = rg.pack(&psi).unwrap();
        let (c, _) = packed.terms().iter().next().unwrap();
        assert_eq!(c.entries()[0].0, Site::from([-1]));
        assert_eq!(rg.packed().name(c.entries()[0].1), "qa");
    }

    #[test]
    fn identity_coding_round_trip() {
        let a = ab();
        let coding = IsometricCoding::<f64>::identity(1, a.clone(), Decoder::Inverter).unwrap();
        let mut r = rng(3);
        let sampler = StateSampler::new(Region::new(vec![0], vec![3]).unwrap(), 3);
        for i in 0..6 {
            let psi = sampler.sample::<f64>(&a, i, &mut r).unwrap();
            assert_eq!(encode(&coding, &psi).unwrap(), psi);
            let dec = decode(&coding, &psi).unwrap();
            assert!((dec.fidelity(&psi).unwrap() - 1.0).abs() < 1e-12);
            let s = dec.schmidt_coefficients().unwrap();
            assert!((s[0] - 1.0).abs() < 1e-12);
            assert!(s[1..].iter().all(|&x| x < 1e-7));
        }
    }

    #[test]
    fn inject_decoder_puts_state_on_target_track() {
        let a = ab();
        let coding = IsometricCoding::<f64>::identity(1, a.clone(), Decoder::Inject).unwrap();
        let psi = Superposition::<f64>::basis(1, a.clone(), conf(&a, &[(2, 2)]));
        let dec = decode(&coding, &psi).unwrap();
        let expected = TrackState::product(&Superposition::quiescent(1, a), &psi).unwrap();
        assert_eq!(dec, expected);
    }

    #[test]
    fn random_isometry_preserves_inner_products() {
        let h = Arc::new(Alphabet::sized(2).unwrap());
        let g = Arc::new(Alphabet::sized(4).unwrap());
        let mut r = rng(11);
        // Columns 0 and 1 of [1 (+) Haar(3)] form an isometry fixing q.
        let w = haar_unitary::<f64>(3, &mut r);
        let mut e = DMatrix::from_element(4, 2, cx(0.0, 0.0));
        e[(0, 0)] = cx(1.0, 0.0);
        for k in 0..3 {
            e[(k + 1, 1)] = w[(k, 0)];
        }
        let coding = IsometricCoding::cellwise(1, h.clone(), g, &e, Decoder::Inverter).unwrap();
        let sampler = StateSampler::new(Region::new(vec![0], vec![2]).unwrap(), 3);
        let x = sampler.sample::<f64>(&h, 0, &mut r).unwrap();
        let y = sampler.sample::<f64>(&h, 1, &mut r).unwrap();
        let ex = encode(&coding, &x).unwrap();
        let ey = encode(&coding, &y).unwrap();
        assert!((ex.norm_sqr() - 1.0).abs() < 1e-10);
        let before = inner_product(&x, &y).unwrap();
        let after = inner_product(&ex, &ey).unwrap();
        assert!((before - after).norm() < 1e-10);
        let dec = decode(&coding, &ex).unwrap();
        assert!((dec.norm_sqr() - 1.0).abs() < 1e-10);
        assert!((dec.fidelity(&x).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn non_isometric_table_is_rejected() {
        let a = Arc::new(Alphabet::sized(2).unwrap());
        let mut table = BTreeMap::new();
        table.insert(
            Word::from_elem(1, 1),
            vec![(Word::from_elem(1, 1), cx::<f64>(0.5, 0.0))],
        );
        let err = IsometricCoding::new(
            1,
            a.clone(),
            Tiling::unit(),
            a,
            Tiling::unit(),
            table,
            Decoder::Inverter,
        );
        assert!(matches!(err, Err(QcaError::InvalidCoding(_))));
    }

    #[test]
    fn grouped_matches_base_rounds() {
        let a = Arc::new(Alphabet::sized(2).unwrap());
        let mut r = rng(5);
        let u = random_block_unitary::<f64>(1, a.clone(), &mut r).unwrap();
        let base = Automaton::Pqca(Pqca::new(u).unwrap());
        let g = group(base.clone(), 2, 2).unwrap();
        let sampler = StateSampler::new(Region::new(vec![0], vec![3]).unwrap(), 2);
        for i in 0..4 {
            let psi = sampler.sample::<f64>(&a, i, &mut r).unwrap();
            let direct = base.rounds(&psi, 2).unwrap();
            let via = g
                .regrouping()
                .unpack(&g.round(&g.regrouping().pack(&psi).unwrap()).unwrap())
                .unwrap();
            assert!(direct.distance(&via).unwrap() < 1e-12);
        }
        let trivial = group(base.clone(), 1, 1).unwrap();
        let psi = sampler.sample::<f64>(&a, 0, &mut r).unwrap();
        assert_eq!(trivial.round(&psi).unwrap(), base.round(&psi).unwrap());
        let q = Superposition::quiescent(1, g.regrouping().packed().clone());
        assert!(g.round(&q).unwrap().is_quiescent());
    }
}
