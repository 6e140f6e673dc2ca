//! Partitioned, block and multilayer automata and their sparse evaluators.
//!
//! A round of a partitioned automaton applies its block operator on the
//! blocks based at `2Z^n` and then on those based at `2Z^n + (1,...,1)`. The
//! translation by one cell that alternates the partitions is absorbed into
//! the block alignment, so coordinates do not drift from round to round.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_complex::Complex;
use rustc_hash::FxHashMap;

use crate::block::{block_cells, block_offsets, index_word, word_index, BlockUnitary, Word};
use crate::error::{QcaError, Result};
use crate::lattice::{Alphabet, Configuration, Letter, Site, Superposition};
use crate::scalar::{zero, Real};

/// Anything that evolves finite superpositions round by round.
pub trait Dynamics<T: Real>: Sync {
    fn dimension(&self) -> usize;

    /// Alphabet of the cells the evolution acts on.
    fn alphabet(&self) -> &Arc<Alphabet>;

    /// One full period of the evolution.
    fn round(&self, state: &Superposition<T>) -> Result<Superposition<T>>;

    /// Smallest translation (per axis) that commutes with [`Self::round`].
    fn translation_period(&self) -> i64 {
        2
    }

    /// Inclusive range of input offsets, per axis, that can influence an
    /// output cell after one round.
    fn light_cone(&self) -> (i64, i64) {
        (-2, 2)
    }

    fn rounds(&self, state: &Superposition<T>, count: usize) -> Result<Superposition<T>> {
        let mut s = state.clone();
        for _ in 0..count {
            s = self.round(&s)?;
        }
        Ok(s)
    }
}

impl<T: Real, D: Dynamics<T> + ?Sized> Dynamics<T> for &D {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }

    fn alphabet(&self) -> &Arc<Alphabet> {
        (**self).alphabet()
    }

    fn round(&self, state: &Superposition<T>) -> Result<Superposition<T>> {
        (**self).round(state)
    }

    fn translation_period(&self) -> i64 {
        (**self).translation_period()
    }

    fn light_cone(&self) -> (i64, i64) {
        (**self).light_cone()
    }
}

fn check_state<T: Real>(n: usize, alphabet: &Alphabet, state: &Superposition<T>) -> Result<()> {
    if state.dim() != n {
        return Err(QcaError::DimensionMismatch {
            expected: n,
            found: state.dim(),
        });
    }
    if state.alphabet() != alphabet {
        return Err(QcaError::AlphabetMismatch(
            "state and automaton use different alphabets".into(),
        ));
    }
    Ok(())
}

#[inline]
fn block_base(x: i64, offset: i64) -> i64 {
    (x - offset).div_euclid(2) * 2 + offset
}

/// Applies one block operator per block of the partition with the given
/// offset; `select` picks the operator from the block's base site.
///
/// Blocks whose cells are all quiescent are skipped: every admissible
/// operator fixes them.
pub fn apply_layer_with<'a, T, F>(state: &Superposition<T>, offset: &[i64], select: F) -> Result<Superposition<T>>
where
    T: Real,
    F: Fn(&Site) -> &'a BlockUnitary<T>,
{
    let n = state.dim();
    if offset.len() != n {
        return Err(QcaError::DimensionMismatch {
            expected: n,
            found: offset.len(),
        });
    }
    let alphabet = state.alphabet_arc().clone();
    let letters = alphabet.len();
    let q = alphabet.quiescent();
    let cells = block_cells(n);
    let offsets = block_offsets(n);
    let base_of = |site: &Site| Site::new(site.coords().iter().zip(offset).map(|(&x, &o)| block_base(x, o)));

    // Blocks are disjoint and a block only rewrites its own cells, so the
    // layer is applied one occupied block at a time over the whole state.
    let mut bases: BTreeSet<Site> = BTreeSet::new();
    for config in state.terms().keys() {
        for (site, _) in config.entries() {
            bases.insert(base_of(site));
        }
    }

    // An admissible operator maps non-quiescent words to non-quiescent
    // words, so terms the block leaves untouched cannot collide with the
    // rewritten ones and skip the merge.
    let mut terms: Vec<(Configuration, Complex<T>)> = state.terms().iter().map(|(c, a)| (c.clone(), *a)).collect();
    let mut checked: *const BlockUnitary<T> = std::ptr::null();
    for base in &bases {
        let u = select(base);
        if !std::ptr::eq(u, checked) {
            if u.dim() != n || (!Arc::ptr_eq(u.alphabet_arc(), &alphabet) && u.alphabet() != &*alphabet) {
                return Err(QcaError::AlphabetMismatch(
                    "block operator does not match the state".into(),
                ));
            }
            checked = u;
        }
        let quiet = u.quiescent_index();
        let sites: Vec<Site> = offsets.iter().map(|v| base.offset(v)).collect();
        let mut untouched = Vec::with_capacity(terms.len());
        let mut rewritten: FxHashMap<Configuration, Complex<T>> = FxHashMap::default();
        let mut leaked = false;
        let mut word = Word::from_elem(q, cells);
        for (config, amp) in terms {
            let mut occupied = false;
            for (p, site) in sites.iter().enumerate() {
                word[p] = config.letter_at(site, q);
                occupied |= word[p] != q;
            }
            if !occupied {
                untouched.push((config, amp));
                continue;
            }
            let rest: Vec<(Site, Letter)> = config
                .entries()
                .iter()
                .filter(|(s, _)| base_of(s) != *base)
                .cloned()
                .collect();
            for (row, z) in u.column(word_index(&word, letters)).iter() {
                leaked |= *row == quiet;
                let w = index_word(*row, letters, cells);
                let mut c = rest.clone();
                c.extend(
                    w.iter()
                        .zip(&sites)
                        .filter(|(l, _)| **l != q)
                        .map(|(l, s)| (s.clone(), *l)),
                );
                *rewritten.entry(Configuration::from_unsorted(c, q)).or_insert_with(zero) += amp * *z;
            }
        }
        if leaked {
            for (c, a) in untouched.drain(..) {
                *rewritten.entry(c).or_insert_with(zero) += a;
            }
        }
        untouched.extend(rewritten);
        terms = untouched;
    }
    let out: BTreeMap<Configuration, Complex<T>> = terms.into_iter().collect();
    Ok(Superposition::from_map(n, alphabet, out))
}

/// Applies `u` on every block based at `2Z^n + offset`.
pub fn apply_block_layer<T: Real>(
    u: &BlockUnitary<T>,
    offset: &[i64],
    state: &Superposition<T>,
) -> Result<Superposition<T>> {
    check_state(u.dim(), u.alphabet(), state)?;
    if offset.iter().any(|&o| o != 0 && o != 1) {
        return Err(QcaError::InvalidParameter(format!(
            "block offset {offset:?} is not in {{0,1}}^n"
        )));
    }
    apply_layer_with(state, offset, |_| u)
}

/// Offset of the partition used at a given substep parity.
pub fn parity_offset(n: usize, parity: u8) -> Vec<i64> {
    vec![(parity & 1) as i64; n]
}

/// Partitioned automaton defined by a single scattering operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Pqca<T: Real> {
    u: BlockUnitary<T>,
}

impl<T: Real> Pqca<T> {
    pub fn new(u: BlockUnitary<T>) -> Result<Self> {
        u.validate()?;
        Ok(Self { u })
    }

    /// Skips validation; for negative controls only.
    pub fn new_unchecked(u: BlockUnitary<T>) -> Self {
        Self { u }
    }

    pub fn scattering(&self) -> &BlockUnitary<T> {
        &self.u
    }
}

pub fn step_pqca<T: Real>(a: &Pqca<T>, state: &Superposition<T>, parity: u8) -> Result<Superposition<T>> {
    if parity > 1 {
        return Err(QcaError::InvalidParameter(format!("parity {parity}")));
    }
    apply_block_layer(&a.u, &parity_offset(a.u.dim(), parity), state)
}

pub fn round_pqca<T: Real>(a: &Pqca<T>, state: &Superposition<T>) -> Result<Superposition<T>> {
    let s = step_pqca(a, state, 0)?;
    step_pqca(a, &s, 1)
}

/// Block automaton: `u0` on the even partition, `u1` on the odd one.
#[derive(Debug, Clone, PartialEq)]
pub struct Bqca<T: Real> {
    u0: BlockUnitary<T>,
    u1: BlockUnitary<T>,
}

impl<T: Real> Bqca<T> {
    pub fn new(u0: BlockUnitary<T>, u1: BlockUnitary<T>) -> Result<Self> {
        if u0.dim() != u1.dim() || u0.alphabet() != u1.alphabet() {
            return Err(QcaError::AlphabetMismatch(
                "the two block operators act on different blocks".into(),
            ));
        }
        u0.validate()?;
        u1.validate()?;
        Ok(Self { u0, u1 })
    }

    pub fn new_unchecked(u0: BlockUnitary<T>, u1: BlockUnitary<T>) -> Self {
        Self { u0, u1 }
    }

    pub fn even(&self) -> &BlockUnitary<T> {
        &self.u0
    }

    pub fn odd(&self) -> &BlockUnitary<T> {
        &self.u1
    }
}

pub fn step_bqca<T: Real>(a: &Bqca<T>, state: &Superposition<T>, parity: u8) -> Result<Superposition<T>> {
    let u = match parity {
        0 => &a.u0,
        1 => &a.u1,
        _ => return Err(QcaError::InvalidParameter(format!("parity {parity}"))),
    };
    apply_block_layer(u, &parity_offset(u.dim(), parity), state)
}

pub fn round_bqca<T: Real>(a: &Bqca<T>, state: &Superposition<T>) -> Result<Superposition<T>> {
    let s = step_bqca(a, state, 0)?;
    step_bqca(a, &s, 1)
}

/// Alphabet of pairs `(a, b)` of track letters, index `a * |tracks| + b`.
pub fn pair_alphabet(tracks: &Alphabet) -> Result<Alphabet> {
    let names: Vec<String> = tracks
        .letters()
        .iter()
        .flat_map(|a| tracks.letters().iter().map(move |b| format!("({a},{b})")))
        .collect();
    let q = tracks.quiescent() as usize;
    Alphabet::new(names, q * tracks.len() + q)
}

/// Multilayer automaton: `k` applied on the `2^n` partitions in turn, then
/// the cellwise exchange of the two tracks.
///
/// The copies of `k` on overlapping blocks are promised to commute; see
/// [`crate::verify::check_commutation`].
#[derive(Debug, Clone, PartialEq)]
pub struct MultilayerQca<T: Real> {
    tracks: Arc<Alphabet>,
    cells: Arc<Alphabet>,
    k: BlockUnitary<T>,
    track_swap: bool,
}

impl<T: Real> MultilayerQca<T> {
    /// `k` must act on the pair alphabet built by [`pair_alphabet`].
    pub fn new(tracks: Arc<Alphabet>, k: BlockUnitary<T>) -> Result<Self> {
        Self::with_track_swap(tracks, k, true)
    }

    pub fn with_track_swap(tracks: Arc<Alphabet>, k: BlockUnitary<T>, track_swap: bool) -> Result<Self> {
        let pairs = pair_alphabet(&tracks)?;
        if *k.alphabet() != pairs {
            return Err(QcaError::AlphabetMismatch(
                "multilayer block operator must act on track pairs".into(),
            ));
        }
        k.validate()?;
        Ok(Self {
            tracks,
            cells: k.alphabet_arc().clone(),
            k,
            track_swap,
        })
    }

    pub fn tracks(&self) -> &Arc<Alphabet> {
        &self.tracks
    }

    pub fn pair_alphabet(&self) -> &Arc<Alphabet> {
        &self.cells
    }

    pub fn block(&self) -> &BlockUnitary<T> {
        &self.k
    }

    pub fn has_track_swap(&self) -> bool {
        self.track_swap
    }

    pub fn dim(&self) -> usize {
        self.k.dim()
    }

    /// Pair letter with its two tracks exchanged.
    pub fn swapped(&self, letter: Letter) -> Letter {
        let l = self.tracks.len() as Letter;
        (letter % l) * l + letter / l
    }
}

/// Exchanges the two tracks of every cell.
pub fn track_swap<T: Real>(m: &MultilayerQca<T>, state: &Superposition<T>) -> Result<Superposition<T>> {
    check_state(m.dim(), &m.cells, state)?;
    let terms: BTreeMap<Configuration, Complex<T>> = state
        .terms()
        .iter()
        .map(|(c, a)| {
            let cells = c.entries().iter().map(|(s, l)| (s.clone(), m.swapped(*l))).collect();
            (Configuration::from_sorted(cells), *a)
        })
        .collect();
    Ok(Superposition::from_map(
        state.dim(),
        state.alphabet_arc().clone(),
        terms,
    ))
}

/// One multilayer step with the layers applied in lexicographic offset
/// order.
pub fn step_multilayer<T: Real>(m: &MultilayerQca<T>, state: &Superposition<T>) -> Result<Superposition<T>> {
    step_multilayer_ordered(m, state, &block_offsets(m.dim()))
}

/// One multilayer step with an explicit layer order.
pub fn step_multilayer_ordered<T: Real>(
    m: &MultilayerQca<T>,
    state: &Superposition<T>,
    order: &[Vec<i64>],
) -> Result<Superposition<T>> {
    check_state(m.dim(), &m.cells, state)?;
    let mut s = state.clone();
    for o in order {
        s = apply_block_layer(&m.k, o, &s)?;
    }
    if m.track_swap {
        s = track_swap(m, &s)?;
    }
    Ok(s)
}

/// Any of the three automaton forms.
#[derive(Debug, Clone, PartialEq)]
pub enum Automaton<T: Real> {
    Pqca(Pqca<T>),
    Bqca(Bqca<T>),
    Multilayer(MultilayerQca<T>),
}

impl<T: Real> Automaton<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            Automaton::Pqca(_) => "pqca",
            Automaton::Bqca(_) => "bqca",
            Automaton::Multilayer(_) => "multilayer",
        }
    }

    pub fn blocks(&self) -> Vec<&BlockUnitary<T>> {
        match self {
            Automaton::Pqca(a) => vec![&a.u],
            Automaton::Bqca(b) => vec![&b.u0, &b.u1],
            Automaton::Multilayer(m) => vec![&m.k],
        }
    }
}

impl<T: Real> Dynamics<T> for Pqca<T> {
    fn dimension(&self) -> usize {
        self.u.dim()
    }

    fn alphabet(&self) -> &Arc<Alphabet> {
        self.u.alphabet_arc()
    }

    fn round(&self, state: &Superposition<T>) -> Result<Superposition<T>> {
        round_pqca(self, state)
    }
}

impl<T: Real> Dynamics<T> for Bqca<T> {
    fn dimension(&self) -> usize {
        self.u0.dim()
    }

    fn alphabet(&self) -> &Arc<Alphabet> {
        self.u0.alphabet_arc()
    }

    fn round(&self, state: &Superposition<T>) -> Result<Superposition<T>> {
        round_bqca(self, state)
    }
}

impl<T: Real> Dynamics<T> for MultilayerQca<T> {
    fn dimension(&self) -> usize {
        self.dim()
    }

    fn alphabet(&self) -> &Arc<Alphabet> {
        &self.cells
    }

    fn round(&self, state: &Superposition<T>) -> Result<Superposition<T>> {
        step_multilayer(self, state)
    }

    fn translation_period(&self) -> i64 {
        1
    }

    fn light_cone(&self) -> (i64, i64) {
        let layers = block_cells(self.dim()) as i64;
        (-layers, layers)
    }
}

impl<T: Real> Dynamics<T> for Automaton<T> {
    fn dimension(&self) -> usize {
        match self {
            Automaton::Pqca(a) => a.dimension(),
            Automaton::Bqca(a) => a.dimension(),
            Automaton::Multilayer(a) => a.dimension(),
        }
    }

    fn alphabet(&self) -> &Arc<Alphabet> {
        match self {
            Automaton::Pqca(a) => Dynamics::alphabet(a),
            Automaton::Bqca(a) => Dynamics::alphabet(a),
            Automaton::Multilayer(a) => Dynamics::alphabet(a),
        }
    }

    fn round(&self, state: &Superposition<T>) -> Result<Superposition<T>> {
        match self {
            Automaton::Pqca(a) => a.round(state),
            Automaton::Bqca(a) => a.round(state),
            Automaton::Multilayer(a) => a.round(state),
        }
    }

    fn translation_period(&self) -> i64 {
        match self {
            Automaton::Multilayer(a) => a.translation_period(),
            _ => 2,
        }
    }

    fn light_cone(&self) -> (i64, i64) {
        match self {
            Automaton::Multilayer(a) => a.light_cone(),
            _ => (-2, 2),
        }
    }
}

/// Sum of squared moduli, used by the norm-preservation tests.
pub fn norm_defect<T: Real>(state: &Superposition<T>) -> T {
    let n = state.norm_sqr();
    if n.is_zero() {
        T::one()
    } else {
        num_traits::Float::abs(num_traits::Float::sqrt(n) - T::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_configuration;
    use crate::scalar::cx;
    use nalgebra::DMatrix;

    fn bits() -> Arc<Alphabet> {
        Arc::new(Alphabet::new(["q", "a"], 0).unwrap())
    }

    fn swap_u() -> BlockUnitary<f64> {
        let mut m = DMatrix::from_element(4, 4, cx(0.0, 0.0));
        for x in 0..2 {
            for y in 0..2 {
                m[(y * 2 + x, x * 2 + y)] = cx(1.0, 0.0);
            }
        }
        BlockUnitary::from_dense(1, bits(), &m).unwrap()
    }

    fn letter_at(x: i64) -> Superposition<f64> {
        let c = make_configuration(1, [(Site::from([x]), 1)], &bits()).unwrap();
        Superposition::basis(1, bits(), c)
    }

    #[test]
    fn identity_layer_is_identity() {
        let id = BlockUnitary::identity(1, bits()).unwrap();
        let psi = letter_at(3);
        assert_eq!(apply_block_layer(&id, &[1], &psi).unwrap(), psi);
    }

    #[test]
    fn quiescent_state_is_fixed() {
        let q = Superposition::<f64>::quiescent(1, bits());
        let a = Pqca::new(swap_u()).unwrap();
        assert_eq!(step_pqca(&a, &q, 0).unwrap(), q);
        assert_eq!(step_pqca(&a, &q, 1).unwrap(), q);
        assert!(step_pqca(&a, &q, 2).is_err());
    }

    #[test]
    fn swap_moves_letter_across_block() {
        let out = apply_block_layer(&swap_u(), &[0], &letter_at(0)).unwrap();
        assert_eq!(out, letter_at(1));
        // one round: 0 -> 1 (block {0,1}) -> 2 (block {1,2})
        let a = Pqca::new(swap_u()).unwrap();
        assert_eq!(round_pqca(&a, &letter_at(0)).unwrap(), letter_at(2));
        // odd sites move the other way
        assert_eq!(round_pqca(&a, &letter_at(1)).unwrap(), letter_at(-1));
    }

    #[test]
    fn bqca_with_equal_layers_is_pqca() {
        let b = Bqca::new(swap_u(), swap_u()).unwrap();
        let a = Pqca::new(swap_u()).unwrap();
        for x in -3..3 {
            assert_eq!(
                round_bqca(&b, &letter_at(x)).unwrap(),
                round_pqca(&a, &letter_at(x)).unwrap()
            );
        }
    }

    #[test]
    fn rejects_mismatched_state() {
        let other = Arc::new(Alphabet::new(["q", "z"], 0).unwrap());
        let psi = Superposition::<f64>::quiescent(1, other);
        assert!(apply_block_layer(&swap_u(), &[0], &psi).is_err());
        let psi2 = Superposition::<f64>::quiescent(2, bits());
        assert!(matches!(
            apply_block_layer(&swap_u(), &[0], &psi2),
            Err(QcaError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pair_alphabet_layout() {
        let g = pair_alphabet(&bits()).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.quiescent(), 0);
        assert_eq!(g.name(1), "(q,a)");
        assert_eq!(g.name(2), "(a,q)");
    }

    #[test]
    fn identity_multilayer_is_track_swap() {
        let g = Arc::new(pair_alphabet(&bits()).unwrap());
        let k = BlockUnitary::identity(1, g.clone()).unwrap();
        let m = MultilayerQca::new(bits(), k).unwrap();
        let c = make_configuration(1, [(Site::from([0]), 1), (Site::from([4]), 3)], &g).unwrap();
        let psi = Superposition::<f64>::basis(1, g.clone(), c);
        let out = step_multilayer(&m, &psi).unwrap();
        let expected = make_configuration(1, [(Site::from([0]), 2), (Site::from([4]), 3)], &g).unwrap();
        assert_eq!(out, Superposition::basis(1, g, expected));
    }
}
