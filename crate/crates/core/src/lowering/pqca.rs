//! Block automaton to partitioned automaton.
//!
//! Every non-quiescent cell carries an `n`-bit mark equal to the parity of
//! its coordinates. On a block of the even partition the marks read as the
//! intra-block positions `v`; on the odd partition they read as
//! `v xor (1,...,1)`. The single scattering operator applies `U_0` or `U_1`
//! to the payloads accordingly and reattaches the marks, so they never
//! change. Blocks with inconsistent marks are left alone.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::automata::{Automaton, Bqca, Pqca};
use crate::block::{block_cells, cube_offsets, index_word, word_index, BlockUnitary, Column, Word};
use crate::coding::{Decoder, Grouping, IsometricCoding, Tiling};
use crate::error::{QcaError, Result};
use crate::lattice::{Alphabet, Letter, Site, Superposition};
use crate::scalar::{one, Real};

use super::LoweringResult;

/// `Sigma x {0,1}^n`: letter `payload * 2^n + mark`, named `a@01` with the
/// mark bits in axis order.
pub fn marked_alphabet(base: &Alphabet, n: usize) -> Result<Alphabet> {
    let c = block_cells(n);
    let names: Vec<String> = base
        .letters()
        .iter()
        .flat_map(|a| {
            (0..c).map(move |m| {
                let bits: String = (0..n)
                    .map(|k| if (m >> (n - 1 - k)) & 1 == 1 { '1' } else { '0' })
                    .collect();
                format!("{a}@{bits}")
            })
        })
        .collect();
    Alphabet::new(names, base.quiescent() as usize * c)
}

#[inline]
pub fn marked_letter(payload: Letter, mark: u32, n: usize) -> Letter {
    payload * block_cells(n) as Letter + mark
}

#[inline]
pub fn payload_of(letter: Letter, n: usize) -> Letter {
    letter / block_cells(n) as Letter
}

#[inline]
pub fn mark_of(letter: Letter, n: usize) -> u32 {
    letter % block_cells(n) as Letter
}

/// Coordinate parity of a site as a mark.
pub fn parity_mark(site: &Site) -> u32 {
    site.coords()
        .iter()
        .fold(0, |acc, &x| (acc << 1) | x.rem_euclid(2) as u32)
}

/// Whether every non-quiescent cell of every configuration carries its
/// coordinate parity as mark.
pub fn marks_consistent<T: Real>(state: &Superposition<T>) -> bool {
    let n = state.dim();
    state
        .terms()
        .keys()
        .all(|c| c.entries().iter().all(|(s, l)| mark_of(*l, n) == parity_mark(s)))
}

/// Marked word `J_l(w)`: payloads of `w` with the marks a consistent block
/// of layer `l` carries.
fn attach(word: &[Letter], layer: u32, n: usize, q: Letter, qm: Letter) -> Word {
    let flip = if layer == 0 { 0 } else { block_cells(n) as u32 - 1 };
    word.iter()
        .enumerate()
        .map(|(p, &l)| {
            if l == q {
                qm
            } else {
                marked_letter(l, p as u32 ^ flip, n)
            }
        })
        .collect()
}

/// The scattering operator `J_0 U_0 J_0^dagger + J_1 U_1 J_1^dagger +
/// identity` on marked blocks.
pub fn marked_scattering<T: Real>(b: &Bqca<T>, marked: Arc<Alphabet>) -> Result<BlockUnitary<T>> {
    let n = b.even().dim();
    let base = b.even().alphabet();
    let cells = block_cells(n);
    let q = base.quiescent();
    let qm = marked.quiescent();
    let lb = base.len();
    let lm = marked.len();
    let mut cols: BTreeMap<u64, Column<T>> = BTreeMap::new();
    for (layer, u) in [(0u32, b.even()), (1u32, b.odd())] {
        for (idx, col) in u.overrides() {
            let w = index_word(*idx, lb, cells);
            let from = word_index(&attach(&w, layer, n, q, qm), lm);
            let image = col
                .iter()
                .map(|(r, z)| {
                    let rw = index_word(*r, lb, cells);
                    (word_index(&attach(&rw, layer, n, q, qm), lm), *z)
                })
                .collect();
            cols.insert(from, image);
        }
    }
    BlockUnitary::from_columns_unchecked(n, marked, cols)
}

/// Source supercell word to target word with the marks its cells carry
/// under `tiling`.
pub fn mark_word(word: &[Letter], n: usize, tiling: Tiling, q: Letter, qm: Letter) -> Word {
    let offsets = cube_offsets(n, tiling.side);
    word.iter()
        .zip(&offsets)
        .map(|(&l, v)| {
            if l == q {
                qm
            } else {
                let mark = v
                    .iter()
                    .fold(0u32, |acc, &d| (acc << 1) | (tiling.origin + d).rem_euclid(2) as u32);
                marked_letter(l, mark, n)
            }
        })
        .collect()
}

/// Lowers a block automaton to a partitioned one over the marked
/// alphabet; source and target are both grouped by `2^n` supercells and
/// one round simulates one round.
pub fn lower_bqca_to_pqca<T: Real>(b: &Bqca<T>) -> Result<LoweringResult<T>> {
    lower_bqca_to_pqca_tiled(b, Tiling::new(2, 0)?)
}

/// As [`lower_bqca_to_pqca`] with both sides tiled by `tiling`.
pub fn lower_bqca_to_pqca_tiled<T: Real>(b: &Bqca<T>, tiling: Tiling) -> Result<LoweringResult<T>> {
    let n = b.even().dim();
    if n == 0 {
        return Err(QcaError::UnsupportedDimension { n });
    }
    let base = b.even().alphabet_arc().clone();
    let marked = Arc::new(marked_alphabet(&base, n)?);
    let u = marked_scattering(b, marked.clone())?;
    let target = Pqca::new(u)?;

    let cells = tiling.cells(n);
    let q = base.quiescent();
    let qm = marked.quiescent();
    let words = crate::block::word_space(base.len(), cells).ok_or(QcaError::CapExceeded {
        dim: u128::MAX,
        cap: crate::coding::MAX_CODING_WORDS as usize,
    })?;
    if words > crate::coding::MAX_CODING_WORDS {
        return Err(QcaError::CapExceeded {
            dim: words as u128,
            cap: crate::coding::MAX_CODING_WORDS as usize,
        });
    }
    let table = (1..words)
        .map(|i| index_word(i, base.len(), cells))
        .filter(|w| w.iter().any(|&l| l != q))
        .map(|w| {
            let m = mark_word(&w, n, tiling, q, qm);
            (w, vec![(m, one())])
        })
        .collect();
    let coding = IsometricCoding::new(n, base, tiling, marked, tiling, table, Decoder::Inverter)?;
    let g = Grouping::new(tiling.side, tiling.origin, 1)?;
    Ok(LoweringResult {
        target: Automaton::Pqca(target),
        coding,
        source_grouping: g,
        target_grouping: g,
        step_ratio: 1,
    })
}
