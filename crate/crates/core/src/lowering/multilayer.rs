//! Multilayer automaton to block automaton, for `n` in `{1, 2}`.
//!
//! Simulated cell `Y` occupies the `2^n` target cells `2Y + 1 + w`,
//! `w in {0,1}^n`. Exactly one of them holds a record carrying the cell's
//! pair letter, a rotation direction and a counter; the others are blank.
//! A simulated cell holding the quiescent pair is all blank.
//!
//! * The even-partition operator straddles simulated cells: when the
//!   records of `2^n` neighbouring cells meet in one block, it applies `k`
//!   to their payloads.
//! * The odd-partition operator acts within one simulated cell: it moves
//!   the record to the next corner in its rotation direction and advances
//!   the counter, exchanging the two tracks of the payload on the last
//!   layer.
//!
//! Records start on the corner `w = 1 xor (Y mod 2)`, turning clockwise
//! when the coordinate sum of `Y` is even. After `2^n` rounds every layer of
//! `k` has been applied once, in Gray order, followed by the track swap, and
//! each record is back on its starting corner.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::automata::{Automaton, Bqca, MultilayerQca};
use crate::block::{block_cells, block_offsets, cube_offsets, index_word, word_index, BlockUnitary, Column, Word};
use crate::coding::{Decoder, Grouping, IsometricCoding, Tiling};
use crate::error::{QcaError, Result};
use crate::lattice::{Alphabet, Letter};
use crate::scalar::{one, Real};

use super::LoweringResult;

/// Rotation direction of a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rotation {
    Cw = 0,
    Ccw = 1,
}

/// Decoded letter of the record alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimCellRecord {
    Blank,
    Data { payload: Letter, rot: Rotation, clk: u32 },
}

/// Layout of the record alphabet: index 0 is the blank (quiescent) letter,
/// record `(payload, rot, clk)` has index `1 + ((p * 2 + rot) * 2^n + clk)`
/// where `p` ranks `payload` among the non-quiescent pair letters.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordLayout {
    n: usize,
    pairs: Arc<Alphabet>,
    records: Arc<Alphabet>,
}

impl RecordLayout {
    pub fn new(n: usize, pairs: Arc<Alphabet>) -> Result<Self> {
        let c = block_cells(n);
        let qp = pairs.quiescent();
        let mut names = vec!["_".to_string()];
        for p in (0..pairs.len() as Letter).filter(|&p| p != qp) {
            for rot in ["cw", "ccw"] {
                for clk in 0..c {
                    names.push(format!("{}/{rot}/{clk}", pairs.name(p)));
                }
            }
        }
        let records = Arc::new(Alphabet::new(names, 0)?);
        Ok(Self { n, pairs, records })
    }

    pub fn records(&self) -> &Arc<Alphabet> {
        &self.records
    }

    pub fn pairs(&self) -> &Arc<Alphabet> {
        &self.pairs
    }

    fn clocks(&self) -> u32 {
        block_cells(self.n) as u32
    }

    pub fn encode(&self, r: SimCellRecord) -> Letter {
        match r {
            SimCellRecord::Blank => 0,
            SimCellRecord::Data { payload, rot, clk } => {
                let qp = self.pairs.quiescent();
                debug_assert!(payload != qp && clk < self.clocks());
                let p = if payload < qp { payload } else { payload - 1 };
                1 + ((p * 2 + rot as u32) * self.clocks() + clk)
            }
        }
    }

    pub fn decode(&self, l: Letter) -> SimCellRecord {
        if l == 0 {
            return SimCellRecord::Blank;
        }
        let c = self.clocks();
        let i = l - 1;
        let clk = i % c;
        let rot = if (i / c).is_multiple_of(2) {
            Rotation::Cw
        } else {
            Rotation::Ccw
        };
        let p = i / c / 2;
        let qp = self.pairs.quiescent();
        let payload = if p < qp { p } else { p + 1 };
        SimCellRecord::Data { payload, rot, clk }
    }
}

/// Next corner (as a block position) in the given direction. Clockwise
/// visits `(0,0), (0,1), (1,1), (1,0)`; in one dimension both directions
/// flip the corner.
pub fn next_corner(n: usize, corner: usize, rot: Rotation) -> usize {
    match n {
        1 => corner ^ 1,
        _ => {
            const CW: [usize; 4] = [1, 3, 0, 2];
            const CCW: [usize; 4] = [2, 0, 3, 1];
            match rot {
                Rotation::Cw => CW[corner],
                Rotation::Ccw => CCW[corner],
            }
        }
    }
}

fn check_dimension(n: usize) -> Result<()> {
    if n == 1 || n == 2 {
        Ok(())
    } else {
        Err(QcaError::UnsupportedDimension { n })
    }
}

/// Even-partition operator: `k` on the payloads of every consistent block.
///
/// Position `u` of the block holds the corner `1 xor u` of the simulated
/// cell `Y0 + u`. A block is consistent when all its records share a
/// counter `c` and their directions read `P xor |u|` for one `P`; then it
/// is `J K J^dagger` with `J` attaching exactly these fields. Blank
/// positions read as the quiescent pair.
pub fn block_op_k<T: Real>(m: &MultilayerQca<T>) -> Result<BlockUnitary<T>> {
    let n = m.dim();
    check_dimension(n)?;
    let layout = RecordLayout::new(n, m.pair_alphabet().clone())?;
    let k = m.block();
    let cells = block_cells(n);
    let lp = layout.pairs.len();
    let lr = layout.records.len();
    let qp = layout.pairs.quiescent();
    let weight: Vec<u32> = block_offsets(n)
        .iter()
        .map(|u| (u.iter().sum::<i64>() % 2) as u32)
        .collect();
    let attach = |w: &[Letter], big_p: u32, clk: u32| -> Word {
        w.iter()
            .enumerate()
            .map(|(p, &l)| {
                if l == qp {
                    0
                } else {
                    let rot = if big_p ^ weight[p] == 0 {
                        Rotation::Cw
                    } else {
                        Rotation::Ccw
                    };
                    layout.encode(SimCellRecord::Data { payload: l, rot, clk })
                }
            })
            .collect()
    };
    let q_word = k.quiescent_index();
    let mut cols: BTreeMap<u64, Column<T>> = BTreeMap::new();
    for big_p in 0..2u32 {
        for clk in 0..layout.clocks() {
            for (idx, col) in k.overrides() {
                let w = index_word(*idx, lp, cells);
                let from = word_index(&attach(&w, big_p, clk), lr);
                let image = col
                    .iter()
                    .filter(|(r, _)| *r != q_word)
                    .map(|(r, z)| (word_index(&attach(&index_word(*r, lp, cells), big_p, clk), lr), *z))
                    .collect();
                cols.insert(from, image);
            }
        }
    }
    BlockUnitary::from_columns(n, layout.records.clone(), cols)
}

/// Single-record words of the odd partition: `(position, record)` pairs.
fn single_records(layout: &RecordLayout, cells: usize) -> impl Iterator<Item = (usize, SimCellRecord)> + '_ {
    (0..cells).flat_map(move |p| (1..layout.records.len() as Letter).map(move |l| (p, layout.decode(l))))
}

fn single_word(layout: &RecordLayout, cells: usize, pos: usize, r: SimCellRecord) -> u64 {
    let mut w = Word::from_elem(0, cells);
    w[pos] = layout.encode(r);
    word_index(&w, layout.records.len())
}

/// Moves a lone record to the next corner in its direction and advances
/// its counter modulo `2^n`; identity on every other block.
pub fn block_op_rotate<T: Real>(m: &MultilayerQca<T>) -> Result<BlockUnitary<T>> {
    let n = m.dim();
    check_dimension(n)?;
    let layout = RecordLayout::new(n, m.pair_alphabet().clone())?;
    let cells = block_cells(n);
    let c = layout.clocks();
    let map: Vec<(u64, u64)> = single_records(&layout, cells)
        .map(|(pos, r)| {
            let SimCellRecord::Data { payload, rot, clk } = r else {
                unreachable!()
            };
            let to = SimCellRecord::Data {
                payload,
                rot,
                clk: (clk + 1) % c,
            };
            (
                single_word(&layout, cells, pos, r),
                single_word(&layout, cells, next_corner(n, pos, rot), to),
            )
        })
        .collect();
    BlockUnitary::from_permutation(n, layout.records.clone(), map)
}

/// Exchanges the payload tracks of a lone record whose counter is
/// `2^n - 1`; identity on every other block (and everywhere if the
/// automaton has no track swap).
pub fn block_op_cswap<T: Real>(m: &MultilayerQca<T>) -> Result<BlockUnitary<T>> {
    let n = m.dim();
    check_dimension(n)?;
    let layout = RecordLayout::new(n, m.pair_alphabet().clone())?;
    let cells = block_cells(n);
    let last = layout.clocks() - 1;
    let map: Vec<(u64, u64)> = if m.has_track_swap() {
        single_records(&layout, cells)
            .filter_map(|(pos, r)| {
                let SimCellRecord::Data { payload, rot, clk } = r else {
                    unreachable!()
                };
                let swapped = m.swapped(payload);
                (clk == last && swapped != payload).then(|| {
                    let to = SimCellRecord::Data {
                        payload: swapped,
                        rot,
                        clk,
                    };
                    (
                        single_word(&layout, cells, pos, r),
                        single_word(&layout, cells, pos, to),
                    )
                })
            })
            .collect()
    } else {
        Vec::new()
    };
    BlockUnitary::from_permutation(n, layout.records.clone(), map)
}

/// Tiling of the source lattice: pairs of simulated cells per axis.
pub fn source_tiling() -> Tiling {
    Tiling { side: 2, origin: 0 }
}

/// Tiling of the target lattice matching [`source_tiling`].
pub fn target_tiling() -> Tiling {
    Tiling { side: 4, origin: 1 }
}

/// Encoding of a `2^n`-cell source supercell: the cell at offset `v`
/// becomes a record on corner `1 xor v` of its simulated cell, clockwise
/// iff `|v|` is even, counter 0.
pub fn record_coding<T: Real>(layout: &RecordLayout, n: usize) -> Result<IsometricCoding<T>> {
    let src = source_tiling();
    let dst = target_tiling();
    let src_offsets = cube_offsets(n, src.side);
    let dst_cells = dst.cells(n);
    let lp = layout.pairs.len();
    let qp = layout.pairs.quiescent();
    let words = (lp as u64).pow(src.cells(n) as u32);
    let table = (0..words)
        .map(|i| index_word(i, lp, src.cells(n)))
        .filter(|w| w.iter().any(|&l| l != qp))
        .map(|w| {
            let mut g = Word::from_elem(0, dst_cells);
            for (v, &l) in src_offsets.iter().zip(&w) {
                if l == qp {
                    continue;
                }
                let rot = if v.iter().sum::<i64>() % 2 == 0 {
                    Rotation::Cw
                } else {
                    Rotation::Ccw
                };
                let pos = v
                    .iter()
                    .fold(0usize, |acc, &d| acc * dst.side + (2 * d + (1 - d)) as usize);
                g[pos] = layout.encode(SimCellRecord::Data {
                    payload: l,
                    rot,
                    clk: 0,
                });
            }
            (w, vec![(g, one())])
        })
        .collect();
    IsometricCoding::new(
        n,
        layout.pairs.clone(),
        src,
        layout.records.clone(),
        dst,
        table,
        Decoder::Inverter,
    )
}

/// Lowers a multilayer automaton (`n` in `{1, 2}`) to a block automaton
/// over the record alphabet; `2^n` target rounds simulate one step.
pub fn lower_multilayer_to_bqca<T: Real>(m: &MultilayerQca<T>) -> Result<LoweringResult<T>> {
    let n = m.dim();
    check_dimension(n)?;
    let layout = RecordLayout::new(n, m.pair_alphabet().clone())?;
    let u0 = block_op_k(m)?;
    let u1 = block_op_rotate(m)?.compose(&block_op_cswap(m)?)?;
    let target = Bqca::new(u0, u1)?;
    let coding = record_coding(&layout, n)?;
    let steps = block_cells(n);
    Ok(LoweringResult {
        target: Automaton::Bqca(target),
        coding,
        source_grouping: Grouping::new(source_tiling().side, source_tiling().origin, 1)?,
        target_grouping: Grouping::new(target_tiling().side, target_tiling().origin, steps)?,
        step_ratio: steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::pair_alphabet;
    use crate::random::{controlled_phase_k, rng};

    fn ml(n: usize, seed: u64) -> MultilayerQca<f64> {
        let tracks = Arc::new(Alphabet::sized(2).unwrap());
        let k = controlled_phase_k(n, &tracks, &mut rng(seed)).unwrap();
        MultilayerQca::new(tracks, k).unwrap()
    }

    #[test]
    fn record_layout_round_trips() {
        let pairs = Arc::new(pair_alphabet(&Alphabet::sized(2).unwrap()).unwrap());
        for n in [1, 2] {
            let layout = RecordLayout::new(n, pairs.clone()).unwrap();
            assert_eq!(layout.records().len(), 1 + 3 * 2 * block_cells(n));
            for l in 0..layout.records().len() as Letter {
                assert_eq!(layout.encode(layout.decode(l)), l);
            }
        }
    }

    #[test]
    fn corners_cycle() {
        for rot in [Rotation::Cw, Rotation::Ccw] {
            let mut c = 0;
            for _ in 0..4 {
                c = next_corner(2, c, rot);
            }
            assert_eq!(c, 0);
            assert_eq!(next_corner(2, next_corner(2, 3, Rotation::Cw), Rotation::Ccw), 3);
        }
        assert_eq!(next_corner(2, 0, Rotation::Cw), 1);
    }

    #[test]
    fn block_ops_are_well_formed() {
        for n in [1, 2] {
            let m = ml(n, 7);
            for u in [
                block_op_k(&m).unwrap(),
                block_op_rotate(&m).unwrap(),
                block_op_cswap(&m).unwrap(),
            ] {
                let d = u.defects();
                assert!(d.unitarity <= 1e-10, "{d:?}");
                assert!(d.quiescence <= 1e-12);
            }
        }
    }

    #[test]
    fn rotate_orbit_has_length_two_to_the_n() {
        for n in [1, 2] {
            let m = ml(n, 1);
            let layout = RecordLayout::new(n, m.pair_alphabet().clone()).unwrap();
            let rot = block_op_rotate(&m).unwrap();
            let cells = block_cells(n);
            let r = SimCellRecord::Data {
                payload: 1,
                rot: Rotation::Ccw,
                clk: 0,
            };
            let start = single_word(&layout, cells, 0, r);
            let mut idx = start;
            for step in 1..=cells {
                let col = rot.column(idx);
                assert_eq!(col.len(), 1);
                idx = col[0].0;
                assert_eq!(idx == start, step == cells);
            }
        }
    }

    #[test]
    fn cswap_is_identity_before_last_layer() {
        let m = ml(2, 3);
        let layout = RecordLayout::new(2, m.pair_alphabet().clone()).unwrap();
        let cs = block_op_cswap(&m).unwrap();
        for clk in 0..3 {
            let r = SimCellRecord::Data {
                payload: 1,
                rot: Rotation::Cw,
                clk,
            };
            let w = single_word(&layout, 4, 2, r);
            assert_eq!(cs.column(w).as_ref(), &[(w, one::<f64>())]);
        }
        let r = SimCellRecord::Data {
            payload: 1,
            rot: Rotation::Cw,
            clk: 3,
        };
        let w = single_word(&layout, 4, 2, r);
        assert_ne!(cs.column(w)[0].0, w);
    }

    #[test]
    fn higher_dimensions_are_rejected() {
        let tracks = Arc::new(Alphabet::sized(2).unwrap());
        let pairs = Arc::new(pair_alphabet(&tracks).unwrap());
        let k = BlockUnitary::<f64>::identity(3, pairs).unwrap();
        let m = MultilayerQca::new(tracks, k).unwrap();
        assert_eq!(
            lower_multilayer_to_bqca(&m).unwrap_err(),
            QcaError::UnsupportedDimension { n: 3 }
        );
    }
}
