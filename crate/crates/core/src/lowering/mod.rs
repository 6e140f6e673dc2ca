//! Lowering passes between automaton forms.
//!
//! Each pass returns the target automaton together with the coding and
//! groupings under which the target directly simulates the source:
//! `step_ratio` target rounds per source step, with the spatial grouping
//! carried by the tilings of the coding.

mod multilayer;
mod pqca;

use crate::automata::{Automaton, MultilayerQca};
use crate::coding::{Decoder, Grouping, IsometricCoding};
use crate::error::{QcaError, Result};
use crate::scalar::Real;

pub use multilayer::{
    block_op_cswap, block_op_k, block_op_rotate, lower_multilayer_to_bqca, next_corner, record_coding, source_tiling,
    target_tiling, RecordLayout, Rotation, SimCellRecord,
};
pub use pqca::{
    lower_bqca_to_pqca, lower_bqca_to_pqca_tiled, mark_of, mark_word, marked_alphabet, marked_letter,
    marked_scattering, marks_consistent, parity_mark, payload_of,
};

/// Output of a lowering pass.
#[derive(Debug, Clone)]
pub struct LoweringResult<T: Real> {
    pub target: Automaton<T>,
    /// Supercell coding from the source alphabet to the target alphabet.
    pub coding: IsometricCoding<T>,
    pub source_grouping: Grouping,
    pub target_grouping: Grouping,
    /// Target rounds per source step.
    pub step_ratio: usize,
}

/// Multilayer to block to partitioned: the record pass followed by the
/// mark pass on the record tiling. Marks are attached directly to the
/// record encoding, so the composed coding never enumerates target
/// supercells.
pub fn lower_multilayer_to_pqca<T: Real>(m: &MultilayerQca<T>) -> Result<LoweringResult<T>> {
    let first = lower_multilayer_to_bqca(m)?;
    let Automaton::Bqca(b) = &first.target else {
        return Err(QcaError::InvalidParameter(
            "record pass did not produce a block automaton".into(),
        ));
    };
    let n = m.dim();
    let tiling = first.coding.tiling_g();
    let records = first.coding.alphabet_g().clone();
    let marked = std::sync::Arc::new(marked_alphabet(&records, n)?);
    let target = crate::automata::Pqca::new(marked_scattering(b, marked.clone())?)?;
    let (q, qm) = (records.quiescent(), marked.quiescent());
    let table = first
        .coding
        .table()
        .iter()
        .map(|(a, col)| {
            let col = col.iter().map(|(w, z)| (mark_word(w, n, tiling, q, qm), *z)).collect();
            (a.clone(), col)
        })
        .collect();
    let coding = IsometricCoding::new(
        n,
        first.coding.alphabet_h().clone(),
        first.coding.tiling_h(),
        marked,
        tiling,
        table,
        Decoder::Inverter,
    )?;
    Ok(LoweringResult {
        target: Automaton::Pqca(target),
        coding,
        source_grouping: first.source_grouping,
        target_grouping: first.target_grouping,
        step_ratio: first.step_ratio,
    })
}
