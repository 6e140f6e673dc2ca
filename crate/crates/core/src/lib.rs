//! Simulation, lowering and verification of quantum cellular automata.
//!
//! States are sparse superpositions of finite configurations over `Z^n`
//! ([`lattice`]). Partitioned, block and multilayer automata evolve them
//! exactly ([`automata`]); a dense statevector engine on finite windows
//! serves as an independent oracle ([`dense`]). Isometric codings and
//! groupings ([`coding`]) relate two automata, the [`lowering`] passes turn
//! multilayer automata into block automata and block automata into
//! partitioned ones, and [`verify`] checks the axioms and the simulation
//! relations by brute force.
//!
//! Everything is generic over the real scalar type; the `*64` aliases below
//! fix it to `f64`.

pub mod automata;
pub mod block;
pub mod coding;
pub mod dense;
pub mod error;
pub mod lattice;
pub mod lowering;
pub mod random;
pub mod scalar;
pub mod verify;

pub use automata::{Automaton, Bqca, Dynamics, MultilayerQca, Pqca};
pub use block::BlockUnitary;
pub use error::{QcaError, Result};
pub use lattice::{Alphabet, Configuration, Letter, Region, Site, Superposition};
pub use scalar::Real;

pub type Superposition64 = Superposition<f64>;
pub type Superposition32 = Superposition<f32>;
pub type BlockUnitary64 = BlockUnitary<f64>;
pub type Automaton64 = Automaton<f64>;
pub type Pqca64 = Pqca<f64>;
pub type Bqca64 = Bqca<f64>;
pub type MultilayerQca64 = MultilayerQca<f64>;
pub type IsometricCoding64 = coding::IsometricCoding<f64>;
pub type LoweringResult64 = lowering::LoweringResult<f64>;
