//! Regenerates `crates/cli/fixtures`. Usage: `cargo run -p qca-cli --example make_fixtures [DIR]`.

use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex;
use qca_cli::files::{write_json, AutomatonFile, StateFile};
use qca_core::lattice::make_configuration;
use qca_core::random::{
    controlled_phase_k, random_block_unitary, random_diagonal_block, random_sector_block_unitary, rng,
};
use qca_core::{Alphabet, Automaton64, BlockUnitary64, Bqca, MultilayerQca, Pqca, Site, Superposition64};

type Fallible<T> = Result<T, Box<dyn std::error::Error>>;

/// Cells as `(coordinates, letter)` with one amplitude.
type Term<'a> = (&'a [(&'a [i64], usize)], Complex<f64>);

fn state(n: usize, a: &Arc<Alphabet>, terms: &[Term]) -> Fallible<Superposition64> {
    let terms = terms
        .iter()
        .map(|(cells, z)| {
            let c = make_configuration(n, cells.iter().map(|(s, l)| (Site::from(*s), *l)), a)?;
            Ok((c, *z))
        })
        .collect::<Fallible<Vec<_>>>()?;
    Ok(Superposition64::from_terms_unnormalized(n, a.clone(), terms)?)
}

fn main() -> Fallible<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    std::fs::create_dir_all(&dir)?;
    let two = Arc::new(Alphabet::sized(2)?);
    let mut r = rng(2024);

    let automaton = |name: &str, a: Automaton64| write_json(&dir.join(name), &AutomatonFile::of(&a));

    // Swaps the two cells of a block: a letter hops one block per substep.
    let swap = BlockUnitary64::from_permutation(1, two.clone(), [(1, 2), (2, 1)])?;
    automaton("pqca_swap_1d.json", Automaton64::Pqca(Pqca::new(swap)?))?;
    automaton(
        "pqca_random_1d.json",
        Automaton64::Pqca(Pqca::new(random_block_unitary(1, two.clone(), &mut r)?)?),
    )?;
    automaton(
        "bqca_random_1d.json",
        Automaton64::Bqca(Bqca::new(
            random_block_unitary(1, two.clone(), &mut r)?,
            random_block_unitary(1, two.clone(), &mut r)?,
        )?),
    )?;
    automaton(
        "bqca_sector_2d.json",
        Automaton64::Bqca(Bqca::new(
            random_sector_block_unitary(2, two.clone(), &mut r)?,
            random_sector_block_unitary(2, two.clone(), &mut r)?,
        )?),
    )?;
    automaton(
        "multilayer_cphase_1d.json",
        Automaton64::Multilayer(MultilayerQca::new(two.clone(), controlled_phase_k(1, &two, &mut r)?)?),
    )?;
    let pairs = Arc::new(qca_core::automata::pair_alphabet(&two)?);
    automaton(
        "multilayer_diagonal_2d.json",
        Automaton64::Multilayer(MultilayerQca::new(
            two.clone(),
            random_diagonal_block(2, pairs.clone(), &mut r)?,
        )?),
    )?;
    // Negative control: a generic k whose shifted copies do not commute.
    automaton(
        "multilayer_noncommuting_1d.json",
        Automaton64::Multilayer(MultilayerQca::new(
            two.clone(),
            random_block_unitary(1, pairs.clone(), &mut r)?,
        )?),
    )?;
    automaton(
        "multilayer_identity_3d.json",
        Automaton64::Multilayer(MultilayerQca::new(
            two.clone(),
            BlockUnitary64::identity(3, pairs.clone())?,
        )?),
    )?;

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let states: [(&str, usize, Vec<Term>); 5] = [
        ("state_quiescent_1d.json", 1, vec![(&[], Complex::new(1.0, 0.0))]),
        ("state_a0_1d.json", 1, vec![(&[(&[0], 1)], Complex::new(1.0, 0.0))]),
        (
            "state_pair_1d.json",
            1,
            vec![
                (&[(&[0], 1), (&[1], 1)], Complex::new(s, 0.0)),
                (&[(&[2], 1)], Complex::new(0.0, s)),
            ],
        ),
        (
            "state_pair_2d.json",
            2,
            vec![
                (&[(&[0, 0], 1)], Complex::new(s, 0.0)),
                (&[(&[1, 0], 1), (&[0, 1], 1)], Complex::new(0.0, -s)),
            ],
        ),
        (
            "state_unnormalized_1d.json",
            1,
            vec![(&[(&[0], 1)], Complex::new(1.0, 1.0))],
        ),
    ];
    for (name, n, terms) in states {
        write_json(&dir.join(name), &StateFile::of(&state(n, &two, &terms)?))?;
    }
    // Multilayer states live on the pair alphabet: (a1,q) at 0, (q,a1) at 1.
    let pair_state = state(1, &pairs, &[(&[(&[0], 2), (&[1], 1)], Complex::new(1.0, 0.0))])?;
    write_json(&dir.join("state_tracks_1d.json"), &StateFile::of(&pair_state))?;
    println!("fixtures written to {}", dir.display());
    Ok(())
}
