use qca_core::automata::Dynamics;
use qca_core::dense::{dense_global_matrix, DenseSpace};
use qca_core::lattice::Region;
use qca_core::random::corpus;
use qca_core::verify::check_oracle_equivalence;
use qca_core::{Automaton, Superposition};

/// Dense-box cap for two-dimensional windows: a 2x2 window with margin 1
/// spans sixteen cells.
const CAP_2D: usize = 1 << 16;

fn windows(n: usize) -> Vec<(Region, i64)> {
    if n == 1 {
        vec![
            (Region::cube(1, 0, 2).unwrap(), 1),
            (Region::cube(1, 0, 4).unwrap(), 1),
            (Region::cube(1, -2, 4).unwrap(), 1),
            (Region::cube(1, 1, 2).unwrap(), 2),
        ]
    } else {
        vec![(Region::cube(2, 0, 2).unwrap(), 1)]
    }
}

fn admissible(a: &Automaton<f64>, window: &Region, margin: i64, cap: usize) -> bool {
    let cells = window.expanded(margin).cell_count() as u32;
    (a.alphabet().len() as u128).pow(cells) <= cap as u128
}

#[test]
fn sparse_round_matches_dense_matrix_on_the_corpus() {
    let mut checked = 0;
    for entry in corpus::<f64>(11).unwrap() {
        let n = entry.automaton.dimension();
        let cap = if n == 1 { 4096 } else { CAP_2D };
        for (w, m) in windows(n) {
            if !admissible(&entry.automaton, &w, m, cap) {
                continue;
            }
            let rep = check_oracle_equivalence(&entry.automaton, &w, m, cap).unwrap();
            assert!(rep.passed, "{} on {w:?}: {rep:?}", entry.name);
            checked += 1;
        }
    }
    assert!(checked >= 12, "only {checked} windows checked");
}

#[test]
fn dense_matrix_columns_are_orthonormal() {
    for entry in corpus::<f64>(12).unwrap() {
        if entry.automaton.dimension() != 1 {
            continue;
        }
        let w = Region::cube(1, 0, 4).unwrap();
        let m = dense_global_matrix(&entry.automaton, &w, 1).unwrap();
        assert!(qca_core::verify::unitarity_deviation(&m) < 1e-10, "{}", entry.name);
    }
}

#[test]
fn dense_action_on_superpositions_is_linear() {
    let entry = corpus::<f64>(13).unwrap().remove(1);
    let w = Region::cube(1, 0, 4).unwrap();
    let m = dense_global_matrix(&entry.automaton, &w, 1).unwrap();
    let alphabet = entry.automaton.alphabet().clone();
    let inner = DenseSpace::new(w.clone(), &alphabet, 4096).unwrap();
    let outer = DenseSpace::new(w.expanded(1), &alphabet, 4096).unwrap();
    let mut r = qca_core::random::rng(5);
    let sampler = qca_core::random::StateSampler::new(w.clone(), 3);
    for i in 0..6 {
        let psi: Superposition<f64> = sampler.sample(&alphabet, i, &mut r).unwrap();
        let dense = &m * inner.to_vector(&psi).unwrap();
        let sparse = outer.to_vector(&entry.automaton.round(&psi).unwrap()).unwrap();
        assert!((dense - sparse).norm() < 1e-10);
    }
}
