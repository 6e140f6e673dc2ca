use std::sync::Arc;

use qca_core::automata::{Bqca, Dynamics, Pqca};
use qca_core::block::BlockUnitary;
use qca_core::coding::group;
use qca_core::coding::{Decoder, IsometricCoding};
use qca_core::lattice::{Alphabet, Region, Site};
use qca_core::random::{controlled_phase_k, corpus, random_block_unitary, random_diagonal_block, rng};
use qca_core::verify::{
    check_causality, check_commutation, check_direct_simulation, check_shift_invariance, check_unitarity,
    PositionDependent, SampleSpec, SimulationConfig,
};
use qca_core::Automaton;

fn bits() -> Arc<Alphabet> {
    Arc::new(Alphabet::sized(2).unwrap())
}

fn window(n: usize) -> Region {
    Region::cube(n, 0, if n == 1 { 4 } else { 2 }).unwrap()
}

/// Scales one non-quiescent column by 1.01 without validation.
fn scaled(u: &BlockUnitary<f64>) -> BlockUnitary<f64> {
    let mut cols = u.overrides().clone();
    let (_, col) = cols.iter_mut().next().unwrap();
    for (_, z) in col.iter_mut() {
        *z *= 1.01;
    }
    BlockUnitary::from_columns_unchecked(u.dim(), u.alphabet_arc().clone(), cols).unwrap()
}

// The full corpus at full sample counts runs in the acceptance target;
// this covers the entries that evolve cheaply.
#[test]
fn axioms_hold_on_the_corpus() {
    for entry in corpus::<f64>(21).unwrap() {
        let a = &entry.automaton;
        let n = a.dimension();
        if !(entry.occupation_preserving || (n == 1 && a.alphabet().len() == 2)) {
            continue;
        }
        let u = check_unitarity(a, &window(n), 1).unwrap();
        assert!(u.passed && u.worst_deviation <= 1e-9, "{}: {u:?}", entry.name);
        let s = check_shift_invariance(a, &SampleSpec::small(n), 5, 3).unwrap();
        assert!(s.passed, "{}: {s:?}", entry.name);
        if n == 1 || entry.occupation_preserving {
            let c = check_causality(a, None, None, 5, 4).unwrap();
            assert!(c.passed, "{}: {c:?}", entry.name);
        }
    }
}

#[test]
fn identity_automaton_has_zero_deviation() {
    let a = Pqca::new(BlockUnitary::<f64>::identity(1, bits()).unwrap()).unwrap();
    let rep = check_unitarity(&a, &window(1), 1).unwrap();
    assert_eq!(rep.worst_deviation, 0.0);
}

#[test]
fn scaled_column_fails_unitarity() {
    let u = random_block_unitary::<f64>(1, bits(), &mut rng(1)).unwrap();
    let a = Pqca::new_unchecked(scaled(&u));
    let rep = check_unitarity(&a, &window(1), 1).unwrap();
    assert!(!rep.passed);
    assert!(rep.worst_deviation > 1e-3);
}

#[test]
fn position_dependent_dynamics_fail_shift_invariance() {
    let mut r = rng(2);
    let base = Pqca::new(random_block_unitary::<f64>(1, bits(), &mut r).unwrap()).unwrap();
    let other = random_block_unitary::<f64>(1, bits(), &mut r).unwrap();
    let a = PositionDependent {
        base,
        other,
        site: Site::new([0]),
    };
    let rep = check_shift_invariance(&a, &SampleSpec::small(1), 20, 3).unwrap();
    assert!(!rep.passed, "{rep:?}");
}

#[test]
fn quiescent_samples_do_not_move() {
    let a = Pqca::new(random_block_unitary::<f64>(2, bits(), &mut rng(3)).unwrap()).unwrap();
    let q = qca_core::Superposition::quiescent(2, bits());
    assert!(a.round(&q).unwrap().is_quiescent());
}

#[test]
fn undersized_neighbourhood_fails_causality() {
    let a = Pqca::new(random_block_unitary::<f64>(1, bits(), &mut rng(4)).unwrap()).unwrap();
    let g = group(Automaton::Pqca(a), 2, 1).unwrap();
    let rep = check_causality(&g, None, Some((0, 0)), 20, 5).unwrap();
    assert!(!rep.passed, "{rep:?}");
    let rep = check_causality(&g, None, None, 20, 5).unwrap();
    assert!(rep.passed, "{rep:?}");
}

#[test]
fn identity_automaton_has_no_causal_deviation() {
    // Outside states reach nothing; only summation order differs.
    let a = Pqca::new(BlockUnitary::<f64>::identity(2, bits()).unwrap()).unwrap();
    let rep = check_causality(&a, None, None, 5, 6).unwrap();
    assert!(rep.worst_deviation <= 1e-15, "{rep:?}");
}

#[test]
fn commutation_controls() {
    for n in [1, 2] {
        let d = random_diagonal_block::<f64>(n, bits(), &mut rng(7)).unwrap();
        assert!(check_commutation(&d, 4096, 1).unwrap().passed);
        let id = BlockUnitary::<f64>::identity(n, bits()).unwrap();
        assert_eq!(check_commutation(&id, 4096, 1).unwrap().worst_deviation, 0.0);
        let pairs = Arc::new(qca_core::automata::pair_alphabet(&bits()).unwrap());
        let k = controlled_phase_k::<f64>(n, &bits(), &mut rng(8)).unwrap();
        assert_eq!(k.alphabet(), &*pairs);
        assert!(check_commutation(&k, 4096, 1).unwrap().passed);
        let g = random_block_unitary::<f64>(n, bits(), &mut rng(9)).unwrap();
        assert!(!check_commutation(&g, 4096, 1).unwrap().passed);
    }
}

#[test]
fn commutation_samples_large_boxes() {
    let k = controlled_phase_k::<f64>(2, &bits(), &mut rng(10)).unwrap();
    let rep = check_commutation(&k, 64, 2).unwrap();
    assert!(rep.passed);
    assert!(!rep.parameters.notes.is_empty());
}

#[test]
fn self_simulation_under_identity_coding() {
    let mut r = rng(11);
    let b = Bqca::new(
        random_block_unitary::<f64>(1, bits(), &mut r).unwrap(),
        random_block_unitary::<f64>(1, bits(), &mut r).unwrap(),
    )
    .unwrap();
    let coding = IsometricCoding::identity(1, bits(), Decoder::Inverter).unwrap();
    let cfg = SimulationConfig {
        steps: 2,
        samples: 4,
        seed: 3,
        inputs: SampleSpec::small(1),
    };
    let rep = check_direct_simulation(&b, &b, &coding, &cfg).unwrap();
    assert!(rep.passed);
    assert!(rep.fidelity.iter().all(|f| (f - 1.0).abs() < 1e-12));
    assert!(rep.largest_schmidt.iter().all(|s| (s - 1.0).abs() < 1e-12));
    assert!(rep.garbage_independent);
}

#[test]
fn reports_are_reproducible() {
    let a = corpus::<f64>(22).unwrap().remove(0).automaton;
    let x = check_causality(&a, None, None, 10, 9).unwrap();
    let y = check_causality(&a, None, None, 10, 9).unwrap();
    assert_eq!(serde_json::to_string(&x).unwrap(), serde_json::to_string(&y).unwrap());
}
