//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Built with `harness = false` so the lines always show.

use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use qca_core::automata::{pair_alphabet, Dynamics};
use qca_core::block::{block_cells, index_word};
use qca_core::coding::encode;
use qca_core::lattice::{Alphabet, Region, Site};
use qca_core::lowering::{
    lower_bqca_to_pqca, lower_multilayer_to_bqca, lower_multilayer_to_pqca, mark_of, marks_consistent,
};
use qca_core::random::{
    conjugated_phase_k, controlled_phase_k, corpus, random_block_unitary, random_diagonal_block,
    random_sector_block_unitary, rng, QcaRng, StateSampler,
};
use qca_core::verify::{
    check_causality, check_intrinsic_simulation, check_intrinsic_simulation_at_ratio, check_oracle_equivalence,
    check_shift_invariance, check_unitarity, PositionDependent, SampleSpec, SimulationConfig, SimulationReport,
};
use qca_core::{Automaton64, BlockUnitary64, Bqca, LoweringResult64, MultilayerQca, Pqca};

type Fallible<T> = Result<T, Box<dyn Error>>;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Fallible<Verdict> {
    Ok(Verdict { passed, detail })
}

fn bits() -> Arc<Alphabet> {
    Arc::new(Alphabet::sized(2).expect("two letters"))
}

fn line(lo: i64, hi: i64) -> Region {
    Region::new(vec![lo], vec![hi]).expect("non-empty")
}

fn square(side: i64) -> Region {
    Region::cube(2, 0, side).expect("non-empty")
}

fn config(steps: usize, samples: usize, seed: u64, region: Region, max_active: usize) -> SimulationConfig {
    SimulationConfig {
        steps,
        samples,
        seed,
        inputs: SampleSpec::new(region, max_active),
    }
}

fn random_bqca(n: usize, sector: bool, r: &mut QcaRng) -> Fallible<Bqca<f64>> {
    let mut draw = || {
        if sector {
            random_sector_block_unitary(n, bits(), r)
        } else {
            random_block_unitary(n, bits(), r)
        }
    };
    let u0 = draw()?;
    let u1 = draw()?;
    Ok(Bqca::new(u0, u1)?)
}

/// Commuting-by-construction multilayer automata: controlled-phase,
/// diagonal and conjugated-phase families, `per_family` of each.
fn commuting_multilayers(n: usize, per_family: usize, seed: u64) -> Fallible<Vec<(String, MultilayerQca<f64>)>> {
    let tracks = bits();
    let pairs = Arc::new(pair_alphabet(&tracks)?);
    let mut r = rng(seed);
    let mut out = Vec::new();
    for i in 0..per_family {
        let ks = [
            ("controlled-phase", controlled_phase_k(n, &tracks, &mut r)?),
            ("diagonal", random_diagonal_block(n, pairs.clone(), &mut r)?),
            ("conjugated-phase", conjugated_phase_k(n, &tracks, 2, &mut r)?),
        ];
        for (family, k) in ks {
            out.push((format!("{family} #{i} n={n}"), MultilayerQca::new(tracks.clone(), k)?));
        }
    }
    Ok(out)
}

fn passes_fidelity(rep: &SimulationReport, tol: f64) -> bool {
    rep.worst_fidelity() >= 1.0 - tol && rep.worst_schmidt() >= 1.0 - tol
}

/// Largest fidelity any input reached at the first step.
fn best_fidelity(rep: &SimulationReport) -> f64 {
    rep.per_sample_fidelity.iter().map(|s| s[0]).fold(0.0, f64::max)
}

fn scaled(u: &BlockUnitary64) -> Fallible<BlockUnitary64> {
    let mut cols = u.overrides().clone();
    let (_, col) = cols.iter_mut().next().ok_or("identity operator")?;
    for (_, z) in col.iter_mut() {
        *z *= 1.01;
    }
    Ok(BlockUnitary64::from_columns_unchecked(
        u.dim(),
        u.alphabet_arc().clone(),
        cols,
    )?)
}

fn criterion_1() -> Fallible<Verdict> {
    let mut failures = Vec::new();
    let (mut worst_u, mut worst_s, mut worst_c) = (0.0f64, 0.0f64, 0.0f64);
    let mut causality_runs = 0;
    let entries = corpus::<f64>(1)?;
    for (i, e) in entries.iter().enumerate() {
        let a = &e.automaton;
        let n = a.dimension();
        let window = Region::cube(n, 0, if n == 1 { 4 } else { 2 })?;
        let u = check_unitarity(a, &window, 1)?;
        let s = check_shift_invariance(a, &SampleSpec::small(n), 20, 100 + i as u64)?;
        worst_u = worst_u.max(u.worst_deviation);
        worst_s = worst_s.max(s.worst_deviation);
        if u.worst_deviation > 1e-9 {
            failures.push(format!("{} unitarity {:.2e}", e.name, u.worst_deviation));
        }
        if s.worst_deviation > 1e-10 {
            failures.push(format!("{} shift {:.2e}", e.name, s.worst_deviation));
        }
        // Generic two-dimensional dynamics fill the causal band too fast
        // for exact evolution of the trial pairs.
        if n == 1 || e.occupation_preserving {
            let c = check_causality(a, None, None, 20, 200 + i as u64)?;
            worst_c = worst_c.max(c.worst_deviation);
            causality_runs += 1;
            if c.worst_deviation > 1e-9 {
                failures.push(format!("{} causality {:.2e}", e.name, c.worst_deviation));
            }
        }
    }

    let mut r = rng(2);
    let u = random_block_unitary::<f64>(1, bits(), &mut r)?;
    let bad_unitarity = check_unitarity(&Pqca::new_unchecked(scaled(&u)?), &line(0, 3), 1)?;
    let position = PositionDependent {
        base: Pqca::new(u.clone())?,
        other: random_block_unitary(1, bits(), &mut r)?,
        site: Site::new([0]),
    };
    let bad_shift = check_shift_invariance(&position, &SampleSpec::small(1), 20, 3)?;
    let grouped = qca_core::coding::group(Automaton64::Pqca(Pqca::new(u)?), 2, 1)?;
    let bad_causality = check_causality(&grouped, None, Some((0, 0)), 20, 5)?;
    for (name, rep) in [
        ("unitarity", &bad_unitarity),
        ("shift", &bad_shift),
        ("causality", &bad_causality),
    ] {
        if rep.passed {
            failures.push(format!("negative control for {name} passed"));
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "{} automata; worst unitarity {worst_u:.1e}, shift {worst_s:.1e}, causality {worst_c:.1e} \
             ({causality_runs} automata); negative controls fail{}",
            entries.len(),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failures: {failures:?}")
            }
        ),
    )
}

fn criterion_2() -> Fallible<Verdict> {
    let mut failures = Vec::new();
    let (mut fid, mut sch) = (1.0f64, 1.0f64);
    let mut runs = 0;
    let mut record = |name: String, rep: SimulationReport, failures: &mut Vec<String>| {
        fid = fid.min(rep.worst_fidelity());
        sch = sch.min(rep.worst_schmidt());
        runs += 1;
        if !passes_fidelity(&rep, 1e-9) {
            failures.push(format!("{name}: fidelity {:.3e}", 1.0 - rep.worst_fidelity()));
        }
    };
    let mut r = rng(20);
    // Occupation-conserving instances: 4 rounds, up to 3 of 6 cells occupied.
    for i in 0..20 {
        let b = random_bqca(1, true, &mut r)?;
        let low = lower_bqca_to_pqca(&b)?;
        let rep = check_intrinsic_simulation(&Automaton64::Bqca(b), &low, &config(4, 10, i, line(0, 5), 3))?;
        record(format!("1d sector #{i}"), rep, &mut failures);
    }
    // Generic instances: 3 rounds from one occupied cell of 6, and the
    // wrong-ratio control.
    let mut negatives = 0;
    for i in 0..20 {
        let b = Automaton64::Bqca(random_bqca(1, false, &mut r)?);
        let Automaton64::Bqca(inner) = &b else { unreachable!() };
        let low = lower_bqca_to_pqca(inner)?;
        let rep = check_intrinsic_simulation(&b, &low, &config(3, 10, i, line(0, 5), 1))?;
        record(format!("1d generic #{i}"), rep, &mut failures);
        let wrong = check_intrinsic_simulation_at_ratio(&b, &low, 2, &config(1, 10, i, line(0, 5), 2))?;
        if best_fidelity(&wrong) < 0.99 {
            negatives += 1;
        }
    }
    for i in 0..2 {
        let b = random_bqca(1, false, &mut r)?;
        let low = lower_bqca_to_pqca(&b)?;
        let rep = check_intrinsic_simulation(&Automaton64::Bqca(b), &low, &config(4, 2, 50 + i, line(0, 5), 1))?;
        record(format!("1d generic 4-round #{i}"), rep, &mut failures);
    }
    for i in 0..5 {
        let b = random_bqca(2, true, &mut r)?;
        let low = lower_bqca_to_pqca(&b)?;
        let src = Automaton64::Bqca(b);
        let rep = check_intrinsic_simulation(&src, &low, &config(4, 10, 70 + i, square(4), 1))?;
        record(format!("2d sector #{i}"), rep, &mut failures);
        if i == 0 {
            let rep = check_intrinsic_simulation(&src, &low, &config(4, 2, 80, square(4), 2))?;
            record("2d sector two-cell".into(), rep, &mut failures);
        }
    }
    if negatives < 18 {
        failures.push(format!("wrong ratio rejected on only {negatives}/20 generic instances"));
    }
    verdict(
        failures.is_empty(),
        format!(
            "{runs} runs (20+20+2 1D, 5+1 2D); min fidelity 1-{:.1e}, min Schmidt 1-{:.1e}; \
             wrong ratio rejected on {negatives}/20{}",
            1.0 - fid,
            1.0 - sch,
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failures: {failures:?}")
            }
        ),
    )
}

fn criterion_3() -> Fallible<Verdict> {
    let mut failures = Vec::new();
    let mut fid = 1.0f64;
    let mut wrong_best = 0.0f64;
    let mut count = 0;
    for n in [1usize, 2] {
        let region = if n == 1 { line(0, 3) } else { square(4) };
        for (name, m) in commuting_multilayers(n, 3, 30 + n as u64)? {
            let low = lower_multilayer_to_bqca(&m)?;
            let src = Automaton64::Multilayer(m);
            let cfg = config(1, 5, count, region.clone(), 2);
            count += 1;
            if low.step_ratio != 1 << n {
                failures.push(format!("{name}: step ratio {}", low.step_ratio));
            }
            let rep = check_intrinsic_simulation(&src, &low, &cfg)?;
            fid = fid.min(rep.worst_fidelity());
            if !passes_fidelity(&rep, 1e-9) {
                failures.push(format!("{name}: fidelity 1-{:.1e}", 1.0 - rep.worst_fidelity()));
            }
            for ratio in [(1 << n) - 1, (1 << n) + 1] {
                let rep = check_intrinsic_simulation_at_ratio(&src, &low, ratio, &cfg)?;
                wrong_best = wrong_best.max(best_fidelity(&rep));
                if best_fidelity(&rep) >= 0.99 {
                    failures.push(format!(
                        "{name}: ratio {ratio} reached fidelity {:.4}",
                        best_fidelity(&rep)
                    ));
                }
            }
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "{count} automata (n=1,2); 2^n rounds per step, min fidelity 1-{:.1e}; \
             2^n-1 and 2^n+1 rounds best fidelity {wrong_best:.3}{}",
            1.0 - fid,
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failures: {failures:?}")
            }
        ),
    )
}

fn criterion_4() -> Fallible<Verdict> {
    let mut fid = 1.0f64;
    let mut failures = Vec::new();
    for (i, (name, m)) in commuting_multilayers(1, 1, 40)?.into_iter().enumerate() {
        let low = lower_multilayer_to_pqca(&m)?;
        let rep = check_intrinsic_simulation(
            &Automaton64::Multilayer(m),
            &low,
            &config(2, 5, i as u64, line(0, 3), 2),
        )?;
        fid = fid.min(rep.worst_fidelity());
        if rep.worst_fidelity() < 1.0 - 1e-8 {
            failures.push(name);
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "3 multilayer automata, 2 steps, min fidelity 1-{:.1e}{}",
            1.0 - fid,
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failures: {failures:?}")
            }
        ),
    )
}

fn criterion_5() -> Fallible<Verdict> {
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for e in corpus::<f64>(1)? {
        let n = e.automaton.dimension();
        let (cap, windows) = if n == 1 {
            (
                4096,
                vec![(line(0, 1), 1), (line(0, 3), 1), (line(-2, 1), 1), (line(1, 2), 2)],
            )
        } else {
            (1 << 16, vec![(square(2), 1)])
        };
        for (w, margin) in windows {
            let cells = w.expanded(margin).cell_count() as u32;
            if (e.automaton.alphabet().len() as u128).pow(cells) > cap as u128 {
                continue;
            }
            let rep = check_oracle_equivalence(&e.automaton, &w, margin, cap)?;
            worst = worst.max(rep.worst_deviation);
            checked += 1;
            if rep.worst_deviation > 1e-10 {
                failures.push(format!("{} on {w:?}", e.name));
            }
        }
    }
    verdict(
        failures.is_empty() && checked > 0,
        format!(
            "{checked} (automaton, window) pairs; worst amplitude difference {worst:.1e}{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failures: {failures:?}")
            }
        ),
    )
}

/// Every column of the partitioned scattering operator keeps the marks of
/// its input block: words consistent with a layer map to words consistent
/// with the same layer, and inconsistent words are left alone.
fn scattering_keeps_marks(u: &BlockUnitary64) -> bool {
    let n = u.dim();
    let cells = block_cells(n);
    let letters = u.alphabet().len();
    let qm = u.alphabet().quiescent();
    let layer = |idx: u64| -> Option<Option<u32>> {
        let w = index_word(idx, letters, cells);
        let mut found: Option<u32> = None;
        for (p, &l) in w.iter().enumerate() {
            if l == qm {
                continue;
            }
            let flip = mark_of(l, n) ^ p as u32;
            if flip != 0 && flip != cells as u32 - 1 {
                return None;
            }
            match found {
                Some(f) if f != flip => return None,
                _ => found = Some(flip),
            }
        }
        Some(found)
    };
    u.overrides().iter().all(|(c, col)| match layer(*c) {
        None | Some(None) => false,
        Some(Some(l)) => col.iter().all(|(r, _)| matches!(layer(*r), Some(Some(m)) if m == l)),
    })
}

fn criterion_6() -> Fallible<Verdict> {
    // (name, source, lowering, target rounds evolved for the mark check)
    let mut results: Vec<(String, Automaton64, LoweringResult64, usize)> = Vec::new();
    let mut r = rng(60);
    for i in 0..4 {
        for (n, sector) in [(1, false), (1, true), (2, true), (2, false)] {
            let b = random_bqca(n, sector, &mut r)?;
            let low = lower_bqca_to_pqca(&b)?;
            // Generic two-dimensional dynamics fill a 5x5 box (2^25
            // configurations) after two rounds.
            let rounds = match (n, sector) {
                (1, _) => 3,
                (_, true) => 2,
                _ => 1,
            };
            results.push((format!("bqca->pqca n={n} #{i}"), Automaton64::Bqca(b), low, rounds));
        }
    }
    for n in [1, 2] {
        for (name, m) in commuting_multilayers(n, 1, 61)? {
            let low = lower_multilayer_to_bqca(&m)?;
            let ratio = low.step_ratio;
            results.push((
                format!("multilayer->bqca {name}"),
                Automaton64::Multilayer(m.clone()),
                low,
                ratio,
            ));
            let low = lower_multilayer_to_pqca(&m)?;
            results.push((
                format!("multilayer->pqca {name}"),
                Automaton64::Multilayer(m),
                low,
                ratio,
            ));
        }
    }
    let (mut worst_u, mut worst_q) = (0.0f64, 0.0f64);
    let mut blocks = 0;
    let mut failures = Vec::new();
    let mut mark_rounds = 0;
    for (name, src, low, rounds) in &results {
        for u in low.target.blocks() {
            let d = u.defects();
            worst_u = worst_u.max(d.unitarity);
            worst_q = worst_q.max(d.quiescence);
            blocks += 1;
            if d.unitarity > 1e-10 || d.quiescence > 1e-12 {
                failures.push(format!("{name}: {d:?}"));
            }
        }
        let Automaton64::Pqca(p) = &low.target else { continue };
        if !scattering_keeps_marks(p.scattering()) {
            failures.push(format!("{name}: scattering changes marks"));
        }
        // Evolve encoded inputs and check marks after every round.
        let n = src.dimension();
        let region = if n == 1 { line(0, 3) } else { square(2) };
        let sampler = StateSampler::new(region, 1);
        for s in 0..2 {
            let psi = sampler.sample::<f64>(src.alphabet(), s, &mut r)?;
            let mut g = encode(&low.coding, &psi)?;
            for _ in 0..*rounds {
                g = low.target.round(&g)?;
                mark_rounds += 1;
                if !marks_consistent(&g) {
                    failures.push(format!("{name}: marks changed during evolution"));
                    break;
                }
            }
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "{} lowerings, {blocks} emitted blocks; worst unitarity {worst_u:.1e}, quiescence {worst_q:.1e}; \
             marks exact on every scattering column and over {mark_rounds} evolved rounds{}",
            results.len(),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failures: {failures:?}")
            }
        ),
    )
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

/// Runs `args` with `{out}` replaced by `out`, returning exit code, stdout
/// and stderr.
fn run_in(out: &Path, args: &[String]) -> Fallible<(Option<i32>, Vec<u8>, Vec<u8>)> {
    let out = out.to_string_lossy();
    let args: Vec<String> = args.iter().map(|a| a.replace("{out}", &out)).collect();
    let o = Command::new(env!("CARGO_BIN_EXE_qca")).args(&args).output()?;
    Ok((o.status.code(), o.stdout, o.stderr))
}

fn files_under(dir: &Path) -> Fallible<Vec<(PathBuf, Vec<u8>)>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d)? {
            let p = e?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir)?.to_path_buf(), fs::read(&p)?));
            }
        }
    }
    out.sort();
    Ok(out)
}

fn criterion_7() -> Fallible<Verdict> {
    let cmds: Vec<Vec<String>> = [
        vec![
            "simulate",
            "--automaton",
            &fixture("pqca_random_1d.json"),
            "--state",
            &fixture("state_pair_1d.json"),
            "--rounds",
            "3",
            "--out",
            "{out}/sim1.json",
        ],
        vec![
            "simulate",
            "--automaton",
            &fixture("bqca_sector_2d.json"),
            "--state",
            &fixture("state_pair_2d.json"),
            "--rounds",
            "2",
            "--out",
            "{out}/sim2.json",
        ],
        vec![
            "simulate",
            "--automaton",
            &fixture("multilayer_cphase_1d.json"),
            "--state",
            &fixture("state_tracks_1d.json"),
            "--rounds",
            "2",
            "--out",
            "{out}/sim3.json",
        ],
        vec![
            "lower",
            "--automaton",
            &fixture("bqca_random_1d.json"),
            "--pass",
            "pqca",
            "--out-dir",
            "{out}/low-pqca",
        ],
        vec![
            "lower",
            "--automaton",
            &fixture("multilayer_cphase_1d.json"),
            "--pass",
            "bqca",
            "--out-dir",
            "{out}/low-bqca",
        ],
        vec![
            "lower",
            "--automaton",
            &fixture("multilayer_cphase_1d.json"),
            "--pass",
            "pqca-full",
            "--out-dir",
            "{out}/low-full",
        ],
        vec![
            "verify",
            "--automaton",
            &fixture("bqca_random_1d.json"),
            "--check",
            "unitarity",
            "--report",
            "{out}/unitarity.json",
        ],
        vec![
            "verify",
            "--automaton",
            &fixture("bqca_random_1d.json"),
            "--check",
            "shift",
            "--seed",
            "9",
            "--report",
            "{out}/shift.json",
        ],
        vec![
            "verify",
            "--automaton",
            &fixture("pqca_random_1d.json"),
            "--check",
            "causality",
            "--seed",
            "9",
            "--report",
            "{out}/causality.json",
        ],
        vec![
            "verify",
            "--automaton",
            &fixture("multilayer_noncommuting_1d.json"),
            "--check",
            "commutation",
            "--seed",
            "9",
            "--report",
            "{out}/commutation.json",
        ],
        vec![
            "check-sim",
            "--source",
            &fixture("bqca_random_1d.json"),
            "--target",
            "{out}/low-pqca/automaton.json",
            "--coding",
            "{out}/low-pqca/coding.json",
            "--steps",
            "2",
            "--samples",
            "4",
            "--seed",
            "5",
            "--report",
            "{out}/sim-check.json",
        ],
        vec![
            "check-sim",
            "--source",
            &fixture("multilayer_cphase_1d.json"),
            "--target",
            "{out}/low-bqca/automaton.json",
            "--coding",
            "{out}/low-bqca/coding.json",
            "--steps",
            "1",
            "--samples",
            "4",
            "--seed",
            "5",
            "--report",
            "{out}/sim-check-ml.json",
        ],
    ]
    .into_iter()
    .map(|c| c.into_iter().map(String::from).collect())
    .collect();
    let root = std::env::temp_dir().join(format!("qca-acceptance-{}", std::process::id()));
    let (a, b) = (root.join("a"), root.join("b"));
    fs::create_dir_all(&a)?;
    fs::create_dir_all(&b)?;
    let mut failures = Vec::new();
    for cmd in &cmds {
        let first = run_in(&a, cmd)?;
        let second = run_in(&b, cmd)?;
        if first.0 != Some(0) && first.0 != Some(1) {
            failures.push(format!(
                "{} exited with {:?}: {}",
                cmd[0],
                first.0,
                String::from_utf8_lossy(&first.2)
            ));
        }
        if first != second {
            failures.push(format!("{} output differs between runs", cmd.join(" ")));
        }
    }
    let (fa, fb) = (files_under(&a)?, files_under(&b)?);
    let identical = fa == fb;
    if !identical {
        failures.push("written files differ between runs".into());
    }
    fs::remove_dir_all(&root)?;
    verdict(
        failures.is_empty(),
        format!(
            "{} commands run twice; stdout, exit codes and {} written files byte-identical{}",
            cmds.len(),
            fa.len(),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failures: {failures:?}")
            }
        ),
    )
}

fn main() {
    type Criterion = fn() -> Fallible<Verdict>;
    let criteria: [(&str, Criterion); 7] = [
        ("axiom suite", criterion_1),
        ("BQCA to PQCA universality", criterion_2),
        ("multilayer to BQCA universality", criterion_3),
        ("multilayer to PQCA end to end", criterion_4),
        ("oracle equivalence", criterion_5),
        ("construction invariants", criterion_6),
        ("determinism", criterion_7),
    ];
    let only: Option<usize> = std::env::var("QCA_ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != i + 1) {
            continue;
        }
        let start = Instant::now();
        let v = run().unwrap_or_else(|e| Verdict {
            passed: false,
            detail: format!("error: {e}"),
        });
        if !v.passed {
            failed += 1;
        }
        println!(
            "criterion {}: {} {name}: {} [{:.1}s]",
            i + 1,
            if v.passed { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
