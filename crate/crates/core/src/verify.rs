//! Brute-force checkers for the automaton axioms, the commutation promise
//! of multilayer automata and the simulation relations.
//!
//! Every checker is deterministic given its parameters and seed.

use std::collections::BTreeMap;

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::automata::{apply_layer_with, Automaton, Dynamics};
use crate::block::BlockUnitary;
use crate::coding::{decode, encode, IsometricCoding, Iterated};
use crate::dense::{state_cap, DenseSpace};
use crate::error::{QcaError, Result};
use crate::lattice::{partial_trace, shift, Configuration, Region, Site, Superposition};
use crate::lowering::LoweringResult;
use crate::random::{product_state, random_unit_vector, rng, QcaRng, StateSampler};
use crate::scalar::{one, tol, zero, Real};

/// Number of witnesses kept per report (the worst ones).
pub const MAX_WITNESSES: usize = 8;

/// A sampled input and the deviation measured on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub input: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CheckParameters {
    pub tolerance: f64,
    pub samples: usize,
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<Region>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<i64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

/// Outcome of an axiom or promise check; `passed` iff
/// `worst_deviation <= parameters.tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub worst_deviation: f64,
    pub witnesses: Vec<Witness>,
    pub parameters: CheckParameters,
}

struct Collector {
    worst: f64,
    witnesses: Vec<Witness>,
}

impl Collector {
    fn new() -> Self {
        Self {
            worst: 0.0,
            witnesses: Vec::new(),
        }
    }

    fn record(&mut self, input: impl FnOnce() -> String, value: f64) {
        let value = if value.is_nan() { f64::INFINITY } else { value };
        self.worst = self.worst.max(value);
        if self.witnesses.len() < MAX_WITNESSES || value > self.witnesses.last().map_or(0.0, |w| w.value) {
            self.witnesses.push(Witness { input: input(), value });
            self.witnesses
                .sort_by(|a, b| b.value.partial_cmp(&a.value).unwrap_or(std::cmp::Ordering::Equal));
            self.witnesses.truncate(MAX_WITNESSES);
        }
    }

    fn finish(self, name: &str, parameters: CheckParameters) -> CheckReport {
        CheckReport {
            name: name.to_string(),
            passed: self.worst <= parameters.tolerance,
            worst_deviation: self.worst,
            witnesses: self.witnesses,
            parameters,
        }
    }
}

/// Where sample states live and how many cells they occupy.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpec {
    pub region: Region,
    pub max_active: usize,
}

impl SampleSpec {
    pub fn new(region: Region, max_active: usize) -> Self {
        Self { region, max_active }
    }

    /// Four cells on a line, or a 2x2 square, with up to three (two)
    /// occupied cells.
    pub fn small(n: usize) -> Self {
        let (side, active) = if n == 1 { (4, 3) } else { (2, 2) };
        Self {
            region: Region::cube(n, 0, side).expect("non-empty cube"),
            max_active: active,
        }
    }

    fn sampler(&self) -> StateSampler {
        StateSampler::new(self.region.clone(), self.max_active)
    }
}

fn describe<T: Real>(psi: &Superposition<T>) -> String {
    let kind = if psi.len() == 2 { "two-term" } else { "product" };
    match psi.bounding_box() {
        Some((lo, hi)) => format!("{kind} state, {} terms, support {lo:?}..{hi:?}", psi.len()),
        None => "quiescent state".to_string(),
    }
}

fn check_dimension<T: Real, D: Dynamics<T> + ?Sized>(a: &D, n: usize) -> Result<()> {
    if a.dimension() != n {
        return Err(QcaError::DimensionMismatch {
            expected: a.dimension(),
            found: n,
        });
    }
    Ok(())
}

/// Evolves every basis configuration of `window` by one round and reports
/// the largest entry of `M^dagger M - I`, where `M` is the round restricted
/// to those inputs. The number of inputs is capped by [`state_cap`]; the
/// outputs must stay inside `window` expanded by `margin`.
pub fn check_unitarity<T: Real, D: Dynamics<T> + ?Sized>(a: &D, window: &Region, margin: i64) -> Result<CheckReport> {
    check_unitarity_with_cap(a, window, margin, state_cap())
}

pub fn check_unitarity_with_cap<T: Real, D: Dynamics<T> + ?Sized>(
    a: &D,
    window: &Region,
    margin: i64,
    cap: usize,
) -> Result<CheckReport> {
    check_dimension(a, window.dim())?;
    let alphabet = a.alphabet().clone();
    let space = DenseSpace::new(window.clone(), &alphabet, cap)?;
    let outer = window.expanded(margin);
    let dim = space.dim();
    // Inverted index: output configuration -> (column, amplitude).
    let mut index: BTreeMap<Configuration, Vec<(usize, Complex<T>)>> = BTreeMap::new();
    for j in 0..dim {
        let input = Superposition::basis(window.dim(), alphabet.clone(), space.config_of(j));
        let out = a.round(&input)?;
        if !outer.holds(&out) {
            return Err(QcaError::SupportEscape);
        }
        for (c, z) in out.into_terms() {
            index.entry(c).or_default().push((j, z));
        }
    }
    let mut gram = vec![zero::<T>(); dim * dim];
    for col in index.values() {
        for (i, x) in col {
            for (j, y) in col {
                gram[i * dim + j] += x.conj() * *y;
            }
        }
    }
    let mut c = Collector::new();
    for i in 0..dim {
        for j in 0..dim {
            let want = if i == j { one() } else { zero() };
            let dev = (gram[i * dim + j] - want).norm().to_f64_lossy();
            if dev > 0.0 {
                c.record(|| format!("gram entry ({i}, {j})"), dev);
            }
        }
    }
    Ok(c.finish(
        "unitarity",
        CheckParameters {
            tolerance: tol::UNITARY,
            samples: dim,
            seed: None,
            window: Some(window.clone()),
            margin: Some(margin),
            notes: vec!["columns are all basis configurations of the window".into()],
        },
    ))
}

/// Compares `round(shift(psi, k, p))` with `shift(round(psi), k, p)` on
/// every axis, where `p` is the automaton's translation period (2 for
/// partitioned dynamics, which keeps the partition aligned).
pub fn check_shift_invariance<T: Real, D: Dynamics<T> + ?Sized>(
    a: &D,
    spec: &SampleSpec,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    let n = a.dimension();
    check_dimension(a, spec.region.dim())?;
    let p = a.translation_period();
    let sampler = spec.sampler();
    let mut r = rng(seed);
    let mut c = Collector::new();
    for i in 0..samples {
        let psi = sampler.sample::<T>(a.alphabet(), i, &mut r)?;
        let out = a.round(&psi)?;
        for k in 0..n {
            let lhs = a.round(&shift(&psi, k, p)?)?;
            let rhs = shift(&out, k, p)?;
            let dev = lhs.distance(&rhs)?.to_f64_lossy();
            c.record(|| format!("sample {i} ({}), axis {k}", describe(&psi)), dev);
        }
    }
    Ok(c.finish(
        "shift",
        CheckParameters {
            tolerance: tol::NORM,
            samples,
            seed: Some(seed),
            notes: vec![format!("translation by {p} cells per axis")],
            ..Default::default()
        },
    ))
}

/// Sites `target + [lo, hi]^n`.
fn neighbourhood(target: &Site, lo: i64, hi: i64) -> Result<Region> {
    Region::new(
        target.coords().iter().map(|x| x + lo).collect(),
        target.coords().iter().map(|x| x + hi).collect(),
    )
}

fn tensor<T: Real>(a: &Superposition<T>, b: &Superposition<T>) -> Result<Superposition<T>> {
    let terms = a
        .terms()
        .iter()
        .flat_map(|(x, s)| b.terms().iter().map(move |(y, t)| (x.merged(y), *s * *t)));
    Superposition::from_terms_unnormalized(a.dim(), a.alphabet_arc().clone(), terms)
}

/// Random state of one cell of `band` outside `inner`.
fn outside_state<T: Real>(
    n: usize,
    alphabet: &std::sync::Arc<crate::lattice::Alphabet>,
    inner: &Region,
    band: &Region,
    r: &mut QcaRng,
) -> Result<Superposition<T>> {
    let sites: Vec<Site> = band.sites().into_iter().filter(|s| !inner.contains(s)).collect();
    if sites.is_empty() {
        return Ok(Superposition::quiescent(n, alphabet.clone()));
    }
    let site = sites[r.random_range(0..sites.len())].clone();
    let factor = random_unit_vector(alphabet.len(), r);
    product_state(n, alphabet.clone(), &[site], &[factor])
}

/// Builds pairs of states equal on the neighbourhood `target + [lo, hi]^n`
/// (same factor there) but different elsewhere, evolves both one round
/// and reports the trace distance of their reduced states at `target`.
///
/// The neighbourhood defaults to the automaton's light cone. The check
/// reads causality as "the output at a site is a function of the input on
/// its neighbourhood".
pub fn check_causality<T: Real, D: Dynamics<T> + ?Sized>(
    a: &D,
    target: Option<Site>,
    neighbour: Option<(i64, i64)>,
    trials: usize,
    seed: u64,
) -> Result<CheckReport> {
    let n = a.dimension();
    let target = target.unwrap_or_else(|| Site::origin(n));
    check_dimension(a, target.dim())?;
    let (lo, hi) = neighbour.unwrap_or_else(|| a.light_cone());
    let inner = neighbourhood(&target, lo, hi)?;
    let (clo, chi) = a.light_cone();
    let reach = (clo.abs().max(chi.abs()) + 1).max(3);
    let band = inner.expanded(reach);
    let alphabet = a.alphabet().clone();
    let sampler = StateSampler::new(inner.clone(), 2.min(inner.cell_count()));
    let mut r = rng(seed);
    let mut c = Collector::new();
    for i in 0..trials {
        let core = sampler.sample::<T>(&alphabet, i, &mut r)?;
        let x = tensor(&core, &outside_state(n, &alphabet, &inner, &band, &mut r)?)?;
        let y = tensor(&core, &outside_state(n, &alphabet, &inner, &band, &mut r)?)?;
        let rx = partial_trace(&a.round(&x)?, std::slice::from_ref(&target))?;
        let ry = partial_trace(&a.round(&y)?, std::slice::from_ref(&target))?;
        let dev = rx.trace_distance(&ry)?.to_f64_lossy();
        c.record(|| format!("trial {i} ({})", describe(&core)), dev);
    }
    Ok(c.finish(
        "causality",
        CheckParameters {
            tolerance: tol::CAUSAL,
            samples: trials,
            seed: Some(seed),
            notes: vec![
                format!("target {:?}, neighbourhood offsets [{lo}, {hi}] per axis", target.coords()),
                "causality read as: the reduced output at the target is a function of the reduced input on the neighbourhood".into(),
            ],
            ..Default::default()
        },
    ))
}

/// Applies `k` on the single block based at `base`.
fn apply_one<T: Real>(
    k: &BlockUnitary<T>,
    id: &BlockUnitary<T>,
    base: &Site,
    state: &Superposition<T>,
) -> Result<Superposition<T>> {
    let offset: Vec<i64> = base.coords().iter().map(|x| x.rem_euclid(2)).collect();
    apply_layer_with(state, &offset, |b| if b == base { k } else { id })
}

/// For every displacement `d in {-1,0,1}^n \ {0}`, compares `K_0 K_d` with
/// `K_d K_0` on all basis configurations of their common box (or on
/// `cap` random ones when the box has more), and reports the largest
/// amplitude difference.
pub fn check_commutation<T: Real>(k: &BlockUnitary<T>, cap: usize, seed: u64) -> Result<CheckReport> {
    let n = k.dim();
    let alphabet = k.alphabet_arc().clone();
    let id = BlockUnitary::identity(n, alphabet.clone())?;
    let origin = Site::origin(n);
    let mut r = rng(seed);
    let mut c = Collector::new();
    let mut notes = Vec::new();
    let mut total = 0usize;
    let displacements: Vec<Vec<i64>> = (0..3usize.pow(n as u32))
        .map(|mut i| {
            (0..n)
                .map(|_| {
                    let d = (i % 3) as i64 - 1;
                    i /= 3;
                    d
                })
                .collect::<Vec<i64>>()
        })
        .filter(|d| d.iter().any(|&x| x != 0))
        .collect();
    for d in displacements {
        let other = Site::from(d.as_slice());
        let lo: Vec<i64> = d.iter().map(|&x| x.min(0)).collect();
        let hi: Vec<i64> = d.iter().map(|&x| x.max(0) + 1).collect();
        let region = Region::new(lo, hi)?;
        let cells = region.cell_count();
        let dim = (alphabet.len() as u128).saturating_pow(cells as u32);
        let space = DenseSpace::new(region.clone(), &alphabet, usize::MAX)?;
        let inputs: Vec<usize> = if dim <= cap as u128 {
            (0..space.dim()).collect()
        } else {
            notes.push(format!("displacement {d:?}: {cap} sampled basis states of {dim}"));
            (0..cap).map(|_| r.random_range(0..space.dim())).collect()
        };
        total += inputs.len();
        for j in inputs {
            let e = Superposition::basis(n, alphabet.clone(), space.config_of(j));
            let ab = apply_one(k, &id, &origin, &apply_one(k, &id, &other, &e)?)?;
            let ba = apply_one(k, &id, &other, &apply_one(k, &id, &origin, &e)?)?;
            let mut dev = 0.0f64;
            for (cfg, z) in ab.terms() {
                dev = dev.max((*z - ba.amplitude(cfg)).norm().to_f64_lossy());
            }
            for (cfg, z) in ba.terms() {
                if !ab.terms().contains_key(cfg) {
                    dev = dev.max(z.norm().to_f64_lossy());
                }
            }
            if dev > 0.0 {
                c.record(|| format!("displacement {d:?}, basis index {j}"), dev);
            }
        }
    }
    Ok(c.finish(
        "commutation",
        CheckParameters {
            tolerance: tol::COMMUTE,
            samples: total,
            seed: Some(seed),
            notes,
            ..Default::default()
        },
    ))
}

/// Compares the sparse round with the dense matrix of
/// [`crate::dense::dense_global_matrix`] on every basis configuration of
/// `window` and reports the largest amplitude difference.
pub fn check_oracle_equivalence<T: Real>(
    a: &Automaton<T>,
    window: &Region,
    margin: i64,
    cap: usize,
) -> Result<CheckReport> {
    let alphabet = a.alphabet().clone();
    let m = crate::dense::dense_global_matrix_with_cap(a, window, margin, cap)?;
    let inner = DenseSpace::new(window.clone(), &alphabet, cap)?;
    let outer = DenseSpace::new(window.expanded(margin), &alphabet, cap)?;
    let mut c = Collector::new();
    for j in 0..inner.dim() {
        let input = Superposition::basis(window.dim(), alphabet.clone(), inner.config_of(j));
        let sparse = outer.to_vector(&a.round(&input)?)?;
        let dev = (sparse - m.column(j))
            .iter()
            .fold(0.0f64, |acc, z| acc.max(z.norm().to_f64_lossy()));
        c.record(|| format!("basis index {j}"), dev);
    }
    Ok(c.finish(
        "oracle",
        CheckParameters {
            tolerance: tol::NORM,
            samples: inner.dim(),
            seed: None,
            window: Some(window.clone()),
            margin: Some(margin),
            notes: vec![format!("dense cap {cap}")],
        },
    ))
}

/// Direct-simulation measurements, per step worst over samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub name: String,
    pub passed: bool,
    pub tolerance: f64,
    pub steps: usize,
    pub samples: usize,
    pub seed: u64,
    /// Target rounds per source step.
    pub step_ratio: usize,
    /// Smallest fidelity of the decoded source track with the source
    /// evolution, per step.
    pub fidelity: Vec<f64>,
    /// Smallest largest-Schmidt-coefficient across the track cut, per step.
    pub largest_schmidt: Vec<f64>,
    /// `per_sample_fidelity[sample][step]`.
    pub per_sample_fidelity: Vec<Vec<f64>>,
    /// Whether the garbage factor is the same (up to phase) for every
    /// sample and step.
    pub garbage_independent: bool,
}

impl SimulationReport {
    pub fn worst_fidelity(&self) -> f64 {
        self.fidelity.iter().cloned().fold(1.0, f64::min)
    }

    pub fn worst_schmidt(&self) -> f64 {
        self.largest_schmidt.iter().cloned().fold(1.0, f64::min)
    }
}

/// Parameters of the simulation checkers.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub steps: usize,
    pub samples: usize,
    pub seed: u64,
    /// Inputs on the source lattice.
    pub inputs: SampleSpec,
}

/// Checks `Dec(target^i(Enc psi)) = (source^i psi) (x) phi` for
/// `i = 1..steps`: the fidelity of the source track with the source
/// evolution and the largest Schmidt coefficient across the track cut.
pub fn check_direct_simulation<T, S, G>(
    source: &S,
    target: &G,
    coding: &IsometricCoding<T>,
    config: &SimulationConfig,
) -> Result<SimulationReport>
where
    T: Real,
    S: Dynamics<T> + ?Sized,
    G: Dynamics<T> + ?Sized,
{
    direct(source, target, coding, config, 1)
}

fn direct<T, S, G>(
    source: &S,
    target: &G,
    coding: &IsometricCoding<T>,
    config: &SimulationConfig,
    step_ratio: usize,
) -> Result<SimulationReport>
where
    T: Real,
    S: Dynamics<T> + ?Sized,
    G: Dynamics<T> + ?Sized,
{
    if source.alphabet() != coding.alphabet_h() || target.alphabet() != coding.alphabet_g() {
        return Err(QcaError::AlphabetMismatch(
            "coding does not connect the two automata".into(),
        ));
    }
    check_dimension(source, config.inputs.region.dim())?;
    check_dimension(target, coding.dim())?;
    let sampler = config.inputs.sampler();
    let mut r = rng(config.seed);
    let mut fidelity = vec![1.0f64; config.steps];
    let mut schmidt = vec![1.0f64; config.steps];
    let mut per_sample = Vec::with_capacity(config.samples);
    let mut garbage: Option<BTreeMap<Configuration, Complex<T>>> = None;
    let mut independent = true;
    for i in 0..config.samples {
        let mut s = sampler.sample::<T>(source.alphabet(), i, &mut r)?;
        let mut g = encode(coding, &s)?;
        let mut row = Vec::with_capacity(config.steps);
        for step in 0..config.steps {
            s = source.round(&s)?;
            g = target.round(&g)?;
            let dec = decode(coding, &g)?;
            let f = dec.fidelity(&s)?.to_f64_lossy();
            let l = dec.largest_schmidt().to_f64_lossy();
            fidelity[step] = fidelity[step].min(f);
            schmidt[step] = schmidt[step].min(l);
            row.push(f);
            match (dec.garbage(&s)?, &garbage) {
                (None, _) => independent = false,
                (Some(phi), None) => garbage = Some(phi),
                (Some(phi), Some(first)) => {
                    let overlap = phi.iter().fold(zero::<T>(), |acc, (c, z)| {
                        acc + first.get(c).map_or(zero(), |w| w.conj() * *z)
                    });
                    if overlap.norm().to_f64_lossy() < 1.0 - tol::FIDELITY {
                        independent = false;
                    }
                }
            }
        }
        per_sample.push(row);
    }
    let passed = fidelity.iter().chain(&schmidt).all(|&x| x >= 1.0 - tol::FIDELITY);
    Ok(SimulationReport {
        name: "direct-simulation".into(),
        passed,
        tolerance: tol::FIDELITY,
        steps: config.steps,
        samples: config.samples,
        seed: config.seed,
        step_ratio,
        fidelity,
        largest_schmidt: schmidt,
        per_sample_fidelity: per_sample,
        garbage_independent: independent,
    })
}

/// Applies the groupings of a lowering result (spatial part through the
/// coding's tilings, temporal part by iterating rounds) and checks direct
/// simulation.
pub fn check_intrinsic_simulation<T: Real>(
    source: &Automaton<T>,
    result: &LoweringResult<T>,
    config: &SimulationConfig,
) -> Result<SimulationReport> {
    check_intrinsic_simulation_at_ratio(source, result, result.step_ratio, config)
}

/// As [`check_intrinsic_simulation`] but with `rounds` target rounds per
/// source step; any value other than the result's `step_ratio` is a
/// negative control.
pub fn check_intrinsic_simulation_at_ratio<T: Real>(
    source: &Automaton<T>,
    result: &LoweringResult<T>,
    rounds: usize,
    config: &SimulationConfig,
) -> Result<SimulationReport> {
    let tiling_h = result.coding.tiling_h();
    let tiling_g = result.coding.tiling_g();
    if result.source_grouping.tiling() != tiling_h || result.target_grouping.tiling() != tiling_g {
        return Err(QcaError::InvalidGrouping(
            "groupings disagree with the coding's tilings".into(),
        ));
    }
    if result.target_grouping.steps != result.source_grouping.steps * result.step_ratio {
        return Err(QcaError::InvalidGrouping(
            "step ratio disagrees with the groupings".into(),
        ));
    }
    let s = Iterated {
        inner: source,
        steps: result.source_grouping.steps,
    };
    let g = Iterated {
        inner: &result.target,
        steps: rounds * result.source_grouping.steps,
    };
    let mut report = direct(&s, &g, &result.coding, config, rounds)?;
    report.name = "intrinsic-simulation".into();
    Ok(report)
}

/// Negative-control dynamics for the shift check: a partitioned automaton
/// whose scattering operator is replaced by `other` on the even block
/// based at `site`.
pub struct PositionDependent<T: Real> {
    pub base: crate::automata::Pqca<T>,
    pub other: BlockUnitary<T>,
    pub site: Site,
}

impl<T: Real> Dynamics<T> for PositionDependent<T> {
    fn dimension(&self) -> usize {
        self.base.dimension()
    }

    fn alphabet(&self) -> &std::sync::Arc<crate::lattice::Alphabet> {
        self.base.scattering().alphabet_arc()
    }

    fn round(&self, state: &Superposition<T>) -> Result<Superposition<T>> {
        let n = self.dimension();
        let u = self.base.scattering();
        let s = apply_layer_with(state, &vec![0; n], |b| if *b == self.site { &self.other } else { u })?;
        apply_layer_with(&s, &vec![1; n], |_| u)
    }
}

/// Largest entry of `|M^dagger M - I|` of a dense matrix.
pub fn unitarity_deviation<T: Real>(m: &nalgebra::DMatrix<Complex<T>>) -> f64 {
    let g = m.adjoint() * m;
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let want = if i == j { one() } else { zero() };
            worst = worst.max((g[(i, j)] - want).norm().to_f64_lossy());
        }
    }
    worst
}
