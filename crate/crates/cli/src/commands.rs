//! The four subcommands. Each returns an [`Outcome`]; `main` prints the
//! summary and maps `passed` to the exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qca_core::automata::Dynamics;
use qca_core::dense::state_cap;
use qca_core::lowering::{lower_bqca_to_pqca, lower_multilayer_to_bqca, lower_multilayer_to_pqca};
use qca_core::verify::{
    check_causality, check_commutation, check_direct_simulation, check_intrinsic_simulation,
    check_intrinsic_simulation_at_ratio, check_shift_invariance, check_unitarity, CheckReport, SampleSpec,
    SimulationConfig, SimulationReport,
};
use qca_core::{Automaton64, LoweringResult64, Region};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::files::{load_automaton, load_coding, load_state, write_json, AutomatonFile, CodingFile, StateFile};

#[derive(Debug, Parser)]
#[command(
    name = "qca",
    version,
    about = "Simulate, lower and verify quantum cellular automata"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve a state for a number of rounds.
    Simulate(SimulateArgs),
    /// Run a lowering pass and write the target automaton and coding.
    Lower(LowerArgs),
    /// Check an axiom of an automaton, or the commutation promise.
    Verify(VerifyArgs),
    /// Check that a target automaton simulates a source under a coding.
    CheckSim(CheckSimArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub automaton: PathBuf,
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long)]
    pub rounds: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Rescale the input state to unit norm instead of rejecting it.
    #[arg(long)]
    pub renormalize: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pass {
    /// Multilayer to block.
    Bqca,
    /// Block to partitioned.
    Pqca,
    /// Multilayer to partitioned.
    PqcaFull,
}

#[derive(Debug, Args)]
pub struct LowerArgs {
    #[arg(long)]
    pub automaton: PathBuf,
    #[arg(long, value_enum)]
    pub pass: Pass,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckName {
    Unitarity,
    Shift,
    Causality,
    Commutation,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub automaton: PathBuf,
    #[arg(long, value_enum)]
    pub check: CheckName,
    /// Inclusive box `lo:hi`, coordinates comma-separated in 2D
    /// (`0,0:1,1`). Defaults to 4 sites in 1D, 2x2 in 2D and a single
    /// cell above.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub margin: i64,
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Most occupied cells in a sampled state.
    #[arg(long)]
    pub max_active: Option<usize>,
    /// Write the machine-readable report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckSimArgs {
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long)]
    pub coding: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    #[arg(long, default_value_t = 5)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Source-lattice box holding the sampled inputs, as for `verify`.
    #[arg(long, allow_hyphen_values = true)]
    pub region: Option<String>,
    #[arg(long)]
    pub max_active: Option<usize>,
    /// Target rounds per source step; overrides the coding's step ratio.
    #[arg(long)]
    pub ratio: Option<usize>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Result of a command: whether it passed and what to print.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
}

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Lower(a) => lower(a),
        Command::Verify(a) => verify(a),
        Command::CheckSim(a) => check_sim(a),
    }
}

pub fn simulate(args: &SimulateArgs) -> CliResult<Outcome> {
    let automaton = load_automaton(&args.automaton)?;
    let mut state = load_state(&args.state, args.renormalize)?;
    if state.dim() != automaton.dimension() {
        return Err(CliError::Usage(format!(
            "state is {}-dimensional but the automaton is {}-dimensional",
            state.dim(),
            automaton.dimension()
        )));
    }
    if state.alphabet() != &**automaton.alphabet() {
        return Err(CliError::Usage("state and automaton use different alphabets".into()));
    }
    for _ in 0..args.rounds {
        state = automaton.round(&state)?;
    }
    write_json(&args.out, &StateFile::of(&state))?;
    Ok(Outcome {
        passed: true,
        summary: format!(
            "simulated {} round(s) of a {} automaton: {} term(s), norm {:.12}\n",
            args.rounds,
            automaton.kind(),
            state.len(),
            state.norm_sqr().sqrt()
        ),
    })
}

pub fn lower(args: &LowerArgs) -> CliResult<Outcome> {
    let automaton = load_automaton(&args.automaton)?;
    let result: LoweringResult64 = match (args.pass, &automaton) {
        (Pass::Bqca, Automaton64::Multilayer(m)) => lower_multilayer_to_bqca(m)?,
        (Pass::Pqca, Automaton64::Bqca(b)) => lower_bqca_to_pqca(b)?,
        (Pass::PqcaFull, Automaton64::Multilayer(m)) => lower_multilayer_to_pqca(m)?,
        (pass, a) => {
            let wanted = if pass == Pass::Pqca { "bqca" } else { "multilayer" };
            return Err(CliError::Usage(format!(
                "pass {} needs a {wanted} automaton, found {}",
                pass.to_possible_value().expect("no skipped variants").get_name(),
                a.kind()
            )));
        }
    };
    fs::create_dir_all(&args.out_dir).map_err(|source| CliError::Io {
        path: args.out_dir.clone(),
        source,
    })?;
    write_json(&args.out_dir.join("automaton.json"), &AutomatonFile::of(&result.target))?;
    write_json(&args.out_dir.join("coding.json"), &CodingFile::of_lowering(&result))?;
    Ok(Outcome {
        passed: true,
        summary: format!(
            "lowered {} to {}: {} letters, step ratio {}, source grouping {:?}, target grouping {:?}\n",
            automaton.kind(),
            result.target.kind(),
            result.target.alphabet().len(),
            result.step_ratio,
            result.source_grouping,
            result.target_grouping
        ),
    })
}

fn parse_corner(s: &str, n: usize) -> Result<Vec<i64>, String> {
    let v: Vec<i64> = s
        .split(',')
        .map(|c| c.trim().parse::<i64>().map_err(|_| format!("bad coordinate {c:?}")))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("{s:?} has {} coordinates, expected {n}", v.len()));
    }
    Ok(v)
}

/// Parses `lo:hi` into a region of dimension `n`.
pub fn parse_region(s: &str, n: usize) -> CliResult<Region> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("region {s:?} is not of the form lo:hi")))?;
    let lo = parse_corner(lo, n).map_err(CliError::Usage)?;
    let hi = parse_corner(hi, n).map_err(CliError::Usage)?;
    Region::new(lo, hi).map_err(|e| CliError::Usage(format!("region {s:?}: {e}")))
}

fn default_region(n: usize) -> CliResult<Region> {
    let side = match n {
        1 => 4,
        2 => 2,
        _ => 1,
    };
    Ok(Region::cube(n, 0, side)?)
}

fn region_arg(arg: &Option<String>, n: usize) -> CliResult<Region> {
    match arg {
        Some(s) => parse_region(s, n),
        None => default_region(n),
    }
}

#[derive(Debug, Serialize)]
struct VerifyDocument<'a> {
    command: &'static str,
    check: CheckName,
    kind: &'static str,
    seed: u64,
    samples: usize,
    report: &'a CheckReport,
}

fn describe_check(report: &CheckReport) -> String {
    let mut s = String::new();
    let p = &report.parameters;
    let _ = writeln!(
        s,
        "check {}: {}",
        report.name,
        if report.passed { "PASS" } else { "FAIL" }
    );
    let _ = writeln!(
        s,
        "  worst deviation {:.3e} (tolerance {:.1e})",
        report.worst_deviation, p.tolerance
    );
    let _ = writeln!(s, "  samples {}", p.samples);
    if let Some(seed) = p.seed {
        let _ = writeln!(s, "  seed {seed}");
    }
    for note in &p.notes {
        let _ = writeln!(s, "  note: {note}");
    }
    for w in report.witnesses.iter().take(3) {
        let _ = writeln!(s, "  witness {:.3e}: {}", w.value, w.input);
    }
    s
}

pub fn verify(args: &VerifyArgs) -> CliResult<Outcome> {
    let automaton = load_automaton(&args.automaton)?;
    let n = automaton.dimension();
    let window = region_arg(&args.window, n)?;
    let max_active = args.max_active.unwrap_or(if n == 1 { 3 } else { 2 });
    let report = match args.check {
        CheckName::Unitarity => check_unitarity(&automaton, &window, args.margin)?,
        CheckName::Shift => check_shift_invariance(
            &automaton,
            &SampleSpec::new(window, max_active),
            args.samples,
            args.seed,
        )?,
        CheckName::Causality => check_causality(&automaton, None, None, args.samples, args.seed)?,
        CheckName::Commutation => match &automaton {
            Automaton64::Multilayer(m) => check_commutation(m.block(), state_cap(), args.seed)?,
            other => {
                return Err(CliError::Usage(format!(
                    "the commutation check applies to multilayer automata, found {}",
                    other.kind()
                )))
            }
        },
    };
    if let Some(path) = &args.report {
        write_json(
            path,
            &VerifyDocument {
                command: "verify",
                check: args.check,
                kind: automaton.kind(),
                seed: args.seed,
                samples: args.samples,
                report: &report,
            },
        )?;
    }
    Ok(Outcome {
        passed: report.passed,
        summary: describe_check(&report),
    })
}

#[derive(Debug, Serialize)]
struct SimulationDocument<'a> {
    command: &'static str,
    mode: &'static str,
    region: &'a Region,
    max_active: usize,
    report: &'a SimulationReport,
}

fn describe_simulation(r: &SimulationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}: {}", r.name, if r.passed { "PASS" } else { "FAIL" });
    let _ = writeln!(
        s,
        "  steps {}, samples {}, seed {}, step ratio {}",
        r.steps, r.samples, r.seed, r.step_ratio
    );
    let _ = writeln!(
        s,
        "  worst fidelity {:.12} (tolerance {:.1e})",
        r.worst_fidelity(),
        r.tolerance
    );
    let _ = writeln!(s, "  worst largest Schmidt coefficient {:.12}", r.worst_schmidt());
    let _ = writeln!(s, "  garbage independent of input: {}", r.garbage_independent);
    s
}

pub fn check_sim(args: &CheckSimArgs) -> CliResult<Outcome> {
    let source = load_automaton(&args.source)?;
    let target = load_automaton(&args.target)?;
    let (coding, meta) = load_coding(&args.coding)?;
    let n = source.dimension();
    let region = region_arg(&args.region, n)?;
    let max_active = args.max_active.unwrap_or(if n == 1 { 2 } else { 1 });
    let config = SimulationConfig {
        steps: args.steps,
        samples: args.samples,
        seed: args.seed,
        inputs: SampleSpec::new(region.clone(), max_active),
    };
    let (mode, report) = match meta {
        Some(meta) => {
            let result = LoweringResult64 {
                target,
                coding,
                source_grouping: meta.source,
                target_grouping: meta.target,
                step_ratio: meta.step_ratio,
            };
            let report = match args.ratio {
                Some(r) => check_intrinsic_simulation_at_ratio(&source, &result, r, &config)?,
                None => check_intrinsic_simulation(&source, &result, &config)?,
            };
            ("intrinsic", report)
        }
        None => {
            if args.ratio.is_some() {
                return Err(CliError::Usage("--ratio needs a coding with grouping metadata".into()));
            }
            ("direct", check_direct_simulation(&source, &target, &coding, &config)?)
        }
    };
    if let Some(path) = &args.report {
        write_json(
            path,
            &SimulationDocument {
                command: "check-sim",
                mode,
                region: &region,
                max_active,
                report: &report,
            },
        )?;
    }
    Ok(Outcome {
        passed: report.passed,
        summary: describe_simulation(&report),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regions_parse_in_one_and_two_dimensions() {
        assert_eq!(
            parse_region("-2:1", 1).unwrap(),
            Region::new(vec![-2], vec![1]).unwrap()
        );
        assert_eq!(parse_region("0,0:1, 1", 2).unwrap(), Region::cube(2, 0, 2).unwrap());
        assert!(parse_region("0:1", 2).is_err());
        assert!(parse_region("3:1", 1).is_err());
        assert!(parse_region("0-1", 1).is_err());
    }

    #[test]
    fn default_windows_shrink_with_dimension() {
        assert_eq!(default_region(1).unwrap().cell_count(), 4);
        assert_eq!(default_region(2).unwrap().cell_count(), 4);
        assert_eq!(default_region(3).unwrap().cell_count(), 1);
    }
}
