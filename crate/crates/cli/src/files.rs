//! JSON schemas for automata, states and codings, and their conversion to
//! and from the core types. All numbers are `f64`; complex numbers are
//! `[re, im]` pairs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex;
use qca_core::automata::pair_alphabet;
use qca_core::block::Word;
use qca_core::coding::{Decoder, Grouping, Tiling};
use qca_core::lattice::make_configuration;
use qca_core::{
    Alphabet, Automaton64, BlockUnitary64, Bqca, IsometricCoding64, LoweringResult64, MultilayerQca, Pqca, Site,
    Superposition64,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const FORMAT_VERSION: u32 = 1;

/// Block matrices up to this size are written densely, larger ones as
/// sparse columns.
pub const DENSE_EMIT_LIMIT: u64 = 64;

/// Accepted deviation of an input state's norm from 1.
pub const INPUT_NORM_TOLERANCE: f64 = 1e-6;

pub type Pair = [f64; 2];

fn pair(z: Complex<f64>) -> Pair {
    [z.re, z.im]
}

fn complex(p: Pair) -> Complex<f64> {
    Complex::new(p[0], p[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphabetSpec {
    pub letters: Vec<String>,
    pub quiescent: String,
}

impl AlphabetSpec {
    pub fn of(a: &Alphabet) -> Self {
        Self {
            letters: a.letters().to_vec(),
            quiescent: a.name(a.quiescent()).to_string(),
        }
    }

    pub fn build(&self) -> Result<Alphabet, String> {
        let q = self.letters.iter().position(|l| *l == self.quiescent).ok_or_else(|| {
            format!(
                "alphabet: quiescent letter {:?} is not among the letters",
                self.quiescent
            )
        })?;
        Alphabet::new(self.letters.iter().cloned(), q).map_err(|e| format!("alphabet: {e}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Pqca,
    Bqca,
    Multilayer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparseColumn {
    pub column: u64,
    /// `[row, [re, im]]` pairs.
    pub entries: Vec<(u64, Pair)>,
}

/// Columns that differ from the identity; all others are unit columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparseMatrix {
    pub dim: u64,
    pub columns: Vec<SparseColumn>,
}

/// A block matrix: rows of `[re, im]` pairs, or the sparse form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Dense(Vec<Vec<Pair>>),
    Sparse(SparseMatrix),
}

impl MatrixSpec {
    pub fn of(u: &BlockUnitary64) -> Self {
        let dim = u.size();
        if dim <= DENSE_EMIT_LIMIT {
            let mut rows = vec![vec![[0.0, 0.0]; dim as usize]; dim as usize];
            for c in 0..dim {
                for (r, z) in u.column(c).iter() {
                    rows[*r as usize][c as usize] = pair(*z);
                }
            }
            MatrixSpec::Dense(rows)
        } else {
            MatrixSpec::Sparse(SparseMatrix {
                dim,
                columns: u
                    .overrides()
                    .iter()
                    .map(|(c, col)| SparseColumn {
                        column: *c,
                        entries: col.iter().map(|(r, z)| (*r, pair(*z))).collect(),
                    })
                    .collect(),
            })
        }
    }

    pub fn build(&self, n: usize, alphabet: Arc<Alphabet>) -> Result<BlockUnitary64, String> {
        let expected = qca_core::block::word_space(alphabet.len(), qca_core::block::block_cells(n))
            .ok_or_else(|| "block space too large".to_string())?;
        let mut columns: BTreeMap<u64, Vec<(u64, Complex<f64>)>> = BTreeMap::new();
        match self {
            MatrixSpec::Dense(rows) => {
                if rows.len() as u64 != expected {
                    return Err(format!("expected {expected} rows, found {}", rows.len()));
                }
                for (r, row) in rows.iter().enumerate() {
                    if row.len() as u64 != expected {
                        return Err(format!("row {r} has {} entries, expected {expected}", row.len()));
                    }
                    for (c, z) in row.iter().enumerate() {
                        let col = columns.entry(c as u64).or_default();
                        if z[0] != 0.0 || z[1] != 0.0 {
                            col.push((r as u64, complex(*z)));
                        }
                    }
                }
            }
            MatrixSpec::Sparse(m) => {
                if m.dim != expected {
                    return Err(format!("dim is {}, expected {expected}", m.dim));
                }
                for col in &m.columns {
                    if columns.contains_key(&col.column) {
                        return Err(format!("column {} listed twice", col.column));
                    }
                    columns.insert(col.column, col.entries.iter().map(|(r, z)| (*r, complex(*z))).collect());
                }
            }
        }
        BlockUnitary64::from_columns(n, alphabet, columns).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomatonFile {
    pub format_version: u32,
    pub n: usize,
    /// Cell alphabet; for multilayer automata the alphabet of one track.
    pub alphabet: AlphabetSpec,
    pub kind: Kind,
    /// `u` (pqca), `u0` and `u1` (bqca) or `k` (multilayer, over pairs of
    /// track letters).
    pub matrices: BTreeMap<String, MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub track_swap: Option<bool>,
}

fn version(v: u32) -> Result<(), String> {
    if v != FORMAT_VERSION {
        return Err(format!(
            "format_version: unsupported version {v} (expected {FORMAT_VERSION})"
        ));
    }
    Ok(())
}

impl AutomatonFile {
    pub fn of(a: &Automaton64) -> Self {
        let (alphabet, matrices, track_swap): (&Alphabet, Vec<(&str, &BlockUnitary64)>, _) = match a {
            Automaton64::Pqca(p) => (p.scattering().alphabet(), vec![("u", p.scattering())], None),
            Automaton64::Bqca(b) => (b.even().alphabet(), vec![("u0", b.even()), ("u1", b.odd())], None),
            Automaton64::Multilayer(m) => (m.tracks(), vec![("k", m.block())], Some(m.has_track_swap())),
        };
        let n = a.blocks()[0].dim();
        Self {
            format_version: FORMAT_VERSION,
            n,
            alphabet: AlphabetSpec::of(alphabet),
            kind: match a {
                Automaton64::Pqca(_) => Kind::Pqca,
                Automaton64::Bqca(_) => Kind::Bqca,
                Automaton64::Multilayer(_) => Kind::Multilayer,
            },
            matrices: matrices
                .into_iter()
                .map(|(k, u)| (k.to_string(), MatrixSpec::of(u)))
                .collect(),
            track_swap,
        }
    }

    pub fn build(&self) -> Result<Automaton64, String> {
        version(self.format_version)?;
        if self.n == 0 {
            return Err("n: must be at least 1".into());
        }
        let alphabet = Arc::new(self.alphabet.build()?);
        let keys: &[&str] = match self.kind {
            Kind::Pqca => &["u"],
            Kind::Bqca => &["u0", "u1"],
            Kind::Multilayer => &["k"],
        };
        let found: Vec<&str> = self.matrices.keys().map(String::as_str).collect();
        let mut wanted = keys.to_vec();
        wanted.sort();
        if found != wanted {
            return Err(format!("matrices: expected keys {wanted:?}, found {found:?}"));
        }
        if self.track_swap.is_some() && self.kind != Kind::Multilayer {
            return Err("track_swap: only meaningful for multilayer automata".into());
        }
        let block = |key: &str, alphabet: &Arc<Alphabet>| {
            self.matrices[key]
                .build(self.n, alphabet.clone())
                .map_err(|e| format!("matrices.{key}: {e}"))
        };
        let automaton = match self.kind {
            Kind::Pqca => Automaton64::Pqca(Pqca::new(block("u", &alphabet)?).map_err(|e| e.to_string())?),
            Kind::Bqca => Automaton64::Bqca(
                Bqca::new(block("u0", &alphabet)?, block("u1", &alphabet)?).map_err(|e| e.to_string())?,
            ),
            Kind::Multilayer => {
                let pairs = Arc::new(pair_alphabet(&alphabet).map_err(|e| format!("alphabet: {e}"))?);
                let k = block("k", &pairs)?;
                Automaton64::Multilayer(
                    MultilayerQca::with_track_swap(alphabet, k, self.track_swap.unwrap_or(true))
                        .map_err(|e| e.to_string())?,
                )
            }
        };
        Ok(automaton)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub amplitude: Pair,
    /// `"i1,...,in"` to letter name; omitted cells are quiescent.
    pub cells: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub format_version: u32,
    pub n: usize,
    pub alphabet: AlphabetSpec,
    pub terms: Vec<TermSpec>,
}

pub fn site_key(site: &Site) -> String {
    site.coords().iter().map(i64::to_string).collect::<Vec<_>>().join(",")
}

pub fn parse_site(key: &str, n: usize) -> Result<Site, String> {
    let coords: Vec<i64> = key
        .split(',')
        .map(|c| c.trim().parse::<i64>().map_err(|_| format!("bad site {key:?}")))
        .collect::<Result<_, _>>()?;
    if coords.len() != n {
        return Err(format!("site {key:?} has {} coordinates, expected {n}", coords.len()));
    }
    Ok(Site::new(coords))
}

impl StateFile {
    /// Terms in configuration order, so equal states give equal files.
    pub fn of(state: &Superposition64) -> Self {
        let alphabet = state.alphabet();
        Self {
            format_version: FORMAT_VERSION,
            n: state.dim(),
            alphabet: AlphabetSpec::of(alphabet),
            terms: state
                .terms()
                .iter()
                .map(|(c, z)| TermSpec {
                    amplitude: pair(*z),
                    cells: c
                        .entries()
                        .iter()
                        .map(|(s, l)| (site_key(s), alphabet.name(*l).to_string()))
                        .collect(),
                })
                .collect(),
        }
    }

    /// Builds the state; its norm must be within [`INPUT_NORM_TOLERANCE`]
    /// of 1 unless `renormalize` is set.
    pub fn build(&self, renormalize: bool) -> Result<Superposition64, String> {
        version(self.format_version)?;
        let alphabet = Arc::new(self.alphabet.build()?);
        let mut terms = Vec::with_capacity(self.terms.len());
        let mut seen = std::collections::BTreeSet::new();
        for (i, t) in self.terms.iter().enumerate() {
            let mut cells = Vec::with_capacity(t.cells.len());
            for (key, name) in &t.cells {
                let site = parse_site(key, self.n).map_err(|e| format!("terms[{i}].cells: {e}"))?;
                let letter = alphabet
                    .index_of(name)
                    .ok_or_else(|| format!("terms[{i}].cells.{key}: unknown letter {name:?}"))?;
                cells.push((site, letter as usize));
            }
            let config = make_configuration(self.n, cells, &alphabet).map_err(|e| format!("terms[{i}]: {e}"))?;
            if !seen.insert(config.clone()) {
                return Err(format!("terms[{i}]: configuration listed twice"));
            }
            terms.push((config, complex(t.amplitude)));
        }
        let state = if renormalize {
            Superposition64::normalized(self.n, alphabet, terms)
        } else {
            Superposition64::from_terms_with_tolerance(self.n, alphabet, terms, INPUT_NORM_TOLERANCE)
        };
        state.map_err(|e| format!("terms: {e}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageTerm {
    pub word: Vec<String>,
    pub amplitude: Pair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodingEntry {
    pub source: Vec<String>,
    pub image: Vec<ImageTerm>,
}

/// A supercell coding. The groupings and step ratio are present when the
/// file was emitted by a lowering pass and select intrinsic simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodingFile {
    pub format_version: u32,
    pub n: usize,
    pub source_alphabet: AlphabetSpec,
    pub target_alphabet: AlphabetSpec,
    pub source_tiling: Tiling,
    pub target_tiling: Tiling,
    pub decoder: Decoder,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_grouping: Option<Grouping>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_grouping: Option<Grouping>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_ratio: Option<usize>,
    pub table: Vec<CodingEntry>,
}

/// Groupings and step ratio of a lowering pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupingMeta {
    pub source: Grouping,
    pub target: Grouping,
    pub step_ratio: usize,
}

fn names(word: &[u32], a: &Alphabet) -> Vec<String> {
    word.iter().map(|l| a.name(*l).to_string()).collect()
}

fn letters(names: &[String], a: &Alphabet, what: &str) -> Result<Word, String> {
    names
        .iter()
        .map(|s| a.index_of(s).ok_or_else(|| format!("{what}: unknown letter {s:?}")))
        .collect()
}

impl CodingFile {
    pub fn of(coding: &IsometricCoding64, meta: Option<GroupingMeta>) -> Self {
        let (h, g) = (coding.alphabet_h(), coding.alphabet_g());
        Self {
            format_version: FORMAT_VERSION,
            n: coding.dim(),
            source_alphabet: AlphabetSpec::of(h),
            target_alphabet: AlphabetSpec::of(g),
            source_tiling: coding.tiling_h(),
            target_tiling: coding.tiling_g(),
            decoder: coding.decoder(),
            source_grouping: meta.map(|m| m.source),
            target_grouping: meta.map(|m| m.target),
            step_ratio: meta.map(|m| m.step_ratio),
            table: coding
                .table()
                .iter()
                .map(|(w, image)| CodingEntry {
                    source: names(w, h),
                    image: image
                        .iter()
                        .map(|(v, z)| ImageTerm {
                            word: names(v, g),
                            amplitude: pair(*z),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn of_lowering(result: &LoweringResult64) -> Self {
        Self::of(
            &result.coding,
            Some(GroupingMeta {
                source: result.source_grouping,
                target: result.target_grouping,
                step_ratio: result.step_ratio,
            }),
        )
    }

    pub fn build(&self) -> Result<(IsometricCoding64, Option<GroupingMeta>), String> {
        version(self.format_version)?;
        let h = Arc::new(self.source_alphabet.build().map_err(|e| format!("source_{e}"))?);
        let g = Arc::new(self.target_alphabet.build().map_err(|e| format!("target_{e}"))?);
        let mut table = BTreeMap::new();
        for (i, entry) in self.table.iter().enumerate() {
            let w = letters(&entry.source, &h, &format!("table[{i}].source"))?;
            let image = entry
                .image
                .iter()
                .enumerate()
                .map(|(j, t)| {
                    Ok((
                        letters(&t.word, &g, &format!("table[{i}].image[{j}].word"))?,
                        complex(t.amplitude),
                    ))
                })
                .collect::<Result<Vec<_>, String>>()?;
            if table.insert(w, image).is_some() {
                return Err(format!("table[{i}]: source word listed twice"));
            }
        }
        let coding = IsometricCoding64::new(
            self.n,
            h,
            self.source_tiling,
            g,
            self.target_tiling,
            table,
            self.decoder,
        )
        .map_err(|e| e.to_string())?;
        let meta = match (self.source_grouping, self.target_grouping, self.step_ratio) {
            (None, None, None) => None,
            (Some(source), Some(target), Some(step_ratio)) => Some(GroupingMeta {
                source,
                target,
                step_ratio,
            }),
            _ => return Err("source_grouping, target_grouping and step_ratio must be given together".into()),
        };
        Ok((coding, meta))
    }
}

/// Reads a JSON file, reporting the line, column and field path of a
/// syntax or schema error.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        let at = if field == "." || field == "?" {
            String::new()
        } else {
            format!(", field `{field}`")
        };
        let (line, column) = (inner.line(), inner.column());
        let message = inner.to_string();
        let message = message
            .strip_suffix(&format!(" at line {line} column {column}"))
            .unwrap_or(&message);
        CliError::parse(path, format!("line {line}, column {column}{at}: {message}"))
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("file schemas always serialize");
    text.push('\n');
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_automaton(path: &Path) -> CliResult<Automaton64> {
    let file: AutomatonFile = read_json(path)?;
    file.build().map_err(|m| CliError::parse(path, m))
}

pub fn load_state(path: &Path, renormalize: bool) -> CliResult<Superposition64> {
    let file: StateFile = read_json(path)?;
    file.build(renormalize).map_err(|m| CliError::parse(path, m))
}

pub fn load_coding(path: &Path) -> CliResult<(IsometricCoding64, Option<GroupingMeta>)> {
    let file: CodingFile = read_json(path)?;
    file.build().map_err(|m| CliError::parse(path, m))
}
