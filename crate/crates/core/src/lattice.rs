//! Finite configurations over `Z^n` and sparse superpositions of them.
//!
//! The infinite lattice is never materialised: a [`Configuration`] stores
//! only its non-quiescent cells, and a [`Superposition`] is a sparse map from
//! configurations to amplitudes.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Float;
use smallvec::SmallVec;

use crate::error::{QcaError, Result};
use crate::scalar::{one, tol, zero, Real};

/// Index of a letter inside its [`Alphabet`].
pub type Letter = u32;

/// Largest reduced density matrix [`partial_trace`] will build.
pub const MAX_REDUCED_DIM: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    letters: Vec<String>,
    quiescent: Letter,
}

impl Alphabet {
    pub fn new<S: Into<String>>(letters: impl IntoIterator<Item = S>, quiescent: usize) -> Result<Self> {
        let letters: Vec<String> = letters.into_iter().map(Into::into).collect();
        if letters.is_empty() {
            return Err(QcaError::InvalidAlphabet("no letters".into()));
        }
        if quiescent >= letters.len() {
            return Err(QcaError::LetterOutOfRange {
                letter: quiescent,
                size: letters.len(),
            });
        }
        if letters.len() > Letter::MAX as usize {
            return Err(QcaError::InvalidAlphabet("too many letters".into()));
        }
        let mut sorted: Vec<&String> = letters.iter().collect();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(QcaError::InvalidAlphabet(format!("duplicate letter name {:?}", w[0])));
        }
        Ok(Self {
            letters,
            quiescent: quiescent as Letter,
        })
    }

    /// Alphabet `q, a1, ..., a_{size-1}` with `q` quiescent.
    pub fn sized(size: usize) -> Result<Self> {
        Self::new(
            (0..size).map(|i| if i == 0 { "q".to_string() } else { format!("a{i}") }),
            0,
        )
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    #[inline]
    pub fn quiescent(&self) -> Letter {
        self.quiescent
    }

    pub fn letters(&self) -> &[String] {
        &self.letters
    }

    pub fn name(&self, letter: Letter) -> &str {
        &self.letters[letter as usize]
    }

    pub fn index_of(&self, name: &str) -> Option<Letter> {
        self.letters.iter().position(|l| l == name).map(|i| i as Letter)
    }

    pub fn check_letter(&self, letter: usize) -> Result<Letter> {
        if letter < self.len() {
            Ok(letter as Letter)
        } else {
            Err(QcaError::LetterOutOfRange {
                letter,
                size: self.len(),
            })
        }
    }
}

/// A lattice site `(i_1, ..., i_n)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Site(SmallVec<[i64; 2]>);

impl Site {
    pub fn new(coords: impl IntoIterator<Item = i64>) -> Self {
        Site(coords.into_iter().collect())
    }

    pub fn origin(n: usize) -> Self {
        Site(SmallVec::from_elem(0, n))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    #[inline]
    pub fn coords_mut(&mut self) -> &mut [i64] {
        &mut self.0
    }

    pub fn offset(&self, delta: &[i64]) -> Self {
        Site(self.0.iter().zip(delta).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Debug for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<&[i64]> for Site {
    fn from(c: &[i64]) -> Self {
        Site(SmallVec::from_slice(c))
    }
}

impl<const N: usize> From<[i64; N]> for Site {
    fn from(c: [i64; N]) -> Self {
        Site(SmallVec::from_slice(&c))
    }
}

/// A finite configuration: the non-quiescent cells, sorted by site.
///
/// Every cell not listed holds the quiescent letter. Because the list is
/// kept sorted and quiescent-free, structural equality is configuration
/// equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Configuration {
    entries: Vec<(Site, Letter)>,
}

impl Configuration {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a configuration from cells that are already sorted, distinct
    /// and non-quiescent.
    pub(crate) fn from_sorted(entries: Vec<(Site, Letter)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        Self { entries }
    }

    /// Sorts, drops quiescent cells and collapses duplicates (last wins).
    pub(crate) fn from_unsorted(mut entries: Vec<(Site, Letter)>, quiescent: Letter) -> Self {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Site, Letter)> = Vec::with_capacity(entries.len());
        for (site, letter) in entries {
            match out.last_mut() {
                Some(last) if last.0 == site => last.1 = letter,
                _ => out.push((site, letter)),
            }
        }
        out.retain(|(_, l)| *l != quiescent);
        Self { entries: out }
    }

    #[inline]
    pub fn entries(&self) -> &[(Site, Letter)] {
        &self.entries
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Letter at `site`, or `None` when the cell is quiescent.
    pub fn get(&self, site: &Site) -> Option<Letter> {
        self.entries
            .binary_search_by(|(s, _)| s.cmp(site))
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn letter_at(&self, site: &Site, quiescent: Letter) -> Letter {
        self.get(site).unwrap_or(quiescent)
    }

    pub fn sites(&self) -> impl Iterator<Item = &Site> {
        self.entries.iter().map(|(s, _)| s)
    }

    /// Translates every cell by `delta`; the lexicographic order is invariant
    /// under translation so no re-sort is needed.
    pub fn translated(&self, delta: &[i64]) -> Self {
        Self {
            entries: self.entries.iter().map(|(s, l)| (s.offset(delta), *l)).collect(),
        }
    }

    /// Disjoint union of two configurations; cells of `other` win on overlap.
    pub fn merged(&self, other: &Configuration) -> Self {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() || j < other.entries.len() {
            match (self.entries.get(i), other.entries.get(j)) {
                (Some(a), Some(b)) => match a.0.cmp(&b.0) {
                    std::cmp::Ordering::Less => {
                        out.push(a.clone());
                        i += 1;
                    }
                    std::cmp::Ordering::Greater => {
                        out.push(b.clone());
                        j += 1;
                    }
                    std::cmp::Ordering::Equal => {
                        out.push(b.clone());
                        i += 1;
                        j += 1;
                    }
                },
                (Some(a), None) => {
                    out.push(a.clone());
                    i += 1;
                }
                (None, Some(b)) => {
                    out.push(b.clone());
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Self { entries: out }
    }

    /// Splits into the cells inside and outside `region` (sorted site list).
    pub fn split(&self, region: &[Site]) -> (Configuration, Configuration) {
        let (inside, outside): (Vec<_>, Vec<_>) = self
            .entries
            .iter()
            .cloned()
            .partition(|(s, _)| region.binary_search(s).is_ok());
        (Self { entries: inside }, Self { entries: outside })
    }

    /// Per-axis inclusive bounding box of the support.
    pub fn bounding_box(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        let first = self.entries.first()?;
        let mut lo = first.0.coords().to_vec();
        let mut hi = lo.clone();
        for (s, _) in &self.entries {
            for (k, &c) in s.coords().iter().enumerate() {
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c);
            }
        }
        Some((lo, hi))
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries.iter().map(|(s, l)| (s, l))).finish()
    }
}

/// Builds a canonical configuration, dropping quiescent entries.
pub fn make_configuration(
    n: usize,
    entries: impl IntoIterator<Item = (Site, usize)>,
    alphabet: &Alphabet,
) -> Result<Configuration> {
    let mut cells = Vec::new();
    for (site, letter) in entries {
        if site.dim() != n {
            return Err(QcaError::DimensionMismatch {
                expected: n,
                found: site.dim(),
            });
        }
        cells.push((site, alphabet.check_letter(letter)?));
    }
    Ok(Configuration::from_unsorted(cells, alphabet.quiescent()))
}

/// A finite superposition of configurations.
#[derive(Clone, PartialEq)]
pub struct Superposition<T: Real> {
    n: usize,
    alphabet: Arc<Alphabet>,
    terms: BTreeMap<Configuration, Complex<T>>,
}

impl<T: Real> fmt::Debug for Superposition<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Superposition")
            .field("n", &self.n)
            .field("terms", &self.terms)
            .finish()
    }
}

impl<T: Real> Superposition<T> {
    /// The state with every cell quiescent.
    pub fn quiescent(n: usize, alphabet: Arc<Alphabet>) -> Self {
        Self::basis(n, alphabet, Configuration::empty())
    }

    pub fn basis(n: usize, alphabet: Arc<Alphabet>, config: Configuration) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(config, one());
        Self { n, alphabet, terms }
    }

    /// Builds a superposition and checks it has unit norm within
    /// [`tol::NORM`]. Repeated configurations are summed.
    pub fn from_terms(
        n: usize,
        alphabet: Arc<Alphabet>,
        terms: impl IntoIterator<Item = (Configuration, Complex<T>)>,
    ) -> Result<Self> {
        Self::from_terms_with_tolerance(n, alphabet, terms, tol::NORM)
    }

    pub fn from_terms_with_tolerance(
        n: usize,
        alphabet: Arc<Alphabet>,
        terms: impl IntoIterator<Item = (Configuration, Complex<T>)>,
        tolerance: f64,
    ) -> Result<Self> {
        let state = Self::from_terms_unnormalized(n, alphabet, terms)?;
        let norm = Float::sqrt(state.norm_sqr()).to_f64_lossy();
        if (norm - 1.0).abs() > tolerance {
            return Err(QcaError::NotNormalized { norm });
        }
        Ok(state)
    }

    /// Like [`Self::from_terms`] but rescales to unit norm.
    pub fn normalized(
        n: usize,
        alphabet: Arc<Alphabet>,
        terms: impl IntoIterator<Item = (Configuration, Complex<T>)>,
    ) -> Result<Self> {
        let mut state = Self::from_terms_unnormalized(n, alphabet, terms)?;
        let norm = Float::sqrt(state.norm_sqr());
        if norm.is_zero() {
            return Err(QcaError::NotNormalized { norm: 0.0 });
        }
        for a in state.terms.values_mut() {
            *a /= norm;
        }
        Ok(state)
    }

    /// Builds a vector without any norm check. Used for intermediate
    /// quantities (differences, projections) that are not states.
    pub fn from_terms_unnormalized(
        n: usize,
        alphabet: Arc<Alphabet>,
        terms: impl IntoIterator<Item = (Configuration, Complex<T>)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<Configuration, Complex<T>> = BTreeMap::new();
        for (c, a) in terms {
            for (s, l) in c.entries() {
                if s.dim() != n {
                    return Err(QcaError::DimensionMismatch {
                        expected: n,
                        found: s.dim(),
                    });
                }
                alphabet.check_letter(*l as usize)?;
            }
            *map.entry(c).or_insert_with(zero) += a;
        }
        Ok(Self {
            n,
            alphabet,
            terms: map,
        })
    }

    pub(crate) fn from_map(n: usize, alphabet: Arc<Alphabet>, terms: BTreeMap<Configuration, Complex<T>>) -> Self {
        Self { n, alphabet, terms }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    #[inline]
    pub fn alphabet_arc(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    #[inline]
    pub fn terms(&self) -> &BTreeMap<Configuration, Complex<T>> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<Configuration, Complex<T>> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn amplitude(&self, c: &Configuration) -> Complex<T> {
        self.terms.get(c).copied().unwrap_or_else(zero)
    }

    pub fn norm_sqr(&self) -> T {
        self.terms.values().fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    /// Drops amplitudes with modulus below `floor`.
    pub fn pruned(mut self, floor: T) -> Self {
        self.terms.retain(|_, a| a.norm() >= floor);
        self
    }

    /// Multiplies every amplitude by `factor`.
    pub fn scaled(mut self, factor: Complex<T>) -> Self {
        for a in self.terms.values_mut() {
            *a *= factor;
        }
        self
    }

    pub fn is_quiescent(&self) -> bool {
        self.terms.iter().all(|(c, a)| c.is_empty() || a.norm_sqr().is_zero())
    }

    /// Bounding box of the union of all supports.
    pub fn bounding_box(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        let mut acc: Option<(Vec<i64>, Vec<i64>)> = None;
        for c in self.terms.keys() {
            if let Some((lo, hi)) = c.bounding_box() {
                acc = Some(match acc {
                    None => (lo, hi),
                    Some((alo, ahi)) => (
                        alo.iter().zip(&lo).map(|(a, b)| *a.min(b)).collect(),
                        ahi.iter().zip(&hi).map(|(a, b)| *a.max(b)).collect(),
                    ),
                });
            }
        }
        acc
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(QcaError::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        if !Arc::ptr_eq(&self.alphabet, &other.alphabet) && *self.alphabet != *other.alphabet {
            return Err(QcaError::AlphabetMismatch(
                "superpositions are over different alphabets".into(),
            ));
        }
        Ok(())
    }

    /// Euclidean distance `|| self - other ||`.
    pub fn distance(&self, other: &Self) -> Result<T> {
        self.check_compatible(other)?;
        let mut acc = T::zero();
        for (c, a) in &self.terms {
            acc += (*a - other.amplitude(c)).norm_sqr();
        }
        for (c, b) in &other.terms {
            if !self.terms.contains_key(c) {
                acc += b.norm_sqr();
            }
        }
        Ok(Float::sqrt(acc))
    }

    /// `|<self|other>|^2`, insensitive to global phase.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        Ok(inner_product(self, other)?.norm_sqr())
    }
}

/// `<a|b>` summed over the configurations both states share.
pub fn inner_product<T: Real>(a: &Superposition<T>, b: &Superposition<T>) -> Result<Complex<T>> {
    a.check_compatible(b)?;
    let (small, large, conj_small) = if a.len() <= b.len() {
        (a, b, true)
    } else {
        (b, a, false)
    };
    let mut acc = zero();
    for (c, x) in &small.terms {
        if let Some(y) = large.terms.get(c) {
            acc += if conj_small { x.conj() * y } else { y.conj() * x };
        }
    }
    Ok(acc)
}

/// Translates the state along `axis` (zero-based): the content at coordinate
/// `i + amount` moves to `i`. `amount = 1` is the elementary shift.
pub fn shift<T: Real>(state: &Superposition<T>, axis: usize, amount: i64) -> Result<Superposition<T>> {
    if axis >= state.n {
        return Err(QcaError::InvalidAxis { axis, n: state.n });
    }
    let mut delta = vec![0; state.n];
    delta[axis] = -amount;
    Ok(translate(state, &delta))
}

/// Translates every configuration by `delta` (content at `x` moves to
/// `x + delta`).
pub fn translate<T: Real>(state: &Superposition<T>, delta: &[i64]) -> Superposition<T> {
    let terms = state.terms.iter().map(|(c, a)| (c.translated(delta), *a)).collect();
    Superposition::from_map(state.n, state.alphabet.clone(), terms)
}

/// Inclusive axis-aligned box of sites.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Region {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl Region {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(QcaError::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if lo.is_empty() || lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(QcaError::EmptyRegion);
        }
        Ok(Self { lo, hi })
    }

    /// The cube `[origin, origin + side - 1]^n`.
    pub fn cube(n: usize, origin: i64, side: i64) -> Result<Self> {
        Self::new(vec![origin; n], vec![origin + side - 1; n])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn cell_count(&self) -> usize {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (b - a + 1) as usize)
            .product()
    }

    pub fn expanded(&self, margin: i64) -> Self {
        Self {
            lo: self.lo.iter().map(|x| x - margin).collect(),
            hi: self.hi.iter().map(|x| x + margin).collect(),
        }
    }

    pub fn contains(&self, site: &Site) -> bool {
        site.coords()
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (a, b))| a <= x && x <= b)
    }

    /// Sites in lexicographic order, axis 0 most significant.
    pub fn sites(&self) -> Vec<Site> {
        let n = self.dim();
        let mut out = Vec::with_capacity(self.cell_count());
        let mut cur = self.lo.clone();
        loop {
            out.push(Site::from(cur.as_slice()));
            let mut k = n;
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                if cur[k] < self.hi[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = self.lo[k];
            }
        }
    }

    /// Whether every configuration of `state` lies inside.
    pub fn holds<T: Real>(&self, state: &Superposition<T>) -> bool {
        state.terms().keys().all(|c| c.sites().all(|s| self.contains(s)))
    }
}

/// Density matrix of a region, obtained by tracing out every other site.
#[derive(Debug, Clone)]
pub struct ReducedState<T: Real> {
    region: Vec<Site>,
    letters: usize,
    matrix: DMatrix<Complex<T>>,
}

impl<T: Real> ReducedState<T> {
    /// Sorted, duplicate-free region; index order of the matrix follows it
    /// with the first site most significant.
    pub fn region(&self) -> &[Site] {
        &self.region
    }

    pub fn matrix(&self) -> &DMatrix<Complex<T>> {
        &self.matrix
    }

    pub fn letters(&self) -> usize {
        self.letters
    }

    pub fn trace(&self) -> Complex<T> {
        self.matrix.trace()
    }

    pub fn purity(&self) -> T {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Largest entry of `|rho - rho^dagger|`.
    pub fn hermiticity_defect(&self) -> T {
        let d = &self.matrix - self.matrix.adjoint();
        d.iter().fold(T::zero(), |m, z| Float::max(m, z.norm()))
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        let herm = (&self.matrix + self.matrix.adjoint()).map(|z| z * T::of(0.5));
        let mut ev: Vec<T> = herm.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        ev
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues().into_iter().fold(T::infinity(), Float::min)
    }

    /// `1/2 || self - other ||_1`.
    pub fn trace_distance(&self, other: &Self) -> Result<T> {
        if self.region != other.region || self.letters != other.letters {
            return Err(QcaError::InvalidParameter(
                "reduced states over different regions".into(),
            ));
        }
        let d = &self.matrix - &other.matrix;
        let herm = (&d + d.adjoint()).map(|z| z * T::of(0.5));
        let ev = herm.symmetric_eigen().eigenvalues;
        Ok(ev.iter().fold(T::zero(), |acc, e| acc + Float::abs(*e)) * T::of(0.5))
    }

    /// Kronecker product, valid as the reduced state on the union when every
    /// site of `self` sorts before every site of `other`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut region = self.region.clone();
        region.extend(other.region.iter().cloned());
        Self {
            region,
            letters: self.letters,
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }
}

/// Reduced density matrix of `state` on `region`.
pub fn partial_trace<T: Real>(state: &Superposition<T>, region: &[Site]) -> Result<ReducedState<T>> {
    if region.is_empty() {
        return Err(QcaError::EmptyRegion);
    }
    for s in region {
        if s.dim() != state.n {
            return Err(QcaError::DimensionMismatch {
                expected: state.n,
                found: s.dim(),
            });
        }
    }
    let mut sites = region.to_vec();
    sites.sort();
    sites.dedup();
    let letters = state.alphabet.len();
    let dim = (letters as u128).pow(sites.len() as u32);
    if dim > MAX_REDUCED_DIM as u128 {
        return Err(QcaError::CapExceeded {
            dim,
            cap: MAX_REDUCED_DIM,
        });
    }
    let dim = dim as usize;
    let q = state.alphabet.quiescent();

    // Group amplitudes by the configuration outside the region.
    let mut blocks: BTreeMap<Configuration, Vec<(usize, Complex<T>)>> = BTreeMap::new();
    for (c, a) in &state.terms {
        let (inside, outside) = c.split(&sites);
        let mut idx = 0usize;
        for s in &sites {
            idx = idx * letters + inside.letter_at(s, q) as usize;
        }
        blocks.entry(outside).or_default().push((idx, *a));
    }
    let mut rho = DMatrix::from_element(dim, dim, zero::<T>());
    for vec in blocks.values() {
        for (i, ai) in vec {
            for (j, aj) in vec {
                rho[(*i, *j)] += ai * aj.conj();
            }
        }
    }
    Ok(ReducedState {
        region: sites,
        letters,
        matrix: rho,
    })
}
