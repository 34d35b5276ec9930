//! Finite atomic measure spaces, partitions and the conditional expectation.
//!
//! On a finite atomic space every sub-σ-algebra is generated by a partition
//! of the atoms, and conditioning on it is the μ-weighted average over each
//! block:
//!
//! ```text
//! E(f)|_B = (Σ_{i∈B} f_i μ_i) / (Σ_{i∈B} μ_i)
//! ```
//!
//! Everything here is an immutable value type.

use std::collections::HashSet;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};

/// Relative tolerance used for support sets unless a caller overrides it.
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-12;

/// A finite set of atoms with strictly positive masses.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpace {
    atoms: Vec<String>,
    mu: Vec<f64>,
}

impl MeasureSpace {
    pub fn new(atoms: Vec<String>, mu: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        check_dim(atoms.len(), mu.len())?;
        if let Some((i, m)) = mu.iter().enumerate().find(|(_, m)| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::InvalidMeasure(format!(
                "atom {} has non-positive or non-finite mass {m}",
                atoms[i]
            )));
        }
        let mut seen = HashSet::new();
        for a in &atoms {
            if !seen.insert(a.as_str()) {
                return Err(Error::InvalidMeasure(format!("duplicate atom id {a:?}")));
            }
        }
        Ok(Self { atoms, mu })
    }

    /// Atoms named `x1, x2, ...` with the given masses.
    pub fn with_weights(mu: Vec<f64>) -> Result<Self> {
        let atoms = (1..=mu.len()).map(|i| format!("x{i}")).collect();
        Self::new(atoms, mu)
    }

    /// `n` atoms of mass `1/n`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        Self::with_weights(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn atom(&self, i: usize) -> &str {
        &self.atoms[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a == id)
    }

    pub fn total(&self) -> f64 {
        self.mu.iter().sum()
    }

    pub fn measure_of(&self, idx: &[usize]) -> f64 {
        idx.iter().map(|&i| self.mu[i]).sum()
    }
}

/// A sub-σ-algebra, stored as the partition of atom indices that generates it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl Partition {
    /// Validates that `blocks` is a disjoint cover of `0..n` with no empty block.
    /// Atom indices inside each block are sorted; block order is kept.
    pub fn new(mut blocks: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut block_of = vec![usize::MAX; n];
        for (b, block) in blocks.iter_mut().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition(format!("block {b} is empty")));
            }
            block.sort_unstable();
            for &i in block.iter() {
                if i >= n {
                    return Err(Error::InvalidPartition(format!("atom index {i} out of range")));
                }
                if block_of[i] != usize::MAX {
                    return Err(Error::InvalidPartition(format!("atom index {i} appears twice")));
                }
                block_of[i] = b;
            }
        }
        if let Some(i) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::InvalidPartition(format!("atom index {i} is not covered")));
        }
        Ok(Self { blocks, block_of })
    }

    /// The trivial algebra {∅, X}: one block.
    pub fn trivial(n: usize) -> Self {
        Self::new(vec![(0..n).collect()], n).expect("trivial partition")
    }

    /// The full algebra Σ: every atom on its own.
    pub fn discrete(n: usize) -> Self {
        Self::new((0..n).map(|i| vec![i]).collect(), n).expect("discrete partition")
    }

    /// Builds a partition from a block label per atom. Blocks are ordered by
    /// first appearance.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut order: Vec<usize> = Vec::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (i, l) in labels.iter().enumerate() {
            match order.iter().position(|o| o == l) {
                Some(b) => blocks[b].push(i),
                None => {
                    order.push(*l);
                    blocks.push(vec![i]);
                }
            }
        }
        Self::new(blocks, labels.len()).expect("labels give a valid partition")
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn num_atoms(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_of(&self, atom: usize) -> usize {
        self.block_of[atom]
    }

    pub fn block_containing(&self, atom: usize) -> &[usize] {
        &self.blocks[self.block_of[atom]]
    }

    pub fn is_discrete(&self) -> bool {
        self.blocks.len() == self.block_of.len()
    }
}

/// A complex-valued function on the atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Func(Vec<Complex64>);

impl Func {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self(values)
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        Self(vec![c; n])
    }

    pub fn ones(n: usize) -> Self {
        Self::constant(n, Complex64::new(1.0, 0.0))
    }

    /// The indicator of `idx` in a space of `n` atoms.
    pub fn indicator(n: usize, idx: &[usize]) -> Self {
        let mut f = Self::zeros(n);
        for &i in idx {
            f.0[i] = Complex64::new(1.0, 0.0);
        }
        f
    }

    pub fn basis(n: usize, j: usize) -> Self {
        Self::indicator(n, &[j])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.0
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self(self.0.iter().map(|&z| f(z)).collect())
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    /// `|f|²` as a (real-valued) function.
    pub fn abs_sq(&self) -> Self {
        self.map(|z| Complex64::new(z.norm_sqr(), 0.0))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|z| z * c)
    }

    /// Keeps values on `idx`, zero elsewhere.
    pub fn restrict(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(self.len());
        for &i in idx {
            out.0[i] = self.0[i];
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest coordinatewise distance.
    pub fn dist_max(&self, other: &Func) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for Func {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl Mul for &Func {
    type Output = Func;
    fn mul(self, rhs: &Func) -> Func {
        assert_eq!(self.len(), rhs.len(), "pointwise product of functions on different spaces");
        Func(self.0.iter().zip(&rhs.0).map(|(a, b)| a * b).collect())
    }
}

impl Add for &Func {
    type Output = Func;
    fn add(self, rhs: &Func) -> Func {
        assert_eq!(self.len(), rhs.len(), "sum of functions on different spaces");
        Func(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Func {
    type Output = Func;
    fn sub(self, rhs: &Func) -> Func {
        assert_eq!(self.len(), rhs.len(), "difference of functions on different spaces");
        Func(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

/// A set of atom indices, stored as a membership mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomSet(Vec<bool>);

impl AtomSet {
    pub fn from_mask(mask: Vec<bool>) -> Self {
        Self(mask)
    }

    pub fn full(n: usize) -> Self {
        Self(vec![true; n])
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn indices(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }

    pub fn len(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.0.iter().any(|&b| b)
    }

    /// True when every atom of the space belongs to the set.
    pub fn is_full(&self) -> bool {
        self.0.iter().all(|&b| b)
    }

    pub fn intersect(&self, other: &AtomSet) -> AtomSet {
        AtomSet(self.0.iter().zip(&other.0).map(|(a, b)| *a && *b).collect())
    }

    pub fn is_subset(&self, other: &AtomSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| !*a || *b)
    }

    pub fn mask(&self) -> &[bool] {
        &self.0
    }
}

/// `E^A f`, the μ-weighted block average.
pub fn cond_exp(f: &Func, partition: &Partition, space: &MeasureSpace) -> Result<Func> {
    check_dim(space.len(), f.len())?;
    check_dim(space.len(), partition.num_atoms())?;
    let mu = space.mu();
    let mut out = Func::zeros(f.len());
    for block in partition.blocks() {
        let mass: f64 = block.iter().map(|&i| mu[i]).sum();
        let integral: Complex64 = block.iter().map(|&i| f[i] * mu[i]).sum();
        let avg = integral / mass;
        for &i in block {
            out.0[i] = avg;
        }
    }
    Ok(out)
}

/// `⟨f, g⟩ = Σ f_i conj(g_i) μ_i`.
pub fn inner(f: &Func, g: &Func, space: &MeasureSpace) -> Result<Complex64> {
    check_dim(space.len(), f.len())?;
    check_dim(space.len(), g.len())?;
    Ok(f.0.iter().zip(&g.0).zip(space.mu()).map(|((a, b), m)| a * b.conj() * m).sum())
}

pub fn norm(f: &Func, space: &MeasureSpace) -> Result<f64> {
    Ok(inner(f, f, space)?.re.max(0.0).sqrt())
}

/// `∫ f dμ`.
pub fn integral(f: &Func, space: &MeasureSpace) -> Result<Complex64> {
    check_dim(space.len(), f.len())?;
    Ok(f.0.iter().zip(space.mu()).map(|(a, m)| a * m).sum())
}

/// Atoms where `|f_i| > tol`.
pub fn support(f: &Func, tol: f64) -> AtomSet {
    AtomSet(f.0.iter().map(|z| z.norm() > tol).collect())
}

/// Support with the threshold taken relative to the largest value of `f`.
pub fn support_rel(f: &Func, rel_tol: f64) -> AtomSet {
    support(f, rel_tol * f.max_abs())
}

/// True if `f` is constant on every block (within `tol` relative to `max|f|`).
pub fn is_measurable(f: &Func, partition: &Partition, tol: f64) -> bool {
    let scale = f.max_abs().max(f64::MIN_POSITIVE);
    partition.blocks().iter().all(|block| {
        let first = f[block[0]];
        block.iter().all(|&i| (f[i] - first).norm() <= tol * scale)
    })
}

/// The block-constant conditional moments of a pair `(u, w)` and their supports.
#[derive(Debug, Clone, PartialEq)]
pub struct CondData {
    /// `E(|u|²)`
    pub eu2: Func,
    /// `E(|w|²)`
    pub ew2: Func,
    /// `E(uw)`
    pub euw: Func,
    /// `E(u)`
    pub eu: Func,
    /// Support of `E(|u|²)`.
    pub s: AtomSet,
    /// Support of `E(|w|²)`.
    pub g: AtomSet,
    /// Support of `E(uw)`.
    pub s0: AtomSet,
}

impl CondData {
    pub fn eu2_at(&self, i: usize) -> f64 {
        if self.s.contains(i) { self.eu2[i].re } else { 0.0 }
    }

    pub fn ew2_at(&self, i: usize) -> f64 {
        if self.g.contains(i) { self.ew2[i].re } else { 0.0 }
    }

    /// `E(uw)` with off-support values set to exactly zero.
    pub fn euw_at(&self, i: usize) -> Complex64 {
        if self.s0.contains(i) { self.euw[i] } else { Complex64::new(0.0, 0.0) }
    }

    pub fn abs_euw_sq_at(&self, i: usize) -> f64 {
        self.euw_at(i).norm_sqr()
    }

    pub fn abs_eu_sq_at(&self, i: usize) -> f64 {
        if self.s.contains(i) { self.eu[i].norm_sqr() } else { 0.0 }
    }
}

/// Computes [`CondData`] and checks the conditional Cauchy–Schwarz inequality
/// `|E(uw)|² ≤ E(|u|²)E(|w|²)`.
pub fn cond_data(
    u: &Func,
    w: &Func,
    partition: &Partition,
    space: &MeasureSpace,
    tol: f64,
) -> Result<CondData> {
    check_dim(space.len(), u.len())?;
    check_dim(space.len(), w.len())?;
    let eu2 = cond_exp(&u.abs_sq(), partition, space)?;
    let ew2 = cond_exp(&w.abs_sq(), partition, space)?;
    let euw = cond_exp(&(u * w), partition, space)?;
    let eu = cond_exp(u, partition, space)?;
    let s = support_rel(&eu2, tol);
    let g = support_rel(&ew2, tol);
    // |E(uw)| ≤ √(E|u|²·E|w|²), and its roundoff is proportional to that bound.
    let s0 = AtomSet(
        (0..space.len())
            .map(|i| s.contains(i) && g.contains(i) && euw[i].norm() > tol * (eu2[i].re * ew2[i].re).sqrt())
            .collect(),
    );

    for i in 0..space.len() {
        let lhs = euw[i].norm_sqr();
        let rhs = eu2[i].re * ew2[i].re;
        if lhs > rhs * (1.0 + 1e-9) + 1e-300 {
            return Err(Error::Invariant(format!(
                "conditional Cauchy-Schwarz fails at atom {}: |E(uw)|^2 = {lhs} > {rhs}",
                space.atom(i)
            )));
        }
    }
    Ok(CondData { eu2, ew2, euw, eu, s, g, s0 })
}
