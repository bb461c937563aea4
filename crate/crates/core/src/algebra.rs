//! Arithmetic in `M = Z_m^r` over the scalar ring `Z_m`.
//!
//! Elements are totally ordered lexicographically on their coordinates. The
//! engine also addresses elements by a dense index in `0..m^r` whose numeric
//! order coincides with that lexicographic order (first coordinate most
//! significant), so comparing index vectors compares sequences.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::WeightConfig;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The ambient module `Z_m^r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModuleSpec {
    modulus: u32,
    rank: u32,
    cardinality: usize,
}

impl ModuleSpec {
    pub fn new(modulus: u32, rank: u32) -> Result<Self> {
        if modulus < 2 || rank < 1 {
            return Err(Error::InvalidModule { modulus, rank });
        }
        let cardinality = (modulus as usize)
            .checked_pow(rank)
            .ok_or(Error::CardinalityOverflow { modulus, rank })?;
        Ok(Self {
            modulus,
            rank,
            cardinality,
        })
    }

    pub fn cyclic(modulus: u32) -> Result<Self> {
        Self::new(modulus, 1)
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn zero(&self) -> Element {
        Element {
            coords: vec![0; self.rank as usize],
        }
    }

    /// Builds an element from arbitrary integers, reducing each mod `m`.
    pub fn element(&self, coords: &[i64]) -> Result<Element> {
        if coords.len() != self.rank as usize {
            return Err(Error::RankMismatch {
                expected: self.rank,
                got: coords.len(),
            });
        }
        Ok(Element {
            coords: coords.iter().map(|&c| self.reduce(c)).collect(),
        })
    }

    /// Rank-one convenience: a sequence of residues.
    pub fn sequence(&self, values: &[i64]) -> Result<Sequence> {
        values
            .iter()
            .map(|&v| self.element(&[v]))
            .collect::<Result<Vec<_>>>()
            .map(Sequence::new)
    }

    pub fn reduce(&self, value: i64) -> u32 {
        value.rem_euclid(self.modulus as i64) as u32
    }

    pub fn scalar(&self, value: i64) -> Scalar {
        Scalar(self.reduce(value))
    }

    pub fn is_unit(&self, u: u32) -> bool {
        gcd(u as u64, self.modulus as u64) == 1
    }

    pub fn units(&self) -> Vec<u32> {
        (1..self.modulus).filter(|&u| self.is_unit(u)).collect()
    }

    pub fn inverse(&self, u: u32) -> Option<u32> {
        (1..self.modulus).find(|&v| (u as u64 * v as u64) % self.modulus as u64 == 1)
    }

    pub fn contains(&self, x: &Element) -> bool {
        x.coords.len() == self.rank as usize && x.coords.iter().all(|&c| c < self.modulus)
    }

    pub fn check(&self, x: &Element) -> Result<()> {
        if x.coords.len() != self.rank as usize {
            return Err(Error::RankMismatch {
                expected: self.rank,
                got: x.coords.len(),
            });
        }
        if !self.contains(x) {
            return Err(Error::InvalidWitness(format!(
                "element {x} is not reduced mod {}",
                self.modulus
            )));
        }
        Ok(())
    }

    pub fn add(&self, x: &Element, y: &Element) -> Element {
        let m = self.modulus;
        Element {
            coords: x
                .coords
                .iter()
                .zip(&y.coords)
                .map(|(&a, &b)| (a + b) % m)
                .collect(),
        }
    }

    pub fn neg(&self, x: &Element) -> Element {
        let m = self.modulus;
        Element {
            coords: x.coords.iter().map(|&a| (m - a) % m).collect(),
        }
    }

    pub fn scale_element(&self, u: u32, x: &Element) -> Element {
        let m = self.modulus as u64;
        Element {
            coords: x
                .coords
                .iter()
                .map(|&a| ((u as u64 * a as u64) % m) as u32)
                .collect(),
        }
    }

    // Dense index arithmetic.

    pub fn index_of(&self, x: &Element) -> usize {
        x.coords
            .iter()
            .fold(0usize, |acc, &c| acc * self.modulus as usize + c as usize)
    }

    pub fn element_at(&self, mut index: usize) -> Element {
        let m = self.modulus as usize;
        let mut coords = vec![0u32; self.rank as usize];
        for c in coords.iter_mut().rev() {
            *c = (index % m) as u32;
            index /= m;
        }
        Element { coords }
    }

    pub fn indices_of(&self, s: &Sequence) -> Vec<usize> {
        s.terms.iter().map(|x| self.index_of(x)).collect()
    }

    pub fn sequence_from_indices(&self, indices: &[usize]) -> Sequence {
        Sequence::new(indices.iter().map(|&i| self.element_at(i)).collect())
    }

    #[inline]
    pub fn add_index(&self, i: usize, j: usize) -> usize {
        let m = self.modulus as usize;
        if self.rank == 1 {
            let s = i + j;
            return if s >= m { s - m } else { s };
        }
        let (mut i, mut j) = (i, j);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.rank {
            let s = (i % m + j % m) % m;
            out += s * place;
            place *= m;
            i /= m;
            j /= m;
        }
        out
    }

    #[inline]
    pub fn neg_index(&self, i: usize) -> usize {
        let m = self.modulus as usize;
        if self.rank == 1 {
            return (m - i) % m;
        }
        let mut i = i;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.rank {
            out += ((m - i % m) % m) * place;
            place *= m;
            i /= m;
        }
        out
    }

    #[inline]
    pub fn sub_index(&self, i: usize, j: usize) -> usize {
        self.add_index(i, self.neg_index(j))
    }

    #[inline]
    pub fn scale_index(&self, u: u32, i: usize) -> usize {
        let m = self.modulus as usize;
        let u = u as usize % m;
        if self.rank == 1 {
            return (u * i) % m;
        }
        let mut i = i;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.rank {
            out += ((u * (i % m)) % m) * place;
            place *= m;
            i /= m;
        }
        out
    }

    // Sequence operations.

    /// `(x_1 + x, ..., x_k + x)`.
    pub fn translate(&self, s: &Sequence, x: &Element) -> Sequence {
        Sequence::new(s.terms.iter().map(|t| self.add(t, x)).collect())
    }

    /// `(u x_1, ..., u x_k)` for a unit `u`.
    pub fn scale(&self, s: &Sequence, u: Scalar) -> Result<Sequence> {
        let u = u.0 % self.modulus;
        if !self.is_unit(u) {
            return Err(Error::NonUnitScalar {
                value: u,
                modulus: self.modulus,
            });
        }
        Ok(Sequence::new(
            s.terms.iter().map(|t| self.scale_element(u, t)).collect(),
        ))
    }

    /// The symmetries that preserve weighted zero-sum-ness under `cfg`:
    /// every unit scaling, composed with every translation when the
    /// `B`-set is exactly `{1}`.
    pub fn symmetries(&self, cfg: &WeightConfig) -> Vec<AffineMap> {
        let shifts: Vec<usize> = if cfg.translation_valid() {
            (0..self.cardinality).collect()
        } else {
            vec![0]
        };
        let mut maps = Vec::new();
        for &unit in &self.units() {
            for &shift in &shifts {
                maps.push(AffineMap { unit, shift });
            }
        }
        maps
    }

    /// Lexicographically least image of `s` under the symmetries valid for
    /// `cfg`. With `order_insensitive` every image is sorted first
    /// (multiset semantics for the D and E constants).
    pub fn canonical_form(
        &self,
        s: &Sequence,
        cfg: &WeightConfig,
        order_insensitive: bool,
    ) -> Sequence {
        let xs = self.indices_of(s);
        let mut best: Option<Vec<usize>> = None;
        for map in self.symmetries(cfg) {
            let mut image: Vec<usize> = xs.iter().map(|&x| map.apply(self, x)).collect();
            if order_insensitive {
                image.sort_unstable();
            }
            if best.as_ref().is_none_or(|b| image < *b) {
                best = Some(image);
            }
        }
        self.sequence_from_indices(&best.unwrap_or_default())
    }
}

impl fmt::Display for ModuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rank == 1 {
            write!(f, "Z_{}", self.modulus)
        } else {
            write!(f, "Z_{}^{}", self.modulus, self.rank)
        }
    }
}

/// `x -> unit * x + shift` on dense indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AffineMap {
    pub unit: u32,
    pub shift: usize,
}

impl AffineMap {
    #[inline]
    pub fn apply(&self, module: &ModuleSpec, x: usize) -> usize {
        module.add_index(module.scale_index(self.unit, x), self.shift)
    }
}

/// An element of `Z_m^r`; coordinates are always reduced.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Element {
    coords: Vec<u32>,
}

impl Element {
    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let [c] = self.coords.as_slice() {
            return write!(f, "{c}");
        }
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A residue of the scalar ring `Z_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Scalar(pub(crate) u32);

impl Scalar {
    pub fn new(value: i64, modulus: u32) -> Self {
        Scalar(value.rem_euclid(modulus as i64) as u32)
    }

    pub fn value(&self) -> u32 {
        self.0
    }

    /// Representative in `(-m/2, m/2]`, for display.
    pub fn signed(&self, modulus: u32) -> i64 {
        let v = self.0 as i64;
        if 2 * v > modulus as i64 {
            v - modulus as i64
        } else {
            v
        }
    }
}

/// An ordered finite list of module elements.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sequence {
    terms: Vec<Element>,
}

impl Sequence {
    pub fn new(terms: Vec<Element>) -> Self {
        Self { terms }
    }

    pub fn terms(&self) -> &[Element] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Element> {
        self.terms.iter()
    }

    pub fn push(&mut self, x: Element) {
        self.terms.push(x);
    }

    pub fn concat(&self, other: &Sequence) -> Sequence {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Sequence::new(terms)
    }

    /// Terms at the given positions, in the given order.
    pub fn subsequence(&self, indices: &[usize]) -> Sequence {
        Sequence::new(indices.iter().map(|&i| self.terms[i].clone()).collect())
    }

    pub fn sorted(&self) -> Sequence {
        let mut terms = self.terms.clone();
        terms.sort();
        Sequence::new(terms)
    }

    pub fn reversed(&self) -> Sequence {
        Sequence::new(self.terms.iter().rev().cloned().collect())
    }
}

impl FromIterator<Element> for Sequence {
    fn from_iter<I: IntoIterator<Item = Element>>(iter: I) -> Self {
        Sequence::new(iter.into_iter().collect())
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}
