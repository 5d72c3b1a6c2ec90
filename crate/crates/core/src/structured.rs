//! Circulant, left-circulant, g-circulant and cyclic matrices, together with
//! the permutation machinery that relates them.
//!
//! Conventions used throughout:
//!
//! * `circulant(c)(i, j) = c[(j - i) mod k]`
//! * `g_circulant(g, c)(i, j) = c[(j - i*g) mod k]`
//! * `cyclic(rho, c)(i, j) = c[rho^-i(j)]`
//! * a permutation `s` becomes the matrix with a one at `(s(j), j)` for every
//!   column `j`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::gf2m::{Element, FieldSpec, GfError};
use crate::matrix::{Matrix, MatrixError};
use crate::props::PropertyReport;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("{0:?} is not a permutation of 0..{len}", len = .0.len())]
    NotAPermutation(Vec<usize>),
    #[error("not a single full-length cycle: {0}")]
    NotAFullCycle(String),
    #[error("syntax error in `{text}`: {reason}")]
    Syntax { text: String, reason: String },
    #[error("gcd({k}, {g}) > 1, so no {k}-cycle steps by {g}")]
    NotCoprime { k: usize, g: usize },
    #[error("expected length {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("first row is empty")]
    EmptyRow,
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// A bijection on `0..k`, stored as its image list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self, StructureError> {
        let k = images.len();
        let mut seen = vec![false; k];
        for &x in &images {
            if x >= k || std::mem::replace(&mut seen[x], true) {
                return Err(StructureError::NotAPermutation(images));
            }
        }
        Ok(Permutation { images })
    }

    pub fn identity(k: usize) -> Self {
        Permutation {
            images: (0..k).collect(),
        }
    }

    /// Number of points acted on.
    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x] = i;
        }
        Permutation { images }
    }

    /// `self ∘ other`, i.e. `i -> self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        }
    }

    pub fn pow(&self, e: i64) -> Permutation {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut acc = Permutation::identity(self.degree());
        for _ in 0..e.unsigned_abs() {
            acc = base.compose(&acc);
        }
        acc
    }

    /// Matrix with a one at `(s(j), j)`.
    pub fn to_matrix(&self, field: FieldSpec) -> Matrix {
        Matrix::from_fn(field, self.degree(), |i, j| {
            if self.images[j] == i {
                Element::ONE
            } else {
                Element::ZERO
            }
        })
    }

    /// Inverse of [`Permutation::to_matrix`]; `None` unless `m` is a 0/1 permutation matrix.
    pub fn from_matrix(m: &Matrix) -> Option<Permutation> {
        let k = m.order();
        let mut images = Vec::with_capacity(k);
        for j in 0..k {
            let mut ones = (0..k).filter(|&i| m.get(i, j) == Element::ONE);
            let i = ones.next()?;
            if ones.next().is_some() || (0..k).any(|r| r != i && !m.get(r, j).is_zero()) {
                return None;
            }
            images.push(i);
        }
        Permutation::new(images).ok()
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.images.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Permutation::new(Vec::deserialize(deserializer)?).map_err(serde::de::Error::custom)
    }
}

/// A permutation consisting of one orbit of length `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KCycle(Permutation);

impl KCycle {
    pub fn new(perm: Permutation) -> Result<Self, StructureError> {
        let k = perm.degree();
        if k == 0 {
            return Err(StructureError::NotAFullCycle("empty permutation".into()));
        }
        let mut len = 1;
        let mut x = perm.apply(0);
        while x != 0 {
            len += 1;
            x = perm.apply(x);
        }
        if len != k {
            return Err(StructureError::NotAFullCycle(format!(
                "orbit of 0 has length {len}, expected {k}"
            )));
        }
        Ok(KCycle(perm))
    }

    /// From cycle notation order `(i0 i1 ... i_{k-1})`.
    pub fn from_sequence(seq: &[usize]) -> Result<Self, StructureError> {
        let k = seq.len();
        let mut images = vec![usize::MAX; k];
        for (pos, &x) in seq.iter().enumerate() {
            if x >= k || images[x] != usize::MAX {
                return Err(StructureError::NotAFullCycle(format!(
                    "{seq:?} repeats or exceeds an index"
                )));
            }
            images[x] = seq[(pos + 1) % k];
        }
        KCycle::new(Permutation::new(images)?)
    }

    /// `(0 1 2 ... k-1)`, which yields ordinary circulants.
    pub fn shift(k: usize) -> Self {
        KCycle(Permutation {
            images: (0..k).map(|i| (i + 1) % k).collect(),
        })
    }

    /// Every k-cycle of `S_k`, in lexicographic order of their notation from 0.
    pub fn all(k: usize) -> Vec<KCycle> {
        use itertools::Itertools;
        if k == 0 {
            return Vec::new();
        }
        (1..k)
            .permutations(k - 1)
            .map(|tail| {
                let seq: Vec<usize> = std::iter::once(0).chain(tail).collect();
                KCycle::from_sequence(&seq).expect("distinct indices form a k-cycle")
            })
            .collect()
    }

    pub fn order(&self) -> usize {
        self.0.degree()
    }

    pub fn permutation(&self) -> &Permutation {
        &self.0
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0.apply(i)
    }

    /// `[0, rho(0), rho^2(0), ..., rho^{k-1}(0)]`.
    pub fn orbit(&self) -> Vec<usize> {
        std::iter::successors(Some(0), |&x| Some(self.apply(x)))
            .take(self.order())
            .collect()
    }
}

impl fmt::Display for KCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.orbit().iter().map(usize::to_string).collect();
        write!(f, "({})", parts.join(" "))
    }
}

impl FromStr for KCycle {
    type Err = StructureError;

    /// Parses cycle notation, taking `k` from the number of entries.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        KCycle::from_sequence(&cycle_entries(text)?)
    }
}

impl Serialize for KCycle {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for KCycle {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

fn cycle_entries(text: &str) -> Result<Vec<usize>, StructureError> {
    let syntax = |reason: &str| StructureError::Syntax {
        text: text.to_string(),
        reason: reason.to_string(),
    };
    let inner = text
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| syntax("expected `(i0 i1 ...)`"))?;
    if inner.contains(['(', ')']) {
        return Err(syntax("expected a single cycle"));
    }
    inner
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| syntax(&format!("bad index `{t}`")))
        })
        .collect()
}

/// Parses `(i0 i1 ... i_{k-1})` as a k-cycle on `k` points.
pub fn parse_cycle(text: &str, k: usize) -> Result<KCycle, StructureError> {
    let seq = cycle_entries(text)?;
    if seq.len() != k {
        return Err(StructureError::NotAFullCycle(format!(
            "{} entries given for a {k}-cycle",
            seq.len()
        )));
    }
    KCycle::from_sequence(&seq)
}

/// The defining first row `(c_0, ..., c_{k-1})` of a structured matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FirstRow {
    field: FieldSpec,
    c: Vec<Element>,
}

impl FirstRow {
    pub fn new(field: FieldSpec, c: Vec<Element>) -> Result<Self, StructureError> {
        if c.is_empty() {
            return Err(StructureError::EmptyRow);
        }
        if let Some(&bad) = c.iter().find(|&&x| !field.contains(x)) {
            return Err(GfError::FieldMismatch {
                bits: u32::from(bad.bits()),
                m: field.degree(),
            }
            .into());
        }
        Ok(FirstRow { field, c })
    }

    /// Comma-separated element literals, hex and polynomial forms mixed freely.
    pub fn parse(field: FieldSpec, text: &str) -> Result<Self, StructureError> {
        let c = text
            .split(',')
            .map(|t| field.parse_literal(t))
            .collect::<Result<Vec<_>, _>>()?;
        FirstRow::new(field, c)
    }

    /// `(1, 0, ..., 0)`.
    pub fn unit(field: FieldSpec, k: usize) -> Self {
        let mut c = vec![Element::ZERO; k.max(1)];
        c[0] = Element::ONE;
        FirstRow { field, c }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.c
    }

    pub fn get(&self, i: usize) -> Element {
        self.c[i % self.c.len()]
    }

    /// Sum of all entries.
    pub fn sum(&self) -> Element {
        self.c
            .iter()
            .fold(Element::ZERO, |acc, &x| self.field.add(acc, x))
    }

    pub fn to_literal(&self) -> String {
        let parts: Vec<String> = self.c.iter().map(Element::to_string).collect();
        parts.join(",")
    }
}

impl fmt::Display for FirstRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_literal().replace(',', ", "))
    }
}

pub fn circulant(row: &FirstRow) -> Matrix {
    g_circulant(1, row)
}

/// Each row is the previous one rotated left; symmetric.
pub fn left_circulant(row: &FirstRow) -> Matrix {
    let k = row.len();
    Matrix::from_fn(row.field, k, |i, j| row.c[(i + j) % k])
}

/// Each row is the previous one rotated right by `g` places. `g` is taken mod `k`.
pub fn g_circulant(g: usize, row: &FirstRow) -> Matrix {
    let k = row.len();
    let g = g % k;
    Matrix::from_fn(row.field, k, |i, j| row.c[(j + k * k - (i * g) % k) % k])
}

/// `cyclic(rho, c)(i, j) = c[rho^-i(j)]`.
pub fn cyclic(rho: &KCycle, row: &FirstRow) -> Result<Matrix, StructureError> {
    let k = row.len();
    if rho.order() != k {
        return Err(StructureError::ShapeMismatch {
            expected: k,
            found: rho.order(),
        });
    }
    let back = rho.permutation().inverse();
    let mut rows = Vec::with_capacity(k * k);
    // idx[j] = rho^-i(j) for the current row i
    let mut idx: Vec<usize> = (0..k).collect();
    for _ in 0..k {
        rows.extend(idx.iter().map(|&t| row.c[t]));
        for t in idx.iter_mut() {
            *t = back.apply(*t);
        }
    }
    Ok(Matrix::new(row.field, k, rows)?)
}

/// `P = circulant(0, 1, 0, ..., 0)`.
pub fn shift_matrix(field: FieldSpec, k: usize) -> Matrix {
    let mut c = vec![Element::ZERO; k];
    c[1 % k] = Element::ONE;
    if k == 1 {
        c[0] = Element::ONE;
    }
    circulant(&FirstRow { field, c })
}

/// `Q_g = g_circulant(g, (1, 0, ..., 0))`.
pub fn q_g(field: FieldSpec, k: usize, g: usize) -> Matrix {
    g_circulant(g, &FirstRow::unit(field, k))
}

/// `Q_rho = cyclic(rho, (1, 0, ..., 0))`.
pub fn q_rho(field: FieldSpec, rho: &KCycle) -> Matrix {
    cyclic(rho, &FirstRow::unit(field, rho.order())).expect("orders agree")
}

/// The cycle `(0 g 2g ...)`, i.e. `i -> i + g mod k`.
pub fn rho_from_g(k: usize, g: usize) -> Result<KCycle, StructureError> {
    if k == 0 {
        return Err(StructureError::EmptyRow);
    }
    let g = g % k;
    if gcd(k, g) != 1 {
        return Err(StructureError::NotCoprime { k, g });
    }
    Ok(KCycle(Permutation {
        images: (0..k).map(|i| (i + g) % k).collect(),
    }))
}

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// First row of the circulant reached from `cyclic(rho, row)` by a column
/// permutation, and that permutation `Q`, with `Q(i, j) = 1` iff `i = rho^j(0)`.
///
/// `cyclic(rho, row) * Q.to_matrix() == circulant(associated row)`.
pub fn associated_circulant(
    rho: &KCycle,
    row: &FirstRow,
) -> Result<(FirstRow, Permutation), StructureError> {
    if rho.order() != row.len() {
        return Err(StructureError::ShapeMismatch {
            expected: row.len(),
            found: rho.order(),
        });
    }
    let orbit = rho.orbit();
    let c = orbit.iter().map(|&t| row.c[t]).collect();
    Ok((
        FirstRow {
            field: row.field,
            c,
        },
        Permutation { images: orbit },
    ))
}

/// Checks that the inverse of the associated-circulant `Q` equals `cyclic(rho, e0)`.
pub fn q_rho_inverse_law(rho: &KCycle) -> PropertyReport {
    let field = FieldSpec::gf2();
    let k = rho.order();
    let (_, q) = associated_circulant(rho, &FirstRow::unit(field, k)).expect("orders agree");
    let inv = q
        .to_matrix(field)
        .inverse()
        .expect("permutation matrices are invertible");
    let expected = q_rho(field, rho);
    PropertyReport::compare("q_rho_inverse_law", &expected, &inv)
}

/// Checks `cyclic(rho, row) = sum_i c[rho^i(0)] P^i Q_rho`.
pub fn cyclic_structure_decomposition(
    rho: &KCycle,
    row: &FirstRow,
) -> Result<PropertyReport, StructureError> {
    let target = cyclic(rho, row)?;
    let (f, k) = (row.field, row.len());
    let p = shift_matrix(f, k);
    let mut term = q_rho(f, rho);
    let mut sum = Matrix::zeros(f, k);
    for t in rho.orbit() {
        sum = sum.add(&term.scale(row.c[t]))?;
        term = p.mat_mul(&term)?;
    }
    Ok(PropertyReport::compare(
        "cyclic_structure_decomposition",
        &target,
        &sum,
    ))
}

/// Checks `g_circulant(g, row) = sum_i c_i Q_g P^i`.
pub fn g_circulant_structure_decomposition(
    g: usize,
    row: &FirstRow,
) -> Result<PropertyReport, StructureError> {
    let (f, k) = (row.field, row.len());
    let target = g_circulant(g, row);
    let p = shift_matrix(f, k);
    let mut term = q_g(f, k, g);
    let mut sum = Matrix::zeros(f, k);
    for &c in &row.c {
        sum = sum.add(&term.scale(c))?;
        term = term.mat_mul(&p)?;
    }
    Ok(PropertyReport::compare(
        "g_circulant_structure_decomposition",
        &target,
        &sum,
    ))
}

/// Whether `A(i, j) = A(i+1, j+g)` for every entry, indices mod `k`.
/// On failure returns the first violating `(i, j)`.
pub fn shift_law_violation(a: &Matrix, g: usize) -> Option<(usize, usize)> {
    let k = a.order();
    let g = g % k;
    (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .find(|&(i, j)| a.get(i, j) != a.get((i + 1) % k, (j + g) % k))
}

/// Which structured family a matrix is built from.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Shape {
    Circulant,
    LeftCirculant,
    GCirculant(usize),
    Cyclic(KCycle),
}

impl Shape {
    pub fn build(&self, row: &FirstRow) -> Result<Matrix, StructureError> {
        Ok(match self {
            Shape::Circulant => circulant(row),
            Shape::LeftCirculant => left_circulant(row),
            Shape::GCirculant(g) => g_circulant(*g, row),
            Shape::Cyclic(rho) => cyclic(rho, row)?,
        })
    }

    /// Order required by the shape, if it fixes one.
    pub fn required_order(&self) -> Option<usize> {
        match self {
            Shape::Cyclic(rho) => Some(rho.order()),
            _ => None,
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Circulant => f.write_str("circulant"),
            Shape::LeftCirculant => f.write_str("left-circulant"),
            Shape::GCirculant(g) => write!(f, "g-circulant:{g}"),
            Shape::Cyclic(rho) => write!(f, "cyclic:{rho}"),
        }
    }
}

impl FromStr for Shape {
    type Err = StructureError;

    /// `circulant`, `left-circulant`, `g-circulant:<g>` (or `g:<g>`), `cyclic:(i0 i1 ...)`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let t = text.trim();
        match t {
            "circulant" => return Ok(Shape::Circulant),
            "left-circulant" => return Ok(Shape::LeftCirculant),
            _ => {}
        }
        if let Some(g) = t
            .strip_prefix("g-circulant:")
            .or_else(|| t.strip_prefix("g:"))
        {
            return g
                .trim()
                .parse()
                .map(Shape::GCirculant)
                .map_err(|_| StructureError::Syntax {
                    text: text.to_string(),
                    reason: "bad g".into(),
                });
        }
        if let Some(c) = t.strip_prefix("cyclic:") {
            return c.parse().map(Shape::Cyclic);
        }
        Err(StructureError::Syntax {
            text: text.to_string(),
            reason: "expected circulant, left-circulant, g-circulant:<g> or cyclic:(...)".into(),
        })
    }
}

impl Serialize for Shape {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Shape {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}
