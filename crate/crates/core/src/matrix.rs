//! Dense square matrices over one GF(2^m).

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::gf2m::{Element, FieldSpec};

/// Largest supported order.
pub const MAX_ORDER: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("order {0} is outside 1..={MAX_ORDER}")]
    BadOrder(usize),
    #[error("expected {expected} entries, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("matrices are over different fields ({left} vs {right})")]
    FieldMismatch { left: FieldSpec, right: FieldSpec },
    #[error("entry {entry} at ({row}, {col}) is not in {field}")]
    EntryOutOfField {
        row: usize,
        col: usize,
        entry: Element,
        field: FieldSpec,
    },
    #[error("matrix is singular")]
    Singular,
    #[error("bad index set: {0}")]
    BadIndexSet(String),
}

/// A `k x k` matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: FieldSpec,
    k: usize,
    entries: Vec<Element>,
}

impl Matrix {
    pub fn new(field: FieldSpec, k: usize, entries: Vec<Element>) -> Result<Self, MatrixError> {
        if !(1..=MAX_ORDER).contains(&k) {
            return Err(MatrixError::BadOrder(k));
        }
        if entries.len() != k * k {
            return Err(MatrixError::ShapeMismatch {
                expected: k * k,
                found: entries.len(),
            });
        }
        if let Some(pos) = entries.iter().position(|&x| !field.contains(x)) {
            return Err(MatrixError::EntryOutOfField {
                row: pos / k,
                col: pos % k,
                entry: entries[pos],
                field,
            });
        }
        Ok(Matrix { field, k, entries })
    }

    pub fn from_rows(field: FieldSpec, rows: Vec<Vec<Element>>) -> Result<Self, MatrixError> {
        let k = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != k) {
            return Err(MatrixError::ShapeMismatch {
                expected: k,
                found: bad.len(),
            });
        }
        Matrix::new(field, k, rows.into_iter().flatten().collect())
    }

    /// Builds a matrix entry by entry. The closure must return field elements.
    pub(crate) fn from_fn(
        field: FieldSpec,
        k: usize,
        mut f: impl FnMut(usize, usize) -> Element,
    ) -> Self {
        let mut entries = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                entries.push(f(i, j));
            }
        }
        debug_assert!(entries.iter().all(|&x| field.contains(x)));
        Matrix { field, k, entries }
    }

    pub fn zeros(field: FieldSpec, k: usize) -> Self {
        Matrix::from_fn(field, k, |_, _| Element::ZERO)
    }

    pub fn identity(field: FieldSpec, k: usize) -> Self {
        Matrix::from_fn(
            field,
            k,
            |i, j| if i == j { Element::ONE } else { Element::ZERO },
        )
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[Element] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Element {
        self.entries[i * self.k + j]
    }

    pub fn row(&self, i: usize) -> &[Element] {
        &self.entries[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Element]> {
        self.entries.chunks(self.k)
    }

    fn check_compatible(&self, other: &Matrix) -> Result<(), MatrixError> {
        if self.field != other.field {
            return Err(MatrixError::FieldMismatch {
                left: self.field,
                right: other.field,
            });
        }
        if self.k != other.k {
            return Err(MatrixError::ShapeMismatch {
                expected: self.k * self.k,
                found: other.k * other.k,
            });
        }
        Ok(())
    }

    /// Matrix product `self * other`.
    pub fn mat_mul(&self, other: &Matrix) -> Result<Matrix, MatrixError> {
        self.check_compatible(other)?;
        let (f, k) = (self.field, self.k);
        let mut out = vec![Element::ZERO; k * k];
        for i in 0..k {
            for l in 0..k {
                let a = self.entries[i * k + l];
                if a.is_zero() {
                    continue;
                }
                let brow = &other.entries[l * k..(l + 1) * k];
                let orow = &mut out[i * k..(i + 1) * k];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o = f.add(*o, f.mul(a, b));
                }
            }
        }
        Ok(Matrix {
            field: f,
            k,
            entries: out,
        })
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix, MatrixError> {
        self.check_compatible(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&x, &y)| self.field.add(x, y))
            .collect();
        Ok(Matrix {
            field: self.field,
            k: self.k,
            entries,
        })
    }

    /// Multiplies every entry by `c`. `c` must belong to the matrix field.
    pub fn scale(&self, c: Element) -> Matrix {
        debug_assert!(self.field.contains(c));
        Matrix {
            field: self.field,
            k: self.k,
            entries: self.entries.iter().map(|&x| self.field.mul(c, x)).collect(),
        }
    }

    /// `self^e` by repeated squaring; `self^0 = I`.
    pub fn pow(&self, mut e: u64) -> Matrix {
        let mut base = self.clone();
        let mut acc = Matrix::identity(self.field, self.k);
        while e != 0 {
            if e & 1 != 0 {
                acc = acc.mat_mul(&base).expect("same shape");
            }
            e >>= 1;
            if e != 0 {
                base = base.mat_mul(&base).expect("same shape");
            }
        }
        acc
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.field, self.k, |i, j| self.get(j, i))
    }

    pub fn is_identity(&self) -> bool {
        self.first_off_identity().is_none()
    }

    /// First `(row, col)` in row-major order that differs from the identity.
    pub fn first_off_identity(&self) -> Option<(usize, usize)> {
        let k = self.k;
        (0..k * k)
            .find(|&p| {
                let want = if p / k == p % k {
                    Element::ONE
                } else {
                    Element::ZERO
                };
                self.entries[p] != want
            })
            .map(|p| (p / k, p % k))
    }

    /// First `(row, col)` in row-major order where the two matrices differ.
    pub fn first_difference(&self, other: &Matrix) -> Option<(usize, usize)> {
        if self.k != other.k {
            return Some((0, 0));
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .position(|(a, b)| a != b)
            .map(|p| (p / self.k, p % self.k))
    }

    /// Gaussian elimination, pivoting on the first nonzero entry of each column.
    ///
    /// Row swaps carry no sign in characteristic 2, so the result is the plain
    /// product of the pivots.
    pub fn determinant(&self) -> Element {
        let mut work = self.entries.clone();
        determinant_in_place(self.field, &mut work, self.k)
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<Matrix, MatrixError> {
        let (f, k) = (self.field, self.k);
        let mut a = self.entries.clone();
        let mut inv = Matrix::identity(f, k).entries;
        for col in 0..k {
            let pivot = (col..k)
                .find(|&r| !a[r * k + col].is_zero())
                .ok_or(MatrixError::Singular)?;
            if pivot != col {
                swap_rows(&mut a, k, pivot, col);
                swap_rows(&mut inv, k, pivot, col);
            }
            let pinv = f.inv(a[col * k + col]).expect("pivot is nonzero");
            for c in 0..k {
                a[col * k + c] = f.mul(pinv, a[col * k + c]);
                inv[col * k + c] = f.mul(pinv, inv[col * k + c]);
            }
            for r in 0..k {
                let factor = a[r * k + col];
                if r == col || factor.is_zero() {
                    continue;
                }
                for c in 0..k {
                    a[r * k + c] = f.add(a[r * k + c], f.mul(factor, a[col * k + c]));
                    inv[r * k + c] = f.add(inv[r * k + c], f.mul(factor, inv[col * k + c]));
                }
            }
        }
        Ok(Matrix {
            field: f,
            k,
            entries: inv,
        })
    }

    /// The minor on the given strictly increasing row and column index sets.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<Matrix, MatrixError> {
        check_index_set(rows, self.k, "rows")?;
        check_index_set(cols, self.k, "cols")?;
        if rows.len() != cols.len() {
            return Err(MatrixError::BadIndexSet(format!(
                "{} rows but {} cols",
                rows.len(),
                cols.len()
            )));
        }
        Ok(Matrix::from_fn(self.field, rows.len(), |i, j| {
            self.get(rows[i], cols[j])
        }))
    }

    /// Determinant of a minor without materialising it.
    pub(crate) fn minor_determinant(
        &self,
        rows: &[usize],
        cols: &[usize],
        scratch: &mut Vec<Element>,
    ) -> Element {
        scratch.clear();
        for &r in rows {
            for &c in cols {
                scratch.push(self.get(r, c));
            }
        }
        determinant_in_place(self.field, scratch, rows.len())
    }

    /// Matrix-vector product `self * v`.
    pub fn apply(&self, v: &[Element]) -> Vec<Element> {
        let f = self.field;
        self.rows()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(Element::ZERO, |acc, (&a, &x)| f.add(acc, f.mul(a, x)))
            })
            .collect()
    }
}

fn check_index_set(set: &[usize], k: usize, what: &str) -> Result<(), MatrixError> {
    if set.is_empty() {
        return Err(MatrixError::BadIndexSet(format!("empty {what}")));
    }
    if set.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MatrixError::BadIndexSet(format!(
            "{what} {set:?} not strictly increasing"
        )));
    }
    if set.iter().any(|&i| i >= k) {
        return Err(MatrixError::BadIndexSet(format!(
            "{what} {set:?} out of range for order {k}"
        )));
    }
    Ok(())
}

fn swap_rows(a: &mut [Element], k: usize, r1: usize, r2: usize) {
    for c in 0..k {
        a.swap(r1 * k + c, r2 * k + c);
    }
}

fn determinant_in_place(f: FieldSpec, a: &mut [Element], n: usize) -> Element {
    let mut det = Element::ONE;
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r * n + col].is_zero()) else {
            return Element::ZERO;
        };
        if pivot != col {
            swap_rows(a, n, pivot, col);
        }
        let pv = a[col * n + col];
        det = f.mul(det, pv);
        let pinv = f.inv(pv).expect("pivot is nonzero");
        for r in col + 1..n {
            let lead = a[r * n + col];
            if lead.is_zero() {
                continue;
            }
            let factor = f.mul(lead, pinv);
            for c in col..n {
                a[r * n + c] = f.add(a[r * n + c], f.mul(factor, a[col * n + c]));
            }
        }
    }
    det
}

impl Index<(usize, usize)> for Matrix {
    type Output = Element;

    fn index(&self, (i, j): (usize, usize)) -> &Element {
        &self.entries[i * self.k + j]
    }
}

impl fmt::Display for Matrix {
    /// Aligned table of hex entries.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .entries
            .iter()
            .map(|e| e.to_string().len())
            .max()
            .unwrap_or(0);
        for row in self.rows() {
            let cells: Vec<String> = row
                .iter()
                .map(|e| format!("{:>width$}", e.to_string()))
                .collect();
            writeln!(f, "[ {} ]", cells.join("  "))?;
        }
        Ok(())
    }
}

/// Canonical JSON text form.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    field: FieldSpec,
    k: usize,
    rows: Vec<Vec<Element>>,
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MatrixJson {
            field: self.field,
            k: self.k,
            rows: self.rows().map(<[Element]>::to_vec).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let json = MatrixJson::deserialize(deserializer)?;
        if json.rows.len() != json.k {
            return Err(serde::de::Error::custom(format!(
                "k = {} but {} rows given",
                json.k,
                json.rows.len()
            )));
        }
        Matrix::from_rows(json.field, json.rows).map_err(serde::de::Error::custom)
    }
}
