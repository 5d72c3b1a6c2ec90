//! Property checkers (MDS, orthogonal, involutory, branch numbers,
//! permutation equivalence) and executable forms of the structural identities
//! satisfied by g-circulant and cyclic matrices.

use itertools::Itertools;
use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2m::Element;
use crate::matrix::{Matrix, MatrixError};
use crate::structured::{
    associated_circulant, circulant, g_circulant, gcd, shift_law_violation, shift_matrix, FirstRow,
    KCycle, Permutation, StructureError,
};

/// Default exhaustive budget for [`branch_numbers`], in field vectors.
pub const DEFAULT_BRANCH_BUDGET: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropsError {
    #[error("exhaustive enumeration needs {needed} vectors, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("bad order: {0}")]
    BadOrder(String),
    #[error("gcd({k}, {g}) > 1")]
    NotCoprime { k: usize, g: usize },
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("matrix is not orthogonal: A*A^T differs from I at ({row}, {col})")]
    NotOrthogonal { row: usize, col: usize },
    #[error("rows have lengths {left} and {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// Which half of an even/odd index split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Half {
    Even,
    Odd,
}

/// Evidence attached to a [`PropertyReport`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// The minor on these rows and columns has determinant zero.
    SingularMinor { rows: Vec<usize>, cols: Vec<usize> },
    /// First entry where a computed matrix departs from the expected one.
    Entry {
        row: usize,
        col: usize,
        expected: Element,
        found: Element,
    },
    /// Two equal rows, plus a singular 2x2 minor drawn from them.
    IdenticalRows {
        first: usize,
        second: usize,
        minor_rows: Vec<usize>,
        minor_cols: Vec<usize>,
    },
    /// First entry at which `A(i, j) = A(i+1, j+g)` fails.
    ShiftLaw {
        matrix: String,
        g: usize,
        row: usize,
        col: usize,
    },
    /// `row_b[i] = row_a[(b*i + a) mod k]`.
    AffinePair { a: usize, b: usize },
    /// Permutations `left`, `right` with `left * M * right = M'`, as image lists.
    PermutationPair { left: Vec<usize>, right: Vec<usize> },
    BranchMismatch {
        left: Vec<usize>,
        right: Vec<usize>,
        expected: BranchNumbers,
        found: BranchNumbers,
    },
    /// Even and odd partial sums of a first row whose product vanishes, and the
    /// sub-g-circulant made singular by the vanishing factor.
    Obstruction {
        even_sum: Element,
        odd_sum: Element,
        singular_half: Half,
        rows: Vec<usize>,
        cols: Vec<usize>,
    },
    Divisibility {
        quotient: String,
        two_adic_valuation: u64,
        product_form_agrees: bool,
    },
    /// A sampled instance on which a law failed.
    Counterexample {
        trial: u64,
        row: Vec<Element>,
        detail: String,
    },
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: String,
    pub verdict: bool,
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl PropertyReport {
    pub fn new(property: impl Into<String>, verdict: bool, witness: Option<Witness>) -> Self {
        PropertyReport {
            property: property.into(),
            verdict,
            witness,
            elapsed_ms: None,
        }
    }

    pub fn pass(property: impl Into<String>) -> Self {
        PropertyReport::new(property, true, None)
    }

    pub fn fail(property: impl Into<String>, witness: Witness) -> Self {
        PropertyReport::new(property, false, Some(witness))
    }

    /// Passes iff the matrices are equal; otherwise cites the first differing entry.
    pub fn compare(property: impl Into<String>, expected: &Matrix, found: &Matrix) -> Self {
        match expected.first_difference(found) {
            None => PropertyReport::pass(property),
            Some((row, col)) => PropertyReport::fail(
                property,
                Witness::Entry {
                    row,
                    col,
                    expected: expected.get(row, col),
                    found: found.get(row, col),
                },
            ),
        }
    }

    pub fn with_elapsed_ms(mut self, ms: u64) -> Self {
        self.elapsed_ms = Some(ms);
        self
    }
}

/// Differential and linear branch numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchNumbers {
    pub differential: usize,
    pub linear: usize,
    pub exhaustive: bool,
}

/// `sum_{i=1..k} C(k, i)^2`, the number of square minors of a `k x k` matrix.
pub fn mds_minor_count(k: usize) -> u64 {
    (1..=k as u64).map(|i| binomial(k as u64, i).pow(2)).sum()
}

fn binomial(n: u64, r: u64) -> u64 {
    (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// First singular square minor, scanning by size, then row set, then column
/// set, each in lexicographic order.
pub fn first_singular_minor(a: &Matrix) -> Option<(Vec<usize>, Vec<usize>)> {
    let k = a.order();
    let mut scratch = Vec::with_capacity(k * k);
    for size in 1..=k {
        let col_sets: Vec<Vec<usize>> = (0..k).combinations(size).collect();
        for rows in (0..k).combinations(size) {
            for cols in &col_sets {
                if a.minor_determinant(&rows, cols, &mut scratch).is_zero() {
                    return Some((rows, cols.clone()));
                }
            }
        }
    }
    None
}

/// Every square submatrix nonsingular.
pub fn is_mds(a: &Matrix) -> PropertyReport {
    match first_singular_minor(a) {
        None => PropertyReport::pass("mds"),
        Some((rows, cols)) => PropertyReport::fail("mds", Witness::SingularMinor { rows, cols }),
    }
}

/// `A * A^T = I`. For square matrices this also gives `A^T * A = I`.
pub fn is_orthogonal(a: &Matrix) -> PropertyReport {
    identity_report(
        "orthogonal",
        &a.mat_mul(&a.transpose()).expect("same shape"),
    )
}

/// `A^2 = I`.
pub fn is_involutory(a: &Matrix) -> PropertyReport {
    identity_report("involutory", &a.mat_mul(a).expect("same shape"))
}

fn identity_report(name: &str, product: &Matrix) -> PropertyReport {
    match product.first_off_identity() {
        None => PropertyReport::pass(name),
        Some((row, col)) => PropertyReport::fail(
            name,
            Witness::Entry {
                row,
                col,
                expected: if row == col {
                    Element::ONE
                } else {
                    Element::ZERO
                },
                found: product.get(row, col),
            },
        ),
    }
}

fn weight(v: &[Element]) -> usize {
    v.iter().filter(|x| !x.is_zero()).count()
}

/// Exhaustive differential (`M a`) and linear (`M^T a`) branch numbers.
///
/// Refuses with [`PropsError::BudgetExceeded`] when `q^k > budget`.
pub fn branch_numbers(a: &Matrix, budget: u64) -> Result<BranchNumbers, PropsError> {
    let q = u128::from(a.field().order());
    let k = a.order();
    let needed = (0..k)
        .try_fold(1u128, |acc, _| acc.checked_mul(q))
        .unwrap_or(u128::MAX);
    if needed > u128::from(budget) {
        return Err(PropsError::BudgetExceeded { needed, budget });
    }
    let total = needed as u64;
    let at = a.transpose();
    let qq = q as u64;
    const CHUNK: u64 = 1 << 12;
    let (differential, linear) = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut v = vec![Element::ZERO; k];
            let mut best = (usize::MAX, usize::MAX);
            for n in (chunk * CHUNK).max(1)..((chunk + 1) * CHUNK).min(total) {
                let mut x = n;
                for slot in v.iter_mut() {
                    *slot = Element::from_bits((x % qq) as u16);
                    x /= qq;
                }
                let w = weight(&v);
                best.0 = best.0.min(w + weight(&a.apply(&v)));
                best.1 = best.1.min(w + weight(&at.apply(&v)));
            }
            best
        })
        .reduce(
            || (usize::MAX, usize::MAX),
            |x, y| (x.0.min(y.0), x.1.min(y.1)),
        );
    Ok(BranchNumbers {
        differential,
        linear,
        exhaustive: true,
    })
}

fn random_permutation(rng: &mut ChaCha8Rng, k: usize) -> Permutation {
    let mut images: Vec<usize> = (0..k).collect();
    images.shuffle(rng);
    Permutation::new(images).expect("shuffle of 0..k")
}

/// Branch numbers and the MDS verdict are unchanged by `A -> P A Q` for
/// `trials` seeded random permutation pairs.
pub fn mds_branch_consistency(
    a: &Matrix,
    trials: usize,
    seed: u64,
    budget: u64,
) -> Result<PropertyReport, PropsError> {
    const NAME: &str = "mds_branch_consistency";
    let f = a.field();
    let base = branch_numbers(a, budget)?;
    let base_mds = is_mds(a).verdict;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let p = random_permutation(&mut rng, a.order());
        let q = random_permutation(&mut rng, a.order());
        let b = p.to_matrix(f).mat_mul(a)?.mat_mul(&q.to_matrix(f))?;
        let found = branch_numbers(&b, budget)?;
        if found != base || is_mds(&b).verdict != base_mds {
            return Ok(PropertyReport::fail(
                NAME,
                Witness::BranchMismatch {
                    left: p.images().to_vec(),
                    right: q.images().to_vec(),
                    expected: base,
                    found,
                },
            ));
        }
    }
    Ok(PropertyReport::pass(NAME))
}

fn shift_law_report(name: &str, label: &str, m: &Matrix, g: usize) -> Option<PropertyReport> {
    shift_law_violation(m, g).map(|(row, col)| {
        PropertyReport::fail(
            name,
            Witness::ShiftLaw {
                matrix: label.to_string(),
                g: g % m.order(),
                row,
                col,
            },
        )
    })
}

/// For `A = g_circulant(g, row_a)`, `B = g_circulant(h, row_b)`: `A B` obeys
/// the `gh`-circulant shift law, and `A B'^T` is circulant for
/// `B' = g_circulant(g, row_b)`.
pub fn gh_product_law(
    g: usize,
    h: usize,
    row_a: &FirstRow,
    row_b: &FirstRow,
) -> Result<PropertyReport, PropsError> {
    const NAME: &str = "gh_product_law";
    let k = row_a.len();
    if row_b.len() != k {
        return Err(PropsError::LengthMismatch {
            left: k,
            right: row_b.len(),
        });
    }
    let a = g_circulant(g, row_a);
    let ab = a.mat_mul(&g_circulant(h, row_b))?;
    if let Some(r) = shift_law_report(NAME, "AB", &ab, (g % k) * (h % k)) {
        return Ok(r);
    }
    let abt = a.mat_mul(&g_circulant(g, row_b).transpose())?;
    if let Some(r) = shift_law_report(NAME, "AB^T", &abt, 1) {
        return Ok(r);
    }
    Ok(PropertyReport::pass(NAME))
}

/// Whether `P M = M P^g` with `P` the cyclic shift.
pub fn conjugation_holds(m: &Matrix, g: usize) -> bool {
    let p = shift_matrix(m.field(), m.order());
    let left = p.mat_mul(m).expect("same shape");
    let right = m
        .mat_mul(&p.pow((g % m.order()) as u64))
        .expect("same shape");
    left == right
}

/// `P A = A P^g` for `A = g_circulant(g, row)`, and the shift law that the
/// identity is equivalent to.
pub fn shift_conjugation_law(g: usize, row: &FirstRow) -> PropertyReport {
    const NAME: &str = "shift_conjugation_law";
    let a = g_circulant(g, row);
    let p = shift_matrix(row.field(), row.len());
    let left = p.mat_mul(&a).expect("same shape");
    let right = a
        .mat_mul(&p.pow((g % row.len()) as u64))
        .expect("same shape");
    let report = PropertyReport::compare(NAME, &right, &left);
    if !report.verdict {
        return report;
    }
    shift_law_report(NAME, "A", &a, g).unwrap_or(report)
}

fn check_power_of_two_order(row: &FirstRow, g: usize, d: u32) -> Result<usize, PropsError> {
    let k = 1usize
        .checked_shl(d)
        .filter(|&k| k <= crate::matrix::MAX_ORDER)
        .ok_or_else(|| PropsError::BadOrder(format!("2^{d} exceeds the supported order")))?;
    if row.len() != k {
        return Err(PropsError::BadOrder(format!(
            "row has length {}, expected 2^{d} = {k}",
            row.len()
        )));
    }
    if gcd(k, g % k) != 1 {
        return Err(PropsError::NotCoprime { k, g });
    }
    Ok(k)
}

/// For `A = g_circulant(g, row)` of order `2^d` with `g` odd, checks
/// `A^(2^d) = (sum c_i^(2^d)) I` and returns that scalar.
pub fn scalar_power_law(
    row: &FirstRow,
    g: usize,
    d: u32,
) -> Result<(PropertyReport, Element), PropsError> {
    let k = check_power_of_two_order(row, g, d)?;
    let f = row.field();
    let a = g_circulant(g, row);
    let mut power = a;
    for _ in 0..d {
        power = power.mat_mul(&power)?;
    }
    let scalar = row
        .elements()
        .iter()
        .fold(Element::ZERO, |acc, &c| f.add(acc, f.pow(c, k as u64)));
    let expected = Matrix::identity(f, k).scale(scalar);
    Ok((
        PropertyReport::compare("scalar_power_law", &expected, &power),
        scalar,
    ))
}

/// `((sum c_i)^(2^d), det A)` for `A = g_circulant(g, row)` of order `2^d`.
pub fn det_formula(row: &FirstRow, g: usize, d: u32) -> Result<(Element, Element), PropsError> {
    let k = check_power_of_two_order(row, g, d)?;
    let f = row.field();
    let formula = f.pow(row.sum(), k as u64);
    Ok((formula, g_circulant(g, row).determinant()))
}

/// Checks that `2^d` divides `(g^(2^d) - 1) / (g - 1)` for odd `g > 1`, and
/// that the quotient equals `(g+1)(g^2+1)...(g^(2^(d-1))+1)`.
pub fn divisibility_law(g: u64, d: u32) -> Result<PropertyReport, PropsError> {
    if g <= 1 || g % 2 == 0 {
        return Err(PropsError::BadInput(format!("g = {g} must be odd and > 1")));
    }
    if !(1..=16).contains(&d) {
        return Err(PropsError::BadInput(format!("d = {d} must lie in 1..=16")));
    }
    let one = BigUint::from(1u32);
    let big_g = BigUint::from(g);
    let quotient = (big_g.pow(1u32 << d) - &one) / (&big_g - &one);
    let product = (0..d).fold(one.clone(), |acc, i| acc * (big_g.pow(1u32 << i) + &one));
    let valuation = quotient.trailing_zeros().unwrap_or(0);
    let agrees = product == quotient;
    Ok(PropertyReport::new(
        "divisibility_law",
        agrees && valuation >= u64::from(d),
        Some(Witness::Divisibility {
            quotient: quotient.to_string(),
            two_adic_valuation: valuation,
            product_form_agrees: agrees,
        }),
    ))
}

/// Searches affine index maps `i -> b*i + a (mod k)`, `gcd(b, k) = 1`, with
/// `row_b[i] = row_a[b*i + a]`. Scans `b` ascending, then `a` ascending.
pub fn perm_equiv_circulant(
    row_a: &FirstRow,
    row_b: &FirstRow,
) -> Result<PropertyReport, PropsError> {
    const NAME: &str = "perm_equiv_circulant";
    Ok(match affine_relation(row_a, row_b)? {
        Some((a, b)) => PropertyReport::new(NAME, true, Some(Witness::AffinePair { a, b })),
        None => PropertyReport::new(NAME, false, None),
    })
}

fn affine_relation(
    row_a: &FirstRow,
    row_b: &FirstRow,
) -> Result<Option<(usize, usize)>, PropsError> {
    let k = row_a.len();
    if row_b.len() != k {
        return Err(PropsError::LengthMismatch {
            left: k,
            right: row_b.len(),
        });
    }
    if row_a.field() != row_b.field() {
        return Err(MatrixError::FieldMismatch {
            left: row_a.field(),
            right: row_b.field(),
        }
        .into());
    }
    let b_values = (1..=k).map(|b| b % k).filter(|&b| gcd(k, b) == 1);
    for b in b_values {
        for a in 0..k {
            if (0..k).all(|i| row_b.get(i) == row_a.get((b * i + a) % k)) {
                return Ok(Some((a, b)));
            }
        }
    }
    Ok(None)
}

/// Permutations `(left, right)` with `left * circulant(row_a) * right =
/// circulant(row_b)` when `row_b[i] = row_a[b*i + a]`.
pub fn circulant_equivalence_permutations(
    k: usize,
    a: usize,
    b: usize,
) -> (Permutation, Permutation) {
    let times_b =
        Permutation::new((0..k).map(|i| (b * i) % k).collect()).expect("b is a unit mod k");
    let affine =
        Permutation::new((0..k).map(|j| (b * j + a) % k).collect()).expect("b is a unit mod k");
    (times_b.inverse(), affine)
}

/// Decides whether `cyclic(rho_a, row)` and `cyclic(rho_b, row)` are
/// permutation equivalent by comparing their associated circulants, and on
/// success rebuilds `(P1, P3)` with `P1 * cyclic(rho_a) * P3 = cyclic(rho_b)`,
/// re-verified by direct product.
pub fn perm_equiv_cyclic(
    rho_a: &KCycle,
    rho_b: &KCycle,
    row: &FirstRow,
) -> Result<PropertyReport, PropsError> {
    const NAME: &str = "perm_equiv_cyclic";
    let (assoc_a, qa) = associated_circulant(rho_a, row)?;
    let (assoc_b, qb) = associated_circulant(rho_b, row)?;
    let Some((a, b)) = affine_relation(&assoc_a, &assoc_b)? else {
        return Ok(PropertyReport::new(NAME, false, None));
    };
    let (p1, p2) = circulant_equivalence_permutations(row.len(), a, b);
    // P3 = Q_a * P2 * Q_b^-1 as matrices; permutation matrices compose like
    // their permutations.
    let p3 = qa.compose(&p2).compose(&qb.inverse());
    let f = row.field();
    let lhs = p1
        .to_matrix(f)
        .mat_mul(&crate::structured::cyclic(rho_a, row)?)?
        .mat_mul(&p3.to_matrix(f))?;
    let rhs = crate::structured::cyclic(rho_b, row)?;
    let witness = Witness::PermutationPair {
        left: p1.images().to_vec(),
        right: p3.images().to_vec(),
    };
    Ok(PropertyReport::new(NAME, lhs == rhs, Some(witness)))
}

/// For an orthogonal g-circulant of order `2^d`, `d >= 2`: the even and odd
/// partial sums of the first row multiply to zero, the sub-g-circulant on
/// even rows and the vanishing half's columns is singular, and `is_mds`
/// rejects the matrix.
pub fn orthogonality_obstruction_2d(
    row: &FirstRow,
    g: usize,
    d: u32,
) -> Result<PropertyReport, PropsError> {
    const NAME: &str = "orthogonality_obstruction_2d";
    if d < 2 {
        return Err(PropsError::BadOrder(format!(
            "d = {d}: the obstruction needs order at least 4"
        )));
    }
    let k = check_power_of_two_order(row, g, d)?;
    let a = g_circulant(g, row);
    let orth = is_orthogonal(&a);
    if let Some(Witness::Entry { row, col, .. }) = orth.witness {
        return Err(PropsError::NotOrthogonal { row, col });
    }
    let f = row.field();
    let half_sum = |start: usize| {
        (start..k)
            .step_by(2)
            .fold(Element::ZERO, |acc, i| f.add(acc, row.get(i)))
    };
    let (even_sum, odd_sum) = (half_sum(0), half_sum(1));
    let singular_half = if even_sum.is_zero() {
        Half::Even
    } else {
        Half::Odd
    };
    let rows: Vec<usize> = (0..k).step_by(2).collect();
    let cols: Vec<usize> = match singular_half {
        Half::Even => (0..k).step_by(2).collect(),
        Half::Odd => (1..k).step_by(2).collect(),
    };
    let sub_singular = a.submatrix(&rows, &cols)?.determinant().is_zero();
    let verdict = f.mul(even_sum, odd_sum).is_zero() && sub_singular && !is_mds(&a).verdict;
    Ok(PropertyReport::new(
        NAME,
        verdict,
        Some(Witness::Obstruction {
            even_sum,
            odd_sum,
            singular_half,
            rows,
            cols,
        }),
    ))
}

/// For `gcd(k, g) > 1`: rows `0` and `k / gcd(k, g)` of `g_circulant(g, row)`
/// coincide, so a 2x2 minor on them is singular and the matrix is not MDS.
pub fn gcd_obstruction(g: usize, row: &FirstRow) -> Result<PropertyReport, PropsError> {
    const NAME: &str = "gcd_obstruction";
    let k = row.len();
    let common = gcd(k, g % k);
    if common == 1 {
        return Err(PropsError::BadInput(format!("gcd({k}, {g}) = 1")));
    }
    let second = k / common;
    let a = g_circulant(g, row);
    let minor_rows = vec![0, second];
    let minor_cols = vec![0, 1];
    let identical = a.row(0) == a.row(second);
    let singular = a
        .submatrix(&minor_rows, &minor_cols)?
        .determinant()
        .is_zero();
    Ok(PropertyReport::new(
        NAME,
        identical && singular && !is_mds(&a).verdict,
        Some(Witness::IdenticalRows {
            first: 0,
            second,
            minor_rows,
            minor_cols,
        }),
    ))
}

/// The associated circulant of `cyclic(rho, row)` as a matrix.
pub fn associated_circulant_matrix(rho: &KCycle, row: &FirstRow) -> Result<Matrix, PropsError> {
    Ok(circulant(&associated_circulant(rho, row)?.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2m::FieldSpec;
    use crate::structured::{cyclic, left_circulant, parse_cycle};
    use rand::Rng;

    fn gf4() -> FieldSpec {
        FieldSpec::new(2, 0x7).unwrap()
    }

    fn row(f: FieldSpec, bits: &[u16]) -> FirstRow {
        FirstRow::new(f, bits.iter().map(|&b| Element::from_bits(b)).collect()).unwrap()
    }

    fn random_row(rng: &mut impl Rng, f: FieldSpec, k: usize) -> FirstRow {
        row(
            f,
            &(0..k)
                .map(|_| rng.gen_range(0..f.order()) as u16)
                .collect::<Vec<_>>(),
        )
    }

    fn distinct_row(rng: &mut impl Rng, k: usize) -> FirstRow {
        let f = FieldSpec::aes();
        let mut all: Vec<u16> = (1..256).collect();
        all.shuffle(rng);
        row(f, &all[..k])
    }

    /// Independent MDS oracle: every minor through the public submatrix API.
    fn mds_by_submatrices(a: &Matrix) -> bool {
        let k = a.order();
        (1..=k).all(|s| {
            (0..k).combinations(s).all(|r| {
                (0..k)
                    .combinations(s)
                    .all(|c| !a.submatrix(&r, &c).unwrap().determinant().is_zero())
            })
        })
    }

    #[test]
    fn minor_counts() {
        assert_eq!(mds_minor_count(1), 1);
        assert_eq!(mds_minor_count(3), 19);
        assert_eq!(mds_minor_count(4), 69);
        assert_eq!(mds_minor_count(6), 923);
    }

    #[test]
    fn mds_basics() {
        let f = gf4();
        let twin = circulant(&row(f, &[1, 1]));
        let report = is_mds(&twin);
        assert!(!report.verdict);
        assert_eq!(
            report.witness,
            Some(Witness::SingularMinor {
                rows: vec![0, 1],
                cols: vec![0, 1]
            })
        );
        let id = Matrix::identity(f, 3);
        assert_eq!(
            is_mds(&id).witness,
            Some(Witness::SingularMinor {
                rows: vec![0],
                cols: vec![1]
            })
        );
        assert!(is_mds(&Matrix::identity(f, 1)).verdict);
    }

    #[test]
    fn mds_agrees_with_submatrix_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = FieldSpec::new(3, 0xb).unwrap();
        let mut positives = 0;
        for t in 0..3000 {
            let k = 2 + t % 3;
            let a = circulant(&random_row(&mut rng, f, k));
            let report = is_mds(&a);
            assert_eq!(report.verdict, mds_by_submatrices(&a));
            positives += usize::from(report.verdict);
            if let Some(Witness::SingularMinor { rows, cols }) = report.witness {
                assert!(a.submatrix(&rows, &cols).unwrap().determinant().is_zero());
            }
        }
        assert!(positives > 0);
    }

    #[test]
    fn gcd_greater_than_one_is_never_mds() {
        let f = FieldSpec::new(4, 0x13).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let r = random_row(&mut rng, f, 4);
            let report = gcd_obstruction(2, &r).unwrap();
            assert!(report.verdict);
            assert!(!is_mds(&g_circulant(2, &r)).verdict);
        }
        assert!(gcd_obstruction(3, &random_row(&mut rng, f, 4)).is_err());
    }

    #[test]
    fn orthogonality_and_involution() {
        let f = gf4();
        for s in KCycle::all(4) {
            assert!(is_orthogonal(&s.permutation().to_matrix(f)).verdict);
        }
        let gf2 = FieldSpec::gf2();
        let c = circulant(&row(gf2, &[1, 1, 0]));
        let r = is_orthogonal(&c);
        assert!(!r.verdict);
        // (1,1,0) . (1,1,0) = 0 on the diagonal
        assert_eq!(
            r.witness,
            Some(Witness::Entry {
                row: 0,
                col: 0,
                expected: Element::ONE,
                found: Element::ZERO
            })
        );
        assert!(is_involutory(&Matrix::identity(f, 3)).verdict);
        assert!(!is_involutory(&shift_matrix(f, 3)).verdict);
    }

    #[test]
    fn branch_numbers_small() {
        let f = gf4();
        let bn = branch_numbers(&Matrix::identity(f, 3), DEFAULT_BRANCH_BUDGET).unwrap();
        assert_eq!((bn.differential, bn.linear), (2, 2));
        assert!(matches!(
            branch_numbers(
                &Matrix::identity(FieldSpec::aes(), 6),
                DEFAULT_BRANCH_BUDGET
            ),
            Err(PropsError::BudgetExceeded { .. })
        ));
        // Every MDS 3x3 circulant over GF(4) reaches k + 1.
        let mut found = 0;
        for code in 0..64u16 {
            let a = circulant(&row(f, &[code & 3, (code >> 2) & 3, code >> 4]));
            let bn = branch_numbers(&a, DEFAULT_BRANCH_BUDGET).unwrap();
            if is_mds(&a).verdict {
                found += 1;
                assert_eq!((bn.differential, bn.linear), (4, 4));
            } else {
                assert!(bn.differential < 4 || bn.linear < 4);
            }
        }
        assert!(found > 0);
    }

    #[test]
    fn branch_consistency() {
        let f = gf4();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for seed in 0..5 {
            let a = Matrix::from_fn(f, 3, |_, _| Element::from_bits(rng.gen_range(0..4)));
            assert!(
                mds_branch_consistency(&a, 20, seed, DEFAULT_BRANCH_BUDGET)
                    .unwrap()
                    .verdict
            );
        }
        let id = Matrix::identity(f, 3);
        assert!(
            mds_branch_consistency(&id, 0, 0, DEFAULT_BRANCH_BUDGET)
                .unwrap()
                .verdict
        );
    }

    #[test]
    fn mds_closure_under_inverse_transpose_and_diagonal_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let f = FieldSpec::new(4, 0x13).unwrap();
        let mut seen = 0;
        while seen < 40 {
            let a = circulant(&random_row(&mut rng, f, 3));
            if !is_mds(&a).verdict {
                continue;
            }
            seen += 1;
            assert!(is_mds(&a.inverse().unwrap()).verdict);
            assert!(is_mds(&a.transpose()).verdict);
            let diag = |rng: &mut ChaCha8Rng| {
                let d: Vec<Element> = (0..3)
                    .map(|_| Element::from_bits(rng.gen_range(1..16)))
                    .collect();
                Matrix::from_fn(f, 3, |i, j| if i == j { d[i] } else { Element::ZERO })
            };
            let (d1, d2) = (diag(&mut rng), diag(&mut rng));
            assert!(is_mds(&d1.mat_mul(&a).unwrap().mat_mul(&d2).unwrap()).verdict);
            let p = random_permutation(&mut rng, 3).to_matrix(f);
            let q = random_permutation(&mut rng, 3).to_matrix(f);
            assert!(is_mds(&p.mat_mul(&a).unwrap().mat_mul(&q).unwrap()).verdict);
        }
    }

    #[test]
    fn gh_products() {
        let f = FieldSpec::aes();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..50 {
            let (ra, rb) = (random_row(&mut rng, f, 5), random_row(&mut rng, f, 5));
            assert!(gh_product_law(1, 1, &ra, &rb).unwrap().verdict);
            assert!(gh_product_law(3, 2, &ra, &rb).unwrap().verdict);
            let ab = g_circulant(3, &ra).mat_mul(&g_circulant(2, &rb)).unwrap();
            assert_eq!(shift_law_violation(&ab, 1), None);
        }
        assert!(gh_product_law(
            1,
            1,
            &random_row(&mut rng, f, 5),
            &random_row(&mut rng, f, 4)
        )
        .is_err());
    }

    #[test]
    fn conjugation() {
        let f = FieldSpec::aes();
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for g in 0..5 {
            let r = random_row(&mut rng, f, 5);
            assert!(shift_conjugation_law(g, &r).verdict);
        }
        assert!(shift_conjugation_law(3, &FirstRow::unit(f, 5)).verdict);
        // Conjugation and the shift law coincide on arbitrary matrices.
        for t in 0..300 {
            let k = 2 + t % 4;
            let g = t % k;
            let m = if t % 2 == 0 {
                g_circulant(g, &random_row(&mut rng, gf4(), k))
            } else {
                Matrix::from_fn(gf4(), k, |_, _| Element::from_bits(rng.gen_range(0..4)))
            };
            assert_eq!(
                conjugation_holds(&m, g),
                shift_law_violation(&m, g).is_none()
            );
        }
    }

    #[test]
    fn power_of_two_lemmas() {
        let f16 = FieldSpec::new(4, 0x13).unwrap();
        let (report, scalar) = scalar_power_law(&FirstRow::unit(f16, 4), 3, 2).unwrap();
        assert!(report.verdict);
        assert_eq!(scalar, Element::ONE);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let r = random_row(&mut rng, f16, 4);
            let (report, scalar) = scalar_power_law(&r, 3, 2).unwrap();
            assert!(report.verdict);
            assert_eq!(scalar, f16.pow(r.sum(), 4));
        }
        assert!(matches!(
            scalar_power_law(&FirstRow::unit(f16, 3), 1, 2),
            Err(PropsError::BadOrder(_))
        ));
        assert!(matches!(
            scalar_power_law(&FirstRow::unit(f16, 4), 2, 2),
            Err(PropsError::NotCoprime { .. })
        ));
        assert_eq!(
            det_formula(&FirstRow::unit(f16, 8), 5, 3).unwrap(),
            (Element::ONE, Element::ONE)
        );
        let zero_sum = row(f16, &[3, 5, 9, 15]);
        assert_eq!(
            det_formula(&zero_sum, 3, 2).unwrap(),
            (Element::ZERO, Element::ZERO)
        );
        let f = FieldSpec::aes();
        for _ in 0..200 {
            let r = random_row(&mut rng, f, 4);
            let (formula, det) = det_formula(&r, 1, 2).unwrap();
            assert_eq!(formula, det);
        }
    }

    #[test]
    fn divisibility() {
        let report = divisibility_law(3, 2).unwrap();
        assert!(report.verdict);
        assert_eq!(
            report.witness,
            Some(Witness::Divisibility {
                quotient: "40".into(),
                two_adic_valuation: 3,
                product_form_agrees: true
            })
        );
        match divisibility_law(3, 1).unwrap().witness {
            Some(Witness::Divisibility { quotient, .. }) => assert_eq!(quotient, "4"),
            other => panic!("{other:?}"),
        }
        // (5+1)(25+1)(625+1) = 97656
        match divisibility_law(5, 3).unwrap().witness {
            Some(Witness::Divisibility {
                quotient,
                two_adic_valuation,
                ..
            }) => {
                assert_eq!(quotient, "97656");
                assert!(two_adic_valuation >= 3);
            }
            other => panic!("{other:?}"),
        }
        for g in (3..200).step_by(2) {
            for d in 1..=6 {
                assert!(divisibility_law(g, d).unwrap().verdict, "g={g} d={d}");
            }
        }
        assert!(divisibility_law(4, 2).is_err());
        assert!(divisibility_law(1, 2).is_err());
        assert!(divisibility_law(3, 0).is_err());
    }

    #[test]
    fn circulant_equivalence_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let c = distinct_row(&mut rng, 5);
        let f = c.field();
        let pick =
            |idx: &[usize]| FirstRow::new(f, idx.iter().map(|&i| c.get(i)).collect()).unwrap();
        let same = perm_equiv_circulant(&c, &c).unwrap();
        assert_eq!(same.witness, Some(Witness::AffinePair { a: 0, b: 1 }));
        let ra = pick(&[0, 2, 4, 1, 3]);
        let rb = pick(&[0, 3, 1, 4, 2]);
        let r = perm_equiv_circulant(&ra, &rb).unwrap();
        assert!(r.verdict);
        assert_eq!(r.witness, Some(Witness::AffinePair { a: 0, b: 4 }));
        // Swapping two symbols of five is not affine.
        let shuffled = pick(&[1, 0, 2, 3, 4]);
        assert!(!perm_equiv_circulant(&c, &shuffled).unwrap().verdict);
        // Rebuilt permutations really relate the circulants.
        let (p1, p2) = circulant_equivalence_permutations(5, 0, 4);
        let lhs = p1
            .to_matrix(f)
            .mat_mul(&circulant(&ra))
            .unwrap()
            .mat_mul(&p2.to_matrix(f))
            .unwrap();
        assert_eq!(lhs, circulant(&rb));
    }

    #[test]
    fn circulant_equivalence_is_symmetric_and_reflexive() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for t in 0..400 {
            let k = 2 + t % 6;
            let ra = random_row(&mut rng, gf4(), k);
            let mut idx: Vec<usize> = (0..k).collect();
            if t % 3 == 0 {
                idx.shuffle(&mut rng);
            } else {
                let b = (1..k).filter(|&b| gcd(k, b) == 1).collect::<Vec<_>>();
                let b = *b.choose(&mut rng).unwrap_or(&1);
                let a = rng.gen_range(0..k);
                idx = (0..k).map(|i| (b * i + a) % k).collect();
            }
            let rb = FirstRow::new(gf4(), idx.iter().map(|&i| ra.get(i)).collect()).unwrap();
            assert!(perm_equiv_circulant(&ra, &ra).unwrap().verdict);
            assert_eq!(
                perm_equiv_circulant(&ra, &rb).unwrap().verdict,
                perm_equiv_circulant(&rb, &ra).unwrap().verdict
            );
        }
    }

    #[test]
    fn cyclic_equivalence() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let c = distinct_row(&mut rng, 5);
        let rho1 = parse_cycle("(0 2 4 1 3)", 5).unwrap();
        let rho2 = parse_cycle("(0 3 1 4 2)", 5).unwrap();
        let r = perm_equiv_cyclic(&rho1, &rho2, &c).unwrap();
        assert!(r.verdict, "{r:?}");
        let Some(Witness::PermutationPair { left, right }) = r.witness else {
            panic!("missing witness");
        };
        let f = c.field();
        let p1 = Permutation::new(left).unwrap().to_matrix(f);
        let p3 = Permutation::new(right).unwrap().to_matrix(f);
        let lhs = p1
            .mat_mul(&cyclic(&rho1, &c).unwrap())
            .unwrap()
            .mat_mul(&p3)
            .unwrap();
        assert_eq!(lhs, cyclic(&rho2, &c).unwrap());
        assert!(perm_equiv_cyclic(&rho1, &rho1, &c).unwrap().verdict);
        // Every pair of 5-cycles on a distinct row rebuilds a valid pair when the
        // associated circulants are affine-related.
        for a in KCycle::all(5) {
            for b in KCycle::all(5) {
                let r = perm_equiv_cyclic(&a, &b, &c).unwrap();
                let aa = associated_circulant(&a, &c).unwrap().0;
                let bb = associated_circulant(&b, &c).unwrap().0;
                assert_eq!(r.verdict, perm_equiv_circulant(&aa, &bb).unwrap().verdict);
            }
        }
    }

    #[test]
    fn obstruction_on_permutation_matrix() {
        let f = FieldSpec::new(4, 0x13).unwrap();
        let report = orthogonality_obstruction_2d(&FirstRow::unit(f, 4), 3, 2).unwrap();
        assert!(report.verdict);
        assert_eq!(
            report.witness,
            Some(Witness::Obstruction {
                even_sum: Element::ONE,
                odd_sum: Element::ZERO,
                singular_half: Half::Odd,
                rows: vec![0, 2],
                cols: vec![1, 3],
            })
        );
        let not_orth = row(f, &[1, 1, 0, 0]);
        assert!(matches!(
            orthogonality_obstruction_2d(&not_orth, 1, 2),
            Err(PropsError::NotOrthogonal { .. })
        ));
        assert!(matches!(
            orthogonality_obstruction_2d(&row(f, &[1, 0]), 1, 1),
            Err(PropsError::BadOrder(_))
        ));
    }

    #[test]
    fn even_rows_of_power_of_two_g_circulant_form_sub_g_circulants() {
        let f = FieldSpec::aes();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for d in 2..=4u32 {
            let k = 1usize << d;
            for g in (1..k).step_by(2) {
                let r = random_row(&mut rng, f, k);
                let a = g_circulant(g, &r);
                let evens: Vec<usize> = (0..k).step_by(2).collect();
                let odds: Vec<usize> = (1..k).step_by(2).collect();
                let even_row = FirstRow::new(f, evens.iter().map(|&i| r.get(i)).collect()).unwrap();
                let odd_row = FirstRow::new(f, odds.iter().map(|&i| r.get(i)).collect()).unwrap();
                assert_eq!(
                    a.submatrix(&evens, &evens).unwrap(),
                    g_circulant(g, &even_row)
                );
                assert_eq!(
                    a.submatrix(&evens, &odds).unwrap(),
                    g_circulant(g, &odd_row)
                );
            }
        }
    }

    #[test]
    fn left_circulant_orthogonality_equals_involution() {
        let f = gf4();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..300 {
            let a = left_circulant(&random_row(&mut rng, f, 3));
            assert_eq!(is_orthogonal(&a).verdict, is_involutory(&a).verdict);
        }
    }
}
