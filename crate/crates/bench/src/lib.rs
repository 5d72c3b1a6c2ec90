//! Fixtures shared by the benchmarks.

use cyclic_mds::search::reference_examples;
use cyclic_mds::structured::circulant;
use cyclic_mds::{Element, FieldSpec, Matrix};

/// Pseudo-random element stream, fixed so runs compare across commits.
pub fn elements(field: FieldSpec, n: usize) -> Vec<Element> {
    let mask = field.order() - 1;
    let mut x: u32 = 0x9e37_79b9;
    (0..n)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 17;
            x ^= x << 5;
            Element::from_bits((x & mask) as u16)
        })
        .collect()
}

pub fn dense(field: FieldSpec, k: usize) -> Matrix {
    Matrix::new(field, k, elements(field, k * k)).expect("k * k entries")
}

/// The 6x6 orthogonal MDS circulant over gf(2^8)/0x11b.
pub fn mds_6x6() -> Matrix {
    circulant(&reference_examples().circulant_6)
}
