//! Circulant, g-circulant and cyclic matrices over GF(2^m): construction,
//! MDS / orthogonality / branch-number checks, and exhaustive search.

pub mod gf2m;
pub mod matrix;
pub mod props;
pub mod search;
pub mod structured;

pub use gf2m::{Element, FieldSpec, GfError};
pub use matrix::{Matrix, MatrixError};
pub use props::{BranchNumbers, PropertyReport, PropsError, Witness};
pub use search::{CampaignResult, CampaignSpec, Certificate, SearchError, SuiteReport};
pub use structured::{FirstRow, KCycle, Permutation, Shape, StructureError};
