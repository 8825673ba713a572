//! Sparse power series of fields on a finite metric space: weighted tree
//! norms, field maps and their calculus, and certified contraction solvers
//! for implicit systems of field equations.

pub mod background;
pub mod calculus;
pub mod error;
pub mod field_maps;
pub mod io;
pub mod metric_space;
mod numeric;
pub mod oracle;
mod poly;
pub mod sampling;
pub mod series_algebra;
pub mod solver;
pub mod verdict;
pub mod weights;

pub use error::{Error, Result};
pub use field_maps::{ComplexMatrix, FieldMapKernel};
pub use metric_space::{MetricSpace, Point};
pub use numeric::{binomial, lp_norm, CompensatedSum};
pub use poly::{Truncation, DEFAULT_DEGREE_CAP};
pub use series_algebra::{CoefficientSystem, FieldVector, MultiTuple};
pub use verdict::{BoundCheck, Checked, Verdict};
pub use weights::{DegreeProfile, WeightSystem};
