//! A finite-universe laboratory for enumeration reducibility and
//! autoreducibility.
//!
//! Sets live in `{0,…,N−1}` and are stored as [`BitVector`]s. Enumeration
//! operators are explicit axiom lists; autoreduction procedures, left-c.e.
//! approximations, the prefix-free compression machine and the subset
//! diagonalizations are all built from them and checked by brute force.
//!
//! Measure-valued results are generic over [`Scalar`]; the aliases below fix
//! the exact and floating instantiations.

pub mod autoreduce;
pub mod cototal;
pub mod diagonal;
pub mod enumop;
pub mod prefixmachine;
pub mod scalar;
pub mod universe;
pub mod witness;

pub use autoreduce::{AutoreductionProcedure, DensityReport, Estimate, PsiKind, PsiTable, Verdict};
pub use cototal::{LeftCEReal, Watcher};
pub use diagonal::{DiagonalState, StageOutcome};
pub use enumop::{apply_composed, parse_operator, reify_composition, EnumerationOperator};
pub use prefixmachine::{MachineInput, Report};
pub use scalar::Scalar;
pub use universe::{BitVector, SetEnumeration, Universe};
pub use witness::WitnessReport;

/// Exact rational measure.
pub type Rational = num_rational::Ratio<u64>;
/// Density report with exact measures.
pub type ExactDensityReport = DensityReport<Rational>;
/// Density report in `f64`.
pub type DensityReport64 = DensityReport<f64>;
/// Density report in `f32`.
pub type DensityReport32 = DensityReport<f32>;
/// Monte-Carlo fraction in `f64`.
pub type Estimate64 = Estimate<f64>;
