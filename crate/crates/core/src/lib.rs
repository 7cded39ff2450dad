//! Exact verification, construction and embedding of Reichenbachian common
//! cause systems in finite probability spaces.
//!
//! A common cause system of size `n` for a positively correlated pair
//! `(A, B)` is a partition `{C_1, …, C_n}` of positive-measure cells, each of
//! which screens off `A` from `B`, and whose conditional probabilities of `A`
//! and `B` are ordered the same way across every pair of cells.
//!
//! The crate covers the whole path, all in exact rational arithmetic:
//!
//! - [`space`]: finite spaces, events, partitions, conditional probability.
//! - [`forks`]: conjunctive fork and common cause system verifiers, and the
//!   covariance decomposition over a partition.
//! - [`admissibility`]: the admissible and admissible* number sets, and a
//!   diagnosis showing how screening defects can cancel in the joint sum.
//! - [`construct`]: admissible* sets of any size `n ≥ 2`.
//! - [`extend`]: an extension space carrying a common cause system for the
//!   embedded pair, plus a homomorphism checker.
//! - [`oracle`]: brute-force partition enumeration and an independent
//!   integer-arithmetic verifier.
//! - [`report`]: the command layer behind the `rccs` binary.

pub mod admissibility;
pub mod cli;
pub mod construct;
pub mod error;
pub mod extend;
pub mod forks;
pub mod gen;
pub mod oracle;
pub mod rational;
pub mod report;
pub mod space;

pub use admissibility::{
    check_admissible, check_admissible_star, diagnose_cancellation, extract_admissible_star,
    realize_counterexample, AdmissibilityReport, AdmissibleSet, AdmissibleStarSet, DiagnosisReport,
};
pub use construct::{
    complete_tail, construct_admissible_star, solve_joint_constraint, ConstructionRequest,
    CoreChoice, Mode, Schedule, TailCompletion,
};
pub use error::{Error, Result};
pub use extend::{extend_with_rccs, verify_homomorphism, ExtensionResult, SplitWeights};
pub use forks::{correlation_decomposition, verify_fork, verify_rccs, ForkReport, RccsReport};
pub use oracle::{enumerate_rccs, verify_by_enumeration, SearchBudget};
pub use rational::Rational;
pub use space::{CorrelationSummary, Event, Partition, ProbSpace, SpaceDocument};
