//! Norms, convergence studies, the weak-L¹ inequality, the L¹ operator norm and
//! the L¹-unboundedness counterexample.

pub mod counterexample;
pub mod fixtures;
pub mod norms;
pub mod opnorm;
pub mod quad;
pub mod study;
pub mod weak_l1;

pub use counterexample::{counterexample_run, CounterexampleReport};
pub use fixtures::{Fixture, Regularity};
pub use norms::{norm, parse_norms, NormKind};
pub use opnorm::{l1_operator_norm, OperatorNormReport};
pub use study::{convergence_study, trace_check, BoundCheck, Family, StudyReport, TraceReport};
pub use weak_l1::{weak_l1_check, WeakL1Report};
