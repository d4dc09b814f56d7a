//! Native litmus testing for weak memory behaviour.
//!
//! A [`LitmusTest`](model::LitmusTest) is a handful of threads racing on a
//! tiny shared state. The [`runner`] executes it millions of times over a
//! large array of states, the outcomes land in a [`Histogram`], and every
//! outcome is classified as acceptable, interesting or forbidden by the
//! test's [`OutcomeSpec`](model::OutcomeSpec). The [`oracle`] enumerates
//! what sequential consistency and TSO allow, which keeps the hand-written
//! specs of the built-in [`suite`] honest.
//!
//! ```
//! use litmus::oracle::{enumerate_outcomes, MemoryModel};
//! use litmus::suite::builtin_registry;
//!
//! let suite = builtin_registry();
//! let sb = suite.by_name("sb.relaxed").unwrap();
//! let sc = enumerate_outcomes(sb.twin.as_ref().unwrap(), MemoryModel::Sc).unwrap();
//! assert_eq!(sc.len(), 3);
//! ```

pub mod cli;
pub mod histogram;
pub mod model;
pub mod oracle;
pub mod report;
pub mod runner;
pub mod suite;

pub use histogram::{decode_outcome, encode_outcome, Histogram, OutcomeKey};
pub use model::{
    AccessMode, LitmusTest, Loc, Outcome, OutcomeSpec, OutcomeType, Reg, Registry, TestState,
};
pub use oracle::{enumerate_outcomes, validate_spec, AbstractProgram, Instruction, MemoryModel};
pub use report::{compare, FreqStyle, RunReport};
pub use runner::{run_test, AffinityScheme, RunParams};
pub use suite::{builtin_registry, builtin_suite, SuiteEntry};
