//! Instance generators, sequential oracles and the accuracy harness.

pub mod generate;
pub mod oracle;
pub mod suite;

pub use generate::{generate_instance, generate_instance_unbounded, node_range, GenError, InstanceSpec};
pub use oracle::{oracle_solve, OracleError};
pub use suite::{run_suite, write_csv, write_size_csv, CaseRow, SuiteConfig, SuiteReport};
