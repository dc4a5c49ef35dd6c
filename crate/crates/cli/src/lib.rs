//! Problem documents, command dispatch and reports for `toeplitz-calc`.

pub mod build;
pub mod error;
pub mod problem;
pub mod report;
pub mod run;

pub use error::CliError;
pub use problem::{parse_problem, ProblemSpec, Task};
pub use report::Report;
pub use run::{run, Flags};
