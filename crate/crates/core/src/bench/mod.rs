//! Problem generators, the experiment harness and CSV plumbing.

pub mod config;
pub mod generate;
pub mod harness;
pub mod io;
pub mod records;

pub use config::{parse_config, Experiment, GeneratorSpec, ProblemSpec, SpectrumSpec};
pub use harness::{run_suite, MethodId};
pub use records::{read_records, summarize, BenchRecord, Status};
