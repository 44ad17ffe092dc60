//! Instance files, synthetic data, metrics and benchmark sweeps around
//! [`slr_core`], plus the `slr` command-line tool.

pub mod bench;
pub mod instance;
pub mod methods;
pub mod metrics;
pub mod synth;

pub use bench::{run_bench, BenchConfig};
pub use instance::{GroundTruth, InstanceDoc};
pub use methods::{run_method, Method, MethodOutcome, MethodParams};
pub use metrics::{relative_error, residual_error};
pub use synth::{generate, SyntheticSpec};
