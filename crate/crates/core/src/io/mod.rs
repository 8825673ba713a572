//! File formats and command drivers behind the `fieldmaps` binary.

pub mod commands;
pub mod instance;
pub mod report;

pub use commands::{run_command, Command, CommandOptions, Outcome};
pub use instance::{load_instance, parse_instance, InstanceFile};
pub use report::{to_canonical_json, Report};
