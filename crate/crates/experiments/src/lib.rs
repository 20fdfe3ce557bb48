//! Experiment runners for `cachecast`: figure presets, a generic parameter
//! sweep, the property suite, and the row formats the CLI writes.

pub mod config;
pub mod output;
pub mod runners;
pub mod suite;

pub use config::{Config, Settings};
pub use output::{write_rows, Format, Row};
pub use suite::{run_property_suite, CheckRow};
