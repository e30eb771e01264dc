//! Configuration, checkpoint persistence, and diagnostics output.

pub mod checkpoint;
pub mod config;
pub mod csv;

pub use checkpoint::{load_checkpoint, save_checkpoint, LoadedCheckpoint, MAGIC, VERSION};
pub use config::{load_config, parse_config, PicardSettings, RunConfig};
pub use csv::{format_diagnostics_csv, read_diagnostics_csv, write_diagnostics_csv};
