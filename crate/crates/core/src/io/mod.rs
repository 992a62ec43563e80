//! On-disk formats: `RIMD` datasets, `RIMC` checkpoints, TOML scenario
//! configuration, CSV frames and spectra, and JSON reports.

pub mod config;
pub mod csv;
pub mod report;
pub mod rimc;
pub mod rimd;

pub use config::ScenarioConfig;
pub use report::{to_json_bytes, write_json, JsonLines};
pub use rimc::{decode_rimc, encode_rimc, read_rimc, write_rimc};
pub use rimd::{parse_rimd, read_rimd, write_rimd, RimdDataset, RimdHeader, RimdWriter};
