//! Library side of the `gvlab` command: named checks, probes, configuration,
//! sweeps and the JSON report.

pub mod checks;
pub mod config;
pub mod probes;
pub mod report;
pub mod sweep;
pub mod tolerances;
pub mod verbs;
