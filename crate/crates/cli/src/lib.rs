//! Library half of the `springhop` command-line tool: configuration loading,
//! CSV/SVG output, scenario suites, and subcommand drivers. The binary in
//! `main.rs` is a thin argument-parsing layer over these modules.

pub mod config;
pub mod output;
pub mod plot;
pub mod run;
pub mod scenarios;
