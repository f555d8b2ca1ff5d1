//! Command-line front end: configuration, subcommands, result files and
//! SVG plots.

pub mod cli;
pub mod commands;
pub mod config;
pub mod output;
pub mod plot;
