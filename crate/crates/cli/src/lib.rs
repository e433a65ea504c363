//! Command line front end: dataset serialization, reports and commands.

pub mod commands;
pub mod dataset;
pub mod report;
