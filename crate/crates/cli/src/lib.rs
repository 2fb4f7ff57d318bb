//! Run configs, artifact writers and subcommand bodies behind the `mrrbf` binary.

pub mod commands;
pub mod config;
pub mod output;
