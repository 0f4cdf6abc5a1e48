//! Experiment runner for the logNLS laboratory: TOML-configured commands,
//! content-addressed run directories with manifests, and the acceptance
//! suite.

pub mod acceptance;
pub mod config;
pub mod experiment;
pub mod manifest;
pub mod runner;
