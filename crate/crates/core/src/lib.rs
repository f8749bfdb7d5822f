pub mod callgraph;
pub mod commands;
pub mod error;
pub mod experiment;
pub mod formats;
pub mod model;
pub mod predictor;
pub mod provision;
pub mod registry;
pub mod sim;
pub mod suite;
