//! Scenario-driven front end for the core analyses: JSON/CSV interchange,
//! validated scenario files, a staged runner, and the randomized consistency
//! suite backing the command-line tool.

pub mod json;
pub mod runner;
pub mod scenario;
pub mod suite;
