//! Bioassay modelling toolkit: growth, kinetic and dose-response curves,
//! their Fisher information, fitting, low-dose extrapolation, covariate
//! efficiency, summary-table consistency and stochastic hazard simulation.

pub mod birth_death;
pub mod cli;
pub mod curves;
pub mod efficiency;
pub mod error;
pub mod estimation;
pub mod fisher;
pub mod lowdose;
pub mod models;
pub mod special;
pub mod tables;

pub use error::{Error, Result};
