//! Rates and bounds for compressing ensembles of mixed quantum states.
//!
//! The crate is organised bottom-up: [`qmat`] holds validated dense
//! operators, [`measures`] entropies and fidelities, [`purify`] canonical
//! purifications, [`classical`] the classical coin protocol, [`rates`] the
//! bound/scheme reports and [`blocksim`] finite-block coding experiments.

pub mod blocksim;
pub mod classical;
pub mod cli;
pub mod error;
pub mod io;
pub mod measures;
pub mod purify;
pub mod qmat;
pub mod random;
pub mod rates;
pub mod selftest;

pub use error::{Error, Result};
