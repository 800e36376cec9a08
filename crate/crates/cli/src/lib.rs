//! File formats, a parallel experiment runner and the `trustvote`
//! command-line tool built on [`trustvote_core`].

pub mod cli;
pub mod io;
pub mod runner;

pub use trustvote_core as core;
