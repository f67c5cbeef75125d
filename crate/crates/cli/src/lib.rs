//! Library surface of the `bioclust` command-line tool, split out so the
//! pipeline can be driven from integration tests.

pub mod commands;
pub mod error;
pub mod fio;
pub mod plots;
