//! Library side of the `lagrange` command line tool: configuration,
//! region scans with an on-disk cache, curve export, Netpbm output and the
//! acceptance checks behind `lagrange verify`.

pub mod commands;
pub mod config;
pub mod grid;
pub mod raster;
pub mod verify;
