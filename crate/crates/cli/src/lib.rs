//! Command-line front end: figure CSVs, single bounds as JSON and the
//! self-verification report.

pub mod bound;
pub mod figures;
pub mod verify;
