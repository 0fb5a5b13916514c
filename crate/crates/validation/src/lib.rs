//! Cross-checking material for `swcu-core`: a generator of small random
//! knowledge bases and a brute-force scorer written without any of the
//! core crate's retrieval or reasoning code. The acceptance suite compares
//! the two on every generated KB.

pub mod microkb;
pub mod oracle;
