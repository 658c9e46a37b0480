//! Exact arithmetic for truncated Witt vectors and the de Rham-Witt complex of polynomial
//! algebras over `F_p`.

pub mod checks;
pub mod cli;
pub mod drwalgebra;
pub mod drwbasis;
pub mod error;
pub mod lazard;
pub mod linalg;
pub mod oracle;
pub mod poly;
pub mod pseudoval;
pub mod sample;
pub mod structure;
pub mod util;
pub mod wittcore;

pub use error::{Error, Result};
