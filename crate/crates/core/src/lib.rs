// Negated comparisons are how NaN gets rejected alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
mod math;
pub mod huffman;
pub mod nml;
pub mod oracle;
pub mod primitives;
pub mod solver;
pub mod tilted;

pub use error::{Error, Result};
pub use primitives::{Arity, CodeLengths, Distribution, DivergenceBall, PrefixCode};
