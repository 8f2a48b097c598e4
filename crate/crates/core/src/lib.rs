//! Minimal sets of integer sets under the digit-subsequence order.

pub mod automata;
pub mod cli;
pub mod engine;
pub mod error;
pub mod numerals;
pub mod oracles;
pub mod provers;
pub mod report;

pub use error::{Error, Result};
pub use numerals::{
    incomparable, is_subsequence, reduce_to_antichain, to_numeral, Antichain, Numeral,
};
