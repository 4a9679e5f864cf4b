#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod basis;
pub mod error;
pub mod field;
pub mod int;
pub mod latticegraph;
pub mod laurent;
pub mod linalg;
mod packed;
pub mod poly;
pub mod pairing;
pub mod quiver;
pub mod shuffle;
pub mod words;

pub use error::{Error, Result};
