//! Core machinery for the Stavskaya probabilistic cellular automaton.
//!
//! The crate is `no_std` (it needs `alloc`) and covers four layers:
//!
//! - [`process`]: exact finite-window simulation of the two-stage update
//!   (the `D` spreading stage followed by the `R_α` erasure stage).
//! - [`percolation`]: oriented site percolation on the space-time triangle
//!   and the pathwise coupling with the process.
//! - [`contours`]: nice paths on the dual graph, their exact α-polynomial
//!   weights and the transition-equation tables.
//! - [`bound`]: the 3×3 transfer matrix, its Perron root, and the
//!   certificate that the process started from all ones does not converge
//!   to the all-zeros measure.
//!
//! IO, parallel replicas and file formats live in the `stavskaya` crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bound;
pub mod contours;
mod error;
pub mod percolation;
pub mod process;
pub mod rng;

pub use error::{Error, Result};

/// The golden ratio `(1 + √5) / 2`, the default choice of `p`.
pub const PHI: f64 = 1.618_033_988_749_895;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Parameter { name, reason: "must lie in [0, 1]" })
    }
}
