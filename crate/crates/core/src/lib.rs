//! Exact lattice oracles, lattice sparsification, and the sampling reductions
//! built on top of them: discrete Gaussian sampling from a CVP oracle, centered
//! discrete Gaussian sampling from an SVP oracle, lattice-point counting, and the
//! inverse reductions back to CVP and approximate SVP.
//!
//! All membership, coordinate, and norm comparisons are exact. Floating point is
//! used only for probabilities and for steering enumeration, where every candidate
//! is re-checked with exact integer arithmetic.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod counting;
mod enumerate;
pub mod error;
pub mod gauss1d;
pub mod lattice;
pub mod norms;
pub mod numeric;
pub mod oracles;
pub mod reductions;
pub mod rng;
pub mod samplers;
pub mod sparsify;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{Basis, BitLengthBounds, IntBasis, IntShifted, Rational, RationalVector, ShiftedLattice};
